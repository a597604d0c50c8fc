//! Exact polyhedral calculus: H/V conversion, Minkowski sum and difference,
//! support values and containment certificates.

use riskset::num::rat;
use riskset::polycalc::{format_vec, ivec, Polyhedron, Row};

fn show(name: &str, p: &Polyhedron) {
    println!("{name}:");
    for r in &p.hrep().ineqs {
        println!("  {} . x >= {}", format_vec(&r.a), r.b);
    }
    let v = p.vrep();
    for x in &v.vertices {
        println!("  vertex {}", format_vec(x));
    }
    for x in &v.rays {
        println!("  ray    {}", format_vec(x));
    }
    for x in &v.lines {
        println!("  line   {}", format_vec(x));
    }
}

fn main() {
    // x + y >= 1, x >= 0, y >= 0
    let a = Polyhedron::from_hrep(
        2,
        vec![Row::new(ivec(&[1, 1]), rat(1, 1)), Row::new(ivec(&[1, 0]), rat(0, 1)), Row::new(ivec(&[0, 1]), rat(0, 1))],
    );
    show("A", &a);

    let b = Polyhedron::from_vrep(2, vec![ivec(&[0, 0]), ivec(&[-1, 0]), ivec(&[0, -1])], vec![], vec![]);
    let sum = a.minkowski_sum(&b);
    show("A + B", &sum);
    let (back, vacuous) = sum.minkowski_subtract(&b);
    show("(A + B) -. B", &back);
    println!("vacuous: {vacuous}, contains A: {}", back.contains(&a).is_ok());

    println!("inf (2,1).x over A = {}", a.support_value(&ivec(&[2, 1])));
    println!("inf (1,-1).x over A = {}", a.support_value(&ivec(&[1, -1])));

    let shifted = a.translate(&ivec(&[1, 0]));
    match shifted.contains(&a) {
        Ok(()) => println!("A + (1,0) contains A"),
        Err(v) => println!("A + (1,0) misses {:?} {} of A: row {} . x >= {}", v.kind, format_vec(&v.generator), format_vec(&v.row.a), v.row.b),
    }
    let proj = sum.project_generators(&[0]);
    show("projection of A + B on x", &proj);
}
