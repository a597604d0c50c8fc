//! Exact polyhedral calculus: double description conversions, Minkowski
//! algebra, projections, support values and containment.

pub mod dd;
pub mod fm;
mod polyhedron;
mod upper;

pub use polyhedron::{format_vec, GeneratorKind, HRep, Polyhedron, Row, VRep, Violation};
pub use upper::{HalfspaceSet, PolyJson, UpperPolyhedron};

use crate::num::Rat;

/// Projects an upper polyhedron given in stacked coordinates onto the
/// coordinates in `keep`.
pub fn project_eligible(p: &Polyhedron, keep: &[usize]) -> Polyhedron {
    fm::project(p, keep)
}

/// Convenience constructor from integer data, used heavily in tests and examples.
pub fn ivec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| crate::num::int(x)).collect()
}
