//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::time::{Duration, Instant};

use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskset::consistency::{
    beta, check_cocycle, check_martingale_worstcase, check_mptc_direct, check_supermartingale, find_worst_case_dual, PenaltyKind, ProcessKind,
    Value, Verdict,
};
use riskset::duals::{in_w_shp, sample_dual_pairs, sample_price_systems, DualPair, OrthComplement, SamplerConfig};
use riskset::instance::Instance;
use riskset::num::{int, ExtRat, Rat};
use riskset::riskmeasures::entropic::{compose_entropic, risk_entropic};
use riskset::riskmeasures::shp::{shp_matches_oracle, shp_recursion};
use riskset::riskmeasures::RiskModel;
use riskset::scalarize::{rho, rho_dual_value};
use riskset::scenario::{NodeVector, VectorMeasure};

const FLOAT_TOL: f64 = 1e-9;
const CLOSED_FORM_TOL: f64 = 1e-12;
const SEED: u64 = 20;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn exact_nonneg(g: &Option<Value>) -> bool {
    matches!(g, Some(Value::Exact(v)) if *v >= ExtRat::zero())
}

fn random_terminal(inst: &Instance, rng: &mut ChaCha8Rng) -> NodeVector<Rat> {
    let tree = inst.tree();
    NodeVector::from_fn(tree, tree.horizon(), |_| (0..tree.d()).map(|_| int(rng.gen_range(-4..=4))).collect())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let inst = common::instance("avar_tree.json");
    let tree = inst.tree();
    let (_, x) = &inst.portfolios[0];
    let mut checked = 0;
    let mut pairs = 0;
    for t in 0..tree.horizon() {
        for pair in sample_dual_pairs(tree, t, 100, SEED, &SamplerConfig::default()) {
            pairs += 1;
            for s in t + 1..=tree.horizon() {
                let r = check_supermartingale(&inst.engine, &pair, x, s, ProcessKind::V).map_err(|e| e.to_string())?;
                ensure(r.verdict == Verdict::Pass && exact_nonneg(&r.gap), format!("t={t} s={s}: {:?} gap {:?}", r.verdict, r.gap))?;
                checked += 1;
            }
        }
    }
    let ce = common::instance("avar_counterexample.json");
    let (_, y) = &ce.portfolios[0];
    let negative = ce
        .pairs_at(0, None, None)
        .iter()
        .filter(|p| {
            check_supermartingale(&ce.engine, p, y, 1, ProcessKind::V)
                .is_ok_and(|r| r.verdict == Verdict::Fail && matches!(&r.gap, Some(Value::Exact(g)) if *g < ExtRat::zero()))
        })
        .count();
    ensure(negative > 0, "no sampled pair with a negative gap on the counterexample")?;
    let direct = check_mptc_direct(&ce.engine, y, 0, 1).map_err(|e| e.to_string())?;
    let strict = direct.note.as_deref().is_some_and(|n| n.starts_with("strict inclusion"));
    let witness = direct.witness.as_ref().is_some_and(|w| w.verified && w.recheck() == Some(true));
    ensure(direct.verdict == Verdict::Fail && strict && witness, format!("mptc-direct on counterexample: {:?}", direct.note))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("{pairs} pairs / {checked} (t,s) checks exact gap >= 0; counterexample: {negative} negative gaps, strict-inclusion witness; {elapsed:.1?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    for name in ["avar_tree.json", "shp_bid_ask.json"] {
        let inst = common::instance(name);
        let (_, x) = &inst.portfolios[0];
        for t in 0..inst.tree().horizon() {
            let r = check_mptc_direct(&inst.engine, x, t, t + 1).map_err(|e| e.to_string())?;
            ensure(r.verdict == Verdict::Pass, format!("{name} t={t}: {:?}", r.note))?;
            checks += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("A_t = A_(t,t+1) + A_(t+1) both ways at {checks} (fixture, t); {elapsed:.1?}"))
}

fn criterion_3() -> Outcome {
    let mut exact = 0;
    let mut finite = 0;
    let mut worst_float = 0f64;
    for name in ["avar_tree.json", "shp_bid_ask.json", "entropic_tree.json"] {
        let inst = common::instance(name);
        let tree = inst.tree();
        for t in 0..tree.horizon() {
            for pair in inst.pairs_at(t, Some(40), Some(SEED)) {
                for s in t + 1..=tree.horizon() {
                    for kind in [PenaltyKind::Beta, PenaltyKind::Alpha] {
                        let r = check_cocycle(&inst.engine, &pair, s, kind).map_err(|e| e.to_string())?;
                        match &r.gap {
                            Some(Value::Exact(g)) => {
                                ensure(*g == ExtRat::zero() && r.verdict == Verdict::Pass, format!("{name} t={t} s={s}: gap {g}"))?;
                                exact += 1;
                                if !beta(&inst.engine, &pair).map_err(|e| e.to_string())?.total.is_pos_inf() {
                                    finite += 1;
                                }
                            }
                            Some(Value::Float(g)) => {
                                ensure(g.abs() <= FLOAT_TOL, format!("{name} t={t} s={s}: gap {g:e}"))?;
                                worst_float = worst_float.max(g.abs());
                            }
                            None => ensure(r.verdict == Verdict::Pass, format!("{name}: {:?}", r.note))?,
                        }
                    }
                }
            }
        }
    }
    ensure(finite > 0, "every polyhedral pair had an empty penalty")?;
    Ok(format!("{exact} exact zero gaps (AV@R, SHP; {finite} with finite beta_t); entropic max |gap| {worst_float:.1e}"))
}

/// Transitions halfway between the pair's and `P`'s.
fn halfway(inst: &Instance, pair: &DualPair) -> DualPair {
    let tree = inst.tree();
    let trans = pair
        .q
        .transitions()
        .iter()
        .map(|q| q.iter().enumerate().map(|(n, v)| (v + tree.p(n)) / int(2)).collect())
        .collect();
    DualPair::new(tree, VectorMeasure::new(tree, trans).unwrap(), pair.w.clone()).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut done = 0;
    for name in ["avar_tree.json", "shp_bid_ask.json", "entropic_tree.json"] {
        let inst = common::instance(name);
        let d = inst.tree().d();
        for k in 0..4 {
            let x = if k == 0 { inst.portfolios[0].1.clone() } else { random_terminal(&inst, &mut rng) };
            let w0: Vec<Rat> = (0..d).map(|_| int(rng.gen_range(1..=3))).collect();
            let pair = match find_worst_case_dual(&inst.engine, &x, &w0) {
                Ok(p) => p,
                Err(riskset::Error::Improper(_)) if name == "shp_bid_ask.json" => continue,
                Err(e) => return Err(format!("{name}: {e}")),
            };
            let r = check_martingale_worstcase(&inst.engine, &pair, &x).map_err(|e| e.to_string())?;
            ensure(r.verdict == Verdict::Pass, format!("{name}: {:?} {:?}", r.verdict, r.note))?;
            done += 1;
        }
    }
    ensure(done >= 8, format!("only {done} worst-case pairs"))?;
    let inst = common::instance("avar_tree.json");
    let (_, x) = &inst.portfolios[0];
    let pair = find_worst_case_dual(&inst.engine, x, &[int(1), int(1)]).map_err(|e| e.to_string())?;
    let perturbed = halfway(&inst, &pair);
    let mut positive = None;
    for s in 1..=inst.tree().horizon() {
        let r = check_supermartingale(&inst.engine, &perturbed, x, s, ProcessKind::V).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Pass, "perturbed pair broke the supermartingale property")?;
        if let Some(Value::Exact(ExtRat::Finite(g))) = &r.gap {
            if *g > int(0) && positive.is_none() {
                positive = Some((s, g.clone()));
            }
        }
    }
    let (s, g) = positive.ok_or("perturbed pair is still a martingale")?;
    Ok(format!("{done} worst-case pairs are martingales; perturbed pair has gap {g} at (0,{s})"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut per_fixture = Vec::new();
    for name in ["avar_tree.json", "shp_bid_ask.json", "avar_counterexample.json"] {
        let inst = common::instance(name);
        let tree = inst.tree();
        let mut strong = 0;
        let mut tries = 0;
        while strong < 50 {
            tries += 1;
            ensure(tries < 1000, format!("{name}: only {strong} finite scalarizations"))?;
            let x = random_terminal(&inst, &mut rng);
            let t = rng.gen_range(0..tree.horizon());
            let w = NodeVector::from_fn(tree, t, |_| {
                let mut v: Vec<Rat> = (0..tree.d()).map(|_| int(rng.gen_range(0..=3))).collect();
                if v.iter().all(|a| *a == int(0)) {
                    v[0] = int(1);
                }
                v
            });
            let res = rho(&inst.engine, &x, &w).map_err(|e| e.to_string())?;
            if !res.primal.is_finite() {
                continue;
            }
            ensure(res.gap == Some(ExtRat::zero()), format!("{name}: gap {:?}", res.gap))?;
            let pair = res.pair.as_ref().unwrap();
            let again = rho_dual_value(&inst.engine, &x, pair, &OrthComplement::zero(tree, t)).map_err(|e| e.to_string())?;
            ensure(again == res.primal, format!("{name}: extracted pair gives {again}, primal {}", res.primal))?;
            strong += 1;
        }
        per_fixture.push(strong);
    }
    let inst = common::instance("avar_tree.json");
    let tree = inst.tree();
    let mut weak = 0;
    let mut violations = 0;
    for t in 0..tree.horizon() {
        let count = if t == 0 { 168 } else { 166 };
        for pair in sample_dual_pairs(tree, t, count, SEED + t as u64, &SamplerConfig::default()) {
            let x = random_terminal(&inst, &mut rng);
            let primal = rho(&inst.engine, &x, &pair.w).map_err(|e| e.to_string())?.primal;
            let dual = rho_dual_value(&inst.engine, &x, &pair, &OrthComplement::zero(tree, t)).map_err(|e| e.to_string())?;
            if dual > primal {
                violations += 1;
            }
            weak += 1;
        }
    }
    ensure(weak >= 500 && violations == 0, format!("{violations} weak duality violations in {weak}"))?;
    Ok(format!("strong duality exact on {per_fixture:?} (X, w) per fixture; weak duality on {weak} pairs, 0 violations"))
}

fn criterion_6() -> Outcome {
    let inst = common::instance("shp_bid_ask.json");
    let tree = inst.tree();
    let RiskModel::Shp { market } = inst.engine.model() else { return Err("not a superhedging fixture".into()) };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut xs: Vec<NodeVector<Rat>> = vec![inst.portfolios[0].1.clone()];
    xs.extend((0..5).map(|_| random_terminal(&inst, &mut rng)));
    for x in &xs {
        let (sets, _) = shp_recursion(tree, market, x).map_err(|e| e.to_string())?;
        for n in 0..tree.len() {
            ensure(shp_matches_oracle(tree, market, x, n, sets[n].poly()), format!("recursion differs from the strategy LP at {}", tree.name(n)))?;
        }
        let via = inst.engine.risk_at(x, tree.root()).map_err(|e| e.to_string())?;
        ensure(via.poly().set_eq(sets[tree.root()].poly()), "acceptance route differs at the root")?;
    }
    let mut pairs = Vec::new();
    for t in 0..tree.horizon() {
        let sampled = sample_price_systems(tree, market, t, 40, SEED);
        ensure(sampled.len() == 40, format!("only {} price systems at t={t}", sampled.len()))?;
        for p in &sampled {
            ensure(in_w_shp(tree, p, market).is_ok_and(|m| m.member) && p.q.is_equivalent(), "sampled pair outside the dual set")?;
        }
        pairs.extend(sampled);
    }
    ensure(!pairs.is_empty(), "no pairs in the dual set")?;
    let mut checks = 0;
    for pair in &pairs {
        for x in &xs {
            for s in pair.t + 1..=tree.horizon() {
                let r = check_supermartingale(&inst.engine, pair, x, s, ProcessKind::Vc).map_err(|e| e.to_string())?;
                ensure(r.verdict == Verdict::Pass, format!("conditional supermartingale fails at s={s}: {:?}", r.witness))?;
                checks += 1;
            }
        }
    }
    Ok(format!(
        "recursion = strategy LP at every node for {} portfolios; node-wise supermartingale on {} sampled price systems, {checks} checks",
        xs.len(),
        pairs.len()
    ))
}

fn runner(mut config: Config) -> TestRunner {
    config.failure_persistence = None;
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn criterion_7() -> Outcome {
    let tree = riskset::scenario::ScenarioTree::uniform(&[2], 1, 1).unwrap();
    let x = NodeVector::new(&tree, 1, vec![vec![1.0], vec![-1.0]]).unwrap();
    let corner = risk_entropic(&tree, &x, &[1.0], 0).map_err(|e| e.to_string())?.values()[0][0];
    let err = (corner - 1f64.cosh().ln()).abs();
    ensure(err <= CLOSED_FORM_TOL, format!("log cosh 1 off by {err:e}"))?;
    let mut runner = runner(Config::with_cases(200));
    let strategy = (common::tree(3, 3, 2, 2), proptest::collection::vec(-30i64..=30, 1..20), proptest::collection::vec(1u32..=20, 2));
    let worst = std::cell::Cell::new(0f64);
    runner
        .run(&strategy, |(tree, vals, r)| {
            let rates: Vec<f64> = r.iter().map(|&k| k as f64 / 10.0).collect();
            let x = common::terminal(&tree, &vals).map(|v| v / int(10)).to_float();
            let comp = compose_entropic(&tree, &x, &rates).unwrap();
            for t in 0..=tree.horizon() {
                let direct = risk_entropic(&tree, &x, &rates, t).unwrap();
                for (a, b) in comp[t].values().iter().flatten().zip(direct.values().iter().flatten()) {
                    let e = (a - b).abs();
                    worst.set(worst.get().max(e));
                    proptest::prop_assert!(e <= CLOSED_FORM_TOL, "{a} vs {b}");
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("log cosh error {err:.1e}; compose vs direct on 200 random trees, max error {:.1e}", worst.get()))
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    for (name, law) in common::laws::LAWS {
        let mut config = Config::with_cases(500);
        config.max_global_rejects = 5000;
        let mut runner = runner(config);
        runner.run(&common::laws::case(), |c| law(&c)).map_err(|e| format!("{name}: {e}"))?;
        parts.push(name);
    }
    Ok(format!("500 exact cases each: {}", parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("MPTC iff supermartingale", criterion_1),
        ("recursion iff acceptance-sum", criterion_2),
        ("cocycle", criterion_3),
        ("worst-case martingale", criterion_4),
        ("scalarization duality", criterion_5),
        ("superhedging", criterion_6),
        ("entropic closed form", criterion_7),
        ("polyhedral law suite", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.1}s]", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
