//! `riskset compute|check|report`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consistency::{self as cons, CheckReport, PenaltyKind, ProcessKind, Value, Verdict, Witness};
use crate::duals::{DualPair, OrthComplement};
use crate::error::{Error, Result};
use crate::instance::{CheckSpec, Instance};
use crate::num::{fmt_rat, parse_rat, ExtRat, Rat};
use crate::riskmeasures::shp::{shp_matches_oracle, shp_recursion};
use crate::riskmeasures::{NodeSetJson, RiskModel};
use crate::scalarize;
use crate::scenario::NodeVector;

#[derive(Parser, Debug)]
#[command(name = "riskset", version, about = "Set-valued dynamic risk measures on scenario trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Dump R_t(X) at every node.
    Compute {
        instance: PathBuf,
        #[arg(long)]
        portfolio: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Corner / generator table.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
    /// Run consistency checks; exit 1 if any fails.
    Check {
        instance: PathBuf,
        /// Comma separated check names; defaults to the instance's list or
        /// the full battery.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        /// Sampled pairs per time.
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
    /// Aggregate report files.
    Report {
        reports: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

pub const CHECKS: &[&str] = &[
    "supermartingale",
    "supermartingale-conditional",
    "cocycle-beta",
    "cocycle-alpha",
    "martingale-worstcase",
    "mptc-direct",
    "scalarization",
    "weak-duality",
    "shp-oracle",
];

/// Output of `riskset check`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBatch {
    pub instance: String,
    pub seed: u64,
    pub reports: Vec<CheckReport>,
}

#[derive(Clone, Debug, Serialize)]
struct ComputeOutput<'a> {
    instance: &'a str,
    model: &'a str,
    portfolio: &'a str,
    process: Vec<NodeSetJson>,
}

/// Options of a check run.
#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub checks: Vec<String>,
    pub pairs: Option<usize>,
    pub seed: Option<u64>,
    pub timings: bool,
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.cmd)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("RISKSET_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Error::Parse(format!("RISKSET_THREADS={v:?}")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Io(e.to_string()))
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Compute { instance, portfolio, out, csv, timings } => {
            let start = Instant::now();
            let inst = Instance::from_path(&instance)?;
            let (json, table) = compute(&inst, portfolio.as_deref())?;
            emit(out.as_deref(), &json)?;
            if let Some(p) = csv {
                write_file(&p, &table)?;
            }
            if timings {
                eprintln!("runtime_ms: {:.3}", start.elapsed().as_secs_f64() * 1e3);
            }
            Ok(0)
        }
        Cmd::Check { instance, checks, pairs, seed, out, timings } => {
            let inst = Instance::from_path(&instance)?;
            let opts = CheckOptions { checks, pairs, seed, timings };
            let batch = run_checks(&inst, &opts)?;
            emit(out.as_deref(), &to_json(&batch)?)?;
            Ok(if batch.reports.iter().all(CheckReport::passed) { 0 } else { 1 })
        }
        Cmd::Report { reports, format, out } => {
            let mut all = Vec::new();
            for p in &reports {
                all.extend(read_reports(p)?);
            }
            emit(out.as_deref(), &render(&all, format)?)?;
            Ok(0)
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Reads a `check` output, or a bare list of reports.
pub fn read_reports(path: &Path) -> Result<Vec<CheckReport>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if let Ok(b) = serde_json::from_str::<ReportBatch>(&text) {
        return Ok(b.reports);
    }
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// The set process of one portfolio as JSON, and a CSV table of corners and
/// generators.
pub fn compute(inst: &Instance, portfolio: Option<&str>) -> Result<(String, String)> {
    let name = match portfolio {
        Some(p) => p.to_string(),
        None if inst.portfolios.len() == 1 => inst.portfolios[0].0.clone(),
        None => return Err(Error::Parse("several portfolios; pick one with --portfolio".into())),
    };
    let x = inst.portfolio(&name)?;
    let process = inst.engine.risk_process(x)?.to_json(inst.tree());
    let table = csv_table(inst.tree().d(), &process);
    let out = ComputeOutput { instance: &inst.name, model: inst.engine.model().name(), portfolio: &name, process };
    Ok((to_json(&out)?, table))
}

fn csv_table(d: usize, process: &[NodeSetJson]) -> String {
    let mut s = String::from("node,t,kind,index");
    for i in 0..d {
        let _ = write!(s, ",x{}", i + 1);
    }
    s.push('\n');
    let mut line = |node: &str, t: usize, kind: &str, k: usize, v: Vec<String>| {
        let _ = writeln!(s, "{node},{t},{kind},{k},{}", v.join(","));
    };
    for j in process {
        if let Some(c) = &j.corner {
            line(&j.node, j.t, "corner", 0, c.clone());
        } else if let Some(c) = &j.float_corner {
            line(&j.node, j.t, "float_corner", 0, c.iter().map(|v| format!("{v:e}")).collect());
        } else if let Some(p) = &j.set {
            if p.empty {
                line(&j.node, j.t, "empty", 0, vec![String::new(); d]);
            }
            for (k, v) in p.vertices.iter().enumerate() {
                line(&j.node, j.t, "vertex", k, v.iter().map(fmt_rat).collect());
            }
            for (k, v) in p.rays.iter().enumerate() {
                line(&j.node, j.t, "ray", k, v.iter().map(fmt_rat).collect());
            }
        }
    }
    s
}

#[derive(Clone, Debug)]
enum Task {
    Pair { check: String, portfolio: Option<usize>, pair_index: usize, pair: DualPair, s: Option<usize> },
    Portfolio { check: String, portfolio: usize, t: usize, s: usize, direction: Vec<Rat> },
}

fn default_checks(model: &RiskModel) -> Vec<&'static str> {
    let mut v = vec!["supermartingale", "supermartingale-conditional", "cocycle-beta", "cocycle-alpha", "martingale-worstcase"];
    if model.is_polyhedral() {
        v.extend(["mptc-direct", "scalarization", "weak-duality"]);
    } else {
        v.extend(["scalarization", "weak-duality"]);
    }
    if matches!(model, RiskModel::Shp { .. }) {
        v.push("shp-oracle");
    }
    v
}

fn plan(inst: &Instance, opts: &CheckOptions) -> Result<Vec<Task>> {
    let tree = inst.tree();
    let horizon = tree.horizon();
    let specs: Vec<CheckSpec> = if !opts.checks.is_empty() {
        let mut v = Vec::new();
        for name in &opts.checks {
            if !CHECKS.contains(&name.as_str()) {
                return Err(Error::Parse(format!("unknown check {name:?}")));
            }
            let given: Vec<CheckSpec> = inst.checks.iter().filter(|c| &c.name == name).cloned().collect();
            if given.is_empty() {
                v.push(CheckSpec { name: name.clone(), t: None, s: None, direction: None });
            } else {
                v.extend(given);
            }
        }
        v
    } else if !inst.checks.is_empty() {
        inst.checks.clone()
    } else {
        default_checks(inst.engine.model()).into_iter().map(|n| CheckSpec { name: n.into(), t: None, s: None, direction: None }).collect()
    };
    let ones: Vec<Rat> = (0..tree.d()).map(|i| if i < tree.m() { Rat::from_integer(1.into()) } else { Rat::from_integer(0.into()) }).collect();
    let mut tasks = Vec::new();
    for spec in &specs {
        if !CHECKS.contains(&spec.name.as_str()) {
            return Err(Error::Parse(format!("unknown check {:?}", spec.name)));
        }
        let direction = match &spec.direction {
            Some(d) => d.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()?,
            None => ones.clone(),
        };
        let times: Vec<(usize, usize)> = match (spec.t, spec.s) {
            (Some(t), Some(s)) => vec![(t, s)],
            (Some(t), None) => vec![(t, t + 1)],
            (None, Some(s)) => (0..s).map(|t| (t, s)).collect(),
            (None, None) => (0..horizon).map(|t| (t, t + 1)).collect(),
        };
        if times.iter().any(|&(t, s)| s <= t || s > horizon) {
            return Err(Error::Index(format!("check {:?}: need t < s <= {horizon}", spec.name)));
        }
        let by_portfolio = |tasks: &mut Vec<Task>, t: usize, s: usize| {
            for p in 0..inst.portfolios.len() {
                tasks.push(Task::Portfolio { check: spec.name.clone(), portfolio: p, t, s, direction: direction.clone() });
            }
        };
        match spec.name.as_str() {
            "martingale-worstcase" | "shp-oracle" => by_portfolio(&mut tasks, 0, 1.min(horizon)),
            "mptc-direct" => {
                for &(t, s) in &times {
                    by_portfolio(&mut tasks, t, s);
                }
            }
            "cocycle-beta" | "cocycle-alpha" => {
                for &(t, s) in &times {
                    for (k, pair) in inst.pairs_at(t, opts.pairs, opts.seed).into_iter().enumerate() {
                        tasks.push(Task::Pair { check: spec.name.clone(), portfolio: None, pair_index: k, pair, s: Some(s) });
                    }
                }
            }
            "scalarization" | "weak-duality" => {
                let ts: Vec<usize> = match spec.t {
                    Some(t) => vec![t],
                    None => (0..horizon).collect(),
                };
                for t in ts {
                    let pairs = inst.pairs_at(t, opts.pairs, opts.seed);
                    for p in 0..inst.portfolios.len() {
                        for (k, pair) in pairs.iter().enumerate() {
                            tasks.push(Task::Pair { check: spec.name.clone(), portfolio: Some(p), pair_index: k, pair: pair.clone(), s: None });
                        }
                    }
                }
            }
            _ => {
                for &(t, s) in &times {
                    let pairs = inst.pairs_at(t, opts.pairs, opts.seed);
                    for p in 0..inst.portfolios.len() {
                        for (k, pair) in pairs.iter().enumerate() {
                            tasks.push(Task::Pair { check: spec.name.clone(), portfolio: Some(p), pair_index: k, pair: pair.clone(), s: Some(s) });
                        }
                    }
                }
            }
        }
    }
    Ok(tasks)
}

/// Plans the checks and runs them in parallel; reports come back in plan
/// order.
pub fn run_checks(inst: &Instance, opts: &CheckOptions) -> Result<ReportBatch> {
    let tasks = plan(inst, opts)?;
    let reports = tasks
        .par_iter()
        .map(|task| {
            let start = Instant::now();
            let mut r = run_task(inst, task);
            if opts.timings {
                r.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            r
        })
        .collect();
    let seed = opts.seed.unwrap_or_else(|| inst.sampler.as_ref().map_or(0, |s| s.seed));
    Ok(ReportBatch { instance: inst.name.clone(), seed, reports })
}

fn skipped(check: &str, inst: &Instance, t: usize, s: Option<usize>, note: String) -> CheckReport {
    CheckReport {
        check: check.into(),
        model: inst.engine.model().name().into(),
        portfolio: None,
        pair: None,
        t,
        s,
        verdict: Verdict::Skipped,
        gap: None,
        witness: None,
        note: Some(note),
        runtime_ms: None,
    }
}

fn run_task(inst: &Instance, task: &Task) -> CheckReport {
    let (check, portfolio, pair_index, t, s) = match task {
        Task::Pair { check, portfolio, pair_index, pair, s } => (check, *portfolio, Some(*pair_index), pair.t, *s),
        Task::Portfolio { check, portfolio, t, s, .. } => (check, Some(*portfolio), None, *t, Some(*s)),
    };
    let mut r = run_task_inner(inst, task).unwrap_or_else(|e| skipped(check, inst, t, s, format!("error: {e}")));
    r.portfolio = portfolio.map(|p| inst.portfolios[p].0.clone());
    r.pair = pair_index;
    r
}

fn run_task_inner(inst: &Instance, task: &Task) -> Result<CheckReport> {
    let eng = &inst.engine;
    match task {
        Task::Pair { check, portfolio, pair, s, .. } => {
            let x = portfolio.map(|p| &inst.portfolios[p].1);
            match check.as_str() {
                "supermartingale" => cons::check_supermartingale(eng, pair, x.unwrap(), s.unwrap(), ProcessKind::V),
                "supermartingale-conditional" => cons::check_supermartingale(eng, pair, x.unwrap(), s.unwrap(), ProcessKind::Vc),
                "cocycle-beta" => cons::check_cocycle(eng, pair, s.unwrap(), PenaltyKind::Beta),
                "cocycle-alpha" => cons::check_cocycle(eng, pair, s.unwrap(), PenaltyKind::Alpha),
                "scalarization" => scalarization_report(inst, x.unwrap(), pair),
                "weak-duality" => weak_duality_report(inst, x.unwrap(), pair),
                other => Err(Error::Parse(format!("check {other:?} does not take pairs"))),
            }
        }
        Task::Portfolio { check, portfolio, t, s, direction } => {
            let x = &inst.portfolios[*portfolio].1;
            match check.as_str() {
                "mptc-direct" => {
                    if !eng.model().is_polyhedral() {
                        return Ok(skipped(check, inst, *t, Some(*s), "acceptance sets are not polyhedral".into()));
                    }
                    cons::check_mptc_direct(eng, x, *t, *s)
                }
                "martingale-worstcase" => {
                    let pair = cons::find_worst_case_dual(eng, x, direction)?;
                    cons::check_martingale_worstcase(eng, &pair, x)
                }
                "shp-oracle" => shp_oracle_report(inst, x),
                other => Err(Error::Parse(format!("check {other:?} needs pairs"))),
            }
        }
    }
}

fn base(check: &str, inst: &Instance, t: usize) -> CheckReport {
    let mut r = skipped(check, inst, t, None, String::new());
    r.verdict = Verdict::Pass;
    r.note = None;
    r
}

/// Primal and dual programs of `ρ_t(X)` in the direction `w` of the pair.
fn scalarization_report(inst: &Instance, x: &NodeVector<Rat>, pair: &DualPair) -> Result<CheckReport> {
    let mut r = base("scalarization", inst, pair.t);
    if let RiskModel::Entropic { rates } = inst.engine.model() {
        let xf = x.lift(inst.tree(), inst.tree().horizon()).to_float();
        let primal = scalarize::rho_entropic(inst.tree(), &xf, rates, &pair.w)?;
        let wc = cons::find_worst_case_dual(&inst.engine, x, &pair.w.values()[0]);
        let dual = match (pair.t, wc) {
            (0, Ok(wc)) => scalarize::rho_dual_entropic(inst.tree(), &xf, rates, &wc)?,
            _ => return Ok(skipped("scalarization", inst, pair.t, None, "dual attained only at t = 0 for a constant direction".into())),
        };
        let gap = primal - dual;
        r.gap = Some(Value::Float(gap));
        if gap.abs() > cons::FLOAT_TOL {
            r.verdict = Verdict::Fail;
        }
        return Ok(r);
    }
    let res = scalarize::rho(&inst.engine, x, &pair.w)?;
    match res.gap {
        Some(g) => {
            if g != ExtRat::zero() {
                r.verdict = Verdict::Fail;
            }
            r.gap = Some(Value::Exact(g));
        }
        None => {
            r.verdict = Verdict::Skipped;
            r.note = Some(format!("primal value {}", res.primal));
        }
    }
    Ok(r)
}

/// The dual objective of the pair never exceeds `ρ_t(X)` in its direction.
fn weak_duality_report(inst: &Instance, x: &NodeVector<Rat>, pair: &DualPair) -> Result<CheckReport> {
    let mut r = base("weak-duality", inst, pair.t);
    let gap = if let RiskModel::Entropic { rates } = inst.engine.model() {
        let xf = x.lift(inst.tree(), inst.tree().horizon()).to_float();
        let primal = scalarize::rho_entropic(inst.tree(), &xf, rates, &pair.w)?;
        Value::Float(primal - scalarize::rho_dual_entropic(inst.tree(), &xf, rates, pair)?)
    } else {
        let primal = scalarize::rho(&inst.engine, x, &pair.w)?.primal;
        let dual = scalarize::rho_dual_value(&inst.engine, x, pair, &OrthComplement::zero(inst.tree(), pair.t))?;
        Value::Exact(primal.gap(&dual))
    };
    if !gap.is_nonneg() {
        r.verdict = Verdict::Fail;
    }
    r.gap = Some(gap);
    Ok(r)
}

/// Backward recursion against the strategy LP at every node.
fn shp_oracle_report(inst: &Instance, x: &NodeVector<Rat>) -> Result<CheckReport> {
    let RiskModel::Shp { market } = inst.engine.model() else {
        return Ok(skipped("shp-oracle", inst, 0, None, "not a superhedging model".into()));
    };
    let tree = inst.tree();
    let mut r = base("shp-oracle", inst, 0);
    let (sets, _) = shp_recursion(tree, market, x)?;
    for n in 0..tree.len() {
        let via_acceptance = inst.engine.risk_at(x, n)?;
        if !shp_matches_oracle(tree, market, x, n, sets[n].poly()) || !via_acceptance.poly().set_eq(sets[n].poly()) {
            r.verdict = Verdict::Fail;
            r.t = tree.time(n);
            r.note = Some(format!("mismatch at node {}", tree.name(n)));
            break;
        }
    }
    Ok(r)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Skipped => "skipped",
    }
}

#[derive(Clone, Debug, Default, Serialize)]
struct Summary {
    check: String,
    pass: usize,
    fail: usize,
    skipped: usize,
}

fn summarize(reports: &[CheckReport]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    for r in reports {
        let i = match out.iter().position(|s| s.check == r.check) {
            Some(i) => i,
            None => {
                out.push(Summary { check: r.check.clone(), ..Default::default() });
                out.len() - 1
            }
        };
        match r.verdict {
            Verdict::Pass => out[i].pass += 1,
            Verdict::Fail => out[i].fail += 1,
            Verdict::Skipped => out[i].skipped += 1,
        }
    }
    out
}

fn gap_bin(g: Option<&Value>) -> usize {
    match g {
        None => 4,
        Some(v) if v.is_pos_inf() => 3,
        Some(v) if v.is_zero() => 1,
        Some(v) if v.is_nonneg() => 2,
        Some(_) => 0,
    }
}

const GAP_BINS: [&str; 5] = ["< 0", "= 0", "> 0", "+inf", "none"];

const COLUMNS: &str = "check,model,portfolio,pair,t,s,verdict,gap,witness_node,witness_verified";

fn row_fields(r: &CheckReport) -> Vec<String> {
    vec![
        r.check.clone(),
        r.model.clone(),
        r.portfolio.clone().unwrap_or_default(),
        r.pair.map(|p| p.to_string()).unwrap_or_default(),
        r.t.to_string(),
        r.s.map(|s| s.to_string()).unwrap_or_default(),
        verdict_name(r.verdict).into(),
        r.gap.as_ref().map(|g| g.to_string()).unwrap_or_default(),
        r.witness.as_ref().and_then(|w| w.node.clone()).unwrap_or_default(),
        r.witness.as_ref().map(|w: &Witness| w.verified.to_string()).unwrap_or_default(),
    ]
}

/// Renders a batch of reports as a table.
pub fn render(reports: &[CheckReport], format: Format) -> Result<String> {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                summary: Vec<Summary>,
                reports: &'a [CheckReport],
            }
            to_json(&Doc { summary: summarize(reports), reports })
        }
        Format::Csv => {
            let mut s = format!("{COLUMNS}\n");
            for r in reports {
                s.push_str(&row_fields(r).join(","));
                s.push('\n');
            }
            Ok(s)
        }
        Format::Md => {
            let mut s = String::from("## Summary\n\n| check | pass | fail | skipped |\n|---|---|---|---|\n");
            for x in summarize(reports) {
                let _ = writeln!(s, "| {} | {} | {} | {} |", x.check, x.pass, x.fail, x.skipped);
            }
            s.push_str("\n## Gaps\n\n| check |");
            for b in GAP_BINS {
                let _ = write!(s, " {b} |");
            }
            s.push_str("\n|---|");
            s.push_str(&"---|".repeat(GAP_BINS.len()));
            s.push('\n');
            for x in summarize(reports) {
                let mut counts = [0usize; 5];
                for r in reports.iter().filter(|r| r.check == x.check) {
                    counts[gap_bin(r.gap.as_ref())] += 1;
                }
                let _ = write!(s, "| {} |", x.check);
                for c in counts {
                    let _ = write!(s, " {c} |");
                }
                s.push('\n');
            }
            s.push_str("\n## Reports\n\n|");
            for c in COLUMNS.split(',') {
                let _ = write!(s, " {c} |");
            }
            s.push_str("\n|");
            s.push_str(&"---|".repeat(COLUMNS.split(',').count()));
            s.push('\n');
            for r in reports {
                let _ = writeln!(s, "| {} |", row_fields(r).join(" | "));
            }
            Ok(s)
        }
    }
}
