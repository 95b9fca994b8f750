use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use noregret::dist::ValueDistribution;
use noregret::engine::{self, phase_report, summarize, LearnerSpec, SimulationConfig, SimulationTrace, TraceSummary};
use noregret::learners::{mean_based_audit, regret, LearnerConfig, LearnerKind};
use noregret::lp::{solve_border_lp, solve_reduced_uniform_lp, solve_single_lp, LpSolution};
use noregret::scalar::{format_rational, parse_rational, Rational, Scalar};
use noregret::verify::{
    same_bid_alloc_bound, verify_bmsw_necessity, verify_counterexample, verify_nonconvexity, verify_uniform_suboptimality,
    VerificationReport,
};

use crate::config::LpProgram;
use crate::error::CliError;

/// Version of the summary and solution file layouts.
pub const FORMAT_VERSION: u32 = 1;

/// Programs up to this many support points are solved in exact arithmetic by default.
const RATIONAL_LP_MAX_M: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Numeric {
    Float,
    Rational,
}

/// `NOREGRET_NUMERIC` (`float` or `rational`) overrides `default`.
pub fn numeric_mode(default: Numeric) -> Result<Numeric, CliError> {
    match std::env::var("NOREGRET_NUMERIC") {
        Err(_) => Ok(default),
        Ok(v) => match v.to_ascii_lowercase().as_str() {
            "float" => Ok(Numeric::Float),
            "rational" => Ok(Numeric::Rational),
            "" => Ok(default),
            other => Err(CliError::Usage(format!("NOREGRET_NUMERIC must be float or rational, got {other:?}"))),
        },
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::io(path, e))?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    #[serde(flatten)]
    pub summary: TraceSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<engine::PhaseMetrics>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationSummary {
    pub format: u32,
    pub config: SimulationConfig,
    pub seed: u64,
    pub rounds: usize,
    pub trials: Vec<TrialReport>,
}

/// Wide per-round rows: revenue and welfare with running totals, then value, arm, payment and
/// realized utility for each buyer.
fn write_trace_csv(path: &Path, traces: &[SimulationTrace], n: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    let mut header: Vec<String> =
        ["trial", "round", "revenue", "welfare", "cum_revenue", "cum_welfare", "winner"].iter().map(|s| s.to_string()).collect();
    for i in 0..n {
        for col in ["value", "arm", "payment", "utility"] {
            header.push(format!("{col}_{i}"));
        }
    }
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    let mut row = Vec::with_capacity(header.len());
    for t in traces {
        let (mut cr, mut cw) = (0.0, 0.0);
        for r in 0..t.rounds() {
            let (rev, wel) = (t.revenue(r), t.welfare(r));
            cr += rev;
            cw += wel;
            row.clear();
            row.push(t.trial.to_string());
            row.push(r.to_string());
            row.push(rev.to_string());
            row.push(wel.to_string());
            row.push(cr.to_string());
            row.push(cw.to_string());
            row.push(t.winners[r].map(|w| w.to_string()).unwrap_or_default());
            for i in 0..n {
                row.push(t.value(r, i).to_string());
                row.push(t.arm(r, i).to_string());
                row.push(t.payment(r, i).to_string());
                row.push(t.utility(r, i).to_string());
            }
            w.write_record(&row).map_err(|e| CliError::io(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn run_simulation(cfg: &SimulationConfig, jobs: Option<usize>) -> Result<Vec<SimulationTrace>, CliError> {
    Ok(with_pool(jobs, || engine::run(cfg))??)
}

pub fn summarize_traces(cfg: &SimulationConfig, traces: &[SimulationTrace]) -> Result<SimulationSummary, CliError> {
    let fse = cfg.fse()?;
    let trials = traces
        .iter()
        .map(|t| {
            Ok(TrialReport {
                summary: summarize(t, &cfg.dist)?,
                phases: fse.as_ref().map(|f| phase_report(t, f)).transpose()?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SimulationSummary {
        format: FORMAT_VERSION,
        config: cfg.clone(),
        seed: cfg.seed,
        rounds: traces.iter().map(SimulationTrace::rounds).sum(),
        trials,
    })
}

/// Runs every trial and writes `trace.csv` and `summary.json` into `out`.
pub fn simulate(cfg: &SimulationConfig, out: &Path, jobs: Option<usize>) -> Result<SimulationSummary, CliError> {
    let traces = run_simulation(cfg, jobs)?;
    let summary = summarize_traces(cfg, &traces)?;
    ensure_dir(out)?;
    write_trace_csv(&out.join("trace.csv"), &traces, cfg.n)?;
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct LpOutput {
    pub format: u32,
    pub program: LpProgram,
    pub n: usize,
    pub numeric: Numeric,
    pub status: noregret::simplex::LpStatus,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Per-buyer revenue.
    pub objective: f64,
    /// Revenue over all `n` buyers.
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Value>,
}

fn solve<T: Scalar>(program: LpProgram, dist: &ValueDistribution<T>, n: usize) -> Result<LpSolution<T>, CliError> {
    Ok(match program {
        LpProgram::Single => solve_single_lp(dist)?,
        LpProgram::Border => solve_border_lp(dist, n)?,
        LpProgram::Uniform => solve_reduced_uniform_lp(dist, n)?,
    })
}

pub fn lp(program: LpProgram, dist: &ValueDistribution<Rational>, n: usize) -> Result<LpOutput, CliError> {
    let default = if dist.m() <= RATIONAL_LP_MAX_M { Numeric::Rational } else { Numeric::Float };
    let numeric = numeric_mode(default)?;
    let f = |v: &[f64]| v.to_vec();
    Ok(match numeric {
        Numeric::Rational => {
            let s = solve(program, dist, n)?;
            let fr = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
            let total = s.total_revenue(n);
            LpOutput {
                format: FORMAT_VERSION,
                program,
                n,
                numeric,
                status: s.status,
                x: s.x.iter().map(Scalar::as_f64).collect(),
                u: s.u.iter().map(Scalar::as_f64).collect(),
                objective: s.objective.as_f64(),
                total: total.as_f64(),
                exact: Some(json!({
                    "x": fr(&s.x),
                    "u": fr(&s.u),
                    "objective": format_rational(&s.objective),
                    "total": format_rational(&total),
                })),
            }
        }
        Numeric::Float => {
            let s = solve(program, &dist.to_f64(), n)?;
            LpOutput {
                format: FORMAT_VERSION,
                program,
                n,
                numeric,
                status: s.status,
                x: f(&s.x),
                u: f(&s.u),
                objective: s.objective,
                total: s.total_revenue(n),
                exact: None,
            }
        }
    })
}

pub fn counterexample(delta: &str, scale: &str) -> Result<VerificationReport, CliError> {
    Ok(verify_counterexample(&parse_rational(scale)?, &parse_rational(delta)?)?)
}

pub fn nonconvex() -> VerificationReport {
    verify_nonconvexity()
}

pub fn uniform_subopt() -> VerificationReport {
    verify_uniform_suboptimality()
}

pub fn samebid(q_s: &str, n: usize) -> Result<Rational, CliError> {
    Ok(same_bid_alloc_bound(&parse_rational(q_s)?, n)?)
}

/// Runs the first trial of `cfg` and checks its empirical allocations against the constraints.
pub fn bmsw(cfg: &SimulationConfig) -> Result<VerificationReport, CliError> {
    let trace = engine::run_trial(cfg, 0)?;
    let mech = cfg.build_mechanism()?;
    Ok(verify_bmsw_necessity(&trace, mech.as_ref()))
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub learner: LearnerKind,
    pub trial: usize,
    pub revenue_ratio: f64,
    /// Largest per-buyer regret divided by the horizon.
    pub max_regret_per_round: f64,
    /// Largest per-buyer fraction of selections trailing the leader by more than γT.
    pub max_mean_based_violation: f64,
}

/// Runs `cfg` once per learner kind, keeping every other learner setting from the config's
/// first buyer.
pub fn bench_learners(cfg: &SimulationConfig, kinds: &[LearnerKind], jobs: Option<usize>) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for &kind in kinds {
        let mut c = cfg.clone();
        c.learners = LearnerSpec::Shared(LearnerConfig { kind, ..cfg.learner(0).clone() });
        c.validate()?;
        let traces = run_simulation(&c, jobs)?;
        for t in &traces {
            let s = summarize(t, &c.dist)?;
            let gamma = c.learner(0).gamma_for(c.horizon);
            let rounds = t.rounds().max(1) as f64;
            let (mut worst_regret, mut worst_violation) = (f64::NEG_INFINITY, 0.0f64);
            for i in 0..c.n {
                worst_regret = worst_regret.max(regret(t, i) / rounds);
                worst_violation = worst_violation.max(mean_based_audit(t, i, gamma).frequency);
            }
            rows.push(BenchRow {
                learner: kind,
                trial: t.trial,
                revenue_ratio: s.revenue_ratio,
                max_regret_per_round: if c.n == 0 { 0.0 } else { worst_regret },
                max_mean_based_violation: worst_violation,
            });
        }
    }
    Ok(rows)
}
