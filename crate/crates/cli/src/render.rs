//! Text renderings of command results for the terminal.

use std::fmt::Write;

use clap::ValueEnum;
use noregret::scalar::format_rational;
use noregret::verify::VerificationReport;

use crate::commands::{BenchRow, LpOutput, SimulationSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

pub fn report(r: &VerificationReport, format: Format) -> String {
    match format {
        Format::Table => r.to_string(),
        Format::Json => json(r),
        Format::Csv => {
            let mut s = String::from("description,left,relation,right,holds\n");
            for c in &r.checks {
                let rel = serde_json::to_value(c.relation).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    csv_escape(&c.description),
                    format_rational(&c.left),
                    csv_escape(&rel),
                    format_rational(&c.right),
                    c.holds
                );
            }
            s
        }
    }
}

pub fn lp(out: &LpOutput, format: Format) -> String {
    match format {
        Format::Json => json(out),
        Format::Table | Format::Csv => {
            let exact = out.exact.as_ref();
            let cell = |key: &str, j: usize, fallback: f64| {
                exact.and_then(|e| e[key][j].as_str().map(str::to_string)).unwrap_or_else(|| fallback.to_string())
            };
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut s = format!("j{sep}x{sep}u\n");
            for j in 0..out.x.len() {
                let _ = writeln!(s, "{}{sep}{}{sep}{}", j + 1, cell("x", j, out.x[j]), cell("u", j, out.u[j]));
            }
            if format == Format::Table {
                let obj = exact.and_then(|e| e["objective"].as_str().map(str::to_string)).unwrap_or_else(|| out.objective.to_string());
                let tot = exact.and_then(|e| e["total"].as_str().map(str::to_string)).unwrap_or_else(|| out.total.to_string());
                let _ = writeln!(s, "revenue per buyer {obj}, total over {} buyers {tot}", out.n);
            }
            s
        }
    }
}

pub fn simulation(summary: &SimulationSummary, format: Format) -> String {
    match format {
        Format::Json => json(summary),
        Format::Table | Format::Csv => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut s = format!("trial{sep}rounds{sep}revenue{sep}welfare{sep}revenue_ratio{sep}max_regret{sep}accounting_residual\n");
            for t in &summary.trials {
                let m = &t.summary;
                let worst = m.regret.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let _ = writeln!(
                    s,
                    "{}{sep}{}{sep}{:.6}{sep}{:.6}{sep}{:.6}{sep}{:.6}{sep}{:.3e}",
                    m.trial, m.rounds, m.revenue, m.welfare, m.revenue_ratio, worst, m.accounting_residual
                );
            }
            s
        }
    }
}

pub fn bench(rows: &[BenchRow], format: Format) -> String {
    match format {
        Format::Json => json(&rows),
        Format::Table | Format::Csv => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut s = format!("learner{sep}trial{sep}revenue_ratio{sep}max_regret_per_round{sep}max_mean_based_violation\n");
            for r in rows {
                let kind = serde_json::to_value(r.learner).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{kind}{sep}{}{sep}{:.6}{sep}{:.6}{sep}{:.6}",
                    r.trial, r.revenue_ratio, r.max_regret_per_round, r.max_mean_based_violation
                );
            }
            s
        }
    }
}
