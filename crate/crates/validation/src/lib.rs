//! Shared plumbing for the acceptance runs: instance builders and the one-line verdict format.

use std::fmt::Write;

use noregret::engine::{AuctionConfig, SimulationConfig};
use noregret::learners::LearnerConfig;
use noregret::ValueDistribution;

/// Outcome of one numbered criterion.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub details: Vec<String>,
}

impl Verdict {
    pub fn new(id: usize, name: &'static str) -> Self {
        Self { id, name, pass: true, details: Vec::new() }
    }

    /// Records a sub-check; any failing sub-check fails the criterion.
    pub fn require(&mut self, ok: bool, detail: impl Into<String>) -> bool {
        let d = detail.into();
        self.details.push(format!("[{}] {d}", if ok { "ok" } else { "no" }));
        self.pass &= ok;
        ok
    }

    pub fn line(&self) -> String {
        format!("criterion {:>2} {:<4} {}", self.id, if self.pass { "PASS" } else { "FAIL" }, self.name)
    }

    pub fn render(&self) -> String {
        let mut s = self.line();
        for d in &self.details {
            let _ = write!(s, "\n    {d}");
        }
        s
    }
}

pub fn quarters() -> ValueDistribution<f64> {
    ValueDistribution::uniform(vec![0.25, 0.5, 0.75, 1.0]).expect("valid distribution")
}

/// Two buyers on the quarters distribution facing the full-surplus-extraction auction.
pub fn fse_run(horizon: usize, phases: usize, learner: LearnerConfig, seed: u64, trials: usize) -> SimulationConfig {
    let mut cfg = SimulationConfig::new(quarters(), 2, horizon, AuctionConfig::Fse { phases, epsilon: None }, learner);
    cfg.seed = seed;
    cfg.trials = trials;
    cfg
}
