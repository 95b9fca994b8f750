//! The repeated-auction simulator.
//!
//! Each round every buyer draws a value, picks an arm for it, the mechanism resolves the round,
//! and then each buyer sees the interim payoff of every arm under every support value against
//! the arms the others actually pulled. Those payoffs also accumulate into the per-buyer
//! counterfactual table `H` that regret and the phase analysis are stated in.

mod analysis;
mod config;
mod exact;

pub use analysis::{
    accounting_residual, counterfactual_table, empirical_xyu, phase_report, PhaseMetrics, XyuEstimate,
};
pub use config::{AuctionConfig, LearnerSpec, SimulationConfig};
pub use exact::{favourite_arm_margins, scripted_phase_payoff, switching_advantage, FavouriteMargin, SwitchDemo};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::auctions::{Fse, Interim, Mechanism};
use crate::dist::ValueDistribution;
use crate::error::Result;
use crate::learners::{Feedback, LearnerKind, LearnerState};

/// Everything recorded about one trial, in flat per-round arrays (`[t * n + i]` for per-buyer
/// entries).
#[derive(Clone, Debug, Serialize)]
pub struct SimulationTrace {
    pub n: usize,
    pub horizon: usize,
    pub trial: usize,
    pub support: Vec<f64>,
    pub labels: Vec<f64>,
    pub mechanism: String,
    /// Rewards handed to learners are divided by this bound.
    pub normalization: f64,
    pub feedback: Vec<Feedback>,
    pub value_idx: Vec<u32>,
    pub arms: Vec<u32>,
    pub winners: Vec<Option<u32>>,
    pub payments: Vec<f64>,
    /// Interim allocation and payoff of the pulled arm given the others' arms.
    pub expected_alloc: Vec<f64>,
    pub expected_reward: Vec<f64>,
    /// Normalized cumulative-reward gap between the best arm and the pulled arm at selection.
    pub gaps: Vec<f64>,
    /// Final counterfactual table per buyer, `[value][arm]`, in original units.
    pub final_h: Vec<Vec<Vec<f64>>>,
    /// Like `final_h` but summed only over the rounds in which the buyer held each value;
    /// its row maxima give the best fixed bid per value in hindsight.
    pub fixed_bid_totals: Vec<Vec<Vec<f64>>>,
    /// `(round, H per buyer)` snapshots taken before `round` when `record_sigma` is set.
    pub snapshots: Vec<(usize, Vec<Vec<Vec<f64>>>)>,
}

impl SimulationTrace {
    pub fn rounds(&self) -> usize {
        self.winners.len()
    }

    pub fn value_index(&self, t: usize, i: usize) -> usize {
        self.value_idx[t * self.n + i] as usize
    }

    pub fn value(&self, t: usize, i: usize) -> f64 {
        self.support[self.value_index(t, i)]
    }

    pub fn arm(&self, t: usize, i: usize) -> usize {
        self.arms[t * self.n + i] as usize
    }

    pub fn payment(&self, t: usize, i: usize) -> f64 {
        self.payments[t * self.n + i]
    }

    pub fn allocation(&self, t: usize, i: usize) -> f64 {
        if self.winners[t] == Some(i as u32) {
            1.0
        } else {
            0.0
        }
    }

    /// Realized utility `v · a − p`.
    pub fn utility(&self, t: usize, i: usize) -> f64 {
        self.value(t, i) * self.allocation(t, i) - self.payment(t, i)
    }

    pub fn revenue(&self, t: usize) -> f64 {
        self.payments[t * self.n..(t + 1) * self.n].iter().sum()
    }

    pub fn welfare(&self, t: usize) -> f64 {
        self.winners[t].map_or(0.0, |w| self.value(t, w as usize))
    }

    pub fn total_revenue(&self) -> f64 {
        (0..self.rounds()).map(|t| self.revenue(t)).sum()
    }

    pub fn total_welfare(&self) -> f64 {
        (0..self.rounds()).map(|t| self.welfare(t)).sum()
    }

    pub fn total_utility(&self, i: usize) -> f64 {
        (0..self.rounds()).map(|t| self.utility(t, i)).sum()
    }
}

/// Root seed and trial index mixed into an independent per-trial seed.
fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn draw_value(dist: &ValueDistribution<f64>, rng: &mut ChaCha8Rng) -> usize {
    let mut u: f64 = rng.gen();
    for (j, q) in dist.probs().iter().enumerate() {
        if u < *q {
            return j;
        }
        u -= q;
    }
    dist.m() - 1
}

enum Policy {
    Learn(Box<LearnerState>),
    Intended,
    /// Fixed arm per value.
    Fixed(Vec<usize>),
    Worst,
}

fn argmax(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Runs one trial of `config`.
pub fn run_trial(config: &SimulationConfig, trial: usize) -> Result<SimulationTrace> {
    config.validate()?;
    let mech = config.build_mechanism()?;
    let fse = config.fse()?;
    simulate(config, mech.as_ref(), fse.as_ref(), trial)
}

/// Runs every trial of `config` on the rayon pool; traces come back in trial order.
pub fn run(config: &SimulationConfig) -> Result<Vec<SimulationTrace>> {
    config.validate()?;
    (0..config.trials).into_par_iter().map(|trial| run_trial(config, trial)).collect()
}

fn simulate(config: &SimulationConfig, mech: &dyn Mechanism, fse: Option<&Fse<f64>>, trial: usize) -> Result<SimulationTrace> {
    let (n, horizon) = (config.n, config.horizon);
    let values = config.dist.support().to_vec();
    let m = values.len();
    let k = mech.num_arms();
    let labels: Vec<f64> = (0..k).map(|a| mech.label(a)).collect();
    let bound = config.dist.max_value() + mech.payment_bound();
    let norm = if bound > 0.0 { bound } else { 1.0 };

    let mut policies = Vec::with_capacity(n);
    for i in 0..n {
        let lc = config.learner(i);
        policies.push(match lc.kind {
            LearnerKind::Intended => Policy::Intended,
            LearnerKind::Worst => Policy::Worst,
            LearnerKind::Truthful => Policy::Fixed(
                values.iter().map(|&v| labels.iter().rposition(|&l| l <= v).unwrap_or(0)).collect(),
            ),
            _ => Policy::Learn(Box::new(LearnerState::new(lc, &labels, &values, horizon)?)),
        });
    }

    let seed = trial_seed(config.seed, trial);
    let mut value_rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream(seed, i as u64)).collect();
    let mut learn_rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream(seed, (n + i) as u64)).collect();
    let mut mech_rng = stream(seed, (2 * n) as u64);
    let snapshot_every = horizon.div_ceil(1000).max(1);

    let mut trace = SimulationTrace {
        n,
        horizon,
        trial,
        support: values.clone(),
        labels: labels.clone(),
        mechanism: mech.name().to_string(),
        normalization: norm,
        feedback: (0..n).map(|i| config.learner(i).feedback).collect(),
        value_idx: Vec::with_capacity(horizon * n),
        arms: Vec::with_capacity(horizon * n),
        winners: Vec::with_capacity(horizon),
        payments: Vec::with_capacity(horizon * n),
        expected_alloc: Vec::with_capacity(horizon * n),
        expected_reward: Vec::with_capacity(horizon * n),
        gaps: Vec::with_capacity(horizon * n),
        final_h: Vec::new(),
        fixed_bid_totals: Vec::new(),
        snapshots: Vec::new(),
    };

    let mut h = vec![vec![vec![0.0; k]; m]; n];
    let mut fixed = vec![vec![vec![0.0; k]; m]; n];
    let mut ctx = vec![0usize; n];
    let mut arms = vec![0usize; n];
    let mut others = Vec::with_capacity(n);
    let mut interim: Vec<Interim> = Vec::with_capacity(k);
    let mut rewards = vec![vec![0.0; k]; m];
    let mut normalized = vec![vec![0.0; k]; m];

    for t in 0..horizon {
        if config.record_sigma && t % snapshot_every == 0 {
            trace.snapshots.push((t, h.clone()));
        }
        for i in 0..n {
            ctx[i] = draw_value(&config.dist, &mut value_rngs[i]);
        }
        for i in 0..n {
            let c = ctx[i];
            let (arm, gap) = match &mut policies[i] {
                Policy::Learn(l) => {
                    let a = l.select_arm(c, &mut learn_rngs[i]);
                    (a, l.gap(c, a))
                }
                other => {
                    let a = match other {
                        Policy::Intended => {
                            let f = fse.expect("validated: intended buyers run under fse");
                            f.intended_arm(c, f.phase(t))
                        }
                        Policy::Fixed(table) => table[c],
                        _ => (0..k).fold(0, |best, a| if h[i][c][a] < h[i][c][best] { a } else { best }),
                    };
                    (a, (argmax(&h[i][c]) - h[i][c][a]) / norm)
                }
            };
            arms[i] = arm;
            trace.gaps.push(gap);
        }
        let outcome = mech.resolve(t, &arms, &mut mech_rng);
        for i in 0..n {
            others.clear();
            others.extend((0..n).filter(|&o| o != i).map(|o| arms[o]));
            mech.interim_all(t, &others, &mut interim);
            for c in 0..m {
                for a in 0..k {
                    let r = values[c] * interim[a].alloc - interim[a].pay;
                    rewards[c][a] = r;
                    h[i][c][a] += r;
                    normalized[c][a] = r / norm;
                }
            }
            for (f, r) in fixed[i][ctx[i]].iter_mut().zip(&rewards[ctx[i]]) {
                *f += r;
            }
            trace.value_idx.push(ctx[i] as u32);
            trace.arms.push(arms[i] as u32);
            trace.payments.push(outcome.payments[i]);
            trace.expected_alloc.push(interim[arms[i]].alloc);
            trace.expected_reward.push(rewards[ctx[i]][arms[i]]);
            if let Policy::Learn(l) = &mut policies[i] {
                if trace.feedback[i] == Feedback::Bandit {
                    let realized = values[ctx[i]] * outcome.allocation[i] - outcome.payments[i];
                    l.observe_bandit(realized / norm)?;
                } else {
                    l.observe(&normalized)?;
                }
            }
        }
        trace.winners.push(outcome.winner.map(|w| w as u32));
    }
    trace.final_h = h;
    trace.fixed_bid_totals = fixed;
    Ok(trace)
}

/// Headline numbers of one trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceSummary {
    pub trial: usize,
    pub rounds: usize,
    pub revenue: f64,
    pub welfare: f64,
    pub utilities: Vec<f64>,
    pub regret: Vec<f64>,
    /// `T · Val_n`: the expected welfare of always serving the highest value.
    pub welfare_benchmark: f64,
    pub revenue_ratio: f64,
    pub accounting_residual: f64,
}

pub fn summarize(trace: &SimulationTrace, dist: &ValueDistribution<f64>) -> Result<TraceSummary> {
    let benchmark = trace.rounds() as f64 * crate::benchmarks::expected_max(dist, trace.n)?;
    let revenue = trace.total_revenue();
    Ok(TraceSummary {
        trial: trace.trial,
        rounds: trace.rounds(),
        revenue,
        welfare: trace.total_welfare(),
        utilities: (0..trace.n).map(|i| trace.total_utility(i)).collect(),
        regret: (0..trace.n).map(|i| crate::learners::regret(trace, i)).collect(),
        welfare_benchmark: benchmark,
        revenue_ratio: if benchmark > 0.0 { revenue / benchmark } else { 0.0 },
        accounting_residual: accounting_residual(trace),
    })
}
