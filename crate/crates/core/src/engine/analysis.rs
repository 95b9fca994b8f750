use serde::Serialize;

use super::SimulationTrace;
use crate::auctions::{Fse, Interim, Mechanism};
use crate::error::{Error, Result};
use crate::learners::Feedback;

/// Largest `|revenue + Σ utilities − welfare|` over all prefixes of the trace.
pub fn accounting_residual(trace: &SimulationTrace) -> f64 {
    let (mut rev, mut util, mut welfare) = (0.0, 0.0, 0.0);
    let mut worst: f64 = 0.0;
    for t in 0..trace.rounds() {
        rev += trace.revenue(t);
        welfare += trace.welfare(t);
        util += (0..trace.n).map(|i| trace.utility(t, i)).sum::<f64>();
        worst = worst.max((rev + util - welfare).abs());
    }
    worst
}

/// `H_s(v, b)` for buyer `buyer` at each requested round `s` (ascending, at most `T`):
/// cumulative interim payoff of arm `b` under value `v` over rounds `0..s`, replayed against
/// the other buyers' recorded arms.
pub fn counterfactual_table(
    trace: &SimulationTrace,
    mech: &dyn Mechanism,
    buyer: usize,
    rounds: &[usize],
) -> Result<Vec<Vec<Vec<f64>>>> {
    if trace.feedback.get(buyer) == Some(&Feedback::Bandit) {
        return Err(Error::Unsupported("counterfactual tables need experts feedback".into()));
    }
    if buyer >= trace.n {
        return Err(Error::OutOfRange { index: buyer, len: trace.n });
    }
    if rounds.windows(2).any(|w| w[0] > w[1]) || rounds.last().is_some_and(|&s| s > trace.rounds()) {
        return Err(Error::Precondition("rounds must be ascending and within the trace".into()));
    }
    let (m, k) = (trace.support.len(), trace.labels.len());
    let mut h = vec![vec![0.0; k]; m];
    let mut out = Vec::with_capacity(rounds.len());
    let mut others = Vec::with_capacity(trace.n);
    let mut interim: Vec<Interim> = Vec::with_capacity(k);
    let mut next = rounds.iter().peekable();
    for t in 0..=trace.rounds() {
        while next.peek() == Some(&&t) {
            out.push(h.clone());
            next.next();
        }
        if t == trace.rounds() {
            break;
        }
        others.clear();
        others.extend((0..trace.n).filter(|&o| o != buyer).map(|o| trace.arm(t, o)));
        mech.interim_all(t, &others, &mut interim);
        for (c, row) in h.iter_mut().enumerate() {
            for (a, cell) in row.iter_mut().enumerate() {
                *cell += trace.support[c] * interim[a].alloc - interim[a].pay;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseMetrics {
    pub phase: usize,
    pub setup: bool,
    pub revenue: f64,
    pub welfare: f64,
    /// Realized utility per buyer over the phase.
    pub utility: Vec<f64>,
    /// Realized utility summed over buyers, split by value.
    pub value_utility: Vec<f64>,
    /// Fraction of pulls equal to the intended arm of the buyer's value.
    pub intended_rate: f64,
    /// Among rounds with a unique highest value, the fraction won by that buyer.
    pub highest_value_wins: Option<f64>,
}

pub fn phase_report(trace: &SimulationTrace, fse: &Fse<f64>) -> Result<Vec<PhaseMetrics>> {
    if trace.rounds() != fse.horizon() || trace.n != fse.n() || trace.labels.len() != fse.phases() + 1 {
        return Err(Error::Precondition("trace does not come from this fse configuration".into()));
    }
    let len = 2 * fse.half_length();
    let m = trace.support.len();
    Ok((1..=fse.phases())
        .map(|tau| {
            let rounds = (tau - 1) * len..tau * len;
            let mut utility = vec![0.0; trace.n];
            let mut value_utility = vec![0.0; m];
            let (mut revenue, mut welfare, mut intended) = (0.0, 0.0, 0usize);
            let (mut unique, mut top_wins) = (0usize, 0usize);
            for t in rounds.clone() {
                revenue += trace.revenue(t);
                welfare += trace.welfare(t);
                let mut best = (0usize, 0usize);
                for i in 0..trace.n {
                    let u = trace.utility(t, i);
                    let j = trace.value_index(t, i);
                    utility[i] += u;
                    value_utility[j] += u;
                    intended += (trace.arm(t, i) == fse.intended_arm(j, tau)) as usize;
                    if i == 0 || j > trace.value_index(t, best.0) {
                        best = (i, 1);
                    } else if j == trace.value_index(t, best.0) {
                        best.1 += 1;
                    }
                }
                if best.1 == 1 && trace.n > 1 {
                    unique += 1;
                    top_wins += (trace.winners[t] == Some(best.0 as u32)) as usize;
                }
            }
            PhaseMetrics {
                phase: tau,
                setup: fse.is_setup(tau),
                revenue,
                welfare,
                utility,
                value_utility,
                intended_rate: intended as f64 / (len * trace.n) as f64,
                highest_value_wins: (unique > 0).then(|| top_wins as f64 / unique as f64),
            }
        })
        .collect())
}

/// Per-value estimates of the interim allocation `X`, the allocation `Y` of bidding the value
/// itself, and utility `U`, pooled over buyers and averaged over rounds.
#[derive(Clone, Debug, Serialize)]
pub struct XyuEstimate {
    pub x: Vec<f64>,
    /// Standard error of each `x` entry.
    pub x_se: Vec<f64>,
    /// `None` when no arm is labeled with the value.
    pub y: Vec<Option<f64>>,
    pub u: Vec<f64>,
    pub counts: Vec<usize>,
}

/// `X` and `U` average the interim allocation and payoff of pulled arms over the rounds with
/// value `w_j`; `Y` averages the interim allocation of the arm labeled `w_j` over all rounds.
pub fn empirical_xyu(trace: &SimulationTrace, mech: &dyn Mechanism) -> XyuEstimate {
    let m = trace.support.len();
    let (mut sx, mut sxx, mut su) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut counts = vec![0usize; m];
    for t in 0..trace.rounds() {
        for i in 0..trace.n {
            let j = trace.value_index(t, i);
            let a = trace.expected_alloc[t * trace.n + i];
            counts[j] += 1;
            sx[j] += a;
            sxx[j] += a * a;
            su[j] += trace.expected_reward[t * trace.n + i];
        }
    }
    let bid_arm: Vec<Option<usize>> =
        trace.support.iter().map(|w| trace.labels.iter().position(|l| l == w).filter(|&a| a > 0)).collect();
    let mut sy = vec![0.0; m];
    let mut interim: Vec<Interim> = Vec::new();
    let mut others = Vec::with_capacity(trace.n);
    for t in 0..trace.rounds() {
        for i in 0..trace.n {
            others.clear();
            others.extend((0..trace.n).filter(|&o| o != i).map(|o| trace.arm(t, o)));
            mech.interim_all(t, &others, &mut interim);
            for (j, arm) in bid_arm.iter().enumerate() {
                if let Some(a) = arm {
                    sy[j] += interim[*a].alloc;
                }
            }
        }
    }
    let pulls = (trace.rounds() * trace.n).max(1) as f64;
    let mean = |s: f64, c: usize| if c == 0 { 0.0 } else { s / c as f64 };
    XyuEstimate {
        x: (0..m).map(|j| mean(sx[j], counts[j])).collect(),
        x_se: (0..m)
            .map(|j| {
                let c = counts[j];
                if c < 2 {
                    return 0.0;
                }
                let mu = sx[j] / c as f64;
                ((sxx[j] / c as f64 - mu * mu).max(0.0) / c as f64).sqrt()
            })
            .collect(),
        y: bid_arm.iter().enumerate().map(|(j, a)| a.map(|_| sy[j] / pulls)).collect(),
        u: (0..m).map(|j| mean(su[j], counts[j])).collect(),
        counts,
    }
}
