use num_traits::Zero;

use super::{Cmp, VerificationReport};
use crate::auctions::Mechanism;
use crate::engine::{empirical_xyu, SimulationTrace};
use crate::scalar::{format_rational, rational_from_f64, Rational};

/// Standard errors are scaled by this many before entering a slack.
const SE_MULTIPLIER: f64 = 3.0;

fn exact(v: f64) -> Rational {
    rational_from_f64(v)
}

/// Checks that the pooled empirical allocation `x` and utility `u` of a trace satisfy the
/// reduced multi-buyer BMSW constraints, up to an explicit slack.
///
/// Utility constraints `u_i ≥ (w_i − w_j) x_j` are relaxed by the buyers' regret on value `w_i`
/// per round with that value, plus three standard errors of `u_i` and of `(w_i − w_j) x_j`.
/// Monotonicity is relaxed by three standard errors of each side. Border is checked against the
/// empirical value frequencies, relaxed by three standard errors of the frequency with which
/// some buyer holds a value in the set. Values that never occur are skipped.
pub fn verify_bmsw_necessity(trace: &SimulationTrace, mech: &dyn Mechanism) -> VerificationReport {
    let m = trace.support.len();
    let n = trace.n;
    let rounds = trace.rounds();
    let est = empirical_xyu(trace, mech);
    let mut r = VerificationReport::new("bmsw_necessity");

    let mut regret = vec![0.0; m];
    let mut su = vec![0.0; m];
    let mut suu = vec![0.0; m];
    for t in 0..rounds {
        for i in 0..n {
            let c = trace.value_index(t, i);
            let v = trace.expected_reward[t * n + i];
            su[c] += v;
            suu[c] += v * v;
        }
    }
    for b in 0..n {
        let mut got = vec![0.0; m];
        for t in 0..rounds {
            got[trace.value_index(t, b)] += trace.expected_reward[t * n + b];
        }
        for c in 0..m {
            let best = trace.fixed_bid_totals[b][c].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            regret[c] += (best - got[c]).max(0.0);
        }
    }
    let u_se: Vec<f64> = (0..m)
        .map(|c| {
            let k = est.counts[c];
            if k < 2 {
                return 0.0;
            }
            let mu = su[c] / k as f64;
            ((suu[c] / k as f64 - mu * mu).max(0.0) / k as f64).sqrt()
        })
        .collect();
    let seen: Vec<usize> = (0..m).filter(|&c| est.counts[c] > 0).collect();
    if seen.len() < m {
        r.note(format!("{} support values never drawn; their constraints are skipped", m - seen.len()));
    }

    for &i in &seen {
        let per_round = regret[i] / est.counts[i] as f64;
        let w_i = trace.support[i];
        r.check(
            format!("u_{} >= 0 - slack", i + 1),
            exact(est.u[i]),
            Cmp::Ge,
            exact(-(per_round + SE_MULTIPLIER * u_se[i])),
        );
        for &j in seen.iter().filter(|&&j| j < i) {
            let d = w_i - trace.support[j];
            let sampling = SE_MULTIPLIER * (u_se[i] + d * est.x_se[j]);
            r.check(
                format!("u_{} >= (w_{} - w_{}) x_{} - slack", i + 1, i + 1, j + 1, j + 1),
                exact(est.u[i]),
                Cmp::Ge,
                exact(d * est.x[j] - per_round - sampling),
            );
        }
        r.note(format!(
            "slack for w_{}: regret per round {} + sampling {} x (se_u {} + gap x se_x)",
            i + 1,
            format_rational(&exact(per_round)),
            SE_MULTIPLIER,
            format_rational(&exact(u_se[i]))
        ));
    }
    for p in seen.windows(2) {
        let (lo, hi) = (p[0], p[1]);
        r.check(
            format!("x_{} >= x_{} - slack", hi + 1, lo + 1),
            exact(est.x[hi]),
            Cmp::Ge,
            exact(est.x[lo] - SE_MULTIPLIER * (est.x_se[lo] + est.x_se[hi])),
        );
    }

    let draws = (rounds * n).max(1) as f64;
    let freq: Vec<f64> = est.counts.iter().map(|&k| k as f64 / draws).collect();
    let mut order = seen.clone();
    order.sort_by(|&a, &b| est.x[b].total_cmp(&est.x[a]));
    let (mut mass, mut lhs) = (0.0, 0.0);
    let mut names = Vec::new();
    for &j in &order {
        mass += freq[j];
        lhs += freq[j] * est.x[j];
        names.push(format!("{}", j + 1));
        let some = 1.0 - (1.0 - mass).powi(n as i32);
        let slack = SE_MULTIPLIER * (some * (1.0 - some) / rounds.max(1) as f64).sqrt();
        r.check(
            format!("Border on values {{{}}}", names.join(", ")),
            exact(n as f64 * lhs),
            Cmp::Le,
            exact(some + slack),
        );
    }
    if r.checks.is_empty() {
        r.check("trace has rounds", Rational::zero(), Cmp::Lt, Rational::zero());
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auctions::reserve_schedule_from_lp;
    use crate::dist::ValueDistribution;
    use crate::engine::{run_trial, AuctionConfig, SimulationConfig};
    use crate::learners::{LearnerConfig, LearnerKind};

    fn quarters() -> ValueDistribution<f64> {
        ValueDistribution::uniform(vec![0.25, 0.5, 0.75, 1.0]).unwrap()
    }

    fn report(cfg: &SimulationConfig) -> VerificationReport {
        let t = run_trial(cfg, 0).unwrap();
        verify_bmsw_necessity(&t, cfg.build_mechanism().unwrap().as_ref())
    }

    #[test]
    fn truthful_second_price() {
        let cfg = SimulationConfig::new(
            quarters(),
            2,
            5_000,
            AuctionConfig::SpaReserve { reserve: 0.0, epsilon: Some(0.0) },
            LearnerConfig::new(LearnerKind::Truthful),
        );
        let r = report(&cfg);
        assert!(r.pass, "{r}");
    }

    #[test]
    fn null_auction_holds_at_zero() {
        let cfg = SimulationConfig::new(quarters(), 2, 300, AuctionConfig::Null, LearnerConfig::new(LearnerKind::Ftl));
        let r = report(&cfg);
        assert!(r.pass, "{r}");
        assert!(r.checks.iter().filter(|c| c.description.starts_with("u_")).all(|c| c.left.is_zero()));
    }

    #[test]
    fn uniform_schedule_with_leaders() {
        let d = quarters();
        let horizon = 4_000;
        let schedule = reserve_schedule_from_lp(&[0.0, 0.0, 0.75, 0.75], &d, 2, horizon).unwrap();
        let cfg = SimulationConfig::new(
            d,
            2,
            horizon,
            AuctionConfig::UniformDeclining { reserve: None, allocation: None, schedule: Some(schedule), epsilon: Some(0.0) },
            LearnerConfig::new(LearnerKind::Ftl),
        );
        let t = run_trial(&cfg, 0).unwrap();
        let mech = cfg.build_mechanism().unwrap();
        let r = verify_bmsw_necessity(&t, mech.as_ref());
        assert!(r.pass, "{r}");
        // The top value is indifferent between its own arm and the third: u_4 = (w_4 − w_3) x_3.
        let est = empirical_xyu(&t, mech.as_ref());
        assert!((est.u[3] - 0.25 * est.x[2]).abs() < 0.02, "{} vs {}", est.u[3], 0.25 * est.x[2]);
    }
}
