//! Exact expected payoffs in the FSE auction when every opponent pulls its intended arm.
//!
//! Values are i.i.d., so the expectation enumerates the opponents' value tuples. Payoffs are
//! constant within a half-phase, which makes whole-phase and whole-horizon sums cheap.

use serde::Serialize;

use crate::auctions::Fse;
use crate::benchmarks::x_vcg;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_PROFILES: usize = 1_000_000;

/// Expected per-round payoff of every arm for a buyer with value `v` in the given round, against
/// `n − 1` intended-arm opponents.
fn round_payoffs<T: Scalar>(fse: &Fse<T>, round: usize, v: &T) -> Result<Vec<T>> {
    let dist = fse.dist();
    let (m, opp) = (dist.m(), fse.n() - 1);
    let profiles = m.checked_pow(opp as u32).filter(|&p| p <= MAX_PROFILES);
    let Some(profiles) = profiles else {
        return Err(Error::TooLarge(format!("{m}^{opp} opponent value profiles")));
    };
    let tau = fse.phase(round);
    let mut out = vec![T::zero(); fse.phases() + 1];
    let mut idx = vec![0usize; opp];
    for _ in 0..profiles {
        let prob = idx.iter().fold(T::one(), |acc, &j| acc * dist.prob(j).clone());
        let arms: Vec<usize> = idx.iter().map(|&j| fse.intended_arm(j, tau)).collect();
        for (slot, (a, p)) in out.iter_mut().zip(fse.interim_table(round, &arms)) {
            *slot = slot.clone() + prob.clone() * (v.clone() * a - p);
        }
        for d in idx.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// Per-round payoffs of every arm in each half of phase `τ`.
fn half_payoffs<T: Scalar>(fse: &Fse<T>, tau: usize, v: &T) -> Result<[Vec<T>; 2]> {
    let start = (tau - 1) * 2 * fse.half_length();
    Ok([round_payoffs(fse, start, v)?, round_payoffs(fse, start + fse.half_length(), v)?])
}

/// Expected change of `H(v, arm)` over phase `τ` against intended-arm opponents.
pub fn scripted_phase_payoff<T: Scalar>(fse: &Fse<T>, tau: usize, v: &T, arm: usize) -> Result<T> {
    if tau == 0 || tau > fse.phases() || arm > fse.phases() {
        return Err(Error::OutOfRange { index: tau.max(arm), len: fse.phases() });
    }
    let [first, second] = half_payoffs(fse, tau, v)?;
    Ok(T::from_usize(fse.half_length()) * (first[arm].clone() + second[arm].clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FavouriteMargin<T> {
    pub value: usize,
    pub intended: usize,
    /// Best arm outside the intended arms of phases `τ` and `τ − 1`.
    pub runner_up: usize,
    /// `H(w_j, intended) − H(w_j, runner_up)` at the start of the phase.
    pub margin: T,
    /// `Δ(D) · x_vcg(w_1) · R`, the margin the analysis asks for.
    pub required: T,
}

/// Cumulative-payoff lead of each value's intended arm at the start of main phase `τ`.
pub fn favourite_arm_margins<T: Scalar>(fse: &Fse<T>, tau: usize) -> Result<Vec<FavouriteMargin<T>>> {
    let dist = fse.dist();
    let m = dist.m();
    if tau < m || tau > fse.phases() {
        return Err(Error::Precondition(format!("phase {tau} is not a main phase")));
    }
    let required = dist.min_gap() * x_vcg(dist, fse.n(), 0)? * T::from_usize(fse.half_length());
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let v = dist.value(j);
        let mut h = vec![T::zero(); fse.phases() + 1];
        for past in 1..tau {
            let [first, second] = half_payoffs(fse, past, v)?;
            for (a, slot) in h.iter_mut().enumerate() {
                *slot = slot.clone() + T::from_usize(fse.half_length()) * (first[a].clone() + second[a].clone());
            }
        }
        let intended = fse.intended_arm(j, tau);
        let previous = fse.intended_arm(j, tau - 1);
        let runner_up = (0..=fse.phases())
            .filter(|&a| a != intended && a != previous)
            .fold(None::<usize>, |best, a| match best {
                Some(b) if h[b] >= h[a] => Some(b),
                _ => Some(a),
            })
            .expect("at least the null arm remains");
        out.push(FavouriteMargin {
            value: j,
            intended,
            runner_up,
            margin: h[intended].clone() - h[runner_up].clone(),
            required: required.clone(),
        });
    }
    Ok(out)
}

/// The best one-switch meta-arm that starts on `stay`, against staying put.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchDemo<T> {
    pub value: usize,
    pub stay: usize,
    pub to: usize,
    /// First (0-based) round on the new arm.
    pub switch_round: usize,
    pub stay_total: T,
    pub meta_total: T,
    pub advantage: T,
}

/// Searches meta-arms `M(stay, to, t)` for a value-`w_j` buyer over the whole horizon against
/// intended-arm opponents; `to = None` searches every target arm. Switch rounds are half-phase
/// boundaries, where the best switch always lies because payoffs are constant in between.
pub fn switching_advantage<T: Scalar>(fse: &Fse<T>, j: usize, stay: usize, to: Option<usize>) -> Result<SwitchDemo<T>> {
    let k = fse.phases() + 1;
    if stay >= k || to.is_some_and(|b| b >= k) {
        return Err(Error::OutOfRange { index: stay.max(to.unwrap_or(0)), len: k });
    }
    if to == Some(stay) {
        return Err(Error::Precondition("a switch must change arms".into()));
    }
    let v = fse.dist().value(j).clone();
    let r = T::from_usize(fse.half_length());
    let mut halves = Vec::with_capacity(2 * fse.phases());
    for tau in 1..=fse.phases() {
        let [a, b] = half_payoffs(fse, tau, &v)?;
        halves.push(a);
        halves.push(b);
    }
    let stay_total = halves.iter().fold(T::zero(), |acc, h| acc + r.clone() * h[stay].clone());
    let targets: Vec<usize> = match to {
        Some(b) => vec![b],
        None => (0..k).filter(|&b| b != stay).collect(),
    };
    let mut best: Option<(T, usize, usize)> = None;
    for &b in &targets {
        // Suffix sums of the per-half difference, scanned from the end.
        let mut suffix = T::zero();
        for s in (0..halves.len()).rev() {
            suffix = suffix + r.clone() * (halves[s][b].clone() - halves[s][stay].clone());
            if best.as_ref().map_or(true, |(adv, _, _)| suffix > *adv) {
                best = Some((suffix.clone(), b, s));
            }
        }
    }
    let (advantage, to, half) = best.expect("at least one target");
    Ok(SwitchDemo {
        value: j,
        stay,
        to,
        switch_round: half * fse.half_length(),
        meta_total: stay_total.clone() + advantage.clone(),
        stay_total,
        advantage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auctions::ArmStatus;
    use crate::dist::ValueDistribution;
    use crate::scalar::{ratio, Rational};

    fn quarters() -> ValueDistribution<Rational> {
        ValueDistribution::uniform(vec![ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(1, 1)]).unwrap()
    }

    fn fse(n: usize, eps: Rational) -> Fse<Rational> {
        Fse::new(quarters(), n, 2 * 10 * 8, 8, eps).unwrap()
    }

    #[test]
    fn main_phase_utility_is_zero() {
        for n in [2, 3] {
            let f = fse(n, ratio(0, 1));
            for tau in 4..=8 {
                for j in 0..4 {
                    let u = scripted_phase_payoff(&f, tau, f.dist().value(j), f.intended_arm(j, tau)).unwrap();
                    assert_eq!(u, ratio(0, 1), "n {n} phase {tau} value {j}");
                }
            }
        }
        // A positive discount only ever helps the buyer, by at most 2Rε.
        let eps = ratio(1, 1000);
        let f = fse(2, eps.clone());
        for j in 0..4 {
            let u = scripted_phase_payoff(&f, 6, f.dist().value(j), f.intended_arm(j, 6)).unwrap();
            assert!(u >= ratio(0, 1) && u <= ratio(20, 1) * eps.clone());
        }
    }

    #[test]
    fn lifecycle_payoffs() {
        let f = fse(2, ratio(0, 1));
        let r2 = ratio(20, 1);
        for tau in 4..=8 {
            for j in 0..4 {
                let v = f.dist().value(j).clone();
                for arm in 0..=8 {
                    let d = scripted_phase_payoff(&f, tau, &v, arm).unwrap();
                    match f.arm_status(arm, tau).unwrap() {
                        ArmStatus::Dormant => assert_eq!(d, ratio(0, 1)),
                        ArmStatus::Retired => assert_eq!(d, r2.clone() * (v.clone() - ratio(2, 1))),
                        ArmStatus::Active(l) => {
                            let x = x_vcg(f.dist(), 2, l).unwrap();
                            assert_eq!(d, r2.clone() * (v.clone() - f.dist().value(l).clone()) * x);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn favourite_arm_leads_except_for_the_lowest_value() {
        let f = fse(2, ratio(0, 1));
        for tau in 5..=8 {
            for fm in favourite_arm_margins(&f, tau).unwrap() {
                if fm.value == 0 {
                    // Its intended arm was dormant until now: it ties the null arm at 0.
                    assert_eq!(fm.margin, ratio(0, 1));
                } else {
                    assert!(fm.margin >= fm.required, "phase {tau}: {fm:?}");
                }
            }
        }
        assert!(favourite_arm_margins(&f, 2).is_err());
    }

    #[test]
    fn leaving_a_retired_arm_pays() {
        let f = fse(2, ratio(0, 1));
        let demo = switching_advantage(&f, 3, 8, None).unwrap();
        assert!(demo.advantage > ratio(0, 1));
        assert_eq!(demo.meta_total, demo.stay_total.clone() + demo.advantage.clone());
        // Arm 8 retires after phase 4 = m, so the switch happens at or before that point.
        assert!(demo.switch_round <= 4 * 20);
        let fixed = switching_advantage(&f, 3, 8, Some(0)).unwrap();
        assert!(fixed.advantage <= demo.advantage);
    }
}
