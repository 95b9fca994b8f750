//! Declining reserve schedules that implement a target interim allocation.

use crate::benchmarks::e_harmonic;
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};

/// Turns an interim allocation into a per-round reserve list for the pay-your-bid uniform
/// auction. Value `w_j` gets a block of `λ_j T` rounds at reserve `w_j`, with
/// `λ_j = (x_j − x_{j−1}) / E_j`; the unused fraction is a leading no-sale block (`None`).
/// Blocks run from the highest reserve to the lowest, and boundaries are rounded on the
/// cumulative sums so the blocks always add up to `horizon`.
pub fn reserve_schedule_from_lp(
    x: &[f64],
    dist: &ValueDistribution<f64>,
    n: usize,
    horizon: usize,
) -> Result<Vec<Option<f64>>> {
    let m = dist.m();
    if x.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: x.len() });
    }
    const TOL: f64 = 1e-9;
    let mut lambda = Vec::with_capacity(m);
    for j in 0..m {
        let prev = if j == 0 { 0.0 } else { x[j - 1] };
        let step = x[j] - prev;
        if step < -TOL {
            return Err(Error::Precondition(format!("allocation decreases at index {j}")));
        }
        lambda.push(step.max(0.0) / e_harmonic(dist, n, j)?);
    }
    let total: f64 = lambda.iter().sum();
    if total > 1.0 + TOL {
        return Err(Error::Precondition(format!("schedule needs {total} > 1 of the horizon")));
    }
    let mut schedule = Vec::with_capacity(horizon);
    let mut cumulative = (1.0 - total).max(0.0);
    let mut boundary = (cumulative * horizon as f64).round() as usize;
    schedule.resize(boundary, None);
    for j in (0..m).rev() {
        cumulative += lambda[j];
        let next = if j == 0 { horizon } else { ((cumulative * horizon as f64).round() as usize).min(horizon) };
        schedule.resize(next.max(boundary), Some(*dist.value(j)));
        boundary = next.max(boundary);
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarters() -> ValueDistribution<f64> {
        ValueDistribution::uniform(vec![0.25, 0.5, 0.75, 1.0]).unwrap()
    }

    #[test]
    fn appendix_allocation_is_a_constant_reserve() {
        let s = reserve_schedule_from_lp(&[0.0, 0.0, 0.75, 0.75], &quarters(), 2, 1000).unwrap();
        assert_eq!(s.len(), 1000);
        assert!(s.iter().all(|r| *r == Some(0.75)));
    }

    #[test]
    fn zero_allocation_never_sells() {
        let s = reserve_schedule_from_lp(&[0.0; 4], &quarters(), 2, 50).unwrap();
        assert_eq!(s, vec![None; 50]);
    }

    #[test]
    fn single_value_sells_every_round() {
        let d = ValueDistribution::point_mass(2.0).unwrap();
        let e = e_harmonic(&d, 3, 0).unwrap();
        let s = reserve_schedule_from_lp(&[e], &d, 3, 30).unwrap();
        assert_eq!(s, vec![Some(2.0); 30]);
    }

    #[test]
    fn blocks_decline_and_conserve_rounds() {
        let d = quarters();
        // λ = (x_j − x_{j−1}) / E_j with E = [1/2, 7/12 ...]; pick small steps.
        let x = [0.1, 0.2, 0.3, 0.35];
        let s = reserve_schedule_from_lp(&x, &d, 2, 997).unwrap();
        assert_eq!(s.len(), 997);
        let key = |r: &Option<f64>| r.unwrap_or(f64::INFINITY);
        assert!(s.windows(2).all(|w| key(&w[1]) <= key(&w[0])));
        let count = |v: f64| s.iter().filter(|r| **r == Some(v)).count() as f64;
        for (j, lam) in [(0, 0.1 / e_harmonic(&d, 2, 0).unwrap()), (3, 0.05 / e_harmonic(&d, 2, 3).unwrap())] {
            assert!((count(*d.value(j)) - lam * 997.0).abs() <= 1.0);
        }
    }

    #[test]
    fn rejects_infeasible_allocations() {
        assert!(reserve_schedule_from_lp(&[0.0, 0.0, 0.9, 0.9], &quarters(), 2, 10).is_err());
        assert!(reserve_schedule_from_lp(&[0.5, 0.2, 0.3, 0.3], &quarters(), 2, 10).is_err());
        assert!(reserve_schedule_from_lp(&[0.1, 0.2], &quarters(), 2, 10).is_err());
    }
}
