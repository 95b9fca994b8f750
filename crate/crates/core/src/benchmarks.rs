//! Closed-form single-item benchmarks for `n` i.i.d. buyers.
//!
//! Support indices are 0-based throughout.

use crate::border::add_border_tail_rows;
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex::{LinearProgram, LpStatus, Relation};

fn check_index<T: Scalar>(dist: &ValueDistribution<T>, j: usize) -> Result<()> {
    if j >= dist.m() {
        return Err(Error::OutOfRange { index: j, len: dist.m() });
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("buyer count must be at least 1".into()));
    }
    Ok(())
}

/// `Val_n`: expected maximum of `n` draws.
pub fn expected_max<T: Scalar>(dist: &ValueDistribution<T>, n: usize) -> Result<T> {
    check_n(n)?;
    Ok((0..dist.m()).fold(T::zero(), |acc, j| {
        let mass = dist.cdf(j).powu(n) - dist.cdf_below(j).powu(n);
        acc + dist.value(j).clone() * mass
    }))
}

/// Probability that `n - 1` i.i.d. draws have maximum exactly `w_j`.
fn max_of_others_at<T: Scalar>(dist: &ValueDistribution<T>, n: usize, j: usize) -> T {
    dist.cdf(j).powu(n - 1) - dist.cdf_below(j).powu(n - 1)
}

/// Win probability of a truthful bid `w_j` in a second-price auction with uniform tie-breaking.
pub fn x_vcg<T: Scalar>(dist: &ValueDistribution<T>, n: usize, j: usize) -> Result<T> {
    check_n(n)?;
    check_index(dist, j)?;
    let num = dist.cdf(j).powu(n) - dist.cdf_below(j).powu(n);
    Ok(num / (T::from_usize(n) * dist.prob(j).clone()))
}

/// Expected second-price payment of a truthful bid `w_j`.
pub fn p_vcg<T: Scalar>(dist: &ValueDistribution<T>, n: usize, j: usize) -> Result<T> {
    let x = x_vcg(dist, n, j)?;
    if n == 1 {
        return Ok(T::zero());
    }
    let below = (0..j).fold(T::zero(), |acc, l| acc + dist.value(l).clone() * max_of_others_at(dist, n, l));
    let tie_win = x - dist.cdf_below(j).powu(n - 1);
    Ok(below + dist.value(j).clone() * tie_win)
}

/// `E[1 / (1 + K)]` with `K ~ Binomial(n − 1, Q_j)` and `Q_j` the mass at or above `w_j`.
pub fn e_harmonic<T: Scalar>(dist: &ValueDistribution<T>, n: usize, j: usize) -> Result<T> {
    check_n(n)?;
    check_index(dist, j)?;
    Ok(e_harmonic_of_mass(&dist.tail(j), n))
}

pub fn e_harmonic_of_mass<T: Scalar>(q: &T, n: usize) -> T {
    let mut binom = T::one();
    let mut total = T::zero();
    for k in 0..n {
        if k > 0 {
            binom = binom * T::from_usize(n - k) / T::from_usize(k);
        }
        let term = binom.clone() * q.powu(k) * (T::one() - q.clone()).powu(n - 1 - k);
        total = total + term / T::from_usize(k + 1);
    }
    total
}

/// `Mye_n`: optimal revenue of a Bayesian incentive compatible, interim individually rational auction.
///
/// Solved as an LP in interim allocations `x` and utilities `u`: revenue is `n·Σ q_i (w_i x_i − u_i)`,
/// incentive constraints in both directions, monotone `x`, and Border's tail constraints.
pub fn myerson_revenue<T: Scalar>(dist: &ValueDistribution<T>, n: usize) -> Result<T> {
    check_n(n)?;
    let m = dist.m();
    let (xc, uc) = (0, m);
    let mut lp = LinearProgram::<T>::new(2 * m);
    let mut objective = Vec::with_capacity(2 * m);
    for i in 0..m {
        let q = dist.prob(i).clone();
        objective.push((xc + i, q.clone() * dist.value(i).clone()));
        objective.push((uc + i, -q));
    }
    lp.maximize(&objective);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let gap = dist.value(i).clone() - dist.value(j).clone();
                lp.add_constraint(&[(uc + i, T::one()), (uc + j, -T::one()), (xc + j, -gap)], Relation::Ge, T::zero());
            }
        }
        lp.add_constraint(&[(xc + i, T::one())], Relation::Le, T::one());
        if i > 0 {
            lp.add_constraint(&[(xc + i, T::one()), (xc + i - 1, -T::one())], Relation::Ge, T::zero());
        }
    }
    add_border_tail_rows(&mut lp, dist.probs(), xc, n);
    let out = lp.solve();
    if out.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("{:?} in the optimal-auction program", out.status)));
    }
    Ok(out.objective * T::from_usize(n))
}
