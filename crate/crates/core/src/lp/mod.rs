//! The clever-buyer LP hierarchy: single-buyer, Border and uniform-schedule programs.
//!
//! Variables are the interim allocation `x` and interim utility `u` per support value;
//! every program maximizes the per-buyer revenue `Σ q_i (w_i x_i − u_i)`.

mod equal_revenue;
mod lagrangian;
mod large;

pub use equal_revenue::{
    continuous_boundary, equal_revenue_distribution, positive_phi_boundary, slprev_equal_revenue, Grid, MAX_GRID_POINTS,
};
pub use lagrangian::{
    check_lambda_properties, fill_low_to_high, lagrangian_value, phi, phi_all, regularity_check, LagrangianMultipliers,
    LambdaReport,
};
pub use large::solve_single_lp_large;

use crate::benchmarks::e_harmonic;
use crate::border::add_border_tail_rows;
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex::{LinearProgram, LpStatus, Relation};

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub u: Vec<T>,
    /// Per-buyer revenue.
    pub objective: T,
    pub status: LpStatus,
}

impl<T: Scalar> LpSolution<T> {
    pub fn total_revenue(&self, n: usize) -> T {
        self.objective.clone() * T::from_usize(n)
    }

    /// Smallest utilities compatible with `x`: `max(0, max_{j<i} (w_i − w_j) x_j)`.
    pub fn tight_utilities(dist: &ValueDistribution<T>, x: &[T]) -> Vec<T> {
        (0..dist.m())
            .map(|i| {
                (0..i).fold(T::zero(), |best, j| {
                    T::max_of(best, (dist.value(i).clone() - dist.value(j).clone()) * x[j].clone())
                })
            })
            .collect()
    }
}

/// Per-buyer revenue `Σ q_i (w_i x_i − u_i)` of a candidate solution.
pub fn revenue_of<T: Scalar>(dist: &ValueDistribution<T>, x: &[T], u: &[T]) -> T {
    (0..dist.m()).fold(T::zero(), |acc, i| {
        acc + dist.prob(i).clone() * (dist.value(i).clone() * x[i].clone() - u[i].clone())
    })
}

/// Feasible-region choice for [`solve_bmsw`].
enum Domain {
    Box,
    Border(usize),
    Uniform(usize),
}

fn solve_bmsw<T: Scalar>(dist: &ValueDistribution<T>, domain: Domain) -> Result<LpSolution<T>> {
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
        for j in 0..i {
            let gap = dist.value(i).clone() - dist.value(j).clone();
            lp.add_constraint(&[(uc + i, T::one()), (xc + j, -gap)], Relation::Ge, T::zero());
        }
        if i > 0 {
            lp.add_constraint(&[(xc + i, T::one()), (xc + i - 1, -T::one())], Relation::Ge, T::zero());
        }
    }
    match domain {
        Domain::Box => lp.add_constraint(&[(xc + m - 1, T::one())], Relation::Le, T::one()),
        Domain::Border(n) => add_border_tail_rows(&mut lp, dist.probs(), xc, n),
        Domain::Uniform(n) => {
            let inv: Vec<T> = (0..m)
                .map(|j| e_harmonic(dist, n, j).map(|e| T::one() / e))
                .collect::<Result<_>>()?;
            let terms: Vec<(usize, T)> = (0..m)
                .map(|j| {
                    let next = if j + 1 < m { inv[j + 1].clone() } else { T::zero() };
                    (xc + j, inv[j].clone() - next)
                })
                .collect();
            lp.add_constraint(&terms, Relation::Le, T::one());
        }
    }
    let out = lp.solve();
    if out.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("{:?}", out.status).to_lowercase()));
    }
    let (x, u) = out.values.split_at(m);
    Ok(LpSolution { x: x.to_vec(), u: u.to_vec(), objective: out.objective, status: out.status })
}

/// Single-buyer program: BMSW utility constraints, monotone `x ∈ [0, 1]`.
pub fn solve_single_lp<T: Scalar>(dist: &ValueDistribution<T>) -> Result<LpSolution<T>> {
    solve_bmsw(dist, Domain::Box)
}

/// Reduced `n`-buyer program: the unit box is replaced by Border's constraints. Per-buyer objective.
pub fn solve_border_lp<T: Scalar>(dist: &ValueDistribution<T>, n: usize) -> Result<LpSolution<T>> {
    if n == 0 {
        return Err(Error::Precondition("buyer count must be at least 1".into()));
    }
    solve_bmsw(dist, Domain::Border(n))
}

/// Pay-your-bid uniform auctions with a declining reserve: `Σ_j x_j (1/E_j − 1/E_{j+1}) ≤ 1`.
pub fn solve_reduced_uniform_lp<T: Scalar>(dist: &ValueDistribution<T>, n: usize) -> Result<LpSolution<T>> {
    if n == 0 {
        return Err(Error::Precondition("buyer count must be at least 1".into()));
    }
    solve_bmsw(dist, Domain::Uniform(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::x_vcg;
    use crate::scalar::{ratio, Rational};

    fn quarters() -> ValueDistribution<Rational> {
        ValueDistribution::uniform(vec![ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(1, 1)]).unwrap()
    }

    #[test]
    fn point_mass_sells_at_value() {
        let d = ValueDistribution::point_mass(ratio(3, 5)).unwrap();
        let s = solve_single_lp(&d).unwrap();
        assert_eq!(s.objective, ratio(3, 5));
        assert_eq!(s.x, vec![ratio(1, 1)]);
        assert_eq!(s.u, vec![ratio(0, 1)]);
    }

    #[test]
    fn single_lp_against_candidate_enumeration() {
        let d = quarters();
        let s = solve_single_lp(&d).unwrap();
        // Primal lower bound: every monotone x on a grid of eighths with tight utilities.
        let levels: Vec<Rational> = (0..=8).map(|k| ratio(k, 8)).collect();
        let mut best = ratio(0, 1);
        for a in 0..9 {
            for b in a..9 {
                for c in b..9 {
                    for e in c..9 {
                        let x = vec![levels[a].clone(), levels[b].clone(), levels[c].clone(), levels[e].clone()];
                        let u = LpSolution::tight_utilities(&d, &x);
                        best = std::cmp::max(best, revenue_of(&d, &x, &u));
                    }
                }
            }
        }
        assert!(s.objective >= best);
        // Dual upper bound: the Lagrangian at the filled multipliers.
        let lambda = fill_low_to_high(&d);
        assert_eq!(s.objective, lagrangian_value(&d, &lambda));
    }

    #[test]
    fn border_with_one_buyer_is_single() {
        let d = ValueDistribution::new(
            vec![ratio(1, 1), ratio(2, 1), ratio(5, 1)],
            vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)],
        )
        .unwrap();
        assert_eq!(solve_border_lp(&d, 1).unwrap().objective, solve_single_lp(&d).unwrap().objective);
    }

    #[test]
    fn uniform_lp_appendix_example() {
        let d = quarters();
        let s = solve_reduced_uniform_lp(&d, 2).unwrap();
        assert_eq!(s.x, vec![ratio(0, 1), ratio(0, 1), ratio(3, 4), ratio(3, 4)]);
        assert_eq!(s.objective, ratio(9, 32));
        assert_eq!(s.total_revenue(2), ratio(9, 16));
        let b = solve_border_lp(&d, 2).unwrap();
        assert!(b.objective >= s.objective);
    }

    #[test]
    fn uniform_lp_single_value() {
        let d = ValueDistribution::point_mass(ratio(2, 1)).unwrap();
        let s = solve_reduced_uniform_lp(&d, 2).unwrap();
        assert_eq!(s.x, vec![ratio(1, 2)]);
        assert_eq!(s.objective, ratio(1, 1));
    }

    #[test]
    fn border_lp_is_feasible_and_tight() {
        let d = quarters();
        for n in 1..=3 {
            let s = solve_border_lp(&d, n).unwrap();
            assert!(crate::border::border_satisfied(d.probs(), &s.x, n).unwrap());
            assert_eq!(s.u, LpSolution::tight_utilities(&d, &s.x));
            assert!(s.x.windows(2).all(|w| w[0] <= w[1]));
            for j in 0..4 {
                assert!(s.x[j] <= Rational::from_ratio(1, 1));
            }
        }
        // Second-price allocation is feasible, so the LP is at least its revenue.
        let xv: Vec<_> = (0..4).map(|j| x_vcg(&d, 2, j).unwrap()).collect();
        let uv = LpSolution::tight_utilities(&d, &xv);
        assert!(solve_border_lp(&d, 2).unwrap().objective >= revenue_of(&d, &xv, &uv));
    }
}
