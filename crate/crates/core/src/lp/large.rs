//! Single-buyer program at large support size, solved by adding violated utility rows lazily.
//!
//! The full program has `m(m−1)/2` utility rows. The relaxation starts from the adjacent rows
//! plus the rows the filled Lagrangian multipliers mark as active; each round then adds, for
//! every `i`, the most violated row `u_i ≥ (w_i − w_j) x_j` until none is violated.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{fill_low_to_high, LpSolution};
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};
use crate::simplex::LpStatus;

const CUT_TOL: f64 = 1e-10;
const MAX_ROUNDS: usize = 500;

fn lp_error(e: microlp::Error) -> Error {
    Error::Lp(e.to_string())
}

pub fn solve_single_lp_large(dist: &ValueDistribution<f64>) -> Result<LpSolution<f64>> {
    let m = dist.m();
    let w = dist.support();
    let mut rows: Vec<(usize, usize)> = (1..m).map(|i| (i, i - 1)).collect();
    rows.extend(fill_low_to_high(dist).support().filter(|(k, i, _)| i + 1 < *k).map(|(k, i, _)| (k, i)));
    let mut present: std::collections::HashSet<(usize, usize)> = rows.iter().copied().collect();
    for _ in 0..MAX_ROUNDS {
        let (xs, us) = solve_with_rows(dist, &rows)?;
        let mut added = 0;
        for i in 1..m {
            let (j, need) = (0..i)
                .map(|j| (j, (w[i] - w[j]) * xs[j]))
                .fold((0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
            if need - us[i] > CUT_TOL * (1.0 + need.abs()) && present.insert((i, j)) {
                rows.push((i, j));
                added += 1;
            }
        }
        if added == 0 {
            let us = LpSolution::tight_utilities(dist, &xs);
            let objective = super::revenue_of(dist, &xs, &us);
            return Ok(LpSolution { x: xs, u: us, objective, status: LpStatus::Optimal });
        }
    }
    Err(Error::Lp(format!("cutting planes did not converge in {MAX_ROUNDS} rounds")))
}

/// Solves the relaxation keeping only the utility rows `u_i ≥ (w_i − w_j) x_j` listed in `rows`.
fn solve_with_rows(dist: &ValueDistribution<f64>, rows: &[(usize, usize)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = dist.m();
    let w = dist.support();
    let q = dist.probs();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let x: Vec<_> = (0..m).map(|i| problem.add_var(q[i] * w[i], (0.0, 1.0))).collect();
    let u: Vec<_> = (0..m).map(|i| problem.add_var(-q[i], (0.0, f64::INFINITY))).collect();
    for i in 1..m {
        problem.add_constraint([(x[i], 1.0), (x[i - 1], -1.0)], ComparisonOp::Ge, 0.0);
    }
    for &(i, j) in rows {
        problem.add_constraint([(u[i], 1.0), (x[j], -(w[i] - w[j]))], ComparisonOp::Ge, 0.0);
    }
    let solution = problem.solve().map_err(lp_error)?;
    Ok((
        x.iter().map(|v| *solution.var_value(*v)).collect(),
        u.iter().map(|v| *solution.var_value(*v)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_single_lp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let m = rng.gen_range(1..=10);
            let mut support: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..10.0)).collect();
            support.sort_by(|a, b| a.partial_cmp(b).unwrap());
            support.dedup();
            let weights: Vec<f64> = support.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let mut probs: Vec<f64> = weights.iter().map(|p| p / total).collect();
            let rest: f64 = probs[..probs.len() - 1].iter().sum();
            *probs.last_mut().unwrap() = 1.0 - rest;
            let d = ValueDistribution::new(support, probs).unwrap();
            let dense = solve_single_lp(&d).unwrap().objective;
            let large = solve_single_lp_large(&d).unwrap().objective;
            assert!((dense - large).abs() < 1e-8, "{dense} vs {large}");
        }
    }
}
