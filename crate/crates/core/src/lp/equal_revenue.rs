//! The equal-revenue distribution truncated at `H`, discretized.

use super::{fill_low_to_high, phi_all, solve_single_lp_large};
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};

pub const MAX_GRID_POINTS: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grid {
    /// Support `{1, 1 + ε, 1 + 2ε, …}` up to `H`, with `H` appended if it is not on the grid.
    Arithmetic(f64),
    /// `points` geometrically spaced values from 1 to `H`.
    Geometric(usize),
}

/// Each support point carries the equal-revenue mass up to the next point:
/// `q_j = 1/w_j − 1/w_{j+1}` and an atom `1/H` at `H`, so `Pr[v ≥ w_j] = 1/w_j` exactly.
pub fn equal_revenue_distribution(h: f64, grid: Grid) -> Result<ValueDistribution<f64>> {
    if !(h > 1.0) || !h.is_finite() {
        return Err(Error::Precondition(format!("truncation point must exceed 1, got {h}")));
    }
    let support: Vec<f64> = match grid {
        Grid::Arithmetic(eps) => {
            if !(eps > 0.0) {
                return Err(Error::Precondition(format!("grid step must be positive, got {eps}")));
            }
            let steps = ((h - 1.0) / eps).floor();
            if steps + 2.0 > MAX_GRID_POINTS as f64 {
                return Err(Error::TooLarge(format!("grid has more than {MAX_GRID_POINTS} points")));
            }
            let mut s: Vec<f64> = (0..=steps as usize).map(|k| 1.0 + k as f64 * eps).filter(|v| *v < h).collect();
            s.push(h);
            s
        }
        Grid::Geometric(points) => {
            if points < 2 {
                return Err(Error::Precondition("geometric grid needs at least two points".into()));
            }
            if points > MAX_GRID_POINTS {
                return Err(Error::TooLarge(format!("grid has more than {MAX_GRID_POINTS} points")));
            }
            let mut s: Vec<f64> = (0..points).map(|k| h.powf(k as f64 / (points - 1) as f64)).collect();
            s[0] = 1.0;
            s[points - 1] = h;
            s
        }
    };
    let m = support.len();
    let mut probs: Vec<f64> = (0..m)
        .map(|j| if j + 1 < m { 1.0 / support[j] - 1.0 / support[j + 1] } else { 1.0 / h })
        .collect();
    let rest: f64 = probs[1..].iter().sum();
    probs[0] = 1.0 - rest;
    ValueDistribution::new(support, probs)
}

/// Optimal single-buyer no-regret revenue on the discretized equal-revenue distribution.
pub fn slprev_equal_revenue(h: f64, grid: Grid) -> Result<f64> {
    let d = equal_revenue_distribution(h, grid)?;
    Ok(solve_single_lp_large(&d)?.objective)
}

/// Smallest support value whose virtual value stays positive under the filled multipliers.
pub fn positive_phi_boundary(dist: &ValueDistribution<f64>) -> Option<f64> {
    let lambda = fill_low_to_high(dist);
    let phis = phi_all(dist, &lambda);
    let scale = dist.max_value() * 1e-9;
    phis.iter().position(|p| *p > scale).map(|i| *dist.value(i))
}

/// Largest support value lowered by the highest non-atom support point. On the equal-revenue
/// grid this tracks `H / (ln H + 1)`; the atom at `H` lowers further and moves
/// [`positive_phi_boundary`] above it.
pub fn continuous_boundary(dist: &ValueDistribution<f64>) -> Option<f64> {
    if dist.m() < 3 {
        return None;
    }
    let k = dist.m() - 2;
    let lambda = fill_low_to_high(dist);
    lambda.support().filter(|(row, i, _)| *row == k && *i < k).map(|(_, i, _)| *dist.value(i)).max_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::lagrangian_value;

    #[test]
    fn tail_masses_are_equal_revenue() {
        let d = equal_revenue_distribution(100.0, Grid::Geometric(50)).unwrap();
        for j in 0..d.m() {
            assert!((d.tail(j) - 1.0 / d.value(j)).abs() < 1e-12);
        }
        let a = equal_revenue_distribution(3.0, Grid::Arithmetic(0.5)).unwrap();
        assert_eq!(a.support(), &[1.0, 1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn short_curve_beats_posted_price() {
        let v = slprev_equal_revenue(2.0, Grid::Arithmetic(0.25)).unwrap();
        assert!(v >= 1.0 - 1e-12);
    }

    #[test]
    fn lp_matches_dual_on_medium_grid() {
        let d = equal_revenue_distribution(1e3, Grid::Geometric(300)).unwrap();
        let primal = solve_single_lp_large(&d).unwrap().objective;
        let dual = lagrangian_value(&d, &fill_low_to_high(&d));
        assert!((primal - dual).abs() < 1e-8 * dual, "{primal} vs {dual}");
    }

    #[test]
    fn boundary_tracks_closed_form() {
        for h in [1e2, 1e3, 1e4] {
            let d = equal_revenue_distribution(h, Grid::Geometric(2000)).unwrap();
            let g = h / (h.ln() + 1.0);
            let b = continuous_boundary(&d).unwrap();
            assert!((b / g - 1.0).abs() < 0.01, "H = {h}: {b} vs {g}");
            assert!(positive_phi_boundary(&d).unwrap() >= b);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(equal_revenue_distribution(1.0, Grid::Geometric(10)).is_err());
        assert!(matches!(equal_revenue_distribution(1e4, Grid::Arithmetic(1.0)), Err(Error::TooLarge(_))));
        assert!(matches!(equal_revenue_distribution(1e4, Grid::Geometric(6000)), Err(Error::TooLarge(_))));
    }
}
