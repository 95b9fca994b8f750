//! Lagrangian multipliers of the single-buyer program and the virtual values they induce.

use serde::Serialize;

use crate::dist::ValueDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower-triangular multipliers: `rows[k][i]` is `λ_{ki}` for `i ≤ k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianMultipliers<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> LagrangianMultipliers<T> {
    /// Validates nonnegativity, shape and unit row sums.
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        for (k, row) in rows.iter().enumerate() {
            if row.len() != k + 1 {
                return Err(Error::LengthMismatch { expected: k + 1, got: row.len() });
            }
            if row.iter().any(|v| *v < T::zero() && !v.approx_eq(&T::zero())) {
                return Err(Error::Precondition(format!("row {k} has a negative multiplier")));
            }
            let sum = row.iter().fold(T::zero(), |a, v| a + v.clone());
            if !sum.approx_eq(&T::one()) {
                return Err(Error::Precondition(format!("row {k} sums to {sum:?}, not 1")));
            }
        }
        Ok(Self { rows })
    }

    /// The identity assignment `λ_{kk} = 1`.
    pub fn diagonal(m: usize) -> Self {
        let rows = (0..m)
            .map(|k| {
                let mut row = vec![T::zero(); k + 1];
                row[k] = T::one();
                row
            })
            .collect();
        Self { rows }
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, k: usize, i: usize) -> T {
        if i <= k && k < self.rows.len() {
            self.rows[k][i].clone()
        } else {
            T::zero()
        }
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    /// Nonzero entries `(k, i, λ_{ki})`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(i, v)| (k, i, v)))
    }
}

/// `φ(i, λ) = v_i − Σ_{k≥i} (q_k / q_i)(v_k − v_i) λ_{ki}`.
pub fn phi<T: Scalar>(dist: &ValueDistribution<T>, lambda: &LagrangianMultipliers<T>, i: usize) -> T {
    let vi = dist.value(i).clone();
    let qi = dist.prob(i).clone();
    (i..dist.m()).fold(vi.clone(), |acc, k| {
        let l = lambda.get(k, i);
        if l.is_zero() {
            acc
        } else {
            acc - dist.prob(k).clone() / qi.clone() * (dist.value(k).clone() - vi.clone()) * l
        }
    })
}

pub fn phi_all<T: Scalar>(dist: &ValueDistribution<T>, lambda: &LagrangianMultipliers<T>) -> Vec<T> {
    (0..dist.m()).map(|i| phi(dist, lambda, i)).collect()
}

/// `max_x Σ q_i φ_i x_i` over monotone `x ∈ [0, 1]^m`. Extreme points are upper step functions,
/// so this is the largest suffix sum of `q_i φ_i` (the empty suffix gives zero).
pub fn lagrangian_value<T: Scalar>(dist: &ValueDistribution<T>, lambda: &LagrangianMultipliers<T>) -> T {
    let phis = phi_all(dist, lambda);
    let mut best = T::zero();
    let mut suffix = T::zero();
    for i in (0..dist.m()).rev() {
        suffix = suffix + dist.prob(i).clone() * phis[i].clone();
        best = T::max_of(best, suffix.clone());
    }
    best
}

/// For each `k` in increasing order, spend `λ_k`'s unit budget lowering the smallest index with
/// positive virtual value until it reaches zero, then the next one. Budget that cannot lower any
/// index `i ≤ k` lands on the diagonal, where it has no effect.
pub fn fill_low_to_high<T: Scalar>(dist: &ValueDistribution<T>) -> LagrangianMultipliers<T> {
    let m = dist.m();
    let mut rows: Vec<Vec<T>> = (0..m).map(|k| vec![T::zero(); k + 1]).collect();
    let mut phis: Vec<T> = dist.support().to_vec();
    let mut lo = 0;
    for k in 0..m {
        let mut budget = T::one();
        while budget > T::zero() {
            while lo < m && phis[lo] <= T::zero() {
                lo += 1;
            }
            if lo >= k {
                rows[k][k] = rows[k][k].clone() + budget;
                break;
            }
            let rate = dist.prob(k).clone() / dist.prob(lo).clone() * (dist.value(k).clone() - dist.value(lo).clone());
            let fill = phis[lo].clone() / rate.clone();
            if fill <= budget {
                rows[k][lo] = rows[k][lo].clone() + fill.clone();
                budget = budget - fill;
                phis[lo] = T::zero();
            } else {
                rows[k][lo] = rows[k][lo].clone() + budget.clone();
                phis[lo] = phis[lo].clone() - rate * budget;
                budget = T::zero();
            }
        }
    }
    LagrangianMultipliers { rows }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaReport {
    /// `φ_i ≥ 0` for all `i`; witness is a negative index.
    pub nonnegative: bool,
    pub nonnegative_witness: Option<usize>,
    /// No `i < j < k < l` with `λ_{li} > 0` and `λ_{kj} > 0`.
    pub nested: bool,
    pub nested_witness: Option<[usize; 4]>,
    /// `λ_{ki} = 0` whenever some `j < i` has `q_j φ_j > 0`; witness `(k, i, j)`.
    pub lowest_positive: bool,
    pub lowest_positive_witness: Option<[usize; 3]>,
    /// `φ` nondecreasing; witness `(i, i + 1)`.
    pub phi_monotone: bool,
    pub phi_monotone_witness: Option<[usize; 2]>,
}

impl LambdaReport {
    pub fn all_hold(&self) -> bool {
        self.nonnegative && self.nested && self.lowest_positive && self.phi_monotone
    }
}

/// Evaluates the three structural properties and `φ`-monotonicity literally, with witnesses.
pub fn check_lambda_properties<T: Scalar>(
    dist: &ValueDistribution<T>,
    lambda: &LagrangianMultipliers<T>,
) -> Result<LambdaReport> {
    let m = dist.m();
    if lambda.m() != m {
        return Err(Error::LengthMismatch { expected: m, got: lambda.m() });
    }
    let phis = phi_all(dist, lambda);
    let zero = T::zero();

    let nonnegative_witness = (0..m).find(|&i| phis[i] < zero && !phis[i].approx_eq(&zero));

    // Smallest lowered index per row, then the suffix minimum over rows above k.
    let min_lowered: Vec<Option<usize>> =
        lambda.rows().iter().map(|row| row.iter().position(|v| v.gt_tol(&T::zero()))).collect();
    let mut suffix_min: Vec<Option<(usize, usize)>> = vec![None; m + 1];
    for l in (0..m).rev() {
        suffix_min[l] = match (min_lowered[l], suffix_min[l + 1]) {
            (Some(i), Some((bi, bl))) => Some(if i < bi { (i, l) } else { (bi, bl) }),
            (Some(i), None) => Some((i, l)),
            (None, s) => s,
        };
    }
    let nested_witness = lambda.support().filter(|(_, _, v)| v.gt_tol(&T::zero())).find_map(|(k, j, _)| match suffix_min[k + 1] {
        Some((i, l)) if i < j && j < k => Some([i, j, k, l]),
        _ => None,
    });

    let first_positive = (0..m).find(|&j| (dist.prob(j).clone() * phis[j].clone()).gt_tol(&zero));
    let lowest_positive_witness = match first_positive {
        None => None,
        Some(j) => lambda.support().find(|(_, i, v)| *i > j && v.gt_tol(&T::zero())).map(|(k, i, _)| [k, i, j]),
    };

    let phi_monotone_witness = (1..m).find(|&i| phis[i - 1].gt_tol(&phis[i])).map(|i| [i - 1, i]);

    Ok(LambdaReport {
        nonnegative: nonnegative_witness.is_none(),
        nonnegative_witness,
        nested: nested_witness.is_none(),
        nested_witness,
        lowest_positive: lowest_positive_witness.is_none(),
        lowest_positive_witness,
        phi_monotone: phi_monotone_witness.is_none(),
        phi_monotone_witness,
    })
}

/// Discrete analogue of `f(v)/F(v) ≤ 1/(H − v)`: `F(w_j)/F(w_i) ≥ (H − w_i)/(H − w_j)` for all `j < i`.
pub fn regularity_check<T: Scalar>(dist: &ValueDistribution<T>) -> Result<bool> {
    let m = dist.m();
    if m < 2 {
        return Err(Error::Precondition("regularity check needs at least two support points".into()));
    }
    let h = dist.max_value().clone();
    for i in 1..m {
        for j in 0..i {
            let lhs = dist.cdf(j) * (h.clone() - dist.value(j).clone());
            let rhs = dist.cdf(i) * (h.clone() - dist.value(i).clone());
            if !rhs.le_tol(&lhs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    fn remark_dist() -> ValueDistribution<Rational> {
        ValueDistribution::uniform(vec![ratio(1, 1), ratio(9, 1), ratio(10, 1), ratio(15, 1)]).unwrap()
    }

    #[test]
    fn fill_on_the_remark_instance() {
        let d = remark_dist();
        let l = fill_low_to_high(&d);
        assert_eq!(l.get(0, 0), ratio(1, 1));
        assert_eq!(l.get(1, 0), ratio(1, 8));
        assert_eq!(l.get(1, 1), ratio(7, 8));
        assert_eq!(l.get(2, 1), ratio(1, 1));
        assert_eq!(l.get(3, 1), ratio(1, 1));
        assert_eq!(l.support().count(), 5);
        assert_eq!(phi_all(&d, &l), vec![ratio(0, 1), ratio(2, 1), ratio(10, 1), ratio(15, 1)]);
        assert_eq!(lagrangian_value(&d, &l), ratio(27, 4));
        assert!(check_lambda_properties(&d, &l).unwrap().all_hold());
        assert!(LagrangianMultipliers::new(l.rows().to_vec()).is_ok());
    }

    #[test]
    fn diagonal_multipliers_give_values() {
        let d = remark_dist();
        let l = LagrangianMultipliers::<Rational>::diagonal(4);
        assert_eq!(phi_all(&d, &l), d.support().to_vec());
        let r = check_lambda_properties(&d, &l).unwrap();
        assert!(r.nonnegative && r.nested && r.phi_monotone);
        assert!(!r.lowest_positive);
        assert_eq!(r.lowest_positive_witness, Some([1, 1, 0]));
    }

    #[test]
    fn single_term_phi() {
        let d = remark_dist();
        let mut rows: Vec<Vec<Rational>> = LagrangianMultipliers::<Rational>::diagonal(4).rows().to_vec();
        rows[3] = vec![ratio(1, 1), ratio(0, 1), ratio(0, 1), ratio(0, 1)];
        let l = LagrangianMultipliers::new(rows).unwrap();
        assert_eq!(phi(&d, &l, 0), ratio(1, 1) - ratio(15 - 1, 1));
    }

    #[test]
    fn crossing_multipliers_break_nesting() {
        let d = remark_dist();
        let rows = vec![
            vec![ratio(1, 1)],
            vec![ratio(0, 1), ratio(1, 1)],
            vec![ratio(0, 1), ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 2), ratio(0, 1), ratio(0, 1), ratio(1, 2)],
        ];
        let r = check_lambda_properties(&d, &LagrangianMultipliers::new(rows).unwrap()).unwrap();
        assert!(!r.nested);
        assert_eq!(r.nested_witness, Some([0, 1, 2, 3]));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(LagrangianMultipliers::new(vec![vec![ratio(1, 2)]]).is_err());
        assert!(LagrangianMultipliers::new(vec![vec![ratio(1, 1)], vec![ratio(1, 1)]]).is_err());
        assert!(LagrangianMultipliers::new(vec![vec![ratio(1, 1)], vec![ratio(3, 2), ratio(-1, 2)]]).is_err());
    }

    #[test]
    fn single_point_fill() {
        let d = ValueDistribution::point_mass(ratio(2, 1)).unwrap();
        let l = fill_low_to_high(&d);
        assert_eq!(l.get(0, 0), ratio(1, 1));
        assert_eq!(lagrangian_value(&d, &l), ratio(2, 1));
    }

    #[test]
    fn regularity_examples() {
        assert!(!regularity_check(&remark_dist()).unwrap());
        let two = ValueDistribution::uniform(vec![ratio(1, 1), ratio(2, 1)]).unwrap();
        assert!(regularity_check(&two).unwrap());
        let heavy_low = ValueDistribution::new(
            vec![ratio(1, 1), ratio(2, 1), ratio(3, 1)],
            vec![ratio(8, 10), ratio(1, 10), ratio(1, 10)],
        )
        .unwrap();
        assert!(regularity_check(&heavy_low).unwrap());
        let one = ValueDistribution::point_mass(ratio(1, 1)).unwrap();
        assert!(regularity_check(&one).is_err());
    }
}
