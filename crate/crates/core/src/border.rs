//! Border feasibility of symmetric interim allocations.

use crate::error::{Error, Result};
use num_traits::{One, Zero};

use crate::scalar::{Rational, Scalar};
use crate::simplex::{LinearProgram, LpStatus, Relation};

/// Right-hand side of the Border inequality for a set of total mass `mass`.
pub fn border_rhs<T: Scalar>(mass: &T, n: usize) -> T {
    T::one() - (T::one() - mass.clone()).powu(n)
}

/// Checks `n·Σ_{ℓ∈S} p_ℓ x_ℓ ≤ 1 − (1 − p(S))^n` on every prefix of the types sorted by
/// decreasing `x`. The upper level sets of `x` are the binding sets, and they are all prefixes.
pub fn border_satisfied<T: Scalar>(pull_probs: &[T], x: &[T], n: usize) -> Result<bool> {
    if pull_probs.len() != x.len() {
        return Err(Error::LengthMismatch { expected: pull_probs.len(), got: x.len() });
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap_or(std::cmp::Ordering::Equal));
    let n_t = T::from_usize(n);
    let mut mass = T::zero();
    let mut lhs = T::zero();
    for &j in &order {
        mass = mass + pull_probs[j].clone();
        lhs = lhs + pull_probs[j].clone() * x[j].clone();
        if !(n_t.clone() * lhs.clone()).le_tol(&border_rhs(&mass, n)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rank of a dense rational matrix.
pub(crate) fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone() / rows[r][c].clone();
                for k in c..cols {
                    let d = f.clone() * rows[r][k].clone();
                    rows[i][k] = rows[i][k].clone() - d;
                }
            }
        }
        r += 1;
    }
    r
}

/// Whether `x` is a vertex of the Border polytope intersected with the box `[0, 1]^m` and the
/// monotone cone: `x` must be feasible and the constraints tight at `x` must pin it down
/// uniquely (their rows have full rank). Every subset of types is enumerated, so `m ≤ 16`.
pub fn border_extreme_point(pull_probs: &[Rational], x: &[Rational], n: usize) -> Result<bool> {
    let m = x.len();
    if pull_probs.len() != m {
        return Err(Error::LengthMismatch { expected: pull_probs.len(), got: m });
    }
    if m > 16 {
        return Err(Error::TooLarge(format!("2^{m} Border subsets")));
    }
    let zero = Rational::zero();
    let one = Rational::one();
    if x.iter().any(|v| *v < zero || *v > one) || x.windows(2).any(|w| w[0] > w[1]) {
        return Ok(false);
    }
    let n_r = Rational::from_usize(n);
    let mut tight = Vec::new();
    for mask in 1u32..(1 << m) {
        let members = (0..m).filter(|j| mask & (1 << j) != 0);
        let mut row = vec![zero.clone(); m];
        let mut mass = zero.clone();
        let mut lhs = zero.clone();
        for j in members {
            row[j] = n_r.clone() * pull_probs[j].clone();
            mass = mass + pull_probs[j].clone();
            lhs = lhs + row[j].clone() * x[j].clone();
        }
        let rhs = border_rhs(&mass, n);
        if lhs > rhs {
            return Ok(false);
        }
        if lhs == rhs {
            tight.push(row);
        }
    }
    for j in 0..m {
        if x[j] == zero || x[j] == one {
            let mut row = vec![zero.clone(); m];
            row[j] = one.clone();
            tight.push(row);
        }
        if j + 1 < m && x[j] == x[j + 1] {
            let mut row = vec![zero.clone(); m];
            row[j] = one.clone();
            row[j + 1] = -one.clone();
            tight.push(row);
        }
    }
    Ok(rank(tight) == m)
}

/// Tail form used inside the LPs: for monotone `x` only the sets `{ℓ ≥ j}` matter.
/// Adds `n·Σ_{ℓ≥j} q_ℓ x_ℓ ≤ 1 − (1 − Q_j)^n` for every `j`, with `x_ℓ` stored in column `x_col + ℓ`.
pub fn add_border_tail_rows<T: Scalar>(lp: &mut LinearProgram<T>, probs: &[T], x_col: usize, n: usize) {
    let m = probs.len();
    let n_t = T::from_usize(n);
    let mut mass = T::zero();
    for j in (0..m).rev() {
        mass = mass + probs[j].clone();
        let terms: Vec<(usize, T)> = (j..m).map(|l| (x_col + l, n_t.clone() * probs[l].clone())).collect();
        lp.add_constraint(&terms, Relation::Le, border_rhs(&mass, n));
    }
}

/// Nondecreasing index sequences of length `len` over `0..m` (multisets of types).
pub(crate) fn multisets(m: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(m: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for j in start..m {
            cur.push(j);
            rec(m, len, j, cur, out);
            cur.pop();
        }
    }
    rec(m, len, 0, &mut cur, &mut out);
    out
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Probability of drawing exactly the multiset `ms` in `ms.len()` i.i.d. draws.
pub(crate) fn multiset_prob<T: Scalar>(ms: &[usize], probs: &[T]) -> T {
    let mut counts = vec![0usize; probs.len()];
    ms.iter().for_each(|&j| counts[j] += 1);
    let coef = counts.iter().fold(factorial(ms.len()), |acc, &c| acc / factorial(c));
    counts
        .iter()
        .enumerate()
        .fold(T::from_ratio(coef as i64, 1), |acc, (j, &c)| acc * probs[j].powu(c))
}

/// Decides Border feasibility directly: is there a symmetric allocation rule `a(type, others)`
/// with at most one item handed out per profile whose interim allocation equals `x`
/// on every type pulled with positive probability?
pub fn border_oracle<T: Scalar>(pull_probs: &[T], x: &[T], n: usize) -> Result<bool> {
    let m = pull_probs.len();
    if x.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: x.len() });
    }
    if n == 0 || n > 3 || m > 4 {
        return Err(Error::TooLarge(format!("border oracle supports 1 <= n <= 3 and m <= 4, got n = {n}, m = {m}")));
    }
    let others = multisets(m, n - 1);
    let col = |j: usize, k: usize| j * others.len() + k;
    let mut lp = LinearProgram::<T>::new(m * others.len());

    for profile in multisets(m, n) {
        let mut terms = Vec::new();
        let mut seen = vec![false; m];
        for (pos, &j) in profile.iter().enumerate() {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            let count = profile.iter().filter(|&&t| t == j).count();
            let mut rest = profile.clone();
            rest.remove(pos);
            let k = others.iter().position(|o| *o == rest).expect("sub-multiset enumerated");
            terms.push((col(j, k), T::from_usize(count)));
        }
        lp.add_constraint(&terms, Relation::Le, T::one());
    }
    for j in 0..m {
        if pull_probs[j].is_zero() {
            continue;
        }
        let terms: Vec<(usize, T)> = others
            .iter()
            .enumerate()
            .map(|(k, o)| (col(j, k), multiset_prob(o, pull_probs)))
            .collect();
        lp.add_constraint(&terms, Relation::Eq, x[j].clone());
    }
    Ok(lp.solve().status != LpStatus::Infeasible)
}
