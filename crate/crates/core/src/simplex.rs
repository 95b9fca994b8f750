//! Dense two-phase tableau simplex, generic over float and exact rational arithmetic.
//!
//! All variables are nonnegative and the objective is maximized. Bland's rule keeps
//! the method finite, which matters more here than speed: the programs are tiny.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpOutcome<T> {
    pub status: LpStatus,
    pub values: Vec<T>,
    pub objective: T,
}

#[derive(Clone, Debug)]
struct Row<T> {
    coeffs: Vec<T>,
    relation: Relation,
    rhs: T,
}

#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    num_vars: usize,
    objective: Vec<T>,
    rows: Vec<Row<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, objective: vec![T::zero(); num_vars], rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Sets the coefficients to maximize; unspecified variables get zero.
    pub fn maximize(&mut self, terms: &[(usize, T)]) {
        self.objective = vec![T::zero(); self.num_vars];
        for (j, c) in terms {
            self.objective[*j] = self.objective[*j].clone() + c.clone();
        }
    }

    pub fn add_constraint(&mut self, terms: &[(usize, T)], relation: Relation, rhs: T) {
        let mut coeffs = vec![T::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[*j] = coeffs[*j].clone() + c.clone();
        }
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> LpOutcome<T> {
        Tableau::build(self).run(self)
    }
}

struct Tableau<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
    first_artificial: usize,
    tol: T,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let n = lp.num_vars;
        let mut rows: Vec<Row<T>> = lp.rows.clone();
        for row in &mut rows {
            if row.rhs < T::zero() {
                row.coeffs.iter_mut().for_each(|c| *c = -c.clone());
                row.rhs = -row.rhs.clone();
                row.relation = match row.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let slack_count = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let art_count = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let first_artificial = n + slack_count;
        let ncols = first_artificial + art_count;
        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut next_slack, mut next_art) = (n, first_artificial);
        for row in rows {
            let mut line = row.coeffs;
            line.resize(ncols, T::zero());
            match row.relation {
                Relation::Le => {
                    line[next_slack] = T::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    line[next_slack] = -T::one();
                    next_slack += 1;
                    line[next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    line[next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            a.push(line);
            b.push(row.rhs);
        }
        Self { a, b, basis, ncols, first_artificial, tol: T::tolerance() }
    }

    fn run(mut self, lp: &LinearProgram<T>) -> LpOutcome<T> {
        let n = lp.num_vars;
        if self.first_artificial < self.ncols {
            let mut cost = vec![T::zero(); self.ncols];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = -T::one();
            }
            self.optimize(&cost, self.ncols);
            let infeasibility: T = self
                .basis
                .iter()
                .zip(&self.b)
                .filter(|(j, _)| **j >= self.first_artificial)
                .fold(T::zero(), |acc, (_, v)| acc + v.clone());
            if infeasibility.gt_tol(&T::zero()) {
                return LpOutcome { status: LpStatus::Infeasible, values: vec![T::zero(); n], objective: T::zero() };
            }
            self.drive_out_artificials();
        }
        let mut cost = vec![T::zero(); self.ncols];
        cost[..n].clone_from_slice(&lp.objective);
        let bounded = self.optimize(&cost, self.first_artificial);
        let mut values = vec![T::zero(); n];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < n {
                values[j] = self.b[r].clone();
            }
        }
        let objective = values
            .iter()
            .zip(&lp.objective)
            .fold(T::zero(), |acc, (x, c)| acc + x.clone() * c.clone());
        let status = if bounded { LpStatus::Optimal } else { LpStatus::Unbounded };
        LpOutcome { status, values, objective }
    }

    /// Maximizes `cost` with only columns below `allowed` eligible to enter. Returns false if unbounded.
    fn optimize(&mut self, cost: &[T], allowed: usize) -> bool {
        let m = self.a.len();
        let mut z = vec![T::zero(); self.ncols];
        for (j, zj) in z.iter_mut().enumerate() {
            let mut acc = -cost[j].clone();
            for r in 0..m {
                let cb = &cost[self.basis[r]];
                if !cb.is_zero() && !self.a[r][j].is_zero() {
                    acc = acc + cb.clone() * self.a[r][j].clone();
                }
            }
            *zj = acc;
        }
        loop {
            let neg_tol = -self.tol.clone();
            let Some(enter) = (0..allowed).find(|&j| z[j] < neg_tol && !self.basis.contains(&j)) else {
                return true;
            };
            let mut leave: Option<(usize, T)> = None;
            for r in 0..m {
                let coef = &self.a[r][enter];
                if coef.gt_tol(&T::zero()) {
                    let ratio = self.b[r].clone() / coef.clone();
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < best.clone() - self.tol.clone()
                                || (ratio.approx_eq(best) && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, enter);
            let factor = z[enter].clone();
            if !factor.is_zero() {
                for j in 0..self.ncols {
                    if !self.a[row][j].is_zero() {
                        z[j] = z[j].clone() - factor.clone() * self.a[row][j].clone();
                    }
                }
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col].clone();
        for v in self.a[row].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        self.b[row] = self.b[row].clone() / p;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.b[row].clone();
        for r in 0..self.a.len() {
            if r == row {
                continue;
            }
            let factor = self.a[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for (j, pv) in pivot_row.iter().enumerate() {
                if !pv.is_zero() {
                    self.a[r][j] = self.a[r][j].clone() - factor.clone() * pv.clone();
                }
            }
            self.b[r] = self.b[r].clone() - factor * pivot_rhs.clone();
            if !T::EXACT && self.b[r] < T::zero() && self.b[r].approx_eq(&T::zero()) {
                self.b[r] = T::zero();
            }
        }
        self.basis[row] = col;
    }

    fn drive_out_artificials(&mut self) {
        let mut r = 0;
        while r < self.a.len() {
            if self.basis[r] >= self.first_artificial {
                let replacement = (0..self.first_artificial).find(|&j| self.a[r][j].abs().gt_tol(&T::zero()));
                match replacement {
                    Some(j) => {
                        self.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        // Redundant constraint.
                        self.a.remove(r);
                        self.b.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y; x <= 4; 2y <= 12; 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.maximize(&[(0, ratio(3, 1)), (1, ratio(5, 1))]);
        lp.add_constraint(&[(0, ratio(1, 1))], Relation::Le, ratio(4, 1));
        lp.add_constraint(&[(1, ratio(2, 1))], Relation::Le, ratio(12, 1));
        lp.add_constraint(&[(0, ratio(3, 1)), (1, ratio(2, 1))], Relation::Le, ratio(18, 1));
        let out = lp.solve();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.objective, ratio(36, 1));
        assert_eq!(out.values, vec![ratio(2, 1), ratio(6, 1)]);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y s.t. x + y >= 2, x - y = 1  -> max -(x+y); x = 3/2, y = 1/2
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.maximize(&[(0, ratio(-1, 1)), (1, ratio(-1, 1))]);
        lp.add_constraint(&[(0, ratio(1, 1)), (1, ratio(1, 1))], Relation::Ge, ratio(2, 1));
        lp.add_constraint(&[(0, ratio(1, 1)), (1, ratio(-1, 1))], Relation::Eq, ratio(1, 1));
        let out = lp.solve();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.values, vec![ratio(3, 2), ratio(1, 2)]);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x <= -3 means x >= 3; minimize x
        let mut lp = LinearProgram::<f64>::new(1);
        lp.maximize(&[(0, -1.0)]);
        lp.add_constraint(&[(0, -1.0)], Relation::Le, -3.0);
        let out = lp.solve();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.values[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::<Rational>::new(1);
        lp.add_constraint(&[(0, ratio(1, 1))], Relation::Le, ratio(1, 1));
        lp.add_constraint(&[(0, ratio(1, 1))], Relation::Ge, ratio(2, 1));
        assert_eq!(lp.solve().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::<f64>::new(2);
        lp.maximize(&[(0, 1.0)]);
        lp.add_constraint(&[(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(lp.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.maximize(&[(0, ratio(1, 1))]);
        lp.add_constraint(&[(0, ratio(1, 1)), (1, ratio(1, 1))], Relation::Eq, ratio(1, 1));
        lp.add_constraint(&[(0, ratio(2, 1)), (1, ratio(2, 1))], Relation::Eq, ratio(2, 1));
        let out = lp.solve();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.objective, ratio(1, 1));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule; Bland's rule terminates.
        let mut lp = LinearProgram::<Rational>::new(4);
        lp.maximize(&[(0, ratio(3, 4)), (1, ratio(-150, 1)), (2, ratio(1, 50)), (3, ratio(-6, 1))]);
        lp.add_constraint(&[(0, ratio(1, 4)), (1, ratio(-60, 1)), (2, ratio(-1, 25)), (3, ratio(9, 1))], Relation::Le, ratio(0, 1));
        lp.add_constraint(&[(0, ratio(1, 2)), (1, ratio(-90, 1)), (2, ratio(-1, 50)), (3, ratio(3, 1))], Relation::Le, ratio(0, 1));
        lp.add_constraint(&[(2, ratio(1, 1))], Relation::Le, ratio(1, 1));
        let out = lp.solve();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.objective, ratio(1, 20));
    }
}
