use num_traits::{One, Zero};

use super::{Cmp, VerificationReport};
use crate::border::{border_extreme_point, border_satisfied};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, ratio, Rational};

/// The four-point instance whose Border vertex satisfies the reduced multi-buyer BMSW
/// constraints yet cannot be implemented against clever mean-based buyers.
///
/// Support `[1, 4, 5, 10] / M`, masses `[5δ, δ, δ, 1 − 7δ]`, two buyers, and `x* = W q` with `W`
/// lower triangular: ones below the diagonal and 1/2 on it.
pub fn verify_counterexample(scale: &Rational, delta: &Rational) -> Result<VerificationReport> {
    let zero = Rational::zero();
    if *scale <= zero {
        return Err(Error::Precondition("M must be positive".into()));
    }
    if *delta <= zero || *delta >= ratio(1, 7) {
        return Err(Error::Precondition(format!("delta = {} must lie in (0, 1/7)", format_rational(delta))));
    }
    let d = delta.clone();
    let w: Vec<Rational> = [1, 4, 5, 10].iter().map(|&a| ratio(a, 1) / scale.clone()).collect();
    let q = vec![ratio(5, 1) * d.clone(), d.clone(), d.clone(), Rational::one() - ratio(7, 1) * d.clone()];
    let x: Vec<Rational> = (0..4)
        .map(|i| {
            (0..=i).fold(zero.clone(), |acc, j| {
                let weight = if j == i { ratio(1, 2) } else { Rational::one() };
                acc + weight * q[j].clone()
            })
        })
        .collect();
    // Tightest utilities compatible with x*. Taking the minimum over j <= i, as the construction
    // is sometimes written, always picks j = i and gives u* = 0, which breaks the constraints.
    let u: Vec<Rational> = (0..4)
        .map(|i| (0..=i).map(|j| (w[i].clone() - w[j].clone()) * x[j].clone()).max().expect("j = i exists"))
        .collect();

    let mut r = VerificationReport::new("counterexample");
    r.check("x*_1 = 5δ/2", x[0].clone(), Cmp::Eq, ratio(5, 2) * d.clone());
    r.check("x*_2 = 11δ/2", x[1].clone(), Cmp::Eq, ratio(11, 2) * d.clone());
    r.check("x*_3 = 13δ/2", x[2].clone(), Cmp::Eq, ratio(13, 2) * d.clone());
    r.check("x*_4 = 1/2 + 7δ/2", x[3].clone(), Cmp::Eq, ratio(1, 2) + ratio(7, 2) * d.clone());
    let listed = Rational::one() - ratio(7, 2) * d.clone();
    if x[3] != listed {
        r.note(format!(
            "x*_4 = Wq = {} differs from the listed 1 - 7δ/2 = {}; only x*_1..x*_3 enter the inequalities",
            format_rational(&x[3]),
            format_rational(&listed)
        ));
    }
    r.check("u*_1 = 0", u[0].clone(), Cmp::Eq, zero.clone());
    r.note("u*_i is the largest (w_i - w_j) x*_j over j <= i; the smallest is always 0");

    let m = scale.clone();
    let lhs1 = x[0].clone() * (w[2].clone() - w[0].clone());
    let rhs1 = x[1].clone() * (w[2].clone() - w[1].clone());
    r.check("x*_1 (w_3 - w_1) = 10δ/M", lhs1.clone(), Cmp::Eq, ratio(10, 1) * d.clone() / m.clone());
    r.check("x*_2 (w_3 - w_2) = 5.5δ/M", rhs1.clone(), Cmp::Eq, ratio(11, 2) * d.clone() / m.clone());
    r.check("x*_1 (w_3 - w_1) > x*_2 (w_3 - w_2)", lhs1, Cmp::Gt, rhs1);
    let lhs2 = x[1].clone() * (w[3].clone() - w[1].clone());
    let rhs2 = x[0].clone() * (w[3].clone() - w[0].clone());
    let rhs3 = x[2].clone() * (w[3].clone() - w[2].clone());
    r.check("x*_2 (w_4 - w_2) = 33δ/M", lhs2.clone(), Cmp::Eq, ratio(33, 1) * d.clone() / m.clone());
    r.check("x*_1 (w_4 - w_1) = 22.5δ/M", rhs2.clone(), Cmp::Eq, ratio(45, 2) * d.clone() / m.clone());
    r.check("x*_3 (w_4 - w_3) = 32.5δ/M", rhs3.clone(), Cmp::Eq, ratio(65, 2) * d.clone() / m);
    r.check("x*_2 (w_4 - w_2) > x*_1 (w_4 - w_1)", lhs2.clone(), Cmp::Gt, rhs2);
    r.check("x*_2 (w_4 - w_2) > x*_3 (w_4 - w_3)", lhs2, Cmp::Gt, rhs3);

    r.check("u*_3 = x*_1 (w_3 - w_1)", u[2].clone(), Cmp::Eq, x[0].clone() * (w[2].clone() - w[0].clone()));
    r.check("u*_4 = x*_2 (w_4 - w_2)", u[3].clone(), Cmp::Eq, x[1].clone() * (w[3].clone() - w[1].clone()));
    // Value w_4 can copy value w_3's favourite arm, which sells with probability at least x*_2.
    r.check(
        "u*_4 < x*_2 (w_4 - w_3) + u*_3",
        u[3].clone(),
        Cmp::Lt,
        x[1].clone() * (w[3].clone() - w[2].clone()) + u[2].clone(),
    );

    // The reduced BMSW constraints hold by construction of u*.
    let mut bmsw = true;
    for i in 0..4 {
        bmsw &= u[i] >= zero;
        for j in 0..i {
            bmsw &= u[i] >= (w[i].clone() - w[j].clone()) * x[j].clone();
        }
    }
    bmsw &= x.windows(2).all(|p| p[0] <= p[1]);
    let flag = |b: bool| if b { Rational::one() } else { zero.clone() };
    r.check("reduced BMSW constraints hold (1 = yes)", flag(bmsw), Cmp::Eq, Rational::one());
    r.check("x* satisfies Border for n = 2 (1 = yes)", flag(border_satisfied(&q, &x, 2)?), Cmp::Eq, Rational::one());
    r.check(
        "x* is a Border extreme point (1 = yes)",
        flag(border_extreme_point(&q, &x, 2)?),
        Cmp::Eq,
        Rational::one(),
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_instance() {
        let r = verify_counterexample(&ratio(10, 1), &ratio(1, 10)).unwrap();
        assert!(r.pass, "{r}");
        assert_eq!(r.find("x*_1 = 5δ/2").unwrap().left, ratio(1, 4));
        assert_eq!(r.find("x*_4 = 1/2 + 7δ/2").unwrap().left, ratio(17, 20));
        assert_eq!(r.notes.len(), 2);
    }

    #[test]
    fn parameter_range() {
        assert!(verify_counterexample(&ratio(10, 1), &ratio(1, 7)).is_err());
        assert!(verify_counterexample(&ratio(10, 1), &ratio(0, 1)).is_err());
        assert!(verify_counterexample(&ratio(0, 1), &ratio(1, 10)).is_err());
    }

    #[test]
    fn sweep() {
        let deltas = [ratio(1, 100), ratio(1, 20), ratio(1, 10), ratio(1, 8), ratio(13, 100)];
        let scales = [ratio(1, 1), ratio(10, 1), ratio(1000, 1), ratio(7, 3)];
        let mut runs = 0;
        for d in &deltas {
            for m in &scales {
                let r = verify_counterexample(m, d).unwrap();
                assert!(r.pass, "{r}");
                runs += 1;
            }
        }
        assert_eq!(runs, 20);
    }
}
