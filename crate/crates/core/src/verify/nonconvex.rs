use num_traits::{One, Zero};

use super::{same_bid_alloc_bound, Cmp, VerificationReport};
use crate::border::border_satisfied;
use crate::scalar::{format_rational, ratio, Rational};

const N: usize = 2;

fn tenths(v: [i64; 5]) -> Vec<Rational> {
    v.iter().map(|&a| ratio(a, 10)).collect()
}

fn values() -> Vec<Rational> {
    [1, 3, 4, 7, 30].iter().map(|&a| ratio(a, 1)).collect()
}

fn gain(w: &[Rational], y: &[Rational], i: usize, j: usize) -> Rational {
    (w[i].clone() - w[j].clone()) * y[j].clone()
}

/// Favourite arm of value `i` among bids `w_1..=w_i`; ties go to the higher arm.
fn favourite(w: &[Rational], y: &[Rational], i: usize) -> usize {
    let mut best = i;
    for j in (0..i).rev() {
        if gain(w, y, i, j) > gain(w, y, i, best) {
            best = j;
        }
    }
    best
}

fn flag(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// Border feasibility of the arm allocations `y` when arm `j` is pulled with mass `pulls[j]`;
/// arms nobody pulls drop out.
fn border_on_pulls(y: &[Rational], pulls: &[Rational]) -> bool {
    let (p, a): (Vec<_>, Vec<_>) =
        pulls.iter().zip(y).filter(|(p, _)| **p > Rational::zero()).map(|(p, a)| (p.clone(), a.clone())).unzip();
    border_satisfied(&p, &a, N).unwrap_or(false)
}

fn favourite_pulls(w: &[Rational], y: &[Rational], q: &Rational) -> Vec<Rational> {
    let mut pulls = vec![Rational::zero(); w.len()];
    for i in 0..w.len() {
        pulls[favourite(w, y, i)] += q.clone();
    }
    pulls
}

fn table(r: &mut VerificationReport, tag: &str, w: &[Rational], y: &[Rational], expected: &[(usize, usize, Rational)]) {
    for (i, j, v) in expected {
        r.check(format!("{tag}: (w_{} - w_{}) y_{}", i + 1, j + 1, j + 1), gain(w, y, *i, *j), Cmp::Eq, v.clone());
    }
}

/// Favourite arm of each value strictly beats every other arm it may pull.
fn favourites(r: &mut VerificationReport, tag: &str, w: &[Rational], y: &[Rational], values: &[usize], expected: &[usize]) {
    for (&i, &want) in values.iter().zip(expected) {
        let fav = favourite(w, y, i);
        r.check(
            format!("{tag}: favourite arm of w_{} is w_{}", i + 1, want + 1),
            Rational::from_integer((fav + 1).into()),
            Cmp::Eq,
            Rational::from_integer((want + 1).into()),
        );
        for j in 0..=i {
            if j != fav {
                r.check(
                    format!("{tag}: w_{} prefers w_{} to w_{}", i + 1, fav + 1, j + 1),
                    gain(w, y, i, fav),
                    Cmp::Gt,
                    gain(w, y, i, j),
                );
            }
        }
    }
}

/// Two allocation profiles that clever mean-based buyers can each be steered into, whose
/// midpoint cannot be implemented because two values would share a bid.
///
/// Support `[1, 3, 4, 7, 30]`, uniform masses, two buyers.
pub fn verify_nonconvexity() -> VerificationReport {
    let w = values();
    let q = ratio(1, 5);
    let x = tenths([3, 3, 3, 7, 9]);
    let ya = tenths([3, 7, 9, 9, 9]);
    let yb = tenths([3, 3, 7, 9, 9]);
    let mut r = VerificationReport::new("nonconvexity");

    table(
        &mut r,
        "a",
        &w,
        &ya,
        &[
            (4, 3, ratio(207, 10)),
            (4, 2, ratio(234, 10)),
            (4, 1, ratio(189, 10)),
            (4, 0, ratio(87, 10)),
            (3, 2, ratio(27, 10)),
            (3, 1, ratio(28, 10)),
            (3, 0, ratio(18, 10)),
            (2, 1, ratio(7, 10)),
            (2, 0, ratio(9, 10)),
        ],
    );
    favourites(&mut r, "a", &w, &ya, &[4, 3, 2, 1], &[2, 1, 0, 0]);
    for i in 0..5 {
        r.check(format!("a: w_{} wins with x_{}", i + 1, i + 1), ya[favourite(&w, &ya, i)].clone(), Cmp::Eq, x[i].clone());
    }
    r.check("a: y^a is Border feasible under its favourite pulls (1 = yes)", flag(border_on_pulls(&ya, &favourite_pulls(&w, &ya, &q))), Cmp::Eq, Rational::one());

    table(
        &mut r,
        "b",
        &w,
        &yb,
        &[
            (4, 3, ratio(207, 10)),
            (4, 2, ratio(182, 10)),
            (4, 1, ratio(81, 10)),
            (4, 0, ratio(87, 10)),
            (3, 2, ratio(21, 10)),
            (3, 1, ratio(12, 10)),
            (3, 0, ratio(18, 10)),
            (2, 1, ratio(3, 10)),
            (2, 0, ratio(9, 10)),
        ],
    );
    favourites(&mut r, "b", &w, &yb, &[4, 3, 2, 1], &[3, 2, 0, 0]);
    for i in 0..5 {
        r.check(format!("b: w_{} wins with x_{}", i + 1, i + 1), yb[favourite(&w, &yb, i)].clone(), Cmp::Eq, x[i].clone());
    }
    let implied = favourite_pulls(&w, &yb, &q);
    r.check("b: y^b is Border feasible under its favourite pulls (1 = yes)", flag(border_on_pulls(&yb, &implied)), Cmp::Eq, Rational::one());
    let listed = vec![ratio(4, 5), Rational::zero(), Rational::zero(), ratio(1, 5), Rational::zero()];
    r.check("b: y^b is Border feasible with pulls w_4, w_1 at 1/5, 4/5 (1 = yes)", flag(border_on_pulls(&yb, &listed)), Cmp::Eq, Rational::one());
    r.note(format!(
        "under y^b the favourite pulls are w_4, w_3, w_1 with masses {}, {}, {}, not w_4, w_1 with 1/5, 4/5; y^b is Border feasible under both",
        format_rational(&implied[3]),
        format_rational(&implied[2]),
        format_rational(&implied[0]),
    ));

    let y: Vec<Rational> = ya.iter().zip(&yb).map(|(a, b)| (a.clone() + b.clone()) / ratio(2, 1)).collect();
    r.check("midpoint: y_3", y[2].clone(), Cmp::Eq, ratio(8, 10));
    table(
        &mut r,
        "midpoint",
        &w,
        &y,
        &[
            (4, 3, ratio(207, 10)),
            (4, 2, ratio(208, 10)),
            (4, 1, ratio(135, 10)),
            (4, 0, ratio(87, 10)),
            (3, 2, ratio(24, 10)),
            (3, 1, ratio(2, 1)),
            (3, 0, ratio(18, 10)),
        ],
    );
    favourites(&mut r, "midpoint", &w, &y, &[4, 3], &[2, 2]);
    let shared = same_bid_alloc_bound(&(q.clone() + q.clone()), N).expect("valid mass");
    let alone = same_bid_alloc_bound(&q, N).expect("valid mass");
    r.check("ceiling for S = {w_5, w_4}", shared.clone(), Cmp::Eq, ratio(4, 5));
    r.check("ceiling for S = {w_5}", alone.clone(), Cmp::Eq, ratio(9, 10));
    r.check("x_5 needs the single-value ceiling", x[4].clone(), Cmp::Eq, alone);
    r.check("shared-bid ceiling falls short of x_5", shared, Cmp::Lt, x[4].clone());
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_tables() {
        let r = verify_nonconvexity();
        assert!(r.pass, "{r}");
        assert_eq!(r.find("a: (w_5 - w_3) y_3").unwrap().left, ratio(234, 10));
        assert_eq!(r.find("b: (w_5 - w_4) y_4").unwrap().left, ratio(207, 10));
        assert_eq!(r.find("midpoint: (w_5 - w_3) y_3").unwrap().left, ratio(208, 10));
        assert_eq!(r.checks.iter().filter(|c| c.description.starts_with("a: (w_")).count(), 9);
        assert_eq!(r.checks.iter().filter(|c| c.description.starts_with("b: (w_")).count(), 9);
    }

    #[test]
    fn ties_go_to_the_higher_arm() {
        let w = values();
        let y = tenths([0, 0, 0, 0, 0]);
        assert_eq!(favourite(&w, &y, 3), 3);
    }
}
