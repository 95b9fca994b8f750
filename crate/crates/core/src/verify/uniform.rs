use num_traits::{One, Zero};

use super::{Cmp, VerificationReport};
use crate::dist::ValueDistribution;
use crate::lp::solve_reduced_uniform_lp;
use crate::scalar::{format_rational, ratio, Rational};

/// On four equally likely values `1/4, 1/2, 3/4, 1` with two buyers, the best pay-your-bid
/// uniform auction is beaten by a second-price auction with reserve 3/4, pair by pair.
pub fn verify_uniform_suboptimality() -> VerificationReport {
    let w: Vec<Rational> = (1..=4).map(|k| ratio(k, 4)).collect();
    let dist = ValueDistribution::uniform(w.clone()).expect("valid distribution");
    let mut r = VerificationReport::new("uniform_suboptimality");

    let lp = solve_reduced_uniform_lp(&dist, 2).expect("bounded LP");
    let target = [Rational::zero(), Rational::zero(), ratio(3, 4), ratio(3, 4)];
    for (j, (got, want)) in lp.x.iter().zip(&target).enumerate() {
        r.check(format!("uniform LP x_{}", j + 1), got.clone(), Cmp::Eq, want.clone());
    }
    r.check("uniform LP revenue per buyer", lp.objective.clone(), Cmp::Eq, ratio(9, 32));
    let uniform_total = lp.total_revenue(2);
    r.check("uniform LP total revenue", uniform_total.clone(), Cmp::Eq, ratio(9, 16));

    // The LP optimum is a constant reserve at the lowest value it sells to: every buyer at or
    // above it bids the reserve, and the winner pays it.
    let reserve = w[lp.x.iter().position(|x| !x.is_zero()).expect("the LP sells")].clone();
    r.note(format!("uniform auction reserve {}", format_rational(&reserve)));
    let pair_prob = ratio(1, 16);
    let (mut uniform_enum, mut spa) = (Rational::zero(), Rational::zero());
    let mut weakly = true;
    for a in &w {
        for b in &w {
            let hi = std::cmp::max(a, b).clone();
            let lo = std::cmp::min(a, b).clone();
            let u = if hi >= reserve { reserve.clone() } else { Rational::zero() };
            let s = if lo >= reserve {
                lo
            } else if hi >= reserve {
                reserve.clone()
            } else {
                Rational::zero()
            };
            weakly &= s >= u;
            uniform_enum += pair_prob.clone() * u;
            spa += pair_prob.clone() * s;
        }
    }
    r.check("uniform reserve revenue by enumeration", uniform_enum, Cmp::Eq, uniform_total.clone());
    r.check("second-price reserve 3/4 revenue", spa.clone(), Cmp::Eq, ratio(37, 64));
    r.check(
        "second price never earns less on any value pair (1 = yes)",
        if weakly { Rational::one() } else { Rational::zero() },
        Cmp::Eq,
        Rational::one(),
    );
    r.check("values (1, 1): second price beats uniform", Rational::one(), Cmp::Gt, reserve);
    r.check("second price beats the best uniform auction", spa, Cmp::Gt, uniform_total);
    r
}
