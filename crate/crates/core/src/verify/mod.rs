//! Exact-arithmetic checks of the multi-buyer counterexamples.
//!
//! Every check compares two rationals with a fixed relation; a report passes only if all of
//! its checks hold. Anything informational that is not a pass/fail condition goes to `notes`.

mod bmsw;
mod counterexample;
mod nonconvex;
mod uniform;

pub use bmsw::verify_bmsw_necessity;
pub use counterexample::verify_counterexample;
pub use nonconvex::verify_nonconvexity;
pub use uniform::verify_uniform_suboptimality;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Cmp {
    pub fn eval(self, left: &Rational, right: &Rational) -> bool {
        match self {
            Cmp::Lt => left < right,
            Cmp::Le => left <= right,
            Cmp::Eq => left == right,
            Cmp::Ge => left >= right,
            Cmp::Gt => left > right,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

fn as_fraction<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub description: String,
    #[serde(serialize_with = "as_fraction")]
    pub left: Rational,
    pub relation: Cmp,
    #[serde(serialize_with = "as_fraction")]
    pub right: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub claim: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(claim: &str) -> Self {
        Self { claim: claim.to_string(), checks: Vec::new(), notes: Vec::new(), pass: true }
    }

    pub fn check(&mut self, description: impl Into<String>, left: Rational, relation: Cmp, right: Rational) -> bool {
        let holds = relation.eval(&left, &right);
        self.pass &= holds;
        self.checks.push(Check { description: description.into(), left, relation, right, holds });
        holds
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn find(&self, description: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.description == description)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.claim, if self.pass { "PASS" } else { "FAIL" })?;
        let width = self.checks.iter().map(|c| c.description.len()).max().unwrap_or(0);
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:width$}  {} {} {}",
                if c.holds { "ok" } else { "no" },
                c.description,
                format_rational(&c.left),
                c.relation.symbol(),
                format_rational(&c.right),
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Ceiling on the win probability of a buyer whose value lies in a set `S` of mass `q(S)`, when
/// every value in `S` must submit the same bid: `(1 − (1 − q(S))^n) / (n q(S))`.
pub fn same_bid_alloc_bound(q_s: &Rational, n: usize) -> Result<Rational> {
    if *q_s <= Rational::zero() || *q_s > Rational::one() || n == 0 {
        return Err(Error::Precondition("need 0 < q(S) <= 1 and n >= 1".into()));
    }
    let n_r = Rational::from_usize(n);
    Ok((Rational::one() - (Rational::one() - q_s.clone()).powu(n)) / (n_r * q_s.clone()))
}

use num_traits::{One, Zero};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn same_bid_bounds() {
        assert_eq!(same_bid_alloc_bound(&ratio(2, 5), 2).unwrap(), ratio(4, 5));
        assert_eq!(same_bid_alloc_bound(&ratio(1, 5), 2).unwrap(), ratio(9, 10));
        for n in 1..6 {
            assert_eq!(same_bid_alloc_bound(&ratio(1, 1), n).unwrap(), ratio(1, n as i64));
        }
        assert!(same_bid_alloc_bound(&ratio(0, 1), 2).is_err());
        assert!(same_bid_alloc_bound(&ratio(3, 2), 2).is_err());
    }

    #[test]
    fn report_rendering() {
        let mut r = VerificationReport::new("demo");
        assert!(r.check("a", ratio(1, 2), Cmp::Lt, ratio(2, 3)));
        assert!(!r.check("b", ratio(1, 2), Cmp::Gt, ratio(1, 2)));
        assert!(!r.pass);
        let text = r.to_string();
        assert!(text.contains("[no] b  1/2 > 1/2"));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["checks"][0]["left"], "1/2");
        assert_eq!(json["checks"][0]["relation"], "<");
    }
}
