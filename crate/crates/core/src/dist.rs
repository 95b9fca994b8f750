//! Finite value distributions.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational, Scalar};

/// Finite support `w_1 < ... < w_m` with positive probabilities `q_j`.
///
/// Indices are 0-based throughout the crate: `value(0)` is the lowest support point.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueDistribution<T = f64> {
    support: Vec<T>,
    probs: Vec<T>,
}

const FLOAT_SUM_TOL: f64 = 1e-12;

impl<T: Scalar> ValueDistribution<T> {
    pub fn new(support: Vec<T>, probs: Vec<T>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        if support.is_empty() {
            return bad("empty support".into());
        }
        if support.len() != probs.len() {
            return bad(format!("{} support points but {} probabilities", support.len(), probs.len()));
        }
        if support[0] < T::zero() {
            return bad("negative value".into());
        }
        if let Some(j) = (1..support.len()).find(|&j| support[j] <= support[j - 1]) {
            return bad(format!("support not strictly increasing at index {j}"));
        }
        if let Some(j) = probs.iter().position(|p| *p <= T::zero()) {
            return bad(format!("probability at index {j} is not positive"));
        }
        let total = probs.iter().fold(T::zero(), |acc, p| acc + p.clone());
        let ok = if T::EXACT {
            total == T::one()
        } else {
            (total.as_f64() - 1.0).abs() <= FLOAT_SUM_TOL
        };
        if !ok {
            return bad(format!("probabilities sum to {:?}", total));
        }
        Ok(Self { support, probs })
    }

    pub fn uniform(support: Vec<T>) -> Result<Self> {
        let m = support.len().max(1);
        let probs = vec![T::from_ratio(1, m as i64); support.len()];
        Self::new(support, probs)
    }

    pub fn point_mass(value: T) -> Result<Self> {
        Self::new(vec![value], vec![T::one()])
    }

    pub fn m(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn value(&self, j: usize) -> &T {
        &self.support[j]
    }

    pub fn prob(&self, j: usize) -> &T {
        &self.probs[j]
    }

    pub fn max_value(&self) -> &T {
        &self.support[self.m() - 1]
    }

    /// `F(w_j)`, the mass at or below index `j`.
    pub fn cdf(&self, j: usize) -> T {
        if j + 1 == self.m() {
            return T::one();
        }
        self.probs[..=j].iter().fold(T::zero(), |a, p| a + p.clone())
    }

    /// `F(w_{j-1})`, the mass strictly below index `j`.
    pub fn cdf_below(&self, j: usize) -> T {
        if j == 0 {
            T::zero()
        } else {
            self.cdf(j - 1)
        }
    }

    /// Mass at or above index `j`.
    pub fn tail(&self, j: usize) -> T {
        if j == 0 {
            return T::one();
        }
        self.probs[j..].iter().fold(T::zero(), |a, p| a + p.clone())
    }

    pub fn mean(&self) -> T {
        self.support
            .iter()
            .zip(&self.probs)
            .fold(T::zero(), |a, (w, q)| a + w.clone() * q.clone())
    }

    pub fn index_of(&self, value: &T) -> Option<usize> {
        self.support.iter().position(|w| w.approx_eq(value))
    }

    /// Smallest gap between consecutive support points (zero when `m = 1`).
    pub fn min_gap(&self) -> T {
        (1..self.m())
            .map(|j| self.support[j].clone() - self.support[j - 1].clone())
            .reduce(T::min_of)
            .unwrap_or_else(T::zero)
    }

    pub fn to_f64(&self) -> ValueDistribution<f64> {
        ValueDistribution {
            support: self.support.iter().map(Scalar::as_f64).collect(),
            probs: self.probs.iter().map(Scalar::as_f64).collect(),
        }
    }

    /// Exact copy; float entries are read through their shortest decimal form.
    pub fn to_rational(&self) -> Result<ValueDistribution<Rational>> {
        ValueDistribution::new(
            self.support.iter().map(Scalar::to_rational).collect(),
            self.probs.iter().map(Scalar::to_rational).collect(),
        )
    }

    /// Reads `{"support": [...], "probs": [...]}`; entries may be numbers or strings such as `"1/4"`.
    pub fn from_json(doc: &Value) -> Result<Self> {
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::InvalidDistribution("expected a JSON object".into()))?;
        if let Some(key) = obj.keys().find(|k| *k != "support" && *k != "probs") {
            return Err(Error::InvalidDistribution(format!("unknown key {key:?}")));
        }
        let read = |key: &str| -> Result<Vec<T>> {
            let arr = obj
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidDistribution(format!("missing array {key:?}")))?;
            arr.iter()
                .map(|v| json_number(v).map(|r| T::from_rational(&r)))
                .collect()
        };
        Self::new(read("support")?, read("probs")?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Self::from_json(&doc)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "support": self.support.iter().map(Scalar::as_f64).collect::<Vec<_>>(),
            "probs": self.probs.iter().map(Scalar::as_f64).collect::<Vec<_>>(),
        })
    }
}

/// A JSON number or numeric string as an exact rational.
pub fn json_number(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn quarters() -> ValueDistribution<Rational> {
        ValueDistribution::uniform(vec![ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(1, 1)]).unwrap()
    }

    #[test]
    fn rejects_invalid() {
        assert!(ValueDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(ValueDistribution::new(vec![1.0, 2.0], vec![0.0, 1.0]).is_err());
        assert!(ValueDistribution::new(vec![1.0, 2.0], vec![0.5, 0.4]).is_err());
        assert!(ValueDistribution::<f64>::new(vec![], vec![]).is_err());
        assert!(ValueDistribution::new(vec![-1.0], vec![1.0]).is_err());
        assert!(ValueDistribution::new(vec![ratio(1, 3)], vec![ratio(999, 1000)]).is_err());
    }

    #[test]
    fn cdf_and_tail() {
        let d = quarters();
        assert_eq!(d.cdf(1), ratio(1, 2));
        assert_eq!(d.cdf_below(0), ratio(0, 1));
        assert_eq!(d.tail(2), ratio(1, 2));
        assert_eq!(d.tail(0), ratio(1, 1));
        assert_eq!(d.mean(), ratio(5, 8));
        assert_eq!(d.min_gap(), ratio(1, 4));
    }

    #[test]
    fn json_round_trip() {
        let d = ValueDistribution::<Rational>::from_json_str(r#"{"support": [0.25, "1/2", 0.75, 1], "probs": [0.25, 0.25, 0.25, "1/4"]}"#).unwrap();
        assert_eq!(d, quarters());
        let back = ValueDistribution::<f64>::from_json(&d.to_json()).unwrap();
        assert_eq!(back.support(), &[0.25, 0.5, 0.75, 1.0]);
        assert!(ValueDistribution::<f64>::from_json_str(r#"{"support": [1], "probs": [1], "x": 0}"#).is_err());
    }
}
