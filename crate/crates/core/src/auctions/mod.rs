//! Round-level auction mechanisms over a finite arm set.
//!
//! Arm 0 is always the null arm: it never enters the auction. A mechanism reports, for a fixed
//! profile of opponent arms, the expected allocation and expected payment of every own arm
//! (its interim outcome) and resolves realized rounds with a caller-provided random source.

mod fse;
mod schedule;
mod simple;

pub use fse::{ArmStatus, Fse};
pub use schedule::reserve_schedule_from_lp;
pub use simple::{NullAuction, SpaReserve, UniformPayBid};

use rand::RngCore;
use serde::Serialize;

/// Expected allocation probability and expected payment of one arm.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Interim {
    pub alloc: f64,
    pub pay: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundOutcome {
    pub winner: Option<usize>,
    /// Realized allocation indicator per buyer.
    pub allocation: Vec<f64>,
    pub payments: Vec<f64>,
    /// Bid each buyer submitted to the auction, `None` for arms that do not participate.
    pub submitted_bids: Vec<Option<f64>>,
}

impl RoundOutcome {
    pub fn empty(n: usize) -> Self {
        Self { winner: None, allocation: vec![0.0; n], payments: vec![0.0; n], submitted_bids: vec![None; n] }
    }

    pub fn revenue(&self) -> f64 {
        self.payments.iter().sum()
    }
}

pub trait Mechanism: Send + Sync {
    fn num_arms(&self) -> usize;

    /// Bid label of an arm; the null arm is labeled 0.
    fn label(&self, arm: usize) -> f64;

    /// Largest payment any buyer can be charged in one round.
    fn payment_bound(&self) -> f64;

    /// Interim outcome of every own arm at `round` against the opponents' arms.
    fn interim_all(&self, round: usize, others: &[usize], out: &mut Vec<Interim>);

    fn resolve(&self, round: usize, arms: &[usize], rng: &mut dyn RngCore) -> RoundOutcome;

    fn name(&self) -> &'static str;
}

/// Uniform index in `0..k` from a raw random source.
pub(crate) fn uniform_index(rng: &mut dyn RngCore, k: usize) -> usize {
    use rand::Rng;
    rng.gen_range(0..k)
}

pub(crate) fn coin(rng: &mut dyn RngCore, p: f64) -> bool {
    use rand::Rng;
    p >= 1.0 || rng.gen::<f64>() < p
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityWitness {
    pub others: Vec<usize>,
    pub arm: usize,
    pub quantity: &'static str,
    pub lower: f64,
    pub higher: f64,
}

/// Checks that expected allocation and payment are nondecreasing in the own arm index at
/// `round`, for every opponent profile of `n − 1` arms. Returns the first violation.
pub fn monotonicity_audit(mech: &dyn Mechanism, round: usize, n: usize) -> Result<(), MonotonicityWitness> {
    let k = mech.num_arms();
    let mut others = vec![0usize; n.saturating_sub(1)];
    let mut out = Vec::with_capacity(k);
    loop {
        mech.interim_all(round, &others, &mut out);
        for arm in 1..k {
            let (lo, hi) = (out[arm - 1], out[arm]);
            let tol = 1e-12 * (1.0 + mech.payment_bound());
            if hi.alloc < lo.alloc - tol {
                return Err(MonotonicityWitness { others, arm, quantity: "allocation", lower: lo.alloc, higher: hi.alloc });
            }
            if hi.pay < lo.pay - tol {
                return Err(MonotonicityWitness { others, arm, quantity: "payment", lower: lo.pay, higher: hi.pay });
            }
        }
        // Next opponent profile in lexicographic order.
        let mut pos = 0;
        loop {
            if pos == others.len() {
                return Ok(());
            }
            others[pos] += 1;
            if others[pos] < k {
                break;
            }
            others[pos] = 0;
            pos += 1;
        }
    }
}
