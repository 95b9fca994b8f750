//! Mechanisms whose arms are plain bids: second price with reserve, pay-your-bid uniform
//! auctions with a per-round reserve, and the auction that never sells.

use rand::RngCore;

use super::{uniform_index, Interim, Mechanism, RoundOutcome};
use crate::error::{Error, Result};

fn check_labels(labels: &[f64]) -> Result<()> {
    if labels.first() != Some(&0.0) {
        return Err(Error::Config("arm 0 must be the null arm labeled 0".into()));
    }
    if labels[1..].iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::Config("bid labels must be positive and finite".into()));
    }
    if labels[1..].windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("bid labels must be strictly increasing".into()));
    }
    Ok(())
}

/// Highest bid among `bids` at or above `floor`, with its multiplicity.
fn top_qualifying(bids: impl Iterator<Item = Option<f64>>, floor: f64) -> (Option<f64>, usize) {
    let mut top = None;
    let mut count = 0;
    for b in bids.flatten().filter(|b| *b >= floor) {
        match top {
            Some(t) if b < t => {}
            Some(t) if b == t => count += 1,
            _ => {
                top = Some(b);
                count = 1;
            }
        }
    }
    (top, count)
}

/// Second price with a reserve: the highest bid at or above the reserve wins (uniform among
/// ties) and pays the larger of the reserve and the highest competing qualifying bid.
pub fn spa_reserve_round(reserve: f64, bids: &[Option<f64>], epsilon: f64, rng: &mut dyn RngCore) -> RoundOutcome {
    let mut out = RoundOutcome::empty(bids.len());
    out.submitted_bids = bids.to_vec();
    let (Some(top), _) = top_qualifying(bids.iter().copied(), reserve) else {
        return out;
    };
    let tied: Vec<usize> = (0..bids.len()).filter(|&i| bids[i] == Some(top)).collect();
    let winner = tied[uniform_index(rng, tied.len())];
    let (second, _) = top_qualifying(bids.iter().enumerate().filter(|(i, _)| *i != winner).map(|(_, b)| *b), reserve);
    let price = second.map_or(reserve, |s| s.max(reserve));
    out.winner = Some(winner);
    out.allocation[winner] = 1.0;
    out.payments[winner] = (price - epsilon).max(0.0);
    out
}

/// Pay-your-bid with a reserve: a uniformly random bidder at or above the reserve wins and
/// pays their bid. `reserve = None` means nothing is sold.
pub fn uniform_pay_bid_round(
    reserve: Option<f64>,
    bids: &[Option<f64>],
    epsilon: f64,
    rng: &mut dyn RngCore,
) -> RoundOutcome {
    let mut out = RoundOutcome::empty(bids.len());
    out.submitted_bids = bids.to_vec();
    let Some(r) = reserve else {
        return out;
    };
    let eligible: Vec<usize> = (0..bids.len()).filter(|&i| bids[i].is_some_and(|b| b >= r)).collect();
    if eligible.is_empty() {
        return out;
    }
    let winner = eligible[uniform_index(rng, eligible.len())];
    out.winner = Some(winner);
    out.allocation[winner] = 1.0;
    out.payments[winner] = (bids[winner].unwrap_or(0.0) - epsilon).max(0.0);
    out
}

fn bids_of(labels: &[f64], arms: &[usize]) -> Vec<Option<f64>> {
    arms.iter().map(|&a| if a == 0 { None } else { Some(labels[a]) }).collect()
}

#[derive(Clone, Debug)]
pub struct SpaReserve {
    labels: Vec<f64>,
    reserve: f64,
    epsilon: f64,
}

impl SpaReserve {
    pub fn new(labels: Vec<f64>, reserve: f64, epsilon: f64) -> Result<Self> {
        check_labels(&labels)?;
        Ok(Self { labels, reserve, epsilon })
    }
}

impl Mechanism for SpaReserve {
    fn num_arms(&self) -> usize {
        self.labels.len()
    }

    fn label(&self, arm: usize) -> f64 {
        self.labels[arm]
    }

    fn payment_bound(&self) -> f64 {
        *self.labels.last().unwrap()
    }

    fn interim_all(&self, _round: usize, others: &[usize], out: &mut Vec<Interim>) {
        out.clear();
        let (top, count) = top_qualifying(bids_of(&self.labels, others).into_iter(), self.reserve);
        out.extend(self.labels.iter().enumerate().map(|(arm, &b)| {
            if arm == 0 || b < self.reserve {
                return Interim::default();
            }
            let (alloc, price) = match top {
                Some(t) if b < t => (0.0, 0.0),
                Some(t) if b == t => (1.0 / (count + 1) as f64, b),
                Some(t) => (1.0, t.max(self.reserve)),
                None => (1.0, self.reserve),
            };
            Interim { alloc, pay: alloc * (price - self.epsilon).max(0.0) }
        }));
    }

    fn resolve(&self, _round: usize, arms: &[usize], rng: &mut dyn RngCore) -> RoundOutcome {
        spa_reserve_round(self.reserve, &bids_of(&self.labels, arms), self.epsilon, rng)
    }

    fn name(&self) -> &'static str {
        "spa_reserve"
    }
}

#[derive(Clone, Debug)]
pub struct UniformPayBid {
    labels: Vec<f64>,
    schedule: Vec<Option<f64>>,
    epsilon: f64,
}

impl UniformPayBid {
    /// `schedule[t]` is the reserve of round `t`; it must be nonincreasing, with `None` (no sale)
    /// counting as an infinite reserve.
    pub fn new(labels: Vec<f64>, schedule: Vec<Option<f64>>, epsilon: f64) -> Result<Self> {
        check_labels(&labels)?;
        let key = |r: &Option<f64>| r.unwrap_or(f64::INFINITY);
        if schedule.windows(2).any(|w| key(&w[1]) > key(&w[0])) {
            return Err(Error::Config("reserve schedule must be nonincreasing".into()));
        }
        Ok(Self { labels, schedule, epsilon })
    }

    pub fn constant(labels: Vec<f64>, reserve: f64, horizon: usize, epsilon: f64) -> Result<Self> {
        Self::new(labels, vec![Some(reserve); horizon], epsilon)
    }

    pub fn reserve(&self, round: usize) -> Option<f64> {
        self.schedule.get(round).copied().flatten()
    }

    pub fn schedule(&self) -> &[Option<f64>] {
        &self.schedule
    }
}

impl Mechanism for UniformPayBid {
    fn num_arms(&self) -> usize {
        self.labels.len()
    }

    fn label(&self, arm: usize) -> f64 {
        self.labels[arm]
    }

    fn payment_bound(&self) -> f64 {
        *self.labels.last().unwrap()
    }

    fn interim_all(&self, round: usize, others: &[usize], out: &mut Vec<Interim>) {
        out.clear();
        let Some(r) = self.reserve(round) else {
            out.resize(self.labels.len(), Interim::default());
            return;
        };
        let rivals = others.iter().filter(|&&a| a != 0 && self.labels[a] >= r).count();
        out.extend(self.labels.iter().enumerate().map(|(arm, &b)| {
            if arm == 0 || b < r {
                Interim::default()
            } else {
                let alloc = 1.0 / (rivals + 1) as f64;
                Interim { alloc, pay: alloc * (b - self.epsilon).max(0.0) }
            }
        }));
    }

    fn resolve(&self, round: usize, arms: &[usize], rng: &mut dyn RngCore) -> RoundOutcome {
        uniform_pay_bid_round(self.reserve(round), &bids_of(&self.labels, arms), self.epsilon, rng)
    }

    fn name(&self) -> &'static str {
        "uniform_declining"
    }
}

#[derive(Clone, Debug)]
pub struct NullAuction {
    labels: Vec<f64>,
}

impl NullAuction {
    pub fn new(labels: Vec<f64>) -> Result<Self> {
        check_labels(&labels)?;
        Ok(Self { labels })
    }
}

impl Mechanism for NullAuction {
    fn num_arms(&self) -> usize {
        self.labels.len()
    }

    fn label(&self, arm: usize) -> f64 {
        self.labels[arm]
    }

    fn payment_bound(&self) -> f64 {
        0.0
    }

    fn interim_all(&self, _round: usize, _others: &[usize], out: &mut Vec<Interim>) {
        out.clear();
        out.resize(self.labels.len(), Interim::default());
    }

    fn resolve(&self, _round: usize, arms: &[usize], _rng: &mut dyn RngCore) -> RoundOutcome {
        let mut out = RoundOutcome::empty(arms.len());
        out.submitted_bids = bids_of(&self.labels, arms);
        out
    }

    fn name(&self) -> &'static str {
        "null"
    }
}
