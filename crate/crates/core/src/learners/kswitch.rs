//! Meta-arms that switch arms at most `k` times, and exponential weights over them.

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest meta-arm set that will be enumerated explicitly.
pub const MAX_META_ARMS: u128 = 2_000_000;

/// Starts on `start`; from 1-based round `r` on pulls `arm` for each `(r, arm)` in `switches`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MetaArm {
    pub start: usize,
    pub switches: Vec<(usize, usize)>,
}

impl MetaArm {
    pub fn fixed(arm: usize) -> Self {
        Self { start: arm, switches: Vec::new() }
    }

    pub fn arm_at(&self, round: usize) -> usize {
        self.switches.iter().take_while(|(r, _)| *r <= round).last().map_or(self.start, |(_, a)| *a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MetaArmCount {
    pub count: u128,
    /// The true count exceeds `u128::MAX` and `count` is clamped.
    pub saturated: bool,
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n − i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of strategies over `m` arms and `horizon` rounds with at most `k` switches:
/// `Σ_{i≤k} m (m−1)^i C(T, i)`.
pub fn meta_arm_count(m: usize, horizon: usize, k: usize) -> Result<MetaArmCount> {
    if horizon == 0 || k > horizon - 1 {
        return Err(Error::Precondition(format!("k = {k} needs k <= T - 1 with T = {horizon}")));
    }
    let (m, t) = (m as u128, horizon as u128);
    let mut total: u128 = 0;
    for i in 0..=k as u32 {
        let term = (m.saturating_sub(1))
            .checked_pow(i)
            .and_then(|p| p.checked_mul(m))
            .and_then(|p| binomial(t, i as u128).and_then(|c| p.checked_mul(c)))
            .and_then(|p| total.checked_add(p));
        match term {
            Some(v) => total = v,
            None => return Ok(MetaArmCount { count: u128::MAX, saturated: true }),
        }
    }
    Ok(MetaArmCount { count: total, saturated: false })
}

/// Every meta-arm counted by [`meta_arm_count`], ordered by number of switches.
pub fn enumerate_meta_arms(m: usize, horizon: usize, k: usize) -> Result<Vec<MetaArm>> {
    let count = meta_arm_count(m, horizon, k)?;
    if count.saturated || count.count > MAX_META_ARMS {
        return Err(Error::TooLarge(format!("{} meta-arms", count.count)));
    }
    let mut out = Vec::with_capacity(count.count as usize);
    for switches in 0..=k {
        for start in 0..m {
            extend(&mut out, MetaArm::fixed(start), switches, 1, m, horizon);
        }
    }
    Ok(out)
}

fn extend(out: &mut Vec<MetaArm>, prefix: MetaArm, left: usize, first_round: usize, m: usize, horizon: usize) {
    if left == 0 {
        out.push(prefix);
        return;
    }
    let current = prefix.switches.last().map_or(prefix.start, |(_, a)| *a);
    for round in first_round..=horizon {
        for arm in (0..m).filter(|&a| a != current) {
            let mut next = prefix.clone();
            next.switches.push((round, arm));
            extend(out, next, left - 1, round + 1, m, horizon);
        }
    }
}

/// Exponential weights over all meta-arms with at most `k` switches.
#[derive(Clone, Debug)]
pub struct KSwitch {
    metas: Vec<MetaArm>,
    cumulative: Vec<f64>,
    rate: f64,
    probs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KSwitchReplay {
    /// Expected total reward of the learner's selection distributions.
    pub learner: f64,
    pub best_meta: f64,
    pub best_fixed: f64,
}

impl KSwitchReplay {
    pub fn regret(&self) -> f64 {
        self.best_meta - self.learner
    }
}

impl KSwitch {
    /// Rate that balances the exponential-weights regret terms: `sqrt(k ln(Tm) / T)`.
    pub fn default_rate(m: usize, horizon: usize, k: usize) -> f64 {
        ((k.max(1) as f64 * (horizon as f64 * m as f64).ln()) / horizon as f64).sqrt()
    }

    pub fn new(m: usize, horizon: usize, k: usize, rate: f64) -> Result<Self> {
        let metas = enumerate_meta_arms(m, horizon, k)?;
        let n = metas.len();
        Ok(Self { metas, cumulative: vec![0.0; n], rate, probs: Vec::with_capacity(n) })
    }

    pub fn metas(&self) -> &[MetaArm] {
        &self.metas
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    fn distribution(&mut self) {
        let top = self.cumulative.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.probs.clear();
        self.probs.extend(self.cumulative.iter().map(|c| (self.rate * (c - top)).exp()));
        let total: f64 = self.probs.iter().sum();
        self.probs.iter_mut().for_each(|p| *p /= total);
    }

    /// Arm pulled at 1-based `round` by a meta-arm drawn from the current weights.
    pub fn select(&self, round: usize, rng: &mut dyn RngCore) -> usize {
        let top = self.cumulative.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = self.cumulative.iter().map(|c| (self.rate * (c - top)).exp()).sum();
        let mut u = rng.gen::<f64>() * total;
        for (meta, c) in self.metas.iter().zip(&self.cumulative) {
            let w = (self.rate * (c - top)).exp();
            if u < w {
                return meta.arm_at(round);
            }
            u -= w;
        }
        self.metas.last().map_or(0, |m| m.arm_at(round))
    }

    pub fn observe(&mut self, round: usize, rewards: &[f64]) {
        for (meta, c) in self.metas.iter().zip(self.cumulative.iter_mut()) {
            *c += rewards[meta.arm_at(round)];
        }
    }

    /// Runs the learner on `rewards[t][arm]` and compares with the best meta-arm in hindsight.
    pub fn replay(&mut self, rewards: &[Vec<f64>]) -> KSwitchReplay {
        let mut learner = 0.0;
        for (t, r) in rewards.iter().enumerate() {
            let round = t + 1;
            self.distribution();
            learner += self.metas.iter().zip(&self.probs).map(|(m, p)| p * r[m.arm_at(round)]).sum::<f64>();
            self.observe(round, r);
        }
        let best_meta = self.cumulative.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let best_fixed = self
            .metas
            .iter()
            .zip(&self.cumulative)
            .filter(|(m, _)| m.switches.is_empty())
            .map(|(_, c)| *c)
            .fold(f64::NEG_INFINITY, f64::max);
        KSwitchReplay { learner, best_meta, best_fixed }
    }
}
