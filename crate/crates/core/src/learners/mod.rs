//! Contextual no-regret bidders.
//!
//! A learner keeps one vector of cumulative (normalized) rewards per support value and picks
//! an arm for the value it holds this round. Rewards for every arm and every value arrive after
//! each round (experts feedback); under bandit feedback only the pulled arm's reward is seen.

mod audit;
mod kswitch;

pub use audit::{mean_based_audit, regret, MeanBasedReport};
pub use kswitch::{enumerate_meta_arms, meta_arm_count, KSwitch, MetaArm, MetaArmCount};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    /// Multiplicative weights (exponential weights on cumulative reward).
    Mw,
    /// Follow the leader, ties to the highest arm.
    Ftl,
    /// Follow the perturbed leader with fresh exponential noise each round.
    Ftpl,
    /// Scripted: always pulls the FSE intended arm.
    Intended,
    /// Scripted: bids the arm labeled with its value (or the highest arm below it).
    Truthful,
    /// Scripted: always pulls an arm of lowest cumulative reward. Not mean-based.
    Worst,
}

impl LearnerKind {
    pub fn is_scripted(self) -> bool {
        matches!(self, Self::Intended | Self::Truthful | Self::Worst)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedback {
    #[default]
    Experts,
    Bandit,
}

fn default_eta() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    #[serde(rename = "type")]
    pub kind: LearnerKind,
    #[serde(default)]
    pub clever: bool,
    /// Mean-based parameter used by audits; `None` means `T^{-1/4}`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Rate on normalized rewards; `None` means `sqrt(ln K / T)`.
    #[serde(default)]
    pub learning_rate: Option<f64>,
    #[serde(default = "default_eta")]
    pub recency_eta: f64,
    #[serde(default)]
    pub k_switch: Option<usize>,
    #[serde(default)]
    pub feedback: Feedback,
}

impl LearnerConfig {
    pub fn new(kind: LearnerKind) -> Self {
        Self { kind, clever: false, gamma: None, learning_rate: None, recency_eta: 1.0, k_switch: None, feedback: Feedback::Experts }
    }

    pub fn mw(learning_rate: f64) -> Self {
        Self { learning_rate: Some(learning_rate), ..Self::new(LearnerKind::Mw) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.recency_eta.is_finite() && self.recency_eta >= 1.0) {
            return Err(Error::Config(format!("recency_eta must be >= 1, got {}", self.recency_eta)));
        }
        if let Some(r) = self.learning_rate {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!("learning_rate must be positive, got {r}")));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::Config(format!("gamma must lie in (0, 1], got {g}")));
            }
        }
        if self.kind.is_scripted() && (self.k_switch.is_some() || self.feedback == Feedback::Bandit) {
            return Err(Error::Config("scripted buyers take no learning options".into()));
        }
        if self.k_switch.is_some() && self.kind != LearnerKind::Mw {
            return Err(Error::Config("k_switch wraps multiplicative weights only".into()));
        }
        if self.k_switch.is_some() && self.feedback == Feedback::Bandit {
            return Err(Error::Config("k_switch needs experts feedback".into()));
        }
        Ok(())
    }

    pub fn gamma_for(&self, horizon: usize) -> f64 {
        self.gamma.unwrap_or_else(|| (horizon.max(1) as f64).powf(-0.25))
    }

    pub fn rate_for(&self, arms: usize, horizon: usize) -> f64 {
        self.learning_rate.unwrap_or_else(|| ((arms.max(2) as f64).ln() / horizon.max(1) as f64).sqrt())
    }
}

/// Arms whose label does not exceed `value`; the null arm always qualifies.
pub fn clever_mask(labels: &[f64], value: f64) -> Vec<bool> {
    labels.iter().enumerate().map(|(a, &l)| a == 0 || l <= value).collect()
}

/// Index drawn from `exp(rate * (s − max))` over the unmasked entries, written into `probs`.
fn softmax_into(sigma: &[f64], mask: &[bool], rate: f64, probs: &mut Vec<f64>) {
    let top = sigma.iter().zip(mask).filter(|(_, &m)| m).map(|(s, _)| *s).fold(f64::NEG_INFINITY, f64::max);
    probs.clear();
    probs.extend(sigma.iter().zip(mask).map(|(s, &m)| if m { (rate * (s - top)).exp() } else { 0.0 }));
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
}

fn sample(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let mut u: f64 = rng.gen();
    for (i, p) in probs.iter().enumerate() {
        if u < *p {
            return i;
        }
        u -= p;
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

fn argmax_highest(sigma: &[f64], mask: &[bool]) -> usize {
    let mut best = 0;
    for a in 0..sigma.len() {
        if mask[a] && sigma[a] >= sigma[best] {
            best = a;
        }
    }
    best
}

/// Per-buyer learning state over a fixed arm set and a fixed list of context values.
#[derive(Clone, Debug)]
pub struct LearnerState {
    kind: LearnerKind,
    feedback: Feedback,
    rate: f64,
    eta: f64,
    horizon: usize,
    labels: Vec<f64>,
    masks: Vec<Vec<bool>>,
    sigma: Vec<Vec<f64>>,
    round: usize,
    probs: Vec<f64>,
    last: Option<(usize, usize, f64)>,
    kswitch: Option<Vec<KSwitch>>,
}

impl LearnerState {
    pub fn new(config: &LearnerConfig, labels: &[f64], values: &[f64], horizon: usize) -> Result<Self> {
        config.validate()?;
        if config.kind.is_scripted() {
            return Err(Error::Config(format!("{:?} is scripted, not a learner", config.kind)));
        }
        if labels.first() != Some(&0.0) || labels[1..].iter().any(|l| *l <= 0.0) {
            return Err(Error::Config("arm set needs exactly one null arm labeled 0 first".into()));
        }
        let k = labels.len();
        let masks: Vec<Vec<bool>> = values
            .iter()
            .map(|&v| if config.clever { clever_mask(labels, v) } else { vec![true; k] })
            .collect();
        let kswitch = match config.k_switch {
            None => None,
            Some(kk) => {
                let rate = config.learning_rate.unwrap_or_else(|| KSwitch::default_rate(k, horizon, kk));
                let proto = KSwitch::new(k, horizon, kk, rate)?;
                Some(vec![proto; values.len()])
            }
        };
        Ok(Self {
            kind: config.kind,
            feedback: config.feedback,
            rate: config.rate_for(k, horizon),
            eta: config.recency_eta,
            horizon,
            labels: labels.to_vec(),
            masks,
            sigma: vec![vec![0.0; k]; values.len()],
            round: 0,
            probs: Vec::with_capacity(k),
            last: None,
            kswitch,
        })
    }

    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Rounds observed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn learning_rate(&self) -> f64 {
        self.rate
    }

    /// Cumulative (recency-scaled) normalized reward of every arm for context `ctx`.
    pub fn sigma(&self, ctx: usize) -> &[f64] {
        &self.sigma[ctx]
    }

    pub fn mask(&self, ctx: usize) -> &[bool] {
        &self.masks[ctx]
    }

    /// Gap between the best selectable arm and `arm` in cumulative reward.
    pub fn gap(&self, ctx: usize, arm: usize) -> f64 {
        let s = &self.sigma[ctx];
        let best = s.iter().zip(&self.masks[ctx]).filter(|(_, &m)| m).map(|(x, _)| *x).fold(f64::NEG_INFINITY, f64::max);
        best - s[arm]
    }

    /// Selection distribution for `ctx` under multiplicative weights (or its bandit variant).
    pub fn probabilities(&self, ctx: usize) -> Vec<f64> {
        let mut p = Vec::new();
        self.probabilities_into(ctx, &mut p);
        p
    }

    fn probabilities_into(&self, ctx: usize, out: &mut Vec<f64>) {
        softmax_into(&self.sigma[ctx], &self.masks[ctx], self.rate, out);
        if self.feedback == Feedback::Bandit {
            let allowed = self.masks[ctx].iter().filter(|m| **m).count() as f64;
            let mix = self.exploration();
            for (p, &m) in out.iter_mut().zip(&self.masks[ctx]) {
                *p = (1.0 - mix) * *p + if m { mix / allowed } else { 0.0 };
            }
        }
    }

    fn exploration(&self) -> f64 {
        (self.rate * self.labels.len() as f64).min(0.5)
    }

    /// Arm for the buyer holding context `ctx` in the next round.
    pub fn select_arm(&mut self, ctx: usize, rng: &mut dyn RngCore) -> usize {
        if let Some(ks) = &self.kswitch {
            let arm = ks[ctx].select(self.round + 1, rng);
            // Overbid arms stay masked: fall back to the null arm.
            return if self.masks[ctx][arm] { arm } else { 0 };
        }
        let arm = match self.kind {
            LearnerKind::Ftl => argmax_highest(&self.sigma[ctx], &self.masks[ctx]),
            LearnerKind::Ftpl => {
                let scale = 1.0 / self.rate;
                let mut best = 0;
                let mut best_score = f64::NEG_INFINITY;
                for (a, s) in self.sigma[ctx].iter().enumerate() {
                    if !self.masks[ctx][a] {
                        continue;
                    }
                    let noise = -(1.0 - rng.gen::<f64>()).ln();
                    let score = s + scale * noise;
                    if score >= best_score {
                        best = a;
                        best_score = score;
                    }
                }
                best
            }
            _ => {
                let mut probs = std::mem::take(&mut self.probs);
                self.probabilities_into(ctx, &mut probs);
                let arm = sample(&probs, rng);
                self.last = Some((ctx, arm, probs[arm]));
                self.probs = probs;
                arm
            }
        };
        arm
    }

    /// Recency factor applied to the rewards of the round being observed.
    fn scale(&self) -> f64 {
        if self.eta == 1.0 {
            1.0
        } else {
            ((self.round + 1) as f64 * self.eta.ln()).exp()
        }
    }

    /// Full-information update: `rewards[ctx][arm]` for every context and arm, normalized.
    pub fn observe(&mut self, rewards: &[Vec<f64>]) -> Result<()> {
        if rewards.len() != self.sigma.len() {
            return Err(Error::LengthMismatch { expected: self.sigma.len(), got: rewards.len() });
        }
        if let Some(r) = rewards.iter().find(|r| r.len() != self.labels.len()) {
            return Err(Error::LengthMismatch { expected: self.labels.len(), got: r.len() });
        }
        if self.feedback == Feedback::Bandit {
            return Err(Error::Unsupported("bandit learners observe only the pulled arm".into()));
        }
        let scale = self.scale();
        for (sig, r) in self.sigma.iter_mut().zip(rewards) {
            for (s, x) in sig.iter_mut().zip(r) {
                *s += scale * x;
            }
        }
        if let Some(ks) = &mut self.kswitch {
            for (k, r) in ks.iter_mut().zip(rewards) {
                k.observe(self.round + 1, &r.iter().map(|x| scale * x).collect::<Vec<_>>());
            }
        }
        self.round += 1;
        Ok(())
    }

    /// Bandit update with the pulled arm's normalized reward, importance weighted (EXP3).
    pub fn observe_bandit(&mut self, reward: f64) -> Result<()> {
        let Some((ctx, arm, p)) = self.last.take() else {
            return Err(Error::Precondition("observe_bandit without a preceding selection".into()));
        };
        if self.feedback != Feedback::Bandit {
            return Err(Error::Unsupported("experts learners need the full reward table".into()));
        }
        // Gains in [0, 1] keep the estimate bounded below.
        let gain = (reward + 1.0) / 2.0;
        self.sigma[ctx][arm] += self.scale() * gain / p;
        self.round += 1;
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn learner(kind: LearnerKind, labels: &[f64], values: &[f64], horizon: usize) -> LearnerState {
        LearnerState::new(&LearnerConfig::new(kind), labels, values, horizon).unwrap()
    }

    #[test]
    fn ftl_breaks_ties_upward() {
        let mut l = learner(LearnerKind::Ftl, &[0.0, 1.0, 2.0], &[1.0], 10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(l.select_arm(0, &mut rng), 2);
        l.observe(&[vec![0.0, 0.5, 0.5]]).unwrap();
        assert_eq!(l.select_arm(0, &mut rng), 2);
        l.observe(&[vec![0.0, 0.1, 0.0]]).unwrap();
        assert_eq!(l.select_arm(0, &mut rng), 1);
    }

    #[test]
    fn mw_concentrates_on_a_dominant_arm() {
        // σ = [0, 100, 0] with γT = 50 and rate ln(K)/√T: the dominated arms carry at most γ.
        // At T = 400 the dominated mass is about 2e^{-5.5}, well under γ = 1/8.
        let horizon = 400;
        let cfg = LearnerConfig::mw((3f64).ln() / (horizon as f64).sqrt());
        let mut l = LearnerState::new(&cfg, &[0.0, 1.0, 2.0], &[1.0], horizon).unwrap();
        l.observe(&[vec![0.0, 100.0, 0.0]]).unwrap();
        let gamma = 50.0 / horizon as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 10_000;
        let hits = (0..draws).filter(|_| l.select_arm(0, &mut rng) == 1).count();
        assert!(hits as f64 / draws as f64 >= 1.0 - gamma);
        let p = l.probabilities(0);
        assert!(p[0] <= gamma && p[2] <= gamma);
    }

    #[test]
    fn clever_mask_blocks_overbids() {
        let cfg = LearnerConfig { clever: true, ..LearnerConfig::new(LearnerKind::Mw) };
        let labels = [0.0, 0.25, 0.5, 0.75];
        let mut l = LearnerState::new(&cfg, &labels, &[0.4, 0.1], 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            assert!(labels[l.select_arm(0, &mut rng)] <= 0.4);
            assert_eq!(l.select_arm(1, &mut rng), 0);
        }
        l.observe(&[vec![0.0, 0.0, 9.0, 9.0], vec![0.0, 9.0, 9.0, 9.0]]).unwrap();
        for kind in [LearnerKind::Ftl, LearnerKind::Ftpl] {
            let cfg = LearnerConfig { clever: true, ..LearnerConfig::new(kind) };
            let mut l = LearnerState::new(&cfg, &labels, &[0.4], 100).unwrap();
            l.observe(&[vec![0.0, 0.0, 9.0, 9.0]]).unwrap();
            for _ in 0..100 {
                assert!(labels[l.select_arm(0, &mut rng)] <= 0.4);
            }
        }
    }

    #[test]
    fn recency_scales_rewards() {
        let cfg = LearnerConfig { recency_eta: 2.0, ..LearnerConfig::new(LearnerKind::Ftl) };
        let mut l = LearnerState::new(&cfg, &[0.0, 1.0], &[1.0], 2).unwrap();
        l.observe(&[vec![1.0, 0.0]]).unwrap();
        l.observe(&[vec![0.0, 1.0]]).unwrap();
        assert_eq!(l.sigma(0), &[2.0, 4.0]);
    }

    #[test]
    fn unit_recency_is_the_base_algorithm() {
        let cfg = LearnerConfig::mw(0.3);
        let scaled = LearnerConfig { recency_eta: 1.0, ..cfg.clone() };
        let mut a = LearnerState::new(&cfg, &[0.0, 1.0, 2.0], &[1.0, 2.0], 50).unwrap();
        let mut b = LearnerState::new(&scaled, &[0.0, 1.0, 2.0], &[1.0, 2.0], 50).unwrap();
        let (mut ra, mut rb) = (ChaCha8Rng::seed_from_u64(9), ChaCha8Rng::seed_from_u64(9));
        let mut rewards = ChaCha8Rng::seed_from_u64(10);
        for t in 0..50 {
            assert_eq!(a.select_arm(t % 2, &mut ra), b.select_arm(t % 2, &mut rb));
            let r: Vec<Vec<f64>> = (0..2).map(|_| (0..3).map(|_| rewards.gen_range(-1.0..1.0)).collect()).collect();
            a.observe(&r).unwrap();
            b.observe(&r).unwrap();
        }
        assert_eq!(a.sigma(1), b.sigma(1));
    }

    #[test]
    fn recency_drift_is_bounded() {
        // η^T = 1 + ε: scaled and unscaled cumulative rewards differ by at most Σ (η^t − 1) ≤ εT.
        let horizon = 1000;
        let epsilon = 0.05;
        let eta = (1.0f64 + epsilon).powf(1.0 / horizon as f64);
        let cfg = LearnerConfig { recency_eta: eta, ..LearnerConfig::new(LearnerKind::Ftl) };
        let mut l = LearnerState::new(&cfg, &[0.0, 1.0], &[1.0], horizon).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut plain = 0.0;
        for _ in 0..horizon {
            let r: f64 = rng.gen_range(-1.0..1.0);
            plain += r;
            l.observe(&[vec![0.0, r]]).unwrap();
        }
        let drift: f64 = (1..=horizon).map(|t| eta.powi(t as i32) - 1.0).sum();
        assert!((l.sigma(0)[1] - plain).abs() <= drift + 1e-9);
        assert!(drift <= epsilon * horizon as f64);
    }

    #[test]
    fn ftl_argmax_survives_uniform_rescaling() {
        // Equal rewards across arms in a round shift every arm by the same scaled amount.
        let cfg = LearnerConfig { recency_eta: 1.5, ..LearnerConfig::new(LearnerKind::Ftl) };
        let mut scaled = LearnerState::new(&cfg, &[0.0, 1.0, 2.0], &[1.0], 20).unwrap();
        let mut plain = learner(LearnerKind::Ftl, &[0.0, 1.0, 2.0], &[1.0], 20);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let first = vec![0.0, 0.3, 0.1];
        scaled.observe(&[first.clone()]).unwrap();
        plain.observe(&[first]).unwrap();
        for _ in 0..10 {
            let c: f64 = rng.gen_range(-1.0..1.0);
            scaled.observe(&[vec![c; 3]]).unwrap();
            plain.observe(&[vec![c; 3]]).unwrap();
            assert_eq!(scaled.select_arm(0, &mut rng), plain.select_arm(0, &mut rng));
        }
    }

    #[test]
    fn bandit_learns_the_best_arm() {
        let cfg = LearnerConfig { feedback: Feedback::Bandit, learning_rate: Some(0.01), ..LearnerConfig::new(LearnerKind::Mw) };
        let mut l = LearnerState::new(&cfg, &[0.0, 1.0, 2.0], &[1.0], 5000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let means = [0.0, 0.5, -0.5];
        for _ in 0..5000 {
            let arm = l.select_arm(0, &mut rng);
            l.observe_bandit(means[arm]).unwrap();
        }
        let p = l.probabilities(0);
        assert!(p[1] > 0.8, "{p:?}");
        assert!(l.observe(&[vec![0.0; 3]]).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = LearnerConfig { recency_eta: 0.5, ..LearnerConfig::new(LearnerKind::Mw) };
        assert!(bad.validate().is_err());
        let bad = LearnerConfig { k_switch: Some(1), ..LearnerConfig::new(LearnerKind::Ftl) };
        assert!(bad.validate().is_err());
        assert!(LearnerState::new(&LearnerConfig::new(LearnerKind::Intended), &[0.0, 1.0], &[1.0], 4).is_err());
        assert!(LearnerState::new(&LearnerConfig::new(LearnerKind::Mw), &[1.0, 2.0], &[1.0], 4).is_err());
        let mut l = learner(LearnerKind::Mw, &[0.0, 1.0], &[1.0], 4);
        assert!(l.observe(&[vec![0.0]]).is_err());
        assert!(l.observe(&[vec![0.0, 1.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn config_json_defaults() {
        let c: LearnerConfig = serde_json::from_str(r#"{"type": "mw"}"#).unwrap();
        assert_eq!(c, LearnerConfig::new(LearnerKind::Mw));
        assert!(serde_json::from_str::<LearnerConfig>(r#"{"type": "mw", "speed": 2}"#).is_err());
        let c: LearnerConfig =
            serde_json::from_str(r#"{"type": "ftpl", "clever": true, "recency_eta": 1.001, "feedback": "bandit"}"#).unwrap();
        assert!(c.clever && c.feedback == Feedback::Bandit);
    }
}
