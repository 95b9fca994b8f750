//! The full-surplus-extraction auction: `P` arms whose roles shift down by one every phase.
//!
//! Rounds are 0-based; phase `τ = round / 2R + 1` is 1-based, as are arm indices `1..=P`
//! (arm 0 is null). Value indices `j` are 0-based, so the arm intended for `w_j` in phase `τ`
//! is `P + j + 1 − τ`.

use rand::RngCore;

use super::{coin, uniform_index, Interim, Mechanism, RoundOutcome};
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ArmStatus {
    Dormant,
    /// Submits the support value with this 0-based index.
    Active(usize),
    Retired,
}

#[derive(Clone, Debug)]
pub struct Fse<T = f64> {
    dist: ValueDistribution<T>,
    n: usize,
    horizon: usize,
    phases: usize,
    half: usize,
    epsilon: T,
}

impl<T: Scalar> Fse<T> {
    pub fn new(dist: ValueDistribution<T>, n: usize, horizon: usize, phases: usize, epsilon: T) -> Result<Self> {
        let m = dist.m();
        if n == 0 {
            return Err(Error::Config("buyer count must be at least 1".into()));
        }
        if phases < m {
            return Err(Error::Config(format!("phase count P = {phases} must be at least the support size m = {m}")));
        }
        if horizon == 0 || horizon % (2 * phases) != 0 {
            return Err(Error::Config(format!(
                "horizon T = {horizon} must be a positive multiple of 2P = {} so both half-phases have equal length",
                2 * phases
            )));
        }
        if epsilon < T::zero() {
            return Err(Error::Config("payment discount must be nonnegative".into()));
        }
        Ok(Self { half: horizon / (2 * phases), dist, n, horizon, phases, epsilon })
    }

    /// Default payment discount `1e-9 · w_m`.
    pub fn default_epsilon(dist: &ValueDistribution<T>) -> T {
        dist.max_value().clone() * T::from_f64(1e-9)
    }

    pub fn dist(&self) -> &ValueDistribution<T> {
        &self.dist
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn phases(&self) -> usize {
        self.phases
    }

    /// `R`: rounds per half-phase.
    pub fn half_length(&self) -> usize {
        self.half
    }

    pub fn epsilon(&self) -> &T {
        &self.epsilon
    }

    pub fn phase(&self, round: usize) -> usize {
        round / (2 * self.half) + 1
    }

    pub fn in_second_half(&self, round: usize) -> bool {
        round % (2 * self.half) >= self.half
    }

    pub fn is_setup(&self, tau: usize) -> bool {
        tau < self.dist.m()
    }

    pub fn label_exact(&self, arm: usize) -> T {
        if arm == 0 {
            T::zero()
        } else {
            T::from_usize(2) * self.dist.max_value().clone() + T::from_usize(arm)
        }
    }

    pub fn arm_status(&self, arm: usize, tau: usize) -> Result<ArmStatus> {
        if arm > self.phases {
            return Err(Error::OutOfRange { index: arm, len: self.phases + 1 });
        }
        if tau == 0 || tau > self.phases {
            return Err(Error::Precondition(format!("phase {tau} outside 1..={}", self.phases)));
        }
        Ok(self.status(arm, tau))
    }

    fn status(&self, arm: usize, tau: usize) -> ArmStatus {
        let lo = self.phases + 1 - tau;
        if arm == 0 || arm < lo {
            ArmStatus::Dormant
        } else if arm - lo < self.dist.m() {
            ArmStatus::Active(arm - lo)
        } else {
            ArmStatus::Retired
        }
    }

    /// The arm a value-`w_j` buyer is expected to pull in phase `τ`: `b_{P+j+1−τ}` if that arm is
    /// active, otherwise `b_P`.
    pub fn intended_arm(&self, j: usize, tau: usize) -> usize {
        if j < tau {
            self.phases + j + 1 - tau
        } else {
            self.phases
        }
    }

    /// Bid level of an arm: `Some(j)` submits `w_j`, `Some(m)` is a retired bid of `w_m + 1`.
    fn level(&self, arm: usize, tau: usize) -> Option<usize> {
        match self.status(arm, tau) {
            ArmStatus::Dormant => None,
            ArmStatus::Active(j) => Some(j),
            ArmStatus::Retired => Some(self.dist.m()),
        }
    }

    fn level_bid(&self, level: usize) -> T {
        if level < self.dist.m() {
            self.dist.value(level).clone()
        } else {
            self.dist.max_value().clone() + T::one()
        }
    }

    /// Probability the tentative winner keeps the item in a setup phase when `ties` other
    /// buyers share the top bid `w_τ`.
    fn setup_keep(&self, tau: usize, ties: usize) -> T {
        let j = tau - 1;
        (self.dist.prob(j).clone() / self.dist.tail(j)).powu(ties)
    }

    /// Price charged to a winner at `level` whose highest competing bid is `second`.
    fn price(&self, level: usize, second: Option<usize>, second_half: bool) -> T {
        let m = self.dist.m();
        let raw = if level == m {
            T::from_usize(2) * self.dist.max_value().clone()
        } else {
            let sv = second.map(|l| self.level_bid(l)).unwrap_or_else(T::zero);
            if second_half {
                sv.clone() + T::from_usize(2) * (self.dist.value(level).clone() - sv)
            } else {
                sv
            }
        };
        T::max_of(T::zero(), raw - self.epsilon.clone())
    }

    /// Expected `(allocation, payment)` of every own arm at `round` against `others`' arms.
    pub fn interim_table(&self, round: usize, others: &[usize]) -> Vec<(T, T)> {
        let tau = self.phase(round);
        let second_half = self.in_second_half(round);
        let mut top: Option<usize> = None;
        let mut ties = 0;
        for &a in others {
            if let Some(l) = self.level(a, tau) {
                match top {
                    Some(t) if l < t => {}
                    Some(t) if l == t => ties += 1,
                    _ => {
                        top = Some(l);
                        ties = 1;
                    }
                }
            }
        }
        let setup_top = if self.is_setup(tau) { Some(tau - 1) } else { None };
        (0..=self.phases)
            .map(|arm| match self.level(arm, tau) {
                None => (T::zero(), T::zero()),
                Some(l) => {
                    let alloc = match top {
                        Some(t) if l < t => T::zero(),
                        Some(t) if l == t => {
                            let share = T::one() / T::from_usize(ties + 1);
                            if setup_top == Some(l) {
                                share * self.setup_keep(tau, ties)
                            } else {
                                share
                            }
                        }
                        _ => T::one(),
                    };
                    if alloc.is_zero() {
                        (T::zero(), T::zero())
                    } else {
                        let second = if top == Some(l) { Some(l) } else { top };
                        let pay = alloc.clone() * self.price(l, second, second_half);
                        (alloc, pay)
                    }
                }
            })
            .collect()
    }
}

impl Mechanism for Fse<f64> {
    fn num_arms(&self) -> usize {
        self.phases + 1
    }

    fn label(&self, arm: usize) -> f64 {
        self.label_exact(arm)
    }

    fn payment_bound(&self) -> f64 {
        2.0 * self.dist.max_value()
    }

    fn interim_all(&self, round: usize, others: &[usize], out: &mut Vec<Interim>) {
        out.clear();
        out.extend(self.interim_table(round, others).into_iter().map(|(alloc, pay)| Interim { alloc, pay }));
    }

    fn resolve(&self, round: usize, arms: &[usize], rng: &mut dyn RngCore) -> RoundOutcome {
        let tau = self.phase(round);
        let levels: Vec<Option<usize>> = arms.iter().map(|&a| self.level(a, tau)).collect();
        let mut out = RoundOutcome::empty(arms.len());
        out.submitted_bids = levels.iter().map(|l| l.map(|l| self.level_bid(l))).collect();
        let Some(top) = levels.iter().flatten().copied().max() else {
            return out;
        };
        let tied: Vec<usize> = (0..arms.len()).filter(|&i| levels[i] == Some(top)).collect();
        let winner = tied[uniform_index(rng, tied.len())];
        if self.is_setup(tau) && top == tau - 1 && !coin(rng, self.setup_keep(tau, tied.len() - 1)) {
            return out;
        }
        let second = if tied.len() > 1 {
            Some(top)
        } else {
            levels.iter().enumerate().filter(|(i, _)| *i != winner).filter_map(|(_, l)| *l).max()
        };
        out.winner = Some(winner);
        out.allocation[winner] = 1.0;
        out.payments[winner] = self.price(top, second, self.in_second_half(round));
        out
    }

    fn name(&self) -> &'static str {
        "fse"
    }
}
