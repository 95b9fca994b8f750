use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::auctions::{reserve_schedule_from_lp, Fse, Mechanism, NullAuction, SpaReserve, UniformPayBid};
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};
use crate::learners::{meta_arm_count, LearnerConfig, LearnerKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AuctionConfig {
    Fse {
        phases: usize,
        #[serde(default)]
        epsilon: Option<f64>,
    },
    SpaReserve {
        reserve: f64,
        #[serde(default)]
        epsilon: Option<f64>,
    },
    /// Pay-your-bid uniform auction. Exactly one of `reserve` (constant), `allocation` (target
    /// interim allocation, converted to a schedule) or `schedule` (per-round reserves) is given.
    UniformDeclining {
        #[serde(default)]
        reserve: Option<f64>,
        #[serde(default)]
        allocation: Option<Vec<f64>>,
        #[serde(default)]
        schedule: Option<Vec<Option<f64>>>,
        #[serde(default)]
        epsilon: Option<f64>,
    },
    Null,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LearnerSpec {
    Shared(LearnerConfig),
    PerBuyer(Vec<LearnerConfig>),
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(serialize_with = "dist_out", deserialize_with = "dist_in")]
    pub dist: ValueDistribution<f64>,
    pub n: usize,
    pub horizon: usize,
    pub auction: AuctionConfig,
    pub learners: LearnerSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub record_sigma: bool,
}

fn dist_out<S: Serializer>(d: &ValueDistribution<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    d.to_json().serialize(s)
}

fn dist_in<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ValueDistribution<f64>, D::Error> {
    let v = serde_json::Value::deserialize(d)?;
    ValueDistribution::from_json(&v).map_err(serde::de::Error::custom)
}

/// Largest meta-arm set a k-switching buyer may enumerate inside a simulation.
const MAX_SIM_META_ARMS: u128 = 200_000;

impl SimulationConfig {
    pub fn new(dist: ValueDistribution<f64>, n: usize, horizon: usize, auction: AuctionConfig, learner: LearnerConfig) -> Self {
        Self { dist, n, horizon, auction, learners: LearnerSpec::Shared(learner), seed: 0, trials: 1, record_sigma: false }
    }

    pub fn learner(&self, buyer: usize) -> &LearnerConfig {
        match &self.learners {
            LearnerSpec::Shared(c) => c,
            LearnerSpec::PerBuyer(v) => &v[buyer],
        }
    }

    fn epsilon(&self, explicit: Option<f64>) -> Result<f64> {
        let eps = explicit.unwrap_or_else(|| Fse::default_epsilon(&self.dist));
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::Config(format!("epsilon must be nonnegative, got {eps}")));
        }
        Ok(eps)
    }

    /// Arm labels of the bid-as-value mechanisms: null, then the support.
    fn support_labels(&self) -> Result<Vec<f64>> {
        if *self.dist.value(0) <= 0.0 {
            return Err(Error::Config("bid arms need a positive lowest value; 0 is reserved for the null arm".into()));
        }
        Ok(std::iter::once(0.0).chain(self.dist.support().iter().copied()).collect())
    }

    pub fn fse(&self) -> Result<Option<Fse<f64>>> {
        match &self.auction {
            AuctionConfig::Fse { phases, epsilon } => {
                Ok(Some(Fse::new(self.dist.clone(), self.n, self.horizon, *phases, self.epsilon(*epsilon)?)?))
            }
            _ => Ok(None),
        }
    }

    pub fn build_mechanism(&self) -> Result<Box<dyn Mechanism>> {
        Ok(match &self.auction {
            AuctionConfig::Fse { .. } => Box::new(self.fse()?.expect("fse config")),
            AuctionConfig::SpaReserve { reserve, epsilon } => {
                Box::new(SpaReserve::new(self.support_labels()?, *reserve, self.epsilon(*epsilon)?)?)
            }
            AuctionConfig::UniformDeclining { reserve, allocation, schedule, epsilon } => {
                let schedule = match (reserve, allocation, schedule) {
                    (Some(r), None, None) => vec![Some(*r); self.horizon],
                    (None, Some(x), None) => reserve_schedule_from_lp(x, &self.dist, self.n, self.horizon)?,
                    (None, None, Some(s)) => {
                        if s.len() != self.horizon {
                            return Err(Error::Config(format!(
                                "schedule has {} rounds, horizon is {}",
                                s.len(),
                                self.horizon
                            )));
                        }
                        s.clone()
                    }
                    _ => {
                        return Err(Error::Config(
                            "uniform_declining needs exactly one of reserve, allocation, schedule".into(),
                        ))
                    }
                };
                Box::new(UniformPayBid::new(self.support_labels()?, schedule, self.epsilon(*epsilon)?)?)
            }
            AuctionConfig::Null => Box::new(NullAuction::new(self.support_labels().unwrap_or_else(|_| vec![0.0]))?),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if let LearnerSpec::PerBuyer(v) = &self.learners {
            if v.len() != self.n {
                return Err(Error::Config(format!("{} learner configs for n = {} buyers", v.len(), self.n)));
            }
        }
        let mech = self.build_mechanism()?;
        let fse = matches!(self.auction, AuctionConfig::Fse { .. });
        for i in 0..self.n {
            let l = self.learner(i);
            l.validate()?;
            if l.kind == LearnerKind::Intended && !fse {
                return Err(Error::Config("intended-arm buyers need the fse auction".into()));
            }
            if let Some(k) = l.k_switch {
                let count = meta_arm_count(mech.num_arms(), self.horizon, k)?;
                if count.saturated || count.count > MAX_SIM_META_ARMS {
                    return Err(Error::TooLarge(format!("k_switch = {k} needs {} meta-arms per value", count.count)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPENDIX_A: &str = r#"{
        "dist": {"support": [0.25, 0.5, 0.75, 1.0], "probs": [0.25, 0.25, 0.25, 0.25]},
        "n": 2,
        "horizon": 200000,
        "auction": {"type": "fse", "phases": 40},
        "learners": {"type": "mw", "learning_rate": 0.5},
        "seed": 7
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg: SimulationConfig = serde_json::from_str(APPENDIX_A).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.trials, 1);
        let again: SimulationConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let mut cfg: SimulationConfig = serde_json::from_str(APPENDIX_A).unwrap();
        cfg.horizon = 1000;
        assert!(cfg.validate().unwrap_err().to_string().contains("multiple of 2P"));
        let mut cfg: SimulationConfig = serde_json::from_str(APPENDIX_A).unwrap();
        cfg.auction = AuctionConfig::SpaReserve { reserve: 0.5, epsilon: None };
        cfg.learners = LearnerSpec::Shared(LearnerConfig::new(LearnerKind::Intended));
        assert!(cfg.validate().is_err());
        cfg.learners = LearnerSpec::PerBuyer(vec![LearnerConfig::new(LearnerKind::Ftl)]);
        assert!(cfg.validate().is_err());
        let bad = APPENDIX_A.replace("\"seed\": 7", "\"seed\": 7, \"colour\": 1");
        assert!(serde_json::from_str::<SimulationConfig>(&bad).is_err());
        let mut cfg: SimulationConfig = serde_json::from_str(APPENDIX_A).unwrap();
        cfg.auction = AuctionConfig::UniformDeclining { reserve: Some(0.5), allocation: Some(vec![0.0; 4]), schedule: None, epsilon: None };
        assert!(cfg.validate().is_err());
    }
}
