use super::model::{channel_gain, ChannelGains, PairUtilities, PuParams, SuParams, UtilityModel};
use super::oracle::{self, TimeDomain};
use crate::engine::{seeded_rng, AgreementOracle, ResourcePoint};
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

pub const DEFAULT_PU_POWER: f64 = 0.01;
pub const DEFAULT_SIGMA2: f64 = 1.0;
pub const DEFAULT_SU_OWN_POWER: f64 = 1.0;
pub const DEFAULT_SU_COST: f64 = 0.1;
pub const DEFAULT_SU_TOTAL_POWER: f64 = 1.0;
pub const DEFAULT_SWEEP: usize = 256;

/// Placement and transmit power of one PU transmitter/receiver pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuNode {
    pub pos_tx: [f64; 2],
    pub pos_rx: [f64; 2],
    #[serde(rename = "P_k")]
    pub power: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuNode {
    pub pos_tx: [f64; 2],
    pub pos_rx: [f64; 2],
    #[serde(rename = "P_ell")]
    pub own_power: f64,
    #[serde(rename = "c_ell")]
    pub cost: f64,
    #[serde(rename = "P_T")]
    pub total_power: f64,
}

/// Explicit market description, the on-disk format of a cognitive market.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub model: UtilityModel,
    pub pu: Vec<PuNode>,
    pub su: Vec<SuNode>,
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sweep: Option<usize>,
}

/// Market drawn from a seed: every transmitter and receiver is placed
/// uniformly in the unit square, PUs first, then SUs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratedMarketSpec {
    #[serde(default = "default_model")]
    pub model: UtilityModel,
    pub seed: u64,
    #[serde(rename = "K")]
    pub num_k: usize,
    #[serde(rename = "L")]
    pub num_l: usize,
    #[serde(rename = "P_k", default = "default_pu_power")]
    pub pu_power: f64,
    #[serde(rename = "P_ell", default = "default_su_own_power")]
    pub su_own_power: f64,
    #[serde(rename = "c_ell", default = "default_su_cost")]
    pub su_cost: f64,
    #[serde(rename = "P_T", default = "default_su_total_power")]
    pub su_total_power: f64,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sweep: Option<usize>,
}

fn default_model() -> UtilityModel {
    UtilityModel::A
}
fn default_pu_power() -> f64 {
    DEFAULT_PU_POWER
}
fn default_su_own_power() -> f64 {
    DEFAULT_SU_OWN_POWER
}
fn default_su_cost() -> f64 {
    DEFAULT_SU_COST
}
fn default_su_total_power() -> f64 {
    DEFAULT_SU_TOTAL_POWER
}
fn default_sigma2() -> f64 {
    DEFAULT_SIGMA2
}

impl GeneratedMarketSpec {
    pub fn new(model: UtilityModel, seed: u64, num_k: usize, num_l: usize) -> Self {
        GeneratedMarketSpec {
            model,
            seed,
            num_k,
            num_l,
            pu_power: DEFAULT_PU_POWER,
            su_own_power: DEFAULT_SU_OWN_POWER,
            su_cost: DEFAULT_SU_COST,
            su_total_power: DEFAULT_SU_TOTAL_POWER,
            sigma2: DEFAULT_SIGMA2,
            n_sweep: None,
        }
    }

    /// Draws the placements.
    pub fn realize(&self) -> MarketSpec {
        let mut rng = seeded_rng(self.seed);
        let point = |rng: &mut crate::engine::SimRng| [rng.random::<f64>(), rng.random::<f64>()];
        let pu = (0..self.num_k)
            .map(|_| PuNode {
                pos_tx: point(&mut rng),
                pos_rx: point(&mut rng),
                power: self.pu_power,
            })
            .collect();
        let su = (0..self.num_l)
            .map(|_| SuNode {
                pos_tx: point(&mut rng),
                pos_rx: point(&mut rng),
                own_power: self.su_own_power,
                cost: self.su_cost,
                total_power: self.su_total_power,
            })
            .collect();
        MarketSpec {
            model: self.model,
            pu,
            su,
            sigma2: self.sigma2,
            n_sweep: self.n_sweep,
        }
    }
}

/// A PU–SU cooperative relaying market with precomputed pair utilities.
#[derive(Clone, Debug)]
pub struct CognitiveMarket {
    spec: MarketSpec,
    pairs: Vec<PairUtilities>,
    n_sweep: usize,
    gamma: OnceLock<f64>,
}

impl PartialEq for CognitiveMarket {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn in_unit_square(p: [f64; 2]) -> bool {
    p.iter().all(|c| (0.0..=1.0).contains(c))
}

impl CognitiveMarket {
    pub fn new(spec: MarketSpec) -> Result<Self> {
        if spec.pu.is_empty() || spec.su.is_empty() {
            return Err(Error::Schema(
                "a market needs at least one PU and one SU".into(),
            ));
        }
        if !(spec.sigma2 > 0.0 && spec.sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma2 must be positive, got {}",
                spec.sigma2
            )));
        }
        for (k, pu) in spec.pu.iter().enumerate() {
            if !in_unit_square(pu.pos_tx) || !in_unit_square(pu.pos_rx) {
                return Err(Error::InvalidParameter(format!(
                    "PU {k} is placed outside the unit square"
                )));
            }
            if !(pu.power > 0.0 && pu.power.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "PU {k}: P_k must be positive"
                )));
            }
        }
        for (l, su) in spec.su.iter().enumerate() {
            if !in_unit_square(su.pos_tx) || !in_unit_square(su.pos_rx) {
                return Err(Error::InvalidParameter(format!(
                    "SU {l} is placed outside the unit square"
                )));
            }
            let positive = |x: f64| x > 0.0 && x.is_finite();
            if !positive(su.own_power) || !positive(su.cost) || !positive(su.total_power) {
                return Err(Error::InvalidParameter(format!(
                    "SU {l}: P_ell, c_ell and P_T must be positive"
                )));
            }
        }
        let n_sweep = spec.n_sweep.unwrap_or(DEFAULT_SWEEP);
        if n_sweep < 2 {
            return Err(Error::InvalidParameter("n_sweep must be at least 2".into()));
        }
        let mut pairs = Vec::with_capacity(spec.pu.len() * spec.su.len());
        for pu in &spec.pu {
            for su in &spec.su {
                let gains = ChannelGains {
                    h_k: channel_gain(pu.pos_tx, pu.pos_rx),
                    h_kl: channel_gain(pu.pos_tx, su.pos_tx),
                    h_lk: channel_gain(su.pos_tx, pu.pos_rx),
                    h_l: channel_gain(su.pos_tx, su.pos_rx),
                };
                let pu_params = PuParams {
                    power: pu.power,
                    sigma2: spec.sigma2,
                };
                let su_params = SuParams {
                    own_power: su.own_power,
                    cost: su.cost,
                    total_power: su.total_power,
                    sigma2: spec.sigma2,
                };
                pairs.push(PairUtilities::new(spec.model, gains, pu_params, su_params));
            }
        }
        Ok(CognitiveMarket {
            spec,
            pairs,
            n_sweep,
            gamma: OnceLock::new(),
        })
    }

    pub fn generate(spec: &GeneratedMarketSpec) -> Result<Self> {
        if spec.num_k == 0 || spec.num_l == 0 {
            return Err(Error::Schema("K and L must be positive".into()));
        }
        CognitiveMarket::new(spec.realize())
    }

    pub fn spec(&self) -> &MarketSpec {
        &self.spec
    }

    pub fn model(&self) -> UtilityModel {
        self.spec.model
    }

    pub fn num_k(&self) -> usize {
        self.spec.pu.len()
    }

    pub fn num_l(&self) -> usize {
        self.spec.su.len()
    }

    pub fn n_sweep(&self) -> usize {
        self.n_sweep
    }

    pub fn pair(&self, k: usize, l: usize) -> &PairUtilities {
        &self.pairs[k * self.num_l() + l]
    }

    /// The sweep-backed agreement function restricted to `domain`.
    pub fn oracle(&self, domain: TimeDomain) -> oracle::SweepOracle<'_> {
        oracle::SweepOracle::new(self, domain)
    }

    /// Largest PU or SU utility over all pairs on the 512×512 box grid, times
    /// 1.01. Computed once.
    pub fn gamma(&self) -> f64 {
        *self.gamma.get_or_init(|| {
            let max = self
                .pairs
                .iter()
                .map(|p| {
                    let (u, v) =
                        oracle::grid_max_utilities(p, oracle::BRUTE_FORCE_GRID, TimeDomain::Full);
                    u.max(v)
                })
                .fold(0.0, f64::max);
            max * 1.01
        })
    }

    /// `(PU utility, SU utility)` of pair `(k, l)` at `point`.
    pub fn utilities(&self, k: usize, l: usize, point: &ResourcePoint) -> (f64, f64) {
        let pair = self.pair(k, l);
        (pair.pu_utility(point), pair.su_utility(point))
    }
}

impl AgreementOracle for CognitiveMarket {
    fn num_k(&self) -> usize {
        self.num_k()
    }

    fn num_l(&self) -> usize {
        self.num_l()
    }

    fn agrees(&self, k: usize, l: usize, a: f64, b: f64) -> bool {
        oracle::agreement_nonempty(self.pair(k, l), TimeDomain::Full, self.n_sweep, a, b)
    }

    fn witnesses(&self, k: usize, l: usize, point: &ResourcePoint, a: f64, b: f64) -> bool {
        oracle::point_witnesses(self.pair(k, l), TimeDomain::Full, point, a, b)
    }

    fn gamma_bound(&self) -> f64 {
        self.gamma()
    }
}
