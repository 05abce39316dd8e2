//! Experiment configuration: parsing, resolution and validation.

use crate::engine::BlmaConfig;
use crate::error::{Error, Result};
use crate::negotiators::DEFAULT_TAU_FIXED;
use crate::radio::{CognitiveMarket, GeneratedMarketSpec, MarketSpec, TimeDomain};
use crate::tu::TuInstance;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_EPSILON: f64 = 0.15;
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRef {
    pub file: PathBuf,
}

/// Where the market comes from. Variants are told apart by their keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MarketSource {
    File(FileRef),
    Tu(TuInstance),
    Radio(MarketSpec),
    Generated(GeneratedMarketSpec),
}

/// A built market.
#[derive(Clone, Debug)]
pub enum Market {
    Tu(TuInstance),
    Radio(CognitiveMarket),
}

impl Market {
    pub fn dims(&self) -> (usize, usize) {
        use crate::engine::AgreementOracle;
        match self {
            Market::Tu(inst) => (inst.num_k(), inst.num_l()),
            Market::Radio(m) => (m.num_k(), m.num_l()),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn schema(path: &Path, e: serde_json::Error) -> Error {
    Error::Schema(format!("{}: {e}", path.display()))
}

impl MarketSource {
    /// Reads a market file: an explicit or generated cognitive-radio market,
    /// or a TU instance.
    pub fn from_file(path: &Path) -> Result<MarketSource> {
        let text = read_text(path)?;
        let source: MarketSource = serde_json::from_str(&text).map_err(|e| schema(path, e))?;
        if let MarketSource::File(_) = source {
            return Err(Error::Schema(format!(
                "{}: market files cannot refer to other files",
                path.display()
            )));
        }
        Ok(source)
    }

    /// Inlines a file reference, resolved against `base`.
    pub fn resolve(self, base: &Path) -> Result<MarketSource> {
        match self {
            MarketSource::File(FileRef { file }) => MarketSource::from_file(&base.join(file)),
            other => Ok(other),
        }
    }

    /// Builds the market. `redraw` shifts the seed of a generated market.
    pub fn build(&self, redraw: Option<u64>) -> Result<Market> {
        match self {
            MarketSource::File(f) => Err(Error::Schema(format!(
                "unresolved market file reference {}",
                f.file.display()
            ))),
            MarketSource::Tu(inst) => {
                inst.validate()?;
                Ok(Market::Tu(inst.clone()))
            }
            MarketSource::Radio(spec) => Ok(Market::Radio(CognitiveMarket::new(spec.clone())?)),
            MarketSource::Generated(spec) => {
                let mut spec = spec.clone();
                if let Some(offset) = redraw {
                    spec.seed = spec.seed.wrapping_add(offset);
                }
                Ok(Market::Radio(CognitiveMarket::generate(&spec)?))
            }
        }
    }
}

fn default_tau_fixed() -> f64 {
    DEFAULT_TAU_FIXED
}

/// Negotiator selection by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum NegotiatorSpec {
    #[serde(rename = "blma1")]
    Blma1,
    #[serde(rename = "blma2")]
    Blma2,
    #[serde(rename = "1d")]
    OneD {
        #[serde(default = "default_tau_fixed")]
        tau_fixed: f64,
    },
    #[serde(rename = "tu")]
    Tu,
}

impl NegotiatorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            NegotiatorSpec::Blma1 => "blma1",
            NegotiatorSpec::Blma2 => "blma2",
            NegotiatorSpec::OneD { .. } => "1d",
            NegotiatorSpec::Tu => "tu",
        }
    }

    /// Negotiators that keep aspirations on the δ-grid and need `ε = qδ`.
    pub fn grid_disciplined(&self) -> bool {
        !matches!(self, NegotiatorSpec::Tu)
    }

    /// Time shares the negotiator can reach.
    pub fn time_domain(&self) -> TimeDomain {
        match *self {
            NegotiatorSpec::OneD { tau_fixed } => TimeDomain::Fixed(tau_fixed),
            _ => TimeDomain::Full,
        }
    }
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_match_prob() -> f64 {
    BlmaConfig::DEFAULT_MATCH_PROB
}
fn default_round_cap() -> u64 {
    BlmaConfig::DEFAULT_ROUND_CAP
}
fn default_replications() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub market: MarketSource,
    pub negotiator: NegotiatorSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_match_prob")]
    pub match_prob: f64,
    #[serde(default = "default_round_cap")]
    pub round_cap: u64,
    /// Defaults to `K·L`.
    #[serde(default)]
    pub stability_check_period: Option<u64>,
    #[serde(default)]
    pub initial_aspiration: f64,
    /// Replication `i` runs with seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub trace: bool,
    /// Draw a fresh topology per replication (generated markets only).
    #[serde(default)]
    pub redraw_topology: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(market: MarketSource, negotiator: NegotiatorSpec) -> Self {
        ExperimentConfig {
            market,
            negotiator,
            epsilon: DEFAULT_EPSILON,
            delta: DEFAULT_DELTA,
            match_prob: BlmaConfig::DEFAULT_MATCH_PROB,
            round_cap: BlmaConfig::DEFAULT_ROUND_CAP,
            stability_check_period: None,
            initial_aspiration: 0.0,
            seed: 0,
            replications: 1,
            trace: false,
            redraw_topology: false,
            out: None,
        }
    }

    /// Parses JSON text. A summary file written by an earlier run is accepted
    /// too; its `config` entry is used.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        if let Some(obj) = value.as_object_mut() {
            if obj.contains_key("stats") {
                if let Some(config) = obj.remove("config") {
                    value = config;
                }
            }
        }
        serde_json::from_value(value)
    }

    /// Engine parameters for one replication.
    pub fn blma(&self, num_k: usize, num_l: usize, seed: u64) -> BlmaConfig {
        let mut cfg = BlmaConfig::for_market(self.epsilon, self.delta, num_k, num_l);
        cfg.match_prob = self.match_prob;
        cfg.round_cap = self.round_cap;
        cfg.rng_seed = seed;
        if let Some(period) = self.stability_check_period {
            cfg.stability_check_period = period;
        }
        cfg
    }

    /// Inlines file references and fills defaults that depend on the market.
    pub fn resolve(mut self, base: &Path) -> Result<Self> {
        self.market = self.market.resolve(base)?;
        let (num_k, num_l) = self.market.build(None)?.dims();
        self.stability_check_period
            .get_or_insert((num_k * num_l).max(1) as u64);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        if !(self.initial_aspiration >= 0.0 && self.initial_aspiration.is_finite()) {
            return Err(Error::InvalidParameter(
                "initial_aspiration must be a nonnegative number".into(),
            ));
        }
        let market = self.market.build(None)?;
        let (num_k, num_l) = market.dims();
        let blma = self.blma(num_k, num_l, self.seed);
        blma.validate()?;
        let name = self.negotiator.name();
        if self.negotiator.grid_disciplined() {
            blma.validate_grid(name)?;
        }
        if self.redraw_topology && !matches!(self.market, MarketSource::Generated(_)) {
            return Err(Error::InvalidParameter(
                "redraw_topology needs a generated market".into(),
            ));
        }
        let incompatible = |reason: &str| Error::Incompatible {
            negotiator: name.into(),
            reason: reason.into(),
        };
        match (&market, &self.negotiator) {
            (Market::Tu(_), NegotiatorSpec::Tu) => Ok(()),
            (Market::Tu(_), _) => Err(incompatible("needs a cognitive-radio market")),
            (Market::Radio(_), NegotiatorSpec::Tu) => Err(incompatible("needs a TU market")),
            (Market::Radio(m), NegotiatorSpec::Blma1) => {
                crate::negotiators::Blma1::new(m).map(|_| ())
            }
            (Market::Radio(m), NegotiatorSpec::OneD { tau_fixed }) => {
                crate::negotiators::OneD::new(m, *tau_fixed).map(|_| ())
            }
            (Market::Radio(_), NegotiatorSpec::Blma2) => Ok(()),
        }
    }
}

/// Reads, resolves and validates a configuration file. File references are
/// resolved against the directory holding `path`.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = read_text(path)?;
    let config = ExperimentConfig::from_json(&text).map_err(|e| schema(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    config.resolve(base)
}
