//! The blind matching dynamic.
//!
//! One round activates a uniformly drawn pair `(k, l)`. If the pair's
//! negotiation reaches an ε-improving agreement and an independent uniform
//! draw falls below `match_prob`, the two agents match (breaking previous
//! matches) and adopt the agreed aspirations. If the negotiation fails, every
//! single member of the pair lowers its aspiration by δ. Agreement followed by
//! a failed probability draw leaves the state untouched.
//!
//! Random draws happen in a fixed order per round: pair index, match draw,
//! then whatever the negotiator consumes.

use crate::error::{Error, Result};
use crate::grid;
use crate::matching::Matching;
use crate::stability::is_epsilon_pairwise_stable;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator used for every seeded run.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Time share and relay power agreed by a matched pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourcePoint {
    pub tau: f64,
    #[serde(rename = "P")]
    pub power: f64,
}

impl ResourcePoint {
    pub fn new(tau: f64, power: f64) -> Self {
        ResourcePoint { tau, power }
    }
}

/// The ε improvement step and δ decay step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Steps {
    pub epsilon: f64,
    pub delta: f64,
}

/// Pairwise agreement functions `A_kl(a, b) ∈ {0, 1}` for a whole market.
///
/// Implementations must be monotone (`A(a, b) = 0` implies `A(a', b') = 0`
/// for `a' ≥ a`, `b' ≥ b`) and bounded (zero once either argument reaches
/// [`gamma_bound`](AgreementOracle::gamma_bound)).
pub trait AgreementOracle {
    fn num_k(&self) -> usize;
    fn num_l(&self) -> usize;
    fn agrees(&self, k: usize, l: usize, a: f64, b: f64) -> bool;

    /// Returns true when `point` itself realises aspirations `(a, b)` for the
    /// pair, which certifies `A_kl(a, b) = 1` without a search.
    fn witnesses(&self, _k: usize, _l: usize, _point: &ResourcePoint, _a: f64, _b: f64) -> bool {
        false
    }

    /// An aspiration level at or above which no pair agrees.
    fn gamma_bound(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Agreement {
    pub a: f64,
    pub b: f64,
    pub point: Option<ResourcePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Negotiation {
    NoAgreement,
    Agreement(Agreement),
}

impl Negotiation {
    pub fn agreement(self) -> Option<Agreement> {
        match self {
            Negotiation::Agreement(a) => Some(a),
            Negotiation::NoAgreement => None,
        }
    }
}

/// A bilateral negotiation between an activated pair.
///
/// An agreement must return `a ≥ a_k + ε`, `b ≥ b_l + ε` (up to flooring slack
/// for off-grid inputs) that the market's agreement function accepts.
pub trait Negotiator {
    fn negotiate(
        &self,
        k: usize,
        l: usize,
        a_k: f64,
        b_l: f64,
        steps: Steps,
        rng: &mut dyn RngCore,
    ) -> Negotiation;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlmaConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub match_prob: f64,
    pub round_cap: u64,
    pub rng_seed: u64,
    pub stability_check_period: u64,
}

impl BlmaConfig {
    pub const DEFAULT_MATCH_PROB: f64 = 0.5;
    pub const DEFAULT_ROUND_CAP: u64 = 1_000_000;

    /// Defaults for a `num_k × num_l` market: match probability 0.5, a cap of
    /// one million rounds and a stability check every `num_k·num_l` rounds.
    pub fn for_market(epsilon: f64, delta: f64, num_k: usize, num_l: usize) -> Self {
        BlmaConfig {
            epsilon,
            delta,
            match_prob: Self::DEFAULT_MATCH_PROB,
            round_cap: Self::DEFAULT_ROUND_CAP,
            rng_seed: 0,
            stability_check_period: (num_k * num_l).max(1) as u64,
        }
    }

    pub fn steps(&self) -> Steps {
        Steps {
            epsilon: self.epsilon,
            delta: self.delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !(self.epsilon > self.delta) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need epsilon > delta > 0, got epsilon = {}, delta = {}",
                self.epsilon, self.delta
            )));
        }
        if !(self.match_prob > 0.0 && self.match_prob <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "match_prob must lie in (0, 1], got {}",
                self.match_prob
            )));
        }
        if self.round_cap == 0 {
            return Err(Error::InvalidParameter("round_cap must be positive".into()));
        }
        if self.stability_check_period == 0 {
            return Err(Error::InvalidParameter(
                "stability_check_period must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Additional check for negotiators that keep aspirations on the δ-grid.
    pub fn validate_grid(&self, negotiator: &str) -> Result<()> {
        match grid::grid_ratio(self.epsilon, self.delta) {
            Some(_) => Ok(()),
            None => Err(Error::GridRatio {
                epsilon: self.epsilon,
                delta: self.delta,
                negotiator: negotiator.to_string(),
            }),
        }
    }
}

/// Aspirations of both sides, the current matching, the resource point each
/// matched pair last agreed on, and the round counter.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub matching: Matching,
    /// Indexed by `k`; `Some` only while `k` is matched.
    pub points: Vec<Option<ResourcePoint>>,
    pub round: u64,
}

impl MarketState {
    /// Empty matching with every aspiration set to `initial`.
    pub fn new(num_k: usize, num_l: usize, initial: f64) -> Self {
        Self::with_aspirations(vec![initial; num_k], vec![initial; num_l])
    }

    pub fn with_aspirations(a: Vec<f64>, b: Vec<f64>) -> Self {
        let (num_k, num_l) = (a.len(), b.len());
        MarketState {
            a,
            b,
            matching: Matching::empty(num_k, num_l),
            points: vec![None; num_k],
            round: 0,
        }
    }

    pub fn num_k(&self) -> usize {
        self.a.len()
    }

    pub fn num_l(&self) -> usize {
        self.b.len()
    }

    pub fn is_valid(&self) -> bool {
        self.matching.num_k() == self.a.len()
            && self.matching.num_l() == self.b.len()
            && self.points.len() == self.a.len()
            && self
                .a
                .iter()
                .chain(&self.b)
                .all(|c| c.is_finite() && *c >= 0.0)
            && self.matching.is_consistent()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepEvent {
    /// The pair matched.
    Match,
    /// No agreement and at least one single aspiration went down.
    Decay,
    /// Nothing changed.
    Noop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub k: usize,
    pub l: usize,
    pub event: StepEvent,
}

/// Executes one round of the dynamic in place.
pub fn blma_step<N: Negotiator + ?Sized>(
    state: &mut MarketState,
    config: &BlmaConfig,
    negotiator: &N,
    rng: &mut dyn RngCore,
) -> StepRecord {
    let (num_k, num_l) = (state.num_k(), state.num_l());
    let pair = rng.random_range(0..num_k * num_l);
    let (k, l) = (pair / num_l, pair % num_l);
    let draw: f64 = rng.random();
    state.round += 1;

    let outcome = negotiator.negotiate(k, l, state.a[k], state.b[l], config.steps(), rng);
    let event = match outcome {
        Negotiation::Agreement(agreed) => {
            if draw < config.match_prob {
                let (_, old_k) = state.matching.rematch(k, l);
                if let Some(ex) = old_k {
                    state.points[ex] = None;
                }
                state.a[k] = agreed.a;
                state.b[l] = agreed.b;
                state.points[k] = agreed.point;
                StepEvent::Match
            } else {
                StepEvent::Noop
            }
        }
        Negotiation::NoAgreement => {
            let mut lowered = false;
            if state.matching.partner_of_k(k).is_none() && state.a[k] > 0.0 {
                state.a[k] = grid::decay(state.a[k], config.delta);
                lowered = true;
            }
            if state.matching.partner_of_l(l).is_none() && state.b[l] > 0.0 {
                state.b[l] = grid::decay(state.b[l], config.delta);
                lowered = true;
            }
            if lowered {
                StepEvent::Decay
            } else {
                StepEvent::Noop
            }
        }
    };
    StepRecord { k, l, event }
}

/// One row of a run trace. Row 0 is the initial state and has no activated
/// pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub round: u64,
    pub activated: Option<(usize, usize)>,
    pub event: Option<StepEvent>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub converged: bool,
    /// Rounds until the final state was first reached when converged,
    /// otherwise the round cap.
    pub rounds: u64,
    pub state: MarketState,
    pub trace: Option<Vec<TraceRow>>,
}

/// Iterates [`blma_step`] from `initial` until the state is ε-pairwise stable
/// under `oracle` or the round cap is hit.
///
/// Stability is tested before the first round, every
/// `stability_check_period` rounds, and at the cap. Because the state only
/// changes on match or decay events, a state found stable at a check has been
/// stable since the last such event, and that round is what gets reported.
pub fn run_blma<O, N>(
    initial: MarketState,
    config: &BlmaConfig,
    oracle: &O,
    negotiator: &N,
    record_trace: bool,
) -> RunOutcome
where
    O: AgreementOracle + ?Sized,
    N: Negotiator + ?Sized,
{
    let mut rng = seeded_rng(config.rng_seed);
    let mut state = initial;
    let start = state.round;
    let period = config.stability_check_period.max(1);
    let mut last_change = start;
    let mut trace = record_trace.then(|| {
        vec![TraceRow {
            round: start,
            activated: None,
            event: None,
            a: state.a.clone(),
            b: state.b.clone(),
        }]
    });

    loop {
        let executed = state.round - start;
        let at_cap = executed >= config.round_cap;
        if (executed % period == 0 || at_cap)
            && is_epsilon_pairwise_stable(&state, oracle, config.epsilon)
        {
            state.round = last_change;
            let rounds = last_change - start;
            if let Some(t) = trace.as_mut() {
                t.truncate(rounds as usize + 1);
            }
            return RunOutcome {
                converged: true,
                rounds,
                state,
                trace,
            };
        }
        if at_cap {
            return RunOutcome {
                converged: false,
                rounds: executed,
                state,
                trace,
            };
        }
        let step = blma_step(&mut state, config, negotiator, &mut rng);
        if step.event != StepEvent::Noop {
            last_change = state.round;
        }
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                round: state.round,
                activated: Some((step.k, step.l)),
                event: Some(step.event),
                a: state.a.clone(),
                b: state.b.clone(),
            });
        }
    }
}
