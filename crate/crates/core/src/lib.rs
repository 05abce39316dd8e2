//! Blind matching with aspiration levels.
//!
//! Agents on two sides of a market are activated in random pairs, negotiate
//! over an abstract agreement function and adapt their aspiration levels
//! until the matching is ε-pairwise stable. Two markets are provided: the
//! transferable-utility assignment game ([`tu`]) and a cooperative
//! spectrum-sharing market between primary and secondary radio users
//! ([`radio`]).

pub mod engine;
pub mod error;
pub mod grid;
pub mod harness;
pub mod matching;
pub mod negotiators;
pub mod radio;
pub mod roots;
pub mod stability;
pub mod tu;

pub use engine::{
    blma_step, run_blma, Agreement, AgreementOracle, BlmaConfig, MarketState, Negotiation,
    Negotiator, ResourcePoint, RunOutcome, StepEvent, Steps,
};
pub use error::{Error, Result};
pub use matching::{AgentId, Matching, Side};
pub use stability::{is_epsilon_pairwise_stable, is_pre_stable, is_tight, snz_set};
