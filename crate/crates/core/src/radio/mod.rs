//! Cooperative spectrum-sharing market: PUs lease transmission time to SUs
//! that relay their traffic.

pub mod market;
pub mod model;
pub mod oracle;

pub use market::{CognitiveMarket, GeneratedMarketSpec, MarketSpec, PuNode, SuNode};
pub use model::{PairUtilities, UtilityModel};
pub use oracle::{GridOracle, SweepOracle, TimeDomain};
