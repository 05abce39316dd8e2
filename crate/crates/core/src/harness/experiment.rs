//! Seeded replications and their aggregation.

use super::config::{ExperimentConfig, Market, NegotiatorSpec};
use super::stats;
use crate::engine::{run_blma, AgreementOracle, MarketState, ResourcePoint, RunOutcome, TraceRow};
use crate::error::{Error, Result};
use crate::negotiators::{Blma1, Blma2, OneD};
use crate::radio::{GridOracle, TimeDomain};
use crate::stability::is_epsilon_pairwise_stable;
use crate::tu::TuNegotiator;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Outcome of one replication.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub converged: bool,
    pub rounds: u64,
    pub matching: Vec<(usize, usize)>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub points: Vec<Option<ResourcePoint>>,
    pub pu_utility_sum: f64,
    pub su_utility_sum: f64,
    pub wall_time_ms: f64,
    pub error: Option<String>,
    pub trace: Option<Vec<TraceRow>>,
}

impl RunRecord {
    fn failed(seed: u64, error: Error) -> Self {
        RunRecord {
            seed,
            converged: false,
            rounds: 0,
            matching: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
            points: Vec::new(),
            pu_utility_sum: 0.0,
            su_utility_sum: 0.0,
            wall_time_ms: 0.0,
            error: Some(error.to_string()),
            trace: None,
        }
    }

    /// The final market state.
    pub fn state(&self) -> MarketState {
        let mut state = MarketState::with_aspirations(self.a.clone(), self.b.clone());
        for &(k, l) in &self.matching {
            state.matching.rematch(k, l);
        }
        if !self.points.is_empty() {
            state.points = self.points.clone();
        }
        state.round = self.rounds;
        state
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub replications: usize,
    pub failed_runs: usize,
    pub converged: usize,
    pub convergence_rate: f64,
    /// Over all successful runs; unconverged runs count with the round cap.
    pub mean_rounds: f64,
    pub median_rounds: f64,
    pub std_rounds: f64,
    pub mean_pu_utility: f64,
    pub mean_su_utility: f64,
    /// Fraction of runs ending with `k` matched to `l`.
    pub match_frequency: Vec<Vec<f64>>,
}

impl AggregateStats {
    pub fn from_records(records: &[RunRecord], num_k: usize, num_l: usize) -> Self {
        let ok: Vec<&RunRecord> = records.iter().filter(|r| r.error.is_none()).collect();
        let rounds: Vec<f64> = ok.iter().map(|r| r.rounds as f64).collect();
        let pu: Vec<f64> = ok.iter().map(|r| r.pu_utility_sum / num_k as f64).collect();
        let su: Vec<f64> = ok.iter().map(|r| r.su_utility_sum / num_l as f64).collect();
        let converged = ok.iter().filter(|r| r.converged).count();
        let mut freq = vec![vec![0.0; num_l]; num_k];
        for r in &ok {
            for &(k, l) in &r.matching {
                freq[k][l] += 1.0;
            }
        }
        let n = ok.len().max(1) as f64;
        freq.iter_mut().flatten().for_each(|f| *f /= n);
        AggregateStats {
            replications: records.len(),
            failed_runs: records.len() - ok.len(),
            converged,
            convergence_rate: converged as f64 / n,
            mean_rounds: stats::mean(&rounds),
            median_rounds: stats::median(&rounds),
            std_rounds: stats::std_dev(&rounds),
            mean_pu_utility: stats::mean(&pu),
            mean_su_utility: stats::mean(&su),
            match_frequency: freq,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub stats: AggregateStats,
}

fn record(seed: u64, market: &Market, outcome: RunOutcome, started: Instant) -> RunRecord {
    let state = &outcome.state;
    let matching: Vec<(usize, usize)> = state.matching.pairs().collect();
    let (pu_sum, su_sum) = match market {
        Market::Tu(_) => (
            matching.iter().map(|&(k, _)| state.a[k]).sum(),
            matching.iter().map(|&(_, l)| state.b[l]).sum(),
        ),
        Market::Radio(m) => matching
            .iter()
            .filter_map(|&(k, l)| state.points[k].map(|p| m.utilities(k, l, &p)))
            .fold((0.0, 0.0), |acc, (u, v)| (acc.0 + u, acc.1 + v)),
    };
    RunRecord {
        seed,
        converged: outcome.converged,
        rounds: outcome.rounds,
        matching,
        a: state.a.clone(),
        b: state.b.clone(),
        points: state.points.clone(),
        pu_utility_sum: pu_sum,
        su_utility_sum: su_sum,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        error: None,
        trace: outcome.trace,
    }
}

/// Runs one replication with run seed `seed` on `market`.
pub fn run_once(config: &ExperimentConfig, market: &Market, seed: u64) -> Result<RunRecord> {
    let started = Instant::now();
    let (num_k, num_l) = market.dims();
    let blma = config.blma(num_k, num_l, seed);
    let initial = MarketState::new(num_k, num_l, config.initial_aspiration);
    let trace = config.trace;
    let outcome = match (market, &config.negotiator) {
        (Market::Tu(inst), NegotiatorSpec::Tu) => {
            run_blma(initial, &blma, inst, &TuNegotiator::new(inst), trace)
        }
        (Market::Radio(m), NegotiatorSpec::Blma1) => run_blma(
            initial,
            &blma,
            &m.oracle(TimeDomain::Full),
            &Blma1::new(m)?,
            trace,
        ),
        (Market::Radio(m), NegotiatorSpec::Blma2) => run_blma(
            initial,
            &blma,
            &m.oracle(TimeDomain::Full),
            &Blma2::new(m),
            trace,
        ),
        (Market::Radio(m), NegotiatorSpec::OneD { tau_fixed }) => {
            let neg = OneD::new(m, *tau_fixed)?;
            run_blma(
                initial,
                &blma,
                &m.oracle(TimeDomain::Fixed(*tau_fixed)),
                &neg,
                trace,
            )
        }
        (_, spec) => {
            return Err(Error::Incompatible {
                negotiator: spec.name().into(),
                reason: "market type does not match".into(),
            })
        }
    };
    Ok(record(seed, market, outcome, started))
}

/// Runs all replications (in parallel) and aggregates them in seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let shared = config.market.build(None)?;
    let (num_k, num_l) = shared.dims();
    let records: Vec<RunRecord> = (0..config.replications)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            let run = if config.redraw_topology {
                config
                    .market
                    .build(Some(i))
                    .and_then(|m| run_once(config, &m, seed))
            } else {
                run_once(config, &shared, seed)
            };
            run.unwrap_or_else(|e| RunRecord::failed(seed, e))
        })
        .collect();
    let stats = AggregateStats::from_records(&records, num_k, num_l);
    Ok(ExperimentResult {
        config: config.clone(),
        records,
        stats,
    })
}

/// Stability verdicts for a final state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// The market's own agreement function.
    pub stable: bool,
    /// Brute-force grid agreement function (cognitive-radio markets only).
    pub grid_stable: Option<bool>,
}

/// Checks ε-pairwise stability of `state` on `market`, restricted to the
/// time shares in `domain`.
pub fn verify(
    market: &Market,
    state: &MarketState,
    epsilon: f64,
    domain: TimeDomain,
) -> Result<Verdict> {
    let (num_k, num_l) = market.dims();
    if state.num_k() != num_k || state.num_l() != num_l || !state.is_valid() {
        return Err(Error::Schema(format!(
            "state does not fit a {num_k}x{num_l} market"
        )));
    }
    Ok(match market {
        Market::Tu(inst) => Verdict {
            stable: is_epsilon_pairwise_stable(state, inst, epsilon),
            grid_stable: None,
        },
        Market::Radio(m) => {
            let grid = GridOracle::new(m, crate::radio::oracle::BRUTE_FORCE_GRID, domain);
            debug_assert_eq!(grid.num_k(), num_k);
            Verdict {
                stable: is_epsilon_pairwise_stable(state, &m.oracle(domain), epsilon),
                grid_stable: Some(is_epsilon_pairwise_stable(state, &grid, epsilon)),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::MarketSource;
    use crate::tu::TuInstance;

    fn tu_config(reps: u64) -> ExperimentConfig {
        let inst = TuInstance::from_surplus(vec![vec![3.0, 1.0], vec![2.0, 2.5]]);
        let mut c = ExperimentConfig::new(MarketSource::Tu(inst), NegotiatorSpec::Tu);
        c.replications = reps;
        c.seed = 40;
        c
    }

    #[test]
    fn seeds_are_consecutive_and_ordered() {
        let r = run_experiment(&tu_config(6)).unwrap();
        let seeds: Vec<u64> = r.records.iter().map(|x| x.seed).collect();
        assert_eq!(seeds, (40..46).collect::<Vec<_>>());
        assert_eq!(r.stats.replications, 6);
        assert_eq!(r.stats.converged, 6);
    }

    #[test]
    fn deterministic_across_calls() {
        let a = run_experiment(&tu_config(5)).unwrap();
        let b = run_experiment(&tu_config(5)).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(
                (x.rounds, &x.matching, &x.a, &x.b),
                (y.rounds, &y.matching, &y.a, &y.b)
            );
        }
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn converged_runs_verify() {
        let c = tu_config(4);
        let market = c.market.build(None).unwrap();
        for r in run_experiment(&c).unwrap().records {
            assert!(r.converged);
            assert!(
                verify(&market, &r.state(), c.epsilon, TimeDomain::Full)
                    .unwrap()
                    .stable
            );
        }
    }

    #[test]
    fn trace_has_rounds_plus_one_rows() {
        let mut c = tu_config(1);
        c.trace = true;
        let r = &run_experiment(&c).unwrap().records[0];
        assert_eq!(r.trace.as_ref().unwrap().len() as u64, r.rounds + 1);
    }

    #[test]
    fn aggregate_over_known_records() {
        let mut c = tu_config(2);
        c.round_cap = 1;
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.stats.converged, 0);
        assert_eq!(r.stats.mean_rounds, 1.0);
        assert_eq!(r.stats.std_rounds, 0.0);
    }
}
