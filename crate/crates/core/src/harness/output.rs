//! Files written by `blma run`: `runs.csv`, `summary.json`, one final-state
//! JSON per run under `states/`, and per-run traces under `traces/`.

use super::config::ExperimentConfig;
use super::experiment::{AggregateStats, ExperimentResult, RunRecord};
use crate::engine::{MarketState, ResourcePoint, TraceRow};
use crate::error::{Error, Result};
use crate::matching::Matching;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct RunRow {
    seed: u64,
    converged: bool,
    rounds: u64,
    pu_utility_sum: f64,
    su_utility_sum: f64,
    matching: String,
}

#[derive(Serialize)]
struct TraceCsvRow {
    round: u64,
    activated_k: Option<usize>,
    activated_l: Option<usize>,
    event: &'static str,
    a: String,
    b: String,
}

#[derive(Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub stats: AggregateStats,
}

/// Final state of one run, the input of `blma verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub epsilon: f64,
    /// Set when the run was restricted to one time share.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_fixed: Option<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub matching: Vec<(usize, usize)>,
    #[serde(default)]
    pub points: Vec<Option<ResourcePoint>>,
}

impl StateFile {
    pub fn to_state(&self) -> Result<MarketState> {
        let (num_k, num_l) = (self.a.len(), self.b.len());
        let matching = Matching::from_pairs(num_k, num_l, &self.matching).ok_or_else(|| {
            Error::Schema("matching is not a one-to-one set of in-range pairs".into())
        })?;
        let mut state = MarketState::with_aspirations(self.a.clone(), self.b.clone());
        state.matching = matching;
        if !self.points.is_empty() {
            if self.points.len() != num_k {
                return Err(Error::Schema(
                    "points needs one entry per K-side agent".into(),
                ));
            }
            state.points = self.points.clone();
        }
        Ok(state)
    }

    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }
}

/// `k:l` pairs joined by `;`.
pub fn format_matching(pairs: &[(usize, usize)]) -> String {
    pairs
        .iter()
        .map(|(k, l)| format!("{k}:{l}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn join(xs: &[f64]) -> String {
    let mut s = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        write!(s, "{x}").unwrap();
    }
    s
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in records {
        w.serialize(RunRow {
            seed: r.seed,
            converged: r.converged,
            rounds: r.rounds,
            pu_utility_sum: r.pu_utility_sum,
            su_utility_sum: r.su_utility_sum,
            matching: format_matching(&r.matching),
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for row in trace {
        w.serialize(TraceCsvRow {
            round: row.round,
            activated_k: row.activated.map(|p| p.0),
            activated_l: row.activated.map(|p| p.1),
            event: match row.event {
                None => "init",
                Some(crate::engine::StepEvent::Match) => "match",
                Some(crate::engine::StepEvent::Decay) => "decay",
                Some(crate::engine::StepEvent::Noop) => "noop",
            },
            a: join(&row.a),
            b: join(&row.b),
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes every output file into `dir` and returns the paths written.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let runs = dir.join("runs.csv");
    write_runs_csv(&runs, &result.records)?;
    written.push(runs);

    let summary = dir.join("summary.json");
    write_json(
        &summary,
        &Summary {
            config: result.config.clone(),
            stats: result.stats.clone(),
        },
    )?;
    written.push(summary);

    let states = dir.join("states");
    std::fs::create_dir_all(&states).map_err(|e| Error::io(&states, e))?;
    let tau_fixed = match result.config.negotiator {
        super::config::NegotiatorSpec::OneD { tau_fixed } => Some(tau_fixed),
        _ => None,
    };
    for r in result.records.iter().filter(|r| r.error.is_none()) {
        let path = states.join(format!("state_{}.json", r.seed));
        write_json(
            &path,
            &StateFile {
                epsilon: result.config.epsilon,
                tau_fixed,
                a: r.a.clone(),
                b: r.b.clone(),
                matching: r.matching.clone(),
                points: r.points.clone(),
            },
        )?;
        written.push(path);
    }

    if result.records.iter().any(|r| r.trace.is_some()) {
        let traces = dir.join("traces");
        std::fs::create_dir_all(&traces).map_err(|e| Error::io(&traces, e))?;
        for r in &result.records {
            if let Some(trace) = &r.trace {
                let path = traces.join(format!("trace_{}.csv", r.seed));
                write_trace_csv(&path, trace)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
