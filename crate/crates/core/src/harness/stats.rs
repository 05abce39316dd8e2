//! Summary statistics and bootstrap intervals.

use crate::engine::seeded_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Percentile bootstrap interval for `mean(x) − mean(y)`, resampling the
/// two samples independently.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl BootstrapCi {
    /// Two-sided test of equal means at the interval's level.
    pub fn rejects_equality(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

pub fn bootstrap_mean_diff(
    x: &[f64],
    y: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> BootstrapCi {
    assert!(
        !x.is_empty() && !y.is_empty(),
        "bootstrap needs nonempty samples"
    );
    let mut rng = seeded_rng(seed);
    let resample = |s: &[f64], rng: &mut crate::engine::SimRng| {
        (0..s.len())
            .map(|_| s[rng.random_range(0..s.len())])
            .sum::<f64>()
            / s.len() as f64
    };
    let mut diffs: Vec<f64> = (0..resamples)
        .map(|_| resample(x, &mut rng) - resample(y, &mut rng))
        .collect();
    diffs.sort_by(f64::total_cmp);
    let tail = (1.0 - confidence) / 2.0;
    let pick = |q: f64| {
        let idx = (q * (diffs.len() - 1) as f64).round() as usize;
        diffs[idx.min(diffs.len() - 1)]
    };
    BootstrapCi {
        estimate: mean(x) - mean(y),
        lo: pick(tail),
        hi: pick(1.0 - tail),
    }
}
