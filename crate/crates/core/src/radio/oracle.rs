//! Agreement oracles for cognitive-radio pairs.
//!
//! [`agreement_nonempty`] sweeps `τ`, compares the smallest power the PU
//! accepts with the largest power the SU accepts, and refines the best sweep
//! point with a golden-section search. [`GridOracle`] is the brute-force
//! reference on a fixed grid over the feasibility box.

use super::market::CognitiveMarket;
use super::model::PairUtilities;
use crate::engine::{AgreementOracle, ResourcePoint};
use crate::grid::at_least;

/// Side length of the brute-force reference grid.
pub const BRUTE_FORCE_GRID: usize = 512;

const GOLDEN_ITERS: usize = 60;

/// Time shares a negotiator may use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeDomain {
    Full,
    Fixed(f64),
}

impl TimeDomain {
    pub fn contains(&self, tau: f64) -> bool {
        match *self {
            TimeDomain::Full => (0.0..=1.0).contains(&tau),
            TimeDomain::Fixed(t) => (tau - t).abs() <= 1e-12,
        }
    }
}

/// `P_max(τ) − P_min(τ)`; nonnegative iff some power at `τ` meets both
/// aspirations. `−∞` when either side has no admissible power.
pub fn margin(pair: &PairUtilities, tau: f64, a: f64, b: f64) -> f64 {
    let lo = pair.min_power_for_pu(tau, a);
    if lo == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let hi = pair.max_power_for_su(tau, b);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi - lo
}

fn golden_max(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f1.max(f2);
    for _ in 0..GOLDEN_ITERS {
        if best >= 0.0 {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
            best = best.max(f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
            best = best.max(f2);
        }
    }
    best
}

/// Whether `{(τ, P) in the box, τ in domain : u ≥ a, v ≥ b}` is nonempty.
pub fn agreement_nonempty(
    pair: &PairUtilities,
    domain: TimeDomain,
    n_sweep: usize,
    a: f64,
    b: f64,
) -> bool {
    if a <= 0.0 && b <= 0.0 {
        return true;
    }
    match domain {
        TimeDomain::Fixed(tau) => margin(pair, tau, a, b) >= 0.0,
        TimeDomain::Full => {
            let n = n_sweep.max(2);
            let step = 1.0 / (n - 1) as f64;
            let mut best = (f64::NEG_INFINITY, 0);
            for i in 0..n {
                let m = margin(pair, i as f64 * step, a, b);
                if m >= 0.0 {
                    return true;
                }
                if m > best.0 {
                    best = (m, i);
                }
            }
            if best.0 == f64::NEG_INFINITY {
                return false;
            }
            let i = best.1;
            let lo = i.saturating_sub(1) as f64 * step;
            let hi = ((i + 1).min(n - 1)) as f64 * step;
            golden_max(lo, hi, |tau| margin(pair, tau, a, b)) >= 0.0
        }
    }
}

/// Whether the stored agreement point still certifies `(a, b)`.
pub fn point_witnesses(
    pair: &PairUtilities,
    domain: TimeDomain,
    point: &ResourcePoint,
    a: f64,
    b: f64,
) -> bool {
    domain.contains(point.tau)
        && pair.in_box(point)
        && at_least(pair.pu_utility(point), a)
        && at_least(pair.su_utility(point), b)
}

/// Sweep-backed agreement function of a whole market.
#[derive(Clone, Copy, Debug)]
pub struct SweepOracle<'a> {
    market: &'a CognitiveMarket,
    domain: TimeDomain,
}

impl<'a> SweepOracle<'a> {
    pub fn new(market: &'a CognitiveMarket, domain: TimeDomain) -> Self {
        SweepOracle { market, domain }
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }
}

impl AgreementOracle for SweepOracle<'_> {
    fn num_k(&self) -> usize {
        self.market.num_k()
    }

    fn num_l(&self) -> usize {
        self.market.num_l()
    }

    fn agrees(&self, k: usize, l: usize, a: f64, b: f64) -> bool {
        agreement_nonempty(
            self.market.pair(k, l),
            self.domain,
            self.market.n_sweep(),
            a,
            b,
        )
    }

    fn witnesses(&self, k: usize, l: usize, point: &ResourcePoint, a: f64, b: f64) -> bool {
        point_witnesses(self.market.pair(k, l), self.domain, point, a, b)
    }

    fn gamma_bound(&self) -> f64 {
        self.market.gamma()
    }
}

/// Calls `f(column, row, point)` for every grid point in the box. Each `τ`
/// column spans `[0, P̄(τ)]`; a column with unbounded cap holds only `P = 0`.
fn for_each_grid_point(
    pair: &PairUtilities,
    n: usize,
    domain: TimeDomain,
    mut f: impl FnMut(usize, usize, ResourcePoint),
) {
    let n = n.max(2);
    let taus: Vec<f64> = match domain {
        TimeDomain::Full => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
        TimeDomain::Fixed(t) => vec![t],
    };
    for (i, &tau) in taus.iter().enumerate() {
        let cap = pair.power_cap(tau);
        if cap.is_finite() {
            for j in 0..n {
                f(
                    i,
                    j,
                    ResourcePoint::new(tau, cap * j as f64 / (n - 1) as f64),
                );
            }
        } else {
            f(i, 0, ResourcePoint::new(tau, 0.0));
        }
    }
}

/// Largest PU and SU utilities on the brute-force grid.
pub fn grid_max_utilities(pair: &PairUtilities, n: usize, domain: TimeDomain) -> (f64, f64) {
    let (mut u_max, mut v_max) = (0.0f64, 0.0f64);
    for_each_grid_point(pair, n, domain, |_, _, pt| {
        u_max = u_max.max(pair.pu_utility(&pt));
        v_max = v_max.max(pair.su_utility(&pt));
    });
    (u_max, v_max)
}

/// Pareto frontier of the `(u, v)` values on the grid of one pair.
#[derive(Clone, Debug)]
pub struct GridFrontier {
    /// Sorted by `u` descending, `v` strictly ascending.
    frontier: Vec<(f64, f64)>,
    cell_u: f64,
    cell_v: f64,
}

impl GridFrontier {
    pub fn build(pair: &PairUtilities, n: usize, domain: TimeDomain) -> Self {
        let n = n.max(2);
        let mut values: Vec<(f64, f64)> = Vec::with_capacity(n * n);
        let mut columns: Vec<Vec<(f64, f64)>> = Vec::new();
        for_each_grid_point(pair, n, domain, |i, _, pt| {
            if columns.len() <= i {
                columns.push(Vec::with_capacity(n));
            }
            let uv = (pair.pu_utility(&pt), pair.su_utility(&pt));
            columns[i].push(uv);
            values.push(uv);
        });
        let (mut cell_u, mut cell_v) = (0.0f64, 0.0f64);
        let mut widen = |x: (f64, f64), y: (f64, f64)| {
            cell_u = cell_u.max((x.0 - y.0).abs());
            cell_v = cell_v.max((x.1 - y.1).abs());
        };
        for (i, col) in columns.iter().enumerate() {
            for w in col.windows(2) {
                widen(w[0], w[1]);
            }
            if let Some(next) = columns.get(i + 1) {
                for (x, y) in col.iter().zip(next) {
                    widen(*x, *y);
                }
            }
        }
        values.sort_by(|x, y| y.0.total_cmp(&x.0).then(y.1.total_cmp(&x.1)));
        let mut frontier: Vec<(f64, f64)> = Vec::new();
        for (u, v) in values {
            if frontier.last().is_none_or(|last| v > last.1) {
                frontier.push((u, v));
            }
        }
        GridFrontier {
            frontier,
            cell_u,
            cell_v,
        }
    }

    /// Whether some grid point has `u ≥ a` and `v ≥ b`.
    pub fn agrees(&self, a: f64, b: f64) -> bool {
        let count = self.frontier.partition_point(|&(u, _)| u >= a);
        count > 0 && self.frontier[count - 1].1 >= b
    }

    /// Largest change of `u` and of `v` between neighbouring grid points.
    pub fn cell(&self) -> (f64, f64) {
        (self.cell_u, self.cell_v)
    }

    pub fn max_utilities(&self) -> (f64, f64) {
        let u = self.frontier.first().map_or(0.0, |p| p.0);
        let v = self.frontier.last().map_or(0.0, |p| p.1);
        (u, v)
    }
}

/// Brute-force agreement function of a whole market.
#[derive(Clone, Debug)]
pub struct GridOracle<'a> {
    market: &'a CognitiveMarket,
    domain: TimeDomain,
    frontiers: Vec<GridFrontier>,
}

impl<'a> GridOracle<'a> {
    pub fn new(market: &'a CognitiveMarket, n: usize, domain: TimeDomain) -> Self {
        let mut frontiers = Vec::with_capacity(market.num_k() * market.num_l());
        for k in 0..market.num_k() {
            for l in 0..market.num_l() {
                frontiers.push(GridFrontier::build(market.pair(k, l), n, domain));
            }
        }
        GridOracle {
            market,
            domain,
            frontiers,
        }
    }

    pub fn frontier(&self, k: usize, l: usize) -> &GridFrontier {
        &self.frontiers[k * self.market.num_l() + l]
    }
}

impl AgreementOracle for GridOracle<'_> {
    fn num_k(&self) -> usize {
        self.market.num_k()
    }

    fn num_l(&self) -> usize {
        self.market.num_l()
    }

    fn agrees(&self, k: usize, l: usize, a: f64, b: f64) -> bool {
        (a <= 0.0 && b <= 0.0) || self.frontier(k, l).agrees(a, b)
    }

    fn witnesses(&self, k: usize, l: usize, point: &ResourcePoint, a: f64, b: f64) -> bool {
        point_witnesses(self.market.pair(k, l), self.domain, point, a, b)
    }

    fn gamma_bound(&self) -> f64 {
        let max = self
            .frontiers
            .iter()
            .map(|f| {
                let (u, v) = f.max_utilities();
                u.max(v)
            })
            .fold(0.0, f64::max);
        max * 1.01
    }
}
