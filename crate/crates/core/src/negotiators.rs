//! Negotiators for cognitive-radio markets.
//!
//! * [`Blma1`]: both sides make a random offer on their own contour at
//!   aspiration + ε; the match point is drawn on the segment between them.
//! * [`Blma2`]: a random anchor fixes either `τ` or `P`; the two sides
//!   solve for their thresholds on the other coordinate.
//! * [`OneD`]: power-only negotiation at a fixed time share.
//!
//! All three floor the utilities at the match point onto the δ-grid and
//! return that point with the new aspirations.

use crate::engine::{Agreement, Negotiation, Negotiator, ResourcePoint, Steps};
use crate::error::{Error, Result};
use crate::grid::{at_least, floor_delta};
use crate::radio::market::CognitiveMarket;
use crate::radio::model::{PairUtilities, UtilityModel};
use crate::roots;
use rand::{Rng, RngCore};

pub const DEFAULT_TAU_FIXED: f64 = 0.1;
const CONTOUR_REJECTIONS: usize = 64;

/// Whose iso-utility contour to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Contour {
    Pu,
    Su,
}

fn value(pair: &PairUtilities, side: Contour, pt: &ResourcePoint) -> f64 {
    match side {
        Contour::Pu => pair.pu_utility(pt),
        Contour::Su => pair.su_utility(pt),
    }
}

/// Whether `target` is reachable at time share `tau` inside the box. The PU
/// does best at the power cap, the SU at zero power.
fn achievable(pair: &PairUtilities, side: Contour, tau: f64, target: f64) -> bool {
    let cap = pair.power_cap(tau);
    if !cap.is_finite() {
        return false;
    }
    let power = match side {
        Contour::Pu => cap,
        Contour::Su => 0.0,
    };
    value(pair, side, &ResourcePoint::new(tau, power)) >= target
}

/// Power on the contour `value = target` at `tau`, on the side that meets
/// the target.
fn solve_power(pair: &PairUtilities, side: Contour, tau: f64, target: f64) -> Option<f64> {
    let cap = pair.power_cap(tau);
    if !cap.is_finite() {
        return None;
    }
    let at = |p: f64| value(pair, side, &ResourcePoint::new(tau, p)) >= target;
    match side {
        Contour::Pu => roots::first_true(0.0, cap, at),
        Contour::Su => roots::last_true(0.0, cap, at),
    }
}

/// Random point on the `target` contour of one side's utility inside the
/// feasibility box, `τ` uniform on the contour's time interval. `None` when
/// the target is out of reach.
pub fn contour_sample(
    pair: &PairUtilities,
    side: Contour,
    target: f64,
    n_sweep: usize,
    rng: &mut dyn RngCore,
) -> Option<ResourcePoint> {
    debug_assert!(target > 0.0);
    let n = n_sweep.max(2);
    let step = 1.0 / (n - 1) as f64;
    let ok = |tau: f64| achievable(pair, side, tau, target);
    let hits: Vec<usize> = (0..n).filter(|&i| ok(i as f64 * step)).collect();
    let (&first, &last) = (hits.first()?, hits.last()?);
    let tau_lo = if first == 0 {
        0.0
    } else {
        roots::first_true((first - 1) as f64 * step, first as f64 * step, ok)?
    };
    let tau_hi = if last == n - 1 {
        1.0
    } else {
        roots::last_true(last as f64 * step, (last + 1) as f64 * step, ok)?
    };
    for _ in 0..CONTOUR_REJECTIONS {
        let tau = tau_lo + (tau_hi - tau_lo) * rng.random::<f64>();
        if !ok(tau) {
            continue;
        }
        if let Some(power) = solve_power(pair, side, tau, target) {
            return Some(ResourcePoint::new(tau, power));
        }
    }
    None
}

/// Floors the utilities at `point` and accepts only when both clear their
/// targets.
fn settle(
    pair: &PairUtilities,
    point: ResourcePoint,
    target_a: f64,
    target_b: f64,
    delta: f64,
) -> Negotiation {
    let a = floor_delta(pair.pu_utility(&point), delta);
    let b = floor_delta(pair.su_utility(&point), delta);
    let sound = at_least(a, target_a) && at_least(b, target_b);
    debug_assert!(
        sound,
        "match point {point:?} misses targets ({target_a}, {target_b})"
    );
    if sound {
        Negotiation::Agreement(Agreement {
            a,
            b,
            point: Some(point),
        })
    } else {
        Negotiation::NoAgreement
    }
}

/// Contour offers and a segment match point. Model A only.
#[derive(Clone, Copy, Debug)]
pub struct Blma1<'a> {
    market: &'a CognitiveMarket,
}

impl<'a> Blma1<'a> {
    pub fn new(market: &'a CognitiveMarket) -> Result<Self> {
        if market.model() != UtilityModel::A {
            return Err(Error::Incompatible {
                negotiator: "blma1".into(),
                reason: "contour offers need the model A utilities".into(),
            });
        }
        Ok(Blma1 { market })
    }
}

impl Negotiator for Blma1<'_> {
    fn negotiate(
        &self,
        k: usize,
        l: usize,
        a_k: f64,
        b_l: f64,
        steps: Steps,
        rng: &mut dyn RngCore,
    ) -> Negotiation {
        let pair = self.market.pair(k, l);
        let n = self.market.n_sweep();
        let (ta, tb) = (a_k + steps.epsilon, b_l + steps.epsilon);
        let Some(pu_offer) = contour_sample(pair, Contour::Pu, ta, n, rng) else {
            return Negotiation::NoAgreement;
        };
        let Some(su_offer) = contour_sample(pair, Contour::Su, tb, n, rng) else {
            return Negotiation::NoAgreement;
        };
        let pu_ok = at_least(floor_delta(pair.pu_utility(&su_offer), steps.delta), ta);
        let su_ok = at_least(floor_delta(pair.su_utility(&pu_offer), steps.delta), tb);
        if !(pu_ok && su_ok) {
            return Negotiation::NoAgreement;
        }
        let t = rng.random::<f64>();
        let point = ResourcePoint::new(
            pu_offer.tau + t * (su_offer.tau - pu_offer.tau),
            pu_offer.power + t * (su_offer.power - pu_offer.power),
        );
        settle(pair, point, ta, tb, steps.delta)
    }
}

/// Power-only negotiation at time share `tau`: the PU's smallest acceptable
/// power against the SU's largest.
fn negotiate_power(
    pair: &PairUtilities,
    tau: f64,
    ta: f64,
    tb: f64,
    delta: f64,
    rng: &mut dyn RngCore,
) -> Negotiation {
    let Some(p_pu) = solve_power(pair, Contour::Pu, tau, ta) else {
        return Negotiation::NoAgreement;
    };
    let Some(p_su) = solve_power(pair, Contour::Su, tau, tb) else {
        return Negotiation::NoAgreement;
    };
    let pu_ok = at_least(
        floor_delta(pair.pu_utility(&ResourcePoint::new(tau, p_su)), delta),
        ta,
    );
    let su_ok = at_least(
        floor_delta(pair.su_utility(&ResourcePoint::new(tau, p_pu)), delta),
        tb,
    );
    if !(pu_ok && su_ok) {
        return Negotiation::NoAgreement;
    }
    let (lo, hi) = if p_pu <= p_su {
        (p_pu, p_su)
    } else {
        (p_su, p_pu)
    };
    let power = lo + (hi - lo) * rng.random::<f64>();
    settle(pair, ResourcePoint::new(tau, power), ta, tb, delta)
}

/// Time-only negotiation at relay power `power`: the PU's largest
/// acceptable `τ` against the SU's smallest.
fn negotiate_time(
    pair: &PairUtilities,
    power: f64,
    ta: f64,
    tb: f64,
    delta: f64,
    rng: &mut dyn RngCore,
) -> Negotiation {
    let tau_min = pair.min_time_for_power(power);
    if !(tau_min <= 1.0) {
        return Negotiation::NoAgreement;
    }
    let u = |tau: f64| pair.pu_utility(&ResourcePoint::new(tau, power));
    let v = |tau: f64| pair.su_utility(&ResourcePoint::new(tau, power));
    let Some(tau_pu) = roots::last_true(tau_min, 1.0, |t| u(t) >= ta) else {
        return Negotiation::NoAgreement;
    };
    let Some(tau_su) = roots::first_true(tau_min, 1.0, |t| v(t) >= tb) else {
        return Negotiation::NoAgreement;
    };
    let pu_ok = at_least(floor_delta(u(tau_su), delta), ta);
    let su_ok = at_least(floor_delta(v(tau_pu), delta), tb);
    if !(pu_ok && su_ok) {
        return Negotiation::NoAgreement;
    }
    let (lo, hi) = if tau_su <= tau_pu {
        (tau_su, tau_pu)
    } else {
        (tau_pu, tau_su)
    };
    let tau = lo + (hi - lo) * rng.random::<f64>();
    settle(pair, ResourcePoint::new(tau, power), ta, tb, delta)
}

/// Random anchor, then a coin decides which coordinate is negotiated.
#[derive(Clone, Copy, Debug)]
pub struct Blma2<'a> {
    market: &'a CognitiveMarket,
}

impl<'a> Blma2<'a> {
    pub fn new(market: &'a CognitiveMarket) -> Self {
        Blma2 { market }
    }
}

impl Negotiator for Blma2<'_> {
    fn negotiate(
        &self,
        k: usize,
        l: usize,
        a_k: f64,
        b_l: f64,
        steps: Steps,
        rng: &mut dyn RngCore,
    ) -> Negotiation {
        let pair = self.market.pair(k, l);
        let (ta, tb) = (a_k + steps.epsilon, b_l + steps.epsilon);
        let tau0 = rng.random::<f64>();
        let power0 = pair.power_cap(tau0) * rng.random::<f64>();
        if rng.random::<f64>() < 0.5 {
            negotiate_power(pair, tau0, ta, tb, steps.delta, rng)
        } else {
            negotiate_time(pair, power0, ta, tb, steps.delta, rng)
        }
    }
}

/// Power-only negotiation with every time offer fixed at `tau`.
#[derive(Clone, Copy, Debug)]
pub struct OneD<'a> {
    market: &'a CognitiveMarket,
    tau: f64,
}

impl<'a> OneD<'a> {
    pub fn new(market: &'a CognitiveMarket, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_fixed must lie in (0, 1), got {tau}"
            )));
        }
        Ok(OneD { market, tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

impl Negotiator for OneD<'_> {
    fn negotiate(
        &self,
        k: usize,
        l: usize,
        a_k: f64,
        b_l: f64,
        steps: Steps,
        rng: &mut dyn RngCore,
    ) -> Negotiation {
        let pair = self.market.pair(k, l);
        negotiate_power(
            pair,
            self.tau,
            a_k + steps.epsilon,
            b_l + steps.epsilon,
            steps.delta,
            rng,
        )
    }
}
