//! Rate and utility formulas for cooperative spectrum sharing.
//!
//! A primary user (PU) leases a share `τ` of its slot to a secondary user
//! (SU) in exchange for the SU relaying the PU's traffic at power `P`. Two
//! utility systems are provided:
//!
//! * model A: the relay phase stretches the PU slot by `1 + τ`, and the SU
//!   pays a linear price `c_l` per unit of power spent;
//! * model B: the relay phases share the slot with the SU phase (`1 − τ`),
//!   and the SU is bound by a total energy budget `P_T`.
//!
//! All rates are in bits (base-2 logarithms), powers and noise are linear.

use crate::engine::ResourcePoint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Distances below this are clamped before inverting.
pub const DIST_MIN: f64 = 1e-3;

/// Large-scale gain between two placements: the inverse distance.
pub fn channel_gain(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = (a[0] - b[0]).hypot(a[1] - b[1]);
    1.0 / d.max(DIST_MIN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UtilityModel {
    A,
    B,
}

/// Amplitude gains of the four links involved in a PU–SU pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelGains {
    /// PU transmitter to PU receiver.
    pub h_k: f64,
    /// PU transmitter to SU transmitter.
    pub h_kl: f64,
    /// SU transmitter to PU receiver.
    pub h_lk: f64,
    /// SU transmitter to SU receiver.
    pub h_l: f64,
}

impl ChannelGains {
    /// The SU can decode the PU broadcast only when it hears it at least as
    /// well as the PU's own receiver.
    pub fn decodes(&self) -> bool {
        self.h_kl >= self.h_k
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PuParams {
    pub power: f64,
    pub sigma2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuParams {
    /// Own-link transmit power (model A).
    pub own_power: f64,
    /// Price per unit of power (model A).
    pub cost: f64,
    /// Total power budget (model B).
    pub total_power: f64,
    pub sigma2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("relay energy {relay_energy} exceeds the SU power budget {budget}")]
pub struct InfeasibleEnergy {
    pub relay_energy: f64,
    pub budget: f64,
}

/// `log2(1 + P_k h_k² / σ²)`.
pub fn pu_direct_rate(pu: &PuParams, h_k: f64) -> f64 {
    (pu.power * h_k * h_k / pu.sigma2).ln_1p() / std::f64::consts::LN_2
}

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

#[inline]
fn pu_gain_a(direct: f64, sigma2: f64, pt: &ResourcePoint) -> f64 {
    ((direct + log2_1p(pt.power / sigma2)) / (2.0 * (1.0 + pt.tau)) - direct).max(0.0)
}

#[inline]
fn pu_gain_b(direct: f64, sigma2: f64, pt: &ResourcePoint) -> f64 {
    ((1.0 - pt.tau) / 2.0 * (direct + log2_1p(pt.power / sigma2)) - direct).max(0.0)
}

#[inline]
fn su_gain_a(own_rate: f64, cost: f64, own_power: f64, h_lk2: f64, pt: &ResourcePoint) -> f64 {
    (pt.tau * own_rate - cost * (pt.power / (2.0 * h_lk2) + pt.tau * own_power)).max(0.0)
}

#[inline]
fn power_cap_a(own_rate: f64, cost: f64, own_power: f64, h_lk2: f64, tau: f64) -> f64 {
    (2.0 * h_lk2 * (tau * own_rate / cost - tau * own_power)).max(0.0)
}

/// Remaining own-link power after relaying, or the excess when the budget
/// is exceeded.
#[inline]
fn residual_power_b(
    total: f64,
    h_lk2: f64,
    pt: &ResourcePoint,
) -> Result<Option<f64>, InfeasibleEnergy> {
    let relay_energy = (1.0 - pt.tau) * pt.power / (2.0 * h_lk2);
    if relay_energy > total * (1.0 + 1e-12) {
        return Err(InfeasibleEnergy {
            relay_energy,
            budget: total,
        });
    }
    if pt.tau <= 0.0 {
        return Ok(None);
    }
    Ok(Some(((total - relay_energy) / pt.tau).max(0.0)))
}

fn own_rate(su: &SuParams, gains: &ChannelGains) -> f64 {
    log2_1p(su.own_power * gains.h_l * gains.h_l / su.sigma2)
}

/// PU utility under model A: the cooperative rate gain over the direct link,
/// zero when the SU is outside the decoding set.
pub fn pu_utility_a(pu: &PuParams, gains: &ChannelGains, pt: &ResourcePoint) -> f64 {
    if !gains.decodes() {
        return 0.0;
    }
    pu_gain_a(pu_direct_rate(pu, gains.h_k), pu.sigma2, pt)
}

/// SU utility under model A: rate earned during `τ` minus the priced power
/// spent relaying and transmitting.
pub fn su_utility_a(su: &SuParams, gains: &ChannelGains, pt: &ResourcePoint) -> f64 {
    su_gain_a(
        own_rate(su, gains),
        su.cost,
        su.own_power,
        gains.h_lk * gains.h_lk,
        pt,
    )
}

/// The relay power at which the model-A SU utility drops to zero for a given
/// `τ`; the upper edge of the feasible region.
pub fn max_power_a(su: &SuParams, gains: &ChannelGains, tau: f64) -> f64 {
    power_cap_a(
        own_rate(su, gains),
        su.cost,
        su.own_power,
        gains.h_lk * gains.h_lk,
        tau,
    )
}

/// PU utility under model B.
pub fn pu_utility_b(pu: &PuParams, gains: &ChannelGains, pt: &ResourcePoint) -> f64 {
    if !gains.decodes() {
        return 0.0;
    }
    pu_gain_b(pu_direct_rate(pu, gains.h_k), pu.sigma2, pt)
}

/// SU utility under model B: `τ log2(1 + P̂ h_l² / σ²)` where `P̂` is the power
/// left for the SU's own link. Zero at `τ = 0`.
pub fn su_utility_b(
    su: &SuParams,
    gains: &ChannelGains,
    pt: &ResourcePoint,
) -> Result<f64, InfeasibleEnergy> {
    let h_l2 = gains.h_l * gains.h_l;
    Ok(
        match residual_power_b(su.total_power, gains.h_lk * gains.h_lk, pt)? {
            None => 0.0,
            Some(p_hat) => pt.tau * log2_1p(p_hat * h_l2 / su.sigma2),
        },
    )
}

/// Everything one PU–SU pair needs to evaluate its utilities, precomputed.
///
/// `pu` is nondecreasing in `P` and nonincreasing in `τ`; `su` is the
/// opposite. Outside the feasibility box `su` evaluates to 0, which keeps it
/// continuous and monotone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairUtilities {
    pub model: UtilityModel,
    pub gains: ChannelGains,
    pub pu: PuParams,
    pub su: SuParams,
    decodes: bool,
    direct: f64,
    own_rate: f64,
    h_lk2: f64,
    h_l2: f64,
}

impl PairUtilities {
    pub fn new(model: UtilityModel, gains: ChannelGains, pu: PuParams, su: SuParams) -> Self {
        PairUtilities {
            model,
            gains,
            pu,
            su,
            decodes: gains.decodes(),
            direct: pu_direct_rate(&pu, gains.h_k),
            own_rate: own_rate(&su, &gains),
            h_lk2: gains.h_lk * gains.h_lk,
            h_l2: gains.h_l * gains.h_l,
        }
    }

    pub fn decodes(&self) -> bool {
        self.decodes
    }

    pub fn direct_rate(&self) -> f64 {
        self.direct
    }

    /// PU utility `u(τ, P)`.
    #[inline]
    pub fn pu_utility(&self, pt: &ResourcePoint) -> f64 {
        if !self.decodes {
            return 0.0;
        }
        match self.model {
            UtilityModel::A => pu_gain_a(self.direct, self.pu.sigma2, pt),
            UtilityModel::B => pu_gain_b(self.direct, self.pu.sigma2, pt),
        }
    }

    /// SU utility `v(τ, P)`, zero outside the feasibility box.
    #[inline]
    pub fn su_utility(&self, pt: &ResourcePoint) -> f64 {
        match self.model {
            UtilityModel::A => su_gain_a(
                self.own_rate,
                self.su.cost,
                self.su.own_power,
                self.h_lk2,
                pt,
            ),
            UtilityModel::B => match residual_power_b(self.su.total_power, self.h_lk2, pt) {
                Ok(Some(p_hat)) => pt.tau * log2_1p(p_hat * self.h_l2 / self.su.sigma2),
                Ok(None) | Err(_) => 0.0,
            },
        }
    }

    /// Largest feasible relay power at time share `τ` (infinite for model B
    /// at `τ = 1`, where relaying takes no time).
    #[inline]
    pub fn power_cap(&self, tau: f64) -> f64 {
        match self.model {
            UtilityModel::A => power_cap_a(
                self.own_rate,
                self.su.cost,
                self.su.own_power,
                self.h_lk2,
                tau,
            ),
            UtilityModel::B => {
                if tau >= 1.0 {
                    f64::INFINITY
                } else {
                    2.0 * self.h_lk2 * self.su.total_power / (1.0 - tau)
                }
            }
        }
    }

    pub fn in_box(&self, pt: &ResourcePoint) -> bool {
        (0.0..=1.0).contains(&pt.tau)
            && pt.power >= 0.0
            && pt.power <= self.power_cap(pt.tau) * (1.0 + 1e-12) + 1e-12
    }

    /// Smallest `P` with `u(τ, P) ≥ a`, or `+∞` when no power suffices.
    /// Closed-form inverse of the PU utility.
    pub fn min_power_for_pu(&self, tau: f64, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        if !self.decodes {
            return f64::INFINITY;
        }
        let needed_rate = match self.model {
            UtilityModel::A => 2.0 * (1.0 + tau) * (a + self.direct) - self.direct,
            UtilityModel::B => {
                if tau >= 1.0 {
                    return f64::INFINITY;
                }
                2.0 * (a + self.direct) / (1.0 - tau) - self.direct
            }
        };
        if needed_rate <= 0.0 {
            0.0
        } else {
            self.pu.sigma2 * needed_rate.exp2().max(1.0) - self.pu.sigma2
        }
    }

    /// Largest feasible `P` with `v(τ, P) ≥ b`, or `−∞` when none exists.
    /// Closed-form inverse of the SU utility.
    pub fn max_power_for_su(&self, tau: f64, b: f64) -> f64 {
        let cap = self.power_cap(tau);
        if b <= 0.0 {
            return cap;
        }
        match self.model {
            UtilityModel::A => {
                let p = 2.0
                    * self.h_lk2
                    * (tau * self.own_rate - self.su.cost * tau * self.su.own_power - b)
                    / self.su.cost;
                if p < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    p.min(cap)
                }
            }
            UtilityModel::B => {
                if tau <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let p_hat_min = self.su.sigma2 * ((b / tau).exp2() - 1.0) / self.h_l2;
                let spare = self.su.total_power - tau * p_hat_min;
                if !(spare >= 0.0) {
                    return f64::NEG_INFINITY;
                }
                if tau >= 1.0 {
                    f64::INFINITY
                } else {
                    2.0 * self.h_lk2 * spare / (1.0 - tau)
                }
            }
        }
    }

    /// Smallest `τ` at which relay power `P` fits in the box (the box widens
    /// with `τ` in both models).
    pub fn min_time_for_power(&self, power: f64) -> f64 {
        match self.model {
            UtilityModel::A => {
                let slope = 2.0 * self.h_lk2 * (self.own_rate / self.su.cost - self.su.own_power);
                if power <= 0.0 {
                    0.0
                } else if slope <= 0.0 {
                    f64::INFINITY
                } else {
                    power / slope
                }
            }
            UtilityModel::B => (1.0 - 2.0 * self.h_lk2 * self.su.total_power / power).max(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gains() -> ChannelGains {
        ChannelGains {
            h_k: 1.0,
            h_kl: 1.0,
            h_lk: 1.0,
            h_l: 1.0,
        }
    }

    const PU: PuParams = PuParams {
        power: 0.01,
        sigma2: 1.0,
    };
    const SU: SuParams = SuParams {
        own_power: 1.0,
        cost: 0.1,
        total_power: 1.0,
        sigma2: 1.0,
    };

    #[test]
    fn gain_examples() {
        assert_eq!(channel_gain([0.0, 0.0], [0.0, 1.0]), 1.0);
        assert_eq!(channel_gain([0.0, 0.0], [0.0, 0.5]), 2.0);
        assert_eq!(channel_gain([0.3, 0.3], [0.3, 0.3]), 1000.0);
    }

    #[test]
    fn direct_rate_examples() {
        assert!((pu_direct_rate(&PU, 1.0) - 1.01f64.log2()).abs() < 1e-15);
        assert!((pu_direct_rate(&PU, 1.0) - 0.0143552929770701).abs() < 1e-12);
        assert_eq!(
            pu_direct_rate(
                &PuParams {
                    power: 0.0,
                    sigma2: 1.0
                },
                1.0
            ),
            0.0
        );
        assert!(
            (pu_direct_rate(
                &PuParams {
                    power: 1.0,
                    sigma2: 1.0
                },
                1.0
            ) - 1.0)
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn pu_a_examples() {
        let g = unit_gains();
        for tau in [0.0, 0.3, 1.0] {
            assert_eq!(pu_utility_a(&PU, &g, &ResourcePoint::new(tau, 0.0)), 0.0);
        }
        let r = 1.01f64.log2();
        let want = (r + 1.0) / 2.0 - r;
        let got = pu_utility_a(&PU, &g, &ResourcePoint::new(0.0, 1.0));
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.4928224).abs() < 1e-7);
        let far = ChannelGains { h_kl: 0.5, ..g };
        assert_eq!(pu_utility_a(&PU, &far, &ResourcePoint::new(0.0, 50.0)), 0.0);
    }

    #[test]
    fn su_a_examples() {
        let g = unit_gains();
        assert_eq!(su_utility_a(&SU, &g, &ResourcePoint::new(0.0, 0.2)), 0.0);
        let v = su_utility_a(&SU, &g, &ResourcePoint::new(0.5, 0.2));
        assert!((v - 0.44).abs() < 1e-12);
        assert_eq!(su_utility_a(&SU, &g, &ResourcePoint::new(0.5, 100.0)), 0.0);
    }

    #[test]
    fn max_power_a_examples() {
        let g = unit_gains();
        assert_eq!(max_power_a(&SU, &g, 0.0), 0.0);
        let p = max_power_a(&SU, &g, 0.5);
        assert!((p - 9.0).abs() < 1e-12);
        let inner = 0.5 * 1.0 - 0.1 * (p / 2.0 + 0.5);
        assert!(inner.abs() < 1e-12);
        let pricey = SuParams { cost: 1e12, ..SU };
        assert_eq!(max_power_a(&pricey, &g, 0.7), 0.0);
    }

    #[test]
    fn pu_b_examples() {
        let g = unit_gains();
        assert_eq!(pu_utility_b(&PU, &g, &ResourcePoint::new(1.0, 10.0)), 0.0);
        let got = pu_utility_b(&PU, &g, &ResourcePoint::new(0.0, 1.0));
        assert!((got - pu_utility_a(&PU, &g, &ResourcePoint::new(0.0, 1.0))).abs() < 1e-15);
        assert!((got - 0.4928224).abs() < 1e-7);
        for tau in [0.0, 0.4, 0.9] {
            assert_eq!(pu_utility_b(&PU, &g, &ResourcePoint::new(tau, 0.0)), 0.0);
        }
    }

    #[test]
    fn su_b_examples() {
        let g = unit_gains();
        let v = su_utility_b(&SU, &g, &ResourcePoint::new(1.0, 7.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = su_utility_b(&SU, &g, &ResourcePoint::new(0.5, 1.0)).unwrap();
        assert!((v - 0.5 * 2.5f64.log2()).abs() < 1e-15);
        assert!((v - 0.6609640).abs() < 1e-7);
        assert_eq!(
            su_utility_b(&SU, &g, &ResourcePoint::new(0.0, 1.0)).unwrap(),
            0.0
        );
        let tiny = su_utility_b(&SU, &g, &ResourcePoint::new(1e-9, 1.0)).unwrap();
        assert!(tiny < 1e-6);
        assert!(su_utility_b(&SU, &g, &ResourcePoint::new(0.5, 5.0)).is_err());
    }

    fn sample_pair(model: UtilityModel) -> PairUtilities {
        let g = ChannelGains {
            h_k: 1.6,
            h_kl: 2.4,
            h_lk: 1.9,
            h_l: 2.2,
        };
        PairUtilities::new(model, g, PU, SU)
    }

    #[test]
    fn pair_view_matches_free_functions() {
        let pa = sample_pair(UtilityModel::A);
        let pb = sample_pair(UtilityModel::B);
        for i in 0..=20 {
            let tau = i as f64 / 20.0;
            for j in 0..=20 {
                let pt = ResourcePoint::new(tau, pa.power_cap(tau) * j as f64 / 20.0);
                assert_eq!(pa.pu_utility(&pt), pu_utility_a(&pa.pu, &pa.gains, &pt));
                assert_eq!(pa.su_utility(&pt), su_utility_a(&pa.su, &pa.gains, &pt));
                let cap = pb.power_cap(tau);
                if cap.is_finite() {
                    let pt = ResourcePoint::new(tau, cap * j as f64 / 20.0);
                    assert_eq!(pb.pu_utility(&pt), pu_utility_b(&pb.pu, &pb.gains, &pt));
                    assert_eq!(
                        pb.su_utility(&pt),
                        su_utility_b(&pb.su, &pb.gains, &pt).unwrap()
                    );
                }
            }
        }
        assert_eq!(pa.power_cap(0.3), max_power_a(&pa.su, &pa.gains, 0.3));
    }

    #[test]
    fn closed_form_thresholds_hit_the_targets() {
        for pair in [sample_pair(UtilityModel::A), sample_pair(UtilityModel::B)] {
            for tau in [0.05, 0.3, 0.6, 0.9] {
                let a = 0.3;
                let p = pair.min_power_for_pu(tau, a);
                if p.is_finite() {
                    let u = pair.pu_utility(&ResourcePoint::new(tau, p));
                    assert!((u - a).abs() < 1e-9, "{:?} tau {tau}: u {u}", pair.model);
                }
                let b = 0.2;
                let p = pair.max_power_for_su(tau, b);
                if p.is_finite() && p > 0.0 {
                    let v = pair.su_utility(&ResourcePoint::new(tau, p));
                    assert!((v - b).abs() < 1e-9, "{:?} tau {tau}: v {v}", pair.model);
                }
            }
        }
    }

    #[test]
    fn min_time_for_power_is_box_edge() {
        for pair in [sample_pair(UtilityModel::A), sample_pair(UtilityModel::B)] {
            let tau0 = 0.4;
            let p = pair.power_cap(tau0);
            let t = pair.min_time_for_power(p);
            assert!((t - tau0).abs() < 1e-12, "{:?}: {t}", pair.model);
        }
    }
}
