use blma::engine::seeded_rng;
use blma::negotiators::{Blma1, Blma2, OneD};
use blma::radio::model::{ChannelGains, PairUtilities, PuParams, SuParams};
use blma::radio::{CognitiveMarket, GeneratedMarketSpec, TimeDomain, UtilityModel};
use blma::{AgreementOracle, Negotiator, ResourcePoint, Steps};
use proptest::prelude::*;
use rand::Rng;

const STEPS: Steps = Steps {
    epsilon: 0.15,
    delta: 0.05,
};

fn pair_strategy(model: UtilityModel) -> impl Strategy<Value = PairUtilities> {
    (
        0.2f64..20.0,
        0.2f64..20.0,
        0.2f64..20.0,
        0.2f64..20.0,
        0.05f64..1.0,
    )
        .prop_map(move |(h_k, h_kl, h_lk, h_l, cost)| {
            PairUtilities::new(
                model,
                ChannelGains {
                    h_k,
                    h_kl,
                    h_lk,
                    h_l,
                },
                PuParams {
                    power: 0.01,
                    sigma2: 1.0,
                },
                SuParams {
                    own_power: 1.0,
                    cost,
                    total_power: 1.0,
                    sigma2: 1.0,
                },
            )
        })
}

fn model_strategy() -> impl Strategy<Value = UtilityModel> {
    prop_oneof![Just(UtilityModel::A), Just(UtilityModel::B)]
}

/// Interior point of the box, as fractions of the time range and of the
/// power cap at that time.
fn interior(pair: &PairUtilities, ft: f64, fp: f64) -> Option<ResourcePoint> {
    let tau = 0.02 + 0.9 * ft;
    let cap = pair.power_cap(tau);
    (cap.is_finite() && cap > 1e-6).then(|| ResourcePoint::new(tau, 0.9 * fp * cap))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn monotone_trends(
        pair in model_strategy().prop_flat_map(pair_strategy),
        ft in 0.0f64..1.0,
        fp in 0.0f64..1.0,
    ) {
        let Some(pt) = interior(&pair, ft, fp) else { return Ok(()) };
        let h = 1e-6;
        let dt = ResourcePoint::new(pt.tau + h, pt.power);
        let dp = ResourcePoint::new(pt.tau, pt.power + h * (1.0 + pt.power));
        let (u, v) = (pair.pu_utility(&pt), pair.su_utility(&pt));
        prop_assert!(pair.pu_utility(&dt) <= u + 1e-12);
        prop_assert!(pair.pu_utility(&dp) >= u - 1e-12);
        prop_assert!(pair.su_utility(&dt) >= v - 1e-12);
        prop_assert!(pair.su_utility(&dp) <= v + 1e-12);
    }

    #[test]
    fn model_a_super_level_sets_are_convex(
        pair in pair_strategy(UtilityModel::A),
        f in prop::array::uniform4(0.0f64..1.0),
        t in 0.0f64..1.0,
    ) {
        let (Some(p), Some(q)) = (interior(&pair, f[0], f[1]), interior(&pair, f[2], f[3])) else { return Ok(()) };
        let mid = ResourcePoint::new(p.tau + t * (q.tau - p.tau), p.power + t * (q.power - p.power));
        let u_floor = pair.pu_utility(&p).min(pair.pu_utility(&q));
        let v_floor = pair.su_utility(&p).min(pair.su_utility(&q));
        prop_assert!(pair.pu_utility(&mid) >= u_floor - 1e-12);
        prop_assert!(pair.su_utility(&mid) >= v_floor - 1e-12);
    }

    #[test]
    fn max_power_a_zeroes_su_utility(pair in pair_strategy(UtilityModel::A), tau in 0.0f64..1.0) {
        let cap = pair.power_cap(tau);
        prop_assert!(pair.su_utility(&ResourcePoint::new(tau, cap)).abs() <= 1e-9);
    }

    #[test]
    fn thresholds_between_offers_hold(
        pair in model_strategy().prop_flat_map(pair_strategy),
        tau in 0.01f64..0.99,
        a in 0.0f64..1.5,
        b in 0.0f64..1.5,
        s in 0.0f64..1.0,
    ) {
        let lo = pair.min_power_for_pu(tau, a);
        let hi = pair.max_power_for_su(tau, b);
        if lo.is_finite() && hi.is_finite() && lo < hi {
            let pt = ResourcePoint::new(tau, lo + s * (hi - lo));
            prop_assert!(pair.pu_utility(&pt) >= a - 1e-9);
            prop_assert!(pair.su_utility(&pt) >= b - 1e-9);
        }
    }
}

#[test]
fn model_a_sub_level_sets_are_not_convex() {
    // u_A is quasi-concave: along a segment it can exceed both endpoints
    let pair = PairUtilities::new(
        UtilityModel::A,
        ChannelGains {
            h_k: 1.0,
            h_kl: 10.0,
            h_lk: 1.0,
            h_l: 1.0,
        },
        PuParams {
            power: 0.01,
            sigma2: 1.0,
        },
        SuParams {
            own_power: 1.0,
            cost: 0.1,
            total_power: 1.0,
            sigma2: 1.0,
        },
    );
    let mut rng = seeded_rng(8);
    let found = (0..10_000).any(|_| {
        let mut draw = || interior(&pair, rng.random(), rng.random()).unwrap();
        let (p, q) = (draw(), draw());
        let mid = ResourcePoint::new(0.5 * (p.tau + q.tau), 0.5 * (p.power + q.power));
        pair.pu_utility(&mid) > pair.pu_utility(&p).max(pair.pu_utility(&q)) + 1e-9
    });
    assert!(found);
}

fn markets(model: UtilityModel) -> Vec<CognitiveMarket> {
    (0..6u64)
        .map(|s| CognitiveMarket::generate(&GeneratedMarketSpec::new(model, 40 + s, 2, 2)).unwrap())
        .collect()
}

#[test]
fn oracle_is_monotone_and_bounded() {
    for model in [UtilityModel::A, UtilityModel::B] {
        for m in markets(model) {
            let o = m.oracle(TimeDomain::Full);
            let gamma = o.gamma_bound();
            assert!(gamma > 0.0);
            let mut rng = seeded_rng(1);
            for _ in 0..400 {
                let (k, l) = (rng.random_range(0..2), rng.random_range(0..2));
                let a = rng.random::<f64>() * gamma;
                let b = rng.random::<f64>() * gamma;
                let a2 = a + rng.random::<f64>() * gamma * 0.3;
                let b2 = b + rng.random::<f64>() * gamma * 0.3;
                if o.agrees(k, l, a2, b2) {
                    assert!(o.agrees(k, l, a, b));
                }
                assert!(!o.agrees(k, l, gamma, b));
                assert!(!o.agrees(k, l, a, gamma));
            }
        }
    }
}

#[test]
fn negotiators_agree_with_positive_frequency_on_feasible_states() {
    let ma = markets(UtilityModel::A);
    let mb = markets(UtilityModel::B);
    let cases: Vec<(&CognitiveMarket, Box<dyn Negotiator + '_>, TimeDomain)> = vec![
        (
            &ma[0],
            Box::new(Blma1::new(&ma[0]).unwrap()),
            TimeDomain::Full,
        ),
        (&mb[0], Box::new(Blma2::new(&mb[0])), TimeDomain::Full),
        (
            &mb[0],
            Box::new(OneD::new(&mb[0], 0.1).unwrap()),
            TimeDomain::Fixed(0.1),
        ),
    ];
    for (m, neg, domain) in cases {
        let o = m.oracle(domain);
        let mut states = Vec::new();
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..6 {
                    for j in 0..6 {
                        let (a, b) = (i as f64 * 0.1, j as f64 * 0.1);
                        if o.agrees(k, l, a + STEPS.epsilon, b + STEPS.epsilon) {
                            states.push((k, l, a, b));
                        }
                    }
                }
            }
        }
        assert!(!states.is_empty());
        let mut rng = seeded_rng(2);
        for (k, l, a, b) in states.into_iter().step_by(3).take(6) {
            let hits = (0..10_000)
                .filter(|_| {
                    neg.negotiate(k, l, a, b, STEPS, &mut rng)
                        .agreement()
                        .is_some()
                })
                .count();
            assert!(hits > 0, "no agreement for pair ({k},{l}) at ({a},{b})");
        }
    }
}

#[test]
fn one_d_never_agrees_when_su_target_exceeds_zero_power_utility() {
    for m in markets(UtilityModel::B) {
        let neg = OneD::new(&m, 0.1).unwrap();
        let v0 = m.pair(1, 0).su_utility(&ResourcePoint::new(0.1, 0.0));
        let b = (v0 / STEPS.delta).floor() * STEPS.delta;
        let mut rng = seeded_rng(3);
        for _ in 0..200 {
            assert!(neg
                .negotiate(1, 0, 0.0, b, STEPS, &mut rng)
                .agreement()
                .is_none());
        }
    }
}
