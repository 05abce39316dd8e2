//! ε-pairwise stability and the auxiliary predicates used by the convergence
//! argument (pre-stable, tight, SNZ).

use crate::engine::{AgreementOracle, MarketState};
use crate::error::{Error, Result};
use crate::grid;
use crate::matching::{AgentId, Side};
use std::collections::BTreeSet;

/// Condition 1: every matched pair is agreeable at its current aspirations.
fn matched_pairs_agree<O: AgreementOracle + ?Sized>(state: &MarketState, oracle: &O) -> bool {
    state.matching.pairs().all(|(k, l)| {
        let (a, b) = (state.a[k], state.b[l]);
        state.points[k].is_some_and(|p| oracle.witnesses(k, l, &p, a, b))
            || oracle.agrees(k, l, a, b)
    })
}

/// Condition 2: no pair, matched or not, can raise both aspirations by ε.
fn no_improving_pair<O: AgreementOracle + ?Sized>(
    state: &MarketState,
    oracle: &O,
    epsilon: f64,
) -> bool {
    (0..state.num_k()).all(|k| {
        (0..state.num_l()).all(|l| !oracle.agrees(k, l, state.a[k] + epsilon, state.b[l] + epsilon))
    })
}

fn singles_at_zero(state: &MarketState) -> bool {
    let k_ok =
        (0..state.num_k()).all(|k| state.matching.partner_of_k(k).is_some() || state.a[k] <= 0.0);
    let l_ok =
        (0..state.num_l()).all(|l| state.matching.partner_of_l(l).is_some() || state.b[l] <= 0.0);
    k_ok && l_ok
}

/// True iff matched pairs agree, no pair has an agreeable ε-improvement, and
/// every single agent has zero aspiration.
///
/// The cheap single-agent condition is evaluated first.
pub fn is_epsilon_pairwise_stable<O: AgreementOracle + ?Sized>(
    state: &MarketState,
    oracle: &O,
    epsilon: f64,
) -> bool {
    singles_at_zero(state)
        && matched_pairs_agree(state, oracle)
        && no_improving_pair(state, oracle, epsilon)
}

/// The first two stability conditions; singles may hold positive aspirations.
pub fn is_pre_stable<O: AgreementOracle + ?Sized>(
    state: &MarketState,
    oracle: &O,
    epsilon: f64,
) -> bool {
    matched_pairs_agree(state, oracle) && no_improving_pair(state, oracle, epsilon)
}

/// Single agents with positive aspiration.
pub fn snz_set(state: &MarketState) -> BTreeSet<AgentId> {
    let ks = (0..state.num_k())
        .filter(|&k| state.matching.partner_of_k(k).is_none() && state.a[k] > 0.0)
        .map(AgentId::k);
    let ls = (0..state.num_l())
        .filter(|&l| state.matching.partner_of_l(l).is_none() && state.b[l] > 0.0)
        .map(AgentId::l);
    ks.chain(ls).collect()
}

/// A pre-stable state is tight when lowering any single SNZ member's
/// aspiration by one δ step (everything else fixed) breaks pre-stability.
///
/// Errors with [`Error::NotPreStable`] when `state` is not pre-stable.
pub fn is_tight<O: AgreementOracle + ?Sized>(
    state: &MarketState,
    oracle: &O,
    epsilon: f64,
    delta: f64,
) -> Result<bool> {
    if !is_pre_stable(state, oracle, epsilon) {
        return Err(Error::NotPreStable);
    }
    let mut probe = state.clone();
    for agent in snz_set(state) {
        let slot = match agent.side {
            Side::K => &mut probe.a[agent.index],
            Side::L => &mut probe.b[agent.index],
        };
        let saved = *slot;
        *slot = grid::decay(saved, delta);
        let still = is_pre_stable(&probe, oracle, epsilon);
        match agent.side {
            Side::K => probe.a[agent.index] = saved,
            Side::L => probe.b[agent.index] = saved,
        }
        if still {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tu::TuInstance;

    const EPS: f64 = 0.15;
    const DELTA: f64 = 0.05;

    fn state(a: &[f64], b: &[f64], pairs: &[(usize, usize)]) -> MarketState {
        let mut s = MarketState::with_aspirations(a.to_vec(), b.to_vec());
        for &(k, l) in pairs {
            s.matching.rematch(k, l);
        }
        s
    }

    #[test]
    fn empty_and_hopeless_is_stable() {
        let inst = TuInstance::from_surplus(vec![vec![-1.0, -2.0], vec![-0.5, -3.0]]);
        let s = MarketState::new(2, 2, 0.0);
        assert!(is_epsilon_pairwise_stable(&s, &inst, EPS));
        assert!(is_pre_stable(&s, &inst, EPS));
    }

    #[test]
    fn matched_pair_with_room_is_unstable() {
        let inst = TuInstance::from_surplus(vec![vec![3.0]]);
        let s = state(&[1.0], &[1.0], &[(0, 0)]);
        assert!(!is_epsilon_pairwise_stable(&s, &inst, EPS));
        assert!(!is_pre_stable(&s, &inst, EPS));
    }

    #[test]
    fn positive_single_is_unstable() {
        // 1x2: k0 matched to l0 with no slack; l1 single at δ and cannot agree with k0
        let inst = TuInstance::from_surplus(vec![vec![3.0, 0.1]]);
        let s = state(&[1.5], &[1.5, DELTA], &[(0, 0)]);
        assert!(!is_epsilon_pairwise_stable(&s, &inst, EPS));
        // yet pre-stable: stable but for the single
        assert!(is_pre_stable(&s, &inst, EPS));
    }

    #[test]
    fn stable_state_is_pre_stable() {
        let inst = TuInstance::from_surplus(vec![vec![3.0, 0.1]]);
        let s = state(&[1.5], &[1.5, 0.0], &[(0, 0)]);
        assert!(is_epsilon_pairwise_stable(&s, &inst, EPS));
        assert!(is_pre_stable(&s, &inst, EPS));
    }

    #[test]
    fn snz_examples() {
        let s = state(&[0.3, 0.2], &[0.1, 0.4], &[(0, 0), (1, 1)]);
        assert!(snz_set(&s).is_empty());
        let s = state(&[0.0], &[0.0, 0.05], &[]);
        assert_eq!(
            snz_set(&s).into_iter().collect::<Vec<_>>(),
            vec![AgentId::l(1)]
        );
        let s = MarketState::new(2, 3, 0.5);
        assert_eq!(snz_set(&s).len(), 5);
    }

    #[test]
    fn tight_with_empty_snz() {
        let inst = TuInstance::from_surplus(vec![vec![3.0, 0.1]]);
        let s = state(&[1.5], &[1.5, 0.0], &[(0, 0)]);
        assert_eq!(is_tight(&s, &inst, EPS, DELTA).unwrap(), true);
    }

    #[test]
    fn not_tight_when_a_single_can_slide() {
        // l1 at 0.5 can decay without creating agreement with k0 (surplus 0.1)
        let inst = TuInstance::from_surplus(vec![vec![3.0, 0.1]]);
        let s = state(&[1.5], &[1.5, 0.5], &[(0, 0)]);
        assert_eq!(is_tight(&s, &inst, EPS, DELTA).unwrap(), false);
    }

    #[test]
    fn tight_one_step_above_threshold() {
        // s(k0,l1) = a0 + b1 + 2ε − δ: one decay of l1 makes (k0,l1) ε-agreeable
        let (a0, b1) = (1.5, 0.5);
        let s01 = a0 + b1 + 2.0 * EPS - DELTA;
        let inst = TuInstance::from_surplus(vec![vec![3.0, s01]]);
        let s = state(&[a0], &[1.5, b1], &[(0, 0)]);
        assert!(is_pre_stable(&s, &inst, EPS));
        assert_eq!(is_tight(&s, &inst, EPS, DELTA).unwrap(), true);
    }

    #[test]
    fn tight_rejects_non_pre_stable() {
        let inst = TuInstance::from_surplus(vec![vec![3.0]]);
        let s = state(&[0.0], &[0.0], &[]);
        assert!(matches!(
            is_tight(&s, &inst, EPS, DELTA),
            Err(Error::NotPreStable)
        ));
    }
}
