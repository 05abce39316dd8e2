//! Transferable-utility assignment game.
//!
//! Firm `k` pays at most `p[k][l]` and worker `l` accepts at least `q[k][l]`,
//! so the pair agrees on aspirations `(a, b)` iff `a + b ≤ p − q`.

use crate::engine::{Agreement, AgreementOracle, Negotiation, Negotiator, Steps};
use crate::error::{Error, Result};
use crate::grid::{self, GRID_TOL};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuInstance {
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

impl TuInstance {
    pub fn new(p: Vec<Vec<f64>>, q: Vec<Vec<f64>>) -> Result<Self> {
        let inst = TuInstance { p, q };
        inst.validate()?;
        Ok(inst)
    }

    /// Instance with `q = 0`, so `p` is the surplus matrix.
    pub fn from_surplus(s: Vec<Vec<f64>>) -> Self {
        let q = s.iter().map(|row| vec![0.0; row.len()]).collect();
        TuInstance { p: s, q }
    }

    pub fn validate(&self) -> Result<()> {
        let num_k = self.p.len();
        if num_k == 0 || self.q.len() != num_k {
            return Err(Error::Schema(
                "p and q must be non-empty with the same number of rows".into(),
            ));
        }
        let num_l = self.p[0].len();
        if num_l == 0 {
            return Err(Error::Schema("p must have at least one column".into()));
        }
        for (row_p, row_q) in self.p.iter().zip(&self.q) {
            if row_p.len() != num_l || row_q.len() != num_l {
                return Err(Error::Schema(
                    "p and q must be rectangular K×L matrices".into(),
                ));
            }
            if row_p.iter().chain(row_q).any(|x| !x.is_finite()) {
                return Err(Error::Schema("p and q entries must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn surplus(&self, k: usize, l: usize) -> f64 {
        self.p[k][l] - self.q[k][l]
    }

    pub fn surplus_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.num_k())
            .map(|k| (0..self.num_l()).map(|l| self.surplus(k, l)).collect())
            .collect()
    }
}

/// `1` iff `p_kl − a ≥ q_kl + b`, i.e. `a + b ≤ s_kl` (boundary included, up
/// to [`GRID_TOL`]).
pub fn tu_agreement(inst: &TuInstance, k: usize, l: usize, a: f64, b: f64) -> bool {
    a + b <= inst.surplus(k, l) + GRID_TOL
}

impl AgreementOracle for TuInstance {
    fn num_k(&self) -> usize {
        self.p.len()
    }

    fn num_l(&self) -> usize {
        self.p.first().map_or(0, Vec::len)
    }

    fn agrees(&self, k: usize, l: usize, a: f64, b: f64) -> bool {
        tu_agreement(self, k, l, a, b)
    }

    /// `max (p − q)^+` plus one unit of slack.
    fn gamma_bound(&self) -> f64 {
        let max = self
            .p
            .iter()
            .flatten()
            .zip(self.q.iter().flatten())
            .map(|(p, q)| (p - q).max(0.0))
            .fold(0.0, f64::max);
        max + 1.0
    }
}

/// Splits the residual surplus uniformly at random, then floors both shares
/// onto the δ-grid.
#[derive(Clone, Copy, Debug)]
pub struct TuNegotiator<'a> {
    inst: &'a TuInstance,
}

impl<'a> TuNegotiator<'a> {
    pub fn new(inst: &'a TuInstance) -> Self {
        TuNegotiator { inst }
    }

    /// The negotiation with an explicit split draw `u ∈ [0, 1]`.
    pub fn negotiate_with_split(
        &self,
        k: usize,
        l: usize,
        a_k: f64,
        b_l: f64,
        steps: Steps,
        u: f64,
    ) -> Negotiation {
        let (a_lo, b_lo) = (a_k + steps.epsilon, b_l + steps.epsilon);
        if !tu_agreement(self.inst, k, l, a_lo, b_lo) {
            return Negotiation::NoAgreement;
        }
        let residual = (self.inst.surplus(k, l) - a_lo - b_lo).max(0.0);
        let a = grid::floor_delta(a_lo + u * residual, steps.delta);
        let b = grid::floor_delta(b_lo + (1.0 - u) * residual, steps.delta);
        Negotiation::Agreement(Agreement { a, b, point: None })
    }
}

impl Negotiator for TuNegotiator<'_> {
    fn negotiate(
        &self,
        k: usize,
        l: usize,
        a_k: f64,
        b_l: f64,
        steps: Steps,
        rng: &mut dyn RngCore,
    ) -> Negotiation {
        let u: f64 = rng.random();
        self.negotiate_with_split(k, l, a_k, b_l, steps, u)
    }
}

/// Largest market side accepted by [`max_weight_matching_bruteforce`].
pub const ENUMERATION_LIMIT: usize = 8;

/// Exhaustive search over all partial matchings for the one maximising the
/// total positive surplus. Ties go to the lexicographically smallest
/// encoding, where each `k` is assigned `None < Some(0) < Some(1) < ...`.
///
/// Returns the matched pairs (in `k` order) and the total surplus.
pub fn max_weight_matching_bruteforce(inst: &TuInstance) -> Result<(Vec<(usize, usize)>, f64)> {
    let (num_k, num_l) = (inst.num_k(), inst.num_l());
    if num_k > ENUMERATION_LIMIT || num_l > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            num_k,
            num_l,
            limit: ENUMERATION_LIMIT,
        });
    }
    let weights: Vec<Vec<f64>> = (0..num_k)
        .map(|k| (0..num_l).map(|l| inst.surplus(k, l).max(0.0)).collect())
        .collect();

    struct Search<'w> {
        weights: &'w [Vec<f64>],
        used: Vec<bool>,
        current: Vec<Option<usize>>,
        best: Option<(Vec<Option<usize>>, f64)>,
    }

    impl Search<'_> {
        fn visit(&mut self, k: usize, value: f64) {
            if k == self.weights.len() {
                if self.best.as_ref().is_none_or(|(_, v)| value > *v) {
                    self.best = Some((self.current.clone(), value));
                }
                return;
            }
            self.current[k] = None;
            self.visit(k + 1, value);
            for l in 0..self.used.len() {
                if !self.used[l] {
                    self.used[l] = true;
                    self.current[k] = Some(l);
                    self.visit(k + 1, value + self.weights[k][l]);
                    self.used[l] = false;
                }
            }
            self.current[k] = None;
        }
    }

    let mut search = Search {
        weights: &weights,
        used: vec![false; num_l],
        current: vec![None; num_k],
        best: None,
    };
    search.visit(0, 0.0);
    let (assignment, value) = search.best.expect("the empty matching is always visited");
    let pairs = assignment
        .iter()
        .enumerate()
        .filter_map(|(k, l)| l.map(|l| (k, l)))
        .collect();
    Ok((pairs, value))
}

/// Number of partial matchings of a complete `num_k × num_l` bipartite graph.
pub fn count_partial_matchings(num_k: usize, num_l: usize) -> u64 {
    fn go(k: usize, num_k: usize, used: &mut Vec<bool>) -> u64 {
        if k == num_k {
            return 1;
        }
        let mut total = go(k + 1, num_k, used);
        for l in 0..used.len() {
            if !used[l] {
                used[l] = true;
                total += go(k + 1, num_k, used);
                used[l] = false;
            }
        }
        total
    }
    go(0, num_k, &mut vec![false; num_l])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::seeded_rng;
    use proptest::prelude::*;

    const STEPS: Steps = Steps {
        epsilon: 0.15,
        delta: 0.05,
    };

    fn five_two() -> TuInstance {
        TuInstance::new(vec![vec![5.0]], vec![vec![2.0]]).unwrap()
    }

    #[test]
    fn agreement_examples() {
        let inst = five_two();
        assert!(tu_agreement(&inst, 0, 0, 1.0, 1.0));
        assert!(tu_agreement(&inst, 0, 0, 2.0, 1.0));
        assert!(!tu_agreement(&inst, 0, 0, 2.5, 1.0));
    }

    #[test]
    fn negotiate_fresh_pair_over_many_splits() {
        let inst = TuInstance::from_surplus(vec![vec![3.0]]);
        let neg = TuNegotiator::new(&inst);
        let mut rng = seeded_rng(11);
        for _ in 0..1000 {
            let agreed = neg
                .negotiate(0, 0, 0.0, 0.0, STEPS, &mut rng)
                .agreement()
                .unwrap();
            assert!(grid::at_least(agreed.a, 0.15) && grid::at_least(agreed.b, 0.15));
            assert!(agreed.a + agreed.b <= 3.0 + GRID_TOL);
            assert!(grid::on_grid(agreed.a, 0.05) && grid::on_grid(agreed.b, 0.05));
        }
    }

    #[test]
    fn negotiate_zero_residual() {
        let inst = TuInstance::from_surplus(vec![vec![0.3]]);
        let neg = TuNegotiator::new(&inst);
        for u in [0.0, 0.37, 1.0] {
            let agreed = neg
                .negotiate_with_split(0, 0, 0.0, 0.0, STEPS, u)
                .agreement()
                .unwrap();
            assert!((agreed.a - 0.15).abs() < 1e-12);
            assert!((agreed.b - 0.15).abs() < 1e-12);
        }
    }

    #[test]
    fn negotiate_insufficient_surplus() {
        let inst = TuInstance::from_surplus(vec![vec![0.29]]);
        let neg = TuNegotiator::new(&inst);
        assert_eq!(
            neg.negotiate(0, 0, 0.0, 0.0, STEPS, &mut seeded_rng(0)),
            Negotiation::NoAgreement
        );
    }

    #[test]
    fn bruteforce_examples() {
        let inst = TuInstance::from_surplus(vec![vec![3.0, 1.0], vec![2.0, 4.0]]);
        let (pairs, value) = max_weight_matching_bruteforce(&inst).unwrap();
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(value, 7.0);

        let inst = TuInstance::from_surplus(vec![vec![-3.0, -1.0], vec![-2.0, -4.0]]);
        assert_eq!(
            max_weight_matching_bruteforce(&inst).unwrap(),
            (vec![], 0.0)
        );

        let inst = TuInstance::from_surplus(vec![vec![3.0]]);
        assert_eq!(
            max_weight_matching_bruteforce(&inst).unwrap(),
            (vec![(0, 0)], 3.0)
        );
    }

    #[test]
    fn bruteforce_rejects_large() {
        let inst = TuInstance::from_surplus(vec![vec![1.0; 9]; 2]);
        assert!(matches!(
            max_weight_matching_bruteforce(&inst),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn partial_matching_counts() {
        assert_eq!(count_partial_matchings(2, 2), 7);
        assert_eq!(count_partial_matchings(1, 3), 4);
        assert_eq!(count_partial_matchings(3, 3), 34);
    }

    #[test]
    fn bruteforce_tie_break_is_lexicographic() {
        // both diagonals worth 2; (k0 -> l0) sorts before (k0 -> l1)
        let inst = TuInstance::from_surplus(vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let (pairs, value) = max_weight_matching_bruteforce(&inst).unwrap();
        assert_eq!(value, 2.0);
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    }

    /// Independent check of the maximum via permutations of a square padding.
    fn max_by_permutations(s: &[Vec<f64>]) -> f64 {
        let n = s.len().max(s[0].len());
        let w = |k: usize, l: usize| {
            if k < s.len() && l < s[0].len() {
                s[k][l].max(0.0)
            } else {
                0.0
            }
        };
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::NEG_INFINITY;
        fn heap(perm: &mut Vec<usize>, m: usize, f: &mut dyn FnMut(&[usize])) {
            if m == 1 {
                f(perm);
                return;
            }
            for i in 0..m {
                heap(perm, m - 1, f);
                let j = if m % 2 == 0 { i } else { 0 };
                perm.swap(j, m - 1);
            }
        }
        heap(&mut perm, n, &mut |p| {
            let v: f64 = p.iter().enumerate().map(|(k, &l)| w(k, l)).sum();
            best = best.max(v);
        });
        best
    }

    proptest! {
        #[test]
        fn agreement_is_monotone(s in -3.0f64..5.0, a in 0.0f64..5.0, b in 0.0f64..5.0, da in 0.0f64..2.0, db in 0.0f64..2.0) {
            let inst = TuInstance::from_surplus(vec![vec![s]]);
            if !tu_agreement(&inst, 0, 0, a, b) {
                prop_assert!(!tu_agreement(&inst, 0, 0, a + da, b + db));
            }
            let g = inst.gamma_bound();
            prop_assert!(!tu_agreement(&inst, 0, 0, g + a, b));
            prop_assert!(!tu_agreement(&inst, 0, 0, a, g + b));
        }

        #[test]
        fn negotiated_split_is_agreeable(s in 0.0f64..5.0, am in 0u32..40, bm in 0u32..40, u in 0.0f64..=1.0) {
            let inst = TuInstance::from_surplus(vec![vec![s]]);
            let (a, b) = (am as f64 * 0.05, bm as f64 * 0.05);
            match TuNegotiator::new(&inst).negotiate_with_split(0, 0, a, b, STEPS, u) {
                Negotiation::Agreement(ag) => {
                    prop_assert!(tu_agreement(&inst, 0, 0, ag.a, ag.b));
                    prop_assert!(grid::at_least(ag.a, a + 0.15) && grid::at_least(ag.b, b + 0.15));
                }
                Negotiation::NoAgreement => prop_assert!(!tu_agreement(&inst, 0, 0, a + 0.15, b + 0.15)),
            }
        }

        #[test]
        fn bruteforce_matches_permutation_oracle(
            s in proptest::collection::vec(proptest::collection::vec(-2.0f64..5.0, 3), 1..4)
        ) {
            let inst = TuInstance::from_surplus(s.clone());
            let (pairs, value) = max_weight_matching_bruteforce(&inst).unwrap();
            prop_assert!((value - max_by_permutations(&s)).abs() < 1e-9);
            let recomputed: f64 = pairs.iter().map(|&(k, l)| s[k][l].max(0.0)).sum();
            prop_assert!((value - recomputed).abs() < 1e-12);
        }
    }
}
