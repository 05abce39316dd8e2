use serde::{Deserialize, Serialize};
use std::fmt;

/// Which side of the market an agent belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    K,
    L,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub side: Side,
    pub index: usize,
}

impl AgentId {
    pub fn k(index: usize) -> Self {
        AgentId {
            side: Side::K,
            index,
        }
    }

    pub fn l(index: usize) -> Self {
        AgentId {
            side: Side::L,
            index,
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::K => write!(f, "k{}", self.index),
            Side::L => write!(f, "l{}", self.index),
        }
    }
}

/// A one-to-one partial matching between the K side and the L side.
///
/// Both directions are stored so lookups are O(1); the two maps are kept
/// mutually consistent by every mutator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    of_k: Vec<Option<usize>>,
    of_l: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(num_k: usize, num_l: usize) -> Self {
        Matching {
            of_k: vec![None; num_k],
            of_l: vec![None; num_l],
        }
    }

    /// Builds a matching from `(k, l)` pairs. Returns `None` when a pair is out
    /// of range or an agent appears twice.
    pub fn from_pairs(num_k: usize, num_l: usize, pairs: &[(usize, usize)]) -> Option<Self> {
        let mut m = Matching::empty(num_k, num_l);
        for &(k, l) in pairs {
            if k >= num_k || l >= num_l || m.of_k[k].is_some() || m.of_l[l].is_some() {
                return None;
            }
            m.of_k[k] = Some(l);
            m.of_l[l] = Some(k);
        }
        Some(m)
    }

    pub fn num_k(&self) -> usize {
        self.of_k.len()
    }

    pub fn num_l(&self) -> usize {
        self.of_l.len()
    }

    pub fn partner_of_k(&self, k: usize) -> Option<usize> {
        self.of_k[k]
    }

    pub fn partner_of_l(&self, l: usize) -> Option<usize> {
        self.of_l[l]
    }

    pub fn partner(&self, agent: AgentId) -> Option<AgentId> {
        match agent.side {
            Side::K => self.of_k[agent.index].map(AgentId::l),
            Side::L => self.of_l[agent.index].map(AgentId::k),
        }
    }

    pub fn is_matched(&self, k: usize, l: usize) -> bool {
        self.of_k[k] == Some(l)
    }

    /// Matches `k` with `l`, dissolving any previous match of either.
    /// Returns the ex-partners `(of k, of l)` that became single.
    pub fn rematch(&mut self, k: usize, l: usize) -> (Option<usize>, Option<usize>) {
        let old_l = self.of_k[k].filter(|&x| x != l);
        let old_k = self.of_l[l].filter(|&x| x != k);
        if let Some(x) = old_l {
            self.of_l[x] = None;
        }
        if let Some(x) = old_k {
            self.of_k[x] = None;
        }
        self.of_k[k] = Some(l);
        self.of_l[l] = Some(k);
        (old_l, old_k)
    }

    /// Matched pairs in increasing `k` order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.of_k
            .iter()
            .enumerate()
            .filter_map(|(k, l)| l.map(|l| (k, l)))
    }

    pub fn len(&self) -> usize {
        self.of_k.iter().filter(|l| l.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The K×L 0/1 matrix form.
    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.num_l()]; self.num_k()];
        for (k, l) in self.pairs() {
            m[k][l] = 1;
        }
        m
    }

    /// Row and column sums ≤ 1 and both directions agree.
    pub fn is_consistent(&self) -> bool {
        let forward = self
            .of_k
            .iter()
            .enumerate()
            .all(|(k, l)| l.is_none_or(|l| l < self.of_l.len() && self.of_l[l] == Some(k)));
        let backward = self
            .of_l
            .iter()
            .enumerate()
            .all(|(l, k)| k.is_none_or(|k| k < self.of_k.len() && self.of_k[k] == Some(l)));
        forward && backward
    }
}
