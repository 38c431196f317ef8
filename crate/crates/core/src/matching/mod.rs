//! Matchings on the allocation graph: Karp-Sipser, an exact maximum
//! matcher, a brute-force oracle for tiny instances, and verification.

mod brute_force;
mod hopcroft_karp;
mod karp_sipser;

use serde::{Deserialize, Serialize};

use crate::graph_model::{BipartiteGraph, DegreeState};

pub use brute_force::{brute_force_matching, BRUTE_FORCE_LIMIT};
pub use hopcroft_karp::max_matching;
pub use karp_sipser::{
    default_checkpoint_every, karp_sipser, karp_sipser_phase1, karp_sipser_with_core,
    Phase1Outcome,
};

/// Vertex-disjoint `(left, right)` pairs, sorted by left id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pairs: Vec<(u32, u32)>,
}

impl Matching {
    pub fn from_pairs(mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// State snapshot taken during phase one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: usize,
    pub state: DegreeState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsResult {
    pub matching: Matching,
    /// Edges matched in phase one.
    pub tau1: usize,
    /// Edges matched after phase one ended.
    pub phase2_size: usize,
    /// Phase-one checkpoints, starting at `t = 0` and ending at `t = tau1`.
    pub trace: Vec<Checkpoint>,
    /// Live left vertices and non-isolated right vertices when phase one
    /// ended.
    pub core_sizes: (usize, usize),
}

impl KsResult {
    pub fn size(&self) -> usize {
        self.matching.size()
    }
}

/// True iff every pair is an edge of `graph` and no vertex is used twice.
pub fn verify_matching(graph: &BipartiteGraph, matching: &Matching) -> bool {
    let mut left_used = vec![false; graph.num_left()];
    let mut right_used = vec![false; graph.num_right()];
    for &(l, r) in matching.pairs() {
        let (l, r) = (l as usize, r as usize);
        if l >= left_used.len() || r >= right_used.len() || !graph.has_edge(l, r) {
            return false;
        }
        if std::mem::replace(&mut left_used[l], true) || std::mem::replace(&mut right_used[r], true) {
            return false;
        }
    }
    true
}
