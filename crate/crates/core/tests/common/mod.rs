#![allow(dead_code)]

use ksmatch::BipartiteGraph;
use proptest::prelude::*;
use rand::Rng;

/// Random block-sequence graph with `n` left and `m` right vertices.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, m: usize, d: usize) -> BipartiteGraph {
    let slots = (0..n * d).map(|_| rng.random_range(0..m as u32)).collect();
    BipartiteGraph::from_slots(d, m, slots).unwrap()
}

/// Small graphs: `d` in 2..=4, `m` in 1..=max_m, `n` in 0..=max_n.
pub fn small_graph(max_n: usize, max_m: usize) -> impl Strategy<Value = BipartiteGraph> {
    (2usize..=4, 1usize..=max_m, 0usize..=max_n).prop_flat_map(|(d, m, n)| {
        prop::collection::vec(0..m as u32, n * d)
            .prop_map(move |slots| BipartiteGraph::from_slots(d, m, slots).unwrap())
    })
}
