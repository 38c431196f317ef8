//! Karp-Sipser greedy matching.
//!
//! While some vertex has degree exactly one, pick one uniformly at random,
//! match its only edge and delete both endpoints. Phase one ends the first
//! time no such vertex exists. Afterwards a uniformly random remaining edge
//! is matched whenever the degree-one pool is empty.
//!
//! The run works on a private copy of the graph with per-slot deletion, so
//! left vertices can lose edges once right vertices are removed in phase
//! two. Degrees count parallel edges.

use rand::Rng;

use super::{Checkpoint, KsResult, Matching};
use crate::graph_model::{BipartiteGraph, DegreeState};

const DEAD: u32 = u32::MAX;

/// Phase-one checkpoint spacing used when none is given: `ceil(n / 100)`.
pub fn default_checkpoint_every(n: usize) -> usize {
    n.div_ceil(100).max(1)
}

/// Result of phase one plus the graph left when it stopped.
#[derive(Debug, Clone)]
pub struct Phase1Outcome {
    pub result: KsResult,
    /// The input graph with every left vertex matched in phase one deleted.
    pub core: BipartiteGraph,
}

/// Phase one only. `result.phase2_size` is zero.
pub fn karp_sipser_phase1<R: Rng + ?Sized>(
    graph: &BipartiteGraph,
    rng: &mut R,
    checkpoint_every: usize,
) -> Phase1Outcome {
    let (result, core) = run(graph, rng, checkpoint_every, false);
    Phase1Outcome { result, core }
}

/// Both phases, with the default checkpoint spacing.
pub fn karp_sipser<R: Rng + ?Sized>(graph: &BipartiteGraph, rng: &mut R) -> KsResult {
    run(graph, rng, default_checkpoint_every(graph.num_left()), true).0
}

/// Both phases, also returning the graph as it stood at the end of phase
/// one.
pub fn karp_sipser_with_core<R: Rng + ?Sized>(
    graph: &BipartiteGraph,
    rng: &mut R,
    checkpoint_every: usize,
) -> (KsResult, BipartiteGraph) {
    run(graph, rng, checkpoint_every, true)
}

fn run<R: Rng + ?Sized>(
    graph: &BipartiteGraph,
    rng: &mut R,
    checkpoint_every: usize,
    phase2: bool,
) -> (KsResult, BipartiteGraph) {
    let checkpoint_every = checkpoint_every.max(1);
    let mut work = Work::new(graph);
    let mut pairs = Vec::new();

    let mut trace = vec![Checkpoint {
        t: 0,
        state: work.state,
    }];
    let mut tau1 = 0;
    while let Some(vertex) = work.pool.pick(rng) {
        pairs.push(work.match_degree_one(vertex));
        tau1 += 1;
        if tau1 % checkpoint_every == 0 {
            trace.push(Checkpoint {
                t: tau1,
                state: work.state,
            });
        }
    }
    if trace.last().is_some_and(|c| c.t != tau1) {
        trace.push(Checkpoint {
            t: tau1,
            state: work.state,
        });
    }

    let core_sizes = (work.state.w, work.state.v1 + work.state.v);
    let mut core = graph.clone();
    for &(l, _) in &pairs {
        core.delete_left(l as usize);
    }

    let mut phase2_size = 0;
    if phase2 {
        loop {
            let pair = if let Some(vertex) = work.pool.pick(rng) {
                work.match_degree_one(vertex)
            } else if let Some(slot) = work.live_slots.pick(rng) {
                let slot = slot as usize;
                let pair = ((slot / work.d) as u32, work.slots[slot]);
                work.match_edge(pair.0, pair.1);
                pair
            } else {
                break;
            };
            pairs.push(pair);
            phase2_size += 1;
        }
    }

    let result = KsResult {
        matching: Matching::from_pairs(pairs),
        tau1,
        phase2_size,
        trace,
        core_sizes,
    };
    (result, core)
}

/// Set of `u32` keys with O(1) insert, remove and uniform pick.
#[derive(Debug)]
struct IndexedSet {
    items: Vec<u32>,
    position: Vec<u32>,
}

impl IndexedSet {
    fn new(universe: usize) -> Self {
        Self {
            items: Vec::new(),
            position: vec![DEAD; universe],
        }
    }

    fn insert(&mut self, key: u32) {
        if self.position[key as usize] == DEAD {
            self.position[key as usize] = self.items.len() as u32;
            self.items.push(key);
        }
    }

    fn remove(&mut self, key: u32) {
        let pos = self.position[key as usize];
        if pos == DEAD {
            return;
        }
        let last = *self.items.last().expect("non-empty");
        self.items.swap_remove(pos as usize);
        if last != key {
            self.position[last as usize] = pos;
        }
        self.position[key as usize] = DEAD;
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u32> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.random_range(0..self.items.len())])
        }
    }
}

struct Work {
    d: usize,
    n: usize,
    slots: Vec<u32>,
    left_degree: Vec<u32>,
    left_alive: Vec<bool>,
    right_degree: Vec<u32>,
    /// CSR: slot indices holding each right vertex.
    occ_start: Vec<usize>,
    occ: Vec<u32>,
    /// Degree-one vertices; left `l` is `l`, right `r` is `n + r`.
    pool: IndexedSet,
    /// Slots of live edges.
    live_slots: IndexedSet,
    state: DegreeState,
}

impl Work {
    fn new(graph: &BipartiteGraph) -> Self {
        let d = graph.d();
        let n = graph.num_left();
        let m = graph.num_right();
        let mut slots = vec![DEAD; n * d];
        let mut left_degree = vec![0u32; n];
        let mut left_alive = vec![false; n];
        let mut right_degree = vec![0u32; m];
        let mut live_slots = IndexedSet::new(n * d);
        for l in 0..n {
            if let Some(block) = graph.block(l) {
                left_alive[l] = true;
                left_degree[l] = d as u32;
                slots[l * d..(l + 1) * d].copy_from_slice(block);
                for (i, &r) in block.iter().enumerate() {
                    right_degree[r as usize] += 1;
                    live_slots.insert((l * d + i) as u32);
                }
            }
        }
        let mut occ_start = vec![0usize; m + 1];
        for r in 0..m {
            occ_start[r + 1] = occ_start[r] + right_degree[r] as usize;
        }
        let mut fill = occ_start.clone();
        let mut occ = vec![0u32; occ_start[m]];
        for (s, &r) in slots.iter().enumerate() {
            if r != DEAD {
                occ[fill[r as usize]] = s as u32;
                fill[r as usize] += 1;
            }
        }

        let mut pool = IndexedSet::new(n + m);
        for (l, _) in left_degree.iter().enumerate().filter(|&(_, &k)| k == 1) {
            pool.insert(l as u32);
        }
        for (r, _) in right_degree.iter().enumerate().filter(|&(_, &k)| k == 1) {
            pool.insert((n + r) as u32);
        }
        let state = graph.degree_state();
        Self {
            d,
            n,
            slots,
            left_degree,
            left_alive,
            right_degree,
            occ_start,
            occ,
            pool,
            live_slots,
            state,
        }
    }

    /// Matches the only edge of a degree-one vertex.
    fn match_degree_one(&mut self, vertex: u32) -> (u32, u32) {
        let vertex = vertex as usize;
        let (l, r) = if vertex < self.n {
            let block = &self.slots[vertex * self.d..(vertex + 1) * self.d];
            let r = *block.iter().find(|&&r| r != DEAD).expect("degree one");
            (vertex as u32, r)
        } else {
            let r = vertex - self.n;
            let slot = self.occ[self.occ_start[r]..self.occ_start[r + 1]]
                .iter()
                .find(|&&s| self.slots[s as usize] != DEAD)
                .expect("degree one");
            ((*slot as usize / self.d) as u32, r as u32)
        };
        self.match_edge(l, r);
        (l, r)
    }

    fn match_edge(&mut self, left: u32, right: u32) {
        self.delete_left(left as usize);
        self.delete_right(right as usize);
    }

    fn kill_slot(&mut self, slot: usize) {
        let r = self.slots[slot] as usize;
        let l = slot / self.d;
        self.slots[slot] = DEAD;
        self.live_slots.remove(slot as u32);

        let old = self.right_degree[r];
        self.right_degree[r] = old - 1;
        self.state.on_right_degree_change(old, old - 1);
        self.refresh_pool(self.n + r, old - 1);

        self.left_degree[l] -= 1;
        if self.left_alive[l] {
            self.refresh_pool(l, self.left_degree[l]);
        }
    }

    fn refresh_pool(&mut self, vertex: usize, degree: u32) {
        if degree == 1 {
            self.pool.insert(vertex as u32);
        } else {
            self.pool.remove(vertex as u32);
        }
    }

    fn delete_left(&mut self, l: usize) {
        if !self.left_alive[l] {
            return;
        }
        self.left_alive[l] = false;
        self.pool.remove(l as u32);
        self.state.w -= 1;
        for slot in l * self.d..(l + 1) * self.d {
            if self.slots[slot] != DEAD {
                self.kill_slot(slot);
            }
        }
    }

    fn delete_right(&mut self, r: usize) {
        for i in self.occ_start[r]..self.occ_start[r + 1] {
            let slot = self.occ[i] as usize;
            if self.slots[slot] != DEAD {
                self.kill_slot(slot);
            }
        }
        self.pool.remove((self.n + r) as u32);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{max_matching, verify_matching};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn star_of_one_left_vertex() {
        let g = BipartiteGraph::from_blocks(3, 3, &[[0, 1, 2]]).unwrap();
        let out = karp_sipser_phase1(&g, &mut ChaCha8Rng::seed_from_u64(1), 1);
        assert_eq!(out.result.tau1, 1);
        assert_eq!(out.result.core_sizes, (0, 0));
        assert_eq!(out.core.live_left_count(), 0);
        assert_eq!(out.result.phase2_size, 0);
    }

    #[test]
    fn no_degree_one_vertex() {
        let g = BipartiteGraph::from_blocks(3, 1, &[[0, 0, 0], [0, 0, 0]]).unwrap();
        let out = karp_sipser_phase1(&g, &mut ChaCha8Rng::seed_from_u64(1), 1);
        assert_eq!(out.result.tau1, 0);
        assert_eq!(out.result.core_sizes, (2, 1));
        assert_eq!(out.result.trace.len(), 1);
        let full = karp_sipser(&g, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(full.size(), 1);
        assert_eq!(full.phase2_size, 1);
    }

    #[test]
    fn four_cycle_needs_phase_two() {
        let g = BipartiteGraph::from_blocks(2, 2, &[[0, 1], [0, 1]]).unwrap();
        for seed in 0..20 {
            let ks = karp_sipser(&g, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(ks.tau1, 0);
            assert_eq!(ks.phase2_size, 2);
            assert_eq!(ks.size(), 2);
            assert!(verify_matching(&g, &ks.matching));
        }
    }

    #[test]
    fn parallel_pair_becomes_isolated() {
        // Right 1 has degree two, both edges to left 1; deleting left 1
        // leaves it isolated rather than degree one.
        let g = BipartiteGraph::from_blocks(3, 3, &[[0, 2, 2], [1, 1, 2]]).unwrap();
        let ks = karp_sipser(&g, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(ks.size(), 2);
        assert!(verify_matching(&g, &ks.matching));
    }

    #[test]
    fn trace_ends_at_tau1() {
        let params = crate::ModelParams::new(2000, 2400, 3, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = crate::graph_model::sample_graph(&params, &mut rng);
        let out = karp_sipser_phase1(&g, &mut rng, 20);
        let trace = &out.result.trace;
        assert_eq!(trace[0].t, 0);
        assert_eq!(trace[0].state, g.degree_state());
        assert!(trace.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(trace.last().unwrap().t, out.result.tau1);
        assert_eq!(trace.last().unwrap().state, out.core.degree_state());
        assert!(trace.iter().all(|c| c.state.w == 2000 - c.t));
    }

    #[test]
    fn phase1_core_has_no_degree_one_vertex() {
        let params = crate::ModelParams::new(3000, 3200, 3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = crate::graph_model::sample_graph(&params, &mut rng);
        let out = karp_sipser_phase1(&g, &mut rng, 100);
        assert!(out.result.tau1 < 3000);
        let core = &out.core;
        assert_eq!(core.degree_state().v1, 0);
        assert_eq!(
            out.result.core_sizes,
            (core.live_left_count(), core.degree_state().v)
        );
        let mu = max_matching(&g).size();
        assert_eq!(mu, out.result.tau1 + max_matching(core).size());
    }
}
