//! The random allocation graph: `n` left vertices, each holding a block of
//! `d` right-vertex choices drawn uniformly with replacement from `m` right
//! vertices. Parallel edges are kept; degrees count multiplicity.
//!
//! A graph is stored as the flat sequence of blocks. Deleting a left vertex
//! replaces its block with a deleted marker, which is the only mutation the
//! first phase of Karp-Sipser ever needs.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};

/// Size and seed of one random instance. `n` and `m` are authoritative;
/// the load ratio is derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, m: usize, d: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        if d < 2 {
            return Err(Error::InvalidParams(format!("d must be at least 2, got {d}")));
        }
        if n.checked_mul(d).is_none_or(|s| s > u32::MAX as usize) || m > u32::MAX as usize {
            return Err(Error::InvalidParams("instance too large for 32-bit ids".into()));
        }
        Ok(Self { n, m, d, seed })
    }

    /// Parameters for load `alpha` with `m = round(n / alpha)`.
    pub fn from_alpha(n: usize, alpha: f64, d: usize, seed: u64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
        }
        let m = ((n as f64) / alpha).round().max(1.0) as usize;
        Self::new(n, m, d, seed)
    }

    /// `n / m`.
    pub fn alpha(&self) -> f64 {
        self.n as f64 / self.m as f64
    }
}

/// `(w, v1, v)`: live left vertices, right vertices of degree exactly one,
/// right vertices of degree at least two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeState {
    pub w: usize,
    pub v1: usize,
    pub v: usize,
}

impl DegreeState {
    pub(crate) fn on_right_degree_change(&mut self, old: u32, new: u32) {
        match old {
            0 => {}
            1 => self.v1 -= 1,
            _ => self.v -= 1,
        }
        match new {
            0 => {}
            1 => self.v1 += 1,
            _ => self.v += 1,
        }
    }
}

/// Sentinel stored in the first slot of a deleted block.
const DELETED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    d: usize,
    num_right: usize,
    slots: Vec<u32>,
    right_degree: Vec<u32>,
    state: DegreeState,
}

impl BipartiteGraph {
    /// Graph with no left vertices.
    pub fn empty(d: usize, m: usize) -> Self {
        Self {
            d,
            num_right: m,
            slots: Vec::new(),
            right_degree: vec![0; m],
            state: DegreeState::default(),
        }
    }

    /// Builds a graph from its block sequence: `slots[l * d .. (l + 1) * d]`
    /// are the choices of left vertex `l`.
    pub fn from_slots(d: usize, m: usize, slots: Vec<u32>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d must be at least 2, got {d}")));
        }
        if !slots.len().is_multiple_of(d) {
            return Err(Error::InvalidParams(format!(
                "{} slots do not split into blocks of {d}",
                slots.len()
            )));
        }
        if let Some(&bad) = slots.iter().find(|&&r| r as usize >= m) {
            return Err(Error::InvalidParams(format!("right id {bad} out of range 0..{m}")));
        }
        let mut right_degree = vec![0u32; m];
        for &r in &slots {
            right_degree[r as usize] += 1;
        }
        let mut g = Self {
            d,
            num_right: m,
            slots,
            right_degree,
            state: DegreeState::default(),
        };
        g.state = g.recompute_degree_state();
        Ok(g)
    }

    pub fn from_blocks<B: AsRef<[u32]>>(d: usize, m: usize, blocks: &[B]) -> Result<Self> {
        let mut slots = Vec::with_capacity(blocks.len() * d);
        for (l, b) in blocks.iter().enumerate() {
            let b = b.as_ref();
            if b.len() != d {
                return Err(Error::InvalidParams(format!(
                    "block {l} has {} entries, expected {d}",
                    b.len()
                )));
            }
            slots.extend_from_slice(b);
        }
        Self::from_slots(d, m, slots)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn num_left(&self) -> usize {
        self.slots.len() / self.d
    }

    pub fn num_right(&self) -> usize {
        self.num_right
    }

    pub fn live_left_count(&self) -> usize {
        self.state.w
    }

    pub fn is_deleted(&self, left: usize) -> bool {
        self.slots[left * self.d] == DELETED
    }

    /// The block of a live left vertex, `None` once deleted.
    pub fn block(&self, left: usize) -> Option<&[u32]> {
        let b = &self.slots[left * self.d..(left + 1) * self.d];
        (b[0] != DELETED).then_some(b)
    }

    pub fn right_degree(&self, right: usize) -> u32 {
        self.right_degree[right]
    }

    pub fn right_degrees(&self) -> &[u32] {
        &self.right_degree
    }

    /// Number of edges, counting parallel copies.
    pub fn edge_count(&self) -> usize {
        self.state.w * self.d
    }

    /// All edges `(left, right)` of live blocks, parallel copies repeated.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_left()).flat_map(move |l| {
            self.block(l)
                .into_iter()
                .flatten()
                .map(move |&r| (l, r as usize))
        })
    }

    pub fn has_edge(&self, left: usize, right: usize) -> bool {
        left < self.num_left()
            && self
                .block(left)
                .is_some_and(|b| b.iter().any(|&r| r as usize == right))
    }

    /// Deletes a left vertex and all its edges. Returns `false` if it was
    /// already deleted.
    pub fn delete_left(&mut self, left: usize) -> bool {
        let d = self.d;
        let block = &mut self.slots[left * d..(left + 1) * d];
        if block[0] == DELETED {
            return false;
        }
        for slot in block.iter_mut() {
            let r = *slot as usize;
            let old = self.right_degree[r];
            self.right_degree[r] = old - 1;
            self.state.on_right_degree_change(old, old - 1);
            *slot = DELETED;
        }
        self.state.w -= 1;
        true
    }

    /// Incrementally maintained `(w, v1, v)`.
    pub fn degree_state(&self) -> DegreeState {
        self.state
    }

    /// `(w, v1, v)` recounted from the block sequence.
    pub fn recompute_degree_state(&self) -> DegreeState {
        let mut degree = vec![0u32; self.num_right];
        let mut w = 0;
        for l in 0..self.num_left() {
            if let Some(b) = self.block(l) {
                w += 1;
                for &r in b {
                    degree[r as usize] += 1;
                }
            }
        }
        DegreeState {
            w,
            v1: degree.iter().filter(|&&k| k == 1).count(),
            v: degree.iter().filter(|&&k| k >= 2).count(),
        }
    }

    /// True if the live edges contain no cycle. A parallel pair of edges is
    /// a cycle of length two.
    pub fn is_forest(&self) -> bool {
        let n = self.num_left();
        let mut parent: Vec<usize> = (0..n + self.num_right).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (l, r) in self.edges() {
            let a = find(&mut parent, l);
            let b = find(&mut parent, n + r);
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// Debug dump, one line per left vertex: `l: r1 r2 ... rd` or
    /// `l: deleted`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for l in 0..self.num_left() {
            match self.block(l) {
                Some(b) => {
                    let _ = write!(out, "{l}:");
                    for r in b {
                        let _ = write!(out, " {r}");
                    }
                    out.push('\n');
                }
                None => {
                    let _ = writeln!(out, "{l}: deleted");
                }
            }
        }
        out
    }
}

/// Each of the `n` left vertices picks `d` right vertices independently and
/// uniformly, with replacement.
pub fn sample_graph<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> BipartiteGraph {
    let m = params.m as u32;
    let slots = (0..params.n * params.d)
        .map(|_| rng.random_range(0..m))
        .collect();
    BipartiteGraph::from_slots(params.d, params.m, slots).expect("ids drawn in range")
}

/// Draws `m` degrees, each at least two, summing exactly to `total`.
///
/// Each degree is first drawn from a Poisson law conditioned on being at
/// least two, with the parameter chosen so the conditional mean equals
/// `total / m`. The sum is then forced to `total` by incrementing uniformly
/// random entries, or decrementing uniformly random entries that are still
/// above two.
pub fn sample_core_degrees<R: Rng + ?Sized>(m: usize, total: usize, rng: &mut R) -> Result<Vec<u32>> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    if total < 2 * m {
        return Err(Error::Infeasible(format!(
            "degree sum {total} below the minimum 2m = {}",
            2 * m
        )));
    }
    let z = analysis::truncated_poisson_param(total as f64 / m as f64)?;
    let mut degrees: Vec<u32> = if z == 0.0 {
        vec![2; m]
    } else {
        (0..m).map(|_| sample_truncated_poisson(z, rng)).collect()
    };

    let mut sum: usize = degrees.iter().map(|&k| k as usize).sum();
    while sum < total {
        degrees[rng.random_range(0..m)] += 1;
        sum += 1;
    }
    if sum > total {
        let mut above: Vec<usize> = (0..m).filter(|&i| degrees[i] > 2).collect();
        while sum > total {
            let pick = rng.random_range(0..above.len());
            let i = above[pick];
            degrees[i] -= 1;
            sum -= 1;
            if degrees[i] == 2 {
                above.swap_remove(pick);
            }
        }
    }
    Ok(degrees)
}

/// One draw of Poisson(`z`) conditioned on a value of at least two.
pub fn sample_truncated_poisson<R: Rng + ?Sized>(z: f64, rng: &mut R) -> u32 {
    debug_assert!(z > 0.0);
    if z >= 5.0 {
        let poisson = Poisson::new(z).expect("positive finite rate");
        loop {
            let k = poisson.sample(rng);
            if k >= 2.0 {
                return k as u32;
            }
        }
    }
    // Inversion on the conditional pmf z^k / (k! f(z)), k >= 2.
    let u: f64 = rng.random();
    let mut k = 2u32;
    let mut p = 0.5 * z * z / analysis::poisson_tail2(z);
    let mut cumulative = p;
    while u > cumulative && p > 0.0 {
        k += 1;
        p *= z / k as f64;
        cumulative += p;
    }
    k
}

/// Core graph on `n` left vertices of degree `d` and `m` right vertices of
/// degree at least two: right degrees from [`sample_core_degrees`], edges
/// from a uniform pairing of the `dn` configuration points on each side.
pub fn sample_core_graph<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    d: usize,
    rng: &mut R,
) -> Result<BipartiteGraph> {
    ModelParams::new(n, m, d, 0)?;
    let total = d * n;
    let degrees = sample_core_degrees(m, total, rng)?;
    let mut points: Vec<u32> = Vec::with_capacity(total);
    for (r, &k) in degrees.iter().enumerate() {
        points.extend(std::iter::repeat_n(r as u32, k as usize));
    }
    // Left points are already in block order, so shuffling the right
    // points gives a uniform pairing.
    for i in (1..points.len()).rev() {
        let j = rng.random_range(0..=i);
        points.swap(i, j);
    }
    BipartiteGraph::from_slots(d, m, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(10, 0, 3, 0).is_err());
        assert!(ModelParams::new(10, 10, 1, 0).is_err());
        let p = ModelParams::from_alpha(90, 0.9, 3, 1).unwrap();
        assert_eq!(p.m, 100);
        assert_eq!(p.alpha(), 0.9);
    }

    #[test]
    fn single_vertex_single_right() {
        let p = ModelParams::new(1, 1, 3, 7).unwrap();
        let g = sample_graph(&p, &mut rng(7));
        assert_eq!(g.block(0), Some(&[0, 0, 0][..]));
        assert_eq!(g.right_degree(0), 3);
        assert_eq!(g.degree_state(), DegreeState { w: 1, v1: 0, v: 1 });
    }

    #[test]
    fn degree_state_examples() {
        let g = BipartiteGraph::empty(3, 4);
        assert_eq!(g.degree_state(), DegreeState::default());
        let g = BipartiteGraph::from_blocks(3, 3, &[[0, 1, 1]]).unwrap();
        assert_eq!(g.degree_state(), DegreeState { w: 1, v1: 1, v: 1 });
        assert_eq!(g.recompute_degree_state(), g.degree_state());
    }

    #[test]
    fn deletion_keeps_degree_sum() {
        let mut g = BipartiteGraph::from_blocks(2, 3, &[[0, 0], [0, 1], [2, 1]]).unwrap();
        assert!(g.delete_left(0));
        assert!(!g.delete_left(0));
        assert!(g.is_deleted(0));
        assert_eq!(g.block(0), None);
        assert_eq!(g.right_degrees(), &[1, 2, 1]);
        assert_eq!(g.degree_state(), DegreeState { w: 2, v1: 2, v: 1 });
        assert_eq!(g.degree_state(), g.recompute_degree_state());
    }

    #[test]
    fn rejects_malformed_blocks() {
        assert!(BipartiteGraph::from_blocks(3, 3, &[vec![0, 1]]).is_err());
        assert!(BipartiteGraph::from_blocks(2, 3, &[[0, 3]]).is_err());
    }

    #[test]
    fn dump_format() {
        let mut g = BipartiteGraph::from_blocks(2, 3, &[[0, 2], [1, 1]]).unwrap();
        g.delete_left(1);
        assert_eq!(g.dump(), "0: 0 2\n1: deleted\n");
    }

    #[test]
    fn forest_detection() {
        assert!(BipartiteGraph::from_blocks(2, 3, &[[0, 1], [1, 2]]).unwrap().is_forest());
        // parallel edge
        assert!(!BipartiteGraph::from_blocks(2, 3, &[[0, 0]]).unwrap().is_forest());
        // 4-cycle
        assert!(!BipartiteGraph::from_blocks(2, 2, &[[0, 1], [0, 1]]).unwrap().is_forest());
    }

    #[test]
    fn core_degrees_forced_and_infeasible() {
        assert_eq!(sample_core_degrees(5, 10, &mut rng(1)).unwrap(), vec![2; 5]);
        assert!(matches!(
            sample_core_degrees(3, 5, &mut rng(1)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn core_degrees_near_minimum() {
        let degrees = sample_core_degrees(1000, 2001, &mut rng(3)).unwrap();
        assert_eq!(degrees.iter().map(|&k| k as usize).sum::<usize>(), 2001);
        assert!(degrees.iter().all(|&k| k >= 2));
    }

    #[test]
    fn core_graph_forced_degrees() {
        let g = sample_core_graph(2, 3, 3, &mut rng(5)).unwrap();
        assert_eq!(g.right_degrees(), &[2, 2, 2]);
        assert!(sample_core_graph(1, 3, 3, &mut rng(5)).is_err());
    }

    #[test]
    fn core_graph_shape() {
        let g = sample_core_graph(1000, 1000, 4, &mut rng(11)).unwrap();
        assert_eq!(g.num_left(), 1000);
        assert_eq!(g.edge_count(), 4000);
        assert!(g.right_degrees().iter().all(|&k| k >= 2));
        assert_eq!(g.right_degrees().iter().map(|&k| k as usize).sum::<usize>(), 4000);
    }
}
