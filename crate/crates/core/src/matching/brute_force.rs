use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph_model::BipartiteGraph;

/// Largest `n` and `m` the exhaustive matcher accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Maximum matching size by exhaustive search: each left vertex in turn is
/// either skipped or assigned a free neighbour, memoised on
/// `(left index, used right set)`.
pub fn brute_force_matching(graph: &BipartiteGraph) -> Result<usize> {
    let (n, m) = (graph.num_left(), graph.num_right());
    if n > BRUTE_FORCE_LIMIT || m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            m,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let neighbours: Vec<u16> = (0..n)
        .map(|l| {
            graph
                .block(l)
                .map_or(0, |b| b.iter().fold(0u16, |acc, &r| acc | 1 << r))
        })
        .collect();
    let mut memo = HashMap::new();
    Ok(best(&neighbours, 0, 0, &mut memo))
}

fn best(neighbours: &[u16], left: usize, used: u16, memo: &mut HashMap<(usize, u16), usize>) -> usize {
    if left == neighbours.len() {
        return 0;
    }
    if let Some(&v) = memo.get(&(left, used)) {
        return v;
    }
    let mut result = best(neighbours, left + 1, used, memo);
    let mut free = neighbours[left] & !used;
    while free != 0 {
        let bit = free & free.wrapping_neg();
        free ^= bit;
        result = result.max(1 + best(neighbours, left + 1, used | bit, memo));
    }
    memo.insert((left, used), result);
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(brute_force_matching(&BipartiteGraph::empty(2, 3)).unwrap(), 0);
        let g = BipartiteGraph::from_blocks(2, 3, &[[0, 1], [0, 1], [0, 1]]).unwrap();
        assert_eq!(brute_force_matching(&g).unwrap(), 2);
        let g = BipartiteGraph::from_blocks(3, 1, &[[0, 0, 0], [0, 0, 0]]).unwrap();
        assert_eq!(brute_force_matching(&g).unwrap(), 1);
    }

    #[test]
    fn guard() {
        let g = BipartiteGraph::empty(2, 13);
        assert!(matches!(brute_force_matching(&g), Err(Error::TooLarge { .. })));
    }
}
