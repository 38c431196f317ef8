use std::collections::VecDeque;

use super::Matching;
use crate::graph_model::BipartiteGraph;

const NIL: u32 = u32::MAX;
const INF: u32 = u32::MAX;

/// Maximum-cardinality matching by Hopcroft-Karp: BFS builds the layered
/// graph of shortest augmenting paths from free left vertices, then an
/// iterative DFS augments along vertex-disjoint paths in it. Repeats until
/// no augmenting path is left. Deterministic for a given graph.
pub fn max_matching(graph: &BipartiteGraph) -> Matching {
    let n = graph.num_left();
    let m = graph.num_right();

    // Distinct neighbours per left vertex, CSR layout.
    let mut start = Vec::with_capacity(n + 1);
    let mut adj: Vec<u32> = Vec::with_capacity(graph.edge_count());
    start.push(0);
    for l in 0..n {
        if let Some(block) = graph.block(l) {
            let from = adj.len();
            for &r in block {
                if !adj[from..].contains(&r) {
                    adj.push(r);
                }
            }
        }
        start.push(adj.len());
    }

    let mut match_left = vec![NIL; n];
    let mut match_right = vec![NIL; m];
    let mut dist = vec![INF; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut stack: Vec<u32> = Vec::new();
    let mut cursor = vec![0usize; n];

    // Greedy start.
    for l in 0..n {
        for &r in &adj[start[l]..start[l + 1]] {
            if match_right[r as usize] == NIL {
                match_left[l] = r;
                match_right[r as usize] = l as u32;
                break;
            }
        }
    }

    loop {
        // BFS layering from free left vertices.
        queue.clear();
        for l in 0..n {
            if match_left[l] == NIL && start[l] < start[l + 1] {
                dist[l] = 0;
                queue.push_back(l as u32);
            } else {
                dist[l] = INF;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            let l = l as usize;
            for &r in &adj[start[l]..start[l + 1]] {
                let next = match_right[r as usize];
                if next == NIL {
                    found = true;
                } else if dist[next as usize] == INF {
                    dist[next as usize] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            break;
        }

        cursor.copy_from_slice(&start[..n]);
        let mut augmented = false;
        for root in 0..n {
            if match_left[root] != NIL || dist[root] != 0 {
                continue;
            }
            stack.clear();
            stack.push(root as u32);
            while let Some(&l) = stack.last() {
                let l = l as usize;
                if cursor[l] == start[l + 1] {
                    // Dead end: drop from this phase.
                    dist[l] = INF;
                    stack.pop();
                    continue;
                }
                let r = adj[cursor[l]];
                cursor[l] += 1;
                let next = match_right[r as usize];
                if next == NIL {
                    // Flip the path held on the stack.
                    let mut r = r;
                    while let Some(pl) = stack.pop() {
                        let prev = match_left[pl as usize];
                        match_left[pl as usize] = r;
                        match_right[r as usize] = pl;
                        r = prev;
                    }
                    augmented = true;
                    break;
                }
                if dist[next as usize] == dist[l] + 1 {
                    stack.push(next);
                }
            }
        }
        if !augmented {
            break;
        }
    }

    Matching::from_pairs(
        match_left
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r != NIL)
            .map(|(l, &r)| (l as u32, r))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::verify_matching;

    #[test]
    fn one_right_vertex() {
        let g = BipartiteGraph::from_blocks(3, 1, &[[0, 0, 0], [0, 0, 0]]).unwrap();
        assert_eq!(max_matching(&g).size(), 1);
    }

    #[test]
    fn needs_augmentation() {
        // Greedy matches 0-0 first; 1 can only use 0, so 0 must move to 1.
        let g = BipartiteGraph::from_blocks(2, 2, &[[0, 1], [0, 0]]).unwrap();
        let mm = max_matching(&g);
        assert_eq!(mm.size(), 2);
        assert!(verify_matching(&g, &mm));
    }

    #[test]
    fn skips_deleted_blocks() {
        let mut g = BipartiteGraph::from_blocks(2, 3, &[[0, 1], [0, 1], [1, 2]]).unwrap();
        g.delete_left(2);
        let mm = max_matching(&g);
        assert_eq!(mm.size(), 2);
        assert!(mm.pairs().iter().all(|&(l, _)| l != 2));
    }

    #[test]
    fn long_augmenting_chain() {
        // Greedy puts left i on right i + 1, so the last left vertex can
        // only be matched by shifting every other one down by one.
        let k = 5000u32;
        let mut blocks: Vec<[u32; 2]> = (0..k).map(|i| [i + 1, i]).collect();
        blocks.push([k, k]);
        let g = BipartiteGraph::from_blocks(2, k as usize + 1, &blocks).unwrap();
        let mm = max_matching(&g);
        assert_eq!(mm.size(), k as usize + 1);
        assert!(verify_matching(&g, &mm));
    }
}
