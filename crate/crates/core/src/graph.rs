//! Small directed-graph helpers over adjacency lists.

use alloc::vec;
use alloc::vec::Vec;

/// Strongly connected components of the subgraph induced by `alive`,
/// in reverse topological order (Tarjan).
pub(crate) fn sccs_within(adj: &[Vec<usize>], alive: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;

    for root in 0..n {
        if !alive[root] || index[root] != UNSEEN {
            continue;
        }
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut edge)) = frames.last_mut() {
            if let Some(&w) = adj[v].get(*edge) {
                *edge += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

pub(crate) fn scc_ids(adj: &[Vec<usize>]) -> Vec<usize> {
    let mut id = vec![0; adj.len()];
    for (c, comp) in sccs_within(adj, &vec![true; adj.len()]).into_iter().enumerate() {
        for v in comp {
            id[v] = c;
        }
    }
    id
}

/// A component carries a cycle if it has two nodes or a self-loop.
pub(crate) fn is_cyclic(adj: &[Vec<usize>], comp: &[usize]) -> bool {
    comp.len() > 1 || adj[comp[0]].contains(&comp[0])
}

pub(crate) fn reachable(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut work = vec![start];
    seen[start] = true;
    while let Some(v) = work.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                work.push(w);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components() {
        let adj = vec![vec![1], vec![0, 2], vec![2], vec![]];
        let mut comps = sccs_within(&adj, &[true; 4]);
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2], vec![3]]);
        assert!(is_cyclic(&adj, &[2]));
        assert!(!is_cyclic(&adj, &[3]));
        let comps = sccs_within(&adj, &[true, false, true, true]);
        assert_eq!(comps.len(), 3);
    }
}
