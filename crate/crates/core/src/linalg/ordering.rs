//! Minimum-degree ordering on the symmetrized pattern `A + Aᵀ`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::SparseMatrix;

/// Returns an elimination order (a permutation of `0..n`) computed by the
/// classical minimum-degree heuristic on the explicit elimination graph.
/// Ties are broken by the smaller node index, so the order is deterministic.
pub(crate) fn minimum_degree(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut scratch = Vec::new();

    while let Some((_, v)) = queue.pop_first() {
        eliminated[v] = true;
        order.push(v);
        let clique = core::mem::take(&mut adj[v]);
        for &u in &clique {
            queue.remove(&(adj[u].len(), u));
            // adj[u] <- (adj[u] ∪ clique) \ {u, v}
            scratch.clear();
            let (mut p, mut q) = (0, 0);
            let (left, right) = (&adj[u], &clique);
            while p < left.len() || q < right.len() {
                let next = match (left.get(p), right.get(q)) {
                    (Some(&x), Some(&y)) if x == y => {
                        p += 1;
                        q += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        p += 1;
                        x
                    }
                    (Some(&x), None) => {
                        p += 1;
                        x
                    }
                    (_, Some(&y)) => {
                        q += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next != u && next != v && !eliminated[next] {
                    scratch.push(next);
                }
            }
            core::mem::swap(&mut adj[u], &mut scratch);
            queue.insert((adj[u].len(), u));
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_a_permutation() {
        let a = SparseMatrix::from_dense(&[
            vec![4.0, 1.0, 0.0, 1.0],
            vec![1.0, 4.0, 1.0, 0.0],
            vec![0.0, 1.0, 4.0, 1.0],
            vec![1.0, 0.0, 1.0, 4.0],
        ])
        .unwrap();
        let mut p = minimum_degree(&a);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }

    #[test]
    fn star_graph_eliminates_leaves_first() {
        // node 0 is connected to all others
        let mut t = vec![];
        for i in 0..5 {
            t.push((i, i, 1.0));
            if i > 0 {
                t.push((0, i, 1.0));
                t.push((i, 0, 1.0));
            }
        }
        let a = SparseMatrix::from_triplets(5, 5, &t).unwrap();
        let p = minimum_degree(&a);
        assert_ne!(p[0], 0);
    }
}
