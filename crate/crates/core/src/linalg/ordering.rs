//! Minimum-degree ordering on an explicit elimination graph.

use std::collections::BTreeSet;

/// Elimination order of a symmetric pattern given as off-diagonal adjacency
/// lists. `order[k]` is the original index eliminated at step `k`.
///
/// Ties are broken by the smaller index, so the ordering is deterministic.
pub fn minimum_degree(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut adj: Vec<Vec<usize>> = adjacency.to_vec();
    for (i, list) in adj.iter_mut().enumerate() {
        list.sort_unstable();
        list.dedup();
        list.retain(|&j| j != i);
    }
    let mut queue: BTreeSet<(usize, usize)> =
        adj.iter().enumerate().map(|(i, l)| (l.len(), i)).collect();
    let mut order = Vec::with_capacity(n);
    let mut merged = Vec::new();

    while let Some((_, p)) = queue.pop_first() {
        order.push(p);
        let clique = std::mem::take(&mut adj[p]);
        for &u in &clique {
            queue.remove(&(adj[u].len(), u));
            merged.clear();
            merge_without(&adj[u], &clique, p, u, &mut merged);
            std::mem::swap(&mut adj[u], &mut merged);
            queue.insert((adj[u].len(), u));
        }
    }
    order
}

/// Sorted union of `a` and `b` with `skip_a` and `skip_b` removed.
fn merge_without(a: &[usize], b: &[usize], skip_a: usize, skip_b: usize, out: &mut Vec<usize>) {
    let (mut i, mut j) = (0, 0);
    let push = |v: usize, out: &mut Vec<usize>| {
        if v != skip_a && v != skip_b {
            out.push(v);
        }
    };
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            push(a[i], out);
            i += 1;
        } else if a[i] > b[j] {
            push(b[j], out);
            j += 1;
        } else {
            push(a[i], out);
            i += 1;
            j += 1;
        }
    }
    for &v in &a[i..] {
        push(v, out);
    }
    for &v in &b[j..] {
        push(v, out);
    }
}

/// Inverse of a permutation.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}
