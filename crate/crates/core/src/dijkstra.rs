use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::hash::Hash;

use ordered_float::OrderedFloat;

/// Single-source Dijkstra over an implicit graph. Nodes farther than `cutoff`
/// are not settled. When `target` is given the search stops as soon as it is
/// settled. Returns the settled distances.
pub(crate) fn shortest_paths<N, F>(
    source: N,
    target: Option<N>,
    cutoff: f64,
    mut for_each_edge: F,
    relaxations: &mut u64,
) -> HashMap<N, f64>
where
    N: Copy + Eq + Hash + Ord,
    F: FnMut(N, &mut dyn FnMut(N, f64)),
{
    let mut best: HashMap<N, f64> = HashMap::new();
    let mut settled: HashMap<N, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(source, 0.0);
    heap.push(Reverse((OrderedFloat(0.0), source)));
    while let Some(Reverse((OrderedFloat(d), node))) = heap.pop() {
        if d > cutoff {
            break;
        }
        if settled.contains_key(&node) {
            continue;
        }
        settled.insert(node, d);
        if Some(node) == target {
            break;
        }
        for_each_edge(node, &mut |next, w| {
            let nd = d + w;
            if nd > cutoff || settled.contains_key(&next) {
                return;
            }
            match best.entry(next) {
                Entry::Occupied(mut e) => {
                    if nd < *e.get() {
                        e.insert(nd);
                        heap.push(Reverse((OrderedFloat(nd), next)));
                        *relaxations += 1;
                    }
                }
                Entry::Vacant(e) => {
                    e.insert(nd);
                    heap.push(Reverse((OrderedFloat(nd), next)));
                    *relaxations += 1;
                }
            }
        });
    }
    settled
}

/// Dijkstra over nodes `0..n` given by an edge callback, stopping once every
/// node in `targets` is settled or the frontier passes `cutoff`. Returns the
/// distance of each target, infinite when it was not reached within `cutoff`.
pub(crate) fn distances_to<F>(
    n: usize,
    source: usize,
    targets: &[usize],
    cutoff: f64,
    mut for_each_edge: F,
    relaxations: &mut u64,
) -> Vec<f64>
where
    F: FnMut(usize, &mut dyn FnMut(usize, f64)),
{
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut wanted = vec![false; n];
    let mut remaining = 0;
    for &t in targets {
        if !wanted[t] {
            wanted[t] = true;
            remaining += 1;
        }
    }
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), source)));
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if d > cutoff {
            break;
        }
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if wanted[u] {
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        for_each_edge(u, &mut |v, w| {
            let nd = d + w;
            if nd <= cutoff && nd < dist[v] {
                dist[v] = nd;
                *relaxations += 1;
                heap.push(Reverse((OrderedFloat(nd), v)));
            }
        });
    }
    targets
        .iter()
        .map(|&t| if settled[t] { dist[t] } else { f64::INFINITY })
        .collect()
}

/// Dijkstra over a dense index-based adjacency list. Unreachable entries are
/// `f64::INFINITY`.
pub(crate) fn dense_shortest_paths(
    adj: &[Vec<(usize, f64)>],
    source: usize,
    relaxations: &mut u64,
) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), source)));
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                *relaxations += 1;
                heap.push(Reverse((OrderedFloat(nd), v)));
            }
        }
    }
    dist
}
