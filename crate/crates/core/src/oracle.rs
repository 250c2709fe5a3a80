//! Brute-force reference computations.
//!
//! Everything here is quadratic or worse and works from snapshots of the
//! maintained structures. Relative slack (`REL_TOL`) is applied only where a
//! check compares two independently summed floating-point path lengths.

use std::collections::{BTreeSet, HashMap};

use crate::dijkstra::{dense_shortest_paths, shortest_paths};
use crate::light_spanner::LightSpanner;
use crate::metric::{pow2, scale_of, MetricSpace, PointId, Scale};
use crate::net_spanner::Edge;
use crate::net_tree::{NetChange, NetHierarchy};

/// Relative slack for comparisons between separately computed distances.
pub const REL_TOL: f64 = 1e-9;

pub type WeightedEdge = (PointId, PointId, f64);

type Adjacency = HashMap<PointId, Vec<(PointId, f64)>>;

fn adjacency<'a>(edges: impl IntoIterator<Item = &'a WeightedEdge>) -> Adjacency {
    let mut adj: Adjacency = HashMap::new();
    for &(u, v, w) in edges {
        adj.entry(u).or_default().push((v, w));
        adj.entry(v).or_default().push((u, w));
    }
    adj
}

fn dijkstra(adj: &Adjacency, source: PointId) -> HashMap<PointId, f64> {
    let mut relax = 0;
    shortest_paths(
        source,
        None,
        f64::INFINITY,
        |p, visit| {
            if let Some(list) = adj.get(&p) {
                for &(q, w) in list {
                    visit(q, w);
                }
            }
        },
        &mut relax,
    )
}

/// `L` over dense vertex indices, answering many single-source queries
/// restricted to edges below a scale. Rows are cached per (limit, source).
struct ScaledGraph {
    index: HashMap<PointId, usize>,
    edges: Vec<(usize, usize, f64, Scale)>,
    adj: HashMap<Option<Scale>, Vec<Vec<(usize, f64)>>>,
    rows: HashMap<(Option<Scale>, usize), Vec<f64>>,
}

impl ScaledGraph {
    fn new(space: &MetricSpace, l: &[Edge]) -> Self {
        let mut index = HashMap::new();
        let mut id = |p: PointId| {
            let next = index.len();
            *index.entry(p).or_insert(next)
        };
        let edges = l
            .iter()
            .map(|e| {
                let w = space.dist(e.u, e.v);
                (id(e.u), id(e.v), w, scale_of(w).expect("positive length"))
            })
            .collect();
        Self {
            index,
            edges,
            adj: HashMap::new(),
            rows: HashMap::new(),
        }
    }

    /// Distance using edges of scale below `below` (all edges for `None`).
    fn distance(&mut self, u: PointId, v: PointId, below: Option<Scale>) -> f64 {
        if u == v {
            return 0.0;
        }
        let (Some(&a), Some(&b)) = (self.index.get(&u), self.index.get(&v)) else {
            return f64::INFINITY;
        };
        let n = self.index.len();
        let edges = &self.edges;
        let adj = self.adj.entry(below).or_insert_with(|| {
            let mut adj = vec![Vec::new(); n];
            for &(x, y, w, sc) in edges {
                if below.is_none_or(|lim| sc < lim) {
                    adj[x].push((y, w));
                    adj[y].push((x, w));
                }
            }
            adj
        });
        let row = self.rows.entry((below, a)).or_insert_with(|| {
            let mut relax = 0;
            dense_shortest_paths(adj, a, &mut relax)
        });
        row[b]
    }
}

/// Attaches lengths to edges.
pub fn weighted(space: &MetricSpace, edges: &[Edge]) -> Vec<WeightedEdge> {
    edges
        .iter()
        .map(|e| (e.u, e.v, space.dist(e.u, e.v)))
        .collect()
}

/// Shortest-path distance in the graph given by `edges`; infinite when `u`
/// and `v` are disconnected.
pub fn graph_distance(edges: &[WeightedEdge], u: PointId, v: PointId) -> f64 {
    if u == v {
        return 0.0;
    }
    dijkstra(&adjacency(edges), u)
        .get(&v)
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// All-pairs distances by Floyd-Warshall over vertices `0..n`.
#[allow(clippy::needless_range_loop)]
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        if w < d[u][v] {
            d[u][v] = w;
            d[v][u] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let cand = dik + d[k][j];
                if cand < d[i][j] {
                    d[i][j] = cand;
                }
            }
        }
    }
    d
}

/// Distance between `u` and `v` using only the edges of `l` whose scale is
/// below the scale of `(u, v)`.
pub fn dstar(space: &MetricSpace, l: &[Edge], u: PointId, v: PointId) -> f64 {
    if u == v {
        return 0.0;
    }
    let below = scale_of(space.dist(u, v)).expect("distinct points");
    let restricted: Vec<WeightedEdge> = weighted(space, l)
        .into_iter()
        .filter(|&(_, _, w)| scale_of(w).expect("positive length") < below)
        .collect();
    graph_distance(&restricted, u, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantKind {
    /// An edge outside `L` whose `delta*` exceeds `(1 + eps) * delta`.
    Stretch,
    /// An edge of `L` whose `delta*` is at most `(1 + eps / 3) * delta`.
    Lightness,
    /// An edge of `L` that is not an edge of `S`.
    NotInS,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub edge: Edge,
    pub kind: InvariantKind,
    pub dstar: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

/// Checks both invariants on every edge of `s`, and that `l` is a subset
/// of `s`.
pub fn check_invariants(space: &MetricSpace, s: &[Edge], l: &[Edge], eps: f64) -> ViolationReport {
    let in_l: BTreeSet<Edge> = l.iter().copied().collect();
    let in_s: BTreeSet<Edge> = s.iter().copied().collect();
    let mut report = ViolationReport::default();
    for e in l {
        if !in_s.contains(e) {
            report.violations.push(Violation {
                edge: *e,
                kind: InvariantKind::NotInS,
                dstar: f64::NAN,
                threshold: f64::NAN,
            });
        }
    }

    let mut graph = ScaledGraph::new(space, l);
    let mut sorted: Vec<Edge> = s.to_vec();
    sorted.sort_unstable();
    for e in sorted {
        let d = space.dist(e.u, e.v);
        let scale = scale_of(d).expect("distinct points");
        let ds = graph.distance(e.u, e.v, Some(scale));
        if in_l.contains(&e) {
            let threshold = (1.0 + eps / 3.0) * d;
            if ds <= threshold * (1.0 - REL_TOL) {
                report.violations.push(Violation {
                    edge: e,
                    kind: InvariantKind::Lightness,
                    dstar: ds,
                    threshold,
                });
            }
        } else {
            let threshold = (1.0 + eps) * d;
            if ds > threshold * (1.0 + REL_TOL) {
                report.violations.push(Violation {
                    edge: e,
                    kind: InvariantKind::Stretch,
                    dstar: ds,
                    threshold,
                });
            }
        }
    }
    report
}

/// [`check_invariants`] on the current state of `ds`.
pub fn check_structure(ds: &LightSpanner) -> ViolationReport {
    let s: Vec<Edge> = ds.net_spanner().edges().map(|(e, _)| *e).collect();
    check_invariants(ds.space(), &s, &ds.edges(), ds.eps())
}

/// Weight of a minimum spanning tree of the active points, by Prim's
/// algorithm on the complete graph. Zero for fewer than two points.
pub fn mst_weight(space: &MetricSpace) -> f64 {
    let pts: Vec<PointId> = space.active().iter().copied().collect();
    let n = pts.len();
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let mut k = usize::MAX;
        for j in 0..n {
            if !done[j] && (k == usize::MAX || best[j] < best[k]) {
                k = j;
            }
        }
        done[k] = true;
        total += best[k];
        for j in 0..n {
            if !done[j] {
                let d = space.dist(pts[k], pts[j]);
                if d < best[j] {
                    best[j] = d;
                }
            }
        }
    }
    total
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
        true
    }
}

/// Minimum spanning tree weight by Kruskal's algorithm.
pub fn mst_weight_kruskal(space: &MetricSpace) -> f64 {
    let pts: Vec<PointId> = space.active().iter().copied().collect();
    let n = pts.len();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((space.dist(pts[a], pts[b]), a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut sets = DisjointSets::new(n);
    let mut total = 0.0;
    let mut used = 0;
    for (d, a, b) in pairs {
        if sets.union(a, b) {
            total += d;
            used += 1;
            if used + 1 == n {
                break;
            }
        }
    }
    total
}

/// Largest ratio `delta_L(u, v) / delta(u, v)` over active pairs. Infinite
/// when `l` does not connect the active points; 1 when there is no pair.
pub fn max_stretch(space: &MetricSpace, l: &[Edge]) -> f64 {
    let pts: Vec<PointId> = space.active().iter().copied().collect();
    let mut graph = ScaledGraph::new(space, l);
    let mut worst: f64 = 1.0;
    for (k, &u) in pts.iter().enumerate() {
        for &v in &pts[k + 1..] {
            worst = worst.max(graph.distance(u, v, None) / space.dist(u, v));
        }
    }
    worst
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NetReport {
    pub problems: Vec<String>,
}

impl NetReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks `N_0 = X`, nesting, packing and covering for explicit levels.
///
/// Packing is checked as "distance at least `2^i`": with integer
/// coordinates the nets made of multiples of `2^i` meet it with equality.
pub fn validate_net_levels(space: &MetricSpace, levels: &[BTreeSet<PointId>]) -> NetReport {
    let mut report = NetReport::default();
    let active = space.active();
    match levels.first() {
        Some(n0) if n0 != active => report
            .problems
            .push(format!("N_0 has {} points, X has {}", n0.len(), active.len())),
        None if !active.is_empty() => report.problems.push("no levels".into()),
        _ => {}
    }
    for (i, level) in levels.iter().enumerate() {
        let members: Vec<PointId> = level.iter().copied().collect();
        let gap = pow2(i as i32);
        for (k, &u) in members.iter().enumerate() {
            for &v in &members[k + 1..] {
                let d = space.dist(u, v);
                if d < gap {
                    report
                        .problems
                        .push(format!("packing: {u} and {v} at {d} in N_{i}"));
                }
            }
        }
        if i == 0 {
            continue;
        }
        let below = &levels[i - 1];
        for &p in level {
            if !below.contains(&p) {
                report
                    .problems
                    .push(format!("nesting: {p} in N_{i} but not N_{}", i - 1));
            }
        }
        for &p in below {
            if !members.iter().any(|&q| space.dist(p, q) <= gap) {
                report
                    .problems
                    .push(format!("covering: {p} in N_{} has no cover in N_{i}", i - 1));
            }
        }
    }
    report
}

/// [`validate_net_levels`] plus completeness and symmetry of the neighbor
/// lists.
pub fn validate_net_hierarchy(nets: &NetHierarchy, space: &MetricSpace) -> NetReport {
    let mut report = validate_net_levels(space, nets.levels());
    for (i, level) in nets.levels().iter().enumerate() {
        let r = nets.radius(i);
        for &p in level {
            let want: BTreeSet<PointId> = level
                .iter()
                .copied()
                .filter(|&q| q != p && space.dist(p, q) <= r)
                .collect();
            match nets.neighbors(i, p) {
                Some(got) if *got == want => {}
                _ => report
                    .problems
                    .push(format!("neighbors: list of {p} at level {i} is wrong")),
            }
        }
    }
    report
}

/// Logged net changes at level `i` farther than `2^i` from the updated
/// point, and removals of points other than the updated point.
pub fn locality_violations(space: &MetricSpace, x: PointId, changes: &[NetChange]) -> Vec<NetChange> {
    changes
        .iter()
        .filter(|c| {
            space.dist(c.point, x) > pow2(c.level as i32) || (!c.added && c.point != x)
        })
        .copied()
        .collect()
}

/// The net-tree spanner by definition: pairs sharing a level `i` at
/// distance at most `c * 2^i`.
pub fn net_spanner_reference(nets: &NetHierarchy, space: &MetricSpace, c: f64) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    for (i, level) in nets.levels().iter().enumerate() {
        let members: Vec<PointId> = level.iter().copied().collect();
        let reach = c * pow2(i as i32);
        for (k, &u) in members.iter().enumerate() {
            for &v in &members[k + 1..] {
                if space.dist(u, v) <= reach {
                    out.insert(Edge::new(u, v));
                }
            }
        }
    }
    out
}

/// `estimate` is a coarse `alpha`-approximation of `exact` relative to the
/// base length: when `exact <= 2 * base` it must lie in
/// `[exact, alpha * exact]`, otherwise it must be at least `2 * base`.
pub fn is_coarse_approx(estimate: f64, exact: f64, base: f64, alpha: f64) -> bool {
    if exact <= 2.0 * base {
        exact <= estimate && estimate <= alpha * exact
    } else {
        estimate >= 2.0 * base
    }
}

/// [`is_coarse_approx`] with relative slack `tol` on every bound.
pub fn is_coarse_approx_tol(estimate: f64, exact: f64, base: f64, alpha: f64, tol: f64) -> bool {
    if exact <= 2.0 * base {
        exact * (1.0 - tol) <= estimate && estimate <= alpha * exact * (1.0 + tol)
    } else {
        estimate >= 2.0 * base * (1.0 - tol)
    }
}

/// `exact <= estimate <= alpha * exact`, with relative slack `tol`.
/// Two infinities match.
pub fn is_plain_approx(estimate: f64, exact: f64, alpha: f64, tol: f64) -> bool {
    if exact.is_infinite() {
        return estimate.is_infinite();
    }
    exact * (1.0 - tol) <= estimate && estimate <= alpha * exact * (1.0 + tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateKind {
    /// A `delta*` estimate that is not a coarse approximation.
    Dstar,
    /// A `delta_L` estimate that is not an approximation.
    DeltaL,
    /// An `S_small` edge without a required entry.
    Missing,
    /// An entry whose key is not a current `S_small` edge of that kind.
    Stale,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateFailure {
    pub edge: Edge,
    pub kind: EstimateKind,
    pub estimate: f64,
    pub exact: f64,
    pub alpha: f64,
}

/// Checks every stored estimate of a fast-mode structure against exact
/// distances, and that the keys are exactly the eligible `S_small` edges.
/// Returns nothing for exact-mode structures.
pub fn sweep_estimates(ds: &LightSpanner) -> Vec<EstimateFailure> {
    let Some(small) = ds.small_spanner() else {
        return Vec::new();
    };
    let space = ds.space();
    let store = ds.store();
    let dl_limit = ds.max_scale() - 2;
    let mut out = Vec::new();
    let fail = |edge, kind, estimate, exact, alpha| EstimateFailure {
        edge,
        kind,
        estimate,
        exact,
        alpha,
    };

    for (e, info) in small.edges() {
        if store.dstar(*e).is_none() {
            out.push(fail(*e, EstimateKind::Missing, f64::NAN, f64::NAN, f64::NAN));
        }
        if info.scale <= dl_limit && store.dl(*e).is_none() {
            out.push(fail(*e, EstimateKind::Missing, f64::NAN, f64::NAN, f64::NAN));
        }
    }

    let mut graph = ScaledGraph::new(space, &ds.edges());

    let mut dstar_entries: Vec<_> = store.dstar_entries().collect();
    dstar_entries.sort_by_key(|(e, _)| *e);
    for (e, entry) in dstar_entries {
        let Some(info) = small.edge(e) else {
            out.push(fail(e, EstimateKind::Stale, entry.value, f64::NAN, entry.alpha));
            continue;
        };
        let exact = graph.distance(e.u, e.v, Some(info.scale));
        if !is_coarse_approx_tol(entry.value, exact, info.length, entry.alpha, REL_TOL) {
            out.push(fail(e, EstimateKind::Dstar, entry.value, exact, entry.alpha));
        }
    }

    let mut dl_entries: Vec<_> = store.dl_entries().collect();
    dl_entries.sort_by_key(|(e, _)| *e);
    for (e, entry) in dl_entries {
        match small.edge(e) {
            Some(info) if info.scale <= dl_limit => {}
            _ => {
                out.push(fail(e, EstimateKind::Stale, entry.value, f64::NAN, entry.alpha));
                continue;
            }
        }
        let exact = graph.distance(e.u, e.v, None);
        if !is_plain_approx(entry.value, exact, entry.alpha, REL_TOL) {
            out.push(fail(e, EstimateKind::DeltaL, entry.value, exact, entry.alpha));
        }
    }
    out
}

/// Offline greedy `t`-spanner of an edge list: edges are scanned by
/// increasing `(length, min id, max id)` and kept when the current graph
/// has no path of length at most `t` times theirs.
pub fn greedy_spanner_reference(edges: &[WeightedEdge], t: f64) -> Vec<Edge> {
    let mut order: Vec<(f64, Edge)> = edges
        .iter()
        .filter(|(u, v, _)| u != v)
        .map(|&(u, v, w)| (w, Edge::new(u, v)))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.dedup_by(|a, b| a.1 == b.1);
    let mut kept: Vec<WeightedEdge> = Vec::new();
    let mut out = Vec::new();
    for (w, e) in order {
        if graph_distance(&kept, e.u, e.v) > t * w {
            kept.push((e.u, e.v, w));
            out.push(e);
        }
    }
    out.sort_unstable();
    out
}

/// Greedy `t`-spanner of the complete graph on the active points.
pub fn greedy_spanner_of_space(space: &MetricSpace, t: f64) -> Vec<Edge> {
    let pts: Vec<PointId> = space.active().iter().copied().collect();
    let mut edges = Vec::new();
    for (k, &u) in pts.iter().enumerate() {
        for &v in &pts[k + 1..] {
            edges.push((u, v, space.dist(u, v)));
        }
    }
    greedy_spanner_reference(&edges, t)
}
