//! The delayed greedy spanner `L`, a subgraph of the net-tree spanner `S`.
//!
//! `L` is kept so that every edge `(u, v)` of `S` satisfies
//!
//! * `(u, v)` not in `L` implies `delta*(u, v) <= (1 + eps) * delta(u, v)`,
//! * `(u, v)` in `L` implies `delta*(u, v) > (1 + eps / 3) * delta(u, v)`,
//!
//! where `delta*(u, v)` is the distance between `u` and `v` using only edges
//! of `L` whose scale is strictly smaller than the scale of `(u, v)`.
//!
//! After an update at `x`, only edges near `x` need to be revisited. In
//! [`Mode::Exact`] their `delta*` is computed with a truncated Dijkstra. In
//! [`Mode::Fast`] a second, much finer net-tree spanner `S_small` is kept and
//! every one of its edges carries a stored estimate of `delta*`, and of
//! `delta_L` for the shorter edges; estimates near `x` are refreshed scale by
//! scale from small sketch graphs.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::time::Instant;

use crate::dijkstra::{dense_shortest_paths, distances_to};
use crate::error::{Error, Result};
use crate::metric::{pow2, MetricSpace, PointId, Scale};
use crate::net_spanner::{Edge, NetSpanner, SpannerParams};
use crate::net_tree::{ChangeSet, NetHierarchy};
use crate::oracle;

/// Constant in the approximation factor `1 + KAPPA * i * eps_small` of the
/// stored estimates.
pub const KAPPA: u32 = 342;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Fast,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Fast => "fast",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    Insert,
    Delete,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Insert => "insert",
            OpKind::Delete => "delete",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub ball_queries: u64,
    pub relaxations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateReport {
    pub op: OpKind,
    pub point: PointId,
    /// Edges that joined `L`, sorted.
    pub added: Vec<Edge>,
    /// Edges that left `L`, sorted.
    pub removed: Vec<Edge>,
    /// Net membership changes caused by the update.
    pub net_changes: ChangeSet,
    pub time_ns: u64,
    pub counters: Counters,
}

impl UpdateReport {
    pub fn recourse(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateEntry {
    pub value: f64,
    /// Approximation factor promised when the entry was written.
    pub alpha: f64,
}

/// Stored estimates keyed by `S_small` edges.
#[derive(Clone, Debug, Default)]
pub struct EstimateStore {
    dstar: HashMap<Edge, EstimateEntry>,
    dl: HashMap<Edge, EstimateEntry>,
}

impl EstimateStore {
    pub fn dstar(&self, e: Edge) -> Option<EstimateEntry> {
        self.dstar.get(&e).copied()
    }

    pub fn dl(&self, e: Edge) -> Option<EstimateEntry> {
        self.dl.get(&e).copied()
    }

    pub fn dstar_entries(&self) -> impl Iterator<Item = (Edge, EstimateEntry)> + '_ {
        self.dstar.iter().map(|(e, x)| (*e, *x))
    }

    pub fn dl_entries(&self) -> impl Iterator<Item = (Edge, EstimateEntry)> + '_ {
        self.dl.iter().map(|(e, x)| (*e, *x))
    }

    pub fn len(&self) -> usize {
        self.dstar.len() + self.dl.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dstar.is_empty() && self.dl.is_empty()
    }

    fn remove(&mut self, e: &Edge) {
        self.dstar.remove(e);
        self.dl.remove(e);
    }
}

/// Deliberate defects for checking that the oracles notice them.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Recompute never puts an edge into `L`.
    NeverAdd,
    /// Recompute puts every edge it looks at into `L`.
    AlwaysAdd,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct LEdge {
    length: f64,
    scale: Scale,
}

/// Sketch graph over the net points near an update center.
struct Sketch {
    index: HashMap<PointId, usize>,
    adj: Vec<Vec<(usize, f64)>>,
    cache: HashMap<usize, Vec<f64>>,
}

impl Sketch {
    fn distance(&mut self, u: PointId, v: PointId, relaxations: &mut u64) -> Result<f64> {
        if u == v {
            return Ok(0.0);
        }
        let a = *self.index.get(&u).ok_or(Error::NotInSketch(u))?;
        let b = *self.index.get(&v).ok_or(Error::NotInSketch(v))?;
        let (src, dst) = if self.cache.contains_key(&b) { (b, a) } else { (a, b) };
        let adj = &self.adj;
        let row = self
            .cache
            .entry(src)
            .or_insert_with(|| dense_shortest_paths(adj, src, relaxations));
        Ok(row[dst])
    }
}

type Journal = HashMap<Edge, bool>;

#[derive(Clone, Debug)]
pub struct LightSpanner {
    space: MetricSpace,
    nets: NetHierarchy,
    s: NetSpanner,
    s_small: Option<NetSpanner>,
    l: HashMap<Edge, LEdge>,
    buckets: BTreeMap<Scale, BTreeSet<Edge>>,
    adjacency: HashMap<PointId, BTreeMap<PointId, LEdge>>,
    store: EstimateStore,
    mode: Mode,
    eps: f64,
    eps_small: f64,
    relaxations: Cell<u64>,
    fault: Option<Fault>,
    short_shift: i32,
}

impl LightSpanner {
    /// Empty structure over `space`. Points already marked active in `space`
    /// are deactivated; they have to be inserted like any other point.
    pub fn new(mut space: MetricSpace, eps: f64, mode: Mode) -> Result<Self> {
        let params = SpannerParams::new(eps)?;
        let top = space.top_scale();
        let eps_small = eps / (3.0 * f64::from(KAPPA) * top.max(1) as f64);
        let small = SpannerParams::new(eps_small)?;
        // Ball radii requested by the update procedures, as multiples of
        // c * 2^level at the lowest level a query can be made at.
        let radius_factor = match mode {
            Mode::Exact => 8.0 * params.c,
            Mode::Fast => 64.0 * small.c,
        };
        let stale: Vec<PointId> = space.active().iter().copied().collect();
        for p in stale {
            space.set_active(p, false);
        }
        Ok(Self {
            nets: NetHierarchy::new(top, radius_factor),
            space,
            s: NetSpanner::new(params),
            s_small: (mode == Mode::Fast).then(|| NetSpanner::new(small)),
            l: HashMap::new(),
            buckets: BTreeMap::new(),
            adjacency: HashMap::new(),
            store: EstimateStore::default(),
            mode,
            eps,
            eps_small,
            relaxations: Cell::new(0),
            fault: None,
            short_shift: 3,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eps_small(&self) -> f64 {
        self.eps_small
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn nets(&self) -> &NetHierarchy {
        &self.nets
    }

    pub fn net_spanner(&self) -> &NetSpanner {
        &self.s
    }

    pub fn small_spanner(&self) -> Option<&NetSpanner> {
        self.s_small.as_ref()
    }

    pub fn store(&self) -> &EstimateStore {
        &self.store
    }

    /// Largest scale a pair of points can have: the scale of `phi` itself.
    pub fn max_scale(&self) -> Scale {
        self.nets.top() as Scale + 1
    }

    /// `1 + KAPPA * i * eps_small`.
    pub fn alpha(&self, i: Scale) -> f64 {
        1.0 + f64::from(KAPPA) * f64::from(i) * self.eps_small
    }

    /// Registers a point in the underlying space without inserting it.
    pub fn register(&mut self, coords: &[f64]) -> Result<PointId> {
        self.space.add_point(coords)
    }

    #[doc(hidden)]
    pub fn inject_fault(&mut self, fault: Option<Fault>) {
        self.fault = fault;
    }

    /// Pairs closer than `2^(i - shift)` are weighted by stored estimates in
    /// the sketch graph at scale `i`. The default is 3.
    #[doc(hidden)]
    pub fn set_sketch_shift(&mut self, shift: i32) {
        self.short_shift = shift;
    }

    // ---- L accessors -------------------------------------------------------

    pub fn contains(&self, u: PointId, v: PointId) -> bool {
        u != v && self.l.contains_key(&Edge::new(u, v))
    }

    /// Edges of `L`, sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.l.keys().copied().collect();
        out.sort_unstable();
        out
    }

    /// Edges of `L` with scale exactly `i`.
    pub fn bucket(&self, i: Scale) -> impl Iterator<Item = Edge> + '_ {
        self.buckets.get(&i).into_iter().flatten().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.l.len()
    }

    pub fn total_weight(&self) -> f64 {
        let mut w: Vec<f64> = self.l.values().map(|e| e.length).collect();
        w.sort_by(f64::total_cmp);
        w.iter().sum()
    }

    /// Weight of `L` over the weight of a minimum spanning tree of the
    /// active points.
    pub fn lightness(&self) -> Result<f64> {
        if self.space.active_count() < 2 {
            return Err(Error::TooFewPoints);
        }
        if self.l.is_empty() {
            return Err(Error::EmptySpanner);
        }
        Ok(self.total_weight() / oracle::mst_weight(&self.space))
    }

    /// `u v length scale` per edge of `L`, sorted.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in self.edges() {
            let info = self.l[&e];
            let _ = writeln!(out, "{} {} {} {}", e.u, e.v, info.length, info.scale);
        }
        out
    }

    /// `u v scale dstar dL` per stored key, sorted; `-` marks a missing value.
    pub fn dump_estimates(&self) -> String {
        let keys: BTreeSet<Edge> = self
            .store
            .dstar
            .keys()
            .chain(self.store.dl.keys())
            .copied()
            .collect();
        let fmt = |x: Option<EstimateEntry>| x.map_or("-".to_string(), |x| x.value.to_string());
        let mut out = String::new();
        for e in keys {
            let scale = crate::metric::scale_of(self.space.dist(e.u, e.v)).unwrap_or(0);
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                e.u,
                e.v,
                scale,
                fmt(self.store.dstar(e)),
                fmt(self.store.dl(e))
            );
        }
        out
    }

    // ---- updates -----------------------------------------------------------

    pub fn insert(&mut self, x: PointId) -> Result<UpdateReport> {
        self.require(Mode::Exact)?;
        self.apply(OpKind::Insert, x)
    }

    pub fn delete(&mut self, x: PointId) -> Result<UpdateReport> {
        self.require(Mode::Exact)?;
        self.apply(OpKind::Delete, x)
    }

    pub fn insert_fast(&mut self, x: PointId) -> Result<UpdateReport> {
        self.require(Mode::Fast)?;
        self.apply(OpKind::Insert, x)
    }

    pub fn delete_fast(&mut self, x: PointId) -> Result<UpdateReport> {
        self.require(Mode::Fast)?;
        self.apply(OpKind::Delete, x)
    }

    /// Inserts or deletes with the procedure matching the structure's mode.
    pub fn update(&mut self, op: OpKind, x: PointId) -> Result<UpdateReport> {
        self.apply(op, x)
    }

    fn require(&self, mode: Mode) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch(self.mode.name()))
        }
    }

    fn apply(&mut self, op: OpKind, x: PointId) -> Result<UpdateReport> {
        let start = Instant::now();
        let balls_before = self.nets.ball_queries();
        let relax_before = self.relaxations.get();
        if !self.space.contains(x) {
            return Err(Error::UnknownPoint(x));
        }
        let mut journal = Journal::new();
        let changes = match op {
            OpKind::Insert => {
                if self.nets.contains(x) {
                    return Err(Error::DuplicatePoint(x));
                }
                let changes = self.nets.insert_point(&self.space, x)?;
                self.space.set_active(x, true);
                changes
            }
            OpKind::Delete => {
                if !self.nets.contains(x) {
                    return Err(Error::AbsentPoint(x));
                }
                let changes = self.nets.delete_point(&self.space, x)?;
                self.space.set_active(x, false);
                let incident: Vec<PointId> = self
                    .adjacency
                    .get(&x)
                    .map(|m| m.keys().copied().collect())
                    .unwrap_or_default();
                for y in incident {
                    self.set_membership(Edge::new(x, y), false, &mut journal);
                }
                changes
            }
        };

        if let Some(small) = self.s_small.as_mut() {
            let delta = small.sync(&self.nets, &self.space, &changes)?;
            for e in &delta.removed {
                self.store.remove(e);
            }
        }
        let delta = self.s.sync(&self.nets, &self.space, &changes)?;
        for e in delta.removed {
            if self.l.contains_key(&e) {
                debug_assert!(e.touches(x));
                self.set_membership(e, false, &mut journal);
            }
        }

        match self.mode {
            Mode::Exact => self.recompute(x, &mut journal)?,
            Mode::Fast => {
                self.recompute_fast(x, &mut journal)?;
                #[cfg(debug_assertions)]
                self.debug_check_store_keys();
            }
        }

        let mut added = Vec::new();
        let mut removed = Vec::new();
        for (e, was) in journal {
            match (was, self.l.contains_key(&e)) {
                (false, true) => added.push(e),
                (true, false) => removed.push(e),
                _ => {}
            }
        }
        added.sort_unstable();
        removed.sort_unstable();
        Ok(UpdateReport {
            op,
            point: x,
            added,
            removed,
            net_changes: changes,
            time_ns: start.elapsed().as_nanos() as u64,
            counters: Counters {
                ball_queries: self.nets.ball_queries() - balls_before,
                relaxations: self.relaxations.get() - relax_before,
            },
        })
    }

    fn decide(&self, keep: bool) -> bool {
        match self.fault {
            None => keep,
            Some(Fault::NeverAdd) => false,
            Some(Fault::AlwaysAdd) => true,
        }
    }

    fn set_membership(&mut self, e: Edge, on: bool, journal: &mut Journal) {
        let present = self.l.contains_key(&e);
        if present == on {
            return;
        }
        journal.entry(e).or_insert(present);
        if on {
            let info = self.s.edge(e).expect("L edges come from S");
            let le = LEdge {
                length: info.length,
                scale: info.scale,
            };
            self.l.insert(e, le);
            self.buckets.entry(le.scale).or_default().insert(e);
            self.adjacency.entry(e.u).or_default().insert(e.v, le);
            self.adjacency.entry(e.v).or_default().insert(e.u, le);
        } else {
            let le = self.l.remove(&e).unwrap();
            if let Some(b) = self.buckets.get_mut(&le.scale) {
                b.remove(&e);
                if b.is_empty() {
                    self.buckets.remove(&le.scale);
                }
            }
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                if let Some(m) = self.adjacency.get_mut(&a) {
                    m.remove(&b);
                    if m.is_empty() {
                        self.adjacency.remove(&a);
                    }
                }
            }
        }
    }

    /// Distances from `u` to each of `targets` over edges of `L` with scale
    /// below `below`, infinite beyond `cutoff`.
    fn restricted_distances(
        &self,
        u: PointId,
        targets: &[PointId],
        below: Scale,
        cutoff: f64,
    ) -> Vec<f64> {
        let mut relax = 0;
        let adjacency = &self.adjacency;
        let targets: Vec<usize> = targets.iter().map(|t| t.index()).collect();
        let dist = distances_to(
            self.space.len(),
            u.index(),
            &targets,
            cutoff,
            |p, visit| {
                if let Some(m) = adjacency.get(&PointId(p as u32)) {
                    for (&q, le) in m {
                        if le.scale < below {
                            visit(q.index(), le.length);
                        }
                    }
                }
            },
            &mut relax,
        );
        self.relaxations.set(self.relaxations.get() + relax);
        dist
    }

    fn recompute(&mut self, x: PointId, journal: &mut Journal) -> Result<()> {
        for i in 0..=self.max_scale() {
            let edges =
                self.s
                    .edges_at_scale_in_ball(&self.nets, &self.space, i, x, 4.0 * pow2(i))?;
            // Decisions at scale i only touch bucket i, which the searches
            // below never read, so one search per source serves all its edges.
            let mut by_source: BTreeMap<PointId, Vec<(Edge, f64)>> = BTreeMap::new();
            for e in edges {
                by_source.entry(e.u).or_default().push((e, self.space.dist(e.u, e.v)));
            }
            for (u, group) in by_source {
                let stretch = 1.0 + self.eps;
                let bound = move |d: f64| stretch * d;
                let cutoff = group.iter().map(|&(_, d)| bound(d)).fold(0.0, f64::max);
                let targets: Vec<PointId> = group.iter().map(|(e, _)| e.v).collect();
                let dist = self.restricted_distances(u, &targets, i, cutoff);
                for ((e, d), dstar) in group.into_iter().zip(dist) {
                    let keep = self.decide(dstar > bound(d));
                    self.set_membership(e, keep, journal);
                }
            }
        }
        Ok(())
    }

    fn recompute_fast(&mut self, x: PointId, journal: &mut Journal) -> Result<()> {
        for i in 0..=self.max_scale() {
            self.refresh_estimates(x, i)?;
            let edges =
                self.s
                    .edges_at_scale_in_ball(&self.nets, &self.space, i, x, 8.0 * pow2(i))?;
            for e in edges {
                let d = self.space.dist(e.u, e.v);
                let est = self
                    .store
                    .dstar(e)
                    .ok_or(Error::MissingEstimate(e.u, e.v))?;
                let keep = self.decide(est.value > (1.0 + self.eps) * d);
                self.set_membership(e, keep, journal);
            }
        }
        Ok(())
    }

    /// Refreshes the `delta_L` estimates of scale-`(i-2)` edges and the
    /// `delta*` estimates of scale-`i` edges of `S_small` inside
    /// `B(x, 4 * 2^i)`. Fast mode only.
    pub fn update_dist_estimates(&mut self, x: PointId, i: Scale) -> Result<()> {
        self.require(Mode::Fast)?;
        if !self.space.contains(x) {
            return Err(Error::UnknownPoint(x));
        }
        self.refresh_estimates(x, i)
    }

    fn refresh_estimates(&mut self, x: PointId, i: Scale) -> Result<()> {
        let small = self.s_small.as_ref().expect("fast mode keeps S_small");
        let r = 4.0 * pow2(i);
        let short = if i >= 2 {
            small.edges_at_scale_in_ball(&self.nets, &self.space, i - 2, x, r)?
        } else {
            Vec::new()
        };
        let long = small.edges_at_scale_in_ball(&self.nets, &self.space, i, x, r)?;
        if short.is_empty() && long.is_empty() {
            return Ok(());
        }
        // The sketch only reads estimates of scale <= i - 3, so one sketch
        // serves both loops.
        let mut sketch = self.sketch(x, i)?;
        let alpha = self.alpha(i);
        let mut relax = 0;
        for e in short {
            let value = sketch.distance(e.u, e.v, &mut relax)?;
            self.store.dl.insert(e, EstimateEntry { value, alpha });
        }
        for e in long {
            let value = sketch.distance(e.u, e.v, &mut relax)?;
            self.store.dstar.insert(e, EstimateEntry { value, alpha });
        }
        self.relaxations.set(self.relaxations.get() + relax);
        Ok(())
    }

    /// Estimate of `delta` over `L` edges of scale below `i` between `u` and
    /// `v`, from the sketch graph around `x`. Fast mode only.
    pub fn estimate(&self, u: PointId, v: PointId, i: Scale, x: PointId) -> Result<f64> {
        self.require(Mode::Fast)?;
        for p in [u, v, x] {
            if !self.space.contains(p) {
                return Err(Error::UnknownPoint(p));
            }
        }
        if u == v {
            return Ok(0.0);
        }
        let mut sketch = self.sketch(x, i)?;
        let mut relax = 0;
        let d = sketch.distance(u, v, &mut relax);
        self.relaxations.set(self.relaxations.get() + relax);
        d
    }

    /// Net level whose points form the sketch vertices at scale `i`.
    ///
    /// Besides being fine relative to `eps_small * 2^i`, the level must not
    /// exceed the lowest level holding scale-`(i-2)` edges of `S_small`, so
    /// that the endpoints of every edge estimated at this scale are vertices.
    pub fn sketch_level(&self, i: Scale) -> usize {
        let small = self.s_small.as_ref().map_or(self.s.params(), NetSpanner::params);
        let mut level = (self.eps_small * pow2(i)).log2().floor();
        if i >= 2 {
            level = level.min(lowest_level(small.c, i - 2) as f64);
        }
        (level.max(0.0) as usize).min(self.nets.top())
    }

    fn sketch(&self, x: PointId, i: Scale) -> Result<Sketch> {
        let level = self.sketch_level(i);
        let vertices = self.nets.ball(&self.space, level, x, 7.0 * pow2(i))?;
        let index: HashMap<PointId, usize> =
            vertices.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vertices.len()];
        let long_lo = pow2(i - 3);
        let long_hi = pow2(i - 1);
        let short_hi = pow2(i - self.short_shift);
        for (a, &p) in vertices.iter().enumerate() {
            for (b, &q) in vertices.iter().enumerate().skip(a + 1) {
                let d = self.space.dist(p, q);
                let mut w = f64::INFINITY;
                if d < short_hi {
                    let e = Edge::new(p, q);
                    w = self
                        .store
                        .dl(e)
                        .ok_or(Error::MissingEstimate(e.u, e.v))?
                        .value;
                }
                if long_lo <= d && d < long_hi && self.l.contains_key(&Edge::new(p, q)) {
                    w = w.min(d);
                }
                if w.is_finite() {
                    adj[a].push((b, w));
                    adj[b].push((a, w));
                }
            }
        }
        Ok(Sketch {
            index,
            adj,
            cache: HashMap::new(),
        })
    }

    #[cfg(debug_assertions)]
    fn debug_check_store_keys(&self) {
        let limit = self.max_scale() - 2;
        if let Some(small) = &self.s_small {
            for (e, info) in small.edges() {
                assert!(
                    self.store.dstar.contains_key(e),
                    "S_small edge {e:?} has no delta* estimate"
                );
                assert!(
                    info.scale > limit || self.store.dl.contains_key(e),
                    "S_small edge {e:?} has no delta_L estimate"
                );
            }
        }
    }
}

/// Smallest level `j` with `c * 2^j >= 2^(scale - 1)`.
fn lowest_level(c: f64, scale: Scale) -> usize {
    let mut j = 0usize;
    while c * pow2(j as i32) < pow2(scale - 1) {
        j += 1;
    }
    j
}
