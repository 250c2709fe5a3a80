//! Net-tree spanner over a shared [`NetHierarchy`].
//!
//! For every level `i`, any two members of `N_i` at distance at most `c * 2^i`
//! are joined, where `c = 4 + 16 / eps`. An edge is stored once with the set of
//! levels witnessing it, so losing one witness keeps the edge while others
//! remain.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metric::{pow2, scale_of, MetricSpace, PointId, Scale};
use crate::net_tree::{NetChange, NetHierarchy};

/// Unordered pair of distinct points, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: PointId,
    pub v: PointId,
}

impl Edge {
    pub fn new(a: PointId, b: PointId) -> Self {
        debug_assert_ne!(a, b);
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn touches(&self, p: PointId) -> bool {
        self.u == p || self.v == p
    }

    pub fn other(&self, p: PointId) -> PointId {
        if self.u == p {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpannerParams {
    pub eps: f64,
    pub c: f64,
}

impl SpannerParams {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidEpsilon(eps));
        }
        Ok(Self {
            eps,
            c: 4.0 + 16.0 / eps,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeInfo {
    pub length: f64,
    pub scale: Scale,
    /// Bit `i` is set when level `i` witnesses the edge.
    witnesses: u64,
}

impl EdgeInfo {
    pub fn witness_levels(&self) -> Vec<usize> {
        (0..64).filter(|i| self.witnesses >> i & 1 == 1).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeDelta {
    pub added: Vec<Edge>,
    pub removed: Vec<Edge>,
}

impl EdgeDelta {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct NetSpanner {
    params: SpannerParams,
    edges: HashMap<Edge, EdgeInfo>,
    adjacency: HashMap<PointId, BTreeSet<PointId>>,
}

impl NetSpanner {
    pub fn new(params: SpannerParams) -> Self {
        Self {
            params,
            edges: HashMap::new(),
            adjacency: HashMap::new(),
        }
    }

    pub fn params(&self) -> SpannerParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, u: PointId, v: PointId) -> bool {
        u != v && self.edges.contains_key(&Edge::new(u, v))
    }

    pub fn edge(&self, e: Edge) -> Option<&EdgeInfo> {
        self.edges.get(&e)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Edge, &EdgeInfo)> {
        self.edges.iter()
    }

    /// Edges sorted by endpoints.
    pub fn sorted_edges(&self) -> Vec<(Edge, EdgeInfo)> {
        let mut out: Vec<(Edge, EdgeInfo)> = self.edges.iter().map(|(e, i)| (*e, *i)).collect();
        out.sort_by_key(|(e, _)| *e);
        out
    }

    pub fn neighbors(&self, p: PointId) -> impl Iterator<Item = PointId> + '_ {
        self.adjacency.get(&p).into_iter().flatten().copied()
    }

    pub fn degree(&self, p: PointId) -> usize {
        self.adjacency.get(&p).map_or(0, BTreeSet::len)
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn total_weight(&self) -> f64 {
        let mut lengths: Vec<f64> = self.edges.values().map(|i| i.length).collect();
        lengths.sort_by(f64::total_cmp);
        lengths.iter().sum()
    }

    /// Applies the membership changes of the hierarchy's last update. Only
    /// edges incident to a changed point at its changed level are touched.
    pub fn sync(
        &mut self,
        nets: &NetHierarchy,
        space: &MetricSpace,
        changes: &[NetChange],
    ) -> Result<EdgeDelta> {
        if let Some(bad) = changes.iter().find(|c| c.level > nets.top() || c.level >= 64) {
            return Err(Error::UnknownLevel(bad.level));
        }
        // presence before this sync, recorded on first touch
        let mut before: HashMap<Edge, bool> = HashMap::new();
        for change in changes {
            let p = change.point;
            let bit = 1u64 << change.level;
            if change.added {
                let reach = self.params.c * pow2(change.level as i32);
                for q in nets.ball(space, change.level, p, reach)? {
                    if q == p {
                        continue;
                    }
                    let e = Edge::new(p, q);
                    before.entry(e).or_insert_with(|| self.edges.contains_key(&e));
                    match self.edges.get_mut(&e) {
                        Some(info) => info.witnesses |= bit,
                        None => {
                            let length = space.dist(p, q);
                            let info = EdgeInfo {
                                length,
                                scale: scale_of(length)?,
                                witnesses: bit,
                            };
                            self.edges.insert(e, info);
                            self.adjacency.entry(p).or_default().insert(q);
                            self.adjacency.entry(q).or_default().insert(p);
                        }
                    }
                }
            } else {
                let incident: Vec<PointId> = self.neighbors(p).collect();
                for q in incident {
                    let e = Edge::new(p, q);
                    before.entry(e).or_insert(true);
                    let info = self.edges.get_mut(&e).unwrap();
                    info.witnesses &= !bit;
                    if info.witnesses == 0 {
                        self.remove_edge(e);
                    }
                }
            }
        }
        let mut delta = EdgeDelta::default();
        for (e, was) in before {
            match (was, self.edges.contains_key(&e)) {
                (false, true) => delta.added.push(e),
                (true, false) => delta.removed.push(e),
                _ => {}
            }
        }
        delta.added.sort_unstable();
        delta.removed.sort_unstable();
        Ok(delta)
    }

    /// Edges of scale exactly `scale` with both endpoints within `r` of `x`.
    ///
    /// Both endpoints of such an edge lie in the lowest level able to witness
    /// it, so a ball query at that level yields every candidate endpoint.
    pub fn edges_at_scale_in_ball(
        &self,
        nets: &NetHierarchy,
        space: &MetricSpace,
        scale: Scale,
        x: PointId,
        r: f64,
    ) -> Result<Vec<Edge>> {
        let level = match self.lowest_witness_level(scale) {
            Some(l) if l <= nets.top() => l,
            _ => return Ok(Vec::new()),
        };
        let candidates = nets.ball(space, level, x, r)?;
        let inside: HashSet<PointId> = candidates.iter().copied().collect();
        let mut out = Vec::new();
        for &u in &candidates {
            for v in self.neighbors(u) {
                if v > u && inside.contains(&v) && self.edges[&Edge::new(u, v)].scale == scale {
                    out.push(Edge::new(u, v));
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Smallest level `j` with `c * 2^j >= 2^(scale-1)`: any edge of this
    /// scale is witnessed at some level `>= j`.
    pub fn lowest_witness_level(&self, scale: Scale) -> Option<usize> {
        if scale < 1 {
            // scale-0 pairs are closer than 1; bounded inputs have none
            return if scale == 0 { Some(0) } else { None };
        }
        let target = pow2(scale - 1);
        let mut j = 0usize;
        while self.params.c * pow2(j as i32) < target {
            j += 1;
        }
        Some(j)
    }

    /// `u v length scale` per edge, sorted.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (e, info) in self.sorted_edges() {
            let _ = writeln!(out, "{} {} {} {}", e.u, e.v, info.length, info.scale);
        }
        out
    }

    fn remove_edge(&mut self, e: Edge) {
        self.edges.remove(&e);
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            if let Some(set) = self.adjacency.get_mut(&a) {
                set.remove(&b);
                if set.is_empty() {
                    self.adjacency.remove(&a);
                }
            }
        }
    }
}
