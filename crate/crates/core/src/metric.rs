//! Point storage, the distance function and scale arithmetic.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Identifier of a point. Identifiers are handed out sequentially and never
/// reused, so distances to deleted points stay well defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Scale index of a pair: the `i` with `2^(i-1) <= d < 2^i`.
pub type Scale = i32;

/// Returns the unique scale `i` with `2^(i-1) <= d < 2^i`.
pub fn scale_of(d: f64) -> Result<Scale> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NonPositiveDistance(d));
    }
    let mut i = d.log2().floor() as i32 + 1;
    // log2 can be off by one ulp near powers of two.
    while pow2(i - 1) > d {
        i -= 1;
    }
    while pow2(i) <= d {
        i += 1;
    }
    Ok(i)
}

#[inline]
pub(crate) fn pow2(i: i32) -> f64 {
    2f64.powi(i)
}

#[derive(Clone, Debug)]
enum Backend {
    Euclidean { dim: usize, coords: Vec<f64> },
    Matrix { dist: Vec<Vec<f64>> },
}

/// The metric `(X, delta)` together with the currently active subset.
///
/// Points are registered once and keep their coordinates forever; the active
/// set is what the dynamic structures consider to be `X`.
#[derive(Clone, Debug)]
pub struct MetricSpace {
    backend: Backend,
    phi: f64,
    top: usize,
    active: BTreeSet<PointId>,
}

impl MetricSpace {
    /// Euclidean space of dimension `dim` with aspect-ratio bound `phi`.
    pub fn euclidean(dim: usize, phi: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let top = log2_exact(phi)?;
        Ok(Self {
            backend: Backend::Euclidean {
                dim,
                coords: Vec::new(),
            },
            phi,
            top,
            active: BTreeSet::new(),
        })
    }

    /// Space over an explicit symmetric distance matrix. Point `k` of the
    /// matrix gets id `PointId(k)`; none of them start out active.
    pub fn from_matrix(dist: Vec<Vec<f64>>, phi: f64) -> Result<Self> {
        let n = dist.len();
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("non-zero diagonal at {i}")));
            }
            for (j, &d) in row.iter().enumerate() {
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(Error::InvalidMatrix(format!("bad entry at ({i}, {j})")));
                }
                if d != dist[j][i] {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        let top = log2_exact(phi)?;
        Ok(Self {
            backend: Backend::Matrix { dist },
            phi,
            top,
            active: BTreeSet::new(),
        })
    }

    /// Registers a new point with the given coordinates. The point is not
    /// active until a structure inserts it.
    pub fn add_point(&mut self, coords: &[f64]) -> Result<PointId> {
        match &mut self.backend {
            Backend::Euclidean { dim, coords: store } => {
                if coords.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        got: coords.len(),
                    });
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFiniteCoordinate);
                }
                let id = PointId((store.len() / *dim) as u32);
                store.extend_from_slice(coords);
                Ok(id)
            }
            Backend::Matrix { .. } => Err(Error::NotEuclidean),
        }
    }

    /// Number of registered points (active or not).
    pub fn len(&self) -> usize {
        match &self.backend {
            Backend::Euclidean { dim, coords } => coords.len() / dim,
            Backend::Matrix { dist } => dist.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: PointId) -> bool {
        p.index() < self.len()
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.backend {
            Backend::Euclidean { dim, .. } => Some(*dim),
            Backend::Matrix { .. } => None,
        }
    }

    pub fn coords(&self, p: PointId) -> Result<&[f64]> {
        match &self.backend {
            Backend::Euclidean { dim, coords } => {
                if !self.contains(p) {
                    return Err(Error::UnknownPoint(p));
                }
                let k = p.index() * dim;
                Ok(&coords[k..k + dim])
            }
            Backend::Matrix { .. } => Err(Error::NotEuclidean),
        }
    }

    /// The aspect-ratio bound `phi` (a power of two).
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `log2(phi)`, the index of the coarsest net level.
    pub fn top_scale(&self) -> usize {
        self.top
    }

    /// Distance between two registered points.
    pub fn distance(&self, u: PointId, v: PointId) -> Result<f64> {
        if !self.contains(u) {
            return Err(Error::UnknownPoint(u));
        }
        if !self.contains(v) {
            return Err(Error::UnknownPoint(v));
        }
        Ok(self.dist(u, v))
    }

    /// Unchecked distance for ids already known to be registered.
    #[inline]
    pub(crate) fn dist(&self, u: PointId, v: PointId) -> f64 {
        match &self.backend {
            Backend::Euclidean { dim, coords } => {
                let a = &coords[u.index() * dim..(u.index() + 1) * dim];
                let b = &coords[v.index() * dim..(v.index() + 1) * dim];
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
            Backend::Matrix { dist } => dist[u.index()][v.index()],
        }
    }

    pub fn is_active(&self, p: PointId) -> bool {
        self.active.contains(&p)
    }

    pub fn active(&self) -> &BTreeSet<PointId> {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub(crate) fn set_active(&mut self, p: PointId, on: bool) {
        if on {
            self.active.insert(p);
        } else {
            self.active.remove(&p);
        }
    }

    /// Marks a registered point active without going through a dynamic
    /// structure. Used to describe static instances for the oracles.
    pub fn activate(&mut self, p: PointId) -> Result<()> {
        if !self.contains(p) {
            return Err(Error::UnknownPoint(p));
        }
        self.active.insert(p);
        Ok(())
    }

    /// Inverse of [`MetricSpace::activate`]; the coordinates are kept.
    pub fn deactivate(&mut self, p: PointId) -> Result<()> {
        if !self.contains(p) {
            return Err(Error::UnknownPoint(p));
        }
        self.active.remove(&p);
        Ok(())
    }

    /// Checks that every active pair satisfies `1 <= delta <= phi`. O(n^2).
    pub fn validate_bounded(&self) -> BoundedReport {
        let pts: Vec<PointId> = self.active.iter().copied().collect();
        let mut violations = Vec::new();
        for (k, &u) in pts.iter().enumerate() {
            for &v in &pts[k + 1..] {
                let d = self.dist(u, v);
                if !(1.0..=self.phi).contains(&d) {
                    violations.push((u, v, d));
                }
            }
        }
        BoundedReport { violations }
    }
}

/// Pairs violating `1 <= delta <= phi`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundedReport {
    pub violations: Vec<(PointId, PointId, f64)>,
}

impl BoundedReport {
    pub fn is_bounded(&self) -> bool {
        self.violations.is_empty()
    }
}

fn log2_exact(phi: f64) -> Result<usize> {
    if !(phi >= 1.0) || !phi.is_finite() {
        return Err(Error::InvalidPhi(phi));
    }
    let k = phi.log2().round();
    if !(0.0..=62.0).contains(&k) || pow2(k as i32) != phi {
        return Err(Error::InvalidPhi(phi));
    }
    Ok(k as usize)
}

/// Parses the point-list format: one point per line, `id x1 x2 ... xd`,
/// whitespace separated. Blank lines and lines starting with `#` are skipped.
/// All points must share one dimension.
pub fn parse_points(text: &str) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut out: Vec<(u64, Vec<f64>)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: k + 1, msg };
        let mut fields = line.split_whitespace();
        let id = fields
            .next()
            .unwrap()
            .parse::<u64>()
            .map_err(|e| parse_err(format!("bad id: {e}")))?;
        let coords = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(format!("bad coordinate: {e}")))?;
        if coords.is_empty() {
            return Err(parse_err("no coordinates".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(parse_err("non-finite coordinate".into()));
        }
        if let Some((_, first)) = out.first() {
            if first.len() != coords.len() {
                return Err(parse_err(format!(
                    "dimension {} differs from {}",
                    coords.len(),
                    first.len()
                )));
            }
        }
        if out.iter().any(|(other, _)| *other == id) {
            return Err(parse_err(format!("duplicate id {id}")));
        }
        out.push((id, coords));
    }
    Ok(out)
}

/// Writes points in the format read by [`parse_points`].
pub fn format_points(points: &[(u64, Vec<f64>)]) -> String {
    let mut s = String::new();
    for (id, coords) in points {
        s.push_str(&id.to_string());
        for c in coords {
            s.push(' ');
            s.push_str(&c.to_string());
        }
        s.push('\n');
    }
    s
}
