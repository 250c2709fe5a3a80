//! Hierarchy of nets `N_0 ⊇ N_1 ⊇ ... ⊇ N_top` under insertions and deletions.
//!
//! `N_0` is the whole point set and `N_i` is a `2^i`-net of `N_{i-1}`: its
//! points are pairwise at least `2^i` apart and every point of `N_{i-1}` is
//! within `2^i` of some point of `N_i`. For every level the hierarchy keeps,
//! per member, the list of other members within `R_i = radius_factor * 2^i`.
//! Those lists answer ball queries without scanning a level.

use std::cell::Cell;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metric::{pow2, MetricSpace, PointId};

/// One membership change at one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetChange {
    pub level: usize,
    pub point: PointId,
    pub added: bool,
}

pub type ChangeSet = Vec<NetChange>;

#[derive(Clone, Debug)]
pub struct NetHierarchy {
    top: usize,
    radius_factor: f64,
    levels: Vec<BTreeSet<PointId>>,
    neighbors: Vec<HashMap<PointId, BTreeSet<PointId>>>,
    // p belongs to N_0 .. N_{height-1}
    height: HashMap<PointId, usize>,
    ball_queries: Cell<u64>,
}

impl NetHierarchy {
    /// Empty hierarchy with levels `0..=top` and neighbor radius
    /// `radius_factor * 2^i` at level `i`.
    pub fn new(top: usize, radius_factor: f64) -> Self {
        assert!(
            radius_factor >= 4.0,
            "neighbor lists must reach at least 4 * 2^i"
        );
        Self {
            top,
            radius_factor,
            levels: vec![BTreeSet::new(); top + 1],
            neighbors: vec![HashMap::new(); top + 1],
            height: HashMap::new(),
            ball_queries: Cell::new(0),
        }
    }

    /// Builds a hierarchy from explicit level sets (level 0 first). The sets
    /// must be nested; no other net property is checked.
    pub fn from_levels(
        space: &MetricSpace,
        radius_factor: f64,
        levels: &[Vec<PointId>],
    ) -> Result<Self> {
        let top = levels.len().saturating_sub(1);
        let mut h = Self::new(top, radius_factor);
        for (i, level) in levels.iter().enumerate() {
            for &p in level {
                if !space.contains(p) {
                    return Err(Error::UnknownPoint(p));
                }
                if h.height(p) != i {
                    return Err(Error::NotNested(i));
                }
                h.add_member(space, i, p);
            }
        }
        for (i, level) in levels.iter().enumerate().skip(1) {
            if h.levels[i - 1].len() < level.len() || h.levels[i].len() != level.len() {
                return Err(Error::NotNested(i));
            }
        }
        Ok(h)
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// Maintained neighbor radius `R_i`.
    pub fn radius(&self, level: usize) -> f64 {
        self.radius_factor * pow2(level as i32)
    }

    pub fn radius_factor(&self) -> f64 {
        self.radius_factor
    }

    pub fn level(&self, level: usize) -> &BTreeSet<PointId> {
        &self.levels[level]
    }

    pub fn levels(&self) -> &[BTreeSet<PointId>] {
        &self.levels
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.height.contains_key(&p)
    }

    pub fn len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels[0].is_empty()
    }

    /// Number of levels `p` belongs to (0 when absent).
    pub fn height(&self, p: PointId) -> usize {
        self.height.get(&p).copied().unwrap_or(0)
    }

    pub fn is_member(&self, level: usize, p: PointId) -> bool {
        self.height(p) > level
    }

    /// Members of `N_level` within `R_level` of `p` (excluding `p`).
    pub fn neighbors(&self, level: usize, p: PointId) -> Option<&BTreeSet<PointId>> {
        self.neighbors.get(level)?.get(&p)
    }

    /// Ball queries answered so far.
    pub fn ball_queries(&self) -> u64 {
        self.ball_queries.get()
    }

    /// Adds `x` to `N_0 .. N_{i0-1}`, where `i0` is the smallest level whose
    /// net has a point strictly closer than `2^i0` to `x`. With no such level,
    /// `x` joins every level.
    pub fn insert_point(&mut self, space: &MetricSpace, x: PointId) -> Result<ChangeSet> {
        if !space.contains(x) {
            return Err(Error::UnknownPoint(x));
        }
        if self.contains(x) {
            return Err(Error::DuplicatePoint(x));
        }
        let mut i0 = self.top + 1;
        let mut closest = f64::INFINITY;
        for i in 0..=self.top {
            let limit = pow2(i as i32);
            let near = self.ball(space, i, x, limit)?;
            let d = near
                .iter()
                .map(|&p| space.dist(x, p))
                .fold(f64::INFINITY, f64::min);
            if i == 0 {
                closest = d;
            }
            if d < limit {
                i0 = i;
                break;
            }
        }
        if i0 == 0 {
            return Err(Error::TooClose {
                point: x,
                distance: closest,
            });
        }
        let mut changes = Vec::with_capacity(i0);
        for i in 0..i0 {
            self.add_member(space, i, x);
            changes.push(NetChange {
                level: i,
                point: x,
                added: true,
            });
        }
        Ok(changes)
    }

    /// Removes `x` from every level, then for `i = 1..=top` promotes points of
    /// `N_{i-1}` left farther than `2^i` from `N_i`, in ascending id order.
    pub fn delete_point(&mut self, space: &MetricSpace, x: PointId) -> Result<ChangeSet> {
        let h = match self.height.get(&x) {
            Some(&h) => h,
            None => return Err(Error::AbsentPoint(x)),
        };
        let old_neighbors: Vec<BTreeSet<PointId>> =
            (0..h).map(|i| self.neighbors[i][&x].clone()).collect();
        let mut changes = Vec::new();
        for i in (0..h).rev() {
            self.remove_member(i, x);
        }
        for i in 0..h {
            changes.push(NetChange {
                level: i,
                point: x,
                added: false,
            });
        }

        let mut promoted: Vec<Vec<PointId>> = vec![Vec::new(); self.top + 1];
        for i in 1..=self.top {
            let reach = pow2(i as i32);
            let mut candidates: BTreeSet<PointId> = promoted[i - 1].iter().copied().collect();
            // Old members of N_{i-1} can only lose their cover if x covered them.
            if i < h {
                candidates.extend(
                    old_neighbors[i - 1]
                        .iter()
                        .copied()
                        .filter(|&y| space.dist(x, y) <= reach),
                );
            }
            for y in candidates {
                debug_assert!(self.is_member(i - 1, y));
                if self.is_member(i, y) || self.is_covered(space, i, y) {
                    continue;
                }
                self.add_member(space, i, y);
                promoted[i].push(y);
                changes.push(NetChange {
                    level: i,
                    point: y,
                    added: true,
                });
            }
        }
        Ok(changes)
    }

    /// Members of `N_level` within distance `r` of `q`, sorted by id.
    ///
    /// `q` may be any registered point, including deleted ones. The answer
    /// comes from the neighbor list of a net point near `q`, located by
    /// descending from the top level.
    pub fn ball(
        &self,
        space: &MetricSpace,
        level: usize,
        q: PointId,
        r: f64,
    ) -> Result<Vec<PointId>> {
        if level > self.top {
            return Err(Error::UnknownLevel(level));
        }
        let max = self.radius(level);
        if r > max {
            return Err(Error::RadiusTooLarge {
                level,
                radius: r,
                max,
            });
        }
        if !space.contains(q) {
            return Err(Error::UnknownPoint(q));
        }
        self.ball_queries.set(self.ball_queries.get() + 1);

        if self.is_member(level, q) {
            return Ok(self.filter_around(space, level, q, q, r));
        }
        // Every y in N_level ∩ B(q, r) has an ancestor in N_j within
        // 2^(j+1) - 2^(level+1) of y.
        let slack = |j: usize| r + pow2(j as i32 + 1) - pow2(level as i32 + 1);
        let mut candidates: Vec<PointId> = self.levels[self.top]
            .iter()
            .copied()
            .filter(|&p| space.dist(q, p) <= slack(self.top))
            .collect();
        let mut j = self.top;
        loop {
            if let Some(&hub) = candidates
                .iter()
                .find(|&&p| space.dist(q, p) + r <= max)
            {
                return Ok(self.filter_around(space, level, hub, q, r));
            }
            if j == level {
                candidates.retain(|&p| space.dist(q, p) <= r);
                candidates.sort_unstable();
                return Ok(candidates);
            }
            j -= 1;
            let bound = slack(j);
            let mut next: HashSet<PointId> = HashSet::new();
            for &p in &candidates {
                next.insert(p);
                if let Some(list) = self.neighbors[j].get(&p) {
                    next.extend(list.iter().copied());
                }
            }
            candidates = next
                .into_iter()
                .filter(|&p| space.dist(q, p) <= bound)
                .collect();
        }
    }

    /// Per level, the sorted member ids; one line per level.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, level) in self.levels.iter().enumerate() {
            let _ = write!(out, "{i}:");
            for p in level {
                let _ = write!(out, " {p}");
            }
            out.push('\n');
        }
        out
    }

    fn filter_around(
        &self,
        space: &MetricSpace,
        level: usize,
        hub: PointId,
        q: PointId,
        r: f64,
    ) -> Vec<PointId> {
        let mut out: Vec<PointId> = std::iter::once(hub)
            .chain(self.neighbors[level][&hub].iter().copied())
            .filter(|&p| space.dist(q, p) <= r)
            .collect();
        out.sort_unstable();
        out
    }

    fn is_covered(&self, space: &MetricSpace, level: usize, y: PointId) -> bool {
        let reach = pow2(level as i32);
        self.neighbors[level - 1][&y]
            .iter()
            .any(|&z| self.is_member(level, z) && space.dist(y, z) <= reach)
    }

    fn add_member(&mut self, space: &MetricSpace, level: usize, p: PointId) {
        debug_assert_eq!(self.height(p), level);
        let reach = self.radius(level);
        let list: BTreeSet<PointId> = self.levels[level]
            .iter()
            .copied()
            .filter(|&q| space.dist(p, q) <= reach)
            .collect();
        for q in &list {
            self.neighbors[level].get_mut(q).unwrap().insert(p);
        }
        self.neighbors[level].insert(p, list);
        self.levels[level].insert(p);
        self.height.insert(p, level + 1);
    }

    fn remove_member(&mut self, level: usize, p: PointId) {
        debug_assert_eq!(self.height(p), level + 1);
        let list = self.neighbors[level].remove(&p).unwrap_or_default();
        for q in &list {
            if let Some(other) = self.neighbors[level].get_mut(q) {
                other.remove(&p);
            }
        }
        self.levels[level].remove(&p);
        if level == 0 {
            self.height.remove(&p);
        } else {
            self.height.insert(p, level);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], phi: f64) -> (MetricSpace, Vec<PointId>) {
        let mut space = MetricSpace::euclidean(1, phi).unwrap();
        let ids = xs.iter().map(|&x| space.add_point(&[x]).unwrap()).collect();
        (space, ids)
    }

    fn members(h: &NetHierarchy, p: PointId) -> Vec<usize> {
        (0..=h.top()).filter(|&i| h.is_member(i, p)).collect()
    }

    #[test]
    fn insert_into_empty_joins_every_level() {
        let (space, ids) = line(&[0.0], 8.0);
        let mut h = NetHierarchy::new(3, 8.0);
        let changes = h.insert_point(&space, ids[0]).unwrap();
        assert_eq!(changes.len(), 4);
        assert_eq!(members(&h, ids[0]), vec![0, 1, 2, 3]);
    }

    #[test]
    fn insert_examples() {
        let (space, ids) = line(&[0.0, 5.0, 1.0], 8.0);
        let mut h = NetHierarchy::new(3, 8.0);
        h.insert_point(&space, ids[0]).unwrap();
        // 5 < 2^3 first holds at level 3
        h.insert_point(&space, ids[1]).unwrap();
        assert_eq!(members(&h, ids[1]), vec![0, 1, 2]);

        let mut h = NetHierarchy::new(3, 8.0);
        h.insert_point(&space, ids[0]).unwrap();
        h.insert_point(&space, ids[2]).unwrap();
        assert_eq!(members(&h, ids[2]), vec![0]);

        assert_eq!(
            h.insert_point(&space, ids[2]),
            Err(Error::DuplicatePoint(ids[2]))
        );
    }

    #[test]
    fn insert_too_close_is_rejected() {
        let (space, ids) = line(&[0.0, 0.5], 8.0);
        let mut h = NetHierarchy::new(3, 8.0);
        h.insert_point(&space, ids[0]).unwrap();
        assert!(matches!(
            h.insert_point(&space, ids[1]),
            Err(Error::TooClose { .. })
        ));
        assert!(!h.contains(ids[1]));
    }

    #[test]
    fn delete_examples() {
        let (space, ids) = line(&[0.0, 5.0, 3.0], 16.0);
        let mut h = NetHierarchy::new(4, 8.0);
        h.insert_point(&space, ids[0]).unwrap();
        let changes = h.delete_point(&space, ids[0]).unwrap();
        assert_eq!(changes.len(), 5);
        assert!(h.levels().iter().all(|l| l.is_empty()));
        assert_eq!(h.delete_point(&space, ids[0]), Err(Error::AbsentPoint(ids[0])));

        let mut h = NetHierarchy::new(4, 8.0);
        h.insert_point(&space, ids[0]).unwrap();
        h.insert_point(&space, ids[1]).unwrap();
        assert_eq!(members(&h, ids[1]), vec![0, 1, 2]);
        let changes = h.delete_point(&space, ids[0]).unwrap();
        assert_eq!(members(&h, ids[1]), vec![0, 1, 2, 3, 4]);
        let promoted: Vec<usize> = changes
            .iter()
            .filter(|c| c.added)
            .map(|c| c.level)
            .collect();
        assert_eq!(promoted, vec![3, 4]);
        assert!(changes.iter().filter(|c| !c.added).all(|c| c.point == ids[0]));
    }

    #[test]
    fn delete_with_three_points() {
        let (space, ids) = line(&[0.0, 3.0, 5.0], 8.0);
        let mut h = NetHierarchy::new(3, 8.0);
        for &p in &[ids[0], ids[1], ids[2]] {
            h.insert_point(&space, p).unwrap();
        }
        assert_eq!(members(&h, ids[1]), vec![0, 1]);
        assert_eq!(members(&h, ids[2]), vec![0, 1, 2]);
        h.delete_point(&space, ids[0]).unwrap();
        // 3 stays covered by 5 at level 2; 5 becomes the sole top point.
        assert_eq!(members(&h, ids[1]), vec![0, 1]);
        assert_eq!(members(&h, ids[2]), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ball_on_path_hierarchy() {
        let xs: Vec<f64> = (1..=16).map(f64::from).collect();
        let (space, ids) = line(&xs, 16.0);
        let levels: Vec<Vec<PointId>> = (0..=4)
            .map(|i| {
                ids.iter()
                    .copied()
                    .filter(|p| (p.0 + 1) % (1 << i) == 0)
                    .collect()
            })
            .collect();
        let h = NetHierarchy::from_levels(&space, 8.0, &levels).unwrap();
        let at = |x: u32| ids[(x - 1) as usize];
        assert_eq!(
            h.ball(&space, 2, at(8), 5.0).unwrap(),
            vec![at(4), at(8), at(12)]
        );
        assert_eq!(h.ball(&space, 2, at(8), 0.0).unwrap(), vec![at(8)]);
        // query from a non-member
        assert_eq!(
            h.ball(&space, 2, at(7), 1.5).unwrap(),
            vec![at(8)]
        );
        assert!(matches!(
            h.ball(&space, 2, at(8), 33.0),
            Err(Error::RadiusTooLarge { .. })
        ));
        assert_eq!(h.ball(&space, 9, at(8), 1.0), Err(Error::UnknownLevel(9)));
    }

    #[test]
    fn ball_far_from_everything_is_empty() {
        let (mut space, ids) = line(&[1.0, 2.0, 3.0], 4.0);
        let far = space.add_point(&[40.0]).unwrap();
        let mut h = NetHierarchy::new(2, 8.0);
        for &p in &ids {
            h.insert_point(&space, p).unwrap();
        }
        assert!(h.ball(&space, 0, far, 8.0).unwrap().is_empty());
    }

    #[test]
    fn from_levels_rejects_unnested() {
        let (space, ids) = line(&[1.0, 2.0], 4.0);
        let levels = vec![vec![ids[0]], vec![ids[1]]];
        assert!(NetHierarchy::from_levels(&space, 8.0, &levels).is_err());
    }

    #[test]
    fn dump_lists_levels() {
        let (space, ids) = line(&[0.0, 1.0], 2.0);
        let mut h = NetHierarchy::new(1, 8.0);
        h.insert_point(&space, ids[0]).unwrap();
        h.insert_point(&space, ids[1]).unwrap();
        assert_eq!(h.dump(), "0: 0 1\n1: 0\n");
    }
}
