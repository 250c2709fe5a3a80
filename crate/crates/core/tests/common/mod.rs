#![allow(dead_code)]

use dynspan::oracle;
use dynspan::{LightSpanner, MetricSpace, Mode, OpKind, PointId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random points in `[0, side)^dim`, pairwise at least 1 apart.
pub fn spread_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, side: f64) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < n {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..side)).collect();
        let ok = pts.iter().all(|q| {
            p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= 1.0
        });
        if ok {
            pts.push(p);
        }
    }
    pts
}

/// Registers `pts` and returns the structure with the point ids.
pub fn structure(pts: &[Vec<f64>], phi: f64, eps: f64, mode: Mode) -> (LightSpanner, Vec<PointId>) {
    let dim = pts.first().map_or(1, Vec::len);
    let mut space = MetricSpace::euclidean(dim, phi).unwrap();
    let ids = pts.iter().map(|p| space.add_point(p).unwrap()).collect();
    (LightSpanner::new(space, eps, mode).unwrap(), ids)
}

/// Insert everything, then `updates` random operations that delete an
/// active point with probability `p_delete` and otherwise reinsert an
/// inactive one.
pub fn mixed_ops(rng: &mut ChaCha8Rng, ids: &[PointId], initial: usize, updates: usize, p_delete: f64) -> Vec<(OpKind, PointId)> {
    let mut active: Vec<PointId> = ids[..initial].to_vec();
    let mut idle: Vec<PointId> = ids[initial..].to_vec();
    let mut ops: Vec<(OpKind, PointId)> = active.iter().map(|&p| (OpKind::Insert, p)).collect();
    for _ in 0..updates {
        let delete = !active.is_empty() && (idle.is_empty() || rng.random_bool(p_delete));
        if delete {
            let k = rng.random_range(0..active.len());
            let p = active.swap_remove(k);
            idle.push(p);
            ops.push((OpKind::Delete, p));
        } else {
            let k = rng.random_range(0..idle.len());
            let p = idle.swap_remove(k);
            active.push(p);
            ops.push((OpKind::Insert, p));
        }
    }
    ops
}

/// Runs every oracle check that applies to the current state.
pub fn full_check(ds: &LightSpanner, x: PointId, report: &dynspan::UpdateReport) {
    let inv = oracle::check_structure(ds);
    assert!(inv.is_empty(), "invariants after update at {x}: {:?}", inv.violations);
    let nets = oracle::validate_net_hierarchy(ds.nets(), ds.space());
    assert!(nets.is_valid(), "nets after update at {x}: {:?}", nets.problems);
    let far = oracle::locality_violations(ds.space(), x, &report.net_changes);
    assert!(far.is_empty(), "non-local net changes: {far:?}");
    let est = oracle::sweep_estimates(ds);
    assert!(est.is_empty(), "estimates after update at {x}: {:?}", &est[..est.len().min(5)]);
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
