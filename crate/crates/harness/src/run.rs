//! Replays a stream against a [`LightSpanner`] and checks it against the
//! oracles.

use anyhow::Context;
use dynspan::light_spanner::Fault;
use dynspan::oracle;
use dynspan::{LightSpanner, MetricSpace, Mode, OpKind, PointId};
use serde::Serialize;

use crate::config::{Check, ScenarioConfig};
use crate::generate::{Event, Stream};

/// Absolute slack on the final stretch bound.
pub const STRETCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpdateLine {
    pub op: &'static str,
    pub id: u32,
    pub added: usize,
    pub removed: usize,
    pub time_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationRecord {
    /// 1-based index of the update after which the check ran.
    pub update: usize,
    pub kind: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: &'static str,
    pub eps: f64,
    pub phi: f64,
    pub updates: usize,
    pub inserts: usize,
    pub deletes: usize,
    pub final_points: usize,
    pub edge_count: usize,
    pub net_spanner_edges: usize,
    pub total_weight: f64,
    pub mst_weight: f64,
    /// 0 when fewer than two points remain.
    pub lightness: f64,
    /// 0 when fewer than two points remain.
    pub max_stretch: f64,
    pub max_recourse: usize,
    pub mean_recourse: f64,
    pub max_time_ns: u64,
    pub mean_time_ns: f64,
    pub ball_queries: u64,
    pub relaxations: u64,
    pub checks: usize,
    pub violation_count: usize,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub lines: Vec<UpdateLine>,
    pub summary: RunSummary,
    pub violations: Vec<ViolationRecord>,
    pub spanner: LightSpanner,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub fault: Option<Fault>,
}

/// Replays `stream`, calling `sink` after each update.
pub fn run_stream<F>(
    cfg: &ScenarioConfig,
    stream: &Stream,
    opts: RunOptions,
    mut sink: F,
) -> anyhow::Result<RunOutcome>
where
    F: FnMut(&UpdateLine) -> anyhow::Result<()>,
{
    stream.check_bounded().context("input is not (1, phi)-bounded")?;
    let space = MetricSpace::euclidean(stream.dim, stream.phi)?;
    let mut ds = LightSpanner::new(space, cfg.eps, cfg.mode)?;
    for coords in stream.points() {
        ds.register(coords)?;
    }
    ds.inject_fault(opts.fault);

    let total = stream.len();
    let mut lines = Vec::with_capacity(total);
    let mut violations = Vec::new();
    let mut summary = RunSummary {
        mode: cfg.mode.name(),
        eps: cfg.eps,
        phi: stream.phi,
        ..RunSummary::default()
    };
    let mut recourse_sum = 0usize;
    let mut time_sum = 0u128;

    for (k, event) in stream.events.iter().enumerate() {
        let (op, key) = match event {
            Event::Insert { key, .. } => (OpKind::Insert, *key),
            Event::Delete { key } => (OpKind::Delete, *key),
        };
        let x = PointId(key as u32);
        let report = ds
            .update(op, x)
            .with_context(|| format!("update {} ({} {key})", k + 1, op.name()))?;
        let line = UpdateLine {
            op: op.name(),
            id: x.0,
            added: report.added.len(),
            removed: report.removed.len(),
            time_ns: report.time_ns,
        };
        sink(&line)?;
        match op {
            OpKind::Insert => summary.inserts += 1,
            OpKind::Delete => summary.deletes += 1,
        }
        summary.max_recourse = summary.max_recourse.max(report.recourse());
        recourse_sum += report.recourse();
        summary.max_time_ns = summary.max_time_ns.max(report.time_ns);
        time_sum += u128::from(report.time_ns);
        summary.ball_queries += report.counters.ball_queries;
        summary.relaxations += report.counters.relaxations;

        if cfg.check != Check::None {
            for c in oracle::locality_violations(ds.space(), x, &report.net_changes) {
                violations.push(ViolationRecord {
                    update: k + 1,
                    kind: "locality",
                    detail: format!("level {} point {} added {}", c.level, c.point.0, c.added),
                });
            }
        }
        if cfg.check.due(k + 1, total) {
            summary.checks += 1;
            full_check(&ds, k + 1, &mut violations);
        }
        lines.push(line);
    }

    summary.updates = total;
    if total > 0 {
        summary.mean_recourse = recourse_sum as f64 / total as f64;
        summary.mean_time_ns = time_sum as f64 / total as f64;
    }
    summary.final_points = ds.space().active_count();
    summary.edge_count = ds.edge_count();
    summary.net_spanner_edges = ds.net_spanner().len();
    summary.total_weight = ds.total_weight();
    if summary.final_points >= 2 {
        summary.mst_weight = oracle::mst_weight(ds.space());
        summary.lightness = summary.total_weight / summary.mst_weight;
        summary.max_stretch = oracle::max_stretch(ds.space(), &ds.edges());
    }
    summary.violation_count = violations.len();
    Ok(RunOutcome {
        lines,
        summary,
        violations,
        spanner: ds,
    })
}

fn full_check(ds: &LightSpanner, update: usize, out: &mut Vec<ViolationRecord>) {
    for v in oracle::check_structure(ds).violations {
        out.push(ViolationRecord {
            update,
            kind: "invariant",
            detail: format!(
                "{:?} on ({}, {}): dstar {} threshold {}",
                v.kind, v.edge.u.0, v.edge.v.0, v.dstar, v.threshold
            ),
        });
    }
    for p in oracle::validate_net_hierarchy(ds.nets(), ds.space()).problems {
        out.push(ViolationRecord {
            update,
            kind: "net",
            detail: p,
        });
    }
    if ds.mode() == Mode::Fast {
        for f in oracle::sweep_estimates(ds) {
            out.push(ViolationRecord {
                update,
                kind: "estimate",
                detail: format!(
                    "{:?} on ({}, {}): estimate {} exact {} alpha {}",
                    f.kind, f.edge.u.0, f.edge.v.0, f.estimate, f.exact, f.alpha
                ),
            });
        }
    }
    if ds.space().active_count() >= 2 {
        let bound = 1.0 + 3.0 * ds.eps() + STRETCH_TOL;
        let stretch = oracle::max_stretch(ds.space(), &ds.edges());
        if !(stretch <= bound) {
            out.push(ViolationRecord {
                update,
                kind: "stretch",
                detail: format!("max stretch {stretch} exceeds {bound}"),
            });
        }
    }
}

/// Generates the stream for `cfg` and replays it without a sink.
pub fn run(cfg: &ScenarioConfig, opts: RunOptions) -> anyhow::Result<RunOutcome> {
    let stream = crate::generate::generate(cfg)?;
    run_stream(cfg, &stream, opts, |_| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Ops, Scenario};

    #[test]
    fn empty_stream_summary_is_zero() {
        let cfg = ScenarioConfig {
            scenario: Scenario::Path,
            n: 0,
            ..ScenarioConfig::default()
        };
        let out = run(&cfg, RunOptions::default()).unwrap();
        assert!(out.lines.is_empty());
        assert!(out.violations.is_empty());
        let s = out.summary;
        assert_eq!((s.updates, s.edge_count, s.max_recourse), (0, 0, 0));
        assert_eq!((s.lightness, s.max_stretch, s.mean_time_ns), (0.0, 0.0, 0.0));
    }

    #[test]
    fn small_mixed_run_is_clean() {
        let cfg = ScenarioConfig {
            n: 24,
            phi: Some(64.0),
            ops: Ops::Mixed(0.4),
            check: Check::EveryUpdate,
            ..ScenarioConfig::default()
        };
        let out = run(&cfg, RunOptions::default()).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        assert_eq!(out.summary.checks, out.summary.updates);
        assert!(out.summary.max_stretch <= 1.0 + 3.0 * cfg.eps + STRETCH_TOL);
    }

    #[test]
    fn fault_is_caught() {
        let cfg = ScenarioConfig {
            scenario: Scenario::Path,
            n: 16,
            check: Check::EveryUpdate,
            ..ScenarioConfig::default()
        };
        let opts = RunOptions {
            fault: Some(Fault::NeverAdd),
        };
        let out = run(&cfg, opts).unwrap();
        assert!(out.violations.iter().any(|v| v.kind == "invariant"));
        assert!(out.violations.iter().any(|v| v.kind == "stretch"));
    }
}
