//! Lightness of the net-tree spanner and of the light spanner as `n` grows.

use std::io::Write;

use anyhow::bail;
use dynspan::oracle;
use serde::Serialize;

use crate::config::{Check, Ops, Scenario, ScenarioConfig};
use crate::run::{run, RunOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub phi: f64,
    pub mst_weight: f64,
    pub net_tree_edges: usize,
    pub light_edges: usize,
    /// w(S) / w(MST).
    pub net_tree_lightness: f64,
    /// w(L) / w(MST).
    pub light_lightness: f64,
}

/// Inserts `n` points of `base`'s scenario for each `n` in `ns` and records
/// both lightness values.
pub fn lightness_sweep(base: &ScenarioConfig, ns: &[usize]) -> anyhow::Result<Vec<SweepRow>> {
    if base.scenario == Scenario::File {
        bail!("a sweep needs a generated scenario");
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if n < 2 {
            bail!("sweep sizes must be at least 2, got {n}");
        }
        let cfg = ScenarioConfig {
            n,
            ops: Ops::InsertOnly,
            check: Check::None,
            ..base.clone()
        };
        let out = run(&cfg, RunOptions::default())?;
        let ds = &out.spanner;
        let mst = oracle::mst_weight(ds.space());
        rows.push(SweepRow {
            n,
            phi: out.summary.phi,
            mst_weight: mst,
            net_tree_edges: ds.net_spanner().len(),
            light_edges: ds.edge_count(),
            net_tree_lightness: ds.net_spanner().total_weight() / mst,
            light_lightness: ds.total_weight() / mst,
        });
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "n,phi,mst_weight,net_tree_edges,light_edges,net_tree_lightness,light_lightness")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            r.phi,
            r.mst_weight,
            r.net_tree_edges,
            r.light_edges,
            r.net_tree_lightness,
            r.light_lightness
        )?;
    }
    Ok(())
}
