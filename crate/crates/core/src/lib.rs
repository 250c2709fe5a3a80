//! Dynamic light spanners for point sets in doubling metrics.
//!
//! The crate maintains, under point insertions and deletions, a hierarchy of
//! nets, two net-tree spanners over that hierarchy, and a light subgraph of the
//! coarser spanner (the *delayed greedy* spanner) whose lightness stays bounded
//! while its stretch stays within `1 + 3 * eps`.
//!
//! Two update paths are provided: an exact path that computes the restricted
//! shortest-path distances it needs with Dijkstra, and a fast path that keeps a
//! store of coarse distance estimates refreshed through small sketch graphs.
//! [`oracle`] holds brute-force checks used by the tests and the benchmark
//! harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod light_spanner;
pub mod metric;
pub mod net_spanner;
pub mod net_tree;
pub mod oracle;

mod dijkstra;

pub use error::{Error, Result};
pub use light_spanner::{
    Counters, EstimateEntry, EstimateStore, LightSpanner, Mode, OpKind, UpdateReport, KAPPA,
};
pub use metric::{scale_of, MetricSpace, PointId, Scale};
pub use net_spanner::{Edge, EdgeDelta, EdgeInfo, NetSpanner, SpannerParams};
pub use net_tree::{ChangeSet, NetChange, NetHierarchy};
