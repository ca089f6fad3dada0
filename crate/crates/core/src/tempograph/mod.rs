//! Day-discretized interaction network: edge construction, cumulative
//! snapshots, growth metrics and forest-fire subsampling.

mod edges;
mod forest_fire;
mod metrics;
mod snapshot;
mod union_find;

pub use edges::{build_edges, BuildOptions, BuildOutcome, EdgeMode, TemporalEdge, TemporalEdgeList};
pub use forest_fire::{forest_fire_sample, DEFAULT_P_FORWARD};
pub use metrics::{
    avg_degree_centrality_series, component_count_series, edge_influx, edge_influx_series, growth_rate_comparison,
    write_metrics_csv, GrowthComparison, InfluxReport, Metric, MetricSeries,
};
pub use snapshot::Snapshot;
pub use union_find::UnionFind;
