//! Inner and outer distances, Hausdorff measure estimates and densities.
//!
//! The inner metric is estimated by shortest paths in a symmetric k-nearest
//! neighbour graph whose edges are Euclidean chords, so graph distances never
//! undercut the outer distance. Densities are read off a ladder of radii by a
//! weighted log-log fit of the measure against the radius.

mod density;
mod graph;

pub use density::{
    density_comparability, density_ladder, density_ratio, measure_estimate, weighted_slope, DensityReport,
    FlatPlane, LadderOptions, MeasureEstimate, MetricKind, Predicate, Rung, Sampler, SurfaceBall, Verdict,
    BOOTSTRAP_RESAMPLES, DEFAULT_LADDER, DENSITY_SCHEMA_VERSION, MIN_RUNG_SAMPLES,
};
pub use graph::{build_graph, inner_distance, NeighborGraph, DEFAULT_K_NN};
