//! Conflict sets on the link, their cone under the weighted action, and
//! separating-set evidence assembled from density reports.

mod certificate;
mod cone;
mod conflict;
mod sides;
mod thin_wedge;

pub use conflict::{
    bipartitions, branch_sets, conflict_set, conflict_set_with, default_partition, flow_cone, geometric_ladder,
    rotation_gap, tangent_cone_collapse, BranchSets, CollapseReport, ConflictCloud, FlowRung, NearestSet,
    COLLAPSE_MAX_FINAL_RATIO, COLLAPSE_MIN_SLOPE, DEFAULT_SLICE_SAMPLES, DEFAULT_TAU_FACTOR,
};
pub use cone::{ConeOverBisector, LinearMap, DEFAULT_QUADRATURE_NODES};
pub use certificate::{
    certificate_verdict, separating_certificate, CertificateParams, CertificateSeeds, CertificateVerdict,
    SeparatingCertificate, CERTIFICATE_SCHEMA_VERSION, DEFAULT_SIDE_TAU_FACTOR,
};
pub use sides::{classify, side_decomposition, Side, SideRung};
pub use thin_wedge::{thin_wedge_volume, ThinWedgeCell, ThinWedgeTable, THIN_WEDGE_MAX_SPREAD};
