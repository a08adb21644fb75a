//! The projection `(x, y, z) ↦ (y, z)` as a branched covering: loop lifting,
//! monodromy, and probes of the Lipschitz constants and conical geometry of
//! the wedge piece.

mod conicality;
mod lipschitz;
mod monodromy;

pub use monodromy::{
    branch_locus_distance, compose, cover_connectivity, identity, inverse, is_bijection, lift_loop,
    nearest_root_index, order, standard_loop, ConnectivityReport, LoopKind, LoopSpec, MonodromyResult, Permutation,
    PermutationGroup, DEFAULT_LOOP_STEPS,
};
pub use lipschitz::{
    dx_dy_bound, dx_dz_bound, lambda_ratios, lipschitz_bound_probe, LipschitzReport, LAMBDA_SAFETY, MIN_LIPSCHITZ_SAMPLES,
};
pub use conicality::{
    conicality_probe, distortion, wedge_conicality_probe, ConicalityReport, ConicalityRung, SOURCES_PER_RUNG,
    TARGETS_PER_SOURCE,
};
