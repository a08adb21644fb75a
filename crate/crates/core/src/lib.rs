//! Numerical probes of the bi-Lipschitz geometry of weighted-homogeneous
//! complex surface singularities.
//!
//! The crate samples surfaces `X = {f = 0} ⊂ C³` near the origin, estimates
//! Hausdorff measures and densities of subsets, builds conflict sets
//! (generalised Voronoi bisectors) on the link and flows them to the cone
//! point, and lifts loops through the projection `(x, y, z) ↦ (y, z)` to read
//! off monodromy.
//!
//! Modules:
//! - [`surfaces`]: surface families, evaluation, fibers, the weighted action.
//! - [`sampling`]: weighted point clouds on links, balls, wedges and slices.
//! - [`metric`]: neighbour graphs, inner distances, density ladders.
//! - [`separating`]: conflict sets, cone flow and separating-set evidence.
//! - [`covering`]: loop lifting, monodromy and Lipschitz probes.

pub mod continuation;
pub mod covering;
pub mod error;
pub mod geometry;
pub mod metric;
pub mod poly;
pub mod rng;
pub mod sampling;
pub mod separating;
pub mod surfaces;

pub use error::{Error, Result};
pub use geometry::ComplexPoint3;
pub use num_complex::Complex64;
pub use surfaces::{briancon_speder, brieskorn, plane_x0, Term, WeightedSurface};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
