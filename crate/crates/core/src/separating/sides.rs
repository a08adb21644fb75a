use super::conflict::BranchSets;
use crate::error::Result;
use crate::geometry::ComplexPoint3;
use crate::rng;
use crate::sampling::{sample_ball, PointCloud, RegionSpec};
use crate::surfaces::WeightedSurface;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    A,
    B,
    /// Within the bisector band, or not flowable to the link.
    Discarded,
}

/// Which source set is closer once `p` is flowed along its orbit to the
/// link. Constant on orbits by construction.
pub fn classify(surface: &WeightedSurface, sets: &BranchSets, tau: f64, p: &ComplexPoint3) -> Side {
    if p.norm() == 0.0 {
        return Side::Discarded;
    }
    let Ok((q, _)) = surface.flow_to_norm(p, sets.link_radius) else { return Side::Discarded };
    let g = sets.gap_value(&q);
    if g < -tau {
        Side::A
    } else if g > tau {
        Side::B
    } else {
        Side::Discarded
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideRung {
    pub eps: f64,
    pub a: PointCloud,
    pub b: PointCloud,
    pub discarded: usize,
    pub total: usize,
}

/// Ball samples of X at every radius of `ladder`, split into the two sides.
pub fn side_decomposition(
    surface: &WeightedSurface,
    sets: &BranchSets,
    tau: f64,
    ladder: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<SideRung>> {
    ladder
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let cloud = sample_ball(surface, eps, n, &RegionSpec::ball(eps), rng::derive_seed(seed, i as u64 + 1))?;
            let sides: Vec<Side> = cloud.points.par_iter().map(|p| classify(surface, sets, tau, p)).collect();
            let pick = |want: Side| {
                let mut out = PointCloud::empty(4, cloud.region.clone(), cloud.seed, cloud.total_draws);
                out.rejected_near_branch = cloud.rejected_near_branch;
                for (j, side) in sides.iter().enumerate() {
                    if *side == want {
                        out.push(cloud.points[j], cloud.weights[j], cloud.residuals[j], cloud.tags[j], cloud.draws[j]);
                    }
                }
                out
            };
            Ok(SideRung {
                eps,
                a: pick(Side::A),
                b: pick(Side::B),
                discarded: sides.iter().filter(|s| **s == Side::Discarded).count(),
                total: cloud.len(),
            })
        })
        .collect()
}
