use crate::error::{Error, Result};
use crate::metric::{weighted_slope, NeighborGraph, Sampler, SurfaceBall, DEFAULT_K_NN, MIN_RUNG_SAMPLES};
use crate::rng;
use crate::sampling::{RegionKind, RegionSpec};
use crate::surfaces::WeightedSurface;
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sources per rung; each source is paired with [`TARGETS_PER_SOURCE`] points.
pub const SOURCES_PER_RUNG: usize = 16;
pub const TARGETS_PER_SOURCE: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicalityRung {
    pub radius: f64,
    /// Points of the annulus `r <= |p| <= 2r`.
    pub samples: usize,
    pub pairs: usize,
    /// Pairs in different graph components (excluded from the ratios).
    pub disconnected_pairs: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// Mean inner distance over `r`, a scale-free size of the annulus.
    pub mean_inner_over_r: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicalityReport {
    pub label: String,
    pub rungs: Vec<ConicalityRung>,
    /// Slope of log(max ratio) against log r over unflagged rungs.
    pub trend_slope: f64,
    pub max_ratio: f64,
}

impl ConicalityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,samples,pairs,disconnected_pairs,max_ratio,median_ratio,mean_inner_over_r,flagged\n");
        for r in &self.rungs {
            s += &format!(
                "{},{},{},{},{:.6},{:.6},{:.6},{}\n",
                r.radius, r.samples, r.pairs, r.disconnected_pairs, r.max_ratio, r.median_ratio, r.mean_inner_over_r, r.flagged
            );
        }
        s
    }
}

/// Inner over outer distance; coincident points count as undistorted.
pub fn distortion(inner: f64, outer: f64) -> f64 {
    if outer == 0.0 {
        1.0
    } else {
        inner / outer
    }
}

fn probe_rung(sampler: &dyn Sampler, radius: f64, n: usize, seed: u64) -> Result<ConicalityRung> {
    let cloud = sampler.sample(2.0 * radius, n, seed)?;
    let graph = NeighborGraph::from_points(cloud.points.clone(), DEFAULT_K_NN);
    let annulus: Vec<usize> = (0..cloud.len()).filter(|&i| cloud.points[i].norm() >= radius).collect();
    let mut rung = ConicalityRung {
        radius,
        samples: annulus.len(),
        pairs: 0,
        disconnected_pairs: 0,
        max_ratio: 0.0,
        median_ratio: 0.0,
        mean_inner_over_r: 0.0,
        flagged: annulus.len() < MIN_RUNG_SAMPLES,
    };
    if annulus.len() < 2 {
        rung.flagged = true;
        return Ok(rung);
    }
    let mut rng = rng::stream(seed, u64::MAX);
    let sources = sample_indices(&mut rng, annulus.len(), SOURCES_PER_RUNG.min(annulus.len()));
    let mut ratios = Vec::new();
    let mut inner_sum = 0.0;
    for si in sources {
        let source = annulus[si];
        let dist = graph.any_angle_distances_from(source);
        for ti in sample_indices(&mut rng, annulus.len(), TARGETS_PER_SOURCE.min(annulus.len())) {
            let target = annulus[ti];
            let inner = dist[target];
            if !inner.is_finite() {
                rung.disconnected_pairs += 1;
                continue;
            }
            let outer = cloud.points[source].distance(&cloud.points[target]);
            ratios.push(distortion(inner, outer));
            inner_sum += inner;
        }
    }
    rung.pairs = ratios.len();
    if !ratios.is_empty() {
        ratios.sort_by(f64::total_cmp);
        rung.max_ratio = *ratios.last().unwrap();
        rung.median_ratio = ratios[ratios.len() / 2];
        rung.mean_inner_over_r = inner_sum / ratios.len() as f64 / radius;
    }
    Ok(rung)
}

/// Inner/outer distortion of random pairs in the annuli `r <= |p| <= 2r`.
/// Inner distances are graph distances in the whole ball of radius `2r`.
pub fn conicality_probe(sampler: &dyn Sampler, r_ladder: &[f64], n: usize, seed: u64) -> Result<ConicalityReport> {
    if r_ladder.is_empty() || r_ladder.iter().any(|&r| !(r > 0.0)) || r_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radius ladder must be positive and decreasing".into()));
    }
    let rungs = r_ladder
        .par_iter()
        .enumerate()
        .map(|(i, &r)| probe_rung(sampler, r, n, rng::derive_seed(seed, i as u64 + 1)))
        .collect::<Result<Vec<_>>>()?;
    let live: Vec<&ConicalityRung> = rungs.iter().filter(|r| !r.flagged && r.pairs > 0).collect();
    let trend_slope = weighted_slope(
        &live.iter().map(|r| r.radius.ln()).collect::<Vec<_>>(),
        &live.iter().map(|r| r.max_ratio.ln()).collect::<Vec<_>>(),
        &vec![1.0; live.len()],
    )
    .map_or(0.0, |f| f.0);
    Ok(ConicalityReport {
        label: sampler.describe(),
        max_ratio: live.iter().map(|r| r.max_ratio).fold(0.0, f64::max),
        rungs,
        trend_slope,
    })
}

/// [`conicality_probe`] on the wedge piece `X ∩ {ε|y| <= |z| <= |y|/ε}`.
pub fn wedge_conicality_probe(
    surface: &WeightedSurface,
    eps_w: f64,
    r_ladder: &[f64],
    n: usize,
    seed: u64,
) -> Result<ConicalityReport> {
    let region = RegionSpec::new(RegionKind::Wedge, 1.0, eps_w, Vec::new())?;
    conicality_probe(&SurfaceBall { surface, region: Some(region) }, r_ladder, n, seed)
}
