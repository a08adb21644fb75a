use super::graph::{NeighborGraph, DEFAULT_K_NN};
use crate::error::{Error, Result};
use crate::geometry::ComplexPoint3;
use crate::rng;
use crate::sampling::{sample_ball, unit_ball_volume, PointCloud, RegionSpec};
use crate::surfaces::WeightedSurface;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const DENSITY_SCHEMA_VERSION: u32 = 1;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Rungs with fewer surviving samples are excluded from the fit.
pub const MIN_RUNG_SAMPLES: usize = 50;
/// Relative floor on per-rung standard errors, so exact estimators (flat
/// anchors) keep finite regression weights.
const RELATIVE_SE_FLOOR: f64 = 1e-9;

/// Point predicate selecting the set `V`.
pub type Predicate<'a> = dyn Fn(&ComplexPoint3) -> bool + Sync + 'a;

/// A source of weighted samples of a set near the origin: `sample(r, ..)`
/// covers the set intersected with the closed Euclidean ball of radius `r`.
pub trait Sampler: Sync {
    /// Intrinsic dimension of the sampled set.
    fn dimension(&self) -> usize;
    fn sample(&self, radius: f64, n: usize, seed: u64) -> Result<PointCloud>;
    fn describe(&self) -> String;
}

/// The 4-dimensional surface itself, optionally restricted to a region.
pub struct SurfaceBall<'a> {
    pub surface: &'a WeightedSurface,
    /// Region applied in addition to the ball (its radius is ignored).
    pub region: Option<RegionSpec>,
}

impl Sampler for SurfaceBall<'_> {
    fn dimension(&self) -> usize {
        4
    }
    fn sample(&self, radius: f64, n: usize, seed: u64) -> Result<PointCloud> {
        let region = match &self.region {
            Some(r) => RegionSpec::new(r.kind, radius, r.wedge_eps, r.params.clone())?,
            None => RegionSpec::ball(radius),
        };
        sample_ball(self.surface, radius, n, &region, seed)
    }
    fn describe(&self) -> String {
        match &self.region {
            Some(r) => format!("{} ∩ {:?}(ε={})", self.surface.label(), r.kind, r.wedge_eps),
            None => self.surface.label().to_string(),
        }
    }
}

/// The real `dim`-plane spanned by the first `dim` real coordinates of C³.
pub struct FlatPlane {
    pub dim: usize,
}

impl Sampler for FlatPlane {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn sample(&self, radius: f64, n: usize, seed: u64) -> Result<PointCloud> {
        if self.dim == 0 || self.dim > 6 {
            return Err(Error::InvalidArgument(format!("plane dimension {} out of range", self.dim)));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        let dim = self.dim;
        let weight = unit_ball_volume(dim) * radius.powi(dim as i32) / n as f64;
        let pts = rng::par_map_indexed(n, seed, |_, rng| {
            let mut v = [0.0; 6];
            let mut norm: f64 = 0.0;
            for c in v.iter_mut().take(dim) {
                *c = rng.sample(rand_distr::StandardNormal);
                norm += *c * *c;
            }
            let scale = radius * rng.random::<f64>().powf(1.0 / dim as f64) / norm.sqrt().max(1e-300);
            ComplexPoint3::from_real(&v.map(|c| c * scale))
        });
        let mut cloud = PointCloud::empty(dim, RegionSpec::ball(radius), seed, n);
        for (i, p) in pts.into_iter().enumerate() {
            cloud.push(p, weight, 0.0, 0, i as u32);
        }
        Ok(cloud)
    }
    fn describe(&self) -> String {
        format!("real {}-plane", self.dim)
    }
}

/// Ball used at each rung.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Outer,
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PositiveDensity,
    ZeroDensity,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PositiveDensity => "positive-density",
            Verdict::ZeroDensity => "zero-density",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub standard_error: f64,
}

/// Sum of the weights of points passing `predicate`, with a bootstrap
/// standard error over the cloud's base draws.
pub fn measure_estimate(cloud: &PointCloud, predicate: &Predicate) -> MeasureEstimate {
    let mask: Vec<bool> = cloud.points.iter().map(predicate).collect();
    measure_with_mask(cloud, &mask, rng::derive_seed(cloud.seed, 0xB007))
}

fn measure_with_mask(cloud: &PointCloud, mask: &[bool], seed: u64) -> MeasureEstimate {
    let mut per_draw = vec![0.0; cloud.total_draws.max(1)];
    let mut value = 0.0;
    for i in 0..cloud.len() {
        if mask[i] {
            per_draw[cloud.draws[i] as usize] += cloud.weights[i];
            value += cloud.weights[i];
        }
    }
    if value == 0.0 {
        return MeasureEstimate { value: 0.0, standard_error: 0.0 };
    }
    let n = per_draw.len();
    let mut rng = rng::stream(seed, 0);
    let mut reps = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut s = 0.0;
        for _ in 0..n {
            s += per_draw[rng.random_range(0..n)];
        }
        reps.push(s);
    }
    let mean = reps.iter().sum::<f64>() / reps.len() as f64;
    let var = reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (reps.len() - 1) as f64;
    MeasureEstimate { value, standard_error: var.sqrt() }
}

#[derive(Debug, Clone)]
pub struct LadderOptions {
    /// Density dimension k.
    pub k: usize,
    /// Strictly decreasing radii.
    pub ladder: Vec<f64>,
    pub n_per_rung: usize,
    pub seed: u64,
    pub metric: MetricKind,
    pub k_nn: usize,
    /// Verdict threshold in standard errors.
    pub threshold: f64,
}

impl LadderOptions {
    pub fn new(k: usize, ladder: Vec<f64>, n_per_rung: usize, seed: u64) -> Self {
        Self { k, ladder, n_per_rung, seed, metric: MetricKind::Outer, k_nn: DEFAULT_K_NN, threshold: 3.0 }
    }

    pub fn with_metric(mut self, metric: MetricKind) -> Self {
        self.metric = metric;
        self
    }
}

/// Default radius ladder.
pub const DEFAULT_LADDER: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub eps: f64,
    pub measure: f64,
    pub standard_error: f64,
    /// `measure / (η ε^k)`.
    pub theta: f64,
    pub theta_se: f64,
    /// Samples of V inside the ball.
    pub samples: usize,
    /// Too few samples; excluded from the fit.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub schema_version: u32,
    pub label: String,
    pub dimension: usize,
    pub metric: MetricKind,
    /// Volume of the unit k-ball.
    pub eta: f64,
    pub rungs: Vec<Rung>,
    /// Slope of log H^k against log ε; absent when the measure vanishes
    /// identically or fewer than two rungs survive.
    pub alpha: Option<f64>,
    pub alpha_se: Option<f64>,
    /// Inverse-variance weighted mean of θ over the surviving rungs.
    pub theta_star: f64,
    pub theta_star_se: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl DensityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One rung per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,measure,standard_error,theta,theta_se,samples,flagged\n");
        for r in &self.rungs {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?},{},{}",
                r.eps, r.measure, r.standard_error, r.theta, r.theta_se, r.samples, r.flagged
            );
        }
        out
    }
}

/// Weighted least squares fit of `y = a + b x`; returns `(b, se_b, a)` with
/// the standard error inflated by the reduced χ² when it exceeds 1.
pub fn weighted_slope(x: &[f64], y: &[f64], sigma: &[f64]) -> Option<(f64, f64, f64)> {
    if x.len() < 2 {
        return None;
    }
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - xm).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = (0..x.len()).map(|i| w[i] * (x[i] - xm) * (y[i] - ym)).sum();
    let b = sxy / sxx;
    let a = ym - b * xm;
    let chi2: f64 = (0..x.len()).map(|i| w[i] * (y[i] - a - b * x[i]).powi(2)).sum();
    let dof = x.len().saturating_sub(2).max(1) as f64;
    let inflation = (chi2 / dof).max(1.0);
    Some((b, (inflation / sxx).sqrt(), a))
}

fn rung_cloud(sampler: &dyn Sampler, eps: f64, opts: &LadderOptions, index: usize) -> Result<PointCloud> {
    sampler.sample(eps, opts.n_per_rung, rng::derive_seed(opts.seed, index as u64 + 1))
}

/// Membership mask of the metric ball of radius `eps` about the origin.
fn ball_mask(cloud: &PointCloud, eps: f64, metric: MetricKind, k_nn: usize) -> Vec<bool> {
    match metric {
        MetricKind::Outer => cloud.points.iter().map(|p| p.norm() <= eps).collect(),
        MetricKind::Inner => {
            // inner balls lie inside outer balls, so the outer sample suffices
            let mut pts = Vec::with_capacity(cloud.len() + 1);
            pts.push(ComplexPoint3::ORIGIN);
            pts.extend(cloud.points.iter().copied());
            let graph = NeighborGraph::from_points(pts, k_nn);
            let d = graph.any_angle_distances_from(0);
            d[1..].iter().map(|&v| v <= eps).collect()
        }
    }
}

fn measure_rung(
    sampler: &dyn Sampler,
    v: &Predicate,
    opts: &LadderOptions,
    index: usize,
    eta: f64,
) -> Result<Rung> {
    let eps = opts.ladder[index];
    let cloud = rung_cloud(sampler, eps, opts, index)?;
    let ball = ball_mask(&cloud, eps, opts.metric, opts.k_nn);
    let mask: Vec<bool> = cloud.points.iter().zip(&ball).map(|(p, &b)| b && v(p)).collect();
    let samples = mask.iter().filter(|&&m| m).count();
    let est = if sampler.dimension() < opts.k {
        // a lower-dimensional set carries no k-dimensional measure
        MeasureEstimate { value: 0.0, standard_error: 0.0 }
    } else {
        measure_with_mask(&cloud, &mask, rng::derive_seed(opts.seed, 0xB007 + index as u64))
    };
    let norm = eta * eps.powi(opts.k as i32);
    let se = est.standard_error.max(RELATIVE_SE_FLOOR * est.value);
    Ok(Rung {
        eps,
        measure: est.value,
        standard_error: se,
        theta: est.value / norm,
        theta_se: se / norm,
        samples,
        flagged: samples < MIN_RUNG_SAMPLES,
    })
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InvalidArgument("empty ladder".into()));
    }
    if ladder.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("ladder radii must be positive".into()));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("ladder must be decreasing".into()));
    }
    Ok(())
}

/// Estimates `H^k(V ∩ εB)` on each rung, fits the exponent and classifies
/// the density at the origin.
pub fn density_ladder(sampler: &dyn Sampler, v: &Predicate, opts: &LadderOptions) -> Result<DensityReport> {
    check_ladder(&opts.ladder)?;
    if sampler.dimension() > opts.k {
        return Err(Error::NotApplicable(format!(
            "a {}-dimensional set has no finite {}-density",
            sampler.dimension(),
            opts.k
        )));
    }
    let eta = unit_ball_volume(opts.k);
    let rungs = (0..opts.ladder.len())
        .into_par_iter()
        .map(|i| measure_rung(sampler, v, opts, i, eta))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(sampler.describe(), opts, eta, rungs))
}

fn assemble(label: String, opts: &LadderOptions, eta: f64, rungs: Vec<Rung>) -> DensityReport {
    let thr = opts.threshold;
    let k = opts.k as f64;
    let identically_zero = rungs.iter().all(|r| r.measure == 0.0);
    let live: Vec<&Rung> = rungs.iter().filter(|r| !r.flagged && r.measure > 0.0).collect();
    let fit = weighted_slope(
        &live.iter().map(|r| r.eps.ln()).collect::<Vec<_>>(),
        &live.iter().map(|r| r.measure.ln()).collect::<Vec<_>>(),
        &live.iter().map(|r| r.standard_error / r.measure).collect::<Vec<_>>(),
    );
    let (alpha, alpha_se) = match fit {
        Some((b, se, _)) => (Some(b), Some(se.max(1e-9))),
        None => (None, None),
    };
    let (theta_star, theta_star_se) = if live.is_empty() {
        (0.0, 0.0)
    } else {
        let w: Vec<f64> = live.iter().map(|r| 1.0 / (r.theta_se * r.theta_se)).collect();
        let sw: f64 = w.iter().sum();
        (live.iter().zip(&w).map(|(r, w)| w * r.theta).sum::<f64>() / sw, 1.0 / sw.sqrt())
    };
    let min_rung = live.iter().min_by(|a, b| a.theta.total_cmp(&b.theta));
    let theta_min = min_rung.map_or(0.0, |r| r.theta);
    let theta_max = live.iter().map(|r| r.theta).fold(0.0, f64::max);
    let verdict = if identically_zero {
        Verdict::ZeroDensity
    } else {
        match (alpha, alpha_se, min_rung) {
            (Some(a), Some(se), _) if a > k + thr * se => Verdict::ZeroDensity,
            (Some(a), Some(se), Some(m)) if (a - k).abs() <= thr * se && m.theta > thr * m.theta_se => {
                Verdict::PositiveDensity
            }
            _ => Verdict::Inconclusive,
        }
    };
    DensityReport {
        schema_version: DENSITY_SCHEMA_VERSION,
        label,
        dimension: opts.k,
        metric: opts.metric,
        eta,
        rungs,
        alpha,
        alpha_se,
        theta_star,
        theta_star_se,
        theta_min,
        theta_max,
        threshold: thr,
        verdict,
    }
}

/// Empirical `(min, max)` over the ladder of `θ_a(ε) / θ_b(ε)`.
pub fn density_ratio(a: &DensityReport, b: &DensityReport) -> Result<(f64, f64)> {
    if a.rungs.len() != b.rungs.len() {
        return Err(Error::InvalidArgument("reports cover different ladders".into()));
    }
    let ratios: Vec<f64> = a
        .rungs
        .iter()
        .zip(&b.rungs)
        .filter(|(x, y)| !x.flagged && !y.flagged && y.theta > 0.0)
        .map(|(x, y)| x.theta / y.theta)
        .collect();
    if ratios.is_empty() {
        return Err(Error::Empty("no rung has positive density under both metrics".into()));
    }
    Ok((ratios.iter().copied().fold(f64::INFINITY, f64::min), ratios.iter().copied().fold(0.0, f64::max)))
}

/// `(κ̂₁, κ̂₂)`: extreme ratios of outer to inner normalised densities.
pub fn density_comparability(sampler: &dyn Sampler, v: &Predicate, opts: &LadderOptions) -> Result<(f64, f64)> {
    let outer = density_ladder(sampler, v, &opts.clone().with_metric(MetricKind::Outer))?;
    let inner = density_ladder(sampler, v, &opts.clone().with_metric(MetricKind::Inner))?;
    density_ratio(&outer, &inner)
}
