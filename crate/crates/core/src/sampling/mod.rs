//! Weighted point clouds on pieces of a surface.
//!
//! Every sampler draws a base variable uniformly (a direction on the unit
//! 3-sphere of `(y, z)`, a point of the 4-ball, or a point of a disk), lifts
//! it to all sheets of `X` over it and attaches an importance weight equal to
//! `(base volume / draws) × (area Jacobian of the lift)`. Summing weights of a
//! subset therefore gives an unbiased estimate of its Hausdorff measure.
//!
//! Draws whose fiber is too close to the branch locus are rejected and
//! counted; they still count towards the number of draws, so the estimator
//! simply drops a thin neighbourhood of the locus.

mod io;
mod region;

pub use io::{read_binary, read_text, write_binary, write_text};
pub use region::{in_region, RegionKind, RegionSpec, CUSTOM_ORTHANT};

use crate::error::{Error, Result};
use crate::geometry::{self, ComplexPoint3, Vec6};
use crate::rng;
use crate::surfaces::{slice_structure, SliceStructure};
use crate::surfaces::WeightedSurface;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Fibers whose roots are closer than this, relative to the natural x-scale
/// of the base point, are treated as branch points.
pub const BRANCH_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<ComplexPoint3>,
    /// Measure represented by each point.
    pub weights: Vec<f64>,
    /// `|f|` at each point.
    pub residuals: Vec<f64>,
    /// Branch label for slice clouds, sheet index otherwise.
    pub tags: Vec<i64>,
    /// Base draw that produced each point (several sheets share a draw).
    pub draws: Vec<u32>,
    pub total_draws: usize,
    pub rejected_near_branch: usize,
    /// Intrinsic dimension k.
    pub dimension: usize,
    pub region: RegionSpec,
    pub seed: u64,
}

impl PointCloud {
    pub fn empty(dimension: usize, region: RegionSpec, seed: u64, total_draws: usize) -> Self {
        Self {
            points: Vec::new(),
            weights: Vec::new(),
            residuals: Vec::new(),
            tags: Vec::new(),
            draws: Vec::new(),
            total_draws,
            rejected_near_branch: 0,
            dimension,
            region,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn push(&mut self, point: ComplexPoint3, weight: f64, residual: f64, tag: i64, draw: u32) {
        self.points.push(point);
        self.weights.push(weight);
        self.residuals.push(residual);
        self.tags.push(tag);
        self.draws.push(draw);
    }

    /// Keeps the points passing `keep`; draw bookkeeping is preserved so the
    /// result still estimates measures of the filtered set.
    pub fn filter<F: Fn(&ComplexPoint3) -> bool>(&self, keep: F) -> PointCloud {
        let mut out = PointCloud::empty(self.dimension, self.region.clone(), self.seed, self.total_draws);
        out.rejected_near_branch = self.rejected_near_branch;
        for i in 0..self.len() {
            if keep(&self.points[i]) {
                out.push(self.points[i], self.weights[i], self.residuals[i], self.tags[i], self.draws[i]);
            }
        }
        out
    }

    /// Applies `map` to every point, leaving weights untouched.
    pub fn map_points<F: Fn(&ComplexPoint3) -> ComplexPoint3>(&self, map: F) -> PointCloud {
        let mut out = self.clone();
        for p in &mut out.points {
            *p = map(p);
        }
        out
    }

    /// Distinct tags present, ascending.
    pub fn labels(&self) -> Vec<i64> {
        let mut t = self.tags.clone();
        t.sort_unstable();
        t.dedup();
        t
    }
}

/// Residual bound `1e-9 (1 + radius^{d/w3})` for points inside a ball.
pub fn residual_bound(surface: &WeightedSurface, radius: f64) -> f64 {
    let [_, _, w3] = surface.weights();
    1e-9 * (1.0 + radius.powf(surface.degree() as f64 / w3 as f64))
}

/// Natural modulus of x over the base point `(y, z)`: the weighted
/// quasi-norm raised to `w1/w3`.
fn x_scale(surface: &WeightedSurface, y: Complex64, z: Complex64) -> f64 {
    let [a, b, _] = surface.flow_exponents();
    let quasi = y.norm().powf(1.0 / b).max(z.norm());
    quasi.powf(a)
}

/// Roots over `(y, z)`, or `None` when the fiber is within the branch
/// tolerance of the locus.
fn fiber(surface: &WeightedSurface, y: Complex64, z: Complex64) -> Result<Option<Vec<Complex64>>> {
    let roots = surface.solve_fiber(y, z)?;
    let sep = roots.min_separation();
    if roots.degree() > 1 && sep < BRANCH_SEPARATION * x_scale(surface, y, z) {
        return Ok(None);
    }
    Ok(Some(roots.values))
}

fn unit_s3(rng: &mut ChaCha8Rng) -> [f64; 4] {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.map(|c| c / n);
        }
    }
}

struct Sample {
    point: ComplexPoint3,
    weight: f64,
    tag: i64,
}

enum Draw {
    Points(Vec<Sample>),
    Rejected,
}

fn collect(
    surface: &WeightedSurface,
    draws: Vec<Result<Draw>>,
    dimension: usize,
    region: &RegionSpec,
    seed: u64,
) -> Result<PointCloud> {
    let mut cloud = PointCloud::empty(dimension, region.clone(), seed, draws.len());
    for (i, draw) in draws.into_iter().enumerate() {
        match draw? {
            Draw::Rejected => cloud.rejected_near_branch += 1,
            Draw::Points(samples) => {
                for s in samples {
                    let residual = surface.evaluate(&s.point).norm();
                    cloud.push(s.point, s.weight, residual, s.tag, i as u32);
                }
            }
        }
    }
    Ok(cloud)
}

fn check_count(n: usize, radius: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Volume of the unit k-ball.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * PI / k as f64,
    }
}

/// Intervals of `s = |y|² / (|y|² + |z|²)` admitted by a wedge-type region.
/// For directions uniform on the unit 3-sphere `s` is uniform on `[0, 1]`
/// and independent of the two phases, so such regions can be sampled
/// directly instead of by rejection.
fn ratio_band(region: &RegionSpec) -> Option<Vec<(f64, f64)>> {
    let e2 = region.wedge_eps * region.wedge_eps;
    let a = e2 / (1.0 + e2);
    let band = match region.kind {
        RegionKind::Wedge => vec![(a, 1.0 - a)],
        RegionKind::ThinWedge => vec![(0.0, a), (1.0 - a, 1.0)],
        _ => return None,
    };
    (band.iter().map(|(lo, hi)| hi - lo).sum::<f64>() > 0.0).then_some(band)
}

/// Uniform direction on the unit 3-sphere conditioned on `s` lying in `band`.
fn banded_s3(rng: &mut ChaCha8Rng, band: &[(f64, f64)]) -> [f64; 4] {
    let total: f64 = band.iter().map(|(lo, hi)| hi - lo).sum();
    let mut t = rng.random::<f64>() * total;
    let mut s = band[band.len() - 1].1;
    for &(lo, hi) in band {
        if t <= hi - lo {
            s = lo + t;
            break;
        }
        t -= hi - lo;
    }
    let (p1, p2) = (rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI);
    let (ry, rz) = (s.sqrt(), (1.0 - s).max(0.0).sqrt());
    [ry * p1.cos(), ry * p1.sin(), rz * p2.cos(), rz * p2.sin()]
}

/// `n` draws on the 4-dimensional piece `X ∩ radius·B⁶ ∩ region`. Wedge and
/// thin-wedge regions draw only admissible `(y, z)` directions.
pub fn sample_ball(
    surface: &WeightedSurface,
    radius: f64,
    n: usize,
    region: &RegionSpec,
    seed: u64,
) -> Result<PointCloud> {
    check_count(n, radius)?;
    let band = ratio_band(region);
    let share = band.as_ref().map_or(1.0, |b| b.iter().map(|(lo, hi)| hi - lo).sum());
    let base = share * unit_ball_volume(4) * radius.powi(4) / n as f64;
    let draws = rng::par_map_indexed(n, seed, |_, rng| -> Result<Draw> {
        let u = match &band {
            Some(b) => banded_s3(rng, b),
            None => unit_s3(rng),
        };
        let rho = radius * rng.random::<f64>().powf(0.25);
        let y = Complex64::new(u[0], u[1]) * rho;
        let z = Complex64::new(u[2], u[3]) * rho;
        let Some(roots) = fiber(surface, y, z)? else { return Ok(Draw::Rejected) };
        let mut out = Vec::new();
        for (sheet, x) in roots.into_iter().enumerate() {
            let p = ComplexPoint3::new(x, y, z);
            if p.norm() > radius || !in_region(&p, region) {
                continue;
            }
            let Ok((hy, hz)) = surface.implicit_derivatives(&p) else { return Ok(Draw::Rejected) };
            let jac = 1.0 + hy.norm_sqr() + hz.norm_sqr();
            out.push(Sample { point: p, weight: base * jac, tag: sheet as i64 });
        }
        Ok(Draw::Points(out))
    });
    collect(surface, draws, 4, region, seed)
}

/// Orthonormal basis of the tangent space of the unit 3-sphere at `u`.
fn sphere_tangents(u: &[f64; 4]) -> [[f64; 4]; 3] {
    let mut basis: Vec<[f64; 4]> = vec![*u];
    for axis in 0..4 {
        if basis.len() == 4 {
            break;
        }
        let mut e = [0.0; 4];
        e[axis] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = e.iter().zip(b).map(|(p, q)| p * q).sum();
                for k in 0..4 {
                    e[k] -= c * b[k];
                }
            }
        }
        let n = e.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(e.map(|c| c / n));
        }
    }
    [basis[1], basis[2], basis[3]]
}

/// 3-volume factor of the map (sphere of radius `s` in (y,z)) → graph →
/// orbit flow to `|p| = radius`, at the graph point `q` flowed by `tau`.
fn link_jacobian(surface: &WeightedSurface, q: &ComplexPoint3, tau: f64, u: &[f64; 4]) -> Result<f64> {
    let (hy, hz) = surface.implicit_derivatives(q)?;
    let a = surface.flow_exponents();
    let coords = q.coords();
    // N(q, τ) = Σ τ^{2a_k} |q_k|²
    let dn_dtau: f64 = (0..3).map(|k| 2.0 * a[k] * tau.powf(2.0 * a[k] - 1.0) * coords[k].norm_sqr()).sum();
    let mut images: Vec<Vec6> = Vec::with_capacity(3);
    for e in sphere_tangents(u) {
        let dy = Complex64::new(e[0], e[1]);
        let dz = Complex64::new(e[2], e[3]);
        let dq = [hy * dy + hz * dz, dy, dz];
        let dn_dq: f64 = (0..3).map(|k| 2.0 * tau.powf(2.0 * a[k]) * (coords[k].conj() * dq[k]).re).sum();
        let dtau = -dn_dq / dn_dtau;
        let dphi: [Complex64; 3] =
            std::array::from_fn(|k| dq[k] * tau.powf(a[k]) + coords[k] * (a[k] * tau.powf(a[k] - 1.0) * dtau));
        images.push(geometry::complex_to_real(dphi));
    }
    Ok(geometry::span_volume(&images))
}

/// `n` draws on the link `X ∩ radius·S⁵ ∩ region`.
pub fn sample_link(
    surface: &WeightedSurface,
    radius: f64,
    n: usize,
    region: &RegionSpec,
    seed: u64,
) -> Result<PointCloud> {
    check_count(n, radius)?;
    // area of the radius-sphere in C² divided by the number of draws
    let base = 2.0 * PI * PI * radius.powi(3) / n as f64;
    let draws = rng::par_map_indexed(n, seed, |_, rng| -> Result<Draw> {
        let u = unit_s3(rng);
        let y = Complex64::new(u[0], u[1]) * radius;
        let z = Complex64::new(u[2], u[3]) * radius;
        let Some(roots) = fiber(surface, y, z)? else { return Ok(Draw::Rejected) };
        let mut out = Vec::new();
        for (sheet, x) in roots.into_iter().enumerate() {
            let q = ComplexPoint3::new(x, y, z);
            let (p, tau) = surface.flow_to_norm(&q, radius)?;
            if !in_region(&p, region) {
                continue;
            }
            let Ok(jac) = link_jacobian(surface, &q, tau, &u) else { return Ok(Draw::Rejected) };
            out.push(Sample { point: p, weight: base * jac, tag: sheet as i64 });
        }
        Ok(Draw::Points(out))
    });
    collect(surface, draws, 3, region, seed)
}

/// `n` draws on the curve `X ∩ {z = 0}` inside the radius ball, tagged with
/// slice component labels.
pub fn sample_slice_z0(surface: &WeightedSurface, radius: f64, n: usize, seed: u64) -> Result<PointCloud> {
    check_count(n, radius)?;
    let structure = slice_structure(surface)?;
    let region = RegionSpec::new(RegionKind::SliceZ0, radius, 1.0, Vec::new())?;
    let base = PI * radius * radius / n as f64;
    let zero = Complex64::new(0.0, 0.0);
    let draws = rng::par_map_indexed(n, seed, |_, rng| -> Result<Draw> {
        let w = Complex64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random::<f64>() * 2.0 * PI);
        if w.norm() == 0.0 {
            return Ok(Draw::Rejected);
        }
        let mut out = Vec::new();
        if let Some(label) = structure.x_axis_label() {
            out.push(Sample { point: ComplexPoint3::new(zero, w, zero), weight: base, tag: label as i64 });
        }
        if let Some(label) = structure.y_axis_label() {
            out.push(Sample { point: ComplexPoint3::new(w, zero, zero), weight: base, tag: label as i64 });
        }
        if !structure.base_roots.is_empty() {
            let labelled = structure.labelled_roots(w)?;
            let xs: Vec<Complex64> = labelled.iter().map(|r| r.0).collect();
            let scale = x_scale(surface, w, zero);
            for (i, &(x, label)) in labelled.iter().enumerate() {
                let close = xs.iter().enumerate().any(|(j, o)| j != i && (o - x).norm() < BRANCH_SEPARATION * scale);
                if close {
                    return Ok(Draw::Rejected);
                }
                let p = ComplexPoint3::new(x, w, zero);
                if p.norm() > radius {
                    continue;
                }
                let slope = reduced_slope(&structure, x, w);
                out.push(Sample { point: p, weight: base * (1.0 + slope.norm_sqr()), tag: label as i64 });
            }
        }
        Ok(Draw::Points(out))
    });
    collect(surface, draws, 2, &region, seed)
}

/// `dx/dy = -h_y / h_x` along `h(x, y) = 0`.
fn reduced_slope(structure: &SliceStructure, x: Complex64, y: Complex64) -> Complex64 {
    let mut hx = Complex64::new(0.0, 0.0);
    let mut hy = Complex64::new(0.0, 0.0);
    for ([a, b], c) in &structure.reduced {
        if *a > 0 {
            hx += c * (*a as f64) * x.powu(a - 1) * y.powu(*b);
        }
        if *b > 0 {
            hy += c * (*b as f64) * x.powu(*a) * y.powu(b - 1);
        }
    }
    -hy / hx
}

/// Points of the selected slice components on the link of radius `radius`,
/// at `n` equally spaced angles per component sheet.
pub fn slice_link_points(
    surface: &WeightedSurface,
    structure: &SliceStructure,
    radius: f64,
    labels: &[usize],
    n: usize,
) -> Result<Vec<ComplexPoint3>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::new();
    for i in 0..n {
        let w = Complex64::from_polar(1.0, 2.0 * PI * (i as f64 + 0.5) / n as f64);
        let mut candidates = Vec::new();
        if structure.x_axis_label().is_some_and(|l| labels.contains(&l)) {
            candidates.push(ComplexPoint3::new(zero, w, zero));
        }
        if structure.y_axis_label().is_some_and(|l| labels.contains(&l)) {
            candidates.push(ComplexPoint3::new(w, zero, zero));
        }
        if !structure.base_roots.is_empty() {
            for (x, label) in structure.labelled_roots(w)? {
                if labels.contains(&label) {
                    candidates.push(ComplexPoint3::new(x, w, zero));
                }
            }
        }
        for c in candidates {
            out.push(surface.flow_to_norm(&c, radius)?.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{briancon_speder, brieskorn, plane_x0};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Relative standard error of a total weight, from per-draw sums.
    fn total_and_se(cloud: &PointCloud) -> (f64, f64) {
        let mut per_draw = vec![0.0; cloud.total_draws];
        for (w, &d) in cloud.weights.iter().zip(&cloud.draws) {
            per_draw[d as usize] += w;
        }
        let n = per_draw.len() as f64;
        let mean = per_draw.iter().sum::<f64>() / n;
        let var = per_draw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean * n, (var / n).sqrt() * n)
    }

    #[test]
    fn banded_wedge_sampling_matches_rejection() {
        let s = briancon_speder(c(0.0, 0.0));
        let full = sample_ball(&s, 0.1, 40_000, &RegionSpec::ball(0.1), 21).unwrap();
        for region in [RegionSpec::thin_wedge(0.1, 0.2).unwrap(), RegionSpec::wedge(0.1, 0.2).unwrap()] {
            let direct = sample_ball(&s, 0.1, 20_000, &region, 22).unwrap();
            assert!(direct.points.iter().all(|p| in_region(p, &region)));
            let (m1, se1) = total_and_se(&direct);
            let (m2, se2) = total_and_se(&full.filter(|p| in_region(p, &region)));
            assert!((m1 - m2).abs() <= 3.0 * (se1 * se1 + se2 * se2).sqrt(), "{:?}: {m1} vs {m2}", region.kind);
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn plane_link_area_is_sphere_area() {
        let cloud = sample_link(&plane_x0(), 1.0, 100_000, &RegionSpec::link_sphere(1.0), 1).unwrap();
        let total = cloud.total_weight();
        assert!((total / (2.0 * PI * PI) - 1.0).abs() < 0.03, "{total}");
    }

    #[test]
    fn plane_ball_volume_is_ball_volume() {
        let cloud = sample_ball(&plane_x0(), 1.0, 100_000, &RegionSpec::ball(1.0), 2).unwrap();
        let (total, se) = total_and_se(&cloud);
        let exact = PI * PI / 2.0;
        assert!((total / exact - 1.0).abs() < 0.03);
        assert!((total - exact).abs() <= 3.0 * se + 1e-9 * exact, "{total} ± {se}");
    }

    #[test]
    fn link_jacobian_matches_finite_differences() {
        let s = briancon_speder(c(1.0, 0.0));
        let radius = 0.1;
        let u = [0.3, -0.5, 0.6, 0.2];
        let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u = u.map(|v| v / nu);
        let lift = |v: [f64; 4]| -> Vec<ComplexPoint3> {
            let y = c(v[0], v[1]) * radius;
            let z = c(v[2], v[3]) * radius;
            let mut roots = s.solve_fiber(y, z).unwrap().values;
            roots.sort_by(|a, b| a.re.total_cmp(&b.re));
            roots.into_iter().map(|x| s.flow_to_norm(&ComplexPoint3::new(x, y, z), radius).unwrap().0).collect()
        };
        let y = c(u[0], u[1]) * radius;
        let z = c(u[2], u[3]) * radius;
        let mut roots = s.solve_fiber(y, z).unwrap().values;
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        let h = 1e-6;
        for (sheet, x) in roots.iter().enumerate() {
            let q = ComplexPoint3::new(*x, y, z);
            let (_, tau) = s.flow_to_norm(&q, radius).unwrap();
            let analytic = link_jacobian(&s, &q, tau, &u).unwrap();
            let mut cols = Vec::new();
            for e in sphere_tangents(&u) {
                // the sphere of radius `radius` is tangent to e with unit speed per radius
                let plus: [f64; 4] = std::array::from_fn(|k| u[k] + h * e[k] / radius);
                let minus: [f64; 4] = std::array::from_fn(|k| u[k] - h * e[k] / radius);
                let (pp, pm) = (lift(plus)[sheet], lift(minus)[sheet]);
                let (a, b) = (pp.to_real(), pm.to_real());
                cols.push(std::array::from_fn::<f64, 6, _>(|k| (a[k] - b[k]) / (2.0 * h)));
            }
            let fd = geometry::span_volume(&cols);
            assert!((fd / analytic - 1.0).abs() < 1e-4, "sheet {sheet}: {fd} vs {analytic}");
        }
    }

    #[test]
    fn link_points_satisfy_constraints() {
        let s = briancon_speder(c(0.0, 0.0));
        let cloud = sample_link(&s, 0.1, 5000, &RegionSpec::link_sphere(0.1), 3).unwrap();
        assert!(!cloud.is_empty());
        let bound = residual_bound(&s, 0.1);
        for (p, r) in cloud.points.iter().zip(&cloud.residuals) {
            assert!(*r <= bound);
            assert!((p.norm() / 0.1 - 1.0).abs() <= 1e-8);
        }
        assert!(cloud.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn wedge_weight_is_monotone_in_eps() {
        let s = briancon_speder(c(0.0, 0.0));
        let narrow = sample_link(&s, 0.1, 4000, &RegionSpec::wedge(0.1, 0.5).unwrap(), 4).unwrap();
        let wide = sample_link(&s, 0.1, 4000, &RegionSpec::wedge(0.1, 0.1).unwrap(), 4).unwrap();
        assert!(wide.total_weight() > narrow.total_weight());
    }

    #[test]
    fn ball_points_satisfy_region() {
        let s = briancon_speder(c(1.0, 0.0));
        let region = RegionSpec::thin_wedge(0.1, 0.2).unwrap();
        let cloud = sample_ball(&s, 0.1, 3000, &region, 5).unwrap();
        assert!(!cloud.is_empty());
        let bound = residual_bound(&s, 0.1);
        for (p, r) in cloud.points.iter().zip(&cloud.residuals) {
            assert!(in_region(p, &region) && p.norm() <= 0.1 && *r <= bound);
        }
    }

    #[test]
    fn slice_labels() {
        let bs1 = sample_slice_z0(&briancon_speder(c(1.0, 0.0)), 0.5, 2000, 6).unwrap();
        assert_eq!(bs1.labels(), vec![0, 1, 2]);
        let bs0 = sample_slice_z0(&briancon_speder(c(0.0, 0.0)), 0.5, 2000, 6).unwrap();
        assert_eq!(bs0.labels(), vec![0]);
        assert!(bs0.points.iter().all(|p| p.x.norm() == 0.0));
        let b = sample_slice_z0(&brieskorn(2, 4, 5).unwrap(), 0.5, 2000, 6).unwrap();
        assert_eq!(b.labels().len(), 2);
        // branches x = ±i y²
        for p in &b.points {
            assert!((p.x * p.x + p.y.powu(4)).norm() < 1e-12);
        }
        let tag_of = |p: &ComplexPoint3, q: &ComplexPoint3| (p.x / (p.y * p.y) - q.x / (q.y * q.y)).norm() < 1e-6;
        for i in 1..b.len() {
            assert_eq!(b.tags[0] == b.tags[i], tag_of(&b.points[0], &b.points[i]));
        }
    }

    #[test]
    fn slice_disk_area() {
        // each axis component of BS(1) restricted to the ball is a disk
        let cloud = sample_slice_z0(&briancon_speder(c(1.0, 0.0)), 0.5, 20_000, 7).unwrap();
        let axis: f64 = cloud.weights.iter().zip(&cloud.tags).filter(|(_, &t)| t == 0).map(|(w, _)| w).sum();
        assert!((axis / (PI * 0.25) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_across_threads() {
        let s = briancon_speder(c(1.0, 0.0));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_ball(&s, 0.1, 2000, &RegionSpec::ball(0.1), 9).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
    }

    #[test]
    fn slice_link_points_lie_on_link() {
        let s = briancon_speder(c(1.0, 0.0));
        let st = slice_structure(&s).unwrap();
        let pts = slice_link_points(&s, &st, 0.1, &[1, 2], 50).unwrap();
        assert_eq!(pts.len(), 50 * 4);
        for p in &pts {
            assert!((p.norm() / 0.1 - 1.0).abs() < 1e-12);
            assert_eq!(p.z, c(0.0, 0.0));
            assert!(st.label_point(p).is_some_and(|l| l == 1 || l == 2));
        }
    }
}
