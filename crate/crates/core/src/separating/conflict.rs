use crate::error::{Error, Result};
use crate::geometry::{self, ComplexPoint3, Vec6};
use crate::metric::weighted_slope;
use crate::sampling::{sample_link, slice_link_points, RegionSpec};
use crate::surfaces::{slice_structure, SliceStructure, WeightedSurface};
use kiddo::{ImmutableKdTree, SquaredEuclidean};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default bisector half-width as a fraction of the link radius.
pub const DEFAULT_TAU_FACTOR: f64 = 0.02;
/// Default number of points in each of the finite samples of Ã and B̃.
pub const DEFAULT_SLICE_SAMPLES: usize = 2000;

/// A finite point set with nearest-point queries.
pub struct NearestSet {
    pub points: Vec<ComplexPoint3>,
    tree: ImmutableKdTree<f64, 6>,
}

impl std::fmt::Debug for NearestSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NearestSet").field("len", &self.points.len()).finish()
    }
}

impl NearestSet {
    pub fn new(points: Vec<ComplexPoint3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("nearest-point set is empty".into()));
        }
        let reals: Vec<[f64; 6]> = points.iter().map(|p| p.to_real()).collect();
        let tree = ImmutableKdTree::new_from_slice(&reals)
            .map_err(|e| Error::InvalidArgument(format!("cannot index point set: {e:?}")))?;
        Ok(Self { points, tree })
    }

    /// Distance to, and index of, the nearest point.
    pub fn nearest(&self, p: &ComplexPoint3) -> (f64, usize) {
        let r = self.tree.query(&p.to_real()).nearest_one::<SquaredEuclidean<f64>>().execute();
        (r.distance.sqrt(), r.item as usize)
    }
}

/// The two disjoint source sets on the link, realised as finite samples of
/// unions of slice components.
#[derive(Debug)]
pub struct BranchSets {
    pub link_radius: f64,
    pub a_labels: Vec<usize>,
    pub b_labels: Vec<usize>,
    pub a: NearestSet,
    pub b: NearestSet,
}

impl BranchSets {
    /// `d(p, Ã) - d(p, B̃)` and its ambient gradient.
    pub fn gap(&self, p: &ComplexPoint3) -> (f64, Vec6) {
        let (da, ia) = self.a.nearest(p);
        let (db, ib) = self.b.nearest(p);
        let pr = p.to_real();
        let ar = self.a.points[ia].to_real();
        let br = self.b.points[ib].to_real();
        let grad = std::array::from_fn(|k| {
            let ua = if da > 0.0 { (pr[k] - ar[k]) / da } else { 0.0 };
            let ub = if db > 0.0 { (pr[k] - br[k]) / db } else { 0.0 };
            ua - ub
        });
        (da - db, grad)
    }

    pub fn gap_value(&self, p: &ComplexPoint3) -> f64 {
        self.a.nearest(p).0 - self.b.nearest(p).0
    }
}

/// Default split: A is the `x = 0` component when present (otherwise the
/// first component) and B is everything else.
pub fn default_partition(structure: &SliceStructure) -> (Vec<usize>, Vec<usize>) {
    let a = structure.x_axis_label().unwrap_or(0);
    (vec![a], (0..structure.component_count).filter(|&l| l != a).collect())
}

/// Every split of the components into two nonempty labelled sets, up to
/// swapping A and B.
pub fn bipartitions(count: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    if !(2..=16).contains(&count) {
        return out;
    }
    for mask in 1u32..(1 << count) - 1 {
        // fix component 0 in A to skip mirrored splits
        if mask & 1 == 0 {
            continue;
        }
        let a: Vec<usize> = (0..count).filter(|&i| mask >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..count).filter(|&i| mask >> i & 1 == 0).collect();
        out.push((a, b));
    }
    out
}

pub fn branch_sets(
    surface: &WeightedSurface,
    structure: &SliceStructure,
    link_radius: f64,
    a_labels: &[usize],
    b_labels: &[usize],
    samples_each: usize,
) -> Result<BranchSets> {
    if structure.component_count < 2 {
        return Err(Error::NotApplicable(format!(
            "the z = 0 slice has {} component(s); two disjoint branch sets need at least 2",
            structure.component_count
        )));
    }
    if a_labels.is_empty() || b_labels.is_empty() {
        return Err(Error::InvalidArgument("both branch sets must be nonempty".into()));
    }
    if a_labels.iter().any(|l| b_labels.contains(l)) {
        return Err(Error::InvalidArgument("branch sets must be disjoint".into()));
    }
    if a_labels.iter().chain(b_labels).any(|&l| l >= structure.component_count) {
        return Err(Error::InvalidArgument(format!("labels must be below {}", structure.component_count)));
    }
    let sample = |labels: &[usize]| -> Result<Vec<ComplexPoint3>> {
        let per_angle = slice_link_points(surface, structure, link_radius, labels, 1)?.len().max(1);
        slice_link_points(surface, structure, link_radius, labels, samples_each.div_ceil(per_angle))
    };
    Ok(BranchSets {
        link_radius,
        a_labels: a_labels.to_vec(),
        b_labels: b_labels.to_vec(),
        a: NearestSet::new(sample(a_labels)?)?,
        b: NearestSet::new(sample(b_labels)?)?,
    })
}

/// Flowed copies of the base points at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRung {
    pub radius: f64,
    pub points: Vec<ComplexPoint3>,
    /// Action parameter used for each point.
    pub params: Vec<f64>,
}

/// Samples of the bisector band `|d(p, Ã) - d(p, B̃)| <= τ` on the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictCloud {
    pub link_radius: f64,
    pub tau: f64,
    pub a_labels: Vec<usize>,
    pub b_labels: Vec<usize>,
    pub a_sample_size: usize,
    pub b_sample_size: usize,
    pub points: Vec<ComplexPoint3>,
    pub residuals: Vec<f64>,
    /// 3-dimensional link measure carried by each sample.
    pub link_weights: Vec<f64>,
    /// 2-dimensional measure of the bisector represented by each sample.
    pub area_weights: Vec<f64>,
    /// Orthonormal tangent pair of the bisector at each sample.
    pub tangents: Vec<[Vec6; 2]>,
    pub draws: Vec<u32>,
    pub total_draws: usize,
    /// Link samples examined (all sheets of all draws).
    pub link_samples: usize,
    /// Minimum distance of a kept point to `{z = 0}`.
    pub delta_hat: Option<f64>,
    pub seed: u64,
    pub flowed: Vec<FlowRung>,
}

impl ConflictCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total H² of the sampled bisector.
    pub fn bisector_area(&self) -> f64 {
        self.area_weights.iter().sum()
    }
}

/// Real normals of X at `p`: the real and imaginary parts of `f`
/// differentiate along `conj ∇f` and `i conj ∇f`.
pub(crate) fn surface_normals(surface: &WeightedSurface, p: &ComplexPoint3) -> [Vec6; 2] {
    let g = surface.gradient(p);
    let n1 = geometry::complex_to_real(g.map(|c| c.conj()));
    let n2 = geometry::complex_to_real(g.map(|c| Complex64::i() * c.conj()));
    [n1, n2]
}

/// Orthonormal basis of the tangent space of the link at `p`.
pub(crate) fn link_tangent_basis(surface: &WeightedSurface, p: &ComplexPoint3) -> Vec<Vec6> {
    let [n1, n2] = surface_normals(surface, p);
    let normals = geometry::orthonormalize(&[n1, n2, p.to_real()], 1e-10);
    geometry::complement_basis(&normals, 6 - normals.len())
}

/// Bisector tangent pair and `|∇_L g|` at a link point.
fn bisector_frame(surface: &WeightedSurface, p: &ComplexPoint3, grad: &Vec6) -> Option<([Vec6; 2], f64)> {
    let tl = link_tangent_basis(surface, p);
    if tl.len() != 3 {
        return None;
    }
    let mut gl = [0.0; 6];
    for e in &tl {
        geometry::axpy(geometry::dot(grad, e), e, &mut gl);
    }
    let gnorm = geometry::norm(&gl);
    if gnorm <= 1e-12 {
        return None;
    }
    let [n1, n2] = surface_normals(surface, p);
    let normals = geometry::orthonormalize(&[n1, n2, p.to_real(), gl], 1e-10);
    let t = geometry::complement_basis(&normals, 2);
    (t.len() == 2).then(|| ([t[0], t[1]], gnorm))
}

/// Link samples within `tau` of the bisector of two branch-set selections.
#[allow(clippy::too_many_arguments)]
pub fn conflict_set(
    surface: &WeightedSurface,
    link_radius: f64,
    a_labels: &[usize],
    b_labels: &[usize],
    n: usize,
    tau: f64,
    slice_samples: usize,
    seed: u64,
) -> Result<ConflictCloud> {
    let structure = slice_structure(surface)?;
    let sets = branch_sets(surface, &structure, link_radius, a_labels, b_labels, slice_samples)?;
    conflict_set_with(surface, &sets, n, tau, seed)
}

/// As [`conflict_set`] with prebuilt branch sets.
pub fn conflict_set_with(surface: &WeightedSurface, sets: &BranchSets, n: usize, tau: f64, seed: u64) -> Result<ConflictCloud> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("bisector tolerance must be non-negative, got {tau}")));
    }
    let radius = sets.link_radius;
    let link = sample_link(surface, radius, n, &RegionSpec::link_sphere(radius), seed)?;
    let mut cloud = ConflictCloud {
        link_radius: radius,
        tau,
        a_labels: sets.a_labels.clone(),
        b_labels: sets.b_labels.clone(),
        a_sample_size: sets.a.points.len(),
        b_sample_size: sets.b.points.len(),
        points: Vec::new(),
        residuals: Vec::new(),
        link_weights: Vec::new(),
        area_weights: Vec::new(),
        tangents: Vec::new(),
        draws: Vec::new(),
        total_draws: link.total_draws,
        link_samples: link.len(),
        delta_hat: None,
        seed,
        flowed: Vec::new(),
    };
    if tau == 0.0 {
        // an exact equality on finite samples is hit with probability zero
        return Ok(cloud);
    }
    for i in 0..link.len() {
        let p = link.points[i];
        let (g, grad) = sets.gap(&p);
        if g.abs() > tau {
            continue;
        }
        let Some((tangents, gnorm)) = bisector_frame(surface, &p, &grad) else { continue };
        cloud.points.push(p);
        cloud.residuals.push(link.residuals[i]);
        cloud.link_weights.push(link.weights[i]);
        cloud.area_weights.push(link.weights[i] * gnorm / (2.0 * tau));
        cloud.tangents.push(tangents);
        cloud.draws.push(link.draws[i]);
    }
    cloud.delta_hat = cloud.points.iter().map(|p| p.z.norm()).min_by(f64::total_cmp);
    Ok(cloud)
}

/// Flows every base point to each radius of `ladder` along its orbit.
pub fn flow_cone(surface: &WeightedSurface, cloud: &ConflictCloud, ladder: &[f64]) -> Result<ConflictCloud> {
    if ladder.windows(2).any(|w| w[1] >= w[0]) || ladder.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidArgument("flow ladder must be positive and decreasing".into()));
    }
    if ladder.first().is_some_and(|&r| r > cloud.link_radius * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument("flow ladder must start at or below the link radius".into()));
    }
    let mut out = cloud.clone();
    out.flowed = ladder
        .iter()
        .map(|&r| {
            let mut rung = FlowRung { radius: r, points: Vec::with_capacity(cloud.len()), params: Vec::with_capacity(cloud.len()) };
            for p in &cloud.points {
                let (q, t) = surface.flow_to_norm(p, r)?;
                rung.points.push(q);
                rung.params.push(t);
            }
            Ok(rung)
        })
        .collect::<Result<_>>()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub radii: Vec<f64>,
    /// Maximum over flowed points of `sqrt(|x|² + |y|²) / |p|` per rung.
    pub max_ratio: Vec<f64>,
    pub slope: f64,
    pub final_ratio: f64,
    pub collapsed: bool,
}

/// Minimum log-log slope for a collapse verdict.
pub const COLLAPSE_MIN_SLOPE: f64 = 0.5;
/// Maximum transverse ratio at the last rung for a collapse verdict.
pub const COLLAPSE_MAX_FINAL_RATIO: f64 = 0.1;

/// Whether the flowed cloud approaches the z-axis.
pub fn tangent_cone_collapse(cloud: &ConflictCloud) -> Result<CollapseReport> {
    if cloud.is_empty() {
        return Err(Error::Empty("conflict cloud has no points".into()));
    }
    if cloud.flowed.is_empty() {
        return Err(Error::InvalidArgument("flow the cloud before testing collapse".into()));
    }
    let ratio = |p: &ComplexPoint3| (p.x.norm_sqr() + p.y.norm_sqr()).sqrt() / p.norm();
    let radii: Vec<f64> = cloud.flowed.iter().map(|r| r.radius).collect();
    let max_ratio: Vec<f64> = cloud.flowed.iter().map(|r| r.points.iter().map(ratio).fold(0.0, f64::max)).collect();
    let slope = if radii.len() >= 2 {
        let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let y: Vec<f64> = max_ratio.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
        weighted_slope(&x, &y, &vec![1.0; x.len()]).map_or(0.0, |f| f.0)
    } else {
        0.0
    };
    let final_ratio = *max_ratio.last().expect("nonempty ladder");
    Ok(CollapseReport {
        radii,
        collapsed: slope >= COLLAPSE_MIN_SLOPE && final_ratio < COLLAPSE_MAX_FINAL_RATIO,
        max_ratio,
        slope,
        final_ratio,
    })
}

/// Geometric flow ladder from `top` down to `top * ratio` with `count` rungs.
pub fn geometric_ladder(top: f64, ratio: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![top];
    }
    (0..count).map(|i| top * ratio.powf(i as f64 / (count - 1) as f64)).collect()
}

/// Largest `|gap|` over the S¹-rotated copies `(λ^{w1} x, λ^{w2} y, λ^{w3} z)`
/// of every base point, for the given phases.
pub fn rotation_gap(surface: &WeightedSurface, cloud: &ConflictCloud, sets: &BranchSets, phases: &[f64]) -> f64 {
    let w = surface.weights();
    let mut worst: f64 = 0.0;
    for p in &cloud.points {
        for &theta in phases {
            let q = ComplexPoint3::new(
                p.x * Complex64::from_polar(1.0, theta * w[0] as f64),
                p.y * Complex64::from_polar(1.0, theta * w[1] as f64),
                p.z * Complex64::from_polar(1.0, theta * w[2] as f64),
            );
            worst = worst.max(sets.gap_value(&q).abs());
        }
    }
    worst
}
