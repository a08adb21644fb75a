use super::conflict::{conflict_set_with, BranchSets};
use crate::error::{Error, Result};
use crate::geometry::{self, ComplexPoint3, Vec6};
use crate::metric::Sampler;
use crate::sampling::{PointCloud, RegionSpec};
use crate::surfaces::WeightedSurface;
use gauss_quad::GaussLegendre;
use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};
use std::num::NonZeroUsize;

/// Gauss-Legendre nodes used along each orbit.
pub const DEFAULT_QUADRATURE_NODES: usize = 24;

/// An invertible real-linear map of C³ = R⁶, used as a bi-Lipschitz test map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub matrix: [[f64; 6]; 6],
    inverse: [[f64; 6]; 6],
    /// Smallest and largest singular values.
    pub sigma: (f64, f64),
}

impl LinearMap {
    pub fn new(matrix: [[f64; 6]; 6]) -> Result<Self> {
        let m = Matrix6::from_fn(|i, j| matrix[i][j]);
        let inv = m.try_inverse().ok_or_else(|| Error::InvalidArgument("linear map is singular".into()))?;
        let sv = m.singular_values();
        let sigma = (sv.min(), sv.max());
        if !(sigma.0 > 1e-12 * sigma.1) {
            return Err(Error::InvalidArgument("linear map is numerically singular".into()));
        }
        Ok(Self { matrix, inverse: std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])), sigma })
    }

    pub fn identity() -> Self {
        Self::new(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))).unwrap()
    }

    pub fn apply_vec(&self, v: &Vec6) -> Vec6 {
        std::array::from_fn(|i| geometry::dot(&self.matrix[i], v))
    }

    pub fn apply(&self, p: &ComplexPoint3) -> ComplexPoint3 {
        ComplexPoint3::from_real(&self.apply_vec(&p.to_real()))
    }

    pub fn apply_inverse(&self, p: &ComplexPoint3) -> ComplexPoint3 {
        let v = p.to_real();
        ComplexPoint3::from_real(&std::array::from_fn(|i| geometry::dot(&self.inverse[i], &v)))
    }

    /// Ratio of the k-volumes spanned by the images and by the vectors.
    pub fn volume_factor(&self, vectors: &[Vec6]) -> f64 {
        let images: Vec<Vec6> = vectors.iter().map(|v| self.apply_vec(v)).collect();
        geometry::span_volume(&images) / geometry::span_volume(vectors)
    }
}

/// The cone `M = C* M̃ ∪ {0}` over the conflict set, as a 3-dimensional
/// sampler. Each draw samples the link and keeps bisector points; the cone
/// measure inside a ball is integrated along every orbit by quadrature.
pub struct ConeOverBisector<'a> {
    pub surface: &'a WeightedSurface,
    pub sets: &'a BranchSets,
    pub tau: f64,
    nodes: Vec<(f64, f64)>,
    pub map: Option<LinearMap>,
}

impl<'a> ConeOverBisector<'a> {
    pub fn new(surface: &'a WeightedSurface, sets: &'a BranchSets, tau: f64) -> Self {
        Self::with_nodes(surface, sets, tau, DEFAULT_QUADRATURE_NODES)
    }

    pub fn with_nodes(surface: &'a WeightedSurface, sets: &'a BranchSets, tau: f64, nodes: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(nodes.max(2)).unwrap());
        let nodes = rule.as_node_weight_pairs().to_vec();
        Self { surface, sets, tau, nodes, map: None }
    }

    /// Reports the image of the cone under `map` instead of the cone itself.
    pub fn with_map(mut self, map: LinearMap) -> Self {
        self.map = Some(map);
        self
    }
}

/// `T(p, s)`, `D_pT` applied to `t`, and `∂_s T`.
fn orbit_point(a: &[f64; 3], p: &ComplexPoint3, s: f64) -> ComplexPoint3 {
    let c = p.coords();
    ComplexPoint3::from_coords(std::array::from_fn(|k| c[k] * s.powf(a[k])))
}

fn push_tangent(a: &[f64; 3], t: &Vec6, s: f64) -> Vec6 {
    std::array::from_fn(|k| t[k] * s.powf(a[k / 2]))
}

fn orbit_velocity(a: &[f64; 3], p: &ComplexPoint3, s: f64) -> Vec6 {
    let c = p.coords();
    geometry::complex_to_real(std::array::from_fn(|k| c[k] * (a[k] * s.powf(a[k] - 1.0))))
}

impl Sampler for ConeOverBisector<'_> {
    fn dimension(&self) -> usize {
        3
    }

    fn sample(&self, radius: f64, n: usize, seed: u64) -> Result<PointCloud> {
        let reach = match &self.map {
            Some(m) => radius / m.sigma.0,
            None => radius,
        };
        let band = conflict_set_with(self.surface, self.sets, n, self.tau, seed)?;
        let a = self.surface.flow_exponents();
        let mut cloud = PointCloud::empty(3, RegionSpec::ball(radius), seed, band.total_draws);
        cloud.rejected_near_branch = 0;
        for i in 0..band.len() {
            let p = band.points[i];
            let (_, s_top) = self.surface.flow_to_norm(&p, reach)?;
            let [t1, t2] = band.tangents[i];
            for (j, &(x, w)) in self.nodes.iter().enumerate() {
                let s = 0.5 * s_top * (x + 1.0);
                let frame = [push_tangent(&a, &t1, s), push_tangent(&a, &t2, s), orbit_velocity(&a, &p, s)];
                let mut jac = geometry::span_volume(&frame);
                let mut q = orbit_point(&a, &p, s);
                let residual = self.surface.evaluate(&q).norm();
                if let Some(m) = &self.map {
                    jac *= m.volume_factor(&frame);
                    q = m.apply(&q);
                }
                cloud.push(q, band.area_weights[i] * 0.5 * s_top * w * jac, residual, j as i64, band.draws[i]);
            }
        }
        Ok(cloud)
    }

    fn describe(&self) -> String {
        format!("cone over the conflict set of {} (tau {})", self.surface.label(), self.tau)
    }
}
