use crate::error::{Error, Result};
use crate::geometry::{self, ComplexPoint3};
use serde::{Deserialize, Serialize};

/// Shape of a sampling region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    /// `||p| - radius| <= 1e-8 radius`.
    LinkSphere,
    /// `ε|y| <= |z| <= |y|/ε`.
    Wedge,
    /// `|z| <= ε|y|` or `|y| <= ε|z|`.
    ThinWedge,
    /// `|p| <= radius`.
    Ball,
    /// `z = 0`.
    SliceZ0,
    /// `<n, p> >= c` with `params = [n_0, .., n_5, c]` in real coordinates.
    HalfSpace,
    /// Named predicate; see [`CUSTOM_ORTHANT`].
    Custom(u32),
}

/// Custom predicate: every real coordinate whose index is listed in
/// `params` is non-negative.
pub const CUSTOM_ORTHANT: u32 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub radius: f64,
    /// Wedge parameter ε, in `(0, 1]`.
    pub wedge_eps: f64,
    pub params: Vec<f64>,
}

impl RegionSpec {
    pub fn new(kind: RegionKind, radius: f64, wedge_eps: f64, params: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("region radius must be positive, got {radius}")));
        }
        if !(wedge_eps > 0.0 && wedge_eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("wedge parameter must lie in (0, 1], got {wedge_eps}")));
        }
        match kind {
            RegionKind::HalfSpace if params.len() != 7 => {
                return Err(Error::InvalidArgument("half-space needs 6 normal components and an offset".into()))
            }
            RegionKind::Custom(CUSTOM_ORTHANT) => {
                if params.iter().any(|&i| !(0.0..6.0).contains(&i) || i.fract() != 0.0) {
                    return Err(Error::InvalidArgument("orthant indices must be integers in 0..6".into()));
                }
            }
            RegionKind::Custom(id) => return Err(Error::InvalidArgument(format!("unknown custom predicate {id}"))),
            _ => {}
        }
        Ok(Self { kind, radius, wedge_eps, params })
    }

    pub fn ball(radius: f64) -> Self {
        Self::new(RegionKind::Ball, radius, 1.0, Vec::new()).expect("valid ball")
    }

    pub fn link_sphere(radius: f64) -> Self {
        Self::new(RegionKind::LinkSphere, radius, 1.0, Vec::new()).expect("valid sphere")
    }

    pub fn wedge(radius: f64, eps: f64) -> Result<Self> {
        Self::new(RegionKind::Wedge, radius, eps, Vec::new())
    }

    pub fn thin_wedge(radius: f64, eps: f64) -> Result<Self> {
        Self::new(RegionKind::ThinWedge, radius, eps, Vec::new())
    }

    pub fn half_space(radius: f64, normal: [f64; 6], offset: f64) -> Result<Self> {
        let mut params = normal.to_vec();
        params.push(offset);
        Self::new(RegionKind::HalfSpace, radius, 1.0, params)
    }

    pub fn orthant(radius: f64, axes: &[usize]) -> Result<Self> {
        Self::new(RegionKind::Custom(CUSTOM_ORTHANT), radius, 1.0, axes.iter().map(|&a| a as f64).collect())
    }

    pub fn contains(&self, p: &ComplexPoint3) -> bool {
        in_region(p, self)
    }
}

/// Exact evaluation of the region predicate.
pub fn in_region(p: &ComplexPoint3, region: &RegionSpec) -> bool {
    let eps = region.wedge_eps;
    let (ay, az) = (p.y.norm(), p.z.norm());
    match region.kind {
        RegionKind::LinkSphere => (p.norm() - region.radius).abs() <= 1e-8 * region.radius,
        RegionKind::Wedge => eps * ay <= az && az <= ay / eps,
        RegionKind::ThinWedge => az <= eps * ay || ay <= eps * az,
        RegionKind::Ball => p.norm() <= region.radius,
        RegionKind::SliceZ0 => p.z.re == 0.0 && p.z.im == 0.0,
        RegionKind::HalfSpace => {
            let mut n = [0.0; 6];
            n.copy_from_slice(&region.params[..6]);
            geometry::dot(&n, &p.to_real()) >= region.params[6]
        }
        RegionKind::Custom(_) => {
            let v = p.to_real();
            region.params.iter().all(|&i| v[i as usize] >= 0.0)
        }
    }
}
