use super::cone::{ConeOverBisector, LinearMap, DEFAULT_QUADRATURE_NODES};
use super::conflict::{
    branch_sets, conflict_set_with, default_partition, BranchSets, DEFAULT_SLICE_SAMPLES, DEFAULT_TAU_FACTOR,
};
use super::conflict::surface_normals;
use super::sides::{classify, Side};
use crate::error::{Error, Result};
use crate::geometry::{self, ComplexPoint3};
use crate::metric::{density_ladder, DensityReport, LadderOptions, Sampler, Verdict, DEFAULT_LADDER};
use crate::rng;
use crate::sampling::{sample_ball, PointCloud, RegionSpec};
use crate::surfaces::{slice_structure, WeightedSurface};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const CERTIFICATE_SCHEMA_VERSION: u32 = 1;
/// Default side tie tolerance relative to the link radius.
pub const DEFAULT_SIDE_TAU_FACTOR: f64 = 2e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateVerdict {
    SeparatingEvidence,
    NoEvidence,
    Inconclusive,
}

impl CertificateVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateVerdict::SeparatingEvidence => "separating-evidence",
            CertificateVerdict::NoEvidence => "no-evidence",
            CertificateVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Everything that determines a certificate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertificateParams {
    pub link_radius: f64,
    /// Bisector half-width as a fraction of the link radius.
    pub tau_factor: f64,
    /// Tie tolerance for the side classification, as a fraction of the link
    /// radius. Much thinner than the cone band because the source sets are
    /// close together and a wide band would swallow a slowly shrinking share
    /// of every ball.
    pub side_tau_factor: f64,
    pub slice_samples: usize,
    /// Defaults to the `x = 0` branch against the rest.
    pub a_labels: Option<Vec<usize>>,
    pub b_labels: Option<Vec<usize>>,
    pub ladder: Vec<f64>,
    /// Link draws per rung for the cone M.
    pub n_cone: usize,
    /// Ball draws per rung for the sides A and B.
    pub n_sides: usize,
    pub quadrature_nodes: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Optional ambient linear map applied to all sampled data.
    pub map: Option<LinearMap>,
}

impl Default for CertificateParams {
    fn default() -> Self {
        Self {
            link_radius: 0.1,
            tau_factor: DEFAULT_TAU_FACTOR,
            side_tau_factor: DEFAULT_SIDE_TAU_FACTOR,
            slice_samples: DEFAULT_SLICE_SAMPLES,
            a_labels: None,
            b_labels: None,
            ladder: DEFAULT_LADDER.to_vec(),
            n_cone: 20_000,
            n_sides: 20_000,
            quadrature_nodes: DEFAULT_QUADRATURE_NODES,
            threshold: 3.0,
            seed: 0,
            map: None,
        }
    }
}

impl CertificateParams {
    pub fn tau(&self) -> f64 {
        self.tau_factor * self.link_radius
    }

    pub fn side_tau(&self) -> f64 {
        self.side_tau_factor * self.link_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateSeeds {
    pub cone: u64,
    pub side_a: u64,
    pub side_b: u64,
    pub conflict: u64,
}

impl CertificateSeeds {
    pub fn from_master(seed: u64) -> Self {
        Self {
            cone: rng::derive_seed(seed, 0xC0E),
            side_a: rng::derive_seed(seed, 0xA),
            side_b: rng::derive_seed(seed, 0xB),
            conflict: rng::derive_seed(seed, 0xCF),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingCertificate {
    pub schema_version: u32,
    pub surface: String,
    pub component_count: usize,
    pub a_labels: Vec<usize>,
    pub b_labels: Vec<usize>,
    /// Minimum distance from the sampled conflict set to `{z = 0}`.
    pub delta_hat: Option<f64>,
    pub conflict_points: usize,
    pub bisector_area: Option<f64>,
    pub cone_report: Option<DensityReport>,
    pub side_a_report: Option<DensityReport>,
    pub side_b_report: Option<DensityReport>,
    pub verdict: CertificateVerdict,
    pub reason: String,
    /// Set when a sub-computation failed rather than returned a verdict.
    pub failure: Option<String>,
    pub params: CertificateParams,
    pub seeds: CertificateSeeds,
}

/// The certificate decision. Evidence requires a zero-density cone, two
/// positive-density sides and at least two slice components.
pub fn certificate_verdict(
    components: usize,
    cone: Option<Verdict>,
    side_a: Option<Verdict>,
    side_b: Option<Verdict>,
) -> CertificateVerdict {
    if components < 2 {
        return CertificateVerdict::NoEvidence;
    }
    match (cone, side_a, side_b) {
        (Some(Verdict::ZeroDensity), Some(Verdict::PositiveDensity), Some(Verdict::PositiveDensity)) => {
            CertificateVerdict::SeparatingEvidence
        }
        (Some(Verdict::PositiveDensity), _, _) | (_, Some(Verdict::ZeroDensity), _) | (_, _, Some(Verdict::ZeroDensity)) => {
            CertificateVerdict::NoEvidence
        }
        _ => CertificateVerdict::Inconclusive,
    }
}

/// The surface inside a ball, optionally pushed through a linear map.
struct ImageOfBall<'a> {
    surface: &'a WeightedSurface,
    map: Option<&'a LinearMap>,
}

impl Sampler for ImageOfBall<'_> {
    fn dimension(&self) -> usize {
        4
    }

    fn sample(&self, radius: f64, n: usize, seed: u64) -> Result<PointCloud> {
        let Some(map) = self.map else {
            return sample_ball(self.surface, radius, n, &RegionSpec::ball(radius), seed);
        };
        let reach = radius / map.sigma.0;
        let cloud = sample_ball(self.surface, reach, n, &RegionSpec::ball(reach), seed)?;
        let mut out = PointCloud::empty(4, RegionSpec::ball(radius), seed, cloud.total_draws);
        out.rejected_near_branch = cloud.rejected_near_branch;
        for i in 0..cloud.len() {
            let p = cloud.points[i];
            let normals = geometry::orthonormalize(&surface_normals(self.surface, &p), 1e-12);
            let tangent = geometry::complement_basis(&normals, 4);
            let factor = map.volume_factor(&tangent);
            out.push(map.apply(&p), cloud.weights[i] * factor, cloud.residuals[i], cloud.tags[i], cloud.draws[i]);
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        match self.map {
            Some(_) => format!("linear image of {}", self.surface.label()),
            None => self.surface.label().to_string(),
        }
    }
}

fn side_report(
    surface: &WeightedSurface,
    sets: &BranchSets,
    params: &CertificateParams,
    want: Side,
    seed: u64,
) -> Result<DensityReport> {
    let sampler = ImageOfBall { surface, map: params.map.as_ref() };
    let tau = params.side_tau();
    let map = params.map.as_ref();
    let pred = move |p: &ComplexPoint3| {
        let pre = map.map_or(*p, |m| m.apply_inverse(p));
        classify(surface, sets, tau, &pre) == want
    };
    let mut opts = LadderOptions::new(4, params.ladder.clone(), params.n_sides, seed);
    opts.threshold = params.threshold;
    let mut rep = density_ladder(&sampler, &pred, &opts)?;
    rep.label = format!("side {} of {}", if want == Side::A { "A" } else { "B" }, surface.label());
    Ok(rep)
}

/// Runs the whole construction and assembles the verdict.
pub fn separating_certificate(surface: &WeightedSurface, params: &CertificateParams) -> SeparatingCertificate {
    let seeds = CertificateSeeds::from_master(params.seed);
    let mut cert = SeparatingCertificate {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        surface: surface.label().to_string(),
        component_count: 0,
        a_labels: Vec::new(),
        b_labels: Vec::new(),
        delta_hat: None,
        conflict_points: 0,
        bisector_area: None,
        cone_report: None,
        side_a_report: None,
        side_b_report: None,
        verdict: CertificateVerdict::Inconclusive,
        reason: String::new(),
        failure: None,
        params: params.clone(),
        seeds,
    };
    let structure = match slice_structure(surface) {
        Ok(s) => s,
        Err(e) => {
            cert.reason = format!("slice analysis failed: {e}");
            cert.failure = Some(cert.reason.clone());
            return cert;
        }
    };
    cert.component_count = structure.component_count;
    let (default_a, default_b) = default_partition(&structure);
    cert.a_labels = params.a_labels.clone().unwrap_or(default_a);
    cert.b_labels = params.b_labels.clone().unwrap_or(default_b);
    let sets = match branch_sets(
        surface,
        &structure,
        params.link_radius,
        &cert.a_labels,
        &cert.b_labels,
        params.slice_samples,
    ) {
        Ok(s) => s,
        Err(e @ Error::NotApplicable(_)) => {
            cert.verdict = CertificateVerdict::NoEvidence;
            cert.reason = e.to_string();
            return cert;
        }
        Err(e) => {
            cert.reason = format!("branch sets: {e}");
            cert.failure = Some(cert.reason.clone());
            return cert;
        }
    };
    let tau = params.tau();
    let mut run = || -> Result<()> {
        let band = conflict_set_with(surface, &sets, params.n_cone, tau, seeds.conflict)?;
        cert.delta_hat = band.delta_hat;
        cert.conflict_points = band.len();
        cert.bisector_area = Some(band.bisector_area());
        if band.is_empty() {
            return Err(Error::Empty("no link sample fell in the bisector band".into()));
        }
        let mut cone = ConeOverBisector::with_nodes(surface, &sets, tau, params.quadrature_nodes);
        if let Some(m) = &params.map {
            cone = cone.with_map(m.clone());
        }
        let mut opts = LadderOptions::new(3, params.ladder.clone(), params.n_cone, seeds.cone);
        opts.threshold = params.threshold;
        let (m, (a, b)) = rayon::join(
            || density_ladder(&cone, &|_| true, &opts),
            || {
                rayon::join(
                    || side_report(surface, &sets, params, Side::A, seeds.side_a),
                    || side_report(surface, &sets, params, Side::B, seeds.side_b),
                )
            },
        );
        cert.cone_report = Some(m?);
        cert.side_a_report = Some(a?);
        cert.side_b_report = Some(b?);
        Ok(())
    };
    if let Err(e) = run() {
        cert.verdict = CertificateVerdict::Inconclusive;
        cert.reason = format!("sub-computation failed: {e}");
        cert.failure = Some(cert.reason.clone());
        return cert;
    }
    let v = |r: &Option<DensityReport>| r.as_ref().map(|r| r.verdict);
    cert.verdict = certificate_verdict(
        cert.component_count,
        v(&cert.cone_report),
        v(&cert.side_a_report),
        v(&cert.side_b_report),
    );
    cert.reason = format!(
        "cone M: {}, side A: {}, side B: {}",
        v(&cert.cone_report).map_or("missing", Verdict::as_str),
        v(&cert.side_a_report).map_or("missing", Verdict::as_str),
        v(&cert.side_b_report).map_or("missing", Verdict::as_str),
    );
    cert
}

impl SeparatingCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "surface: {}", self.surface);
        let _ = writeln!(s, "slice components: {}", self.component_count);
        let _ = writeln!(s, "A labels: {:?}  B labels: {:?}", self.a_labels, self.b_labels);
        if let Some(d) = self.delta_hat {
            let _ = writeln!(s, "delta_hat: {d:.6e}");
        }
        let _ = writeln!(s, "conflict points: {}", self.conflict_points);
        for (name, rep) in [("M", &self.cone_report), ("A", &self.side_a_report), ("B", &self.side_b_report)] {
            if let Some(r) = rep {
                let _ = writeln!(
                    s,
                    "{name} (k={}): alpha {} +- {}, theta* {:.4e} +- {:.1e}, {}",
                    r.dimension,
                    r.alpha.map_or("n/a".into(), |a| format!("{a:.4}")),
                    r.alpha_se.map_or("n/a".into(), |a| format!("{a:.4}")),
                    r.theta_star,
                    r.theta_star_se,
                    r.verdict.as_str()
                );
            }
        }
        let _ = writeln!(s, "verdict: {}", self.verdict.as_str());
        let _ = writeln!(s, "reason: {}", self.reason);
        s
    }
}
