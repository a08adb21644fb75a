//! Experiment configuration files.
//!
//! Configs are TOML. Top-level keys set the experiment and seed, each
//! `[[surface]]` table names one surface, and the table named after the
//! experiment (with `-` spelled `_`) holds its numeric parameters. Every
//! parameter has a default, so a config can be as short as
//!
//! ```toml
//! experiment = "slice-components"
//! [[surface]]
//! name = "briancon-speder"
//! t = 1.0
//! ```

use serde::{Deserialize, Serialize};
use singlab_core::covering::{DEFAULT_LOOP_STEPS, MIN_LIPSCHITZ_SAMPLES};
use singlab_core::metric::DEFAULT_LADDER;
use singlab_core::separating::{
    DEFAULT_QUADRATURE_NODES, DEFAULT_SIDE_TAU_FACTOR, DEFAULT_SLICE_SAMPLES, DEFAULT_TAU_FACTOR,
};
use singlab_core::surfaces::parse_surface;
use singlab_core::{briancon_speder, brieskorn, Complex64, WeightedSurface};
use std::fmt;
use std::path::{Path, PathBuf};

/// The experiments the runner knows, in the order they are documented.
pub const EXPERIMENTS: [&str; 9] = [
    "mu-constancy",
    "slice-components",
    "separating",
    "tangent-cone",
    "thin-wedge",
    "monodromy",
    "lipschitz-bounds",
    "conicality",
    "density-anchors",
];

/// Smallest accepted sample counts.
pub const MIN_CERTIFICATE_SAMPLES: usize = 1000;
pub const MIN_CONFLICT_SAMPLES: usize = 100;
pub const MIN_THIN_WEDGE_SAMPLES: usize = 1000;
pub const MIN_CONICALITY_SAMPLES: usize = 500;
pub const MIN_DENSITY_SAMPLES: usize = 500;
pub const MIN_SLICE_SAMPLES: usize = 100;
pub const MIN_LOOP_STEPS: usize = 16;

/// A real or complex number: `1.5`, `2` or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Int(i64),
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Int(v) => Complex64::new(v as f64, 0.0),
            ComplexValue::Real(v) => Complex64::new(v, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

/// One `[[surface]]` table: a built-in family or a surface file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    /// `briancon-speder` or `brieskorn`.
    pub name: Option<String>,
    /// Parameter of the Briançon–Speder family.
    pub t: Option<ComplexValue>,
    /// Exponents `[p, q, r]` of a Brieskorn surface.
    pub exponents: Option<[u32; 3]>,
    /// Surface file, relative to the config file.
    pub file: Option<PathBuf>,
}

impl SurfaceSpec {
    pub fn resolve(&self, base_dir: &Path) -> Result<WeightedSurface, String> {
        match (&self.name, &self.file) {
            (Some(_), Some(_)) => Err("a surface takes either `name` or `file`, not both".into()),
            (None, None) => Err("a surface needs `name` or `file`".into()),
            (None, Some(file)) => {
                let path = base_dir.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                parse_surface(&text).map_err(|e| format!("{}: {e}", path.display()))
            }
            (Some(name), None) => match name.as_str() {
                "briancon-speder" => {
                    let t = self.t.ok_or("briancon-speder needs `t`")?;
                    if self.exponents.is_some() {
                        return Err("briancon-speder takes no `exponents`".into());
                    }
                    Ok(briancon_speder(t.value()))
                }
                "brieskorn" => {
                    let [p, q, r] = self.exponents.ok_or("brieskorn needs `exponents = [p, q, r]`")?;
                    if self.t.is_some() {
                        return Err("brieskorn takes no `t`".into());
                    }
                    brieskorn(p, q, r).map_err(|e| e.to_string())
                }
                other => Err(format!("unknown surface `{other}` (expected briancon-speder or brieskorn)")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparatingSection {
    pub link_radius: f64,
    pub tau_factor: f64,
    pub side_tau_factor: f64,
    pub slice_samples: usize,
    pub a_labels: Option<Vec<usize>>,
    pub b_labels: Option<Vec<usize>>,
    /// Run one certificate per bipartition of the slice components.
    pub all_bipartitions: bool,
    pub ladder: Vec<f64>,
    pub n_cone: usize,
    pub n_sides: usize,
    pub quadrature_nodes: usize,
    pub threshold: f64,
}

impl Default for SeparatingSection {
    fn default() -> Self {
        Self {
            link_radius: 0.1,
            tau_factor: DEFAULT_TAU_FACTOR,
            side_tau_factor: DEFAULT_SIDE_TAU_FACTOR,
            slice_samples: DEFAULT_SLICE_SAMPLES,
            a_labels: None,
            b_labels: None,
            all_bipartitions: false,
            ladder: DEFAULT_LADDER.to_vec(),
            n_cone: 20_000,
            n_sides: 20_000,
            quadrature_nodes: DEFAULT_QUADRATURE_NODES,
            threshold: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TangentConeSection {
    pub link_radius: f64,
    pub tau_factor: f64,
    pub slice_samples: usize,
    pub a_labels: Option<Vec<usize>>,
    pub b_labels: Option<Vec<usize>>,
    pub n: usize,
    /// The flow ladder runs from the link radius down to `final_ratio` times it.
    pub final_ratio: f64,
    pub rungs: usize,
}

impl Default for TangentConeSection {
    fn default() -> Self {
        Self {
            link_radius: 0.1,
            tau_factor: DEFAULT_TAU_FACTOR,
            slice_samples: DEFAULT_SLICE_SAMPLES,
            a_labels: None,
            b_labels: None,
            n: 5000,
            final_ratio: 1e-3,
            rungs: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThinWedgeSection {
    pub eps_ladder: Vec<f64>,
    pub r_ladder: Vec<f64>,
    pub n: usize,
    /// Accepted distance of each fitted r-exponent from 4.
    pub slope_tolerance: f64,
    /// Largest accepted `max K / min K` across ε_w at a fixed radius.
    pub eps_factor: f64,
    /// Largest accepted `max K / min K` over the whole grid.
    pub k_spread: f64,
}

impl Default for ThinWedgeSection {
    fn default() -> Self {
        Self {
            eps_ladder: vec![0.2, 0.1, 0.05],
            r_ladder: vec![0.1, 0.05, 0.025, 0.0125],
            n: 20_000,
            slope_tolerance: 0.3,
            eps_factor: 2.0,
            k_spread: singlab_core::separating::THIN_WEDGE_MAX_SPREAD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopShape {
    CircleInY,
    CircleInZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub shape: LoopShape,
    pub c: f64,
    #[serde(default = "one")]
    pub turns: i32,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn one() -> i32 {
    1
}

fn default_steps() -> usize {
    DEFAULT_LOOP_STEPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonodromySection {
    #[serde(rename = "loop")]
    pub loops: Vec<LoopConfig>,
    /// Loops must lie in `C^ε ∩ D` for this ε when set.
    pub region_eps: Option<f64>,
    /// Relative tolerance of the closed-form winding check.
    pub anchor_tolerance: f64,
    pub record_trajectory: bool,
}

impl Default for MonodromySection {
    fn default() -> Self {
        Self {
            loops: vec![LoopConfig { shape: LoopShape::CircleInY, c: 0.01, turns: 1, steps: DEFAULT_LOOP_STEPS }],
            region_eps: Some(0.1),
            anchor_tolerance: 1e-6,
            record_trajectory: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzSection {
    pub eps_w: f64,
    /// Radius of the 4-disk `D`; defaults to `eps_w / 2`.
    pub disk_radius: Option<f64>,
    pub n: usize,
}

impl Default for LipschitzSection {
    fn default() -> Self {
        Self { eps_w: 0.1, disk_radius: None, n: MIN_LIPSCHITZ_SAMPLES }
    }
}

impl LipschitzSection {
    pub fn disk(&self) -> f64 {
        self.disk_radius.unwrap_or(self.eps_w / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConicalitySection {
    pub eps_w: f64,
    pub r_ladder: Vec<f64>,
    pub n: usize,
    /// Largest accepted `max / min` of the mean inner distance over r.
    pub scale_spread: f64,
    /// Accepted distance of each rung's median ratio from 1.
    pub median_tolerance: f64,
}

impl Default for ConicalitySection {
    fn default() -> Self {
        Self { eps_w: 0.1, r_ladder: vec![0.1, 0.05, 0.025, 0.0125], n: 1500, scale_spread: 1.15, median_tolerance: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityAnchorsSection {
    pub ladder: Vec<f64>,
    pub n: usize,
    pub n_comparability: usize,
    /// Accepted comparability interval for flat data.
    pub comparability: [f64; 2],
    pub threshold: f64,
}

impl Default for DensityAnchorsSection {
    fn default() -> Self {
        Self { ladder: DEFAULT_LADDER.to_vec(), n: 4000, n_comparability: 3000, comparability: [0.8, 1.25], threshold: 3.0 }
    }
}

/// A parsed config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(rename = "surface")]
    pub surfaces: Vec<SurfaceSpec>,
    pub separating: SeparatingSection,
    pub tangent_cone: TangentConeSection,
    pub thin_wedge: ThinWedgeSection,
    pub monodromy: MonodromySection,
    pub lipschitz_bounds: LipschitzSection,
    pub conicality: ConicalitySection,
    pub density_anchors: DensityAnchorsSection,
}

/// A config syntax error with a 1-based position.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
            ParseError { line, column, message: e.message().trim().to_string() }
        })
    }
}

fn check_ladder(diags: &mut Vec<String>, name: &str, ladder: &[f64]) {
    if ladder.is_empty() {
        diags.push(format!("{name}: ladder must not be empty"));
    } else if ladder.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        diags.push(format!("{name}: ladder must be positive"));
    } else if ladder.windows(2).any(|w| w[1] >= w[0]) {
        diags.push(format!("{name}: ladder must be decreasing"));
    }
}

fn check_count(diags: &mut Vec<String>, name: &str, value: usize, min: usize) {
    if value < min {
        diags.push(format!("{name}: {value} is below the minimum of {min}"));
    }
}

fn check_positive(diags: &mut Vec<String>, name: &str, value: f64) {
    if !(value > 0.0 && value.is_finite()) {
        diags.push(format!("{name}: must be positive, got {value}"));
    }
}

fn check_fraction(diags: &mut Vec<String>, name: &str, value: f64) {
    if !(value > 0.0 && value <= 1.0) {
        diags.push(format!("{name}: must lie in (0, 1], got {value}"));
    }
}

fn check_labels(diags: &mut Vec<String>, section: &str, a: &Option<Vec<usize>>, b: &Option<Vec<usize>>) {
    if a.is_some() != b.is_some() {
        diags.push(format!("{section}: a_labels and b_labels must be given together"));
    }
}

/// Every problem with `config` for `experiment`, without running anything.
/// Surface files are read relative to `base_dir`.
pub fn validate(config: &ExperimentConfig, experiment: &str, base_dir: &Path) -> Vec<String> {
    let mut d = Vec::new();
    if !EXPERIMENTS.contains(&experiment) {
        d.push(format!("unknown experiment `{experiment}` (expected one of {})", EXPERIMENTS.join(", ")));
        return d;
    }
    if let Some(named) = &config.experiment {
        if named != experiment {
            d.push(format!("config is for `{named}` but `{experiment}` was requested"));
        }
    }
    match experiment {
        "density-anchors" => {
            if !config.surfaces.is_empty() {
                d.push("density-anchors runs on flat test data and takes no surface".into());
            }
        }
        "monodromy" | "lipschitz-bounds" | "conicality" => match config.surfaces.len() {
            0 => d.push("missing surface: add a [[surface]] table".into()),
            1 => {}
            k => d.push(format!("{experiment} takes exactly one surface, got {k}")),
        },
        _ => {
            if config.surfaces.is_empty() {
                d.push("missing surface: add a [[surface]] table".into());
            }
        }
    }
    for (i, s) in config.surfaces.iter().enumerate() {
        if let Err(e) = s.resolve(base_dir) {
            d.push(format!("surface {}: {e}", i + 1));
        }
    }
    match experiment {
        "separating" => {
            let s = &config.separating;
            check_positive(&mut d, "separating.link_radius", s.link_radius);
            check_positive(&mut d, "separating.tau_factor", s.tau_factor);
            check_positive(&mut d, "separating.side_tau_factor", s.side_tau_factor);
            check_positive(&mut d, "separating.threshold", s.threshold);
            check_ladder(&mut d, "separating.ladder", &s.ladder);
            check_count(&mut d, "separating.n_cone", s.n_cone, MIN_CERTIFICATE_SAMPLES);
            check_count(&mut d, "separating.n_sides", s.n_sides, MIN_CERTIFICATE_SAMPLES);
            check_count(&mut d, "separating.slice_samples", s.slice_samples, MIN_SLICE_SAMPLES);
            check_count(&mut d, "separating.quadrature_nodes", s.quadrature_nodes, 2);
            check_labels(&mut d, "separating", &s.a_labels, &s.b_labels);
            if s.all_bipartitions && s.a_labels.is_some() {
                d.push("separating: all_bipartitions conflicts with explicit labels".into());
            }
        }
        "tangent-cone" => {
            let s = &config.tangent_cone;
            check_positive(&mut d, "tangent_cone.link_radius", s.link_radius);
            check_positive(&mut d, "tangent_cone.tau_factor", s.tau_factor);
            check_fraction(&mut d, "tangent_cone.final_ratio", s.final_ratio);
            check_count(&mut d, "tangent_cone.n", s.n, MIN_CONFLICT_SAMPLES);
            check_count(&mut d, "tangent_cone.rungs", s.rungs, 2);
            check_count(&mut d, "tangent_cone.slice_samples", s.slice_samples, MIN_SLICE_SAMPLES);
            check_labels(&mut d, "tangent_cone", &s.a_labels, &s.b_labels);
            if s.final_ratio >= 1.0 {
                d.push("tangent_cone.final_ratio: ladder must be decreasing".into());
            }
        }
        "thin-wedge" => {
            let s = &config.thin_wedge;
            check_ladder(&mut d, "thin_wedge.eps_ladder", &s.eps_ladder);
            check_ladder(&mut d, "thin_wedge.r_ladder", &s.r_ladder);
            if s.eps_ladder.iter().any(|&e| e > 1.0) {
                d.push("thin_wedge.eps_ladder: values must not exceed 1".into());
            }
            check_count(&mut d, "thin_wedge.n", s.n, MIN_THIN_WEDGE_SAMPLES);
            check_positive(&mut d, "thin_wedge.slope_tolerance", s.slope_tolerance);
            check_positive(&mut d, "thin_wedge.eps_factor", s.eps_factor);
            check_positive(&mut d, "thin_wedge.k_spread", s.k_spread);
        }
        "monodromy" => {
            let s = &config.monodromy;
            if s.loops.is_empty() {
                d.push("monodromy: at least one [[monodromy.loop]] is required".into());
            }
            for (i, l) in s.loops.iter().enumerate() {
                check_positive(&mut d, &format!("monodromy.loop {}: c", i + 1), l.c);
                check_count(&mut d, &format!("monodromy.loop {}: steps", i + 1), l.steps, MIN_LOOP_STEPS);
                if l.turns == 0 {
                    d.push(format!("monodromy.loop {}: turns must be nonzero", i + 1));
                }
            }
            if let Some(e) = s.region_eps {
                check_fraction(&mut d, "monodromy.region_eps", e);
            }
            check_positive(&mut d, "monodromy.anchor_tolerance", s.anchor_tolerance);
        }
        "lipschitz-bounds" => {
            let s = &config.lipschitz_bounds;
            check_fraction(&mut d, "lipschitz_bounds.eps_w", s.eps_w);
            check_count(&mut d, "lipschitz_bounds.n", s.n, MIN_LIPSCHITZ_SAMPLES);
            if !(s.disk() > 0.0 && s.disk() < s.eps_w) {
                d.push(format!("lipschitz_bounds.disk_radius: must lie in (0, eps_w), got {}", s.disk()));
            }
        }
        "conicality" => {
            let s = &config.conicality;
            check_fraction(&mut d, "conicality.eps_w", s.eps_w);
            check_ladder(&mut d, "conicality.r_ladder", &s.r_ladder);
            check_count(&mut d, "conicality.n", s.n, MIN_CONICALITY_SAMPLES);
            check_positive(&mut d, "conicality.scale_spread", s.scale_spread);
            check_positive(&mut d, "conicality.median_tolerance", s.median_tolerance);
        }
        "density-anchors" => {
            let s = &config.density_anchors;
            check_ladder(&mut d, "density_anchors.ladder", &s.ladder);
            check_count(&mut d, "density_anchors.n", s.n, MIN_DENSITY_SAMPLES);
            check_count(&mut d, "density_anchors.n_comparability", s.n_comparability, MIN_DENSITY_SAMPLES);
            check_positive(&mut d, "density_anchors.threshold", s.threshold);
            let [lo, hi] = s.comparability;
            if !(lo > 0.0 && lo <= 1.0 && hi >= 1.0) {
                d.push(format!("density_anchors.comparability: need 0 < lo <= 1 <= hi, got [{lo}, {hi}]"));
            }
        }
        _ => {}
    }
    d
}
