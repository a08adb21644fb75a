use crate::continuation::{track_roots, TrackOptions, MAX_HALVINGS};
use crate::error::{Error, Result};
use crate::surfaces::WeightedSurface;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

/// Default number of parameter steps along a loop.
pub const DEFAULT_LOOP_STEPS: usize = 2048;

/// Distance-like proxy for how far `(y, z)` is from the branch locus of the
/// projection `(x, y, z) ↦ (y, z)`.
///
/// For `x⁵ + z¹⁵ + y⁷z` the locus is `z (z¹⁴ + y⁷) = 0`, the y-axis and the
/// seven curves `y = ζ z²` with `ζ⁷ = -1`. Other surfaces fall back to the
/// smallest root separation of the fiber.
pub fn branch_locus_distance(surface: &WeightedSurface, y: Complex64, z: Complex64) -> f64 {
    if surface.is_briancon_speder_zero() {
        let z2 = z * z;
        let curves = (0..7)
            .map(|k| (y - Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / 7.0) * z2).norm())
            .fold(f64::INFINITY, f64::min);
        return z.norm().min(curves);
    }
    match surface.solve_fiber(y, z) {
        Ok(roots) if roots.distinct().len() == roots.degree() => roots.min_separation(),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LoopKind {
    /// `t ↦ (c e^{2πit}, c)`.
    CircleInY { c: f64 },
    /// `t ↦ (c, c e^{2πit})`.
    CircleInZ { c: f64 },
    Constant { y: [f64; 2], z: [f64; 2] },
}

/// A closed curve in the `(y, z)` base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub kind: LoopKind,
    /// Signed number of traversals; negative runs the loop backwards.
    pub turns: i32,
    pub steps: usize,
    /// Minimum allowed branch-locus distance along the loop.
    pub margin: f64,
}

impl LoopSpec {
    pub fn new(kind: LoopKind) -> Self {
        Self { kind, turns: 1, steps: DEFAULT_LOOP_STEPS, margin: 1e-9 }
    }

    pub fn circle_in_y(c: f64) -> Self {
        Self::new(LoopKind::CircleInY { c })
    }

    pub fn circle_in_z(c: f64) -> Self {
        Self::new(LoopKind::CircleInZ { c })
    }

    pub fn constant(y: Complex64, z: Complex64) -> Self {
        Self::new(LoopKind::Constant { y: [y.re, y.im], z: [z.re, z.im] })
    }

    pub fn reversed(&self) -> Self {
        Self { turns: -self.turns, ..self.clone() }
    }

    pub fn with_turns(mut self, turns: i32) -> Self {
        self.turns = turns;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    /// Base point at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: f64) -> (Complex64, Complex64) {
        let w = Complex64::from_polar(1.0, TAU * self.turns as f64 * t);
        match self.kind {
            LoopKind::CircleInY { c } => (w * c, Complex64::new(c, 0.0)),
            LoopKind::CircleInZ { c } => (Complex64::new(c, 0.0), w * c),
            LoopKind::Constant { y, z } => (Complex64::new(y[0], y[1]), Complex64::new(z[0], z[1])),
        }
    }

    /// Samples along the loop; the first and last coincide.
    pub fn samples(&self) -> Vec<(Complex64, Complex64)> {
        let m = self.steps.max(1) * self.turns.unsigned_abs().max(1) as usize;
        (0..=m).map(|i| self.point(i as f64 / m as f64)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("a loop needs at least one step".into()));
        }
        match self.kind {
            LoopKind::CircleInY { c } | LoopKind::CircleInZ { c } if !(c > 0.0 && c.is_finite()) => {
                Err(Error::InvalidArgument(format!("loop constant must be positive, got {c}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub surface: String,
    pub loop_spec: LoopSpec,
    pub sheet_count: usize,
    /// Roots at the base point, sorted by argument.
    pub base_roots: Vec<[f64; 2]>,
    /// `permutation[i]` is the index reached from sheet `i`.
    pub permutation: Vec<usize>,
    pub start_index: usize,
    pub end_index: usize,
    pub start_root: [f64; 2],
    pub end_root: [f64; 2],
    /// Accumulated argument change of the tracked root (radians).
    pub phase: f64,
    pub phases: Vec<f64>,
    pub steps_taken: usize,
    pub trajectory: Option<Vec<(f64, Vec<[f64; 2]>)>>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl MonodromyResult {
    pub fn start(&self) -> Complex64 {
        Complex64::new(self.start_root[0], self.start_root[1])
    }

    pub fn end(&self) -> Complex64 {
        Complex64::new(self.end_root[0], self.end_root[1])
    }

    /// `end_index - start_index` modulo the sheet count.
    pub fn sheet_shift(&self) -> usize {
        (self.end_index + self.sheet_count - self.start_index) % self.sheet_count.max(1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("monodromy result serialises")
    }

    /// Recorded root trajectories, one row per accepted step.
    pub fn trajectory_csv(&self) -> Option<String> {
        let traj = self.trajectory.as_ref()?;
        let mut s = String::from("t");
        for i in 0..self.sheet_count {
            let _ = write!(s, ",re_{i},im_{i}");
        }
        s.push('\n');
        for (t, roots) in traj {
            let _ = write!(s, "{t}");
            for r in roots {
                let _ = write!(s, ",{:.15e},{:.15e}", r[0], r[1]);
            }
            s.push('\n');
        }
        Some(s)
    }
}

/// Lifts `loop_spec` through the projection and reports the sheet permutation.
pub fn lift_loop(
    surface: &WeightedSurface,
    loop_spec: &LoopSpec,
    start_index: usize,
    record: bool,
) -> Result<MonodromyResult> {
    loop_spec.validate()?;
    let samples = loop_spec.samples();
    let closest = samples
        .iter()
        .map(|&(y, z)| branch_locus_distance(surface, y, z))
        .fold(f64::INFINITY, f64::min);
    if !(closest > loop_spec.margin) {
        return Err(Error::InvalidArgument(format!(
            "loop comes within {closest:e} of the branch locus (margin {:e})",
            loop_spec.margin
        )));
    }
    let (y0, z0) = loop_spec.point(0.0);
    let degree = surface.x_degree() as usize;
    let base = surface.solve_fiber(y0, z0)?;
    if base.distinct().len() != degree {
        return Err(Error::InvalidArgument("fiber over the base point has repeated roots".into()));
    }
    if start_index >= degree {
        return Err(Error::InvalidArgument(format!("start index {start_index} out of range 0..{degree}")));
    }
    let steps = loop_spec.steps * loop_spec.turns.unsigned_abs().max(1) as usize;
    let track = track_roots(
        |t| {
            let (y, z) = loop_spec.point(t);
            surface.x_polynomial(y, z)
        },
        &TrackOptions { steps, max_halvings: MAX_HALVINGS, record },
    )?;
    let permutation = track.closing_permutation()?;
    let end_index = permutation[start_index];
    Ok(MonodromyResult {
        surface: surface.label().to_string(),
        loop_spec: loop_spec.clone(),
        sheet_count: degree,
        base_roots: track.start.iter().copied().map(pair).collect(),
        start_index,
        end_index,
        start_root: pair(track.start[start_index]),
        end_root: pair(track.end[start_index]),
        phase: track.phase[start_index],
        phases: track.phase.clone(),
        permutation,
        steps_taken: track.steps_taken,
        trajectory: record.then(|| {
            track.trajectory.iter().map(|(t, r)| (*t, r.iter().copied().map(pair).collect())).collect()
        }),
    })
}

/// Index of the base root closest to `target`.
pub fn nearest_root_index(result: &MonodromyResult, target: Complex64) -> usize {
    result
        .base_roots
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (Complex64::new(a.1[0], a.1[1]) - target).norm();
            let db = (Complex64::new(b.1[0], b.1[1]) - target).norm();
            da.total_cmp(&db)
        })
        .map_or(0, |(i, _)| i)
}

pub type Permutation = Vec<usize>;

/// `(a ∘ b)(i) = a(b(i))`.
pub fn compose(a: &[usize], b: &[usize]) -> Permutation {
    b.iter().map(|&j| a[j]).collect()
}

pub fn inverse(p: &[usize]) -> Permutation {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

pub fn identity(n: usize) -> Permutation {
    (0..n).collect()
}

pub fn is_bijection(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&j| j < p.len() && !std::mem::replace(&mut seen[j], true))
}

/// Order of a single permutation.
pub fn order(p: &[usize]) -> usize {
    let id = identity(p.len());
    let mut q = p.to_vec();
    let mut k = 1;
    while q != id {
        q = compose(p, &q);
        k += 1;
    }
    k
}

/// The group generated by a set of permutations of `degree` points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationGroup {
    pub degree: usize,
    pub elements: BTreeSet<Permutation>,
}

impl PermutationGroup {
    /// Closure of the generators under composition. Suited to the small
    /// groups met here (a few sheets).
    pub fn generate(degree: usize, generators: &[Permutation]) -> Result<Self> {
        if generators.iter().any(|g| g.len() != degree || !is_bijection(g)) {
            return Err(Error::InvalidArgument(format!("generators must be permutations of {degree} points")));
        }
        let mut elements = BTreeSet::from([identity(degree)]);
        let mut queue = VecDeque::from([identity(degree)]);
        while let Some(e) = queue.pop_front() {
            for g in generators {
                let h = compose(g, &e);
                if elements.insert(h.clone()) {
                    queue.push_back(h);
                }
            }
        }
        Ok(Self { degree, elements })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Every sheet is reachable from sheet 0.
    pub fn is_transitive(&self) -> bool {
        let mut reached = vec![false; self.degree];
        for e in &self.elements {
            if let Some(&j) = e.first() {
                reached[j] = true;
            }
        }
        self.degree > 0 && reached.iter().all(|&r| r)
    }

    pub fn is_cyclic(&self) -> bool {
        self.elements.iter().any(|e| order(e) == self.order())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub sheet_count: usize,
    pub transitive: bool,
    pub group_order: usize,
    pub cyclic: bool,
    pub results: Vec<MonodromyResult>,
}

/// Whether the loops' monodromy acts transitively on the sheets. When
/// `region_eps` is given, every loop must stay inside `C^ε ∩ D` with `D`
/// the disk of radius `ε/2`.
pub fn cover_connectivity(
    surface: &WeightedSurface,
    region_eps: Option<f64>,
    loops: &[LoopSpec],
) -> Result<ConnectivityReport> {
    if let Some(eps) = region_eps {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("region parameter must lie in (0, 1], got {eps}")));
        }
        for l in loops {
            for (y, z) in l.samples() {
                let (ay, az) = (y.norm(), z.norm());
                let inside = eps * ay <= az * (1.0 + 1e-12) && az <= ay / eps * (1.0 + 1e-12);
                if !inside || (ay * ay + az * az).sqrt() > eps / 2.0 {
                    return Err(Error::InvalidArgument(format!("loop leaves the region for eps = {eps}")));
                }
            }
        }
    }
    let sheet_count = surface.x_degree() as usize;
    let results = loops.iter().map(|l| lift_loop(surface, l, 0, false)).collect::<Result<Vec<_>>>()?;
    let perms: Vec<Permutation> = results.iter().map(|r| r.permutation.clone()).collect();
    let group = PermutationGroup::generate(sheet_count, &perms)?;
    Ok(ConnectivityReport {
        sheet_count,
        transitive: group.is_transitive(),
        group_order: group.order(),
        cyclic: group.is_cyclic(),
        results,
    })
}

/// Checks that the standard loop `(c e^{2πit}, c)` fits in `C^ε ∩ D`,
/// which needs `c <= ε/4`.
pub fn standard_loop(c: f64, eps: f64) -> Result<LoopSpec> {
    if !(c > 0.0 && c <= eps / 4.0) {
        return Err(Error::InvalidArgument(format!("standard loop needs 0 < c <= eps/4, got c = {c}, eps = {eps}")));
    }
    Ok(LoopSpec::circle_in_y(c))
}
