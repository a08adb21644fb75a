//! Components of `(X \ {0}) ∩ {z = 0}`.
//!
//! Write `f(x, y, 0) = x^a y^b h(x, y)` with `h` divisible by neither x nor y.
//! The axes contribute one component each when `a > 0` or `b > 0`. The curve
//! `h = 0` minus the origin covers `C*_y`; its components are the orbits of
//! the monodromy obtained by tracking the roots of `h(·, y)` once around a
//! circle `|y| = ρ`.

use super::{Term, WeightedSurface};
use crate::continuation::{track_roots, TrackOptions};
use crate::error::{Error, Result};
use crate::geometry::ComplexPoint3;
use crate::poly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Base radii used for the orbit count and its cross-check.
pub const BASE_RADII: [f64; 2] = [1.0, 0.25];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceStructure {
    /// `{x = 0}` is a component (x divides `f(x, y, 0)`).
    pub has_x_axis_factor: bool,
    /// `{y = 0}` is a component (y divides `f(x, y, 0)`).
    pub has_y_axis_factor: bool,
    /// Terms of the reduced factor `h(x, y)` as `(a, b, coeff)`.
    pub reduced: Vec<([u32; 2], Complex64)>,
    pub base_radius: f64,
    /// Distinct roots of `h(·, base_radius)`, sorted by argument.
    pub base_roots: Vec<Complex64>,
    /// Monodromy of the base roots around `|y| = base_radius`.
    pub permutation: Vec<usize>,
    /// Component label of each base root.
    pub root_labels: Vec<usize>,
    pub component_count: usize,
    weights: [u32; 2],
}

impl SliceStructure {
    pub fn x_axis_label(&self) -> Option<usize> {
        self.has_x_axis_factor.then_some(0)
    }

    pub fn y_axis_label(&self) -> Option<usize> {
        self.has_y_axis_factor.then_some(usize::from(self.has_x_axis_factor))
    }

    fn first_orbit_label(&self) -> usize {
        usize::from(self.has_x_axis_factor) + usize::from(self.has_y_axis_factor)
    }

    /// Human-readable description of each component label.
    pub fn describe(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.has_x_axis_factor {
            out.push("x = 0".to_string());
        }
        if self.has_y_axis_factor {
            out.push("y = 0".to_string());
        }
        let orbits = self.component_count - out.len();
        for k in 0..orbits {
            let sheets = self.root_labels.iter().filter(|&&l| l == self.first_orbit_label() + k).count();
            out.push(format!("h-branch {k} ({sheets} sheets over y)"));
        }
        out
    }

    /// Coefficients of `h(·, y)` in x.
    pub fn reduced_polynomial(&self, y: Complex64) -> Vec<Complex64> {
        let deg = self.reduced.iter().map(|(e, _)| e[0]).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); deg + 1];
        for (e, c) in &self.reduced {
            coeffs[e[0] as usize] += c * y.powu(e[1]);
        }
        coeffs
    }

    /// Roots of `h(·, y)` with their component labels, predicted from the base
    /// fiber by the weighted action and matched to the computed roots.
    pub fn labelled_roots(&self, y: Complex64) -> Result<Vec<(Complex64, usize)>> {
        if self.base_roots.is_empty() {
            return Ok(Vec::new());
        }
        if y == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("h-branches are labelled only for y != 0".into()));
        }
        let roots = poly::all_roots(&self.reduced_polynomial(y))?.distinct();
        let [w1, w2] = self.weights;
        // λ with λ^{w2} y0 = y along the arc from arg 0 to arg y in (-π, π]
        let ratio = (y.norm() / self.base_radius).powf(w1 as f64 / w2 as f64);
        let turn = Complex64::from_polar(ratio, y.arg() * w1 as f64 / w2 as f64);
        let predicted: Vec<Complex64> = self.base_roots.iter().map(|r| r * turn).collect();
        let mut out = Vec::with_capacity(roots.len());
        for r in roots {
            let (idx, _) = predicted
                .iter()
                .enumerate()
                .map(|(j, p)| (j, (p - r).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            out.push((r, self.root_labels[idx]));
        }
        Ok(out)
    }

    /// Component label of a point on `X ∩ {z = 0}` other than the origin.
    pub fn label_point(&self, p: &ComplexPoint3) -> Option<usize> {
        let scale = p.norm();
        if scale == 0.0 {
            return None;
        }
        if p.x.norm() <= 1e-12 * scale {
            return self.x_axis_label();
        }
        if p.y.norm() <= 1e-12 * scale {
            return self.y_axis_label();
        }
        let labelled = self.labelled_roots(p.y).ok()?;
        labelled
            .into_iter()
            .min_by(|a, b| (a.0 - p.x).norm().total_cmp(&(b.0 - p.x).norm()))
            .map(|(_, l)| l)
    }
}

fn orbits(permutation: &[usize]) -> Vec<usize> {
    let mut labels = vec![usize::MAX; permutation.len()];
    let mut next = 0;
    for start in 0..permutation.len() {
        if labels[start] != usize::MAX {
            continue;
        }
        let mut i = start;
        while labels[i] == usize::MAX {
            labels[i] = next;
            i = permutation[i];
        }
        next += 1;
    }
    labels
}

fn track_reduced(structure: &SliceStructure, radius: f64) -> Result<(Vec<Complex64>, Vec<usize>)> {
    let track = track_roots(
        |s| structure.reduced_polynomial(Complex64::from_polar(radius, TAU * s)),
        &TrackOptions { steps: 512, ..Default::default() },
    )?;
    let perm = track.closing_permutation()?;
    Ok((track.start, perm))
}

/// Full structure of the z = 0 slice, including the component labelling.
pub fn slice_structure(surface: &WeightedSurface) -> Result<SliceStructure> {
    let slice_terms: Vec<&Term> = surface.terms().iter().filter(|t| t.exponents[2] == 0).collect();
    if slice_terms.is_empty() {
        return Err(Error::DegenerateSlice);
    }
    let a = slice_terms.iter().map(|t| t.exponents[0]).min().unwrap_or(0);
    let b = slice_terms.iter().map(|t| t.exponents[1]).min().unwrap_or(0);
    let reduced: Vec<([u32; 2], Complex64)> = slice_terms
        .iter()
        .map(|t| ([t.exponents[0] - a, t.exponents[1] - b], t.coeff))
        .collect();
    let [w1, w2, _] = surface.weights();
    let mut structure = SliceStructure {
        has_x_axis_factor: a > 0,
        has_y_axis_factor: b > 0,
        reduced,
        base_radius: BASE_RADII[0],
        base_roots: Vec::new(),
        permutation: Vec::new(),
        root_labels: Vec::new(),
        component_count: 0,
        weights: [w1, w2],
    };
    let h_degree = structure.reduced.iter().map(|(e, _)| e[0]).max().unwrap_or(0);
    let mut orbit_count = 0;
    if h_degree > 0 {
        let mut counts = Vec::new();
        for (k, &radius) in BASE_RADII.iter().enumerate() {
            let (roots, perm) = track_reduced(&structure, radius)?;
            let labels = orbits(&perm);
            let count = labels.iter().max().map_or(0, |m| m + 1);
            counts.push(count);
            if k == 0 {
                let offset = usize::from(a > 0) + usize::from(b > 0);
                structure.base_roots = roots;
                structure.permutation = perm;
                structure.root_labels = labels.iter().map(|l| l + offset).collect();
            }
        }
        if counts[0] != counts[1] {
            return Err(Error::SliceCountMismatch(counts[0], counts[1]));
        }
        orbit_count = counts[0];
    }
    structure.component_count = usize::from(a > 0) + usize::from(b > 0) + orbit_count;
    Ok(structure)
}

/// Number of connected components of `(X \ {0}) ∩ {z = 0}`.
pub fn slice_components(surface: &WeightedSurface) -> Result<usize> {
    Ok(slice_structure(surface)?.component_count)
}
