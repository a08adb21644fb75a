//! Weighted-homogeneous surfaces `f(x, y, z) = 0` in C³.
//!
//! A [`WeightedSurface`] stores the monomials of `f` together with integer
//! weights `(w1, w2, w3)` and quasidegree `d` such that every monomial
//! `x^a y^b z^c` satisfies `a w1 + b w2 + c w3 = d`. The positive reals act on
//! the surface by `t · (x, y, z) = (t^{w1/w3} x, t^{w2/w3} y, t z)`.

mod format;
mod slice;

pub use format::{parse_surface, write_surface};
pub use slice::{slice_components, slice_structure, SliceStructure};

use crate::error::{Error, Result};
use crate::geometry::ComplexPoint3;
use crate::poly::{self, Roots};
use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// One monomial `coeff · x^a y^b z^c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: [u32; 3],
    pub coeff: Complex64,
}

impl Term {
    pub fn new(exponents: [u32; 3], coeff: Complex64) -> Self {
        Self { exponents, coeff }
    }

    fn monomial(&self, p: &ComplexPoint3) -> Complex64 {
        let [a, b, c] = self.exponents;
        p.x.powu(a) * p.y.powu(b) * p.z.powu(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSurface {
    weights: [u32; 3],
    degree: u32,
    terms: Vec<Term>,
    label: String,
}

impl WeightedSurface {
    /// Builds a surface, enforcing `w1 >= w2 > w3`, weighted homogeneity and
    /// at least one nonzero term. Zero coefficients are dropped and repeated
    /// exponents merged.
    pub fn new(weights: [u32; 3], degree: u32, terms: Vec<Term>, label: impl Into<String>) -> Result<Self> {
        let [w1, w2, w3] = weights;
        if !(w1 >= w2 && w2 > w3) {
            return Err(Error::InvalidSurface(format!(
                "weights must satisfy w1 >= w2 > w3, got ({w1}, {w2}, {w3})"
            )));
        }
        Self::relaxed(weights, degree, terms, label)
    }

    /// Like [`WeightedSurface::new`] but without the weight-ordering
    /// requirement. Used for flat and isotropic test surfaces.
    pub fn relaxed(weights: [u32; 3], degree: u32, terms: Vec<Term>, label: impl Into<String>) -> Result<Self> {
        if weights.contains(&0) || degree == 0 {
            return Err(Error::InvalidSurface("weights and degree must be positive".into()));
        }
        let mut merged: Vec<Term> = Vec::new();
        for term in terms {
            if !term.coeff.re.is_finite() || !term.coeff.im.is_finite() {
                return Err(Error::InvalidSurface("non-finite coefficient".into()));
            }
            let wdeg: u64 = term
                .exponents
                .iter()
                .zip(weights)
                .map(|(&e, w)| e as u64 * w as u64)
                .sum();
            if wdeg != degree as u64 {
                let [a, b, c] = term.exponents;
                return Err(Error::InvalidSurface(format!(
                    "term x^{a} y^{b} z^{c} has weighted degree {wdeg}, expected {degree}"
                )));
            }
            match merged.iter_mut().find(|t| t.exponents == term.exponents) {
                Some(t) => t.coeff += term.coeff,
                None => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        if merged.is_empty() {
            return Err(Error::InvalidSurface("all coefficients are zero".into()));
        }
        Ok(Self { weights, degree, terms: merged, label: label.into() })
    }

    pub fn weights(&self) -> [u32; 3] {
        self.weights
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Nonzero terms.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Coefficient of `x^a y^b z^c` (zero when absent).
    pub fn coefficient(&self, exponents: [u32; 3]) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.exponents == exponents)
            .map_or(Complex64::new(0.0, 0.0), |t| t.coeff)
    }

    /// Scaling exponents `(w1/w3, w2/w3, 1)` of the real action.
    pub fn flow_exponents(&self) -> [f64; 3] {
        let w3 = self.weights[2] as f64;
        [self.weights[0] as f64 / w3, self.weights[1] as f64 / w3, 1.0]
    }

    /// Largest power of x appearing in f.
    pub fn x_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exponents[0]).max().unwrap_or(0)
    }

    pub fn evaluate(&self, p: &ComplexPoint3) -> Complex64 {
        self.terms.iter().map(|t| t.coeff * t.monomial(p)).sum()
    }

    /// Sum of the moduli of the terms at `p`; the natural size of `f(p)`.
    pub fn term_scale(&self, p: &ComplexPoint3) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm() * t.monomial(p).norm()).sum()
    }

    /// `(∂f/∂x, ∂f/∂y, ∂f/∂z)` at `p`.
    pub fn gradient(&self, p: &ComplexPoint3) -> [Complex64; 3] {
        let mut g = [Complex64::new(0.0, 0.0); 3];
        let coords = p.coords();
        for t in &self.terms {
            for (axis, slot) in g.iter_mut().enumerate() {
                let e = t.exponents[axis];
                if e == 0 {
                    continue;
                }
                let mut m = t.coeff * e as f64;
                for (k, &c) in coords.iter().enumerate() {
                    let power = if k == axis { e - 1 } else { t.exponents[k] };
                    m *= c.powu(power);
                }
                *slot += m;
            }
        }
        g
    }

    /// Coefficients (ascending in x) of `f(·, y, z)`.
    pub fn x_polynomial(&self, y: Complex64, z: Complex64) -> Vec<Complex64> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.x_degree() as usize + 1];
        for t in &self.terms {
            let [a, b, c] = t.exponents;
            coeffs[a as usize] += t.coeff * y.powu(b) * z.powu(c);
        }
        coeffs
    }

    /// All roots x of `f(x, y, z) = 0`, with multiplicity.
    pub fn solve_fiber(&self, y: Complex64, z: Complex64) -> Result<Roots> {
        if self.x_degree() == 0 {
            return Err(Error::InvalidArgument("f does not depend on x".into()));
        }
        let coeffs = self.x_polynomial(y, z);
        poly::all_roots(&coeffs)
    }

    /// The real action `(t^{w1/w3} x, t^{w2/w3} y, t z)`.
    pub fn scale_action(&self, p: &ComplexPoint3, t: f64) -> Result<ComplexPoint3> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("scaling parameter must be positive, got {t}")));
        }
        Ok(self.scale_unchecked(p, t))
    }

    pub(crate) fn scale_unchecked(&self, p: &ComplexPoint3, t: f64) -> ComplexPoint3 {
        let [a, b, c] = self.flow_exponents();
        ComplexPoint3::new(p.x * t.powf(a), p.y * t.powf(b), p.z * t.powf(c))
    }

    /// Moves `p` along its orbit of the real action to the sphere of radius
    /// `radius`. Returns the new point and the action parameter used.
    pub fn flow_to_norm(&self, p: &ComplexPoint3, radius: f64) -> Result<(ComplexPoint3, f64)> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("target radius must be positive".into()));
        }
        let moduli = [p.x.norm_sqr(), p.y.norm_sqr(), p.z.norm_sqr()];
        if moduli.iter().all(|&m| m == 0.0) {
            return Err(Error::ProjectionFailed("cannot flow the origin".into()));
        }
        let exps = self.flow_exponents();
        let target = 2.0 * radius.ln();
        // Newton in u = ln t on ln |T(p, e^u)|^2, which is convex and increasing.
        let log_norm = |u: f64| -> (f64, f64) {
            let mut n = 0.0;
            let mut dn = 0.0;
            for k in 0..3 {
                if moduli[k] > 0.0 {
                    let v = moduli[k] * (2.0 * exps[k] * u).exp();
                    n += v;
                    dn += 2.0 * exps[k] * v;
                }
            }
            (n.ln(), dn / n)
        };
        let mut u = (radius / p.norm()).ln();
        let mut ok = false;
        for _ in 0..100 {
            let (phi, dphi) = log_norm(u);
            let step = (phi - target) / dphi;
            u -= step;
            if step.abs() < 1e-15 * (1.0 + u.abs()) {
                ok = true;
                break;
            }
        }
        let t = u.exp();
        let q = self.scale_unchecked(p, t);
        if !ok || ((q.norm() - radius) / radius).abs() > 1e-12 || !q.is_finite() {
            return Err(Error::ProjectionFailed(format!(
                "orbit Newton did not reach radius {radius} (got {})",
                q.norm()
            )));
        }
        Ok((q, t))
    }

    /// Milnor number `prod (d/w_i - 1)` of an isolated weighted-homogeneous
    /// singularity, in exact rational arithmetic.
    pub fn milnor_number(&self) -> Result<u64> {
        let d = self.degree as i64;
        let mut mu = Ratio::from_integer(1i64);
        for &w in &self.weights {
            let factor = Ratio::new(d, w as i64) - 1;
            if factor <= Ratio::from_integer(0) {
                return Err(Error::InvalidSurface(format!(
                    "d/w - 1 = {factor} is not positive; no isolated singularity"
                )));
            }
            mu *= factor;
        }
        if !mu.is_integer() {
            return Err(Error::InvalidSurface(format!("Milnor product {mu} is not an integer")));
        }
        Ok(mu.to_integer() as u64)
    }

    /// `(∂x/∂y, ∂x/∂z)` of the implicit function defined near `p` by f = 0.
    pub fn implicit_derivatives(&self, p: &ComplexPoint3) -> Result<(Complex64, Complex64)> {
        let scale = self.term_scale(p);
        let value = self.evaluate(p).norm();
        if value > 1e-9 * scale.max(f64::MIN_POSITIVE) && value > 1e-9 {
            return Err(Error::InvalidArgument(format!("point is not on the surface (|f| = {value:e})")));
        }
        let [fx, fy, fz] = self.gradient(p);
        let gnorm = (fx.norm_sqr() + fy.norm_sqr() + fz.norm_sqr()).sqrt();
        if fx.norm() <= 1e-12 * gnorm || fx.norm() == 0.0 {
            return Err(Error::BranchPoint(fx.norm()));
        }
        Ok((-fy / fx, -fz / fx))
    }

    /// True for the `t = 0` member of the Briançon–Speder family.
    pub fn is_briancon_speder_zero(&self) -> bool {
        *self == briancon_speder(Complex64::new(0.0, 0.0))
    }
}

/// The Briançon–Speder family `x^5 + z^15 + y^7 z + t x y^6`.
pub fn briancon_speder(t: Complex64) -> WeightedSurface {
    let one = Complex64::new(1.0, 0.0);
    let terms = vec![
        Term::new([5, 0, 0], one),
        Term::new([0, 0, 15], one),
        Term::new([0, 7, 1], one),
        Term::new([1, 6, 0], t),
    ];
    let label = if t.im == 0.0 {
        format!("briancon-speder(t={})", t.re)
    } else {
        format!("briancon-speder(t={}{:+}i)", t.re, t.im)
    };
    WeightedSurface::new([3, 2, 1], 15, terms, label).expect("built-in family is valid")
}

/// Brieskorn surface `x^p + y^q + z^r` with weights `(d/p, d/q, d/r)`,
/// `d = lcm(p, q, r)`. Requires `p <= q < r`.
pub fn brieskorn(p: u32, q: u32, r: u32) -> Result<WeightedSurface> {
    if p == 0 || !(p <= q && q < r) {
        return Err(Error::InvalidArgument(format!("brieskorn exponents must satisfy 0 < p <= q < r, got ({p}, {q}, {r})")));
    }
    let d = lcm(lcm(p, q), r);
    let one = Complex64::new(1.0, 0.0);
    WeightedSurface::new(
        [d / p, d / q, d / r],
        d,
        vec![Term::new([p, 0, 0], one), Term::new([0, q, 0], one), Term::new([0, 0, r], one)],
        format!("brieskorn({p},{q},{r})"),
    )
}

/// The coordinate plane `{x = 0}`, a flat test surface.
pub fn plane_x0() -> WeightedSurface {
    WeightedSurface::relaxed([1, 1, 1], 1, vec![Term::new([1, 0, 0], Complex64::new(1.0, 0.0))], "plane(x=0)")
        .expect("valid")
}

pub(crate) fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}
