//! All-roots solver for univariate complex polynomials.
//!
//! Aberth–Ehrlich simultaneous iteration followed by Newton polishing. Exact
//! zero roots are deflated before iterating, so a factor `x^m` is reported
//! with multiplicity `m` exactly.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Iteration cap for the simultaneous iteration.
pub const MAX_ITERATIONS: usize = 200;
/// Acceptance bound on `|p(root)| / (1 + max |coeff|)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Roots closer than this (relative to the largest root) form one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-7;

/// A cluster of numerically coincident roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCluster {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Roots of a polynomial, listed with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Roots {
    pub values: Vec<Complex64>,
    pub clusters: Vec<RootCluster>,
}

impl Roots {
    pub fn degree(&self) -> usize {
        self.values.len()
    }

    /// Distinct roots (one representative per cluster).
    pub fn distinct(&self) -> Vec<Complex64> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    /// Smallest pairwise distance between distinct roots, or `f64::INFINITY`
    /// with fewer than two clusters; zero when any cluster is multiple.
    pub fn min_separation(&self) -> f64 {
        if self.clusters.iter().any(|c| c.multiplicity > 1) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (i, a) in self.clusters.iter().enumerate() {
            for b in &self.clusters[i + 1..] {
                best = best.min((a.value - b.value).norm());
            }
        }
        best
    }
}

/// Horner evaluation of `p` and `p'` (coefficients in ascending order).
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Finds all roots of `sum coeffs[k] x^k`.
///
/// Leading zero coefficients are trimmed; an identically zero polynomial or a
/// non-finite coefficient is rejected.
pub fn all_roots(coeffs: &[Complex64]) -> Result<Roots> {
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidArgument("non-finite polynomial coefficient".into()));
    }
    let degree = match coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)) {
        Some(d) => d,
        None => return Err(Error::InvalidArgument("zero polynomial has no finite root set".into())),
    };
    let coeffs = &coeffs[..=degree];
    let zero_mult = coeffs.iter().position(|c| *c != Complex64::new(0.0, 0.0)).unwrap_or(0);
    let reduced = &coeffs[zero_mult..];

    let mut values = vec![Complex64::new(0.0, 0.0); zero_mult];
    values.extend(aberth(reduced)?);

    let max_coeff = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for &r in &values {
        let residual = eval(coeffs, r).norm();
        let magnitude: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * r.norm().powi(k as i32))
            .sum();
        // Second bound accepts roots that are exact to rounding when |r| > 1.
        if residual > RESIDUAL_TOLERANCE * (1.0 + max_coeff) && residual > 1e-13 * magnitude {
            return Err(Error::RootFinderFailed { iterations: MAX_ITERATIONS, residual });
        }
    }
    let clusters = cluster(&values);
    Ok(Roots { values, clusters })
}

fn aberth(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    if n == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }

    // Starting circle: geometric mean of root magnitudes, offset angles.
    let radius = (coeffs[0] / lead).norm().powf(1.0 / n as f64).max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();

    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval_with_derivative(coeffs, z[i]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d != Complex64::new(0.0, 0.0) {
                        repulsion += d.inv();
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(f64::MIN_POSITIVE));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }

    for root in z.iter_mut() {
        newton_polish(coeffs, root);
    }
    let _ = converged;
    Ok(z)
}

/// A few Newton steps, each kept only if it lowers the residual.
fn newton_polish(coeffs: &[Complex64], root: &mut Complex64) {
    for _ in 0..3 {
        let (p, dp) = eval_with_derivative(coeffs, *root);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            return;
        }
        let candidate = *root - p / dp;
        if eval(coeffs, candidate).norm() < p.norm() {
            *root = candidate;
        } else {
            return;
        }
    }
}

fn cluster(values: &[Complex64]) -> Vec<RootCluster> {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = CLUSTER_TOLERANCE * scale;
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match out.iter_mut().find(|(root, _, _)| *root == r) {
            Some(entry) => {
                entry.1 += values[i];
                entry.2 += 1;
            }
            None => out.push((r, values[i], 1)),
        }
    }
    out.into_iter()
        .map(|(_, sum, m)| RootCluster { value: sum / m as f64, multiplicity: m })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fifth_roots_of_minus_one() {
        let coeffs = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let roots = all_roots(&coeffs).unwrap();
        assert_eq!(roots.degree(), 5);
        assert_eq!(roots.clusters.len(), 5);
        for r in &roots.values {
            assert!((r.powi(5) + 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn pure_power_is_exact_multiple_zero() {
        let mut coeffs = vec![c(0.0, 0.0); 6];
        coeffs[5] = c(1.0, 0.0);
        let roots = all_roots(&coeffs).unwrap();
        assert_eq!(roots.clusters, vec![RootCluster { value: c(0.0, 0.0), multiplicity: 5 }]);
        assert_eq!(roots.min_separation(), 0.0);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(all_roots(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn constant_has_no_roots() {
        assert_eq!(all_roots(&[c(2.0, 0.0)]).unwrap().degree(), 0);
    }

    #[test]
    fn double_root_clusters() {
        // (x - 1)^2 (x + 2)
        let coeffs = [c(2.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let roots = all_roots(&coeffs).unwrap();
        let mut mults: Vec<usize> = roots.clusters.iter().map(|c| c.multiplicity).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 2]);
    }

    proptest! {
        #[test]
        fn vieta_sum_and_product(re in proptest::collection::vec(-2.0f64..2.0, 10)) {
            let roots_in: Vec<Complex64> = re.chunks(2).map(|p| c(p[0], p[1])).collect();
            // expand prod (x - r)
            let mut coeffs = vec![c(1.0, 0.0)];
            for r in &roots_in {
                let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
                for (k, a) in coeffs.iter().enumerate() {
                    next[k + 1] += *a;
                    next[k] -= *a * r;
                }
                coeffs = next;
            }
            let roots = all_roots(&coeffs).unwrap();
            let sum: Complex64 = roots.values.iter().sum();
            let prod: Complex64 = roots.values.iter().product();
            let expected_sum = -coeffs[4] / coeffs[5];
            let expected_prod = -coeffs[0] / coeffs[5];
            let scale = 1.0 + expected_sum.norm();
            prop_assert!((sum - expected_sum).norm() <= 1e-8 * scale);
            let pscale = 1.0 + expected_prod.norm();
            prop_assert!((prod - expected_prod).norm() <= 1e-8 * pscale);
        }
    }
}
