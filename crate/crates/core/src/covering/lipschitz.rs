use crate::error::{Error, Result};
use crate::geometry::ComplexPoint3;
use crate::rng;
use crate::surfaces::WeightedSurface;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Safety factor applied to the empirical λ.
pub const LAMBDA_SAFETY: f64 = 1.2;
/// Minimum sample count for a λ estimate.
pub const MIN_LIPSCHITZ_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub eps_w: f64,
    pub disk_radius: f64,
    pub samples: usize,
    pub sup_dx_dy: f64,
    pub sup_dx_dz: f64,
    /// Largest sampled value of each of the three λ ratios.
    pub lambda_ratios: [f64; 3],
    pub lambda_hat: f64,
    /// `7⁵ λ⁴ ρ³ / 5⁵` with ρ the disk radius (`ε³/2³` for the default disk).
    pub bound_dx_dy: f64,
    /// `λ⁵ / 5⁵`.
    pub bound_dx_dz: f64,
    /// `sup|∂x/∂y|⁵ / bound`.
    pub ratio_dx_dy: f64,
    pub ratio_dx_dz: f64,
    /// Largest relative gap between the closed forms and the generic
    /// implicit derivatives.
    pub closed_form_gap: f64,
    pub pass: bool,
}

/// Bound on `sup|∂x/∂y|⁵` for a given λ on a disk of radius `rho`.
pub fn dx_dy_bound(lambda: f64, rho: f64) -> f64 {
    7f64.powi(5) * lambda.powi(4) * rho.powi(3) / 5f64.powi(5)
}

pub fn dx_dz_bound(lambda: f64) -> f64 {
    lambda.powi(5) / 5f64.powi(5)
}

/// The three quantities whose supremum is a valid λ:
/// `|15z¹⁴ + y⁷| / |z|⁴`, `|y⁷| / |z¹⁴ + y⁷|` and `|15z¹⁴ + y⁷| / |z¹⁴ + y⁷|`.
pub fn lambda_ratios(y: Complex64, z: Complex64) -> [f64; 3] {
    let y7 = y.powu(7);
    let z14 = z.powu(14);
    let num = (z14 * 15.0 + y7).norm();
    let den = (z14 + y7).norm();
    [num / z.norm().powi(4), y7.norm() / den, num / den]
}

/// Uniform point of the 4-ball of radius `rho` inside `C^ε`.
fn draw_in_region<R: Rng>(rng: &mut R, eps: f64, rho: f64) -> (Complex64, Complex64) {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>() * 2.0 - 1.0);
        if v.iter().map(|c| c * c).sum::<f64>() > 1.0 {
            continue;
        }
        let y = Complex64::new(v[0], v[1]) * rho;
        let z = Complex64::new(v[2], v[3]) * rho;
        let (ay, az) = (y.norm(), z.norm());
        if az > 0.0 && eps * ay <= az && az <= ay / eps {
            return (y, z);
        }
    }
}

/// Empirical suprema of the implicit derivatives of `x⁵ + z¹⁵ + y⁷z = 0` on
/// `C^ε ∩ D` and the corresponding λ bounds.
pub fn lipschitz_bound_probe(
    surface: &WeightedSurface,
    eps_w: f64,
    disk_radius: f64,
    n: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    if !surface.is_briancon_speder_zero() {
        return Err(Error::NotApplicable("the derivative bounds are specific to x^5 + z^15 + y^7 z".into()));
    }
    if !(eps_w > 0.0 && eps_w <= 1.0) {
        return Err(Error::InvalidArgument(format!("wedge parameter must lie in (0, 1], got {eps_w}")));
    }
    if !(disk_radius > 0.0 && disk_radius < eps_w) {
        return Err(Error::InvalidArgument(format!("disk radius must lie in (0, eps), got {disk_radius}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    struct Local {
        dy: f64,
        dz: f64,
        ratios: [f64; 3],
        gap: f64,
    }
    let locals = rng::par_map_indexed(n, seed, |_, rng| -> Result<Local> {
        let (y, z) = draw_in_region(rng, eps_w, disk_radius);
        let roots = surface.solve_fiber(y, z)?;
        let mut out = Local { dy: 0.0, dz: 0.0, ratios: lambda_ratios(y, z), gap: 0.0 };
        for x in roots.values {
            let p = ComplexPoint3::new(x, y, z);
            let (gy, gz) = surface.implicit_derivatives(&p)?;
            let x4 = x.powu(4) * 5.0;
            let cy = -(y.powu(6) * z * 7.0) / x4;
            let cz = -(z.powu(14) * 15.0 + y.powu(7)) / x4;
            out.gap = out.gap.max((cy - gy).norm() / cy.norm().max(f64::MIN_POSITIVE));
            out.gap = out.gap.max((cz - gz).norm() / cz.norm().max(f64::MIN_POSITIVE));
            out.dy = out.dy.max(gy.norm());
            out.dz = out.dz.max(gz.norm());
        }
        Ok(out)
    });
    let mut sup_dx_dy: f64 = 0.0;
    let mut sup_dx_dz: f64 = 0.0;
    let mut ratios = [0.0f64; 3];
    let mut gap: f64 = 0.0;
    for l in locals {
        let l = l?;
        sup_dx_dy = sup_dx_dy.max(l.dy);
        sup_dx_dz = sup_dx_dz.max(l.dz);
        gap = gap.max(l.gap);
        for k in 0..3 {
            ratios[k] = ratios[k].max(l.ratios[k]);
        }
    }
    let lambda_hat = LAMBDA_SAFETY * ratios.iter().copied().fold(0.0, f64::max);
    let bound_dx_dy = dx_dy_bound(lambda_hat, disk_radius);
    let bound_dx_dz = dx_dz_bound(lambda_hat);
    let ratio_dx_dy = sup_dx_dy.powi(5) / bound_dx_dy;
    let ratio_dx_dz = sup_dx_dz.powi(5) / bound_dx_dz;
    Ok(LipschitzReport {
        eps_w,
        disk_radius,
        samples: n,
        sup_dx_dy,
        sup_dx_dz,
        lambda_ratios: ratios,
        lambda_hat,
        bound_dx_dy,
        bound_dx_dz,
        ratio_dx_dy,
        ratio_dx_dz,
        closed_form_gap: gap,
        pass: ratio_dx_dy <= 1.0 && ratio_dx_dz <= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::briancon_speder;

    fn bs0() -> WeightedSurface {
        briancon_speder(Complex64::new(0.0, 0.0))
    }

    #[test]
    fn bounds_hold_on_the_default_region() {
        let r = lipschitz_bound_probe(&bs0(), 0.1, 0.05, 20_000, 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.ratio_dx_dy <= 1.0 && r.ratio_dx_dz <= 1.0);
        assert!(r.closed_form_gap <= 1e-12, "{}", r.closed_form_gap);
        assert!(r.sup_dx_dy.is_finite() && r.sup_dx_dz.is_finite());
    }

    #[test]
    fn halving_eps_scales_the_dy_bound_by_two_to_the_minus_three_fifths() {
        let lambda = 3.7;
        let ratio = dx_dy_bound(lambda, 0.025).powf(0.2) / dx_dy_bound(lambda, 0.05).powf(0.2);
        assert!((ratio - 2f64.powf(-0.6)).abs() < 1e-14);
    }

    #[test]
    fn dy_supremum_grows_with_the_wedge() {
        let s = bs0();
        let sups: Vec<f64> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&e| lipschitz_bound_probe(&s, e, e / 2.0, 20_000, 2).unwrap().sup_dx_dy)
            .collect();
        assert!(sups[0] <= sups[1] && sups[1] <= sups[2], "{sups:?}");
    }

    #[test]
    fn other_surfaces_and_bad_regions_are_rejected() {
        let s1 = briancon_speder(Complex64::new(1.0, 0.0));
        assert!(matches!(lipschitz_bound_probe(&s1, 0.1, 0.05, 10, 1), Err(Error::NotApplicable(_))));
        assert!(lipschitz_bound_probe(&bs0(), 0.1, 0.2, 10, 1).is_err());
        assert!(lipschitz_bound_probe(&bs0(), 0.0, 0.05, 10, 1).is_err());
    }

    #[test]
    fn smallest_z_sample_stays_finite() {
        // the wedge edge |z| = ε|y| is the closest the region gets to z = 0
        let (y, z) = (Complex64::new(0.05, 0.0), Complex64::new(0.005, 0.0));
        let s = bs0();
        for x in s.solve_fiber(y, z).unwrap().values {
            let (gy, gz) = s.implicit_derivatives(&ComplexPoint3::new(x, y, z)).unwrap();
            assert!(gy.norm().is_finite() && gz.norm().is_finite());
        }
    }

    #[test]
    fn dz_supremum_follows_the_wedge_edge_law() {
        // at |z| = ε|y|, |y| ≈ ε/2 the derivative is about |y|^{3/5} / (5 ε^{4/5}),
        // so the supremum shrinks like ε^{-1/5} as the wedge parameter grows
        let s = bs0();
        let mut prev = f64::INFINITY;
        for e in [0.05, 0.1, 0.2] {
            let sup = lipschitz_bound_probe(&s, e, e / 2.0, 20_000, 3).unwrap().sup_dx_dz;
            let edge = 2f64.powf(-0.6) * e.powf(-0.2) / 5.0;
            assert!(sup <= edge * 1.01 && sup >= edge * 0.9, "eps {e}: {sup} vs {edge}");
            assert!(sup < prev);
            prev = sup;
        }
    }
}
