use crate::error::{Error, Result};
use crate::metric::{measure_estimate, weighted_slope, MIN_RUNG_SAMPLES};
use crate::rng;
use crate::sampling::{sample_ball, RegionSpec};
use crate::surfaces::WeightedSurface;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest spread `max K / min K` over the grid accepted as stable.
pub const THIN_WEDGE_MAX_SPREAD: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinWedgeCell {
    pub eps_w: f64,
    pub radius: f64,
    pub measure: f64,
    pub standard_error: f64,
    /// `measure / (eps_w r⁴)`.
    pub k_ratio: f64,
    pub samples: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinWedgeTable {
    pub eps_ladder: Vec<f64>,
    pub r_ladder: Vec<f64>,
    pub cells: Vec<ThinWedgeCell>,
    /// Largest `K` over unflagged cells.
    pub k_hat: f64,
    /// `max K / min K` over unflagged cells.
    pub spread: f64,
    /// Fitted exponent of the measure in `r`, one per `eps_w`.
    pub r_slopes: Vec<Option<f64>>,
    /// `max K / min K` across `eps_w` at each radius.
    pub eps_spread: Vec<f64>,
    pub stable: bool,
}

impl ThinWedgeTable {
    pub fn cell(&self, eps_w: f64, radius: f64) -> Option<&ThinWedgeCell> {
        self.cells.iter().find(|c| c.eps_w == eps_w && c.radius == radius)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps_w,radius,measure,standard_error,k_ratio,samples,flagged\n");
        for c in &self.cells {
            s += &format!(
                "{},{},{:.12e},{:.6e},{:.6e},{},{}\n",
                c.eps_w, c.radius, c.measure, c.standard_error, c.k_ratio, c.samples, c.flagged
            );
        }
        s
    }
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > 0.0 && lo.is_finite() {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Measures `X ∩ N^{eps_w} ∩ B(0, r)` on every cell of the grid.
pub fn thin_wedge_volume(
    surface: &WeightedSurface,
    eps_ladder: &[f64],
    r_ladder: &[f64],
    n: usize,
    seed: u64,
) -> Result<ThinWedgeTable> {
    if eps_ladder.is_empty() || r_ladder.is_empty() {
        return Err(Error::InvalidArgument("thin-wedge ladders must be nonempty".into()));
    }
    if eps_ladder.iter().chain(r_ladder).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("thin-wedge ladders must be positive".into()));
    }
    let grid: Vec<(usize, f64, f64)> = eps_ladder
        .iter()
        .flat_map(|&e| r_ladder.iter().map(move |&r| (e, r)))
        .enumerate()
        .map(|(i, (e, r))| (i, e, r))
        .collect();
    let cells = grid
        .par_iter()
        .map(|&(i, eps_w, radius)| {
            let region = RegionSpec::thin_wedge(radius, eps_w)?;
            let cloud = sample_ball(surface, radius, n, &region, rng::derive_seed(seed, i as u64 + 1))?;
            let est = measure_estimate(&cloud, &|_| true);
            let k_ratio = est.value / (eps_w * radius.powi(4));
            Ok(ThinWedgeCell {
                eps_w,
                radius,
                measure: est.value,
                standard_error: est.standard_error,
                k_ratio,
                samples: cloud.len(),
                flagged: cloud.len() < MIN_RUNG_SAMPLES,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let live = || cells.iter().filter(|c| !c.flagged);
    let k_hat = live().map(|c| c.k_ratio).fold(0.0, f64::max);
    let total_spread = spread(live().map(|c| c.k_ratio));
    let r_slopes = eps_ladder
        .iter()
        .map(|&e| {
            let row: Vec<&ThinWedgeCell> = live().filter(|c| c.eps_w == e && c.measure > 0.0).collect();
            weighted_slope(
                &row.iter().map(|c| c.radius.ln()).collect::<Vec<_>>(),
                &row.iter().map(|c| c.measure.ln()).collect::<Vec<_>>(),
                &row.iter().map(|c| (c.standard_error / c.measure).max(1e-9)).collect::<Vec<_>>(),
            )
            .map(|f| f.0)
        })
        .collect();
    let eps_spread = r_ladder.iter().map(|&r| spread(live().filter(|c| c.radius == r).map(|c| c.k_ratio))).collect();
    Ok(ThinWedgeTable {
        eps_ladder: eps_ladder.to_vec(),
        r_ladder: r_ladder.to_vec(),
        k_hat,
        stable: total_spread <= THIN_WEDGE_MAX_SPREAD && cells.iter().all(|c| !c.flagged),
        spread: total_spread,
        r_slopes,
        eps_spread,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::in_region;
    use crate::surfaces::briancon_speder;
    use num_complex::Complex64;

    fn bs0() -> WeightedSurface {
        briancon_speder(Complex64::new(0.0, 0.0))
    }

    #[test]
    fn wedge_and_thin_wedge_partition_the_ball() {
        let s = bs0();
        let eps = 0.1;
        let cloud = sample_ball(&s, 0.1, 20_000, &RegionSpec::ball(0.1), 3).unwrap();
        let wedge = RegionSpec::wedge(0.1, eps).unwrap();
        let thin = RegionSpec::thin_wedge(0.1, eps).unwrap();
        let all = measure_estimate(&cloud, &|_| true);
        let w = measure_estimate(&cloud, &|p| in_region(p, &wedge));
        let t = measure_estimate(&cloud, &|p| in_region(p, &thin));
        let se = (w.standard_error.powi(2) + t.standard_error.powi(2)).sqrt();
        assert!((w.value + t.value - all.value).abs() <= 3.0 * se + 1e-12 * all.value);
    }

    #[test]
    fn unit_thin_wedge_is_the_whole_ball() {
        let s = bs0();
        let thin = RegionSpec::thin_wedge(0.1, 1.0).unwrap();
        let cloud = sample_ball(&s, 0.1, 5000, &RegionSpec::ball(0.1), 4).unwrap();
        assert!(cloud.points.iter().all(|p| in_region(p, &thin)));
    }

    #[test]
    fn measure_increases_with_the_wedge_width() {
        let t = thin_wedge_volume(&bs0(), &[0.2, 0.1, 0.05], &[0.1], 20_000, 5).unwrap();
        let m: Vec<f64> = t.cells.iter().map(|c| c.measure).collect();
        assert!(m[0] > m[1] && m[1] > m[2], "{m:?}");
    }

    #[test]
    fn measure_scales_like_the_fourth_power_of_the_radius() {
        let t = thin_wedge_volume(&bs0(), &[0.1], &[0.2, 0.1, 0.05, 0.025], 20_000, 6).unwrap();
        let slope = t.r_slopes[0].unwrap();
        assert!((slope - 4.0).abs() <= 0.3, "{slope}");
        assert!(t.to_csv().lines().count() == 5);
    }

    #[test]
    fn bad_ladders_rejected() {
        assert!(thin_wedge_volume(&bs0(), &[], &[0.1], 10, 1).is_err());
        assert!(thin_wedge_volume(&bs0(), &[0.1], &[-0.1], 10, 1).is_err());
    }
}
