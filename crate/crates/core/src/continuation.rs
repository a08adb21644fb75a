//! Tracking the roots of a polynomial family `p_s(x)` along `s ∈ [0, 1]`.
//!
//! Each step re-solves the polynomial and matches the new roots to the old
//! ones by nearest neighbour. A match is ambiguous when the second-nearest
//! candidate is within a factor 2 of the nearest; the step is then halved, at
//! most [`MAX_HALVINGS`] times.

use crate::error::{Error, Result};
use crate::poly;
use num_complex::Complex64;

pub const MAX_HALVINGS: u32 = 12;

#[derive(Debug, Clone)]
pub struct TrackOptions {
    /// Base number of steps across `[0, 1]`.
    pub steps: usize,
    pub max_halvings: u32,
    /// Keep every accepted root set.
    pub record: bool,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { steps: 2048, max_halvings: MAX_HALVINGS, record: false }
    }
}

#[derive(Debug, Clone)]
pub struct Track {
    /// Distinct roots at `s = 0`.
    pub start: Vec<Complex64>,
    /// Position at `s = 1` of the path starting at `start[i]`.
    pub end: Vec<Complex64>,
    /// Accumulated argument change of each path (radians).
    pub phase: Vec<f64>,
    /// `(s, roots)` at each accepted step when recording.
    pub trajectory: Vec<(f64, Vec<Complex64>)>,
    pub steps_taken: usize,
}

impl Track {
    /// For a closed family (`p_0 = p_1`), the permutation `i -> j` with
    /// `end[i] ≈ start[j]`.
    pub fn closing_permutation(&self) -> Result<Vec<usize>> {
        let scale = self.start.iter().map(|r| r.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut perm = Vec::with_capacity(self.end.len());
        for e in &self.end {
            let (j, d) = nearest(&self.start, *e);
            if d > 1e-6 * scale {
                return Err(Error::ContinuationFailed { start: 1.0, end: 1.0 });
            }
            perm.push(j);
        }
        let mut seen = vec![false; perm.len()];
        for &j in &perm {
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::ContinuationFailed { start: 1.0, end: 1.0 });
            }
        }
        Ok(perm)
    }
}

fn nearest(set: &[Complex64], z: Complex64) -> (usize, f64) {
    set.iter()
        .enumerate()
        .map(|(j, r)| (j, (r - z).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, f64::INFINITY))
}

/// Distinct roots sorted by argument in `[0, 2π)`, then modulus.
pub fn sorted_distinct_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut roots = poly::all_roots(coeffs)?.distinct();
    roots.sort_by(|a, b| {
        let ka = a.arg().rem_euclid(std::f64::consts::TAU);
        let kb = b.arg().rem_euclid(std::f64::consts::TAU);
        ka.total_cmp(&kb).then(a.norm().total_cmp(&b.norm()))
    });
    Ok(roots)
}

/// Matches `prev` to `next`; `None` when ambiguous or not a bijection.
fn match_roots(prev: &[Complex64], next: &[Complex64]) -> Option<Vec<usize>> {
    if prev.len() != next.len() {
        return None;
    }
    let mut assignment = Vec::with_capacity(prev.len());
    let mut used = vec![false; next.len()];
    for p in prev {
        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        let mut j1 = usize::MAX;
        for (j, q) in next.iter().enumerate() {
            let d = (p - q).norm();
            if d < d1 {
                d2 = d1;
                d1 = d;
                j1 = j;
            } else if d < d2 {
                d2 = d;
            }
        }
        if next.len() > 1 && d2 < 2.0 * d1 {
            return None;
        }
        if j1 == usize::MAX || std::mem::replace(&mut used[j1], true) {
            return None;
        }
        assignment.push(j1);
    }
    Some(assignment)
}

/// Tracks every distinct root of `coeffs_at(0)` to `s = 1`.
pub fn track_roots<F>(coeffs_at: F, options: &TrackOptions) -> Result<Track>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    if options.steps == 0 {
        return Err(Error::InvalidArgument("continuation needs at least one step".into()));
    }
    let start = sorted_distinct_roots(&coeffs_at(0.0))?;
    let mut current = start.clone();
    let mut phase = vec![0.0; start.len()];
    let mut trajectory = Vec::new();
    if options.record {
        trajectory.push((0.0, current.clone()));
    }

    let base = 1.0 / options.steps as f64;
    let min_step = base / f64::powi(2.0, options.max_halvings as i32);
    let mut s = 0.0;
    let mut h = base;
    let mut steps_taken = 0;
    while s < 1.0 {
        let target = if s + h >= 1.0 - 1e-15 { 1.0 } else { s + h };
        let next = poly::all_roots(&coeffs_at(target)).map(|r| r.distinct());
        let matched = next.as_ref().ok().and_then(|n| match_roots(&current, n));
        match (next, matched) {
            (Ok(next), Some(assignment)) => {
                let moved: Vec<Complex64> = assignment.iter().map(|&j| next[j]).collect();
                for (i, (old, new)) in current.iter().zip(&moved).enumerate() {
                    if old.norm() > 0.0 && new.norm() > 0.0 {
                        phase[i] += (new / old).arg();
                    }
                }
                current = moved;
                s = target;
                steps_taken += 1;
                if options.record {
                    trajectory.push((s, current.clone()));
                }
                // recover the base step after a refined stretch
                h = (h * 2.0).min(base);
            }
            _ => {
                if h <= min_step * (1.0 + 1e-9) {
                    return Err(Error::ContinuationFailed { start: s, end: target });
                }
                h /= 2.0;
            }
        }
    }
    Ok(Track { start, end: current, phase, trajectory, steps_taken })
}
