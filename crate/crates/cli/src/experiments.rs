//! The nine experiments. Each turns a validated config into an [`Outcome`]:
//! a verdict, named checks, a JSON result body, CSV tables and summary lines.

use crate::config::{ExperimentConfig, LoopConfig, LoopShape};
use serde::Serialize;
use serde_json::{json, Value};
use singlab_core::covering::{
    conicality_probe, cover_connectivity, inverse, lift_loop, lipschitz_bound_probe, nearest_root_index, LoopSpec,
    MonodromyResult,
};
use singlab_core::metric::{density_comparability, density_ladder, FlatPlane, LadderOptions, Verdict};
use singlab_core::rng::derive_seed;
use singlab_core::sampling::{RegionKind, RegionSpec};
use singlab_core::separating::{
    bipartitions, conflict_set, default_partition, flow_cone, geometric_ladder, separating_certificate,
    tangent_cone_collapse, thin_wedge_volume, CertificateParams, CertificateVerdict,
};
use singlab_core::surfaces::{slice_structure, write_surface};
use singlab_core::{Complex64, ComplexPoint3, WeightedSurface};
use std::f64::consts::PI;

/// One named pass/fail check with a human-readable detail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// A CSV file written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub verdict: String,
    pub checks: Vec<Check>,
    pub results: Value,
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
    /// Sub-operation failures; any entry makes the run fail.
    pub errors: Vec<String>,
}

impl Outcome {
    fn new(verdict: impl Into<String>) -> Self {
        Self {
            verdict: verdict.into(),
            checks: Vec::new(),
            results: Value::Null,
            tables: Vec::new(),
            summary: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn check(&mut self, check: Check) {
        self.summary.push(format!("check {}: {} ({})", check.name, if check.pass { "pass" } else { "FAIL" }, check.detail));
        self.checks.push(check);
    }
}

/// The resolved form of one surface as embedded in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedSurface {
    pub label: String,
    pub weights: [u32; 3],
    pub degree: u32,
    /// Canonical surface-file text.
    pub definition: String,
}

impl ResolvedSurface {
    pub fn new(s: &WeightedSurface) -> Self {
        Self { label: s.label().to_string(), weights: s.weights(), degree: s.degree(), definition: write_surface(s) }
    }
}

/// Seed for the `index`-th surface of a run; the first uses the master seed.
pub fn surface_seed(seed: u64, index: usize) -> u64 {
    if index == 0 {
        seed
    } else {
        derive_seed(seed, index as u64)
    }
}

/// The common verdict of a list, or `mixed`.
fn unanimous(verdicts: &[String]) -> String {
    match verdicts.first() {
        Some(v) if verdicts.iter().all(|w| w == v) => v.clone(),
        Some(_) => "mixed".into(),
        None => "none".into(),
    }
}

/// The experiment-specific section of the config, as embedded in reports.
pub fn section(config: &ExperimentConfig, experiment: &str) -> Value {
    let v = match experiment {
        "separating" => serde_json::to_value(&config.separating),
        "tangent-cone" => serde_json::to_value(&config.tangent_cone),
        "thin-wedge" => serde_json::to_value(&config.thin_wedge),
        "monodromy" => serde_json::to_value(&config.monodromy),
        "lipschitz-bounds" => serde_json::to_value(&config.lipschitz_bounds),
        "conicality" => serde_json::to_value(&config.conicality),
        "density-anchors" => serde_json::to_value(&config.density_anchors),
        _ => Ok(json!({})),
    };
    v.expect("config sections serialise")
}

/// Runs `experiment` on already-resolved surfaces.
pub fn run_experiment(config: &ExperimentConfig, experiment: &str, surfaces: &[WeightedSurface], seed: u64) -> Outcome {
    match experiment {
        "mu-constancy" => mu_constancy(surfaces),
        "slice-components" => slice_components(surfaces),
        "separating" => separating(config, surfaces, seed),
        "tangent-cone" => tangent_cone(config, surfaces, seed),
        "thin-wedge" => thin_wedge(config, surfaces, seed),
        "monodromy" => monodromy(config, &surfaces[0]),
        "lipschitz-bounds" => lipschitz_bounds(config, &surfaces[0], seed),
        "conicality" => conicality(config, &surfaces[0], seed),
        "density-anchors" => density_anchors(config, seed),
        other => {
            let mut o = Outcome::new("error");
            o.errors.push(format!("unknown experiment `{other}`"));
            o
        }
    }
}

fn mu_constancy(surfaces: &[WeightedSurface]) -> Outcome {
    let mut o = Outcome::new("");
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for s in surfaces {
        match s.milnor_number() {
            Ok(mu) => {
                o.summary.push(format!("{}: mu = {mu}", s.label()));
                rows.push(json!({ "surface": s.label(), "milnor_number": mu }));
                values.push(mu);
            }
            Err(e) => {
                o.errors.push(format!("{}: {e}", s.label()));
                rows.push(json!({ "surface": s.label(), "error": e.to_string() }));
            }
        }
    }
    let constant = !values.is_empty() && values.iter().all(|&m| m == values[0]);
    o.verdict = if constant { "mu-constant" } else { "mu-varies" }.into();
    o.results = json!({ "surfaces": rows });
    o
}

fn slice_components(surfaces: &[WeightedSurface]) -> Outcome {
    let mut o = Outcome::new("");
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut csv = String::from("surface,components\n");
    for s in surfaces {
        match slice_structure(s) {
            Ok(st) => {
                let n = st.component_count;
                o.summary.push(format!("{}: {n} slice component(s) [{}]", s.label(), st.describe().join("; ")));
                csv += &format!("{},{n}\n", s.label());
                rows.push(json!({ "surface": s.label(), "components": n, "branches": st.describe() }));
                verdicts.push(if n >= 2 { "disconnected" } else { "connected" }.to_string());
            }
            Err(e) => {
                o.errors.push(format!("{}: {e}", s.label()));
                rows.push(json!({ "surface": s.label(), "error": e.to_string() }));
            }
        }
    }
    o.verdict = unanimous(&verdicts);
    o.results = json!({ "surfaces": rows });
    o.tables.push(Table { file: "slice_components.csv".into(), content: csv });
    o
}

fn separating(config: &ExperimentConfig, surfaces: &[WeightedSurface], seed: u64) -> Outcome {
    let sec = &config.separating;
    let mut o = Outcome::new("");
    let mut certs = Vec::new();
    let mut verdicts = Vec::new();
    for (i, s) in surfaces.iter().enumerate() {
        let base = CertificateParams {
            link_radius: sec.link_radius,
            tau_factor: sec.tau_factor,
            side_tau_factor: sec.side_tau_factor,
            slice_samples: sec.slice_samples,
            a_labels: sec.a_labels.clone(),
            b_labels: sec.b_labels.clone(),
            ladder: sec.ladder.clone(),
            n_cone: sec.n_cone,
            n_sides: sec.n_sides,
            quadrature_nodes: sec.quadrature_nodes,
            threshold: sec.threshold,
            seed: surface_seed(seed, i),
            map: None,
        };
        let splits = if sec.all_bipartitions {
            match slice_structure(s) {
                Ok(st) if st.component_count >= 2 => bipartitions(st.component_count),
                _ => vec![],
            }
        } else {
            vec![]
        };
        let runs: Vec<CertificateParams> = if splits.is_empty() {
            vec![base]
        } else {
            splits.into_iter().map(|(a, b)| CertificateParams { a_labels: Some(a), b_labels: Some(b), ..base.clone() }).collect()
        };
        for params in runs {
            let cert = separating_certificate(s, &params);
            let tag = format!("{}_{}", certs.len(), slug(s.label()));
            for (name, rep) in [("cone", &cert.cone_report), ("side_a", &cert.side_a_report), ("side_b", &cert.side_b_report)] {
                if let Some(r) = rep {
                    o.tables.push(Table { file: format!("separating_{tag}_{name}.csv"), content: r.to_csv() });
                }
            }
            if let Some(f) = &cert.failure {
                o.errors.push(format!("{}: {f}", s.label()));
            }
            o.summary.push(format!(
                "{} A={:?} B={:?}: {} ({})",
                s.label(),
                cert.a_labels,
                cert.b_labels,
                cert.verdict.as_str(),
                cert.reason
            ));
            if let Some(m) = &cert.cone_report {
                if let (Some(a), Some(se)) = (m.alpha, m.alpha_se) {
                    let pass = cert.verdict != CertificateVerdict::SeparatingEvidence || a > 3.0 + 3.0 * se;
                    o.check(Check::new(format!("cone exponent {tag}"), pass, format!("alpha = {a:.4} +- {se:.4}")));
                }
            }
            verdicts.push(cert.verdict.as_str().to_string());
            certs.push(cert);
        }
    }
    o.verdict = unanimous(&verdicts);
    o.results = json!({ "certificates": certs });
    o
}

fn slug(label: &str) -> String {
    let s: String = label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '-' }).collect();
    s.split('-').filter(|p| !p.is_empty()).collect::<Vec<_>>().join("-")
}

fn tangent_cone(config: &ExperimentConfig, surfaces: &[WeightedSurface], seed: u64) -> Outcome {
    let sec = &config.tangent_cone;
    let mut o = Outcome::new("");
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (i, s) in surfaces.iter().enumerate() {
        let run = || -> singlab_core::Result<_> {
            let (a, b) = match (&sec.a_labels, &sec.b_labels) {
                (Some(a), Some(b)) => (a.clone(), b.clone()),
                _ => default_partition(&slice_structure(s)?),
            };
            let tau = sec.tau_factor * sec.link_radius;
            let cloud = conflict_set(s, sec.link_radius, &a, &b, sec.n, tau, sec.slice_samples, surface_seed(seed, i))?;
            let ladder = geometric_ladder(sec.link_radius, sec.final_ratio, sec.rungs);
            let flowed = flow_cone(s, &cloud, &ladder)?;
            Ok((cloud.len(), tangent_cone_collapse(&flowed)?))
        };
        match run() {
            Ok((points, rep)) => {
                let mut csv = String::from("radius,max_transverse_ratio\n");
                for (r, m) in rep.radii.iter().zip(&rep.max_ratio) {
                    csv += &format!("{r:?},{m:?}\n");
                }
                o.tables.push(Table { file: format!("tangent_cone_{i}_{}.csv", slug(s.label())), content: csv });
                o.summary.push(format!(
                    "{}: {points} conflict points, slope {:.4}, final ratio {:.3e}, {}",
                    s.label(),
                    rep.slope,
                    rep.final_ratio,
                    if rep.collapsed { "collapsed" } else { "not collapsed" }
                ));
                verdicts.push(if rep.collapsed { "collapsed" } else { "not-collapsed" }.to_string());
                rows.push(json!({ "surface": s.label(), "conflict_points": points, "collapse": rep }));
            }
            Err(e) => {
                o.errors.push(format!("{}: {e}", s.label()));
                rows.push(json!({ "surface": s.label(), "error": e.to_string() }));
            }
        }
    }
    o.verdict = unanimous(&verdicts);
    o.results = json!({ "surfaces": rows });
    o
}

fn thin_wedge(config: &ExperimentConfig, surfaces: &[WeightedSurface], seed: u64) -> Outcome {
    let sec = &config.thin_wedge;
    let mut o = Outcome::new("");
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (i, s) in surfaces.iter().enumerate() {
        match thin_wedge_volume(s, &sec.eps_ladder, &sec.r_ladder, sec.n, surface_seed(seed, i)) {
            Ok(t) => {
                let tag = format!("{i}_{}", slug(s.label()));
                o.tables.push(Table { file: format!("thin_wedge_{tag}.csv"), content: t.to_csv() });
                let slopes_ok = t.r_slopes.iter().all(|v| v.is_some_and(|a| (a - 4.0).abs() <= sec.slope_tolerance));
                let slopes: Vec<String> =
                    t.r_slopes.iter().map(|v| v.map_or("n/a".into(), |a| format!("{a:.3}"))).collect();
                let eps_max = t.eps_spread.iter().copied().fold(0.0, f64::max);
                let eps_ok = eps_max <= sec.eps_factor;
                let k_ok = t.spread <= sec.k_spread && t.cells.iter().all(|c| !c.flagged);
                o.check(Check::new(
                    format!("r-exponent {tag}"),
                    slopes_ok,
                    format!("exponents [{}] vs 4 +- {}", slopes.join(", "), sec.slope_tolerance),
                ));
                o.check(Check::new(
                    format!("proportional to eps_w {tag}"),
                    eps_ok,
                    format!("largest K spread across eps_w {eps_max:.3} vs {}", sec.eps_factor),
                ));
                o.check(Check::new(
                    format!("K stable {tag}"),
                    k_ok,
                    format!("K_hat {:.4}, spread {:.3} vs {}", t.k_hat, t.spread, sec.k_spread),
                ));
                let holds = slopes_ok && eps_ok && k_ok;
                verdicts.push(if holds { "volume-law-holds" } else { "volume-law-fails" }.to_string());
                rows.push(json!({ "surface": s.label(), "table": t }));
            }
            Err(e) => {
                o.errors.push(format!("{}: {e}", s.label()));
                rows.push(json!({ "surface": s.label(), "error": e.to_string() }));
            }
        }
    }
    o.verdict = unanimous(&verdicts);
    o.results = json!({ "surfaces": rows });
    o
}

fn loop_spec(l: &LoopConfig) -> LoopSpec {
    let base = match l.shape {
        LoopShape::CircleInY => LoopSpec::circle_in_y(l.c),
        LoopShape::CircleInZ => LoopSpec::circle_in_z(l.c),
    };
    base.with_turns(l.turns).with_steps(l.steps)
}

/// Closed-form check of the standard loop on `x⁵ + z¹⁵ + y⁷z`: the root
/// starting near `-c^{8/5}` ends near `-c^{8/5} e^{14πi/5}` after one turn.
fn winding_anchor(s: &WeightedSurface, l: &LoopConfig, record: bool) -> singlab_core::Result<(MonodromyResult, f64)> {
    let spec = loop_spec(l);
    let probe = lift_loop(s, &spec, 0, false)?;
    let scale = l.c.powf(1.6);
    let start = nearest_root_index(&probe, Complex64::new(-scale, 0.0));
    let r = lift_loop(s, &spec, start, record)?;
    let expected = Complex64::from_polar(scale, 14.0 * PI / 5.0);
    let rel = (-r.end() - expected).norm() / expected.norm();
    Ok((r, rel))
}

fn monodromy(config: &ExperimentConfig, s: &WeightedSurface) -> Outcome {
    let sec = &config.monodromy;
    let mut o = Outcome::new("");
    let specs: Vec<LoopSpec> = sec.loops.iter().map(loop_spec).collect();
    let conn = match cover_connectivity(s, sec.region_eps, &specs) {
        Ok(c) => c,
        Err(e) => {
            o.verdict = "error".into();
            o.errors.push(e.to_string());
            return o;
        }
    };
    let mut perm_csv = String::from("loop,shape,c,turns,steps,permutation,sheet_shift,phase\n");
    let mut loops = Vec::new();
    let mut consistent = true;
    for (i, (l, r)) in sec.loops.iter().zip(&conn.results).enumerate() {
        let perm: Vec<String> = r.permutation.iter().map(|v| v.to_string()).collect();
        perm_csv += &format!(
            "{i},{},{:?},{},{},{},{},{:?}\n",
            serde_json::to_value(l.shape).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            l.c,
            l.turns,
            l.steps,
            perm.join(" "),
            r.sheet_shift(),
            r.phase
        );
        let mut entry = json!({ "loop": l, "lift": r });
        let spec = &specs[i];
        match lift_loop(s, &spec.reversed(), 0, false) {
            Ok(back) => {
                let pass = back.permutation == inverse(&r.permutation);
                consistent &= pass;
                o.check(Check::new(format!("reverse loop {i}"), pass, format!("{:?} vs {:?}", back.permutation, r.permutation)));
            }
            Err(e) => o.errors.push(format!("reverse of loop {i}: {e}")),
        }
        match lift_loop(s, &spec.clone().with_steps(spec.steps * 2), r.start_index, false) {
            Ok(fine) => {
                let gap = (fine.phase - r.phase).abs();
                let pass = fine.permutation == r.permutation && gap < 1e-6;
                consistent &= pass;
                o.check(Check::new(format!("doubled resolution {i}"), pass, format!("phase change {gap:.2e}")));
            }
            Err(e) => o.errors.push(format!("refined loop {i}: {e}")),
        }
        if s.is_briancon_speder_zero() && l.shape == LoopShape::CircleInY && l.turns == 1 {
            match winding_anchor(s, l, sec.record_trajectory) {
                Ok((anchor, rel)) => {
                    let shift = anchor.sheet_shift();
                    let pass = rel <= sec.anchor_tolerance && shift == 2;
                    consistent &= pass;
                    o.check(Check::new(
                        format!("winding anchor {i}"),
                        pass,
                        format!("relative error {rel:.3e}, phase/pi {:.12}, sheet shift {shift}", anchor.phase / PI),
                    ));
                    if let Some(csv) = anchor.trajectory_csv() {
                        o.tables.push(Table { file: format!("monodromy_trajectory_{i}.csv"), content: csv });
                    }
                    let expected = Complex64::from_polar(l.c.powf(1.6), 14.0 * PI / 5.0);
                    entry["anchor"] = json!({
                        "start_root": anchor.start_root,
                        "end_root": anchor.end_root,
                        "expected_end": [-expected.re, -expected.im],
                        "relative_error": rel,
                        "phase": anchor.phase,
                        "sheet_shift": shift,
                    });
                }
                Err(e) => o.errors.push(format!("winding anchor {i}: {e}")),
            }
        }
        o.summary.push(format!(
            "loop {i} ({:?}, c = {}, turns = {}): permutation {:?}, sheet shift {}",
            l.shape,
            l.c,
            l.turns,
            r.permutation,
            r.sheet_shift()
        ));
        loops.push(entry);
    }
    o.summary.push(format!(
        "group: order {}, {}, {}",
        conn.group_order,
        if conn.transitive { "transitive" } else { "intransitive" },
        if conn.cyclic { "cyclic" } else { "not cyclic" }
    ));
    o.tables.push(Table { file: "monodromy_permutations.csv".into(), content: perm_csv });
    o.verdict = if !consistent {
        "inconsistent-lift"
    } else if conn.transitive {
        "transitive"
    } else {
        "intransitive"
    }
    .into();
    o.results = json!({
        "sheet_count": conn.sheet_count,
        "transitive": conn.transitive,
        "group_order": conn.group_order,
        "cyclic": conn.cyclic,
        "loops": loops,
    });
    o
}

fn lipschitz_bounds(config: &ExperimentConfig, s: &WeightedSurface, seed: u64) -> Outcome {
    let sec = &config.lipschitz_bounds;
    let mut o = Outcome::new("");
    match lipschitz_bound_probe(s, sec.eps_w, sec.disk(), sec.n, seed) {
        Ok(r) => {
            o.check(Check::new(
                "dx/dy bound",
                r.ratio_dx_dy <= 1.0,
                format!("sup^5 {:.4e} / bound {:.4e} = {:.4}", r.sup_dx_dy.powi(5), r.bound_dx_dy, r.ratio_dx_dy),
            ));
            o.check(Check::new(
                "dx/dz bound",
                r.ratio_dx_dz <= 1.0,
                format!("sup^5 {:.4e} / bound {:.4e} = {:.4}", r.sup_dx_dz.powi(5), r.bound_dx_dz, r.ratio_dx_dz),
            ));
            o.summary.push(format!("lambda_hat = {:.6}, closed-form gap {:.2e}", r.lambda_hat, r.closed_form_gap));
            o.tables.push(Table {
                file: "lipschitz.csv".into(),
                content: format!(
                    "eps_w,disk_radius,samples,sup_dx_dy,sup_dx_dz,lambda_hat,bound_dx_dy,bound_dx_dz,ratio_dx_dy,ratio_dx_dz\n{:?},{:?},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
                    r.eps_w, r.disk_radius, r.samples, r.sup_dx_dy, r.sup_dx_dz, r.lambda_hat, r.bound_dx_dy, r.bound_dx_dz, r.ratio_dx_dy, r.ratio_dx_dz
                ),
            });
            o.verdict = if r.pass { "bounds-hold" } else { "bounds-violated" }.into();
            o.results = json!({ "probe": r });
        }
        Err(e) => {
            o.verdict = "error".into();
            o.errors.push(e.to_string());
        }
    }
    o
}

fn conicality(config: &ExperimentConfig, s: &WeightedSurface, seed: u64) -> Outcome {
    let sec = &config.conicality;
    let mut o = Outcome::new("");
    let run = || -> singlab_core::Result<_> {
        let region = RegionSpec::new(RegionKind::Wedge, 1.0, sec.eps_w, Vec::new())?;
        conicality_probe(&singlab_core::metric::SurfaceBall { surface: s, region: Some(region) }, &sec.r_ladder, sec.n, seed)
    };
    match run() {
        Ok(rep) => {
            let live: Vec<_> = rep.rungs.iter().filter(|r| !r.flagged && r.pairs > 0).collect();
            let all_live = live.len() == rep.rungs.len();
            let medians_ok = live.iter().all(|r| (r.median_ratio - 1.0).abs() <= sec.median_tolerance);
            let sizes: Vec<f64> = live.iter().map(|r| r.mean_inner_over_r).collect();
            let spread = sizes.iter().copied().fold(0.0, f64::max) / sizes.iter().copied().fold(f64::INFINITY, f64::min);
            let spread_ok = spread.is_finite() && spread <= sec.scale_spread;
            o.check(Check::new("rungs populated", all_live, format!("{} of {} rungs usable", live.len(), rep.rungs.len())));
            o.check(Check::new(
                "median distortion",
                medians_ok,
                format!("medians {:?}", live.iter().map(|r| (r.median_ratio * 1e4).round() / 1e4).collect::<Vec<_>>()),
            ));
            o.check(Check::new("scale invariance", spread_ok, format!("mean inner/r spread {spread:.4} vs {}", sec.scale_spread)));
            o.summary.push(format!("max ratio {:.4}, trend slope of max ratio {:.4}", rep.max_ratio, rep.trend_slope));
            o.tables.push(Table { file: "conicality.csv".into(), content: rep.to_csv() });
            o.verdict = if all_live && medians_ok && spread_ok { "conical" } else { "not-conical" }.into();
            o.results = json!({ "report": rep, "scale_spread": spread });
        }
        Err(e) => {
            o.verdict = "error".into();
            o.errors.push(e.to_string());
        }
    }
    o
}

fn density_anchors(config: &ExperimentConfig, seed: u64) -> Outcome {
    let sec = &config.density_anchors;
    let mut o = Outcome::new("");
    let plane = FlatPlane { dim: 3 };
    let mut opts = LadderOptions::new(3, sec.ladder.clone(), sec.n, seed);
    opts.threshold = sec.threshold;
    type Pred = Box<dyn Fn(&ComplexPoint3) -> bool + Sync>;
    let sets: [(&str, Pred, f64); 3] = [
        ("plane", Box::new(|_: &ComplexPoint3| true), 1.0),
        ("half-plane", Box::new(|p: &ComplexPoint3| p.x.re >= 0.0), 0.5),
        ("quarter-plane", Box::new(|p: &ComplexPoint3| p.x.re >= 0.0 && p.x.im >= 0.0), 0.25),
    ];
    let mut reports = Vec::new();
    let mut all = true;
    for (name, pred, target) in &sets {
        match density_ladder(&plane, pred.as_ref(), &opts) {
            Ok(r) => {
                // exact estimators can report zero spread; allow rounding there
                let tol = (3.0 * r.theta_star_se).max(1e-9);
                let pass = (r.theta_star - target).abs() <= tol && r.verdict == Verdict::PositiveDensity;
                all &= pass;
                o.check(Check::new(
                    format!("theta* {name}"),
                    pass,
                    format!("{:.5} +- {:.5} vs {target}", r.theta_star, r.theta_star_se),
                ));
                o.tables.push(Table { file: format!("density_{name}.csv"), content: r.to_csv() });
                reports.push(json!({ "set": name, "target": target, "report": r }));
            }
            Err(e) => o.errors.push(format!("{name}: {e}")),
        }
    }
    let copts = LadderOptions::new(3, sec.ladder.clone(), sec.n_comparability, derive_seed(seed, 0xC0));
    let comparability = match density_comparability(&plane, &|_| true, &copts) {
        Ok((k1, k2)) => {
            let [lo, hi] = sec.comparability;
            let pass = lo <= k1 && k2 <= hi;
            all &= pass;
            o.check(Check::new("inner/outer comparability", pass, format!("[{k1:.4}, {k2:.4}] within [{lo}, {hi}]")));
            json!([k1, k2])
        }
        Err(e) => {
            o.errors.push(format!("comparability: {e}"));
            Value::Null
        }
    };
    o.verdict = if all { "anchors-hold" } else { "anchors-fail" }.into();
    o.results = json!({ "anchors": reports, "comparability": comparability });
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use singlab_core::briancon_speder;

    #[test]
    fn unanimous_verdicts() {
        assert_eq!(unanimous(&["a".into(), "a".into()]), "a");
        assert_eq!(unanimous(&["a".into(), "b".into()]), "mixed");
        assert_eq!(unanimous(&[]), "none");
    }

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(slug("briancon-speder(t=1+0i)"), "briancon-speder-t-1-0i");
    }

    #[test]
    fn first_surface_keeps_the_master_seed() {
        assert_eq!(surface_seed(42, 0), 42);
        assert_ne!(surface_seed(42, 1), 42);
    }

    #[test]
    fn mu_is_reported_per_surface() {
        let s = [briancon_speder(Complex64::new(0.0, 0.0)), briancon_speder(Complex64::new(0.0, 1.0))];
        let o = mu_constancy(&s);
        assert_eq!(o.verdict, "mu-constant");
        assert!(o.summary.iter().all(|l| l.ends_with("mu = 364")));
    }
}
