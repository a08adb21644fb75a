use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn singlab(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_singlab"));
    cmd.args(args).env_remove("SINGLAB_SEED");
    if let Some(s) = env_seed {
        cmd.env("SINGLAB_SEED", s);
    }
    cmd.output().unwrap()
}

fn run(experiment: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![experiment, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    singlab(&args, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const BS: &str = "[[surface]]\nname = \"briancon-speder\"\n";

#[test]
fn mu_constancy_prints_364_for_each_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for t in ["0", "0.1", "1", "[0.0, 1.0]"] {
        text += &format!("{BS}t = {t}\n");
    }
    let cfg = write_config(dir.path(), "mu.toml", &text);
    let o = run("mu-constancy", &cfg, &dir.path().join("out"), &["--expect", "mu-constant"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("mu = 364").count(), 4);
    let o = run("mu-constancy", &cfg, &dir.path().join("out2"), &["--expect", "mu-varies"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(std::fs::read_to_string(dir.path().join("out2/summary.txt")).unwrap().contains("MISMATCH"));
}

#[test]
fn slice_components_distinguish_t() {
    let dir = tempfile::tempdir().unwrap();
    for (t, want, verdict) in [("0", "1 slice component", "connected"), ("1", "3 slice component", "disconnected")] {
        let cfg = write_config(dir.path(), "s.toml", &format!("{BS}t = {t}\n"));
        let o = run("slice-components", &cfg, &dir.path().join(format!("out{t}")), &["--expect", verdict]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).contains(want), "{}", stdout(&o));
    }
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.toml", &format!("{BS}t = 0\n"));
    let out = dir.path().join("out");
    let o = run("monodromy", &cfg, &out, &["--expect", "transitive"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for f in ["report.json", "summary.txt", "run_meta.json", "monodromy_permutations.csv", "monodromy_trajectory_0.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config"]["parameters"]["anchor_tolerance"], 1e-6);
    assert!(report["config"]["surfaces"][0]["definition"].as_str().unwrap().contains("weights 3 2 1"));
    assert!(!report.to_string().contains("unix_ms"));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run_meta.json")).unwrap()).unwrap();
    assert!(meta["started_unix_ms"].as_u64().unwrap() > 0);
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "seed = 11\n[[surface]]\nname = \"briancon-speder\"\nt = 0\n[conicality]\nn = 600\nr_ladder = [0.1, 0.05]\n",
    );
    let read = |threads: &str| {
        let out = dir.path().join(format!("t{threads}"));
        let o = run("conicality", &cfg, &out, &["--threads", threads]);
        assert!(o.status.code() == Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(out.join("report.json")).unwrap(), std::fs::read(out.join("conicality.csv")).unwrap())
    };
    assert_eq!(read("1"), read("3"));
}

#[test]
fn seed_sources_take_precedence_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.toml", "seed = 5\n[density_anchors]\nn = 500\nn_comparability = 500\n");
    let seed_of = |args: &[&str], env: Option<&str>| {
        let out = dir.path().join(format!("o{}", args.len() * 10 + env.map_or(0, str::len)));
        let mut all = vec!["density-anchors", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        all.extend_from_slice(args);
        let o = singlab(&all, env);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        r["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&[], None), 5);
    assert_eq!(seed_of(&[], Some("77")), 77);
    assert_eq!(seed_of(&["--seed", "9"], Some("77")), 9);
}

#[test]
fn invalid_configs_exit_1_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &format!("{BS}t = 1\n[separating]\nladder = [0.1, 0.2]\n"));
    let o = run("separating", &cfg, &dir.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ladder must be decreasing"));

    let cfg = write_config(dir.path(), "none.toml", "seed = 1\n");
    let o = run("separating", &cfg, &dir.path().join("o"), &["--check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing surface"));

    let cfg = write_config(dir.path(), "syntax.toml", "seed = 1\n[[surface]]\nname = briancon\n");
    let o = run("slice-components", &cfg, &dir.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3, column"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_flag_accepts_valid_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.toml", &format!("{BS}t = 1\n"));
    let o = run("separating", &cfg, &dir.path().join("o"), &["--check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn one_component_surface_gives_no_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s0.toml", &format!("{BS}t = 0\n"));
    let o = run("separating", &cfg, &dir.path().join("o"), &["--expect", "no-evidence"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn sub_operation_failures_exit_1_and_are_reported() {
    // the derivative bounds exist only for x^5 + z^15 + y^7 z
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "l.toml", &format!("{BS}t = 1\n"));
    let out = dir.path().join("o");
    let o = run("lipschitz-bounds", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(r.contains("not applicable"), "{r}");
}
