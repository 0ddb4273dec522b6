use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hopfduet"));
    c.env_remove("HOPFDUET_OUTDIR");
    c
}

fn run_with(dir: &Path, config: &str, args: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let o = bin()
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    (o, out)
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(r) => r.map(|e| e.unwrap().path()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

fn find(dir: &Path, suffix: &str) -> PathBuf {
    files(dir)
        .into_iter()
        .find(|p| {
            let n = p.file_name().unwrap().to_str().unwrap();
            n.ends_with(suffix) && !n[..n.len() - suffix.len()].contains('.')
        })
        .unwrap_or_else(|| panic!("no *{suffix} in {}", dir.display()))
}

/// Data rows of a CSV output (header comment and column line dropped).
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# hopfduet schema=1"));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

const UNCOUPLED: &str = r#"{"omega":1.0,"alpha01_re":-1.0,"alpha01_im":0.5,
 "alpha_eps0_re":0,"alpha_eps0_im":0,"alpha_eps1_re":0,"alpha_eps1_im":0,"alpha_eps2_re":0,"alpha_eps2_im":0,
 "alpha_eps3_re":0,"alpha_eps3_im":0,"beta_eps0_re":0,"beta_eps0_im":0,"beta_eps1_re":0,"beta_eps1_im":0,
 "beta_eps2_re":0,"beta_eps2_im":0,"beta_eps3_re":0,"beta_eps3_im":0}"#;

#[test]
fn curves_report_bistable_region_for_negative_bsp() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = run_with(d.path(), r#"{"nf":{"table":"negative-bsp"}}"#, &["nf", "curves"]);
    ok(&o);
    let v: Value = serde_json::from_str(&fs::read_to_string(find(&out, ".regions.json")).unwrap()).unwrap();
    assert_eq!(v["classification"]["case_label"], "case1");
    assert_eq!(v["classification"]["hopf_subcase"], "hopf-possible");
    assert!(!v["regions"]["bistable"].as_array().unwrap().is_empty());
    assert_eq!(v["schema_version"], 1);
    let r = rows(&find(&out, ".csv"));
    for curve in ["HB", "TR0", "DET0"] {
        assert!(r.iter().any(|x| x[1] == curve), "{curve} missing");
    }
    assert!(find(&out, ".svg").exists());
}

#[test]
fn uncoupled_hopf_curves_sit_on_lambda_zero() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"nf":{{"coefficients":{UNCOUPLED}}},"curves":{{"n_eps":10}}}}"#);
    let (o, out) = run_with(d.path(), &cfg, &["nf", "curves"]);
    ok(&o);
    let hb: Vec<Vec<String>> = rows(&find(&out, ".csv")).into_iter().filter(|r| r[1] == "HB").collect();
    assert_eq!(hb.len(), 20);
    for branch in ["plus", "minus"] {
        assert!(hb.iter().filter(|r| r[0] == branch).all(|r| r[3].parse::<f64>().unwrap() == 0.0));
    }
}

#[test]
fn malformed_config_exits_2_without_files() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = run_with(d.path(), r#"{"nf": {"table": "negative-bsp""#, &["nf", "curves"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(files(&out).is_empty());
}

#[test]
fn unknown_key_is_named() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = run_with(d.path(), r#"{"nf":{"table":"negative-bsp","lamda":0.1}}"#, &["nf", "curves"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lamda"));
    assert!(files(&out).is_empty());
}

#[test]
fn invalid_value_names_the_field() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"wc":{"preset":"paperP","tau":-1}}"#;
    let (o, _) = run_with(d.path(), cfg, &["wc", "extract"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("wc"));
    let (o, _) = run_with(d.path(), r#"{"nf":{"table":"nope"}}"#, &["nf", "curves"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nf.table"));
}

#[test]
fn extraction_failure_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = run_with(d.path(), r#"{"wc":{"preset":"paperP","b":0}}"#, &["wc", "extract"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(files(&out).is_empty());
}

fn extract(b_sp: f64) -> (Value, Vec<Vec<String>>) {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = run_with(d.path(), &format!(r#"{{"wc":{{"preset":"paperP","b_sp":{b_sp}}}}}"#), &["wc", "extract"]);
    ok(&o);
    let v = serde_json::from_str(&fs::read_to_string(find(&out, ".json")).unwrap()).unwrap();
    (v, rows(&find(&out, ".csv")))
}

#[test]
fn extract_zero_bsp_is_degenerate_case() {
    let (v, r) = extract(0.0);
    assert!(v["coefficients"]["beta_eps0_re"].as_f64().unwrap().abs() < 1e-6);
    assert!(r.iter().any(|x| x[0] == "case" && x[1] == "case3"));
}

#[test]
fn extract_negative_bsp_reports_bautin_estimate() {
    let (v, _) = extract(-0.03);
    let e = v["report"]["eps_bt"].as_f64().unwrap();
    assert!((e - 0.42).abs() < 0.03, "eps_bt = {e}");
    assert_eq!(v["report"]["classification"]["case_label"], "case1");
}

#[test]
fn extract_positive_bsp_is_case2() {
    let (v, _) = extract(0.03);
    assert_eq!(v["report"]["classification"]["case_label"], "case2");
}

#[test]
fn preset_flag_matches_config_preset() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("flag");
    let o = bin().args(["wc", "extract", "--preset", "paperP", "--out"]).arg(&out).output().unwrap();
    ok(&o);
    let (o2, out2) = run_with(d.path(), r#"{"wc":{"preset":"paperP"}}"#, &["wc", "extract"]);
    ok(&o2);
    let a = fs::read(find(&out, ".csv")).unwrap();
    let b = fs::read(find(&out2, ".csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn outputs_are_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"nf":{"table":"zero-bsp"},"curves":{"n_eps":20,"n_lambda":50}}"#;
    let (o, out) = run_with(d.path(), cfg, &["nf", "curves"]);
    ok(&o);
    let first: Vec<Vec<u8>> = files(&out).iter().map(|p| fs::read(p).unwrap()).collect();
    fs::remove_dir_all(&out).unwrap();
    let (o, out) = run_with(d.path(), cfg, &["nf", "curves"]);
    ok(&o);
    let second: Vec<Vec<u8>> = files(&out).iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(first, second);
    // file names carry the config hash, not a timestamp
    let name = find(&out, ".csv").file_name().unwrap().to_str().unwrap().to_string();
    assert!(name.starts_with("nf-curves_") && name.len() == "nf-curves_".len() + 12 + 4);
}

#[test]
fn outdir_comes_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let env_out = d.path().join("env");
    let o = bin()
        .args(["wc", "extract", "--preset", "paperP"])
        .env("HOPFDUET_OUTDIR", &env_out)
        .current_dir(d.path())
        .output()
        .unwrap();
    ok(&o);
    assert_eq!(files(&env_out).len(), 2);
}

#[test]
fn nf_sim_uncoupled_reaches_torus_amplitude() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"nf":{{"coefficients":{UNCOUPLED},"lambda":0.04,"eps":0}},"sim":{{"t_end":400,"samples":101}}}}"#);
    let (o, out) = run_with(d.path(), &cfg, &["nf", "sim"]);
    ok(&o);
    let want = (0.04f64 / 1.0).sqrt();
    for r in rows(&find(&out, ".csv")) {
        for a in [&r[2], &r[3]] {
            assert!((a.parse::<f64>().unwrap() - want).abs() < 1e-6, "{r:?}");
        }
    }
    assert!(files(&out).iter().any(|p| p.to_str().unwrap().ends_with("_ic1.csv")));
}

#[test]
fn wc_sim_bistable_point_gives_in_phase_and_anti_phase() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"wc":{"preset":"paperP","lambda":3.05,"eps":0.05,"b_sp":-0.03},"sim":{"t_end":600,"samples":301}}"#;
    let (o, out) = run_with(d.path(), cfg, &["wc", "sim"]);
    ok(&o);
    let summary = rows(&find(&out, ".csv"));
    assert_eq!(summary.len(), 2);
    let dphi: Vec<f64> = summary.iter().map(|r| r[1].parse().unwrap()).collect();
    let folded = |x: f64| x.min(std::f64::consts::TAU - x);
    assert!(folded(dphi[0]) < 0.05, "{dphi:?}");
    assert!((folded(dphi[1]) - std::f64::consts::PI).abs() < 0.05, "{dphi:?}");
    assert!(files(&out).iter().any(|p| p.to_str().unwrap().ends_with("_ic0.csv")));
    assert!(files(&out).iter().any(|p| p.to_str().unwrap().ends_with("_ic1.csv")));
}

#[test]
fn wc_sweep_is_job_count_independent() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"wc":{"preset":"paperP","b_sp":0},
        "sweep":{"p1":{"name":"lambda","min":2.9,"max":3.1,"n":3},"p2":{"name":"eps","min":0.3,"max":0.3,"n":1},
                 "options":{"bisection_steps":2}}}"#;
    let (o, out) = run_with(d.path(), cfg, &["wc", "sweep", "--jobs", "1"]);
    ok(&o);
    let one: Vec<Vec<u8>> = files(&out).iter().map(|p| fs::read(p).unwrap()).collect();
    let classes: Vec<String> = rows(&find(&out, ".csv")).into_iter().map(|r| r[2].clone()).collect();
    assert_eq!(classes[0], "FP");
    assert_eq!(classes[2], "AP+IP");
    let ev = rows(&find(&out, ".events.csv"));
    assert!(ev.iter().all(|r| r.len() == 4));
    fs::remove_dir_all(&out).unwrap();
    let (o, out) = run_with(d.path(), cfg, &["wc", "sweep", "--jobs", "3"]);
    ok(&o);
    let three: Vec<Vec<u8>> = files(&out).iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(one, three);
}

#[test]
fn branch_without_seed_attractor_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"wc":{"preset":"paperP","lambda":2.5,"eps":0.05},
        "branch":{"param":"lambda","start":2.5,"end":2.6,"seed":"AP"}}"#;
    let (o, out) = run_with(d.path(), cfg, &["wc", "branch"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(files(&out).is_empty());
}

#[test]
fn ap_branch_reports_events() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"wc":{"preset":"paperP","lambda":3.05,"eps":0.05,"b_sp":-0.03},
        "branch":{"param":"lambda","start":3.05,"end":3.0,"seed":"AP"}}"#;
    let (o, out) = run_with(d.path(), cfg, &["wc", "branch"]);
    ok(&o);
    let kinds: Vec<String> = rows(&find(&out, ".events.csv")).into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(kinds, ["TR", "HB"]);
}

#[test]
fn formats_can_be_restricted() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"nf":{"table":"zero-bsp"},"curves":{"n_eps":5,"n_lambda":5},"output":{"formats":["csv"]}}"#;
    let (o, out) = run_with(d.path(), cfg, &["nf", "curves"]);
    ok(&o);
    let fs = files(&out);
    assert_eq!(fs.len(), 1);
    assert!(fs[0].to_str().unwrap().ends_with(".csv"));
}
