use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use simctl::{fmt_f64, run, validate, ExperimentConfig, ExperimentRegistry, SimError};
use spectra_lab::SpectraError;

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

const U1_LOOP: &str = r#"{"kind":"loop_u1_finite_l","geometry":{"spatial_dim":2,"extents":[2,2]},
    "theory":{"group":"u1","ell":2},"couplings":{"eps":0.1,"lambda":10,"beta":0.5}}"#;

const FLUX: &str = r#"{"kind":"fluxtube","theory":{"group":"u1","ell":3},"couplings":{"g2":2},
    "fluxtube":{"separations":[1,2,3],"sites":4}}"#;

const SWEEP: &str = r#"{"kind":"sweep_xd","sweep":{"ells":[1,2],"xs":[0.1,1,10],"reference_ell":null}}"#;

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn registry_holds_every_kind() {
    let r = ExperimentRegistry::default();
    let mut names = r.names();
    names.sort();
    assert_eq!(names, ["audit", "fluxtube", "loop_su2", "loop_u1_finite_l", "loop_zN", "schwinger", "sweep_xd"]);
    assert!(matches!(r.get("nope"), Err(SimError::Config(_))));
}

#[test]
fn validate_reports_loop_dimensions() {
    let d = validate(&cfg(U1_LOOP));
    assert!(d.ok, "{:?}", d.errors);
    let a = &d.assemblies[0];
    assert_eq!((a.bosonic, a.fermionic, a.total), (625, 16, 10000));
    let mu = d.derived.mu.unwrap();
    assert!((mu - 0.5 * 0.01 / 100.0).abs() < 1e-18);
    // x = (β/λ + 1/ℓ(ℓ+1)) λ²/(2ε²)
    assert!((d.derived.x.unwrap() - (0.05 + 1.0 / 6.0) * 100.0 / 0.02).abs() < 1e-9);
}

#[test]
fn validate_flags_beta_above_one() {
    let d = validate(&cfg(&U1_LOOP.replace("\"beta\":0.5", "\"beta\":2")));
    assert!(!d.ok);
    assert!(d.errors.iter().any(|e| e.contains("beta <= 1")), "{:?}", d.errors);
}

#[test]
fn validate_warns_on_missing_plaquettes() {
    let d = validate(&cfg(
        r#"{"kind":"loop_zN","geometry":{"spatial_dim":1,"extents":[4]},"theory":{"group":"zn","n":3},
        "couplings":{"eps":0.1,"lambda":10,"beta":0.5}}"#,
    ));
    assert!(d.warnings.iter().any(|w| w.contains("no plaquettes")), "{:?}", d.warnings);
}

#[test]
fn validate_rejects_incomplete_blocks() {
    let d = validate(&cfg(r#"{"kind":"loop_zN","theory":{"group":"zn","n":3}}"#));
    assert!(!d.ok);
    assert!(d.errors.iter().any(|e| e.contains("block")), "{:?}", d.errors);
    assert!(ExperimentConfig::from_json(r#"{"kind":"audit","bogus":1}"#).is_err());
}

#[test]
fn fluxtube_run_gives_linear_potential() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&cfg(FLUX), dir.path(), Some(2)).unwrap();
    let rows = read_csv(&dir.path().join("plots/fluxtube.csv"));
    assert_eq!(rows[0], ["r", "energy"]);
    for (row, want) in rows[1..].iter().zip([1.0, 2.0, 3.0]) {
        assert!((row[1].parse::<f64>().unwrap() - want).abs() < 1e-12);
    }
    assert!((o.manifest["summary"]["string_tension"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(dir.path().join("spectra_fluxtube.csv").exists());
}

#[test]
fn loop_run_writes_decomposition_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&cfg(U1_LOOP), dir.path(), None).unwrap();
    for f in ["manifest.json", "effective_decomposition.csv", "spectra_loop_u1_finite_l.csv"] {
        assert!(o.files.iter().any(|x| x == f), "{f}");
    }
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let echoed: ExperimentConfig = serde_json::from_value(m["config"].clone()).unwrap();
    assert_eq!(echoed, cfg(U1_LOOP));
    let p = m["summary"]["plaquette_coefficient"].as_f64().unwrap();
    assert!((p / -2e-7 - 1.0).abs() < 1e-8);
    let terms: Vec<&str> = m["terms"].as_array().unwrap().iter().map(|t| t["term"].as_str().unwrap()).collect();
    assert_eq!(terms, ["H_E", "H_int", "H_C"]);
}

#[test]
fn sweep_summary_has_the_published_columns() {
    let dir = tempfile::tempdir().unwrap();
    run(&cfg(SWEEP), dir.path(), Some(2)).unwrap();
    let rows = read_csv(&dir.path().join("sweep_summary.csv"));
    assert_eq!(rows[0], ["x", "ell", "beta", "eps", "lambda", "d", "mean_shift", "scale_mismatch", "dims", "seconds"]);
    assert_eq!(rows.len(), 1 + 6);
    assert!(dir.path().join("plots/d_surface.csv").exists());
}

fn without_timing(path: &Path) -> String {
    let rows = read_csv(path);
    let drop = rows[0].iter().position(|h| h == "seconds");
    rows.iter()
        .map(|r| r.iter().enumerate().filter(|(i, _)| Some(*i) != drop).map(|(_, c)| c.as_str()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn runs_are_reproducible() {
    let iterative = r#"{"kind":"schwinger","geometry":{"spatial_dim":1,"extents":[4]},"theory":{"group":"u1","ell":1},
        "couplings":{"g2":1,"mu":0.5,"mass":0.7,"eps":0.3},"solver":{"mode":"iterative_lowest_k","k":4}}"#;
    for text in [SWEEP, iterative, U1_LOOP] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let fa = run(&cfg(text), a.path(), Some(1)).unwrap().files;
        let fb = run(&cfg(text), b.path(), Some(3)).unwrap().files;
        assert_eq!(fa, fb);
        for f in fa.iter().filter(|f| f.ends_with(".csv")) {
            assert_eq!(without_timing(&a.path().join(f)), without_timing(&b.path().join(f)), "{f}");
        }
    }
}

#[test]
fn floats_print_seventeen_digits() {
    for x in [0.1, 1.0 / 3.0, -2e-7, 12345.678901234567] {
        let s = fmt_f64(x);
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{s}");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}

#[test]
fn error_mapping_follows_exit_codes() {
    assert_eq!(SimError::from(SpectraError::NotConverged { found: 1, wanted: 2, residual: 1.0 }).exit_code(), 4);
    assert_eq!(SimError::from(SpectraError::UnknownSolver("x".into())).exit_code(), 2);
    let capped = cfg(r#"{"kind":"audit","geometry":{"spatial_dim":2,"extents":[2,2]},"theory":{"group":"u1","ell":2},"dim_cap":100}"#);
    let err = run(&capped, tempfile::tempdir().unwrap().path(), None).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simctl"))
}

#[test]
fn binary_exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"kind":"loop_zN"}"#).unwrap();
    let out = bin().args(["run", bad.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config_invalid");

    let capped = dir.path().join("cap.json");
    fs::write(
        &capped,
        r#"{"kind":"audit","geometry":{"spatial_dim":1,"extents":[6]},"theory":{"group":"u1","ell":2},"dim_cap":50}"#,
    )
    .unwrap();
    let out = bin().args(["run", capped.to_str().unwrap(), "--out", dir.path().join("c").to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let good = dir.path().join("flux.json");
    fs::write(&good, FLUX).unwrap();
    let out = bin().args(["validate", good.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let diag: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(diag["ok"], true);
    let out = bin()
        .args(["run", good.to_str().unwrap(), "--out", dir.path().join("f").to_str().unwrap(), "--threads", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("f/manifest.json").exists());
}
