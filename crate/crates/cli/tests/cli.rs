use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mpsvqa::oracle::DenseMatrixFile;
use mpsvqa::{MpsState, Statevector, C64};
use mpsvqa_cli::record::to_json;
use mpsvqa_cli::{execute, main_analyze, main_run, CliError, Overrides, RunConfig, RunRecord};
use nalgebra::DMatrix;
use serde_json::Value;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn planted_config(out: &str, shots: usize) -> String {
    format!(
        r#"{{
  "n": 4, "k_max": 1,
  "oracle": {{"type": "planted", "planted": {{"k": 1, "seed": 3, "phases_seed": 4}}}},
  "optimizer": {{"method": "fd-gradient-descent", "max_iters": 400, "tol_loss": 1e-12, "fd_step": 1e-5, "restarts": 6}},
  "shots": {shots}, "warm_start": true, "cert_tol": 1e-6, "seed": 11,
  "output_path": "{out}"
}}"#
    )
}

/// Record JSON with the run-dependent fields removed.
fn stable(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    for k in v["per_k"].as_array_mut().unwrap() {
        k.as_object_mut().unwrap().remove("wall_time_s");
    }
    v
}

#[test]
fn identity_dense_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let id = DenseMatrixFile::from_matrix(&DMatrix::<C64>::identity(8, 8));
    write(dir.path(), "id.json", &serde_json::to_string(&id).unwrap());
    let cfg = write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{"n": 3, "k_max": 1, "oracle": {{"type": "dense", "path": "id.json"}}, "output_path": "{}"}}"#,
            dir.path().join("rec.json").display()
        ),
    );
    let record = main_run(&cfg, &Overrides::default()).unwrap();
    assert_eq!(record.per_k.len(), 1);
    assert_eq!(record.best_k, 0);
    assert!(record.per_k[0].loss < 1e-12);
    assert!((record.per_k[0].certificate - 1.0).abs() < 1e-12);
    assert!(record.terminated_early.is_some());
    assert_eq!(record.resources.cnot_lower_bound, None);
    let written = fs::read_to_string(dir.path().join("rec.json")).unwrap();
    assert_eq!(RunRecord::from_json(&written, Path::new("rec.json")).unwrap(), record);
}

#[test]
fn dimacs_oracle_gives_basis_eigenvector() {
    let dir = tempfile::tempdir().unwrap();
    let clauses = vec![vec![1i64, -2, 3], vec![-1, 2, 4], vec![2, -3, -4], vec![1, 3, 4]];
    let mut cnf = String::from("c satisfiable\np cnf 4 4\n");
    for c in &clauses {
        let lits: Vec<String> = c.iter().map(|l| l.to_string()).collect();
        cnf.push_str(&format!("{} 0\n", lits.join(" ")));
    }
    write(dir.path(), "f.cnf", &cnf);
    let cfg = write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{"n": 4, "k_max": 1, "oracle": {{"type": "dimacs", "path": "f.cnf", "t": 0.3}}, "seed": 2, "output_path": "{}"}}"#,
            dir.path().join("rec.json").display()
        ),
    );
    let record = main_run(&cfg, &Overrides::default()).unwrap();
    let best = &record.per_k[record.best_k];
    assert!(best.certificate >= 1.0 - 1e-6);

    // Every basis state in the support has the same clause count.
    let state = MpsState::<f64>::import(&record.mps).unwrap().to_statevector().unwrap();
    let unsat = |x: usize| {
        clauses
            .iter()
            .filter(|c| {
                !c.iter().any(|&l| {
                    let bit = (x >> (4 - l.unsigned_abs() as usize)) & 1 == 1;
                    if l > 0 { bit } else { !bit }
                })
            })
            .count()
    };
    let costs: Vec<usize> = (0..16)
        .filter(|&x| state.amplitudes()[x].norm_sqr() > 1e-4)
        .map(unsat)
        .collect();
    assert!(!costs.is_empty());
    assert!(costs.iter().all(|&c| c == costs[0]), "{costs:?}");
}

#[test]
fn planted_run_is_monotone_reproducible_and_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rec.json");
    let cfg = write(dir.path(), "run.json", &planted_config(&out.display().to_string(), 0));
    let a = main_run(&cfg, &Overrides::default()).unwrap();
    let a_text = fs::read_to_string(&out).unwrap();
    for w in a.per_k.windows(2) {
        assert!(w[1].certificate >= w[0].certificate - 1e-12);
    }
    assert!(a.per_k.iter().all(|k| (0.0..=1.0).contains(&k.certificate)));

    // The echoed config is itself a valid config and reproduces the record.
    let echo = write(dir.path(), "echo.json", &to_json(&a.config));
    let b = main_run(&echo, &Overrides::default()).unwrap();
    assert_eq!(b.config, a.config);
    assert_eq!(stable(&fs::read_to_string(&out).unwrap()), stable(&a_text));

    // The planted state has exact rank 2.
    let analysis = main_analyze(&out).unwrap();
    if a.best_k == 1 && a.planted_overlap.unwrap() > 1.0 - 1e-9 {
        assert!(analysis.truncation[1].err2 < 1e-10);
    }
    assert!(analysis.max_rank <= 2);
}

#[test]
fn overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", &planted_config("unused.json", 0));
    let out = dir.path().join("other.json");
    let overrides = Overrides {
        seed: Some(99),
        output: Some(out.clone()),
        shots: Some(256),
    };
    let mut config = RunConfig::load(&cfg).unwrap();
    overrides.apply(&mut config);
    config.k_max = 0;
    config.optimizer.max_iters = 20;
    let record = execute(&config, dir.path()).unwrap();
    assert_eq!(record.config.seed, 99);
    assert_eq!(record.config.shots, 256);
    assert_eq!(record.config.output_path, out);
    assert_eq!(record.per_k[0].method, mpsvqa::vqa::Method::Spsa);
}

#[test]
fn analyze_ghz_and_product() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut ghz = vec![C64::new(0.0, 0.0); 16];
    ghz[0] = C64::new(h, 0.0);
    ghz[15] = C64::new(h, 0.0);
    let mps = MpsState::from_statevector(&Statevector::new(ghz).unwrap(), 1e-12);
    let path = write(dir.path(), "ghz.json", &to_json(&mps.export()));
    let a = main_analyze(&path).unwrap();
    assert!(a.cuts.iter().all(|c| c.rank == 2 && (c.ebits - 1.0).abs() < 1e-12));
    assert_eq!(a.max_rank, 2);
    assert!(a.within_ebit_bound);
    assert!((a.truncation[0].err2 - 0.5).abs() < 1e-12);
    assert!((a.truncation[0].eps - h).abs() < 1e-12);

    let product = Statevector::<f64>::basis_state(4, 0b0110).unwrap();
    let path = write(dir.path(), "prod.json", &to_json(&MpsState::from_statevector(&product, 1e-12).export()));
    let a = main_analyze(&path).unwrap();
    assert!(a.cuts.iter().all(|c| c.rank == 1 && c.ebits.abs() < 1e-12));
    assert_eq!(a.truncation.len(), 1);
    assert!(a.render().contains("max rank 1"));
}

#[test]
fn floats_are_written_with_seventeen_digits() {
    let text = to_json(&serde_json::json!({"x": 0.1, "y": [1.0, -2.5e-300]}));
    assert!(text.contains("1.0000000000000001e-1"), "{text}");
    assert!(text.contains("1.0000000000000000e0"));
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back["x"].as_f64(), Some(0.1));
    assert_eq!(back["y"][1].as_f64(), Some(-2.5e-300));
}

#[test]
fn validation_errors() {
    let p = Path::new("x.json");
    let bad = |text: &str| match RunConfig::from_json(text, p).and_then(|c| c.validate().map(|_| c)) {
        Err(e) => e,
        Ok(_) => panic!("accepted {text}"),
    };
    let base = r#""oracle": {"type": "planted", "planted": {"k": 1, "seed": 0, "phases_seed": 0}}, "output_path": "o.json""#;
    assert!(matches!(bad(&format!(r#"{{"n": 4, "k_max": 3, {base}}}"#)), CliError::Validation(_)));
    assert!(matches!(bad(&format!(r#"{{"n": 1, "k_max": 0, {base}}}"#)), CliError::Validation(_)));
    assert!(matches!(
        bad(r#"{"n": 4, "k_max": 1, "oracle": {"type": "planted", "path": "q.json", "planted": {"k": 1, "seed": 0, "phases_seed": 0}}, "output_path": "o"}"#),
        CliError::Validation(_)
    ));
    assert!(matches!(
        bad(r#"{"n": 4, "k_max": 1, "oracle": {"type": "hamiltonian", "preset": "heisenberg", "t": 1}, "output_path": "o"}"#),
        CliError::Validation(_)
    ));
    assert!(matches!(
        bad(r#"{"n": 4, "k_max": 1, "oracle": {"type": "hamiltonian", "preset": "tfim"}, "output_path": "o"}"#),
        CliError::Validation(_)
    ));
    assert!(matches!(bad(r#"{"n": 4, "k_max": 1, "bogus": 1}"#), CliError::Parse { .. }));
    assert!(matches!(bad("{not json"), CliError::Parse { .. }));
}

#[test]
fn hamiltonian_presets_run() {
    let dir = tempfile::tempdir().unwrap();
    for oracle in [
        r#"{"type": "hamiltonian", "preset": "tfim", "t": 0.4, "params": {"coupling": 1.0, "field": 0.3}}"#,
        r#"{"type": "hamiltonian", "preset": "sat", "params": {"clauses": 8, "clause_size": 3, "seed": 5}}"#,
    ] {
        let text = format!(
            r#"{{"n": 4, "k_max": 0, "oracle": {oracle}, "optimizer": {{"method": "nelder-mead", "max_iters": 300, "tol_loss": 1e-12, "fd_step": 1e-5, "restarts": 2}}, "output_path": "{}"}}"#,
            dir.path().join("rec.json").display()
        );
        let cfg = write(dir.path(), "run.json", &text);
        let record = main_run(&cfg, &Overrides::default()).unwrap();
        assert_eq!(record.per_k.len(), 1);
        assert!(record.per_k[0].certificate > 0.0);
    }
}

#[test]
fn error_classes_map_to_exit_codes() {
    assert_eq!(CliError::Validation(String::new()).exit_code(), 2);
    let io = CliError::Io {
        path: "x".into(),
        source: std::io::Error::other("x"),
    };
    assert_eq!(io.exit_code(), 3);
    let nonfinite = mpsvqa::Error::NonFinite { value: f64::NAN, theta: vec![0.5] };
    assert_eq!(CliError::Numerical(nonfinite).exit_code(), 4);
    let parse = CliError::Parse { path: "x".into(), msg: String::new() };
    assert_eq!(parse.exit_code(), 5);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_mpsvqa");
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["run", missing.to_str().unwrap()]).status.code(), Some(3));

    let garbled = write(dir.path(), "garbled.json", "{\"n\": 4,");
    let out = run(&["run", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let invalid = write(
        dir.path(),
        "invalid.json",
        r#"{"n": 4, "k_max": 3, "oracle": {"type": "planted", "planted": {"k": 1, "seed": 0, "phases_seed": 0}}, "output_path": "o.json"}"#,
    );
    assert_eq!(run(&["run", invalid.to_str().unwrap()]).status.code(), Some(2));

    let bad_cnf = write(dir.path(), "bad.cnf", "p cnf 2 1\n1 x 0\n");
    let cfg = write(
        dir.path(),
        "cnf.json",
        r#"{"n": 2, "k_max": 0, "oracle": {"type": "dimacs", "path": "bad.cnf"}, "output_path": "o.json"}"#,
    );
    let _ = bad_cnf;
    let out = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out_path = dir.path().join("ok.json");
    let ok = write(
        dir.path(),
        "ok.json.in",
        r#"{"n": 2, "k_max": 0, "oracle": {"type": "planted", "planted": {"k": 0, "seed": 1, "phases_seed": 2}}, "output_path": "ignored.json"}"#,
    );
    let out = run(&["run", ok.to_str().unwrap(), "--output", out_path.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["analyze", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max rank 1"));
    let out = run(&["analyze", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
}
