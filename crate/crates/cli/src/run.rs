use std::path::Path;

use mpsvqa::ansatz::{cnot_lower_bound, cost_estimate};
use mpsvqa::tensor::schmidt_spectrum;
use mpsvqa::vqa::run_sweep;
use mpsvqa::{AnsatzCircuit, MpsState, Real};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::record::{write_atomic, CutAudit, KRecord, Resources, RunRecord};

/// Command-line overrides; everything else comes from the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<std::path::PathBuf>,
    pub shots: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(path) = &self.output {
            config.output_path = path.clone();
        }
        if let Some(shots) = self.shots {
            config.shots = shots;
        }
    }
}

/// Runs the sweep described by `config` and returns the record without
/// writing it. Relative oracle paths resolve against `base`.
pub fn execute(config: &RunConfig, base: &Path) -> Result<RunRecord> {
    config.validate()?;
    let oracle = config.build_oracle(base)?;
    let sweep = run_sweep(config.n, config.k_max, &oracle, &config.sweep_config()).map_err(CliError::from_compute)?;
    let best = sweep.best().expect("k = 0 always runs");

    let circuit = AnsatzCircuit::build_mps_ansatz(config.n, best.k).map_err(CliError::from_compute)?;
    let state = circuit.prepare_state(&best.theta).map_err(CliError::from_compute)?;
    let mps = MpsState::from_statevector(&state, f64::svd_cutoff());
    let planted_overlap = oracle
        .planted()
        .map(|p| state.inner_product(&p.state).map(|z| z.norm_sqr()))
        .transpose()
        .map_err(CliError::from_compute)?;

    let rank = 1usize << best.k;
    let ebit_audit = (1..config.n)
        .map(|cut| {
            let s = schmidt_spectrum(&state, cut, f64::svd_cutoff()).map_err(CliError::from_compute)?;
            let ebits = s.entropy_ebits();
            Ok(CutAudit {
                cut,
                schmidt_rank: s.rank,
                ebits,
                budget: best.k,
                within_budget: s.rank <= rank && ebits <= best.k as f64 + 1e-10,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let resources = Resources {
        n: config.n,
        k: best.k,
        rank,
        cnot_lower_bound: cnot_lower_bound(rank as u64).ok(),
        optimizer_steps: best.iterations,
        cost_estimate: cost_estimate(config.n as u64, rank as u64, best.iterations as u64),
        ebit_audit,
    };

    let per_k = sweep
        .per_k
        .iter()
        .map(|r| KRecord {
            k: r.k,
            method: r.method,
            loss: r.loss,
            certificate: r.certificate.clamp(0.0, 1.0),
            p: r.p.clone(),
            wall_time_s: r.elapsed.as_secs_f64(),
            iterations: r.iterations,
            evaluations: r.evaluations,
            restart: r.restart,
            stop: r.stop,
            theta: r.theta.canonical(),
            theta_raw: r.theta.0.clone(),
            trace: r.trace.clone(),
        })
        .collect();

    Ok(RunRecord {
        config: config.clone(),
        per_k,
        best_k: best.k,
        terminated_early: sweep.terminated_early.clone(),
        mps: mps.export(),
        planted_overlap,
        resources,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
    })
}

/// Loads `config_path`, applies overrides, runs and persists the record.
/// A relative oracle path resolves against the config's directory and is
/// echoed as an absolute path, so the echoed config runs from anywhere; the
/// output path is used as given.
pub fn main_run(config_path: &Path, overrides: &Overrides) -> Result<RunRecord> {
    let mut config = RunConfig::load(config_path)?;
    overrides.apply(&mut config);
    config.validate()?;
    if let Some(path) = config.oracle.path.as_mut() {
        let base = config_path.parent().unwrap_or(Path::new(""));
        let joined = base.join(&*path);
        *path = std::path::absolute(&joined).map_err(|source| CliError::Io { path: joined, source })?;
    }
    let record = execute(&config, Path::new(""))?;
    write_atomic(&config.output_path, &record.to_json())?;
    Ok(record)
}
