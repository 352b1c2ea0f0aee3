//! Run configuration: the single JSON input of `mpsvqa run`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mpsvqa::oracle::{self, SatInstance};
use mpsvqa::simulator::MAX_QUBITS;
use mpsvqa::vqa::{Method, OptimizerConfig, SweepConfig};
use mpsvqa::{AnsatzCircuit, BlackBoxUnitary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub k_max: usize,
    pub oracle: OracleSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub shots: usize,
    #[serde(default = "yes")]
    pub warm_start: bool,
    #[serde(default = "default_cert_tol")]
    pub cert_tol: f64,
    #[serde(default)]
    pub seed: u64,
    pub output_path: PathBuf,
}

fn yes() -> bool {
    true
}

fn default_cert_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleType {
    Dimacs,
    Hamiltonian,
    Dense,
    Planted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(rename = "type")]
    pub kind: OracleType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// `tfim` or `sat` for the hamiltonian type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Evolution time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<PlantedSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedSpec {
    /// Ebits of the circuit that prepares the planted state.
    pub k: usize,
    pub seed: u64,
    pub phases_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Auto,
    NelderMead,
    Spsa,
    FdGradientDescent,
}

impl MethodName {
    pub fn resolve(self) -> Option<Method> {
        match self {
            MethodName::Auto => None,
            MethodName::NelderMead => Some(Method::NelderMead),
            MethodName::Spsa => Some(Method::Spsa),
            MethodName::FdGradientDescent => Some(Method::FdGradientDescent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub method: MethodName,
    pub max_iters: usize,
    pub tol_loss: f64,
    pub fd_step: f64,
    pub restarts: usize,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            method: MethodName::Auto,
            max_iters: d.max_iters,
            tol_loss: d.tol_loss,
            fd_step: d.fd_step,
            restarts: d.restarts,
        }
    }
}

/// Default minimum distance between the planted eigenphase and the rest.
pub const DEFAULT_PLANTED_GAP: f64 = 0.5;

impl RunConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    /// Checks everything that can be checked without touching the inputs.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if self.n < 2 || self.n > MAX_QUBITS {
            return bad(format!("n = {} outside 2..={MAX_QUBITS}", self.n));
        }
        if self.k_max > self.n / 2 {
            return bad(format!("k_max = {} exceeds floor(n/2) = {}", self.k_max, self.n / 2));
        }
        if !(0.0..1.0).contains(&self.cert_tol) {
            return bad(format!("cert_tol = {} outside [0, 1)", self.cert_tol));
        }
        if self.output_path.as_os_str().is_empty() {
            return bad("output_path is empty".into());
        }
        self.optimizer_config()
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        self.oracle.validate(self.n)
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            method: self.optimizer.method.resolve(),
            max_iters: self.optimizer.max_iters,
            tol_loss: self.optimizer.tol_loss,
            fd_step: self.optimizer.fd_step,
            restarts: self.optimizer.restarts,
            seed: self.seed,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            optimizer: self.optimizer_config(),
            warm_start: self.warm_start,
            cert_tol: self.cert_tol,
            shots: self.shots,
            ..SweepConfig::default()
        }
    }

    /// Relative paths in the oracle spec are resolved against `base`.
    pub fn build_oracle(&self, base: &Path) -> Result<BlackBoxUnitary> {
        self.oracle.build(self.n, base)
    }
}

impl OracleSpec {
    fn validate(&self, n: usize) -> Result<()> {
        let present = |name: &str, set: bool, wanted: bool| -> Result<()> {
            match (set, wanted) {
                (true, false) => Err(CliError::Validation(format!(
                    "oracle.{name} is not used by type {:?}",
                    self.kind
                ))),
                (false, true) => Err(CliError::Validation(format!(
                    "oracle type {:?} requires oracle.{name}",
                    self.kind
                ))),
                _ => Ok(()),
            }
        };
        let (path, preset, planted) = match self.kind {
            OracleType::Dimacs | OracleType::Dense => (true, false, false),
            OracleType::Hamiltonian => (false, true, false),
            OracleType::Planted => (false, false, true),
        };
        present("path", self.path.is_some(), path)?;
        present("preset", self.preset.is_some(), preset)?;
        present("planted", self.planted.is_some(), planted)?;
        if self.kind == OracleType::Dense && self.t.is_some() {
            return Err(CliError::Validation("oracle.t is not used by type Dense".into()));
        }
        if let Some(t) = self.t {
            if !t.is_finite() {
                return Err(CliError::Validation(format!("oracle.t = {t} is not finite")));
            }
        }
        if let Some(params) = &self.params {
            if let Some((k, v)) = params.iter().find(|(_, v)| !v.is_finite()) {
                return Err(CliError::Validation(format!("oracle.params.{k} = {v} is not finite")));
            }
        }
        match self.kind {
            OracleType::Hamiltonian => match self.preset.as_deref() {
                Some("tfim") => {
                    self.check_params(&["coupling", "field"])?;
                    if self.t.is_none() {
                        return Err(CliError::Validation("the tfim preset requires oracle.t".into()));
                    }
                    if n > 12 {
                        return Err(CliError::Validation(format!("tfim preset is dense; n = {n} > 12")));
                    }
                }
                Some("sat") => self.check_params(&["clauses", "clause_size", "seed"])?,
                Some(other) => {
                    return Err(CliError::Validation(format!(
                        "unknown hamiltonian preset {other:?} (expected tfim or sat)"
                    )))
                }
                None => unreachable!("checked above"),
            },
            OracleType::Planted => {
                self.check_params(&["min_gap"])?;
                let p = self.planted.as_ref().expect("checked above");
                if p.k > n / 2 {
                    return Err(CliError::Validation(format!("planted k = {} exceeds floor(n/2)", p.k)));
                }
                if n > oracle::MAX_PLANTED_QUBITS {
                    return Err(CliError::Validation(format!(
                        "planted oracles support n <= {}",
                        oracle::MAX_PLANTED_QUBITS
                    )));
                }
                if self.t.is_some() {
                    return Err(CliError::Validation("oracle.t is not used by type Planted".into()));
                }
            }
            OracleType::Dimacs | OracleType::Dense => self.check_params(&[])?,
        }
        Ok(())
    }

    fn check_params(&self, allowed: &[&str]) -> Result<()> {
        if let Some(unknown) = self
            .params
            .iter()
            .flat_map(|p| p.keys())
            .find(|k| !allowed.contains(&k.as_str()))
        {
            return Err(CliError::Validation(format!(
                "oracle.params.{unknown} is not recognized here (allowed: {allowed:?})"
            )));
        }
        Ok(())
    }

    fn param(&self, name: &str, default: f64) -> f64 {
        self.params
            .as_ref()
            .and_then(|p| p.get(name).copied())
            .unwrap_or(default)
    }

    fn build(&self, n: usize, base: &Path) -> Result<BlackBoxUnitary> {
        self.validate(n)?;
        let compute = CliError::from_compute;
        match self.kind {
            OracleType::Dimacs => {
                let path = base.join(self.path.as_ref().expect("validated"));
                let text = read(&path)?;
                let sat = oracle::parse_dimacs(&text).map_err(|e| CliError::from_input(&path, e))?;
                if sat.num_vars != n {
                    return Err(CliError::Validation(format!(
                        "{} has {} variables but n = {n}",
                        path.display(),
                        sat.num_vars
                    )));
                }
                let t = self.t.unwrap_or_else(|| sat.default_time());
                BlackBoxUnitary::from_sat_instance(&sat, t).map_err(compute)
            }
            OracleType::Dense => {
                let path = base.join(self.path.as_ref().expect("validated"));
                let text = read(&path)?;
                let q = oracle::oracle_from_dense_json(&text).map_err(|e| CliError::from_input(&path, e))?;
                if q.num_qubits() != n {
                    return Err(CliError::Validation(format!(
                        "{} holds a {}-qubit operator but n = {n}",
                        path.display(),
                        q.num_qubits()
                    )));
                }
                Ok(q)
            }
            OracleType::Hamiltonian => match self.preset.as_deref() {
                Some("tfim") => {
                    let h = oracle::tfim_hamiltonian(n, self.param("coupling", 1.0), self.param("field", 1.0))
                        .map_err(compute)?;
                    BlackBoxUnitary::from_hamiltonian_evolution(&h, self.t.expect("validated")).map_err(compute)
                }
                _ => {
                    let clauses = self.param("clauses", (4.26 * n as f64).round());
                    let width = self.param("clause_size", 3.0);
                    let seed = self.param("seed", 0.0);
                    for (name, v) in [("clauses", clauses), ("clause_size", width), ("seed", seed)] {
                        if v < 0.0 || v.fract() != 0.0 {
                            return Err(CliError::Validation(format!(
                                "oracle.params.{name} = {v} must be a non-negative integer"
                            )));
                        }
                    }
                    if width < 1.0 || width as usize > n {
                        return Err(CliError::Validation(format!("clause_size {width} outside 1..={n}")));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
                    let sat = SatInstance::random(n, clauses as usize, width as usize, &mut rng);
                    let t = self.t.unwrap_or_else(|| sat.default_time());
                    BlackBoxUnitary::from_sat_instance(&sat, t).map_err(compute)
                }
            },
            OracleType::Planted => {
                let spec = self.planted.as_ref().expect("validated");
                let circuit = AnsatzCircuit::build_mps_ansatz(n, spec.k).map_err(compute)?;
                let theta = circuit.random_parameters(&mut ChaCha8Rng::seed_from_u64(spec.seed));
                let gap = self.param("min_gap", DEFAULT_PLANTED_GAP);
                let phases = oracle::planted_phases(n, gap, &mut ChaCha8Rng::seed_from_u64(spec.phases_seed))
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                BlackBoxUnitary::planted_unitary(&circuit, theta, phases).map_err(compute)
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
