//! Successive rank-bounded approximations: for `k = 0, 1, ..., k_max` build
//! the `k`-ebit ansatz, minimize the loss from several starts and keep the
//! parameters with the highest certificate.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzCircuit, ParameterVector};
use crate::error::{Error, Result};
use crate::oracle::BlackBoxUnitary;
use crate::scalar::{real, to_f64, Real};

use super::objective::{derive_seed, Objective, ShotNoise, DEFAULT_CLAMP};
use super::optimize::{minimize, Method, OptimizerConfig, StopReason, TracePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub optimizer: OptimizerConfig,
    /// Seed restart 0 of every `k >= 1` with the previous optimum embedded in
    /// the larger circuit.
    pub warm_start: bool,
    /// Stop the sweep once a certificate reaches `1 - cert_tol`.
    pub cert_tol: f64,
    pub stop_early: bool,
    pub clamp: f64,
    /// 0 for exact probabilities.
    pub shots: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            warm_start: true,
            cert_tol: 1e-6,
            stop_early: true,
            clamp: DEFAULT_CLAMP,
            shots: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KResult<R: Real = f64> {
    pub k: usize,
    pub method: Method,
    pub theta: ParameterVector<R>,
    pub loss: R,
    pub certificate: R,
    pub p: Vec<R>,
    /// Trace of the selected restart.
    pub trace: Vec<TracePoint>,
    /// Restart that produced `theta`; `None` when the untouched warm start won.
    pub restart: Option<usize>,
    pub stop: Option<StopReason>,
    pub iterations: usize,
    pub evaluations: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct SweepResult<R: Real = f64> {
    pub n: usize,
    pub per_k: Vec<KResult<R>>,
    pub terminated_early: Option<String>,
}

impl<R: Real> SweepResult<R> {
    /// Highest certificate, ties to the smallest `k`.
    pub fn best(&self) -> Option<&KResult<R>> {
        self.per_k
            .iter()
            .fold(None, |best: Option<&KResult<R>>, r| match best {
                Some(b) if b.certificate >= r.certificate => Some(b),
                _ => Some(r),
            })
    }
}

struct Candidate<R: Real> {
    theta: Vec<R>,
    trace: Vec<TracePoint>,
    restart: Option<usize>,
    stop: Option<StopReason>,
    iterations: usize,
    evaluations: usize,
}

pub fn run_sweep<R: Real>(
    n: usize,
    k_max: usize,
    oracle: &BlackBoxUnitary<R>,
    config: &SweepConfig,
) -> Result<SweepResult<R>> {
    config.optimizer.validate()?;
    if oracle.num_qubits() != n {
        return Err(Error::Shape(format!("{n}-qubit sweep with a {}-qubit oracle", oracle.num_qubits())));
    }
    if k_max > n / 2 {
        return Err(Error::Argument(format!("k_max {k_max} exceeds floor(n/2) = {}", n / 2)));
    }
    if !(config.clamp > 0.0) || !(config.cert_tol >= 0.0) {
        return Err(Error::Argument("clamp must be positive and cert_tol non-negative".into()));
    }

    let noisy = config.shots > 0;
    let mut per_k: Vec<KResult<R>> = Vec::new();
    let mut previous: Option<(AnsatzCircuit, ParameterVector<R>)> = None;
    let mut terminated_early = None;

    for k in 0..=k_max {
        let started = Instant::now();
        let circuit = AnsatzCircuit::build_mps_ansatz(n, k)?;
        let method = if noisy {
            Method::Spsa
        } else {
            config
                .optimizer
                .method
                .unwrap_or_else(|| Method::auto(circuit.total_params(), false))
        };
        let noise = noisy.then(|| ShotNoise {
            shots: config.shots,
            seed: derive_seed(config.optimizer.seed, &[k as u64, 0x5407]),
        });
        let objective = Objective::new(&circuit, oracle)?
            .with_clamp(real(config.clamp))
            .with_shot_noise(noise);

        let warm = match (&previous, config.warm_start) {
            (Some((prev, theta)), true) => Some(circuit.embed_parameters(prev, theta)?),
            _ => None,
        };

        // cert >= 1 - loss, so reaching half the tolerance in loss certifies.
        let target = (!noisy).then(|| real::<R>(0.5 * config.cert_tol));
        let candidates = (0..config.optimizer.restarts)
            .into_par_iter()
            .map(|r| -> Result<Candidate<R>> {
                let seed = derive_seed(config.optimizer.seed, &[k as u64, r as u64]);
                let theta0: Vec<R> = match (&warm, r) {
                    (Some(w), 0) => w.0.clone(),
                    _ => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        (0..circuit.total_params())
                            .map(|_| real(rng.random::<f64>() * TAU))
                            .collect()
                    }
                };
                let run_config = OptimizerConfig {
                    seed,
                    ..config.optimizer.clone()
                };
                let m = minimize(&|t: &[R]| objective.loss(t), &theta0, method, &run_config, target)?;
                Ok(Candidate {
                    theta: m.theta,
                    trace: m.trace,
                    restart: Some(r),
                    stop: Some(m.stop),
                    iterations: m.iterations,
                    evaluations: m.evaluations,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let iterations = candidates.iter().map(|c| c.iterations).sum();
        let evaluations = candidates.iter().map(|c| c.evaluations).sum();
        let mut candidates = candidates;
        if let Some(w) = &warm {
            candidates.push(Candidate {
                theta: w.0.clone(),
                trace: Vec::new(),
                restart: None,
                stop: None,
                iterations: 0,
                evaluations: 0,
            });
        }

        let exact = Objective::new(&circuit, oracle)?.with_clamp(real(config.clamp));
        let mut best: Option<(Candidate<R>, super::ObjectiveReport<R>)> = None;
        for cand in candidates {
            let report = exact.report(&cand.theta)?;
            let better = match &best {
                None => true,
                Some((_, b)) => report.certificate > b.certificate,
            };
            if better {
                best = Some((cand, report));
            }
        }
        let (cand, report) = best.expect("at least one restart");
        let certificate = report.certificate;
        let theta = ParameterVector(cand.theta);
        per_k.push(KResult {
            k,
            method,
            theta: theta.clone(),
            loss: report.loss,
            certificate,
            p: report.p,
            trace: cand.trace,
            restart: cand.restart,
            stop: cand.stop,
            iterations,
            evaluations,
            elapsed: started.elapsed(),
        });
        previous = Some((circuit, theta));

        if config.stop_early && to_f64(certificate) >= 1.0 - config.cert_tol {
            terminated_early = Some(format!(
                "certificate {:.12} reached 1 - {:e} at k = {k}",
                to_f64(certificate),
                config.cert_tol
            ));
            break;
        }
    }

    Ok(SweepResult {
        n,
        per_k,
        terminated_early,
    })
}
