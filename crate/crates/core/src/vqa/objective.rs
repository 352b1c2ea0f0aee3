//! Projector probabilities, log-likelihood loss and the eigenvector
//! certificate.
//!
//! For a circuit `U(theta)` and oracle `Q` the evolved state is
//! `|psi(theta)> = U^dag Q U |0...0>`. Its single-qubit `|0>` probabilities
//! `p_i` define the loss `-sum_i ln p_i`, and its `|0...0>` weight
//! `|<0|psi>|^2 = |<psi~|Q|psi~>|^2` is the certificate: it equals one exactly
//! when `U|0...0>` is an eigenvector of `Q`.

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzCircuit;
use crate::error::{Error, Result};
use crate::oracle::BlackBoxUnitary;
use crate::scalar::{real, to_f64, Real};
use crate::simulator::Statevector;

/// Lower clamp applied to each `p_i` before the logarithm.
pub const DEFAULT_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport<R: Real = f64> {
    pub p: Vec<R>,
    pub loss: R,
    pub certificate: R,
}

/// Shot-noise settings: each loss evaluation samples `shots` bitstrings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotNoise {
    pub shots: usize,
    pub seed: u64,
}

/// Loss landscape of one ansatz against one oracle.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a, R: Real = f64> {
    circuit: &'a AnsatzCircuit,
    oracle: &'a BlackBoxUnitary<R>,
    clamp: R,
    noise: Option<ShotNoise>,
}

impl<'a, R: Real> Objective<'a, R> {
    pub fn new(circuit: &'a AnsatzCircuit, oracle: &'a BlackBoxUnitary<R>) -> Result<Self> {
        if circuit.num_qubits() != oracle.num_qubits() {
            return Err(Error::Shape(format!(
                "{}-qubit circuit with a {}-qubit oracle",
                circuit.num_qubits(),
                oracle.num_qubits()
            )));
        }
        Ok(Self {
            circuit,
            oracle,
            clamp: real(DEFAULT_CLAMP),
            noise: None,
        })
    }

    pub fn with_clamp(mut self, clamp: R) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn with_shot_noise(mut self, noise: Option<ShotNoise>) -> Self {
        self.noise = noise;
        self
    }

    pub fn circuit(&self) -> &AnsatzCircuit {
        self.circuit
    }

    pub fn oracle(&self) -> &BlackBoxUnitary<R> {
        self.oracle
    }

    /// `U^dag(theta) Q U(theta) |0...0>`.
    pub fn evolved_state(&self, theta: &[R]) -> Result<Statevector<R>> {
        let unitaries = self.circuit.block_unitaries(theta)?;
        let prepared = self.circuit.prepare_with(&unitaries)?;
        let mut state = self.oracle.apply(&prepared)?;
        for (block, u) in self.circuit.blocks().iter().zip(&unitaries).rev() {
            state.apply_block(&u.adjoint(), &block.window)?;
        }
        Ok(state)
    }

    /// Exact probabilities, loss and certificate.
    pub fn report(&self, theta: &[R]) -> Result<ObjectiveReport<R>> {
        let state = self.evolved_state(theta)?;
        let p = state.projector_probs();
        Ok(ObjectiveReport {
            loss: log_likelihood(&p, self.clamp),
            certificate: state.amplitudes()[0].norm_sqr(),
            p,
        })
    }

    /// Loss used by the optimizer: exact, or estimated from shots with a
    /// sampling seed derived from the configured seed and the bits of `theta`.
    pub fn loss(&self, theta: &[R]) -> Result<R> {
        let state = self.evolved_state(theta)?;
        let p = match self.noise {
            None => state.projector_probs(),
            Some(noise) => state.sample_probs(noise.shots, theta_seed(noise.seed, theta))?,
        };
        Ok(log_likelihood(&p, self.clamp))
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic mix of a base seed with a list of words.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    words.iter().fold(splitmix(base), |h, &w| splitmix(h ^ w))
}

fn theta_seed<R: Real>(base: u64, theta: &[R]) -> u64 {
    theta
        .iter()
        .fold(splitmix(base), |h, &x| splitmix(h ^ to_f64(x).to_bits()))
}

/// `p_i = <psi(theta)| P_i |psi(theta)>` for every qubit.
pub fn probabilities<R: Real>(
    circuit: &AnsatzCircuit,
    theta: &[R],
    oracle: &BlackBoxUnitary<R>,
) -> Result<Vec<R>> {
    Ok(Objective::new(circuit, oracle)?
        .evolved_state(theta)?
        .projector_probs())
}

/// `-sum_i ln(max(p_i, clamp))`. Zero iff every `p_i` is one.
pub fn log_likelihood<R: Real>(p: &[R], clamp: R) -> R {
    p.iter().fold(R::zero(), |acc, &pi| acc - pi.max(clamp).ln())
}

/// `|<0...0| U^dag Q U |0...0>|^2`.
pub fn certificate<R: Real>(
    circuit: &AnsatzCircuit,
    theta: &[R],
    oracle: &BlackBoxUnitary<R>,
) -> Result<R> {
    let state = Objective::new(circuit, oracle)?.evolved_state(theta)?;
    Ok(state.amplitudes()[0].norm_sqr())
}

/// `|<psi~|Q|psi~>|^2` with `|psi~> = U|0...0>`, evaluated directly.
pub fn certificate_direct<R: Real>(
    circuit: &AnsatzCircuit,
    theta: &[R],
    oracle: &BlackBoxUnitary<R>,
) -> Result<R> {
    let prepared = circuit.prepare_state(theta)?;
    let image = oracle.apply(&prepared)?;
    Ok(prepared.inner_product(&image)?.norm_sqr())
}

/// Central finite-difference gradient of `f` at `theta`.
pub fn fd_gradient<R, F>(f: &F, theta: &[R], step: R) -> Result<Vec<R>>
where
    R: Real,
    F: Fn(&[R]) -> Result<R> + ?Sized,
{
    if step <= R::zero() {
        return Err(Error::Argument(format!("finite-difference step {step} must be positive")));
    }
    let two = real::<R>(2.0);
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            probe[j] = theta[j] + step;
            let up = f(&probe)?;
            probe[j] = theta[j] - step;
            let down = f(&probe)?;
            probe[j] = theta[j];
            Ok((up - down) / (two * step))
        })
        .collect()
}

/// Finite-difference gradient of the exact loss.
pub fn loss_gradient_fd<R: Real>(
    circuit: &AnsatzCircuit,
    theta: &[R],
    oracle: &BlackBoxUnitary<R>,
    step: R,
) -> Result<Vec<R>> {
    let objective = Objective::new(circuit, oracle)?;
    fd_gradient(&|t: &[R]| objective.loss(t), theta, step)
}
