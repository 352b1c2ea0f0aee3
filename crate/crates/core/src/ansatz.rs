//! Staircase circuits that prepare matrix product states of bounded rank.
//!
//! A `k`-ebit circuit on `n` qubits is a sequence of `n - k` blocks of width
//! `k + 1`; block `j` acts on qubits `[j, j + k]`. Every cut is crossed by
//! blocks that share at most `k` qubits with the right half at the moment the
//! left half is finished, so the prepared state has Schmidt rank at most `2^k`
//! at every cut. The `k = 0` circuit is a layer of single-qubit rotations
//! parameterized as `cos t1 |0> + e^{-i t2} sin t1 |1>`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, pauli_coefficients, pauli_generator, unitary_log, PauliString};
use crate::scalar::{cis, creal, real, to_f64, Real, C};
use crate::simulator::{DenseUnitary, QubitWindow, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    /// One qubit, two angles `(t1, t2)`.
    ProductQubit,
    /// `exp(-i sum_j c_j G_j)` over all non-identity Pauli strings.
    PauliExp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub window: QubitWindow,
    pub param_offset: usize,
    pub param_len: usize,
}

impl BlockSpec {
    pub fn width(&self) -> usize {
        self.window.len()
    }

    pub fn params<'a, R>(&self, theta: &'a [R]) -> &'a [R] {
        &theta[self.param_offset..self.param_offset + self.param_len]
    }

    pub fn unitary<R: Real>(&self, theta: &[R]) -> Result<DenseUnitary<R>> {
        let p = self.params(theta);
        match self.kind {
            BlockKind::ProductQubit => Ok(product_qubit_unitary(p[0], p[1])),
            BlockKind::PauliExp => block_unitary(p, self.width()),
        }
    }

    /// Pauli coefficients of the block's generator.
    fn generator_coefficients<R: Real>(&self, theta: &[R]) -> Vec<R> {
        let p = self.params(theta);
        match self.kind {
            BlockKind::ProductQubit => product_qubit_generator(p[0], p[1]).to_vec(),
            BlockKind::PauliExp => p.to_vec(),
        }
    }
}

/// Number of generator coefficients of a `w`-qubit Pauli-exponential block.
pub fn block_param_len(w: usize) -> usize {
    (1 << (2 * w)) - 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsatzCircuit {
    n: usize,
    k: usize,
    blocks: Vec<BlockSpec>,
    total_params: usize,
}

impl AnsatzCircuit {
    /// Builds the `k`-ebit staircase on `n` qubits.
    pub fn build_mps_ansatz(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("ansatz needs at least 2 qubits, got {n}")));
        }
        if n > crate::simulator::MAX_QUBITS {
            return Err(Error::Capacity(format!("{n} qubits")));
        }
        if k > n / 2 {
            return Err(Error::Argument(format!(
                "ebit budget {k} exceeds floor(n/2) = {} for n = {n}",
                n / 2
            )));
        }
        let blocks: Vec<BlockSpec> = if k == 0 {
            (0..n)
                .map(|q| BlockSpec {
                    kind: BlockKind::ProductQubit,
                    window: QubitWindow::contiguous(q, 1),
                    param_offset: 2 * q,
                    param_len: 2,
                })
                .collect()
        } else {
            let len = block_param_len(k + 1);
            (0..n - k)
                .map(|j| BlockSpec {
                    kind: BlockKind::PauliExp,
                    window: QubitWindow::contiguous(j, k + 1),
                    param_offset: j * len,
                    param_len: len,
                })
                .collect()
        };
        let total_params = blocks.iter().map(|b| b.param_len).sum();
        Ok(Self {
            n,
            k,
            blocks,
            total_params,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn ebits(&self) -> usize {
        self.k
    }

    /// Bond dimension `2^k` the circuit can carry across each cut.
    pub fn max_rank(&self) -> usize {
        1 << self.k
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn total_params(&self) -> usize {
        self.total_params
    }

    fn check_theta<R>(&self, theta: &[R]) -> Result<()> {
        if theta.len() != self.total_params {
            return Err(Error::Shape(format!(
                "{} parameters for a circuit with {}",
                theta.len(),
                self.total_params
            )));
        }
        Ok(())
    }

    /// Block unitaries in application order.
    pub fn block_unitaries<R: Real>(&self, theta: &[R]) -> Result<Vec<DenseUnitary<R>>> {
        self.check_theta(theta)?;
        self.blocks.iter().map(|b| b.unitary(theta)).collect()
    }

    /// `U(theta) |0...0>`.
    pub fn prepare_state<R: Real>(&self, theta: &[R]) -> Result<Statevector<R>> {
        let unitaries = self.block_unitaries(theta)?;
        self.prepare_with(&unitaries)
    }

    pub(crate) fn prepare_with<R: Real>(&self, unitaries: &[DenseUnitary<R>]) -> Result<Statevector<R>> {
        let mut state = Statevector::zero_state(self.n)?;
        for (block, u) in self.blocks.iter().zip(unitaries) {
            state.apply_block(u, &block.window)?;
        }
        Ok(state)
    }

    /// Uniform draw from `[0, 2 pi)^total_params`.
    pub fn random_parameters<R: Real, G: Rng + ?Sized>(&self, rng: &mut G) -> ParameterVector<R> {
        ParameterVector(
            (0..self.total_params)
                .map(|_| real(rng.random::<f64>() * TAU))
                .collect(),
        )
    }

    /// Parameters for this circuit that reproduce the state prepared by
    /// `prev` at `theta` (up to a global phase). `prev` must have one ebit
    /// less on the same register.
    ///
    /// Blocks `j < n - k - 1` become `B_j (x) I`. The last block absorbs the
    /// last two blocks of `prev`: when their windows are disjoint the
    /// generators commute and simply add, otherwise the product is taken
    /// and its logarithm expanded in the Pauli basis.
    pub fn embed_parameters<R: Real>(
        &self,
        prev: &AnsatzCircuit,
        theta: &[R],
    ) -> Result<ParameterVector<R>> {
        if prev.n != self.n || prev.k + 1 != self.k {
            return Err(Error::Argument(format!(
                "cannot embed a {}-ebit circuit on {} qubits into a {}-ebit circuit on {} qubits",
                prev.k, prev.n, self.k, self.n
            )));
        }
        prev.check_theta(theta)?;
        let mut out = vec![R::zero(); self.total_params];
        let last = self.blocks.len() - 1;
        let pad = PauliString::new(1, 0);
        for (j, block) in self.blocks.iter().enumerate().take(last) {
            let old = &prev.blocks[j];
            let coeffs = old.generator_coefficients(theta);
            let dst = &mut out[block.param_offset..block.param_offset + block.param_len];
            for (p, c) in PauliString::non_identity(old.width()).zip(coeffs) {
                dst[p.concat(&pad).code - 1] = c;
            }
        }

        let block = &self.blocks[last];
        let (a, b) = (&prev.blocks[last], &prev.blocks[last + 1]);
        let dst = &mut out[block.param_offset..block.param_offset + block.param_len];
        if prev.k == 0 {
            for (p, c) in PauliString::non_identity(1).zip(a.generator_coefficients(theta)) {
                dst[p.concat(&pad).code - 1] += c;
            }
            for (p, c) in PauliString::non_identity(1).zip(b.generator_coefficients(theta)) {
                dst[pad.concat(&p).code - 1] += c;
            }
        } else {
            let id2 = DMatrix::<C<R>>::identity(2, 2);
            let ua = a.unitary(theta)?.matrix().kronecker(&id2);
            let ub = id2.kronecker(b.unitary(theta)?.matrix());
            let h = unitary_log(&(ub * ua));
            dst.copy_from_slice(&pauli_coefficients(&h));
        }
        Ok(ParameterVector(out))
    }
}

/// `exp(-i H(params))` with `H = sum_j params_j G_j` over the non-identity
/// `w`-qubit Pauli strings in lexicographic order.
pub fn block_unitary<R: Real>(params: &[R], w: usize) -> Result<DenseUnitary<R>> {
    let h = pauli_generator(params, w)?;
    Ok(DenseUnitary::new_unchecked(expm_hermitian(&h, R::one())))
}

/// Single-qubit unitary whose first column is `(cos t1, e^{-i t2} sin t1)`.
pub fn product_qubit_unitary<R: Real>(t1: R, t2: R) -> DenseUnitary<R> {
    let (s, c) = (t1.sin(), t1.cos());
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[creal(c), -cis(t2).scale(s), cis(-t2).scale(s), creal(c)],
    );
    DenseUnitary::new_unchecked(m)
}

/// Pauli coefficients `(x, y, z)` with `exp(-i (x X + y Y + z Z))` equal to
/// `product_qubit_unitary(t1, t2)`.
pub fn product_qubit_generator<R: Real>(t1: R, t2: R) -> [R; 3] {
    [t1 * t2.sin(), t1 * t2.cos(), R::zero()]
}

/// Real parameter vector of an ansatz. Entries are unconstrained reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector<R: Real = f64>(pub Vec<R>);

impl<R: Real> ParameterVector<R> {
    pub fn zeros(len: usize) -> Self {
        Self(vec![R::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[R] {
        &self.0
    }

    /// Entries reduced into `[0, 2 pi)`, for reporting.
    pub fn canonical(&self) -> Vec<f64> {
        self.0
            .iter()
            .map(|&x| {
                let r = to_f64(x).rem_euclid(TAU);
                if r >= TAU {
                    0.0
                } else {
                    r
                }
            })
            .collect()
    }
}

impl<R: Real> std::ops::Deref for ParameterVector<R> {
    type Target = [R];

    fn deref(&self) -> &[R] {
        &self.0
    }
}

impl<R: Real> From<Vec<R>> for ParameterVector<R> {
    fn from(v: Vec<R>) -> Self {
        Self(v)
    }
}

/// Lower bound `(r^2 - 3 log2 r - 1) / 4` on the CNOT count of a generic
/// unitary on `log2 r` qubits.
pub fn cnot_lower_bound(r: u64) -> Result<f64> {
    if r < 2 || !r.is_power_of_two() {
        return Err(Error::Argument(format!("rank {r} is not a power of two >= 2")));
    }
    let rf = r as f64;
    Ok((rf * rf - 3.0 * rf.log2() - 1.0) / 4.0)
}

/// Largest entanglement, in ebits, that an `m`-layer circuit of two-qubit
/// gates can put across any cut of an `n`-qubit line: `min(ceil(n/2), m)`.
pub fn ebit_bound(n: usize, m: usize) -> usize {
    n.div_ceil(2).min(m)
}

/// Nominal gate-cost figure `l * n * r^2` for `l` optimizer steps.
pub fn cost_estimate(n: u64, r: u64, l: u64) -> u64 {
    l * n * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn circuit_shapes() {
        let c = AnsatzCircuit::build_mps_ansatz(4, 0).unwrap();
        assert_eq!((c.blocks().len(), c.total_params()), (4, 8));
        let c = AnsatzCircuit::build_mps_ansatz(4, 1).unwrap();
        assert_eq!((c.blocks().len(), c.total_params()), (3, 45));
        assert!(c.blocks().iter().all(|b| b.width() == 2));
        let c = AnsatzCircuit::build_mps_ansatz(6, 2).unwrap();
        assert_eq!((c.blocks().len(), c.total_params()), (4, 252));
        assert_eq!(c.blocks()[3].window.targets(), &[3, 4, 5]);
    }

    #[test]
    fn circuit_errors() {
        assert!(matches!(AnsatzCircuit::build_mps_ansatz(4, 3), Err(Error::Argument(_))));
        assert!(matches!(AnsatzCircuit::build_mps_ansatz(1, 0), Err(Error::Argument(_))));
        assert!(AnsatzCircuit::build_mps_ansatz(5, 2).is_ok());
        let c = AnsatzCircuit::build_mps_ansatz(3, 1).unwrap();
        assert!(matches!(c.prepare_state(&[0.0f64; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn parameter_slices_tile() {
        for (n, k) in [(4, 0), (5, 1), (6, 2), (7, 3)] {
            let c = AnsatzCircuit::build_mps_ansatz(n, k).unwrap();
            let theta: Vec<f64> = (0..c.total_params()).map(|i| i as f64).collect();
            let joined: Vec<f64> = c.blocks().iter().flat_map(|b| b.params(&theta).to_vec()).collect();
            assert_eq!(joined, theta);
        }
    }

    #[test]
    fn block_unitary_examples() {
        let id = block_unitary(&[0.0f64; 15], 2).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(4, 4));

        let u = block_unitary(&[0.0, PI / 2.0, 0.0], 1).unwrap();
        let mut s = Statevector::<f64>::zero_state(1).unwrap();
        s.apply_block(&u, &QubitWindow::contiguous(0, 1)).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);

        assert!(matches!(block_unitary(&[0.0f64; 14], 2), Err(Error::Shape(_))));
    }

    #[test]
    fn product_qubit_matches_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let (t1, t2) = (rng.random::<f64>() * 7.0 - 1.0, rng.random::<f64>() * 7.0 - 1.0);
            let u = product_qubit_unitary(t1, t2);
            let v = block_unitary(&product_qubit_generator(t1, t2), 1).unwrap();
            assert!((u.matrix() - v.matrix()).norm() < 1e-13);
        }
    }

    #[test]
    fn product_read_off() {
        let c = AnsatzCircuit::build_mps_ansatz(2, 0).unwrap();
        let theta = [0.3, 1.1, 0.9, -0.4];
        let s = c.prepare_state(&theta).unwrap();
        let q0 = [creal(0.3f64.cos()), cis(-1.1f64).scale(0.3f64.sin())];
        let q1 = [creal(0.9f64.cos()), cis(0.4f64).scale(0.9f64.sin())];
        for x in 0..4 {
            let expected = q0[x >> 1] * q1[x & 1];
            assert!((s.amplitudes()[x] - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_parameters_give_zero_state() {
        for (n, k) in [(3, 0), (4, 1), (6, 2)] {
            let c = AnsatzCircuit::build_mps_ansatz(n, k).unwrap();
            let s = c.prepare_state(&vec![0.0f64; c.total_params()]).unwrap();
            assert_eq!(s, Statevector::zero_state(n).unwrap());
        }
    }

    fn overlap(a: &Statevector<f64>, b: &Statevector<f64>) -> f64 {
        a.inner_product(b).unwrap().norm_sqr()
    }

    #[test]
    fn warm_start_reproduces_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 4, 5, 6] {
            for k in 0..n / 2 {
                let prev = AnsatzCircuit::build_mps_ansatz(n, k).unwrap();
                let next = AnsatzCircuit::build_mps_ansatz(n, k + 1).unwrap();
                let theta = prev.random_parameters::<f64, _>(&mut rng);
                let embedded = next.embed_parameters(&prev, &theta).unwrap();
                let a = prev.prepare_state(&theta).unwrap();
                let b = next.prepare_state(&embedded).unwrap();
                assert!((overlap(&a, &b) - 1.0).abs() < 1e-12, "n={n} k={k}");
            }
        }
        let c1 = AnsatzCircuit::build_mps_ansatz(4, 1).unwrap();
        let c0 = AnsatzCircuit::build_mps_ansatz(4, 0).unwrap();
        assert!(c0.embed_parameters(&c1, &[0.0f64; 45]).is_err());
    }

    #[test]
    fn canonical_reduction() {
        let p = ParameterVector(vec![-0.5f64, 7.0, 0.0]);
        let c = p.canonical();
        assert!((c[0] - (TAU - 0.5)).abs() < 1e-15);
        assert!((c[1] - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(c[2], 0.0);
    }

    #[test]
    fn resource_formulas() {
        assert_eq!(cnot_lower_bound(2).unwrap(), 0.0);
        assert_eq!(cnot_lower_bound(4).unwrap(), 2.25);
        assert_eq!(cnot_lower_bound(8).unwrap(), 13.5);
        assert!(cnot_lower_bound(6).is_err());
        assert!(cnot_lower_bound(1).is_err());
        assert_eq!(ebit_bound(6, 2), 2);
        assert_eq!(ebit_bound(5, 10), 3);
        assert_eq!(ebit_bound(4, 0), 0);
        assert_eq!(cost_estimate(4, 2, 1), 16);
        assert_eq!(cost_estimate(10, 4, 100), 16000);
        assert_eq!(cost_estimate(1, 1, 1), 1);
    }
}
