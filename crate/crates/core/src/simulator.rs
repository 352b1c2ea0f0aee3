//! Dense statevector simulation.
//!
//! Basis ordering is big-endian: qubit 0 is the most significant bit, so the
//! bitstring `b_0 b_1 ... b_{n-1}` sits at index `sum_i b_i * 2^(n-1-i)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, real, Real, C};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Bit mask of qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<R: Real = f64> {
    n: usize,
    amps: Vec<C<R>>,
}

impl<R: Real> Statevector<R> {
    /// `|0...0>` on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let mut amps = vec![czero(); 1 << n];
        amps[0] = cone();
        Ok(Self { n, amps })
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        if index >= 1 << n {
            return Err(Error::Range(format!("basis index {index} on {n} qubits")));
        }
        let mut amps = vec![czero(); 1 << n];
        amps[index] = cone();
        Ok(Self { n, amps })
    }

    /// Wraps a normalized amplitude vector.
    pub fn new(amps: Vec<C<R>>) -> Result<Self> {
        let state = Self::from_raw(amps)?;
        let defect = (state.norm() - R::one()).abs();
        if defect > R::check_tol() {
            return Err(Error::Validation(format!(
                "amplitudes not normalized (|norm - 1| = {defect})"
            )));
        }
        Ok(state)
    }

    /// Wraps an amplitude vector without checking its norm. The length must
    /// still be a power of two.
    pub fn from_raw(amps: Vec<C<R>>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "amplitude vector length {len} is not 2^n with n >= 1"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_qubits(n)?;
        Ok(Self { n, amps })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: Vec<C<R>>) -> Result<Self> {
        let mut state = Self::from_raw(amps)?;
        let norm = state.norm();
        if norm <= R::zero() {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        for a in &mut state.amps {
            *a = a.unscale(norm);
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C<R>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C<R>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C<R>> {
        self.amps
    }

    pub fn norm(&self) -> R {
        self.amps
            .iter()
            .fold(R::zero(), |acc, a| acc + a.norm_sqr())
            .sqrt()
    }

    /// Applies `u` to the qubits of `window`, identity elsewhere.
    ///
    /// The first target is the most significant bit of the block's local
    /// index. The 2^w amplitudes of each non-target index group are gathered,
    /// multiplied by `u` and scattered back.
    pub fn apply_block(&mut self, u: &DenseUnitary<R>, window: &QubitWindow) -> Result<()> {
        window.check(self.n)?;
        if u.width() != window.len() {
            return Err(Error::Shape(format!(
                "{}-qubit block on a {}-qubit window",
                u.width(),
                window.len()
            )));
        }
        let w = window.len();
        let dim = 1 << w;
        let masks: Vec<usize> = window
            .targets()
            .iter()
            .map(|&q| qubit_mask(self.n, q))
            .collect();
        let target_mask: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| local & (1 << (w - 1 - j)) != 0)
                    .map(|(_, m)| m)
                    .sum()
            })
            .collect();

        let m = u.matrix();
        let mut gathered = vec![czero::<R>(); dim];
        for base in 0..self.amps.len() {
            if base & target_mask != 0 {
                continue;
            }
            for (g, &off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amps[base + off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let mut acc = czero::<R>();
                for (col, g) in gathered.iter().enumerate() {
                    acc += m[(row, col)] * g;
                }
                self.amps[base + off] = acc;
            }
        }
        Ok(())
    }

    /// `<psi| P_i |psi>` with `P_i = |0><0|` on qubit `i`.
    pub fn projector_prob(&self, i: usize) -> Result<R> {
        if i >= self.n {
            return Err(Error::Range(format!("qubit {i} on {} qubits", self.n)));
        }
        let mask = qubit_mask(self.n, i);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(x, _)| x & mask == 0)
            .fold(R::zero(), |acc, (_, a)| acc + a.norm_sqr()))
    }

    /// All single-qubit `|0>` probabilities in one pass.
    pub fn projector_probs(&self) -> Vec<R> {
        let mut p = vec![R::zero(); self.n];
        for (x, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            for (i, pi) in p.iter_mut().enumerate() {
                if x & qubit_mask(self.n, i) == 0 {
                    *pi += w;
                }
            }
        }
        p
    }

    /// `sum_x conj(a_x) b_x`.
    pub fn inner_product(&self, other: &Self) -> Result<C<R>> {
        if self.n != other.n {
            return Err(Error::Shape(format!(
                "inner product of {}- and {}-qubit states",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Shot-sampled estimates of every `projector_prob`.
    ///
    /// Draws `shots` full bitstrings from the Born distribution with a
    /// ChaCha8 generator seeded by `seed`, then reports the fraction of shots
    /// in which each qubit read `0`.
    pub fn sample_probs(&self, shots: usize, seed: u64) -> Result<Vec<R>> {
        if shots == 0 {
            return Err(Error::Argument("shots must be at least 1".into()));
        }
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0f64;
        for a in &self.amps {
            acc += crate::scalar::to_f64(a.norm_sqr());
            cdf.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut zeros = vec![0usize; self.n];
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let x = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            for (i, z) in zeros.iter_mut().enumerate() {
                if x & qubit_mask(self.n, i) == 0 {
                    *z += 1;
                }
            }
        }
        Ok(zeros
            .into_iter()
            .map(|z| real(z as f64 / shots as f64))
            .collect())
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n} qubits outside the supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Ordered list of distinct target qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitWindow {
    targets: Vec<usize>,
}

impl QubitWindow {
    pub fn new(targets: Vec<usize>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Argument("empty qubit window".into()));
        }
        for (j, t) in targets.iter().enumerate() {
            if targets[..j].contains(t) {
                return Err(Error::Argument(format!("qubit {t} repeated in window")));
            }
        }
        Ok(Self { targets })
    }

    /// Contiguous window `[start, start + width)`.
    pub fn contiguous(start: usize, width: usize) -> Self {
        Self {
            targets: (start..start + width).collect(),
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn check(&self, n: usize) -> Result<()> {
        match self.targets.iter().find(|&&t| t >= n) {
            Some(t) => Err(Error::Range(format!("qubit {t} on {n} qubits"))),
            None => Ok(()),
        }
    }
}

/// Square unitary on `width` qubits. Unitarity is validated once, here.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary<R: Real = f64> {
    width: usize,
    matrix: DMatrix<C<R>>,
}

impl<R: Real> DenseUnitary<R> {
    pub fn new(matrix: DMatrix<C<R>>) -> Result<Self> {
        let width = square_width(&matrix)?;
        let defect = unitarity_defect(&matrix);
        if defect > R::check_tol() {
            return Err(Error::Validation(format!(
                "matrix is not unitary: ||U^dag U - I||_F = {defect}"
            )));
        }
        Ok(Self { width, matrix })
    }

    /// Skips the unitarity check. For matrices unitary by construction.
    pub(crate) fn new_unchecked(matrix: DMatrix<C<R>>) -> Self {
        let width = matrix.nrows().trailing_zeros() as usize;
        Self { width, matrix }
    }

    pub fn identity(width: usize) -> Self {
        Self::new_unchecked(DMatrix::identity(1 << width, 1 << width))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        1 << self.width
    }

    pub fn matrix(&self) -> &DMatrix<C<R>> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            width: self.width,
            matrix: self.matrix.adjoint(),
        }
    }
}

fn square_width<R: Real>(m: &DMatrix<C<R>>) -> Result<usize> {
    let dim = m.nrows();
    if dim != m.ncols() || dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Shape(format!(
            "{}x{} matrix is not a square 2^w block",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// `||U^dag U - I||_F`.
pub fn unitarity_defect<R: Real>(m: &DMatrix<C<R>>) -> R {
    let prod = m.adjoint() * m;
    let id = DMatrix::<C<R>>::identity(m.nrows(), m.ncols());
    (prod - id).norm()
}
