//! Small dense linear-algebra helpers: Pauli strings, Hermitian exponentials,
//! unitary logarithms and random unitaries.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{arg, cis, czero, real, Real, C};
use crate::simulator::Statevector;

/// A `w`-qubit Pauli string encoded in base 4 with digits I=0, X=1, Y=2, Z=3.
/// The first qubit is the most significant digit, so increasing codes give
/// the lexicographic order over the alphabet (I, X, Y, Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliString {
    pub width: usize,
    pub code: usize,
}

impl PauliString {
    pub fn new(width: usize, code: usize) -> Self {
        debug_assert!(code < 1 << (2 * width));
        Self { width, code }
    }

    /// The 4^w - 1 non-identity strings in lexicographic order.
    pub fn non_identity(width: usize) -> impl Iterator<Item = PauliString> {
        (1..1usize << (2 * width)).map(move |code| Self::new(width, code))
    }

    /// Pauli letter on qubit `q` of the string (0 = I, 1 = X, 2 = Y, 3 = Z).
    pub fn letter(&self, q: usize) -> usize {
        (self.code >> (2 * (self.width - 1 - q))) & 3
    }

    pub fn label(&self) -> String {
        (0..self.width).map(|q| ['I', 'X', 'Y', 'Z'][self.letter(q)]).collect()
    }

    /// Appends `other` to the right of `self`.
    pub fn concat(&self, other: &PauliString) -> PauliString {
        Self::new(self.width + other.width, (self.code << (2 * other.width)) | other.code)
    }

    /// Each row of a Pauli string matrix has exactly one nonzero entry.
    /// Returns `(column, value)` for `row`.
    pub fn entry<R: Real>(&self, row: usize) -> (usize, C<R>) {
        let mut col = row;
        let mut phase = 0u32; // power of i
        for q in 0..self.width {
            let bit = 1 << (self.width - 1 - q);
            let row_bit = row & bit != 0;
            match self.letter(q) {
                1 => col ^= bit,
                2 => {
                    col ^= bit;
                    // <0|Y|1> = -i, <1|Y|0> = i
                    phase += if row_bit { 1 } else { 3 };
                }
                3 if row_bit => phase += 2,
                _ => {}
            }
        }
        let one = R::one();
        let zero = R::zero();
        let value = match phase % 4 {
            0 => C::new(one, zero),
            1 => C::new(zero, one),
            2 => C::new(-one, zero),
            _ => C::new(zero, -one),
        };
        (col, value)
    }

    pub fn matrix<R: Real>(&self) -> DMatrix<C<R>> {
        let dim = 1 << self.width;
        let mut m = DMatrix::from_element(dim, dim, czero());
        for row in 0..dim {
            let (col, v) = self.entry(row);
            m[(row, col)] = v;
        }
        m
    }
}

/// `H = sum_j coeffs[j] G_j` over the non-identity Pauli strings of `width`.
pub fn pauli_generator<R: Real>(coeffs: &[R], width: usize) -> Result<DMatrix<C<R>>> {
    let expected = (1usize << (2 * width)) - 1;
    if coeffs.len() != expected {
        return Err(Error::Shape(format!(
            "{} generator coefficients for a {width}-qubit block (expected {expected})",
            coeffs.len()
        )));
    }
    let dim = 1 << width;
    let mut h = DMatrix::from_element(dim, dim, czero());
    for (p, &c) in PauliString::non_identity(width).zip(coeffs) {
        if c == R::zero() {
            continue;
        }
        for row in 0..dim {
            let (col, v) = p.entry::<R>(row);
            h[(row, col)] += v.scale(c);
        }
    }
    Ok(h)
}

/// Real Pauli coefficients `tr(G_j H) / 2^w` of a Hermitian matrix, for the
/// non-identity strings in lexicographic order.
pub fn pauli_coefficients<R: Real>(h: &DMatrix<C<R>>) -> Vec<R> {
    let dim = h.nrows();
    let width = dim.trailing_zeros() as usize;
    let scale = real::<R>(dim as f64);
    PauliString::non_identity(width)
        .map(|p| {
            let mut tr = czero::<R>();
            for row in 0..dim {
                let (col, v) = p.entry::<R>(row);
                // (G H)_{col,col} picks G[col][row] H[row][col]; G is Hermitian so G[col][row] = conj(G[row][col]).
                tr += v.conj() * h[(row, col)];
            }
            tr.re / scale
        })
        .collect()
}

/// `||H - H^dag||_F`.
pub fn hermiticity_defect<R: Real>(h: &DMatrix<C<R>>) -> R {
    (h - h.adjoint()).norm()
}

/// `exp(-i t H)` for Hermitian `H` through its eigendecomposition.
pub fn expm_hermitian<R: Real>(h: &DMatrix<C<R>>, t: R) -> DMatrix<C<R>> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = cis(-(lambda * t));
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * v.adjoint()
}

/// Traceless Hermitian `H` with `exp(-i H)` equal to the unitary `u` up to a
/// global phase. Uses the complex Schur form, which is diagonal for normal
/// matrices.
pub fn unitary_log<R: Real>(u: &DMatrix<C<R>>) -> DMatrix<C<R>> {
    let dim = u.nrows();
    let (q, t) = u.clone().schur().unpack();
    let phases: Vec<R> = (0..dim).map(|j| arg(t[(j, j)])).collect();
    let mean = phases.iter().fold(R::zero(), |a, &b| a + b) / real(dim as f64);
    let mut scaled = q.clone();
    for (j, &phi) in phases.iter().enumerate() {
        let coeff = C::new(-(phi - mean), R::zero());
        for i in 0..dim {
            scaled[(i, j)] *= coeff;
        }
    }
    let h = scaled * q.adjoint();
    (&h + h.adjoint()).unscale(real(2.0))
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of R's diagonal divided out.
pub fn random_unitary<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> DMatrix<C<R>> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C::new(real::<R>(re), real::<R>(im))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let modulus = d.norm_sqr().sqrt();
        if modulus > R::zero() {
            let phase = d.unscale(modulus);
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> DMatrix<C<R>> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C::new(real::<R>(re), real::<R>(im))
    });
    (&g + g.adjoint()).unscale(real(2.0))
}

/// Haar-random normalized statevector.
pub fn random_state<R: Real, G: Rng + ?Sized>(n: usize, rng: &mut G) -> Statevector<R> {
    let amps = (0..1usize << n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C::new(real::<R>(re), real::<R>(im))
        })
        .collect();
    Statevector::normalized(amps).expect("Gaussian vector is nonzero")
}

/// Kronecker product `a (x) b`; `a` acts on the more significant qubits.
pub fn kron<R: Real>(a: &DMatrix<C<R>>, b: &DMatrix<C<R>>) -> DMatrix<C<R>> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = DMatrix<C<f64>>;

    fn close(a: &M, b: &M, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn single_qubit_paulis() {
        let x: M = PauliString::new(1, 1).matrix();
        let y: M = PauliString::new(1, 2).matrix();
        let z: M = PauliString::new(1, 3).matrix();
        let i = C::new(0.0, 1.0);
        assert_eq!(x, M::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]));
        assert_eq!(y, M::from_row_slice(2, 2, &[0.0.into(), -i, i, 0.0.into()]));
        assert_eq!(z, M::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()]));
    }

    #[test]
    fn pauli_strings_are_kronecker_products() {
        for code in 0..16 {
            let p = PauliString::new(2, code);
            let a: M = PauliString::new(1, code >> 2).matrix();
            let b: M = PauliString::new(1, code & 3).matrix();
            assert_eq!(p.matrix::<f64>(), kron(&a, &b), "{}", p.label());
        }
        assert_eq!(PauliString::new(2, 6).label(), "XY");
        assert_eq!(PauliString::new(1, 2).concat(&PauliString::new(1, 0)).label(), "YI");
    }

    #[test]
    fn coefficients_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let coeffs: Vec<f64> = (0..63).map(|_| rng.random::<f64>() - 0.5).collect();
        let h = pauli_generator(&coeffs, 3).unwrap();
        assert!(hermiticity_defect(&h) < 1e-14);
        let back = pauli_coefficients(&h);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(pauli_generator(&coeffs[..10], 3).is_err());
    }

    #[test]
    fn expm_matches_taylor_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h: M = random_hermitian(4, &mut rng).unscale(4.0);
        let u = expm_hermitian(&h, 0.7);
        // Independent route: truncated Taylor series of exp(-i 0.7 H).
        let a = h.scale(0.7) * C::new(0.0, -1.0);
        let mut term = M::identity(4, 4);
        let mut sum = M::identity(4, 4);
        for k in 1..40 {
            term = &term * &a / C::new(k as f64, 0.0);
            sum += &term;
        }
        assert!(close(&u, &sum, 1e-12));
    }

    #[test]
    fn log_inverts_exp_up_to_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let u: M = random_unitary(8, &mut rng);
            let h = unitary_log(&u);
            assert!(hermiticity_defect(&h) < 1e-12);
            assert!(h.trace().norm() < 1e-12);
            let back = expm_hermitian(&h, 1.0);
            // back = e^{i a} u for some global phase a
            let ratio = (u.adjoint() * &back).trace() / C::new(8.0, 0.0);
            assert!((ratio.norm() - 1.0).abs() < 1e-10);
            assert!(close(&back, &(u.clone() * ratio), 1e-10));
        }
    }

    #[test]
    fn log_of_degenerate_unitary() {
        let x: M = PauliString::new(1, 1).matrix();
        let u = kron(&expm_hermitian(&x, 0.4), &M::identity(2, 2));
        let h = unitary_log(&u);
        let back = expm_hermitian(&h, 1.0);
        let ratio = (u.adjoint() * &back).trace() / C::new(4.0, 0.0);
        assert!(close(&back, &(u * ratio), 1e-12));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u: M = random_unitary(16, &mut rng);
        assert!(crate::simulator::unitarity_defect(&u) < 1e-12);
    }
}
