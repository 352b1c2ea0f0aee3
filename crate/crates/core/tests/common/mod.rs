#![allow(dead_code)]

use mpsvqa::linalg::kron;
use mpsvqa::{AnsatzCircuit, Statevector, C};
use nalgebra::DMatrix;

pub type M = DMatrix<C<f64>>;

pub fn c(re: f64, im: f64) -> C<f64> {
    C::new(re, im)
}

pub fn pauli(letter: char) -> M {
    let (z, o, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match letter {
        'I' => M::identity(2, 2),
        'X' => M::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => M::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => M::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!(),
    }
}

/// `I_{2^start} (x) u (x) I_{2^rest}` for a gate on contiguous qubits.
pub fn lift(u: &M, start: usize, n: usize) -> M {
    let w = u.nrows().trailing_zeros() as usize;
    let left = M::identity(1 << start, 1 << start);
    let right = M::identity(1 << (n - start - w), 1 << (n - start - w));
    kron(&kron(&left, u), &right)
}

/// Dense `U(theta)` assembled from the circuit's block unitaries.
pub fn dense_circuit(circuit: &AnsatzCircuit, theta: &[f64]) -> M {
    let n = circuit.num_qubits();
    let mut u = M::identity(1 << n, 1 << n);
    for (block, g) in circuit.blocks().iter().zip(circuit.block_unitaries(theta).unwrap()) {
        u = lift(g.matrix(), block.window.targets()[0], n) * u;
    }
    u
}

pub fn column(state: &Statevector<f64>) -> nalgebra::DVector<C<f64>> {
    nalgebra::DVector::from_column_slice(state.amplitudes())
}

/// Probability that qubit `q` (0 = most significant) reads 0.
pub fn prob_zero(amps: &[C<f64>], q: usize, n: usize) -> f64 {
    amps.iter()
        .enumerate()
        .filter(|(x, _)| (x >> (n - 1 - q)) & 1 == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

pub fn overlap(a: &[C<f64>], b: &[C<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C<f64>>().norm_sqr()
}
