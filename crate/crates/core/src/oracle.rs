//! Black-box unitaries `Q` whose eigenvectors are searched for.
//!
//! Three realizations are supported: an explicit dense matrix (including
//! `exp(-i t H)` for a Hermitian `H`), a diagonal phase oracle built from a
//! SAT instance, and a planted oracle `Q = V diag(e^{i phi}) V^dag` whose
//! first eigenvector is a known matrix product state.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzCircuit, ParameterVector};
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, hermiticity_defect, random_unitary};
use crate::scalar::{cis, cone, czero, real, to_f64, Real, C};
use crate::simulator::{qubit_mask, unitarity_defect, Statevector};
use crate::vqa::derive_seed;

/// Tolerance for externally supplied unitaries and Hamiltonians.
const INPUT_TOL: f64 = 1e-8;

pub const MAX_PLANTED_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKindName {
    Dense,
    DiagonalPhase,
    Planted,
}

#[derive(Debug, Clone)]
pub struct Planted<R: Real> {
    pub circuit: AnsatzCircuit,
    pub theta_star: ParameterVector<R>,
    /// Eigenphases; `phases[0]` belongs to the planted state.
    pub phases: Vec<R>,
    pub state: Statevector<R>,
    /// Householder vector of the reflection mapping `e_0` onto the planted
    /// state up to a phase; `None` when the planted state is already `e_0`.
    reflector: Option<Vec<C<R>>>,
    /// Haar unitary on the complement of `e_0`. Without it the remaining
    /// eigenvectors are reflections of basis states, i.e. nearly product
    /// states, and any of them certifies as well as the planted one.
    mixer: DMatrix<C<R>>,
}

#[derive(Debug, Clone)]
enum Payload<R: Real> {
    Dense(DMatrix<C<R>>),
    DiagonalPhase(Vec<C<R>>),
    Planted(Box<Planted<R>>),
}

#[derive(Debug, Clone)]
pub struct BlackBoxUnitary<R: Real = f64> {
    n: usize,
    payload: Payload<R>,
}

impl<R: Real> BlackBoxUnitary<R> {
    pub fn from_dense_matrix(m: DMatrix<C<R>>) -> Result<Self> {
        let n = register_size(m.nrows(), m.ncols())?;
        let defect = unitarity_defect(&m);
        if !(defect <= real::<R>(INPUT_TOL).max(R::check_tol())) {
            return Err(Error::Validation(format!(
                "oracle matrix is not unitary: ||U^dag U - I||_F = {defect}"
            )));
        }
        Ok(Self {
            n,
            payload: Payload::Dense(m),
        })
    }

    /// `exp(-i t H)` by exact eigendecomposition of the Hermitian `h`.
    pub fn from_hamiltonian_evolution(h: &DMatrix<C<R>>, t: R) -> Result<Self> {
        let n = register_size(h.nrows(), h.ncols())?;
        if !t.is_finite() {
            return Err(Error::Argument(format!("evolution time {t} is not finite")));
        }
        let defect = hermiticity_defect(h);
        if !(defect <= real::<R>(INPUT_TOL).max(R::check_tol())) {
            return Err(Error::Validation(format!(
                "Hamiltonian is not Hermitian: ||H - H^dag||_F = {defect}"
            )));
        }
        Ok(Self {
            n,
            payload: Payload::Dense(expm_hermitian(h, t)),
        })
    }

    /// Diagonal oracle with phases `e^{-i t c(x)}`, `c(x)` the number of
    /// clauses violated by assignment `x`.
    pub fn from_sat_instance(sat: &SatInstance, t: R) -> Result<Self> {
        sat.validate()?;
        let n = sat.num_vars;
        if n == 0 || n > crate::simulator::MAX_QUBITS {
            return Err(Error::Capacity(format!("{n} variables")));
        }
        let phases = (0..1usize << n)
            .map(|x| cis(-(t * real::<R>(sat.unsatisfied(x) as f64))))
            .collect();
        Ok(Self {
            n,
            payload: Payload::DiagonalPhase(phases),
        })
    }

    /// Diagonal oracle from explicit unit-modulus phases.
    pub fn from_phases(phases: Vec<C<R>>) -> Result<Self> {
        let n = register_size(phases.len(), phases.len())?;
        let tol = real::<R>(1e-12).max(R::check_tol() * real(1e-2));
        if let Some(bad) = phases.iter().find(|z| !((z.norm_sqr().sqrt() - R::one()).abs() <= tol)) {
            return Err(Error::Validation(format!("phase {bad} does not have unit modulus")));
        }
        Ok(Self {
            n,
            payload: Payload::DiagonalPhase(phases),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_phases(vec![cone(); 1 << n])
    }

    /// `Q = V diag(e^{i phases}) V^dag` where `V e_0` is the state prepared by
    /// `circuit` at `theta_star`. `V` is a Householder reflection composed
    /// with a Haar unitary fixing `e_0`, seeded from the inputs so the same
    /// arguments always give the same `Q`.
    pub fn planted_unitary(
        circuit: &AnsatzCircuit,
        theta_star: ParameterVector<R>,
        phases: Vec<R>,
    ) -> Result<Self> {
        let n = circuit.num_qubits();
        if n > MAX_PLANTED_QUBITS {
            return Err(Error::Capacity(format!(
                "planted oracles are dense on the complement; {n} > {MAX_PLANTED_QUBITS} qubits"
            )));
        }
        if phases.len() != 1 << n {
            return Err(Error::Shape(format!(
                "{} eigenphases for {n} qubits (expected {})",
                phases.len(),
                1usize << n
            )));
        }
        let state = circuit.prepare_state(&theta_star)?;
        let v = state.amplitudes();
        let v0 = v[0];
        let m0 = v0.norm_sqr().sqrt();
        let align = if m0 > R::zero() { v0.unscale(m0) } else { cone() };
        // u = align * e_0 - v maps align * e_0 onto v.
        let mut u: Vec<C<R>> = v.iter().map(|a| -*a).collect();
        u[0] += align;
        let norm2 = u.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr());
        let reflector = if norm2 > real(1e-24) {
            let s = norm2.sqrt();
            Some(u.into_iter().map(|z| z.unscale(s)).collect())
        } else {
            None
        };
        let words: Vec<u64> = theta_star
            .iter()
            .chain(&phases)
            .map(|x| to_f64(*x).to_bits())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(n as u64, &words));
        let mixer = random_unitary((1 << n) - 1, &mut rng);
        Ok(Self {
            n,
            payload: Payload::Planted(Box::new(Planted {
                circuit: circuit.clone(),
                theta_star,
                phases,
                state,
                reflector,
                mixer,
            })),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> OracleKindName {
        match self.payload {
            Payload::Dense(_) => OracleKindName::Dense,
            Payload::DiagonalPhase(_) => OracleKindName::DiagonalPhase,
            Payload::Planted(_) => OracleKindName::Planted,
        }
    }

    pub fn planted(&self) -> Option<&Planted<R>> {
        match &self.payload {
            Payload::Planted(p) => Some(p),
            _ => None,
        }
    }

    /// Diagonal entries for the diagonal-phase kind.
    pub fn phases(&self) -> Option<&[C<R>]> {
        match &self.payload {
            Payload::DiagonalPhase(p) => Some(p),
            _ => None,
        }
    }

    /// `Q |state>`.
    pub fn apply(&self, state: &Statevector<R>) -> Result<Statevector<R>> {
        if state.num_qubits() != self.n {
            return Err(Error::Shape(format!(
                "{}-qubit oracle applied to a {}-qubit state",
                self.n,
                state.num_qubits()
            )));
        }
        let a = state.amplitudes();
        let out = match &self.payload {
            Payload::Dense(m) => {
                let dim = a.len();
                (0..dim)
                    .map(|i| (0..dim).fold(czero(), |acc, j| acc + m[(i, j)] * a[j]))
                    .collect()
            }
            Payload::DiagonalPhase(p) => a.iter().zip(p).map(|(x, z)| x * z).collect(),
            Payload::Planted(p) => {
                // Q = H M D M^dag H with H the (Hermitian, involutory)
                // reflection and M = 1 + mixer.
                let mut y = a.to_vec();
                if let Some(u) = &p.reflector {
                    reflect(u, &mut y);
                }
                let tail = DVector::from_column_slice(&y[1..]);
                let mut tail = p.mixer.ad_mul(&tail);
                y[0] *= cis(p.phases[0]);
                for (z, &phi) in tail.iter_mut().zip(&p.phases[1..]) {
                    *z *= cis(phi);
                }
                y[1..].copy_from_slice((&p.mixer * tail).as_slice());
                if let Some(u) = &p.reflector {
                    reflect(u, &mut y);
                }
                y
            }
        };
        Statevector::from_raw(out)
    }

    /// Materializes `Q` column by column.
    pub fn to_dense(&self) -> Result<DMatrix<C<R>>> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::from_element(dim, dim, czero());
        for j in 0..dim {
            let col = self.apply(&Statevector::basis_state(self.n, j)?)?;
            for (i, z) in col.amplitudes().iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        Ok(m)
    }
}

/// `y <- (I - 2 u u^dag) y` for unit `u`.
fn reflect<R: Real>(u: &[C<R>], y: &mut [C<R>]) {
    let proj = u.iter().zip(y.iter()).fold(czero::<R>(), |acc, (a, b)| acc + a.conj() * b);
    let coeff = proj.scale(real(2.0));
    for (yi, ui) in y.iter_mut().zip(u) {
        *yi -= ui * coeff;
    }
}

fn register_size(rows: usize, cols: usize) -> Result<usize> {
    if rows != cols || rows < 2 || !rows.is_power_of_two() {
        return Err(Error::Shape(format!("{rows}x{cols} is not a 2^n x 2^n operator")));
    }
    let n = rows.trailing_zeros() as usize;
    if n > crate::simulator::MAX_QUBITS {
        return Err(Error::Capacity(format!("{n} qubits")));
    }
    Ok(n)
}

/// Eigenphases for a planted oracle: `phases[0]` is uniform on the circle,
/// the other `2^n - 1` phases are evenly spaced over the arc that keeps them
/// at least `min_gap` away from it, then shuffled. Spreading them out keeps
/// superpositions of the unplanted eigenvectors from scoring a spuriously
/// high certificate.
pub fn planted_phases<G: Rng + ?Sized>(n: usize, min_gap: f64, rng: &mut G) -> Result<Vec<f64>> {
    if !(0.0..std::f64::consts::PI).contains(&min_gap) {
        return Err(Error::Argument(format!("eigenphase gap {min_gap} outside [0, pi)")));
    }
    let phi0 = rng.random::<f64>() * TAU;
    let others = (1usize << n) - 1;
    let span = TAU - 2.0 * min_gap;
    let spacing = if others > 1 { span / (others - 1) as f64 } else { 0.0 };
    let mut rest: Vec<f64> = (0..others)
        .map(|j| {
            let offset = if others > 1 { spacing * j as f64 } else { 0.5 * span };
            (phi0 + min_gap + offset).rem_euclid(TAU)
        })
        .collect();
    rest.shuffle(rng);
    let mut phases = vec![phi0];
    phases.extend(rest);
    Ok(phases)
}

/// Smallest circular distance between `phases[0]` and any other phase.
pub fn planted_gap(phases: &[f64]) -> f64 {
    phases[1..]
        .iter()
        .map(|&p| {
            let d = (p - phases[0]).rem_euclid(TAU);
            d.min(TAU - d)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Dense `-J sum Z_i Z_{i+1} - h sum X_i` on an open chain.
pub fn tfim_hamiltonian<R: Real>(n: usize, coupling: R, field: R) -> Result<DMatrix<C<R>>> {
    if n == 0 || n > 12 {
        return Err(Error::Capacity(format!("dense Hamiltonian on {n} qubits (max 12)")));
    }
    let dim = 1usize << n;
    let mut h = DMatrix::from_element(dim, dim, czero());
    for x in 0..dim {
        let mut diag = R::zero();
        for i in 0..n - 1 {
            let same = (x & qubit_mask(n, i) == 0) == (x & qubit_mask(n, i + 1) == 0);
            diag -= if same { coupling } else { -coupling };
        }
        h[(x, x)] = C::new(diag, R::zero());
        for i in 0..n {
            h[(x ^ qubit_mask(n, i), x)] -= C::new(field, R::zero());
        }
    }
    Ok(h)
}

/// CNF formula. Literal `v > 0` asserts variable `v`, `-v` its negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatInstance {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

impl SatInstance {
    pub fn validate(&self) -> Result<()> {
        for (ci, clause) in self.clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::Validation(format!("clause {ci} is empty")));
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > self.num_vars {
                    return Err(Error::Validation(format!(
                        "clause {ci}: literal {lit} outside 1..={}",
                        self.num_vars
                    )));
                }
            }
        }
        Ok(())
    }

    /// Truth value of variable `v` (1-based) in basis state `x`: qubit
    /// `v - 1` reading `|1>` means true.
    pub fn value(&self, x: usize, v: usize) -> bool {
        x & qubit_mask(self.num_vars, v - 1) != 0
    }

    /// Number of clauses violated by assignment `x`.
    pub fn unsatisfied(&self, x: usize) -> usize {
        self.clauses
            .iter()
            .filter(|clause| {
                !clause
                    .iter()
                    .any(|&lit| self.value(x, lit.unsigned_abs() as usize) == (lit > 0))
            })
            .count()
    }

    /// Default evolution time `2 pi / (m + 1)` for `m` clauses, which keeps
    /// the `m + 1` possible costs on distinct points of the unit circle.
    pub fn default_time(&self) -> f64 {
        TAU / (self.clauses.len() as f64 + 1.0)
    }

    /// Uniformly random `k`-SAT instance with distinct variables per clause.
    pub fn random<G: Rng + ?Sized>(num_vars: usize, num_clauses: usize, k: usize, rng: &mut G) -> Self {
        let k = k.min(num_vars);
        let clauses = (0..num_clauses)
            .map(|_| {
                let mut vars: Vec<i64> = Vec::with_capacity(k);
                while vars.len() < k {
                    let v = rng.random_range(1..=num_vars as i64);
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
                vars.into_iter()
                    .map(|v| if rng.random::<bool>() { v } else { -v })
                    .collect()
            })
            .collect();
        Self { num_vars, clauses }
    }
}

/// Parses DIMACS CNF. Comment lines start with `c`; a `%` line ends the
/// clause section (SATLIB convention). A final clause missing its `0`
/// terminator is accepted.
pub fn parse_dimacs(text: &str) -> Result<SatInstance> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line_no, "duplicate problem line"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(parse_err(line_no, "expected 'p cnf <vars> <clauses>'"));
            }
            let vars = parts[2]
                .parse()
                .map_err(|_| parse_err(line_no, "variable count is not an integer"))?;
            let count = parts[3]
                .parse()
                .map_err(|_| parse_err(line_no, "clause count is not an integer"))?;
            header = Some((vars, count, line_no));
            continue;
        }
        let Some((vars, _, _)) = header else {
            return Err(parse_err(line_no, "clause before the 'p cnf' header"));
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, &format!("invalid literal '{tok}'")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(parse_err(line_no, "empty clause"));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > vars {
                    return Err(parse_err(
                        line_no,
                        &format!("literal {lit} exceeds declared variable count {vars}"),
                    ));
                }
                current.push(lit);
            }
        }
    }
    let Some((num_vars, count, header_line)) = header else {
        return Err(parse_err(last_line.max(1), "missing 'p cnf' header"));
    };
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != count {
        return Err(parse_err(
            header_line,
            &format!("header declares {count} clauses but {} were read", clauses.len()),
        ));
    }
    Ok(SatInstance { num_vars, clauses })
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

/// On-disk dense operator: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrixFile {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DenseMatrixFile {
    pub fn to_matrix<R: Real>(&self) -> Result<DMatrix<C<R>>> {
        let dim = 1usize
            .checked_shl(self.n as u32)
            .filter(|_| self.n >= 1 && self.n <= crate::simulator::MAX_QUBITS)
            .ok_or_else(|| Error::Capacity(format!("n = {}", self.n)))?;
        let rows_ok = self.re.len() == dim && self.im.len() == dim;
        let cols_ok = self.re.iter().chain(&self.im).all(|r| r.len() == dim);
        if !rows_ok || !cols_ok {
            return Err(Error::Shape(format!("matrix file for n = {} must be {dim}x{dim}", self.n)));
        }
        Ok(DMatrix::from_fn(dim, dim, |i, j| {
            C::new(real(self.re[i][j]), real(self.im[i][j]))
        }))
    }

    pub fn from_matrix<R: Real>(m: &DMatrix<C<R>>) -> Self {
        let dim = m.nrows();
        let part = |f: &dyn Fn(C<R>) -> R| -> Vec<Vec<f64>> {
            (0..dim)
                .map(|i| (0..dim).map(|j| crate::scalar::to_f64(f(m[(i, j)]))).collect())
                .collect()
        };
        Self {
            n: dim.trailing_zeros() as usize,
            re: part(&|z| z.re),
            im: part(&|z| z.im),
        }
    }
}

/// Reads a dense oracle from its JSON file contents.
pub fn oracle_from_dense_json<R: Real>(text: &str) -> Result<BlackBoxUnitary<R>> {
    let file: DenseMatrixFile = serde_json::from_str(text)?;
    BlackBoxUnitary::from_dense_matrix(file.to_matrix()?)
}
