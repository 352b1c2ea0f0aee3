//! Open-boundary matrix product states and bipartite entanglement analysis.
//!
//! Site tensors have shape `(left, 2, right)` and are stored row-major. The
//! decomposition is a single left-to-right sweep of reshapes and SVDs, which
//! leaves every site except the last as a left isometry.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{czero, real, to_f64, Real, C};
use crate::simulator::Statevector;

#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor<R: Real = f64> {
    left: usize,
    right: usize,
    data: Vec<C<R>>,
}

impl<R: Real> SiteTensor<R> {
    pub fn new(left: usize, right: usize, data: Vec<C<R>>) -> Result<Self> {
        if left == 0 || right == 0 || data.len() != left * 2 * right {
            return Err(Error::Shape(format!(
                "site tensor ({left}, 2, {right}) with {} entries",
                data.len()
            )));
        }
        Ok(Self { left, right, data })
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.left, 2, self.right]
    }

    pub fn data(&self) -> &[C<R>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, a: usize, s: usize, b: usize) -> C<R> {
        self.data[(a * 2 + s) * self.right + b]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsState<R: Real = f64> {
    tensors: Vec<SiteTensor<R>>,
}

impl<R: Real> MpsState<R> {
    pub fn new(tensors: Vec<SiteTensor<R>>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Shape("MPS with no sites".into()));
        }
        if tensors[0].left != 1 || tensors[tensors.len() - 1].right != 1 {
            return Err(Error::Shape("open boundary bonds must have dimension 1".into()));
        }
        for (i, pair) in tensors.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::Shape(format!(
                    "bond {i}: right dimension {} != left dimension {}",
                    pair[0].right, pair[1].left
                )));
            }
        }
        Ok(Self { tensors })
    }

    pub fn num_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn tensors(&self) -> &[SiteTensor<R>] {
        &self.tensors
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.tensors.len() - 1]
            .iter()
            .map(|t| t.right)
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Left-canonical MPS of `state`, discarding singular values `<= tol`.
    pub fn from_statevector(state: &Statevector<R>, tol: R) -> Self {
        sweep_decompose(state.amplitudes(), state.num_qubits(), tol, usize::MAX, false).0
    }

    /// Full contraction back to a statevector.
    pub fn to_statevector(&self) -> Result<Statevector<R>> {
        // acc is row-major (2^i, bond)
        let mut acc = vec![C::new(R::one(), R::zero())];
        let mut rows = 1usize;
        for t in &self.tensors {
            let mut next = vec![czero::<R>(); rows * 2 * t.right];
            for x in 0..rows {
                for a in 0..t.left {
                    let w = acc[x * t.left + a];
                    if w == czero() {
                        continue;
                    }
                    for s in 0..2 {
                        for b in 0..t.right {
                            next[(x * 2 + s) * t.right + b] += w * t.get(a, s, b);
                        }
                    }
                }
            }
            acc = next;
            rows *= 2;
        }
        Statevector::from_raw(acc)
    }

    /// Deviation of each site from the left-isometry condition
    /// `sum_{a,s} conj(A[a,s,b]) A[a,s,b'] = delta_{bb'}`. For the last site
    /// this is the deviation of its squared norm from one.
    pub fn left_isometry_defects(&self) -> Vec<R> {
        self.tensors
            .iter()
            .map(|t| {
                let mut defect = R::zero();
                for b in 0..t.right {
                    for b2 in 0..t.right {
                        let mut g = czero::<R>();
                        for a in 0..t.left {
                            for s in 0..2 {
                                g += t.get(a, s, b).conj() * t.get(a, s, b2);
                            }
                        }
                        if b == b2 {
                            g -= C::new(R::one(), R::zero());
                        }
                        defect += g.norm_sqr();
                    }
                }
                defect.sqrt()
            })
            .collect()
    }

    /// Keeps at most `max_rank` singular values on every bond and
    /// renormalizes. See [`Truncation`].
    pub fn truncate(&self, max_rank: usize) -> Result<Truncation<R>> {
        if max_rank == 0 {
            return Err(Error::Argument("target rank must be at least 1".into()));
        }
        if max_rank >= self.max_bond() {
            return Ok(Truncation {
                mps: self.clone(),
                eps: R::zero(),
                err1: R::zero(),
                err2: R::zero(),
            });
        }
        let original = self.to_statevector()?;
        let norm = original.norm();
        let (mps, eps) = sweep_decompose(
            original.amplitudes(),
            self.num_sites(),
            R::svd_cutoff(),
            max_rank,
            true,
        );
        let truncated = mps.to_statevector()?;
        let overlap = original.inner_product(&truncated)?.norm_sqr()
            / (norm * norm * truncated.norm() * truncated.norm());
        let infidelity = (R::one() - overlap).max(R::zero());
        Ok(Truncation {
            mps,
            eps,
            err1: real::<R>(2.0) * infidelity.sqrt(),
            err2: infidelity,
        })
    }

    /// JSON export with row-major `(left, 2, right)` flattening.
    pub fn export(&self) -> MpsExport {
        MpsExport {
            n: self.num_sites(),
            bond_dims: self.bond_dims(),
            tensors: self
                .tensors
                .iter()
                .map(|t| TensorExport {
                    shape: t.shape(),
                    re: t.data.iter().map(|z| to_f64(z.re)).collect(),
                    im: t.data.iter().map(|z| to_f64(z.im)).collect(),
                })
                .collect(),
        }
    }

    pub fn import(export: &MpsExport) -> Result<Self> {
        let tensors = export
            .tensors
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if t.shape[1] != 2 || t.re.len() != t.im.len() {
                    return Err(Error::Shape(format!("tensor {i}: malformed entry")));
                }
                let data = t
                    .re
                    .iter()
                    .zip(&t.im)
                    .map(|(&re, &im)| C::new(real(re), real(im)))
                    .collect();
                SiteTensor::new(t.shape[0], t.shape[2], data)
                    .map_err(|e| Error::Shape(format!("tensor {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mps = Self::new(tensors)?;
        if mps.num_sites() != export.n || mps.bond_dims() != export.bond_dims {
            return Err(Error::Shape(
                "declared n or bond_dims disagree with the tensors".into(),
            ));
        }
        Ok(mps)
    }
}

/// Result of [`MpsState::truncate`]: `eps` is the largest discarded singular
/// value over all bonds; `err1 = 2 sqrt(1 - F)` is the trace-norm distance and
/// `err2 = 1 - F` the infidelity between the original and truncated states.
#[derive(Debug, Clone)]
pub struct Truncation<R: Real = f64> {
    pub mps: MpsState<R>,
    pub eps: R,
    pub err1: R,
    pub err2: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorExport {
    pub shape: [usize; 3],
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsExport {
    pub n: usize,
    pub bond_dims: Vec<usize>,
    pub tensors: Vec<TensorExport>,
}

/// Sorted (descending) SVD of a dense matrix: `(u, sigma, v_t)` with columns
/// of `u` and rows of `v_t` permuted to match.
fn sorted_svd<R: Real>(m: DMatrix<C<R>>) -> (DMatrix<C<R>>, Vec<R>, DMatrix<C<R>>) {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma = order.iter().map(|&j| svd.singular_values[j]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |i, j| v_t[(order[i], j)]);
    (u, sigma, v_t)
}

/// Left-to-right SVD sweep. Keeps singular values above `tol`, at most
/// `max_rank` per bond and always at least one. With `renormalize`, the
/// remainder is rescaled to unit norm after every truncation and the
/// returned value is the largest discarded singular value relative to the
/// norm before truncation.
fn sweep_decompose<R: Real>(
    amps: &[C<R>],
    n: usize,
    tol: R,
    max_rank: usize,
    renormalize: bool,
) -> (MpsState<R>, R) {
    let mut rem: Vec<C<R>> = amps.to_vec();
    let mut bond = 1usize;
    let mut eps = R::zero();
    let mut tensors = Vec::with_capacity(n);
    for site in 0..n - 1 {
        let cols = 1usize << (n - site - 1);
        let rows = bond * 2;
        let m = DMatrix::from_fn(rows, cols, |i, j| rem[i * cols + j]);
        let (u, sigma, v_t) = sorted_svd(m);
        let total = sigma.iter().fold(R::zero(), |a, &s| a + s * s).sqrt();
        let keep = sigma
            .iter()
            .take_while(|&&s| s > tol)
            .count()
            .clamp(1, max_rank.max(1));
        if let Some(&largest_dropped) = sigma.get(keep) {
            let rel = if renormalize && total > R::zero() {
                largest_dropped / total
            } else {
                largest_dropped
            };
            eps = eps.max(rel);
        }
        let data = (0..rows)
            .flat_map(|i| (0..keep).map(move |b| (i, b)))
            .map(|(i, b)| u[(i, b)])
            .collect();
        tensors.push(SiteTensor {
            left: bond,
            right: keep,
            data,
        });
        let kept_norm = sigma[..keep].iter().fold(R::zero(), |a, &s| a + s * s).sqrt();
        let scale = if renormalize && kept_norm > R::zero() {
            R::one() / kept_norm
        } else {
            R::one()
        };
        rem = (0..keep)
            .flat_map(|b| (0..cols).map(move |c| (b, c)))
            .map(|(b, c)| v_t[(b, c)].scale(sigma[b] * scale))
            .collect();
        bond = keep;
    }
    tensors.push(SiteTensor {
        left: bond,
        right: 1,
        data: rem,
    });
    (MpsState { tensors }, eps)
}

/// Schmidt coefficients across the cut `[0, cut) | [cut, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtData<R: Real = f64> {
    pub cut: usize,
    /// Non-increasing.
    pub singular_values: Vec<R>,
    /// Number of singular values above the tolerance.
    pub rank: usize,
}

impl<R: Real> SchmidtData<R> {
    /// Von Neumann entropy in bits, `-sum sigma^2 log2 sigma^2`.
    pub fn entropy_ebits(&self) -> R {
        let two = real::<R>(2.0);
        self.singular_values.iter().fold(R::zero(), |acc, &s| {
            let p = s * s;
            if p > R::zero() {
                acc - p * p.log(two)
            } else {
                acc
            }
        })
    }
}

pub fn schmidt_spectrum<R: Real>(state: &Statevector<R>, cut: usize, tol: R) -> Result<SchmidtData<R>> {
    let n = state.num_qubits();
    if cut == 0 || cut >= n {
        return Err(Error::Range(format!("cut {cut} on {n} qubits (valid 1..={})", n.saturating_sub(1))));
    }
    let cols = 1usize << (n - cut);
    let amps = state.amplitudes();
    let m = DMatrix::from_fn(1 << cut, cols, |i, j| amps[i * cols + j]);
    let mut singular_values: Vec<R> = m.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let rank = singular_values.iter().filter(|&&s| s > tol).count();
    Ok(SchmidtData {
        cut,
        singular_values,
        rank,
    })
}

/// Spectra at every cut `1..n`.
pub fn all_spectra<R: Real>(state: &Statevector<R>, tol: R) -> Vec<SchmidtData<R>> {
    (1..state.num_qubits())
        .map(|c| schmidt_spectrum(state, c, tol).expect("cut in range"))
        .collect()
}

/// Maximum Schmidt rank over the `n - 1` contiguous cuts (1 for one qubit).
pub fn rank<R: Real>(state: &Statevector<R>, tol: R) -> usize {
    all_spectra(state, tol)
        .iter()
        .map(|s| s.rank)
        .max()
        .unwrap_or(1)
}

pub fn entanglement_ebits<R: Real>(state: &Statevector<R>, cut: usize) -> Result<R> {
    Ok(schmidt_spectrum(state, cut, R::svd_cutoff())?.entropy_ebits())
}
