//! Finite-dimensional states and channels.
//!
//! Subsystems follow the row-major tensor convention: the leftmost factor
//! of `dims` is the slowest-varying index of the matrix.

mod channel;
pub mod io;
pub mod linalg;

pub use channel::{covariance_residual as channel_covariance_residual, heisenberg_weyl, pauli_group, CovariantChannelSpec, QuantumChannel};
pub use linalg::{CMat, CVec};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::config::TOL;
use crate::{Error, Result};
use linalg::*;

/// Normalization class of a [`DensityOperator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceClass {
    /// Trace one.
    Normalized,
    /// Trace at most one.
    Subnormalized,
    /// Any PSD operator, e.g. `I_A ⊗ rho_B`.
    Positive,
}

/// Hermitian positive semidefinite matrix with a subsystem layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
    dims: Vec<usize>,
    class: TraceClass,
}

impl DensityOperator {
    /// Validated unit-trace state.
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        Self::with_class(matrix, dims, TraceClass::Normalized)
    }

    pub fn subnormalized(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        Self::with_class(matrix, dims, TraceClass::Subnormalized)
    }

    pub fn positive(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        Self::with_class(matrix, dims, TraceClass::Positive)
    }

    pub fn with_class(matrix: CMat, dims: Vec<usize>, class: TraceClass) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid dims {dims:?}")));
        }
        let d: usize = dims.iter().product();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but dims {dims:?} need {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let herm = hermitian_deviation(&matrix);
        if herm > TOL.hermitian {
            return Err(Error::NotHermitian(herm));
        }
        let matrix = hermitian_part(&matrix);
        let min = eigvalsh(&matrix)[0];
        if min < TOL.min_eigenvalue {
            return Err(Error::NotPositive(min));
        }
        let tr = matrix.trace().re;
        let ok = match class {
            TraceClass::Normalized => (tr - 1.0).abs() <= TOL.trace,
            TraceClass::Subnormalized => tr <= 1.0 + TOL.trace,
            TraceClass::Positive => true,
        };
        if !ok {
            return Err(Error::BadTrace(tr));
        }
        Ok(Self { matrix, dims, class })
    }

    /// Pure state `|psi><psi|`; the vector is normalized first.
    pub fn from_pure(psi: &CVec, dims: Vec<usize>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        Self::new(outer(&(psi / c(n, 0.0))), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        Self::new(identity(d) / c(d as f64, 0.0), dims)
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(real_diag(p), vec![p.len()])
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn class(&self) -> TraceClass {
        self.class
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }

    /// Tensor product; the result is normalized only if both factors are.
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let class = match (self.class, other.class) {
            (TraceClass::Normalized, TraceClass::Normalized) => TraceClass::Normalized,
            (TraceClass::Positive, _) | (_, TraceClass::Positive) => TraceClass::Positive,
            _ => TraceClass::Subnormalized,
        };
        DensityOperator {
            matrix: kron(&self.matrix, &other.matrix),
            dims,
            class,
        }
    }

    /// Same matrix with a different subsystem grouping.
    pub fn regroup(&self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.dim() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} incompatible with size {}",
                self.dim()
            )));
        }
        Ok(Self {
            matrix: self.matrix.clone(),
            dims,
            class: self.class,
        })
    }

    /// Reorder subsystems: new subsystem `k` is old subsystem `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let matrix = permute_mat(&self.matrix, &self.dims, perm)?;
        Ok(Self {
            matrix,
            dims: perm.iter().map(|&k| self.dims[k]).collect(),
            class: self.class,
        })
    }

    /// Partial transpose on one subsystem (not a state in general).
    pub fn partial_transpose(&self, sys: usize) -> Result<CMat> {
        partial_transpose_mat(&self.matrix, &self.dims, sys)
    }

    /// Smallest eigenvalue of the partial transpose on `sys`.
    pub fn min_pt_eigenvalue(&self, sys: usize) -> Result<f64> {
        Ok(eigvalsh(&self.partial_transpose(sys)?)[0])
    }

    pub fn is_ppt(&self, sys: usize) -> Result<bool> {
        Ok(self.min_pt_eigenvalue(sys)? >= TOL.min_eigenvalue)
    }

    /// Scale by a positive factor; the result is tagged as a PSD operator.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("scale {s} must be >= 0")));
        }
        Ok(Self {
            matrix: &self.matrix * c(s, 0.0),
            dims: self.dims.clone(),
            class: TraceClass::Positive,
        })
    }

    pub(crate) fn from_parts_unchecked(matrix: CMat, dims: Vec<usize>, class: TraceClass) -> Self {
        Self { matrix: hermitian_part(&matrix), dims, class }
    }
}

/// Reduced operator on `keep` (kept dims in original order).
pub fn partial_trace(state: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let m = partial_trace_mat(&state.matrix, &state.dims, keep)?;
    let mut k = keep.to_vec();
    k.sort_unstable();
    let dims = if k.is_empty() {
        vec![1]
    } else {
        k.iter().map(|&i| state.dims[i]).collect()
    };
    Ok(DensityOperator::from_parts_unchecked(m, dims, state.class))
}

fn check_same_dim(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operators of size {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Root fidelity `||sqrt(P) sqrt(Q)||_1` for PSD operators.
///
/// Singular values of `sqrt(P) sqrt(Q)` are used directly; going through the
/// eigenvalues of `sqrt(P) Q sqrt(P)` would amplify rounding near zero by a square root.
pub fn root_fidelity_mat(p: &CMat, q: &CMat) -> f64 {
    let x = sqrt_psd(p) * sqrt_psd(q);
    x.singular_values().iter().sum()
}

/// Fidelity `F(P,Q) = ||sqrt(P) sqrt(Q)||_1^2`.
pub fn fidelity(p: &DensityOperator, q: &DensityOperator) -> Result<f64> {
    check_same_dim(p, q)?;
    let f = root_fidelity_mat(&p.matrix, &q.matrix).powi(2);
    Ok(f.clamp(0.0, p.trace() * q.trace()))
}

/// Purified (sine) distance of subnormalized states.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    for s in [rho, sigma] {
        if s.trace() > 1.0 + TOL.trace {
            return Err(Error::BadTrace(s.trace()));
        }
    }
    let extra = ((1.0 - rho.trace()).max(0.0) * (1.0 - sigma.trace()).max(0.0)).sqrt();
    let f = (root_fidelity_mat(&rho.matrix, &sigma.matrix) + extra).powi(2);
    Ok((1.0 - f.min(1.0)).sqrt())
}

pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(linalg::trace_distance(&a.matrix, &b.matrix))
}

/// Apply a channel to subsystem `on`.
pub fn apply_channel(ch: &QuantumChannel, state: &DensityOperator, on: usize) -> Result<DensityOperator> {
    check_subsystems(&state.dims, &[on])?;
    if state.dims[on] != ch.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel input dim {} but subsystem {on} has dim {}",
            ch.in_dim(),
            state.dims[on]
        )));
    }
    let mut dims = state.dims.clone();
    dims[on] = ch.out_dim();
    let d: usize = dims.iter().product();
    let mut out = CMat::zeros(d, d);
    for k in ch.kraus() {
        let full = embed(k, &state.dims, on);
        out += &full * &state.matrix * full.adjoint();
    }
    Ok(DensityOperator::from_parts_unchecked(out, dims, state.class))
}

/// `|Phi><Phi|` with `|Phi> = d^{-1/2} sum_i |i>|i>`.
pub fn maximally_entangled(d: usize) -> Result<DensityOperator> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    Ok(DensityOperator::from_parts_unchecked(outer(&v), vec![d, d], TraceClass::Normalized))
}

/// Maximally classically correlated state `(1/K) sum_k |kk><kk|`.
pub fn classically_correlated(k: usize) -> Result<DensityOperator> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    let mut m = CMat::zeros(k * k, k * k);
    for i in 0..k {
        m[(i * k + i, i * k + i)] = c(1.0 / k as f64, 0.0);
    }
    DensityOperator::new(m, vec![k, k])
}

/// Seeded mixture of `terms` Haar-random pure product states on `dA ⊗ dB`.
pub fn sample_separable(d_a: usize, d_b: usize, terms: usize, seed: u64) -> Result<DensityOperator> {
    if d_a == 0 || d_b == 0 || terms == 0 {
        return Err(Error::InvalidArgument(format!(
            "sample_separable needs positive dims and terms, got ({d_a}, {d_b}, {terms})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..terms).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = weights.iter().sum();
    let d = d_a * d_b;
    let mut m = CMat::zeros(d, d);
    for w in weights {
        let a = random_pure_vec(d_a, &mut rng);
        let b = random_pure_vec(d_b, &mut rng);
        m += outer(&a.kronecker(&b)) * Complex64::new(w / total, 0.0);
    }
    Ok(DensityOperator::from_parts_unchecked(m, vec![d_a, d_b], TraceClass::Normalized))
}

/// Seeded random full-rank state.
pub fn random_state(dims: Vec<usize>, seed: u64) -> Result<DensityOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dims.iter().product();
    DensityOperator::new(random_density_mat(d, &mut rng), dims)
}
