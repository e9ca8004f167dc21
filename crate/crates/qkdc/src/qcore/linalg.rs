//! Dense complex linear algebra helpers on `DMatrix<Complex64>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::TOL;
use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.trace()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Kronecker product, row-major (left factor is the slow index).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    ms.iter()
        .skip(1)
        .fold(ms[0].clone(), |acc, m| acc.kronecker(m))
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and
/// the matching orthonormal eigenvectors as columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), m.ncols(), |r, col| eig.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// Rebuild `V diag(f(lambda)) V^dagger`.
pub fn from_spectrum(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let d = vecs.nrows();
    let mut scaled = vecs.clone();
    for (k, &lam) in vals.iter().enumerate() {
        let w = f(lam);
        for r in 0..d {
            scaled[(r, k)] *= w;
        }
    }
    &scaled * vecs.adjoint()
}

pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    from_spectrum(&vals, &vecs, f)
}

/// Square root of a PSD matrix; eigenvalues below the clamp are set to zero.
pub fn sqrt_psd(m: &CMat) -> CMat {
    hermitian_fn(m, |x| if x > TOL.eig_clamp { x.sqrt() } else { 0.0 })
}

/// Power on the support of a PSD matrix (zero on the kernel).
pub fn pow_on_support(m: &CMat, p: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let cut = support_cutoff(&vals);
    from_spectrum(&vals, &vecs, |x| if x > cut { x.powf(p) } else { 0.0 })
}

/// Natural logarithm on the support of a PSD matrix (zero on the kernel).
pub fn ln_on_support(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    let cut = support_cutoff(&vals);
    from_spectrum(&vals, &vecs, |x| if x > cut { x.ln() } else { 0.0 })
}

/// Eigenvalues at or below this are treated as outside the support.
pub fn support_cutoff(vals: &[f64]) -> f64 {
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    (TOL.support_rel * lmax).max(f64::MIN_POSITIVE)
}

/// Projector onto the kernel of a PSD matrix.
pub fn kernel_projector(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    let cut = support_cutoff(&vals);
    from_spectrum(&vals, &vecs, |x| if x > cut { 0.0 } else { 1.0 })
}

/// Trace norm `||M||_1`.
pub fn trace_norm(m: &CMat) -> f64 {
    if hermitian_deviation(m) <= 1e-13 * (1.0 + max_abs(m)) {
        eigvalsh(m).iter().map(|x| x.abs()).sum()
    } else {
        m.clone().singular_values().iter().sum()
    }
}

pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(m: &CMat) -> f64 {
    *eigvalsh(m).last().unwrap_or(&0.0)
}

pub fn unitarity_deviation(u: &CMat) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.ncols())))
}

pub fn check_unitary(u: &CMat) -> Result<()> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "unitary must be square, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let dev = unitarity_deviation(u);
    if dev > TOL.completeness {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Full-space offsets of every multi-index over the listed subsystems.
fn offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &o in &out {
            for i in 0..dims[s] {
                next.push(o + i * st[s]);
            }
        }
        out = next;
    }
    out
}

pub fn check_subsystems(dims: &[usize], idx: &[usize]) -> Result<()> {
    for &i in idx {
        if i >= dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: i,
                count: dims.len(),
            });
        }
    }
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != idx.len() {
        return Err(Error::InvalidArgument(format!(
            "repeated subsystem index in {idx:?}"
        )));
    }
    Ok(())
}

/// Partial trace keeping `keep` (returned in ascending original order).
pub fn partial_trace_mat(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    check_subsystems(dims, keep)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let ko = offsets(dims, &keep);
    let to = offsets(dims, &traced);
    let mut out = CMat::zeros(ko.len(), ko.len());
    for (i, &oi) in ko.iter().enumerate() {
        for (j, &oj) in ko.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &to {
                acc += m[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Reorder subsystems: new subsystem `k` is old subsystem `perm[k]`.
pub fn permute_mat(m: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    if perm.len() != dims.len() {
        return Err(Error::InvalidArgument(format!(
            "permutation {perm:?} does not match {} subsystems",
            dims.len()
        )));
    }
    check_subsystems(dims, perm)?;
    let idx = offsets(dims, perm);
    Ok(CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(idx[i], idx[j])]))
}

/// Partial transpose on one subsystem.
pub fn partial_transpose_mat(m: &CMat, dims: &[usize], sys: usize) -> Result<CMat> {
    check_subsystems(dims, &[sys])?;
    let st = strides(dims);
    let (s, d) = (st[sys], dims[sys]);
    Ok(CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let (a, b) = ((i / s) % d, (j / s) % d);
        let i2 = i - a * s + b * s;
        let j2 = j - b * s + a * s;
        m[(i2, j2)]
    }))
}

/// `I ⊗ op ⊗ I` with `op` acting on subsystem `on`.
pub fn embed(op: &CMat, dims: &[usize], on: usize) -> CMat {
    let left: usize = dims[..on].iter().product();
    let right: usize = dims[on + 1..].iter().product();
    kron(&kron(&identity(left), op), &identity(right))
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn basis(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = ONE;
    v
}

/// Matrix unit `|i><j|`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn random_gaussian_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    CVec::from_fn(d, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-random unit vector.
pub fn random_pure_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = random_gaussian_vec(d, rng);
    let n = v.norm();
    v / c(n, 0.0)
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fixing.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rk = r[(k, k)];
        let ph = if rk.norm() > 0.0 { rk / rk.norm() } else { ONE };
        for row in 0..d {
            q[(row, k)] *= ph;
        }
    }
    q
}

/// Random full-rank density matrix `G G^dagger / Tr` (Hilbert-Schmidt measure).
pub fn random_density_mat<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let m = &g * g.adjoint();
    let t = m.trace().re;
    hermitian_part(&(m / c(t, 0.0)))
}

/// Random rank-`r` density matrix.
pub fn random_density_rank<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, r.max(1), |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let m = &g * g.adjoint();
    let t = m.trace().re;
    hermitian_part(&(m / c(t, 0.0)))
}

pub fn real_diag(v: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
}
