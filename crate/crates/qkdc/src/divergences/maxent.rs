//! Non-smooth conditional max-entropy
//! `H_max(A|B) = log max_σ F(ρ_AB, I_A ⊗ σ_B)`.

use std::f64::consts::LN_2;

use super::DivergenceResult;
use crate::qcore::linalg::*;
use crate::qcore::{partial_trace, DensityOperator};
use crate::{Error, Result};

const MAX_ITER: usize = 5_000;
const GAP_TOL: f64 = 1e-9;

struct Eval {
    f: f64,
    grad: CMat,
}

/// Root fidelity `f(σ) = ||√ρ (I⊗√σ)||₁` and its gradient in σ,
/// `Γ = ½ Tr_A[√ρ M^{-1/2} √ρ]` with `M = √ρ (I⊗σ) √ρ`.
fn evaluate(sqrt_rho: &CMat, da: usize, db: usize, sigma: &CMat) -> Eval {
    let x = sqrt_rho * kron(&identity(da), &sqrt_psd(sigma));
    let svd = x.svd(true, false);
    let sv = &svd.singular_values;
    let u = svd.u.as_ref().expect("left singular vectors");
    let f: f64 = sv.iter().sum();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cut = (1e-12 * smax).max(1e-300);
    let mut us = u.clone();
    for (k, &s) in sv.iter().enumerate() {
        let w = if s > cut { 1.0 / s } else { 0.0 };
        for r in 0..us.nrows() {
            us[(r, k)] *= w;
        }
    }
    let inv_sqrt = us * u.adjoint();
    let full = sqrt_rho * inv_sqrt * sqrt_rho * c(0.5, 0.0);
    let grad = partial_trace_mat(&full, &[da, db], &[1]).expect("bipartite");
    Eval { f, grad: hermitian_part(&grad) }
}

fn gap_of(e: &Eval) -> f64 {
    lambda_max(&e.grad) - 0.5 * e.f
}

fn normalize(m: CMat) -> CMat {
    let t = m.trace().re;
    hermitian_part(&(m / c(t, 0.0)))
}

/// Orthonormal basis of traceless Hermitian r×r matrices (generalized Gell-Mann).
fn traceless_basis(r: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    let h = 1.0 / 2f64.sqrt();
    for i in 0..r {
        for j in i + 1..r {
            let mut s = CMat::zeros(r, r);
            s[(i, j)] = c(h, 0.0);
            s[(j, i)] = c(h, 0.0);
            out.push(s);
            let mut a = CMat::zeros(r, r);
            a[(i, j)] = c(0.0, -h);
            a[(j, i)] = c(0.0, h);
            out.push(a);
        }
    }
    for k in 1..r {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut d = CMat::zeros(r, r);
        for i in 0..k {
            d[(i, i)] = c(norm, 0.0);
        }
        d[(k, k)] = c(-(k as f64) * norm, 0.0);
        out.push(d);
    }
    out
}

struct Problem<'a> {
    sqrt_rho: &'a CMat,
    da: usize,
    db: usize,
}

impl Problem<'_> {
    fn eval(&self, sigma: &CMat) -> Eval {
        evaluate(self.sqrt_rho, self.da, self.db, sigma)
    }

    /// Damped Newton step restricted to the support of σ, with a Hessian
    /// from central differences of the analytic gradient.
    fn newton_step(&self, sigma: &CMat, cur: &Eval) -> Option<(CMat, Eval)> {
        let (vals, vecs) = eigh(sigma);
        let lmax = vals.last().copied().unwrap_or(0.0);
        let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 1e-9 * lmax).collect();
        let r = keep.len();
        if r < 2 {
            return None;
        }
        let q = CMat::from_fn(self.db, r, |i, k| vecs[(i, keep[k])]);
        let lmin = keep.iter().map(|&k| vals[k]).fold(f64::INFINITY, f64::min);
        let dirs: Vec<CMat> = traceless_basis(r).iter().map(|g| &q * g * q.adjoint()).collect();
        let m = dirs.len();
        let grad_of = |e: &Eval| nalgebra::DVector::from_iterator(m, dirs.iter().map(|d| (&e.grad * d).trace().re));
        let g = grad_of(cur);
        let h = (1e-5 * lmin).min(1e-5);
        let mut hess = nalgebra::DMatrix::<f64>::zeros(m, m);
        for (k, d) in dirs.iter().enumerate() {
            let plus = grad_of(&self.eval(&(sigma + d * c(h, 0.0))));
            let minus = grad_of(&self.eval(&(sigma - d * c(h, 0.0))));
            hess.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let eig = hess.symmetric_eigen();
        let scale = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
        let mut step = nalgebra::DVector::<f64>::zeros(m);
        for k in 0..m {
            let lam = eig.eigenvalues[k].min(-1e-10 * scale).abs();
            let v = eig.eigenvectors.column(k);
            step += v * (v.dot(&g) / lam);
        }
        let delta = dirs.iter().zip(step.iter()).fold(CMat::zeros(self.db, self.db), |acc, (d, x)| acc + d * c(*x, 0.0));
        let mut s = 1.0;
        while s > 1e-6 {
            let cand = hermitian_part(&(sigma + &delta * c(s, 0.0)));
            if eigvalsh(&cand)[0] >= 0.0 {
                let ev = self.eval(&cand);
                // Near the optimum f is flat to machine precision; the gap decides.
                let flat = ev.f >= cur.f - 4.0 * f64::EPSILON * cur.f;
                if ev.f > cur.f || (flat && gap_of(&ev) < gap_of(cur)) {
                    return Some((normalize(cand), ev));
                }
            }
            s *= 0.5;
        }
        None
    }

    /// Multiplicative update `σ ← Γ σ Γ / Tr` with step halving.
    fn multiplicative_step(&self, sigma: &CMat, cur: &Eval) -> Option<(CMat, Eval)> {
        let target = normalize(&cur.grad * sigma * &cur.grad);
        let mut step = 1.0;
        while step > 1e-12 {
            let cand = normalize(sigma * c(1.0 - step, 0.0) + &target * c(step, 0.0));
            let ev = self.eval(&cand);
            if ev.f > cur.f {
                return Some((cand, ev));
            }
            step *= 0.5;
        }
        // Small step toward the top eigenvector of the gradient.
        let (vals, vecs) = eigh(&cur.grad);
        let dir = outer(&vecs.column(vals.len() - 1).into_owned());
        let mut s = 0.5;
        while s > 1e-14 {
            let cand = normalize(sigma * c(1.0 - s, 0.0) + &dir * c(s, 0.0));
            let ev = self.eval(&cand);
            if ev.f > cur.f {
                return Some((cand, ev));
            }
            s *= 0.5;
        }
        None
    }
}

/// `H_max(A|B)` in bits with the optimal `σ_B` and the duality-gap residual.
///
/// Ascent on the root fidelity `f(σ)`: multiplicative updates `σ ← Γ σ Γ / Tr`
/// (Γ the gradient) interleaved with damped Newton steps on the support of σ.
/// Concavity gives the certificate `max f − f(σ) ≤ λmax(Γ) − f(σ)/2`.
pub fn conditional_max_entropy_detailed(rho_ab: &DensityOperator) -> Result<DivergenceResult> {
    let dims = rho_ab.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidArgument(format!("expected a bipartite state, got dims {dims:?}")));
    }
    let (da, db) = (dims[0], dims[1]);
    let sqrt_rho = sqrt_psd(rho_ab.matrix());
    let prob = Problem { sqrt_rho: &sqrt_rho, da, db };
    let rb = partial_trace(rho_ab, &[1])?;
    let mut sigma = normalize(rb.matrix() + identity(db) * c(1.0 / db as f64, 0.0));
    let mut cur = prob.eval(&sigma);
    let mut gap = f64::INFINITY;
    for it in 0..MAX_ITER {
        gap = gap_of(&cur);
        if gap < GAP_TOL {
            let value = 2.0 * cur.f.ln() / LN_2;
            return Ok(DivergenceResult { value, optimizer: Some(sigma), iterations: it, residual: gap.max(0.0) });
        }
        let next = if it % 2 == 1 {
            prob.newton_step(&sigma, &cur).or_else(|| prob.multiplicative_step(&sigma, &cur))
        } else {
            prob.multiplicative_step(&sigma, &cur)
        };
        match next {
            Some((s, e)) => {
                sigma = s;
                cur = e;
            }
            None => return Err(Error::NotConverged { what: "conditional max-entropy", iterations: it, residual: gap }),
        }
    }
    Err(Error::NotConverged { what: "conditional max-entropy", iterations: MAX_ITER, residual: gap })
}

/// `H_max(A|B)` in bits.
pub fn conditional_max_entropy(rho_ab: &DensityOperator) -> Result<f64> {
    Ok(conditional_max_entropy_detailed(rho_ab)?.value)
}
