//! Entropic quantities between operators. Reported values are in bits;
//! internal arithmetic uses natural logarithms.

mod classical;
mod maxent;

pub use classical::hypothesis_test_divergence_classical_iid;
pub use maxent::{conditional_max_entropy, conditional_max_entropy_detailed};

use std::f64::consts::LN_2;

use crate::config::TOL;
use crate::qcore::linalg::*;
use crate::qcore::{partial_trace, DensityOperator};
use crate::{Error, Result};

/// Value of a divergence together with solver output.
#[derive(Debug, Clone)]
pub struct DivergenceResult {
    /// Bits; `f64::INFINITY` marks an unbounded divergence.
    pub value: f64,
    /// Optimal operator where one exists (test `Lambda`, optimal `sigma_B`).
    pub optimizer: Option<CMat>,
    pub iterations: usize,
    pub residual: f64,
}

impl DivergenceResult {
    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// Direction of the coherent information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `I(A>B) = -H(A|B)`.
    Coherent,
    /// `I(B>A) = -H(B|A)`, the reverse coherent information.
    Reverse,
}

fn same_dim(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operators of size {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `Tr[P_ker(sigma) rho]`.
pub fn weight_outside_support(rho: &CMat, sigma: &CMat) -> f64 {
    (kernel_projector(sigma) * rho).trace().re.max(0.0)
}

fn rel_entropy_nats(rho: &CMat, sigma: &CMat) -> f64 {
    if weight_outside_support(rho, sigma) > TOL.support_weight {
        return f64::INFINITY;
    }
    let (rv, _) = eigh(rho);
    let rcut = support_cutoff(&rv);
    let neg_ent: f64 = rv.iter().filter(|&&x| x > rcut).map(|&x| x * x.ln()).sum();
    let (sv, svec) = eigh(sigma);
    let scut = support_cutoff(&sv);
    let mut cross = 0.0;
    for (k, &s) in sv.iter().enumerate() {
        if s > scut {
            let v = svec.column(k);
            let w = (v.adjoint() * rho * v)[(0, 0)].re;
            cross += w * s.ln();
        }
    }
    neg_ent - cross
}

/// Umegaki relative entropy `D(rho||sigma)` in bits.
pub fn rel_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(rel_entropy_nats(rho.matrix(), sigma.matrix()) / LN_2)
}

/// Relative entropy variance `Tr rho (log rho - log sigma - D)^2` in bits².
pub fn rel_entropy_variance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho, sigma)?;
    let (r, s) = (rho.matrix(), sigma.matrix());
    if weight_outside_support(r, s) > TOL.support_weight {
        return Err(Error::Support("variance needs supp(rho) ⊆ supp(sigma)".into()));
    }
    let d = rel_entropy_nats(r, s);
    let mut l = ln_on_support(r) - ln_on_support(s);
    for i in 0..l.nrows() {
        l[(i, i)] -= c(d, 0.0);
    }
    let v = (r * &l * &l).trace().re;
    Ok(v.max(0.0) / (LN_2 * LN_2))
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0,1) ∪ (1,∞), got {alpha} (use rel_entropy at alpha = 1)"
        )));
    }
    Ok(())
}

/// Sandwiched Rényi relative entropy in bits.
pub fn sandwiched_renyi(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    same_dim(rho, sigma)?;
    let (r, s) = (rho.matrix(), sigma.matrix());
    if alpha > 1.0 && weight_outside_support(r, s) > TOL.support_weight {
        return Ok(f64::INFINITY);
    }
    let sp = pow_on_support(s, (1.0 - alpha) / (2.0 * alpha));
    let m = &sp * r * &sp;
    let (mv, _) = eigh(&m);
    let cut = support_cutoff(&mv);
    let q: f64 = mv.iter().filter(|&&x| x > cut).map(|&x| x.powf(alpha)).sum();
    if q <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(q.ln() / (alpha - 1.0) / LN_2)
}

/// Max-relative entropy `log λmax(sigma^{-1/2} rho sigma^{-1/2})` in bits.
pub fn max_divergence(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho, sigma)?;
    let (r, s) = (rho.matrix(), sigma.matrix());
    if weight_outside_support(r, s) > TOL.support_weight {
        return Ok(f64::INFINITY);
    }
    let sp = pow_on_support(s, -0.5);
    Ok(lambda_max(&(&sp * r * &sp)).ln() / LN_2)
}

/// Neyman–Pearson test at threshold `t`: spectral split of `rho - t sigma`.
struct NpSplit {
    pos: CMat,
    zero: CMat,
    m_pos: f64,
    m_zero: f64,
}

fn np_split(rho: &CMat, sigma: &CMat, t: f64, scale: (f64, f64)) -> NpSplit {
    let (vals, vecs) = eigh(&(rho - sigma * c(t, 0.0)));
    let delta = 1e-11 * (scale.0 + t * scale.1);
    let pos = from_spectrum(&vals, &vecs, |x| if x > delta { 1.0 } else { 0.0 });
    let zero = from_spectrum(&vals, &vecs, |x| if x.abs() <= delta { 1.0 } else { 0.0 });
    let m_pos = (&pos * rho).trace().re;
    let m_zero = (&zero * rho).trace().re;
    NpSplit { pos, zero, m_pos, m_zero }
}

/// Hypothesis-testing relative entropy
/// `-log inf { Tr Λσ : 0 ≤ Λ ≤ I, Tr Λρ ≥ 1-ε }` in bits, with the optimal test.
pub fn hypothesis_test_divergence(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<DivergenceResult> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0,1), got {eps}")));
    }
    same_dim(rho, sigma)?;
    let (r, s) = (rho.matrix(), sigma.matrix());
    let target = 1.0 - eps;
    let tr_rho = rho.trace();
    if tr_rho < target - 1e-13 {
        return Err(Error::InvalidArgument(format!(
            "Tr rho = {tr_rho} cannot reach 1 - eps = {target}"
        )));
    }

    let ker = kernel_projector(s);
    let w = (&ker * r).trace().re;
    if w >= target - 1e-13 {
        let lam = ker * c((target / w).min(1.0), 0.0);
        return Ok(DivergenceResult { value: f64::INFINITY, optimizer: Some(lam), iterations: 0, residual: 0.0 });
    }

    let (rv, _) = eigh(r);
    let (sv, _) = eigh(s);
    let rmax = rv.last().copied().unwrap_or(0.0).max(0.0);
    let smax = sv.last().copied().unwrap_or(0.0);
    let scut = support_cutoff(&sv);
    let smin = sv.iter().copied().filter(|&x| x > scut).fold(f64::INFINITY, f64::min);
    if !smin.is_finite() {
        return Err(Error::InvalidArgument("sigma is the zero operator".into()));
    }
    let scale = (rmax, smax);
    let feasible = |t: f64| np_split(r, s, t, scale).m_pos <= target + 1e-13;

    let mut lo = 0.0;
    let mut hi = (rmax / smin).max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    while !feasible(hi) {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations > 200 {
            return Err(Error::NotConverged { what: "Neyman-Pearson threshold bracket", iterations, residual: hi });
        }
    }
    if feasible(lo) {
        hi = lo;
    } else {
        for _ in 0..200 {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    let at_hi = np_split(r, s, hi, scale);
    let lam = if at_hi.m_pos + at_hi.m_zero >= target - 1e-13 && at_hi.m_zero > 0.0 {
        let f = ((target - at_hi.m_pos) / at_hi.m_zero).clamp(0.0, 1.0);
        &at_hi.pos + &at_hi.zero * c(f, 0.0)
    } else if at_hi.m_pos >= target - 1e-13 {
        at_hi.pos.clone()
    } else {
        // The jump sits between lo and hi: mix the two neighbouring tests.
        let at_lo = np_split(r, s, lo, scale);
        let full_hi = &at_hi.pos + &at_hi.zero;
        let a = at_hi.m_pos + at_hi.m_zero;
        let b = at_lo.m_pos;
        let wgt = ((target - a) / (b - a)).clamp(0.0, 1.0);
        full_hi * c(1.0 - wgt, 0.0) + at_lo.pos * c(wgt, 0.0)
    };
    let beta = (&lam * s).trace().re;
    let residual = ((&lam * r).trace().re - target).abs();
    let value = if beta > 0.0 { -beta.ln() / LN_2 } else { f64::INFINITY };
    Ok(DivergenceResult { value, optimizer: Some(lam), iterations, residual })
}

/// `(I, V)` for `I(A>B) = D(rho_AB || I_A ⊗ rho_B)` and its variance,
/// or the reverse `I(B>A)` with roles swapped.
pub fn coherent_info_and_variance(rho_ab: &DensityOperator, direction: Direction) -> Result<(f64, f64)> {
    let dims = rho_ab.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidArgument(format!("expected a bipartite state, got dims {dims:?}")));
    }
    let (da, db) = (dims[0], dims[1]);
    let reference = match direction {
        Direction::Coherent => {
            let rb = partial_trace(rho_ab, &[1])?;
            kron(&identity(da), rb.matrix())
        }
        Direction::Reverse => {
            let ra = partial_trace(rho_ab, &[0])?;
            kron(ra.matrix(), &identity(db))
        }
    };
    let sigma = DensityOperator::positive(reference, dims.to_vec())?;
    Ok((rel_entropy(rho_ab, &sigma)?, rel_entropy_variance(rho_ab, &sigma)?))
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityOperator) -> f64 {
    let vals = rho.eigenvalues();
    let cut = support_cutoff(&vals);
    -vals.iter().filter(|&&x| x > cut).map(|&x| x * x.log2()).sum::<f64>()
}
