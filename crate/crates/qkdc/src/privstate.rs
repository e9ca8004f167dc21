//! Private states `γ = U(Φ_AB ⊗ θ_{A'B'})U†`, the privacy test, and
//! conversions between privacy criteria for classical-quantum key states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qcore::linalg::*;
use crate::qcore::{fidelity, maximally_entangled, DensityOperator, TraceClass};
use crate::{Error, Result};

/// Key dimension, twisting unitaries `U^{ij}` (index `i*K + j`) and shield `θ_{A'B'}`.
#[derive(Debug, Clone)]
pub struct PrivateState {
    key_dim: usize,
    twist: Vec<CMat>,
    shield: DensityOperator,
}

impl PrivateState {
    pub fn new(key_dim: usize, twist: Vec<CMat>, shield: DensityOperator) -> Result<Self> {
        if key_dim == 0 {
            return Err(Error::InvalidArgument("key dimension must be >= 1".into()));
        }
        if shield.dims().len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "shield must be bipartite A'B', got dims {:?}",
                shield.dims()
            )));
        }
        if shield.class() != TraceClass::Normalized {
            return Err(Error::BadTrace(shield.trace()));
        }
        if twist.len() != key_dim * key_dim {
            return Err(Error::InvalidArgument(format!(
                "need K^2 = {} twisting unitaries, got {}",
                key_dim * key_dim,
                twist.len()
            )));
        }
        for u in &twist {
            if u.nrows() != shield.dim() || u.ncols() != shield.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "twisting unitary is {}x{}, shield has dimension {}",
                    u.nrows(),
                    u.ncols(),
                    shield.dim()
                )));
            }
            check_unitary(u)?;
        }
        Ok(Self { key_dim, twist, shield })
    }

    /// All `U^{ij} = I`.
    pub fn untwisted(key_dim: usize, shield: DensityOperator) -> Result<Self> {
        let d = shield.dim();
        Self::new(key_dim, vec![identity(d); key_dim * key_dim], shield)
    }

    /// Haar-random `U^{ij}`.
    pub fn random_twist(key_dim: usize, shield: DensityOperator, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = shield.dim();
        let twist = (0..key_dim * key_dim).map(|_| random_unitary(d, &mut rng)).collect();
        Self::new(key_dim, twist, shield)
    }

    pub fn key_dim(&self) -> usize {
        self.key_dim
    }

    pub fn twist(&self) -> &[CMat] {
        &self.twist
    }

    pub fn shield(&self) -> &DensityOperator {
        &self.shield
    }

    /// `[K, K, dA', dB']`.
    pub fn dims(&self) -> Vec<usize> {
        let s = self.shield.dims();
        vec![self.key_dim, self.key_dim, s[0], s[1]]
    }

    /// `Σ_ij |i><i| ⊗ |j><j| ⊗ U^{ij}`.
    pub fn twisting_unitary(&self) -> CMat {
        let ds = self.shield.dim();
        let n = self.key_dim * self.key_dim * ds;
        let mut u = CMat::zeros(n, n);
        for (b, block) in self.twist.iter().enumerate() {
            u.view_mut((b * ds, b * ds), (ds, ds)).copy_from(block);
        }
        u
    }

    /// The private state `γ_{ABA'B'}`.
    pub fn state(&self) -> DensityOperator {
        let u = self.twisting_unitary();
        let phi = maximally_entangled(self.key_dim).expect("K >= 1");
        let m = &u * kron(phi.matrix(), self.shield.matrix()) * u.adjoint();
        DensityOperator::new(m, self.dims()).expect("unitary conjugate of a state")
    }

    /// Privacy-test projector `Π = U(Φ_AB ⊗ I_{A'B'})U†`.
    pub fn privacy_projector(&self) -> CMat {
        let u = self.twisting_unitary();
        let phi = maximally_entangled(self.key_dim).expect("K >= 1");
        &u * kron(phi.matrix(), &identity(self.shield.dim())) * u.adjoint()
    }
}

/// `γ_{ABA'B'}` with dims `[K, K, dA', dB']`.
pub fn build_private_state(key_dim: usize, twist: Vec<CMat>, shield: DensityOperator) -> Result<DensityOperator> {
    Ok(PrivateState::new(key_dim, twist, shield)?.state())
}

fn check_test_dims(gamma: &PrivateState, rho: &DensityOperator) -> Result<()> {
    if rho.dims() != gamma.dims().as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "state dims {:?} do not match private state dims {:?}",
            rho.dims(),
            gamma.dims()
        )));
    }
    Ok(())
}

/// Probability `Tr{Π ρ}` that `ρ` passes the γ-privacy test.
pub fn privacy_test(gamma: &PrivateState, rho: &DensityOperator) -> Result<f64> {
    check_test_dims(gamma, rho)?;
    Ok(projector_overlap(&gamma.privacy_projector(), rho.matrix()))
}

/// `Tr{Π ρ}` for a precomputed projector; avoids rebuilding Π in sweeps.
pub fn projector_overlap(pi: &CMat, rho: &CMat) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..pi.nrows() {
        for j in 0..pi.ncols() {
            acc += pi[(i, j)] * rho[(j, i)];
        }
    }
    acc.re.clamp(0.0, 1.0)
}

/// `ρ = (1-λ)γ + λ·junk` with λ chosen by bisection so that `F(ρ, γ) = 1 - ε`.
/// Returns the state and λ.
pub fn approximate_private_state(gamma: &PrivateState, junk: &DensityOperator, eps: f64) -> Result<(DensityOperator, f64)> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0,1], got {eps}")));
    }
    check_test_dims(gamma, junk)?;
    let g = gamma.state();
    let target = 1.0 - eps;
    let mix = |lam: f64| {
        let m = g.matrix() * c(1.0 - lam, 0.0) + junk.matrix() * c(lam, 0.0);
        DensityOperator::new(m, gamma.dims()).expect("convex mixture of states")
    };
    let f_end = fidelity(&mix(1.0), &g)?;
    if f_end > target {
        return Err(Error::InvalidArgument(format!(
            "junk state already has fidelity {f_end} > 1 - eps with the private state"
        )));
    }
    // sqrt(γ) mix(λ) sqrt(γ) is affine in λ; compressed to the support of γ,
    // each step is one small eigenvalue solve.
    let (vals, vecs) = eigh(g.matrix());
    let cut = support_cutoff(&vals);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > cut).collect();
    let w = CMat::from_fn(vals.len(), keep.len(), |r, j| vecs[(r, keep[j])] * vals[keep[j]].sqrt());
    let a = w.adjoint() * g.matrix() * &w;
    let b = w.adjoint() * junk.matrix() * &w;
    let fid = |lam: f64| -> f64 {
        let m = hermitian_part(&(&a * c(1.0 - lam, 0.0) + &b * c(lam, 0.0)));
        eigvalsh(&m).iter().map(|x| x.max(0.0).sqrt()).sum::<f64>().powi(2)
    };
    // F(mix(λ), γ) is concave in λ with its maximum at λ = 0, hence non-increasing.
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if fid(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((mix(lo), lo))
}

/// Classical-quantum state `Σ_{kl} p(k,l) |k><k| ⊗ |l><l| ⊗ ρ_E^{kl}` on `[K, K, dE]`.
#[derive(Debug, Clone)]
pub struct CqKeyState {
    key_dim: usize,
    joint: DensityOperator,
}

impl CqKeyState {
    pub fn new(key_dim: usize, joint: DensityOperator) -> Result<Self> {
        let d = joint.dims();
        if d.len() != 3 || d[0] != key_dim || d[1] != key_dim {
            return Err(Error::DimensionMismatch(format!(
                "cq key state needs dims [K, K, dE] with K = {key_dim}, got {d:?}"
            )));
        }
        if joint.class() != TraceClass::Normalized {
            return Err(Error::BadTrace(joint.trace()));
        }
        let de = d[2];
        let m = joint.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i / de != j / de {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        if worst > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "key registers are not classical (off-diagonal block entry {worst:e})"
            )));
        }
        Ok(Self { key_dim, joint })
    }

    /// From joint probabilities `p[k][l]` and Eve's states `eve[k][l]`.
    pub fn from_components(p: &[Vec<f64>], eve: &[Vec<DensityOperator>]) -> Result<Self> {
        let k = p.len();
        if k == 0 || p.iter().any(|r| r.len() != k) || eve.len() != k || eve.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch("p and eve must be K x K".into()));
        }
        let de = eve[0][0].dim();
        let mut m = CMat::zeros(k * k * de, k * k * de);
        for a in 0..k {
            for b in 0..k {
                if eve[a][b].dim() != de {
                    return Err(Error::DimensionMismatch("Eve's states differ in dimension".into()));
                }
                if p[a][b] < 0.0 {
                    return Err(Error::InvalidArgument("negative probability".into()));
                }
                let off = (a * k + b) * de;
                m.view_mut((off, off), (de, de)).copy_from(&(eve[a][b].matrix() * c(p[a][b], 0.0)));
            }
        }
        Self::new(k, DensityOperator::new(m, vec![k, k, de])?)
    }

    /// Seeded random key state; `diag_weight` biases mass toward `k = l`.
    pub fn random(key_dim: usize, e_dim: usize, diag_weight: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p: Vec<Vec<f64>> = (0..key_dim)
            .map(|a| {
                (0..key_dim)
                    .map(|b| {
                        let x: f64 = rng.random();
                        if a == b { x + diag_weight } else { x }
                    })
                    .collect()
            })
            .collect();
        let total: f64 = p.iter().flatten().sum();
        p.iter_mut().flatten().for_each(|x| *x /= total);
        let eve = (0..key_dim)
            .map(|_| {
                (0..key_dim)
                    .map(|_| {
                        let r = rng.random_range(1..=e_dim);
                        DensityOperator::new(random_density_rank(e_dim, r, &mut rng), vec![e_dim]).expect("valid state")
                    })
                    .collect()
            })
            .collect::<Vec<_>>();
        Self::from_components(&p, &eve)
    }

    pub fn key_dim(&self) -> usize {
        self.key_dim
    }

    pub fn joint(&self) -> &DensityOperator {
        &self.joint
    }

    pub fn e_dim(&self) -> usize {
        self.joint.dims()[2]
    }

    /// Unnormalized block `p(k,l) ρ_E^{kl}`.
    pub fn block(&self, k: usize, l: usize) -> CMat {
        let de = self.e_dim();
        let off = (k * self.key_dim + l) * de;
        self.joint.matrix().view((off, off), (de, de)).into_owned()
    }
}

/// Quantities of the two privacy criteria and the slack of each conversion inequality.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConversionReport {
    /// `Pr{K ≠ L}`.
    pub err: f64,
    /// `½‖ρ_KE − π_K ⊗ ρ_E‖₁`.
    pub sec: f64,
    /// `1 − F(ρ_KLE, Φ̄_KL ⊗ ρ_E)`.
    pub eta: f64,
    /// `err + sec − (1 − √(1 − eta))`.
    pub slack_combined: f64,
    /// `√eta − err`.
    pub slack_err: f64,
    /// `√eta − sec`.
    pub slack_sec: f64,
}

impl ConversionReport {
    pub fn min_slack(&self) -> f64 {
        self.slack_combined.min(self.slack_err).min(self.slack_sec)
    }
}

pub fn definition_conversion_bounds(state: &CqKeyState) -> ConversionReport {
    let k = state.key_dim();
    let de = state.e_dim();
    let kc = c(1.0 / k as f64, 0.0);
    let mut rho_e = CMat::zeros(de, de);
    let mut rows = Vec::with_capacity(k);
    let mut correct = 0.0;
    for a in 0..k {
        let mut row = CMat::zeros(de, de);
        for b in 0..k {
            let blk = state.block(a, b);
            if a == b {
                correct += blk.trace().re;
            }
            row += blk;
        }
        rho_e += &row;
        rows.push(row);
    }
    let err = (1.0 - correct).clamp(0.0, 1.0);
    let ideal = &rho_e * kc;
    let sec = 0.5 * rows.iter().map(|r| trace_norm(&(r - &ideal))).sum::<f64>();
    let root_f: f64 = (0..k)
        .map(|a| crate::qcore::root_fidelity_mat(&state.block(a, a), &ideal))
        .sum();
    let eta = (1.0 - root_f * root_f).clamp(0.0, 1.0);
    let s = eta.sqrt();
    ConversionReport {
        err,
        sec,
        eta,
        slack_combined: err + sec - (1.0 - (1.0 - eta).sqrt()),
        slack_err: s - err,
        slack_sec: s - sec,
    }
}
