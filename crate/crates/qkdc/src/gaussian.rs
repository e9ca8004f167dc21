//! Two-mode Gaussian states and phase-insensitive bosonic channels.
//!
//! Conventions: quadratures ordered `(q1, q2, p1, p2)`, symplectic form
//! `Ω = [[0, I], [-I, 0]]`, vacuum variance `1/2`. A thermal state with mean
//! photon number `N` has covariance `(N + 1/2) I`. Channel noise is given by
//! the environment photon number `N_B`, with `ω = N_B + 1/2`.
//!
//! All states produced by this module are block diagonal in `q` and `p`.
//! For those, the determinants of the `q` and `p` blocks are propagated in
//! closed form rather than recomputed from the covariance entries, which
//! keeps the symplectic spectrum accurate at large squeezing (`μ ~ 10^6`).

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::bounds::{c_eps, eb_bound, Assistance, BoundKind, BoundReport, Terms};
use crate::config::TOL;
use crate::{Error, Result};

/// Symplectic form in `(q1..qm, p1..pm)` ordering.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        om[(k, modes + k)] = 1.0;
        om[(modes + k, k)] = -1.0;
    }
    om
}

/// Symplectic diagonalization `V = S diag(ν, ν) S^T`.
#[derive(Debug, Clone)]
pub struct Williamson {
    /// Ascending symplectic eigenvalues, one per mode.
    pub nu: Vec<f64>,
    pub s: DMatrix<f64>,
}

impl Williamson {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let m = self.nu.len();
        let d = DMatrix::from_fn(2 * m, 2 * m, |i, j| if i == j { self.nu[i % m] } else { 0.0 });
        &self.s * d * self.s.transpose()
    }
}

fn sym_sqrt(v: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(v.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Williamson decomposition of a positive definite covariance matrix.
pub fn williamson(v: &DMatrix<f64>) -> Result<Williamson> {
    let n = v.nrows();
    if n == 0 || n % 2 != 0 || v.ncols() != n {
        return Err(Error::DimensionMismatch(format!("covariance must be 2m x 2m, got {}x{}", n, v.ncols())));
    }
    let asym = (v - v.transpose()).amax();
    if asym > TOL.covariance * v.amax().max(1.0) {
        return Err(Error::CovarianceViolation(format!("covariance is not symmetric ({asym:e})")));
    }
    let v = (v + v.transpose()) * 0.5;
    if v.clone().cholesky().is_none() {
        return Err(Error::CovarianceViolation("covariance is not positive definite".into()));
    }
    let m = n / 2;
    let om = symplectic_form(m);
    let root = sym_sqrt(&v);
    let w = &root * &om * &root;
    let eig = SymmetricEigen::new(w.transpose() * &w);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    // Pair each new direction u with v = -W u / ν; the span of chosen pairs is W-invariant.
    let mut pairs: Vec<(f64, nalgebra::DVector<f64>, nalgebra::DVector<f64>)> = Vec::new();
    for &i in &order {
        if pairs.len() == m {
            break;
        }
        let mut u = eig.eigenvectors.column(i).into_owned();
        for (_, a, b) in &pairs {
            u -= a * a.dot(&u);
            u -= b * b.dot(&u);
        }
        let norm = u.norm();
        if norm < 0.5 {
            continue;
        }
        u /= norm;
        let wu = &w * &u;
        let nu = wu.norm();
        let vv = -wu / nu;
        pairs.push((nu, u, vv));
    }
    if pairs.len() != m {
        return Err(Error::NotConverged { what: "symplectic pairing", iterations: n, residual: pairs.len() as f64 });
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut o = DMatrix::zeros(n, n);
    let mut dinv = DMatrix::zeros(n, n);
    for (k, (nu, u, vv)) in pairs.iter().enumerate() {
        o.set_column(k, u);
        o.set_column(m + k, vv);
        dinv[(k, k)] = 1.0 / nu.sqrt();
        dinv[(m + k, m + k)] = 1.0 / nu.sqrt();
    }
    let s = root * o * dinv;
    Ok(Williamson { nu: pairs.iter().map(|p| p.0).collect(), s })
}

/// `g(N) = (N+1) log(N+1) - N log N` in bits, the entropy of a thermal state.
pub fn g_entropy(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    ((n + 1.0) * (n + 1.0).ln() - n * n.ln()) / LN_2
}

/// Standard form `V_q = [[a, c], [c, b]]`, `V_p = [[a, -c], [-c, b]]`, with the
/// block determinant `d = ab - c²` carried separately.
#[derive(Debug, Clone, Copy, PartialEq)]
struct StandardForm {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl StandardForm {
    /// `ν₁ + ν₂ = √((a+b)² - 4c²)`.
    fn nu_sum(&self) -> f64 {
        ((self.a - self.b).powi(2) + 4.0 * self.d).sqrt()
    }

    /// Symplectic eigenvalues per mode of the squeezing frame; `ν₁ - ν₂ = a - b`.
    fn mode_nus(&self) -> [f64; 2] {
        let s = self.nu_sum();
        let diff = self.a - self.b;
        let big = 0.5 * (s + diff.abs());
        let small = 2.0 * self.d / (s + diff.abs());
        if diff >= 0.0 { [big, small] } else { [small, big] }
    }

    /// `2r` of the two-mode squeezer `T(r)` with `V = T(r) diag(ν) T(r)^T`.
    fn two_r(&self) -> f64 {
        let s = self.nu_sum();
        let ab = self.a + self.b;
        if self.c >= 0.0 {
            ((ab + 2.0 * self.c) / s).ln()
        } else {
            -((ab - 2.0 * self.c) / s).ln()
        }
    }
}

/// Two-mode squeezer: q block `[[ch, sh], [sh, ch]]`, p block `[[ch, -sh], [-sh, ch]]`.
fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let (ch, sh) = (r.cosh(), r.sinh());
    Matrix4::new(
        ch, sh, 0.0, 0.0, //
        sh, ch, 0.0, 0.0, //
        0.0, 0.0, ch, -sh, //
        0.0, 0.0, -sh, ch,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    Standard(StandardForm),
    /// q/p block diagonal with block determinants.
    Block([f64; 2]),
    General,
}

/// Zero-mean two-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeGaussianState {
    cov: Matrix4<f64>,
    mean: Vector4<f64>,
    form: Form,
}

fn is_block_diagonal(cov: &Matrix4<f64>) -> bool {
    (0..2).all(|i| (2..4).all(|j| cov[(i, j)] == 0.0 && cov[(j, i)] == 0.0))
}

fn q_block(cov: &Matrix4<f64>) -> Matrix2<f64> {
    cov.fixed_view::<2, 2>(0, 0).into_owned()
}

fn p_block(cov: &Matrix4<f64>) -> Matrix2<f64> {
    cov.fixed_view::<2, 2>(2, 2).into_owned()
}

/// Symplectic eigenvalues `(ν₋², ν₊²)` of `V_q ⊕ V_p` from the block
/// entries and block determinants, arranged to avoid cancellation.
fn block_spectrum_sq(vq: &Matrix2<f64>, vp: &Matrix2<f64>, dq: f64, dp: f64) -> (f64, f64) {
    let (aq, bq, cq) = (vq[(0, 0)], vq[(1, 1)], vq[(0, 1)]);
    let (ap, bp, cp) = (vp[(0, 0)], vp[(1, 1)], vp[(0, 1)]);
    // tr(V_p V_q) = x + dq + dp, exactly.
    let x = (aq - bq) * (ap - bp) + (aq - ap) * (bp - bq) + (cq + cp).powi(2);
    let det = dq * dp;
    let (sq, sp) = (dq.max(0.0).sqrt(), dp.max(0.0).sqrt());
    let minus = x + (sq - sp).powi(2);
    let plus = x + (sq + sp).powi(2);
    let disc = (minus * plus).max(0.0);
    let big = 0.5 * (x + dq + dp + disc.sqrt());
    if big <= 0.0 {
        return (0.0, 0.0);
    }
    (det / big, big)
}

fn classify(cov: &Matrix4<f64>) -> Form {
    if !is_block_diagonal(cov) {
        return Form::General;
    }
    let (vq, vp) = (q_block(cov), p_block(cov));
    if vq[(0, 0)] == vp[(0, 0)] && vq[(1, 1)] == vp[(1, 1)] && vq[(0, 1)] == -vp[(0, 1)] {
        let (a, b, c) = (vq[(0, 0)], vq[(1, 1)], vq[(0, 1)]);
        Form::Standard(StandardForm { a, b, c, d: a * b - c * c })
    } else {
        Form::Block([vq.determinant(), vp.determinant()])
    }
}

impl TwoModeGaussianState {
    /// Validates symmetry and the uncertainty relation `V + iΩ/2 ⪰ 0`.
    pub fn new(cov: Matrix4<f64>) -> Result<Self> {
        let asym = (cov - cov.transpose()).amax();
        if asym > TOL.covariance * cov.amax().max(1.0) {
            return Err(Error::CovarianceViolation(format!("covariance is not symmetric ({asym:e})")));
        }
        let cov = (cov + cov.transpose()) * 0.5;
        let state = TwoModeGaussianState { cov, mean: Vector4::zeros(), form: classify(&cov) };
        state.validate()?;
        Ok(state)
    }

    fn standard(sf: StandardForm) -> Result<Self> {
        let StandardForm { a, b, c, .. } = sf;
        let cov = Matrix4::new(
            a, c, 0.0, 0.0, //
            c, b, 0.0, 0.0, //
            0.0, 0.0, a, -c, //
            0.0, 0.0, -c, b,
        );
        let state = TwoModeGaussianState { cov, mean: Vector4::zeros(), form: Form::Standard(sf) };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<()> {
        if self.cov.iter().any(|x| !x.is_finite()) {
            return Err(Error::CovarianceViolation("non-finite covariance entry".into()));
        }
        if self.cov.cholesky().is_none() {
            return Err(Error::CovarianceViolation("covariance is not positive definite".into()));
        }
        let nu = self.symplectic_eigenvalues()?;
        if nu[0] < 0.5 - TOL.symplectic {
            return Err(Error::CovarianceViolation(format!("symplectic eigenvalue {} < 1/2", nu[0])));
        }
        Ok(())
    }

    pub fn cov(&self) -> &Matrix4<f64> {
        &self.cov
    }

    pub fn mean(&self) -> &Vector4<f64> {
        &self.mean
    }

    pub fn is_block_diagonal(&self) -> bool {
        !matches!(self.form, Form::General)
    }

    /// True for the phase-insensitive standard form `c_p = -c_q`.
    pub fn is_standard_form(&self) -> bool {
        matches!(self.form, Form::Standard(_))
    }

    /// Ascending symplectic eigenvalues.
    pub fn symplectic_eigenvalues(&self) -> Result<[f64; 2]> {
        match self.form {
            Form::Standard(sf) => {
                let [x, y] = sf.mode_nus();
                Ok([x.min(y), x.max(y)])
            }
            Form::Block([dq, dp]) => {
                let (lo, hi) = block_spectrum_sq(&q_block(&self.cov), &p_block(&self.cov), dq, dp);
                Ok([lo.sqrt(), hi.sqrt()])
            }
            Form::General => {
                let w = self.williamson()?;
                Ok([w.nu[0], w.nu[1]])
            }
        }
    }

    pub fn williamson(&self) -> Result<Williamson> {
        williamson(&DMatrix::from_column_slice(4, 4, self.cov.as_slice()))
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<f64> {
        Ok(self.symplectic_eigenvalues()?.iter().map(|&nu| g_entropy(nu - 0.5)).sum())
    }

    /// Covariance after transposing mode `mode` (`p → -p`).
    pub fn partial_transpose(&self, mode: usize) -> Result<Self> {
        if mode > 1 {
            return Err(Error::SubsystemOutOfRange { index: mode, count: 2 });
        }
        let mut flip = Matrix4::identity();
        flip[(2 + mode, 2 + mode)] = -1.0;
        let cov = flip * self.cov * flip;
        // Block determinants are unchanged by the sign flip.
        let form = match self.form {
            Form::Standard(sf) => Form::Block([sf.d, sf.d]),
            Form::Block(d) => Form::Block(d),
            Form::General => Form::General,
        };
        Ok(TwoModeGaussianState { cov, mean: self.mean, form })
    }

    /// Smallest symplectic eigenvalue of the partial transpose.
    pub fn min_pt_symplectic_eigenvalue(&self) -> Result<f64> {
        Ok(self.partial_transpose(1)?.symplectic_eigenvalues()?[0])
    }

    /// Two-mode Gaussian states are separable iff PPT.
    pub fn is_separable(&self) -> Result<bool> {
        Ok(self.min_pt_symplectic_eigenvalue()? >= 0.5 - TOL.symplectic)
    }

    /// Williamson frame `(ν per mode, S)` with `V = S diag(ν, ν) S^T`.
    fn frame(&self) -> Result<([f64; 2], Matrix4<f64>)> {
        match self.form {
            Form::Standard(sf) => Ok((sf.mode_nus(), two_mode_squeezer(0.5 * sf.two_r()))),
            _ => {
                let w = self.williamson()?;
                Ok(([w.nu[0], w.nu[1]], Matrix4::from_column_slice(w.s.as_slice())))
            }
        }
    }
}

/// Phase-insensitive single-mode Gaussian channel.
/// JSON form: `{"kind":"thermal","eta":0.6,"nb":0.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BosonicChannelParams {
    /// Beam splitter of transmissivity `η` mixing in a thermal environment.
    Thermal {
        eta: f64,
        #[serde(default)]
        nb: f64,
    },
    /// Phase-insensitive amplifier of gain `G`.
    Amplifier {
        #[serde(alias = "G")]
        gain: f64,
        #[serde(default)]
        nb: f64,
    },
    /// Classical additive noise of variance `ξ`.
    Additive { xi: f64 },
}

impl BosonicChannelParams {
    pub fn pure_loss(eta: f64) -> Self {
        BosonicChannelParams::Thermal { eta, nb: 0.0 }
    }

    pub fn quantum_limited_amplifier(gain: f64) -> Self {
        BosonicChannelParams::Amplifier { gain, nb: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match *self {
            BosonicChannelParams::Thermal { eta, nb } => {
                if !(0.0..=1.0).contains(&eta) {
                    return bad(format!("eta must lie in [0,1], got {eta}"));
                }
                if !(nb >= 0.0 && nb.is_finite()) {
                    return bad(format!("nb must be a finite number >= 0, got {nb}"));
                }
            }
            BosonicChannelParams::Amplifier { gain, nb } => {
                if !(gain >= 1.0 && gain.is_finite()) {
                    return bad(format!("gain must be a finite number >= 1, got {gain}"));
                }
                if !(nb >= 0.0 && nb.is_finite()) {
                    return bad(format!("nb must be a finite number >= 0, got {nb}"));
                }
            }
            BosonicChannelParams::Additive { xi } => {
                if !(xi >= 0.0 && xi.is_finite()) {
                    return bad(format!("xi must be a finite number >= 0, got {xi}"));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            BosonicChannelParams::Thermal { .. } => "thermal",
            BosonicChannelParams::Amplifier { .. } => "amplifier",
            BosonicChannelParams::Additive { .. } => "additive",
        }
    }

    pub fn param_list(&self) -> Vec<(&'static str, f64)> {
        match *self {
            BosonicChannelParams::Thermal { eta, nb } => vec![("eta", eta), ("nb", nb)],
            BosonicChannelParams::Amplifier { gain, nb } => vec![("gain", gain), ("nb", nb)],
            BosonicChannelParams::Additive { xi } => vec![("xi", xi)],
        }
    }

    /// Environment photon number, zero for additive noise.
    pub fn nb(&self) -> f64 {
        match *self {
            BosonicChannelParams::Thermal { nb, .. } | BosonicChannelParams::Amplifier { nb, .. } => nb,
            BosonicChannelParams::Additive { .. } => 0.0,
        }
    }

    /// Same channel with environment photon number replaced.
    pub fn with_nb(&self, nb: f64) -> Self {
        match *self {
            BosonicChannelParams::Thermal { eta, .. } => BosonicChannelParams::Thermal { eta, nb },
            BosonicChannelParams::Amplifier { gain, .. } => BosonicChannelParams::Amplifier { gain, nb },
            other => other,
        }
    }

    /// `(x, y)` with the channel acting on a mode covariance as `V ↦ x² V + y I`.
    pub fn scale_and_noise(&self) -> (f64, f64) {
        match *self {
            BosonicChannelParams::Thermal { eta, nb } => (eta.sqrt(), (1.0 - eta) * (nb + 0.5)),
            BosonicChannelParams::Amplifier { gain, nb } => (gain.sqrt(), (gain - 1.0) * (nb + 0.5)),
            BosonicChannelParams::Additive { xi } => (1.0, xi),
        }
    }

    pub fn is_entanglement_breaking(&self) -> bool {
        match *self {
            BosonicChannelParams::Thermal { eta, nb } => (1.0 - eta) * nb >= eta,
            BosonicChannelParams::Amplifier { gain, nb } => (gain - 1.0) * nb >= 1.0,
            BosonicChannelParams::Additive { xi } => xi >= 1.0,
        }
    }
}

/// Two-mode squeezed vacuum with single-mode variance `μ`.
pub fn tmsv_covariance(mu: f64) -> Result<TwoModeGaussianState> {
    if !(mu >= 0.5 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be a finite number >= 1/2, got {mu}")));
    }
    let c = ((mu - 0.5) * (mu + 0.5)).sqrt();
    TwoModeGaussianState::standard(StandardForm { a: mu, b: mu, c, d: 0.25 })
}

/// Apply a phase-insensitive channel to mode `mode` of a two-mode state.
pub fn channel_on_covariance(
    params: &BosonicChannelParams,
    state: &TwoModeGaussianState,
    mode: usize,
) -> Result<TwoModeGaussianState> {
    params.validate()?;
    if mode > 1 {
        return Err(Error::SubsystemOutOfRange { index: mode, count: 2 });
    }
    let (x, y) = params.scale_and_noise();
    if let Form::Standard(sf) = state.form {
        // det([[a, c], [c, b]]) with b ↦ x² b + y, c ↦ x c becomes x² d + y a.
        let out = if mode == 1 {
            StandardForm { a: sf.a, b: x * x * sf.b + y, c: x * sf.c, d: x * x * sf.d + y * sf.a }
        } else {
            StandardForm { a: x * x * sf.a + y, b: sf.b, c: x * sf.c, d: x * x * sf.d + y * sf.b }
        };
        return TwoModeGaussianState::standard(out);
    }
    let mut scale = Matrix4::identity();
    scale[(mode, mode)] = x;
    scale[(2 + mode, 2 + mode)] = x;
    let mut cov = scale * state.cov * scale;
    cov[(mode, mode)] += y;
    cov[(2 + mode, 2 + mode)] += y;
    TwoModeGaussianState::new(cov)
}

/// Channel output on half of a TMSV: `(id ⊗ N)(TMSV_μ)`.
pub fn channel_output(params: &BosonicChannelParams, mu: f64) -> Result<TwoModeGaussianState> {
    channel_on_covariance(params, &tmsv_covariance(mu)?, 1)
}

/// Separable reference with the same marginals as the channel output and
/// correlation `c = √((a - 1/2)(b - 1/2))`, the largest compatible with separability.
pub fn separable_reference(params: &BosonicChannelParams, mu: f64) -> Result<TwoModeGaussianState> {
    let out = channel_output(params, mu)?;
    let (a, b) = (out.cov[(0, 0)], out.cov[(1, 1)]);
    let c = ((a - 0.5) * (b - 0.5)).max(0.0).sqrt();
    let d = 0.5 * (a + b) - 0.25;
    let tau = TwoModeGaussianState::standard(StandardForm { a, b, c, d })?;
    if !tau.is_separable()? {
        return Err(Error::NotSeparable(format!(
            "reference partial transpose has symplectic eigenvalue {}",
            tau.min_pt_symplectic_eigenvalue()?
        )));
    }
    Ok(tau)
}

/// `ln((ν + 1/2)/(ν - 1/2))`, the Gibbs exponent of a mode with symplectic eigenvalue `ν`.
fn gibbs_exponent(nu: f64) -> f64 {
    ((nu + 0.5) / (nu - 0.5)).ln()
}

/// `(ν² - 1/4) ln((ν + 1/2)/(ν - 1/2))`, finite as `ν → 1/2`.
fn weighted_exponent(nu: f64) -> f64 {
    let x = (nu - 0.5) * (nu + 0.5);
    if x <= 0.0 {
        0.0
    } else {
        x * gibbs_exponent(nu)
    }
}

fn entropy_nats(nu: f64) -> f64 {
    let n = nu - 0.5;
    if n <= 0.0 {
        0.0
    } else {
        (n + 1.0) * (n + 1.0).ln() - n * n.ln()
    }
}

/// `(D, V)` in nats with `σ = diag(ν_σ)` in its own Williamson frame and `ρ`
/// given there by `(ν_ρ, S)`, `V_ρ = S diag(ν_ρ) S^T`.
///
/// With `K = S^T G_σ S` and `D_ν = diag(ν_ρ)`:
/// `D = -S(ρ) + Tr(K D_ν)/2 + ln Z_σ` and
/// `V = Σ g_k²(ν_k² - 1/4) - Σ g_k(ν_k² - 1/4)(K_qq + K_pp)_k + Tr(K D_ν K D_ν)/2 + Tr(KΩKΩ)/8`,
/// where `g_k` are the Gibbs exponents of `ρ`; every term stays finite for pure `ρ`.
fn divergence_in_frame(nu_r: [f64; 2], s: &Matrix4<f64>, nu_s: [f64; 2]) -> (f64, f64) {
    let g = [gibbs_exponent(nu_s[0]), gibbs_exponent(nu_s[1])];
    let gd = Matrix4::from_diagonal(&Vector4::new(g[0], g[1], g[0], g[1]));
    let ln_z: f64 = nu_s.iter().map(|&nu| 0.5 * ((nu - 0.5) * (nu + 0.5)).ln()).sum();
    let k = s.transpose() * gd * s;
    let dn = Matrix4::from_diagonal(&Vector4::new(nu_r[0], nu_r[1], nu_r[0], nu_r[1]));
    let entropy: f64 = nu_r.iter().map(|&nu| entropy_nats(nu)).sum();
    let d = -entropy + 0.5 * (k * dn).trace() + ln_z;

    let mut om = Matrix4::zeros();
    om[(0, 2)] = 1.0;
    om[(1, 3)] = 1.0;
    om[(2, 0)] = -1.0;
    om[(3, 1)] = -1.0;
    let mut v = 0.0;
    for m in 0..2 {
        let w = weighted_exponent(nu_r[m]);
        if w > 0.0 {
            v += w * gibbs_exponent(nu_r[m]);
        }
        v -= w * (k[(m, m)] + k[(m + 2, m + 2)]);
    }
    let kd = k * dn;
    let ko = k * om;
    v += 0.5 * (kd * kd).trace() + 0.125 * (ko * ko).trace();
    (d, v.max(0.0))
}

/// `D(ρ||σ)` in bits and `V(ρ||σ)` in bits² for zero-mean states.
///
/// Both states are moved to the Williamson frame of `σ`. For standard-form
/// states that frame is a two-mode squeezer, so only the relative squeezing
/// enters and the result stays accurate for very large energies. Pure `ρ`
/// is allowed; `σ` must be faithful.
pub fn gaussian_rel_entropy_and_variance(rho: &TwoModeGaussianState, sigma: &TwoModeGaussianState) -> Result<(f64, f64)> {
    let nu_min = sigma.symplectic_eigenvalues()?[0];
    if nu_min - 0.5 <= TOL.symplectic {
        return Err(Error::Support(format!("sigma has symplectic eigenvalue {nu_min} (not faithful)")));
    }
    let (nu_r, s) = match (rho.form, sigma.form) {
        (Form::Standard(r), Form::Standard(sg)) => {
            (r.mode_nus(), two_mode_squeezer(0.5 * (r.two_r() - sg.two_r())))
        }
        _ => {
            let (nu_r, s_r) = rho.frame()?;
            let (_, s_s) = sigma.frame()?;
            let mut om = Matrix4::zeros();
            om[(0, 2)] = 1.0;
            om[(1, 3)] = 1.0;
            om[(2, 0)] = -1.0;
            om[(3, 1)] = -1.0;
            // S⁻¹ = Ω^T S^T Ω for symplectic S.
            (nu_r, om.transpose() * s_s.transpose() * om * s_r)
        }
    };
    let nu_s = match sigma.form {
        Form::Standard(sg) => sg.mode_nus(),
        _ => sigma.frame()?.0,
    };
    let (d, v) = divergence_in_frame(nu_r, &s, nu_s);
    Ok((d / LN_2, v / (LN_2 * LN_2)))
}

/// `(D, V)` between the channel output on a TMSV and its separable reference.
pub fn channel_rel_entropy_and_variance(params: &BosonicChannelParams, mu: f64) -> Result<(f64, f64)> {
    gaussian_rel_entropy_and_variance(&channel_output(params, mu)?, &separable_reference(params, mu)?)
}

/// Noise levels of the vanishing-noise extrapolation.
pub const VANISHING_NOISE_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Limit `N_B → 0` of [`channel_rel_entropy_and_variance`], by evaluating at
/// `N_B = δ` for each of [`VANISHING_NOISE_STEPS`] and Richardson
/// extrapolating (first level linear in `δ`, second level quadratic).
pub fn vanishing_noise_limit(params: &BosonicChannelParams, mu: f64) -> Result<(f64, f64)> {
    let vals: Vec<(f64, f64)> = VANISHING_NOISE_STEPS
        .iter()
        .map(|&delta| channel_rel_entropy_and_variance(&params.with_nb(delta), mu))
        .collect::<Result<_>>()?;
    let extrapolate = |f: [f64; 3]| {
        let r1 = f[1] + (f[1] - f[0]) / 9.0;
        let r2 = f[2] + (f[2] - f[1]) / 9.0;
        r2 + (r2 - r1) / 99.0
    };
    let d = extrapolate([vals[0].0, vals[1].0, vals[2].0]);
    let v = extrapolate([vals[0].1, vals[1].1, vals[2].1]).max(0.0);
    Ok((d, v))
}

/// Infinite-energy upper bound on the two-way secret-key capacity, in bits.
/// Zero for entanglement-breaking parameters.
pub fn asymptotic_bound(params: &BosonicChannelParams) -> Result<f64> {
    params.validate()?;
    if params.is_entanglement_breaking() {
        return Ok(0.0);
    }
    Ok(match *params {
        BosonicChannelParams::Thermal { eta, nb } => {
            -((1.0 - eta).log2() + nb * eta.log2()) - g_entropy(nb)
        }
        BosonicChannelParams::Amplifier { gain, nb } => {
            (nb + 1.0) * gain.log2() - (gain - 1.0).log2() - g_entropy(nb)
        }
        BosonicChannelParams::Additive { xi } => (xi - 1.0) / LN_2 - xi.log2(),
    })
}

/// Infinite-energy relative-entropy variance of the channel family, in bits².
pub fn family_variance(params: &BosonicChannelParams) -> Result<f64> {
    params.validate()?;
    Ok(match *params {
        BosonicChannelParams::Thermal { eta, nb } => {
            if nb == 0.0 {
                0.0
            } else {
                nb * (nb + 1.0) * (eta * (nb + 1.0) / nb).log2().powi(2)
            }
        }
        BosonicChannelParams::Amplifier { gain, nb } => {
            if nb == 0.0 {
                0.0
            } else {
                nb * (nb + 1.0) * ((nb + 1.0) / (gain * nb)).log2().powi(2)
            }
        }
        BosonicChannelParams::Additive { xi } => ((1.0 - xi) / LN_2).powi(2),
    })
}

/// Finite-blocklength upper bound on the two-way secret-key rate.
///
/// Noiseless-environment loss and amplification use the variance-free forms
/// `-log(1-η) + C(ε)/n` and `log(G/(G-1)) + C(ε)/n`; other parameters use
/// `asymptotic + √(2V/(n(1-ε))) + C(ε)/n`. Entanglement-breaking parameters
/// return `-log(1-ε)/n`.
pub fn finite_n_bound(params: &BosonicChannelParams, n: u64, eps: f64) -> Result<BoundReport> {
    params.validate()?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0,1), got {eps}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let report = |value: f64, terms: Terms| -> BoundReport {
        BoundReport {
            family: params.name().to_string(),
            params: params.param_list().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            assistance: Assistance::TwoWay,
            n,
            eps,
            kind: BoundKind::Converse,
            value_bits: value,
            rate_bits: value,
            infinite: value == f64::INFINITY,
            terms,
        }
    };
    if params.is_entanglement_breaking() {
        let v = eb_bound(n, eps)?;
        return Ok(report(v, Terms {
            first: 0.0,
            second: 0.0,
            third: v,
            remainder_model: "none; entanglement-breaking parameters".into(),
        }));
    }
    let first = asymptotic_bound(params)?;
    let third = c_eps(eps) / n as f64;
    let noiseless = !matches!(params, BosonicChannelParams::Additive { .. }) && params.nb() == 0.0;
    let second = if noiseless {
        0.0
    } else {
        (2.0 * family_variance(params)? / (n as f64 * (1.0 - eps))).sqrt()
    };
    let value = first + second + third;
    Ok(report(value, Terms { first, second, third, remainder_model: "none; rigorous upper bound".into() }))
}
