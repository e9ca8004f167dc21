//! Converse and achievability bounds on secret-key rates at finite blocklength.
//!
//! Rates are in bits per channel use. Every channel-level bound is returned as
//! a [`BoundReport`] carrying its term breakdown; scalar helpers return `f64`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::config::TOL;
use crate::divergences::{
    coherent_info_and_variance, conditional_max_entropy, hypothesis_test_divergence,
    hypothesis_test_divergence_classical_iid, sandwiched_renyi, Direction,
};
use crate::qcore::linalg::*;
use crate::qcore::{apply_channel, DensityOperator, QuantumChannel};
use crate::special::binary_entropy;
use crate::{Error, Result};

pub use crate::special::inv_gaussian_cdf;

/// Whether a value bounds the rate from above, below, or is exact up to its remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Converse,
    Achievability,
    Exact,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Converse => "converse",
            BoundKind::Achievability => "achievability",
            BoundKind::Exact => "exact",
        }
    }
}

/// Classical assistance allowed by the protocol class a bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assistance {
    Unassisted,
    /// Classical pre- and post-processing.
    Cppp,
    /// Adaptive two-way LOCC between channel uses.
    TwoWay,
}

/// First, second and third order terms of a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Terms {
    #[serde(with = "extended_float")]
    pub first: f64,
    #[serde(with = "extended_float")]
    pub second: f64,
    #[serde(with = "extended_float")]
    pub third: f64,
    /// What is left out of `first + second + third`.
    pub remainder_model: String,
}

impl Terms {
    fn new(first: f64, second: f64, third: f64, remainder_model: &str) -> Self {
        Terms { first, second, third, remainder_model: remainder_model.to_string() }
    }

    pub fn sum(&self) -> f64 {
        self.first + self.second + self.third
    }
}

/// One evaluated bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundReport {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub assistance: Assistance,
    pub n: u64,
    pub eps: f64,
    pub kind: BoundKind,
    /// Raw value of the formula; may be negative for achievability bounds.
    #[serde(with = "extended_float")]
    pub value_bits: f64,
    /// `value_bits` clamped at zero for achievability bounds.
    #[serde(with = "extended_float")]
    pub rate_bits: f64,
    pub infinite: bool,
    pub terms: Terms,
}

impl BoundReport {
    fn build(
        family: &str,
        params: &[(&str, f64)],
        assistance: Assistance,
        n: u64,
        eps: f64,
        kind: BoundKind,
        value_bits: f64,
        terms: Terms,
    ) -> Self {
        let rate_bits = match kind {
            BoundKind::Achievability => value_bits.max(0.0),
            _ => value_bits,
        };
        BoundReport {
            family: family.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            assistance,
            n,
            eps,
            kind,
            value_bits,
            rate_bits,
            infinite: value_bits == f64::INFINITY,
            terms,
        }
    }

    /// Relabel the channel family, e.g. for reports built from a raw channel.
    pub fn with_family(mut self, family: &str, params: &[(&str, f64)]) -> Self {
        self.family = family.to_string();
        self.params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self
    }

    /// Copy with every real field rounded to `digits` significant digits.
    pub fn rounded(&self, digits: usize) -> Self {
        let r = |x: f64| round_sig(x, digits);
        let mut out = self.clone();
        out.params.values_mut().for_each(|v| *v = r(*v));
        out.eps = r(out.eps);
        out.value_bits = r(out.value_bits);
        out.rate_bits = r(out.rate_bits);
        out.terms.first = r(out.terms.first);
        out.terms.second = r(out.terms.second);
        out.terms.third = r(out.terms.third);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// `key=value` pairs joined by `;`.
    pub fn params_string(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={}", fmt_float(*v))).collect::<Vec<_>>().join(";")
    }

    pub const CSV_HEADER: [&'static str; 9] =
        ["family", "params", "n", "eps", "kind", "value_bits", "term1", "term2", "term3"];

    pub fn csv_record(&self) -> [String; 9] {
        [
            self.family.clone(),
            self.params_string(),
            self.n.to_string(),
            fmt_float(self.eps),
            self.kind.as_str().to_string(),
            fmt_float(self.value_bits),
            fmt_float(self.terms.first),
            fmt_float(self.terms.second),
            fmt_float(self.terms.third),
        ]
    }
}

/// Round to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.max(1) - 1, x).parse().expect("formatted float parses")
}

/// Locale-free decimal form; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// Serde for floats that may be infinite: finite values as numbers,
/// the rest as the strings `"inf"`, `"-inf"`, `"nan"`.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::fmt_float(*x))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a float: {other}"))),
            },
        }
    }
}

fn check_open_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0,1), got {eps}")));
    }
    Ok(())
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    Ok(())
}

fn check_pure_input(ch: &QuantumChannel, input: &DensityOperator) -> Result<()> {
    let dims = input.dims();
    if dims.len() != 2 || dims[1] != ch.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "input dims {dims:?} do not end in the channel input dimension {}",
            ch.in_dim()
        )));
    }
    let m = input.matrix();
    let purity = (m * m).trace().re;
    if (purity - 1.0).abs() > TOL.trace {
        return Err(Error::InvalidArgument(format!("input state is not pure (purity {purity})")));
    }
    Ok(())
}

fn check_ppt_reference(tau: &DensityOperator) -> Result<()> {
    let min = tau.min_pt_eigenvalue(1)?;
    if min < TOL.min_eigenvalue {
        return Err(Error::NotSeparable(format!("partial transpose has eigenvalue {min:e}")));
    }
    Ok(())
}

fn channel_output(ch: &QuantumChannel, input: &DensityOperator) -> Result<DensityOperator> {
    check_pure_input(ch, input)?;
    apply_channel(ch, input, 1)
}

fn check_reference_dims(omega: &DensityOperator, tau: &DensityOperator) -> Result<()> {
    if omega.dims() != tau.dims() {
        return Err(Error::DimensionMismatch(format!(
            "reference dims {:?} differ from channel output dims {:?}",
            tau.dims(),
            omega.dims()
        )));
    }
    Ok(())
}

/// `D_H^ε(N(ψ_AA') || τ_AB)`: a converse witness for one use of the channel
/// with classical pre- and post-processing, valid for separable `τ`.
///
/// `τ` must be PPT; for `dA·dB ≤ 6` this certifies separability.
pub fn meta_converse_point(
    ch: &QuantumChannel,
    input: &DensityOperator,
    sep_ref: &DensityOperator,
    eps: f64,
) -> Result<f64> {
    let omega = channel_output(ch, input)?;
    check_reference_dims(&omega, sep_ref)?;
    check_ppt_reference(sep_ref)?;
    Ok(hypothesis_test_divergence(&omega, sep_ref, eps)?.value)
}

/// Joint eigenbasis probabilities of two commuting operators, if they commute.
fn commuting_spectra(a: &CMat, b: &CMat) -> Option<(Vec<f64>, Vec<f64>)> {
    let comm = a * b - b * a;
    if max_abs(&comm) > 1e-12 {
        return None;
    }
    // A generic combination separates the joint eigenspaces.
    let mix = a + b * c(std::f64::consts::FRAC_1_SQRT_2 * 1.234_567, 0.0);
    let (_, vecs) = eigh(&mix);
    let da = vecs.adjoint() * a * &vecs;
    let db = vecs.adjoint() * b * &vecs;
    let off = |m: &CMat| {
        let mut w = m.clone();
        for i in 0..w.nrows() {
            w[(i, i)] = c(0.0, 0.0);
        }
        max_abs(&w)
    };
    if off(&da) > 1e-10 || off(&db) > 1e-10 {
        return None;
    }
    let p = (0..da.nrows()).map(|i| da[(i, i)].re.max(0.0)).collect();
    let q = (0..db.nrows()).map(|i| db[(i, i)].re.max(0.0)).collect();
    Some((p, q))
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// `(1/n) D_H^ε(ω^{⊗n} || τ^{⊗n})` with `ω = N(ψ)`.
///
/// Commuting pairs reduce to the exact classical i.i.d. computation for any `n`;
/// otherwise the tensor power is formed explicitly, which is limited to
/// dimension 64.
pub fn meta_converse_iid(
    ch: &QuantumChannel,
    input: &DensityOperator,
    sep_ref: &DensityOperator,
    eps: f64,
    n: u64,
) -> Result<BoundReport> {
    check_n(n)?;
    let omega = channel_output(ch, input)?;
    check_reference_dims(&omega, sep_ref)?;
    check_ppt_reference(sep_ref)?;
    let total = match commuting_spectra(omega.matrix(), sep_ref.matrix()) {
        Some((p, q)) => hypothesis_test_divergence_classical_iid(&normalized(p), &normalized(q), eps, n)?,
        None => {
            let d = omega.dim() as f64;
            if (n as f64) * d.ln() > 64f64.ln() + 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "non-commuting {}-dimensional pair: n = {n} exceeds the explicit tensor limit",
                    omega.dim()
                )));
            }
            let power = |s: &DensityOperator| -> DensityOperator {
                let mut acc = s.clone();
                for _ in 1..n {
                    acc = acc.tensor(s);
                }
                acc
            };
            hypothesis_test_divergence(&power(&omega), &power(sep_ref), eps)?.value
        }
    };
    let value = total / n as f64;
    Ok(BoundReport::build(
        "channel",
        &[],
        Assistance::Cppp,
        n,
        eps,
        BoundKind::Converse,
        value,
        Terms::new(value, 0.0, 0.0, "exact for the given (input, reference) witness"),
    ))
}

/// `(1/ℓ) D̃_α(N^{⊗ℓ}(ψ^{⊗ℓ}) || τ)` for `ℓ ∈ {1, 2}`, with `τ` a separable
/// reference on `(A^ℓ, B^ℓ)`.
pub fn regularized_renyi_witness(
    ch: &QuantumChannel,
    input: &DensityOperator,
    sep_ref: &DensityOperator,
    alpha: f64,
    ell: usize,
) -> Result<f64> {
    if !(1..=2).contains(&ell) {
        return Err(Error::InvalidArgument(format!("regularization supports l in {{1,2}}, got {ell}")));
    }
    let omega = channel_output(ch, input)?;
    let joint = if ell == 1 {
        omega
    } else {
        let (da, db) = (omega.dims()[0], omega.dims()[1]);
        omega.tensor(&omega).regroup(vec![da, db, da, db])?.permute(&[0, 2, 1, 3])?.regroup(vec![da * da, db * db])?
    };
    check_reference_dims(&joint, sep_ref)?;
    check_ppt_reference(sep_ref)?;
    Ok(sandwiched_renyi(&joint, sep_ref, alpha)? / ell as f64)
}

/// Fidelity-decay exponent above the Rényi relative entropy of entanglement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongConverse {
    /// `((α-1)/α)(P - Ẽ_α)`, clamped at zero.
    pub exponent: f64,
    /// `|A'|` when the prefactor `n^{|A'|²}` applies.
    pub penalty_dim: Option<usize>,
}

impl StrongConverse {
    /// `log2` of the fidelity bound at blocklength `n`.
    pub fn log2_fidelity_bound(&self, n: u64) -> f64 {
        let prefactor = self.penalty_dim.map_or(0.0, |d| (d * d) as f64 * (n as f64).log2());
        (prefactor - n as f64 * self.exponent).min(0.0)
    }

    /// Upper bound on the protocol fidelity `1 - ε` at blocklength `n`.
    pub fn fidelity_bound(&self, n: u64) -> f64 {
        self.log2_fidelity_bound(n).exp2()
    }
}

pub fn strong_converse_exponent(
    rate: f64,
    renyi_ref: f64,
    alpha: f64,
    dims_penalty: Option<usize>,
) -> Result<StrongConverse> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be a finite number > 1, got {alpha}")));
    }
    if dims_penalty == Some(0) {
        return Err(Error::InvalidArgument("penalty dimension must be >= 1".into()));
    }
    let exponent = ((alpha - 1.0) / alpha * (rate - renyi_ref)).max(0.0);
    Ok(StrongConverse { exponent, penalty_dim: dims_penalty })
}

/// `D + √(V/n) Φ⁻¹(ε)`; no third-order term.
pub fn second_order_rate(d: f64, v: f64, eps: f64, n: u64) -> Result<BoundReport> {
    check_n(n)?;
    if !(v >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance must be >= 0, got {v}")));
    }
    let second = (v / n as f64).sqrt() * inv_gaussian_cdf(eps)?;
    Ok(BoundReport::build(
        "second-order",
        &[("D", d), ("V", v)],
        Assistance::TwoWay,
        n,
        eps,
        BoundKind::Exact,
        d + second,
        Terms::new(d, second, 0.0, "O(log n / n)"),
    ))
}

/// Variance of the log-likelihood ratio for the qubit dephasing channel, bits².
pub fn dephasing_variance(gamma: f64) -> f64 {
    let h = binary_entropy(gamma);
    let t = |x: f64| if x > 0.0 { x * (x.log2() + h).powi(2) } else { 0.0 };
    t(gamma) + t(1.0 - gamma)
}

/// `1 - h(γ) + √(v(γ)/n) Φ⁻¹(ε) + log n / (2n)` for the qubit dephasing channel.
pub fn dephasing_boundary(gamma: f64, n: u64, eps: f64) -> Result<BoundReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0,1), got {gamma}")));
    }
    check_n(n)?;
    let nf = n as f64;
    let first = 1.0 - binary_entropy(gamma);
    let second = (dephasing_variance(gamma) / nf).sqrt() * inv_gaussian_cdf(eps)?;
    let third = nf.log2() / (2.0 * nf);
    Ok(BoundReport::build(
        "dephasing",
        &[("gamma", gamma)],
        Assistance::TwoWay,
        n,
        eps,
        BoundKind::Exact,
        first + second + third,
        Terms::new(first, second, third, "O(1/n)"),
    ))
}

/// Largest error probability attainable in the erasure boundary, `1 - (1 - p/2)^n`.
pub fn erasure_max_eps(p: f64, n: u64) -> f64 {
    -(n as f64 * (-p / 2.0).ln_1p()).exp_m1()
}

/// Error probability of the optimal erasure protocol at rate `rate`:
/// `Σ_l C(n,l) p^l (1-p)^{n-l} max(0, 1 - 2^{n(1-rate) - l})`.
pub fn erasure_epsilon(p: f64, n: u64, rate: f64) -> f64 {
    let x = n as f64 * (1.0 - rate);
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let start = if x < 0.0 { 0 } else { (x.floor() as u64 + 1).min(n + 1) };
    let mut sum = 0.0;
    for l in start..=n {
        let lf = l as f64;
        let w = (crate::special::ln_binomial(n, l) + lf * lp + (n as f64 - lf) * lq).exp();
        sum += w * -((x - lf) * LN_2).exp_m1();
    }
    sum
}

/// Exact erasure-channel boundary: the rate `P̂ ∈ [0,1]` with
/// `erasure_epsilon(p, n, P̂) = ε`, found by bisection.
///
/// Terms hold the expansion `1 - p + √(p(1-p)/n) Φ⁻¹(ε)` and, as the third
/// term, the difference between the exact root and that expansion.
pub fn erasure_boundary(p: f64, n: u64, eps: f64) -> Result<BoundReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (0,1), got {p}")));
    }
    check_n(n)?;
    let hi_eps = erasure_max_eps(p, n);
    if !(eps > 0.0 && eps <= hi_eps) {
        return Err(Error::Infeasible { eps, lo: 0.0, hi: hi_eps });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut iterations = 0;
    while hi - lo > 1e-15 && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if erasure_epsilon(p, n, mid) < eps {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let (r_lo, r_hi) = ((erasure_epsilon(p, n, lo) - eps).abs(), (erasure_epsilon(p, n, hi) - eps).abs());
    let (value, residual) = if r_lo <= r_hi { (lo, r_lo) } else { (hi, r_hi) };
    if residual > 1e-10 {
        return Err(Error::NotConverged { what: "erasure boundary bisection", iterations, residual });
    }
    let first = 1.0 - p;
    let second = (p * (1.0 - p) / n as f64).sqrt() * inv_gaussian_cdf(eps.min(1.0 - 1e-16))?;
    Ok(BoundReport::build(
        "erasure",
        &[("p", p)],
        Assistance::TwoWay,
        n,
        eps,
        BoundKind::Exact,
        value,
        Terms::new(first, second, value - first - second, "exact root; term3 is its gap to the expansion, O(1/n)"),
    ))
}

/// `-log(1-ε)/n`: two-way rate bound for entanglement-breaking channels.
pub fn eb_bound(n: u64, eps: f64) -> Result<f64> {
    check_n(n)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0,1), got {eps}")));
    }
    Ok(-(-eps).ln_1p() / LN_2 / n as f64)
}

pub fn eb_report(n: u64, eps: f64) -> Result<BoundReport> {
    let v = eb_bound(n, eps)?;
    Ok(BoundReport::build(
        "entanglement-breaking",
        &[],
        Assistance::TwoWay,
        n,
        eps,
        BoundKind::Converse,
        v,
        Terms::new(0.0, 0.0, v, "none"),
    ))
}

/// `C(ε) = log 6 + 2 log((1+ε)/(1-ε))` in bits.
pub fn c_eps(eps: f64) -> f64 {
    6f64.log2() + 2.0 * ((1.0 + eps) / (1.0 - eps)).log2()
}

/// Chebyshev-type upper bound on `(1/n) D_H^ε(ρ^{⊗n} || σ^{⊗n})`:
/// `D + √(2V/(n(1-ε))) + C(ε)/n`.
pub fn chebyshev_dh_bound(d: f64, v: f64, eps: f64, n: u64) -> Result<f64> {
    check_open_eps(eps)?;
    check_n(n)?;
    if !(v >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance must be >= 0, got {v}")));
    }
    let nf = n as f64;
    Ok(d + (2.0 * v / (nf * (1.0 - eps))).sqrt() + c_eps(eps) / nf)
}

/// `I + √(V/n) Φ⁻¹(ε)` from the (reverse) coherent information of `N(ψ)`.
pub fn achievability_lower(
    ch: &QuantumChannel,
    input: &DensityOperator,
    eps: f64,
    n: u64,
    direction: Direction,
) -> Result<BoundReport> {
    check_n(n)?;
    let omega = channel_output(ch, input)?;
    let (info, var) = coherent_info_and_variance(&omega, direction)?;
    let second = (var.max(0.0) / n as f64).sqrt() * inv_gaussian_cdf(eps)?;
    let (family, assistance) = match direction {
        Direction::Coherent => ("channel-coherent", Assistance::Unassisted),
        Direction::Reverse => ("channel-reverse", Assistance::TwoWay),
    };
    Ok(BoundReport::build(
        family,
        &[],
        assistance,
        n,
        eps,
        BoundKind::Achievability,
        info + second,
        Terms::new(info, second, 0.0, "O(log n / n)"),
    ))
}

/// `-H_max(A|B)_ρ - 4 log(1/η)`, with the non-smooth max-entropy.
/// The value may be negative; clamping is left to the caller.
pub fn one_shot_distillation_rate(rho_ab: &DensityOperator, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0,1], got {eta}")));
    }
    Ok(-conditional_max_entropy(rho_ab)? + 4.0 * eta.log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::maximally_entangled;
    use crate::simulate::{make_channel, ChannelFamily};
    use crate::special::gaussian_cdf;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn dephasing_ref() -> DensityOperator {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        DensityOperator::new(m, vec![2, 2]).unwrap()
    }

    #[test]
    fn identity_channel_witness() {
        let ch = QuantumChannel::identity(2);
        let phi = maximally_entangled(2).unwrap();
        let tau = DensityOperator::maximally_mixed(vec![2, 2]).unwrap();
        assert_close(meta_converse_point(&ch, &phi, &tau, 0.0).unwrap(), 2.0, 1e-10);
    }

    #[test]
    fn entangled_reference_rejected() {
        let ch = QuantumChannel::identity(2);
        let phi = maximally_entangled(2).unwrap();
        let err = meta_converse_point(&ch, &phi, &phi, 0.1).unwrap_err();
        assert!(matches!(err, Error::NotSeparable(_)));
    }

    #[test]
    fn mixed_input_rejected() {
        let ch = QuantumChannel::identity(2);
        let mixed = DensityOperator::maximally_mixed(vec![2, 2]).unwrap();
        assert!(meta_converse_point(&ch, &mixed, &mixed, 0.1).is_err());
    }

    #[test]
    fn measure_prepare_gives_eb_bound() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ch = make_channel(&ChannelFamily::MeasurePrepare {
            states: vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[h, 0.0], [h, 0.0]]],
        })
        .unwrap();
        let phi = maximally_entangled(2).unwrap();
        let tau = apply_channel(&ch, &phi, 1).unwrap();
        for eps in [0.1, 0.5, 0.9] {
            let v = meta_converse_point(&ch, &phi, &tau, eps).unwrap();
            assert_close(v, eb_bound(1, eps).unwrap(), 1e-10);
        }
    }

    #[test]
    fn dephasing_witness_is_classical() {
        let gamma = 0.2;
        let ch = make_channel(&ChannelFamily::Dephasing { gamma }).unwrap();
        let phi = maximally_entangled(2).unwrap();
        let tau = dephasing_ref();
        for eps in [0.01, 0.1, 0.3] {
            let q = meta_converse_point(&ch, &phi, &tau, eps).unwrap();
            let cl = hypothesis_test_divergence_classical_iid(&[1.0 - gamma, gamma], &[0.5, 0.5], eps, 1).unwrap();
            assert_close(q, cl, 1e-10);
            let iid = meta_converse_iid(&ch, &phi, &tau, eps, 50).unwrap();
            let cl50 = hypothesis_test_divergence_classical_iid(&[1.0 - gamma, gamma], &[0.5, 0.5], eps, 50).unwrap();
            assert_close(iid.value_bits, cl50 / 50.0, 1e-12);
        }
    }

    #[test]
    fn iid_extension_explicit_tensor_matches_commuting_route() {
        let ch = make_channel(&ChannelFamily::Dephasing { gamma: 0.3 }).unwrap();
        let phi = maximally_entangled(2).unwrap();
        let tau = dephasing_ref();
        let commuting = meta_converse_iid(&ch, &phi, &tau, 0.2, 2).unwrap().value_bits;
        let omega = apply_channel(&ch, &phi, 1).unwrap();
        let explicit = hypothesis_test_divergence(&omega.tensor(&omega), &tau.tensor(&tau), 0.2).unwrap().value / 2.0;
        assert_close(commuting, explicit, 1e-9);
    }

    #[test]
    fn regularized_witness_additive_on_product_reference() {
        let ch = make_channel(&ChannelFamily::Dephasing { gamma: 0.1 }).unwrap();
        let phi = maximally_entangled(2).unwrap();
        let tau = dephasing_ref();
        let one = regularized_renyi_witness(&ch, &phi, &tau, 1.5, 1).unwrap();
        let tau2 = tau.tensor(&tau).regroup(vec![2, 2, 2, 2]).unwrap().permute(&[0, 2, 1, 3]).unwrap().regroup(vec![4, 4]).unwrap();
        let two = regularized_renyi_witness(&ch, &phi, &tau2, 1.5, 2).unwrap();
        assert_close(one, two, 1e-9);
        assert!(regularized_renyi_witness(&ch, &phi, &tau, 1.5, 3).is_err());
    }

    #[test]
    fn strong_converse_examples() {
        assert_eq!(strong_converse_exponent(0.4, 0.4, 2.0, None).unwrap().exponent, 0.0);
        assert_close(strong_converse_exponent(1.3, 0.3, 2.0, None).unwrap().exponent, 0.5, 1e-15);
        assert_eq!(strong_converse_exponent(0.1, 0.4, 2.0, None).unwrap().exponent, 0.0);
        assert!(strong_converse_exponent(1.0, 0.0, 1.0, None).is_err());
        let sc = strong_converse_exponent(1.3, 0.3, 2.0, Some(2)).unwrap();
        assert_close(sc.log2_fidelity_bound(1000), 4.0 * 1000f64.log2() - 500.0, 1e-9);
        assert_close(sc.fidelity_bound(1), 0.5f64.sqrt(), 1e-15);
    }

    #[test]
    fn dephasing_above_capacity_has_positive_exponent() {
        let gamma: f64 = 0.1;
        let rate = 0.8;
        assert!(rate > 1.0 - binary_entropy(gamma));
        let ch = make_channel(&ChannelFamily::Dephasing { gamma }).unwrap();
        let phi = maximally_entangled(2).unwrap();
        let omega = apply_channel(&ch, &phi, 1).unwrap();
        let best = [1.1, 1.5, 2.0, 3.0, 5.0]
            .iter()
            .map(|&a| {
                let e = sandwiched_renyi(&omega, &dephasing_ref(), a).unwrap();
                strong_converse_exponent(rate, e, a, None).unwrap().exponent
            })
            .fold(0.0, f64::max);
        assert!(best > 0.0);
    }

    #[test]
    fn second_order_examples() {
        assert_eq!(second_order_rate(0.7, 3.0, 0.5, 10).unwrap().value_bits, 0.7);
        assert_eq!(second_order_rate(0.7, 0.0, 0.01, 10).unwrap().value_bits, 0.7);
        let r = second_order_rate(1.0, 0.5, 0.05, 100).unwrap();
        // Quantile from bisection on the CDF.
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if gaussian_cdf(m) < 0.05 { lo = m } else { hi = m }
        }
        assert_close(r.value_bits, 1.0 + 0.005f64.sqrt() * lo, 1e-12);
        assert_close(r.terms.sum(), r.value_bits, 1e-12);
    }

    #[test]
    fn dephasing_half_is_third_order_only() {
        let r = dephasing_boundary(0.5, 100, 0.1).unwrap();
        assert_close(r.terms.first, 0.0, 1e-15);
        assert_close(r.terms.second, 0.0, 1e-15);
        assert_close(r.value_bits, 100f64.log2() / 200.0, 1e-15);
    }

    #[test]
    fn dephasing_matches_classical_oracle() {
        let (gamma, eps) = (0.1, 0.05);
        for n in [200u64, 1000] {
            let r = dephasing_boundary(gamma, n, eps).unwrap();
            assert_close(r.terms.sum(), r.value_bits, 1e-12);
            let exact = hypothesis_test_divergence_classical_iid(&[1.0 - gamma, gamma], &[0.5, 0.5], eps, n).unwrap() / n as f64;
            assert_close(r.value_bits, exact, 2.0 / n as f64);
        }
        let far = dephasing_boundary(gamma, 1_000_000_000, eps).unwrap();
        assert_close(far.value_bits, 1.0 - binary_entropy(gamma), 1e-3);
    }

    #[test]
    fn erasure_root_matches_grid_search() {
        let (p, n, eps) = (0.5, 10, 0.1);
        let r = erasure_boundary(p, n, eps).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=1_000_000u32 {
            let x = k as f64 * 1e-6;
            let d = (erasure_epsilon(p, n, x) - eps).abs();
            if d < best.0 {
                best = (d, x);
            }
        }
        assert_close(r.value_bits, best.1, 2e-6);
        assert!((erasure_epsilon(p, n, r.value_bits) - eps).abs() <= 1e-10);
        assert_close(r.terms.sum(), r.value_bits, 1e-12);
    }

    #[test]
    fn erasure_limits_and_errors() {
        let near = erasure_boundary(1e-3, 50, 0.01).unwrap().value_bits;
        let nearer = erasure_boundary(1e-4, 50, 0.002).unwrap().value_bits;
        assert!(near > 0.95 && nearer > near, "{near} {nearer}");
        let hi = erasure_max_eps(0.5, 3);
        assert_close(erasure_epsilon(0.5, 3, 1.0), hi, 1e-14);
        match erasure_boundary(0.5, 3, 0.9).unwrap_err() {
            Error::Infeasible { hi: h, .. } => assert_close(h, hi, 1e-14),
            e => panic!("unexpected {e}"),
        }
        assert!(erasure_boundary(0.5, 3, 0.0).is_err());
        assert!(erasure_boundary(1.0, 3, 0.1).is_err());
    }

    #[test]
    fn erasure_expansion_gap_is_order_one_over_n() {
        for n in [100u64, 1000, 10000] {
            let r = erasure_boundary(0.3, n, 0.05).unwrap();
            assert!(r.terms.third.abs() <= 5.0 / n as f64, "n={n} gap {}", r.terms.third);
        }
    }

    #[test]
    fn eb_and_chebyshev_examples() {
        assert_close(eb_bound(1, 0.5).unwrap(), 1.0, 1e-15);
        assert_eq!(eb_bound(3, 0.0).unwrap(), 0.0);
        assert!(eb_bound(1_000_000, 0.5).unwrap() < 1e-5);
        assert_close(c_eps(0.5), 54f64.log2(), 1e-14);
        assert_close(chebyshev_dh_bound(0.3, 0.0, 0.5, 10).unwrap(), 0.3 + 54f64.log2() / 10.0, 1e-14);
    }

    #[test]
    fn chebyshev_dominates_commuting_pair() {
        let (p, q) = ([0.8f64, 0.2], [0.4f64, 0.6]);
        let d: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).log2()).sum();
        let v: f64 = p.iter().zip(&q).map(|(a, b)| a * ((a / b).log2() - d).powi(2)).sum();
        for n in [10u64, 100, 1000] {
            for eps in [0.05, 0.5] {
                let exact = hypothesis_test_divergence_classical_iid(&p, &q, eps, n).unwrap() / n as f64;
                assert!(chebyshev_dh_bound(d, v, eps, n).unwrap() > exact);
            }
        }
    }

    #[test]
    fn achievability_examples() {
        let phi = maximally_entangled(2).unwrap();
        let gamma = 0.1;
        let ch = make_channel(&ChannelFamily::Dephasing { gamma }).unwrap();
        let r = achievability_lower(&ch, &phi, 0.5, 100, Direction::Coherent).unwrap();
        assert_close(r.terms.first, 1.0 - binary_entropy(gamma), 1e-10);
        assert_eq!(r.terms.second, 0.0);

        // Reverse coherent information of erasure with a maximally entangled input.
        let p = 0.3;
        let er = make_channel(&ChannelFamily::Erasure { p, d: 2 }).unwrap();
        let r = achievability_lower(&er, &phi, 0.1, 100, Direction::Reverse).unwrap();
        assert_close(r.terms.first, 1.0 - p - binary_entropy(p), 1e-10);

        let deep = achievability_lower(&er, &phi, 0.1, 10, Direction::Coherent).unwrap();
        let heavy = make_channel(&ChannelFamily::Erasure { p: 0.9, d: 2 }).unwrap();
        let neg = achievability_lower(&heavy, &phi, 0.1, 10, Direction::Coherent).unwrap();
        assert!(neg.value_bits < 0.0 && neg.rate_bits == 0.0);
        assert_eq!(deep.rate_bits, deep.value_bits.max(0.0));
    }

    #[test]
    fn one_shot_examples() {
        let phi = maximally_entangled(2).unwrap();
        let two = phi.tensor(&phi).permute(&[0, 2, 1, 3]).unwrap().regroup(vec![4, 4]).unwrap();
        assert_close(one_shot_distillation_rate(&two, 0.5).unwrap(), -2.0, 1e-7);
        let zero = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let sigma = crate::qcore::random_state(vec![2], 4).unwrap();
        let prod = zero.tensor(&sigma).regroup(vec![2, 2]).unwrap();
        assert_close(one_shot_distillation_rate(&prod, 1.0).unwrap(), 0.0, 1e-7);
        let mixed = DensityOperator::maximally_mixed(vec![2]).unwrap().tensor(&sigma).regroup(vec![2, 2]).unwrap();
        assert_close(one_shot_distillation_rate(&mixed, 0.5).unwrap(), -5.0, 1e-7);
        assert!(one_shot_distillation_rate(&prod, 0.0).is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let r = dephasing_boundary(0.1, 1000, 0.05).unwrap();
        assert_eq!(BoundReport::from_json(&r.to_json()).unwrap(), r);
        let rounded = r.rounded(12);
        assert_eq!(BoundReport::from_json(&rounded.to_json()).unwrap(), rounded);
        let mut inf = eb_report(1, 0.5).unwrap();
        inf.value_bits = f64::INFINITY;
        let back = BoundReport::from_json(&inf.to_json()).unwrap();
        assert_eq!(back.value_bits, f64::INFINITY);
        assert!(BoundReport::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn csv_record_layout() {
        let r = erasure_boundary(0.5, 100, 0.05).unwrap().rounded(12);
        let rec = r.csv_record();
        assert_eq!(rec[0], "erasure");
        assert_eq!(rec[1], "p=0.5");
        assert_eq!(rec[4], "exact");
        assert_eq!(rec[5].parse::<f64>().unwrap(), r.value_bits);
        assert_eq!(round_sig(1.234_567_890_123_456, 12), 1.234_567_890_12);
    }
}
