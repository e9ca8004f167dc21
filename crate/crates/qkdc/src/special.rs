//! Scalar special functions: normal quantiles, log-binomials, entropies.

use crate::{Error, Result};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{LN_2, SQRT_2};

/// Standard normal CDF.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal quantile, `sup{a : Phi(a) <= eps}`.
pub fn inv_gaussian_cdf(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "inv_gaussian_cdf needs eps in (0,1), got {eps}"
        )));
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower tail and reflect, so the symmetry holds exactly.
    let (p, sign) = if eps < 0.5 { (eps, 1.0) } else { (1.0 - eps, -1.0) };
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    // One Newton polish step on the tail probability.
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if pdf > 0.0 {
        x -= (gaussian_cdf(x) - p) / pdf;
    }
    Ok(sign * x)
}

/// Natural log of the binomial coefficient C(n, k).
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Natural log of n!.
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let t = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    t(p) + t(1.0 - p)
}

/// `log2(sum exp(x_i))` from natural-log inputs.
pub fn log2_sum_exp(xs: &[f64]) -> f64 {
    ln_sum_exp(xs) / LN_2
}

pub fn ln_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
