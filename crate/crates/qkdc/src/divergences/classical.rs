//! Exact hypothesis testing between i.i.d. classical distributions,
//! by enumeration of type classes.

use std::f64::consts::LN_2;

use crate::special::{ln_factorial, ln_sum_exp};
use crate::{Error, Result};

const MAX_TYPES: u128 = 5_000_000;

struct TypeClass {
    ln_p: f64,
    ln_q: f64,
}

fn check_distribution(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidArgument(format!("{name} has negative or non-finite entries")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

fn count_types(n: u64, m: usize) -> u128 {
    // C(n + m - 1, m - 1), saturating.
    let mut acc: u128 = 1;
    for i in 1..m as u128 {
        acc = acc.saturating_mul(n as u128 + i) / i;
        if acc > MAX_TYPES * 1000 {
            return u128::MAX;
        }
    }
    acc
}

fn enumerate(n: u64, lp: &[f64], lq: &[f64], out: &mut Vec<TypeClass>) {
    let m = lp.len();
    let mut counts = vec![0u64; m];
    let base = ln_factorial(n);
    fn rec(k: usize, left: u64, counts: &mut [u64], base: f64, lp: &[f64], lq: &[f64], out: &mut Vec<TypeClass>) {
        let m = counts.len();
        if k == m - 1 {
            counts[k] = left;
            let mut ln_mult = base;
            let (mut a, mut b) = (0.0, 0.0);
            for i in 0..m {
                let c = counts[i];
                ln_mult -= ln_factorial(c);
                if c > 0 {
                    a += c as f64 * lp[i];
                    b += c as f64 * lq[i];
                }
            }
            out.push(TypeClass { ln_p: ln_mult + a, ln_q: ln_mult + b });
            return;
        }
        for c in 0..=left {
            counts[k] = c;
            rec(k + 1, left - c, counts, base, lp, lq, out);
        }
    }
    rec(0, n, &mut counts, base, lp, lq, out);
}

/// `D_H^ε(p^{⊗n} || q^{⊗n})` in bits, with a randomized boundary test.
///
/// Outcomes are grouped into type classes; within a class the likelihood
/// ratio is constant, so the Neyman–Pearson test fills classes in order of
/// decreasing ratio and takes a fraction of the last one.
pub fn hypothesis_test_divergence_classical_iid(p: &[f64], q: &[f64], eps: f64, n: u64) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "p has {} entries, q has {}",
            p.len(),
            q.len()
        )));
    }
    check_distribution("p", p)?;
    check_distribution("q", q)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0,1), got {eps}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    // Symbols never emitted under p are never accepted by an optimal test.
    // Symbols sharing a likelihood ratio induce the same test statistic and are merged.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (&a, &b) in p.iter().zip(q).filter(|(a, _)| **a > 0.0) {
        let same = |&(x, y): &(f64, f64)| {
            if b == 0.0 || y == 0.0 {
                b == 0.0 && y == 0.0
            } else {
                ((a / b).ln() - (x / y).ln()).abs() <= 1e-12
            }
        };
        match merged.iter_mut().find(|e| same(e)) {
            Some(e) => {
                e.0 += a;
                e.1 += b;
            }
            None => merged.push((a, b)),
        }
    }
    let (lp, lq): (Vec<f64>, Vec<f64>) = merged
        .iter()
        .map(|&(a, b)| (a.ln(), if b > 0.0 { b.ln() } else { f64::NEG_INFINITY }))
        .unzip();
    let m = lp.len();
    let count = count_types(n, m);
    if count > MAX_TYPES {
        return Err(Error::InvalidArgument(format!(
            "{count} type classes for n = {n} over {m} symbols exceeds the enumeration limit"
        )));
    }
    let mut types = Vec::with_capacity(count as usize);
    enumerate(n, &lp, &lq, &mut types);
    let ratio = |t: &TypeClass| t.ln_p - t.ln_q;
    types.sort_by(|a, b| ratio(b).total_cmp(&ratio(a)));

    // Rejected mass is tracked through suffix sums, which stay accurate in the tail.
    let mut suffix = vec![0.0; types.len() + 1];
    for i in (0..types.len()).rev() {
        suffix[i] = suffix[i + 1] + types[i].ln_p.exp();
    }
    let mut ln_beta_terms = Vec::new();
    for (i, t) in types.iter().enumerate() {
        if suffix[i + 1] <= eps {
            let pt = t.ln_p.exp();
            let f = if pt > 0.0 { (1.0 - (eps - suffix[i + 1]) / pt).clamp(0.0, 1.0) } else { 0.0 };
            if f > 0.0 {
                ln_beta_terms.push(f.ln() + t.ln_q);
            }
            break;
        }
        ln_beta_terms.push(t.ln_q);
    }
    let ln_beta = ln_sum_exp(&ln_beta_terms);
    if ln_beta == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(-ln_beta / LN_2)
}
