//! Truncated Fock-space oracle for two-mode Gaussian divergences.
//!
//! Every state here commutes with `n1 - n2`, so density matrices are stored
//! as real blocks indexed by the sector `k = n1 - n2`; inside a sector the
//! basis is `|n1, n1 - k>` for increasing `n1`.

#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use qkdc::gaussian::BosonicChannelParams;
use statrs::function::gamma::ln_gamma;

fn ln_fact(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

fn ln_choose(n: usize, k: usize) -> f64 {
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

#[derive(Debug, Clone)]
pub struct Sectors {
    pub m1: usize,
    pub m2: usize,
    pub blocks: BTreeMap<i64, DMatrix<f64>>,
}

impl Sectors {
    fn range(&self, k: i64) -> (usize, usize) {
        let lo = k.max(0) as usize;
        let hi = (self.m1 as i64).min(self.m2 as i64 + k);
        (lo, hi.max(lo as i64 - 1) as usize)
    }

    pub fn trace(&self) -> f64 {
        self.blocks.values().map(|b| b.trace()).sum()
    }
}

/// Loss `η_l` followed by a quantum-limited amplifier of gain `g_a` on mode 2.
fn decomposition(p: &BosonicChannelParams) -> (f64, f64) {
    match *p {
        BosonicChannelParams::Thermal { eta, nb } => {
            let g = 1.0 + (1.0 - eta) * nb;
            (eta / g, g)
        }
        BosonicChannelParams::Amplifier { gain, nb } => {
            let g = (gain - 1.0) * nb + gain;
            (gain / g, g)
        }
        BosonicChannelParams::Additive { xi } => {
            let g = 1.0 + xi;
            (1.0 / g, g)
        }
    }
}

/// `(id ⊗ N)(TMSV_μ)` truncated to `n1 ≤ m1` and at most `j_max` added photons.
fn channel_output(p: &BosonicChannelParams, mu: f64, m1: usize, j_max: usize) -> Sectors {
    let lam2 = (mu - 0.5) / (mu + 0.5);
    let ln_lam = 0.5 * lam2.ln();
    let ln_norm = 0.5 * (1.0 - lam2).ln();
    let (eta, gain) = decomposition(p);
    let m2 = m1 + j_max;
    let mut out = Sectors { m1, m2, blocks: BTreeMap::new() };
    for l in 0..=m1 {
        for j in 0..=j_max {
            let k = l as i64 - j as i64;
            let (lo, hi) = out.range(k);
            if hi < lo {
                continue;
            }
            let mut v = vec![0.0; hi - lo + 1];
            for n in lo.max(l)..=hi {
                // |n, n> -> loss of l photons -> gain of j photons.
                let m = n - l;
                let mut ln_amp = ln_norm + n as f64 * ln_lam;
                ln_amp += 0.5 * ln_choose(n, l);
                ln_amp += if eta < 1.0 {
                    0.5 * (m as f64 * eta.ln() + l as f64 * (1.0 - eta).ln())
                } else if l == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                };
                ln_amp += if gain > 1.0 {
                    0.5 * (ln_choose(m + j, m) - (m as f64 + 1.0) * gain.ln() + j as f64 * ((gain - 1.0) / gain).ln())
                } else if j == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                };
                v[n - lo] = ln_amp.exp();
            }
            if v.iter().all(|x| *x == 0.0) {
                continue;
            }
            let col = DMatrix::from_column_slice(v.len(), 1, &v);
            let blk = out.blocks.entry(k).or_insert_with(|| DMatrix::zeros(v.len(), v.len()));
            *blk += &col * col.transpose();
        }
    }
    out
}

/// Separable reference with marginals `a`, `b` and maximal separable
/// correlation, from its P-function `∫ P(α) |α><α| ⊗ |κα*><κα*|`.
fn reference(a: f64, b: f64, like: &Sectors) -> Sectors {
    let nn = a - 0.5;
    let kappa = ((b - 0.5) / (a - 0.5)).sqrt();
    let ln_den = (1.0 / nn + 1.0 + kappa * kappa).ln();
    let mut out = Sectors { m1: like.m1, m2: like.m2, blocks: BTreeMap::new() };
    for &k in like.blocks.keys() {
        let (lo, hi) = out.range(k);
        let dim = hi - lo + 1;
        let mut blk = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for jj in 0..dim {
                let (n1, m1) = (lo + i, lo + jj);
                let (n2, m2) = ((n1 as i64 - k) as usize, (m1 as i64 - k) as usize);
                let s = (n1 + m1 + n2 + m2) / 2;
                let ln = (n2 + m2) as f64 * kappa.ln() + ln_fact(s) - nn.ln() - (s as f64 + 1.0) * ln_den
                    - 0.5 * (ln_fact(n1) + ln_fact(m1) + ln_fact(n2) + ln_fact(m2));
                blk[(i, jj)] = ln.exp();
            }
        }
        out.blocks.insert(k, blk);
    }
    out
}

/// Trace of the reference over every sector of the truncated space.
fn reference_trace(a: f64, b: f64, m1: usize, m2: usize) -> f64 {
    let nn = a - 0.5;
    let kappa2 = (b - 0.5) / (a - 0.5);
    let ln_den = (1.0 / nn + 1.0 + kappa2).ln();
    let mut t = 0.0;
    for n1 in 0..=m1 {
        for n2 in 0..=m2 {
            let s = n1 + n2;
            t += (n2 as f64 * kappa2.ln() + ln_fact(s) - nn.ln() - (s as f64 + 1.0) * ln_den - ln_fact(n1) - ln_fact(n2)).exp();
        }
    }
    t
}

/// `(D, V)` in bits and bits² from the truncated sector blocks.
fn divergence(rho: &Sectors, sigma: &Sectors) -> (f64, f64) {
    let (mut d, mut second) = (0.0, 0.0);
    for (k, r) in &rho.blocks {
        let s = &sigma.blocks[k];
        let er = SymmetricEigen::new(r.clone());
        let es = SymmetricEigen::new(s.clone());
        let ln_s = &es.eigenvectors
            * DMatrix::from_diagonal(&es.eigenvalues.map(|x| x.max(1e-300).ln()))
            * es.eigenvectors.transpose();
        for i in 0..er.eigenvalues.len() {
            let p = er.eigenvalues[i];
            if p <= 1e-30 {
                continue;
            }
            let u = er.eigenvectors.column(i);
            let lu = &u * p.ln() - &ln_s * u;
            d += p * u.dot(&lu);
            second += p * lu.norm_squared();
        }
    }
    let ln2 = std::f64::consts::LN_2;
    (d / ln2, (second - d * d) / (ln2 * ln2))
}

/// Oracle `(D, V)` between `(id ⊗ N)(TMSV_μ)` and its separable reference,
/// with cutoffs grown until both truncated traces exceed `1 - 1e-10`.
pub fn oracle(p: &BosonicChannelParams, mu: f64) -> (f64, f64, usize) {
    let lam2 = (mu - 0.5) / (mu + 0.5);
    let mut m1 = ((1e-13f64).ln() / lam2.ln()).ceil() as usize + 1;
    let mut j_max = m1;
    let (x, y) = p.scale_and_noise();
    let (a, b) = (mu, x * x * mu + y);
    loop {
        let rho = channel_output(p, mu, m1, j_max);
        let ok_rho = rho.trace() >= 1.0 - 1e-10;
        let ok_sigma = reference_trace(a, b, m1, m1 + j_max) >= 1.0 - 1e-10;
        if ok_rho && ok_sigma {
            let sigma = reference(a, b, &rho);
            let (d, v) = divergence(&rho, &sigma);
            return (d, v, m1 + j_max);
        }
        m1 += m1 / 2;
        j_max += j_max / 2;
    }
}
