use num_complex::Complex64;

use super::linalg::*;
use super::{apply_channel, maximally_entangled, DensityOperator};
use crate::config::TOL;
use crate::{Error, Result};

/// CPTP map in Kraus form, `N(X) = sum_x E_x X E_x^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<CMat>,
    in_dim: usize,
    out_dim: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMat>, in_dim: usize, out_dim: usize) -> Result<Self> {
        if kraus.is_empty() || in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidArgument("channel needs Kraus operators and positive dims".into()));
        }
        let mut sum = CMat::zeros(in_dim, in_dim);
        for k in &kraus {
            if k.nrows() != out_dim || k.ncols() != in_dim {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, expected {out_dim}x{in_dim}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            sum += k.adjoint() * k;
        }
        let dev = max_abs(&(sum - identity(in_dim)));
        if dev > TOL.completeness {
            return Err(Error::IncompleteKraus(dev));
        }
        Ok(Self { kraus, in_dim, out_dim })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![identity(d)], in_dim: d, out_dim: d }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        check_unitary(&u)?;
        let d = u.nrows();
        Ok(Self { kraus: vec![u], in_dim: d, out_dim: d })
    }

    /// Single-Kraus channel from an isometry `V: in -> out`.
    pub fn isometry(v: CMat) -> Result<Self> {
        let (o, i) = (v.nrows(), v.ncols());
        Self::new(vec![v], i, o)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Apply to a single-system operator given as a matrix.
    pub fn apply_mat(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Choi state `(id ⊗ N)(Phi)` with dims `[in, out]`.
    pub fn choi(&self) -> DensityOperator {
        let phi = maximally_entangled(self.in_dim).expect("positive dim");
        apply_channel(self, &phi, 1).expect("dims match")
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &QuantumChannel) -> Result<Self> {
        if after.in_dim != self.out_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {} -> {} with {} -> {}",
                self.in_dim, self.out_dim, after.in_dim, after.out_dim
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for b in &after.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Ok(Self { kraus, in_dim: self.in_dim, out_dim: after.out_dim })
    }

    pub fn tensor(&self, other: &QuantumChannel) -> Self {
        let mut kraus = Vec::new();
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        Self {
            kraus,
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
        }
    }

    /// Minimal Kraus set from the eigendecomposition of the Choi operator.
    pub fn canonical_kraus(&self) -> Vec<CMat> {
        let (din, dout) = (self.in_dim, self.out_dim);
        let choi = self.choi().into_matrix() * Complex64::new(din as f64, 0.0);
        let (vals, vecs) = eigh(&choi);
        let cut = support_cutoff(&vals);
        let mut out = Vec::new();
        for (k, &lam) in vals.iter().enumerate().rev() {
            if lam <= cut {
                continue;
            }
            let s = lam.sqrt();
            // Choi vector index is i*dout + o for |i>_in |o>_out.
            out.push(CMat::from_fn(dout, din, |o, i| vecs[(i * dout + o, k)] * s));
        }
        out
    }

    /// Minimal isometric extension `V: in -> out ⊗ env`.
    pub fn isometric_extension(&self) -> CMat {
        let ks = self.canonical_kraus();
        let e = ks.len();
        let mut v = CMat::zeros(self.out_dim * e, self.in_dim);
        for (x, k) in ks.iter().enumerate() {
            for o in 0..self.out_dim {
                for i in 0..self.in_dim {
                    v[(o * e + x, i)] = k[(o, i)];
                }
            }
        }
        v
    }

    /// Channel to the environment of the minimal isometric extension.
    pub fn complementary(&self) -> Self {
        let ks = self.canonical_kraus();
        let e = ks.len();
        let kraus = (0..self.out_dim)
            .map(|o| CMat::from_fn(e, self.in_dim, |x, i| ks[x][(o, i)]))
            .collect();
        Self { kraus, in_dim: self.in_dim, out_dim: e }
    }
}

/// Qubit Pauli group `{I, X, Y, Z}` (a projective unitary one-design).
pub fn pauli_group() -> Vec<CMat> {
    heisenberg_weyl(2)
}

/// Generalized Pauli operators `X^a Z^b`, `a, b < d`.
pub fn heisenberg_weyl(d: usize) -> Vec<CMat> {
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            out.push(CMat::from_fn(d, d, |r, col| {
                if r == (col + a) % d {
                    w.powu((b * col) as u32)
                } else {
                    ZERO
                }
            }));
        }
    }
    out
}

/// A channel with a group action on input and output under which it is covariant.
#[derive(Debug, Clone)]
pub struct CovariantChannelSpec {
    channel: QuantumChannel,
    group_in: Vec<CMat>,
    group_out: Vec<CMat>,
}

impl CovariantChannelSpec {
    /// Validates unitarity, the one-design property of the input
    /// representation, and covariance on every matrix unit.
    pub fn new(channel: QuantumChannel, group_in: Vec<CMat>, group_out: Vec<CMat>) -> Result<Self> {
        if group_in.is_empty() || group_in.len() != group_out.len() {
            return Err(Error::CovarianceViolation(format!(
                "group sizes {} (in) and {} (out) must match and be nonzero",
                group_in.len(),
                group_out.len()
            )));
        }
        let (din, dout) = (channel.in_dim(), channel.out_dim());
        for u in &group_in {
            if u.nrows() != din || u.ncols() != din {
                return Err(Error::DimensionMismatch("input group element has wrong size".into()));
            }
            check_unitary(u)?;
        }
        for v in &group_out {
            if v.nrows() != dout || v.ncols() != dout {
                return Err(Error::DimensionMismatch("output group element has wrong size".into()));
            }
            check_unitary(v)?;
        }
        let spec = Self { channel, group_in, group_out };
        let d1 = spec.one_design_residual();
        if d1 > TOL.covariance {
            return Err(Error::CovarianceViolation(format!(
                "input representation is not a one-design (residual {d1:e})"
            )));
        }
        let d2 = covariance_residual(&spec.channel, &spec.group_in, &spec.group_out);
        if d2 > TOL.covariance {
            return Err(Error::CovarianceViolation(format!(
                "channel is not covariant under the group (residual {d2:e})"
            )));
        }
        Ok(spec)
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn group_in(&self) -> &[CMat] {
        &self.group_in
    }

    pub fn group_out(&self) -> &[CMat] {
        &self.group_out
    }

    /// Max deviation of `(1/|G|) sum_g U X U^dagger` from `Tr X · I/d` over matrix units.
    pub fn one_design_residual(&self) -> f64 {
        let d = self.channel.in_dim();
        let g = self.group_in.len() as f64;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let x = matrix_unit(d, i, j);
                let mut avg = CMat::zeros(d, d);
                for u in &self.group_in {
                    avg += u * &x * u.adjoint();
                }
                avg /= Complex64::new(g, 0.0);
                let target = if i == j { identity(d) / Complex64::new(d as f64, 0.0) } else { CMat::zeros(d, d) };
                worst = worst.max(max_abs(&(avg - target)));
            }
        }
        worst
    }
}

/// Max over group elements and matrix units of `||N(U X U†) − V N(X) V†||`.
pub fn covariance_residual(ch: &QuantumChannel, group_in: &[CMat], group_out: &[CMat]) -> f64 {
    let d = ch.in_dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let x = matrix_unit(d, i, j);
            let nx = ch.apply_mat(&x);
            for (u, v) in group_in.iter().zip(group_out) {
                let lhs = ch.apply_mat(&(u * &x * u.adjoint()));
                let rhs = v * &nx * v.adjoint();
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
    }
    worst
}
