//! Channel families and teleportation simulation of covariant channels.

use serde::{Deserialize, Serialize};

use crate::config::TOL;
use crate::qcore::linalg::*;
use crate::qcore::{
    heisenberg_weyl, maximally_entangled, CovariantChannelSpec, DensityOperator, QuantumChannel,
};
use crate::{Error, Result};

/// Parametrized channel; JSON form `{"kind":"dephasing","gamma":0.3}`.
/// Complex vectors are lists of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelFamily {
    Identity {
        #[serde(default = "qubit")]
        d: usize,
    },
    /// `ρ ↦ (1-γ)ρ + γ ZρZ`.
    Dephasing { gamma: f64 },
    /// Isometry `|x>_A ↦ |x>_B |ψ_x>_E`.
    GeneralizedDephasing { states: Vec<Vec<[f64; 2]>> },
    /// `ρ ↦ (1-p)ρ ⊕ p|e><e|`, output dimension `d + 1`.
    Erasure {
        p: f64,
        #[serde(default = "qubit")]
        d: usize,
    },
    /// Measure in the standard basis, prepare `|ψ_x>`.
    MeasurePrepare { states: Vec<Vec<[f64; 2]>> },
    /// `ρ ↦ (1-p)ρ + p I/d`.
    Depolarizing {
        p: f64,
        #[serde(default = "qubit")]
        d: usize,
    },
}

fn qubit() -> usize {
    2
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("{name} must lie in [0,1], got {x}")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    Ok(())
}

fn unit_vectors(states: &[Vec<[f64; 2]>]) -> Result<Vec<CVec>> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("need at least one state vector".into()));
    }
    let len = states[0].len();
    let mut out = Vec::with_capacity(states.len());
    for s in states {
        if s.len() != len || len == 0 {
            return Err(Error::InvalidArgument("state vectors must share a nonzero length".into()));
        }
        let v = CVec::from_iterator(len, s.iter().map(|z| c(z[0], z[1])));
        if (v.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("state vector has norm {}", v.norm())));
        }
        out.push(v);
    }
    Ok(out)
}

impl ChannelFamily {
    pub fn in_dim(&self) -> usize {
        match self {
            ChannelFamily::Identity { d } | ChannelFamily::Erasure { d, .. } | ChannelFamily::Depolarizing { d, .. } => *d,
            ChannelFamily::Dephasing { .. } => 2,
            ChannelFamily::GeneralizedDephasing { states } | ChannelFamily::MeasurePrepare { states } => states.len(),
        }
    }

    /// Short identifier used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            ChannelFamily::Identity { .. } => "identity",
            ChannelFamily::Dephasing { .. } => "dephasing",
            ChannelFamily::GeneralizedDephasing { .. } => "generalized-dephasing",
            ChannelFamily::Erasure { .. } => "erasure",
            ChannelFamily::MeasurePrepare { .. } => "measure-prepare",
            ChannelFamily::Depolarizing { .. } => "depolarizing",
        }
    }
}

/// Kraus representation of a channel family.
pub fn make_channel(spec: &ChannelFamily) -> Result<QuantumChannel> {
    match spec {
        ChannelFamily::Identity { d } => {
            check_dim(*d)?;
            Ok(QuantumChannel::identity(*d))
        }
        ChannelFamily::Dephasing { gamma } => {
            check_prob("gamma", *gamma)?;
            let z = real_diag(&[1.0, -1.0]);
            QuantumChannel::new(
                vec![identity(2) * c((1.0 - gamma).sqrt(), 0.0), z * c(gamma.sqrt(), 0.0)],
                2,
                2,
            )
        }
        ChannelFamily::GeneralizedDephasing { states } => {
            let psi = unit_vectors(states)?;
            let (d, de) = (psi.len(), psi[0].len());
            let kraus = (0..de)
                .map(|k| CMat::from_fn(d, d, |i, j| if i == j { psi[i][k] } else { ZERO }))
                .collect();
            QuantumChannel::new(kraus, d, d)
        }
        ChannelFamily::Erasure { p, d } => {
            check_prob("p", *p)?;
            check_dim(*d)?;
            let mut keep = CMat::zeros(d + 1, *d);
            for i in 0..*d {
                keep[(i, i)] = c((1.0 - p).sqrt(), 0.0);
            }
            let mut kraus = vec![keep];
            for i in 0..*d {
                let mut e = CMat::zeros(d + 1, *d);
                e[(*d, i)] = c(p.sqrt(), 0.0);
                kraus.push(e);
            }
            QuantumChannel::new(kraus, *d, d + 1)
        }
        ChannelFamily::MeasurePrepare { states } => {
            let psi = unit_vectors(states)?;
            let (d, dout) = (psi.len(), psi[0].len());
            let kraus = psi
                .iter()
                .enumerate()
                .map(|(x, v)| v * basis(d, x).adjoint())
                .collect();
            QuantumChannel::new(kraus, d, dout)
        }
        ChannelFamily::Depolarizing { p, d } => {
            check_prob("p", *p)?;
            if *d < 2 {
                return Err(Error::InvalidArgument("depolarizing channel needs d >= 2".into()));
            }
            let d2 = (d * d) as f64;
            let kraus = heisenberg_weyl(*d)
                .into_iter()
                .enumerate()
                .map(|(k, w)| {
                    let weight = if k == 0 { 1.0 - p + p / d2 } else { p / d2 };
                    w * c(weight.sqrt(), 0.0)
                })
                .collect();
            QuantumChannel::new(kraus, *d, *d)
        }
    }
}

/// Generalized-Pauli covariance of a family: the input group is
/// `{X^a Z^b}`; erasure extends each element by `⊕ 1` on the flag.
pub fn weyl_covariance(spec: &ChannelFamily) -> Result<CovariantChannelSpec> {
    let ch = make_channel(spec)?;
    let group_in = heisenberg_weyl(ch.in_dim());
    let group_out = match spec {
        ChannelFamily::Erasure { d, .. } => group_in
            .iter()
            .map(|u| {
                let mut v = CMat::zeros(d + 1, d + 1);
                v.view_mut((0, 0), (*d, *d)).copy_from(u);
                v[(*d, *d)] = ONE;
                v
            })
            .collect(),
        _ if ch.in_dim() == ch.out_dim() => group_in.clone(),
        _ => {
            return Err(Error::CovarianceViolation(format!(
                "no default output representation for {}",
                spec.name()
            )))
        }
    };
    CovariantChannelSpec::new(ch, group_in, group_out)
}

/// Teleportation simulation: Bell-type POVM `E^g = (|A|²/|G|)(U^g ⊗ I)Φ(U^g ⊗ I)†`
/// on the input and Alice's half of `ω_AB = N(Φ)`, then correction `V^g` on B.
pub fn teleport_simulate(ch: &QuantumChannel, covariance: &CovariantChannelSpec, input: &DensityOperator) -> Result<DensityOperator> {
    let d = ch.in_dim();
    let dout = ch.out_dim();
    if covariance.channel().in_dim() != d || covariance.channel().out_dim() != dout {
        return Err(Error::DimensionMismatch("channel and covariance spec differ in dimensions".into()));
    }
    let resid = crate::qcore::channel_covariance_residual(ch, covariance.group_in(), covariance.group_out());
    if resid > TOL.covariance {
        return Err(Error::CovarianceViolation(format!(
            "channel is not covariant under the supplied group (residual {resid:e})"
        )));
    }
    if input.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "input has dimension {}, channel expects {d}",
            input.dim()
        )));
    }
    let g = covariance.group_in().len();
    if d * d > g {
        return Err(Error::CovarianceViolation(format!("|A|^2 = {} exceeds |G| = {g}", d * d)));
    }
    let phi = maximally_entangled(d)?;
    let weight = c((d * d) as f64 / g as f64, 0.0);
    let povm: Vec<CMat> = covariance
        .group_in()
        .iter()
        .map(|u| {
            let ui = kron(u, &identity(d));
            &ui * phi.matrix() * ui.adjoint() * weight
        })
        .collect();
    let total = povm.iter().fold(CMat::zeros(d * d, d * d), |acc, e| acc + e);
    let dev = max_abs(&(total - identity(d * d)));
    if dev > TOL.covariance {
        return Err(Error::CovarianceViolation(format!("POVM does not sum to identity (deviation {dev:e})")));
    }

    let omega = ch.choi();
    let joint = kron(input.matrix(), omega.matrix());
    let dims = [d, d, dout];
    let mut out = CMat::zeros(dout, dout);
    for (e, v) in povm.iter().zip(covariance.group_out()) {
        let lifted = kron(e, &identity(dout));
        let post = partial_trace_mat(&(&lifted * &joint), &dims, &[2])?;
        out += v * post * v.adjoint();
    }
    Ok(DensityOperator::from_parts_unchecked(out, vec![dout], input.class()))
}

/// Result of the PPT test on a channel's Choi state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EbVerdict {
    pub entanglement_breaking: bool,
    /// False when PPT was found in dimensions where PPT does not imply separability.
    pub exact: bool,
    pub min_pt_eigenvalue: f64,
}

/// Entanglement-breaking test via positivity of the Choi state's partial transpose.
pub fn is_entanglement_breaking(ch: &QuantumChannel) -> EbVerdict {
    let choi = ch.choi();
    let min = choi.min_pt_eigenvalue(1).expect("bipartite Choi state");
    let ppt = min >= TOL.min_eigenvalue;
    EbVerdict {
        entanglement_breaking: ppt,
        exact: !ppt || ch.in_dim() * ch.out_dim() <= 6,
        min_pt_eigenvalue: min,
    }
}

/// Choi state of a family as a normalized state on `[in, out]`.
pub fn choi_state(spec: &ChannelFamily) -> Result<DensityOperator> {
    Ok(make_channel(spec)?.choi())
}
