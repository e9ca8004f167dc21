//! Numerical tolerances shared by every module.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max elementwise deviation from Hermiticity.
    pub hermitian: f64,
    /// Most negative eigenvalue accepted for a PSD operator.
    pub min_eigenvalue: f64,
    /// Allowed deviation of the trace from 1 (or excess over 1 for subnormalized).
    pub trace: f64,
    /// Kraus completeness and unitarity checks.
    pub completeness: f64,
    /// Absolute eigenvalue cutoff used by matrix square roots and logs.
    pub eig_clamp: f64,
    /// Relative (to the largest eigenvalue) cutoff defining a support.
    pub support_rel: f64,
    /// Weight of rho on ker(sigma) beyond which a divergence is infinite.
    pub support_weight: f64,
    /// Group one-design and covariance checks.
    pub covariance: f64,
    /// Uncertainty relation and symplectic eigenvalue checks.
    pub symplectic: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-10,
        min_eigenvalue: -1e-10,
        trace: 1e-10,
        completeness: 1e-10,
        eig_clamp: 1e-12,
        support_rel: 1e-12,
        support_weight: 1e-10,
        covariance: 1e-9,
        symplectic: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub const TOL: Tolerances = Tolerances::DEFAULT;
