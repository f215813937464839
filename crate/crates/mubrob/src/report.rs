//! Serializable result types for robustness computations.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// parent-POVM certificate verified: eta is exact up to eigensolver noise
    Certificate,
    /// interior-point SDP value, exact up to the duality gap
    Sdp,
    /// only the analytic sandwich [lower, upper] is available
    BoundsOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateInfo {
    pub lambda: f64,
    /// slack of the dual scalar constraint (saturated by the ansatz)
    pub scalar_residual: f64,
    /// min eigenvalue over the dual tuple sums
    pub min_tuple_eigenvalue: f64,
    /// max per-entry marginal residual of the verified parent POVM
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent_marginal_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpInfo {
    pub iterations: usize,
    pub gap: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub gap_tol: f64,
    pub tie_tol: f64,
    pub parent_residual_tol: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdp_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    pub d: usize,
    pub k: usize,
    /// best point estimate of eta*; for bounds-only this is the upper bound
    pub eta: f64,
    pub method: Method,
    pub lower: f64,
    pub upper: f64,
    /// upper - lower
    pub gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdp: Option<SdpInfo>,
    pub tolerances: Tolerances,
    pub timings: Timings,
}
