use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The Kazdan–Warner hypotheses do not hold; no iteration was attempted.
    #[error("Kazdan-Warner problem not certified: {0}")]
    NotCertified(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        residual_trace: Vec<f64>,
    },

    #[error("exp(2f) overflow: max f = {max_f:.3e}")]
    Overflow { max_f: f64 },

    #[error("stability threshold violated: margin t - 4*pi*deg/V = {margin:.6e}")]
    BelowThreshold { margin: f64 },

    #[error("spinor lies in the U(1)_0 fixed-point set (a(u) vanishes identically)")]
    Unstable,

    #[error("projected spinor is not holomorphic: |dbar_A alpha| = {residual:.3e}")]
    HolomorphyFailure { residual: f64 },

    #[error("zero clusters cannot be separated at this grid resolution: {0}")]
    ZeroClusterAmbiguous(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
