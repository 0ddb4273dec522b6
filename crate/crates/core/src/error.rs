use thiserror::Error;

/// Errors raised by the analysis, extraction and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite or out-of-domain input: {0}")]
    Domain(String),

    #[error("chart is singular here: {0}")]
    SingularChart(String),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("{branch} branch not admissible (alpha_bar = {alpha_bar:.3e} <= 0)")]
    NotAdmissible { branch: &'static str, alpha_bar: f64 },

    #[error("{branch} branch lost supercriticality (alpha01R + eps*K = {denominator:.3e} >= 0)")]
    SupercriticalityLost {
        branch: &'static str,
        denominator: f64,
    },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("linearization has no oscillatory pair: {0}")]
    NotInHopfRegime(String),

    #[error("degenerate eigenbasis: {0}")]
    DegenerateBasis(String),

    #[error("small divisor {divisor:.3e} for monomial ({i},{j}) in component {k}")]
    SmallDivisor {
        i: usize,
        j: usize,
        k: usize,
        divisor: f64,
    },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integration exceeded max_time = {0}")]
    MaxTimeExceeded(f64),

    #[error("Newton failed after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Poincare section is degenerate: {0}")]
    SectionDegenerate(String),

    #[error("no oscillation detected (amplitude {amplitude:.3e} below floor)")]
    NoOscillation { amplitude: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} has a non-finite component")))
    }
}
