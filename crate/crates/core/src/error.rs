use std::fmt;

/// Parameter context attached to numerical diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Context {
    pub eta: f64,
    pub kappa: f64,
    pub sigma2: f64,
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eta={}, kappa={}, sigma2={}",
            self.eta, self.kappa, self.sigma2
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no admissible root of the fixed-point cubic ({ctx}); real roots: {roots:?}")]
    NoAdmissibleRoot { ctx: Context, roots: Vec<f64> },

    #[error("multiple admissible roots of the fixed-point cubic ({ctx}): {roots:?}")]
    MultipleAdmissibleRoots { ctx: Context, roots: Vec<f64> },

    #[error("degenerate denominator delta*(1+delta*omega_bar^2) = {value:e} ({ctx})")]
    DegenerateDenominator { ctx: Context, value: f64 },

    #[error("non-positive logarithm argument {value:e} in {term} ({ctx})")]
    NonPositiveLogArgument {
        ctx: Context,
        term: &'static str,
        value: f64,
    },

    #[error("Xi = {xi} outside (0, 1) ({ctx})")]
    XiOutOfRange { ctx: Context, xi: f64 },

    #[error("non-positive variance {value:e} ({ctx}, rho={rho})")]
    NonPositiveVariance { ctx: Context, rho: f64, value: f64 },

    #[error("dual-formula mismatch in {quantity}: {a} vs {b} ({ctx})")]
    DualFormulaMismatch {
        ctx: Context,
        quantity: &'static str,
        a: f64,
        b: f64,
    },

    #[error("high-SNR expansion undefined on the edge eta=1, kappa=1 or eta*kappa=1 (eta={eta}, kappa={kappa})")]
    EdgeCaseUnsupported { eta: f64, kappa: f64 },

    #[error("no high-SNR case applies (eta={eta}, kappa={kappa})")]
    NoCaseApplies { eta: f64, kappa: f64 },

    #[error("invalid variance pair: v_minus={v_minus}, v_plus={v_plus}")]
    InvalidVariance { v_minus: f64, v_plus: f64 },

    #[error("Cholesky factorization failed: {0}")]
    FactorizationFailure(String),

    #[error("{failed} of {trials} Monte Carlo trials failed to factorize")]
    TooManyFailures { failed: usize, trials: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}
