//! Closed-form finite-blocklength analysis of MIMO Rayleigh-product channels.
//!
//! The crate computes the deterministic equivalents of the Rayleigh-product
//! resolvent (a cubic fixed point), the asymptotic mean and variance of the
//! mutual information density (MID), and the normal-approximation bounds on
//! the optimal average packet error probability built from them. Every closed
//! form has a Monte Carlo counterpart in [`mc`] that samples channels,
//! sphere-constrained codebooks and noise and measures the same quantities.
//!
//! Rates are in nats per channel use per transmit antenna and the SNR is
//! `1/sigma2` throughout.
//!
//! ```
//! use fbl_rmt::{AsymptoticMoments, ChannelDims, FixedPoint, NoiseLevel};
//!
//! let dims = ChannelDims::new(16, 32, 64, 64).unwrap();
//! let ratios = dims.ratios();
//! let noise = NoiseLevel::from_snr_db(5.0).unwrap();
//! let fp = FixedPoint::new(ratios.eta, ratios.kappa, noise.sigma2).unwrap();
//! let moments = AsymptoticMoments::evaluate(&fp, ratios.rho).unwrap();
//! assert!(moments.v_plus >= moments.v_minus);
//! ```

pub mod asymptotics;
pub mod bounds;
pub mod cubic;
mod error;
pub mod mc;
pub mod params;
pub mod rmt;

pub use asymptotics::{
    bound_variances, equal_antenna_bounds, ergodic_mi, high_snr_variances, low_snr_variances,
    rayleigh_moments, variance_vn, xi, AsymptoticMoments, BoundVariances, HighSnrCase,
    HighSnrVariances, RayleighMoments,
};
pub use bounds::{
    bound_gap, error_prob_bounds, normal_cdf, outage_probability, second_order_rate, ErrorBounds,
    ProbabilityBounds,
};
pub use error::{Context, Error, Result};
pub use params::{ChannelDims, NoiseLevel, Ratios};
pub use rmt::{fixed_point, rayleigh_fixed_point, solve_omega, FixedPoint, RayleighFixedPoint};

/// Dual-formula self-checks run in debug builds, or always with the `verify`
/// feature.
pub(crate) const VERIFY: bool = cfg!(any(debug_assertions, feature = "verify"));
