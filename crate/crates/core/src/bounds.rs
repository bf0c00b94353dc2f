//! Normal-approximation bounds on the optimal average error probability.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::asymptotics::AsymptoticMoments;
use crate::error::{Error, Result};

/// Standard normal CDF.
///
/// The tail is taken from `erfc` on the negative half-line and reflected, so
/// no digits are lost to `1 - small` in the lower tail and
/// `Phi(-x) + Phi(x) == 1` up to one rounding.
pub fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// `r = sqrt(M n) (R - C)`.
pub fn second_order_rate(rate: f64, c_bar: f64, m: usize, n: usize) -> f64 {
    ((m as f64) * (n as f64)).sqrt() * (rate - c_bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityBounds {
    pub lower: f64,
    pub upper: f64,
}

fn check_variances(v_minus: f64, v_plus: f64) -> Result<()> {
    if v_minus > 0.0 && v_plus >= v_minus && v_plus.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidVariance { v_minus, v_plus })
    }
}

fn prob(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// `upper = Phi(r / sqrt(V+))`; `lower = Phi(r / sqrt(V-))` for `r <= 0`
/// and `1/2` otherwise. The `O(n^{-1/2})` corrections are dropped.
pub fn error_prob_bounds(r: f64, v_minus: f64, v_plus: f64) -> Result<ProbabilityBounds> {
    check_variances(v_minus, v_plus)?;
    let upper = prob(normal_cdf(r / v_plus.sqrt()));
    let lower = if r <= 0.0 {
        prob(normal_cdf(r / v_minus.sqrt()))
    } else {
        0.5
    };
    Ok(ProbabilityBounds { lower, upper })
}

/// Infinite-blocklength limit `Phi(M (R - C) / sqrt(-ln Xi))`.
pub fn outage_probability(rate: f64, c_bar: f64, neg_log_xi: f64, m: usize) -> Result<f64> {
    if !(neg_log_xi > 0.0 && neg_log_xi.is_finite()) {
        return Err(Error::InvalidVariance {
            v_minus: neg_log_xi,
            v_plus: neg_log_xi,
        });
    }
    Ok(prob(normal_cdf(
        m as f64 * (rate - c_bar) / neg_log_xi.sqrt(),
    )))
}

/// Exact gap `Phi(r/sqrt(V+)) - Phi(r/sqrt(V-))` and its analytic upper
/// bound `-r (V+ - V-) / (sqrt(2 pi V+ V-) (sqrt(V+) + sqrt(V-)))`, for
/// `r <= 0`.
pub fn bound_gap(r: f64, v_minus: f64, v_plus: f64) -> Result<(f64, f64)> {
    check_variances(v_minus, v_plus)?;
    if !(r <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bound_gap needs r <= 0, got {r}"
        )));
    }
    let (sm, sp) = (v_minus.sqrt(), v_plus.sqrt());
    let exact = normal_cdf(r / sp) - normal_cdf(r / sm);
    let analytic = -r * (v_plus - v_minus) / ((2.0 * PI * v_plus * v_minus).sqrt() * (sp + sm));
    Ok((exact, analytic))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBounds {
    pub r: f64,
    pub lower: f64,
    pub upper: f64,
    pub outage: f64,
    /// Analytic gap bound for `r <= 0`; the exact gap `upper - lower`
    /// otherwise, where no analytic bound exists.
    pub gap_bound: f64,
}

impl ErrorBounds {
    pub fn evaluate(rate: f64, m: usize, n: usize, mom: &AsymptoticMoments) -> Result<Self> {
        let r = second_order_rate(rate, mom.c_bar, m, n);
        let pb = error_prob_bounds(r, mom.v_minus, mom.v_plus)?;
        let outage = outage_probability(rate, mom.c_bar, mom.neg_log_xi, m)?;
        let gap_bound = if r <= 0.0 {
            bound_gap(r, mom.v_minus, mom.v_plus)?.1
        } else {
            pb.upper - pb.lower
        };
        Ok(Self {
            r,
            lower: pb.lower,
            upper: pb.upper,
            outage,
            gap_bound,
        })
    }
}
