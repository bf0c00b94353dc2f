//! Closed-form asymptotic moments of the mutual information density.

use serde::Serialize;

use crate::cubic;
use crate::error::{require_positive, Context, Error, Result};
use crate::rmt::{rayleigh_fixed_point, FixedPoint, SLACK};
use crate::VERIFY;

fn log_arg(ctx: Context, term: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositiveLogArgument { ctx, term, value })
    }
}

/// Ergodic mutual information per antenna in the form
///
/// `eta ln(1 + kappa w wbar / (sigma2 delta)) + ln(1 + delta wbar)/kappa
///  + ln(1 + w) - 2 w wbar`,
///
/// which stays accurate as `kappa -> 0`.
pub fn ergodic_mi_stable(fp: &FixedPoint) -> Result<f64> {
    let ctx = fp.context();
    let (w, wb, d) = (fp.omega, fp.omega_bar, fp.delta);
    let ww = w * wb;
    let a = log_arg(
        ctx,
        "1 + kappa*w*wbar/(sigma2*delta)",
        fp.kappa * ww / (fp.sigma2 * d),
    )?;
    let b = log_arg(ctx, "1 + delta*wbar", d * wb)?;
    let _ = log_arg(ctx, "1 + w", 1.0 + w)?;
    Ok(fp.eta * a.ln_1p() + b.ln_1p() / fp.kappa + w.ln_1p() - 2.0 * ww)
}

/// The textbook form of the ergodic mutual information, term by term.
/// Several terms scale like `1/kappa` and cancel, so it loses accuracy for
/// small `kappa`.
pub fn ergodic_mi_terms(fp: &FixedPoint) -> Result<[f64; 6]> {
    let ctx = fp.context();
    let (eta, kappa, s2, w) = (fp.eta, fp.kappa, fp.sigma2, fp.omega);
    let inner = log_arg(ctx, "1 - w/(eta(1+w))", 1.0 - w / (eta * (1.0 + w)))?;
    log_arg(ctx, "sigma2", s2)?;
    log_arg(ctx, "w", w)?;
    Ok([
        -s2.ln() / kappa,
        -(eta - 1.0 / kappa) * inner.ln(),
        w.ln_1p(),
        -w.ln() / kappa,
        -2.0 * w / (1.0 + w),
        eta.ln() / kappa,
    ])
}

pub fn ergodic_mi_textbook(fp: &FixedPoint) -> Result<f64> {
    Ok(ergodic_mi_terms(fp)?.iter().sum())
}

/// Ergodic mutual information `C(sigma2)` in nats per channel use per
/// antenna. Under verification both forms are evaluated and must agree.
pub fn ergodic_mi(fp: &FixedPoint) -> Result<f64> {
    let c = ergodic_mi_stable(fp)?;
    if VERIFY {
        check_ergodic_forms(fp, c)?;
    }
    Ok(c)
}

/// Compares the two forms of the ergodic MI. The tolerance is `1e-10`
/// relative plus the rounding error of the textbook sum.
pub fn check_ergodic_forms(fp: &FixedPoint, stable: f64) -> Result<()> {
    let terms = ergodic_mi_terms(fp)?;
    let textbook: f64 = terms.iter().sum();
    let magnitude: f64 = terms.iter().map(|t| t.abs()).sum();
    let tol = 1e-10 * stable.abs().max(textbook.abs()) + 256.0 * f64::EPSILON * magnitude;
    if (stable - textbook).abs() > tol {
        return Err(Error::DualFormulaMismatch {
            ctx: fp.context(),
            quantity: "ergodic_mi",
            a: stable,
            b: textbook,
        });
    }
    Ok(())
}

/// `Xi` and `-ln Xi`.
///
/// `1 - Xi = w wbar^2 (eta delta + w + delta wbar) / (eta (1 + delta wbar))`
/// is positive term by term, so `Xi < 1` always holds on an admissible fixed
/// point; the range check guards against breakdown upstream.
pub fn xi(fp: &FixedPoint) -> Result<(f64, f64)> {
    let (w, wb, d, eta) = (fp.omega, fp.omega_bar, fp.delta, fp.eta);
    let one_minus = w * wb * wb * (eta * d + w + d * wb) / (eta * (1.0 + d * wb));
    let xi = 1.0 - one_minus;
    if !(one_minus > 0.0 && one_minus < 1.0) {
        return Err(Error::XiOutOfRange {
            ctx: fp.context(),
            xi,
        });
    }
    Ok((xi, -(-one_minus).ln_1p()))
}

/// `Xi = (1 + delta wbar^2) delta Delta / (eta kappa (1 + delta wbar))`
/// evaluated as written.
pub fn xi_direct(fp: &FixedPoint) -> f64 {
    fp.g() * fp.delta * fp.delta_big / (fp.eta * fp.kappa * (1.0 + fp.delta * fp.omega_bar))
}

/// `eta + sigma2^2 delta' / kappa`, rearranged to avoid the cancellation
/// between its two terms at low SNR.
pub fn mean_term(fp: &FixedPoint) -> f64 {
    let (w, wb, d) = (fp.omega, fp.omega_bar, fp.delta);
    (fp.eta * fp.kappa * w * wb * wb / (d * fp.g()) + fp.sigma2 * w * wb) / fp.delta_big
}

/// Coefficient of `rho Tr(A^2)/M` in the variance; the gap `V+ - V-`.
pub fn theta(fp: &FixedPoint) -> f64 {
    let (w, wb, d) = (fp.omega, fp.omega_bar, fp.delta);
    let g = fp.g();
    let wb4 = (wb * wb) * (wb * wb);
    fp.kappa * wb4 * (w * w * (1.0 + d * wb) / g - w * fp.omega_prime / (d * g))
}

fn positive_variance(fp: &FixedPoint, rho: f64, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositiveVariance {
            ctx: fp.context(),
            rho,
            value,
        })
    }
}

/// MID variance `V_n` for a codebook with the given `Tr(A^2)/M`.
pub fn variance_vn(fp: &FixedPoint, rho: f64, tr_a2_over_m: f64) -> Result<f64> {
    require_positive("rho", rho)?;
    if !(tr_a2_over_m >= 0.0 && tr_a2_over_m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Tr(A^2)/M must be non-negative, got {tr_a2_over_m}"
        )));
    }
    let (_, nlx) = xi(fp)?;
    let v = rho * nlx + mean_term(fp) + rho * theta(fp) * tr_a2_over_m;
    positive_variance(fp, rho, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundVariances {
    pub v_minus: f64,
    pub v_plus: f64,
    pub theta: f64,
}

/// `V-` (`Tr(A^2) = 0`) and `V+` (`Tr(A^2)/M = 1/rho`).
pub fn bound_variances(fp: &FixedPoint, rho: f64) -> Result<BoundVariances> {
    require_positive("rho", rho)?;
    let (_, nlx) = xi(fp)?;
    let v_minus = positive_variance(fp, rho, rho * nlx + mean_term(fp))?;
    let th = theta(fp);
    if !(th >= 0.0) {
        return Err(Error::NonPositiveVariance {
            ctx: fp.context(),
            rho,
            value: th,
        });
    }
    let out = BoundVariances {
        v_minus,
        v_plus: v_minus + th,
        theta: th,
    };
    if VERIFY && fp.eta == 1.0 {
        let eq = equal_antenna_bounds(fp.kappa, fp.sigma2, rho)?;
        for (name, a, b) in [
            ("v_minus", out.v_minus, eq.v_minus),
            ("v_plus", out.v_plus, eq.v_plus),
        ] {
            if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
                return Err(Error::DualFormulaMismatch {
                    ctx: fp.context(),
                    quantity: name,
                    a,
                    b,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticMoments {
    pub c_bar: f64,
    pub xi: f64,
    pub neg_log_xi: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub theta: f64,
}

impl AsymptoticMoments {
    pub fn evaluate(fp: &FixedPoint, rho: f64) -> Result<Self> {
        let c_bar = ergodic_mi(fp)?;
        let (xi, neg_log_xi) = xi(fp)?;
        let bv = bound_variances(fp, rho)?;
        Ok(Self {
            c_bar,
            xi,
            neg_log_xi,
            v_minus: bv.v_minus,
            v_plus: bv.v_plus,
            theta: bv.theta,
        })
    }

    /// `V_n` for an arbitrary `Tr(A^2)/M`.
    pub fn v_n(&self, rho: f64, tr_a2_over_m: f64) -> f64 {
        self.v_minus + rho * self.theta * tr_a2_over_m
    }
}

/// Root of `w^3 + 2w^2 + (1 + (kappa-1)/z) w - 1/z` with `w > 0` and
/// `1 + (1-kappa) w > 0`.
fn equal_antenna_omega(kappa: f64, z: f64) -> Result<f64> {
    let coeffs = [2.0, 1.0 + (kappa - 1.0) / z, -1.0 / z];
    let roots = cubic::real_roots(coeffs);
    let ok: Vec<f64> = roots
        .iter()
        .copied()
        .filter(|&w| w > SLACK && 1.0 + (1.0 - kappa) * w > SLACK)
        .collect();
    let ctx = Context {
        eta: 1.0,
        kappa,
        sigma2: z,
    };
    match ok.as_slice() {
        [w] => Ok(*w),
        [] => Err(Error::NoAdmissibleRoot { ctx, roots }),
        _ => Err(Error::MultipleAdmissibleRoots { ctx, roots: ok }),
    }
}

/// `V-` and `V+` for `N = M`, from the specialised closed forms `W`, `X`
/// and `Y`: `V- = rho W + 1 + X`, `V+ = V- + Y`.
pub fn equal_antenna_bounds(kappa: f64, sigma2: f64, rho: f64) -> Result<BoundVariances> {
    require_positive("kappa", kappa)?;
    require_positive("sigma2", sigma2)?;
    require_positive("rho", rho)?;
    let z = sigma2;
    let w = equal_antenna_omega(kappa, z)?;
    let p1 = 1.0 + w;
    let den = 1.0 + 2.0 * z * w * w * w + 2.0 * z * w * w;
    let big_w = (p1 * p1 / den).ln();
    let big_x = -(1.0 + z * w * w * p1) / (p1 * den);
    let zp = z * p1 * p1;
    let a = (1.0 - kappa) * w;
    let first = w * w * (zp + w + 1.0 + kappa) / (zp + a + 1.0 + kappa);
    let q = (1.0 - kappa) * w * w + 2.0 * w + 1.0;
    let second = (1.0 + a).powi(4) * big_x / (kappa * z * z * q * q);
    let big_y = kappa / p1.powi(4) * (first - second);

    let v_minus = rho * big_w + 1.0 + big_x;
    Ok(BoundVariances {
        v_minus,
        v_plus: v_minus + big_y,
        theta: big_y,
    })
}

/// Rayleigh-channel (`kappa -> 0`) counterparts of the moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighMoments {
    pub delta0: f64,
    pub c_bar_ray: f64,
    pub neg_log_xi_ray: f64,
    pub v_n_ray: f64,
    pub v_minus_ray: f64,
    pub v_plus_ray: f64,
}

pub fn rayleigh_moments(
    eta: f64,
    sigma2: f64,
    rho: f64,
    tr_a2_over_m: f64,
) -> Result<RayleighMoments> {
    require_positive("rho", rho)?;
    let rf = rayleigh_fixed_point(eta, sigma2)?;
    let d = rf.delta0;
    let db = 1.0 / (1.0 + d);
    let c_bar_ray = eta * (db / sigma2).ln_1p() + d.ln_1p() - d * db;
    let neg_log_xi_ray = -(-(d * d * db * db) / eta).ln_1p();
    // eta + sigma2^2 delta0', rearranged
    let mean = (eta * db * db + sigma2 * d * db) / (sigma2 + db * db);
    let th = -rf.delta0_prime * (db * db) * (db * db);
    let v_minus_ray = rho * neg_log_xi_ray + mean;
    Ok(RayleighMoments {
        delta0: d,
        c_bar_ray,
        neg_log_xi_ray,
        v_n_ray: v_minus_ray + rho * th * tr_a2_over_m,
        v_minus_ray,
        v_plus_ray: v_minus_ray + th,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HighSnrCase {
    /// `kappa < 1` and `eta > 1`
    A,
    /// `eta < 1` and `eta kappa < 1`
    B,
    /// `kappa > 1, eta > 1` or `eta kappa > 1, eta < 1`
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighSnrVariances {
    pub v_minus: f64,
    pub v_plus: f64,
    pub case: HighSnrCase,
}

/// `sigma2`-free leading terms of `V-` and `V+` as `sigma2 -> 0`.
pub fn high_snr_variances(eta: f64, kappa: f64, rho: f64) -> Result<HighSnrVariances> {
    require_positive("eta", eta)?;
    require_positive("kappa", kappa)?;
    require_positive("rho", rho)?;
    let ek = eta * kappa;
    // Branch boundaries. eta*kappa = 1 with eta > 1 lies inside case A, whose
    // leading terms do not involve eta*kappa.
    let on_edge = (eta - 1.0).abs() <= SLACK
        || ((kappa - 1.0).abs() <= SLACK && eta > 1.0)
        || ((ek - 1.0).abs() <= SLACK && eta < 1.0);
    if on_edge {
        return Err(Error::EdgeCaseUnsupported { eta, kappa });
    }
    let (case, v_minus, v_plus) = if kappa < 1.0 && eta > 1.0 {
        let v = -rho * ((1.0 - kappa) * (1.0 - 1.0 / eta)).ln() + 1.0;
        (HighSnrCase::A, v, v)
    } else if eta < 1.0 && ek < 1.0 {
        let l = -rho * ((1.0 - eta) * (1.0 - ek)).ln();
        (HighSnrCase::B, l + eta, l + eta * (2.0 - eta))
    } else if (kappa > 1.0 && eta > 1.0) || (ek > 1.0 && eta < 1.0) {
        let v = -rho * ((1.0 - 1.0 / kappa) * (1.0 - 1.0 / ek)).ln() + 1.0 / kappa;
        (HighSnrCase::C, v, v + (kappa - 1.0) / (kappa * kappa))
    } else {
        return Err(Error::NoCaseApplies { eta, kappa });
    };
    Ok(HighSnrVariances {
        v_minus,
        v_plus,
        case,
    })
}

/// Leading low-SNR term `2 (1 + eta kappa) eta / sigma2`, returned for both
/// `V-` and `V+`.
pub fn low_snr_variances(eta: f64, kappa: f64, sigma2: f64) -> Result<(f64, f64)> {
    require_positive("eta", eta)?;
    require_positive("kappa", kappa)?;
    require_positive("sigma2", sigma2)?;
    let v = 2.0 * (1.0 + eta * kappa) * eta / sigma2;
    Ok((v, v))
}
