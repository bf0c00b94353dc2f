//! Deterministic equivalents of the Rayleigh-product resolvent.
//!
//! `omega` is the admissible root of a cubic in the noise power; `delta` and
//! the `sigma2`-derivatives follow in closed form.

use serde::Serialize;

use crate::cubic;
use crate::error::{require_positive, Context, Error, Result};

/// Slack used by every strict admissibility inequality.
pub const SLACK: f64 = 1e-12;

/// Coefficients `[a, b, c]` of the monic cubic `w^3 + a w^2 + b w + c`.
pub fn cubic_coefficients(eta: f64, kappa: f64, sigma2: f64) -> [f64; 3] {
    let a = (2.0 * sigma2 + eta * kappa - kappa - eta + 1.0) / sigma2;
    let b = 1.0 + (eta * kappa - 2.0 * eta + 1.0) / sigma2;
    let c = -eta / sigma2;
    [a, b, c]
}

/// Double-double value `hi + lo`, for error-free residual evaluation.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn from(x: f64) -> Self {
        Dd(x, 0.0)
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd(s, lo - (s - hi))
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.0 + o.0;
        let bb = s - self.0;
        let err = (self.0 - (s - bb)) + (o.0 - bb);
        Dd::norm(s, err + self.1 + o.1)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let err = self.0.mul_add(o.0, -p);
        Dd::norm(p, err + self.0 * o.1 + self.1 * o.0)
    }
}

/// Residual of the cubic at `omega` divided by its largest coefficient.
///
/// The cubic is evaluated multiplied through by `sigma2`, which leaves the
/// ratio unchanged and keeps every coefficient a sum of products of the
/// inputs. Sums and products are carried in double-double, so the result is
/// the residual of the exact cubic at this exact `omega`, not a rounding
/// artefact of evaluating it.
pub fn scaled_cubic_residual(eta: f64, kappa: f64, sigma2: f64, omega: f64) -> f64 {
    let (e, k, s, w) = (
        Dd::from(eta),
        Dd::from(kappa),
        Dd::from(sigma2),
        Dd::from(omega),
    );
    let one = Dd::from(1.0);
    let ek = e.mul(k);
    let neg = |x: Dd| Dd(-x.0, -x.1);
    // sigma2 w^3 + a2 w^2 + a1 w - eta
    let a2 = s.add(s).add(ek).add(neg(k)).add(neg(e)).add(one);
    let a1 = s.add(ek).add(neg(e.add(e))).add(one);
    let p = s.mul(w).add(a2).mul(w).add(a1).mul(w).add(neg(e));
    let scale = sigma2.max(a2.0.abs()).max(a1.0.abs()).max(eta);
    (p.0 + p.1).abs() / scale
}

/// Steps `omega` to the neighbouring double while that lowers the exact
/// residual, giving the correctly rounded root.
fn round_root(eta: f64, kappa: f64, sigma2: f64, omega: f64) -> f64 {
    let r = |w: f64| scaled_cubic_residual(eta, kappa, sigma2, w);
    let mut best = (r(omega), omega);
    for step in [f64::next_up, f64::next_down] {
        let mut w = omega;
        for _ in 0..64 {
            let nw = step(w);
            let nr = r(nw);
            if nr >= best.0 {
                break;
            }
            best = (nr, nw);
            w = nw;
        }
    }
    best.1
}

pub fn is_admissible(eta: f64, kappa: f64, omega: f64) -> bool {
    let base = omega > SLACK && eta + (eta - 1.0) * omega > SLACK;
    if eta == 1.0 {
        base && 1.0 + (1.0 - kappa) * omega > SLACK
    } else {
        base
    }
}

/// Every real root of the cubic, polished, admissible or not.
pub fn omega_candidates(eta: f64, kappa: f64, sigma2: f64) -> Vec<f64> {
    cubic::real_roots(cubic_coefficients(eta, kappa, sigma2))
}

fn check_inputs(eta: f64, kappa: f64, sigma2: f64) -> Result<()> {
    require_positive("eta", eta)?;
    require_positive("kappa", kappa)?;
    require_positive("sigma2", sigma2)
}

/// The unique admissible root, correctly rounded. Zero or several admissible
/// roots are reported as errors, never tie-broken.
pub fn solve_omega(eta: f64, kappa: f64, sigma2: f64) -> Result<f64> {
    check_inputs(eta, kappa, sigma2)?;
    let roots = omega_candidates(eta, kappa, sigma2);
    let ctx = Context { eta, kappa, sigma2 };
    let admissible: Vec<f64> = roots
        .iter()
        .copied()
        .filter(|&w| is_admissible(eta, kappa, w))
        .map(|w| round_root(eta, kappa, sigma2, w))
        .collect();
    match admissible.as_slice() {
        [w] => Ok(*w),
        [] => Err(Error::NoAdmissibleRoot { ctx, roots }),
        _ => Err(Error::MultipleAdmissibleRoots {
            ctx,
            roots: admissible,
        }),
    }
}

/// The deterministic-equivalent bundle at `(eta, kappa, sigma2)`.
///
/// Primes are derivatives with respect to `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub eta: f64,
    pub kappa: f64,
    pub sigma2: f64,
    pub omega: f64,
    pub delta: f64,
    pub omega_bar: f64,
    pub delta_big: f64,
    pub omega_prime: f64,
    pub delta_prime: f64,
    pub omega_bar_prime: f64,
    pub c_bar_prime: f64,
}

impl FixedPoint {
    pub fn new(eta: f64, kappa: f64, sigma2: f64) -> Result<Self> {
        let omega = solve_omega(eta, kappa, sigma2)?;
        Self::from_omega(eta, kappa, sigma2, omega)
    }

    /// Builds the bundle from an already solved root.
    pub fn from_omega(eta: f64, kappa: f64, sigma2: f64, omega: f64) -> Result<Self> {
        let ctx = Context { eta, kappa, sigma2 };
        let omega_bar = 1.0 / (1.0 + omega);
        let ww = omega * omega_bar;

        // delta = kappa (eta - w wbar) / sigma2 = kappa w / (1 - kappa w wbar).
        // Both are exact on the fixed point; take the one whose subtraction
        // loses fewer digits.
        let lose_a = eta / (eta - ww).abs();
        let lose_b = 1.0 / (1.0 - kappa * ww).abs();
        let delta = if lose_a <= lose_b {
            kappa * (eta - ww) / sigma2
        } else {
            kappa * omega / (1.0 - kappa * ww)
        };

        let denom = delta * (1.0 + delta * omega_bar * omega_bar);
        if !(denom.abs() >= 1e-300) || !denom.is_finite() {
            return Err(Error::DegenerateDenominator { ctx, value: denom });
        }
        let delta_big = sigma2 + kappa * omega * omega_bar * omega_bar / denom;
        let delta_prime = -delta / delta_big;
        let omega_prime = omega * delta_prime / denom;
        let omega_bar_prime = -omega_bar * omega_bar * omega_prime;
        // delta/kappa - eta/sigma2, without the subtraction
        let c_bar_prime = -ww / sigma2;

        Ok(Self {
            eta,
            kappa,
            sigma2,
            omega,
            delta,
            omega_bar,
            delta_big,
            omega_prime,
            delta_prime,
            omega_bar_prime,
            c_bar_prime,
        })
    }

    pub fn context(&self) -> Context {
        Context {
            eta: self.eta,
            kappa: self.kappa,
            sigma2: self.sigma2,
        }
    }

    /// `1 + delta * omega_bar^2`, a factor shared by most closed forms.
    #[inline]
    pub(crate) fn g(&self) -> f64 {
        1.0 + self.delta * self.omega_bar * self.omega_bar
    }
}

pub fn fixed_point(eta: f64, kappa: f64, sigma2: f64) -> Result<FixedPoint> {
    FixedPoint::new(eta, kappa, sigma2)
}

/// The `kappa -> 0` limit: `delta0` solves
/// `sigma2 d^2 + (sigma2 + 1 - eta) d - eta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighFixedPoint {
    pub eta: f64,
    pub sigma2: f64,
    pub delta0: f64,
    pub delta0_prime: f64,
}

pub fn rayleigh_fixed_point(eta: f64, sigma2: f64) -> Result<RayleighFixedPoint> {
    require_positive("eta", eta)?;
    require_positive("sigma2", sigma2)?;
    let b = sigma2 + 1.0 - eta;
    let s = (b * b + 4.0 * sigma2 * eta).sqrt();
    let delta0 = if b >= 0.0 {
        2.0 * eta / (b + s)
    } else {
        (s - b) / (2.0 * sigma2)
    };
    // implicit derivative; the denominator 2 sigma2 d + b equals s
    let delta0_prime = -(delta0 * delta0 + delta0) / s;
    Ok(RayleighFixedPoint {
        eta,
        sigma2,
        delta0,
        delta0_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn unit_point() {
        let fp = fixed_point(1.0, 1.0, 1.0).unwrap();
        assert!(rel(fp.omega, 0.465_571_231_876_768) < 1e-14);
        assert!(rel(fp.delta, 0.682_327_803_828_019_4) < 1e-14);
        assert!(rel(fp.delta, 1.0 - fp.omega / (1.0 + fp.omega)) < 1e-15);
    }

    #[test]
    fn low_snr_dominant_balance() {
        let w = solve_omega(2.0, 0.5, 1e6).unwrap();
        assert!(rel(w, 2e-6) < 1e-5);
        assert!(scaled_cubic_residual(2.0, 0.5, 1e6, w) < 1e-12);
    }

    #[test]
    fn small_kappa_golden_ratio() {
        let w = solve_omega(1.0, 1e-8, 1.0).unwrap();
        assert!((w - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-7);
    }

    #[test]
    fn rayleigh_root() {
        let r = rayleigh_fixed_point(1.0, 1.0).unwrap();
        assert!((r.delta0 - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let big = rayleigh_fixed_point(1.0, 1e9).unwrap();
        assert!(rel(big.delta0, 1e-9) < 1e-8);
        for &(eta, s2) in &[(0.5, 0.1), (2.0, 1.0), (4.0, 3.0), (1.0, 1e-3)] {
            let r = rayleigh_fixed_point(eta, s2).unwrap();
            let d = r.delta0;
            let res = s2 * d * d + (s2 + 1.0 - eta) * d - eta;
            assert!(res.abs() <= 1e-12 * eta);
        }
    }

    #[test]
    fn cubic_matches_quadratic_at_small_kappa() {
        let w = solve_omega(2.0, 1e-10, 1.0).unwrap();
        let r = rayleigh_fixed_point(2.0, 1.0).unwrap();
        assert!((w - r.delta0).abs() < 1e-6);
    }

    #[test]
    fn residual_is_exact_and_root_optimal() {
        // w^3 + 2w^2 + w - 1 at w = 1 is exactly 3
        assert_eq!(scaled_cubic_residual(1.0, 1.0, 1.0, 1.0), 1.5);
        for &(e, k, s) in &[
            (4.0, 0.1, 10f64.powf(-2.9)),
            (1.0, 1.0, 1.0),
            (0.5, 4.0, 0.1),
        ] {
            let w = solve_omega(e, k, s).unwrap();
            let r = scaled_cubic_residual(e, k, s, w);
            assert!(r <= scaled_cubic_residual(e, k, s, w.next_up()));
            assert!(r <= scaled_cubic_residual(e, k, s, w.next_down()));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            solve_omega(0.0, 1.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(solve_omega(1.0, f64::NAN, 1.0).is_err());
        assert!(rayleigh_fixed_point(1.0, -1.0).is_err());
    }

    #[test]
    fn fd_delta_prime() {
        let s2 = 10f64.powf(-0.5);
        let h = 1e-6 * s2;
        let fp = fixed_point(2.0, 0.5, s2).unwrap();
        let hi = fixed_point(2.0, 0.5, s2 + h).unwrap();
        let lo = fixed_point(2.0, 0.5, s2 - h).unwrap();
        let fd = (hi.delta - lo.delta) / (2.0 * h);
        assert!(rel(fd, fp.delta_prime) < 1e-5);
    }
}
