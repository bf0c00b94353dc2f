//! Real roots of monic cubics `x^3 + a x^2 + b x + c`.

use std::f64::consts::PI;

/// Polynomial value and derivative at `x`.
#[inline]
pub fn eval(coeffs: [f64; 3], x: f64) -> (f64, f64) {
    let [a, b, c] = coeffs;
    let p = ((x + a) * x + b) * x + c;
    let dp = (3.0 * x + 2.0 * a) * x + b;
    (p, dp)
}

/// `|P(x)|` divided by the largest coefficient magnitude (the leading 1
/// included).
pub fn scaled_residual(coeffs: [f64; 3], x: f64) -> f64 {
    let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    eval(coeffs, x).0.abs() / scale
}

/// Newton iterations from `x0`, keeping the iterate with the smallest
/// residual.
pub fn polish(coeffs: [f64; 3], x0: f64) -> f64 {
    let mut x = x0;
    let (mut p, mut dp) = eval(coeffs, x);
    let mut best = (p.abs(), x);
    for _ in 0..60 {
        if p == 0.0 || dp == 0.0 || !dp.is_finite() {
            break;
        }
        let step = p / dp;
        x -= step;
        (p, dp) = eval(coeffs, x);
        if p.abs() < best.0 {
            best = (p.abs(), x);
        }
        if step.abs() <= 2.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    best.1
}

/// All distinct real roots, ascending, each Newton-polished.
///
/// The closed form seeds the roots: Cardano when the discriminant is
/// positive, the trigonometric form otherwise. A near-zero discriminant may
/// hide a real double root that the Cardano branch misses, so the real root
/// is also used to deflate to a quadratic whose roots are kept when its
/// discriminant is within rounding of zero.
pub fn real_roots(coeffs: [f64; 3]) -> Vec<f64> {
    let [a, b, c] = coeffs;
    let shift = a / 3.0;
    let p = b - a * shift;
    let q = (2.0 * shift * shift - b) * shift + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let mut seeds = Vec::with_capacity(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-q / 2.0 - q.signum() * s).cbrt();
        let t = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        let x1 = polish(coeffs, t - shift);
        seeds.push(x1);
        // deflate: x^2 + (a + x1) x + (b + x1 (a + x1))
        let qb = a + x1;
        let qc = b + x1 * qb;
        let qd = qb * qb - 4.0 * qc;
        let tol = 64.0 * f64::EPSILON * (qb * qb + 4.0 * qc.abs());
        if qd > -tol {
            let s = qd.max(0.0).sqrt();
            let r1 = -0.5 * (qb + qb.signum() * s);
            seeds.push(r1);
            if r1 != 0.0 {
                seeds.push(qc / r1);
            }
        }
    } else if p == 0.0 {
        seeds.push(-shift);
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (1.5 * q / p * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        for k in 0..3 {
            seeds.push(2.0 * r * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift);
        }
    }

    let mut roots: Vec<f64> = seeds
        .into_iter()
        .filter(|x| x.is_finite())
        .map(|x| polish(coeffs, x))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-300));
    roots
}
