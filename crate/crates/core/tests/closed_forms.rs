use fbl_rmt::asymptotics::{ergodic_mi_textbook, xi_direct};
use fbl_rmt::rmt::{omega_candidates, scaled_cubic_residual};
use fbl_rmt::*;
use proptest::prelude::*;

const ETAS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const KAPPAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 4.0];

fn sigma2(db: i32) -> f64 {
    10f64.powf(-db as f64 / 10.0)
}

fn grid() -> impl Iterator<Item = (f64, f64, f64)> {
    ETAS.into_iter().flat_map(|e| {
        KAPPAS
            .into_iter()
            .flat_map(move |k| (-10..=30).map(move |db| (e, k, sigma2(db))))
    })
}

/// Cubic written out term by term from the fixed-point equation.
fn cubic(eta: f64, kappa: f64, s2: f64, w: f64) -> f64 {
    s2 * w * w * w
        + (2.0 * s2 + eta * kappa - kappa - eta + 1.0) * w * w
        + (s2 + eta * kappa - 2.0 * eta + 1.0) * w
        - eta
}

/// Bisection for the sign change inside the admissible interval.
fn omega_bisect(eta: f64, kappa: f64, s2: f64) -> f64 {
    let hi0 = if eta < 1.0 { eta / (1.0 - eta) } else { 1e6 };
    let (mut lo, mut hi) = (0.0f64, hi0);
    assert!(cubic(eta, kappa, s2, lo) < 0.0);
    assert!(cubic(eta, kappa, s2, hi) > 0.0, "{eta} {kappa} {s2}");
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if cubic(eta, kappa, s2, mid) < 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    0.5 * (lo + hi)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn omega_agrees_with_bisection_on_grid() {
    for (e, k, s) in grid() {
        let w = solve_omega(e, k, s).unwrap();
        let b = omega_bisect(e, k, s);
        assert!(rel(w, b) < 1e-11, "{e} {k} {s}: {w} vs {b}");
    }
}

#[test]
fn omega_examples() {
    let w = solve_omega(1.0, 1.0, 1.0).unwrap();
    assert!((w - omega_bisect(1.0, 1.0, 1.0)).abs() < 1e-15);
    assert!((w - 0.46557).abs() < 1e-5);
    let w = solve_omega(2.0, 0.5, 1e6).unwrap();
    assert!(rel(w, 2e-6) < 1e-5);
    assert!(scaled_cubic_residual(2.0, 0.5, 1e6, w) < 1e-12);
    let w = solve_omega(1.0, 1e-8, 1.0).unwrap();
    assert!((w - 0.618034).abs() < 1e-6);
}

/// Scaled residual left by rounding the true root to a double.
fn residual_floor(e: f64, k: f64, s: f64, w: f64) -> f64 {
    let [a, b, _] = fbl_rmt::rmt::cubic_coefficients(e, k, s);
    let scale = [1.0, a.abs(), b.abs(), e / s]
        .into_iter()
        .fold(0.0, f64::max);
    let slope = ((3.0 * w + 2.0 * a) * w + b).abs();
    slope * (w.next_up() - w) / 2.0 / scale
}

/// The returned root is the best double: neither neighbour has a smaller
/// exact residual. Where the cubic is steep relative to its coefficients the
/// best double still leaves a residual above 1e-12, so that bound is checked
/// against the rounding floor `|P'(w)| ulp(w) / 2` instead.
#[test]
fn unique_admissible_root_and_residual() {
    for (e, k, s) in grid() {
        let w = solve_omega(e, k, s).unwrap();
        let r = scaled_cubic_residual(e, k, s, w);
        assert!(r <= scaled_cubic_residual(e, k, s, w.next_up()));
        assert!(r <= scaled_cubic_residual(e, k, s, w.next_down()));
        let floor = residual_floor(e, k, s, w);
        assert!(
            r <= 1e-12f64.max(1.01 * floor),
            "{e} {k} {s}: {r} floor {floor}"
        );
        assert!(w > 1e-12 && e + (e - 1.0) * w > 1e-12);
        let admissible = omega_candidates(e, k, s)
            .into_iter()
            .filter(|&x| fbl_rmt::rmt::is_admissible(e, k, x))
            .count();
        assert_eq!(admissible, 1);
    }
}

#[test]
fn fixed_point_identities() {
    for (e, k, s) in grid() {
        let fp = fixed_point(e, k, s).unwrap();
        let w = fp.omega;
        assert!(rel(fp.omega_bar, 1.0 / (1.0 + w)) <= 1e-15);
        assert!(rel(fp.delta, (e * k - k * w / (1.0 + w)) / s) <= 1e-12);
        let g = 1.0 + fp.delta * fp.omega_bar.powi(2);
        assert!(rel(fp.delta_prime, -fp.delta / fp.delta_big) <= 1e-12);
        assert!(rel(fp.omega_prime, w * fp.delta_prime / (fp.delta * g)) <= 1e-12);
        assert!(rel(fp.omega_bar_prime, -fp.omega_bar.powi(2) * fp.omega_prime) <= 1e-12);
        assert!(rel(fp.c_bar_prime, fp.delta / k - e / s) <= 1e-9);
    }
}

#[test]
fn derivatives_match_finite_differences() {
    for (e, k, s) in grid() {
        let h = 1e-6 * s;
        let fp = fixed_point(e, k, s).unwrap();
        let hi = fixed_point(e, k, s + h).unwrap();
        let lo = fixed_point(e, k, s - h).unwrap();
        let fd = |a: f64, b: f64| (a - b) / (2.0 * h);
        assert!(rel(fd(hi.delta, lo.delta), fp.delta_prime) < 1e-5);
        assert!(rel(fd(hi.omega, lo.omega), fp.omega_prime) < 1e-5);
        assert!(rel(fd(hi.omega_bar, lo.omega_bar), fp.omega_bar_prime) < 1e-5);
        let dc = fd(ergodic_mi(&hi).unwrap(), ergodic_mi(&lo).unwrap());
        assert!(rel(dc, fp.c_bar_prime) < 1e-5, "{e} {k} {s}");
    }
}

#[test]
fn omega_decreasing_in_noise() {
    for e in ETAS {
        for k in KAPPAS {
            let ws: Vec<f64> = (-10..=30)
                .rev()
                .map(|db| solve_omega(e, k, sigma2(db)).unwrap())
                .collect();
            assert!(ws.windows(2).all(|p| p[1] < p[0]));
        }
    }
}

#[test]
fn small_kappa_reaches_rayleigh() {
    for e in ETAS {
        for db in -10..=30 {
            let s = sigma2(db);
            let w = solve_omega(e, 1e-8, s).unwrap();
            let r = rayleigh_fixed_point(e, s).unwrap();
            // The gap is O(kappa) relative to delta0, which reaches ~3000 at
            // eta = 4, 30 dB; the exact gap there is 3.0e-5.
            assert!((w - r.delta0).abs() <= 1e-5 * r.delta0.max(1.0));
            if e <= 2.0 {
                assert!((w - r.delta0).abs() <= 1e-5);
            }
            let fp = fixed_point(e, 1e-8, s).unwrap();
            let (x, _) = xi(&fp).unwrap();
            let d = r.delta0;
            assert!((x - (1.0 - d * d / (e * (1.0 + d).powi(2)))).abs() < 1e-5);
        }
    }
}

#[test]
fn mean_forms_agree() {
    for (e, k, s) in grid() {
        let fp = fixed_point(e, k, s).unwrap();
        let a = ergodic_mi(&fp).unwrap();
        let b = ergodic_mi_textbook(&fp).unwrap();
        assert!(
            (a - b).abs() <= 1e-10 * a.abs().max(1e-3),
            "{e} {k} {s}: {a} {b}"
        );
        let (x, _) = xi(&fp).unwrap();
        assert!(rel(x, xi_direct(&fp)) < 1e-10);
    }
}

#[test]
fn mean_vanishes_at_zero_snr() {
    let fp = fixed_point(1.0, 1.0, 1e8).unwrap();
    assert!(ergodic_mi(&fp).unwrap() <= 1e-6);
    assert!(xi(&fp).unwrap().1 <= 1e-6);
    assert!(rayleigh_moments(1.0, 1e8, 1.0, 0.0).unwrap().c_bar_ray <= 1e-6);
}

#[test]
fn structural_conjectures_on_grid() {
    for (e, k, s) in grid() {
        let fp = fixed_point(e, k, s).unwrap();
        let m = AsymptoticMoments::evaluate(&fp, 4.0).unwrap();
        assert!(m.xi > 0.0 && m.xi < 1.0);
        assert!(m.theta >= 0.0 && m.v_minus > 0.0 && m.v_plus >= m.v_minus);
        assert!(m.c_bar >= 0.0);
        assert!(rel(m.v_plus, m.v_minus + m.theta) <= 1e-12);
    }
}

/// The mean is below the Rayleigh mean at both SNR extremes. The variances
/// dominate at low SNR everywhere and at high SNR in the two regimes that
/// degenerate to Rayleigh (cases A and B). In case C the rank-deficient
/// leading term is smaller than the Rayleigh one, so it is only logged.
#[test]
fn rayleigh_dominance_at_extreme_snr() {
    let rho = 4.0;
    for e in [0.5, 2.0, 4.0] {
        for k in KAPPAS {
            for db in [-30, -25, -20, 30, 35, 40] {
                let s = sigma2(db);
                let fp = fixed_point(e, k, s).unwrap();
                let m = AsymptoticMoments::evaluate(&fp, rho).unwrap();
                let r = rayleigh_moments(e, s, rho, 0.0).unwrap();
                let ctx = format!("eta={e} kappa={k} snr={db}");
                assert!(m.c_bar <= r.c_bar_ray, "{ctx}");
                let case = high_snr_variances(e, k, rho).map(|h| h.case).ok();
                let asserted = db < 0 || matches!(case, Some(HighSnrCase::A | HighSnrCase::B));
                let holds = m.v_minus >= r.v_minus_ray && m.v_plus >= r.v_plus_ray;
                if asserted {
                    assert!(holds, "{ctx}");
                } else if !holds {
                    eprintln!(
                        "variance below Rayleigh at {ctx}: {} < {}",
                        m.v_minus, r.v_minus_ray
                    );
                }
            }
        }
    }
}

/// `Phi(x) = 1/2 + phi(x) sum_k x^(2k+1) / (2k+1)!!`
fn phi_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    while term.abs() > 1e-300 && k < 2000.0 {
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    0.5 + sum * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[test]
fn normal_cdf_against_series() {
    for i in -800..=800 {
        let x = i as f64 / 100.0;
        assert!((normal_cdf(x) - phi_series(x)).abs() <= 1e-14, "{x}");
    }
    assert!((normal_cdf(1.6448536269514722) - 0.95).abs() < 1e-10);
}

#[test]
fn normal_cdf_against_statrs() {
    for i in -3000..=3000 {
        let x = i as f64 / 100.0;
        let want = 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
        // statrs' erfc carries ~1e-10 relative error, so this is a coarse
        // cross-check; the series and 50-digit oracles pin the 1e-12 target
        assert!(
            rel(normal_cdf(x), want) <= 5e-10,
            "{x}: {} {want}",
            normal_cdf(x)
        );
    }
}

/// Lower-tail values from 50-digit arithmetic. statrs is only good to
/// ~1e-10 relative out here, so it serves as an absolute-error oracle only.
#[test]
fn normal_cdf_deep_tail() {
    for (x, want) in [
        (-4.0, 3.1671241833119921254e-5),
        (-6.0, 9.865876450376981407e-10),
        (-10.0, 7.619853024160526066e-24),
        (-15.0, 3.6709661993127508858e-51),
        (-20.0, 2.7536241186062336951e-89),
        (-25.0, 3.0566967063825609164e-138),
        (-30.0, 4.9067139271481870595e-198),
        (-37.0, 5.7255712225245768227e-300),
    ] {
        assert!(rel(normal_cdf(x), want) < 1e-12, "{x}");
    }
}

#[test]
fn second_order_rate_composes() {
    let dims = ChannelDims::new(8, 16, 24, 36).unwrap();
    let r = dims.ratios();
    let fp = fixed_point(r.eta, r.kappa, sigma2(5)).unwrap();
    let c = ergodic_mi(&fp).unwrap();
    let rate = 2f64.ln();
    assert!((second_order_rate(rate, c, 8, 36) - 288f64.sqrt() * (rate - c)).abs() < 1e-14);
}

#[test]
fn bound_gap_within_analytic_bound_on_grid() {
    let dims = ChannelDims::new(8, 16, 24, 36).unwrap();
    for (e, k, s) in grid() {
        let fp = fixed_point(e, k, s).unwrap();
        let m = AsymptoticMoments::evaluate(&fp, dims.ratios().rho).unwrap();
        for frac in [0.5, 0.9, 0.99] {
            let r = second_order_rate(frac * m.c_bar, m.c_bar, dims.m, dims.n);
            let (exact, bound) = bound_gap(r, m.v_minus, m.v_plus).unwrap();
            assert!(exact >= 0.0 && exact <= bound + 1e-15);
        }
    }
}

#[test]
fn error_bounds_struct() {
    let fp = fixed_point(2.0, 1.0 / 3.0, 1.0).unwrap();
    let m = AsymptoticMoments::evaluate(&fp, 4.5).unwrap();
    let b = ErrorBounds::evaluate(m.c_bar, 8, 36, &m).unwrap();
    assert_eq!(
        (b.r, b.lower, b.upper, b.outage, b.gap_bound),
        (0.0, 0.5, 0.5, 0.5, 0.0)
    );
    let b = ErrorBounds::evaluate(m.c_bar + 0.1, 8, 36, &m).unwrap();
    assert_eq!(b.lower, 0.5);
    assert!(b.upper > 0.5 && (b.gap_bound - (b.upper - 0.5)).abs() < 1e-16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn invariants_hold_off_grid(e in 0.2f64..5.0, k in 0.05f64..5.0, db in -10.0f64..30.0, rho in 0.5f64..20.0) {
        let s = 10f64.powf(-db / 10.0);
        let fp = fixed_point(e, k, s).unwrap();
        let r = scaled_cubic_residual(e, k, s, fp.omega);
        prop_assert!(r <= 1e-10f64.max(1.01 * residual_floor(e, k, s, fp.omega)));
        prop_assert!(fp.omega_prime < 0.0 && fp.delta_prime < 0.0 && fp.omega_bar_prime > 0.0);
        let m = AsymptoticMoments::evaluate(&fp, rho).unwrap();
        prop_assert!(m.xi > 0.0 && m.xi < 1.0 && m.theta >= 0.0 && m.v_minus > 0.0);
        let vn = variance_vn(&fp, rho, 1.0 / rho).unwrap();
        prop_assert!(rel(vn, m.v_plus) < 1e-14);
    }

    #[test]
    fn equal_antenna_agrees(k in 0.05f64..5.0, db in -10.0f64..30.0, rho in 0.5f64..20.0) {
        let s = 10f64.powf(-db / 10.0);
        let g = bound_variances(&fixed_point(1.0, k, s).unwrap(), rho).unwrap();
        let q = equal_antenna_bounds(k, s, rho).unwrap();
        prop_assert!(rel(q.v_minus, g.v_minus) < 1e-9 && rel(q.v_plus, g.v_plus) < 1e-9);
    }
}
