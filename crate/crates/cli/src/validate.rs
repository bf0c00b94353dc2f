//! Built-in consistency checks behind `validate`.
//!
//! Every closed form is reached through [`ClosedForms`], so a perturbed
//! implementation can be run through the same checks.

use fbl_rmt::asymptotics::{ergodic_mi_textbook, xi_direct};
use fbl_rmt::mc::{self, ChannelKind};
use fbl_rmt::rmt::{is_admissible, omega_candidates, scaled_cubic_residual};
use fbl_rmt::{
    AsymptoticMoments, BoundVariances, ChannelDims, FixedPoint, HighSnrCase, HighSnrVariances,
    RayleighMoments, Result,
};

use crate::output::{Cell, Table};
use crate::scenario::DEFAULT_SEED;

pub trait ClosedForms: Sync {
    fn fixed_point(&self, eta: f64, kappa: f64, sigma2: f64) -> Result<FixedPoint>;
    fn moments(&self, fp: &FixedPoint, rho: f64) -> Result<AsymptoticMoments>;
    fn equal_antenna(&self, kappa: f64, sigma2: f64, rho: f64) -> Result<BoundVariances>;
    fn rayleigh(&self, eta: f64, sigma2: f64, rho: f64) -> Result<RayleighMoments>;
    fn high_snr(&self, eta: f64, kappa: f64, rho: f64) -> Result<HighSnrVariances>;
    fn low_snr(&self, eta: f64, kappa: f64, sigma2: f64) -> Result<(f64, f64)>;
    fn normal_cdf(&self, x: f64) -> f64;
}

/// The library implementation.
pub struct Library;

impl ClosedForms for Library {
    fn fixed_point(&self, eta: f64, kappa: f64, sigma2: f64) -> Result<FixedPoint> {
        fbl_rmt::fixed_point(eta, kappa, sigma2)
    }
    fn moments(&self, fp: &FixedPoint, rho: f64) -> Result<AsymptoticMoments> {
        AsymptoticMoments::evaluate(fp, rho)
    }
    fn equal_antenna(&self, kappa: f64, sigma2: f64, rho: f64) -> Result<BoundVariances> {
        fbl_rmt::equal_antenna_bounds(kappa, sigma2, rho)
    }
    fn rayleigh(&self, eta: f64, sigma2: f64, rho: f64) -> Result<RayleighMoments> {
        fbl_rmt::rayleigh_moments(eta, sigma2, rho, 0.0)
    }
    fn high_snr(&self, eta: f64, kappa: f64, rho: f64) -> Result<HighSnrVariances> {
        fbl_rmt::high_snr_variances(eta, kappa, rho)
    }
    fn low_snr(&self, eta: f64, kappa: f64, sigma2: f64) -> Result<(f64, f64)> {
        fbl_rmt::low_snr_variances(eta, kappa, sigma2)
    }
    fn normal_cdf(&self, x: f64) -> f64 {
        fbl_rmt::normal_cdf(x)
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub points: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Accumulates the worst error over a check's points; the first violation
/// or computation error becomes the detail.
struct Tracker {
    name: &'static str,
    tolerance: f64,
    points: usize,
    worst: f64,
    failure: Option<String>,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            points: 0,
            worst: 0.0,
            failure: None,
        }
    }

    fn fail(&mut self, msg: String) {
        if self.failure.is_none() {
            self.failure = Some(msg);
        }
    }

    /// Records `err` against this check's tolerance.
    fn err(&mut self, ctx: impl FnOnce() -> String, err: f64) {
        self.points += 1;
        if err.is_nan() || err > self.worst {
            self.worst = if err.is_nan() { f64::NAN } else { err };
        }
        if !(err <= self.tolerance) {
            self.fail(format!("{}: error {err:.3e}", ctx()));
        }
    }

    fn rel(&mut self, ctx: impl FnOnce() -> String, a: f64, b: f64) {
        self.err(ctx, (a - b).abs() / b.abs());
    }

    fn holds(&mut self, ctx: impl FnOnce() -> String, ok: bool) {
        self.points += 1;
        if !ok {
            self.fail(ctx());
        }
    }

    fn ok<T>(&mut self, ctx: impl FnOnce() -> String, r: Result<T>) -> Option<T> {
        r.map_err(|e| self.fail(format!("{}: {e}", ctx()))).ok()
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            pass: self.failure.is_none(),
            points: self.points,
            worst: self.worst,
            tolerance: self.tolerance,
            detail: self.failure.unwrap_or_default(),
        }
    }
}

const ETAS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const KAPPAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 4.0];
const RHO: f64 = 4.0;

fn sigma2(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

fn snr_grid(fast: bool) -> Vec<f64> {
    let step = if fast { 5 } else { 1 };
    (-10..=30).step_by(step).map(f64::from).collect()
}

fn at(eta: f64, kappa: f64, db: f64) -> String {
    format!("eta={eta} kappa={kappa} snr_db={db}")
}

fn cubic_roots(cf: &dyn ClosedForms, snr: &[f64]) -> CheckResult {
    let mut t = Tracker::new("cubic_root", 1e-10);
    for e in ETAS {
        for k in KAPPAS {
            for &db in snr {
                let s = sigma2(db);
                let Some(fp) = t.ok(|| at(e, k, db), cf.fixed_point(e, k, s)) else {
                    continue;
                };
                t.err(|| at(e, k, db), scaled_cubic_residual(e, k, s, fp.omega));
                let n = omega_candidates(e, k, s)
                    .into_iter()
                    .filter(|&w| is_admissible(e, k, w))
                    .count();
                t.holds(|| format!("{}: {n} admissible roots", at(e, k, db)), n == 1);
            }
        }
    }
    t.finish()
}

fn identities(cf: &dyn ClosedForms, snr: &[f64]) -> CheckResult {
    let mut t = Tracker::new("fixed_point_identities", 1e-12);
    for e in ETAS {
        for k in KAPPAS {
            for &db in snr {
                let s = sigma2(db);
                let Some(fp) = t.ok(|| at(e, k, db), cf.fixed_point(e, k, s)) else {
                    continue;
                };
                let w = fp.omega;
                let g = 1.0 + fp.delta * fp.omega_bar * fp.omega_bar;
                let c = || at(e, k, db);
                t.rel(c, fp.omega_bar, 1.0 / (1.0 + w));
                t.rel(c, fp.delta, (e * k - k * w / (1.0 + w)) / s);
                t.rel(c, fp.delta_prime, -fp.delta / fp.delta_big);
                t.rel(c, fp.omega_prime, w * fp.delta_prime / (fp.delta * g));
                t.rel(
                    c,
                    fp.omega_bar_prime,
                    -fp.omega_bar * fp.omega_bar * fp.omega_prime,
                );
                // two large terms cancel; measured against their size
                let scale = fp.delta / k + e / s;
                t.err(c, (fp.c_bar_prime - (fp.delta / k - e / s)).abs() / scale);
            }
        }
    }
    t.finish()
}

fn derivatives(cf: &dyn ClosedForms, snr: &[f64]) -> CheckResult {
    let mut t = Tracker::new("derivatives_fd", 1e-5);
    for e in ETAS {
        for k in KAPPAS {
            for &db in snr {
                let s = sigma2(db);
                let h = 1e-6 * s;
                let c = || at(e, k, db);
                let (Some(fp), Some(hi), Some(lo)) = (
                    t.ok(c, cf.fixed_point(e, k, s)),
                    t.ok(c, cf.fixed_point(e, k, s + h)),
                    t.ok(c, cf.fixed_point(e, k, s - h)),
                ) else {
                    continue;
                };
                let (Some(mh), Some(ml)) =
                    (t.ok(c, cf.moments(&hi, RHO)), t.ok(c, cf.moments(&lo, RHO)))
                else {
                    continue;
                };
                let fd = |a: f64, b: f64| (a - b) / (2.0 * h);
                t.rel(c, fd(hi.delta, lo.delta), fp.delta_prime);
                t.rel(c, fd(hi.omega, lo.omega), fp.omega_prime);
                t.rel(c, fd(hi.omega_bar, lo.omega_bar), fp.omega_bar_prime);
                t.rel(c, fd(mh.c_bar, ml.c_bar), fp.c_bar_prime);
            }
        }
    }
    t.finish()
}

/// Internal consistency of the moment bundle and agreement of the
/// alternative closed forms for C and Xi.
fn dual_forms(cf: &dyn ClosedForms, snr: &[f64]) -> CheckResult {
    let mut t = Tracker::new("dual_forms", 1e-9);
    for e in ETAS {
        for k in KAPPAS {
            for &db in snr {
                let c = || at(e, k, db);
                let Some(fp) = t.ok(c, cf.fixed_point(e, k, sigma2(db))) else {
                    continue;
                };
                let Some(m) = t.ok(c, cf.moments(&fp, RHO)) else {
                    continue;
                };
                if let Some(tb) = t.ok(c, ergodic_mi_textbook(&fp)) {
                    t.err(c, (m.c_bar - tb).abs() / tb.abs().max(1.0));
                }
                t.rel(c, m.xi, xi_direct(&fp));
                t.rel(c, m.neg_log_xi, -m.xi.ln());
                t.rel(c, m.v_plus, m.v_minus + m.theta);
            }
        }
    }
    t.finish()
}

fn conjectures(cf: &dyn ClosedForms, snr: &[f64]) -> CheckResult {
    let mut t = Tracker::new("structural_conjectures", 0.0);
    for e in ETAS {
        for k in KAPPAS {
            for &db in snr {
                let c = || at(e, k, db);
                let Some(fp) = t.ok(c, cf.fixed_point(e, k, sigma2(db))) else {
                    continue;
                };
                let Some(m) = t.ok(c, cf.moments(&fp, RHO)) else {
                    continue;
                };
                t.holds(
                    || {
                        format!(
                            "{}: xi={} theta={} v_minus={}",
                            at(e, k, db),
                            m.xi,
                            m.theta,
                            m.v_minus
                        )
                    },
                    m.xi > 0.0 && m.xi < 1.0 && m.theta >= 0.0 && m.v_minus > 0.0,
                );
            }
        }
    }
    t.finish()
}

fn degeneration(cf: &dyn ClosedForms, snr: &[f64]) -> [CheckResult; 2] {
    let kappa = 1e-8;
    let mut mean = Tracker::new("rayleigh_degeneration_mean", 1e-5);
    let mut var = Tracker::new("rayleigh_degeneration_variance", 1e-4);
    for e in [0.5, 1.0, 2.0] {
        for &db in snr {
            let s = sigma2(db);
            let c = || at(e, kappa, db);
            let Some(fp) = mean.ok(c, cf.fixed_point(e, kappa, s)) else {
                continue;
            };
            let (Some(m), Some(r)) = (
                mean.ok(c, cf.moments(&fp, RHO)),
                mean.ok(c, cf.rayleigh(e, s, RHO)),
            ) else {
                continue;
            };
            mean.err(c, (m.c_bar - r.c_bar_ray).abs());
            var.err(c, (m.v_minus - r.v_minus_ray).abs());
            var.err(c, (m.v_plus - r.v_plus_ray).abs());
        }
    }
    [mean.finish(), var.finish()]
}

fn equal_antenna(cf: &dyn ClosedForms, snr: &[f64]) -> CheckResult {
    let mut t = Tracker::new("equal_antenna", 1e-9);
    for k in KAPPAS {
        for &db in snr {
            let s = sigma2(db);
            let c = || at(1.0, k, db);
            let Some(fp) = t.ok(c, cf.fixed_point(1.0, k, s)) else {
                continue;
            };
            let (Some(m), Some(q)) = (
                t.ok(c, cf.moments(&fp, RHO)),
                t.ok(c, cf.equal_antenna(k, s, RHO)),
            ) else {
                continue;
            };
            t.rel(c, q.v_minus, m.v_minus);
            t.rel(c, q.v_plus, m.v_plus);
        }
    }
    t.finish()
}

fn high_snr(cf: &dyn ClosedForms) -> CheckResult {
    let mut t = Tracker::new("high_snr", 1e-3);
    let db = 80.0;
    for (e, k, case) in [
        (2.0, 0.5, HighSnrCase::A),
        (0.5, 1.5, HighSnrCase::B),
        (2.0, 2.0, HighSnrCase::C),
        (0.5, 3.0, HighSnrCase::C),
    ] {
        let c = || at(e, k, db);
        let Some(fp) = t.ok(c, cf.fixed_point(e, k, sigma2(db))) else {
            continue;
        };
        let (Some(m), Some(h)) = (
            t.ok(c, cf.moments(&fp, RHO)),
            t.ok(c, cf.high_snr(e, k, RHO)),
        ) else {
            continue;
        };
        t.holds(
            || format!("{}: case {:?}, expected {case:?}", at(e, k, db), h.case),
            h.case == case,
        );
        t.err(c, (m.v_minus - h.v_minus).abs());
        t.err(c, (m.v_plus - h.v_plus).abs());
    }
    t.finish()
}

fn low_snr(cf: &dyn ClosedForms) -> CheckResult {
    let mut t = Tracker::new("low_snr", 1e-3);
    let s = 1e4;
    for e in [0.5, 1.0, 2.0] {
        for k in [0.5, 1.0, 2.0] {
            let c = || format!("eta={e} kappa={k} sigma2={s}");
            let Some(fp) = t.ok(c, cf.fixed_point(e, k, s)) else {
                continue;
            };
            let (Some(m), Some((lm, lp))) =
                (t.ok(c, cf.moments(&fp, RHO)), t.ok(c, cf.low_snr(e, k, s)))
            else {
                continue;
            };
            t.rel(c, lm, m.v_minus);
            t.rel(c, lp, m.v_plus);
        }
    }
    t.finish()
}

fn normal_cdf(cf: &dyn ClosedForms) -> CheckResult {
    let mut t = Tracker::new("normal_cdf", 1e-12);
    for (x, p) in [
        (0.0, 0.5),
        (1.6448536269514722, 0.95),
        (-1.959963984540054, 0.025),
        (-4.0, 3.1671241833119921254e-5),
        (-10.0, 7.619853024160526066e-24),
        (-30.0, 4.9067139271481870595e-198),
    ] {
        t.rel(|| format!("x={x}"), cf.normal_cdf(x), p);
    }
    t.finish()
}

/// Bounds `(lower, upper)` from the trait's normal CDF.
fn prob_bounds(cf: &dyn ClosedForms, r: f64, v_minus: f64, v_plus: f64) -> (f64, f64) {
    let upper = cf.normal_cdf(r / v_plus.sqrt());
    let lower = if r <= 0.0 {
        cf.normal_cdf(r / v_minus.sqrt())
    } else {
        0.5
    };
    (lower, upper)
}

fn bound_gap(cf: &dyn ClosedForms, snr: &[f64]) -> CheckResult {
    let mut t = Tracker::new("bound_gap", 0.0);
    let (m_tx, n) = (8usize, 36usize);
    for e in ETAS {
        for k in KAPPAS {
            for &db in snr {
                let c = || at(e, k, db);
                let Some(fp) = t.ok(c, cf.fixed_point(e, k, sigma2(db))) else {
                    continue;
                };
                let Some(m) = t.ok(c, cf.moments(&fp, n as f64 / m_tx as f64)) else {
                    continue;
                };
                for frac in [0.5, 0.8, 0.95] {
                    let rate = frac * m.c_bar;
                    let r = fbl_rmt::second_order_rate(rate, m.c_bar, m_tx, n);
                    let (lo, up) = prob_bounds(cf, r, m.v_minus, m.v_plus);
                    let Some((_, analytic)) = t.ok(c, fbl_rmt::bound_gap(r, m.v_minus, m.v_plus))
                    else {
                        continue;
                    };
                    t.holds(
                        || {
                            format!(
                                "{} rate={frac}C: gap {} > {analytic}",
                                at(e, k, db),
                                up - lo
                            )
                        },
                        up - lo <= analytic * (1.0 + 1e-12) + 1e-300,
                    );
                }
            }
        }
    }
    t.finish()
}

fn fig4(cf: &dyn ClosedForms) -> CheckResult {
    let mut t = Tracker::new("scatterer_ordering", 0.0);
    let (m_tx, n_rx, n) = (8usize, 16usize, 36usize);
    let rate = std::f64::consts::LN_2;
    let snr: Vec<f64> = (0..=10).map(f64::from).collect();
    // curves[k][i] = (lower, upper) for L = 8, 16, 32 and the Rayleigh reference
    let mut curves: Vec<Vec<(f64, f64)>> = Vec::new();
    for l in [8usize, 16, 32] {
        let r = ChannelDims::new(m_tx, n_rx, l, n).expect("dims").ratios();
        let mut curve = Vec::new();
        for &db in &snr {
            let c = || format!("L={l} snr_db={db}");
            let Some(fp) = t.ok(c, cf.fixed_point(r.eta, r.kappa, sigma2(db))) else {
                return t.finish();
            };
            let Some(m) = t.ok(c, cf.moments(&fp, r.rho)) else {
                return t.finish();
            };
            let rr = fbl_rmt::second_order_rate(rate, m.c_bar, m_tx, n);
            curve.push(prob_bounds(cf, rr, m.v_minus, m.v_plus));
        }
        curves.push(curve);
    }
    let (eta, rho) = (n_rx as f64 / m_tx as f64, n as f64 / m_tx as f64);
    let mut curve = Vec::new();
    for &db in &snr {
        let Some(rm) = t.ok(
            || format!("rayleigh snr_db={db}"),
            cf.rayleigh(eta, sigma2(db), rho),
        ) else {
            return t.finish();
        };
        let rr = fbl_rmt::second_order_rate(rate, rm.c_bar_ray, m_tx, n);
        curve.push(prob_bounds(cf, rr, rm.v_minus_ray, rm.v_plus_ray));
    }
    curves.push(curve);

    let labels = ["L=8", "L=16", "L=32", "rayleigh"];
    for (name, pick) in [("lower", 0usize), ("upper", 1usize)] {
        let get = |c: &Vec<(f64, f64)>, i: usize| if pick == 0 { c[i].0 } else { c[i].1 };
        for (k, c) in curves.iter().enumerate() {
            for i in 1..snr.len() {
                t.holds(
                    || {
                        format!(
                            "{name} bound for {} not decreasing at snr_db={}",
                            labels[k], snr[i]
                        )
                    },
                    get(c, i) < get(c, i - 1),
                );
            }
        }
        for k in 1..curves.len() {
            for i in 0..snr.len() {
                t.holds(
                    || {
                        format!(
                            "{name} bound: {} below {} at snr_db={}",
                            labels[k - 1],
                            labels[k],
                            snr[i]
                        )
                    },
                    get(&curves[k - 1], i) >= get(&curves[k], i),
                );
            }
        }
        let gaps: Vec<f64> = (0..3)
            .map(|k| {
                (0..snr.len())
                    .map(|i| get(&curves[k], i) - get(&curves[3], i))
                    .fold(0.0, f64::max)
            })
            .collect();
        t.holds(
            || format!("{name} bound: max gap to rayleigh not decreasing in L: {gaps:?}"),
            gaps[0] > gaps[1] && gaps[1] > gaps[2],
        );
    }
    t.finish()
}

fn outage(cf: &dyn ClosedForms) -> CheckResult {
    let mut t = Tracker::new("outage_convergence", 1e-2);
    let (e, k, db, m_tx) = (2.0, 0.5, 5.0, 8usize);
    let c = || at(e, k, db);
    let Some(fp) = t.ok(c, cf.fixed_point(e, k, sigma2(db))) else {
        return t.finish();
    };
    let mut dist = Vec::new();
    for rho in [10.0, 100.0, 1000.0] {
        let Some(m) = t.ok(c, cf.moments(&fp, rho)) else {
            return t.finish();
        };
        let rate = 0.9 * m.c_bar;
        let n = (rho * m_tx as f64).round() as usize;
        let r = fbl_rmt::second_order_rate(rate, m.c_bar, m_tx, n);
        let (lo, up) = prob_bounds(cf, r, m.v_minus, m.v_plus);
        let out = cf.normal_cdf(m_tx as f64 * (rate - m.c_bar) / m.neg_log_xi.sqrt());
        dist.push((lo - out).abs().max((up - out).abs()));
    }
    t.holds(
        || format!("distance not decreasing in rho: {dist:?}"),
        dist[0] > dist[1] && dist[1] > dist[2],
    );
    t.err(|| format!("rho=1000 distance {}", dist[2]), dist[2]);
    t.finish()
}

fn resolvent(
    cf: &dyn ClosedForms,
    trials: usize,
    seed: u64,
    threads: Option<usize>,
) -> CheckResult {
    let mut t = Tracker::new("resolvent_traces", 1e-3);
    let dims = ChannelDims::new(64, 128, 64, 1).expect("dims");
    let r = dims.ratios();
    let z = 1.0;
    let c = || format!("M=64 N=128 L=64 z={z} trials={trials}");
    let (Some(fp), Some(rep)) = (
        t.ok(c, cf.fixed_point(r.eta, r.kappa, z)),
        t.ok(
            c,
            mc::resolvent_checks(
                &dims,
                ChannelKind::RayleighProduct,
                z,
                trials,
                seed,
                threads,
            ),
        ),
    ) else {
        return t.finish();
    };
    let e = &rep.estimate;
    for (name, est, target, se) in [
        ("tr_q_over_l", e.tr_q_over_l, fp.delta, e.se_q),
        ("tr_qzz_over_m", e.tr_qzz_over_m, fp.omega, e.se_qzz),
        (
            "tr_qhh_over_m",
            e.tr_qhh_over_m,
            fp.omega * fp.omega_bar,
            e.se_qhh,
        ),
    ] {
        // error in excess of three standard errors
        t.err(
            || format!("{name}: {est} vs {target} (se {se:.2e})"),
            (est - target).abs() - 3.0 * se,
        );
    }
    t.finish()
}

pub struct Options {
    pub fast: bool,
    pub seed: u64,
    /// `None` skips the Monte Carlo resolvent check.
    pub resolvent_trials: Option<usize>,
    pub threads: Option<usize>,
}

pub fn run_with(cf: &dyn ClosedForms, o: &Options) -> Vec<CheckResult> {
    let snr = snr_grid(o.fast);
    let mut out = vec![
        cubic_roots(cf, &snr),
        identities(cf, &snr),
        derivatives(cf, &snr),
        dual_forms(cf, &snr),
        conjectures(cf, &snr),
    ];
    out.extend(degeneration(cf, &snr));
    out.extend([
        equal_antenna(cf, &snr),
        high_snr(cf),
        low_snr(cf),
        normal_cdf(cf),
        bound_gap(cf, &snr),
        fig4(cf),
        outage(cf),
    ]);
    if let Some(trials) = o.resolvent_trials {
        out.push(resolvent(cf, trials, o.seed, o.threads));
    }
    out
}

pub fn run_checks(
    cf: &dyn ClosedForms,
    fast: bool,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Vec<CheckResult> {
    run_with(
        cf,
        &Options {
            fast,
            seed: seed.unwrap_or(DEFAULT_SEED),
            resolvent_trials: Some(if fast { 200 } else { 2000 }),
            threads,
        },
    )
}

pub fn to_table(report: &[CheckResult]) -> Table {
    let mut t = Table::new(["check", "status", "points", "worst", "tolerance", "detail"]);
    for c in report {
        t.push(vec![
            c.name.into(),
            (if c.pass { "PASS" } else { "FAIL" }).into(),
            c.points.into(),
            Cell::Num(c.worst),
            Cell::Num(c.tolerance),
            c.detail.clone().into(),
        ]);
    }
    t
}
