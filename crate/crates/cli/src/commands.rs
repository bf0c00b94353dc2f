use fbl_rmt::mc::{self, ChannelKind, DumpFormat, McConfig};
use fbl_rmt::params::sigma2_from_snr_db;
use fbl_rmt::{
    bound_gap, error_prob_bounds, fixed_point, high_snr_variances, low_snr_variances,
    outage_probability, rayleigh_moments, second_order_rate, AsymptoticMoments, HighSnrCase,
};

use crate::args::ScenarioArgs;
use crate::output::{Cell, Table};
use crate::scenario::Scenario;
use crate::CliError;

fn closed_form_scenario(a: &ScenarioArgs) -> Result<Scenario, CliError> {
    let s = Scenario::from_args(a)?;
    if s.channel == ChannelKind::Rayleigh {
        return Err(CliError::Usage(
            "closed forms describe the rayleigh_product channel; use --rayleigh for the single-hop reference".into(),
        ));
    }
    Ok(s)
}

fn case_label(c: HighSnrCase) -> &'static str {
    match c {
        HighSnrCase::A => "A",
        HighSnrCase::B => "B",
        HighSnrCase::C => "C",
    }
}

fn extra_columns(a: &ScenarioArgs, ray: &[&str], high: &[&str], low: &[&str]) -> Vec<String> {
    let mut cols = Vec::new();
    for (on, names) in [(a.rayleigh, ray), (a.high_snr, high), (a.low_snr, low)] {
        if on {
            cols.extend(names.iter().map(|s| s.to_string()));
        }
    }
    cols
}

pub fn moments(a: &ScenarioArgs) -> Result<Table, CliError> {
    let s = closed_form_scenario(a)?;
    let r = s.ratios;
    let mut cols: Vec<String> = [
        "snr_db",
        "sigma2",
        "eta",
        "kappa",
        "rho",
        "omega",
        "delta",
        "c_bar",
        "xi",
        "neg_log_xi",
        "v_minus",
        "v_plus",
        "theta",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(extra_columns(
        a,
        &["c_bar_ray", "v_minus_ray", "v_plus_ray"],
        &["v_minus_high_snr", "v_plus_high_snr", "high_snr_case"],
        &["v_minus_low_snr", "v_plus_low_snr"],
    ));
    let mut t = Table::new(cols);
    let high = high_snr_variances(r.eta, r.kappa, r.rho).ok();
    for &db in &s.snr_db {
        let nl = sigma2_from_snr_db(db)?;
        let fp = fixed_point(r.eta, r.kappa, nl.sigma2)?;
        let m = AsymptoticMoments::evaluate(&fp, r.rho)?;
        let mut row: Vec<Cell> = vec![
            db.into(),
            nl.sigma2.into(),
            r.eta.into(),
            r.kappa.into(),
            r.rho.into(),
            fp.omega.into(),
            fp.delta.into(),
            m.c_bar.into(),
            m.xi.into(),
            m.neg_log_xi.into(),
            m.v_minus.into(),
            m.v_plus.into(),
            m.theta.into(),
        ];
        if a.rayleigh {
            let rm = rayleigh_moments(r.eta, nl.sigma2, r.rho, 0.0)?;
            row.extend([
                rm.c_bar_ray.into(),
                rm.v_minus_ray.into(),
                rm.v_plus_ray.into(),
            ]);
        }
        if a.high_snr {
            row.extend([
                high.map(|h| h.v_minus).into(),
                high.map(|h| h.v_plus).into(),
                high.map(|h| case_label(h.case)).into(),
            ]);
        }
        if a.low_snr {
            let (lm, lp) = low_snr_variances(r.eta, r.kappa, nl.sigma2)?;
            row.extend([lm.into(), lp.into()]);
        }
        t.push(row);
    }
    Ok(t)
}

fn probability_cells(r: f64, v_minus: f64, v_plus: f64) -> [Cell; 2] {
    match error_prob_bounds(r, v_minus, v_plus) {
        Ok(p) => [p.lower.into(), p.upper.into()],
        Err(_) => [Cell::Empty, Cell::Empty],
    }
}

pub fn bounds(a: &ScenarioArgs) -> Result<Table, CliError> {
    let s = closed_form_scenario(a)?;
    let d = s.require_dims("bounds")?;
    let rate = s.rate_nats.ok_or_else(|| {
        CliError::Usage("bounds needs a rate (--rate, --rate-bits or rate_nats)".into())
    })?;
    let r = s.ratios;
    let mut cols: Vec<String> = [
        "snr_db",
        "sigma2",
        "rate_nats",
        "c_bar",
        "r",
        "p_lower",
        "p_upper",
        "p_outage",
        "gap",
        "gap_bound",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(extra_columns(
        a,
        &["c_bar_ray", "r_ray", "p_lower_ray", "p_upper_ray"],
        &["p_lower_high_snr", "p_upper_high_snr"],
        &["p_lower_low_snr", "p_upper_low_snr"],
    ));
    let mut t = Table::new(cols);
    let high = high_snr_variances(r.eta, r.kappa, r.rho).ok();
    for &db in &s.snr_db {
        let nl = sigma2_from_snr_db(db)?;
        let fp = fixed_point(r.eta, r.kappa, nl.sigma2)?;
        let m = AsymptoticMoments::evaluate(&fp, r.rho)?;
        let rr = second_order_rate(rate, m.c_bar, d.m, d.n);
        let p = error_prob_bounds(rr, m.v_minus, m.v_plus)?;
        let outage = outage_probability(rate, m.c_bar, m.neg_log_xi, d.m)?;
        let gap_bound = bound_gap(rr, m.v_minus, m.v_plus).ok().map(|(_, g)| g);
        let mut row: Vec<Cell> = vec![
            db.into(),
            nl.sigma2.into(),
            rate.into(),
            m.c_bar.into(),
            rr.into(),
            p.lower.into(),
            p.upper.into(),
            outage.into(),
            (p.upper - p.lower).into(),
            gap_bound.into(),
        ];
        if a.rayleigh {
            let rm = rayleigh_moments(r.eta, nl.sigma2, r.rho, 0.0)?;
            let r_ray = second_order_rate(rate, rm.c_bar_ray, d.m, d.n);
            row.extend([rm.c_bar_ray.into(), r_ray.into()]);
            row.extend(probability_cells(r_ray, rm.v_minus_ray, rm.v_plus_ray));
        }
        if a.high_snr {
            match high {
                Some(h) => row.extend(probability_cells(rr, h.v_minus, h.v_plus)),
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
        }
        if a.low_snr {
            let (lm, lp) = low_snr_variances(r.eta, r.kappa, nl.sigma2)?;
            row.extend(probability_cells(rr, lm, lp));
        }
        t.push(row);
    }
    Ok(t)
}

pub fn simulate(a: &ScenarioArgs, threads: Option<usize>) -> Result<Table, CliError> {
    let s = Scenario::from_args(a)?;
    let d = s.require_dims("simulate")?;
    let trials = s
        .trials
        .ok_or_else(|| CliError::Usage("simulate needs 'trials'".into()))?;
    if trials < 2 {
        return Err(CliError::Usage(format!(
            "simulate needs at least 2 trials, got {trials}"
        )));
    }
    if a.dump_samples.is_some() && s.snr_db.len() != 1 {
        return Err(CliError::Usage(
            "--dump-samples needs a single SNR point".into(),
        ));
    }
    let mut t = Table::new([
        "snr_db",
        "sigma2",
        "channel",
        "M",
        "N",
        "L",
        "n",
        "seed",
        "trials",
        "failures",
        "mid_mean",
        "mid_var",
        "se_mean",
        "mi_mean",
        "mi_var",
        "tr_a2_mean",
        "c_bar",
        "v_n",
        "v_minus",
        "v_plus",
        "scaled_var",
        "ks",
    ]);
    for &db in &s.snr_db {
        let nl = sigma2_from_snr_db(db)?;
        let mut cfg = McConfig::new(d, s.channel, nl.sigma2, trials, s.seed);
        cfg.threads = threads;
        cfg.retain_samples = a.dump_samples.is_some();
        let sum = mc::run_monte_carlo(&cfg)?;
        if let (Some(path), Some(samples)) = (&a.dump_samples, &sum.samples) {
            mc::write_samples(path, samples, DumpFormat::from_path(path))?;
        }
        t.push(vec![
            db.into(),
            nl.sigma2.into(),
            s.channel.to_string().into(),
            d.m.into(),
            d.n_rx.into(),
            d.l.into(),
            d.n.into(),
            s.seed.into(),
            sum.trials.into(),
            sum.failures.into(),
            sum.mid_mean.into(),
            sum.mid_var.into(),
            sum.se_mean.into(),
            sum.mi_mean.into(),
            sum.mi_var.into(),
            sum.tr_a2_mean.into(),
            sum.c_bar.into(),
            sum.v_n.into(),
            sum.v_minus.into(),
            sum.v_plus.into(),
            sum.scaled_var.into(),
            sum.ks.into(),
        ]);
    }
    Ok(t)
}

pub fn resolvent_check(a: &ScenarioArgs, threads: Option<usize>) -> Result<Table, CliError> {
    let s = closed_form_scenario(a)?;
    let d = s.require_dims("resolvent-check")?;
    let trials = s
        .trials
        .ok_or_else(|| CliError::Usage("resolvent-check needs 'trials'".into()))?;
    let mut t = Table::new([
        "z",
        "tr_q_over_l",
        "delta_z",
        "se_q",
        "tr_qzz_over_m",
        "omega_z",
        "se_qzz",
        "tr_qhh_over_m",
        "omega_omega_bar_z",
        "se_qhh",
    ]);
    for &db in &s.snr_db {
        let z = sigma2_from_snr_db(db)?.sigma2;
        let rep = mc::resolvent_checks(&d, s.channel, z, trials, s.seed, threads)?;
        let e = &rep.estimate;
        t.push(vec![
            z.into(),
            e.tr_q_over_l.into(),
            rep.delta_z.into(),
            e.se_q.into(),
            e.tr_qzz_over_m.into(),
            rep.omega_z.into(),
            e.se_qzz.into(),
            e.tr_qhh_over_m.into(),
            rep.omega_omega_bar_z.into(),
            e.se_qhh.into(),
        ]);
    }
    Ok(t)
}
