use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::mid::gram_factor;
use super::run::with_pool;
use super::{sample_channel, ChannelKind, TrialStreams};
use crate::error::{require_positive, Error, Result};
use crate::params::ChannelDims;
use crate::rmt::FixedPoint;

/// Monte Carlo estimates of normalised resolvent traces, `Q = (z I + H H^H)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventEstimate {
    pub z: f64,
    /// `E[Tr Q] / L`
    pub tr_q_over_l: f64,
    /// `E[Tr Q Z Z^H] / M`
    pub tr_qzz_over_m: f64,
    /// `E[Tr Q H H^H] / M`
    pub tr_qhh_over_m: f64,
    pub se_q: f64,
    pub se_qzz: f64,
    pub se_qhh: f64,
}

/// Estimates next to their deterministic equivalents `delta`, `omega` and
/// `omega * omega_bar` at noise level `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventReport {
    pub estimate: ResolventEstimate,
    pub delta_z: f64,
    pub omega_z: f64,
    pub omega_omega_bar_z: f64,
}

impl ResolventReport {
    /// `(estimate, target, standard error)` for each of the three traces.
    pub fn pairs(&self) -> [(f64, f64, f64); 3] {
        let e = &self.estimate;
        [
            (e.tr_q_over_l, self.delta_z, e.se_q),
            (e.tr_qzz_over_m, self.omega_z, e.se_qzz),
            (e.tr_qhh_over_m, self.omega_omega_bar_z, e.se_qhh),
        ]
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Traces follow from the Cholesky factor `L` of `z I + H H^H`:
/// `Tr Q = ||L^{-1}||_F^2`, `Tr Q Z Z^H = ||L^{-1} Z||_F^2` and
/// `Tr Q H H^H = ||L^{-1} H||_F^2`.
pub fn resolvent_checks(
    dims: &ChannelDims,
    kind: ChannelKind,
    z: f64,
    trials: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<ResolventReport> {
    require_positive("z", z)?;
    if kind != ChannelKind::RayleighProduct {
        return Err(Error::InvalidParameter(
            "resolvent checks need the scatterer matrix of a rayleigh_product channel".into(),
        ));
    }
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolvent checks need at least 2 trials, got {trials}"
        )));
    }
    let r = dims.ratios();
    let fp = FixedPoint::new(r.eta, r.kappa, z)?;
    let (n_rx, m, l) = (dims.n_rx, dims.m, dims.l);

    let trial = |t: usize| -> Result<[f64; 3]> {
        let ch = sample_channel(dims, kind, &TrialStreams::new(seed, t as u64));
        let zmat = ch.z.expect("rayleigh_product keeps Z");
        let fac = gram_factor(&ch.h, z)?;
        let mut rhs = DMatrix::<Complex64>::zeros(n_rx, n_rx + l + m);
        rhs.columns_mut(0, n_rx).fill_with_identity();
        rhs.columns_mut(n_rx, l).copy_from(&zmat);
        rhs.columns_mut(n_rx + l, m).copy_from(&ch.h);
        if !fac.solve_lower_triangular_mut(&mut rhs) {
            return Err(Error::FactorizationFailure(
                "singular Cholesky factor".into(),
            ));
        }
        Ok([
            rhs.columns(0, n_rx).norm_squared() / l as f64,
            rhs.columns(n_rx, l).norm_squared() / m as f64,
            rhs.columns(n_rx + l, m).norm_squared() / m as f64,
        ])
    };
    let results: Vec<Result<[f64; 3]>> =
        with_pool(threads, || (0..trials).into_par_iter().map(trial).collect())?;
    let rows: Vec<[f64; 3]> = results.into_iter().collect::<Result<_>>()?;

    let col = |k: usize| mean_se(&rows.iter().map(|r| r[k]).collect::<Vec<_>>());
    let (q, se_q) = col(0);
    let (qzz, se_qzz) = col(1);
    let (qhh, se_qhh) = col(2);
    Ok(ResolventReport {
        estimate: ResolventEstimate {
            z,
            tr_q_over_l: q,
            tr_qzz_over_m: qzz,
            tr_qhh_over_m: qhh,
            se_q,
            se_qzz,
            se_qhh,
        },
        delta_z: fp.delta,
        omega_z: fp.omega,
        omega_omega_bar_z: fp.omega * fp.omega_bar,
    })
}
