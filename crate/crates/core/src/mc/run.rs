use rayon::prelude::*;
use serde::Serialize;

use super::{
    mid_sample, sample_channel, sphere_codebook, trace_a_sq, ChannelKind, Stream, TrialStreams,
};
use crate::asymptotics::{ergodic_mi, rayleigh_moments, AsymptoticMoments};
use crate::bounds::normal_cdf;
use crate::error::{require_positive, Error, Result};
use crate::params::ChannelDims;
use crate::rmt::FixedPoint;

/// Whether each trial draws its own codebook or all trials share one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookMode {
    #[default]
    Fresh,
    Fixed,
}

/// Trial index reserved for the shared codebook of [`CodebookMode::Fixed`].
const FIXED_CODEBOOK_TRIAL: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub dims: ChannelDims,
    pub kind: ChannelKind,
    pub sigma2: f64,
    pub trials: usize,
    pub seed: u64,
    pub codebook: CodebookMode,
    /// keep the per-trial samples in the summary
    pub retain_samples: bool,
    /// worker cap; `None` uses the rayon default
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(
        dims: ChannelDims,
        kind: ChannelKind,
        sigma2: f64,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self {
            dims,
            kind,
            sigma2,
            trials,
            seed,
            codebook: CodebookMode::Fresh,
            retain_samples: false,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub trials: usize,
    pub failures: usize,
    pub mi_mean: f64,
    pub mi_var: f64,
    pub mid_mean: f64,
    pub mid_var: f64,
    /// `sqrt(mid_var / trials)`
    pub se_mean: f64,
    pub tr_a2_mean: f64,
    pub tr_a2_var: f64,
    /// closed-form mean
    pub c_bar: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    /// closed-form `V_n` at the mean realised `Tr(A^2)/M`
    pub v_n: f64,
    /// sample variance of `sqrt(M n) (I - C)`
    pub scaled_var: f64,
    /// Kolmogorov-Smirnov distance of the standardised samples from `Phi`
    pub ks: f64,
    /// `sqrt(M n) (I - C)` per trial, in trial order
    #[serde(skip)]
    pub samples: Option<Vec<f64>>,
    /// samples divided by `sqrt(V_n)` at each trial's own `Tr(A^2)/M`
    #[serde(skip)]
    pub std_samples: Option<Vec<f64>>,
}

impl McSummary {
    /// Sorted samples with plotting positions `i / (T + 1)`.
    pub fn ecdf(&self) -> Option<Vec<(f64, f64)>> {
        let mut xs = self.samples.clone()?;
        xs.sort_by(f64::total_cmp);
        let t = xs.len() as f64 + 1.0;
        Some(
            xs.into_iter()
                .enumerate()
                .map(|(i, x)| (x, (i + 1) as f64 / t))
                .collect(),
        )
    }
}

#[derive(Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn var(&self) -> f64 {
        self.m2 / (self.n - 1) as f64
    }
}

/// Sup distance between the empirical CDF of `xs` and `Phi`.
pub fn ks_statistic(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = normal_cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    })
}

struct Reference {
    c_bar: f64,
    v_minus: f64,
    theta: f64,
}

fn reference(cfg: &McConfig) -> Result<Reference> {
    let r = cfg.dims.ratios();
    match cfg.kind {
        ChannelKind::RayleighProduct => {
            let fp = FixedPoint::new(r.eta, r.kappa, cfg.sigma2)?;
            let mom = AsymptoticMoments::evaluate(&fp, r.rho)?;
            Ok(Reference {
                c_bar: ergodic_mi(&fp)?,
                v_minus: mom.v_minus,
                theta: mom.theta,
            })
        }
        ChannelKind::Rayleigh => {
            let rm = rayleigh_moments(r.eta, cfg.sigma2, r.rho, 0.0)?;
            Ok(Reference {
                c_bar: rm.c_bar_ray,
                v_minus: rm.v_minus_ray,
                theta: rm.v_plus_ray - rm.v_minus_ray,
            })
        }
    }
}

pub(crate) fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs independent trials and aggregates MI and MID statistics.
///
/// Each trial draws `H`, `W` and (in fresh mode) `X` from its own streams.
/// Results are gathered in trial order before a sequential reduction, so the
/// summary is bit-identical for any thread count.
pub fn run_monte_carlo(cfg: &McConfig) -> Result<McSummary> {
    if cfg.trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo needs at least 2 trials, got {}",
            cfg.trials
        )));
    }
    require_positive("sigma2", cfg.sigma2)?;
    let refr = reference(cfg)?;
    let (m, n) = (cfg.dims.m, cfg.dims.n);
    let rho = cfg.dims.ratios().rho;

    let fixed = match cfg.codebook {
        CodebookMode::Fixed => {
            let s = TrialStreams::new(cfg.seed, FIXED_CODEBOOK_TRIAL);
            let x = sphere_codebook(m, n, &mut s.rng(Stream::G));
            let t = trace_a_sq(&x, n);
            Some((x, t))
        }
        CodebookMode::Fresh => None,
    };

    let trial = |t: usize| -> Result<(f64, f64, f64)> {
        let s = TrialStreams::new(cfg.seed, t as u64);
        let ch = sample_channel(&cfg.dims, cfg.kind, &s);
        let own;
        let (x, ta) = match &fixed {
            Some((x, ta)) => (x, *ta),
            None => {
                let x = sphere_codebook(m, n, &mut s.rng(Stream::G));
                let ta = trace_a_sq(&x, n);
                own = x;
                (&own, ta)
            }
        };
        let smp = mid_sample(&ch.h, x, cfg.sigma2, &mut s.rng(Stream::W))?;
        Ok((smp.mi, smp.mid, ta))
    };
    let results: Vec<Result<(f64, f64, f64)>> = with_pool(cfg.threads, || {
        (0..cfg.trials).into_par_iter().map(trial).collect()
    })?;

    let failures = results.iter().filter(|r| r.is_err()).count();
    if failures * 1000 > cfg.trials || cfg.trials - failures < 2 {
        return Err(Error::TooManyFailures {
            failed: failures,
            trials: cfg.trials,
        });
    }

    let scale = ((m * n) as f64).sqrt();
    let (mut mi, mut mid, mut ta) = (Welford::default(), Welford::default(), Welford::default());
    let mut samples = Vec::with_capacity(cfg.trials - failures);
    let mut std_samples = Vec::with_capacity(cfg.trials - failures);
    for (a, b, c) in results.into_iter().flatten() {
        mi.push(a);
        mid.push(b);
        ta.push(c);
        let x = scale * (b - refr.c_bar);
        samples.push(x);
        std_samples.push(x / (refr.v_minus + rho * refr.theta * c).sqrt());
    }
    let ks = ks_statistic(&std_samples);
    let mid_var = mid.var();
    Ok(McSummary {
        trials: mid.n,
        failures,
        mi_mean: mi.mean,
        mi_var: mi.var(),
        mid_mean: mid.mean,
        mid_var,
        se_mean: (mid_var / mid.n as f64).sqrt(),
        tr_a2_mean: ta.mean,
        tr_a2_var: ta.var(),
        c_bar: refr.c_bar,
        v_minus: refr.v_minus,
        v_plus: refr.v_minus + refr.theta,
        v_n: refr.v_minus + rho * refr.theta * ta.mean,
        scaled_var: scale * scale * mid_var,
        ks,
        samples: cfg.retain_samples.then_some(samples),
        std_samples: cfg.retain_samples.then_some(std_samples),
    })
}
