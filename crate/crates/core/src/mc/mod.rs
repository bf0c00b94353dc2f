//! Monte Carlo oracle: channels, sphere codebooks, noise, MI and MID samples.
//!
//! Every random draw comes from a ChaCha8 stream keyed by
//! `(seed, trial, label)`, so results do not depend on scheduling or on the
//! number of worker threads.

mod dump;
mod mid;
mod resolvent;
mod run;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::params::ChannelDims;

pub use dump::{write_samples, DumpFormat};
pub use mid::{mi_sample, mid_sample, mid_with_noise, trace_a_sq, MidSample};
pub use resolvent::{resolvent_checks, ResolventEstimate, ResolventReport};
pub use run::{ks_statistic, run_monte_carlo, CodebookMode, McConfig, McSummary};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// `H = Z Y` through `L` scatterers.
    #[default]
    RayleighProduct,
    /// i.i.d. entries of variance `1/M`; `L` is ignored.
    Rayleigh,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::RayleighProduct => "rayleigh_product",
            ChannelKind::Rayleigh => "rayleigh",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rayleigh_product" => Ok(ChannelKind::RayleighProduct),
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            other => Err(format!(
                "unknown channel '{other}', expected rayleigh_product or rayleigh"
            )),
        }
    }
}

/// Independent random stream labels within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Z = 0,
    Y = 1,
    W = 2,
    G = 3,
}

const STREAMS_PER_TRIAL: u64 = 8;

/// Stream factory for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStreams {
    pub seed: u64,
    pub trial: u64,
}

impl TrialStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self { seed, trial }
    }

    pub fn rng(&self, label: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(
            self.trial
                .wrapping_mul(STREAMS_PER_TRIAL)
                .wrapping_add(label as u64),
        );
        rng
    }
}

/// `rows x cols` matrix of circularly symmetric complex Gaussians with
/// variance `var` (real and imaginary parts each `var/2`).
pub fn complex_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    var: f64,
    rng: &mut R,
) -> CMatrix {
    let s = (0.5 * var).sqrt();
    let mut m = CMatrix::zeros(rows, cols);
    for v in m.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(s * re, s * im);
    }
    m
}

/// A channel realisation. `z` is kept for resolvent estimates.
pub struct Channel {
    pub h: CMatrix,
    pub z: Option<CMatrix>,
}

pub fn sample_channel(dims: &ChannelDims, kind: ChannelKind, streams: &TrialStreams) -> Channel {
    let (m, n_rx, l) = (dims.m, dims.n_rx, dims.l);
    match kind {
        ChannelKind::RayleighProduct => {
            let z = complex_gaussian(n_rx, l, 1.0 / l as f64, &mut streams.rng(Stream::Z));
            let y = complex_gaussian(l, m, 1.0 / m as f64, &mut streams.rng(Stream::Y));
            Channel {
                h: &z * &y,
                z: Some(z),
            }
        }
        ChannelKind::Rayleigh => Channel {
            h: complex_gaussian(n_rx, m, 1.0 / m as f64, &mut streams.rng(Stream::Z)),
            z: None,
        },
    }
}

/// `X = G / sqrt(Tr(G G^H) / (M n))` so that `Tr(X X^H) = M n` exactly up to
/// rounding.
pub fn sphere_codebook<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> CMatrix {
    let g = complex_gaussian(m, n, 1.0, rng);
    let energy = g.norm_squared() / (m * n) as f64;
    g.unscale(energy.sqrt())
}
