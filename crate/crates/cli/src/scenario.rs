//! Scenario assembly from a JSON config file and command-line overrides.

use std::path::Path;

use fbl_rmt::mc::ChannelKind;
use fbl_rmt::{ChannelDims, Ratios};
use serde_json::Value;

use crate::args::ScenarioArgs;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dims: Option<ChannelDims>,
    pub ratios: Ratios,
    pub snr_db: Vec<f64>,
    pub rate_nats: Option<f64>,
    pub channel: ChannelKind,
    pub trials: Option<usize>,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 1;

/// Raw key/value layer shared by the file and the flags.
#[derive(Debug, Default, Clone)]
struct Fields {
    m: Option<usize>,
    n_rx: Option<usize>,
    l: Option<usize>,
    n: Option<usize>,
    eta: Option<f64>,
    kappa: Option<f64>,
    rho: Option<f64>,
    snr_db: Option<Vec<f64>>,
    rate_nats: Option<f64>,
    channel: Option<ChannelKind>,
    trials: Option<usize>,
    seed: Option<u64>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn bad_key(key: &str, why: &str) -> CliError {
    usage(format!("config key '{key}': {why}"))
}

fn count(key: &str, v: &Value) -> Result<usize, CliError> {
    match v.as_u64() {
        Some(x) if x >= 1 => Ok(x as usize),
        _ => Err(bad_key(key, "expected a positive integer")),
    }
}

fn real(key: &str, v: &Value) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| bad_key(key, "expected a number"))
}

/// `start:stop:step` or a single value.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("--snr-db: '{s}' is not a number")))
    };
    match parts.as_slice() {
        [a] => Ok(vec![num(a)?]),
        [a, b, c] => sweep(num(a)?, num(b)?, num(c)?).map_err(|e| usage(format!("--snr-db: {e}"))),
        _ => Err(usage("--snr-db expects a or a:b:step")),
    }
}

fn sweep(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err("sweep bounds must be finite".into());
    }
    if start > stop {
        return Err(format!("start {start} exceeds stop {stop}"));
    }
    if step <= 0.0 {
        return Err(format!("step must be positive, got {step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn from_config(path: &Path) -> Result<Fields, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("config {}: invalid JSON: {e}", path.display())))?;
    let obj = root
        .as_object()
        .ok_or_else(|| usage("config must be a JSON object"))?;
    let mut f = Fields::default();
    for (key, v) in obj {
        match key.as_str() {
            "M" => f.m = Some(count(key, v)?),
            "N" => f.n_rx = Some(count(key, v)?),
            "L" => f.l = Some(count(key, v)?),
            "n" => f.n = Some(count(key, v)?),
            "eta" => f.eta = Some(real(key, v)?),
            "kappa" => f.kappa = Some(real(key, v)?),
            "rho" => f.rho = Some(real(key, v)?),
            "rate_nats" => f.rate_nats = Some(real(key, v)?),
            "trials" => f.trials = Some(count(key, v)?),
            "seed" => {
                f.seed = Some(
                    v.as_u64()
                        .ok_or_else(|| bad_key(key, "expected a non-negative integer"))?,
                )
            }
            "channel" => {
                let s = v
                    .as_str()
                    .ok_or_else(|| bad_key(key, "expected a string"))?;
                f.channel = Some(s.parse().map_err(|e: String| bad_key(key, &e))?);
            }
            "snr_db" => {
                f.snr_db = Some(match v {
                    Value::Number(_) => vec![real(key, v)?],
                    Value::Object(o) => {
                        for k in o.keys() {
                            if !matches!(k.as_str(), "start" | "stop" | "step") {
                                return Err(bad_key(&format!("snr_db.{k}"), "unknown key"));
                            }
                        }
                        let get = |k: &str| {
                            o.get(k)
                                .ok_or_else(|| bad_key(&format!("snr_db.{k}"), "missing"))
                                .and_then(|x| real(&format!("snr_db.{k}"), x))
                        };
                        sweep(get("start")?, get("stop")?, get("step")?)
                            .map_err(|e| bad_key(key, &e))?
                    }
                    _ => return Err(bad_key(key, "expected a number or {start, stop, step}")),
                })
            }
            other => return Err(bad_key(other, "unknown key")),
        }
    }
    Ok(f)
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(usage(format!("{name} must be positive, got {x}")))
    }
}

impl Scenario {
    pub fn from_args(a: &ScenarioArgs) -> Result<Self, CliError> {
        let mut f = match &a.config {
            Some(p) => from_config(p)?,
            None => Fields::default(),
        };
        macro_rules! over {
            ($($field:ident),*) => { $( if a.$field.is_some() { f.$field = a.$field; } )* };
        }
        over!(m, n_rx, l, n, eta, kappa, rho, trials, seed, channel);
        if let Some(s) = &a.snr_db {
            f.snr_db = Some(parse_sweep(s)?);
        }
        if let Some(r) = a.rate {
            f.rate_nats = Some(r);
        }
        if let Some(b) = a.rate_bits {
            f.rate_nats = Some(b * std::f64::consts::LN_2);
        }

        let any_dims = f.m.is_some() || f.n_rx.is_some() || f.l.is_some() || f.n.is_some();
        let any_ratios = f.eta.is_some() || f.kappa.is_some() || f.rho.is_some();
        let (dims, ratios) = match (any_dims, any_ratios) {
            (true, true) => {
                return Err(usage(
                    "give either dimensions (M, N, L, n) or ratios (eta, kappa, rho), not both",
                ))
            }
            (false, false) => {
                return Err(usage(
                    "missing dimensions: give M, N, L, n or eta, kappa, rho",
                ))
            }
            (true, false) => {
                let need = |name: &str, v: Option<usize>| {
                    v.ok_or_else(|| usage(format!("missing dimension '{name}'")))
                };
                let d = ChannelDims::new(
                    need("M", f.m)?,
                    need("N", f.n_rx)?,
                    need("L", f.l)?,
                    need("n", f.n)?,
                )
                .map_err(|e| usage(e.to_string()))?;
                (Some(d), d.ratios())
            }
            (false, true) => {
                let need = |name: &str, v: Option<f64>| {
                    v.ok_or_else(|| usage(format!("missing ratio '{name}'")))
                        .and_then(|x| positive(name, x))
                };
                let r = Ratios::new(
                    need("eta", f.eta)?,
                    need("kappa", f.kappa)?,
                    need("rho", f.rho)?,
                )
                .map_err(|e| usage(e.to_string()))?;
                (None, r)
            }
        };
        let snr_db = f.snr_db.ok_or_else(|| usage("missing 'snr_db'"))?;
        if let Some(r) = f.rate_nats {
            if !r.is_finite() {
                return Err(usage(format!("rate must be finite, got {r}")));
            }
        }
        Ok(Scenario {
            dims,
            ratios,
            snr_db,
            rate_nats: f.rate_nats,
            channel: f.channel.unwrap_or_default(),
            trials: f.trials,
            seed: f.seed.unwrap_or(DEFAULT_SEED),
        })
    }

    pub fn require_dims(&self, why: &str) -> Result<ChannelDims, CliError> {
        self.dims
            .ok_or_else(|| usage(format!("{why} needs integer dimensions M, N, L, n")))
    }
}
