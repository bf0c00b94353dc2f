//! Dimensions, ratios and noise level.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Integer system dimensions: transmit antennas `m`, receive antennas `n_rx`,
/// scatterers `l` and blocklength `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelDims {
    pub m: usize,
    pub n_rx: usize,
    pub l: usize,
    pub n: usize,
}

impl ChannelDims {
    pub fn new(m: usize, n_rx: usize, l: usize, n: usize) -> Result<Self> {
        if m == 0 || n_rx == 0 || l == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "dimensions must be at least 1, got M={m}, N={n_rx}, L={l}, n={n}"
            )));
        }
        Ok(Self { m, n_rx, l, n })
    }

    pub fn ratios(&self) -> Ratios {
        ratios_from_dims(self)
    }
}

/// `eta = N/M`, `kappa = M/L`, `rho = n/M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub eta: f64,
    pub kappa: f64,
    pub rho: f64,
}

impl Ratios {
    pub fn new(eta: f64, kappa: f64, rho: f64) -> Result<Self> {
        require_positive("eta", eta)?;
        require_positive("kappa", kappa)?;
        require_positive("rho", rho)?;
        Ok(Self { eta, kappa, rho })
    }
}

/// Each ratio is a single correctly rounded division of two exactly
/// representable integers.
pub fn ratios_from_dims(dims: &ChannelDims) -> Ratios {
    let m = dims.m as f64;
    Ratios {
        eta: dims.n_rx as f64 / m,
        kappa: m / dims.l as f64,
        rho: dims.n as f64 / m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub sigma2: f64,
    pub snr_db: f64,
}

impl NoiseLevel {
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        sigma2_from_snr_db(snr_db)
    }

    pub fn from_sigma2(sigma2: f64) -> Result<Self> {
        require_positive("sigma2", sigma2)?;
        Ok(Self {
            sigma2,
            snr_db: -10.0 * sigma2.log10(),
        })
    }
}

pub fn sigma2_from_snr_db(snr_db: f64) -> Result<NoiseLevel> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "snr_db must be finite, got {snr_db}"
        )));
    }
    let sigma2 = 10f64.powf(-snr_db / 10.0);
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "snr_db={snr_db} gives a noise power outside the f64 range"
        )));
    }
    Ok(NoiseLevel { sigma2, snr_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ratio_examples() {
        let r = ChannelDims::new(8, 16, 24, 36).unwrap().ratios();
        assert_eq!(r.eta, 2.0);
        assert_eq!(r.kappa, 1.0 / 3.0);
        assert_eq!(r.rho, 4.5);
        let r = ChannelDims::new(1, 1, 1, 1).unwrap().ratios();
        assert_eq!((r.eta, r.kappa, r.rho), (1.0, 1.0, 1.0));
        let r = ChannelDims::new(16, 32, 64, 64).unwrap().ratios();
        assert_eq!((r.eta, r.kappa, r.rho), (2.0, 0.25, 4.0));
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(ChannelDims::new(0, 1, 1, 1).is_err());
        assert!(ChannelDims::new(1, 1, 0, 1).is_err());
    }

    #[test]
    fn snr_examples() {
        assert_eq!(sigma2_from_snr_db(0.0).unwrap().sigma2, 1.0);
        assert_eq!(sigma2_from_snr_db(-10.0).unwrap().sigma2, 10.0);
        // 10^(-1/2) to 20 digits
        let s = sigma2_from_snr_db(5.0).unwrap().sigma2;
        assert!((s - 0.316_227_766_016_837_933_2).abs() < 1e-16);
        assert!(sigma2_from_snr_db(f64::NAN).is_err());
        assert!(sigma2_from_snr_db(f64::INFINITY).is_err());
        assert!(Ratios::new(1.0, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn dims_roundtrip(m in 1usize..=1024, n_rx in 1usize..4096, l in 1usize..4096, n in 1usize..8192) {
            let d = ChannelDims::new(m, n_rx, l, n).unwrap();
            let r = d.ratios();
            let mf = m as f64;
            prop_assert_eq!((r.eta * mf).round() as usize, n_rx);
            prop_assert_eq!((mf / r.kappa).round() as usize, l);
            prop_assert_eq!((r.rho * mf).round() as usize, n);
            prop_assert!((r.eta * mf - n_rx as f64).abs() < 1e-9);
        }

        #[test]
        fn snr_roundtrip(db in -200.0f64..200.0) {
            let nl = sigma2_from_snr_db(db).unwrap();
            let back = NoiseLevel::from_sigma2(nl.sigma2).unwrap().snr_db;
            prop_assert!((back - db).abs() <= 1e-12);
        }

        #[test]
        fn snr_strictly_decreasing(a in -100.0f64..100.0, d in 1e-6f64..10.0) {
            let s0 = sigma2_from_snr_db(a).unwrap().sigma2;
            let s1 = sigma2_from_snr_db(a + d).unwrap().sigma2;
            prop_assert!(s1 < s0);
        }
    }
}
