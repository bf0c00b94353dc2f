use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::Rng;

use super::{complex_gaussian, CMatrix};
use crate::error::{Error, Result};

/// Lower Cholesky factor of `H H^H + s I`.
pub(crate) fn gram_factor(h: &CMatrix, s: f64) -> Result<CMatrix> {
    if !h.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::FactorizationFailure(
            "non-finite channel entry".into(),
        ));
    }
    let mut k = h * h.adjoint();
    for i in 0..k.nrows() {
        k[(i, i)] += Complex64::new(s, 0.0);
    }
    Cholesky::new(k).map(|c| c.unpack()).ok_or_else(|| {
        Error::FactorizationFailure(format!("H H^H + {s} I is not positive definite"))
    })
}

/// `ln det(H H^H + s I)` from its Cholesky factor.
fn logdet(l: &CMatrix) -> f64 {
    2.0 * l.diagonal().iter().map(|d| d.re.ln()).sum::<f64>()
}

/// `(1/M) ln det(I + H H^H / sigma2)`.
pub fn mi_sample(h: &CMatrix, sigma2: f64) -> Result<f64> {
    let l = gram_factor(h, sigma2)?;
    Ok((logdet(&l) - h.nrows() as f64 * sigma2.ln()) / h.ncols() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidSample {
    /// per-antenna mutual information of the channel
    pub mi: f64,
    /// mutual information density
    pub mid: f64,
}

/// MID for given channel, codebook and noise:
///
/// `(1/M) ln det(I + H H^H/s) + Tr(K^{-1} Y Y^H)/(M n) - Tr(W W^H)/(M n)`
///
/// with `K = H H^H + s I` and `Y = H X + sqrt(s) W`. `K^{-1}` is applied
/// through triangular solves against its Cholesky factor.
pub fn mid_with_noise(h: &CMatrix, x: &CMatrix, w: &CMatrix, sigma2: f64) -> Result<MidSample> {
    let (n_rx, m) = h.shape();
    let n = x.ncols();
    let l = gram_factor(h, sigma2)?;
    let mi = (logdet(&l) - n_rx as f64 * sigma2.ln()) / m as f64;
    let mut y = h * x;
    y += w * Complex64::new(sigma2.sqrt(), 0.0);
    if !l.solve_lower_triangular_mut(&mut y) {
        return Err(Error::FactorizationFailure(
            "singular Cholesky factor".into(),
        ));
    }
    let mn = (m * n) as f64;
    let mid = mi + (y.norm_squared() - w.norm_squared()) / mn;
    Ok(MidSample { mi, mid })
}

/// As [`mid_with_noise`] with standard complex Gaussian noise drawn from `rng`.
pub fn mid_sample<R: Rng + ?Sized>(
    h: &CMatrix,
    x: &CMatrix,
    sigma2: f64,
    rng: &mut R,
) -> Result<MidSample> {
    let w = complex_gaussian(h.nrows(), x.ncols(), 1.0, rng);
    mid_with_noise(h, x, &w, sigma2)
}

/// `Tr(A^2)/M` for `A = I - X X^H / n`, expanded as
/// `(M - 2 Tr(X X^H)/n + ||X X^H||_F^2 / n^2) / M`.
pub fn trace_a_sq(x: &CMatrix, n: usize) -> f64 {
    let m = x.nrows() as f64;
    let nf = n as f64;
    let gram = x * x.adjoint();
    let tr: f64 = gram.diagonal().iter().map(|v| v.re).sum();
    (m - 2.0 * tr / nf + gram.norm_squared() / (nf * nf)) / m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::sphere_codebook;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_channel_mi() {
        let h = CMatrix::zeros(4, 3);
        assert!(mi_sample(&h, 0.7).unwrap().abs() < 1e-15);
    }

    #[test]
    fn identity_channel_mi() {
        let h = CMatrix::identity(5, 5);
        let s2: f64 = 0.3;
        let want = (1.0 + 1.0 / s2).ln();
        assert!((mi_sample(&h, s2).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn zero_channel_mid_cancels() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &s2 in &[1e-3, 1.0, 1e3] {
            let x = sphere_codebook(4, 16, &mut rng);
            let h = CMatrix::zeros(6, 4);
            let s = mid_sample(&h, &x, s2, &mut rng).unwrap();
            assert!(s.mid.abs() < 1e-10);
        }
    }

    #[test]
    fn trace_a_sq_extremes() {
        let x = CMatrix::zeros(3, 5);
        assert_eq!(trace_a_sq(&x, 5), 1.0);
        // X = sqrt(n) [I 0 ...] rows orthogonal, X X^H / n = I
        let n = 4;
        let x = CMatrix::identity(4, n).scale((n as f64).sqrt());
        assert!(trace_a_sq(&x, n).abs() < 1e-15);
    }

    #[test]
    fn non_finite_channel_fails() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            mi_sample(&h, 1.0),
            Err(Error::FactorizationFailure(_))
        ));
    }
}
