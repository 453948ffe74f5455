//! MIMO channel models: quasi-static iid Rayleigh realizations, the
//! geometric path model built from uniform-linear-array spatial signatures,
//! additive white Gaussian noise, and the two-component Gaussian Doppler
//! spectrum used for long urban echoes.

mod doppler;
mod geometric;

use num_complex::Complex;
use rand::Rng;

use crate::matrix::CMatrix;
use crate::scalar::standard_normal;
use crate::{Error, Real, Result};

pub use doppler::{doppler_psd, DopplerComponent, DopplerParams};
pub use geometric::{geometric_channel, spatial_signature, ArrayGeometry, ArraySide, PathSpec};

/// Flat MIMO channel, `n_rx × n_tx`. Entry `(j, i)` is the gain `α_{i,j}`
/// from transmit antenna `i` to receive antenna `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix<T>(CMatrix<T>);

impl<T: Real> ChannelMatrix<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(Error::input("channel matrix must have positive shape"));
        }
        if !m.is_finite() {
            return Err(Error::input("channel matrix entries must be finite"));
        }
        Ok(Self(m))
    }

    /// Row-major gains (`n_rx` rows of `n_tx`). Panics on a length mismatch.
    pub fn from_gains(n_rx: usize, n_tx: usize, gains: Vec<Complex<T>>) -> Self {
        Self(CMatrix::from_row_major(n_rx, n_tx, gains))
    }

    /// Unit gain from every transmit antenna to every receive antenna.
    pub fn unit(n_rx: usize, n_tx: usize) -> Self {
        Self(CMatrix::from_fn(n_rx, n_tx, |_, _| {
            Complex::new(T::one(), T::zero())
        }))
    }

    pub fn n_rx(&self) -> usize {
        self.0.rows()
    }

    pub fn n_tx(&self) -> usize {
        self.0.cols()
    }

    /// `α_{i,j}`.
    #[inline]
    pub fn gain(&self, tx: usize, rx: usize) -> Complex<T> {
        self.0[(rx, tx)]
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.0
    }
}

/// iid CN(0, 1) gains: zero-mean, circularly symmetric, unit variance, so
/// each magnitude is Rayleigh with scale `1/√2`.
pub fn rayleigh_realization<T: Real, R: Rng + ?Sized>(
    n_rx: usize,
    n_tx: usize,
    rng: &mut R,
) -> ChannelMatrix<T> {
    let s = T::FRAC_1_SQRT_2();
    ChannelMatrix(CMatrix::from_fn(n_rx, n_tx, |_, _| {
        Complex::new(
            standard_normal::<T, _>(rng) * s,
            standard_normal::<T, _>(rng) * s,
        )
    }))
}

/// Returns `signal` plus circular complex Gaussian noise with the given total
/// variance (half in each of the real and imaginary parts).
pub fn awgn<T: Real, R: Rng + ?Sized>(
    signal: &[Complex<T>],
    variance: T,
    rng: &mut R,
) -> Result<Vec<Complex<T>>> {
    let mut out = signal.to_vec();
    awgn_in_place(&mut out, variance, rng)?;
    Ok(out)
}

pub fn awgn_in_place<T: Real, R: Rng + ?Sized>(
    signal: &mut [Complex<T>],
    variance: T,
    rng: &mut R,
) -> Result<()> {
    if !(variance > T::zero()) || !variance.is_finite() {
        return Err(Error::input("noise variance must be positive and finite"));
    }
    let s = (variance / T::lit(2.0)).sqrt();
    for z in signal.iter_mut() {
        z.re += s * standard_normal::<T, _>(rng);
        z.im += s * standard_normal::<T, _>(rng);
    }
    Ok(())
}

/// Real white Gaussian noise with the given variance.
pub fn awgn_real_in_place<T: Real, R: Rng + ?Sized>(
    signal: &mut [T],
    variance: T,
    rng: &mut R,
) -> Result<()> {
    if !(variance > T::zero()) || !variance.is_finite() {
        return Err(Error::input("noise variance must be positive and finite"));
    }
    let s = variance.sqrt();
    for x in signal.iter_mut() {
        *x += s * standard_normal::<T, _>(rng);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    #[test]
    fn awgn_rejects_bad_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(awgn(&[C::new(0.0, 0.0)], 0.0, &mut rng).is_err());
        assert!(awgn(&[C::new(0.0, 0.0)], -1.0, &mut rng).is_err());
        assert!(awgn(&[C::new(0.0, 0.0)], f64::INFINITY, &mut rng).is_err());
    }

    #[test]
    fn awgn_variance_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 1_000_000;
        let x = vec![C::new(0.5, -0.25); n];
        let y = awgn(&x, 2.0, &mut rng).unwrap();
        let (mut vr, mut vi) = (0.0, 0.0);
        for (a, b) in y.iter().zip(&x) {
            let d = a - b;
            vr += d.re * d.re;
            vi += d.im * d.im;
        }
        vr /= n as f64;
        vi /= n as f64;
        assert!(((vr + vi) - 2.0).abs() < 0.02, "{}", vr + vi);
        assert!((vr - 1.0).abs() < 0.01 && (vi - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_degenerate_shape() {
        assert!(ChannelMatrix::<f64>::new(CMatrix::zeros(0, 2)).is_err());
        let mut m = CMatrix::<f64>::zeros(1, 1);
        m[(0, 0)] = C::new(f64::NAN, 0.0);
        assert!(ChannelMatrix::new(m).is_err());
    }

    #[test]
    fn gain_indexing() {
        let h = ChannelMatrix::from_gains(2, 3, (0..6).map(|k| C::new(k as f64, 0.0)).collect());
        assert_eq!(h.gain(2, 0), C::new(2.0, 0.0));
        assert_eq!(h.gain(0, 1), C::new(3.0, 0.0));
    }
}
