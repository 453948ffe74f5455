use num_complex::Complex;
use rustfft::FftPlanner;

use crate::{Error, Real, Result};

/// Unnormalized forward DFT, `X[n] = Σ_k x[k] e^{−j2πnk/N}`.
pub fn dft<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut buf = x.to_vec();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// Inverse of [`dft`], including the `1/N` factor.
pub fn idft<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut buf = x.to_vec();
    FftPlanner::new()
        .plan_fft_inverse(buf.len())
        .process(&mut buf);
    let inv = T::one() / T::from_usize_lossy(buf.len().max(1));
    buf.iter_mut().for_each(|z| *z *= inv);
    buf
}

/// Positive-frequency DFT bins where the pulse spectrum clears a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSelection<T> {
    /// DFT length `N`.
    pub n: usize,
    /// Absolute threshold on `|S[n]|`.
    pub threshold: T,
    /// Selected bins `q_1 < … < q_L`, all in `0..N/2`.
    pub bins: Vec<usize>,
    /// `S[q_l]`, the diagonal of `S`.
    pub pulse_spectrum: Vec<Complex<T>>,
}

impl<T: Real> SpectralSelection<T> {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// `r̃ = [R[q_1], …, R[q_L]]ᵀ` for a received sequence of length `N`.
    pub fn observe(&self, received: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if received.len() != self.n {
            return Err(Error::input(format!(
                "received length {} does not match DFT length {}",
                received.len(),
                self.n
            )));
        }
        let spec = dft(received);
        Ok(self.bins.iter().map(|&q| spec[q]).collect())
    }
}

/// Keeps bins `0 ≤ n < N/2` with `|S[n]| > threshold_fraction · max |S|`.
///
/// Fails with an identifiability error when fewer than `paths` bins
/// survive.
pub fn select_bins<T: Real>(
    pulse: &[Complex<T>],
    threshold_fraction: T,
    paths: usize,
) -> Result<SpectralSelection<T>> {
    if !(threshold_fraction > T::zero() && threshold_fraction < T::one()) {
        return Err(Error::config(
            "tde.threshold_fraction",
            format!("threshold fraction must lie in (0, 1), got {threshold_fraction}"),
        ));
    }
    let n = pulse.len();
    if n < 2 {
        return Err(Error::input("pulse must have at least two samples"));
    }
    let spec = dft(pulse);
    let peak = spec.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let threshold = threshold_fraction * peak;
    let bins: Vec<usize> = (0..n / 2).filter(|&q| spec[q].norm() > threshold).collect();
    if bins.is_empty() || bins.len() < paths {
        return Err(Error::Identifiability(format!(
            "{} bins above threshold, need at least {} for {} paths",
            bins.len(),
            paths.max(1),
            paths
        )));
    }
    let pulse_spectrum = bins.iter().map(|&q| spec[q]).collect();
    Ok(SpectralSelection {
        n,
        threshold,
        bins,
        pulse_spectrum,
    })
}
