use num_complex::Complex;

use super::spectrum::{dft, idft};
use crate::{Error, Real, Result};

/// Normalized circular cross-correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlation<T> {
    /// `|Σ_n r[n] s*[n − ℓ]| / (‖r‖‖s‖)` for lags `ℓ = 0..N`.
    pub values: Vec<T>,
    /// Lag of the largest value; the smallest lag wins ties.
    pub peak_lag: usize,
}

impl<T: Real> Correlation<T> {
    pub fn peak_value(&self) -> T {
        self.values[self.peak_lag]
    }

    /// Local maxima of the correlation magnitude above `fraction` of the
    /// global peak, in lag order.
    pub fn peaks(&self, fraction: T) -> Vec<usize> {
        let n = self.values.len();
        let floor = fraction * self.peak_value();
        (0..n)
            .filter(|&l| {
                let v = self.values[l];
                let prev = self.values[(l + n - 1) % n];
                let next = self.values[(l + 1) % n];
                v >= floor && v > prev && v >= next
            })
            .collect()
    }
}

/// Correlates `r` against `s` zero-padded to `|r|` at every integer lag.
pub fn cross_correlate<T: Real>(r: &[Complex<T>], s: &[Complex<T>]) -> Result<Correlation<T>> {
    if s.is_empty() || s.len() > r.len() {
        return Err(Error::input(format!(
            "pulse length {} must be in 1..={}",
            s.len(),
            r.len()
        )));
    }
    let er = r.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    let es = s.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    if !(er > T::zero() && es > T::zero()) {
        return Err(Error::input("cross-correlation of a zero-energy sequence"));
    }
    let n = r.len();
    let mut padded = s.to_vec();
    padded.resize(n, Complex::new(T::zero(), T::zero()));
    let rf = dft(r);
    let sf = dft(&padded);
    let prod: Vec<Complex<T>> = rf.iter().zip(&sf).map(|(a, b)| a * b.conj()).collect();
    let norm = (er * es).sqrt();
    let values: Vec<T> = idft(&prod).iter().map(|z| z.norm() / norm).collect();
    let mut peak_lag = 0;
    for (l, &v) in values.iter().enumerate() {
        if v > values[peak_lag] {
            peak_lag = l;
        }
    }
    Ok(Correlation { values, peak_lag })
}
