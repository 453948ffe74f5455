use num_complex::Complex;

use super::Constellation;
use crate::{Error, Real, Result};

/// How per-bit LLRs are formed from symbol distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LlrMethod {
    /// Nearest point in each bit class only.
    #[default]
    MaxLog,
    /// Log-sum-exp over all points.
    Exact,
}

/// Per-bit log-likelihood ratios, `ln P(b=0)/P(b=1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame<T> {
    pub llrs: Vec<T>,
    pub noise_variance: T,
}

impl<T: Real> LlrFrame<T> {
    pub fn len(&self) -> usize {
        self.llrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llrs.is_empty()
    }

    pub fn hard_decisions(&self) -> Vec<crate::Bit> {
        self.llrs.iter().map(|&l| u8::from(l < T::zero())).collect()
    }
}

impl<T: Real> Constellation<T> {
    /// Soft demodulation with max-log LLRs. `noise_variance` is the total
    /// complex noise variance, so the likelihood is `exp(-|y-p|²/σ²)`.
    pub fn demod_llr(&self, symbols: &[Complex<T>], noise_variance: T) -> Result<LlrFrame<T>> {
        self.demod_llr_with(symbols, noise_variance, LlrMethod::MaxLog)
    }

    pub fn demod_llr_with(
        &self,
        symbols: &[Complex<T>],
        noise_variance: T,
        method: LlrMethod,
    ) -> Result<LlrFrame<T>> {
        if !(noise_variance > T::zero()) {
            return Err(Error::input("noise variance must be positive"));
        }
        let mut llrs = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        let mut scaled = vec![T::zero(); self.order()];
        for &y in symbols {
            self.symbol_llrs(y, noise_variance, method, &mut scaled, &mut llrs);
        }
        Ok(LlrFrame {
            llrs,
            noise_variance,
        })
    }

    /// Soft demodulation where each symbol carries its own noise variance
    /// (e.g. after space-time combining over a fading channel).
    pub fn demod_llr_per_symbol(
        &self,
        symbols: &[Complex<T>],
        noise_variances: &[T],
        method: LlrMethod,
    ) -> Result<Vec<T>> {
        if symbols.len() != noise_variances.len() {
            return Err(Error::input("one noise variance per symbol required"));
        }
        let mut llrs = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        let mut scaled = vec![T::zero(); self.order()];
        for (&y, &nv) in symbols.iter().zip(noise_variances) {
            if !(nv > T::zero()) {
                return Err(Error::input("noise variance must be positive"));
            }
            self.symbol_llrs(y, nv, method, &mut scaled, &mut llrs);
        }
        Ok(llrs)
    }

    fn symbol_llrs(
        &self,
        y: Complex<T>,
        nv: T,
        method: LlrMethod,
        metric: &mut [T],
        out: &mut Vec<T>,
    ) {
        for (m, p) in metric.iter_mut().zip(self.points()) {
            *m = (y - p).norm_sqr() / nv;
        }
        let k = self.bits_per_symbol();
        for bit in (0..k).rev() {
            let llr = match method {
                LlrMethod::MaxLog => {
                    let (mut d0, mut d1) = (T::infinity(), T::infinity());
                    for (label, &m) in metric.iter().enumerate() {
                        if (label >> bit) & 1 == 0 {
                            d0 = d0.min(m);
                        } else {
                            d1 = d1.min(m);
                        }
                    }
                    d1 - d0
                }
                LlrMethod::Exact => {
                    let lse = |want: usize| {
                        let floor = metric
                            .iter()
                            .enumerate()
                            .filter(|(l, _)| (l >> bit) & 1 == want)
                            .fold(T::infinity(), |a, (_, &m)| a.min(m));
                        let s = metric
                            .iter()
                            .enumerate()
                            .filter(|(l, _)| (l >> bit) & 1 == want)
                            .fold(T::zero(), |a, (_, &m)| a + (floor - m).exp());
                        s.ln() - floor
                    };
                    lse(0) - lse(1)
                }
            };
            out.push(llr);
        }
    }
}
