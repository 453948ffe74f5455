use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// One Gaussian lobe of the Doppler spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerComponent {
    /// Centre frequency in Hz.
    pub center_hz: f64,
    /// Power gain, non-negative.
    pub gain: f64,
    /// Standard deviation in Hz, positive.
    pub sigma_hz: f64,
}

/// Bi-Gaussian Doppler spectrum (COST207 long-echo model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerParams {
    pub components: [DopplerComponent; 2],
}

impl DopplerParams {
    pub fn new(components: [DopplerComponent; 2]) -> Result<Self> {
        let p = Self { components };
        p.validate()?;
        Ok(p)
    }

    /// COST207 GAUS1 shape for maximum Doppler shift `fd`.
    pub fn gaus1(fd: f64) -> Self {
        Self {
            components: [
                DopplerComponent {
                    center_hz: -0.8 * fd,
                    gain: 1.0,
                    sigma_hz: 0.05 * fd,
                },
                DopplerComponent {
                    center_hz: 0.4 * fd,
                    gain: 0.1,
                    sigma_hz: 0.1 * fd,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.components.iter().enumerate() {
            if !(c.sigma_hz > 0.0) || !c.sigma_hz.is_finite() {
                return Err(Error::config(
                    format!("channel.doppler[{i}].sigma_hz"),
                    "must be positive",
                ));
            }
            if !(c.gain >= 0.0) || !c.gain.is_finite() {
                return Err(Error::config(
                    format!("channel.doppler[{i}].gain"),
                    "must be non-negative",
                ));
            }
            if !c.center_hz.is_finite() {
                return Err(Error::config(
                    format!("channel.doppler[{i}].center_hz"),
                    "must be finite",
                ));
            }
        }
        if !(self.components.iter().map(|c| c.gain).sum::<f64>() > 0.0) {
            return Err(Error::config(
                "channel.doppler",
                "power gains must not all be zero",
            ));
        }
        Ok(())
    }
}

/// Normalized two-component Gaussian mixture density
/// `(1/ΣA_i) Σ A_i/√(2πσ_i²) · exp(−(f − f_i)²/(2σ_i²))`.
pub fn doppler_psd<T: Real>(f: T, p: &DopplerParams) -> T {
    let total: f64 = p.components.iter().map(|c| c.gain).sum();
    let mut acc = T::zero();
    for c in &p.components {
        let s2 = T::lit(c.sigma_hz * c.sigma_hz);
        let d = f - T::lit(c.center_hz);
        let peak = T::lit(c.gain) / (T::lit(2.0) * T::PI() * s2).sqrt();
        acc += peak * (-(d * d) / (T::lit(2.0) * s2)).exp();
    }
    acc / T::lit(total)
}
