use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::ChannelMatrix;
use crate::matrix::CMatrix;
use crate::{Error, Real, Result};

/// Uniform linear arrays at both ends. Lengths are normalized by the carrier
/// wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_tx: usize,
    pub n_rx: usize,
    pub tx_length: f64,
    pub rx_length: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
}

impl ArrayGeometry {
    /// Normalized transmit spacing `L_t / n_t`.
    pub fn tx_spacing(&self) -> f64 {
        self.tx_length / self.n_tx as f64
    }

    /// Normalized receive spacing `L_r / n_r`.
    pub fn rx_spacing(&self) -> f64 {
        self.rx_length / self.n_rx as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::config(
                "channel.geometry",
                "antenna counts must be at least 1",
            ));
        }
        if !(self.tx_length > 0.0 && self.rx_length > 0.0) {
            return Err(Error::config(
                "channel.geometry",
                "array lengths must be positive",
            ));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::config(
                "channel.geometry.wavelength",
                "must be positive",
            ));
        }
        Ok(())
    }
}

/// One physical path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    /// Complex attenuation `(re, im)`.
    pub attenuation: [f64; 2],
    /// Directional cosine at the transmit array, `cos φ`.
    pub tx_cosine: f64,
    /// Directional cosine at the receive array.
    pub rx_cosine: f64,
    /// Path length between transmit antenna 1 and receive antenna 1, meters.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArraySide {
    Transmit,
    Receive,
}

/// Unit spatial signature `e(ω)` of an `n`-element array with normalized
/// spacing `spacing`: entry `k` is `exp(−j2πkΔω)/√n`.
pub fn spatial_signature<T: Real>(omega: T, n: usize, spacing: T) -> Result<Vec<Complex<T>>> {
    if !(omega.abs() <= T::one()) {
        return Err(Error::input(format!(
            "directional cosine {omega} outside [-1, 1]"
        )));
    }
    if n == 0 || !(spacing > T::zero()) {
        return Err(Error::input(
            "array needs at least one element and positive spacing",
        ));
    }
    let norm = T::one() / T::from_usize_lossy(n).sqrt();
    let two_pi = T::lit(2.0) * T::PI();
    Ok((0..n)
        .map(|k| Complex::from_polar(norm, -two_pi * T::from_usize_lossy(k) * spacing * omega))
        .collect())
}

/// `H = Σ_paths a^b · e_r(ω_r) · e_t(ω_t)ᴴ` with
/// `a^b = a·√(n_t n_r)·exp(−j2πd/λ_c)`.
pub fn geometric_channel<T: Real>(
    paths: &[PathSpec],
    geom: &ArrayGeometry,
) -> Result<ChannelMatrix<T>> {
    if paths.is_empty() {
        return Err(Error::input("geometric channel needs at least one path"));
    }
    geom.validate().map_err(|e| Error::input(e.to_string()))?;
    let mut h = CMatrix::<T>::zeros(geom.n_rx, geom.n_tx);
    let scale = ((geom.n_tx * geom.n_rx) as f64).sqrt();
    for p in paths {
        let er = spatial_signature(T::lit(p.rx_cosine), geom.n_rx, T::lit(geom.rx_spacing()))?;
        let et = spatial_signature(T::lit(p.tx_cosine), geom.n_tx, T::lit(geom.tx_spacing()))?;
        let phase = -2.0 * std::f64::consts::PI * p.distance / geom.wavelength;
        let a =
            Complex::new(p.attenuation[0], p.attenuation[1]) * Complex::from_polar(scale, phase);
        let a = Complex::new(T::lit(a.re), T::lit(a.im));
        for (j, r) in er.iter().enumerate() {
            for (i, t) in et.iter().enumerate() {
                h[(j, i)] += a * r * t.conj();
            }
        }
    }
    ChannelMatrix::new(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn broadside_signature() {
        for n in 1..6 {
            let e = spatial_signature(0.0, n, 0.5).unwrap();
            for z in e {
                assert!((z - C::new(1.0 / (n as f64).sqrt(), 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn endfire_half_wavelength() {
        let e = spatial_signature(1.0, 2, 0.5).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((e[0] - C::new(s, 0.0)).norm() < 1e-15);
        assert!((e[1] - C::new(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unit_norm_and_domain() {
        for k in 0..100 {
            let w = -1.0 + 0.02 * k as f64;
            let e = spatial_signature(w, 7, 0.37).unwrap();
            let n: f64 = e.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!(spatial_signature(1.01, 3, 0.5).is_err());
        assert!(spatial_signature(f64::NAN, 3, 0.5).is_err());
    }

    #[test]
    fn unit_phase_single_path_is_all_ones() {
        let geom = ArrayGeometry {
            n_tx: 3,
            n_rx: 2,
            tx_length: 1.5,
            rx_length: 1.0,
            wavelength: 0.125,
        };
        let path = PathSpec {
            attenuation: [1.0, 0.0],
            tx_cosine: 0.0,
            rx_cosine: 0.0,
            distance: 0.125,
        };
        let h: ChannelMatrix<f64> = geometric_channel(&[path], &geom).unwrap();
        for z in h.matrix().as_slice() {
            assert!((z - C::new(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(geometric_channel::<f64>(&[], &geom).is_err());
    }
}
