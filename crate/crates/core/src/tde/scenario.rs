use num_complex::Complex;
use rand::Rng;

use super::spectrum::{dft, idft};
use crate::channel::{awgn_in_place, awgn_real_in_place};
use crate::{Error, Real, Result};

/// A multipath delay-estimation problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TdeScenario<T> {
    /// Known pulse, `N` samples, `N` a power of two.
    pub pulse: Vec<Complex<T>>,
    /// Sampling interval `T_s` in seconds; the window is `T = N·T_s`.
    pub sample_interval: T,
    /// Path amplitudes `a_k`.
    pub amplitudes: Vec<T>,
    /// Path delays `τ_k` in seconds, `0 ≤ τ_k < T`.
    pub delays: Vec<T>,
    /// Per-sample noise variance `σ²_ω = σ²_ω̃ / T_s`; zero disables noise.
    pub noise_variance: T,
}

impl<T: Real> TdeScenario<T> {
    pub fn new(
        pulse: Vec<Complex<T>>,
        sample_interval: T,
        amplitudes: Vec<T>,
        delays: Vec<T>,
    ) -> Result<Self> {
        let s = Self {
            pulse,
            sample_interval,
            amplitudes,
            delays,
            noise_variance: T::zero(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.pulse.len()
    }

    pub fn paths(&self) -> usize {
        self.delays.len()
    }

    /// Observation window `T = N·T_s`.
    pub fn window(&self) -> T {
        T::from_usize_lossy(self.n()) * self.sample_interval
    }

    pub fn pulse_energy(&self) -> T {
        self.pulse.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    pub fn is_real(&self) -> bool {
        self.pulse.iter().all(|z| z.im == T::zero())
    }

    /// Sets the noise so that the mean pulse power per sample over the
    /// window, `E_s/N`, is `snr_db` above the per-sample noise variance.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        let mean_power = self.pulse_energy() / T::from_usize_lossy(self.n());
        self.noise_variance = mean_power / T::lit(crate::scalar::db_to_linear(snr_db));
        self
    }

    /// Sets the per-sample variance from a continuous white-noise level
    /// `σ²_ω̃` after ideal low-pass filtering and sampling: `σ²_ω̃ / T_s`.
    pub fn with_noise_density(mut self, density: T) -> Self {
        self.noise_variance = density / self.sample_interval;
        self
    }

    pub fn without_noise(mut self) -> Self {
        self.noise_variance = T::zero();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::config(
                "tde.n",
                format!("sample count must be a power of 2 (>= 4), got {n}"),
            ));
        }
        if !(self.sample_interval > T::zero()) {
            return Err(Error::config("tde.sample_interval", "must be positive"));
        }
        if self.delays.is_empty() {
            return Err(Error::config("tde.delays", "at least one path required"));
        }
        if self.amplitudes.len() != self.delays.len() {
            return Err(Error::config(
                "tde.amplitudes",
                "one amplitude per delay required",
            ));
        }
        let t = self.window();
        if let Some(d) = self.delays.iter().find(|&&d| !(d >= T::zero() && d < t)) {
            return Err(Error::input(format!(
                "delay {d} s outside the observation window [0, {t})"
            )));
        }
        if !(self.noise_variance >= T::zero()) {
            return Err(Error::config("tde.noise_variance", "must be non-negative"));
        }
        Ok(())
    }
}

/// Phase of bin `n` for a delay of `delay_samples`, with frequencies above
/// `N/2` wrapped to negative values.
fn delay_factor<T: Real>(bin: usize, n: usize, delay_samples: T, real: bool) -> Complex<T> {
    let two_pi = T::lit(2.0) * T::PI();
    if 2 * bin == n {
        // Nyquist bin: a real signal needs a real coefficient.
        let phase = -T::PI() * delay_samples;
        return if real {
            Complex::new(phase.cos(), T::zero())
        } else {
            Complex::from_polar(T::one(), phase)
        };
    }
    let f = if 2 * bin < n {
        T::from_usize_lossy(bin)
    } else {
        -T::from_usize_lossy(n - bin)
    };
    Complex::from_polar(
        T::one(),
        -two_pi * f * delay_samples / T::from_usize_lossy(n),
    )
}

/// Superposition of delayed, scaled pulses plus noise.
///
/// Fractional delays are applied as linear phases in the DFT domain, so the
/// shifts are circular over the window. Real pulses produce real output and
/// real noise; complex pulses get circular complex noise of the same total
/// variance.
pub fn synthesize_received<T: Real, R: Rng + ?Sized>(
    scenario: &TdeScenario<T>,
    rng: &mut R,
) -> Result<Vec<Complex<T>>> {
    scenario.validate()?;
    let n = scenario.n();
    let real = scenario.is_real();
    let spec = dft(&scenario.pulse);
    let mut out_spec = vec![Complex::new(T::zero(), T::zero()); n];
    for (&a, &tau) in scenario.amplitudes.iter().zip(&scenario.delays) {
        let d = tau / scenario.sample_interval;
        for (bin, (o, s)) in out_spec.iter_mut().zip(&spec).enumerate() {
            *o += s * delay_factor(bin, n, d, real) * a;
        }
    }
    let mut r = idft(&out_spec);
    if real {
        let mut re: Vec<T> = r.iter().map(|z| z.re).collect();
        if scenario.noise_variance > T::zero() {
            awgn_real_in_place(&mut re, scenario.noise_variance, rng)?;
        }
        r = re.into_iter().map(|x| Complex::new(x, T::zero())).collect();
    } else if scenario.noise_variance > T::zero() {
        awgn_in_place(&mut r, scenario.noise_variance, rng)?;
    }
    Ok(r)
}

/// Unit-energy real pulse: `sinc(B·(k − c))` under a Gaussian window of
/// standard deviation `width` samples. `bandwidth` is the fraction of the
/// Nyquist band the sinc occupies.
pub fn windowed_sinc_pulse<T: Real>(
    n: usize,
    bandwidth: f64,
    center: f64,
    width: f64,
) -> Vec<Complex<T>> {
    let raw: Vec<f64> = (0..n)
        .map(|k| {
            let x = k as f64 - center;
            let arg = std::f64::consts::PI * bandwidth * x;
            let sinc = if x == 0.0 { 1.0 } else { arg.sin() / arg };
            sinc * (-(x * x) / (2.0 * width * width)).exp()
        })
        .collect();
    let e = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.into_iter()
        .map(|v| Complex::new(T::lit(v / e), T::zero()))
        .collect()
}

/// Default pulse: 40 % of the Nyquist band, centred at `N/8`, window width
/// of four main-lobe half-widths.
pub fn default_pulse<T: Real>(n: usize) -> Vec<Complex<T>> {
    let bandwidth = 0.4;
    windowed_sinc_pulse(n, bandwidth, (n / 8) as f64, 4.0 / bandwidth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn scenario(delays: Vec<f64>, amps: Vec<f64>) -> TdeScenario<f64> {
        TdeScenario::new(default_pulse(64), 1e-6, amps, delays).unwrap()
    }

    #[test]
    fn identity_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = scenario(vec![0.0], vec![1.0]);
        let r = synthesize_received(&s, &mut rng).unwrap();
        for (a, b) in r.iter().zip(&s.pulse) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn on_grid_delay_is_circular_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = scenario(vec![7e-6], vec![1.0]);
        let r = synthesize_received(&s, &mut rng).unwrap();
        for (k, rk) in r.iter().enumerate() {
            assert!((rk - s.pulse[(k + 64 - 7) % 64]).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn paths_superpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let both = synthesize_received(&scenario(vec![3.3e-6, 10.1e-6], vec![1.0, 0.5]), &mut rng)
            .unwrap();
        let a = synthesize_received(&scenario(vec![3.3e-6], vec![1.0]), &mut rng).unwrap();
        let b = synthesize_received(&scenario(vec![10.1e-6], vec![0.5]), &mut rng).unwrap();
        for k in 0..64 {
            assert!((both[k] - a[k] - b[k]).norm() < 1e-12);
            assert_eq!(both[k].im, 0.0);
        }
    }

    #[test]
    fn rejects_out_of_window_delay() {
        assert!(TdeScenario::new(default_pulse::<f64>(64), 1e-6, vec![1.0], vec![64e-6]).is_err());
        assert!(TdeScenario::new(default_pulse::<f64>(64), 1e-6, vec![1.0], vec![-1e-9]).is_err());
        assert!(TdeScenario::new(default_pulse::<f64>(48), 1e-6, vec![1.0], vec![0.0]).is_err());
        assert!(
            TdeScenario::new(default_pulse::<f64>(64), 1e-6, vec![1.0, 2.0], vec![0.0]).is_err()
        );
    }

    #[test]
    fn noise_level_matches_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = scenario(vec![5e-6], vec![1.0]).with_snr_db(10.0);
        assert!((s.noise_variance - (1.0 / 64.0) / 10.0).abs() < 1e-15);
        let clean = synthesize_received(&s.clone().without_noise(), &mut rng).unwrap();
        let mut acc = 0.0;
        let trials = 2000;
        for _ in 0..trials {
            let r = synthesize_received(&s, &mut rng).unwrap();
            acc += r
                .iter()
                .zip(&clean)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>();
        }
        let var = acc / (trials * 64) as f64;
        assert!((var / s.noise_variance - 1.0).abs() < 0.02);
        let d = s.clone().with_noise_density(2e-12);
        assert!((d.noise_variance - 2e-6).abs() < 1e-18);
    }

    #[test]
    fn default_pulse_has_unit_energy() {
        let p = default_pulse::<f64>(128);
        let e: f64 = p.iter().map(C::norm_sqr).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }
}
