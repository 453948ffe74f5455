use std::time::{Duration, Instant};

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::link::{run_link_trial, LinkConfig};
use super::TrialSeed;
use crate::{Error, Result};

/// When to stop simulating one Eb/N0 point.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
    /// Wall-clock budget per point. Hitting it makes results depend on
    /// machine speed, so deterministic runs leave it unset.
    pub max_duration: Option<Duration>,
    /// Frames simulated between stop checks. Stopping only on batch
    /// boundaries keeps the frame count independent of thread count.
    pub batch_frames: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 100,
            max_bits: 100_000_000,
            max_duration: None,
            batch_frames: 32,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_errors == 0 {
            return Err(Error::config("stop.min_errors", "must be at least 1"));
        }
        if self.max_bits == 0 {
            return Err(Error::config("stop.max_bits", "must be at least 1"));
        }
        if self.batch_frames == 0 {
            return Err(Error::config("stop.batch_frames", "must be at least 1"));
        }
        Ok(())
    }
}

/// Measured bit error rate at one Eb/N0.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub errors: u64,
    /// `errors / bits`, or the one-sided 95 % upper bound when censored.
    pub ber: f64,
    /// Half-width of the normal-approximation 95 % binomial interval.
    pub ci95: f64,
    /// The budget ran out before `min_errors` were seen.
    pub censored: bool,
}

impl BerPoint {
    pub fn from_counts(ebn0_db: f64, frames: u64, bits: u64, errors: u64, censored: bool) -> Self {
        let p = if bits > 0 {
            errors as f64 / bits as f64
        } else {
            0.0
        };
        let ci95 = if bits > 0 {
            1.96 * (p * (1.0 - p) / bits as f64).sqrt()
        } else {
            0.0
        };
        let ber = if censored {
            ber_upper_bound(errors, bits)
        } else {
            p
        };
        Self {
            ebn0_db,
            frames,
            bits,
            errors,
            ber,
            ci95,
            censored,
        }
    }
}

/// One-sided 95 % upper confidence limit on the error probability from the
/// Poisson/chi-square relation: `χ²_{0.95}(2(e+1)) / (2·bits)`.
pub fn ber_upper_bound(errors: u64, bits: u64) -> f64 {
    if bits == 0 {
        return 1.0;
    }
    let chi = ChiSquared::new(2.0 * (errors as f64 + 1.0)).expect("positive degrees of freedom");
    (chi.inverse_cdf(0.95) / (2.0 * bits as f64)).min(1.0)
}

/// Simulates one point. Frame `f` of point `point` always uses
/// `TrialSeed::new(master_seed, point, f)`.
pub fn ber_point(
    cfg: &LinkConfig,
    ebn0_db: f64,
    point: u64,
    stop: &StopRule,
    master_seed: u64,
) -> Result<BerPoint> {
    stop.validate()?;
    cfg.validate()?;
    let started = Instant::now();
    let (mut frames, mut bits, mut errors) = (0u64, 0u64, 0u64);
    loop {
        let batch: Vec<(u64, u64)> = (frames..frames + stop.batch_frames as u64)
            .into_par_iter()
            .map(|f| {
                run_link_trial::<f64>(cfg, ebn0_db, TrialSeed::new(master_seed, point, f))
                    .map(|o| (o.tx_bits.len() as u64, o.bit_errors()))
            })
            .collect::<Result<_>>()?;
        for (b, e) in batch {
            bits += b;
            errors += e;
        }
        frames += stop.batch_frames as u64;
        if errors >= stop.min_errors {
            return Ok(BerPoint::from_counts(ebn0_db, frames, bits, errors, false));
        }
        let out_of_time = stop.max_duration.is_some_and(|d| started.elapsed() >= d);
        if bits >= stop.max_bits || out_of_time {
            return Ok(BerPoint::from_counts(ebn0_db, frames, bits, errors, true));
        }
    }
}

/// BER versus Eb/N0. Points are simulated in order; `on_point` sees each
/// result as soon as it is ready.
pub fn ber_sweep_with<F: FnMut(&BerPoint)>(
    cfg: &LinkConfig,
    ebn0_list: &[f64],
    stop: &StopRule,
    master_seed: u64,
    mut on_point: F,
) -> Result<Vec<BerPoint>> {
    if ebn0_list.is_empty() {
        return Err(Error::config(
            "sweep.ebn0_db",
            "at least one Eb/N0 value required",
        ));
    }
    stop.validate()?;
    let mut out = Vec::with_capacity(ebn0_list.len());
    for (i, &e) in ebn0_list.iter().enumerate() {
        let p = ber_point(cfg, e, i as u64, stop, master_seed)?;
        on_point(&p);
        out.push(p);
    }
    Ok(out)
}

pub fn ber_sweep(
    cfg: &LinkConfig,
    ebn0_list: &[f64],
    stop: &StopRule,
    master_seed: u64,
) -> Result<Vec<BerPoint>> {
    ber_sweep_with(cfg, ebn0_list, stop, master_seed, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ChannelModel;
    use crate::stbc::StbcScheme;

    #[test]
    fn rejects_zero_min_errors() {
        let cfg = LinkConfig::uncoded(4, StbcScheme::None, 1, ChannelModel::Awgn, 100);
        let stop = StopRule {
            min_errors: 0,
            ..StopRule::default()
        };
        let err = ber_sweep(&cfg, &[5.0], &stop, 1).unwrap_err();
        assert!(
            matches!(err, Error::InvalidConfig { ref field, .. } if field == "stop.min_errors")
        );
        assert!(ber_sweep(&cfg, &[], &StopRule::default(), 1)
            .unwrap_err()
            .is_config());
    }

    #[test]
    fn censoring_reports_upper_bound() {
        let cfg = LinkConfig::uncoded(4, StbcScheme::None, 1, ChannelModel::Awgn, 1000);
        let stop = StopRule {
            min_errors: 10,
            max_bits: 5000,
            batch_frames: 5,
            ..StopRule::default()
        };
        let p = ber_point(&cfg, 30.0, 0, &stop, 3).unwrap();
        assert!(p.censored);
        assert_eq!((p.bits, p.errors), (5000, 0));
        // -ln(0.05) ≈ 2.996 expected errors.
        assert!((p.ber * 5000.0 - 2.9957).abs() < 1e-3);
    }

    #[test]
    fn upper_bound_exceeds_point_estimate() {
        for e in [0u64, 1, 5, 50] {
            let b = ber_upper_bound(e, 10_000);
            assert!(b > e as f64 / 10_000.0);
        }
        assert_eq!(ber_upper_bound(0, 0), 1.0);
    }

    #[test]
    fn interval_half_width() {
        let p = BerPoint::from_counts(0.0, 1, 10_000, 100, false);
        assert_eq!(p.ber, 0.01);
        assert!((p.ci95 - 1.96 * (0.01f64 * 0.99 / 10_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn stops_after_enough_errors() {
        let cfg = LinkConfig::uncoded(16, StbcScheme::None, 1, ChannelModel::Awgn, 400);
        let stop = StopRule {
            min_errors: 50,
            batch_frames: 4,
            ..StopRule::default()
        };
        let p = ber_point(&cfg, 0.0, 0, &stop, 9).unwrap();
        assert!(!p.censored && p.errors >= 50);
        assert_eq!(p.frames % 4, 0);
        assert_eq!(p.bits, p.frames * 400);
    }
}
