use rayon::prelude::*;

use super::TrialSeed;
use crate::tde::{synthesize_received, DelayEstimate, DelayEstimator, SearchSpec, TdeScenario};
use crate::{Error, Result};

/// A delay-estimation Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TdeExperiment {
    /// Pulse, sampling, true paths. Its noise variance is overwritten for
    /// each SNR.
    pub scenario: TdeScenario<f64>,
    pub threshold_fraction: f64,
    pub search: SearchSpec<f64>,
    /// SNR values in dB; `+inf` disables noise.
    pub snr_db: Vec<f64>,
    pub trials: usize,
}

impl TdeExperiment {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.search.validate()?;
        if self.trials == 0 {
            return Err(Error::config("tde.trials", "at least one trial required"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config(
                "tde.snr_db",
                "at least one SNR value required",
            ));
        }
        if let Some(s) = self
            .snr_db
            .iter()
            .find(|s| s.is_nan() || **s == f64::NEG_INFINITY)
        {
            return Err(Error::config("tde.snr_db", format!("invalid SNR {s}")));
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return Err(Error::config(
                "tde.threshold_fraction",
                "must lie in (0, 1)",
            ));
        }
        Ok(())
    }

    pub fn scenario_at(&self, snr_db: f64) -> TdeScenario<f64> {
        if snr_db == f64::INFINITY {
            self.scenario.clone().without_noise()
        } else {
            self.scenario.clone().with_snr_db(snr_db)
        }
    }

    /// Builds the estimator. `Ok(Err(_))` is an identifiability failure,
    /// which trials record instead of aborting.
    pub fn estimator(&self) -> Result<std::result::Result<DelayEstimator<f64>, String>> {
        match DelayEstimator::new(
            &self.scenario.pulse,
            self.scenario.sample_interval,
            self.scenario.paths(),
            self.threshold_fraction,
            self.search.clone(),
        ) {
            Ok(e) => Ok(Ok(e)),
            Err(Error::Identifiability(m)) => Ok(Err(m)),
            Err(e) => Err(e),
        }
    }
}

/// Outcome of one estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TdeTrial {
    pub snr_db: f64,
    pub trial: u64,
    /// True delays, ascending, seconds.
    pub tau_true: Vec<f64>,
    pub outcome: std::result::Result<DelayEstimate<f64>, String>,
}

impl TdeTrial {
    /// `|τ̂_k − τ_k|` per path after sorting both, or `None` on failure.
    pub fn abs_errors(&self) -> Option<Vec<f64>> {
        let est = self.outcome.as_ref().ok()?;
        Some(
            self.tau_true
                .iter()
                .zip(&est.delays)
                .map(|(t, h)| (h - t).abs())
                .collect(),
        )
    }
}

/// Per-SNR statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TdeSummary {
    pub snr_db: f64,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// Root-mean-square delay error per path over successful trials,
    /// seconds; NaN when every trial failed.
    pub rmse: Vec<f64>,
    pub median_abs_error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdeSweep {
    pub summaries: Vec<TdeSummary>,
    pub trials: Vec<TdeTrial>,
}

fn sorted_truth(s: &TdeScenario<f64>) -> Vec<f64> {
    let mut t = s.delays.clone();
    t.sort_by(f64::total_cmp);
    t
}

fn run_trial(
    exp: &TdeExperiment,
    estimator: &std::result::Result<DelayEstimator<f64>, String>,
    snr_db: f64,
    seed: TrialSeed,
) -> Result<TdeTrial> {
    let scenario = exp.scenario_at(snr_db);
    let mut rng = seed.rng();
    let received = synthesize_received(&scenario, &mut rng)?;
    let outcome = match estimator {
        Err(m) => Err(m.clone()),
        Ok(est) => match est.estimate(&received) {
            Ok(e) => Ok(e),
            Err(e @ (Error::Identifiability(_) | Error::DegenerateDelays)) => Err(e.to_string()),
            Err(e) => return Err(e),
        },
    };
    Ok(TdeTrial {
        snr_db,
        trial: seed.index,
        tau_true: sorted_truth(&scenario),
        outcome,
    })
}

/// A single estimate at `snr_db` using the stream of `seed`.
pub fn tde_trial(exp: &TdeExperiment, snr_db: f64, seed: TrialSeed) -> Result<TdeTrial> {
    exp.validate()?;
    run_trial(exp, &exp.estimator()?, snr_db, seed)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn summarize(snr_db: f64, paths: usize, trials: &[TdeTrial]) -> TdeSummary {
    let errs: Vec<Vec<f64>> = trials.iter().filter_map(TdeTrial::abs_errors).collect();
    let failures = trials.len() - errs.len();
    let rmse = (0..paths)
        .map(|k| {
            if errs.is_empty() {
                f64::NAN
            } else {
                (errs.iter().map(|e| e[k] * e[k]).sum::<f64>() / errs.len() as f64).sqrt()
            }
        })
        .collect();
    let median_abs_error = (0..paths)
        .map(|k| median(errs.iter().map(|e| e[k]).collect()))
        .collect();
    TdeSummary {
        snr_db,
        trials: trials.len(),
        failures,
        failure_rate: failures as f64 / trials.len().max(1) as f64,
        rmse,
        median_abs_error,
    }
}

/// Runs `trials` estimates per SNR. Trial `t` at SNR index `i` uses
/// `TrialSeed::new(master_seed, i, t)`, so adding trials leaves earlier ones
/// unchanged.
pub fn tde_sweep(exp: &TdeExperiment, master_seed: u64) -> Result<TdeSweep> {
    exp.validate()?;
    let estimator = exp.estimator()?;
    let mut summaries = Vec::with_capacity(exp.snr_db.len());
    let mut all = Vec::with_capacity(exp.snr_db.len() * exp.trials);
    for (i, &snr) in exp.snr_db.iter().enumerate() {
        let trials: Vec<TdeTrial> = (0..exp.trials as u64)
            .into_par_iter()
            .map(|t| {
                run_trial(
                    exp,
                    &estimator,
                    snr,
                    TrialSeed::new(master_seed, i as u64, t),
                )
            })
            .collect::<Result<_>>()?;
        summaries.push(summarize(snr, exp.scenario.paths(), &trials));
        all.extend(trials);
    }
    Ok(TdeSweep {
        summaries,
        trials: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tde::default_pulse;

    const TS: f64 = 1e-6;

    fn experiment(snr_db: Vec<f64>, trials: usize) -> TdeExperiment {
        TdeExperiment {
            scenario: TdeScenario::new(
                default_pulse(64),
                TS,
                vec![1.0, 0.8],
                vec![20.3e-6, 25.3e-6],
            )
            .unwrap(),
            threshold_fraction: 0.1,
            search: SearchSpec::default(),
            snr_db,
            trials,
        }
    }

    #[test]
    fn noiseless_entry_is_exact() {
        let sweep = tde_sweep(&experiment(vec![f64::INFINITY], 2), 1).unwrap();
        let s = &sweep.summaries[0];
        assert_eq!(s.failures, 0);
        assert!(s.rmse.iter().all(|&r| r <= TS / 256.0), "{:?}", s.rmse);
    }

    #[test]
    fn more_trials_extend_fewer() {
        let a = tde_sweep(&experiment(vec![10.0], 3), 5).unwrap();
        let b = tde_sweep(&experiment(vec![10.0], 6), 5).unwrap();
        assert_eq!(a.trials[..], b.trials[..3]);
    }

    #[test]
    fn identifiability_failures_are_counted() {
        let mut exp = experiment(vec![10.0], 2);
        // A pure tone occupies one bin, too few for two paths.
        exp.scenario.pulse = (0..64)
            .map(|k| {
                num_complex::Complex::new(
                    (2.0 * std::f64::consts::PI * 5.0 * k as f64 / 64.0).cos(),
                    0.0,
                )
            })
            .collect();
        let sweep = tde_sweep(&exp, 0).unwrap();
        assert_eq!(sweep.summaries[0].failures, 2);
        assert!(sweep.summaries[0].rmse[0].is_nan());
    }

    #[test]
    fn bad_experiment_rejected() {
        assert!(tde_sweep(&experiment(vec![10.0], 0), 0)
            .unwrap_err()
            .is_config());
        assert!(tde_sweep(&experiment(vec![], 1), 0)
            .unwrap_err()
            .is_config());
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(vec![4.0, 1.0, 3.0, 2.0]), 2.5);
        assert!(median(vec![]).is_nan());
    }
}
