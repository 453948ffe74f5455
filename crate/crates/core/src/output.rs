//! CSV outputs.
//!
//! Each record type has a fixed header. Floats are written in Rust's
//! shortest round-trip form (scientific notation for very small or large
//! magnitudes), so identical inputs give identical
//! bytes. Files are written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use crate::channel::{doppler_psd, DopplerParams};
use crate::sim::{BerPoint, ScatterRecord, TdeSummary, TdeSweep};
use crate::Result;

/// A row of a CSV table.
pub trait CsvRecord {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

impl CsvRecord for BerPoint {
    fn header() -> &'static [&'static str] {
        &["ebn0_db", "bits", "errors", "ber", "ci95", "censored"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.ebn0_db),
            self.bits.to_string(),
            self.errors.to_string(),
            num(self.ber),
            num(self.ci95),
            self.censored.to_string(),
        ]
    }
}

impl CsvRecord for ScatterRecord {
    fn header() -> &'static [&'static str] {
        &[
            "index",
            "tx_label",
            "tx_re",
            "tx_im",
            "rx_re",
            "rx_im",
            "noise_variance",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.index.to_string(),
            self.tx_label.to_string(),
            num(self.tx_re),
            num(self.tx_im),
            num(self.rx_re),
            num(self.rx_im),
            num(self.noise_variance),
        ]
    }
}

/// One path of one delay-estimation trial. Failed trials have NaN in the
/// estimate columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TdeRow {
    pub snr_db: f64,
    pub trial: u64,
    pub path: usize,
    pub tau_true: f64,
    pub tau_hat: f64,
    pub abs_error: f64,
    pub residual: f64,
}

impl CsvRecord for TdeRow {
    fn header() -> &'static [&'static str] {
        &[
            "snr_db",
            "trial",
            "path",
            "tau_true",
            "tau_hat",
            "abs_error",
            "residual",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.snr_db),
            self.trial.to_string(),
            self.path.to_string(),
            num(self.tau_true),
            num(self.tau_hat),
            num(self.abs_error),
            num(self.residual),
        ]
    }
}

/// Flattens a sweep into per-path rows.
pub fn tde_rows(sweep: &TdeSweep) -> Vec<TdeRow> {
    let mut rows = Vec::new();
    for t in &sweep.trials {
        for (k, &tau) in t.tau_true.iter().enumerate() {
            let (tau_hat, residual) = match &t.outcome {
                Ok(e) => (e.delays[k], e.residual),
                Err(_) => (f64::NAN, f64::NAN),
            };
            rows.push(TdeRow {
                snr_db: t.snr_db,
                trial: t.trial,
                path: k,
                tau_true: tau,
                tau_hat,
                abs_error: (tau_hat - tau).abs(),
                residual,
            });
        }
    }
    rows
}

/// Per-SNR, per-path statistics row.
#[derive(Debug, Clone, PartialEq)]
pub struct TdeSummaryRow {
    pub snr_db: f64,
    pub path: usize,
    pub trials: usize,
    pub failures: usize,
    pub rmse: f64,
    pub median_abs_error: f64,
}

impl CsvRecord for TdeSummaryRow {
    fn header() -> &'static [&'static str] {
        &[
            "snr_db",
            "path",
            "trials",
            "failures",
            "rmse",
            "median_abs_error",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.snr_db),
            self.path.to_string(),
            self.trials.to_string(),
            self.failures.to_string(),
            num(self.rmse),
            num(self.median_abs_error),
        ]
    }
}

pub fn tde_summary_rows(summaries: &[TdeSummary]) -> Vec<TdeSummaryRow> {
    summaries
        .iter()
        .flat_map(|s| {
            (0..s.rmse.len()).map(move |k| TdeSummaryRow {
                snr_db: s.snr_db,
                path: k,
                trials: s.trials,
                failures: s.failures,
                rmse: s.rmse[k],
                median_abs_error: s.median_abs_error[k],
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdSample {
    pub f_hz: f64,
    pub psd: f64,
}

impl CsvRecord for PsdSample {
    fn header() -> &'static [&'static str] {
        &["f_hz", "psd"]
    }

    fn fields(&self) -> Vec<String> {
        vec![num(self.f_hz), num(self.psd)]
    }
}

/// `points` evenly spaced samples of the Doppler PSD over `[f_min, f_max]`.
pub fn psd_samples(p: &DopplerParams, f_min: f64, f_max: f64, points: usize) -> Vec<PsdSample> {
    let step = if points > 1 {
        (f_max - f_min) / (points - 1) as f64
    } else {
        0.0
    };
    (0..points)
        .map(|i| {
            let f = f_min + step * i as f64;
            PsdSample {
                f_hz: f,
                psd: doppler_psd(f, p),
            }
        })
        .collect()
}

/// Serializes records with a header row.
pub fn to_csv_bytes<R: CsvRecord>(records: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(R::header())?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| crate::Error::Io(e.error))?;
    Ok(())
}

pub fn write_csv<R: CsvRecord>(path: impl AsRef<Path>, records: &[R]) -> Result<()> {
    write_atomic(path, &to_csv_bytes(records)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let bytes = to_csv_bytes::<BerPoint>(&[]).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "ebn0_db,bits,errors,ber,ci95,censored\n"
        );
    }

    #[test]
    fn ber_rows() {
        let pts: Vec<BerPoint> = (0..5)
            .map(|i| BerPoint::from_counts(i as f64, 1, 1000, 10 - i, false))
            .collect();
        let text = String::from_utf8(to_csv_bytes(&pts).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("0.0,1000,10,0.01,"));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1f64, 1.0 / 3.0, 2.5e-7, 123456.789, 1.9e-44] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"old").unwrap();
        write_csv(
            &p,
            &[PsdSample {
                f_hz: 1.0,
                psd: 0.5,
            }],
        )
        .unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "f_hz,psd\n1.0,0.5\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
