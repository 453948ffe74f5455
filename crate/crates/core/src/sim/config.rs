//! Experiment files.
//!
//! One TOML document describes a link (`modem`, `fec`, `stbc`, `channel`),
//! how to sweep it (`sweep`, `stop`), and optionally a constellation capture
//! and a delay-estimation scenario. Every section and every key has a
//! default, so a file only needs to mention what it changes.

use std::path::Path;
use std::time::Duration;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{ChannelModel, Coding, LinkConfig, StopRule, TdeExperiment};
use crate::channel::{geometric_channel, ArrayGeometry, DopplerComponent, DopplerParams, PathSpec};
use crate::fec::{DecodeAlgorithm, SccCode};
use crate::modem::LlrMethod;
use crate::stbc::StbcScheme;
use crate::tde::{windowed_sinc_pulse, SearchSpec, TdeScenario};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModemSection {
    pub order: usize,
    /// `max-log` or `exact`.
    pub llr: String,
}

impl Default for ModemSection {
    fn default() -> Self {
        Self {
            order: 16,
            llr: "max-log".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FecSection {
    /// `scc` or `none`.
    pub code: String,
    pub interleaver_length: usize,
    pub interleaver_k: u64,
    /// `map`, `log-map` or `max-log-map`.
    pub algorithm: String,
    pub iterations: usize,
}

impl Default for FecSection {
    fn default() -> Self {
        Self {
            code: "scc".into(),
            interleaver_length: 4096,
            interleaver_k: 1,
            algorithm: "log-map".into(),
            iterations: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StbcSection {
    /// `none`, `g2` or `g3`.
    pub scheme: String,
    pub n_rx: usize,
}

impl Default for StbcSection {
    fn default() -> Self {
        Self {
            scheme: "g2".into(),
            n_rx: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DopplerSection {
    /// `gaus1` (scaled by `max_doppler_hz`) or `custom` (uses `components`).
    pub preset: String,
    pub max_doppler_hz: f64,
    pub components: Vec<DopplerComponent>,
    pub f_min_hz: Option<f64>,
    pub f_max_hz: Option<f64>,
    pub points: usize,
}

impl Default for DopplerSection {
    fn default() -> Self {
        Self {
            preset: "gaus1".into(),
            max_doppler_hz: 100.0,
            components: Vec::new(),
            f_min_hz: None,
            f_max_hz: None,
            points: 1001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    /// `rayleigh-iid`, `awgn` or `geometric`.
    pub model: String,
    /// Rayleigh redraw policy: `block` or `frame`.
    pub fading: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<ArrayGeometry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<PathSpec>,
    pub doppler: DopplerSection,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            model: "rayleigh-iid".into(),
            fading: "block".into(),
            geometry: None,
            paths: Vec::new(),
            doppler: DopplerSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub ebn0_db: Vec<f64>,
    pub seed: u64,
    /// Information bits per frame on uncoded links.
    pub frame_bits: usize,
    pub noiseless: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            ebn0_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            seed: 1,
            frame_bits: 4096,
            noiseless: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopSection {
    pub min_errors: u64,
    pub max_bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
    pub batch_frames: usize,
}

impl Default for StopSection {
    fn default() -> Self {
        let d = StopRule::default();
        Self {
            min_errors: d.min_errors,
            max_bits: d.max_bits,
            max_seconds: None,
            batch_frames: d.batch_frames,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptureSection {
    pub ebn0_db: f64,
    pub symbols: usize,
}

impl Default for CaptureSection {
    fn default() -> Self {
        Self {
            ebn0_db: 10.0,
            symbols: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    /// `windowed-sinc` or `samples`.
    pub kind: String,
    /// Fraction of the Nyquist band occupied by the sinc.
    pub bandwidth: f64,
    /// Peak position in samples; defaults to `n/8`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    /// Gaussian window standard deviation in samples; defaults to
    /// `4/bandwidth`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Explicit samples for `kind = "samples"`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub re: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<f64>,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            kind: "windowed-sinc".into(),
            bandwidth: 0.4,
            center: None,
            width: None,
            re: Vec::new(),
            im: Vec::new(),
        }
    }
}

/// Search settings. Steps are in sampling intervals, the window in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub coarse_step: f64,
    pub fine_step: f64,
    pub min_separation: f64,
    pub max_sweeps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

impl Default for SearchSection {
    fn default() -> Self {
        let d = SearchSpec::<f64>::default();
        Self {
            coarse_step: d.coarse_step,
            fine_step: d.fine_step,
            min_separation: d.min_separation,
            max_sweeps: d.max_sweeps,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TdeSection {
    pub n: usize,
    /// Seconds.
    pub sample_interval: f64,
    pub amplitudes: Vec<f64>,
    /// Seconds.
    pub delays: Vec<f64>,
    /// `inf` means noiseless. `tde-run` uses the first entry.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub threshold_fraction: f64,
    pub pulse: PulseSection,
    pub search: SearchSection,
}

impl Default for TdeSection {
    fn default() -> Self {
        Self {
            n: 64,
            sample_interval: 1e-6,
            amplitudes: vec![1.0, 0.8],
            delays: vec![20.3e-6, 25.3e-6],
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 200,
            threshold_fraction: 0.1,
            pulse: PulseSection::default(),
            search: SearchSection::default(),
        }
    }
}

/// A whole experiment file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub modem: ModemSection,
    pub fec: FecSection,
    pub stbc: StbcSection,
    pub channel: ChannelSection,
    pub sweep: SweepSection,
    pub stop: StopSection,
    pub capture: CaptureSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tde: Option<TdeSection>,
}

fn parse_llr(s: &str) -> Result<LlrMethod> {
    match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "max-log" | "maxlog" => Ok(LlrMethod::MaxLog),
        "exact" => Ok(LlrMethod::Exact),
        other => Err(Error::config(
            "modem.llr",
            format!("unknown LLR method `{other}`"),
        )),
    }
}

fn llr_name(m: LlrMethod) -> &'static str {
    match m {
        LlrMethod::MaxLog => "max-log",
        LlrMethod::Exact => "exact",
    }
}

fn finite(field: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(field, format!("must be finite, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Checks every section that is present.
    pub fn validate(&self) -> Result<()> {
        self.link_config()?;
        self.stop_rule()?;
        if self.sweep.ebn0_db.is_empty() {
            return Err(Error::config(
                "sweep.ebn0_db",
                "at least one Eb/N0 value required",
            ));
        }
        if let Some(x) = self
            .sweep
            .ebn0_db
            .iter()
            .find(|x| x.is_nan() || **x == f64::NEG_INFINITY)
        {
            return Err(Error::config("sweep.ebn0_db", format!("invalid Eb/N0 {x}")));
        }
        if self.capture.ebn0_db.is_nan() {
            return Err(Error::config("capture.ebn0_db", "must be a number"));
        }
        self.doppler()?;
        self.psd_range()?;
        if self.tde.is_some() {
            self.tde_experiment()?;
        }
        Ok(())
    }

    /// Same experiment with canonical spellings of every name.
    pub fn normalized(&self) -> Result<Self> {
        self.validate()?;
        let mut out = self.clone();
        out.modem.llr = llr_name(parse_llr(&self.modem.llr)?).into();
        out.fec.code = self.fec.code.to_ascii_lowercase();
        out.fec.algorithm = DecodeAlgorithm::parse(&self.fec.algorithm)?.name().into();
        out.stbc.scheme = StbcScheme::parse(&self.stbc.scheme)?.name().into();
        out.channel.model = self.channel.model.to_ascii_lowercase();
        out.channel.fading = self.channel.fading.to_ascii_lowercase();
        out.channel.doppler.preset = self.channel.doppler.preset.to_ascii_lowercase();
        if let Some(t) = out.tde.as_mut() {
            t.pulse.kind = t.pulse.kind.to_ascii_lowercase();
        }
        Ok(out)
    }

    pub fn link_config(&self) -> Result<LinkConfig> {
        let stbc = StbcScheme::parse(&self.stbc.scheme)?;
        let n_rx = self.stbc.n_rx;
        let channel = match self.channel.model.to_ascii_lowercase().as_str() {
            "awgn" => ChannelModel::Awgn,
            "rayleigh-iid" | "rayleigh" => ChannelModel::Rayleigh {
                per_block: match self.channel.fading.to_ascii_lowercase().as_str() {
                    "block" => true,
                    "frame" => false,
                    other => {
                        return Err(Error::config(
                            "channel.fading",
                            format!("expected `block` or `frame`, got `{other}`"),
                        ))
                    }
                },
            },
            "geometric" => {
                let geom = self.channel.geometry.ok_or_else(|| {
                    Error::config("channel.geometry", "required for the geometric model")
                })?;
                geom.validate()?;
                if self.channel.paths.is_empty() {
                    return Err(Error::config(
                        "channel.paths",
                        "geometric model needs at least one path",
                    ));
                }
                let h = geometric_channel::<f64>(&self.channel.paths, &geom)
                    .map_err(|e| Error::config("channel.paths", e.to_string()))?;
                ChannelModel::Fixed(h)
            }
            other => {
                return Err(Error::config(
                    "channel.model",
                    format!("unknown model `{other}`"),
                ))
            }
        };
        let mut cfg = match self.fec.code.to_ascii_lowercase().as_str() {
            "none" => {
                LinkConfig::uncoded(self.modem.order, stbc, n_rx, channel, self.sweep.frame_bits)
            }
            "scc" => {
                let code = SccCode::standard(self.fec.interleaver_length, self.fec.interleaver_k)?;
                LinkConfig::coded(
                    self.modem.order,
                    code,
                    stbc,
                    n_rx,
                    channel,
                    self.fec.iterations,
                )
            }
            other => {
                return Err(Error::config(
                    "fec.code",
                    format!("expected `scc` or `none`, got `{other}`"),
                ))
            }
        };
        cfg.algorithm = DecodeAlgorithm::parse(&self.fec.algorithm)?;
        cfg.llr_method = parse_llr(&self.modem.llr)?;
        cfg.noiseless = self.sweep.noiseless;
        if matches!(cfg.coding, Coding::Scc(_)) && cfg.iterations == 0 {
            return Err(Error::config(
                "fec.iterations",
                "at least one iteration required",
            ));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn stop_rule(&self) -> Result<StopRule> {
        let max_duration = match self.stop.max_seconds {
            None => None,
            Some(s) if s > 0.0 && s.is_finite() => Some(Duration::from_secs_f64(s)),
            Some(s) => {
                return Err(Error::config(
                    "stop.max_seconds",
                    format!("must be positive, got {s}"),
                ))
            }
        };
        let rule = StopRule {
            min_errors: self.stop.min_errors,
            max_bits: self.stop.max_bits,
            max_duration,
            batch_frames: self.stop.batch_frames,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn doppler(&self) -> Result<DopplerParams> {
        let d = &self.channel.doppler;
        let p = match d.preset.to_ascii_lowercase().as_str() {
            "gaus1" => {
                if !(d.max_doppler_hz > 0.0 && d.max_doppler_hz.is_finite()) {
                    return Err(Error::config(
                        "channel.doppler.max_doppler_hz",
                        "must be positive",
                    ));
                }
                DopplerParams::gaus1(d.max_doppler_hz)
            }
            "custom" => {
                let comps: [DopplerComponent; 2] =
                    d.components.clone().try_into().map_err(|_| {
                        Error::config(
                            "channel.doppler.components",
                            "exactly two components required",
                        )
                    })?;
                DopplerParams::new(comps)?
            }
            other => {
                return Err(Error::config(
                    "channel.doppler.preset",
                    format!("expected `gaus1` or `custom`, got `{other}`"),
                ))
            }
        };
        p.validate()?;
        Ok(p)
    }

    /// Frequency grid for PSD dumps: `(f_min, f_max, points)`. Defaults to
    /// ±1.5 × the maximum Doppler shift (or ±5σ around the lobes).
    pub fn psd_range(&self) -> Result<(f64, f64, usize)> {
        let d = &self.channel.doppler;
        let p = self.doppler()?;
        let lo_default = p
            .components
            .iter()
            .map(|c| c.center_hz - 5.0 * c.sigma_hz)
            .fold(f64::INFINITY, f64::min);
        let hi_default = p
            .components
            .iter()
            .map(|c| c.center_hz + 5.0 * c.sigma_hz)
            .fold(f64::NEG_INFINITY, f64::max);
        let (lo_default, hi_default) = if d.preset.eq_ignore_ascii_case("gaus1") {
            (-1.5 * d.max_doppler_hz, 1.5 * d.max_doppler_hz)
        } else {
            (lo_default, hi_default)
        };
        let lo = finite("channel.doppler.f_min_hz", d.f_min_hz.unwrap_or(lo_default))?;
        let hi = finite("channel.doppler.f_max_hz", d.f_max_hz.unwrap_or(hi_default))?;
        if hi <= lo {
            return Err(Error::config(
                "channel.doppler.f_max_hz",
                "must exceed f_min_hz",
            ));
        }
        if d.points < 2 {
            return Err(Error::config(
                "channel.doppler.points",
                "at least two points required",
            ));
        }
        Ok((lo, hi, d.points))
    }

    pub fn tde_experiment(&self) -> Result<TdeExperiment> {
        let t = self
            .tde
            .as_ref()
            .ok_or_else(|| Error::config("tde", "section missing"))?;
        if t.n < 4 || !t.n.is_power_of_two() {
            return Err(Error::config(
                "tde.n",
                format!("must be a power of 2 (>= 4), got {}", t.n),
            ));
        }
        let pulse = match t.pulse.kind.to_ascii_lowercase().as_str() {
            "windowed-sinc" => {
                if !(t.pulse.bandwidth > 0.0 && t.pulse.bandwidth <= 1.0) {
                    return Err(Error::config("tde.pulse.bandwidth", "must lie in (0, 1]"));
                }
                let center = finite(
                    "tde.pulse.center",
                    t.pulse.center.unwrap_or((t.n / 8) as f64),
                )?;
                let width = t.pulse.width.unwrap_or(4.0 / t.pulse.bandwidth);
                if !(width > 0.0 && width.is_finite()) {
                    return Err(Error::config("tde.pulse.width", "must be positive"));
                }
                windowed_sinc_pulse(t.n, t.pulse.bandwidth, center, width)
            }
            "samples" => {
                if t.pulse.re.len() != t.n || !(t.pulse.im.is_empty() || t.pulse.im.len() == t.n) {
                    return Err(Error::config(
                        "tde.pulse.re",
                        format!("need exactly n = {} samples", t.n),
                    ));
                }
                (0..t.n)
                    .map(|k| Complex::new(t.pulse.re[k], t.pulse.im.get(k).copied().unwrap_or(0.0)))
                    .collect()
            }
            other => {
                return Err(Error::config(
                    "tde.pulse.kind",
                    format!("expected `windowed-sinc` or `samples`, got `{other}`"),
                ))
            }
        };
        let scenario = TdeScenario::new(
            pulse,
            t.sample_interval,
            t.amplitudes.clone(),
            t.delays.clone(),
        )
        .map_err(|e| match e {
            Error::InvalidInput(m) => Error::config("tde.delays", m),
            e => e,
        })?;
        let search = SearchSpec {
            window: t.search.window.map(|[a, b]| (a, b)),
            coarse_step: t.search.coarse_step,
            fine_step: t.search.fine_step,
            min_separation: t.search.min_separation,
            max_sweeps: t.search.max_sweeps,
        };
        let exp = TdeExperiment {
            scenario,
            threshold_fraction: t.threshold_fraction,
            search,
            snr_db: t.snr_db.clone(),
            trials: t.trials,
        };
        exp.validate()?;
        if let Some([lo, hi]) = t.search.window {
            let end = t.n as f64 * t.sample_interval;
            if !(lo >= 0.0 && hi <= end && hi > lo) {
                return Err(Error::config(
                    "tde.search.window",
                    format!("must be a non-empty interval within [0, {end})"),
                ));
            }
        }
        Ok(exp)
    }
}
