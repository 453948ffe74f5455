use num_complex::Complex;
use rand::Rng;

use super::TrialSeed;
use crate::channel::{rayleigh_realization, ChannelMatrix};
use crate::fec::{DecodeAlgorithm, SccCode};
use crate::modem::{ebn0_to_esn0_db, Constellation, LlrMethod};
use crate::scalar::db_to_linear;
use crate::stbc::{apply_channel_with_variance, noise_variance_for_snr, StbcScheme};
use crate::{Bit, Error, Real, Result};

/// Floor on the per-symbol noise variance handed to the soft demapper when
/// noise is disabled, so LLRs stay finite.
const NOISELESS_LLR_VARIANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Coding {
    /// Information bits go straight to the modulator in frames of
    /// `frame_bits`.
    None {
        frame_bits: usize,
    },
    Scc(SccCode),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    /// Unit gain on every link; only noise.
    Awgn,
    /// iid CN(0, 1) gains, redrawn for every space-time block or held for a
    /// whole frame.
    Rayleigh { per_block: bool },
    /// Fixed matrix, e.g. from the geometric path model.
    Fixed(ChannelMatrix<f64>),
}

/// A complete transmit/receive chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub order: usize,
    pub coding: Coding,
    pub stbc: StbcScheme,
    pub n_rx: usize,
    pub channel: ChannelModel,
    pub algorithm: DecodeAlgorithm,
    pub iterations: usize,
    pub llr_method: LlrMethod,
    /// Skip noise injection entirely.
    pub noiseless: bool,
}

impl LinkConfig {
    /// Uncoded link with max-log demapping.
    pub fn uncoded(
        order: usize,
        stbc: StbcScheme,
        n_rx: usize,
        channel: ChannelModel,
        frame_bits: usize,
    ) -> Self {
        Self {
            order,
            coding: Coding::None { frame_bits },
            stbc,
            n_rx,
            channel,
            algorithm: DecodeAlgorithm::default(),
            iterations: 1,
            llr_method: LlrMethod::default(),
            noiseless: false,
        }
    }

    /// SCC-coded link.
    pub fn coded(
        order: usize,
        code: SccCode,
        stbc: StbcScheme,
        n_rx: usize,
        channel: ChannelModel,
        iterations: usize,
    ) -> Self {
        Self {
            coding: Coding::Scc(code),
            iterations,
            ..Self::uncoded(order, stbc, n_rx, channel, 0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        Constellation::<f64>::new(self.order)?;
        if self.n_rx == 0 {
            return Err(Error::config(
                "stbc.n_rx",
                "at least one receive antenna required",
            ));
        }
        match &self.coding {
            Coding::None { frame_bits } if *frame_bits == 0 => {
                return Err(Error::config(
                    "sweep.frame_bits",
                    "frame must carry at least one bit",
                ));
            }
            Coding::Scc(_) if self.iterations == 0 => {
                return Err(Error::config(
                    "fec.iterations",
                    "at least one iteration required",
                ));
            }
            _ => {}
        }
        if let ChannelModel::Fixed(h) = &self.channel {
            if h.n_rx() != self.n_rx || h.n_tx() != self.stbc.n_tx() {
                return Err(Error::config(
                    "channel",
                    format!(
                        "channel is {}x{} but the link needs {}x{} (n_rx x n_tx)",
                        h.n_rx(),
                        h.n_tx(),
                        self.n_rx,
                        self.stbc.n_tx()
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    pub fn information_bits(&self) -> usize {
        match &self.coding {
            Coding::None { frame_bits } => *frame_bits,
            Coding::Scc(code) => code.message_len(),
        }
    }

    pub fn coded_bits(&self) -> usize {
        match &self.coding {
            Coding::None { frame_bits } => *frame_bits,
            Coding::Scc(code) => code.codeword_len(),
        }
    }

    pub fn code_rate(&self) -> f64 {
        match &self.coding {
            Coding::None { .. } => 1.0,
            Coding::Scc(code) => code.rate(),
        }
    }

    /// Information bits per channel use per symbol bit: code rate times
    /// space-time rate.
    pub fn effective_rate(&self) -> f64 {
        self.code_rate() * self.stbc.rate()
    }

    /// Per-slot SNR `E_s/N_0` (linear) for an Eb/N0 in dB.
    pub fn slot_snr(&self, ebn0_db: f64) -> f64 {
        db_to_linear(ebn0_to_esn0_db(
            ebn0_db,
            self.bits_per_symbol(),
            self.effective_rate(),
        ))
    }

    /// Space-time blocks per frame after padding.
    pub fn blocks_per_frame(&self) -> usize {
        let k = self.bits_per_symbol();
        let spb = self.stbc.symbols_per_block();
        self.coded_bits().div_ceil(k).div_ceil(spb)
    }

    /// Zero bits appended to fill the last block.
    pub fn pad_bits(&self) -> usize {
        self.blocks_per_frame() * self.stbc.symbols_per_block() * self.bits_per_symbol()
            - self.coded_bits()
    }

    fn channel_draw<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelMatrix<T> {
        let n_tx = self.stbc.n_tx();
        match &self.channel {
            ChannelModel::Awgn => ChannelMatrix::unit(self.n_rx, n_tx),
            ChannelModel::Rayleigh { .. } => rayleigh_realization(self.n_rx, n_tx, rng),
            ChannelModel::Fixed(h) => ChannelMatrix::from_gains(
                h.n_rx(),
                h.n_tx(),
                h.matrix()
                    .as_slice()
                    .iter()
                    .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
                    .collect(),
            ),
        }
    }

    fn redraw_per_block(&self) -> bool {
        matches!(self.channel, ChannelModel::Rayleigh { per_block: true })
    }
}

/// Per-frame bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDiagnostics {
    pub blocks: usize,
    pub pad_bits: usize,
    /// Total complex noise variance per receive sample (0 when noiseless).
    pub noise_variance: f64,
    /// Mean over blocks of `Σ|α|²`.
    pub mean_channel_energy: f64,
    /// Message bit errors after each decoder iteration (coded links only).
    pub iteration_errors: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub tx_bits: Vec<Bit>,
    pub rx_bits: Vec<Bit>,
    pub diagnostics: FrameDiagnostics,
}

impl TrialOutcome {
    pub fn bit_errors(&self) -> u64 {
        count_errors(&self.tx_bits, &self.rx_bits)
    }
}

pub(crate) fn count_errors(a: &[Bit], b: &[Bit]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Detector output for a run of symbols pushed through the space-time link.
pub(crate) struct LinkSymbols<T> {
    pub labels: Vec<usize>,
    pub normalized: Vec<Complex<T>>,
    pub noise_variances: Vec<T>,
    pub mean_channel_energy: f64,
    pub noise_variance: f64,
}

/// Encodes `symbols` (a whole number of blocks) with the space-time code,
/// sends them through the channel and combines.
pub(crate) fn transmit_symbols<T: Real, R: Rng + ?Sized>(
    cfg: &LinkConfig,
    c: &Constellation<T>,
    symbols: &[Complex<T>],
    slot_snr: f64,
    noiseless: bool,
    rng: &mut R,
) -> Result<LinkSymbols<T>> {
    let spb = cfg.stbc.symbols_per_block();
    debug_assert_eq!(symbols.len() % spb, 0);
    let nv = if noiseless {
        T::zero()
    } else {
        noise_variance_for_snr(cfg.stbc.n_tx(), T::lit(slot_snr))?
    };
    let floor = T::lit(NOISELESS_LLR_VARIANCE);
    let mut out = LinkSymbols {
        labels: Vec::with_capacity(symbols.len()),
        normalized: Vec::with_capacity(symbols.len()),
        noise_variances: Vec::with_capacity(symbols.len()),
        mean_channel_energy: 0.0,
        noise_variance: nv.as_f64(),
    };
    let mut h = cfg.channel_draw::<T, _>(rng);
    let blocks = symbols.len() / spb;
    let mut energy = 0.0;
    for (b, chunk) in symbols.chunks(spb).enumerate() {
        if b > 0 && cfg.redraw_per_block() {
            h = cfg.channel_draw(rng);
        }
        energy += h.matrix().frobenius_norm_sqr().as_f64();
        let block = cfg.stbc.encode(chunk)?;
        let frame = apply_channel_with_variance(&block, &h, nv, rng)?;
        let det = cfg.stbc.detect(&frame, &h, c)?;
        out.labels.extend(det.labels);
        out.normalized.extend(det.normalized);
        out.noise_variances
            .extend(det.noise_variances.into_iter().map(|v| v.max(floor)));
    }
    out.mean_channel_energy = if blocks > 0 {
        energy / blocks as f64
    } else {
        0.0
    };
    Ok(out)
}

/// One frame through encode → modulate → space-time encode → channel →
/// combine → soft demap → decode.
pub fn run_link_trial<T: Real>(
    cfg: &LinkConfig,
    ebn0_db: f64,
    seed: impl Into<TrialSeed>,
) -> Result<TrialOutcome> {
    cfg.validate()?;
    let mut rng = seed.into().rng();
    let c = Constellation::<T>::new(cfg.order)?;
    let k = c.bits_per_symbol();
    let tx_bits: Vec<Bit> = (0..cfg.information_bits())
        .map(|_| rng.random_range(0..2u8))
        .collect();
    let coded = match &cfg.coding {
        Coding::None { .. } => tx_bits.clone(),
        Coding::Scc(code) => code.encode(&tx_bits)?,
    };
    let mut padded = coded;
    padded.resize(cfg.coded_bits() + cfg.pad_bits(), 0);
    let symbols = c.modulate(&padded)?;
    let noiseless = cfg.noiseless || ebn0_db == f64::INFINITY;
    let link = transmit_symbols(
        cfg,
        &c,
        &symbols,
        cfg.slot_snr(ebn0_db),
        noiseless,
        &mut rng,
    )?;

    let mut diagnostics = FrameDiagnostics {
        blocks: cfg.blocks_per_frame(),
        pad_bits: cfg.pad_bits(),
        noise_variance: link.noise_variance,
        mean_channel_energy: link.mean_channel_energy,
        iteration_errors: Vec::new(),
    };
    let rx_bits = match &cfg.coding {
        Coding::None { .. } => {
            let mut bits = Vec::with_capacity(link.labels.len() * k);
            for &l in &link.labels {
                bits.extend(c.label_bits(l));
            }
            bits.truncate(tx_bits.len());
            bits
        }
        Coding::Scc(code) => {
            let mut llrs =
                c.demod_llr_per_symbol(&link.normalized, &link.noise_variances, cfg.llr_method)?;
            llrs.truncate(code.codeword_len());
            let per_iter = code.decode_each_iteration(&llrs, cfg.algorithm, cfg.iterations)?;
            diagnostics.iteration_errors =
                per_iter.iter().map(|d| count_errors(&tx_bits, d)).collect();
            per_iter
                .into_iter()
                .next_back()
                .expect("at least one iteration")
        }
    };
    Ok(TrialOutcome {
        tx_bits,
        rx_bits,
        diagnostics,
    })
}
