//! Orthogonal space-time block codes.
//!
//! Alamouti's two-antenna rate-1 code (G2) and Tarokh's three-antenna
//! rate-1/2 code (G3), the flat quasi-static reception model
//! `r_t^j = Σ_i α_{i,j} c_t^i + noise`, the exhaustive decision metric, and
//! linear combining that reduces ML detection to per-symbol slicing.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use crate::channel::{awgn_in_place, ChannelMatrix};
use crate::matrix::CMatrix;
use crate::modem::Constellation;
use crate::{Error, Real, Result};

/// One entry of a code matrix: `sign · x_k` or `sign · conj(x_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    symbol: usize,
    negate: bool,
    conjugate: bool,
}

const fn e(symbol: usize, negate: bool, conjugate: bool) -> Entry {
    Entry {
        symbol,
        negate,
        conjugate,
    }
}

const SISO: [[Entry; 1]; 1] = [[e(0, false, false)]];

const G2: [[Entry; 2]; 2] = [
    [e(0, false, false), e(1, false, false)],
    [e(1, true, true), e(0, false, true)],
];

const G3: [[Entry; 3]; 8] = [
    [e(0, false, false), e(1, false, false), e(2, false, false)],
    [e(1, true, false), e(0, false, false), e(3, true, false)],
    [e(2, true, false), e(3, false, false), e(0, false, false)],
    [e(3, true, false), e(2, true, false), e(1, false, false)],
    [e(0, false, true), e(1, false, true), e(2, false, true)],
    [e(1, true, true), e(0, false, true), e(3, true, true)],
    [e(2, true, true), e(3, false, true), e(0, false, true)],
    [e(3, true, true), e(2, true, true), e(1, false, true)],
];

/// Space-time coding scheme. `None` sends one symbol per slot from a single
/// antenna (SISO, or SIMO with receive combining).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StbcScheme {
    None,
    /// Alamouti, two antennas, rate 1.
    #[default]
    G2,
    /// Tarokh, three antennas, rate 1/2.
    G3,
}

impl StbcScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(StbcScheme::None),
            "g2" => Ok(StbcScheme::G2),
            "g3" => Ok(StbcScheme::G3),
            other => Err(Error::config(
                "stbc.scheme",
                format!("unknown scheme `{other}`"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StbcScheme::None => "none",
            StbcScheme::G2 => "g2",
            StbcScheme::G3 => "g3",
        }
    }

    pub fn n_tx(self) -> usize {
        match self {
            StbcScheme::None => 1,
            StbcScheme::G2 => 2,
            StbcScheme::G3 => 3,
        }
    }

    pub fn slots(self) -> usize {
        match self {
            StbcScheme::None => 1,
            StbcScheme::G2 => 2,
            StbcScheme::G3 => 8,
        }
    }

    pub fn symbols_per_block(self) -> usize {
        match self {
            StbcScheme::None => 1,
            StbcScheme::G2 => 2,
            StbcScheme::G3 => 4,
        }
    }

    /// Symbols per slot.
    pub fn rate(self) -> f64 {
        self.symbols_per_block() as f64 / self.slots() as f64
    }

    fn entry(self, slot: usize, antenna: usize) -> Entry {
        match self {
            StbcScheme::None => SISO[slot][antenna],
            StbcScheme::G2 => G2[slot][antenna],
            StbcScheme::G3 => G3[slot][antenna],
        }
    }

    /// Maps `symbols_per_block` symbols to the slots × antennas code matrix.
    pub fn encode<T: Real>(self, symbols: &[Complex<T>]) -> Result<SpaceTimeBlock<T>> {
        if symbols.len() != self.symbols_per_block() {
            return Err(Error::input(format!(
                "{} needs {} symbols per block, got {}",
                self.name(),
                self.symbols_per_block(),
                symbols.len()
            )));
        }
        let m = CMatrix::from_fn(self.slots(), self.n_tx(), |t, i| {
            let en = self.entry(t, i);
            let mut x = symbols[en.symbol];
            if en.conjugate {
                x = x.conj();
            }
            if en.negate {
                -x
            } else {
                x
            }
        });
        Ok(SpaceTimeBlock(m))
    }

    /// Linear combining with perfect CSI followed by per-symbol slicing.
    ///
    /// The statistic for symbol `k` is `x̃_k = g_k·x_k + noise` with
    /// `g_k = Σ |α_{i,j}|²` taken over every code-matrix position that
    /// carries `x_k` (twice the total channel energy for G3). Because the
    /// designs are orthogonal, slicing each `x̃_k / g_k` independently is the
    /// joint ML decision.
    pub fn detect<T: Real>(
        self,
        frame: &ReceivedFrame<T>,
        h: &ChannelMatrix<T>,
        c: &Constellation<T>,
    ) -> Result<Detection<T>> {
        self.detect_scaled(frame, h, c, T::one())
    }

    /// As [`detect`](Self::detect) for blocks whose symbols were multiplied by
    /// `symbol_scale` before encoding.
    pub fn detect_scaled<T: Real>(
        self,
        frame: &ReceivedFrame<T>,
        h: &ChannelMatrix<T>,
        c: &Constellation<T>,
        symbol_scale: T,
    ) -> Result<Detection<T>> {
        let (statistics, gains) = self.combine(frame, h)?;
        let mut normalized = Vec::with_capacity(statistics.len());
        let mut noise_variances = Vec::with_capacity(statistics.len());
        let mut labels = Vec::with_capacity(statistics.len());
        for (&stat, &g) in statistics.iter().zip(&gains) {
            let eff = g * symbol_scale;
            let y = stat / eff;
            labels.push(c.nearest_label(y));
            normalized.push(y);
            noise_variances.push(frame.noise_variance * g / (eff * eff));
        }
        let symbols = labels.iter().map(|&l| c.point(l)).collect();
        Ok(Detection {
            labels,
            symbols,
            statistics,
            gains,
            normalized,
            noise_variances,
        })
    }

    /// Combined statistics `x̃_k` and equivalent gains `g_k`.
    pub fn combine<T: Real>(
        self,
        frame: &ReceivedFrame<T>,
        h: &ChannelMatrix<T>,
    ) -> Result<(Vec<Complex<T>>, Vec<T>)> {
        self.check_shapes(frame.samples.shape(), h)?;
        if h.matrix().frobenius_norm_sqr() == T::zero() {
            return Err(Error::DegenerateChannel);
        }
        let n_rx = h.n_rx();
        let k = self.symbols_per_block();
        let mut stats = vec![Complex::zero(); k];
        let mut gains = vec![T::zero(); k];
        for t in 0..self.slots() {
            for i in 0..self.n_tx() {
                let en = self.entry(t, i);
                let sign = if en.negate { -T::one() } else { T::one() };
                for j in 0..n_rx {
                    let a = h.gain(i, j);
                    let r = frame.samples[(t, j)];
                    let contrib = if en.conjugate {
                        a * r.conj()
                    } else {
                        a.conj() * r
                    };
                    stats[en.symbol] += contrib * sign;
                    gains[en.symbol] += a.norm_sqr();
                }
            }
        }
        Ok((stats, gains))
    }

    fn check_shapes<T: Real>(
        self,
        frame_shape: (usize, usize),
        h: &ChannelMatrix<T>,
    ) -> Result<()> {
        if h.n_tx() != self.n_tx() {
            return Err(Error::input(format!(
                "{} needs {} transmit antennas, channel has {}",
                self.name(),
                self.n_tx(),
                h.n_tx()
            )));
        }
        if frame_shape != (self.slots(), h.n_rx()) {
            return Err(Error::input(format!(
                "received frame shape {frame_shape:?} does not match {} slots x {} receive antennas",
                self.slots(),
                h.n_rx()
            )));
        }
        Ok(())
    }
}

/// Transmission matrix: entry `(t, i)` is sent from antenna `i` in slot `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBlock<T>(pub CMatrix<T>);

impl<T: Real> SpaceTimeBlock<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.0
    }

    pub fn slots(&self) -> usize {
        self.0.rows()
    }

    pub fn n_tx(&self) -> usize {
        self.0.cols()
    }

    pub fn scaled(&self, s: T) -> Self {
        SpaceTimeBlock(self.0.scale(Complex::new(s, T::zero())))
    }
}

/// Samples at the receive antennas for one block: `(t, j)` is slot `t` at
/// antenna `j`. `noise_variance` is the total complex variance per sample
/// (zero for a noiseless frame).
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame<T> {
    pub samples: CMatrix<T>,
    pub noise_variance: T,
}

/// Output of [`StbcScheme::detect`], one entry per symbol of the block.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    pub labels: Vec<usize>,
    /// Sliced constellation points.
    pub symbols: Vec<Complex<T>>,
    /// Combined statistics `x̃_k`.
    pub statistics: Vec<Complex<T>>,
    /// Equivalent channel gains `g_k`.
    pub gains: Vec<T>,
    /// `x̃_k` divided by the effective gain; lands on the constellation.
    pub normalized: Vec<Complex<T>>,
    /// Noise variance of each normalized statistic, for soft demapping.
    pub noise_variances: Vec<T>,
}

/// Noise-free propagation `C·Hᵀ`.
pub fn propagate<T: Real>(block: &SpaceTimeBlock<T>, h: &ChannelMatrix<T>) -> Result<CMatrix<T>> {
    if block.n_tx() != h.n_tx() {
        return Err(Error::input(format!(
            "block uses {} antennas, channel has {}",
            block.n_tx(),
            h.n_tx()
        )));
    }
    Ok(block.0.mul(&h.matrix().transpose()))
}

/// Total complex noise variance `n_tx / SNR`, i.e. `n_tx / (2·SNR)` per real
/// dimension, with each antenna sending unit average energy.
pub fn noise_variance_for_snr<T: Real>(n_tx: usize, snr: T) -> Result<T> {
    if !(snr > T::zero()) || !snr.is_finite() {
        return Err(Error::input("SNR must be positive and finite"));
    }
    Ok(T::from_usize_lossy(n_tx) / snr)
}

/// Sends `block` through the quasi-static channel `h` and adds complex
/// Gaussian noise of total variance `n_tx / snr` per receive sample.
pub fn apply_channel<T: Real, R: Rng + ?Sized>(
    block: &SpaceTimeBlock<T>,
    h: &ChannelMatrix<T>,
    snr: T,
    rng: &mut R,
) -> Result<ReceivedFrame<T>> {
    let nv = noise_variance_for_snr(block.n_tx(), snr)?;
    apply_channel_with_variance(block, h, nv, rng)
}

/// As [`apply_channel`] with an explicit total complex noise variance. A
/// variance of zero gives a noiseless frame.
pub fn apply_channel_with_variance<T: Real, R: Rng + ?Sized>(
    block: &SpaceTimeBlock<T>,
    h: &ChannelMatrix<T>,
    noise_variance: T,
    rng: &mut R,
) -> Result<ReceivedFrame<T>> {
    if noise_variance < T::zero() || !noise_variance.is_finite() {
        return Err(Error::input(
            "noise variance must be finite and non-negative",
        ));
    }
    let mut samples = propagate(block, h)?;
    if noise_variance > T::zero() {
        let (rows, cols) = samples.shape();
        let mut flat: Vec<Complex<T>> = samples.as_slice().to_vec();
        awgn_in_place(&mut flat, noise_variance, rng)?;
        samples = CMatrix::from_row_major(rows, cols, flat);
    }
    Ok(ReceivedFrame {
        samples,
        noise_variance,
    })
}

/// Exhaustive decision metric `Σ_t Σ_j |r_t^j − Σ_i α_{i,j} c_t^i|²`.
pub fn ml_metric<T: Real>(
    frame: &ReceivedFrame<T>,
    h: &ChannelMatrix<T>,
    candidate: &SpaceTimeBlock<T>,
) -> Result<T> {
    let predicted = propagate(candidate, h)?;
    if predicted.shape() != frame.samples.shape() {
        return Err(Error::input(
            "candidate block does not match the received frame",
        ));
    }
    Ok(frame
        .samples
        .as_slice()
        .iter()
        .zip(predicted.as_slice())
        .fold(T::zero(), |acc, (r, p)| acc + (r - p).norm_sqr()))
}
