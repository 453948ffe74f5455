use num_complex::Complex;

use crate::{Bit, Error, Real, Result};

/// Gray-coded square QAM constellation with unit average symbol energy.
///
/// Labels are `log2(M)`-bit integers read MSB first from the bit stream. The
/// upper half of the label selects the in-phase level, the lower half the
/// quadrature level, each through an independent reflected gray code.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    order: usize,
    bits_per_symbol: usize,
    /// Indexed by label.
    points: Vec<Complex<T>>,
    norm_factor: T,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

impl<T: Real> Constellation<T> {
    /// `order` must be a power of four (4, 16, 64, 256, ...).
    pub fn new(order: usize) -> Result<Self> {
        if order < 4 || !order.is_power_of_two() || !order.trailing_zeros().is_multiple_of(2) {
            return Err(Error::config(
                "modem.order",
                format!("QAM order must be a power of 4, got {order}"),
            ));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let half = bits_per_symbol / 2;
        let side = 1usize << half;
        let rail_mask = side - 1;
        // Average energy of the odd-integer grid is 2(M-1)/3.
        let norm_factor = T::lit((3.0 / (2.0 * (order as f64 - 1.0))).sqrt());
        let level = |g: usize| T::lit((2 * gray_decode(g)) as f64 - (side as f64 - 1.0));
        let points = (0..order)
            .map(|label| {
                let i = level(label >> half);
                let q = level(label & rail_mask);
                Complex::new(i * norm_factor, q * norm_factor)
            })
            .collect();
        Ok(Self {
            order,
            bits_per_symbol,
            points,
            norm_factor,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Scale applied to the odd-integer grid.
    pub fn norm_factor(&self) -> T {
        self.norm_factor
    }

    /// Normalized points, indexed by label.
    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex<T> {
        self.points[label]
    }

    /// Point on the unnormalized `{±1, ±3, ...}` grid.
    pub fn unnormalized_point(&self, label: usize) -> Complex<T> {
        self.points[label] / self.norm_factor
    }

    /// Label of the given unnormalized grid point, if it is one.
    pub fn label_of_unnormalized(&self, re: i64, im: i64) -> Option<usize> {
        (0..self.order).find(|&l| {
            let p = self.unnormalized_point(l);
            (p.re - T::lit(re as f64)).abs() < T::lit(1e-6)
                && (p.im - T::lit(im as f64)).abs() < T::lit(1e-6)
        })
    }

    pub fn label_bits(&self, label: usize) -> Vec<Bit> {
        (0..self.bits_per_symbol)
            .rev()
            .map(|b| ((label >> b) & 1) as Bit)
            .collect()
    }

    /// Maps each `log2(M)`-bit group (MSB first) to its point.
    pub fn modulate(&self, bits: &[Bit]) -> Result<Vec<Complex<T>>> {
        if !bits.len().is_multiple_of(self.bits_per_symbol) {
            return Err(Error::input(format!(
                "bit count {} is not a multiple of {} bits per symbol",
                bits.len(),
                self.bits_per_symbol
            )));
        }
        Ok(bits
            .chunks_exact(self.bits_per_symbol)
            .map(|group| {
                let label = group
                    .iter()
                    .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
                self.points[label]
            })
            .collect())
    }

    /// Nearest point by Euclidean distance; ties go to the smaller label.
    pub fn nearest_label(&self, y: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_d = (y - self.points[0]).norm_sqr();
        for (label, p) in self.points.iter().enumerate().skip(1) {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best = label;
                best_d = d;
            }
        }
        best
    }

    /// Hard demodulation to bits.
    pub fn demod_hard(&self, symbols: &[Complex<T>]) -> Vec<Bit> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol);
        for &y in symbols {
            out.extend(self.label_bits(self.nearest_label(y)));
        }
        out
    }

    /// Closed-form uncoded BER over AWGN at the given Eb/N0.
    pub fn uncoded_ber_awgn(&self, ebn0_db: f64) -> f64 {
        super::ber_awgn(self.order, ebn0_db)
    }

    /// Closed-form uncoded BER over iid Rayleigh fading with
    /// `diversity_order`-branch maximal-ratio combining.
    pub fn uncoded_ber_rayleigh(&self, ebn0_db: f64, diversity_order: usize) -> f64 {
        super::ber_rayleigh_mrc(self.order, ebn0_db, diversity_order)
    }
}
