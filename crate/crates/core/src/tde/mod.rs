//! Multipath time-delay estimation.
//!
//! The received waveform is a sum of `M` scaled, delayed copies of a known
//! pulse in white Gaussian noise. In the DFT domain each delay becomes a
//! linear phase, so on the bins where the pulse has energy
//!
//! ```text
//! R[q] ≈ S[q] Σ_k a_k exp(j λ_k q),   λ_k = −2π τ_k / (N T_s)
//! ```
//!
//! Stacking the selected bins gives `r̃ ≈ p̃(λ) a` with `p̃(λ) = S·A(λ)`. For
//! fixed delays the amplitudes enter linearly and are eliminated by
//! projecting onto the orthogonal complement of the column space, obtained
//! from a thin QR factorization of `p̃(λ)`. The remaining error depends only
//! on the delays and is minimized by grid search plus golden-section
//! refinement.

mod projection;
mod scenario;
mod search;
mod spectrum;
mod xcorr;

pub use projection::{model_matrix, projected_error, solve_amplitudes, steering_matrix, ThinQr};
pub use scenario::{default_pulse, synthesize_received, windowed_sinc_pulse, TdeScenario};
pub use search::{estimate_delays, DelayEstimate, DelayEstimator, SearchSpec};
pub use spectrum::{dft, idft, select_bins, SpectralSelection};
pub use xcorr::{cross_correlate, Correlation};

/// Converts delays in seconds to the phase slopes `λ_k = −2πτ_k/(N·T_s)`.
pub fn delays_to_lambdas<T: crate::Real>(delays: &[T], n: usize, sample_interval: T) -> Vec<T> {
    let k = -T::lit(2.0) * T::PI() / (T::from_usize_lossy(n) * sample_interval);
    delays.iter().map(|&d| d * k).collect()
}

/// Inverse of [`delays_to_lambdas`].
pub fn lambdas_to_delays<T: crate::Real>(lambdas: &[T], n: usize, sample_interval: T) -> Vec<T> {
    let k = -(T::from_usize_lossy(n) * sample_interval) / (T::lit(2.0) * T::PI());
    lambdas.iter().map(|&l| l * k).collect()
}
