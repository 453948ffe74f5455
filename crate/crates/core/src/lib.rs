//! Link-level PHY simulation toolkit.
//!
//! The transmission chain is gray-coded M-QAM, a rate-1/3 serially
//! concatenated convolutional code with a quadratic interleaver, and
//! orthogonal space-time block codes (Alamouti G2, Tarokh G3) over
//! quasi-static Rayleigh MISO/MIMO channels. A separate estimator recovers
//! the delays and amplitudes of overlapping multipath echoes by
//! frequency-domain least squares with the amplitudes projected out through
//! a QR factorization.
//!
//! The numerical core is generic over a [`Real`] scalar (`f32` or `f64`).
//! The Monte Carlo harness in [`sim`] and the file formats in [`output`] are
//! fixed to `f64`; the aliases below name the common concrete types.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod fec;
pub mod matrix;
pub mod modem;
pub mod output;
pub mod scalar;
pub mod sim;
pub mod stbc;
pub mod tde;

pub use error::{Error, Result};
pub use scalar::Real;

/// Binary digit stored as `0` or `1`.
pub type Bit = u8;

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;

pub type Constellation64 = modem::Constellation<f64>;
pub type Constellation32 = modem::Constellation<f32>;
pub type ChannelMatrix64 = channel::ChannelMatrix<f64>;
pub type ChannelMatrix32 = channel::ChannelMatrix<f32>;
pub type SpaceTimeBlock64 = stbc::SpaceTimeBlock<f64>;
pub type SpaceTimeBlock32 = stbc::SpaceTimeBlock<f32>;
pub type LlrFrame64 = modem::LlrFrame<f64>;
pub type LlrFrame32 = modem::LlrFrame<f32>;
pub type TdeScenario64 = tde::TdeScenario<f64>;
pub type DelayEstimate64 = tde::DelayEstimate<f64>;
