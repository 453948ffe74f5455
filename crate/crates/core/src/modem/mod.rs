//! Square M-QAM: gray mapping, hard and soft demodulation, and closed-form
//! uncoded error-rate references.

mod constellation;
mod demod;
pub mod theory;

pub use constellation::Constellation;
pub use demod::{LlrFrame, LlrMethod};
pub use theory::{ber_awgn, ber_ostbc_rayleigh, ber_rayleigh_mrc, ebn0_to_esn0_db};
