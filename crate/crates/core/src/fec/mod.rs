//! Serially concatenated convolutional coding.
//!
//! An outer recursive systematic convolutional (RSC) code feeds a quadratic
//! interleaver, whose output is encoded by an inner RSC code. Decoding
//! iterates soft-in/soft-out trellis decoders that exchange extrinsic
//! information through the interleaver.

mod interleaver;
mod rsc;
mod scc;
mod siso;

pub use interleaver::QuadraticInterleaver;
pub use rsc::{RscCode, Trellis};
pub use scc::SccCode;
pub use siso::{siso_decode, DecodeAlgorithm, SisoOutput, LLR_CLAMP};
