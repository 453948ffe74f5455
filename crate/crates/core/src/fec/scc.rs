use super::{siso_decode, DecodeAlgorithm, QuadraticInterleaver, RscCode};
use crate::{Bit, Error, Real, Result};

/// Serially concatenated code: outer RSC → quadratic interleaver → inner RSC.
///
/// The interleaver spans the whole terminated outer codeword, so the message
/// length is fixed by the interleaver length: `(N/n_out − ν)·k_in` bits for
/// the outer code.
#[derive(Debug, Clone, PartialEq)]
pub struct SccCode {
    outer: RscCode,
    inner: RscCode,
    interleaver: QuadraticInterleaver,
}

impl SccCode {
    pub fn new(outer: RscCode, inner: RscCode, interleaver: QuadraticInterleaver) -> Result<Self> {
        let n = interleaver.len();
        let (ko, no) = (outer.inputs_per_step(), outer.outputs_per_step());
        let (ki, ni) = (inner.inputs_per_step(), inner.outputs_per_step());
        if 3 * ko * ki != no * ni {
            return Err(Error::config(
                "fec",
                format!("component rates {ko}/{no} and {ki}/{ni} do not multiply to 1/3"),
            ));
        }
        if !n.is_multiple_of(no) || n / no <= outer.memory() {
            return Err(Error::config(
                "fec.interleaver_length",
                format!("interleaver length {n} cannot hold a terminated outer codeword"),
            ));
        }
        if !n.is_multiple_of(ki) {
            return Err(Error::config(
                "fec.interleaver_length",
                format!("interleaver length {n} is not a multiple of the inner input width {ki}"),
            ));
        }
        Ok(Self {
            outer,
            inner,
            interleaver,
        })
    }

    /// Outer (1, 5/7) rate 1/2, inner rate 2/3 with parity 5/7 on the input
    /// sum, quadratic interleaver of length `n` with multiplier `k`.
    pub fn standard(n: usize, k: u64) -> Result<Self> {
        Self::new(
            RscCode::rate_half_5_7(),
            RscCode::rate_two_thirds_5_7(),
            QuadraticInterleaver::new(n, k)?,
        )
    }

    pub fn outer(&self) -> &RscCode {
        &self.outer
    }

    pub fn inner(&self) -> &RscCode {
        &self.inner
    }

    pub fn interleaver(&self) -> &QuadraticInterleaver {
        &self.interleaver
    }

    /// Information bits per codeword.
    pub fn message_len(&self) -> usize {
        (self.interleaver.len() / self.outer.outputs_per_step() - self.outer.memory())
            * self.outer.inputs_per_step()
    }

    pub fn codeword_len(&self) -> usize {
        self.inner.codeword_len(self.interleaver.len())
    }

    /// Actual rate including termination overhead.
    pub fn rate(&self) -> f64 {
        self.message_len() as f64 / self.codeword_len() as f64
    }

    pub fn encode(&self, message: &[Bit]) -> Result<Vec<Bit>> {
        if message.len() != self.message_len() {
            return Err(Error::input(format!(
                "message length {} does not match code message length {}",
                message.len(),
                self.message_len()
            )));
        }
        let outer = self.outer.encode(message)?;
        debug_assert_eq!(outer.len(), self.interleaver.len());
        let permuted = self.interleaver.permute(&outer)?;
        self.inner.encode(&permuted)
    }

    /// Outer codeword only (before interleaving).
    pub fn encode_outer(&self, message: &[Bit]) -> Result<Vec<Bit>> {
        if message.len() != self.message_len() {
            return Err(Error::input("message length mismatch"));
        }
        self.outer.encode(message)
    }

    /// Iterative decoding; returns the hard decisions after the last
    /// iteration.
    pub fn decode<T: Real>(
        &self,
        channel_llrs: &[T],
        alg: DecodeAlgorithm,
        iterations: usize,
    ) -> Result<Vec<Bit>> {
        let mut all = self.decode_each_iteration(channel_llrs, alg, iterations)?;
        Ok(all.pop().expect("at least one iteration"))
    }

    /// Iterative decoding; returns the message decisions after every
    /// iteration, first to last.
    ///
    /// Each iteration runs the inner SISO on the channel LLRs with the
    /// interleaved outer extrinsic as a-priori input, then the outer SISO on
    /// the deinterleaved inner extrinsic.
    pub fn decode_each_iteration<T: Real>(
        &self,
        channel_llrs: &[T],
        alg: DecodeAlgorithm,
        iterations: usize,
    ) -> Result<Vec<Vec<Bit>>> {
        if iterations == 0 {
            return Err(Error::config(
                "fec.iterations",
                "at least one iteration required",
            ));
        }
        if channel_llrs.len() != self.codeword_len() {
            return Err(Error::input(format!(
                "expected {} channel LLRs, got {}",
                self.codeword_len(),
                channel_llrs.len()
            )));
        }
        let n = self.interleaver.len();
        let inner_inputs = self.inner.codeword_len(n) / self.inner.outputs_per_step()
            * self.inner.inputs_per_step();
        let outer_inputs = n / self.outer.outputs_per_step() * self.outer.inputs_per_step();
        let k = self.message_len();

        let mut inner_apriori = vec![T::zero(); inner_inputs];
        let outer_apriori = vec![T::zero(); outer_inputs];
        let mut decisions = Vec::with_capacity(iterations);
        for _ in 0..iterations {
            let inner = siso_decode(&self.inner, channel_llrs, &inner_apriori, alg)?;
            let outer_channel = self
                .interleaver
                .inverse_permute(&inner.input_extrinsic[..n])?;
            let outer = siso_decode(&self.outer, &outer_channel, &outer_apriori, alg)?;
            let fed_back = self.interleaver.permute(&outer.code_extrinsic)?;
            inner_apriori[..n].copy_from_slice(&fed_back);
            decisions.push(
                outer.input_app[..k]
                    .iter()
                    .map(|&l| u8::from(l < T::zero()))
                    .collect(),
            );
        }
        Ok(decisions)
    }
}
