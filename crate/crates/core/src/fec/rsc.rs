use crate::{Bit, Error, Result};

/// Recursive systematic convolutional code.
///
/// Polynomials are written in octal with the most significant bit acting
/// on the current register input, so `7` is `1 + D + D²` and `5` is
/// `1 + D²`. With `k_in` inputs per step the register is driven by the XOR
/// of all inputs and the feedback; the outputs of one step are the `k_in`
/// inputs followed by one parity bit per feedforward polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RscCode {
    memory: usize,
    feedback: u32,
    feedforward: Vec<u32>,
    inputs: usize,
    trellis: Trellis,
}

/// Precomputed state machine of an [`RscCode`].
///
/// The state holds the last `ν` register inputs, most recent in the MSB.
/// Branches are indexed by `state * num_inputs + input_word`, where bit `j`
/// of the input word is input `j` of the step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trellis {
    num_states: usize,
    num_input_words: usize,
    outputs_per_step: usize,
    next: Vec<usize>,
    /// Output word, bit `j` = output `j` of the step.
    output: Vec<u32>,
    /// Bit shifted into the register.
    register_in: Vec<u8>,
}

fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Parses an octal polynomial such as `"7"` or `"0o15"`.
pub(crate) fn parse_octal(field: &str, s: &str) -> Result<u32> {
    let digits = s.trim().trim_start_matches("0o");
    u32::from_str_radix(digits, 8)
        .map_err(|_| Error::config(field, format!("`{s}` is not an octal polynomial")))
}

impl RscCode {
    /// Builds a code from a feedback polynomial, one or more feedforward
    /// polynomials and the number of inputs per trellis step.
    pub fn new(feedback: u32, feedforward: &[u32], inputs: usize) -> Result<Self> {
        if feedback < 3 {
            return Err(Error::config(
                "fec.feedback",
                "feedback polynomial must have degree >= 1",
            ));
        }
        let memory = (31 - feedback.leading_zeros()) as usize;
        if feedback & 1 == 0 {
            return Err(Error::config(
                "fec.feedback",
                format!("feedback polynomial {feedback:o} must have a D^{memory} term"),
            ));
        }
        if memory > 12 {
            return Err(Error::config(
                "fec.feedback",
                "memory above 12 is not supported",
            ));
        }
        if feedforward.is_empty() {
            return Err(Error::config(
                "fec.feedforward",
                "at least one feedforward polynomial required",
            ));
        }
        if let Some(bad) = feedforward
            .iter()
            .find(|&&g| g == 0 || g >= 1 << (memory + 1))
        {
            return Err(Error::config(
                "fec.feedforward",
                format!("feedforward polynomial {bad:o} does not fit memory {memory}"),
            ));
        }
        if inputs == 0 || inputs > 4 {
            return Err(Error::config("fec.inputs", "inputs per step must be 1..=4"));
        }
        let trellis = Trellis::build(memory, feedback, feedforward, inputs);
        Ok(Self {
            memory,
            feedback,
            feedforward: feedforward.to_vec(),
            inputs,
            trellis,
        })
    }

    /// Same as [`new`](Self::new) with octal strings.
    pub fn from_octal(feedback: &str, feedforward: &[&str], inputs: usize) -> Result<Self> {
        let fb = parse_octal("fec.feedback", feedback)?;
        let ff = feedforward
            .iter()
            .map(|s| parse_octal("fec.feedforward", s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(fb, &ff, inputs)
    }

    /// Rate-1/2 code with feedback 7 and feedforward 5 (octal).
    pub fn rate_half_5_7() -> Self {
        Self::new(0o7, &[0o5], 1).expect("valid code")
    }

    /// Rate-2/3 code: two systematic inputs, one parity from feedback 7 and
    /// feedforward 5 applied to the input sum.
    pub fn rate_two_thirds_5_7() -> Self {
        Self::new(0o7, &[0o5], 2).expect("valid code")
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn feedback(&self) -> u32 {
        self.feedback
    }

    pub fn feedforward(&self) -> &[u32] {
        &self.feedforward
    }

    pub fn inputs_per_step(&self) -> usize {
        self.inputs
    }

    pub fn outputs_per_step(&self) -> usize {
        self.inputs + self.feedforward.len()
    }

    /// Nominal rate `k_in / n_out`.
    pub fn rate(&self) -> f64 {
        self.inputs as f64 / self.outputs_per_step() as f64
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// Codeword length for `message_len` input bits, tail included.
    pub fn codeword_len(&self, message_len: usize) -> usize {
        (message_len / self.inputs + self.memory) * self.outputs_per_step()
    }

    /// Encodes from the all-zero state and appends `ν` tail steps that drive
    /// the register back to zero.
    pub fn encode(&self, bits: &[Bit]) -> Result<Vec<Bit>> {
        if !bits.len().is_multiple_of(self.inputs) {
            return Err(Error::input(format!(
                "message length {} is not a multiple of {} inputs per step",
                bits.len(),
                self.inputs
            )));
        }
        let t = &self.trellis;
        let n_out = self.outputs_per_step();
        let mut out = Vec::with_capacity(self.codeword_len(bits.len()));
        let mut state = 0;
        let emit = |state: usize, word: usize, out: &mut Vec<Bit>| {
            let b = t.branch(state, word);
            let o = t.output[b];
            out.extend((0..n_out).map(|j| ((o >> j) & 1) as Bit));
            t.next[b]
        };
        for step in bits.chunks_exact(self.inputs) {
            let word = step
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &b)| acc | (((b & 1) as usize) << j));
            state = emit(state, word, &mut out);
        }
        for _ in 0..self.memory {
            let word = t.tail_input(state);
            state = emit(state, word, &mut out);
        }
        debug_assert_eq!(state, 0);
        Ok(out)
    }
}

impl Trellis {
    fn build(memory: usize, feedback: u32, feedforward: &[u32], inputs: usize) -> Self {
        let num_states = 1usize << memory;
        let num_input_words = 1usize << inputs;
        let state_taps = feedback & ((1 << memory) - 1);
        let outputs_per_step = inputs + feedforward.len();
        let size = num_states * num_input_words;
        let mut next = Vec::with_capacity(size);
        let mut output = Vec::with_capacity(size);
        let mut register_in = Vec::with_capacity(size);
        for s in 0..num_states {
            for u in 0..num_input_words {
                let a = parity(u as u32) ^ parity(state_taps & s as u32);
                let aug = ((a as u32) << memory) | s as u32;
                let mut o = u as u32;
                for (m, &g) in feedforward.iter().enumerate() {
                    o |= (parity(g & aug) as u32) << (inputs + m);
                }
                next.push((aug >> 1) as usize);
                output.push(o);
                register_in.push(a);
            }
        }
        Self {
            num_states,
            num_input_words,
            outputs_per_step,
            next,
            output,
            register_in,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_input_words(&self) -> usize {
        self.num_input_words
    }

    pub fn outputs_per_step(&self) -> usize {
        self.outputs_per_step
    }

    #[inline]
    pub fn branch(&self, state: usize, word: usize) -> usize {
        state * self.num_input_words + word
    }

    #[inline]
    pub fn next_state(&self, state: usize, word: usize) -> usize {
        self.next[self.branch(state, word)]
    }

    #[inline]
    pub fn output_word(&self, state: usize, word: usize) -> u32 {
        self.output[self.branch(state, word)]
    }

    /// True when the branch shifts a zero into the register, the only
    /// branches allowed during termination.
    #[inline]
    pub fn is_tail_branch(&self, state: usize, word: usize) -> bool {
        self.register_in[self.branch(state, word)] == 0
    }

    /// Input word used during termination: input 0 cancels the feedback,
    /// the other inputs are zero.
    pub fn tail_input(&self, state: usize) -> usize {
        let w = if self.register_in[self.branch(state, 0)] == 0 {
            0
        } else {
            1
        };
        debug_assert!(self.is_tail_branch(state, w));
        w
    }
}
