use super::RscCode;
use crate::{Error, Real, Result};

/// LLR magnitudes are clipped to this value inside the recursions.
pub const LLR_CLAMP: f64 = 50.0;

/// Soft-in/soft-out trellis algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeAlgorithm {
    /// BCJR in the probability domain.
    Map,
    /// Log domain with the exact Jacobian logarithm.
    #[default]
    LogMap,
    /// Log domain with the correction term dropped.
    MaxLogMap,
}

impl DecodeAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            DecodeAlgorithm::Map => "map",
            DecodeAlgorithm::LogMap => "log-map",
            DecodeAlgorithm::MaxLogMap => "max-log-map",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "map" => Ok(DecodeAlgorithm::Map),
            "log-map" | "logmap" => Ok(DecodeAlgorithm::LogMap),
            "max-log-map" | "maxlogmap" => Ok(DecodeAlgorithm::MaxLogMap),
            other => Err(Error::config(
                "fec.algorithm",
                format!("unknown algorithm `{other}`"),
            )),
        }
    }
}

/// A-posteriori and extrinsic LLRs from one SISO pass.
///
/// Input-bit vectors have `steps · k_in` entries and code-bit vectors
/// `steps · n_out` entries, tail steps included. Extrinsic values are the
/// a-posteriori LLRs minus the corresponding soft input.
#[derive(Debug, Clone, PartialEq)]
pub struct SisoOutput<T> {
    pub input_app: Vec<T>,
    pub input_extrinsic: Vec<T>,
    pub code_app: Vec<T>,
    pub code_extrinsic: Vec<T>,
}

/// Semiring the forward-backward recursion runs in.
trait Domain<T: Real> {
    fn zero() -> T;
    fn one() -> T;
    fn from_log(metric: T) -> T;
    fn mul(a: T, b: T) -> T;
    fn add(a: T, b: T) -> T;
    fn normalize(v: &mut [T]);
    /// `ln(p0 / p1)` from the two accumulated class totals.
    fn llr(p0: T, p1: T) -> T;
}

struct Prob;
struct Jacobian;
struct MaxLog;

impl<T: Real> Domain<T> for Prob {
    fn zero() -> T {
        T::zero()
    }
    fn one() -> T {
        T::one()
    }
    fn from_log(m: T) -> T {
        m.exp()
    }
    fn mul(a: T, b: T) -> T {
        a * b
    }
    fn add(a: T, b: T) -> T {
        a + b
    }
    fn normalize(v: &mut [T]) {
        let s = v.iter().fold(T::zero(), |a, &b| a + b);
        if s > T::zero() {
            v.iter_mut().for_each(|x| *x /= s);
        }
    }
    fn llr(p0: T, p1: T) -> T {
        p0.ln() - p1.ln()
    }
}

fn log_normalize<T: Real>(v: &mut [T]) {
    let m = v.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    if m.is_finite() {
        v.iter_mut().for_each(|x| *x -= m);
    }
}

impl<T: Real> Domain<T> for Jacobian {
    fn zero() -> T {
        T::neg_infinity()
    }
    fn one() -> T {
        T::zero()
    }
    fn from_log(m: T) -> T {
        m
    }
    fn mul(a: T, b: T) -> T {
        a + b
    }
    fn add(a: T, b: T) -> T {
        if a == T::neg_infinity() {
            return b;
        }
        if b == T::neg_infinity() {
            return a;
        }
        a.max(b) + (-(a - b).abs()).exp().ln_1p()
    }
    fn normalize(v: &mut [T]) {
        log_normalize(v)
    }
    fn llr(p0: T, p1: T) -> T {
        p0 - p1
    }
}

impl<T: Real> Domain<T> for MaxLog {
    fn zero() -> T {
        T::neg_infinity()
    }
    fn one() -> T {
        T::zero()
    }
    fn from_log(m: T) -> T {
        m
    }
    fn mul(a: T, b: T) -> T {
        a + b
    }
    fn add(a: T, b: T) -> T {
        a.max(b)
    }
    fn normalize(v: &mut [T]) {
        log_normalize(v)
    }
    fn llr(p0: T, p1: T) -> T {
        p0 - p1
    }
}

/// Runs forward-backward decoding over the terminated trellis of `code`.
///
/// `channel` holds one LLR per code bit (`steps · n_out`) and `apriori` one
/// LLR per input bit (`steps · k_in`), both including the `ν` tail steps.
/// The trellis starts and ends in the zero state; tail steps only follow
/// branches that shift a zero into the register.
pub fn siso_decode<T: Real>(
    code: &RscCode,
    channel: &[T],
    apriori: &[T],
    alg: DecodeAlgorithm,
) -> Result<SisoOutput<T>> {
    let n_out = code.outputs_per_step();
    let k_in = code.inputs_per_step();
    if !channel.len().is_multiple_of(n_out) {
        return Err(Error::input(format!(
            "channel LLR count {} is not a multiple of {n_out}",
            channel.len()
        )));
    }
    let steps = channel.len() / n_out;
    if steps < code.memory() {
        return Err(Error::input("frame shorter than the termination tail"));
    }
    if apriori.len() != steps * k_in {
        return Err(Error::input(format!(
            "expected {} a-priori LLRs, got {}",
            steps * k_in,
            apriori.len()
        )));
    }
    if channel.iter().chain(apriori).any(|x| !x.is_finite()) {
        return Err(Error::input("non-finite LLR"));
    }
    let clamp = T::lit(LLR_CLAMP);
    let ch: Vec<T> = channel.iter().map(|&x| x.max(-clamp).min(clamp)).collect();
    let ap: Vec<T> = apriori.iter().map(|&x| x.max(-clamp).min(clamp)).collect();
    let (input_app, code_app) = match alg {
        DecodeAlgorithm::Map => run::<T, Prob>(code, &ch, &ap, steps),
        DecodeAlgorithm::LogMap => run::<T, Jacobian>(code, &ch, &ap, steps),
        DecodeAlgorithm::MaxLogMap => run::<T, MaxLog>(code, &ch, &ap, steps),
    };
    let input_extrinsic = input_app.iter().zip(&ap).map(|(&a, &p)| a - p).collect();
    let code_extrinsic = code_app.iter().zip(&ch).map(|(&a, &c)| a - c).collect();
    Ok(SisoOutput {
        input_app,
        input_extrinsic,
        code_app,
        code_extrinsic,
    })
}

/// Half-LLR bit metric: `+L/2` for a zero, `-L/2` for a one.
#[inline]
fn bit_metric<T: Real>(bit: u32, llr: T) -> T {
    let h = llr * T::lit(0.5);
    if bit == 0 {
        h
    } else {
        -h
    }
}

fn run<T: Real, D: Domain<T>>(
    code: &RscCode,
    ch: &[T],
    ap: &[T],
    steps: usize,
) -> (Vec<T>, Vec<T>) {
    let t = code.trellis();
    let ns = t.num_states();
    let nw = t.num_input_words();
    let n_out = code.outputs_per_step();
    let k_in = code.inputs_per_step();
    let info_steps = steps - code.memory();

    let allowed = |k: usize, s: usize, u: usize| k < info_steps || t.is_tail_branch(s, u);
    // Branch metrics, gamma[k][s*nw + u].
    let mut gamma = vec![D::zero(); steps * ns * nw];
    for k in 0..steps {
        let chk = &ch[k * n_out..(k + 1) * n_out];
        let apk = &ap[k * k_in..(k + 1) * k_in];
        for s in 0..ns {
            for u in 0..nw {
                if !allowed(k, s, u) {
                    continue;
                }
                let o = t.output_word(s, u);
                let mut m = T::zero();
                for (j, &l) in apk.iter().enumerate() {
                    m += bit_metric(((u >> j) & 1) as u32, l);
                }
                for (j, &l) in chk.iter().enumerate() {
                    m += bit_metric((o >> j) & 1, l);
                }
                gamma[(k * ns + s) * nw + u] = D::from_log(m);
            }
        }
    }

    let mut alpha = vec![D::zero(); (steps + 1) * ns];
    alpha[0] = D::one();
    for k in 0..steps {
        let (cur, next) = alpha.split_at_mut((k + 1) * ns);
        let cur = &cur[k * ns..];
        let next = &mut next[..ns];
        for s in 0..ns {
            if cur[s] == D::zero() {
                continue;
            }
            for u in 0..nw {
                if !allowed(k, s, u) {
                    continue;
                }
                let s2 = t.next_state(s, u);
                next[s2] = D::add(next[s2], D::mul(cur[s], gamma[(k * ns + s) * nw + u]));
            }
        }
        D::normalize(next);
    }

    let mut beta = vec![D::zero(); (steps + 1) * ns];
    beta[steps * ns] = D::one();
    for k in (0..steps).rev() {
        let (cur, next) = beta.split_at_mut((k + 1) * ns);
        let cur = &mut cur[k * ns..];
        let next = &next[..ns];
        for s in 0..ns {
            let mut acc = D::zero();
            for u in 0..nw {
                if !allowed(k, s, u) {
                    continue;
                }
                let s2 = t.next_state(s, u);
                acc = D::add(acc, D::mul(gamma[(k * ns + s) * nw + u], next[s2]));
            }
            cur[s] = acc;
        }
        D::normalize(cur);
    }

    let mut input_app = vec![T::zero(); steps * k_in];
    let mut code_app = vec![T::zero(); steps * n_out];
    let mut in_acc = vec![[D::zero(), D::zero()]; k_in];
    let mut out_acc = vec![[D::zero(), D::zero()]; n_out];
    for k in 0..steps {
        in_acc.iter_mut().for_each(|a| *a = [D::zero(), D::zero()]);
        out_acc.iter_mut().for_each(|a| *a = [D::zero(), D::zero()]);
        for s in 0..ns {
            let a = alpha[k * ns + s];
            if a == D::zero() {
                continue;
            }
            for u in 0..nw {
                if !allowed(k, s, u) {
                    continue;
                }
                let s2 = t.next_state(s, u);
                let p = D::mul(
                    D::mul(a, gamma[(k * ns + s) * nw + u]),
                    beta[(k + 1) * ns + s2],
                );
                for (j, acc) in in_acc.iter_mut().enumerate() {
                    let b = (u >> j) & 1;
                    acc[b] = D::add(acc[b], p);
                }
                let o = t.output_word(s, u);
                for (j, acc) in out_acc.iter_mut().enumerate() {
                    let b = ((o >> j) & 1) as usize;
                    acc[b] = D::add(acc[b], p);
                }
            }
        }
        for (j, acc) in in_acc.iter().enumerate() {
            input_app[k * k_in + j] = finite_llr(D::llr(acc[0], acc[1]));
        }
        for (j, acc) in out_acc.iter().enumerate() {
            code_app[k * n_out + j] = finite_llr(D::llr(acc[0], acc[1]));
        }
    }
    (input_app, code_app)
}

/// Bits forced by termination have one empty class; report them as a
/// saturated LLR instead of an infinity.
fn finite_llr<T: Real>(x: T) -> T {
    let cap = T::lit(1e3);
    if x.is_nan() {
        T::zero()
    } else {
        x.max(-cap).min(cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::standard_normal;
    use crate::Bit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bpsk_llrs(cw: &[Bit], esn0_db: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // y = ±1 + n, n ~ N(0, σ²), LLR = 2y/σ².
        let sigma2 = 1.0 / (2.0 * 10f64.powf(esn0_db / 10.0));
        cw.iter()
            .map(|&b| {
                let x = 1.0 - 2.0 * b as f64;
                let y = x + sigma2.sqrt() * standard_normal::<f64, _>(rng);
                2.0 * y / sigma2
            })
            .collect()
    }

    fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<Bit> {
        (0..n).map(|_| rng.random_range(0..2)).collect()
    }

    #[test]
    fn noiseless_codeword_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for code in [RscCode::rate_half_5_7(), RscCode::rate_two_thirds_5_7()] {
            let msg = random_bits(64, &mut rng);
            let cw = code.encode(&msg).unwrap();
            let llr: Vec<f64> = cw
                .iter()
                .map(|&b| if b == 0 { 20.0 } else { -20.0 })
                .collect();
            let ap = vec![0.0; cw.len() / code.outputs_per_step() * code.inputs_per_step()];
            for alg in [
                DecodeAlgorithm::Map,
                DecodeAlgorithm::LogMap,
                DecodeAlgorithm::MaxLogMap,
            ] {
                let out = siso_decode(&code, &llr, &ap, alg).unwrap();
                let dec: Vec<Bit> = out.input_app[..msg.len()]
                    .iter()
                    .map(|&l| u8::from(l < 0.0))
                    .collect();
                assert_eq!(dec, msg, "{alg:?}");
                let cdec: Vec<Bit> = out.code_app.iter().map(|&l| u8::from(l < 0.0)).collect();
                assert_eq!(cdec, cw);
            }
        }
    }

    #[test]
    fn zero_input_gives_zero_extrinsic() {
        let code = RscCode::rate_half_5_7();
        let ch = vec![0.0f64; 2 * 34];
        let ap = vec![0.0; 34];
        for alg in [
            DecodeAlgorithm::Map,
            DecodeAlgorithm::LogMap,
            DecodeAlgorithm::MaxLogMap,
        ] {
            let out = siso_decode(&code, &ch, &ap, alg).unwrap();
            // Tail inputs are forced by the state, so only the message part
            // is free of information.
            for &e in &out.input_extrinsic[..32] {
                assert!(e.abs() < 1e-12, "{alg:?}: {e}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let code = RscCode::rate_half_5_7();
        assert!(siso_decode(&code, &[0.0; 5], &[0.0; 2], DecodeAlgorithm::LogMap).is_err());
        assert!(siso_decode(&code, &[0.0; 8], &[0.0; 3], DecodeAlgorithm::LogMap).is_err());
        let mut ch = vec![0.0; 8];
        ch[3] = f64::NAN;
        assert!(matches!(
            siso_decode(&code, &ch, &[0.0; 4], DecodeAlgorithm::LogMap),
            Err(Error::InvalidInput(_))
        ));
        ch[3] = f64::INFINITY;
        assert!(siso_decode(&code, &ch, &[0.0; 4], DecodeAlgorithm::Map).is_err());
    }

    #[test]
    fn log_map_equals_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for code in [RscCode::rate_half_5_7(), RscCode::rate_two_thirds_5_7()] {
            let msg = random_bits(64, &mut rng);
            let cw = code.encode(&msg).unwrap();
            let ch = bpsk_llrs(&cw, 0.0, &mut rng);
            let ap: Vec<f64> = (0..cw.len() / code.outputs_per_step() * code.inputs_per_step())
                .map(|_| standard_normal::<f64, _>(&mut rng))
                .collect();
            let a = siso_decode(&code, &ch, &ap, DecodeAlgorithm::Map).unwrap();
            let b = siso_decode(&code, &ch, &ap, DecodeAlgorithm::LogMap).unwrap();
            for (x, y) in a
                .input_app
                .iter()
                .zip(&b.input_app)
                .chain(a.code_app.iter().zip(&b.code_app))
            {
                assert!((x - y).abs() < 1e-6, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn extrinsic_excludes_own_apriori() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let code = RscCode::rate_half_5_7();
        let msg = random_bits(48, &mut rng);
        let cw = code.encode(&msg).unwrap();
        let ch = bpsk_llrs(&cw, 1.0, &mut rng);
        let ap: Vec<f64> = (0..50)
            .map(|_| standard_normal::<f64, _>(&mut rng))
            .collect();
        let base = siso_decode(&code, &ch, &ap, DecodeAlgorithm::MaxLogMap).unwrap();
        for i in [0usize, 7, 23, 47] {
            let mut ap2 = ap.clone();
            ap2[i] += 3.7;
            let out = siso_decode(&code, &ch, &ap2, DecodeAlgorithm::MaxLogMap).unwrap();
            assert!((out.input_extrinsic[i] - base.input_extrinsic[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn log_map_and_map_hard_decisions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let code = RscCode::rate_half_5_7();
        for _ in 0..200 {
            let msg = random_bits(64, &mut rng);
            let cw = code.encode(&msg).unwrap();
            let ch = bpsk_llrs(&cw, 0.0, &mut rng);
            let ap = vec![0.0; 66];
            let a = siso_decode(&code, &ch, &ap, DecodeAlgorithm::Map).unwrap();
            let b = siso_decode(&code, &ch, &ap, DecodeAlgorithm::LogMap).unwrap();
            let ha: Vec<bool> = a.input_app.iter().map(|&x| x < 0.0).collect();
            let hb: Vec<bool> = b.input_app.iter().map(|&x| x < 0.0).collect();
            assert_eq!(ha, hb);
        }
    }

    #[test]
    fn single_precision_decoder() {
        let code = RscCode::rate_half_5_7();
        let msg: Vec<Bit> = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let cw = code.encode(&msg).unwrap();
        let llr: Vec<f32> = cw
            .iter()
            .map(|&b| if b == 0 { 4.0 } else { -4.0 })
            .collect();
        let out = siso_decode(&code, &llr, &[0f32; 10], DecodeAlgorithm::Map).unwrap();
        let dec: Vec<Bit> = out.input_app[..8]
            .iter()
            .map(|&l| u8::from(l < 0.0))
            .collect();
        assert_eq!(dec, msg);
    }

    #[test]
    fn algorithm_names_roundtrip() {
        for a in [
            DecodeAlgorithm::Map,
            DecodeAlgorithm::LogMap,
            DecodeAlgorithm::MaxLogMap,
        ] {
            assert_eq!(DecodeAlgorithm::parse(a.name()).unwrap(), a);
        }
        assert!(DecodeAlgorithm::parse("viterbi").is_err());
    }
}
