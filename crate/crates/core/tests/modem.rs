use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use stlink::modem::{ber_awgn, ber_rayleigh_mrc, ebn0_to_esn0_db, Constellation, LlrMethod};
use stlink::{Bit, Constellation32, Constellation64};

type C = Complex<f64>;

fn cn(rng: &mut ChaCha8Rng, variance: f64) -> C {
    let s = (variance / 2.0).sqrt();
    C::new(
        rng.sample::<f64, _>(StandardNormal) * s,
        rng.sample::<f64, _>(StandardNormal) * s,
    )
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<Bit> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

#[test]
fn modulate_then_slice_is_identity_for_every_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [4usize, 16, 64, 256] {
        let c = Constellation64::new(m).unwrap();
        let bits = random_bits(&mut rng, 60 * c.bits_per_symbol());
        let syms = c.modulate(&bits).unwrap();
        assert_eq!(c.demod_hard(&syms), bits, "M={m}");
        let soft = c.demod_llr(&syms, 0.01).unwrap();
        assert_eq!(soft.hard_decisions(), bits, "M={m}");
        let energy: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
        assert!((energy - 1.0).abs() < 1e-12);
    }
}

#[test]
fn neighbours_differ_in_one_bit() {
    for m in [4usize, 16, 64] {
        let c = Constellation64::new(m).unwrap();
        let d_min = 2.0 * c.norm_factor();
        for a in 0..m {
            for b in 0..m {
                let d = (c.point(a) - c.point(b)).norm();
                if (d - d_min).abs() < 1e-9 {
                    assert_eq!((a ^ b).count_ones(), 1, "M={m}: {a} and {b} are adjacent");
                }
            }
        }
    }
}

#[test]
fn single_precision_agrees_with_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c64 = Constellation64::new(16).unwrap();
    let c32 = Constellation32::new(16).unwrap();
    let bits = random_bits(&mut rng, 400);
    let noisy: Vec<C> = c64
        .modulate(&bits)
        .unwrap()
        .into_iter()
        .map(|x| x + cn(&mut rng, 0.05))
        .collect();
    let noisy32: Vec<Complex<f32>> = noisy
        .iter()
        .map(|z| Complex::new(z.re as f32, z.im as f32))
        .collect();
    let a = c64.demod_llr(&noisy, 0.05).unwrap().llrs;
    let b = c32.demod_llr(&noisy32, 0.05).unwrap().llrs;
    for (x, y) in a.iter().zip(&b) {
        assert!((x - *y as f64).abs() <= 1e-3 * x.abs().max(1.0));
    }
}

#[test]
fn exact_and_max_log_agree_at_high_snr() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = Constellation64::new(64).unwrap();
    let nv = 1e-3;
    let bits = random_bits(&mut rng, 600);
    let y: Vec<C> = c
        .modulate(&bits)
        .unwrap()
        .into_iter()
        .map(|x| x + cn(&mut rng, nv))
        .collect();
    let a = c.demod_llr_with(&y, nv, LlrMethod::MaxLog).unwrap().llrs;
    let b = c.demod_llr_with(&y, nv, LlrMethod::Exact).unwrap().llrs;
    for (x, e) in a.iter().zip(&b) {
        assert!((x - e).abs() <= 1e-6 * x.abs().max(1.0));
    }
}

/// Uncoded BER over the whole chain, noise drawn directly, against the
/// closed form.
#[test]
fn awgn_chain_tracks_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (m, ebn0) in [(4usize, 6.0), (16, 8.0), (64, 12.0)] {
        let c = Constellation::<f64>::new(m).unwrap();
        let k = c.bits_per_symbol();
        let es_n0 = 10f64.powf(ebn0_to_esn0_db(ebn0, k, 1.0) / 10.0);
        let (mut errors, mut bits) = (0usize, 0usize);
        while errors < 2000 {
            let tx = random_bits(&mut rng, 1200 * k);
            let y: Vec<C> = c
                .modulate(&tx)
                .unwrap()
                .into_iter()
                .map(|x| x + cn(&mut rng, 1.0 / es_n0))
                .collect();
            errors += c
                .demod_hard(&y)
                .iter()
                .zip(&tx)
                .filter(|(a, b)| a != b)
                .count();
            bits += tx.len();
        }
        let sim = errors as f64 / bits as f64;
        let theory = ber_awgn(m, ebn0);
        assert!(
            (sim - theory).abs() / theory < 0.1,
            "M={m}: {sim} vs {theory}"
        );
    }
}

/// Maximal-ratio combining over `L` independent Rayleigh branches, each with
/// the given per-branch Eb/N0.
#[test]
fn mrc_monte_carlo_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = Constellation::<f64>::new(4).unwrap();
    for (l, ebn0) in [(1usize, 10.0), (2, 8.0), (4, 4.0)] {
        let es_n0 = 10f64.powf(ebn0_to_esn0_db(ebn0, 2, 1.0) / 10.0);
        let nv = 1.0 / es_n0;
        let (mut errors, mut bits) = (0usize, 0usize);
        while errors < 3000 {
            let tx = random_bits(&mut rng, 2);
            let x = c.modulate(&tx).unwrap()[0];
            let (mut num, mut gain) = (C::new(0.0, 0.0), 0.0);
            for _ in 0..l {
                let h = cn(&mut rng, 1.0);
                let y = h * x + cn(&mut rng, nv);
                num += h.conj() * y;
                gain += h.norm_sqr();
            }
            let rx = c.demod_hard(&[num / gain]);
            errors += rx.iter().zip(&tx).filter(|(a, b)| a != b).count();
            bits += 2;
        }
        let sim = errors as f64 / bits as f64;
        let theory = ber_rayleigh_mrc(4, ebn0, l);
        assert!(
            (sim - theory).abs() / theory < 0.15,
            "L={l}: {sim} vs {theory}"
        );
    }
}
