use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stlink::tde::{
    cross_correlate, default_pulse, delays_to_lambdas, estimate_delays, model_matrix,
    projected_error, select_bins, solve_amplitudes, synthesize_received, windowed_sinc_pulse,
    DelayEstimate, SearchSpec, TdeScenario,
};

type C = Complex<f64>;

const TS: f64 = 1e-6;

fn estimate(r: &[C], paths: usize) -> DelayEstimate<f64> {
    estimate_delays(
        r,
        &default_pulse(64),
        TS,
        paths,
        0.1,
        &SearchSpec::default(),
    )
    .unwrap()
}

fn scenario(amplitudes: Vec<f64>, delays: Vec<f64>) -> TdeScenario<f64> {
    TdeScenario::new(default_pulse(64), TS, amplitudes, delays).unwrap()
}

fn noiseless(amplitudes: Vec<f64>, delays: Vec<f64>) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    synthesize_received(&scenario(amplitudes, delays), &mut rng).unwrap()
}

#[test]
fn least_squares_amplitudes_match_pseudoinverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let sel = select_bins(&default_pulse::<f64>(64), 0.1, 3).unwrap();
    for m in 1..=3 {
        let lambdas: Vec<f64> = (0..m)
            .map(|k| -0.4 - 0.9 * k as f64 - rng.random_range(0.0..0.3))
            .collect();
        let r: Vec<C> = (0..sel.len())
            .map(|_| C::new(rng.random(), rng.random()))
            .collect();
        let p = model_matrix(&lambdas, &sel);
        let pm = DMatrix::from_fn(sel.len(), m, |i, j| p[(i, j)]);
        let rv = DMatrix::from_fn(sel.len(), 1, |i, _| r[i]);
        let oracle = pm.clone().pseudo_inverse(1e-14).unwrap() * &rv;
        let a = solve_amplitudes(&lambdas, &sel, &r).unwrap();
        for k in 0..m {
            assert!((a[k] - oracle[k]).norm() < 1e-9);
        }
        let fitted = &pm * &oracle;
        let e: f64 = (&rv - fitted).iter().map(|z| z.norm_sqr()).sum();
        assert!((projected_error(&lambdas, &sel, &r).unwrap() - e).abs() < 1e-9);
    }
}

/// The projected error equals the full least-squares error evaluated at the
/// fitted amplitudes.
#[test]
fn projected_and_explicit_errors_coincide() {
    let r = noiseless(vec![1.0, -0.5], vec![11.2e-6, 14.9e-6]);
    let sel = select_bins(&default_pulse::<f64>(64), 0.1, 2).unwrap();
    let obs = sel.observe(&r).unwrap();
    let lambdas = delays_to_lambdas(&[10.0e-6, 15.5e-6], 64, TS);
    let a = solve_amplitudes(&lambdas, &sel, &obs).unwrap();
    let p = model_matrix(&lambdas, &sel);
    let explicit: f64 = (0..sel.len())
        .map(|l| (obs[l] - (p[(l, 0)] * a[0] + p[(l, 1)] * a[1])).norm_sqr())
        .sum();
    let projected = projected_error(&lambdas, &sel, &obs).unwrap();
    assert!((explicit - projected).abs() <= 1e-10 * explicit.max(1.0));
}

#[test]
fn noiseless_two_paths_recovered_with_amplitudes() {
    let truth = [12.25e-6, 17.55e-6];
    let est = estimate(&noiseless(vec![1.0, 0.7], truth.to_vec()), 2);
    for (d, t) in est.delays.iter().zip(&truth) {
        assert!((d - t).abs() <= TS / 256.0, "{d} vs {t}");
    }
    assert!((est.amplitudes[0] - C::new(1.0, 0.0)).norm() < 1e-2);
    assert!((est.amplitudes[1] - C::new(0.7, 0.0)).norm() < 1e-2);
}

/// Re-synthesizing from an estimate and estimating again returns the same
/// delays.
#[test]
fn estimation_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let s = scenario(vec![1.0, 0.6], vec![20.4e-6, 26.1e-6]).with_snr_db(15.0);
    let first = estimate(&synthesize_received(&s, &mut rng).unwrap(), 2);
    let amps: Vec<f64> = first.amplitudes.iter().map(|a| a.re).collect();
    let second = estimate(&noiseless(amps, first.delays.clone()), 2);
    for (a, b) in first.delays.iter().zip(&second.delays) {
        assert!((a - b).abs() <= TS / 128.0, "{a} vs {b}");
    }
}

#[test]
fn delay_shift_moves_estimates_by_the_same_amount() {
    let base = [18.3e-6, 23.9e-6];
    let a = estimate(&noiseless(vec![1.0, 0.8], base.to_vec()), 2);
    for delta in [0.37e-6, 3.11e-6, 9.5e-6] {
        let shifted: Vec<f64> = base.iter().map(|t| t + delta).collect();
        let b = estimate(&noiseless(vec![1.0, 0.8], shifted), 2);
        for (x, y) in a.delays.iter().zip(&b.delays) {
            assert!(
                (y - x - delta).abs() <= TS / 128.0,
                "shift {delta}: {x} -> {y}"
            );
        }
    }
}

#[test]
fn scaling_the_observation_scales_amplitudes_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let s = scenario(vec![1.0, 0.5], vec![30.2e-6, 36.7e-6]).with_snr_db(20.0);
    let r = synthesize_received(&s, &mut rng).unwrap();
    let a = estimate(&r, 2);
    let c = C::from_polar(3.0, 0.8);
    let scaled: Vec<C> = r.iter().map(|z| z * c).collect();
    let b = estimate(&scaled, 2);
    assert_eq!(a.delays, b.delays);
    for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
        assert!((x * c - y).norm() < 1e-9);
    }
    assert!((b.residual - 9.0 * a.residual).abs() <= 1e-9 * b.residual.max(1e-12));
}

#[test]
fn median_error_shrinks_with_snr() {
    let mut medians = Vec::new();
    for snr in [5.0, 15.0, 25.0] {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let s = scenario(vec![1.0], vec![27.3e-6]).with_snr_db(snr);
        let mut errs: Vec<f64> = (0..41)
            .map(|_| {
                (estimate(&synthesize_received(&s, &mut rng).unwrap(), 1).delays[0] - 27.3e-6).abs()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        medians.push(errs[20]);
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "{medians:?}"
    );
}

#[test]
fn bins_are_taken_from_the_pulse_passband() {
    let pulse = windowed_sinc_pulse::<f64>(128, 0.25, 16.0, 16.0);
    let sel = select_bins(&pulse, 0.1, 1).unwrap();
    assert!(sel.bins.iter().all(|&q| q < 64));
    let upper = sel.bins.iter().max().unwrap();
    assert!(
        (*upper as f64) <= 0.25 * 128.0 / 2.0 + 4.0,
        "bins reach {upper}"
    );
    assert!(sel.bins.len() >= 10);
}

/// Two echoes 1.5 samples apart merge into a single correlation peak while
/// the least-squares estimator still separates them.
#[test]
fn close_echoes_resolved_where_correlation_merges() {
    let truth = [30.0e-6, 31.5e-6];
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let s = scenario(vec![1.0, 1.0], truth.to_vec()).with_snr_db(30.0);
    let r = synthesize_received(&s, &mut rng).unwrap();
    let corr = cross_correlate(&r, &default_pulse(64)).unwrap();
    assert_eq!(
        corr.peaks(0.5).len(),
        1,
        "correlation peaks {:?}",
        corr.peaks(0.5)
    );
    let est = estimate(&r, 2);
    for (d, t) in est.delays.iter().zip(&truth) {
        assert!((d - t).abs() <= TS / 4.0, "{d} vs {t}");
    }
}
