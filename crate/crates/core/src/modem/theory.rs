//! Closed-form uncoded bit error rates for gray-coded square QAM.
//!
//! All curves use the nearest-neighbour approximation
//! `BER ≈ a·Q(√(b·γ_b))` with `a = (4/k)(1 − 1/√M)` and `b = 3k/(M − 1)`,
//! where `k = log2 M` and `γ_b = Eb/N0`. `M = 2` is BPSK, `Q(√(2γ_b))`.

use statrs::function::erf::erfc;

use crate::scalar::{db_to_linear, linear_to_db};

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Es/N0 in dB for a link carrying `bits_per_symbol` coded bits per channel
/// symbol at an overall information rate `rate` per coded bit.
///
/// `Es/N0 = Eb/N0 · log2(M) · rate`; the rate includes the FEC rate and any
/// space-time code rate.
pub fn ebn0_to_esn0_db(ebn0_db: f64, bits_per_symbol: usize, rate: f64) -> f64 {
    ebn0_db + linear_to_db(bits_per_symbol as f64 * rate)
}

fn coefficients(order: usize) -> (f64, f64) {
    assert!(order >= 2 && order.is_power_of_two(), "QAM order {order}");
    if order == 2 {
        return (1.0, 2.0);
    }
    let k = order.trailing_zeros() as f64;
    let m = order as f64;
    (4.0 / k * (1.0 - 1.0 / m.sqrt()), 3.0 * k / (m - 1.0))
}

/// Uncoded BER over AWGN.
pub fn ber_awgn(order: usize, ebn0_db: f64) -> f64 {
    let (a, b) = coefficients(order);
    a * q_function((b * db_to_linear(ebn0_db)).sqrt())
}

/// Uncoded BER with `diversity_order` iid Rayleigh branches combined by MRC;
/// `ebn0_db` is the mean Eb/N0 of each branch.
///
/// Averages `Q(√(b·γ))` over the chi-square distribution of the combined SNR
/// in closed form.
pub fn ber_rayleigh_mrc(order: usize, ebn0_db: f64, diversity_order: usize) -> f64 {
    assert!(diversity_order >= 1, "diversity order must be at least 1");
    let (a, b) = coefficients(order);
    let x = 0.5 * b * db_to_linear(ebn0_db);
    let mu = (x / (1.0 + x)).sqrt();
    let l = diversity_order;
    let lo = 0.5 * (1.0 - mu);
    let hi = 0.5 * (1.0 + mu);
    let mut sum = 0.0;
    let mut binom = 1.0; // C(L-1+j, j)
    for j in 0..l {
        if j > 0 {
            binom *= (l - 1 + j) as f64 / j as f64;
        }
        sum += binom * hi.powi(j as i32);
    }
    a * lo.powi(l as i32) * sum
}

/// Uncoded BER of an orthogonal space-time block code with `n_tx` transmit
/// and `n_rx` receive antennas under a total transmit energy constraint.
///
/// Combining turns the code into `n_tx·n_rx`-branch MRC whose per-branch
/// Eb/N0 is the link Eb/N0 divided by `n_tx`.
pub fn ber_ostbc_rayleigh(order: usize, ebn0_db: f64, n_tx: usize, n_rx: usize) -> f64 {
    ber_rayleigh_mrc(order, ebn0_db - linear_to_db(n_tx as f64), n_tx * n_rx)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Eb/N0 where a decreasing curve crosses `target`, by bisection.
    fn crossing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 40.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > target {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn operating_points_at_one_in_a_million() {
        for (m, want) in [(2usize, 10.5), (16, 14.5), (256, 23.5)] {
            let x = crossing(|e| ber_awgn(m, e), 1e-6);
            assert!((x - want).abs() <= 0.5, "M={m}: {x:.3} dB");
        }
    }

    #[test]
    fn qpsk_equals_bpsk() {
        for e in [0.0, 5.0, 9.6] {
            assert!((ber_awgn(4, e) - ber_awgn(2, e)).abs() < 1e-15);
        }
    }

    #[test]
    fn rayleigh_single_branch_bpsk_closed_form() {
        // Textbook: 0.5(1 - sqrt(g/(1+g))).
        for e in [0.0, 10.0, 20.0] {
            let g = db_to_linear(e);
            let want = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
            assert!((ber_rayleigh_mrc(2, e, 1) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn strictly_decreasing_on_grid() {
        for m in [2usize, 4, 16, 64, 256] {
            for d in 1..=4 {
                let mut prev_awgn = f64::INFINITY;
                let mut prev_ray = f64::INFINITY;
                for i in 0..=80 {
                    let e = 0.5 * i as f64;
                    let a = ber_awgn(m, e);
                    let r = ber_rayleigh_mrc(m, e, d);
                    if a > 0.0 {
                        assert!(a < prev_awgn, "awgn M={m} e={e}");
                    }
                    assert!(r < prev_ray, "rayleigh M={m} D={d} e={e}");
                    prev_awgn = a;
                    prev_ray = r;
                }
            }
        }
    }

    #[test]
    fn diversity_slopes() {
        for d in [1usize, 2, 3] {
            let slope =
                ber_rayleigh_mrc(16, 30.0, d).log10() - ber_rayleigh_mrc(16, 40.0, d).log10();
            assert!((slope - d as f64).abs() <= 0.1 * d as f64, "D={d}: {slope}");
        }
        for i in 0..=80 {
            let e = 0.5 * i as f64;
            assert!(ber_rayleigh_mrc(16, e, 2) < ber_rayleigh_mrc(16, e, 1));
        }
    }

    #[test]
    fn conversion_includes_rate() {
        assert!((ebn0_to_esn0_db(10.0, 4, 1.0) - (10.0 + 10.0 * 4f64.log10())).abs() < 1e-12);
        assert!((ebn0_to_esn0_db(3.0, 4, 0.75) - (3.0 + 10.0 * 3f64.log10())).abs() < 1e-12);
    }
}
