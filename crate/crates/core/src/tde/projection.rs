use num_complex::Complex;
use num_traits::Zero;

use super::SpectralSelection;
use crate::matrix::CMatrix;
use crate::{Error, Real, Result};

/// `A(λ)`, entry `(l, m) = exp(j λ_m q_l)`.
pub fn steering_matrix<T: Real>(lambdas: &[T], bins: &[usize]) -> CMatrix<T> {
    CMatrix::from_fn(bins.len(), lambdas.len(), |l, m| {
        Complex::from_polar(T::one(), lambdas[m] * T::from_usize_lossy(bins[l]))
    })
}

/// `p̃(λ) = S·A(λ)` with `S = diag(S[q_1], …, S[q_L])`.
pub fn model_matrix<T: Real>(lambdas: &[T], selection: &SpectralSelection<T>) -> CMatrix<T> {
    let mut p = steering_matrix(lambdas, &selection.bins);
    for (l, s) in selection.pulse_spectrum.iter().enumerate() {
        for m in 0..lambdas.len() {
            p[(l, m)] *= s;
        }
    }
    p
}

/// Thin QR factorization `P = Q·R` by Householder reflections; `Q` is
/// `L × M` with orthonormal columns, `R` is `M × M` upper triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinQr<T> {
    pub q: CMatrix<T>,
    pub r: CMatrix<T>,
}

impl<T: Real> ThinQr<T> {
    /// Fails with [`Error::DegenerateDelays`] when `p` is numerically rank
    /// deficient or has more columns than rows.
    pub fn new(p: &CMatrix<T>) -> Result<Self> {
        let (l, m) = p.shape();
        if m == 0 || l < m {
            return Err(Error::DegenerateDelays);
        }
        let tol = T::epsilon().powf(T::lit(0.6)) * p.frobenius_norm_sqr().sqrt();
        let mut a = p.clone();
        let mut reflectors: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
        for k in 0..m {
            let norm = (k..l)
                .fold(T::zero(), |acc, i| acc + a[(i, k)].norm_sqr())
                .sqrt();
            if !(norm > tol) {
                return Err(Error::DegenerateDelays);
            }
            let x0 = a[(k, k)];
            let phase = if x0.norm() > T::zero() {
                x0 / x0.norm()
            } else {
                Complex::new(T::one(), T::zero())
            };
            let alpha = -phase * norm;
            let mut v: Vec<Complex<T>> = (k..l).map(|i| a[(i, k)]).collect();
            v[0] -= alpha;
            let vn = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
            if vn > T::zero() {
                let two_over = T::lit(2.0) / vn;
                for j in k..m {
                    let dot = v
                        .iter()
                        .enumerate()
                        .fold(Complex::zero(), |acc: Complex<T>, (i, vi)| {
                            acc + vi.conj() * a[(k + i, j)]
                        });
                    let f = dot * two_over;
                    for (i, vi) in v.iter().enumerate() {
                        a[(k + i, j)] -= vi * f;
                    }
                }
            }
            reflectors.push(v);
        }
        let r = CMatrix::from_fn(
            m,
            m,
            |i, j| if i <= j { a[(i, j)] } else { Complex::zero() },
        );
        let mut q = CMatrix::from_fn(l, m, |i, j| {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::zero()
            }
        });
        for (k, v) in reflectors.iter().enumerate().rev() {
            let vn = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
            if vn == T::zero() {
                continue;
            }
            let two_over = T::lit(2.0) / vn;
            for j in 0..m {
                let dot = v
                    .iter()
                    .enumerate()
                    .fold(Complex::zero(), |acc: Complex<T>, (i, vi)| {
                        acc + vi.conj() * q[(k + i, j)]
                    });
                let f = dot * two_over;
                for (i, vi) in v.iter().enumerate() {
                    q[(k + i, j)] -= vi * f;
                }
            }
        }
        Ok(Self { q, r })
    }

    /// `Qᴴ x`.
    pub fn q_adjoint_mul(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.q.cols())
            .map(|j| {
                x.iter().enumerate().fold(Complex::zero(), |acc, (i, xi)| {
                    acc + self.q[(i, j)].conj() * xi
                })
            })
            .collect()
    }

    /// `(I − QQᴴ) x`.
    pub fn residual(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let c = self.q_adjoint_mul(x);
        x.iter()
            .enumerate()
            .map(|(i, &xi)| {
                let proj = c
                    .iter()
                    .enumerate()
                    .fold(Complex::zero(), |acc, (j, cj)| acc + self.q[(i, j)] * cj);
                xi - proj
            })
            .collect()
    }

    /// Least-squares solution of `P a ≈ x` by back substitution on `R a = Qᴴ x`.
    pub fn solve(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let c = self.q_adjoint_mul(x);
        let m = self.r.cols();
        let mut a = vec![Complex::zero(); m];
        for i in (0..m).rev() {
            let mut s = c[i];
            for (j, aj) in a.iter().enumerate().skip(i + 1) {
                s -= self.r[(i, j)] * aj;
            }
            a[i] = s / self.r[(i, i)];
        }
        a
    }
}

fn check_observation<T: Real>(
    selection: &SpectralSelection<T>,
    observed: &[Complex<T>],
) -> Result<()> {
    if observed.len() != selection.len() {
        return Err(Error::input(format!(
            "observation has {} bins, selection has {}",
            observed.len(),
            selection.len()
        )));
    }
    Ok(())
}

/// `E_r(λ) = ‖(I − QQᴴ) r̃‖²`, the least-squares error with the amplitudes
/// eliminated.
pub fn projected_error<T: Real>(
    lambdas: &[T],
    selection: &SpectralSelection<T>,
    observed: &[Complex<T>],
) -> Result<T> {
    check_observation(selection, observed)?;
    let qr = ThinQr::new(&model_matrix(lambdas, selection))?;
    Ok(qr
        .residual(observed)
        .iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr()))
}

/// `â = argmin_a ‖r̃ − p̃(λ) a‖²`.
pub fn solve_amplitudes<T: Real>(
    lambdas: &[T],
    selection: &SpectralSelection<T>,
    observed: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    check_observation(selection, observed)?;
    let qr = ThinQr::new(&model_matrix(lambdas, selection))?;
    Ok(qr.solve(observed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::standard_normal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn random_matrix(l: usize, m: usize, rng: &mut ChaCha8Rng) -> CMatrix<f64> {
        CMatrix::from_fn(l, m, |_, _| {
            C::new(standard_normal(rng), standard_normal(rng))
        })
    }

    #[test]
    fn qr_reconstructs_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (l, m) in [(5, 1), (8, 3), (20, 4), (3, 3)] {
            let p = random_matrix(l, m, &mut rng);
            let qr = ThinQr::new(&p).unwrap();
            assert!(qr.q.mul(&qr.r).max_abs_diff(&p) < 1e-12);
            assert!(
                qr.q.adjoint()
                    .mul(&qr.q)
                    .max_abs_diff(&CMatrix::identity(m))
                    < 1e-12
            );
            for i in 0..m {
                for j in 0..i {
                    assert_eq!(qr.r[(i, j)], C::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_matrix(6, 1, &mut rng);
        let dup = CMatrix::from_fn(6, 2, |i, _| p[(i, 0)]);
        assert!(matches!(ThinQr::new(&dup), Err(Error::DegenerateDelays)));
        assert!(matches!(
            ThinQr::new(&random_matrix(2, 3, &mut rng)),
            Err(Error::DegenerateDelays)
        ));
    }

    #[test]
    fn steering_basics() {
        let a = steering_matrix(&[0.0, 0.0], &[1, 4, 9]);
        assert!(a
            .as_slice()
            .iter()
            .all(|z| (z - C::new(1.0, 0.0)).norm() < 1e-15));
        let a = steering_matrix(&[0.37], &[0, 2, 5, 11, 12]);
        let n: f64 = a.column(0).iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 5.0).abs() < 1e-12);
    }

    #[test]
    fn distinct_lambdas_give_independent_columns() {
        let a = steering_matrix(&[-0.3, -0.45], &[2, 3, 7]);
        let g = a.adjoint().mul(&a);
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        assert!(det.norm() > 1e-3);
    }
}
