use num_complex::Complex;
use rayon::prelude::*;

use super::spectrum::{select_bins, SpectralSelection};
use super::{projected_error, solve_amplitudes};
use crate::{Error, Real, Result};

/// Lowest error seen so far and the grid indices that gave it.
type Best<T> = Option<(T, Vec<usize>)>;

/// Grid and refinement settings for [`estimate_delays`].
///
/// Step sizes and the separation guard are in units of the sampling
/// interval; the window is in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec<T> {
    /// Delay window `[lo, hi)` in seconds. `None` searches the whole
    /// observation window.
    pub window: Option<(T, T)>,
    pub coarse_step: T,
    pub fine_step: T,
    /// Candidates with two delays closer than this are skipped.
    pub min_separation: T,
    /// Upper bound on coordinate sweeps during refinement.
    pub max_sweeps: usize,
}

impl<T: Real> Default for SearchSpec<T> {
    fn default() -> Self {
        Self {
            window: None,
            coarse_step: T::lit(0.25),
            fine_step: T::lit(1.0 / 256.0),
            min_separation: T::lit(1.0 / 64.0),
            max_sweeps: 50,
        }
    }
}

impl<T: Real> SearchSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.coarse_step > T::zero()) {
            return Err(Error::config("tde.coarse_step", "must be positive"));
        }
        if !(self.fine_step > T::zero() && self.fine_step <= self.coarse_step) {
            return Err(Error::config(
                "tde.fine_step",
                "must be positive and no larger than the coarse step",
            ));
        }
        if !(self.min_separation >= T::zero()) {
            return Err(Error::config("tde.min_separation", "must be non-negative"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::config(
                "tde.max_sweeps",
                "at least one sweep required",
            ));
        }
        Ok(())
    }
}

/// Output of the delay estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayEstimate<T> {
    /// `λ_k` for the reported delays.
    pub lambdas: Vec<T>,
    /// Estimated delays in seconds, ascending.
    pub delays: Vec<T>,
    /// Least-squares amplitudes, one per delay.
    pub amplitudes: Vec<Complex<T>>,
    /// Final projected error `E_r`.
    pub residual: T,
    /// Coarse grid spacing in seconds.
    pub grid_resolution: T,
    /// Golden-section termination width in seconds.
    pub refinement_resolution: T,
    /// Number of delay tuples scored on the coarse grid.
    pub grid_candidates: usize,
    /// Accepted coordinate moves during refinement.
    pub refinement_steps: usize,
    /// `E_r` after the grid search, then after every accepted move.
    pub error_trace: Vec<T>,
}

/// Reusable estimator for one pulse, path count and search setup.
#[derive(Debug, Clone)]
pub struct DelayEstimator<T> {
    selection: SpectralSelection<T>,
    sample_interval: T,
    paths: usize,
    spec: SearchSpec<T>,
    /// Grid delays in samples.
    grid: Vec<T>,
    /// `p̃` column for every grid delay.
    columns: Vec<Vec<Complex<T>>>,
    lo: T,
    hi: T,
}

impl<T: Real> DelayEstimator<T> {
    pub fn new(
        pulse: &[Complex<T>],
        sample_interval: T,
        paths: usize,
        threshold_fraction: T,
        spec: SearchSpec<T>,
    ) -> Result<Self> {
        spec.validate()?;
        if paths == 0 {
            return Err(Error::config("tde.paths", "at least one path required"));
        }
        if !(sample_interval > T::zero()) {
            return Err(Error::config("tde.sample_interval", "must be positive"));
        }
        let selection = select_bins(pulse, threshold_fraction, paths)?;
        let n = T::from_usize_lossy(pulse.len());
        let (lo, hi) = match spec.window {
            None => (T::zero(), n),
            Some((a, b)) => (a / sample_interval, b / sample_interval),
        };
        if !(lo >= T::zero() && hi <= n && hi > lo) {
            return Err(Error::config(
                "tde.search_window",
                "window must be a non-empty sub-interval of [0, N*T_s)",
            ));
        }
        let count = ((hi - lo) / spec.coarse_step - T::lit(1e-9))
            .ceil()
            .to_usize()
            .unwrap_or(0);
        let grid: Vec<T> = (0..count)
            .map(|k| lo + T::from_usize_lossy(k) * spec.coarse_step)
            .collect();
        if grid.len() < paths {
            return Err(Error::config(
                "tde.search_window",
                "window holds fewer grid points than paths",
            ));
        }
        let columns = grid.iter().map(|&d| column(&selection, d)).collect();
        Ok(Self {
            selection,
            sample_interval,
            paths,
            spec,
            grid,
            columns,
            lo,
            hi,
        })
    }

    pub fn selection(&self) -> &SpectralSelection<T> {
        &self.selection
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn estimate(&self, received: &[Complex<T>]) -> Result<DelayEstimate<T>> {
        let observed = self.selection.observe(received)?;
        let scale = observed.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        let (mut delays, grid_candidates, coarse_err) = self.grid_search(&observed)?;
        let mut best = coarse_err;
        let mut trace = vec![best];
        let mut steps = 0usize;
        for _ in 0..self.spec.max_sweeps {
            let mut improved = false;
            for k in 0..self.paths {
                let (cand, err) = self.refine_coordinate(&delays, k, &observed);
                // Strictly better only, with a relative margin so rounding
                // noise does not register as progress.
                if err < best - scale * T::epsilon() {
                    delays[k] = cand;
                    best = err;
                    steps += 1;
                    trace.push(best);
                    improved = true;
                }
            }
            if !improved || self.paths == 1 {
                break;
            }
        }
        let mut order: Vec<usize> = (0..self.paths).collect();
        order.sort_by(|&a, &b| delays[a].partial_cmp(&delays[b]).unwrap());
        let delays: Vec<T> = order.iter().map(|&i| delays[i]).collect();
        let lambdas = self.lambdas(&delays);
        let residual = projected_error(&lambdas, &self.selection, &observed)?;
        let amplitudes = solve_amplitudes(&lambdas, &self.selection, &observed)?;
        Ok(DelayEstimate {
            lambdas,
            delays: delays.iter().map(|&d| d * self.sample_interval).collect(),
            amplitudes,
            residual,
            grid_resolution: self.spec.coarse_step * self.sample_interval,
            refinement_resolution: self.spec.fine_step * self.sample_interval,
            grid_candidates,
            refinement_steps: steps,
            error_trace: trace,
        })
    }

    fn lambdas(&self, delays_samples: &[T]) -> Vec<T> {
        let n = T::from_usize_lossy(self.selection.n);
        let k = -T::lit(2.0) * T::PI() / n;
        delays_samples.iter().map(|&d| d * k).collect()
    }

    /// Exhaustive search over ascending grid tuples. Returns delays in
    /// samples, the number of tuples scored and the best error.
    fn grid_search(&self, observed: &[Complex<T>]) -> Result<(Vec<T>, usize, T)> {
        let g = self.grid.len();
        let m = self.paths;
        let results: Vec<(usize, Best<T>)> = (0..g)
            .into_par_iter()
            .map(|first| {
                let mut idx = vec![first];
                let mut best: Best<T> = None;
                let mut count = 0usize;
                self.enumerate(&mut idx, m, observed, &mut best, &mut count);
                (count, best)
            })
            .collect();
        let mut count = 0;
        let mut best: Best<T> = None;
        for (c, b) in results {
            count += c;
            if let Some(cand) = b {
                best = Some(match best {
                    None => cand,
                    Some(cur) => self.pick(cur, cand),
                });
            }
        }
        let (err, idx) = best.ok_or(Error::DegenerateDelays)?;
        Ok((idx.iter().map(|&i| self.grid[i]).collect(), count, err))
    }

    fn enumerate(
        &self,
        idx: &mut Vec<usize>,
        m: usize,
        observed: &[Complex<T>],
        best: &mut Best<T>,
        count: &mut usize,
    ) {
        if idx.len() == m {
            *count += 1;
            let cols: Vec<&[Complex<T>]> =
                idx.iter().map(|&i| self.columns[i].as_slice()).collect();
            if let Some(err) = residual_energy(&cols, observed) {
                let cand = (err, idx.clone());
                *best = Some(match best.take() {
                    None => cand,
                    Some(cur) => self.pick(cur, cand),
                });
            }
            return;
        }
        let last = *idx.last().unwrap();
        for next in last + 1..self.grid.len() {
            if self.grid[next] - self.grid[last] < self.spec.min_separation {
                continue;
            }
            idx.push(next);
            self.enumerate(idx, m, observed, best, count);
            idx.pop();
        }
    }

    /// Lower error wins; ties go to the lexicographically smallest λ.
    fn pick(&self, a: (T, Vec<usize>), b: (T, Vec<usize>)) -> (T, Vec<usize>) {
        if b.0 < a.0 {
            return b;
        }
        if a.0 < b.0 {
            return a;
        }
        let la = self.lambdas(&a.1.iter().map(|&i| self.grid[i]).collect::<Vec<_>>());
        let lb = self.lambdas(&b.1.iter().map(|&i| self.grid[i]).collect::<Vec<_>>());
        if lb.partial_cmp(&la) == Some(std::cmp::Ordering::Less) {
            b
        } else {
            a
        }
    }

    fn error_at(&self, delays: &[T], observed: &[Complex<T>]) -> Option<T> {
        for i in 0..delays.len() {
            if delays[i] < self.lo || delays[i] >= self.hi {
                return None;
            }
            for j in 0..i {
                if (delays[i] - delays[j]).abs() < self.spec.min_separation {
                    return None;
                }
            }
        }
        let cols: Vec<Vec<Complex<T>>> =
            delays.iter().map(|&d| column(&self.selection, d)).collect();
        let refs: Vec<&[Complex<T>]> = cols.iter().map(Vec::as_slice).collect();
        residual_energy(&refs, observed)
    }

    /// Golden-section search on delay `k` within one coarse step either
    /// side, the others held fixed.
    fn refine_coordinate(&self, delays: &[T], k: usize, observed: &[Complex<T>]) -> (T, T) {
        let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
        let mut trial = delays.to_vec();
        let mut f = |d: T| {
            trial[k] = d;
            self.error_at(&trial, observed).unwrap_or(T::infinity())
        };
        let mut a = (delays[k] - self.spec.coarse_step).max(self.lo);
        let mut b = (delays[k] + self.spec.coarse_step).min(self.hi - self.spec.fine_step);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = f(c);
        let mut fd = f(d);
        while b - a > self.spec.fine_step {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = f(d);
            }
        }
        let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
        let mid = (a + b) / T::lit(2.0);
        let fm = f(mid);
        if fm < fx {
            (mid, fm)
        } else {
            (x, fx)
        }
    }
}

/// `p̃` column for a delay of `d` samples.
fn column<T: Real>(selection: &SpectralSelection<T>, d: T) -> Vec<Complex<T>> {
    let lambda = -T::lit(2.0) * T::PI() * d / T::from_usize_lossy(selection.n);
    selection
        .bins
        .iter()
        .zip(&selection.pulse_spectrum)
        .map(|(&q, &s)| s * Complex::from_polar(T::one(), lambda * T::from_usize_lossy(q)))
        .collect()
}

/// Projection residual by modified Gram-Schmidt; `None` when the columns
/// are numerically dependent.
fn residual_energy<T: Real>(cols: &[&[Complex<T>]], observed: &[Complex<T>]) -> Option<T> {
    let frob = cols
        .iter()
        .flat_map(|c| c.iter())
        .fold(T::zero(), |a, z| a + z.norm_sqr())
        .sqrt();
    let tol = T::epsilon().powf(T::lit(0.6)) * frob;
    let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(cols.len());
    for c in cols {
        let mut v = c.to_vec();
        for q in &basis {
            let dot = inner(q, &v);
            v.iter_mut().zip(q).for_each(|(x, qi)| *x -= qi * dot);
        }
        let norm = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        if !(norm > tol) {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut r = observed.to_vec();
    for q in &basis {
        let dot = inner(q, &r);
        r.iter_mut().zip(q).for_each(|(x, qi)| *x -= qi * dot);
    }
    Some(r.iter().fold(T::zero(), |a, z| a + z.norm_sqr()))
}

fn inner<T: Real>(q: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    q.iter()
        .zip(v)
        .fold(Complex::new(T::zero(), T::zero()), |a, (x, y)| {
            a + x.conj() * y
        })
}

/// One-shot wrapper around [`DelayEstimator`].
pub fn estimate_delays<T: Real>(
    received: &[Complex<T>],
    pulse: &[Complex<T>],
    sample_interval: T,
    paths: usize,
    threshold_fraction: T,
    spec: &SearchSpec<T>,
) -> Result<DelayEstimate<T>> {
    DelayEstimator::new(
        pulse,
        sample_interval,
        paths,
        threshold_fraction,
        spec.clone(),
    )?
    .estimate(received)
}
