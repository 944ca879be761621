//! Analytic beta-decay widths and a random-matrix model of a strong
//! eigenstate decaying weakly into a denser sector.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::nelder_mead;

/// Random two-sector decay model: a few initial-sector levels coupled by a
/// dense weak block to `final_states` levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Levels drawn in the initial sector.
    pub n_initial: usize,
    /// Uniform range of initial-sector energies.
    pub initial_range: (f64, f64),
    /// 1-based rank of the initial state among the sorted initial levels.
    pub initial_rank: usize,
    /// Uniform range of final-sector energies.
    pub final_range: (f64, f64),
    /// Number of final-sector levels `Y_f`.
    pub final_states: usize,
    /// Multiplier on the weak bound `w_f = 1 / (2 sqrt(Y_f))`; 0 decouples.
    pub weak_scale: f64,
    pub samples: usize,
    pub times: Vec<f64>,
    pub seed: u64,
}

impl EnsembleConfig {
    /// The reference model with `final_states` levels, 2000 samples and a
    /// grid `0, 0.05, ..., 40`.
    pub fn reference(final_states: usize, seed: u64) -> Self {
        EnsembleConfig {
            n_initial: 10,
            initial_range: (0.0, 1.1),
            initial_rank: 5,
            final_range: (0.0, 2.03),
            final_states,
            weak_scale: 1.0,
            samples: 2000,
            times: (0..=800).map(|k| k as f64 * 0.05).collect(),
            seed,
        }
    }

    /// Bound on the weak matrix elements, scaled so that `w_f^2` times the
    /// final density of states does not depend on `Y_f`.
    pub fn weak_bound(&self) -> f64 {
        self.weak_scale / (2.0 * (self.final_states as f64).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let range_ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if self.n_initial == 0 || self.final_states == 0 || self.samples == 0 {
            return Err(Error::Params("n_initial, final_states and samples must be positive".into()));
        }
        if self.initial_rank == 0 || self.initial_rank > self.n_initial {
            return Err(Error::Params(format!(
                "initial_rank {} outside 1..={}",
                self.initial_rank, self.n_initial
            )));
        }
        if !range_ok(self.initial_range) || !range_ok(self.final_range) {
            return Err(Error::Params("energy ranges must be finite with lo < hi".into()));
        }
        if !(self.weak_scale.is_finite() && self.weak_scale >= 0.0) {
            return Err(Error::Params("weak_scale must be finite and non-negative".into()));
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Params("times must be finite".into()));
        }
        Ok(())
    }
}

/// Sample-averaged persistence probability `|<i| exp(-iHt) |i>|^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceCurve {
    pub final_states: usize,
    pub samples: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub persistence: Vec<f64>,
}

/// Draws sample `k` of the ensemble. Sample `k` uses ChaCha stream `k`,
/// so results do not depend on the thread count.
pub fn draw_sample(cfg: &EnsembleConfig, k: usize) -> Result<TwoSector> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(k as u64);
    let (ni, nf) = (cfg.n_initial, cfg.final_states);
    let mut initial: Vec<f64> = (0..ni)
        .map(|_| rng.random_range(cfg.initial_range.0..cfg.initial_range.1))
        .collect();
    initial.sort_by(f64::total_cmp);
    // The initial state goes first; the other initial levels follow.
    let start = initial.remove(cfg.initial_rank - 1);
    initial.insert(0, start);
    let finals: Vec<f64> = (0..nf)
        .map(|_| rng.random_range(cfg.final_range.0..cfg.final_range.1))
        .collect();
    let w = cfg.weak_bound();
    let mut weak = vec![0.0; ni * nf];
    if w > 0.0 {
        weak.iter_mut().for_each(|x| *x = rng.random_range(-w..=w));
    }
    Ok(TwoSector {
        energies: initial.into_iter().chain(finals).collect(),
        weak,
        n_initial: ni,
    })
}

/// One draw of the model: diagonal sector energies (the initial state is
/// level 0, then the other initial levels, then the final levels) and the
/// weak block coupling initial to final levels.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSector {
    pub energies: Vec<f64>,
    /// Row-major `n_initial x final_states`.
    pub weak: Vec<f64>,
    pub n_initial: usize,
}

/// Krylov dimension beyond the polynomial degree needed at `t_max`.
const KRYLOV_MARGIN: usize = 40;

impl TwoSector {
    /// `|<0| exp(-iHt) |0>|^2` on `times`.
    pub fn persistence(&self, times: &[f64]) -> Vec<f64> {
        let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let (nodes, weights) = self.spectral_measure(t_max);
        times
            .iter()
            .map(|&t| {
                let (mut re, mut im) = (0.0, 0.0);
                for (&wk, &lk) in weights.iter().zip(&nodes) {
                    let (s, c) = (lk * t).sin_cos();
                    re += wk * c;
                    im -= wk * s;
                }
                (re * re + im * im).min(1.0)
            })
            .collect()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (ni, nf) = (self.n_initial, self.energies.len() - self.n_initial);
        for ((yi, d), xi) in y.iter_mut().zip(&self.energies).zip(x) {
            *yi = d * xi;
        }
        for i in 0..ni {
            let row = &self.weak[i * nf..(i + 1) * nf];
            let mut acc = 0.0;
            for (j, &wij) in row.iter().enumerate() {
                acc += wij * x[ni + j];
                y[ni + j] += wij * x[i];
            }
            y[i] += acc;
        }
    }

    /// Bound on the half-width of the spectrum: by Weyl's inequality the
    /// eigenvalues stay within the diagonal range widened by the norm of the
    /// weak block, itself bounded by its Frobenius norm.
    fn half_width(&self) -> f64 {
        let lo = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weak = self.weak.iter().map(|w| w * w).sum::<f64>().sqrt();
        0.5 * (hi - lo) + weak
    }

    /// Nodes and weights of the spectral measure of level 0, from Lanczos
    /// with full reorthogonalization. With `m` steps the quadrature is exact
    /// for polynomials of degree `2m - 1`; `m` exceeds the Chebyshev degree
    /// `half_width * t_max` at which `exp(-i H t)` is resolved to rounding,
    /// or equals the dimension, where it is exact.
    fn spectral_measure(&self, t_max: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.energies.len();
        let m_max = n.min((self.half_width() * t_max).ceil() as usize + KRYLOV_MARGIN);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        let mut w = vec![0.0; n];
        loop {
            self.apply(&v, &mut w);
            let a: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
            alpha.push(a);
            basis.push(v.clone());
            // Two passes of Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for q in &basis {
                    let c: f64 = w.iter().zip(q).map(|(x, y)| x * y).sum();
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if basis.len() == m_max || b < 1e-13 {
                break;
            }
            beta.push(b);
            v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / b);
        }
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i.abs_diff(j) == 1 {
                beta[i.min(j)]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let weights = eig.eigenvectors.row(0).iter().map(|c| c * c).collect();
        (eig.eigenvalues.iter().copied().collect(), weights)
    }
}

/// Ensemble-averaged persistence. Samples run in parallel and are summed in
/// index order, so the output is reproducible for a given seed.
pub fn ensemble_persistence(cfg: &EnsembleConfig) -> Result<PersistenceCurve> {
    cfg.validate()?;
    let per_sample: Vec<Vec<f64>> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| draw_sample(cfg, k).map(|h| h.persistence(&cfg.times)))
        .collect::<Result<_>>()?;
    let mut persistence = vec![0.0; cfg.times.len()];
    for p in &per_sample {
        for (acc, x) in persistence.iter_mut().zip(p) {
            *acc += x;
        }
    }
    let norm = cfg.samples as f64;
    persistence.iter_mut().for_each(|x| *x /= norm);
    // t = 0 is exactly 1 regardless of rounding in the eigenvectors.
    for (x, &t) in persistence.iter_mut().zip(&cfg.times) {
        if t == 0.0 {
            *x = 1.0;
        }
    }
    Ok(PersistenceCurve {
        final_states: cfg.final_states,
        samples: cfg.samples,
        seed: cfg.seed,
        times: cfg.times.clone(),
        persistence,
    })
}

/// Least-squares line `y = a + b x`, with the coefficient of determination.
fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 3 {
        return Err(Error::Domain(format!("fit needs at least 3 points, got {}", x.len())));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("fit abscissae are all equal".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok((a, b, r2))
}

/// Exponent `k` of `1 - P(t) ~ c t^k` from a log-log fit over the points
/// with `0 < t <= t_max`.
pub fn early_time_exponent(curve: &PersistenceCurve, t_max: f64) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = curve
        .times
        .iter()
        .zip(&curve.persistence)
        .filter(|(&t, &p)| t > 0.0 && t <= t_max && p < 1.0)
        .map(|(&t, &p)| (t.ln(), (1.0 - p).ln()))
        .unzip();
    Ok(linear_fit(&x, &y)?.1)
}

/// `P(t) ~ A exp(-gamma t)` fitted over the pre-plateau window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub gamma: f64,
    pub amplitude: f64,
    /// Long-time level: mean persistence over the last quarter of the grid.
    pub plateau: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Coefficient of determination of the fitted curve against `P`.
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `A exp(-gamma t)` to `P` from the first time
/// `P < 0.95` until `P` first falls below 1.5 times the plateau. A linear
/// fit of `ln P` seeds the minimization.
pub fn exponential_window_fit(curve: &PersistenceCurve) -> Result<ExponentialFit> {
    let n = curve.times.len();
    if n < 8 {
        return Err(Error::Domain("curve too short for a plateau estimate".into()));
    }
    let tail = &curve.persistence[n - n / 4..];
    let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
    let p = &curve.persistence;
    let start = p
        .iter()
        .position(|&x| x < 0.95)
        .ok_or_else(|| Error::Domain("persistence never drops below 0.95".into()))?;
    let end = (start..n)
        .find(|&i| p[i] < 1.5 * plateau)
        .ok_or_else(|| Error::Domain("persistence never reaches 1.5x the plateau".into()))?;
    let x = &curve.times[start..end];
    let obs = &p[start..end];
    let logs: Vec<f64> = obs.iter().map(|v| v.ln()).collect();
    let (a0, b0, _) = linear_fit(x, &logs)?;
    let ss_res = |v: &[f64]| -> f64 {
        x.iter()
            .zip(obs)
            .map(|(t, o)| (o - v[0].exp() * (-v[1] * t).exp()).powi(2))
            .sum()
    };
    let best = nelder_mead(&ss_res, &[a0, -b0], 0.05, 1e-14, 4000)?;
    let mean = obs.iter().sum::<f64>() / obs.len() as f64;
    let ss_tot: f64 = obs.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(ExponentialFit {
        gamma: best[1],
        amplitude: best[0].exp(),
        plateau,
        t_start: curve.times[start],
        t_end: curve.times[end],
        r_squared: 1.0 - ss_res(&best) / ss_tot,
        points: end - start,
    })
}

/// Phase-space factor of neutron decay as a function of
/// `y = m_e / (M_n - M_p)`, equal to 1 at `y = 0` and 0 at `y = 1`.
pub fn phase_space_fprime(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("phase-space argument y = {y} outside [0, 1]")));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    let r = (1.0 - y * y).sqrt();
    let y2 = y * y;
    let y4 = y2 * y2;
    // y^4 ln y vanishes at y = 0.
    let log_term = if y == 0.0 { 0.0 } else { 7.5 * y4 * (y / (r + 1.0)).ln() };
    Ok(r * (1.0 - 4.5 * y2 - 4.0 * y4) - log_term)
}

/// Inputs to the leading-order neutron width, in GeV units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeutronInputs {
    /// Fermi constant in GeV^-2.
    pub g_f: f64,
    pub v_ud: f64,
    pub m_n: f64,
    pub m_p: f64,
    pub m_e: f64,
    pub g_v: f64,
    pub g_a: f64,
}

impl NeutronInputs {
    /// Measured values of the constants.
    pub fn physical() -> Self {
        NeutronInputs {
            g_f: 1.1663787e-5,
            v_ud: 0.97373,
            m_n: 0.939_565_42,
            m_p: 0.938_272_09,
            m_e: 0.000_510_999,
            g_v: 1.0,
            g_a: 1.2754,
        }
    }
}

/// Neutron width at leading order in the recoil, in GeV:
/// `G_F^2 |V_ud|^2 dM^5 / (60 pi^3) (g_V^2 + 3 g_A^2) f'(m_e / dM)`.
pub fn neutron_width(i: &NeutronInputs) -> Result<f64> {
    let dm = i.m_n - i.m_p;
    if i.m_e.is_nan() || i.m_e < 0.0 || dm.is_nan() || dm <= i.m_e {
        return Err(Error::Domain(format!(
            "decay closed: M_n - M_p = {dm} does not exceed m_e = {}",
            i.m_e
        )));
    }
    let f = phase_space_fprime(i.m_e / dm)?;
    Ok(i.g_f.powi(2) * i.v_ud.powi(2) * dm.powi(5) / (60.0 * PI.powi(3))
        * (i.g_v.powi(2) + 3.0 * i.g_a.powi(2))
        * f)
}

/// Leading-order width of the single-site baryon decay with massless
/// leptons, `3 G^2 g_V^2 Q / (2 pi)`.
pub fn delta_width_1p1(g: f64, g_v: f64, q: f64) -> Result<f64> {
    if q.is_nan() || q <= 0.0 {
        return Err(Error::Domain(format!("energy release Q = {q} must be positive")));
    }
    Ok(3.0 * g * g * g_v * g_v * q / (2.0 * PI))
}
