//! Periodic orbits by Newton shooting.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::floquet::{monodromy, multipliers, nontrivial};
use super::integrate::{integrate, integrate_to, IntegratorConfig};
use super::phase::{complex_phase_difference, wrap_2pi};
use super::{check_state, max_diff, System, VectorField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// Pointwise swap-symmetric oscillation.
    IP,
    /// Swap equals a half-period shift.
    AP,
    #[serde(rename = "asym")]
    Asym,
    /// Swap-symmetric response locked to the input period of a forced system.
    #[serde(rename = "symmetric-fixed-pattern")]
    SymmetricFixedPattern,
}

impl Symmetry {
    pub fn as_str(self) -> &'static str {
        match self {
            Symmetry::IP => "IP",
            Symmetry::AP => "AP",
            Symmetry::Asym => "asym",
            Symmetry::SymmetricFixedPattern => "symmetric-fixed-pattern",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitOptions {
    /// Newton stops once `‖φ_T(x) − x‖∞` is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Stable when every non-trivial multiplier has modulus below `1 − margin`.
    pub stability_margin: f64,
    /// Swap residual below which an orbit counts as symmetric.
    pub symmetry_tol: f64,
    /// Samples stored over one period (rounded up to an even number).
    pub n_samples: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50,
            stability_margin: 1e-6,
            symmetry_tol: 1e-6,
            n_samples: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub system_id: String,
    pub t0: f64,
    pub x0: Vec<f64>,
    pub period: f64,
    /// Uniform samples on `[t0, t0 + period)`.
    pub samples: Vec<Vec<f64>>,
    pub floquet: Vec<Complex64>,
    pub dphi: f64,
    pub symmetry: Symmetry,
    pub stable: bool,
    pub residual: f64,
    pub iterations: usize,
    /// Peak-to-peak range of the first oscillator's observable.
    pub amplitude: f64,
    pub swap_residual: f64,
    pub ap_residual: f64,
}

impl OrbitRecord {
    /// Multipliers with the trivial one removed for autonomous orbits.
    pub fn nontrivial_multipliers(&self, autonomous: bool) -> Vec<Complex64> {
        nontrivial(&self.floquet, autonomous)
    }

    /// Number of non-trivial multipliers outside the unit circle.
    pub fn unstable_count(&self, autonomous: bool) -> usize {
        self.nontrivial_multipliers(autonomous)
            .iter()
            .filter(|m| m.norm() > 1.0)
            .count()
    }
}

fn solve_svd(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(&b, 1e-12 * smax.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Domain(format!("linear solve failed: {e}")))
}

/// Newton shooting from `guess` with period guess `period`.
///
/// Autonomous systems solve for `(x, T)` with the section
/// `f(guess)·(x − guess) = 0`. Forced systems keep `period` fixed and solve
/// the stroboscopic fixed-point problem from `t0`.
pub fn find_periodic_orbit(
    sys: &System,
    guess: &[f64],
    period: f64,
    t0: f64,
    cfg: &IntegratorConfig,
    opts: &OrbitOptions,
) -> Result<OrbitRecord> {
    check_state(sys, guess)?;
    if matches!(sys, System::NfReduced { .. }) {
        return Err(Error::NotApplicable(
            "periodic orbits of the normal form are equilibria of the reduced chart".into(),
        ));
    }
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::Domain(format!("period guess {period} must be positive")));
    }
    let n = sys.dim();
    let auto = sys.is_autonomous();
    let mut x = guess.to_vec();
    let mut t = period;
    let normal = if auto {
        let mut f = vec![0.0; n];
        sys.eval(t0, guess, &mut f);
        let nf = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nf < 1e-12 {
            return Err(Error::SectionDegenerate(format!(
                "flow speed {nf:.3e} at the guess is too small for a transverse section"
            )));
        }
        f.iter().map(|v| v / nf).collect()
    } else {
        Vec::new()
    };

    let resid = |x: &[f64], t: f64| -> Result<f64> {
        let e = integrate_to(sys, x, t0, t0 + t, cfg)?;
        Ok(max_diff(&e, x))
    };

    let mut res = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..=opts.max_iter {
        iterations = it;
        let (m, end) = monodromy(sys, &x, t0, t, cfg)?;
        let f_res: Vec<f64> = end.iter().zip(&x).map(|(a, b)| a - b).collect();
        res = f_res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if res <= opts.tol {
            break;
        }
        if it == opts.max_iter {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        let (dx, dt) = if auto {
            let mut fe = vec![0.0; n];
            sys.eval(t0 + t, &end, &mut fe);
            let mut a = DMatrix::zeros(n + 1, n + 1);
            let mut b = DVector::zeros(n + 1);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = m[(i, j)] - if i == j { 1.0 } else { 0.0 };
                }
                a[(i, n)] = fe[i];
                a[(n, i)] = normal[i];
                b[i] = -f_res[i];
            }
            b[n] = -(0..n).map(|i| normal[i] * (x[i] - guess[i])).sum::<f64>();
            let s = solve_svd(a, b)?;
            (s.rows(0, n).iter().copied().collect::<Vec<_>>(), s[n])
        } else {
            let a = m - DMatrix::<f64>::identity(n, n);
            let b = DVector::from_iterator(n, f_res.iter().map(|v| -v));
            (solve_svd(a, b)?.iter().copied().collect(), 0.0)
        };
        // Backtracking on the residual.
        let mut lam = 1.0;
        loop {
            let tn = t + lam * dt;
            let xn: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + lam * d).collect();
            let ok = tn > 0.0
                && match resid(&xn, tn) {
                    Ok(r) => r < res || lam < 1.0 / 16.0,
                    Err(_) => false,
                };
            if ok {
                x = xn;
                t = tn;
                break;
            }
            lam *= 0.5;
            if lam < 1.0 / 64.0 {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual: res,
                });
            }
        }
    }
    finish_orbit(sys, x, t, t0, res, iterations, cfg, opts)
}

#[allow(clippy::too_many_arguments)]
fn finish_orbit(
    sys: &System,
    x0: Vec<f64>,
    period: f64,
    t0: f64,
    residual: f64,
    iterations: usize,
    cfg: &IntegratorConfig,
    opts: &OrbitOptions,
) -> Result<OrbitRecord> {
    let auto = sys.is_autonomous();
    let (m, _) = monodromy(sys, &x0, t0, period, cfg)?;
    let floquet = multipliers(&m);
    let stable = nontrivial(&floquet, auto)
        .iter()
        .all(|z| z.norm() < 1.0 - opts.stability_margin);
    let ns = opts.n_samples.max(8).div_ceil(2) * 2;
    let tr = integrate(sys, &x0, t0, t0 + period, cfg)?;
    let samples: Vec<Vec<f64>> = (0..ns)
        .map(|k| tr.interpolate(t0 + period * k as f64 / ns as f64))
        .collect();
    let swap_residual = samples
        .iter()
        .map(|x| max_diff(&sys.swap(x), x))
        .fold(0.0, f64::max);
    let ap_residual = (0..ns)
        .map(|k| max_diff(&sys.swap(&samples[k]), &samples[(k + ns / 2) % ns]))
        .fold(0.0, f64::max);
    let half_closure = max_diff(&samples[ns / 2], &samples[0]);
    let sig1: Vec<f64> = samples.iter().map(|x| sys.signals(x).0).collect();
    let sig2: Vec<f64> = samples.iter().map(|x| sys.signals(x).1).collect();
    let amplitude = sig1.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - sig1.iter().cloned().fold(f64::INFINITY, f64::min);

    let symmetry = if swap_residual <= opts.symmetry_tol {
        let input_locked = sys
            .forcing_base_period()
            .is_some_and(|p| period <= 0.5 * p * (1.0 + 1e-9) || half_closure <= opts.symmetry_tol);
        if input_locked {
            Symmetry::SymmetricFixedPattern
        } else {
            Symmetry::IP
        }
    } else if ap_residual <= opts.symmetry_tol {
        Symmetry::AP
    } else {
        Symmetry::Asym
    };

    let dphi = match sys.complex_amplitudes(&x0) {
        Some((z1, z2)) => complex_phase_difference(z1, z2).unwrap_or(0.0),
        None => periodic_peak_shift(&sig1, &sig2),
    };
    Ok(OrbitRecord {
        system_id: sys.id(),
        t0,
        x0,
        period,
        samples,
        floquet,
        dphi,
        symmetry,
        stable,
        residual,
        iterations,
        amplitude,
        swap_residual,
        ap_residual,
    })
}

fn periodic_argmax(y: &[f64]) -> f64 {
    let n = y.len();
    let (i, _) = y
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let (a, b, c) = (y[(i + n - 1) % n], y[i], y[(i + 1) % n]);
    let den = a - 2.0 * b + c;
    let off = if den < 0.0 { 0.5 * (a - c) / den } else { 0.0 };
    i as f64 + off.clamp(-0.5, 0.5)
}

/// Phase lag of the second signal's maximum behind the first, as a
/// fraction of the sampled period times 2π.
fn periodic_peak_shift(y1: &[f64], y2: &[f64]) -> f64 {
    let n = y1.len() as f64;
    wrap_2pi(TAU * (periodic_argmax(y2) - periodic_argmax(y1)) / n)
}
