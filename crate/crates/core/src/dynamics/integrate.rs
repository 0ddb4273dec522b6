//! Fixed-step RK4 and adaptive Dormand-Prince 5(4).

use serde::{Deserialize, Serialize};

use super::VectorField;
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical RK4 with step `max_step`.
    FixedRk4,
    /// Dormand-Prince 5(4) with local error control.
    AdaptiveEmbeddedRk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Longest admissible integration span.
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveEmbeddedRk,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.5,
            max_time: 1e6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_finite(
            "integrator config",
            &[self.rel_tol, self.abs_tol, self.max_step, self.max_time],
        )?;
        if self.rel_tol <= 0.0 || self.abs_tol <= 0.0 {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        if self.max_step <= 0.0 || self.max_time <= 0.0 {
            return Err(Error::Config("max_step and max_time must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }
}

/// Accepted steps with their derivatives; cubic Hermite interpolation
/// between them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    dim: usize,
    t: Vec<f64>,
    x: Vec<f64>,
    f: Vec<f64>,
}

impl Trajectory {
    fn push(&mut self, t: f64, x: &[f64], f: &[f64]) {
        self.t.push(t);
        self.x.extend_from_slice(x);
        self.f.extend_from_slice(f);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        self.t[self.len() - 1]
    }

    /// State at time `t`, clamped to the stored span.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let n = self.len();
        if t <= self.t[0] {
            return self.state(0).to_vec();
        }
        if t >= self.t[n - 1] {
            return self.state(n - 1).to_vec();
        }
        let i = self.t.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (h00, h10) = ((1.0 + 2.0 * s) * (1.0 - s).powi(2), s * (1.0 - s).powi(2));
        let (h01, h11) = (s * s * (3.0 - 2.0 * s), s * s * (s - 1.0));
        let d = self.dim;
        (0..d)
            .map(|k| {
                h00 * self.x[i * d + k]
                    + h10 * h * self.f[i * d + k]
                    + h01 * self.x[(i + 1) * d + k]
                    + h11 * h * self.f[(i + 1) * d + k]
            })
            .collect()
    }

    /// `n` uniformly spaced samples on `[a, b]` (both ends included).
    pub fn resample(&self, a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = n.max(2);
        let ts: Vec<f64> = (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect();
        let xs = ts.iter().map(|&t| self.interpolate(t)).collect();
        (ts, xs)
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order minus 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn check_span(t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<()> {
    cfg.validate()?;
    ensure_finite("time span", &[t0, t1])?;
    if (t1 - t0).abs() > cfg.max_time {
        return Err(Error::MaxTimeExceeded(cfg.max_time));
    }
    Ok(())
}

/// Core driver; `sink` sees every accepted `(t, x, f(t, x))`, the initial
/// point included.
fn drive<F, S>(sys: &F, x0: &[f64], t0: f64, t1: f64, cfg: &IntegratorConfig, mut sink: S) -> Result<Vec<f64>>
where
    F: VectorField + ?Sized,
    S: FnMut(f64, &[f64], &[f64]),
{
    check_span(t0, t1, cfg)?;
    let n = sys.dim();
    if x0.len() != n {
        return Err(Error::Domain(format!("state length {} != dimension {n}", x0.len())));
    }
    ensure_finite("initial state", x0)?;
    let mut x = x0.to_vec();
    let mut f = vec![0.0; n];
    sys.eval(t0, &x, &mut f);
    sink(t0, &x, &f);
    if t1 == t0 {
        return Ok(x);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];

    match cfg.method {
        Method::FixedRk4 => {
            let steps = (span / cfg.max_step).ceil().max(1.0) as usize;
            let h = (t1 - t0) / steps as f64;
            for i in 0..steps {
                k[0].copy_from_slice(&f);
                for (stage, cst) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
                    for j in 0..n {
                        tmp[j] = x[j] + cst * h * k[stage - 1][j];
                    }
                    let (lo, hi) = k.split_at_mut(stage);
                    let _ = lo;
                    sys.eval(t + cst * h, &tmp, &mut hi[0]);
                }
                for j in 0..n {
                    x[j] += h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
                }
                t = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
                ensure_finite("solution", &x).map_err(|_| Error::StepUnderflow { t, h })?;
                sys.eval(t, &x, &mut f);
                sink(t, &x, &f);
            }
            Ok(x)
        }
        Method::AdaptiveEmbeddedRk => {
            let scale0: f64 = (0..n)
                .map(|j| (f[j] / (cfg.abs_tol + cfg.rel_tol * x[j].abs())).powi(2))
                .sum::<f64>()
                .sqrt()
                / (n as f64).sqrt();
            let mut h = if scale0 > 0.0 {
                (0.01 / scale0).powf(1.0 / 5.0) * 0.1
            } else {
                1e-3
            };
            h = h.min(cfg.max_step).min(span).max(1e-12 * span);
            let mut xn = vec![0.0; n];
            let mut rejected_last = false;
            loop {
                let remaining = (t1 - t) * dir;
                if remaining <= 0.0 {
                    break;
                }
                let last = h >= remaining;
                let hs = if last { remaining } else { h };
                let hd = hs * dir;
                k[0].copy_from_slice(&f);
                for s in 1..7 {
                    for j in 0..n {
                        let mut acc = x[j];
                        for (m, km) in k.iter().enumerate().take(s) {
                            acc += hd * A[s][m] * km[j];
                        }
                        tmp[j] = acc;
                    }
                    let (_, hi) = k.split_at_mut(s);
                    sys.eval(t + C[s] * hd, &tmp, &mut hi[0]);
                }
                // Stage 7 is evaluated at the 5th-order solution (FSAL).
                xn.copy_from_slice(&tmp);
                let mut err: f64 = 0.0;
                for j in 0..n {
                    let e: f64 = (0..7).map(|m| E[m] * k[m][j]).sum::<f64>() * hd;
                    let sc = cfg.abs_tol + cfg.rel_tol * x[j].abs().max(xn[j].abs());
                    err += (e / sc).powi(2);
                }
                let err = (err / n as f64).sqrt();
                if !err.is_finite() || err > 1.0 {
                    let fac = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.1
                    };
                    h = hs * fac;
                    rejected_last = true;
                    if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                        return Err(Error::StepUnderflow { t, h });
                    }
                    continue;
                }
                t = if last { t1 } else { t + hd };
                x.copy_from_slice(&xn);
                f.copy_from_slice(&k[6]);
                sink(t, &x, &f);
                let mut fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
                fac = fac.clamp(0.2, 5.0);
                if rejected_last {
                    fac = fac.min(1.0);
                }
                rejected_last = false;
                h = (hs * fac).min(cfg.max_step);
            }
            Ok(x)
        }
    }
}

/// Integrate over `[t0, t1]`, recording every accepted step.
pub fn integrate<F: VectorField + ?Sized>(
    sys: &F,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut tr = Trajectory {
        dim: sys.dim(),
        ..Default::default()
    };
    drive(sys, x0, t0, t1, cfg, |t, x, f| tr.push(t, x, f))?;
    Ok(tr)
}

/// Final state only.
pub fn integrate_to<F: VectorField + ?Sized>(
    sys: &F,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    drive(sys, x0, t0, t1, cfg, |_, _, _| {})
}

/// Visit every accepted step without storing it.
pub fn integrate_with<F, S>(
    sys: &F,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    sink: S,
) -> Result<Vec<f64>>
where
    F: VectorField + ?Sized,
    S: FnMut(f64, &[f64], &[f64]),
{
    drive(sys, x0, t0, t1, cfg, sink)
}
