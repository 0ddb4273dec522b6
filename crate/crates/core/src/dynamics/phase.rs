//! Phase differences from peak timing.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitude below which a signal counts as not oscillating.
pub const AMPLITUDE_FLOOR: f64 = 1e-6;

/// Per-cycle phase differences and the mean period of the first signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub period: f64,
    /// `Δφ_k ∈ [0, 2π)`, one per cycle of the first signal.
    pub dphi: Vec<f64>,
    pub amplitude1: f64,
    pub amplitude2: f64,
}

impl PhaseSeries {
    /// Circular mean in `[0, 2π)`.
    pub fn mean(&self) -> f64 {
        circular_mean(&self.dphi)
    }

    /// Largest angular distance of a cycle from the circular mean.
    pub fn spread(&self) -> f64 {
        let m = self.mean();
        self.dphi
            .iter()
            .map(|&d| angle_dist(d, m))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn wrap_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance on the circle.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

pub fn circular_mean(v: &[f64]) -> f64 {
    let (s, c) = v
        .iter()
        .fold((0.0, 0.0), |(s, c), &a| (s + a.sin(), c + a.cos()));
    wrap_2pi(s.atan2(c))
}

/// Local maxima with parabolic refinement; only peaks in the upper half of
/// the signal's range count.
pub fn peak_times(t: &[f64], y: &[f64]) -> Vec<f64> {
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mid = 0.5 * (lo + hi);
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > mid {
            let (t0, t1, t2) = (t[i - 1], t[i], t[i + 1]);
            let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
            // vertex of the parabola through the three points
            let d1 = (y1 - y0) / (t1 - t0);
            let d2 = (y2 - y1) / (t2 - t1);
            let a = (d2 - d1) / (t2 - t0);
            let tp = if a < 0.0 {
                0.5 * (t0 + t1) - d1 / (2.0 * a)
            } else {
                t1
            };
            out.push(tp.clamp(t0, t2));
        }
    }
    out
}

fn amplitude(y: &[f64]) -> f64 {
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo
}

/// Per-cycle `Δφ = 2π (t_peak(y2) − t_peak(y1)) / T` on uniformly sampled
/// signals.
pub fn phase_series(t: &[f64], y1: &[f64], y2: &[f64]) -> Result<PhaseSeries> {
    let (a1, a2) = (amplitude(y1), amplitude(y2));
    if a1.min(a2) < AMPLITUDE_FLOOR {
        return Err(Error::NoOscillation { amplitude: a1.min(a2) });
    }
    let p1 = peak_times(t, y1);
    let p2 = peak_times(t, y2);
    if p1.len() < 2 || p2.is_empty() {
        return Err(Error::NoOscillation { amplitude: a1.min(a2) });
    }
    let period = (p1[p1.len() - 1] - p1[0]) / (p1.len() - 1) as f64;
    let mut dphi = Vec::new();
    for &tp in &p1 {
        // first peak of y2 at or after tp
        let j = p2.partition_point(|&s| s < tp - 1e-12 * period.max(1.0));
        if j < p2.len() && p2[j] - tp < 1.5 * period {
            dphi.push(wrap_2pi(TAU * (p2[j] - tp) / period));
        }
    }
    if dphi.is_empty() {
        return Err(Error::NoOscillation { amplitude: a1.min(a2) });
    }
    Ok(PhaseSeries {
        period,
        dphi,
        amplitude1: a1,
        amplitude2: a2,
    })
}

/// Mean phase difference over the available cycles, in `[0, 2π)`.
pub fn measure_phase_difference(t: &[f64], y1: &[f64], y2: &[f64]) -> Result<f64> {
    Ok(phase_series(t, y1, y2)?.mean())
}

/// `arg(z2 / z1)` in `[0, 2π)` for complex amplitudes.
pub fn complex_phase_difference(z1: Complex64, z2: Complex64) -> Result<f64> {
    let a = z1.norm().min(z2.norm());
    if a < AMPLITUDE_FLOOR {
        return Err(Error::NoOscillation { amplitude: a });
    }
    Ok(wrap_2pi((z2 * z1.conj()).arg()))
}

/// `|Δφ|` folded to `[0, π]`.
pub fn folded(dphi: f64) -> f64 {
    angle_dist(dphi, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sines(shift: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..4000).map(|i| i as f64 * 0.01).collect();
        let w = TAU / 3.7;
        let y1 = t.iter().map(|&s| (w * s).sin()).collect();
        let y2 = t.iter().map(|&s| (w * (s - shift * 3.7)).sin()).collect();
        (t, y1, y2)
    }

    #[test]
    fn synthetic_shifts() {
        for (shift, want) in [(0.0, 0.0), (0.5, PI), (0.25, PI / 2.0)] {
            let (t, a, b) = sines(shift);
            let d = measure_phase_difference(&t, &a, &b).unwrap();
            assert!(angle_dist(d, want) < 1e-5, "{shift}: {d}");
            let s = phase_series(&t, &a, &b).unwrap();
            assert!(s.dphi.len() >= 5);
            assert!((s.period - 3.7).abs() < 1e-5);
        }
    }

    #[test]
    fn flat_signal_is_rejected() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let y = vec![0.3; 100];
        assert!(matches!(
            measure_phase_difference(&t, &y, &y),
            Err(Error::NoOscillation { .. })
        ));
    }

    #[test]
    fn complex_phase() {
        let d = complex_phase_difference(Complex64::new(1.0, 0.0), Complex64::new(0.0, -2.0)).unwrap();
        assert!((d - 1.5 * PI).abs() < 1e-12);
    }
}
