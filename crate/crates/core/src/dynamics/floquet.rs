//! Monodromy matrices and Floquet multipliers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::integrate::{integrate_to, IntegratorConfig};
use super::orbit::OrbitRecord;
use super::{System, VectorField};
use crate::error::Result;

/// State and fundamental matrix `(x, Φ)` flattened column-major.
struct Variational<'a> {
    sys: &'a System,
}

impl VectorField for Variational<'_> {
    fn dim(&self) -> usize {
        let n = self.sys.dim();
        n + n * n
    }

    fn eval(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.sys.dim();
        let (x, phi) = y.split_at(n);
        self.sys.eval(t, x, &mut out[..n]);
        let j = self.sys.jacobian(t, x);
        for c in 0..n {
            for r in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += j[(r, k)] * phi[c * n + k];
                }
                out[n + c * n + r] = acc;
            }
        }
    }

    fn is_autonomous(&self) -> bool {
        self.sys.is_autonomous()
    }
}

/// Integrate the variational equations over `[t0, t0 + period]`.
/// Returns the monodromy matrix and the end state.
pub fn monodromy(
    sys: &System,
    x0: &[f64],
    t0: f64,
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = sys.dim();
    let mut y = x0.to_vec();
    y.extend(DMatrix::<f64>::identity(n, n).iter());
    let end = integrate_to(&Variational { sys }, &y, t0, t0 + period, cfg)?;
    let m = DMatrix::from_column_slice(n, n, &end[n..]);
    Ok((m, end[..n].to_vec()))
}

/// Monodromy by perturb-and-integrate central differences.
pub fn monodromy_fd(
    sys: &System,
    x0: &[f64],
    t0: f64,
    period: f64,
    cfg: &IntegratorConfig,
    h: f64,
) -> Result<DMatrix<f64>> {
    let n = sys.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut xp = x0.to_vec();
    for k in 0..n {
        xp[k] = x0[k] + h;
        let a = integrate_to(sys, &xp, t0, t0 + period, cfg)?;
        xp[k] = x0[k] - h;
        let b = integrate_to(sys, &xp, t0, t0 + period, cfg)?;
        xp[k] = x0[k];
        for i in 0..n {
            m[(i, k)] = (a[i] - b[i]) / (2.0 * h);
        }
    }
    Ok(m)
}

/// Eigenvalues sorted by modulus, largest first.
pub fn multipliers(m: &DMatrix<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
    ev
}

/// Floquet multipliers of a converged orbit.
pub fn floquet(sys: &System, orbit: &OrbitRecord, cfg: &IntegratorConfig) -> Result<Vec<Complex64>> {
    let (m, _) = monodromy(sys, &orbit.x0, orbit.t0, orbit.period, cfg)?;
    Ok(multipliers(&m))
}

/// Index of the multiplier closest to 1.
pub(crate) fn trivial_index(ms: &[Complex64]) -> Option<usize> {
    ms.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1.0).norm().total_cmp(&(b.1 - 1.0).norm()))
        .map(|(i, _)| i)
}

/// Multipliers with the trivial one removed for autonomous systems.
pub fn nontrivial(ms: &[Complex64], autonomous: bool) -> Vec<Complex64> {
    let mut v = ms.to_vec();
    if autonomous {
        if let Some(i) = trivial_index(ms) {
            v.remove(i);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nf::{NormalFormCoefficients, UnfoldingParams};
    use crate::wc::WilsonCowanParams;

    #[test]
    fn variational_matches_finite_differences() {
        let sys = System::wc(WilsonCowanParams::paper_p(3.1, 0.2, -0.03)).unwrap();
        let cfg = IntegratorConfig::default().with_tolerances(1e-12, 1e-14);
        let x0 = [0.2, 0.1, -0.1, 0.05];
        let (m, _) = monodromy(&sys, &x0, 0.0, 4.0, &cfg).unwrap();
        let fd = monodromy_fd(&sys, &x0, 0.0, 4.0, &cfg, 1e-5).unwrap();
        let rel = (&m - &fd).abs().max() / m.abs().max();
        assert!(rel < 1e-5, "{rel}");
    }

    #[test]
    fn uncoupled_rotation_has_unit_multiplier() {
        let c = NormalFormCoefficients::uncoupled(1.0, Complex64::new(-1.0, 0.5)).unwrap();
        let sys = System::nf_cartesian(UnfoldingParams { lambda: 0.5, eps: 0.0 }, c).unwrap();
        // uncoupled: oscillator 2 at origin, oscillator 1 on its circle
        let r = (0.5f64).sqrt();
        let w = 1.0 + 0.5 * 0.5;
        let period = 2.0 * std::f64::consts::PI / w;
        let cfg = IntegratorConfig::default().with_tolerances(1e-12, 1e-14);
        let (m, _) = monodromy(&sys, &[r, 0.0, 0.0, 0.0], 0.0, period, &cfg).unwrap();
        let ms = multipliers(&m);
        let i = trivial_index(&ms).unwrap();
        assert!((ms[i] - 1.0).norm() < 1e-8);
        let want = (-2.0 * 0.5 * period).exp();
        assert!(ms.iter().any(|z| (z - want).norm() < 1e-8));
    }
}
