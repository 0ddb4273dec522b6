//! Numerical dynamics: integration, periodic orbits, Floquet analysis,
//! phase measurement, attractor classification, sweeps and continuation.

pub mod branch;
pub mod classify;
pub mod floquet;
pub mod integrate;
pub mod orbit;
pub mod phase;
pub mod sweep;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nf::{cartesian_field, reduced_field, NormalFormCoefficients, UnfoldingParams};
use crate::wc::{wc_jac, wc_period, wc_rhs, ForcingParams, Sigmoid, WilsonCowanParams};

pub use branch::{follow_branch, OrbitBranch, BranchEvent, BranchOptions, BranchPoint};
pub use classify::{
    anti_phase_ic, classify_attractor, Classification, ClassifyOptions, IcOutcome, IcPolicy, Label, LabelSet,
};
pub use floquet::{floquet, monodromy, monodromy_fd};
pub use integrate::{integrate, integrate_to, IntegratorConfig, Method, Trajectory};
pub use orbit::{find_periodic_orbit, OrbitOptions, OrbitRecord, Symmetry};
pub use phase::{measure_phase_difference, phase_series, PhaseSeries};
pub use sweep::{sweep, BifurcationDiagram, Cell, EventKind, SweepAxis, SweepEvent, SweepOptions};

/// A smooth vector field `ẋ = f(t, x)`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// `∂f/∂x`; central differences unless overridden.
    fn jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut j = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        let (mut fp, mut fm) = (vec![0.0; n], vec![0.0; n]);
        for k in 0..n {
            let h = 1e-6 * x[k].abs().max(1.0);
            xp[k] = x[k] + h;
            self.eval(t, &xp, &mut fp);
            xp[k] = x[k] - h;
            self.eval(t, &xp, &mut fm);
            xp[k] = x[k];
            for i in 0..n {
                j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        j
    }

    fn is_autonomous(&self) -> bool {
        true
    }
}

/// Which model a [`System`] wraps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    NfCartesian,
    NfReduced,
    Wc,
    WcForced,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::NfCartesian => "nf-cartesian",
            SystemKind::NfReduced => "nf-reduced",
            SystemKind::Wc => "wc",
            SystemKind::WcForced => "wc-forced",
        }
    }
}

/// A concrete system with its parameters.
#[derive(Debug, Clone)]
pub enum System {
    NfCartesian {
        p: UnfoldingParams,
        c: NormalFormCoefficients,
    },
    NfReduced {
        p: UnfoldingParams,
        c: NormalFormCoefficients,
    },
    Wc {
        p: WilsonCowanParams,
        sig: Sigmoid,
    },
    WcForced {
        p: WilsonCowanParams,
        sig: Sigmoid,
        forcing: ForcingParams,
    },
}

impl System {
    pub fn nf_cartesian(p: UnfoldingParams, c: NormalFormCoefficients) -> Result<Self> {
        c.validate()?;
        crate::error::ensure_finite("unfolding parameters", &[p.lambda, p.eps])?;
        Ok(System::NfCartesian { p, c })
    }

    pub fn nf_reduced(p: UnfoldingParams, c: NormalFormCoefficients) -> Result<Self> {
        c.validate()?;
        crate::error::ensure_finite("unfolding parameters", &[p.lambda, p.eps])?;
        Ok(System::NfReduced { p, c })
    }

    pub fn wc(p: WilsonCowanParams) -> Result<Self> {
        p.validate()?;
        Ok(System::Wc {
            sig: p.sigmoid(),
            p,
        })
    }

    pub fn wc_forced(p: WilsonCowanParams, forcing: ForcingParams) -> Result<Self> {
        p.validate()?;
        forcing.validate()?;
        Ok(System::WcForced {
            sig: p.sigmoid(),
            p,
            forcing,
        })
    }

    pub fn kind(&self) -> SystemKind {
        match self {
            System::NfCartesian { .. } => SystemKind::NfCartesian,
            System::NfReduced { .. } => SystemKind::NfReduced,
            System::Wc { .. } => SystemKind::Wc,
            System::WcForced { .. } => SystemKind::WcForced,
        }
    }

    /// Short identifier with the parameter values.
    pub fn id(&self) -> String {
        match self {
            System::NfCartesian { p, .. } | System::NfReduced { p, .. } => {
                format!("{}(lambda={},eps={})", self.kind().as_str(), p.lambda, p.eps)
            }
            System::Wc { p, .. } => format!(
                "wc(lambda={},eps={},b_sp={})",
                p.lambda, p.eps, p.b_sp
            ),
            System::WcForced { p, forcing, .. } => format!(
                "wc-forced(lambda={},eps={},A={},f={},h={},n={})",
                p.lambda, p.eps, forcing.amplitude, forcing.f, forcing.h, forcing.n
            ),
        }
    }

    /// Natural time scale: intrinsic period for autonomous systems, the
    /// forcing base period `1/(2f)` for forced ones.
    pub fn time_scale(&self) -> f64 {
        match self {
            System::NfCartesian { c, .. } | System::NfReduced { c, .. } => {
                2.0 * std::f64::consts::PI / c.omega.abs()
            }
            System::Wc { p, .. } => {
                let lc = crate::wc::wc_hopf_lambda(p).unwrap_or(p.lambda);
                wc_period(p.lambda, p)
                    .or_else(|_| wc_period(lc, p))
                    .unwrap_or(2.0 * std::f64::consts::PI * p.tau)
            }
            System::WcForced { forcing, .. } => forcing.base_period(),
        }
    }

    /// Oscillator-exchange action on states. The reduced chart maps
    /// `(s, d, Δφ) ↦ (s, −d, −Δφ)`.
    pub fn swap(&self, x: &[f64]) -> Vec<f64> {
        match self {
            System::NfReduced { .. } => vec![x[0], -x[1], -x[2]],
            _ => vec![x[2], x[3], x[0], x[1]],
        }
    }

    /// Complex amplitudes of the two oscillators, when the chart has them.
    pub fn complex_amplitudes(&self, x: &[f64]) -> Option<(Complex64, Complex64)> {
        match self {
            System::NfCartesian { .. } => {
                Some((Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])))
            }
            _ => None,
        }
    }

    /// Scalar observables used for peak timing (first and second oscillator).
    pub fn signals(&self, x: &[f64]) -> (f64, f64) {
        match self {
            System::NfReduced { .. } => (x[0], x[0]),
            _ => (x[0], x[2]),
        }
    }

    /// Forcing period `1/(2f)` of a forced system.
    pub fn forcing_base_period(&self) -> Option<f64> {
        match self {
            System::WcForced { forcing, .. } => Some(forcing.base_period()),
            _ => None,
        }
    }

    /// Whether exchanging the oscillators maps solutions to solutions.
    pub fn is_swap_symmetric(&self) -> bool {
        match self {
            System::WcForced { forcing, .. } => forcing.h == 0.0,
            _ => true,
        }
    }
}

fn nf_jacobian(
    x: &[f64],
    p: &UnfoldingParams,
    c: &NormalFormCoefficients,
) -> DMatrix<f64> {
    // Wirtinger derivatives a = ∂f/∂z, b = ∂f/∂z̄ of each component; the real
    // block is [[Re(a+b), −Im(a−b)], [Im(a+b), Re(a−b)]].
    let z = [Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])];
    let (al, be) = (&c.alpha_eps, &c.beta_eps);
    let lin = Complex64::new(p.lambda, c.omega);
    let e = p.eps;
    let mut j = DMatrix::zeros(4, 4);
    for k in 0..2 {
        let (za, zb) = (z[k], z[1 - k]);
        let (na, nb) = (za.norm_sqr(), zb.norm_sqr());
        let d_za = lin
            + 2.0 * c.alpha01 * na
            + e * (al[0]
                + 2.0 * al[1] * na
                + al[2] * nb
                + 2.0 * al[3] * zb.conj() * za
                + zb * be[1] * za.conj());
        let d_zac = c.alpha01 * za * za + e * (al[1] * za * za + zb * (be[1] * za + be[3] * zb));
        let d_zb = e
            * (za * al[2] * zb.conj()
                + be[0]
                + be[1] * na
                + 2.0 * be[2] * nb
                + 2.0 * be[3] * za.conj() * zb);
        let d_zbc = e * (za * (al[2] * zb + al[3] * za) + be[2] * zb * zb);
        let (ra, rb) = (2 * k, 2 * (1 - k));
        for (col, a, b) in [(ra, d_za, d_zac), (rb, d_zb, d_zbc)] {
            let (s, m) = (a + b, a - b);
            j[(ra, col)] = s.re;
            j[(ra, col + 1)] = -m.im;
            j[(ra + 1, col)] = s.im;
            j[(ra + 1, col + 1)] = m.re;
        }
    }
    j
}

impl VectorField for System {
    fn dim(&self) -> usize {
        match self {
            System::NfReduced { .. } => 3,
            _ => 4,
        }
    }

    #[inline]
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match self {
            System::NfCartesian { p, c } => {
                let r = cartesian_field(
                    Complex64::new(x[0], x[1]),
                    Complex64::new(x[2], x[3]),
                    p,
                    c,
                );
                out[0] = r.dz1.re;
                out[1] = r.dz1.im;
                out[2] = r.dz2.re;
                out[3] = r.dz2.im;
            }
            System::NfReduced { p, c } => {
                let r = reduced_field(x[0], x[1], x[2], p, c);
                out[0] = r.ds;
                out[1] = r.dd;
                out[2] = r.ddphi;
            }
            System::Wc { p, sig } => wc_rhs(x, t, p, sig, None, out),
            System::WcForced { p, sig, forcing } => wc_rhs(x, t, p, sig, Some(forcing), out),
        }
    }

    fn jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        match self {
            System::NfCartesian { p, c } => nf_jacobian(x, p, c),
            System::Wc { p, sig } => {
                let m = wc_jac(x, t, p, sig, None);
                DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
            }
            System::WcForced { p, sig, forcing } => {
                let m = wc_jac(x, t, p, sig, Some(forcing));
                DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
            }
            System::NfReduced { .. } => {
                let n = 3;
                let mut j = DMatrix::zeros(n, n);
                let mut xp = x.to_vec();
                let (mut fp, mut fm) = (vec![0.0; n], vec![0.0; n]);
                for k in 0..n {
                    let h = 1e-6 * x[k].abs().max(1e-3);
                    xp[k] = x[k] + h;
                    self.eval(t, &xp, &mut fp);
                    xp[k] = x[k] - h;
                    self.eval(t, &xp, &mut fm);
                    xp[k] = x[k];
                    for i in 0..n {
                        j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
                    }
                }
                j
            }
        }
    }

    fn is_autonomous(&self) -> bool {
        !matches!(self, System::WcForced { .. })
    }
}

/// Max-norm of `a − b`.
pub(crate) fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn check_state(sys: &System, x: &[f64]) -> Result<()> {
    if x.len() != sys.dim() {
        return Err(Error::Domain(format!(
            "state has {} components, {} expects {}",
            x.len(),
            sys.kind().as_str(),
            sys.dim()
        )));
    }
    crate::error::ensure_finite("initial state", x)
}
