//! Wilson-Cowan excitatory/inhibitory oscillators: a single unit, the
//! symmetrically coupled pair, and the pair under periodic input.
//!
//! State vectors are ordered `(E1, I1, E2, I2)`.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};

/// Logistic exponents are clamped to this magnitude.
pub const EXP_CLAMP: f64 = 700.0;

/// Shifted logistic `S(x) = 1/(1 + e^{−λx+θ}) − 1/(1 + e^θ)`, so `S(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigmoid {
    pub lambda: f64,
    pub theta: f64,
    offset: f64,
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u.clamp(-EXP_CLAMP, EXP_CLAMP)).exp())
}

impl Sigmoid {
    pub fn new(lambda: f64, theta: f64) -> Self {
        Self {
            lambda,
            theta,
            offset: logistic(-theta),
        }
    }

    #[inline]
    fn g(&self, x: f64) -> f64 {
        logistic(self.lambda * x - self.theta)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.g(x) - self.offset
    }

    #[inline]
    pub fn d1(&self, x: f64) -> f64 {
        let g = self.g(x);
        self.lambda * g * (1.0 - g)
    }

    pub fn d2(&self, x: f64) -> f64 {
        let g = self.g(x);
        self.lambda.powi(2) * g * (1.0 - g) * (1.0 - 2.0 * g)
    }

    pub fn d3(&self, x: f64) -> f64 {
        let g = self.g(x);
        self.lambda.powi(3) * g * (1.0 - g) * (1.0 - 6.0 * g + 6.0 * g * g)
    }

    /// `(S, S', S'', S''')` at `x`.
    pub fn all(&self, x: f64) -> [f64; 4] {
        [self.value(x), self.d1(x), self.d2(x), self.d3(x)]
    }
}

/// `S1 = e^θ / (1 + e^θ)²`, so that `S'(0) = λ S1`.
pub fn s1(theta: f64) -> f64 {
    let g = logistic(-theta);
    g * (1.0 - g)
}

/// Coupled-pair parameters. `lambda` is the sigmoid slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WilsonCowanParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta: f64,
    pub tau: f64,
    pub lambda: f64,
    pub eps: f64,
    pub b_sp: f64,
}

impl WilsonCowanParams {
    /// Parameter set P with slope, coupling and cross-inhibition supplied.
    pub fn paper_p(lambda: f64, eps: f64, b_sp: f64) -> Self {
        Self {
            a: 7.0,
            b: 5.25,
            c: 5.0,
            d: 0.7,
            theta: 2.0,
            tau: 1.0,
            lambda,
            eps,
            b_sp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(
            "Wilson-Cowan parameters",
            &[
                self.a, self.b, self.c, self.d, self.theta, self.tau, self.lambda, self.eps,
                self.b_sp,
            ],
        )?;
        if self.tau <= 0.0 {
            return Err(Error::Domain(format!("tau = {} must be positive", self.tau)));
        }
        if self.eps < 0.0 {
            return Err(Error::Domain(format!("eps = {} must be >= 0", self.eps)));
        }
        Ok(())
    }

    pub fn sigmoid(&self) -> Sigmoid {
        Sigmoid::new(self.lambda, self.theta)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Sigmoid arguments `(E1, I1, E2, I2)` of the unforced pair. Each one is
    /// a linear form in the state.
    pub fn argument_rows(&self) -> [[f64; 4]; 4] {
        let (a, b, c, d, e, bs) = (self.a, self.b, self.c, self.d, self.eps, self.b_sp);
        [
            [a, -b, 0.0, 0.0],
            [c, -d, e, -e * bs],
            [0.0, 0.0, a, -b],
            [e, -e * bs, c, -d],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WcState {
    pub e1: f64,
    pub i1: f64,
    pub e2: f64,
    pub i2: f64,
}

impl WcState {
    pub fn to_array(&self) -> [f64; 4] {
        [self.e1, self.i1, self.e2, self.i2]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            e1: x[0],
            i1: x[1],
            e2: x[2],
            i2: x[3],
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            e1: self.e2,
            i1: self.i2,
            e2: self.e1,
            i2: self.i1,
        }
    }
}

/// Periodic input: amplitude `A`, frequency `f`, asymmetry `h`, power `2n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingParams {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub f: f64,
    pub h: f64,
    pub n: u32,
}

impl ForcingParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("forcing parameters", &[self.amplitude, self.f, self.h])?;
        if self.amplitude < 0.0 {
            return Err(Error::Domain("forcing amplitude A must be >= 0".into()));
        }
        if self.f <= 0.0 {
            return Err(Error::Domain("forcing frequency f must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.h) {
            return Err(Error::Domain("input asymmetry h must lie in [0, 1]".into()));
        }
        if self.n == 0 {
            return Err(Error::Domain("sharpness n must be a positive integer".into()));
        }
        Ok(())
    }

    /// Inputs `(u1, u2)` added to the excitatory sigmoid arguments.
    pub fn inputs(&self, t: f64) -> (f64, f64) {
        let (sn, cs) = (2.0 * PI * self.f * t).sin_cos();
        let p = 2 * self.n as i32;
        let (s, c) = (sn.powi(p), cs.powi(p));
        let a = self.amplitude;
        (a * s + (1.0 - self.h) * a * c, a * c + (1.0 - self.h) * a * s)
    }

    /// Base period `1/(2f)` of a single input channel.
    pub fn base_period(&self) -> f64 {
        0.5 / self.f
    }
}

fn field(x: &[f64], p: &WilsonCowanParams, sig: &Sigmoid, u: (f64, f64), out: &mut [f64]) {
    let (e1, i1, e2, i2) = (x[0], x[1], x[2], x[3]);
    let k = 1.0 / p.tau;
    out[0] = k * (-e1 + sig.value(p.a * e1 - p.b * i1 + u.0));
    out[1] = k * (-i1 + sig.value(p.c * e1 - p.d * i1 + p.eps * (e2 - p.b_sp * i2)));
    out[2] = k * (-e2 + sig.value(p.a * e2 - p.b * i2 + u.1));
    out[3] = k * (-i2 + sig.value(p.c * e2 - p.d * i2 + p.eps * (e1 - p.b_sp * i1)));
}

fn field_jacobian(x: &[f64], p: &WilsonCowanParams, sig: &Sigmoid, u: (f64, f64)) -> Matrix4<f64> {
    let (e1, i1, e2, i2) = (x[0], x[1], x[2], x[3]);
    let args = [
        p.a * e1 - p.b * i1 + u.0,
        p.c * e1 - p.d * i1 + p.eps * (e2 - p.b_sp * i2),
        p.a * e2 - p.b * i2 + u.1,
        p.c * e2 - p.d * i2 + p.eps * (e1 - p.b_sp * i1),
    ];
    let rows = p.argument_rows();
    let k = 1.0 / p.tau;
    Matrix4::from_fn(|i, j| {
        let diag = if i == j { -1.0 } else { 0.0 };
        k * (diag + sig.d1(args[i]) * rows[i][j])
    })
}

/// Coupled-pair vector field.
pub fn eval_wc_coupled(x: &WcState, p: &WilsonCowanParams) -> Result<WcState> {
    let a = x.to_array();
    ensure_finite("Wilson-Cowan state", &a)?;
    let mut out = [0.0; 4];
    field(&a, p, &p.sigmoid(), (0.0, 0.0), &mut out);
    Ok(WcState::from_slice(&out))
}

/// Forced-pair vector field at time `t`.
pub fn eval_wc_forced(
    x: &WcState,
    t: f64,
    p: &WilsonCowanParams,
    fp: &ForcingParams,
) -> Result<WcState> {
    let a = x.to_array();
    ensure_finite("Wilson-Cowan state", &a)?;
    let mut out = [0.0; 4];
    field(&a, p, &p.sigmoid(), fp.inputs(t), &mut out);
    Ok(WcState::from_slice(&out))
}

/// Slice-based evaluation used by the integrators.
#[inline]
pub(crate) fn wc_rhs(
    x: &[f64],
    t: f64,
    p: &WilsonCowanParams,
    sig: &Sigmoid,
    fp: Option<&ForcingParams>,
    out: &mut [f64],
) {
    let u = fp.map_or((0.0, 0.0), |f| f.inputs(t));
    field(x, p, sig, u, out);
}

#[inline]
pub(crate) fn wc_jac(
    x: &[f64],
    t: f64,
    p: &WilsonCowanParams,
    sig: &Sigmoid,
    fp: Option<&ForcingParams>,
) -> Matrix4<f64> {
    let u = fp.map_or((0.0, 0.0), |f| f.inputs(t));
    field_jacobian(x, p, sig, u)
}

/// Linearization of one uncoupled oscillator at the origin.
pub fn single_jacobian(p: &WilsonCowanParams) -> Matrix2<f64> {
    let g = p.lambda * s1(p.theta);
    Matrix2::new(-1.0 + p.a * g, -p.b * g, p.c * g, -1.0 - p.d * g) / p.tau
}

/// Linearization of the coupled pair at the origin.
pub fn pair_jacobian_at_origin(p: &WilsonCowanParams) -> Matrix4<f64> {
    field_jacobian(&[0.0; 4], p, &p.sigmoid(), (0.0, 0.0))
}

/// Hopf slope `λ_c = 2 / ((a − d) S1)` of a single oscillator.
pub fn wc_hopf_lambda(p: &WilsonCowanParams) -> Result<f64> {
    if p.a <= p.d {
        return Err(Error::NotApplicable(format!(
            "a = {} must exceed d = {} for a Hopf threshold",
            p.a, p.d
        )));
    }
    let lc = 2.0 / ((p.a - p.d) * s1(p.theta));
    debug_assert!(single_jacobian(&p.with_lambda(lc)).trace().abs() < 1e-12);
    Ok(lc)
}

fn period_radicand(lambda: f64, p: &WilsonCowanParams) -> f64 {
    let g = lambda * s1(p.theta);
    g * g * (p.b * p.c - p.a * p.d) + g * (p.d - p.a) + 1.0
}

/// Period `T = τ 2π / sqrt(λ²S1²(bc − ad) + λS1(d − a) + 1)` of the
/// bifurcating cycle.
pub fn wc_period(lambda: f64, p: &WilsonCowanParams) -> Result<f64> {
    let r = period_radicand(lambda, p);
    if r <= 0.0 {
        return Err(Error::NotApplicable(format!("period radicand {r} is not positive")));
    }
    Ok(p.tau * 2.0 * PI / r.sqrt())
}

/// Time constant that makes the emergent period equal `1/(2f)`.
pub fn forced_tau(f: f64, lambda: f64, p: &WilsonCowanParams) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!("forcing frequency {f} must be positive")));
    }
    let r = period_radicand(lambda, p);
    if r <= 0.0 {
        return Err(Error::NotApplicable(format!("period radicand {r} is not positive")));
    }
    Ok(r.sqrt() / (4.0 * f * PI))
}

/// Normal-form unfolding parameter of a configuration: the real part of the
/// leading eigenvalue of the uncoupled single-oscillator linearization.
pub fn unfolding_lambda(p: &WilsonCowanParams) -> f64 {
    let j = single_jacobian(p);
    let tr = j.trace();
    let det = j.determinant();
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        tr / 2.0
    } else {
        tr / 2.0 + disc.sqrt()
    }
}
