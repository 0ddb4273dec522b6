//! Truncated normal form for two identical coupled Hopf oscillators.
//!
//! ```text
//! dz1 = z1 (λ + iω + α01 |z1|²)
//!     + ε [ z1 (αε0 + αε1|z1|² + αε2|z2|² + αε3 z̄2 z1)
//!         + z2 (βε0 + βε1|z1|² + βε2|z2|² + βε3 z̄1 z2) ]
//! ```
//!
//! and the same with the indices swapped for `dz2`. The field is evaluated in
//! three charts: Cartesian (complex amplitudes), polar `(r1, r2, φ1, φ2)`, and
//! the reduced `(s, d, Δφ)` chart with `s = r1 + r2`, `d = r1 − r2`,
//! `Δφ = φ2 − φ1`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Charts reject points with `s − |d| < SINGULAR_GUARD · max(1, s)`.
pub const SINGULAR_GUARD: f64 = 1e-9;

/// All constants of the truncated normal form.
///
/// Index `k` of `alpha_eps` / `beta_eps` is the coefficient `αεk` / `βεk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientsRecord", into = "CoefficientsRecord")]
pub struct NormalFormCoefficients {
    pub omega: f64,
    pub alpha01: Complex64,
    pub alpha_eps: [Complex64; 4],
    pub beta_eps: [Complex64; 4],
}

impl NormalFormCoefficients {
    /// Validating constructor: all entries finite and `Re α01 < 0`.
    pub fn new(
        omega: f64,
        alpha01: Complex64,
        alpha_eps: [Complex64; 4],
        beta_eps: [Complex64; 4],
    ) -> Result<Self> {
        let c = Self {
            omega,
            alpha01,
            alpha_eps,
            beta_eps,
        };
        c.validate()?;
        Ok(c)
    }

    /// Uncoupled oscillators: every ε-coefficient zero.
    pub fn uncoupled(omega: f64, alpha01: Complex64) -> Result<Self> {
        Self::new(omega, alpha01, [Complex64::new(0.0, 0.0); 4], [Complex64::new(0.0, 0.0); 4])
    }

    pub fn validate(&self) -> Result<()> {
        let mut all = vec![self.omega, self.alpha01.re, self.alpha01.im];
        for z in self.alpha_eps.iter().chain(self.beta_eps.iter()) {
            all.push(z.re);
            all.push(z.im);
        }
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidCoefficients("non-finite entry".into()));
        }
        if self.alpha01.re >= 0.0 {
            return Err(Error::InvalidCoefficients(format!(
                "alpha01_re = {} must be negative (supercritical Hopf)",
                self.alpha01.re
            )));
        }
        Ok(())
    }

    /// Coefficients tabulated for the Wilson-Cowan pair with parameter set P at
    /// the three cross-inhibition values.
    pub fn tabulated(case: TabulatedSet) -> Self {
        let c = |re, im| Complex64::new(re, im);
        let zero = c(0.0, 0.0);
        let (a2, a3, b0, b1, b2, b3) = match case {
            TabulatedSet::NegativeBsp => (
                c(8.4, 6.34),
                c(-24.02, -46.36),
                c(0.0047, 0.252),
                c(-12.91, 19.36),
                c(7.16, -5.56),
                c(14.29, 10.02),
            ),
            TabulatedSet::PositiveBsp => (
                c(9.02, 6.8),
                c(-22.3, -44.92),
                c(-0.0047, 0.241),
                c(-13.18, 16.76),
                c(6.46, -5.47),
                c(13.33, 10.3),
            ),
            TabulatedSet::ZeroBsp => (
                c(8.72, 6.57),
                c(-23.2, -45.46),
                c(0.0, 0.246),
                c(-13.05, 18.06),
                c(6.52, -5.52),
                c(13.81, 10.16),
            ),
        };
        Self {
            omega: 1.073,
            alpha01: c(-21.94, -20.94),
            alpha_eps: [zero, zero, a2, a3],
            beta_eps: [b0, b1, b2, b3],
        }
    }

    /// Multiply every cubic coefficient by `k`, leaving ω and the linear
    /// ε-coefficients untouched. This is the effect of rescaling the
    /// eigenvectors by a complex `c` with `|c|² = k`.
    pub fn rescale_cubic(&self, k: f64) -> Self {
        let mut out = *self;
        out.alpha01 *= k;
        for i in 1..4 {
            out.alpha_eps[i] *= k;
            out.beta_eps[i] *= k;
        }
        out
    }
}

/// The three cross-inhibition values of the tabulated Wilson-Cowan coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TabulatedSet {
    /// `b_sp = −0.03`
    NegativeBsp,
    /// `b_sp = +0.03`
    PositiveBsp,
    /// `b_sp = 0`
    ZeroBsp,
}

impl TabulatedSet {
    pub const ALL: [TabulatedSet; 3] = [Self::NegativeBsp, Self::PositiveBsp, Self::ZeroBsp];

    pub fn b_sp(self) -> f64 {
        match self {
            Self::NegativeBsp => -0.03,
            Self::PositiveBsp => 0.03,
            Self::ZeroBsp => 0.0,
        }
    }
}

/// Flat JSON layout of [`NormalFormCoefficients`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsRecord {
    pub omega: f64,
    pub alpha01_re: f64,
    pub alpha01_im: f64,
    pub alpha_eps0_re: f64,
    pub alpha_eps0_im: f64,
    pub alpha_eps1_re: f64,
    pub alpha_eps1_im: f64,
    pub alpha_eps2_re: f64,
    pub alpha_eps2_im: f64,
    pub alpha_eps3_re: f64,
    pub alpha_eps3_im: f64,
    pub beta_eps0_re: f64,
    pub beta_eps0_im: f64,
    pub beta_eps1_re: f64,
    pub beta_eps1_im: f64,
    pub beta_eps2_re: f64,
    pub beta_eps2_im: f64,
    pub beta_eps3_re: f64,
    pub beta_eps3_im: f64,
}

/// JSON keys in serialization order.
pub const COEFFICIENT_KEYS: [&str; 19] = [
    "omega",
    "alpha01_re",
    "alpha01_im",
    "alpha_eps0_re",
    "alpha_eps0_im",
    "alpha_eps1_re",
    "alpha_eps1_im",
    "alpha_eps2_re",
    "alpha_eps2_im",
    "alpha_eps3_re",
    "alpha_eps3_im",
    "beta_eps0_re",
    "beta_eps0_im",
    "beta_eps1_re",
    "beta_eps1_im",
    "beta_eps2_re",
    "beta_eps2_im",
    "beta_eps3_re",
    "beta_eps3_im",
];

impl NormalFormCoefficients {
    /// Values in [`COEFFICIENT_KEYS`] order.
    pub fn to_flat(&self) -> [f64; 19] {
        let mut out = [0.0; 19];
        out[0] = self.omega;
        out[1] = self.alpha01.re;
        out[2] = self.alpha01.im;
        for k in 0..4 {
            out[3 + 2 * k] = self.alpha_eps[k].re;
            out[4 + 2 * k] = self.alpha_eps[k].im;
            out[11 + 2 * k] = self.beta_eps[k].re;
            out[12 + 2 * k] = self.beta_eps[k].im;
        }
        out
    }

    pub fn from_flat(v: &[f64; 19]) -> Result<Self> {
        let c = |i: usize| Complex64::new(v[i], v[i + 1]);
        Self::new(
            v[0],
            c(1),
            [c(3), c(5), c(7), c(9)],
            [c(11), c(13), c(15), c(17)],
        )
    }
}

impl From<NormalFormCoefficients> for CoefficientsRecord {
    fn from(c: NormalFormCoefficients) -> Self {
        let v = c.to_flat();
        CoefficientsRecord {
            omega: v[0],
            alpha01_re: v[1],
            alpha01_im: v[2],
            alpha_eps0_re: v[3],
            alpha_eps0_im: v[4],
            alpha_eps1_re: v[5],
            alpha_eps1_im: v[6],
            alpha_eps2_re: v[7],
            alpha_eps2_im: v[8],
            alpha_eps3_re: v[9],
            alpha_eps3_im: v[10],
            beta_eps0_re: v[11],
            beta_eps0_im: v[12],
            beta_eps1_re: v[13],
            beta_eps1_im: v[14],
            beta_eps2_re: v[15],
            beta_eps2_im: v[16],
            beta_eps3_re: v[17],
            beta_eps3_im: v[18],
        }
    }
}

impl TryFrom<CoefficientsRecord> for NormalFormCoefficients {
    type Error = Error;

    fn try_from(r: CoefficientsRecord) -> Result<Self> {
        NormalFormCoefficients::from_flat(&[
            r.omega,
            r.alpha01_re,
            r.alpha01_im,
            r.alpha_eps0_re,
            r.alpha_eps0_im,
            r.alpha_eps1_re,
            r.alpha_eps1_im,
            r.alpha_eps2_re,
            r.alpha_eps2_im,
            r.alpha_eps3_re,
            r.alpha_eps3_im,
            r.beta_eps0_re,
            r.beta_eps0_im,
            r.beta_eps1_re,
            r.beta_eps1_im,
            r.beta_eps2_re,
            r.beta_eps2_im,
            r.beta_eps3_re,
            r.beta_eps3_im,
        ])
    }
}

/// Unfolding parameters: distance from Hopf `λ` and coupling `ε ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingParams {
    pub lambda: f64,
    pub eps: f64,
}

impl UnfoldingParams {
    pub fn new(lambda: f64, eps: f64) -> Result<Self> {
        ensure_finite("unfolding parameters", &[lambda, eps])?;
        if eps < 0.0 {
            return Err(Error::Domain(format!("eps = {eps} must be >= 0")));
        }
        Ok(Self { lambda, eps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub z1: Complex64,
    pub z2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianRate {
    pub dz1: Complex64,
    pub dz2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub r1: f64,
    pub r2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRate {
    pub dr1: f64,
    pub dr2: f64,
    pub dphi1: f64,
    pub dphi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub s: f64,
    pub d: f64,
    pub dphi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedRate {
    pub ds: f64,
    pub dd: f64,
    pub ddphi: f64,
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl CartesianState {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    /// Packs as `[Re z1, Im z1, Re z2, Im z2]`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            z1: Complex64::new(x[0], x[1]),
            z2: Complex64::new(x[2], x[3]),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            z1: self.z2,
            z2: self.z1,
        }
    }

    pub fn to_polar(&self) -> PolarState {
        PolarState {
            r1: self.z1.norm(),
            r2: self.z2.norm(),
            phi1: wrap_angle(self.z1.arg()),
            phi2: wrap_angle(self.z2.arg()),
        }
    }
}

impl PolarState {
    pub fn to_cartesian(&self) -> CartesianState {
        CartesianState {
            z1: Complex64::from_polar(self.r1, self.phi1),
            z2: Complex64::from_polar(self.r2, self.phi2),
        }
    }

    pub fn dphi(&self) -> f64 {
        wrap_angle(self.phi2 - self.phi1)
    }
}

fn check_chart(r1: f64, r2: f64) -> Result<()> {
    let s = r1 + r2;
    if 2.0 * r1.min(r2) < SINGULAR_GUARD * s.max(1.0) {
        return Err(Error::SingularChart(format!(
            "amplitudes (r1, r2) = ({r1:e}, {r2:e}) too close to zero; use the Cartesian chart"
        )));
    }
    Ok(())
}

/// `(r1, r2, φ1, φ2) ↦ (s, d, Δφ)`.
pub fn polar_to_reduced(p: &PolarState) -> ReducedState {
    ReducedState {
        s: p.r1 + p.r2,
        d: p.r1 - p.r2,
        dphi: p.dphi(),
    }
}

/// `(s, d, Δφ) ↦ (r1, r2, Δφ)`.
pub fn reduced_to_polar(r: &ReducedState) -> Result<(f64, f64, f64)> {
    ensure_finite("reduced state", &[r.s, r.d, r.dphi])?;
    if r.d.abs() > r.s {
        return Err(Error::Domain(format!("|d| = {} exceeds s = {}", r.d.abs(), r.s)));
    }
    Ok(((r.s + r.d) / 2.0, (r.s - r.d) / 2.0, wrap_angle(r.dphi)))
}

/// Cartesian field.
pub fn eval_cartesian(
    x: &CartesianState,
    p: &UnfoldingParams,
    c: &NormalFormCoefficients,
) -> Result<CartesianRate> {
    ensure_finite("cartesian state", &[x.z1.re, x.z1.im, x.z2.re, x.z2.im])?;
    ensure_finite("unfolding parameters", &[p.lambda, p.eps])?;
    Ok(cartesian_field(x.z1, x.z2, p, c))
}

#[inline]
pub(crate) fn cartesian_field(
    z1: Complex64,
    z2: Complex64,
    p: &UnfoldingParams,
    c: &NormalFormCoefficients,
) -> CartesianRate {
    let lin = Complex64::new(p.lambda, c.omega);
    let one = |za: Complex64, zb: Complex64| {
        let na = za.norm_sqr();
        let nb = zb.norm_sqr();
        let a = &c.alpha_eps;
        let b = &c.beta_eps;
        za * (lin + c.alpha01 * na)
            + p.eps
                * (za * (a[0] + a[1] * na + a[2] * nb + a[3] * zb.conj() * za)
                    + zb * (b[0] + b[1] * na + b[2] * nb + b[3] * za.conj() * zb))
    };
    CartesianRate {
        dz1: one(z1, z2),
        dz2: one(z2, z1),
    }
}

/// Radial coupling function `f_r(r1, r2, Δφ)`.
pub fn f_r(r1: f64, r2: f64, dphi: f64, c: &NormalFormCoefficients) -> f64 {
    let (a, b) = (&c.alpha_eps, &c.beta_eps);
    let (sn, cs) = dphi.sin_cos();
    let (sn2, cs2) = (2.0 * dphi).sin_cos();
    r1 * r1 * r2 * ((b[1].re + a[3].re) * cs - (b[1].im - a[3].im) * sn)
        + r2 * r2 * r1 * (a[2].re + b[3].re * cs2 - b[3].im * sn2)
        + r1 * a[0].re
        + r1.powi(3) * a[1].re
        + r2.powi(3) * (b[2].re * cs - b[2].im * sn)
        + r2 * (b[0].re * cs - b[0].im * sn)
}

/// Angular coupling function `f_φ(r1, r2, Δφ)`.
pub fn f_phi(r1: f64, r2: f64, dphi: f64, c: &NormalFormCoefficients) -> f64 {
    let (a, b) = (&c.alpha_eps, &c.beta_eps);
    let (sn, cs) = dphi.sin_cos();
    let (sn2, cs2) = (2.0 * dphi).sin_cos();
    r1 * r1 * r2 * ((b[1].im + a[3].im) * cs + (b[1].re - a[3].re) * sn)
        + r2 * r2 * r1 * (a[2].im + b[3].im * cs2 + b[3].re * sn2)
        + r1 * a[0].im
        + r1.powi(3) * a[1].im
        + r2.powi(3) * (b[2].im * cs + b[2].re * sn)
        + r2 * (b[0].im * cs + b[0].re * sn)
}

/// Phase-difference coupling `f_Δφ = f_φ(r2, r1, −Δφ)/r2 − f_φ(r1, r2, Δφ)/r1`.
pub fn f_dphi(r1: f64, r2: f64, dphi: f64, c: &NormalFormCoefficients) -> f64 {
    f_phi(r2, r1, -dphi, c) / r2 - f_phi(r1, r2, dphi, c) / r1
}

pub fn g_s(s: f64, d: f64, dphi: f64, c: &NormalFormCoefficients) -> f64 {
    let (r1, r2) = ((s + d) / 2.0, (s - d) / 2.0);
    f_r(r1, r2, dphi, c) + f_r(r2, r1, -dphi, c)
}

pub fn g_d(s: f64, d: f64, dphi: f64, c: &NormalFormCoefficients) -> f64 {
    let (r1, r2) = ((s + d) / 2.0, (s - d) / 2.0);
    f_r(r1, r2, dphi, c) - f_r(r2, r1, -dphi, c)
}

pub fn g_dphi(s: f64, d: f64, dphi: f64, c: &NormalFormCoefficients) -> f64 {
    f_dphi((s + d) / 2.0, (s - d) / 2.0, dphi, c)
}

/// Polar field; requires both amplitudes bounded away from zero.
pub fn eval_polar(
    x: &PolarState,
    p: &UnfoldingParams,
    c: &NormalFormCoefficients,
) -> Result<PolarRate> {
    ensure_finite("polar state", &[x.r1, x.r2, x.phi1, x.phi2])?;
    if x.r1 < 0.0 || x.r2 < 0.0 {
        return Err(Error::Domain("negative amplitude".into()));
    }
    check_chart(x.r1, x.r2)?;
    let dp = x.phi2 - x.phi1;
    let (r1, r2, lam, eps) = (x.r1, x.r2, p.lambda, p.eps);
    let ar = c.alpha01.re;
    let ai = c.alpha01.im;
    Ok(PolarRate {
        dr1: r1 * (lam + ar * r1 * r1) + eps * f_r(r1, r2, dp, c),
        dr2: r2 * (lam + ar * r2 * r2) + eps * f_r(r2, r1, -dp, c),
        dphi1: c.omega + ai * r1 * r1 + eps / r1 * f_phi(r1, r2, dp, c),
        dphi2: c.omega + ai * r2 * r2 + eps / r2 * f_phi(r2, r1, -dp, c),
    })
}

/// Reduced `(s, d, Δφ)` field; requires `s > |d|` with margin.
pub fn eval_reduced(
    x: &ReducedState,
    p: &UnfoldingParams,
    c: &NormalFormCoefficients,
) -> Result<ReducedRate> {
    ensure_finite("reduced state", &[x.s, x.d, x.dphi])?;
    if x.s - x.d.abs() < SINGULAR_GUARD * x.s.max(1.0) {
        return Err(Error::SingularChart(format!(
            "s - |d| = {:e} too small; use the Cartesian chart",
            x.s - x.d.abs()
        )));
    }
    Ok(reduced_field(x.s, x.d, x.dphi, p, c))
}

#[inline]
pub(crate) fn reduced_field(
    s: f64,
    d: f64,
    dphi: f64,
    p: &UnfoldingParams,
    c: &NormalFormCoefficients,
) -> ReducedRate {
    let ar = c.alpha01.re;
    let ai = c.alpha01.im;
    let lam = p.lambda;
    ReducedRate {
        ds: s * (lam + ar / 4.0 * (s * s + 3.0 * d * d)) + p.eps * g_s(s, d, dphi, c),
        dd: d * (lam + ar / 4.0 * (d * d + 3.0 * s * s)) + p.eps * g_d(s, d, dphi, c),
        ddphi: -ai * s * d + p.eps * g_dphi(s, d, dphi, c),
    }
}
