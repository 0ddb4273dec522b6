//! Normal-form coefficients of the coupled Wilson-Cowan pair.
//!
//! Pipeline:
//! 1. Taylor-expand the real field at the origin and move to the complex
//!    eigenbasis `y = (y1, y2, ȳ1, ȳ2)` of the linear part, where `y1` is the
//!    symmetric mode (eigenvalue `μ+`) and `y2` the antisymmetric one (`μ−`).
//! 2. Remove the quadratic terms with `z = y + Q2(y)`, solving
//!    `q = p / (μ_i + μ_j − μ_k)` monomial by monomial.
//! 3. The cubic part becomes `f3 = DP2·Q2 + P3`; keep the resonant monomials.
//! 4. Map to oscillator coordinates with `y = Cx`, `C = [[1, 1], [1, −1]]/√2`,
//!    and split each coefficient into its ε-free and ε-linear parts by
//!    repeating the pipeline at small `±ε`.
//!
//! Cubic coefficients depend on how the eigenvectors are scaled. The default
//! [`Normalization::UnitExcitatory`] sets the excitatory component of every
//! complex eigenvector to 1. Rescaling the eigenvectors by a complex `c`
//! multiplies every cubic coefficient by `|c|²` and leaves `ω`, the linear
//! coefficients and the classification invariants unchanged.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{bautin_estimate, c_det, classify_case, CaseClassification};
use crate::error::{Error, Result};
use crate::nf::NormalFormCoefficients;
use crate::poly::{degree, Monomial, Poly};
use crate::wc::{s1, wc_hopf_lambda, WilsonCowanParams};

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Eigenvector scaling convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Excitatory component of each mode vector equal to 1.
    UnitExcitatory,
    /// Each 4D mode vector has unit Euclidean norm and a real positive
    /// excitatory component.
    UnitNorm,
    /// `UnitExcitatory` multiplied by the given complex factor.
    Scaled { re: f64, im: f64 },
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::UnitExcitatory
    }
}

impl Normalization {
    pub fn tag(&self) -> String {
        match self {
            Normalization::UnitExcitatory => "unit-excitatory".into(),
            Normalization::UnitNorm => "unit-norm".into(),
            Normalization::Scaled { re, im } => format!("unit-excitatory*({re}{im:+}i)"),
        }
    }
}

/// Taylor model of the pair at the origin in eigen-coordinates.
#[derive(Debug, Clone)]
pub struct TaylorModel {
    /// Diagonal of the linear part, ordered `(μ+, μ−, μ̄+, μ̄−)`.
    pub mu: [C64; 4],
    /// Columns `(v+, v−, v̄+, v̄−)`: real state `x = V y`.
    pub basis: Matrix4<C64>,
    pub basis_inv: Matrix4<C64>,
    pub p2: [Poly; 4],
    pub p3: [Poly; 4],
    /// Off-diagonal residual of `V⁻¹ J V`.
    pub diagonal_residual: f64,
}

/// Quadratic near-identity change `z = y + Q2(y)`.
#[derive(Debug, Clone)]
pub struct QuadraticChange {
    pub q2: [Poly; 4],
    /// `max |q·(μ_i + μ_j − μ_k) − p|` over all monomials.
    pub max_residual: f64,
    pub smallest_divisor: f64,
}

/// Cubic terms after the quadratic change.
#[derive(Debug, Clone)]
pub struct CubicTerms {
    pub resonant: [Poly; 4],
    pub nonresonant: [Poly; 4],
}

fn real_to_c(m: &Matrix4<f64>) -> Matrix4<C64> {
    m.map(|v| C64::new(v, 0.0))
}

/// Linearization of the pair at the origin, `(−I + S'(0) L)/τ`.
fn linear_part(p: &WilsonCowanParams) -> Matrix4<f64> {
    let g = p.lambda * s1(p.theta);
    let rows = p.argument_rows();
    Matrix4::from_fn(|i, j| ((if i == j { -1.0 } else { 0.0 }) + g * rows[i][j]) / p.tau)
}

/// Leading complex eigenpair of a real 2×2 block, excitatory component 1.
fn block_mode(m: &Matrix2<f64>) -> Result<(C64, [C64; 2])> {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr / 4.0 - det;
    let scale = (tr * tr / 4.0).max(det.abs()).max(f64::MIN_POSITIVE);
    if disc >= 0.0 {
        if disc.abs() <= 1e-14 * scale {
            return Err(Error::DegenerateBasis("repeated real eigenvalue in mode block".into()));
        }
        return Err(Error::NotInHopfRegime(format!(
            "mode block has real eigenvalues (tr²/4 − det = {disc:.3e})"
        )));
    }
    let mu = C64::new(tr / 2.0, (-disc).sqrt());
    if m[(0, 1)].abs() < 1e-300 {
        return Err(Error::DegenerateBasis("E–I cross entry vanishes".into()));
    }
    // (m11 − μ) + m12 w = 0
    let w = (mu - m[(0, 0)]) / m[(0, 1)];
    Ok((mu, [C64::new(1.0, 0.0), w]))
}

/// Step 1: Taylor tensors in the eigenbasis.
pub fn taylor_expand(p: &WilsonCowanParams, norm: Normalization) -> Result<TaylorModel> {
    // Negative ε is allowed here: the coefficient split probes both signs.
    p.with_eps(p.eps.abs()).validate()?;
    let j = linear_part(p);
    let j11 = j.fixed_view::<2, 2>(0, 0).into_owned();
    let j12 = j.fixed_view::<2, 2>(0, 2).into_owned();
    let sym_ok = (j.fixed_view::<2, 2>(2, 2) - j11).abs().max() == 0.0
        && (j.fixed_view::<2, 2>(2, 0) - j12).abs().max() == 0.0;
    if !sym_ok {
        return Err(Error::DegenerateBasis("linearization is not swap-symmetric".into()));
    }
    let (mp, up) = block_mode(&(j11 + j12))?;
    let (mm, um) = block_mode(&(j11 - j12))?;
    let mut vp = [up[0], up[1], up[0], up[1]];
    let mut vm = [um[0], um[1], -um[0], -um[1]];
    for v in [&mut vp, &mut vm] {
        let k = match norm {
            Normalization::UnitExcitatory => C64::new(1.0, 0.0),
            Normalization::UnitNorm => {
                let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                C64::new(1.0 / n, 0.0)
            }
            Normalization::Scaled { re, im } => C64::new(re, im),
        };
        if k.norm() == 0.0 || !k.re.is_finite() || !k.im.is_finite() {
            return Err(Error::DegenerateBasis("eigenvector scale must be nonzero".into()));
        }
        for z in v.iter_mut() {
            *z *= k;
        }
    }
    let basis = Matrix4::from_fn(|r, c| match c {
        0 => vp[r],
        1 => vm[r],
        2 => vp[r].conj(),
        _ => vm[r].conj(),
    });
    let basis_inv = basis
        .try_inverse()
        .ok_or_else(|| Error::DegenerateBasis("eigenvector matrix is singular".into()))?;
    let mu = [mp, mm, mp.conj(), mm.conj()];
    let lam = basis_inv * real_to_c(&j) * basis;
    let mut diagonal_residual: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let want = if r == c { mu[r] } else { ZERO };
            diagonal_residual = diagonal_residual.max((lam[(r, c)] - want).norm());
        }
    }

    // Each sigmoid argument is a linear form ℓ_k·x, so
    // P2_k = S''(0)/2 (ℓ_k·x)², P3_k = S'''(0)/6 (ℓ_k·x)³, all divided by τ.
    let sig = p.sigmoid();
    let (d2, d3) = (sig.d2(0.0) / (2.0 * p.tau), sig.d3(0.0) / (6.0 * p.tau));
    let rows = p.argument_rows();
    let mut p2: [Poly; 4] = Default::default();
    let mut p3: [Poly; 4] = Default::default();
    for (k, row) in rows.iter().enumerate() {
        let coeffs: [C64; 4] =
            std::array::from_fn(|jj| (0..4).map(|i| basis[(i, jj)] * row[i]).sum::<C64>());
        let lin = Poly::linear(coeffs);
        let sq = lin.mul(&lin);
        let cu = sq.mul(&lin);
        for m in 0..4 {
            p2[m].add_scaled(&sq, basis_inv[(m, k)] * d2);
            p3[m].add_scaled(&cu, basis_inv[(m, k)] * d3);
        }
    }
    Ok(TaylorModel {
        mu,
        basis,
        basis_inv,
        p2,
        p3,
        diagonal_residual,
    })
}

fn divisor(mu: &[C64; 4], m: &Monomial, k: usize) -> C64 {
    (0..4).map(|i| mu[i] * m[i] as f64).sum::<C64>() - mu[k]
}

/// Step 2: homological equation for the quadratic terms.
///
/// `floor` is an absolute lower bound on `|μ_i + μ_j − μ_k|`.
pub fn solve_homological(tm: &TaylorModel, floor: f64) -> Result<QuadraticChange> {
    let mut q2: [Poly; 4] = Default::default();
    let mut max_residual: f64 = 0.0;
    let mut smallest = f64::INFINITY;
    for k in 0..4 {
        for (m, pc) in tm.p2[k].terms() {
            let den = divisor(&tm.mu, m, k);
            if den.norm() <= floor {
                let idx = crate::poly::indices(m);
                return Err(Error::SmallDivisor {
                    i: idx[0],
                    j: idx[1],
                    k,
                    divisor: den.norm(),
                });
            }
            smallest = smallest.min(den.norm());
            let q = pc / den;
            max_residual = max_residual.max((q * den - pc).norm());
            q2[k].add_term(*m, q);
        }
    }
    Ok(QuadraticChange {
        q2,
        max_residual,
        smallest_divisor: smallest,
    })
}

/// Whether a cubic monomial is resonant for component `k`: two factors from
/// the component's own group (`y1, y2` for k < 2, `ȳ1, ȳ2` otherwise) and
/// one from the conjugate group.
pub fn is_resonant(m: &Monomial, k: usize) -> bool {
    let own = if k < 2 { m[0] + m[1] } else { m[2] + m[3] };
    degree(m) == 3 && own == 2
}

/// Step 3: `f3 = DP2·Q2 + P3`, split into resonant and removable parts.
pub fn compute_f3(tm: &TaylorModel, qc: &QuadraticChange) -> CubicTerms {
    let mut resonant: [Poly; 4] = Default::default();
    let mut nonresonant: [Poly; 4] = Default::default();
    let one = C64::new(1.0, 0.0);
    for k in 0..4 {
        let mut f3 = tm.p3[k].clone();
        for j in 0..4 {
            f3.add_scaled(&tm.p2[k].derivative(j).mul(&qc.q2[j]), one);
        }
        for (m, c) in f3.terms() {
            if is_resonant(m, k) {
                resonant[k].add_term(*m, *c);
            } else {
                nonresonant[k].add_term(*m, *c);
            }
        }
    }
    CubicTerms {
        resonant,
        nonresonant,
    }
}

/// Coefficients of the first oscillator's equation in `x` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorCoefficients {
    /// Coefficient of `x1` (`λ + iω + εαε0`).
    pub x1: C64,
    /// Coefficient of `x2` (`εβε0`).
    pub x2: C64,
    /// Cubic monomials `x1|x1|², x1|x2|², x1²x̄2, x2|x1|², x2|x2|², x2²x̄1`.
    pub cubic: [C64; 6],
}

/// Exponents over `(x1, x2, x̄1, x̄2)` of the six cubic monomials, in the
/// order of [`OscillatorCoefficients::cubic`].
pub const CUBIC_MONOMIALS: [Monomial; 6] = [
    [2, 0, 1, 0],
    [1, 1, 0, 1],
    [2, 0, 0, 1],
    [1, 1, 1, 0],
    [0, 2, 0, 1],
    [0, 2, 1, 0],
];

/// Step 4: change `y = Cx` and read off the first oscillator's coefficients.
pub fn to_oscillator_coordinates(tm: &TaylorModel, cubic: &CubicTerms) -> OscillatorCoefficients {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |v: f64| C64::new(v, 0.0);
    let subs = [
        Poly::linear([c(r), c(r), ZERO, ZERO]),
        Poly::linear([c(r), c(-r), ZERO, ZERO]),
        Poly::linear([ZERO, ZERO, c(r), c(r)]),
        Poly::linear([ZERO, ZERO, c(r), c(-r)]),
    ];
    // ẋ1 = (ẏ1 + ẏ2)/√2
    let mut g = cubic.resonant[0].compose(&subs);
    g.add_scaled(&cubic.resonant[1].compose(&subs), C64::new(1.0, 0.0));
    let g = g.scaled(c(r));
    OscillatorCoefficients {
        x1: (tm.mu[0] + tm.mu[1]) / 2.0,
        x2: (tm.mu[0] - tm.mu[1]) / 2.0,
        cubic: CUBIC_MONOMIALS.map(|m| g.coeff(&m)),
    }
}

/// Options for [`extract_coefficients`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractOptions {
    pub eps_probe: f64,
    pub normalization: Normalization,
    /// Expand at the single-oscillator Hopf slope `λ_c` rather than at the
    /// slope in the parameter block.
    pub at_hopf: bool,
    /// Small-divisor floor relative to `|ω|`.
    pub divisor_floor: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            eps_probe: 1e-3,
            normalization: Normalization::UnitExcitatory,
            at_hopf: true,
            divisor_floor: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub coefficients: NormalFormCoefficients,
    pub eps_probe: f64,
    pub normalization: String,
    /// Slope at which the expansion was made.
    pub lambda_wc: f64,
    /// Real part of `μ±` at ε = 0 (zero at `λ_c`).
    pub lambda_unfolding: f64,
    pub residuals: f64,
    pub smallest_divisor: f64,
    pub diagonal_residual: f64,
    /// Largest removable cubic coefficient (kept out of the normal form).
    pub nonresonant_max: f64,
    /// Difference between the extrapolated ε-coefficients and the raw
    /// half-step estimate.
    pub richardson_delta: f64,
    pub warning: bool,
    pub classification: CaseClassification,
    pub cdet: f64,
    pub eps_bt: Option<f64>,
}

fn pipeline(p: &WilsonCowanParams, norm: Normalization, floor_rel: f64) -> Result<(OscillatorCoefficients, TaylorModel, QuadraticChange, CubicTerms)> {
    let tm = taylor_expand(p, norm)?;
    let floor = floor_rel * tm.mu[0].im.abs();
    let qc = solve_homological(&tm, floor)?;
    let f3 = compute_f3(&tm, &qc);
    Ok((to_oscillator_coordinates(&tm, &f3), tm, qc, f3))
}

/// Run the pipeline at ε = 0 and at `±eps_probe`, `±eps_probe/2`.
///
/// ε-linear parts use symmetric differences `(c(ε) − c(−ε))/(2ε)` with one
/// Richardson step; the ε-free parts come from the ε = 0 run.
pub fn extract_coefficients(p: &WilsonCowanParams, opts: &ExtractOptions) -> Result<ExtractionReport> {
    p.validate()?;
    if !(opts.eps_probe > 0.0) || !opts.eps_probe.is_finite() {
        return Err(Error::Domain(format!("eps_probe = {} must be positive", opts.eps_probe)));
    }
    let lambda_wc = if opts.at_hopf { wc_hopf_lambda(p)? } else { p.lambda };
    let base = p.with_lambda(lambda_wc);
    let run = |eps: f64| pipeline(&base.with_eps(eps), opts.normalization, opts.divisor_floor);

    let (c0, tm0, qc0, f30) = run(0.0)?;
    let mut residuals = qc0.max_residual;
    let mut smallest = qc0.smallest_divisor;
    let mut diag = tm0.diagonal_residual;
    let mut nonres = f30.nonresonant.iter().map(Poly::max_abs).fold(0.0, f64::max);

    let e = opts.eps_probe;
    let mut slope = |h: f64| -> Result<[C64; 8]> {
        let (cp, tp, qp, fp) = run(h)?;
        let (cm, tmm, qm, fm) = run(-h)?;
        for (t, q, f) in [(&tp, &qp, &fp), (&tmm, &qm, &fm)] {
            residuals = residuals.max(q.max_residual);
            smallest = smallest.min(q.smallest_divisor);
            diag = diag.max(t.diagonal_residual);
            nonres = nonres.max(f.nonresonant.iter().map(Poly::max_abs).fold(0.0, f64::max));
        }
        let d = |a: C64, b: C64| (a - b) / (2.0 * h);
        Ok([
            d(cp.x1, cm.x1),
            d(cp.cubic[0], cm.cubic[0]),
            d(cp.cubic[1], cm.cubic[1]),
            d(cp.cubic[2], cm.cubic[2]),
            d(cp.x2, cm.x2),
            d(cp.cubic[3], cm.cubic[3]),
            d(cp.cubic[4], cm.cubic[4]),
            d(cp.cubic[5], cm.cubic[5]),
        ])
    };
    let full = slope(e)?;
    let half = slope(e / 2.0)?;
    let rich: [C64; 8] = std::array::from_fn(|i| (4.0 * half[i] - full[i]) / 3.0);
    let delta = (0..8).map(|i| (rich[i] - half[i]).norm()).fold(0.0, f64::max);

    let coefficients = NormalFormCoefficients::new(
        c0.x1.im,
        c0.cubic[0],
        [rich[0], rich[1], rich[2], rich[3]],
        [rich[4], rich[5], rich[6], rich[7]],
    )?;
    let norm_all = coefficients
        .to_flat()
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    Ok(ExtractionReport {
        coefficients,
        eps_probe: e,
        normalization: opts.normalization.tag(),
        lambda_wc,
        lambda_unfolding: c0.x1.re,
        residuals,
        smallest_divisor: smallest,
        diagonal_residual: diag,
        nonresonant_max: nonres,
        richardson_delta: delta,
        warning: delta > 1e-3 * norm_all,
        classification: classify_case(&coefficients),
        cdet: c_det(&coefficients),
        eps_bt: bautin_estimate(&coefficients).ok(),
    })
}

/// Common factor `k` with `ours ≈ k · reference` over the cubic rows
/// (`α01, αε1..3, βε1..3`), plus each row's relative deviation after
/// scaling (absolute for rows that are zero in `reference`).
///
/// `k` is the median of the per-row modulus ratios, so a few rows that
/// disagree outright do not drag it.
pub fn cubic_scale_fit(
    ours: &NormalFormCoefficients,
    reference: &NormalFormCoefficients,
) -> (f64, Vec<(String, f64)>) {
    let rows = |c: &NormalFormCoefficients| -> Vec<(String, C64)> {
        let mut v = vec![("alpha01".to_string(), c.alpha01)];
        for i in 1..4 {
            v.push((format!("alpha_eps{i}"), c.alpha_eps[i]));
        }
        for i in 1..4 {
            v.push((format!("beta_eps{i}"), c.beta_eps[i]));
        }
        v
    };
    let (a, b) = (rows(ours), rows(reference));
    let mut ratios: Vec<f64> = a
        .iter()
        .zip(&b)
        .filter(|(_, y)| y.1 != ZERO)
        .map(|(x, y)| x.1.norm() / y.1.norm())
        .collect();
    ratios.sort_by(f64::total_cmp);
    let k = match ratios.len() {
        0 => 0.0,
        n if n % 2 == 1 => ratios[n / 2],
        n => 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]),
    };
    let dev = a
        .iter()
        .zip(&b)
        .map(|(x, y)| {
            let scale = if y.1 == ZERO { 1.0 } else { y.1.norm() * k.max(1e-300) };
            (x.0.clone(), (x.1 - y.1 * k).norm() / scale)
        })
        .collect();
    (k, dev)
}
