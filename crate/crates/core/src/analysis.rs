//! Closed-form bifurcation analysis of the truncated normal form.
//!
//! The oscillating solutions `S̄±_osc` live on the invariant planes
//! `Ξ± = {d = 0, Δφ ∈ {0, π}}`; `+` is in-phase, `−` anti-phase.

use nalgebra::{Matrix2, Matrix3, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::nf::{NormalFormCoefficients, ReducedState, UnfoldingParams};

/// Which symmetric oscillating solution: `Plus` is in-phase (Δφ = 0),
/// `Minus` anti-phase (Δφ = π).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    /// `+1` for `Plus`, `−1` for `Minus`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn dphi(self) -> f64 {
        match self {
            Branch::Plus => 0.0,
            Branch::Minus => PI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }

    pub fn opposite(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Origin eigenvalues `(μ+, μ̄+, μ−, μ̄−)` with `μ± = λ + iω + ε(αε0 ± βε0)`.
pub fn origin_eigenvalues(p: &UnfoldingParams, c: &NormalFormCoefficients) -> [Complex64; 4] {
    let base = Complex64::new(p.lambda, c.omega) + p.eps * c.alpha_eps[0];
    let mp = base + p.eps * c.beta_eps[0];
    let mm = base - p.eps * c.beta_eps[0];
    [mp, mp.conj(), mm, mm.conj()]
}

/// Real 4×4 linearization at the origin in `(Re z1, Im z1, Re z2, Im z2)`.
pub fn origin_jacobian(p: &UnfoldingParams, c: &NormalFormCoefficients) -> Matrix4<f64> {
    let a = Complex64::new(p.lambda, c.omega) + p.eps * c.alpha_eps[0];
    let b = p.eps * c.beta_eps[0];
    let blk = |z: Complex64| Matrix2::new(z.re, -z.im, z.im, z.re);
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&blk(a));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&blk(a));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&blk(b));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&blk(b));
    m
}

/// `ᾱ± = λ + ε(αε0R ± βε0R)`.
pub fn alpha_bar(p: &UnfoldingParams, branch: Branch, c: &NormalFormCoefficients) -> f64 {
    p.lambda + p.eps * (c.alpha_eps[0].re + branch.sign() * c.beta_eps[0].re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfCurvePoint {
    pub branch: Branch,
    pub lambda: f64,
    pub eps: f64,
    pub alpha_bar: f64,
}

/// λ on `C±_HB` for a given ε.
pub fn hopf_curve_lambda(eps: f64, branch: Branch, c: &NormalFormCoefficients) -> f64 {
    -eps * (c.alpha_eps[0].re + branch.sign() * c.beta_eps[0].re)
}

pub fn hopf_curve_point(eps: f64, branch: Branch, c: &NormalFormCoefficients) -> HopfCurvePoint {
    let lambda = hopf_curve_lambda(eps, branch, c);
    HopfCurvePoint {
        branch,
        lambda,
        eps,
        alpha_bar: alpha_bar(&UnfoldingParams { lambda, eps }, branch, c),
    }
}

/// `K±_stb = αε2R + αε1R + βε3R ± (βε2R + βε1R + αε3R)`.
pub fn k_stb(branch: Branch, c: &NormalFormCoefficients) -> f64 {
    let (a, b) = (&c.alpha_eps, &c.beta_eps);
    a[2].re + a[1].re + b[3].re + branch.sign() * (b[2].re + b[1].re + a[3].re)
}

/// `C_det = βε0I · α01I / α01R`.
pub fn c_det(c: &NormalFormCoefficients) -> f64 {
    c.beta_eps[0].im * c.alpha01.im / c.alpha01.re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscBranchPoint {
    pub branch: Branch,
    pub s_osc: f64,
    pub lambda: f64,
    pub eps: f64,
    pub k_stb: f64,
}

impl OscBranchPoint {
    pub fn reduced_state(&self) -> ReducedState {
        ReducedState {
            s: self.s_osc,
            d: 0.0,
            dphi: self.branch.dphi(),
        }
    }
}

/// `s±_osc = sqrt(−4ᾱ± / (α01R + εK±_stb))`.
pub fn s_osc(
    p: &UnfoldingParams,
    branch: Branch,
    c: &NormalFormCoefficients,
) -> Result<OscBranchPoint> {
    let ab = alpha_bar(p, branch, c);
    let k = k_stb(branch, c);
    let den = c.alpha01.re + p.eps * k;
    if den >= 0.0 {
        return Err(Error::SupercriticalityLost {
            branch: branch.name(),
            denominator: den,
        });
    }
    if ab < 0.0 {
        return Err(Error::NotAdmissible {
            branch: branch.name(),
            alpha_bar: ab,
        });
    }
    Ok(OscBranchPoint {
        branch,
        s_osc: (-4.0 * ab / den).sqrt(),
        lambda: p.lambda,
        eps: p.eps,
        k_stb: k,
    })
}

/// Jacobian of the reduced field at `S̄±_osc`, ordered `(s, d, Δφ)`.
pub fn jacobian_at_osc(
    p: &UnfoldingParams,
    branch: Branch,
    c: &NormalFormCoefficients,
) -> Result<Matrix3<f64>> {
    let pt = s_osc(p, branch, c)?;
    if pt.s_osc == 0.0 {
        // c^Δφ_d carries a 1/s term
        return Err(Error::SingularChart(format!(
            "{} branch has zero amplitude on its Hopf curve",
            branch.name()
        )));
    }
    let e = jacobian_entries(pt.s_osc, p, branch, c);
    Ok(Matrix3::new(
        e.ss, 0.0, 0.0, //
        0.0, e.dd, e.d_dphi, //
        0.0, e.dphi_d, e.dphi_dphi,
    ))
}

/// The five nonzero entries of the block-diagonal Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianEntries {
    pub ss: f64,
    pub dd: f64,
    pub d_dphi: f64,
    pub dphi_d: f64,
    pub dphi_dphi: f64,
}

/// Entries at an arbitrary amplitude `s` on `Ξ±`.
pub fn jacobian_entries(
    s: f64,
    p: &UnfoldingParams,
    branch: Branch,
    c: &NormalFormCoefficients,
) -> JacobianEntries {
    let pm = branch.sign();
    let (a, b) = (&c.alpha_eps, &c.beta_eps);
    let (lam, eps) = (p.lambda, p.eps);
    let s2 = s * s;
    let ss = lam
        + eps * (a[0].re + pm * b[0].re)
        + 3.0 * s2 / 4.0
            * (c.alpha01.re
                + eps * (a[1].re + pm * (b[2].re + b[1].re + a[3].re) + a[2].re + b[3].re));
    let dd = lam
        + eps * (a[0].re - pm * b[0].re)
        + s2 / 4.0
            * (3.0 * c.alpha01.re
                + eps
                    * (3.0 * (a[1].re - pm * b[2].re) + pm * (b[1].re + a[3].re)
                        - a[2].re
                        - b[3].re));
    let d_dphi = eps
        * (-s.powi(3) / 4.0 * (2.0 * b[3].im + pm * (b[1].im - a[3].im) + pm * b[2].im)
            - pm * b[0].im * s);
    let dphi_d = -c.alpha01.im * s
        + eps * (s * (a[2].im - a[1].im + b[3].im + pm * 2.0 * b[2].im) + pm * 4.0 * b[0].im / s);
    let dphi_dphi = eps
        * (s2 / 2.0 * (-pm * (b[1].re - a[3].re) - 2.0 * b[3].re - pm * b[2].re)
            - pm * 2.0 * b[0].re);
    JacobianEntries {
        ss,
        dd,
        d_dphi,
        dphi_d,
        dphi_dphi,
    }
}

/// Trace, determinant and discriminant of the transverse 2×2 block.
///
/// `disc` follows the closed form used throughout the analysis,
/// `disc = tr²/4 − det`, so the block eigenvalues are `tr/2 ± sqrt(disc)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceDet {
    pub tr: f64,
    pub det: f64,
    pub disc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeType {
    StableNode,
    StableFocus,
    #[serde(rename = "saddle-1u")]
    Saddle1u,
    #[serde(rename = "saddle-2u")]
    Saddle2u,
    SaddleFocus,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub branch: Branch,
    /// Exact values from the block Jacobian.
    pub exact: TraceDet,
    /// Second-order closed forms in `(λ, ε)`.
    pub second_order: TraceDet,
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub mu3: Complex64,
    pub node_type: NodeType,
}

/// Second-order closed forms of trace, determinant and discriminant.
pub fn second_order_trace_det(
    p: &UnfoldingParams,
    branch: Branch,
    c: &NormalFormCoefficients,
) -> TraceDet {
    let pm = branch.sign();
    let (lam, eps) = (p.lambda, p.eps);
    let a0 = c.alpha_eps[0].re;
    let (br, bi) = (c.beta_eps[0].re, c.beta_eps[0].im);
    let cd = c_det(c);
    let ab = lam + eps * (a0 + pm * br);
    TraceDet {
        tr: -2.0 * (lam + eps * (a0 + pm * 3.0 * br)),
        det: pm * 4.0 * eps * ab * (cd + br) + 4.0 * eps * eps * (bi * bi + br * br),
        disc: ab * (ab - pm * 4.0 * eps * cd) - 4.0 * eps * eps * bi * bi,
    }
}

/// Eigenvalues `tr/2 ∓ sqrt(disc)` of a 2×2 block given trace and `disc`.
pub fn block_eigenvalues(td: &TraceDet) -> (Complex64, Complex64) {
    let root = Complex64::new(td.disc, 0.0).sqrt();
    let half = Complex64::new(td.tr / 2.0, 0.0);
    (half - root, half + root)
}

pub fn tr_det_disc(
    p: &UnfoldingParams,
    branch: Branch,
    c: &NormalFormCoefficients,
) -> Result<StabilityReport> {
    let j = jacobian_at_osc(p, branch, c)?;
    let tr = j[(1, 1)] + j[(2, 2)];
    let det = j[(1, 1)] * j[(2, 2)] - j[(1, 2)] * j[(2, 1)];
    let exact = TraceDet {
        tr,
        det,
        disc: tr * tr / 4.0 - det,
    };
    let (mu2, mu3) = block_eigenvalues(&exact);
    let mu1 = Complex64::new(j[(0, 0)], 0.0);
    let scale = j.abs().max().max(f64::MIN_POSITIVE);
    Ok(StabilityReport {
        branch,
        exact,
        second_order: second_order_trace_det(p, branch, c),
        mu1,
        mu2,
        mu3,
        node_type: node_type([mu1, mu2, mu3], 1e-12 * scale),
    })
}

fn node_type(mu: [Complex64; 3], tol: f64) -> NodeType {
    if mu.iter().any(|m| m.re.abs() <= tol) {
        return NodeType::Degenerate;
    }
    let unstable = mu.iter().filter(|m| m.re > 0.0).count();
    let complex = mu.iter().any(|m| m.im.abs() > tol);
    match (unstable, complex) {
        (0, false) => NodeType::StableNode,
        (0, true) => NodeType::StableFocus,
        (1, _) => NodeType::Saddle1u,
        (_, true) => NodeType::SaddleFocus,
        _ => NodeType::Saddle2u,
    }
}

/// Sign with a dead zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopfSubcase {
    HopfPossible,
    HopfImpossible,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseLabel {
    Case1,
    Case2,
    Case3,
    Case1m,
    Case2m,
    Case3m,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2 => "case2",
            CaseLabel::Case3 => "case3",
            CaseLabel::Case1m => "case1m",
            CaseLabel::Case2m => "case2m",
            CaseLabel::Case3m => "case3m",
        }
    }

    /// Mirrored cases swap the roles of the two branches.
    pub fn is_mirrored(self) -> bool {
        matches!(self, CaseLabel::Case1m | CaseLabel::Case2m | CaseLabel::Case3m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseClassification {
    pub beta_eps0r_sign: Sign,
    pub cdet: f64,
    pub cdet_plus_beta_sign: Sign,
    pub hopf_subcase: HopfSubcase,
    pub case_label: CaseLabel,
    /// Branch whose transverse trace can vanish inside its existence
    /// domain, if any.
    pub trace_branch: Option<Branch>,
}

/// `|βε0R| < ZERO_BETA_TOL · (|βε0I| + 1)` counts as zero.
pub const ZERO_BETA_TOL: f64 = 1e-6;

pub fn classify_case(c: &NormalFormCoefficients) -> CaseClassification {
    let (br, bi) = (c.beta_eps[0].re, c.beta_eps[0].im);
    let cd = c_det(c);
    let bsign = if br.abs() < ZERO_BETA_TOL * (bi.abs() + 1.0) {
        Sign::Zero
    } else if br > 0.0 {
        Sign::Positive
    } else {
        Sign::Negative
    };
    let br_eff = if bsign == Sign::Zero { 0.0 } else { br };
    let sum = cd + br_eff;
    let csign = if sum >= 0.0 {
        Sign::Positive
    } else {
        Sign::Negative
    };
    let label = match (bsign, csign) {
        (Sign::Positive, Sign::Positive) => CaseLabel::Case1,
        (Sign::Negative, Sign::Positive) => CaseLabel::Case2,
        (Sign::Zero, Sign::Positive) => CaseLabel::Case3,
        (Sign::Negative, _) => CaseLabel::Case1m,
        (Sign::Positive, _) => CaseLabel::Case2m,
        (Sign::Zero, _) => CaseLabel::Case3m,
    };
    // The mirror map (βε0R, C_det) → (−βε0R, −C_det) turns every mirrored case
    // into its unmirrored partner, so the inequality is applied with σ.
    let sigma = if csign == Sign::Positive { 1.0 } else { -1.0 };
    let hopf = match label {
        CaseLabel::Case3 | CaseLabel::Case3m => HopfSubcase::NotApplicable,
        _ => {
            if sigma * br_eff < -sigma * cd + (cd * cd + bi * bi).sqrt() {
                HopfSubcase::HopfPossible
            } else {
                HopfSubcase::HopfImpossible
            }
        }
    };
    let trace_branch = match bsign {
        Sign::Positive => Some(Branch::Minus),
        Sign::Negative => Some(Branch::Plus),
        Sign::Zero => None,
    };
    CaseClassification {
        beta_eps0r_sign: bsign,
        cdet: cd,
        cdet_plus_beta_sign: csign,
        hopf_subcase: hopf,
        case_label: label,
        trace_branch,
    }
}

/// Bistability predicate of the second-order analysis: both symmetric
/// solutions exist and both are stable.
pub fn is_bistable(p: &UnfoldingParams, c: &NormalFormCoefficients) -> bool {
    if p.eps <= 0.0 {
        return false;
    }
    if Branch::BOTH.iter().any(|&b| alpha_bar(p, b, c) <= 0.0) {
        return false;
    }
    let cls = classify_case(c);
    let tp = second_order_trace_det(p, Branch::Plus, c);
    let tm = second_order_trace_det(p, Branch::Minus, c);
    match cls.case_label {
        CaseLabel::Case1 => cls.hopf_subcase == HopfSubcase::HopfPossible && tm.tr < 0.0 && tm.det > 0.0,
        CaseLabel::Case2 => tp.tr < 0.0 && tm.det > 0.0,
        CaseLabel::Case3 => tm.det > 0.0,
        CaseLabel::Case1m => cls.hopf_subcase == HopfSubcase::HopfPossible && tp.tr < 0.0 && tp.det > 0.0,
        CaseLabel::Case2m => tm.tr < 0.0 && tp.det > 0.0,
        CaseLabel::Case3m => tp.det > 0.0,
    }
}

/// Bistability from the exact block Jacobians: both `S̄±_osc` admissible with
/// all three reduced eigenvalues in the open left half-plane.
pub fn is_bistable_exact(p: &UnfoldingParams, c: &NormalFormCoefficients) -> bool {
    Branch::BOTH.iter().all(|&b| match tr_det_disc(p, b, c) {
        Ok(r) => matches!(r.node_type, NodeType::StableNode | NodeType::StableFocus),
        Err(_) => false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CurveKind {
    #[serde(rename = "HB")]
    Hopf,
    #[serde(rename = "TR0")]
    TraceZero,
    #[serde(rename = "DET0")]
    DetZero,
    #[serde(rename = "DISC0")]
    DiscZero,
}

impl CurveKind {
    pub const ALL: [CurveKind; 4] = [
        CurveKind::Hopf,
        CurveKind::TraceZero,
        CurveKind::DetZero,
        CurveKind::DiscZero,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Hopf => "HB",
            CurveKind::TraceZero => "TR0",
            CurveKind::DetZero => "DET0",
            CurveKind::DiscZero => "DISC0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub branch: Branch,
    pub curve: CurveKind,
    /// `(ε, λ)` samples in ascending ε; a quadratic contributes up to two
    /// rows per ε.
    pub points: Vec<(f64, f64)>,
    /// ε samples at which the boundary has no real root.
    pub absent: Vec<f64>,
}

/// Real roots of `a x² + b x + c`, ascending, double roots once.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-12 * scale {
        if b.abs() <= 1e-12 * scale {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    let tol = 1e-12 * (b * b).max((4.0 * a * c).abs());
    if disc < -tol {
        return Vec::new();
    }
    if disc.abs() <= tol {
        return vec![-b / (2.0 * a)];
    }
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let q = if q == 0.0 { -0.5 * disc.sqrt() } else { q };
    let mut r = vec![q / a, c / q];
    r.sort_by(f64::total_cmp);
    r
}

/// λ-roots of one boundary condition at a given ε (second-order forms).
pub fn boundary_lambdas(
    eps: f64,
    branch: Branch,
    curve: CurveKind,
    c: &NormalFormCoefficients,
) -> Vec<f64> {
    let pm = branch.sign();
    let a0 = c.alpha_eps[0].re;
    let (br, bi) = (c.beta_eps[0].re, c.beta_eps[0].im);
    let cd = c_det(c);
    // ᾱ = λ + k with k = ε(αε0R ± βε0R)
    let k = eps * (a0 + pm * br);
    match curve {
        CurveKind::Hopf => vec![-k],
        CurveKind::TraceZero => vec![-eps * (a0 + pm * 3.0 * br)],
        CurveKind::DetZero => {
            // ±4ε(C+βR)(λ + k) + 4ε²(βI² + βR²) = 0
            let lin = pm * 4.0 * eps * (cd + br);
            solve_quadratic(0.0, lin, lin * k + 4.0 * eps * eps * (bi * bi + br * br))
        }
        CurveKind::DiscZero => {
            // (λ + k)(λ + k ∓ 4εC) − 4ε²βI² = 0
            let m = k - pm * 4.0 * eps * cd;
            solve_quadratic(1.0, k + m, k * m - 4.0 * eps * eps * bi * bi)
        }
    }
}

/// Sample all four boundary curves for one branch over the given ε values.
pub fn region_boundaries(
    eps_samples: &[f64],
    branch: Branch,
    c: &NormalFormCoefficients,
) -> Result<Vec<BoundaryCurve>> {
    if eps_samples.iter().any(|e| !e.is_finite() || *e <= 0.0) {
        return Err(Error::Domain("eps samples must be positive and finite".into()));
    }
    let mut eps: Vec<f64> = eps_samples.to_vec();
    eps.sort_by(f64::total_cmp);
    Ok(CurveKind::ALL
        .iter()
        .map(|&curve| {
            let mut points = Vec::new();
            let mut absent = Vec::new();
            for &e in &eps {
                let roots = boundary_lambdas(e, branch, curve, c);
                if roots.is_empty() {
                    absent.push(e);
                }
                points.extend(roots.into_iter().map(|l| (e, l)));
            }
            BoundaryCurve {
                branch,
                curve,
                points,
                absent,
            }
        })
        .collect())
}

/// λ at which the exact transverse trace or determinant of one branch
/// vanishes at fixed ε, located by bisection inside `[lo, hi]`.
pub fn exact_boundary_lambda(
    eps: f64,
    branch: Branch,
    curve: CurveKind,
    c: &NormalFormCoefficients,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let f = |lambda: f64| -> Result<f64> {
        let r = tr_det_disc(&UnfoldingParams { lambda, eps }, branch, c)?;
        Ok(match curve {
            CurveKind::TraceZero => r.exact.tr,
            CurveKind::DetZero => r.exact.det,
            CurveKind::DiscZero => r.exact.disc,
            CurveKind::Hopf => alpha_bar(&UnfoldingParams { lambda, eps }, branch, c),
        })
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa * fb > 0.0 {
        return Err(Error::NotApplicable(format!(
            "{} has no sign change on [{lo}, {hi}]",
            curve.as_str()
        )));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// `ε_BT = −α01R / K⁻_stb`, defined when `K⁻_stb > 0`.
pub fn bautin_estimate(c: &NormalFormCoefficients) -> Result<f64> {
    let k = k_stb(Branch::Minus, c);
    if k <= 0.0 {
        return Err(Error::NotApplicable(format!(
            "K-_stb = {k} is not positive; no Bautin point on the anti-phase branch"
        )));
    }
    Ok(-c.alpha01.re / k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncoupledObject {
    /// `S0` origin, `T0` torus, `S2`/`S3` single-oscillator orbits.
    pub name: &'static str,
    pub s: f64,
    pub d: f64,
    /// Eigenvalues of the `(s, d)` Jacobian, ascending.
    pub exponents: [f64; 2],
    pub stable: bool,
}

/// Invariant objects of the uncoupled reduced system and their exponents.
pub fn uncoupled_catalogue(lambda: f64, c: &NormalFormCoefficients) -> Vec<UncoupledObject> {
    let ar = c.alpha01.re;
    let make = |name, s: f64, d: f64| {
        // [[A, B], [B, A]] has eigenvalues A ± B
        let a = lambda + 3.0 * ar / 4.0 * (s * s + d * d);
        let b = ar / 4.0 * 6.0 * d * s;
        let mut ex = [a - b, a + b];
        ex.sort_by(f64::total_cmp);
        UncoupledObject {
            name,
            s,
            d,
            exponents: ex,
            stable: ex[1] < 0.0,
        }
    };
    let mut out = vec![make("S0", 0.0, 0.0)];
    if lambda > 0.0 {
        let t = (-4.0 * lambda / ar).sqrt();
        let h = (-lambda / ar).sqrt();
        out.push(make("T0", t, 0.0));
        out.push(make("S2", h, h));
        out.push(make("S3", h, -h));
    }
    out
}
