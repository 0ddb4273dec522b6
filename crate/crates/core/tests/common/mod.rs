//! Shared strategies and property checks for the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use hopfduet_core::analysis::{jacobian_entries, uncoupled_catalogue, Branch};
use hopfduet_core::dynamics::{find_periodic_orbit, integrate, IntegratorConfig, OrbitOptions, System};
use hopfduet_core::extract::{solve_homological, taylor_expand, Normalization};
use hopfduet_core::nf::{
    eval_cartesian, eval_polar, eval_reduced, polar_to_reduced, CartesianState, NormalFormCoefficients,
    ReducedState, UnfoldingParams,
};
use hopfduet_core::wc::{eval_wc_coupled, wc_hopf_lambda, WcState, WilsonCowanParams};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = Result<(), TestCaseError>;

fn cplx(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

pub fn coefficients() -> impl Strategy<Value = NormalFormCoefficients> {
    (
        0.5..2.0f64,
        -2.0..-0.1f64,
        -1.0..1.0f64,
        prop::array::uniform4(cplx(1.0)),
        prop::array::uniform4(cplx(1.0)),
    )
        .prop_map(|(w, ar, ai, a, b)| NormalFormCoefficients::new(w, Complex64::new(ar, ai), a, b).unwrap())
}

pub fn params() -> impl Strategy<Value = UnfoldingParams> {
    (-0.5..0.5f64, 0.0..1.0f64).prop_map(|(lambda, eps)| UnfoldingParams { lambda, eps })
}

/// A state with both amplitudes in `[0.1, 1]`.
pub fn state() -> impl Strategy<Value = CartesianState> {
    (0.1..1.0f64, 0.1..1.0f64, -PI..PI, -PI..PI)
        .prop_map(|(r1, r2, a, b)| CartesianState::new(Complex64::from_polar(r1, a), Complex64::from_polar(r2, b)))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn swap_equivariance(c: NormalFormCoefficients, p: UnfoldingParams, x: CartesianState) -> Check {
    let f = eval_cartesian(&x, &p, &c).unwrap();
    let g = eval_cartesian(&x.swapped(), &p, &c).unwrap();
    prop_assert!((f.dz1 - g.dz2).norm() <= 1e-12 * (1.0 + f.dz1.norm()));
    prop_assert!((f.dz2 - g.dz1).norm() <= 1e-12 * (1.0 + f.dz2.norm()));
    Ok(())
}

pub fn rotation_equivariance(c: NormalFormCoefficients, p: UnfoldingParams, x: CartesianState, th: f64) -> Check {
    let rot = Complex64::from_polar(1.0, th);
    let f = eval_cartesian(&x, &p, &c).unwrap();
    let g = eval_cartesian(&CartesianState::new(x.z1 * rot, x.z2 * rot), &p, &c).unwrap();
    prop_assert!((f.dz1 * rot - g.dz1).norm() <= 1e-12 * (1.0 + f.dz1.norm()));
    prop_assert!((f.dz2 * rot - g.dz2).norm() <= 1e-12 * (1.0 + f.dz2.norm()));
    Ok(())
}

pub fn charts_agree(c: NormalFormCoefficients, p: UnfoldingParams, x: CartesianState) -> Check {
    let f = eval_cartesian(&x, &p, &c).unwrap();
    let pol = x.to_polar();
    let g = eval_polar(&pol, &p, &c).unwrap();
    let radial = |z: Complex64, dz: Complex64| (z.conj() * dz).re / z.norm();
    let angular = |z: Complex64, dz: Complex64| (z.conj() * dz).im / z.norm_sqr();
    prop_assert!(close(radial(x.z1, f.dz1), g.dr1, 1e-10));
    prop_assert!(close(radial(x.z2, f.dz2), g.dr2, 1e-10));
    prop_assert!(close(angular(x.z1, f.dz1), g.dphi1, 1e-10));
    prop_assert!(close(angular(x.z2, f.dz2), g.dphi2, 1e-10));
    let red = polar_to_reduced(&pol);
    let h = eval_reduced(&red, &p, &c).unwrap();
    prop_assert!(close(h.ds, g.dr1 + g.dr2, 1e-10));
    prop_assert!(close(h.dd, g.dr1 - g.dr2, 1e-10));
    prop_assert!(close(h.ddphi, g.dphi2 - g.dphi1, 1e-10));
    Ok(())
}

pub fn jacobian_entries_match_differences(c: NormalFormCoefficients, p: UnfoldingParams, s: f64, plus: bool) -> Check {
    let branch = if plus { Branch::Plus } else { Branch::Minus };
    let e = jacobian_entries(s, &p, branch, &c);
    let at = |ds: f64, dd: f64, dp: f64| {
        eval_reduced(&ReducedState { s: s + ds, d: dd, dphi: branch.dphi() + dp }, &p, &c).unwrap()
    };
    let h = 1e-5;
    let fd = |k: usize| {
        let (a, b) = match k {
            0 => (at(h, 0.0, 0.0), at(-h, 0.0, 0.0)),
            1 => (at(0.0, h, 0.0), at(0.0, -h, 0.0)),
            _ => (at(0.0, 0.0, h), at(0.0, 0.0, -h)),
        };
        [(a.ds - b.ds) / (2.0 * h), (a.dd - b.dd) / (2.0 * h), (a.ddphi - b.ddphi) / (2.0 * h)]
    };
    let (js, jd, jp) = (fd(0), fd(1), fd(2));
    prop_assert!(close(e.ss, js[0], 1e-6), "ss {} vs {}", e.ss, js[0]);
    prop_assert!(close(e.dd, jd[1], 1e-6), "dd {} vs {}", e.dd, jd[1]);
    prop_assert!(close(e.d_dphi, jp[1], 1e-6), "d_dphi {} vs {}", e.d_dphi, jp[1]);
    prop_assert!(close(e.dphi_d, jd[2], 1e-6), "dphi_d {} vs {}", e.dphi_d, jd[2]);
    prop_assert!(close(e.dphi_dphi, jp[2], 1e-6), "dphi_dphi {} vs {}", e.dphi_dphi, jp[2]);
    // block structure on the symmetric set
    for v in [js[1], js[2], jd[0], jp[0]] {
        prop_assert!(v.abs() <= 1e-6 * (1.0 + e.ss.abs()));
    }
    Ok(())
}

pub fn wc_swap_equivariance(lambda: f64, eps: f64, b_sp: f64, x: [f64; 4]) -> Check {
    let p = WilsonCowanParams::paper_p(lambda, eps, b_sp);
    let s = WcState::from_slice(&x);
    let f = eval_wc_coupled(&s, &p).unwrap();
    let g = eval_wc_coupled(&s.swapped(), &p).unwrap();
    let (a, b) = (f.swapped().to_array(), g.to_array());
    for k in 0..4 {
        prop_assert!((a[k] - b[k]).abs() <= 1e-12 * (1.0 + a[k].abs()));
    }
    Ok(())
}

pub fn catalogue_limit_values(lambda: f64, ar: f64) -> Check {
    let c = NormalFormCoefficients::uncoupled(1.0, Complex64::new(ar, 0.3)).unwrap();
    let cat = uncoupled_catalogue(lambda, &c);
    let r = (-lambda / ar).sqrt();
    let get = |n: &str| cat.iter().find(|o| o.name == n).unwrap().clone();
    let s0 = get("S0");
    prop_assert!(s0.s == 0.0 && s0.exponents == [lambda, lambda] && !s0.stable);
    let t0 = get("T0");
    prop_assert!(close(t0.s, 2.0 * r, 1e-12) && t0.d == 0.0 && t0.stable);
    for e in t0.exponents {
        prop_assert!(close(e, -2.0 * lambda, 1e-12));
    }
    for n in ["S2", "S3"] {
        let o = get(n);
        prop_assert!(close(o.s, r, 1e-12) && close(o.d.abs(), r, 1e-12) && !o.stable);
        prop_assert!(close(o.exponents[0], -2.0 * lambda, 1e-12) && close(o.exponents[1], lambda, 1e-12));
    }
    Ok(())
}

pub fn homological_residuals_are_small(b_sp: f64, eps: f64) -> Check {
    let mut p = WilsonCowanParams::paper_p(3.0, eps, b_sp);
    p.lambda = wc_hopf_lambda(&p).unwrap();
    let tm = taylor_expand(&p, Normalization::UnitExcitatory).unwrap();
    let q = solve_homological(&tm, 1e-8 * tm.mu[0].im.abs()).unwrap();
    prop_assert!(q.max_residual <= 1e-10, "residual {}", q.max_residual);
    Ok(())
}

pub fn uncoupled_floquet_matches_closed_form(lambda: f64, ar: f64, ai: f64) -> Check {
    let c = NormalFormCoefficients::uncoupled(1.0, Complex64::new(ar, ai)).unwrap();
    let sys = System::nf_cartesian(UnfoldingParams { lambda, eps: 0.0 }, c).unwrap();
    let r = (-lambda / ar).sqrt();
    let period = 2.0 * PI / (1.0 + ai * r * r);
    let cfg = IntegratorConfig::default().with_tolerances(1e-11, 1e-13);
    let o = find_periodic_orbit(&sys, &[r, 0.0, r, 0.0], period, 0.0, &cfg, &OrbitOptions::default()).unwrap();
    prop_assert!(close(o.period, period, 1e-8));
    let mut mods: Vec<f64> = o.floquet.iter().map(|m| m.norm()).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    let contract = (-2.0 * lambda * period).exp();
    for (m, want) in mods.iter().zip([1.0, 1.0, contract, contract]) {
        prop_assert!((m - want).abs() <= 1e-5, "{mods:?} vs {contract}");
    }
    Ok(())
}

pub fn radial_ode_matches_closed_form(lambda: f64, ar: f64, r0: f64) -> Check {
    let c = NormalFormCoefficients::uncoupled(1.3, Complex64::new(ar, 0.4)).unwrap();
    let sys = System::nf_cartesian(UnfoldingParams { lambda, eps: 0.0 }, c).unwrap();
    let cfg = IntegratorConfig::default().with_tolerances(1e-12, 1e-14);
    let tr = integrate(&sys, &[r0, 0.0, 0.0, 0.5 * r0], 0.0, 20.0, &cfg).unwrap();
    let exact = |t: f64, r0: f64| {
        // r² = λ r0² e^{2λt} / (λ − αR r0² (e^{2λt} − 1)), with the λ → 0 limit
        let e = (2.0 * lambda * t).exp();
        let den = if lambda.abs() < 1e-12 {
            1.0 - 2.0 * ar * r0 * r0 * t
        } else {
            (lambda - ar * r0 * r0 * (e - 1.0)) / lambda
        };
        (r0 * r0 * e / den).sqrt()
    };
    for k in 0..=20 {
        let t = k as f64;
        let x = tr.interpolate(t);
        let (r1, r2) = (x[0].hypot(x[1]), x[2].hypot(x[3]));
        prop_assert!((r1 - exact(t, r0)).abs() <= 1e-6, "t={t}: {r1} vs {}", exact(t, r0));
        prop_assert!((r2 - exact(t, 0.5 * r0)).abs() <= 1e-6);
    }
    Ok(())
}
