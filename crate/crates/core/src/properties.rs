//! Property suites over random coefficients and states. The checks are
//! shared with the acceptance binary.

#[path = "../tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn swap(c in coefficients(), p in params(), x in state()) {
        swap_equivariance(c, p, x)?;
    }

    #[test]
    fn rotation(c in coefficients(), p in params(), x in state(), th in -PI..PI) {
        rotation_equivariance(c, p, x, th)?;
    }

    #[test]
    fn charts(c in coefficients(), p in params(), x in state()) {
        charts_agree(c, p, x)?;
    }

    #[test]
    fn block_jacobian(c in coefficients(), p in params(), s in 0.2..1.5f64, plus in any::<bool>()) {
        jacobian_entries_match_differences(c, p, s, plus)?;
    }

    #[test]
    fn wc_swap(lambda in 2.5..3.5f64, eps in 0.0..1.0f64, b_sp in -0.1..0.1f64, x in prop::array::uniform4(-1.0..1.0f64)) {
        wc_swap_equivariance(lambda, eps, b_sp, x)?;
    }

    #[test]
    fn catalogue(lambda in 0.01..1.0f64, ar in -3.0..-0.1f64) {
        catalogue_limit_values(lambda, ar)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn homological(b_sp in -0.05..0.05f64, eps in 0.0..0.05f64) {
        homological_residuals_are_small(b_sp, eps)?;
    }

    #[test]
    fn uncoupled_floquet(lambda in 0.02..0.2f64, ar in -2.0..-0.5f64, ai in -1.0..1.0f64) {
        uncoupled_floquet_matches_closed_form(lambda, ar, ai)?;
    }

    #[test]
    fn radial_ode(lambda in -0.5..0.5f64, ar in -2.0..-0.2f64, r0 in 0.05..1.0f64) {
        radial_ode_matches_closed_form(lambda, ar, r0)?;
    }
}
