use ccd_prefactored::solver::{
    jacobian_fd, multistart, residuals_printed, select_root, validate, NewtonOptions, FD_STEP, VALIDATION_TOL,
};
use ccd_prefactored::spectral::midpoint_grid;
use ccd_prefactored::{build_ccd6, build_ccd8, mirror_backward, Direction, PrefactoredWeights};
use proptest::prelude::*;

mod common;
use common::{polished, CCD6_ROOT, CCD8_ROOT};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn printed_jacobian_matches_five_point_differences(x in prop::array::uniform10(-1.0f64..1.0)) {
        let w = PrefactoredWeights::from_array(Direction::Forward, x);
        let j = jacobian_fd(&residuals_printed, &w, FD_STEP).unwrap();
        let h = 1e-3;
        for k in 0..10 {
            let at = |d: f64| {
                let mut y = x;
                y[k] += d;
                residuals_printed(&PrefactoredWeights::from_array(Direction::Forward, y)).unwrap()
            };
            let (p2, p1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
            for i in 0..10 {
                // Exact for polynomials of degree <= 4 in each coordinate.
                let d = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
                prop_assert!((j[(i, k)] - d).abs() <= 1e-6 * d.abs().max(1.0), "row {} col {}", i, k);
            }
        }
    }
}

#[test]
fn roots_validate_on_a_fresh_grid() {
    let fresh = midpoint_grid(128);
    for (st, root) in [(build_ccd6(), CCD6_ROOT), (build_ccd8(true), CCD8_ROOT)] {
        let fwd = polished(&st, root);
        let rep = validate(&fwd, &mirror_backward(&fwd), &st, &fresh).unwrap();
        assert!(rep.passes(VALIDATION_TOL), "{rep:?}");
    }
}

#[test]
fn selection_rejects_unstable_roots() {
    let st = build_ccd8(true);
    let good = polished(&st, CCD8_ROOT);
    // Another root of the same system with an unstable recursion.
    let other = polished(
        &st,
        [1.489223, -0.312281, -0.055556, -2.274228, 2.329784, -1.669243, 0.498095, 0.537037, 0.096812, -0.633849],
    );
    assert!(other.recursion_radius() > 1.0);
    let report = |w: PrefactoredWeights, k| ccd_prefactored::solver::SolveReport {
        weights: w,
        residual_norm: 0.0,
        iterations: 0,
        start_index: k,
        converged: true,
        condition_estimate: 1.0,
    };
    let (pick, checked) = select_root(&[report(other, 0), report(good, 1)], &st, &midpoint_grid(64)).unwrap();
    assert_eq!(pick, Some(1));
    assert!(checked[0].validation.passes(VALIDATION_TOL));
    assert!(!checked[0].accepted());
}

#[test]
fn printed_multistart_is_deterministic_and_reports_best_norm() {
    let opts = NewtonOptions::default();
    let a = multistart(&residuals_printed, 16, 5, opts).unwrap();
    let b = multistart(&residuals_printed, 16, 5, opts).unwrap();
    assert_eq!(a, b);
    assert!(a.best.residual_norm.is_finite());
    if a.roots.is_empty() {
        assert!(!a.best.converged);
    }
}
