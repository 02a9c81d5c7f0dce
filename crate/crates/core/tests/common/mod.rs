#![allow(dead_code)]

use ccd_prefactored::solver::{newton_solve, NewtonOptions, SpectralSystem};
use ccd_prefactored::{CombinedStencil, Direction, PrefactoredWeights};

/// Admissible sixth-order forward root, from an independent semi-analytic
/// factorisation of the target symbol (about 1e-9 accurate).
pub const CCD6_ROOT: [f64; 10] =
    [0.58113883, -0.0855278366, 0.0, -1.33772234, 1.33772234, 0.769750529, -0.0679718106, 0.0, -3.42234926, 3.42234926];

/// Admissible eighth-order forward root, from an independent least-squares run
/// (about 1e-6 accurate).
pub const CCD8_ROOT: [f64; 10] =
    [0.694873, -0.131382, -0.055556, -1.353133, 1.408689, 0.702281, -0.041976, 0.537037, -3.458075, 2.921038];

/// Newton polish of a reference root against the spectral system.
pub fn polished(st: &CombinedStencil, guess: [f64; 10]) -> PrefactoredWeights {
    let sys = SpectralSystem::standard(st).unwrap();
    let start = PrefactoredWeights::from_array(Direction::Forward, guess);
    let r = newton_solve(&|w: &PrefactoredWeights| sys.residuals(w), &start, NewtonOptions::default()).unwrap();
    assert!(r.converged, "{r:?}");
    r.weights
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
