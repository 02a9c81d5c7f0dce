//! Explicit application of the biased operators.
//!
//! The forward operator couples node `i` to `i+1`, so it is evaluated from the
//! right end of the grid towards the left; the backward operator runs the other
//! way. Their average is the centered combined operator.

use crate::error::{Error, Result};
use crate::fd::one_sided_derivatives;
use crate::grid::{DerivativePair, GridFunction};
use crate::series::{OperatorSeries, SERIES_ORDER};
use crate::weights::{Direction, PrefactoredWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    /// Use the supplied `d1`, `d2`.
    Exact,
    /// Estimate from one-sided differences of the grid data.
    Biased,
}

/// Starting values of a sweep at its terminal node (node `N-1` for forward,
/// node `0` for backward).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySeed {
    pub mode: SeedMode,
    pub d1: f64,
    pub d2: f64,
}

impl BoundarySeed {
    pub fn exact(d1: f64, d2: f64) -> Self {
        Self { mode: SeedMode::Exact, d1, d2 }
    }

    pub fn biased() -> Self {
        Self { mode: SeedMode::Biased, d1: 0.0, d2: 0.0 }
    }

    /// Exact seed matching the operator's own output at a node where the data
    /// has derivatives `derivs = [u, u', u'', ...]`.
    ///
    /// Each biased operator on its own differs from the true derivative by
    /// low-order terms (the second-derivative output carries an `O(1/h)` multiple
    /// of `u'`) which cancel only in the average. Seeding with plain derivative
    /// values therefore starts a boundary transient of that size.
    pub fn consistent(wts: &PrefactoredWeights, h: f64, derivs: &[f64]) -> Self {
        let (d1, d2) = OperatorSeries::new(wts, SERIES_ORDER).response(h, derivs);
        Self::exact(d1, d2)
    }
}

/// Closure at the node where the right-hand side would need data from outside
/// the grid (node `0` for forward, node `N-1` for backward).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeClosure {
    /// One-sided five-point estimate mapped through the operator response.
    Biased,
    /// Given `(d1, d2)`.
    Exact(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub seed: BoundarySeed,
    pub edge: EdgeClosure,
}

impl From<BoundarySeed> for SweepOptions {
    fn from(seed: BoundarySeed) -> Self {
        Self { seed, edge: EdgeClosure::Biased }
    }
}

/// Derivative orders estimated for biased seeds.
const BIASED_DERIVS: usize = 4;
const BIASED_POINTS: usize = 5;

/// Operator output at `node` estimated from the five nearest nodes on one side.
fn estimated_derivatives(g: &GridFunction, node: usize) -> Vec<f64> {
    let n = g.len();
    let points = BIASED_POINTS.min(n);
    // Nodes extend inward from whichever end is closer.
    let start = if 2 * node < n { node.min(n - points) } else { (node + 1).saturating_sub(points) };
    one_sided_derivatives(g.values(), g.h(), node, start, points, BIASED_DERIVS.min(points - 1))
}

fn biased_value(wts: &PrefactoredWeights, g: &GridFunction, node: usize) -> (f64, f64) {
    OperatorSeries::new(wts, SERIES_ORDER).response(g.h(), &estimated_derivatives(g, node))
}

// Known (u', u'') replace the two lowest estimates.
fn anchored_value(wts: &PrefactoredWeights, g: &GridFunction, node: usize, known: (f64, f64)) -> (f64, f64) {
    let mut derivs = estimated_derivatives(g, node);
    derivs.resize(derivs.len().max(3), 0.0);
    (derivs[1], derivs[2]) = known;
    OperatorSeries::new(wts, SERIES_ORDER).response(g.h(), &derivs)
}

fn check(wts: &PrefactoredWeights, g: &GridFunction, dir: Direction) -> Result<()> {
    wts.expect(dir)?;
    if g.len() < 3 {
        return Err(Error::GridTooSmall { min: 3, got: g.len() });
    }
    Ok(())
}

fn start_value(wts: &PrefactoredWeights, g: &GridFunction, seed: &BoundarySeed, node: usize) -> (f64, f64) {
    match seed.mode {
        SeedMode::Exact => (seed.d1, seed.d2),
        SeedMode::Biased => biased_value(wts, g, node),
    }
}

fn edge_value(wts: &PrefactoredWeights, g: &GridFunction, edge: &EdgeClosure, node: usize) -> (f64, f64) {
    match *edge {
        EdgeClosure::Exact(d1, d2) => (d1, d2),
        EdgeClosure::Biased => biased_value(wts, g, node),
    }
}

/// Right-to-left sweep of the forward operator.
pub fn forward_sweep(
    wts: &PrefactoredWeights,
    g: &GridFunction,
    opts: impl Into<SweepOptions>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check(wts, g, Direction::Forward)?;
    let opts = opts.into();
    let (n, h, u) = (g.len(), g.h(), g.values());
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    (d1[n - 1], d2[n - 1]) = start_value(wts, g, &opts.seed, n - 1);
    for i in (1..n - 1).rev() {
        let r1 = (wts.a_i * u[i - 1] + wts.b_i * u[i] + wts.c_i * u[i + 1]) / h;
        let r2 = (wts.a_ii * u[i - 1] + wts.b_ii * u[i] + wts.c_ii * u[i + 1]) / (h * h);
        d1[i] = r1 - wts.beta_i * d1[i + 1] - wts.theta_i * h * d2[i + 1];
        d2[i] = r2 - wts.beta_ii / h * d1[i + 1] - wts.theta_ii * d2[i + 1];
    }
    (d1[0], d2[0]) = edge_value(wts, g, &opts.edge, 0);
    Ok((d1, d2))
}

/// Left-to-right sweep of the backward operator.
pub fn backward_sweep(
    wts: &PrefactoredWeights,
    g: &GridFunction,
    opts: impl Into<SweepOptions>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check(wts, g, Direction::Backward)?;
    let opts = opts.into();
    let (n, h, u) = (g.len(), g.h(), g.values());
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    (d1[0], d2[0]) = start_value(wts, g, &opts.seed, 0);
    for i in 1..n - 1 {
        let r1 = (wts.a_i * u[i - 1] + wts.b_i * u[i] + wts.c_i * u[i + 1]) / h;
        let r2 = (wts.a_ii * u[i - 1] + wts.b_ii * u[i] + wts.c_ii * u[i + 1]) / (h * h);
        d1[i] = r1 - wts.beta_i * d1[i - 1] - wts.theta_i * h * d2[i - 1];
        d2[i] = r2 - wts.beta_ii / h * d1[i - 1] - wts.theta_ii * d2[i - 1];
    }
    (d1[n - 1], d2[n - 1]) = edge_value(wts, g, &opts.edge, n - 1);
    Ok((d1, d2))
}

/// Average of forward and backward outputs.
pub fn combine(df: &[f64], d2f: &[f64], db: &[f64], d2b: &[f64]) -> Result<DerivativePair> {
    let n = df.len();
    for (what, got) in [("D2F", d2f.len()), ("DB", db.len()), ("D2B", d2b.len())] {
        if got != n {
            return Err(Error::LengthMismatch { what, got, expected: n });
        }
    }
    Ok(DerivativePair {
        first: df.iter().zip(db).map(|(f, b)| 0.5 * (f + b)).collect(),
        second: d2f.iter().zip(d2b).map(|(f, b)| 0.5 * (f + b)).collect(),
    })
}

/// Both sweeps followed by [`combine`].
pub fn differentiate(
    fwd: &PrefactoredWeights,
    bwd: &PrefactoredWeights,
    g: &GridFunction,
    fwd_opts: impl Into<SweepOptions>,
    bwd_opts: impl Into<SweepOptions>,
) -> Result<DerivativePair> {
    let (df, d2f) = forward_sweep(fwd, g, fwd_opts)?;
    let (db, d2b) = backward_sweep(bwd, g, bwd_opts)?;
    combine(&df, &d2f, &db, &d2b)
}

/// Options that seed each sweep, and close its far edge, with the operator's
/// exact response computed from analytic derivatives. `derivs(x, m)` returns
/// `[u(x), u'(x), ..., u^(m)(x)]`.
pub fn consistent_options(
    fwd: &PrefactoredWeights,
    bwd: &PrefactoredWeights,
    g: &GridFunction,
    derivs: impl Fn(f64, usize) -> Vec<f64>,
) -> (SweepOptions, SweepOptions) {
    let n = g.len();
    let h = g.h();
    let at = |wts: &PrefactoredWeights, i: usize| BoundarySeed::consistent(wts, h, &derivs(g.x(i), SERIES_ORDER));
    let f_seed = at(fwd, n - 1);
    let f_edge = at(fwd, 0);
    let b_seed = at(bwd, 0);
    let b_edge = at(bwd, n - 1);
    (
        SweepOptions { seed: f_seed, edge: EdgeClosure::Exact(f_edge.d1, f_edge.d2) },
        SweepOptions { seed: b_seed, edge: EdgeClosure::Exact(b_edge.d1, b_edge.d2) },
    )
}

/// Options for data whose true `(u', u'')` is known at the left and/or right
/// end. A known pair is not used as a raw seed: a single biased operator
/// differs from the true derivative by an O(1/h) odd part that only cancels
/// in the average, so the pair is mapped through the operator response first.
/// Ends without a known pair fall back to one-sided estimates.
pub fn anchored_options(
    fwd: &PrefactoredWeights,
    bwd: &PrefactoredWeights,
    g: &GridFunction,
    left: Option<(f64, f64)>,
    right: Option<(f64, f64)>,
) -> Result<(SweepOptions, SweepOptions)> {
    check(fwd, g, Direction::Forward)?;
    check(bwd, g, Direction::Backward)?;
    let n = g.len();
    let value = |wts: &PrefactoredWeights, node: usize, known: Option<(f64, f64)>| {
        known.map(|k| anchored_value(wts, g, node, k))
    };
    let seed = |v: Option<(f64, f64)>| v.map_or_else(BoundarySeed::biased, |(d1, d2)| BoundarySeed::exact(d1, d2));
    let edge = |v: Option<(f64, f64)>| v.map_or(EdgeClosure::Biased, |(d1, d2)| EdgeClosure::Exact(d1, d2));
    Ok((
        SweepOptions { seed: seed(value(fwd, n - 1, right)), edge: edge(value(fwd, 0, left)) },
        SweepOptions { seed: seed(value(bwd, 0, left)), edge: edge(value(bwd, n - 1, right)) },
    ))
}

/// Empirical decay factor per node of the homogeneous forward recursion,
/// measured by sweeping zero data from the seed `(1, 1)` with `h = 1`.
pub fn sweep_decay_rate(wts: &PrefactoredWeights) -> Result<f64> {
    const N: usize = 64;
    const NEAR: usize = 20;
    const FAR: usize = 40;
    let fwd = PrefactoredWeights { direction: Direction::Forward, ..*wts };
    let g = GridFunction::new(0.0, 1.0, vec![0.0; N])?;
    let opts = SweepOptions { seed: BoundarySeed::exact(1.0, 1.0), edge: EdgeClosure::Exact(0.0, 0.0) };
    let (d1, d2) = forward_sweep(&fwd, &g, opts)?;
    let size = |i: usize| d1[i].abs().max(d2[i].abs());
    let near = size(N - 1 - NEAR);
    let far = size(N - 1 - FAR);
    if near == 0.0 || far == 0.0 {
        return Ok(0.0);
    }
    Ok((far / near).powf(1.0 / (FAR - NEAR) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_pair() -> PrefactoredWeights {
        let mut w = PrefactoredWeights::zeros(Direction::Forward);
        w.a_i = -1.0;
        w.b_i = 1.0;
        w.a_ii = 1.0;
        w.b_ii = -2.0;
        w.c_ii = 1.0;
        w
    }

    #[test]
    fn uncoupled_weights_reduce_to_explicit_differences() {
        let g = GridFunction::sample(|x| x, 0.0, 1.0, 11).unwrap();
        let (d1, d2) = forward_sweep(&explicit_pair(), &g, BoundarySeed::biased()).unwrap();
        for i in 1..10 {
            assert!((d1[i] - 1.0).abs() < 1e-13 && d2[i].abs() < 1e-10);
        }
    }

    #[test]
    fn mirrored_one_sided_backward() {
        let mut w = PrefactoredWeights::zeros(Direction::Backward);
        w.c_i = 1.0;
        w.b_i = -1.0;
        let g = GridFunction::sample(|x| x, 0.0, 1.0, 11).unwrap();
        let (d1, _) = backward_sweep(&w, &g, BoundarySeed::biased()).unwrap();
        for v in d1 {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weights_give_zero() {
        let g = GridFunction::sample(f64::sin, 0.0, 1.0, 9).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            let w = PrefactoredWeights::zeros(dir);
            let opts = SweepOptions { seed: BoundarySeed::exact(0.0, 0.0), edge: EdgeClosure::Exact(0.0, 0.0) };
            let (d1, d2) = match dir {
                Direction::Forward => forward_sweep(&w, &g, opts),
                Direction::Backward => backward_sweep(&w, &g, opts),
            }
            .unwrap();
            assert!(d1.iter().chain(&d2).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn direction_is_checked() {
        let g = GridFunction::sample(f64::sin, 0.0, 1.0, 9).unwrap();
        let w = PrefactoredWeights::zeros(Direction::Backward);
        assert!(matches!(forward_sweep(&w, &g, BoundarySeed::biased()), Err(Error::WrongDirection { .. })));
    }

    #[test]
    fn combine_averages_and_checks_lengths() {
        let d = [1.0, 2.0];
        let e = [0.5, -0.5];
        let plus: Vec<f64> = d.iter().zip(&e).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = d.iter().zip(&e).map(|(a, b)| a - b).collect();
        let out = combine(&plus, &d, &minus, &d).unwrap();
        assert_eq!(out.first, d.to_vec());
        assert_eq!(out.second, d.to_vec());
        assert!(combine(&d, &d, &d, &d[..1]).is_err());
    }

    #[test]
    fn decay_rate_matches_recursion_radius() {
        let mut w = PrefactoredWeights::zeros(Direction::Forward);
        w.beta_i = 0.5;
        w.theta_i = -0.1;
        w.beta_ii = 0.7;
        w.theta_ii = -0.05;
        let rho = sweep_decay_rate(&w).unwrap();
        assert!((rho - w.recursion_radius()).abs() < 1e-3, "{rho} vs {}", w.recursion_radius());
        assert_eq!(sweep_decay_rate(&PrefactoredWeights::zeros(Direction::Forward)).unwrap(), 0.0);
    }
}
