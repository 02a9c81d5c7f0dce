//! Global solve of the coupled compact system for all nodes at once.

use nalgebra::{DMatrix, DVector};

use crate::block::{Block, BlockTridiagonal, Pair};
use crate::error::{Error, Result};
use crate::grid::{DerivativePair, GridFunction};
use crate::stencil::CombinedStencil;

/// How the rows that would reach past the ends of the grid are closed.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryMode {
    /// Known `(first, second)` derivatives at the `half_width` nodes at each
    /// end. `left[j]` belongs to node `j`, `right[j]` to node `N - half_width + j`.
    Exact { left: Vec<(f64, f64)>, right: Vec<(f64, f64)> },
    /// The grid holds one period; node `N` is node `0`.
    Periodic,
}

impl BoundaryMode {
    /// Exact boundary data taken from analytic derivatives.
    pub fn exact_from(
        st: &CombinedStencil,
        g: &GridFunction,
        du: impl Fn(f64) -> f64,
        d2u: impl Fn(f64) -> f64,
    ) -> Self {
        let w = st.half_width();
        let n = g.len();
        let at = |i: usize| (du(g.x(i)), d2u(g.x(i)));
        BoundaryMode::Exact { left: (0..w).map(at).collect(), right: (n - w..n).map(at).collect() }
    }
}

/// Largest grid accepted by [`solve_combined_dense`].
pub const DENSE_MAX_NODES: usize = 64;

fn check_boundary(st: &CombinedStencil, g: &GridFunction, boundary: &BoundaryMode) -> Result<()> {
    let w = st.half_width();
    if g.len() < 2 * w + 1 {
        return Err(Error::GridTooSmall { min: 2 * w + 1, got: g.len() });
    }
    if let BoundaryMode::Exact { left, right } = boundary {
        for (what, got) in [("left boundary data", left.len()), ("right boundary data", right.len())] {
            if got != w {
                return Err(Error::LengthMismatch { what, got, expected: w });
            }
        }
    }
    Ok(())
}

/// Right-hand sides of both rows at node `i`, scaled by `h` and `h^2`.
fn scaled_rhs(st: &CombinedStencil, u: &[f64], i: usize, periodic: bool) -> Pair {
    let n = u.len() as isize;
    let w = st.half_width() as i32;
    let val = |k: i32| {
        let j = i as isize + k as isize;
        if periodic {
            u[j.rem_euclid(n) as usize]
        } else {
            u[j as usize]
        }
    };
    let mut first = 0.0;
    let mut second = 0.0;
    for k in -w..=w {
        let uk = val(k);
        first += st.first_rhs(k) * uk;
        second += st.second_rhs(k) * uk;
    }
    Pair::new(first, second)
}

/// Solves the coupled compact system for first and second derivatives.
///
/// Unknowns are carried as `(h D, h^2 D2)` so that every block entry is a
/// dimensionless stencil coefficient.
pub fn solve_combined(st: &CombinedStencil, g: &GridFunction, boundary: &BoundaryMode) -> Result<DerivativePair> {
    check_boundary(st, g, boundary)?;
    let n = g.len();
    let h = g.h();
    let u = g.values();
    let lower = Block::new(st.alpha1, -st.gamma1, -st.alpha2, st.gamma2);
    let upper = Block::new(st.alpha1, st.gamma1, st.alpha2, st.gamma2);

    let scaled = match boundary {
        BoundaryMode::Periodic => {
            let sys =
                BlockTridiagonal { lower: vec![lower; n], diag: vec![Block::identity(); n], upper: vec![upper; n] };
            let rhs: Vec<Pair> = (0..n).map(|i| scaled_rhs(st, u, i, true)).collect();
            sys.solve_cyclic(&rhs)?
        }
        BoundaryMode::Exact { left, right } => {
            let w = st.half_width();
            let known = |&(d1, d2): &(f64, f64)| Pair::new(h * d1, h * h * d2);
            let m = n - 2 * w;
            let sys =
                BlockTridiagonal { lower: vec![lower; m], diag: vec![Block::identity(); m], upper: vec![upper; m] };
            let mut rhs: Vec<Pair> = (w..n - w).map(|i| scaled_rhs(st, u, i, false)).collect();
            rhs[0] -= lower * known(&left[w - 1]);
            rhs[m - 1] -= upper * known(&right[0]);
            let interior = sys.solve(&rhs)?;
            left.iter().map(known).chain(interior).chain(right.iter().map(known)).collect()
        }
    };

    Ok(DerivativePair {
        first: scaled.iter().map(|p| p[0] / h).collect(),
        second: scaled.iter().map(|p| p[1] / (h * h)).collect(),
    })
}

/// Reference solve: assembles the full `2N x 2N` system in physical units and
/// factorises it densely. Intended for checking [`solve_combined`] on small grids.
pub fn solve_combined_dense(st: &CombinedStencil, g: &GridFunction, boundary: &BoundaryMode) -> Result<DerivativePair> {
    check_boundary(st, g, boundary)?;
    let n = g.len();
    if n > DENSE_MAX_NODES {
        return Err(Error::InvalidArgument(format!(
            "dense reference solve is limited to {DENSE_MAX_NODES} nodes, got {n}"
        )));
    }
    let h = g.h();
    let u = g.values();
    let w = st.half_width();
    let periodic = matches!(boundary, BoundaryMode::Periodic);
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let mut b = DVector::<f64>::zeros(2 * n);
    let d = |i: usize| 2 * i;
    let d2 = |i: usize| 2 * i + 1;

    for i in 0..n {
        if let BoundaryMode::Exact { left, right } = boundary {
            let given = if i < w {
                Some(left[i])
            } else if i >= n - w {
                Some(right[i - (n - w)])
            } else {
                None
            };
            if let Some((v1, v2)) = given {
                a[(d(i), d(i))] = 1.0;
                b[d(i)] = v1;
                a[(d2(i), d2(i))] = 1.0;
                b[d2(i)] = v2;
                continue;
            }
        }
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        a[(d(i), d(i))] += 1.0;
        a[(d(i), d(ip))] += st.alpha1;
        a[(d(i), d(im))] += st.alpha1;
        a[(d(i), d2(ip))] += st.gamma1 * h;
        a[(d(i), d2(im))] -= st.gamma1 * h;

        a[(d2(i), d2(i))] += 1.0;
        a[(d2(i), d(ip))] += st.alpha2 / h;
        a[(d2(i), d(im))] -= st.alpha2 / h;
        a[(d2(i), d2(ip))] += st.gamma2;
        a[(d2(i), d2(im))] += st.gamma2;

        let r = scaled_rhs(st, u, i, periodic);
        b[d(i)] = r[0] / h;
        b[d2(i)] = r[1] / (h * h);
    }

    let x = a.lu().solve(&b).ok_or(Error::SingularPivot { index: 0, det: 0.0 })?;
    Ok(DerivativePair { first: (0..n).map(|i| x[d(i)]).collect(), second: (0..n).map(|i| x[d2(i)]).collect() })
}
