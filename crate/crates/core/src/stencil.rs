//! Coupled first/second-derivative compact stencils on a uniform grid.
//!
//! Each stencil has two rows. The first-derivative row reads
//!
//! ```text
//! D_i + alpha1 (D_{i+1} + D_{i-1}) + gamma1 h (D2_{i+1} - D2_{i-1})
//!     = (1/h) sum_k r1[k-1] (u_{i+k} - u_{i-k})
//! ```
//!
//! and the second-derivative row reads
//!
//! ```text
//! D2_i + (alpha2/h) (D_{i+1} - D_{i-1}) + gamma2 (D2_{i+1} + D2_{i-1})
//!     = (1/h^2) [s0 u_i + s1 (u_{i+1} + u_{i-1}) + s2 (u_{i+2} +/- u_{i-2})]
//! ```
//!
//! where the sign of the wide term is given by [`WideTerm`].

use serde::{Deserialize, Serialize};

/// Parity of the `s2` term on the second-derivative right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WideTerm {
    /// `s2 (u_{i+2} + u_{i-2})`
    Sum,
    /// `s2 (u_{i+2} - u_{i-2})`, as typeset in the published eighth-order row.
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedStencil {
    pub order: u32,
    pub alpha1: f64,
    pub gamma1: f64,
    pub r1: [f64; 2],
    pub alpha2: f64,
    pub gamma2: f64,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub wide: WideTerm,
}

/// Sixth-order three-point scheme (Chu and Fan).
pub fn build_ccd6() -> CombinedStencil {
    CombinedStencil {
        order: 6,
        alpha1: 7.0 / 16.0,
        gamma1: -1.0 / 16.0,
        r1: [15.0 / 16.0, 0.0],
        alpha2: 9.0 / 8.0,
        gamma2: -1.0 / 8.0,
        s0: -6.0,
        s1: 3.0,
        s2: 0.0,
        wide: WideTerm::Sum,
    }
}

/// Eighth-order scheme.
///
/// With `corrected = false` the wide second-derivative term is the literal
/// `-(1/108h^2)(u_{i+2} - u_{i-2})`, which does not annihilate constants.
/// With `corrected = true` it becomes `-(1/108h^2)(u_{i+2} + u_{i-2})`.
pub fn build_ccd8(corrected: bool) -> CombinedStencil {
    CombinedStencil {
        order: 8,
        alpha1: 17.0 / 36.0,
        gamma1: -1.0 / 12.0,
        r1: [107.0 / 108.0, -1.0 / 108.0],
        alpha2: 23.0 / 18.0,
        gamma2: -1.0 / 6.0,
        s0: -13.0 / 2.0,
        s1: 88.0 / 27.0,
        s2: -1.0 / 108.0,
        wide: if corrected { WideTerm::Sum } else { WideTerm::Difference },
    }
}

impl CombinedStencil {
    /// Number of neighbours on each side referenced by the right-hand side.
    pub fn half_width(&self) -> usize {
        if self.r1[1] != 0.0 || self.s2 != 0.0 {
            2
        } else {
            1
        }
    }

    /// Coefficient of `u_{i+k}` (times `1/h`) in the first-derivative row.
    pub fn first_rhs(&self, k: i32) -> f64 {
        match k {
            1 | 2 => self.r1[k as usize - 1],
            -1 | -2 => -self.r1[(-k) as usize - 1],
            _ => 0.0,
        }
    }

    /// Coefficient of `u_{i+k}` (times `1/h^2`) in the second-derivative row.
    pub fn second_rhs(&self, k: i32) -> f64 {
        match k {
            0 => self.s0,
            1 | -1 => self.s1,
            2 => self.s2,
            -2 => match self.wide {
                WideTerm::Sum => self.s2,
                WideTerm::Difference => -self.s2,
            },
            _ => 0.0,
        }
    }

    /// Sum of the second-row right-hand-side coefficients. Zero iff the row
    /// maps constants to zero.
    pub fn constant_defect(&self) -> f64 {
        (-2..=2).map(|k| self.second_rhs(k)).sum()
    }
}

/// Row residuals (LHS - RHS) with exact values substituted, together with the
/// sum of absolute term magnitudes of each row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowResidual {
    pub first: f64,
    pub second: f64,
    pub first_scale: f64,
    pub second_scale: f64,
}

pub fn row_residual(
    st: &CombinedStencil,
    u: &dyn Fn(f64) -> f64,
    du: &dyn Fn(f64) -> f64,
    d2u: &dyn Fn(f64) -> f64,
    x: f64,
    h: f64,
) -> RowResidual {
    let at = |k: i32| x + k as f64 * h;

    let mut first = [0.0; 9];
    first[0] = du(x);
    first[1] = st.alpha1 * du(at(1));
    first[2] = st.alpha1 * du(at(-1));
    first[3] = st.gamma1 * h * d2u(at(1));
    first[4] = -st.gamma1 * h * d2u(at(-1));
    let mut n = 5;
    for k in [-2, -1, 1, 2] {
        let c = st.first_rhs(k);
        if c != 0.0 {
            first[n] = -c * u(at(k)) / h;
            n += 1;
        }
    }
    let first = &first[..n];

    let mut second = [0.0; 10];
    second[0] = d2u(x);
    second[1] = st.alpha2 / h * du(at(1));
    second[2] = -st.alpha2 / h * du(at(-1));
    second[3] = st.gamma2 * d2u(at(1));
    second[4] = st.gamma2 * d2u(at(-1));
    let mut m = 5;
    for k in -2..=2 {
        let c = st.second_rhs(k);
        if c != 0.0 {
            second[m] = -c * u(at(k)) / (h * h);
            m += 1;
        }
    }
    let second = &second[..m];

    RowResidual {
        first: first.iter().sum(),
        second: second.iter().sum(),
        first_scale: first.iter().map(|t| t.abs()).sum(),
        second_scale: second.iter().map(|t| t.abs()).sum(),
    }
}

/// `(LHS - RHS)` of both rows at `x` for a function with known derivatives.
pub fn stencil_residual(
    st: &CombinedStencil,
    u: &dyn Fn(f64) -> f64,
    du: &dyn Fn(f64) -> f64,
    d2u: &dyn Fn(f64) -> f64,
    x: f64,
    h: f64,
) -> (f64, f64) {
    let r = row_residual(st, u, du, d2u, x, h);
    (r.first, r.second)
}
