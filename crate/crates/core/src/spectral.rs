//! Modified wavenumbers of the combined and prefactored operators.
//!
//! A Fourier mode `u_j = exp(i w j)` is mapped by a first-derivative operator
//! to `(i w'/h) u_j` and by a second-derivative operator to `-(w''^2/h^2) u_j`.
//! The exact values are `w' = w` and `w''^2 = w^2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stencil::CombinedStencil;
use crate::weights::{Direction, PrefactoredWeights};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolSample {
    pub w: f64,
    pub re_wp: f64,
    pub im_wp: f64,
    pub re_wpp2: f64,
    pub im_wpp2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Ccd6,
    Ccd8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    First,
    Second,
}

/// Closed-form symbols as published for the two combined schemes.
///
/// For `Ccd6` the second kind is `w''^2`. For `Ccd8` the second kind is the
/// published expression taken literally; it is nonzero at `w = 0` and is not a
/// valid second-derivative symbol.
pub fn printed_symbol(scheme: Scheme, kind: SymbolKind, w: f64) -> f64 {
    let (c1, c2, c3) = (w.cos(), (2.0 * w).cos(), (3.0 * w).cos());
    match (scheme, kind) {
        (Scheme::Ccd6, SymbolKind::First) => 9.0 * w.sin() * (4.0 + c1) / (24.0 + 20.0 * c1 + c2),
        (Scheme::Ccd6, SymbolKind::Second) => (81.0 - 48.0 * c1 - 33.0 * c2) / (48.0 + 40.0 * c1 + 2.0 * c2),
        (Scheme::Ccd8, SymbolKind::First) => {
            w.sin() * (293.0 + 126.0 * c1 + c2) / (6.0 * (34.0 + 33.0 * c1 + 3.0 * c2))
        }
        (Scheme::Ccd8, SymbolKind::Second) => {
            (1730.0 - 675.0 * c1 - 10870.0 * c2 - 29.0 * c3) / (36.0 * (34.0 + 33.0 * c1 + 3.0 * c2))
        }
    }
}

/// Symbol of a combined stencil, obtained by substituting a Fourier mode into
/// both rows and solving the resulting 2x2 complex system for `(w', w''^2)`.
pub fn combined_symbol_oracle(st: &CombinedStencil, w: f64) -> Result<SymbolSample> {
    let i = Complex64::i();
    let (s, c) = w.sin_cos();
    let z = Complex64::from_polar(1.0, w);
    let poly = |coef: &dyn Fn(i32) -> f64| (-2..=2).map(|k| coef(k) * z.powi(k)).sum::<Complex64>();
    let r1 = poly(&|k| st.first_rhs(k));
    let r2 = poly(&|k| st.second_rhs(k));

    let a11 = i * (1.0 + 2.0 * st.alpha1 * c);
    let a12 = -2.0 * i * st.gamma1 * s;
    let a21 = Complex64::new(-2.0 * st.alpha2 * s, 0.0);
    let a22 = Complex64::new(-(1.0 + 2.0 * st.gamma2 * c), 0.0);
    let det = a11 * a22 - a12 * a21;
    let scale = (a11.norm() + a12.norm()) * (a21.norm() + a22.norm());
    if !(det.norm() > 1e-12 * scale) {
        return Err(Error::SingularSymbol { w, det: det.norm() / scale });
    }
    let wp = (r1 * a22 - a12 * r2) / det;
    let wpp2 = (a11 * r2 - a21 * r1) / det;
    Ok(SymbolSample { w, re_wp: wp.re, im_wp: wp.im, re_wpp2: wpp2.re, im_wpp2: wpp2.im })
}

/// Solves a 4x4 system by row equilibration and partial pivoting. Returns the
/// solution and the determinant of the equilibrated matrix.
fn solve4(mut a: [[f64; 4]; 4], mut r: [f64; 4]) -> ([f64; 4], f64) {
    for (row, rhs) in a.iter_mut().zip(r.iter_mut()) {
        let m = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return ([f64::NAN; 4], 0.0);
        }
        row.iter_mut().for_each(|v| *v /= m);
        *rhs /= m;
    }
    let mut det = 1.0;
    for col in 0..4 {
        let p = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        if p != col {
            a.swap(p, col);
            r.swap(p, col);
            det = -det;
        }
        let piv = a[col][col];
        det *= piv;
        if piv == 0.0 {
            return ([f64::NAN; 4], 0.0);
        }
        for row in col + 1..4 {
            let f = a[row][col] / piv;
            let pivot_row = a[col];
            for (x, p) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *x -= f * p;
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let tail: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (r[row] - tail) / a[row][row];
    }
    (x, det)
}

/// Singularity threshold on the equilibrated 4x4 determinant.
pub const SYMBOL_DET_EPS: f64 = 1e-12;

/// Symbol of a biased operator pair from the real 4x4 form of its Fourier
/// transform. Unknowns are `(Re w', Im w', Re w''^2, Im w''^2)`.
pub fn prefactored_symbol(wts: &PrefactoredWeights, w: f64) -> Result<SymbolSample> {
    if !(0.0..=PI).contains(&w) {
        return Err(Error::WavenumberOutOfRange { w, domain: "[0, pi]" });
    }
    let c = w.cos();
    // The backward operator couples to i-1, which conjugates the shift factor.
    let s = match wts.direction {
        Direction::Forward => w.sin(),
        Direction::Backward => -w.sin(),
    };
    let (b1, t1, b2, t2) = (wts.beta_i, wts.theta_i, wts.beta_ii, wts.theta_ii);
    let a = [
        [-b1 * s, -1.0 - b1 * c, -t1 * c, t1 * s],
        [1.0 + b1 * c, -b1 * s, -t1 * s, -t1 * c],
        [-b2 * s, -b2 * c, -1.0 - t2 * c, t2 * s],
        [b2 * c, -b2 * s, -t2 * s, -1.0 - t2 * c],
    ];
    let sin = w.sin();
    let r = [
        (wts.c_i + wts.a_i) * c + wts.b_i,
        (wts.c_i - wts.a_i) * sin,
        (wts.c_ii + wts.a_ii) * c + wts.b_ii,
        (wts.c_ii - wts.a_ii) * sin,
    ];
    let (x, det) = solve4(a, r);
    if !(det.abs() > SYMBOL_DET_EPS) {
        return Err(Error::SingularSymbol { w, det });
    }
    Ok(SymbolSample { w, re_wp: x[0], im_wp: x[1], re_wpp2: x[2], im_wpp2: x[3] })
}

/// `n` Chebyshev-distributed points strictly inside `(0, pi)`.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| 0.5 * PI * (1.0 - ((j as f64 + 0.5) * PI / n as f64).cos())).collect()
}

/// `n` cell-centred uniform points strictly inside `(0, pi)`.
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * PI / n as f64).collect()
}

/// Default number of samples for symbol fits and comparisons.
pub const SYMBOL_SAMPLES: usize = 64;

/// Denominator normalisation: `g1 + g2 + g3`.
pub const DENOMINATOR_SUM: f64 = 70.0 / 36.0;

/// Real parts of a prefactored symbol written as
///
/// ```text
/// Re w'   = sin w (f1 + f2 cos w + f3 cos 2w)             / (g1 + g2 cos w + g3 cos 2w)
/// Re w''^2 = (F1 + F2 cos w + F3 cos 2w + F4 cos 3w)      / (g1 + g2 cos w + g3 cos 2w)
/// ```
///
/// normalised so that `g1 + g2 + g3 = 70/36`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalSymbolForm {
    pub f_first: [f64; 3],
    pub g: [f64; 3],
    pub f_second: [f64; 4],
    /// Ratio of `g` to the expansion of `|1 + B e^{iw} + C e^{2iw}|^2` that
    /// arises directly from the weights (`B = beta_i + theta_ii`,
    /// `C = beta_i theta_ii - theta_i beta_ii`). Equal to one only when the
    /// normalised denominator coincides with the unnormalised one.
    pub scale: f64,
}

impl RationalSymbolForm {
    pub fn denominator(&self, w: f64) -> f64 {
        self.g[0] + self.g[1] * w.cos() + self.g[2] * (2.0 * w).cos()
    }

    pub fn first(&self, w: f64) -> f64 {
        let f = self.f_first;
        w.sin() * (f[0] + f[1] * w.cos() + f[2] * (2.0 * w).cos()) / self.denominator(w)
    }

    pub fn second(&self, w: f64) -> f64 {
        let f = self.f_second;
        let num = f[0] + f[1] * w.cos() + f[2] * (2.0 * w).cos() + f[3] * (3.0 * w).cos();
        num / self.denominator(w)
    }
}

/// Coefficients `(1, cos w, cos 2w)` of `|1 + B z + C z^2|^2`, `z = e^{iw}`.
pub fn natural_denominator(wts: &PrefactoredWeights) -> [f64; 3] {
    let b = wts.beta_i + wts.theta_ii;
    let c = wts.beta_i * wts.theta_ii - wts.theta_i * wts.beta_ii;
    [1.0 + b * b + c * c, 2.0 * b * (1.0 + c), 2.0 * c]
}

/// Smallest accepted ratio between the second-smallest and largest singular
/// values of the homogeneous fit.
const FIT_GAP_EPS: f64 = 1e-9;

/// Recovers the rational form of a prefactored symbol by sampling it and
/// finding the null vector of the linearised fit.
pub fn extract_rational_form(wts: &PrefactoredWeights) -> Result<RationalSymbolForm> {
    let grid = chebyshev_grid(SYMBOL_SAMPLES);
    let samples = grid.iter().map(|&w| prefactored_symbol(wts, w)).collect::<Result<Vec<_>>>()?;

    // Unknown layout: f_first (0..3), f_second (3..7), g (7..10).
    let mut m = DMatrix::<f64>::zeros(2 * grid.len(), 10);
    for (row, smp) in samples.iter().enumerate() {
        let w = smp.w;
        let cos = [1.0, w.cos(), (2.0 * w).cos(), (3.0 * w).cos()];
        for k in 0..3 {
            m[(2 * row, k)] = w.sin() * cos[k];
            m[(2 * row, 7 + k)] = -smp.re_wp * cos[k];
            m[(2 * row + 1, 7 + k)] = -smp.re_wpp2 * cos[k];
        }
        for k in 0..4 {
            m[(2 * row + 1, 3 + k)] = cos[k];
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let largest = svd.singular_values[order[order.len() - 1]];
    let gap = svd.singular_values[order[1]] / largest;
    if !(largest > 0.0) || !(gap > FIT_GAP_EPS) {
        return Err(Error::DegenerateFit { gap: if largest > 0.0 { gap } else { 0.0 } });
    }
    let null = v_t.row(order[0]);
    let gsum = null[7] + null[8] + null[9];
    if !(gsum.abs() > FIT_GAP_EPS) {
        return Err(Error::DegenerateFit { gap: gsum.abs() });
    }
    let k = DENOMINATOR_SUM / gsum;
    let form_g = [null[7] * k, null[8] * k, null[9] * k];
    let natural = natural_denominator(wts);
    let form = RationalSymbolForm {
        f_first: [null[0] * k, null[1] * k, null[2] * k],
        f_second: [null[3] * k, null[4] * k, null[5] * k, null[6] * k],
        g: form_g,
        scale: (form_g[0] + form_g[1] + form_g[2]) / (natural[0] + natural[1] + natural[2]),
    };

    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.re_wp.abs()).max(s.re_wpp2.abs()));
    let misfit = samples
        .iter()
        .fold(0.0f64, |m, s| m.max((form.first(s.w) - s.re_wp).abs()).max((form.second(s.w) - s.re_wpp2).abs()))
        / peak.max(f64::MIN_POSITIVE);
    if misfit > 1e-9 {
        return Err(Error::PoorFit { misfit });
    }
    Ok(form)
}
