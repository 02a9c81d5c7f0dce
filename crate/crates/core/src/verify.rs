//! Convergence studies, dispersion curves and forward/backward symmetry.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::combined::{solve_combined, BoundaryMode};
use crate::error::{Error, Result};
use crate::fmt::sig;
use crate::grid::{DerivativePair, GridFunction};
use crate::spectral::{combined_symbol_oracle, midpoint_grid, prefactored_symbol, printed_symbol, Scheme, SymbolKind};
use crate::stencil::{build_ccd6, build_ccd8, CombinedStencil};
use crate::sweep::{consistent_options, differentiate};
use crate::weights::PrefactoredWeights;

/// The stencil used for accuracy work: the eighth-order scheme is always the
/// constant-annihilating variant.
pub fn scheme_stencil(scheme: Scheme) -> CombinedStencil {
    match scheme {
        Scheme::Ccd6 => build_ccd6(),
        Scheme::Ccd8 => build_ccd8(true),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    /// `sin x` on `[0, 2 pi]`.
    Sin,
    /// `exp x` on `[0, 1]`.
    Exp,
    /// `exp(-25 (x - 1/2)^2)` on `[0, 1]`.
    Gauss,
    /// `1` on `[0, 1]`.
    Constant,
}

impl TestFunction {
    pub fn domain(self) -> (f64, f64) {
        match self {
            TestFunction::Sin => (0.0, 2.0 * PI),
            _ => (0.0, 1.0),
        }
    }

    pub fn value(self, x: f64) -> f64 {
        self.derivatives(x, 0)[0]
    }

    /// `[u(x), u'(x), ..., u^(m)(x)]`.
    pub fn derivatives(self, x: f64, m: usize) -> Vec<f64> {
        match self {
            TestFunction::Sin => (0..=m)
                .map(|k| match k % 4 {
                    0 => x.sin(),
                    1 => x.cos(),
                    2 => -x.sin(),
                    _ => -x.cos(),
                })
                .collect(),
            TestFunction::Exp => vec![x.exp(); m + 1],
            TestFunction::Gauss => {
                // d^k/dx^k exp(-a t^2) = (-sqrt a)^k H_k(sqrt a t) exp(-a t^2), a = 25.
                let y = 5.0 * (x - 0.5);
                let g = (-y * y).exp();
                let mut out = Vec::with_capacity(m + 1);
                let (mut h0, mut h1) = (1.0, 2.0 * y);
                let mut scale = 1.0;
                for k in 0..=m {
                    out.push(scale * h0 * g);
                    let h2 = 2.0 * y * h1 - 2.0 * (k + 1) as f64 * h0;
                    (h0, h1) = (h1, h2);
                    scale *= -5.0;
                }
                out
            }
            TestFunction::Constant => {
                let mut out = vec![0.0; m + 1];
                out[0] = 1.0;
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Method<'a> {
    Combined,
    Prefactored { fwd: &'a PrefactoredWeights, bwd: &'a PrefactoredWeights },
}

impl Method<'_> {
    fn name(&self) -> &'static str {
        match self {
            Method::Combined => "combined",
            Method::Prefactored { .. } => "prefactored",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub err_first: f64,
    pub err_second: f64,
}

/// Errors at or below this level count as exact; no slope is fitted.
pub const EXACT_ERROR: f64 = 1e-12;
/// Nodes excluded at each end when measuring prefactored errors.
pub const SWEEP_EXCLUDED: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub method: &'static str,
    pub testfn: TestFunction,
    pub rows: Vec<ConvergenceRow>,
    /// `None` when every error is at or below [`EXACT_ERROR`].
    pub slope_first: Option<f64>,
    pub slope_second: Option<f64>,
}

impl ConvergenceStudy {
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "n,h,err_first,err_second")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.n, sig(r.h, 17), sig(r.err_first, 17), sig(r.err_second, 17))?;
        }
        Ok(())
    }
}

/// Least-squares slope of `log err` against `log h`.
pub fn fit_slope(h: &[f64], err: &[f64]) -> Option<f64> {
    if err.iter().all(|&e| e <= EXACT_ERROR) {
        return None;
    }
    let pts: Vec<(f64, f64)> = h.iter().zip(err).filter(|(_, e)| **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn differentiate_with(
    method: Method<'_>,
    st: &CombinedStencil,
    f: TestFunction,
    g: &GridFunction,
) -> Result<DerivativePair> {
    match method {
        Method::Combined => {
            let bc = BoundaryMode::exact_from(st, g, |x| f.derivatives(x, 1)[1], |x| f.derivatives(x, 2)[2]);
            solve_combined(st, g, &bc)
        }
        Method::Prefactored { fwd, bwd } => {
            let (fo, bo) = consistent_options(fwd, bwd, g, |x, m| f.derivatives(x, m));
            differentiate(fwd, bwd, g, fo, bo)
        }
    }
}

/// Max-norm errors on grids of `n` nodes spanning the test function's domain.
pub fn convergence_study(
    method: Method<'_>,
    scheme: Scheme,
    testfn: TestFunction,
    ns: &[usize],
) -> Result<ConvergenceStudy> {
    if ns.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 grid sizes, got {}", ns.len())));
    }
    if let Some(&n) = ns.iter().find(|&&n| n < 16) {
        return Err(Error::InvalidArgument(format!("grid sizes must be at least 16, got {n}")));
    }
    let st = scheme_stencil(scheme);
    let (a, b) = testfn.domain();
    let skip = match method {
        Method::Combined => 0,
        Method::Prefactored { .. } => SWEEP_EXCLUDED,
    };
    let rows: Vec<ConvergenceRow> = ns
        .par_iter()
        .map(|&n| {
            let g = GridFunction::sample(|x| testfn.value(x), a, b, n)?;
            let d = differentiate_with(method, &st, testfn, &g)?;
            let (mut e1, mut e2) = (0.0f64, 0.0f64);
            for i in skip..n - skip {
                let exact = testfn.derivatives(g.x(i), 2);
                e1 = e1.max((d.first[i] - exact[1]).abs());
                e2 = e2.max((d.second[i] - exact[2]).abs());
            }
            Ok(ConvergenceRow { n, h: g.h(), err_first: e1, err_second: e2 })
        })
        .collect::<Result<_>>()?;
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let e1: Vec<f64> = rows.iter().map(|r| r.err_first).collect();
    let e2: Vec<f64> = rows.iter().map(|r| r.err_second).collect();
    Ok(ConvergenceStudy {
        method: method.name(),
        testfn,
        slope_first: fit_slope(&hs, &e1),
        slope_second: fit_slope(&hs, &e2),
        rows,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum DispersionSource<'a> {
    /// Published closed forms.
    Printed,
    /// Direct solve of the combined stencil's symbol.
    Oracle,
    Prefactored(&'a PrefactoredWeights),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionRow {
    pub w: f64,
    pub re_wp: f64,
    pub im_wp: f64,
    pub re_wpp2: f64,
    pub im_wpp2: f64,
    pub exact_wp: f64,
    pub exact_wpp2: f64,
}

impl DispersionRow {
    /// `|w' - w|`.
    pub fn resolution_error(&self) -> f64 {
        (self.re_wp - self.exact_wp).abs()
    }
}

pub const MIN_DISPERSION_SAMPLES: usize = 2;

/// Symbols at `w_j = j pi / n`, `j = 0..n`.
pub fn dispersion_curve(source: DispersionSource<'_>, scheme: Scheme, nsamples: usize) -> Result<Vec<DispersionRow>> {
    if nsamples < MIN_DISPERSION_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_DISPERSION_SAMPLES} samples, got {nsamples}")));
    }
    let st = scheme_stencil(scheme);
    (0..nsamples)
        .map(|j| {
            let w = j as f64 * PI / nsamples as f64;
            let (re_wp, im_wp, re_wpp2, im_wpp2) = match source {
                DispersionSource::Printed => (
                    printed_symbol(scheme, SymbolKind::First, w),
                    0.0,
                    printed_symbol(scheme, SymbolKind::Second, w),
                    0.0,
                ),
                DispersionSource::Oracle => {
                    let s = combined_symbol_oracle(&st, w)?;
                    (s.re_wp, s.im_wp, s.re_wpp2, s.im_wpp2)
                }
                DispersionSource::Prefactored(wts) => {
                    let s = prefactored_symbol(wts, w)?;
                    (s.re_wp, s.im_wp, s.re_wpp2, s.im_wpp2)
                }
            };
            Ok(DispersionRow { w, re_wp, im_wp, re_wpp2, im_wpp2, exact_wp: w, exact_wpp2: w * w })
        })
        .collect()
}

pub fn write_dispersion_csv(rows: &[DispersionRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "w,re_wp,im_wp,re_wpp2,im_wpp2,exact_wp,exact_wpp2")?;
    for r in rows {
        let cols = [r.w, r.re_wp, r.im_wp, r.re_wpp2, r.im_wpp2, r.exact_wp, r.exact_wpp2];
        let line: Vec<String> = cols.iter().map(|&v| sig(v, 15)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub const MIN_SYMMETRY_SAMPLES: usize = 16;

/// `(max |Re F - Re B|, max |Im F + Im B|)` over both symbols at `nsamples`
/// midpoints of `(0, pi)`.
pub fn symmetry_report(fwd: &PrefactoredWeights, bwd: &PrefactoredWeights, nsamples: usize) -> Result<(f64, f64)> {
    if nsamples < MIN_SYMMETRY_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SYMMETRY_SAMPLES} samples, got {nsamples}")));
    }
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for w in midpoint_grid(nsamples) {
        let f = prefactored_symbol(fwd, w)?;
        let b = prefactored_symbol(bwd, w)?;
        re = re.max((f.re_wp - b.re_wp).abs()).max((f.re_wpp2 - b.re_wpp2).abs());
        im = im.max((f.im_wp + b.im_wp).abs()).max((f.im_wpp2 + b.im_wpp2).abs());
    }
    Ok((re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{mirror_backward, Direction};

    #[test]
    fn gauss_derivatives_match_differences() {
        let f = TestFunction::Gauss;
        let x = 0.37;
        let d = f.derivatives(x, 3);
        let h = 1e-5;
        #[allow(clippy::needless_range_loop)]
        for k in 1..=3 {
            let fd = (f.derivatives(x + h, k)[k - 1] - f.derivatives(x - h, k)[k - 1]) / (2.0 * h);
            assert!((fd - d[k]).abs() < 1e-6 * d[k].abs().max(1.0), "{k}");
        }
    }

    #[test]
    fn ccd6_combined_slope() {
        let s = convergence_study(Method::Combined, Scheme::Ccd6, TestFunction::Sin, &[16, 32, 64, 128]).unwrap();
        let p = s.slope_first.unwrap();
        assert!((p - 6.0).abs() < 0.3, "{p}");
    }

    #[test]
    fn constants_skip_the_fit() {
        let s = convergence_study(Method::Combined, Scheme::Ccd6, TestFunction::Constant, &[16, 32, 64]).unwrap();
        assert!(s.rows.iter().all(|r| r.err_first <= EXACT_ERROR && r.err_second <= EXACT_ERROR));
        assert_eq!(s.slope_first, None);
        assert_eq!(s.slope_second, None);
    }

    #[test]
    fn slope_is_scale_invariant() {
        let h = [0.1, 0.05, 0.025];
        let e = [3e-4, 5e-6, 7e-8];
        let a = fit_slope(&h, &e).unwrap();
        let scaled: Vec<f64> = e.iter().map(|v| v * 37.0).collect();
        assert!((a - fit_slope(&h, &scaled).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn study_preconditions() {
        assert!(convergence_study(Method::Combined, Scheme::Ccd6, TestFunction::Sin, &[16, 32]).is_err());
        assert!(convergence_study(Method::Combined, Scheme::Ccd6, TestFunction::Sin, &[8, 16, 32]).is_err());
    }

    #[test]
    fn printed_ccd6_at_quarter_period() {
        let rows = dispersion_curve(DispersionSource::Printed, Scheme::Ccd6, 4).unwrap();
        let r = rows[2];
        assert!((r.w - PI / 2.0).abs() < 1e-15);
        assert!((r.re_wp - 36.0 / 23.0).abs() < 1e-15);
        assert!((r.resolution_error() - 0.005578).abs() < 1e-6);
        let mut buf = Vec::new();
        write_dispersion_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("1.56521739130435"));
    }

    #[test]
    fn printed_ccd8_second_kind_is_nonzero_at_origin() {
        let rows = dispersion_curve(DispersionSource::Printed, Scheme::Ccd8, 16).unwrap();
        assert!((rows[0].re_wpp2 + 3.906349).abs() < 1e-6);
    }

    #[test]
    fn oracle_ccd6_error_grows_with_w() {
        let rows = dispersion_curve(DispersionSource::Oracle, Scheme::Ccd6, 64).unwrap();
        let errs: Vec<f64> = rows.iter().filter(|r| r.w < 0.9 * PI).map(|r| r.resolution_error()).collect();
        assert!(errs.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn symmetry_of_mirrored_pairs() {
        let z = symmetry_report(
            &PrefactoredWeights::zeros(Direction::Forward),
            &PrefactoredWeights::zeros(Direction::Backward),
            16,
        )
        .unwrap();
        assert_eq!(z, (0.0, 0.0));
        let mut f = PrefactoredWeights::zeros(Direction::Forward);
        f.a_i = -1.0;
        f.b_i = 1.0;
        let (re, im) = symmetry_report(&f, &mirror_backward(&f), 32).unwrap();
        assert!(re < 1e-13 && im < 1e-13);
    }
}
