//! Root finding for the forward weights.
//!
//! Two residual maps are provided. [`residuals_printed`] is the closed
//! polynomial system for the eighth-order target exactly as typeset.
//! [`SpectralSystem`] matches the real parts of the forward symbols to a
//! centered target on a wavenumber grid and adds the two constant-annihilation
//! conditions. Either can be handed to [`newton_solve`] or [`multistart`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{chebyshev_grid, combined_symbol_oracle, prefactored_symbol, SYMBOL_SAMPLES};
use crate::stencil::CombinedStencil;
use crate::weights::{mirror_backward, Direction, PrefactoredWeights};

/// Right-hand sides of the printed polynomial system, in equation order.
pub const PRINTED_RHS: [f64; 10] = [
    -293.0 / 216.0,
    -63.0 / 216.0,
    -1.0 / 216.0,
    34.0 / 36.0,
    11.0 / 12.0,
    1.0 / 12.0,
    -1730.0 / 1296.0,
    675.0 / 1296.0,
    10870.0 / 1296.0,
    29.0 / 1296.0,
];

/// `LHS - RHS` of the printed ten-equation system for eighth-order weights.
pub fn residuals_printed(wts: &PrefactoredWeights) -> Result<Vec<f64>> {
    wts.expect(Direction::Forward)?;
    let PrefactoredWeights {
        beta_i: b1,
        theta_i: t1,
        a_i: a1,
        b_i: bb1,
        c_i: c1,
        beta_ii: b2,
        theta_ii: t2,
        a_ii: a2,
        b_ii: bb2,
        c_ii: c2,
        ..
    } = *wts;

    let e31 = b1 * c2 * t1 + a1 + b1 * bb1 - c1 - t1 * a1 * b2 - t1 * c1 * b2 + c2 * t1 * t2 + 2.0 * b1 * a1 * t2
        - t1 * bb1 * b2 * t2
        + a1 * t2 * t2
        + b1 * bb1 * t2 * t2
        - c1 * t2 * t2
        - b1 * t1 * a2
        - t1 * t2 * a2
        + t1 * bb2
        + t1 * t1 * b2 * bb2
        - b1 * t1 * t2 * bb2;
    let e32 = c2 * t1 - t1 * bb1 * b2 + a1 * t2 - c1 * t2 - t1 * a1 * b2 * t2
        + t1 * t1 * b2 * a2
        + b1 * (a1 + bb1 * t2 + a1 * t2 * t2 - t1 * t2 * a2);
    let e33 = -2.0 * a1 * (t1 * b2 - b1 * t2);
    let e34 = 1.0 + b1 * b1 + t1 * t1 * b2 * b2 + 2.0 * b1 * t2 - 2.0 * b1 * t1 * b2 * t2 + t2 * t2 + b1 * b1 * t2 * t2;
    let e35 = 2.0 * (b1 + t2) * (1.0 - t1 * b2 + b1 * t2);
    let e36 = -2.0 * t1 * b2 + 2.0 * b1 * t2;
    let e37 = b1 * c2 - b1 * c2 * t1 * b2 - a1 * b2 - b1 * bb1 * b2 + t1 * c1 * b2 * b2 + c2 * t2 + b1 * b1 * c2 * t2
        - bb1 * b2 * t2
        - b1 * c1 * b2 * t2
        + b1 * a2
        + bb2
        + b1 * b1 * bb2
        + b1 * t2 * bb2;
    let e38 = -bb1 * b2 + t1 * bb1 * b2 * b2 - a1 * b2 * t2 - c1 * b2 * t2
        + c2 * (1.0 + b1 * b1 - t1 * b2 + 2.0 * b1 * t2)
        + a2
        + t2 * bb2
        - b1 * (a1 * b2 + c1 * b2 + bb1 * b2 * t2 - t2 * a2 - 2.0 * bb2 + t1 * b2 * bb2)
        + b1 * b1 * (a2 + t2 * bb2);
    let e39 =
        -c1 * b2 + t1 * a1 * b2 * b2 + t2 * a2 + b1 * b1 * t2 * a2 - t1 * b2 * bb2 + b1 * (c2 - a1 * b2 * t2) + a2
            - t1 * b2 * a2
            + t2 * bb2;
    let e40 = -t1 * b2 * a2 + b1 * t2 * a2;

    let lhs = [e31, e32, e33, e34, e35, e36, e37, e38, e39, e40];
    Ok(lhs.iter().zip(PRINTED_RHS).map(|(l, r)| l - r).collect())
}

/// Symbol-matching residuals against a centered target, with the target
/// symbols precomputed on a fixed grid.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    wgrid: Vec<f64>,
    target: Vec<(f64, f64)>,
}

impl SpectralSystem {
    pub fn new(target: &CombinedStencil, wgrid: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(wgrid.len());
        for &w in wgrid {
            if !(w > 0.0 && w < std::f64::consts::PI) {
                return Err(Error::WavenumberOutOfRange { w, domain: "(0, pi)" });
            }
            let s = combined_symbol_oracle(target, w)?;
            values.push((s.re_wp, s.re_wpp2));
        }
        Ok(Self { wgrid: wgrid.to_vec(), target: values })
    }

    /// The default solve grid of [`SYMBOL_SAMPLES`] Chebyshev points.
    pub fn standard(target: &CombinedStencil) -> Result<Self> {
        Self::new(target, &chebyshev_grid(SYMBOL_SAMPLES))
    }

    pub fn wgrid(&self) -> &[f64] {
        &self.wgrid
    }

    pub fn residuals(&self, wts: &PrefactoredWeights) -> Result<Vec<f64>> {
        wts.expect(Direction::Forward)?;
        let mut out = Vec::with_capacity(2 * self.wgrid.len() + 2);
        for (&w, &(wp, wpp2)) in self.wgrid.iter().zip(&self.target) {
            let s = prefactored_symbol(wts, w)?;
            out.push(s.re_wp - wp);
            out.push(s.re_wpp2 - wpp2);
        }
        out.push(wts.a_i + wts.b_i + wts.c_i);
        out.push(wts.a_ii + wts.b_ii + wts.c_ii);
        Ok(out)
    }
}

/// One-shot form of [`SpectralSystem::residuals`].
pub fn residuals_spectral(wts: &PrefactoredWeights, target: &CombinedStencil, wgrid: &[f64]) -> Result<Vec<f64>> {
    SpectralSystem::new(target, wgrid)?.residuals(wts)
}

/// Default relative step of [`jacobian_fd`].
pub const FD_STEP: f64 = 1e-7;

/// Central-difference Jacobian; coordinate `j` is perturbed by
/// `step * max(1, |x_j|)`, rounded to a power of two so that `x_j +/- delta`
/// is exact.
pub fn jacobian_fd<F>(resfn: &F, wts: &PrefactoredWeights, step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&PrefactoredWeights) -> Result<Vec<f64>> + ?Sized,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
    }
    let x = wts.to_array();
    let mut cols = Vec::with_capacity(10);
    for j in 0..10 {
        let dj = (step * x[j].abs().max(1.0)).log2().round().exp2();
        let eval = |delta: f64| {
            let mut xp = x;
            xp[j] += delta;
            resfn(&PrefactoredWeights::from_array(wts.direction, xp))
                .map_err(|e| Error::Perturbation { index: j, source: Box::new(e) })
        };
        let plus = eval(dj)?;
        let minus = eval(-dj)?;
        cols.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * dj)).collect::<Vec<f64>>());
    }
    let m = cols[0].len();
    Ok(DMatrix::from_fn(m, 10, |i, j| cols[j][i]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, fd_step: FD_STEP }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub weights: PrefactoredWeights,
    /// Infinity norm of the residual at `weights`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub start_index: usize,
    pub converged: bool,
    /// Ratio of extreme singular values of the final Jacobian.
    pub condition_estimate: f64,
}

const MAX_HALVINGS: usize = 30;
const LAMBDA_MAX: f64 = 1e10;

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn condition(j: &DMatrix<f64>) -> f64 {
    let sv = j.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Step minimising `|J d + r|^2 + lambda |D d|^2`, where `D` holds the column
/// norms of `J`. With `lambda = 0` this is the (pseudo-inverse) Gauss-Newton
/// step, which for a square nonsingular Jacobian is the Newton step.
fn lm_step(j: &DMatrix<f64>, r: &[f64], lambda: f64) -> Option<DVector<f64>> {
    let (m, n) = j.shape();
    let rows = if lambda > 0.0 { m + n } else { m };
    let mut a = DMatrix::zeros(rows, n);
    a.rows_mut(0, m).copy_from(j);
    let mut b = DVector::zeros(rows);
    for (i, v) in r.iter().enumerate() {
        b[i] = -v;
    }
    if lambda > 0.0 {
        let sl = lambda.sqrt();
        for c in 0..n {
            a[(m + c, c)] = sl * j.column(c).norm().max(1e-12);
        }
    }
    let svd = a.svd(true, true);
    let cutoff = 1e-14 * svd.singular_values.max();
    let d = svd.solve(&b, cutoff).ok()?;
    d.iter().all(|v| v.is_finite()).then_some(d)
}

/// Damped Gauss-Newton with Levenberg-Marquardt fallback.
///
/// Each iteration tries the undamped step and halves it until the sum of
/// squared residuals decreases; if no halving helps, the damping parameter is
/// raised and the step recomputed. Converges when the infinity norm of the
/// residual reaches `opts.tol`.
pub fn newton_solve<F>(resfn: &F, start: &PrefactoredWeights, opts: NewtonOptions) -> Result<SolveReport>
where
    F: Fn(&PrefactoredWeights) -> Result<Vec<f64>> + ?Sized,
{
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let dir = start.direction;
    let mut x = start.to_array();
    let mut r = resfn(start)?;
    let mut lambda = 0.0;
    let mut iterations = 0;
    let mut jac = None;

    while inf_norm(&r) > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let j = jacobian_fd(resfn, &PrefactoredWeights::from_array(dir, x), opts.fd_step)?;
        let f0 = sum_sq(&r);
        let mut accepted = false;
        while !accepted && lambda <= LAMBDA_MAX {
            if let Some(d) = lm_step(&j, &r, lambda) {
                let mut t = 1.0;
                for _ in 0..=MAX_HALVINGS {
                    let mut xt = x;
                    for k in 0..10 {
                        xt[k] += t * d[k];
                    }
                    if let Ok(rt) = resfn(&PrefactoredWeights::from_array(dir, xt)) {
                        if rt.iter().all(|v| v.is_finite()) && sum_sq(&rt) < f0 {
                            x = xt;
                            r = rt;
                            accepted = true;
                            break;
                        }
                    }
                    t *= 0.5;
                }
            }
            if accepted {
                lambda = if lambda < 1e-9 { 0.0 } else { lambda / 10.0 };
            } else {
                lambda = if lambda == 0.0 { 1e-6 } else { lambda * 10.0 };
            }
        }
        jac = Some(j);
        if !accepted {
            if iterations == 1 {
                return Err(Error::SingularJacobian);
            }
            break;
        }
    }

    let weights = PrefactoredWeights::from_array(dir, x);
    let j = match jac {
        Some(j) if iterations > 0 => jacobian_fd(resfn, &weights, opts.fd_step).unwrap_or(j),
        _ => jacobian_fd(resfn, &weights, opts.fd_step)?,
    };
    let residual_norm = inf_norm(&r);
    Ok(SolveReport {
        weights,
        residual_norm,
        iterations,
        start_index: 0,
        converged: residual_norm <= opts.tol,
        condition_estimate: condition(&j),
    })
}

/// Deduplication radius for converged roots (infinity norm).
pub const DEDUP_DISTANCE: f64 = 1e-7;
/// Half-width of the box the random starts are drawn from.
pub const START_BOX: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartResult {
    pub best: SolveReport,
    /// Distinct converged roots in start order.
    pub roots: Vec<SolveReport>,
    /// Number of starts attempted, structured ones included.
    pub attempted: usize,
}

/// Start points: all zeros, a symmetric structured guess, then `n_random`
/// uniform draws from the box.
pub fn start_points(n_random: usize, seed: u64) -> Vec<PrefactoredWeights> {
    let mut starts = vec![PrefactoredWeights::zeros(Direction::Forward)];
    let mut sym = PrefactoredWeights::zeros(Direction::Forward);
    sym.beta_i = 11.0 / 48.0;
    sym.theta_ii = 11.0 / 48.0;
    sym.theta_i = 0.01;
    sym.beta_ii = 0.01;
    starts.push(sym);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        let mut x = [0.0; 10];
        for v in &mut x {
            *v = rng.random_range(-START_BOX..=START_BOX);
        }
        starts.push(PrefactoredWeights::from_array(Direction::Forward, x));
    }
    starts
}

fn distance(a: &PrefactoredWeights, b: &PrefactoredWeights) -> f64 {
    a.to_array().iter().zip(b.to_array()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn better(a: &SolveReport, b: &SolveReport) -> bool {
    (a.residual_norm, a.condition_estimate) < (b.residual_norm, b.condition_estimate)
}

/// Runs [`newton_solve`] from every point of [`start_points`] in parallel and
/// reduces in start order, so the result does not depend on scheduling.
pub fn multistart<F>(resfn: &F, n_starts: usize, seed: u64, opts: NewtonOptions) -> Result<MultistartResult>
where
    F: Fn(&PrefactoredWeights) -> Result<Vec<f64>> + Sync + ?Sized,
{
    if n_starts == 0 {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    let starts = start_points(n_starts, seed);
    let reports: Vec<Option<SolveReport>> = starts
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            newton_solve(resfn, s, opts).ok().map(|mut r| {
                r.start_index = k;
                r
            })
        })
        .collect();

    let mut roots: Vec<SolveReport> = Vec::new();
    let mut best_any: Option<SolveReport> = None;
    for r in reports.into_iter().flatten() {
        if !r.weights.is_finite() {
            continue;
        }
        if best_any.as_ref().is_none_or(|b| better(&r, b)) {
            best_any = Some(r.clone());
        }
        if !r.converged {
            continue;
        }
        match roots.iter_mut().find(|q| distance(&q.weights, &r.weights) <= DEDUP_DISTANCE) {
            Some(q) => {
                if better(&r, q) {
                    *q = r;
                }
            }
            None => roots.push(r),
        }
    }
    roots.sort_by_key(|r| r.start_index);
    let best = roots
        .iter()
        .fold(None::<&SolveReport>, |acc, r| match acc {
            Some(b) if !better(r, b) => Some(b),
            _ => Some(r),
        })
        .cloned()
        .or(best_any)
        .ok_or(Error::SingularJacobian)?;
    Ok(MultistartResult { best, roots, attempted: starts.len() })
}

/// Maxima over a wavenumber grid comparing a forward/backward pair with each
/// other and with the target.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub first_re_gap: f64,
    pub first_im_sum: f64,
    pub first_target: f64,
    pub second_re_gap: f64,
    pub second_im_sum: f64,
    pub second_target: f64,
    /// `|(w'_F + w'_B)/2 - w'_target|`.
    pub averaged_first: f64,
    /// `|((w''_F)^2 + (w''_B)^2)/2 - (w'')^2_target|`.
    pub averaged_second: f64,
}

impl ValidationReport {
    pub fn max(&self) -> f64 {
        [
            self.first_re_gap,
            self.first_im_sum,
            self.first_target,
            self.second_re_gap,
            self.second_im_sum,
            self.second_target,
            self.averaged_first,
            self.averaged_second,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Validation tolerance for a weight pair.
pub const VALIDATION_TOL: f64 = 1e-9;

pub fn validate(
    fwd: &PrefactoredWeights,
    bwd: &PrefactoredWeights,
    target: &CombinedStencil,
    wgrid: &[f64],
) -> Result<ValidationReport> {
    fwd.expect(Direction::Forward)?;
    bwd.expect(Direction::Backward)?;
    let mut rep = ValidationReport::default();
    let up = |m: &mut f64, v: f64| *m = m.max(v);
    for &w in wgrid {
        if !(w > 0.0 && w < std::f64::consts::PI) {
            return Err(Error::WavenumberOutOfRange { w, domain: "(0, pi)" });
        }
        let f = prefactored_symbol(fwd, w)?;
        let b = prefactored_symbol(bwd, w)?;
        let t = combined_symbol_oracle(target, w)?;
        up(&mut rep.first_re_gap, (f.re_wp - b.re_wp).abs());
        up(&mut rep.first_im_sum, (f.im_wp + b.im_wp).abs());
        up(&mut rep.first_target, (f.re_wp - t.re_wp).abs());
        up(&mut rep.second_re_gap, (f.re_wpp2 - b.re_wpp2).abs());
        up(&mut rep.second_im_sum, (f.im_wpp2 + b.im_wpp2).abs());
        up(&mut rep.second_target, (f.re_wpp2 - t.re_wpp2).abs());
        let avg = |re_f: f64, re_b: f64, im_f: f64, im_b: f64, tgt: f64| {
            (0.5 * (re_f + re_b) - tgt).hypot(0.5 * (im_f + im_b))
        };
        up(&mut rep.averaged_first, avg(f.re_wp, b.re_wp, f.im_wp, b.im_wp, t.re_wp));
        up(&mut rep.averaged_second, avg(f.re_wpp2, b.re_wpp2, f.im_wpp2, b.im_wpp2, t.re_wpp2));
    }
    Ok(rep)
}

/// Well-posedness indicators of a forward root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    /// Spectral radius of the sweep recursion.
    pub radius: f64,
    /// `Im w'_F` keeps one sign on the sample grid.
    pub im_sign_constant: bool,
    /// `|c_i| >= max(|a_i|, |b_i|)`; ties count as dominant.
    pub upwind: bool,
}

impl Admissibility {
    pub fn ok(&self) -> bool {
        self.radius < 1.0 && self.im_sign_constant && self.upwind
    }
}

/// Relative slack when comparing `|c_i|` with the other first-row weights.
const DOMINANCE_SLACK: f64 = 1e-9;

pub fn admissibility(fwd: &PrefactoredWeights, wgrid: &[f64]) -> Result<Admissibility> {
    let mut pos = false;
    let mut neg = false;
    for &w in wgrid {
        let im = prefactored_symbol(fwd, w)?.im_wp;
        pos |= im > 0.0;
        neg |= im < 0.0;
    }
    let others = fwd.a_i.abs().max(fwd.b_i.abs());
    Ok(Admissibility {
        radius: fwd.recursion_radius(),
        im_sign_constant: !(pos && neg),
        upwind: fwd.c_i.abs() >= others * (1.0 - DOMINANCE_SLACK),
    })
}

/// A converged root with its backward mirror and checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedRoot {
    pub report: SolveReport,
    pub backward: PrefactoredWeights,
    pub validation: ValidationReport,
    pub admissibility: Admissibility,
}

impl CheckedRoot {
    pub fn accepted(&self) -> bool {
        self.validation.passes(VALIDATION_TOL) && self.admissibility.ok()
    }
}

/// Mirrors, validates and screens each root; the first accepted root (in start
/// order) is returned as the selection.
pub fn select_root(
    roots: &[SolveReport],
    target: &CombinedStencil,
    wgrid: &[f64],
) -> Result<(Option<usize>, Vec<CheckedRoot>)> {
    let mut checked = Vec::with_capacity(roots.len());
    for r in roots {
        let backward = mirror_backward(&r.weights);
        let validation = validate(&r.weights, &backward, target, wgrid)?;
        let admissibility = admissibility(&r.weights, wgrid)?;
        checked.push(CheckedRoot { report: r.clone(), backward, validation, admissibility });
    }
    let pick = checked
        .iter()
        .enumerate()
        .filter(|(_, c)| c.accepted())
        .min_by(|(_, a), (_, b)| a.admissibility.radius.total_cmp(&b.admissibility.radius))
        .map(|(i, _)| i);
    Ok((pick, checked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::midpoint_grid;
    use crate::stencil::{build_ccd6, build_ccd8};

    fn identity(w: &PrefactoredWeights) -> Result<Vec<f64>> {
        Ok(w.to_array().to_vec())
    }

    #[test]
    fn printed_residuals_at_zero() {
        let r = residuals_printed(&PrefactoredWeights::zeros(Direction::Forward)).unwrap();
        let expect = [
            293.0 / 216.0,
            63.0 / 216.0,
            1.0 / 216.0,
            1.0 / 18.0,
            -11.0 / 12.0,
            -1.0 / 12.0,
            1730.0 / 1296.0,
            -675.0 / 1296.0,
            -10870.0 / 1296.0,
            -29.0 / 1296.0,
        ];
        for (a, b) in r.iter().zip(expect) {
            assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn bilinear_row_gradient() {
        let w =
            PrefactoredWeights::from_array(Direction::Forward, [0.3, -0.2, 0.1, 0.4, -0.5, 0.7, 0.25, -0.1, 0.9, 0.05]);
        let j = jacobian_fd(&residuals_printed, &w, FD_STEP).unwrap();
        let mut expect = [0.0; 10];
        expect[0] = 2.0 * w.theta_ii;
        expect[1] = -2.0 * w.beta_ii;
        expect[5] = -2.0 * w.theta_i;
        expect[6] = 2.0 * w.beta_i;
        for k in 0..10 {
            assert!((j[(5, k)] - expect[k]).abs() < 1e-6, "{k}");
        }
    }

    #[test]
    fn linear_map_jacobian() {
        let m = DMatrix::from_fn(3, 10, |i, j| (i as f64 + 1.0) * (j as f64 - 4.5));
        let f = |w: &PrefactoredWeights| Ok((&m * DVector::from_row_slice(&w.to_array())).as_slice().to_vec());
        let j = jacobian_fd(&f, &PrefactoredWeights::zeros(Direction::Forward), FD_STEP).unwrap();
        assert!((j - &m).abs().max() < 1e-8);
        let c = |_: &PrefactoredWeights| Ok(vec![1.0, 2.0]);
        let j = jacobian_fd(&c, &PrefactoredWeights::zeros(Direction::Forward), FD_STEP).unwrap();
        assert_eq!(j.abs().max(), 0.0);
    }

    #[test]
    fn perturbation_failure_names_coordinate() {
        let f = |w: &PrefactoredWeights| {
            if w.c_i > 0.0 {
                Err(Error::SingularJacobian)
            } else {
                Ok(vec![0.0])
            }
        };
        let e = jacobian_fd(&f, &PrefactoredWeights::zeros(Direction::Forward), FD_STEP).unwrap_err();
        assert!(matches!(e, Error::Perturbation { index: 4, .. }));
    }

    #[test]
    fn identity_converges_in_one_step() {
        let start = PrefactoredWeights::from_array(Direction::Forward, [0.7; 10]);
        let r = newton_solve(&identity, &start, NewtonOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1, "{r:?}");
        assert!(r.weights.to_array().iter().all(|v| v.abs() < 1e-12));
    }

    fn sqrt2(w: &PrefactoredWeights) -> Result<Vec<f64>> {
        let mut x = w.to_array();
        x[1] = x[1] * x[1] - 2.0;
        Ok(x.to_vec())
    }

    #[test]
    fn embedded_quadratic_has_two_roots() {
        let res = multistart(&sqrt2, 16, 7, NewtonOptions::default()).unwrap();
        assert_eq!(res.roots.len(), 2);
        let mut found: Vec<f64> = res.roots.iter().map(|r| r.weights.theta_i).collect();
        found.sort_by(f64::total_cmp);
        assert!((found[0] + 2f64.sqrt()).abs() < 1e-12);
        assert!((found[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn multistart_identity_and_determinism() {
        let a = multistart(&identity, 4, 3, NewtonOptions::default()).unwrap();
        assert_eq!(a.roots.len(), 1);
        let b = multistart(&identity, 4, 3, NewtonOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spectral_residual_at_zero() {
        let st = build_ccd8(true);
        let z = PrefactoredWeights::zeros(Direction::Forward);
        let r = residuals_spectral(&z, &st, &[std::f64::consts::FRAC_PI_2]).unwrap();
        assert_eq!(r.len(), 4);
        assert!((r[0] + 146.0 / 93.0).abs() < 1e-13);
        assert_eq!(residuals_spectral(&z, &st, &[]).unwrap(), vec![0.0, 0.0]);
        assert!(residuals_spectral(&z, &st, &[0.0]).is_err());
    }

    #[test]
    fn validate_zero_pair() {
        let f = PrefactoredWeights::zeros(Direction::Forward);
        let b = PrefactoredWeights::zeros(Direction::Backward);
        let rep = validate(&f, &b, &build_ccd6(), &[std::f64::consts::FRAC_PI_2]).unwrap();
        assert!((rep.first_target - 36.0 / 23.0).abs() < 1e-13);
        assert_eq!(rep.first_re_gap, 0.0);
        assert_eq!(rep.first_im_sum, 0.0);
        assert!(validate(&f, &b, &build_ccd6(), &[0.0]).is_err());
    }

    #[test]
    fn ccd6_spectral_root() {
        let st = build_ccd6();
        let sys = SpectralSystem::standard(&st).unwrap();
        let f = |w: &PrefactoredWeights| sys.residuals(w);
        // Polished from a nearby point of the known admissible root.
        let guess = PrefactoredWeights::from_array(
            Direction::Forward,
            [0.58, -0.085, 0.0, -1.33, 1.33, 0.77, -0.068, 0.0, -3.42, 3.42],
        );
        let r = newton_solve(&f, &guess, NewtonOptions::default()).unwrap();
        assert!(r.converged, "{r:?}");
        let (pick, checked) = select_root(&[r], &st, &midpoint_grid(128)).unwrap();
        assert_eq!(pick, Some(0), "{checked:?}");
        assert!(checked[0].admissibility.radius < 1.0);
    }
}
