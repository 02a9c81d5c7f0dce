//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fmt::sig;
use crate::grid::GridFunction;
use crate::solver::{
    multistart, residuals_printed, select_root, CheckedRoot, NewtonOptions, SpectralSystem, PRINTED_RHS, VALIDATION_TOL,
};
use crate::spectral::{extract_rational_form, midpoint_grid, RationalSymbolForm, Scheme};
use crate::stencil::{build_ccd6, build_ccd8, row_residual, CombinedStencil};
use crate::sweep::{anchored_options, differentiate, sweep_decay_rate};
use crate::verify::{
    convergence_study, dispersion_curve, scheme_stencil, write_dispersion_csv, DispersionSource, Method, TestFunction,
};
use crate::weights::{mirror_backward, Direction, PrefactoredWeights, SystemKind, Target, WeightsFile};

/// Number of fresh validation wavenumbers.
pub const VALIDATION_SAMPLES: usize = 128;

#[derive(Debug, Parser)]
#[command(name = "ccdp", version, about = "Combined and prefactored compact differences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Ccd6,
    Ccd8,
}

impl SchemeArg {
    fn scheme(self) -> Scheme {
        match self {
            SchemeArg::Ccd6 => Scheme::Ccd6,
            SchemeArg::Ccd8 => Scheme::Ccd8,
        }
    }

    fn target(self) -> Target {
        match self {
            SchemeArg::Ccd6 => Target::Ccd6,
            SchemeArg::Ccd8 => Target::Ccd8,
        }
    }

    /// Expected convergence order and slope tolerance.
    fn order(self) -> (f64, f64) {
        match self {
            SchemeArg::Ccd6 => (6.0, 0.3),
            SchemeArg::Ccd8 => (8.0, 0.4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Printed,
    Oracle,
    Prefactored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Printed,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Combined,
    Prefactored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestFnArg {
    Sin,
    Exp,
    Gauss,
    Constant,
}

impl From<TestFnArg> for TestFunction {
    fn from(t: TestFnArg) -> Self {
        match t {
            TestFnArg::Sin => TestFunction::Sin,
            TestFnArg::Exp => TestFunction::Exp,
            TestFnArg::Gauss => TestFunction::Gauss,
            TestFnArg::Constant => TestFunction::Constant,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit polynomial exactness of the built-in stencils.
    CheckStencils {
        /// Write the audit as JSON here instead of only printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a dispersion curve as CSV.
    Wavenumber {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value = "oracle")]
        source: SourceArg,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Forward or backward weights file (required for `prefactored`).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for prefactored weights by multistart Newton.
    SolveWeights {
        #[arg(long, value_enum)]
        target: SchemeArg,
        #[arg(long, value_enum, default_value = "spectral")]
        system: SystemArg,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Forward weights file; the backward pair and a summary are written
        /// next to it as `<stem>.backward.json` and `<stem>.summary.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Differentiate a CSV grid function (`x,u`) with prefactored sweeps.
    Differentiate {
        /// Forward weights file.
        #[arg(long)]
        weights: PathBuf,
        /// Backward weights file; the mirror of the forward weights when absent.
        #[arg(long)]
        backward: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        /// Output CSV (`x,u,du,d2u`); standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// True derivatives `D,D2` at the last node; seeds the forward sweep.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        forward_seed: Option<Vec<f64>>,
        /// True derivatives `D,D2` at the first node; seeds the backward sweep.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        backward_seed: Option<Vec<f64>>,
    },
    /// Measure convergence order on a test function.
    Convergence {
        #[arg(long, value_enum, default_value = "combined")]
        method: MethodArg,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value = "sin")]
        testfn: TestFnArg,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        ns: Vec<usize>,
        /// Forward weights file (required for `prefactored`).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Convergence CSV; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON with slopes and pass flags.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failed = 1,
    Usage = 2,
}

fn status_of(e: &Error) -> Status {
    match e {
        Error::Io { .. }
        | Error::Format { .. }
        | Error::InvalidArgument(_)
        | Error::WrongDirection { .. }
        | Error::GridTooSmall { .. }
        | Error::BadSpacing(_)
        | Error::NonUniformGrid { .. }
        | Error::LengthMismatch { .. } => Status::Usage,
        _ => Status::Failed,
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Status
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                Status::Usage
            } else {
                let _ = write!(stdout, "{text}");
                Status::Ok
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            status_of(&e)
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<Status> {
    match cmd {
        Command::CheckStencils { out } => check_stencils(out.as_deref(), stdout),
        Command::Wavenumber { scheme, source, samples, weights, out } => {
            wavenumber(scheme, source, samples, weights.as_deref(), out.as_deref(), stdout)
        }
        Command::SolveWeights { target, system, starts, seed, tol, max_iter, out } => solve_weights(
            target,
            system,
            starts,
            seed,
            NewtonOptions { tol, max_iter, ..Default::default() },
            &out,
            stdout,
        ),
        Command::Differentiate { weights, backward, input, out, forward_seed, backward_seed } => differentiate_cmd(
            &weights,
            backward.as_deref(),
            &input,
            out.as_deref(),
            forward_seed,
            backward_seed,
            stdout,
        ),
        Command::Convergence { method, scheme, testfn, ns, weights, out, summary } => {
            convergence(method, scheme, testfn, &ns, weights.as_deref(), out.as_deref(), summary.as_deref(), stdout)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes via `f` to `path`, or to `stdout` when `path` is `None`.
fn emit(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(p, e))
        }
        None => f(stdout).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize)]
struct StencilAudit {
    name: &'static str,
    order: u32,
    /// Largest monomial degree reproduced to `1e-12` relative in both rows.
    exact_through: i32,
    /// Worst relative residual per degree.
    residuals: Vec<f64>,
    constant_defect: f64,
}

const AUDIT_POINTS: [f64; 3] = [-0.7, 0.3, 1.1];
const AUDIT_STEPS: [f64; 3] = [1.0, 0.5, 0.25];

fn audit(name: &'static str, st: &CombinedStencil) -> StencilAudit {
    let residuals: Vec<f64> = (0..=st.order as i32 + 2)
        .map(|d| {
            let df = d as f64;
            let u = move |x: f64| x.powi(d);
            let du = move |x: f64| if d >= 1 { df * x.powi(d - 1) } else { 0.0 };
            let d2u = move |x: f64| if d >= 2 { df * (df - 1.0) * x.powi(d - 2) } else { 0.0 };
            let mut worst = 0.0f64;
            for &x in &AUDIT_POINTS {
                for &h in &AUDIT_STEPS {
                    let r = row_residual(st, &u, &du, &d2u, x, h);
                    worst =
                        worst.max(r.first.abs() / r.first_scale.max(1.0)).max(r.second.abs() / r.second_scale.max(1.0));
                }
            }
            worst
        })
        .collect();
    let exact_through = residuals.iter().take_while(|&&r| r <= 1e-12).count() as i32 - 1;
    StencilAudit { name, order: st.order, exact_through, residuals, constant_defect: st.constant_defect() }
}

fn check_stencils(out: Option<&Path>, stdout: &mut dyn Write) -> Result<Status> {
    let audits =
        [audit("ccd6", &build_ccd6()), audit("ccd8", &build_ccd8(true)), audit("ccd8-printed", &build_ccd8(false))];
    let io = |e| Error::io("<stdout>", e);
    for a in &audits {
        writeln!(
            stdout,
            "{:<13} order {}  exact through degree {:>2}  constant defect {}",
            a.name,
            a.order,
            a.exact_through,
            sig(a.constant_defect, 6)
        )
        .map_err(io)?;
    }
    if let Some(p) = out {
        write_json(p, &audits)?;
    }
    let ok = audits[..2].iter().all(|a| a.exact_through >= a.order as i32);
    Ok(if ok { Status::Ok } else { Status::Failed })
}

fn wavenumber(
    scheme: SchemeArg,
    source: SourceArg,
    samples: usize,
    weights: Option<&Path>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<Status> {
    let wts;
    let src = match source {
        SourceArg::Printed => DispersionSource::Printed,
        SourceArg::Oracle => DispersionSource::Oracle,
        SourceArg::Prefactored => {
            let path = weights
                .ok_or_else(|| Error::InvalidArgument("--weights is required for --source prefactored".into()))?;
            wts = WeightsFile::read(path)?.weights();
            DispersionSource::Prefactored(&wts)
        }
    };
    let rows = dispersion_curve(src, scheme.scheme(), samples)?;
    emit(out, stdout, |w| write_dispersion_csv(&rows, w))?;
    Ok(Status::Ok)
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.json"))
}

fn root_json(c: &CheckedRoot) -> serde_json::Value {
    json!({
        "start_index": c.report.start_index,
        "residual_norm": c.report.residual_norm,
        "iterations": c.report.iterations,
        "condition_estimate": c.report.condition_estimate,
        "validation_max": c.validation.max(),
        "recursion_radius": c.admissibility.radius,
        "im_sign_constant": c.admissibility.im_sign_constant,
        "upwind": c.admissibility.upwind,
        "accepted": c.accepted(),
        "weights": c.report.weights.to_array(),
    })
}

/// Ratios of fitted rational coefficients to the printed right-hand sides they
/// correspond to: `f_first` to rows 1-3, `g` to rows 4-6, `f_second` to rows 7-10.
fn rational_over_printed(form: &RationalSymbolForm) -> Vec<f64> {
    let fitted = form.f_first.iter().chain(&form.g).chain(&form.f_second);
    fitted.zip(PRINTED_RHS).map(|(f, r)| f / r).collect()
}

fn max_abs_diff(a: &PrefactoredWeights, b: &PrefactoredWeights) -> f64 {
    a.to_array().iter().zip(b.to_array()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Printed-system multistart, reported whether or not it converges.
fn printed_report(starts: usize, seed: u64, opts: NewtonOptions) -> Result<crate::solver::MultistartResult> {
    multistart(&residuals_printed, starts, seed, opts)
}

fn solve_weights(
    target: SchemeArg,
    system: SystemArg,
    starts: usize,
    seed: u64,
    opts: NewtonOptions,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<Status> {
    if system == SystemArg::Printed && target != SchemeArg::Ccd8 {
        return Err(Error::InvalidArgument("the printed system exists only for the ccd8 target".into()));
    }
    let st = scheme_stencil(target.scheme());
    let fresh = midpoint_grid(VALIDATION_SAMPLES);
    let io = |e| Error::io("<stdout>", e);

    let mut summary = json!({
        "target": target.target(),
        "system": match system { SystemArg::Printed => "printed", SystemArg::Spectral => "spectral" },
        "starts": starts,
        "seed": seed,
        "tol": opts.tol,
        "max_iter": opts.max_iter,
        "validation_samples": VALIDATION_SAMPLES,
        "validation_tol": VALIDATION_TOL,
    });

    let (chosen, kind) = match system {
        SystemArg::Spectral => {
            let sys = SpectralSystem::standard(&st)?;
            let res = multistart(&|w: &PrefactoredWeights| sys.residuals(w), starts, seed, opts)?;
            let (pick, checked) = select_root(&res.roots, &st, &fresh)?;
            summary["attempted"] = json!(res.attempted);
            summary["roots"] = checked.iter().map(root_json).collect();
            summary["selected"] = json!(pick);
            (pick.map(|i| checked[i].clone()), SystemKind::Spectral)
        }
        SystemArg::Printed => {
            let res = printed_report(starts, seed, opts)?;
            let (pick, checked) = select_root(&res.roots, &st, &fresh)?;
            summary["attempted"] = json!(res.attempted);
            summary["roots"] = checked.iter().map(root_json).collect();
            summary["selected"] = json!(pick);
            summary["best_residual_norm"] = json!(res.best.residual_norm);
            summary["best_weights"] = json!(res.best.weights.to_array());
            (pick.map(|i| checked[i].clone()), SystemKind::Printed)
        }
    };

    let status = match &chosen {
        Some(c) => {
            let fwd = c.report.weights;
            WeightsFile::new(&fwd, target.target(), kind, c.report.residual_norm).write(out)?;
            WeightsFile::new(&c.backward, target.target(), kind, c.report.residual_norm)
                .write(&sibling(out, "backward"))?;
            summary["validation"] = json!(c.validation);
            summary["sweep_decay_rate"] = json!(sweep_decay_rate(&fwd)?);
            if let Ok(form) = extract_rational_form(&fwd) {
                summary["rational_form"] = json!(form);
                if target == SchemeArg::Ccd8 {
                    summary["rational_over_printed_rhs"] = json!(rational_over_printed(&form));
                }
            }
            writeln!(
                stdout,
                "{} root: residual {:.3e}, validation {:.3e}, recursion radius {:.6}",
                target.target().as_str(),
                c.report.residual_norm,
                c.validation.max(),
                c.admissibility.radius
            )
            .map_err(io)?;
            Status::Ok
        }
        None => {
            writeln!(stdout, "no admissible root passed validation").map_err(io)?;
            Status::Failed
        }
    };

    // The eighth-order target also has the closed polynomial system; compare.
    if system == SystemArg::Spectral && target == SchemeArg::Ccd8 {
        let printed = printed_report(starts, seed, opts)?;
        let mut cmp = json!({
            "converged_roots": printed.roots.len(),
            "best_residual_norm": printed.best.residual_norm,
            "best_weights": printed.best.weights.to_array(),
        });
        if let Some(c) = &chosen {
            let at_root = residuals_printed(&c.report.weights)?;
            let distance = max_abs_diff(&printed.best.weights, &c.report.weights);
            cmp["residuals_at_spectral_root"] = json!(at_root);
            cmp["distance_to_spectral_root"] = json!(distance);
            cmp["agrees"] = json!(printed.best.converged && distance <= 1e-8);
            if !(printed.best.converged && distance <= 1e-8) {
                WeightsFile::new(&printed.best.weights, Target::Ccd8, SystemKind::Printed, printed.best.residual_norm)
                    .write(&sibling(out, "printed"))?;
            }
        }
        writeln!(
            stdout,
            "printed system: {} converged roots, best residual {:.3e}",
            printed.roots.len(),
            printed.best.residual_norm
        )
        .map_err(io)?;
        summary["printed_system"] = cmp;
    }

    write_json(&sibling(out, "summary"), &summary)?;
    Ok(status)
}

fn seed_pair(flag: &str, values: Option<Vec<f64>>) -> Result<Option<(f64, f64)>> {
    match values.as_deref() {
        None => Ok(None),
        Some(&[d1, d2]) => Ok(Some((d1, d2))),
        Some(v) => Err(Error::InvalidArgument(format!("--{flag} expects two numbers `D,D2`, got {}", v.len()))),
    }
}

fn differentiate_cmd(
    weights: &Path,
    backward: Option<&Path>,
    input: &Path,
    out: Option<&Path>,
    forward_seed: Option<Vec<f64>>,
    backward_seed: Option<Vec<f64>>,
    stdout: &mut dyn Write,
) -> Result<Status> {
    let fwd = WeightsFile::read(weights)?.weights();
    fwd.expect(Direction::Forward)?;
    let bwd = match backward {
        Some(p) => WeightsFile::read(p)?.weights(),
        None => mirror_backward(&fwd),
    };
    let g = GridFunction::read_csv(input)?;
    let right = seed_pair("forward-seed", forward_seed)?;
    let left = seed_pair("backward-seed", backward_seed)?;
    let (fo, bo) = anchored_options(&fwd, &bwd, &g, left, right)?;
    let d = differentiate(&fwd, &bwd, &g, fo, bo)?;
    emit(out, stdout, |w| d.write_csv(&g, w))?;
    Ok(Status::Ok)
}

#[allow(clippy::too_many_arguments)]
fn convergence(
    method: MethodArg,
    scheme: SchemeArg,
    testfn: TestFnArg,
    ns: &[usize],
    weights: Option<&Path>,
    out: Option<&Path>,
    summary: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<Status> {
    let pair;
    let m = match method {
        MethodArg::Combined => Method::Combined,
        MethodArg::Prefactored => {
            let path = weights
                .ok_or_else(|| Error::InvalidArgument("--weights is required for --method prefactored".into()))?;
            let fwd = WeightsFile::read(path)?.weights();
            fwd.expect(Direction::Forward)?;
            pair = (fwd, mirror_backward(&fwd));
            Method::Prefactored { fwd: &pair.0, bwd: &pair.1 }
        }
    };
    let study = convergence_study(m, scheme.scheme(), testfn.into(), ns)?;
    emit(out, stdout, |w| study.write_csv(w))?;
    let (order, tol) = scheme.order();
    let pass = |s: Option<f64>| s.map(|p| (p - order).abs() <= tol);
    let pass_first = pass(study.slope_first);
    if let Some(p) = summary {
        write_json(
            p,
            &json!({
                "scheme": scheme.target(),
                "study": study,
                "expected_order": order,
                "slope_tolerance": tol,
                "pass_first": pass_first,
                "pass_second": pass(study.slope_second),
                "fit_skipped": study.slope_first.is_none(),
            }),
        )?;
    }
    Ok(if pass_first == Some(false) { Status::Failed } else { Status::Ok })
}
