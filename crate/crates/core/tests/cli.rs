use std::path::Path;
use std::process::Command;

use ccd_prefactored::cli::{run, Status};
use ccd_prefactored::weights::{SystemKind, Target, WeightsFile};
use ccd_prefactored::{build_ccd6, Direction, PrefactoredWeights};

mod common;
use common::{polished, CCD6_ROOT};

fn call(args: &[&str]) -> (Status, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ccdp").chain(args.iter().copied());
    let status = run(argv, &mut out, &mut err);
    (status, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn wavenumber_printed_quarter_row() {
    let (status, out, _) = call(&["wavenumber", "--scheme", "ccd6", "--source", "printed", "--samples", "4"]);
    assert_eq!(status, Status::Ok);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("w,re_wp,im_wp,re_wpp2,im_wpp2,exact_wp,exact_wpp2"));
    assert!(out.lines().any(|l| l.starts_with("1.5707963267949,1.56521739130435,")), "{out}");
}

#[test]
fn missing_weights_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.csv");
    std::fs::write(&input, "x,u\n0,0\n1,1\n2,2\n3,3\n4,4\n").unwrap();
    let (status, _, err) = call(&["differentiate", "--weights", "missing.json", "--input", p(&input)]);
    assert_eq!(status, Status::Usage);
    assert!(err.contains("missing.json"), "{err}");
}

#[test]
fn unknown_flag_is_rejected() {
    let (status, _, err) = call(&["check-stencils", "--bogus"]);
    assert_eq!(status, Status::Usage);
    assert!(!err.is_empty());
}

#[test]
fn printed_system_needs_the_eighth_order_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let (status, _, err) = call(&["solve-weights", "--target", "ccd6", "--system", "printed", "--out", p(&out)]);
    assert_eq!(status, Status::Usage);
    assert!(err.contains("ccd8"));
}

#[test]
fn check_stencils_reports_the_defect() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("audit.json");
    let (status, text, _) = call(&["check-stencils", "--out", p(&out)]);
    assert_eq!(status, Status::Ok);
    assert!(text.contains("ccd8-printed"));
    let audit: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let defect = audit[2]["constant_defect"].as_f64().unwrap();
    assert!((defect - 1.0 / 54.0).abs() < 1e-15);
    assert_eq!(audit[1]["exact_through"], 8);
}

#[test]
fn solve_weights_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run_once = |name: &str| {
        let out = dir.path().join(name);
        let (status, _, err) =
            call(&["solve-weights", "--target", "ccd6", "--starts", "8", "--seed", "3", "--out", p(&out)]);
        assert_eq!(status, Status::Ok, "{err}");
        let read = |suffix: &str| {
            let path = if suffix.is_empty() {
                out.clone()
            } else {
                dir.path().join(format!("{}.{suffix}.json", name.trim_end_matches(".json")))
            };
            std::fs::read(path).unwrap()
        };
        (read(""), read("backward"), read("summary"))
    };
    let a = run_once("a.json");
    let b = run_once("b.json");
    assert_eq!(a, b);
    let fwd: WeightsFile = serde_json::from_slice(&a.0).unwrap();
    assert!(fwd.residual_norm <= 1e-10);
    assert_eq!(fwd.direction, Direction::Forward);
}

#[test]
fn differentiate_and_convergence_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let fwd = polished(&build_ccd6(), CCD6_ROOT);
    let wpath = dir.path().join("w.json");
    WeightsFile::new(&fwd, Target::Ccd6, SystemKind::Spectral, 0.0).write(&wpath).unwrap();

    let n = 96;
    let mut csv = String::from("x,u\n");
    for i in 0..n {
        let x = i as f64 / (n - 1) as f64 * 2.0;
        csv.push_str(&format!("{x},{}\n", x.sin()));
    }
    let input = dir.path().join("u.csv");
    std::fs::write(&input, csv).unwrap();
    let out = dir.path().join("d.csv");
    let (status, _, err) = call(&["differentiate", "--weights", p(&wpath), "--input", p(&input), "--out", p(&out)]);
    assert_eq!(status, Status::Ok, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), n);
    for r in &rows[30..66] {
        assert!((r[2] - r[0].cos()).abs() < 1e-7, "{r:?}");
        assert!((r[3] + r[0].sin()).abs() < 1e-5, "{r:?}");
    }

    let seeded = dir.path().join("s.csv");
    let (status, _, err) = call(&[
        "differentiate",
        "--weights",
        p(&wpath),
        "--input",
        p(&input),
        "--out",
        p(&seeded),
        "--backward-seed",
        "1,0",
        "--forward-seed",
        &format!("{},{}", 2f64.cos(), -(2f64.sin())),
    ]);
    assert_eq!(status, Status::Ok, "{err}");
    let last: Vec<f64> = std::fs::read_to_string(&seeded)
        .unwrap()
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((last[2] - 2f64.cos()).abs() < 1e-12 && (last[3] + 2f64.sin()).abs() < 1e-12, "{last:?}");
    let (status, _, err) =
        call(&["differentiate", "--weights", p(&wpath), "--input", p(&input), "--forward-seed", "1"]);
    assert_eq!(status, Status::Usage);
    assert!(err.contains("--forward-seed"), "{err}");

    let summary = dir.path().join("conv.json");
    let (status, csv, err) = call(&[
        "convergence",
        "--method",
        "prefactored",
        "--scheme",
        "ccd6",
        "--testfn",
        "sin",
        "--ns",
        "16,32,64",
        "--weights",
        p(&wpath),
        "--summary",
        p(&summary),
    ]);
    assert_eq!(status, Status::Ok, "{err}");
    assert!(csv.starts_with("n,h,err_first,err_second\n"));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["pass_first"], true);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ccdp");
    let ok = Command::new(bin).args(["wavenumber", "--scheme", "ccd8", "--samples", "8"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let missing =
        Command::new(bin).args(["differentiate", "--weights", "nope.json", "--input", "nope.csv"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.json"));
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn weights_file_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let w = PrefactoredWeights::zeros(Direction::Forward);
    let mut v: serde_json::Value =
        serde_json::from_str(&WeightsFile::new(&w, Target::Ccd8, SystemKind::Spectral, 0.0).to_json()).unwrap();
    v["extra"] = serde_json::json!(1);
    std::fs::write(&path, v.to_string()).unwrap();
    let (status, _, err) = call(&["wavenumber", "--scheme", "ccd8", "--source", "prefactored", "--weights", p(&path)]);
    assert_eq!(status, Status::Usage);
    assert!(err.contains("extra"), "{err}");
}
