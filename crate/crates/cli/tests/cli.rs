use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdlift::docs::{self, Geometry};
use sdlift::{EXIT_CHECK_FAILED, EXIT_DEGENERATE, EXIT_INVALID_INPUT, EXIT_OK};
use sdlift_core::builtins::{perturbed2d, DEMO_T};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn sdlift(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sdlift").chain(args.iter().copied());
    let code = sdlift::run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn demo(name: &str, extra: &[&str]) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bundle");
    let mut args = vec!["demo", name, "--output", s(&out)];
    args.extend_from_slice(extra);
    let r = sdlift(&args);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    (dir, out)
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

const COLLAPSED: &str = r#"{"dimension": 2, "T": 1.0, "n": 1, "curves": [
  {"index": -1, "x": {"poly": [0, 1]}, "y": {"poly": [0]}},
  {"index": 0, "x": {"poly": [0, 1]}, "y": {"poly": [1]}},
  {"index": 1, "x": {"poly": [0, 1]}, "y": {"poly": [1]}},
  {"index": 2, "x": {"poly": [0, 1]}, "y": {"poly": [3]}}
]}"#;

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(sdlift(&["--help"]).code, EXIT_OK);
    assert!(sdlift(&["--version"]).stdout.contains("sdlift"));
}

#[test]
fn validate_exit_codes() {
    let (dir, b) = demo("circles2d", &["--n", "2"]);
    assert_eq!(sdlift(&["validate", "--input", s(&b.join("framework.json"))]).code, EXIT_OK);

    let collapsed = dir.path().join("collapsed.json");
    fs::write(&collapsed, COLLAPSED).unwrap();
    let r = sdlift(&["validate", "--input", s(&collapsed)]);
    assert_eq!(r.code, EXIT_CHECK_FAILED);
    assert_eq!(json(&r.stdout)["pass"], false);

    let text = fs::read_to_string(b.join("framework.json")).unwrap();
    let truncated = dir.path().join("truncated.json");
    fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    let r = sdlift(&["validate", "--input", s(&truncated)]);
    assert_eq!(r.code, EXIT_INVALID_INPUT);
    assert!(r.stderr.contains("curves["), "{}", r.stderr);
    assert!(r.stderr.contains("line "), "{}", r.stderr);
}

#[test]
fn schema_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, COLLAPSED.replace("\"poly\": [3]", "\"poly\": [3], \"extra\": 1")).unwrap();
    let r = sdlift(&["validate", "--input", s(&bad)]);
    assert_eq!(r.code, EXIT_INVALID_INPUT);
    assert!(r.stderr.contains("curves[3].y") && r.stderr.contains("extra"), "{}", r.stderr);

    fs::write(&bad, COLLAPSED.replace("\"index\": 2", "\"index\": 5")).unwrap();
    let r = sdlift(&["validate", "--input", s(&bad)]);
    assert_eq!(r.code, EXIT_INVALID_INPUT);
    assert!(r.stderr.contains("curves[3].index"), "{}", r.stderr);
}

#[test]
fn invalid_flags_and_missing_files_exit_two() {
    let (_dir, b) = demo("circles2d", &[]);
    let fw = b.join("framework.json");
    assert_eq!(sdlift(&["validate", "--input", s(&fw), "--grid", "15"]).code, EXIT_INVALID_INPUT);
    assert_eq!(sdlift(&["validate", "--input", s(&fw), "--grid", "8"]).code, EXIT_INVALID_INPUT);
    assert_eq!(sdlift(&["solve", "--input", s(&fw), "--tol", "0"]).code, EXIT_INVALID_INPUT);
    assert_eq!(sdlift(&["validate", "--input", "/nonexistent/f.json"]).code, EXIT_INVALID_INPUT);
    assert_eq!(sdlift(&["frobnicate"]).code, EXIT_INVALID_INPUT);
    assert_eq!(sdlift(&["demo", "moebius", "--output", s(&b)]).code, EXIT_INVALID_INPUT);
    assert_eq!(sdlift(&["solve", "--input", s(&fw), "--lambda0", "1,2,3"]).code, EXIT_INVALID_INPUT);
}

#[test]
fn solve_one_curve_demo() {
    let (_dir, b) = demo("circles2d", &["--n", "0"]);
    let out = b.join("solved.json");
    let r = sdlift(&["solve", "--input", s(&b.join("framework.json")), "--output", s(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(json(&r.stdout)["residual_max"].as_f64().unwrap() < 1e-7);
    let stress = docs::load_stress(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(stress.n(), 0);
}

#[test]
fn solve_with_zero_seed_gives_zero_stress() {
    let (_dir, b) = demo("perturbed2d", &["--n", "2"]);
    let r = sdlift(&["solve", "--input", s(&b.join("framework.json")), "--lambda0", "0,0,0", "--mu-minus1", "0"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let stress = docs::load_stress(&r.stdout).unwrap();
    assert!(stress.lambda_rows().iter().chain(stress.mu_rows()).flatten().all(|v| *v == 0.0));
}

#[test]
fn solve_accepts_a_coordinate_for_mu() {
    let (_dir, b) = demo("circles2d", &["--n", "1"]);
    let mu = r#"{"poly": [0.1], "trig": [{"amp": 0.05, "freq": 2, "phase": 0}]}"#;
    let r = sdlift(&["solve", "--input", s(&b.join("framework.json")), "--mu-minus1", mu, "--lambda0", "1,-0.5"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let stress = docs::load_stress(&r.stdout).unwrap();
    assert!((stress.mu(-1)[0] - 0.15).abs() < 1e-15);
    assert_eq!(sdlift(&["solve", "--input", s(&b.join("framework.json")), "--mu-minus1", "{\"poly\": 1}"]).code, 2);
}

#[test]
fn solve_degenerate_input_reports_location() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("collapsed.json");
    fs::write(&p, COLLAPSED).unwrap();
    let r = sdlift(&["solve", "--input", s(&p)]);
    assert_eq!(r.code, EXIT_CHECK_FAILED);
    assert!(r.stderr.contains("at curve") && r.stderr.contains("t = "), "{}", r.stderr);
}

#[test]
fn framework_round_trip_is_exact() {
    let fw = perturbed2d(3, 7, 0.1).unwrap();
    let Geometry::Planar(back) = docs::load_framework(&docs::save_framework(&fw), 256).unwrap() else {
        panic!("planar")
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let i = rng.gen_range(-1..=4isize);
        let t = rng.gen_range(0.0..=DEMO_T);
        assert_eq!(fw.eval(i, t).unwrap(), back.eval(i, t).unwrap());
    }
}

#[test]
fn demo_project_check_passes() {
    let (_dir, b) = demo("translational3d", &[]);
    let stem = b.join("proj");
    let r = sdlift(&["project", "--input", s(&b.join("surface.json")), "--output", s(&stem)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let r = sdlift(&[
        "check",
        "--input",
        s(&b.join("proj.framework.json")),
        "--stress",
        s(&b.join("proj.stress.json")),
        "--tol",
        "1e-7",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stdout);
    assert_eq!(json(&r.stdout)["pass"], true);
}

#[test]
fn check_rejects_a_perturbed_stress() {
    let (_dir, b) = demo("circles2d", &["--n", "2"]);
    let text = fs::read_to_string(b.join("stress.json")).unwrap();
    let stress = docs::load_stress(&text).unwrap().with_mu_scaled(0, 1.1);
    let bad = b.join("bad.json");
    fs::write(&bad, docs::save_stress(&stress)).unwrap();
    let r = sdlift(&["check", "--input", s(&b.join("framework.json")), "--stress", s(&bad)]);
    assert_eq!(r.code, EXIT_CHECK_FAILED);
    assert!(json(&r.stdout)["spread_max"].as_f64().unwrap() > 1e-4);
}

#[test]
fn lift_refuses_a_non_self_stress_unless_forced() {
    let (_dir, b) = demo("circles2d", &["--n", "2"]);
    let stress = docs::load_stress(&fs::read_to_string(b.join("stress.json")).unwrap()).unwrap();
    let bad = b.join("bad.json");
    fs::write(&bad, docs::save_stress(&stress.with_mu_scaled(1, 0.8))).unwrap();
    let fw = b.join("framework.json");
    let r = sdlift(&["lift", "--input", s(&fw), "--stress", s(&bad)]);
    assert_eq!(r.code, EXIT_CHECK_FAILED);
    assert!(r.stderr.contains("not a self-stress"), "{}", r.stderr);
    let r = sdlift(&["lift", "--input", s(&fw), "--stress", s(&bad), "--force"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(json(&r.stdout)["path_dependent"], true);
    let r = sdlift(&["lift", "--input", s(&fw), "--stress", s(&bad), "--force", "--format", "obj", "--reproducible"]);
    assert!(r.stdout.contains("# path-dependent heights"));
}

#[test]
fn lift_then_project_round_trip() {
    let (_dir, b) = demo("perturbed2d", &["--n", "1"]);
    let fw = b.join("framework.json");
    let stem = b.join("lifted");
    let r = sdlift(&["lift", "--input", s(&fw), "--stress", s(&b.join("stress.json")), "--output", s(&stem)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let obj = fs::read_to_string(b.join("lifted.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4 * 257);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 3 * 256);
    assert!(obj.contains("# created unix "));

    let r = sdlift(&["project", "--input", s(&b.join("lifted.json")), "--output", s(&b.join("back"))]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let r =
        sdlift(&["check", "--input", s(&b.join("back.framework.json")), "--stress", s(&b.join("back.stress.json"))]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stdout);
    let back = docs::load_stress(&fs::read_to_string(b.join("back.stress.json")).unwrap()).unwrap();
    let orig = docs::load_stress(&fs::read_to_string(b.join("stress.json")).unwrap()).unwrap();
    for (a, c) in back.lambda_rows().iter().flatten().zip(orig.lambda_rows().iter().flatten()) {
        assert!((a - c).abs() < 1e-6 * (1.0 + c.abs()), "{a} {c}");
    }
}

#[test]
fn project_refuses_non_conjugate_surfaces() {
    let (_dir, b) = demo("twisted3d", &[]);
    assert!(!b.join("stress.json").exists());
    let r = sdlift(&["project", "--input", s(&b.join("surface.json"))]);
    assert_eq!(r.code, EXIT_CHECK_FAILED);
    assert!(r.stderr.contains("not conjugate"), "{}", r.stderr);
    let r = sdlift(&["project", "--input", s(&b.join("framework.json"))]);
    assert_eq!(r.code, EXIT_INVALID_INPUT);
}

#[test]
fn project_of_a_vertical_strip_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("vertical.json");
    let text = r#"{"dimension": 3, "T": 1.0, "n": 1, "curves": [
      {"index": -1, "x": {"poly": [0, 1]}, "y": {"poly": [0]}, "z": {"poly": [0]}},
      {"index": 0, "x": {"poly": [0, 1]}, "y": {"poly": [1]}, "z": {"poly": [0]}},
      {"index": 1, "x": {"poly": [0, 1]}, "y": {"poly": [1]}, "z": {"poly": [1]}},
      {"index": 2, "x": {"poly": [0, 1]}, "y": {"poly": [2]}, "z": {"poly": [1]}}
    ]}"#;
    fs::write(&p, text).unwrap();
    let r = sdlift(&["project", "--input", s(&p)]);
    assert_eq!(r.code, EXIT_DEGENERATE, "{}", r.stderr);
}

#[test]
fn onestrip_verdicts() {
    let (_dir, b) = demo("cylinder-strip3d", &[]);
    let r = sdlift(&["onestrip", "--input", s(&b.join("surface.json"))]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(json(&r.stdout)["verdict"], true);
    let r = sdlift(&["onestrip", "--input", s(&b.join("framework.json")), "--format", "csv"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.starts_with("t,criterion,lambda0,lambda1,mu0\n"));
    assert_eq!(r.stdout.lines().count(), 258);

    let (_dir2, p) = demo("perturbed2d", &["--n", "1"]);
    assert_eq!(sdlift(&["onestrip", "--input", s(&p.join("framework.json"))]).code, EXIT_CHECK_FAILED);
    let (_dir3, c) = demo("circles2d", &["--n", "2"]);
    assert_eq!(sdlift(&["onestrip", "--input", s(&c.join("framework.json"))]).code, EXIT_INVALID_INPUT);
}
