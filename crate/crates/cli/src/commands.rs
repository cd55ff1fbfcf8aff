//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdlift_core::builtins::{builtin, Builtin, BuiltinParams};
use sdlift_core::framework::{Coordinate, Framework};
use sdlift_core::geomcore::RegularityReport;
use sdlift_core::lifting::{
    build_lifting, conjugacy_residual, lift_heights, path_independence_spread, random_paths, SampledSurface,
    SemiDiscreteSurface3D,
};
use sdlift_core::onestrip::onestrip_verify;
use sdlift_core::projection::{induced_stress, project, CONJUGACY_TOL};
use sdlift_core::statics::{force_load, residual_report, solve_stress, StressField};
use sdlift_core::Error;
use serde::Serialize;

use crate::docs::{self, DocError, Geometry};
use crate::{
    CheckArgs, Command, DemoArgs, Format, LiftArgs, OnestripArgs, ProjectArgs, SolveArgs, ValidateArgs,
    DEFAULT_RESIDUAL_TOL, EXIT_CHECK_FAILED, EXIT_DEGENERATE, EXIT_INVALID_INPUT, EXIT_OK,
};

/// Random intervals per curve in the force-load check.
pub const FORCE_LOAD_INTERVALS: usize = 50;

/// A command that could not complete.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Core(#[from] Error),
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        Self::Input(e.to_string())
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) | Self::Io { .. } => EXIT_INVALID_INPUT,
            Self::Core(e) => match e {
                Error::NotSelfStressed(_) | Error::NotConjugate { .. } => EXIT_CHECK_FAILED,
                Error::DegenerateBasis { .. }
                | Error::Irregular(_)
                | Error::Divergence { .. }
                | Error::NonFinite { .. }
                | Error::NonFiniteStage { .. } => EXIT_DEGENERATE,
                _ => EXIT_INVALID_INPUT,
            },
        }
    }
}

type Outcome = Result<i32, Failure>;

pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Validate(a) => validate(a, out),
        Command::Solve(a) => solve(a, out, err),
        Command::Check(a) => check(a, out),
        Command::Lift(a) => lift(a, out, err),
        Command::Project(a) => project_cmd(a, out, err),
        Command::Onestrip(a) => onestrip(a, out),
        Command::Demo(a) => demo(a, err),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|source| Failure::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|source| Failure::Io { path: path.to_path_buf(), source })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|source| Failure::Io { path: "<stdout>".into(), source })
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn location(r: &RegularityReport) -> String {
    let (curve, t) = if r.min_forward_sine <= r.min_backward_sine { r.min_forward_at } else { r.min_backward_at };
    format!("min sine {:e} at curve {curve}, t = {t}", r.min_sine())
}

#[derive(Serialize)]
struct RegularityDoc {
    pass: bool,
    min_forward: f64,
    min_forward_at: (isize, f64),
    min_backward: f64,
    min_backward_at: (isize, f64),
    min_forward_sine: f64,
    min_backward_sine: f64,
}

fn regularity_doc(r: &RegularityReport) -> RegularityDoc {
    RegularityDoc {
        pass: r.pass,
        min_forward: r.min_forward,
        min_forward_at: r.min_forward_at,
        min_backward: r.min_backward,
        min_backward_at: r.min_backward_at,
        min_forward_sine: r.min_forward_sine,
        min_backward_sine: r.min_backward_sine,
    }
}

fn validate(a: &ValidateArgs, out: &mut dyn Write) -> Outcome {
    let text = read(&a.input)?;
    let fw = if docs::is_sample_dump(&text) {
        docs::load_samples(&text)?.framework().clone()
    } else {
        docs::load_framework(&text, a.grid.panels)?.planar()
    };
    let r = fw.regularity();
    emit(out, &docs::report_json(&regularity_doc(&r)))?;
    Ok(if r.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn parse_mu(text: &str) -> Result<Coordinate, Failure> {
    if let Ok(c) = text.trim().parse::<f64>() {
        if !c.is_finite() {
            return Err(Failure::Input(format!("--mu-minus1 must be finite, got {text}")));
        }
        return Ok(Coordinate::constant(c));
    }
    let doc: docs::CoordDoc = docs::parse(text).map_err(|e| Failure::Input(format!("--mu-minus1: {e}")))?;
    Ok(Coordinate::new(
        doc.poly,
        doc.trig.iter().map(|t| sdlift_core::TrigTerm::new(t.amp, t.freq, t.phase)).collect(),
    )?)
}

#[derive(Serialize)]
struct ResidualSummary {
    residual_max: f64,
    residual_argmax: (usize, f64),
    tol: f64,
    pass: bool,
}

fn solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let fw = docs::load_framework(&read(&a.input)?, a.grid.panels)?.planar();
    let reg = fw.regularity();
    if !reg.pass {
        let _ = writeln!(err, "error: framework is not regular: {}", location(&reg));
        return Ok(EXIT_CHECK_FAILED);
    }
    let lambda0 = a.lambda0.clone().unwrap_or_else(|| vec![1.0; fw.n() + 1]);
    let mu = parse_mu(&a.mu_minus1)?;
    let stress = solve_stress(&fw, &lambda0, |t| mu.value(t))?;
    let report = residual_report(&fw, &stress)?;
    let summary = ResidualSummary {
        residual_max: report.max,
        residual_argmax: report.argmax,
        tol: a.tol,
        pass: report.max < a.tol,
    };
    let doc = docs::save_stress(&stress);
    match &a.output {
        Some(p) => {
            write_file(p, &doc)?;
            emit(out, &docs::report_json(&summary))?;
        }
        None => {
            emit(out, &doc)?;
            let _ = writeln!(err, "residual {:e} at curve {}, t = {}", report.max, report.argmax.0, report.argmax.1);
        }
    }
    Ok(if summary.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Framework and stress documents loaded on the stress grid.
fn load_pair(input: &Path, stress: &Path) -> Result<(Framework, StressField), Failure> {
    let stress = docs::load_stress(&read(stress)?)?;
    let fw = docs::load_framework(&read(input)?, stress.grid().panels())?.planar();
    if fw.n() != stress.n() || (fw.t_end() - stress.grid().t_end()).abs() > 0.0 {
        return Err(Failure::Input(format!(
            "stress (n = {}, T = {}) does not match framework (n = {}, T = {})",
            stress.n(),
            stress.grid().t_end(),
            fw.n(),
            fw.t_end()
        )));
    }
    Ok((fw, stress))
}

/// Report of the `check` command.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckReport {
    pub tol: f64,
    pub residual_max: f64,
    pub residual_argmax: (usize, f64),
    /// Largest `|S_i(a, b)| / scale` over the random intervals.
    pub force_load_max: f64,
    /// Largest path spread divided by the height scale.
    pub spread_max: f64,
    pub height_scale: f64,
    pub pass: bool,
}

pub fn check_report(
    fw: &Framework,
    stress: &StressField,
    paths: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport, Failure> {
    let residual = residual_report(fw, stress)?;
    let grid = stress.grid();
    let last = grid.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut force_load_max = 0.0f64;
    for i in 0..=fw.n() {
        for _ in 0..FORCE_LOAD_INTERVALS {
            let (p, q) = (rng.gen_range(0..=last), rng.gen_range(0..=last));
            let f = force_load(fw, stress, i, grid.node(p.min(q)), grid.node(p.max(q)))?;
            if f.scale > 0.0 {
                force_load_max = force_load_max.max(f.load.norm() / f.scale);
            }
        }
    }
    let heights = lift_heights(fw, stress)?;
    let height_scale = heights.z_rows().iter().flatten().fold(0.0f64, |m, z| m.max(z.abs()));
    let mut spread = 0.0f64;
    if paths >= 2 {
        for k in 0..=fw.n() {
            let set = random_paths(k, last, paths, seed.wrapping_add(k as u64));
            spread = spread.max(path_independence_spread(fw, stress, &set)?.spread);
        }
    }
    let spread_max = if height_scale > 0.0 { spread / height_scale } else { spread };
    Ok(CheckReport {
        tol,
        residual_max: residual.max,
        residual_argmax: residual.argmax,
        force_load_max,
        spread_max,
        height_scale,
        pass: residual.max < tol && force_load_max < tol && spread_max < tol,
    })
}

fn check(a: &CheckArgs, out: &mut dyn Write) -> Outcome {
    let (fw, stress) = load_pair(&a.input, &a.stress)?;
    let report = check_report(&fw, &stress, a.paths, a.seed, a.tol)?;
    let text = docs::report_json(&report);
    match &a.output {
        Some(p) => write_file(p, &text)?,
        None => emit(out, &text)?,
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn timestamp(reproducible: bool) -> Option<u64> {
    if reproducible {
        return None;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

fn lift(a: &LiftArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (input, stress_text) = (read(&a.input)?, read(&a.stress)?);
    let (fw, stress) = load_pair(&a.input, &a.stress)?;
    let surface: SampledSurface = if a.force {
        let mut s = lift_heights(&fw, &stress)?;
        s.path_dependent = residual_report(&fw, &stress)?.max >= a.tol;
        if s.path_dependent {
            let _ = writeln!(err, "warning: stress is not a self-stress; heights are path-dependent");
        }
        s
    } else {
        build_lifting(&fw, &stress, a.tol)?
    };
    let source = docs::source_hash(&[input.as_bytes(), stress_text.as_bytes()]);
    let obj = || docs::obj(&surface, &source, timestamp(a.reproducible));
    match &a.output {
        Some(stem) => {
            write_file(&with_suffix(stem, ".obj"), &obj())?;
            write_file(&with_suffix(stem, ".json"), &docs::save_samples(&surface))?;
        }
        None => match a.format {
            Format::Obj => emit(out, &obj())?,
            Format::Json => emit(out, &docs::save_samples(&surface))?,
            Format::Csv => return Err(Failure::Input("lift writes json or obj".into())),
        },
    }
    let conj = conjugacy_residual(&SemiDiscreteSurface3D::Sampled(surface));
    let _ = writeln!(err, "conjugacy residual {conj:e}");
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ProjectionDoc {
    framework: docs::FrameworkDoc,
    stress: docs::StressDoc,
    strip_defect: f64,
    conjugacy_residual: f64,
    residual_max: f64,
}

fn load_surface(text: &str, panels: usize) -> Result<SemiDiscreteSurface3D, Failure> {
    if docs::is_sample_dump(text) {
        return Ok(SemiDiscreteSurface3D::Sampled(docs::load_samples(text)?));
    }
    match docs::load_framework(text, panels)? {
        Geometry::Spatial(s) => Ok(SemiDiscreteSurface3D::Analytic(s)),
        Geometry::Planar(_) => Err(Failure::Input("dimension: project needs a 3-dimensional surface".into())),
    }
}

fn project_cmd(a: &ProjectArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let surface = load_surface(&read(&a.input)?, a.grid.panels)?;
    let conj = conjugacy_residual(&surface);
    let proj = project(&surface)?;
    let stress = induced_stress(&proj, a.tol)?;
    let fw = proj.framework();
    let residual = residual_report(fw, &stress)?;
    let (defect, _, _) = proj.max_strip_defect();
    let _ = writeln!(err, "strip defect {defect:e}, conjugacy residual {conj:e}, residual {:e}", residual.max);
    match &a.output {
        Some(stem) => {
            write_file(&with_suffix(stem, ".framework.json"), &docs::save_framework(fw))?;
            write_file(&with_suffix(stem, ".stress.json"), &docs::save_stress(&stress))?;
        }
        None => {
            let stress_doc: docs::StressDoc = docs::parse(&docs::save_stress(&stress))?;
            emit(
                out,
                &docs::report_json(&ProjectionDoc {
                    framework: docs::framework_doc(fw),
                    stress: stress_doc,
                    strip_defect: defect,
                    conjugacy_residual: conj,
                    residual_max: residual.max,
                }),
            )?;
        }
    }
    Ok(if conj < a.tol { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn onestrip(a: &OnestripArgs, out: &mut dyn Write) -> Outcome {
    let fw = docs::load_framework(&read(&a.input)?, a.grid.panels)?.planar();
    if fw.n() != 1 {
        return Err(Failure::Input(format!("n: the one-strip test needs n = 1, got {}", fw.n())));
    }
    let report = onestrip_verify(&fw, a.tol)?;
    let text = match a.format {
        Format::Json => docs::onestrip_json(&report, a.tol),
        Format::Csv => docs::onestrip_csv(&report),
        Format::Obj => return Err(Failure::Input("onestrip writes json or csv".into())),
    };
    match &a.output {
        Some(p) => write_file(p, &text)?,
        None => emit(out, &text)?,
    }
    Ok(if report.verdict { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn demo(a: &DemoArgs, err: &mut dyn Write) -> Outcome {
    let params = BuiltinParams { n: a.n, seed: a.seed, amplitude: a.amplitude };
    let scenario = builtin(&a.name, &params)?;
    fs::create_dir_all(&a.output).map_err(|source| Failure::Io { path: a.output.clone(), source })?;
    let path = |f: &str| a.output.join(f);
    match scenario {
        Builtin::Spatial(s) => {
            let s = s.with_grid(a.grid.panels)?;
            write_file(&path("surface.json"), &docs::save_surface(&s))?;
            write_file(&path("framework.json"), &docs::save_framework(&s.planar()))?;
            let proj = project(&SemiDiscreteSurface3D::Analytic(s))?;
            match induced_stress(&proj, CONJUGACY_TOL) {
                Ok(stress) => write_file(&path("stress.json"), &docs::save_stress(&stress))?,
                Err(Error::NotConjugate { defect, curve, t }) => {
                    let _ = writeln!(err, "note: surface is not conjugate (defect {defect:e} at curve {curve}, t = {t}); no stress written");
                }
                Err(e) => return Err(e.into()),
            }
        }
        Builtin::Planar(fw) => {
            let fw = fw.with_grid(a.grid.panels)?;
            write_file(&path("framework.json"), &docs::save_framework(&fw))?;
            let stress = solve_stress(&fw, &vec![1.0; fw.n() + 1], |_| 0.0)?;
            let r = residual_report(&fw, &stress)?;
            if r.max >= DEFAULT_RESIDUAL_TOL {
                let _ = writeln!(err, "warning: solved stress residual {:e}", r.max);
            }
            write_file(&path("stress.json"), &docs::save_stress(&stress))?;
        }
    }
    Ok(EXIT_OK)
}
