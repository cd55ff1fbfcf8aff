use alloc::boxed::Box;
use alloc::string::String;

use crate::geomcore::RegularityReport;
use crate::statics::ResidualReport;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value of {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("non-finite derivative in Runge-Kutta stage {stage} at t = {t}")]
    NonFiniteStage { stage: u8, t: f64 },

    #[error("degenerate basis (det = {det:e}){}", location(*.curve, *.t))]
    DegenerateBasis { det: f64, curve: Option<isize>, t: Option<f64> },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("invalid interval [{a}, {b}] with {panels} panels")]
    InvalidInterval { a: f64, b: f64, panels: usize },

    #[error("curve index {index} outside {min}..={max}")]
    IndexOutOfRange { index: isize, min: isize, max: isize },

    #[error("parameter {t} outside [0, {t_end}]")]
    ParameterOutOfRange { t: f64, t_end: f64 },

    #[error("parameter {t} is not a grid node")]
    OffGrid { t: f64 },

    #[error("framework needs at least 3 curves, got {0}")]
    CurveCount(usize),

    #[error("invalid curve coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid path: {0}")]
    InvalidPath(&'static str),

    #[error("paths target different points")]
    MismatchedTargets,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("stress is not a self-stress (normalized residual {:e})", .0.max)]
    NotSelfStressed(Box<ResidualReport>),

    #[error("surface is not conjugate (defect {defect:e} at curve {curve}, t = {t})")]
    NotConjugate { defect: f64, curve: isize, t: f64 },

    #[error("projection is not regular (min sine {:e})", .0.min_sine())]
    Irregular(Box<RegularityReport>),

    #[error("stress march diverged at curve {curve}, t = {t}")]
    Divergence { curve: usize, t: f64 },

    #[error("unknown built-in `{0}`")]
    UnknownBuiltin(String),
}

fn location(curve: Option<isize>, t: Option<f64>) -> String {
    match (curve, t) {
        (Some(i), Some(t)) => alloc::format!(" at curve {i}, t = {t}"),
        (None, Some(t)) => alloc::format!(" at t = {t}"),
        (Some(i), None) => alloc::format!(" at curve {i}"),
        (None, None) => String::new(),
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
