//! JSON documents read and written by the command-line tool, plus OBJ export.

use std::fmt::Write as _;

use sdlift_core::framework::{Coordinate, Framework, PlanarCurve, SpaceCurve, TrigTerm};
use sdlift_core::lifting::{AnalyticSurface, SampledSurface};
use sdlift_core::numerics::Grid;
use sdlift_core::onestrip::OneStripReport;
use sdlift_core::statics::StressField;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A document that failed to parse or validate.
#[derive(Debug, thiserror::Error, PartialEq)]
#[error("{path}: {message}{}", location(*.line, *.column))]
pub struct DocError {
    /// Field path such as `curves[2].x.poly[0]`, or `document`.
    pub path: String,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

fn location(line: usize, column: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" (line {line}, column {column})")
    }
}

impl DocError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into(), line: 0, column: 0 }
    }
}

/// Deserializes `text`, reporting the failing field path and position.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, DocError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.to_string();
        let message = match message.rfind(" at line ") {
            Some(k) => message[..k].to_string(),
            None => message,
        };
        DocError {
            path: if path == "." { "document".into() } else { path },
            message,
            line: inner.line(),
            column: inner.column(),
        }
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrigDoc {
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoordDoc {
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub trig: Vec<TrigDoc>,
}

impl From<&Coordinate> for CoordDoc {
    fn from(c: &Coordinate) -> Self {
        Self {
            poly: c.poly.clone(),
            trig: c.trig.iter().map(|t| TrigDoc { amp: t.amp, freq: t.freq, phase: t.phase }).collect(),
        }
    }
}

impl CoordDoc {
    fn to_coordinate(&self, path: &str) -> Result<Coordinate, DocError> {
        let trig = self.trig.iter().map(|t| TrigTerm::new(t.amp, t.freq, t.phase)).collect();
        Coordinate::new(self.poly.clone(), trig).map_err(|e| DocError::field(path, e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CurveDoc {
    pub index: i64,
    pub x: CoordDoc,
    pub y: CoordDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<CoordDoc>,
}

/// Analytic curves `−1..=n+1` in the plane (`dimension` 2) or in space (3).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FrameworkDoc {
    pub dimension: u8,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
    pub curves: Vec<CurveDoc>,
}

/// Geometry loaded from a framework document.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Planar(Framework),
    Spatial(AnalyticSurface),
}

impl Geometry {
    pub fn planar(&self) -> Framework {
        match self {
            Self::Planar(f) => f.clone(),
            Self::Spatial(s) => s.planar(),
        }
    }
}

/// Checks `T`, `n` and the curve indices shared by both curve documents and
/// returns the curve positions in index order.
fn check_header(dimension: u8, t_end: f64, n: usize, indices: &[i64]) -> Result<Vec<usize>, DocError> {
    if dimension != 2 && dimension != 3 {
        return Err(DocError::field("dimension", format!("must be 2 or 3, got {dimension}")));
    }
    if !(t_end > 0.0) {
        return Err(DocError::field("T", format!("must be positive, got {t_end}")));
    }
    if indices.len() != n + 3 {
        return Err(DocError::field("curves", format!("expected n + 3 = {} curves, got {}", n + 3, indices.len())));
    }
    let mut order = vec![usize::MAX; n + 3];
    for (pos, &index) in indices.iter().enumerate() {
        if index < -1 || index > n as i64 + 1 {
            return Err(DocError::field(format!("curves[{pos}].index"), format!("{index} is outside -1..={}", n + 1)));
        }
        let slot = &mut order[(index + 1) as usize];
        if *slot != usize::MAX {
            return Err(DocError::field(format!("curves[{pos}].index"), format!("duplicate index {index}")));
        }
        *slot = pos;
    }
    Ok(order)
}

pub fn load_framework(text: &str, panels: usize) -> Result<Geometry, DocError> {
    let doc: FrameworkDoc = parse(text)?;
    doc.to_geometry(panels)
}

impl FrameworkDoc {
    pub fn to_geometry(&self, panels: usize) -> Result<Geometry, DocError> {
        let indices: Vec<i64> = self.curves.iter().map(|c| c.index).collect();
        let order = check_header(self.dimension, self.t_end, self.n, &indices)?;
        let mut planar = Vec::with_capacity(order.len());
        let mut spatial = Vec::with_capacity(order.len());
        for pos in order {
            let c = &self.curves[pos];
            let path = |f: &str| format!("curves[{pos}].{f}");
            let x = c.x.to_coordinate(&path("x"))?;
            let y = c.y.to_coordinate(&path("y"))?;
            match (&c.z, self.dimension) {
                (Some(z), 3) => spatial.push(SpaceCurve::new(x, y, z.to_coordinate(&path("z"))?)),
                (None, 2) => planar.push(PlanarCurve::new(x, y)),
                (None, _) => return Err(DocError::field(path("z"), "missing in a 3-dimensional document")),
                (Some(_), _) => return Err(DocError::field(path("z"), "not allowed in a 2-dimensional document")),
            }
        }
        let grid_err = |e: sdlift_core::Error| DocError::field("document", e.to_string());
        Ok(if self.dimension == 2 {
            Geometry::Planar(Framework::with_panels(self.t_end, planar, panels).map_err(grid_err)?)
        } else {
            Geometry::Spatial(AnalyticSurface::with_panels(self.t_end, spatial, panels).map_err(grid_err)?)
        })
    }
}

fn curve_doc(index: usize, x: &Coordinate, y: &Coordinate, z: Option<&Coordinate>) -> CurveDoc {
    CurveDoc { index: index as i64 - 1, x: x.into(), y: y.into(), z: z.map(CoordDoc::from) }
}

pub fn framework_doc(fw: &Framework) -> FrameworkDoc {
    FrameworkDoc {
        dimension: 2,
        t_end: fw.t_end(),
        n: fw.n(),
        curves: fw.curves().iter().enumerate().map(|(k, c)| curve_doc(k, &c.x, &c.y, None)).collect(),
    }
}

pub fn surface_doc(s: &AnalyticSurface) -> FrameworkDoc {
    FrameworkDoc {
        dimension: 3,
        t_end: s.t_end(),
        n: s.n(),
        curves: s.curves().iter().enumerate().map(|(k, c)| curve_doc(k, &c.x, &c.y, Some(&c.z))).collect(),
    }
}

pub fn save_framework(fw: &Framework) -> String {
    to_json(&framework_doc(fw))
}

pub fn save_surface(s: &AnalyticSurface) -> String {
    to_json(&surface_doc(s))
}

/// Stress samples on a grid with `N` panels.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StressDoc {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub panels: usize,
    pub lambda: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
}

pub fn save_stress(s: &StressField) -> String {
    to_json(&StressDoc {
        t_end: s.grid().t_end(),
        n: s.n(),
        panels: s.grid().panels(),
        lambda: s.lambda_rows().to_vec(),
        mu: s.mu_rows().to_vec(),
    })
}

pub fn load_stress(text: &str) -> Result<StressField, DocError> {
    let doc: StressDoc = parse(text)?;
    let grid = Grid::new(doc.t_end, doc.panels).map_err(|e| DocError::field("N", e.to_string()))?;
    if doc.lambda.len() != doc.n + 1 {
        return Err(DocError::field(
            "lambda",
            format!("expected n + 1 = {} rows, got {}", doc.n + 1, doc.lambda.len()),
        ));
    }
    StressField::new(grid, doc.lambda, doc.mu).map_err(|e| DocError::field("document", e.to_string()))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SampleCurveDoc {
    pub index: i64,
    pub x: CoordDoc,
    pub y: CoordDoc,
    pub z: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ddz: Option<Vec<f64>>,
}

/// A lifted surface: analytic planar curves with sampled heights.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SampleDumpDoc {
    pub dimension: u8,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub panels: usize,
    #[serde(default)]
    pub path_dependent: bool,
    pub curves: Vec<SampleCurveDoc>,
}

pub fn save_samples(s: &SampledSurface) -> String {
    let fw = s.framework();
    let curves = fw
        .curves()
        .iter()
        .enumerate()
        .map(|(k, c)| SampleCurveDoc {
            index: k as i64 - 1,
            x: (&c.x).into(),
            y: (&c.y).into(),
            z: s.z_rows()[k].clone(),
            dz: Some(s.dz_rows()[k].clone()),
            ddz: Some(s.ddz_rows()[k].clone()),
        })
        .collect();
    to_json(&SampleDumpDoc {
        dimension: 3,
        t_end: fw.t_end(),
        n: fw.n(),
        panels: fw.grid().panels(),
        path_dependent: s.path_dependent,
        curves,
    })
}

pub fn load_samples(text: &str) -> Result<SampledSurface, DocError> {
    let doc: SampleDumpDoc = parse(text)?;
    let indices: Vec<i64> = doc.curves.iter().map(|c| c.index).collect();
    let order = check_header(doc.dimension, doc.t_end, doc.n, &indices)?;
    if doc.dimension != 3 {
        return Err(DocError::field("dimension", "sample dumps are 3-dimensional"));
    }
    let mut curves = Vec::new();
    let (mut z, mut dz, mut ddz) = (Vec::new(), Vec::new(), Vec::new());
    for &pos in &order {
        let c = &doc.curves[pos];
        let path = |f: &str| format!("curves[{pos}].{f}");
        curves.push(PlanarCurve::new(c.x.to_coordinate(&path("x"))?, c.y.to_coordinate(&path("y"))?));
        z.push(c.z.clone());
        dz.push(c.dz.clone());
        ddz.push(c.ddz.clone());
    }
    let err = |e: sdlift_core::Error| DocError::field("document", e.to_string());
    let fw = Framework::with_panels(doc.t_end, curves, doc.panels).map_err(err)?;
    let derivatives: Option<(Vec<_>, Vec<_>)> = dz.into_iter().zip(ddz).map(|(a, b)| Some((a?, b?))).collect();
    let mut surface = match derivatives {
        Some((dz, ddz)) => SampledSurface::with_derivatives(fw, z, dz, ddz),
        None => SampledSurface::new(fw, z),
    }
    .map_err(err)?;
    surface.path_dependent = doc.path_dependent;
    Ok(surface)
}

/// Whether a 3-dimensional document carries sampled heights.
pub fn is_sample_dump(text: &str) -> bool {
    #[derive(Deserialize)]
    struct Probe {
        #[serde(rename = "N")]
        _panels: usize,
    }
    serde_json::from_str::<Probe>(text).is_ok()
}

/// Hex SHA-256 of the concatenated inputs.
pub fn source_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// One vertex per `(i, t_j)` and one quad per strip cell.
pub fn obj(surface: &SampledSurface, source: &str, timestamp: Option<u64>) -> String {
    let grid = surface.grid();
    let rows = surface.n() + 3;
    let len = grid.len();
    let mut out = String::new();
    let _ = writeln!(out, "# sdlift lifted semi-discrete surface");
    let _ = writeln!(out, "# source sha256 {source}");
    let _ = writeln!(out, "# grid {} panels, {} curves", grid.panels(), rows);
    if surface.path_dependent {
        let _ = writeln!(out, "# path-dependent heights");
    }
    if let Some(ts) = timestamp {
        let _ = writeln!(out, "# created unix {ts}");
    }
    for r in 0..rows {
        for j in 0..len {
            let p = surface.jet_at_node(r as isize - 1, j).p;
            let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
        }
    }
    let vid = |r: usize, j: usize| r * len + j + 1;
    for r in 0..rows - 1 {
        for j in 0..len - 1 {
            let _ = writeln!(out, "f {} {} {} {}", vid(r, j), vid(r + 1, j), vid(r + 1, j + 1), vid(r, j + 1));
        }
    }
    out
}

#[derive(Serialize)]
struct OneStripDoc<'a> {
    tol: f64,
    verdict: bool,
    criterion_max: f64,
    system_residuals: [f64; 4],
    statics_residual: Option<f64>,
    ratio_positive: bool,
    lambda0_scale: f64,
    t: &'a [f64],
    criterion: &'a [f64],
    lambda0: &'a [f64],
    lambda1: &'a [f64],
    mu0: &'a [f64],
}

pub fn onestrip_json(r: &OneStripReport, tol: f64) -> String {
    to_json(&OneStripDoc {
        tol,
        verdict: r.verdict,
        criterion_max: r.criterion_max,
        system_residuals: r.system_residuals,
        statics_residual: r.statics_residual,
        ratio_positive: r.ratio_positive,
        lambda0_scale: r.scale,
        t: &r.t,
        criterion: &r.criterion,
        lambda0: &r.lambda0,
        lambda1: &r.lambda1,
        mu0: &r.mu0,
    })
}

pub fn onestrip_csv(r: &OneStripReport) -> String {
    let mut out = String::from("t,criterion,lambda0,lambda1,mu0\n");
    for j in 0..r.t.len() {
        let _ = writeln!(out, "{},{},{},{},{}", r.t[j], r.criterion[j], r.lambda0[j], r.lambda1[j], r.mu0[j]);
    }
    out
}

pub fn report_json<T: Serialize>(value: &T) -> String {
    to_json(value)
}
