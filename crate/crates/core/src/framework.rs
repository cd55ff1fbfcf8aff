//! Analytic curves with exact jets, and the planar semi-discrete framework
//! `f_{-1}, ..., f_{n+1}` on `[0, T]`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geomcore::{regularity_report, RegularityReport, Vec2, Vec3};
use crate::numerics::{Grid, DEFAULT_PANELS};

pub const MAX_POLY_DEGREE: usize = 8;
pub const MAX_TRIG_TERMS: usize = 16;

/// `amp * cos(freq * t + phase)`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
}

impl TrigTerm {
    pub const fn new(amp: f64, freq: f64, phase: f64) -> Self {
        Self { amp, freq, phase }
    }
}

/// One coordinate function: a polynomial plus a sum of cosine terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Coordinate {
    /// Coefficients `a0, a1, ...` of `a0 + a1 t + ...`.
    pub poly: Vec<f64>,
    pub trig: Vec<TrigTerm>,
}

impl Coordinate {
    pub fn new(poly: Vec<f64>, trig: Vec<TrigTerm>) -> Result<Self> {
        let c = Self { poly, trig };
        c.validate()?;
        Ok(c)
    }

    pub fn constant(c: f64) -> Self {
        Self { poly: alloc::vec![c], trig: Vec::new() }
    }

    pub fn poly(poly: &[f64]) -> Self {
        Self { poly: poly.to_vec(), trig: Vec::new() }
    }

    pub fn cos(amp: f64, freq: f64, phase: f64) -> Self {
        Self { poly: Vec::new(), trig: alloc::vec![TrigTerm::new(amp, freq, phase)] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.poly.len() > MAX_POLY_DEGREE + 1 {
            return Err(Error::InvalidCoefficients(format!(
                "polynomial degree {} exceeds {MAX_POLY_DEGREE}",
                self.poly.len() - 1
            )));
        }
        if self.trig.len() > MAX_TRIG_TERMS {
            return Err(Error::InvalidCoefficients(format!(
                "{} trigonometric terms exceed {MAX_TRIG_TERMS}",
                self.trig.len()
            )));
        }
        let finite = self.poly.iter().all(|v| v.is_finite())
            && self.trig.iter().all(|t| t.amp.is_finite() && t.freq.is_finite() && t.phase.is_finite());
        if !finite {
            return Err(Error::InvalidCoefficients("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Value and derivatives of orders one to three at `t`.
    pub fn derivatives(&self, t: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (m, v) in out.iter_mut().enumerate() {
            *v = horner_shifted(&self.poly, m, t);
        }
        for term in &self.trig {
            let (s, c) = libm::sincos(term.freq * t + term.phase);
            let w = term.freq;
            out[0] += term.amp * c;
            out[1] -= term.amp * w * s;
            out[2] -= term.amp * w * w * c;
            out[3] += term.amp * w * w * w * s;
        }
        out
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivatives(t)[0]
    }

    /// `s * self`
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            poly: self.poly.iter().map(|a| a * s).collect(),
            trig: self.trig.iter().map(|t| TrigTerm::new(t.amp * s, t.freq, t.phase)).collect(),
        }
    }

    /// `self + other`, merging polynomial coefficients and concatenating
    /// trigonometric terms.
    pub fn plus(&self, other: &Self) -> Self {
        let len = self.poly.len().max(other.poly.len());
        let poly = (0..len)
            .map(|k| self.poly.get(k).copied().unwrap_or(0.0) + other.poly.get(k).copied().unwrap_or(0.0))
            .collect();
        let mut trig = self.trig.clone();
        trig.extend_from_slice(&other.trig);
        Self { poly, trig }
    }

    /// `self + c`
    pub fn shifted(&self, c: f64) -> Self {
        self.plus(&Self::constant(c))
    }
}

/// `d^m/dt^m` of the polynomial with coefficients `poly` at `t`.
fn horner_shifted(poly: &[f64], m: usize, t: f64) -> f64 {
    let mut acc = 0.0;
    for k in (m..poly.len()).rev() {
        let mut f = 1.0;
        for r in 0..m {
            f *= (k - r) as f64;
        }
        acc = acc * t + poly[k] * f;
    }
    acc
}

/// Position and first three derivatives of a curve at one parameter.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CurveJet<V> {
    pub p: V,
    pub d1: V,
    pub d2: V,
    pub d3: V,
}

pub type Jet2 = CurveJet<Vec2>;
pub type Jet3 = CurveJet<Vec3>;

impl Jet2 {
    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }
}

impl Jet3 {
    pub fn xy(&self) -> Jet2 {
        Jet2 { p: self.p.xy(), d1: self.d1.xy(), d2: self.d2.xy(), d3: self.d3.xy() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarCurve {
    pub x: Coordinate,
    pub y: Coordinate,
}

impl PlanarCurve {
    pub fn new(x: Coordinate, y: Coordinate) -> Self {
        Self { x, y }
    }

    pub fn jet(&self, t: f64) -> Jet2 {
        let x = self.x.derivatives(t);
        let y = self.y.derivatives(t);
        Jet2 {
            p: Vec2::new(x[0], y[0]),
            d1: Vec2::new(x[1], y[1]),
            d2: Vec2::new(x[2], y[2]),
            d3: Vec2::new(x[3], y[3]),
        }
    }

    pub fn translated(&self, v: Vec2) -> Self {
        Self::new(self.x.shifted(v.x), self.y.shifted(v.y))
    }

    /// The curve rotated about the origin by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = libm::sincos(angle);
        Self::new(self.x.scaled(c).plus(&self.y.scaled(-s)), self.x.scaled(s).plus(&self.y.scaled(c)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceCurve {
    pub x: Coordinate,
    pub y: Coordinate,
    pub z: Coordinate,
}

impl SpaceCurve {
    pub fn new(x: Coordinate, y: Coordinate, z: Coordinate) -> Self {
        Self { x, y, z }
    }

    pub fn jet(&self, t: f64) -> Jet3 {
        let x = self.x.derivatives(t);
        let y = self.y.derivatives(t);
        let z = self.z.derivatives(t);
        Jet3 {
            p: Vec3::new(x[0], y[0], z[0]),
            d1: Vec3::new(x[1], y[1], z[1]),
            d2: Vec3::new(x[2], y[2], z[2]),
            d3: Vec3::new(x[3], y[3], z[3]),
        }
    }

    pub fn planar(&self) -> PlanarCurve {
        PlanarCurve::new(self.x.clone(), self.y.clone())
    }
}

/// A planar semi-discrete framework: curves `f_{-1}, ..., f_{n+1}` on
/// `[0, T]` and the grid used to sample them.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework {
    t_end: f64,
    curves: Vec<PlanarCurve>,
    grid: Grid,
}

impl Framework {
    /// `curves[0]` is `f_{-1}`; there must be at least three curves.
    pub fn new(t_end: f64, curves: Vec<PlanarCurve>) -> Result<Self> {
        Self::with_panels(t_end, curves, DEFAULT_PANELS)
    }

    pub fn with_panels(t_end: f64, curves: Vec<PlanarCurve>, panels: usize) -> Result<Self> {
        if curves.len() < 3 {
            return Err(Error::CurveCount(curves.len()));
        }
        for c in &curves {
            c.x.validate()?;
            c.y.validate()?;
        }
        let grid = Grid::new(t_end, panels)?;
        Ok(Self { t_end, curves, grid })
    }

    /// The same framework sampled with `panels` panels.
    pub fn with_grid(&self, panels: usize) -> Result<Self> {
        Ok(Self { grid: Grid::new(self.t_end, panels)?, ..self.clone() })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Index of the last interior curve; curves run `-1..=n+1`.
    pub fn n(&self) -> usize {
        self.curves.len() - 3
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn curves(&self) -> &[PlanarCurve] {
        &self.curves
    }

    pub(crate) fn check_index(&self, i: isize, min: isize, max: isize) -> Result<()> {
        if i < min || i > max {
            Err(Error::IndexOutOfRange { index: i, min, max })
        } else {
            Ok(())
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.t_end;
        if !(t >= -slack && t <= self.t_end + slack) {
            Err(Error::ParameterOutOfRange { t, t_end: self.t_end })
        } else {
            Ok(())
        }
    }

    pub fn curve(&self, i: isize) -> Result<&PlanarCurve> {
        self.check_index(i, -1, self.n() as isize + 1)?;
        Ok(&self.curves[(i + 1) as usize])
    }

    /// Exact jet of `f_i` at `t`.
    pub fn eval(&self, i: isize, t: f64) -> Result<Jet2> {
        self.check_t(t)?;
        Ok(self.curve(i)?.jet(t))
    }

    /// Unchecked variant of [`Framework::eval`] for validated hot loops.
    pub(crate) fn jet(&self, i: isize, t: f64) -> Jet2 {
        self.curves[(i + 1) as usize].jet(t)
    }

    /// `Δf_i(t) = f_{i+1}(t) − f_i(t)` for `-1 <= i <= n`.
    pub fn delta(&self, i: isize, t: f64) -> Result<Vec2> {
        self.check_index(i, -1, self.n() as isize)?;
        Ok(self.eval(i + 1, t)?.p - self.eval(i, t)?.p)
    }

    /// Point of the ruled interpolation `(1 + i − u) f_i(v) + (u − i) f_{i+1}(v)`
    /// with `i = floor(u)`, for `u ∈ [-1, n+1]`.
    pub fn ruled_point(&self, u: f64, v: f64) -> Result<Vec2> {
        let top = self.n() as f64 + 1.0;
        if !(u >= -1.0 && u <= top) {
            return Err(Error::IndexOutOfRange { index: libm::floor(u) as isize, min: -1, max: top as isize });
        }
        self.check_t(v)?;
        let mut i = libm::floor(u) as isize;
        if u == top {
            i -= 1;
        }
        let a = self.jet(i, v).p;
        let b = self.jet(i + 1, v).p;
        let s = u - i as f64;
        Ok((1.0 - s) * a + s * b)
    }

    /// Exact jets of every curve at every node of the framework grid.
    pub fn sample_jets(&self) -> GridJets {
        let jets = self.curves.iter().map(|c| self.grid.nodes().map(|t| c.jet(t)).collect()).collect();
        GridJets { jets }
    }

    pub fn regularity(&self) -> RegularityReport {
        regularity_report(self, &self.grid)
    }

    /// Every curve translated by `v`.
    pub fn translated(&self, v: Vec2) -> Self {
        Self { curves: self.curves.iter().map(|c| c.translated(v)).collect(), ..self.clone() }
    }

    /// Every curve rotated about the origin by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        Self { curves: self.curves.iter().map(|c| c.rotated(angle)).collect(), ..self.clone() }
    }

    /// The framework with curve order reversed, `g_k = f_{n-k}`.
    pub fn reversed(&self) -> Self {
        let mut curves = self.curves.clone();
        curves.reverse();
        Self { curves, ..self.clone() }
    }
}

/// Jets of curves `-1..=n+1` sampled on a grid.
#[derive(Clone, Debug)]
pub struct GridJets {
    jets: Vec<Vec<Jet2>>,
}

impl GridJets {
    pub fn at(&self, i: isize, j: usize) -> &Jet2 {
        &self.jets[(i + 1) as usize][j]
    }

    /// `Δf_i` at node `j`.
    pub fn delta(&self, i: isize, j: usize) -> Vec2 {
        self.at(i + 1, j).p - self.at(i, j).p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(c: f64) -> PlanarCurve {
        PlanarCurve::new(Coordinate::poly(&[0.0, 1.0]), Coordinate::constant(c))
    }

    fn parallel_lines(n: usize) -> Framework {
        Framework::new(1.0, (0..n + 3).map(|k| line(k as f64 - 1.0)).collect()).unwrap()
    }

    #[test]
    fn line_jet() {
        let j = line(2.0).jet(0.75);
        assert_eq!(j.p, Vec2::new(0.75, 2.0));
        assert_eq!(j.d1, Vec2::new(1.0, 0.0));
        assert_eq!(j.d2, Vec2::ZERO);
        assert_eq!(j.d3, Vec2::ZERO);
    }

    #[test]
    fn circle_jet_at_zero() {
        let c =
            PlanarCurve::new(Coordinate::cos(1.0, 1.0, 0.0), Coordinate::cos(1.0, 1.0, -core::f64::consts::FRAC_PI_2));
        let j = c.jet(0.0);
        let close = |a: Vec2, b: Vec2| (a - b).norm() < 1e-15;
        assert!(close(j.p, Vec2::new(1.0, 0.0)));
        assert!(close(j.d1, Vec2::new(0.0, 1.0)));
        assert!(close(j.d2, Vec2::new(-1.0, 0.0)));
        assert!(close(j.d3, Vec2::new(0.0, -1.0)));
    }

    #[test]
    fn polynomial_derivatives() {
        // 2 - t + 3t^2 + 0.5t^4
        let c = Coordinate::poly(&[2.0, -1.0, 3.0, 0.0, 0.5]);
        let t: f64 = 1.3;
        let d = c.derivatives(t);
        assert!((d[0] - (2.0 - t + 3.0 * t * t + 0.5 * t.powi(4))).abs() < 1e-13);
        assert!((d[1] - (-1.0 + 6.0 * t + 2.0 * t.powi(3))).abs() < 1e-13);
        assert!((d[2] - (6.0 + 6.0 * t * t)).abs() < 1e-13);
        assert!((d[3] - 12.0 * t).abs() < 1e-13);
    }

    #[test]
    fn coefficient_caps() {
        assert!(Coordinate::new(alloc::vec![0.0; 10], Vec::new()).is_err());
        assert!(Coordinate::new(alloc::vec![0.0; 9], alloc::vec![TrigTerm::new(1.0, 1.0, 0.0); 17]).is_err());
        assert!(Coordinate::new(alloc::vec![f64::NAN], Vec::new()).is_err());
    }

    #[test]
    fn delta_of_parallel_lines() {
        let fw = parallel_lines(2);
        for i in -1..=2 {
            assert_eq!(fw.delta(i, 0.4).unwrap(), Vec2::new(0.0, 1.0));
        }
        assert!(fw.delta(3, 0.4).is_err());
        assert!(fw.eval(4, 0.4).is_err());
        assert!(fw.eval(0, 1.5).is_err());
    }

    #[test]
    fn ruled_point_interpolates() {
        let fw = parallel_lines(1);
        assert_eq!(fw.ruled_point(0.0, 0.5).unwrap(), fw.eval(0, 0.5).unwrap().p);
        assert_eq!(fw.ruled_point(2.0, 0.5).unwrap(), fw.eval(2, 0.5).unwrap().p);
        let mid = fw.ruled_point(0.5, 0.5).unwrap();
        assert_eq!(mid, Vec2::new(0.5, 0.5));
        let (a, b, c) =
            (fw.ruled_point(0.2, 0.3).unwrap(), fw.ruled_point(0.5, 0.3).unwrap(), fw.ruled_point(0.8, 0.3).unwrap());
        assert!((a + c - 2.0 * b).norm() < 1e-15);
        assert!(fw.ruled_point(2.5, 0.3).is_err());
    }

    #[test]
    fn too_few_curves() {
        assert!(matches!(Framework::new(1.0, alloc::vec![line(0.0), line(1.0)]), Err(Error::CurveCount(2))));
    }
}
