//! Orthogonal projection of conjugate semi-discrete surfaces and the
//! self-stress they induce on the projected framework.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::framework::{Coordinate, Framework, GridJets, Jet2};
use crate::geomcore::{det2, Vec2, Vec3};
use crate::lifting::{SampledSurface, SemiDiscreteSurface3D};
use crate::numerics::{Grid, EPS_REG};
use crate::statics::StressField;

/// Default tolerance of the conjugacy test in [`induced_stress`].
pub const CONJUGACY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
enum Heights {
    Analytic(Vec<Coordinate>),
    Sampled(SampledSurface),
}

/// The planar part `f` of a surface `F = (f, z)` together with its heights.
#[derive(Clone, Debug)]
pub struct ProjectedSurface {
    framework: Framework,
    jets: GridJets,
    heights: Heights,
}

/// `(z, ż, z̈)`
pub type HeightJet = [f64; 3];

pub fn project(surface: &SemiDiscreteSurface3D) -> Result<ProjectedSurface> {
    let framework = surface.planar();
    let report = framework.regularity();
    if !report.pass {
        return Err(Error::Irregular(Box::new(report)));
    }
    let heights = match surface {
        SemiDiscreteSurface3D::Analytic(s) => Heights::Analytic(s.curves().iter().map(|c| c.z.clone()).collect()),
        SemiDiscreteSurface3D::Sampled(s) => Heights::Sampled(s.clone()),
    };
    Ok(ProjectedSurface { jets: framework.sample_jets(), framework, heights })
}

impl ProjectedSurface {
    pub fn framework(&self) -> &Framework {
        &self.framework
    }

    pub fn grid(&self) -> &Grid {
        self.framework.grid()
    }

    pub fn n(&self) -> usize {
        self.framework.n()
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.heights, Heights::Analytic(_))
    }

    pub fn height_jet(&self, i: isize, j: usize) -> HeightJet {
        match &self.heights {
            Heights::Analytic(z) => {
                let d = z[(i + 1) as usize].derivatives(self.grid().node(j));
                [d[0], d[1], d[2]]
            }
            Heights::Sampled(s) => s.z_jet(i, j),
        }
    }

    /// Normalized conjugacy defect of strip `i` (`-1..=n`) at node `j`.
    pub fn strip_defect(&self, i: isize, j: usize) -> f64 {
        let (f0, f1) = (self.jets.at(i, j), self.jets.at(i + 1, j));
        strip_condition(f0, f1, self.height_jet(i, j), self.height_jet(i + 1, j))
    }

    /// Both developability conditions at curve `i`: the strip `i` and the
    /// strip `i-1` versions, each normalized by its largest term.
    pub fn developability_defect(&self, i: isize, j: usize) -> Result<(f64, f64)> {
        self.framework.check_index(i, 0, self.n() as isize)?;
        Ok((self.strip_defect(i, j), self.strip_defect(i - 1, j)))
    }

    /// Worst strip defect over all strips and nodes, with its location.
    pub fn max_strip_defect(&self) -> (f64, isize, f64) {
        let mut worst = (0.0, -1, 0.0);
        for j in 0..self.grid().len() {
            for i in -1..=self.n() as isize {
                let d = self.strip_defect(i, j);
                if d > worst.0 {
                    worst = (d, i, self.grid().node(j));
                }
            }
        }
        worst
    }

    /// Lifted points `F_i(t_j)`.
    pub fn point(&self, i: isize, j: usize) -> Vec3 {
        self.jets.at(i, j).p.lift(self.height_jet(i, j)[0])
    }
}

/// `det(ḟ_i, ḟ_{i+1}) Δz_i − det(Δf_i, ḟ_{i+1}) ż_i + det(Δf_i, ḟ_i) ż_{i+1}`
/// over the largest of its terms, floored relative to the norm bound.
fn strip_condition(f0: &Jet2, f1: &Jet2, z0: HeightJet, z1: HeightJet) -> f64 {
    let df = f1.p - f0.p;
    let dz = z1[0] - z0[0];
    let terms = [det2(f0.d1, f1.d1) * dz, -det2(df, f1.d1) * z0[1], det2(df, f0.d1) * z1[1]];
    let spatial = |p: Vec2, z: f64| libm::sqrt(p.dot(p) + z * z);
    let geometric = spatial(df, dz) * spatial(f0.d1, z0[1]) * spatial(f1.d1, z1[1]);
    normalized(terms.iter().sum(), &terms, STRIP_FLOOR * geometric)
}

/// Fraction of `|ΔF_i| |Ḟ_i| |Ḟ_{i+1}|` below which strip terms count as
/// structurally zero. Parallel neighbouring tangents make every term vanish,
/// and quadrature noise in the heights would otherwise dominate.
pub const STRIP_FLOOR: f64 = 1e-3;

/// `|value| / max(max |term|, floor)`, or 0 when both vanish.
pub(crate) fn normalized(value: f64, terms: &[f64], floor: f64) -> f64 {
    let largest = terms.iter().fold(0.0f64, |m, t| m.max(libm::fabs(*t)));
    let scale = largest.max(floor);
    if scale > 0.0 {
        libm::fabs(value) / scale
    } else {
        0.0
    }
}

fn checked(d: f64, a: f64, b: f64, curve: isize, t: f64) -> Result<f64> {
    if libm::fabs(d) <= EPS_REG * a * b {
        return Err(Error::DegenerateBasis { det: d, curve: Some(curve), t: Some(t) });
    }
    Ok(d)
}

/// `λ_i` from the jets of curves `i-1, i, i+1` and their heights.
fn lambda_from(prev: &Jet2, cur: &Jet2, next: &Jet2, z: [HeightJet; 3], i: isize, t: f64) -> Result<f64> {
    let dp = cur.p - prev.p;
    let dc = next.p - cur.p;
    let b = checked(det2(dc, cur.d1), dc.norm(), cur.d1.norm(), i, t)?;
    let c_bar = checked(det2(dp, cur.d1), dp.norm(), cur.d1.norm(), i, t)?;
    let a = det2(dp, dc);
    let dz_prev = z[1][0] - z[0][0];
    let dz = z[2][0] - z[1][0];
    Ok(a * z[1][1] / (b * c_bar) + dz_prev / c_bar - dz / b)
}

/// `μ_i` from the jets of curves `i, i+1` and their heights.
fn mu_from(cur: &Jet2, next: &Jet2, z: [HeightJet; 2], i: isize, t: f64) -> Result<f64> {
    let dc = next.p - cur.p;
    let b = checked(det2(dc, cur.d1), dc.norm(), cur.d1.norm(), i, t)?;
    let g = det2(dc, cur.d2);
    let j = det2(cur.d1, cur.d2);
    let dz = z[1][0] - z[0][0];
    Ok((g * z[0][1] - b * z[0][2] - j * dz) / (b * b))
}

/// The stress `λ_i` (`0..=n`), `μ_i` (`-1..=n`) induced by a conjugate
/// surface. Inputs whose worst strip defect exceeds `tol` are refused.
pub fn induced_stress(proj: &ProjectedSurface, tol: f64) -> Result<StressField> {
    let (defect, curve, t) = proj.max_strip_defect();
    if !(defect <= tol) {
        return Err(Error::NotConjugate { defect, curve, t });
    }
    induced_stress_unchecked(proj)
}

/// [`induced_stress`] without the conjugacy test.
pub fn induced_stress_unchecked(proj: &ProjectedSurface) -> Result<StressField> {
    let n = proj.n() as isize;
    let len = proj.grid().len();
    let mut lambda = alloc::vec![Vec::with_capacity(len); n as usize + 1];
    let mut mu = alloc::vec![Vec::with_capacity(len); n as usize + 2];
    for j in 0..len {
        let t = proj.grid().node(j);
        let jet = |i: isize| proj.jets.at(i, j);
        let z = |i: isize| proj.height_jet(i, j);
        for i in 0..=n {
            lambda[i as usize].push(lambda_from(jet(i - 1), jet(i), jet(i + 1), [z(i - 1), z(i), z(i + 1)], i, t)?);
        }
        for i in -1..=n {
            mu[(i + 1) as usize].push(mu_from(jet(i), jet(i + 1), [z(i), z(i + 1)], i, t)?);
        }
    }
    StressField::new(proj.grid().clone(), lambda, mu)
}

impl ProjectedSurface {
    /// Induced `λ_i(t)` at an arbitrary parameter; needs analytic heights.
    pub fn lambda_at(&self, i: isize, t: f64) -> Result<f64> {
        let z = self.analytic_heights()?;
        self.framework.check_index(i, 0, self.n() as isize)?;
        let jet = |k: isize| self.framework.jet(k, t);
        let h = |k: isize| -> HeightJet {
            let d = z[(k + 1) as usize].derivatives(t);
            [d[0], d[1], d[2]]
        };
        lambda_from(&jet(i - 1), &jet(i), &jet(i + 1), [h(i - 1), h(i), h(i + 1)], i, t)
    }

    /// Induced `μ_i(t)` at an arbitrary parameter; needs analytic heights.
    pub fn mu_at(&self, i: isize, t: f64) -> Result<f64> {
        let z = self.analytic_heights()?;
        self.framework.check_index(i, -1, self.n() as isize)?;
        let jet = |k: isize| self.framework.jet(k, t);
        let h = |k: isize| -> HeightJet {
            let d = z[(k + 1) as usize].derivatives(t);
            [d[0], d[1], d[2]]
        };
        mu_from(&jet(i), &jet(i + 1), [h(i), h(i + 1)], i, t)
    }

    fn analytic_heights(&self) -> Result<&[Coordinate]> {
        match &self.heights {
            Heights::Analytic(z) => Ok(z),
            Heights::Sampled(_) => Err(Error::Shape("sampled heights are only known at grid nodes".into())),
        }
    }
}

/// Least-squares plane through `points`; returns the largest distance to it
/// divided by the diameter of the point set.
pub fn plane_fit_distance(points: &[Vec3]) -> f64 {
    if points.len() < 4 {
        return 0.0;
    }
    let m = points.len() as f64;
    let c = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p) * (1.0 / m);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = *p - c;
        let v = Vector3::new(d.x, d.y, d.z);
        cov += v * v.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imin();
    let col = eig.eigenvectors.column(k);
    let normal = Vec3::new(col[0], col[1], col[2]);
    let mut diameter = 0.0f64;
    for (a, p) in points.iter().enumerate() {
        for q in &points[a + 1..] {
            diameter = diameter.max((*p - *q).norm());
        }
    }
    if diameter == 0.0 {
        return 0.0;
    }
    points.iter().map(|p| libm::fabs((*p - c).dot(normal))).fold(0.0, f64::max) / diameter
}
