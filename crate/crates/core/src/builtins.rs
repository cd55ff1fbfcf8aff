//! Built-in analytic scenarios used by the demos and the test suites.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::framework::{Coordinate, Framework, PlanarCurve, SpaceCurve, TrigTerm};
use crate::geomcore::{Vec2, Vec3};
use crate::lifting::AnalyticSurface;

pub const BUILTIN_NAMES: [&str; 5] = ["translational3d", "cylinder-strip3d", "circles2d", "perturbed2d", "twisted3d"];

/// Parameter interval shared by every built-in.
pub const DEMO_T: f64 = 1.2;

#[derive(Clone, Debug, PartialEq)]
pub enum Builtin {
    Planar(Framework),
    Spatial(AnalyticSurface),
}

/// Knobs for the parametrized families; ignored by the fixed ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuiltinParams {
    pub n: usize,
    pub seed: u64,
    pub amplitude: f64,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self { n: 1, seed: 1, amplitude: 0.05 }
    }
}

pub fn builtin(name: &str, params: &BuiltinParams) -> Result<Builtin> {
    Ok(match name {
        "translational3d" => Builtin::Spatial(translational3d()),
        "cylinder-strip3d" => Builtin::Spatial(cylinder_strip3d()),
        "twisted3d" => Builtin::Spatial(twisted3d()),
        "circles2d" => Builtin::Planar(circles2d(params.n)?),
        "perturbed2d" => Builtin::Planar(perturbed2d(params.n, params.seed, params.amplitude)?),
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    })
}

fn sin(amp: f64) -> Coordinate {
    Coordinate::cos(amp, 1.0, -FRAC_PI_2)
}

const TRANSLATION_POINTS: [Vec3; 6] = [
    Vec3::new(-1.0, -0.2, 0.1),
    Vec3::new(0.0, 0.0, 0.0),
    Vec3::new(0.9, 0.35, 0.5),
    Vec3::new(1.9, 0.5, 0.3),
    Vec3::new(2.8, 0.9, 0.9),
    Vec3::new(3.9, 1.0, 0.6),
];

fn translational_curves() -> Vec<SpaceCurve> {
    let cx = Coordinate::cos(1.5, 1.0, 0.0);
    let cy = sin(1.5);
    let cz = Coordinate::cos(0.4, 2.0, 0.3);
    TRANSLATION_POINTS.iter().map(|p| SpaceCurve::new(cx.shifted(p.x), cy.shifted(p.y), cz.shifted(p.z))).collect()
}

/// Three strips of a translational surface `F_i(t) = p_i + c(t)`; every strip
/// is conjugate because `Ḟ_i = Ḟ_{i+1}`.
pub fn translational3d() -> AnalyticSurface {
    AnalyticSurface::new(DEMO_T, translational_curves()).expect("valid built-in")
}

/// `translational3d` with `z_i += τ_i t²`, which destroys conjugacy.
pub fn twisted3d() -> AnalyticSurface {
    const TAU_I: [f64; 6] = [0.0, 0.4, -0.3, 0.5, -0.2, 0.3];
    let curves = translational_curves()
        .into_iter()
        .zip(TAU_I)
        .map(|(c, tau)| SpaceCurve { z: c.z.plus(&Coordinate::poly(&[0.0, 0.0, tau])), ..c })
        .collect();
    AnalyticSurface::new(DEMO_T, curves).expect("valid built-in")
}

/// One cylindrical strip between the unit circle in `z = 0` and its
/// intersection with a tilted plane, along rulings parallel to `w`. The
/// boundary strips are planar, so the induced boundary forces vanish.
pub fn cylinder_strip3d() -> AnalyticSurface {
    let w = Vec3::new(0.6, 0.25, 1.0);
    let a = Vec2::new(0.3, -0.2);
    let b = 0.8;
    let kappa = w.z - a.dot(w.xy());
    // s(t) = (⟨a, c(t)⟩ + b) / κ places F_0 + s w on the plane z = ⟨a, xy⟩ + b.
    let s = Coordinate::cos(a.x / kappa, 1.0, 0.0).plus(&sin(a.y / kappa)).shifted(b / kappa);
    let cx = Coordinate::cos(1.0, 1.0, 0.0);
    let cy = sin(1.0);
    let f0 = SpaceCurve::new(cx.clone(), cy.clone(), Coordinate::constant(0.0));
    let f1 = SpaceCurve::new(cx.plus(&s.scaled(w.x)), cy.plus(&s.scaled(w.y)), s.scaled(w.z));
    let u = Vec2::new(0.7, 0.2);
    let fm = SpaceCurve::new(cx.shifted(-u.x), cy.shifted(-u.y), Coordinate::constant(0.0));
    let v = Vec2::new(0.5, 0.3);
    let f2 = SpaceCurve::new(f1.x.shifted(v.x), f1.y.shifted(v.y), f1.z.shifted(a.dot(v)));
    AnalyticSurface::new(DEMO_T, alloc::vec![fm, f0, f1, f2]).expect("valid built-in")
}

fn circle(r: f64) -> PlanarCurve {
    PlanarCurve::new(Coordinate::cos(r, 1.0, 0.0), sin(r))
}

fn radius(i: usize) -> f64 {
    1.0 + 0.4 * (i as f64 + 1.0)
}

/// Concentric arcs `f_i = r_i (cos t, sin t)`, `r_i = 1 + 0.4 (i + 1)`.
pub fn circles2d(n: usize) -> Result<Framework> {
    Framework::new(DEMO_T, (0..n + 3).map(|k| circle(radius(k))).collect())
}

/// `circles2d(n)` with two seeded cosine terms of amplitude up to `amp`
/// added to every coordinate.
pub fn perturbed2d(n: usize, seed: u64, amp: f64) -> Result<Framework> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = |c: Coordinate| {
        let mut c = c;
        for _ in 0..2 {
            let term =
                TrigTerm::new(amp * rng.gen_range(0.5..=1.0), rng.gen_range(1..=4) as f64, rng.gen_range(0.0..TAU));
            c.trig.push(term);
        }
        c
    };
    let curves = (0..n + 3)
        .map(|k| {
            let c = circle(radius(k));
            let x = noise(c.x);
            let y = noise(c.y);
            PlanarCurve::new(x, y)
        })
        .collect();
    Framework::new(DEMO_T, curves)
}
