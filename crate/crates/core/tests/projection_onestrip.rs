use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdlift_core::builtins::{cylinder_strip3d, perturbed2d, translational3d, twisted3d};
use sdlift_core::framework::{Coordinate, PlanarCurve};
use sdlift_core::lifting::{AnalyticSurface, SemiDiscreteSurface3D};
use sdlift_core::onestrip::*;
use sdlift_core::projection::*;
use sdlift_core::statics::residual_report;
use sdlift_core::*;

fn with_affine_height(s: &AnalyticSurface, a: Vec2, b: f64, keep_z: bool) -> AnalyticSurface {
    let curves = s
        .curves()
        .iter()
        .map(|c| {
            let base = if keep_z { c.z.clone() } else { Coordinate::constant(0.0) };
            SpaceCurve { z: base.plus(&c.x.scaled(a.x)).plus(&c.y.scaled(a.y)).shifted(b), ..c.clone() }
        })
        .collect();
    AnalyticSurface::new(s.t_end(), curves).unwrap()
}

#[test]
fn affine_heights_induce_zero_stress() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let base = translational3d();
    let proj = project(&SemiDiscreteSurface3D::Analytic(base.clone())).unwrap();
    let scale = {
        let s = induced_stress(&proj, CONJUGACY_TOL).unwrap();
        s.lambda_rows().iter().chain(s.mu_rows()).flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    for _ in 0..5 {
        let a = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let b = rng.gen_range(-3.0..3.0);
        let s = with_affine_height(&base, a, b, false);
        let proj = project(&SemiDiscreteSurface3D::Analytic(s)).unwrap();
        let st = induced_stress(&proj, CONJUGACY_TOL).unwrap();
        let worst = st.lambda_rows().iter().chain(st.mu_rows()).flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-12 * scale.max(a.norm()), "{worst}");
    }
}

#[test]
fn twisted_surface_is_refused() {
    let proj = project(&SemiDiscreteSurface3D::Analytic(twisted3d())).unwrap();
    let worst = (0..proj.grid().len())
        .map(|j| {
            let (a, b) = proj.developability_defect(1, j).unwrap();
            a.max(b)
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-2, "{worst}");
    assert!(matches!(induced_stress(&proj, CONJUGACY_TOL), Err(Error::NotConjugate { .. })));
}

#[test]
fn translational_induced_stress_is_self_stress() {
    let proj = project(&SemiDiscreteSurface3D::Analytic(translational3d())).unwrap();
    let st = induced_stress(&proj, CONJUGACY_TOL).unwrap();
    assert!(residual_report(proj.framework(), &st).unwrap().max < 1e-7);
    let t = proj.grid().node(30);
    assert_eq!(proj.mu_at(1, t).unwrap(), st.mu(1)[30]);
    assert_eq!(proj.lambda_at(2, t).unwrap(), st.lambda(2)[30]);
}

#[test]
fn cylinder_strip_one_strip_system() {
    let fw = cylinder_strip3d().planar();
    let r = onestrip_verify(&fw, CRITERION_TOL).unwrap();
    assert!(r.verdict);
    assert!(r.criterion_max < 1e-6);
    assert!(r.system_residuals[2] < 1e-8, "{:?}", r.system_residuals);
    assert!(r.system_residuals[3] < 1e-8, "{:?}", r.system_residuals);
    assert!(r.system_residuals[1] < 1e-6);
    assert!(r.statics_residual.unwrap() < 1e-6);
    assert_eq!(r.lambda1[0], 1.0);
}

#[test]
fn perturbed_strip_is_not_liftable() {
    let fw = perturbed2d(1, 1, 0.05).unwrap();
    let r = onestrip_verify(&fw, CRITERION_TOL).unwrap();
    assert!(!r.verdict);
    assert!(r.criterion_max > 1e-2);
    assert!(r.system_residuals[1] > 1e-6);
    assert_eq!(r.statics_residual, None);
}

#[test]
fn twisted_strip_is_not_liftable() {
    // Concentric arcs whose outer curve is rotated against the inner one.
    let arc = |r: f64, phase: f64| {
        PlanarCurve::new(Coordinate::cos(r, 1.0, phase), Coordinate::cos(r, 1.0, phase - std::f64::consts::FRAC_PI_2))
    };
    let fw = Framework::new(1.2, vec![arc(0.5, -0.2), arc(1.0, 0.0), arc(1.6, 0.3), arc(2.2, 0.5)]).unwrap();
    let r = onestrip_verify(&fw, CRITERION_TOL).unwrap();
    assert!(!r.verdict, "{}", r.criterion_max);
}

#[test]
fn congruent_translates_cancel() {
    let c = PlanarCurve::new(Coordinate::cos(1.0, 1.0, 0.0), Coordinate::new(vec![0.0, 0.0, 0.3], vec![]).unwrap());
    let curves = (0..4).map(|k| c.translated(Vec2::new(0.1 * k as f64, 1.0 + k as f64))).collect();
    let fw = Framework::new(1.0, curves).unwrap();
    let crit = liftability_criterion(&fw).unwrap();
    assert!(crit.iter().all(|v| *v < 1e-12), "{:?}", crit.iter().fold(0.0f64, |m, v| m.max(*v)));
}

#[test]
fn criterion_uses_third_derivatives() {
    let fw = perturbed2d(1, 3, 0.05).unwrap();
    let t = 0.4;
    let (f0, f1) = (fw.eval(0, t).unwrap(), fw.eval(1, t).unwrap());
    let full = liftability_residual(&f0, &f1);
    let flat = liftability_residual(&Jet2 { d3: Vec2::ZERO, ..f0 }, &Jet2 { d3: Vec2::ZERO, ..f1 });
    assert!((full - flat).abs() > 1e-3, "{full} {flat}");
}

#[test]
fn criterion_survives_time_rescaling() {
    // Reparametrize the cylinder strip by t -> 2t on [0, 0.6].
    let s = cylinder_strip3d();
    let curves = s
        .planar()
        .curves()
        .iter()
        .map(|c| {
            let r = |x: &Coordinate| Coordinate {
                poly: x.poly.clone(),
                trig: x.trig.iter().map(|t| TrigTerm::new(t.amp, 2.0 * t.freq, t.phase)).collect(),
            };
            PlanarCurve::new(r(&c.x), r(&c.y))
        })
        .collect();
    let fast = Framework::new(0.6, curves).unwrap();
    assert!(onestrip_verify(&fast, CRITERION_TOL).unwrap().verdict);
    let p = perturbed2d(1, 2, 0.05).unwrap();
    assert!(!onestrip_verify(&p, CRITERION_TOL).unwrap().verdict);
}

#[test]
fn lifting_with_parallel_tangents_is_conjugate() {
    let fw = sdlift_core::builtins::circles2d(2).unwrap();
    let st = sdlift_core::statics::solve_stress(&fw, &[1.0, 1.0, 1.0], |_| 0.0).unwrap();
    let lift = sdlift_core::lifting::build_lifting(&fw, &st, 1e-6).unwrap();
    let proj = project(&SemiDiscreteSurface3D::Sampled(lift)).unwrap();
    let (defect, _, _) = proj.max_strip_defect();
    assert!(defect < CONJUGACY_TOL, "{defect}");
}
