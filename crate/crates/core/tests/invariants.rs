use proptest::prelude::*;
use sdlift_core::builtins::{circles2d, cylinder_strip3d, perturbed2d, translational3d};
use sdlift_core::geomcore::{bracket_set, gp_residual};
use sdlift_core::numerics::solve2x2;
use sdlift_core::statics::{residual_report, solve_stress};
use sdlift_core::*;

fn v2() -> impl Strategy<Value = Vec2> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn v3() -> impl Strategy<Value = Vec3> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #[test]
    fn det2_is_alternating_and_bilinear(a in v2(), b in v2(), c in v2(), s in -5.0..5.0f64) {
        prop_assert_eq!(det2(a, b), -det2(b, a));
        let lhs = det2(a * s + c, b);
        let rhs = s * det2(a, b) + det2(c, b);
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + a.norm() * b.norm() * s.abs() + c.norm() * b.norm()));
    }

    #[test]
    fn det3_is_cyclic(a in v3(), b in v3(), c in v3()) {
        let d = det3(a, b, c);
        let scale = 1e-12 * (1.0 + a.norm() * b.norm() * c.norm());
        prop_assert!((d - det3(b, c, a)).abs() < scale);
        prop_assert!((d + det3(b, a, c)).abs() < scale);
    }

    #[test]
    fn grassmann_pluecker_vanishes(a in v2(), b in v2(), c in v2(), d in v2()) {
        let bound = a.norm() * b.norm() * c.norm() * d.norm();
        prop_assert!(gp_residual(a, b, c, d).abs() <= 1e-12 * bound.max(1e-300));
    }

    #[test]
    fn cramer_solution_reproduces_rhs(a in v2(), b in v2(), r in v2()) {
        prop_assume!(det2(a, b).abs() > 1e-2 * a.norm() * b.norm());
        let (x, y) = solve2x2(a, b, r).unwrap();
        let res = a * x + b * y - r;
        let cond = a.norm() * b.norm() / det2(a, b).abs();
        prop_assert!(res.norm() < 1e-12 * cond * (1.0 + r.norm()));
    }

    #[test]
    fn brackets_are_rotation_invariant(angle in 0.0..std::f64::consts::TAU, t in 0.0..1.2f64) {
        let fw = perturbed2d(2, 4, 0.05).unwrap();
        let rot = fw.rotated(angle);
        let a = bracket_set(&fw, 1, t).unwrap();
        let b = bracket_set(&rot, 1, t).unwrap();
        for (x, y) in [(a.a, b.a), (a.b, b.b), (a.c_bar, b.c_bar), (a.h, b.h), (a.j, b.j), (a.l, b.l)] {
            prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn translation_shifts_positions_only(dx in -3.0..3.0f64, dy in -3.0..3.0f64, t in 0.0..1.2f64, i in -1isize..4) {
        let fw = circles2d(2).unwrap();
        let moved = fw.translated(Vec2::new(dx, dy));
        let a = fw.eval(i, t).unwrap();
        let b = moved.eval(i, t).unwrap();
        prop_assert!((b.p - a.p - Vec2::new(dx, dy)).norm() < 1e-14);
        prop_assert_eq!((a.d1, a.d2, a.d3), (b.d1, b.d2, b.d3));
    }

    #[test]
    fn ruled_surface_interpolates(u in -1.0..3.0f64, v in 0.0..1.2f64) {
        let fw = perturbed2d(2, 9, 0.1).unwrap();
        let i = u.floor();
        let a = fw.ruled_point(i, v).unwrap();
        let b = fw.ruled_point((i + 1.0).min(3.0), v).unwrap();
        let p = fw.ruled_point(u, v).unwrap();
        let expect = a * (1.0 + i - u) + b * (u - i);
        prop_assert!((p - expect).norm() < 1e-12);
    }
}

#[test]
fn jets_match_central_differences() {
    let frameworks = [
        translational3d().planar(),
        cylinder_strip3d().planar(),
        circles2d(2).unwrap(),
        perturbed2d(2, 1, 0.05).unwrap(),
    ];
    let h = 1e-3;
    for fw in &frameworks {
        for i in -1..=fw.n() as isize + 1 {
            for t in [0.1, 0.5, 1.1] {
                let jet = |s: f64| fw.eval(i, s).unwrap();
                let c = jet(t);
                let (m, p) = (jet(t - h), jet(t + h));
                let d1 = (p.p - m.p) * (0.5 / h);
                let d2 = (p.p - c.p * 2.0 + m.p) * (1.0 / (h * h));
                let d3 = (p.d2 - m.d2) * (0.5 / h);
                assert!((d1 - c.d1).norm() < 1e-5, "d1 {i} {t}");
                assert!((d2 - c.d2).norm() < 1e-4, "d2 {i} {t}");
                assert!((d3 - c.d3).norm() < 1e-4, "d3 {i} {t}");
            }
        }
    }
}

#[test]
fn translational_jet_matches_hand_formula() {
    let s = translational3d();
    let t = std::f64::consts::FRAC_PI_3;
    let jet = s.eval(0, t).unwrap();
    // F_0 = (1.5 cos t, 1.5 sin t, 0.4 cos(2t + 0.3)), p_0 = 0.
    let expect_p = Vec3::new(1.5 * t.cos(), 1.5 * t.sin(), 0.4 * (2.0 * t + 0.3).cos());
    let expect_d1 = Vec3::new(-1.5 * t.sin(), 1.5 * t.cos(), -0.8 * (2.0 * t + 0.3).sin());
    let expect_d3 = Vec3::new(1.5 * t.sin(), -1.5 * t.cos(), 3.2 * (2.0 * t + 0.3).sin());
    assert!((jet.p - expect_p).norm() < 1e-15);
    assert!((jet.d1 - expect_d1).norm() < 1e-15);
    assert!((jet.d3 - expect_d3).norm() < 1e-14);
}

#[test]
fn circle_deltas_are_radial() {
    let fw = circles2d(2).unwrap();
    for t in [0.0, 0.4, 1.2] {
        for i in -1..=2 {
            let d = fw.delta(i, t).unwrap();
            let radial = Vec2::new(t.cos(), t.sin()) * 0.4;
            assert!((d - radial).norm() < 1e-15);
        }
    }
}

#[test]
fn solved_stress_passes_residual_and_is_rotation_invariant() {
    let fw = perturbed2d(2, 5, 0.05).unwrap();
    let st = solve_stress(&fw, &[1.0, -0.5, 0.8], |t| 0.2 * t).unwrap();
    let r = residual_report(&fw, &st).unwrap();
    assert!(r.max < 1e-6, "{} at {:?}", r.max, r.argmax);
    let rot = fw.rotated(0.7);
    let st2 = solve_stress(&rot, &[1.0, -0.5, 0.8], |t| 0.2 * t).unwrap();
    for (a, b) in st.lambda_rows().iter().flatten().zip(st2.lambda_rows().iter().flatten()) {
        assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }
}
