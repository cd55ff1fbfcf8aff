//! A single strip (`n = 1`) with vanishing boundary forces: closed-form
//! stresses and the liftability criterion in terms of brackets.
//!
//! Brackets are taken at `i = 1`, so everything depends on `f_0` and `f_1`
//! only: `B̄ = [Δf_0, ḟ_0]`, `C̄ = [Δf_0, ḟ_1]`, `Ḡ = [Δf_0, f̈_0]`,
//! `H = [Δf_0, f̈_1]`, `Ī = [ḟ_0, ḟ_1]`, `J = [ḟ_1, f̈_1]`, `J̄ = [ḟ_0, f̈_0]`,
//! `K = [ḟ_0, f̈_1]`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::framework::{Framework, Jet2};
use crate::geomcore::det2;
use crate::numerics::{cumulative_integral, derivative_samples, EPS_REG};
use crate::projection::normalized;
use crate::statics::{residual_report, StressField};

/// Default verdict tolerance.
pub const CRITERION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
struct Brackets {
    b_bar: f64,
    c_bar: f64,
    g_bar: f64,
    h: f64,
    i_bar: f64,
    j: f64,
    j_bar: f64,
    k: f64,
    /// `[ḟ_1, f⃛_1]`, the derivative of `J`.
    j_dot: f64,
    /// `[ḟ_0, f⃛_0]`, the derivative of `J̄`.
    j_bar_dot: f64,
    /// Norm bound of `|Δf_0|`, `|ḟ_i|`, `|f̈_i|`, `|f⃛_i|` products.
    norms: Norms,
}

#[derive(Clone, Copy, Debug)]
struct Norms {
    df: f64,
    d1: [f64; 2],
    d2: [f64; 2],
    d3: [f64; 2],
}

fn brackets(f0: &Jet2, f1: &Jet2) -> Brackets {
    let df = f1.p - f0.p;
    Brackets {
        b_bar: det2(df, f0.d1),
        c_bar: det2(df, f1.d1),
        g_bar: det2(df, f0.d2),
        h: det2(df, f1.d2),
        i_bar: det2(f0.d1, f1.d1),
        j: det2(f1.d1, f1.d2),
        j_bar: det2(f0.d1, f0.d2),
        k: det2(f0.d1, f1.d2),
        j_dot: det2(f1.d1, f1.d3),
        j_bar_dot: det2(f0.d1, f0.d3),
        norms: Norms {
            df: df.norm(),
            d1: [f0.d1.norm(), f1.d1.norm()],
            d2: [f0.d2.norm(), f1.d2.norm()],
            d3: [f0.d3.norm(), f1.d3.norm()],
        },
    }
}

/// Normalized residual of the liftability identity
/// `J J̄ (B̄(2H − Ī) − C̄(2Ḡ − Ī)) = B̄ C̄ (J̄ [ḟ_1, f⃛_1] − J [ḟ_0, f⃛_0])`
/// for the jets of `f_0` and `f_1` at one parameter.
pub fn liftability_residual(f0: &Jet2, f1: &Jet2) -> f64 {
    let br = brackets(f0, f1);
    let Brackets { b_bar, c_bar, g_bar, h, i_bar, j, j_bar, j_dot, j_bar_dot, norms: n, .. } = br;
    let jj = j * j_bar;
    let products = [
        2.0 * jj * b_bar * h,
        -jj * b_bar * i_bar,
        -2.0 * jj * c_bar * g_bar,
        jj * c_bar * i_bar,
        -b_bar * c_bar * j_bar * j_dot,
        b_bar * c_bar * j * j_bar_dot,
    ];
    // Every bracket replaced by the product of its argument norms.
    let nj = n.d1[1] * n.d2[1];
    let nj_bar = n.d1[0] * n.d2[0];
    let nb = n.df * n.d1[0];
    let nc = n.df * n.d1[1];
    let bounds = [
        2.0 * nj * nj_bar * nb * n.df * n.d2[1],
        nj * nj_bar * nb * n.d1[0] * n.d1[1],
        2.0 * nj * nj_bar * nc * n.df * n.d2[0],
        nj * nj_bar * nc * n.d1[0] * n.d1[1],
        nb * nc * nj_bar * n.d1[1] * n.d3[1],
        nb * nc * nj * n.d1[0] * n.d3[0],
    ];
    let bound = bounds.iter().copied().fold(0.0, f64::max);
    normalized(products.iter().sum(), &products, 1e-8 * bound)
}

fn check_one_strip(framework: &Framework) -> Result<()> {
    if framework.n() != 1 {
        return Err(Error::Shape(alloc::format!("one-strip analysis needs n = 1, got n = {}", framework.n())));
    }
    Ok(())
}

/// Per-node criterion residuals of a one-strip framework.
pub fn liftability_criterion(framework: &Framework) -> Result<Vec<f64>> {
    check_one_strip(framework)?;
    let jets = framework.sample_jets();
    Ok((0..framework.grid().len()).map(|j| liftability_residual(jets.at(0, j), jets.at(1, j))).collect())
}

/// Stresses of the strip with `μ_{-1} = μ_1 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneStripStresses {
    pub lambda0: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub mu0: Vec<f64>,
    /// `λ_0(0)`; `λ_1(0) = 1`.
    pub scale: f64,
}

/// `λ_0 = c exp(−∫ Ḡ/B̄)`, `λ_1 = exp(−∫ H/C̄)`, `μ_0 = λ_0 J̄ / B̄`, integrals
/// from `0`. The constant `c` makes `λ_0 / λ_1 = −B̄J/(C̄J̄)` hold at the node
/// where `|C̄ J̄|` is largest; it is `1` when `J̄` vanishes everywhere.
pub fn onestrip_stresses(framework: &Framework) -> Result<OneStripStresses> {
    check_one_strip(framework)?;
    let grid = framework.grid();
    let jets = framework.sample_jets();
    let br: Vec<Brackets> = (0..grid.len()).map(|j| brackets(jets.at(0, j), jets.at(1, j))).collect();
    for (j, b) in br.iter().enumerate() {
        let t = grid.node(j);
        if libm::fabs(b.b_bar) <= EPS_REG * b.norms.df * b.norms.d1[0] {
            return Err(Error::DegenerateBasis { det: b.b_bar, curve: Some(0), t: Some(t) });
        }
        if libm::fabs(b.c_bar) <= EPS_REG * b.norms.df * b.norms.d1[1] {
            return Err(Error::DegenerateBasis { det: b.c_bar, curve: Some(1), t: Some(t) });
        }
    }
    let h = grid.step();
    let m0 = cumulative_integral(&br.iter().map(|b| b.g_bar / b.b_bar).collect::<Vec<_>>(), h);
    let m1 = cumulative_integral(&br.iter().map(|b| b.h / b.c_bar).collect::<Vec<_>>(), h);
    let lambda1: Vec<f64> = m1.iter().map(|m| libm::exp(-m)).collect();
    let mut lambda0: Vec<f64> = m0.iter().map(|m| libm::exp(-m)).collect();

    let (star, weight) = br
        .iter()
        .enumerate()
        .map(|(j, b)| (j, libm::fabs(b.c_bar * b.j_bar)))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let floor = EPS_REG * br[star].norms.df * br[star].norms.d1[1] * br[star].norms.d1[0] * br[star].norms.d2[0];
    let scale = if weight > floor && weight > 0.0 {
        let b = &br[star];
        let rho = -b.b_bar * b.j / (b.c_bar * b.j_bar);
        rho * lambda1[star] / lambda0[star]
    } else {
        1.0
    };
    for l in &mut lambda0 {
        *l *= scale;
    }
    let mu0 = lambda0.iter().zip(&br).map(|(l, b)| l * b.j_bar / b.b_bar).collect();
    Ok(OneStripStresses { lambda0, lambda1, mu0, scale })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneStripReport {
    pub t: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub mu0: Vec<f64>,
    /// `λ_0(0)` chosen by [`onestrip_stresses`].
    pub scale: f64,
    /// Max normalized residuals of `λ_0 J̄ − μ_0 B̄`, `λ̇_1 Ī + λ_1 K + μ_0 B̄`,
    /// `λ̇_0 B̄ + λ_0 Ḡ` and `λ̇_1 C̄ + λ_1 H`.
    pub system_residuals: [f64; 4],
    pub criterion: Vec<f64>,
    pub criterion_max: f64,
    /// Whether `−B̄J/(C̄J̄)` is positive at every node where it is defined.
    pub ratio_positive: bool,
    pub verdict: bool,
    /// Equilibrium residual of the assembled stress; only computed when the
    /// verdict holds.
    pub statics_residual: Option<f64>,
}

pub fn onestrip_verify(framework: &Framework, tol: f64) -> Result<OneStripReport> {
    let st = onestrip_stresses(framework)?;
    let criterion = liftability_criterion(framework)?;
    let grid = framework.grid();
    let jets = framework.sample_jets();
    let h = grid.step();
    let dl0 = derivative_samples(&st.lambda0, h);
    let dl1 = derivative_samples(&st.lambda1, h);
    let mut sys = [0.0f64; 4];
    let mut ratio_positive = true;
    for j in 0..grid.len() {
        let b = brackets(jets.at(0, j), jets.at(1, j));
        let (l0, l1, m0) = (st.lambda0[j], st.lambda1[j], st.mu0[j]);
        let eqs: [&[f64]; 4] = [
            &[l0 * b.j_bar, -m0 * b.b_bar],
            &[dl1[j] * b.i_bar, l1 * b.k, m0 * b.b_bar],
            &[dl0[j] * b.b_bar, l0 * b.g_bar],
            &[dl1[j] * b.c_bar, l1 * b.h],
        ];
        for (s, terms) in sys.iter_mut().zip(eqs) {
            *s = s.max(normalized(terms.iter().sum(), terms, 0.0));
        }
        let denom = b.c_bar * b.j_bar;
        if denom != 0.0 && -b.b_bar * b.j / denom <= 0.0 {
            ratio_positive = false;
        }
    }
    let criterion_max = criterion.iter().copied().fold(0.0, f64::max);
    let verdict = criterion_max < tol;
    let statics_residual = if verdict {
        let zeros = alloc::vec![0.0; grid.len()];
        let stress = StressField::new(
            grid.clone(),
            alloc::vec![st.lambda0.clone(), st.lambda1.clone()],
            alloc::vec![zeros.clone(), st.mu0.clone(), zeros],
        )?;
        Some(residual_report(framework, &stress)?.max)
    } else {
        None
    };
    Ok(OneStripReport {
        t: grid.nodes().collect(),
        lambda0: st.lambda0,
        lambda1: st.lambda1,
        mu0: st.mu0,
        scale: st.scale,
        system_residuals: sys,
        criterion,
        criterion_max,
        ratio_positive,
        verdict,
        statics_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{Coordinate, PlanarCurve};

    fn parallel_lines() -> Framework {
        let line = |c: f64| PlanarCurve::new(Coordinate::poly(&[0.0, 1.0]), Coordinate::constant(c));
        Framework::new(1.0, alloc::vec![line(-1.0), line(0.0), line(1.0), line(2.0)]).unwrap()
    }

    #[test]
    fn parallel_lines_have_unit_stress() {
        let st = onestrip_stresses(&parallel_lines()).unwrap();
        assert!(st.lambda0.iter().chain(&st.lambda1).all(|l| *l == 1.0));
        assert!(st.mu0.iter().all(|m| *m == 0.0));
        let r = onestrip_verify(&parallel_lines(), CRITERION_TOL).unwrap();
        assert!(r.verdict);
        assert_eq!(r.criterion_max, 0.0);
        assert_eq!(r.statics_residual, Some(0.0));
    }

    #[test]
    fn needs_exactly_one_strip() {
        let fw = crate::builtins::circles2d(2).unwrap();
        assert!(matches!(liftability_criterion(&fw), Err(Error::Shape(_))));
    }
}
