//! Stress fields on frameworks, the difference-differential equilibrium
//! residual, complete force loads, and the forward stress solver.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::framework::{Framework, GridJets};
use crate::geomcore::Vec2;
use crate::numerics::{derivative_samples, integrate_samples, ode_march, solve2x2, Grid};

/// Sampled stress `(λ, μ)`: `λ_i` for curves `0..=n`, `μ_i` for the edge
/// families `-1..=n`, each on every grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct StressField {
    grid: Grid,
    lambda: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
}

impl StressField {
    /// `lambda` has `n + 1` rows, `mu` has `n + 2` rows starting at `μ_{-1}`.
    pub fn new(grid: Grid, lambda: Vec<Vec<f64>>, mu: Vec<Vec<f64>>) -> Result<Self> {
        if lambda.is_empty() || mu.len() != lambda.len() + 1 {
            return Err(Error::Shape(format!(
                "expected n+1 lambda rows and n+2 mu rows, got {} and {}",
                lambda.len(),
                mu.len()
            )));
        }
        for row in lambda.iter().chain(&mu) {
            if row.len() != grid.len() {
                return Err(Error::Shape(format!(
                    "stress row has {} samples, grid has {} nodes",
                    row.len(),
                    grid.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what: "stress sample", t: grid.node(j) });
            }
        }
        Ok(Self { grid, lambda, mu })
    }

    pub fn zero(grid: Grid, n: usize) -> Self {
        let len = grid.len();
        Self { lambda: vec![vec![0.0; len]; n + 1], mu: vec![vec![0.0; len]; n + 2], grid }
    }

    pub fn n(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lambda(&self, i: usize) -> &[f64] {
        &self.lambda[i]
    }

    /// Samples of `μ_i`, `-1 <= i <= n`.
    pub fn mu(&self, i: isize) -> &[f64] {
        &self.mu[(i + 1) as usize]
    }

    pub fn lambda_rows(&self) -> &[Vec<f64>] {
        &self.lambda
    }

    pub fn mu_rows(&self) -> &[Vec<f64>] {
        &self.mu
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = |rows: &[Vec<f64>]| rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
        Self { grid: self.grid.clone(), lambda: s(&self.lambda), mu: s(&self.mu) }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if other.grid != self.grid || other.n() != self.n() {
            return Err(Error::Shape("stress fields live on different grids".into()));
        }
        let add = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
        };
        Ok(Self { grid: self.grid.clone(), lambda: add(&self.lambda, &other.lambda), mu: add(&self.mu, &other.mu) })
    }

    /// Copy with `μ_i` multiplied by `c`.
    pub fn with_mu_scaled(&self, i: isize, c: f64) -> Self {
        let mut s = self.clone();
        for v in &mut s.mu[(i + 1) as usize] {
            *v *= c;
        }
        s
    }

    /// The stress of the reversed framework `g_k = f_{n-k}`:
    /// `λ̂_k = −λ_{n−k}`, `μ̂_k = −μ_{n−k−1}`.
    pub fn reversed(&self) -> Self {
        let neg = |r: &Vec<f64>| r.iter().map(|v| -v).collect::<Vec<_>>();
        Self {
            grid: self.grid.clone(),
            lambda: self.lambda.iter().rev().map(neg).collect(),
            mu: self.mu.iter().rev().map(neg).collect(),
        }
    }
}

fn check_compatible(framework: &Framework, stress: &StressField) -> Result<()> {
    if framework.grid() != stress.grid() {
        return Err(Error::Shape(format!(
            "stress grid ({} panels, T = {}) differs from framework grid ({} panels, T = {})",
            stress.grid().panels(),
            stress.grid().t_end(),
            framework.grid().panels(),
            framework.grid().t_end()
        )));
    }
    if framework.n() != stress.n() {
        return Err(Error::Shape(format!("stress has n = {}, framework has n = {}", stress.n(), framework.n())));
    }
    Ok(())
}

/// `V_i(t) = λ_i(t) ḟ_i(t)` at a grid node `t`.
pub fn force_vector(framework: &Framework, stress: &StressField, i: usize, t: f64) -> Result<Vec2> {
    check_compatible(framework, stress)?;
    framework.check_index(i as isize, 0, framework.n() as isize)?;
    let j = stress.grid().node_index(t)?;
    Ok(stress.lambda(i)[j] * framework.eval(i as isize, stress.grid().node(j))?.d1)
}

/// The four terms of the equilibrium equation at one node.
#[derive(Clone, Copy, Debug)]
struct Terms {
    dot_lambda: Vec2,
    lambda: Vec2,
    mu: Vec2,
    mu_prev: Vec2,
}

impl Terms {
    fn residual(&self) -> Vec2 {
        self.dot_lambda + self.lambda + self.mu - self.mu_prev
    }

    fn scale(&self) -> f64 {
        [self.dot_lambda, self.lambda, self.mu, self.mu_prev].iter().map(|v| v.norm()).fold(1e-30, f64::max)
    }
}

fn terms(jets: &GridJets, stress: &StressField, dot_lambda: &[f64], i: usize, j: usize) -> Terms {
    let ii = i as isize;
    let cur = jets.at(ii, j);
    Terms {
        dot_lambda: dot_lambda[j] * cur.d1,
        lambda: stress.lambda(i)[j] * cur.d2,
        mu: stress.mu(ii)[j] * jets.delta(ii, j),
        mu_prev: stress.mu(ii - 1)[j] * jets.delta(ii - 1, j),
    }
}

/// `e_i = λ̇_i ḟ_i + λ_i f̈_i + μ_i Δf_i − μ_{i−1} Δf_{i−1}` at grid node `j`.
///
/// `λ̇_i` comes from fourth-order finite differences of the given samples.
pub fn equilibrium_residual(framework: &Framework, stress: &StressField, i: usize, j: usize) -> Result<Vec2> {
    check_compatible(framework, stress)?;
    framework.check_index(i as isize, 0, framework.n() as isize)?;
    if j >= stress.grid().len() {
        return Err(Error::OffGrid { t: j as f64 * stress.grid().step() });
    }
    let jets = framework.sample_jets();
    let dl = derivative_samples(stress.lambda(i), stress.grid().step());
    Ok(terms(&jets, stress, &dl, i, j).residual())
}

/// Equilibrium residuals on the whole grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// `e_i(t_j)` indexed `[i][j]`.
    pub residuals: Vec<Vec<Vec2>>,
    /// `|e_i| / M_i`, where `M_i` is the largest of the four term magnitudes.
    pub normalized: Vec<Vec<f64>>,
    pub max: f64,
    /// `(i, t)` of the largest normalized residual.
    pub argmax: (usize, f64),
}

pub fn residual_report(framework: &Framework, stress: &StressField) -> Result<ResidualReport> {
    check_compatible(framework, stress)?;
    let jets = framework.sample_jets();
    let grid = stress.grid();
    let mut report = ResidualReport { residuals: Vec::new(), normalized: Vec::new(), max: 0.0, argmax: (0, 0.0) };
    for i in 0..=stress.n() {
        let dl = derivative_samples(stress.lambda(i), grid.step());
        let mut res = Vec::with_capacity(grid.len());
        let mut norm = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            let tm = terms(&jets, stress, &dl, i, j);
            let e = tm.residual();
            let v = e.norm() / tm.scale();
            if v > report.max {
                report.max = v;
                report.argmax = (i, grid.node(j));
            }
            res.push(e);
            norm.push(v);
        }
        report.residuals.push(res);
        report.normalized.push(norm);
    }
    Ok(report)
}

/// Complete force load on a segment of one curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceLoad {
    pub load: Vec2,
    /// Sum of the magnitudes of the contributing terms, for normalization.
    pub scale: f64,
}

/// `S_i(a, b) = λ_i(b)ḟ_i(b) − λ_i(a)ḟ_i(a) + ∫_a^b (μ_iΔf_i − μ_{i−1}Δf_{i−1})`
/// for grid nodes `a <= b`.
pub fn force_load(framework: &Framework, stress: &StressField, i: usize, a: f64, b: f64) -> Result<ForceLoad> {
    check_compatible(framework, stress)?;
    framework.check_index(i as isize, 0, framework.n() as isize)?;
    let grid = stress.grid();
    let ja = grid.node_index(a)?;
    let jb = grid.node_index(b)?;
    if ja > jb {
        return Err(Error::InvalidInterval { a, b, panels: jb.abs_diff(ja) });
    }
    let jets = framework.sample_jets();
    Ok(force_load_nodes(&jets, stress, i, ja, jb))
}

pub(crate) fn force_load_nodes(jets: &GridJets, stress: &StressField, i: usize, ja: usize, jb: usize) -> ForceLoad {
    let ii = i as isize;
    let h = stress.grid().step();
    let len = stress.grid().len();
    let mut fx = Vec::with_capacity(len);
    let mut fy = Vec::with_capacity(len);
    let mut mag = Vec::with_capacity(len);
    for j in 0..len {
        let a = stress.mu(ii)[j] * jets.delta(ii, j);
        let b = stress.mu(ii - 1)[j] * jets.delta(ii - 1, j);
        let v = a - b;
        fx.push(v.x);
        fy.push(v.y);
        mag.push(a.norm() + b.norm());
    }
    let integral = Vec2::new(integrate_samples(&fx, h, ja, jb), integrate_samples(&fy, h, ja, jb));
    let vb = stress.lambda(i)[jb] * jets.at(ii, jb).d1;
    let va = stress.lambda(i)[ja] * jets.at(ii, ja).d1;
    ForceLoad { load: vb - va + integral, scale: vb.norm() + va.norm() + integrate_samples(&mag, h, ja, jb).abs() }
}

/// Multiple of the initial `λ` scale beyond which the march is abandoned.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// Marches the equilibrium equation forward in `t`.
///
/// The state is `(λ_0, ..., λ_n)`. At every evaluation the curves are swept
/// in order `i = 0..=n`: the 2×2 system with columns `(ḟ_i, Δf_i)` and right
/// side `−λ_i f̈_i + μ_{i−1} Δf_{i−1}` yields `(λ̇_i, μ_i)`, with `μ_{-1}`
/// prescribed by `mu_minus1`. The returned field includes the induced
/// boundary stress `μ_n`.
pub fn solve_stress<M>(framework: &Framework, lambda0: &[f64], mu_minus1: M) -> Result<StressField>
where
    M: Fn(f64) -> f64,
{
    let n = framework.n();
    if lambda0.len() != n + 1 {
        return Err(Error::Shape(format!("expected {} initial lambda values, got {}", n + 1, lambda0.len())));
    }
    if let Some(v) = lambda0.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "initial lambda", t: *v });
    }
    let grid = framework.grid().clone();
    let scale = lambda0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let limit = DIVERGENCE_FACTOR * scale;

    let mut mu_scratch = vec![0.0; n + 2];
    let sweep = |t: f64, y: &[f64], dy: &mut [f64], mu: &mut [f64]| -> Result<()> {
        let m = mu_minus1(t);
        if !m.is_finite() {
            return Err(Error::NonFinite { what: "prescribed mu_-1", t });
        }
        mu[0] = m;
        let mut prev = framework.jet(-1, t);
        let mut cur = framework.jet(0, t);
        for i in 0..=n {
            if !(y[i].abs() <= limit) {
                return Err(Error::Divergence { curve: i, t });
            }
            let next = framework.jet(i as isize + 1, t);
            let back = cur.p - prev.p;
            let fwd = next.p - cur.p;
            let rhs = -y[i] * cur.d2 + mu[i] * back;
            let (dl, mi) = solve2x2(cur.d1, fwd, rhs).map_err(|e| match e {
                Error::DegenerateBasis { det, .. } => {
                    Error::DegenerateBasis { det, curve: Some(i as isize), t: Some(t) }
                }
                other => other,
            })?;
            dy[i] = dl;
            mu[i + 1] = mi;
            prev = cur;
            cur = next;
        }
        Ok(())
    };

    let states = ode_march(|t, y, dy| sweep(t, y, dy, &mut mu_scratch), lambda0, &grid)?;

    let mut lambda = vec![Vec::with_capacity(grid.len()); n + 1];
    let mut mu = vec![Vec::with_capacity(grid.len()); n + 2];
    let mut dy = vec![0.0; n + 1];
    let mut mu_node = vec![0.0; n + 2];
    for (j, y) in states.iter().enumerate() {
        sweep(grid.node(j), y, &mut dy, &mut mu_node)?;
        for i in 0..=n {
            lambda[i].push(y[i]);
        }
        for (row, v) in mu.iter_mut().zip(&mu_node) {
            row.push(*v);
        }
    }
    StressField::new(grid, lambda, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{Coordinate, PlanarCurve};

    fn parallel_lines(n: usize) -> Framework {
        let curves = (0..n + 3)
            .map(|k| PlanarCurve::new(Coordinate::poly(&[0.0, 1.0]), Coordinate::constant(k as f64 - 1.0)))
            .collect();
        Framework::with_panels(1.0, curves, 32).unwrap()
    }

    #[test]
    fn zero_stress_has_zero_residual_and_load() {
        let fw = parallel_lines(2);
        let s = StressField::zero(fw.grid().clone(), 2);
        let r = residual_report(&fw, &s).unwrap();
        assert_eq!(r.max, 0.0);
        assert_eq!(equilibrium_residual(&fw, &s, 1, 3).unwrap(), Vec2::ZERO);
        let l = force_load(&fw, &s, 0, 0.25, 0.75).unwrap();
        assert_eq!(l.load, Vec2::ZERO);
        assert_eq!(force_vector(&fw, &s, 1, 0.5).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn unit_lambda_on_straight_line() {
        let fw = parallel_lines(0);
        let mut s = StressField::zero(fw.grid().clone(), 0);
        s.lambda[0].iter_mut().for_each(|v| *v = 1.0);
        assert_eq!(force_vector(&fw, &s, 0, 0.5).unwrap(), Vec2::new(1.0, 0.0));
        assert!(matches!(force_vector(&fw, &s, 0, 0.51), Err(Error::OffGrid { .. })));
        // constant λ along a straight line is already in equilibrium
        assert_eq!(residual_report(&fw, &s).unwrap().max, 0.0);
    }

    #[test]
    fn force_load_on_empty_segment_vanishes() {
        let fw = parallel_lines(1);
        let mut s = StressField::zero(fw.grid().clone(), 1);
        s.mu[1].iter_mut().for_each(|v| *v = 3.0);
        s.lambda[0].iter_mut().for_each(|v| *v = 2.0);
        assert_eq!(force_load(&fw, &s, 0, 0.5, 0.5).unwrap().load, Vec2::ZERO);
        assert!(force_load(&fw, &s, 0, 0.75, 0.5).is_err());
    }

    #[test]
    fn solver_keeps_zero_stress_on_parallel_lines() {
        let fw = parallel_lines(3);
        let s = solve_stress(&fw, &[0.0; 4], |_| 0.0).unwrap();
        assert!(s.lambda_rows().iter().chain(s.mu_rows()).all(|r| r.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn solver_rejects_degenerate_and_bad_seeds() {
        let mut fw = parallel_lines(1);
        // collapse f_1 onto f_0
        let curves: Vec<PlanarCurve> = {
            let mut c = fw.curves().to_vec();
            c[2] = c[1].clone();
            c
        };
        fw = Framework::with_panels(1.0, curves, 32).unwrap();
        match solve_stress(&fw, &[1.0, 1.0], |_| 0.0) {
            Err(Error::DegenerateBasis { curve: Some(0), t: Some(t), .. }) => assert_eq!(t, 0.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(solve_stress(&fw, &[1.0], |_| 0.0), Err(Error::Shape(_))));
        assert!(solve_stress(&parallel_lines(0), &[1.0], |_| f64::NAN).is_err());
    }

    #[test]
    fn shape_validation() {
        let g = Grid::new(1.0, 4).unwrap();
        assert!(StressField::new(g.clone(), vec![vec![0.0; 5]], vec![vec![0.0; 5]]).is_err());
        assert!(StressField::new(g.clone(), vec![vec![0.0; 5]], vec![vec![0.0; 5], vec![0.0; 4]]).is_err());
        assert!(StressField::new(g, vec![vec![f64::NAN; 5]], vec![vec![0.0; 5]; 2]).is_err());
    }
}
