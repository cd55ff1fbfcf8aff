//! Increasing semi-discrete paths, the height function, liftings of
//! self-stressed frameworks and the conjugacy test of 3D semi-discrete
//! surfaces.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::framework::{Framework, GridJets, Jet2, Jet3, SpaceCurve};
use crate::geomcore::{det2, det3, Vec2, Vec3};
use crate::numerics::{
    cumulative_integral, derivative_samples, integrate_samples, second_derivative_samples, Grid, DEFAULT_PANELS,
};
use crate::statics::{residual_report, StressField};

/// Nondecreasing node indices `0 = γ_0 <= γ_1 <= ... <= γ_{k+1} = s`.
///
/// The path runs along curve `i` for `t ∈ [γ_i, γ_{i+1}]` and ends at the
/// point `(k, s)`. Empty intervals jump over a curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncreasingPath {
    k: usize,
    gamma: Vec<usize>,
}

impl IncreasingPath {
    pub fn from_nodes(k: usize, gamma: Vec<usize>) -> Result<Self> {
        if gamma.len() != k + 2 {
            return Err(Error::InvalidPath("path must have k + 2 entries"));
        }
        if gamma[0] != 0 {
            return Err(Error::InvalidPath("path must start at parameter 0"));
        }
        if gamma.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidPath("path parameters must be nondecreasing"));
        }
        Ok(Self { k, gamma })
    }

    /// Path from parameter values, each of which must be a grid node.
    pub fn from_params(grid: &Grid, k: usize, gamma: &[f64]) -> Result<Self> {
        let nodes = gamma.iter().map(|&t| grid.node_index(t)).collect::<Result<Vec<_>>>()?;
        Self::from_nodes(k, nodes)
    }

    /// `γ_0 = ... = γ_k = 0`, `γ_{k+1} = s`.
    pub fn l_shaped(k: usize, s_node: usize) -> Self {
        let mut gamma = alloc::vec![0; k + 2];
        gamma[k + 1] = s_node;
        Self { k, gamma }
    }

    /// Jump nodes drawn uniformly from `0..=s_node` and sorted.
    pub fn random<R: Rng>(rng: &mut R, k: usize, s_node: usize) -> Self {
        let mut inner: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=s_node)).collect();
        inner.sort_unstable();
        let mut gamma = Vec::with_capacity(k + 2);
        gamma.push(0);
        gamma.extend(inner);
        gamma.push(s_node);
        Self { k, gamma }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn target_node(&self) -> usize {
        self.gamma[self.k + 1]
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }
}

/// `count` seeded random paths ending at `(k, s_node)`.
pub fn random_paths(k: usize, s_node: usize, count: usize, seed: u64) -> Vec<IncreasingPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| IncreasingPath::random(&mut rng, k, s_node)).collect()
}

/// Height-function evaluator with the framework jets cached on the grid.
pub struct HeightEvaluator<'a> {
    framework: &'a Framework,
    stress: &'a StressField,
    jets: GridJets,
}

impl<'a> HeightEvaluator<'a> {
    pub fn new(framework: &'a Framework, stress: &'a StressField) -> Result<Self> {
        if framework.grid() != stress.grid() || framework.n() != stress.n() {
            return Err(Error::Shape(format!(
                "stress (n = {}, {} panels) does not match framework (n = {}, {} panels)",
                stress.n(),
                stress.grid().panels(),
                framework.n(),
                framework.grid().panels()
            )));
        }
        Ok(Self { framework, stress, jets: framework.sample_jets() })
    }

    fn grid(&self) -> &Grid {
        self.stress.grid()
    }

    /// Samples of `μ_{i−1}(u) det(Δf_{i−1}(u), x − f_{i−1}(u))` for `i >= 0`.
    fn edge_integrand(&self, i: usize, x: Vec2) -> Vec<f64> {
        let e = i as isize - 1;
        let mu = self.stress.mu(e);
        (0..self.grid().len()).map(|j| mu[j] * det2(self.jets.delta(e, j), x - self.jets.at(e, j).p)).collect()
    }

    /// `H_γ(f(p))` along `path`.
    pub fn height(&self, path: &IncreasingPath) -> Result<f64> {
        let k = path.k();
        if k > self.framework.n() {
            return Err(Error::IndexOutOfRange { index: k as isize, min: 0, max: self.framework.n() as isize });
        }
        if path.target_node() >= self.grid().len() {
            return Err(Error::InvalidPath("path leaves the parameter grid"));
        }
        let g = path.gamma();
        let x = self.jets.at(k as isize, path.target_node()).p;
        let h = self.grid().step();
        let mut sum = 0.0;
        for i in 0..k {
            let jet = self.jets.at(i as isize, g[i + 1]);
            sum += self.stress.lambda(i)[g[i + 1]] * det2(jet.d1, x - jet.p);
        }
        for i in 0..=k {
            if g[i] < g[i + 1] {
                sum -= integrate_samples(&self.edge_integrand(i, x), h, g[i], g[i + 1]);
            }
        }
        Ok(sum)
    }

    /// Height along the L-shaped path to `(k, t_j)`, evaluated at the plane
    /// point `x`. `k` may be `n + 1`.
    fn height_l_at(&self, k: usize, j: usize, x: Vec2) -> f64 {
        let mut sum = 0.0;
        for i in 0..k {
            let jet = self.jets.at(i as isize, 0);
            sum += self.stress.lambda(i)[0] * det2(jet.d1, x - jet.p);
        }
        sum - integrate_samples(&self.edge_integrand(k, x), self.grid().step(), 0, j)
    }

    /// Closed form of the height along the L-shaped path to `(k, t_j)`.
    pub fn height_l(&self, k: usize, j: usize) -> Result<f64> {
        if k > self.framework.n() {
            return Err(Error::IndexOutOfRange { index: k as isize, min: 0, max: self.framework.n() as isize });
        }
        Ok(self.height_l_at(k, j, self.jets.at(k as isize, j).p))
    }

    /// L-path heights of the whole lifted curve `k`, extended to the boundary
    /// curves: index `-1` uses the plane of curve `0`, index `n + 1` the
    /// formula with `k = n + 1`.
    pub fn lifted_curve(&self, k: isize) -> Vec<f64> {
        self.lifted_curve_jets(k).0
    }

    /// Heights of lifted curve `k` with their first two derivatives.
    ///
    /// Along the curve `x(t)` the L-path height is
    /// `det(P(t), x) + c(t)` with `P(t) = Σ_{i<k} λ_i(0) ḟ_i(0) − ∫_0^t μ_{k-1} Δf_{k-1}`,
    /// and since `x − f_{k-1}` is parallel to `Δf_{k-1}` the derivatives are
    /// `ż = det(P, ẋ)` and `z̈ = det(P, ẍ) − μ_{k-1} det(Δf_{k-1}, ẋ)`.
    pub fn lifted_curve_jets(&self, k: isize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (kk, curve) = if k < 0 { (0, -1) } else { (k as usize, k) };
        let e = kk as isize - 1;
        // det(Δf, x − f) = det(Δf, x) − det(Δf, f), so the integral splits
        // into cumulative vector and scalar parts.
        let (px, py, r) = self.cumulative_parts(e);
        let mut p0 = Vec2::ZERO;
        let mut c0 = 0.0;
        for i in 0..kk {
            let jet = self.jets.at(i as isize, 0);
            let l = self.stress.lambda(i)[0];
            p0 += jet.d1 * l;
            c0 -= l * det2(jet.d1, jet.p);
        }
        let mu = self.stress.mu(e);
        let len = self.grid().len();
        let (mut z, mut dz, mut ddz) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
        for j in 0..len {
            let x = self.jets.at(curve, j);
            let p = p0 - Vec2::new(px[j], py[j]);
            z.push(det2(p, x.p) + c0 + r[j]);
            dz.push(det2(p, x.d1));
            ddz.push(det2(p, x.d2) - mu[j] * det2(self.jets.delta(e, j), x.d1));
        }
        (z, dz, ddz)
    }

    fn cumulative_parts(&self, e: isize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.grid().step();
        let mu = self.stress.mu(e);
        let n = self.grid().len();
        let mut ax = Vec::with_capacity(n);
        let mut ay = Vec::with_capacity(n);
        let mut ar = Vec::with_capacity(n);
        for (j, &m) in mu.iter().enumerate() {
            let d = self.jets.delta(e, j);
            ax.push(m * d.x);
            ay.push(m * d.y);
            ar.push(m * det2(d, self.jets.at(e, j).p));
        }
        (cumulative_integral(&ax, h), cumulative_integral(&ay, h), cumulative_integral(&ar, h))
    }
}

/// `H_γ(f(p))` for the point `p = (k, s)` that `path` targets.
pub fn height(framework: &Framework, stress: &StressField, path: &IncreasingPath) -> Result<f64> {
    HeightEvaluator::new(framework, stress)?.height(path)
}

/// Height along the L-shaped path to `(k, t)`; `t` must be a grid node.
pub fn height_l(framework: &Framework, stress: &StressField, k: usize, t: f64) -> Result<f64> {
    let j = stress.grid().node_index(t)?;
    HeightEvaluator::new(framework, stress)?.height_l(k, j)
}

/// Maximum pairwise height difference over paths to a common target.
#[derive(Clone, Debug, PartialEq)]
pub struct Spread {
    pub spread: f64,
    pub values: Vec<f64>,
}

pub fn path_independence_spread(
    framework: &Framework,
    stress: &StressField,
    paths: &[IncreasingPath],
) -> Result<Spread> {
    if paths.len() < 2 {
        return Err(Error::InvalidPath("need at least two paths"));
    }
    let target = (paths[0].k(), paths[0].target_node());
    if paths.iter().any(|p| (p.k(), p.target_node()) != target) {
        return Err(Error::MismatchedTargets);
    }
    let ev = HeightEvaluator::new(framework, stress)?;
    let values = paths.iter().map(|p| ev.height(p)).collect::<Result<Vec<_>>>()?;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Spread { spread: hi - lo, values })
}

/// A semi-discrete surface in space given by analytic curves `F_{-1..=n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticSurface {
    t_end: f64,
    curves: Vec<SpaceCurve>,
    grid: Grid,
}

impl AnalyticSurface {
    pub fn new(t_end: f64, curves: Vec<SpaceCurve>) -> Result<Self> {
        Self::with_panels(t_end, curves, DEFAULT_PANELS)
    }

    pub fn with_panels(t_end: f64, curves: Vec<SpaceCurve>, panels: usize) -> Result<Self> {
        if curves.len() < 3 {
            return Err(Error::CurveCount(curves.len()));
        }
        for c in &curves {
            c.x.validate()?;
            c.y.validate()?;
            c.z.validate()?;
        }
        Ok(Self { t_end, curves, grid: Grid::new(t_end, panels)? })
    }

    pub fn with_grid(&self, panels: usize) -> Result<Self> {
        Ok(Self { grid: Grid::new(self.t_end, panels)?, ..self.clone() })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n(&self) -> usize {
        self.curves.len() - 3
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn curves(&self) -> &[SpaceCurve] {
        &self.curves
    }

    pub fn curve(&self, i: isize) -> &SpaceCurve {
        &self.curves[(i + 1) as usize]
    }

    pub fn eval(&self, i: isize, t: f64) -> Result<Jet3> {
        let max = self.n() as isize + 1;
        if i < -1 || i > max {
            return Err(Error::IndexOutOfRange { index: i, min: -1, max });
        }
        Ok(self.curve(i).jet(t))
    }

    /// Orthogonal projection to the `xy` plane.
    pub fn planar(&self) -> Framework {
        Framework::with_panels(self.t_end, self.curves.iter().map(SpaceCurve::planar).collect(), self.grid.panels())
            .expect("validated surface curves")
    }
}

/// A surface whose `xy` part is an analytic framework and whose heights are
/// grid samples, with height derivatives from fourth-order stencils.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSurface {
    framework: Framework,
    z: Vec<Vec<f64>>,
    dz: Vec<Vec<f64>>,
    ddz: Vec<Vec<f64>>,
    dddz: Vec<Vec<f64>>,
    /// Set when the heights came from a stress that is not a self-stress.
    pub path_dependent: bool,
}

impl SampledSurface {
    /// `z` holds one row of grid samples per curve `-1..=n+1`; derivatives
    /// come from fourth-order stencils.
    pub fn new(framework: Framework, z: Vec<Vec<f64>>) -> Result<Self> {
        Self::check_rows(&framework, &z, "height sample")?;
        let h = framework.grid().step();
        let dz = z.iter().map(|r| derivative_samples(r, h)).collect();
        let ddz = z.iter().map(|r| second_derivative_samples(r, h)).collect();
        Self::assemble(framework, z, dz, ddz)
    }

    /// Samples with known first and second derivatives.
    pub fn with_derivatives(
        framework: Framework,
        z: Vec<Vec<f64>>,
        dz: Vec<Vec<f64>>,
        ddz: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::check_rows(&framework, &z, "height sample")?;
        Self::check_rows(&framework, &dz, "height derivative")?;
        Self::check_rows(&framework, &ddz, "height second derivative")?;
        Self::assemble(framework, z, dz, ddz)
    }

    fn check_rows(framework: &Framework, rows: &[Vec<f64>], what: &'static str) -> Result<()> {
        let grid = framework.grid();
        if rows.len() != framework.curves().len() {
            return Err(Error::Shape(format!("expected {} {what} rows, got {}", framework.curves().len(), rows.len())));
        }
        if grid.len() < 7 {
            return Err(Error::InvalidGrid("sampled surfaces need at least 6 panels"));
        }
        for row in rows {
            if row.len() != grid.len() {
                return Err(Error::Shape(format!("{what} row has {} samples, grid has {}", row.len(), grid.len())));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what, t: grid.node(j) });
            }
        }
        Ok(())
    }

    fn assemble(framework: Framework, z: Vec<Vec<f64>>, dz: Vec<Vec<f64>>, ddz: Vec<Vec<f64>>) -> Result<Self> {
        let h = framework.grid().step();
        let dddz = ddz.iter().map(|r| derivative_samples(r, h)).collect();
        Ok(Self { framework, z, dz, ddz, dddz, path_dependent: false })
    }

    /// Rows of `ż` samples.
    pub fn dz_rows(&self) -> &[Vec<f64>] {
        &self.dz
    }

    /// Rows of `z̈` samples.
    pub fn ddz_rows(&self) -> &[Vec<f64>] {
        &self.ddz
    }

    pub fn framework(&self) -> &Framework {
        &self.framework
    }

    pub fn n(&self) -> usize {
        self.framework.n()
    }

    pub fn grid(&self) -> &Grid {
        self.framework.grid()
    }

    /// Height samples of curve `i`.
    pub fn z(&self, i: isize) -> &[f64] {
        &self.z[(i + 1) as usize]
    }

    pub fn z_rows(&self) -> &[Vec<f64>] {
        &self.z
    }

    /// `(z, ż, z̈)` of curve `i` at node `j`.
    pub fn z_jet(&self, i: isize, j: usize) -> [f64; 3] {
        let r = (i + 1) as usize;
        [self.z[r][j], self.dz[r][j], self.ddz[r][j]]
    }

    pub fn jet_at_node(&self, i: isize, j: usize) -> Jet3 {
        let f: Jet2 = self.framework.jet(i, self.grid().node(j));
        let r = (i + 1) as usize;
        Jet3 {
            p: f.p.lift(self.z[r][j]),
            d1: f.d1.lift(self.dz[r][j]),
            d2: f.d2.lift(self.ddz[r][j]),
            d3: f.d3.lift(self.dddz[r][j]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SemiDiscreteSurface3D {
    Analytic(AnalyticSurface),
    Sampled(SampledSurface),
}

impl SemiDiscreteSurface3D {
    pub fn n(&self) -> usize {
        match self {
            Self::Analytic(s) => s.n(),
            Self::Sampled(s) => s.n(),
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            Self::Analytic(s) => s.grid(),
            Self::Sampled(s) => s.grid(),
        }
    }

    pub fn jet_at_node(&self, i: isize, j: usize) -> Jet3 {
        match self {
            Self::Analytic(s) => s.curve(i).jet(s.grid().node(j)),
            Self::Sampled(s) => s.jet_at_node(i, j),
        }
    }

    /// Planar part of the surface.
    pub fn planar(&self) -> Framework {
        match self {
            Self::Analytic(s) => s.planar(),
            Self::Sampled(s) => s.framework().clone(),
        }
    }
}

/// Lifts every curve `-1..=n+1` along L-shaped paths without checking the
/// stress. For a self-stress the heights are path independent.
pub fn lift_heights(framework: &Framework, stress: &StressField) -> Result<SampledSurface> {
    let ev = HeightEvaluator::new(framework, stress)?;
    let n = framework.n() as isize;
    let (mut z, mut dz, mut ddz) = (Vec::new(), Vec::new(), Vec::new());
    for k in -1..=n + 1 {
        let (a, b, c) = ev.lifted_curve_jets(k);
        z.push(a);
        dz.push(b);
        ddz.push(c);
    }
    SampledSurface::with_derivatives(framework.clone(), z, dz, ddz)
}

/// Lifting `L(p) = (f(p), H(f(p)))` of a self-stressed framework. Refuses
/// stresses whose normalized equilibrium residual exceeds `tol`.
pub fn build_lifting(framework: &Framework, stress: &StressField, tol: f64) -> Result<SampledSurface> {
    let report = residual_report(framework, stress)?;
    if !(report.max < tol) {
        return Err(Error::NotSelfStressed(alloc::boxed::Box::new(report)));
    }
    lift_heights(framework, stress)
}

/// Largest normalized `|det(ΔF_i, Ḟ_i, Ḟ_{i+1})| / (|ΔF_i| |Ḟ_i| |Ḟ_{i+1}|)`
/// over all strips `-1..=n` and grid nodes.
pub fn conjugacy_residual(surface: &SemiDiscreteSurface3D) -> f64 {
    let n = surface.n() as isize;
    let mut worst = 0.0f64;
    for j in 0..surface.grid().len() {
        let mut cur = surface.jet_at_node(-1, j);
        for i in -1..=n {
            let next = surface.jet_at_node(i + 1, j);
            worst = worst.max(strip_defect(next.p - cur.p, cur.d1, next.d1));
            cur = next;
        }
    }
    worst
}

fn strip_defect(delta: Vec3, a: Vec3, b: Vec3) -> f64 {
    libm::fabs(det3(delta, a, b)) / (delta.norm() * a.norm() * b.norm() + 1e-30)
}

/// Result of the affine reversal check.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineDefect {
    pub max_defect: f64,
    /// `max |H|` over the samples.
    pub height_scale: f64,
}

/// Compares the lifting of `f` with the lifting of the reversed framework
/// `g_k = f_{n−k}` under `λ̂_k = −λ_{n−k}`, `μ̂_k = −μ_{n−k−1}`. The two must
/// differ by `x ↦ Σ_i λ_i(0) det(ḟ_i(0), x − f_i(0))`.
pub fn reversal_affine_defect(framework: &Framework, stress: &StressField, tol: f64) -> Result<AffineDefect> {
    let report = residual_report(framework, stress)?;
    if !(report.max < tol) {
        return Err(Error::NotSelfStressed(alloc::boxed::Box::new(report)));
    }
    let reversed = framework.reversed();
    let rstress = stress.reversed();
    let ev_f = HeightEvaluator::new(framework, stress)?;
    let ev_g = HeightEvaluator::new(&reversed, &rstress)?;
    let n = framework.n();
    let jets = &ev_f.jets;
    let affine = |x: Vec2| -> f64 {
        (0..=n)
            .map(|i| {
                let jet = jets.at(i as isize, 0);
                stress.lambda(i)[0] * det2(jet.d1, x - jet.p)
            })
            .sum()
    };
    let mut out = AffineDefect { max_defect: 0.0, height_scale: 0.0 };
    for k in 0..=n {
        let hf = ev_f.lifted_curve(k as isize);
        let hg = ev_g.lifted_curve((n - k) as isize);
        for j in 0..framework.grid().len() {
            let x = jets.at(k as isize, j).p;
            out.max_defect = out.max_defect.max(libm::fabs(hf[j] - hg[j] - affine(x)));
            out.height_scale = out.height_scale.max(libm::fabs(hf[j]));
        }
    }
    Ok(out)
}
