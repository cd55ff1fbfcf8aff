//! Deterministic numerical kernels: composite Simpson quadrature, classic
//! RK4 marching, finite-difference stencils on uniform grids and a Cramer
//! 2×2 solve.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geomcore::{det2, Vec2};

/// Relative degeneracy threshold: a pair of vectors counts as independent
/// when `|det(a, b)| > EPS_REG * |a| * |b|`.
pub const EPS_REG: f64 = 1e-9;

/// Default number of panels of a parameter grid.
pub const DEFAULT_PANELS: usize = 256;

/// Uniform grid `0 = t_0 < t_1 < ... < t_N = T` with an even panel count.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    t_end: f64,
    panels: usize,
}

impl Grid {
    pub fn new(t_end: f64, panels: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidGrid("T must be positive and finite"));
        }
        if panels < 2 || !panels.is_multiple_of(2) {
            return Err(Error::InvalidGrid("panel count must be even and at least 2"));
        }
        Ok(Self { t_end, panels })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of panels `N`.
    pub fn panels(&self) -> usize {
        self.panels
    }

    /// Number of nodes `N + 1`.
    pub fn len(&self) -> usize {
        self.panels + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.panels as f64
    }

    /// Parameter value of node `j`; the last node is exactly `T`.
    pub fn node(&self, j: usize) -> f64 {
        if j >= self.panels {
            self.t_end
        } else {
            j as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.node(j))
    }

    /// Index of the node at parameter `t`, or [`Error::OffGrid`].
    pub fn node_index(&self, t: f64) -> Result<usize> {
        if !t.is_finite() || t < -1e-12 * self.t_end || t > self.t_end * (1.0 + 1e-12) {
            return Err(Error::OffGrid { t });
        }
        let x = t / self.step();
        let j = libm::round(x);
        if libm::fabs(x - j) > 1e-9 {
            return Err(Error::OffGrid { t });
        }
        Ok(j as usize)
    }
}

/// Composite Simpson approximation of `∫_a^b f` with `n_panels` panels.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n_panels: usize) -> Result<f64> {
    if !(a <= b) || n_panels < 2 || !n_panels.is_multiple_of(2) {
        return Err(Error::InvalidInterval { a, b, panels: n_panels });
    }
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / n_panels as f64;
    let mut sum = 0.0;
    for j in 0..=n_panels {
        let t = if j == n_panels { b } else { a + j as f64 * h };
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "integrand", t });
        }
        let w = if j == 0 || j == n_panels {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * v;
    }
    Ok(sum * h / 3.0)
}

/// Fourth-order integral of uniformly spaced samples between nodes `from`
/// and `to` (`from <= to`).
///
/// Even panel counts use composite Simpson; odd counts of three or more
/// close with a Simpson 3/8 block. A single panel is integrated with the
/// cubic through four neighbouring samples, so `samples` needs at least
/// four entries in that case.
pub fn integrate_samples(samples: &[f64], h: f64, from: usize, to: usize) -> f64 {
    debug_assert!(from <= to && to < samples.len());
    let m = to - from;
    match m {
        0 => 0.0,
        1 => {
            let n = samples.len();
            assert!(n >= 4, "single-panel integration needs four samples");
            if from == 0 {
                h * (9.0 * samples[0] + 19.0 * samples[1] - 5.0 * samples[2] + samples[3]) / 24.0
            } else if to + 1 < n {
                h * (-samples[from - 1] + 13.0 * samples[from] + 13.0 * samples[to] - samples[to + 1]) / 24.0
            } else {
                h * (samples[to - 3] - 5.0 * samples[to - 2] + 19.0 * samples[from] + 9.0 * samples[to]) / 24.0
            }
        }
        _ => {
            let simpson_end = if m.is_multiple_of(2) { to } else { to - 3 };
            let mut sum = 0.0;
            if simpson_end > from {
                let mut acc = samples[from] + samples[simpson_end];
                for (j, v) in samples.iter().enumerate().take(simpson_end).skip(from + 1) {
                    acc += if (j - from) % 2 == 1 { 4.0 } else { 2.0 } * v;
                }
                sum += acc * h / 3.0;
            }
            if simpson_end < to {
                let s = &samples[simpson_end..=to];
                sum += 3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3]);
            }
            sum
        }
    }
}

/// `∫_0^{t_j}` of the samples for every node `j`.
pub fn cumulative_integral(samples: &[f64], h: f64) -> Vec<f64> {
    (0..samples.len()).map(|j| integrate_samples(samples, h, 0, j)).collect()
}

/// Solves `x1 * col1 + x2 * col2 = rhs` by Cramer's rule.
pub fn solve2x2(col1: Vec2, col2: Vec2, rhs: Vec2) -> Result<(f64, f64)> {
    let det = det2(col1, col2);
    if !(libm::fabs(det) > EPS_REG * col1.norm() * col2.norm()) {
        return Err(Error::DegenerateBasis { det, curve: None, t: None });
    }
    Ok((det2(rhs, col2) / det, det2(col1, rhs) / det))
}

/// Classic fourth-order Runge-Kutta on the nodes of `grid`.
///
/// `deriv(t, y, dy)` writes `dy/dt` into `dy`; it is evaluated at nodes and
/// at half steps. The first returned state is `y0`.
pub fn ode_march<F>(mut deriv: F, y0: &[f64], grid: &Grid) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = y0.len();
    let h = grid.step();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0.to_vec());

    let mut k = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
    let mut tmp = vec![0.0; dim];
    for j in 0..grid.panels() {
        let t = grid.node(j);
        let y = &out[j];
        let stages = [(0.0, 0.0), (0.5 * h, 0.5 * h), (0.5 * h, 0.5 * h), (h, h)];
        for (s, &(dt, dy)) in stages.iter().enumerate() {
            for d in 0..dim {
                tmp[d] = if s == 0 { y[d] } else { y[d] + dy * k[s - 1][d] };
            }
            let ts = if s == 3 { grid.node(j + 1) } else { t + dt };
            deriv(ts, &tmp, &mut k[s])?;
            if k[s].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteStage { stage: s as u8 + 1, t: ts });
            }
        }
        let next = (0..dim).map(|d| y[d] + h / 6.0 * (k[0][d] + 2.0 * k[1][d] + 2.0 * k[2][d] + k[3][d])).collect();
        out.push(next);
    }
    Ok(out)
}

/// First derivative of uniformly spaced samples: the fourth-order five-point
/// central stencil inside, six-point fifth-order one-sided stencils at the
/// two nodes nearest each end. Needs at least six samples.
pub fn derivative_samples(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    assert!(n >= 6, "derivative stencil needs six samples");
    let f = samples;
    let one_sided = |s: &[f64; 6]| -> [f64; 2] {
        [
            (-137.0 * s[0] + 300.0 * s[1] - 300.0 * s[2] + 200.0 * s[3] - 75.0 * s[4] + 12.0 * s[5]) / (60.0 * h),
            (-12.0 * s[0] - 65.0 * s[1] + 120.0 * s[2] - 60.0 * s[3] + 20.0 * s[4] - 3.0 * s[5]) / (60.0 * h),
        ]
    };
    let mut out = vec![0.0; n];
    for j in 2..n - 2 {
        out[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h);
    }
    let head = one_sided(&[f[0], f[1], f[2], f[3], f[4], f[5]]);
    out[0] = head[0];
    out[1] = head[1];
    let tail = one_sided(&[f[n - 1], f[n - 2], f[n - 3], f[n - 4], f[n - 5], f[n - 6]]);
    out[n - 1] = -tail[0];
    out[n - 2] = -tail[1];
    out
}

/// Fourth-order second derivative of uniformly spaced samples. Needs at
/// least six samples.
pub fn second_derivative_samples(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    assert!(n >= 6, "second-derivative stencil needs six samples");
    let f = samples;
    let h2 = 12.0 * h * h;
    let one_sided = |s: &[f64; 6]| -> [f64; 2] {
        [
            (45.0 * s[0] - 154.0 * s[1] + 214.0 * s[2] - 156.0 * s[3] + 61.0 * s[4] - 10.0 * s[5]) / h2,
            (10.0 * s[0] - 15.0 * s[1] - 4.0 * s[2] + 14.0 * s[3] - 6.0 * s[4] + s[5]) / h2,
        ]
    };
    let mut out = vec![0.0; n];
    for j in 2..n - 2 {
        out[j] = (-f[j - 2] + 16.0 * f[j - 1] - 30.0 * f[j] + 16.0 * f[j + 1] - f[j + 2]) / h2;
    }
    let head = one_sided(&[f[0], f[1], f[2], f[3], f[4], f[5]]);
    out[0] = head[0];
    out[1] = head[1];
    let tail = one_sided(&[f[n - 1], f[n - 2], f[n - 3], f[n - 4], f[n - 5], f[n - 6]]);
    out[n - 1] = tail[0];
    out[n - 2] = tail[1];
    out
}
