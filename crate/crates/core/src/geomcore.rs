//! Planar and spatial determinant algebra, the Grassmann-Plücker identity
//! and the regularity / bracket predicates evaluated on frameworks.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::Result;
use crate::framework::Framework;
use crate::numerics::{Grid, EPS_REG};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec2 {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    /// Rotation through +90 degrees.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = libm::sincos(angle);
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lift(self, z: f64) -> Vec3 {
        Vec3::new(self.x, self.y, z)
    }
}

impl Vec3 {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

macro_rules! impl_ops {
    ($t:ident { $($f:ident),+ }) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t { $t { $($f: self.$f + o.$f),+ } }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, o: $t) { $(self.$f += o.$f;)+ }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t { $t { $($f: self.$f - o.$f),+ } }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t { $t { $($f: -self.$f),+ } }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t { $t { $($f: self.$f * s),+ } }
        }
        impl Mul<$t> for f64 {
            type Output = $t;
            fn mul(self, v: $t) -> $t { v * self }
        }
    };
}

impl_ops!(Vec2 { x, y });
impl_ops!(Vec3 { x, y, z });

pub fn det2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Scalar triple product `a · (b × c)`.
pub fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    a.dot(b.cross(c))
}

/// `det(a,b)det(c,d) − det(a,c)det(b,d) + det(a,d)det(b,c)`, which vanishes
/// identically for planar vectors.
pub fn gp_residual(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    det2(a, b) * det2(c, d) - det2(a, c) * det2(b, d) + det2(a, d) * det2(b, c)
}

/// Worst-case independence of `(ḟ_i, Δf_i)` and `(ḟ_i, Δf_{i-1})` over the
/// curves `0..=n` and the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    /// Minimum of `|det(ḟ_i, Δf_i)|`.
    pub min_forward: f64,
    pub min_forward_at: (isize, f64),
    /// Minimum of `|det(ḟ_i, Δf_{i-1})|`.
    pub min_backward: f64,
    pub min_backward_at: (isize, f64),
    /// Minimum of `|det(a, b)| / (|a| |b|)` over both pairs.
    pub min_forward_sine: f64,
    pub min_backward_sine: f64,
    pub pass: bool,
}

impl RegularityReport {
    pub fn min_sine(&self) -> f64 {
        self.min_forward_sine.min(self.min_backward_sine)
    }
}

pub fn regularity_report(framework: &Framework, grid: &Grid) -> RegularityReport {
    let mut r = RegularityReport {
        min_forward: f64::INFINITY,
        min_forward_at: (0, 0.0),
        min_backward: f64::INFINITY,
        min_backward_at: (0, 0.0),
        min_forward_sine: f64::INFINITY,
        min_backward_sine: f64::INFINITY,
        pass: true,
    };
    let sine = |d: f64, a: Vec2, b: Vec2| {
        let s = a.norm() * b.norm();
        if s > 0.0 {
            libm::fabs(d) / s
        } else {
            0.0
        }
    };
    for i in 0..=framework.n() as isize {
        for t in grid.nodes() {
            let prev = framework.jet(i - 1, t);
            let cur = framework.jet(i, t);
            let next = framework.jet(i + 1, t);
            let fwd = next.p - cur.p;
            let bwd = cur.p - prev.p;
            let df = det2(cur.d1, fwd);
            let db = det2(cur.d1, bwd);
            if libm::fabs(df) < r.min_forward {
                r.min_forward = libm::fabs(df);
                r.min_forward_at = (i, t);
            }
            if libm::fabs(db) < r.min_backward {
                r.min_backward = libm::fabs(db);
                r.min_backward_at = (i, t);
            }
            r.min_forward_sine = r.min_forward_sine.min(sine(df, cur.d1, fwd));
            r.min_backward_sine = r.min_backward_sine.min(sine(db, cur.d1, bwd));
            let ok = |d: f64, b: Vec2| libm::fabs(d) > EPS_REG * cur.d1.norm() * b.norm();
            if !(ok(df, fwd) && ok(db, bwd)) {
                r.pass = false;
            }
        }
    }
    r
}

/// The sixteen determinants of three consecutive curves `i-1, i, i+1` at one
/// parameter value. Field names follow the usual bracket shorthand; the
/// `_bar` variants refer to the strip on the `i-1` side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketSet {
    /// `det(Δf_{i-1}, Δf_i)`
    pub a: f64,
    /// `det(Δf_i, ḟ_i)`
    pub b: f64,
    /// `det(Δf_{i-1}, ḟ_{i-1})`
    pub b_bar: f64,
    /// `det(Δf_i, ḟ_{i+1})`
    pub c: f64,
    /// `det(Δf_{i-1}, ḟ_i)`
    pub c_bar: f64,
    /// `det(Δf_i, ḟ_{i-1})`
    pub d: f64,
    /// `det(Δf_{i-1}, ḟ_{i+1})`
    pub e: f64,
    /// `det(Δf_i, f̈_i)`
    pub g: f64,
    /// `det(Δf_{i-1}, f̈_{i-1})`
    pub g_bar: f64,
    /// `det(Δf_{i-1}, f̈_i)`
    pub h: f64,
    /// `det(ḟ_i, ḟ_{i+1})`
    pub i: f64,
    /// `det(ḟ_{i-1}, ḟ_i)`
    pub i_bar: f64,
    /// `det(ḟ_i, f̈_i)`
    pub j: f64,
    /// `det(ḟ_{i-1}, f̈_{i-1})`
    pub j_bar: f64,
    /// `det(ḟ_{i-1}, f̈_i)`
    pub k: f64,
    /// `det(f̈_{i-1}, ḟ_i)`
    pub l: f64,
}

pub fn bracket_set(framework: &Framework, i: isize, t: f64) -> Result<BracketSet> {
    framework.check_index(i, 0, framework.n() as isize)?;
    let prev = framework.eval(i - 1, t)?;
    let cur = framework.eval(i, t)?;
    let next = framework.eval(i + 1, t)?;
    let dp = cur.p - prev.p;
    let dc = next.p - cur.p;
    Ok(BracketSet {
        a: det2(dp, dc),
        b: det2(dc, cur.d1),
        b_bar: det2(dp, prev.d1),
        c: det2(dc, next.d1),
        c_bar: det2(dp, cur.d1),
        d: det2(dc, prev.d1),
        e: det2(dp, next.d1),
        g: det2(dc, cur.d2),
        g_bar: det2(dp, prev.d2),
        h: det2(dp, cur.d2),
        i: det2(cur.d1, next.d1),
        i_bar: det2(prev.d1, cur.d1),
        j: det2(cur.d1, cur.d2),
        j_bar: det2(prev.d1, prev.d2),
        k: det2(prev.d1, cur.d2),
        l: det2(prev.d2, cur.d1),
    })
}
