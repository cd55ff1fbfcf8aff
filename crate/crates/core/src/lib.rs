//! Semi-discrete frameworks in the plane: self-stresses, their liftings to
//! semi-discrete surfaces in space, and the projection of conjugate
//! semi-discrete surfaces back to stressed frameworks.
//!
//! Curves are indexed `-1..=n+1` and parametrized over `[0, T]`. Everything
//! that needs sampling works on a uniform grid with an even panel count.

#![no_std]
// Negated float comparisons are deliberate: NaN must fail every tolerance test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod builtins;
pub mod error;
pub mod framework;
pub mod geomcore;
pub mod lifting;
pub mod numerics;
pub mod onestrip;
pub mod projection;
pub mod statics;

pub use error::{Error, Result};
pub use framework::{Coordinate, Framework, Jet2, Jet3, PlanarCurve, SpaceCurve, TrigTerm};
pub use geomcore::{det2, det3, Vec2, Vec3};
pub use numerics::Grid;
pub use statics::StressField;
