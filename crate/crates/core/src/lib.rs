//! Discrete slicing toolkit for 1-separated planar point sets.
//!
//! The crate measures how point sets in the first quadrant grow (mass and
//! counting dimension at finite scale), cuts them with width-one tubes and
//! floor lines `y = floor(u x + v)`, and checks the finite-field line
//! incidence identities exactly by enumeration.
//!
//! Module map:
//!
//! * [`geometry`] and [`pointset`]: points, tubes, floor lines, boxes and the
//!   unit-cell index used for every counting query.
//! * [`generators`]: the example constructions (unit-spaced line, parabolic
//!   staircase, zig-zag, cone families), Cartesian grids and random sets of
//!   prescribed growth exponent.
//! * [`dimension`]: finite-scale dimension profiles and the dyadic annulus
//!   level finder.
//! * [`survey`]: `(u, v)` parameter sweeps over floor lines and tubes.
//! * [`finitefield`]: brute-force line incidences over `F_p^2`.
//! * [`report`] and [`repro`]: report emission and the reproducible checks.

// `!(a < b)` guards are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod error;
pub mod finitefield;
pub mod generators;
pub mod geometry;
pub mod io;
pub mod par;
pub mod pointset;
pub mod report;
pub mod repro;
pub mod survey;

pub use error::{Error, Result};
pub use geometry::{BoxSpec, FloorLine, Point, Rect, Tube};
pub use par::Execution;
pub use pointset::{PlanarSet, PointSet, SeparationReport};
