//! Tests of complete spatial randomness for planar point patterns based on
//! two-dimensional spacings.
//!
//! A pattern of `m` points in a rectangle is rescaled to the unit square;
//! its sorted coordinates cut each axis into `n = m + 1` spacings, and the
//! products `A_ij = dx_i dy_j` form the two-dimensional spacings. Additive
//! statistics `V = Σ g(n² A_ij)` are asymptotically normal under the null,
//! with mean and variance given by moments of `g(XY)` for independent unit
//! exponentials.
//!
//! ```
//! use csr_spacings::{gfun, moments, pattern, stat};
//!
//! let p = pattern::load_pattern_str("0.5,0.5\n", pattern::Window::unit()).unwrap();
//! let g = gfun::builtin("square").unwrap();
//! let m = moments::compute_moments(&g, moments::DEFAULT_NODES).unwrap();
//! let r = stat::asymptotic_test(&p, &g, &m, stat::Sided::Two).unwrap();
//! assert_eq!(r.statistic, 4.0);
//! assert!((r.z + 0.75).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod gfun;
pub mod moments;
pub mod numeric;
pub mod pattern;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod spacings;
pub mod stat;

pub use error::{Error, Result};
pub use gfun::{builtin, GFunction, Kernel};
pub use moments::{compute_moments, MomentSet};
pub use pattern::{load_pattern, rescale_to_unit, Point, PointPattern, Window};
pub use spacings::{compute_grid, SpacingsGrid};
pub use stat::{asymptotic_test, Sided, TestResult};
