//! Moment-SOS relaxations for polynomial optimization over products of spheres.
//!
//! The crate covers the whole path from a blocked multivariate polynomial to a
//! certified global minimizer:
//!
//! * [`polyring`]: sparse polynomials over the variable blocks `x_1, …, x_m`.
//! * [`moments`]: monomial bases, moment and localizing matrices, and the
//!   assembly of the order-`k` moment relaxation as a [`moments::ConicProblem`].
//! * [`sdp`]: a primal-dual interior-point solver for those conic problems.
//! * [`certify`]: flat truncation, atom extraction and KKT/second-order checks.
//! * [`tensor`]: best rank-one tensor approximation on top of the pipeline.
//! * [`oracle`]: independent heuristics (SVD, power iteration, projected
//!   gradient multistart) used as ground truth in tests.
//! * [`ineq`]: inequality-constrained variants, strata and LIC sampling.

pub mod certify;
pub mod error;
pub mod ineq;
pub mod moments;
pub mod oracle;
pub mod pipeline;
pub mod polyring;
pub mod problem;
pub mod rng;
pub mod sdp;
pub mod tensor;

pub use error::{Error, Result};
pub use pipeline::{solve_pop, HierarchyOutcome, HierarchySettings};
pub use polyring::{Exponent, MultiPoly, Multidegree, ProductSphereShape};
pub use problem::PolyProblem;
