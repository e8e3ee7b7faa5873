//! Signal counting-rate distributions for entangled ghost imaging with
//! type-II SPDC photon pairs, under non-collapse (Heisenberg), pure-state
//! collapse and mixed-state collapse evolution.
//!
//! One transverse dimension throughout; all lengths in meters.

// `!(x > 0.0)` is deliberate throughout: NaN must fail positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod models;
pub mod quadrature;

pub use analysis::{compare, fwhm, ComparisonReport, Distribution, Normalization};
pub use error::{Error, Result};
pub use geometry::GhostGeometry;
pub use kernels::{IdlerDetector, KernelContext, KernelMethod, PlaneSelector, SignalPlane};
pub use quadrature::{ComplexField, Grid1D};
