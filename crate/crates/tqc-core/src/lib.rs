//! Quantitative geometry of curves with Hölder-type bounded turning.
//!
//! A closed curve has *turning exponent* `t` with constant `C` when every
//! pair of points `x, y` on it satisfies `diam Γ(x, y) <= C |x - y|^t`,
//! where `Γ(x, y)` is the smaller-diameter subarc between them. This crate
//! measures that inequality on polylines and builds the machinery around
//! it:
//!
//! - [`curve`]: closed polylines, cyclic subarcs, diameters.
//! - [`generate`]: reference curve families (circle, ellipse, snowflake,
//!   power cusp, seeded perturbations).
//! - [`turning`]: turning constants `C*(t)`, witnesses, log-log exponent
//!   fits.
//! - [`subdivide`]: greedy diameter-controlled subdivision, the frozen
//!   constant schedule (`p`, `δ`, `μ`, `m`, `n`, `N`, `c`, `R` in log2
//!   space), and word-indexed subarc trees.
//! - [`boundary`]: circle-to-curve boundary parametrizations (tree-based
//!   and arclength), reparametrization, evaluation.
//! - [`qs`]: weak quasisymmetry constants, modulus envelopes, Hölder
//!   constants, and the small-ratio bound `ψ`.
//! - [`conformal`]: a geodesic-composition conformal fitter for Jordan
//!   domains plus the distortion, hyperbolic, and harmonic-measure checks
//!   that calibrate its empirical constants.
//!
//! All randomized scans are seeded and independent of thread count; every
//! report type serializes to JSON with stable field order.

pub mod boundary;
pub mod conformal;
pub mod curve;
pub mod error;
pub mod generate;
pub mod geom;
pub mod qs;
pub mod subdivide;
pub mod turning;

pub use curve::{ArcSpan, ClosedCurve, Direction, Orientation, Point};
pub use error::{Error, Result};
