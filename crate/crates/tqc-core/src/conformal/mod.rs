//! Numerical Riemann mapping onto Jordan domains and the quantities
//! measured through it: the boundary distance d_f, |f′|, hyperbolic
//! distances and geodesics, harmonic measure, the boundary sector
//! regions B(z)/I(z)/A(z), and the distortion constants they produce.

mod checks;
mod geometry;
mod zipper;

pub use checks::{
    default_polar_grid, derivative_ratio_check, koebe_check, lemma_constants_report, thm47_verify,
    ConformalConstantsReport, DerivRatioReport, GridWitness, KoebeReport, PairWitness,
    Thm47Report,
};
pub use geometry::{
    arc_to_center, geodesic_between, geodesic_nearest_delta, harmonic_measure,
    hyperbolic_distance, SectorGeometry,
};
pub use zipper::{deriv_abs, dist_to_boundary, zipper_fit, DiskMap};

use crate::geom::Point;
use num_complex::Complex64;

#[inline]
pub(crate) fn c64(p: Point) -> Complex64 {
    Complex64::new(p.x, p.y)
}

#[inline]
pub(crate) fn pt(z: Complex64) -> Point {
    Point::new(z.re, z.im)
}
