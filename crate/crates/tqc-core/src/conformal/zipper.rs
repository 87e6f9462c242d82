//! Riemann mapping by the geodesic algorithm: the curve is opened along
//! one edge, then each further vertex is absorbed by a Möbius rotation
//! of the half-plane followed by a vertical-slit square-root map,
//! unzipping the boundary onto the real line one orthogonal circular
//! arc at a time. A final Möbius + square closes the curve, and a
//! half-plane → disk transfer normalizes f(0) and arg f′(0).
//!
//! Forward fitting tracks only the interior-side real position of each
//! absorbed vertex; evaluation runs the elementary inverses in reverse
//! order, so the map is stored exactly as its stage parameters.
//!
//! Near a boundary cusp the correspondence angles cluster like
//! exp(−c/x), which double precision cannot keep strictly ordered;
//! vertices whose angles collapse onto an already-recorded one are
//! dropped from `boundary_corr` (counted in `dropped_vertices`), so the
//! stored correspondence is exactly the resolved one.

use super::checks::koebe_check;
use super::{c64, pt};
use crate::curve::{ClosedCurve, Orientation, Point};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Radial pullback applied to boundary evaluations.
pub const BOUNDARY_INSET: f64 = 1e-9;

/// One vertex absorption: z ↦ vslit(mob(z, b), h) / h. The trailing
/// dilation renormalizes the slit to unit height so the half-plane
/// coordinates stay O(1) across hundreds of stages — without it the
/// chain scale inflates past 1e150 and the closing transform overflows.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct UnzipStage {
    /// Möbius pole; `None` when the vertex image is already on the
    /// imaginary axis (infinite pole, identity Möbius).
    b: Option<f64>,
    /// Slit height after the Möbius, before renormalization.
    h: f64,
}

#[derive(Debug, Clone)]
pub struct DiskMap {
    z0: Complex64,
    z1: Complex64,
    unzips: Vec<UnzipStage>,
    /// Real position of the opening vertex when the curve closes;
    /// `None` encodes the point at infinity.
    p0: Option<f64>,
    /// Interior quadrant after closing: false → {Re > 0} (w ↦ w²),
    /// true → {Re < 0} (w ↦ −w²).
    negate: bool,
    w_star: Complex64,
    rotation: f64,
    center_image: Point,
    boundary_corr: Vec<(f64, Point)>,
    dropped_vertices: usize,
    domain_curve: ClosedCurve,
}

#[derive(Serialize, Deserialize)]
struct DiskMapJson {
    z0: [f64; 2],
    z1: [f64; 2],
    unzips: Vec<UnzipStage>,
    p0: Option<f64>,
    negate: bool,
    w_star: [f64; 2],
    rotation: f64,
    boundary_corr: Vec<[f64; 3]>,
    dropped_vertices: usize,
    curve: serde_json::Value,
}

// ---- elementary stages ----------------------------------------------------

fn phi1(z0: Complex64, z1: Complex64, z: Complex64) -> Complex64 {
    Complex64::i() * ((z - z1) / (z - z0)).sqrt()
}

fn phi1_inv(z0: Complex64, z1: Complex64, w: Complex64) -> Complex64 {
    let v = -w * w;
    (z1 - v * z0) / (Complex64::new(1.0, 0.0) - v)
}

fn mob(z: Complex64, b: Option<f64>) -> Complex64 {
    match b {
        None => z,
        Some(b) => b * z / (b - z),
    }
}

fn mob_inv(z: Complex64, b: Option<f64>) -> Complex64 {
    match b {
        None => z,
        Some(b) => b * z / (b + z),
    }
}

fn mob_real(x: f64, b: Option<f64>) -> f64 {
    match b {
        None => x,
        Some(b) => {
            if !x.is_finite() {
                -b
            } else if x == b {
                f64::INFINITY
            } else {
                b * x / (b - x)
            }
        }
    }
}

/// H ∖ [0, ih] → H, w² = u² + h², branch asymptotic to the identity.
fn vslit(u: Complex64, h: f64) -> Complex64 {
    if u.norm() >= 0.5 * h {
        let q = h / u;
        u * (Complex64::new(1.0, 0.0) + q * q).sqrt()
    } else {
        let q = u / h;
        let cand = (Complex64::new(1.0, 0.0) + q * q).sqrt() * h;
        pick_branch(cand, u)
    }
}

fn vslit_real(x: f64, h: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    x.signum() * x.hypot(h)
}

/// Inverse slit map H → H ∖ [0, ih], u² = w² − h².
fn vslit_inv(w: Complex64, h: f64) -> Complex64 {
    if w.norm() >= 0.5 * h {
        let q = h / w;
        w * (Complex64::new(1.0, 0.0) - q * q).sqrt()
    } else {
        let q = w / h;
        let cand = (q * q - Complex64::new(1.0, 0.0)).sqrt() * h;
        pick_branch(cand, w)
    }
}

/// Chooses ±cand with positive imaginary part; a real result inherits
/// the side (sign of the real part) of the source point.
fn pick_branch(cand: Complex64, src: Complex64) -> Complex64 {
    if cand.im > 0.0 {
        cand
    } else if cand.im < 0.0 {
        -cand
    } else if cand.re.signum() == src.re.signum() {
        cand
    } else {
        -cand
    }
}

fn close_fwd(u: Complex64, p0: Option<f64>, negate: bool) -> Complex64 {
    let v = mob(u, p0);
    if negate {
        -v * v
    } else {
        v * v
    }
}

fn close_inv(u: Complex64, negate: bool) -> Complex64 {
    if negate {
        -(-u).sqrt()
    } else {
        u.sqrt()
    }
}

impl DiskMap {
    /// Forward evaluation. Boundary inputs are pulled to radius
    /// 1 − 1e-9 (radial limit).
    pub fn eval(&self, z: Point) -> Point {
        let mut w = c64(z) * Complex64::from_polar(1.0, self.rotation);
        let r = w.norm();
        let cap = 1.0 - BOUNDARY_INSET;
        if r > cap {
            w *= cap / r;
        }
        // disk → half-plane
        let u = (w * self.w_star.conj() - self.w_star) / (w - Complex64::new(1.0, 0.0));
        let mut v = close_inv(u, self.negate);
        v = mob_inv(v, self.p0);
        for st in self.unzips.iter().rev() {
            v = vslit_inv(v * st.h, st.h);
            v = mob_inv(v, st.b);
        }
        pt(phi1_inv(self.z0, self.z1, v))
    }

    pub fn center_image(&self) -> Point {
        self.center_image
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    /// Fitted (theta, vertex) pairs, thetas strictly increasing. Holds
    /// every input vertex whose angle is resolvable at double
    /// precision; see `dropped_vertices`.
    pub fn boundary_corr(&self) -> &[(f64, Point)] {
        &self.boundary_corr
    }

    /// Input vertices whose correspondence angle collapsed onto an
    /// already-recorded one (exponential crowding near cusps).
    pub fn dropped_vertices(&self) -> usize {
        self.dropped_vertices
    }

    /// Smallest gap between consecutive recorded correspondence
    /// angles — the finest boundary spacing the fit resolved.
    pub fn min_boundary_gap(&self) -> f64 {
        self.boundary_corr
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn domain_curve(&self) -> &ClosedCurve {
        &self.domain_curve
    }

    pub fn stage_count(&self) -> usize {
        self.unzips.len()
    }

    /// Copy with one unzip stage deleted — a deliberately broken map
    /// for negative-control testing of the validation checks.
    pub fn with_stage_removed(&self, index: usize) -> DiskMap {
        let mut copy = self.clone();
        if index < copy.unzips.len() {
            copy.unzips.remove(index);
        }
        copy
    }

    /// Boundary correspondence as a sampled circle map, decimated to
    /// at most roughly `max_samples` entries.
    pub fn boundary_map(&self, max_samples: usize) -> Result<crate::boundary::BoundaryMap> {
        use crate::boundary::{BoundaryMap, MapKind, MapSample};
        let n = self.boundary_corr.len();
        let stride = n.div_ceil(max_samples.max(16)).max(1);
        let samples: Vec<MapSample> = self
            .boundary_corr
            .iter()
            .step_by(stride)
            .map(|&(theta, point)| MapSample {
                theta,
                point,
                arclength: self.domain_curve.project_arclength(point).0,
            })
            .collect();
        BoundaryMap::from_samples(samples, MapKind::Conformal, self.domain_curve.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        let json = DiskMapJson {
            z0: [self.z0.re, self.z0.im],
            z1: [self.z1.re, self.z1.im],
            unzips: self.unzips.clone(),
            p0: self.p0,
            negate: self.negate,
            w_star: [self.w_star.re, self.w_star.im],
            rotation: self.rotation,
            boundary_corr: self.boundary_corr.iter().map(|&(t, p)| [t, p.x, p.y]).collect(),
            dropped_vertices: self.dropped_vertices,
            curve: serde_json::from_str(&self.domain_curve.to_json())?,
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    pub fn from_json(text: &str) -> Result<DiskMap> {
        let raw: DiskMapJson = serde_json::from_str(text)?;
        let curve = ClosedCurve::from_json(&raw.curve.to_string())?;
        let mut map = DiskMap {
            z0: Complex64::new(raw.z0[0], raw.z0[1]),
            z1: Complex64::new(raw.z1[0], raw.z1[1]),
            unzips: raw.unzips,
            p0: raw.p0,
            negate: raw.negate,
            w_star: Complex64::new(raw.w_star[0], raw.w_star[1]),
            rotation: raw.rotation,
            center_image: Point::new(0.0, 0.0),
            boundary_corr: raw
                .boundary_corr
                .iter()
                .map(|e| (e[0], Point::new(e[1], e[2])))
                .collect(),
            dropped_vertices: raw.dropped_vertices,
            domain_curve: curve,
        };
        map.center_image = map.eval(Point::new(0.0, 0.0));
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        if self.boundary_corr.len() < 3 {
            return Err(Error::Validation("boundary correspondence too short".into()));
        }
        for w in self.boundary_corr.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Validation("boundary thetas not increasing".into()));
            }
        }
        let diam = self.domain_curve.curve_diameter();
        let back = self.eval(Point::new(0.0, 0.0));
        if back.dist(self.center_image) > 1e-9 * diam {
            return Err(Error::Validation("center image does not reproduce".into()));
        }
        Ok(())
    }
}

/// |f′(z)| by complex central differences with step 1e-4·(1−|z|),
/// Richardson-extrapolated once.
pub fn deriv_abs(map: &DiskMap, z: Point) -> Result<f64> {
    let r = z.norm();
    if r > 1.0 - 1e-6 {
        return Err(Error::InvalidArgument(format!("|z| = {r} too close to the boundary")));
    }
    let h = 1e-4 * (1.0 - r);
    let diff = |step: f64| {
        let a = c64(map.eval(Point::new(z.x + step, z.y)));
        let b = c64(map.eval(Point::new(z.x - step, z.y)));
        (a - b) / (2.0 * step)
    };
    let d1 = diff(h);
    let d2 = diff(0.5 * h);
    Ok(((4.0 * d2 - d1) / 3.0).norm())
}

/// d_f(z): distance from f(z) to the domain boundary polyline.
pub fn dist_to_boundary(map: &DiskMap, z: Point) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::InvalidArgument("z must be interior".into()));
    }
    Ok(map.domain_curve().distance_to(map.eval(z)))
}

// ---- fitting ---------------------------------------------------------------

/// Fits the geodesic-algorithm map of the unit disk onto the interior
/// of `curve` (simple, counterclockwise, n ≥ 64 vertices), normalized
/// so f(0) is `center_hint` (or the interior grid point farthest from
/// the boundary) and f′(0) > 0. The fit self-validates with a Koebe
/// sandwich on a 50-point grid and fails loudly rather than return a
/// distorted map.
pub fn zipper_fit(curve: &ClosedCurve, center_hint: Option<Point>) -> Result<DiskMap> {
    let map = zipper_fit_unchecked(curve, center_hint)?;
    // self-check: Koebe sandwich on a coarse interior grid
    let grid = super::checks::default_polar_grid(5, 10, 0.1, 0.9);
    let koebe = koebe_check(&map, &grid)?;
    if !koebe.pass {
        return Err(Error::Validation(format!(
            "fit rejected by Koebe check: lower margin {:.4}, upper margin {:.4}",
            koebe.worst_lower, koebe.worst_upper
        )));
    }
    Ok(map)
}

fn zipper_fit_unchecked(curve: &ClosedCurve, center_hint: Option<Point>) -> Result<DiskMap> {
    if curve.len() < 64 {
        return Err(Error::InvalidArgument(format!(
            "curve has {} vertices, need at least 64",
            curve.len()
        )));
    }
    // re-validate simplicity: unchecked constructors are allowed
    // upstream, but the zipper folds on self-intersections
    let curve = ClosedCurve::new(curve.vertices().to_vec())?;
    if curve.orientation() != Orientation::Ccw {
        return Err(Error::InvalidArgument("curve must be counterclockwise".into()));
    }
    let center = match center_hint {
        Some(p) => {
            if !curve.contains_point(p) {
                return Err(Error::InvalidArgument("center hint outside the curve".into()));
            }
            p
        }
        None => best_center(&curve)?,
    };

    // Open along the longest edge: φ₁ normalizes by the opening edge,
    // and the closing transform is computed in the opening chart, so it
    // must sit where the boundary is well separated. (Opening at a cusp
    // apex instead puts the *end* of the chain inside the pinch, where
    // the closing data collapses at double precision.)
    let n = curve.len();
    let start = (0..n)
        .max_by(|&i, &j| {
            let a = curve.vertex(i).dist(curve.vertex(i + 1));
            let b = curve.vertex(j).dist(curve.vertex(j + 1));
            a.partial_cmp(&b).unwrap()
        })
        .unwrap();
    let zs: Vec<Complex64> = (0..n).map(|i| c64(curve.vertex(start + i))).collect();
    let (z0, z1) = (zs[0], zs[1]);

    // which real side of the opened edge faces the interior: probe a
    // point nudged off the edge midpoint toward the interior side of a
    // counterclockwise boundary (left of the directed edge)
    let probe = (z0 + z1) * 0.5 + Complex64::i() * (z1 - z0) * 1e-6;
    let side = phi1(z0, z1, probe).re.signum();

    let mut positions = vec![0.0f64; n];
    positions[0] = f64::INFINITY;
    let mut unzips: Vec<UnzipStage> = Vec::with_capacity(n - 2);
    for k in 2..n {
        let mut u = phi1(z0, z1, zs[k]);
        for st in &unzips {
            u = vslit(mob(u, st.b), st.h) / st.h;
        }
        if !(u.im > 1e-13 * u.norm()) {
            return Err(Error::Validation(format!(
                "vertex {k} lost interior clearance while unzipping (image {u})"
            )));
        }
        let b = if u.re.abs() <= 1e-14 * u.norm() { None } else { Some(u.norm_sqr() / u.re) };
        let h = u.norm_sqr() / u.im;
        for (j, x) in positions.iter_mut().enumerate().take(k) {
            if j == k - 1 {
                // previous tip splits; keep the interior-side prong
                // (±h, renormalized to ±1)
                *x = side;
            } else {
                *x = vslit_real(mob_real(*x, b), h) / h;
            }
        }
        positions[k] = 0.0;
        unzips.push(UnzipStage { b, h });
    }

    // close the curve: opening vertex to ∞, then square the quadrant.
    // Exact arithmetic gives |q| strictly decreasing along the chain;
    // double precision may tie neighbors (crowding), which is allowed,
    // but growth or a sign change means the unzipped boundary folded.
    let p0 = positions[0].is_finite().then_some(positions[0]);
    let q: Vec<f64> = positions.iter().map(|&x| mob_real(x, p0)).collect();
    let negate = match q[1..n - 1].iter().find(|v| v.is_finite() && **v != 0.0) {
        Some(v) => *v < 0.0,
        None => return Err(Error::Validation("no finite boundary positions after closing".into())),
    };
    for j in 1..n - 1 {
        if q[j] != 0.0 && q[j].is_finite() && (q[j] < 0.0) != negate {
            return Err(Error::Validation(format!(
                "boundary positions change side at vertex {j}; fit failed"
            )));
        }
        if q[j + 1].abs() > q[j].abs() * (1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "boundary positions fold at vertex {}; fit failed",
                j + 1
            )));
        }
    }

    let mut w_star = phi1(z0, z1, c64(center));
    for st in &unzips {
        w_star = vslit(mob(w_star, st.b), st.h) / st.h;
    }
    w_star = close_fwd(w_star, p0, negate);
    if !(w_star.im > 0.0) {
        return Err(Error::Validation("center image left the half-plane".into()));
    }

    let mut map = DiskMap {
        z0,
        z1,
        unzips,
        p0,
        negate,
        w_star,
        rotation: 0.0,
        center_image: center,
        boundary_corr: Vec::new(),
        dropped_vertices: 0,
        domain_curve: curve.clone(),
    };

    // rotation aligning f′(0) with the positive axis
    let eps = 1e-5;
    let d = (c64(map.eval(Point::new(eps, 0.0))) - c64(map.eval(Point::new(-eps, 0.0))))
        / (2.0 * eps);
    map.rotation = -d.arg();

    // boundary correspondence: closed real positions → circle angles
    let mut corr: Vec<(f64, Point)> = (0..n)
        .map(|j| {
            let m = mob_real(positions[j], p0);
            let fq = if negate { -m * m } else { m * m };
            let t = if fq.is_finite() {
                let num = Complex64::new(fq, 0.0) - map.w_star;
                let den = Complex64::new(fq, 0.0) - map.w_star.conj();
                num / den
            } else {
                Complex64::new(1.0, 0.0)
            };
            let theta = (t.arg() - map.rotation).rem_euclid(TAU);
            (theta, curve.vertex(start + j))
        })
        .collect();
    corr.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut resolved: Vec<(f64, Point)> = Vec::with_capacity(n);
    for entry in corr {
        match resolved.last() {
            Some(last) if entry.0 <= last.0 => map.dropped_vertices += 1,
            _ => resolved.push(entry),
        }
    }
    map.boundary_corr = resolved;
    map.center_image = map.eval(Point::new(0.0, 0.0));
    map.validate()?;
    Ok(map)
}

/// Interior point of a 32×32 bounding-box grid farthest from the
/// boundary.
fn best_center(curve: &ClosedCurve) -> Result<Point> {
    let vs = curve.vertices();
    let (mut x0, mut y0, mut x1, mut y1) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in vs {
        x0 = x0.min(v.x);
        y0 = y0.min(v.y);
        x1 = x1.max(v.x);
        y1 = y1.max(v.y);
    }
    let mut best: Option<(f64, Point)> = None;
    let m = 32;
    for i in 1..m {
        for j in 1..m {
            let p = Point::new(
                x0 + (x1 - x0) * i as f64 / m as f64,
                y0 + (y1 - y0) * j as f64 / m as f64,
            );
            if !curve.contains_point(p) {
                continue;
            }
            let d = curve.distance_to(p);
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, p));
            }
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::InvalidArgument("no interior grid point found".into()))
}
