//! Hyperbolic geometry of the unit disk: the Poincaré distance,
//! geodesics, Poisson-kernel harmonic measure, and the boundary
//! sector regions attached to an interior point.

use super::c64;
use crate::error::{Error, Result};
use crate::geom::Point;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

fn check_in_disk(p: Point, open: bool) -> Result<()> {
    let r = p.norm();
    let ok = if open { r < 1.0 } else { r <= 1.0 + 1e-12 };
    if !ok {
        return Err(Error::InvalidArgument(format!("point ({}, {}) outside the disk", p.x, p.y)));
    }
    Ok(())
}

/// Poincaré distance ½·log((1+s)/(1−s)) with s = |z−w| / |1−z̄w|.
pub fn hyperbolic_distance(z: Point, w: Point) -> Result<f64> {
    check_in_disk(z, true)?;
    check_in_disk(w, true)?;
    let (a, b) = (c64(z), c64(w));
    let s = (a - b).norm() / (1.0 - a.conj() * b).norm();
    Ok(s.atanh())
}

/// Smallest |ζ| on the geodesic joining the endpoints of I(re^{iα}):
/// δ = (1 − sin π(1−r))/cos π(1−r), with the removable 0/0 at r = ½
/// (antipodal endpoints, geodesic through the origin).
pub fn geodesic_nearest_delta(r: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("radius {r} outside [1/2, 1)")));
    }
    if r == 0.5 {
        return Ok(0.0);
    }
    let u = PI * (1.0 - r);
    Ok((1.0 - u.sin()) / u.cos())
}

/// Points along the hyperbolic geodesic from `z1` to `z2` (endpoints
/// included): a diameter chord when the points are collinear with the
/// origin, otherwise the arc of the circle meeting the unit circle at
/// right angles.
pub fn geodesic_between(z1: Point, z2: Point, samples: usize) -> Result<Vec<Point>> {
    check_in_disk(z1, false)?;
    check_in_disk(z2, false)?;
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    let scale = z1.norm().max(z2.norm());
    if z1.dist(z2) <= 1e-14 * scale.max(1.0) {
        return Err(Error::InvalidArgument("geodesic endpoints coincide".into()));
    }
    let cross = z1.x * z2.y - z1.y * z2.x;
    let mut out = Vec::with_capacity(samples);
    if cross.abs() <= 1e-12 * scale.max(1e-12) {
        for i in 0..samples {
            out.push(z1.lerp(z2, i as f64 / (samples - 1) as f64));
        }
    } else {
        // circle orthogonal to T through both points: 2·Re(z̄c) = |z|²+1
        let det = 4.0 * cross;
        let rhs1 = z1.dist2(Point::new(0.0, 0.0)) + 1.0;
        let rhs2 = z2.dist2(Point::new(0.0, 0.0)) + 1.0;
        let cx = (rhs1 * 2.0 * z2.y - rhs2 * 2.0 * z1.y) / det;
        let cy = (rhs2 * 2.0 * z1.x - rhs1 * 2.0 * z2.x) / det;
        let c = Point::new(cx, cy);
        let rho = (c.norm() * c.norm() - 1.0).max(0.0).sqrt();
        let phi1 = (z1.y - cy).atan2(z1.x - cx);
        let phi2 = (z2.y - cy).atan2(z2.x - cx);
        // the in-disk arc is the short way around
        let mut dphi = (phi2 - phi1).rem_euclid(TAU);
        if dphi > PI {
            dphi -= TAU;
        }
        for i in 0..samples {
            let u = i as f64 / (samples - 1) as f64;
            let phi = phi1 + u * dphi;
            out.push(Point::new(cx + rho * phi.cos(), cy + rho * phi.sin()));
        }
    }
    out[0] = z1;
    out[samples - 1] = z2;
    Ok(out)
}

fn poisson(z: Point, theta: f64) -> f64 {
    let r2 = z.x * z.x + z.y * z.y;
    let den = 1.0 - 2.0 * (z.x * theta.cos() + z.y * theta.sin()) + r2;
    (1.0 - r2) / den / TAU
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Poisson-kernel mass of a union of disjoint circle arcs seen from
/// `z`, to absolute tolerance 1e-8. Arcs are (start, end) traversed
/// counterclockwise with 0 < end − start ≤ 2π.
pub fn harmonic_measure(z: Point, arcs: &[(f64, f64)]) -> Result<f64> {
    check_in_disk(z, true)?;
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in arcs {
        let len = b - a;
        if !(len > 0.0 && len <= TAU + 1e-12) {
            return Err(Error::InvalidArgument(format!("arc ({a}, {b}) has invalid length")));
        }
        // canonical footprint for the disjointness check
        let a0 = a.rem_euclid(TAU);
        let b0 = a0 + len;
        if b0 <= TAU {
            spans.push((a0, b0));
        } else {
            spans.push((a0, TAU));
            spans.push((0.0, b0 - TAU));
        }
    }
    spans.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    for w in spans.windows(2) {
        if w[1].0 < w[0].1 - 1e-12 {
            return Err(Error::InvalidArgument("arcs overlap".into()));
        }
    }
    let tol = 1e-8 / arcs.len() as f64;
    Ok(arcs.iter().map(|&(a, b)| integrate(|th| poisson(z, th), a, b, tol)).sum())
}

/// The boundary sector data attached to z = re^{iα}: the facing arc
/// I(z) of angular half-width π(1−r), the box B(z) between radius r
/// and the circle over that arc, and the flanking pair A(z) at offsets
/// 3π/2·(1−r) to 2π(1−r) on either side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorGeometry {
    pub z: Point,
    pub r: f64,
    pub alpha: f64,
    /// (start, end), counterclockwise.
    pub i_arc: (f64, f64),
    pub a_arcs: [(f64, f64); 2],
}

impl SectorGeometry {
    pub fn new(r: f64, alpha: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("radius {r} outside [1/2, 1)")));
        }
        let u = 1.0 - r;
        Ok(SectorGeometry {
            z: Point::new(r * alpha.cos(), r * alpha.sin()),
            r,
            alpha,
            i_arc: (alpha - PI * u, alpha + PI * u),
            a_arcs: [
                (alpha + 1.5 * PI * u, alpha + 2.0 * PI * u),
                (alpha - 2.0 * PI * u, alpha - 1.5 * PI * u),
            ],
        })
    }

    /// Points tracing ∂B(z): inner arc at radius r, two radial sides,
    /// outer arc on the unit circle. `m` is split evenly over the four
    /// sides.
    pub fn b_boundary_points(&self, m: usize) -> Vec<Point> {
        let u = 1.0 - self.r;
        let (th0, th1) = (self.alpha - PI * u, self.alpha + PI * u);
        let side = (m / 4).max(2);
        let mut out = Vec::with_capacity(4 * side);
        for i in 0..side {
            let th = th0 + (th1 - th0) * i as f64 / (side - 1) as f64;
            out.push(Point::new(self.r * th.cos(), self.r * th.sin()));
        }
        for i in 0..side {
            let th = th0 + (th1 - th0) * i as f64 / (side - 1) as f64;
            out.push(Point::new(th.cos(), th.sin()));
        }
        for i in 0..side {
            let rho = self.r + u * i as f64 / (side - 1) as f64;
            out.push(Point::new(rho * th0.cos(), rho * th0.sin()));
            out.push(Point::new(rho * th1.cos(), rho * th1.sin()));
        }
        out
    }

    /// k×k polar fill of B(z).
    pub fn b_fill_points(&self, k: usize) -> Vec<Point> {
        let u = 1.0 - self.r;
        let (th0, th1) = (self.alpha - PI * u, self.alpha + PI * u);
        let mut out = Vec::with_capacity(k * k);
        for i in 0..k {
            let rho = self.r + u * i as f64 / (k - 1).max(1) as f64;
            for j in 0..k {
                let th = th0 + (th1 - th0) * j as f64 / (k - 1).max(1) as f64;
                out.push(Point::new(rho * th.cos(), rho * th.sin()));
            }
        }
        out
    }
}

/// The interior point whose facing arc I(z) is exactly the shorter
/// circle arc between angles `a` and `x`: radius 1 − arclen/(2π) on
/// the bisector. An antipodal pair resolves to the arc running
/// counterclockwise from `a`.
pub fn arc_to_center(a: f64, x: f64) -> Result<SectorGeometry> {
    let d = (x - a).rem_euclid(TAU);
    if d == 0.0 {
        return Err(Error::InvalidArgument("angles coincide".into()));
    }
    let (sep, mid) = if d <= PI { (d, a + d / 2.0) } else { (TAU - d, x + (TAU - d) / 2.0) };
    SectorGeometry::new(1.0 - sep / TAU, mid.rem_euclid(TAU))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    fn polar(r: f64, th: f64) -> Point {
        Point::new(r * th.cos(), r * th.sin())
    }

    #[test]
    fn hyperbolic_distance_closed_forms() {
        let z = polar(0.3, 1.2);
        assert_eq!(hyperbolic_distance(z, z).unwrap(), 0.0);
        for r in [0.1, 0.5, 0.9] {
            let lam = hyperbolic_distance(Point::new(0.0, 0.0), Point::new(r, 0.0)).unwrap();
            assert!((lam - 0.5 * ((1.0 + r) / (1.0 - r)).ln()).abs() < 1e-14);
        }
        let lam = hyperbolic_distance(Point::new(0.75, 0.0), Point::new(0.41421, 0.0)).unwrap();
        assert!((lam - 0.5324).abs() < 1e-3, "λ = {lam}");
        assert!(hyperbolic_distance(Point::new(1.0, 0.0), Point::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn delta_matches_closed_form_and_cor34_bound() {
        assert_eq!(geodesic_nearest_delta(0.5).unwrap(), 0.0);
        let d = geodesic_nearest_delta(0.75).unwrap();
        assert!((d - 0.41421356).abs() < 1e-6, "δ(3/4) = {d}");
        let cap = 0.5 * PI.ln();
        let mut worst: f64 = 0.0;
        let mut r = 0.5;
        while r < 0.999 {
            let delta = geodesic_nearest_delta(r).unwrap();
            assert!(delta < r, "δ({r}) = {delta} not below r");
            let lam =
                hyperbolic_distance(Point::new(r, 0.0), Point::new(delta, 0.0)).unwrap();
            assert!(lam <= cap + 1e-12, "λ({r}) = {lam} exceeds ½·log π");
            worst = worst.max(lam);
            r += 0.004;
        }
        // the bound is tight somewhere on the range
        assert!(worst > 0.5, "sup λ = {worst} suspiciously small");
        assert!(geodesic_nearest_delta(0.4).is_err());
        assert!(geodesic_nearest_delta(1.0).is_err());
    }

    #[test]
    fn geodesics_are_diameters_or_orthogonal_arcs() {
        let g = geodesic_between(Point::new(0.0, 0.9), Point::new(0.0, -0.9), 33).unwrap();
        assert_eq!(g.len(), 33);
        for p in &g {
            assert!(p.x.abs() < 1e-12);
        }
        let nearest = g.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-12, "diameter through i, −i passes through 0");

        // generic arc: endpoints on T, meets T at right angles
        let (z1, z2) = (polar(1.0, 0.4), polar(1.0, 1.9));
        let g = geodesic_between(z1, z2, 65).unwrap();
        assert_eq!(g[0], z1);
        assert_eq!(g[64], z2);
        // recover the arc's center from interior samples
        let det_pts = (g[1], g[32], g[63]);
        let (p, q, s) = det_pts;
        let d = 2.0 * ((p.x - q.x) * (q.y - s.y) - (q.x - s.x) * (p.y - q.y));
        let p2 = p.x * p.x + p.y * p.y;
        let q2 = q.x * q.x + q.y * q.y;
        let s2 = s.x * s.x + s.y * s.y;
        let cx = ((p2 - q2) * (q.y - s.y) - (q2 - s2) * (p.y - q.y)) / d;
        let cy = ((q2 - s2) * (p.x - q.x) - (p2 - q2) * (q.x - s.x)) / d;
        for e in [z1, z2] {
            // orthogonality to T at a boundary endpoint ⟺ c·e = 1
            // (equivalently the arc arrives radially)
            let dot = cx * e.x + cy * e.y;
            assert!((dot - 1.0).abs() < 1e-9, "arc not orthogonal at boundary: c·e = {dot}");
        }
        // all samples inside the closed disk
        for p in &g {
            assert!(p.norm() <= 1.0 + 1e-9);
        }
        assert!(geodesic_between(z1, z1, 8).is_err());
    }

    /// Exact harmonic measure of an arc via the disk automorphism
    /// moving z to the origin.
    fn mobius_measure(z: Point, a: f64, b: f64) -> f64 {
        let zc = c64(z);
        let push = |th: f64| {
            let w = c64(polar(1.0, th));
            let img = (w - zc) / (num_complex::Complex64::new(1.0, 0.0) - zc.conj() * w);
            img.arg()
        };
        (push(b) - push(a)).rem_euclid(TAU) / TAU
    }

    #[test]
    fn harmonic_measure_oracles() {
        let origin = Point::new(0.0, 0.0);
        for len in [0.3, 1.0, 3.0] {
            let w = harmonic_measure(origin, &[(0.7, 0.7 + len)]).unwrap();
            assert!((w - len / TAU).abs() < 1e-10);
        }
        let z = polar(0.62, 2.4);
        assert!((harmonic_measure(z, &[(0.0, TAU)]).unwrap() - 1.0).abs() < 1e-8);
        // additivity over disjoint arcs
        let parts = [(0.2, 0.9), (1.5, 2.2), (4.0, 5.7)];
        let total: f64 = parts.iter().map(|&(a, b)| harmonic_measure(z, &[(a, b)]).unwrap()).sum();
        assert!((harmonic_measure(z, &parts).unwrap() - total).abs() < 1e-9);
        // Möbius covariance closed form
        for &(a, b) in &parts {
            let w = harmonic_measure(z, &[(a, b)]).unwrap();
            assert!((w - mobius_measure(z, a, b)).abs() < 1e-7, "arc ({a},{b})");
        }
        assert!(harmonic_measure(z, &[(0.5, 0.4)]).is_err());
        assert!(harmonic_measure(z, &[(0.0, 1.0), (0.5, 1.5)]).is_err());
    }

    #[test]
    fn flanking_arcs_carry_uniform_harmonic_mass() {
        let floor = 1.0 / (18.0 * PI * PI);
        for &r in &[0.5, 0.7, 0.9, 0.99] {
            let alpha = 0.3;
            let sector = SectorGeometry::new(r, alpha).unwrap();
            let w = harmonic_measure(sector.z, &sector.a_arcs).unwrap();
            assert!(w >= floor, "ω = {w} below 1/(18π²) at r = {r}");
        }
    }

    #[test]
    fn sector_regions_are_consistent() {
        let s = SectorGeometry::new(0.8, 1.0).unwrap();
        let u = 1.0 - 0.8;
        assert!((s.i_arc.0 - (1.0 - PI * u)).abs() < 1e-15);
        assert!((s.i_arc.1 - (1.0 + PI * u)).abs() < 1e-15);
        // A arcs sit strictly outside I
        for &(a0, a1) in &s.a_arcs {
            assert!(a1 <= s.i_arc.0 + 1e-15 || a0 >= s.i_arc.1 - 1e-15);
            assert!(a1 - a0 > 0.0);
        }
        // boundary sweep stays inside the closed annulus sector
        for p in s.b_boundary_points(64) {
            let rho = p.norm();
            assert!(rho >= 0.8 - 1e-12 && rho <= 1.0 + 1e-12);
        }
        assert_eq!(s.b_fill_points(16).len(), 256);
        assert!(SectorGeometry::new(0.3, 0.0).is_err());
    }

    #[test]
    fn arc_to_center_round_trip() {
        let s = arc_to_center(1.0, 1.0 + PI).unwrap();
        assert!((s.r - 0.5).abs() < 1e-15);
        let s = arc_to_center(0.3, 0.32).unwrap();
        assert!((s.r - (1.0 - 0.02 / TAU)).abs() < 1e-12);
        // round trip: I(z) endpoints reproduce the input angles
        for (a, x) in [(0.3, 0.32), (5.9, 0.4), (2.0, 1.1)] {
            let s = arc_to_center(a, x).unwrap();
            let (e0, e1) = (s.i_arc.0.rem_euclid(TAU), s.i_arc.1.rem_euclid(TAU));
            let mut got = [e0, e1];
            let mut want = [a.rem_euclid(TAU), x.rem_euclid(TAU)];
            got.sort_by(|p, q| p.partial_cmp(q).unwrap());
            want.sort_by(|p, q| p.partial_cmp(q).unwrap());
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
        }
        assert!(arc_to_center(1.0, 1.0).is_err());
    }
}
