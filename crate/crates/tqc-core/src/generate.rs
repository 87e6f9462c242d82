//! Reference curve families.
//!
//! Every generator returns a validated counterclockwise [`ClosedCurve`].
//! The cusp family has a known turning exponent (`t = 1/s` for contact
//! order `s`), the snowflake a known dimension regime, and the perturbed
//! circle provides seeded quasi-generic test data.

use crate::curve::{ClosedCurve, Point};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Declarative description of a generated curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveSpec {
    /// Unit circle sampled at `n` equal angles.
    Circle { n: usize },
    /// Axis-aligned ellipse with semi-axes `a`, `b`.
    Ellipse { a: f64, b: f64, n: usize },
    /// Snowflake boundary after `level` exact affine subdivision steps
    /// of an equilateral triangle; `3 * 4^level` vertices.
    Koch { level: u32 },
    /// Two tangent power branches `(x, x^s)` and `(x, 2 x^s)` for
    /// `x` in `[0, 1]`, closed by the segment from `(1, 1)` to `(1, 2)`.
    /// Turning exponent `1/s`.
    Cusp { s: f64, n: usize },
    /// Circle with seeded smooth radial noise of the given amplitude.
    Perturbed { n: usize, seed: u64, amplitude: f64 },
}

const MIN_SAMPLES: usize = 16;
const MAX_KOCH_LEVEL: u32 = 7;

pub fn generate(spec: &CurveSpec) -> Result<ClosedCurve> {
    match *spec {
        CurveSpec::Circle { n } => {
            check_n(n)?;
            ClosedCurve::new(circle_points(n, 1.0, 1.0))
        }
        CurveSpec::Ellipse { a, b, n } => {
            check_n(n)?;
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::InvalidArgument(format!("ellipse axes must be positive: ({a}, {b})")));
            }
            ClosedCurve::new(circle_points(n, a, b))
        }
        CurveSpec::Koch { level } => {
            if level > MAX_KOCH_LEVEL {
                return Err(Error::InvalidArgument(format!(
                    "koch level {level} > {MAX_KOCH_LEVEL}"
                )));
            }
            ClosedCurve::new(koch_points(level))
        }
        CurveSpec::Cusp { s, n } => {
            check_n(n)?;
            if !(1.0..=6.0).contains(&s) {
                return Err(Error::InvalidArgument(format!("cusp order {s} outside [1, 6]")));
            }
            ClosedCurve::new(cusp_points(s, n))
        }
        CurveSpec::Perturbed { n, seed, amplitude } => {
            check_n(n)?;
            if !(0.0..1.0).contains(&amplitude) {
                return Err(Error::InvalidArgument(format!(
                    "perturbation amplitude {amplitude} outside [0, 1)"
                )));
            }
            ClosedCurve::new(perturbed_points(n, seed, amplitude))
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("sample count {n} < {MIN_SAMPLES}")));
    }
    Ok(())
}

fn circle_points(n: usize, a: f64, b: f64) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            Point::new(a * th.cos(), b * th.sin())
        })
        .collect()
}

fn koch_points(level: u32) -> Vec<Point> {
    let mut pts = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(0.5, 3.0f64.sqrt() / 2.0),
    ];
    // outward bump: rotate the middle third by -60 degrees off each edge
    let (c, s) = ((-std::f64::consts::FRAC_PI_3).cos(), (-std::f64::consts::FRAC_PI_3).sin());
    for _ in 0..level {
        let n = pts.len();
        let mut next = Vec::with_capacity(4 * n);
        for i in 0..n {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            let d = q.sub(p).scale(1.0 / 3.0);
            let u = p.add(d);
            let peak = Point::new(u.x + d.x * c - d.y * s, u.y + d.x * s + d.y * c);
            next.push(p);
            next.push(u);
            next.push(peak);
            next.push(p.add(d.scale(2.0)));
        }
        pts = next;
    }
    pts
}

fn cusp_points(s: f64, n: usize) -> Vec<Point> {
    let nc = (n / 16).max(1); // interior vertices of the closing segment
    let m = (n - nc) / 2; // edges per branch
    let mut pts = Vec::with_capacity(2 * m + nc);
    // lower branch, origin to (1, 1)
    for i in 0..=m {
        let x = i as f64 / m as f64;
        pts.push(Point::new(x, x.powf(s)));
    }
    // closing segment (1, 1) -> (1, 2), interior points only
    for k in 1..=nc {
        pts.push(Point::new(1.0, 1.0 + k as f64 / (nc + 1) as f64));
    }
    // upper branch, (1, 2) back to the origin (origin excluded: wraps)
    for i in (1..=m).rev() {
        let x = i as f64 / m as f64;
        pts.push(Point::new(x, 2.0 * x.powf(s)));
    }
    pts
}

fn perturbed_points(n: usize, seed: u64, amplitude: f64) -> Vec<Point> {
    const MODES: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> =
        (0..MODES).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    (0..n)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let mut r = 1.0;
            for (k, (a, b)) in coeffs.iter().enumerate() {
                let f = (k + 2) as f64;
                r += amplitude * (a * (f * th).cos() + b * (f * th).sin()) / f;
            }
            Point::new(r * th.cos(), r * th.sin())
        })
        .collect()
}

/// Resamples `curve` with vertex spacing decreasing geometrically (factor
/// `ratio` per step) toward `focus`, which must lie on the polyline
/// within 1e-9. The spacing is floored at `1e-12` of the perimeter so
/// vertices stay distinct; the vertex count is preserved exactly and the
/// focus becomes vertex 0.
pub fn adaptive_cusp_sampling(
    curve: &ClosedCurve,
    focus: Point,
    ratio: f64,
) -> Result<ClosedCurve> {
    if !(0.0 < ratio && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("grading ratio {ratio} outside (0, 1)")));
    }
    let (s_star, dist) = curve.project_arclength(focus);
    let table = curve.arclength_table();
    let total = *table.last().unwrap();
    if dist > 1e-9 * total.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "focus ({}, {}) is not on the curve (distance {dist:.3e})",
            focus.x, focus.y
        )));
    }
    let n = curve.len();
    let half = total / 2.0;
    let floor = 1e-12 * total;
    let m_pos = n / 2;
    let m_neg = n - m_pos;
    // edge lengths from the far point toward the focus: e_j = max(A r^j, floor)
    let side_offsets = |m: usize| -> Vec<f64> {
        let sum = |a: f64| -> f64 { (0..m).map(|j| (a * ratio.powi(j as i32)).max(floor)).sum() };
        let (mut lo, mut hi) = (floor, 2.0 * half / (1.0 - ratio) + floor);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sum(mid) < half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        let mut t = Vec::with_capacity(m);
        let mut acc = 0.0;
        for j in 0..m {
            acc += (a * ratio.powi(j as i32)).max(floor);
            t.push(acc);
        }
        // land the cumulative sums exactly on [0, half]
        let last = acc;
        for slot in t.iter_mut() {
            *slot *= half / last;
        }
        t
    };
    let pos = side_offsets(m_pos); // cumulative from far point, ends at half
    let neg = side_offsets(m_neg);
    let mut samples = Vec::with_capacity(n);
    samples.push(s_star);
    // positive side: focus .. far point, spacing grows away from focus
    for k in (0..m_pos - 1).rev() {
        samples.push(s_star + (half - pos[k]));
    }
    samples.push(s_star + half); // far point
    // negative side approached from beyond the far point
    for k in 0..m_neg - 1 {
        samples.push(s_star + half + neg[k]);
    }
    let vertices: Vec<Point> =
        samples.iter().map(|&s| curve.point_at_arclength(s, &table)).collect();
    let out = ClosedCurve::new(vertices)?;
    Ok(match curve.orientation() {
        crate::curve::Orientation::Ccw => out.ensure_ccw(),
        crate::curve::Orientation::Cw => out,
    })
}
