//! Planar primitives shared by every module: points, segment predicates,
//! convex hulls, and exact vertex-set diameters.

use serde::{Deserialize, Serialize};

/// A point in the plane. Coordinates must be finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

impl From<Point> for (f64, f64) {
    fn from(p: Point) -> Self {
        (p.x, p.y)
    }
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dist(&self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Squared distance; cheaper and order-equivalent to `dist`.
    #[inline]
    pub fn dist2(&self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn sub(&self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    #[inline]
    pub fn add(&self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn lerp(&self, other: Point, u: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * u, self.y + (other.y - self.y) * u)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Signed area of the parallelogram spanned by `b - a` and `c - a`.
/// Positive when `a -> b -> c` turns counterclockwise.
#[inline]
pub fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let u = (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, u))
}

/// Parameter in `[0, 1]` of the point of `[a, b]` closest to `p`.
pub fn segment_nearest_u(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return 0.0;
    }
    (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0)
}

/// Whether closed segments `[p1, p2]` and `[q1, q2]` share any point.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Convex hull by monotone chain, returned counterclockwise without
/// repetition. Collinear interior points are dropped. One- and two-point
/// inputs come back as-is.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Visits every antipodal vertex pair of a counterclockwise convex
/// polygon (rotating calipers). The diameter pair is always antipodal.
pub fn rotating_calipers<F: FnMut(usize, usize)>(hull: &[Point], mut yield_pair: F) {
    let n = hull.len();
    if n < 2 {
        return;
    }
    if n == 2 {
        yield_pair(0, 1);
        return;
    }
    let area2 = |i: usize, j: usize, k: usize| cross(hull[i], hull[j], hull[k]).abs();
    let mut j = 1;
    for i in 0..n {
        let ni = (i + 1) % n;
        while area2(i, ni, (j + 1) % n) > area2(i, ni, j) {
            yield_pair(i, j);
            j = (j + 1) % n;
        }
        yield_pair(i, j);
        // parallel edges: the incoming and outgoing support pairs both count
        if area2(i, ni, (j + 1) % n) == area2(i, ni, j) {
            yield_pair(i, (j + 1) % n);
        }
    }
}

/// Largest pairwise distance over a point set, exact over the inputs.
pub fn diameter(points: &[Point]) -> f64 {
    diameter_with_witness(points).0
}

/// Diameter plus the indices (into `points`) of one realizing pair.
/// O(n log n). Callers needing a specific tie order must re-rank.
pub fn diameter_with_witness(points: &[Point]) -> (f64, (usize, usize)) {
    match points.len() {
        0 => return (0.0, (0, 0)),
        1 => return (0.0, (0, 0)),
        2 => return (points[0].dist(points[1]), (0, 1)),
        _ => {}
    }
    let hull = convex_hull(points);
    let mut best = -1.0f64;
    let mut pair = (hull.first().copied().unwrap_or(points[0]), points[0]);
    rotating_calipers(&hull, |i, j| {
        let d2 = hull[i].dist2(hull[j]);
        if d2 > best {
            best = d2;
            pair = (hull[i], hull[j]);
        }
    });
    // map hull points back to the smallest original indices
    let find = |q: Point| points.iter().position(|&p| p.x == q.x && p.y == q.y).unwrap();
    let (mut i, mut j) = (find(pair.0), find(pair.1));
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    (best.max(0.0).sqrt(), (i, j))
}

/// Convex hull of a growing prefix of a simple polyline (Melkman's
/// algorithm) that tracks the prefix diameter as points arrive.
///
/// Points must be pushed in polyline order; each push is O(1) amortized
/// for the hull plus a scan of current hull vertices when the diameter
/// can change.
pub struct IncrementalHull {
    deque: std::collections::VecDeque<Point>,
    diam2: f64,
}

impl IncrementalHull {
    pub fn new(first: Point) -> Self {
        let mut deque = std::collections::VecDeque::with_capacity(16);
        deque.push_back(first);
        IncrementalHull { deque, diam2: 0.0 }
    }

    /// Current prefix diameter.
    #[inline]
    pub fn diameter(&self) -> f64 {
        self.diam2.sqrt()
    }

    #[inline]
    pub fn diameter2(&self) -> f64 {
        self.diam2
    }

    pub fn hull_len(&self) -> usize {
        self.deque.len()
    }

    /// Adds the next polyline vertex.
    pub fn push(&mut self, p: Point) {
        let dq = &mut self.deque;
        match dq.len() {
            1 => {
                if !(p.x == dq[0].x && p.y == dq[0].y) {
                    let d2 = p.dist2(dq[0]);
                    if d2 > self.diam2 {
                        self.diam2 = d2;
                    }
                    dq.push_back(p);
                }
                return;
            }
            2 => {
                let (a, b) = (dq[0], dq[1]);
                let c = cross(a, b, p);
                if c == 0.0 {
                    // still collinear: keep extreme endpoints only
                    let d_ab = a.dist2(b);
                    let d_ap = a.dist2(p);
                    let d_bp = b.dist2(p);
                    let m = d_ab.max(d_ap).max(d_bp);
                    if m > self.diam2 {
                        self.diam2 = m;
                    }
                    if d_ap >= d_ab && d_ap >= d_bp {
                        dq.clear();
                        dq.push_back(a);
                        dq.push_back(p);
                    } else if d_bp >= d_ab {
                        dq.clear();
                        dq.push_back(b);
                        dq.push_back(p);
                    }
                    return;
                }
                // orient the deque counterclockwise: back..front traversal
                // is b, a; store as [b, a] with p closing the triangle.
                dq.clear();
                if c > 0.0 {
                    dq.push_back(a);
                    dq.push_back(b);
                } else {
                    dq.push_back(b);
                    dq.push_back(a);
                }
                dq.push_back(p);
                dq.push_front(p);
                self.update_diam(p);
                return;
            }
            _ => {}
        }
        // Melkman: deque holds the hull CCW with dq[0] == dq[len-1].
        let tail = dq[dq.len() - 1];
        if (p.x == dq[0].x && p.y == dq[0].y) || (p.x == tail.x && p.y == tail.y) {
            return;
        }
        let inside = cross(dq[0], dq[1], p) > 0.0
            && cross(dq[dq.len() - 2], dq[dq.len() - 1], p) > 0.0;
        if inside {
            return;
        }
        while dq.len() >= 2 && cross(dq[dq.len() - 2], dq[dq.len() - 1], p) <= 0.0 {
            dq.pop_back();
        }
        dq.push_back(p);
        while dq.len() >= 2 && cross(dq[1], dq[0], p) >= 0.0 {
            dq.pop_front();
        }
        dq.push_front(p);
        self.update_diam(p);
    }

    #[inline]
    fn update_diam(&mut self, p: Point) {
        let mut best = self.diam2;
        // dq[0] == dq[len-1] == p after insertion; interior entries are the
        // other hull vertices.
        for &q in self.deque.iter().skip(1).take(self.deque.len().saturating_sub(2)) {
            let d2 = p.dist2(q);
            if d2 > best {
                best = d2;
            }
        }
        self.diam2 = best;
    }
}
