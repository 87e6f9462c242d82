//! Closed polylines and their cyclic subarcs.
//!
//! A [`ClosedCurve`] is a simple closed polyline: distinct consecutive
//! vertices, nonzero signed area, no self-intersections. Vertex indices
//! are cyclic throughout; an [`ArcSpan`] names the subarc between two
//! vertex indices together with a traversal direction.

use crate::error::{Error, Result};
use crate::geom;
pub use crate::geom::Point;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

/// Cyclic range of vertex indices, endpoints included.
///
/// Traversed from `start` to `end` stepping `+1` (`Positive`) or `-1`
/// (`Negative`) modulo the vertex count. `start == end` denotes the
/// single-vertex span; spans produced by this crate always contain at
/// least one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcSpan {
    pub start: usize,
    pub end: usize,
    pub direction: Direction,
}

impl ArcSpan {
    pub fn positive(start: usize, end: usize) -> Self {
        ArcSpan { start, end, direction: Direction::Positive }
    }

    /// Number of vertices in the span on a curve with `n` vertices.
    pub fn vertex_count(&self, n: usize) -> usize {
        let gap = match self.direction {
            Direction::Positive => (self.end + n - self.start) % n,
            Direction::Negative => (self.start + n - self.end) % n,
        };
        gap + 1
    }

    pub fn edge_count(&self, n: usize) -> usize {
        self.vertex_count(n) - 1
    }

    /// Vertex indices in traversal order.
    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        let count = self.vertex_count(n);
        let start = self.start;
        let dir = self.direction;
        (0..count).map(move |k| match dir {
            Direction::Positive => (start + k) % n,
            Direction::Negative => (start + n - (k % n)) % n,
        })
    }

    pub fn contains(&self, idx: usize, n: usize) -> bool {
        let gap = match self.direction {
            Direction::Positive => (idx + n - self.start) % n,
            Direction::Negative => (self.start + n - idx) % n,
        };
        gap < self.vertex_count(n)
    }
}

/// Simple closed polyline with a recorded orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    vertices: Vec<Point>,
    orientation: Orientation,
}

/// JSON shape: `{"closed": true, "orientation": "ccw", "vertices": [[x, y], ...]}`.
#[derive(Serialize, Deserialize)]
struct CurveJson {
    closed: bool,
    orientation: Orientation,
    vertices: Vec<Point>,
}

impl ClosedCurve {
    /// Validates and builds a curve. Rejects fewer than 3 vertices,
    /// non-finite coordinates, repeated consecutive vertices (including
    /// the closing wrap), zero signed area, and self-intersections.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        Self::validate_basic(&vertices)?;
        let area = signed_area(&vertices);
        if area == 0.0 {
            return Err(Error::InvalidCurve("zero signed area".into()));
        }
        check_simple(&vertices)?;
        let orientation = if area > 0.0 { Orientation::Ccw } else { Orientation::Cw };
        Ok(ClosedCurve { vertices, orientation })
    }

    /// Builds without the simplicity and area checks. For derived vertex
    /// sequences (e.g. the image of a boundary map, whose chords may
    /// cross even when the source curve is simple). Basic shape checks
    /// still apply.
    pub fn from_vertices_unchecked(vertices: Vec<Point>) -> Result<Self> {
        Self::validate_basic(&vertices)?;
        let orientation =
            if signed_area(&vertices) >= 0.0 { Orientation::Ccw } else { Orientation::Cw };
        Ok(ClosedCurve { vertices, orientation })
    }

    fn validate_basic(vertices: &[Point]) -> Result<()> {
        if vertices.len() < 3 {
            return Err(Error::InvalidCurve(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidCurve(format!("non-finite vertex at index {i}")));
            }
        }
        let n = vertices.len();
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i] == vertices[j] {
                return Err(Error::InvalidCurve(format!("repeated consecutive vertex at {i}")));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i % self.vertices.len()]
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Counterclockwise copy (reverses vertex order if needed; the first
    /// vertex stays first).
    pub fn ensure_ccw(self) -> ClosedCurve {
        match self.orientation {
            Orientation::Ccw => self,
            Orientation::Cw => {
                let mut v = self.vertices;
                v[1..].reverse();
                ClosedCurve { vertices: v, orientation: Orientation::Ccw }
            }
        }
    }

    /// Largest pairwise vertex distance.
    pub fn curve_diameter(&self) -> f64 {
        geom::diameter(&self.vertices)
    }

    /// Largest pairwise distance over the span's vertices (endpoints
    /// included), exact over the vertex set.
    pub fn arc_diameter(&self, span: ArcSpan) -> f64 {
        let pts: Vec<Point> =
            span.indices(self.len()).map(|i| self.vertices[i]).collect();
        geom::diameter(&pts)
    }

    /// Of the two cyclic ranges between distinct vertex indices `i` and
    /// `j`, returns the one with the smaller vertex-set diameter.
    ///
    /// Diameters within relative 1e-12 count as tied; ties go to the
    /// range with fewer vertices, then to the range traversed positively
    /// from `min(i, j)`. The result is always a positive-direction span
    /// and is symmetric in `(i, j)`.
    pub fn smaller_subarc(&self, i: usize, j: usize) -> Result<ArcSpan> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!(
                "vertex index out of range: ({i}, {j}) on {n} vertices"
            )));
        }
        if i == j {
            return Err(Error::InvalidArgument("subarc endpoints must be distinct".into()));
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let side_a = ArcSpan::positive(lo, hi);
        let side_b = ArcSpan::positive(hi, lo);
        let da = self.arc_diameter(side_a);
        let db = self.arc_diameter(side_b);
        let tie = (da - db).abs() <= 1e-12 * da.max(db);
        if tie {
            let ca = side_a.vertex_count(n);
            let cb = side_b.vertex_count(n);
            if ca != cb {
                return Ok(if ca < cb { side_a } else { side_b });
            }
            return Ok(side_a);
        }
        Ok(if da < db { side_a } else { side_b })
    }

    /// Shoelace area; positive for counterclockwise curves.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.len();
        (0..n).map(|i| self.vertices[i].dist(self.vertex(i + 1))).sum()
    }

    /// Cumulative arclength at each vertex; entry `n` is the perimeter.
    pub fn arclength_table(&self) -> Vec<f64> {
        let n = self.len();
        let mut acc = Vec::with_capacity(n + 1);
        acc.push(0.0);
        let mut s = 0.0;
        for i in 0..n {
            s += self.vertices[i].dist(self.vertex(i + 1));
            acc.push(s);
        }
        acc
    }

    /// Point at arclength `s` from vertex 0 (wrapped modulo perimeter),
    /// given the table from [`Self::arclength_table`].
    pub fn point_at_arclength(&self, s: f64, table: &[f64]) -> Point {
        let total = *table.last().unwrap();
        let mut s = s % total;
        if s < 0.0 {
            s += total;
        }
        let idx = match table.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        let idx = idx.min(self.len() - 1);
        let seg = table[idx + 1] - table[idx];
        let u = if seg > 0.0 { (s - table[idx]) / seg } else { 0.0 };
        self.vertices[idx].lerp(self.vertex(idx + 1), u)
    }

    /// Rescales about the origin so the diameter is exactly 1. Returns
    /// the scale factor that was applied.
    pub fn normalize_unit_diameter(self) -> Result<(ClosedCurve, f64)> {
        let d = self.curve_diameter();
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidCurve("degenerate curve: zero diameter".into()));
        }
        let s = 1.0 / d;
        let vertices = self.vertices.iter().map(|p| p.scale(s)).collect();
        Ok((ClosedCurve { vertices, orientation: self.orientation }, s))
    }

    /// Resamples to `n` vertices equally spaced by arclength; the first
    /// output vertex is the original first vertex.
    pub fn resample_arclength(&self, n: usize) -> Result<ClosedCurve> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("resample count {n} < 3")));
        }
        let table = self.arclength_table();
        let total = *table.last().unwrap();
        let vertices: Vec<Point> = (0..n)
            .map(|k| self.point_at_arclength(k as f64 * total / n as f64, &table))
            .collect();
        ClosedCurve::from_vertices_unchecked(vertices)
    }

    /// Even-odd interior test. Points on the boundary are
    /// classification noise either way; callers needing clearance
    /// should also check `distance_to`.
    pub fn contains_point(&self, p: Point) -> bool {
        let n = self.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertex(i + 1);
            if (a.y > p.y) != (b.y > p.y) {
                let t = (p.y - a.y) / (b.y - a.y);
                if p.x < a.x + t * (b.x - a.x) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the polyline.
    pub fn distance_to(&self, p: Point) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            best = best.min(geom::segment_distance(p, self.vertices[i], self.vertex(i + 1)));
        }
        best
    }

    /// Arclength position (from vertex 0) of the polyline point nearest
    /// to `p`, together with that distance.
    pub fn project_arclength(&self, p: Point) -> (f64, f64) {
        let n = self.len();
        let table = self.arclength_table();
        let mut best = f64::INFINITY;
        let mut s_best = 0.0;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertex(i + 1));
            let u = geom::segment_nearest_u(p, a, b);
            let d = p.dist(a.lerp(b, u));
            if d < best {
                best = d;
                s_best = table[i] + u * (table[i + 1] - table[i]);
            }
        }
        (s_best, best)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CurveJson {
            closed: true,
            orientation: self.orientation,
            vertices: self.vertices.clone(),
        })
        .expect("curve serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CurveJson = serde_json::from_str(text)?;
        if !raw.closed {
            return Err(Error::InvalidCurve("curve JSON must have \"closed\": true".into()));
        }
        let curve = ClosedCurve::new(raw.vertices)?;
        if curve.orientation != raw.orientation {
            return Err(Error::InvalidCurve(
                "stored orientation does not match vertex order".into(),
            ));
        }
        Ok(curve)
    }
}

fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

/// Rejects self-intersections: any contact between non-adjacent edges,
/// and fold-back spikes between adjacent ones. Edges are swept in x-order
/// with bounding-box pruning.
fn check_simple(vertices: &[Point]) -> Result<()> {
    let n = vertices.len();
    // adjacent-edge degeneracy: collinear fold-back
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let e1 = b.sub(a);
        let e2 = c.sub(b);
        if geom::cross(a, b, c) == 0.0 && e1.x * e2.x + e1.y * e2.y < 0.0 {
            return Err(Error::InvalidCurve(format!("fold-back spike at vertex {}", (i + 1) % n)));
        }
    }
    struct Edge {
        i: usize,
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    }
    let mut edges: Vec<Edge> = (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            Edge {
                i,
                x_min: a.x.min(b.x),
                x_max: a.x.max(b.x),
                y_min: a.y.min(b.y),
                y_max: a.y.max(b.y),
            }
        })
        .collect();
    edges.sort_by(|a, b| a.x_min.partial_cmp(&b.x_min).unwrap());
    let mut active: Vec<usize> = Vec::new(); // indices into `edges`
    for k in 0..edges.len() {
        let e = &edges[k];
        active.retain(|&a| edges[a].x_max >= e.x_min);
        for &a in active.iter() {
            let f = &edges[a];
            if f.y_min > e.y_max || f.y_max < e.y_min {
                continue;
            }
            let (i, j) = (e.i, f.i);
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (p1, p2) = (vertices[i], vertices[(i + 1) % n]);
            let (q1, q2) = (vertices[j], vertices[(j + 1) % n]);
            if geom::segments_intersect(p1, p2, q1, q2) {
                return Err(Error::InvalidCurve(format!(
                    "self-intersection between edges {i} and {j}"
                )));
            }
        }
        active.push(k);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle(n: usize) -> ClosedCurve {
        let vertices = (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point::new(th.cos(), th.sin())
            })
            .collect();
        ClosedCurve::new(vertices).unwrap()
    }

    fn square() -> ClosedCurve {
        ClosedCurve::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn brute_span_diameter(curve: &ClosedCurve, span: ArcSpan) -> f64 {
        let pts: Vec<Point> = span.indices(curve.len()).map(|i| curve.vertex(i)).collect();
        let mut best = 0.0f64;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.max(pts[i].dist(pts[j]));
            }
        }
        best
    }

    #[test]
    fn unit_circle_diameter() {
        let c = circle(512);
        assert!((c.curve_diameter() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn unit_square_diameter() {
        assert_eq!(square().curve_diameter(), 2.0f64.sqrt());
    }

    #[test]
    fn validation_rejects_bad_input() {
        assert!(ClosedCurve::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).is_err());
        assert!(ClosedCurve::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
        ])
        .is_err());
        // collinear: zero area
        assert!(ClosedCurve::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ])
        .is_err());
        // bow tie: self-intersection
        assert!(ClosedCurve::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .is_err());
        // non-adjacent edges touching at a point
        assert!(ClosedCurve::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 2.0),
        ])
        .is_err());
    }

    #[test]
    fn orientation_detection_and_ensure_ccw() {
        let sq = square();
        assert_eq!(sq.orientation(), Orientation::Ccw);
        let cw_vertices: Vec<Point> = {
            let mut v = sq.vertices().to_vec();
            v[1..].reverse();
            v
        };
        let cw = ClosedCurve::new(cw_vertices).unwrap();
        assert_eq!(cw.orientation(), Orientation::Cw);
        let back = cw.ensure_ccw();
        assert_eq!(back.orientation(), Orientation::Ccw);
        assert_eq!(back.vertices(), square().vertices());
    }

    #[test]
    fn smaller_subarc_matches_brute_force_on_all_pairs() {
        let curves = [circle(37), square(), circle(16)];
        for curve in curves.iter() {
            let n = curve.len();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let chosen = curve.smaller_subarc(i, j).unwrap();
                    let other = ArcSpan::positive(chosen.end, chosen.start);
                    let dc = brute_span_diameter(curve, chosen);
                    let doth = brute_span_diameter(curve, other);
                    assert!(
                        dc <= doth * (1.0 + 1e-12),
                        "pair ({i},{j}): chosen {dc} > other {doth}"
                    );
                    assert_eq!(curve.arc_diameter(chosen), dc);
                }
            }
        }
    }

    #[test]
    fn smaller_subarc_is_symmetric_and_rejects_equal_indices() {
        let c = circle(37);
        for (i, j) in [(0usize, 5usize), (30, 2), (10, 28)] {
            assert_eq!(c.smaller_subarc(i, j).unwrap(), c.smaller_subarc(j, i).unwrap());
        }
        assert!(c.smaller_subarc(4, 4).is_err());
    }

    #[test]
    fn antipodal_tie_break_is_deterministic() {
        let c = circle(360);
        let span = c.smaller_subarc(0, 180).unwrap();
        // equal diameters and vertex counts: positive range from min(i, j)
        assert_eq!(span, ArcSpan::positive(0, 180));
        assert_eq!(c.smaller_subarc(180, 0).unwrap(), span);
    }

    #[test]
    fn span_diameter_never_exceeds_curve_diameter() {
        let c = circle(64);
        let n = c.len();
        let full = c.curve_diameter();
        let mut attained: f64 = 0.0;
        for i in 0..n {
            for gap in 1..n {
                let span = ArcSpan::positive(i, (i + gap) % n);
                let d = c.arc_diameter(span);
                assert!(d <= full + 1e-15);
                attained = attained.max(d);
            }
        }
        assert_eq!(attained, full);
    }

    #[test]
    fn resample_is_arclength_uniform() {
        let c = square();
        let r = c.resample_arclength(128).unwrap();
        assert_eq!(r.len(), 128);
        assert_eq!(r.vertex(0), c.vertex(0));
        let gaps: Vec<f64> = (0..r.len()).map(|i| r.vertex(i).dist(r.vertex(i + 1))).collect();
        let step = c.perimeter() / 128.0;
        for g in gaps {
            // straight-line gap equals the arclength step except across corners
            assert!(g <= step + 1e-12);
        }
        assert!((r.perimeter() - c.perimeter()).abs() < 1e-2 * c.perimeter());
    }

    #[test]
    fn json_round_trip() {
        let c = circle(32);
        let text = c.to_json();
        let back = ClosedCurve::from_json(&text).unwrap();
        assert_eq!(c, back);
        assert!(text.contains("\"closed\": true"));
        assert!(text.contains("\"orientation\": \"ccw\""));
    }

    #[test]
    fn point_location_helpers() {
        let c = square();
        let table = c.arclength_table();
        assert_eq!(c.point_at_arclength(0.0, &table), Point::new(0.0, 0.0));
        assert_eq!(c.point_at_arclength(0.5, &table), Point::new(0.5, 0.0));
        assert_eq!(c.point_at_arclength(4.0, &table), Point::new(0.0, 0.0));
        assert_eq!(c.distance_to(Point::new(0.5, -1.0)), 1.0);
        let (s, d) = c.project_arclength(Point::new(0.25, -0.001));
        assert!((s - 0.25).abs() < 1e-12 && (d - 0.001).abs() < 1e-12);
    }

    // star-shaped radial curves are always simple: a good random family
    fn star_curve(radii: Vec<f64>) -> ClosedCurve {
        let n = radii.len();
        let vertices = radii
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point::new(r * th.cos(), r * th.sin())
            })
            .collect();
        ClosedCurve::new(vertices).unwrap()
    }

    proptest! {
        #[test]
        fn diameter_is_scale_equivariant(
            radii in proptest::collection::vec(0.5f64..1.5, 8..40),
            scale in 0.01f64..100.0,
        ) {
            let c = star_curve(radii);
            let scaled = ClosedCurve::new(
                c.vertices().iter().map(|p| p.scale(scale)).collect()
            ).unwrap();
            let lhs = scaled.curve_diameter();
            let rhs = scale * c.curve_diameter();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn smaller_subarc_diameter_no_larger_than_complement(
            radii in proptest::collection::vec(0.5f64..1.5, 8..40),
            raw_i in 0usize..1000,
            raw_j in 0usize..1000,
        ) {
            let c = star_curve(radii);
            let n = c.len();
            let (i, j) = (raw_i % n, raw_j % n);
            prop_assume!(i != j);
            let span = c.smaller_subarc(i, j).unwrap();
            let comp = ArcSpan::positive(span.end, span.start);
            prop_assert!(c.arc_diameter(span) <= c.arc_diameter(comp) * (1.0 + 1e-12));
            prop_assert_eq!(c.smaller_subarc(j, i).unwrap(), span);
        }
    }
}
