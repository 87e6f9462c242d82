//! Sampled maps from the unit circle onto a closed curve: the
//! tree-driven construction, plain arclength parametrization, and
//! piecewise-linear reparametrizations of either.
//!
//! A map is a finite list of (θ, point) samples in circle order;
//! between samples it interpolates along the curve by arclength, so
//! evaluation always lands on the polyline.

use crate::curve::{ClosedCurve, Point};
use crate::error::{Error, Result};
use crate::subdivide::SubarcTree;
use serde::{Deserialize, Serialize};

/// How angular separation on the circle is measured: straight-line
/// distance between the two boundary points, or the shorter arc as a
/// fraction of the full circle. The two are comparable within constant
/// factors; every report records which one produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleMetric {
    Chordal,
    Arclength,
}

/// Distance between angles `a` and `b` under `metric`.
pub fn circle_dist(metric: CircleMetric, a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut d = (a - b).abs() % tau;
    if d > tau / 2.0 {
        d = tau - d;
    }
    match metric {
        CircleMetric::Chordal => 2.0 * (d / 2.0).sin(),
        CircleMetric::Arclength => d / tau,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Tree,
    Arclength,
    Reparametrized,
    Conformal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSample {
    /// Angle in [0, 2π), strictly increasing across the sample list.
    pub theta: f64,
    pub point: Point,
    /// Position of `point` along the curve, in [0, perimeter).
    pub arclength: f64,
}

/// Orientation-preserving sampled circle-to-curve map.
#[derive(Debug, Clone)]
pub struct BoundaryMap {
    samples: Vec<MapSample>,
    kind: MapKind,
    metric: CircleMetric,
    curve: ClosedCurve,
    arc_table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    kind: MapKind,
    metric: CircleMetric,
    samples: Vec<SampleJson>,
}

#[derive(Serialize, Deserialize)]
struct SampleJson {
    theta: f64,
    x: f64,
    y: f64,
}

const TAU: f64 = std::f64::consts::TAU;

/// Equal circle arcs matched to tree leaves in cyclic order; within a
/// leaf, angle maps to the leaf span proportionally by arclength.
/// Samples cover every leaf endpoint plus at least 4 interior points.
pub fn build_boundary_map(tree: &SubarcTree) -> Result<BoundaryMap> {
    let curve = tree.curve().clone();
    let leaves = tree.leaves();
    let n = curve.len();
    let table = curve.arclength_table();
    let perimeter = table[n];
    let leaf_count = leaves.len();
    let mut samples = Vec::new();
    for (li, leaf) in leaves.iter().enumerate() {
        let theta0 = TAU * li as f64 / leaf_count as f64;
        let theta1 = TAU * (li + 1) as f64 / leaf_count as f64;
        // cumulative arclength of the leaf's span; the span never wraps
        // past the table end more than once
        let s0 = table[leaf.start];
        let span_len = span_arclength(&table, leaf.start, leaf.end, n);
        let interior = leaf.edge_count(n).max(4);
        samples.push(MapSample {
            theta: theta0,
            point: curve.vertex(leaf.start),
            arclength: s0,
        });
        for k in 1..interior {
            let u = k as f64 / interior as f64;
            let s = s0 + u * span_len;
            let theta = theta0 + u * (theta1 - theta0);
            let wrapped = s % perimeter;
            samples.push(MapSample {
                theta,
                point: curve.point_at_arclength(wrapped, &table),
                arclength: wrapped,
            });
        }
    }
    BoundaryMap::from_samples(samples, MapKind::Tree, curve)
}

fn span_arclength(table: &[f64], start: usize, end: usize, n: usize) -> f64 {
    if end > start {
        table[end] - table[start]
    } else {
        table[n] - table[start] + table[end]
    }
}

/// θ = 2πi/n mapped to the point at arclength fraction i/n.
pub fn arclength_param(curve: &ClosedCurve, n: usize) -> Result<BoundaryMap> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!("sample count {n} below 16")));
    }
    let table = curve.arclength_table();
    let perimeter = table[curve.len()];
    let samples = (0..n)
        .map(|i| {
            let s = perimeter * i as f64 / n as f64;
            MapSample {
                theta: TAU * i as f64 / n as f64,
                point: curve.point_at_arclength(s, &table),
                arclength: s,
            }
        })
        .collect();
    BoundaryMap::from_samples(samples, MapKind::Arclength, curve.clone())
}

/// Piecewise-linear circle homeomorphism given by control points
/// (input angle, output angle), strictly increasing in both
/// coordinates, fixing 0 and 2π.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleHomeo {
    pub breakpoints: Vec<(f64, f64)>,
}

impl CircleHomeo {
    pub fn identity() -> Self {
        CircleHomeo { breakpoints: vec![(0.0, 0.0), (TAU, TAU)] }
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.breakpoints;
        if b.len() < 2 {
            return Err(Error::InvalidArgument("homeomorphism needs at least 2 breakpoints".into()));
        }
        if b[0] != (0.0, 0.0) || b[b.len() - 1] != (TAU, TAU) {
            return Err(Error::InvalidArgument("homeomorphism must fix 0 and 2π".into()));
        }
        for w in b.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::InvalidArgument("homeomorphism breakpoints not increasing".into()));
            }
        }
        Ok(())
    }

    /// Swapped control points; composing with the original is the
    /// identity up to interpolation roundoff.
    pub fn inverse(&self) -> CircleHomeo {
        CircleHomeo { breakpoints: self.breakpoints.iter().map(|&(a, b)| (b, a)).collect() }
    }

    pub fn apply(&self, theta: f64) -> f64 {
        let b = &self.breakpoints;
        let i = match b.partition_point(|&(x, _)| x <= theta) {
            0 => 0,
            p => (p - 1).min(b.len() - 2),
        };
        let (x0, y0) = b[i];
        let (x1, y1) = b[i + 1];
        (y0 + (theta - x0) / (x1 - x0) * (y1 - y0)).clamp(y0, y1)
    }
}

/// Re-indexes the samples through `homeo`; points stay put.
pub fn reparametrize(map: &BoundaryMap, homeo: &CircleHomeo) -> Result<BoundaryMap> {
    homeo.validate()?;
    let samples = map
        .samples
        .iter()
        .map(|s| MapSample { theta: homeo.apply(s.theta), ..*s })
        .collect();
    BoundaryMap::from_samples(samples, MapKind::Reparametrized, map.curve.clone())
}

impl BoundaryMap {
    pub(crate) fn from_samples(
        samples: Vec<MapSample>,
        kind: MapKind,
        curve: ClosedCurve,
    ) -> Result<Self> {
        let arc_table = curve.arclength_table();
        let map = BoundaryMap { samples, kind, metric: CircleMetric::Chordal, curve, arc_table };
        map.validate()?;
        Ok(map)
    }

    /// Checks the map invariants: enough samples, thetas strictly
    /// increasing in [0, 2π), points on the polyline, and the point
    /// sequence winding positively (arclengths cyclically increasing).
    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < 16 {
            return Err(Error::Validation(format!(
                "map has {} samples, need at least 16",
                self.samples.len()
            )));
        }
        let diam = self.curve.curve_diameter();
        for (i, s) in self.samples.iter().enumerate() {
            if !(0.0..TAU).contains(&s.theta) {
                return Err(Error::Validation(format!("theta {} outside [0, 2π)", s.theta)));
            }
            if i > 0 && s.theta <= self.samples[i - 1].theta {
                return Err(Error::Validation(format!("thetas not increasing at sample {i}")));
            }
            if self.curve.distance_to(s.point) > 1e-9 * diam.max(1.0) {
                return Err(Error::Validation(format!("sample {i} not on the curve")));
            }
        }
        // orientation: arclengths must advance positively, with exactly
        // one wrap across the whole cycle
        let mut wraps = 0usize;
        let m = self.samples.len();
        for i in 0..m {
            let a = self.samples[i].arclength;
            let b = self.samples[(i + 1) % m].arclength;
            if b <= a {
                wraps += 1;
            }
        }
        if wraps > 1 {
            return Err(Error::Validation(format!(
                "sample points do not wind once positively ({wraps} wraps)"
            )));
        }
        Ok(())
    }

    pub fn samples(&self) -> &[MapSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn metric(&self) -> CircleMetric {
        self.metric
    }

    pub fn with_metric(mut self, metric: CircleMetric) -> Self {
        self.metric = metric;
        self
    }

    pub fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    /// Value at any angle (2π-periodic): exact at samples, otherwise
    /// linear in arclength along the curve between the bracketing
    /// samples.
    pub fn eval(&self, theta: f64) -> Point {
        let m = self.samples.len();
        let perimeter = self.arc_table[self.curve.len()];
        let th = theta.rem_euclid(TAU);
        let i = match self.samples.partition_point(|s| s.theta <= th) {
            0 => m - 1, // below first sample: wrap segment from the last
            p => p - 1,
        };
        let a = &self.samples[i];
        if a.theta == th {
            return a.point;
        }
        let b = &self.samples[(i + 1) % m];
        let (th0, mut th1) = (a.theta, b.theta);
        let mut tq = th;
        if i == m - 1 {
            // wrap segment [last, first + 2π)
            th1 += TAU;
            if tq < th0 {
                tq += TAU;
            }
        }
        debug_assert!(th0 < th1);
        let u = (tq - th0) / (th1 - th0);
        let mut s0 = a.arclength;
        let s1 = b.arclength;
        let mut ds = s1 - s0;
        if ds <= 0.0 {
            ds += perimeter;
        }
        s0 += u * ds;
        self.curve.point_at_arclength(s0 % perimeter, &self.arc_table)
    }

    pub fn to_json(&self) -> Result<String> {
        let samples = self
            .samples
            .iter()
            .map(|s| SampleJson { theta: s.theta, x: s.point.x, y: s.point.y })
            .collect();
        Ok(serde_json::to_string_pretty(&MapJson {
            kind: self.kind,
            metric: self.metric,
            samples,
        })?)
    }

    /// Rebuilds a map over `curve` from serialized samples, recovering
    /// arclength positions by projection and revalidating.
    pub fn from_json(curve: &ClosedCurve, json: &str) -> Result<BoundaryMap> {
        let parsed: MapJson = serde_json::from_str(json)?;
        let samples = parsed
            .samples
            .iter()
            .map(|s| {
                let point = Point::new(s.x, s.y);
                let (arclength, _) = curve.project_arclength(point);
                MapSample { theta: s.theta, point, arclength }
            })
            .collect();
        let map = BoundaryMap {
            samples,
            kind: parsed.kind,
            metric: parsed.metric,
            curve: curve.clone(),
            arc_table: curve.arclength_table(),
        };
        map.validate()?;
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, CurveSpec};
    use crate::subdivide::build_tree;

    fn unit_circle(n: usize) -> ClosedCurve {
        generate(&CurveSpec::Circle { n }).unwrap().normalize_unit_diameter().unwrap().0
    }

    #[test]
    fn tree_map_on_circle_is_near_rotation() {
        let c = unit_circle(1024);
        let tree = build_tree(&c, 4, 3).unwrap();
        let map = build_boundary_map(&tree).unwrap();
        assert_eq!(map.kind(), MapKind::Tree);
        assert!(map.len() >= 64 * 5);
        // align by the image angle of the first sample, then compare
        // every sample to the rigid rotation
        let p0 = map.samples()[0].point;
        let offset = p0.y.atan2(p0.x) - map.samples()[0].theta;
        let mut worst = 0.0f64;
        for s in map.samples() {
            let phi = s.theta + offset;
            let rotated = Point::new(0.5 * phi.cos(), 0.5 * phi.sin());
            worst = worst.max(rotated.dist(s.point));
        }
        assert!(worst < 1e-2, "deviation from rotation {worst}");
    }

    #[test]
    fn leaf_endpoints_map_exactly() {
        let c = unit_circle(256);
        let tree = build_tree(&c, 4, 2).unwrap();
        let map = build_boundary_map(&tree).unwrap();
        let leaves = tree.leaves();
        for (li, leaf) in leaves.iter().enumerate() {
            let theta = TAU * li as f64 / leaves.len() as f64;
            assert_eq!(map.eval(theta), c.vertex(leaf.start), "leaf {li}");
        }
    }

    #[test]
    fn arclength_param_circle_is_rotationally_even() {
        let c = unit_circle(512);
        let map = arclength_param(&c, 128).unwrap();
        assert_eq!(map.kind(), MapKind::Arclength);
        // consecutive image gaps must all match (uniform speed)
        let gaps: Vec<f64> = (0..map.len())
            .map(|i| map.samples()[i].point.dist(map.samples()[(i + 1) % map.len()].point))
            .collect();
        let (lo, hi) = gaps.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &g| (l.min(g), h.max(g)));
        assert!(hi - lo < 1e-9, "gap spread {}..{}", lo, hi);
        assert!(arclength_param(&c, 8).is_err());
    }

    #[test]
    fn eval_interpolates_along_the_curve() {
        let c = unit_circle(512);
        let map = arclength_param(&c, 64).unwrap();
        for (i, s) in map.samples().iter().enumerate() {
            assert_eq!(map.eval(s.theta), s.point, "sample {i}");
        }
        // midpoint of a sample gap sits on the polyline and between the
        // bracketing points
        let a = map.samples()[3];
        let b = map.samples()[4];
        let mid = map.eval((a.theta + b.theta) / 2.0);
        assert!(c.distance_to(mid) < 1e-12);
        assert!(mid.dist(a.point) < a.point.dist(b.point));
        // periodicity: exact whenever θ+2π is itself exact (π + 2π is),
        // and within float rounding of the shifted angle otherwise
        assert_eq!(map.eval(std::f64::consts::PI), map.eval(3.0 * std::f64::consts::PI));
        let th = 1.234_567;
        assert!(map.eval(th).dist(map.eval(th + TAU)) < 1e-12);
        assert!(map.eval(th).dist(map.eval(th - TAU)) < 1e-12);
    }

    #[test]
    fn reparametrize_moves_thetas_not_points() {
        let c = unit_circle(256);
        let map = arclength_param(&c, 64).unwrap();
        let homeo = CircleHomeo {
            breakpoints: vec![(0.0, 0.0), (TAU / 2.0, TAU * 2.0 / 3.0), (TAU, TAU)],
        };
        let re = reparametrize(&map, &homeo).unwrap();
        assert_eq!(re.kind(), MapKind::Reparametrized);
        for (s, r) in map.samples().iter().zip(re.samples()) {
            assert_eq!(s.point, r.point);
            assert!((homeo.apply(s.theta) - r.theta).abs() < 1e-15);
        }
        // round trip through the inverse restores thetas
        let back = reparametrize(&re, &homeo.inverse()).unwrap();
        for (s, b) in map.samples().iter().zip(back.samples()) {
            assert!((s.theta - b.theta).abs() < 1e-12);
            assert_eq!(s.point, b.point);
        }
        // identity homeo is a no-op
        let id = reparametrize(&map, &CircleHomeo::identity()).unwrap();
        for (s, r) in map.samples().iter().zip(id.samples()) {
            assert_eq!(s.theta, r.theta);
        }
    }

    #[test]
    fn bad_homeos_are_rejected() {
        let c = unit_circle(256);
        let map = arclength_param(&c, 64).unwrap();
        let non_monotone = CircleHomeo {
            breakpoints: vec![(0.0, 0.0), (2.0, 4.0), (1.0, 5.0), (TAU, TAU)],
        };
        assert!(reparametrize(&map, &non_monotone).is_err());
        let detached = CircleHomeo { breakpoints: vec![(0.1, 0.0), (TAU, TAU)] };
        assert!(reparametrize(&map, &detached).is_err());
    }

    #[test]
    fn map_json_round_trip() {
        let c = unit_circle(256);
        let tree = build_tree(&c, 4, 2).unwrap();
        let map = build_boundary_map(&tree).unwrap();
        let json = map.to_json().unwrap();
        let back = BoundaryMap::from_json(&c, &json).unwrap();
        assert_eq!(back.kind(), MapKind::Tree);
        assert_eq!(back.metric(), CircleMetric::Chordal);
        assert_eq!(back.len(), map.len());
        for (a, b) in map.samples().iter().zip(back.samples()) {
            assert_eq!(a.theta, b.theta);
            assert_eq!(a.point, b.point);
            assert!((a.arclength - b.arclength).abs() < 1e-9);
        }
    }

    #[test]
    fn circle_metrics_agree_on_scale() {
        // chordal and arclength separations are comparable: chordal is
        // 2π·arclength·sinc, so ratios stay within [2/π·..., 2π]
        for d in [0.01, 0.5, 1.0, 2.0, 3.0] {
            let ch = circle_dist(CircleMetric::Chordal, 0.0, d);
            let al = circle_dist(CircleMetric::Arclength, 0.0, d);
            let ratio = ch / al;
            assert!(ratio >= 4.0 - 1e-9 && ratio <= TAU + 1e-9, "ratio {ratio} at {d}");
        }
        assert_eq!(circle_dist(CircleMetric::Arclength, 0.0, std::f64::consts::PI), 0.5);
        let anti = circle_dist(CircleMetric::Chordal, 0.25, 0.25 + std::f64::consts::PI);
        assert!((anti - 2.0).abs() < 1e-12);
    }
}
