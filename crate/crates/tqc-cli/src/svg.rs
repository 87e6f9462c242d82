//! Minimal SVG rendering: the curve as a closed polyline, optionally
//! overlaid with the images of concentric circles and radial spokes
//! under a fitted map — a quick visual check that the fit fills the
//! domain smoothly.

use tqc_core::conformal::DiskMap;
use tqc_core::{ClosedCurve, Point};

const VIEW: f64 = 720.0;

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    fn fit(curve: &ClosedCurve) -> Frame {
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in curve.vertices() {
            x0 = x0.min(v.x);
            y0 = y0.min(v.y);
            x1 = x1.max(v.x);
            y1 = y1.max(v.y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let pad = 0.05 * span;
        Frame { x0: x0 - pad, y0: y0 - pad, scale: VIEW / (span + 2.0 * pad) }
    }

    // SVG y grows downward; flip so the curve keeps its orientation
    fn map(&self, p: Point) -> (f64, f64) {
        ((p.x - self.x0) * self.scale, VIEW - (p.y - self.y0) * self.scale)
    }
}

fn polyline(frame: &Frame, points: &[Point], closed: bool, style: &str, out: &mut String) {
    let tag = if closed { "polygon" } else { "polyline" };
    out.push_str(&format!("  <{tag} points=\""));
    for p in points {
        let (x, y) = frame.map(*p);
        out.push_str(&format!("{x:.2},{y:.2} "));
    }
    out.push_str(&format!("\" {style}/>\n"));
}

pub fn render(curve: &ClosedCurve, map: Option<&DiskMap>) -> String {
    let frame = Frame::fit(curve);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEW} {VIEW}\" \
         width=\"{VIEW}\" height=\"{VIEW}\">\n"
    );
    if let Some(map) = map {
        let grid = "fill=\"none\" stroke=\"#b0b6bd\" stroke-width=\"1\"";
        for radius in [0.25, 0.5, 0.75, 0.9] {
            let ring: Vec<Point> = (0..160)
                .map(|i| {
                    let th = std::f64::consts::TAU * i as f64 / 160.0;
                    map.eval(Point::new(radius * th.cos(), radius * th.sin()))
                })
                .collect();
            polyline(&frame, &ring, true, grid, &mut out);
        }
        for k in 0..12 {
            let th = std::f64::consts::TAU * k as f64 / 12.0;
            let spoke: Vec<Point> = (0..=40)
                .map(|i| {
                    let r = 0.9 * i as f64 / 40.0;
                    map.eval(Point::new(r * th.cos(), r * th.sin()))
                })
                .collect();
            polyline(&frame, &spoke, false, grid, &mut out);
        }
        let (cx, cy) = frame.map(map.center_image());
        out.push_str(&format!("  <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"3\" fill=\"#d1495b\"/>\n"));
    }
    polyline(
        &frame,
        curve.vertices(),
        true,
        "fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"2\"",
        &mut out,
    );
    out.push_str("</svg>\n");
    out
}
