//! Release gates. Each test is one numbered criterion and prints a single
//! `acceptance NN: PASS` line (visible with `--nocapture`); the criteria
//! pin closed-form values where they exist and property-level behavior
//! where the theory only promises existence.

use std::f64::consts::{PI, SQRT_2};

use tqc_core::boundary::{arclength_param, build_boundary_map};
use tqc_core::conformal::{
    default_polar_grid, derivative_ratio_check, geodesic_nearest_delta, harmonic_measure,
    hyperbolic_distance, koebe_check, thm47_verify, zipper_fit, SectorGeometry,
};
use tqc_core::generate::{adaptive_cusp_sampling, generate, CurveSpec};
use tqc_core::qs::{psi, psi_bound_check, weak_qs_constant};
use tqc_core::subdivide::{
    build_tree, equalize_count, greedy_subdivide, theoretical_constants, tree_constants, BigValue,
};
use tqc_core::turning::{exponent_fit, prefix_diameters, turning_constant, PairFilter};
use tqc_core::{ClosedCurve, Point};

fn pass(n: usize, what: &str) {
    println!("acceptance {n:>2}: PASS — {what}");
}

/// The locked power-cusp sampling: grade edges away from the apex so the
/// pinch stays shallow enough for the conformal fitter while the smooth
/// part keeps a dense boundary correspondence.
fn graded_cusp(n: usize) -> ClosedCurve {
    let base = generate(&CurveSpec::Cusp { s: 2.0, n }).unwrap();
    adaptive_cusp_sampling(&base, Point::new(1.0, 1.5), 0.995).unwrap()
}

#[test]
fn criterion_01_circle_turning_exactness() {
    let circle = generate(&CurveSpec::Circle { n: 512 }).unwrap();
    let at_one = turning_constant(&circle, 1.0, 7).unwrap();
    assert!(
        (at_one.c_star - 1.0).abs() <= 1e-3,
        "C*(1) on the circle = {}, expected 1 ± 1e-3",
        at_one.c_star
    );
    let at_half = turning_constant(&circle, 0.5, 7).unwrap();
    assert!(
        (at_half.c_star - SQRT_2).abs() <= 1e-2,
        "C*(1/2) on the circle = {}, expected √2 ± 1e-2",
        at_half.c_star
    );
    pass(1, "circle turning constants match the closed forms");
}

#[test]
fn criterion_02_cusp_exponent_recovery() {
    for (s, expect) in [(2.0, 0.5), (3.0, 1.0 / 3.0)] {
        let cusp = generate(&CurveSpec::Cusp { s, n: 1024 }).unwrap();
        let filter = PairFilter::Straddling {
            focus: Point::new(0.0, 0.0),
            max_chord: 0.1,
            max_index_skew: 0,
        };
        let report = exponent_fit(&cusp, 1.0, &filter, 0).unwrap();
        let fit_t = report.fit_t.unwrap();
        assert!(
            (fit_t - expect).abs() <= 0.05,
            "cusp s = {s}: straddling exponent fit {fit_t}, expected {expect} ± 0.05"
        );
    }
    // C*(1) must keep growing with resolution: no finite turning constant
    // at exponent 1 exists for the cusp.
    let c256 = turning_constant(&generate(&CurveSpec::Cusp { s: 2.0, n: 256 }).unwrap(), 1.0, 0)
        .unwrap()
        .c_star;
    let c1024 = turning_constant(&generate(&CurveSpec::Cusp { s: 2.0, n: 1024 }).unwrap(), 1.0, 0)
        .unwrap()
        .c_star;
    assert!(
        c1024 >= 2.0 * c256,
        "C*(1) grew only {c256} -> {c1024}; expected at least 2x from n=256 to n=1024"
    );
    pass(2, "cusp exponents recovered, C*(1) divergence certified");
}

#[test]
fn criterion_03_subdivision_partitions() {
    let eps = 0.25;
    for seed in 0..10u64 {
        let raw = generate(&CurveSpec::Perturbed { n: 512, seed, amplitude: 0.1 }).unwrap();
        let (curve, _scale) = raw.normalize_unit_diameter().unwrap();
        let n = curve.len();
        let spans = greedy_subdivide(&curve, eps, 0).unwrap();

        // covering + non-overlapping: consecutive spans chain around the
        // curve exactly once
        let mut edges = 0usize;
        for (i, s) in spans.iter().enumerate() {
            let next = spans[(i + 1) % spans.len()];
            assert_eq!(s.end, next.start, "seed {seed}: span {i} does not chain");
            edges += s.edge_count(n);
        }
        assert_eq!(edges, n, "seed {seed}: spans do not cover the curve exactly once");

        let diams: Vec<f64> = spans.iter().map(|s| curve.arc_diameter(*s)).collect();
        let min = diams.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = diams.iter().cloned().fold(0.0, f64::max);
        assert!(
            min >= eps / 8.0 && max <= eps,
            "seed {seed}: diameters [{min}, {max}] escape [eps/8, eps] = [{}, {eps}]",
            eps / 8.0
        );

        // Growing the piece count keeps the smallest diameter at half the
        // previous minimum, up to vertex quantization: a cut must land on a
        // vertex, so each half of a split piece is guaranteed D/2 minus at
        // most one edge length, not D/2 exactly.
        let edge = (0..n).map(|i| curve.vertex(i).dist(curve.vertex(i + 1))).fold(0.0, f64::max);
        for target in [spans.len(), spans.len() + 37, 2 * spans.len()] {
            let grown = equalize_count(&curve, &spans, target).unwrap();
            assert_eq!(grown.len(), target, "seed {seed}: equalize missed target {target}");
            let gmin =
                grown.iter().map(|s| curve.arc_diameter(*s)).fold(f64::INFINITY, f64::min);
            assert!(
                gmin >= min / 2.0 - edge,
                "seed {seed}, target {target}: min diameter {gmin} below {} (half of {min}, \
                 less one edge)",
                min / 2.0 - edge
            );
        }
    }
    pass(3, "greedy partitions cover with controlled diameters on 10 seeded curves");
}

#[test]
fn criterion_04_constant_schedule() {
    let sub = theoretical_constants(1.0, 1.0, 0.5).unwrap();
    assert_eq!(sub.p, 607.0, "piece-count bound p = {}, expected 607", sub.p);

    let tc = tree_constants(3, 1.0).unwrap();
    assert_eq!(tc.mu.value, 4.0, "log2 mu = {}, expected 4 (mu = 16)", tc.mu.value);
    assert_eq!((tc.m, tc.n), (4, 16), "(m, n) = ({}, {}), expected (4, 16)", tc.m, tc.n);
    match tc.n_alphabet {
        BigValue::Exact(v) => assert_eq!(v, 145, "N = {v}, expected 145"),
        BigValue::Log(_) => panic!("N should be exact for p = 3"),
    }
    assert_eq!(tc.c.value, 24.0, "log2 c = {}, expected 24", tc.c.value);

    // the two admissibility inequalities behind the schedule, in log space:
    // 4n + 3 <= p^m and 2^n >= mu^m
    let (m, n, p) = (tc.m as f64, tc.n as f64, 3.0f64);
    assert!(
        (4.0 * n + 3.0).log2() <= m * p.log2(),
        "log2(4n+3) = {} exceeds m*log2(p) = {}",
        (4.0 * n + 3.0).log2(),
        m * p.log2()
    );
    assert!(
        n >= m * tc.mu.value,
        "n = {n} below m*log2(mu) = {}",
        m * tc.mu.value
    );
    pass(4, "frozen constant schedule reproduced (p=607; mu=16, (4,16), N=145, log2 c=24)");
}

#[test]
fn criterion_05_tree_map_weak_constant() {
    let koch = generate(&CurveSpec::Koch { level: 4 }).unwrap();
    let mut weaks = Vec::new();
    for depth in [3usize, 4] {
        let tree = build_tree(&koch, 4, depth).unwrap();
        let map = build_boundary_map(&tree).unwrap();
        let report = weak_qs_constant(&map, 1.0, 17).unwrap();
        let value = report.weak_r.unwrap().value;
        assert!(value.is_finite() && value > 0.0, "depth {depth}: weak constant {value}");
        weaks.push(value);
    }
    let ratio = (weaks[0] / weaks[1]).max(weaks[1] / weaks[0]);
    assert!(
        ratio < 2.0,
        "weak constant moved {}x between depths 3 and 4 ({} -> {})",
        ratio,
        weaks[0],
        weaks[1]
    );
    // turning cross-check: the image curve's C*(1) is controlled by the
    // weak constant of any boundary parametrization onto it
    let c_star = turning_constant(&koch, 1.0, 7).unwrap().c_star;
    assert!(
        c_star <= 2.0 * weaks[1],
        "C*(1) = {c_star} exceeds 2 * weak constant = {}",
        2.0 * weaks[1]
    );
    pass(5, "tree-built boundary map has a stable finite weak constant");
}

#[test]
fn criterion_06_disk_geometry_bounds() {
    const R_GRID: [f64; 7] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];
    let floor = 1.0 / (18.0 * PI * PI);

    let mut min_omega = f64::INFINITY;
    for r in R_GRID {
        let sector = SectorGeometry::new(r, 0.0).unwrap();
        let omega = harmonic_measure(sector.z, &sector.a_arcs).unwrap();
        min_omega = min_omega.min(omega);
    }
    assert!(
        min_omega >= floor && min_omega >= 0.005629,
        "min harmonic measure {min_omega} below 1/(18 pi^2) = {floor}"
    );

    let cap = 0.5 * PI.ln();
    let mut max_lambda: f64 = 0.0;
    for r in R_GRID {
        let delta = geodesic_nearest_delta(r).unwrap();
        let lambda = hyperbolic_distance(Point::new(r, 0.0), Point::new(delta, 0.0)).unwrap();
        max_lambda = max_lambda.max(lambda);
    }
    assert!(
        max_lambda <= cap,
        "max hyperbolic gap {max_lambda} exceeds (1/2) log pi = {cap}"
    );

    let d34 = geodesic_nearest_delta(0.75).unwrap();
    assert!(
        (d34 - 0.41421).abs() <= 1e-5,
        "delta(3/4) = {d34}, expected 0.41421 ± 1e-5"
    );
    pass(6, "harmonic floor, hyperbolic cap, and delta(3/4) verified");
}

#[test]
fn criterion_07_conformal_distortion_checks() {
    let grid500 = default_polar_grid(25, 20, 0.05, 0.95);
    assert_eq!(grid500.len(), 500);

    // identity recovery on the circle
    let circle = generate(&CurveSpec::Circle { n: 512 }).unwrap();
    let circle_map = zipper_fit(&circle, Some(Point::new(0.0, 0.0))).unwrap();
    let ident_grid = default_polar_grid(10, 36, 0.05, 0.9);
    let mut worst = 0.0f64;
    for &z in &ident_grid {
        let w = circle_map.eval(z);
        worst = worst.max(w.dist(z));
    }
    assert!(worst <= 2e-2, "circle map deviates from the identity by {worst} on |z| <= 0.9");

    // distortion sandwich + derivative-ratio estimates on four shapes
    let shapes: Vec<(&str, ClosedCurve)> = vec![
        ("circle", circle),
        ("ellipse", generate(&CurveSpec::Ellipse { a: 2.0, b: 1.0, n: 512 }).unwrap()),
        ("koch", generate(&CurveSpec::Koch { level: 3 }).unwrap()),
        ("cusp", graded_cusp(1024)),
    ];
    let mut koch_map = None;
    for (name, curve) in shapes {
        let map = zipper_fit(&curve, None).unwrap();
        let koebe = koebe_check(&map, &grid500).unwrap();
        assert!(
            koebe.pass,
            "{name}: distortion sandwich failed (lower {}, upper {})",
            koebe.worst_lower, koebe.worst_upper
        );

        // pair the 500 grid points ring by ring (including the ring seam),
        // so r1 <= r2 always holds
        let mut polar: Vec<(f64, f64)> =
            grid500.iter().map(|p| (p.norm(), p.y.atan2(p.x))).collect();
        polar.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in polar.windows(2) {
            let report = derivative_ratio_check(&map, pair[0], pair[1]).unwrap();
            assert!(
                report.pass,
                "{name}: derivative-ratio bound failed at ({:?}, {:?}): log ratio {} vs {} / {}",
                pair[0], pair[1], report.log_ratio, report.integrated_bound,
                report.hyperbolic_bound
            );
        }
        if name == "koch" {
            koch_map = Some(map);
        }
    }

    // negative control: amputating one slit stage from the snowflake map
    // must break the sandwich (each stage carries an O(1) turning angle)
    let koch_map = koch_map.unwrap();
    let corrupted = koch_map.with_stage_removed(koch_map.stage_count() / 2);
    let caught = match koebe_check(&corrupted, &grid500) {
        Ok(report) => !report.pass,
        Err(_) => true,
    };
    assert!(caught, "corrupted map slipped through the distortion sandwich");
    pass(7, "conformal fits pass distortion checks on 4 shapes; corruption is caught");
}

#[test]
fn criterion_08_modulus_domination() {
    // zero-angle cusp at the critical exponent t = 1/2
    let map_coarse = zipper_fit(&graded_cusp(1024), None).unwrap();
    let coarse = thm47_verify(&map_coarse, 0.5, 1_500_000, 23).unwrap();
    assert!(coarse.pass, "cusp modulus domination failed at n=1024");
    assert!(coarse.chord_arc_pass, "facing-arc chord bounds failed");
    assert!(
        coarse.chord_arc_lower_margin >= -1e-9 && coarse.chord_arc_upper_margin >= -1e-9,
        "chord-arc margins ({}, {}) not exact",
        coarse.chord_arc_lower_margin,
        coarse.chord_arc_upper_margin
    );
    assert!(coarse.bins_checked >= 1, "no populated k >= 1 buckets");
    assert!(
        coarse.worst_log_margin <= 0.0,
        "a sampled triple ratio exceeded the envelope by exp({})",
        coarse.worst_log_margin
    );
    assert!(
        coarse.constants.m_hat.is_finite() && coarse.constants.n_hat > 0.0,
        "degenerate distortion constants: M = {}, N = {}",
        coarse.constants.m_hat,
        coarse.constants.n_hat
    );
    assert!(coarse.eta_fit.pass, "affine-log envelope does not dominate the bins");
    assert_eq!(coarse.modulus.t_exponent, 0.25, "triple scan not at exponent t^2");

    // the measured constants must be resolution-stable
    let map_fine = zipper_fit(&graded_cusp(2048), None).unwrap();
    let fine = thm47_verify(&map_fine, 0.5, 1_500_000, 23).unwrap();
    assert!(fine.pass, "cusp modulus domination failed at n=2048");
    for (label, a, b) in [
        ("M", coarse.constants.m_hat, fine.constants.m_hat),
        ("N", coarse.constants.n_hat, fine.constants.n_hat),
    ] {
        let ratio = (a / b).max(b / a);
        assert!(
            ratio <= 2.0,
            "{label} moved {ratio}x under refinement ({a} -> {b})"
        );
    }

    // smooth bounded-turning control at t = 1
    let ellipse = generate(&CurveSpec::Ellipse { a: 2.0, b: 1.0, n: 512 }).unwrap();
    let emap = zipper_fit(&ellipse, None).unwrap();
    let smooth = thm47_verify(&emap, 1.0, 1_000_000, 41).unwrap();
    assert!(smooth.pass, "ellipse modulus domination failed at t=1");
    for bin in smooth.modulus.rho_bins.as_ref().unwrap() {
        if let Some(max_ratio) = bin.max_ratio {
            assert!(max_ratio.is_finite(), "infinite ratio in bucket [{}, {}]", bin.k_lo, bin.k_hi);
        }
    }
    pass(8, "modulus domination holds on the cusp (t=1/2) and the ellipse (t=1)");
}

#[test]
fn criterion_09_small_ratio_bound() {
    let koch = generate(&CurveSpec::Koch { level: 4 }).unwrap();
    let tree = build_tree(&koch, 4, 3).unwrap();
    let map = build_boundary_map(&tree).unwrap();
    let weak = weak_qs_constant(&map, 1.0, 17).unwrap().weak_r.unwrap().value;
    assert!(weak.is_finite() && weak > 0.0);

    let report = psi_bound_check(&map, 1.0, weak, 17).unwrap();
    assert!(report.checked > 0, "no triples below k = 1/256 were targeted");
    assert!(
        report.pass && report.worst_slack <= 1.0,
        "a triple with k = {} broke the small-ratio bound (slack {})",
        report.worst_k,
        report.worst_slack
    );

    let spot = psi(2f64.powi(-16), 1.0, 1.0);
    assert!(
        (spot - 2.0 * SQRT_2).abs() <= 1e-9,
        "psi(2^-16, 1, 1) = {spot}, expected 2*sqrt(2)"
    );
    pass(9, "small-ratio bound holds on the tree map; psi spot value exact");
}

#[test]
fn criterion_10_arclength_exponent_cube() {
    let cusp = generate(&CurveSpec::Cusp { s: 2.0, n: 1024 }).unwrap();
    let exponent = 0.125; // t^3 at t = 1/2
    let mut weaks = Vec::new();
    for n in [512usize, 1024] {
        let map = arclength_param(&cusp, n).unwrap();
        let report = weak_qs_constant(&map, exponent, 17).unwrap();
        let value = report.weak_r.unwrap().value;
        assert!(value.is_finite() && value > 0.0, "n = {n}: weak constant {value}");
        weaks.push(value);
    }
    let ratio = (weaks[0] / weaks[1]).max(weaks[1] / weaks[0]);
    assert!(
        ratio <= 2.0,
        "weak constant at t^3 moved {ratio}x under doubling ({} -> {})",
        weaks[0],
        weaks[1]
    );
    pass(10, "arclength map of the cusp has a stable weak constant at t^3");
}

#[test]
fn criterion_11_engine_equivalence() {
    let raw = generate(&CurveSpec::Perturbed { n: 200, seed: 3, amplitude: 0.1 }).unwrap();

    // prefix diameters against the all-pairs scan: exact
    for anchor in [0usize, 7, 113] {
        let fast = prefix_diameters(&raw, anchor);
        let n = raw.len();
        for m in 1..n {
            let mut brute = 0.0f64;
            for i in 0..=m {
                for j in (i + 1)..=m {
                    brute = brute.max(raw.vertex(anchor + i).dist(raw.vertex(anchor + j)));
                }
            }
            assert_eq!(fast[m], brute, "anchor {anchor}, prefix {m}: diameter mismatch");
        }
    }

    // weak constant against the full triple scan: 1e-12 relative
    let map = arclength_param(&raw, 200).unwrap();
    let exponent = 0.7;
    let fast = weak_qs_constant(&map, exponent, 11).unwrap();
    let samples = map.samples();
    let unit: Vec<Point> =
        samples.iter().map(|s| Point::new(s.theta.cos(), s.theta.sin())).collect();
    let pts: Vec<Point> = samples.iter().map(|s| s.point).collect();
    let n = pts.len();
    let mut brute = 0.0f64;
    for x in 0..n {
        for a in 0..n {
            if a == x {
                continue;
            }
            for b in 0..n {
                if b == x || unit[a].dist(unit[x]) > unit[b].dist(unit[x]) {
                    continue;
                }
                let den = pts[b].dist(pts[x]);
                if den < 1e-14 {
                    continue;
                }
                brute = brute.max(pts[a].dist(pts[x]) / den.powf(exponent));
            }
        }
    }
    let fast_value = fast.weak_r.as_ref().unwrap().value;
    assert!(
        (fast_value - brute).abs() <= 1e-12 * brute.max(1.0),
        "weak constant {fast_value} vs brute force {brute}"
    );

    // identical results from different pool sizes
    let pool_small = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool_large = rayon::ThreadPoolBuilder::new().num_threads(7).build().unwrap();
    let weak_small = pool_small.install(|| weak_qs_constant(&map, exponent, 11)).unwrap();
    let weak_large = pool_large.install(|| weak_qs_constant(&map, exponent, 11)).unwrap();
    let (ws, wl) = (weak_small.weak_r.unwrap(), weak_large.weak_r.unwrap());
    assert_eq!(ws.value.to_bits(), wl.value.to_bits(), "weak constant varies with threads");
    assert_eq!(ws.witness, wl.witness, "weak witness varies with threads");

    let koch = generate(&CurveSpec::Koch { level: 4 }).unwrap();
    let turn_small = pool_small.install(|| turning_constant(&koch, 1.0, 5)).unwrap();
    let turn_large = pool_large.install(|| turning_constant(&koch, 1.0, 5)).unwrap();
    assert_eq!(
        turn_small.c_star.to_bits(),
        turn_large.c_star.to_bits(),
        "turning constant varies with threads"
    );
    assert_eq!(turn_small.witness, turn_large.witness);
    pass(11, "sweep engines match brute force; results independent of thread count");
}
