//! Validation checks run against every fitted map and the empirical
//! distortion constants measured through it: the Koebe sandwich, the
//! two derivative-ratio bounds, the boundary-sector constants, and the
//! modulus-domination verdict tying the boundary correspondence to the
//! curve's turning exponent.

use super::geometry::{arc_to_center, geodesic_between, hyperbolic_distance, SectorGeometry};
use super::zipper::{deriv_abs, dist_to_boundary, DiskMap};
use crate::error::{Error, Result};
use crate::geom::{diameter, Point};
use crate::qs::{eta_shape_fit, qs_modulus, EtaFit, QsReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Multiplicative tolerance absorbing finite-difference noise in the
/// inequality checks.
pub const CHECK_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridWitness {
    pub z: Point,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairWitness {
    pub theta1: f64,
    pub theta2: f64,
    pub value: f64,
}

/// Uniform polar grid, radii × angles points, radius endpoints
/// included.
pub fn default_polar_grid(radii: usize, angles: usize, r_min: f64, r_max: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(radii * angles);
    for i in 0..radii {
        let r = if radii > 1 { r_min + (r_max - r_min) * i as f64 / (radii - 1) as f64 } else { r_min };
        for j in 0..angles {
            let th = TAU * j as f64 / angles as f64;
            out.push(Point::new(r * th.cos(), r * th.sin()));
        }
    }
    out
}

// ---- Koebe sandwich --------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KoebeReport {
    pub grid_points: usize,
    /// min over the grid of d_f(z) / (¼(1−|z|²)|f′(z)|); the lower
    /// inequality asks ≥ 1.
    pub worst_lower: f64,
    pub lower_witness: GridWitness,
    /// max over the grid of d_f(z) / ((1−|z|²)|f′(z)|); the upper
    /// inequality asks ≤ 1.
    pub worst_upper: f64,
    pub upper_witness: GridWitness,
    pub pass: bool,
}

/// ¼(1−|z|²)|f′(z)| ≤ d_f(z) ≤ (1−|z|²)|f′(z)| on the grid, with
/// multiplicative slack [`CHECK_SLACK`]. A violation means the object
/// is not a conformal map onto the region bounded by its curve.
pub fn koebe_check(map: &DiskMap, z_grid: &[Point]) -> Result<KoebeReport> {
    if z_grid.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation grid".into()));
    }
    for z in z_grid {
        if z.norm() > 1.0 - 1e-4 {
            return Err(Error::InvalidArgument(format!(
                "grid point ({}, {}) outside |z| ≤ 1−1e-4",
                z.x, z.y
            )));
        }
    }
    let rows: Vec<(f64, f64)> = z_grid
        .par_iter()
        .map(|&z| -> Result<(f64, f64)> {
            let df = dist_to_boundary(map, z)?;
            let fp = deriv_abs(map, z)?;
            let s = 1.0 - z.norm() * z.norm();
            Ok((df / (0.25 * s * fp), df / (s * fp)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::NEG_INFINITY;
    let mut lower_witness = GridWitness { z: z_grid[0], value: f64::NAN };
    let mut upper_witness = GridWitness { z: z_grid[0], value: f64::NAN };
    for (i, &(lo, hi)) in rows.iter().enumerate() {
        let lo = if lo.is_finite() { lo } else { f64::NEG_INFINITY };
        let hi = if hi.is_finite() { hi } else { f64::INFINITY };
        if lo < worst_lower {
            worst_lower = lo;
            lower_witness = GridWitness { z: z_grid[i], value: lo };
        }
        if hi > worst_upper {
            worst_upper = hi;
            upper_witness = GridWitness { z: z_grid[i], value: hi };
        }
    }
    let pass = worst_lower >= 1.0 / CHECK_SLACK && worst_upper <= CHECK_SLACK;
    Ok(KoebeReport {
        grid_points: z_grid.len(),
        worst_lower,
        lower_witness,
        worst_upper,
        upper_witness,
        pass,
    })
}

// ---- derivative ratio ------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivRatioReport {
    pub r1: f64,
    pub alpha: f64,
    pub r2: f64,
    pub beta: f64,
    /// log(|f′(z1)| / |f′(z2)|)
    pub log_ratio: f64,
    /// 4r₂/(1−r₂²)·|α−β| + log((1−r₁)/(1−r₂)) + log 8
    pub integrated_bound: f64,
    /// 3·λ(z1, z2): the two-sided hyperbolic bound on the log-ratio.
    pub hyperbolic_bound: f64,
    pub pass: bool,
}

/// Checks |log(|f′(z1)|/|f′(z2)|)| against the integrated radial/arc
/// estimate and the hyperbolic-distance bound, both with slack
/// [`CHECK_SLACK`] on the exponential scale.
pub fn derivative_ratio_check(
    map: &DiskMap,
    z1: (f64, f64),
    z2: (f64, f64),
) -> Result<DerivRatioReport> {
    let (r1, alpha) = z1;
    let (r2, beta) = z2;
    if !(r1 > 0.0 && r1 <= r2 && r2 <= 1.0 - 1e-4) {
        return Err(Error::InvalidArgument(format!(
            "radii ({r1}, {r2}) must satisfy 0 < r1 ≤ r2 ≤ 1−1e-4"
        )));
    }
    let p1 = Point::new(r1 * alpha.cos(), r1 * alpha.sin());
    let p2 = Point::new(r2 * beta.cos(), r2 * beta.sin());
    let d1 = deriv_abs(map, p1)?;
    let d2 = deriv_abs(map, p2)?;
    let log_ratio = (d1 / d2).ln();
    let mut dphi = (alpha - beta).abs() % TAU;
    if dphi > PI {
        dphi = TAU - dphi;
    }
    let integrated = 4.0 * r2 / (1.0 - r2 * r2) * dphi + ((1.0 - r1) / (1.0 - r2)).ln() + 8f64.ln();
    let hyperbolic = 3.0 * hyperbolic_distance(p1, p2)?;
    let slack = CHECK_SLACK.ln();
    let pass = log_ratio.is_finite()
        && log_ratio.abs() <= integrated + slack
        && log_ratio.abs() <= hyperbolic + slack;
    Ok(DerivRatioReport {
        r1,
        alpha,
        r2,
        beta,
        log_ratio,
        integrated_bound: integrated,
        hyperbolic_bound: hyperbolic,
        pass,
    })
}

// ---- sector constants ------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConformalConstantsReport {
    pub t: f64,
    pub grid_points: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// sup diam f(B(z)) / d_f(z)^t
    #[serde(rename = "N3_hat")]
    pub n3_hat: f64,
    pub n3_witness: GridWitness,
    /// sup |f(ζ₁)−f(ζ₂)| / ((1−|z|)^t |f′(z)|^t) over I(z) endpoints
    #[serde(rename = "M_hat")]
    pub m_hat: f64,
    pub m_witness: GridWitness,
    /// inf |f(ζ₁)−f(ζ₂)|^t / ((1−|z|) |f′(z)|)
    #[serde(rename = "N_hat")]
    pub n_hat: f64,
    pub n_witness: GridWitness,
    /// sup diam f(S) / |f(z₁)−f(z₂)|^t over boundary pairs with
    /// geodesic S
    #[serde(rename = "N2_hat")]
    pub n2_hat: f64,
    pub n2_witness: PairWitness,
    /// sup length f(S) / length f(L) against the radial-arc-radial
    /// competitor L
    pub gh_len_ratio: f64,
    pub gh_len_witness: PairWitness,
    /// sup diam f(S) / diam f(L)
    pub gh_diam_ratio: f64,
    pub gh_diam_witness: PairWitness,
    /// d_f(0) / diam of the domain
    pub c_center: f64,
    pub boundary_pairs: usize,
}

fn unit(theta: f64) -> Point {
    Point::new(theta.cos(), theta.sin())
}

fn polyline_len(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Measures the sector-distortion constants over an interior polar
/// grid (each point spawning its sector B(z) and arc I(z)) plus seeded
/// boundary pairs joined by hyperbolic geodesics.
pub fn lemma_constants_report(
    map: &DiskMap,
    t: f64,
    z_grid: &[Point],
    seed: u64,
) -> Result<ConformalConstantsReport> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent {t} outside (0, 1]")));
    }
    if z_grid.len() < 50 {
        return Err(Error::InvalidArgument(format!(
            "grid has {} points, need at least 50",
            z_grid.len()
        )));
    }
    let mut r_min = f64::INFINITY;
    let mut r_max = f64::NEG_INFINITY;
    for z in z_grid {
        let r = z.norm();
        r_min = r_min.min(r);
        r_max = r_max.max(r);
        if !(0.5..=1.0 - 1e-3 + 1e-12).contains(&r) {
            return Err(Error::InvalidArgument(format!(
                "grid radius {r} outside [1/2, 1−1e-3]"
            )));
        }
    }

    // sector constants, one independent measurement per grid point
    let stats: Vec<(f64, f64, f64)> = z_grid
        .par_iter()
        .map(|&z| -> Result<(f64, f64, f64)> {
            let r = z.norm();
            let alpha = z.y.atan2(z.x);
            let sec = SectorGeometry::new(r, alpha)?;
            let df = dist_to_boundary(map, z)?;
            let fp = deriv_abs(map, z)?;
            let mut b_pts = sec.b_boundary_points(256);
            b_pts.extend(sec.b_fill_points(16));
            let images: Vec<Point> = b_pts.iter().map(|&p| map.eval(p)).collect();
            let n3 = diameter(&images) / df.powf(t);
            let (th0, th1) = sec.i_arc;
            let di = map.eval(unit(th0)).dist(map.eval(unit(th1)));
            let u = 1.0 - r;
            let m = di / (u.powf(t) * fp.powf(t));
            let n = di.powf(t) / (u * fp);
            Ok((n3, m, n))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut n3_hat = f64::NEG_INFINITY;
    let mut m_hat = f64::NEG_INFINITY;
    let mut n_hat = f64::INFINITY;
    let mut n3_witness = GridWitness { z: z_grid[0], value: f64::NAN };
    let mut m_witness = n3_witness;
    let mut n_witness = n3_witness;
    for (i, &(n3, m, n)) in stats.iter().enumerate() {
        if n3 > n3_hat {
            n3_hat = n3;
            n3_witness = GridWitness { z: z_grid[i], value: n3 };
        }
        if m > m_hat {
            m_hat = m;
            m_witness = GridWitness { z: z_grid[i], value: m };
        }
        if n < n_hat {
            n_hat = n;
            n_witness = GridWitness { z: z_grid[i], value: n };
        }
    }

    // boundary pairs: geodesic diameters and competitor-path ratios
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for _ in 0..48 {
        let th1 = rng.gen_range(0.0..TAU);
        let th2 = rng.gen_range(0.0..TAU);
        let mut sep = (th1 - th2).abs() % TAU;
        if sep > PI {
            sep = TAU - sep;
        }
        if sep < 0.05 {
            continue;
        }
        pairs.push((th1, th2));
    }
    let pair_stats: Vec<(f64, f64, f64)> = pairs
        .par_iter()
        .map(|&(th1, th2)| -> Result<(f64, f64, f64)> {
            let geo = geodesic_between(unit(th1), unit(th2), 64)?;
            let geo_im: Vec<Point> = geo.iter().map(|&p| map.eval(p)).collect();
            let fz1 = geo_im[0];
            let fz2 = *geo_im.last().unwrap();
            let n2 = diameter(&geo_im) / fz1.dist(fz2).powf(t);
            // competitor: radial inward, arc at the sector radius,
            // radial back out
            let mut dphi = (th2 - th1).rem_euclid(TAU);
            if dphi > PI {
                dphi -= TAU;
            }
            let rc = 1.0 - dphi.abs() / TAU;
            let mut comp = Vec::with_capacity(64);
            for i in 0..8 {
                let rho = 1.0 - (1.0 - rc) * i as f64 / 7.0;
                comp.push(Point::new(rho * th1.cos(), rho * th1.sin()));
            }
            for i in 0..48 {
                let th = th1 + dphi * i as f64 / 47.0;
                comp.push(Point::new(rc * th.cos(), rc * th.sin()));
            }
            for i in 0..8 {
                let rho = rc + (1.0 - rc) * i as f64 / 7.0;
                comp.push(Point::new(rho * th2.cos(), rho * th2.sin()));
            }
            let comp_im: Vec<Point> = comp.iter().map(|&p| map.eval(p)).collect();
            let gh_len = polyline_len(&geo_im) / polyline_len(&comp_im);
            let gh_diam = diameter(&geo_im) / diameter(&comp_im);
            Ok((n2, gh_len, gh_diam))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut n2_hat = f64::NEG_INFINITY;
    let mut gh_len_ratio = f64::NEG_INFINITY;
    let mut gh_diam_ratio = f64::NEG_INFINITY;
    let nan_pair = PairWitness { theta1: f64::NAN, theta2: f64::NAN, value: f64::NAN };
    let mut n2_witness = nan_pair;
    let mut gh_len_witness = nan_pair;
    let mut gh_diam_witness = nan_pair;
    for (i, &(n2, gl, gd)) in pair_stats.iter().enumerate() {
        let (th1, th2) = pairs[i];
        if n2 > n2_hat {
            n2_hat = n2;
            n2_witness = PairWitness { theta1: th1, theta2: th2, value: n2 };
        }
        if gl > gh_len_ratio {
            gh_len_ratio = gl;
            gh_len_witness = PairWitness { theta1: th1, theta2: th2, value: gl };
        }
        if gd > gh_diam_ratio {
            gh_diam_ratio = gd;
            gh_diam_witness = PairWitness { theta1: th1, theta2: th2, value: gd };
        }
    }

    let c_center = dist_to_boundary(map, Point::new(0.0, 0.0))?
        / map.domain_curve().curve_diameter();

    Ok(ConformalConstantsReport {
        t,
        grid_points: z_grid.len(),
        r_min,
        r_max,
        n3_hat,
        n3_witness,
        m_hat,
        m_witness,
        n_hat,
        n_witness,
        n2_hat,
        n2_witness,
        gh_len_ratio,
        gh_len_witness,
        gh_diam_ratio,
        gh_diam_witness,
        c_center,
        boundary_pairs: pairs.len(),
    })
}

// ---- modulus domination ----------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thm47Report {
    pub t: f64,
    pub constants: ConformalConstantsReport,
    /// Boundary-triple scan at exponent t².
    pub modulus: QsReport,
    pub eta_fit: EtaFit,
    /// max over populated k ≥ 1 buckets of log(max ratio) − log η̂(k_lo);
    /// ≤ 0 means every sampled ratio sits below the envelope.
    pub worst_log_margin: f64,
    pub worst_bin_k: f64,
    pub bins_checked: usize,
    pub chord_arc_lower_margin: f64,
    pub chord_arc_upper_margin: f64,
    pub chord_arc_pass: bool,
    pub pass: bool,
}

/// log η̂(k) = t·(log(4πk) + 4π²k) + log M̂ − t·log N̂ + t·log(kπ/2),
/// kept in log space — the e^{4π²k} factor overflows f64 long before
/// the comparison becomes interesting.
fn log_eta_hat(k: f64, t: f64, m_hat: f64, n_hat: f64) -> f64 {
    t * ((4.0 * PI * k).ln() + 4.0 * PI * PI * k) + m_hat.ln() - t * n_hat.ln()
        + t * (k * PI / 2.0).ln()
}

/// Verifies the modulus-domination statement on a fitted map: builds
/// the envelope η̂ from the measured sector constants, scans boundary
/// triples at exponent t² bucketed by k = |a−x|/|b−x|, checks every
/// bucket max against η̂, re-derives the chord-arc inequality
/// 4(1−r) ≤ |a−x| ≤ 2π(1−r), and fits the affine-log envelope to the
/// empirical modulus.
pub fn thm47_verify(
    map: &DiskMap,
    t: f64,
    triple_budget: usize,
    seed: u64,
) -> Result<Thm47Report> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent {t} outside (0, 1]")));
    }
    if map.boundary_corr().len() < 512 {
        return Err(Error::InvalidArgument(format!(
            "boundary correspondence has {} resolved vertices, need at least 512",
            map.boundary_corr().len()
        )));
    }
    let grid = default_polar_grid(8, 16, 0.5, 1.0 - 1e-3);
    let constants = lemma_constants_report(map, t, &grid, seed)?;

    let target = (triple_budget as f64).cbrt().round() as usize;
    let bmap = map.boundary_map(target.clamp(64, map.boundary_corr().len()))?;
    let modulus = qs_modulus(&bmap, t * t, 28, 8.0, seed)?;
    let eta_fit = eta_shape_fit(&modulus)?;

    let mut worst_log_margin = f64::NEG_INFINITY;
    let mut worst_bin_k = f64::NAN;
    let mut bins_checked = 0usize;
    for bin in modulus.rho_bins.as_ref().unwrap() {
        let (Some(max), true) = (bin.max_ratio, bin.k_lo >= 1.0 - 1e-9) else { continue };
        bins_checked += 1;
        let margin = max.ln() - log_eta_hat(bin.k_lo, t, constants.m_hat, constants.n_hat);
        if margin > worst_log_margin {
            worst_log_margin = margin;
            worst_bin_k = bin.k_lo;
        }
    }
    if bins_checked == 0 {
        return Err(Error::Validation("no boundary triples with k ≥ 1 sampled".into()));
    }

    // chord-arc: closed form on a u-grid plus sampled sector
    // round-trips; u = 1−r is the arc length over 2π
    let mut lower = f64::INFINITY; // 2sin(πu) − 4u ≥ 0
    let mut upper = f64::INFINITY; // 2πu − 2sin(πu) ≥ 0
    for i in 0..200 {
        let u = 0.5 * (i + 1) as f64 / 200.0;
        let chord = 2.0 * (PI * u).sin();
        lower = lower.min(chord - 4.0 * u);
        upper = upper.min(TAU * u - chord);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
    for _ in 0..64 {
        let a = rng.gen_range(0.0..TAU);
        let x = rng.gen_range(0.0..TAU);
        let Ok(sec) = arc_to_center(a, x) else { continue };
        let u = 1.0 - sec.r;
        let chord = unit(a).dist(unit(x));
        lower = lower.min(chord - 4.0 * u);
        upper = upper.min(TAU * u - chord);
    }
    let chord_arc_pass = lower >= -1e-9 && upper >= -1e-9;

    let pass = worst_log_margin <= 0.0 && chord_arc_pass && eta_fit.pass;
    Ok(Thm47Report {
        t,
        constants,
        modulus,
        eta_fit,
        worst_log_margin,
        worst_bin_k,
        bins_checked,
        chord_arc_lower_margin: lower,
        chord_arc_upper_margin: upper,
        chord_arc_pass,
        pass,
    })
}
