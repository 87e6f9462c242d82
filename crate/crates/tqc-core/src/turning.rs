//! Turning statistics: how subarc diameters scale with chord lengths.
//!
//! For vertex pair `(i, j)` the measured quantity is
//! `diam Γ(i, j) / |v_i - v_j|^t`, where `Γ(i, j)` is the
//! smaller-diameter side. The supremum over pairs is the turning
//! constant `C*(t)`; a log-log least-squares fit of diameter against
//! chord estimates the exponent itself.
//!
//! A full pair scan runs up to [`FULL_SCAN_LIMIT`] vertices; larger
//! curves fall back to dyadic index separations plus seeded uniform
//! pairs. Per-anchor work is parallel, but merges run sequentially in
//! anchor order, so results never depend on the thread count.

use crate::curve::{ClosedCurve, Point};
use crate::error::{Error, Result};
use crate::geom::IncrementalHull;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest vertex count that still gets the exhaustive pair scan.
pub const FULL_SCAN_LIMIT: usize = 4096;

/// Uniform random pairs drawn when sampling kicks in.
const UNIFORM_PAIRS: usize = 2_000_000;

/// Chords below this are excluded from ratios and counted.
pub const MIN_DENOMINATOR: f64 = 1e-14;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurningReport {
    pub t: f64,
    #[serde(rename = "C_star")]
    pub c_star: f64,
    /// Index pair realizing `C_star`; ties resolve to the smallest pair.
    pub witness: [usize; 2],
    /// Evaluated pairs (excluded ones not included).
    pub pairs: u64,
    /// Pairs dropped for chord below [`MIN_DENOMINATOR`].
    pub excluded: u64,
    pub strategy: ScanStrategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_t: Option<f64>,
    #[serde(rename = "fit_C", skip_serializing_if = "Option::is_none")]
    pub fit_c: Option<f64>,
    /// RMS residual of the log-log fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanStrategy {
    Full,
    Stratified,
}

/// Which vertex pairs a fit admits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PairFilter {
    All,
    /// Chord length at most the bound.
    MaxChord(f64),
    /// Pairs whose smaller subarc passes through the vertex nearest
    /// `focus`, with chord at most `max_chord`, and whose endpoints sit
    /// within `max_index_skew` of symmetric index distance from that
    /// vertex. Skew 0 admits exactly the symmetric probe pairs.
    Straddling { focus: Point, max_chord: f64, max_index_skew: usize },
}

/// Diameters of growing prefixes from `anchor` in the positive
/// direction. Entry `m` covers vertices `anchor ..= anchor + m`; entry 0
/// is 0 and entry 1 the first edge length. Exact over vertex sets.
pub fn prefix_diameters(curve: &ClosedCurve, anchor: usize) -> Vec<f64> {
    let n = curve.len();
    let mut out = vec![0.0; n];
    let mut hull = IncrementalHull::new(curve.vertex(anchor));
    for (m, slot) in out.iter_mut().enumerate().skip(1) {
        hull.push(curve.vertex(anchor + m));
        *slot = hull.diameter();
    }
    out
}

/// Turning constant `C*(t)` with witness. `seed` drives pair sampling
/// for curves above [`FULL_SCAN_LIMIT`] and is ignored below it.
pub fn turning_constant(curve: &ClosedCurve, t: f64, seed: u64) -> Result<TurningReport> {
    validate_t(t)?;
    check_distinct_vertices(curve)?;
    let scan = scan_pairs(curve, t, seed, &PairFilter::All, false)?;
    Ok(scan.report(t, None))
}

/// Least-squares exponent fit over the admitted pairs, together with the
/// turning statistics of the same pair set. Requires at least 50
/// admitted pairs; `fit_t` is clipped to `(0, 1.2]`.
pub fn exponent_fit(
    curve: &ClosedCurve,
    t: f64,
    filter: &PairFilter,
    seed: u64,
) -> Result<TurningReport> {
    validate_t(t)?;
    check_distinct_vertices(curve)?;
    if let PairFilter::Straddling { max_chord, .. } | PairFilter::MaxChord(max_chord) = filter {
        if !(*max_chord > 0.0) {
            return Err(Error::InvalidArgument("chord bound must be positive".into()));
        }
    }
    let scan = scan_pairs(curve, t, seed, filter, true)?;
    if scan.included < 50 {
        return Err(Error::InvalidArgument(format!(
            "exponent fit needs at least 50 admitted pairs, got {}",
            scan.included
        )));
    }
    let fit = scan.fit();
    Ok(scan.report(t, Some(fit)))
}

fn validate_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("turning exponent {t} outside (0, 1]")));
    }
    Ok(())
}

fn check_distinct_vertices(curve: &ClosedCurve) -> Result<()> {
    let mut idx: Vec<usize> = (0..curve.len()).collect();
    idx.sort_by(|&a, &b| {
        let (p, q) = (curve.vertex(a), curve.vertex(b));
        p.x.partial_cmp(&q.x).unwrap().then(p.y.partial_cmp(&q.y).unwrap())
    });
    for w in idx.windows(2) {
        if curve.vertex(w[0]) == curve.vertex(w[1]) {
            return Err(Error::InvalidCurve(format!(
                "coincident vertices {} and {}",
                w[0].min(w[1]),
                w[0].max(w[1])
            )));
        }
    }
    Ok(())
}

/// Accumulated scan state. Log sums feed the closed-form OLS solution;
/// they are only filled when a fit was requested.
struct ScanOutcome {
    best: f64,
    witness: (usize, usize),
    included: u64,
    excluded: u64,
    strategy: ScanStrategy,
    sums: LogSums,
}

#[derive(Default, Clone, Copy)]
struct LogSums {
    n: f64,
    su: f64,
    sv: f64,
    suu: f64,
    suv: f64,
    svv: f64,
}

impl LogSums {
    #[inline]
    fn add(&mut self, u: f64, v: f64) {
        self.n += 1.0;
        self.su += u;
        self.sv += v;
        self.suu += u * u;
        self.suv += u * v;
        self.svv += v * v;
    }

    fn merge(&mut self, o: &LogSums) {
        self.n += o.n;
        self.su += o.su;
        self.sv += o.sv;
        self.suu += o.suu;
        self.suv += o.suv;
        self.svv += o.svv;
    }
}

struct Fit {
    t: f64,
    c: f64,
    residual: f64,
}

impl ScanOutcome {
    fn report(&self, t: f64, fit: Option<Fit>) -> TurningReport {
        TurningReport {
            t,
            c_star: self.best,
            witness: [self.witness.0, self.witness.1],
            pairs: self.included,
            excluded: self.excluded,
            strategy: self.strategy,
            fit_t: fit.as_ref().map(|f| f.t),
            fit_c: fit.as_ref().map(|f| f.c),
            residual: fit.as_ref().map(|f| f.residual),
        }
    }

    /// OLS of `v = log diam` against `u = log chord`:
    /// `v ~ log C + t u`. RSS comes from the standard identity
    /// `RSS = Svv - A Sv - B Suv`.
    fn fit(&self) -> Fit {
        let s = &self.sums;
        let det = s.n * s.suu - s.su * s.su;
        let slope = (s.n * s.suv - s.su * s.sv) / det;
        let intercept = (s.sv - slope * s.su) / s.n;
        let rss = (s.svv - intercept * s.sv - slope * s.suv).max(0.0);
        Fit {
            t: slope.clamp(1e-9, 1.2),
            c: intercept.exp(),
            residual: (rss / s.n).sqrt(),
        }
    }
}

struct AnchorAcc {
    best: f64,
    witness: (usize, usize),
    included: u64,
    excluded: u64,
    sums: LogSums,
}

impl AnchorAcc {
    fn new() -> Self {
        AnchorAcc {
            best: f64::NEG_INFINITY,
            witness: (usize::MAX, usize::MAX),
            included: 0,
            excluded: 0,
            sums: LogSums::default(),
        }
    }

    #[inline]
    fn take(&mut self, i: usize, j: usize, chord: f64, diam: f64, t: f64, want_fit: bool) {
        if chord < MIN_DENOMINATOR {
            self.excluded += 1;
            return;
        }
        self.included += 1;
        let ratio = if t == 1.0 { diam / chord } else { diam / chord.powf(t) };
        if ratio > self.best {
            self.best = ratio;
            self.witness = (i, j);
        }
        if want_fit && diam > 0.0 {
            self.sums.add(chord.ln(), diam.ln());
        }
    }
}

fn scan_pairs(
    curve: &ClosedCurve,
    t: f64,
    seed: u64,
    filter: &PairFilter,
    want_fit: bool,
) -> Result<ScanOutcome> {
    let n = curve.len();
    let focus_vertex = match filter {
        PairFilter::Straddling { focus, .. } => Some(nearest_vertex(curve, *focus)),
        _ => None,
    };
    let admit = |i: usize, j: usize, chord: f64, da: f64, db: f64| -> bool {
        match filter {
            PairFilter::All => true,
            PairFilter::MaxChord(c) => chord <= *c,
            PairFilter::Straddling { max_chord, max_index_skew, .. } => {
                if chord > *max_chord {
                    return false;
                }
                let v = focus_vertex.unwrap();
                let m = j - i;
                // side A = positive span i..=j, side B = the complement
                let smaller_is_a = da < db || (da == db && m <= n - m);
                let gap_a = (v + n - i) % n;
                let in_a = gap_a <= m;
                if smaller_is_a != in_a {
                    return false;
                }
                let gi = cyclic_gap(i, v, n);
                let gj = cyclic_gap(j, v, n);
                gi.abs_diff(gj) <= *max_index_skew
            }
        }
    };

    let per_anchor: Vec<AnchorAcc> = if n <= FULL_SCAN_LIMIT {
        let rows = prefix_matrix(curve);
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = AnchorAcc::new();
                let vi = curve.vertex(i);
                for j in i + 1..n {
                    let m = j - i;
                    let da = rows[i * n + m];
                    let db = rows[j * n + (n - m)];
                    let chord = vi.dist(curve.vertex(j));
                    if admit(i, j, chord, da, db) {
                        acc.take(i, j, chord, da.min(db), t, want_fit);
                    }
                }
                acc
            })
            .collect()
    } else {
        let pairs = stratified_pairs(n, seed);
        let sides = pair_side_diameters(curve, &pairs);
        pairs
            .par_chunks(4096)
            .enumerate()
            .map(|(chunk_idx, chunk)| {
                let base = chunk_idx * 4096;
                let mut acc = AnchorAcc::new();
                for (k, &(i, j)) in chunk.iter().enumerate() {
                    let s = base + k;
                    let (da, db) = (sides[2 * s], sides[2 * s + 1]);
                    let chord = curve.vertex(i).dist(curve.vertex(j));
                    if admit(i, j, chord, da, db) {
                        acc.take(i, j, chord, da.min(db), t, want_fit);
                    }
                }
                acc
            })
            .collect()
    };

    // sequential merge in anchor order keeps results thread-count free
    let mut best = f64::NEG_INFINITY;
    let mut witness = (0usize, 0usize);
    let mut included = 0u64;
    let mut excluded = 0u64;
    let mut sums = LogSums::default();
    for acc in per_anchor.iter() {
        if acc.best > best || (acc.best == best && acc.witness < witness) {
            best = acc.best;
            witness = acc.witness;
        }
        included += acc.included;
        excluded += acc.excluded;
        sums.merge(&acc.sums);
    }
    if included == 0 {
        return Err(Error::InvalidArgument("no pairs admitted by the filter".into()));
    }
    Ok(ScanOutcome {
        best,
        witness,
        included,
        excluded,
        strategy: if n <= FULL_SCAN_LIMIT { ScanStrategy::Full } else { ScanStrategy::Stratified },
        sums,
    })
}

fn nearest_vertex(curve: &ClosedCurve, p: Point) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for (i, v) in curve.vertices().iter().enumerate() {
        let d = v.dist2(p);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

#[inline]
fn cyclic_gap(i: usize, j: usize, n: usize) -> usize {
    let d = (i + n - j) % n;
    d.min(n - d)
}

/// Row-major matrix of prefix diameters: entry `(i, m)` is the diameter
/// of the span from `i` over `m` edges forward.
fn prefix_matrix(curve: &ClosedCurve) -> Vec<f64> {
    let n = curve.len();
    let mut rows = vec![0.0f64; n * n];
    rows.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let mut hull = IncrementalHull::new(curve.vertex(i));
        for (m, slot) in row.iter_mut().enumerate().skip(1) {
            hull.push(curve.vertex(i + m));
            *slot = hull.diameter();
        }
    });
    rows
}

/// Dyadic separations from every anchor plus seeded uniform pairs,
/// deduplicated. Used above [`FULL_SCAN_LIMIT`].
fn stratified_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        let mut g = 1usize;
        while g <= n / 2 {
            let j = (i + g) % n;
            pairs.push((i.min(j), i.max(j)));
            g *= 2;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7143_a1b2_c3d4_e5f6);
    let target = UNIFORM_PAIRS.min(n * (n - 1) / 2);
    for _ in 0..target {
        let i = rng.gen_range(0..n);
        let g = rng.gen_range(1..n);
        let j = (i + g) % n;
        pairs.push((i.min(j), i.max(j)));
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Both side diameters for each canonical pair `(i, j)`: slot `2s` holds
/// the positive span `i -> j`, slot `2s + 1` the complement.
fn pair_side_diameters(curve: &ClosedCurve, pairs: &[(usize, usize)]) -> Vec<f64> {
    let n = curve.len();
    let mut queries: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for (s, &(i, j)) in pairs.iter().enumerate() {
        let m = j - i;
        queries[i].push((m, 2 * s as u64));
        queries[j].push((n - m, 2 * s as u64 + 1));
    }
    for q in queries.iter_mut() {
        q.sort_unstable();
    }
    let per_anchor: Vec<Vec<(u64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let q = &queries[i];
            if q.is_empty() {
                return Vec::new();
            }
            let mut out = Vec::with_capacity(q.len());
            let mut hull = IncrementalHull::new(curve.vertex(i));
            let mut qi = 0;
            for m in 1..n {
                hull.push(curve.vertex(i + m));
                while qi < q.len() && q[qi].0 == m {
                    out.push((q[qi].1, hull.diameter()));
                    qi += 1;
                }
                if qi == q.len() {
                    break;
                }
            }
            out
        })
        .collect();
    let mut side = vec![0.0f64; 2 * pairs.len()];
    for chunk in per_anchor {
        for (slot, d) in chunk {
            side[slot as usize] = d;
        }
    }
    side
}
