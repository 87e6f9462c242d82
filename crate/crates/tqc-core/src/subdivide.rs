//! Greedy subdivision of a closed curve into diameter-controlled
//! pieces, the hierarchical subarc tree built on top of it, and the
//! theoretical piece-count / distortion constants.
//!
//! The theoretical constants grow astronomically (`R` has billions of
//! binary digits already for moderate `p`), so they are computed and
//! reported in log₂ space. The tree itself uses a small practical
//! branching factor and is checked empirically against the dyadic decay
//! and adjacent-ratio properties instead.

use crate::curve::{ArcSpan, ClosedCurve};
use crate::error::{Error, Result};
use crate::geom::IncrementalHull;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A value stored as its base-2 logarithm. The `log2` flag travels with
/// serialized reports so consumers cannot misread the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Log2 {
    pub log2: bool,
    pub value: f64,
}

impl Log2 {
    pub fn new(value: f64) -> Self {
        Log2 { log2: true, value }
    }
}

/// An integer that may exceed any fixed-width type; exact while it fits
/// into `u128`, log₂ beyond that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BigValue {
    Exact(u128),
    Log(Log2),
}

impl BigValue {
    pub fn log2(&self) -> f64 {
        match self {
            BigValue::Exact(v) => (*v as f64).log2(),
            BigValue::Log(l) => l.value,
        }
    }

    pub fn exact(&self) -> Option<u128> {
        match self {
            BigValue::Exact(v) => Some(*v),
            BigValue::Log(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubdivisionConstants {
    #[serde(rename = "C")]
    pub c_turn: f64,
    pub t: f64,
    pub eps: f64,
    /// Piece-count bound ⌈h((4C/ε)^{1/t})⌉; integral, exact below 2^53.
    pub p: f64,
    pub delta: Log2,
    pub h_alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeConstants {
    pub p: u64,
    pub mu: Log2,
    pub m: u32,
    pub n: u128,
    #[serde(rename = "N_alphabet")]
    pub n_alphabet: BigValue,
    pub c: Log2,
    #[serde(rename = "log2_R")]
    pub log2_r: f64,
}

/// `h(α) = 4(α√2 + 1)²`, the piece-count function.
pub fn h(alpha: f64) -> f64 {
    4.0 * (alpha * std::f64::consts::SQRT_2 + 1.0).powi(2)
}

/// Piece-count bound `p`, fragment scale `δ = 2^{-p-1}·ε`, and the
/// value of `h` they come from.
pub fn theoretical_constants(c_turn: f64, t: f64, eps: f64) -> Result<SubdivisionConstants> {
    if !(c_turn >= 1.0) {
        return Err(Error::InvalidArgument(format!("turning constant {c_turn} below 1")));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent {t} outside (0, 1]")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0, 1)")));
    }
    let alpha = (4.0 * c_turn / eps).powf(1.0 / t);
    let h_alpha = h(alpha);
    let p = h_alpha.ceil();
    Ok(SubdivisionConstants {
        c_turn,
        t,
        eps,
        p,
        delta: Log2::new(-(p + 1.0) + eps.log2()),
        h_alpha,
    })
}

/// Alphabet-size and distortion constants for piece count `p`:
/// μ = 2^{p+1}; m starts at 2 with n = ⌈m·log₂μ⌉ and both double until
/// 4n + 3 ≤ p^m; N = p^m + 2n(p−1); c = μ^{m+2}; R = 8N·c^{5N}·C.
pub fn tree_constants(p: u64, c_turn: f64) -> Result<TreeConstants> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("piece count {p} below 2")));
    }
    if !(c_turn > 0.0) {
        return Err(Error::InvalidArgument("turning constant must be positive".into()));
    }
    let log2_mu = (p + 1) as f64;
    let mut m: u32 = 2;
    // n = ⌈m·log₂μ⌉ = m(p+1) exactly; doubling m keeps the identity
    let mut n: u128 = 2 * (p as u128 + 1);
    loop {
        let fits = match (p as u128).checked_pow(m) {
            Some(pm) => 4 * n + 3 <= pm,
            None => true, // p^m already beyond u128 dwarfs 4n+3
        };
        if fits {
            break;
        }
        m = m
            .checked_mul(2)
            .ok_or_else(|| Error::InvalidArgument("doubling for m diverged".into()))?;
        n *= 2;
    }
    debug_assert!(n as f64 >= m as f64 * log2_mu); // 2ⁿ ≥ μ^m

    let pm = (p as u128).checked_pow(m);
    let n_alphabet = match pm.and_then(|pm| {
        let tail = 2u128.checked_mul(n)?.checked_mul(p as u128 - 1)?;
        pm.checked_add(tail)
    }) {
        Some(exact) => BigValue::Exact(exact),
        None => {
            // log₂(p^m + 2n(p−1)) via a two-term log-sum
            let a = m as f64 * (p as f64).log2();
            let b = 1.0 + (n as f64).log2() + ((p - 1) as f64).log2();
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            BigValue::Log(Log2::new(hi + (1.0 + (lo - hi).exp2()).log2()))
        }
    };
    let log2_c = log2_mu * (m as f64 + 2.0);
    let n_f = match n_alphabet {
        BigValue::Exact(v) => v as f64,
        BigValue::Log(l) => l.value.exp2(),
    };
    let log2_r = 3.0 + n_alphabet.log2() + 5.0 * n_f * log2_c + c_turn.log2();
    Ok(TreeConstants {
        p,
        mu: Log2::new(log2_mu),
        m,
        n,
        n_alphabet,
        c: Log2::new(log2_c),
        log2_r,
    })
}

/// Longest polyline edge; the resolution floor for subdivision.
fn max_edge(curve: &ClosedCurve) -> f64 {
    let n = curve.len();
    (0..n).map(|i| curve.vertex(i).dist(curve.vertex(i + 1))).fold(0.0, f64::max)
}

/// Greedy cover of the curve by consecutive subarcs: each piece is the
/// maximal initial subarc whose vertices stay in the closed ball of
/// radius `eps/4` about the piece's start vertex; a trailing fragment
/// of diameter below `eps/8` merges into the piece before it. Every
/// returned diameter lies in `[eps/8, eps]`.
///
/// Requires unit diameter and polyline resolution `max edge ≤ eps/8`;
/// the window guarantee breaks below that resolution, so it is an
/// error rather than a silent degradation.
pub fn greedy_subdivide(curve: &ClosedCurve, eps: f64, start: usize) -> Result<Vec<ArcSpan>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0, 1)")));
    }
    let diam = curve.curve_diameter();
    if (diam - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "curve diameter {diam} is not 1; normalize first"
        )));
    }
    let n = curve.len();
    let longest = max_edge(curve);
    if longest > eps / 8.0 {
        return Err(Error::InvalidArgument(format!(
            "resolution too coarse: longest edge {longest} exceeds eps/8 = {}",
            eps / 8.0
        )));
    }
    let start = start % n;
    let radius = eps / 4.0;
    let mut spans: Vec<ArcSpan> = Vec::new();
    let mut cur = start;
    let mut consumed = 0usize;
    while consumed < n {
        let center = curve.vertex(cur);
        let mut k = 0usize;
        while consumed + k < n && center.dist(curve.vertex(cur + k + 1)) <= radius {
            k += 1;
        }
        // an edge is at most eps/8 < radius, so the first step always fits
        debug_assert!(k >= 1);
        spans.push(ArcSpan::positive(cur, (cur + k) % n));
        cur = (cur + k) % n;
        consumed += k;
    }
    if spans.len() >= 2 {
        let last = *spans.last().unwrap();
        if curve.arc_diameter(last) < eps / 8.0 {
            spans.pop();
            let prev = spans.last_mut().unwrap();
            *prev = ArcSpan::positive(prev.start, last.end);
        }
    }
    if spans.len() < 2 {
        return Err(Error::InvalidArgument("eps too close to the curve diameter".into()));
    }
    Ok(spans)
}

/// Diameters of the spans formed by cutting `span` at each interior
/// vertex: `fw[i]` covers the first `i` edges, `bw[i]` the rest.
fn split_profiles(curve: &ClosedCurve, span: ArcSpan) -> (Vec<f64>, Vec<f64>) {
    let n = curve.len();
    let e = span.edge_count(n);
    let mut fw = vec![0.0f64; e + 1];
    let mut hull = IncrementalHull::new(curve.vertex(span.start));
    for i in 1..=e {
        hull.push(curve.vertex(span.start + i));
        fw[i] = hull.diameter();
    }
    let mut bw = vec![0.0f64; e + 1];
    let mut hull = IncrementalHull::new(curve.vertex(span.start + e));
    for i in (0..e).rev() {
        hull.push(curve.vertex(span.start + i));
        bw[i] = hull.diameter();
    }
    (fw, bw)
}

/// Cut at the interior vertex minimizing the larger side diameter.
/// Near-ties (relative 1e-12) resolve toward edge-count balance, then
/// to the earliest vertex, so round spans split evenly instead of
/// shaving single edges.
fn split_balanced(curve: &ClosedCurve, span: ArcSpan) -> Result<(ArcSpan, ArcSpan)> {
    let n = curve.len();
    let e = span.edge_count(n);
    if e < 2 {
        return Err(Error::InvalidArgument("span has no interior vertex to split at".into()));
    }
    let (fw, bw) = split_profiles(curve, span);
    let mut best: Option<(f64, usize, usize)> = None; // (worst, imbalance, k)
    for k in 1..e {
        let worst = fw[k].max(bw[k]);
        let imbalance = (2 * k).abs_diff(e);
        let better = match best {
            None => true,
            Some((bw0, bi, _)) => {
                worst < bw0 * (1.0 - 1e-12) || (worst <= bw0 * (1.0 + 1e-12) && imbalance < bi)
            }
        };
        if better {
            best = Some((worst, imbalance, k));
        }
    }
    let k = best.unwrap().2;
    let mid = (span.start + k) % n;
    Ok((ArcSpan::positive(span.start, mid), ArcSpan::positive(mid, span.end)))
}

/// Grows the piece list to exactly `target` by repeatedly splitting the
/// largest-diameter piece at its balancing vertex (ties: earliest
/// piece). Pieces keep their cyclic order.
pub fn equalize_count(
    curve: &ClosedCurve,
    pieces: &[ArcSpan],
    target: usize,
) -> Result<Vec<ArcSpan>> {
    if pieces.is_empty() {
        return Err(Error::InvalidArgument("no pieces to equalize".into()));
    }
    if target < pieces.len() {
        return Err(Error::InvalidArgument(format!(
            "target {target} below current count {}",
            pieces.len()
        )));
    }
    let n = curve.len();
    let mut out = pieces.to_vec();
    let mut diams: Vec<f64> = out.iter().map(|s| curve.arc_diameter(*s)).collect();
    while out.len() < target {
        let mut pick: Option<usize> = None;
        for (i, s) in out.iter().enumerate() {
            if s.edge_count(n) >= 2 && pick.is_none_or(|b| diams[i] > diams[b]) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else {
            return Err(Error::InvalidArgument(
                "every piece is a single edge; cannot reach target".into(),
            ));
        };
        let (l, r) = split_balanced(curve, out[i])?;
        out[i] = l;
        out.insert(i + 1, r);
        diams[i] = curve.arc_diameter(l);
        diams.insert(i + 1, curve.arc_diameter(r));
    }
    Ok(out)
}

/// Word-indexed hierarchy of subarcs. Level ℓ holds `branching^ℓ` spans
/// in cyclic order; the implicit root is the whole curve. A word is a
/// sequence of symbols in `1..=branching`, level = word length.
#[derive(Debug, Clone)]
pub struct SubarcTree {
    curve: ClosedCurve,
    branching: usize,
    depth: usize,
    levels: Vec<Vec<ArcSpan>>,
}

/// JSON shape: flat node list `{"word": [...], "start": i, "end": j}`.
#[derive(Serialize, Deserialize)]
struct TreeJson {
    branching: usize,
    depth: usize,
    nodes: Vec<NodeJson>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    word: Vec<usize>,
    start: usize,
    end: usize,
}

/// Splits every node's span into `branching` consecutive children by
/// largest-first balancing; the root split is anchored at vertex 0.
pub fn build_tree(curve: &ClosedCurve, branching: usize, depth: usize) -> Result<SubarcTree> {
    if branching < 2 {
        return Err(Error::InvalidArgument("branching must be at least 2".into()));
    }
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let n = curve.len();
    let leaves = (branching as u64)
        .checked_pow(depth as u32)
        .filter(|&l| l <= n as u64)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "branching^depth = {branching}^{depth} exceeds vertex count {n}"
            ))
        })?;
    debug_assert!(leaves >= 2);

    // Root split: cut the full curve at vertex 0 and a partner vertex.
    // Minimizing the larger side diameter alone is degenerate on round
    // shapes (any 2-cut of a circle leaves both sides at full
    // diameter), so near-ties fall back to edge-count balance.
    let fw = crate::turning::prefix_diameters(curve, 0);
    let mut best: Option<(f64, usize, usize)> = None; // (worst, imbalance, k)
    for k in 1..n {
        let worst = fw[k].max(span_diam_rev(curve, k));
        let imbalance = (2 * k).abs_diff(n);
        let better = match best {
            None => true,
            Some((bw, bi, _)) => {
                worst < bw * (1.0 - 1e-12) || (worst <= bw * (1.0 + 1e-12) && imbalance < bi)
            }
        };
        if better {
            best = Some((worst, imbalance, k));
        }
    }
    let cut = best.unwrap().2;
    let first = vec![ArcSpan::positive(0, cut), ArcSpan::positive(cut, 0)];
    let mut levels = vec![equalize_count(curve, &first, branching)?];
    for _ in 1..depth {
        let prev = levels.last().unwrap();
        let next: Vec<Vec<ArcSpan>> = prev
            .par_iter()
            .map(|s| equalize_count(curve, std::slice::from_ref(s), branching))
            .collect::<Result<_>>()?;
        levels.push(next.into_iter().flatten().collect());
    }
    Ok(SubarcTree { curve: curve.clone(), branching, depth, levels })
}

fn span_diam_rev(curve: &ClosedCurve, k: usize) -> f64 {
    curve.arc_diameter(ArcSpan::positive(k, 0))
}

impl SubarcTree {
    pub fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Spans at level `level` (1-based), in cyclic order.
    pub fn level(&self, level: usize) -> &[ArcSpan] {
        &self.levels[level - 1]
    }

    pub fn leaves(&self) -> &[ArcSpan] {
        self.level(self.depth)
    }

    /// Span of a word over symbols `1..=branching`; `None` if the word
    /// is malformed or too long. The empty word is the whole curve and
    /// has no single span representation, so it is rejected too.
    pub fn node(&self, word: &[usize]) -> Option<ArcSpan> {
        if word.is_empty() || word.len() > self.depth {
            return None;
        }
        let mut idx = 0usize;
        for &s in word {
            if s < 1 || s > self.branching {
                return None;
            }
            idx = idx * self.branching + (s - 1);
        }
        Some(self.levels[word.len() - 1][idx])
    }

    /// Word of the `idx`-th span at `level`.
    pub fn word_of(&self, level: usize, idx: usize) -> Vec<usize> {
        let mut word = vec![0usize; level];
        let mut rem = idx;
        for slot in word.iter_mut().rev() {
            *slot = rem % self.branching + 1;
            rem /= self.branching;
        }
        word
    }

    pub fn to_json(&self) -> Result<String> {
        let mut nodes = Vec::new();
        for (li, spans) in self.levels.iter().enumerate() {
            for (i, s) in spans.iter().enumerate() {
                nodes.push(NodeJson { word: self.word_of(li + 1, i), start: s.start, end: s.end });
            }
        }
        Ok(serde_json::to_string_pretty(&TreeJson {
            branching: self.branching,
            depth: self.depth,
            nodes,
        })?)
    }

    /// Rebuilds a tree from serialized nodes, revalidating the
    /// partition invariants against `curve`.
    pub fn from_json(curve: &ClosedCurve, json: &str) -> Result<SubarcTree> {
        let parsed: TreeJson = serde_json::from_str(json)?;
        if parsed.branching < 2 || parsed.depth < 1 {
            return Err(Error::Validation("malformed tree header".into()));
        }
        let mut levels: Vec<Vec<Option<ArcSpan>>> = (1..=parsed.depth)
            .map(|l| vec![None; parsed.branching.pow(l as u32)])
            .collect();
        for node in &parsed.nodes {
            let l = node.word.len();
            if l == 0 || l > parsed.depth {
                return Err(Error::Validation(format!("word {:?} out of range", node.word)));
            }
            let mut idx = 0usize;
            for &s in &node.word {
                if s < 1 || s > parsed.branching {
                    return Err(Error::Validation(format!("bad symbol in word {:?}", node.word)));
                }
                idx = idx * parsed.branching + (s - 1);
            }
            if node.start >= curve.len() || node.end >= curve.len() {
                return Err(Error::Validation("span index out of range".into()));
            }
            levels[l - 1][idx] = Some(ArcSpan::positive(node.start, node.end));
        }
        let levels: Vec<Vec<ArcSpan>> = levels
            .into_iter()
            .map(|lv| {
                lv.into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Validation("missing tree nodes".into()))
            })
            .collect::<Result<_>>()?;
        let tree =
            SubarcTree { curve: curve.clone(), branching: parsed.branching, depth: parsed.depth, levels };
        tree.check_partition()?;
        Ok(tree)
    }

    /// Children must concatenate exactly to their parent's span, and
    /// every level must wind once around the curve.
    pub fn check_partition(&self) -> Result<()> {
        let n = self.curve.len();
        for (li, spans) in self.levels.iter().enumerate() {
            let total: usize = spans.iter().map(|s| s.edge_count(n)).sum();
            if total != n {
                return Err(Error::Validation(format!("level {} does not cover once", li + 1)));
            }
            for (i, s) in spans.iter().enumerate() {
                let next = spans[(i + 1) % spans.len()];
                if s.end != next.start {
                    return Err(Error::Validation(format!(
                        "level {} spans {} and {} not consecutive",
                        li + 1,
                        i,
                        (i + 1) % spans.len()
                    )));
                }
            }
            if li > 0 {
                let parents = &self.levels[li - 1];
                for (pi, p) in parents.iter().enumerate() {
                    let kids = &spans[pi * self.branching..(pi + 1) * self.branching];
                    if kids[0].start != p.start || kids[self.branching - 1].end != p.end {
                        return Err(Error::Validation(format!(
                            "children of level-{} node {} do not span their parent",
                            li, pi
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeCheckReport {
    /// max over nodes of diam(Γ_w)·2^{ℓ(w)} / diam(Γ)
    pub prop3_ratio: f64,
    pub prop3_word: Vec<usize>,
    /// max diameter ratio over same-level cyclically adjacent pairs
    pub prop4_ratio: f64,
    pub prop4_level: usize,
    pub prop4_index: usize,
    pub prop3_threshold: f64,
    pub prop4_threshold: f64,
    pub prop3_pass: bool,
    pub prop4_pass: bool,
}

/// Measures the dyadic-decay and adjacent-ratio properties of a tree
/// and compares them against caller-chosen thresholds.
pub fn verify_tree(tree: &SubarcTree, prop3_threshold: f64, prop4_threshold: f64) -> TreeCheckReport {
    let curve = tree.curve();
    let diam = curve.curve_diameter();
    let mut prop3 = (f64::NEG_INFINITY, Vec::new());
    let mut prop4 = (f64::NEG_INFINITY, 0usize, 0usize);
    for level in 1..=tree.depth() {
        let spans = tree.level(level);
        let diams: Vec<f64> = spans.par_iter().map(|s| curve.arc_diameter(*s)).collect();
        let scale = (level as f64).exp2() / diam;
        for (i, d) in diams.iter().enumerate() {
            let r = d * scale;
            if r > prop3.0 {
                prop3 = (r, tree.word_of(level, i));
            }
        }
        for i in 0..diams.len() {
            let (a, b) = (diams[i], diams[(i + 1) % diams.len()]);
            let r = (a / b).max(b / a);
            if r > prop4.0 {
                prop4 = (r, level, i);
            }
        }
    }
    TreeCheckReport {
        prop3_ratio: prop3.0,
        prop3_word: prop3.1,
        prop4_ratio: prop4.0,
        prop4_level: prop4.1,
        prop4_index: prop4.2,
        prop3_threshold,
        prop4_threshold,
        prop3_pass: prop3.0 <= prop3_threshold,
        prop4_pass: prop4.0 <= prop4_threshold,
    }
}
