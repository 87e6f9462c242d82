//! Command-line driver for the curve analysis stack: generate sample
//! curves, run turning/subdivision/parametrization/modulus analyses,
//! fit conformal maps, and execute the named verification scenarios.
//!
//! Every invocation prints one JSON report envelope to stdout (and
//! optionally writes it to `--out`); artifacts such as curves, maps,
//! CSV tables, and SVG renderings go to their own flags. Exit code 0
//! means success, 2 a validation failure (a measured quantity broke a
//! required bound), 1 a usage error (bad flags or malformed input).

mod report;
mod scenarios;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tqc_core::boundary::{arclength_param, build_boundary_map, BoundaryMap};
use tqc_core::conformal::{
    default_polar_grid, koebe_check, lemma_constants_report, zipper_fit,
    ConformalConstantsReport, DiskMap, KoebeReport,
};
use tqc_core::generate::{adaptive_cusp_sampling, generate, CurveSpec};
use tqc_core::qs::{
    eta_shape_fit, holder_constants, m_condition, psi_bound_check, qs_modulus, rho_bins_csv,
    weak_qs_constant, EtaFit, HolderReport, MCondition, PsiReport, QsReport,
};
use tqc_core::subdivide::{build_tree, equalize_count, greedy_subdivide, verify_tree, TreeCheckReport};
use tqc_core::turning::{exponent_fit, turning_constant, PairFilter, TurningReport};
use tqc_core::{ClosedCurve, Point};

use report::{Envelope, Inputs};

/// Failures sorted by exit code: usage errors exit 1, validation
/// failures exit 2. Everything the core marks `Validation` stays a
/// validation failure; all other core errors are bad input.
pub enum Failure {
    Usage(String),
    Validation(String),
}

impl From<tqc_core::Error> for Failure {
    fn from(e: tqc_core::Error) -> Failure {
        match e {
            tqc_core::Error::Validation(msg) => Failure::Validation(msg),
            other => Failure::Usage(other.to_string()),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

#[derive(Parser)]
#[command(
    name = "tqc",
    version,
    about = "turning, subdivision, and conformal-map analyses of closed curves"
)]
struct Cli {
    /// Worker threads (default: TQC_THREADS, then all cores). The
    /// count changes wall time only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Generate a reference curve and write it as JSON
    Gen(GenArgs),
    /// Turning constant / exponent fit of a curve
    Turning(TurningArgs),
    /// Greedy diameter subdivision of a curve
    Subdivide(SubdivideArgs),
    /// Balanced subarc tree, partition checks, induced boundary map
    Tree(TreeArgs),
    /// Arclength parametrization and its weak constant
    Param(ParamArgs),
    /// Triple-scan statistics of a boundary map
    Qs(QsArgs),
    /// Conformal fit with distortion checks
    Conformal(ConformalArgs),
    /// Named verification scenarios
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Circle,
    Ellipse,
    Koch,
    Cusp,
    Perturbed,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected \"x,y\"")?;
    let x: f64 = x.trim().parse().map_err(|e| format!("x: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("y: {e}"))?;
    Ok(Point::new(x, y))
}

#[derive(Args)]
struct GenArgs {
    /// Curve family
    #[arg(long, value_enum)]
    shape: Shape,
    /// Vertex budget (circle, ellipse, cusp, perturbed)
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Subdivision level (koch)
    #[arg(long, default_value_t = 4)]
    level: u32,
    /// Contact-order exponent (cusp)
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    /// Semi-axes (ellipse)
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Radial noise amplitude (perturbed)
    #[arg(long, default_value_t = 0.1)]
    amplitude: f64,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Resample with spacing graded geometrically toward this point
    /// ("x,y" on the curve); requires --grade-ratio
    #[arg(long, value_parser = parse_point)]
    grade_focus: Option<Point>,
    /// Per-step grading factor in (0, 1)
    #[arg(long)]
    grade_ratio: Option<f64>,
    /// Curve JSON destination
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG rendering
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Report destination (report always also prints to stdout)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct TurningArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Turning exponent in (0, 1]
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Least-squares exponent fit over the admitted pairs
    #[arg(long)]
    fit: bool,
    /// Admit only pairs with chord at most this bound
    #[arg(long)]
    max_chord: Option<f64>,
    /// Straddling filter: admit pairs whose smaller subarc passes the
    /// vertex nearest this point ("x,y"); requires --max-chord
    #[arg(long, value_parser = parse_point)]
    straddle_focus: Option<Point>,
    /// Index-skew tolerance of the straddling filter
    #[arg(long, default_value_t = 2)]
    skew: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SubdivideArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Diameter cap; pieces land in [eps/8, eps] of the curve diameter
    #[arg(long)]
    eps: f64,
    /// Starting vertex of the first piece
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Grow the partition to exactly this many pieces
    #[arg(long)]
    equalize: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long)]
    curve: PathBuf,
    #[arg(long, default_value_t = 4)]
    branching: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Threshold for the per-level diameter decay ratio
    #[arg(long, default_value_t = 8.0)]
    prop3: f64,
    /// Threshold for the adjacent-piece diameter ratio
    #[arg(long, default_value_t = 16.0)]
    prop4: f64,
    /// Write the induced boundary map as JSON
    #[arg(long)]
    map_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Sample count of the parametrization
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Also measure the weak constant at this exponent
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Write the boundary map as JSON
    #[arg(long)]
    map_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum QsMode {
    /// Weak constant (k = 1 triples)
    Weak,
    /// Binned modulus ρ̂(k) with envelope fit
    Modulus,
    /// Three-point condition value
    Mcond,
    /// Bi-Hölder constants
    Holder,
    /// Small-k bound check (requires --r)
    Psi,
}

#[derive(Args)]
struct QsArgs {
    /// Curve the boundary map refers to
    #[arg(long)]
    curve: PathBuf,
    /// Boundary map JSON
    #[arg(long)]
    map: PathBuf,
    #[arg(long, value_enum, default_value_t = QsMode::Weak)]
    mode: QsMode,
    /// Exponent of the scan
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 28)]
    bins: usize,
    #[arg(long, default_value_t = 8.0)]
    k_max: f64,
    /// Measured weak constant (psi mode)
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Write the ρ̂ bins as CSV (modulus mode)
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConformalArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Interior normalization point ("x,y"; default: deepest interior
    /// grid point)
    #[arg(long, value_parser = parse_point)]
    center: Option<Point>,
    /// Also measure the distortion-constant report at this exponent
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Write the fitted map as JSON
    #[arg(long)]
    map_out: Option<PathBuf>,
    /// SVG of the curve with image grid overlay
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Scenario {
    /// Tree-built map: weak constant finite, stable under depth + 1
    Thm27,
    /// Image turning constant at most twice the weak constant
    Prop23,
    /// Full conformal pipeline: chord-arc, distortion constants,
    /// modulus domination
    Thm47,
    /// Small-k modulus bound on the tree-built map
    Thm51,
    /// Arclength parametrization weak constant at the cubed exponent
    Prop52,
    /// Harmonic-measure floor of the flanking arcs
    Cor35,
    /// Geodesic proximity bound: max hyperbolic gap at most ½·log π
    Cor34,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    scenario: Scenario,
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Exponent (required by thm47; defaults: 1 for thm27/prop23/thm51,
    /// ½ for prop52)
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    branching: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Triple budget of the modulus scan (thm47)
    #[arg(long, default_value_t = 2_000_000)]
    budget: usize,
    /// Parametrization sample count (prop52; default: vertex count)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version print to stdout and succeed; anything else
            // is a usage error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(f) = init_threads(cli.threads) {
        return fail(f);
    }
    match run(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    match f {
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Failure::Validation(msg) => {
            eprintln!("validation failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), Failure> {
    let count = match flag {
        Some(n) => Some(n),
        None => match std::env::var("TQC_THREADS") {
            Ok(raw) => Some(
                raw.parse()
                    .map_err(|e| usage(format!("TQC_THREADS={raw}: {e}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = count {
        if n == 0 {
            return Err(usage("thread count must be positive"));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(verb: Verb) -> Result<(), Failure> {
    match verb {
        Verb::Gen(args) => gen(args),
        Verb::Turning(args) => turning(args),
        Verb::Subdivide(args) => subdivide(args),
        Verb::Tree(args) => tree(args),
        Verb::Param(args) => param(args),
        Verb::Qs(args) => qs(args),
        Verb::Conformal(args) => conformal(args),
        Verb::Verify(args) => verify(args),
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    std::fs::write(path, content).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_curve(inputs: &mut Inputs, path: &Path) -> Result<ClosedCurve, Failure> {
    let text = inputs.read(path)?;
    Ok(ClosedCurve::from_json(&text)?)
}

// ---- verbs -----------------------------------------------------------------

#[derive(Serialize)]
struct GenPayload<'a> {
    spec: &'a CurveSpec,
    graded: bool,
    vertices: usize,
    perimeter: f64,
    diameter: f64,
    out: String,
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let spec = match args.shape {
        Shape::Circle => CurveSpec::Circle { n: args.n },
        Shape::Ellipse => CurveSpec::Ellipse { a: args.a, b: args.b, n: args.n },
        Shape::Koch => CurveSpec::Koch { level: args.level },
        Shape::Cusp => CurveSpec::Cusp { s: args.s, n: args.n },
        Shape::Perturbed => {
            CurveSpec::Perturbed { n: args.n, seed: args.seed, amplitude: args.amplitude }
        }
    };
    let mut curve = generate(&spec)?;
    match (args.grade_focus, args.grade_ratio) {
        (Some(focus), Some(ratio)) => curve = adaptive_cusp_sampling(&curve, focus, ratio)?,
        (None, None) => {}
        _ => return Err(usage("--grade-focus and --grade-ratio go together")),
    }
    write_file(&args.out, &curve.to_json())?;
    if let Some(path) = &args.svg {
        write_file(path, &svg::render(&curve, None))?;
    }
    let payload = GenPayload {
        spec: &spec,
        graded: args.grade_focus.is_some(),
        vertices: curve.len(),
        perimeter: curve.perimeter(),
        diameter: curve.curve_diameter(),
        out: args.out.display().to_string(),
    };
    let envelope = Envelope::new(args.seed, Inputs::new(), payload);
    report::emit(&envelope, args.report.as_deref())
}

fn turning(args: TurningArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::new();
    let curve = load_curve(&mut inputs, &args.curve)?;
    let filter = match (args.straddle_focus, args.max_chord) {
        (Some(focus), Some(max_chord)) => {
            Some(PairFilter::Straddling { focus, max_chord, max_index_skew: args.skew })
        }
        (Some(_), None) => return Err(usage("--straddle-focus requires --max-chord")),
        (None, Some(max_chord)) => Some(PairFilter::MaxChord(max_chord)),
        (None, None) => None,
    };
    let report: TurningReport = match (args.fit, filter) {
        (false, None) => turning_constant(&curve, args.t, args.seed)?,
        (_, filter) => exponent_fit(&curve, args.t, &filter.unwrap_or(PairFilter::All), args.seed)?,
    };
    let envelope = Envelope::new(args.seed, inputs, report);
    report::emit(&envelope, args.out.as_deref())
}

#[derive(Serialize)]
struct PieceRow {
    start: usize,
    end: usize,
    diameter: f64,
}

#[derive(Serialize)]
struct Partition {
    count: usize,
    min_diameter: f64,
    max_diameter: f64,
    pieces: Vec<PieceRow>,
}

impl Partition {
    fn new(curve: &ClosedCurve, spans: &[tqc_core::ArcSpan]) -> Partition {
        let pieces: Vec<PieceRow> = spans
            .iter()
            .map(|&s| PieceRow { start: s.start, end: s.end, diameter: curve.arc_diameter(s) })
            .collect();
        let min = pieces.iter().map(|p| p.diameter).fold(f64::INFINITY, f64::min);
        let max = pieces.iter().map(|p| p.diameter).fold(0.0, f64::max);
        Partition { count: pieces.len(), min_diameter: min, max_diameter: max, pieces }
    }
}

#[derive(Serialize)]
struct SubdividePayload {
    eps: f64,
    start: usize,
    /// Factor the curve was scaled by to reach unit diameter; piece
    /// diameters are reported at that scale.
    scale: f64,
    partition: Partition,
    #[serde(skip_serializing_if = "Option::is_none")]
    equalized: Option<Partition>,
}

fn subdivide(args: SubdivideArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::new();
    let loaded = load_curve(&mut inputs, &args.curve)?;
    let (curve, scale) = loaded.normalize_unit_diameter()?;
    let spans = greedy_subdivide(&curve, args.eps, args.start)?;
    let equalized = match args.equalize {
        Some(target) => {
            let grown = equalize_count(&curve, &spans, target)?;
            Some(Partition::new(&curve, &grown))
        }
        None => None,
    };
    let payload = SubdividePayload {
        eps: args.eps,
        start: args.start,
        scale,
        partition: Partition::new(&curve, &spans),
        equalized,
    };
    let envelope = Envelope::new(0, inputs, payload);
    report::emit(&envelope, args.out.as_deref())
}

#[derive(Serialize)]
struct TreePayload {
    branching: usize,
    depth: usize,
    leaves: usize,
    check: TreeCheckReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    map_samples: Option<usize>,
}

fn tree(args: TreeArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::new();
    let curve = load_curve(&mut inputs, &args.curve)?;
    let tree = build_tree(&curve, args.branching, args.depth)?;
    tree.check_partition()?;
    let check = verify_tree(&tree, args.prop3, args.prop4);
    let map_samples = match &args.map_out {
        Some(path) => {
            let map = build_boundary_map(&tree)?;
            write_file(path, &map.to_json()?)?;
            Some(map.len())
        }
        None => None,
    };
    let pass = check.prop3_pass && check.prop4_pass;
    let payload =
        TreePayload { branching: args.branching, depth: args.depth, leaves: tree.leaves().len(), check, map_samples };
    let envelope = Envelope::new(0, inputs, payload);
    report::emit(&envelope, args.out.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation("tree diameter ratios exceeded their thresholds".into()))
    }
}

#[derive(Serialize)]
struct ParamPayload {
    n: usize,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weak: Option<QsReport>,
}

fn param(args: ParamArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::new();
    let curve = load_curve(&mut inputs, &args.curve)?;
    let map = arclength_param(&curve, args.n)?;
    if let Some(path) = &args.map_out {
        write_file(path, &map.to_json()?)?;
    }
    let weak = match args.exponent {
        Some(exponent) => Some(weak_qs_constant(&map, exponent, args.seed)?),
        None => None,
    };
    let payload = ParamPayload { n: args.n, samples: map.len(), exponent: args.exponent, weak };
    let envelope = Envelope::new(args.seed, inputs, payload);
    report::emit(&envelope, args.out.as_deref())
}

#[derive(Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum QsPayload {
    Weak { report: QsReport },
    Modulus { report: QsReport, eta_fit: EtaFit },
    Mcond { report: MCondition },
    Holder { report: HolderReport },
    Psi { report: PsiReport },
}

fn qs(args: QsArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::new();
    let curve = load_curve(&mut inputs, &args.curve)?;
    let map_text = inputs.read(&args.map)?;
    // Accept either a sampled boundary map (tree/param output) or a full
    // disk map (conformal output); the latter carries its own correspondence.
    let looks_like_disk_map = serde_json::from_str::<serde_json::Value>(&map_text)
        .ok()
        .is_some_and(|v| v.get("unzips").is_some());
    let map = if looks_like_disk_map {
        DiskMap::from_json(&map_text)?.boundary_map(usize::MAX)?
    } else {
        BoundaryMap::from_json(&curve, &map_text)?
    };
    let mut failed_bound = None;
    let payload = match args.mode {
        QsMode::Weak => QsPayload::Weak { report: weak_qs_constant(&map, args.t, args.seed)? },
        QsMode::Modulus => {
            let report = qs_modulus(&map, args.t, args.bins, args.k_max, args.seed)?;
            let eta_fit = eta_shape_fit(&report)?;
            if let Some(path) = &args.csv {
                write_file(path, &rho_bins_csv(&report)?)?;
            }
            QsPayload::Modulus { report, eta_fit }
        }
        QsMode::Mcond => QsPayload::Mcond { report: m_condition(&map, args.t, args.seed)? },
        QsMode::Holder => QsPayload::Holder { report: holder_constants(&map, args.t)? },
        QsMode::Psi => {
            let r = args.r.ok_or_else(|| usage("psi mode requires --r"))?;
            let report = psi_bound_check(&map, args.t, r, args.seed)?;
            if !report.pass {
                failed_bound = Some(format!(
                    "psi bound violated: worst slack {} at k = {}",
                    report.worst_slack, report.worst_k
                ));
            }
            QsPayload::Psi { report }
        }
    };
    let envelope = Envelope::new(args.seed, inputs, payload);
    report::emit(&envelope, args.out.as_deref())?;
    match failed_bound {
        Some(msg) => Err(Failure::Validation(msg)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct ConformalPayload {
    stages: usize,
    resolved: usize,
    dropped: usize,
    min_boundary_gap: f64,
    koebe: KoebeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    constants: Option<ConformalConstantsReport>,
}

fn conformal(args: ConformalArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::new();
    let curve = load_curve(&mut inputs, &args.curve)?;
    let map = zipper_fit(&curve, args.center)?;
    if let Some(path) = &args.map_out {
        write_file(path, &map.to_json()?)?;
    }
    if let Some(path) = &args.svg {
        write_file(path, &svg::render(&curve, Some(&map)))?;
    }
    let koebe = koebe_check(&map, &default_polar_grid(25, 20, 0.05, 0.95))?;
    let constants = match args.t {
        Some(t) => Some(lemma_constants_report(
            &map,
            t,
            &default_polar_grid(8, 16, 0.5, 1.0 - 1e-3),
            args.seed,
        )?),
        None => None,
    };
    let pass = koebe.pass;
    let payload = ConformalPayload {
        stages: map.stage_count(),
        resolved: map.boundary_corr().len(),
        dropped: map.dropped_vertices(),
        min_boundary_gap: map.min_boundary_gap(),
        koebe,
        constants,
    };
    let envelope = Envelope::new(args.seed, inputs, payload);
    report::emit(&envelope, args.out.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation("distortion sandwich violated on the evaluation grid".into()))
    }
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::new();
    let curve = match &args.curve {
        Some(path) => Some(load_curve(&mut inputs, path)?),
        None => None,
    };
    let input = scenarios::ScenarioInput {
        curve,
        t: args.t,
        seed: args.seed,
        branching: args.branching,
        depth: args.depth,
        budget: args.budget,
        n: args.n,
    };
    let (payload, pass) = scenarios::run(args.scenario, input)?;
    let envelope = Envelope::new(args.seed, inputs, payload);
    report::emit(&envelope, args.out.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation("scenario bound violated; see report".into()))
    }
}
