//! Subcommands and their drivers.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use quadiff::graph::{validate_faces, SurveyOptions, SurveyRegion};
use quadiff::laguerre::{
    build_polynomial, convergence_report, discriminant_zeros, roots, standard_probes, AlgebraicBranch,
};
use quadiff::periods::TAU_CRIT;
use quadiff::scalar::segment_distance;
use quadiff::tracer::trace_launches;
use quadiff::{
    classify_graph_with_tolerance, gamma_locus, lemma_check, CriticalGraph, QDiff64, QdError, TerminationKind,
    TraceConfig64, TrajectoryKind, ZeroId, C64,
};

use crate::document::{
    candidate_label, guard_text, pair, ClassifyDocument, ConvergenceRowDoc, GraphDocument, LaguerreDocument,
    LemmaDoc, LocusBranchDoc, LocusDocument, PeriodDocument, SurveyDocument, ValidationDoc, SCHEMA,
};
use crate::parse::{parse_complex, parse_count, parse_positive, parse_region, parse_seed, ConfigFile};
use crate::svg::{Canvas, Stroke};
use crate::{json, CliError};

/// Largest lemma mismatch accepted as a match.
pub const LEMMA_TOLERANCE: f64 = 1e-6;
/// Largest deviation of a Teichmüller sum from its expected value.
pub const FACE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "quadiff", version, about = "Critical graphs of -(z-a)(z-b)/z^2 dz^2")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the critical graph and validate it.
    Trace(PairArgs),
    /// Classify the critical graph without emitting samples.
    Classify(PairArgs),
    /// Period integral from a to b against its closed-form candidates.
    Period(PeriodArgs),
    /// Sample the reality locus in the b-plane for fixed a.
    Locus(LocusArgs),
    /// Criterion survey over a grid of b, with traced spot checks.
    Survey(SurveyArgs),
    /// Roots of rescaled Laguerre polynomials against the algebraic limit.
    Laguerre(LaguerreArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// SVG output path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// JSON output path (stdout when absent).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, value_parser = parse_seed)]
    pub seed: Option<u64>,
    /// Allowed level drift per unit arc length.
    #[arg(long = "tol-level", value_parser = parse_positive)]
    pub tol_level: Option<f64>,
    /// Relative tolerance of the reality criterion.
    #[arg(long = "tol-crit", value_parser = parse_positive)]
    pub tol_crit: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub a: Option<C64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub b: Option<C64>,
    /// Also trace the vertical trajectories from the zeros.
    #[arg(long)]
    pub vertical: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct PeriodArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub a: Option<C64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub b: Option<C64>,
    /// Intermediate path vertex; repeat for a polyline.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub via: Vec<C64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct LocusArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub a: Option<C64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_region)]
    pub region: Option<[f64; 4]>,
    /// Parameter samples per branch.
    #[arg(long, value_parser = parse_count)]
    pub resolution: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SurveyArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub a: Option<C64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_region)]
    pub region: Option<[f64; 4]>,
    /// Grid nodes per axis.
    #[arg(long, value_parser = parse_count)]
    pub resolution: Option<usize>,
    /// Number of grid nodes checked by tracing.
    #[arg(long = "trace-sample", value_parser = parse_count)]
    pub trace_sample: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct LaguerreArgs {
    #[arg(long = "A", allow_hyphen_values = true, value_parser = parse_complex)]
    pub big_a: Option<C64>,
    #[arg(long, value_parser = parse_count)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub trace: TraceConfig64,
    pub tau_crit: f64,
    pub svg: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn usage(e: String) -> CliError {
    CliError::Usage(e)
}

fn pick<V>(flag: Option<V>, file: &ConfigFile, key: &str, parse: impl Fn(&str) -> Result<V, String>) -> Result<Option<V>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key, parse).map_err(usage),
    }
}

fn require<V>(v: Option<V>, name: &str) -> Result<V, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{name}")))
}

fn path(s: &str) -> Result<PathBuf, String> {
    Ok(PathBuf::from(s))
}

impl RunConfig {
    pub fn resolve(common: &Common, file: &ConfigFile) -> Result<Self, CliError> {
        let mut trace = TraceConfig64::default();
        let reals: [(&str, &mut f64); 8] = [
            ("rtol", &mut trace.rtol),
            ("atol", &mut trace.atol),
            ("launch_offset", &mut trace.launch_offset),
            ("r_max", &mut trace.r_max),
            ("r_min", &mut trace.r_min),
            ("eps_hit", &mut trace.eps_hit),
            ("spiral_shrink", &mut trace.spiral_shrink),
            ("step_fraction", &mut trace.step_fraction),
        ];
        for (key, slot) in reals {
            if let Some(v) = file.get(key, parse_positive).map_err(usage)? {
                *slot = v;
            }
        }
        if let Some(v) = file.get("max_steps", parse_count).map_err(usage)? {
            trace.max_steps = v;
        }
        if let Some(v) = file.get("spiral_windings", parse_count).map_err(usage)? {
            trace.spiral_windings = u32::try_from(v).map_err(|_| usage("spiral_windings too large".into()))?;
        }
        if let Some(v) = pick(common.tol_level, file, "tol_level", parse_positive)? {
            trace.level_tol = v;
        }
        trace.validate()?;
        Ok(RunConfig {
            seed: pick(common.seed, file, "seed", parse_seed)?.unwrap_or(0),
            trace,
            tau_crit: pick(common.tol_crit, file, "tol_crit", parse_positive)?.unwrap_or(TAU_CRIT),
            svg: pick(common.svg.clone(), file, "svg", path)?,
            json: pick(common.json.clone(), file, "json", path)?,
            csv: pick(common.csv.clone(), file, "csv", path)?,
        })
    }
}

/// Result of a successful run: human-readable summary plus any failed checks.
#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: Vec<String>,
    /// Validation failures (exit code 3).
    pub failures: Vec<String>,
    /// Numerical failures in secondary checks (exit code 4).
    pub numerical: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if !self.numerical.is_empty() {
            4
        } else if !self.failures.is_empty() {
            3
        } else {
            0
        }
    }
}

fn write_file(p: &PathBuf, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(p, contents).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

fn emit_json<S: serde::Serialize>(doc: &S, run: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let text = json::to_string(doc).map_err(|e| CliError::Io(e.to_string()))?;
    match &run.json {
        Some(p) => write_file(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn emit_svg(canvas: Canvas, run: &RunConfig) -> Result<(), CliError> {
    match &run.svg {
        Some(p) => write_file(p, canvas.finish().as_bytes()),
        None => Ok(()),
    }
}

fn emit_csv(header: &[&str], rows: Vec<Vec<String>>, run: &RunConfig) -> Result<(), CliError> {
    let Some(p) = &run.csv else { return Ok(()) };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write_file(p, &bytes)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<V: ToString>(v: Option<V>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Straight segment, or a detour on the far side when the segment passes near the origin.
pub fn default_path(a: C64, b: C64) -> (Vec<C64>, &'static str) {
    let zero = C64::new(0.0, 0.0);
    let reach = 0.1 * a.norm().min(b.norm()).max(1e-300);
    if segment_distance(zero, a, b) > reach {
        return (vec![a, b], "segment");
    }
    let mid = (a + b) / 2.0;
    let normal = C64::new(0.0, 1.0) * (b - a) / (b - a).norm();
    let side = if (mid + normal).norm() > (mid - normal).norm() { normal } else { -normal };
    (vec![a, mid + side * (a - b).norm().max(a.norm().max(b.norm())), b], "detour")
}

/// The first short trajectory, oriented from `a` to `b` and thinned to at most ~400 vertices.
fn short_path(graph: &CriticalGraph<f64>) -> Option<Vec<C64>> {
    let arc = graph.short_trajectories().next()?;
    let mut pts = arc.samples.clone();
    if arc.start_zero() == Some(ZeroId::B) {
        pts.reverse();
    }
    let stride = pts.len().div_ceil(400).max(1);
    let last = *pts.last()?;
    let mut out: Vec<C64> = pts.into_iter().step_by(stride).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    Some(out)
}

fn pair_input(a: Option<C64>, b: Option<C64>, file: &ConfigFile) -> Result<QDiff64, CliError> {
    let a = require(pick(a, file, "a", parse_complex)?, "a")?;
    let b = require(pick(b, file, "b", parse_complex)?, "b")?;
    Ok(QDiff64::new(a, b)?)
}

fn validate_graph(graph: &CriticalGraph<f64>, out: &mut Outcome) -> ValidationDoc {
    let q = &graph.qdiff;
    let mut v = ValidationDoc {
        lemma: None,
        lemma_error: None,
        teichmuller: Vec::new(),
        teichmuller_error: None,
        agreement: graph.agreement,
        boundary_ambiguous: graph.boundary_ambiguous,
        guard_violations: graph.guard_violations.iter().map(guard_text).collect(),
        failures: Vec::new(),
    };
    if !q.is_degenerate_equal() && !q.is_degenerate_zero() {
        let (path, source) = match short_path(graph) {
            Some(p) => (p, "short_trajectory"),
            None => default_path(q.a(), q.b()),
        };
        match lemma_check(q, &path) {
            Ok(r) => {
                if !(r.mismatch < LEMMA_TOLERANCE) {
                    v.failures.push(format!("period mismatch {:.3e} exceeds {LEMMA_TOLERANCE:e}", r.mismatch));
                }
                v.lemma = Some(LemmaDoc::new(source, &path, &r));
            }
            Err(e) => {
                if e.is_numerical() {
                    out.numerical.push(format!("period integral: {e}"));
                }
                v.lemma_error = Some(e.to_string());
            }
        }
    }
    match validate_faces(graph) {
        Ok(checks) => {
            for c in &checks {
                if !(c.error() < FACE_TOLERANCE) {
                    v.failures.push(format!("face with {} corners sums to {:.6}, expected {}", c.corners, c.sum, c.expected));
                }
            }
            v.teichmuller = checks.iter().map(Into::into).collect();
        }
        Err(e) => {
            out.numerical.push(format!("face extraction: {e}"));
            v.teichmuller_error = Some(e.to_string());
        }
    }
    if graph.is_validation_failure() {
        v.failures.push(format!(
            "traced topology {} disagrees with criterion {}",
            graph.case_label,
            graph.criterion.map_or("-", |c| c.class.label())
        ));
    }
    for g in &v.guard_violations {
        v.failures.push(format!("corollary guard: {g}"));
    }
    for (k, arc) in graph.arcs.iter().enumerate() {
        if matches!(arc.termination, TerminationKind::StepBudgetExceeded) {
            v.failures.push(format!("arc {k} exhausted the step budget"));
        }
    }
    out.failures.extend(v.failures.iter().cloned());
    v
}

fn graph_canvas(graph: &CriticalGraph<f64>, extra: &[quadiff::Arc64], r_max: f64) -> Canvas {
    let mut c = Canvas::square(r_max);
    for arc in graph.arcs.iter().chain(extra) {
        let (color, stroke) = match arc.kind {
            TrajectoryKind::Vertical => ("#2c6fbb", Stroke::Dashed),
            TrajectoryKind::Horizontal if arc.termination.is_critical() => ("#c0392b", Stroke::Solid),
            TrajectoryKind::Horizontal => ("#222222", Stroke::Solid),
        };
        c.polyline(&arc.samples, color, stroke);
    }
    let mark = 6000;
    for z in graph.qdiff.zeros() {
        c.dot(z.point, mark, "#111111");
    }
    if !graph.qdiff.is_degenerate_zero() {
        c.cross(C64::new(0.0, 0.0), mark, "#111111");
    }
    c
}

fn cmd_trace(args: &PairArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let run = RunConfig::resolve(&args.common, file)?;
    let q = pair_input(args.a, args.b, file)?;
    let graph = classify_graph_with_tolerance(&q, &run.trace, run.tau_crit)?;
    let extra = if args.vertical { trace_launches(&q, TrajectoryKind::Vertical, &run.trace)? } else { Vec::new() };
    let mut outcome = Outcome::default();
    let validation = validate_graph(&graph, &mut outcome);
    let r_max = run.trace.thresholds(&q).r_max;
    let doc = GraphDocument::new(&graph, &extra, r_max, run.seed, validation);
    emit_json(&doc, &run, out)?;
    emit_svg(graph_canvas(&graph, &extra, r_max), &run)?;
    outcome.summary.push(format!(
        "case {}: {} arcs, {} critical",
        graph.case_label,
        graph.arcs.len(),
        graph.critical_count
    ));
    if let Some(l) = &doc.validation.lemma {
        outcome.summary.push(format!("period matches {} (mismatch {:.3e})", l.matched_label, l.mismatch));
    }
    Ok(outcome)
}

fn cmd_classify(args: &PairArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let run = RunConfig::resolve(&args.common, file)?;
    let q = pair_input(args.a, args.b, file)?;
    let graph = classify_graph_with_tolerance(&q, &run.trace, run.tau_crit)?;
    let doc = ClassifyDocument::new(&graph, run.seed);
    emit_json(&doc, &run, out)?;
    let mut outcome = Outcome::default();
    outcome.summary.push(format!(
        "case {}, criterion {}, {} critical",
        graph.case_label,
        graph.criterion.map_or("-", |c| c.class.label()),
        graph.critical_count
    ));
    if graph.is_validation_failure() {
        outcome.failures.push(format!("traced topology {} disagrees with the criterion", graph.case_label));
    }
    outcome.failures.extend(doc.guard_violations.iter().map(|g| format!("corollary guard: {g}")));
    Ok(outcome)
}

fn cmd_period(args: &PeriodArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let run = RunConfig::resolve(&args.common, file)?;
    let q = pair_input(args.a, args.b, file)?;
    let (path, source) = if args.via.is_empty() {
        default_path(q.a(), q.b())
    } else {
        let mut p = vec![q.a()];
        p.extend(&args.via);
        p.push(q.b());
        (p, "user")
    };
    let r = lemma_check(&q, &path)?;
    let doc = PeriodDocument { schema: SCHEMA.into(), seed: run.seed, a: pair(q.a()), b: pair(q.b()), lemma: LemmaDoc::new(source, &path, &r) };
    emit_json(&doc, &run, out)?;
    let mut outcome = Outcome::default();
    outcome.summary.push(format!(
        "I = {:.12} {:+.12}i, matched {} = {:.12} {:+.12}i, mismatch {:.3e}",
        r.value.re,
        r.value.im,
        candidate_label(r.matched),
        r.candidates[r.matched].re,
        r.candidates[r.matched].im,
        r.mismatch
    ));
    if !(r.mismatch < LEMMA_TOLERANCE) {
        outcome.failures.push(format!("period mismatch {:.3e} exceeds {LEMMA_TOLERANCE:e}", r.mismatch));
    }
    Ok(outcome)
}

const DEFAULT_REGION: [f64; 4] = [-3.0, 3.0, -3.0, 3.0];

fn inside(r: &[f64; 4], z: C64) -> bool {
    z.re >= r[0] && z.re <= r[1] && z.im >= r[2] && z.im <= r[3]
}

fn cmd_locus(args: &LocusArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let run = RunConfig::resolve(&args.common, file)?;
    let a = require(pick(args.a, file, "a", parse_complex)?, "a")?;
    let region = pick(args.region, file, "region", parse_region)?.unwrap_or(DEFAULT_REGION);
    let n = pick(args.resolution, file, "resolution", parse_count)?.unwrap_or(2001).max(2);
    let locus = gamma_locus(a)?;
    let extent = region.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 2f64.sqrt();
    let s_max = extent.sqrt() + a.norm().sqrt() + 1.0;
    let mut branches = Vec::new();
    let mut rows = Vec::new();
    for (k, br) in locus.branches.iter().enumerate() {
        let mut runs: Vec<Vec<[f64; 2]>> = Vec::new();
        let mut current = Vec::new();
        for i in 0..n {
            let s = s_max * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
            let z = br.point(s);
            if inside(&region, z) {
                current.push(pair(z));
            } else if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            runs.push(current);
        }
        for (j, r) in runs.iter().enumerate() {
            rows.extend(r.iter().map(|p| vec![k.to_string(), j.to_string(), num(p[0]), num(p[1])]));
        }
        branches.push(LocusBranchDoc { family: format!("{:?}", br.family), shape: format!("{:?}", br.shape), runs });
    }
    let ys: Vec<f64> = (0..=100).map(|k| region[2] + (region[3] - region[2]) * k as f64 / 100.0).collect();
    let doc = LocusDocument {
        schema: SCHEMA.into(),
        seed: run.seed,
        a: pair(a),
        region,
        printed_formula_discrepancy: locus.printed_formula_discrepancy(&ys).map(|(x, y)| [x, y]),
        branches,
    };
    emit_json(&doc, &run, out)?;
    emit_csv(&["branch", "run", "re", "im"], rows, &run)?;
    let mut canvas = Canvas::rect(region[0], region[1], region[2], region[3]);
    for (br, color) in doc.branches.iter().zip(["#c0392b", "#2c6fbb"]) {
        for r in &br.runs {
            let pts: Vec<C64> = r.iter().map(|p| C64::new(p[0], p[1])).collect();
            canvas.polyline(&pts, color, Stroke::Solid);
        }
    }
    if inside(&region, a) {
        canvas.dot(a, 6000, "#111111");
    }
    emit_svg(canvas, &run)?;
    let mut outcome = Outcome::default();
    outcome.summary.push(format!(
        "locus of a = {a}: {} runs",
        doc.branches.iter().map(|b| b.runs.len()).sum::<usize>()
    ));
    Ok(outcome)
}

fn cmd_survey(args: &SurveyArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let run = RunConfig::resolve(&args.common, file)?;
    let a = require(pick(args.a, file, "a", parse_complex)?, "a")?;
    let region = pick(args.region, file, "region", parse_region)?.unwrap_or(DEFAULT_REGION);
    let res = pick(args.resolution, file, "resolution", parse_count)?.unwrap_or(61);
    let sample = pick(args.trace_sample, file, "trace_sample", parse_count)?.unwrap_or(20);
    let opts = SurveyOptions { nx: res, ny: res, trace_sample: sample, seed: run.seed, trace: run.trace };
    let r = SurveyRegion { x0: region[0], x1: region[1], y0: region[2], y1: region[3] };
    let grid = quadiff::survey(a, r, &opts)?;
    let doc = SurveyDocument::new(&grid, run.seed);
    emit_json(&doc, &run, out)?;
    let rows = doc
        .cells
        .iter()
        .map(|c| {
            vec![
                c.i.to_string(),
                c.j.to_string(),
                num(c.b[0]),
                num(c.b[1]),
                c.class.clone(),
                c.on_locus.to_string(),
                c.boundary_ambiguous.to_string(),
                opt(c.critical_count),
                opt(c.agreement),
            ]
        })
        .collect();
    emit_csv(
        &["i", "j", "b_re", "b_im", "class", "on_locus", "boundary_ambiguous", "critical_count", "agreement"],
        rows,
        &run,
    )?;
    let (dx, dy) = grid.cell_size();
    let mut canvas = Canvas::rect(region[0] - dx / 2.0, region[1] + dx / 2.0, region[2] - dy / 2.0, region[3] + dy / 2.0);
    for c in &grid.cells {
        let color = match (c.class.holds(), c.on_locus, c.agreement) {
            (_, _, Some(false)) => "#c0392b",
            (true, _, _) => "#7d3c98",
            (false, true, _) => "#f5b041",
            (false, false, _) => continue,
        };
        canvas.cell(c.b, dx / 2.0, dy / 2.0, color);
    }
    emit_svg(canvas, &run)?;
    let mut outcome = Outcome::default();
    let locus_cells = grid.cells.iter().filter(|c| c.on_locus).count();
    outcome.summary.push(format!(
        "{}x{} grid, {locus_cells} locus cells, {}/{} traced checks agree",
        grid.nx, grid.ny, grid.agreeing, grid.traced
    ));
    for c in grid.cells.iter().filter(|c| c.agreement == Some(false) && !c.boundary_ambiguous) {
        outcome.failures.push(format!("b = {} ({}): tracing disagrees with the criterion", c.b, c.class.label()));
    }
    Ok(outcome)
}

fn cmd_laguerre(args: &LaguerreArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let run = RunConfig::resolve(&args.common, file)?;
    let big_a = require(pick(args.big_a, file, "A", parse_complex)?, "A")?;
    let n = pick(args.n, file, "n", parse_count)?.unwrap_or(100);
    let p = build_polynomial(n, big_a)?;
    let m = roots(&p)?;
    let (za, zb) = discriminant_zeros(big_a);
    let mut outcome = Outcome::default();
    let mut doc = LaguerreDocument {
        schema: SCHEMA.into(),
        seed: run.seed,
        big_a: pair(big_a),
        n,
        roots: m.roots.iter().map(|&z| pair(z)).collect(),
        max_residual: m.max_residual(),
        accuracy: m.accuracy,
        converged: m.converged,
        failure: m.failure.clone(),
        zeros: [pair(za), pair(zb)],
        support: Vec::new(),
        support_error: None,
        mass: None,
        root_support_distance: None,
        convergence: Vec::new(),
        max_error: Vec::new(),
        monotone: None,
    };
    if let Some(f) = &m.failure {
        outcome.numerical.push(format!("root finding: {f}"));
    }
    let branch = match AlgebraicBranch::new(big_a, &run.trace) {
        Ok(b) => Some(b),
        Err(e) if e.is_numerical() => return Err(e.into()),
        Err(e) => {
            doc.support_error = Some(e.to_string());
            None
        }
    };
    if let Some(br) = &branch {
        doc.support = br.cut.iter().map(|&z| pair(z)).collect();
        doc.mass = Some(pair(br.mass()?));
        doc.root_support_distance = Some(m.roots.iter().map(|&r| br.distance_to_cut(r)).fold(0.0, f64::max));
        if m.failure.is_none() {
            let mut ns: Vec<usize> = [n / 4, n / 2, n].into_iter().filter(|&k| k > 0).collect();
            ns.dedup();
            match convergence_report(br, &ns, &standard_probes(br)) {
                Ok(rep) => {
                    doc.convergence = rep.rows.iter().map(Into::into).collect();
                    doc.max_error = rep.max_error.clone();
                    doc.monotone = Some(rep.monotone);
                }
                Err(e) if e.is_numerical() => outcome.numerical.push(format!("convergence: {e}")),
                Err(e) => return Err(e.into()),
            }
        }
    }
    emit_json(&doc, &run, out)?;
    let rows = doc
        .convergence
        .iter()
        .map(|r: &ConvergenceRowDoc| {
            vec![r.n.to_string(), num(r.z[0]), num(r.z[1]), num(r.cauchy[0]), num(r.cauchy[1]), num(r.h[0]), num(r.h[1]), num(r.error)]
        })
        .collect();
    emit_csv(&["n", "z_re", "z_im", "cauchy_re", "cauchy_im", "h_re", "h_im", "error"], rows, &run)?;
    let reach = m.roots.iter().chain([&za, &zb]).fold(1.0f64, |r, z| r.max(z.norm())) * 1.2;
    let mut canvas = Canvas::square(reach);
    if let Some(br) = &branch {
        canvas.polyline(&br.cut, "#c0392b", Stroke::Solid);
    }
    for &r in &m.roots {
        canvas.dot(r, 4000, "#111111");
    }
    for z in [za, zb] {
        canvas.dot(z, 8000, "#2c6fbb");
    }
    canvas.cross(C64::new(0.0, 0.0), 6000, "#111111");
    emit_svg(canvas, &run)?;
    outcome.summary.push(format!("n = {n}: {} roots, max residual {:.3e}", m.roots.len(), doc.max_residual));
    if let Some(d) = doc.root_support_distance {
        outcome.summary.push(format!("roots within {d:.3e} of the support"));
    }
    for (k, e) in &doc.max_error {
        outcome.summary.push(format!("n = {k}: max |C - h| = {e:.3e}"));
    }
    Ok(outcome)
}

/// Runs one parsed command line against a config file, writing JSON to `out`
/// when no `--json` path is given.
pub fn execute(cli: &Cli, file: &ConfigFile, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Trace(a) => cmd_trace(a, file, out),
        Command::Classify(a) => cmd_classify(a, file, out),
        Command::Period(a) => cmd_period(a, file, out),
        Command::Locus(a) => cmd_locus(a, file, out),
        Command::Survey(a) => cmd_survey(a, file, out),
        Command::Laguerre(a) => cmd_laguerre(a, file, out),
    }
}

impl From<QdError> for CliError {
    fn from(e: QdError) -> Self {
        if e.is_numerical() || matches!(e, QdError::PoleProximity { .. }) {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}
