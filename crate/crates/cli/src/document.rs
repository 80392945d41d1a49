//! Serializable output documents.

use serde::{Deserialize, Serialize};

use quadiff::graph::{FaceCheck, GuardViolation, SurveyCell, SurveyGrid};
use quadiff::laguerre::ConvergenceRow;
use quadiff::tracer::InfinityDirection;
use quadiff::{Arc, ArcOrigin, CriticalGraph, Criterion, PeriodResult, TerminationKind, TrajectoryKind, ZeroId, C64};

pub const SCHEMA: &str = "1";

pub type Pair = [f64; 2];

pub fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

pub fn unpair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn zero_name(id: ZeroId) -> String {
    match id {
        ZeroId::A => "a".into(),
        ZeroId::B => "b".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationDoc {
    pub tag: String,
    pub endpoint: Option<String>,
    pub winding: Option<i32>,
    pub direction: Option<String>,
    pub gap: Option<f64>,
}

impl From<&TerminationKind<f64>> for TerminationDoc {
    fn from(t: &TerminationKind<f64>) -> Self {
        let mut d = TerminationDoc { tag: t.tag().into(), endpoint: None, winding: None, direction: None, gap: None };
        match *t {
            TerminationKind::ShortTrajectory { endpoint, gap } => {
                d.endpoint = Some(zero_name(endpoint));
                d.gap = Some(gap);
            }
            TerminationKind::Loop { winding, gap } => {
                d.winding = Some(winding);
                d.gap = Some(gap);
            }
            TerminationKind::SpiralToOrigin { windings } => d.winding = Some(windings),
            TerminationKind::EscapeToInfinity { direction } => {
                d.direction = Some(
                    match direction {
                        InfinityDirection::PlusI => "+i",
                        InfinityDirection::MinusI => "-i",
                    }
                    .into(),
                )
            }
            TerminationKind::RadialToOrigin | TerminationKind::StepBudgetExceeded => {}
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcDoc {
    pub kind: String,
    pub origin: String,
    pub ray: Option<usize>,
    pub launch_angle: f64,
    pub termination: TerminationDoc,
    pub level: f64,
    pub level_drift: f64,
    pub length: f64,
    pub samples: Vec<Pair>,
}

impl From<&Arc<f64>> for ArcDoc {
    fn from(a: &Arc<f64>) -> Self {
        let (origin, ray) = match a.origin {
            ArcOrigin::Zero { id, ray } => (zero_name(id), Some(ray)),
            ArcOrigin::Seed(_) => ("seed".into(), None),
        };
        ArcDoc {
            kind: match a.kind {
                TrajectoryKind::Horizontal => "horizontal".into(),
                TrajectoryKind::Vertical => "vertical".into(),
            },
            origin,
            ray,
            launch_angle: a.launch_angle,
            termination: (&a.termination).into(),
            level: a.level,
            level_drift: a.level_drift,
            length: a.length,
            samples: a.samples.iter().map(|&z| pair(z)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionDoc {
    pub class: String,
    pub im_plus: f64,
    pub im_minus: f64,
    pub scale: f64,
    pub boundary_ambiguous: bool,
}

impl From<&Criterion<f64>> for CriterionDoc {
    fn from(c: &Criterion<f64>) -> Self {
        CriterionDoc {
            class: c.class.label().into(),
            im_plus: c.im_plus,
            im_minus: c.im_minus,
            scale: c.scale,
            boundary_ambiguous: c.boundary_ambiguous,
        }
    }
}

/// Human-readable form of candidate `k` of `±(iπ/2)(√a ± √b)²`.
pub fn candidate_label(k: usize) -> &'static str {
    ["+(i*pi/2)(sqrt(a)+sqrt(b))^2", "-(i*pi/2)(sqrt(a)+sqrt(b))^2", "+(i*pi/2)(sqrt(a)-sqrt(b))^2", "-(i*pi/2)(sqrt(a)-sqrt(b))^2"]
        [k]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaDoc {
    /// Where the path came from: `short_trajectory`, `segment`, `detour` or `user`.
    pub path_source: String,
    pub path: Vec<Pair>,
    pub value: Pair,
    pub candidates: Vec<Pair>,
    pub matched: usize,
    pub matched_label: String,
    pub mismatch: f64,
}

impl LemmaDoc {
    pub fn new(source: &str, path: &[C64], r: &PeriodResult<f64>) -> Self {
        LemmaDoc {
            path_source: source.into(),
            path: path.iter().map(|&z| pair(z)).collect(),
            value: pair(r.value),
            candidates: r.candidates.iter().map(|&z| pair(z)).collect(),
            matched: r.matched,
            matched_label: candidate_label(r.matched).into(),
            mismatch: r.mismatch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceDoc {
    pub sum: f64,
    pub expected: f64,
    pub contains_origin: bool,
    pub corners: usize,
}

impl From<&FaceCheck<f64>> for FaceDoc {
    fn from(f: &FaceCheck<f64>) -> Self {
        FaceDoc { sum: f.sum, expected: f.expected, contains_origin: f.contains_origin, corners: f.corners }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationDoc {
    pub lemma: Option<LemmaDoc>,
    pub lemma_error: Option<String>,
    pub teichmuller: Vec<FaceDoc>,
    pub teichmuller_error: Option<String>,
    pub agreement: Option<bool>,
    pub boundary_ambiguous: bool,
    pub guard_violations: Vec<String>,
    /// Messages for every failed check; empty when all passed.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema: String,
    pub seed: u64,
    pub a: Pair,
    pub b: Pair,
    pub r_max: f64,
    pub case_label: String,
    pub criterion: Option<CriterionDoc>,
    pub critical_count: usize,
    pub arcs: Vec<ArcDoc>,
    pub validation: ValidationDoc,
}

impl GraphDocument {
    pub fn new(graph: &CriticalGraph<f64>, extra: &[Arc<f64>], r_max: f64, seed: u64, validation: ValidationDoc) -> Self {
        GraphDocument {
            schema: SCHEMA.into(),
            seed,
            a: pair(graph.qdiff.a()),
            b: pair(graph.qdiff.b()),
            r_max,
            case_label: graph.case_label.as_str().into(),
            criterion: graph.criterion.as_ref().map(Into::into),
            critical_count: graph.critical_count,
            arcs: graph.arcs.iter().chain(extra).map(Into::into).collect(),
            validation,
        }
    }
}

pub fn guard_text(g: &GuardViolation) -> String {
    match g {
        GuardViolation::SameZeroTwiceToOrigin(id) => format!("two origin-bound arcs from zero {}", zero_name(*id)),
        GuardViolation::BothZerosToOrigin => "origin-bound arcs from both zeros while the criterion holds".into(),
    }
}

/// Summary of `classify`: the graph without samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyDocument {
    pub schema: String,
    pub seed: u64,
    pub a: Pair,
    pub b: Pair,
    pub case_label: String,
    pub criterion: Option<CriterionDoc>,
    pub critical_count: usize,
    pub terminations: Vec<TerminationDoc>,
    pub agreement: Option<bool>,
    pub boundary_ambiguous: bool,
    pub guard_violations: Vec<String>,
}

impl ClassifyDocument {
    pub fn new(graph: &CriticalGraph<f64>, seed: u64) -> Self {
        ClassifyDocument {
            schema: SCHEMA.into(),
            seed,
            a: pair(graph.qdiff.a()),
            b: pair(graph.qdiff.b()),
            case_label: graph.case_label.as_str().into(),
            criterion: graph.criterion.as_ref().map(Into::into),
            critical_count: graph.critical_count,
            terminations: graph.arcs.iter().map(|a| (&a.termination).into()).collect(),
            agreement: graph.agreement,
            boundary_ambiguous: graph.boundary_ambiguous,
            guard_violations: graph.guard_violations.iter().map(guard_text).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodDocument {
    pub schema: String,
    pub seed: u64,
    pub a: Pair,
    pub b: Pair,
    pub lemma: LemmaDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusBranchDoc {
    pub family: String,
    pub shape: String,
    /// Maximal runs of samples inside the region.
    pub runs: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusDocument {
    pub schema: String,
    pub seed: u64,
    pub a: Pair,
    pub region: [f64; 4],
    pub branches: Vec<LocusBranchDoc>,
    /// Largest horizontal offsets of the closed forms in `y`, when `a` is not real.
    pub printed_formula_discrepancy: Option<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyCellDoc {
    pub i: usize,
    pub j: usize,
    pub b: Pair,
    pub class: String,
    pub on_locus: bool,
    pub boundary_ambiguous: bool,
    pub critical_count: Option<usize>,
    pub agreement: Option<bool>,
}

impl From<&SurveyCell<f64>> for SurveyCellDoc {
    fn from(c: &SurveyCell<f64>) -> Self {
        SurveyCellDoc {
            i: c.i,
            j: c.j,
            b: pair(c.b),
            class: c.class.label().into(),
            on_locus: c.on_locus,
            boundary_ambiguous: c.boundary_ambiguous,
            critical_count: c.critical_count,
            agreement: c.agreement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyDocument {
    pub schema: String,
    pub seed: u64,
    pub a: Pair,
    pub region: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub traced: usize,
    pub agreeing: usize,
    pub cells: Vec<SurveyCellDoc>,
}

impl SurveyDocument {
    pub fn new(grid: &SurveyGrid<f64>, seed: u64) -> Self {
        let r = grid.region;
        SurveyDocument {
            schema: SCHEMA.into(),
            seed,
            a: pair(grid.a),
            region: [r.x0, r.x1, r.y0, r.y1],
            nx: grid.nx,
            ny: grid.ny,
            traced: grid.traced,
            agreeing: grid.agreeing,
            cells: grid.cells.iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRowDoc {
    pub n: usize,
    pub z: Pair,
    pub cauchy: Pair,
    pub h: Pair,
    pub error: f64,
}

impl From<&ConvergenceRow<f64>> for ConvergenceRowDoc {
    fn from(r: &ConvergenceRow<f64>) -> Self {
        ConvergenceRowDoc { n: r.n, z: pair(r.z), cauchy: pair(r.cauchy), h: pair(r.h), error: r.error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaguerreDocument {
    pub schema: String,
    pub seed: u64,
    #[serde(rename = "A")]
    pub big_a: Pair,
    pub n: usize,
    pub roots: Vec<Pair>,
    pub max_residual: f64,
    pub accuracy: f64,
    pub converged: bool,
    pub failure: Option<String>,
    /// Branch points `a`, `b` of the discriminant.
    pub zeros: [Pair; 2],
    /// Support arc of the limit measure, when it exists.
    pub support: Vec<Pair>,
    pub support_error: Option<String>,
    pub mass: Option<Pair>,
    pub root_support_distance: Option<f64>,
    pub convergence: Vec<ConvergenceRowDoc>,
    pub max_error: Vec<(usize, f64)>,
    pub monotone: Option<bool>,
}
