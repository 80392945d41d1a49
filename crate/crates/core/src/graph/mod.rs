//! Critical graphs: assembly, topology labels, corollary guards, Teichmüller
//! faces and the reality locus in the `b`-plane.

mod faces;
mod locus;

use serde::{Deserialize, Serialize};

use crate::differential::{QDiff, ZeroId};
use crate::error::{QdError, Result};
use crate::periods::{criterion_with_tolerance, Criterion, CriterionClass, TAU_CRIT};
use crate::scalar::{lit, Real};
use crate::tracer::{trace_all_from_zeros, Arc, ArcOrigin, TerminationKind, TraceConfig};

pub use faces::{extract_faces, teichmuller_sum, validate_faces, FaceCheck, FaceCorner, PolygonFace, VertexKind};
pub use locus::{
    gamma_locus, survey, BranchShape, GammaLocus, LocusBranch, LocusFamily, SurveyCell, SurveyGrid, SurveyOptions,
    SurveyRegion,
};

/// Topology of a critical graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "EqualZeros_Real")]
    EqualZerosReal,
    #[serde(rename = "EqualZeros_Imaginary")]
    EqualZerosImaginary,
    #[serde(rename = "EqualZeros_Generic")]
    EqualZerosGeneric,
    ZeroAtOrigin,
    #[serde(rename = "RealPair_SegmentPlusLoop")]
    RealPairSegmentPlusLoop,
    #[serde(rename = "ConjugatePair_LoopThroughBoth")]
    ConjugatePairLoopThroughBoth,
    #[serde(rename = "OneReality_SpiralPlusCritical")]
    OneRealitySpiralPlusCritical,
    #[serde(rename = "NoCritical_SpiralCases")]
    NoCriticalSpiralCases,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::EqualZerosReal => "EqualZeros_Real",
            CaseLabel::EqualZerosImaginary => "EqualZeros_Imaginary",
            CaseLabel::EqualZerosGeneric => "EqualZeros_Generic",
            CaseLabel::ZeroAtOrigin => "ZeroAtOrigin",
            CaseLabel::RealPairSegmentPlusLoop => "RealPair_SegmentPlusLoop",
            CaseLabel::ConjugatePairLoopThroughBoth => "ConjugatePair_LoopThroughBoth",
            CaseLabel::OneRealitySpiralPlusCritical => "OneReality_SpiralPlusCritical",
            CaseLabel::NoCriticalSpiralCases => "NoCritical_SpiralCases",
        }
    }

    /// Criterion class compatible with the label, for two distinct nonzero zeros.
    fn compatible(self, class: CriterionClass) -> bool {
        match self {
            CaseLabel::RealPairSegmentPlusLoop | CaseLabel::ConjugatePairLoopThroughBoth => {
                class == CriterionClass::BothReal
            }
            CaseLabel::OneRealitySpiralPlusCritical => {
                matches!(class, CriterionClass::PlusReal | CriterionClass::MinusReal)
            }
            CaseLabel::NoCriticalSpiralCases => class == CriterionClass::Neither,
            _ => true,
        }
    }
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A traced configuration forbidden by the corollaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuardViolation {
    /// Two arcs from the same zero both end at the origin.
    SameZeroTwiceToOrigin(ZeroId),
    /// The criterion holds, yet arcs from both zeros end at the origin.
    BothZerosToOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalGraph<T> {
    pub qdiff: QDiff<T>,
    pub arcs: Vec<Arc<T>>,
    pub case_label: CaseLabel,
    /// Arcs ending in a short trajectory or a loop.
    pub critical_count: usize,
    /// `None` when a zero is at the origin or the zeros coincide.
    pub criterion: Option<Criterion<T>>,
    /// Whether the traced evidence agrees with the criterion.
    pub agreement: Option<bool>,
    pub boundary_ambiguous: bool,
    /// Zero through which a loop passes, when exactly one zero carries loops.
    pub loop_zero: Option<ZeroId>,
    pub guard_violations: Vec<GuardViolation>,
}

impl<T: Real> CriticalGraph<T> {
    /// Disagreement between tracing and the criterion outside the ambiguity band.
    pub fn is_validation_failure(&self) -> bool {
        self.agreement == Some(false) && !self.boundary_ambiguous
    }

    pub fn short_trajectories(&self) -> impl Iterator<Item = &Arc<T>> {
        self.arcs.iter().filter(|a| matches!(a.termination, TerminationKind::ShortTrajectory { .. }))
    }

    pub fn zero_loops(&self) -> impl Iterator<Item = &Arc<T>> {
        self.arcs.iter().filter(|a| a.is_zero_loop())
    }

    /// A short trajectory or a loop through a zero was traced.
    pub fn has_critical_evidence(&self) -> bool {
        self.short_trajectories().next().is_some() || self.zero_loops().next().is_some()
    }
}

fn origin_bound_by_zero<T: Real>(arcs: &[Arc<T>]) -> (usize, usize) {
    let mut counts = (0, 0);
    for arc in arcs.iter().filter(|a| a.termination.reaches_origin()) {
        match arc.origin {
            ArcOrigin::Zero { id: ZeroId::A, .. } => counts.0 += 1,
            ArcOrigin::Zero { id: ZeroId::B, .. } => counts.1 += 1,
            ArcOrigin::Seed(_) => {}
        }
    }
    counts
}

/// Checks the traced arcs against the corollaries on origin-bound trajectories.
pub fn corollary_guards<T: Real>(q: &QDiff<T>, arcs: &[Arc<T>], class: Option<CriterionClass>) -> Vec<GuardViolation> {
    let mut out = Vec::new();
    let (from_a, from_b) = origin_bound_by_zero(arcs);
    if from_a >= 2 {
        out.push(GuardViolation::SameZeroTwiceToOrigin(ZeroId::A));
    }
    if from_b >= 2 && !q.is_degenerate_equal() {
        out.push(GuardViolation::SameZeroTwiceToOrigin(ZeroId::B));
    }
    if class.is_some_and(|c| c.holds()) && from_a >= 1 && from_b >= 1 {
        out.push(GuardViolation::BothZerosToOrigin);
    }
    out
}

fn equal_zeros_label<T: Real>(q: &QDiff<T>) -> CaseLabel {
    let a = q.a();
    let band = lit::<T>(1e-12) * a.norm();
    if a.im.abs() <= band {
        CaseLabel::EqualZerosReal
    } else if a.re.abs() <= band {
        CaseLabel::EqualZerosImaginary
    } else {
        CaseLabel::EqualZerosGeneric
    }
}

fn distinct_shorts<T: Real>(arcs: &[Arc<T>]) -> usize {
    arcs.iter().filter(|a| matches!(a.termination, TerminationKind::ShortTrajectory { .. })).count()
}

/// Labels already-traced arcs; see [`classify_graph`].
pub fn assemble_graph<T: Real>(q: &QDiff<T>, arcs: Vec<Arc<T>>) -> Result<CriticalGraph<T>> {
    assemble_graph_with_tolerance(q, arcs, lit(TAU_CRIT))
}

/// As [`assemble_graph`], with relative criterion tolerance `tau`.
pub fn assemble_graph_with_tolerance<T: Real>(q: &QDiff<T>, arcs: Vec<Arc<T>>, tau: T) -> Result<CriticalGraph<T>> {
    let critical_count = arcs.iter().filter(|a| a.termination.is_critical()).count();
    let loop_zeros: Vec<ZeroId> = {
        let mut ids: Vec<_> = arcs.iter().filter(|a| a.is_zero_loop()).filter_map(|a| a.start_zero()).collect();
        ids.sort();
        ids.dedup();
        ids
    };
    let loop_zero = if loop_zeros.len() == 1 { Some(loop_zeros[0]) } else { None };
    let n_loops = arcs.iter().filter(|a| a.is_zero_loop()).count();
    let n_shorts = distinct_shorts(&arcs);

    let (case_label, criterion) = if q.is_degenerate_equal() {
        (equal_zeros_label(q), None)
    } else if q.is_degenerate_zero() {
        (CaseLabel::ZeroAtOrigin, None)
    } else {
        let label = if n_shorts >= 2 {
            CaseLabel::ConjugatePairLoopThroughBoth
        } else if n_shorts >= 1 && n_loops >= 1 {
            CaseLabel::RealPairSegmentPlusLoop
        } else if n_shorts + n_loops >= 1 {
            CaseLabel::OneRealitySpiralPlusCritical
        } else {
            CaseLabel::NoCriticalSpiralCases
        };
        (label, Some(criterion_with_tolerance(q, tau)?))
    };
    let agreement = criterion.map(|c| case_label.compatible(c.class));
    let boundary_ambiguous = criterion.is_some_and(|c| c.boundary_ambiguous);
    let guard_violations = corollary_guards(q, &arcs, criterion.map(|c| c.class));
    Ok(CriticalGraph {
        qdiff: *q,
        arcs,
        case_label,
        critical_count,
        criterion,
        agreement,
        boundary_ambiguous,
        loop_zero,
        guard_violations,
    })
}

/// Traces every horizontal trajectory leaving the zeros and labels the topology
/// from the traced terminations, cross-checked against the criterion.
pub fn classify_graph<T: Real>(q: &QDiff<T>, cfg: &TraceConfig<T>) -> Result<CriticalGraph<T>> {
    cfg.validate()?;
    let arcs = trace_all_from_zeros(q, cfg)?;
    assemble_graph(q, arcs)
}

/// As [`classify_graph`], with relative criterion tolerance `tau`.
pub fn classify_graph_with_tolerance<T: Real>(q: &QDiff<T>, cfg: &TraceConfig<T>, tau: T) -> Result<CriticalGraph<T>> {
    cfg.validate()?;
    if !(tau > T::zero()) {
        return Err(QdError::InvalidArgument("criterion tolerance must be positive".into()));
    }
    let arcs = trace_all_from_zeros(q, cfg)?;
    assemble_graph_with_tolerance(q, arcs, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn graph(a: (f64, f64), b: (f64, f64)) -> CriticalGraph<f64> {
        let q = QDiff::from_parts(a, b).unwrap();
        classify_graph(&q, &TraceConfig::default()).unwrap()
    }

    #[test]
    fn real_pair_has_segment_and_loop() {
        let g = graph((1.0, 0.0), (4.0, 0.0));
        assert_eq!(g.case_label, CaseLabel::RealPairSegmentPlusLoop);
        assert_eq!(g.critical_count, 2);
        assert_eq!(g.agreement, Some(true));
        assert!(g.loop_zero.is_some());
        assert!(g.guard_violations.is_empty());
    }

    #[test]
    fn szego_case() {
        let g = graph((1.0, 0.0), (1.0, 0.0));
        assert_eq!(g.case_label, CaseLabel::EqualZerosReal);
        let lp = g.zero_loops().next().expect("loop");
        for z in &lp.samples {
            let v = (z * (Complex::new(1.0, 0.0) - z).exp()).norm();
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn spiral_case_has_no_critical_arc() {
        let g = graph((1.0, 0.0), (3.0, 4.0));
        assert_eq!(g.case_label, CaseLabel::NoCriticalSpiralCases);
        assert_eq!(g.critical_count, 0);
        assert_eq!(g.agreement, Some(true));
    }

    #[test]
    fn other_labels() {
        assert_eq!(graph((0.0, 0.0), (4.0, 0.0)).case_label, CaseLabel::ZeroAtOrigin);
        assert_eq!(graph((0.0, 1.0), (0.0, 1.0)).case_label, CaseLabel::EqualZerosImaginary);
        assert_eq!(graph((1.0, 1.0), (1.0, 1.0)).case_label, CaseLabel::EqualZerosGeneric);
        let s = 2.0 * 2f64.sqrt();
        let g = graph((-1.0, s), (-1.0, -s));
        assert_eq!(g.case_label, CaseLabel::ConjugatePairLoopThroughBoth);
        assert_eq!(g.critical_count, 2);
        let g = graph((1.0, 0.0), (0.0, 2.0));
        assert_eq!(g.case_label, CaseLabel::OneRealitySpiralPlusCritical);
        assert_eq!(g.agreement, Some(true));
    }

    #[test]
    fn label_strings_round_trip() {
        let s = serde_json::to_string(&CaseLabel::RealPairSegmentPlusLoop).unwrap();
        assert_eq!(s, "\"RealPair_SegmentPlusLoop\"");
        let back: CaseLabel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, CaseLabel::RealPairSegmentPlusLoop);
    }
}
