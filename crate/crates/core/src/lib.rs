//! Critical graphs of the quadratic differential `-(z-a)(z-b)/z^2 dz^2`.
//!
//! The numerics are generic over the real scalar type through [`Real`];
//! the `*64` aliases below fix it to `f64`, which is what the CLI uses.

pub mod differential;
pub mod error;
pub mod graph;
pub mod laguerre;
pub mod periods;
pub mod quadrature;
pub mod scalar;
pub mod tracer;

pub use differential::{
    canonicalize, continue_sqrt_d, eval_d, launch_directions, residue_infinity, residue_origin, BranchPath,
    Canonical, CriticalPoint, Location, QDiff, Sheet, TrajectoryKind, Zero, ZeroId,
};
pub use error::{QdError, Result};
pub use graph::{classify_graph, classify_graph_with_tolerance, gamma_locus, survey, teichmuller_sum, CaseLabel, CriticalGraph, PolygonFace};
pub use num_complex::Complex;
pub use periods::{
    criterion_detail, criterion_reality, lemma_check, period_integral, Criterion, CriterionClass, PeriodResult,
};
pub use scalar::Real;
pub use tracer::{trace, trace_all_from_zeros, Arc, ArcOrigin, TerminationKind, TraceConfig};

pub type C64 = Complex<f64>;
pub type QDiff64 = QDiff<f64>;
pub type Arc64 = Arc<f64>;
pub type TraceConfig64 = TraceConfig<f64>;
pub type CriticalGraph64 = CriticalGraph<f64>;
