//! Faces of the critical graph as ϖ-polygons and their Teichmüller sums.
//!
//! Arcs become edges of a planar graph whose vertices are the zeros, the
//! origin (only when an arc ends there) and infinity. Faces lie to the left
//! of their half-edges. Directions at infinity are taken in the chart
//! `u = 1/z`, where escaping trajectories arrive tangent to `±i`.

use std::collections::HashMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::CriticalGraph;
use crate::differential::{launch_directions, ray_deviation, CriticalPoint, Location, QDiff, TrajectoryKind, ZeroId};
use crate::error::{QdError, Result};
use crate::scalar::{lit, wrap_tau, Real};
use crate::tracer::{Arc, ArcOrigin, TerminationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexKind {
    Zero(ZeroId),
    Origin,
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceCorner<T> {
    pub vertex: VertexKind,
    pub point: CriticalPoint<T>,
    /// Interior angle `θ_j ∈ (0, 2π]`.
    pub angle: T,
    /// Order `n_j` of the critical point.
    pub multiplicity: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonFace<T> {
    pub corners: Vec<FaceCorner<T>>,
    pub contains_origin: bool,
    /// Boundary half-edges as `(arc index, traversed forward)`.
    pub boundary: Vec<(usize, bool)>,
}

impl<T: Real> PolygonFace<T> {
    /// `0` when the origin lies inside the face, `2` otherwise.
    pub fn expected_sum(&self) -> T {
        if self.contains_origin {
            T::zero()
        } else {
            lit(2.0)
        }
    }
}

/// `Σ β_j` with `β_j = 1 - θ_j (n_j + 2)/(2π)`.
pub fn teichmuller_sum<T: Real>(face: &PolygonFace<T>) -> T {
    face.corners.iter().fold(T::zero(), |acc, c| {
        acc + T::one() - c.angle * lit::<T>((c.multiplicity + 2) as f64) / T::TAU()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceCheck<T> {
    pub sum: T,
    pub expected: T,
    pub contains_origin: bool,
    pub corners: usize,
}

impl<T: Real> FaceCheck<T> {
    pub fn error(&self) -> T {
        (self.sum - self.expected).abs()
    }
}

struct HalfEdge<T> {
    arc: usize,
    forward: bool,
    from: VertexKind,
    to: VertexKind,
    /// Direction of departure at `from` (in the `u` chart at infinity).
    dir: T,
    /// Polyline in traversal order.
    points: Vec<Complex<T>>,
}

fn end_vertex<T: Real>(arc: &Arc<T>) -> Result<VertexKind> {
    match arc.termination {
        TerminationKind::ShortTrajectory { endpoint, .. } => Ok(VertexKind::Zero(endpoint)),
        TerminationKind::Loop { .. } => match arc.origin {
            ArcOrigin::Zero { id, .. } => Ok(VertexKind::Zero(id)),
            ArcOrigin::Seed(_) => Err(QdError::InvalidArgument("loop not anchored at a zero".into())),
        },
        TerminationKind::SpiralToOrigin { .. } | TerminationKind::RadialToOrigin => Ok(VertexKind::Origin),
        TerminationKind::EscapeToInfinity { .. } => Ok(VertexKind::Infinity),
        TerminationKind::StepBudgetExceeded => {
            Err(QdError::InsufficientResolution("an arc exhausted its step budget; faces are undefined".into()))
        }
    }
}

/// Direction of the launch ray at `zero` closest to the measured `direction`.
fn snap_to_ray<T: Real>(q: &QDiff<T>, zero: ZeroId, direction: T) -> Result<T> {
    let rays = launch_directions(q, zero, TrajectoryKind::Horizontal)?;
    let (idx, dev) = ray_deviation(&rays, direction);
    let spacing = T::TAU() / lit(rays.len() as f64);
    if dev > spacing / lit(4.0) {
        return Err(QdError::InsufficientResolution(format!(
            "arrival direction at {:?} deviates {dev} rad from every ray",
            q.zero(zero)
        )));
    }
    Ok(rays[idx])
}

/// Point where the polyline, walked backwards from its end, first reaches radius `rho`.
fn inward_crossing<T: Real>(points: &[Complex<T>], rho: T) -> Complex<T> {
    for w in points.windows(2).rev() {
        let (p, r) = (w[0], w[1]);
        if p.norm() >= rho && r.norm() <= rho {
            let (np, nr) = (p.norm(), r.norm());
            let t = if np == nr { T::zero() } else { (np - rho) / (np - nr) };
            return p + (r - p) * t;
        }
    }
    points[0]
}

fn build_half_edges<T: Real>(q: &QDiff<T>, arcs: &[Arc<T>]) -> Result<Vec<HalfEdge<T>>> {
    // common radius for ordering the arcs that end at the origin
    let origin_arcs: Vec<&Arc<T>> = arcs.iter().filter(|a| a.termination.reaches_origin()).collect();
    let rho = origin_arcs.iter().fold(T::zero(), |m, a| {
        let pts = &a.samples[..a.samples.len() - 1];
        m.max(pts.last().map_or(T::zero(), |z| z.norm()))
    });

    let mut out = Vec::with_capacity(2 * arcs.len());
    for (i, arc) in arcs.iter().enumerate() {
        let ArcOrigin::Zero { id, .. } = arc.origin else {
            return Err(QdError::InvalidArgument("faces need arcs launched from zeros".into()));
        };
        let to = end_vertex(arc)?;
        let n = arc.samples.len();
        if n < 3 {
            return Err(QdError::InsufficientResolution("arc too short to measure its end direction".into()));
        }
        let end = arc.samples[n - 1];
        let back_dir = match to {
            VertexKind::Zero(z) => snap_to_ray(q, z, (arc.samples[n - 2] - end).arg())?,
            VertexKind::Origin => inward_crossing(&arc.samples[..n - 1], rho).arg(),
            VertexKind::Infinity => -end.arg(),
        };
        out.push(HalfEdge {
            arc: i,
            forward: true,
            from: VertexKind::Zero(id),
            to,
            dir: wrap_tau(arc.launch_angle),
            points: arc.samples.clone(),
        });
        out.push(HalfEdge {
            arc: i,
            forward: false,
            from: to,
            to: VertexKind::Zero(id),
            dir: wrap_tau(back_dir),
            points: arc.samples.iter().rev().copied().collect(),
        });
    }
    Ok(out)
}

fn critical_point<T: Real>(q: &QDiff<T>, v: VertexKind) -> CriticalPoint<T> {
    match v {
        VertexKind::Zero(id) => {
            let z = q.zero(id);
            let order = q.zeros().iter().find(|x| x.point == z).map_or(1, |x| x.order);
            CriticalPoint { location: Location::Finite(z), order: order as i32, ray_count: order + 2 }
        }
        VertexKind::Origin => {
            let order = q.origin_order();
            CriticalPoint {
                location: Location::Finite(Complex::new(T::zero(), T::zero())),
                order,
                ray_count: if order == -1 { 1 } else { 0 },
            }
        }
        VertexKind::Infinity => CriticalPoint { location: Location::Infinity, order: -4, ray_count: 0 },
    }
}

/// Clockwise turn from `from` to `to`, in `(0, 2π]`.
fn clockwise<T: Real>(from: T, to: T) -> T {
    let d = wrap_tau(from - to);
    if d <= T::zero() {
        T::TAU()
    } else {
        d
    }
}

/// Interior angle at infinity between an arc arriving through the exit point
/// `p_in` and the next one leaving through `p_out`: `π` for each real-axis
/// direction swept counter-clockwise in the `z` plane.
fn angle_at_infinity<T: Real>(p_in: Complex<T>, p_out: Complex<T>, same_edge: bool) -> (T, T) {
    let start = p_in.arg();
    let span = if same_edge {
        T::TAU()
    } else {
        let s = wrap_tau(p_out.arg() - start);
        if s <= T::zero() {
            T::TAU()
        } else {
            s
        }
    };
    let pi = T::PI();
    let first = (start / pi).floor() + T::one();
    let mut count = 0u32;
    let mut k = first;
    while k * pi < start + span {
        count += 1;
        k = k + T::one();
    }
    (pi * lit(count as f64), span)
}

/// Faces of the traced critical graph with their corners.
pub fn extract_faces<T: Real>(graph: &CriticalGraph<T>) -> Result<Vec<PolygonFace<T>>> {
    let q = &graph.qdiff;
    let half = build_half_edges(q, &graph.arcs)?;
    if half.is_empty() {
        return Ok(Vec::new());
    }
    let mut outgoing: HashMap<VertexKind, Vec<usize>> = HashMap::new();
    for (i, h) in half.iter().enumerate() {
        outgoing.entry(h.from).or_default().push(i);
    }
    for list in outgoing.values() {
        for (x, &i) in list.iter().enumerate() {
            for &j in &list[x + 1..] {
                if half[i].from != VertexKind::Infinity && (half[i].dir - half[j].dir).abs() < lit(1e-12) {
                    return Err(QdError::InsufficientResolution(format!(
                        "two arcs leave {:?} along the same direction",
                        half[i].from
                    )));
                }
            }
        }
    }
    let next_of = |h: usize| -> usize {
        let twin = h ^ 1;
        let at = half[h].to;
        *outgoing[&at]
            .iter()
            .min_by(|&&x, &&y| {
                clockwise(half[twin].dir, half[x].dir).partial_cmp(&clockwise(half[twin].dir, half[y].dir)).unwrap()
            })
            .unwrap()
    };

    let mut seen = vec![false; half.len()];
    let mut faces = Vec::new();
    for start in 0..half.len() {
        if seen[start] {
            continue;
        }
        let mut corners = Vec::new();
        let mut boundary = Vec::new();
        let mut winding = T::zero();
        let mut h = start;
        loop {
            seen[h] = true;
            boundary.push((half[h].arc, half[h].forward));
            for w in half[h].points.windows(2) {
                if w[0].norm() > T::zero() && w[1].norm() > T::zero() {
                    winding = winding + (w[1] / w[0]).arg();
                }
            }
            let nx = next_of(h);
            let v = half[h].to;
            let angle = if v == VertexKind::Infinity {
                let p_in = *half[h].points.last().unwrap();
                let p_out = half[nx].points[0];
                let (angle, span) = angle_at_infinity(p_in, p_out, nx == (h ^ 1));
                winding = winding + span;
                angle
            } else {
                clockwise(half[h ^ 1].dir, half[nx].dir)
            };
            let point = critical_point(q, v);
            corners.push(FaceCorner { vertex: v, point, angle, multiplicity: point.order });
            h = nx;
            if h == start {
                break;
            }
            if seen[h] {
                return Err(QdError::InsufficientResolution("face traversal did not close".into()));
            }
        }
        let origin_is_vertex = outgoing.contains_key(&VertexKind::Origin);
        let contains_origin = !origin_is_vertex && (winding / T::TAU()).round() != T::zero();
        faces.push(PolygonFace { corners, contains_origin, boundary });
    }
    Ok(faces)
}

/// Teichmüller sums of every face against their expected values.
pub fn validate_faces<T: Real>(graph: &CriticalGraph<T>) -> Result<Vec<FaceCheck<T>>> {
    Ok(extract_faces(graph)?
        .iter()
        .map(|f| FaceCheck {
            sum: teichmuller_sum(f),
            expected: f.expected_sum(),
            contains_origin: f.contains_origin,
            corners: f.corners.len(),
        })
        .collect())
}
