//! Integration of horizontal and vertical trajectories.
//!
//! A trajectory is a level curve of `Re(κ·F)` where `F' = √D(z)/z`
//! (`κ = 1` horizontal, `κ = -i` vertical). We integrate the unit-speed field
//! `u(z) = i·z/(κ√D(z))` with an embedded Dormand–Prince 5(4) pair, continue
//! `√D` along the way by nearest-root selection, and after every accepted step
//! project back onto the level set along the orthogonal direction.

mod termination;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use termination::{
    circle_exit, Hit, Home, InfinityDirection, TerminationDetector, TerminationKind, Thresholds,
};

use crate::differential::{launch_directions, QDiff, TrajectoryKind, ZeroId};
use crate::error::{QdError, Result};
use crate::quadrature::gl4;
use crate::scalar::{cis, hausdorff, lit, polyline_distance, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig<T> {
    pub rtol: T,
    pub atol: T,
    /// Launch offset is `launch_offset · max(1, |a-b|)`.
    pub launch_offset: T,
    /// `R_max = r_max · max(1, |a|, |b|)`.
    pub r_max: T,
    /// `r_min = r_min · min(1, |a|, |b|)` over nonzero zeros.
    pub r_min: T,
    /// `ε_hit = eps_hit · max(1, |a-b|)`.
    pub eps_hit: T,
    pub max_steps: usize,
    /// Allowed level drift per unit arc length.
    pub level_tol: T,
    pub spiral_windings: u32,
    pub spiral_shrink: T,
    /// A step never exceeds this fraction of the distance to the nearest critical point.
    pub step_fraction: T,
}

impl<T: Real> Default for TraceConfig<T> {
    fn default() -> Self {
        Self {
            rtol: lit(1e-10),
            atol: lit(1e-12),
            launch_offset: lit(1e-6),
            r_max: lit(20.0),
            r_min: lit(1e-8),
            eps_hit: lit(1e-5),
            max_steps: 200_000,
            level_tol: lit(1e-7),
            spiral_windings: 3,
            spiral_shrink: lit(4.0),
            step_fraction: lit(0.25),
        }
    }
}

impl<T: Real> TraceConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("launch_offset", self.launch_offset),
            ("r_max", self.r_max),
            ("r_min", self.r_min),
            ("eps_hit", self.eps_hit),
            ("level_tol", self.level_tol),
            ("spiral_shrink", self.spiral_shrink),
            ("step_fraction", self.step_fraction),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(QdError::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.max_steps == 0 {
            return Err(QdError::InvalidArgument("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn thresholds(&self, q: &QDiff<T>) -> Thresholds<T> {
        let sep = T::one().max((q.a() - q.b()).norm());
        let mut small = T::one();
        for z in q.zeros() {
            small = small.min(z.point.norm());
        }
        Thresholds {
            r_max: self.r_max * q.scale(),
            r_min: self.r_min * small,
            eps_hit: self.eps_hit * sep,
            spiral_windings: self.spiral_windings,
            spiral_shrink: self.spiral_shrink,
        }
    }

    pub fn launch_distance(&self, q: &QDiff<T>) -> T {
        self.launch_offset * T::one().max((q.a() - q.b()).norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ArcOrigin<T> {
    Zero { id: ZeroId, ray: usize },
    Seed(Complex<T>),
}

/// One traced trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc<T> {
    pub kind: TrajectoryKind,
    pub origin: ArcOrigin<T>,
    pub launch_angle: T,
    /// Polyline; arcs from a zero start at the zero itself and arcs ending at a
    /// critical point end exactly on it.
    pub samples: Vec<Complex<T>>,
    pub termination: TerminationKind<T>,
    /// Conserved value `Re(κF)` relative to the starting point (zero by construction).
    pub level: T,
    /// Largest residual of the running level after projection.
    pub level_drift: T,
    pub length: T,
    pub steps: usize,
}

impl<T: Real> Arc<T> {
    pub fn start(&self) -> Complex<T> {
        self.samples[0]
    }

    pub fn end(&self) -> Complex<T> {
        *self.samples.last().unwrap()
    }

    pub fn start_zero(&self) -> Option<ZeroId> {
        match self.origin {
            ArcOrigin::Zero { id, .. } => Some(id),
            ArcOrigin::Seed(_) => None,
        }
    }

    /// Sample at (approximately) half the arc length.
    pub fn midpoint(&self) -> Complex<T> {
        let half = self.length / lit(2.0);
        let mut acc = T::zero();
        for w in self.samples.windows(2) {
            let seg = (w[1] - w[0]).norm();
            if acc + seg >= half && seg > T::zero() {
                return w[0] + (w[1] - w[0]) * ((half - acc) / seg);
            }
            acc = acc + seg;
        }
        self.end()
    }

    /// Whether the arc is a loop that passes through a zero of `q`.
    pub fn is_zero_loop(&self) -> bool {
        matches!(self.termination, TerminationKind::Loop { .. }) && self.start_zero().is_some()
    }
}

// Dormand–Prince 5(4) tableau.
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Field<'a, T> {
    q: &'a QDiff<T>,
    kappa: Complex<T>,
}

impl<'a, T: Real> Field<'a, T> {
    /// Unit field direction at `z`, with `√D` taken nearest `reference`.
    fn direction(&self, z: Complex<T>, reference: Complex<T>) -> (Complex<T>, Complex<T>) {
        let s = self.q.sqrt_d_near(z, reference);
        let u = Complex::new(T::zero(), T::one()) * z / (self.kappa * s);
        let n = u.norm();
        (if n > T::zero() { u / n } else { u }, s)
    }

    /// Moves `z1` back onto the level set along the orthogonal direction, given
    /// the level `level0` and branch `s0` at the chord start `z0`. Returns the
    /// corrected point, its branch value and level.
    fn project(&self, z0: Complex<T>, s0: Complex<T>, level0: T, z1: Complex<T>) -> (Complex<T>, Complex<T>, T) {
        let chord = (z1 - z0).norm();
        let mut z = z1;
        let mut s = self.q.sqrt_d_near(z, s0);
        let mut level = level0 + self.chord_level(z0, s0, z, s);
        for _ in 0..2 {
            let g = self.kappa * s / z;
            let gn = g.norm();
            if gn == T::zero() || level == T::zero() {
                break;
            }
            let delta = -level / gn;
            if delta.abs() > lit::<T>(0.1) * chord {
                break;
            }
            z = z + g.conj() / gn * delta;
            s = self.q.sqrt_d_near(z, s);
            level = level0 + self.chord_level(z0, s0, z, s);
        }
        (z, s, level)
    }

    /// `Re(κ ∫ √D/z dz)` along the chord `z0 → z1`, with the branch interpolated from `s0` to `s1`.
    fn chord_level(&self, z0: Complex<T>, s0: Complex<T>, z1: Complex<T>, s1: Complex<T>) -> T {
        let dz = z1 - z0;
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(x, w) in gl4() {
            let t = (lit::<T>(x) + T::one()) / lit(2.0);
            let p = z0 + dz * t;
            let s = self.q.sqrt_d_near(p, s0 + (s1 - s0) * t);
            acc = acc + s / p * lit::<T>(w);
        }
        (self.kappa * acc * dz / lit::<T>(2.0)).re
    }
}

/// Conserved level `Re(κ ∫ √D/z dz)` accumulated along a polyline, continuing
/// the branch from `seed` at the first vertex. Used to audit traced arcs.
pub fn level_along<T: Real>(q: &QDiff<T>, kind: TrajectoryKind, samples: &[Complex<T>], seed: Complex<T>) -> Vec<T> {
    let field = Field { q, kappa: kind.level_factor() };
    let mut out = Vec::with_capacity(samples.len());
    let mut level = T::zero();
    let mut s = seed;
    out.push(level);
    for w in samples.windows(2) {
        let s1 = q.sqrt_d_near(w[1], s);
        level = level + field.chord_level(w[0], s, w[1], s1);
        out.push(level);
        s = s1;
    }
    out
}

fn dist_critical<T: Real>(q: &QDiff<T>, z: Complex<T>) -> T {
    let mut d = z.norm();
    for zero in q.zeros() {
        d = d.min((z - zero.point).norm());
    }
    d
}

struct Start<T> {
    origin: ArcOrigin<T>,
    anchor: Option<Complex<T>>,
    point: Complex<T>,
    direction: Complex<T>,
    launch_angle: T,
}

fn integrate<T: Real>(q: &QDiff<T>, kind: TrajectoryKind, start: Start<T>, cfg: &TraceConfig<T>) -> Result<Arc<T>> {
    cfg.validate()?;
    let field = Field { q, kappa: kind.level_factor() };
    let thresholds = cfg.thresholds(q);

    let z0 = start.point;
    let d0 = q.eval_d(z0);
    if d0.norm() == T::zero() || z0.norm() == T::zero() {
        return Err(QdError::ZeroField);
    }
    let mut s = d0.sqrt();
    let (u0, _) = field.direction(z0, s);
    if (u0 * start.direction.conj()).re < T::zero() {
        s = -s;
    }

    let (targets, home) = match start.origin {
        ArcOrigin::Zero { id, .. } => {
            let targets = q.zeros().into_iter().filter(|z| z.id != id).map(|z| (z.id, z.point)).collect();
            (targets, Some(Home { point: start.anchor.unwrap() }))
        }
        ArcOrigin::Seed(p) => (q.zeros().into_iter().map(|z| (z.id, z.point)).collect(), Some(Home { point: p })),
    };
    let mut detector = TerminationDetector::new(thresholds, targets, home);

    let mut samples = Vec::new();
    if let Some(anchor) = start.anchor {
        samples.push(anchor);
    }
    samples.push(z0);

    let mut z = z0;
    let mut level = T::zero();
    let mut drift = T::zero();
    let mut length = T::zero();
    let mut h = cfg.step_fraction * dist_critical(q, z) * lit(0.5);
    let mut steps = 0usize;
    let safety = lit::<T>(0.9);
    let fifth = lit::<T>(0.2);

    let termination = loop {
        if steps >= cfg.max_steps {
            break TerminationKind::StepBudgetExceeded;
        }
        let hmax = cfg.step_fraction * dist_critical(q, z);
        h = h.min(hmax);
        if h <= T::epsilon() * z.norm().max(T::min_positive_value()) {
            break TerminationKind::StepBudgetExceeded;
        }

        let mut k = [Complex::new(T::zero(), T::zero()); 7];
        k[0] = field.direction(z, s).0;
        for i in 0..6 {
            let mut p = z;
            for (j, kj) in k.iter().enumerate().take(i + 1) {
                let a = DP_A[i][j];
                if a != 0.0 {
                    p = p + *kj * (h * lit(a));
                }
            }
            k[i + 1] = field.direction(p, s).0;
        }
        let mut incr = Complex::new(T::zero(), T::zero());
        let mut err = Complex::new(T::zero(), T::zero());
        for i in 0..7 {
            incr = incr + k[i] * lit::<T>(DP_B[i]);
            err = err + k[i] * lit::<T>(DP_E[i]);
        }
        let err = (err * h).norm();
        let tol = cfg.atol + cfg.rtol * z.norm();
        if err > tol {
            h = h * (safety * (tol / err).powf(fifth)).max(fifth);
            continue;
        }

        let (z_new, s_new, level_new) = field.project(z, s, level, z + incr * h);
        steps += 1;
        length = length + (z_new - z).norm();
        drift = drift.max(level_new.abs());
        let level_prev = level;
        level = level_new;
        samples.push(z_new);

        if let Some(hit) = detector.observe(z, z_new) {
            let mut endpoint = hit.endpoint;
            if matches!(hit.kind, TerminationKind::EscapeToInfinity { .. }) {
                // the interpolated exit point lies on a chord, not on the trajectory
                endpoint = if hit.replace_last {
                    field.project(z, s, level_prev, endpoint).0
                } else {
                    field.project(z_new, s_new, level_new, endpoint).0
                };
            }
            if hit.replace_last {
                let last = samples.len() - 1;
                length = length - (z_new - z).norm() + (endpoint - z).norm();
                samples[last] = endpoint;
            } else {
                length = length + (endpoint - z_new).norm();
                samples.push(endpoint);
            }
            break hit.kind;
        }

        z = z_new;
        s = s_new;
        let grow = if err > T::zero() { safety * (tol / err).powf(fifth) } else { lit(5.0) };
        h = h * grow.min(lit(5.0)).max(fifth);
    };

    if let Some(anchor) = start.anchor {
        length = length + (z0 - anchor).norm();
    }
    Ok(Arc {
        kind,
        origin: start.origin,
        launch_angle: start.launch_angle,
        samples,
        termination,
        level: T::zero(),
        level_drift: drift,
        length,
        steps,
    })
}

/// Traces the trajectory through `seed` heading along `direction`.
///
/// A seed lying within twice the launch offset of a zero is treated as a
/// launch from that zero along the nearest valid ray.
pub fn trace<T: Real>(
    q: &QDiff<T>,
    seed: Complex<T>,
    direction: Complex<T>,
    kind: TrajectoryKind,
    cfg: &TraceConfig<T>,
) -> Result<Arc<T>> {
    if direction.norm() == T::zero() {
        return Err(QdError::InvalidArgument("direction must be nonzero".into()));
    }
    let offset = cfg.launch_distance(q);
    for zero in q.zeros() {
        if (seed - zero.point).norm() <= offset * lit(2.0) {
            let rays = launch_directions(q, zero.id, kind)?;
            let (ray, dev) = crate::differential::ray_deviation(&rays, direction.arg());
            if dev > T::FRAC_PI_4() {
                return Err(QdError::Domain(format!(
                    "direction deviates {dev} rad from every launch ray at {}",
                    zero.point
                )));
            }
            return launch(q, zero.id, ray, kind, cfg);
        }
    }
    if dist_critical(q, seed) == T::zero() {
        return Err(QdError::ZeroField);
    }
    let dir = direction / direction.norm();
    integrate(
        q,
        kind,
        Start { origin: ArcOrigin::Seed(seed), anchor: None, point: seed, direction: dir, launch_angle: dir.arg() },
        cfg,
    )
}

/// Traces the trajectory leaving zero `id` along launch ray `ray`.
pub fn launch<T: Real>(q: &QDiff<T>, id: ZeroId, ray: usize, kind: TrajectoryKind, cfg: &TraceConfig<T>) -> Result<Arc<T>> {
    let rays = launch_directions(q, id, kind)?;
    let angle = *rays
        .get(ray)
        .ok_or_else(|| QdError::InvalidArgument(format!("ray index {ray} out of range")))?;
    let zero = q.zero(id);
    let dir = cis(angle);
    let point = zero + dir * cfg.launch_distance(q);
    integrate(
        q,
        kind,
        Start { origin: ArcOrigin::Zero { id, ray }, anchor: Some(zero), point, direction: dir, launch_angle: angle },
        cfg,
    )
}

/// Every launch from every zero, ordered by `(zero, ray)`, without deduplication.
pub fn trace_launches<T: Real>(q: &QDiff<T>, kind: TrajectoryKind, cfg: &TraceConfig<T>) -> Result<Vec<Arc<T>>> {
    let mut jobs = Vec::new();
    for zero in q.zeros() {
        let n = launch_directions(q, zero.id, kind)?.len();
        jobs.extend((0..n).map(|r| (zero.id, r)));
    }
    jobs.par_iter().map(|&(id, r)| launch(q, id, r, kind, cfg)).collect()
}

/// Two traced arcs that are the same critical trajectory traversed from opposite ends.
pub fn same_critical_trajectory<T: Real>(x: &Arc<T>, y: &Arc<T>, tol: T) -> bool {
    let ends = |a: &Arc<T>| (a.start(), a.end());
    let (xs, xe) = ends(x);
    let (ys, ye) = ends(y);
    let close = |p: Complex<T>, r: Complex<T>| (p - r).norm() <= tol;
    let reversed = close(xs, ye) && close(xe, ys);
    if !(x.termination.is_critical() && y.termination.is_critical() && reversed) {
        return false;
    }
    polyline_distance(y.midpoint(), &x.samples) <= tol && polyline_distance(x.midpoint(), &y.samples) <= tol
}

/// Horizontal arcs from all zeros with critical trajectories traced from both
/// ends kept once (the earlier launch in `(zero, ray)` order wins).
pub fn trace_all_from_zeros<T: Real>(q: &QDiff<T>, cfg: &TraceConfig<T>) -> Result<Vec<Arc<T>>> {
    let all = trace_launches(q, TrajectoryKind::Horizontal, cfg)?;
    Ok(dedup_arcs(q, all, cfg))
}

pub fn dedup_arcs<T: Real>(q: &QDiff<T>, arcs: Vec<Arc<T>>, cfg: &TraceConfig<T>) -> Vec<Arc<T>> {
    let tol = cfg.thresholds(q).eps_hit * lit(100.0);
    let mut kept: Vec<Arc<T>> = Vec::with_capacity(arcs.len());
    for arc in arcs {
        if !kept.iter().any(|k| same_critical_trajectory(k, &arc, tol)) {
            kept.push(arc);
        }
    }
    kept
}

/// Hausdorff distance between two traversals of the same trajectory.
pub fn reversal_distance<T: Real>(x: &Arc<T>, y: &Arc<T>) -> T {
    hausdorff(&x.samples, &y.samples)
}

/// Unit horizontal and vertical field directions at a regular point.
pub fn field_directions<T: Real>(q: &QDiff<T>, z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let s = q.eval_d(z).sqrt();
    let h = Field { q, kappa: TrajectoryKind::Horizontal.level_factor() }.direction(z, s).0;
    let v = Field { q, kappa: TrajectoryKind::Vertical.level_factor() }.direction(z, s).0;
    (h, v)
}
