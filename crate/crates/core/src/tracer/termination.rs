//! Classification of how a trajectory ends.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::differential::ZeroId;
use crate::scalar::{lit, segment_distance, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InfinityDirection {
    PlusI,
    MinusI,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TerminationKind<T> {
    /// Reached another zero; `gap` is the lateral miss distance at arrival.
    ShortTrajectory { endpoint: ZeroId, gap: T },
    /// Returned to its starting point after winding `winding` times about the origin.
    Loop { winding: i32, gap: T },
    SpiralToOrigin { windings: i32 },
    RadialToOrigin,
    EscapeToInfinity { direction: InfinityDirection },
    StepBudgetExceeded,
}

impl<T> TerminationKind<T> {
    /// Short trajectories and loops are the critical (finite) trajectories.
    pub fn is_critical(&self) -> bool {
        matches!(self, TerminationKind::ShortTrajectory { .. } | TerminationKind::Loop { .. })
    }

    pub fn reaches_origin(&self) -> bool {
        matches!(self, TerminationKind::SpiralToOrigin { .. } | TerminationKind::RadialToOrigin)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            TerminationKind::ShortTrajectory { .. } => "ShortTrajectory",
            TerminationKind::Loop { .. } => "Loop",
            TerminationKind::SpiralToOrigin { .. } => "SpiralToOrigin",
            TerminationKind::RadialToOrigin => "RadialToOrigin",
            TerminationKind::EscapeToInfinity { .. } => "EscapeToInfinity",
            TerminationKind::StepBudgetExceeded => "StepBudgetExceeded",
        }
    }
}

/// Distance thresholds for a particular differential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds<T> {
    pub r_max: T,
    pub r_min: T,
    pub eps_hit: T,
    pub spiral_windings: u32,
    pub spiral_shrink: T,
}

/// Where a trajectory started, for loop detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Home<T> {
    pub point: Complex<T>,
}

/// A fired termination together with the point that closes the polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit<T> {
    pub kind: TerminationKind<T>,
    /// Replaces the last accepted sample (exit point on the outer circle) or is
    /// appended after it (a zero or the loop start).
    pub endpoint: Complex<T>,
    pub replace_last: bool,
}

/// Incremental detector fed with every accepted integration step.
#[derive(Debug, Clone)]
pub struct TerminationDetector<T> {
    thresholds: Thresholds<T>,
    targets: Vec<(ZeroId, Complex<T>)>,
    home: Option<Home<T>>,
    armed: bool,
    cum_angle: T,
    marks: Vec<T>,
}

fn lateral_miss<T: Real>(target: Complex<T>, prev: Complex<T>, next: Complex<T>) -> T {
    let d = next - prev;
    let len = d.norm();
    if len == T::zero() {
        return (target - next).norm();
    }
    ((target - next) * d.conj()).im.abs() / len
}

impl<T: Real> TerminationDetector<T> {
    pub fn new(thresholds: Thresholds<T>, targets: Vec<(ZeroId, Complex<T>)>, home: Option<Home<T>>) -> Self {
        Self { thresholds, targets, home, armed: false, cum_angle: T::zero(), marks: Vec::new() }
    }

    /// Total signed angle swept about the origin so far.
    pub fn winding_angle(&self) -> T {
        self.cum_angle
    }

    fn winding_count(&self) -> i32 {
        (self.cum_angle / T::TAU()).round().to_i32().unwrap_or(0)
    }

    /// Feeds the step `prev → next`; returns the termination if one fires.
    pub fn observe(&mut self, prev: Complex<T>, next: Complex<T>) -> Option<Hit<T>> {
        let th = self.thresholds;
        if prev.norm() > T::zero() && next.norm() > T::zero() {
            self.cum_angle = self.cum_angle + (next / prev).arg();
        }

        for &(id, zero) in &self.targets {
            if segment_distance(zero, prev, next) < th.eps_hit {
                let gap = lateral_miss(zero, prev, next);
                return Some(Hit {
                    kind: TerminationKind::ShortTrajectory { endpoint: id, gap },
                    endpoint: zero,
                    replace_last: false,
                });
            }
        }

        if let Some(home) = self.home {
            if self.armed && segment_distance(home.point, prev, next) < th.eps_hit {
                let gap = lateral_miss(home.point, prev, next);
                if home.point.norm() > T::zero() && next.norm() > T::zero() {
                    self.cum_angle = self.cum_angle + (home.point / next).arg();
                }
                return Some(Hit {
                    kind: TerminationKind::Loop { winding: self.winding_count(), gap },
                    endpoint: home.point,
                    replace_last: false,
                });
            }
            // armed only once a full step has been taken away from home
            if (next - home.point).norm() > lit::<T>(100.0) * th.eps_hit {
                self.armed = true;
            }
        }

        if next.norm() > th.r_max {
            let exit = circle_exit(prev, next, th.r_max);
            let direction = if exit.im >= T::zero() { InfinityDirection::PlusI } else { InfinityDirection::MinusI };
            return Some(Hit {
                kind: TerminationKind::EscapeToInfinity { direction },
                endpoint: exit,
                replace_last: true,
            });
        }

        if next.norm() < th.r_min {
            let kind = if self.cum_angle.abs() >= T::TAU() {
                TerminationKind::SpiralToOrigin { windings: self.winding_count() }
            } else {
                TerminationKind::RadialToOrigin
            };
            return Some(Hit { kind, endpoint: Complex::new(T::zero(), T::zero()), replace_last: false });
        }

        // record |z| at each completed winding; fire once the decay is established
        let completed = (self.cum_angle.abs() / T::TAU()).floor().to_usize().unwrap_or(0);
        while self.marks.len() < completed {
            self.marks.push(next.norm());
        }
        let k = self.marks.len();
        if k >= th.spiral_windings as usize && k >= 2 {
            let r = next.norm();
            let shrinking = self.marks[k - 1] < self.marks[k - 2] && r <= self.marks[k - 1];
            if shrinking && r * th.spiral_shrink <= self.marks[0] {
                return Some(Hit {
                    kind: TerminationKind::SpiralToOrigin { windings: self.winding_count() },
                    endpoint: Complex::new(T::zero(), T::zero()),
                    replace_last: false,
                });
            }
        }
        None
    }
}

/// Point where the segment `inside → outside` crosses `|z| = radius`.
pub fn circle_exit<T: Real>(inside: Complex<T>, outside: Complex<T>, radius: T) -> Complex<T> {
    let d = outside - inside;
    let a = d.norm_sqr();
    let b = (inside * d.conj()).re * lit(2.0);
    let c = inside.norm_sqr() - radius * radius;
    let disc = (b * b - lit::<T>(4.0) * a * c).max(T::zero());
    let t = (-b + disc.sqrt()) / (lit::<T>(2.0) * a);
    inside + d * t.max(T::zero()).min(T::one())
}
