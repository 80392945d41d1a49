//! The quadratic differential `-(z-a)(z-b)/z^2 dz^2` in canonical form.
//!
//! Everything here is a pure function of the zero pair `(a, b)`: evaluation of
//! the discriminant `D(z) = (z-a)(z-b)`, sheet-tracked continuation of `√D`,
//! the residues of `√D(z)/z` at the two poles, and the launch geometry of
//! trajectories at the zeros.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};
use crate::scalar::{is_finite, lit, wrap_pi, wrap_tau, Real};

/// Relative band inside which two zeros are treated as coincident.
pub const EQUAL_ZEROS_BAND: f64 = 1e-12;
/// Band on `|ab|` inside which one zero is treated as sitting at the origin.
pub const ZERO_AT_ORIGIN_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZeroId {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrajectoryKind {
    Horizontal,
    Vertical,
}

impl TrajectoryKind {
    /// Factor `κ` such that the conserved quantity is `Re(κ ∫ √D/z dz)`.
    pub(crate) fn level_factor<T: Real>(self) -> Complex<T> {
        match self {
            TrajectoryKind::Horizontal => Complex::new(T::one(), T::zero()),
            TrajectoryKind::Vertical => Complex::new(T::zero(), -T::one()),
        }
    }
}

/// Choice of sign for a square root whose sheet is otherwise ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Sheet::Plus => T::one(),
            Sheet::Minus => -T::one(),
        }
    }
}

/// Location of a critical point: a finite point or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Location<T> {
    Finite(Complex<T>),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint<T> {
    pub location: Location<T>,
    /// 1 simple zero, 2 double zero, -1 simple pole, -2 double pole, -4 pole at infinity.
    pub order: i32,
    /// Number of horizontal trajectories leaving the point (`order + 2` for zeros and simple poles).
    pub ray_count: u32,
}

/// A zero of the differential together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero<T> {
    pub id: ZeroId,
    pub point: Complex<T>,
    pub order: u32,
}

/// Canonical differential `-(z-a)(z-b)/z^2 dz^2`.
///
/// Near-coincidences are snapped on construction: zeros closer than
/// [`EQUAL_ZEROS_BAND`] become exactly equal, and when `|ab|` falls below
/// [`ZERO_AT_ORIGIN_BAND`] the smaller zero is moved to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QDiff<T> {
    a: Complex<T>,
    b: Complex<T>,
    degenerate_equal: bool,
    degenerate_zero: bool,
}

impl<T: Real> QDiff<T> {
    pub fn new(a: Complex<T>, b: Complex<T>) -> Result<Self> {
        if !is_finite(a) {
            return Err(QdError::NonFinite("a"));
        }
        if !is_finite(b) {
            return Err(QdError::NonFinite("b"));
        }
        let (mut a, mut b) = (a, b);
        let scale = T::one().max(a.norm()).max(b.norm());
        let degenerate_equal = (a - b).norm() < lit::<T>(EQUAL_ZEROS_BAND) * scale;
        if degenerate_equal {
            b = a;
        }
        let degenerate_zero = (a * b).norm() < lit(ZERO_AT_ORIGIN_BAND);
        if degenerate_zero {
            if degenerate_equal {
                return Err(QdError::InvalidDifferential(
                    "both zeros at the origin: (a, b) = (0, 0) is excluded".into(),
                ));
            }
            if a.norm() <= b.norm() {
                a = Complex::new(T::zero(), T::zero());
            } else {
                b = Complex::new(T::zero(), T::zero());
            }
        }
        Ok(Self { a, b, degenerate_equal, degenerate_zero })
    }

    pub fn from_parts(a: (f64, f64), b: (f64, f64)) -> Result<Self> {
        Self::new(Complex::new(lit(a.0), lit(a.1)), Complex::new(lit(b.0), lit(b.1)))
    }

    pub fn a(&self) -> Complex<T> {
        self.a
    }

    pub fn b(&self) -> Complex<T> {
        self.b
    }

    pub fn is_degenerate_equal(&self) -> bool {
        self.degenerate_equal
    }

    pub fn is_degenerate_zero(&self) -> bool {
        self.degenerate_zero
    }

    pub fn zero(&self, id: ZeroId) -> Complex<T> {
        match id {
            ZeroId::A => self.a,
            ZeroId::B => self.b,
        }
    }

    /// `max(1, |a|, |b|)`.
    pub fn scale(&self) -> T {
        T::one().max(self.a.norm()).max(self.b.norm())
    }

    /// Discriminant `D(z) = (z-a)(z-b)`.
    pub fn eval_d(&self, z: Complex<T>) -> Complex<T> {
        (z - self.a) * (z - self.b)
    }

    /// Coefficient `Q(z) = -D(z)/z^2` of the differential.
    pub fn eval_q(&self, z: Complex<T>) -> Complex<T> {
        -self.eval_d(z) / (z * z)
    }

    /// Derivative of `Q`: `Q'(z) = -D'(z)/z^2 + 2D(z)/z^3`.
    pub fn eval_q_prime(&self, z: Complex<T>) -> Complex<T> {
        let two = lit::<T>(2.0);
        let dprime = z * two - self.a - self.b;
        -dprime / (z * z) + self.eval_d(z) * two / (z * z * z)
    }

    /// Finite zeros of the differential (a zero sitting on the origin is absorbed into the pole).
    pub fn zeros(&self) -> Vec<Zero<T>> {
        if self.degenerate_equal {
            return vec![Zero { id: ZeroId::A, point: self.a, order: 2 }];
        }
        let mut out = Vec::with_capacity(2);
        for (id, p) in [(ZeroId::A, self.a), (ZeroId::B, self.b)] {
            if !(self.degenerate_zero && p.norm() == T::zero()) {
                out.push(Zero { id, point: p, order: 1 });
            }
        }
        out
    }

    /// Order of the pole at the origin: -2 generically, -1 when a zero sits there.
    pub fn origin_order(&self) -> i32 {
        if self.degenerate_zero {
            -1
        } else {
            -2
        }
    }

    /// Inventory of critical points, zeros first, then the origin, then infinity.
    pub fn critical_points(&self) -> Vec<CriticalPoint<T>> {
        let mut out: Vec<_> = self
            .zeros()
            .into_iter()
            .map(|z| CriticalPoint {
                location: Location::Finite(z.point),
                order: z.order as i32,
                ray_count: z.order + 2,
            })
            .collect();
        let origin_order = self.origin_order();
        out.push(CriticalPoint {
            location: Location::Finite(Complex::new(T::zero(), T::zero())),
            order: origin_order,
            // a simple pole emits one trajectory, a double pole has no distinguished rays
            ray_count: if origin_order == -1 { 1 } else { 0 },
        });
        out.push(CriticalPoint { location: Location::Infinity, order: -4, ray_count: 0 });
        out
    }

    /// Picks the value of `√D(z)` closest to `reference`.
    pub fn sqrt_d_near(&self, z: Complex<T>, reference: Complex<T>) -> Complex<T> {
        nearest_root(self.eval_d(z).sqrt(), reference)
    }
}

/// Returns `±w`, whichever lies closer to `reference`.
#[inline]
pub fn nearest_root<T: Real>(w: Complex<T>, reference: Complex<T>) -> Complex<T> {
    if (w - reference).norm_sqr() <= (w + reference).norm_sqr() {
        w
    } else {
        -w
    }
}

/// A canonical differential together with the coordinate map `y = scale·(z - shift)`
/// that produced it from the raw data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canonical<T> {
    pub qdiff: QDiff<T>,
    pub shift: Complex<T>,
    pub scale: Complex<T>,
}

impl<T: Real> Canonical<T> {
    /// Raw coordinate to canonical coordinate.
    pub fn forward(&self, z: Complex<T>) -> Complex<T> {
        self.scale * (z - self.shift)
    }

    /// Canonical coordinate back to the raw coordinate.
    pub fn pullback(&self, y: Complex<T>) -> Complex<T> {
        y / self.scale + self.shift
    }
}

/// Normalizes `A (z-a)(z-b)/(z-c)^2 dz^2` to canonical form.
///
/// The double pole is moved to the origin and the variable is scaled by the
/// principal `√A`, so the zeros become `√A(a-c)` and `√A(b-c)`.
pub fn canonicalize<T: Real>(
    a_raw: Complex<T>,
    b_raw: Complex<T>,
    c: Complex<T>,
    leading: Complex<T>,
) -> Result<Canonical<T>> {
    for (name, v) in [("a", a_raw), ("b", b_raw), ("c", c), ("A", leading)] {
        if !is_finite(v) {
            return Err(QdError::NonFinite(name));
        }
    }
    if leading.norm() == T::zero() {
        return Err(QdError::InvalidDifferential("leading coefficient A = 0".into()));
    }
    let scale = leading.sqrt();
    let qdiff = QDiff::new(scale * (a_raw - c), scale * (b_raw - c))?;
    Ok(Canonical { qdiff, shift: c, scale })
}

/// `D(z) = (z-a)(z-b)`.
pub fn eval_d<T: Real>(q: &QDiff<T>, z: Complex<T>) -> Complex<T> {
    q.eval_d(z)
}

/// Samples of a path together with a continuous branch of `√D` along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPath<T> {
    pub samples: Vec<Complex<T>>,
    pub branch_values: Vec<Complex<T>>,
}

impl<T: Real> BranchPath<T> {
    /// Largest relative residual `|w² - D(z)| / max(|D(z)|, ε)` over the samples.
    pub fn max_residual(&self, q: &QDiff<T>) -> T {
        self.samples
            .iter()
            .zip(&self.branch_values)
            .map(|(&z, &w)| {
                let d = q.eval_d(z);
                (w * w - d).norm() / d.norm().max(T::min_positive_value())
            })
            .fold(T::zero(), T::max)
    }

    pub fn last_value(&self) -> Complex<T> {
        *self.branch_values.last().expect("non-empty branch path")
    }
}

fn arg_jump<T: Real>(prev: Complex<T>, next: Complex<T>) -> T {
    if prev.norm() == T::zero() || next.norm() == T::zero() {
        T::zero()
    } else {
        (next / prev).arg().abs()
    }
}

/// Continues `√D` along `path`, starting from `seed` at `path[0]`.
///
/// Each step picks the root nearest the previous value. A step whose argument
/// jump reaches `π/2` is bisected once; if the jump persists the sheet cannot
/// be determined and the continuation fails. Samples inserted by bisection
/// are kept in the returned path.
pub fn continue_sqrt_d<T: Real>(
    q: &QDiff<T>,
    path: &[Complex<T>],
    seed: Complex<T>,
) -> Result<BranchPath<T>> {
    let Some(&start) = path.first() else {
        return Err(QdError::InvalidArgument("empty path".into()));
    };
    if path.iter().any(|&z| !is_finite(z)) || !is_finite(seed) {
        return Err(QdError::NonFinite("path"));
    }
    let d0 = q.eval_d(start);
    let tol = lit::<T>(1e-9);
    if (seed * seed - d0).norm() > tol * d0.norm().max(T::one()) {
        return Err(QdError::InvalidArgument("seed is not a square root of D(path[0])".into()));
    }
    let limit = T::FRAC_PI_2();
    let mut samples = vec![start];
    let mut values = vec![seed];
    for (k, &z) in path.iter().enumerate().skip(1) {
        let prev_z = *samples.last().unwrap();
        let prev = *values.last().unwrap();
        let w = q.sqrt_d_near(z, prev);
        if arg_jump(prev, w) < limit {
            samples.push(z);
            values.push(w);
            continue;
        }
        let mid = (prev_z + z) * lit::<T>(0.5);
        let wm = q.sqrt_d_near(mid, prev);
        let w2 = q.sqrt_d_near(z, wm);
        let jump = if wm.norm() == T::zero() {
            // the bisection landed on a branch point
            limit
        } else {
            arg_jump(prev, wm).max(arg_jump(wm, w2))
        };
        if jump >= limit {
            return Err(QdError::Continuation { index: k, jump: jump.to_f64().unwrap_or(f64::NAN) });
        }
        samples.extend([mid, z]);
        values.extend([wm, w2]);
    }
    Ok(BranchPath { samples, branch_values: values })
}

/// Residue of `√D(z)/z` at the origin on the chosen sheet: `±√(ab)`.
pub fn residue_origin<T: Real>(q: &QDiff<T>, sheet: Sheet) -> Result<Complex<T>> {
    if q.is_degenerate_zero() {
        return Err(QdError::Degenerate("ab = 0: the origin is a simple pole".into()));
    }
    Ok((q.a() * q.b()).sqrt() * sheet.sign::<T>())
}

/// Residue of `√D(z)/z` at infinity with `√D ~ z`: `(a+b)/2`.
pub fn residue_infinity<T: Real>(q: &QDiff<T>) -> Complex<T> {
    (q.a() + q.b()) * lit::<T>(0.5)
}

/// Directions (radians in `[0, 2π)`, ascending) of the trajectories leaving a zero.
///
/// At a simple zero `z0` the horizontal directions solve `arg Q'(z0) + 3θ ≡ 0`;
/// at a double zero they solve `arg(Q''(z0)/2) + 4θ ≡ 0`. Vertical directions
/// are rotated by half the spacing.
pub fn launch_directions<T: Real>(q: &QDiff<T>, at: ZeroId, kind: TrajectoryKind) -> Result<Vec<T>> {
    let z0 = q.zero(at);
    let Some(zero) = q.zeros().into_iter().find(|z| z.point == z0) else {
        return Err(QdError::Domain(format!("{at:?} = {z0} is not a zero of the differential")));
    };
    let tau = T::TAU();
    let (count, base) = if zero.order == 2 {
        // Q(z) ≈ -(z-a)^2/a^2 near a double zero
        let lead = -(z0 * z0).inv();
        (4usize, lead.arg())
    } else {
        (3usize, q.eval_q_prime(z0).arg())
    };
    let n = lit::<T>(count as f64);
    let spacing = tau / n;
    let shift = match kind {
        TrajectoryKind::Horizontal => T::zero(),
        TrajectoryKind::Vertical => spacing / lit(2.0),
    };
    let mut dirs: Vec<T> = (0..count)
        .map(|k| wrap_tau((tau * lit(k as f64) - base) / n + shift))
        .collect();
    dirs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // collapse values that wrapped to within rounding of 2π
    for d in dirs.iter_mut() {
        if (*d - tau).abs() < lit(1e-14) {
            *d = T::zero();
        }
    }
    dirs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(dirs)
}

/// Angle by which `direction` deviates from the nearest launch ray at `at`.
pub fn ray_deviation<T: Real>(rays: &[T], direction: T) -> (usize, T) {
    rays.iter()
        .enumerate()
        .map(|(i, &r)| (i, wrap_pi(direction - r).abs()))
        .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
        .expect("at least one ray")
}
