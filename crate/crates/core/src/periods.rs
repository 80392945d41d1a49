//! Period integrals `∫_γ (√D)₊/z dz` between the zeros and the reality
//! criterion for `(√a ± √b)²`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::differential::{continue_sqrt_d, nearest_root, QDiff};
use crate::error::{QdError, Result};
use crate::quadrature::adaptive;
use crate::scalar::{is_finite, lit, Real};

/// Relative tolerance for "∈ ℝ".
pub const TAU_CRIT: f64 = 1e-9;
/// Relative band around the reality locus flagged as ambiguous.
pub const AMBIGUITY_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionClass {
    BothReal,
    PlusReal,
    MinusReal,
    Neither,
}

impl CriterionClass {
    pub fn holds(self) -> bool {
        self != CriterionClass::Neither
    }

    pub fn label(self) -> &'static str {
        match self {
            CriterionClass::BothReal => "both_real",
            CriterionClass::PlusReal => "plus_real",
            CriterionClass::MinusReal => "minus_real",
            CriterionClass::Neither => "neither",
        }
    }
}

/// The criterion with the quantities it was decided from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion<T> {
    pub class: CriterionClass,
    /// `Im(a+b) + 2 Im√(ab)` (principal root).
    pub im_plus: T,
    /// `Im(a+b) - 2 Im√(ab)`.
    pub im_minus: T,
    /// `|a| + |b|`.
    pub scale: T,
    /// Within [`AMBIGUITY_BAND`] of the locus but not on it.
    pub boundary_ambiguous: bool,
}

impl<T: Real> Criterion<T> {
    /// `min |Im(...)| / (|a|+|b|)`.
    pub fn relative_distance(&self) -> T {
        self.im_plus.abs().min(self.im_minus.abs()) / self.scale
    }
}

/// Decides whether `(√a+√b)²` and/or `(√a-√b)²` are real, using a custom
/// relative tolerance `tau`.
pub fn criterion_with_tolerance<T: Real>(q: &QDiff<T>, tau: T) -> Result<Criterion<T>> {
    let (a, b) = (q.a(), q.b());
    if q.is_degenerate_zero() {
        return Err(QdError::Degenerate("ab = 0: the criterion needs two nonzero zeros".into()));
    }
    let root = (a * b).sqrt();
    let two = lit::<T>(2.0);
    let im_plus = (a + b).im + two * root.im;
    let im_minus = (a + b).im - two * root.im;
    let scale = a.norm() + b.norm();
    let limit = tau * scale;
    let class = match (im_plus.abs() < limit, im_minus.abs() < limit) {
        (true, true) => CriterionClass::BothReal,
        (true, false) => CriterionClass::PlusReal,
        (false, true) => CriterionClass::MinusReal,
        (false, false) => CriterionClass::Neither,
    };
    let dist = im_plus.abs().min(im_minus.abs());
    let boundary_ambiguous = class == CriterionClass::Neither && dist < lit::<T>(AMBIGUITY_BAND) * scale;
    Ok(Criterion { class, im_plus, im_minus, scale, boundary_ambiguous })
}

pub fn criterion_detail<T: Real>(q: &QDiff<T>) -> Result<Criterion<T>> {
    criterion_with_tolerance(q, lit(TAU_CRIT))
}

pub fn criterion_reality<T: Real>(q: &QDiff<T>) -> Result<CriterionClass> {
    Ok(criterion_detail(q)?.class)
}

/// Branch-free form `(Im(a+b))² - 4(Im√(ab))²` whose zero set is the reality locus.
pub fn locus_function<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    let w = a * b;
    let s = (a + b).im;
    // (Im √w)² = (|w| - Re w)/2
    s * s - lit::<T>(2.0) * (w.norm() - w.re)
}

/// The four closed-form values `±(iπ/2)(√a ± √b)²` with principal roots.
pub fn lemma_candidates<T: Real>(q: &QDiff<T>) -> [Complex<T>; 4] {
    let (ra, rb) = (q.a().sqrt(), q.b().sqrt());
    let k = Complex::new(T::zero(), T::FRAC_PI_2());
    let plus = k * (ra + rb) * (ra + rb);
    let minus = k * (ra - rb) * (ra - rb);
    [plus, -plus, minus, -minus]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodResult<T> {
    pub value: Complex<T>,
    pub candidates: [Complex<T>; 4],
    pub matched: usize,
    pub mismatch: T,
}

fn dist_critical<T: Real>(q: &QDiff<T>, z: Complex<T>) -> T {
    z.norm().min((z - q.a()).norm()).min((z - q.b()).norm())
}

/// Densifies one segment so that consecutive points are close relative to the
/// nearest critical point; near a branch-point endpoint the spacing is graded geometrically.
fn densify_segment<T: Real>(q: &QDiff<T>, p0: Complex<T>, p1: Complex<T>, out: &mut Vec<T>) {
    fn rec<T: Real>(q: &QDiff<T>, p0: Complex<T>, p1: Complex<T>, t0: T, t1: T, depth: u32, out: &mut Vec<T>) {
        let z0 = p0 + (p1 - p0) * t0;
        let z1 = p0 + (p1 - p0) * t1;
        let len = (z1 - z0).norm();
        let local = dist_critical(q, z0).min(dist_critical(q, z1)).min(dist_critical(q, (z0 + z1) * lit::<T>(0.5)));
        // below ~1e-9 of the scale, z - a is dominated by rounding
        if depth == 0 || len <= lit::<T>(0.1) * local || len < lit::<T>(1e-9) * q.scale() {
            out.push(t1);
            return;
        }
        let tm = (t0 + t1) / lit(2.0);
        rec(q, p0, p1, t0, tm, depth - 1, out);
        rec(q, p0, p1, tm, t1, depth - 1, out);
    }
    rec(q, p0, p1, T::zero(), T::one(), 48, out);
}

/// Reference branch of `√D` along a polyline: per segment, local parameters and values.
struct BranchTable<T> {
    params: Vec<Vec<T>>,
    values: Vec<Vec<Complex<T>>>,
}

impl<T: Real> BranchTable<T> {
    fn build(q: &QDiff<T>, path: &[Complex<T>], seed: Complex<T>) -> Result<Self> {
        let mut params = Vec::new();
        let mut flat = vec![path[0]];
        for w in path.windows(2) {
            let mut ts = vec![T::zero()];
            densify_segment(q, w[0], w[1], &mut ts);
            for &t in &ts[1..] {
                flat.push(w[0] + (w[1] - w[0]) * t);
            }
            params.push(ts);
        }
        let bp = continue_sqrt_d(q, &flat, seed)?;
        if bp.samples.len() != flat.len() {
            return Err(QdError::InsufficientResolution("branch table needed refinement".into()));
        }
        let mut values = Vec::with_capacity(params.len());
        let mut idx = 0;
        for ts in &params {
            values.push(bp.branch_values[idx..idx + ts.len()].to_vec());
            idx += ts.len() - 1;
        }
        Ok(Self { params, values })
    }

    /// Reference value near parameter `t` of segment `seg`, skipping vanishing values.
    fn reference(&self, seg: usize, t: T) -> Complex<T> {
        let ts = &self.params[seg];
        let vs = &self.values[seg];
        let pos = ts.partition_point(|&x| x < t);
        let mut best = None;
        for cand in [pos.saturating_sub(1), pos.min(ts.len() - 1)] {
            if vs[cand].norm() > T::zero() {
                let d = (ts[cand] - t).abs();
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, vs[cand]));
                }
            }
        }
        best.map(|b| b.1).unwrap_or_else(|| vs[ts.len() / 2])
    }

    fn flip(&mut self) {
        for vs in &mut self.values {
            for v in vs.iter_mut() {
                *v = -*v;
            }
        }
    }
}

fn segments_intersect<T: Real>(p: Complex<T>, p2: Complex<T>, q: Complex<T>, q2: Complex<T>) -> bool {
    let cross = |u: Complex<T>, v: Complex<T>| u.re * v.im - u.im * v.re;
    let r = p2 - p;
    let s = q2 - q;
    let denom = cross(r, s);
    if denom == T::zero() {
        return false;
    }
    let t = cross(q - p, s) / denom;
    let u = cross(q - p, r) / denom;
    t >= T::zero() && t <= T::one() && u >= T::zero() && u <= T::one()
}

/// `√D` on the left side of `path` at a point of one of its segments, continued from
/// infinity (`√D ~ z`) along a ray that does not cross the path. Segments are tried
/// longest first, midpoint first; a self-crossing path can enclose some of them.
fn left_value_from_infinity<T: Real>(q: &QDiff<T>, path: &[Complex<T>]) -> Result<(usize, T, Complex<T>)> {
    let lengths: Vec<T> = path.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let mut order: Vec<usize> = (0..lengths.len()).filter(|&i| lengths[i] > T::zero()).collect();
    order.sort_by(|&i, &j| lengths[j].partial_cmp(&lengths[i]).unwrap_or(std::cmp::Ordering::Equal));
    let reach = lit::<T>(10.0) * (q.scale() + path.iter().fold(T::zero(), |m, z| m.max(z.norm())));
    let params = [0.5, 0.25, 0.75, 0.125, 0.875];
    for (seg, t) in order.into_iter().flat_map(|seg| params.iter().map(move |&t| (seg, lit::<T>(t)))) {
        let dir = (path[seg + 1] - path[seg]) / lengths[seg];
        let mid = path[seg] + (path[seg + 1] - path[seg]) * t;
        let normal = Complex::new(T::zero(), T::one()) * dir;
        let others = path
            .windows(2)
            .enumerate()
            .filter(|(i, _)| *i != seg)
            .map(|(_, w)| crate::scalar::segment_distance(mid, w[0], w[1]))
            .fold(T::infinity(), T::min);
        let offset = lit::<T>(0.25) * others.min(dist_critical(q, mid)).min(lengths[seg]);
        if !(offset > T::zero()) {
            continue;
        }
        let start = mid + normal * offset;
        let base = normal.arg();
        for k in 0..128 {
            let turn = lit::<T>(((k + 1) / 2) as f64) * T::PI() / lit(64.0);
            let theta = if k % 2 == 0 { base + turn } else { base - turn };
            let far = start + crate::scalar::cis(theta) * reach;
            let blocked = path.windows(2).any(|w| segments_intersect(start, far, w[0], w[1]));
            let near_pole = crate::scalar::segment_distance(Complex::new(T::zero(), T::zero()), start, far)
                < lit::<T>(1e-6) * q.scale();
            if blocked || near_pole {
                continue;
            }
            let mut ts = vec![T::zero()];
            densify_segment(q, far, start, &mut ts);
            let ray: Vec<_> = ts.iter().map(|&s| far + (start - far) * s).collect();
            // at large |z|, √D = z√(1-a/z)√(1-b/z) with principal factors
            let seed = far * (Complex::new(T::one(), T::zero()) - q.a() / far).sqrt()
                * (Complex::new(T::one(), T::zero()) - q.b() / far).sqrt();
            let bp = continue_sqrt_d(q, &ray, seed)?;
            return Ok((seg, t, bp.last_value()));
        }
    }
    Err(QdError::InsufficientResolution("no ray from the path to infinity avoids the path".into()))
}

fn validate_path<T: Real>(q: &QDiff<T>, path: &[Complex<T>]) -> Result<()> {
    if path.len() < 2 {
        return Err(QdError::InvalidArgument("path needs at least two points".into()));
    }
    if path.iter().any(|&z| !is_finite(z)) {
        return Err(QdError::NonFinite("path"));
    }
    let tol = lit::<T>(1e-12) * q.scale();
    if (path[0] - q.a()).norm() > tol || (path[path.len() - 1] - q.b()).norm() > tol {
        return Err(QdError::InvalidArgument("path must run from a to b".into()));
    }
    if q.is_degenerate_equal() {
        return Ok(());
    }
    let origin = Complex::new(T::zero(), T::zero());
    if path.windows(2).any(|w| crate::scalar::segment_distance(origin, w[0], w[1]) <= tol) {
        return Err(QdError::PathThroughOrigin);
    }
    for &z in &path[1..path.len() - 1] {
        if (z - q.a()).norm() <= tol || (z - q.b()).norm() <= tol {
            return Err(QdError::InvalidArgument("interior path vertex coincides with a zero".into()));
        }
    }
    if path.windows(2).any(|w| (w[1] - w[0]).norm() == T::zero()) {
        return Err(QdError::InvalidArgument("repeated path vertex".into()));
    }
    Ok(())
}

/// `∫_γ (√D)₊/z dz` along the polyline `path` from `a` to `b`, with `√D ~ z`
/// at infinity on `ℂ∖γ` and `+` the left side of `γ`.
pub fn period_integral<T: Real>(q: &QDiff<T>, path: &[Complex<T>]) -> Result<Complex<T>> {
    validate_path(q, path)?;
    if q.is_degenerate_equal() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let (seg, t, left) = left_value_from_infinity(q, path)?;
    let mut table = BranchTable::build(q, path, Complex::new(T::zero(), T::zero()))?;
    let at_mid = table.reference(seg, t);
    if (at_mid - left).norm() > (at_mid + left).norm() {
        table.flip();
    }
    Ok(integrate_with_table(q, path, &table))
}

/// Same integral with the sheet pinned by `seed`, the value of `√D` at the
/// midpoint of the longest segment of the path.
pub fn period_integral_seeded<T: Real>(q: &QDiff<T>, path: &[Complex<T>], seed: Complex<T>) -> Result<Complex<T>> {
    validate_path(q, path)?;
    if q.is_degenerate_equal() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let lengths: Vec<T> = path.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let seg = (0..lengths.len()).fold(0, |best, i| if lengths[i] > lengths[best] { i } else { best });
    let t = lit::<T>(0.5);
    let mut table = BranchTable::build(q, path, Complex::new(T::zero(), T::zero()))?;
    let at_mid = table.reference(seg, t);
    if (at_mid - seed).norm() > (at_mid + seed).norm() {
        table.flip();
    }
    Ok(integrate_with_table(q, path, &table))
}

fn integrate_with_table<T: Real>(q: &QDiff<T>, path: &[Complex<T>], table: &BranchTable<T>) -> Complex<T> {
    let lengths: Vec<T> = path.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let total = lengths.iter().fold(T::zero(), |acc, &l| acc + l);
    let tol = lit::<T>(1e-12) * q.scale();
    let terminal = lit::<T>(0.1) * total;
    let nseg = lengths.len();
    let mut sum = Complex::new(T::zero(), T::zero());
    for (i, w) in path.windows(2).enumerate() {
        let (z0, z1) = (w[0], w[1]);
        let dz = z1 - z0;
        let mut f = |t: T| {
            let z = z0 + dz * t;
            let s = nearest_root(q.eval_d(z).sqrt(), table.reference(i, t));
            s / z * dz
        };
        // fraction of the segment handled with z = endpoint + (...)σ² near a branch point
        let head = if i == 0 { (terminal / lengths[i]).min(T::one()) } else { T::zero() };
        let tail = if i == nseg - 1 { (terminal / lengths[i]).min(T::one() - head) } else { T::zero() };
        let (lo, hi) = (head, T::one() - tail);
        if head > T::zero() {
            let mut g = |sig: T| f(head * sig * sig) * (lit::<T>(2.0) * head * sig);
            sum = sum + adaptive(T::zero(), T::one(), tol, 30, &mut g);
        }
        if hi > lo {
            sum = sum + adaptive(lo, hi, tol, 30, &mut f);
        }
        if tail > T::zero() {
            let mut g = |sig: T| f(T::one() - tail * sig * sig) * (lit::<T>(2.0) * tail * sig);
            sum = sum + adaptive(T::zero(), T::one(), tol, 30, &mut g);
        }
    }
    sum
}

/// Matches a period value against the closed-form candidates.
pub fn match_candidates<T: Real>(q: &QDiff<T>, value: Complex<T>) -> PeriodResult<T> {
    let candidates = lemma_candidates(q);
    let (matched, mismatch) = candidates
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, (value - c).norm()))
        .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
        .unwrap();
    PeriodResult { value, candidates, matched, mismatch }
}

pub fn lemma_check<T: Real>(q: &QDiff<T>, path: &[Complex<T>]) -> Result<PeriodResult<T>> {
    Ok(match_candidates(q, period_integral(q, path)?))
}

/// `∮ √D(z)/z dz` counter-clockwise over `|z - center| = radius` by the
/// periodic trapezoid rule with `n` nodes, `√D` continued from `seed` at
/// `center + radius`.
pub fn circle_integral<T: Real>(
    q: &QDiff<T>,
    center: Complex<T>,
    radius: T,
    seed: Complex<T>,
    n: usize,
) -> Result<Complex<T>> {
    let pts: Vec<_> = (0..=n)
        .map(|k| center + crate::scalar::cis(T::TAU() * lit(k as f64) / lit(n as f64)) * radius)
        .collect();
    let bp = continue_sqrt_d(q, &pts, seed)?;
    let mut acc = Complex::new(T::zero(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    for (&z, &s) in bp.samples.iter().zip(&bp.branch_values).take(bp.samples.len() - 1) {
        // dz = i (z - center) dθ
        acc = acc + s / z * i * (z - center);
    }
    Ok(acc * (T::TAU() / lit(n as f64)))
}

/// Quadrature of `√D/z` around a small circle about the origin on the sheet where
/// `√D(0) = sheet·√(ab)`, returned with the residue prediction `2πi·sheet·√(ab)`.
pub fn origin_residue_check<T: Real>(
    q: &QDiff<T>,
    sheet: crate::differential::Sheet,
) -> Result<(Complex<T>, Complex<T>)> {
    let res = crate::differential::residue_origin(q, sheet)?;
    let radius = q.a().norm().min(q.b().norm()) / lit(2.0);
    // continue from the center out along the positive real axis to fix the seed
    let spokes: Vec<_> = (0..=16).map(|k| Complex::new(radius * lit(k as f64) / lit(16.0), T::zero())).collect();
    let spoke = continue_sqrt_d(q, &spokes, res)?;
    let value = circle_integral(q, Complex::new(T::zero(), T::zero()), radius, spoke.last_value(), 512)?;
    Ok((value, res * Complex::new(T::zero(), T::TAU())))
}
