//! Rescaled generalized Laguerre polynomials `p_n(z) = L_n^{nA}(nz)`, their
//! root-counting measures, and the algebraic function `h` solving
//! `z h² + (A - z) h + 1 = 0` whose cut is a critical trajectory.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::differential::QDiff;
use crate::error::{QdError, Result};
use crate::graph::classify_graph;
use crate::periods::{criterion_reality, period_integral};
use crate::scalar::{is_finite, lit, polyline_distance, segment_distance, Real};
use crate::tracer::{TerminationKind, TraceConfig};

/// `p_n(z) = Σ_k C(n+nA, n-k) (-nz)^k / k!`, stored as `scale · coefficients`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledLaguerre<T> {
    pub n: usize,
    #[serde(rename = "A")]
    pub big_a: Complex<T>,
    /// Ascending coefficients divided by `exp(log_scale)`.
    pub coefficients: Vec<Complex<T>>,
    /// Natural log of the factor removed from the coefficients.
    pub log_scale: T,
}

impl<T: Real> RescaledLaguerre<T> {
    /// Actual coefficient `c_k` (may overflow for large `n`).
    pub fn coefficient(&self, k: usize) -> Complex<T> {
        self.coefficients[k] * self.log_scale.exp()
    }

    pub fn degree(&self) -> usize {
        self.coefficients.iter().rposition(|c| c.norm() > T::zero()).unwrap_or(0)
    }

    /// `p_n(z)` and `Σ|c_k||z|^k`, both divided by `exp(log_scale)`.
    pub fn eval_scaled(&self, z: Complex<T>) -> (Complex<T>, T) {
        let r = z.norm();
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut mag = T::zero();
        for c in self.coefficients.iter().rev() {
            acc = acc * z + c;
            mag = mag * r + c.norm();
        }
        (acc, mag)
    }

    /// `p_n'(z)/p_n(z)` from the three-term recurrence, using `p_n' = -n L_{n-1}^{nA+1}(nz)`.
    pub fn log_derivative(&self, z: Complex<T>) -> Complex<T> {
        let n = self.n;
        let nt = lit::<T>(n as f64);
        let alpha = self.big_a * nt;
        let x = z * nt;
        let (p, ep) = laguerre_scaled(n, alpha, x);
        if n == 0 {
            return Complex::new(T::zero(), T::zero());
        }
        let (d, ed) = laguerre_scaled(n - 1, alpha + T::one(), x);
        let big = lit::<T>(RESCALE);
        -(d / p) * nt * big.powi(ed - ep)
    }
}

const RESCALE: f64 = 1e100;

/// `L_n^α(x)` as `(mantissa, exponent)` with value `mantissa · 1e100^exponent`.
fn laguerre_scaled<T: Real>(n: usize, alpha: Complex<T>, x: Complex<T>) -> (Complex<T>, i32) {
    let one = Complex::new(T::one(), T::zero());
    if n == 0 {
        return (one, 0);
    }
    let mut prev = one;
    let mut cur = one + alpha - x;
    let mut exp = 0;
    let big = lit::<T>(RESCALE);
    for k in 1..n {
        let kt = lit::<T>(k as f64);
        let next = ((alpha + lit::<T>(2.0) * kt + T::one() - x) * cur - (alpha + kt) * prev) / (kt + T::one());
        prev = cur;
        cur = next;
        if cur.norm() > big {
            cur = cur / big;
            prev = prev / big;
            exp += 1;
        }
    }
    (cur, exp)
}

/// Coefficients of `p_n` for complex `A`, with binomials `C(m, j)` formed as
/// products of `j` factors and every term accumulated in log-magnitude form.
pub fn build_polynomial<T: Real>(n: usize, big_a: Complex<T>) -> Result<RescaledLaguerre<T>> {
    if n == 0 {
        return Err(QdError::InvalidArgument("n must be at least 1".into()));
    }
    if !is_finite(big_a) {
        return Err(QdError::NonFinite("A"));
    }
    let nt = lit::<T>(n as f64);
    let m = big_a * nt + nt;
    // log|C(m, j)| and its phase for j = 0..=n
    let mut binom = Vec::with_capacity(n + 1);
    let mut logmag = T::zero();
    let mut phase = Complex::new(T::one(), T::zero());
    let mut vanished = false;
    binom.push((T::zero(), phase, false));
    for j in 1..=n {
        let f = (m - lit::<T>((j - 1) as f64)) / lit::<T>(j as f64);
        if f.norm() == T::zero() {
            vanished = true;
        } else {
            logmag = logmag + f.norm().ln();
            phase = phase * (f / f.norm());
        }
        binom.push((logmag, phase, vanished));
    }
    let mut terms = Vec::with_capacity(n + 1);
    let mut log_fact = T::zero();
    for k in 0..=n {
        if k > 0 {
            log_fact = log_fact + lit::<T>(k as f64).ln();
        }
        let (lb, pb, zero) = binom[n - k];
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        let lm = lb + lit::<T>(k as f64) * nt.ln() - log_fact;
        terms.push((lm, pb * sign, zero));
    }
    let log_scale = terms.iter().filter(|t| !t.2).fold(T::neg_infinity(), |acc, t| acc.max(t.0));
    let coefficients = terms
        .iter()
        .map(|&(lm, ph, zero)| if zero { Complex::new(T::zero(), T::zero()) } else { ph * (lm - log_scale).exp() })
        .collect();
    Ok(RescaledLaguerre { n, big_a, coefficients, log_scale })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootMeasure<T> {
    /// Roots sorted by `(Re, Im)`; each carries mass `1/n`.
    pub roots: Vec<Complex<T>>,
    pub weight: T,
    /// `|p_n(root)| / Σ|c_k||root|^k`.
    pub residuals: Vec<T>,
    /// Largest Newton correction `|p/p'|` at the final roots, a first-order error estimate.
    pub accuracy: T,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<String>,
}

impl<T: Real> RootMeasure<T> {
    pub fn total_mass(&self) -> T {
        self.weight * lit(self.roots.len() as f64)
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r))
    }
}

/// Relative residual below which a root is certified.
pub const ROOT_RESIDUAL: f64 = 1e-8;
/// Newton correction above which the roots are reported as unreliable. For
/// large negative `A` the polynomial is so ill-conditioned in double precision
/// that this, not the residual, limits the usable degree.
pub const ROOT_ACCURACY: f64 = 1e-2;

/// All roots of `p_n` by Aberth–Ehrlich iteration with `p'/p` from the recurrence.
///
/// Starting points lie on a circle about the mean of the roots, `1 + A`.
pub fn roots<T: Real>(p: &RescaledLaguerre<T>) -> Result<RootMeasure<T>> {
    let n = p.degree();
    if n == 0 {
        return Err(QdError::InvalidArgument("degree must be at least 1".into()));
    }
    let center = p.big_a + T::one();
    // Cauchy-type bound on the spread of the roots about the center
    let disc_root = (p.big_a + T::one()).sqrt() * lit::<T>(2.0);
    let radius = lit::<T>(1.5) * (disc_root.norm() + T::one()) + (p.big_a.norm() + T::one()).sqrt();
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let th = T::TAU() * lit::<T>(k as f64) / lit((n) as f64) + lit(0.4);
            center + crate::scalar::cis(th) * radius
        })
        .collect();
    let max_iter = 500;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..max_iter {
        iterations = it + 1;
        let mut max_step = T::zero();
        for k in 0..n {
            let ratio = p.log_derivative(z[k]);
            let newton = if ratio.norm() == T::zero() { Complex::new(T::zero(), T::zero()) } else { ratio.inv() };
            let mut repulse = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > T::zero() {
                        repulse = repulse + d.inv();
                    }
                }
            }
            let denom = Complex::new(T::one(), T::zero()) - newton * repulse;
            let step = if denom.norm() == T::zero() { newton } else { newton / denom };
            if is_finite(step) {
                z[k] = z[k] - step;
                max_step = max_step.max(step.norm() / z[k].norm().max(T::one()));
            }
        }
        if max_step < lit(1e-12) {
            converged = true;
            break;
        }
    }
    z.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
    let residuals: Vec<T> = z
        .iter()
        .map(|&r| {
            let (v, mag) = p.eval_scaled(r);
            if mag == T::zero() {
                T::zero()
            } else {
                v.norm() / mag
            }
        })
        .collect();
    let worst = residuals.iter().fold(T::zero(), |m, &r| m.max(r));
    let accuracy = z.iter().fold(T::zero(), |m, &r| {
        let ratio = p.log_derivative(r);
        if ratio.norm() == T::zero() {
            m
        } else {
            m.max(ratio.norm().recip())
        }
    });
    let certified = worst < lit(ROOT_RESIDUAL);
    let accurate = accuracy < lit(ROOT_ACCURACY);
    // steps stalled at the rounding floor still count when both checks pass
    let failure = if !certified {
        Some(format!("residual {worst} above certification threshold after {iterations} iterations"))
    } else if !accurate {
        Some(format!("root error estimate {accuracy} too large (converged: {converged})"))
    } else {
        None
    };
    Ok(RootMeasure {
        weight: T::one() / lit(n as f64),
        roots: z,
        residuals,
        accuracy,
        iterations,
        converged: failure.is_none(),
        failure,
    })
}

/// `(1/n) Σ 1/(z - root)`.
pub fn empirical_cauchy<T: Real>(m: &RootMeasure<T>, z: Complex<T>) -> Result<Complex<T>> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for &r in &m.roots {
        let d = z - r;
        if d.norm() < lit(1e-9) {
            return Err(QdError::PoleProximity { distance: d.norm().to_f64().unwrap_or(0.0) });
        }
        acc = acc + d.inv();
    }
    Ok(acc * m.weight)
}

/// `a, b = A + 2 ± 2√(A+1)`, the zeros of `D(z) = (z-A)² - 4z`.
pub fn discriminant_zeros<T: Real>(big_a: Complex<T>) -> (Complex<T>, Complex<T>) {
    let two = lit::<T>(2.0);
    let r = (big_a + T::one()).sqrt() * two;
    (big_a + two + r, big_a + two - r)
}

/// `{(√a+√b)², (√a-√b)²}` for the Laguerre zeros, paired with `{4A+4, 4}`;
/// returns the larger of the two pairing errors after the best matching.
pub fn remark_values<T: Real>(big_a: Complex<T>) -> ([Complex<T>; 2], T) {
    let (a, b) = discriminant_zeros(big_a);
    let (ra, rb) = (a.sqrt(), b.sqrt());
    let vals = [(ra + rb) * (ra + rb), (ra - rb) * (ra - rb)];
    let four = Complex::new(lit::<T>(4.0), T::zero());
    let target = [big_a * lit::<T>(4.0) + four, four];
    let direct = (vals[0] - target[0]).norm().max((vals[1] - target[1]).norm());
    let swapped = (vals[0] - target[1]).norm().max((vals[1] - target[0]).norm());
    (vals, direct.min(swapped))
}

/// `√D ~ z` on `ℂ∖γ` for the algebraic equation with parameter `A`, where
/// `γ` is the traced critical arc from `a` to `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicBranch<T> {
    #[serde(rename = "A")]
    pub big_a: Complex<T>,
    pub a: Complex<T>,
    pub b: Complex<T>,
    /// Polyline from `a` to `b`.
    pub cut: Vec<Complex<T>>,
}

/// Value of `h` off the cut, or its two boundary values on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HValue<T> {
    Single(Complex<T>),
    /// `plus` from the left of the cut oriented `a → b`.
    TwoSided { plus: Complex<T>, minus: Complex<T> },
}

impl<T: Real> AlgebraicBranch<T> {
    /// Traces the critical graph of `-D(z)/z² dz²` and keeps the short
    /// trajectory on which `h` is regular at the origin (`√D(0) = -A`).
    pub fn new(big_a: Complex<T>, cfg: &TraceConfig<T>) -> Result<Self> {
        let (a, b) = discriminant_zeros(big_a);
        let q = QDiff::new(a, b)?;
        if q.is_degenerate_equal() || q.is_degenerate_zero() {
            return Err(QdError::Degenerate(format!("A = {big_a} gives a degenerate discriminant")));
        }
        if !criterion_reality(&q)?.holds() {
            return Err(QdError::Domain("no critical trajectory can support the measure".into()));
        }
        let graph = classify_graph(&q, cfg)?;
        let mut best: Option<(T, Self)> = None;
        for arc in graph.short_trajectories() {
            let mut cut = arc.samples.clone();
            if let TerminationKind::ShortTrajectory { .. } = arc.termination {
                if (cut[0] - q.a()).norm() > (cut[0] - q.b()).norm() {
                    cut.reverse();
                }
            }
            let cand = Self { big_a, a: q.a(), b: q.b(), cut };
            let mismatch = (cand.sqrt_d_at_origin() + big_a).norm();
            if best.as_ref().is_none_or(|(m, _)| mismatch < *m) {
                best = Some((mismatch, cand));
            }
        }
        let Some((mismatch, branch)) = best else {
            return Err(QdError::Domain("no short trajectory joins the zeros".into()));
        };
        if mismatch > lit::<T>(1e-6) * (big_a.norm() + T::one()) {
            return Err(QdError::Domain(format!("h has a pole at the origin on every traced arc ({mismatch})")));
        }
        Ok(branch)
    }

    fn scale(&self) -> T {
        T::one().max(self.a.norm()).max(self.b.norm())
    }

    /// Closed curve `γ` followed by `b → 0 → a`.
    fn winding_parity(&self, z: Complex<T>) -> bool {
        let mut total = T::zero();
        let zero = Complex::new(T::zero(), T::zero());
        let tail = [self.b, zero, self.a];
        let pts = self.cut.iter().chain(tail[1..].iter());
        let mut prev = self.cut[0] - z;
        for &p in pts.skip(1) {
            let cur = p - z;
            total = total + (cur / prev).arg();
            prev = cur;
        }
        let w = (total / T::TAU()).round().to_i64().unwrap_or(0);
        w.rem_euclid(2) == 1
    }

    /// `z √(1-a/z) √(1-b/z)` with principal roots; cuts on `[0,a] ∪ [0,b]`.
    fn principal(&self, z: Complex<T>) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        z * (one - self.a / z).sqrt() * (one - self.b / z).sqrt()
    }

    /// `√D(z)` on `ℂ∖γ` with `√D ~ z` at infinity.
    pub fn sqrt_d(&self, z: Complex<T>) -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let eps = lit::<T>(1e-9) * self.scale();
        let on_aux = segment_distance(z, zero, self.a) < eps || segment_distance(z, zero, self.b) < eps;
        let probe = if on_aux {
            let dir = if segment_distance(z, zero, self.a) < eps { self.a } else { self.b };
            z + Complex::new(T::zero(), T::one()) * dir / dir.norm() * (eps * lit::<T>(100.0))
        } else {
            z
        };
        let mut s = self.principal(probe);
        if self.winding_parity(probe) {
            s = -s;
        }
        let w = ((z - self.a) * (z - self.b)).sqrt();
        crate::differential::nearest_root(w, s)
    }

    fn sqrt_d_at_origin(&self) -> Complex<T> {
        // approach the origin along the bisector of the widest gap between arg a and arg b
        let (ta, tb) = (self.a.arg(), self.b.arg());
        let mid = (ta + tb) / lit(2.0);
        let gap = crate::scalar::wrap_tau(tb - ta);
        let dir = if gap > T::PI() { mid } else { mid + T::PI() };
        let z = crate::scalar::cis(dir) * lit::<T>(1e-7) * self.scale();
        let s = self.sqrt_d(z);
        crate::differential::nearest_root(self.big_a, s)
    }

    fn cut_tangent(&self, z: Complex<T>) -> Option<Complex<T>> {
        let tol = lit::<T>(1e-9) * self.scale();
        self.cut
            .windows(2)
            .filter(|w| (w[1] - w[0]).norm() > T::zero())
            .map(|w| (segment_distance(z, w[0], w[1]), w))
            .filter(|(d, _)| *d < tol)
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap())
            .map(|(_, w)| (w[1] - w[0]) / (w[1] - w[0]).norm())
    }

    /// `√D` on the left (`+`) and right of the cut at a point of the cut.
    pub fn sqrt_d_sides(&self, z: Complex<T>, tangent: Complex<T>) -> (Complex<T>, Complex<T>) {
        let delta = lit::<T>(1e-6) * self.scale();
        let normal = Complex::new(T::zero(), T::one()) * tangent;
        let w = ((z - self.a) * (z - self.b)).sqrt();
        let plus = crate::differential::nearest_root(w, self.sqrt_d(z + normal * delta));
        (plus, -plus)
    }

    /// Cumulative arc length of the cut at each sample.
    pub fn cut_length(&self) -> T {
        self.cut.windows(2).fold(T::zero(), |acc, w| acc + (w[1] - w[0]).norm())
    }

    /// Distance from `z` to the cut.
    pub fn distance_to_cut(&self, z: Complex<T>) -> T {
        polyline_distance(z, &self.cut)
    }

    /// Arc-length weighted centroid of the cut.
    pub fn centroid(&self) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut len = T::zero();
        for w in self.cut.windows(2) {
            let l = (w[1] - w[0]).norm();
            acc = acc + (w[0] + w[1]) * (l / lit(2.0));
            len = len + l;
        }
        acc / len
    }

    /// `∫_γ (√D₊/z) dz / (2πi)`, the total mass carried by the cut.
    pub fn mass(&self) -> Result<Complex<T>> {
        let q = QDiff::new(self.a, self.b)?;
        let p = period_integral(&q, &self.cut)?;
        Ok(p / Complex::new(T::zero(), T::TAU()))
    }
}

fn h_from<T: Real>(big_a: Complex<T>, z: Complex<T>, s: Complex<T>) -> Complex<T> {
    ((z - big_a) - s) / (z * lit::<T>(2.0))
}

/// `h(z) = ((z-A) - √D(z)) / (2z)`.
pub fn algebraic_h<T: Real>(branch: &AlgebraicBranch<T>, z: Complex<T>) -> Result<HValue<T>> {
    if !is_finite(z) {
        return Err(QdError::NonFinite("z"));
    }
    if z.norm() < lit::<T>(1e-12) * branch.scale() {
        return Err(QdError::PoleProximity { distance: z.norm().to_f64().unwrap_or(0.0) });
    }
    if let Some(tangent) = branch.cut_tangent(z) {
        let (sp, sm) = branch.sqrt_d_sides(z, tangent);
        return Ok(HValue::TwoSided { plus: h_from(branch.big_a, z, sp), minus: h_from(branch.big_a, z, sm) });
    }
    Ok(HValue::Single(h_from(branch.big_a, z, branch.sqrt_d(z))))
}

/// `z h² + (A - z) h + 1`, relative to the size of its terms.
pub fn quadratic_residual<T: Real>(big_a: Complex<T>, z: Complex<T>, h: Complex<T>) -> T {
    let terms = [z * h * h, (big_a - z) * h, Complex::new(T::one(), T::zero())];
    let sum = terms[0] + terms[1] + terms[2];
    let size = terms.iter().fold(T::zero(), |m, t| m.max(t.norm()));
    sum.norm() / size
}

/// `(h₋ - h₊) τ / (2πi)` at a point of the cut: the density of the limit
/// measure per unit length. `τ` is the unit horizontal direction of
/// `-D(z)/z² dz²` at `z`, oriented like the cut, so the value is real and its
/// sign records whether the `+` side was identified consistently.
pub fn motherbody_jump<T: Real>(branch: &AlgebraicBranch<T>, z: Complex<T>) -> Result<Complex<T>> {
    let tol = lit::<T>(1e-12) * branch.scale();
    if (z - branch.a).norm() < tol || (z - branch.b).norm() < tol {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let chord = branch
        .cut_tangent(z)
        .ok_or_else(|| QdError::Domain(format!("{z} is not on the cut")))?;
    let (sp, _) = branch.sqrt_d_sides(z, chord);
    let g = sp / z;
    // (√D/z)·τ ∈ iℝ along horizontal trajectories
    let mut tangent = Complex::new(T::zero(), T::one()) * g.conj() / g.norm();
    if (tangent * chord.conj()).re < T::zero() {
        tangent = -tangent;
    }
    Ok(g * tangent / Complex::new(T::zero(), T::TAU()))
}

/// Angle between the cut's chord at `z` and the horizontal direction there.
pub fn cut_tangent_error<T: Real>(branch: &AlgebraicBranch<T>, z: Complex<T>) -> Result<T> {
    let chord = branch
        .cut_tangent(z)
        .ok_or_else(|| QdError::Domain(format!("{z} is not on the cut")))?;
    let g = branch.sqrt_d(z + Complex::new(T::zero(), T::one()) * chord * lit::<T>(1e-6) * branch.scale()) / z;
    let tangent = Complex::new(T::zero(), T::one()) * g.conj() / g.norm();
    let ang = (chord * tangent.conj()).arg().abs();
    Ok(ang.min(T::PI() - ang))
}

/// Real part of [`motherbody_jump`]; equals `|√D|/(2π|z|)` when the jump is real and positive.
pub fn motherbody_density<T: Real>(branch: &AlgebraicBranch<T>, z: Complex<T>) -> Result<T> {
    Ok(motherbody_jump(branch, z)?.re)
}

/// Eight points on the circle of radius `2·max(|a|,|b|,1)` about the cut centroid.
pub fn standard_probes<T: Real>(branch: &AlgebraicBranch<T>) -> Vec<Complex<T>> {
    let c = branch.centroid();
    let r = lit::<T>(2.0) * branch.scale();
    (0..8).map(|k| c + crate::scalar::cis(T::TAU() * lit(k as f64) / lit(8.0)) * r).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow<T> {
    pub n: usize,
    pub z: Complex<T>,
    pub cauchy: Complex<T>,
    pub h: Complex<T>,
    pub error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    #[serde(rename = "A")]
    pub big_a: Complex<T>,
    pub rows: Vec<ConvergenceRow<T>>,
    /// Largest error over the probes, per `n` in input order.
    pub max_error: Vec<(usize, T)>,
    /// `max_error` strictly decreases with `n`.
    pub monotone: bool,
    /// Per probe: errors strictly decrease with `n`.
    pub monotone_per_probe: Vec<bool>,
    /// Largest root distance to the cut, per `n`.
    pub support_distance: Vec<(usize, T)>,
}

/// `|C_{μ_n}(z) - h(z)|` over `ns` and `probes`.
pub fn convergence_report<T: Real>(
    branch: &AlgebraicBranch<T>,
    ns: &[usize],
    probes: &[Complex<T>],
) -> Result<ConvergenceReport<T>> {
    for &z in probes {
        if branch.distance_to_cut(z) < T::one() {
            return Err(QdError::InvalidArgument(format!("probe {z} lies within 1 of the support")));
        }
    }
    let h: Vec<Complex<T>> = probes
        .iter()
        .map(|&z| match algebraic_h(branch, z)? {
            HValue::Single(v) => Ok(v),
            HValue::TwoSided { .. } => Err(QdError::Domain("probe on the cut".into())),
        })
        .collect::<Result<_>>()?;
    let per_n: Vec<(usize, Vec<ConvergenceRow<T>>, T)> = ns
        .par_iter()
        .map(|&n| {
            let p = build_polynomial(n, branch.big_a)?;
            let m = roots(&p)?;
            if m.failure.is_some() {
                return Err(QdError::Convergence {
                    iterations: m.iterations,
                    residual: m.max_residual().to_f64().unwrap_or(f64::NAN),
                });
            }
            let support = m.roots.iter().fold(T::zero(), |acc, &r| acc.max(branch.distance_to_cut(r)));
            let rows = probes
                .iter()
                .zip(&h)
                .map(|(&z, &hz)| {
                    let c = empirical_cauchy(&m, z)?;
                    Ok(ConvergenceRow { n, z, cauchy: c, h: hz, error: (c - hz).norm() })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((n, rows, support))
        })
        .collect::<Result<_>>()?;
    let max_error: Vec<(usize, T)> =
        per_n.iter().map(|(n, rows, _)| (*n, rows.iter().fold(T::zero(), |m, r| m.max(r.error)))).collect();
    let monotone = max_error.windows(2).all(|w| w[1].1 < w[0].1);
    let monotone_per_probe = (0..probes.len())
        .map(|j| per_n.windows(2).all(|w| w[1].1[j].error < w[0].1[j].error))
        .collect();
    let support_distance = per_n.iter().map(|(n, _, s)| (*n, *s)).collect();
    let rows = per_n.into_iter().flat_map(|(_, r, _)| r).collect();
    Ok(ConvergenceReport { big_a: branch.big_a, rows, max_error, monotone, monotone_per_probe, support_distance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn coeffs(n: usize, a: Complex<f64>) -> Vec<Complex<f64>> {
        let p = build_polynomial(n, a).unwrap();
        (0..=n).map(|k| p.coefficient(k)).collect()
    }

    #[test]
    fn small_polynomials() {
        let p = coeffs(1, c(2.0, 0.0));
        assert!((p[0] - c(3.0, 0.0)).norm() < 1e-13 && (p[1] - c(-1.0, 0.0)).norm() < 1e-13);
        let p = coeffs(1, c(0.0, 0.0));
        assert!((p[0] - c(1.0, 0.0)).norm() < 1e-13 && (p[1] - c(-1.0, 0.0)).norm() < 1e-13);
        // C(6,2) - C(6,1)(2z) + C(6,0)(2z)²/2
        let p = coeffs(2, c(2.0, 0.0));
        for (got, want) in p.iter().zip([15.0, -12.0, 2.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn linear_root() {
        let m = roots(&build_polynomial(1, c(2.0, 0.0)).unwrap()).unwrap();
        assert!(m.converged);
        assert!((m.roots[0] - c(3.0, 0.0)).norm() < 1e-12);
        assert_eq!(m.weight, 1.0);
        assert!((empirical_cauchy(&m, c(5.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert!(empirical_cauchy(&m, c(3.0, 0.0)).is_err());
    }

    #[test]
    fn recurrence_agrees_with_coefficients() {
        let p = build_polynomial(12, c(-0.7, 0.4)).unwrap();
        let z = c(0.3, -0.8);
        let h = 1e-6;
        let (v0, _) = p.eval_scaled(z);
        let (v1, _) = p.eval_scaled(z + h);
        let fd = (v1 - v0) / h / v0;
        assert!((fd - p.log_derivative(z)).norm() < 1e-4 * fd.norm());
    }

    #[test]
    fn conjugate_parameter_conjugates_roots() {
        let a = c(-0.5, 0.8);
        let m1 = roots(&build_polynomial(30, a).unwrap()).unwrap();
        let m2 = roots(&build_polynomial(30, a.conj()).unwrap()).unwrap();
        assert!(m1.converged && m2.converged, "{:?} {:?}", m1.failure, m2.failure);
        for r in &m1.roots {
            let best = m2.roots.iter().map(|s| (s - r.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8);
        }
    }

    #[test]
    fn cauchy_transform_decays_like_mass() {
        let m = roots(&build_polynomial(20, c(1.0, 0.0)).unwrap()).unwrap();
        let z = c(1e4, 1e4) / 2f64.sqrt();
        assert!((z * empirical_cauchy(&m, z).unwrap() - 1.0).norm() < 1e-3);
    }

    #[test]
    fn remark_identity() {
        for a in [c(3.0, 0.0), c(-3.0, 0.0), c(0.4, -1.3)] {
            assert!(remark_values(a).1 < 1e-12);
        }
        let (a, b) = discriminant_zeros(c(3.0, 0.0));
        assert!((a - c(9.0, 0.0)).norm() < 1e-14 && (b - c(1.0, 0.0)).norm() < 1e-14);
        assert!((a * b - c(9.0, 0.0)).norm() < 1e-12 && (a + b - c(10.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn h_far_from_cut() {
        let br = AlgebraicBranch::new(c(2.0, 0.0), &TraceConfig::default()).unwrap();
        let HValue::Single(h) = algebraic_h(&br, c(10.0, 0.0)).unwrap() else { panic!() };
        assert!((h - (8.0 - 24f64.sqrt()) / 20.0).norm() < 1e-13);
        let big = c(1e6, 3.0);
        let HValue::Single(h) = algebraic_h(&br, big).unwrap() else { panic!() };
        assert!((big * h - 1.0).norm() < 1e-5);
    }
}
