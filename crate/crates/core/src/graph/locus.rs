//! The set `Γ_a` of `b` for which `(√a+√b)²` or `(√a-√b)²` is real, and
//! grid surveys of the criterion over a region of the `b`-plane.

use num_complex::Complex;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify_graph;
use crate::differential::QDiff;
use crate::error::{QdError, Result};
use crate::periods::{criterion_with_tolerance, CriterionClass, TAU_CRIT};
use crate::scalar::{lit, Real};
use crate::tracer::TraceConfig;

/// `b = (√a + s)²` or `b = (√a + is)²` for real `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocusFamily {
    RealShift,
    ImaginaryShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchShape {
    Parabola,
    /// A half-line from the origin (covered twice by the parameter).
    Ray,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusBranch<T> {
    pub family: LocusFamily,
    pub shape: BranchShape,
    /// `√a` (principal).
    pub root: Complex<T>,
}

impl<T: Real> LocusBranch<T> {
    pub fn point(&self, s: T) -> Complex<T> {
        let shift = match self.family {
            LocusFamily::RealShift => Complex::new(s, T::zero()),
            LocusFamily::ImaginaryShift => Complex::new(T::zero(), s),
        };
        let w = self.root + shift;
        w * w
    }

    /// For a parabola, the point with imaginary part `y`; `None` for a ray.
    pub fn at_y(&self, y: T) -> Option<Complex<T>> {
        if self.shape == BranchShape::Ray {
            return None;
        }
        let a = self.root * self.root;
        let two = lit::<T>(2.0);
        let s = match self.family {
            LocusFamily::RealShift => (y - a.im) / (two * self.root.im),
            LocusFamily::ImaginaryShift => (y - a.im) / (two * self.root.re),
        };
        let p = self.point(s);
        Some(Complex::new(p.re, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaLocus<T> {
    pub anchor: Complex<T>,
    pub branches: [LocusBranch<T>; 2],
}

impl<T: Real> GammaLocus<T> {
    /// `n` points from each branch with parameters evenly spread over `[-s_max, s_max]`.
    pub fn sample(&self, n: usize, s_max: T) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(2 * n);
        for br in &self.branches {
            for k in 0..n {
                let t = if n == 1 { T::zero() } else { lit::<T>(k as f64) / lit((n - 1) as f64) };
                out.push(br.point(s_max * (lit::<T>(2.0) * t - T::one())));
            }
        }
        out
    }

    /// Distance from `b` to the locus, by dense sampling refined with a local search.
    pub fn distance(&self, b: Complex<T>) -> T {
        let scale = self.anchor.norm().sqrt() + b.norm().sqrt() + T::one();
        let mut best = T::infinity();
        for br in &self.branches {
            let n = 400;
            let mut best_s = T::zero();
            let mut best_d = T::infinity();
            for k in 0..=n {
                let s = scale * lit::<T>(4.0 * (k as f64 / n as f64) - 2.0);
                let d = (br.point(s) - b).norm();
                if d < best_d {
                    best_d = d;
                    best_s = s;
                }
            }
            // golden-section refinement on the bracketing interval
            let h = scale * lit::<T>(4.0 / n as f64);
            let (mut lo, mut hi) = (best_s - h, best_s + h);
            let g = lit::<T>(0.618_033_988_749_895);
            for _ in 0..60 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if (br.point(m1) - b).norm() < (br.point(m2) - b).norm() {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best = best.min(best_d).min((br.point((lo + hi) / lit(2.0)) - b).norm());
        }
        best
    }

    /// Largest horizontal offset between the two parabolas as derived and the
    /// closed forms in the variable `y` quoted for `a ∉ ℝ`, over `ys`.
    /// Returns `(first, second)`; `None` when `a` is real.
    pub fn printed_formula_discrepancy(&self, ys: &[T]) -> Option<(T, T)> {
        let a = self.anchor;
        if a.im == T::zero() {
            return None;
        }
        let r = self.branches[0].root;
        let two = lit::<T>(2.0);
        let mut worst = (T::zero(), T::zero());
        for &y in ys {
            let t_im = (y - a.im) / (two * r.im);
            let t_re = (y - a.im) / (two * r.re);
            let x1 = a.re + two * t_im * r.re + t_im * t_im;
            let x2 = a.re - two * t_re * r.re - t_im * t_im;
            let d1 = self.branches[0].at_y(y).map_or(T::zero(), |p| (p.re - x1).abs());
            let d2 = self.branches[1].at_y(y).map_or(T::zero(), |p| (p.re - x2).abs());
            worst = (worst.0.max(d1), worst.1.max(d2));
        }
        Some(worst)
    }
}

/// `Γ_a` as two parametrized branches: two parabolas when `a ∉ ℝ`, otherwise a
/// ray (`ℝ⁺` for `a > 0`, `ℝ⁻` for `a < 0`) and the parabola `x = a - y²/(4a)`.
pub fn gamma_locus<T: Real>(a: Complex<T>) -> Result<GammaLocus<T>> {
    if !crate::scalar::is_finite(a) {
        return Err(QdError::NonFinite("a"));
    }
    if a.norm() == T::zero() {
        return Err(QdError::Degenerate("the locus is undefined for a = 0".into()));
    }
    let root = a.sqrt();
    let (s0, s1) = if a.im != T::zero() {
        (BranchShape::Parabola, BranchShape::Parabola)
    } else if a.re > T::zero() {
        (BranchShape::Ray, BranchShape::Parabola)
    } else {
        (BranchShape::Parabola, BranchShape::Ray)
    };
    Ok(GammaLocus {
        anchor: a,
        branches: [
            LocusBranch { family: LocusFamily::RealShift, shape: s0, root },
            LocusBranch { family: LocusFamily::ImaginaryShift, shape: s1, root },
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyRegion<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyOptions<T> {
    pub nx: usize,
    pub ny: usize,
    /// Number of cells (outside the ambiguity band) verified by tracing.
    pub trace_sample: usize,
    pub seed: u64,
    pub trace: TraceConfig<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyCell<T> {
    pub i: usize,
    pub j: usize,
    pub b: Complex<T>,
    /// Criterion at the grid node itself.
    pub class: CriterionClass,
    /// Whether the locus may pass within half a cell of the node.
    pub on_locus: bool,
    pub boundary_ambiguous: bool,
    pub critical_count: Option<usize>,
    pub agreement: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyGrid<T> {
    pub a: Complex<T>,
    pub region: SurveyRegion<T>,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<SurveyCell<T>>,
    pub traced: usize,
    pub agreeing: usize,
}

impl<T: Real> SurveyGrid<T> {
    pub fn agreement_rate(&self) -> Option<f64> {
        (self.traced > 0).then(|| self.agreeing as f64 / self.traced as f64)
    }

    pub fn cell_size(&self) -> (T, T) {
        let r = self.region;
        (
            (r.x1 - r.x0) / lit((self.nx - 1) as f64),
            (r.y1 - r.y0) / lit((self.ny - 1) as f64),
        )
    }
}

/// Criterion over the grid of nodes `x0..x1 × y0..y1`, with an optional
/// tracing check on a seeded subsample.
///
/// A node is marked `on_locus` when the first-order distance `|Im f|/|f'|`,
/// `f = a + b ± 2√(ab)`, to either branch is at most half a cell diagonal.
pub fn survey<T: Real>(a: Complex<T>, region: SurveyRegion<T>, opts: &SurveyOptions<T>) -> Result<SurveyGrid<T>> {
    if opts.nx < 2 || opts.ny < 2 {
        return Err(QdError::InvalidArgument("survey resolution must be at least 2x2".into()));
    }
    if !(region.x1 > region.x0) || !(region.y1 > region.y0) {
        return Err(QdError::InvalidArgument("survey region must have positive extent".into()));
    }
    if a.norm() == T::zero() {
        return Err(QdError::Degenerate("survey needs a ≠ 0".into()));
    }
    let (nx, ny) = (opts.nx, opts.ny);
    let dx = (region.x1 - region.x0) / lit((nx - 1) as f64);
    let dy = (region.y1 - region.y0) / lit((ny - 1) as f64);
    let half_diag = (dx * dx + dy * dy).sqrt() / lit(2.0);
    let mut cells: Vec<SurveyCell<T>> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let b = Complex::new(region.x0 + dx * lit(i as f64), region.y0 + dy * lit(j as f64));
            let node = QDiff::new(a, b).ok().filter(|q| !q.is_degenerate_zero() && !q.is_degenerate_equal());
            let detail = node.and_then(|q| criterion_with_tolerance(&q, lit(TAU_CRIT)).ok());
            let (class, ambiguous, on_locus) = match detail {
                Some(d) => {
                    // first-order distance |Im f| / |f'| with f = a + b ± 2√(ab)
                    let ratio = a / (a * b).sqrt();
                    let one = Complex::new(T::one(), T::zero());
                    let est_plus = d.im_plus.abs() / (one + ratio).norm();
                    let est_minus = d.im_minus.abs() / (one - ratio).norm();
                    let near = est_plus.min(est_minus) <= half_diag;
                    (d.class, d.boundary_ambiguous, near || d.class.holds())
                }
                // b = a or b = 0 lie on the locus
                None => (CriterionClass::BothReal, false, true),
            };
            SurveyCell { i, j, b, class, on_locus, boundary_ambiguous: ambiguous, critical_count: None, agreement: None }
        })
        .collect();

    let mut traced = 0;
    let mut agreeing = 0;
    if opts.trace_sample > 0 {
        let eligible: Vec<usize> = (0..cells.len())
            .filter(|&k| {
                let c = &cells[k];
                !c.boundary_ambiguous && (c.b - a).norm() > T::zero() && c.b.norm() > T::zero()
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let amount = opts.trace_sample.min(eligible.len());
        let mut picks: Vec<usize> = sample(&mut rng, eligible.len(), amount).into_iter().map(|k| eligible[k]).collect();
        picks.sort_unstable();
        let results: Vec<(usize, Result<super::CriticalGraph<T>>)> = picks
            .par_iter()
            .map(|&k| (k, QDiff::new(a, cells[k].b).and_then(|q| classify_graph(&q, &opts.trace))))
            .collect();
        for (k, res) in results {
            let graph = res?;
            traced += 1;
            let ok = graph.agreement.unwrap_or(true);
            if ok {
                agreeing += 1;
            }
            cells[k].critical_count = Some(graph.critical_count);
            cells[k].agreement = Some(ok);
        }
    }
    Ok(SurveyGrid { a, region, nx, ny, cells, traced, agreeing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periods::criterion_detail;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn parabola_through_two_i() {
        let g = gamma_locus(c(1.0, 0.0)).unwrap();
        let p = g.branches[1].at_y(2.0).unwrap();
        assert!((p - c(0.0, 2.0)).norm() < 1e-15);
        assert_eq!(g.branches[0].shape, BranchShape::Ray);
        let vertex = g.branches[1].at_y(0.0).unwrap();
        assert!((vertex - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sampled_points_satisfy_criterion() {
        for a in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)] {
            let g = gamma_locus(a).unwrap();
            for b in g.sample(25, 2.3) {
                let Ok(q) = QDiff::new(a, b) else { continue };
                if q.is_degenerate_zero() || q.is_degenerate_equal() {
                    continue;
                }
                let d = criterion_detail(&q).unwrap();
                assert!(d.class.holds(), "a={a} b={b} {d:?}");
            }
        }
    }

    #[test]
    fn printed_first_parabola_matches_second_does_not() {
        let g = gamma_locus(c(0.0, 1.0)).unwrap();
        let ys: Vec<f64> = (0..21).map(|k| -3.0 + 0.3 * k as f64).collect();
        let (d1, d2) = g.printed_formula_discrepancy(&ys).unwrap();
        assert!(d1 < 1e-12);
        // Re√i = Im√i, so the swapped terms coincide here
        assert!(d2 < 1e-12);
        let g = gamma_locus(c(1.0, 1.0)).unwrap();
        let (d1, d2) = g.printed_formula_discrepancy(&ys).unwrap();
        assert!(d1 < 1e-12);
        assert!(d2 > 0.1);
    }

    #[test]
    fn a_zero_is_rejected() {
        assert!(gamma_locus(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn distance_to_locus() {
        let g = gamma_locus(c(1.0, 0.0)).unwrap();
        assert!(g.distance(c(2.0, 0.0)) < 1e-9);
        assert!(g.distance(c(0.0, -2.0)) < 1e-9);
        assert!((g.distance(c(3.0, 0.5)) - 0.5).abs() < 0.05);
    }

    #[test]
    fn survey_marks_locus() {
        let opts = SurveyOptions { nx: 41, ny: 41, trace_sample: 0, seed: 1, trace: TraceConfig::default() };
        let region = SurveyRegion { x0: -3.0, x1: 3.0, y0: -3.0, y1: 3.0 };
        let grid = survey(c(1.0, 0.0), region, &opts).unwrap();
        let g = gamma_locus(c(1.0, 0.0)).unwrap();
        let (hx, _) = grid.cell_size();
        let marked: Vec<_> = grid.cells.iter().filter(|c| c.on_locus).collect();
        assert!(marked.len() > 40);
        for cell in marked {
            assert!(g.distance(cell.b) <= 2.0 * hx, "{cell:?}");
        }
    }
}
