use std::f64::consts::{FRAC_PI_2, PI, TAU};

use proptest::prelude::*;

use quadiff::periods::TAU_CRIT;
use quadiff::scalar::segment_distance;
use quadiff::{criterion_detail, lemma_check, period_integral, CriterionClass, QDiff64, C64};

fn polar(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo..hi, -PI..PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn q(a: C64, b: C64) -> QDiff64 {
    QDiff64::new(a, b).unwrap()
}

/// Clearance of a polyline from the origin, and of its interior from the endpoints.
fn clearance(path: &[C64]) -> f64 {
    let (a, b) = (path[0], *path.last().unwrap());
    let zero = C64::new(0.0, 0.0);
    let n = path.len() - 1;
    let mut d = f64::INFINITY;
    for (k, w) in path.windows(2).enumerate() {
        d = d.min(segment_distance(zero, w[0], w[1]));
        if k > 0 {
            d = d.min(segment_distance(a, w[0], w[1]));
        }
        if k + 1 < n {
            d = d.min(segment_distance(b, w[0], w[1]));
        }
    }
    d
}

/// `(√a ± √b)²` from principal roots, the closed-form side of the identity.
fn squares(a: C64, b: C64) -> [C64; 2] {
    let (ra, rb) = (a.sqrt(), b.sqrt());
    [(ra + rb) * (ra + rb), (ra - rb) * (ra - rb)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn lemma_identity_on_random_polylines(
        a in polar(0.5, 2.0),
        b in polar(0.5, 2.0),
        via in prop::collection::vec((0.05f64..0.95, -3.0f64..3.0), 0..5),
    ) {
        // polylines that are graphs over the segment, on either side of the origin
        prop_assume!((a - b).norm() > 0.1);
        let normal = (b - a) * C64::new(0.0, 1.0) / (b - a).norm();
        let mut via = via;
        via.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut path = vec![a];
        path.extend(via.iter().map(|&(t, h)| a + (b - a) * t + normal * h));
        path.push(b);
        prop_assume!(clearance(&path) > 0.05);
        let d = q(a, b);
        let r = lemma_check(&d, &path).unwrap();
        prop_assert!(r.mismatch < 1e-6, "a={} b={} mismatch {:e}", a, b, r.mismatch);
        // the matched candidate is ±(iπ/2) times one of the closed-form squares
        let sq = squares(a, b);
        let target = r.value / C64::new(0.0, FRAC_PI_2);
        let best = sq.iter().flat_map(|&s| [s, -s]).map(|s| (s - target).norm()).fold(f64::INFINITY, f64::min);
        prop_assert!(best < 1e-6);
    }

    #[test]
    fn homotopic_paths_agree(
        a in polar(0.5, 2.0),
        b in polar(0.5, 2.0),
        t in prop::collection::vec((0.2f64..0.8, -1.0f64..1.0, -1.0f64..1.0), 1..4),
    ) {
        let zero = C64::new(0.0, 0.0);
        let d0 = segment_distance(zero, a, b);
        prop_assume!(d0 > 0.1 && (a - b).norm() > 0.1);
        let r = d0.min(0.2 * (a - b).norm()) / 3.0;
        let mut ts = t.clone();
        ts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut bent = vec![a];
        bent.extend(ts.iter().map(|&(s, x, y)| a + (b - a) * s + C64::new(x, y) * (r / 2f64.sqrt())));
        bent.push(b);
        let d = q(a, b);
        let straight = period_integral(&d, &[a, b]).unwrap();
        let other = period_integral(&d, &bent).unwrap();
        prop_assert!((straight - other).norm() < 1e-8, "{} vs {}", straight, other);
    }

    #[test]
    fn paths_around_the_origin_differ_by_its_residue(a in polar(0.5, 2.0), b in polar(0.5, 2.0)) {
        let zero = C64::new(0.0, 0.0);
        prop_assume!(segment_distance(zero, a, b) > 0.1 && (a + b).norm() > 0.2);
        // the triangle a, -(a+b), b contains the origin
        let far = -(a + b);
        let around = [a, far, b];
        prop_assume!(clearance(&around) > 0.1);
        let d = q(a, b);
        let i1 = period_integral(&d, &[a, b]).unwrap();
        let i2 = period_integral(&d, &around).unwrap();
        let jump = C64::new(0.0, TAU) * (a * b).sqrt();
        let err = (i1 - i2 - jump).norm().min((i1 - i2 + jump).norm());
        prop_assert!(err < 1e-8, "a={} b={} diff {} jump {}", a, b, i1 - i2, jump);
    }

    #[test]
    fn criterion_symmetries(a in polar(0.1, 5.0), b in polar(0.1, 5.0), lambda in 0.1f64..10.0) {
        let base = criterion_detail(&q(a, b)).unwrap().class;
        let swapped = criterion_detail(&q(b, a)).unwrap().class;
        let conj = criterion_detail(&q(a.conj(), b.conj())).unwrap().class;
        let scaled = criterion_detail(&q(a * lambda, b * lambda)).unwrap().class;
        prop_assert_eq!(base, swapped);
        prop_assert_eq!(base, conj);
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn criterion_symmetries_on_the_locus(a in polar(0.1, 5.0), s in -3.0f64..3.0, imaginary in any::<bool>(), lambda in 0.1f64..10.0) {
        let shift = if imaginary { C64::new(0.0, s) } else { C64::new(s, 0.0) };
        let b = (a.sqrt() + shift) * (a.sqrt() + shift);
        prop_assume!(b.norm() > 1e-3 && (a - b).norm() > 1e-3 * a.norm());
        let base = criterion_detail(&q(a, b)).unwrap();
        prop_assert!(base.class.holds(), "a={} b={} {:?}", a, b, base);
        for (x, y) in [(b, a), (a.conj(), b.conj()), (a * lambda, b * lambda)] {
            prop_assert!(criterion_detail(&q(x, y)).unwrap().class.holds());
        }
    }

    #[test]
    fn criterion_matches_closed_form_squares(a in polar(0.1, 5.0), b in polar(0.1, 5.0), on_locus in any::<bool>(), s in -2.0f64..2.0) {
        let b = if on_locus { (a.sqrt() + s) * (a.sqrt() + s) } else { b };
        prop_assume!(b.norm() > 1e-3 && (a - b).norm() > 1e-3 * a.norm());
        let c = criterion_detail(&q(a, b)).unwrap();
        let scale = a.norm() + b.norm();
        let im = squares(a, b).map(|z| z.im.abs());
        let min = im[0].min(im[1]);
        // skip the measure-zero shell where the two evaluations round differently
        prop_assume!((min - TAU_CRIT * scale).abs() > 1e-12 * scale);
        prop_assert_eq!(c.class != CriterionClass::Neither, min < TAU_CRIT * scale);
    }
}
