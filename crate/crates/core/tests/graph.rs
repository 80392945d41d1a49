use proptest::prelude::*;

use quadiff::graph::validate_faces;
use quadiff::{classify_graph, gamma_locus, CaseLabel, CriticalGraph64, QDiff64, TraceConfig64, ZeroId, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn graph(a: C64, b: C64) -> CriticalGraph64 {
    classify_graph(&QDiff64::new(a, b).unwrap(), &TraceConfig64::default()).unwrap()
}

fn catalogue() -> Vec<(C64, C64, CaseLabel)> {
    let s = 8f64.sqrt();
    // a point on the real-shift branch through a = i
    let ra = c(0.0, 1.0).sqrt();
    let on_locus = (ra + 0.7) * (ra + 0.7);
    vec![
        (c(1.0, 0.0), c(4.0, 0.0), CaseLabel::RealPairSegmentPlusLoop),
        (c(-2.0, 0.0), c(-5.0, 0.0), CaseLabel::RealPairSegmentPlusLoop),
        (c(-1.0, s), c(-1.0, -s), CaseLabel::ConjugatePairLoopThroughBoth),
        (c(0.0, 1.0), on_locus, CaseLabel::OneRealitySpiralPlusCritical),
        (c(1.0, 0.0), c(3.0, 4.0), CaseLabel::NoCriticalSpiralCases),
        (c(0.0, 0.0), c(4.0, 0.0), CaseLabel::ZeroAtOrigin),
        (c(1.0, 0.0), c(1.0, 0.0), CaseLabel::EqualZerosReal),
        (c(0.0, 2.0), c(0.0, 2.0), CaseLabel::EqualZerosImaginary),
        (c(1.0, 1.0), c(1.0, 1.0), CaseLabel::EqualZerosGeneric),
    ]
}

#[test]
fn catalogue_labels() {
    for (a, b, label) in catalogue() {
        let g = graph(a, b);
        assert_eq!(g.case_label, label, "a={a} b={b}");
        assert!(g.guard_violations.is_empty(), "a={a} b={b}: {:?}", g.guard_violations);
        assert!(!g.is_validation_failure(), "a={a} b={b}");
    }
}

#[test]
fn real_pair_has_segment_and_loop_at_the_nearer_zero() {
    let g = graph(c(1.0, 0.0), c(4.0, 0.0));
    assert_eq!(g.critical_count, 2);
    assert_eq!(g.short_trajectories().count(), 1);
    assert_eq!(g.zero_loops().count(), 1);
    assert_eq!(g.loop_zero, Some(ZeroId::A));
    let seg = g.short_trajectories().next().unwrap();
    assert!(seg.samples.iter().all(|z| z.im.abs() < 1e-9 && z.re > 1.0 - 1e-9 && z.re < 4.0 + 1e-9));
}

#[test]
fn labels_do_not_depend_on_zero_order() {
    for (a, b, label) in catalogue() {
        assert_eq!(graph(b, a).case_label, label, "a={b} b={a}");
    }
}

#[test]
fn catalogue_faces_satisfy_the_angle_sum() {
    for (a, b, _) in catalogue() {
        let g = graph(a, b);
        let checks = validate_faces(&g).unwrap();
        assert!(!checks.is_empty(), "a={a} b={b}");
        for f in checks {
            assert!(f.error() < 1e-3, "a={a} b={b}: sum {} expected {}", f.sum, f.expected);
        }
    }
}

#[test]
fn points_of_the_locus_carry_critical_trajectories() {
    for a in [c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(-2.0, 0.5)] {
        let locus = gamma_locus(a).unwrap();
        for br in &locus.branches {
            for s in [-1.3, -0.6, 0.4, 1.1] {
                let b = br.point(s);
                let Ok(q) = QDiff64::new(a, b) else { continue };
                if q.is_degenerate_zero() || q.is_degenerate_equal() {
                    continue;
                }
                let g = classify_graph(&q, &TraceConfig64::default()).unwrap();
                assert!(g.has_critical_evidence(), "a={a} b={b} {}", g.case_label);
                assert_ne!(g.case_label, CaseLabel::NoCriticalSpiralCases);
            }
        }
    }
}

fn polar() -> impl Strategy<Value = C64> {
    (0.2f64..5.0, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn random_pairs_agree_with_the_criterion(a in polar(), b in polar()) {
        let q = QDiff64::new(a, b).unwrap();
        prop_assume!(!q.is_degenerate_equal());
        let g = classify_graph(&q, &TraceConfig64::default()).unwrap();
        prop_assert!(!g.is_validation_failure(), "a={} b={} {}", a, b, g.case_label);
        prop_assert!(g.guard_violations.is_empty());
        for f in validate_faces(&g).unwrap() {
            prop_assert!(f.error() < 1e-3, "a={} b={}: sum {} expected {}", a, b, f.sum, f.expected);
        }
        let mirrored = classify_graph(&QDiff64::new(a.conj(), b.conj()).unwrap(), &TraceConfig64::default()).unwrap();
        prop_assert_eq!(mirrored.case_label, g.case_label);
        prop_assert_eq!(mirrored.critical_count, g.critical_count);
    }
}
