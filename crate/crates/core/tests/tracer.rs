use proptest::prelude::*;

use quadiff::scalar::directed_hausdorff;
use quadiff::tracer::{field_directions, launch, trace_launches};
use quadiff::{
    trace, trace_all_from_zeros, Arc, Complex, QDiff, QDiff64, TerminationKind, TraceConfig64, TrajectoryKind,
    ZeroId, C64,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Running `κ∫√D/z dz` along the polyline, by 5-point Gauss on each half
/// chord with `√D` continued by nearest root from the start of the arc.
fn running_level(q: &QDiff64, arc: &Arc<f64>) -> Vec<f64> {
    let kappa = match arc.kind {
        TrajectoryKind::Horizontal => c(1.0, 0.0),
        TrajectoryKind::Vertical => c(0.0, -1.0),
    };
    let r = (10.0f64 / 7.0).sqrt();
    let (x1, x2) = ((5.0 - 2.0 * r).sqrt() / 3.0, (5.0 + 2.0 * r).sqrt() / 3.0);
    let (w1, w2) = ((322.0 + 13.0 * 70f64.sqrt()) / 900.0, (322.0 - 13.0 * 70f64.sqrt()) / 900.0);
    let nodes = [(-x2, w2), (-x1, w1), (0.0, 128.0 / 225.0), (x1, w1), (x2, w2)];
    let p = &arc.samples;
    // seed the branch a little way along the first chord, away from the zero
    let mut s = q.eval_d(p[0] + (p[1] - p[0]) * 0.5).sqrt();
    let follow = |z: C64, s: &mut C64| {
        let r = q.eval_d(z).sqrt();
        if r.norm() > 0.0 {
            *s = if (r - *s).norm() <= (r + *s).norm() { r } else { -r };
        }
    };
    let mut acc = c(0.0, 0.0);
    let mut out = vec![0.0];
    for w in p.windows(2) {
        for half in 0..2 {
            let z0 = w[0] + (w[1] - w[0]) * (half as f64 / 2.0);
            let z1 = w[0] + (w[1] - w[0]) * ((half + 1) as f64 / 2.0);
            let mut seg = c(0.0, 0.0);
            for &(x, wt) in &nodes {
                let z = z0 + (z1 - z0) * ((x + 1.0) / 2.0);
                follow(z, &mut s);
                seg += s / z * wt / 2.0;
            }
            follow(z1, &mut s);
            acc += seg * (z1 - z0);
        }
        out.push((kappa * acc).re);
    }
    out
}

/// Cubic Hermite refinement of a traced polyline using the exact field
/// direction at each vertex, so chord sagitta does not pollute distances.
fn refine(q: &QDiff64, arc: &Arc<f64>, sub: usize) -> Vec<C64> {
    let p = &arc.samples;
    let tangent = |z: C64, chord: C64| {
        let near = [z.norm(), (z - q.a()).norm(), (z - q.b()).norm()].into_iter().fold(f64::INFINITY, f64::min);
        if near < 1e-7 * q.scale() {
            return chord / chord.norm();
        }
        let (h, v) = field_directions(q, z);
        let t = if arc.kind == TrajectoryKind::Horizontal { h } else { v };
        if (t * chord.conj()).re < 0.0 { -t } else { t }
    };
    let mut out = vec![p[0]];
    for w in p.windows(2) {
        let (p0, p1) = (w[0], w[1]);
        let chord = p1 - p0;
        let len = chord.norm();
        if len == 0.0 {
            continue;
        }
        let (m0, m1) = (tangent(p0, chord) * len, tangent(p1, chord) * len);
        for k in 1..=sub {
            let t = k as f64 / sub as f64;
            let (t2, t3) = (t * t, t * t * t);
            out.push(p0 * (2.0 * t3 - 3.0 * t2 + 1.0) + m0 * (t3 - 2.0 * t2 + t) + p1 * (-2.0 * t3 + 3.0 * t2) + m1 * (t3 - t2));
        }
    }
    out
}

fn arc_len(arc: &Arc<f64>) -> f64 {
    arc.samples.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

fn polar() -> impl Strategy<Value = C64> {
    (0.1f64..10.0, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

#[test]
fn level_is_conserved_on_catalogue_arcs() {
    let cfg = TraceConfig64::default();
    let cases = [(c(1.0, 0.0), c(4.0, 0.0)), (c(1.0, 0.0), c(3.0, 4.0)), (c(1.0, 0.0), c(0.0, 2.0)), (c(-1.0, 8f64.sqrt()), c(-1.0, -(8f64.sqrt())))];
    for (a, b) in cases {
        let q = QDiff64::new(a, b).unwrap();
        for kind in [TrajectoryKind::Horizontal, TrajectoryKind::Vertical] {
            for arc in trace_launches(&q, kind, &cfg).unwrap() {
                let len = arc_len(&arc);
                let mut level = running_level(&q, &arc);
                if arc.termination.reaches_origin() {
                    // the recorded endpoint is the pole itself
                    level.pop();
                }
                let worst = level.into_iter().fold(0.0, |m: f64, v| m.max(v.abs()));
                assert!(worst < 1e-7 * len.max(1.0), "a={a} b={b} {kind:?} drift {worst:e} over length {len}");
            }
        }
    }
}

/// Symmetric Hausdorff distance between two traced arcs, vertices of each
/// against the refined curve of the other.
fn arc_distance(q: &QDiff64, x: &Arc<f64>, xs: &[C64], y: &Arc<f64>, ys: &[C64]) -> f64 {
    directed_hausdorff(xs, &refine(q, y, 64)).max(directed_hausdorff(ys, &refine(q, x, 64)))
}

fn eps_level(cfg: &TraceConfig64, arc: &Arc<f64>) -> f64 {
    cfg.level_tol * arc_len(arc).max(1.0)
}

#[test]
fn short_trajectory_is_reversible() {
    let cfg = TraceConfig64::default();
    for (a, b) in [(c(1.0, 0.0), c(4.0, 0.0)), (c(1.0, 0.0), c(0.0, 2.0)), (c(0.5, 1.5), c(0.5, -1.5))] {
        let q = QDiff64::new(a, b).unwrap();
        let shorts = |id: ZeroId| -> Vec<Arc<f64>> {
            (0..3)
                .map(|r| launch(&q, id, r, TrajectoryKind::Horizontal, &cfg).unwrap())
                .filter(|arc| matches!(arc.termination, TerminationKind::ShortTrajectory { .. }))
                .collect()
        };
        let (from_a, from_b) = (shorts(ZeroId::A), shorts(ZeroId::B));
        assert!(!from_a.is_empty() && from_a.len() == from_b.len(), "a={a} b={b}");
        for x in &from_a {
            let best = from_b
                .iter()
                .map(|y| arc_distance(&q, x, &x.samples, y, &y.samples))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 10.0 * eps_level(&cfg, x), "a={a} b={b}: {best:e}");
        }
    }
}

fn mirrored(points: &[C64]) -> Vec<C64> {
    points.iter().map(|z| z.conj()).collect()
}

fn assert_conjugation_symmetric(a: C64, b: C64) {
    let cfg = TraceConfig64::default();
    let q = QDiff64::new(a, b).unwrap();
    let arcs = trace_all_from_zeros(&q, &cfg).unwrap();
    for x in &arcs {
        let m = mirrored(&x.samples);
        let rm = mirrored(&refine(&q, x, 64));
        let best = arcs
            .iter()
            .map(|y| directed_hausdorff(&m, &refine(&q, y, 64)).max(directed_hausdorff(&y.samples, &rm)))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 10.0 * eps_level(&cfg, x), "a={a} b={b}: mirrored {} off by {best:e}", x.termination.tag());
    }
}

#[test]
fn real_pairs_are_conjugation_symmetric() {
    assert_conjugation_symmetric(c(1.0, 0.0), c(4.0, 0.0));
    assert_conjugation_symmetric(c(-2.0, 0.0), c(-5.0, 0.0));
    assert_conjugation_symmetric(c(-2.0, 0.0), c(3.0, 0.0));
    assert_conjugation_symmetric(c(-1.0, 8f64.sqrt()), c(-1.0, -(8f64.sqrt())));
    assert_conjugation_symmetric(c(0.5, 1.5), c(0.5, -1.5));
}

#[test]
fn tracing_in_single_precision() {
    let q = QDiff::<f32>::new(Complex::new(1.0, 0.0), Complex::new(4.0, 0.0)).unwrap();
    let cfg = quadiff::TraceConfig::<f32> {
        rtol: 1e-5,
        atol: 1e-6,
        launch_offset: 1e-3,
        eps_hit: 1e-3,
        level_tol: 1e-3,
        r_min: 1e-4,
        ..Default::default()
    };
    let arc = trace(&q, Complex::new(1.001, 0.0), Complex::new(1.0, 0.0), TrajectoryKind::Horizontal, &cfg).unwrap();
    assert!(matches!(arc.termination, TerminationKind::ShortTrajectory { endpoint: ZeroId::B, .. }), "{:?}", arc.termination);
    assert!(arc.samples.iter().all(|z| z.im.abs() < 1e-3));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn fields_are_orthogonal(a in polar(), b in polar(), z in polar()) {
        let q = QDiff64::new(a, b).unwrap();
        let clearance = [z.norm(), (z - a).norm(), (z - b).norm()].into_iter().fold(f64::INFINITY, f64::min);
        prop_assume!(clearance > 1e-3);
        let (h, v) = field_directions(&q, z);
        let angle = (v / h).arg().abs();
        prop_assert!((angle - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        // horizontal: Q dz² > 0; vertical: Q dz² < 0
        let qz = q.eval_q(z);
        prop_assert!((qz * h * h).re > 0.0 && (qz * h * h).im.abs() < 1e-9 * (qz * h * h).norm());
        prop_assert!((qz * v * v).re < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn every_launch_terminates(a in polar(), b in polar()) {
        let q = QDiff64::new(a, b).unwrap();
        prop_assume!(!q.is_degenerate_equal());
        let arcs = trace_launches(&q, TrajectoryKind::Horizontal, &TraceConfig64::default()).unwrap();
        prop_assert_eq!(arcs.len(), 6);
        for arc in &arcs {
            prop_assert!(!matches!(arc.termination, TerminationKind::StepBudgetExceeded), "a={} b={}", a, b);
        }
    }
}
