//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use quadiff::graph::{validate_faces, CriticalGraph, GuardViolation, SurveyOptions, SurveyRegion};
use quadiff::laguerre::{
    build_polynomial, convergence_report, remark_values, roots, standard_probes, AlgebraicBranch,
};
use quadiff::periods::{criterion_detail, lemma_check, origin_residue_check};
use quadiff::scalar::segment_distance;
use quadiff::{classify_graph, gamma_locus, survey, Sheet, TerminationKind, C64, QDiff64, TraceConfig64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Run {
    failures: usize,
    guards: Vec<(C64, C64, GuardViolation)>,
    graphs: usize,
}

impl Run {
    fn report(&mut self, id: &str, title: &str, pass: bool, detail: String, elapsed: Duration) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id} {title}: {detail} ({:.2} s)", elapsed.as_secs_f64());
        if !pass {
            self.failures += 1;
        }
    }

    fn watch(&mut self, g: &CriticalGraph<f64>) {
        self.graphs += 1;
        for v in &g.guard_violations {
            self.guards.push((g.qdiff.a(), g.qdiff.b(), *v));
        }
    }
}

fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(rng.gen_range(lo..hi), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Straight segment, or a two-segment detour when the segment passes near the origin.
fn path_between(a: C64, b: C64) -> Vec<C64> {
    let zero = C64::new(0.0, 0.0);
    if segment_distance(zero, a, b) > 0.1 {
        return vec![a, b];
    }
    let mid = (a + b) / 2.0;
    let normal = C64::new(0.0, 1.0) * (b - a) / (b - a).norm();
    let side = if (mid + normal).norm() > (mid - normal).norm() { normal } else { -normal };
    vec![a, mid + side * (a - b).norm().max(1.0), b]
}

fn criterion_1(run: &mut Run) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
    let mut errors = Vec::new();
    for _ in 0..20 {
        let (a, b) = (polar(&mut rng, 0.5, 2.0), polar(&mut rng, 0.5, 2.0));
        let q = QDiff64::new(a, b).unwrap();
        let t0 = Instant::now();
        match lemma_check(&q, &path_between(a, b)) {
            Ok(r) => worst = worst.max(r.mismatch),
            Err(e) => errors.push(format!("({a}, {b}): {e}")),
        }
        slowest = slowest.max(t0.elapsed());
    }
    let pass = errors.is_empty() && worst < 1e-6 && slowest < Duration::from_secs(1);
    run.report(
        "1",
        "period identity",
        pass,
        format!("20 cases, max mismatch {worst:.2e}, slowest {:.3} s, errors {errors:?}", slowest.as_secs_f64()),
        t.elapsed(),
    );
}

fn criterion_2(run: &mut Run) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for _ in 0..20 {
        let q = QDiff64::new(polar(&mut rng, 0.5, 2.0), polar(&mut rng, 0.5, 2.0)).unwrap();
        for sheet in [Sheet::Plus, Sheet::Minus] {
            match origin_residue_check(&q, sheet) {
                Ok((v, expect)) => worst = worst.max((v - expect).norm()),
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    let pass = errors.is_empty() && worst < 1e-8;
    run.report("2", "residue at the origin", pass, format!("40 quadratures, max error {worst:.2e}"), t.elapsed());
}

fn criterion_3(run: &mut Run) {
    let t = Instant::now();
    let q = QDiff64::from_parts((1.0, 0.0), (1.0, 0.0)).unwrap();
    let g = classify_graph(&q, &TraceConfig64::default()).unwrap();
    run.watch(&g);
    let Some(lp) = g.zero_loops().next() else {
        run.report("3", "Szegő loop", false, "no loop traced".into(), t.elapsed());
        return;
    };
    let gap = match lp.termination {
        TerminationKind::Loop { gap, .. } => gap,
        _ => f64::INFINITY,
    };
    let dev = lp
        .samples
        .iter()
        .map(|z| ((z * (C64::new(1.0, 0.0) - z).exp()).norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = gap < 1e-6 && dev < 1e-6;
    run.report("3", "Szegő loop", pass, format!("closing gap {gap:.2e}, max level deviation {dev:.2e}"), t.elapsed());
}

fn evidence(g: &CriticalGraph<f64>) -> bool {
    g.has_critical_evidence()
}

fn criterion_4(run: &mut Run) {
    let t = Instant::now();
    let cfg = TraceConfig64::default();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut samples = Vec::new();
    let mut skipped = 0;
    while samples.len() < 500 {
        let a = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let b = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let Ok(q) = QDiff64::new(a, b) else { continue };
        match criterion_detail(&q) {
            Ok(d) if d.relative_distance() >= 1e-3 || d.class.holds() => samples.push(q),
            _ => skipped += 1,
        }
    }
    let graphs: Vec<_> = samples.iter().map(|q| (q, classify_graph(q, &cfg))).collect();
    let mut agree = 0;
    let mut holds = 0;
    let mut lines = Vec::new();
    for (q, g) in &graphs {
        let g = match g {
            Ok(g) => g,
            Err(e) => {
                lines.push(format!("({}, {}): {e}", q.a(), q.b()));
                continue;
            }
        };
        run.watch(g);
        let class = g.criterion.unwrap().class;
        holds += class.holds() as usize;
        if class.holds() == evidence(g) {
            agree += 1;
        } else {
            lines.push(format!("({}, {}): criterion {}, critical arcs {}", q.a(), q.b(), class.label(), g.critical_count));
        }
    }
    let rate = agree as f64 / samples.len() as f64;
    let elapsed = t.elapsed();
    let pass = rate >= 0.99 && elapsed < Duration::from_secs(300);
    for l in &lines {
        println!("       disagreement {l}");
    }
    run.report(
        "4",
        "existence criterion vs tracing",
        pass,
        format!(
            "500 samples ({holds} with criterion holding, {skipped} rejected in band), agreement {:.1}%",
            100.0 * rate
        ),
        elapsed,
    );

    // random samples almost never land on the locus; exercise the forward direction on it
    let t = Instant::now();
    let mut agree = 0;
    let mut total = 0;
    for k in 0..60 {
        let a = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let locus = gamma_locus(a).unwrap();
        let b = locus.branches[k % 2].point(rng.gen_range(-1.5..1.5));
        let Ok(q) = QDiff64::new(a, b) else { continue };
        if q.is_degenerate_equal() || q.is_degenerate_zero() {
            continue;
        }
        let Ok(g) = classify_graph(&q, &cfg) else { continue };
        run.watch(&g);
        total += 1;
        if evidence(&g) == g.criterion.unwrap().class.holds() {
            agree += 1;
        } else {
            println!("       disagreement on locus ({a}, {b}): critical arcs {}", g.critical_count);
        }
    }
    let rate = agree as f64 / total as f64;
    run.report(
        "4+",
        "existence criterion on sampled locus points",
        rate >= 0.99,
        format!("{total} samples, agreement {:.1}%", 100.0 * rate),
        t.elapsed(),
    );
}

fn criterion_5(run: &mut Run) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let big_a = if k % 2 == 0 {
            C64::new(rng.gen_range(-5.0..5.0), 0.0)
        } else {
            C64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))
        };
        worst = worst.max(remark_values(big_a).1);
    }
    run.report("5", "Laguerre zeros meet the criterion", worst < 1e-10, format!("50 values, max error {worst:.2e}"), t.elapsed());
}

fn criterion_6(run: &mut Run) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    let mut count = 0;
    for a in [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 1.0)] {
        let locus = gamma_locus(a).unwrap();
        let mut k = 0;
        while k < 50 {
            let b = locus.branches[k % 2].point(rng.gen_range(-2.0..2.0));
            let Ok(q) = QDiff64::new(a, b) else { continue };
            if q.is_degenerate_equal() || q.is_degenerate_zero() {
                continue;
            }
            let d = criterion_detail(&q).unwrap();
            let im = d.im_plus.abs().min(d.im_minus.abs());
            worst = worst.max(im);
            if !d.class.holds() || im >= 1e-9 {
                failed.push((a, b));
            }
            k += 1;
            count += 1;
        }
    }
    let opts = SurveyOptions { nx: 101, ny: 101, trace_sample: 0, seed: 6, trace: TraceConfig64::default() };
    let region = SurveyRegion { x0: -3.0, x1: 3.0, y0: -3.0, y1: 3.0 };
    let grid = survey(C64::new(1.0, 0.0), region, &opts).unwrap();
    let locus = gamma_locus(C64::new(1.0, 0.0)).unwrap();
    let (hx, hy) = grid.cell_size();
    let marked: Vec<_> = grid.cells.iter().filter(|c| c.on_locus).collect();
    let stray: Vec<_> = marked.iter().filter(|c| locus.distance(c.b) > 2.0 * hx.max(hy)).collect();
    let pass = failed.is_empty() && stray.is_empty();
    run.report(
        "6",
        "reality locus",
        pass,
        format!(
            "{count} locus points, max |Im| {worst:.2e}, {} failing; survey: {} locus cells, {} beyond 2 cells",
            failed.len(),
            marked.len(),
            stray.len()
        ),
        t.elapsed(),
    );
}

fn criterion_7(run: &mut Run) {
    let t = Instant::now();
    let s = 2.0 * 2f64.sqrt();
    let cases = [
        ((1.0, 0.0), (1.0, 0.0)),
        ((1.0, 0.0), (4.0, 0.0)),
        ((0.0, 0.0), (4.0, 0.0)),
        ((-1.0, s), (-1.0, -s)),
        ((1.0, 0.0), (0.0, 2.0)),
        ((1.0, 0.0), (3.0, 4.0)),
    ];
    let mut faces = 0;
    let mut worst = 0.0f64;
    let mut problems = Vec::new();
    for (a, b) in cases {
        let q = QDiff64::from_parts(a, b).unwrap();
        let g = classify_graph(&q, &TraceConfig64::default()).unwrap();
        run.watch(&g);
        match validate_faces(&g) {
            Ok(checks) => {
                for c in checks {
                    faces += 1;
                    let off = c.sum.abs().min((c.sum - 2.0).abs());
                    worst = worst.max(c.error());
                    if off > 1e-3 || c.error() > 1e-3 {
                        problems.push(format!("{a:?},{b:?}: sum {} expected {}", c.sum, c.expected));
                    }
                }
            }
            Err(e) => problems.push(format!("{a:?},{b:?}: {e}")),
        }
    }
    run.report(
        "7",
        "Teichmüller sums",
        problems.is_empty(),
        format!("{faces} faces over 6 graphs, max error {worst:.2e} {problems:?}"),
        t.elapsed(),
    );
}

fn criterion_8(run: &mut Run) {
    let t = Instant::now();
    let big_a = C64::new(-3.0, 0.0);
    let cfg = TraceConfig64::default();
    let branch = AlgebraicBranch::new(big_a, &cfg).unwrap();
    let q = QDiff64::new(branch.a, branch.b).unwrap();
    run.watch(&classify_graph(&q, &cfg).unwrap());
    let m = roots(&build_polynomial(100, big_a).unwrap()).unwrap();
    let support = m.roots.iter().map(|&r| branch.distance_to_cut(r)).fold(0.0, f64::max);
    let probes = standard_probes(&branch);
    let report = convergence_report(&branch, &[25, 50, 100], &probes).unwrap();
    let at_100 = report.max_error.last().unwrap().1;
    let elapsed = t.elapsed();
    let pass = m.converged && support < 0.05 && at_100 < 0.05 && report.monotone && elapsed < Duration::from_secs(30);
    let column: Vec<String> = report.max_error.iter().map(|(n, e)| format!("n={n}: {e:.2e}")).collect();
    run.report(
        "8",
        "Laguerre roots on the critical arc",
        pass,
        format!(
            "max root distance {support:.2e}, root error estimate {:.1e}, max probe error [{}]",
            m.accuracy,
            column.join(", ")
        ),
        elapsed,
    );
}

fn criterion_9(run: &mut Run) {
    let pass = run.guards.is_empty();
    let detail = if pass {
        format!("{} graphs, no origin-bound pair violates the corollaries", run.graphs)
    } else {
        format!("{} violations: {:?}", run.guards.len(), run.guards)
    };
    run.report("9", "corollary guards", pass, detail, Duration::ZERO);
}

fn main() {
    let mut run = Run { failures: 0, guards: Vec::new(), graphs: 0 };
    let t = Instant::now();
    criterion_1(&mut run);
    criterion_2(&mut run);
    criterion_3(&mut run);
    criterion_4(&mut run);
    criterion_5(&mut run);
    criterion_6(&mut run);
    criterion_7(&mut run);
    criterion_8(&mut run);
    criterion_9(&mut run);
    println!("acceptance: {} failing, total {:.1} s", run.failures, t.elapsed().as_secs_f64());
    if run.failures > 0 {
        std::process::exit(1);
    }
}
