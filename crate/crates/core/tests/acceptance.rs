//! Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lorlen::boundary::{check_vertical_past_covers, future_boundary_classes, Horizon};
use lorlen::causal::{check_axioms, Axiom, AxiomOptions, Coverage};
use lorlen::comparison::{
    certify_curvature_below, law_of_cosines_residual, minkowski_tau, realize, vertex_angles, CertOptions, SideLengths,
    TriangleSampler, VertexRole,
};
use lorlen::geodesy::{null_chain_scan, NullScanOptions};
use lorlen::metric::{MetricSpace, Point};
use lorlen::product::{build_causal_structure, sprinkle, Mode, ProductEvent, ProductSpace, ProductStructure, Region};
use lorlen::split::{convergence_sweep, run_split, RunConfig, SweepConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Report files written by the first pass and compared by criterion 9.
struct Artifact {
    name: &'static str,
    json: String,
}

fn structure(ps: &ProductSpace, mode: Mode, seed: u64) -> ProductStructure {
    build_causal_structure(ps, sprinkle(ps, &mode, seed).unwrap(), None).unwrap()
}

fn circle() -> MetricSpace {
    MetricSpace::circle(1.0).unwrap()
}

fn torus() -> MetricSpace {
    MetricSpace::torus(1.0, 1.0).unwrap()
}

fn tripod() -> MetricSpace {
    MetricSpace::tripod(1.0, 1.0, 1.0).unwrap()
}

fn diamond(mode: Mode, seed: u64) -> ProductStructure {
    let strip = ProductSpace::new(MetricSpace::interval(2.0).unwrap(), (0.0, 2.0)).unwrap();
    let lo = ProductEvent::new(Point::Line(1.0), 0.0);
    let hi = ProductEvent::new(Point::Line(1.0), 2.0);
    let ps = strip.with_region(Region::Diamond { lo, hi }).unwrap();
    structure(&ps, mode, seed)
}

fn axiom_suite() -> Outcome {
    let mut worst: Option<f64> = None;
    let mut triples = 0u64;
    let mut failed = Vec::new();
    for i in 0..20u64 {
        let target = 1000.0 + 200.0 * i as f64;
        let (sigma, measure) = match i % 3 {
            0 => (circle(), 1.0),
            1 => (torus(), 1.0),
            _ => (tripod(), 3.0),
        };
        let ps = ProductSpace::new(sigma, (0.0, 4.0)).unwrap();
        let st = structure(&ps, Mode::Poisson { density: target / (4.0 * measure) }, 100 + i);
        let opts = AxiomOptions {
            triples: Coverage::Sampled { count: 100_000, seed: i },
            ..AxiomOptions::with_tol(1e-9)
        };
        let r = check_axioms(st.cs(), &opts);
        if let Some(s) = r.worst_slack(Axiom::ReverseTriangle) {
            worst = Some(worst.map_or(s, |w: f64| w.min(s)));
        }
        triples += r.triples_checked;
        if !r.passed() || r.triples_checked < 100_000 {
            failed.push(i);
        }
    }
    outcome(failed.is_empty(), format!("20 structures, {triples} triples, worst reverse-triangle violation {worst:?}, failing seeds {failed:?}"))
}

fn geodesic_convergence() -> Outcome {
    let cfg = SweepConfig { densities: vec![100.0, 250.0, 500.0, 1000.0], pairs: 50, min_tau: 1.0, window: [0.0, 3.0], seed: 2 };
    let rows = convergence_sweep(&circle(), &cfg).unwrap();
    let medians: Vec<f64> = rows.iter().map(|r| r.median_rel_error).collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let last = *medians.last().unwrap();
    outcome(decreasing && last <= 0.05, format!("median relative errors {medians:.4?}"))
}

fn comparison_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut recon, mut cosines, mut rapidity) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100_000 {
        let l12 = 10f64.powf(rng.random_range(-2.0..1.0));
        let l23 = 10f64.powf(rng.random_range(-2.0..1.0));
        let extra = if rng.random_bool(0.05) { 0.0 } else { 10f64.powf(rng.random_range(-6.0..1.0)) };
        let sides = SideLengths::new(l12, l23, l12 + l23 + extra).unwrap();
        let tri = realize(sides).unwrap();
        let v = tri.vertices;
        let got = [minkowski_tau(v[0], v[1]), minkowski_tau(v[1], v[2]), minkowski_tau(v[0], v[2])];
        let want = [sides.l12, sides.l23, sides.l13];
        for (g, w) in got.iter().zip(want) {
            recon = recon.max((g - w).abs() / sides.l13);
        }
        for role in [VertexRole::Past, VertexRole::Middle, VertexRole::Future] {
            cosines = cosines.max(law_of_cosines_residual(sides, role).unwrap().abs());
        }
        let a = vertex_angles(sides).unwrap();
        rapidity = rapidity.max((a.theta2 - a.theta1 - a.theta3).abs() / a.theta2.max(1.0));
    }
    let mut pencils_ok = 0;
    for _ in 0..100 {
        let (a, b) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
        let thetas: Vec<f64> = (0..=14)
            .map(|k| {
                let eps = if k == 14 { 0.0 } else { 10f64.powi(-k) };
                vertex_angles(SideLengths::new(a, b, a + b + eps).unwrap()).unwrap().theta2
            })
            .collect();
        let monotone = thetas.windows(2).all(|w| w[1] <= w[0]);
        if monotone && thetas[14] == 0.0 && thetas[13] < 1e-5 {
            pencils_ok += 1;
        }
    }
    let pass = recon <= 1e-12 && cosines <= 1e-9 && rapidity <= 1e-9 && pencils_ok == 100;
    outcome(
        pass,
        format!("reconstruction {recon:.2e}, cosine residual {cosines:.2e}, rapidity {rapidity:.2e}, continuous pencils {pencils_ok}/100"),
    )
}

fn curvature_certification(art: &mut Vec<Artifact>) -> Outcome {
    let cyl = ProductSpace::new(circle(), (0.0, 10.0)).unwrap();
    let flat = certify_curvature_below(&cyl, &CertOptions::default()).unwrap();
    let tri = ProductSpace::new(tripod(), (0.0, 10.0)).unwrap();
    let opts = CertOptions { triangles: 256, sampler: TriangleSampler::Straddle, seed: 4, ..CertOptions::default() };
    let branch = certify_curvature_below(&tri, &opts).unwrap();
    art.push(Artifact { name: "certify_cylinder", json: serde_json::to_string_pretty(&flat).unwrap() });
    art.push(Artifact { name: "certify_tripod", json: serde_json::to_string_pretty(&branch).unwrap() });
    let pass = flat.violation_count == 0 && flat.max_abs_gap <= 1e-6 && branch.violation_count >= 1;
    outcome(
        pass,
        format!(
            "cylinder {} violations, max |τ−τ̄| {:.2e}; tripod {} verified violations, worst slack {:.3}",
            flat.violation_count, flat.max_abs_gap, branch.violation_count, branch.worst_slack
        ),
    )
}

fn class_counts(seed: u64) -> (usize, usize, usize) {
    let count = |st: &ProductStructure| {
        let h = Horizon::for_product(st, None).unwrap();
        assert!(h.margin > st.space().sigma().diameter());
        future_boundary_classes(st.cs(), &h).unwrap().count
    };
    let cyl = ProductSpace::new(circle(), (0.0, 3.0)).unwrap();
    let tor = ProductSpace::new(torus(), (0.0, 3.0)).unwrap();
    let a = count(&structure(&cyl, Mode::Poisson { density: 200.0 }, seed));
    let b = count(&structure(&tor, Mode::Poisson { density: 200.0 }, seed));
    let st = diamond(Mode::Poisson { density: 300.0 }, seed);
    let h = Horizon::for_product(&st, None).unwrap();
    (a, b, future_boundary_classes(st.cs(), &h).unwrap().count)
}

fn boundary_structure(art: &mut Vec<Artifact>) -> Outcome {
    let runs: Vec<(usize, usize, usize)> = (0..5).map(class_counts).collect();
    art.push(Artifact { name: "boundary_classes", json: serde_json::to_string(&runs).unwrap() });
    let pass = runs.iter().all(|&(a, b, c)| a == 1 && b == 1 && c >= 2);
    outcome(pass, format!("(cylinder, torus, diamond) class counts per seed {runs:?}"))
}

fn vertical_past_coverage() -> Outcome {
    let mut worst = 1.0f64;
    for (sigma, per_axis) in [(circle(), 16), (torus(), 4)] {
        let ps = ProductSpace::new(sigma.clone(), (0.0, 3.0)).unwrap();
        let st = structure(&ps, Mode::Poisson { density: 300.0 }, 6);
        let h = Horizon::for_product(&st, None).unwrap();
        for b in sigma.grid(per_axis).unwrap() {
            worst = worst.min(check_vertical_past_covers(&st, &b, &h).unwrap().fraction);
        }
    }
    let st = diamond(Mode::Poisson { density: 300.0 }, 6);
    let h = Horizon::for_product(&st, None).unwrap();
    let d = check_vertical_past_covers(&st, &Point::Line(0.3), &h).unwrap().fraction;
    outcome(worst == 1.0 && d < 1.0, format!("smallest product fraction {worst}, diamond fiber 0.3 fraction {d:.4}"))
}

fn no_null_lines() -> Outcome {
    let ps = ProductSpace::new(circle(), (0.0, 2.0)).unwrap();
    let cyl = structure(&ps, Mode::Grid { nx: 16, nt: 33 }, 0);
    let a = null_chain_scan(cyl.cs(), &NullScanOptions::default());
    let d = null_chain_scan(diamond(Mode::Grid { nx: 17, nt: 17 }, 0).cs(), &NullScanOptions::default());
    let pass = a.chains > 0 && a.no_null_lines && !a.truncated && !d.no_null_lines;
    outcome(
        pass,
        format!(
            "cylinder {}/{} chains obstructed, flag {}; diamond {}/{} obstructed, flag {}",
            a.obstructed, a.chains, a.no_null_lines, d.obstructed, d.chains, d.no_null_lines
        ),
    )
}

const SPLIT_POISSON: &str = r#"{
    "sprinkle": {"sigma": {"type": "circle", "L": 1.0}, "window": [-10, 10], "mode": {"poisson": {"density": 500}}, "seed": 8},
    "family": [2.5, 5, 10]
}"#;

const SPLIT_GRID: &str = r#"{
    "sprinkle": {"sigma": {"type": "circle", "L": 1.0}, "window": [-10, 10], "mode": {"grid": {"nx": 16, "nt": 321}},
                 "step_radius": 0.3},
    "family": [2.5, 5, 10]
}"#;

fn split_report(json: &str) -> lorlen::split::SplitReport {
    let cfg: RunConfig = serde_json::from_str(json).unwrap();
    run_split(&cfg).unwrap()
}

fn splitting_recovery(art: &mut Vec<Artifact>) -> Outcome {
    let r = split_report(SPLIT_POISSON);
    art.push(Artifact { name: "split_poisson", json: serde_json::to_string_pretty(&r).unwrap() });
    let g = split_report(SPLIT_GRID);
    let Some(rec) = &r.recovery else {
        return outcome(false, format!("no recovery: {:?}", r.failures));
    };
    let dist_bound = 0.05 + 2.0 / 500f64.sqrt();
    let curvature = r.curvature.as_ref().is_some_and(|q| q.violations.is_empty() && q.tol == 1e-6);
    let grid_disagreements = g.recovery.as_ref().and_then(|x| x.recovery.map_check.as_ref()).map(|m| m.order_disagreements);
    let pass = rec.time_max_error <= rec.time_bound
        && rec.dist_max_rel_error <= dist_bound
        && rec.recovery.time_order_violations == 0
        && curvature
        && grid_disagreements == Some(0)
        && r.failures.is_empty();
    outcome(
        pass,
        format!(
            "t̂ error {:.3e} (bound {:.3e}), d̂ relative error {:.3e} (bound {dist_bound:.3e}), curvature clean {curvature}, \
             grid order disagreements {grid_disagreements:?}, failures {:?}",
            rec.time_max_error, rec.time_bound, rec.dist_max_rel_error, r.failures
        ),
    )
}

fn determinism(first: &[Artifact]) -> Outcome {
    let mut again = Vec::new();
    curvature_certification(&mut again);
    boundary_structure(&mut again);
    again.push(Artifact { name: "split_poisson", json: serde_json::to_string_pretty(&split_report(SPLIT_POISSON)).unwrap() });
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let mut differing = Vec::new();
    for (a, b) in first.iter().zip(&again) {
        let (pa, pb) = (dir.join(format!("{}_1.json", a.name)), dir.join(format!("{}_2.json", b.name)));
        std::fs::write(&pa, &a.json).unwrap();
        std::fs::write(&pb, &b.json).unwrap();
        if std::fs::read(&pa).unwrap() != std::fs::read(&pb).unwrap() {
            differing.push(a.name);
        }
    }
    let pass = first.len() == again.len() && !first.is_empty() && differing.is_empty();
    outcome(pass, format!("{} report files compared, differing {differing:?}", first.len()))
}

fn main() {
    let mut artifacts = Vec::new();
    let mut all = true;
    let mut run = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        all &= out.pass;
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {name}: {verdict} ({:.1} s) {}", start.elapsed().as_secs_f64(), out.detail);
    };
    run(1, "axiom suite", &mut axiom_suite);
    run(2, "geodesic convergence", &mut geodesic_convergence);
    run(3, "comparison identities", &mut comparison_identities);
    run(4, "curvature certification", &mut || curvature_certification(&mut artifacts));
    run(5, "boundary structure", &mut || boundary_structure(&mut artifacts));
    run(6, "vertical past coverage", &mut vertical_past_coverage);
    run(7, "no null lines", &mut no_null_lines);
    run(8, "splitting recovery", &mut || splitting_recovery(&mut artifacts));
    run(9, "determinism", &mut || determinism(&artifacts));
    if !all {
        std::process::exit(1);
    }
}
