//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use circlet::cohomology::{diagram_multiset, persistent_cohomology, qualifies, ranked_classes};
use circlet::coords::{evaluate, evaluate_all, evaluate_from, Targets};
use circlet::filtration::build_rips;
use circlet::harmonic::{harmonic_smooth, vertex_components, Solver, SolverOptions, WeightScheme};
use circlet::io::{load_point_cloud, write_coordinates, write_diagram, write_point_cloud, CsvOptions};
use circlet::lift::IntegerCochain;
use circlet::metric::{DistanceSource, QueryPoint};
use circlet::pipeline::{run_pipeline, ClassRun, Figure, PipelineConfig, PipelineOutput};
use circlet::rng::SeededRng;
use circlet::synth::{generate, torus_point, SynthData, SynthSpec, Shape};
use common::{circle_gap, full_rips, hexagon, max_jump, random_space, rank_oracle_diagram, winding};

const HEXAGON_TOL: f64 = 1e-9;
const HEXAGON_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_SPACES: u64 = 50;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const CIRCLE_BUDGET: Duration = Duration::from_secs(10);
const TORUS_BUDGET: Duration = Duration::from_secs(30);
const WINDING_TOL: f64 = 1e-9;
const WELL_DEFINED_TOL: f64 = 1e-9;
const KLEIN_QUERIES: usize = 1000;
const SOLVER_INSTANCES: usize = 20;
const SOLVER_MAX_LANDMARKS: usize = 60;
const THETA_TOL: f64 = 1e-8;
const TAU_TOL: f64 = 1e-8;
const NORMAL_RESIDUAL_TOL: f64 = 1e-8;
const LOOP_SAMPLES: usize = 1000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_ok(src: &DistanceSource, cfg: &PipelineConfig) -> Result<PipelineOutput, String> {
    run_pipeline(src, cfg).outcome.map_err(|e| e.to_string())
}

fn figure_data(figure: Figure) -> SynthData {
    generate(&figure.synth_spec()).unwrap()
}

/// The circle experiment, read back from a CSV file.
fn circle_from_file() -> (SynthData, DistanceSource) {
    let data = figure_data(Figure::Circle);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("circle.csv");
    let mut buf = Vec::new();
    write_point_cloud(&mut buf, data.source.as_cloud().unwrap()).unwrap();
    std::fs::write(&path, buf).unwrap();
    let loaded = load_point_cloud(&path, CsvOptions::default()).unwrap();
    (data, loaded)
}

fn sorted_by_parameter(data: &SynthData, angles: &[Option<f64>]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| data.parameters[a][0].total_cmp(&data.parameters[b][0]));
    order.iter().map(|&i| angles[i].unwrap()).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let f = build_rips(&hexagon(), 2.1, 2).unwrap();
    let res = persistent_cohomology(&f, 47).unwrap();
    let elapsed = start.elapsed();
    let h1: Vec<_> = res.dim(1).collect();
    ensure(h1.len() == 1, || format!("expected one dimension-1 pair, got {}", h1.len()))?;
    let (b, d) = (h1[0].birth, h1[0].death.ok_or("pair is infinite")?);
    ensure((b - 1.0).abs() <= HEXAGON_TOL && (d - 3f64.sqrt()).abs() <= HEXAGON_TOL, || {
        format!("pair ({b}, {d}) differs from (1, √3)")
    })?;
    ensure(elapsed < HEXAGON_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("pair ({b:.12}, {d:.12}) in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut cycles = 0;
    for seed in 0..ORACLE_SPACES {
        let f = full_rips(&random_space(seed));
        for q in [3u32, 47] {
            let ours = persistent_cohomology(&f, q).map_err(|e| e.to_string())?;
            ensure(diagram_multiset(&ours.pairs) == rank_oracle_diagram(&f, q as u64), || {
                format!("space {seed}, q = {q}: diagram differs from the rank oracle")
            })?;
            cycles += ours.dim(1).count();
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{ORACLE_SPACES} spaces × 2 primes, {cycles} cycle pairs, {elapsed:?}"))
}

fn criterion_3() -> Outcome {
    let (data, src) = circle_from_file();
    let start = Instant::now();
    let out = run_ok(&src, &Figure::Circle.config())?;
    let elapsed = start.elapsed();
    let r_l = out.landmarks.coverage_radius;
    let qualifying = out.persistence.dim(1).filter(|p| qualifies(p, r_l)).count();
    ensure(qualifying == 1, || format!("{qualifying} qualifying pairs"))?;
    let angles = &out.classes[0].angles;
    let uncovered = angles.iter().filter(|a| a.is_none()).count();
    ensure(uncovered == 0, || format!("{uncovered} uncovered points"))?;
    let w = winding(&sorted_by_parameter(&data, angles));
    ensure((w.abs() - 1.0).abs() < WINDING_TOL, || format!("winding {w}"))?;
    ensure(elapsed < CIRCLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("1 qualifying pair, winding {w:+.0}, 0 markers, {elapsed:?}"))
}

fn criterion_4() -> Outcome {
    let data = figure_data(Figure::Circle);
    let out = run_ok(&data.source, &Figure::Circle.config())?;
    let run = &out.classes[0].runs[0];
    let integer = evaluate_all(&run.integer_model(), &data.source, &Targets::AllData).map_err(|e| e.to_string())?;
    let harmonic_jump = max_jump(&sorted_by_parameter(&data, &run.angles));
    let integer_jump = max_jump(&sorted_by_parameter(&data, &integer));
    ensure(harmonic_jump < integer_jump, || {
        format!("harmonic max jump {harmonic_jump} not below integer max jump {integer_jump}")
    })?;
    Ok(format!("max jump harmonic {harmonic_jump:.4} < integer {integer_jump:.4}"))
}

fn loop_winding(run: &ClassRun, src: &DistanceSource, point: impl Fn(f64) -> Vec<f64>) -> Result<f64, String> {
    let angles = (0..LOOP_SAMPLES)
        .map(|k| {
            let s = k as f64 * std::f64::consts::TAU / LOOP_SAMPLES as f64;
            evaluate(&run.model, QueryPoint::Vector(&point(s)), src).map_err(|e| format!("loop query: {e}"))
        })
        .collect::<Result<Vec<f64>, String>>()?;
    Ok(winding(&angles))
}

fn criterion_5() -> Outcome {
    let data = figure_data(Figure::Torus);
    let start = Instant::now();
    let out = run_ok(&data.source, &Figure::Torus.config())?;
    let elapsed = start.elapsed();
    let r_l = out.landmarks.coverage_radius;
    let qualifying = out.persistence.dim(1).filter(|p| qualifies(p, r_l)).count();
    ensure(qualifying >= 2, || format!("{qualifying} qualifying pairs"))?;
    let mut m = [[0.0; 2]; 2];
    for (c, class) in out.classes.iter().take(2).enumerate() {
        let run = &class.runs[0];
        m[c][0] = loop_winding(run, &data.source, |s| torus_point(s, 0.0))?;
        m[c][1] = loop_winding(run, &data.source, |s| torus_point(0.0, s))?;
    }
    for w in m.iter().flatten() {
        ensure((w - w.round()).abs() < WINDING_TOL, || format!("non-integral winding {w}"))?;
    }
    let det = m[0][0].round() * m[1][1].round() - m[0][1].round() * m[1][0].round();
    ensure(det.abs() == 1.0, || format!("winding matrix {m:?} has determinant {det}"))?;
    ensure(elapsed < TORUS_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{qualifying} qualifying pairs, winding matrix {m:?}, |det| = 1, {elapsed:?}"))
}

fn criterion_6() -> Outcome {
    let data = figure_data(Figure::Klein);
    let cfg = Figure::Klein.config();
    ensure(cfg.prime == 13, || "klein run must use q = 13".into())?;
    let out = run_ok(&data.source, &cfg)?;
    let pairs = &out.persistence.pairs;
    let top = *ranked_classes(pairs).first().ok_or("no finite dimension-1 pair")?;
    let chosen = out.classes[0].runs[0].pair_indices[0];
    ensure(qualifies(&pairs[top], out.landmarks.coverage_radius) && chosen == top, || {
        "the most persistent class does not qualify".into()
    })?;
    let model = &out.classes[0].runs[0].model;
    let src = &data.source;
    let mut rng = SeededRng::new(606);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < KLEIN_QUERIES {
        let i = rng.below(src.len() as u64) as usize;
        let q = QueryPoint::Index(i);
        let Ok(base) = evaluate(model, q, src) else { continue };
        for (j, &l) in model.landmarks.iter().enumerate() {
            if src.between(i, l) < model.alpha {
                let other = evaluate_from(model, q, src, j).map_err(|e| e.to_string())?;
                worst = worst.max(circle_gap(base, other));
            }
        }
        checked += 1;
    }
    ensure(worst <= WELL_DEFINED_TOL, || format!("covering indices disagree by {worst}"))?;
    Ok(format!("q = 13, most persistent class used, max disagreement {worst:.2e} over {checked} queries"))
}

/// Seeded instances with at most `SOLVER_MAX_LANDMARKS` landmarks.
fn solver_suite() -> Vec<(SynthData, PipelineConfig)> {
    (0..SOLVER_INSTANCES)
        .map(|k| {
            let (spec, landmarks) = if k % 2 == 0 {
                (SynthSpec { shape: Shape::NoisyCircle, n: 300, noise_sigma: 0.1, seed: 100 + k as u64 }, 20 + 2 * k)
            } else {
                (SynthSpec { shape: Shape::Torus, n: 600, noise_sigma: 0.0, seed: 100 + k as u64 }, SOLVER_MAX_LANDMARKS)
            };
            let mut cfg = PipelineConfig::default();
            cfg.landmarks.count = landmarks.min(SOLVER_MAX_LANDMARKS);
            (generate(&spec).unwrap(), cfg)
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut worst_theta: f64 = 0.0;
    let mut worst_tau: f64 = 0.0;
    let mut worst_normal: f64 = 0.0;
    for (k, (data, cfg)) in solver_suite().iter().enumerate() {
        let out = run_ok(&data.source, cfg).map_err(|e| format!("instance {k}: {e}"))?;
        let run = &out.classes[0].runs[0];
        let f = &run.filtration;
        let weights = WeightScheme::default();
        let iterative = harmonic_smooth(&run.lift, f, &weights, &SolverOptions::default()).map_err(|e| e.to_string())?;
        let dense_opts = SolverOptions { solver: Solver::DenseSvd, ..SolverOptions::default() };
        let dense = harmonic_smooth(&run.lift, f, &weights, &dense_opts).map_err(|e| e.to_string())?;
        let theta = iterative.theta.iter().zip(&dense.theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (labels, count) = vertex_components(f);
        let mut offset = vec![None; count];
        let mut tau: f64 = 0.0;
        for (v, (a, b)) in iterative.tau.iter().zip(&dense.tau).enumerate() {
            let c = *offset[labels[v]].get_or_insert(a - b);
            tau = tau.max((a - b - c).abs());
        }
        worst_theta = worst_theta.max(theta);
        worst_tau = worst_tau.max(tau);
        worst_normal = worst_normal.max(iterative.normal_residual).max(dense.normal_residual);
        ensure(theta <= THETA_TOL, || format!("instance {k}: θ differs by {theta:e}"))?;
        ensure(tau <= TAU_TOL, || format!("instance {k}: τ differs by {tau:e} beyond a constant"))?;
        ensure(worst_normal <= NORMAL_RESIDUAL_TOL, || format!("instance {k}: normal residual {worst_normal:e}"))?;
    }
    Ok(format!(
        "{SOLVER_INSTANCES} instances: max |Δθ| {worst_theta:.1e}, max |Δτ| {worst_tau:.1e}, normal residual ≤ {worst_normal:.1e}"
    ))
}

fn check_lift(run: &ClassRun, label: &str) -> Result<(), String> {
    let lift: &IntegerCochain = &run.lift;
    ensure(lift.cocycle_violation(&run.filtration).is_none(), || format!("{label}: lift is not a cocycle"))?;
    let prime = circlet::cohomology::Prime::new(run.cocycle_mod_q.prime()).unwrap();
    let back = lift.reduce_mod(prime);
    for e in run.filtration.edges() {
        ensure(back.get(e.i, e.j) == run.cocycle_mod_q.get(e.i, e.j), || {
            format!("{label}: lift mod q differs on edge ({}, {})", e.i, e.j)
        })?;
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let mut checked = 0;
    for figure in Figure::ALL {
        let data = figure_data(figure);
        let out = run_ok(&data.source, &figure.config())?;
        for class in &out.classes {
            for run in &class.runs {
                check_lift(run, figure.name())?;
                checked += 1;
            }
        }
    }
    for (k, (data, cfg)) in solver_suite().iter().enumerate() {
        let out = run_ok(&data.source, cfg)?;
        check_lift(&out.classes[0].runs[0], &format!("instance {k}"))?;
        checked += 1;
    }
    Ok(format!("{checked} lifts verified exactly"))
}

fn artifacts(src: &DistanceSource) -> Result<(Vec<u8>, Vec<u8>), String> {
    let out = run_ok(src, &Figure::Circle.config())?;
    let ids: Vec<usize> = (0..src.len()).collect();
    let columns: Vec<_> = out.classes.iter().map(|c| c.angles.clone()).collect();
    let mut csv = Vec::new();
    write_coordinates(&mut csv, &ids, &columns, false).map_err(|e| e.to_string())?;
    let mut json = Vec::new();
    write_diagram(&mut json, &out.persistence.pairs).map_err(|e| e.to_string())?;
    Ok((csv, json))
}

fn criterion_9() -> Outcome {
    let (_, first_src) = circle_from_file();
    let (_, second_src) = circle_from_file();
    let first = artifacts(&first_src)?;
    let second = artifacts(&second_src)?;
    ensure(first.0 == second.0, || "coordinate CSVs differ".into())?;
    ensure(first.1 == second.1, || "diagram JSONs differ".into())?;
    Ok(format!("{} CSV bytes and {} JSON bytes identical", first.0.len(), first.1.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("hexagon diagram", criterion_1),
        ("persistence vs rank oracle", criterion_2),
        ("noisy circle", criterion_3),
        ("harmonic vs integer smoothness", criterion_4),
        ("torus generators", criterion_5),
        ("klein bottle well-definedness", criterion_6),
        ("iterative vs dense solve", criterion_7),
        ("integer lift round trip", criterion_8),
        ("determinism", criterion_9),
    ];
    // direct handle: not swallowed by the test harness's output capture
    let mut stdout = std::io::stdout();
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let line = match &result {
            Ok(detail) => format!("criterion {} ({name}): PASS - {detail}", k + 1),
            Err(why) => {
                failed.push(k + 1);
                format!("criterion {} ({name}): FAIL - {why}", k + 1)
            }
        };
        writeln!(stdout, "{line}").unwrap();
    }
    stdout.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
