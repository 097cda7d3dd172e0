//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{bisect_root, discretization_trial, o1, o2, postprocessing_trial, Draws};
use ordelic::audit::{
    check_discretization_bound, check_postprocessing_bound, counterexample_gap, dist_calibration_wrt,
    surrogate_calibration, Binning, DiscretizationOptions, Population, SearchBudget,
};
use ordelic::discrete::{normal_from_boundary_samples, OrderableSpec};
use ordelic::embedding::{build_envelope_loss, build_surrogate, SmoothedSurrogate};
use ordelic::fixtures::{
    example_boundary_points, example_cost, example_embedding, example_normals, example_phi, example_property_file,
    example_spec, gap_illustration, mean_threshold, random_orderable_spec, random_scenario,
};
use ordelic::levelset::level_set_grid;
use ordelic::normals::{build_from_spec, full_pipeline, NormalsSurrogate, PipelineOptions};
use ordelic::scenario::PredictorRecipe;
use ordelic::surrogate::Scaled;
use ordelic::verify::refinement_check;
use ordelic::{Execution, LinkedProperty, Metric, ScalarProperty, SimplexPoint};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() <= tol, format!("{what}: {a} vs {b}"))
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, format!("took {elapsed:.2?}, limit {limit:.0?}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let tol = 1e-12;
    let input = build_envelope_loss(&example_cost(), &example_phi(), Some(3.0)).map_err(|e| e.to_string())?;
    let losses: [&[(f64, f64)]; 3] = [
        &[(-3.0, 0.0), (1.0, 0.0), (3.0, -6.0)],
        &[(-3.0, 3.0), (0.5, -0.5), (3.0, -8.0)],
        &[(-3.0, 5.0), (-2.0, 5.0), (-1.5, 4.5), (3.0, -9.0)],
    ];
    for (y, want) in losses.iter().enumerate() {
        let got = input.loss.outcome(y).pieces();
        ensure(got.len() == want.len(), format!("loss {y} has {} pieces", got.len()))?;
        for (a, &(m, b)) in got.iter().zip(want.iter()) {
            close(a.slope, m, tol, "loss slope")?;
            close(a.intercept, b, tol, "loss intercept")?;
        }
    }
    let s = example_embedding().map_err(|e| e.to_string())?;
    ensure(s.interpolation == [0.0, 0.5, 1.0, 2.0, 3.0], format!("U = {:?}", s.interpolation))?;
    // V(u, 1) = u, 2u, 1, 1, u - 1, u - 1 on (-inf,0], [0,.5], [.5,1], [1,2], [2,3], [3,inf)
    for (u, want) in [(-2.0, -2.0), (0.25, 0.5), (0.75, 1.0), (1.5, 1.0), (2.5, 1.5), (5.0, 4.0)] {
        close(s.v_bar[0].eval(u), want, tol, "V(u, 1)")?;
    }
    let l = &s.l_bar[0];
    let printed = |u: f64| {
        if u < 0.0 {
            u * u / 2.0
        } else if u <= 0.5 {
            u * u
        } else if u <= 2.0 {
            u - 0.25
        } else {
            u * u / 2.0 - u + 1.75
        }
    };
    for i in 0..=80 {
        let u = -2.0 + 6.0 * i as f64 / 80.0;
        close(l.eval(u), printed(u), tol, "L(u, 1)")?;
    }
    for (q, (c2, c1, c0)) in l.pieces().iter().zip([
        (0.5, 0.0, 0.0),
        (1.0, 0.0, 0.0),
        (0.0, 1.0, -0.25),
        (0.0, 1.0, -0.25),
        (0.5, -1.0, 1.75),
        (0.5, -1.0, 1.75),
    ]) {
        close(q.c2, c2, tol, "L coefficient")?;
        close(q.c1, c1, tol, "L coefficient")?;
        close(q.c0, c0, tol, "L coefficient")?;
    }
    ensure(s.thresholds == [0.5, 2.0], format!("thresholds {:?}", s.thresholds))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("losses, U, V(.,1), L(.,1), thresholds exact in {:.2?}", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (s, report) = full_pipeline(&example_property_file(), &PipelineOptions::default()).map_err(|e| e.to_string())?;
    for (o, want) in s.normals.iter().zip([o1(), o2()]) {
        for (a, b) in o.as_slice().iter().zip(want) {
            close(*a, b, 1e-8, "recovered normal")?;
        }
    }
    for (pts, want) in example_boundary_points().iter().zip([o1(), o2()]) {
        let a = normal_from_boundary_samples(pts).map_err(|e| e.to_string())?;
        let b = normal_from_boundary_samples(pts).map_err(|e| e.to_string())?;
        ensure(a == b, "fixed points are not deterministic")?;
        let sign = if a.as_slice()[1] * want[1] > 0.0 { 1.0 } else { -1.0 };
        for (x, y) in a.as_slice().iter().zip(want) {
            close(sign * x, y, 1e-8, "fixed-point normal")?;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "max normal error {:.1e}, fixed points reproduce both normals, {:.2?}",
        report.max_normal_error,
        start.elapsed()
    ))
}

fn embedding_for(spec: &OrderableSpec) -> Result<SmoothedSurrogate, String> {
    let cost = spec.cost().ok_or("random spec has no cost")?;
    let phi: Vec<f64> = (0..cost.reports()).map(|r| r as f64).collect();
    let input = build_envelope_loss(cost, &phi, None).map_err(|e| e.to_string())?;
    build_surrogate(&input).map_err(|e| e.to_string())
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let samples = 100_000;
    let margin = 1e-8;
    let mut checked = 0;
    let mut run = |name: &str, prop: &dyn LinkedProperty, spec: &OrderableSpec, seed: u64| -> Result<(), String> {
        let r = refinement_check(prop, spec, samples, seed, margin, Execution::Parallel).map_err(|e| e.to_string())?;
        checked += 1;
        ensure(
            r.failures == 0 && r.checked > 0,
            format!("{name}: {} of {} failed, first {:?}", r.failures, r.checked, r.first_failure),
        )
    };
    let spec = example_spec();
    run("example embedding", &example_embedding().map_err(|e| e.to_string())?, &spec, 1)?;
    run("example normals", &example_normals().map_err(|e| e.to_string())?, &spec, 2)?;
    for i in 0..20u64 {
        let n = 3 + (i % 3) as usize;
        let reports = 3 + (i / 3 % 2) as usize;
        let spec = random_orderable_spec(n, reports, 1e-3, 100 + i).map_err(|e| e.to_string())?;
        let normals = build_from_spec(&spec).map_err(|e| e.to_string())?;
        run(&format!("random normals #{i} (n = {n})"), &normals, &spec, 200 + i)?;
        let emb = embedding_for(&spec)?;
        run(&format!("random embedding #{i} (n = {n})"), &emb, &spec, 300 + i)?;
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{checked} properties x {samples} samples, 100% refined, {:.2?}", start.elapsed()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let emb = example_embedding().map_err(|e| e.to_string())?;
    let nrm: NormalsSurrogate = example_normals().map_err(|e| e.to_string())?;
    let mut draws = Draws::new(4);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let p = draws.simplex(3);
        let a = emb.gamma(&p).map_err(|e| e.to_string())?;
        let b = nrm.roe_eval(&p).map_err(|e| e.to_string())?;
        let da = (a - bisect_root(&emb.v_bar, &p)).abs();
        let db = (b - bisect_root(&nrm.v, &p)).abs();
        worst = worst.max(da).max(db);
    }
    ensure(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("max |closed form - bisection| = {worst:.1e} over 2 x 10^4, {:.2?}", start.elapsed()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut worst_slack = f64::INFINITY;
    for seed in 0..1000u64 {
        let c = postprocessing_trial(seed, 10_000);
        let slack = c.k * c.epsilon + 1e-9 - c.epsilon_prime;
        ensure(slack >= 0.0, format!("seed {seed}: eps' = {} > K eps = {}", c.epsilon_prime, c.k * c.epsilon))?;
        worst_slack = worst_slack.min(slack);
    }
    let prop = example_normals().map_err(|e| e.to_string())?;
    let k = prop.lipschitz().l2;
    for seed in 0..20u64 {
        let scenario = random_scenario(3, 6, PredictorRecipe::Perturbed { eta: 0.3 }, seed).map_err(|e| e.to_string())?;
        let data = scenario.sample(10_000, seed).map_err(|e| e.to_string())?;
        let f = scenario.predictor(seed).map_err(|e| e.to_string())?;
        let pop = Population::from_data(&data, &f).map_err(|e| e.to_string())?;
        let a = check_postprocessing_bound(&pop, &prop, k, Metric::L2).map_err(|e| e.to_string())?;
        let alpha = 0.1 + 0.04 * seed as f64;
        let scaled = Scaled { inner: &prop, alpha };
        let b = check_postprocessing_bound(&pop, &scaled, alpha * k, Metric::L2).map_err(|e| e.to_string())?;
        close(a.epsilon, b.epsilon, 1e-12, "eps under rescaling")?;
        close(alpha * a.epsilon_prime, b.epsilon_prime, 1e-12, "eps' under rescaling")?;
        ensure(b.distribution.all_satisfied(), "rescaled bound or contraction failed")?;
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "1000 trials, min slack {worst_slack:.2e}; rescaling exact to 1e-12; {:.2?}",
        start.elapsed()
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let s = example_normals().map_err(|e| e.to_string())?;
    let c = 5.0;
    let g = counterexample_gap(&s, c, Metric::L2, &SearchBudget::default()).map_err(|e| e.to_string())?;
    let pop = g.population();
    let eps = dist_calibration_wrt(&pop, &s, Metric::L2).map_err(|e| e.to_string())?.epsilon_hat;
    let scalar = pop.map(|f| s.value(f.as_slice())).map_err(|e| e.to_string())?;
    let err = surrogate_calibration(&scalar, &s, Binning::Exact, Metric::L2)
        .map_err(|e| e.to_string())?
        .epsilon_hat;
    ensure(err > c * eps, format!("error {err} vs C eps {}", c * eps))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "eps = {eps:.3e}, Gamma error = {err:.3e}, ratio {:.3} > {c}, {:.2?}",
        err / eps,
        start.elapsed()
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut vacuous = 0;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..1000u64 {
        let c = discretization_trial(seed, 10_000, 0.2);
        let excess = c.mismatch - (c.rhs + 3.0 * c.mismatch_se);
        ensure(excess <= 1e-9, format!("seed {seed}: mismatch {} > bound {}", c.mismatch, c.rhs))?;
        let d = c.report.bound("decomposition").ok_or("missing decomposition")?;
        ensure(
            d.lhs <= d.rhs + 3.0 * c.mismatch_se + 1e-9,
            format!("seed {seed}: decomposition {} > {}", d.lhs, d.rhs),
        )?;
        worst = worst.max(excess);
        vacuous += c.vacuous as usize;
    }
    let eps = 0.1;
    let q = SimplexPoint::new(vec![0.45, 0.55, 0.0]).map_err(|e| e.to_string())?;
    let pop = Population::single(1.5 - eps / 2.0, q);
    let c = check_discretization_bound(&pop, &mean_threshold(), &DiscretizationOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(c.vacuous && c.rhs >= 1.0, format!("mean threshold rhs {}", c.rhs))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "1000 trials within bound (max excess {worst:.3}, {vacuous} vacuous); mean-threshold rhs {:.2} flagged vacuous; {:.2?}",
        c.rhs,
        start.elapsed()
    ))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let s = example_normals().map_err(|e| e.to_string())?;
    let [f, star, spade] = gap_illustration(&s).map_err(|e| e.to_string())?;
    let eps1 = dist_calibration_wrt(&Population::single(f.clone(), star.clone()), &s, Metric::Ternary)
        .map_err(|e| e.to_string())?
        .epsilon_hat;
    let u = s.value(f.as_slice()).map_err(|e| e.to_string())?;
    let audit = |q: SimplexPoint| {
        surrogate_calibration(&Population::single(u, q), &s, Binning::Exact, Metric::Ternary)
            .map(|r| r.epsilon_hat)
            .map_err(|e| e.to_string())
    };
    let eps3 = audit(star.clone())?;
    let eps_spade = audit(spade)?;
    let simplex_eps1 = Metric::L2.distance(f.as_slice(), star.as_slice()).map_err(|e| e.to_string())?;
    close(eps1, 0.04, 1e-6, "eps1")?;
    close(eps3, 0.43, 0.02, "eps3")?;
    close(eps_spade, 0.0, 1e-9, "spade error")?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "eps1 = {eps1:.6} (simplex L2 {simplex_eps1:.6}), star error {eps3:.4}, spade error {eps_spade:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let unit = |v: [f64; 3]| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.map(|x| x / n)
    };
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let b1 = unit([-1.0, 3.0, 2.0]);
    let b2 = unit([-2.0, -1.0, 3.0]);
    // the line drawn for the middle label of the first panel
    let drawn = unit([4.0, 0.0, -7.0]);
    let emb = level_set_grid(&example_embedding().map_err(|e| e.to_string())?, 200, Execution::Parallel)
        .map_err(|e| e.to_string())?;
    let nrm = level_set_grid(&example_normals().map_err(|e| e.to_string())?, 200, Execution::Parallel)
        .map_err(|e| e.to_string())?;
    let mut counts = vec![];
    let mut check = |name: &str, rows: &[ordelic::levelset::LevelRow], u: f64, plane: Option<[f64; 3]>| {
        let on: Vec<_> = rows.iter().filter(|r| (r.gamma_surrogate - u).abs() <= 1e-6).collect();
        counts.push(format!("{name} u = {u}: {}", on.len()));
        match plane {
            Some(o) => on.iter().try_for_each(|r| {
                ensure(dot(&o, &r.p).abs() <= 1e-5, format!("{name} u = {u}: {:?} off its boundary", r.p))
            }),
            None => ensure(on.is_empty(), format!("{name} u = {u}: points present but no boundary to match")),
        }
    };
    check("embedding", &emb, 0.5, Some(b1))?;
    check("embedding", &emb, 1.5, None)?;
    check("embedding", &emb, 2.0, Some(b2))?;
    check("embedding", &emb, 1.0, Some(drawn))?;
    check("normals", &nrm, 0.0, Some(b1))?;
    check("normals", &nrm, 1.0, Some(b2))?;
    // sanity: the boundaries themselves are populated
    ensure(counts.iter().all(|c| !c.ends_with(": 0") || c.contains("1.5")), format!("empty level: {counts:?}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("{}; u = 1.5 has no grid points (vacuous); {:.2?}", counts.join(", "), start.elapsed()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 embedding fixture", criterion_1),
        ("2 normals fixture", criterion_2),
        ("3 refinement", criterion_3),
        ("4 oracle equivalence", criterion_4),
        ("5 post-processing bound", criterion_5),
        ("6 counterexample", criterion_6),
        ("7 discretization bound", criterion_7),
        ("8 gap illustration", criterion_8),
        ("9 level-set grids", criterion_9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
