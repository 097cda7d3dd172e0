use std::collections::BTreeMap;

use anyhow::{anyhow, Context};
use serde_json::{json, Value};

use ordelic::audit::{
    check_discretization_bound, check_postprocessing_bound, counterexample_gap, discrete_calibration,
    dist_calibration_wrt, lipschitz_estimate, AuditReport, Binning, DiscretizationOptions, Population,
    PredictorTable, SearchBudget,
};
use ordelic::discrete::{OrderableSpec, PropertyFile};
use ordelic::embedding::{build_envelope_loss, build_surrogate, default_phi};
use ordelic::levelset::level_set_grid;
use ordelic::normals::{full_pipeline, PipelineOptions};
use ordelic::scenario::{Feature, PredictorRecipe, ScenarioSpec};
use ordelic::simplex::LabeledDataset;
use ordelic::verify::refinement_check;
use ordelic::{Execution, LinkedProperty, Metric, ScalarProperty, Surrogate, SurrogateFile};

use crate::io::{emit, out_dir, read_json, sidecar, to_json};
use crate::{Algo, CmdResult, Failure, RunArgs, EXIT_BOUND, EXIT_OK};

const REFINEMENT_SAMPLES: usize = 100_000;
const SIMULATE_ROWS: usize = 10_000;
const REFINEMENT_MARGIN: f64 = 1e-8;

fn config(command: &str, a: &RunArgs) -> Value {
    json!({ "command": command, "version": env!("CARGO_PKG_VERSION"), "args": a })
}

fn require_seed(a: &RunArgs) -> Result<u64, Failure> {
    a.seed
        .ok_or_else(|| Failure::input(anyhow!("this subcommand samples; pass --seed or set ORDELIC_SEED")))
}

/// Builds the surrogate selected by `--algo` and its construction report.
fn build(a: &RunArgs, file: &PropertyFile) -> Result<(Surrogate, Value), Failure> {
    let seed = require_seed(a)?;
    let samples = a.samples.unwrap_or(REFINEMENT_SAMPLES);
    match a.algo {
        Algo::Embedding => {
            let cost = file
                .cost_matrix
                .as_ref()
                .ok_or_else(|| Failure::input(anyhow!("the embedding construction needs a cost_matrix")))?;
            let phi = a.phi.clone().unwrap_or_else(|| default_phi(cost.reports()));
            let input = build_envelope_loss(cost, &phi, a.outer_slope)?;
            let s = build_surrogate(&input)?;
            let spec = OrderableSpec::from_file(file)?;
            let refinement = refinement_check(&s, &spec, samples, seed, REFINEMENT_MARGIN, Execution::Parallel)?;
            let report = json!({
                "lipschitz": s.lipschitz,
                "vbar_sup": s.vbar_sup,
                "thresholds": s.thresholds,
                "interpolation": s.interpolation,
                "range": s.range,
                "boundary_gaps": spec.boundary_gaps()?,
                "refinement": refinement,
            });
            Ok((Surrogate::Embedding(s), report))
        }
        Algo::Normals => {
            if a.phi.is_some() {
                return Err(Failure::input(anyhow!("--phi applies to --algo embedding only")));
            }
            let opts = PipelineOptions {
                seed,
                refinement_samples: samples,
                ..PipelineOptions::default()
            };
            let (s, report) = full_pipeline(file, &opts)?;
            Ok((Surrogate::Normals(s), serde_json::to_value(report)?))
        }
    }
}

/// A surrogate file is used as is; a property spec is built with `--algo`.
fn load_surrogate(a: &RunArgs) -> Result<Surrogate, Failure> {
    let value = read_json(&a.spec)?;
    if value.get("kind").is_some() {
        let f: SurrogateFile = serde_json::from_value(value).context("reading surrogate file")?;
        return Ok(f.surrogate);
    }
    Ok(build(a, &property_from(value, a)?)?.0)
}

fn property_from(value: Value, a: &RunArgs) -> Result<PropertyFile, Failure> {
    let file: PropertyFile =
        serde_json::from_value(value).with_context(|| format!("reading property spec {}", a.spec.display()))?;
    file.validate()
        .with_context(|| format!("invalid property spec {}", a.spec.display()))?;
    Ok(file)
}

pub fn construct(a: &RunArgs) -> CmdResult {
    let file = property_from(read_json(&a.spec)?, a)?;
    let (surrogate, report) = build(a, &file)?;
    let out = SurrogateFile {
        surrogate,
        config: Some(json!({ "run": config("construct", a), "report": report })),
    };
    emit(a.out.as_deref(), &to_json(&out)?)?;
    Ok(EXIT_OK)
}

pub fn levelsets(a: &RunArgs) -> CmdResult {
    let s = load_surrogate(a)?;
    let rows = level_set_grid(&s, a.resolution, Execution::Parallel)?;
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["p1", "p2", "p3", "gamma_discrete", "gamma_surrogate"])
        .map_err(Failure::input)?;
    for r in &rows {
        let reports: Vec<String> = r.gamma_discrete.iter().map(|k| (k + 1).to_string()).collect();
        w.write_record([
            r.p[0].to_string(),
            r.p[1].to_string(),
            r.p[2].to_string(),
            reports.join(";"),
            r.gamma_surrogate.to_string(),
        ])
        .map_err(Failure::input)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::input(anyhow!("{e}")))?;
    let text = String::from_utf8(bytes).map_err(Failure::input)?;
    emit(a.out.as_deref(), &text)?;
    if let Some(out) = &a.out {
        let meta = json!({
            "config": config("levelsets", a),
            "kind": s.kind(),
            "rows": rows.len(),
            "thresholds": s.thresholds(),
        });
        emit(Some(&sidecar(out)), &to_json(&meta)?)?;
    }
    Ok(EXIT_OK)
}

pub fn simulate(a: &RunArgs) -> CmdResult {
    let scenario = ScenarioSpec::from_path(&a.spec)
        .with_context(|| format!("reading scenario {}", a.spec.display()))?;
    let seed = require_seed(a)?;
    let rows = a.samples.unwrap_or(SIMULATE_ROWS);
    let dir = out_dir(a.out.as_deref())?;
    let data = scenario.sample(rows, seed)?;
    let predictor = PredictorTable::Distributional(scenario.predictor(seed)?);

    let data_path = dir.join("data.csv");
    let mut buf = vec![];
    data.write_csv(&mut buf)?;
    emit(Some(&data_path), &String::from_utf8(buf).map_err(Failure::input)?)?;
    let meta = json!({ "config": config("simulate", a), "n": scenario.n, "rows": rows });
    emit(Some(&sidecar(&data_path)), &to_json(&meta)?)?;
    emit(Some(&dir.join("predictor.json")), &(predictor.to_json()? + "\n"))?;
    Ok(EXIT_OK)
}

fn binning(a: &RunArgs) -> Result<Binning, Failure> {
    Ok(match a.bin_width {
        Some(w) => Binning::width(w)?,
        None => Binning::Exact,
    })
}

pub fn audit(a: &RunArgs) -> CmdResult {
    let s = load_surrogate(a)?;
    let data_path = a.data.as_ref().ok_or_else(|| Failure::input(anyhow!("--data is required")))?;
    let pred_path = a
        .predictor
        .as_ref()
        .ok_or_else(|| Failure::input(anyhow!("--predictor is required")))?;
    let data = LabeledDataset::from_path(data_path, s.outcomes())?;
    let table = PredictorTable::from_path(pred_path)?;
    let metric: Metric = a.norm.into();
    let k = a.lipschitz.unwrap_or_else(|| s.lipschitz().for_metric(metric));
    let opts = DiscretizationOptions {
        binning: binning(a)?,
        metric,
        k: Some(k),
        c_marginal: a.c_marginal,
        ..DiscretizationOptions::default()
    };
    let gamma = |q: &[f64]| s.discrete(q);

    let mut reports: Vec<AuditReport> = vec![];
    let mut extra = serde_json::Map::new();
    match &table {
        PredictorTable::Distributional(f) => {
            let pop = Population::from_data(&data, f)?;
            let post = check_postprocessing_bound(&pop, &s, k, metric)?;
            if metric == Metric::Ternary {
                let simplex = dist_calibration_wrt(&pop, &s, Metric::L2)?;
                extra.insert("distribution_l2".into(), serde_json::to_value(simplex)?);
            }
            let g = pop.map(|p| s.value(p.as_slice()))?;
            let disc = check_discretization_bound(
                &g,
                &s,
                &DiscretizationOptions {
                    composed_epsilon: Some(post.epsilon),
                    ..opts
                },
            )?;
            let h = g.map(|&u| Ok(s.link(u)))?;
            reports.push(post.distribution);
            reports.push(disc.report);
            reports.push(discrete_calibration(&h, gamma)?);
        }
        PredictorTable::Scalar(g) => {
            let pop = Population::from_data(&data, g)?;
            let disc = check_discretization_bound(&pop, &s, &opts)?;
            let h = pop.map(|&u| Ok(s.link(u)))?;
            reports.push(disc.report);
            reports.push(discrete_calibration(&h, gamma)?);
        }
        PredictorTable::Discrete(h) => {
            let pop = Population::from_data(&data, h)?;
            reports.push(discrete_calibration(&pop, gamma)?);
        }
    }
    let ok = reports.iter().all(AuditReport::all_satisfied);
    let mut out = json!({
        "config": config("audit", a),
        "surrogate": s.kind(),
        "predictor": table.kind(),
        "all_satisfied": ok,
        "reports": reports,
    });
    if let Value::Object(m) = &mut out {
        m.extend(extra);
    }
    emit(a.out.as_deref(), &to_json(&out)?)?;
    Ok(if ok { EXIT_OK } else { EXIT_BOUND })
}

pub fn counterexample(a: &RunArgs) -> CmdResult {
    let s = load_surrogate(a)?;
    let seed = require_seed(a)?;
    let metric: Metric = a.norm.into();
    let budget = SearchBudget {
        starts: a.samples.unwrap_or(SearchBudget::default().starts),
        seed,
        exec: Execution::Parallel,
    };
    let (c, k_hat) = match a.c {
        Some(c) => (c, None),
        None => {
            let e = lipschitz_estimate(&s, metric, budget.starts.max(2), seed, budget.exec)?;
            (0.9 * e.k_hat, Some(e.k_hat))
        }
    };
    let gap = counterexample_gap(&s, c, metric, &budget)?;
    let report = json!({
        "config": config("counterexample", a),
        "c": c,
        "k_hat": k_hat,
        "instance": gap,
    });
    match a.out.as_deref() {
        None => emit(None, &to_json(&report)?)?,
        Some(_) => {
            let dir = out_dir(a.out.as_deref())?;
            let id = "x".to_string();
            let scenario = ScenarioSpec::new(
                s.outcomes(),
                vec![Feature {
                    id: id.clone(),
                    weight: 1.0,
                    conditional: gap.q.clone(),
                }],
                PredictorRecipe::Table {
                    table: BTreeMap::from([(id.clone(), gap.p.clone())]),
                },
            )?;
            let predictor = PredictorTable::Distributional(BTreeMap::from([(id, gap.p.clone())]));
            emit(Some(&dir.join("scenario.json")), &to_json(&scenario)?)?;
            emit(Some(&dir.join("predictor.json")), &(predictor.to_json()? + "\n"))?;
            emit(Some(&dir.join("report.json")), &to_json(&report)?)?;
        }
    }
    Ok(EXIT_OK)
}
