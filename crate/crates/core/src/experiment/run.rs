use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, DatasetSpec, RunConfig};
use crate::data::{load_cifar10, make_blobs, split, Dataset};
use crate::error::{Error, Result};
use crate::hybrid::{evaluate_model, gmw_sgd_train, sgd_train, slpso_train, GenerationSummary, ModelMetrics, TrainLog};
use crate::moo::{gmw_sgd_moo_train, ParetoReport};
use crate::nn::NetworkSpec;

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub eval_index: usize,
    pub best_train_accuracy: f64,
    pub best_fitness: f64,
}

/// Everything a run produces except timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub metrics: ModelMetrics,
    pub param_count: usize,
    pub evaluations: usize,
    pub truncated: bool,
    pub best_fitness: f64,
    pub ga_events: usize,
    pub trace: Vec<TracePoint>,
    pub generations: Vec<GenerationSummary>,
    pub pareto: Option<ParetoReport>,
    pub config: RunConfig,
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    match spec {
        DatasetSpec::Blobs {
            samples,
            classes,
            dims,
            spread,
            train_fraction,
            data_seed,
        } => {
            let all = make_blobs(*samples, *classes, *dims, *spread, *data_seed)?;
            split(&all, *train_fraction, *data_seed)
        }
        DatasetSpec::Cifar10 { path, classes } => {
            let (train, test) = load_cifar10(path)?;
            match classes {
                Some(c) => Ok((train.select_classes(c)?, test.select_classes(c)?)),
                None => Ok((train, test)),
            }
        }
    }
}

fn trace(log: &TrainLog) -> Vec<TracePoint> {
    log.records
        .iter()
        .map(|r| TracePoint {
            eval_index: r.eval_index,
            best_train_accuracy: r.best_train_accuracy,
            best_fitness: r.best_fitness,
        })
        .collect()
}

/// Run one configuration on already-loaded data.
pub fn run_on(config: &RunConfig, train: &Dataset, test: &Dataset) -> Result<RunResult> {
    let config = config.resolved();
    config.validate()?;
    let spec: NetworkSpec = config.network.build(train.sample_len(), train.class_count)?;
    let param_count = spec.param_count()?;
    let (metrics, log, best_fitness, pareto) = match config.algorithm {
        Algorithm::Sgd => {
            let out = sgd_train(&config.sgd, &spec, train, test, config.eval_budget)?;
            (out.log.final_metrics, out.log, out.best_fitness, None)
        }
        Algorithm::Slpso => {
            let out = slpso_train(&config.slpso, &spec, train, test)?;
            (out.log.final_metrics, out.log, out.best_fitness, None)
        }
        Algorithm::GmwSgd => {
            let out = gmw_sgd_train(&config.gmw, &spec, train, test)?;
            (out.log.final_metrics, out.log, out.best_fitness, None)
        }
        Algorithm::GmwSgdMoo => {
            let out = gmw_sgd_moo_train(&config.gmw, &spec, train)?;
            // report the most accurate front member (lowest regularizer on ties)
            let top = out
                .front
                .iter()
                .min_by(|a, b| a.1.f1.total_cmp(&b.1.f1).then(a.1.f2.total_cmp(&b.1.f2)))
                .ok_or_else(|| Error::numeric("empty Pareto front"))?;
            let metrics = evaluate_model(&top.0, &spec, train, test)?;
            let best = out.log.records.last().map_or(f64::NAN, |r| r.best_fitness);
            (Some(metrics), out.log, best, Some(out.report))
        }
    };
    let metrics = metrics.ok_or_else(|| Error::numeric("run finished without final metrics"))?;
    Ok(RunResult {
        algorithm: config.algorithm,
        seed: config.seed,
        metrics,
        param_count,
        evaluations: log.evaluations(),
        truncated: log.truncated,
        best_fitness,
        ga_events: log.events.len(),
        trace: trace(&log),
        generations: log.generations.clone(),
        pareto,
        config,
    })
}

pub fn run(config: &RunConfig) -> Result<RunResult> {
    config.validate()?;
    let (train, test) = load_dataset(&config.dataset)?;
    run_on(config, &train, &test)
}

/// `eval_index,best_train_accuracy,best_fitness`, one row per logged evaluation.
pub fn trace_export(result: &RunResult) -> Result<String> {
    if result.trace.is_empty() {
        return Err(Error::usage("result has an empty trace"));
    }
    let mut out = String::from("eval_index,best_train_accuracy,best_fitness\n");
    for p in &result.trace {
        out.push_str(&format!("{},{},{}\n", p.eval_index, p.best_train_accuracy, p.best_fitness));
    }
    Ok(out)
}

/// Write `result.json`, `trace.csv`, `pareto.csv` (bi-objective runs) and
/// `timing.json` into `dir`.
pub fn write_outputs(result: &RunResult, wall_clock_seconds: f64, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(result).map_err(|e| Error::usage(format!("serializing result: {e}")))?;
    std::fs::write(dir.join("result.json"), json + "\n")?;
    std::fs::write(dir.join("trace.csv"), trace_export(result)?)?;
    if let Some(p) = &result.pareto {
        std::fs::write(dir.join("pareto.csv"), p.to_csv())?;
    }
    let timing = serde_json::json!({ "wall_clock_seconds": wall_clock_seconds });
    std::fs::write(dir.join("timing.json"), timing.to_string() + "\n")?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<RunResult> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::usage(format!("{} is not a run result: {e}", path.display())))
}
