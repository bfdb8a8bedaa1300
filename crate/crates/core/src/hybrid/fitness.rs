use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::log::{EvalTracker, Phase};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metaheuristics::Population;
use crate::nn::{evaluate_chunked, Network, NetworkSpec};
use crate::rng::RngStream;

const CHUNK: usize = 256;

/// Cross-entropy and accuracy of one parameter vector on a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub ce: f64,
    pub accuracy: f64,
}

/// Train/test metrics of a finished model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub train_accuracy: f64,
    pub train_ce: f64,
    pub test_accuracy: f64,
    pub test_ce: f64,
}

pub(crate) fn check_compatible(spec: &NetworkSpec, data: &Dataset) -> Result<()> {
    spec.validate()?;
    if spec.input_len() != data.sample_len() {
        return Err(Error::dimension(
            format!("network input vs dataset '{}' sample size", data.name),
            spec.input_len(),
            data.sample_len(),
        ));
    }
    let classes = spec.classes()?;
    if classes < data.class_count {
        return Err(Error::dimension(
            format!("network outputs vs dataset '{}' classes", data.name),
            data.class_count,
            classes,
        ));
    }
    Ok(())
}

/// Fitness of a flat parameter vector: mean CE on a fixed sample set.
#[derive(Debug, Clone)]
pub struct FitnessFn<'a> {
    spec: NetworkSpec,
    data: Cow<'a, Dataset>,
}

impl<'a> FitnessFn<'a> {
    pub fn new(spec: NetworkSpec, data: Cow<'a, Dataset>) -> Result<Self> {
        check_compatible(&spec, &data)?;
        if data.is_empty() {
            return Err(Error::usage("fitness set is empty"));
        }
        Ok(Self { spec, data })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn evaluate(&self, params: &[f64]) -> Result<Evaluation> {
        let mut net = Network::zeros(self.spec.clone())?;
        net.load(params)?;
        let (ce, accuracy) = evaluate_chunked(&net, &self.data.inputs, &self.data.labels, self.data.sample_shape, CHUNK)?;
        if !ce.is_finite() {
            return Err(Error::numeric("fitness cross-entropy"));
        }
        Ok(Evaluation { ce, accuracy })
    }
}

/// Draw `size` samples without replacement (kept in dataset order).
/// Borrows the whole set when it is no larger than `size`.
pub fn sample_eval_subset<'a>(train: &'a Dataset, size: usize, rng: &mut RngStream) -> Cow<'a, Dataset> {
    if size >= train.len() {
        return Cow::Borrowed(train);
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    rng.shuffle(&mut order);
    let mut picked = order[..size].to_vec();
    picked.sort_unstable();
    Cow::Owned(train.subset(&picked))
}

/// Full-set metrics for a parameter vector.
pub fn evaluate_model(params: &[f64], spec: &NetworkSpec, train: &Dataset, test: &Dataset) -> Result<ModelMetrics> {
    check_compatible(spec, train)?;
    check_compatible(spec, test)?;
    let mut net = Network::zeros(spec.clone())?;
    net.load(params)?;
    let (train_ce, train_accuracy) = evaluate_chunked(&net, &train.inputs, &train.labels, train.sample_shape, CHUNK)?;
    let (test_ce, test_accuracy) = evaluate_chunked(&net, &test.inputs, &test.labels, test.sample_shape, CHUNK)?;
    Ok(ModelMetrics {
        train_accuracy,
        train_ce,
        test_accuracy,
        test_ce,
    })
}

fn tag_phase(err: Error, phase: Phase) -> Error {
    match err {
        Error::Numeric { context } => Error::numeric(format!("{} phase: {context}", phase.as_str())),
        other => other,
    }
}

/// Evaluate `indices` concurrently, cache CE as fitness and log each result
/// in index order. Returns `Ok(None)` without evaluating when the budget
/// cannot cover the whole pass.
pub(crate) fn evaluate_pass(
    pop: &mut Population,
    indices: &[usize],
    fitness: &FitnessFn<'_>,
    tracker: &mut EvalTracker,
    phase: Phase,
    generation: usize,
) -> Result<Option<Vec<Evaluation>>> {
    if !tracker.allows(indices.len()) {
        tracker.log.truncated = true;
        return Ok(None);
    }
    let evals: Vec<Evaluation> = indices
        .par_iter()
        .map(|&i| fitness.evaluate(&pop.individuals[i].position))
        .collect::<Result<_>>()
        .map_err(|e| tag_phase(e, phase))?;
    for (&i, &ev) in indices.iter().zip(&evals) {
        pop.individuals[i].fitness = Some(ev.ce);
        tracker.record(phase, generation, &pop.individuals[i].position, ev);
    }
    Ok(Some(evals))
}
