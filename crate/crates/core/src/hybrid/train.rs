use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::GmwConfig;
use super::fitness::{check_compatible, evaluate_model, evaluate_pass, sample_eval_subset, FitnessFn};
use super::log::{EvalTracker, GaEventRecord, GenerationSummary, Phase, TrainLog};
use super::sgd::{lr_step, sgd_epoch, SgdState};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metaheuristics::{ga_event, gwo_step, update_hierarchy, GaEventState, GwoSchedule, Population, WolfHierarchy};
use crate::nn::{Network, NetworkSpec, ParamVector};
use crate::rng::RngStream;

/// Random streams used by a run, all derived from the configured seed.
pub(crate) const SEARCH_STREAM: u64 = 0;
pub(crate) const SUBSET_STREAM: u64 = 1;
pub(crate) const SGD_STREAM: u64 = 2;

/// Best individual found by a run plus its trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub best: ParamVector,
    /// Fitness of `best` when it was recorded.
    pub best_fitness: f64,
    pub log: TrainLog,
}

/// `np` wolves with every gene drawn from `init_range`. Fitness is left
/// unset; the trainer scores them as its first evaluation pass.
pub fn init_population(cfg: &GmwConfig, dim: usize, rng: &mut RngStream) -> Result<Population> {
    cfg.validate()?;
    Ok(Population::uniform(cfg.np, dim, cfg.init_range.0, cfg.init_range.1, rng))
}

/// Run `n_epoch` SGD epochs on each leader over the full training set.
/// Leaders are trained concurrently on forked streams and their fitness is
/// cleared. Returns the last-epoch mean loss per leader (empty when
/// `n_epoch == 0`, in which case nothing changes).
#[allow(clippy::too_many_arguments)]
pub fn refine_leaders(
    pop: &mut Population,
    hier: &WolfHierarchy,
    spec: &NetworkSpec,
    train: &Dataset,
    lr: f64,
    n_epoch: usize,
    batch_size: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if n_epoch == 0 {
        return Ok(Vec::new());
    }
    let leaders = hier.leaders();
    let jobs: Vec<(usize, RngStream)> = leaders.iter().map(|&l| (l, rng.fork())).collect();
    let trained: Vec<(ParamVector, f64)> = jobs
        .into_par_iter()
        .map(|(l, mut stream)| {
            let mut net = Network::from_params(spec.clone(), &pop.individuals[l].position)?;
            let mut loss = f64::NAN;
            for _ in 0..n_epoch {
                loss = sgd_epoch(&mut net, train, lr, batch_size, &mut stream)?;
            }
            Ok((net.flatten(), loss))
        })
        .collect::<Result<_>>()?;
    let mut losses = Vec::with_capacity(3);
    for (&l, (position, loss)) in leaders.iter().zip(trained) {
        pop.individuals[l].position = position;
        pop.individuals[l].fitness = None;
        losses.push(loss);
    }
    Ok(losses)
}

/// Hybrid GWO + GA + SGD training of `spec` on `train`; the best-ever
/// individual is scored on `train` and `test` into `log.final_metrics`.
pub fn gmw_sgd_train(cfg: &GmwConfig, spec: &NetworkSpec, train: &Dataset, test: &Dataset) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_compatible(spec, train)?;
    check_compatible(spec, test)?;
    let dim = spec.param_count()?;
    let mut rng = RngStream::with_stream(cfg.seed, SEARCH_STREAM);
    let mut subset_rng = RngStream::with_stream(cfg.seed, SUBSET_STREAM);
    let mut sgd_rng = RngStream::with_stream(cfg.seed, SGD_STREAM);

    let mut tracker = EvalTracker::new(cfg.eval_budget);
    let mut pop = init_population(cfg, dim, &mut rng)?;
    let mut fitness = FitnessFn::new(spec.clone(), sample_eval_subset(train, cfg.eval_batch, &mut subset_rng))?;
    let all: Vec<usize> = (0..cfg.np).collect();
    let mut running = evaluate_pass(&mut pop, &all, &fitness, &mut tracker, Phase::Init, 0)?.is_some();

    let mut ga = GaEventState::new(cfg.ga)?;
    let mut sgd = SgdState::new(cfg.lr0);
    let schedule = GwoSchedule::new(cfg.a_range.0, cfg.a_range.1, (cfg.n_gen * cfg.n_evol).max(1))?;
    let mut step = 0;

    for generation in 1..=cfg.n_gen {
        if !running {
            break;
        }
        if generation > 1 {
            fitness = FitnessFn::new(spec.clone(), sample_eval_subset(train, cfg.eval_batch, &mut subset_rng))?;
        }
        let mut events = 0;
        for iteration in 1..=cfg.n_evol {
            let hier = update_hierarchy(&pop)?;
            let a = schedule.compute_a(step)?;
            step += 1;
            gwo_step(&mut pop, &hier, a, &mut rng)?;
            if evaluate_pass(&mut pop, &all, &fitness, &mut tracker, Phase::Gwo, generation)?.is_none() {
                running = false;
                break;
            }
            let best_omega = hier
                .omegas
                .iter()
                .filter_map(|&o| pop.individuals[o].fitness)
                .fold(f64::INFINITY, f64::min);
            if ga.observe(best_omega) {
                let hier = update_hierarchy(&pop)?;
                if !tracker.allows(hier.omegas.len()) {
                    tracker.log.truncated = true;
                    running = false;
                    break;
                }
                let after_eval = tracker.count();
                let report = ga_event(&mut pop, &hier, &mut ga, &mut rng)?;
                evaluate_pass(&mut pop, &hier.omegas, &fitness, &mut tracker, Phase::Ga, generation)?;
                tracker.log.events.push(GaEventRecord {
                    generation,
                    iteration,
                    after_eval,
                    report,
                });
                events += 1;
            }
        }
        if running && cfg.n_epoch > 0 {
            let hier = update_hierarchy(&pop)?;
            if tracker.allows(3) {
                refine_leaders(&mut pop, &hier, spec, train, sgd.lr, cfg.n_epoch, cfg.batch_size, &mut sgd_rng)?;
                evaluate_pass(&mut pop, &hier.leaders(), &fitness, &mut tracker, Phase::Sgd, generation)?;
            } else {
                tracker.log.truncated = true;
                running = false;
            }
        }
        if let Some(alpha) = pop.best() {
            let best_leader = pop.individuals[alpha].fitness.unwrap_or(f64::INFINITY);
            lr_step(&mut sgd, best_leader, &cfg.lr_schedule());
        }
        let best_fitness = tracker.best().map_or(f64::INFINITY, |b| b.1.ce);
        tracker.log.generations.push(GenerationSummary {
            generation,
            evaluations: tracker.count(),
            best_fitness,
            best_train_accuracy: tracker.best_accuracy(),
            lr: sgd.lr,
            ga_events: events,
        });
    }
    finish(tracker, spec, train, test)
}

pub(crate) fn finish(tracker: EvalTracker, spec: &NetworkSpec, train: &Dataset, test: &Dataset) -> Result<TrainOutcome> {
    let (mut log, best) = tracker.into_parts();
    let (best, ev) = best.ok_or_else(|| Error::usage("evaluation budget too small for the initial population"))?;
    log.final_metrics = Some(evaluate_model(&best, spec, train, test)?);
    Ok(TrainOutcome {
        best,
        best_fitness: ev.ce,
        log,
    })
}
