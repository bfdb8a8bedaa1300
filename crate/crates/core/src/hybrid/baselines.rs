use super::config::{SgdTrainConfig, SlpsoTrainConfig};
use super::fitness::{check_compatible, evaluate_model, evaluate_pass, sample_eval_subset, Evaluation, FitnessFn};
use super::log::{EvalTracker, GenerationSummary, Phase};
use super::sgd::{lr_step, sgd_epoch, SgdState};
use super::train::{finish, TrainOutcome, SEARCH_STREAM, SGD_STREAM, SUBSET_STREAM};
use crate::data::Dataset;
use crate::error::Result;
use crate::metaheuristics::{slpso_step, SlpsoState};
use crate::nn::{evaluate_chunked, Network, NetworkSpec};
use crate::rng::RngStream;

/// SL-PSO over the flat parameter vector. Fitness is CE on one fixed
/// seed-chosen subset; every pass scores the whole swarm.
pub fn slpso_train(cfg: &SlpsoTrainConfig, spec: &NetworkSpec, train: &Dataset, test: &Dataset) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_compatible(spec, train)?;
    check_compatible(spec, test)?;
    let dim = spec.param_count()?;
    let mut rng = RngStream::with_stream(cfg.seed, SEARCH_STREAM);
    let mut subset_rng = RngStream::with_stream(cfg.seed, SUBSET_STREAM);
    let fitness = FitnessFn::new(spec.clone(), sample_eval_subset(train, cfg.eval_batch, &mut subset_rng))?;

    let mut tracker = EvalTracker::new(cfg.eval_budget);
    let mut state = SlpsoState::new(&cfg.swarm, cfg.np, dim)?;
    let mut pop = state.init_swarm(dim, &mut rng);
    let all: Vec<usize> = (0..cfg.np).collect();
    for pass in 0..cfg.n_evol {
        let phase = if pass == 0 {
            Phase::Init
        } else {
            slpso_step(&mut pop, &mut state, &mut rng)?;
            Phase::Swarm
        };
        if evaluate_pass(&mut pop, &all, &fitness, &mut tracker, phase, pass)?.is_none() {
            break;
        }
        tracker.log.generations.push(GenerationSummary {
            generation: pass,
            evaluations: tracker.count(),
            best_fitness: tracker.best().map_or(f64::INFINITY, |b| b.1.ce),
            best_train_accuracy: tracker.best_accuracy(),
            lr: 0.0,
            ga_events: 0,
        });
    }
    finish(tracker, spec, train, test)
}

/// Plain minibatch SGD with reduce-on-plateau on the training loss and early
/// stopping on training accuracy. One record per epoch (plus the initial
/// network); `epoch_budget` caps the epoch count. Returns the final network.
pub fn sgd_train(
    cfg: &SgdTrainConfig,
    spec: &NetworkSpec,
    train: &Dataset,
    test: &Dataset,
    epoch_budget: Option<usize>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_compatible(spec, train)?;
    check_compatible(spec, test)?;
    let mut init_rng = RngStream::with_stream(cfg.seed, SEARCH_STREAM);
    let mut rng = RngStream::with_stream(cfg.seed, SGD_STREAM);
    let mut net = Network::random_uniform(spec.clone(), cfg.init_range.0, cfg.init_range.1, &mut init_rng)?;
    let schedule = cfg.lr_schedule();
    let mut state = SgdState::new(cfg.lr0);
    let max_epochs = epoch_budget.map_or(cfg.max_epochs, |b| b.min(cfg.max_epochs));

    let mut tracker = EvalTracker::new(None);
    let score = |net: &Network| -> Result<Evaluation> {
        let (ce, accuracy) = evaluate_chunked(net, &train.inputs, &train.labels, train.sample_shape, 256)?;
        Ok(Evaluation { ce, accuracy })
    };
    let ev = score(&net)?;
    tracker.record(Phase::Init, 0, &net.flatten(), ev);
    let mut best_acc = ev.accuracy;
    let mut since_best = 0;
    let mut truncated = epoch_budget.is_some_and(|b| b < cfg.max_epochs);
    for epoch in 1..=max_epochs {
        sgd_epoch(&mut net, train, state.lr, cfg.batch_size, &mut rng)?;
        let ev = score(&net)?;
        tracker.record(Phase::Epoch, epoch, &net.flatten(), ev);
        lr_step(&mut state, ev.ce, &schedule);
        tracker.log.generations.push(GenerationSummary {
            generation: epoch,
            evaluations: tracker.count(),
            best_fitness: tracker.best().map_or(f64::INFINITY, |b| b.1.ce),
            best_train_accuracy: tracker.best_accuracy(),
            lr: state.lr,
            ga_events: 0,
        });
        if ev.accuracy > best_acc {
            best_acc = ev.accuracy;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.early_stop {
                truncated = false;
                break;
            }
        }
    }
    let (mut log, _) = tracker.into_parts();
    let best = net.flatten();
    log.final_metrics = Some(evaluate_model(&best, spec, train, test)?);
    log.truncated = truncated;
    Ok(TrainOutcome {
        best_fitness: log.records.last().map_or(f64::NAN, |r| r.fitness),
        best,
        log,
    })
}
