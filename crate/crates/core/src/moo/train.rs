use serde::{Deserialize, Serialize};

use super::nsga::{moo_leaders, select_survivors, ObjectiveVector, Ranking};
use crate::data::Dataset;
use crate::error::Result;
use crate::hybrid::{
    check_compatible, evaluate_pass, init_population, lr_step, refine_leaders, sample_eval_subset, EvalTracker,
    Evaluation, FitnessFn, GaEventRecord, GenerationSummary, GmwConfig, Phase, SgdState, TrainLog, SEARCH_STREAM,
    SGD_STREAM, SUBSET_STREAM,
};
use crate::metaheuristics::{ga_event, gwo_step, GaEventState, GwoSchedule, Population};
use crate::nn::{l2_regularizer, NetworkSpec, ParamVector};
use crate::rng::RngStream;

/// Representatives reported alongside the full first front.
pub const REPORT_SIZE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub accuracy: f64,
    pub regularizer: f64,
    #[serde(with = "maybe_infinite")]
    pub crowding: f64,
}

/// JSON has no infinity; boundary crowding is written as `"inf"`.
mod maybe_infinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad crowding value '{t}'"))),
        }
    }
}

/// Final first front, sorted by accuracy descending, and its
/// highest-crowding members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoReport {
    pub front: Vec<ParetoPoint>,
    pub selected: Vec<ParetoPoint>,
}

impl ParetoReport {
    /// Build from the objectives of one front.
    pub fn from_front(objectives: &[ObjectiveVector], k: usize) -> Self {
        let crowd = super::nsga::crowding_distance(objectives);
        let mut front: Vec<ParetoPoint> = objectives
            .iter()
            .zip(&crowd)
            .map(|(o, &c)| ParetoPoint {
                accuracy: o.accuracy(),
                regularizer: o.regularizer(),
                crowding: c,
            })
            .collect();
        let mut by_crowd: Vec<usize> = (0..front.len()).collect();
        by_crowd.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(a.cmp(&b)));
        by_crowd.truncate(k);
        by_crowd.sort_by(|&a, &b| front[b].accuracy.total_cmp(&front[a].accuracy).then(a.cmp(&b)));
        let selected = by_crowd.iter().map(|&i| front[i]).collect();
        front.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy));
        Self { front, selected }
    }

    /// `accuracy,regularizer` rows of the selected points.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("accuracy,regularizer\n");
        for p in &self.selected {
            out.push_str(&format!("{},{}\n", p.accuracy, p.regularizer));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MooOutcome {
    pub report: ParetoReport,
    /// Parameters of the first-front members, aligned with their objectives.
    pub front: Vec<(ParamVector, ObjectiveVector)>,
    pub log: TrainLog,
}

fn objectives(pop: &Population, indices: &[usize], evals: &[Evaluation], objs: &mut [ObjectiveVector]) {
    for (&i, ev) in indices.iter().zip(evals) {
        objs[i] = ObjectiveVector::from_metrics(ev.accuracy, l2_regularizer(&pop.individuals[i].position));
    }
}

/// Bi-objective GMW-SGD: accuracy against the squared-weight regularizer.
/// Leaders come from the non-dominated ranking; each generation ends with
/// survivor selection over the rescored parents plus the updated pack. SGD
/// on the leaders still descends cross-entropy, which also drives the GA
/// stall counter.
pub fn gmw_sgd_moo_train(cfg: &GmwConfig, spec: &NetworkSpec, train: &Dataset) -> Result<MooOutcome> {
    cfg.validate()?;
    check_compatible(spec, train)?;
    let dim = spec.param_count()?;
    let mut rng = RngStream::with_stream(cfg.seed, SEARCH_STREAM);
    let mut subset_rng = RngStream::with_stream(cfg.seed, SUBSET_STREAM);
    let mut sgd_rng = RngStream::with_stream(cfg.seed, SGD_STREAM);

    let mut tracker = EvalTracker::new(cfg.eval_budget);
    let mut pop = init_population(cfg, dim, &mut rng)?;
    let mut fitness = FitnessFn::new(spec.clone(), sample_eval_subset(train, cfg.eval_batch, &mut subset_rng))?;
    let all: Vec<usize> = (0..cfg.np).collect();
    let mut objs = vec![ObjectiveVector::new(0.0, 0.0); cfg.np];
    let init = evaluate_pass(&mut pop, &all, &fitness, &mut tracker, Phase::Init, 0)?;
    let Some(evals) = init else {
        return Err(crate::Error::usage("evaluation budget too small for the initial population"));
    };
    objectives(&pop, &all, &evals, &mut objs);

    let mut ga = GaEventState::new(cfg.ga)?;
    let mut sgd = SgdState::new(cfg.lr0);
    let schedule = GwoSchedule::new(cfg.a_range.0, cfg.a_range.1, (cfg.n_gen * cfg.n_evol).max(1))?;
    let mut step = 0;
    let mut running = true;

    'generations: for generation in 1..=cfg.n_gen {
        if generation > 1 {
            fitness = FitnessFn::new(spec.clone(), sample_eval_subset(train, cfg.eval_batch, &mut subset_rng))?;
            match evaluate_pass(&mut pop, &all, &fitness, &mut tracker, Phase::Rescore, generation)? {
                Some(evals) => objectives(&pop, &all, &evals, &mut objs),
                None => break,
            }
        }
        let parents = pop.clone();
        let parent_objs = objs.clone();
        let mut events = 0;
        for iteration in 1..=cfg.n_evol {
            let hier = moo_leaders(&Ranking::new(&objs))?;
            let a = schedule.compute_a(step)?;
            step += 1;
            gwo_step(&mut pop, &hier, a, &mut rng)?;
            let Some(evals) = evaluate_pass(&mut pop, &all, &fitness, &mut tracker, Phase::Gwo, generation)? else {
                running = false;
                break;
            };
            objectives(&pop, &all, &evals, &mut objs);
            let best_omega = hier
                .omegas
                .iter()
                .filter_map(|&o| pop.individuals[o].fitness)
                .fold(f64::INFINITY, f64::min);
            if ga.observe(best_omega) {
                let hier = moo_leaders(&Ranking::new(&objs))?;
                if !tracker.allows(hier.omegas.len()) {
                    tracker.log.truncated = true;
                    running = false;
                    break;
                }
                let after_eval = tracker.count();
                let report = ga_event(&mut pop, &hier, &mut ga, &mut rng)?;
                if let Some(evals) = evaluate_pass(&mut pop, &hier.omegas, &fitness, &mut tracker, Phase::Ga, generation)? {
                    objectives(&pop, &hier.omegas, &evals, &mut objs);
                }
                tracker.log.events.push(GaEventRecord {
                    generation,
                    iteration,
                    after_eval,
                    report,
                });
                events += 1;
            }
        }
        if !running {
            break 'generations;
        }
        if cfg.n_epoch > 0 {
            let hier = moo_leaders(&Ranking::new(&objs))?;
            if !tracker.allows(3) {
                tracker.log.truncated = true;
                break;
            }
            refine_leaders(&mut pop, &hier, spec, train, sgd.lr, cfg.n_epoch, cfg.batch_size, &mut sgd_rng)?;
            let leaders = hier.leaders();
            if let Some(evals) = evaluate_pass(&mut pop, &leaders, &fitness, &mut tracker, Phase::Sgd, generation)? {
                objectives(&pop, &leaders, &evals, &mut objs);
                let best = evals.iter().map(|e| e.ce).fold(f64::INFINITY, f64::min);
                lr_step(&mut sgd, best, &cfg.lr_schedule());
            }
        }

        let mut pool_objs = parent_objs;
        pool_objs.extend_from_slice(&objs);
        let keep = select_survivors(&pool_objs, cfg.np)?;
        let mut next = Vec::with_capacity(cfg.np);
        let mut next_objs = Vec::with_capacity(cfg.np);
        for &k in &keep {
            next.push(if k < cfg.np {
                parents.individuals[k].clone()
            } else {
                pop.individuals[k - cfg.np].clone()
            });
            next_objs.push(pool_objs[k]);
        }
        pop = Population::new(next);
        objs = next_objs;
        tracker.log.generations.push(GenerationSummary {
            generation,
            evaluations: tracker.count(),
            best_fitness: tracker.best().map_or(f64::INFINITY, |b| b.1.ce),
            best_train_accuracy: tracker.best_accuracy(),
            lr: sgd.lr,
            ga_events: events,
        });
    }

    let ranking = Ranking::new(&objs);
    let first = &ranking.fronts[0];
    let front_objs: Vec<ObjectiveVector> = first.iter().map(|&i| objs[i]).collect();
    let report = ParetoReport::from_front(&front_objs, REPORT_SIZE);
    let front = first
        .iter()
        .map(|&i| (pop.individuals[i].position.clone(), objs[i]))
        .collect();
    let (log, _) = tracker.into_parts();
    Ok(MooOutcome { report, front, log })
}
