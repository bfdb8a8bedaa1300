use serde::{Deserialize, Serialize};

use super::fitness::{Evaluation, ModelMetrics};
use crate::metaheuristics::GaEventReport;
use crate::nn::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    Gwo,
    Ga,
    Sgd,
    /// SL-PSO swarm update.
    Swarm,
    /// Full-train evaluation after an SGD-baseline epoch.
    Epoch,
    /// Generation-start re-scoring of the parent set (bi-objective mode).
    Rescore,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Gwo => "gwo",
            Phase::Ga => "ga",
            Phase::Sgd => "sgd",
            Phase::Swarm => "swarm",
            Phase::Epoch => "epoch",
            Phase::Rescore => "rescore",
        }
    }
}

/// One logged fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// 1-based.
    pub eval_index: usize,
    pub generation: usize,
    pub phase: Phase,
    pub fitness: f64,
    pub accuracy: f64,
    /// Lowest fitness so far.
    pub best_fitness: f64,
    /// Highest evaluation-set accuracy so far.
    pub best_train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: usize,
    pub evaluations: usize,
    pub best_fitness: f64,
    pub best_train_accuracy: f64,
    pub lr: f64,
    pub ga_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaEventRecord {
    pub generation: usize,
    pub iteration: usize,
    /// Evaluations logged before the event fired.
    pub after_eval: usize,
    pub report: GaEventReport,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<EvalRecord>,
    pub generations: Vec<GenerationSummary>,
    pub events: Vec<GaEventRecord>,
    /// Set when the evaluation budget stopped the run early.
    pub truncated: bool,
    pub final_metrics: Option<ModelMetrics>,
}

impl TrainLog {
    pub fn evaluations(&self) -> usize {
        self.records.len()
    }

    pub fn count_phase(&self, phase: Phase) -> usize {
        self.records.iter().filter(|r| r.phase == phase).count()
    }
}

/// Evaluation counter, budget guard and best-ever archive.
#[derive(Debug, Clone)]
pub struct EvalTracker {
    pub log: TrainLog,
    budget: Option<usize>,
    best: Option<(ParamVector, Evaluation)>,
    best_accuracy: f64,
}

impl EvalTracker {
    pub fn new(budget: Option<usize>) -> Self {
        Self {
            log: TrainLog::default(),
            budget,
            best: None,
            best_accuracy: f64::NEG_INFINITY,
        }
    }

    pub fn count(&self) -> usize {
        self.log.records.len()
    }

    pub fn allows(&self, evaluations: usize) -> bool {
        self.budget.is_none_or(|b| self.count() + evaluations <= b)
    }

    pub fn record(&mut self, phase: Phase, generation: usize, position: &ParamVector, ev: Evaluation) {
        if self.best.as_ref().is_none_or(|(_, b)| ev.ce < b.ce) {
            self.best = Some((position.clone(), ev));
        }
        self.best_accuracy = self.best_accuracy.max(ev.accuracy);
        let best_fitness = self.best.as_ref().map_or(ev.ce, |(_, b)| b.ce);
        self.log.records.push(EvalRecord {
            eval_index: self.count() + 1,
            generation,
            phase,
            fitness: ev.ce,
            accuracy: ev.accuracy,
            best_fitness,
            best_train_accuracy: self.best_accuracy,
        });
    }

    pub fn best(&self) -> Option<&(ParamVector, Evaluation)> {
        self.best.as_ref()
    }

    pub fn best_accuracy(&self) -> f64 {
        self.best_accuracy
    }

    pub fn into_parts(self) -> (TrainLog, Option<(ParamVector, Evaluation)>) {
        (self.log, self.best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_bests_are_monotone() {
        let mut t = EvalTracker::new(None);
        let p = ParamVector::zeros(2);
        for (ce, acc) in [(2.0, 0.2), (1.0, 0.1), (3.0, 0.5), (0.5, 0.3)] {
            t.record(Phase::Gwo, 1, &p, Evaluation { ce, accuracy: acc });
        }
        let best: Vec<f64> = t.log.records.iter().map(|r| r.best_fitness).collect();
        let accs: Vec<f64> = t.log.records.iter().map(|r| r.best_train_accuracy).collect();
        assert_eq!(best, [2.0, 1.0, 1.0, 0.5]);
        assert_eq!(accs, [0.2, 0.2, 0.5, 0.5]);
        assert_eq!(t.log.records[3].eval_index, 4);
    }

    #[test]
    fn budget_guard() {
        let mut t = EvalTracker::new(Some(3));
        assert!(t.allows(3));
        t.record(Phase::Init, 0, &ParamVector::zeros(1), Evaluation { ce: 1.0, accuracy: 0.0 });
        assert!(!t.allows(3));
        assert!(t.allows(2));
    }
}
