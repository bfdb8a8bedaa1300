//! GMW-SGD training loop, its fitness plumbing and the SGD / SL-PSO baselines.

mod baselines;
mod config;
mod fitness;
mod log;
mod sgd;
mod train;

pub use baselines::{sgd_train, slpso_train};
pub use config::{GmwConfig, LrSchedule, SgdTrainConfig, SlpsoTrainConfig};
pub use fitness::{evaluate_model, sample_eval_subset, Evaluation, FitnessFn, ModelMetrics};
pub use log::{EvalRecord, EvalTracker, GaEventRecord, GenerationSummary, Phase, TrainLog};
pub use sgd::{apply_gradients, lr_step, sgd_epoch, SgdState};
pub use train::{gmw_sgd_train, init_population, refine_leaders, TrainOutcome};

pub(crate) use fitness::{check_compatible, evaluate_pass};
pub(crate) use train::{SEARCH_STREAM, SGD_STREAM, SUBSET_STREAM};
