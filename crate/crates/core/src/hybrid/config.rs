use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metaheuristics::{GaConfig, SlpsoConfig};

/// Reduce-on-plateau learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub lr0: f64,
    pub factor: f64,
    pub patience: usize,
    pub min: f64,
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > self.min && self.min > 0.0) {
            return Err(Error::Config(format!(
                "learning rates must satisfy lr0 > lr_min > 0, got lr0 = {}, lr_min = {}",
                self.lr0, self.min
            )));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::Config(format!("lr_factor must lie in (0, 1), got {}", self.factor)));
        }
        if self.patience == 0 {
            return Err(Error::Config("lr_patience must be positive".into()));
        }
        Ok(())
    }
}

/// GMW-SGD run parameters. Defaults are the published CIFAR-10 settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmwConfig {
    /// Pack size.
    pub np: usize,
    pub n_gen: usize,
    /// GWO iterations per generation.
    pub n_evol: usize,
    /// SGD epochs per generation on each leader.
    pub n_epoch: usize,
    pub lr0: f64,
    pub lr_factor: f64,
    /// Generations without improvement of the best leader before decay.
    pub lr_patience: usize,
    pub lr_min: f64,
    pub a_range: (f64, f64),
    pub ga: GaConfig,
    pub init_range: (f64, f64),
    /// Samples in the per-generation fitness subset.
    pub eval_batch: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Cap on logged fitness evaluations (all phases). `None` runs the full schedule.
    pub eval_budget: Option<usize>,
}

impl Default for GmwConfig {
    fn default() -> Self {
        Self {
            np: 15,
            n_gen: 14,
            n_evol: 10,
            n_epoch: 2,
            lr0: 0.01,
            lr_factor: 0.1,
            lr_patience: 2,
            lr_min: 1e-5,
            a_range: (1.0, 0.0),
            ga: GaConfig::default(),
            init_range: (-0.1, 0.1),
            eval_batch: 1024,
            batch_size: 32,
            seed: 0,
            eval_budget: None,
        }
    }
}

impl GmwConfig {
    pub fn lr_schedule(&self) -> LrSchedule {
        LrSchedule {
            lr0: self.lr0,
            factor: self.lr_factor,
            patience: self.lr_patience,
            min: self.lr_min,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.np < 4 {
            return Err(Error::Config(format!("np must be at least 4, got {}", self.np)));
        }
        if self.n_evol == 0 || self.batch_size == 0 || self.eval_batch == 0 {
            return Err(Error::Config("n_evol, batch_size and eval_batch must be positive".into()));
        }
        if !(self.a_range.0 >= 0.0 && self.a_range.1 >= 0.0) {
            return Err(Error::Config("a_range endpoints must be >= 0".into()));
        }
        if !(self.init_range.0 <= self.init_range.1) {
            return Err(Error::Config("init_range must satisfy low <= high".into()));
        }
        self.lr_schedule().validate()?;
        self.ga.validate()
    }

    /// GWO-phase evaluations in a full run: `np * n_gen * n_evol`.
    pub fn gwo_evaluations(&self) -> usize {
        self.np * self.n_gen * self.n_evol
    }
}

/// SL-PSO baseline parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlpsoTrainConfig {
    pub np: usize,
    /// Swarm evaluation passes; total evaluations `np * n_evol`.
    pub n_evol: usize,
    #[serde(flatten)]
    pub swarm: SlpsoConfig,
    pub eval_batch: usize,
    pub seed: u64,
    pub eval_budget: Option<usize>,
}

impl Default for SlpsoTrainConfig {
    fn default() -> Self {
        Self {
            np: 60,
            n_evol: 36,
            swarm: SlpsoConfig::default(),
            eval_batch: 1024,
            seed: 0,
            eval_budget: None,
        }
    }
}

impl SlpsoTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.np < 2 || self.n_evol == 0 || self.eval_batch == 0 {
            return Err(Error::Config("SL-PSO needs np >= 2 and positive n_evol, eval_batch".into()));
        }
        Ok(())
    }
}

/// Plain SGD baseline parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdTrainConfig {
    pub lr0: f64,
    pub lr_factor: f64,
    /// Epochs without train-loss improvement before decay.
    pub lr_patience: usize,
    pub lr_min: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without train-accuracy improvement.
    pub early_stop: usize,
    pub init_range: (f64, f64),
    pub seed: u64,
}

impl Default for SgdTrainConfig {
    fn default() -> Self {
        Self {
            lr0: 0.01,
            lr_factor: 0.1,
            lr_patience: 10,
            lr_min: 1e-5,
            batch_size: 32,
            max_epochs: 500,
            early_stop: 20,
            init_range: (-0.1, 0.1),
            seed: 0,
        }
    }
}

impl SgdTrainConfig {
    pub fn lr_schedule(&self) -> LrSchedule {
        LrSchedule {
            lr0: self.lr0,
            factor: self.lr_factor,
            patience: self.lr_patience,
            min: self.lr_min,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.early_stop == 0 {
            return Err(Error::Config("batch_size and early_stop must be positive".into()));
        }
        self.lr_schedule().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        GmwConfig::default().validate().unwrap();
        SlpsoTrainConfig::default().validate().unwrap();
        SgdTrainConfig::default().validate().unwrap();
        assert_eq!(GmwConfig::default().gwo_evaluations(), 2100);
    }

    #[test]
    fn bad_values_rejected() {
        assert!(GmwConfig { np: 3, ..GmwConfig::default() }.validate().is_err());
        assert!(GmwConfig { lr_min: 0.02, ..GmwConfig::default() }.validate().is_err());
        assert!(GmwConfig { lr_factor: 1.0, ..GmwConfig::default() }.validate().is_err());
    }
}
