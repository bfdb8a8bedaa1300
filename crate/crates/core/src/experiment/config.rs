use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::{GmwConfig, SgdTrainConfig, SlpsoTrainConfig};
use crate::nn::NetworkSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Sgd,
    Slpso,
    GmwSgd,
    GmwSgdMoo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Sgd, Algorithm::Slpso, Algorithm::GmwSgd, Algorithm::GmwSgdMoo];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sgd => "sgd",
            Algorithm::Slpso => "slpso",
            Algorithm::GmwSgd => "gmw-sgd",
            Algorithm::GmwSgdMoo => "gmw-sgd-moo",
        }
    }

    /// Display label used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Sgd => "SGD",
            Algorithm::Slpso => "SL-PSO",
            Algorithm::GmwSgd => "GMW-SGD",
            Algorithm::GmwSgdMoo => "GMW-SGD-MOO",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
            Error::Config(format!("unknown algorithm '{s}'; expected one of: {}", names.join(", ")))
        })
    }
}

/// Where the samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// Gaussian blobs split into train/test.
    Blobs {
        samples: usize,
        classes: usize,
        dims: usize,
        spread: f64,
        train_fraction: f64,
        #[serde(default)]
        data_seed: u64,
    },
    /// Extracted CIFAR-10 binary batches, optionally restricted to some classes.
    Cifar10 {
        path: PathBuf,
        #[serde(default)]
        classes: Option<Vec<usize>>,
    },
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Blobs {
            samples: 2000,
            classes: 3,
            dims: 20,
            spread: 2.0,
            train_fraction: 0.5,
            data_seed: 100,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DatasetSpec::Blobs {
                samples,
                classes,
                dims,
                spread,
                train_fraction,
                ..
            } => {
                if *samples == 0 || *classes < 2 || *dims == 0 {
                    return Err(Error::Config("blobs need samples > 0, classes >= 2 and dims > 0".into()));
                }
                if !(*spread >= 0.0) {
                    return Err(Error::Config(format!("blobs spread must be >= 0, got {spread}")));
                }
                if !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                    return Err(Error::Config(format!("train_fraction must lie in (0, 1), got {train_fraction}")));
                }
            }
            DatasetSpec::Cifar10 { classes, .. } => {
                if let Some(c) = classes {
                    if c.is_empty() || c.iter().any(|&k| k > 9) {
                        return Err(Error::Config("cifar10 classes must be a non-empty subset of 0..=9".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which network to train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkRef {
    /// The 58,685-parameter CIFAR-10 CNN.
    DefaultCnn,
    /// Dense ReLU network; input and output widths follow the dataset.
    Mlp { hidden: Vec<usize> },
    Custom { spec: NetworkSpec },
}

impl Default for NetworkRef {
    fn default() -> Self {
        NetworkRef::Mlp { hidden: vec![64, 32] }
    }
}

impl NetworkRef {
    pub fn build(&self, input_len: usize, classes: usize) -> Result<NetworkSpec> {
        let spec = match self {
            NetworkRef::DefaultCnn => NetworkSpec::default_cnn(),
            NetworkRef::Mlp { hidden } => {
                let mut widths = vec![input_len];
                widths.extend_from_slice(hidden);
                widths.push(classes);
                NetworkSpec::mlp(&widths)
            }
            NetworkRef::Custom { spec } => spec.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Complete description of one run. Every field that affects the result
/// is echoed into `result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Logged-evaluation cap for the metaheuristics; epoch cap for SGD.
    pub eval_budget: Option<usize>,
    pub out: Option<PathBuf>,
    pub dataset: DatasetSpec,
    pub network: NetworkRef,
    pub gmw: GmwConfig,
    pub slpso: SlpsoTrainConfig,
    pub sgd: SgdTrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::GmwSgd,
            seed: 0,
            eval_budget: None,
            out: None,
            dataset: DatasetSpec::default(),
            network: NetworkRef::default(),
            gmw: GmwConfig::default(),
            slpso: SlpsoTrainConfig::default(),
            sgd: SgdTrainConfig::default(),
        }
    }
}

/// Command-line overrides; `None` leaves the file value alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub algorithm: Option<Algorithm>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub budget: Option<usize>,
    pub np: Option<usize>,
    pub n_gen: Option<usize>,
    pub n_evol: Option<usize>,
    pub n_epoch: Option<usize>,
    pub lr: Option<f64>,
    pub p_mut: Option<f64>,
    pub patience: Option<usize>,
    pub eta_m: Option<f64>,
}

impl RunConfig {
    /// Parse TOML, or JSON when the text starts with `{`. A JSON document
    /// with a top-level `config` object (a saved result) yields that object.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let value: serde_json::Value =
                serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON config: {e}")))?;
            let inner = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(inner).map_err(|e| Error::Config(format!("invalid JSON config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply overrides. Search parameters go to every section that has them,
    /// so the echoed config stays self-consistent.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(a) = o.algorithm {
            self.algorithm = a;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(b) = o.budget {
            self.eval_budget = Some(b);
        }
        if let Some(v) = o.np {
            self.gmw.np = v;
            self.slpso.np = v;
        }
        if let Some(v) = o.n_gen {
            self.gmw.n_gen = v;
        }
        if let Some(v) = o.n_evol {
            self.gmw.n_evol = v;
            self.slpso.n_evol = v;
        }
        if let Some(v) = o.n_epoch {
            self.gmw.n_epoch = v;
        }
        if let Some(v) = o.lr {
            self.gmw.lr0 = v;
            self.sgd.lr0 = v;
        }
        if let Some(v) = o.p_mut {
            self.gmw.ga.p_mut = v;
        }
        if let Some(v) = o.patience {
            self.gmw.ga.patience = v;
        }
        if let Some(v) = o.eta_m {
            self.gmw.ga.eta_m = v;
        }
    }

    /// Copy the run-level seed and budget into the algorithm sections.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.gmw.seed = c.seed;
        c.slpso.seed = c.seed;
        c.sgd.seed = c.seed;
        if c.eval_budget.is_some() {
            c.gmw.eval_budget = c.eval_budget;
            c.slpso.eval_budget = c.eval_budget;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        match self.algorithm {
            Algorithm::Sgd => self.sgd.validate(),
            Algorithm::Slpso => self.slpso.validate(),
            Algorithm::GmwSgd | Algorithm::GmwSgdMoo => self.gmw.validate(),
        }
    }
}
