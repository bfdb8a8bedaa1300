//! Genetic operators applied to stagnating omega wolves.

use serde::{Deserialize, Serialize};

use super::population::{Population, WolfHierarchy};
use crate::error::{Error, Result};
use crate::rng::Uniform01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Consecutive non-improving GWO iterations before an event fires.
    pub patience: usize,
    /// Probability that an event is a mutation rather than a crossover.
    pub p_mut: f64,
    /// Polynomial mutation distribution index.
    pub eta_m: f64,
    /// Modification rate applied to the worst omega.
    pub rate_worst: f64,
    /// Modification rate applied to the best omega.
    pub rate_best: f64,
    pub x_lower: f64,
    pub x_upper: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            patience: 4,
            p_mut: 0.7,
            eta_m: 20.0,
            rate_worst: 0.6,
            rate_best: 0.1,
            x_lower: -1.0,
            x_upper: 1.0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if self.patience == 0 {
            return Err(Error::Config("patience must be positive".into()));
        }
        if !unit(self.p_mut) {
            return Err(Error::Config(format!("p_mut must lie in [0, 1], got {}", self.p_mut)));
        }
        if !unit(self.rate_worst) || !unit(self.rate_best) {
            return Err(Error::Config("modification rates must lie in [0, 1]".into()));
        }
        if !(self.eta_m.is_finite() && self.eta_m >= 0.0) {
            return Err(Error::Config(format!("eta_m must be finite and >= 0, got {}", self.eta_m)));
        }
        if !(self.x_lower < self.x_upper) {
            return Err(Error::Config(format!(
                "mutation bounds must satisfy lower < upper, got [{}, {}]",
                self.x_lower, self.x_upper
            )));
        }
        Ok(())
    }
}

/// Patience bookkeeping for GA events.
#[derive(Debug, Clone, PartialEq)]
pub struct GaEventState {
    pub config: GaConfig,
    pub stall_counter: usize,
    pub best_omega_fitness_seen: f64,
}

impl GaEventState {
    pub fn new(config: GaConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            stall_counter: 0,
            best_omega_fitness_seen: f64::INFINITY,
        })
    }

    /// Record the best omega fitness of the latest pass. Returns `true`
    /// when patience has been reached and an event is due.
    pub fn observe(&mut self, best_omega_fitness: f64) -> bool {
        if best_omega_fitness < self.best_omega_fitness_seen {
            self.best_omega_fitness_seen = best_omega_fitness;
            self.stall_counter = 0;
        } else {
            self.stall_counter += 1;
        }
        self.is_triggered()
    }

    pub fn is_triggered(&self) -> bool {
        self.stall_counter >= self.config.patience
    }
}

/// Polynomial mutation of one gene with draw `u`. `p` must already lie in
/// `[lower, upper]`; the result always does.
pub fn mutate_gene(p: f64, u: f64, eta_m: f64, lower: f64, upper: f64) -> f64 {
    let exponent = 1.0 / (1.0 + eta_m);
    let next = if u <= 0.5 {
        p + ((2.0 * u).powf(exponent) - 1.0) * (p - lower)
    } else {
        p + (1.0 - (2.0 * (1.0 - u)).powf(exponent)) * (upper - p)
    };
    next.clamp(lower, upper)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationStats {
    pub mutated: usize,
    /// Genes found outside the bounds and clamped before mutation.
    pub clamped: usize,
}

/// Mutate each gene independently with probability `rate`.
///
/// Every gene is first clamped into `[x_lower, x_upper]`. Per gene, one draw
/// decides whether it mutates and, if so, a second draw is the `u` of the
/// mutation formula.
pub fn polynomial_mutation<R: Uniform01>(
    position: &mut [f64],
    rate: f64,
    config: &GaConfig,
    rng: &mut R,
) -> MutationStats {
    let (lo, hi) = (config.x_lower, config.x_upper);
    let mut stats = MutationStats::default();
    for gene in position.iter_mut() {
        if *gene < lo || *gene > hi {
            *gene = gene.clamp(lo, hi);
            stats.clamped += 1;
        }
        if rng.next_unit() < rate {
            let u = rng.next_unit();
            *gene = mutate_gene(*gene, u, config.eta_m, lo, hi);
            stats.mutated += 1;
        }
    }
    stats
}

/// Uniform-mask crossover: each gene is taken from `dominant` with
/// probability `rate`. Returns how many genes were copied.
pub fn crossover_with_dominant<R: Uniform01>(
    omega: &mut [f64],
    dominant: &[f64],
    rate: f64,
    rng: &mut R,
) -> Result<usize> {
    if omega.len() != dominant.len() {
        return Err(Error::dimension("crossover parents", omega.len(), dominant.len()));
    }
    let mut copied = 0;
    for (o, &d) in omega.iter_mut().zip(dominant) {
        if rng.next_unit() < rate {
            *o = d;
            copied += 1;
        }
    }
    Ok(copied)
}

/// Per-omega modification rates for omegas ordered best to worst, linear
/// from `rate_best` to `rate_worst`.
pub fn omega_rates(count: usize, rate_worst: f64, rate_best: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![rate_worst],
        _ => (0..count)
            .map(|k| rate_best + (rate_worst - rate_best) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaEventKind {
    Mutation,
    Crossover,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaEventReport {
    pub kind: GaEventKind,
    /// (individual index, modification rate) for every omega touched.
    pub rates: Vec<(usize, f64)>,
    pub genes_changed: usize,
    pub genes_clamped: usize,
}

/// Fire a GA event on the omegas. One draw against `p_mut` chooses mutation
/// or crossover for the whole pack; leaders are never modified.
pub fn ga_event<R: Uniform01>(
    pop: &mut Population,
    hier: &WolfHierarchy,
    state: &mut GaEventState,
    rng: &mut R,
) -> Result<GaEventReport> {
    if !state.is_triggered() {
        return Err(Error::usage(format!(
            "GA event requested with stall counter {} below patience {}",
            state.stall_counter, state.config.patience
        )));
    }
    let kind = if rng.next_unit() < state.config.p_mut {
        GaEventKind::Mutation
    } else {
        GaEventKind::Crossover
    };
    let report = apply_event(pop, hier, &state.config, kind, rng)?;
    state.stall_counter = 0;
    Ok(report)
}

/// Apply a GA event of a fixed kind (no trigger check, no `p_mut` draw).
pub fn apply_event<R: Uniform01>(
    pop: &mut Population,
    hier: &WolfHierarchy,
    config: &GaConfig,
    kind: GaEventKind,
    rng: &mut R,
) -> Result<GaEventReport> {
    let rates = omega_rates(hier.omegas.len(), config.rate_worst, config.rate_best);
    let leaders = hier.leaders();
    let mut report = GaEventReport {
        kind,
        rates: Vec::with_capacity(rates.len()),
        genes_changed: 0,
        genes_clamped: 0,
    };
    for (&w, &rate) in hier.omegas.iter().zip(&rates) {
        match kind {
            GaEventKind::Mutation => {
                let stats = polynomial_mutation(&mut pop.individuals[w].position, rate, config, rng);
                report.genes_changed += stats.mutated;
                report.genes_clamped += stats.clamped;
            }
            GaEventKind::Crossover => {
                let parent = leaders[rng.next_index(3)];
                let dominant = pop.individuals[parent].position.clone();
                report.genes_changed +=
                    crossover_with_dominant(&mut pop.individuals[w].position, &dominant, rate, rng)?;
            }
        }
        pop.individuals[w].fitness = None;
        report.rates.push((w, rate));
    }
    Ok(report)
}
