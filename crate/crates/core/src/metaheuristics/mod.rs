//! Population-based optimizers over parameter-vector space.

mod ga;
mod gwo;
mod population;
mod slpso;

pub use ga::{
    apply_event, crossover_with_dominant, ga_event, mutate_gene, omega_rates, polynomial_mutation, GaConfig,
    GaEventKind, GaEventReport, GaEventState, MutationStats,
};
pub use gwo::{gwo_minimize, gwo_step, GwoOutcome, GwoSchedule};
pub use population::{rank_by_fitness, update_hierarchy, Individual, Population, WolfHierarchy};
pub use slpso::{learning_probability, slpso_step, SlpsoConfig, SlpsoState};

/// Sum of squares; minimum 0 at the origin.
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
