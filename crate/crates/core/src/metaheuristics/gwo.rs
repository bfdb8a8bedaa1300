//! Grey wolf position updates.

use serde::{Deserialize, Serialize};

use super::population::{update_hierarchy, Population, WolfHierarchy};
use crate::error::{Error, Result};
use crate::rng::{RngStream, Uniform01};

/// Linear schedule for the encircling coefficient `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwoSchedule {
    pub a_start: f64,
    pub a_end: f64,
    pub total_steps: usize,
}

impl GwoSchedule {
    pub fn new(a_start: f64, a_end: f64, total_steps: usize) -> Result<Self> {
        if total_steps == 0 {
            return Err(Error::usage("GWO schedule needs at least one step"));
        }
        Ok(Self {
            a_start,
            a_end,
            total_steps,
        })
    }

    pub fn compute_a(&self, t: usize) -> Result<f64> {
        if t > self.total_steps {
            return Err(Error::usage(format!(
                "step {t} outside schedule 0..={}",
                self.total_steps
            )));
        }
        Ok(self.a_start + (self.a_end - self.a_start) * t as f64 / self.total_steps as f64)
    }
}

/// Move every omega towards the dominant wolves.
///
/// For each omega (ascending index), each dimension, and each leader in
/// order alpha, beta, delta, two fresh draws `r1`, `r2` give
/// `A = 2a*r1 - a`, `C = 2*r2`, `D = |C*X_l - X|`, `X_m = X_l - A*D`.
/// The new coordinate is the mean of the three `X_m`. Leaders do not move.
pub fn gwo_step<R: Uniform01>(pop: &mut Population, hier: &WolfHierarchy, a: f64, rng: &mut R) -> Result<()> {
    if a.is_nan() || a < 0.0 {
        return Err(Error::usage(format!("encircling coefficient a must be >= 0, got {a}")));
    }
    let dim = pop.dim();
    let leaders: Vec<Vec<f64>> = hier
        .leaders()
        .iter()
        .map(|&l| pop.individuals[l].position.to_vec())
        .collect();
    let mut omegas = hier.omegas.clone();
    omegas.sort_unstable();
    for &w in &omegas {
        let wolf = &mut pop.individuals[w];
        if wolf.dim() != dim {
            return Err(Error::dimension(format!("wolf {w} position"), dim, wolf.dim()));
        }
        for j in 0..dim {
            let x = wolf.position[j];
            let mut sum = 0.0;
            for leader in &leaders {
                let r1 = rng.next_unit();
                let r2 = rng.next_unit();
                let big_a = 2.0 * a * r1 - a;
                let big_c = 2.0 * r2;
                let d = (big_c * leader[j] - x).abs();
                sum += leader[j] - big_a * d;
            }
            let next = sum / 3.0;
            if !next.is_finite() {
                return Err(Error::numeric(format!("GWO update of wolf {w}, dimension {j}")));
            }
            wolf.position[j] = next;
        }
        wolf.fitness = None;
    }
    Ok(())
}

/// Result of a standalone GWO minimization.
#[derive(Debug, Clone)]
pub struct GwoOutcome {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after each iteration.
    pub history: Vec<f64>,
}

/// Plain GWO on a black-box objective, positions clamped to `bounds`.
pub fn gwo_minimize<F>(
    objective: F,
    dim: usize,
    bounds: (f64, f64),
    pack_size: usize,
    iterations: usize,
    a_range: (f64, f64),
    seed: u64,
) -> Result<GwoOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut rng = RngStream::new(seed);
    let schedule = GwoSchedule::new(a_range.0, a_range.1, iterations.max(1))?;
    let mut pop = Population::uniform(pack_size, dim, bounds.0, bounds.1, &mut rng);
    let all: Vec<usize> = (0..pack_size).collect();
    pop.evaluate(&all, |x| Ok(objective(x)))?;
    let mut history = Vec::with_capacity(iterations);
    for t in 0..iterations {
        let hier = update_hierarchy(&pop)?;
        gwo_step(&mut pop, &hier, schedule.compute_a(t)?, &mut rng)?;
        for &w in &hier.omegas {
            for v in pop.individuals[w].position.iter_mut() {
                *v = v.clamp(bounds.0, bounds.1);
            }
        }
        pop.evaluate(&hier.omegas, |x| Ok(objective(x)))?;
        let best = pop.best().unwrap();
        history.push(pop.individuals[best].fitness.unwrap());
    }
    let best = pop.best().unwrap();
    Ok(GwoOutcome {
        best_position: pop.individuals[best].position.to_vec(),
        best_fitness: pop.individuals[best].fitness.unwrap(),
        history,
    })
}
