//! Social-learning particle swarm: every particle but the best imitates
//! randomly chosen better-ranked demonstrators and the swarm mean.

use serde::{Deserialize, Serialize};

use super::population::{rank_by_fitness, Population};
use crate::error::{Error, Result};
use crate::rng::{RngStream, Uniform01};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlpsoConfig {
    /// Learning-probability exponent scale.
    pub alpha: f64,
    /// Social influence scale; `epsilon = beta * dim`.
    pub beta: f64,
    pub position_bounds: (f64, f64),
    pub velocity_bounds: (f64, f64),
}

impl Default for SlpsoConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.0001,
            position_bounds: (-0.1, 0.1),
            velocity_bounds: (-0.01, 0.01),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlpsoState {
    /// Per-particle velocity, indexed like the population.
    pub velocities: Vec<Vec<f64>>,
    pub epsilon: f64,
    /// Learning probability by rank position, best first.
    pub learning_probabilities: Vec<f64>,
    pub position_bounds: (f64, f64),
    pub velocity_bounds: (f64, f64),
}

/// `P = (1 - (i - 1) / m) ^ (alpha * ln ceil(dim / 100))`, with `i` the
/// rank counted from the worst particle (`i = 1` is the worst).
pub fn learning_probability(rank_from_worst: usize, swarm: usize, alpha: f64, dim: usize) -> f64 {
    let exponent = alpha * (dim.div_ceil(100).max(1) as f64).ln();
    (1.0 - (rank_from_worst as f64 - 1.0) / swarm as f64).powf(exponent)
}

impl SlpsoState {
    pub fn new(config: &SlpsoConfig, swarm: usize, dim: usize) -> Result<Self> {
        if swarm < 2 {
            return Err(Error::usage(format!("SL-PSO needs at least 2 particles, got {swarm}")));
        }
        let (vlo, vhi) = config.velocity_bounds;
        if !(vlo <= vhi) || !(config.position_bounds.0 <= config.position_bounds.1) {
            return Err(Error::Config("SL-PSO bounds must satisfy lower <= upper".into()));
        }
        let learning_probabilities = (0..swarm)
            .map(|pos| learning_probability(swarm - pos, swarm, config.alpha, dim))
            .collect();
        Ok(Self {
            velocities: vec![vec![0.0; dim]; swarm],
            epsilon: config.beta * dim as f64,
            learning_probabilities,
            position_bounds: config.position_bounds,
            velocity_bounds: config.velocity_bounds,
        })
    }

    /// Fresh swarm positioned uniformly inside `position_bounds`.
    pub fn init_swarm(&self, dim: usize, rng: &mut RngStream) -> Population {
        let (lo, hi) = self.position_bounds;
        Population::uniform(self.velocities.len(), dim, lo, hi, rng)
    }
}

/// One social-learning update.
///
/// Particles are ranked best first. The best is left alone. Every other
/// particle (in rank order) draws once against its learning probability; on
/// success, per dimension `j` it draws a demonstrator `k` among the better
/// ranks and `r1, r2, r3`, then
/// `dx = r1*dx + r2*(X_k - X) + r3*eps*(mean - X)` and `X += clamp(dx)`.
/// All learning reads positions from before the step.
pub fn slpso_step<R: Uniform01>(pop: &mut Population, state: &mut SlpsoState, rng: &mut R) -> Result<()> {
    let m = pop.len();
    if m < 2 {
        return Err(Error::usage(format!("SL-PSO needs at least 2 particles, got {m}")));
    }
    if state.velocities.len() != m {
        return Err(Error::dimension("SL-PSO velocities", m, state.velocities.len()));
    }
    let dim = pop.dim();
    let ranking = rank_by_fitness(&pop.fitness_values()?)?;
    let snapshot: Vec<Vec<f64>> = pop.individuals.iter().map(|i| i.position.to_vec()).collect();
    let mut mean = vec![0.0; dim];
    for x in &snapshot {
        for (mj, xj) in mean.iter_mut().zip(x) {
            *mj += xj;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m as f64);

    let (vlo, vhi) = state.velocity_bounds;
    for pos in 1..m {
        let i = ranking[pos];
        if rng.next_unit() >= state.learning_probabilities[pos] {
            continue;
        }
        let velocity = &mut state.velocities[i];
        let x = &snapshot[i];
        let target = &mut pop.individuals[i];
        for j in 0..dim {
            let k = ranking[rng.next_index(pos)];
            let r1 = rng.next_unit();
            let r2 = rng.next_unit();
            let r3 = rng.next_unit();
            let dv = r1 * velocity[j] + r2 * (snapshot[k][j] - x[j]) + r3 * state.epsilon * (mean[j] - x[j]);
            velocity[j] = dv.clamp(vlo, vhi);
            let next = x[j] + velocity[j];
            if !next.is_finite() {
                return Err(Error::numeric(format!("SL-PSO update of particle {i}, dimension {j}")));
            }
            target.position[j] = next;
        }
        target.fitness = None;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metaheuristics::Individual;
    use crate::nn::ParamVector;

    #[test]
    fn probabilities_in_unit_interval_and_monotone() {
        let st = SlpsoState::new(&SlpsoConfig::default(), 60, 58_685).unwrap();
        let p = &st.learning_probabilities;
        assert_eq!(*p.last().unwrap(), 1.0);
        for w in p.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert!(p[0] > 0.0);
        assert!((st.epsilon - 5.8685).abs() < 1e-12);
    }

    #[test]
    fn low_dimension_learns_always() {
        assert_eq!(learning_probability(60, 60, 0.5, 30), 1.0);
    }

    #[test]
    fn identical_swarm_does_not_move() {
        let mut pop = Population::new(
            (0..5)
                .map(|k| Individual {
                    position: ParamVector::new(vec![0.3, -0.2]),
                    fitness: Some(k as f64),
                })
                .collect(),
        );
        let before = pop.clone();
        let cfg = SlpsoConfig::default();
        let mut st = SlpsoState::new(&cfg, 5, 2).unwrap();
        slpso_step(&mut pop, &mut st, &mut RngStream::new(1)).unwrap();
        for (a, b) in pop.individuals.iter().zip(&before.individuals) {
            assert_eq!(a.position, b.position);
        }
    }

    #[test]
    fn best_particle_unchanged_and_velocity_clamped() {
        let mut rng = RngStream::new(8);
        let cfg = SlpsoConfig { velocity_bounds: (-0.05, 0.05), ..SlpsoConfig::default() };
        let mut st = SlpsoState::new(&cfg, 10, 20).unwrap();
        let mut pop = st.init_swarm(20, &mut rng);
        for (k, ind) in pop.individuals.iter_mut().enumerate() {
            ind.fitness = Some(((k * 7) % 10) as f64);
        }
        let best = pop.best().unwrap();
        let best_pos = pop.individuals[best].position.clone();
        slpso_step(&mut pop, &mut st, &mut rng).unwrap();
        assert_eq!(pop.individuals[best].position, best_pos);
        assert!(st.velocities.iter().flatten().all(|v| (-0.05..=0.05).contains(v)));
    }

    #[test]
    fn needs_two_particles() {
        let mut pop = Population::new(vec![Individual { position: ParamVector::zeros(1), fitness: Some(0.0) }]);
        let mut st = SlpsoState {
            velocities: vec![vec![0.0]],
            epsilon: 0.0,
            learning_probabilities: vec![1.0],
            position_bounds: (0.0, 0.0),
            velocity_bounds: (0.0, 0.0),
        };
        assert!(matches!(slpso_step(&mut pop, &mut st, &mut RngStream::new(0)), Err(Error::Usage(_))));
    }
}
