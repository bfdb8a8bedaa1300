use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::ParamVector;
use crate::rng::RngStream;

/// A search point with its cached fitness (`None` when stale).
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub position: ParamVector,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(position: ParamVector) -> Self {
        Self {
            position,
            fitness: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    pub individuals: Vec<Individual>,
}

impl Population {
    pub fn new(individuals: Vec<Individual>) -> Self {
        Self { individuals }
    }

    /// `size` individuals with every gene drawn from `U[low, high]`.
    pub fn uniform(size: usize, dim: usize, low: f64, high: f64, rng: &mut RngStream) -> Self {
        let individuals = (0..size)
            .map(|_| Individual::new((0..dim).map(|_| rng.uniform(low, high)).collect::<Vec<_>>().into()))
            .collect();
        Self { individuals }
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.individuals.first().map_or(0, Individual::dim)
    }

    /// Cached fitness of every individual; error if any is stale.
    pub fn fitness_values(&self) -> Result<Vec<f64>> {
        self.individuals
            .iter()
            .enumerate()
            .map(|(i, ind)| {
                ind.fitness
                    .ok_or_else(|| Error::usage(format!("individual {i} has no evaluated fitness")))
            })
            .collect()
    }

    pub fn stale(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.individuals[i].fitness.is_none()).collect()
    }

    /// Evaluate the listed individuals concurrently and store the results.
    /// Returns the values in the order of `indices`.
    pub fn evaluate<F>(&mut self, indices: &[usize], fitness: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let values: Vec<f64> = indices
            .par_iter()
            .map(|&i| fitness(&self.individuals[i].position))
            .collect::<Result<_>>()?;
        for (&i, &v) in indices.iter().zip(&values) {
            self.individuals[i].fitness = Some(v);
        }
        Ok(values)
    }

    /// Index of the lowest cached fitness (ties to the lower index).
    pub fn best(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, ind) in self.individuals.iter().enumerate() {
            if let Some(f) = ind.fitness {
                if best.is_none_or(|(_, b)| f < b) {
                    best = Some((i, f));
                }
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Alpha, beta, delta and the remaining omegas (ordered best to worst).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WolfHierarchy {
    pub alpha: usize,
    pub beta: usize,
    pub delta: usize,
    pub omegas: Vec<usize>,
}

impl WolfHierarchy {
    /// Build from a complete ranking, best first.
    pub fn from_ranking(ranking: &[usize]) -> Result<Self> {
        if ranking.len() < 4 {
            return Err(Error::usage(format!(
                "a wolf pack needs at least 4 members, got {}",
                ranking.len()
            )));
        }
        Ok(Self {
            alpha: ranking[0],
            beta: ranking[1],
            delta: ranking[2],
            omegas: ranking[3..].to_vec(),
        })
    }

    pub fn leaders(&self) -> [usize; 3] {
        [self.alpha, self.beta, self.delta]
    }

    pub fn is_leader(&self, i: usize) -> bool {
        self.leaders().contains(&i)
    }
}

/// Indices sorted by ascending fitness, ties to the lower index.
pub fn rank_by_fitness(fitness: &[f64]) -> Result<Vec<usize>> {
    if let Some(i) = fitness.iter().position(|f| f.is_nan()) {
        return Err(Error::numeric(format!("fitness of individual {i}")));
    }
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
    Ok(order)
}

/// The three lowest-loss individuals become alpha, beta, delta.
pub fn update_hierarchy(pop: &Population) -> Result<WolfHierarchy> {
    if pop.len() < 4 {
        return Err(Error::usage(format!(
            "a wolf pack needs at least 4 members, got {}",
            pop.len()
        )));
    }
    WolfHierarchy::from_ranking(&rank_by_fitness(&pop.fitness_values()?)?)
}
