use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metaheuristics::WolfHierarchy;

/// Minimization pair: `f1 = -accuracy`, `f2 = sum of squared parameters`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub f1: f64,
    pub f2: f64,
}

impl ObjectiveVector {
    pub fn new(f1: f64, f2: f64) -> Self {
        Self { f1, f2 }
    }

    pub fn from_metrics(accuracy: f64, regularizer: f64) -> Self {
        Self {
            f1: -accuracy,
            f2: regularizer,
        }
    }

    pub fn accuracy(&self) -> f64 {
        -self.f1
    }

    pub fn regularizer(&self) -> f64 {
        self.f2
    }

    fn get(&self, m: usize) -> f64 {
        if m == 0 {
            self.f1
        } else {
            self.f2
        }
    }
}

pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2)
}

/// Partition into non-dominated fronts, best first. Each front lists point
/// indices in ascending order.
pub fn fast_nondominated_sort(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if dominates(&points[p], &points[q]) {
                dominated_by[p].push(q);
                counts[q] += 1;
            } else if dominates(&points[q], &points[p]) {
                dominated_by[q].push(p);
                counts[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each point of a front, in input order. Boundary
/// points per objective are infinite; zero-range objectives add nothing.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut dist = vec![0.0; n];
    for m in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a].get(m).total_cmp(&front[b].get(m)));
        let lo = front[order[0]].get(m);
        let hi = front[order[n - 1]].get(m);
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let gap = front[order[k + 1]].get(m) - front[order[k - 1]].get(m);
            dist[order[k]] += gap / range;
        }
    }
    dist
}

/// Front rank and in-front crowding distance for every point.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
    pub fronts: Vec<Vec<usize>>,
}

impl Ranking {
    pub fn new(points: &[ObjectiveVector]) -> Self {
        let fronts = fast_nondominated_sort(points);
        let mut rank = vec![0; points.len()];
        let mut crowding = vec![0.0; points.len()];
        for (r, front) in fronts.iter().enumerate() {
            let objs: Vec<ObjectiveVector> = front.iter().map(|&i| points[i]).collect();
            for (&i, d) in front.iter().zip(crowding_distance(&objs)) {
                rank[i] = r;
                crowding[i] = d;
            }
        }
        Self { rank, crowding, fronts }
    }

    /// All indices by (rank ascending, crowding descending, index ascending).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.rank.len()).collect();
        idx.sort_by(|&a, &b| {
            self.rank[a]
                .cmp(&self.rank[b])
                .then(self.crowding[b].total_cmp(&self.crowding[a]))
                .then(a.cmp(&b))
        });
        idx
    }
}

/// Keep `np` of the points: whole fronts by rank, the last admitted front
/// split by crowding (ties to lower index). Returns ascending indices.
pub fn select_survivors(points: &[ObjectiveVector], np: usize) -> Result<Vec<usize>> {
    if points.len() < np {
        return Err(Error::usage(format!(
            "cannot select {np} survivors from {} candidates",
            points.len()
        )));
    }
    let mut keep = Ranking::new(points).order();
    keep.truncate(np);
    keep.sort_unstable();
    Ok(keep)
}

/// Leaders are the top three by the survivor key; omegas follow in that order.
pub fn moo_leaders(ranking: &Ranking) -> Result<WolfHierarchy> {
    WolfHierarchy::from_ranking(&ranking.order())
}
