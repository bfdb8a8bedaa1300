use serde::{Deserialize, Serialize};

use super::config::Algorithm;
use super::run::RunResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub seed: u64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub test_ce: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

const HEADER: [&str; 5] = ["algorithm", "seed", "train_accuracy", "test_accuracy", "test_ce"];

fn order(label: &str) -> usize {
    Algorithm::ALL.iter().position(|a| a.label() == label).unwrap_or(Algorithm::ALL.len())
}

/// One row per result, ordered SGD, SL-PSO, GMW-SGD, GMW-SGD-MOO (input
/// order within an algorithm).
pub fn compare(results: &[RunResult]) -> Result<Comparison> {
    if results.is_empty() {
        return Err(Error::usage("compare needs at least one result"));
    }
    let mut rows: Vec<ComparisonRow> = results
        .iter()
        .map(|r| ComparisonRow {
            algorithm: r.algorithm.label().to_string(),
            seed: r.seed,
            train_accuracy: r.metrics.train_accuracy,
            test_accuracy: r.metrics.test_accuracy,
            test_ce: r.metrics.test_ce,
        })
        .collect();
    rows.sort_by_key(|r| order(&r.algorithm));
    Ok(Comparison { rows })
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut out = HEADER.join(",") + "\n";
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.algorithm, r.seed, r.train_accuracy, r.test_accuracy, r.test_ce
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(HEADER.join(",").as_str()) {
            return Err(Error::usage("comparison CSV header mismatch"));
        }
        let bad = |line: &str| Error::usage(format!("bad comparison row '{line}'"));
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(|line| {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 5 {
                    return Err(bad(line));
                }
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
                Ok(ComparisonRow {
                    algorithm: f[0].to_string(),
                    seed: f[1].parse().map_err(|_| bad(line))?,
                    train_accuracy: num(f[2])?,
                    test_accuracy: num(f[3])?,
                    test_ce: num(f[4])?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    /// Percentages for accuracies, four decimals for CE.
    pub fn to_text(&self) -> String {
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.algorithm.clone(),
                    r.seed.to_string(),
                    format!("{:.2}", 100.0 * r.train_accuracy),
                    format!("{:.2}", 100.0 * r.test_accuracy),
                    format!("{:.4}", r.test_ce),
                ]
            })
            .collect();
        let titles = ["Algorithm", "Seed", "Train Acc (%)", "Test Acc (%)", "Test CE"];
        let mut width: Vec<usize> = titles.iter().map(|t| t.len()).collect();
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |items: Vec<&str>| {
            let mut s = format!("{:<w$}", items[0], w = width[0]);
            for (k, item) in items.iter().enumerate().skip(1) {
                s.push_str(&format!("  {:>w$}", item, w = width[k]));
            }
            s.push('\n');
            s
        };
        let mut out = line(titles.to_vec());
        out.push_str(&line(width.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
        for row in &cells {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
        }
        out
    }
}

/// Mean, min and max of one metric across repeats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.collect();
        Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v.iter().cloned().fold(f64::INFINITY, f64::min),
            max: v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    pub train_accuracy: Spread,
    pub test_accuracy: Spread,
    pub test_ce: Spread,
}

pub fn aggregate(results: &[RunResult]) -> Result<Aggregate> {
    let first = results.first().ok_or_else(|| Error::usage("aggregate needs at least one result"))?;
    if results.iter().any(|r| r.algorithm != first.algorithm) {
        return Err(Error::usage("aggregate expects repeats of one algorithm"));
    }
    Ok(Aggregate {
        algorithm: first.algorithm,
        seeds: results.iter().map(|r| r.seed).collect(),
        train_accuracy: Spread::of(results.iter().map(|r| r.metrics.train_accuracy)),
        test_accuracy: Spread::of(results.iter().map(|r| r.metrics.test_accuracy)),
        test_ce: Spread::of(results.iter().map(|r| r.metrics.test_ce)),
    })
}
