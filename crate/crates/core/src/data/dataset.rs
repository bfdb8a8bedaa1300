use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::Batch;
use crate::rng::RngStream;

/// Immutable labelled samples stored row-major, `sample_shape` per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub inputs: Vec<f64>,
    pub labels: Vec<usize>,
    pub sample_shape: [usize; 3],
    pub class_count: usize,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<f64>,
        labels: Vec<usize>,
        sample_shape: [usize; 3],
        class_count: usize,
    ) -> Result<Self> {
        let sample_len: usize = sample_shape.iter().product();
        if inputs.len() != labels.len() * sample_len {
            return Err(Error::dimension("dataset inputs", labels.len() * sample_len, inputs.len()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::usage(format!("label {bad} outside 0..{class_count}")));
        }
        Ok(Self {
            name: name.into(),
            inputs,
            labels,
            sample_shape,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample_len(&self) -> usize {
        self.sample_shape.iter().product()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let len = self.sample_len();
        &self.inputs[i * len..(i + 1) * len]
    }

    /// The whole dataset as one borrowed batch.
    pub fn as_batch(&self) -> Batch<'_> {
        Batch {
            inputs: &self.inputs,
            labels: &self.labels,
            sample_shape: self.sample_shape,
        }
    }

    /// Copy of the listed samples, in the listed order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let len = self.sample_len();
        let mut inputs = Vec::with_capacity(indices.len() * len);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            inputs.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            name: self.name.clone(),
            inputs,
            labels,
            sample_shape: self.sample_shape,
            class_count: self.class_count,
        }
    }

    /// Keep only the given classes, relabelled `0..classes.len()` in the
    /// order given.
    pub fn select_classes(&self, classes: &[usize]) -> Result<Dataset> {
        if classes.is_empty() {
            return Err(Error::usage("class subset is empty"));
        }
        let mut remap = BTreeMap::new();
        for (new, &old) in classes.iter().enumerate() {
            if old >= self.class_count {
                return Err(Error::usage(format!("class {old} outside 0..{}", self.class_count)));
            }
            if remap.insert(old, new).is_some() {
                return Err(Error::usage(format!("class {old} listed twice")));
            }
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| remap.contains_key(&self.labels[i])).collect();
        let mut out = self.subset(&keep);
        out.labels.iter_mut().for_each(|l| *l = remap[l]);
        out.class_count = classes.len();
        Ok(out)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// `label,x0,x1,...` with one row per sample.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let header: Vec<String> = std::iter::once("label".to_string())
            .chain((0..self.sample_len()).map(|j| format!("x{j}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.len() {
            write!(out, "{}", self.labels[i])?;
            for v in self.sample(i) {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Seed-deterministic stratified partition. Per-class shares are rounded
/// by largest remainder so the first part has exactly
/// `round(fraction * n)` samples. Both parts keep the original order.
pub fn split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::usage(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let n = dataset.len();
    let target = (fraction * n as f64).round() as usize;
    if target == 0 || target == n {
        return Err(Error::usage(format!(
            "split fraction {fraction} of {n} samples leaves one side empty"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.class_count];
    for (i, &l) in dataset.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let exact: Vec<f64> = by_class.iter().map(|c| fraction * c.len() as f64).collect();
    let mut take: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..by_class.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - take[a] as f64;
        let rb = exact[b] - take[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = target - take.iter().sum::<usize>();
    for &c in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        if take[c] < by_class[c].len() {
            take[c] += 1;
            missing -= 1;
        }
    }
    let mut rng = RngStream::new(seed);
    let mut first = Vec::with_capacity(target);
    for (members, &k) in by_class.iter_mut().zip(&take) {
        rng.shuffle(members);
        first.extend_from_slice(&members[..k]);
    }
    first.sort_unstable();
    let mut in_first = vec![false; n];
    first.iter().for_each(|&i| in_first[i] = true);
    let second: Vec<usize> = (0..n).filter(|&i| !in_first[i]).collect();
    Ok((dataset.subset(&first), dataset.subset(&second)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPlan {
    pub batch_size: usize,
    pub shuffle: bool,
    pub seed: u64,
}

/// Sample order for one epoch: natural order, or a permutation fixed by
/// `(seed, epoch)`.
pub fn epoch_order(n: usize, plan: &BatchPlan, epoch: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if plan.shuffle {
        RngStream::with_stream(plan.seed, epoch).shuffle(&mut order);
    }
    order
}

/// A gathered minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct OwnedBatch {
    pub indices: Vec<usize>,
    pub inputs: Vec<f64>,
    pub labels: Vec<usize>,
    pub sample_shape: [usize; 3],
}

impl OwnedBatch {
    pub fn view(&self) -> Batch<'_> {
        Batch {
            inputs: &self.inputs,
            labels: &self.labels,
            sample_shape: self.sample_shape,
        }
    }
}

/// `ceil(n / batch_size)` batches covering every sample once; the last
/// may be short.
pub fn batches(dataset: &Dataset, plan: &BatchPlan, epoch: u64) -> Result<Vec<OwnedBatch>> {
    if plan.batch_size == 0 {
        return Err(Error::usage("batch size must be at least 1"));
    }
    let order = epoch_order(dataset.len(), plan, epoch);
    Ok(order
        .chunks(plan.batch_size)
        .map(|idx| {
            let sub = dataset.subset(idx);
            OwnedBatch {
                indices: idx.to_vec(),
                inputs: sub.inputs,
                labels: sub.labels,
                sample_shape: dataset.sample_shape,
            }
        })
        .collect())
}
