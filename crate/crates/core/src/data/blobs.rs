use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Isotropic Gaussian clusters. Centres are drawn from `U[-1, 1]^dims`;
/// sample `i` has label `i % classes` (balanced to within one) and
/// coordinates `centre + spread * N(0, 1)`.
pub fn make_blobs(n: usize, classes: usize, dims: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if classes == 0 || dims == 0 {
        return Err(Error::usage("blobs need at least one class and one dimension"));
    }
    if n < classes {
        return Err(Error::usage(format!("{n} samples cannot cover {classes} classes")));
    }
    let mut rng = RngStream::new(seed);
    let centres: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dims).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect();
    let mut inputs = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        labels.push(c);
        inputs.extend(centres[c].iter().map(|&m| m + spread * rng.normal()));
    }
    Dataset::new(format!("blobs-{classes}x{dims}"), inputs, labels, [dims, 1, 1], classes)
}

/// Centres used by [`make_blobs`] for a given seed (for inspection and tests).
pub fn blob_centres(classes: usize, dims: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = RngStream::new(seed);
    (0..classes)
        .map(|_| (0..dims).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect()
}
