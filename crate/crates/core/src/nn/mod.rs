//! Minimal neural-network engine: forward pass, cross-entropy, exact
//! backpropagation, and the flat parameter encoding.

mod kernels;
mod loss;
mod network;
mod spec;

pub use loss::{accuracy, argmax, ce_loss, correct_count, l2_regularizer, softmax_row, Logits};
pub use network::{Batch, Gradients, Network, ParamVector};
pub use spec::{Layer, NetworkSpec, Shape};

/// `param_count` as a free function over a spec.
pub fn param_count(spec: &NetworkSpec) -> crate::Result<usize> {
    spec.param_count()
}

/// Mean CE and accuracy over a large sample set, evaluated in chunks to
/// bound activation memory.
pub fn evaluate_chunked(
    net: &Network,
    inputs: &[f64],
    labels: &[usize],
    sample_shape: [usize; 3],
    chunk: usize,
) -> crate::Result<(f64, f64)> {
    if labels.is_empty() {
        return Err(crate::Error::usage("empty batch"));
    }
    let sample_len: usize = sample_shape.iter().product();
    let chunk = chunk.max(1);
    let mut ce_sum = 0.0;
    let mut correct = 0;
    for (start, lab) in (0..labels.len()).step_by(chunk).zip(labels.chunks(chunk)) {
        let x = &inputs[start * sample_len..(start + lab.len()) * sample_len];
        let logits = net.forward(&Batch::new(x, lab, sample_shape)?)?;
        ce_sum += ce_loss(&logits, lab)? * lab.len() as f64;
        correct += correct_count(&logits, lab);
    }
    let n = labels.len() as f64;
    Ok((ce_sum / n, correct as f64 / n))
}
