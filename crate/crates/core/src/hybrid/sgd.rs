use super::config::LrSchedule;
use crate::data::{batches, BatchPlan, Dataset};
use crate::error::{Error, Result};
use crate::nn::Network;
use crate::rng::RngStream;

/// Learning-rate state for reduce-on-plateau decay.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdState {
    pub lr: f64,
    pub plateau_counter: usize,
    pub best_loss_seen: f64,
}

impl SgdState {
    pub fn new(lr0: f64) -> Self {
        Self {
            lr: lr0,
            plateau_counter: 0,
            best_loss_seen: f64::INFINITY,
        }
    }
}

/// Strict improvement resets the plateau counter; reaching `patience`
/// multiplies the rate by `factor` (floored at `min`) and resets.
pub fn lr_step(state: &mut SgdState, current_loss: f64, schedule: &LrSchedule) {
    if current_loss < state.best_loss_seen {
        state.best_loss_seen = current_loss;
        state.plateau_counter = 0;
        return;
    }
    state.plateau_counter += 1;
    if state.plateau_counter >= schedule.patience {
        state.lr = (state.lr * schedule.factor).max(schedule.min);
        state.plateau_counter = 0;
    }
}

/// `params -= lr * grad` over every trainable tensor.
pub fn apply_gradients(net: &mut Network, grads: &crate::nn::Gradients, lr: f64) {
    for (w, g) in net.weights.iter_mut().zip(&grads.weights) {
        w.iter_mut().zip(g).for_each(|(p, d)| *p -= lr * d);
    }
    for (b, g) in net.biases.iter_mut().zip(&grads.biases) {
        b.iter_mut().zip(g).for_each(|(p, d)| *p -= lr * d);
    }
}

/// One shuffled pass of plain minibatch SGD. Returns the mean batch loss.
pub fn sgd_epoch(net: &mut Network, data: &Dataset, lr: f64, batch_size: usize, rng: &mut RngStream) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::usage("SGD on an empty dataset"));
    }
    if !(lr >= 0.0) {
        return Err(Error::usage(format!("learning rate must be >= 0, got {lr}")));
    }
    let plan = BatchPlan {
        batch_size,
        shuffle: true,
        seed: rng.next_u64(),
    };
    let all = batches(data, &plan, 0)?;
    let mut total = 0.0;
    for batch in &all {
        let (loss, grads) = net.backward(&batch.view())?;
        if !loss.is_finite() {
            return Err(Error::numeric("SGD minibatch loss"));
        }
        apply_gradients(net, &grads, lr);
        total += loss;
    }
    Ok(total / all.len() as f64)
}
