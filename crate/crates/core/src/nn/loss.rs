use crate::error::{Error, Result};

/// Raw class scores, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Logits {
    pub rows: usize,
    pub classes: usize,
    pub values: Vec<f64>,
}

impl Logits {
    pub fn new(rows: usize, classes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * classes {
            return Err(Error::dimension("logits", rows * classes, values.len()));
        }
        Ok(Self {
            rows,
            classes,
            values,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.classes..(i + 1) * self.classes]
    }
}

fn check(logits: &Logits, labels: &[usize]) -> Result<()> {
    if logits.rows == 0 {
        return Err(Error::usage("empty batch"));
    }
    if labels.len() != logits.rows {
        return Err(Error::dimension("labels", logits.rows, labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= logits.classes) {
        return Err(Error::usage(format!(
            "label {bad} outside class range 0..{}",
            logits.classes
        )));
    }
    Ok(())
}

/// `ln(sum(exp(s)))` with max-shift.
fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|&s| (s - max).exp()).sum::<f64>().ln()
}

pub fn softmax_row(row: &[f64]) -> Vec<f64> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Mean categorical cross-entropy, `-ln softmax(s)_p`, over the batch.
pub fn ce_loss(logits: &Logits, labels: &[usize]) -> Result<f64> {
    check(logits, labels)?;
    if logits.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("logits"));
    }
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let row = logits.row(i);
            // clamp guards the -0.0 / tiny negative rounding case
            (log_sum_exp(row) - row[p]).max(0.0)
        })
        .sum();
    Ok(total / logits.rows as f64)
}

/// Loss plus its gradient with respect to the logits:
/// `(softmax - onehot) / batch`.
pub(crate) fn ce_loss_and_grad(logits: &Logits, labels: &[usize]) -> Result<(f64, Vec<f64>)> {
    let loss = ce_loss(logits, labels)?;
    let n = logits.rows as f64;
    let mut grad = Vec::with_capacity(logits.values.len());
    for (i, &p) in labels.iter().enumerate() {
        let probs = softmax_row(logits.row(i));
        grad.extend(
            probs
                .into_iter()
                .enumerate()
                .map(|(c, q)| (q - if c == p { 1.0 } else { 0.0 }) / n),
        );
    }
    Ok((loss, grad))
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub fn correct_count(logits: &Logits, labels: &[usize]) -> usize {
    labels
        .iter()
        .enumerate()
        .filter(|&(i, &l)| argmax(logits.row(i)) == l)
        .count()
}

pub fn accuracy(logits: &Logits, labels: &[usize]) -> Result<f64> {
    check(logits, labels)?;
    Ok(correct_count(logits, labels) as f64 / logits.rows as f64)
}

/// Gaussian regularizer: sum of squared parameters.
pub fn l2_regularizer(params: &[f64]) -> f64 {
    params.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_give_ln_c() {
        let logits = Logits::new(3, 10, vec![0.7; 30]).unwrap();
        let loss = ce_loss(&logits, &[0, 4, 9]).unwrap();
        assert!((loss - 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn confident_correct_is_near_zero() {
        let mut v = vec![0.0; 10];
        v[3] = 1000.0;
        let logits = Logits::new(1, 10, v).unwrap();
        assert!(ce_loss(&logits, &[3]).unwrap() < 1e-300);
    }

    #[test]
    fn empty_batch_is_usage_error() {
        let logits = Logits::new(0, 10, vec![]).unwrap();
        assert!(matches!(ce_loss(&logits, &[]), Err(Error::Usage(_))));
        assert!(matches!(accuracy(&logits, &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn label_out_of_range() {
        let logits = Logits::new(1, 2, vec![0.0, 1.0]).unwrap();
        assert!(ce_loss(&logits, &[2]).is_err());
    }

    #[test]
    fn accuracy_extremes() {
        let labels = [0, 1, 1, 0];
        let onehot: Vec<f64> = labels
            .iter()
            .flat_map(|&l| if l == 0 { [1.0, 0.0] } else { [0.0, 1.0] })
            .collect();
        let anti: Vec<f64> = onehot.iter().map(|v| 1.0 - v).collect();
        assert_eq!(accuracy(&Logits::new(4, 2, onehot).unwrap(), &labels).unwrap(), 1.0);
        assert_eq!(accuracy(&Logits::new(4, 2, anti).unwrap(), &labels).unwrap(), 0.0);
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn regularizer() {
        assert_eq!(l2_regularizer(&[0.0; 5]), 0.0);
        assert_eq!(l2_regularizer(&[3.0, 4.0]), 25.0);
    }
}
