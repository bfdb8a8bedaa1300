mod common;

use common::{finite_difference_grad, naive_forward, random_small_net, relative_error};
use gmw_core::nn::{
    accuracy, ce_loss, l2_regularizer, param_count, Batch, Layer, Logits, Network, NetworkSpec, ParamVector,
};
use gmw_core::rng::RngStream;
use proptest::prelude::*;

#[test]
fn default_cnn_count_matches_independent_sum() {
    // conv1 3->10 3x3, conv2 10->16 3x3, dense 576->97, dense 97->10
    let by_hand = (10 * 3 * 3 * 3 + 10) + (16 * 10 * 3 * 3 + 16) + (576 * 97 + 97) + (97 * 10 + 10);
    let spec = NetworkSpec::default_cnn();
    assert_eq!(by_hand, 58_685);
    assert_eq!(param_count(&spec).unwrap(), by_hand);
    let per_layer: usize = spec.layers.iter().map(Layer::param_count).sum();
    assert_eq!(per_layer, by_hand);
    let net = Network::zeros(spec).unwrap();
    assert_eq!(net.flatten().len(), by_hand);
}

#[test]
fn zero_params_give_uniform_softmax() {
    let spec = NetworkSpec::mlp(&[5, 7, 4]);
    let mut net = Network::random_uniform(spec, -1.0, 1.0, &mut RngStream::new(1)).unwrap();
    net.load(&vec![0.0; net.param_count()]).unwrap();
    let x = [0.3, -1.0, 2.0, 0.0, 5.0];
    let labels = [2];
    let logits = net.forward(&Batch::new(&x, &labels, [5, 1, 1]).unwrap()).unwrap();
    let loss = ce_loss(&logits, &labels).unwrap();
    assert!((loss - 4f64.ln()).abs() < 1e-15);
}

#[test]
fn forward_matches_naive_convolution() {
    let mut rng = RngStream::new(2024);
    for _ in 0..20 {
        let (net, x, labels, shape) = random_small_net(&mut rng, 500);
        let logits = net.forward(&Batch::new(&x, &labels, shape).unwrap()).unwrap();
        let len: usize = shape.iter().product();
        for (s, chunk) in x.chunks(len).enumerate() {
            let expect = naive_forward(&net, chunk);
            for (a, b) in logits.row(s).iter().zip(&expect) {
                assert!(
                    (a - b).abs() <= 1e-10 * b.abs().max(1.0),
                    "forward {a} vs naive {b}"
                );
            }
        }
    }
}

#[test]
fn forward_matches_naive_on_padded_strided_default_cnn() {
    let mut rng = RngStream::new(5);
    let spec = NetworkSpec::default_cnn();
    let net = Network::random_uniform(spec, -0.1, 0.1, &mut rng).unwrap();
    let x: Vec<f64> = (0..3 * 32 * 32).map(|_| rng.uniform(-0.5, 0.5)).collect();
    let labels = [0];
    let logits = net.forward(&Batch::new(&x, &labels, [3, 32, 32]).unwrap()).unwrap();
    let expect = naive_forward(&net, &x);
    for (a, b) in logits.row(0).iter().zip(&expect) {
        assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
    }
}

#[test]
fn backward_matches_finite_differences() {
    let mut rng = RngStream::new(77);
    for _ in 0..5 {
        let (net, x, labels, shape) = random_small_net(&mut rng, 500);
        let batch = Batch::new(&x, &labels, shape).unwrap();
        let (loss, grads) = net.backward(&batch).unwrap();
        assert_eq!(loss, ce_loss(&net.forward(&batch).unwrap(), &labels).unwrap());
        let fd = finite_difference_grad(&net, &batch, 1e-4);
        let worst = grads
            .flatten()
            .iter()
            .zip(&fd)
            .map(|(a, b)| relative_error(*a, *b))
            .fold(0.0, f64::max);
        assert!(worst <= 1e-4, "max relative error {worst}");
    }
}

#[test]
fn last_layer_bias_gradient_closed_form() {
    let mut rng = RngStream::new(9);
    let spec = NetworkSpec::mlp(&[4, 6, 3]);
    let net = Network::random_uniform(spec, -0.5, 0.5, &mut rng).unwrap();
    let x: Vec<f64> = (0..5 * 4).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let labels = [0, 2, 1, 1, 0];
    let batch = Batch::new(&x, &labels, [4, 1, 1]).unwrap();
    let logits = net.forward(&batch).unwrap();
    let mut expect = [0.0; 3];
    for (i, &l) in labels.iter().enumerate() {
        let row = logits.row(i);
        let z: f64 = row.iter().map(|v| v.exp()).sum();
        for c in 0..3 {
            expect[c] += (row[c].exp() / z - if c == l { 1.0 } else { 0.0 }) / 5.0;
        }
    }
    let (_, grads) = net.backward(&batch).unwrap();
    for (g, e) in grads.biases[1].iter().zip(&expect) {
        assert!((g - e).abs() < 1e-14);
    }
}

#[test]
fn ce_matches_unshifted_formula() {
    let mut rng = RngStream::new(11);
    for _ in 0..200 {
        let n = 1 + rng.next_u64() as usize % 8;
        let c = 2 + rng.next_u64() as usize % 9;
        let values: Vec<f64> = (0..n * c).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.next_u64() as usize % c).collect();
        let direct: f64 = labels
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let row = &values[i * c..(i + 1) * c];
                -(row[p].exp() / row.iter().map(|s| s.exp()).sum::<f64>()).ln()
            })
            .sum::<f64>()
            / n as f64;
        let got = ce_loss(&Logits::new(n, c, values).unwrap(), &labels).unwrap();
        assert!((got - direct).abs() <= 1e-12, "{got} vs {direct}");
    }
}

#[test]
fn random_logit_accuracy_near_chance() {
    let mut rng = RngStream::new(13);
    let n = 100_000;
    let values: Vec<f64> = (0..n * 10).map(|_| rng.normal()).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.next_u64() as usize % 10).collect();
    let acc = accuracy(&Logits::new(n, 10, values).unwrap(), &labels).unwrap();
    // binomial sd = sqrt(0.09 / 1e5) ~ 9.5e-4; 5 sd
    assert!((acc - 0.1).abs() < 5e-3, "accuracy {acc}");
}

/// Sum of squares with error-free transformations (TwoProduct via FMA,
/// TwoSum), i.e. roughly double-double accuracy.
fn l2_compensated(p: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &v in p {
        let prod = v * v;
        let prod_err = v.mul_add(v, -prod);
        let t = s + prod;
        let bp = t - s;
        let sum_err = (s - (t - bp)) + (prod - bp);
        s = t;
        c += sum_err + prod_err;
    }
    s + c
}

#[test]
fn l2_matches_compensated_sum() {
    let mut rng = RngStream::new(17);
    for _ in 0..20 {
        let p: Vec<f64> = (0..10_000).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let exact = l2_compensated(&p);
        assert!((l2_regularizer(&p) - exact).abs() <= 1e-10 * exact);
    }
}

#[test]
fn forward_is_pure() {
    let mut rng = RngStream::new(19);
    let (net, x, labels, shape) = random_small_net(&mut rng, 500);
    let before = net.clone();
    let batch = Batch::new(&x, &labels, shape).unwrap();
    let a = net.forward(&batch).unwrap();
    let b = net.forward(&batch).unwrap();
    assert_eq!(a, b);
    assert_eq!(net, before);
}

fn arb_mlp() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..6, 2..5)
}

proptest! {
    #[test]
    fn load_flatten_roundtrip(widths in arb_mlp(), seed in any::<u64>()) {
        let spec = NetworkSpec::mlp(&widths);
        let mut rng = RngStream::new(seed);
        let net = Network::random_uniform(spec.clone(), -3.0, 3.0, &mut rng).unwrap();
        let back = Network::from_params(spec.clone(), &net.flatten()).unwrap();
        prop_assert_eq!(&back, &net);

        let p: ParamVector = (0..net.param_count()).map(|_| rng.uniform(-1.0, 1.0)).collect::<Vec<_>>().into();
        let mut other = net.clone();
        other.load(&p).unwrap();
        prop_assert_eq!(other.flatten(), p);
    }

    #[test]
    fn param_count_is_additive(widths in arb_mlp()) {
        let spec = NetworkSpec::mlp(&widths);
        let expect: usize = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        prop_assert_eq!(spec.param_count().unwrap(), expect);
    }

    #[test]
    fn ce_is_nonnegative(values in prop::collection::vec(-50.0f64..50.0, 6), label in 0usize..3) {
        let logits = Logits::new(2, 3, values).unwrap();
        prop_assert!(ce_loss(&logits, &[label, 2 - label]).unwrap() >= 0.0);
    }
}
