//! Independent oracles shared by the integration and acceptance suites.
//! None of these call into the code paths they are used to check.
#![allow(dead_code)]

use gmw_core::nn::{ce_loss, Batch, Layer, Network, NetworkSpec};
use gmw_core::rng::RngStream;

/// Central finite-difference gradient of the mean CE with respect to every
/// parameter, using only `forward` + `ce_loss`.
pub fn finite_difference_grad(net: &Network, batch: &Batch<'_>, h: f64) -> Vec<f64> {
    let base = net.flatten();
    let mut probe = net.clone();
    let mut out = Vec::with_capacity(base.len());
    let loss_at = |probe: &mut Network, p: &[f64]| {
        probe.load(p).unwrap();
        ce_loss(&probe.forward(batch).unwrap(), batch.labels).unwrap()
    };
    let mut p = base.to_vec();
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let up = loss_at(&mut probe, &p);
        p[i] = orig - h;
        let down = loss_at(&mut probe, &p);
        p[i] = orig;
        out.push((up - down) / (2.0 * h));
    }
    out
}

/// Relative error with an absolute floor so that near-zero components are
/// compared on an absolute scale.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Minimum kink margin for gradient-check networks; well above the 1e-4
/// probe step times any weight or activation scale used here.
pub const KINK_MARGIN: f64 = 1e-3;

/// Random small network exercising every layer type, at most `max_params`
/// parameters, together with a batch of inputs.
pub fn random_small_net(rng: &mut RngStream, max_params: usize) -> (Network, Vec<f64>, Vec<usize>, [usize; 3]) {
    loop {
        let c = 1 + rng.next_u64() as usize % 2;
        let hw = 5 + rng.next_u64() as usize % 3;
        let oc = 1 + rng.next_u64() as usize % 3;
        let k = 2 + rng.next_u64() as usize % 2;
        let stride = 1 + rng.next_u64() as usize % 2;
        let padding = rng.next_u64() as usize % 2;
        let conv_out = (hw + 2 * padding - k) / stride + 1;
        if conv_out < 2 {
            continue;
        }
        let pooled = conv_out - 1;
        let flat = oc * pooled * pooled;
        let hidden = 3 + rng.next_u64() as usize % 4;
        let classes = 2 + rng.next_u64() as usize % 3;
        let spec = NetworkSpec::new(
            [c, hw, hw],
            vec![
                Layer::Conv2d {
                    in_channels: c,
                    out_channels: oc,
                    kernel_h: k,
                    kernel_w: k,
                    stride,
                    padding,
                },
                Layer::Relu,
                Layer::MaxPool { k: 2, stride: Some(1) },
                Layer::Flatten,
                Layer::dense(flat, hidden),
                Layer::Relu,
                Layer::dense(hidden, classes),
            ],
        );
        let Ok(count) = spec.param_count() else { continue };
        if count > max_params {
            continue;
        }
        let net = Network::random_uniform(spec, -0.5, 0.5, rng).unwrap();
        let n = 3;
        let x: Vec<f64> = (0..n * c * hw * hw).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.next_u64() as usize % classes).collect();
        if kink_margin(&net, &x, c * hw * hw) < KINK_MARGIN {
            continue;
        }
        return (net, x, labels, [c, hw, hw]);
    }
}

/// Direct nested-loop evaluation of a network for one sample, written
/// against the layer definitions rather than the library kernels.
pub fn naive_forward(net: &Network, x: &[f64]) -> Vec<f64> {
    let mut margin = f64::INFINITY;
    naive_forward_traced(net, x, &mut margin)
}

/// Smallest distance of any ReLU input from zero, or of any pooling
/// window's runner-up from its maximum, over the given samples. Central
/// differences only track the derivative when a probe step cannot cross
/// one of these kinks.
pub fn kink_margin(net: &Network, inputs: &[f64], sample_len: usize) -> f64 {
    let mut margin = f64::INFINITY;
    for x in inputs.chunks(sample_len) {
        naive_forward_traced(net, x, &mut margin);
    }
    margin
}

fn naive_forward_traced(net: &Network, x: &[f64], margin: &mut f64) -> Vec<f64> {
    let spec = net.spec();
    let [mut c, mut h, mut w] = spec.input_shape;
    let mut act = x.to_vec();
    let mut t = 0;
    for layer in &spec.layers {
        match *layer {
            Layer::Conv2d {
                in_channels,
                out_channels,
                kernel_h,
                kernel_w,
                stride,
                padding,
            } => {
                assert_eq!(in_channels, c);
                let oh = (h + 2 * padding - kernel_h) / stride + 1;
                let ow = (w + 2 * padding - kernel_w) / stride + 1;
                let wt = &net.weights[t];
                let b = &net.biases[t];
                let mut out = vec![0.0; out_channels * oh * ow];
                for o in 0..out_channels {
                    for y in 0..oh {
                        for xx in 0..ow {
                            let mut s = b[o];
                            for ci in 0..c {
                                for ky in 0..kernel_h {
                                    for kx in 0..kernel_w {
                                        let iy = (y * stride + ky) as i64 - padding as i64;
                                        let ix = (xx * stride + kx) as i64 - padding as i64;
                                        if iy < 0 || ix < 0 || iy >= h as i64 || ix >= w as i64 {
                                            continue;
                                        }
                                        let widx = ((o * c + ci) * kernel_h + ky) * kernel_w + kx;
                                        let aidx = (ci * h + iy as usize) * w + ix as usize;
                                        s += wt[widx] * act[aidx];
                                    }
                                }
                            }
                            out[(o * oh + y) * ow + xx] = s;
                        }
                    }
                }
                act = out;
                c = out_channels;
                h = oh;
                w = ow;
                t += 1;
            }
            Layer::Relu => act.iter_mut().for_each(|v| {
                *margin = margin.min(v.abs());
                *v = v.max(0.0)
            }),
            Layer::MaxPool { k, stride } => {
                let s = stride.unwrap_or(k);
                let oh = (h - k) / s + 1;
                let ow = (w - k) / s + 1;
                let mut out = vec![f64::NEG_INFINITY; c * oh * ow];
                for ci in 0..c {
                    for y in 0..oh {
                        for xx in 0..ow {
                            let mut window: Vec<f64> = (0..k * k)
                                .map(|q| act[(ci * h + y * s + q / k) * w + xx * s + q % k])
                                .collect();
                            window.sort_by(|a, b| b.total_cmp(a));
                            *margin = margin.min(window[0] - window[1]);
                            out[(ci * oh + y) * ow + xx] = window[0];
                        }
                    }
                }
                act = out;
                h = oh;
                w = ow;
            }
            Layer::Flatten => {
                c = act.len();
                h = 1;
                w = 1;
            }
            Layer::Dense {
                in_features,
                out_features,
            } => {
                assert_eq!(act.len(), in_features);
                let wt = &net.weights[t];
                let b = &net.biases[t];
                act = (0..out_features)
                    .map(|o| b[o] + (0..in_features).map(|i| wt[o * in_features + i] * act[i]).sum::<f64>())
                    .collect();
                c = out_features;
                h = 1;
                w = 1;
                t += 1;
            }
        }
    }
    act
}

/// Non-dominated fronts by repeated peeling: each round removes every point
/// that no remaining point dominates. O(n^3) worst case.
pub fn peel_fronts(points: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let dom = |a: (f64, f64), b: (f64, f64)| a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1);
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dom(points[j], points[i])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Crowding distances for a set of indices, written directly from the
/// NSGA-II definition with a stable sort by (value, index).
pub fn crowding_oracle(points: &[(f64, f64)], members: &[usize]) -> Vec<f64> {
    let m = members.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    for obj in 0..2 {
        let val = |k: usize| if obj == 0 { points[members[k]].0 } else { points[members[k]].1 };
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| val(a).partial_cmp(&val(b)).unwrap().then(members[a].cmp(&members[b])));
        let (lo, hi) = (val(order[0]), val(order[m - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        if hi > lo {
            for k in 1..m - 1 {
                dist[order[k]] += (val(order[k + 1]) - val(order[k - 1])) / (hi - lo);
            }
        }
    }
    dist
}

/// Survivors by direct enumeration of the selection rule: sort every index
/// by (front rank, -crowding within its front, index), take the first `n`.
pub fn select_oracle(points: &[(f64, f64)], n: usize) -> Vec<usize> {
    let fronts = peel_fronts(points);
    let mut keyed: Vec<(usize, f64, usize)> = Vec::new();
    for (rank, front) in fronts.iter().enumerate() {
        let cd = crowding_oracle(points, front);
        for (k, &i) in front.iter().enumerate() {
            keyed.push((rank, cd[k], i));
        }
    }
    keyed.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.partial_cmp(&a.1).unwrap())
            .then(a.2.cmp(&b.2))
    });
    let mut chosen: Vec<usize> = keyed.into_iter().take(n).map(|k| k.2).collect();
    chosen.sort_unstable();
    chosen
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
