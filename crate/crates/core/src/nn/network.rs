use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use super::kernels::{self, ConvGeom, PoolGeom};
use super::loss::{ce_loss_and_grad, Logits};
use super::spec::{Layer, NetworkSpec, Shape};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Flat parameter vector: every weight tensor in layer order (row-major),
/// followed by every bias vector in layer order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Index of the first non-finite entry.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|v| !v.is_finite())
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// A borrowed minibatch: `labels.len()` samples of `sample_shape` each.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub inputs: &'a [f64],
    pub labels: &'a [usize],
    pub sample_shape: [usize; 3],
}

impl<'a> Batch<'a> {
    pub fn new(inputs: &'a [f64], labels: &'a [usize], sample_shape: [usize; 3]) -> Result<Self> {
        let sample_len: usize = sample_shape.iter().product();
        if inputs.len() != labels.len() * sample_len {
            return Err(Error::dimension(
                "batch inputs",
                labels.len() * sample_len,
                inputs.len(),
            ));
        }
        Ok(Self {
            inputs,
            labels,
            sample_shape,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Parameter-shaped gradient: one tensor per trainable tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    /// Same layout as [`Network::flatten`].
    pub fn flatten(&self) -> ParamVector {
        flatten_parts(&self.weights, &self.biases)
    }
}

fn flatten_parts(weights: &[Vec<f64>], biases: &[Vec<f64>]) -> ParamVector {
    let len = weights.iter().chain(biases).map(Vec::len).sum();
    let mut out = Vec::with_capacity(len);
    for w in weights {
        out.extend_from_slice(w);
    }
    for b in biases {
        out.extend_from_slice(b);
    }
    ParamVector(out)
}

/// A network spec with materialized parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    shapes: Vec<Shape>,
    /// One entry per trainable layer, in layer order.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

enum Cache {
    Input(Vec<f64>),
    Pool(Vec<usize>),
    None,
}

impl Network {
    pub fn zeros(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let shapes = spec.shapes()?;
        let (weights, biases) = spec
            .trainable()
            .map(|(_, l)| {
                let (w, b) = l.param_split();
                (vec![0.0; w], vec![0.0; b])
            })
            .unzip();
        Ok(Self {
            spec,
            shapes,
            weights,
            biases,
        })
    }

    /// Every parameter drawn independently from `U[low, high]`.
    pub fn random_uniform(spec: NetworkSpec, low: f64, high: f64, rng: &mut RngStream) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        let p: Vec<f64> = (0..net.param_count()).map(|_| rng.uniform(low, high)).collect();
        net.load(&ParamVector(p))?;
        Ok(net)
    }

    pub fn from_params(spec: NetworkSpec, params: &ParamVector) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        net.load(params)?;
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn classes(&self) -> usize {
        self.shapes.last().unwrap().numel()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    pub fn flatten(&self) -> ParamVector {
        flatten_parts(&self.weights, &self.biases)
    }

    /// Overwrite all parameters from `params` (inverse of [`flatten`](Self::flatten)).
    pub fn load(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::dimension("parameter vector", self.param_count(), params.len()));
        }
        if let Some(i) = params.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("parameter vector entry {i}")));
        }
        let mut offset = 0;
        for w in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            let len = w.len();
            w.copy_from_slice(&params[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }

    /// Raw class scores for every sample in the batch.
    pub fn forward(&self, batch: &Batch<'_>) -> Result<Logits> {
        let (out, _) = self.run(batch, false)?;
        Logits::new(batch.len(), self.classes(), out)
    }

    /// Mean cross-entropy loss and its exact gradient.
    pub fn backward(&self, batch: &Batch<'_>) -> Result<(f64, Gradients)> {
        let (out, caches) = self.run(batch, true)?;
        let logits = Logits::new(batch.len(), self.classes(), out)?;
        let (loss, mut grad) = ce_loss_and_grad(&logits, batch.labels)?;
        let n = batch.len();

        let mut gw: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut gb: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut t = self.weights.len();

        for (i, layer) in self.spec.layers.iter().enumerate().rev() {
            let in_shape = self.shapes[i];
            grad = match (layer, &caches[i]) {
                (&Layer::Dense { in_features, out_features }, Cache::Input(x)) => {
                    t -= 1;
                    kernels::dense_backward(
                        x,
                        &self.weights[t],
                        &grad,
                        &mut gw[t],
                        &mut gb[t],
                        n,
                        in_features,
                        out_features,
                    )
                }
                (Layer::Conv2d { .. }, Cache::Input(x)) => {
                    t -= 1;
                    let g = conv_geom(layer, in_shape, self.shapes[i + 1]);
                    kernels::conv_backward(x, &self.weights[t], &grad, &mut gw[t], &mut gb[t], n, &g)
                }
                (Layer::Relu, Cache::Input(x)) => kernels::relu_backward(x, &grad),
                (Layer::MaxPool { .. }, Cache::Pool(arg)) => {
                    let g = pool_geom(layer, in_shape, self.shapes[i + 1]);
                    kernels::pool_backward(&grad, arg, n, &g)
                }
                (Layer::Flatten, _) => grad,
                _ => unreachable!("cache kind does not match layer"),
            };
        }
        Ok((
            loss,
            Gradients {
                weights: gw,
                biases: gb,
            },
        ))
    }

    fn run(&self, batch: &Batch<'_>, keep: bool) -> Result<(Vec<f64>, Vec<Cache>)> {
        if batch.sample_shape != self.spec.input_shape {
            return Err(Error::Dimension {
                context: format!(
                    "input sample shape {:?} vs network input {:?}",
                    batch.sample_shape, self.spec.input_shape
                ),
                expected: self.spec.input_len(),
                actual: batch.sample_shape.iter().product(),
            });
        }
        let n = batch.len();
        let mut caches = Vec::with_capacity(if keep { self.spec.layers.len() } else { 0 });
        let mut act: Vec<f64> = batch.inputs.to_vec();
        let mut t = 0;
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let (in_shape, out_shape) = (self.shapes[i], self.shapes[i + 1]);
            let (next, cache) = match *layer {
                Layer::Dense { in_features, out_features } => {
                    let y = kernels::dense_forward(
                        &act,
                        &self.weights[t],
                        &self.biases[t],
                        n,
                        in_features,
                        out_features,
                    );
                    t += 1;
                    (y, Cache::Input(act))
                }
                Layer::Conv2d { .. } => {
                    let g = conv_geom(layer, in_shape, out_shape);
                    let y = kernels::conv_forward(&act, &self.weights[t], &self.biases[t], n, &g);
                    t += 1;
                    (y, Cache::Input(act))
                }
                Layer::Relu => (kernels::relu_forward(&act), Cache::Input(act)),
                Layer::MaxPool { .. } => {
                    let g = pool_geom(layer, in_shape, out_shape);
                    let (y, arg) = kernels::pool_forward(&act, n, &g);
                    (y, Cache::Pool(arg))
                }
                Layer::Flatten => (act, Cache::None),
            };
            if keep {
                caches.push(cache);
            }
            act = next;
        }
        Ok((act, caches))
    }
}

fn image_dims(shape: Shape) -> (usize, usize, usize) {
    match shape {
        Shape::Image { channels, height, width } => (channels, height, width),
        Shape::Flat(_) => unreachable!("validated spec feeds images to spatial layers"),
    }
}

fn conv_geom(layer: &Layer, input: Shape, output: Shape) -> ConvGeom {
    let Layer::Conv2d { in_channels, out_channels, kernel_h, kernel_w, stride, padding } = *layer
    else {
        unreachable!()
    };
    let (_, in_h, in_w) = image_dims(input);
    let (_, out_h, out_w) = image_dims(output);
    ConvGeom {
        in_ch: in_channels,
        out_ch: out_channels,
        in_h,
        in_w,
        out_h,
        out_w,
        kh: kernel_h,
        kw: kernel_w,
        stride,
        pad: padding,
    }
}

fn pool_geom(layer: &Layer, input: Shape, output: Shape) -> PoolGeom {
    let Layer::MaxPool { k, stride } = *layer else { unreachable!() };
    let (ch, in_h, in_w) = image_dims(input);
    let (_, out_h, out_w) = image_dims(output);
    PoolGeom {
        ch,
        in_h,
        in_w,
        out_h,
        out_w,
        k,
        stride: stride.unwrap_or(k),
    }
}
