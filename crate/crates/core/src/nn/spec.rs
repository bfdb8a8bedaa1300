use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of one sample as it flows between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Image { channels: usize, height: usize, width: usize },
    Flat(usize),
}

impl Shape {
    pub fn numel(&self) -> usize {
        match *self {
            Shape::Image {
                channels,
                height,
                width,
            } => channels * height * width,
            Shape::Flat(n) => n,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Image {
                channels,
                height,
                width,
            } => write!(f, "{channels}x{height}x{width}"),
            Shape::Flat(n) => write!(f, "{n}"),
        }
    }
}

fn one() -> usize {
    1
}

/// One layer descriptor. Softmax is not a layer: it lives in the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    /// Fully connected. Accepts any input whose element count is `in`,
    /// read in row-major (channel, row, column) order.
    Dense {
        #[serde(rename = "in")]
        in_features: usize,
        #[serde(rename = "out")]
        out_features: usize,
    },
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel_h: usize,
        kernel_w: usize,
        #[serde(default = "one")]
        stride: usize,
        #[serde(default)]
        padding: usize,
    },
    Relu,
    MaxPool {
        k: usize,
        #[serde(default)]
        stride: Option<usize>,
    },
    Flatten,
}

impl Layer {
    pub fn dense(in_features: usize, out_features: usize) -> Self {
        Layer::Dense {
            in_features,
            out_features,
        }
    }

    pub fn conv2d(in_channels: usize, out_channels: usize, kernel: usize) -> Self {
        Layer::Conv2d {
            in_channels,
            out_channels,
            kernel_h: kernel,
            kernel_w: kernel,
            stride: 1,
            padding: 0,
        }
    }

    pub fn max_pool(k: usize) -> Self {
        Layer::MaxPool { k, stride: None }
    }

    pub fn is_trainable(&self) -> bool {
        matches!(self, Layer::Dense { .. } | Layer::Conv2d { .. })
    }

    /// (weight count, bias count)
    pub fn param_split(&self) -> (usize, usize) {
        match *self {
            Layer::Dense {
                in_features,
                out_features,
            } => (in_features * out_features, out_features),
            Layer::Conv2d {
                in_channels,
                out_channels,
                kernel_h,
                kernel_w,
                ..
            } => (out_channels * in_channels * kernel_h * kernel_w, out_channels),
            _ => (0, 0),
        }
    }

    pub fn param_count(&self) -> usize {
        let (w, b) = self.param_split();
        w + b
    }

    /// Output shape for a given input shape, or a description of why the
    /// input is not acceptable.
    pub fn output_shape(&self, input: Shape) -> std::result::Result<Shape, String> {
        match *self {
            Layer::Dense {
                in_features,
                out_features,
            } => {
                if in_features == 0 || out_features == 0 {
                    return Err("dense layer with zero width".into());
                }
                if input.numel() != in_features {
                    return Err(format!(
                        "dense layer expects {in_features} inputs, receives {input}"
                    ));
                }
                Ok(Shape::Flat(out_features))
            }
            Layer::Conv2d {
                in_channels,
                out_channels,
                kernel_h,
                kernel_w,
                stride,
                padding,
            } => {
                let Shape::Image {
                    channels,
                    height,
                    width,
                } = input
                else {
                    return Err(format!("conv2d needs an image input, receives flat {input}"));
                };
                if channels != in_channels {
                    return Err(format!(
                        "conv2d expects {in_channels} channels, receives {channels}"
                    ));
                }
                if out_channels == 0 || kernel_h == 0 || kernel_w == 0 || stride == 0 {
                    return Err("conv2d with zero-sized kernel, channels or stride".into());
                }
                let ph = height + 2 * padding;
                let pw = width + 2 * padding;
                if ph < kernel_h || pw < kernel_w {
                    return Err(format!(
                        "kernel {kernel_h}x{kernel_w} larger than padded input {ph}x{pw}"
                    ));
                }
                Ok(Shape::Image {
                    channels: out_channels,
                    height: (ph - kernel_h) / stride + 1,
                    width: (pw - kernel_w) / stride + 1,
                })
            }
            Layer::Relu => Ok(input),
            Layer::MaxPool { k, stride } => {
                let stride = stride.unwrap_or(k);
                let Shape::Image {
                    channels,
                    height,
                    width,
                } = input
                else {
                    return Err(format!("max_pool needs an image input, receives flat {input}"));
                };
                if k == 0 || stride == 0 {
                    return Err("max_pool with zero window or stride".into());
                }
                if height < k || width < k {
                    return Err(format!("pool window {k} larger than input {height}x{width}"));
                }
                Ok(Shape::Image {
                    channels,
                    height: (height - k) / stride + 1,
                    width: (width - k) / stride + 1,
                })
            }
            Layer::Flatten => Ok(Shape::Flat(input.numel())),
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Layer::Dense {
                in_features,
                out_features,
            } => write!(f, "dense({in_features}->{out_features})"),
            Layer::Conv2d {
                in_channels,
                out_channels,
                kernel_h,
                kernel_w,
                stride,
                padding,
            } => write!(
                f,
                "conv2d({in_channels}->{out_channels}, {kernel_h}x{kernel_w}, stride {stride}, pad {padding})"
            ),
            Layer::Relu => write!(f, "relu"),
            Layer::MaxPool { k, stride } => write!(f, "max_pool({k}, stride {})", stride.unwrap_or(k)),
            Layer::Flatten => write!(f, "flatten"),
        }
    }
}

/// Declarative network description: an input shape and an ordered layer list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// (channels, height, width). Feature vectors use `(features, 1, 1)`.
    pub input_shape: [usize; 3],
    pub layers: Vec<Layer>,
}

impl NetworkSpec {
    pub fn new(input_shape: [usize; 3], layers: Vec<Layer>) -> Self {
        Self {
            input_shape,
            layers,
        }
    }

    /// Multi-layer perceptron with ReLU between dense layers.
    /// `widths = [in, hidden.., classes]`.
    pub fn mlp(widths: &[usize]) -> Self {
        assert!(widths.len() >= 2, "an MLP needs at least input and output widths");
        let mut layers = Vec::new();
        for (i, pair) in widths.windows(2).enumerate() {
            if i > 0 {
                layers.push(Layer::Relu);
            }
            layers.push(Layer::dense(pair[0], pair[1]));
        }
        Self::new([widths[0], 1, 1], layers)
    }

    /// Default CIFAR-10 network: 58,685 parameters.
    ///
    /// ```text
    /// 3x32x32 -> conv 3x3 (10) -> relu -> pool 2 -> 10x15x15
    ///         -> conv 3x3 (16) -> relu -> pool 2 -> 16x6x6
    ///         -> flatten 576 -> dense 97 -> relu -> dense 10
    /// ```
    pub fn default_cnn() -> Self {
        Self::new(
            [3, 32, 32],
            vec![
                Layer::conv2d(3, 10, 3),
                Layer::Relu,
                Layer::max_pool(2),
                Layer::conv2d(10, 16, 3),
                Layer::Relu,
                Layer::max_pool(2),
                Layer::Flatten,
                Layer::dense(576, 97),
                Layer::Relu,
                Layer::dense(97, 10),
            ],
        )
    }

    pub fn input(&self) -> Shape {
        let [channels, height, width] = self.input_shape;
        Shape::Image {
            channels,
            height,
            width,
        }
    }

    pub fn input_len(&self) -> usize {
        self.input_shape.iter().product()
    }

    /// Shapes at every layer boundary: `shapes[0]` is the input,
    /// `shapes[i + 1]` the output of layer `i`.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        if self.input_len() == 0 {
            return Err(Error::Config("input shape has a zero dimension".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::Config("network has no layers".into()));
        }
        let mut shapes = Vec::with_capacity(self.layers.len() + 1);
        shapes.push(self.input());
        for (i, layer) in self.layers.iter().enumerate() {
            let current = *shapes.last().unwrap();
            match layer.output_shape(current) {
                Ok(next) => shapes.push(next),
                Err(detail) => {
                    let (from, from_desc) = if i == 0 {
                        (0, format!("input {current}"))
                    } else {
                        (i - 1, self.layers[i - 1].to_string())
                    };
                    return Err(Error::Shape {
                        from,
                        from_desc,
                        to: i,
                        to_desc: layer.to_string(),
                        detail,
                    });
                }
            }
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<()> {
        self.shapes()?;
        if !self.layers.iter().any(Layer::is_trainable) {
            return Err(Error::Config("network has no trainable layer".into()));
        }
        Ok(())
    }

    /// Number of output classes (element count of the final layer).
    pub fn classes(&self) -> Result<usize> {
        Ok(self.shapes()?.last().unwrap().numel())
    }

    /// Total trainable parameters, `Nw + Nb`.
    pub fn param_count(&self) -> Result<usize> {
        self.validate()?;
        Ok(self.layers.iter().map(Layer::param_count).sum())
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.param_split().0).sum()
    }

    pub fn bias_count(&self) -> usize {
        self.layers.iter().map(|l| l.param_split().1).sum()
    }

    pub(crate) fn trainable(&self) -> impl Iterator<Item = (usize, &Layer)> {
        self.layers.iter().enumerate().filter(|(_, l)| l.is_trainable())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mlp_count() {
        assert_eq!(NetworkSpec::mlp(&[4, 3, 2]).param_count().unwrap(), 23);
    }

    #[test]
    fn conv_count() {
        let spec = NetworkSpec::new([3, 8, 8], vec![Layer::conv2d(3, 8, 3)]);
        assert_eq!(spec.param_count().unwrap(), 224);
    }

    #[test]
    fn default_cnn_shapes() {
        let spec = NetworkSpec::default_cnn();
        let shapes = spec.shapes().unwrap();
        assert_eq!(
            shapes[3],
            Shape::Image {
                channels: 10,
                height: 15,
                width: 15
            }
        );
        assert_eq!(shapes[7], Shape::Flat(576));
        assert_eq!(spec.classes().unwrap(), 10);
    }

    #[test]
    fn shape_error_names_layer_pair() {
        let spec = NetworkSpec::new(
            [1, 4, 4],
            vec![Layer::conv2d(1, 2, 3), Layer::Relu, Layer::dense(10, 2)],
        );
        match spec.param_count() {
            Err(Error::Shape { from, to, .. }) => assert_eq!((from, to), (1, 2)),
            other => panic!("expected shape error, got {other:?}"),
        }
    }

    #[test]
    fn conv_on_flat_rejected() {
        let spec = NetworkSpec::new(
            [1, 4, 4],
            vec![Layer::Flatten, Layer::conv2d(1, 2, 3)],
        );
        assert!(matches!(spec.validate(), Err(Error::Shape { .. })));
    }

    #[test]
    fn no_trainable_layers() {
        let spec = NetworkSpec::new([1, 4, 4], vec![Layer::Relu]);
        assert!(spec.param_count().is_err());
    }

    #[test]
    fn serde_roundtrip_toml() {
        let spec = NetworkSpec::default_cnn();
        let text = toml::to_string(&spec).unwrap();
        let back: NetworkSpec = toml::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
