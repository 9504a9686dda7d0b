//! From-scratch fully-connected network.
//!
//! Fixed five-layer shape (input, three hidden, output) with ReLU hidden
//! activations and raw logits at the output; softmax lives inside the loss
//! and prediction paths. The output head is either one softmax over all
//! classes or independent softmaxes over per-task segments whose
//! cross-entropies sum into one loss.
//!
//! The float type is generic over `f32`/`f64`: production trains in f32,
//! the gradient-check path runs the same code at f64. Losses accumulate in
//! f64 either way and softmax is log-sum-exp stabilized.

pub mod io;
mod train;

pub use train::{train, EpochMetrics, Optimizer, TrainConfig};

use ndarray::{Array1, Array2, ArrayView2, Axis, NdFloat, ShapeBuilder};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeling::{LabelScheme, LabelSpace};
use crate::seeds::{derive_seed, rng_from, Stream};

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    ReLU,
}

/// Output head layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// One softmax over all classes.
    Single { classes: usize },
    /// Independent softmax per task segment.
    Multi { segments: Vec<usize> },
}

impl Head {
    pub fn from_label_space(space: &LabelSpace) -> Head {
        match space.scheme() {
            LabelScheme::Single => Head::Single {
                classes: space.label_dim(),
            },
            LabelScheme::Multi => Head::Multi {
                segments: space.segments(),
            },
        }
    }

    /// Segment sizes; a single head is one segment.
    pub fn segments(&self) -> Vec<usize> {
        match self {
            Head::Single { classes } => vec![*classes],
            Head::Multi { segments } => segments.clone(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Head::Single { classes } => *classes,
            Head::Multi { segments } => segments.iter().sum(),
        }
    }

    pub fn scheme(&self) -> LabelScheme {
        match self {
            Head::Single { .. } => LabelScheme::Single,
            Head::Multi { .. } => LabelScheme::Multi,
        }
    }
}

/// One affine layer: `w` is (out, in).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<F> {
    pub w: Array2<F>,
    pub b: Array1<F>,
}

/// The five-layer network: four affine transforms around three hidden
/// activations.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<F> {
    pub layers: Vec<DenseLayer<F>>,
    pub activation: Activation,
    pub head: Head,
}

/// Parameter gradients, same shapes as the model layers.
#[derive(Debug, Clone)]
pub struct Gradients<F> {
    pub w: Vec<Array2<F>>,
    pub b: Vec<Array1<F>>,
}

/// Cached forward state: post-activation hidden outputs plus raw logits.
#[derive(Debug)]
pub struct ForwardPass<F> {
    /// `hidden[l]` is the activated output of hidden layer `l`.
    pub hidden: Vec<Array2<F>>,
    pub logits: Array2<F>,
}

impl<F: NdFloat> MlpModel<F> {
    /// He-uniform initialized model: weights uniform in ±sqrt(6/fan_in),
    /// zero biases, drawn in a fixed order from the seed.
    pub fn init(dims: [usize; 5], head: Head, seed: u64) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::config(format!("zero layer dimension in {dims:?}")));
        }
        if head.out_dim() != dims[4] {
            return Err(Error::config(format!(
                "head outputs {} classes but the final layer has {}",
                head.out_dim(),
                dims[4]
            )));
        }
        let mut rng = rng_from(derive_seed(seed, Stream::Init, 0, 0, 0));
        let layers = (0..4)
            .map(|l| {
                let (fan_in, fan_out) = (dims[l], dims[l + 1]);
                let limit = (6.0 / fan_in as f64).sqrt();
                let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                    F::from((rng.random::<f64>() * 2.0 - 1.0) * limit).unwrap()
                });
                DenseLayer {
                    w,
                    b: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(MlpModel {
            layers,
            activation: Activation::ReLU,
            head,
        })
    }

    /// The five layer dimensions [in, h1, h2, h3, out].
    pub fn layer_dims(&self) -> [usize; 5] {
        [
            self.layers[0].w.ncols(),
            self.layers[0].w.nrows(),
            self.layers[1].w.nrows(),
            self.layers[2].w.nrows(),
            self.layers[3].w.nrows(),
        ]
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[3].w.nrows()
    }

    fn check_input(&self, x: &ArrayView2<F>) -> Result<()> {
        if x.nrows() != self.input_dim() {
            return Err(Error::config(format!(
                "input has {} rows, model expects {}",
                x.nrows(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Forward pass keeping the per-layer activations for backprop.
    pub fn forward(&self, x: &ArrayView2<F>) -> Result<ForwardPass<F>> {
        self.check_input(x)?;
        let mut hidden: Vec<Array2<F>> = Vec::with_capacity(3);
        let mut current = x.view();
        let mut logits = None;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.w.dot(&current);
            z += &layer.b.view().insert_axis(Axis(1));
            if l < 3 {
                z.mapv_inplace(|v| if v > F::zero() { v } else { F::zero() });
                hidden.push(z);
                current = hidden[l].view();
            } else {
                logits = Some(z);
            }
        }
        Ok(ForwardPass {
            hidden,
            logits: logits.expect("four layers"),
        })
    }

    /// Raw output logits for a batch.
    pub fn logits(&self, x: &ArrayView2<F>) -> Result<Array2<F>> {
        Ok(self.forward(x)?.logits)
    }

    /// Per-segment softmax probabilities for a batch.
    pub fn probabilities(&self, x: &ArrayView2<F>) -> Result<Array2<F>> {
        let logits = self.logits(x)?;
        Ok(softmax_per_segment(&logits.view(), &self.head.segments()))
    }

    fn check_labels(&self, x: &ArrayView2<F>, y: &ArrayView2<F>) -> Result<()> {
        self.check_input(x)?;
        if y.nrows() != self.output_dim() {
            return Err(Error::config(format!(
                "labels have {} rows, head expects {} (scheme {})",
                y.nrows(),
                self.output_dim(),
                self.head.scheme().as_str()
            )));
        }
        if y.ncols() != x.ncols() {
            return Err(Error::config(format!(
                "{} label columns for {} sample columns",
                y.ncols(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Mean cross-entropy over the batch (summed across task segments).
    pub fn loss(&self, x: &ArrayView2<F>, y: &ArrayView2<F>) -> Result<f64> {
        self.check_labels(x, y)?;
        let logits = self.logits(x)?;
        Ok(cross_entropy(&logits.view(), y, &self.head.segments()))
    }

    /// Loss plus backpropagated gradients for every weight and bias.
    pub fn loss_and_grad(
        &self,
        x: &ArrayView2<F>,
        y: &ArrayView2<F>,
    ) -> Result<(f64, Gradients<F>)> {
        self.check_labels(x, y)?;
        let pass = self.forward(x)?;
        let segments = self.head.segments();
        let loss = cross_entropy(&pass.logits.view(), y, &segments);

        // dL/dlogits = (softmax - y) / batch, per segment.
        let batch = x.ncols();
        let inv_b = F::from(1.0 / batch as f64).unwrap();
        let mut delta = softmax_per_segment(&pass.logits.view(), &segments);
        delta -= y;
        delta *= inv_b;

        let mut gw: Vec<Array2<F>> = Vec::with_capacity(4);
        let mut gb: Vec<Array1<F>> = Vec::with_capacity(4);
        for l in (0..4).rev() {
            let upstream: ArrayView2<F> = if l == 0 {
                x.view()
            } else {
                pass.hidden[l - 1].view()
            };
            gw.push(delta.dot(&upstream.t()));
            gb.push(delta.sum_axis(Axis(1)));
            if l > 0 {
                let mut da = self.layers[l].w.t().dot(&delta);
                // ReLU mask from the activated output.
                da.zip_mut_with(&pass.hidden[l - 1], |d, &a| {
                    if a <= F::zero() {
                        *d = F::zero();
                    }
                });
                delta = da;
            }
        }
        gw.reverse();
        gb.reverse();
        Ok((loss, Gradients { w: gw, b: gb }))
    }

    /// Per-task class predictions, one row per task segment. Ties break
    /// toward the lowest class index.
    pub fn predict(&self, x: &ArrayView2<F>) -> Result<Array2<u32>> {
        let logits = self.logits(x)?;
        Ok(argmax_per_segment(&logits.view(), &self.head.segments()))
    }
}

/// Log-sum-exp stabilized softmax applied independently to each segment of
/// each column.
pub fn softmax_per_segment<F: NdFloat>(logits: &ArrayView2<F>, segments: &[usize]) -> Array2<F> {
    let (rows, cols) = logits.dim();
    debug_assert_eq!(rows, segments.iter().sum::<usize>());
    let mut out = Array2::<F>::zeros((rows, cols).f());
    for c in 0..cols {
        let col = logits.column(c);
        let mut offset = 0;
        for &k in segments {
            let seg = col.slice(ndarray::s![offset..offset + k]);
            let max = seg.fold(F::neg_infinity(), |m, &v| if v > m { v } else { m });
            let mut denom = 0.0f64;
            for &v in seg.iter() {
                denom += (v - max).to_f64().unwrap().exp();
            }
            let denom = F::from(denom).unwrap();
            for (i, &v) in seg.iter().enumerate() {
                out[[offset + i, c]] = (v - max).exp() / denom;
            }
            offset += k;
        }
    }
    out
}

/// Mean cross-entropy per segment, summed over segments; f64 accumulation.
fn cross_entropy<F: NdFloat>(logits: &ArrayView2<F>, y: &ArrayView2<F>, segments: &[usize]) -> f64 {
    let cols = logits.ncols();
    let mut total = 0.0f64;
    for c in 0..cols {
        let zl = logits.column(c);
        let yl = y.column(c);
        let mut offset = 0;
        for &k in segments {
            let seg = zl.slice(ndarray::s![offset..offset + k]);
            let max = seg
                .fold(F::neg_infinity(), |m, &v| if v > m { v } else { m })
                .to_f64()
                .unwrap();
            let mut denom = 0.0f64;
            let mut target = 0.0f64;
            for (i, &v) in seg.iter().enumerate() {
                let vf = v.to_f64().unwrap();
                denom += (vf - max).exp();
                target += yl[offset + i].to_f64().unwrap() * vf;
            }
            total += max + denom.ln() - target;
            offset += k;
        }
    }
    total / cols as f64
}

/// Argmax within each segment of each column; first maximum wins.
pub fn argmax_per_segment<F: NdFloat>(logits: &ArrayView2<F>, segments: &[usize]) -> Array2<u32> {
    let cols = logits.ncols();
    let mut out = Array2::<u32>::zeros((segments.len(), cols));
    for c in 0..cols {
        let col = logits.column(c);
        let mut offset = 0;
        for (t, &k) in segments.iter().enumerate() {
            let mut best = 0usize;
            let mut best_v = col[offset];
            for i in 1..k {
                if col[offset + i] > best_v {
                    best_v = col[offset + i];
                    best = i;
                }
            }
            out[[t, c]] = best as u32;
            offset += k;
        }
    }
    out
}
