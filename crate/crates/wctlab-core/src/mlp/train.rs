//! Mini-batch training loop with seeded shuffling and Adam/SGD updates.

use ndarray::{Array1, Array2, ArrayView2, NdFloat, ShapeBuilder, Zip};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::{argmax_per_segment, MlpModel};
use crate::seeds::{derive_seed, rng_from, Stream};

/// Optimizer selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub init_seed: u64,
    pub hidden_dims: [usize; 3],
    /// Full-split metrics are computed every this many epochs (and always on
    /// the final one).
    pub metrics_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 256,
            learning_rate: 1e-3,
            optimizer: Optimizer::default(),
            init_seed: 0,
            hidden_dims: [512, 256, 128],
            metrics_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::config("learning_rate must be positive"));
        }
        if self.metrics_every == 0 {
            return Err(Error::config("metrics_every must be >= 1"));
        }
        Ok(())
    }
}

/// Metrics recorded after each epoch. `train_loss` averages the optimized
/// batch losses; the full-split figures are filled at the metrics cadence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: Option<f64>,
    pub infer_loss: Option<f64>,
    pub infer_accuracy: Option<f64>,
}

/// Per-parameter optimizer state.
struct OptState<F> {
    m_w: Vec<Array2<F>>,
    m_b: Vec<Array1<F>>,
    v_w: Vec<Array2<F>>,
    v_b: Vec<Array1<F>>,
    step: u64,
}

impl<F: NdFloat> OptState<F> {
    fn new(model: &MlpModel<F>) -> Self {
        OptState {
            m_w: model
                .layers
                .iter()
                .map(|l| Array2::zeros(l.w.dim()))
                .collect(),
            m_b: model
                .layers
                .iter()
                .map(|l| Array1::zeros(l.b.len()))
                .collect(),
            v_w: model
                .layers
                .iter()
                .map(|l| Array2::zeros(l.w.dim()))
                .collect(),
            v_b: model
                .layers
                .iter()
                .map(|l| Array1::zeros(l.b.len()))
                .collect(),
            step: 0,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_update<F: NdFloat, D: ndarray::Dimension>(
    param: &mut ndarray::Array<F, D>,
    grad: &ndarray::Array<F, D>,
    m: &mut ndarray::Array<F, D>,
    v: &mut ndarray::Array<F, D>,
    lr: F,
    b1: F,
    b2: F,
    eps: F,
    step: u64,
) {
    let one = F::one();
    let bc1 = one - b1.powi(step as i32);
    let bc2 = one - b2.powi(step as i32);
    Zip::from(param)
        .and(grad)
        .and(m)
        .and(v)
        .for_each(|p, &g, m, v| {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        });
}

fn apply_update<F: NdFloat>(
    model: &mut MlpModel<F>,
    grads: &crate::mlp::Gradients<F>,
    state: &mut OptState<F>,
    optimizer: Optimizer,
    learning_rate: f64,
) {
    let lr = F::from(learning_rate).unwrap();
    match optimizer {
        Optimizer::Sgd => {
            for (l, layer) in model.layers.iter_mut().enumerate() {
                Zip::from(&mut layer.w)
                    .and(&grads.w[l])
                    .for_each(|p, &g| *p -= lr * g);
                Zip::from(&mut layer.b)
                    .and(&grads.b[l])
                    .for_each(|p, &g| *p -= lr * g);
            }
        }
        Optimizer::Adam {
            beta1,
            beta2,
            epsilon,
        } => {
            state.step += 1;
            let b1 = F::from(beta1).unwrap();
            let b2 = F::from(beta2).unwrap();
            let eps = F::from(epsilon).unwrap();
            for (l, layer) in model.layers.iter_mut().enumerate() {
                adam_update(
                    &mut layer.w,
                    &grads.w[l],
                    &mut state.m_w[l],
                    &mut state.v_w[l],
                    lr,
                    b1,
                    b2,
                    eps,
                    state.step,
                );
                adam_update(
                    &mut layer.b,
                    &grads.b[l],
                    &mut state.m_b[l],
                    &mut state.v_b[l],
                    lr,
                    b1,
                    b2,
                    eps,
                    state.step,
                );
            }
        }
    }
}

/// Copies the selected columns into a contiguous batch.
fn gather_columns<F: NdFloat>(src: &ArrayView2<F>, idx: &[usize]) -> Array2<F> {
    let mut out = Array2::<F>::zeros((src.nrows(), idx.len()).f());
    for (j, &c) in idx.iter().enumerate() {
        out.column_mut(j).assign(&src.column(c));
    }
    out
}

/// Chunked full-split pass: (mean loss, accuracy). Multi-task accuracy is
/// the mean of the per-task accuracies.
pub fn dataset_metrics<F: NdFloat>(
    model: &MlpModel<F>,
    x: &ArrayView2<F>,
    y: &ArrayView2<F>,
) -> Result<(f64, f64)> {
    let n = x.ncols();
    let segments = model.head.segments();
    let chunk = 1024usize;
    let mut loss_acc = 0.0f64;
    let mut correct = 0u64;
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let xs = x.slice(ndarray::s![.., start..end]);
        let ys = y.slice(ndarray::s![.., start..end]);
        loss_acc += model.loss(&xs, &ys)? * (end - start) as f64;
        let pred = model.predict(&xs)?;
        let truth = argmax_per_segment(&ys, &segments);
        correct += pred
            .iter()
            .zip(truth.iter())
            .filter(|(a, b)| a == b)
            .count() as u64;
        start = end;
    }
    let accuracy = correct as f64 / (n as f64 * segments.len() as f64);
    Ok((loss_acc / n as f64, accuracy))
}

/// Trains the model in place, returning per-epoch history. Deterministic
/// for a fixed (config, data) pair; errors if the loss leaves the reals.
pub fn train<F: NdFloat>(
    model: &mut MlpModel<F>,
    train_x: &ArrayView2<F>,
    train_y: &ArrayView2<F>,
    infer: Option<(&ArrayView2<F>, &ArrayView2<F>)>,
    cfg: &TrainConfig,
) -> Result<Vec<EpochMetrics>> {
    cfg.validate()?;
    let n = train_x.ncols();
    if n == 0 {
        return Err(Error::config("empty training set"));
    }
    let mut state = OptState::new(model);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.epochs {
        let mut rng = rng_from(derive_seed(
            cfg.init_seed,
            Stream::EpochShuffle,
            epoch as u64,
            0,
            0,
        ));
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0f64;
        for batch_idx in order.chunks(cfg.batch_size) {
            let bx = gather_columns(train_x, batch_idx);
            let by = gather_columns(train_y, batch_idx);
            let (loss, grads) = model.loss_and_grad(&bx.view(), &by.view())?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    reason: format!("batch loss {loss}"),
                });
            }
            loss_sum += loss * batch_idx.len() as f64;
            apply_update(model, &grads, &mut state, cfg.optimizer, cfg.learning_rate);
        }

        let take_metrics = (epoch + 1) % cfg.metrics_every == 0 || epoch + 1 == cfg.epochs;
        let mut entry = EpochMetrics {
            epoch,
            train_loss: loss_sum / n as f64,
            train_accuracy: None,
            infer_loss: None,
            infer_accuracy: None,
        };
        if take_metrics {
            let (_, train_acc) = dataset_metrics(model, train_x, train_y)?;
            entry.train_accuracy = Some(train_acc);
            if let Some((ix, iy)) = infer {
                let (infer_loss, infer_acc) = dataset_metrics(model, ix, iy)?;
                entry.infer_loss = Some(infer_loss);
                entry.infer_accuracy = Some(infer_acc);
            }
        }
        history.push(entry);
    }
    Ok(history)
}
