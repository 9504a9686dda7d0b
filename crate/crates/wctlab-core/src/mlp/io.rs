//! Model checkpoint format.
//!
//! Layout: 8-byte magic `WCTMLP01`, little-endian u32 length prefix, UTF-8
//! JSON header, then per-layer f32 payloads (weights row-major, then bias)
//! in layer order. The header carries everything inference needs: head
//! layout, label space, vectorization mode, and the standardization fitted
//! at dataset build time. Round-trips are byte-identical.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::binfmt::{write_f32_iter, Cursor};
use crate::dataset::{Standardization, VectorizationMode};
use crate::error::{Error, Result};
use crate::labeling::LabelSpace;
use crate::mlp::{Activation, DenseLayer, EpochMetrics, Head, MlpModel, TrainConfig};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"WCTMLP01";
const FORMAT_VERSION: u32 = 1;

/// Everything stored alongside the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: MlpModel<f32>,
    pub label_space: LabelSpace,
    pub mode: VectorizationMode,
    pub standardization: Option<Standardization>,
    /// Descrambled samples per slot the model was trained for.
    pub n_des: usize,
    pub train_config: TrainConfig,
    pub final_metrics: Option<EpochMetrics>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    version: u32,
    layer_dims: [usize; 5],
    activation: Activation,
    head: Head,
    mode: VectorizationMode,
    n_des: usize,
    label_space: LabelSpace,
    standardization: Option<Standardization>,
    train_config: TrainConfig,
    final_metrics: Option<EpochMetrics>,
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let p = path.display().to_string();
    let header = CheckpointHeader {
        version: FORMAT_VERSION,
        layer_dims: ckpt.model.layer_dims(),
        activation: ckpt.model.activation,
        head: ckpt.model.head.clone(),
        mode: ckpt.mode,
        n_des: ckpt.n_des,
        label_space: ckpt.label_space.clone(),
        standardization: ckpt.standardization.clone(),
        train_config: ckpt.train_config.clone(),
        final_metrics: ckpt.final_metrics.clone(),
    };
    let header_bytes =
        serde_json::to_vec(&header).map_err(|e| Error::format(&p, "header", e.to_string()))?;

    let file = File::create(path).map_err(|e| Error::io(&p, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(&p, e);
    w.write_all(CHECKPOINT_MAGIC).map_err(io_err)?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&header_bytes).map_err(io_err)?;
    for layer in &ckpt.model.layers {
        write_f32_iter(&mut w, layer.w.iter().copied()).map_err(io_err)?;
        write_f32_iter(&mut w, layer.b.iter().copied()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let p = path.display().to_string();
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(&p, e))?;

    let mut cur = Cursor::new(&buf, &p);
    cur.expect_magic(CHECKPOINT_MAGIC)?;
    let header_len = cur.read_u32("header length")? as usize;
    let header_bytes = cur.take(header_len, "header")?;
    let header: CheckpointHeader = serde_json::from_slice(header_bytes)
        .map_err(|e| Error::format(&p, "header", e.to_string()))?;
    if header.version != FORMAT_VERSION {
        return Err(Error::format(
            &p,
            "version",
            format!("unsupported version {}", header.version),
        ));
    }
    if header.head.out_dim() != header.layer_dims[4] {
        return Err(Error::format(
            &p,
            "head",
            format!(
                "head outputs {} classes but the final layer has {}",
                header.head.out_dim(),
                header.layer_dims[4]
            ),
        ));
    }

    let dims = header.layer_dims;
    let mut layers = Vec::with_capacity(4);
    for l in 0..4 {
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let w = cur.read_matrix_f32([fan_out, fan_in], &format!("layer {l} weights"))?;
        let b = cur.read_f32_vec(fan_out, &format!("layer {l} bias"))?;
        layers.push(DenseLayer {
            w,
            b: ndarray::Array1::from_vec(b),
        });
    }
    cur.expect_end()?;

    Ok(Checkpoint {
        model: MlpModel {
            layers,
            activation: header.activation,
            head: header.head,
        },
        label_space: header.label_space,
        mode: header.mode,
        standardization: header.standardization,
        n_des: header.n_des,
        train_config: header.train_config,
        final_metrics: header.final_metrics,
    })
}
