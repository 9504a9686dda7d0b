//! On-disk dataset format.
//!
//! Layout: 8-byte magic `WCTDSET1`, a little-endian u32 length prefix, a
//! UTF-8 JSON header, then row-major little-endian f32 payloads in header
//! order (train samples, train labels, infer samples, infer labels), then
//! per-column metadata as little-endian u32 (type, slot, SNR) triples for
//! the train then infer splits. Save → load → save is byte-identical.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::binfmt::{write_f32_iter, Cursor};
use crate::dataset::{
    DataBlock, LabeledDataset, SplitStrategy, Standardization, VectorizationMode,
};
use crate::error::{Error, Result};
use crate::labeling::{LabelScheme, LabelSpace};
use crate::srs::SlotMeta;

pub const DATASET_MAGIC: &[u8; 8] = b"WCTDSET1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    version: u32,
    mode: VectorizationMode,
    n_des: usize,
    alpha: f64,
    labeling_scheme: LabelScheme,
    seed: u64,
    snr_grid_db: Vec<f64>,
    wct_names: Vec<String>,
    split_strategy: SplitStrategy,
    train_samples_dims: [usize; 2],
    train_labels_dims: [usize; 2],
    infer_samples_dims: [usize; 2],
    infer_labels_dims: [usize; 2],
    label_space: LabelSpace,
    standardization: Option<Standardization>,
}

fn write_meta<W: Write>(w: &mut W, meta: &[SlotMeta]) -> std::io::Result<()> {
    for m in meta {
        w.write_all(&m.wct_index.to_le_bytes())?;
        w.write_all(&m.slot_index.to_le_bytes())?;
        w.write_all(&m.snr_index.to_le_bytes())?;
    }
    Ok(())
}

/// Serializes a dataset; rejects internally inconsistent blocks before
/// touching the filesystem.
pub fn save_dataset(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let p = path.display().to_string();
    for (name, block) in [("train", &ds.train), ("infer", &ds.infer)] {
        if block.labels.ncols() != block.samples.ncols() {
            return Err(Error::config(format!(
                "{name} labels have {} columns but samples have {}",
                block.labels.ncols(),
                block.samples.ncols()
            )));
        }
        if block.meta.len() != block.samples.ncols() {
            return Err(Error::config(format!(
                "{name} metadata length {} does not match {} columns",
                block.meta.len(),
                block.samples.ncols()
            )));
        }
    }

    let header = DatasetHeader {
        version: FORMAT_VERSION,
        mode: ds.mode,
        n_des: ds.n_des,
        alpha: ds.alpha,
        labeling_scheme: ds.scheme(),
        seed: ds.seed,
        snr_grid_db: ds.snr_grid_db.clone(),
        wct_names: ds.label_space.wct_names().to_vec(),
        split_strategy: ds.strategy,
        train_samples_dims: [ds.train.samples.nrows(), ds.train.samples.ncols()],
        train_labels_dims: [ds.train.labels.nrows(), ds.train.labels.ncols()],
        infer_samples_dims: [ds.infer.samples.nrows(), ds.infer.samples.ncols()],
        infer_labels_dims: [ds.infer.labels.nrows(), ds.infer.labels.ncols()],
        label_space: ds.label_space.clone(),
        standardization: ds.standardization.clone(),
    };
    let header_bytes =
        serde_json::to_vec(&header).map_err(|e| Error::format(&p, "header", e.to_string()))?;

    let file = File::create(path).map_err(|e| Error::io(&p, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(&p, e);
    w.write_all(DATASET_MAGIC).map_err(io_err)?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&header_bytes).map_err(io_err)?;
    // Logical row-major order regardless of in-memory layout.
    write_f32_iter(&mut w, ds.train.samples.iter().copied()).map_err(io_err)?;
    write_f32_iter(&mut w, ds.train.labels.iter().copied()).map_err(io_err)?;
    write_f32_iter(&mut w, ds.infer.samples.iter().copied()).map_err(io_err)?;
    write_f32_iter(&mut w, ds.infer.labels.iter().copied()).map_err(io_err)?;
    write_meta(&mut w, &ds.train.meta).map_err(io_err)?;
    write_meta(&mut w, &ds.infer.meta).map_err(io_err)?;
    w.flush().map_err(io_err)?;
    Ok(())
}

fn read_meta(cur: &mut Cursor<'_>, n: usize, field: &str) -> Result<Vec<SlotMeta>> {
    let bytes = cur.take(n * 12, field)?;
    Ok(bytes
        .chunks_exact(12)
        .map(|b| SlotMeta {
            wct_index: u32::from_le_bytes([b[0], b[1], b[2], b[3]]),
            slot_index: u32::from_le_bytes([b[4], b[5], b[6], b[7]]),
            snr_index: u32::from_le_bytes([b[8], b[9], b[10], b[11]]),
        })
        .collect())
}

/// Loads and validates a dataset file.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let p = path.display().to_string();
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(&p, e))?;

    let mut cur = Cursor::new(&buf, &p);
    cur.expect_magic(DATASET_MAGIC)?;
    let header_len = cur.read_u32("header length")? as usize;
    let header_bytes = cur.take(header_len, "header")?;
    let header: DatasetHeader = serde_json::from_slice(header_bytes)
        .map_err(|e| Error::format(&p, "header", e.to_string()))?;
    if header.version != FORMAT_VERSION {
        return Err(Error::format(
            &p,
            "version",
            format!("unsupported version {}", header.version),
        ));
    }
    if header.train_samples_dims[1] != header.train_labels_dims[1] {
        return Err(Error::format(
            &p,
            "train_labels_dims",
            "label and sample column counts differ",
        ));
    }
    if header.infer_samples_dims[1] != header.infer_labels_dims[1] {
        return Err(Error::format(
            &p,
            "infer_labels_dims",
            "label and sample column counts differ",
        ));
    }

    let train_samples = cur.read_matrix_f32(header.train_samples_dims, "train samples")?;
    let train_labels = cur.read_matrix_f32(header.train_labels_dims, "train labels")?;
    let infer_samples = cur.read_matrix_f32(header.infer_samples_dims, "infer samples")?;
    let infer_labels = cur.read_matrix_f32(header.infer_labels_dims, "infer labels")?;
    let train_meta = read_meta(&mut cur, header.train_samples_dims[1], "train metadata")?;
    let infer_meta = read_meta(&mut cur, header.infer_samples_dims[1], "infer metadata")?;
    cur.expect_end()?;

    Ok(LabeledDataset {
        mode: header.mode,
        label_space: header.label_space,
        n_des: header.n_des,
        alpha: header.alpha,
        snr_grid_db: header.snr_grid_db,
        seed: header.seed,
        strategy: header.split_strategy,
        standardization: header.standardization,
        train: DataBlock {
            samples: train_samples,
            labels: train_labels,
            meta: train_meta,
        },
        infer: DataBlock {
            samples: infer_samples,
            labels: infer_labels,
            meta: infer_meta,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SimConfig;
    use crate::dataset::{assemble_dataset, SplitOptions};
    use crate::labeling::LabelingConvention;

    fn small_dataset() -> LabeledDataset {
        let mut cfg = SimConfig::standard(3);
        cfg.n_rb = 2;
        cfg.snr_grid_db = vec![0.0, 30.0];
        assemble_dataset(
            &cfg,
            VectorizationMode::RealImag,
            LabelScheme::Multi,
            LabelingConvention::Standard,
            &SplitOptions {
                alpha: 0.7,
                ..Default::default()
            },
            9,
        )
        .unwrap()
    }

    #[test]
    fn save_load_round_trip_preserves_everything() {
        let ds = small_dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.wct");
        save_dataset(&ds, &path).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(ds, loaded);
    }

    #[test]
    fn resave_is_byte_identical() {
        let ds = small_dataset();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.wct");
        let p2 = dir.path().join("b.wct");
        save_dataset(&ds, &p1).unwrap();
        let loaded = load_dataset(&p1).unwrap();
        save_dataset(&loaded, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn truncated_file_reports_field() {
        let ds = small_dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.wct");
        save_dataset(&ds, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.path().join("cut.wct");
        std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
        match load_dataset(&cut) {
            Err(Error::Format { field, .. }) => {
                assert!(!field.is_empty());
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.wct");
        std::fs::write(&path, b"NOTADSET0000").unwrap();
        match load_dataset(&path) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "magic"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn save_rejects_mismatched_columns() {
        let mut ds = small_dataset();
        ds.train.labels = ds.train.labels.slice(ndarray::s![.., ..5]).to_owned();
        let dir = tempfile::tempdir().unwrap();
        assert!(save_dataset(&ds, dir.path().join("bad.wct")).is_err());
    }
}
