//! Sample-matrix assembly and the train/inference split.
//!
//! One dataset column is the vectorized descrambled slot of one
//! (channel type, slot, SNR) triple; columns run type-major, then slot, then
//! SNR. Per-column seeds derive from the master seed plus the triple, so a
//! parallel build is bit-identical to a sequential one.
//!
//! A literal contiguous split of that column order would put entire channel
//! types in training and others in inference, so the default strategy
//! shuffles within each (type, SNR) stratum before splitting; the contiguous
//! split remains available behind [`SplitStrategy::Contiguous`].

pub mod io;

use ndarray::{Array2, ShapeBuilder};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::SimConfig;
use crate::error::{Error, Result};
use crate::labeling::{
    derive_task_layout, multi_task_labels, single_task_labels, LabelMatrix, LabelScheme,
    LabelSpace, LabelingConvention,
};
use crate::seeds::{derive_seed, rng_from, Stream};
use crate::srs::{gen_srs, transmit_descramble, DescrambledSlot, SlotMeta};

/// How a descrambled complex sequence becomes a real feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VectorizationMode {
    /// [Re(s); Im(s)]
    #[default]
    #[serde(rename = "reim")]
    RealImag,
    /// [|s|; arg(s)], phases in (−π, π]
    #[serde(rename = "magphase")]
    MagPhase,
}

impl VectorizationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VectorizationMode::RealImag => "reim",
            VectorizationMode::MagPhase => "magphase",
        }
    }
}

/// Real feature vector of one slot with its sweep position.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    /// Length 2·N_des: two stacked halves per the mode.
    pub v: Vec<f32>,
    pub mode: VectorizationMode,
    pub meta: SlotMeta,
}

/// Rearranges a descrambled slot into the stacked real vector.
pub fn vectorize(slot: &DescrambledSlot, mode: VectorizationMode) -> FeatureVector {
    let n = slot.s.len();
    let mut v = vec![0.0f32; 2 * n];
    match mode {
        VectorizationMode::RealImag => {
            for (i, z) in slot.s.iter().enumerate() {
                v[i] = z.re;
                v[n + i] = z.im;
            }
        }
        VectorizationMode::MagPhase => {
            for (i, z) in slot.s.iter().enumerate() {
                v[i] = z.norm();
                let mut p = z.arg();
                if p == -std::f32::consts::PI {
                    p = std::f32::consts::PI;
                }
                v[n + i] = p;
            }
        }
    }
    FeatureVector {
        v,
        mode,
        meta: slot.meta,
    }
}

/// Inverse of [`vectorize`] for the real/imaginary mode.
pub fn reassemble_complex(v: &[f32]) -> Result<Vec<num_complex::Complex32>> {
    if !v.len().is_multiple_of(2) {
        return Err(Error::config(format!(
            "feature vector length {} is odd",
            v.len()
        )));
    }
    let n = v.len() / 2;
    Ok((0..n)
        .map(|i| num_complex::Complex32::new(v[i], v[n + i]))
        .collect())
}

/// Column index → sweep position under the type-major column order.
pub fn column_to_meta(c: usize, n_slot: usize, n_snr: usize) -> SlotMeta {
    SlotMeta {
        wct_index: (c / (n_slot * n_snr)) as u32,
        slot_index: ((c / n_snr) % n_slot) as u32,
        snr_index: (c % n_snr) as u32,
    }
}

/// Sweep position → column index; inverse of [`column_to_meta`].
pub fn meta_to_column(m: &SlotMeta, n_slot: usize, n_snr: usize) -> usize {
    (m.wct_index as usize * n_slot + m.slot_index as usize) * n_snr + m.snr_index as usize
}

/// All vectorized slots of a sweep, one column per (type, slot, SNR).
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    /// (2·N_des, n columns), column-major storage.
    pub samples: Array2<f32>,
    pub column_meta: Vec<SlotMeta>,
    pub mode: VectorizationMode,
    pub n_des: usize,
    /// Master seed the matrix was generated from.
    pub seed: u64,
}

/// Runs the full sweep: for every (type, slot, SNR) triple, realize the
/// channel, transmit and descramble the pilot, vectorize, and place the
/// column. Columns are generated in parallel.
pub fn build_sample_matrix(
    cfg: &SimConfig,
    mode: VectorizationMode,
    master_seed: u64,
) -> Result<SampleMatrix> {
    cfg.validate()?;
    let seq = gen_srs(cfg)?;
    let n_des = cfg.n_des();
    let rows = 2 * n_des;
    let n_slot = cfg.n_slots_per_snr;
    let n_snr = cfg.snr_grid_db.len();
    let n_cols = cfg.n_columns();

    let mut raw = vec![0.0f32; rows * n_cols];
    raw.par_chunks_mut(rows)
        .enumerate()
        .try_for_each(|(c, chunk)| -> Result<()> {
            let meta = column_to_meta(c, n_slot, n_snr);
            let (w, s, q) = (
                meta.wct_index as u64,
                meta.slot_index as u64,
                meta.snr_index as u64,
            );
            let profile = &cfg.wcts[meta.wct_index as usize];
            let chan_seed = derive_seed(master_seed, Stream::Channel, w, s, q);
            let h =
                crate::channel::realize_channel(profile, cfg, meta.slot_index as usize, chan_seed)?;
            let noise_seed = derive_seed(master_seed, Stream::Noise, w, s, q);
            let slot = transmit_descramble(
                &seq,
                &h,
                cfg.snr_grid_db[meta.snr_index as usize],
                noise_seed,
                meta,
            )?;
            chunk.copy_from_slice(&vectorize(&slot, mode).v);
            Ok(())
        })?;

    let samples =
        Array2::from_shape_vec((rows, n_cols).f(), raw).expect("shape matches buffer length");
    let column_meta = (0..n_cols)
        .map(|c| column_to_meta(c, n_slot, n_snr))
        .collect();
    Ok(SampleMatrix {
        samples,
        column_meta,
        mode,
        n_des,
        seed: master_seed,
    })
}

/// Split strategy for assigning columns to train and inference sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitStrategy {
    /// Seeded shuffle within each (type, SNR) stratum before splitting.
    #[default]
    Stratified,
    /// Literal contiguous split of the type-major column order.
    Contiguous,
}

#[derive(Debug, Clone)]
pub struct SplitOptions {
    /// Training fraction, strictly inside (0, 1).
    pub alpha: f64,
    pub strategy: SplitStrategy,
    /// Seed for the stratified shuffle.
    pub seed: u64,
    /// Z-score every feature using training-split statistics.
    pub standardize: bool,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            alpha: 0.9,
            strategy: SplitStrategy::Stratified,
            seed: 0,
            standardize: true,
        }
    }
}

/// Feature-wise z-score statistics fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f32>,
    pub std: Vec<f32>,
}

impl Standardization {
    /// Fits per-feature mean and standard deviation over the given columns.
    fn fit(samples: &Array2<f32>, columns: &[usize]) -> Self {
        let rows = samples.nrows();
        let n = columns.len().max(1) as f64;
        let mut mean = vec![0.0f64; rows];
        let mut sq = vec![0.0f64; rows];
        for &c in columns {
            let col = samples.column(c);
            for (i, &x) in col.iter().enumerate() {
                mean[i] += x as f64;
                sq[i] += (x as f64) * (x as f64);
            }
        }
        let mut std = vec![0.0f32; rows];
        let mut mean_f = vec![0.0f32; rows];
        for i in 0..rows {
            let m = mean[i] / n;
            let var = (sq[i] / n - m * m).max(0.0);
            let s = var.sqrt();
            mean_f[i] = m as f32;
            // Constant features pass through centered.
            std[i] = if s < 1e-12 { 1.0 } else { s as f32 };
        }
        Standardization { mean: mean_f, std }
    }

    /// Applies the z-score in place to every column.
    pub fn apply_matrix(&self, samples: &mut Array2<f32>) {
        for mut col in samples.columns_mut() {
            for (i, x) in col.iter_mut().enumerate() {
                *x = (*x - self.mean[i]) / self.std[i];
            }
        }
    }

    /// Applies the z-score to one feature vector.
    pub fn apply_vec(&self, v: &mut [f32]) {
        for (i, x) in v.iter_mut().enumerate() {
            *x = (*x - self.mean[i]) / self.std[i];
        }
    }
}

/// Assigns column indices to (train, inference) per the options.
pub fn split_columns(meta: &[SlotMeta], opts: &SplitOptions) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = meta.len();
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::config(format!(
            "alpha must be strictly inside (0, 1), got {}",
            opts.alpha
        )));
    }
    let train_total = (opts.alpha * n as f64).round() as usize;
    if train_total == 0 || train_total == n {
        return Err(Error::config(format!(
            "alpha {} leaves an empty split for {n} columns",
            opts.alpha
        )));
    }
    match opts.strategy {
        SplitStrategy::Contiguous => Ok(((0..train_total).collect(), (train_total..n).collect())),
        SplitStrategy::Stratified => {
            // Group columns by (type, SNR), keeping group order deterministic.
            let mut keys: Vec<(u32, u32)> = meta
                .iter()
                .map(|m| (m.wct_index, m.snr_index))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            keys.sort_unstable();
            let groups: Vec<Vec<usize>> = keys
                .iter()
                .map(|&key| {
                    (0..n)
                        .filter(|&c| (meta[c].wct_index, meta[c].snr_index) == key)
                        .collect()
                })
                .collect();

            // Largest-remainder allocation keeps the total at round(alpha*N).
            let quotas: Vec<f64> = groups.iter().map(|g| opts.alpha * g.len() as f64).collect();
            let mut counts: Vec<usize> = quotas.iter().map(|&q| q.floor() as usize).collect();
            let assigned: usize = counts.iter().sum();
            let mut order: Vec<usize> = (0..groups.len()).collect();
            order.sort_by(|&a, &b| {
                let fa = quotas[a] - quotas[a].floor();
                let fb = quotas[b] - quotas[b].floor();
                fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
            });
            for &g in order.iter().take(train_total.saturating_sub(assigned)) {
                counts[g] += 1;
            }

            let mut train = Vec::with_capacity(train_total);
            let mut infer = Vec::with_capacity(n - train_total);
            for (g, (key, mut members)) in keys.into_iter().zip(groups).enumerate() {
                let mut rng = rng_from(derive_seed(
                    opts.seed,
                    Stream::Split,
                    key.0 as u64,
                    key.1 as u64,
                    0,
                ));
                members.shuffle(&mut rng);
                let k = counts[g].min(members.len());
                train.extend_from_slice(&members[..k]);
                infer.extend_from_slice(&members[k..]);
            }
            Ok((train, infer))
        }
    }
}

/// One split of the dataset: samples, labels, and per-column positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBlock {
    /// (2·N_des, n columns)
    pub samples: Array2<f32>,
    /// (label dim, n columns)
    pub labels: Array2<f32>,
    pub meta: Vec<SlotMeta>,
}

impl DataBlock {
    pub fn n_columns(&self) -> usize {
        self.samples.ncols()
    }
}

/// Fully assembled dataset: both splits plus everything needed to interpret
/// and reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub mode: VectorizationMode,
    pub label_space: LabelSpace,
    pub n_des: usize,
    pub alpha: f64,
    pub snr_grid_db: Vec<f64>,
    pub seed: u64,
    pub strategy: SplitStrategy,
    pub standardization: Option<Standardization>,
    pub train: DataBlock,
    pub infer: DataBlock,
}

impl LabeledDataset {
    pub fn scheme(&self) -> LabelScheme {
        self.label_space.scheme()
    }
}

fn gather_block(matrix: &SampleMatrix, labels: &LabelMatrix, indices: &[usize]) -> DataBlock {
    let rows = matrix.samples.nrows();
    let ldim = labels.e.nrows();
    let mut samples = Array2::<f32>::zeros((rows, indices.len()).f());
    let mut lab = Array2::<f32>::zeros((ldim, indices.len()).f());
    for (j, &c) in indices.iter().enumerate() {
        samples.column_mut(j).assign(&matrix.samples.column(c));
        lab.column_mut(j).assign(&labels.e.column(c));
    }
    DataBlock {
        samples,
        labels: lab,
        meta: indices.iter().map(|&c| matrix.column_meta[c]).collect(),
    }
}

/// Splits a sample matrix plus labels into train/inference blocks, applying
/// standardization fitted on the training columns when requested.
pub fn split(
    matrix: &SampleMatrix,
    labels: &LabelMatrix,
    label_space: &LabelSpace,
    snr_grid_db: &[f64],
    opts: &SplitOptions,
) -> Result<LabeledDataset> {
    if labels.e.ncols() != matrix.samples.ncols() {
        return Err(Error::config(format!(
            "label columns ({}) do not match sample columns ({})",
            labels.e.ncols(),
            matrix.samples.ncols()
        )));
    }
    let (train_idx, infer_idx) = split_columns(&matrix.column_meta, opts)?;
    let standardization = opts
        .standardize
        .then(|| Standardization::fit(&matrix.samples, &train_idx));
    let mut train = gather_block(matrix, labels, &train_idx);
    let mut infer = gather_block(matrix, labels, &infer_idx);
    if let Some(ref st) = standardization {
        st.apply_matrix(&mut train.samples);
        st.apply_matrix(&mut infer.samples);
    }
    Ok(LabeledDataset {
        mode: matrix.mode,
        label_space: label_space.clone(),
        n_des: matrix.n_des,
        alpha: opts.alpha,
        snr_grid_db: snr_grid_db.to_vec(),
        seed: matrix.seed,
        strategy: opts.strategy,
        standardization,
        train,
        infer,
    })
}

/// Generation, labeling, and split in one call.
pub fn assemble_dataset(
    cfg: &SimConfig,
    mode: VectorizationMode,
    scheme: LabelScheme,
    convention: LabelingConvention,
    opts: &SplitOptions,
    master_seed: u64,
) -> Result<LabeledDataset> {
    let matrix = build_sample_matrix(cfg, mode, master_seed)?;
    let (labels, space) = match scheme {
        LabelScheme::Single => (
            single_task_labels(&matrix.column_meta, cfg.wcts.len())?,
            LabelSpace::single(&cfg.wcts),
        ),
        LabelScheme::Multi => {
            let layout = derive_task_layout(&cfg.wcts, convention);
            (
                multi_task_labels(&matrix.column_meta, &layout, &cfg.wcts, convention)?,
                LabelSpace::multi(&cfg.wcts, convention)?,
            )
        }
    };
    split(&matrix, &labels, &space, &cfg.snr_grid_db, opts)
}
