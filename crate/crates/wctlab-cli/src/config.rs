//! Declarative TOML configuration for dataset generation.
//!
//! A config names the grid geometry, the SNR sweep, the dataset options,
//! and the channel types to include; see the `configs/` directory for
//! complete examples.

use serde::Deserialize;

use wctlab_core::channel::{ChannelProfile, CorrelationLevel, SimConfig};
use wctlab_core::dataset::{SplitOptions, SplitStrategy, VectorizationMode};
use wctlab_core::labeling::{LabelScheme, LabelingConvention};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Master seed; `--seed` overrides it.
    pub seed: Option<u64>,
    pub grid: GridSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub dataset: DatasetSection,
    pub wct: Vec<WctSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_rb: usize,
    pub n_sym: usize,
    pub n_rx: usize,
    pub comb: usize,
    pub subcarrier_spacing_hz: f64,
    pub slot_duration_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db: SnrSpec,
    pub slots_per_snr: usize,
}

/// Either an explicit list of SNR points or an inclusive range.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SnrSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl SnrSpec {
    pub fn to_grid(&self) -> Result<Vec<f64>, String> {
        match self {
            SnrSpec::List(v) if v.is_empty() => Err("snr_db list is empty".into()),
            SnrSpec::List(v) => Ok(v.clone()),
            SnrSpec::Range { start, stop, step } => {
                if *step <= 0.0 {
                    return Err(format!("snr_db step must be positive, got {step}"));
                }
                if stop < start {
                    return Err(format!("snr_db range [{start}, {stop}] is empty"));
                }
                let n = ((stop - start) / step).round() as usize + 1;
                Ok((0..n).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub alpha: f64,
    pub split: SplitStrategy,
    pub standardize: bool,
    pub mode: VectorizationMode,
    pub labels: LabelScheme,
    pub convention: LabelingConvention,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            alpha: 0.9,
            split: SplitStrategy::Stratified,
            standardize: true,
            mode: VectorizationMode::RealImag,
            labels: LabelScheme::Single,
            convention: LabelingConvention::Standard,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WctSection {
    Awgn,
    Epa {
        doppler_hz: f64,
        correlation: CorrelationLevel,
    },
    Eva {
        doppler_hz: f64,
        correlation: CorrelationLevel,
    },
}

impl FileConfig {
    pub fn to_sim_config(&self) -> Result<SimConfig, String> {
        let wcts: Vec<ChannelProfile> = self
            .wct
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let p = match w {
                    WctSection::Awgn => ChannelProfile::awgn(),
                    WctSection::Epa {
                        doppler_hz,
                        correlation,
                    } => ChannelProfile::epa(*doppler_hz, *correlation),
                    WctSection::Eva {
                        doppler_hz,
                        correlation,
                    } => ChannelProfile::eva(*doppler_hz, *correlation),
                };
                p.with_seed_domain(i as u32)
            })
            .collect();
        Ok(SimConfig {
            n_rb: self.grid.n_rb,
            n_sym: self.grid.n_sym,
            n_rx: self.grid.n_rx,
            comb: self.grid.comb,
            subcarrier_spacing_hz: self.grid.subcarrier_spacing_hz,
            slot_duration_s: self.grid.slot_duration_s,
            snr_grid_db: self.sweep.snr_db.to_grid()?,
            n_slots_per_snr: self.sweep.slots_per_snr,
            wcts,
        })
    }

    pub fn split_options(&self, seed: u64) -> SplitOptions {
        SplitOptions {
            alpha: self.dataset.alpha,
            strategy: self.dataset.split,
            seed,
            standardize: self.dataset.standardize,
        }
    }
}
