//! One-hot label construction for both classification schemes.
//!
//! Single-task: each channel type is one class, labels are identity columns.
//! Multi-task: each channel feature (delay spread, Rx correlation, Doppler)
//! is its own task; a label is the concatenation of per-task one-hot
//! segments, and a feature-tuple prediction maps back to a configured type
//! when exactly one matches.
//!
//! Two conventions control how the static (AWGN-like) type enters the class
//! sets. Under [`LabelingConvention::Standard`] it contributes its own
//! values (zero delay spread, no correlation, zero Doppler) and every task
//! sorts ascending. Under [`LabelingConvention::AwgnAsLowCorrelation`] the
//! static type is folded into the low-correlation class and zero Doppler
//! sorts after the fading Doppler values.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelProfile, CorrelationLevel};
use crate::error::{Error, Result};
use crate::srs::SlotMeta;

/// Which labeling scheme a dataset or model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    Single,
    Multi,
}

impl LabelScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelScheme::Single => "single",
            LabelScheme::Multi => "multi",
        }
    }
}

/// Channel features classified as separate tasks, in fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    DelaySpread,
    RxCorrelation,
    DopplerSpread,
}

pub const FEATURE_ORDER: [FeatureKind; 3] = [
    FeatureKind::DelaySpread,
    FeatureKind::RxCorrelation,
    FeatureKind::DopplerSpread,
];

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::DelaySpread => "delay_spread",
            FeatureKind::RxCorrelation => "correlation",
            FeatureKind::DopplerSpread => "doppler",
        }
    }
}

/// How the static type maps onto feature classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelingConvention {
    #[default]
    Standard,
    AwgnAsLowCorrelation,
}

/// One feature class: a numeric identity plus a display label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassValue {
    pub value: f64,
    pub label: String,
}

/// Ordered class set for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub feature: FeatureKind,
    pub classes: Vec<ClassValue>,
}

/// Ordered tasks with their class sets; the label vector is the
/// concatenation of one one-hot segment per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskLayout {
    pub tasks: Vec<TaskSpec>,
}

impl TaskLayout {
    pub fn total_dim(&self) -> usize {
        self.tasks.iter().map(|t| t.classes.len()).sum()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.tasks.iter().map(|t| t.classes.len()).collect()
    }
}

/// Correlation levels need a numeric identity that separates "none" from
/// "low" even though both color with alpha = 0.
fn correlation_value(level: CorrelationLevel) -> f64 {
    match level {
        CorrelationLevel::None => -1.0,
        CorrelationLevel::Low => 0.0,
        CorrelationLevel::High => 1.0,
    }
}

fn doppler_label(hz: f64) -> String {
    if hz.fract() == 0.0 {
        format!("{}Hz", hz as i64)
    } else {
        format!("{hz}Hz")
    }
}

fn delay_label(s: f64) -> String {
    if s == 0.0 {
        "flat".to_string()
    } else {
        format!("{:.0}ns", s * 1e9)
    }
}

/// Feature value and display label of a profile under a convention.
fn feature_value(
    profile: &ChannelProfile,
    kind: FeatureKind,
    convention: LabelingConvention,
) -> ClassValue {
    match kind {
        FeatureKind::DelaySpread => {
            let v = profile.max_delay_s();
            ClassValue {
                value: v,
                label: delay_label(v),
            }
        }
        FeatureKind::RxCorrelation => {
            let level = match (convention, profile.rx_correlation) {
                (LabelingConvention::AwgnAsLowCorrelation, CorrelationLevel::None) => {
                    CorrelationLevel::Low
                }
                (_, level) => level,
            };
            ClassValue {
                value: correlation_value(level),
                label: level.as_str().to_string(),
            }
        }
        FeatureKind::DopplerSpread => ClassValue {
            value: profile.doppler_hz,
            label: doppler_label(profile.doppler_hz),
        },
    }
}

/// Sort key for class ordering. The alternate convention places the static
/// (zero-Doppler) class after all fading Doppler classes.
fn sort_key(kind: FeatureKind, value: f64, convention: LabelingConvention) -> f64 {
    if kind == FeatureKind::DopplerSpread
        && convention == LabelingConvention::AwgnAsLowCorrelation
        && value == 0.0
    {
        f64::INFINITY
    } else {
        value
    }
}

/// Finds the distinct, deterministically ordered class set per feature
/// across the configured profiles.
pub fn derive_task_layout(
    profiles: &[ChannelProfile],
    convention: LabelingConvention,
) -> TaskLayout {
    let tasks = FEATURE_ORDER
        .iter()
        .map(|&kind| {
            let mut classes: Vec<ClassValue> = Vec::new();
            for p in profiles {
                let cv = feature_value(p, kind, convention);
                if !classes.iter().any(|c| c.value == cv.value) {
                    classes.push(cv);
                }
            }
            classes.sort_by(|a, b| {
                sort_key(kind, a.value, convention)
                    .partial_cmp(&sort_key(kind, b.value, convention))
                    .unwrap()
            });
            TaskSpec {
                feature: kind,
                classes,
            }
        })
        .collect();
    TaskLayout { tasks }
}

/// Per-task class indices of one profile within a layout.
pub fn profile_class_indices(
    profile: &ChannelProfile,
    layout: &TaskLayout,
    convention: LabelingConvention,
) -> Result<Vec<usize>> {
    layout
        .tasks
        .iter()
        .map(|task| {
            let cv = feature_value(profile, task.feature, convention);
            task.classes
                .iter()
                .position(|c| c.value == cv.value)
                .ok_or_else(|| {
                    Error::config(format!(
                        "profile {} has {} value {} not present in the task layout",
                        profile.name,
                        task.feature.as_str(),
                        cv.label
                    ))
                })
        })
        .collect()
}

/// One-hot label columns, one per sample.
#[derive(Debug, Clone)]
pub struct LabelMatrix {
    /// (label dim, n columns), entries 0 or 1.
    pub e: Array2<f32>,
    pub scheme: LabelScheme,
    pub layout: Option<TaskLayout>,
}

/// Identity-column labels over the channel types.
pub fn single_task_labels(meta: &[SlotMeta], n_wct: usize) -> Result<LabelMatrix> {
    let mut e = Array2::<f32>::zeros((n_wct, meta.len()));
    for (c, m) in meta.iter().enumerate() {
        let k = m.wct_index as usize;
        if k >= n_wct {
            return Err(Error::config(format!(
                "column {c}: wct_index {k} out of range (n_wct = {n_wct})"
            )));
        }
        e[[k, c]] = 1.0;
    }
    Ok(LabelMatrix {
        e,
        scheme: LabelScheme::Single,
        layout: None,
    })
}

/// Concatenated per-task one-hot labels.
pub fn multi_task_labels(
    meta: &[SlotMeta],
    layout: &TaskLayout,
    profiles: &[ChannelProfile],
    convention: LabelingConvention,
) -> Result<LabelMatrix> {
    let per_profile: Vec<Vec<usize>> = profiles
        .iter()
        .map(|p| profile_class_indices(p, layout, convention))
        .collect::<Result<_>>()?;
    let dim = layout.total_dim();
    let mut e = Array2::<f32>::zeros((dim, meta.len()));
    let counts = layout.class_counts();
    for (c, m) in meta.iter().enumerate() {
        let w = m.wct_index as usize;
        let indices = per_profile
            .get(w)
            .ok_or_else(|| Error::config(format!("column {c}: wct_index {w} out of range")))?;
        let mut offset = 0;
        for (t, &class_idx) in indices.iter().enumerate() {
            e[[offset + class_idx, c]] = 1.0;
            offset += counts[t];
        }
    }
    Ok(LabelMatrix {
        e,
        scheme: LabelScheme::Multi,
        layout: Some(layout.clone()),
    })
}

/// Everything needed to interpret model outputs, embedded in dataset and
/// checkpoint headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum LabelSpace {
    Single {
        wct_names: Vec<String>,
    },
    Multi {
        layout: TaskLayout,
        wct_names: Vec<String>,
        /// Per configured type, its class index in each task.
        profile_classes: Vec<Vec<usize>>,
    },
}

impl LabelSpace {
    pub fn single(profiles: &[ChannelProfile]) -> Self {
        LabelSpace::Single {
            wct_names: profiles.iter().map(|p| p.name.clone()).collect(),
        }
    }

    pub fn multi(profiles: &[ChannelProfile], convention: LabelingConvention) -> Result<Self> {
        let layout = derive_task_layout(profiles, convention);
        let profile_classes = profiles
            .iter()
            .map(|p| profile_class_indices(p, &layout, convention))
            .collect::<Result<_>>()?;
        Ok(LabelSpace::Multi {
            layout,
            wct_names: profiles.iter().map(|p| p.name.clone()).collect(),
            profile_classes,
        })
    }

    pub fn scheme(&self) -> LabelScheme {
        match self {
            LabelSpace::Single { .. } => LabelScheme::Single,
            LabelSpace::Multi { .. } => LabelScheme::Multi,
        }
    }

    /// Output segment sizes: one segment per task (a single segment for the
    /// single-task scheme).
    pub fn segments(&self) -> Vec<usize> {
        match self {
            LabelSpace::Single { wct_names } => vec![wct_names.len()],
            LabelSpace::Multi { layout, .. } => layout.class_counts(),
        }
    }

    pub fn label_dim(&self) -> usize {
        self.segments().iter().sum()
    }

    pub fn wct_names(&self) -> &[String] {
        match self {
            LabelSpace::Single { wct_names } => wct_names,
            LabelSpace::Multi { wct_names, .. } => wct_names,
        }
    }
}

/// Outcome of mapping a feature-tuple prediction back to a channel type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WctDecision {
    Configured {
        wct_index: usize,
        name: String,
    },
    /// The predicted feature combination matches no configured type; the
    /// per-task class labels are reported as-is.
    Unconfigured {
        classes: Vec<String>,
    },
}

/// Maps per-task class indices to a configured type, or reports the raw
/// feature tuple when no configured type has that combination.
pub fn label_to_wct(space: &LabelSpace, classes: &[usize]) -> Result<WctDecision> {
    match space {
        LabelSpace::Single { wct_names } => {
            let &[idx] = classes else {
                return Err(Error::config(format!(
                    "single-task prediction needs 1 class index, got {}",
                    classes.len()
                )));
            };
            let name = wct_names
                .get(idx)
                .ok_or_else(|| Error::config(format!("class index {idx} out of range")))?;
            Ok(WctDecision::Configured {
                wct_index: idx,
                name: name.clone(),
            })
        }
        LabelSpace::Multi {
            layout,
            wct_names,
            profile_classes,
        } => {
            if classes.len() != layout.tasks.len() {
                return Err(Error::config(format!(
                    "expected {} task indices, got {}",
                    layout.tasks.len(),
                    classes.len()
                )));
            }
            for (task, &idx) in layout.tasks.iter().zip(classes) {
                if idx >= task.classes.len() {
                    return Err(Error::config(format!(
                        "class index {idx} out of range for task {}",
                        task.feature.as_str()
                    )));
                }
            }
            if let Some(w) = profile_classes.iter().position(|pc| pc == classes) {
                Ok(WctDecision::Configured {
                    wct_index: w,
                    name: wct_names[w].clone(),
                })
            } else {
                let labels = layout
                    .tasks
                    .iter()
                    .zip(classes)
                    .map(|(task, &idx)| task.classes[idx].label.clone())
                    .collect();
                Ok(WctDecision::Unconfigured { classes: labels })
            }
        }
    }
}
