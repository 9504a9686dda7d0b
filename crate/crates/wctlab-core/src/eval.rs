//! Accuracy accounting and report rendering.
//!
//! Counts exact argmax matches per task, builds per-task confusion matrices
//! (rows = truth, columns = prediction), breaks accuracy down by SNR, and —
//! for multi-task models — reports the reconstructed channel-type accuracy,
//! where a sample counts only if every task prediction is correct.
//!
//! The multi-task "overall" figure is the unweighted mean of the per-task
//! accuracies, so the count-weighted per-SNR figures average back to it.

use ndarray::{Array2, ArrayView2};
use std::fmt::Write as _;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::labeling::{LabelScheme, LabelSpace};
use crate::mlp::{argmax_per_segment, MlpModel};
use crate::srs::SlotMeta;

/// Results for one classification task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskReport {
    pub name: String,
    pub class_labels: Vec<String>,
    /// (true class, predicted class) counts.
    pub confusion: Array2<u64>,
    pub accuracy: f64,
}

impl TaskReport {
    pub fn correct(&self) -> u64 {
        self.confusion.diag().sum()
    }

    pub fn total(&self) -> u64 {
        self.confusion.sum()
    }
}

/// Accuracy within one SNR grid point; `accuracy` is `None` when the
/// inference split holds no samples at that SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrBucket {
    pub snr_db: f64,
    pub count: u64,
    pub tasks_correct: u64,
    pub accuracy: Option<f64>,
}

/// Reconstructed channel-type accuracy: all tasks correct at once.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedWct {
    pub correct: u64,
    pub accuracy: f64,
}

/// Full evaluation of a model over an inference split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub scheme: LabelScheme,
    pub n_eval: u64,
    /// Single-task: the classification accuracy. Multi-task: mean of the
    /// per-task accuracies.
    pub overall_accuracy: f64,
    pub tasks: Vec<TaskReport>,
    pub per_snr: Vec<SnrBucket>,
    pub reconstructed: Option<ReconstructedWct>,
}

fn task_names_and_classes(space: &LabelSpace) -> (Vec<String>, Vec<Vec<String>>) {
    match space {
        LabelSpace::Single { wct_names } => (vec!["wct".to_string()], vec![wct_names.clone()]),
        LabelSpace::Multi { layout, .. } => (
            layout
                .tasks
                .iter()
                .map(|t| t.feature.as_str().to_string())
                .collect(),
            layout
                .tasks
                .iter()
                .map(|t| t.classes.iter().map(|c| c.label.clone()).collect())
                .collect(),
        ),
    }
}

/// Evaluates a model on one split.
pub fn evaluate(
    model: &MlpModel<f32>,
    samples: &ArrayView2<f32>,
    labels: &ArrayView2<f32>,
    meta: &[SlotMeta],
    snr_grid_db: &[f64],
    space: &LabelSpace,
) -> Result<EvalReport> {
    if model.head.scheme() != space.scheme() {
        return Err(Error::config(format!(
            "model head is {} but the label space is {}",
            model.head.scheme().as_str(),
            space.scheme().as_str()
        )));
    }
    let n = samples.ncols();
    if n == 0 {
        return Err(Error::config("empty evaluation split"));
    }
    if labels.ncols() != n || meta.len() != n {
        return Err(Error::config(
            "samples, labels, and metadata disagree on column count",
        ));
    }
    let segments = model.head.segments();
    let n_tasks = segments.len();
    let (names, classes) = task_names_and_classes(space);

    let mut confusion: Vec<Array2<u64>> = segments
        .iter()
        .map(|&k| Array2::<u64>::zeros((k, k)))
        .collect();
    let mut snr_count = vec![0u64; snr_grid_db.len()];
    let mut snr_correct = vec![0u64; snr_grid_db.len()];
    let mut all_correct = 0u64;

    let chunk = 2048usize;
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let xs = samples.slice(ndarray::s![.., start..end]);
        let ys = labels.slice(ndarray::s![.., start..end]);
        let pred = model.predict(&xs)?;
        let truth = argmax_per_segment(&ys, &segments);
        for c in 0..(end - start) {
            let snr_idx = meta[start + c].snr_index as usize;
            if snr_idx >= snr_grid_db.len() {
                return Err(Error::config(format!(
                    "column {}: snr_index {snr_idx} outside the {}-point grid",
                    start + c,
                    snr_grid_db.len()
                )));
            }
            snr_count[snr_idx] += 1;
            let mut sample_all = true;
            for t in 0..n_tasks {
                let (tr, pr) = (truth[[t, c]] as usize, pred[[t, c]] as usize);
                confusion[t][[tr, pr]] += 1;
                if tr == pr {
                    snr_correct[snr_idx] += 1;
                } else {
                    sample_all = false;
                }
            }
            if sample_all {
                all_correct += 1;
            }
        }
        start = end;
    }

    let tasks: Vec<TaskReport> = names
        .into_iter()
        .zip(classes)
        .zip(confusion)
        .map(|((name, class_labels), confusion)| {
            let correct = confusion.diag().sum();
            TaskReport {
                name,
                class_labels,
                accuracy: correct as f64 / n as f64,
                confusion,
            }
        })
        .collect();
    let overall_accuracy = tasks.iter().map(|t| t.accuracy).sum::<f64>() / n_tasks as f64;
    let per_snr = snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| SnrBucket {
            snr_db,
            count: snr_count[i],
            tasks_correct: snr_correct[i],
            accuracy: (snr_count[i] > 0)
                .then(|| snr_correct[i] as f64 / (snr_count[i] * n_tasks as u64) as f64),
        })
        .collect();
    let reconstructed = match space.scheme() {
        LabelScheme::Single => None,
        LabelScheme::Multi => Some(ReconstructedWct {
            correct: all_correct,
            accuracy: all_correct as f64 / n as f64,
        }),
    };

    Ok(EvalReport {
        scheme: space.scheme(),
        n_eval: n as u64,
        overall_accuracy,
        tasks,
        per_snr,
        reconstructed,
    })
}

/// Evaluates on a dataset's inference split.
pub fn evaluate_dataset(model: &MlpModel<f32>, ds: &LabeledDataset) -> Result<EvalReport> {
    evaluate(
        model,
        &ds.infer.samples.view(),
        &ds.infer.labels.view(),
        &ds.infer.meta,
        &ds.snr_grid_db,
        &ds.label_space,
    )
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

/// Fixed-width text report.
pub fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scheme: {}", report.scheme.as_str());
    let _ = writeln!(out, "samples evaluated: {}", report.n_eval);
    let _ = writeln!(out, "overall accuracy: {}", pct(report.overall_accuracy));
    if let Some(ref rec) = report.reconstructed {
        let _ = writeln!(
            out,
            "reconstructed WCT accuracy: {} ({}/{})",
            pct(rec.accuracy),
            rec.correct,
            report.n_eval
        );
    }
    for task in &report.tasks {
        let _ = writeln!(out);
        let _ = writeln!(out, "task {:24} accuracy {}", task.name, pct(task.accuracy));
        let _ = writeln!(
            out,
            "  {:<24} {:>8} {:>8} {:>9}",
            "class", "n", "correct", "accuracy"
        );
        for (i, label) in task.class_labels.iter().enumerate() {
            let row_total: u64 = task.confusion.row(i).sum();
            let diag = task.confusion[[i, i]];
            let acc = if row_total > 0 {
                pct(diag as f64 / row_total as f64)
            } else {
                "n/a".to_string()
            };
            let _ = writeln!(out, "  {label:<24} {row_total:>8} {diag:>8} {acc:>9}");
        }
        let _ = writeln!(out, "  confusion (rows = true, columns = predicted):");
        for i in 0..task.class_labels.len() {
            let cells: Vec<String> = (0..task.class_labels.len())
                .map(|j| format!("{:>7}", task.confusion[[i, j]]))
                .collect();
            let _ = writeln!(out, "  {:<24} {}", task.class_labels[i], cells.join(" "));
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "  {:>7} {:>8} {:>9}", "snr_db", "n", "accuracy");
    for b in &report.per_snr {
        let acc = b.accuracy.map_or("n/a".to_string(), pct);
        let _ = writeln!(out, "  {:>7} {:>8} {:>9}", b.snr_db, b.count, acc);
    }
    out
}

const CSV_HEADER: &str = "section,task,key,count,correct,accuracy";

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Machine-readable CSV with a stable column order; [`parse_csv`] inverts it.
pub fn to_csv(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    let _ = writeln!(out, "scheme,,{},,,", report.scheme.as_str());
    let tasks_correct: u64 = report.tasks.iter().map(|t| t.correct()).sum();
    let _ = writeln!(
        out,
        "overall,,,{},{},{}",
        report.n_eval, tasks_correct, report.overall_accuracy
    );
    for task in &report.tasks {
        let _ = writeln!(
            out,
            "task,{},,{},{},{}",
            task.name,
            report.n_eval,
            task.correct(),
            task.accuracy
        );
        for (i, label) in task.class_labels.iter().enumerate() {
            let row_total: u64 = task.confusion.row(i).sum();
            let diag = task.confusion[[i, i]];
            let acc = (row_total > 0).then(|| diag as f64 / row_total as f64);
            let _ = writeln!(
                out,
                "class,{},{label},{row_total},{diag},{}",
                task.name,
                fmt_opt(acc)
            );
        }
        for i in 0..task.class_labels.len() {
            for j in 0..task.class_labels.len() {
                let _ = writeln!(
                    out,
                    "confusion,{},{}->{},{},,",
                    task.name,
                    task.class_labels[i],
                    task.class_labels[j],
                    task.confusion[[i, j]]
                );
            }
        }
    }
    for b in &report.per_snr {
        let _ = writeln!(
            out,
            "snr,,{},{},{},{}",
            b.snr_db,
            b.count,
            b.tasks_correct,
            fmt_opt(b.accuracy)
        );
    }
    if let Some(ref rec) = report.reconstructed {
        let _ = writeln!(
            out,
            "wct,,reconstructed,{},{},{}",
            report.n_eval, rec.correct, rec.accuracy
        );
    }
    out
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::format("csv", what, format!("cannot parse {s:?}")))
}

/// Parses a report produced by [`to_csv`] back into an [`EvalReport`].
pub fn parse_csv(text: &str) -> Result<EvalReport> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::format(
                "csv",
                "header",
                format!("expected {CSV_HEADER:?}, found {other:?}"),
            ))
        }
    }
    let mut scheme = None;
    let mut n_eval = 0u64;
    let mut overall_accuracy = 0.0f64;
    let mut tasks: Vec<TaskReport> = Vec::new();
    let mut confusion_rows: Vec<(String, String, u64)> = Vec::new();
    let mut per_snr = Vec::new();
    let mut reconstructed = None;

    for line in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.splitn(6, ',').collect();
        if f.len() != 6 {
            return Err(Error::format(
                "csv",
                "row",
                format!("malformed row {line:?}"),
            ));
        }
        match f[0] {
            "scheme" => {
                scheme = Some(match f[2] {
                    "single" => LabelScheme::Single,
                    "multi" => LabelScheme::Multi,
                    other => {
                        return Err(Error::format(
                            "csv",
                            "scheme",
                            format!("unknown scheme {other:?}"),
                        ))
                    }
                });
            }
            "overall" => {
                n_eval = parse_field(f[3], "overall count")?;
                overall_accuracy = parse_field(f[5], "overall accuracy")?;
            }
            "task" => {
                tasks.push(TaskReport {
                    name: f[1].to_string(),
                    class_labels: Vec::new(),
                    confusion: Array2::zeros((0, 0)),
                    accuracy: parse_field(f[5], "task accuracy")?,
                });
            }
            "class" => {
                let task = tasks
                    .iter_mut()
                    .find(|t| t.name == f[1])
                    .ok_or_else(|| Error::format("csv", "class", "class before task"))?;
                task.class_labels.push(f[2].to_string());
            }
            "confusion" => {
                confusion_rows.push((
                    f[1].to_string(),
                    f[2].to_string(),
                    parse_field(f[3], "confusion count")?,
                ));
            }
            "snr" => {
                per_snr.push(SnrBucket {
                    snr_db: parse_field(f[2], "snr value")?,
                    count: parse_field(f[3], "snr count")?,
                    tasks_correct: parse_field(f[4], "snr correct")?,
                    accuracy: if f[5].is_empty() {
                        None
                    } else {
                        Some(parse_field(f[5], "snr accuracy")?)
                    },
                });
            }
            "wct" => {
                reconstructed = Some(ReconstructedWct {
                    correct: parse_field(f[4], "reconstructed correct")?,
                    accuracy: parse_field(f[5], "reconstructed accuracy")?,
                });
            }
            other => {
                return Err(Error::format(
                    "csv",
                    "section",
                    format!("unknown section {other:?}"),
                ))
            }
        }
    }

    for task in &mut tasks {
        let k = task.class_labels.len();
        task.confusion = Array2::zeros((k, k));
    }
    for (task_name, key, count) in confusion_rows {
        let task = tasks
            .iter_mut()
            .find(|t| t.name == task_name)
            .ok_or_else(|| Error::format("csv", "confusion", "unknown task"))?;
        let (a, b) = key
            .split_once("->")
            .ok_or_else(|| Error::format("csv", "confusion", "malformed cell key"))?;
        let i = task
            .class_labels
            .iter()
            .position(|l| l == a)
            .ok_or_else(|| Error::format("csv", "confusion", "unknown true class"))?;
        let j = task
            .class_labels
            .iter()
            .position(|l| l == b)
            .ok_or_else(|| Error::format("csv", "confusion", "unknown predicted class"))?;
        task.confusion[[i, j]] = count;
    }

    Ok(EvalReport {
        scheme: scheme.ok_or_else(|| Error::format("csv", "scheme", "missing"))?,
        n_eval,
        overall_accuracy,
        tasks,
        per_snr,
        reconstructed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_standard_profiles;
    use crate::labeling::LabelingConvention;
    use crate::mlp::Head;
    use ndarray::Array2;

    /// Builds a synthetic report directly from given prediction/truth pairs
    /// using an identity-ish passthrough model on crafted logit inputs.
    fn report_from_predictions(
        truths: &[Vec<usize>],
        preds: &[Vec<usize>],
        segments: &[usize],
        space: &LabelSpace,
        snr_grid: &[f64],
        snr_of: impl Fn(usize) -> usize,
    ) -> EvalReport {
        let out_dim: usize = segments.iter().sum();
        let n = truths.len();
        // Model: single passthrough chain so logits == input.
        let dims = [out_dim, out_dim, out_dim, out_dim, out_dim];
        let head = match space.scheme() {
            LabelScheme::Single => Head::Single { classes: out_dim },
            LabelScheme::Multi => Head::Multi {
                segments: segments.to_vec(),
            },
        };
        let mut model = crate::mlp::MlpModel::<f32>::init(dims, head, 0).unwrap();
        for layer in &mut model.layers {
            layer.w.fill(0.0);
            for i in 0..layer.w.nrows() {
                layer.w[[i, i]] = 1.0;
            }
            layer.b.fill(0.0);
        }
        let mut x = Array2::<f32>::zeros((out_dim, n));
        let mut y = Array2::<f32>::zeros((out_dim, n));
        let mut meta = Vec::new();
        for c in 0..n {
            let mut offset = 0;
            for (t, &k) in segments.iter().enumerate() {
                // Positive logit at the predicted class; ReLU keeps it.
                x[[offset + preds[c][t], c]] = 5.0;
                y[[offset + truths[c][t], c]] = 1.0;
                offset += k;
            }
            meta.push(SlotMeta {
                wct_index: 0,
                slot_index: c as u32,
                snr_index: snr_of(c) as u32,
            });
        }
        evaluate(&model, &x.view(), &y.view(), &meta, snr_grid, space).unwrap()
    }

    fn single_space() -> LabelSpace {
        LabelSpace::single(&make_standard_profiles())
    }

    fn multi_space() -> LabelSpace {
        LabelSpace::multi(&make_standard_profiles(), LabelingConvention::Standard).unwrap()
    }

    #[test]
    fn perfect_predictor_scores_one() {
        let truths: Vec<Vec<usize>> = (0..50).map(|i| vec![i % 5]).collect();
        let report =
            report_from_predictions(&truths, &truths, &[5], &single_space(), &[0.0, 10.0], |c| {
                c % 2
            });
        assert_eq!(report.overall_accuracy, 1.0);
        for task in &report.tasks {
            assert_eq!(task.accuracy, 1.0);
            for i in 0..5 {
                for j in 0..5 {
                    if i != j {
                        assert_eq!(task.confusion[[i, j]], 0);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_predictor_on_balanced_classes_scores_chance() {
        let truths: Vec<Vec<usize>> = (0..100).map(|i| vec![i % 5]).collect();
        let preds: Vec<Vec<usize>> = (0..100).map(|_| vec![2]).collect();
        let report = report_from_predictions(&truths, &preds, &[5], &single_space(), &[0.0], |_| 0);
        assert!((report.overall_accuracy - 0.2).abs() < 1e-12);
    }

    #[test]
    fn accuracy_equals_confusion_trace_over_total() {
        let truths: Vec<Vec<usize>> = (0..60).map(|i| vec![i % 5]).collect();
        let preds: Vec<Vec<usize>> = (0..60).map(|i| vec![(i * 7 + 1) % 5]).collect();
        let report = report_from_predictions(&truths, &preds, &[5], &single_space(), &[0.0], |_| 0);
        let task = &report.tasks[0];
        let direct = truths.iter().zip(&preds).filter(|(t, p)| t == p).count() as f64 / 60.0;
        assert!((task.accuracy - direct).abs() < 1e-12);
        assert!((task.accuracy - task.correct() as f64 / task.total() as f64).abs() < 1e-12);
        // Row sums equal per-class sample counts.
        for i in 0..5 {
            let expected = truths.iter().filter(|t| t[0] == i).count() as u64;
            assert_eq!(task.confusion.row(i).sum(), expected);
        }
    }

    #[test]
    fn per_snr_accuracies_average_to_overall() {
        let segments = [3usize, 3, 2];
        let space = multi_space();
        let mut rng = crate::seeds::rng_from(17);
        use rand::Rng;
        let truths: Vec<Vec<usize>> = (0..300)
            .map(|_| {
                vec![
                    rng.random_range(0..3),
                    rng.random_range(0..3),
                    rng.random_range(0..2),
                ]
            })
            .collect();
        let preds: Vec<Vec<usize>> = truths
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .map(|(ti, &v)| {
                        if rng.random::<f64>() < 0.3 {
                            (v + 1) % segments[ti]
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let grid = [0.0, 10.0, 20.0, 30.0];
        let report = report_from_predictions(&truths, &preds, &segments, &space, &grid, |c| c % 4);
        let weighted: f64 = report
            .per_snr
            .iter()
            .map(|b| b.accuracy.unwrap_or(0.0) * b.count as f64)
            .sum::<f64>()
            / report.n_eval as f64;
        assert!(
            (weighted - report.overall_accuracy).abs() < 1e-9,
            "weighted {weighted} vs overall {}",
            report.overall_accuracy
        );
    }

    #[test]
    fn reconstructed_accuracy_obeys_union_bound() {
        let segments = [3usize, 3, 2];
        let space = multi_space();
        let mut rng = crate::seeds::rng_from(23);
        use rand::Rng;
        let truths: Vec<Vec<usize>> = (0..500)
            .map(|_| {
                vec![
                    rng.random_range(0..3),
                    rng.random_range(0..3),
                    rng.random_range(0..2),
                ]
            })
            .collect();
        let preds: Vec<Vec<usize>> = truths
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .map(|(ti, &v)| {
                        let miss = [0.1, 0.2, 0.05][ti];
                        if rng.random::<f64>() < miss {
                            (v + 1) % segments[ti]
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let report = report_from_predictions(&truths, &preds, &segments, &space, &[0.0], |_| 0);
        let rec = report.reconstructed.as_ref().unwrap();
        let bound: f64 = 1.0 - report.tasks.iter().map(|t| 1.0 - t.accuracy).sum::<f64>();
        assert!(
            rec.accuracy >= bound - 1e-12,
            "reconstructed {} below union bound {bound}",
            rec.accuracy
        );
        // And never better than any single task.
        for t in &report.tasks {
            assert!(rec.accuracy <= t.accuracy + 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let segments = [3usize, 3, 2];
        let space = multi_space();
        let mut rng = crate::seeds::rng_from(29);
        use rand::Rng;
        let truths: Vec<Vec<usize>> = (0..120)
            .map(|_| {
                vec![
                    rng.random_range(0..3),
                    rng.random_range(0..3),
                    rng.random_range(0..2),
                ]
            })
            .collect();
        let preds: Vec<Vec<usize>> = truths
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .map(|(ti, &v)| {
                        if rng.random::<f64>() < 0.25 {
                            (v + 1) % segments[ti]
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let grid = [0.0, 15.0, 30.0];
        let report = report_from_predictions(&truths, &preds, &segments, &space, &grid, |c| c % 3);
        let csv = to_csv(&report);
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(report, parsed);
    }

    #[test]
    fn absent_class_renders_na_without_panicking() {
        // Truth never uses class 4.
        let truths: Vec<Vec<usize>> = (0..40).map(|i| vec![i % 4]).collect();
        let report =
            report_from_predictions(&truths, &truths, &[5], &single_space(), &[0.0, 10.0], |c| {
                c % 2
            });
        let text = render_text(&report);
        assert!(text.contains("n/a"));
        let csv = to_csv(&report);
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(report, parsed);
    }

    #[test]
    fn empty_snr_bucket_is_reported_as_none() {
        let truths: Vec<Vec<usize>> = (0..10).map(|i| vec![i % 5]).collect();
        let report = report_from_predictions(
            &truths,
            &truths,
            &[5],
            &single_space(),
            &[0.0, 10.0, 20.0],
            |_| 0,
        );
        assert_eq!(report.per_snr.len(), 3);
        assert_eq!(report.per_snr[1].count, 0);
        assert_eq!(report.per_snr[1].accuracy, None);
    }
}
