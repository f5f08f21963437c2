//! Confusion-matrix metrics and repeated stratified cross-validation.
//!
//! The positive class is Extended ("one or more days"). Metrics with a zero
//! denominator are reported as explicitly undefined (`None`), never as a
//! silent zero, so aggregates cannot be corrupted by degenerate folds.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DurationClass;
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;
use crate::trees::{fit_bagged, fit_forest, fit_tree, EnsembleModel, TreeConfig, TreeNode};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionMatrix {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Self {
            true_pos: tp,
            false_pos: fp,
            true_neg: tn,
            false_neg: fn_,
        }
    }

    pub fn tally(truth: &[DurationClass], predicted: &[DurationClass]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::MisalignedLabels {
                rows: truth.len(),
                labels: predicted.len(),
            });
        }
        let mut cm = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p);
        }
        Ok(cm)
    }

    pub fn record(&mut self, truth: DurationClass, predicted: DurationClass) {
        use DurationClass::{Extended, ShortLived};
        match (truth, predicted) {
            (Extended, Extended) => self.true_pos += 1,
            (Extended, ShortLived) => self.false_neg += 1,
            (ShortLived, ShortLived) => self.true_neg += 1,
            (ShortLived, Extended) => self.false_pos += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Test-set metrics; undefined entries stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MetricReport<F: Scalar> {
    pub sensitivity: Option<F>,
    pub specificity: Option<F>,
    pub balanced_accuracy: Option<F>,
    pub kappa: Option<F>,
}

/// Compute sensitivity, specificity, balanced accuracy, and Cohen's kappa.
/// kappa uses exact integer arithmetic for p_o and p_e before the final
/// division: kappa = (n·(tp+tn) − X) / (n² − X) with
/// X = (tp+fn)(tp+fp) + (fp+tn)(fn+tn).
pub fn metrics<F: Scalar>(cm: &ConfusionMatrix) -> MetricReport<F> {
    let positives = cm.true_pos + cm.false_neg;
    let negatives = cm.true_neg + cm.false_pos;
    let sensitivity = (positives > 0).then(|| F::ratio(cm.true_pos, positives));
    let specificity = (negatives > 0).then(|| F::ratio(cm.true_neg, negatives));
    let balanced_accuracy = match (sensitivity, specificity) {
        (Some(s), Some(p)) => Some((s + p) / F::two()),
        _ => None,
    };

    let n = cm.total() as u128;
    let x = (cm.true_pos + cm.false_neg) as u128 * (cm.true_pos + cm.false_pos) as u128
        + (cm.false_pos + cm.true_neg) as u128 * (cm.false_neg + cm.true_neg) as u128;
    let kappa = if n == 0 || n * n == x {
        None
    } else {
        let numerator = n as i128 * (cm.true_pos + cm.true_neg) as i128 - x as i128;
        let denominator = (n * n - x) as i128;
        Some(F::cast_f64(numerator as f64) / F::cast_f64(denominator as f64))
    };

    MetricReport {
        sensitivity,
        specificity,
        balanced_accuracy,
        kappa,
    }
}

/// Score a trained model on a held-out table.
pub fn evaluate_holdout<F: Scalar>(
    model: &EnsembleModel,
    test: &FeatureTable,
) -> Result<(ConfusionMatrix, MetricReport<F>)> {
    if test.is_empty() {
        return Err(Error::InvalidParameter("empty test table".to_string()));
    }
    let mut cm = ConfusionMatrix::default();
    for row in &test.rows {
        cm.record(row.label, model.predict(&row.top_topics).0);
    }
    Ok((cm, metrics(&cm)))
}

/// The classifiers compared in the pipeline, plus a constant baseline used
/// to pin chance-level behavior in tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerSpec {
    SingleTree {
        config: TreeConfig,
    },
    Bagged {
        n_trees: usize,
        config: TreeConfig,
    },
    Forest {
        n_trees: usize,
        mtry: usize,
        config: TreeConfig,
    },
    Constant {
        class: DurationClass,
    },
}

impl LearnerSpec {
    pub fn single() -> Self {
        Self::SingleTree {
            config: TreeConfig::default(),
        }
    }

    pub fn bagged(n_trees: usize) -> Self {
        Self::Bagged {
            n_trees,
            config: TreeConfig::default(),
        }
    }

    pub fn forest(n_trees: usize, mtry: usize) -> Self {
        Self::Forest {
            n_trees,
            mtry,
            config: TreeConfig::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SingleTree { .. } => "single_tree",
            Self::Bagged { .. } => "bagged",
            Self::Forest { .. } => "forest",
            Self::Constant { .. } => "constant",
        }
    }

    pub fn fit(&self, train: &FeatureTable, seed: u64) -> Result<EnsembleModel> {
        match self {
            Self::SingleTree { config } => Ok(EnsembleModel::single(fit_tree(train, config)?)),
            Self::Bagged { n_trees, config } => fit_bagged(train, *n_trees, config, seed),
            Self::Forest {
                n_trees,
                mtry,
                config,
            } => fit_forest(train, *n_trees, *mtry, config, seed),
            Self::Constant { class } => Ok(EnsembleModel::single(TreeNode::Leaf {
                class: *class,
                class_counts: if *class == DurationClass::Extended {
                    [0, 1]
                } else {
                    [1, 0]
                },
            })),
        }
    }
}

/// Mean and sample standard deviation over the folds where a metric was
/// defined; `defined` counts them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MetricSummary<F: Scalar> {
    pub mean: Option<F>,
    pub stddev: Option<F>,
    pub defined: usize,
}

fn summarize<F: Scalar>(values: impl Iterator<Item = Option<F>>) -> MetricSummary<F> {
    let defined: Vec<F> = values.flatten().collect();
    if defined.is_empty() {
        return MetricSummary {
            mean: None,
            stddev: None,
            defined: 0,
        };
    }
    let n = F::cast_usize(defined.len());
    let mean = defined.iter().copied().sum::<F>() / n;
    let stddev = (defined.len() > 1).then(|| {
        let ss = defined.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>();
        (ss / (n - F::one())).sqrt()
    });
    MetricSummary {
        mean: Some(mean),
        stddev,
        defined: defined.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CrossValidation<F: Scalar> {
    pub folds: usize,
    pub repeats: usize,
    /// One report per (repeat, fold), repeat-major.
    pub reports: Vec<MetricReport<F>>,
    pub sensitivity: MetricSummary<F>,
    pub specificity: MetricSummary<F>,
    pub balanced_accuracy: MetricSummary<F>,
    pub kappa: MetricSummary<F>,
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin,
/// so every fold holds both classes whenever each class has at least `folds`
/// members. Returns `assignment[row] = fold`.
fn stratified_folds(table: &FeatureTable, folds: usize, seed: u64) -> Result<Vec<usize>> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, row) in table.rows.iter().enumerate() {
        by_class[row.label.code() as usize].push(i);
    }
    for (class, members) in [
        (DurationClass::ShortLived, &by_class[0]),
        (DurationClass::Extended, &by_class[1]),
    ] {
        if members.len() < folds {
            return Err(Error::ClassSmallerThanFolds {
                class: class.name(),
                count: members.len(),
                folds,
            });
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut assignment = vec![0usize; table.len()];
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        for (i, &row) in members.iter().enumerate() {
            assignment[row] = i % folds;
        }
    }
    Ok(assignment)
}

/// Repeat a stratified k-fold evaluation `repeats` times with reshuffled
/// folds. Fold cells run concurrently; each cell trains on its derived seed
/// and the reports are assembled in (repeat, fold) order, so the outcome is
/// independent of scheduling.
pub fn cross_validate<F: Scalar>(
    table: &FeatureTable,
    learner: &LearnerSpec,
    folds: usize,
    repeats: usize,
    seed: u64,
) -> Result<CrossValidation<F>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter(
            "repeats must be at least 1".to_string(),
        ));
    }
    let assignments: Vec<Vec<usize>> = (0..repeats)
        .map(|r| stratified_folds(table, folds, derive_seed(seed, &[r as u64])))
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..repeats)
        .flat_map(|r| (0..folds).map(move |f| (r, f)))
        .collect();
    let reports: Vec<MetricReport<F>> = cells
        .par_iter()
        .map(|&(r, f)| -> Result<MetricReport<F>> {
            let assignment = &assignments[r];
            let mut train_rows = Vec::new();
            let mut test_rows = Vec::new();
            for (i, row) in table.rows.iter().enumerate() {
                if assignment[i] == f {
                    test_rows.push(*row);
                } else {
                    train_rows.push(*row);
                }
            }
            let train = FeatureTable::new(train_rows, table.k)?;
            let test = FeatureTable::new(test_rows, table.k)?;
            let model = learner.fit(&train, derive_seed(seed, &[r as u64, f as u64]))?;
            Ok(evaluate_holdout(&model, &test)?.1)
        })
        .collect::<Result<_>>()?;

    Ok(CrossValidation {
        folds,
        repeats,
        sensitivity: summarize(reports.iter().map(|r| r.sensitivity)),
        specificity: summarize(reports.iter().map(|r| r.specificity)),
        balanced_accuracy: summarize(reports.iter().map(|r| r.balanced_accuracy)),
        kappa: summarize(reports.iter().map(|r| r.kappa)),
        reports,
    })
}

fn render_cell<F: Scalar>(value: Option<F>, percent: bool) -> String {
    match value {
        None => "undef".to_string(),
        Some(v) if percent => format!("{:.2}", v * F::cast_usize(100)),
        Some(v) => format!("{:.4}", v),
    }
}

/// Aligned plain-text table, metrics as rows and one column per named
/// report. Rates print as percentages, kappa as a decimal.
pub fn render_metrics_table<F: Scalar>(columns: &[(String, MetricReport<F>)]) -> String {
    type Accessor<F> = fn(&MetricReport<F>) -> Option<F>;
    let metric_rows: [(&str, Accessor<F>, bool); 4] = [
        ("Balanced accuracy", |r| r.balanced_accuracy, true),
        ("Kappa", |r| r.kappa, false),
        ("Sensitivity", |r| r.sensitivity, true),
        ("Specificity", |r| r.specificity, true),
    ];
    let label_width = metric_rows
        .iter()
        .map(|(n, _, _)| n.len())
        .max()
        .unwrap_or(0);
    let widths: Vec<usize> = columns
        .iter()
        .map(|(name, report)| {
            metric_rows
                .iter()
                .map(|(_, get, pct)| render_cell(get(report), *pct).len())
                .chain(std::iter::once(name.len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = format!("{:label_width$}", "Metric");
    for ((name, _), w) in columns.iter().zip(&widths) {
        out.push_str(&format!("  {name:>w$}"));
    }
    out.push('\n');
    for (name, get, pct) in metric_rows {
        out.push_str(&format!("{name:label_width$}"));
        for ((_, report), w) in columns.iter().zip(&widths) {
            out.push_str(&format!("  {:>w$}", render_cell(get(report), pct)));
        }
        out.push('\n');
    }
    out
}

/// Sorted map form of a report for JSON artifacts.
pub fn report_to_map<F: Scalar>(report: &MetricReport<F>) -> BTreeMap<&'static str, Option<F>> {
    BTreeMap::from([
        ("sensitivity", report.sensitivity),
        ("specificity", report.specificity),
        ("balanced_accuracy", report.balanced_accuracy),
        ("kappa", report.kappa),
    ])
}
