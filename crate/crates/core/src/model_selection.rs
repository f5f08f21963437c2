//! Topic-count selection by cross-validated held-out perplexity.
//!
//! Candidate topic counts are swept over a fold partition that is fixed
//! before any model is trained, so every k is scored on identical
//! train/held-out splits (a paired comparison). Each fold rebuilds the
//! vocabulary from its training documents; held-out words unseen in
//! training are dropped rather than leaked.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusMatrix;
use crate::error::{Error, Result};
use crate::lda::{fit_gibbs, perplexity, FoldInParams, LdaHyperparams};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;

/// Hyperparameter template applied to every candidate k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SweepSettings<F: Scalar> {
    /// Fixed document-topic prior, or `None` for the 50/k heuristic.
    pub alpha: Option<F>,
    pub beta: F,
    pub train_iterations: usize,
    pub burn_in: usize,
    pub fold_in: FoldInParams,
}

impl<F: Scalar> Default for SweepSettings<F> {
    fn default() -> Self {
        Self {
            alpha: None,
            beta: F::cast_f64(0.1),
            train_iterations: 1000,
            burn_in: 200,
            fold_in: FoldInParams::default(),
        }
    }
}

impl<F: Scalar> SweepSettings<F> {
    fn hyper_for(&self, k: usize, seed: u64) -> LdaHyperparams<F> {
        LdaHyperparams {
            k,
            alpha: self.alpha.unwrap_or_else(|| F::ratio(50, k)),
            beta: self.beta,
            train_iterations: self.train_iterations,
            burn_in: self.burn_in,
            seed,
        }
    }
}

/// Cross-validated perplexity per candidate topic count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PerplexityCurve<F: Scalar> {
    pub k_values: Vec<usize>,
    pub folds: usize,
    /// k → one perplexity per fold, in fold order.
    pub per_fold: BTreeMap<usize, Vec<F>>,
    /// k → arithmetic mean over folds.
    pub mean: BTreeMap<usize, F>,
}

impl<F: Scalar> PerplexityCurve<F> {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() {
            return Err(Error::InvalidParameter(
                "empty perplexity curve".to_string(),
            ));
        }
        for &k in &self.k_values {
            let scores = self
                .per_fold
                .get(&k)
                .ok_or_else(|| Error::InvalidParameter(format!("curve missing k = {k}")))?;
            if scores.len() != self.folds {
                return Err(Error::InvalidParameter(format!(
                    "k = {k} has {} fold scores, expected {}",
                    scores.len(),
                    self.folds
                )));
            }
            let mean = self.mean.get(&k).ok_or_else(|| {
                Error::InvalidParameter(format!("curve missing mean for k = {k}"))
            })?;
            if !mean.is_finite() || scores.iter().any(|s| !s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite perplexity at k = {k}"
                )));
            }
        }
        Ok(())
    }

    /// `k,fold,perplexity` rows, k-major then fold order.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "fold", "perplexity"])?;
        for &k in &self.k_values {
            for (fold, score) in self.per_fold[&k].iter().enumerate() {
                w.write_record([k.to_string(), fold.to_string(), format!("{score}")])?;
            }
        }
        w.flush().map_err(|e| Error::Io {
            path: "<perplexity csv>".into(),
            source: e,
        })?;
        Ok(())
    }

    /// JSON summary of the sweep: the curve plus the selected k.
    pub fn summary_json(&self) -> Result<String> {
        let selected = select_k(self)?;
        let value = serde_json::json!({
            "k_values": self.k_values,
            "folds": self.folds,
            "mean_perplexity": serde_json::to_value(&self.mean)?,
            "per_fold_perplexity": serde_json::to_value(&self.per_fold)?,
            "selected_k": selected,
        });
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

/// Shuffle documents once by seed and deal them round-robin into `folds`
/// groups (each sorted ascending). Depends only on (num_docs, folds, seed) —
/// never on the candidate k — so sweep comparisons are paired.
pub fn fold_partition(num_docs: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..num_docs).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(seed, &[0xF01D])));
    let mut parts = vec![Vec::with_capacity(num_docs / folds + 1); folds];
    for (i, d) in order.into_iter().enumerate() {
        parts[i % folds].push(d);
    }
    for part in &mut parts {
        part.sort_unstable();
    }
    parts
}

/// Fit and score every (k, fold) cell. Cells run as independent parallel
/// jobs with per-cell derived seeds and are merged in (k, fold) order, so
/// the result is deterministic regardless of thread count.
pub fn sweep_topics<F: Scalar>(
    matrix: &CorpusMatrix,
    k_values: &[usize],
    folds: usize,
    settings: &SweepSettings<F>,
    seed: u64,
) -> Result<PerplexityCurve<F>> {
    let mut ks: Vec<usize> = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::InvalidParameter("empty candidate list".to_string()));
    }
    if let Some(&bad) = ks.iter().find(|&&k| k < 2) {
        return Err(Error::InvalidParameter(format!(
            "candidate topic counts must be at least 2, got {bad}"
        )));
    }
    if folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    if folds > matrix.num_docs() {
        return Err(Error::InvalidParameter(format!(
            "{folds} folds over {} documents would leave empty held-out sets",
            matrix.num_docs()
        )));
    }
    settings.hyper_for(ks[0], 0).validate()?;
    settings.fold_in.validate()?;

    let partition = fold_partition(matrix.num_docs(), folds, seed);
    let splits: Vec<(Vec<usize>, &Vec<usize>)> = partition
        .iter()
        .map(|held| {
            let mut in_fold = vec![false; matrix.num_docs()];
            for &d in held {
                in_fold[d] = true;
            }
            let train: Vec<usize> = (0..matrix.num_docs()).filter(|&d| !in_fold[d]).collect();
            (train, held)
        })
        .collect();

    let cells: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..folds).map(move |f| (k, f)))
        .collect();
    let scores: Vec<F> = cells
        .par_iter()
        .map(|&(k, fold)| -> Result<F> {
            let (train, held) = &splits[fold];
            let observed = matrix.observed_words(train);
            let mut word_map = vec![None; matrix.vocab_size()];
            let mut next = 0u32;
            for (old, seen) in observed.iter().enumerate() {
                if *seen {
                    word_map[old] = Some(next);
                    next += 1;
                }
            }
            let train_matrix = matrix.project(train, &word_map, next as usize);
            let held_matrix = matrix.project(held, &word_map, next as usize);
            let hyper = settings.hyper_for(k, derive_seed(seed, &[1, k as u64, fold as u64]));
            let model = fit_gibbs(&train_matrix, hyper)?;
            perplexity(
                &model,
                &held_matrix,
                &settings.fold_in,
                derive_seed(seed, &[2, k as u64, fold as u64]),
            )
        })
        .collect::<Result<Vec<F>>>()?;

    let mut per_fold: BTreeMap<usize, Vec<F>> = BTreeMap::new();
    for (&(k, _), &score) in cells.iter().zip(&scores) {
        per_fold.entry(k).or_default().push(score);
    }
    let mean: BTreeMap<usize, F> = per_fold
        .iter()
        .map(|(&k, scores)| (k, scores.iter().copied().sum::<F>() / F::cast_usize(folds)))
        .collect();
    let curve = PerplexityCurve {
        k_values: ks,
        folds,
        per_fold,
        mean,
    };
    curve.validate()?;
    Ok(curve)
}

/// Argmin of mean perplexity; ties break toward smaller k.
pub fn select_k<F: Scalar>(curve: &PerplexityCurve<F>) -> Result<usize> {
    curve.validate()?;
    let mut best: Option<(usize, F)> = None;
    for &k in &curve.k_values {
        let mean = curve.mean[&k];
        match best {
            Some((_, current)) if mean >= current => {}
            _ => best = Some((k, mean)),
        }
    }
    Ok(best.expect("validated non-empty").0)
}
