//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! The model state is pure integer counts: a K×V topic–word matrix and
//! per-topic totals. Point estimates are derived on demand:
//! φ_kw = (count + β) / (total_k + Vβ) and, during inference,
//! θ_dk = (doc_topic_count + α) / (N_d + Kα). Keeping counts integral makes
//! determinism and the conservation invariants directly checkable.

mod foldin;
mod gibbs;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use foldin::{infer_theta, perplexity, perplexity_with_mixtures};
pub use gibbs::{fit_gibbs, GibbsSampler};

/// Sampler settings. `alpha`/`beta` are symmetric Dirichlet priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LdaHyperparams<F: Scalar> {
    pub k: usize,
    pub alpha: F,
    pub beta: F,
    pub train_iterations: usize,
    /// Sweeps regarded as chain warm-up when reading the likelihood trace.
    /// The persisted counts are always the final sweep's state.
    pub burn_in: usize,
    pub seed: u64,
}

impl<F: Scalar> LdaHyperparams<F> {
    /// Conventional priors: α = 50/K, β = 0.1.
    pub fn with_default_priors(
        k: usize,
        train_iterations: usize,
        burn_in: usize,
        seed: u64,
    ) -> Self {
        Self {
            k,
            alpha: F::ratio(50, k.max(1)),
            beta: F::cast_f64(0.1),
            train_iterations,
            burn_in,
            seed,
        }
    }

    /// The single-topic case (K = 1) is allowed: it is the degenerate model
    /// whose φ is the smoothed corpus unigram distribution. Model-count
    /// sweeps reject K < 2 at their own boundary.
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("K must be ≥ 1".to_string()));
        }
        if self.alpha <= F::zero() || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(
                "alpha must be finite and > 0".to_string(),
            ));
        }
        if self.beta <= F::zero() || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(
                "beta must be finite and > 0".to_string(),
            ));
        }
        if self.train_iterations <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "train_iterations ({}) must exceed burn_in ({})",
                self.train_iterations, self.burn_in
            )));
        }
        Ok(())
    }
}

/// Fold-in settings for held-out inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldInParams {
    pub iterations: usize,
    pub burn_in: usize,
}

impl Default for FoldInParams {
    fn default() -> Self {
        Self {
            iterations: 100,
            burn_in: 50,
        }
    }
}

impl FoldInParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "fold-in iterations ({}) must exceed burn_in ({})",
                self.iterations, self.burn_in
            )));
        }
        Ok(())
    }
}

/// Trained topic model: hyperparameters plus the final sweep's counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LdaModel<F: Scalar> {
    pub hyper: LdaHyperparams<F>,
    vocab_size: usize,
    /// K×V row-major.
    topic_word_counts: Vec<u32>,
    topic_totals: Vec<u64>,
    /// Per-sweep per-token plug-in log-likelihood of the training corpus.
    pub train_log_likelihood: Vec<F>,
}

impl<F: Scalar> LdaModel<F> {
    /// Assemble a model from explicit counts (totals are derived).
    pub fn from_counts(
        hyper: LdaHyperparams<F>,
        vocab_size: usize,
        topic_word_counts: Vec<u32>,
    ) -> Result<Self> {
        hyper.validate()?;
        if topic_word_counts.len() != hyper.k * vocab_size {
            return Err(Error::InvalidParameter(format!(
                "count matrix has {} entries, expected K×V = {}",
                topic_word_counts.len(),
                hyper.k * vocab_size
            )));
        }
        let topic_totals = (0..hyper.k)
            .map(|k| {
                topic_word_counts[k * vocab_size..(k + 1) * vocab_size]
                    .iter()
                    .map(|&c| u64::from(c))
                    .sum()
            })
            .collect();
        Ok(Self {
            hyper,
            vocab_size,
            topic_word_counts,
            topic_totals,
            train_log_likelihood: Vec::new(),
        })
    }

    pub(crate) fn from_parts(
        hyper: LdaHyperparams<F>,
        vocab_size: usize,
        topic_word_counts: Vec<u32>,
        topic_totals: Vec<u64>,
        train_log_likelihood: Vec<F>,
    ) -> Self {
        Self {
            hyper,
            vocab_size,
            topic_word_counts,
            topic_totals,
            train_log_likelihood,
        }
    }

    pub fn k(&self) -> usize {
        self.hyper.k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn word_count(&self, topic: usize, word: usize) -> u32 {
        self.topic_word_counts[topic * self.vocab_size + word]
    }

    pub fn topic_total(&self, topic: usize) -> u64 {
        self.topic_totals[topic]
    }

    pub fn total_tokens(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    /// Smoothed topic–word distribution for one topic.
    pub fn phi_row(&self, topic: usize) -> Vec<F> {
        let v = F::cast_usize(self.vocab_size);
        let denom = F::cast_u64(self.topic_totals[topic]) + v * self.hyper.beta;
        self.topic_word_counts[topic * self.vocab_size..(topic + 1) * self.vocab_size]
            .iter()
            .map(|&c| (F::cast_u64(u64::from(c)) + self.hyper.beta) / denom)
            .collect()
    }

    pub fn phi(&self) -> Vec<Vec<F>> {
        (0..self.k()).map(|k| self.phi_row(k)).collect()
    }

    /// Structural invariants: row sums match totals, totals match the
    /// expected token count when given, φ rows normalize.
    pub fn check_invariants(
        &self,
        expected_tokens: Option<u64>,
    ) -> std::result::Result<(), String> {
        for k in 0..self.k() {
            let sum: u64 = self.topic_word_counts[k * self.vocab_size..(k + 1) * self.vocab_size]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            if sum != self.topic_totals[k] {
                return Err(format!(
                    "topic {k}: row sum {sum} ≠ stored total {}",
                    self.topic_totals[k]
                ));
            }
            let phi_sum: F = self.phi_row(k).into_iter().sum();
            if (phi_sum - F::one()).abs() > normalization_tolerance::<F>(self.vocab_size) {
                return Err(format!("topic {k}: φ sums to {phi_sum}, not 1"));
            }
        }
        if let Some(expected) = expected_tokens {
            let total = self.total_tokens();
            if total != expected {
                return Err(format!("token total {total} ≠ expected {expected}"));
            }
        }
        Ok(())
    }

    /// Relabel topics: old topic k becomes topic `perm[k]`. `perm` must be a
    /// bijection on 0..K.
    pub fn permute_topics(&self, perm: &[usize]) -> Result<Self> {
        validate_permutation(perm, self.k())?;
        let v = self.vocab_size;
        let mut counts = vec![0u32; self.topic_word_counts.len()];
        let mut totals = vec![0u64; self.k()];
        for (old, &new) in perm.iter().enumerate() {
            counts[new * v..(new + 1) * v]
                .copy_from_slice(&self.topic_word_counts[old * v..(old + 1) * v]);
            totals[new] = self.topic_totals[old];
        }
        Ok(Self {
            hyper: self.hyper.clone(),
            vocab_size: v,
            topic_word_counts: counts,
            topic_totals: totals,
            train_log_likelihood: self.train_log_likelihood.clone(),
        })
    }

    /// Training-set plug-in perplexity after a given 1-based sweep number.
    pub fn train_perplexity_at(&self, sweep: usize) -> Option<F> {
        self.train_log_likelihood
            .get(sweep.checked_sub(1)?)
            .map(|&ll| (-ll).exp())
    }
}

/// Inferred document–topic mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DocTopicMixture<F: Scalar> {
    pub theta: Vec<F>,
    /// Set when the document had no in-vocabulary tokens and the mixture is
    /// the uniform prior fallback.
    pub uninformative: bool,
}

impl<F: Scalar> DocTopicMixture<F> {
    pub fn uniform(k: usize) -> Self {
        Self {
            theta: vec![F::ratio(1, k); k],
            uninformative: true,
        }
    }

    /// Relabel topics with the same convention as
    /// [`LdaModel::permute_topics`].
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        validate_permutation(perm, self.theta.len())?;
        let mut theta = vec![F::zero(); self.theta.len()];
        for (old, &new) in perm.iter().enumerate() {
            theta[new] = self.theta[old];
        }
        Ok(Self {
            theta,
            uninformative: self.uninformative,
        })
    }
}

/// One topic's top-ranked vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TopicSummary<F: Scalar> {
    pub topic_id: usize,
    /// The modal token; how topics are referred to in reports.
    pub name: String,
    /// (token, φ probability), non-increasing; count ties broken by lower
    /// word id.
    pub top_words: Vec<(String, F)>,
}

/// Name every topic by its highest-probability tokens.
pub fn summarize_topics<F: Scalar>(
    model: &LdaModel<F>,
    vocab: &Vocabulary,
    top_n: usize,
) -> Result<Vec<TopicSummary<F>>> {
    if vocab.len() != model.vocab_size() {
        return Err(Error::InvalidParameter(format!(
            "vocabulary size {} does not match model V={}",
            vocab.len(),
            model.vocab_size()
        )));
    }
    if top_n == 0 || top_n > model.vocab_size() {
        return Err(Error::InvalidParameter(format!(
            "top_n must be in 1..=V={}, got {top_n}",
            model.vocab_size()
        )));
    }
    let mut out = Vec::with_capacity(model.k());
    for k in 0..model.k() {
        let phi = model.phi_row(k);
        // φ is monotone in the integer count within a row, so ranking by
        // (count desc, id asc) is exact and avoids float ties.
        let mut order: Vec<usize> = (0..model.vocab_size()).collect();
        order.sort_by_key(|&w| (std::cmp::Reverse(model.word_count(k, w)), w));
        let top_words: Vec<(String, F)> = order[..top_n]
            .iter()
            .map(|&w| (vocab.token(w as u32).expect("id < V").to_string(), phi[w]))
            .collect();
        out.push(TopicSummary {
            topic_id: k,
            name: top_words[0].0.clone(),
            top_words,
        });
    }
    Ok(out)
}

pub const LDA_FORMAT_VERSION: u32 = 1;

/// On-disk model document: model plus the vocabulary it indexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LdaModelFile<F: Scalar> {
    pub format_version: u32,
    pub model: LdaModel<F>,
    pub vocabulary: Vocabulary,
}

impl<F: Scalar> LdaModelFile<F> {
    pub fn new(model: LdaModel<F>, vocabulary: Vocabulary) -> Result<Self> {
        if vocabulary.len() != model.vocab_size() {
            return Err(Error::InvalidParameter(format!(
                "vocabulary size {} does not match model V={}",
                vocabulary.len(),
                model.vocab_size()
            )));
        }
        Ok(Self {
            format_version: LDA_FORMAT_VERSION,
            model,
            vocabulary,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(json)?;
        if file.format_version != LDA_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: file.format_version,
                expected: LDA_FORMAT_VERSION,
            });
        }
        Ok(file)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&json)
    }
}

fn validate_permutation(perm: &[usize], k: usize) -> Result<()> {
    if perm.len() != k {
        return Err(Error::InvalidParameter(format!(
            "permutation length {} ≠ K = {k}",
            perm.len()
        )));
    }
    let mut seen = vec![false; k];
    for &p in perm {
        if p >= k || seen[p] {
            return Err(Error::InvalidParameter(
                "permutation is not a bijection on 0..K".to_string(),
            ));
        }
        seen[p] = true;
    }
    Ok(())
}

fn normalization_tolerance<F: Scalar>(terms: usize) -> F {
    let fp = F::epsilon() * F::cast_usize(terms.max(1)) * F::cast_f64(8.0);
    F::cast_f64(1e-9).max(fp)
}

/// Sum after sorting ascending. Makes mixture sums bit-identical under any
/// permutation of the addends, which the topic-relabeling invariance test
/// relies on.
pub(crate) fn sorted_sum<F: Scalar>(buf: &mut [F]) -> F {
    buf.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite addends"));
    let mut acc = F::zero();
    for &x in buf.iter() {
        acc += x;
    }
    acc
}
