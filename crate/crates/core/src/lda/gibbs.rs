//! Collapsed Gibbs sampling for LDA.
//!
//! θ and φ are integrated out; the chain state is one topic assignment per
//! token plus the derived count tables. A token's topic is resampled from
//!
//! p(z = k | rest) ∝ (n_dk + α) · (n_kw + β) / (n_k + Vβ)
//!
//! where all counts exclude the token itself. One sweep resamples every
//! token once, in document order and token order, so a fixed seed fixes the
//! whole chain.

use crate::corpus::CorpusMatrix;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, PortableRng};
use crate::scalar::Scalar;

use rand::Rng;

use super::{sorted_sum, LdaHyperparams, LdaModel};

/// Stepping-level sampler; [`fit_gibbs`] is the run-to-completion wrapper.
pub struct GibbsSampler<'a, F: Scalar> {
    matrix: &'a CorpusMatrix,
    hyper: LdaHyperparams<F>,
    vocab_size: usize,
    /// M×K row-major.
    doc_topic: Vec<u32>,
    /// K×V row-major.
    topic_word: Vec<u32>,
    topic_totals: Vec<u64>,
    /// Token word-ids, all documents concatenated.
    tokens: Vec<u32>,
    /// Topic assignment per token, parallel to `tokens`.
    assignments: Vec<u32>,
    /// Document d's tokens live at `doc_offsets[d]..doc_offsets[d+1]`.
    doc_offsets: Vec<usize>,
    total_tokens: u64,
    rng: PortableRng,
    sweeps_done: usize,
    ll_trace: Vec<F>,
}

impl<'a, F: Scalar> GibbsSampler<'a, F> {
    pub fn new(matrix: &'a CorpusMatrix, hyper: LdaHyperparams<F>) -> Result<Self> {
        hyper.validate()?;
        if matrix.num_docs() == 0 {
            return Err(Error::Degenerate("corpus has no documents".to_string()));
        }
        if matrix.vocab_size() < 2 {
            return Err(Error::Degenerate(format!(
                "vocabulary size {} < 2",
                matrix.vocab_size()
            )));
        }
        let total_tokens = matrix.total_tokens();
        if hyper.k as u64 > total_tokens {
            return Err(Error::Degenerate(format!(
                "K = {} exceeds the corpus token count {total_tokens}",
                hyper.k
            )));
        }

        let k = hyper.k;
        let v = matrix.vocab_size();
        let mut tokens = Vec::with_capacity(total_tokens as usize);
        let mut doc_offsets = Vec::with_capacity(matrix.num_docs() + 1);
        doc_offsets.push(0);
        for d in 0..matrix.num_docs() {
            for &(word, count) in matrix.doc(d) {
                for _ in 0..count {
                    tokens.push(word);
                }
            }
            doc_offsets.push(tokens.len());
        }

        let mut rng = rng_from_seed(hyper.seed);
        let mut doc_topic = vec![0u32; matrix.num_docs() * k];
        let mut topic_word = vec![0u32; k * v];
        let mut topic_totals = vec![0u64; k];
        let mut assignments = Vec::with_capacity(tokens.len());
        for d in 0..matrix.num_docs() {
            for i in doc_offsets[d]..doc_offsets[d + 1] {
                let z = rng.gen_range(0..k as u32);
                assignments.push(z);
                doc_topic[d * k + z as usize] += 1;
                topic_word[z as usize * v + tokens[i] as usize] += 1;
                topic_totals[z as usize] += 1;
            }
        }

        let mut sampler = Self {
            matrix,
            hyper,
            vocab_size: v,
            doc_topic,
            topic_word,
            topic_totals,
            tokens,
            assignments,
            doc_offsets,
            total_tokens,
            rng,
            sweeps_done: 0,
            ll_trace: Vec::new(),
        };
        sampler.ll_trace.reserve(sampler.hyper.train_iterations);
        Ok(sampler)
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    pub fn log_likelihood_trace(&self) -> &[F] {
        &self.ll_trace
    }

    /// Resample every token once and record the post-sweep training
    /// log-likelihood.
    pub fn sweep(&mut self) {
        let k = self.hyper.k;
        let v = self.vocab_size;
        let alpha = self.hyper.alpha;
        let beta = self.hyper.beta;
        let v_beta = F::cast_usize(v) * beta;
        let mut weights = vec![F::zero(); k];

        for d in 0..self.matrix.num_docs() {
            let dt = d * k;
            for i in self.doc_offsets[d]..self.doc_offsets[d + 1] {
                let w = self.tokens[i] as usize;
                let old = self.assignments[i] as usize;
                self.doc_topic[dt + old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = F::zero();
                for (t, weight) in weights.iter_mut().enumerate() {
                    let wt = (F::cast_u64(u64::from(self.doc_topic[dt + t])) + alpha)
                        * (F::cast_u64(u64::from(self.topic_word[t * v + w])) + beta)
                        / (F::cast_u64(self.topic_totals[t]) + v_beta);
                    *weight = wt;
                    total += wt;
                }
                let target = F::cast_f64(self.rng.gen::<f64>()) * total;
                let mut cum = F::zero();
                let mut new = k - 1;
                for (t, &weight) in weights.iter().enumerate() {
                    cum += weight;
                    if target < cum {
                        new = t;
                        break;
                    }
                }

                self.assignments[i] = new as u32;
                self.doc_topic[dt + new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_totals[new] += 1;
            }
        }
        self.sweeps_done += 1;
        let ll = self.per_token_log_likelihood();
        self.ll_trace.push(ll);
    }

    /// Plug-in per-token log-likelihood of the training corpus under the
    /// current counts.
    fn per_token_log_likelihood(&self) -> F {
        let k = self.hyper.k;
        let v = self.vocab_size;
        let alpha = self.hyper.alpha;
        let beta = self.hyper.beta;
        let v_beta = F::cast_usize(v) * beta;
        let k_alpha = F::cast_usize(k) * alpha;
        let phi_denom: Vec<F> = self
            .topic_totals
            .iter()
            .map(|&t| F::cast_u64(t) + v_beta)
            .collect();

        let mut ll = F::zero();
        let mut theta = vec![F::zero(); k];
        let mut buf = vec![F::zero(); k];
        for d in 0..self.matrix.num_docs() {
            if self.matrix.is_doc_empty(d) {
                continue;
            }
            let n_d = F::cast_u64(u64::from(self.matrix.doc_total(d)));
            for (t, th) in theta.iter_mut().enumerate() {
                *th = (F::cast_u64(u64::from(self.doc_topic[d * k + t])) + alpha) / (n_d + k_alpha);
            }
            for &(w, c) in self.matrix.doc(d) {
                for t in 0..k {
                    buf[t] = theta[t]
                        * (F::cast_u64(u64::from(self.topic_word[t * v + w as usize])) + beta)
                        / phi_denom[t];
                }
                ll += F::cast_u64(u64::from(c)) * sorted_sum(&mut buf).ln();
            }
        }
        ll / F::cast_u64(self.total_tokens)
    }

    /// Conservation and normalization checks over the live chain state.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let k = self.hyper.k;
        let v = self.vocab_size;
        for d in 0..self.matrix.num_docs() {
            let sum: u64 = self.doc_topic[d * k..(d + 1) * k]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            if sum != u64::from(self.matrix.doc_total(d)) {
                return Err(format!(
                    "doc {d}: topic counts sum to {sum}, N_d = {}",
                    self.matrix.doc_total(d)
                ));
            }
        }
        let mut grand = 0u64;
        for t in 0..k {
            let sum: u64 = self.topic_word[t * v..(t + 1) * v]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            if sum != self.topic_totals[t] {
                return Err(format!(
                    "topic {t}: word counts sum to {sum}, total = {}",
                    self.topic_totals[t]
                ));
            }
            grand += sum;
        }
        if grand != self.total_tokens {
            return Err(format!(
                "topic totals sum to {grand}, corpus has {} tokens",
                self.total_tokens
            ));
        }

        let tol = super::normalization_tolerance::<F>(v.max(k));
        let alpha = self.hyper.alpha;
        let beta = self.hyper.beta;
        let k_alpha = F::cast_usize(k) * alpha;
        let v_beta = F::cast_usize(v) * beta;
        for t in 0..k {
            let denom = F::cast_u64(self.topic_totals[t]) + v_beta;
            let phi_sum: F = self.topic_word[t * v..(t + 1) * v]
                .iter()
                .map(|&c| (F::cast_u64(u64::from(c)) + beta) / denom)
                .sum();
            if (phi_sum - F::one()).abs() > tol {
                return Err(format!("topic {t}: φ sums to {phi_sum}"));
            }
        }
        for d in 0..self.matrix.num_docs() {
            let n_d = F::cast_u64(u64::from(self.matrix.doc_total(d)));
            let theta_sum: F = self.doc_topic[d * k..(d + 1) * k]
                .iter()
                .map(|&c| (F::cast_u64(u64::from(c)) + alpha) / (n_d + k_alpha))
                .sum();
            if (theta_sum - F::one()).abs() > tol {
                return Err(format!("doc {d}: θ sums to {theta_sum}"));
            }
        }
        Ok(())
    }

    /// Freeze the chain into a model.
    pub fn into_model(self) -> LdaModel<F> {
        LdaModel::from_parts(
            self.hyper,
            self.vocab_size,
            self.topic_word,
            self.topic_totals,
            self.ll_trace,
        )
    }
}

/// Train to completion: `hyper.train_iterations` sweeps from a fresh chain.
pub fn fit_gibbs<F: Scalar>(
    matrix: &CorpusMatrix,
    hyper: LdaHyperparams<F>,
) -> Result<LdaModel<F>> {
    let iterations = hyper.train_iterations;
    let mut sampler = GibbsSampler::new(matrix, hyper)?;
    for _ in 0..iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}
