//! Held-out inference against a frozen model.
//!
//! Fold-in Gibbs: the model's topic–word counts stay fixed; only the
//! held-out document's own topic counts evolve. θ̂ is averaged over
//! post-burn-in sweeps. Perplexity is the plug-in estimate
//! exp(−Σ_d Σ_n log Σ_k θ̂_dk φ̂_kw / Σ_d N_d).

use crate::corpus::CorpusMatrix;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;

use rand::Rng;

use super::{sorted_sum, DocTopicMixture, FoldInParams, LdaModel};

/// Infer a topic mixture for one document's sparse counts. The model is not
/// mutated. An empty document yields the uniform mixture, flagged.
pub fn infer_theta<F: Scalar>(
    model: &LdaModel<F>,
    doc: &[(u32, u32)],
    params: &FoldInParams,
    seed: u64,
) -> Result<DocTopicMixture<F>> {
    params.validate()?;
    let k = model.k();
    let v = model.vocab_size();
    for &(w, _) in doc {
        if w as usize >= v {
            return Err(Error::InvalidParameter(format!(
                "word id {w} outside model vocabulary of size {v}"
            )));
        }
    }
    let n_d: u64 = doc.iter().map(|&(_, c)| u64::from(c)).sum();
    if n_d == 0 {
        return Ok(DocTopicMixture::uniform(k));
    }

    // φ values for just this document's distinct words, entry-major.
    let phi: Vec<Vec<F>> = doc
        .iter()
        .map(|&(w, _)| {
            (0..k)
                .map(|t| {
                    let denom =
                        F::cast_u64(model.topic_total(t)) + F::cast_usize(v) * model.hyper.beta;
                    (F::cast_u64(u64::from(model.word_count(t, w as usize))) + model.hyper.beta)
                        / denom
                })
                .collect()
        })
        .collect();

    // Token stream as entry indices.
    let mut tokens = Vec::with_capacity(n_d as usize);
    for (e, &(_, c)) in doc.iter().enumerate() {
        for _ in 0..c {
            tokens.push(e);
        }
    }

    let alpha = model.hyper.alpha;
    let k_alpha = F::cast_usize(k) * alpha;
    let n_d_f = F::cast_u64(n_d);
    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0u32; k];
    let mut assignments = Vec::with_capacity(tokens.len());
    for _ in &tokens {
        let z = rng.gen_range(0..k as u32);
        counts[z as usize] += 1;
        assignments.push(z);
    }

    let mut acc = vec![F::zero(); k];
    let mut weights = vec![F::zero(); k];
    let kept_sweeps = params.iterations - params.burn_in;
    for sweep in 1..=params.iterations {
        for (i, &e) in tokens.iter().enumerate() {
            let old = assignments[i] as usize;
            counts[old] -= 1;
            let mut total = F::zero();
            for (t, weight) in weights.iter_mut().enumerate() {
                let wt = (F::cast_u64(u64::from(counts[t])) + alpha) * phi[e][t];
                *weight = wt;
                total += wt;
            }
            let target = F::cast_f64(rng.gen::<f64>()) * total;
            let mut cum = F::zero();
            let mut new = k - 1;
            for (t, &weight) in weights.iter().enumerate() {
                cum += weight;
                if target < cum {
                    new = t;
                    break;
                }
            }
            assignments[i] = new as u32;
            counts[new] += 1;
        }
        if sweep > params.burn_in {
            for (t, a) in acc.iter_mut().enumerate() {
                *a += (F::cast_u64(u64::from(counts[t])) + alpha) / (n_d_f + k_alpha);
            }
        }
    }
    let scale = F::cast_usize(kept_sweeps);
    let theta: Vec<F> = acc.into_iter().map(|a| a / scale).collect();
    Ok(DocTopicMixture {
        theta,
        uninformative: false,
    })
}

/// Held-out perplexity with fold-in inference per document. Per-document
/// seeds are derived from `seed` by position, so document evaluations are
/// independent and order-insensitive.
pub fn perplexity<F: Scalar>(
    model: &LdaModel<F>,
    heldout: &CorpusMatrix,
    params: &FoldInParams,
    seed: u64,
) -> Result<F> {
    params.validate()?;
    let mixtures = (0..heldout.num_docs())
        .map(|d| {
            if heldout.is_doc_empty(d) {
                Ok(DocTopicMixture::uniform(model.k()))
            } else {
                infer_theta(
                    model,
                    heldout.doc(d),
                    params,
                    derive_seed(seed, &[d as u64]),
                )
            }
        })
        .collect::<Result<Vec<_>>>()?;
    perplexity_with_mixtures(model, &mixtures, heldout)
}

/// Plug-in perplexity with caller-supplied mixtures (one per held-out
/// document). The K addends of every mixture probability are summed in
/// ascending order, so relabeling topics consistently in (model, mixtures)
/// reproduces the result bit for bit.
pub fn perplexity_with_mixtures<F: Scalar>(
    model: &LdaModel<F>,
    mixtures: &[DocTopicMixture<F>],
    heldout: &CorpusMatrix,
) -> Result<F> {
    if heldout.num_docs() == 0 {
        return Err(Error::EmptyHeldout);
    }
    if heldout.vocab_size() != model.vocab_size() {
        return Err(Error::InvalidParameter(format!(
            "held-out vocabulary size {} ≠ model V = {}",
            heldout.vocab_size(),
            model.vocab_size()
        )));
    }
    if mixtures.len() != heldout.num_docs() {
        return Err(Error::InvalidParameter(format!(
            "{} mixtures for {} held-out documents",
            mixtures.len(),
            heldout.num_docs()
        )));
    }
    let total_tokens = heldout.total_tokens();
    if total_tokens == 0 {
        return Err(Error::EmptyHeldout);
    }

    let k = model.k();
    let phi = model.phi();
    let mut ll = F::zero();
    let mut buf = vec![F::zero(); k];
    for (d, mixture) in mixtures.iter().enumerate() {
        let theta = &mixture.theta;
        if theta.len() != k {
            return Err(Error::InvalidParameter(format!(
                "mixture {d} has {} entries, model K = {k}",
                theta.len()
            )));
        }
        for &(w, c) in heldout.doc(d) {
            for t in 0..k {
                buf[t] = theta[t] * phi[t][w as usize];
            }
            ll += F::cast_u64(u64::from(c)) * sorted_sum(&mut buf).ln();
        }
    }
    Ok((-ll / F::cast_u64(total_tokens)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lda::LdaHyperparams;

    /// K disjoint block topics: topic t owns words [t·span, (t+1)·span),
    /// each with the same count.
    fn block_model(k: usize, span: usize, count: u32) -> LdaModel<f64> {
        let v = k * span;
        let mut counts = vec![0u32; k * v];
        for t in 0..k {
            for w in t * span..(t + 1) * span {
                counts[t * v + w] = count;
            }
        }
        LdaModel::from_counts(LdaHyperparams::with_default_priors(k, 10, 2, 0), v, counts).unwrap()
    }

    fn uniform_model(k: usize, v: usize) -> LdaModel<f64> {
        LdaModel::from_counts(
            LdaHyperparams::with_default_priors(k, 10, 2, 0),
            v,
            vec![7u32; k * v],
        )
        .unwrap()
    }

    #[test]
    fn empty_doc_gives_uniform_flagged() {
        let model = block_model(4, 3, 50);
        let mix = infer_theta(&model, &[], &FoldInParams::default(), 1).unwrap();
        assert!(mix.uninformative);
        assert_eq!(mix.theta, vec![0.25; 4]);
    }

    #[test]
    fn planted_doc_recovers_its_topic() {
        let model = block_model(3, 3, 50);
        // Words 3..6 belong to topic 1.
        let doc = [(3u32, 5u32), (4, 4), (5, 6)];
        let mix = infer_theta(&model, &doc, &FoldInParams::default(), 42).unwrap();
        assert!(!mix.uninformative);
        let argmax = mix
            .theta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 1, "theta = {:?}", mix.theta);
        let sum: f64 = mix.theta.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(mix.theta.iter().all(|&t| t > 0.0));
    }

    #[test]
    fn oov_word_rejected() {
        let model = block_model(2, 2, 10);
        assert!(infer_theta(&model, &[(9, 1)], &FoldInParams::default(), 0).is_err());
    }

    #[test]
    fn uniform_phi_perplexity_equals_vocab_size() {
        for v in [2usize, 10, 100] {
            let model = uniform_model(3, v);
            let heldout = CorpusMatrix::from_sparse_rows(
                vec![vec![(0, 4), ((v - 1) as u32, 2)], vec![(1, 1)]],
                v,
            )
            .unwrap();
            let p = perplexity(&model, &heldout, &FoldInParams::default(), 9).unwrap();
            assert!((p - v as f64).abs() <= 1e-9, "V = {v}: perplexity {p}");
        }
    }

    #[test]
    fn single_word_vocabulary_perplexity_is_one() {
        let model = LdaModel::from_counts(
            LdaHyperparams::<f64>::with_default_priors(2, 10, 2, 0),
            1,
            vec![5, 3],
        )
        .unwrap();
        let heldout = CorpusMatrix::from_sparse_rows(vec![vec![(0, 6)]], 1).unwrap();
        let p = perplexity(&model, &heldout, &FoldInParams::default(), 3).unwrap();
        assert!((p - 1.0).abs() <= 1e-9, "perplexity {p}");
    }

    #[test]
    fn structured_model_beats_unigram_on_planted_data() {
        let k2 = block_model(2, 5, 60);
        // The matched unigram model: one topic holding the merged counts.
        let v = k2.vocab_size();
        let merged: Vec<u32> = (0..v).map(|w| k2.word_count(w / 5, w)).collect();
        let k1 = LdaModel::from_counts(
            LdaHyperparams::<f64>::with_default_priors(1, 10, 2, 0),
            v,
            merged,
        )
        .unwrap();

        let heldout = CorpusMatrix::from_sparse_rows(
            vec![
                vec![(0, 3), (1, 2), (2, 3), (3, 2), (4, 2)],
                vec![(5, 2), (6, 3), (7, 2), (8, 3), (9, 2)],
            ],
            v,
        )
        .unwrap();
        let params = FoldInParams::default();
        let p2 = perplexity(&k2, &heldout, &params, 17).unwrap();
        let p1 = perplexity(&k1, &heldout, &params, 17).unwrap();
        assert!(p2 < p1, "K=2 {p2} should beat K=1 {p1}");

        // Independent oracle for the K=1 path: θ is forced to (1.0), so the
        // plug-in formula reduces to the smoothed unigram log-likelihood.
        let phi = k1.phi_row(0);
        let mut ll = 0.0f64;
        let mut tokens = 0u64;
        for d in 0..heldout.num_docs() {
            for &(w, c) in heldout.doc(d) {
                ll += f64::from(c) * phi[w as usize].ln();
                tokens += u64::from(c);
            }
        }
        let expected = (-ll / tokens as f64).exp();
        assert!((p1 - expected).abs() < 1e-12, "{p1} vs oracle {expected}");
    }

    #[test]
    fn empty_heldout_is_an_error_not_nan() {
        let model = block_model(2, 2, 10);
        let all_empty =
            CorpusMatrix::from_sparse_rows(vec![vec![], vec![]], model.vocab_size()).unwrap();
        assert!(matches!(
            perplexity(&model, &all_empty, &FoldInParams::default(), 0),
            Err(Error::EmptyHeldout)
        ));
        let none = CorpusMatrix::from_sparse_rows(vec![], model.vocab_size()).unwrap();
        assert!(perplexity(&model, &none, &FoldInParams::default(), 0).is_err());
    }

    #[test]
    fn relabeling_topics_leaves_perplexity_bit_identical() {
        let model = block_model(4, 3, 25);
        let heldout = CorpusMatrix::from_sparse_rows(
            vec![vec![(0, 2), (4, 3), (8, 1)], vec![(2, 2), (11, 4)]],
            model.vocab_size(),
        )
        .unwrap();
        let params = FoldInParams::default();
        let mixtures: Vec<_> = (0..heldout.num_docs())
            .map(|d| {
                infer_theta(
                    &model,
                    heldout.doc(d),
                    &params,
                    derive_seed(77, &[d as u64]),
                )
                .unwrap()
            })
            .collect();
        let base = perplexity_with_mixtures(&model, &mixtures, &heldout).unwrap();

        let perm = [2usize, 3, 1, 0];
        let permuted_model = model.permute_topics(&perm).unwrap();
        let permuted_mixtures: Vec<_> =
            mixtures.iter().map(|m| m.permute(&perm).unwrap()).collect();
        let permuted =
            perplexity_with_mixtures(&permuted_model, &permuted_mixtures, &heldout).unwrap();
        assert_eq!(base.to_bits(), permuted.to_bits());
    }

    #[test]
    fn mismatched_vocab_rejected() {
        let model = block_model(2, 2, 10);
        let heldout = CorpusMatrix::from_sparse_rows(vec![vec![(0, 1)]], 3).unwrap();
        assert!(perplexity(&model, &heldout, &FoldInParams::default(), 0).is_err());
    }
}
