//! Top-topic categorical features.
//!
//! Each document is represented by the ids of its four most probable topics
//! in rank order, plus the binary duration label: an N×5 modeling table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusMatrix, DurationClass};
use crate::error::{Error, Result};
use crate::lda::{infer_theta, FoldInParams, LdaModel};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

pub const NUM_TOP_TOPICS: usize = 4;

/// One document's feature vector: rank-ordered top topic ids plus label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub doc_id: u32,
    /// Largest, 2nd, 3rd, 4th most probable topic — position matters.
    pub top_topics: [u32; NUM_TOP_TOPICS],
    pub label: DurationClass,
}

/// The labeled modeling table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
    /// Topic-id domain size; every feature value is < k.
    pub k: usize,
}

impl FeatureTable {
    pub fn new(rows: Vec<FeatureRow>, k: usize) -> Result<Self> {
        let table = Self { rows, k };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            if row.top_topics.iter().any(|&t| t as usize >= self.k) {
                return Err(Error::InvalidParameter(format!(
                    "doc {}: topic id outside 0..{}",
                    row.doc_id, self.k
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (ShortLived count, Extended count).
    pub fn class_counts(&self) -> (usize, usize) {
        let extended = self
            .rows
            .iter()
            .filter(|r| r.label == DurationClass::Extended)
            .count();
        (self.rows.len() - extended, extended)
    }

    /// Sorted unique doc ids present in the table.
    pub fn doc_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.rows.iter().map(|r| r.doc_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["doc_id", "t1", "t2", "t3", "t4", "label"])?;
        for row in &self.rows {
            w.write_record([
                row.doc_id.to_string(),
                row.top_topics[0].to_string(),
                row.top_topics[1].to_string(),
                row.top_topics[2].to_string(),
                row.top_topics[3].to_string(),
                row.label.code().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<feature csv>".into(),
            source: e,
        })?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R, k: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for record in r.deserialize() {
            let (doc_id, t1, t2, t3, t4, label): (u32, u32, u32, u32, u32, u8) = record?;
            rows.push(FeatureRow {
                doc_id,
                top_topics: [t1, t2, t3, t4],
                label: DurationClass::from_code(label)?,
            });
        }
        Self::new(rows, k)
    }
}

/// Ids of the `m` largest entries of `theta`, in descending-probability
/// order. Exactly equal values rank by smaller id, so relabeling equivariance
/// is exact only for tie-free mixtures (averaged fold-in estimates are
/// tie-free in practice; the uniform empty-doc fallback is all ties and
/// yields `[0, 1, 2, 3]` by construction).
pub fn top_topics<F: Scalar>(theta: &[F], m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > theta.len() {
        return Err(Error::InvalidParameter(format!(
            "need K ≥ m ≥ 1, got K = {}, m = {m}",
            theta.len()
        )));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(
            "theta contains non-finite entries".to_string(),
        ));
    }
    let mut idx: Vec<usize> = (0..theta.len()).collect();
    idx.sort_by(|&a, &b| {
        theta[b]
            .partial_cmp(&theta[a])
            .expect("finite entries")
            .then(a.cmp(&b))
    });
    idx.truncate(m);
    Ok(idx)
}

/// Infer every document's mixture against `model` and assemble the table.
/// Document `d` uses the derived seed `(seed, d)`, so rows are reproducible
/// individually and the construction parallelizes without reordering
/// effects. `doc_id` is the matrix row index.
pub fn build_table<F: Scalar>(
    matrix: &CorpusMatrix,
    labels: &[DurationClass],
    model: &LdaModel<F>,
    params: &FoldInParams,
    seed: u64,
) -> Result<FeatureTable> {
    if labels.len() != matrix.num_docs() {
        return Err(Error::MisalignedLabels {
            rows: matrix.num_docs(),
            labels: labels.len(),
        });
    }
    if model.k() < NUM_TOP_TOPICS {
        return Err(Error::InvalidParameter(format!(
            "model has K = {} topics; the feature representation needs at least {NUM_TOP_TOPICS}",
            model.k()
        )));
    }
    if matrix.vocab_size() != model.vocab_size() {
        return Err(Error::InvalidParameter(format!(
            "matrix vocabulary size {} ≠ model V = {}",
            matrix.vocab_size(),
            model.vocab_size()
        )));
    }
    params.validate()?;

    let rows = (0..matrix.num_docs())
        .into_par_iter()
        .map(|d| -> Result<FeatureRow> {
            let mixture = if matrix.is_doc_empty(d) {
                crate::lda::DocTopicMixture::uniform(model.k())
            } else {
                infer_theta(model, matrix.doc(d), params, derive_seed(seed, &[d as u64]))?
            };
            let top = top_topics(&mixture.theta, NUM_TOP_TOPICS)?;
            Ok(FeatureRow {
                doc_id: d as u32,
                top_topics: [top[0] as u32, top[1] as u32, top[2] as u32, top[3] as u32],
                label: labels[d],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureTable::new(rows, model.k())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lda::{DocTopicMixture, LdaHyperparams};

    #[test]
    fn top_topics_examples() {
        assert_eq!(
            top_topics(&[0.1, 0.5, 0.3, 0.06, 0.04], 4).unwrap(),
            vec![1, 2, 0, 3]
        );
        assert_eq!(top_topics(&[0.2; 5], 4).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(
            top_topics(&[3.0, 1.0, 7.0, 2.0, 2.0], 4).unwrap(),
            vec![2, 0, 3, 4]
        );
        assert!(top_topics(&[0.5, 0.5], 4).is_err());
        assert!(top_topics(&[0.5, f64::NAN], 2).is_err());
    }

    #[test]
    fn top_topics_scale_invariant() {
        let theta = [0.07, 0.19, 0.02, 0.31, 0.41];
        let scaled: Vec<f64> = theta.iter().map(|t| t * 3.75).collect();
        assert_eq!(
            top_topics(&theta, 4).unwrap(),
            top_topics(&scaled, 4).unwrap()
        );
    }

    #[test]
    fn top_topics_permutation_equivariant_without_ties() {
        let mix = DocTopicMixture {
            theta: vec![0.05, 0.40, 0.25, 0.18, 0.12],
            uninformative: false,
        };
        let perm = [3usize, 0, 4, 1, 2];
        let permuted = mix.permute(&perm).unwrap();
        let base = top_topics(&mix.theta, 4).unwrap();
        let mapped: Vec<usize> = base.iter().map(|&t| perm[t]).collect();
        assert_eq!(top_topics(&permuted.theta, 4).unwrap(), mapped);
    }

    fn block_model(k: usize, span: usize) -> LdaModel<f64> {
        let v = k * span;
        let mut counts = vec![0u32; k * v];
        for t in 0..k {
            for w in t * span..(t + 1) * span {
                counts[t * v + w] = 40;
            }
        }
        LdaModel::from_counts(LdaHyperparams::with_default_priors(k, 10, 2, 0), v, counts).unwrap()
    }

    #[test]
    fn build_table_planted_first_topic() {
        let model = block_model(4, 3);
        // One document per planted topic, drawn purely from its block, plus
        // one empty document.
        let rows = vec![
            vec![(0u32, 4u32), (1, 3)],
            vec![(3, 5), (5, 2)],
            vec![(6, 6)],
            vec![(9, 2), (10, 2), (11, 3)],
            vec![],
        ];
        let matrix = CorpusMatrix::from_sparse_rows(rows, model.vocab_size()).unwrap();
        let labels = vec![
            DurationClass::ShortLived,
            DurationClass::Extended,
            DurationClass::ShortLived,
            DurationClass::Extended,
            DurationClass::ShortLived,
        ];
        let table = build_table(&matrix, &labels, &model, &FoldInParams::default(), 5).unwrap();
        assert_eq!(table.len(), 5);
        assert_eq!(table.k, 4);
        for (d, expected) in [(0usize, 0u32), (1, 1), (2, 2), (3, 3)] {
            assert_eq!(table.rows[d].top_topics[0], expected, "doc {d}");
            assert_eq!(table.rows[d].doc_id, d as u32);
        }
        // Empty doc falls back to the uniform mixture and the id tie-break.
        assert_eq!(table.rows[4].top_topics, [0, 1, 2, 3]);
        assert_eq!(table.class_counts(), (3, 2));

        let again = build_table(&matrix, &labels, &model, &FoldInParams::default(), 5).unwrap();
        assert_eq!(table, again);
    }

    #[test]
    fn build_table_rejects_bad_inputs() {
        let model = block_model(4, 2);
        let matrix =
            CorpusMatrix::from_sparse_rows(vec![vec![(0, 1)]], model.vocab_size()).unwrap();
        let err = build_table(&matrix, &[], &model, &FoldInParams::default(), 0).unwrap_err();
        assert!(matches!(
            err,
            Error::MisalignedLabels { rows: 1, labels: 0 }
        ));

        let small = block_model(3, 2);
        let matrix3 =
            CorpusMatrix::from_sparse_rows(vec![vec![(0, 1)]], small.vocab_size()).unwrap();
        assert!(build_table(
            &matrix3,
            &[DurationClass::ShortLived],
            &small,
            &FoldInParams::default(),
            0
        )
        .is_err());
    }

    #[test]
    fn empty_corpus_gives_empty_table() {
        let model = block_model(4, 2);
        let matrix = CorpusMatrix::from_sparse_rows(vec![], model.vocab_size()).unwrap();
        let table = build_table(&matrix, &[], &model, &FoldInParams::default(), 0).unwrap();
        assert!(table.is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let table = FeatureTable::new(
            vec![
                FeatureRow {
                    doc_id: 0,
                    top_topics: [3, 1, 0, 2],
                    label: DurationClass::Extended,
                },
                FeatureRow {
                    doc_id: 7,
                    top_topics: [1, 2, 3, 4],
                    label: DurationClass::ShortLived,
                },
            ],
            5,
        )
        .unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("doc_id,t1,t2,t3,t4,label\n"));
        assert!(text.contains("0,3,1,0,2,1\n"));
        let back = FeatureTable::read_csv(&buf[..], 5).unwrap();
        assert_eq!(back, table);
        // Domain check on read.
        assert!(FeatureTable::read_csv(&buf[..], 4).is_err());
    }
}
