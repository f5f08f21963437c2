//! Sparse document–term count matrix.

use serde::{Deserialize, Serialize};

use super::Vocabulary;

/// Per-document sparse word counts over a frozen vocabulary. Rows keep their
/// position even when every token of a document fell out of vocabulary; such
/// rows have a zero total and are reported by [`CorpusMatrix::empty_docs`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMatrix {
    /// Per document: (word_id, count), word ids strictly increasing.
    entries: Vec<Vec<(u32, u32)>>,
    totals: Vec<u32>,
    vocab_size: usize,
}

impl CorpusMatrix {
    /// Count tokens against `vocab`; out-of-vocabulary tokens are dropped.
    pub fn from_docs(docs: &[Vec<String>], vocab: &Vocabulary) -> Self {
        let mut entries = Vec::with_capacity(docs.len());
        let mut totals = Vec::with_capacity(docs.len());
        for doc in docs {
            let mut counts = vec![0u32; vocab.len()];
            let mut total = 0u32;
            for token in doc {
                if let Some(id) = vocab.id(token) {
                    counts[id as usize] += 1;
                    total += 1;
                }
            }
            let sparse: Vec<(u32, u32)> = counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(id, &c)| (id as u32, c))
                .collect();
            entries.push(sparse);
            totals.push(total);
        }
        Self {
            entries,
            totals,
            vocab_size: vocab.len(),
        }
    }

    /// Assemble directly from sparse rows. Rows must respect the invariants
    /// (ids < vocab_size, counts ≥ 1, strictly increasing ids); checked.
    pub fn from_sparse_rows(rows: Vec<Vec<(u32, u32)>>, vocab_size: usize) -> crate::Result<Self> {
        let mut totals = Vec::with_capacity(rows.len());
        for (d, row) in rows.iter().enumerate() {
            let mut total = 0u32;
            let mut prev: Option<u32> = None;
            for &(id, count) in row {
                if id as usize >= vocab_size {
                    return Err(crate::Error::InvalidParameter(format!(
                        "doc {d}: word id {id} outside vocabulary of size {vocab_size}"
                    )));
                }
                if count == 0 {
                    return Err(crate::Error::InvalidParameter(format!(
                        "doc {d}: zero count stored for word {id}"
                    )));
                }
                if prev.is_some_and(|p| p >= id) {
                    return Err(crate::Error::InvalidParameter(format!(
                        "doc {d}: word ids not strictly increasing"
                    )));
                }
                prev = Some(id);
                total += count;
            }
            totals.push(total);
        }
        Ok(Self {
            entries: rows,
            totals,
            vocab_size,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.entries.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Sparse row for one document.
    pub fn doc(&self, d: usize) -> &[(u32, u32)] {
        &self.entries[d]
    }

    /// N_d, the token total of one document.
    pub fn doc_total(&self, d: usize) -> u32 {
        self.totals[d]
    }

    pub fn total_tokens(&self) -> u64 {
        self.totals.iter().map(|&t| u64::from(t)).sum()
    }

    pub fn is_doc_empty(&self, d: usize) -> bool {
        self.totals[d] == 0
    }

    /// Indices of documents whose every token was out of vocabulary.
    pub fn empty_docs(&self) -> Vec<usize> {
        (0..self.num_docs())
            .filter(|&d| self.is_doc_empty(d))
            .collect()
    }

    /// Project onto a document subset and a new word-id mapping.
    /// `word_map[old_id]` gives the new id or `None` to drop the word; used
    /// for per-fold vocabulary rebuilds.
    pub fn project(
        &self,
        doc_indices: &[usize],
        word_map: &[Option<u32>],
        new_vocab_size: usize,
    ) -> Self {
        let mut entries = Vec::with_capacity(doc_indices.len());
        let mut totals = Vec::with_capacity(doc_indices.len());
        for &d in doc_indices {
            let mut row: Vec<(u32, u32)> = self.entries[d]
                .iter()
                .filter_map(|&(id, c)| word_map[id as usize].map(|new_id| (new_id, c)))
                .collect();
            row.sort_unstable_by_key(|&(id, _)| id);
            let total = row.iter().map(|&(_, c)| c).sum();
            entries.push(row);
            totals.push(total);
        }
        Self {
            entries,
            totals,
            vocab_size: new_vocab_size,
        }
    }

    /// Row subset with the vocabulary unchanged.
    pub fn select_docs(&self, doc_indices: &[usize]) -> Self {
        let identity: Vec<Option<u32>> = (0..self.vocab_size as u32).map(Some).collect();
        self.project(doc_indices, &identity, self.vocab_size)
    }

    /// Word ids that occur at least once in the given documents.
    pub fn observed_words(&self, doc_indices: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.vocab_size];
        for &d in doc_indices {
            for &(id, _) in &self.entries[d] {
                seen[id as usize] = true;
            }
        }
        seen
    }

    /// Validate the structural invariants; returns a diagnostic on failure.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (d, row) in self.entries.iter().enumerate() {
            let mut sum = 0u64;
            let mut prev: Option<u32> = None;
            for &(id, c) in row {
                if id as usize >= self.vocab_size {
                    return Err(format!("doc {d}: word id {id} ≥ V={}", self.vocab_size));
                }
                if c == 0 {
                    return Err(format!("doc {d}: zero sparse count at word {id}"));
                }
                if prev.is_some_and(|p| p >= id) {
                    return Err(format!("doc {d}: unsorted sparse row"));
                }
                prev = Some(id);
                sum += u64::from(c);
            }
            if sum != u64::from(self.totals[d]) {
                return Err(format!(
                    "doc {d}: sparse sum {sum} ≠ stored total {}",
                    self.totals[d]
                ));
            }
        }
        Ok(())
    }
}
