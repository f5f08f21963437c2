//! Protest-record ingestion, duration labels, and text preprocessing.
//!
//! The pipeline here turns a CSV of protest events into (a) a binary
//! duration label per event and (b) a sparse document–term matrix over a
//! frequency-filtered vocabulary of stemmed tokens.

pub mod porter;
pub mod stopwords;

mod matrix;
mod vocab;

use std::collections::HashMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use matrix::CorpusMatrix;
pub use stopwords::{smart_stopwords, Stopwords};
pub use vocab::Vocabulary;

use crate::error::{Error, Result};

/// One protest event row as ingested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// Zero-based data-row index in the source file; stable across runs and
    /// unaffected by drops, so it doubles as the document id.
    pub id: u32,
    /// Free-text description (the protest's stated reason).
    pub text: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    /// Remaining columns, kept for descriptive statistics only.
    pub extra: std::collections::BTreeMap<String, String>,
}

/// Binary duration outcome: protests under one day vs one day or more.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationClass {
    ShortLived,
    Extended,
}

impl DurationClass {
    pub fn from_days(days: u32) -> Self {
        if days == 0 {
            DurationClass::ShortLived
        } else {
            DurationClass::Extended
        }
    }

    /// Numeric code used in feature CSVs: 0 = ShortLived, 1 = Extended.
    pub fn code(self) -> u8 {
        match self {
            DurationClass::ShortLived => 0,
            DurationClass::Extended => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(DurationClass::ShortLived),
            1 => Ok(DurationClass::Extended),
            other => Err(Error::InvalidParameter(format!(
                "label code must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DurationClass::ShortLived => "short_lived",
            DurationClass::Extended => "extended",
        }
    }
}

impl std::fmt::Display for DurationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Duration in whole calendar days plus its binary class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DurationLabel {
    pub days: u32,
    pub class: DurationClass,
}

/// Calendar-day difference between end and start. Ingestion guarantees
/// end ≥ start; a violating record built by hand is clamped to zero days.
pub fn duration_days(r: &RawRecord) -> DurationLabel {
    let days = (r.end_date - r.start_date).num_days();
    let days = u32::try_from(days).unwrap_or(0);
    DurationLabel {
        days,
        class: DurationClass::from_days(days),
    }
}

/// Which CSV columns hold the modeling fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub text_column: String,
    pub start_column: String,
    pub end_column: String,
    /// chrono format string for both date columns.
    pub date_format: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            text_column: "reason".to_string(),
            start_column: "start_date".to_string(),
            end_column: "end_date".to_string(),
            date_format: "%Y-%m-%d".to_string(),
        }
    }
}

/// Ingestion result: surviving records plus how many rows were dropped for
/// missing or invalid fields.
#[derive(Debug, Clone)]
pub struct Ingestion {
    pub records: Vec<RawRecord>,
    pub dropped: usize,
    pub total_rows: usize,
}

/// Read a protest CSV. Rows missing any selected field, with unparseable
/// dates, or with end before start are dropped and counted, never fatal.
/// A missing schema column in the header is fatal.
pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<Ingestion> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::Csv(e),
        })?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let text_idx = col(&schema.text_column)?;
    let start_idx = col(&schema.start_column)?;
    let end_idx = col(&schema.end_column)?;

    let mut records = Vec::new();
    let mut dropped = 0usize;
    let mut total_rows = 0usize;
    for (row_idx, row) in reader.records().enumerate() {
        total_rows += 1;
        let row = row?;
        let parsed = parse_row(
            &row, &headers, text_idx, start_idx, end_idx, schema, row_idx,
        );
        match parsed {
            Some(rec) => records.push(rec),
            None => dropped += 1,
        }
    }
    Ok(Ingestion {
        records,
        dropped,
        total_rows,
    })
}

fn parse_row(
    row: &csv::StringRecord,
    headers: &csv::StringRecord,
    text_idx: usize,
    start_idx: usize,
    end_idx: usize,
    schema: &CsvSchema,
    row_idx: usize,
) -> Option<RawRecord> {
    let text = row.get(text_idx)?.trim();
    if text.is_empty() {
        return None;
    }
    let parse_date = |idx: usize| -> Option<NaiveDate> {
        NaiveDate::parse_from_str(row.get(idx)?.trim(), &schema.date_format).ok()
    };
    let start_date = parse_date(start_idx)?;
    let end_date = parse_date(end_idx)?;
    if end_date < start_date {
        return None;
    }
    let mut extra = std::collections::BTreeMap::new();
    for (i, header) in headers.iter().enumerate() {
        if i == text_idx || i == start_idx || i == end_idx {
            continue;
        }
        if let Some(value) = row.get(i) {
            extra.insert(header.to_string(), value.trim().to_string());
        }
    }
    Some(RawRecord {
        id: row_idx as u32,
        text: text.to_string(),
        start_date,
        end_date,
        extra,
    })
}

/// Text-normalization settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub strip_numbers: bool,
    pub stopwords: Stopwords,
    pub stem: bool,
    /// Tokens shorter than this (in characters) are discarded.
    pub min_token_length: usize,
    /// Corpus-frequency floor applied when building the vocabulary.
    pub min_corpus_frequency: u32,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
            strip_numbers: true,
            stopwords: Stopwords::Smart,
            stem: true,
            min_token_length: 3,
            min_corpus_frequency: 5,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_length < 1 {
            return Err(Error::InvalidParameter(
                "min_token_length must be ≥ 1".to_string(),
            ));
        }
        if self.min_corpus_frequency < 1 {
            return Err(Error::InvalidParameter(
                "min_corpus_frequency must be ≥ 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Normalize free text into a token list: case-fold, strip punctuation and
/// digits, drop short tokens and stopwords, then stem.
///
/// Stems are themselves re-filtered and stemming runs to a fixed point, so
/// the output is stable: `preprocess(join(output)) == output`. A single
/// Porter pass is not idempotent (`agreed` → `agre` → `agr`), and a stem may
/// fall below the length floor or collide with a stopword; both would break
/// that stability if left unhandled.
pub fn preprocess(text: &str, cfg: &PreprocessConfig) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let cased: String = if cfg.lowercase {
            raw.chars().flat_map(char::to_lowercase).collect()
        } else {
            raw.to_string()
        };
        let token: String = cased
            .chars()
            .filter(|&c| {
                if c.is_alphabetic() {
                    true
                } else if c.is_numeric() {
                    !cfg.strip_numbers
                } else {
                    !cfg.strip_punctuation
                }
            })
            .collect();
        if token.chars().count() < cfg.min_token_length || cfg.stopwords.contains(&token) {
            continue;
        }
        let token = if cfg.stem {
            let mut current = token;
            loop {
                let next = porter::stem(&current);
                if next == current {
                    break;
                }
                current = next;
            }
            current
        } else {
            token
        };
        if token.chars().count() < cfg.min_token_length || cfg.stopwords.contains(&token) {
            continue;
        }
        out.push(token);
    }
    out
}

/// Preprocess every record's text, preserving record order.
pub fn preprocess_corpus(records: &[RawRecord], cfg: &PreprocessConfig) -> Vec<Vec<String>> {
    records.iter().map(|r| preprocess(&r.text, cfg)).collect()
}

/// Corpus-wide token counts plus the tokens in first-appearance order.
pub fn corpus_token_counts(docs: &[Vec<String>]) -> (Vec<String>, HashMap<String, u64>) {
    let mut order = Vec::new();
    let mut counts: HashMap<String, u64> = HashMap::new();
    for doc in docs {
        for token in doc {
            let entry = counts.entry(token.clone()).or_insert(0);
            if *entry == 0 {
                order.push(token.clone());
            }
            *entry += 1;
        }
    }
    (order, counts)
}

/// Build the modeling vocabulary: tokens at or above the corpus-frequency
/// floor, ids in first-appearance order.
pub fn build_vocabulary(docs: &[Vec<String>], cfg: &PreprocessConfig) -> Result<Vocabulary> {
    cfg.validate()?;
    let (order, counts) = corpus_token_counts(docs);
    let floor = u64::from(cfg.min_corpus_frequency);
    let kept: Vec<String> = order.into_iter().filter(|t| counts[t] >= floor).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary {
            floor: cfg.min_corpus_frequency,
            docs: docs.len(),
        });
    }
    Vocabulary::from_tokens(kept)
}

/// Count documents against a frozen vocabulary; see [`CorpusMatrix`].
pub fn to_matrix(docs: &[Vec<String>], vocab: &Vocabulary) -> CorpusMatrix {
    CorpusMatrix::from_docs(docs, vocab)
}
