//! The non-pipeline subcommands: descriptive statistics, word-frequency
//! export, single-text prediction, and the synthetic dataset generator.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use protestdur_core::corpus::{self, duration_days, CsvSchema, RawRecord};
use protestdur_core::features::{top_topics, NUM_TOP_TOPICS};
use protestdur_core::lda::{infer_theta, summarize_topics};
use protestdur_core::synthetic::{write_protest_csv, ProtestCsvSpec};
use protestdur_core::trees::EnsembleModelFile;
use protestdur_core::Error;
use serde::Serialize;

use crate::config::RunConfig;
use crate::pipeline::RunArtifacts;
use crate::{as_data, in_stage, CliError, CliResult};
use crate::{GenDataArgs, PredictArgs, StatsArgs, WordfreqArgs};

/// One percentage table: (value, count) rows ordered by descending count,
/// name breaking ties, plus the denominator.
struct PercentageTable {
    rows: Vec<(String, usize)>,
    total: usize,
}

impl PercentageTable {
    fn from_counts(counts: BTreeMap<String, usize>) -> Self {
        let total = counts.values().sum();
        let mut rows: Vec<(String, usize)> = counts.into_iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self { rows, total }
    }

    fn print(&self, title: &str, value_header: &str) {
        let width = self
            .rows
            .iter()
            .map(|(v, _)| v.chars().count())
            .chain([value_header.chars().count()])
            .max()
            .unwrap_or(0);
        println!("{title} ({} records)", self.total);
        println!("  {value_header:<width$}  count  percent");
        for (value, count) in &self.rows {
            println!(
                "  {value:<width$}  {count:>5}  {:>7.2}",
                percent(*count, self.total)
            );
        }
        println!();
    }

    fn write_csv(&self, path: &Path, value_header: &str) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Stage {
            stage: "stats",
            message: format!("cannot write {}: {e}", path.display()),
        })?;
        let io_err = |e: csv::Error| CliError::Stage {
            stage: "stats",
            message: format!("cannot write {}: {e}", path.display()),
        };
        w.write_record([value_header, "count", "percent"])
            .map_err(io_err)?;
        for (value, count) in &self.rows {
            w.write_record([
                value.as_str(),
                &count.to_string(),
                &format!("{:.2}", percent(*count, self.total)),
            ])
            .map_err(io_err)?;
        }
        w.flush().map_err(|e| CliError::Stage {
            stage: "stats",
            message: format!("cannot write {}: {e}", path.display()),
        })
    }
}

fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

/// Count a categorical column kept in the records' extra fields. `None`
/// when the column never appears or is empty everywhere.
fn categorical_counts(records: &[RawRecord], column: &str) -> Option<BTreeMap<String, usize>> {
    if !records.iter().any(|r| r.extra.contains_key(column)) {
        return None;
    }
    let mut counts = BTreeMap::new();
    for record in records {
        match record.extra.get(column) {
            Some(v) if !v.is_empty() => *counts.entry(v.clone()).or_insert(0) += 1,
            _ => {}
        }
    }
    (!counts.is_empty()).then_some(counts)
}

/// Duration distribution in days, bucketed 0–4 with everything longer
/// pooled into a "5+" tail (the individually sub-1% durations).
fn duration_table(records: &[RawRecord]) -> PercentageTable {
    let mut buckets = [0usize; 6];
    for record in records {
        let days = duration_days(record).days as usize;
        buckets[days.min(5)] += 1;
    }
    let rows: Vec<(String, usize)> = buckets
        .iter()
        .enumerate()
        .filter(|&(_, &count)| count > 0)
        .map(|(i, &count)| {
            let label = if i == 5 {
                "5+".to_string()
            } else {
                i.to_string()
            };
            (label, count)
        })
        .collect();
    PercentageTable {
        rows,
        total: records.len(),
    }
}

pub fn stats(args: &StatsArgs) -> CliResult<()> {
    let schema = CsvSchema {
        text_column: args.text_column.clone(),
        start_column: args.start_column.clone(),
        end_column: args.end_column.clone(),
        date_format: args.date_format.clone(),
    };
    let ingestion = as_data(corpus::ingest_csv(&args.input, &schema))?;
    if ingestion.records.is_empty() {
        return Err(CliError::Data(format!(
            "no usable rows in {} ({} read, {} dropped)",
            args.input.display(),
            ingestion.total_rows,
            ingestion.dropped
        )));
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::Stage {
        stage: "stats",
        message: format!("cannot create {}: {e}", args.out.display()),
    })?;
    println!(
        "{} records ({} rows read, {} dropped)\n",
        ingestion.records.len(),
        ingestion.total_rows,
        ingestion.dropped
    );

    for column in ["province", "issue", "state"] {
        match categorical_counts(&ingestion.records, column) {
            Some(counts) => {
                let table = PercentageTable::from_counts(counts);
                table.print(&format!("protests by {column}"), column);
                table.write_csv(&args.out.join(format!("stats_{column}.csv")), column)?;
            }
            None => eprintln!("warning: column '{column}' missing or empty; table skipped"),
        }
    }

    let durations = duration_table(&ingestion.records);
    durations.print("protests by duration (days)", "duration");
    durations.write_csv(&args.out.join("stats_duration.csv"), "duration")?;
    println!("tables written to {}", args.out.display());
    Ok(())
}

pub fn export_wordfreq(args: &WordfreqArgs) -> CliResult<()> {
    let config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let pp = config.preprocess_config()?;
    let ingestion = as_data(corpus::ingest_csv(&args.input, &config.csv_schema()))?;
    let docs = corpus::preprocess_corpus(&ingestion.records, &pp);
    let (order, counts) = corpus::corpus_token_counts(&docs);

    let mut rows: Vec<(String, u64)> = order
        .into_iter()
        .map(|token| {
            let count = counts[&token];
            (token, count)
        })
        .filter(|&(_, count)| count >= args.min_count)
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(args.top);

    let write_to = |w: &mut dyn Write| -> Result<(), csv::Error> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["token", "count"])?;
        for (token, count) in &rows {
            csv.write_record([token.as_str(), &count.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    };
    let failed = |e: csv::Error| CliError::Stage {
        stage: "export",
        message: e.to_string(),
    };
    match &args.out {
        Some(path) => {
            let mut file = fs::File::create(path).map_err(|e| CliError::Stage {
                stage: "export",
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            write_to(&mut file).map_err(failed)?;
            println!("wrote {} tokens to {}", rows.len(), path.display());
        }
        None => write_to(&mut std::io::stdout()).map_err(failed)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct TopicChoice {
    topic_id: usize,
    name: String,
    /// Inferred mixture weight θ for this topic.
    weight: f64,
    top_words: Vec<String>,
}

#[derive(Serialize)]
struct PredictDetail {
    format_version: u32,
    /// True when no token survived preprocessing and vocabulary lookup;
    /// the answer is then the training majority class, not a model vote.
    uninformative: bool,
    predicted_class: &'static str,
    vote_fraction: Option<f64>,
    learner: String,
    /// Tokens after preprocessing, vocabulary hits and misses alike.
    tokens: Vec<String>,
    matched_tokens: usize,
    top_topics: Vec<TopicChoice>,
}

pub fn predict(args: &PredictArgs) -> CliResult<()> {
    let artifacts = RunArtifacts::load(&args.run_dir)?;
    let learner = args
        .learner
        .clone()
        .unwrap_or_else(|| artifacts.primary_model.clone());
    let model_path = args.run_dir.join(format!("model_{learner}.json"));
    let ensemble = EnsembleModelFile::load(&model_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", model_path.display())))?;

    let pp = artifacts.config.preprocess_config()?;
    let tokens = corpus::preprocess(&args.text, &pp);
    let vocab = artifacts.vocabulary();
    let mut word_counts: BTreeMap<u32, u32> = BTreeMap::new();
    for token in &tokens {
        if let Some(id) = vocab.id(token) {
            *word_counts.entry(id).or_insert(0) += 1;
        }
    }
    let doc: Vec<(u32, u32)> = word_counts.into_iter().collect();
    let matched_tokens = doc.iter().map(|&(_, c)| c as usize).sum();

    if doc.is_empty() {
        let class = artifacts.majority_class;
        println!(
            "{} — uninformative input: no usable tokens, answering with the training majority class",
            class.name()
        );
        let detail = PredictDetail {
            format_version: 1,
            uninformative: true,
            predicted_class: class.name(),
            vote_fraction: None,
            learner,
            tokens,
            matched_tokens: 0,
            top_topics: Vec::new(),
        };
        println!("{}", pretty(&detail)?);
        return Ok(());
    }

    let model = &artifacts.model_file.model;
    let mixture = in_stage(
        "predict",
        infer_theta(
            model,
            &doc,
            &artifacts.config.fold_in(),
            artifacts.predict_seed,
        ),
    )?;
    let ids = in_stage("predict", top_topics(&mixture.theta, NUM_TOP_TOPICS))?;
    let features: [u32; NUM_TOP_TOPICS] =
        [ids[0] as u32, ids[1] as u32, ids[2] as u32, ids[3] as u32];
    let (class, vote) = ensemble.model.predict(&features);
    let summaries = in_stage(
        "predict",
        summarize_topics(model, vocab, 5.min(vocab.len())),
    )?;
    let chosen: Vec<TopicChoice> = ids
        .iter()
        .map(|&id| TopicChoice {
            topic_id: id,
            name: summaries[id].name.clone(),
            weight: mixture.theta[id],
            top_words: summaries[id]
                .top_words
                .iter()
                .map(|(w, _)| w.clone())
                .collect(),
        })
        .collect();
    let names: Vec<&str> = chosen.iter().map(|c| c.name.as_str()).collect();
    println!(
        "{} (vote {:.2}) — top topics: {}",
        class.name(),
        vote,
        names.join(", ")
    );
    let detail = PredictDetail {
        format_version: 1,
        uninformative: false,
        predicted_class: class.name(),
        vote_fraction: Some(vote),
        learner,
        tokens,
        matched_tokens,
        top_topics: chosen,
    };
    println!("{}", pretty(&detail)?);
    Ok(())
}

fn pretty<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Stage {
        stage: "predict",
        message: e.to_string(),
    })
}

pub fn gen_data(args: &GenDataArgs) -> CliResult<()> {
    let spec = ProtestCsvSpec {
        rows: args.rows,
        incomplete: args.incomplete,
        label_noise: args.label_noise,
        seed: args.seed,
    };
    let file = fs::File::create(&args.out).map_err(|e| CliError::Stage {
        stage: "gen_data",
        message: format!("cannot create {}: {e}", args.out.display()),
    })?;
    write_protest_csv(std::io::BufWriter::new(file), &spec).map_err(|e| match e {
        Error::InvalidParameter(m) => CliError::Config(m),
        other => CliError::Stage {
            stage: "gen_data",
            message: other.to_string(),
        },
    })?;
    println!(
        "wrote {} rows ({} incomplete) to {}",
        spec.rows,
        spec.incomplete,
        args.out.display()
    );
    Ok(())
}
