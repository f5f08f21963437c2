//! The end-to-end run: ingest → preprocess → topic-count sweep → LDA fit →
//! top-topic features → split and balance → tree learners → metrics.
//!
//! Every artifact lands in one run directory and every random choice derives
//! from the single root seed, so two runs from the same config are
//! byte-identical. Artifacts are written as soon as their stage finishes;
//! a failing stage aborts with its name but leaves the earlier outputs in
//! place for debugging.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use protestdur_core::corpus::{self, duration_days, DurationClass, Ingestion, Vocabulary};
use protestdur_core::derive_seed;
use protestdur_core::eval::{
    cross_validate, evaluate_holdout, render_metrics_table, ConfusionMatrix, CrossValidation,
    LearnerSpec, MetricReport,
};
use protestdur_core::features::{build_table, NUM_TOP_TOPICS};
use protestdur_core::lda::{fit_gibbs, summarize_topics, LdaModelFile, TopicSummary};
use protestdur_core::model_selection::{select_k, sweep_topics};
use protestdur_core::sampling::{balance, doc_id_overlap, split};
use protestdur_core::trees::EnsembleModelFile;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::{as_data, in_stage, CliError, CliResult, PipelineArgs};

const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Per-stage seeds, all derived from the root seed with fixed tags so adding
/// a stage never shifts another stage's stream.
#[derive(Debug, Serialize)]
struct StageSeeds {
    sweep: u64,
    lda: u64,
    features: u64,
    split: u64,
    balance: u64,
    fit: BTreeMap<String, u64>,
    cross_validation: BTreeMap<String, u64>,
    predict: u64,
}

impl StageSeeds {
    fn derive(root: u64, learners: &[LearnerSpec]) -> Self {
        let per_learner = |tag: u64| {
            learners
                .iter()
                .enumerate()
                .map(|(i, spec)| (spec.name().to_string(), derive_seed(root, &[tag, i as u64])))
                .collect()
        };
        Self {
            sweep: derive_seed(root, &[1]),
            lda: derive_seed(root, &[2]),
            features: derive_seed(root, &[3]),
            split: derive_seed(root, &[4]),
            balance: derive_seed(root, &[5]),
            fit: per_learner(6),
            cross_validation: per_learner(7),
            predict: derive_seed(root, &[8]),
        }
    }
}

#[derive(Serialize)]
struct PreprocessManifest<'a> {
    format_version: u32,
    input: &'a str,
    total_rows: usize,
    dropped_rows: usize,
    records: usize,
    vocabulary_size: usize,
    kept_tokens: u64,
    empty_documents: usize,
    settings: &'a crate::config::PreprocessSection,
}

#[derive(Serialize)]
struct TopicsFile<'a> {
    format_version: u32,
    topics: &'a [TopicSummary<f64>],
}

#[derive(Serialize)]
struct ClassCounts {
    short_lived: usize,
    extended: usize,
}

impl From<(usize, usize)> for ClassCounts {
    fn from((short_lived, extended): (usize, usize)) -> Self {
        Self {
            short_lived,
            extended,
        }
    }
}

#[derive(Serialize)]
struct SplitManifest {
    format_version: u32,
    /// "split_then_balance" (default, leak-free) or "balance_then_split"
    /// (the published arithmetic).
    order: &'static str,
    balance_strategy: &'static str,
    train_fraction: f64,
    stratified: bool,
    feature_rows: usize,
    /// Rows entering the splitter: the raw feature table in default order,
    /// the balanced table under balance_then_split.
    split_input_rows: usize,
    train_rows: usize,
    test_rows: usize,
    train_class_counts: ClassCounts,
    test_class_counts: ClassCounts,
    /// Documents appearing on both sides. Always empty in default order;
    /// under balance_then_split oversampled copies can straddle the split.
    doc_id_overlap_count: usize,
    doc_id_overlap: Vec<u32>,
}

#[derive(Serialize)]
struct HoldoutMetrics {
    confusion_matrix: ConfusionMatrix,
    metrics: MetricReport<f64>,
}

#[derive(Serialize)]
struct LearnerMetrics {
    name: &'static str,
    cross_validation: CrossValidation<f64>,
    holdout: HoldoutMetrics,
}

#[derive(Serialize)]
struct MetricsFile {
    format_version: u32,
    k: usize,
    positive_class: &'static str,
    learners: Vec<LearnerMetrics>,
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    format_version: u32,
    tool: ToolInfo,
    /// SHA-256 of run_config.toml: the identity of the fully resolved
    /// configuration this directory was produced from.
    config_sha256: String,
    seed: u64,
    stage_seeds: StageSeeds,
    /// Topic count the models use.
    k: usize,
    /// Raw sweep argmin when a sweep ran (may sit below the four-topic
    /// feature floor; `k` is the value actually used).
    selected_k: Option<usize>,
    majority_class: &'a str,
    positive_class: &'static str,
    /// Model cmd_predict uses when no learner is named.
    primary_model: &'a str,
    counts: ManifestCounts,
    artifacts: Vec<String>,
}

#[derive(Serialize)]
struct ManifestCounts {
    total_rows: usize,
    dropped_rows: usize,
    records: usize,
    vocabulary_size: usize,
    feature_rows: usize,
    train_rows: usize,
    test_rows: usize,
}

/// Tracks artifact files as they are written, for the manifest listing.
struct RunDir {
    root: PathBuf,
    written: Vec<String>,
}

impl RunDir {
    fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::Stage {
            stage: "prepare",
            message: format!("cannot create {}: {e}", root.display()),
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write_text(&mut self, stage: &'static str, name: &str, text: &str) -> CliResult<()> {
        fs::write(self.root.join(name), text).map_err(|e| CliError::Stage {
            stage,
            message: format!("cannot write {name}: {e}"),
        })?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(
        &mut self,
        stage: &'static str,
        name: &str,
        value: &T,
    ) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Stage {
            stage,
            message: format!("cannot serialize {name}: {e}"),
        })?;
        text.push('\n');
        self.write_text(stage, name, &text)
    }

    /// Write through a core serializer that takes an io::Write.
    fn write_with<F>(&mut self, stage: &'static str, name: &str, f: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> protestdur_core::Result<()>,
    {
        let mut buf = Vec::new();
        in_stage(stage, f(&mut buf))?;
        let text = String::from_utf8(buf).map_err(|e| CliError::Stage {
            stage,
            message: format!("{name} is not UTF-8: {e}"),
        })?;
        self.write_text(stage, name, &text)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn run(args: &PipelineArgs) -> CliResult<()> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply_overrides(args);
    config.validate()?;

    if config.run.jobs >= 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.run.jobs)
            .build_global()
            .map_err(|e| CliError::Stage {
                stage: "prepare",
                message: e.to_string(),
            })?;
    }

    let mut dir = RunDir::create(Path::new(&config.run.out_dir))?;
    let config_toml = toml::to_string_pretty(&config).map_err(|e| CliError::Stage {
        stage: "prepare",
        message: e.to_string(),
    })?;
    dir.write_text("prepare", "run_config.toml", &config_toml)?;
    let config_sha256 = sha256_hex(config_toml.as_bytes());

    // Ingest and preprocess; problems here are input-data errors.
    let schema = config.csv_schema();
    let ingestion = as_data(corpus::ingest_csv(Path::new(&config.data.input), &schema))?;
    let Ingestion {
        records,
        dropped,
        total_rows,
    } = &ingestion;
    if records.is_empty() {
        return Err(CliError::Data(format!(
            "no usable rows in {} ({total_rows} read, {dropped} dropped)",
            config.data.input
        )));
    }
    let labels: Vec<DurationClass> = records.iter().map(|r| duration_days(r).class).collect();
    println!(
        "ingest: {total_rows} data rows, {dropped} dropped, {} records",
        records.len()
    );

    let pp = config.preprocess_config()?;
    let docs = corpus::preprocess_corpus(records, &pp);
    let vocab = as_data(corpus::build_vocabulary(&docs, &pp))?;
    let matrix = corpus::to_matrix(&docs, &vocab);
    println!(
        "vocabulary: {} tokens, {} kept token instances",
        vocab.len(),
        matrix.total_tokens()
    );
    dir.write_json(
        "preprocess",
        "preprocess_manifest.json",
        &PreprocessManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            input: &config.data.input,
            total_rows: *total_rows,
            dropped_rows: *dropped,
            records: records.len(),
            vocabulary_size: vocab.len(),
            kept_tokens: matrix.total_tokens(),
            empty_documents: matrix.empty_docs().len(),
            settings: &config.preprocess,
        },
    )?;

    let learners = config.learner_specs()?;
    let seeds = StageSeeds::derive(config.run.seed, &learners);

    // Topic count: fixed, or the sweep's argmin raised to the feature floor.
    let (k, selected_k) = if config.lda.k > 0 {
        println!("topics: fixed k = {}", config.lda.k);
        (config.lda.k, None)
    } else {
        let candidates = config.k_candidates();
        let curve = in_stage(
            "sweep",
            sweep_topics::<f64>(
                &matrix,
                &candidates,
                config.lda.sweep_folds,
                &config.sweep_settings(),
                seeds.sweep,
            ),
        )?;
        dir.write_with("sweep", "perplexity_curve.csv", |w| curve.write_csv(w))?;
        let summary = in_stage("sweep", curve.summary_json())?;
        dir.write_text("sweep", "sweep_summary.json", &summary)?;
        let selected = in_stage("sweep", select_k(&curve))?;
        let k = selected.max(NUM_TOP_TOPICS);
        if k == selected {
            println!(
                "sweep: selected k = {selected} from {} candidates (folds = {})",
                candidates.len(),
                config.lda.sweep_folds
            );
        } else {
            println!(
                "sweep: selected k = {selected}, raised to {k} for the four-topic feature stage"
            );
        }
        (k, Some(selected))
    };

    let model = in_stage("lda", fit_gibbs(&matrix, config.hyperparams(k, seeds.lda)))?;
    let model_file = in_stage("lda", LdaModelFile::new(model.clone(), vocab.clone()))?;
    dir.write_text(
        "lda",
        "lda_model.json",
        &in_stage("lda", model_file.to_json())?,
    )?;
    let top_n = 10.min(vocab.len());
    let topics = in_stage("lda", summarize_topics(&model, &vocab, top_n))?;
    dir.write_json(
        "lda",
        "topics.json",
        &TopicsFile {
            format_version: MANIFEST_FORMAT_VERSION,
            topics: &topics,
        },
    )?;

    let table = in_stage(
        "features",
        build_table(&matrix, &labels, &model, &config.fold_in(), seeds.features),
    )?;
    dir.write_with("features", "features.csv", |w| table.write_csv(w))?;
    let (short, extended) = table.class_counts();
    let majority_class = if extended > short {
        DurationClass::Extended
    } else {
        DurationClass::ShortLived
    };
    println!(
        "features: {} rows (short_lived {short}, extended {extended})",
        table.len()
    );

    let strategy = config.balance_strategy()?;
    let (train, test, order, split_input_rows) = if config.classify.paper_order {
        let balanced = in_stage("balance", balance(&table, strategy, seeds.balance))?;
        let input_rows = balanced.len();
        let (train, test) = in_stage(
            "split",
            split(
                &balanced,
                config.classify.train_fraction,
                config.classify.stratified,
                seeds.split,
            ),
        )?;
        (train, test, "balance_then_split", input_rows)
    } else {
        let (raw_train, test) = in_stage(
            "split",
            split(
                &table,
                config.classify.train_fraction,
                config.classify.stratified,
                seeds.split,
            ),
        )?;
        let train = in_stage("balance", balance(&raw_train, strategy, seeds.balance))?;
        (train, test, "split_then_balance", table.len())
    };
    let overlap = doc_id_overlap(&train, &test);
    dir.write_with("split", "train.csv", |w| train.write_csv(w))?;
    dir.write_with("split", "test.csv", |w| test.write_csv(w))?;
    dir.write_json(
        "split",
        "split_manifest.json",
        &SplitManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            order,
            balance_strategy: strategy.name(),
            train_fraction: config.classify.train_fraction,
            stratified: config.classify.stratified,
            feature_rows: table.len(),
            split_input_rows,
            train_rows: train.len(),
            test_rows: test.len(),
            train_class_counts: train.class_counts().into(),
            test_class_counts: test.class_counts().into(),
            doc_id_overlap_count: overlap.len(),
            doc_id_overlap: overlap.clone(),
        },
    )?;
    println!(
        "split: {order} → train {}, test {} (doc_id overlap {})",
        train.len(),
        test.len(),
        overlap.len()
    );

    let mut learner_metrics = Vec::new();
    let mut holdout_columns = Vec::new();
    for spec in &learners {
        let name = spec.name();
        let fitted = in_stage("train", spec.fit(&train, seeds.fit[name]))?;
        dir.write_text(
            "train",
            &format!("model_{name}.json"),
            &in_stage("train", EnsembleModelFile::new(fitted.clone()).to_json())?,
        )?;
        let cv = in_stage(
            "cross_validation",
            cross_validate::<f64>(
                &train,
                spec,
                config.classify.cv_folds,
                config.classify.cv_repeats,
                seeds.cross_validation[name],
            ),
        )?;
        let (cm, report) = in_stage("evaluate", evaluate_holdout::<f64>(&fitted, &test))?;
        let fmt = |v: Option<f64>, scale: f64, digits: usize| match v {
            Some(x) => format!("{:.digits$}", x * scale),
            None => "undef".to_string(),
        };
        println!(
            "{name}: holdout balanced accuracy {}%, kappa {}",
            fmt(report.balanced_accuracy, 100.0, 2),
            fmt(report.kappa, 1.0, 4)
        );
        learner_metrics.push(LearnerMetrics {
            name,
            cross_validation: cv,
            holdout: HoldoutMetrics {
                confusion_matrix: cm,
                metrics: report,
            },
        });
        holdout_columns.push((name.to_string(), report));
    }

    let metrics = MetricsFile {
        format_version: MANIFEST_FORMAT_VERSION,
        k,
        positive_class: DurationClass::Extended.name(),
        learners: learner_metrics,
    };
    dir.write_json("report", "metrics.json", &metrics)?;
    let rendered = render_metrics_table(&holdout_columns);
    dir.write_text("report", "metrics_table.txt", &rendered)?;
    print!("{rendered}");

    let primary_model = learners
        .iter()
        .map(|s| s.name())
        .find(|&n| n == "forest")
        .unwrap_or_else(|| learners.last().expect("validated non-empty").name());
    let mut artifacts = dir.written.clone();
    artifacts.push("manifest.json".to_string());
    let manifest = Manifest {
        format_version: MANIFEST_FORMAT_VERSION,
        tool: ToolInfo {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        config_sha256,
        seed: config.run.seed,
        stage_seeds: seeds,
        k,
        selected_k,
        majority_class: majority_class.name(),
        positive_class: DurationClass::Extended.name(),
        primary_model,
        counts: ManifestCounts {
            total_rows: *total_rows,
            dropped_rows: *dropped,
            records: records.len(),
            vocabulary_size: vocab.len(),
            feature_rows: table.len(),
            train_rows: train.len(),
            test_rows: test.len(),
        },
        artifacts,
    };
    dir.write_json("report", "manifest.json", &manifest)?;
    println!(
        "wrote {} artifacts to {}",
        dir.written.len(),
        dir.root.display()
    );
    Ok(())
}

/// What cmd_predict needs back out of a run directory.
pub struct RunArtifacts {
    pub config: RunConfig,
    pub model_file: LdaModelFile<f64>,
    pub predict_seed: u64,
    pub majority_class: DurationClass,
    pub primary_model: String,
}

impl RunArtifacts {
    /// Load the pieces cmd_predict depends on; anything missing or
    /// malformed is reported as a data error naming the file.
    pub fn load(run_dir: &Path) -> CliResult<Self> {
        let manifest_path = run_dir.join("manifest.json");
        let manifest: serde_json::Value = {
            let text = fs::read_to_string(&manifest_path).map_err(|e| {
                CliError::Data(format!("cannot read {}: {e}", manifest_path.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", manifest_path.display())))?
        };
        let field = |pointer: &str| -> CliResult<serde_json::Value> {
            manifest.pointer(pointer).cloned().ok_or_else(|| {
                CliError::Data(format!("{} is missing {pointer}", manifest_path.display()))
            })
        };
        let predict_seed = field("/stage_seeds/predict")?
            .as_u64()
            .ok_or_else(|| CliError::Data("predict seed is not an integer".into()))?;
        let majority = field("/majority_class")?;
        let majority_class = match majority.as_str() {
            Some("short_lived") => DurationClass::ShortLived,
            Some("extended") => DurationClass::Extended,
            _ => {
                return Err(CliError::Data(format!(
                    "unrecognized majority_class {majority}"
                )))
            }
        };
        let primary_model = field("/primary_model")?
            .as_str()
            .ok_or_else(|| CliError::Data("primary_model is not a string".into()))?
            .to_string();
        let config = RunConfig::load(&run_dir.join("run_config.toml"))
            .map_err(|e| CliError::Data(e.to_string()))?;
        let model_file = LdaModelFile::<f64>::load(&run_dir.join("lda_model.json"))
            .map_err(|e| CliError::Data(format!("lda_model.json: {e}")))?;
        Ok(Self {
            config,
            model_file,
            predict_seed,
            majority_class,
            primary_model,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.model_file.vocabulary
    }
}
