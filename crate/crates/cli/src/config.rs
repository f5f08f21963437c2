//! Declarative run configuration.
//!
//! One TOML file with five sections — `[data]`, `[preprocess]`, `[lda]`,
//! `[classify]`, `[run]` — every key optional, command-line flags overriding
//! file values. The pipeline echoes the fully resolved configuration into
//! the run directory, so a run config is always diffable and re-runnable.

use std::path::Path;

use protestdur_core::corpus::{CsvSchema, PreprocessConfig, Stopwords};
use protestdur_core::eval::LearnerSpec;
use protestdur_core::lda::{FoldInParams, LdaHyperparams};
use protestdur_core::model_selection::SweepSettings;
use protestdur_core::sampling::BalanceStrategy;
use protestdur_core::trees::TreeConfig;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult, PipelineArgs};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub preprocess: PreprocessSection,
    pub lda: LdaSection,
    pub classify: ClassifySection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Input protest CSV. Required (no usable default).
    pub input: String,
    pub text_column: String,
    pub start_column: String,
    pub end_column: String,
    /// chrono format for both date columns.
    pub date_format: String,
}

impl Default for DataSection {
    fn default() -> Self {
        let schema = CsvSchema::default();
        Self {
            input: String::new(),
            text_column: schema.text_column,
            start_column: schema.start_column,
            end_column: schema.end_column,
            date_format: schema.date_format,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub strip_numbers: bool,
    /// "smart" (the embedded list) or "none".
    pub stopwords: String,
    pub stem: bool,
    pub min_token_length: usize,
    pub min_corpus_frequency: u32,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        let cfg = PreprocessConfig::default();
        Self {
            lowercase: cfg.lowercase,
            strip_punctuation: cfg.strip_punctuation,
            strip_numbers: cfg.strip_numbers,
            stopwords: "smart".to_string(),
            stem: cfg.stem,
            min_token_length: cfg.min_token_length,
            min_corpus_frequency: cfg.min_corpus_frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSection {
    /// Fixed topic count; 0 selects by cross-validated perplexity sweep.
    pub k: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
    /// Folds for the sweep's held-out perplexity.
    pub sweep_folds: usize,
    /// Gibbs sweeps, used both inside sweep cells and for the final fit.
    pub iterations: usize,
    /// Sweeps discarded before averaging the document-topic mixtures.
    pub burn_in: usize,
    /// Document-topic prior; 0 means the 50/k default.
    pub alpha: f64,
    /// Topic-word prior.
    pub beta: f64,
    pub foldin_iterations: usize,
    pub foldin_burn_in: usize,
}

impl Default for LdaSection {
    fn default() -> Self {
        Self {
            k: 0,
            k_min: 2,
            k_max: 30,
            k_step: 1,
            sweep_folds: 10,
            iterations: 1000,
            burn_in: 200,
            alpha: 0.0,
            beta: 0.1,
            foldin_iterations: 100,
            foldin_burn_in: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    /// oversample_minority, undersample_majority, both_to_majority, or
    /// both_to_midpoint.
    pub balance: String,
    pub train_fraction: f64,
    pub stratified: bool,
    /// Balance the full table before splitting (the published arithmetic).
    /// Default order splits first and balances only the training side.
    pub paper_order: bool,
    /// Learners to fit, in report order: single_tree, bagged, forest.
    pub learners: Vec<String>,
    pub bag_trees: usize,
    pub forest_trees: usize,
    /// Features drawn per node in the forest (of the 4 available).
    pub mtry: usize,
    /// Nodes with fewer rows than this become leaves.
    pub min_leaf: usize,
    /// Maximum internal levels; 0 grows to purity.
    pub max_depth: usize,
    pub cv_folds: usize,
    pub cv_repeats: usize,
}

impl Default for ClassifySection {
    fn default() -> Self {
        Self {
            balance: BalanceStrategy::BothToMajority.name().to_string(),
            train_fraction: 0.7,
            stratified: true,
            paper_order: false,
            learners: vec![
                "single_tree".to_string(),
                "bagged".to_string(),
                "forest".to_string(),
            ],
            bag_trees: 25,
            forest_trees: 500,
            mtry: 2,
            min_leaf: 2,
            max_depth: 0,
            cv_folds: 10,
            cv_repeats: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Root seed; every stage derives its own stream from it.
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide. Any value produces
    /// results identical to jobs = 1.
    pub jobs: usize,
    pub out_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 2013,
            jobs: 0,
            out_dir: "run".to_string(),
        }
    }
}

impl RunConfig {
    /// Parse a TOML file; any unknown key or type mismatch is a
    /// configuration error.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply_overrides(&mut self, args: &PipelineArgs) {
        if let Some(p) = &args.input {
            self.data.input = p.display().to_string();
        }
        if let Some(p) = &args.out {
            self.run.out_dir = p.display().to_string();
        }
        if let Some(v) = args.seed {
            self.run.seed = v;
        }
        if let Some(v) = args.jobs {
            self.run.jobs = v;
        }
        if let Some(v) = args.k {
            self.lda.k = v;
        }
        if let Some(v) = args.k_min {
            self.lda.k_min = v;
        }
        if let Some(v) = args.k_max {
            self.lda.k_max = v;
        }
        if let Some(v) = args.k_step {
            self.lda.k_step = v;
        }
        if let Some(v) = args.sweep_folds {
            self.lda.sweep_folds = v;
        }
        if let Some(v) = args.iterations {
            self.lda.iterations = v;
        }
        if let Some(v) = args.burn_in {
            self.lda.burn_in = v;
        }
        if let Some(v) = args.alpha {
            self.lda.alpha = v;
        }
        if let Some(v) = args.beta {
            self.lda.beta = v;
        }
        if let Some(v) = &args.balance {
            self.classify.balance = v.clone();
        }
        if let Some(v) = args.train_fraction {
            self.classify.train_fraction = v;
        }
        if args.paper_order {
            self.classify.paper_order = true;
        }
        if let Some(v) = &args.learners {
            self.classify.learners = v.clone();
        }
        if let Some(v) = args.cv_folds {
            self.classify.cv_folds = v;
        }
        if let Some(v) = args.cv_repeats {
            self.classify.cv_repeats = v;
        }
    }

    /// Reject every value the pipeline could not run with. Anything caught
    /// here exits with the configuration code before any file is touched.
    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.data.input.is_empty() {
            return fail("no input CSV; set [data] input or pass --input".into());
        }
        self.preprocess_config()?;
        let lda = &self.lda;
        if lda.k != 0 && lda.k < 4 {
            return fail(format!(
                "k = {} is unusable: the classifier keeps the top four topics, \
                 so k must be 0 (sweep) or at least 4",
                lda.k
            ));
        }
        if lda.k == 0 {
            if lda.k_min < 2 {
                return fail(format!("k_min must be at least 2, got {}", lda.k_min));
            }
            if lda.k_max < lda.k_min {
                return fail(format!("k_max {} is below k_min {}", lda.k_max, lda.k_min));
            }
            if lda.k_step < 1 {
                return fail("k_step must be at least 1".into());
            }
            if lda.sweep_folds < 2 {
                return fail(format!(
                    "sweep_folds must be at least 2, got {}",
                    lda.sweep_folds
                ));
            }
        }
        if lda.iterations < 1 {
            return fail("iterations must be at least 1".into());
        }
        if lda.burn_in >= lda.iterations {
            return fail(format!(
                "burn_in {} must be below iterations {}",
                lda.burn_in, lda.iterations
            ));
        }
        if lda.foldin_iterations < 1 {
            return fail("foldin_iterations must be at least 1".into());
        }
        if lda.foldin_burn_in >= lda.foldin_iterations {
            return fail(format!(
                "foldin_burn_in {} must be below foldin_iterations {}",
                lda.foldin_burn_in, lda.foldin_iterations
            ));
        }
        if lda.alpha < 0.0 || !lda.alpha.is_finite() {
            return fail(format!(
                "alpha must be finite and non-negative, got {}",
                lda.alpha
            ));
        }
        if lda.beta <= 0.0 || !lda.beta.is_finite() {
            return fail(format!(
                "beta must be finite and positive, got {}",
                lda.beta
            ));
        }
        self.balance_strategy()?;
        let cls = &self.classify;
        if !(cls.train_fraction > 0.0 && cls.train_fraction < 1.0) {
            return fail(format!(
                "train_fraction must lie strictly between 0 and 1, got {}",
                cls.train_fraction
            ));
        }
        self.learner_specs()?;
        if cls.min_leaf < 1 {
            return fail("min_leaf must be at least 1".into());
        }
        if cls.cv_folds < 2 {
            return fail(format!("cv_folds must be at least 2, got {}", cls.cv_folds));
        }
        if cls.cv_repeats < 1 {
            return fail("cv_repeats must be at least 1".into());
        }
        if self.run.out_dir.is_empty() {
            return fail("out_dir must not be empty".into());
        }
        Ok(())
    }

    pub fn csv_schema(&self) -> CsvSchema {
        CsvSchema {
            text_column: self.data.text_column.clone(),
            start_column: self.data.start_column.clone(),
            end_column: self.data.end_column.clone(),
            date_format: self.data.date_format.clone(),
        }
    }

    pub fn preprocess_config(&self) -> CliResult<PreprocessConfig> {
        let stopwords = match self.preprocess.stopwords.as_str() {
            "smart" => Stopwords::Smart,
            "none" => Stopwords::None,
            other => {
                return Err(CliError::Config(format!(
                    "unknown stopword list '{other}' (expected smart or none)"
                )))
            }
        };
        let cfg = PreprocessConfig {
            lowercase: self.preprocess.lowercase,
            strip_punctuation: self.preprocess.strip_punctuation,
            strip_numbers: self.preprocess.strip_numbers,
            stopwords,
            stem: self.preprocess.stem,
            min_token_length: self.preprocess.min_token_length,
            min_corpus_frequency: self.preprocess.min_corpus_frequency,
        };
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Candidate topic counts for the sweep, already deduplicated ascending.
    pub fn k_candidates(&self) -> Vec<usize> {
        (self.lda.k_min..=self.lda.k_max)
            .step_by(self.lda.k_step)
            .collect()
    }

    pub fn sweep_settings(&self) -> SweepSettings<f64> {
        SweepSettings {
            alpha: (self.lda.alpha > 0.0).then_some(self.lda.alpha),
            beta: self.lda.beta,
            train_iterations: self.lda.iterations,
            burn_in: self.lda.burn_in,
            fold_in: self.fold_in(),
        }
    }

    pub fn hyperparams(&self, k: usize, seed: u64) -> LdaHyperparams<f64> {
        let alpha = if self.lda.alpha > 0.0 {
            self.lda.alpha
        } else {
            50.0 / k as f64
        };
        LdaHyperparams {
            k,
            alpha,
            beta: self.lda.beta,
            train_iterations: self.lda.iterations,
            burn_in: self.lda.burn_in,
            seed,
        }
    }

    pub fn fold_in(&self) -> FoldInParams {
        FoldInParams {
            iterations: self.lda.foldin_iterations,
            burn_in: self.lda.foldin_burn_in,
        }
    }

    pub fn balance_strategy(&self) -> CliResult<BalanceStrategy> {
        match self.classify.balance.as_str() {
            "oversample_minority" => Ok(BalanceStrategy::OversampleMinority),
            "undersample_majority" => Ok(BalanceStrategy::UndersampleMajority),
            "both_to_majority" => Ok(BalanceStrategy::BothToMajority),
            "both_to_midpoint" => Ok(BalanceStrategy::BothToMidpoint),
            other => Err(CliError::Config(format!(
                "unknown balance strategy '{other}' (expected oversample_minority, \
                 undersample_majority, both_to_majority, or both_to_midpoint)"
            ))),
        }
    }

    pub fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            min_leaf: self.classify.min_leaf,
            max_depth: (self.classify.max_depth > 0).then_some(self.classify.max_depth),
        }
    }

    /// The configured learners, in report order.
    pub fn learner_specs(&self) -> CliResult<Vec<LearnerSpec>> {
        if self.classify.learners.is_empty() {
            return Err(CliError::Config("learner list is empty".into()));
        }
        let config = self.tree_config();
        let mut specs = Vec::new();
        for name in &self.classify.learners {
            let spec = match name.as_str() {
                "single_tree" => LearnerSpec::SingleTree { config },
                "bagged" => {
                    if self.classify.bag_trees < 1 {
                        return Err(CliError::Config("bag_trees must be at least 1".into()));
                    }
                    LearnerSpec::Bagged {
                        n_trees: self.classify.bag_trees,
                        config,
                    }
                }
                "forest" => {
                    if self.classify.forest_trees < 1 {
                        return Err(CliError::Config("forest_trees must be at least 1".into()));
                    }
                    if !(1..=4).contains(&self.classify.mtry) {
                        return Err(CliError::Config(format!(
                            "mtry must lie in 1..=4, got {}",
                            self.classify.mtry
                        )));
                    }
                    LearnerSpec::Forest {
                        n_trees: self.classify.forest_trees,
                        mtry: self.classify.mtry,
                        config,
                    }
                }
                other => {
                    return Err(CliError::Config(format!(
                        "unknown learner '{other}' (expected single_tree, bagged, or forest)"
                    )))
                }
            };
            if specs.iter().any(|s: &LearnerSpec| s.name() == spec.name()) {
                return Err(CliError::Config(format!("learner '{name}' listed twice")));
            }
            specs.push(spec);
        }
        Ok(specs)
    }
}
