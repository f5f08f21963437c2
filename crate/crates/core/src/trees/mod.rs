//! Gain-ratio decision trees over the four categorical topic features, plus
//! bootstrap-aggregated and feature-subsampled ensembles.
//!
//! The single-tree learner is a C4.5-style multiway tree: each internal node
//! splits on every observed value of the feature with the best positive
//! information gain ratio. Bagging refits the same tree on bootstrap
//! resamples; the forest additionally restricts each node to a random
//! feature subset of size `mtry`. Every tree consumes one pre-derived seed,
//! with the bootstrap drawn before any node-level draws, so `mtry = 4`
//! reproduces bagging tree-for-tree and results do not depend on thread
//! scheduling.

pub mod gain;

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DurationClass;
use crate::error::{Error, Result};
use crate::features::{FeatureTable, NUM_TOP_TOPICS};
use crate::rng::{derive_seed, rng_from_seed, PortableRng};
use gain::evaluate_split;

/// Splits with information gain at or below this are treated as zero.
const GAIN_EPS: f64 = 1e-12;

// Externally tagged on purpose: internal tagging buffers node contents,
// which loses serde_json's string→integer handling for the children keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        class: DurationClass,
        /// Training rows that reached this leaf: `[short_lived, extended]`.
        class_counts: [usize; 2],
    },
    Internal {
        feature: usize,
        children: BTreeMap<u32, TreeNode>,
        /// Child key holding the most training rows; feature values unseen
        /// in training route here.
        default_value: u32,
    },
}

impl TreeNode {
    /// Route a feature row to its leaf class.
    pub fn classify(&self, features: &[u32; NUM_TOP_TOPICS]) -> DurationClass {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class, .. } => return *class,
                TreeNode::Internal {
                    feature,
                    children,
                    default_value,
                } => {
                    node = children
                        .get(&features[*feature])
                        .unwrap_or_else(|| &children[default_value]);
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { children, .. } => {
                1 + children.values().map(TreeNode::depth).max().unwrap_or(0)
            }
        }
    }

    /// Structural invariants: internal nodes have at least two children and
    /// an in-map default value; leaf classes are the count argmax with ties
    /// to ShortLived.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        match self {
            TreeNode::Leaf {
                class,
                class_counts,
            } => {
                if class_counts == &[0, 0] {
                    return Err("leaf with no training rows".to_string());
                }
                let expected = if class_counts[1] > class_counts[0] {
                    DurationClass::Extended
                } else {
                    DurationClass::ShortLived
                };
                if *class != expected {
                    return Err(format!(
                        "leaf class {class} contradicts counts {class_counts:?}"
                    ));
                }
                Ok(())
            }
            TreeNode::Internal {
                feature,
                children,
                default_value,
            } => {
                if *feature >= NUM_TOP_TOPICS {
                    return Err(format!("feature index {feature} out of range"));
                }
                if children.len() < 2 {
                    return Err("internal node with fewer than 2 children".to_string());
                }
                if !children.contains_key(default_value) {
                    return Err(format!("default value {default_value} is not a child"));
                }
                children.values().try_for_each(TreeNode::check_invariants)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Nodes with fewer rows than this become leaves (children themselves
    /// may be smaller — a pure one-row child is a legitimate leaf).
    pub min_leaf: usize,
    /// Maximum number of internal levels; `None` grows to purity.
    pub max_depth: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            min_leaf: 2,
            max_depth: None,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::InvalidParameter(
                "min_leaf must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleMode {
    Single,
    Bagged,
    Forest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub trees: Vec<TreeNode>,
    pub mode: EnsembleMode,
    /// Node-level feature-subset size; present only in forest mode.
    pub mtry: Option<usize>,
    pub bootstrap_seed: u64,
}

impl EnsembleModel {
    pub fn single(tree: TreeNode) -> Self {
        Self {
            trees: vec![tree],
            mode: EnsembleMode::Single,
            mtry: None,
            bootstrap_seed: 0,
        }
    }

    /// Majority vote over trees; ties go to ShortLived. The fraction is the
    /// winning share of votes.
    pub fn predict(&self, features: &[u32; NUM_TOP_TOPICS]) -> (DurationClass, f64) {
        let extended = self
            .trees
            .iter()
            .filter(|t| t.classify(features) == DurationClass::Extended)
            .count();
        let total = self.trees.len();
        let short = total - extended;
        if extended > short {
            (DurationClass::Extended, extended as f64 / total as f64)
        } else {
            (DurationClass::ShortLived, short as f64 / total as f64)
        }
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.trees.is_empty() {
            return Err("ensemble with no trees".to_string());
        }
        if self.mode == EnsembleMode::Single && self.trees.len() != 1 {
            return Err(format!("single mode with {} trees", self.trees.len()));
        }
        match (self.mode, self.mtry) {
            (EnsembleMode::Forest, Some(m)) if (1..=NUM_TOP_TOPICS).contains(&m) => {}
            (EnsembleMode::Forest, m) => return Err(format!("forest mtry {m:?} out of range")),
            (_, Some(_)) => return Err("mtry set outside forest mode".to_string()),
            (_, None) => {}
        }
        self.trees.iter().try_for_each(TreeNode::check_invariants)
    }
}

struct Grower<'a> {
    rows: &'a [crate::features::FeatureRow],
    config: &'a TreeConfig,
    /// Forest mode: per-node feature subset size and the tree's generator.
    subset: Option<(usize, PortableRng)>,
}

impl Grower<'_> {
    fn counts(&self, idx: &[u32]) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &i in idx {
            counts[self.rows[i as usize].label.code() as usize] += 1;
        }
        counts
    }

    fn leaf(&self, counts: [usize; 2]) -> TreeNode {
        let class = if counts[1] > counts[0] {
            DurationClass::Extended
        } else {
            DurationClass::ShortLived
        };
        TreeNode::Leaf {
            class,
            class_counts: counts,
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        match &mut self.subset {
            None => (0..NUM_TOP_TOPICS).collect(),
            Some((mtry, rng)) => {
                let mut picked = rand::seq::index::sample(rng, NUM_TOP_TOPICS, *mtry).into_vec();
                picked.sort_unstable();
                picked
            }
        }
    }

    /// Group row indices by the value of `feature`, in first-appearance
    /// order (deterministic, independent of value magnitudes).
    fn group_by(&self, idx: &[u32], feature: usize) -> Vec<(u32, Vec<u32>)> {
        let mut groups: Vec<(u32, Vec<u32>)> = Vec::new();
        for &i in idx {
            let value = self.rows[i as usize].top_topics[feature];
            match groups.iter_mut().find(|(v, _)| *v == value) {
                Some((_, members)) => members.push(i),
                None => groups.push((value, vec![i])),
            }
        }
        groups
    }

    fn grow(&mut self, idx: &[u32], depth: usize) -> TreeNode {
        let counts = self.counts(idx);
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_capped = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || idx.len() < self.config.min_leaf {
            return self.leaf(counts);
        }

        // Candidate subsets are drawn even when no split survives, so the
        // per-tree random stream depends only on the visited node, not on
        // the outcome — required for the mtry = 4 ≡ bagging identity.
        let candidates = self.candidate_features();
        type Winner = (f64, usize, Vec<(u32, Vec<u32>)>);
        let mut best: Option<Winner> = None;
        for feature in candidates {
            let groups = self.group_by(idx, feature);
            if groups.len() < 2 {
                continue;
            }
            let histograms: Vec<[usize; 2]> = groups
                .iter()
                .map(|(_, members)| self.counts(members))
                .collect();
            let eval = evaluate_split::<f64>(&histograms);
            if eval.gain <= GAIN_EPS {
                continue;
            }
            // Strictly-greater keeps the smallest feature index on ties.
            if best
                .as_ref()
                .is_none_or(|(ratio, _, _)| eval.gain_ratio > *ratio)
            {
                best = Some((eval.gain_ratio, feature, groups));
            }
        }
        let Some((_, feature, groups)) = best else {
            return self.leaf(counts);
        };

        let default_value = groups
            .iter()
            .max_by_key(|(_, members)| members.len())
            .expect("non-empty groups")
            .0;
        // First-appearance recursion order keeps random-stream consumption
        // deterministic; BTreeMap then canonicalizes child ordering.
        let mut children = BTreeMap::new();
        for (value, members) in &groups {
            children.insert(*value, self.grow(members, depth + 1));
        }
        TreeNode::Internal {
            feature,
            children,
            default_value,
        }
    }
}

fn fit_rows(
    table: &FeatureTable,
    idx: &[u32],
    config: &TreeConfig,
    subset: Option<(usize, PortableRng)>,
) -> TreeNode {
    let mut grower = Grower {
        rows: &table.rows,
        config,
        subset,
    };
    grower.grow(idx, 0)
}

/// Fit one gain-ratio tree on the full table.
pub fn fit_tree(table: &FeatureTable, config: &TreeConfig) -> Result<TreeNode> {
    config.validate()?;
    if table.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot fit a tree on an empty table".to_string(),
        ));
    }
    let idx: Vec<u32> = (0..table.len() as u32).collect();
    Ok(fit_rows(table, &idx, config, None))
}

/// `n` index draws with replacement from `0..n`.
pub(crate) fn bootstrap_indices(n: usize, rng: &mut PortableRng) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..n as u32)).collect()
}

fn fit_ensemble(
    table: &FeatureTable,
    n_trees: usize,
    mtry: Option<usize>,
    config: &TreeConfig,
    seed: u64,
) -> Result<Vec<TreeNode>> {
    config.validate()?;
    if table.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot fit an ensemble on an empty table".to_string(),
        ));
    }
    if n_trees == 0 {
        return Err(Error::InvalidParameter(
            "ensemble needs at least 1 tree".to_string(),
        ));
    }
    Ok((0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, &[t as u64]));
            let idx = bootstrap_indices(table.len(), &mut rng);
            fit_rows(table, &idx, config, mtry.map(|m| (m, rng)))
        })
        .collect())
}

/// Bootstrap-aggregated trees (majority vote at prediction time).
pub fn fit_bagged(
    table: &FeatureTable,
    n_trees: usize,
    config: &TreeConfig,
    seed: u64,
) -> Result<EnsembleModel> {
    Ok(EnsembleModel {
        trees: fit_ensemble(table, n_trees, None, config, seed)?,
        mode: EnsembleMode::Bagged,
        mtry: None,
        bootstrap_seed: seed,
    })
}

/// Bagging plus a per-node random feature subset of size `mtry`.
pub fn fit_forest(
    table: &FeatureTable,
    n_trees: usize,
    mtry: usize,
    config: &TreeConfig,
    seed: u64,
) -> Result<EnsembleModel> {
    if !(1..=NUM_TOP_TOPICS).contains(&mtry) {
        return Err(Error::InvalidParameter(format!(
            "mtry must lie in 1..={NUM_TOP_TOPICS}, got {mtry}"
        )));
    }
    Ok(EnsembleModel {
        trees: fit_ensemble(table, n_trees, Some(mtry), config, seed)?,
        mode: EnsembleMode::Forest,
        mtry: Some(mtry),
        bootstrap_seed: seed,
    })
}

pub const TREES_FORMAT_VERSION: u32 = 1;

/// Versioned on-disk wrapper for a trained ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModelFile {
    pub format_version: u32,
    pub model: EnsembleModel,
}

impl EnsembleModelFile {
    pub fn new(model: EnsembleModel) -> Self {
        Self {
            format_version: TREES_FORMAT_VERSION,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(json)?;
        if file.format_version != TREES_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: file.format_version,
                expected: TREES_FORMAT_VERSION,
            });
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&json)
    }
}
