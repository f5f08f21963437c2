//! Class balancing and train/test splitting.
//!
//! Balancing duplicates or removes whole rows — never mutates features — so
//! every resampled row keeps its original `doc_id` and leakage across a
//! later split stays auditable.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::DurationClass;
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceStrategy {
    /// Keep the minority rows and append draws-with-replacement until the
    /// minority matches the majority.
    OversampleMinority,
    /// Keep a uniform without-replacement subset of the majority.
    UndersampleMajority,
    /// Both classes brought to the majority count. The majority is already
    /// there, so this is the oversampling strategy under the name used when
    /// matching the published 2 × 649 = 1298-row reconstruction.
    BothToMajority,
    /// Both classes moved to the (half-away-from-zero rounded) midpoint:
    /// minority oversampled up, majority undersampled down.
    BothToMidpoint,
}

impl BalanceStrategy {
    pub fn name(self) -> &'static str {
        match self {
            Self::OversampleMinority => "oversample_minority",
            Self::UndersampleMajority => "undersample_majority",
            Self::BothToMajority => "both_to_majority",
            Self::BothToMidpoint => "both_to_midpoint",
        }
    }
}

fn class_indices(table: &FeatureTable) -> (Vec<usize>, Vec<usize>) {
    let mut short = Vec::new();
    let mut extended = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        match row.label {
            DurationClass::ShortLived => short.push(i),
            DurationClass::Extended => extended.push(i),
        }
    }
    (short, extended)
}

/// Grow `indices` to `target` by appending uniform draws with replacement;
/// the originals all stay.
fn oversample_to(indices: &mut Vec<usize>, target: usize, rng: &mut crate::rng::PortableRng) {
    let originals = indices.len();
    while indices.len() < target {
        let pick = indices[rng.gen_range(0..originals)];
        indices.push(pick);
    }
}

/// Shrink `indices` to `target` by uniform sampling without replacement,
/// keeping the surviving rows in their original order.
fn undersample_to(indices: &mut Vec<usize>, target: usize, rng: &mut crate::rng::PortableRng) {
    indices.shuffle(rng);
    indices.truncate(target);
    indices.sort_unstable();
}

/// Resample to equal class counts. Row order: all surviving original rows in
/// table order, then oversample duplicates in draw order.
pub fn balance(table: &FeatureTable, strategy: BalanceStrategy, seed: u64) -> Result<FeatureTable> {
    let (mut short, mut extended) = class_indices(table);
    if short.is_empty() || extended.is_empty() {
        return Err(Error::SingleClass {
            present: if short.is_empty() {
                "Extended"
            } else {
                "ShortLived"
            },
        });
    }
    let mut rng = rng_from_seed(seed);
    let (lo, hi) = (
        short.len().min(extended.len()),
        short.len().max(extended.len()),
    );
    let target = match strategy {
        BalanceStrategy::OversampleMinority | BalanceStrategy::BothToMajority => hi,
        BalanceStrategy::UndersampleMajority => lo,
        BalanceStrategy::BothToMidpoint => ((lo + hi) as f64 / 2.0).round() as usize,
    };
    for class in [&mut short, &mut extended] {
        match class.len() {
            n if n < target => oversample_to(class, target, &mut rng),
            n if n > target => undersample_to(class, target, &mut rng),
            _ => {}
        }
    }
    // Originals keep table order; duplicates trail in draw order.
    let (n_short, n_ext) = table.class_counts();
    let mut kept: Vec<usize> = short
        .iter()
        .take(n_short.min(target))
        .chain(extended.iter().take(n_ext.min(target)))
        .copied()
        .collect();
    kept.sort_unstable();
    let extras = short
        .iter()
        .skip(n_short.min(target))
        .chain(extended.iter().skip(n_ext.min(target)))
        .copied();
    let rows = kept
        .into_iter()
        .chain(extras)
        .map(|i| table.rows[i])
        .collect();
    FeatureTable::new(rows, table.k)
}

/// Largest-remainder apportionment of the training side over classes so the
/// train total equals `round(n · fraction)` (half away from zero) and each
/// class ratio is preserved within one row.
fn train_targets(counts: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let train_total = (total as f64 * fraction).round() as usize;
    let quotas: Vec<f64> = counts.iter().map(|&c| c as f64 * fraction).collect();
    let mut targets: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = targets.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).expect("finite").then(a.cmp(&b))
    });
    for &c in order.iter().take(train_total.saturating_sub(assigned)) {
        targets[c] += 1;
    }
    // Never promise more rows than a class has.
    for (t, &c) in targets.iter_mut().zip(counts) {
        *t = (*t).min(c);
    }
    targets
}

/// Disjoint row-index split. Stratified mode draws the per-class training
/// quota from a shuffle of each class; otherwise one global shuffle is cut
/// at `round(n · fraction)`. Both sides keep original row order.
pub fn split(
    table: &FeatureTable,
    train_fraction: f64,
    stratified: bool,
    seed: u64,
) -> Result<(FeatureTable, FeatureTable)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let n = table.len();
    let mut rng = rng_from_seed(seed);
    let mut train_idx: Vec<usize> = Vec::new();
    if stratified {
        let (short, extended) = class_indices(table);
        let targets = train_targets(&[short.len(), extended.len()], train_fraction);
        for (mut class, target) in [short, extended].into_iter().zip(targets) {
            class.shuffle(&mut rng);
            train_idx.extend(class.into_iter().take(target));
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let target = (n as f64 * train_fraction).round() as usize;
        train_idx.extend(order.into_iter().take(target.min(n)));
    }
    train_idx.sort_unstable();
    if train_idx.is_empty() {
        return Err(Error::EmptySplitSide { side: "train" });
    }
    if train_idx.len() == n {
        return Err(Error::EmptySplitSide { side: "test" });
    }
    let mut in_train = vec![false; n];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let train_rows = train_idx.iter().map(|&i| table.rows[i]).collect();
    let test_rows = (0..n)
        .filter(|&i| !in_train[i])
        .map(|i| table.rows[i])
        .collect();
    Ok((
        FeatureTable::new(train_rows, table.k)?,
        FeatureTable::new(test_rows, table.k)?,
    ))
}

/// Sorted doc ids present on both sides — the leakage audit. Empty under
/// split-before-balance; duplicated minority rows can straddle the split
/// when balancing happens first.
pub fn doc_id_overlap(a: &FeatureTable, b: &FeatureTable) -> Vec<u32> {
    let left = a.doc_ids();
    let right = b.doc_ids();
    left.into_iter()
        .filter(|id| right.binary_search(id).is_ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureRow;
    use std::collections::BTreeMap;

    fn table(n_short: usize, n_extended: usize) -> FeatureTable {
        let mut rows = Vec::new();
        for i in 0..n_short + n_extended {
            rows.push(FeatureRow {
                doc_id: i as u32,
                // Distinct feature pattern per row so multiset checks bite.
                top_topics: [
                    (i % 7) as u32,
                    ((i / 7) % 7) as u32,
                    ((i / 49) % 7) as u32,
                    (i % 5) as u32,
                ],
                label: if i < n_short {
                    DurationClass::ShortLived
                } else {
                    DurationClass::Extended
                },
            });
        }
        FeatureTable::new(rows, 7).unwrap()
    }

    fn row_multiset(t: &FeatureTable, class: DurationClass) -> BTreeMap<([u32; 4], u32), usize> {
        let mut m = BTreeMap::new();
        for r in t.rows.iter().filter(|r| r.label == class) {
            *m.entry((r.top_topics, r.doc_id)).or_default() += 1;
        }
        m
    }

    #[test]
    fn both_to_majority_reconstructs_published_row_count() {
        let balanced = balance(&table(649, 224), BalanceStrategy::BothToMajority, 3).unwrap();
        assert_eq!(balanced.len(), 1298);
        assert_eq!(balanced.class_counts(), (649, 649));
    }

    #[test]
    fn already_balanced_input_is_unchanged() {
        let t = table(10, 10);
        for strategy in [
            BalanceStrategy::OversampleMinority,
            BalanceStrategy::UndersampleMajority,
            BalanceStrategy::BothToMajority,
            BalanceStrategy::BothToMidpoint,
        ] {
            let out = balance(&t, strategy, 9).unwrap();
            assert_eq!(out.rows, t.rows, "{}", strategy.name());
        }
    }

    #[test]
    fn oversample_keeps_every_original_row() {
        let t = table(4, 2);
        let out = balance(&t, BalanceStrategy::OversampleMinority, 1).unwrap();
        assert_eq!(out.class_counts(), (4, 4));
        let orig = row_multiset(&t, DurationClass::Extended);
        let grown = row_multiset(&out, DurationClass::Extended);
        for (key, &count) in &orig {
            assert!(grown[key] >= count, "original row {key:?} missing");
        }
        // No invented rows: every resampled row exists in the input.
        for key in grown.keys() {
            assert!(orig.contains_key(key));
        }
        // Majority untouched.
        assert_eq!(
            row_multiset(&out, DurationClass::ShortLived),
            row_multiset(&t, DurationClass::ShortLived)
        );
    }

    #[test]
    fn undersample_takes_subset_of_majority() {
        let t = table(6, 2);
        let out = balance(&t, BalanceStrategy::UndersampleMajority, 5).unwrap();
        assert_eq!(out.class_counts(), (2, 2));
        let orig = row_multiset(&t, DurationClass::ShortLived);
        for (key, &count) in &row_multiset(&out, DurationClass::ShortLived) {
            assert!(orig[key] >= count);
        }
        assert_eq!(
            row_multiset(&out, DurationClass::Extended),
            row_multiset(&t, DurationClass::Extended)
        );
    }

    #[test]
    fn midpoint_moves_both_classes() {
        let out = balance(&table(6, 2), BalanceStrategy::BothToMidpoint, 2).unwrap();
        assert_eq!(out.class_counts(), (4, 4));
    }

    #[test]
    fn balance_is_deterministic_and_rejects_single_class() {
        let t = table(5, 3);
        let a = balance(&t, BalanceStrategy::OversampleMinority, 4).unwrap();
        let b = balance(&t, BalanceStrategy::OversampleMinority, 4).unwrap();
        assert_eq!(a, b);
        let err = balance(&table(5, 0), BalanceStrategy::BothToMajority, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::SingleClass {
                present: "ShortLived"
            }
        ));
    }

    #[test]
    fn split_matches_published_sizes_within_one() {
        let balanced = balance(&table(649, 224), BalanceStrategy::BothToMajority, 3).unwrap();
        let (train, test) = split(&balanced, 0.7, true, 11).unwrap();
        assert_eq!(train.len() + test.len(), 1298);
        assert!(
            (train.len() as i64 - 909).abs() <= 1,
            "train = {}",
            train.len()
        );
        assert!(
            (test.len() as i64 - 389).abs() <= 1,
            "test = {}",
            test.len()
        );
        let (ts, te) = train.class_counts();
        assert!((ts as i64 - te as i64).abs() <= 1);
    }

    #[test]
    fn stratified_ten_row_example() {
        let (train, test) = split(&table(5, 5), 0.7, true, 2).unwrap();
        assert_eq!(train.len(), 7);
        assert_eq!(test.len(), 3);
        let (s, e) = train.class_counts();
        assert!((s, e) == (4, 3) || (s, e) == (3, 4), "got {s}/{e}");
    }

    #[test]
    fn split_is_a_partition() {
        let t = table(13, 9);
        let (train, test) = split(&t, 0.6, false, 8).unwrap();
        let mut union: Vec<FeatureRow> = train.rows.iter().chain(&test.rows).copied().collect();
        union.sort_by_key(|r| r.doc_id);
        assert_eq!(union, t.rows);
        assert!(doc_id_overlap(&train, &test).is_empty());
        let (again_train, again_test) = split(&t, 0.6, false, 8).unwrap();
        assert_eq!(train, again_train);
        assert_eq!(test, again_test);
    }

    #[test]
    fn split_rejects_degenerate_requests() {
        let t = table(3, 3);
        assert!(split(&t, 0.0, true, 0).is_err());
        assert!(split(&t, 1.0, true, 0).is_err());
        let one = table(1, 0);
        assert!(matches!(
            split(&one, 0.5, false, 0).unwrap_err(),
            Error::EmptySplitSide { .. }
        ));
    }

    #[test]
    fn balance_before_split_can_leak_doc_ids() {
        let balanced = balance(&table(40, 8), BalanceStrategy::BothToMajority, 6).unwrap();
        let (train, test) = split(&balanced, 0.7, true, 6).unwrap();
        // 8 minority rows duplicated to 40: straddling is all but certain.
        assert!(!doc_id_overlap(&train, &test).is_empty());
        // Split-first order cannot leak.
        let (train2, test2) = split(&table(40, 8), 0.7, true, 6).unwrap();
        assert!(doc_id_overlap(&train2, &test2).is_empty());
    }
}
