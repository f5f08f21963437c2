//! Acceptance suite: the release-gating checks, one test per criterion.
//!
//! Each criterion prints a single `acceptance N: PASS` line (visible with
//! `--nocapture`) carrying its pinned tolerances; a violated bound fails the
//! test with a matching FAIL message. Runtime ceilings are asserted where a
//! criterion carries one. Criterion 7 needs the original dataset and reports
//! SKIP unless `PROTESTDUR_REAL_CSV` points at it; the synthetic criteria
//! stand alone.

use std::time::{Duration, Instant};

use protestdur_core::corpus::{self, duration_days, CorpusMatrix, CsvSchema, DurationClass};
use protestdur_core::derive_seed;
use protestdur_core::eval::{
    evaluate_holdout, metrics, ConfusionMatrix, LearnerSpec, MetricReport,
};
use protestdur_core::features::{build_table, FeatureRow, FeatureTable};
use protestdur_core::lda::{
    fit_gibbs, perplexity, FoldInParams, GibbsSampler, LdaHyperparams, LdaModel,
};
use protestdur_core::model_selection::{select_k, sweep_topics, SweepSettings};
use protestdur_core::rng::rng_from_seed;
use protestdur_core::sampling::{balance, doc_id_overlap, split, BalanceStrategy};
use protestdur_core::synthetic::{
    aligned_mean_cosine, planted_corpus, planted_rule_table, PlantedRuleSpec, PlantedTopicSpec,
};
use protestdur_core::trees::gain::evaluate_split;
use protestdur_core::trees::{fit_tree, TreeConfig};
use rand::Rng;

/// The corpus pinned for criteria 2 and 3: four planted topics.
fn planted_spec(seed: u64) -> PlantedTopicSpec {
    PlantedTopicSpec {
        k: 4,
        vocab_size: 200,
        docs: 400,
        doc_len: 60,
        alpha: 0.1,
        seed,
    }
}

/// Sweep settings pinned for criterion 2. The heavier-than-default priors
/// (α = β = 0.5) matter: β adds V·β of smoothing mass per topic, so past the
/// true topic count the per-topic token share shrinks and held-out
/// perplexity turns back up, giving the curve its selectable minimum.
fn planted_sweep_settings() -> SweepSettings<f64> {
    SweepSettings {
        alpha: Some(0.5),
        beta: 0.5,
        train_iterations: 150,
        burn_in: 50,
        fold_in: FoldInParams {
            iterations: 60,
            burn_in: 20,
        },
    }
}

#[test]
fn criterion_1_uniform_model_perplexity_equals_vocabulary_size() {
    let start = Instant::now();
    let fold_in = FoldInParams {
        iterations: 20,
        burn_in: 5,
    };
    // A model with zero observed counts has φ_kw = β/(Vβ) = 1/V for every
    // topic, so each held-out token contributes exactly 1/V regardless of
    // the inferred mixture.
    for v in [2usize, 10, 100] {
        let hyper = LdaHyperparams::<f64> {
            k: 3,
            alpha: 0.4,
            beta: 0.1,
            train_iterations: 1,
            burn_in: 0,
            seed: 1,
        };
        let model = LdaModel::from_counts(hyper, v, vec![0; 3 * v]).unwrap();
        let docs: Vec<Vec<(u32, u32)>> = (0..6u32)
            .map(|j| {
                let (a, b) = (j % v as u32, (j + 1) % v as u32);
                // Sparse rows need strictly increasing word ids.
                vec![(a.min(b), 3 + j), (a.max(b), 2)]
            })
            .collect();
        let heldout = CorpusMatrix::from_sparse_rows(docs, v).unwrap();
        let perp = perplexity::<f64>(&model, &heldout, &fold_in, 7).unwrap();
        assert!(
            (perp - v as f64).abs() < 1e-9,
            "acceptance 1: FAIL — uniform-φ perplexity {perp} vs V = {v} (tolerance 1e-9)"
        );
    }
    // Single-word vocabulary: every token is certain, perplexity 1.
    let hyper = LdaHyperparams::<f64> {
        k: 2,
        alpha: 0.4,
        beta: 0.1,
        train_iterations: 1,
        burn_in: 0,
        seed: 1,
    };
    let model = LdaModel::from_counts(hyper, 1, vec![0; 2]).unwrap();
    let heldout = CorpusMatrix::from_sparse_rows(vec![vec![(0, 5)], vec![(0, 2)]], 1).unwrap();
    let perp = perplexity::<f64>(&model, &heldout, &fold_in, 7).unwrap();
    assert!(
        (perp - 1.0).abs() < 1e-9,
        "acceptance 1: FAIL — single-word perplexity {perp} vs 1.0 (tolerance 1e-9)"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(1),
        "acceptance 1: FAIL — took {elapsed:?}, limit 1 s"
    );
    println!(
        "acceptance 1: PASS — uniform-φ perplexity equals V for V ∈ {{2, 10, 100}} and 1.0 \
         for a single-word vocabulary (tolerance 1e-9) in {elapsed:?}"
    );
}

#[test]
fn criterion_2_planted_topic_recovery() {
    let start = Instant::now();
    let settings = planted_sweep_settings();
    let candidates: Vec<usize> = (2..=8).collect();
    let trials = 10u64;
    let mut hits = 0;
    let mut selections = Vec::new();
    let mut worst_cosine = f64::INFINITY;
    for trial in 0..trials {
        let corpus = planted_corpus::<f64>(&planted_spec(derive_seed(900, &[trial]))).unwrap();
        let curve = sweep_topics::<f64>(
            &corpus.matrix,
            &candidates,
            5,
            &settings,
            derive_seed(901, &[trial]),
        )
        .unwrap();
        let k = select_k(&curve).unwrap();
        selections.push(k);
        if (3..=5).contains(&k) {
            hits += 1;
        }

        let hyper = LdaHyperparams {
            k: 4,
            alpha: 0.5,
            beta: 0.5,
            train_iterations: 150,
            burn_in: 50,
            seed: derive_seed(902, &[trial]),
        };
        let model = fit_gibbs::<f64>(&corpus.matrix, hyper).unwrap();
        let cosine = aligned_mean_cosine(&model.phi(), &corpus.phi);
        worst_cosine = worst_cosine.min(cosine);
        assert!(
            cosine >= 0.85,
            "acceptance 2: FAIL — trial {trial} aligned mean cosine {cosine:.4} < 0.85"
        );
    }
    assert!(
        hits >= 9,
        "acceptance 2: FAIL — sweep selected k ∈ {{3,4,5}} in only {hits}/{trials} seeds \
         (selections {selections:?})"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(300),
        "acceptance 2: FAIL — took {elapsed:?}, limit 5 min"
    );
    println!(
        "acceptance 2: PASS — K* = 4 recovered: sweep picked k ∈ {{3,4,5}} in {hits}/{trials} \
         seeds (all selections {selections:?}), worst aligned mean cosine \
         {worst_cosine:.4} ≥ 0.85, in {elapsed:?}"
    );
}

#[test]
fn criterion_3_gibbs_invariants_and_bit_identical_replay() {
    let start = Instant::now();
    let corpus = planted_corpus::<f64>(&planted_spec(31)).unwrap();
    let hyper = LdaHyperparams::<f64> {
        k: 4,
        alpha: 0.5,
        beta: 0.5,
        train_iterations: 100,
        burn_in: 30,
        seed: 32,
    };

    // Count conservation and φ/θ normalization after every one of 100 sweeps.
    let mut sampler = GibbsSampler::new(&corpus.matrix, hyper.clone()).unwrap();
    for sweep in 0..100 {
        sampler.sweep();
        if let Err(violation) = sampler.check_invariants() {
            panic!("acceptance 3: FAIL — invariant broken after sweep {sweep}: {violation}");
        }
    }

    // Same seed, two runs: the models must agree bit for bit.
    let once = fit_gibbs::<f64>(&corpus.matrix, hyper.clone()).unwrap();
    let twice = fit_gibbs::<f64>(&corpus.matrix, hyper).unwrap();
    assert_eq!(
        once, twice,
        "acceptance 3: FAIL — same-seed refit changed the model"
    );

    // Thread-count independence: run every parallel path under pools of 1
    // and 8 workers and compare the serialized results byte for byte.
    let parallel_outputs = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let curve =
                sweep_topics::<f64>(&corpus.matrix, &[3, 4, 5], 3, &planted_sweep_settings(), 33)
                    .unwrap();
            let model = fit_gibbs::<f64>(&corpus.matrix, planted_hyper(34)).unwrap();
            let labels = vec![DurationClass::ShortLived; corpus.matrix.num_docs()];
            let table = build_table(
                &corpus.matrix,
                &labels,
                &model,
                &FoldInParams {
                    iterations: 30,
                    burn_in: 10,
                },
                35,
            )
            .unwrap();
            serde_json::to_string(&(curve, model, table)).unwrap()
        })
    };
    let narrow = parallel_outputs(1);
    let wide = parallel_outputs(8);
    assert_eq!(
        narrow, wide,
        "acceptance 3: FAIL — 1-worker and 8-worker runs diverged"
    );
    let elapsed = start.elapsed();
    println!(
        "acceptance 3: PASS — invariants held for 100/100 sweeps; same-seed refit and \
         1-vs-8-worker runs bit-identical, in {elapsed:?}"
    );
}

fn planted_hyper(seed: u64) -> LdaHyperparams<f64> {
    LdaHyperparams {
        k: 4,
        alpha: 0.5,
        beta: 0.5,
        train_iterations: 60,
        burn_in: 20,
        seed,
    }
}

/// Reference metric computation: expand the matrix to per-row
/// (actual, predicted) pairs, recount by iteration, and apply the textbook
/// formulas in floating point.
fn oracle_metrics(cm: &ConfusionMatrix) -> MetricReport<f64> {
    let mut rows: Vec<(bool, bool)> = Vec::new();
    rows.extend(std::iter::repeat_n((true, true), cm.true_pos));
    rows.extend(std::iter::repeat_n((false, true), cm.false_pos));
    rows.extend(std::iter::repeat_n((false, false), cm.true_neg));
    rows.extend(std::iter::repeat_n((true, false), cm.false_neg));

    let count = |f: fn(&(bool, bool)) -> bool| rows.iter().filter(|r| f(r)).count() as f64;
    let tp = count(|&(a, p)| a && p);
    let fp = count(|&(a, p)| !a && p);
    let tn = count(|&(a, p)| !a && !p);
    let fn_ = count(|&(a, p)| a && !p);
    let n = rows.len() as f64;

    let ratio = |num: f64, den: f64| (den > 0.0).then_some(num / den);
    let sensitivity = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let balanced_accuracy = match (sensitivity, specificity) {
        (Some(se), Some(sp)) => Some((se + sp) / 2.0),
        _ => None,
    };
    let kappa = if n == 0.0 {
        None
    } else {
        let po = (tp + tn) / n;
        let pe = ((tp + fn_) * (tp + fp) + (fp + tn) * (fn_ + tn)) / (n * n);
        (pe != 1.0).then(|| (po - pe) / (1.0 - pe))
    };
    MetricReport {
        sensitivity,
        specificity,
        balanced_accuracy,
        kappa,
    }
}

fn assert_close(name: &str, case: &ConfusionMatrix, got: Option<f64>, want: Option<f64>) {
    match (got, want) {
        (None, None) => {}
        (Some(g), Some(w)) => assert!(
            (g - w).abs() < 1e-12,
            "acceptance 4: FAIL — {name} on {case:?}: {g} vs oracle {w} (tolerance 1e-12)"
        ),
        _ => panic!(
            "acceptance 4: FAIL — {name} on {case:?}: definedness mismatch ({got:?} vs {want:?})"
        ),
    }
}

#[test]
fn criterion_4_metrics_match_brute_force_oracle() {
    let start = Instant::now();
    let mut rng = rng_from_seed(404);
    let mut cases: Vec<ConfusionMatrix> = vec![
        ConfusionMatrix::from_counts(0, 0, 0, 0),
        ConfusionMatrix::from_counts(7, 0, 0, 0),
        ConfusionMatrix::from_counts(0, 7, 0, 0),
        ConfusionMatrix::from_counts(0, 0, 7, 0),
        ConfusionMatrix::from_counts(0, 0, 0, 7),
    ];
    while cases.len() < 1000 {
        cases.push(ConfusionMatrix::from_counts(
            rng.gen_range(0..=120),
            rng.gen_range(0..=120),
            rng.gen_range(0..=120),
            rng.gen_range(0..=120),
        ));
    }
    for case in &cases {
        let got: MetricReport<f64> = metrics(case);
        let want = oracle_metrics(case);
        assert_close("sensitivity", case, got.sensitivity, want.sensitivity);
        assert_close("specificity", case, got.specificity, want.specificity);
        assert_close(
            "balanced accuracy",
            case,
            got.balanced_accuracy,
            want.balanced_accuracy,
        );
        assert_close("kappa", case, got.kappa, want.kappa);
    }

    // The three worked examples. 90/20/80/10: p_o = 0.85, p_e = 0.5,
    // κ = 0.35/0.5 = 0.70 exactly.
    let perfect: MetricReport<f64> = metrics(&ConfusionMatrix::from_counts(50, 0, 50, 0));
    assert_eq!(perfect.kappa, Some(1.0), "acceptance 4: FAIL — perfect κ");
    let chance: MetricReport<f64> = metrics(&ConfusionMatrix::from_counts(25, 25, 25, 25));
    assert_eq!(chance.kappa, Some(0.0), "acceptance 4: FAIL — chance κ");
    let hand: MetricReport<f64> = metrics(&ConfusionMatrix::from_counts(90, 20, 80, 10));
    assert!(
        (hand.kappa.unwrap() - 0.70).abs() < 1e-12,
        "acceptance 4: FAIL — hand-computed κ 0.70 case gave {:?}",
        hand.kappa
    );
    let elapsed = start.elapsed();
    println!(
        "acceptance 4: PASS — metrics matched the per-row oracle on {} confusion matrices \
         (tolerance 1e-12) and the κ = 1 / 0 / 0.70 worked examples, in {elapsed:?}",
        cases.len()
    );
}

/// Every (t1..t4) combination over `k` values, labeled by `rule`.
fn exhaustive_grid(k: usize, rule: impl Fn(&[u32; 4]) -> DurationClass) -> FeatureTable {
    let k32 = k as u32;
    let mut rows = Vec::new();
    for a in 0..k32 {
        for b in 0..k32 {
            for c in 0..k32 {
                for d in 0..k32 {
                    let top_topics = [a, b, c, d];
                    rows.push(FeatureRow {
                        doc_id: rows.len() as u32,
                        top_topics,
                        label: rule(&top_topics),
                    });
                }
            }
        }
    }
    FeatureTable::new(rows, k).unwrap()
}

fn training_accuracy(table: &FeatureTable) -> f64 {
    let tree = fit_tree(table, &TreeConfig::default()).unwrap();
    let correct = table
        .rows
        .iter()
        .filter(|row| tree.classify(&row.top_topics) == row.label)
        .count();
    correct as f64 / table.len() as f64
}

#[test]
fn criterion_5_tree_training_accuracy_and_gain_ratio_tables() {
    let start = Instant::now();

    // Single-feature rule over the exhaustive 6^4 grid.
    let single = exhaustive_grid(6, |t| {
        if t[0] == 2 {
            DurationClass::Extended
        } else {
            DurationClass::ShortLived
        }
    });
    let acc = training_accuracy(&single);
    assert!(
        acc == 1.0,
        "acceptance 5: FAIL — single-feature grid training accuracy {acc} < 1.0"
    );

    // Two-feature XOR rule over the exhaustive 5^4 grid (bands of unequal
    // width keep the greedy first split informative).
    let xor = exhaustive_grid(5, |t| {
        if (t[0] < 2) != (t[1] < 2) {
            DurationClass::Extended
        } else {
            DurationClass::ShortLived
        }
    });
    let acc = training_accuracy(&xor);
    assert!(
        acc == 1.0,
        "acceptance 5: FAIL — XOR grid training accuracy {acc} < 1.0"
    );

    // Five fixed two-child tables against hand-computed entropies.
    // Children are [short, extended] counts; H in bits.
    struct GainCase {
        children: [[usize; 2]; 2],
        gain: f64,
        split_info: f64,
        gain_ratio: f64,
    }
    let cases = [
        // Perfect separation: gain = H(1/2) = 1, split halves evenly.
        GainCase {
            children: [[2, 0], [0, 2]],
            gain: 1.0,
            split_info: 1.0,
            gain_ratio: 1.0,
        },
        // Children repeat the parent mix: no information.
        GainCase {
            children: [[1, 1], [1, 1]],
            gain: 0.0,
            split_info: 1.0,
            gain_ratio: 0.0,
        },
        // Symmetric 3:1 children: gain = 1 − H(1/4) = 1 − 0.811278124459133.
        GainCase {
            children: [[3, 1], [1, 3]],
            gain: 0.188721875540867,
            split_info: 1.0,
            gain_ratio: 0.188721875540867,
        },
        // One pure child: gain = H(1/4) − 1/2.
        GainCase {
            children: [[2, 2], [0, 4]],
            gain: 0.311278124459133,
            split_info: 1.0,
            gain_ratio: 0.311278124459133,
        },
        // Uneven 1/6–5/6 split: gain = H(1/3) − (5/6)·H(2/5),
        // split_info = H(1/6).
        GainCase {
            children: [[1, 0], [3, 2]],
            gain: 0.109170338675599,
            split_info: 0.650022421648354,
            gain_ratio: 0.167948573833438,
        },
    ];
    for (i, case) in cases.iter().enumerate() {
        let eval = evaluate_split::<f64>(&case.children);
        for (name, got, want) in [
            ("gain", eval.gain, case.gain),
            ("split_info", eval.split_info, case.split_info),
            ("gain_ratio", eval.gain_ratio, case.gain_ratio),
        ] {
            assert!(
                (got - want).abs() < 1e-9,
                "acceptance 5: FAIL — table {i} {name}: {got} vs hand value {want} \
                 (tolerance 1e-9)"
            );
        }
    }
    let elapsed = start.elapsed();
    println!(
        "acceptance 5: PASS — training accuracy 1.0 on exhaustive single-feature (6^4) and \
         XOR (5^4) grids; 5 gain-ratio tables matched hand entropies (tolerance 1e-9), \
         in {elapsed:?}"
    );
}

#[test]
fn criterion_6_ensemble_ordering_on_noisy_planted_rule() {
    let start = Instant::now();
    let specs = [
        LearnerSpec::single(),
        LearnerSpec::bagged(25),
        LearnerSpec::forest(500, 2),
    ];
    let trials = 10u64;
    let mut sums = [0.0f64; 3];
    for trial in 0..trials {
        let table = planted_rule_table(&PlantedRuleSpec {
            rows: 1300,
            k: 9,
            noise: 0.10,
            seed: derive_seed(700, &[trial]),
        })
        .unwrap();
        let (train, test) = split(&table, 0.7, true, derive_seed(701, &[trial])).unwrap();
        for (i, spec) in specs.iter().enumerate() {
            let model = spec
                .fit(&train, derive_seed(702, &[trial, i as u64]))
                .unwrap();
            let (_, report) = evaluate_holdout::<f64>(&model, &test).unwrap();
            sums[i] += report.balanced_accuracy.expect("both classes in test");
        }
    }
    let [single, bagged, forest] = sums.map(|s| s / trials as f64);
    let tolerance = 0.01; // each gap may be at most one point negative
    assert!(
        bagged >= single - tolerance,
        "acceptance 6: FAIL — bagging {bagged:.4} fell more than 1 point below \
         the single tree {single:.4}"
    );
    assert!(
        forest >= bagged - tolerance,
        "acceptance 6: FAIL — forest {forest:.4} fell more than 1 point below \
         bagging {bagged:.4}"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(120),
        "acceptance 6: FAIL — took {elapsed:?}, limit 2 min"
    );
    println!(
        "acceptance 6: PASS — mean held-out balanced accuracy over {trials} seeds ordered \
         forest {forest:.4} ≥ bagging {bagged:.4} ≥ single tree {single:.4} \
         (each gap ≥ −1 point), in {elapsed:?}"
    );
}

/// Headline balanced accuracy reported for the original dataset; the
/// reproduction band is ±7 points because the exact corpus, preprocessing,
/// and sampler draws are not recoverable.
const REFERENCE_FOREST_BALANCED_ACCURACY: f64 = 0.8969;

#[test]
fn criterion_7_original_dataset_reproduction_when_supplied() {
    let Some(path) = std::env::var_os("PROTESTDUR_REAL_CSV") else {
        println!(
            "acceptance 7: SKIP — original dataset not supplied (set PROTESTDUR_REAL_CSV \
             to its CSV path); criteria 1–6 constitute acceptance"
        );
        return;
    };
    let path = std::path::PathBuf::from(path);
    let ingestion = corpus::ingest_csv(&path, &CsvSchema::default()).unwrap();
    let labels: Vec<DurationClass> = ingestion
        .records
        .iter()
        .map(|r| duration_days(r).class)
        .collect();
    let pp = corpus::PreprocessConfig::default();
    let docs = corpus::preprocess_corpus(&ingestion.records, &pp);
    let vocab = corpus::build_vocabulary(&docs, &pp).unwrap();
    let matrix = corpus::to_matrix(&docs, &vocab);

    let model = fit_gibbs::<f64>(
        &matrix,
        LdaHyperparams::with_default_priors(24, 1000, 200, 71),
    )
    .unwrap();
    let table = build_table(
        &matrix,
        &labels,
        &model,
        &FoldInParams {
            iterations: 100,
            burn_in: 50,
        },
        72,
    )
    .unwrap();
    // The published arithmetic balances the full table before splitting.
    let balanced = balance(&table, BalanceStrategy::BothToMajority, 73).unwrap();
    let (train, test) = split(&balanced, 0.7, true, 74).unwrap();

    let mut scores = Vec::new();
    for (i, spec) in [
        LearnerSpec::single(),
        LearnerSpec::bagged(25),
        LearnerSpec::forest(500, 2),
    ]
    .iter()
    .enumerate()
    {
        let fitted = spec.fit(&train, derive_seed(75, &[i as u64])).unwrap();
        let (_, report) = evaluate_holdout::<f64>(&fitted, &test).unwrap();
        scores.push(report.balanced_accuracy.expect("both classes present"));
    }
    let (single, bagged, forest) = (scores[0], scores[1], scores[2]);
    assert!(
        (forest - REFERENCE_FOREST_BALANCED_ACCURACY).abs() <= 0.07,
        "acceptance 7: FAIL — forest balanced accuracy {forest:.4} outside ±7 points \
         of {REFERENCE_FOREST_BALANCED_ACCURACY}"
    );
    assert!(
        forest > bagged && bagged > single,
        "acceptance 7: FAIL — ordering forest > bagging > single tree not reproduced \
         ({forest:.4}, {bagged:.4}, {single:.4})"
    );
    println!(
        "acceptance 7: PASS — original dataset: forest {forest:.4} within ±7 points of \
         {REFERENCE_FOREST_BALANCED_ACCURACY}, ordering {forest:.4} > {bagged:.4} > {single:.4}"
    );
}

/// A 649/224 labeled table over 24 topics with one row per document.
fn imbalanced_table() -> FeatureTable {
    let mut rng = rng_from_seed(808);
    let rows: Vec<FeatureRow> = (0..873u32)
        .map(|i| {
            let base = rng.gen_range(0..21u32);
            FeatureRow {
                doc_id: i,
                top_topics: [base, base + 1, base + 2, base + 3],
                label: if i < 649 {
                    DurationClass::ShortLived
                } else {
                    DurationClass::Extended
                },
            }
        })
        .collect();
    FeatureTable::new(rows, 24).unwrap()
}

#[test]
fn criterion_8_split_balance_arithmetic_and_leakage_audit() {
    let table = imbalanced_table();
    let (short, extended) = table.class_counts();
    assert_eq!((short, extended), (649, 224));

    // Balance-then-split: the published arithmetic.
    let balanced = balance(&table, BalanceStrategy::BothToMajority, 81).unwrap();
    assert_eq!(
        balanced.len(),
        1298,
        "acceptance 8: FAIL — both_to_majority total {} ≠ 1298",
        balanced.len()
    );
    assert_eq!(balanced.class_counts(), (649, 649));
    let (train, test) = split(&balanced, 0.7, true, 82).unwrap();
    assert_eq!(train.len() + test.len(), 1298);
    assert!(
        (train.len() as i64 - 909).abs() <= 1 && (test.len() as i64 - 389).abs() <= 1,
        "acceptance 8: FAIL — split sides {}/{} not within ±1 of 909/389",
        train.len(),
        test.len()
    );
    let paper_order_overlap = doc_id_overlap(&train, &test).len();

    // Default order: split the raw table first, balance only the training
    // side; no document may straddle the split.
    let (raw_train, raw_test) = split(&table, 0.7, true, 83).unwrap();
    let train_balanced = balance(&raw_train, BalanceStrategy::BothToMajority, 84).unwrap();
    let default_overlap = doc_id_overlap(&train_balanced, &raw_test);
    assert!(
        default_overlap.is_empty(),
        "acceptance 8: FAIL — split-first order leaked {} documents across the split",
        default_overlap.len()
    );
    println!(
        "acceptance 8: PASS — 649/224 balanced to 1298 and split {}/{} (within ±1 of \
         909/389); split-first order has zero doc_id overlap, balance-first order shares \
         {paper_order_overlap} documents across the split",
        train.len(),
        test.len()
    );
}
