//! Seeded synthetic data.
//!
//! Three generators used by tests, benchmarks, and the `gen-data` command:
//! planted-topic corpora (known φ/θ, for sampler-recovery and model-selection
//! checks), planted-rule feature tables (known decision boundary, for
//! classifier checks), and a full protest-event CSV whose categorical and
//! duration marginals reproduce the published descriptive statistics of the
//! 2013–2014 South African protest data set.

use chrono::NaiveDate;
use rand::distributions::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Dirichlet;

use crate::corpus::{CorpusMatrix, DurationClass};
use crate::error::{Error, Result};
use crate::features::{FeatureRow, FeatureTable};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;

/// Hamilton (largest-remainder) apportionment of `total` items over
/// percentage `shares`. Sums exactly to `total`; remainder ties go to the
/// earlier bucket.
pub fn apportion(total: usize, shares: &[f64]) -> Vec<usize> {
    let sum: f64 = shares.iter().sum();
    let quotas: Vec<f64> = shares.iter().map(|s| s / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).expect("finite shares").then(a.cmp(&b))
    });
    for &i in order.iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Cosine similarity; zero if either vector is all-zero.
pub fn cosine<F: Scalar>(a: &[F], b: &[F]) -> F {
    let dot = a.iter().zip(b).map(|(&x, &y)| x * y).sum::<F>();
    let na = a.iter().map(|&x| x * x).sum::<F>().sqrt();
    let nb = b.iter().map(|&x| x * x).sum::<F>().sqrt();
    if na == F::zero() || nb == F::zero() {
        F::zero()
    } else {
        dot / (na * nb)
    }
}

/// Greedy one-to-one matching of learned topics to reference topics by
/// descending cosine. Returns `assignment[learned] = reference`. Requires
/// `learned.len() <= reference.len()`.
pub fn greedy_align<F: Scalar>(learned: &[Vec<F>], reference: &[Vec<F>]) -> Vec<usize> {
    assert!(learned.len() <= reference.len());
    let mut assignment = vec![usize::MAX; learned.len()];
    let mut used = vec![false; reference.len()];
    for _ in 0..learned.len() {
        let mut best: (F, usize, usize) = (F::neg_infinity(), usize::MAX, usize::MAX);
        for (i, lv) in learned.iter().enumerate() {
            if assignment[i] != usize::MAX {
                continue;
            }
            for (j, rv) in reference.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let c = cosine(lv, rv);
                if c > best.0 {
                    best = (c, i, j);
                }
            }
        }
        assignment[best.1] = best.2;
        used[best.2] = true;
    }
    assignment
}

/// Mean cosine between each learned topic and its greedily matched
/// reference topic.
pub fn aligned_mean_cosine<F: Scalar>(learned: &[Vec<F>], reference: &[Vec<F>]) -> F {
    let assignment = greedy_align(learned, reference);
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cosine(&learned[i], &reference[j]))
        .sum::<F>();
    total / F::cast_usize(learned.len())
}

// ---------------------------------------------------------------------------
// Planted-topic corpora
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PlantedTopicSpec {
    pub k: usize,
    pub vocab_size: usize,
    pub docs: usize,
    pub doc_len: u32,
    /// Symmetric Dirichlet concentration for document mixtures; < 1 plants
    /// sparse, recoverable mixtures.
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus<F: Scalar> {
    pub matrix: CorpusMatrix,
    /// True topic-word rows: topic `t` is uniform over its block of
    /// `vocab_size / k` contiguous word ids.
    pub phi: Vec<Vec<F>>,
    pub theta: Vec<Vec<F>>,
    pub dominant_topic: Vec<usize>,
}

/// Draw a corpus from block-structured topics: θ_d ~ Dir(α), tokens from the
/// categorical mixture. Deterministic for a fixed `PlantedTopicSpec`.
pub fn planted_corpus<F: Scalar>(spec: &PlantedTopicSpec) -> Result<PlantedCorpus<F>> {
    if spec.k < 2 || spec.vocab_size < 2 * spec.k || spec.docs == 0 || spec.doc_len == 0 {
        return Err(Error::InvalidParameter(format!(
            "planted corpus needs K >= 2, V >= 2K, docs >= 1, doc_len >= 1, got K = {}, V = {}, docs = {}, doc_len = {}",
            spec.k, spec.vocab_size, spec.docs, spec.doc_len
        )));
    }
    let span = spec.vocab_size / spec.k;
    let dirichlet = Dirichlet::new(&vec![spec.alpha; spec.k])
        .map_err(|e| Error::InvalidParameter(format!("dirichlet alpha: {e}")))?;
    let mut rng = rng_from_seed(spec.seed);

    let mut phi = vec![vec![F::zero(); spec.vocab_size]; spec.k];
    for (t, row) in phi.iter_mut().enumerate() {
        // Last block absorbs any division remainder.
        let end = if t + 1 == spec.k {
            spec.vocab_size
        } else {
            (t + 1) * span
        };
        let width = end - t * span;
        for slot in &mut row[t * span..end] {
            *slot = F::ratio(1, width);
        }
    }

    let mut theta = Vec::with_capacity(spec.docs);
    let mut dominant = Vec::with_capacity(spec.docs);
    let mut rows = Vec::with_capacity(spec.docs);
    for _ in 0..spec.docs {
        let mix: Vec<f64> = dirichlet.sample(&mut rng);
        let dom = mix
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .expect("non-empty")
            .0;
        let mut counts = vec![0u32; spec.vocab_size];
        for _ in 0..spec.doc_len {
            let mut target = rng.gen::<f64>();
            let mut z = spec.k - 1;
            for (t, &p) in mix.iter().enumerate() {
                if target < p {
                    z = t;
                    break;
                }
                target -= p;
            }
            let end = if z + 1 == spec.k {
                spec.vocab_size
            } else {
                (z + 1) * span
            };
            let w = rng.gen_range(z * span..end) as u32;
            counts[w as usize] += 1;
        }
        rows.push(
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(w, &c)| (w as u32, c))
                .collect::<Vec<_>>(),
        );
        theta.push(mix.iter().map(|&p| F::cast_f64(p)).collect());
        dominant.push(dom);
    }
    Ok(PlantedCorpus {
        matrix: CorpusMatrix::from_sparse_rows(rows, spec.vocab_size)?,
        phi,
        theta,
        dominant_topic: dominant,
    })
}

// ---------------------------------------------------------------------------
// Planted-rule feature tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PlantedRuleSpec {
    pub rows: usize,
    /// Topic-id domain; must be at least 4 so rows carry four distinct ids.
    pub k: usize,
    /// Label-flip probability after applying the rule.
    pub noise: f64,
    pub seed: u64,
}

/// True label of a rule-table row before noise: Extended iff at least two of
/// {t1 low, t2 low, t3 high} hold, where "low" means `< max(1, k/3)` and
/// "high" means `>= k - max(1, k/3)`. t4 carries no signal.
pub fn planted_rule_label(top_topics: &[u32; 4], k: usize) -> DurationClass {
    let band = (k / 3).max(1) as u32;
    let votes = usize::from(top_topics[0] < band)
        + usize::from(top_topics[1] < band)
        + usize::from(top_topics[2] >= k as u32 - band);
    if votes >= 2 {
        DurationClass::Extended
    } else {
        DurationClass::ShortLived
    }
}

/// Feature table whose labels follow a two-of-three committee rule on the
/// first three positions, with `noise` label flips. Deterministic given the
/// spec.
pub fn planted_rule_table(spec: &PlantedRuleSpec) -> Result<FeatureTable> {
    if spec.k < 4 {
        return Err(Error::InvalidParameter(format!(
            "rule table needs k >= 4, got {}",
            spec.k
        )));
    }
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(Error::InvalidParameter(format!(
            "noise must lie in [0, 1], got {}",
            spec.noise
        )));
    }
    let mut rng = rng_from_seed(spec.seed);
    let mut ids: Vec<u32> = (0..spec.k as u32).collect();
    let mut rows = Vec::with_capacity(spec.rows);
    for doc_id in 0..spec.rows {
        let (picked, _) = ids.partial_shuffle(&mut rng, 4);
        let top = [picked[0], picked[1], picked[2], picked[3]];
        let mut label = planted_rule_label(&top, spec.k);
        if rng.gen::<f64>() < spec.noise {
            label = match label {
                DurationClass::ShortLived => DurationClass::Extended,
                DurationClass::Extended => DurationClass::ShortLived,
            };
        }
        rows.push(FeatureRow {
            doc_id: doc_id as u32,
            top_topics: top,
            label,
        });
    }
    FeatureTable::new(rows, spec.k)
}

// ---------------------------------------------------------------------------
// Protest-event CSV
// ---------------------------------------------------------------------------

const PROVINCES: [(&str, f64); 9] = [
    ("Gauteng", 37.0),
    ("Western Cape", 18.0),
    ("Kwazulu Natal", 14.0),
    ("Eastern Cape", 9.0),
    ("North West", 6.0),
    ("Limpopo", 6.0),
    ("Mpumalanga", 5.0),
    ("Free State", 3.0),
    ("Northern Cape", 2.0),
];

const ISSUES: [(&str, f64); 11] = [
    ("service delivery", 31.0),
    ("labour", 30.0),
    ("crime", 12.0),
    ("election", 6.0),
    ("vigilantism", 5.0),
    ("education", 5.0),
    ("political", 4.0),
    ("transport", 3.0),
    ("xenophobia", 2.0),
    ("individual", 1.0),
    ("environment", 1.0),
];

const STATES: [(&str, f64); 2] = [("peaceful", 55.0), ("violent", 45.0)];

/// Single-day through four-day shares, in percent of complete rows; the
/// remainder spreads over `TAIL_DURATIONS`.
const DURATION_SHARES: [(u32, f64); 5] = [(0, 74.34), (1, 11.34), (2, 4.58), (3, 2.06), (4, 2.17)];

const TAIL_DURATIONS: [u32; 19] = [
    5, 6, 7, 8, 9, 10, 11, 12, 13, 19, 21, 22, 23, 31, 34, 37, 39, 57, 65,
];

/// Eight latent grievance themes. Raw surface forms; the preprocessing stage
/// stems them, so banks avoid stopwords and words shorter than three letters.
const THEME_BANKS: [&[&str]; 8] = [
    &[
        "wages",
        "salary",
        "strike",
        "workers",
        "union",
        "overtime",
        "bonus",
        "employer",
        "miners",
        "wage",
        "retrenchment",
        "shifts",
    ],
    &[
        "water",
        "electricity",
        "sewage",
        "toilets",
        "pipes",
        "taps",
        "outage",
        "sanitation",
        "billing",
        "supply",
        "meters",
        "boreholes",
    ],
    &[
        "housing",
        "houses",
        "land",
        "eviction",
        "shacks",
        "settlement",
        "occupation",
        "plots",
        "tenants",
        "relocation",
        "informal",
        "title",
    ],
    &[
        "road",
        "taxi",
        "fares",
        "route",
        "potholes",
        "drivers",
        "transport",
        "licence",
        "traffic",
        "buses",
        "rank",
        "commuters",
    ],
    &[
        "municipality",
        "mayor",
        "councillor",
        "corruption",
        "tender",
        "demarcation",
        "ward",
        "council",
        "accountability",
        "billing",
        "audit",
        "administrator",
    ],
    &[
        "police", "crime", "murder", "arrest", "station", "drugs", "gangs", "justice", "bail",
        "patrols", "robbery", "suspects",
    ],
    &[
        "school",
        "students",
        "teachers",
        "fees",
        "classrooms",
        "textbooks",
        "university",
        "lectures",
        "tuition",
        "exams",
        "registration",
        "bursaries",
    ],
    &[
        "hospital",
        "clinic",
        "nurses",
        "medicine",
        "patients",
        "ambulance",
        "doctors",
        "wards",
        "treatment",
        "staffing",
        "equipment",
        "shortages",
    ],
];

/// Themes whose documents skew toward long durations: wage strikes, land
/// occupations, campus shutdowns.
const LONG_THEMES: [usize; 3] = [0, 2, 6];

const OPENERS: [&str; 6] = [
    "Residents of",
    "Angry residents of",
    "Community members in",
    "Workers at",
    "Protesters in",
    "Members of the community in",
];

const VERBS: [&str; 6] = [
    "blockaded roads demanding",
    "marched over",
    "gathered demanding",
    "picketed against",
    "demonstrated over",
    "shut down services over",
];

const TOWNS: [&str; 24] = [
    "Kagiso",
    "Tembisa",
    "Khayelitsha",
    "Soweto",
    "Mamelodi",
    "Umlazi",
    "Galeshewe",
    "Zandspruit",
    "Bekkersdal",
    "Sebokeng",
    "Madibeng",
    "Thembelihle",
    "Grabouw",
    "Sasolburg",
    "Ficksburg",
    "Standerton",
    "Ermelo",
    "Vuwani",
    "Lusikisiki",
    "Butterworth",
    "Jouberton",
    "Orange Farm",
    "Atteridgeville",
    "Diepsloot",
];

const CROSS_CUTTING: [&str; 8] = [
    "service",
    "delivery",
    "community",
    "demands",
    "officials",
    "department",
    "memorandum",
    "protest",
];

const FILLERS: [&str; 10] = [
    "the", "and", "for", "with", "over", "near", "after", "about", "their", "against",
];

#[derive(Debug, Clone)]
pub struct ProtestCsvSpec {
    /// Total data rows, including incomplete ones.
    pub rows: usize,
    /// Rows corrupted so ingestion drops them (empty text, unparseable end
    /// date, end before start — cycled in that order).
    pub incomplete: usize,
    /// Weight of uniform noise added to the theme signal when ranking
    /// documents for duration assignment; higher means labels are harder to
    /// predict from text.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for ProtestCsvSpec {
    fn default() -> Self {
        Self {
            rows: 876,
            incomplete: 3,
            label_noise: 0.35,
            seed: 20130201,
        }
    }
}

struct ProtestRow {
    province: String,
    issue: String,
    state: String,
    start: NaiveDate,
    end: String,
    reason: String,
}

fn quota_column(
    total: usize,
    table: &[(&str, f64)],
    rng: &mut crate::rng::PortableRng,
) -> Vec<String> {
    let shares: Vec<f64> = table.iter().map(|&(_, s)| s).collect();
    let counts = apportion(total, &shares);
    let mut column = Vec::with_capacity(total);
    for (&(name, _), &count) in table.iter().zip(&counts) {
        column.extend(std::iter::repeat_n(name.to_string(), count));
    }
    column.shuffle(rng);
    column
}

fn duration_column(total: usize) -> Vec<u32> {
    let mut shares: Vec<f64> = DURATION_SHARES.iter().map(|&(_, s)| s).collect();
    shares.push(100.0 - shares.iter().sum::<f64>());
    let counts = apportion(total, &shares);
    let mut named: Vec<u32> = Vec::with_capacity(total);
    for (&(days, _), &count) in DURATION_SHARES.iter().zip(&counts) {
        named.extend(std::iter::repeat_n(days, count));
    }
    let tail = counts[DURATION_SHARES.len()];
    for i in 0..tail {
        named.push(TAIL_DURATIONS[i % TAIL_DURATIONS.len()]);
    }
    // Longest first, so rank i receives the i-th largest duration.
    named.sort_unstable_by(|a, b| b.cmp(a));
    named
}

fn compose_reason(theta: &[f64], rng: &mut crate::rng::PortableRng) -> String {
    let mut words: Vec<String> = Vec::new();
    words.push(OPENERS[rng.gen_range(0..OPENERS.len())].to_string());
    words.push(TOWNS[rng.gen_range(0..TOWNS.len())].to_string());
    words.push(VERBS[rng.gen_range(0..VERBS.len())].to_string());
    let content = rng.gen_range(6..=14);
    for _ in 0..content {
        let mut target = rng.gen::<f64>();
        let mut theme = theta.len() - 1;
        for (t, &p) in theta.iter().enumerate() {
            if target < p {
                theme = t;
                break;
            }
            target -= p;
        }
        let bank = THEME_BANKS[theme];
        words.push(bank[rng.gen_range(0..bank.len())].to_string());
        if rng.gen::<f64>() < 0.30 {
            words.push(FILLERS[rng.gen_range(0..FILLERS.len())].to_string());
        }
        if rng.gen::<f64>() < 0.18 {
            words.push(CROSS_CUTTING[rng.gen_range(0..CROSS_CUTTING.len())].to_string());
        }
    }
    if rng.gen::<f64>() < 0.15 {
        words.push(format!("near the R-{}", rng.gen_range(20..90)));
    }
    let mut text = words.join(" ");
    text.push('.');
    text
}

/// Write the synthetic protest CSV (header
/// `id,province,issue,state,start_date,end_date,reason`). With the default
/// spec the complete rows reproduce the published marginals exactly:
/// 873 complete rows, durations 649/99/40/18/19 for days 0–4 with a 48-row
/// tail, and the province/issue/state splits of the source tables. Text is
/// drawn from eight planted grievance themes, and longer durations are
/// assigned to documents weighted toward the strike/land/education themes, so
/// duration is predictable from text but noisily so.
pub fn write_protest_csv<W: std::io::Write>(writer: W, spec: &ProtestCsvSpec) -> Result<()> {
    if spec.rows == 0 || spec.incomplete >= spec.rows {
        return Err(Error::InvalidParameter(format!(
            "need rows > incomplete >= 0, got rows = {}, incomplete = {}",
            spec.rows, spec.incomplete
        )));
    }
    if !(0.0..=1.0).contains(&spec.label_noise) {
        return Err(Error::InvalidParameter(format!(
            "label_noise must lie in [0, 1], got {}",
            spec.label_noise
        )));
    }
    let complete = spec.rows - spec.incomplete;
    let mut rng = rng_from_seed(derive_seed(spec.seed, &[0]));

    let provinces = quota_column(complete, &PROVINCES, &mut rng);
    let issues = quota_column(complete, &ISSUES, &mut rng);
    let states = quota_column(complete, &STATES, &mut rng);
    let durations_desc = duration_column(complete);

    let dirichlet = Dirichlet::new(&vec![0.3; THEME_BANKS.len()])
        .map_err(|e| Error::InvalidParameter(format!("dirichlet alpha: {e}")))?;
    let window_start = NaiveDate::from_ymd_opt(2013, 2, 1).expect("valid date");

    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(complete);
    let mut partial: Vec<ProtestRow> = Vec::with_capacity(complete);
    for i in 0..complete {
        let theta: Vec<f64> = dirichlet.sample(&mut rng);
        let long_mass: f64 = LONG_THEMES.iter().map(|&t| theta[t]).sum();
        scored.push((long_mass + spec.label_noise * rng.gen::<f64>(), i));
        let start = window_start + chrono::Days::new(rng.gen_range(0..365));
        partial.push(ProtestRow {
            province: provinces[i].clone(),
            issue: issues[i].clone(),
            state: states[i].clone(),
            start,
            end: String::new(),
            reason: compose_reason(&theta, &mut rng),
        });
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then(a.1.cmp(&b.1)));
    for (rank, &(_, i)) in scored.iter().enumerate() {
        let end = partial[i].start + chrono::Days::new(u64::from(durations_desc[rank]));
        partial[i].end = end.format("%Y-%m-%d").to_string();
    }

    // Corrupted rows, spliced at deterministic positions.
    let mut positions: Vec<usize> = (0..spec.rows).collect();
    let (broken_at, _) = positions.partial_shuffle(&mut rng, spec.incomplete);
    let mut broken_at: Vec<usize> = broken_at.to_vec();
    broken_at.sort_unstable();
    for (j, _) in broken_at.iter().enumerate() {
        let theta: Vec<f64> = dirichlet.sample(&mut rng);
        let start = window_start + chrono::Days::new(rng.gen_range(0..365));
        let mut row = ProtestRow {
            province: PROVINCES[rng.gen_range(0..PROVINCES.len())].0.to_string(),
            issue: ISSUES[rng.gen_range(0..ISSUES.len())].0.to_string(),
            state: STATES[rng.gen_range(0..STATES.len())].0.to_string(),
            start,
            end: (start + chrono::Days::new(1))
                .format("%Y-%m-%d")
                .to_string(),
            reason: compose_reason(&theta, &mut rng),
        };
        match j % 3 {
            0 => row.reason = String::new(),
            1 => row.end = String::new(),
            _ => {
                row.end = (start - chrono::Days::new(3))
                    .format("%Y-%m-%d")
                    .to_string()
            }
        }
        partial.push(row);
    }

    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "id",
        "province",
        "issue",
        "state",
        "start_date",
        "end_date",
        "reason",
    ])?;
    let mut complete_iter = 0usize;
    let mut broken_iter = 0usize;
    for id in 0..spec.rows {
        let row = if broken_iter < broken_at.len() && broken_at[broken_iter] == id {
            broken_iter += 1;
            &partial[complete + broken_iter - 1]
        } else {
            complete_iter += 1;
            &partial[complete_iter - 1]
        };
        w.write_record([
            id.to_string(),
            row.province.clone(),
            row.issue.clone(),
            row.state.clone(),
            row.start.format("%Y-%m-%d").to_string(),
            row.end.clone(),
            row.reason.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<protest csv>".into(),
        source: e,
    })?;
    Ok(())
}

/// In-memory convenience wrapper around [`write_protest_csv`].
pub fn protest_csv_string(spec: &ProtestCsvSpec) -> Result<String> {
    let mut buf = Vec::new();
    write_protest_csv(&mut buf, spec)?;
    String::from_utf8(buf).map_err(|e| Error::InvalidParameter(format!("non-utf8 csv: {e}")))
}
