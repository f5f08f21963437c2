//! Stopword handling.
//!
//! The embedded list is the SMART information-retrieval stopword list. Raw
//! entries such as `ain't` contain apostrophes, but matching happens after
//! tokenization has already stripped punctuation, so every entry is
//! normalized the same way at load time (`ain't` → `aint`).

use std::collections::BTreeSet;
use std::sync::OnceLock;

const SMART_LIST: &str = include_str!("smart_stopwords.txt");

/// Which stopword set tokenization removes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stopwords {
    /// The embedded SMART list.
    Smart,
    /// No stopword removal.
    None,
    /// A caller-supplied set; entries are normalized like the embedded list.
    Custom(BTreeSet<String>),
}

impl Stopwords {
    pub fn contains(&self, token: &str) -> bool {
        match self {
            Stopwords::Smart => smart_stopwords().contains(token),
            Stopwords::None => false,
            Stopwords::Custom(set) => set.contains(token),
        }
    }

    /// Build a custom set from raw entries, applying the same normalization
    /// as the embedded list.
    pub fn custom<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stopwords::Custom(normalize_entries(entries))
    }
}

fn normalize_entries<I, S>(entries: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    entries
        .into_iter()
        .map(|e| normalize_entry(e.as_ref()))
        .filter(|e| !e.is_empty())
        .collect()
}

fn normalize_entry(entry: &str) -> String {
    entry
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphabetic())
        .collect()
}

/// The normalized embedded list, built once.
pub fn smart_stopwords() -> &'static BTreeSet<String> {
    static SET: OnceLock<BTreeSet<String>> = OnceLock::new();
    SET.get_or_init(|| normalize_entries(SMART_LIST.lines()))
}
