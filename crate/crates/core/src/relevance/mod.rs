//! Content relevance: sparse TF-IDF n-gram vectors over page text, cosine
//! scoring of candidates against the event vector, and the split-and-average
//! estimation of the content relevance threshold.

mod extract;

pub use extract::{extract_main_text, DensityExtractor, TextExtractor};

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{complement_indices, sample_indices};

#[derive(Debug, Error)]
pub enum RelevanceError {
    #[error("cannot split references: need at least 2, got {0}")]
    CannotSplitReferences(usize),
    #[error("sample fraction {0} leaves no held-out references")]
    EmptyHoldout(f64),
    #[error("threshold estimation needs at least 1 repeat")]
    ZeroRepeats,
    #[error("invalid IDF table at line {line}: {message}")]
    BadIdfTable { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lowercased Unicode word tokens; punctuation separates tokens and is
/// dropped. No stemming, no stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Document-frequency table supplying IDF weights. An empty table (corpus
/// size 0) weights every n-gram 1.0.
#[derive(Debug, Clone, Default)]
pub struct IdfTable {
    doc_freq: BTreeMap<String, u64>,
    corpus_size: u64,
}

impl IdfTable {
    pub fn uniform() -> Self {
        IdfTable::default()
    }

    pub fn from_counts<I, S>(corpus_size: u64, counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let doc_freq = counts.into_iter().map(|(k, v)| (k.into(), v)).collect();
        IdfTable { doc_freq, corpus_size }
    }

    /// Smoothed IDF: `ln((N + 1) / (df + 1)) + 1`. Unseen n-grams count as
    /// document frequency 0, so the weight never divides by zero.
    pub fn weight(&self, ngram: &str) -> f64 {
        let df = self.doc_freq.get(ngram).copied().unwrap_or(0);
        ((self.corpus_size as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
    }

    pub fn corpus_size(&self) -> u64 {
        self.corpus_size
    }

    /// Parses the TSV table format: a `#corpus_size<TAB><N>` header line, then
    /// one `ngram<TAB>doc_freq` row per line.
    pub fn from_tsv(reader: impl BufRead) -> Result<Self, RelevanceError> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(RelevanceError::BadIdfTable { line: 1, message: "empty file".into() })?;
        let header = header?;
        let corpus_size = header
            .strip_prefix("#corpus_size\t")
            .and_then(|v| v.trim().parse::<u64>().ok())
            .ok_or(RelevanceError::BadIdfTable {
                line: 1,
                message: "expected '#corpus_size<TAB><N>' header".into(),
            })?;
        let mut doc_freq = BTreeMap::new();
        for (idx, line) in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (ngram, df) = line.split_once('\t').ok_or(RelevanceError::BadIdfTable {
                line: idx + 1,
                message: "expected 'ngram<TAB>doc_freq'".into(),
            })?;
            let df: u64 = df.trim().parse().map_err(|e| RelevanceError::BadIdfTable {
                line: idx + 1,
                message: format!("bad doc_freq: {e}"),
            })?;
            if df > corpus_size {
                return Err(RelevanceError::BadIdfTable {
                    line: idx + 1,
                    message: format!("doc_freq {df} exceeds the corpus size {corpus_size}"),
                });
            }
            doc_freq.insert(ngram.to_string(), df);
        }
        Ok(IdfTable { doc_freq, corpus_size })
    }

    pub fn from_tsv_path(path: &std::path::Path) -> Result<Self, RelevanceError> {
        let file = std::fs::File::open(path)?;
        Self::from_tsv(std::io::BufReader::new(file))
    }
}

/// Sparse weighted vector over 1-grams and 2-grams. Weights are TF-IDF and
/// strictly positive; absent n-grams weigh zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermVector {
    entries: BTreeMap<String, f64>,
}

impl TermVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, ngram: &str) -> f64 {
        self.entries.get(ngram).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    fn dot(&self, other: &TermVector) -> f64 {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().map(|(k, w)| w * large.get(k)).sum()
    }

    #[cfg(test)]
    pub(crate) fn from_weights<I, S>(weights: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let entries =
            weights.into_iter().map(|(k, v)| (k.into(), v)).filter(|&(_, v)| v != 0.0).collect();
        TermVector { entries }
    }
}

fn count_ngrams(text: &str, counts: &mut BTreeMap<String, u64>) {
    let tokens = tokenize(text);
    for token in &tokens {
        *counts.entry(token.clone()).or_insert(0) += 1;
    }
    for pair in tokens.windows(2) {
        *counts.entry(format!("{} {}", pair[0], pair[1])).or_insert(0) += 1;
    }
}

/// TF-IDF vector over the 1-grams and 2-grams of one text.
pub fn build_term_vector(text: &str, idf: &IdfTable) -> TermVector {
    build_term_vector_multi(&[text], idf)
}

/// TF-IDF vector over several texts counted as one document. Token streams do
/// not join across text boundaries, so no 2-gram spans two input texts.
pub fn build_term_vector_multi<S: AsRef<str>>(texts: &[S], idf: &IdfTable) -> TermVector {
    let mut counts = BTreeMap::new();
    for text in texts {
        count_ngrams(text.as_ref(), &mut counts);
    }
    let entries = counts
        .into_iter()
        .map(|(ngram, tf)| {
            let w = tf as f64 * idf.weight(&ngram);
            (ngram, w)
        })
        .filter(|&(_, w)| w > 0.0)
        .collect();
    TermVector { entries }
}

/// Cosine similarity over the union of supports. Either vector empty yields 0.
/// Non-negative weights keep the result in [0, 1].
pub fn cosine(a: &TermVector, b: &TermVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (a.dot(b) / denom).clamp(0.0, 1.0)
}

/// Builds the event vector from the page text plus a seeded random sample of
/// `floor(fraction * N)` reference texts, and reports which references were
/// sampled so the complement can serve as the threshold test set. The sample
/// is repeat 0 of the shared seed schedule.
pub fn build_event_vector<S: AsRef<str>>(
    wiki_text: &str,
    reference_texts: &[S],
    sample_fraction: f64,
    idf: &IdfTable,
    rng_seed: u64,
) -> (TermVector, Vec<usize>) {
    let sampled = if reference_texts.is_empty() {
        Vec::new()
    } else {
        sample_indices(rng_seed, 0, reference_texts.len(), sample_fraction)
    };
    let mut texts: Vec<&str> = Vec::with_capacity(sampled.len() + 1);
    texts.push(wiki_text);
    texts.extend(sampled.iter().map(|&i| reference_texts[i].as_ref()));
    (build_term_vector_multi(&texts, idf), sampled)
}

/// How the held-out references form the candidate side of a threshold repeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSide {
    /// One vector over the concatenated held-out references (default reading).
    #[default]
    Concatenated,
    /// Mean of per-reference cosines over the held-out references.
    PerReferenceMean,
}

/// Estimates the content relevance threshold: per repeat, an event vector is
/// built from the page text plus a fresh seeded sample of the references, the
/// held-out references form a candidate vector, and their cosine is recorded.
/// The threshold is the mean cosine over all repeats.
pub fn content_threshold<S: AsRef<str>>(
    wiki_text: &str,
    reference_texts: &[S],
    repeats: u32,
    sample_fraction: f64,
    idf: &IdfTable,
    rng_seed: u64,
    side: CandidateSide,
) -> Result<f64, RelevanceError> {
    let n = reference_texts.len();
    if n < 2 {
        return Err(RelevanceError::CannotSplitReferences(n));
    }
    if repeats == 0 {
        return Err(RelevanceError::ZeroRepeats);
    }
    let mut scores = Vec::with_capacity(repeats as usize);
    for repeat in 0..repeats {
        let sampled = sample_indices(rng_seed, repeat, n, sample_fraction);
        let holdout = complement_indices(&sampled, n);
        if holdout.is_empty() {
            return Err(RelevanceError::EmptyHoldout(sample_fraction));
        }
        let mut event_texts: Vec<&str> = Vec::with_capacity(sampled.len() + 1);
        event_texts.push(wiki_text);
        event_texts.extend(sampled.iter().map(|&i| reference_texts[i].as_ref()));
        let event_vector = build_term_vector_multi(&event_texts, idf);

        let score = match side {
            CandidateSide::Concatenated => {
                let holdout_texts: Vec<&str> =
                    holdout.iter().map(|&i| reference_texts[i].as_ref()).collect();
                cosine(&event_vector, &build_term_vector_multi(&holdout_texts, idf))
            }
            CandidateSide::PerReferenceMean => {
                let sum: f64 = holdout
                    .iter()
                    .map(|&i| {
                        cosine(&event_vector, &build_term_vector(reference_texts[i].as_ref(), idf))
                    })
                    .sum();
                sum / holdout.len() as f64
            }
        };
        scores.push(score);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}
