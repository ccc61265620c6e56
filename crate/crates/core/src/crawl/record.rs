//! Crawl records and the persisted collection.
//!
//! On disk a collection is a directory holding `event.json` (the event spec
//! plus crawl metadata), `collection.jsonl` (one record per line in dequeue
//! order), and `raw/<sha256>.html` bodies written during the crawl.

use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::date_extract::DatetimeSource;
use crate::event::EventSpec;

#[derive(Debug, Error)]
pub enum CollectionError {
    #[error("collection i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed collection data: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrawlMode {
    Live,
    Archive,
}

impl std::fmt::Display for CrawlMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CrawlMode::Live => write!(f, "live"),
            CrawlMode::Archive => write!(f, "archive"),
        }
    }
}

impl std::str::FromStr for CrawlMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "live" => Ok(CrawlMode::Live),
            "archive" => Ok(CrawlMode::Archive),
            other => Err(format!("unknown crawl mode {other:?} (expected live|archive)")),
        }
    }
}

/// Why a resource was recorded without scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DismissReason {
    NoDatetime,
    FetchFailed,
    NotArchived,
    NonHtml,
}

/// One crawled resource with its scores, decision, provenance, and timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlRecord {
    /// Normalized original-form URI (URI-R in archive mode).
    pub uri: Url,
    /// Archive snapshot the content came from, archive mode only.
    pub uri_m: Option<Url>,
    pub depth: u32,
    pub dt_r: Option<DateTime<Utc>>,
    pub dt_r_source: Option<DatetimeSource>,
    pub r_cont: Option<f64>,
    pub r_temp: Option<f64>,
    pub r_aggr: Option<f64>,
    pub accepted: bool,
    pub dismissed_reason: Option<DismissReason>,
    pub archive_id: Option<String>,
    pub parent: Option<Url>,
    /// SHA-256 of the fetched body, keying into `raw/`.
    pub content_hash: Option<String>,
    pub fetched_at: DateTime<Utc>,
    pub elapsed_ms: i64,
}

impl CrawlRecord {
    pub fn is_dismissed(&self) -> bool {
        self.dismissed_reason.is_some()
    }
}

/// Ordered crawl output plus the event spec that produced it. Record order is
/// dequeue order; no two records share a normalized URI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    pub event: EventSpec,
    pub mode: CrawlMode,
    pub records: Vec<CrawlRecord>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CollectionMeta {
    event: EventSpec,
    mode: CrawlMode,
    started_at: DateTime<Utc>,
    finished_at: DateTime<Utc>,
}

impl Collection {
    pub fn accepted(&self) -> impl Iterator<Item = &CrawlRecord> {
        self.records.iter().filter(|r| r.accepted)
    }

    pub fn dismissed(&self) -> impl Iterator<Item = &CrawlRecord> {
        self.records.iter().filter(|r| r.is_dismissed())
    }

    /// Scored records: fetched, dated, and classified (accepted or rejected).
    pub fn scored(&self) -> impl Iterator<Item = &CrawlRecord> {
        self.records.iter().filter(|r| !r.is_dismissed())
    }

    /// Writes `event.json` and `collection.jsonl` under `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), CollectionError> {
        std::fs::create_dir_all(dir)?;
        let meta = CollectionMeta {
            event: self.event.clone(),
            mode: self.mode,
            started_at: self.started_at,
            finished_at: self.finished_at,
        };
        let mut event_json = serde_json::to_vec_pretty(&meta)?;
        event_json.push(b'\n');
        std::fs::write(dir.join("event.json"), event_json)?;

        let mut jsonl =
            std::io::BufWriter::new(std::fs::File::create(dir.join("collection.jsonl"))?);
        for record in &self.records {
            serde_json::to_writer(&mut jsonl, record)?;
            jsonl.write_all(b"\n")?;
        }
        jsonl.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, CollectionError> {
        let meta: CollectionMeta = serde_json::from_slice(&std::fs::read(dir.join("event.json"))?)?;
        let file = std::fs::File::open(dir.join("collection.jsonl"))?;
        let mut records = Vec::new();
        for line in std::io::BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        Ok(Collection {
            event: meta.event,
            mode: meta.mode,
            records,
            started_at: meta.started_at,
            finished_at: meta.finished_at,
        })
    }
}

/// Hex SHA-256 digest of a fetched body, the key for `raw/` storage.
pub fn content_digest(body: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(body);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relevance::TermVector;
    use chrono::TimeZone;

    fn sample_collection() -> Collection {
        let event = EventSpec {
            name: "sample".into(),
            dt_e: Utc.with_ymd_and_hms(2011, 1, 8, 0, 0, 1).unwrap(),
            dt_cp: Some(Utc.with_ymd_and_hms(2012, 1, 12, 0, 0, 1).unwrap()),
            wiki_revision_id: Some(471037980),
            seeds: vec![Url::parse("http://news.example/a").unwrap()],
            event_vector: TermVector::default(),
            th_cont: 0.6,
            th_temp: 0.9,
            alpha: 0.5,
            beta: 0.5,
            grace_live_secs: 86_400,
            grace_archive_secs: 172_800,
            max_depth: 5,
            sample_fraction: 0.6,
            repeats: 10,
            rng_seed: 7,
            grace_cutoff: true,
        };
        let start = Utc.with_ymd_and_hms(2018, 3, 1, 0, 0, 0).unwrap();
        let record = CrawlRecord {
            uri: Url::parse("http://news.example/a").unwrap(),
            uri_m: None,
            depth: 0,
            dt_r: Some(Utc.with_ymd_and_hms(2011, 1, 9, 0, 0, 1).unwrap()),
            dt_r_source: Some(DatetimeSource::HtmlMeta),
            r_cont: Some(0.8),
            r_temp: Some(1.0),
            r_aggr: Some(0.9),
            accepted: true,
            dismissed_reason: None,
            archive_id: None,
            parent: None,
            content_hash: Some(content_digest(b"<html>x</html>")),
            fetched_at: start + chrono::Duration::seconds(1),
            elapsed_ms: 1000,
        };
        let dismissed = CrawlRecord {
            uri: Url::parse("http://news.example/undated").unwrap(),
            uri_m: None,
            depth: 1,
            dt_r: None,
            dt_r_source: None,
            r_cont: None,
            r_temp: None,
            r_aggr: None,
            accepted: false,
            dismissed_reason: Some(DismissReason::NoDatetime),
            archive_id: None,
            parent: Some(Url::parse("http://news.example/a").unwrap()),
            content_hash: None,
            fetched_at: start + chrono::Duration::seconds(2),
            elapsed_ms: 2000,
        };
        Collection {
            event,
            mode: CrawlMode::Live,
            records: vec![record, dismissed],
            started_at: start,
            finished_at: start + chrono::Duration::seconds(3),
        }
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let collection = sample_collection();
        collection.save(dir.path()).unwrap();
        let loaded = Collection::load(dir.path()).unwrap();
        assert_eq!(loaded, collection);
    }

    #[test]
    fn saved_bytes_are_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let collection = sample_collection();
        collection.save(a.path()).unwrap();
        collection.save(b.path()).unwrap();
        for name in ["event.json", "collection.jsonl"] {
            assert_eq!(
                std::fs::read(a.path().join(name)).unwrap(),
                std::fs::read(b.path().join(name)).unwrap(),
                "{name} differs"
            );
        }
    }

    #[test]
    fn digest_is_stable_hex() {
        let d = content_digest(b"abc");
        assert_eq!(d, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn subsets_partition_records() {
        let c = sample_collection();
        assert_eq!(c.accepted().count(), 1);
        assert_eq!(c.dismissed().count(), 1);
        assert_eq!(c.scored().count(), 1);
    }
}
