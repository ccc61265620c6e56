//! The focused crawl loop.
//!
//! Seeds enter the frontier at depth 0 with priority 1.0. Workers repeatedly
//! pop the highest-priority entry (FIFO among ties), skip already-visited
//! URIs, fetch — directly in live mode, via TimeGate negotiation in archive
//! mode — resolve the resource datetime, score content and temporal
//! relevance, and record the outcome. Outlinks of accepted pages below the
//! depth bound enter the frontier with the parent's aggregate score as their
//! priority; rejected and dismissed pages contribute no outlinks.

mod frontier;
mod links;
mod record;

pub use frontier::{Frontier, FrontierEntry, FrontierOverflow};
pub use links::{extract_outlinks, normalize_uri, normalize_uri_str, NormalizeError};
pub use record::{
    content_digest, Collection, CollectionError, CrawlMode, CrawlRecord, DismissReason,
};

use std::collections::{BTreeMap, HashSet};
use std::sync::{Arc, Condvar, Mutex};

use chrono::{DateTime, Utc};
use thiserror::Error;
use url::Url;

use crate::clock::Clock;
use crate::date_extract::{resolve_live, resolve_memento, DatetimeLookup};
use crate::event::{EventError, EventSpec};
use crate::fetch::{fetch_follow, Fetcher};
use crate::memento::{strip_urim_pattern, MementoClient, MementoError};
use crate::relevance::{build_term_vector, cosine, IdfTable, TextExtractor};
use crate::temporal::{temporal_score, RelevanceScores, TemporalError, TemporalParams};

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("archive mode requires a memento client")]
    ArchiveModeRequiresClient,
    #[error(transparent)]
    Frontier(#[from] FrontierOverflow),
    #[error("invalid event spec: {0}")]
    BadSpec(#[from] EventError),
    #[error("invalid temporal interval: {0}")]
    BadInterval(#[from] TemporalError),
}

/// Acceptance rule: a resource joins the collection when its aggregate score
/// is at or above the event's aggregate threshold.
pub fn accept(scores: &RelevanceScores, spec: &EventSpec) -> bool {
    scores.r_aggr >= spec.th_aggr()
}

/// Hooks for instrumentation and body persistence. Implementations are called
/// from crawl workers and must be internally synchronized.
pub trait CrawlObserver: Send + Sync {
    /// A frontier entry was dequeued; `remaining_max` is the best priority
    /// still queued at that instant.
    fn on_dequeue(&self, _entry: &FrontierEntry, _remaining_max: Option<f64>) {}

    /// A record was finalized; `body` is the fetched content when one exists.
    fn on_record(&self, _record: &CrawlRecord, _body: Option<&[u8]>) {}
}

/// Observer that persists fetched bodies as `raw/<sha256>.html`.
pub struct RawBodySink {
    raw_dir: std::path::PathBuf,
}

impl RawBodySink {
    pub fn new(out_dir: &std::path::Path) -> std::io::Result<Self> {
        let raw_dir = out_dir.join("raw");
        std::fs::create_dir_all(&raw_dir)?;
        Ok(RawBodySink { raw_dir })
    }
}

impl CrawlObserver for RawBodySink {
    fn on_record(&self, record: &CrawlRecord, body: Option<&[u8]>) {
        let (Some(hash), Some(body)) = (&record.content_hash, body) else { return };
        let path = self.raw_dir.join(format!("{hash}.html"));
        if path.exists() {
            return;
        }
        if let Err(e) = std::fs::write(&path, body) {
            log::warn!("failed to persist body {}: {e}", path.display());
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrawlSettings {
    pub workers: usize,
    pub frontier_cap: usize,
    /// Evict the lowest-priority entry at the cap; disabled, the crawl aborts
    /// with a typed overflow instead.
    pub evict_on_full: bool,
    pub max_redirects: usize,
}

impl Default for CrawlSettings {
    fn default() -> Self {
        CrawlSettings { workers: 1, frontier_cap: 100_000, evict_on_full: true, max_redirects: 10 }
    }
}

/// One configured crawl over an event spec.
pub struct Crawler<'a> {
    pub spec: &'a EventSpec,
    pub mode: CrawlMode,
    pub fetcher: Arc<dyn Fetcher>,
    pub memento: Option<&'a MementoClient>,
    pub lookup: Arc<dyn DatetimeLookup>,
    pub idf: &'a IdfTable,
    pub extractor: Arc<dyn TextExtractor>,
    pub clock: Arc<dyn Clock>,
    pub settings: CrawlSettings,
    pub observers: Vec<Arc<dyn CrawlObserver>>,
}

struct Shared {
    frontier: Frontier,
    visited: HashSet<String>,
    records: BTreeMap<u64, CrawlRecord>,
    inflight: usize,
    next_seq: u64,
    failed: Option<FrontierOverflow>,
}

struct PageOutcome {
    record: CrawlRecord,
    body: Option<Vec<u8>>,
    outlinks: Vec<Url>,
}

impl<'a> Crawler<'a> {
    pub fn crawl(&self) -> Result<Collection, CrawlError> {
        self.spec.validate()?;
        if self.mode == CrawlMode::Archive && self.memento.is_none() {
            return Err(CrawlError::ArchiveModeRequiresClient);
        }
        let started_at = self.clock.now();
        let params = self.spec.temporal_params(self.mode, started_at)?;

        let mut frontier = Frontier::new(self.settings.frontier_cap, self.settings.evict_on_full);
        for seed in &self.spec.seeds {
            let seed = normalize_uri(seed).unwrap_or_else(|_| seed.clone());
            frontier.push(FrontierEntry::seed(seed))?;
        }

        let shared = Mutex::new(Shared {
            frontier,
            visited: HashSet::new(),
            records: BTreeMap::new(),
            inflight: 0,
            next_seq: 0,
            failed: None,
        });
        let idle = Condvar::new();

        let workers = self.settings.workers.max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| self.worker(&shared, &idle, &params, started_at));
            }
        });

        let shared = shared.into_inner().expect("crawl lock poisoned");
        if let Some(overflow) = shared.failed {
            return Err(overflow.into());
        }
        let finished_at = self.clock.now();
        Ok(Collection {
            event: self.spec.clone(),
            mode: self.mode,
            records: shared.records.into_values().collect(),
            started_at,
            finished_at,
        })
    }

    fn worker(
        &self,
        shared: &Mutex<Shared>,
        idle: &Condvar,
        params: &TemporalParams,
        started_at: DateTime<Utc>,
    ) {
        loop {
            let task = {
                let mut guard = shared.lock().expect("crawl lock poisoned");
                loop {
                    if guard.failed.is_some() {
                        idle.notify_all();
                        return;
                    }
                    match guard.frontier.pop() {
                        Some(entry) => {
                            let remaining = guard.frontier.peek_max_priority();
                            for obs in &self.observers {
                                obs.on_dequeue(&entry, remaining);
                            }
                            if !guard.visited.insert(entry.uri.as_str().to_string()) {
                                continue;
                            }
                            let seq = guard.next_seq;
                            guard.next_seq += 1;
                            guard.inflight += 1;
                            break Some((seq, entry));
                        }
                        None if guard.inflight == 0 => break None,
                        None => guard = idle.wait(guard).expect("crawl lock poisoned"),
                    }
                }
            };
            let Some((seq, entry)) = task else {
                idle.notify_all();
                return;
            };

            let outcome = match self.mode {
                CrawlMode::Live => self.process_live(&entry, params, started_at),
                CrawlMode::Archive => self.process_archive(&entry, params, started_at),
            };

            let mut guard = shared.lock().expect("crawl lock poisoned");
            let expand = outcome.record.accepted && entry.depth < self.spec.max_depth;
            if expand {
                let priority = outcome.record.r_aggr.unwrap_or(0.0);
                for link in &outcome.outlinks {
                    if guard.visited.contains(link.as_str()) {
                        continue;
                    }
                    let child = FrontierEntry::new(
                        link.clone(),
                        entry.depth + 1,
                        priority,
                        Some(entry.uri.clone()),
                    );
                    if let Err(overflow) = guard.frontier.push(child) {
                        guard.failed = Some(overflow);
                        break;
                    }
                }
            }
            for obs in &self.observers {
                obs.on_record(&outcome.record, outcome.body.as_deref());
            }
            guard.records.insert(seq, outcome.record);
            guard.inflight -= 1;
            idle.notify_all();
        }
    }

    fn base_record(&self, entry: &FrontierEntry, started_at: DateTime<Utc>) -> CrawlRecord {
        let fetched_at = self.clock.now();
        CrawlRecord {
            uri: entry.uri.clone(),
            uri_m: None,
            depth: entry.depth,
            dt_r: None,
            dt_r_source: None,
            r_cont: None,
            r_temp: None,
            r_aggr: None,
            accepted: false,
            dismissed_reason: None,
            archive_id: None,
            parent: entry.parent.clone(),
            content_hash: None,
            fetched_at,
            elapsed_ms: (fetched_at - started_at).num_milliseconds(),
        }
    }

    fn dismiss(
        &self,
        mut record: CrawlRecord,
        reason: DismissReason,
        body: Option<Vec<u8>>,
    ) -> PageOutcome {
        record.dismissed_reason = Some(reason);
        PageOutcome { record, body, outlinks: Vec::new() }
    }

    fn score(
        &self,
        record: &mut CrawlRecord,
        text: &str,
        dt_r: DateTime<Utc>,
        params: &TemporalParams,
    ) {
        let candidate = build_term_vector(text, self.idf);
        let r_cont = cosine(&self.spec.event_vector, &candidate);
        let r_temp = temporal_score(dt_r, params);
        let scores = RelevanceScores::new(r_cont, r_temp, self.spec.alpha, self.spec.beta);
        record.r_cont = Some(scores.r_cont);
        record.r_temp = Some(scores.r_temp);
        record.r_aggr = Some(scores.r_aggr);
        record.accepted = accept(&scores, self.spec);
    }

    fn process_live(
        &self,
        entry: &FrontierEntry,
        params: &TemporalParams,
        started_at: DateTime<Utc>,
    ) -> PageOutcome {
        let mut record = self.base_record(entry, started_at);
        let resp =
            match fetch_follow(self.fetcher.as_ref(), &entry.uri, &[], self.settings.max_redirects)
            {
                Ok(resp) => resp,
                Err(e) => {
                    log::info!("fetch failed for {}: {e}", entry.uri);
                    return self.dismiss(record, DismissReason::FetchFailed, None);
                }
            };
        if !resp.is_success() {
            return self.dismiss(record, DismissReason::FetchFailed, None);
        }
        if !resp.looks_like_html() {
            return self.dismiss(record, DismissReason::NonHtml, Some(resp.body));
        }

        let html = resp.body_text();
        record.content_hash = Some(content_digest(&resp.body));
        let Some(evidence) = resolve_live(&entry.uri, &html, self.lookup.as_ref()) else {
            return self.dismiss(record, DismissReason::NoDatetime, Some(resp.body));
        };
        record.dt_r = Some(evidence.value);
        record.dt_r_source = Some(evidence.source);

        self.score(&mut record, &self.extractor.extract(&html), evidence.value, params);
        let outlinks = extract_outlinks(&html, &resp.uri);
        PageOutcome { record, body: Some(resp.body), outlinks }
    }

    fn process_archive(
        &self,
        entry: &FrontierEntry,
        params: &TemporalParams,
        started_at: DateTime<Utc>,
    ) -> PageOutcome {
        let client = self.memento.expect("checked in crawl()");
        let mut record = self.base_record(entry, started_at);

        let negotiated = match client.negotiate(&entry.uri, self.spec.dt_e) {
            Ok(n) => n,
            Err(MementoError::NotArchived(_) | MementoError::NoPostEventMemento(_)) => {
                return self.dismiss(record, DismissReason::NotArchived, None);
            }
            Err(e) => {
                log::info!("negotiation failed for {}: {e}", entry.uri);
                return self.dismiss(record, DismissReason::FetchFailed, None);
            }
        };
        let memento = &negotiated.memento;
        let resp = negotiated.response;
        record.uri_m = Some(memento.uri_m.clone());
        record.archive_id = Some(memento.archive_id.clone());

        if !resp.looks_like_html() {
            return self.dismiss(record, DismissReason::NonHtml, Some(resp.body));
        }
        let html = resp.body_text();
        record.content_hash = Some(content_digest(&resp.body));
        let Some(evidence) = resolve_memento(memento, &resp.headers, self.lookup.as_ref(), params)
        else {
            return self.dismiss(record, DismissReason::NoDatetime, Some(resp.body));
        };
        record.dt_r = Some(evidence.value);
        record.dt_r_source = Some(evidence.source);

        self.score(&mut record, &self.extractor.extract(&html), evidence.value, params);

        // Outlinks in Memento bodies are rewritten to point back into the
        // archive; enqueue their original-form URIs so negotiation can find
        // the best snapshot across all archives. Unrewritten links leaving
        // the archive host are originals already; links into the archive host
        // with no recognizable pattern are archive chrome and are dropped.
        let archive_host = memento.uri_m.host_str().map(str::to_owned);
        let mut seen = HashSet::new();
        let mut outlinks = Vec::new();
        for link in extract_outlinks(&html, &memento.uri_m) {
            let original = match strip_urim_pattern(&link) {
                Some(orig) => orig,
                None if link.host_str().map(str::to_owned) == archive_host => continue,
                None => link,
            };
            let Ok(normalized) = normalize_uri(&original) else { continue };
            if seen.insert(normalized.as_str().to_string()) {
                outlinks.push(normalized);
            }
        }
        PageOutcome { record, body: Some(resp.body), outlinks }
    }
}
