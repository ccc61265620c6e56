//! Event model assembly: the event datetime, the filtered seed references of
//! the reference page version, the event vector, grace periods, and the
//! content/temporal/aggregate thresholds, all bundled into an [`EventSpec`]
//! that parameterizes one crawl.

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, Utc};
use regex::Regex;
use scraper::{Html, Selector};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;
use url::Url;

use crate::changepoint::{
    build_edit_curve, detect_change_point, select_version, ChangePointError, RevisionHistory,
};
use crate::crawl::{normalize_uri, CrawlMode};
use crate::fetch::{fetch_follow, Fetcher};
use crate::memento::{MementoClient, MementoError};
use crate::relevance::{
    build_event_vector, content_threshold, tokenize, CandidateSide, IdfTable, RelevanceError,
    TermVector, TextExtractor,
};
use crate::temporal::{
    aggregate_threshold, grace_period_archive, grace_period_live, temporal_threshold,
    TemporalError, TemporalParams,
};

#[derive(Debug, Error)]
pub enum EventError {
    #[error("no event date found on the page")]
    NoEventDate,
    #[error("no parseable date in {0:?}")]
    UnparseableDate(String),
    #[error("no seeds")]
    NoSeeds,
    #[error("event datetime is not before the interval upper bound")]
    EventAfterUpperBound,
    #[error("weights must be non-negative (alpha={alpha}, beta={beta})")]
    BadWeights { alpha: f64, beta: f64 },
    #[error("change point: {0}")]
    ChangePoint(#[from] ChangePointError),
    #[error("content threshold: {0}")]
    Relevance(#[from] RelevanceError),
    #[error("temporal threshold: {0}")]
    Temporal(#[from] TemporalError),
}

/// One external reference of the reference page version: its URI, the
/// publication datetime cited in the article, and (once negotiated) the
/// datetime the reference was archived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub uri: Url,
    pub cited_datetime: Option<DateTime<Utc>>,
    pub archived_datetime: Option<DateTime<Utc>>,
}

/// Everything that parameterizes one event crawl. Immutable once built and
/// safely shareable across crawl workers. The aggregate threshold is always
/// recomputed from its parts so it can never be stored inconsistently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub name: String,
    pub dt_e: DateTime<Utc>,
    /// Change-point datetime; absent when the edit history has no significant
    /// change point yet (recent events), in which case the crawl-start time
    /// bounds the temporal interval.
    pub dt_cp: Option<DateTime<Utc>>,
    pub wiki_revision_id: Option<u64>,
    pub seeds: Vec<Url>,
    pub event_vector: TermVector,
    pub th_cont: f64,
    pub th_temp: f64,
    pub alpha: f64,
    pub beta: f64,
    pub grace_live_secs: i64,
    pub grace_archive_secs: i64,
    pub max_depth: u32,
    pub sample_fraction: f64,
    pub repeats: u32,
    pub rng_seed: u64,
    pub grace_cutoff: bool,
}

impl EventSpec {
    /// Aggregate acceptance threshold, recomputed from the component
    /// thresholds and weights.
    pub fn th_aggr(&self) -> f64 {
        aggregate_threshold(self.th_cont, self.th_temp, self.alpha, self.beta)
    }

    pub fn grace_live(&self) -> Duration {
        Duration::seconds(self.grace_live_secs)
    }

    pub fn grace_archive(&self) -> Duration {
        Duration::seconds(self.grace_archive_secs)
    }

    /// Upper bound of the temporal interval: the change point, or the crawl
    /// start for events without one.
    pub fn upper_bound(&self, crawl_start: DateTime<Utc>) -> DateTime<Utc> {
        self.dt_cp.unwrap_or(crawl_start)
    }

    /// Temporal scoring parameters for a crawl in the given mode.
    pub fn temporal_params(
        &self,
        mode: CrawlMode,
        crawl_start: DateTime<Utc>,
    ) -> Result<TemporalParams, TemporalError> {
        let grace = match mode {
            CrawlMode::Live => self.grace_live(),
            CrawlMode::Archive => self.grace_archive(),
        };
        TemporalParams::with_cutoff(
            self.dt_e,
            self.upper_bound(crawl_start),
            grace,
            self.grace_cutoff,
        )
    }

    pub fn validate(&self) -> Result<(), EventError> {
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(EventError::BadWeights { alpha: self.alpha, beta: self.beta });
        }
        if let Some(dt_cp) = self.dt_cp {
            if self.dt_e >= dt_cp {
                return Err(EventError::EventAfterUpperBound);
            }
        }
        if self.seeds.is_empty() {
            return Err(EventError::NoSeeds);
        }
        Ok(())
    }
}

const MONTHS: &str = "january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec";

fn month_number(name: &str) -> u32 {
    match &name.to_ascii_lowercase()[..3] {
        "jan" => 1,
        "feb" => 2,
        "mar" => 3,
        "apr" => 4,
        "may" => 5,
        "jun" => 6,
        "jul" => 7,
        "aug" => 8,
        "sep" => 9,
        "oct" => 10,
        "nov" => 11,
        "dec" => 12,
        _ => unreachable!("regex admits only month names"),
    }
}

/// Timezone abbreviations seen in infobox datetimes, as UTC offsets in hours.
fn tz_offset_hours(abbrev: &str) -> Option<i32> {
    match abbrev.to_ascii_uppercase().as_str() {
        "UTC" | "GMT" | "UT" | "Z" => Some(0),
        "EST" => Some(-5),
        "EDT" => Some(-4),
        "CST" => Some(-6),
        "CDT" => Some(-5),
        "MST" => Some(-7),
        "MDT" => Some(-6),
        "PST" => Some(-8),
        "PDT" => Some(-7),
        "AKST" => Some(-9),
        "HST" => Some(-10),
        _ => None,
    }
}

/// A calendar date found in free text, with its byte offset.
#[derive(Debug, Clone, Copy)]
struct DateMatch {
    start: usize,
    end: usize,
    date: NaiveDate,
}

fn scan_dates(text: &str) -> Vec<DateMatch> {
    static MDY: OnceLock<Regex> = OnceLock::new();
    static DMY: OnceLock<Regex> = OnceLock::new();
    static ISO: OnceLock<Regex> = OnceLock::new();
    static SLASH: OnceLock<Regex> = OnceLock::new();

    let mdy = MDY.get_or_init(|| {
        Regex::new(&format!(r"(?i)\b({MONTHS})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?,?\s+(\d{{4}})\b"))
            .unwrap()
    });
    let dmy = DMY.get_or_init(|| {
        Regex::new(&format!(r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th)?\s+({MONTHS})\.?,?\s+(\d{{4}})\b"))
            .unwrap()
    });
    let iso = ISO.get_or_init(|| Regex::new(r"\b(\d{4})-(\d{2})-(\d{2})\b").unwrap());
    let slash = SLASH.get_or_init(|| Regex::new(r"\b(\d{1,2})/(\d{1,2})/(\d{4})\b").unwrap());

    let mut matches: Vec<DateMatch> = Vec::new();
    for c in mdy.captures_iter(text) {
        let m = c.get(0).unwrap();
        if let Some(date) = NaiveDate::from_ymd_opt(
            c[3].parse().unwrap(),
            month_number(&c[1]),
            c[2].parse().unwrap(),
        ) {
            matches.push(DateMatch { start: m.start(), end: m.end(), date });
        }
    }
    for c in dmy.captures_iter(text) {
        let m = c.get(0).unwrap();
        if let Some(date) = NaiveDate::from_ymd_opt(
            c[3].parse().unwrap(),
            month_number(&c[2]),
            c[1].parse().unwrap(),
        ) {
            matches.push(DateMatch { start: m.start(), end: m.end(), date });
        }
    }
    for c in iso.captures_iter(text) {
        let m = c.get(0).unwrap();
        if let Some(date) = NaiveDate::from_ymd_opt(
            c[1].parse().unwrap(),
            c[2].parse().unwrap(),
            c[3].parse().unwrap(),
        ) {
            matches.push(DateMatch { start: m.start(), end: m.end(), date });
        }
    }
    // US month/day/year, the format the infobox tables use
    for c in slash.captures_iter(text) {
        let m = c.get(0).unwrap();
        if let Some(date) = NaiveDate::from_ymd_opt(
            c[3].parse().unwrap(),
            c[1].parse().unwrap(),
            c[2].parse().unwrap(),
        ) {
            matches.push(DateMatch { start: m.start(), end: m.end(), date });
        }
    }
    matches.sort_by_key(|m| m.start);
    // overlapping hits from different patterns collapse to the earliest
    let mut out: Vec<DateMatch> = Vec::new();
    for m in matches {
        if out.last().is_none_or(|prev| m.start >= prev.end) {
            out.push(m);
        }
    }
    out
}

/// Parses the event datetime from infobox-style text. Dates come in several
/// shapes ("December 2, 2015", "31 October 2017", "12/02/2015"); an optional
/// time of day with a timezone abbreviation is honored and normalized to UTC.
/// When only a date is available the time is set to 00:00:01 of that day.
pub fn parse_event_datetime(infobox_text: &str) -> Result<DateTime<Utc>, EventError> {
    static TIME: OnceLock<Regex> = OnceLock::new();
    let time_re = TIME.get_or_init(|| {
        Regex::new(
            r"(?i)\b(\d{1,2}):(\d{2})(?::(\d{2}))?\s*(a\.?m\.?|p\.?m\.?)?\s*([A-Za-z]{1,4})?",
        )
        .unwrap()
    });

    let first = scan_dates(infobox_text)
        .into_iter()
        .next()
        .ok_or_else(|| EventError::UnparseableDate(infobox_text.trim().to_string()))?;

    let tail_end = (first.end + 48).min(infobox_text.len());
    let tail = &infobox_text[first.end..tail_end];

    let (hour, minute, second, offset_hours) = match time_re.captures(tail) {
        Some(c) => {
            let mut hour: u32 = c[1].parse().unwrap();
            let minute: u32 = c[2].parse().unwrap();
            let second: u32 = c.get(3).map_or(0, |s| s.as_str().parse().unwrap());
            if let Some(ampm) = c.get(4) {
                let pm = ampm.as_str().to_ascii_lowercase().starts_with('p');
                hour = match (hour, pm) {
                    (12, false) => 0,
                    (12, true) => 12,
                    (h, true) => h + 12,
                    (h, false) => h,
                };
            }
            let offset = c.get(5).and_then(|tz| tz_offset_hours(tz.as_str())).unwrap_or(0);
            if hour > 23 || minute > 59 || second > 59 {
                (0, 0, 1, 0)
            } else {
                (hour, minute, second, offset)
            }
        }
        None => (0, 0, 1, 0),
    };

    let naive = first
        .date
        .and_hms_opt(hour, minute, second)
        .ok_or_else(|| EventError::UnparseableDate(infobox_text.trim().to_string()))?;
    let offset = FixedOffset::east_opt(offset_hours * 3600).expect("offset in range");
    let local = naive
        .and_local_timezone(offset)
        .single()
        .ok_or_else(|| EventError::UnparseableDate(infobox_text.trim().to_string()))?;
    Ok(local.with_timezone(&Utc))
}

/// Text of the infobox "Date" row, the conventional home of the event
/// datetime.
pub fn find_event_date_text(wiki_html: &str) -> Option<String> {
    let doc = Html::parse_document(wiki_html);
    let row_sel = Selector::parse("table.infobox tr").unwrap();
    let th_sel = Selector::parse("th").unwrap();
    let td_sel = Selector::parse("td").unwrap();
    for row in doc.select(&row_sel) {
        let header = row
            .select(&th_sel)
            .next()
            .map(|th| th.text().collect::<String>().trim().to_ascii_lowercase());
        if header.as_deref() == Some("date") {
            if let Some(td) = row.select(&td_sel).next() {
                return Some(td.text().collect::<String>().trim().to_string());
            }
        }
    }
    None
}

/// Hosts whose links are wiki-internal rather than external references.
fn is_wiki_family_host(host: &str) -> bool {
    const FAMILY: &[&str] = &[
        "wikipedia.org",
        "wikimedia.org",
        "wikidata.org",
        "wiktionary.org",
        "wikisource.org",
        "mediawiki.org",
    ];
    let host = host.to_ascii_lowercase();
    FAMILY.iter().any(|f| host == *f || host.ends_with(&format!(".{f}")))
}

/// Representations that are not HTML by extension.
const NON_HTML_EXTENSIONS: &[&str] = &[
    ".pdf", ".jpg", ".jpeg", ".png", ".gif", ".svg", ".webp", ".mp3", ".mp4", ".avi", ".mov",
    ".zip", ".gz", ".tar", ".doc", ".docx", ".xls", ".xlsx", ".ppt", ".pptx", ".css", ".js",
    ".ico", ".xml", ".rss",
];

fn has_non_html_extension(uri: &Url) -> bool {
    let path = uri.path().to_ascii_lowercase();
    NON_HTML_EXTENSIONS.iter().any(|ext| path.ends_with(ext))
}

/// URI-level non-English heuristic: a country-code TLD combined with a
/// non-Latin (non-ASCII) path. Content-level filtering happens once the
/// reference text is fetched.
fn uri_looks_non_english(uri: &Url) -> bool {
    let cc_tld = uri
        .host_str()
        .and_then(|h| h.rsplit('.').next())
        .map(|tld| tld.len() == 2 && tld.chars().all(|c| c.is_ascii_alphabetic()))
        .unwrap_or(false);
    if !cc_tld {
        return false;
    }
    static ENCODED_HIGH: OnceLock<Regex> = OnceLock::new();
    let encoded_high = ENCODED_HIGH.get_or_init(|| Regex::new(r"%[89A-Fa-f][0-9A-Fa-f]").unwrap());
    let path = uri.path();
    !path.is_ascii() || encoded_high.is_match(path)
}

/// Common English function words; a text whose token stream is at least 10%
/// stopwords passes the English filter.
const STOPWORDS: &[&str] = &[
    "the", "of", "and", "a", "to", "in", "is", "was", "he", "for", "it", "with", "as", "his", "on",
    "be", "at", "by", "had", "not", "are", "but", "from", "or", "have", "an", "they", "which",
    "one", "you", "were", "her", "all", "she", "there", "would", "their", "we", "him", "been",
    "has", "when", "who", "will", "more", "no", "if", "out", "so", "said", "what", "its", "about",
    "into", "than", "them", "can", "only", "other", "new", "some", "could", "time", "these", "two",
    "may", "then", "do", "first", "any", "my", "now", "such", "like", "our", "over", "man", "me",
    "even", "most", "made", "after", "also", "did", "many", "before", "must", "through",
];

const ENGLISH_STOPWORD_RATIO: f64 = 0.1;

/// Stopword-ratio English check over fetched text. Empty text is treated as
/// inconclusive and passes.
pub fn looks_english(text: &str) -> bool {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return true;
    }
    let hits = tokens.iter().filter(|t| STOPWORDS.contains(&t.as_str())).count();
    hits as f64 / tokens.len() as f64 >= ENGLISH_STOPWORD_RATIO
}

/// Positions of "Retrieved" markers so access dates can be told apart from
/// publication dates in citation text.
fn retrieved_spans(text: &str) -> Vec<usize> {
    static RETRIEVED: OnceLock<Regex> = OnceLock::new();
    let re = RETRIEVED.get_or_init(|| Regex::new(r"(?i)\bretrieved\b").unwrap());
    re.find_iter(text).map(|m| m.end()).collect()
}

fn citation_datetime(text: &str) -> Option<DateTime<Utc>> {
    let dates = scan_dates(text);
    if dates.is_empty() {
        return None;
    }
    let retrieved = retrieved_spans(text);
    let is_access_date =
        |m: &DateMatch| retrieved.iter().any(|&r| m.start >= r && m.start.saturating_sub(r) <= 24);
    let chosen = dates.iter().find(|m| !is_access_date(m)).or_else(|| dates.first())?;
    Some(chosen.date.and_hms_opt(0, 0, 1).expect("valid time").and_utc())
}

fn collect_reference_anchors(wiki_html: &str, base: &Url) -> Vec<(Url, Option<DateTime<Utc>>)> {
    let doc = Html::parse_document(wiki_html);
    let ref_item_sel = Selector::parse("ol.references li, div.reflist li").unwrap();
    let anchor_sel = Selector::parse("a[href]").unwrap();
    let external_sel = Selector::parse("a.external[href]").unwrap();

    let mut found: Vec<(Url, Option<DateTime<Utc>>)> = Vec::new();
    let mut push_anchor = |href: &str, cited: Option<DateTime<Utc>>| {
        let Ok(resolved) = base.join(href) else { return };
        if !matches!(resolved.scheme(), "http" | "https") {
            return;
        }
        let Some(host) = resolved.host_str() else { return };
        if is_wiki_family_host(host) {
            return;
        }
        found.push((resolved, cited));
    };

    let mut saw_reference_list = false;
    for item in doc.select(&ref_item_sel) {
        saw_reference_list = true;
        let text: String = item.text().collect();
        let cited = citation_datetime(&text);
        for anchor in item.select(&anchor_sel) {
            if let Some(href) = anchor.value().attr("href") {
                push_anchor(href, cited);
            }
        }
    }
    if !saw_reference_list {
        // pages without a rendered reference list: fall back to explicitly
        // external anchors anywhere in the document
        for anchor in doc.select(&external_sel) {
            if let Some(href) = anchor.value().attr("href") {
                push_anchor(href, None);
            }
        }
    }
    found
}

/// All external references of the page in document order, deduplicated on
/// normalized URIs, with citation dates when the reference markup carries
/// one. No representation or language filtering yet.
pub fn extract_reference_entries(wiki_html: &str, base: &Url) -> Vec<ReferenceEntry> {
    let mut seen = std::collections::HashSet::new();
    let mut entries = Vec::new();
    for (uri, cited) in collect_reference_anchors(wiki_html, base) {
        let normalized = match normalize_uri(&uri) {
            Ok(n) => n,
            Err(_) => continue,
        };
        if !seen.insert(normalized.to_string()) {
            continue;
        }
        entries.push(ReferenceEntry {
            uri: normalized,
            cited_datetime: cited,
            archived_datetime: None,
        });
    }
    entries
}

/// Extracts the external references of the reference page version as seed
/// candidates: reference-list anchors only, resolved against `base`,
/// deduplicated in document order, with citation dates when the reference
/// markup carries one. Non-HTML representations (by extension) and
/// URI-level non-English targets are removed.
pub fn extract_seeds(wiki_html: &str, base: &Url) -> Result<Vec<ReferenceEntry>, EventError> {
    let entries: Vec<ReferenceEntry> = extract_reference_entries(wiki_html, base)
        .into_iter()
        .filter(|entry| !has_non_html_extension(&entry.uri) && !uri_looks_non_english(&entry.uri))
        .collect();
    if entries.is_empty() {
        return Err(EventError::NoSeeds);
    }
    Ok(entries)
}

/// Configuration knobs of [`build_event_spec`].
#[derive(Debug, Clone)]
pub struct EventBuildConfig {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub repeats: u32,
    pub sample_fraction: f64,
    pub rng_seed: u64,
    pub max_depth: u32,
    /// Which grace period feeds the temporal threshold estimation.
    pub mode: CrawlMode,
    pub candidate_side: CandidateSide,
    pub grace_cutoff: bool,
}

impl EventBuildConfig {
    pub fn new(name: impl Into<String>) -> Self {
        EventBuildConfig {
            name: name.into(),
            alpha: 0.5,
            beta: 0.5,
            repeats: 10,
            sample_fraction: 0.6,
            rng_seed: 0,
            max_depth: 5,
            mode: CrawlMode::Live,
            candidate_side: CandidateSide::default(),
            grace_cutoff: true,
        }
    }
}

/// External collaborators [`build_event_spec`] draws on.
pub struct EventSources<'a> {
    pub fetcher: &'a dyn Fetcher,
    /// Supplies archival datetimes for the archive grace period; without it
    /// the archive grace falls back to a quarter of the interval.
    pub memento: Option<&'a MementoClient>,
    pub idf: &'a IdfTable,
    pub extractor: &'a dyn TextExtractor,
    /// Crawl start; bounds the temporal interval when no change point exists.
    pub now: DateTime<Utc>,
}

/// Fetches a reference and returns its extracted main text when it is an
/// English HTML page.
fn fetch_reference_text(
    uri: &Url,
    fetcher: &dyn Fetcher,
    extractor: &dyn TextExtractor,
) -> Option<String> {
    let resp = match fetch_follow(fetcher, uri, &[], 10) {
        Ok(resp) => resp,
        Err(e) => {
            log::info!("dropping reference {uri}: {e}");
            return None;
        }
    };
    if !resp.is_success() {
        log::info!("dropping reference {uri}: status {}", resp.status);
        return None;
    }
    if !resp.looks_like_html() {
        log::info!("dropping reference {uri}: not an HTML representation");
        return None;
    }
    let text = extractor.extract(&resp.body_text());
    if !looks_english(&text) {
        log::info!("dropping reference {uri}: failed the English heuristic");
        return None;
    }
    Some(text)
}

/// Assembles the full [`EventSpec`] from the reference page version:
/// change-point datetime (falling back to the live page when none is
/// significant), event datetime, filtered seeds, event vector, grace
/// periods, and all thresholds.
pub fn build_event_spec(
    wiki_html: &str,
    base: &Url,
    history: &RevisionHistory,
    config: &EventBuildConfig,
    sources: &EventSources<'_>,
) -> Result<EventSpec, EventError> {
    if config.alpha < 0.0 || config.beta < 0.0 {
        return Err(EventError::BadWeights { alpha: config.alpha, beta: config.beta });
    }

    // reference page version via edit-frequency change point
    let (dt_cp, wiki_revision_id) = match build_edit_curve(history) {
        Ok(curve) => match detect_change_point(&curve) {
            Ok(day) => {
                let dt_cp = curve.day_datetime(day);
                let revid = select_version(history, dt_cp)?;
                (Some(dt_cp), Some(revid))
            }
            Err(ChangePointError::NoSignificantChangePoint | ChangePointError::CurveTooShort) => {
                (None, None)
            }
            Err(e) => return Err(e.into()),
        },
        Err(ChangePointError::NoRevisions) => (None, None),
        Err(e) => return Err(e.into()),
    };

    let date_text = find_event_date_text(wiki_html).ok_or(EventError::NoEventDate)?;
    let dt_e = parse_event_datetime(&date_text)?;

    let upper = dt_cp.unwrap_or(sources.now);
    if dt_e >= upper {
        return Err(EventError::EventAfterUpperBound);
    }
    let delta_t = (upper - dt_e) / 4;

    // seeds, their texts, and the English/content-type filter
    let candidates = extract_seeds(wiki_html, base)?;
    let mut references: Vec<ReferenceEntry> = Vec::new();
    let mut reference_texts: Vec<String> = Vec::new();
    for entry in candidates {
        if let Some(text) = fetch_reference_text(&entry.uri, sources.fetcher, sources.extractor) {
            references.push(entry);
            reference_texts.push(text);
        }
    }
    if references.is_empty() {
        return Err(EventError::NoSeeds);
    }

    // archival datetimes for the archive grace period
    if let Some(client) = sources.memento {
        for entry in references.iter_mut() {
            let Some(cited) = entry.cited_datetime else { continue };
            match client.negotiate(&entry.uri, cited) {
                Ok(negotiated) => entry.archived_datetime = Some(negotiated.memento.datetime),
                Err(MementoError::NotArchived(_) | MementoError::NoPostEventMemento(_)) => {}
                Err(e) => log::warn!("archival datetime lookup failed for {}: {e}", entry.uri),
            }
        }
    }

    let grace_live = grace_period_live(&references).unwrap_or(delta_t);
    let grace_archive = grace_period_archive(&references).unwrap_or(delta_t);

    let wiki_text = sources.extractor.extract(wiki_html);
    let th_cont = content_threshold(
        &wiki_text,
        &reference_texts,
        config.repeats,
        config.sample_fraction,
        sources.idf,
        config.rng_seed,
        config.candidate_side,
    )?;

    let threshold_grace = match config.mode {
        CrawlMode::Live => grace_live,
        CrawlMode::Archive => grace_archive,
    };
    let params = TemporalParams::with_cutoff(dt_e, upper, threshold_grace, config.grace_cutoff)?;
    let th_temp = temporal_threshold(
        &references,
        config.repeats,
        config.sample_fraction,
        &params,
        config.rng_seed,
    )?;

    let (event_vector, _) = build_event_vector(
        &wiki_text,
        &reference_texts,
        config.sample_fraction,
        sources.idf,
        config.rng_seed,
    );

    let spec = EventSpec {
        name: config.name.clone(),
        dt_e,
        dt_cp,
        wiki_revision_id,
        seeds: references.iter().map(|r| r.uri.clone()).collect(),
        event_vector,
        th_cont,
        th_temp,
        alpha: config.alpha,
        beta: config.beta,
        grace_live_secs: grace_live.num_seconds(),
        grace_archive_secs: grace_archive.num_seconds(),
        max_depth: config.max_depth,
        sample_fraction: config.sample_fraction,
        repeats: config.repeats,
        rng_seed: config.rng_seed,
        grace_cutoff: config.grace_cutoff,
    };
    spec.validate()?;
    Ok(spec)
}
