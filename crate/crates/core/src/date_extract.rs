//! Resource datetime (DT_R) determination. Live pages are dated from URI
//! patterns, embedded HTML metadata, and an external first-mention lookup,
//! taking the earliest datetime found. Mementos are dated from their archival
//! datetime when it falls inside the event interval, otherwise from the
//! lookup or archived original headers. A resource no method can date is
//! dismissed, which is a typed outcome rather than an error.

use std::collections::HashMap;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, Utc};
use regex::Regex;
use scraper::{Html, Selector};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::fetch::Headers;
use crate::memento::Memento;
use crate::temporal::TemporalParams;

/// Where a resource datetime came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatetimeSource {
    UriPattern,
    HtmlMeta,
    ExternalLookup,
    MementoDatetime,
    ArchivedHeader,
}

/// A dated piece of evidence with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatetimeEvidence {
    pub source: DatetimeSource,
    pub value: DateTime<Utc>,
}

#[derive(Debug, Error)]
#[error("datetime lookup failed: {0}")]
pub struct LookupError(pub String);

/// External first-mention datetime provider (CarbonDate-style). The default
/// implementations are offline; any provider must be callable from multiple
/// crawl workers concurrently.
pub trait DatetimeLookup: Send + Sync {
    fn lookup(&self, uri: &Url) -> Result<Option<DateTime<Utc>>, LookupError>;
}

/// Provider that knows nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullLookup;

impl DatetimeLookup for NullLookup {
    fn lookup(&self, _uri: &Url) -> Result<Option<DateTime<Utc>>, LookupError> {
        Ok(None)
    }
}

/// Offline provider backed by a JSON object mapping URI strings to ISO-8601
/// datetimes.
#[derive(Debug, Default, Clone)]
pub struct StubLookup {
    map: HashMap<String, DateTime<Utc>>,
}

impl StubLookup {
    pub fn new(map: HashMap<String, DateTime<Utc>>) -> Self {
        StubLookup { map }
    }

    pub fn from_json(json: &str) -> Result<Self, LookupError> {
        let raw: HashMap<String, DateTime<Utc>> =
            serde_json::from_str(json).map_err(|e| LookupError(e.to_string()))?;
        Ok(StubLookup { map: raw })
    }

    pub fn from_json_path(path: &std::path::Path) -> Result<Self, LookupError> {
        let text = std::fs::read_to_string(path).map_err(|e| LookupError(e.to_string()))?;
        Self::from_json(&text)
    }
}

impl DatetimeLookup for StubLookup {
    fn lookup(&self, uri: &Url) -> Result<Option<DateTime<Utc>>, LookupError> {
        Ok(self.map.get(uri.as_str()).copied())
    }
}

/// Date-only evidence resolves to 00:00:01 of that day, mirroring the event
/// datetime convention.
fn day_start(date: NaiveDate) -> DateTime<Utc> {
    date.and_hms_opt(0, 0, 1).expect("valid time").and_utc()
}

fn valid_date(year: i32, month: u32, day: u32) -> Option<NaiveDate> {
    if !(1990..=2049).contains(&year) {
        return None;
    }
    NaiveDate::from_ymd_opt(year, month, day)
}

/// Extracts a publication date from datetime-bearing URI path patterns:
/// `/YYYY/MM/DD/`, `YYYY-MM-DD`, `YYYYMMDD`, and `/YYYY/MM/` at month
/// granularity. Years are bounded to 1990-2049 and dates must be valid
/// calendar dates; finer-grained patterns win.
pub fn from_uri(uri: &Url) -> Option<DateTime<Utc>> {
    static YMD_SLASH: OnceLock<Regex> = OnceLock::new();
    static YMD_ISO: OnceLock<Regex> = OnceLock::new();
    static YMD_COMPACT: OnceLock<Regex> = OnceLock::new();
    static YM_SLASH: OnceLock<Regex> = OnceLock::new();

    let path = uri.path();

    let ymd_slash = YMD_SLASH
        .get_or_init(|| Regex::new(r"/((?:19|20)\d{2})/(\d{1,2})/(\d{1,2})(?:/|$)").unwrap());
    if let Some(c) = ymd_slash.captures(path) {
        let (y, m, d) = (c[1].parse().unwrap(), c[2].parse().unwrap(), c[3].parse().unwrap());
        if let Some(date) = valid_date(y, m, d) {
            return Some(day_start(date));
        }
    }

    let ymd_iso = YMD_ISO.get_or_init(|| Regex::new(r"((?:19|20)\d{2})-(\d{2})-(\d{2})").unwrap());
    if let Some(c) = ymd_iso.captures(path) {
        let (y, m, d) = (c[1].parse().unwrap(), c[2].parse().unwrap(), c[3].parse().unwrap());
        if let Some(date) = valid_date(y, m, d) {
            return Some(day_start(date));
        }
    }

    let ymd_compact = YMD_COMPACT.get_or_init(|| {
        Regex::new(r"(?:^|[^\d])((?:19|20)\d{2})(\d{2})(\d{2})(?:[^\d]|$)").unwrap()
    });
    if let Some(c) = ymd_compact.captures(path) {
        let (y, m, d) = (c[1].parse().unwrap(), c[2].parse().unwrap(), c[3].parse().unwrap());
        if let Some(date) = valid_date(y, m, d) {
            return Some(day_start(date));
        }
    }

    let ym_slash =
        YM_SLASH.get_or_init(|| Regex::new(r"/((?:19|20)\d{2})/(\d{1,2})(?:/|$)").unwrap());
    if let Some(c) = ym_slash.captures(path) {
        let (y, m) = (c[1].parse().unwrap(), c[2].parse().unwrap());
        if let Some(date) = valid_date(y, m, 1) {
            return Some(day_start(date));
        }
    }

    None
}

/// Meta/time element properties that announce a publication datetime.
const DATE_PROPERTIES: &[&str] = &[
    "article:published",
    "article:published_time",
    "datepublished",
    "og:published_time",
    "date",
    "dc.date",
];

fn parse_datetime_value(value: &str) -> Option<DateTime<Utc>> {
    let value = value.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(value) {
        return Some(dt.with_timezone(&Utc));
    }
    if let Ok(dt) = DateTime::parse_from_rfc2822(value) {
        return Some(dt.with_timezone(&Utc));
    }
    if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M:%S") {
        return Some(naive.and_utc());
    }
    if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(value, "%Y-%m-%d %H:%M:%S") {
        return Some(naive.and_utc());
    }
    if let Ok(date) = NaiveDate::parse_from_str(value, "%Y-%m-%d") {
        return Some(day_start(date));
    }
    None
}

/// Scans meta and time elements for publication datetimes and returns the
/// earliest parseable one, normalized to UTC. Unparseable values are skipped.
pub fn from_html(html: &str) -> Option<DateTime<Utc>> {
    let doc = Html::parse_document(html);
    let meta_sel = Selector::parse("meta").unwrap();
    let time_sel = Selector::parse("time").unwrap();

    let mut found: Vec<DateTime<Utc>> = Vec::new();
    for meta in doc.select(&meta_sel) {
        let el = meta.value();
        let names = [el.attr("property"), el.attr("name"), el.attr("itemprop")];
        let is_date = names
            .iter()
            .flatten()
            .any(|n| DATE_PROPERTIES.contains(&n.to_ascii_lowercase().as_str()));
        if !is_date {
            continue;
        }
        if let Some(dt) = el.attr("content").and_then(parse_datetime_value) {
            found.push(dt);
        }
    }
    for time in doc.select(&time_sel) {
        if let Some(dt) = time.value().attr("datetime").and_then(parse_datetime_value) {
            found.push(dt);
        }
    }
    found.into_iter().min()
}

/// Delegates to the external lookup provider. Provider failures degrade to
/// "no datetime" with a warning so a flaky provider can never abort a crawl.
pub fn from_external(uri: &Url, lookup: &dyn DatetimeLookup) -> Option<DateTime<Utc>> {
    match lookup.lookup(uri) {
        Ok(dt) => dt,
        Err(e) => {
            log::warn!("external datetime lookup failed for {uri}: {e}");
            None
        }
    }
}

/// Dates a live page: earliest of the URI-pattern, HTML-metadata, and
/// external-lookup datetimes. `None` means the resource is dismissed.
pub fn resolve_live(
    uri: &Url,
    html: &str,
    lookup: &dyn DatetimeLookup,
) -> Option<DatetimeEvidence> {
    let mut candidates: Vec<DatetimeEvidence> = Vec::new();
    if let Some(value) = from_uri(uri) {
        candidates.push(DatetimeEvidence { source: DatetimeSource::UriPattern, value });
    }
    if let Some(value) = from_html(html) {
        candidates.push(DatetimeEvidence { source: DatetimeSource::HtmlMeta, value });
    }
    if let Some(value) = from_external(uri, lookup) {
        candidates.push(DatetimeEvidence { source: DatetimeSource::ExternalLookup, value });
    }
    candidates.into_iter().min_by_key(|e| e.value)
}

fn is_archived_last_modified(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    lower == "x-last-modified"
        || (lower.starts_with("x-") && lower.contains("-orig-") && lower.ends_with("last-modified"))
}

/// Dates a Memento. The archival datetime wins when it falls inside the event
/// interval; otherwise the original URI is run through the external lookup,
/// then archived `X-*-Orig-Last-Modified` / `X-Last-Modified` headers are
/// consulted. `None` means the Memento is dismissed.
pub fn resolve_memento(
    memento: &Memento,
    response_headers: &Headers,
    lookup: &dyn DatetimeLookup,
    params: &TemporalParams,
) -> Option<DatetimeEvidence> {
    if params.contains(memento.datetime) {
        return Some(DatetimeEvidence {
            source: DatetimeSource::MementoDatetime,
            value: memento.datetime,
        });
    }
    if let Some(value) = from_external(&memento.uri_r, lookup) {
        return Some(DatetimeEvidence { source: DatetimeSource::ExternalLookup, value });
    }
    for (name, value) in response_headers.iter() {
        if is_archived_last_modified(name) {
            if let Some(value) = parse_datetime_value(value) {
                return Some(DatetimeEvidence { source: DatetimeSource::ArchivedHeader, value });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn url(s: &str) -> Url {
        Url::parse(s).unwrap()
    }

    #[test]
    fn news_style_uri_paths_carry_dates() {
        let dt =
            from_uri(&url("http://www.cnn.com/2017/12/09/us/wildfire-fighting-tactics/")).unwrap();
        assert_eq!(dt, Utc.with_ymd_and_hms(2017, 12, 9, 0, 0, 1).unwrap());
    }

    #[test]
    fn undated_uris_yield_nothing() {
        assert!(from_uri(&url("http://example.com/about")).is_none());
    }

    #[test]
    fn invalid_calendar_dates_are_rejected() {
        assert!(from_uri(&url("http://example.com/2017/13/40/x")).is_none());
    }

    #[test]
    fn year_bounds_apply() {
        assert!(from_uri(&url("http://example.com/1971/01/02/x")).is_none());
        assert!(from_uri(&url("http://example.com/2077/01/02/x")).is_none());
        assert!(from_uri(&url("http://example.com/1995/01/02/x")).is_some());
    }

    #[test]
    fn iso_and_compact_patterns_match() {
        assert_eq!(
            from_uri(&url("http://example.com/posts/2011-01-09-shooting-report.html")).unwrap(),
            Utc.with_ymd_and_hms(2011, 1, 9, 0, 0, 1).unwrap()
        );
        assert_eq!(
            from_uri(&url("http://example.com/a/20110110/report")).unwrap(),
            Utc.with_ymd_and_hms(2011, 1, 10, 0, 0, 1).unwrap()
        );
    }

    #[test]
    fn month_granularity_is_the_coarsest_fallback() {
        assert_eq!(
            from_uri(&url("http://example.com/2016/02/archive")).unwrap(),
            Utc.with_ymd_and_hms(2016, 2, 1, 0, 0, 1).unwrap()
        );
    }

    #[test]
    fn published_meta_with_offset_normalizes_to_utc() {
        let html = r#"<meta property="article:published"
                            itemprop="datePublished"
                            content="2017-12-09T10:14:50-05:00"/>"#;
        assert_eq!(
            from_html(html).unwrap(),
            Utc.with_ymd_and_hms(2017, 12, 9, 15, 14, 50).unwrap()
        );
    }

    #[test]
    fn page_without_date_metadata_yields_nothing() {
        assert!(from_html("<html><head><title>x</title></head><body>text</body></html>").is_none());
    }

    #[test]
    fn earliest_meta_datetime_wins() {
        let html = r#"<meta property="article:published_time" content="2017-01-02T00:00:00Z"/>
                      <meta itemprop="datePublished" content="2017-01-01T00:00:00Z"/>"#;
        assert_eq!(from_html(html).unwrap(), Utc.with_ymd_and_hms(2017, 1, 1, 0, 0, 0).unwrap());
    }

    #[test]
    fn time_element_datetime_attribute_is_recognized() {
        let html = r#"<time datetime="2011-01-09">Jan 9</time>"#;
        assert_eq!(from_html(html).unwrap(), Utc.with_ymd_and_hms(2011, 1, 9, 0, 0, 1).unwrap());
    }

    #[test]
    fn unparseable_meta_values_are_skipped() {
        let html = r#"<meta name="date" content="sometime last week"/>
                      <meta name="date" content="2011-01-09"/>"#;
        assert_eq!(from_html(html).unwrap(), Utc.with_ymd_and_hms(2011, 1, 9, 0, 0, 1).unwrap());
    }

    #[test]
    fn stub_lookup_hits_and_misses() {
        let stub =
            StubLookup::from_json(r#"{"http://bird.example/story": "2011-01-09T10:00:00Z"}"#)
                .unwrap();
        assert_eq!(
            from_external(&url("http://bird.example/story"), &stub).unwrap(),
            Utc.with_ymd_and_hms(2011, 1, 9, 10, 0, 0).unwrap()
        );
        assert!(from_external(&url("http://bird.example/other"), &stub).is_none());
    }

    struct FailingLookup;
    impl DatetimeLookup for FailingLookup {
        fn lookup(&self, _uri: &Url) -> Result<Option<DateTime<Utc>>, LookupError> {
            Err(LookupError("provider timeout".into()))
        }
    }

    #[test]
    fn provider_failure_degrades_to_no_datetime() {
        assert!(from_external(&url("http://x.example/"), &FailingLookup).is_none());
    }

    #[test]
    fn live_resolution_takes_the_earliest_evidence() {
        let uri = url("http://news.example/2017/12/09/story");
        let html = r#"<meta itemprop="datePublished" content="2017-12-08T12:00:00Z"/>"#;
        let ev = resolve_live(&uri, html, &NullLookup).unwrap();
        assert_eq!(ev.source, DatetimeSource::HtmlMeta);
        assert_eq!(ev.value, Utc.with_ymd_and_hms(2017, 12, 8, 12, 0, 0).unwrap());
    }

    #[test]
    fn live_resolution_accepts_lookup_only_evidence() {
        let stub =
            StubLookup::from_json(r#"{"http://x.example/p": "2011-01-09T00:00:00Z"}"#).unwrap();
        let ev = resolve_live(&url("http://x.example/p"), "<p>no dates</p>", &stub).unwrap();
        assert_eq!(ev.source, DatetimeSource::ExternalLookup);
    }

    #[test]
    fn live_resolution_dismisses_dateless_pages() {
        assert!(resolve_live(&url("http://x.example/p"), "<p>no dates</p>", &NullLookup).is_none());
    }

    fn test_params() -> TemporalParams {
        TemporalParams::new(
            Utc.with_ymd_and_hms(2011, 1, 8, 0, 0, 1).unwrap(),
            Utc.with_ymd_and_hms(2012, 1, 12, 0, 0, 1).unwrap(),
            chrono::Duration::days(30),
        )
        .unwrap()
    }

    fn memento_at(dt: DateTime<Utc>) -> Memento {
        Memento {
            uri_m: url("http://archive.example/web/20110301000000/http://news.example/a"),
            uri_r: url("http://news.example/a"),
            datetime: dt,
            archive_id: "archive.example".into(),
        }
    }

    struct CountingLookup {
        calls: AtomicUsize,
    }
    impl DatetimeLookup for CountingLookup {
        fn lookup(&self, _uri: &Url) -> Result<Option<DateTime<Utc>>, LookupError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(None)
        }
    }

    #[test]
    fn in_interval_memento_uses_archival_datetime_without_lookup() {
        let params = test_params();
        let lookup = CountingLookup { calls: AtomicUsize::new(0) };
        let mdt = Utc.with_ymd_and_hms(2011, 3, 1, 0, 0, 0).unwrap();
        let ev = resolve_memento(&memento_at(mdt), &Headers::new(), &lookup, &params).unwrap();
        assert_eq!(ev.source, DatetimeSource::MementoDatetime);
        assert_eq!(ev.value, mdt);
        assert_eq!(lookup.calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn late_memento_falls_back_to_archived_headers() {
        let params = test_params();
        let mdt = Utc.with_ymd_and_hms(2013, 5, 1, 0, 0, 0).unwrap();
        let headers = Headers::from_pairs([(
            "X-Archive-Orig-Last-Modified",
            "Sun, 09 Jan 2011 08:00:00 GMT",
        )]);
        let ev = resolve_memento(&memento_at(mdt), &headers, &NullLookup, &params).unwrap();
        assert_eq!(ev.source, DatetimeSource::ArchivedHeader);
        assert_eq!(ev.value, Utc.with_ymd_and_hms(2011, 1, 9, 8, 0, 0).unwrap());
    }

    #[test]
    fn archived_header_matching_is_case_insensitive_on_the_orig_infix() {
        assert!(is_archived_last_modified("X-ARCHIVE-ORIG-LAST-MODIFIED"));
        assert!(is_archived_last_modified("x-webarchive-orig-last-modified"));
        assert!(is_archived_last_modified("X-Last-Modified"));
        assert!(!is_archived_last_modified("Last-Modified"));
        assert!(!is_archived_last_modified("X-Archive-Orig-Date"));
    }

    #[test]
    fn late_memento_with_no_other_evidence_is_dismissed() {
        let params = test_params();
        let mdt = Utc.with_ymd_and_hms(2013, 5, 1, 0, 0, 0).unwrap();
        assert!(resolve_memento(&memento_at(mdt), &Headers::new(), &NullLookup, &params).is_none());
    }

    #[test]
    fn late_memento_prefers_lookup_over_headers() {
        let params = test_params();
        let mdt = Utc.with_ymd_and_hms(2013, 5, 1, 0, 0, 0).unwrap();
        let stub =
            StubLookup::from_json(r#"{"http://news.example/a": "2011-02-01T00:00:00Z"}"#).unwrap();
        let headers = Headers::from_pairs([("X-Last-Modified", "Sun, 09 Jan 2011 08:00:00 GMT")]);
        let ev = resolve_memento(&memento_at(mdt), &headers, &stub, &params).unwrap();
        assert_eq!(ev.source, DatetimeSource::ExternalLookup);
    }
}
