//! Fixture site model: a deterministic miniature web (pages with publication
//! datetimes and outlinks) plus archive snapshot schedules, loadable from a
//! JSON definition file.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use eventcrawl_core::crawl::normalize_uri_str;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fixture definition error: {0}")]
    Definition(String),
    #[error("page {page} links to {target}, which is neither a fixture page nor marked external")]
    DanglingLink { page: String, target: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_content_type() -> String {
    "text/html".to_string()
}

fn default_status() -> u16 {
    200
}

/// One live page of the fixture web.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixturePage {
    pub body: String,
    #[serde(default)]
    pub published: Option<DateTime<Utc>>,
    #[serde(default = "default_content_type")]
    pub content_type: String,
    #[serde(default = "default_status")]
    pub status: u16,
}

/// One archived capture of a page. Bodies are stored unrewritten; the archive
/// fetcher rewrites outlinks to URI-M form at serve time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub archive_host: String,
    pub datetime: DateTime<Utc>,
    pub body: String,
    /// Interstitial redirect hops between the TimeGate redirect and the final
    /// Memento response.
    #[serde(default)]
    pub redirect_hops: u32,
    /// Extra response headers (archived X-headers and the like).
    #[serde(default)]
    pub extra_headers: Vec<(String, String)>,
}

/// A deterministic offline web-and-archive fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSite {
    /// TimeGate endpoint; original URIs are appended verbatim.
    pub timegate_base: Url,
    /// Live pages keyed by normalized URI.
    #[serde(default)]
    pub pages: BTreeMap<String, FixturePage>,
    /// Snapshot lists keyed by normalized original URI, sorted by datetime.
    #[serde(default)]
    pub snapshots: BTreeMap<String, Vec<Snapshot>>,
    /// Link targets that intentionally point off the fixture web.
    #[serde(default)]
    pub external: BTreeSet<String>,
}

impl FixtureSite {
    pub fn new(timegate_base: &str) -> Self {
        FixtureSite {
            timegate_base: Url::parse(timegate_base).expect("valid timegate base"),
            pages: BTreeMap::new(),
            snapshots: BTreeMap::new(),
            external: BTreeSet::new(),
        }
    }

    pub fn add_page(
        &mut self,
        uri: &str,
        body: impl Into<String>,
        published: Option<DateTime<Utc>>,
    ) {
        let key = normalize_uri_str(uri).expect("valid page uri").to_string();
        self.pages.insert(
            key,
            FixturePage {
                body: body.into(),
                published,
                content_type: default_content_type(),
                status: default_status(),
            },
        );
    }

    pub fn add_page_with(&mut self, uri: &str, page: FixturePage) {
        let key = normalize_uri_str(uri).expect("valid page uri").to_string();
        self.pages.insert(key, page);
    }

    /// Adds a snapshot, keeping the list sorted by datetime.
    pub fn add_snapshot(&mut self, uri_r: &str, snapshot: Snapshot) {
        let key = normalize_uri_str(uri_r).expect("valid original uri").to_string();
        let list = self.snapshots.entry(key).or_default();
        list.push(snapshot);
        list.sort_by_key(|s| s.datetime);
    }

    pub fn mark_external(&mut self, uri: &str) {
        let key = normalize_uri_str(uri).expect("valid external uri").to_string();
        self.external.insert(key);
    }

    /// Hosts that serve Mementos.
    pub fn archive_hosts(&self) -> BTreeSet<String> {
        self.snapshots.values().flatten().map(|s| s.archive_host.clone()).collect()
    }

    /// Checks the fixture invariants: every outlink of every page body
    /// resolves to a fixture page or a marked-external URI, and snapshot
    /// lists are sorted.
    pub fn validate(&self) -> Result<(), FixtureError> {
        for (uri, page) in &self.pages {
            let base = Url::parse(uri).map_err(|e| FixtureError::Definition(e.to_string()))?;
            for link in eventcrawl_core::crawl::extract_outlinks(&page.body, &base) {
                let key = link.as_str();
                if !self.pages.contains_key(key) && !self.external.contains(key) {
                    return Err(FixtureError::DanglingLink {
                        page: uri.clone(),
                        target: key.to_string(),
                    });
                }
            }
        }
        for list in self.snapshots.values() {
            if list.windows(2).any(|w| w[0].datetime > w[1].datetime) {
                return Err(FixtureError::Definition("snapshots out of order".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, FixtureError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self, FixtureError> {
        let site: FixtureSite = serde_json::from_str(json)?;
        site.validate()?;
        Ok(site)
    }

    pub fn from_json_path(path: &std::path::Path) -> Result<Self, FixtureError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// URI-M layout used by the fixture archives (wayback-style path rewriting).
pub fn memento_uri(archive_host: &str, datetime: DateTime<Utc>, uri_r: &str) -> String {
    format!("http://{archive_host}/web/{}/{uri_r}", datetime.format("%Y%m%d%H%M%S"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn json_round_trip_preserves_the_site() {
        let mut site = FixtureSite::new("http://aggregator.example/timegate/");
        site.add_page("http://news.example/a", "<html><body>a</body></html>", None);
        site.add_snapshot(
            "http://news.example/a",
            Snapshot {
                archive_host: "web.archive-one.example".into(),
                datetime: Utc.with_ymd_and_hms(2011, 1, 10, 0, 0, 0).unwrap(),
                body: "<html><body>archived a</body></html>".into(),
                redirect_hops: 0,
                extra_headers: Vec::new(),
            },
        );
        let json = site.to_json().unwrap();
        let loaded = FixtureSite::from_json(&json).unwrap();
        assert_eq!(loaded, site);
    }

    #[test]
    fn validation_catches_dangling_links() {
        let mut site = FixtureSite::new("http://aggregator.example/timegate/");
        site.add_page(
            "http://news.example/a",
            r#"<html><body><a href="http://news.example/missing">x</a></body></html>"#,
            None,
        );
        assert!(matches!(site.validate(), Err(FixtureError::DanglingLink { .. })));
        site.mark_external("http://news.example/missing");
        site.validate().unwrap();
    }

    #[test]
    fn snapshots_stay_sorted() {
        let mut site = FixtureSite::new("http://aggregator.example/timegate/");
        let snap = |day: u32| Snapshot {
            archive_host: "a.example".into(),
            datetime: Utc.with_ymd_and_hms(2011, 1, day, 0, 0, 0).unwrap(),
            body: String::new(),
            redirect_hops: 0,
            extra_headers: Vec::new(),
        };
        site.add_snapshot("http://news.example/a", snap(20));
        site.add_snapshot("http://news.example/a", snap(5));
        site.add_snapshot("http://news.example/a", snap(12));
        let days: Vec<u32> = site.snapshots["http://news.example/a"]
            .iter()
            .map(|s| s.datetime.format("%d").to_string().parse().unwrap())
            .collect();
        assert_eq!(days, vec![5, 12, 20]);
    }
}
