//! In-process fetcher over a [`FixtureSite`]: serves the live web, a
//! protocol-faithful TimeGate, and Memento responses with rewritten outlinks,
//! entirely without sockets. Responses are byte-stable for identical
//! requests.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, NaiveDateTime, Utc};
use eventcrawl_core::fetch::{FetchError, FetchRequest, FetchResponse, Fetcher, Headers};
use eventcrawl_core::memento::{format_http_datetime, parse_http_datetime};
use regex::Regex;
use url::Url;

use crate::site::{memento_uri, FixtureSite, Snapshot};

/// Which roles of the fixture a fetcher answers for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchScope {
    Live,
    Archive,
    Both,
}

pub struct FixtureFetcher {
    site: Arc<FixtureSite>,
    scope: FetchScope,
    archive_hosts: BTreeSet<String>,
    requests: AtomicU64,
}

/// Fetcher over the live pages only.
pub fn serve_live(site: Arc<FixtureSite>) -> FixtureFetcher {
    FixtureFetcher::new(site, FetchScope::Live)
}

/// Fetcher over the TimeGate and Memento endpoints only.
pub fn serve_archive(site: Arc<FixtureSite>) -> FixtureFetcher {
    FixtureFetcher::new(site, FetchScope::Archive)
}

impl FixtureFetcher {
    pub fn new(site: Arc<FixtureSite>, scope: FetchScope) -> Self {
        let archive_hosts = site.archive_hosts();
        FixtureFetcher { site, scope, archive_hosts, requests: AtomicU64::new(0) }
    }

    pub fn site(&self) -> &FixtureSite {
        &self.site
    }

    /// Total requests served; lets tests assert request-count behavior.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    fn response(
        uri: &Url,
        status: u16,
        headers: Vec<(&str, String)>,
        body: impl Into<Vec<u8>>,
    ) -> FetchResponse {
        FetchResponse {
            status,
            headers: Headers::from_pairs(headers.into_iter().map(|(k, v)| (k.to_string(), v))),
            body: body.into(),
            uri: uri.clone(),
        }
    }

    fn not_found(uri: &Url, message: &str) -> FetchResponse {
        Self::response(
            uri,
            404,
            vec![("Content-Type", "text/plain".to_string())],
            message.as_bytes().to_vec(),
        )
    }

    /// Aggregator-wide navigation links for one original URI, centered on the
    /// snapshot at `chosen`.
    fn nav_links(&self, uri_r: &str, chosen: usize) -> String {
        let snaps = &self.site.snapshots[uri_r];
        let mut parts = vec![
            format!("<{uri_r}>; rel=\"original\""),
            format!("<{}{uri_r}>; rel=\"timegate\"", self.site.timegate_base),
        ];
        let link = |snapshot: &Snapshot, rel: &str| {
            format!(
                "<{}>; rel=\"{rel}\"; datetime=\"{}\"",
                memento_uri(&snapshot.archive_host, snapshot.datetime, uri_r),
                format_http_datetime(snapshot.datetime)
            )
        };
        let last = snaps.len() - 1;
        if snaps.len() == 1 {
            parts.push(link(&snaps[0], "first last memento"));
        } else {
            parts.push(link(
                &snaps[0],
                if chosen == 0 { "first self memento" } else { "first memento" },
            ));
            if chosen > 0 {
                parts.push(link(&snaps[chosen - 1], "prev memento"));
            }
            if chosen < last {
                parts.push(link(&snaps[chosen + 1], "next memento"));
            }
            parts.push(link(
                &snaps[last],
                if chosen == last { "last self memento" } else { "last memento" },
            ));
        }
        parts.join(", ")
    }

    fn timegate(&self, uri: &Url, uri_r: &str, headers: &[(String, String)]) -> FetchResponse {
        let accept = headers
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case("Accept-Datetime"))
            .and_then(|(_, value)| parse_http_datetime(value));
        let Some(preferred) = accept else {
            return Self::response(
                uri,
                400,
                vec![("Content-Type", "text/plain".to_string())],
                b"missing or malformed Accept-Datetime".to_vec(),
            );
        };
        let Some(snaps) = self.site.snapshots.get(uri_r).filter(|s| !s.is_empty()) else {
            return Self::not_found(uri, "not archived");
        };

        // temporally closest snapshot; ties resolve toward the earlier one
        let chosen = snaps
            .iter()
            .enumerate()
            .min_by_key(|(_, s)| {
                let diff = (s.datetime - preferred).num_milliseconds().unsigned_abs();
                (diff, s.datetime)
            })
            .map(|(i, _)| i)
            .expect("non-empty");
        let snapshot = &snaps[chosen];

        let target = if snapshot.redirect_hops > 0 {
            interstitial_uri(snapshot, uri_r, snapshot.redirect_hops)
        } else {
            memento_uri(&snapshot.archive_host, snapshot.datetime, uri_r)
        };
        Self::response(
            uri,
            302,
            vec![
                ("Location", target),
                ("Vary", "accept-datetime".to_string()),
                ("Link", self.nav_links(uri_r, chosen)),
            ],
            Vec::new(),
        )
    }

    fn interstitial(&self, uri: &Url, host: &str, rest: &str) -> FetchResponse {
        // /go/{hops}/{ts}/{uri_r}
        let mut parts = rest.splitn(3, '/');
        let (Some(hops), Some(ts), Some(uri_r)) = (parts.next(), parts.next(), parts.next()) else {
            return Self::not_found(uri, "bad interstitial path");
        };
        let hops: u32 = match hops.parse() {
            Ok(h) => h,
            Err(_) => return Self::not_found(uri, "bad interstitial hop count"),
        };
        let target = if hops > 1 {
            format!("http://{host}/go/{}/{ts}/{uri_r}", hops - 1)
        } else {
            format!("http://{host}/web/{ts}/{uri_r}")
        };
        Self::response(uri, 302, vec![("Location", target)], Vec::new())
    }

    fn memento(&self, uri: &Url, host: &str, rest: &str) -> FetchResponse {
        // /web/{ts}/{uri_r}
        let Some((ts, uri_r)) = rest.split_once('/') else {
            return Self::not_found(uri, "bad memento path");
        };
        let Ok(naive) = NaiveDateTime::parse_from_str(ts, "%Y%m%d%H%M%S") else {
            return Self::not_found(uri, "bad memento timestamp");
        };
        let datetime: DateTime<Utc> = naive.and_utc();
        let Some((index, snapshot)) = self
            .site
            .snapshots
            .get(uri_r)
            .into_iter()
            .flatten()
            .enumerate()
            .find(|(_, s)| s.archive_host == host && s.datetime == datetime)
        else {
            return Self::not_found(uri, "no such memento");
        };

        let body = rewrite_outlinks(&snapshot.body, host, ts);
        let mut headers = vec![
            ("Content-Type", "text/html".to_string()),
            ("Memento-Datetime", format_http_datetime(snapshot.datetime)),
            ("Link", self.nav_links(uri_r, index)),
        ];
        for (name, value) in &snapshot.extra_headers {
            headers.push((name.as_str(), value.clone()));
        }
        let headers = headers.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Vec<_>>();
        FetchResponse {
            status: 200,
            headers: Headers::from_pairs(headers),
            body: body.into_bytes(),
            uri: uri.clone(),
        }
    }

    fn live(&self, uri: &Url) -> FetchResponse {
        match self.site.pages.get(uri.as_str()) {
            Some(page) => Self::response(
                uri,
                page.status,
                vec![("Content-Type", page.content_type.clone())],
                page.body.clone().into_bytes(),
            ),
            None => Self::not_found(uri, "no such page"),
        }
    }
}

fn interstitial_uri(snapshot: &Snapshot, uri_r: &str, hops: u32) -> String {
    format!(
        "http://{}/go/{hops}/{}/{uri_r}",
        snapshot.archive_host,
        snapshot.datetime.format("%Y%m%d%H%M%S")
    )
}

/// Rewrites absolute http(s) hrefs to URI-M form, the way archives rewrite
/// outlinks in their Mementos to point back into the same archive.
fn rewrite_outlinks(body: &str, archive_host: &str, ts: &str) -> String {
    static HREF: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let href = HREF.get_or_init(|| Regex::new(r#"href="(https?://[^"]+)""#).unwrap());
    href.replace_all(body, |caps: &regex::Captures<'_>| {
        format!(r#"href="http://{archive_host}/web/{ts}/{}""#, &caps[1])
    })
    .into_owned()
}

impl Fetcher for FixtureFetcher {
    fn fetch(&self, req: &FetchRequest) -> Result<FetchResponse, FetchError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let uri_str = req.uri.as_str();

        if matches!(self.scope, FetchScope::Archive | FetchScope::Both) {
            let base = self.site.timegate_base.as_str();
            if let Some(uri_r) = uri_str.strip_prefix(base) {
                return Ok(self.timegate(&req.uri, uri_r, &req.headers));
            }
            if let Some(host) = req.uri.host_str() {
                if self.archive_hosts.contains(host) {
                    let path = &uri_str[uri_str.find(host).unwrap() + host.len()..];
                    if let Some(rest) = path.strip_prefix("/web/") {
                        return Ok(self.memento(&req.uri, host, rest));
                    }
                    if let Some(rest) = path.strip_prefix("/go/") {
                        return Ok(self.interstitial(&req.uri, host, rest));
                    }
                    return Ok(Self::not_found(&req.uri, "unknown archive path"));
                }
            }
        }
        if matches!(self.scope, FetchScope::Live | FetchScope::Both) {
            return Ok(self.live(&req.uri));
        }
        Ok(Self::not_found(&req.uri, "out of scope"))
    }
}
