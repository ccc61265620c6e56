//! Memento protocol client (RFC 7089): TimeGate datetime negotiation against
//! an aggregator endpoint, Link header and TimeMap parsing, original-URI
//! resolution, and archive attribution.
//!
//! Negotiation sends the preferred datetime in the `Accept-Datetime` request
//! header, follows redirects to the selected Memento, and — when the archive
//! answers with a pre-event snapshot — follows the `next memento` link
//! relation exactly once, which by protocol is the temporally adjacent later
//! snapshot. The client never hands back a Memento older than the preferred
//! datetime; exhaustion is a typed outcome.

use std::sync::Arc;
use std::time::Duration as StdDuration;

use chrono::{DateTime, Utc};
use thiserror::Error;
use url::Url;

use crate::fetch::{fetch_follow, with_retries, FetchError, FetchResponse, Fetcher, Headers};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("link header syntax error at byte {offset}: {message} in {snippet:?}")]
pub struct LinkParseError {
    pub offset: usize,
    pub message: String,
    pub snippet: String,
}

#[derive(Debug, Error)]
pub enum MementoError {
    #[error("no archive holds a memento of {0}")]
    NotArchived(Url),
    #[error("no memento of {0} exists at or after the preferred datetime")]
    NoPostEventMemento(Url),
    #[error("response from {0} carries no Memento-Datetime header")]
    MissingMementoDatetime(Url),
    #[error("cannot resolve the original URI of memento {0}")]
    CannotResolveOriginal(Url),
    #[error("unexpected status {status} from {uri}")]
    UnexpectedStatus { uri: Url, status: u16 },
    #[error(transparent)]
    Link(#[from] LinkParseError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error("malformed timemap: {0}")]
    Timemap(String),
    #[error("invalid URI {uri}: {message}")]
    BadUri { uri: String, message: String },
}

/// An archived snapshot: where it lives, what it snapshots, when it was
/// archived, and which archive holds it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memento {
    pub uri_m: Url,
    pub uri_r: Url,
    pub datetime: DateTime<Utc>,
    pub archive_id: String,
}

/// One parsed link-value: target, relation types, optional datetime
/// attribute, and any further parameters in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkEntry {
    pub target: String,
    pub rels: Vec<String>,
    pub datetime: Option<DateTime<Utc>>,
    pub params: Vec<(String, String)>,
}

impl LinkEntry {
    pub fn has_rel(&self, rel: &str) -> bool {
        self.rels.iter().any(|r| r.eq_ignore_ascii_case(rel))
    }
}

/// Ordered link-values from a Link header or TimeMap body.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkRelations {
    pub entries: Vec<LinkEntry>,
}

impl LinkRelations {
    /// First entry whose relation set contains every requested relation.
    pub fn find(&self, rels: &[&str]) -> Option<&LinkEntry> {
        self.entries.iter().find(|e| rels.iter().all(|r| e.has_rel(r)))
    }
}

/// RFC 1123 rendering used by `Accept-Datetime` and link datetime attributes.
pub fn format_http_datetime(dt: DateTime<Utc>) -> String {
    dt.format("%a, %d %b %Y %H:%M:%S GMT").to_string()
}

pub fn parse_http_datetime(value: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc2822(value).ok().map(|dt| dt.with_timezone(&Utc))
}

struct LinkParser<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> LinkParser<'a> {
    fn error(&self, message: impl Into<String>) -> LinkParseError {
        let end = (self.pos + 24).min(self.input.len());
        LinkParseError {
            offset: self.pos,
            message: message.into(),
            snippet: self.input[self.pos..end].to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.input[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn take_until(&mut self, stop: char) -> Option<&'a str> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == stop {
                let s = &self.input[start..self.pos];
                self.bump();
                return Some(s);
            }
            self.bump();
        }
        None
    }

    fn quoted_string(&mut self) -> Result<String, LinkParseError> {
        debug_assert_eq!(self.peek(), Some('"'));
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some(c) => out.push(c),
                    None => return Err(self.error("unterminated quoted-pair")),
                },
                Some(c) => out.push(c),
                None => return Err(self.error("unterminated quoted string")),
            }
        }
    }

    fn token(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == ';' || c == ',' || c.is_whitespace() {
                break;
            }
            self.bump();
        }
        self.input[start..self.pos].to_string()
    }

    fn parse(mut self) -> Result<LinkRelations, LinkParseError> {
        let mut entries = Vec::new();
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                break;
            }
            if self.peek() != Some('<') {
                return Err(self.error("expected '<' opening a link-value"));
            }
            self.bump();
            let target = self
                .take_until('>')
                .ok_or_else(|| self.error("missing '>' closing the target URI"))?
                .trim()
                .to_string();

            let mut params: Vec<(String, String)> = Vec::new();
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(';') => {
                        self.bump();
                        self.skip_ws();
                        let name_start = self.pos;
                        while let Some(c) = self.peek() {
                            if c == '=' || c == ';' || c == ',' || c.is_whitespace() {
                                break;
                            }
                            self.bump();
                        }
                        let name = self.input[name_start..self.pos].to_ascii_lowercase();
                        if name.is_empty() {
                            return Err(self.error("empty parameter name"));
                        }
                        self.skip_ws();
                        let value = if self.peek() == Some('=') {
                            self.bump();
                            self.skip_ws();
                            if self.peek() == Some('"') {
                                self.quoted_string()?
                            } else {
                                self.token()
                            }
                        } else {
                            String::new()
                        };
                        params.push((name, value));
                    }
                    Some(',') => {
                        self.bump();
                        break;
                    }
                    None => break,
                    Some(_) => return Err(self.error("expected ';', ',' or end of header")),
                }
            }

            let rels: Vec<String> = params
                .iter()
                .find(|(n, _)| n == "rel")
                .map(|(_, v)| v.split_whitespace().map(|r| r.to_ascii_lowercase()).collect())
                .unwrap_or_default();
            if rels.is_empty() {
                return Err(self.error(format!("link-value <{target}> has no rel parameter")));
            }
            let datetime = match params.iter().find(|(n, _)| n == "datetime") {
                Some((_, v)) => Some(
                    parse_http_datetime(v)
                        .ok_or_else(|| self.error(format!("bad datetime attribute {v:?}")))?,
                ),
                None => None,
            };
            entries.push(LinkEntry { target, rels, datetime, params });
        }
        Ok(LinkRelations { entries })
    }
}

/// Parses a Link header value (or several joined with commas). Unknown
/// parameters are kept verbatim; order is preserved.
pub fn parse_link_header(value: &str) -> Result<LinkRelations, LinkParseError> {
    LinkParser { input: value, pos: 0 }.parse()
}

/// Canonical rendering of link relations; `parse_link_header` of the output
/// reproduces the input relations.
pub fn serialize_link_header(relations: &LinkRelations) -> String {
    relations
        .entries
        .iter()
        .map(|e| {
            let mut s = format!("<{}>", e.target);
            let mut wrote_rel = false;
            let mut wrote_datetime = false;
            for (name, value) in &e.params {
                match name.as_str() {
                    "rel" if !wrote_rel => {
                        s.push_str(&format!("; rel=\"{}\"", e.rels.join(" ")));
                        wrote_rel = true;
                    }
                    "datetime" if !wrote_datetime => {
                        if let Some(dt) = e.datetime {
                            s.push_str(&format!("; datetime=\"{}\"", format_http_datetime(dt)));
                        }
                        wrote_datetime = true;
                    }
                    "rel" | "datetime" => {}
                    _ => s.push_str(&format!("; {}=\"{}\"", name, value)),
                }
            }
            if !wrote_rel {
                s.push_str(&format!("; rel=\"{}\"", e.rels.join(" ")));
            }
            s
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parses an `application/link-format` TimeMap body into its Mementos, sorted
/// by archival datetime. The original URI comes from the `rel="original"`
/// entry, falling back to URI-M pattern stripping.
pub fn parse_timemap(body: &str) -> Result<Vec<Memento>, MementoError> {
    let relations = parse_link_header(body.trim())?;
    let original: Option<Url> = relations
        .find(&["original"])
        .map(|e| {
            Url::parse(&e.target).map_err(|err| MementoError::BadUri {
                uri: e.target.clone(),
                message: err.to_string(),
            })
        })
        .transpose()?;

    let mut mementos = Vec::new();
    for entry in relations.entries.iter().filter(|e| e.has_rel("memento")) {
        let uri_m = Url::parse(&entry.target).map_err(|err| MementoError::BadUri {
            uri: entry.target.clone(),
            message: err.to_string(),
        })?;
        let datetime = entry.datetime.ok_or_else(|| {
            MementoError::Timemap(format!("memento entry {} lacks a datetime", entry.target))
        })?;
        let uri_r = match &original {
            Some(u) => u.clone(),
            None => strip_urim_pattern(&uri_m)
                .ok_or_else(|| MementoError::CannotResolveOriginal(uri_m.clone()))?,
        };
        if uri_r == uri_m {
            return Err(MementoError::Timemap(format!(
                "memento {uri_m} coincides with its original URI"
            )));
        }
        let archive_id = archive_id_for(&uri_m);
        mementos.push(Memento { uri_m, uri_r, datetime, archive_id });
    }
    mementos.sort_by_key(|m| m.datetime);
    Ok(mementos)
}

/// Multi-label public suffixes the registrable-domain heuristic knows about.
/// Archives live on ordinary hosts, so a small fixed set suffices; extend as
/// new archives appear.
const MULTI_SUFFIXES: &[&str] = &[
    "co.uk", "org.uk", "ac.uk", "gov.uk", "com.au", "org.au", "co.jp", "or.jp", "com.br", "co.nz",
    "co.il", "com.mx", "org.nz",
];

/// Registrable domain of a URI host, used as the archive identity.
pub fn archive_id_for(uri: &Url) -> String {
    let host = match uri.host_str() {
        Some(h) => h.to_ascii_lowercase(),
        None => return String::new(),
    };
    if host.parse::<std::net::IpAddr>().is_ok() {
        return host;
    }
    let labels: Vec<&str> = host.split('.').collect();
    if labels.len() <= 2 {
        return host;
    }
    let last_two = labels[labels.len() - 2..].join(".");
    let take = if MULTI_SUFFIXES.contains(&last_two.as_str()) { 3 } else { 2 };
    labels[labels.len() - take.min(labels.len())..].join(".")
}

/// Strips a recognized archive rewriting pattern —
/// `http://{archive}/{...}/{14-digit timestamp}[modifier]/{original URI}` —
/// from a URI-M, recovering the original URI. The recognized pattern set is
/// necessarily incomplete; archives with other schemes must expose
/// `rel="original"` links instead.
pub fn strip_urim_pattern(uri_m: &Url) -> Option<Url> {
    static PATTERN: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
    let re = PATTERN.get_or_init(|| {
        regex::Regex::new(
            r"^[a-z][a-z0-9+.-]*://[^/]+(?:/[^/]*?)*?/\d{8,14}(?:[a-z]{2}_)?/(https?:/.+)$",
        )
        .unwrap()
    });
    let caps = re.captures(uri_m.as_str())?;
    Url::parse(&caps[1]).ok()
}

/// Resolves the original URI of a fetched Memento response: the
/// `rel="original"` link when present, else pattern stripping of the URI-M.
pub fn resolve_urir(response: &FetchResponse) -> Result<Url, MementoError> {
    let link_value = joined_link_headers(&response.headers);
    if !link_value.is_empty() {
        let relations = parse_link_header(&link_value)?;
        if let Some(entry) = relations.find(&["original"]) {
            return Url::parse(&entry.target).map_err(|e| MementoError::BadUri {
                uri: entry.target.clone(),
                message: e.to_string(),
            });
        }
    }
    strip_urim_pattern(&response.uri)
        .ok_or_else(|| MementoError::CannotResolveOriginal(response.uri.clone()))
}

fn joined_link_headers(headers: &Headers) -> String {
    headers.get_all("Link").collect::<Vec<_>>().join(", ")
}

/// Outcome of a TimeGate negotiation: the selected Memento plus the response
/// it was served in, so callers can reuse the body without a second fetch.
#[derive(Debug)]
pub struct NegotiatedMemento {
    pub memento: Memento,
    pub response: FetchResponse,
}

#[derive(Debug, Clone)]
pub struct MementoClientConfig {
    /// TimeGate/aggregator endpoint; the original URI is appended verbatim.
    pub timegate_base: Url,
    pub max_redirects: usize,
    pub retries: u32,
    pub retry_delay: StdDuration,
}

impl MementoClientConfig {
    pub fn new(timegate_base: Url) -> Self {
        MementoClientConfig {
            timegate_base,
            max_redirects: 10,
            retries: 2,
            retry_delay: StdDuration::from_millis(250),
        }
    }
}

/// TimeGate client. Shareable across crawl workers; politeness is the
/// underlying fetcher's concern.
pub struct MementoClient {
    fetcher: Arc<dyn Fetcher>,
    config: MementoClientConfig,
}

impl MementoClient {
    pub fn new(fetcher: Arc<dyn Fetcher>, config: MementoClientConfig) -> Self {
        MementoClient { fetcher, config }
    }

    pub fn timegate_uri(&self, uri_r: &Url) -> Result<Url, MementoError> {
        let joined = format!("{}{}", self.config.timegate_base, uri_r);
        Url::parse(&joined)
            .map_err(|e| MementoError::BadUri { uri: joined, message: e.to_string() })
    }

    fn get(&self, uri: &Url, accept_datetime: &str) -> Result<FetchResponse, MementoError> {
        let headers = vec![("Accept-Datetime".to_string(), accept_datetime.to_string())];
        let resp = with_retries(self.config.retries, self.config.retry_delay, || {
            fetch_follow(self.fetcher.as_ref(), uri, &headers, self.config.max_redirects)
        })?;
        Ok(resp)
    }

    fn memento_from_response(
        &self,
        resp: FetchResponse,
        uri_r_hint: &Url,
    ) -> Result<NegotiatedMemento, MementoError> {
        let datetime = resp
            .headers
            .get("Memento-Datetime")
            .and_then(parse_http_datetime)
            .ok_or_else(|| MementoError::MissingMementoDatetime(resp.uri.clone()))?;
        let uri_m = resp.uri.clone();
        let mut uri_r = resolve_urir(&resp).unwrap_or_else(|_| uri_r_hint.clone());
        if uri_r == uri_m {
            // a snapshot must be distinct from what it snapshots
            uri_r = uri_r_hint.clone();
            if uri_r == uri_m {
                return Err(MementoError::CannotResolveOriginal(uri_m));
            }
        }
        let archive_id = archive_id_for(&uri_m);
        Ok(NegotiatedMemento {
            memento: Memento { uri_m, uri_r, datetime, archive_id },
            response: resp,
        })
    }

    /// Datetime negotiation for `uri_r` at `preferred`: queries the TimeGate,
    /// follows redirects to the selected Memento, and hops the `next memento`
    /// link once if the archive answered with a pre-`preferred` snapshot.
    /// Never returns a Memento older than `preferred`.
    pub fn negotiate(
        &self,
        uri_r: &Url,
        preferred: DateTime<Utc>,
    ) -> Result<NegotiatedMemento, MementoError> {
        let accept = format_http_datetime(preferred);
        let tg = self.timegate_uri(uri_r)?;
        let resp = self.get(&tg, &accept)?;
        match resp.status {
            200 => {}
            404 => return Err(MementoError::NotArchived(uri_r.clone())),
            status => return Err(MementoError::UnexpectedStatus { uri: resp.uri, status }),
        }
        let negotiated = self.memento_from_response(resp, uri_r)?;
        if negotiated.memento.datetime >= preferred {
            return Ok(negotiated);
        }

        // Pre-event snapshot: the temporally adjacent later Memento is the
        // `next memento` relation, so a single hop suffices.
        let links = joined_link_headers(&negotiated.response.headers);
        let relations = parse_link_header(&links)?;
        let next = relations
            .find(&["next", "memento"])
            .or_else(|| relations.find(&["next"]))
            .ok_or_else(|| MementoError::NoPostEventMemento(uri_r.clone()))?;
        let next_uri = Url::parse(&next.target).map_err(|e| MementoError::BadUri {
            uri: next.target.clone(),
            message: e.to_string(),
        })?;
        let resp = self.get(&next_uri, &accept)?;
        if !resp.is_success() {
            return Err(MementoError::UnexpectedStatus { status: resp.status, uri: resp.uri });
        }
        let negotiated = self.memento_from_response(resp, uri_r)?;
        if negotiated.memento.datetime < preferred {
            return Err(MementoError::NoPostEventMemento(uri_r.clone()));
        }
        Ok(negotiated)
    }
}
