//! HTTP fetch abstraction shared by the live crawler and the Memento client.
//!
//! Implementations return raw responses without following redirects; redirect
//! chains are walked by [`fetch_follow`] so callers can bound chain length and
//! observe the final URI. The in-process fixture fetcher and the reqwest-backed
//! fetcher in the CLI both implement [`Fetcher`].

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use thiserror::Error;
use url::Url;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("transport error fetching {uri}: {message}")]
    Transport { uri: String, message: String },
    #[error("redirect chain exceeded {limit} hops starting from {uri}")]
    TooManyRedirects { uri: String, limit: usize },
    #[error("redirect response from {uri} carries no Location header")]
    MissingLocation { uri: String },
    #[error("invalid redirect target {target}: {message}")]
    BadRedirectTarget { target: String, message: String },
}

/// Case-insensitive response header multimap.
#[derive(Debug, Clone, Default)]
pub struct Headers(Vec<(String, String)>);

impl Headers {
    pub fn new() -> Self {
        Headers(Vec::new())
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Headers(pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }

    pub fn push(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.0.push((name.into(), value.into()));
    }

    /// First value of `name`, case-insensitive.
    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }

    /// All values of `name`, in insertion order.
    pub fn get_all<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.0.iter().filter(move |(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct FetchRequest {
    pub uri: Url,
    pub headers: Vec<(String, String)>,
}

impl FetchRequest {
    pub fn get(uri: Url) -> Self {
        FetchRequest { uri, headers: Vec::new() }
    }

    pub fn with_header(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }
}

#[derive(Debug, Clone)]
pub struct FetchResponse {
    pub status: u16,
    pub headers: Headers,
    pub body: Vec<u8>,
    /// URI the response was actually served from (after any redirect hop).
    pub uri: Url,
}

impl FetchResponse {
    pub fn is_redirect(&self) -> bool {
        matches!(self.status, 301 | 302 | 303 | 307 | 308)
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    pub fn body_text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }

    /// Content-Type media type, lowercased, without parameters.
    pub fn media_type(&self) -> Option<String> {
        self.headers
            .get("Content-Type")
            .map(|v| v.split(';').next().unwrap_or("").trim().to_ascii_lowercase())
    }

    /// True when the response looks like an HTML representation. Falls back to
    /// sniffing the body when no Content-Type header is present.
    pub fn looks_like_html(&self) -> bool {
        match self.media_type() {
            Some(mt) => mt == "text/html" || mt == "application/xhtml+xml",
            None => {
                let head = String::from_utf8_lossy(&self.body[..self.body.len().min(512)])
                    .to_ascii_lowercase();
                head.contains("<html") || head.contains("<!doctype html")
            }
        }
    }
}

/// A single-request HTTP client. Must not follow redirects on its own.
pub trait Fetcher: Send + Sync {
    fn fetch(&self, req: &FetchRequest) -> Result<FetchResponse, FetchError>;
}

/// Issues `req` and walks up to `max_redirects` redirect hops, re-sending the
/// same headers on every hop. Returns the final response.
pub fn fetch_follow(
    fetcher: &dyn Fetcher,
    uri: &Url,
    headers: &[(String, String)],
    max_redirects: usize,
) -> Result<FetchResponse, FetchError> {
    let mut current = uri.clone();
    for _ in 0..=max_redirects {
        let resp =
            fetcher.fetch(&FetchRequest { uri: current.clone(), headers: headers.to_vec() })?;
        if !resp.is_redirect() {
            return Ok(resp);
        }
        let location = resp
            .headers
            .get("Location")
            .ok_or_else(|| FetchError::MissingLocation { uri: current.to_string() })?;
        current = current.join(location).map_err(|e| FetchError::BadRedirectTarget {
            target: location.to_string(),
            message: e.to_string(),
        })?;
    }
    Err(FetchError::TooManyRedirects { uri: uri.to_string(), limit: max_redirects })
}

/// Retries `op` on transport errors, sleeping `delay` between attempts.
/// `attempts` is the number of retries after the first try.
pub fn with_retries<T>(
    attempts: u32,
    delay: Duration,
    mut op: impl FnMut() -> Result<T, FetchError>,
) -> Result<T, FetchError> {
    let mut last = None;
    for attempt in 0..=attempts {
        match op() {
            Ok(v) => return Ok(v),
            Err(e @ FetchError::Transport { .. }) => {
                log::warn!("fetch attempt {} failed: {}", attempt + 1, e);
                last = Some(e);
                if attempt < attempts && !delay.is_zero() {
                    std::thread::sleep(delay);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Per-host politeness wrapper: no two requests to the same host are issued
/// within `delay` of each other, regardless of how many workers share the
/// fetcher. Each caller reserves the next free slot for the host under the
/// lock, then sleeps until its slot outside the lock.
pub struct PoliteFetcher<F> {
    inner: F,
    delay: Duration,
    next_slot: Mutex<HashMap<String, Instant>>,
}

impl<F: Fetcher> PoliteFetcher<F> {
    pub fn new(inner: F, delay: Duration) -> Self {
        PoliteFetcher { inner, delay, next_slot: Mutex::new(HashMap::new()) }
    }

    fn reserve(&self, host: &str) -> Instant {
        let mut slots = self.next_slot.lock().expect("politeness lock poisoned");
        let now = Instant::now();
        let slot = slots.get(host).copied().map_or(now, |t| t.max(now));
        slots.insert(host.to_string(), slot + self.delay);
        slot
    }
}

impl<F: Fetcher> Fetcher for PoliteFetcher<F> {
    fn fetch(&self, req: &FetchRequest) -> Result<FetchResponse, FetchError> {
        if !self.delay.is_zero() {
            if let Some(host) = req.uri.host_str() {
                let slot = self.reserve(host);
                let now = Instant::now();
                if slot > now {
                    std::thread::sleep(slot - now);
                }
            }
        }
        self.inner.fetch(req)
    }
}

impl<T: Fetcher + ?Sized> Fetcher for &T {
    fn fetch(&self, req: &FetchRequest) -> Result<FetchResponse, FetchError> {
        (**self).fetch(req)
    }
}

impl<T: Fetcher + ?Sized> Fetcher for std::sync::Arc<T> {
    fn fetch(&self, req: &FetchRequest) -> Result<FetchResponse, FetchError> {
        (**self).fetch(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct ChainFetcher {
        hops: usize,
        calls: AtomicUsize,
    }

    impl Fetcher for ChainFetcher {
        fn fetch(&self, req: &FetchRequest) -> Result<FetchResponse, FetchError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.hops {
                let mut headers = Headers::new();
                headers.push("Location", format!("http://chain.test/{}", n + 1));
                Ok(FetchResponse { status: 302, headers, body: Vec::new(), uri: req.uri.clone() })
            } else {
                Ok(FetchResponse {
                    status: 200,
                    headers: Headers::new(),
                    body: b"done".to_vec(),
                    uri: req.uri.clone(),
                })
            }
        }
    }

    #[test]
    fn follows_redirect_chain_to_final_response() {
        let f = ChainFetcher { hops: 3, calls: AtomicUsize::new(0) };
        let resp = fetch_follow(&f, &Url::parse("http://chain.test/0").unwrap(), &[], 10).unwrap();
        assert_eq!(resp.status, 200);
        assert_eq!(resp.uri.as_str(), "http://chain.test/3");
    }

    #[test]
    fn redirect_limit_is_enforced() {
        let f = ChainFetcher { hops: 20, calls: AtomicUsize::new(0) };
        let err =
            fetch_follow(&f, &Url::parse("http://chain.test/0").unwrap(), &[], 10).unwrap_err();
        assert!(matches!(err, FetchError::TooManyRedirects { limit: 10, .. }));
    }

    #[test]
    fn headers_are_case_insensitive() {
        let mut h = Headers::new();
        h.push("Memento-Datetime", "x");
        h.push("Link", "a");
        h.push("link", "b");
        assert_eq!(h.get("memento-datetime"), Some("x"));
        assert_eq!(h.get_all("LINK").collect::<Vec<_>>(), vec!["a", "b"]);
    }

    #[test]
    fn politeness_spaces_same_host_requests() {
        struct Instant200;
        impl Fetcher for Instant200 {
            fn fetch(&self, req: &FetchRequest) -> Result<FetchResponse, FetchError> {
                Ok(FetchResponse {
                    status: 200,
                    headers: Headers::new(),
                    body: Vec::new(),
                    uri: req.uri.clone(),
                })
            }
        }
        let delay = Duration::from_millis(40);
        let polite = std::sync::Arc::new(PoliteFetcher::new(Instant200, delay));
        let uri = Url::parse("http://polite.test/a").unwrap();
        let start = Instant::now();
        let mut handles = Vec::new();
        for _ in 0..3 {
            let polite = polite.clone();
            let uri = uri.clone();
            handles.push(std::thread::spawn(move || {
                polite.fetch(&FetchRequest::get(uri)).unwrap();
                Instant::now()
            }));
        }
        let mut finish: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        finish.sort();
        // three requests reserve slots at t, t+40ms, t+80ms
        assert!(finish[2] - start >= Duration::from_millis(80));
        assert!(finish[1] - start >= Duration::from_millis(40));
    }

    #[test]
    fn retries_transport_errors_then_succeeds() {
        let calls = AtomicUsize::new(0);
        let result = with_retries(2, Duration::ZERO, || {
            if calls.fetch_add(1, Ordering::SeqCst) < 2 {
                Err(FetchError::Transport { uri: "u".into(), message: "boom".into() })
            } else {
                Ok(7)
            }
        });
        assert_eq!(result.unwrap(), 7);
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }
}
