//! URI normalization and outlink extraction.

use scraper::{Html, Selector};
use thiserror::Error;
use url::Url;

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("not an absolute URI: {0}")]
    Parse(#[from] url::ParseError),
    #[error("URI has no host: {0}")]
    NoHost(Url),
}

/// Canonical form for deduplication: lowercased scheme/host, default port and
/// fragment stripped, dot segments resolved (all courtesy of URL parsing),
/// and `utm_*` tracking query parameters removed. Idempotent.
pub fn normalize_uri(uri: &Url) -> Result<Url, NormalizeError> {
    if !uri.has_host() {
        return Err(NormalizeError::NoHost(uri.clone()));
    }
    let mut out = uri.clone();
    out.set_fragment(None);
    if let Some(query) = out.query() {
        let kept: Vec<&str> = query
            .split('&')
            .filter(|pair| {
                let key = pair.split('=').next().unwrap_or("");
                !key.to_ascii_lowercase().starts_with("utm_")
            })
            .collect();
        if kept.is_empty() {
            out.set_query(None);
        } else {
            let joined = kept.join("&");
            out.set_query(Some(&joined));
        }
    }
    Ok(out)
}

/// Parses and normalizes in one step; relative references are an error.
pub fn normalize_uri_str(uri: &str) -> Result<Url, NormalizeError> {
    normalize_uri(&Url::parse(uri)?)
}

/// All anchor targets of a page: resolved against `base`, normalized,
/// restricted to http(s), same-page self-links removed, deduplicated in
/// document order. Malformed anchors are skipped.
pub fn extract_outlinks(html: &str, base: &Url) -> Vec<Url> {
    let doc = Html::parse_document(html);
    let anchor_sel = Selector::parse("a[href]").unwrap();
    let self_uri = normalize_uri(base).ok();

    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for anchor in doc.select(&anchor_sel) {
        let Some(href) = anchor.value().attr("href") else { continue };
        let Ok(resolved) = base.join(href) else { continue };
        if !matches!(resolved.scheme(), "http" | "https") {
            continue;
        }
        let Ok(normalized) = normalize_uri(&resolved) else { continue };
        if self_uri.as_ref() == Some(&normalized) {
            continue;
        }
        if seen.insert(normalized.to_string()) {
            out.push(normalized);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_rules_compose() {
        let n = normalize_uri_str("HTTP://Example.COM:80/a/../b#frag").unwrap();
        assert_eq!(n.as_str(), "http://example.com/b");
    }

    #[test]
    fn tracking_parameters_are_stripped() {
        let n = normalize_uri_str("http://a.test/x?utm_source=t&id=2").unwrap();
        assert_eq!(n.as_str(), "http://a.test/x?id=2");
        let all_tracking = normalize_uri_str("http://a.test/x?utm_source=t&utm_medium=m").unwrap();
        assert_eq!(all_tracking.as_str(), "http://a.test/x");
    }

    #[test]
    fn normalization_is_idempotent() {
        let once = normalize_uri_str("HTTP://A.test:80/p/../q?utm_a=1&id=2#f").unwrap();
        let twice = normalize_uri(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn relative_references_are_errors() {
        assert!(normalize_uri_str("/no/base").is_err());
        assert!(normalize_uri_str("not a uri").is_err());
    }

    #[test]
    fn non_http_schemes_are_dropped_from_outlinks() {
        let base = Url::parse("http://site.test/page").unwrap();
        let html = r#"<a href="http://a.test/1">1</a>
                      <a href="mailto:user@example.com">mail</a>
                      <a href="http://b.test/2">2</a>"#;
        let links = extract_outlinks(html, &base);
        assert_eq!(links.len(), 2);
    }

    #[test]
    fn relative_hrefs_resolve_against_base() {
        let base = Url::parse("http://site.test/dir/page.html").unwrap();
        let html = r#"<a href="other.html">o</a><a href="/root.html">r</a>"#;
        let links: Vec<String> =
            extract_outlinks(html, &base).iter().map(|u| u.to_string()).collect();
        assert_eq!(links, vec!["http://site.test/dir/other.html", "http://site.test/root.html"]);
    }

    #[test]
    fn duplicates_and_self_fragments_are_removed_in_document_order() {
        let base = Url::parse("http://site.test/page").unwrap();
        let mut html = String::new();
        for i in 0..10 {
            html.push_str(&format!("<a href=\"http://t.test/{i}\">x</a>"));
        }
        html.push_str("<a href=\"http://t.test/3\">dup</a>");
        html.push_str("<a href=\"http://t.test/7#sec\">dup-frag</a>");
        html.push_str("<a href=\"#local\">self</a>");
        let links = extract_outlinks(&html, &base);
        assert_eq!(links.len(), 10);
        let expected: Vec<String> = (0..10).map(|i| format!("http://t.test/{i}")).collect();
        let got: Vec<String> = links.iter().map(|u| u.to_string()).collect();
        assert_eq!(got, expected);
    }
}
