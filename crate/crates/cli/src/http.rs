//! reqwest-backed fetcher. Redirects stay unfollowed so the crawl and
//! memento layers can walk chains themselves; an optional proxy routes all
//! traffic (the test fixtures serve fake hosts that way).

use std::time::Duration;

use eventcrawl_core::fetch::{FetchError, FetchRequest, FetchResponse, Fetcher, Headers};
use url::Url;

pub struct ReqwestFetcher {
    client: reqwest::blocking::Client,
}

impl ReqwestFetcher {
    pub fn new(timeout: Duration, proxy: Option<&str>) -> anyhow::Result<Self> {
        let mut builder = reqwest::blocking::Client::builder()
            .redirect(reqwest::redirect::Policy::none())
            .timeout(timeout)
            .user_agent(concat!("eventcrawl/", env!("CARGO_PKG_VERSION")));
        if let Some(proxy) = proxy {
            builder = builder.proxy(reqwest::Proxy::all(proxy)?);
        }
        Ok(ReqwestFetcher { client: builder.build()? })
    }
}

fn transport(uri: &Url, err: impl std::fmt::Display) -> FetchError {
    FetchError::Transport { uri: uri.to_string(), message: err.to_string() }
}

impl Fetcher for ReqwestFetcher {
    fn fetch(&self, req: &FetchRequest) -> Result<FetchResponse, FetchError> {
        let mut request = self.client.get(req.uri.as_str());
        for (name, value) in &req.headers {
            request = request.header(name, value);
        }
        let response = request.send().map_err(|e| transport(&req.uri, e))?;
        let status = response.status().as_u16();
        let uri = Url::parse(response.url().as_str()).unwrap_or_else(|_| req.uri.clone());
        let headers = Headers::from_pairs(response.headers().iter().map(|(name, value)| {
            (name.as_str().to_string(), value.to_str().unwrap_or_default().to_string())
        }));
        let body = response.bytes().map_err(|e| transport(&req.uri, e))?.to_vec();
        Ok(FetchResponse { status, headers, body, uri })
    }
}
