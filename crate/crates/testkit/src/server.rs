//! Socket front-end for the fixture fetcher. Accepts both proxy-style
//! absolute-form requests (so a real HTTP client pointed at the server as its
//! proxy can fetch fixture hosts without DNS) and origin-form requests with a
//! Host header.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use eventcrawl_core::fetch::{FetchRequest, Fetcher};
use url::Url;

use crate::fetcher::FixtureFetcher;

pub struct FixtureServer {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    handle: Option<JoinHandle<()>>,
}

impl FixtureServer {
    pub fn start(fetcher: Arc<FixtureFetcher>) -> std::io::Result<Self> {
        let server = tiny_http::Server::http("127.0.0.1:0")
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        let server = Arc::new(server);
        let addr = match server.server_addr() {
            tiny_http::ListenAddr::IP(addr) => addr,
            #[allow(unreachable_patterns)]
            _ => return Err(std::io::Error::other("expected an IP listener")),
        };
        let worker = Arc::clone(&server);
        let handle = std::thread::spawn(move || {
            for request in worker.incoming_requests() {
                respond(request, fetcher.as_ref());
            }
        });
        Ok(FixtureServer { addr, server, handle: Some(handle) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// URI to hand to an HTTP client as its proxy.
    pub fn proxy_uri(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn respond(request: tiny_http::Request, fetcher: &FixtureFetcher) {
    let raw_url = request.url().to_string();
    let uri = if raw_url.starts_with("http://") || raw_url.starts_with("https://") {
        Url::parse(&raw_url)
    } else {
        let host = request
            .headers()
            .iter()
            .find(|h| h.field.equiv("Host"))
            .map(|h| h.value.as_str().to_string())
            .unwrap_or_default();
        Url::parse(&format!("http://{host}{raw_url}"))
    };
    let Ok(uri) = uri else {
        let _ =
            request.respond(tiny_http::Response::from_string("bad request").with_status_code(400));
        return;
    };

    let headers: Vec<(String, String)> = request
        .headers()
        .iter()
        .map(|h| (h.field.as_str().as_str().to_string(), h.value.as_str().to_string()))
        .collect();

    let response = match fetcher.fetch(&FetchRequest { uri, headers }) {
        Ok(resp) => {
            let mut out = tiny_http::Response::from_data(resp.body).with_status_code(resp.status);
            for (name, value) in resp.headers.iter() {
                if name.eq_ignore_ascii_case("content-length")
                    || name.eq_ignore_ascii_case("transfer-encoding")
                {
                    continue;
                }
                if let Ok(header) = tiny_http::Header::from_bytes(name.as_bytes(), value.as_bytes())
                {
                    out.add_header(header);
                }
            }
            out
        }
        Err(e) => {
            tiny_http::Response::from_string(format!("fixture error: {e}")).with_status_code(502)
        }
    };
    let _ = request.respond(response);
}
