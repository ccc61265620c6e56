//! Deterministic offline web-and-archive fixtures for the focused crawler:
//! an in-process fetcher, a protocol-faithful TimeGate/Memento server (both
//! in-process and over a real socket), a logical clock, and synthetic event
//! corpora with analytically derivable crawl outcomes. Everything here is
//! byte-stable so end-to-end tests never need network access.

pub mod clock;
pub mod fetcher;
pub mod server;
pub mod site;
pub mod synthetic;

pub use clock::LogicalClock;
pub use fetcher::{serve_archive, serve_live, FetchScope, FixtureFetcher};
pub use server::FixtureServer;
pub use site::{memento_uri, FixtureError, FixturePage, FixtureSite, Snapshot};
pub use synthetic::{
    build_synthetic_event, expected_outcome, ExpectedOutcome, SyntheticEvent, SyntheticParams,
    SCORE_MARGIN,
};
