//! Focused-crawl engine for building event-centric web collections.
//!
//! The engine derives an event model from a Wikipedia page version selected by
//! edit-frequency change-point detection, then crawls either the live web or,
//! through Memento datetime negotiation across web archives, the archived web.
//! Every fetched resource is scored for content relevance (TF-IDF cosine
//! against the event vector) and temporal relevance (interval plus exponential
//! decay), and accepted into the collection when the weighted aggregate score
//! clears the event's aggregate threshold.
//!
//! Crate layout:
//! - [`changepoint`]: edit-curve construction and mean-shift change-point detection
//! - [`event`]: event spec assembly (event datetime, seed extraction, thresholds)
//! - [`relevance`]: term vectors, cosine scoring, content threshold estimation
//! - [`temporal`]: temporal scoring, grace periods, aggregate score/threshold
//! - [`date_extract`]: resource datetime determination for live pages and Mementos
//! - [`memento`]: Memento protocol client (TimeGate negotiation, Link parsing)
//! - [`crawl`]: priority frontier, crawl loop, collection persistence
//! - [`report`]: per-depth, accumulated-relevance, and archive-share analyses

pub mod changepoint;
pub mod clock;
pub mod crawl;
pub mod date_extract;
pub mod event;
pub mod fetch;
pub mod memento;
pub mod relevance;
pub mod report;
pub mod sampling;
pub mod temporal;

pub use clock::{Clock, SystemClock};
pub use crawl::{
    accept, extract_outlinks, normalize_uri, Collection, CrawlMode, CrawlObserver, CrawlRecord,
    CrawlSettings, Crawler, DismissReason, Frontier, FrontierEntry,
};
pub use event::{
    build_event_spec, extract_reference_entries, extract_seeds, parse_event_datetime, EventSpec,
    ReferenceEntry,
};
pub use fetch::{FetchError, FetchRequest, FetchResponse, Fetcher, Headers, PoliteFetcher};
pub use memento::{parse_link_header, parse_timemap, LinkRelations, Memento, MementoClient};
pub use relevance::{
    build_event_vector, build_term_vector, content_threshold, cosine, extract_main_text, IdfTable,
    TermVector,
};
pub use temporal::{
    aggregate, aggregate_threshold, grace_period_archive, grace_period_live, temporal_score,
    temporal_threshold, RelevanceScores, TemporalParams,
};
