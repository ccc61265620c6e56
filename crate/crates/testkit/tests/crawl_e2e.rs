//! End-to-end smoke: single-worker crawls over a synthetic event reproduce
//! the analytically expected outcome in both modes.

use std::collections::BTreeMap;
use std::sync::Arc;

use eventcrawl_core::crawl::{Collection, CrawlMode, CrawlSettings, Crawler, DismissReason};
use eventcrawl_core::date_extract::NullLookup;
use eventcrawl_core::memento::{MementoClient, MementoClientConfig};
use eventcrawl_core::relevance::{DensityExtractor, IdfTable};
use eventcrawl_testkit::{
    build_synthetic_event, expected_outcome, FetchScope, FixtureFetcher, LogicalClock,
    SyntheticEvent, SyntheticParams,
};

fn run_crawl(event: &SyntheticEvent, mode: CrawlMode) -> Collection {
    let fetcher = Arc::new(FixtureFetcher::new(Arc::clone(&event.site), FetchScope::Both));
    let memento = MementoClient::new(
        Arc::new(FixtureFetcher::new(Arc::clone(&event.site), FetchScope::Archive)),
        MementoClientConfig::new(event.site.timegate_base.clone()),
    );
    let idf = IdfTable::uniform();
    let crawler = Crawler {
        spec: &event.spec,
        mode,
        fetcher,
        memento: Some(&memento),
        lookup: Arc::new(NullLookup),
        idf: &idf,
        extractor: Arc::new(DensityExtractor::default()),
        clock: Arc::new(LogicalClock::default_epoch()),
        settings: CrawlSettings::default(),
        observers: Vec::new(),
    };
    crawler.crawl().unwrap()
}

fn assert_matches_expectation(collection: &Collection, event: &SyntheticEvent, mode: CrawlMode) {
    let expected = expected_outcome(event, mode).unwrap();

    let accepted: std::collections::BTreeSet<String> =
        collection.accepted().map(|r| r.uri.as_str().to_string()).collect();
    assert_eq!(accepted, expected.accepted, "{mode} accepted set");

    let rejected: std::collections::BTreeSet<String> = collection
        .records
        .iter()
        .filter(|r| !r.accepted && !r.is_dismissed())
        .map(|r| r.uri.as_str().to_string())
        .collect();
    assert_eq!(rejected, expected.rejected, "{mode} rejected set");

    let dismissed: BTreeMap<String, DismissReason> = collection
        .dismissed()
        .map(|r| (r.uri.as_str().to_string(), r.dismissed_reason.unwrap()))
        .collect();
    assert_eq!(dismissed, expected.dismissed, "{mode} dismissed set");

    let depths: BTreeMap<String, u32> =
        collection.records.iter().map(|r| (r.uri.as_str().to_string(), r.depth)).collect();
    assert_eq!(depths, expected.depths, "{mode} depth map");
}

#[test]
fn live_crawl_reproduces_the_expected_outcome() {
    let event = build_synthetic_event(&SyntheticParams::new("riverbend-e2e-live")).unwrap();
    let collection = run_crawl(&event, CrawlMode::Live);
    assert_matches_expectation(&collection, &event, CrawlMode::Live);
    assert!(collection.accepted().count() > 0);
    assert!(collection.dismissed().count() >= 3);
}

#[test]
fn archive_crawl_reproduces_the_expected_outcome() {
    let event = build_synthetic_event(&SyntheticParams::new("riverbend-e2e-archive")).unwrap();
    let collection = run_crawl(&event, CrawlMode::Archive);
    assert_matches_expectation(&collection, &event, CrawlMode::Archive);
    // every scored record names the archive that held its memento
    for record in collection.scored() {
        assert!(record.uri_m.is_some());
        assert!(record.archive_id.is_some());
    }
}

#[test]
fn repeated_crawls_are_byte_identical() {
    let event = build_synthetic_event(&SyntheticParams::new("riverbend-e2e-repro")).unwrap();
    for mode in [CrawlMode::Live, CrawlMode::Archive] {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run_crawl(&event, mode).save(dir_a.path()).unwrap();
        run_crawl(&event, mode).save(dir_b.path()).unwrap();
        for file in ["event.json", "collection.jsonl"] {
            let a = std::fs::read(dir_a.path().join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join(file)).unwrap();
            assert_eq!(a, b, "{mode} {file} differs between runs");
        }
    }
}

#[test]
fn no_record_shares_a_uri_and_child_depths_follow_parents() {
    let event = build_synthetic_event(&SyntheticParams::new("riverbend-e2e-invariants")).unwrap();
    let collection = run_crawl(&event, CrawlMode::Live);

    let mut seen = std::collections::HashSet::new();
    for record in &collection.records {
        assert!(seen.insert(record.uri.as_str().to_string()), "duplicate {}", record.uri);
        assert!(record.depth <= event.spec.max_depth);
    }

    let depth_of: BTreeMap<&str, u32> =
        collection.records.iter().map(|r| (r.uri.as_str(), r.depth)).collect();
    for record in &collection.records {
        if let Some(parent) = &record.parent {
            assert_eq!(
                record.depth,
                depth_of[parent.as_str()] + 1,
                "{} depth does not follow its parent",
                record.uri
            );
        } else {
            assert_eq!(record.depth, 0, "{} has no parent but non-zero depth", record.uri);
        }
    }
}

#[test]
fn max_depth_zero_fetches_only_the_seeds() {
    let mut params = SyntheticParams::new("riverbend-e2e-depth0");
    params.max_depth = 0;
    params.with_dismissal_pages = false;
    let event = build_synthetic_event(&params).unwrap();
    let collection = run_crawl(&event, CrawlMode::Live);
    assert_eq!(collection.records.len(), params.seeds);
    assert!(collection.records.iter().all(|r| r.depth == 0));
}

#[test]
fn strict_frontier_cap_aborts_with_a_typed_overflow() {
    let event = build_synthetic_event(&SyntheticParams::new("riverbend-e2e-overflow")).unwrap();
    let fetcher = Arc::new(FixtureFetcher::new(Arc::clone(&event.site), FetchScope::Both));
    let idf = IdfTable::uniform();
    let crawler = Crawler {
        spec: &event.spec,
        mode: CrawlMode::Live,
        fetcher,
        memento: None,
        lookup: Arc::new(NullLookup),
        idf: &idf,
        extractor: Arc::new(DensityExtractor::default()),
        clock: Arc::new(LogicalClock::default_epoch()),
        settings: CrawlSettings {
            frontier_cap: event.spec.seeds.len(),
            evict_on_full: false,
            ..CrawlSettings::default()
        },
        observers: Vec::new(),
    };
    let err = crawler.crawl().unwrap_err();
    assert!(matches!(err, eventcrawl_core::crawl::CrawlError::Frontier(_)), "got {err}");
}

#[test]
fn multi_worker_crawl_covers_the_same_uri_set() {
    let event = build_synthetic_event(&SyntheticParams::new("riverbend-e2e-workers")).unwrap();
    let single = run_crawl(&event, CrawlMode::Live);

    let fetcher = Arc::new(FixtureFetcher::new(Arc::clone(&event.site), FetchScope::Both));
    let idf = IdfTable::uniform();
    let crawler = Crawler {
        spec: &event.spec,
        mode: CrawlMode::Live,
        fetcher,
        memento: None,
        lookup: Arc::new(NullLookup),
        idf: &idf,
        extractor: Arc::new(DensityExtractor::default()),
        clock: Arc::new(LogicalClock::default_epoch()),
        settings: CrawlSettings { workers: 4, ..CrawlSettings::default() },
        observers: Vec::new(),
    };
    let parallel = crawler.crawl().unwrap();

    let uris = |c: &Collection| -> std::collections::BTreeSet<String> {
        c.records.iter().map(|r| r.uri.as_str().to_string()).collect()
    };
    assert_eq!(uris(&single), uris(&parallel));
    let accepted = |c: &Collection| -> std::collections::BTreeSet<String> {
        c.accepted().map(|r| r.uri.as_str().to_string()).collect()
    };
    assert_eq!(accepted(&single), accepted(&parallel));
}
