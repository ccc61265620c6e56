//! The shipped fixture corpora parse and carry the hand-counted contents.

use std::path::PathBuf;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use eventcrawl_core::changepoint::{
    build_edit_curve, detect_change_point, FileRevisionSource, RevisionSource,
};
use eventcrawl_core::date_extract::StubLookup;
use eventcrawl_core::event::{
    extract_reference_entries, extract_seeds, find_event_date_text, parse_event_datetime,
};
use eventcrawl_core::fetch::{FetchRequest, Fetcher};
use eventcrawl_core::memento::{parse_link_header, serialize_link_header};
use eventcrawl_core::relevance::IdfTable;
use eventcrawl_testkit::{FetchScope, FixtureFetcher, FixtureSite};
use url::Url;

fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(path)
}

#[test]
fn event_page_reference_counts_match_the_hand_count() {
    let html = std::fs::read_to_string(fixture("wiki/event_page.html")).unwrap();
    let base = Url::parse("https://en.wikipedia.org/wiki/Riverbend_reservoir_flood").unwrap();

    // 13 reference items; one wiki-internal anchor excluded, one duplicate
    // collapsed -> 11 external references before filtering
    let before = extract_reference_entries(&html, &base);
    assert_eq!(before.len(), 11);

    // extension filter drops the .pdf and .jpg targets, the URI heuristic
    // drops the .ru reference with a non-Latin path -> 8 seeds
    let seeds = extract_seeds(&html, &base).unwrap();
    assert_eq!(seeds.len(), 8);
    assert_eq!(seeds[0].uri.as_str(), "http://courier.example/2009/04/03/spillway-gates-fail");
    // citation dates prefer the publication date over the Retrieved date
    assert_eq!(
        seeds[0].cited_datetime.unwrap(),
        Utc.with_ymd_and_hms(2009, 4, 3, 0, 0, 1).unwrap()
    );

    let date_text = find_event_date_text(&html).unwrap();
    assert_eq!(
        parse_event_datetime(&date_text).unwrap(),
        Utc.with_ymd_and_hms(2009, 4, 3, 0, 0, 1).unwrap()
    );
}

#[test]
fn revision_dump_yields_the_constructed_change_point() {
    let source = FileRevisionSource { path: fixture("wiki/revisions.jsonl") };
    let history = source.fetch_history("Riverbend reservoir flood").unwrap();
    assert_eq!(history.revisions().len(), 76);

    let curve = build_edit_curve(&history).unwrap();
    // 22 days of burst edits, then the sparse tail
    let day = detect_change_point(&curve).unwrap();
    assert_eq!(day, 22);
    assert_eq!(curve.day_datetime(day), Utc.with_ymd_and_hms(2009, 4, 25, 0, 0, 0).unwrap());
}

#[test]
fn idf_table_fixture_parses_and_orders_weights() {
    let idf = IdfTable::from_tsv_path(&fixture("idf/mini.tsv")).unwrap();
    assert_eq!(idf.corpus_size(), 100_000);
    assert!(idf.weight("spillway") > idf.weight("flood"));
    assert!(idf.weight("flood") > idf.weight("the"));
    assert!(idf.weight("spillway gates") > idf.weight("rescue crews"));
}

#[test]
fn lookup_map_fixture_parses() {
    let lookup = StubLookup::from_json_path(&fixture("lookup/first_mentions.json")).unwrap();
    use eventcrawl_core::date_extract::DatetimeLookup;
    let hit = lookup
        .lookup(&Url::parse("http://metrowire.example/news/east-bank-evacuations").unwrap())
        .unwrap();
    assert_eq!(hit.unwrap(), Utc.with_ymd_and_hms(2009, 4, 3, 14, 22, 0).unwrap());
}

#[test]
fn site_definition_fixture_loads_and_serves() {
    let site = FixtureSite::from_json_path(&fixture("sites/two_archive_site.json")).unwrap();
    assert_eq!(site.pages.len(), 3);
    assert_eq!(site.archive_hosts().len(), 2);

    let fetcher = FixtureFetcher::new(Arc::new(site), FetchScope::Both);
    let live = fetcher
        .fetch(&FetchRequest::get(Url::parse("http://site.example/index").unwrap()))
        .unwrap();
    assert_eq!(live.status, 200);
    assert!(live.body_text().contains("old mill district"));

    let timegate = fetcher
        .fetch(
            &FetchRequest::get(
                Url::parse("http://aggregator.example/timegate/http://site.example/index").unwrap(),
            )
            .with_header("Accept-Datetime", "Fri, 03 Apr 2009 00:00:01 GMT"),
        )
        .unwrap();
    assert_eq!(timegate.status, 302);
    assert!(timegate
        .headers
        .get("Location")
        .unwrap()
        .starts_with("http://web.archive-alpha.example/web/20090405000000/"));
}

#[test]
fn captured_link_headers_round_trip_byte_exactly() {
    let corpus = std::fs::read_to_string(fixture("link_headers/captured.txt")).unwrap();
    let mut checked = 0;
    for line in corpus.lines().filter(|l| !l.trim().is_empty()) {
        let parsed = parse_link_header(line).unwrap();
        assert!(!parsed.entries.is_empty());
        let serialized = serialize_link_header(&parsed);
        assert_eq!(serialized, line, "serialization must reproduce the captured header");
        checked += 1;
    }
    assert_eq!(checked, 5);
}
