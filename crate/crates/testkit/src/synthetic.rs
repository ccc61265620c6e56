//! Synthetic event corpora whose accept/reject outcome is derivable without
//! running the crawler.
//!
//! Construction separates four content cohorts by vocabulary mass:
//! the event page (all topic words), the seed references (a small topic
//! window plus dominant reference-unique filler, so the threshold lands
//! mid-range and sampled-into-the-event-vector seeds score clearly above it
//! while held-out seeds score clearly below), relevant descendants (near
//! copies of the event page), and irrelevant descendants (page-unique noise).
//! Every scored page must clear the aggregate threshold by at least
//! [`SCORE_MARGIN`] on the correct side or construction fails, so the
//! expected outcome is stable by validated construction rather than by
//! rerunning the crawler.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use chrono::{DateTime, Duration, NaiveDate, SecondsFormat, Utc};
use eventcrawl_core::changepoint::{Revision, RevisionHistory};
use eventcrawl_core::crawl::{extract_outlinks, CrawlMode, DismissReason};
use eventcrawl_core::event::{
    build_event_spec, EventBuildConfig, EventError, EventSources, EventSpec,
};
use eventcrawl_core::memento::{MementoClient, MementoClientConfig};
use eventcrawl_core::relevance::{
    build_term_vector, cosine, DensityExtractor, IdfTable, TextExtractor,
};
use eventcrawl_core::sampling::sample_indices;
use eventcrawl_core::temporal::{aggregate, temporal_score, TemporalError};
use thiserror::Error;
use url::Url;

use crate::fetcher::{FetchScope, FixtureFetcher};
use crate::site::{FixturePage, FixtureSite, Snapshot};

/// Minimum distance between any scored page's aggregate score and the
/// aggregate threshold. Construction fails when a page lands closer.
pub const SCORE_MARGIN: f64 = 0.02;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("bad synthetic parameters: {0}")]
    BadParams(String),
    #[error("degenerate fixture: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Fixture(#[from] crate::site::FixtureError),
}

#[derive(Debug, Clone)]
pub struct SyntheticParams {
    pub name: String,
    pub event_date: NaiveDate,
    /// Days of heavy edit activity; the detected change point lands at this
    /// offset from the first revision day.
    pub interval_days: i64,
    pub seeds: usize,
    pub children_per_page: usize,
    /// Deepest generated page depth (seeds are depth 0).
    pub depth: u32,
    /// Crawl depth bound written into the event spec.
    pub max_depth: u32,
    /// Pages at depths beyond this bound carry noise vocabulary; `None`
    /// makes every generated depth relevant.
    pub relevant_through_depth: Option<u32>,
    pub archives: Vec<String>,
    /// Archive every page once, five days before the event. All seeds are
    /// then dismissed as not archived.
    pub pre_event_only_archive: bool,
    /// Attach an undated page, a non-HTML page, and a dead link to the first
    /// sampled seed to exercise the dismissal paths.
    pub with_dismissal_pages: bool,
    pub rng_seed: u64,
}

impl SyntheticParams {
    pub fn new(name: impl Into<String>) -> Self {
        SyntheticParams {
            name: name.into(),
            event_date: NaiveDate::from_ymd_opt(2011, 1, 8).unwrap(),
            interval_days: 40,
            seeds: 8,
            children_per_page: 3,
            depth: 3,
            max_depth: 5,
            relevant_through_depth: None,
            archives: vec![
                "web.archive-alpha.example".to_string(),
                "wayback.archive-beta.example".to_string(),
            ],
            pre_event_only_archive: false,
            with_dismissal_pages: true,
            rng_seed: 7,
        }
    }

    pub fn dt_e(&self) -> DateTime<Utc> {
        self.event_date.and_hms_opt(0, 0, 1).expect("valid time").and_utc()
    }
}

/// A generated event: the fixture web, the inputs event setup consumes, and
/// the event spec those inputs produce.
pub struct SyntheticEvent {
    pub site: Arc<FixtureSite>,
    pub wiki_html: String,
    pub wiki_base: Url,
    pub revisions: RevisionHistory,
    pub revisions_jsonl: String,
    pub spec: EventSpec,
    pub params: SyntheticParams,
}

/// Ground truth for one crawl mode, keyed by normalized URI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedOutcome {
    pub mode: CrawlMode,
    pub accepted: BTreeSet<String>,
    pub rejected: BTreeSet<String>,
    pub dismissed: BTreeMap<String, DismissReason>,
    pub depths: BTreeMap<String, u32>,
}

impl ExpectedOutcome {
    /// Every URI expected to be recorded.
    pub fn fetched(&self) -> BTreeSet<String> {
        self.depths.keys().cloned().collect()
    }
}

const STUFFING: &str = "the of and a to in is was it for on are as with at by from or have an";
const TOPIC_WORDS: usize = 40;
const SEED_TOPIC_WINDOW: usize = 8;

fn topic_word(i: usize) -> String {
    format!("topic{:02}", i % TOPIC_WORDS)
}

fn repeat_words(words: &[String], times: usize) -> String {
    let mut out = Vec::with_capacity(words.len() * times);
    for word in words {
        for _ in 0..times {
            out.push(word.clone());
        }
    }
    out.join(" ")
}

fn wiki_body_text() -> String {
    let topics: Vec<String> = (0..TOPIC_WORDS).map(topic_word).collect();
    format!("{STUFFING} {}", repeat_words(&topics, 3))
}

fn seed_body_text(seed_index: usize) -> String {
    let window: Vec<String> =
        (0..SEED_TOPIC_WINDOW).map(|j| topic_word(seed_index * 4 + j)).collect();
    let filler: Vec<String> = (0..30).map(|j| format!("junk{seed_index:02}x{j:02}")).collect();
    format!("{STUFFING} {} {}", repeat_words(&window, 2), repeat_words(&filler, 4))
}

fn relevant_body_text(page_id: usize) -> String {
    // varying topic coverage spreads the aggregate scores (and thereby the
    // child priorities) without threatening the margin
    let coverage = TOPIC_WORDS - (page_id % 8);
    let topics: Vec<String> = (0..coverage).map(topic_word).collect();
    format!("{STUFFING} {} marker{page_id:04}", repeat_words(&topics, 3))
}

fn irrelevant_body_text(page_id: usize) -> String {
    let noise: Vec<String> =
        (0..TOPIC_WORDS).map(|j| format!("noise{page_id:04}x{j:02}")).collect();
    format!("{STUFFING} {}", repeat_words(&noise, 3))
}

fn page_html(
    title: &str,
    text: &str,
    published: Option<DateTime<Utc>>,
    children: &[String],
) -> String {
    let meta = published
        .map(|dt| {
            format!(
                "<meta property=\"article:published_time\" content=\"{}\"/>",
                dt.to_rfc3339_opts(SecondsFormat::Secs, true)
            )
        })
        .unwrap_or_default();
    let links: String = children
        .iter()
        .enumerate()
        .map(|(i, child)| format!("<li><a href=\"{child}\">more {i}</a></li>"))
        .collect();
    format!(
        "<html><head><title>{title}</title>{meta}</head>\
         <body><p>{text}</p><ul>{links}</ul></body></html>"
    )
}

struct GeneratedPage {
    uri: String,
    depth: u32,
    text: String,
    published: Option<DateTime<Utc>>,
    children: Vec<String>,
    archived: bool,
}

fn generate_pages(params: &SyntheticParams) -> Vec<GeneratedPage> {
    let dt_e = params.dt_e();
    let relevant_at = |depth: u32| params.relevant_through_depth.is_none_or(|cut| depth <= cut);
    let sampled_seeds = sample_indices(params.rng_seed, 0, params.seeds, 0.6);

    let mut pages = Vec::new();
    let mut page_id = 0usize;
    for seed in 0..params.seeds {
        let root = format!("http://press-{seed}.example/story-{seed}");
        let mut queue = VecDeque::new();
        queue.push_back((root, 0u32));
        while let Some((uri, depth)) = queue.pop_front() {
            page_id += 1;
            let text = if depth == 0 {
                seed_body_text(seed)
            } else if relevant_at(depth) {
                relevant_body_text(page_id)
            } else {
                irrelevant_body_text(page_id)
            };
            let published =
                dt_e + Duration::days(2 + (page_id % 9) as i64) + Duration::hours(depth as i64);
            let mut children = Vec::new();
            if depth < params.depth {
                for c in 0..params.children_per_page {
                    let child = format!("{uri}/c{c}");
                    children.push(child.clone());
                    queue.push_back((child, depth + 1));
                }
            }
            if params.with_dismissal_pages
                && depth == 0
                && seed == *sampled_seeds.first().unwrap_or(&0)
            {
                children.push(format!("{uri}/undated"));
                children.push(format!("{uri}/plain"));
                children.push(format!("{uri}/gone"));
            }
            pages.push(GeneratedPage {
                uri,
                depth,
                text,
                published: Some(published),
                children,
                archived: true,
            });
        }
    }
    pages
}

fn build_revisions(params: &SyntheticParams) -> (RevisionHistory, String) {
    let day0 = params.event_date.and_hms_opt(6, 0, 0).expect("valid time").and_utc();
    let mut revisions = Vec::new();
    let mut revid = 1000u64;
    for day in 0..params.interval_days {
        for edit in 0..6 {
            revisions.push(Revision {
                revid,
                timestamp: day0 + Duration::days(day) + Duration::hours(edit),
            });
            revid += 1;
        }
    }
    let mut day = params.interval_days + 6;
    while day < params.interval_days + 77 {
        revisions.push(Revision { revid, timestamp: day0 + Duration::days(day) });
        revid += 1;
        day += 7;
    }
    let jsonl: String = revisions
        .iter()
        .map(|r| {
            format!(
                "{{\"revid\": {}, \"timestamp\": \"{}\"}}\n",
                r.revid,
                r.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true)
            )
        })
        .collect();
    let history = RevisionHistory::new(params.name.clone(), revisions).expect("ordered");
    (history, jsonl)
}

fn build_wiki_html(params: &SyntheticParams, seed_uris: &[String]) -> String {
    let dt_e = params.dt_e();
    let date_text = dt_e.format("%B %-d, %Y").to_string();
    let references: String = seed_uris
        .iter()
        .enumerate()
        .map(|(i, uri)| {
            let cited = dt_e + Duration::days(1 + (i % 7) as i64);
            let retrieved = cited + Duration::days(20);
            format!(
                "<li id=\"cite_note-{i}\"><span class=\"reference-text\">\
                 \"Dispatch {i}\". Press {i}. {}. \
                 <a rel=\"nofollow\" class=\"external text\" href=\"{uri}\">link</a>. \
                 Retrieved {}.</span></li>",
                cited.format("%B %-d, %Y"),
                retrieved.format("%B %-d, %Y"),
            )
        })
        .collect();
    format!(
        "<html><head><title>{name}</title></head><body>\
         <table class=\"infobox\"><tbody>\
         <tr><th>Date</th><td>{date_text}</td></tr>\
         <tr><th>Location</th><td>Riverbend</td></tr>\
         </tbody></table>\
         <p>{body}</p>\
         <h2>References</h2>\
         <ol class=\"references\">{references}</ol>\
         </body></html>",
        name = params.name,
        body = wiki_body_text(),
    )
}

/// Builds the fixture web, the event-setup inputs, and the event spec, then
/// checks both crawl modes for degenerate margins.
pub fn build_synthetic_event(params: &SyntheticParams) -> Result<SyntheticEvent, SyntheticError> {
    if params.seeds < 5 {
        return Err(SyntheticError::BadParams("need at least 5 seeds".into()));
    }
    if params.archives.is_empty() {
        return Err(SyntheticError::BadParams("need at least one archive host".into()));
    }
    if params.interval_days < 16 {
        return Err(SyntheticError::BadParams("interval must be at least 16 days".into()));
    }

    let dt_e = params.dt_e();
    let pages = generate_pages(params);
    let mut site = FixtureSite::new("http://aggregator.example/timegate/");

    for (index, page) in pages.iter().enumerate() {
        let html =
            page_html(&format!("page {}", page.uri), &page.text, page.published, &page.children);
        site.add_page(&page.uri, html.clone(), page.published);
        if page.archived {
            let archive_host = &params.archives[index % params.archives.len()];
            let datetime = if params.pre_event_only_archive {
                dt_e - Duration::days(5)
            } else {
                page.published.expect("generated pages are dated") + Duration::days(3)
            };
            site.add_snapshot(
                &page.uri,
                Snapshot {
                    archive_host: archive_host.clone(),
                    datetime,
                    body: html,
                    redirect_hops: 0,
                    extra_headers: Vec::new(),
                },
            );
        }
    }

    if params.with_dismissal_pages {
        let sampled = sample_indices(params.rng_seed, 0, params.seeds, 0.6);
        let host_seed = *sampled.first().unwrap_or(&0);
        let root = format!("http://press-{host_seed}.example/story-{host_seed}");
        site.add_page(
            &format!("{root}/undated"),
            page_html("undated", &relevant_body_text(9000), None, &[]),
            None,
        );
        site.add_page_with(
            &format!("{root}/plain"),
            FixturePage {
                body: "plain text dispatch, not html".into(),
                published: Some(dt_e + Duration::days(3)),
                content_type: "text/plain".into(),
                status: 200,
            },
        );
        site.mark_external(&format!("{root}/gone"));
    }

    let seed_uris: Vec<String> =
        pages.iter().filter(|p| p.depth == 0).map(|p| p.uri.clone()).collect();
    let wiki_html = build_wiki_html(params, &seed_uris);
    let wiki_base = Url::parse("http://wiki.example/riverbend").expect("valid base");
    let (revisions, revisions_jsonl) = build_revisions(params);

    site.validate()?;
    let site = Arc::new(site);

    let fetcher = FixtureFetcher::new(Arc::clone(&site), FetchScope::Both);
    let memento_client = MementoClient::new(
        Arc::new(FixtureFetcher::new(Arc::clone(&site), FetchScope::Archive)),
        MementoClientConfig::new(site.timegate_base.clone()),
    );
    let idf = IdfTable::uniform();
    let extractor = DensityExtractor::default();
    let mut config = EventBuildConfig::new(params.name.clone());
    config.rng_seed = params.rng_seed;
    config.max_depth = params.max_depth;
    let sources = EventSources {
        fetcher: &fetcher,
        memento: Some(&memento_client),
        idf: &idf,
        extractor: &extractor,
        now: dt_e + Duration::days(params.interval_days + 120),
    };
    let spec = build_event_spec(&wiki_html, &wiki_base, &revisions, &config, &sources)?;

    let event = SyntheticEvent {
        site,
        wiki_html,
        wiki_base,
        revisions,
        revisions_jsonl,
        spec,
        params: params.clone(),
    };
    // both modes must have clean margins before the fixture is usable
    expected_outcome(&event, CrawlMode::Live)?;
    expected_outcome(&event, CrawlMode::Archive)?;
    Ok(event)
}

/// Derives the ground-truth crawl outcome for one mode by walking the page
/// tree with the spec's own accept rule, enforcing [`SCORE_MARGIN`] on every
/// scored page.
pub fn expected_outcome(
    event: &SyntheticEvent,
    mode: CrawlMode,
) -> Result<ExpectedOutcome, SyntheticError> {
    let spec = &event.spec;
    let site = &event.site;
    let idf = IdfTable::uniform();
    let extractor = DensityExtractor::default();
    let temporal = spec.temporal_params(mode, spec.dt_e)?;
    let th_aggr = spec.th_aggr();

    let mut outcome = ExpectedOutcome {
        mode,
        accepted: BTreeSet::new(),
        rejected: BTreeSet::new(),
        dismissed: BTreeMap::new(),
        depths: BTreeMap::new(),
    };

    let mut queue: VecDeque<(String, u32)> =
        spec.seeds.iter().map(|s| (s.as_str().to_string(), 0)).collect();
    while let Some((uri, depth)) = queue.pop_front() {
        if outcome.depths.contains_key(&uri) {
            continue;
        }
        outcome.depths.insert(uri.clone(), depth);

        let page = site.pages.get(&uri);
        let (dt_r, body) = match mode {
            CrawlMode::Live => match page {
                None => {
                    outcome.dismissed.insert(uri, DismissReason::FetchFailed);
                    continue;
                }
                Some(p) if p.status != 200 => {
                    outcome.dismissed.insert(uri, DismissReason::FetchFailed);
                    continue;
                }
                Some(p) if p.content_type != "text/html" => {
                    outcome.dismissed.insert(uri, DismissReason::NonHtml);
                    continue;
                }
                Some(p) => match p.published {
                    Some(dt) => (dt, &p.body),
                    None => {
                        outcome.dismissed.insert(uri, DismissReason::NoDatetime);
                        continue;
                    }
                },
            },
            CrawlMode::Archive => {
                let snaps = site.snapshots.get(&uri).filter(|s| !s.is_empty());
                let Some(snaps) = snaps else {
                    outcome.dismissed.insert(uri, DismissReason::NotArchived);
                    continue;
                };
                // closest to DT_E (ties earlier), one next-hop when pre-event
                let closest = snaps
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, s)| {
                        ((s.datetime - spec.dt_e).num_milliseconds().unsigned_abs(), s.datetime)
                    })
                    .map(|(i, _)| i)
                    .expect("non-empty");
                let selected = if snaps[closest].datetime >= spec.dt_e {
                    Some(&snaps[closest])
                } else {
                    snaps.get(closest + 1).filter(|s| s.datetime >= spec.dt_e)
                };
                let Some(snapshot) = selected else {
                    outcome.dismissed.insert(uri, DismissReason::NotArchived);
                    continue;
                };
                if !temporal.contains(snapshot.datetime) {
                    outcome.dismissed.insert(uri, DismissReason::NoDatetime);
                    continue;
                }
                (snapshot.datetime, &snapshot.body)
            }
        };

        let text = extractor.extract(body);
        let r_cont = cosine(&spec.event_vector, &build_term_vector(&text, &idf));
        let r_temp = temporal_score(dt_r, &temporal);
        let r_aggr = aggregate(r_cont, r_temp, spec.alpha, spec.beta);
        if (r_aggr - th_aggr).abs() < SCORE_MARGIN {
            return Err(SyntheticError::Degenerate(format!(
                "{uri} scores {r_aggr:.4} within {SCORE_MARGIN} of the threshold {th_aggr:.4}"
            )));
        }
        let accepted = r_aggr >= th_aggr;
        if accepted {
            outcome.accepted.insert(uri.clone());
            if depth < spec.max_depth {
                let base = Url::parse(&uri).expect("page URIs are valid");
                for child in extract_outlinks(body, &base) {
                    queue.push_back((child.as_str().to_string(), depth + 1));
                }
            }
        } else {
            outcome.rejected.insert(uri.clone());
        }
    }
    Ok(outcome)
}
