//! Analyses over persisted collections: per-depth relevance histograms,
//! accumulated relevance over time and over documents, archive contribution
//! shares, and cross-collection overlap. The reporters emit plot data (CSV
//! series plus a JSON summary); rendering is out of scope.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crawl::{Collection, CrawlMode, CrawlRecord};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("archive contributions require an archive-mode collection")]
    NotAnArchiveCrawl,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-depth crawl counts. Dismissed records carry no scores and are counted
/// in their own column rather than in the totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub depth: u32,
    pub total_crawled: u64,
    pub total_relevant: u64,
    pub fraction_relevant: f64,
    pub dismissed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthStats {
    pub rows: Vec<DepthRow>,
}

/// Counts scored and dismissed records per depth, 0 through the deepest depth
/// observed or the configured maximum, whichever is larger.
pub fn depth_histogram(collection: &Collection) -> DepthStats {
    let observed_max = collection.records.iter().map(|r| r.depth).max().unwrap_or(0);
    let max_depth = collection.event.max_depth.max(observed_max);
    let mut rows: Vec<DepthRow> = (0..=max_depth)
        .map(|depth| DepthRow {
            depth,
            total_crawled: 0,
            total_relevant: 0,
            fraction_relevant: 0.0,
            dismissed: 0,
        })
        .collect();
    for record in &collection.records {
        let row = &mut rows[record.depth as usize];
        if record.is_dismissed() {
            row.dismissed += 1;
        } else {
            row.total_crawled += 1;
            if record.accepted {
                row.total_relevant += 1;
            }
        }
    }
    for row in &mut rows {
        if row.total_crawled > 0 {
            row.fraction_relevant = row.total_relevant as f64 / row.total_crawled as f64;
        }
    }
    DepthStats { rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Elapsed crawl time in seconds.
    Time,
    /// Document index in dequeue order, 1-based.
    Documents,
}

impl std::str::FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "time" => Ok(Axis::Time),
            "documents" => Ok(Axis::Documents),
            other => Err(format!("unknown axis {other:?} (expected time|documents)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    Relevant,
    All,
}

impl std::str::FromStr for Subset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "relevant" => Ok(Subset::Relevant),
            "all" => Ok(Subset::All),
            other => Err(format!("unknown subset {other:?} (expected relevant|all)")),
        }
    }
}

/// Running sum of aggregate relevance scores. `Subset::All` covers every
/// scored (non-dismissed) record, accepted or not; dismissed records carry no
/// score and never contribute.
pub fn accumulated_relevance(
    collection: &Collection,
    axis: Axis,
    subset: Subset,
) -> Vec<(f64, f64)> {
    let mut records: Vec<&CrawlRecord> =
        collection.scored().filter(|r| subset == Subset::All || r.accepted).collect();
    if axis == Axis::Time {
        records.sort_by_key(|r| r.elapsed_ms);
    }
    let mut series = Vec::with_capacity(records.len());
    let mut running = 0.0;
    for (index, record) in records.iter().enumerate() {
        running += record.r_aggr.unwrap_or(0.0);
        let x = match axis {
            Axis::Time => record.elapsed_ms as f64 / 1000.0,
            Axis::Documents => (index + 1) as f64,
        };
        series.push((x, running));
    }
    series
}

/// Share of scored records each archive contributed. Fractions sum to 1.
pub fn archive_contributions(
    collection: &Collection,
) -> Result<BTreeMap<String, f64>, ReportError> {
    if collection.mode != CrawlMode::Archive {
        return Err(ReportError::NotAnArchiveCrawl);
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
    for record in collection.scored() {
        if let Some(archive) = &record.archive_id {
            *counts.entry(archive.clone()).or_insert(0) += 1;
            total += 1;
        }
    }
    Ok(counts.into_iter().map(|(archive, count)| (archive, count as f64 / total as f64)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionComparison {
    pub relevant_a: usize,
    pub relevant_b: usize,
    pub overlap: usize,
}

/// Overlap between the accepted URIs of two collections, on normalized
/// original-form URIs.
pub fn compare_collections(a: &Collection, b: &Collection) -> CollectionComparison {
    let set_a: std::collections::HashSet<&str> = a.accepted().map(|r| r.uri.as_str()).collect();
    let set_b: std::collections::HashSet<&str> = b.accepted().map(|r| r.uri.as_str()).collect();
    CollectionComparison {
        relevant_a: set_a.len(),
        relevant_b: set_b.len(),
        overlap: set_a.intersection(&set_b).count(),
    }
}

/// Headline counts persisted as the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionSummary {
    pub event: String,
    pub mode: CrawlMode,
    pub records: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub dismissed: usize,
    pub dismissed_no_datetime: usize,
    pub dismissed_fetch_failed: usize,
    pub dismissed_not_archived: usize,
    pub dismissed_non_html: usize,
    pub accumulated_relevance_all: f64,
    pub accumulated_relevance_relevant: f64,
    pub crawl_seconds: f64,
}

pub fn summarize(collection: &Collection) -> CollectionSummary {
    use crate::crawl::DismissReason::*;
    let count_reason =
        |reason| collection.records.iter().filter(|r| r.dismissed_reason == Some(reason)).count();
    let accepted = collection.accepted().count();
    let dismissed = collection.dismissed().count();
    CollectionSummary {
        event: collection.event.name.clone(),
        mode: collection.mode,
        records: collection.records.len(),
        accepted,
        rejected: collection.records.len() - accepted - dismissed,
        dismissed,
        dismissed_no_datetime: count_reason(NoDatetime),
        dismissed_fetch_failed: count_reason(FetchFailed),
        dismissed_not_archived: count_reason(NotArchived),
        dismissed_non_html: count_reason(NonHtml),
        accumulated_relevance_all: collection.scored().map(|r| r.r_aggr.unwrap_or(0.0)).sum(),
        accumulated_relevance_relevant: collection
            .accepted()
            .map(|r| r.r_aggr.unwrap_or(0.0))
            .sum(),
        crawl_seconds: (collection.finished_at - collection.started_at).num_milliseconds() as f64
            / 1000.0,
    }
}

pub fn write_depth_csv(stats: &DepthStats, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "depth,total_crawled,total_relevant,fraction_relevant,dismissed")?;
    for row in &stats.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.depth, row.total_crawled, row.total_relevant, row.fraction_relevant, row.dismissed
        )?;
    }
    Ok(())
}

pub fn write_series_csv(
    series: &[(f64, f64)],
    x_label: &str,
    mut w: impl Write,
) -> std::io::Result<()> {
    writeln!(w, "{x_label},accumulated_relevance")?;
    for (x, y) in series {
        writeln!(w, "{x},{y}")?;
    }
    Ok(())
}

pub fn write_contributions_csv(
    contributions: &BTreeMap<String, f64>,
    mut w: impl Write,
) -> std::io::Result<()> {
    writeln!(w, "archive_id,fraction")?;
    for (archive, fraction) in contributions {
        writeln!(w, "{archive},{fraction}")?;
    }
    Ok(())
}
