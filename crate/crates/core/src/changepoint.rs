//! Selects the reference version of an event's Wikipedia page from its edit
//! history: the page version live at the datetime after which the edit
//! frequency drastically decreases.
//!
//! Detection is an at-most-one-change mean-shift on the daily edit-count
//! series under a least-squares cost: the chosen split minimizes the total
//! within-segment sum of squared deviations from each segment's mean. A split
//! must reduce the unsplit SSE by at least 1% to count; otherwise the series
//! has no significant change point and callers fall back to the live page.

use std::io::BufRead;

use chrono::{DateTime, Duration, Utc};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChangePointError {
    #[error("no revisions")]
    NoRevisions,
    #[error("edit curve spans fewer than 2 days")]
    CurveTooShort,
    #[error("no significant change point")]
    NoSignificantChangePoint,
    #[error("change-point datetime precedes the first revision")]
    BeforeFirstRevision,
    #[error("revision timestamps must be non-decreasing (revision {revid})")]
    UnorderedRevisions { revid: u64 },
    #[error("invalid revision record at line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One page revision: an opaque identifier plus its UTC creation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Revision {
    pub revid: u64,
    pub timestamp: DateTime<Utc>,
}

/// Full edit history of one page, ordered by timestamp.
#[derive(Debug, Clone)]
pub struct RevisionHistory {
    pub page_title: String,
    revisions: Vec<Revision>,
}

impl RevisionHistory {
    pub fn new(
        page_title: impl Into<String>,
        revisions: Vec<Revision>,
    ) -> Result<Self, ChangePointError> {
        for pair in revisions.windows(2) {
            if pair[1].timestamp < pair[0].timestamp {
                return Err(ChangePointError::UnorderedRevisions { revid: pair[1].revid });
            }
        }
        Ok(RevisionHistory { page_title: page_title.into(), revisions })
    }

    pub fn revisions(&self) -> &[Revision] {
        &self.revisions
    }

    pub fn is_empty(&self) -> bool {
        self.revisions.is_empty()
    }

    /// Reads a JSON-lines dump: one `{"revid": ..., "timestamp": "ISO-8601"}`
    /// record per line. Blank lines are skipped; records are sorted by
    /// timestamp if the dump is unordered.
    pub fn from_jsonl(
        page_title: impl Into<String>,
        reader: impl BufRead,
    ) -> Result<Self, ChangePointError> {
        #[derive(Deserialize)]
        struct Record {
            revid: u64,
            timestamp: DateTime<Utc>,
        }
        let mut revisions = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(&line).map_err(|e| {
                ChangePointError::BadRecord { line: idx + 1, message: e.to_string() }
            })?;
            revisions.push(Revision { revid: rec.revid, timestamp: rec.timestamp });
        }
        revisions.sort_by_key(|r| r.timestamp);
        RevisionHistory::new(page_title, revisions)
    }
}

/// Pluggable origin of revision histories. The library ships a file-backed
/// source; a MediaWiki-API client can stand in behind the same trait.
pub trait RevisionSource {
    fn fetch_history(&self, page_title: &str) -> Result<RevisionHistory, ChangePointError>;
}

/// Reads histories from JSON-lines files on disk.
pub struct FileRevisionSource {
    pub path: std::path::PathBuf,
}

impl RevisionSource for FileRevisionSource {
    fn fetch_history(&self, page_title: &str) -> Result<RevisionHistory, ChangePointError> {
        let file = std::fs::File::open(&self.path)?;
        RevisionHistory::from_jsonl(page_title, std::io::BufReader::new(file))
    }
}

/// Daily edit activity from the first to the last revision day, with the
/// cumulative fraction of all edits completed by the end of each day.
#[derive(Debug, Clone, PartialEq)]
pub struct EditCurve {
    /// UTC midnight of day 0 (the first revision's calendar day).
    pub first_day: DateTime<Utc>,
    pub edits_per_day: Vec<f64>,
    pub cumulative_fraction: Vec<f64>,
}

impl EditCurve {
    pub fn days(&self) -> usize {
        self.edits_per_day.len()
    }

    /// UTC midnight of the given day offset.
    pub fn day_datetime(&self, day: usize) -> DateTime<Utc> {
        self.first_day + Duration::days(day as i64)
    }
}

/// Buckets the revision history into calendar days (UTC). Days without edits
/// get a zero bucket so the series is contiguous.
pub fn build_edit_curve(history: &RevisionHistory) -> Result<EditCurve, ChangePointError> {
    let revisions = history.revisions();
    let first = revisions.first().ok_or(ChangePointError::NoRevisions)?;
    let last = revisions.last().expect("non-empty");

    let first_day =
        first.timestamp.date_naive().and_hms_opt(0, 0, 0).expect("midnight is valid").and_utc();
    let span_days =
        (last.timestamp.date_naive() - first.timestamp.date_naive()).num_days() as usize + 1;

    let mut edits_per_day = vec![0.0f64; span_days];
    for rev in revisions {
        let day = (rev.timestamp.date_naive() - first.timestamp.date_naive()).num_days() as usize;
        edits_per_day[day] += 1.0;
    }

    let total: f64 = edits_per_day.iter().sum();
    let mut cumulative_fraction = Vec::with_capacity(span_days);
    let mut running = 0.0;
    for &count in &edits_per_day {
        running += count;
        cumulative_fraction.push(running / total);
    }

    Ok(EditCurve { first_day, edits_per_day, cumulative_fraction })
}

/// Minimum relative SSE improvement for a split to be significant.
const MIN_SSE_IMPROVEMENT: f64 = 0.01;

/// Finds the day index that best splits the daily edit counts into two
/// segments under the least-squares cost. The returned index is the first day
/// of the second segment. Ties resolve to the earliest index.
pub fn detect_change_point(curve: &EditCurve) -> Result<usize, ChangePointError> {
    detect_change_point_in(&curve.edits_per_day)
}

/// Same detection on a bare series; exposed for property tests.
pub fn detect_change_point_in(series: &[f64]) -> Result<usize, ChangePointError> {
    let n = series.len();
    if n < 2 {
        return Err(ChangePointError::CurveTooShort);
    }

    // prefix sums of x and x^2 so each segment cost is O(1)
    let mut sum = vec![0.0f64; n + 1];
    let mut sumsq = vec![0.0f64; n + 1];
    for (i, &x) in series.iter().enumerate() {
        sum[i + 1] = sum[i] + x;
        sumsq[i + 1] = sumsq[i] + x * x;
    }
    let sse = |a: usize, b: usize| -> f64 {
        let len = (b - a) as f64;
        let s = sum[b] - sum[a];
        (sumsq[b] - sumsq[a]) - s * s / len
    };

    let unsplit = sse(0, n);
    let mut best_split = 1;
    let mut best_cost = f64::INFINITY;
    for split in 1..n {
        let cost = sse(0, split) + sse(split, n);
        if cost < best_cost {
            best_cost = cost;
            best_split = split;
        }
    }

    if unsplit <= 0.0 || (unsplit - best_cost) / unsplit < MIN_SSE_IMPROVEMENT {
        return Err(ChangePointError::NoSignificantChangePoint);
    }
    Ok(best_split)
}

/// Latest revision with `timestamp <= dt_cp`.
pub fn select_version(
    history: &RevisionHistory,
    dt_cp: DateTime<Utc>,
) -> Result<u64, ChangePointError> {
    let revisions = history.revisions();
    if revisions.is_empty() {
        return Err(ChangePointError::NoRevisions);
    }
    revisions
        .iter()
        .rev()
        .find(|r| r.timestamp <= dt_cp)
        .map(|r| r.revid)
        .ok_or(ChangePointError::BeforeFirstRevision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn ts(day: i64, hour: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2015, 12, 2, hour, 0, 0).unwrap() + Duration::days(day)
    }

    fn history(days: &[i64]) -> RevisionHistory {
        let revisions = days
            .iter()
            .enumerate()
            .map(|(i, &d)| Revision { revid: i as u64 + 1, timestamp: ts(d, 12) })
            .collect();
        RevisionHistory::new("Test page", revisions).unwrap()
    }

    #[test]
    fn single_day_history_gives_unit_curve() {
        let curve = build_edit_curve(&history(&[0; 10])).unwrap();
        assert_eq!(curve.edits_per_day, vec![10.0]);
        assert_eq!(curve.cumulative_fraction, vec![1.0]);
    }

    #[test]
    fn curve_counts_and_fractions_per_day() {
        let curve = build_edit_curve(&history(&[0, 0, 1, 2])).unwrap();
        assert_eq!(curve.edits_per_day, vec![2.0, 1.0, 1.0]);
        assert_eq!(curve.cumulative_fraction, vec![0.5, 0.75, 1.0]);
    }

    #[test]
    fn empty_history_is_an_error() {
        let h = RevisionHistory::new("Empty", Vec::new()).unwrap();
        assert!(matches!(build_edit_curve(&h), Err(ChangePointError::NoRevisions)));
    }

    #[test]
    fn front_loaded_history_reaches_ninety_percent_at_day_nine() {
        // 90 edits over days 0-9, 10 more over days 10-99
        let mut days: Vec<i64> = Vec::new();
        for d in 0..10 {
            days.extend(std::iter::repeat_n(d, 9));
        }
        for k in 0..10 {
            days.push(10 + k * 9);
        }
        let curve = build_edit_curve(&history(&days)).unwrap();
        assert_eq!(curve.days(), 92);
        assert!((curve.cumulative_fraction[9] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn knee_at_day_ten_is_detected() {
        let mut series = vec![9.0; 10];
        let mut tail = vec![0.0; 90];
        for k in 0..10 {
            tail[k * 9] = 1.0;
        }
        series.extend(tail);
        assert_eq!(detect_change_point_in(&series).unwrap(), 10);
    }

    #[test]
    fn constant_series_has_no_change_point() {
        assert!(matches!(
            detect_change_point_in(&[5.0; 6]),
            Err(ChangePointError::NoSignificantChangePoint)
        ));
    }

    #[test]
    fn short_curve_is_an_error() {
        assert!(matches!(detect_change_point_in(&[3.0]), Err(ChangePointError::CurveTooShort)));
    }

    #[test]
    fn version_selection_takes_latest_at_or_before() {
        let h = history(&[0, 10, 90]);
        assert_eq!(select_version(&h, ts(80, 12)).unwrap(), 2);
    }

    #[test]
    fn version_selection_is_boundary_inclusive() {
        let h = history(&[0, 10, 90]);
        assert_eq!(select_version(&h, ts(10, 12)).unwrap(), 2);
        // one second before the day-10 revision lands on the day-0 revision
        assert_eq!(select_version(&h, ts(10, 12) - Duration::seconds(1)).unwrap(), 1);
    }

    #[test]
    fn version_before_first_revision_is_an_error() {
        let h = history(&[5, 10]);
        assert!(matches!(select_version(&h, ts(0, 0)), Err(ChangePointError::BeforeFirstRevision)));
    }

    #[test]
    fn selects_known_revision_id_at_change_point_date() {
        let revisions = vec![
            Revision {
                revid: 700000000,
                timestamp: Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap(),
            },
            Revision {
                revid: 706012350,
                timestamp: Utc.with_ymd_and_hms(2016, 2, 18, 9, 0, 0).unwrap(),
            },
            Revision {
                revid: 710000000,
                timestamp: Utc.with_ymd_and_hms(2016, 3, 1, 0, 0, 0).unwrap(),
            },
        ];
        let h = RevisionHistory::new("2015 San Bernardino attack", revisions).unwrap();
        let dt_cp = Utc.with_ymd_and_hms(2016, 2, 20, 0, 0, 0).unwrap();
        assert_eq!(select_version(&h, dt_cp).unwrap(), 706012350);
    }

    #[test]
    fn jsonl_round_trip() {
        let input = "{\"revid\": 3, \"timestamp\": \"2011-01-10T08:00:00Z\"}\n\
                     {\"revid\": 1, \"timestamp\": \"2011-01-08T12:00:00Z\"}\n\
                     \n\
                     {\"revid\": 2, \"timestamp\": \"2011-01-09T01:00:00Z\"}\n";
        let h = RevisionHistory::from_jsonl("Page", input.as_bytes()).unwrap();
        let ids: Vec<u64> = h.revisions().iter().map(|r| r.revid).collect();
        assert_eq!(ids, vec![1, 2, 3]);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cumulative_fraction_is_monotone_and_ends_at_one(
                day_offsets in proptest::collection::vec(0i64..120, 1..60)
            ) {
                let mut days = day_offsets;
                days.sort_unstable();
                let curve = build_edit_curve(&history(&days)).unwrap();
                prop_assert!(curve
                    .cumulative_fraction
                    .windows(2)
                    .all(|w| w[0] <= w[1] + 1e-15));
                prop_assert!((curve.cumulative_fraction.last().unwrap() - 1.0).abs() < 1e-12);
                prop_assert!(curve.edits_per_day.iter().all(|&c| c >= 0.0));
                prop_assert_eq!(curve.edits_per_day.iter().sum::<f64>() as usize, days.len());
            }
        }
    }

    #[test]
    fn malformed_jsonl_reports_line() {
        let input = "{\"revid\": 1, \"timestamp\": \"2011-01-08T12:00:00Z\"}\nnot json\n";
        match RevisionHistory::from_jsonl("Page", input.as_bytes()) {
            Err(ChangePointError::BadRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected: {:?}", other),
        }
    }
}
