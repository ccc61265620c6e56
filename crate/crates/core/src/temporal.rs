//! Temporal relevance: a resource scores 1 inside the event interval, 0
//! before the event, and decays exponentially after the interval's end with a
//! half-life of a quarter of the interval, down to 0 once the grace period is
//! exhausted. Also houses the weighted aggregate score and threshold.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::ReferenceEntry;
use crate::sampling::sample_indices;

#[derive(Debug, Error)]
pub enum TemporalError {
    #[error("event datetime must precede the interval's upper bound")]
    EmptyInterval,
    #[error("no reference carries both a cited and an archived datetime")]
    NoArchivalGaps,
    #[error("need at least 2 references with cited datetimes, got {0}")]
    TooFewDatedReferences(usize),
    #[error("no sampled repeat contained a dated reference")]
    NoDatedSamples,
    #[error("threshold estimation needs at least 1 repeat")]
    ZeroRepeats,
}

/// Interval bounds and decay constants for temporal scoring. `delta_t` is a
/// quarter of the interval and doubles as the decay half-life; `grace` caps
/// how far past the interval a resource may still score above zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalParams {
    dt_e: DateTime<Utc>,
    dt_cp: DateTime<Utc>,
    delta_t: Duration,
    grace: Duration,
    grace_cutoff: bool,
}

impl TemporalParams {
    pub fn new(
        dt_e: DateTime<Utc>,
        dt_cp: DateTime<Utc>,
        grace: Duration,
    ) -> Result<Self, TemporalError> {
        Self::with_cutoff(dt_e, dt_cp, grace, true)
    }

    /// `grace_cutoff = false` lets the exponential decay run past the grace
    /// period instead of dropping to zero.
    pub fn with_cutoff(
        dt_e: DateTime<Utc>,
        dt_cp: DateTime<Utc>,
        grace: Duration,
        grace_cutoff: bool,
    ) -> Result<Self, TemporalError> {
        if dt_e >= dt_cp {
            return Err(TemporalError::EmptyInterval);
        }
        let grace = grace.max(Duration::zero());
        Ok(TemporalParams { dt_e, dt_cp, delta_t: (dt_cp - dt_e) / 4, grace, grace_cutoff })
    }

    pub fn dt_e(&self) -> DateTime<Utc> {
        self.dt_e
    }

    pub fn dt_cp(&self) -> DateTime<Utc> {
        self.dt_cp
    }

    pub fn delta_t(&self) -> Duration {
        self.delta_t
    }

    pub fn grace(&self) -> Duration {
        self.grace
    }

    /// True when `dt` lies inside the closed event interval.
    pub fn contains(&self, dt: DateTime<Utc>) -> bool {
        self.dt_e <= dt && dt <= self.dt_cp
    }
}

/// Temporal relevance of a resource datetime.
pub fn temporal_score(dt_r: DateTime<Utc>, params: &TemporalParams) -> f64 {
    if dt_r < params.dt_e {
        return 0.0;
    }
    if dt_r <= params.dt_cp {
        return 1.0;
    }
    let overshoot = dt_r - params.dt_cp;
    if params.grace_cutoff && overshoot > params.grace {
        return 0.0;
    }
    let ratio = overshoot.num_milliseconds() as f64 / params.delta_t.num_milliseconds() as f64;
    (-std::f64::consts::LN_2 * ratio).exp()
}

/// Grace period for archive crawls: the mean gap between a reference's cited
/// datetime and its archival datetime, over references carrying both.
/// Negative gaps (archived before cited) clamp to zero before averaging.
pub fn grace_period_archive(refs: &[ReferenceEntry]) -> Result<Duration, TemporalError> {
    let gaps: Vec<i64> = refs
        .iter()
        .filter_map(|r| match (r.cited_datetime, r.archived_datetime) {
            (Some(cited), Some(archived)) => Some((archived - cited).num_milliseconds().max(0)),
            _ => None,
        })
        .collect();
    if gaps.is_empty() {
        return Err(TemporalError::NoArchivalGaps);
    }
    let total: i128 = gaps.iter().map(|&g| g as i128).sum();
    Ok(Duration::milliseconds((total / gaps.len() as i128) as i64))
}

/// Grace period for live crawls: the mean absolute pairwise distance between
/// the cited datetimes of the references.
pub fn grace_period_live(refs: &[ReferenceEntry]) -> Result<Duration, TemporalError> {
    let dated: Vec<DateTime<Utc>> = refs.iter().filter_map(|r| r.cited_datetime).collect();
    if dated.len() < 2 {
        return Err(TemporalError::TooFewDatedReferences(dated.len()));
    }
    let mut total: i128 = 0;
    let mut pairs: i128 = 0;
    for i in 0..dated.len() {
        for j in (i + 1)..dated.len() {
            total += (dated[i] - dated[j]).num_milliseconds().unsigned_abs() as i128;
            pairs += 1;
        }
    }
    Ok(Duration::milliseconds((total / pairs) as i64))
}

/// Estimates the temporal relevance threshold over the same seeded reference
/// samples used by the content threshold: per repeat, the temporal scores of
/// the sampled references' cited datetimes are averaged; the threshold is the
/// mean over repeats. Undated references are skipped inside a sample; a repeat
/// whose sample holds no dated reference contributes nothing.
pub fn temporal_threshold(
    refs: &[ReferenceEntry],
    repeats: u32,
    sample_fraction: f64,
    params: &TemporalParams,
    rng_seed: u64,
) -> Result<f64, TemporalError> {
    if repeats == 0 {
        return Err(TemporalError::ZeroRepeats);
    }
    let mut per_repeat = Vec::with_capacity(repeats as usize);
    for repeat in 0..repeats {
        let sampled = sample_indices(rng_seed, repeat, refs.len(), sample_fraction);
        let scores: Vec<f64> = sampled
            .iter()
            .filter_map(|&i| refs[i].cited_datetime)
            .map(|dt| temporal_score(dt, params))
            .collect();
        if !scores.is_empty() {
            per_repeat.push(scores.iter().sum::<f64>() / scores.len() as f64);
        }
    }
    if per_repeat.is_empty() {
        return Err(TemporalError::NoDatedSamples);
    }
    Ok(per_repeat.iter().sum::<f64>() / per_repeat.len() as f64)
}

/// Content, temporal, and weighted aggregate relevance of one resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceScores {
    pub r_cont: f64,
    pub r_temp: f64,
    pub r_aggr: f64,
}

impl RelevanceScores {
    pub fn new(r_cont: f64, r_temp: f64, alpha: f64, beta: f64) -> Self {
        RelevanceScores { r_cont, r_temp, r_aggr: aggregate(r_cont, r_temp, alpha, beta) }
    }
}

/// Weighted aggregate relevance.
pub fn aggregate(r_cont: f64, r_temp: f64, alpha: f64, beta: f64) -> f64 {
    alpha * r_cont + beta * r_temp
}

/// Weighted aggregate threshold; same combination as [`aggregate`].
pub fn aggregate_threshold(th_cont: f64, th_temp: f64, alpha: f64, beta: f64) -> f64 {
    alpha * th_cont + beta * th_temp
}
