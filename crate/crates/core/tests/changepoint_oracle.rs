//! Brute-force oracle for change-point detection: the production detector
//! must agree with exhaustive two-segment SSE minimization (naive two-pass
//! means, no prefix sums) on exact split index for every series, including
//! agreeing on which series have no significant change point.

use eventcrawl_core::changepoint::{detect_change_point_in, ChangePointError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn segment_sse(segment: &[f64]) -> f64 {
    let mean = segment.iter().sum::<f64>() / segment.len() as f64;
    segment.iter().map(|x| (x - mean) * (x - mean)).sum()
}

/// Exhaustive minimizer with the same 1% significance guard; first index wins
/// ties.
fn brute_force(series: &[f64]) -> Option<usize> {
    let n = series.len();
    if n < 2 {
        return None;
    }
    let unsplit = segment_sse(series);
    let mut best_split = 1;
    let mut best_cost = f64::INFINITY;
    for split in 1..n {
        let cost = segment_sse(&series[..split]) + segment_sse(&series[split..]);
        if cost < best_cost {
            best_cost = cost;
            best_split = split;
        }
    }
    if unsplit <= 0.0 || (unsplit - best_cost) / unsplit < 0.01 {
        None
    } else {
        Some(best_split)
    }
}

fn production(series: &[f64]) -> Option<usize> {
    match detect_change_point_in(series) {
        Ok(k) => Some(k),
        Err(ChangePointError::NoSignificantChangePoint) => None,
        Err(e) => panic!("unexpected error: {e}"),
    }
}

/// Edit-count-shaped series: a busy early regime, a quiet tail, integer
/// counts. Roughly one in eight series is constant to exercise the
/// no-change-point path on both routes.
fn random_series(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(2..=500);
    if rng.random_range(0..8) == 0 {
        let level = rng.random_range(0..20) as f64;
        return vec![level; n];
    }
    let split = rng.random_range(1..n);
    let high = rng.random_range(8..40);
    let low = rng.random_range(0..4);
    (0..n)
        .map(|i| {
            let base: u32 = if i < split { high } else { low };
            let noise = rng.random_range(0..4);
            f64::from(base + noise)
        })
        .collect()
}

#[test]
fn detector_matches_brute_force_on_200_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for case in 0..200 {
        let series = random_series(&mut rng);
        let expected = brute_force(&series);
        let got = production(&series);
        assert_eq!(got, expected, "case {case}: series len {}", series.len());
    }
}

#[test]
fn detector_matches_brute_force_on_the_knee_example() {
    // 90 edits in days 0-9, then 10 edits spread over days 10-99
    let mut series = vec![9.0; 10];
    let mut tail = vec![0.0; 90];
    for k in 0..10 {
        tail[k * 9] = 1.0;
    }
    series.extend(tail);
    assert_eq!(brute_force(&series), Some(10));
    assert_eq!(production(&series), Some(10));
}

#[test]
fn shifting_timestamps_shifts_the_change_point_equally() {
    use chrono::{Duration, TimeZone, Utc};
    use eventcrawl_core::changepoint::{
        build_edit_curve, detect_change_point, Revision, RevisionHistory,
    };

    let base = Utc.with_ymd_and_hms(2015, 12, 2, 12, 0, 0).unwrap();
    let build = |offset_days: i64| {
        let mut revisions = Vec::new();
        let mut revid = 1;
        for day in 0..12 {
            for _ in 0..7 {
                revisions
                    .push(Revision { revid, timestamp: base + Duration::days(day + offset_days) });
                revid += 1;
            }
        }
        for day in (12..60).step_by(6) {
            revisions.push(Revision { revid, timestamp: base + Duration::days(day + offset_days) });
            revid += 1;
        }
        RevisionHistory::new("shift", revisions).unwrap()
    };

    let baseline = build(0);
    let curve = build_edit_curve(&baseline).unwrap();
    let day = detect_change_point(&curve).unwrap();
    for offset in [1, 30, 365] {
        let shifted = build(offset);
        let shifted_curve = build_edit_curve(&shifted).unwrap();
        let shifted_day = detect_change_point(&shifted_curve).unwrap();
        assert_eq!(shifted_day, day, "offset {offset}");
        assert_eq!(
            shifted_curve.day_datetime(shifted_day),
            curve.day_datetime(day) + Duration::days(offset),
        );
    }
}

#[test]
fn scaling_counts_by_powers_of_two_keeps_the_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for _ in 0..50 {
        let series = random_series(&mut rng);
        let baseline = production(&series);
        for factor in [0.25, 0.5, 2.0, 8.0] {
            let scaled: Vec<f64> = series.iter().map(|x| x * factor).collect();
            assert_eq!(production(&scaled), baseline, "factor {factor}");
        }
    }
}
