//! The 17 hand-crafted shot features.

use crate::model::ShotSegment;
use crate::{Error, Result};

/// Column names, in canonical order.
pub const SHOT_FEATURE_NAMES: [&str; 17] = [
    "x_shot",
    "y_shot",
    "x_1s_before",
    "y_1s_before",
    "x_reception",
    "y_reception",
    "rim_dist_0s",
    "rim_dist_05s",
    "rim_dist_10s",
    "rim_dist_15s",
    "rim_dist_20s",
    "rim_dist_25s",
    "rim_dist_30s",
    "rim_dist_reception",
    "travel_dist",
    "speed_shot",
    "hold_time",
];

const RIM_LAGS: [f64; 7] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

/// One shot, described by position, rim-distance, movement, and timing
/// features. All distances are meters, speed m/s, times seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotFeatureVector {
    pub shooter_xy_at_shot: [f64; 2],
    pub shooter_xy_1s_before: [f64; 2],
    pub xy_at_reception: [f64; 2],
    /// Rim distance at 0, 0.5, 1.0, 1.5, 2.0, 2.5 and 3.0 s before release.
    pub rim_distance_at: [f64; 7],
    pub rim_distance_at_reception: f64,
    pub distance_traveled_with_ball: f64,
    pub speed_at_shot: f64,
    pub ball_hold_time: f64,
}

impl ShotFeatureVector {
    pub fn to_array(&self) -> [f64; 17] {
        let mut out = [0.0; 17];
        out[0] = self.shooter_xy_at_shot[0];
        out[1] = self.shooter_xy_at_shot[1];
        out[2] = self.shooter_xy_1s_before[0];
        out[3] = self.shooter_xy_1s_before[1];
        out[4] = self.xy_at_reception[0];
        out[5] = self.xy_at_reception[1];
        out[6..13].copy_from_slice(&self.rim_distance_at);
        out[13] = self.rim_distance_at_reception;
        out[14] = self.distance_traveled_with_ball;
        out[15] = self.speed_at_shot;
        out[16] = self.ball_hold_time;
        out
    }
}

/// Extract the 17 features from one segment. Lag positions are linearly
/// interpolated between adjacent frames; the path length while holding the
/// ball is integrated from the reception time to the release.
pub fn extract_shot_features(segment: &ShotSegment) -> Result<ShotFeatureVector> {
    let n = segment.timestamps.len();
    if n < 3 || segment.shooter_xy.len() != n {
        return Err(extraction_error(segment, "segment has fewer than 3 frames"));
    }
    let t_shot = segment.timestamps[n - 1];
    let rim = segment.rim_xy;

    let mut rim_distance_at = [0.0; 7];
    for (slot, &lag) in rim_distance_at.iter_mut().zip(&RIM_LAGS) {
        let p = position_at(segment, t_shot - lag)
            .ok_or_else(|| extraction_error(segment, &format!("no coverage at lag {lag} s")))?;
        *slot = euclid(p, rim);
    }

    let shooter_xy_at_shot = segment.shooter_xy[n - 1];
    let shooter_xy_1s_before = position_at(segment, t_shot - 1.0)
        .ok_or_else(|| extraction_error(segment, "no coverage at lag 1.0 s"))?;
    let xy_at_reception = position_at(segment, segment.ball_received_time)
        .ok_or_else(|| extraction_error(segment, "reception time outside segment"))?;

    let ball_hold_time = t_shot - segment.ball_received_time;
    if ball_hold_time < -1e-9 {
        return Err(extraction_error(segment, "reception after shot release"));
    }

    // path length from reception to release: partial first hop, then frames
    let mut traveled = 0.0;
    let mut prev = xy_at_reception;
    for (t, xy) in segment.timestamps.iter().zip(&segment.shooter_xy) {
        if *t > segment.ball_received_time {
            traveled += euclid(prev, *xy);
            prev = *xy;
        }
    }

    // centered difference straddling the penultimate frame; a post-shot
    // sample does not exist, so this is the release-speed estimate
    let dt = segment.timestamps[n - 1] - segment.timestamps[n - 3];
    let speed_at_shot = euclid(segment.shooter_xy[n - 1], segment.shooter_xy[n - 3]) / dt;

    Ok(ShotFeatureVector {
        shooter_xy_at_shot,
        shooter_xy_1s_before,
        xy_at_reception,
        rim_distance_at,
        rim_distance_at_reception: euclid(xy_at_reception, rim),
        distance_traveled_with_ball: traveled,
        speed_at_shot,
        ball_hold_time: ball_hold_time.max(0.0),
    })
}

/// Feature rows for a whole corpus, keyed by player id.
pub fn feature_matrix(segments: &[ShotSegment]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut ids = Vec::with_capacity(segments.len());
    let mut rows = Vec::with_capacity(segments.len());
    for seg in segments {
        let features = extract_shot_features(seg)?;
        ids.push(seg.player_id.clone());
        rows.push(features.to_array().to_vec());
    }
    Ok((ids, rows))
}

fn position_at(segment: &ShotSegment, t: f64) -> Option<[f64; 2]> {
    let ts = &segment.timestamps;
    let n = ts.len();
    if t < ts[0] - 1e-9 || t > ts[n - 1] + 1e-9 {
        return None;
    }
    let t = t.clamp(ts[0], ts[n - 1]);
    let hi = ts.partition_point(|&v| v < t).min(n - 1);
    if ts[hi] == t {
        return Some(segment.shooter_xy[hi]);
    }
    let lo = hi - 1;
    let w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    let a = segment.shooter_xy[lo];
    let b = segment.shooter_xy[hi];
    Some([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])])
}

fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn extraction_error(segment: &ShotSegment, message: &str) -> Error {
    Error::FeatureExtraction {
        player_id: segment.player_id.clone(),
        message: message.to_string(),
    }
}
