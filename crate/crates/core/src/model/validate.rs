//! Dataset validation: every invariant violation is reported with a record
//! locator and a stable rule id; a dataset is accepted iff no rule fires.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::types::{LineupRecord, PlaytypeProfile, ShotSegment};

/// Minimum seconds between segment start and shot release.
pub const MIN_SEGMENT_SPAN: f64 = 3.0;
/// Nominal 10 Hz sampling with one dropped/extra frame of slack.
const FRAME_DT_MIN: f64 = 0.05;
const FRAME_DT_MAX: f64 = 0.2;
const PCT_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    /// "segment", "playtype" or "lineup".
    pub record_kind: String,
    /// Index of the offending record within its input list.
    pub index: usize,
    /// Stable rule id, e.g. "lineup.player_count".
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: &str, index: usize, rule: &str, message: String) {
        self.violations.push(Violation {
            record_kind: kind.to_string(),
            index,
            rule: rule.to_string(),
            message,
        });
    }
}

pub fn validate_dataset(
    segments: &[ShotSegment],
    profiles: &[PlaytypeProfile],
    lineups: &[LineupRecord],
) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, s) in segments.iter().enumerate() {
        validate_segment(&mut report, i, s);
    }
    for (i, p) in profiles.iter().enumerate() {
        validate_profile(&mut report, i, p);
    }
    for (i, l) in lineups.iter().enumerate() {
        validate_lineup(&mut report, i, l);
    }
    report
}

fn validate_segment(report: &mut ValidationReport, i: usize, s: &ShotSegment) {
    if s.timestamps.len() != s.shooter_xy.len() || s.timestamps.len() < 2 {
        report.push(
            "segment",
            i,
            "segment.length_mismatch",
            format!(
                "{} timestamps vs {} positions",
                s.timestamps.len(),
                s.shooter_xy.len()
            ),
        );
        return;
    }
    let finite = s.timestamps.iter().all(|t| t.is_finite())
        && s.shooter_xy
            .iter()
            .all(|p| p[0].is_finite() && p[1].is_finite())
        && s.ball_received_time.is_finite()
        && s.rim_xy[0].is_finite()
        && s.rim_xy[1].is_finite();
    if !finite {
        report.push(
            "segment",
            i,
            "segment.nonfinite",
            "non-finite coordinate or timestamp".to_string(),
        );
        return;
    }
    if s.timestamps.windows(2).any(|w| w[1] <= w[0]) {
        report.push(
            "segment",
            i,
            "segment.timestamps_increasing",
            "timestamps not strictly increasing".to_string(),
        );
        return;
    }
    let span = s.span();
    if span < MIN_SEGMENT_SPAN - 1e-9 {
        report.push(
            "segment",
            i,
            "segment.min_span",
            format!("span {span:.3} s < {MIN_SEGMENT_SPAN} s"),
        );
    }
    if s.timestamps
        .windows(2)
        .any(|w| !(FRAME_DT_MIN..=FRAME_DT_MAX).contains(&(w[1] - w[0])))
    {
        report.push(
            "segment",
            i,
            "segment.sample_rate",
            "frame spacing outside 10 Hz +-1 frame tolerance".to_string(),
        );
    }
    let t0 = s.timestamps[0];
    let t_shot = s.shot_time();
    if s.ball_received_time < t0 - 1e-9 || s.ball_received_time > t_shot + 1e-9 {
        report.push(
            "segment",
            i,
            "segment.reception_window",
            format!(
                "ball_received_time {:.3} outside [{t0:.3}, {t_shot:.3}]",
                s.ball_received_time
            ),
        );
    }
}

fn validate_profile(report: &mut ValidationReport, i: usize, p: &PlaytypeProfile) {
    for (j, pct) in p.playtype_pct.iter().enumerate() {
        if let Some(v) = pct {
            if !v.is_finite() || *v < 0.0 || *v > 100.0 {
                report.push(
                    "playtype",
                    i,
                    "playtype.pct_range",
                    format!("playtype {j} percentage {v} outside [0, 100]"),
                );
            }
        }
    }
    for (name, v) in [("ast_pct", p.ast_pct), ("usg_pct", p.usg_pct)] {
        if !v.is_finite() || v < 0.0 || v > 100.0 {
            report.push(
                "playtype",
                i,
                "playtype.stat_range",
                format!("{name} {v} outside [0, 100]"),
            );
        }
    }
    let known = p.known_sum();
    if known > 100.0 + PCT_SUM_TOL {
        report.push(
            "playtype",
            i,
            "playtype.known_sum",
            format!("known percentages sum to {known:.6} > 100"),
        );
    } else if p.n_missing() == 0 && (known - 100.0).abs() > PCT_SUM_TOL {
        report.push(
            "playtype",
            i,
            "playtype.complete_sum",
            format!("complete profile sums to {known:.6}, expected 100"),
        );
    }
}

fn validate_lineup(report: &mut ValidationReport, i: usize, l: &LineupRecord) {
    if l.player_ids.len() != 5 {
        report.push(
            "lineup",
            i,
            "lineup.player_count",
            format!("{} player ids, expected 5", l.player_ids.len()),
        );
    } else {
        let distinct: HashSet<&str> = l.player_ids.iter().map(String::as_str).collect();
        if distinct.len() != 5 {
            report.push(
                "lineup",
                i,
                "lineup.distinct_players",
                "duplicate player id in lineup".to_string(),
            );
        }
    }
    if !(l.minutes > 0.0) {
        report.push(
            "lineup",
            i,
            "lineup.minutes_positive",
            format!("minutes {} not positive", l.minutes),
        );
    }
    if !l.offrtg.is_finite() || !l.team_offrtg.is_finite() {
        report.push(
            "lineup",
            i,
            "lineup.offrtg_finite",
            "offensive rating not finite".to_string(),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn good_segment() -> ShotSegment {
        let timestamps: Vec<f64> = (0..=30).map(|j| 7.0 + 0.1 * j as f64).collect();
        let shooter_xy = timestamps.iter().map(|_| [3.0, 1.0]).collect();
        ShotSegment {
            player_id: "p0".into(),
            timestamps,
            shooter_xy,
            ball_received_time: 8.0,
            rim_xy: [0.0, 0.0],
            made_shot: true,
            is_three: false,
        }
    }

    #[test]
    fn well_formed_records_pass() {
        let seg = good_segment();
        let profile = PlaytypeProfile {
            player_id: "p0".into(),
            season: "2015-16".into(),
            playtype_pct: [
                Some(10.0),
                Some(10.0),
                Some(10.0),
                Some(10.0),
                Some(10.0),
                Some(10.0),
                Some(10.0),
                Some(10.0),
                Some(10.0),
                Some(5.0),
                Some(5.0),
            ],
            ast_pct: 20.0,
            usg_pct: 25.0,
            games_played: 40,
            minutes_per_game: 28.0,
        };
        let lineup = LineupRecord {
            team: "T00".into(),
            season: "2015-16".into(),
            player_ids: vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()],
            minutes: 120.0,
            offrtg: 108.0,
            team_offrtg: 105.0,
        };
        let report = validate_dataset(&[seg], &[profile], &[lineup]);
        assert!(report.is_accepted(), "{:?}", report.violations);
    }

    #[test]
    fn four_player_lineup_flagged() {
        let lineup = LineupRecord {
            team: "T00".into(),
            season: "2015-16".into(),
            player_ids: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            minutes: 120.0,
            offrtg: 108.0,
            team_offrtg: 105.0,
        };
        let report = validate_dataset(&[], &[], &[lineup]);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].rule, "lineup.player_count");
        assert_eq!(report.violations[0].index, 0);
    }

    #[test]
    fn short_segment_flagged() {
        let mut seg = good_segment();
        // 2.0 s span
        seg.timestamps.truncate(21);
        seg.shooter_xy.truncate(21);
        seg.ball_received_time = 7.5;
        let report = validate_dataset(&[seg], &[], &[]);
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "segment.min_span"));
    }

    #[test]
    fn duplicate_player_flagged() {
        let lineup = LineupRecord {
            team: "T00".into(),
            season: "2015-16".into(),
            player_ids: vec!["a".into(), "a".into(), "c".into(), "d".into(), "e".into()],
            minutes: 120.0,
            offrtg: 108.0,
            team_offrtg: 105.0,
        };
        let report = validate_dataset(&[], &[], &[lineup]);
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "lineup.distinct_players"));
    }

    #[test]
    fn overfull_profile_flagged() {
        let mut pct = [None; 11];
        pct[0] = Some(80.0);
        pct[1] = Some(30.0);
        let profile = PlaytypeProfile {
            player_id: "p0".into(),
            season: "2015-16".into(),
            playtype_pct: pct,
            ast_pct: 10.0,
            usg_pct: 10.0,
            games_played: 40,
            minutes_per_game: 20.0,
        };
        let report = validate_dataset(&[], &[profile], &[]);
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "playtype.known_sum"));
    }
}
