//! Domain record types shared by every pipeline stage.

use serde::{Deserialize, Serialize};

/// Rim position used for every dataset. Offensive directions are unified, so
/// a single fixed court end suffices; all coordinates are meters relative to
/// the rim.
pub const RIM_XY: [f64; 2] = [0.0, 0.0];

/// The eleven annotated playtypes, in canonical column order.
pub const RAW_PLAYTYPES: [&str; 11] = [
    "pnr_ball_handler",
    "pnr_roll_man",
    "transition",
    "off_screen",
    "spot_up",
    "isolation",
    "hand_off",
    "cut",
    "putback",
    "post_up",
    "misc",
];

pub const N_RAW_PLAYTYPES: usize = 11;

/// Playtype keys after the Off-screen + Hand-off merge, in canonical order.
pub const MERGED_PLAYTYPES: [&str; 10] = [
    "pnr_ball_handler",
    "pnr_roll_man",
    "transition",
    "off_screen_hand_off",
    "spot_up",
    "isolation",
    "cut",
    "putback",
    "post_up",
    "misc",
];

pub const N_MERGED_PLAYTYPES: usize = 10;

/// One attack segment ending in a shot: a 10 Hz trajectory of the shooter
/// covering at least the 3 seconds before the release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSegment {
    pub player_id: String,
    /// Seconds, strictly increasing; the final entry is the shot release.
    pub timestamps: Vec<f64>,
    /// Shooter position in meters, one entry per timestamp.
    pub shooter_xy: Vec<[f64; 2]>,
    /// Second at which the shooter received the ball (within the window).
    pub ball_received_time: f64,
    pub rim_xy: [f64; 2],
    pub made_shot: bool,
    pub is_three: bool,
}

impl ShotSegment {
    pub fn shot_time(&self) -> f64 {
        *self.timestamps.last().unwrap_or(&f64::NAN)
    }

    pub fn span(&self) -> f64 {
        match (self.timestamps.first(), self.timestamps.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Per player-season playtype usage plus the two advanced stats.
///
/// Percentages are kept in the raw 11-playtype form; `None` marks a playtype
/// whose share was not recorded. The Off-screen + Hand-off merge happens when
/// role features are built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaytypeProfile {
    pub player_id: String,
    pub season: String,
    pub playtype_pct: [Option<f64>; N_RAW_PLAYTYPES],
    pub ast_pct: f64,
    pub usg_pct: f64,
    pub games_played: u32,
    pub minutes_per_game: f64,
}

impl PlaytypeProfile {
    pub fn n_missing(&self) -> usize {
        self.playtype_pct.iter().filter(|p| p.is_none()).count()
    }

    pub fn known_sum(&self) -> f64 {
        self.playtype_pct.iter().flatten().sum()
    }
}

/// A five-player lineup observation for one team-season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineupRecord {
    pub team: String,
    pub season: String,
    /// Exactly 5 distinct ids when valid; kept as a Vec so malformed input
    /// can be represented and reported by validation.
    pub player_ids: Vec<String>,
    pub minutes: f64,
    /// Lineup offensive rating, points per 100 possessions.
    pub offrtg: f64,
    /// Offensive rating of the whole team, used by the minutes adjustment.
    pub team_offrtg: f64,
}

impl LineupRecord {
    /// Deterministic sort key: (team, season, sorted player ids).
    pub fn sort_key(&self) -> (String, String, String) {
        let mut ids = self.player_ids.clone();
        ids.sort();
        (self.team.clone(), self.season.clone(), ids.join("|"))
    }
}
