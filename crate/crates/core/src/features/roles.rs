//! Playtype role features: eligibility filtering, equal-share imputation of
//! missing playtype percentages, and the Off-screen + Hand-off merge.

use crate::model::{PlaytypeProfile, N_MERGED_PLAYTYPES, N_RAW_PLAYTYPES};
use crate::{Error, Result};

/// Column names of the 12-dimensional role feature vector.
pub const ROLE_FEATURE_NAMES: [&str; 12] = [
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
    "ast_pct",
    "usg_pct",
];

/// Raw-playtype index feeding each merged component; Off-screen (3) also
/// absorbs Hand-off (6).
const MERGE_SOURCE: [usize; N_MERGED_PLAYTYPES] = [0, 1, 2, 3, 4, 5, 7, 8, 9, 10];
const HAND_OFF: usize = 6;
const OFF_SCREEN_MERGED: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct RoleFeatureVector {
    /// Ten merged playtype percentages summing to 100.
    pub playtype_pct: [f64; N_MERGED_PLAYTYPES],
    pub ast_pct: f64,
    pub usg_pct: f64,
}

impl RoleFeatureVector {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.playtype_pct.to_vec();
        v.push(self.ast_pct);
        v.push(self.usg_pct);
        v
    }
}

/// Build role features for every eligible profile.
///
/// A profile is dropped when more than `max_missing_fraction` of its raw
/// playtypes are missing or it has fewer than `min_games` games. For kept
/// profiles the residual to 100 is split equally among the missing
/// playtypes; known percentages are never changed.
pub fn build_role_features(
    profiles: &[PlaytypeProfile],
    min_games: u32,
    max_missing_fraction: f64,
) -> Result<Vec<(String, RoleFeatureVector)>> {
    let mut out = Vec::with_capacity(profiles.len());
    for profile in profiles {
        if profile.games_played < min_games {
            continue;
        }
        let n_missing = profile.n_missing();
        if n_missing as f64 / N_RAW_PLAYTYPES as f64 > max_missing_fraction {
            continue;
        }
        let known = profile.known_sum();
        let residual = 100.0 - known;
        if residual < -1e-6 {
            return Err(Error::Data(format!(
                "profile {}: known playtype percentages sum to {known:.6} > 100",
                profile.player_id
            )));
        }
        if n_missing == 0 && residual.abs() > 1e-6 {
            return Err(Error::Data(format!(
                "profile {}: complete playtype percentages sum to {known:.6}, expected 100",
                profile.player_id
            )));
        }
        let fill = if n_missing > 0 {
            (residual.max(0.0)) / n_missing as f64
        } else {
            0.0
        };
        let mut raw = [0.0; N_RAW_PLAYTYPES];
        for (slot, pct) in raw.iter_mut().zip(&profile.playtype_pct) {
            *slot = pct.unwrap_or(fill);
        }
        let mut playtype_pct = [0.0; N_MERGED_PLAYTYPES];
        for (k, &src) in MERGE_SOURCE.iter().enumerate() {
            playtype_pct[k] = raw[src];
        }
        playtype_pct[OFF_SCREEN_MERGED] += raw[HAND_OFF];

        out.push((
            profile.player_id.clone(),
            RoleFeatureVector {
                playtype_pct,
                ast_pct: profile.ast_pct,
                usg_pct: profile.usg_pct,
            },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MERGED_PLAYTYPES;

    fn profile(pct: [Option<f64>; 11], games: u32) -> PlaytypeProfile {
        PlaytypeProfile {
            player_id: "p0".into(),
            season: "2015-16".into(),
            playtype_pct: pct,
            ast_pct: 18.0,
            usg_pct: 21.0,
            games_played: games,
            minutes_per_game: 25.0,
        }
    }

    #[test]
    fn complete_profile_passes_through_merge_aside() {
        let mut pct = [Some(9.0); 11];
        pct[9] = Some(5.0);
        pct[10] = Some(14.0);
        let out = build_role_features(&[profile(pct, 40)], 20, 0.5).unwrap();
        assert_eq!(out.len(), 1);
        let v = &out[0].1;
        // off_screen (9.0) + hand_off (9.0)
        assert_eq!(v.playtype_pct[OFF_SCREEN_MERGED], 18.0);
        let sum: f64 = v.playtype_pct.iter().sum();
        assert!((sum - 100.0).abs() < 1e-6);
        assert_eq!(v.ast_pct, 18.0);
        assert_eq!(v.usg_pct, 21.0);
        assert_eq!(MERGED_PLAYTYPES[OFF_SCREEN_MERGED], "off_screen_hand_off");
    }

    #[test]
    fn residual_split_equally_over_missing() {
        // 9 known summing to 90, 2 missing -> each missing gets 5.0
        let mut pct = [Some(10.0); 11];
        pct[4] = None;
        pct[8] = None;
        let out = build_role_features(&[profile(pct, 40)], 20, 0.5).unwrap();
        let v = &out[0].1;
        // spot_up is merged component 4, putback component 7
        assert_eq!(v.playtype_pct[4], 5.0);
        assert_eq!(v.playtype_pct[7], 5.0);
        let sum: f64 = v.playtype_pct.iter().sum();
        assert!((sum - 100.0).abs() < 1e-6);
        // known percentages never change
        assert_eq!(v.playtype_pct[0], 10.0);
    }

    #[test]
    fn mostly_missing_profile_dropped() {
        let mut pct = [Some(20.0); 11];
        for slot in pct.iter_mut().take(6) {
            *slot = None;
        }
        // 6 of 11 missing > 50%
        let out = build_role_features(&[profile(pct, 40)], 20, 0.5).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn few_games_profile_dropped() {
        let pct = [Some(100.0 / 11.0); 11];
        let out = build_role_features(&[profile(pct, 19)], 20, 0.5).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn complete_profile_not_summing_to_hundred_is_error() {
        let pct = [Some(5.0); 11]; // sums to 55 with nothing to impute
        assert!(build_role_features(&[profile(pct, 40)], 20, 0.5).is_err());
    }

    #[test]
    fn overfull_known_sum_is_error() {
        // only two missing (eligible), but the known sum exceeds 100
        let mut pct = [Some(13.0); 11];
        pct[9] = None;
        pct[10] = None;
        assert!(build_role_features(&[profile(pct, 40)], 20, 0.5).is_err());
    }
}
