//! Design-matrix assembly from lineups plus a clustering output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{combo_features_2, count_features_soft, n_combination_features, pair_labels};
use crate::lineup::adjust_offrtg;
use crate::model::LineupRecord;
use crate::{Error, Result};

/// Player-to-cluster output of either clustering stage.
#[derive(Debug, Clone)]
pub enum ClusterOutput {
    Hard {
        labels: BTreeMap<String, usize>,
        c: usize,
    },
    Soft {
        memberships: BTreeMap<String, Vec<f64>>,
        c: usize,
    },
}

impl ClusterOutput {
    pub fn n_clusters(&self) -> usize {
        match self {
            ClusterOutput::Hard { c, .. } | ClusterOutput::Soft { c, .. } => *c,
        }
    }

    fn membership_row(&self, player: &str) -> Result<Vec<f64>> {
        match self {
            ClusterOutput::Hard { labels, c } => {
                let &label = labels.get(player).ok_or_else(|| {
                    Error::Lineup(format!("player {player} missing from clustering output"))
                })?;
                let mut row = vec![0.0; *c];
                row[label] = 1.0;
                Ok(row)
            }
            ClusterOutput::Soft { memberships, c } => {
                let row = memberships.get(player).ok_or_else(|| {
                    Error::Lineup(format!("player {player} missing from clustering output"))
                })?;
                if row.len() != *c {
                    return Err(Error::Lineup(format!(
                        "membership row for {player} has {} entries, expected {c}",
                        row.len()
                    )));
                }
                Ok(row.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMode {
    /// Per-cluster player counts (5-player analysis).
    Counts5,
    /// Unordered cluster-pair combination counts (2-player analysis).
    Combos2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignRow {
    pub team: String,
    pub season: String,
    pub player_ids: Vec<String>,
    pub team_index: usize,
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub mode: DesignMode,
    pub feature_names: Vec<String>,
    /// Sorted team names; `team_index` fields index into this list.
    pub teams: Vec<String>,
    pub rows: Vec<DesignRow>,
}

impl DesignMatrix {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn xs(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.x.clone()).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.y).collect()
    }

    pub fn team_indices(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.team_index).collect()
    }
}

/// Filter lineups by playing time, attach cluster features, and adjust the
/// response. Row order is deterministic: (team, season, sorted player ids),
/// ties kept in input order.
pub fn build_design(
    lineups: &[LineupRecord],
    clusters: &ClusterOutput,
    mode: DesignMode,
    min_lineup_minutes: f64,
    adjust_horizon_minutes: f64,
) -> Result<DesignMatrix> {
    let c = clusters.n_clusters();
    let feature_names = match mode {
        DesignMode::Counts5 => (0..c).map(|k| format!("count_{k}")).collect(),
        DesignMode::Combos2 => pair_labels(c),
    };

    let mut kept: Vec<&LineupRecord> = lineups
        .iter()
        .filter(|l| l.minutes > min_lineup_minutes)
        .collect();
    kept.sort_by_key(|l| l.sort_key());

    let mut teams: Vec<String> = kept.iter().map(|l| l.team.clone()).collect();
    teams.sort();
    teams.dedup();

    let mut rows = Vec::with_capacity(kept.len());
    for l in kept {
        if l.player_ids.len() != 5 {
            return Err(Error::Lineup(format!(
                "lineup for {} has {} players",
                l.team,
                l.player_ids.len()
            )));
        }
        let memberships: Vec<Vec<f64>> = l
            .player_ids
            .iter()
            .map(|p| clusters.membership_row(p))
            .collect::<Result<_>>()?;
        let x = match mode {
            DesignMode::Counts5 => count_features_soft(&memberships, c)?,
            DesignMode::Combos2 => combo_features_2(&memberships, c)?,
        };
        debug_assert_eq!(
            x.len(),
            match mode {
                DesignMode::Counts5 => c,
                DesignMode::Combos2 => n_combination_features(c),
            }
        );
        let y = adjust_offrtg(l.offrtg, l.minutes, l.team_offrtg, adjust_horizon_minutes)?;
        let team_index = teams.binary_search(&l.team).expect("team collected above");
        rows.push(DesignRow {
            team: l.team.clone(),
            season: l.season.clone(),
            player_ids: l.player_ids.clone(),
            team_index,
            x,
            y,
        });
    }

    Ok(DesignMatrix {
        mode,
        feature_names,
        teams,
        rows,
    })
}
