//! Parametric synthetic-data generator.
//!
//! Archetype k shoots around a center on a ring of radius
//! `base_radius + radius_step * k`, approaching the rim at an
//! archetype-specific speed with an archetype-specific hold time, and owns a
//! distinctive playtype simplex. Lineup offensive ratings are drawn from the
//! hierarchical linear likelihood (team intercept + combination features
//! times true effects + Gaussian noise), so the ground truth is an exact
//! recovery target for the inference stage.

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::types::{LineupRecord, PlaytypeProfile, ShotSegment, N_RAW_PLAYTYPES, RIM_XY};
use crate::config::SynthConfig;
use crate::lineup::{combo_features_from_labels, n_combination_features, pair_labels};
use crate::{Error, Result};

const FRAME_DT: f64 = 0.1;
const FRAMES: usize = 31;
const SHOT_TIME: f64 = 10.0;
const THREE_POINT_RADIUS: f64 = 6.75;

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub segments: Vec<ShotSegment>,
    pub profiles: Vec<PlaytypeProfile>,
    pub lineups: Vec<LineupRecord>,
    pub truth: SynthTruth,
}

/// Ground truth emitted alongside the data for oracle tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthTruth {
    /// (player_id, archetype), in player order.
    pub archetype_of: Vec<(String, usize)>,
    /// Unordered-pair labels matching `beta`, lexicographic (k <= k').
    pub pair_labels: Vec<String>,
    /// True pairwise compatibility effects, length C(K+1, 2).
    pub beta: Vec<f64>,
    /// (team, intercept) in team order.
    pub alpha: Vec<(String, f64)>,
    pub noise_sd: f64,
    pub planted_pair: Option<(usize, usize)>,
    /// The generator's own design matrix, row order identical to
    /// `build_design` on the emitted lineups.
    pub design: Vec<TruthRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthRow {
    pub team: String,
    pub season: String,
    pub player_ids: Vec<String>,
    pub team_index: usize,
    pub x: Vec<f64>,
    /// Adjusted offensive rating exactly as the design builder computes it.
    pub y: f64,
}

struct Archetype {
    center: [f64; 2],
    speed: f64,
    hold: f64,
    playtype_weights: [f64; N_RAW_PLAYTYPES],
    ast: f64,
    usg: f64,
}

impl Archetype {
    fn new(k: usize, spec: &SynthConfig) -> Self {
        let n = spec.archetypes as f64;
        let angle = 2.0 * std::f64::consts::PI * k as f64 / n;
        let radius = spec.base_radius + spec.radius_step * k as f64;
        let mut playtype_weights = [1.0; N_RAW_PLAYTYPES];
        playtype_weights[k % N_RAW_PLAYTYPES] += 9.0;
        playtype_weights[(k + 4) % N_RAW_PLAYTYPES] += 6.0;
        Self {
            center: [
                RIM_XY[0] + radius * angle.cos(),
                RIM_XY[1] + radius * angle.sin(),
            ],
            speed: 0.8 + 0.6 * (k % 4) as f64,
            hold: 0.5 + 0.4 * (k % 5) as f64,
            playtype_weights,
            ast: 10.0 + (k as f64 * 7.0) % 30.0,
            usg: 12.0 + (k as f64 * 5.0) % 25.0,
        }
    }
}

/// Deterministic pure function of (spec, seed).
pub fn synthesize_dataset(spec: &SynthConfig, seed: u64) -> Result<SynthDataset> {
    check_spec(spec)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let k_archetypes = spec.archetypes;
    let archetypes: Vec<Archetype> = (0..k_archetypes)
        .map(|k| Archetype::new(k, spec))
        .collect();

    let id_width = spec.players.to_string().len().max(3);
    let player_ids: Vec<String> = (0..spec.players)
        .map(|i| format!("p{i:0id_width$}"))
        .collect();
    let archetype_of: Vec<usize> = (0..spec.players).map(|i| i % k_archetypes).collect();
    let team_names: Vec<String> = (0..spec.teams).map(|t| format!("T{t:02}")).collect();

    let jitter = Normal::new(0.0, spec.location_jitter)
        .map_err(|e| Error::SynthSpec(format!("location_jitter: {e}")))?;
    let small = Normal::new(0.0, 0.1).expect("fixed sd");
    let pct_noise = Normal::new(0.0, 1.5).expect("fixed sd");
    let stat_noise = Normal::new(0.0, 2.0).expect("fixed sd");

    // --- shots ---
    let mut segments = Vec::with_capacity(spec.players * spec.shots_per_player);
    for (i, pid) in player_ids.iter().enumerate() {
        let arch = &archetypes[archetype_of[i]];
        for _ in 0..spec.shots_per_player {
            segments.push(generate_segment(pid, arch, jitter, small, &mut rng));
        }
    }

    // --- playtype profiles ---
    let mut profiles = Vec::with_capacity(spec.players);
    for (i, pid) in player_ids.iter().enumerate() {
        let arch = &archetypes[archetype_of[i]];
        let mut weights = [0.0; N_RAW_PLAYTYPES];
        for (w, base) in weights.iter_mut().zip(&arch.playtype_weights) {
            *w = (base * 8.0 + pct_noise.sample(&mut rng)).max(0.0);
        }
        let total: f64 = weights.iter().sum();
        let mut playtype_pct = [None; N_RAW_PLAYTYPES];
        for (slot, w) in playtype_pct.iter_mut().zip(&weights) {
            *slot = Some(100.0 * w / total);
        }
        profiles.push(PlaytypeProfile {
            player_id: pid.clone(),
            season: spec.season.clone(),
            playtype_pct,
            ast_pct: (arch.ast + stat_noise.sample(&mut rng)).clamp(0.0, 100.0),
            usg_pct: (arch.usg + stat_noise.sample(&mut rng)).clamp(0.0, 100.0),
            games_played: 30 + (rng.gen::<u32>() % 50),
            minutes_per_game: 12.0 + 24.0 * rng.gen::<f64>(),
        });
    }

    // --- true effects ---
    let n_features = n_combination_features(k_archetypes);
    let effect_noise = Normal::new(0.0, spec.effect_sd)
        .map_err(|e| Error::SynthSpec(format!("effect_sd: {e}")))?;
    let mut beta: Vec<f64> = (0..n_features).map(|_| effect_noise.sample(&mut rng)).collect();
    if let Some((a, b)) = spec.planted_pair {
        let idx = pair_index(a.min(b), a.max(b), k_archetypes).ok_or_else(|| {
            Error::SynthSpec(format!(
                "planted_pair ({a}, {b}) out of range for {k_archetypes} archetypes"
            ))
        })?;
        beta[idx] = spec.planted_effect;
    }
    let alpha_noise = Normal::new(0.0, spec.alpha_sd)
        .map_err(|e| Error::SynthSpec(format!("alpha_sd: {e}")))?;
    let alpha: Vec<f64> = (0..spec.teams)
        .map(|_| spec.alpha_base + alpha_noise.sample(&mut rng))
        .collect();

    // --- lineups ---
    // deal shuffled players round-robin so every roster mixes archetypes;
    // blocked assignment (i mod teams) would confound team with archetype
    // whenever the archetype count divides the team count
    let mut deal: Vec<usize> = (0..spec.players).collect();
    deal.shuffle(&mut rng);
    let mut rosters: Vec<Vec<usize>> = vec![Vec::new(); spec.teams];
    for (slot, &player) in deal.iter().enumerate() {
        rosters[slot % spec.teams].push(player);
    }
    for roster in rosters.iter_mut() {
        roster.sort_unstable();
    }
    let minutes_dist = Uniform::new(spec.minutes_min, spec.minutes_max);
    let y_noise = Normal::new(0.0, spec.noise_sd)
        .map_err(|e| Error::SynthSpec(format!("noise_sd: {e}")))?;

    let mut lineups = Vec::with_capacity(spec.teams * spec.lineups_per_team);
    let mut design = Vec::with_capacity(lineups.capacity());
    for (t, roster) in rosters.iter().enumerate() {
        for _ in 0..spec.lineups_per_team {
            let picks = rand::seq::index::sample(&mut rng, roster.len(), 5);
            let members: Vec<usize> = picks.iter().map(|j| roster[j]).collect();
            let labels: Vec<usize> = members.iter().map(|&i| archetype_of[i]).collect();
            let x = combo_features_from_labels(&labels, k_archetypes);
            let minutes = minutes_dist.sample(&mut rng);
            let xb: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let y_adjusted = alpha[t] + xb + y_noise.sample(&mut rng);
            let w = (minutes / spec.adjust_horizon_minutes()).min(1.0);
            let offrtg = (y_adjusted - (1.0 - w) * alpha[t]) / w;
            let ids: Vec<String> = members.iter().map(|&i| player_ids[i].clone()).collect();
            lineups.push(LineupRecord {
                team: team_names[t].clone(),
                season: spec.season.clone(),
                player_ids: ids.clone(),
                minutes,
                offrtg,
                team_offrtg: alpha[t],
            });
            design.push(TruthRow {
                team: team_names[t].clone(),
                season: spec.season.clone(),
                player_ids: ids,
                team_index: t,
                x,
                y: y_adjusted,
            });
        }
    }
    design.sort_by(|a, b| truth_sort_key(a).cmp(&truth_sort_key(b)));

    let truth = SynthTruth {
        archetype_of: player_ids
            .iter()
            .cloned()
            .zip(archetype_of.iter().copied())
            .collect(),
        pair_labels: pair_labels(k_archetypes),
        beta,
        alpha: team_names.iter().cloned().zip(alpha.iter().copied()).collect(),
        noise_sd: spec.noise_sd,
        planted_pair: spec.planted_pair.map(|(a, b)| (a.min(b), a.max(b))),
        design,
    };

    Ok(SynthDataset {
        segments,
        profiles,
        lineups,
        truth,
    })
}

impl SynthConfig {
    /// The generator inverts the minutes adjustment with the same 300-minute
    /// horizon the design builder applies.
    pub fn adjust_horizon_minutes(&self) -> f64 {
        300.0
    }
}

fn truth_sort_key(row: &TruthRow) -> (String, String, String) {
    let mut ids = row.player_ids.clone();
    ids.sort();
    (row.team.clone(), row.season.clone(), ids.join("|"))
}

fn generate_segment(
    player_id: &str,
    arch: &Archetype,
    jitter: Normal<f64>,
    small: Normal<f64>,
    rng: &mut ChaCha20Rng,
) -> ShotSegment {
    let mut shot = [
        arch.center[0] + jitter.sample(rng),
        arch.center[1] + jitter.sample(rng),
    ];
    // keep the shot point off the rim so the approach direction is defined
    let r = (shot[0].powi(2) + shot[1].powi(2)).sqrt();
    if r < 0.5 {
        let scale = 0.5 / r.max(1e-9);
        shot = [shot[0] * scale, shot[1] * scale];
    }
    let r = (shot[0].powi(2) + shot[1].powi(2)).sqrt();
    let outward = [shot[0] / r, shot[1] / r];
    let speed = (arch.speed + small.sample(rng)).max(0.05);
    let hold = (arch.hold + small.sample(rng)).clamp(0.2, 2.8);
    let hold_frames = (hold / FRAME_DT).round() as usize;

    let timestamps: Vec<f64> = (0..FRAMES)
        .map(|j| SHOT_TIME - 3.0 + FRAME_DT * j as f64)
        .collect();
    let shooter_xy: Vec<[f64; 2]> = timestamps
        .iter()
        .map(|&t| {
            let lag = SHOT_TIME - t;
            [shot[0] + speed * lag * outward[0], shot[1] + speed * lag * outward[1]]
        })
        .collect();
    let ball_received_time = timestamps[FRAMES - 1 - hold_frames];

    ShotSegment {
        player_id: player_id.to_string(),
        timestamps,
        shooter_xy,
        ball_received_time,
        rim_xy: RIM_XY,
        made_shot: rng.gen::<f64>() < 0.45,
        is_three: r >= THREE_POINT_RADIUS,
    }
}

fn check_spec(spec: &SynthConfig) -> Result<()> {
    if spec.archetypes < 2 {
        return Err(Error::SynthSpec(format!(
            "need at least 2 archetypes, got {}",
            spec.archetypes
        )));
    }
    if spec.teams == 0 || spec.players / spec.teams < 5 {
        return Err(Error::SynthSpec(format!(
            "each of the {} teams needs a roster of at least 5 of the {} players",
            spec.teams, spec.players
        )));
    }
    if spec.shots_per_player == 0 {
        return Err(Error::SynthSpec("shots_per_player must be positive".into()));
    }
    if !(spec.minutes_min > 0.0 && spec.minutes_max > spec.minutes_min) {
        return Err(Error::SynthSpec(format!(
            "bad minutes range [{}, {}]",
            spec.minutes_min, spec.minutes_max
        )));
    }
    Ok(())
}

fn pair_index(a: usize, b: usize, c: usize) -> Option<usize> {
    if b >= c {
        return None;
    }
    // lexicographic position of (a, b), a <= b, among all unordered pairs
    let mut idx = 0;
    for k in 0..c {
        for k2 in k..c {
            if (k, k2) == (a, b) {
                return Some(idx);
            }
            idx += 1;
        }
    }
    None
}
