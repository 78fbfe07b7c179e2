//! Library-level pipeline integration on synthetic data.

use std::collections::BTreeMap;

use playstyle::clustering::{cut_dendrogram, ward_linkage};
use playstyle::config::SynthConfig;
use playstyle::features::{feature_matrix, fit_standardize_pca, pca_transform};
use playstyle::inference::leave_one_team_out;
use playstyle::lineup::{build_design, ClusterOutput, DesignMode};
use playstyle::model::{synthesize_dataset, validate_dataset};
use playstyle::transport::{pairwise_distance_matrix, EmpiricalDistribution};

fn player_distributions(
    segments: &[playstyle::model::ShotSegment],
    variance_target: f64,
) -> Vec<(String, EmpiricalDistribution)> {
    let (ids, rows) = feature_matrix(segments).unwrap();
    let model = fit_standardize_pca(&rows, variance_target).unwrap();
    let scores = pca_transform(&model, &rows).unwrap();
    let mut per_player: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for (id, score) in ids.iter().zip(scores) {
        per_player.entry(id.clone()).or_default().push(score);
    }
    per_player
        .into_iter()
        .map(|(id, pts)| (id, EmpiricalDistribution::uniform(pts).unwrap()))
        .collect()
}

#[test]
fn synthetic_dataset_validates_and_design_matches_generator_truth() {
    let spec = SynthConfig {
        archetypes: 3,
        players: 30,
        shots_per_player: 10,
        teams: 3,
        lineups_per_team: 15,
        ..SynthConfig::default()
    };
    let data = synthesize_dataset(&spec, 42).unwrap();
    let report = validate_dataset(&data.segments, &data.profiles, &data.lineups);
    assert!(report.is_accepted(), "{:?}", report.violations);

    // the generator's own design must match build_design on true labels
    let labels: BTreeMap<String, usize> = data
        .truth
        .archetype_of
        .iter()
        .map(|(id, k)| (id.clone(), *k))
        .collect();
    let clusters = ClusterOutput::Hard { labels, c: 3 };
    let design =
        build_design(&data.lineups, &clusters, DesignMode::Combos2, 50.0, 300.0).unwrap();
    assert_eq!(design.rows.len(), data.truth.design.len());
    for (built, truth) in design.rows.iter().zip(&data.truth.design) {
        assert_eq!(built.team, truth.team);
        assert_eq!(built.team_index, truth.team_index);
        for (a, b) in built.x.iter().zip(&truth.x) {
            assert!((a - b).abs() < 1e-9, "x: {a} vs {b}");
        }
        assert!((built.y - truth.y).abs() < 1e-9, "y: {} vs {}", built.y, truth.y);
    }
}

#[test]
fn disjoint_archetype_supports_separate_in_emd() {
    // two archetypes with far-apart shot rings: every cross-archetype EMD
    // exceeds the within-archetype median
    let spec = SynthConfig {
        archetypes: 2,
        players: 12,
        shots_per_player: 12,
        teams: 2,
        lineups_per_team: 4,
        base_radius: 2.0,
        radius_step: 8.0,
        location_jitter: 0.3,
        ..SynthConfig::default()
    };
    let data = synthesize_dataset(&spec, 5).unwrap();
    let players = player_distributions(&data.segments, 0.99);
    let dm = pairwise_distance_matrix(&players, 1.0).unwrap();

    let archetype: BTreeMap<&str, usize> = data
        .truth
        .archetype_of
        .iter()
        .map(|(id, k)| (id.as_str(), *k))
        .collect();
    let mut within = Vec::new();
    let mut cross = Vec::new();
    for i in 0..dm.len() {
        for j in (i + 1)..dm.len() {
            let same = archetype[dm.labels[i].as_str()] == archetype[dm.labels[j].as_str()];
            if same {
                within.push(dm.get(i, j));
            } else {
                cross.push(dm.get(i, j));
            }
        }
    }
    within.sort_by(f64::total_cmp);
    let within_median = within[within.len() / 2];
    let min_cross = cross.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    assert!(
        min_cross > within_median,
        "min cross {min_cross} <= within median {within_median}"
    );
}

#[test]
fn ten_player_distance_matrix_matches_lp_oracle() {
    let spec = SynthConfig {
        archetypes: 2,
        players: 10,
        shots_per_player: 5,
        teams: 2,
        lineups_per_team: 2,
        ..SynthConfig::default()
    };
    let data = synthesize_dataset(&spec, 9).unwrap();
    let players = player_distributions(&data.segments, 0.99);
    assert_eq!(players.len(), 10);
    let dm = pairwise_distance_matrix(&players, 1.0).unwrap();
    for i in 0..10 {
        for j in (i + 1)..10 {
            let reference = playstyle_testkit::emd_lp_oracle(
                &players[i].1.points,
                &players[j].1.points,
                &players[i].1.mass,
                &players[j].1.mass,
                1.0,
            );
            assert!(
                (dm.get(i, j) - reference).abs() < 1e-6,
                "pair ({i}, {j}): {} vs oracle {reference}",
                dm.get(i, j)
            );
        }
    }
}

#[test]
fn two_far_archetypes_cluster_exactly_and_baseline_runs() {
    let spec = SynthConfig {
        archetypes: 2,
        players: 20,
        shots_per_player: 15,
        teams: 4,
        lineups_per_team: 20,
        radius_step: 8.0,
        ..SynthConfig::default()
    };
    let data = synthesize_dataset(&spec, 6).unwrap();
    let players = player_distributions(&data.segments, 0.99);
    let dm = pairwise_distance_matrix(&players, 1.0).unwrap();
    let dendrogram = ward_linkage(&dm).unwrap();
    let cut = cut_dendrogram(&dendrogram, 2).unwrap();

    let archetype: BTreeMap<&str, usize> = data
        .truth
        .archetype_of
        .iter()
        .map(|(id, k)| (id.as_str(), *k))
        .collect();
    // clusters must be pure (up to label swap)
    let mut mapping: BTreeMap<usize, usize> = BTreeMap::new();
    for (label, id) in cut.labels.iter().zip(&dm.labels) {
        let truth = archetype[id.as_str()];
        match mapping.get(label) {
            None => {
                mapping.insert(*label, truth);
            }
            Some(&expected) => assert_eq!(expected, truth, "impure cluster"),
        }
    }

    // counts5 baseline protocol runs end to end on the same data
    let labels: BTreeMap<String, usize> = dm
        .labels
        .iter()
        .cloned()
        .zip(cut.labels.iter().copied())
        .collect();
    let clusters = ClusterOutput::Hard { labels, c: 2 };
    let design =
        build_design(&data.lineups, &clusters, DesignMode::Counts5, 50.0, 300.0).unwrap();
    let metrics = leave_one_team_out(&design.xs(), &design.ys(), &design.team_indices()).unwrap();
    assert_eq!(metrics.folds.len(), 4);
    assert!(metrics.rmse.is_finite() && metrics.rmse > 0.0);
    assert!(metrics.nll.is_finite());
}
