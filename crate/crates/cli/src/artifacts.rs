//! Readers and writers for the stage artifacts. All floats are emitted in
//! shortest round-trip form, so identical runs produce identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use playstyle::clustering::{Dendrogram, HardAssignment, MembershipMatrix};
use playstyle::features::{PcaModel, RoleFeatureVector, SHOT_FEATURE_NAMES};
use playstyle::inference::{BaselineFold, PosteriorSamples, RhatReport};
use playstyle::lineup::{ClusterOutput, DesignMatrix};
use serde::{Deserialize, Serialize};

use crate::AppError;

pub fn fmt(v: f64) -> String {
    format!("{v}")
}

fn open_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, AppError> {
    csv::Writer::from_path(path)
        .map_err(|e| AppError::input(format!("writing {}: {e}", path.display())))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<(), AppError> {
    w.flush()
        .map_err(|e| AppError::input(format!("writing {}: {e}", path.display())))
}

fn write_record<W: std::io::Write, I, S>(
    w: &mut csv::Writer<W>,
    path: &Path,
    record: I,
) -> Result<(), AppError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(record)
        .map_err(|e| AppError::input(format!("writing {}: {e}", path.display())))
}

// --- shot features ---

pub fn write_features_csv(
    path: &Path,
    ids: &[String],
    rows: &[Vec<f64>],
) -> Result<(), AppError> {
    let mut w = open_writer(path)?;
    let mut header = vec!["player_id".to_string()];
    header.extend(SHOT_FEATURE_NAMES.iter().map(|s| s.to_string()));
    write_record(&mut w, path, &header)?;
    for (id, row) in ids.iter().zip(rows) {
        let mut record = vec![id.clone()];
        record.extend(row.iter().map(|&v| fmt(v)));
        write_record(&mut w, path, &record)?;
    }
    finish(w, path)
}

pub fn write_pca_model(path: &Path, model: &PcaModel) -> Result<(), AppError> {
    let json = serde_json::to_string_pretty(model)
        .map_err(|e| AppError::input(format!("serializing PCA model: {e}")))?;
    std::fs::write(path, json)
        .map_err(|e| AppError::input(format!("writing {}: {e}", path.display())))
}

// --- role features ---

pub fn write_role_features_csv(
    path: &Path,
    roles: &[(String, RoleFeatureVector)],
) -> Result<(), AppError> {
    let mut w = open_writer(path)?;
    let mut header = vec!["player_id".to_string()];
    header.extend(
        playstyle::features::ROLE_FEATURE_NAMES
            .iter()
            .map(|s| s.to_string()),
    );
    write_record(&mut w, path, &header)?;
    for (id, role) in roles {
        let mut record = vec![id.clone()];
        record.extend(role.to_vec().iter().map(|&v| fmt(v)));
        write_record(&mut w, path, &record)?;
    }
    finish(w, path)
}

// --- clustering outputs ---

pub fn write_dendrogram(path: &Path, dendrogram: &Dendrogram) -> Result<(), AppError> {
    let json = serde_json::to_string_pretty(dendrogram)
        .map_err(|e| AppError::input(format!("serializing dendrogram: {e}")))?;
    std::fs::write(path, json)
        .map_err(|e| AppError::input(format!("writing {}: {e}", path.display())))
}

pub fn write_assignments_csv(
    path: &Path,
    labels: &[String],
    assignment: &HardAssignment,
) -> Result<(), AppError> {
    let mut w = open_writer(path)?;
    write_record(&mut w, path, ["player_id", "cluster"])?;
    for (id, &cluster) in labels.iter().zip(&assignment.labels) {
        write_record(&mut w, path, [id.as_str(), &cluster.to_string()])?;
    }
    finish(w, path)
}

pub fn read_assignments_csv(path: &Path) -> Result<(BTreeMap<String, usize>, usize), AppError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| AppError::input(format!("reading {}: {e}", path.display())))?;
    let mut labels = BTreeMap::new();
    let mut c = 0;
    for record in r.records() {
        let record = record.map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
        let cluster: usize = record[1]
            .parse()
            .map_err(|_| AppError::input(format!("{}: bad cluster '{}'", path.display(), &record[1])))?;
        c = c.max(cluster + 1);
        labels.insert(record[0].to_string(), cluster);
    }
    Ok((labels, c))
}

pub fn write_memberships_csv(
    path: &Path,
    labels: &[String],
    memberships: &MembershipMatrix,
) -> Result<(), AppError> {
    let c = memberships.n_clusters();
    let mut w = open_writer(path)?;
    let mut header = vec!["player_id".to_string()];
    header.extend((0..c).map(|k| format!("m{k}")));
    header.push("argmax".to_string());
    write_record(&mut w, path, &header)?;
    let argmax = memberships.argmax_labels();
    for ((id, row), top) in labels.iter().zip(&memberships.u).zip(&argmax) {
        let mut record = vec![id.clone()];
        record.extend(row.iter().map(|&v| fmt(v)));
        record.push(top.to_string());
        write_record(&mut w, path, &record)?;
    }
    finish(w, path)
}

pub fn read_memberships_csv(
    path: &Path,
) -> Result<(BTreeMap<String, Vec<f64>>, usize), AppError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| AppError::input(format!("reading {}: {e}", path.display())))?;
    let headers = r
        .headers()
        .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?
        .clone();
    let c = headers.len().saturating_sub(2); // player_id + argmax
    let mut memberships = BTreeMap::new();
    for record in r.records() {
        let record = record.map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
        let row: Vec<f64> = (1..=c)
            .map(|i| {
                record[i].parse().map_err(|_| {
                    AppError::input(format!("{}: bad membership '{}'", path.display(), &record[i]))
                })
            })
            .collect::<Result<_, _>>()?;
        memberships.insert(record[0].to_string(), row);
    }
    Ok((memberships, c))
}

pub fn write_silhouette_sweep_csv(path: &Path, sweep: &[(usize, f64)]) -> Result<(), AppError> {
    let mut w = open_writer(path)?;
    write_record(&mut w, path, ["k", "mean_silhouette"])?;
    for &(k, s) in sweep {
        write_record(&mut w, path, [k.to_string(), fmt(s)])?;
    }
    finish(w, path)
}

pub fn read_silhouette_sweep_csv(path: &Path) -> Result<Vec<(usize, f64)>, AppError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| AppError::input(format!("reading {}: {e}", path.display())))?;
    let mut sweep = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
        let k = record[0]
            .parse()
            .map_err(|_| AppError::input(format!("{}: bad k", path.display())))?;
        let s = record[1]
            .parse()
            .map_err(|_| AppError::input(format!("{}: bad silhouette", path.display())))?;
        sweep.push((k, s));
    }
    Ok(sweep)
}

/// Histogram of maximum membership coefficients over 10 buckets covering
/// [0, 1]; the final bucket is closed above.
pub fn write_membership_histogram_csv(
    path: &Path,
    memberships: &MembershipMatrix,
) -> Result<(), AppError> {
    let mut counts = [0usize; 10];
    let n = memberships.u.len();
    for row in &memberships.u {
        let max = row.iter().fold(0.0f64, |a, &b| a.max(b));
        let bucket = ((max * 10.0).floor() as usize).min(9);
        counts[bucket] += 1;
    }
    let mut w = open_writer(path)?;
    write_record(&mut w, path, ["bucket_lo", "bucket_hi", "count", "fraction"])?;
    for (b, &count) in counts.iter().enumerate() {
        write_record(
            &mut w,
            path,
            [
                fmt(b as f64 / 10.0),
                fmt((b + 1) as f64 / 10.0),
                count.to_string(),
                fmt(count as f64 / n.max(1) as f64),
            ],
        )?;
    }
    finish(w, path)
}

// --- design ---

pub fn lineup_key(team: &str, season: &str, player_ids: &[String]) -> String {
    let mut ids = player_ids.to_vec();
    ids.sort();
    format!("{team}|{season}|{}", ids.join("+"))
}

pub fn write_design_csv(path: &Path, design: &DesignMatrix) -> Result<(), AppError> {
    let mut w = open_writer(path)?;
    let mut header = vec!["lineup_key".to_string(), "team_index".to_string()];
    header.extend(design.feature_names.iter().cloned());
    header.push("y".to_string());
    write_record(&mut w, path, &header)?;
    for row in &design.rows {
        let mut record = vec![
            lineup_key(&row.team, &row.season, &row.player_ids),
            row.team_index.to_string(),
        ];
        record.extend(row.x.iter().map(|&v| fmt(v)));
        record.push(fmt(row.y));
        write_record(&mut w, path, &record)?;
    }
    finish(w, path)
}

pub fn cluster_output_from_dir(dir: &Path) -> Result<ClusterOutput, AppError> {
    let memberships_path = dir.join("memberships.csv");
    let assignments_path = dir.join("assignments.csv");
    if memberships_path.exists() {
        let (memberships, c) = read_memberships_csv(&memberships_path)?;
        Ok(ClusterOutput::Soft { memberships, c })
    } else if assignments_path.exists() {
        let (labels, c) = read_assignments_csv(&assignments_path)?;
        Ok(ClusterOutput::Hard { labels, c })
    } else {
        Err(AppError::input(format!(
            "no clustering output in {}: expected memberships.csv or assignments.csv",
            dir.display()
        )))
    }
}

// --- posterior artifacts ---

pub fn write_posterior_csv(path: &Path, samples: &PosteriorSamples) -> Result<(), AppError> {
    let mut w = open_writer(path)?;
    write_record(&mut w, path, ["chain", "iter", "param", "value"])?;
    for (c, chain) in samples.chains.iter().enumerate() {
        for (it, draw) in chain.iter().enumerate() {
            for (p, &v) in draw.iter().enumerate() {
                write_record(
                    &mut w,
                    path,
                    [
                        c.to_string(),
                        it.to_string(),
                        samples.param_names[p].clone(),
                        fmt(v),
                    ],
                )?;
            }
        }
    }
    finish(w, path)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    pub seed: u64,
    pub converged: bool,
    pub forced: bool,
    pub rhat_threshold: f64,
    pub max_rhat: Option<f64>,
    /// Parameters whose split R-hat was not finite.
    pub non_finite_rhat: Vec<String>,
    pub rhat: Vec<(String, Option<f64>)>,
    pub divergences_per_chain: Vec<usize>,
    pub step_sizes: Vec<f64>,
    pub mean_tree_depths: Vec<f64>,
}

pub fn diagnostics_from(
    report: &RhatReport,
    samples: &PosteriorSamples,
    seed: u64,
    forced: bool,
) -> Diagnostics {
    let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
    Diagnostics {
        seed,
        converged: report.converged,
        forced,
        rhat_threshold: report.threshold,
        max_rhat: finite(report.max_rhat),
        non_finite_rhat: report
            .per_param
            .iter()
            .filter(|(_, v)| !v.is_finite())
            .map(|(n, _)| n.clone())
            .collect(),
        rhat: report
            .per_param
            .iter()
            .map(|(n, v)| (n.clone(), finite(*v)))
            .collect(),
        divergences_per_chain: samples.stats.iter().map(|s| s.divergences).collect(),
        step_sizes: samples.stats.iter().map(|s| s.step_size).collect(),
        mean_tree_depths: samples.stats.iter().map(|s| s.mean_tree_depth).collect(),
    }
}

pub fn write_diagnostics(path: &Path, diagnostics: &Diagnostics) -> Result<(), AppError> {
    let json = serde_json::to_string_pretty(diagnostics)
        .map_err(|e| AppError::input(format!("serializing diagnostics: {e}")))?;
    std::fs::write(path, json)
        .map_err(|e| AppError::input(format!("writing {}: {e}", path.display())))
}

pub fn write_effects_csv(
    path: &Path,
    table: &playstyle::inference::EffectTable,
    teams: &[String],
) -> Result<(), AppError> {
    let mut w = open_writer(path)?;
    let mut header = vec!["pair".to_string()];
    header.extend(teams.iter().map(|t| format!("team_{t}")));
    header.push("median".to_string());
    write_record(&mut w, path, &header)?;
    for row in table.sorted_descending() {
        let mut record = vec![row.pair.clone()];
        record.extend(row.team_means.iter().map(|&v| fmt(v)));
        record.push(fmt(row.median));
        write_record(&mut w, path, &record)?;
    }
    finish(w, path)
}

pub fn read_effects_csv(path: &Path) -> Result<Vec<(String, f64)>, AppError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| AppError::input(format!("reading {}: {e}", path.display())))?;
    let width = r
        .headers()
        .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?
        .len();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
        let median: f64 = record[width - 1]
            .parse()
            .map_err(|_| AppError::input(format!("{}: bad median", path.display())))?;
        rows.push((record[0].to_string(), median));
    }
    Ok(rows)
}

// --- baseline artifacts ---

#[derive(Debug, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    pub nll: f64,
    pub per_team: Vec<TeamMetrics>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TeamMetrics {
    pub team: String,
    pub rmse: f64,
    pub mae: f64,
    pub nll: f64,
    pub ridge_lambda: f64,
}

pub fn write_metrics(path: &Path, metrics: &Metrics) -> Result<(), AppError> {
    let json = serde_json::to_string_pretty(metrics)
        .map_err(|e| AppError::input(format!("serializing metrics: {e}")))?;
    std::fs::write(path, json)
        .map_err(|e| AppError::input(format!("writing {}: {e}", path.display())))
}

pub struct PredictionRow {
    pub lineup_key: String,
    pub team: String,
    pub y_true: f64,
    pub y_pred: f64,
    pub predictive_sd: f64,
}

pub fn write_predictions_csv(path: &Path, rows: &[PredictionRow]) -> Result<(), AppError> {
    let mut w = open_writer(path)?;
    write_record(
        &mut w,
        path,
        ["lineup_key", "team", "y_true", "y_pred", "predictive_sd"],
    )?;
    for row in rows {
        write_record(
            &mut w,
            path,
            [
                row.lineup_key.clone(),
                row.team.clone(),
                fmt(row.y_true),
                fmt(row.y_pred),
                fmt(row.predictive_sd),
            ],
        )?;
    }
    finish(w, path)
}

pub fn read_predictions_csv(path: &Path) -> Result<Vec<(String, f64, f64)>, AppError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| AppError::input(format!("reading {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
        let y_true: f64 = record[2]
            .parse()
            .map_err(|_| AppError::input(format!("{}: bad y_true", path.display())))?;
        let y_pred: f64 = record[3]
            .parse()
            .map_err(|_| AppError::input(format!("{}: bad y_pred", path.display())))?;
        rows.push((record[0].to_string(), y_true, y_pred));
    }
    Ok(rows)
}

pub fn baseline_predictions(
    design: &DesignMatrix,
    folds: &[BaselineFold],
) -> Vec<PredictionRow> {
    let mut rows = Vec::new();
    for fold in folds {
        let mut cursor = 0;
        for row in &design.rows {
            if row.team_index == fold.fold_team {
                rows.push(PredictionRow {
                    lineup_key: lineup_key(&row.team, &row.season, &row.player_ids),
                    team: row.team.clone(),
                    y_true: row.y,
                    y_pred: fold.predictions[cursor],
                    predictive_sd: fold.predictive_sd,
                });
                cursor += 1;
            }
        }
    }
    rows
}
