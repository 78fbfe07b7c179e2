//! Pipeline stages behind the subcommands. Every stage reads from its input
//! directory, writes artifacts plus a manifest into the output directory,
//! and never mutates its inputs. Logs go to stderr only.

use std::collections::BTreeMap;
use std::path::Path;

use playstyle::clustering::{cut_dendrogram, fuzzy_cmeans, silhouette_sweep, ward_linkage};
use playstyle::features::{
    build_role_features, feature_matrix, fit_standardize_pca, pca_transform,
};
use playstyle::inference::{
    effect_table, leave_one_team_out, nuts_sample, split_rhat, HierarchicalModelSpec,
    ModelData,
};
use playstyle::lineup::{
    build_design, default_shooting_merge_map, ClusterOutput, DesignMode, MergeMap,
};
use playstyle::model::{
    read_lineups_csv, read_playtypes_csv, read_segments_csv, validate_dataset,
    write_lineups_csv, write_playtypes_csv, write_segments_csv, synthesize_dataset,
    LineupRecord, PlaytypeProfile, ShotSegment,
};
use playstyle::transport::{pairwise_distance_matrix, EmpiricalDistribution};
use playstyle::PipelineConfig;

use crate::artifacts::{self, Metrics, TeamMetrics};
use crate::manifest::RunManifest;
use crate::AppError;

pub struct StageContext {
    pub config: PipelineConfig,
    pub config_json: String,
    pub seed: u64,
}

impl StageContext {
    pub fn load(config_path: &Path, seed_override: Option<u64>) -> Result<Self, AppError> {
        if !config_path.exists() {
            return Err(AppError::input(format!(
                "config file not found: {}",
                config_path.display()
            )));
        }
        let config = PipelineConfig::from_path(config_path)
            .map_err(|e| AppError::input(format!("{}: {e}", config_path.display())))?;
        let seed = seed_override.unwrap_or(config.mcmc.seed);
        let config_json = serde_json::to_string(&config)
            .map_err(|e| AppError::input(format!("config serialization: {e}")))?;
        Ok(Self {
            config,
            config_json,
            seed,
        })
    }

    fn manifest(&self, stage: &str) -> RunManifest {
        RunManifest::new(stage, self.seed, &self.config_json)
    }
}

fn ensure_out_dir(out: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(out)
        .map_err(|e| AppError::input(format!("creating {}: {e}", out.display())))
}

fn read_validated_segments(data: &Path) -> Result<Vec<ShotSegment>, AppError> {
    let path = data.join("segments.csv");
    let file = std::fs::File::open(&path)
        .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
    let segments = read_segments_csv(file)
        .map_err(|e| AppError::input(e.to_string()))?;
    if segments.is_empty() {
        return Err(AppError::input(format!("{} holds no segments", path.display())));
    }
    let report = validate_dataset(&segments, &[], &[]);
    reject_on_violations(&report)?;
    Ok(segments)
}

fn read_validated_profiles(data: &Path) -> Result<Vec<PlaytypeProfile>, AppError> {
    let path = data.join("playtypes.csv");
    let file = std::fs::File::open(&path)
        .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
    let profiles = read_playtypes_csv(file).map_err(|e| AppError::input(e.to_string()))?;
    let report = validate_dataset(&[], &profiles, &[]);
    reject_on_violations(&report)?;
    Ok(profiles)
}

fn read_validated_lineups(data: &Path) -> Result<Vec<LineupRecord>, AppError> {
    let path = data.join("lineups.csv");
    let file = std::fs::File::open(&path)
        .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
    let lineups = read_lineups_csv(file).map_err(|e| AppError::input(e.to_string()))?;
    let report = validate_dataset(&[], &[], &lineups);
    reject_on_violations(&report)?;
    Ok(lineups)
}

fn reject_on_violations(report: &playstyle::model::ValidationReport) -> Result<(), AppError> {
    if report.is_accepted() {
        return Ok(());
    }
    for v in report.violations.iter().take(20) {
        eprintln!(
            "validation: {}[{}] {}: {}",
            v.record_kind, v.index, v.rule, v.message
        );
    }
    Err(AppError::input(format!(
        "dataset failed validation with {} violation(s)",
        report.violations.len()
    )))
}

// --- synth ---

pub fn cmd_synth(ctx: &StageContext, out: &Path) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let data = synthesize_dataset(&ctx.config.synth, ctx.seed)
        .map_err(|e| AppError::input(e.to_string()))?;

    let mut manifest = ctx.manifest("synth");
    let seg_path = out.join("segments.csv");
    let file = std::fs::File::create(&seg_path)
        .map_err(|e| AppError::input(format!("{}: {e}", seg_path.display())))?;
    write_segments_csv(file, &data.segments).map_err(|e| AppError::input(e.to_string()))?;
    manifest.record_output(&seg_path)?;

    let pt_path = out.join("playtypes.csv");
    let file = std::fs::File::create(&pt_path)
        .map_err(|e| AppError::input(format!("{}: {e}", pt_path.display())))?;
    write_playtypes_csv(file, &data.profiles).map_err(|e| AppError::input(e.to_string()))?;
    manifest.record_output(&pt_path)?;

    let lu_path = out.join("lineups.csv");
    let file = std::fs::File::create(&lu_path)
        .map_err(|e| AppError::input(format!("{}: {e}", lu_path.display())))?;
    write_lineups_csv(file, &data.lineups).map_err(|e| AppError::input(e.to_string()))?;
    manifest.record_output(&lu_path)?;

    let truth_path = out.join("truth.json");
    let json = serde_json::to_string_pretty(&data.truth)
        .map_err(|e| AppError::input(format!("serializing truth: {e}")))?;
    std::fs::write(&truth_path, json)
        .map_err(|e| AppError::input(format!("{}: {e}", truth_path.display())))?;
    manifest.record_output(&truth_path)?;

    manifest.write(out)?;
    eprintln!(
        "synth: wrote {} segments, {} profiles, {} lineups to {}",
        data.segments.len(),
        data.profiles.len(),
        data.lineups.len(),
        out.display()
    );
    Ok(())
}

// --- features ---

pub fn cmd_features(ctx: &StageContext, data: &Path, out: &Path) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let mut manifest = ctx.manifest("features");
    manifest.record_input(&data.join("segments.csv"))?;
    manifest.record_input(&data.join("playtypes.csv"))?;

    let segments = read_validated_segments(data)?;
    let (ids, rows) = feature_matrix(&segments).map_err(|e| AppError::input(e.to_string()))?;
    let features_path = out.join("features.csv");
    artifacts::write_features_csv(&features_path, &ids, &rows)?;
    manifest.record_output(&features_path)?;

    let model = fit_standardize_pca(&rows, ctx.config.pca_variance_target)
        .map_err(|e| AppError::input(e.to_string()))?;
    let pca_path = out.join("pca_model.json");
    artifacts::write_pca_model(&pca_path, &model)?;
    manifest.record_output(&pca_path)?;

    let profiles = read_validated_profiles(data)?;
    let roles = build_role_features(
        &profiles,
        ctx.config.role_min_games,
        ctx.config.role_max_missing_fraction,
    )
    .map_err(|e| AppError::input(e.to_string()))?;
    let roles_path = out.join("role_features.csv");
    artifacts::write_role_features_csv(&roles_path, &roles)?;
    manifest.record_output(&roles_path)?;

    manifest.write(out)?;
    eprintln!(
        "features: {} shot rows (PCA d = {}), {} role rows",
        rows.len(),
        model.output_dim(),
        roles.len()
    );
    Ok(())
}

// --- cluster-shots ---

pub fn cmd_cluster_shots(
    ctx: &StageContext,
    data: &Path,
    out: &Path,
    dump_plans: bool,
) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let mut manifest = ctx.manifest("cluster_shots");
    manifest.record_input(&data.join("segments.csv"))?;

    let segments = read_validated_segments(data)?;
    let (ids, rows) = feature_matrix(&segments).map_err(|e| AppError::input(e.to_string()))?;

    // drop players below the shot floor before anything else
    let mut shots_per_player: BTreeMap<&str, usize> = BTreeMap::new();
    for id in &ids {
        *shots_per_player.entry(id).or_default() += 1;
    }
    let kept: std::collections::BTreeSet<String> = shots_per_player
        .iter()
        .filter_map(|(&id, &n)| {
            if n >= ctx.config.min_shots_per_player {
                Some(id.to_string())
            } else {
                eprintln!(
                    "cluster-shots: excluding {id} ({n} shots < {})",
                    ctx.config.min_shots_per_player
                );
                None
            }
        })
        .collect();
    if kept.len() < 2 {
        return Err(AppError::input(format!(
            "only {} player(s) reach {} shots; need at least 2",
            kept.len(),
            ctx.config.min_shots_per_player
        )));
    }
    let filtered: Vec<(String, Vec<f64>)> = ids
        .iter()
        .zip(&rows)
        .filter(|(id, _)| kept.contains(*id))
        .map(|(id, row)| (id.clone(), row.clone()))
        .collect();
    let feature_rows: Vec<Vec<f64>> = filtered.iter().map(|(_, r)| r.clone()).collect();
    let feature_ids: Vec<String> = filtered.iter().map(|(id, _)| id.clone()).collect();

    let features_path = out.join("features.csv");
    artifacts::write_features_csv(&features_path, &feature_ids, &feature_rows)?;
    manifest.record_output(&features_path)?;

    let model = fit_standardize_pca(&feature_rows, ctx.config.pca_variance_target)
        .map_err(|e| AppError::input(e.to_string()))?;
    let pca_path = out.join("pca_model.json");
    artifacts::write_pca_model(&pca_path, &model)?;
    manifest.record_output(&pca_path)?;
    let scores = pca_transform(&model, &feature_rows).map_err(|e| AppError::input(e.to_string()))?;

    // one empirical distribution per player over their shot scores
    let mut per_player: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for (id, score) in feature_ids.iter().zip(scores) {
        per_player.entry(id.clone()).or_default().push(score);
    }
    let players: Vec<(String, EmpiricalDistribution)> = per_player
        .into_iter()
        .map(|(id, points)| {
            EmpiricalDistribution::uniform(points)
                .map(|d| (id, d))
                .map_err(|e| AppError::input(e.to_string()))
        })
        .collect::<Result<_, _>>()?;

    eprintln!(
        "cluster-shots: solving {} EMD pairs over {} players",
        players.len() * (players.len() - 1) / 2,
        players.len()
    );
    let dm = pairwise_distance_matrix(&players, ctx.config.wasserstein_p)
        .map_err(|e| AppError::input(e.to_string()))?;
    let dm_path = out.join("distance_matrix.csv");
    let file = std::fs::File::create(&dm_path)
        .map_err(|e| AppError::input(format!("{}: {e}", dm_path.display())))?;
    dm.write_csv(file).map_err(|e| AppError::input(e.to_string()))?;
    manifest.record_output(&dm_path)?;

    if dump_plans {
        let plan_dir = out.join("plan");
        ensure_out_dir(&plan_dir)?;
        for (i, (id_a, da)) in players.iter().enumerate() {
            for (id_b, db) in players.iter().skip(i + 1) {
                let plan = playstyle::transport::solve_emd(da, db, ctx.config.wasserstein_p)
                    .map_err(|e| AppError::input(e.to_string()))?;
                let path = plan_dir.join(format!("{id_a}__{id_b}.csv"));
                let mut w = csv::Writer::from_path(&path)
                    .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
                for row in &plan.plan {
                    w.write_record(row.iter().map(|&v| artifacts::fmt(v)))
                        .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
                }
                w.flush()
                    .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
            }
        }
    }

    let dendrogram = ward_linkage(&dm).map_err(|e| AppError::input(e.to_string()))?;
    let dend_path = out.join("dendrogram.json");
    artifacts::write_dendrogram(&dend_path, &dendrogram)?;
    manifest.record_output(&dend_path)?;

    let sweep = silhouette_sweep(
        &dm,
        &dendrogram,
        ctx.config.silhouette_k_min,
        ctx.config.silhouette_k_max,
    )
    .map_err(|e| AppError::input(e.to_string()))?;
    let sweep_path = out.join("silhouette_sweep.csv");
    artifacts::write_silhouette_sweep_csv(&sweep_path, &sweep)?;
    manifest.record_output(&sweep_path)?;

    let assignment = cut_dendrogram(&dendrogram, ctx.config.n_shot_clusters)
        .map_err(|e| AppError::input(e.to_string()))?;
    let assign_path = out.join("assignments.csv");
    artifacts::write_assignments_csv(&assign_path, &dm.labels, &assignment)?;
    manifest.record_output(&assign_path)?;

    manifest.write(out)?;
    eprintln!(
        "cluster-shots: cut at k = {}, sweep best k = {}",
        ctx.config.n_shot_clusters,
        sweep
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|&(k, _)| k)
            .unwrap_or(0)
    );
    Ok(())
}

// --- cluster-roles ---

pub fn cmd_cluster_roles(ctx: &StageContext, data: &Path, out: &Path) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let mut manifest = ctx.manifest("cluster_roles");
    manifest.record_input(&data.join("playtypes.csv"))?;

    let profiles = read_validated_profiles(data)?;
    let roles = build_role_features(
        &profiles,
        ctx.config.role_min_games,
        ctx.config.role_max_missing_fraction,
    )
    .map_err(|e| AppError::input(e.to_string()))?;
    if roles.is_empty() {
        return Err(AppError::input(
            "all players were filtered out of the role features".to_string(),
        ));
    }
    let roles_path = out.join("role_features.csv");
    artifacts::write_role_features_csv(&roles_path, &roles)?;
    manifest.record_output(&roles_path)?;

    let ids: Vec<String> = roles.iter().map(|(id, _)| id.clone()).collect();
    let mut x: Vec<Vec<f64>> = roles.iter().map(|(_, r)| r.to_vec()).collect();
    if ctx.config.scale_role_features {
        z_score_columns(&mut x);
    }
    let fit = fuzzy_cmeans(
        &x,
        ctx.config.n_role_clusters,
        ctx.config.fuzzifier_q,
        ctx.seed,
        ctx.config.fcm_tol,
        ctx.config.fcm_max_iter,
    )
    .map_err(|e| AppError::input(e.to_string()))?;

    let mem_path = out.join("memberships.csv");
    artifacts::write_memberships_csv(&mem_path, &ids, &fit.memberships)?;
    manifest.record_output(&mem_path)?;

    let hist_path = out.join("membership_histogram.csv");
    artifacts::write_membership_histogram_csv(&hist_path, &fit.memberships)?;
    manifest.record_output(&hist_path)?;

    manifest.write(out)?;
    eprintln!(
        "cluster-roles: {} players, c = {}, q = {}, {} iterations",
        ids.len(),
        ctx.config.n_role_clusters,
        ctx.config.fuzzifier_q,
        fit.objective_history.len()
    );
    Ok(())
}

fn z_score_columns(x: &mut [Vec<f64>]) {
    if x.is_empty() {
        return;
    }
    let n = x.len() as f64;
    let dim = x[0].len();
    for j in 0..dim {
        let mean: f64 = x.iter().map(|r| r[j]).sum::<f64>() / n;
        let var: f64 = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let sd = var.sqrt();
        if sd > 0.0 {
            for row in x.iter_mut() {
                row[j] = (row[j] - mean) / sd;
            }
        }
    }
}

// --- build-design / fit ---

pub fn resolve_merge_map(arg: Option<&str>) -> Result<Option<MergeMap>, AppError> {
    match arg {
        None => Ok(None),
        Some("shooting-13to5") => Ok(Some(default_shooting_merge_map())),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::input(format!("merge map {path}: {e}")))?;
            let map: MergeMap = serde_json::from_str(&text)
                .map_err(|e| AppError::input(format!("merge map {path}: {e}")))?;
            Ok(Some(map))
        }
    }
}

pub struct DesignInputs {
    pub design: playstyle::lineup::DesignMatrix,
    pub merge_map: MergeMap,
}

pub fn assemble_design(
    ctx: &StageContext,
    data: &Path,
    clusters_dir: &Path,
    mode: DesignMode,
    merge_map: Option<MergeMap>,
) -> Result<DesignInputs, AppError> {
    let lineups = read_validated_lineups(data)?;
    let clusters = artifacts::cluster_output_from_dir(clusters_dir)?;
    let (clusters, merge_map) = match merge_map {
        None => {
            let c = clusters.n_clusters();
            (clusters, MergeMap::identity(c))
        }
        Some(map) => {
            let merged = apply_merge(&clusters, &map)?;
            (merged, map)
        }
    };
    let design = build_design(
        &lineups,
        &clusters,
        mode,
        ctx.config.min_lineup_minutes,
        ctx.config.adjust_horizon_minutes,
    )
    .map_err(|e| AppError::input(e.to_string()))?;
    if design.rows.is_empty() {
        return Err(AppError::input(
            "no lineups above the minutes floor".to_string(),
        ));
    }
    Ok(DesignInputs { design, merge_map })
}

fn apply_merge(clusters: &ClusterOutput, map: &MergeMap) -> Result<ClusterOutput, AppError> {
    match clusters {
        ClusterOutput::Hard { labels, c } => {
            let lut = map.lookup(*c).map_err(|e| AppError::input(e.to_string()))?;
            Ok(ClusterOutput::Hard {
                labels: labels.iter().map(|(k, &v)| (k.clone(), lut[v])).collect(),
                c: map.n_merged(),
            })
        }
        ClusterOutput::Soft { memberships, c } => {
            let lut = map.lookup(*c).map_err(|e| AppError::input(e.to_string()))?;
            let c_new = map.n_merged();
            let merged = memberships
                .iter()
                .map(|(k, row)| {
                    let mut out = vec![0.0; c_new];
                    for (src, &v) in row.iter().enumerate() {
                        out[lut[src]] += v;
                    }
                    (k.clone(), out)
                })
                .collect();
            Ok(ClusterOutput::Soft {
                memberships: merged,
                c: c_new,
            })
        }
    }
}

pub fn cmd_build_design(
    ctx: &StageContext,
    data: &Path,
    clusters_dir: &Path,
    mode: DesignMode,
    merge_map: Option<MergeMap>,
    out: &Path,
) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let mut manifest = ctx.manifest("build_design");
    manifest.record_input(&data.join("lineups.csv"))?;
    let inputs = assemble_design(ctx, data, clusters_dir, mode, merge_map)?;

    let design_path = out.join("design.csv");
    artifacts::write_design_csv(&design_path, &inputs.design)?;
    manifest.record_output(&design_path)?;

    let map_path = out.join("merge_map.json");
    let json = serde_json::to_string_pretty(&inputs.merge_map)
        .map_err(|e| AppError::input(format!("serializing merge map: {e}")))?;
    std::fs::write(&map_path, json)
        .map_err(|e| AppError::input(format!("{}: {e}", map_path.display())))?;
    manifest.record_output(&map_path)?;

    manifest.write(out)?;
    eprintln!(
        "build-design: {} rows x {} features ({:?})",
        inputs.design.rows.len(),
        inputs.design.n_features(),
        mode
    );
    Ok(())
}

pub fn cmd_fit(
    ctx: &StageContext,
    data: &Path,
    clusters_dir: &Path,
    mode: DesignMode,
    merge_map: Option<MergeMap>,
    out: &Path,
    force: bool,
) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let mut manifest = ctx.manifest("fit");
    manifest.record_input(&data.join("lineups.csv"))?;
    let inputs = assemble_design(ctx, data, clusters_dir, mode, merge_map)?;
    let design = &inputs.design;

    let design_path = out.join("design.csv");
    artifacts::write_design_csv(&design_path, design)?;
    manifest.record_output(&design_path)?;
    let map_path = out.join("merge_map.json");
    let json = serde_json::to_string_pretty(&inputs.merge_map)
        .map_err(|e| AppError::input(format!("serializing merge map: {e}")))?;
    std::fs::write(&map_path, json)
        .map_err(|e| AppError::input(format!("{}: {e}", map_path.display())))?;
    manifest.record_output(&map_path)?;

    match mode {
        DesignMode::Counts5 => {
            let metrics = leave_one_team_out(&design.xs(), &design.ys(), &design.team_indices())
                .map_err(|e| AppError::input(e.to_string()))?;
            let metrics_path = out.join("metrics.json");
            artifacts::write_metrics(
                &metrics_path,
                &Metrics {
                    rmse: metrics.rmse,
                    mae: metrics.mae,
                    nll: metrics.nll,
                    per_team: metrics
                        .folds
                        .iter()
                        .map(|f| TeamMetrics {
                            team: design.teams[f.fold_team].clone(),
                            rmse: f.rmse,
                            mae: f.mae,
                            nll: f.nll,
                            ridge_lambda: f.ridge_lambda,
                        })
                        .collect(),
                },
            )?;
            manifest.record_output(&metrics_path)?;

            let predictions = artifacts::baseline_predictions(design, &metrics.folds);
            let pred_path = out.join("predictions.csv");
            artifacts::write_predictions_csv(&pred_path, &predictions)?;
            manifest.record_output(&pred_path)?;
            manifest.write(out)?;
            eprintln!(
                "fit (counts5): {} folds, rmse {:.3}, mae {:.3}, nll {:.3}",
                metrics.folds.len(),
                metrics.rmse,
                metrics.mae,
                metrics.nll
            );
            Ok(())
        }
        DesignMode::Combos2 => {
            let mut spec = HierarchicalModelSpec::new(
                design.teams.len(),
                design.n_features(),
                ctx.config.mu_alpha,
            );
            spec.sigma_beta_per_feature = ctx.config.sigma_beta_per_feature;
            let model_data = ModelData {
                x: design.xs(),
                y: design.ys(),
                team_index: design.team_indices(),
            };
            let mut mcmc = ctx.config.mcmc.clone();
            mcmc.seed = ctx.seed;
            eprintln!(
                "fit (combos2): {} rows, {} teams, {} features, {} chains x {} draws",
                model_data.y.len(),
                spec.n_teams,
                spec.n_features,
                mcmc.chains,
                mcmc.draws
            );
            let samples = nuts_sample(&spec, &model_data, &mcmc)
                .map_err(|e| AppError::convergence(e.to_string()))?;

            let posterior_path = out.join("posterior.csv");
            artifacts::write_posterior_csv(&posterior_path, &samples)?;
            manifest.record_output(&posterior_path)?;

            let report = split_rhat(&samples, ctx.config.rhat_threshold)
                .map_err(|e| AppError::input(e.to_string()))?;
            let diagnostics = artifacts::diagnostics_from(&report, &samples, ctx.seed, force);
            let diag_path = out.join("diagnostics.json");
            artifacts::write_diagnostics(&diag_path, &diagnostics)?;
            manifest.record_output(&diag_path)?;

            if !report.converged && !force {
                manifest.write(out)?;
                return Err(AppError::convergence(format!(
                    "max split R-hat {:.4} >= {} (effects.csv withheld; rerun with --force to emit it)",
                    report.max_rhat, ctx.config.rhat_threshold
                )));
            }
            if !report.converged {
                eprintln!(
                    "fit: WARNING max split R-hat {:.4} >= {}; effects emitted under --force",
                    report.max_rhat, ctx.config.rhat_threshold
                );
            }

            let table = effect_table(
                &samples,
                &spec.layout(),
                &design.feature_names,
                report.converged,
            )
            .map_err(|e| AppError::input(e.to_string()))?;
            let effects_path = out.join("effects.csv");
            artifacts::write_effects_csv(&effects_path, &table, &design.teams)?;
            manifest.record_output(&effects_path)?;

            manifest.write(out)?;
            eprintln!(
                "fit (combos2): max split R-hat {:.4}, {} divergences",
                report.max_rhat,
                samples.total_divergences()
            );
            Ok(())
        }
    }
}

// --- report ---

pub fn cmd_report(out: &Path) -> Result<(), AppError> {
    let required = [
        "assignments.csv",
        "silhouette_sweep.csv",
        "predictions.csv",
        "effects.csv",
    ];
    let missing: Vec<String> = required
        .iter()
        .filter(|name| !out.join(name).exists())
        .map(|name| name.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(AppError::input(format!(
            "missing stage artifacts in {}: {}",
            out.display(),
            missing.join(", ")
        )));
    }

    let (assignments, n_clusters) = artifacts::read_assignments_csv(&out.join("assignments.csv"))?;
    let sweep = artifacts::read_silhouette_sweep_csv(&out.join("silhouette_sweep.csv"))?;
    let predictions = artifacts::read_predictions_csv(&out.join("predictions.csv"))?;
    let effects = artifacts::read_effects_csv(&out.join("effects.csv"))?;
    let converged_note = read_convergence_note(out);

    let mut md = String::new();
    md.push_str("# Pipeline report\n\n");

    md.push_str("## Cluster sizes\n\n| cluster | players |\n|---|---|\n");
    let mut sizes = vec![0usize; n_clusters];
    for &label in assignments.values() {
        sizes[label] += 1;
    }
    for (cluster, size) in sizes.iter().enumerate() {
        md.push_str(&format!("| {cluster} | {size} |\n"));
    }

    md.push_str("\n## Silhouette sweep\n\n| k | mean silhouette |\n|---|---|\n");
    for (k, s) in &sweep {
        md.push_str(&format!("| {k} | {s:.6} |\n"));
    }

    md.push_str("\n## Top and bottom lineups by baseline prediction\n\n");
    let mut by_pred = predictions.clone();
    by_pred.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    md.push_str("### Top 10\n\n| lineup | observed | predicted |\n|---|---|---|\n");
    for (key, y_true, y_pred) in by_pred.iter().take(10) {
        md.push_str(&format!("| {key} | {y_true:.3} | {y_pred:.3} |\n"));
    }
    md.push_str("\n### Bottom 10\n\n| lineup | observed | predicted |\n|---|---|---|\n");
    for (key, y_true, y_pred) in by_pred.iter().rev().take(10) {
        md.push_str(&format!("| {key} | {y_true:.3} | {y_pred:.3} |\n"));
    }

    md.push_str("\n## Estimated combination effects\n\n");
    if let Some(note) = converged_note {
        md.push_str(&note);
    }
    md.push_str("| combination | median effect |\n|---|---|\n");
    let mut effects = effects;
    effects.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    for (pair, median) in &effects {
        md.push_str(&format!("| {pair} | {median:.4} |\n"));
    }

    let report_path = out.join("report.md");
    std::fs::write(&report_path, md)
        .map_err(|e| AppError::input(format!("{}: {e}", report_path.display())))?;
    eprintln!("report: wrote {}", report_path.display());
    Ok(())
}

fn read_convergence_note(out: &Path) -> Option<String> {
    let text = std::fs::read_to_string(out.join("diagnostics.json")).ok()?;
    let diagnostics: serde_json::Value = serde_json::from_str(&text).ok()?;
    if diagnostics.get("converged")?.as_bool()? {
        None
    } else {
        Some("**WARNING: the MCMC fit did not converge (max split R-hat at or above the threshold); effects are unreliable.**\n\n".to_string())
    }
}
