//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its elapsed time. Oracles come from the dev-only testkit crate and are
//! independent of the production solvers.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use playstyle::clustering::{
    cut_dendrogram, fuzzy_cmeans, kmeans, silhouette_mean, silhouette_sweep, ward_linkage,
    HardAssignment,
};
use playstyle::config::{McmcConfig, SynthConfig};
use playstyle::features::{feature_matrix, fit_standardize_pca, pca_transform};
use playstyle::inference::{
    effect_table, log_posterior, nuts_sample, sample_chains, split_rhat, split_rhat_value,
    HierarchicalModelSpec, LogDensity, ModelData, NutsConfig,
};
use playstyle::lineup::{
    adjust_offrtg, build_design, combo_features_2, combo_features_from_labels,
    n_combination_features, pair_position, points_per_possession, true_shooting_pct,
    ClusterOutput, DesignMode,
};
use playstyle::model::synthesize_dataset;
use playstyle::transport::{
    pairwise_distance_matrix, solve_emd, wasserstein_distance, DistanceMatrix,
    EmpiricalDistribution,
};
use playstyle_testkit as oracle;

fn random_distribution(rng: &mut ChaCha20Rng, max_support: usize, dim: usize) -> EmpiricalDistribution {
    let m = rng.gen_range(1..=max_support);
    let points: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal) * 3.0).collect())
        .collect();
    if rng.gen::<bool>() {
        EmpiricalDistribution::uniform(points).unwrap()
    } else {
        let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        let mut mass: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let drift = 1.0 - mass.iter().sum::<f64>();
        mass[0] += drift;
        EmpiricalDistribution::new(points, mass).unwrap()
    }
}

#[test]
fn c01_emd_network_simplex_matches_dense_lp_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    for trial in 0..500 {
        let dim = rng.gen_range(1..=3);
        let mu = random_distribution(&mut rng, 6, dim);
        let nu = random_distribution(&mut rng, 6, dim);
        let plan = solve_emd(&mu, &nu, 1.0).expect("solve");
        let reference = oracle::emd_lp_oracle(&mu.points, &nu.points, &mu.mass, &nu.mass, 1.0);
        assert!(
            (plan.cost - reference).abs() < 1e-8,
            "trial {trial}: network simplex {} vs LP oracle {reference}",
            plan.cost
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!("PASS criterion 1: EMD oracle equivalence on 500 random pairs ({elapsed:?})");
}

#[test]
fn c02_wasserstein_metric_properties() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(202);

    // symmetry exact and self-distance
    for _ in 0..100 {
        let mu = random_distribution(&mut rng, 6, 2);
        let nu = random_distribution(&mut rng, 6, 2);
        let ab = wasserstein_distance(&mu, &nu, 1.0).unwrap();
        let ba = wasserstein_distance(&nu, &mu, 1.0).unwrap();
        assert_eq!(ab.to_bits(), ba.to_bits(), "symmetry must be exact");
        let self_dist = wasserstein_distance(&mu, &mu, 1.0).unwrap();
        assert!(self_dist <= 1e-9, "self distance {self_dist}");
    }

    // triangle inequality on 200 random triples
    for trial in 0..200 {
        let a = random_distribution(&mut rng, 6, 2);
        let b = random_distribution(&mut rng, 6, 2);
        let c = random_distribution(&mut rng, 6, 2);
        let ab = wasserstein_distance(&a, &b, 1.0).unwrap();
        let bc = wasserstein_distance(&b, &c, 1.0).unwrap();
        let ac = wasserstein_distance(&a, &c, 1.0).unwrap();
        assert!(
            ac <= ab + bc + 1e-7,
            "trial {trial}: triangle violated: {ac} > {ab} + {bc}"
        );
    }
    let elapsed = start.elapsed();
    println!("PASS criterion 2: W_p metric properties ({elapsed:?})");
}

#[test]
fn c03_ward_merge_sequence_matches_naive_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(303);
    for trial in 0..50 {
        let n = rng.gen_range(4..=20);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0).collect())
            .collect();
        let values: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        points[i]
                            .iter()
                            .zip(&points[j])
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        let dm = DistanceMatrix::new((0..n).map(|i| format!("x{i}")).collect(), values).unwrap();
        let dendrogram = ward_linkage(&dm).unwrap();
        let reference = oracle::ward_oracle_from_points(&points);
        assert_eq!(dendrogram.merges.len(), reference.len());
        for (step, (got, want)) in dendrogram.merges.iter().zip(&reference).enumerate() {
            assert_eq!(
                (got.left, got.right, got.size),
                (want.left, want.right, want.size),
                "trial {trial} step {step}: merge pair differs"
            );
            let rel = (got.height - want.height).abs() / want.height.max(1e-12);
            assert!(
                rel < 1e-9,
                "trial {trial} step {step}: height {} vs oracle {}",
                got.height,
                want.height
            );
        }
    }
    let elapsed = start.elapsed();
    println!("PASS criterion 3: Ward oracle equivalence on 50 instances ({elapsed:?})");
}

#[test]
fn c04_silhouette_hand_worked_range_and_separation() {
    let start = Instant::now();

    // hand-worked six-point case, evaluated from the defining equations
    let pts: [f64; 6] = [0.0, 1.5, 2.0, 6.0, 7.0, 11.0];
    let matrix: Vec<Vec<f64>> = (0..6)
        .map(|i| (0..6).map(|j| (pts[i] - pts[j]).abs()).collect())
        .collect();
    let dm = DistanceMatrix::new((0..6).map(|i| format!("x{i}")).collect(), matrix).unwrap();
    let labels = vec![0usize, 0, 0, 1, 1, 1];
    let mut expected = 0.0;
    for i in 0..6 {
        let own: Vec<usize> = (0..6).filter(|&j| labels[j] == labels[i] && j != i).collect();
        let other: Vec<usize> = (0..6).filter(|&j| labels[j] != labels[i]).collect();
        let a: f64 = own.iter().map(|&j| (pts[i] - pts[j]).abs()).sum::<f64>() / own.len() as f64;
        let b: f64 =
            other.iter().map(|&j| (pts[i] - pts[j]).abs()).sum::<f64>() / other.len() as f64;
        expected += (b - a) / a.max(b);
    }
    expected /= 6.0;
    let assignment = HardAssignment {
        labels,
        n_clusters: 2,
    };
    let got = silhouette_mean(&dm, &assignment).unwrap();
    assert!(
        (got - expected).abs() < 1e-12,
        "hand-worked case: {got} vs {expected}"
    );

    // output in [-1, 1] on random labelings
    let mut rng = ChaCha20Rng::seed_from_u64(404);
    for _ in 0..50 {
        let n = rng.gen_range(4..=12);
        let values: Vec<Vec<f64>> = {
            let pts: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 10.0).collect();
            (0..n)
                .map(|i| (0..n).map(|j| (pts[i] - pts[j]).abs()).collect())
                .collect()
        };
        let dm = DistanceMatrix::new((0..n).map(|i| format!("x{i}")).collect(), values).unwrap();
        let k = rng.gen_range(2..=3.min(n));
        let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        let s = silhouette_mean(
            &dm,
            &HardAssignment {
                labels,
                n_clusters: k,
            },
        )
        .unwrap();
        assert!((-1.0..=1.0).contains(&s), "silhouette {s} out of range");
    }

    // two tight far-apart blobs
    let blob_pts: [f64; 6] = [0.0, 0.005, 0.01, 100.0, 100.005, 100.01];
    let values: Vec<Vec<f64>> = (0..6)
        .map(|i| (0..6).map(|j| (blob_pts[i] - blob_pts[j]).abs()).collect())
        .collect();
    let dm = DistanceMatrix::new((0..6).map(|i| format!("b{i}")).collect(), values).unwrap();
    let s = silhouette_mean(
        &dm,
        &HardAssignment {
            labels: vec![0, 0, 0, 1, 1, 1],
            n_clusters: 2,
        },
    )
    .unwrap();
    assert!(s >= 0.99, "two-blob silhouette {s}");

    let elapsed = start.elapsed();
    println!("PASS criterion 4: silhouette hand-worked case, range and separation ({elapsed:?})");
}

#[test]
fn c05_fuzzy_cmeans_rows_objective_and_crisp_limit() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(505);

    for trial in 0..20 {
        let n = rng.gen_range(12..=40);
        let dim = rng.gen_range(2..=4);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal) * 4.0).collect())
            .collect();
        let c = rng.gen_range(2..=4);
        let fit = fuzzy_cmeans(&x, c, 1.2, trial as u64, 1e-9, 500).unwrap();
        // every membership row on the simplex
        for row in &fit.memberships.u {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "row sum {sum}");
        }
        // objective non-increasing per iteration
        for w in fit.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "objective rose: {:?}", fit.objective_history);
        }
    }

    // q -> 1+ reduces to k-means on well-separated blobs
    let mut blob_rng = ChaCha20Rng::seed_from_u64(99);
    let mut x = Vec::new();
    for center in [[0.0, 0.0], [40.0, 0.0], [0.0, 40.0]] {
        for _ in 0..15 {
            x.push(vec![
                center[0] + 0.1 * blob_rng.sample::<f64, _>(StandardNormal),
                center[1] + 0.1 * blob_rng.sample::<f64, _>(StandardNormal),
            ]);
        }
    }
    let seed = 7;
    let fcm = fuzzy_cmeans(&x, 3, 1.01, seed, 1e-10, 500).unwrap();
    let km = kmeans(&x, 3, seed, 300).unwrap();
    assert_eq!(fcm.memberships.argmax_labels(), km.assignment.labels);

    let elapsed = start.elapsed();
    println!("PASS criterion 5: fuzzy C-means row sums, objective descent, crisp limit ({elapsed:?})");
}

#[test]
fn c06_combination_features_conservation_and_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(606);

    // 1000 random simplex membership sets
    for _ in 0..1000 {
        let c = rng.gen_range(2..=6);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                let raw: Vec<f64> = (0..c).map(|_| rng.gen::<f64>() + 1e-3).collect();
                let total: f64 = raw.iter().sum();
                let mut row: Vec<f64> = raw.iter().map(|v| v / total).collect();
                let drift = 1.0 - row.iter().sum::<f64>();
                row[0] += drift;
                row
            })
            .collect();
        let x = combo_features_2(&rows, c).unwrap();
        let total: f64 = x.iter().sum();
        assert!((total - 10.0).abs() < 1e-9, "combos sum {total}");
    }

    // crisp outputs equal brute-force pair enumeration for all multisets c <= 4
    for c in 1..=4 {
        for labels in oracle::all_label_multisets(c) {
            let got = combo_features_from_labels(&labels, c);
            let want = oracle::pair_count_oracle(&labels, c);
            assert_eq!(got, want, "labels {labels:?} c = {c}");
        }
    }

    assert_eq!(n_combination_features(5), 15);
    assert_eq!(n_combination_features(10), 55);

    let elapsed = start.elapsed();
    println!("PASS criterion 6: combination features conservation and enumeration ({elapsed:?})");
}

#[test]
fn c07_formula_spot_checks() {
    let start = Instant::now();
    assert_eq!(adjust_offrtg(110.0, 150.0, 100.0, 300.0).unwrap(), 105.0);
    let ts = true_shooting_pct(30.0, 20.0, 10.0).unwrap();
    assert!((ts - 61.4754).abs() < 1e-4, "TS% {ts}");
    assert_eq!(points_per_possession(50.0, 40.0, 0.0, 10.0).unwrap(), 1.0);
    let elapsed = start.elapsed();
    println!("PASS criterion 7: formula spot checks ({elapsed:?})");
}

#[test]
fn c08_log_posterior_gradient_vs_finite_differences() {
    let start = Instant::now();
    let spec = HierarchicalModelSpec::new(3, 6, 105.0);
    let layout = spec.layout();
    let mut rng = ChaCha20Rng::seed_from_u64(808);
    let x: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..6).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let y: Vec<f64> = (0..50)
        .map(|_| 105.0 + 3.0 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let team_index: Vec<usize> = (0..50).map(|i| i % 3).collect();
    let data = ModelData { x, y, team_index };

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut params: Vec<f64> = (0..layout.dim)
            .map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for t in 0..3 {
            params[layout.alpha(t)] = 103.0 + 2.0 * rng.sample::<f64, _>(StandardNormal);
        }
        let (_, grad) = log_posterior(&spec, &data, &params);
        for d in 0..layout.dim {
            let mut plus = params.clone();
            plus[d] += h;
            let mut minus = params.clone();
            minus[d] -= h;
            let fd = (log_posterior(&spec, &data, &plus).0
                - log_posterior(&spec, &data, &minus).0)
                / (2.0 * h);
            let rel = (grad[d] - fd).abs() / grad[d].abs().max(fd.abs()).max(1.0);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-5, "max relative gradient error {worst:e}");
    let elapsed = start.elapsed();
    println!("PASS criterion 8: gradient check, max relative error {worst:.2e} ({elapsed:?})");
}

struct StdNormalTarget {
    dim: usize,
}

impl LogDensity for StdNormalTarget {
    fn dim(&self) -> usize {
        self.dim
    }
    fn logp_grad(&self, position: &[f64]) -> (f64, Vec<f64>) {
        (
            -0.5 * position.iter().map(|v| v * v).sum::<f64>(),
            position.iter().map(|v| -v).collect(),
        )
    }
}

struct ConjugateRegression {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    noise_sd: f64,
    prior_sd: f64,
}

impl LogDensity for ConjugateRegression {
    fn dim(&self) -> usize {
        self.x[0].len()
    }
    fn logp_grad(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let s2 = self.noise_sd * self.noise_sd;
        let t2 = self.prior_sd * self.prior_sd;
        let mut lp = 0.0;
        let mut grad: Vec<f64> = w.iter().map(|wi| -wi / t2).collect();
        lp += -0.5 * w.iter().map(|wi| wi * wi).sum::<f64>() / t2;
        for (row, &yi) in self.x.iter().zip(&self.y) {
            let pred: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
            let r = yi - pred;
            lp += -0.5 * r * r / s2;
            for (g, xv) in grad.iter_mut().zip(row) {
                *g += r * xv / s2;
            }
        }
        (lp, grad)
    }
}

#[test]
fn c09_sampler_calibration() {
    let start = Instant::now();

    // standard normal target moments
    let target = StdNormalTarget { dim: 3 };
    let cfg = NutsConfig {
        warmup: 500,
        draws: 1000,
        target_accept: 0.8,
        max_tree_depth: 10,
    };
    let inits: Vec<Vec<f64>> = (0..4).map(|c| vec![0.4 * c as f64 - 0.6; 3]).collect();
    let names: Vec<String> = (0..3).map(|i| format!("x[{i}]")).collect();
    let samples = sample_chains(&target, &inits, names, &cfg, 909).unwrap();
    for p in 0..3 {
        let mean = samples.mean(p);
        let variance = samples.sd(p).powi(2);
        assert!(mean.abs() < 0.05, "standard normal mean {mean}");
        assert!(
            (0.9..=1.1).contains(&variance),
            "standard normal variance {variance}"
        );
        let chains: Vec<Vec<f64>> = (0..4).map(|c| samples.chain_series(c, p)).collect();
        let rhat = split_rhat_value(&chains);
        assert!(rhat < 1.1, "standard normal split R-hat {rhat}");
    }

    // conjugate Gaussian regression with known noise
    let mut rng = ChaCha20Rng::seed_from_u64(910);
    let p = 6;
    let w_true: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let x: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let noise_sd = 1.0;
    let y: Vec<f64> = x
        .iter()
        .map(|row| {
            row.iter().zip(&w_true).map(|(a, b)| a * b).sum::<f64>()
                + noise_sd * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let (post_mean, post_sd) = oracle::conjugate_posterior(&x, &y, 10.0, noise_sd);

    let target = ConjugateRegression {
        x,
        y,
        noise_sd,
        prior_sd: 10.0,
    };
    let cfg = NutsConfig {
        warmup: 500,
        draws: 1000,
        target_accept: 0.8,
        max_tree_depth: 10,
    };
    let inits: Vec<Vec<f64>> = (0..4)
        .map(|c| vec![0.1 * (c as f64 - 1.5); p])
        .collect();
    let names: Vec<String> = (0..p).map(|i| format!("w[{i}]")).collect();
    let samples = sample_chains(&target, &inits, names, &cfg, 911).unwrap();
    let total_draws = (samples.n_chains() * samples.n_iterations()) as f64;
    // conservative effective sample size for the standard error
    let ess = total_draws / 5.0;
    let mut max_rhat: f64 = 0.0;
    for d in 0..p {
        let mcmc_mean = samples.mean(d);
        let mcmc_sd = samples.sd(d);
        let se = post_sd[d] / ess.sqrt();
        assert!(
            (mcmc_mean - post_mean[d]).abs() < 3.0 * se,
            "w[{d}]: mcmc mean {mcmc_mean} vs closed form {} (se {se})",
            post_mean[d]
        );
        let ratio = mcmc_sd / post_sd[d];
        assert!(
            (0.85..=1.15).contains(&ratio),
            "w[{d}]: sd ratio {ratio} (mcmc {mcmc_sd} vs closed form {})",
            post_sd[d]
        );
        let chains: Vec<Vec<f64>> = (0..4).map(|c| samples.chain_series(c, d)).collect();
        max_rhat = max_rhat.max(split_rhat_value(&chains));
    }
    assert!(max_rhat < 1.1, "conjugate fit max split R-hat {max_rhat}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!("PASS criterion 9: sampler calibration, max split R-hat {max_rhat:.4} ({elapsed:?})");
}

#[test]
fn c10_end_to_end_effect_recovery() {
    let start = Instant::now();
    let spec = SynthConfig {
        archetypes: 3,
        players: 60,
        shots_per_player: 30,
        teams: 6,
        lineups_per_team: 40,
        planted_pair: Some((0, 1)),
        planted_effect: 3.0,
        ..SynthConfig::default()
    };
    let data = synthesize_dataset(&spec, 7).unwrap();

    // shooting-style pipeline: features -> PCA -> EMD -> Ward -> cut at K
    let (ids, rows) = feature_matrix(&data.segments).unwrap();
    let model = fit_standardize_pca(&rows, 0.99).unwrap();
    let scores = pca_transform(&model, &rows).unwrap();
    let mut per_player: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for (id, score) in ids.iter().zip(scores) {
        per_player.entry(id.clone()).or_default().push(score);
    }
    let players: Vec<(String, EmpiricalDistribution)> = per_player
        .into_iter()
        .map(|(id, pts)| (id, EmpiricalDistribution::uniform(pts).unwrap()))
        .collect();
    let dm = pairwise_distance_matrix(&players, 1.0).unwrap();
    let dendrogram = ward_linkage(&dm).unwrap();
    let assignment = cut_dendrogram(&dendrogram, 3).unwrap();

    // map clusters to archetypes by majority truth label; must be a bijection
    let truth_of: BTreeMap<&str, usize> = data
        .truth
        .archetype_of
        .iter()
        .map(|(id, k)| (id.as_str(), *k))
        .collect();
    let mut votes = vec![[0usize; 3]; 3];
    for (label, id) in assignment.labels.iter().zip(&dm.labels) {
        votes[*label][truth_of[id.as_str()]] += 1;
    }
    let cluster_to_archetype: Vec<usize> = votes
        .iter()
        .map(|row| row.iter().enumerate().max_by_key(|(_, &v)| v).unwrap().0)
        .collect();
    {
        let mut seen = cluster_to_archetype.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2], "clusters do not recover archetypes");
    }

    // design from the fitted clustering
    let labels: BTreeMap<String, usize> = dm
        .labels
        .iter()
        .cloned()
        .zip(assignment.labels.iter().copied())
        .collect();
    let clusters = ClusterOutput::Hard { labels, c: 3 };
    let design = build_design(&data.lineups, &clusters, DesignMode::Combos2, 50.0, 300.0).unwrap();

    let mut model_spec =
        HierarchicalModelSpec::new(design.teams.len(), design.n_features(), spec.alpha_base);
    model_spec.sigma_beta_per_feature = false;
    let mcmc = McmcConfig {
        chains: 4,
        warmup: 1000,
        draws: 1000,
        seed: 1010,
        target_accept: 0.8,
        max_tree_depth: 10,
    };
    let model_data = ModelData {
        x: design.xs(),
        y: design.ys(),
        team_index: design.team_indices(),
    };
    let samples = nuts_sample(&model_spec, &model_data, &mcmc).unwrap();
    let report = split_rhat(&samples, 1.1).unwrap();
    assert!(
        report.converged,
        "end-to-end fit did not converge: max split R-hat {}",
        report.max_rhat
    );

    // the planted archetype pair, mapped into cluster space
    let (pa, pb) = data.truth.planted_pair.unwrap();
    let archetype_to_cluster: Vec<usize> = (0..3)
        .map(|a| cluster_to_archetype.iter().position(|&x| x == a).unwrap())
        .collect();
    let (ca, cb) = (
        archetype_to_cluster[pa].min(archetype_to_cluster[pb]),
        archetype_to_cluster[pa].max(archetype_to_cluster[pb]),
    );
    let planted_feature = pair_position(ca, cb, 3);

    let table = effect_table(&samples, &model_spec.layout(), &design.feature_names, true).unwrap();
    let ranked = table.sorted_descending();
    assert_eq!(
        ranked[0].pair, design.feature_names[planted_feature],
        "planted pair does not rank first: {:?}",
        ranked.iter().map(|r| (&r.pair, r.median)).collect::<Vec<_>>()
    );

    // 90% credible interval of the planted population effect excludes 0
    let layout = model_spec.layout();
    let planted_param = layout.mu_beta(planted_feature);
    let lo = samples.quantile(planted_param, 0.05);
    let hi = samples.quantile(planted_param, 0.95);
    assert!(lo > 0.0, "planted 90% interval [{lo}, {hi}] does not exclude 0");

    // 90% intervals cover at least 80% of the true effects (cluster space)
    let mut covered = 0usize;
    let n_features = design.n_features();
    for f in 0..n_features {
        // feature f corresponds to cluster pair (k, k2); map back to archetypes
        let (k, k2) = {
            let mut idx = 0;
            let mut found = (0, 0);
            'outer: for a in 0..3 {
                for b in a..3 {
                    if idx == f {
                        found = (a, b);
                        break 'outer;
                    }
                    idx += 1;
                }
            }
            found
        };
        let (ta, tb) = (
            cluster_to_archetype[k].min(cluster_to_archetype[k2]),
            cluster_to_archetype[k].max(cluster_to_archetype[k2]),
        );
        let truth_value = data.truth.beta[pair_position(ta, tb, 3)];
        let param = layout.mu_beta(f);
        let lo = samples.quantile(param, 0.05);
        let hi = samples.quantile(param, 0.95);
        if lo <= truth_value && truth_value <= hi {
            covered += 1;
        }
    }
    let coverage = covered as f64 / n_features as f64;
    assert!(
        coverage >= 0.8,
        "only {covered}/{n_features} true effects covered by 90% intervals"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "took {elapsed:?}");
    println!(
        "PASS criterion 10: end-to-end recovery, planted pair first, coverage {covered}/{n_features} ({elapsed:?})"
    );
}

#[test]
fn c11_pipeline_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_playstyle");
    let root = tempfile::tempdir().unwrap();
    let config_path = root.path().join("cfg.json");
    std::fs::write(
        &config_path,
        r#"{
            "n_shot_clusters": 3,
            "mcmc": {"chains": 2, "warmup": 400, "draws": 300, "seed": 21},
            "synth": {"archetypes": 3, "players": 36, "shots_per_player": 30,
                      "teams": 4, "lineups_per_team": 25, "planted_pair": [0, 1]}
        }"#,
    )
    .unwrap();

    let run = |dir: &Path| {
        let data = dir.join("data");
        let out = dir.join("run");
        let steps: Vec<Vec<String>> = vec![
            vec![
                "synth".into(),
                "--config".into(),
                config_path.display().to_string(),
                "--seed".into(),
                "7".into(),
                "--out".into(),
                data.display().to_string(),
            ],
            vec![
                "cluster-shots".into(),
                "--config".into(),
                config_path.display().to_string(),
                "--data".into(),
                data.display().to_string(),
                "--out".into(),
                out.display().to_string(),
            ],
            vec![
                "cluster-roles".into(),
                "--config".into(),
                config_path.display().to_string(),
                "--data".into(),
                data.display().to_string(),
                "--out".into(),
                dir.join("roles").display().to_string(),
                "--seed".into(),
                "5".into(),
            ],
            vec![
                "build-design".into(),
                "--config".into(),
                config_path.display().to_string(),
                "--data".into(),
                data.display().to_string(),
                "--clusters".into(),
                out.display().to_string(),
                "--mode".into(),
                "combos2".into(),
                "--out".into(),
                dir.join("design").display().to_string(),
            ],
            vec![
                "fit".into(),
                "--config".into(),
                config_path.display().to_string(),
                "--data".into(),
                data.display().to_string(),
                "--clusters".into(),
                out.display().to_string(),
                "--mode".into(),
                "combos2".into(),
                "--out".into(),
                dir.join("fit").display().to_string(),
                "--seed".into(),
                "21".into(),
                "--force".into(),
            ],
        ];
        for args in steps {
            let status = std::process::Command::new(bin)
                .args(&args)
                .status()
                .expect("spawn");
            assert!(status.success(), "stage {:?} failed", args.first());
        }
    };

    let dir_a = root.path().join("a");
    let dir_b = root.path().join("b");
    std::fs::create_dir_all(&dir_a).unwrap();
    std::fs::create_dir_all(&dir_b).unwrap();
    run(&dir_a);
    run(&dir_b);

    let hashes = |dir: &Path| -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(current) = stack.pop() {
            for entry in std::fs::read_dir(&current).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let rel = path.strip_prefix(dir).unwrap().display().to_string();
                    let bytes = std::fs::read(&path).unwrap();
                    out.insert(rel, format!("{:x}", md5ish(&bytes)));
                }
            }
        }
        out
    };
    let a = hashes(&dir_a);
    let b = hashes(&dir_b);
    assert_eq!(
        a.keys().collect::<Vec<_>>(),
        b.keys().collect::<Vec<_>>(),
        "artifact sets differ"
    );
    for (name, hash) in &a {
        assert_eq!(hash, &b[name], "artifact {name} differs between runs");
    }
    let elapsed = start.elapsed();
    println!(
        "PASS criterion 11: two full CLI runs byte-identical over {} artifacts ({elapsed:?})",
        a.len()
    );
}

/// Tiny deterministic content hash for comparing artifacts (not crypto).
fn md5ish(bytes: &[u8]) -> u128 {
    let mut h: u128 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u128;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[test]
fn c12_silhouette_sweep_recovers_three_archetypes() {
    let start = Instant::now();
    let spec = SynthConfig {
        archetypes: 3,
        players: 45,
        shots_per_player: 30,
        teams: 5,
        lineups_per_team: 10,
        ..SynthConfig::default()
    };
    let data = synthesize_dataset(&spec, 12).unwrap();
    let (ids, rows) = feature_matrix(&data.segments).unwrap();
    let model = fit_standardize_pca(&rows, 0.99).unwrap();
    let scores = pca_transform(&model, &rows).unwrap();
    let mut per_player: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for (id, score) in ids.iter().zip(scores) {
        per_player.entry(id.clone()).or_default().push(score);
    }
    let players: Vec<(String, EmpiricalDistribution)> = per_player
        .into_iter()
        .map(|(id, pts)| (id, EmpiricalDistribution::uniform(pts).unwrap()))
        .collect();
    let dm = pairwise_distance_matrix(&players, 1.0).unwrap();
    let dendrogram = ward_linkage(&dm).unwrap();
    let sweep = silhouette_sweep(&dm, &dendrogram, 2, 20).unwrap();
    let best = sweep
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(k, _)| k)
        .unwrap();
    assert_eq!(best, 3, "sweep: {sweep:?}");
    let elapsed = start.elapsed();
    println!("PASS criterion 12: silhouette sweep argmax 3 on 3-archetype data ({elapsed:?})");
}
