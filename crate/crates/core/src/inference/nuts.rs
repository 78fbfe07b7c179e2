//! No-U-turn sampler: dynamic Hamiltonian Monte Carlo with slice-sampled
//! trajectory selection, dual-averaging step-size adaptation, and windowed
//! diagonal mass-matrix estimation during warmup.
//!
//! Each chain is a pure function of its derived seed, so runs are
//! reproducible regardless of how chains are scheduled.

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{center_draw, log_posterior_noncentered, HierarchicalModelSpec, ModelData};
use crate::config::McmcConfig;
use crate::{Error, Result};

/// Energy-error threshold marking a divergent leapfrog trajectory.
const DELTA_MAX: f64 = 1000.0;
/// Fraction of post-warmup divergent transitions that rejects the fit.
const DIVERGENCE_REJECT_FRACTION: f64 = 0.10;

/// A differentiable unnormalized log density.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;
    fn logp_grad(&self, position: &[f64]) -> (f64, Vec<f64>);
}

#[derive(Debug, Clone, Copy)]
pub struct NutsConfig {
    pub warmup: usize,
    pub draws: usize,
    pub target_accept: f64,
    pub max_tree_depth: usize,
}

impl From<&McmcConfig> for NutsConfig {
    fn from(cfg: &McmcConfig) -> Self {
        Self {
            warmup: cfg.warmup,
            draws: cfg.draws,
            target_accept: cfg.target_accept,
            max_tree_depth: cfg.max_tree_depth,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainStats {
    /// Divergent transitions after warmup.
    pub divergences: usize,
    /// Step size in force after adaptation.
    pub step_size: f64,
    /// Post-warmup transitions that exhausted the tree depth.
    pub max_depth_hits: usize,
    pub mean_tree_depth: f64,
}

#[derive(Debug, Clone)]
pub struct PosteriorSamples {
    pub param_names: Vec<String>,
    /// chain -> iteration -> parameter.
    pub chains: Vec<Vec<Vec<f64>>>,
    pub stats: Vec<ChainStats>,
}

impl PosteriorSamples {
    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn n_iterations(&self) -> usize {
        self.chains.first().map_or(0, Vec::len)
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| n == name)
    }

    /// One chain's series for a parameter.
    pub fn chain_series(&self, chain: usize, param: usize) -> Vec<f64> {
        self.chains[chain].iter().map(|draw| draw[param]).collect()
    }

    /// All chains pooled, chain-major order.
    pub fn pooled(&self, param: usize) -> Vec<f64> {
        self.chains
            .iter()
            .flat_map(|chain| chain.iter().map(move |draw| draw[param]))
            .collect()
    }

    pub fn mean(&self, param: usize) -> f64 {
        let pooled = self.pooled(param);
        pooled.iter().sum::<f64>() / pooled.len() as f64
    }

    pub fn sd(&self, param: usize) -> f64 {
        let pooled = self.pooled(param);
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        (pooled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    /// Empirical quantile (linear interpolation) over pooled draws.
    pub fn quantile(&self, param: usize, q: f64) -> f64 {
        let mut pooled = self.pooled(param);
        pooled.sort_by(f64::total_cmp);
        let n = pooled.len();
        if n == 1 {
            return pooled[0];
        }
        let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let w = pos - lo as f64;
        pooled[lo] * (1.0 - w) + pooled[hi] * w
    }

    pub fn total_divergences(&self) -> usize {
        self.stats.iter().map(|s| s.divergences).sum()
    }
}

/// Run independent NUTS chains. Chain c uses a seed derived from
/// (seed, c), so the result does not depend on scheduling.
pub fn sample_chains<T: LogDensity>(
    target: &T,
    inits: &[Vec<f64>],
    param_names: Vec<String>,
    cfg: &NutsConfig,
    seed: u64,
) -> Result<PosteriorSamples> {
    if inits.len() < 2 {
        return Err(Error::Inference(format!(
            "need at least 2 chains, got {}",
            inits.len()
        )));
    }
    for init in inits {
        if init.len() != target.dim() {
            return Err(Error::Inference(
                "initial position has wrong dimension".to_string(),
            ));
        }
        let (logp, _) = target.logp_grad(init);
        if !logp.is_finite() {
            return Err(Error::Inference(
                "initial position has non-finite log density".to_string(),
            ));
        }
    }
    let results: Vec<(Vec<Vec<f64>>, ChainStats)> = inits
        .par_iter()
        .enumerate()
        .map(|(c, init)| {
            let chain_seed = seed.wrapping_add((c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rng = ChaCha20Rng::seed_from_u64(chain_seed);
            run_chain(target, init, cfg, &mut rng)
        })
        .collect();

    let (chains, stats): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    if chains
        .iter()
        .flatten()
        .flatten()
        .any(|v: &f64| !v.is_finite())
    {
        return Err(Error::Inference("sampler produced non-finite draws".to_string()));
    }
    Ok(PosteriorSamples {
        param_names,
        chains,
        stats,
    })
}

/// Fit the hierarchical model. The fit is rejected when more than 10% of
/// post-warmup transitions diverge.
pub fn nuts_sample(
    spec: &HierarchicalModelSpec,
    data: &ModelData,
    mcmc: &McmcConfig,
) -> Result<PosteriorSamples> {
    spec.check()?;
    data.check(spec)?;
    if mcmc.chains < 2 {
        return Err(Error::Inference(format!(
            "need at least 2 chains, got {}",
            mcmc.chains
        )));
    }
    let layout = spec.layout();
    let target = HierarchicalTarget { spec, data };

    let n = data.y.len().max(1) as f64;
    let y_mean = data.y.iter().sum::<f64>() / n;
    let y_sd = (data.y.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n)
        .sqrt()
        .max(1e-3);

    let mut init_rng = ChaCha20Rng::seed_from_u64(mcmc.seed ^ 0x5EED_1717_0000_0001);
    let inits: Vec<Vec<f64>> = (0..mcmc.chains)
        .map(|_| {
            let mut p = vec![0.0; layout.dim];
            for t in 0..layout.n_teams {
                p[layout.alpha(t)] = y_mean + init_rng.sample::<f64, _>(StandardNormal);
            }
            for f in 0..layout.n_features {
                p[layout.mu_beta(f)] = 0.1 * init_rng.sample::<f64, _>(StandardNormal);
            }
            for t in 0..layout.n_teams {
                for f in 0..layout.n_features {
                    p[layout.beta(t, f)] = 0.1 * init_rng.sample::<f64, _>(StandardNormal);
                }
            }
            for k in 0..layout.n_sigma {
                p[layout.log_sigma_start + k] = 0.1 * init_rng.sample::<f64, _>(StandardNormal);
            }
            p[layout.log_epsilon] = y_sd.ln() + 0.1 * init_rng.sample::<f64, _>(StandardNormal);
            p
        })
        .collect();

    let mut samples = sample_chains(
        &target,
        &inits,
        layout.param_names(),
        &NutsConfig::from(mcmc),
        mcmc.seed,
    )?;
    // the sampler runs non-centered; report centered beta draws
    for chain in samples.chains.iter_mut() {
        for draw in chain.iter_mut() {
            *draw = center_draw(&layout, draw);
        }
    }

    let total: usize = samples.total_divergences();
    let budget = mcmc.chains * mcmc.draws;
    if total as f64 > DIVERGENCE_REJECT_FRACTION * budget as f64 {
        let per_chain: Vec<String> = samples
            .stats
            .iter()
            .enumerate()
            .map(|(c, s)| format!("chain {c}: {} divergences, step size {:.3e}", s.divergences, s.step_size))
            .collect();
        return Err(Error::SamplerRejected(format!(
            "{total} of {budget} post-warmup transitions diverged (> {:.0}%); {}",
            DIVERGENCE_REJECT_FRACTION * 100.0,
            per_chain.join("; ")
        )));
    }
    Ok(samples)
}

struct HierarchicalTarget<'a> {
    spec: &'a HierarchicalModelSpec,
    data: &'a ModelData,
}

impl LogDensity for HierarchicalTarget<'_> {
    fn dim(&self) -> usize {
        self.spec.layout().dim
    }

    fn logp_grad(&self, position: &[f64]) -> (f64, Vec<f64>) {
        log_posterior_noncentered(self.spec, self.data, position)
    }
}

// --- single chain ---

#[derive(Clone)]
struct End {
    theta: Vec<f64>,
    r: Vec<f64>,
    grad: Vec<f64>,
}

#[derive(Clone)]
struct Proposal {
    theta: Vec<f64>,
    logp: f64,
    grad: Vec<f64>,
}

struct TreeResult {
    minus: End,
    plus: End,
    prop: Proposal,
    n: u64,
    s: bool,
    alpha: f64,
    n_alpha: u64,
    divergent: bool,
}

struct Integrator<'a, T: LogDensity> {
    target: &'a T,
    inv_mass: Vec<f64>,
    evals: u64,
}

impl<'a, T: LogDensity> Integrator<'a, T> {
    fn kinetic(&self, r: &[f64]) -> f64 {
        0.5 * r
            .iter()
            .zip(&self.inv_mass)
            .map(|(ri, im)| ri * ri * im)
            .sum::<f64>()
    }

    fn sample_momentum(&self, rng: &mut ChaCha20Rng) -> Vec<f64> {
        self.inv_mass
            .iter()
            .map(|im| rng.sample::<f64, _>(StandardNormal) / im.sqrt())
            .collect()
    }

    /// One leapfrog step of signed size eps from (theta, r, grad).
    fn leapfrog(&mut self, end: &End, eps: f64) -> (End, f64) {
        let dim = end.theta.len();
        let mut r_half = vec![0.0; dim];
        for i in 0..dim {
            r_half[i] = end.r[i] + 0.5 * eps * end.grad[i];
        }
        let mut theta = vec![0.0; dim];
        for i in 0..dim {
            theta[i] = end.theta[i] + eps * self.inv_mass[i] * r_half[i];
        }
        let (logp, grad) = self.target.logp_grad(&theta);
        self.evals += 1;
        let mut r = r_half;
        for i in 0..dim {
            r[i] += 0.5 * eps * grad[i];
        }
        (End { theta, r, grad }, logp)
    }

    fn no_uturn(&self, minus: &End, plus: &End) -> bool {
        let mut fwd = 0.0;
        let mut bwd = 0.0;
        for i in 0..minus.theta.len() {
            let d = plus.theta[i] - minus.theta[i];
            fwd += d * self.inv_mass[i] * plus.r[i];
            bwd += d * self.inv_mass[i] * minus.r[i];
        }
        fwd >= 0.0 && bwd >= 0.0
    }

    #[allow(clippy::too_many_arguments)]
    fn build_tree(
        &mut self,
        from: &End,
        log_u: f64,
        dir: f64,
        depth: usize,
        eps: f64,
        joint0: f64,
        rng: &mut ChaCha20Rng,
    ) -> TreeResult {
        if depth == 0 {
            let (end, logp) = self.leapfrog(from, dir * eps);
            let joint = logp - self.kinetic(&end.r);
            let n = u64::from(log_u <= joint);
            let divergent = !(log_u < joint + DELTA_MAX);
            let alpha = if joint.is_finite() {
                (joint - joint0).exp().min(1.0)
            } else {
                0.0
            };
            let prop = Proposal {
                theta: end.theta.clone(),
                logp,
                grad: end.grad.clone(),
            };
            return TreeResult {
                minus: end.clone(),
                plus: end,
                prop,
                n,
                s: !divergent,
                alpha,
                n_alpha: 1,
                divergent,
            };
        }

        let mut first = self.build_tree(from, log_u, dir, depth - 1, eps, joint0, rng);
        if !first.s {
            return first;
        }
        let far_end = if dir < 0.0 {
            first.minus.clone()
        } else {
            first.plus.clone()
        };
        let second = self.build_tree(&far_end, log_u, dir, depth - 1, eps, joint0, rng);

        let (minus, plus) = if dir < 0.0 {
            (second.minus.clone(), first.plus.clone())
        } else {
            (first.minus.clone(), second.plus.clone())
        };
        let total = first.n + second.n;
        let prop = if second.n > 0 && rng.gen::<f64>() * (total as f64) < second.n as f64 {
            second.prop
        } else {
            first.prop
        };
        first.minus = minus;
        first.plus = plus;
        TreeResult {
            s: second.s && self.no_uturn(&first.minus, &first.plus),
            prop,
            n: total,
            alpha: first.alpha + second.alpha,
            n_alpha: first.n_alpha + second.n_alpha,
            divergent: first.divergent || second.divergent,
            minus: first.minus,
            plus: first.plus,
        }
    }
}

struct DualAveraging {
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    m: f64,
    delta: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps0: f64, delta: f64) -> Self {
        Self {
            mu: (10.0 * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            m: 0.0,
            delta,
        }
    }

    fn update(&mut self, accept_ratio: f64) {
        self.m += 1.0;
        let frac = 1.0 / (self.m + Self::T0);
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (self.delta - accept_ratio);
        self.log_eps = self.mu - self.m.sqrt() / Self::GAMMA * self.h_bar;
        let w = self.m.powf(-Self::KAPPA);
        self.log_eps_bar = w * self.log_eps + (1.0 - w) * self.log_eps_bar;
    }

    fn current(&self) -> f64 {
        self.log_eps.exp()
    }

    fn adapted(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

/// Heuristic initial step size: double or halve until one leapfrog step
/// crosses a 1/2 acceptance ratio.
fn find_reasonable_epsilon<T: LogDensity>(
    integrator: &mut Integrator<'_, T>,
    start: &End,
    logp0: f64,
    rng: &mut ChaCha20Rng,
) -> f64 {
    let mut eps = 1.0;
    let r = integrator.sample_momentum(rng);
    let state = End {
        theta: start.theta.clone(),
        r,
        grad: start.grad.clone(),
    };
    let joint0 = logp0 - integrator.kinetic(&state.r);
    let step_ratio = |integrator: &mut Integrator<'_, T>, eps: f64| -> f64 {
        let (end, logp) = integrator.leapfrog(&state, eps);
        let joint = logp - integrator.kinetic(&end.r);
        (joint - joint0).exp()
    };
    let mut ratio = step_ratio(integrator, eps);
    while !ratio.is_finite() && eps > 1e-10 {
        eps *= 0.5;
        ratio = step_ratio(integrator, eps);
    }
    let a: f64 = if ratio > 0.5 { 1.0 } else { -1.0 };
    for _ in 0..200 {
        if ratio.powf(a) <= 2.0f64.powf(-a) || !(1e-10..=1e10).contains(&eps) {
            break;
        }
        eps *= 2.0f64.powf(a);
        ratio = step_ratio(integrator, eps);
        if !ratio.is_finite() {
            eps *= 0.5;
            break;
        }
    }
    eps.clamp(1e-10, 1e10)
}

/// Stan-style slow windows for mass estimation: 75 fast iterations, doubling
/// windows from 25, and a 50-iteration terminal buffer. Short warmups skip
/// mass adaptation entirely.
fn slow_windows(warmup: usize) -> Vec<(usize, usize)> {
    const INIT: usize = 75;
    const TERM: usize = 50;
    const BASE: usize = 25;
    if warmup < INIT + TERM + BASE {
        return Vec::new();
    }
    let mut windows = Vec::new();
    let mut start = INIT;
    let mut width = BASE;
    loop {
        if start + width + 2 * width > warmup - TERM {
            windows.push((start, warmup - TERM));
            break;
        }
        windows.push((start, start + width));
        start += width;
        width *= 2;
    }
    windows
}

fn run_chain<T: LogDensity>(
    target: &T,
    init: &[f64],
    cfg: &NutsConfig,
    rng: &mut ChaCha20Rng,
) -> (Vec<Vec<f64>>, ChainStats) {
    let dim = target.dim();
    let mut integrator = Integrator {
        target,
        inv_mass: vec![1.0; dim],
        evals: 0,
    };
    let (logp0, grad0) = target.logp_grad(init);
    assert!(
        logp0.is_finite(),
        "initial position has non-finite log density"
    );
    let mut current = Proposal {
        theta: init.to_vec(),
        logp: logp0,
        grad: grad0,
    };

    let start = End {
        theta: current.theta.clone(),
        r: vec![0.0; dim],
        grad: current.grad.clone(),
    };
    let eps0 = find_reasonable_epsilon(&mut integrator, &start, current.logp, rng);
    let mut da = DualAveraging::new(eps0, cfg.target_accept);

    let windows = slow_windows(cfg.warmup);
    let mut window_idx = 0;
    let mut welford = Welford::new(dim);

    let mut draws = Vec::with_capacity(cfg.draws);
    let mut stats = ChainStats {
        divergences: 0,
        step_size: 0.0,
        max_depth_hits: 0,
        mean_tree_depth: 0.0,
    };
    let mut depth_total = 0usize;
    let mut post_eps = eps0;

    for iter in 0..cfg.warmup + cfg.draws {
        let warming = iter < cfg.warmup;
        let eps = if warming { da.current() } else { post_eps };
        let (next, info) = nuts_transition(&mut integrator, &current, eps, cfg.max_tree_depth, rng);
        current = next;

        if warming {
            da.update(info.accept_ratio);
            if let Some(&(w_start, w_end)) = windows.get(window_idx) {
                if iter >= w_start {
                    welford.push(&current.theta);
                }
                if iter + 1 == w_end {
                    integrator.inv_mass = welford.regularized_variance();
                    welford = Welford::new(dim);
                    window_idx += 1;
                    // restart step-size adaptation around the current value
                    da = DualAveraging::new(da.current().max(1e-10), cfg.target_accept);
                }
            }
            if iter + 1 == cfg.warmup {
                post_eps = da.adapted().clamp(1e-10, 1e10);
            }
        } else {
            draws.push(current.theta.clone());
            if info.divergent {
                stats.divergences += 1;
            }
            if info.depth >= cfg.max_tree_depth {
                stats.max_depth_hits += 1;
            }
            depth_total += info.depth;
        }
    }

    stats.step_size = post_eps;
    stats.mean_tree_depth = depth_total as f64 / cfg.draws.max(1) as f64;
    (draws, stats)
}

struct TransitionInfo {
    accept_ratio: f64,
    divergent: bool,
    depth: usize,
}

fn nuts_transition<T: LogDensity>(
    integrator: &mut Integrator<'_, T>,
    current: &Proposal,
    eps: f64,
    max_depth: usize,
    rng: &mut ChaCha20Rng,
) -> (Proposal, TransitionInfo) {
    let r0 = integrator.sample_momentum(rng);
    let joint0 = current.logp - integrator.kinetic(&r0);
    // log u = joint0 - Exp(1) gives u ~ Uniform(0, exp(joint0))
    let log_u = joint0 + rng.gen::<f64>().ln();

    let mut minus = End {
        theta: current.theta.clone(),
        r: r0.clone(),
        grad: current.grad.clone(),
    };
    let mut plus = minus.clone();
    let mut prop = current.clone();
    let mut n: u64 = 1;
    let mut s = true;
    let mut depth = 0;
    let mut divergent = false;
    let mut accept_ratio = 0.0;

    while s && depth < max_depth {
        let dir: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let from = if dir < 0.0 { &minus } else { &plus };
        let tree = integrator.build_tree(from, log_u, dir, depth, eps, joint0, rng);
        if dir < 0.0 {
            minus = tree.minus.clone();
        } else {
            plus = tree.plus.clone();
        }
        if tree.s && rng.gen::<f64>() * (n as f64) < tree.n as f64 {
            prop = tree.prop.clone();
        }
        n += tree.n;
        divergent |= tree.divergent;
        accept_ratio = tree.alpha / tree.n_alpha.max(1) as f64;
        s = tree.s && integrator.no_uturn(&minus, &plus);
        depth += 1;
    }

    (
        prop,
        TransitionInfo {
            accept_ratio,
            divergent,
            depth,
        },
    )
}

struct Welford {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Self {
            n: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        for i in 0..x.len() {
            let d = x[i] - self.mean[i];
            self.mean[i] += d / self.n;
            self.m2[i] += d * (x[i] - self.mean[i]);
        }
    }

    /// Shrunk variance estimate, bounded away from zero.
    fn regularized_variance(&self) -> Vec<f64> {
        if self.n < 2.0 {
            return vec![1.0; self.mean.len()];
        }
        let w = self.n / (self.n + 5.0);
        self.m2
            .iter()
            .map(|m2| (w * m2 / (self.n - 1.0) + 1e-3 * (1.0 - w)).max(1e-10))
            .collect()
    }
}
