//! Per-layer support and value recovery shared by the MAP and MMSE-A-MAP decoders.
//!
//! Under a hypothesis the decoder observes `y_m ~ CN(x̃_m, σ²_m)` where
//! `x̃_m = a · q_m + γ_m` if index `m` carries value `a` of the current layer
//! and `x̃_m = γ_m` otherwise. For every candidate index the log-APP of
//! being non-zero is
//!
//! `log P_m = log [A_m p / (A_m p + B_m (1 − p))]`,
//! `A_m = (1/K) Σ_j exp(−|y_m − τ_{m,j}|²/σ²_m)`, `B_m = exp(−|y_m − γ_m|²/σ²_m)`,
//!
//! with `τ_{m,j} = a_j q_m + γ_m` and `p = K/|M̂|`. `log P_m` is increasing in
//! the log-likelihood ratio `λ_m = log(A_m p) − log(B_m (1 − p))`, which is
//! what the decoders rank by: it is computed from differences of squared
//! distances and never underflows.

use num_complex::Complex64;

use crate::combinatorics::unrank_multiset;
use crate::config::LayerConfig;
use crate::decoder::subset::{top_additive_subsets, SubsetChoice, SubsetObjective};
use crate::encoder::LayerAssignment;

/// Observation model of one layer under one hypothesis.
#[derive(Debug, Clone, Copy)]
pub struct LayerObservation<'a> {
    /// Decorrelated (and equalized) observation over all `M` indices.
    pub y: &'a [Complex64],
    /// `(Q_g)_{m,m}` for every index.
    pub q_diag: &'a [Complex64],
    /// Interference from earlier layers, `None` when it is zero.
    pub gamma: Option<&'a [Complex64]>,
    /// Effective noise variance per index.
    pub noise_var: &'a [f64],
}

impl LayerObservation<'_> {
    fn gamma(&self, m: usize) -> Complex64 {
        self.gamma.map_or(Complex64::new(0.0, 0.0), |g| g[m])
    }
}

/// Bits available to a layer: `2^{B_loc}` support ranks and `2^{B_val}` arrangements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerLimits {
    pub supports: u128,
    pub arrangements: u128,
}

/// A layer decision with its metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerDecision {
    pub assignment: LayerAssignment,
    /// Sum of the chosen indices' log-likelihood ratios.
    pub score: f64,
    /// `Σ_chosen log P_m + Σ_unchosen log(1 − P_m)` over the candidate set.
    pub log_posterior: f64,
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Log-likelihood ratio of index `m` carrying one of `values` versus zero.
pub fn index_llr(obs: &LayerObservation, m: usize, values: &[Complex64], prior: f64) -> f64 {
    let y = obs.y[m];
    let gamma = obs.gamma(m);
    let var = obs.noise_var[m];
    let base = (y - gamma).norm_sqr();
    // -(|y - τ_j|² - |y - γ|²)/σ² for every value, then a log-mean-exp.
    let mut max = f64::NEG_INFINITY;
    let exps: Vec<f64> = values
        .iter()
        .map(|a| {
            let tau = a * obs.q_diag[m] + gamma;
            let e = -((y - tau).norm_sqr() - base) / var;
            max = max.max(e);
            e
        })
        .collect();
    let lme = if max == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        max + (exps.iter().map(|e| (e - max).exp()).sum::<f64>() / values.len() as f64).ln()
    };
    lme + prior_logit(prior)
}

fn prior_logit(p: f64) -> f64 {
    if p >= 1.0 {
        0.0
    } else {
        (p / (1.0 - p)).ln()
    }
}

/// LLRs of every candidate index, in candidate order.
pub fn candidate_llrs(obs: &LayerObservation, layer: &LayerConfig, candidates: &[usize]) -> Vec<f64> {
    let values = layer.value_multiset();
    let prior = layer.sparsity as f64 / candidates.len() as f64;
    candidates.iter().map(|&m| index_llr(obs, m, &values, prior)).collect()
}

/// `Σ_chosen log P_m + Σ_unchosen log(1 − P_m)` from the candidate LLRs.
pub fn layer_log_posterior(llrs: &[f64], chosen: &[usize], sparsity: usize) -> f64 {
    if sparsity >= llrs.len() {
        return 0.0;
    }
    let chosen_sum: f64 = chosen.iter().map(|&p| llrs[p]).sum();
    chosen_sum - llrs.iter().map(|&l| softplus(l)).sum::<f64>()
}

/// The value arrangement `j*` minimizing `Σ_k |y_{i_k} − Γ_{j,k}|` with
/// `Γ_{j,k} = Σ_m a_{j,m} Q[i_k][i_m] + γ_{i_k}`; ties go to the lower rank.
///
/// `q_block(support)` returns the `K x K` restriction of `Q_g` and is only
/// called when more than one arrangement is admissible.
pub fn best_arrangement<F>(
    obs: &LayerObservation,
    layer: &LayerConfig,
    support: &[usize],
    arrangements: u128,
    q_block: F,
) -> LayerAssignment
where
    F: FnOnce(&[usize]) -> Vec<Vec<Complex64>>,
{
    let set = layer.multiset();
    let class_values = layer.class_values();
    let count = set.arrangement_count().unwrap_or(u128::MAX).min(arrangements).max(1);
    if count == 1 {
        let classes = unrank_multiset(0, &set).expect("rank 0 exists");
        return LayerAssignment {
            support: support.to_vec(),
            arrangement: 0,
            values: classes.iter().map(|&c| class_values[c]).collect(),
        };
    }
    let q = q_block(support);
    let mut best: Option<(f64, u128, Vec<Complex64>)> = None;
    for rank in 0..count {
        let classes = unrank_multiset(rank, &set).expect("rank below count");
        let values: Vec<Complex64> = classes.iter().map(|&c| class_values[c]).collect();
        let cost: f64 = support
            .iter()
            .enumerate()
            .map(|(k, &ik)| {
                let gamma_k: Complex64 = values.iter().enumerate().map(|(m, a)| a * q[k][m]).sum();
                (obs.y[ik] - gamma_k - obs.gamma(ik)).norm()
            })
            .sum();
        if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
            best = Some((cost, rank, values));
        }
    }
    let (_, arrangement, values) = best.expect("at least one arrangement");
    LayerAssignment {
        support: support.to_vec(),
        arrangement,
        values,
    }
}

fn decision_from_choice<F>(
    obs: &LayerObservation,
    layer: &LayerConfig,
    candidates: &[usize],
    llrs: &[f64],
    choice: &SubsetChoice,
    limits: LayerLimits,
    q_block: F,
) -> LayerDecision
where
    F: FnOnce(&[usize]) -> Vec<Vec<Complex64>>,
{
    let support: Vec<usize> = choice.positions.iter().map(|&p| candidates[p]).collect();
    let assignment = best_arrangement(obs, layer, &support, limits.arrangements, q_block);
    LayerDecision {
        assignment,
        score: choice.value,
        log_posterior: layer_log_posterior(llrs, &choice.positions, layer.sparsity),
    }
}

/// The `K_ℓ` candidates with the largest LLR sum among encoder-reachable
/// supports (the plain top-`K_ℓ` whenever that support is reachable), then
/// the best arrangement on them. `None` only if no support is reachable.
pub fn decode_layer<F>(
    obs: &LayerObservation,
    layer: &LayerConfig,
    candidates: &[usize],
    limits: LayerLimits,
    q_block: F,
) -> Option<LayerDecision>
where
    F: FnOnce(&[usize]) -> Vec<Vec<Complex64>>,
{
    let llrs = candidate_llrs(obs, layer, candidates);
    let choice = SubsetObjective::additive(&llrs).best_reachable(layer.sparsity, limits.supports)?;
    Some(decision_from_choice(obs, layer, candidates, &llrs, &choice, limits, q_block))
}

/// Up to `width` alternative decisions for one layer, best log-posterior first.
pub fn decode_layer_alternatives<F>(
    obs: &LayerObservation,
    layer: &LayerConfig,
    candidates: &[usize],
    limits: LayerLimits,
    width: usize,
    q_block: F,
) -> Vec<LayerDecision>
where
    F: Fn(&[usize]) -> Vec<Vec<Complex64>>,
{
    let llrs = candidate_llrs(obs, layer, candidates);
    top_additive_subsets(&llrs, layer.sparsity, width, limits.supports)
        .iter()
        .map(|c| decision_from_choice(obs, layer, candidates, &llrs, c, limits, &q_block))
        .collect()
}
