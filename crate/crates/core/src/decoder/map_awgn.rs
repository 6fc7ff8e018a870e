//! Two-stage MAP decoding over the AWGN channel.
//!
//! Stage one decorrelates `y` under every block hypothesis, `y_g = U_g† y`,
//! which restores the sparse message plus white noise of the same variance,
//! and recovers the layers one after another. Stage two re-encodes each
//! estimate and keeps the block with the smallest residual `‖y − U_g x̂_g‖`.

use num_complex::Complex64;

use crate::decoder::layered::{decode_layer, LayerDecision, LayerLimits, LayerObservation};
use crate::decoder::{argmin_residual, floor_variance, Decoded, HypothesisEstimate};
use crate::dictionary::Dictionary;
use crate::encoder::{BossCode, SparseMessage};
use crate::error::Result;
use crate::par::{map_indexed, Exec};

/// `U_g† y`.
pub fn decorrelate(dict: &Dictionary, g: usize, y: &[Complex64]) -> Result<Vec<Complex64>> {
    dict.adjoint(g, y)
}

/// Limits of layer `l` of `code`.
pub(crate) fn layer_limits(code: &BossCode, l: usize) -> LayerLimits {
    let b = code.budget();
    LayerLimits {
        supports: 1u128 << b.per_layer_loc[l],
        arrangements: 1u128 << b.per_layer_val[l],
    }
}

fn identity_block(support: &[usize]) -> Vec<Vec<Complex64>> {
    let k = support.len();
    (0..k)
        .map(|i| (0..k).map(|j| Complex64::new((i == j) as u8 as f64, 0.0)).collect())
        .collect()
}

/// Decodes layer `l` from the decorrelated observation `y_g`, given the
/// supports already assigned to earlier layers.
pub fn layer_decode_awgn(
    code: &BossCode,
    y_g: &[Complex64],
    l: usize,
    prior_supports: &[usize],
    sigma_v_sq: f64,
) -> Option<LayerDecision> {
    let m = code.m();
    let q = vec![Complex64::new(1.0, 0.0); m];
    let var = vec![floor_variance(sigma_v_sq); m];
    let obs = LayerObservation {
        y: y_g,
        q_diag: &q,
        gamma: None,
        noise_var: &var,
    };
    let cfg = code.config();
    let candidates = cfg.candidate_set(l, prior_supports);
    decode_layer(&obs, &cfg.layers[l], &candidates, layer_limits(code, l), identity_block)
}

/// Layers of one hypothesis; `None` if some layer has no reachable support.
fn decode_hypothesis(code: &BossCode, y: &[Complex64], g: usize, sigma_v_sq: f64) -> Result<Option<HypothesisEstimate>> {
    let dict = code.dictionary();
    let y_g = decorrelate(dict, g, y)?;
    let mut prior = Vec::new();
    let mut layers = Vec::with_capacity(code.config().num_layers());
    let mut score = 0.0;
    for l in 0..code.config().num_layers() {
        let Some(d) = layer_decode_awgn(code, &y_g, l, &prior, sigma_v_sq) else {
            return Ok(None);
        };
        prior.extend_from_slice(&d.assignment.support);
        score += d.log_posterior;
        layers.push(d.assignment);
    }
    let msg = SparseMessage { block: g, layers };
    let c = dict.forward(g, &msg.dense(code.m()))?;
    let residual = y.iter().zip(&c).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Ok(Some(HypothesisEstimate {
        g,
        msg,
        score,
        residual,
    }))
}

/// Two-stage MAP decision over all encoder-reachable blocks.
pub fn decode_map_awgn(code: &BossCode, y: &[Complex64], sigma_v_sq: f64, exec: Exec) -> Result<Decoded> {
    let hyps = map_indexed(exec, code.reachable_blocks(), |g| decode_hypothesis(code, y, g, sigma_v_sq));
    let hypotheses: Vec<HypothesisEstimate> = hyps.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    // Every layer has at least one reachable support in a valid code.
    let best = argmin_residual(&hypotheses);
    Ok(Decoded {
        msg: hypotheses[best].msg.clone(),
        hypotheses,
    })
}
