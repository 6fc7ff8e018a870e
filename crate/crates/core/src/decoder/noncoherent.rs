//! Pilot-free SIMO decoding: quasi-ML, the non-coherent sphere decoder (NSD)
//! and a coherent-ML reference with perfect channel knowledge.
//!
//! For a single-layer code with one value `α`, quasi-ML maximizes
//! `x̂ᵀ K̃_g x̂ = |α|² Σ_{i,j∈S} K̃_ij` with `K̃_g = Σ_n y_g^[n] y_g^[n]†` and
//! `y_g^[n] = U_g† y^[n]`. Hermitian symmetry makes the sum real, so the
//! decoders work with `Re K̃`. Only encoder-reachable supports (rank below
//! `2^{B_loc}`) are considered.

use num_complex::Complex64;

use crate::combinatorics::{binomial, rank_combination};
use crate::decoder::subset::{for_each_subset, SubsetObjective};
use crate::decoder::{argmin_residual, Decoded, HypothesisEstimate};
use crate::dictionary::Dictionary;
use crate::encoder::{u128_to_bits, BossCode, LayerAssignment, SparseMessage};
use crate::error::{BossError, Result};
use crate::par::{map_indexed, Exec};

/// `K̃_g`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub m: usize,
    pub k_tilde: Vec<Complex64>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.k_tilde[i * self.m + j]
    }

    /// `max |K̃_ij − conj(K̃_ji)|`.
    pub fn hermitian_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            for j in 0..self.m {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `Re K̃` restricted to the first `n` indices, row-major.
    fn real_part(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.get(i, j).re;
            }
        }
        out
    }

    /// `Σ_{i,j∈S} Re K̃_ij`.
    pub fn support_sum(&self, s: &[usize]) -> f64 {
        s.iter().map(|&i| s.iter().map(|&j| self.get(i, j).re).sum::<f64>()).sum()
    }
}

/// `K̃_g` from the antenna outputs.
pub fn correlation_matrix(dict: &Dictionary, g: usize, ys: &[Vec<Complex64>]) -> Result<CorrelationMatrix> {
    let m = dict.m();
    let mut k = vec![Complex64::new(0.0, 0.0); m * m];
    for y in ys {
        let yg = dict.adjoint(g, y)?;
        for i in 0..m {
            let yi = yg[i];
            let row = &mut k[i * m..(i + 1) * m];
            for (kij, yj) in row.iter_mut().zip(&yg) {
                *kij += yi * yj.conj();
            }
        }
    }
    Ok(CorrelationMatrix { m, k_tilde: k })
}

/// `Re K̃_g` restricted to the first `n` indices, row-major. It is the Gram
/// matrix of the stacked real and imaginary parts of the decorrelated antenna
/// outputs, so only one triangle is computed and the result is exactly symmetric.
fn real_correlation(dict: &Dictionary, g: usize, ys: &[Vec<Complex64>], n: usize) -> Result<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(2 * ys.len());
    for y in ys {
        let yg = dict.adjoint(g, y)?;
        cols.push(yg[..n].iter().map(|v| v.re).collect());
        cols.push(yg[..n].iter().map(|v| v.im).collect());
    }
    let mut re = vec![0.0; n * n];
    for c in &cols {
        for i in 0..n {
            let ci = c[i];
            let row = &mut re[i * n..i * n + i + 1];
            for (r, cj) in row.iter_mut().zip(&c[..=i]) {
                *r += ci * cj;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            re[j * n + i] = re[i * n + j];
        }
    }
    Ok(re)
}

/// Sum of the `k` largest entries of `vals`.
fn top_sum(vals: &[f64], k: usize) -> f64 {
    let mut v = vals.to_vec();
    let (top, kth, _) = v.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    top.iter().sum::<f64>() + *kth
}

/// Anchors and candidate supports of the sphere decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSet {
    /// The `T` indices with the largest `Y_i`, ascending.
    pub anchor_indices: Vec<usize>,
    pub k: usize,
}

impl SphereSet {
    /// Ranks indices `0..n` by `Y_i = R_i + C_i`, the sums of the `k`
    /// largest entries of `Re K̃` in row and column `i` (diagonal included),
    /// and keeps the top `t` (ties to the lower index).
    pub fn build(k_tilde: &CorrelationMatrix, n: usize, k: usize, t: usize) -> Self {
        let re = k_tilde.real_part(n);
        let mut re_t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                re_t[j * n + i] = re[i * n + j];
            }
        }
        let y: Vec<f64> = (0..n)
            .map(|i| top_sum(&re[i * n..(i + 1) * n], k) + top_sum(&re_t[i * n..(i + 1) * n], k))
            .collect();
        Self::from_scores(&y, k, t)
    }

    /// Same as [`SphereSet::build`] for a symmetric `n × n` matrix `re = Re K̃`,
    /// whose row and column sums coincide.
    pub fn build_symmetric(re: &[f64], n: usize, k: usize, t: usize) -> Self {
        let y: Vec<f64> = (0..n).map(|i| 2.0 * top_sum(&re[i * n..(i + 1) * n], k)).collect();
        Self::from_scores(&y, k, t)
    }

    fn from_scores(y: &[f64], k: usize, t: usize) -> Self {
        let mut order: Vec<usize> = (0..y.len()).collect();
        order.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
        let mut anchor_indices = order[..t].to_vec();
        anchor_indices.sort_unstable();
        SphereSet { anchor_indices, k }
    }

    /// `C(T, K)`.
    pub fn candidate_count(&self) -> u128 {
        binomial(self.anchor_indices.len(), self.k).unwrap_or(u128::MAX)
    }

    /// Every `K`-subset of the anchors, in lexicographic order.
    pub fn candidates(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for_each_subset(self.anchor_indices.len(), self.k, |s| {
            out.push(s.iter().map(|&p| self.anchor_indices[p]).collect());
        });
        out
    }
}

/// `(K, |α|², candidate cardinality, reachable support count)` of a code the
/// non-coherent decoders accept.
fn single_layer_params(code: &BossCode) -> Result<(usize, Complex64, usize, u128)> {
    let cfg = code.config();
    if !cfg.is_single_layer_singleton() {
        return Err(BossError::UnsupportedConfig(
            "non-coherent decoding needs a single layer with a one-value alphabet".into(),
        ));
    }
    let layer = &cfg.layers[0];
    Ok((layer.sparsity, layer.alphabet[0], layer.candidate_cardinality, code.reachable_supports(0)))
}

fn check_antennas(code: &BossCode, ys: &[Vec<Complex64>]) -> Result<()> {
    if ys.is_empty() {
        return Err(BossError::ParameterOutOfRange("at least one antenna output is required".into()));
    }
    for y in ys {
        if y.len() != code.m() {
            return Err(BossError::WrongLength {
                expected: code.m(),
                got: y.len(),
            });
        }
    }
    Ok(())
}

fn message(block: usize, support: Vec<usize>, alpha: Complex64) -> SparseMessage {
    let values = vec![alpha; support.len()];
    SparseMessage {
        block,
        layers: vec![LayerAssignment {
            support,
            arrangement: 0,
            values,
        }],
    }
}

/// Winner by largest score; `residual = −score` so ties keep the lower block.
fn finish(hypotheses: Vec<HypothesisEstimate>) -> Decoded {
    let best = argmin_residual(&hypotheses);
    Decoded {
        msg: hypotheses[best].msg.clone(),
        hypotheses,
    }
}

/// Quasi-ML over all reachable blocks and supports.
pub fn quasi_ml_decode(code: &BossCode, ys: &[Vec<Complex64>], exec: Exec) -> Result<Decoded> {
    let (k, alpha, card, limit) = single_layer_params(code)?;
    check_antennas(code, ys)?;
    let hyps = map_indexed(exec, code.reachable_blocks(), |g| -> Result<HypothesisEstimate> {
        let re = real_correlation(code.dictionary(), g, ys, card)?;
        let diag: Vec<f64> = (0..card).map(|i| re[i * card + i]).collect();
        let obj = SubsetObjective { diag: &diag, pair: Some(&re) };
        let best = obj.best_reachable(k, limit).expect("rank zero is reachable");
        let score = alpha.norm_sqr() * best.value;
        Ok(HypothesisEstimate {
            g,
            msg: message(g, best.positions, alpha),
            score,
            residual: -score,
        })
    });
    Ok(finish(hyps.into_iter().collect::<Result<Vec<_>>>()?))
}

/// NSD with sphere parameter `t`: quasi-ML restricted to `K`-subsets of the
/// `t` anchors. Falls back to the best unreachable sphere candidate only if
/// no hypothesis has a reachable one.
pub fn nsd_decode(code: &BossCode, ys: &[Vec<Complex64>], t: usize, exec: Exec) -> Result<Decoded> {
    let (k, alpha, card, limit) = single_layer_params(code)?;
    check_antennas(code, ys)?;
    if t < k || t > card {
        return Err(BossError::ParameterOutOfRange(format!(
            "sphere parameter T={t} must satisfy K={k} <= T <= {card}"
        )));
    }
    let hyps = map_indexed(exec, code.reachable_blocks(), |g| -> Result<(Option<HypothesisEstimate>, Option<HypothesisEstimate>)> {
        let full = real_correlation(code.dictionary(), g, ys, card)?;
        let sphere = SphereSet::build_symmetric(&full, card, k, t);
        let anchors = &sphere.anchor_indices;
        let n = anchors.len();
        let mut re = vec![0.0; n * n];
        for (a, &i) in anchors.iter().enumerate() {
            for (b, &j) in anchors.iter().enumerate() {
                re[a * n + b] = full[i * card + j];
            }
        }
        let diag: Vec<f64> = (0..n).map(|a| re[a * n + a]).collect();
        let obj = SubsetObjective { diag: &diag, pair: Some(&re) };
        let estimate = |positions: Vec<usize>, value: f64| {
            let score = alpha.norm_sqr() * value;
            HypothesisEstimate {
                g,
                msg: message(g, positions, alpha),
                score,
                residual: -score,
            }
        };
        let reachable = obj
            .best_reachable_embedded(k, limit, anchors, card)
            .map(|c| estimate(c.positions, c.value));
        let any = match reachable {
            Some(_) => None,
            None => obj
                .best_reachable_embedded(k, u128::MAX, anchors, card)
                .map(|c| estimate(c.positions, c.value)),
        };
        Ok((reachable, any))
    });
    let hyps = hyps.into_iter().collect::<Result<Vec<_>>>()?;
    let reachable: Vec<HypothesisEstimate> = hyps.iter().filter_map(|h| h.0.clone()).collect();
    if reachable.is_empty() {
        return Ok(finish(hyps.into_iter().filter_map(|h| h.1).collect()));
    }
    Ok(finish(reachable))
}

/// Coherent ML with known per-antenna coefficients `eta`: minimizes
/// `Σ_n ‖y^[n] − η_n U_g x̂‖²` over reachable messages.
///
/// Single-layer one-value codes use the additive score
/// `z_i = Σ_n Re(conj(η_n α) y_{g,i}^[n])` and the exact subset search; other
/// codes are enumerated exhaustively (up to 2^20 messages).
pub fn coherent_ml_decode(code: &BossCode, ys: &[Vec<Complex64>], eta: &[Complex64], exec: Exec) -> Result<Decoded> {
    check_antennas(code, ys)?;
    if eta.len() != ys.len() {
        return Err(BossError::WrongLength {
            expected: ys.len(),
            got: eta.len(),
        });
    }
    let y_energy: f64 = ys.iter().flatten().map(|z| z.norm_sqr()).sum();
    let eta_energy: f64 = eta.iter().map(|e| e.norm_sqr()).sum();
    if let Ok((k, alpha, card, limit)) = single_layer_params(code) {
        let hyps = map_indexed(exec, code.reachable_blocks(), |g| -> Result<HypothesisEstimate> {
            let mut z = vec![0.0; card];
            for (y, e) in ys.iter().zip(eta) {
                let yg = code.dictionary().adjoint(g, y)?;
                let w = (e * alpha).conj();
                for (zi, v) in z.iter_mut().zip(&yg) {
                    *zi += (w * v).re;
                }
            }
            let best = SubsetObjective::additive(&z)
                .best_reachable(k, limit)
                .expect("rank zero is reachable");
            let residual = y_energy + eta_energy * k as f64 * alpha.norm_sqr() - 2.0 * best.value;
            Ok(HypothesisEstimate {
                g,
                msg: message(g, best.positions, alpha),
                score: best.value,
                residual,
            })
        });
        return Ok(finish(hyps.into_iter().collect::<Result<Vec<_>>>()?));
    }
    exhaustive_coherent(code, ys, eta, exec)
}

/// Exhaustive reference: every encoder input, grouped by block.
fn exhaustive_coherent(code: &BossCode, ys: &[Vec<Complex64>], eta: &[Complex64], exec: Exec) -> Result<Decoded> {
    let b = code.budget();
    if b.total > 20 {
        return Err(BossError::UnsupportedConfig(format!(
            "exhaustive coherent ML limited to 20 bits, code has {}",
            b.total
        )));
    }
    let per_block = 1u128 << (b.total - b.b0);
    let hyps = map_indexed(exec, code.reachable_blocks(), |g| -> Result<HypothesisEstimate> {
        let mut best: Option<(f64, SparseMessage)> = None;
        for r in 0..per_block {
            let bits = u128_to_bits(((g as u128) << (b.total - b.b0)) | r, b.total);
            let msg = code.encode_message(&bits)?;
            let c = code.dictionary().forward_sparse(g, &msg.entries())?;
            let d: f64 = ys
                .iter()
                .zip(eta)
                .map(|(y, e)| y.iter().zip(&c).map(|(a, s)| (a - e * s).norm_sqr()).sum::<f64>())
                .sum();
            if best.as_ref().is_none_or(|(v, _)| d < *v) {
                best = Some((d, msg));
            }
        }
        let (residual, msg) = best.expect("at least one message per block");
        Ok(HypothesisEstimate {
            g,
            msg,
            score: -residual,
            residual,
        })
    });
    Ok(finish(hyps.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Lexicographic rank of a support inside the first-layer candidate set.
pub fn support_rank(code: &BossCode, support: &[usize]) -> Result<u128> {
    rank_combination(support, code.config().layers[0].candidate_cardinality)
}
