//! BOSS code parameterization and the information bit budget.

use num_complex::Complex64;

use crate::combinatorics::{binomial, floor_log2, Multiset};
use crate::crc::CrcSpec;
use crate::error::{BossError, Result};

/// One superposition layer: `sparsity` non-zeros drawn from `alphabet`,
/// placed inside a candidate set of `candidate_cardinality` indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerConfig {
    pub sparsity: usize,
    pub alphabet: Vec<Complex64>,
    pub candidate_cardinality: usize,
}

impl LayerConfig {
    pub fn new(sparsity: usize, alphabet: Vec<Complex64>, candidate_cardinality: usize) -> Self {
        LayerConfig {
            sparsity,
            alphabet,
            candidate_cardinality,
        }
    }

    /// Layer with a single real value shared by all its non-zeros.
    pub fn singleton(sparsity: usize, value: f64, candidate_cardinality: usize) -> Self {
        Self::new(
            sparsity,
            vec![Complex64::new(value, 0.0)],
            candidate_cardinality,
        )
    }

    /// The value multiset placed on the layer's support: `K_ℓ` copies of a
    /// singleton, or the alphabet itself.
    pub fn value_multiset(&self) -> Vec<Complex64> {
        if self.alphabet.len() == 1 {
            vec![self.alphabet[0]; self.sparsity]
        } else {
            self.alphabet.clone()
        }
    }

    /// Class structure of [`value_multiset`](Self::value_multiset).
    pub fn multiset(&self) -> Multiset {
        let keys: Vec<(u64, u64)> = self
            .value_multiset()
            .iter()
            .map(|v| (v.re.to_bits(), v.im.to_bits()))
            .collect();
        Multiset::from_keys(&keys)
    }

    /// Distinct values in class order (matches [`multiset`](Self::multiset)).
    pub fn class_values(&self) -> Vec<Complex64> {
        let values = self.value_multiset();
        let set = self.multiset();
        let mut out = vec![Complex64::new(0.0, 0.0); set.counts.len()];
        for (v, &c) in values.iter().zip(&set.class_of) {
            out[c] = *v;
        }
        out
    }

    /// `Σ |a|²` over the values placed on one support.
    pub fn energy(&self) -> f64 {
        self.value_multiset().iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_singleton(&self) -> bool {
        self.alphabet.len() == 1
    }
}

/// Full BOSS code parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeConfig {
    /// Codeword length and sub-dictionary dimension.
    pub m: usize,
    /// Number of unitary sub-dictionaries.
    pub g: usize,
    pub layers: Vec<LayerConfig>,
    pub dict_seed: u64,
    pub crc: Option<CrcSpec>,
}

/// Bit allocation of a code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBudget {
    /// Block-select bits `⌊log2 G⌋`.
    pub b0: u32,
    pub per_layer_loc: Vec<u32>,
    pub per_layer_val: Vec<u32>,
    /// Total bits carried by a codeword, CRC included.
    pub total: u32,
    pub crc_bits: u32,
}

impl BitBudget {
    /// Information bits left after the CRC.
    pub fn payload(&self) -> u32 {
        self.total - self.crc_bits
    }

    /// Number of encoder-reachable blocks.
    pub fn reachable_blocks(&self) -> usize {
        1usize << self.b0
    }
}

impl CodeConfig {
    pub fn new(m: usize, g: usize, layers: Vec<LayerConfig>, dict_seed: u64) -> Self {
        CodeConfig {
            m,
            g,
            layers,
            dict_seed,
            crc: None,
        }
    }

    pub fn with_crc(mut self, crc: CrcSpec) -> Self {
        self.crc = Some(crc);
        self
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// `N = G·M`.
    pub fn n(&self) -> usize {
        self.g * self.m
    }

    /// Total sparsity `K = Σ K_ℓ`.
    pub fn total_sparsity(&self) -> usize {
        self.layers.iter().map(|l| l.sparsity).sum()
    }

    /// True for the single-layer, single-valued codes the non-coherent decoders accept.
    pub fn is_single_layer_singleton(&self) -> bool {
        self.layers.len() == 1 && self.layers[0].is_singleton()
    }

    /// Lists every violated invariant; empty iff the configuration is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.m < 2 {
            out.push(format!("M must be at least 2 (got {})", self.m));
        }
        if self.g == 0 {
            out.push("G must be positive".to_string());
        }
        if self.layers.is_empty() {
            out.push("at least one layer is required".to_string());
        }
        let total_k = self.total_sparsity();
        if total_k > self.m {
            out.push(format!("total sparsity K={total_k} exceeds M={}", self.m));
        }
        let mut prior = 0usize;
        for (i, layer) in self.layers.iter().enumerate() {
            let tag = format!("layer {}", i + 1);
            if layer.sparsity == 0 {
                out.push(format!("{tag}: sparsity must be positive"));
            }
            if layer.alphabet.is_empty()
                || (layer.alphabet.len() != 1 && layer.alphabet.len() != layer.sparsity)
            {
                out.push(format!(
                    "{tag}: alphabet length must be 1 or K_ℓ (got {}, K_ℓ={})",
                    layer.alphabet.len(),
                    layer.sparsity
                ));
            }
            if layer
                .alphabet
                .iter()
                .any(|a| a.norm_sqr() == 0.0 || !a.re.is_finite() || !a.im.is_finite())
            {
                out.push(format!("{tag}: alphabet values must be finite and nonzero"));
            }
            let room = self.m.saturating_sub(prior);
            if layer.candidate_cardinality > room {
                out.push(format!(
                    "{tag}: candidate cardinality exceeds M − prior supports ({} > {room})",
                    layer.candidate_cardinality
                ));
            }
            if layer.candidate_cardinality < layer.sparsity {
                out.push(format!(
                    "{tag}: candidate cardinality {} is smaller than K_ℓ={}",
                    layer.candidate_cardinality, layer.sparsity
                ));
            } else if binomial(layer.candidate_cardinality, layer.sparsity).is_none() {
                out.push(format!("{tag}: C(|M|, K_ℓ) exceeds 128-bit ranks"));
            }
            prior += layer.sparsity;
        }
        if out.is_empty() {
            let budget = self.budget_unchecked();
            if let Some(crc) = &self.crc {
                if budget.total <= crc.width {
                    out.push(format!(
                        "code carries {} bits, not enough for a {}-bit CRC",
                        budget.total, crc.width
                    ));
                }
            }
        }
        out
    }

    /// Computes the bit budget of a valid configuration.
    pub fn bit_budget(&self) -> Result<BitBudget> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(BossError::InvalidConfig(violations));
        }
        Ok(self.budget_unchecked())
    }

    fn budget_unchecked(&self) -> BitBudget {
        let b0 = floor_log2(self.g as u128);
        let mut per_layer_loc = Vec::with_capacity(self.layers.len());
        let mut per_layer_val = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let supports = binomial(layer.candidate_cardinality, layer.sparsity)
                .expect("validated");
            per_layer_loc.push(floor_log2(supports));
            let arrangements = layer.multiset().arrangement_count().unwrap_or(1);
            per_layer_val.push(floor_log2(arrangements));
        }
        let total = b0 + per_layer_loc.iter().sum::<u32>() + per_layer_val.iter().sum::<u32>();
        BitBudget {
            b0,
            per_layer_loc,
            per_layer_val,
            total,
            crc_bits: self.crc.as_ref().map_or(0, |c| c.width),
        }
    }

    /// Lexicographically smallest `|M^(ℓ)|` indices not used by `prior`.
    pub fn candidate_set(&self, layer: usize, prior: &[usize]) -> Vec<usize> {
        let want = self.layers[layer].candidate_cardinality;
        let mut used = vec![false; self.m];
        for &p in prior {
            if p < self.m {
                used[p] = true;
            }
        }
        (0..self.m).filter(|&i| !used[i]).take(want).collect()
    }

    /// Average codeword energy per complex sample, `tr(K_xx)/M`.
    pub fn mean_sample_energy(&self) -> f64 {
        self.layers.iter().map(LayerConfig::energy).sum::<f64>() / self.m as f64
    }
}

/// Free-function form of [`CodeConfig::bit_budget`].
pub fn compute_bit_budget(cfg: &CodeConfig) -> Result<BitBudget> {
    cfg.bit_budget()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(m: usize, g: usize, k: usize, card: usize) -> CodeConfig {
        CodeConfig::new(m, g, vec![LayerConfig::singleton(k, 1.0, card)], 0)
    }

    #[test]
    fn budgets_of_reference_codes() {
        assert_eq!(single(64, 8, 2, 64).bit_budget().unwrap().total, 13);
        assert_eq!(single(128, 8, 2, 128).bit_budget().unwrap().total, 15);
        assert_eq!(single(2, 1, 1, 2).bit_budget().unwrap().total, 1);

        let two_layer = CodeConfig::new(
            128,
            8,
            vec![
                LayerConfig::singleton(1, 1.0, 128),
                LayerConfig::singleton(1, -1.0, 64),
            ],
            0,
        );
        let b = two_layer.bit_budget().unwrap();
        assert_eq!(b.b0, 3);
        assert_eq!(b.per_layer_loc, vec![7, 6]);
        assert_eq!(b.per_layer_val, vec![0, 0]);
        assert_eq!(b.total, 16);
    }

    #[test]
    fn distinct_alphabet_uses_value_bits() {
        let phi = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)];
        let cfg = CodeConfig::new(16, 4, vec![LayerConfig::new(3, phi, 16)], 0);
        let b = cfg.bit_budget().unwrap();
        // C(16,3) = 560 -> 9 bits; 3! = 6 -> 2 bits.
        assert_eq!((b.b0, b.per_layer_loc[0], b.per_layer_val[0], b.total), (2, 9, 2, 13));
    }

    #[test]
    fn validation_messages() {
        assert!(single(64, 8, 2, 64).validate().is_empty());

        let no_room = CodeConfig::new(
            8,
            2,
            vec![LayerConfig::singleton(1, 1.0, 8), LayerConfig::singleton(1, -1.0, 8)],
            0,
        );
        let v = no_room.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("candidate cardinality exceeds M − prior supports"), "{v:?}");

        let bad_alpha = CodeConfig::new(
            8,
            2,
            vec![LayerConfig::new(
                2,
                vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)],
                8,
            )],
            0,
        );
        let v = bad_alpha.validate();
        assert!(v.iter().any(|s| s.contains("alphabet length must be 1 or K_ℓ")), "{v:?}");
        assert!(matches!(bad_alpha.bit_budget(), Err(BossError::InvalidConfig(_))));

        let zero = CodeConfig::new(8, 2, vec![LayerConfig::singleton(1, 0.0, 8)], 0);
        assert!(!zero.validate().is_empty());
    }

    #[test]
    fn crc_must_fit() {
        let tiny = single(2, 1, 1, 2).with_crc(CrcSpec::crc3());
        assert!(tiny.validate().iter().any(|s| s.contains("CRC")));
        let ok = single(64, 8, 2, 64).with_crc(CrcSpec::crc3());
        assert_eq!(ok.bit_budget().unwrap().payload(), 10);
    }

    #[test]
    fn candidate_sets_are_lexicographic() {
        let cfg = CodeConfig::new(
            8,
            1,
            vec![LayerConfig::singleton(2, 1.0, 8), LayerConfig::singleton(1, 1.0, 4)],
            0,
        );
        assert_eq!(cfg.candidate_set(1, &[0, 2]), vec![1, 3, 4, 5]);
        assert_eq!(cfg.candidate_set(0, &[]), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn budget_is_monotone() {
        let base = |g: usize, card: usize, k: usize| single(64, g, k, card).bit_budget().unwrap().total;
        for g in 1..40 {
            assert!(base(g + 1, 64, 2) >= base(g, 64, 2));
        }
        for card in 2..64 {
            assert!(base(8, card + 1, 2) >= base(8, card, 2));
        }
        for k in 1..20 {
            assert!(base(8, 64, k + 1) >= base(8, 64, k));
        }
    }
}
