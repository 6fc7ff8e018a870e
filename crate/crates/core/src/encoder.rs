//! Successive BOSS encoding: bits → sparse message → codeword, and back.
//!
//! Bits are consumed most significant first: `B0` bits pick the block, then
//! each layer takes `B_{ℓ,loc}` bits for the lexicographic rank of its
//! support inside the candidate set and `B_{ℓ,val}` bits for the
//! lexicographic rank of the value arrangement.

use num_complex::Complex64;
use rand::Rng;

use crate::combinatorics::{rank_combination, rank_multiset, unrank_combination, unrank_multiset};
use crate::config::{BitBudget, CodeConfig, LayerConfig};
use crate::dictionary::Dictionary;
use crate::error::{BossError, Result};

/// Support and values chosen at one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerAssignment {
    /// Ascending column indices.
    pub support: Vec<usize>,
    /// Lexicographic rank of the value arrangement.
    pub arrangement: u128,
    /// Value placed on `support[k]`.
    pub values: Vec<Complex64>,
}

impl LayerAssignment {
    /// Builds an assignment from ascending `support` and per-position value classes.
    pub fn from_classes(layer: &LayerConfig, support: Vec<usize>, classes: &[usize]) -> Result<Self> {
        let set = layer.multiset();
        let arrangement = rank_multiset(classes, &set)?;
        let class_values = layer.class_values();
        let values = classes.iter().map(|&c| class_values[c]).collect();
        Ok(LayerAssignment {
            support,
            arrangement,
            values,
        })
    }
}

/// The sparse message vector `x_g`, stored by block and layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMessage {
    /// Zero-based block index.
    pub block: usize,
    pub layers: Vec<LayerAssignment>,
}

impl SparseMessage {
    /// `(index, value)` pairs over all layers.
    pub fn entries(&self) -> Vec<(usize, Complex64)> {
        self.layers
            .iter()
            .flat_map(|l| l.support.iter().copied().zip(l.values.iter().copied()))
            .collect()
    }

    /// Dense length-`m` `x_g`.
    pub fn dense(&self, m: usize) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        for (i, v) in self.entries() {
            x[i] += v;
        }
        x
    }

    /// Union of all layer supports, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.layers.iter().flat_map(|l| l.support.iter().copied()).collect();
        s.sort_unstable();
        s
    }
}

/// A transmitted codeword `c = U_g x_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub samples: Vec<Complex64>,
}

impl Codeword {
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// A validated code: configuration, bit budget and dictionary.
#[derive(Debug, Clone)]
pub struct BossCode {
    cfg: CodeConfig,
    budget: BitBudget,
    dict: Dictionary,
}

impl BossCode {
    pub fn new(cfg: CodeConfig) -> Result<Self> {
        let budget = cfg.bit_budget()?;
        let dict = Dictionary::build(cfg.m, cfg.g, cfg.dict_seed)?;
        Ok(BossCode { cfg, budget, dict })
    }

    pub fn config(&self) -> &CodeConfig {
        &self.cfg
    }

    pub fn budget(&self) -> &BitBudget {
        &self.budget
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn m(&self) -> usize {
        self.cfg.m
    }

    /// Number of blocks the encoder can select (`2^B0`).
    pub fn reachable_blocks(&self) -> usize {
        self.budget.reachable_blocks()
    }

    /// Number of encoder-reachable support ranks at `layer` (`2^B_{ℓ,loc}`).
    pub fn reachable_supports(&self, layer: usize) -> u128 {
        1u128 << self.budget.per_layer_loc[layer]
    }

    pub fn encode_message(&self, bits: &[bool]) -> Result<SparseMessage> {
        let total = self.budget.total as usize;
        if bits.len() != total {
            return Err(BossError::WrongLength {
                expected: total,
                got: bits.len(),
            });
        }
        let mut reader = BitReader::new(bits);
        let block = reader.take(self.budget.b0) as usize;
        let mut prior: Vec<usize> = Vec::new();
        let mut layers = Vec::with_capacity(self.cfg.layers.len());
        for (l, layer) in self.cfg.layers.iter().enumerate() {
            let candidates = self.cfg.candidate_set(l, &prior);
            let loc_rank = reader.take(self.budget.per_layer_loc[l]);
            let positions = unrank_combination(loc_rank, candidates.len(), layer.sparsity)?;
            let support: Vec<usize> = positions.iter().map(|&p| candidates[p]).collect();
            let val_rank = reader.take(self.budget.per_layer_val[l]);
            let classes = unrank_multiset(val_rank, &layer.multiset())?;
            let assignment = LayerAssignment::from_classes(layer, support, &classes)?;
            prior.extend_from_slice(&assignment.support);
            layers.push(assignment);
        }
        Ok(SparseMessage { block, layers })
    }

    /// Exact inverse of [`encode_message`](Self::encode_message).
    ///
    /// Messages the encoder never produces (block or ranks beyond the bit
    /// budget) are reported as [`BossError::Unreachable`].
    pub fn decode_message(&self, msg: &SparseMessage) -> Result<Vec<bool>> {
        if msg.block >= self.cfg.g {
            return Err(BossError::InvalidMessage(format!(
                "block {} out of range (G={})",
                msg.block, self.cfg.g
            )));
        }
        if msg.block >= self.reachable_blocks() {
            return Err(BossError::Unreachable(format!("block {}", msg.block)));
        }
        if msg.layers.len() != self.cfg.layers.len() {
            return Err(BossError::InvalidMessage(format!(
                "{} layers, expected {}",
                msg.layers.len(),
                self.cfg.layers.len()
            )));
        }
        let mut writer = BitWriter::with_capacity(self.budget.total as usize);
        writer.put(msg.block as u128, self.budget.b0);
        let mut prior: Vec<usize> = Vec::new();
        for (l, (layer, assign)) in self.cfg.layers.iter().zip(&msg.layers).enumerate() {
            if assign.support.len() != layer.sparsity || assign.values.len() != layer.sparsity {
                return Err(BossError::InvalidMessage(format!(
                    "layer {}: expected {} non-zeros",
                    l + 1,
                    layer.sparsity
                )));
            }
            let candidates = self.cfg.candidate_set(l, &prior);
            let mut positions = Vec::with_capacity(layer.sparsity);
            for &i in &assign.support {
                match candidates.binary_search(&i) {
                    Ok(p) => positions.push(p),
                    Err(_) => {
                        return Err(BossError::InvalidMessage(format!(
                            "layer {}: index {i} outside the candidate set or reused",
                            l + 1
                        )))
                    }
                }
            }
            let loc_rank = rank_combination(&positions, candidates.len())?;
            if loc_rank >= self.reachable_supports(l) {
                return Err(BossError::Unreachable(format!(
                    "layer {} support rank {loc_rank}",
                    l + 1
                )));
            }
            let class_values = layer.class_values();
            let classes = assign
                .values
                .iter()
                .map(|v| {
                    class_values.iter().position(|c| c == v).ok_or_else(|| {
                        BossError::InvalidMessage(format!("layer {}: value {v} not in alphabet", l + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let val_rank = rank_multiset(&classes, &layer.multiset())?;
            if val_rank != assign.arrangement {
                return Err(BossError::InvalidMessage(format!(
                    "layer {}: arrangement rank {} does not match values",
                    l + 1,
                    assign.arrangement
                )));
            }
            if val_rank >= 1u128 << self.budget.per_layer_val[l] {
                return Err(BossError::Unreachable(format!(
                    "layer {} arrangement rank {val_rank}",
                    l + 1
                )));
            }
            writer.put(loc_rank, self.budget.per_layer_loc[l]);
            writer.put(val_rank, self.budget.per_layer_val[l]);
            prior.extend_from_slice(&assign.support);
        }
        Ok(writer.finish())
    }

    /// `c = U_g x_g`.
    pub fn synthesize(&self, msg: &SparseMessage) -> Result<Codeword> {
        let x = msg.dense(self.cfg.m);
        Ok(Codeword {
            samples: self.dict.forward(msg.block, &x)?,
        })
    }

    /// Payload bits with the CRC appended when the code has one.
    pub fn attach_crc(&self, payload: &[bool]) -> Vec<bool> {
        match &self.cfg.crc {
            Some(crc) => crc.append(payload),
            None => payload.to_vec(),
        }
    }

    /// Draws a uniformly random payload and returns the full encoder input.
    pub fn random_bits<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        let payload: Vec<bool> = (0..self.budget.payload()).map(|_| rng.random::<bool>()).collect();
        self.attach_crc(&payload)
    }
}

struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bits: &'a [bool]) -> Self {
        BitReader { bits, pos: 0 }
    }

    fn take(&mut self, n: u32) -> u128 {
        let n = n as usize;
        let v = bits_to_u128(&self.bits[self.pos..self.pos + n]);
        self.pos += n;
        v
    }
}

struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    fn with_capacity(n: usize) -> Self {
        BitWriter {
            bits: Vec::with_capacity(n),
        }
    }

    fn put(&mut self, value: u128, n: u32) {
        self.bits.extend(u128_to_bits(value, n));
    }

    fn finish(self) -> Vec<bool> {
        self.bits
    }
}

/// Big-endian bit slice (at most 128 bits) to integer.
pub fn bits_to_u128(bits: &[bool]) -> u128 {
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128)
}

/// The low `n` bits of `value`, most significant first.
pub fn u128_to_bits(value: u128, n: u32) -> Vec<bool> {
    (0..n).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Parses a hex string into exactly `nbits` bits (the low `nbits` of the value).
pub fn bits_from_hex(hex: &str, nbits: usize) -> Result<Vec<bool>> {
    let hex = hex.trim().trim_start_matches("0x").trim_start_matches("0X");
    if hex.is_empty() {
        return Err(BossError::ParameterOutOfRange("empty hex string".into()));
    }
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for ch in hex.chars() {
        let d = ch
            .to_digit(16)
            .ok_or_else(|| BossError::ParameterOutOfRange(format!("invalid hex digit {ch:?}")))?;
        bits.extend(u128_to_bits(d as u128, 4));
    }
    if bits.len() < nbits {
        let mut padded = vec![false; nbits - bits.len()];
        padded.extend(bits);
        return Ok(padded);
    }
    let excess = bits.len() - nbits;
    if bits[..excess].iter().any(|&b| b) {
        return Err(BossError::ParameterOutOfRange(format!(
            "value 0x{hex} does not fit in {nbits} bits"
        )));
    }
    Ok(bits[excess..].to_vec())
}

/// Hex rendering of a bit string, left-padded to whole nibbles.
pub fn bits_to_hex(bits: &[bool]) -> String {
    let pad = (4 - bits.len() % 4) % 4;
    let mut padded = vec![false; pad];
    padded.extend_from_slice(bits);
    if padded.is_empty() {
        return "0".into();
    }
    padded
        .chunks(4)
        .map(|c| std::char::from_digit(bits_to_u128(c) as u32, 16).unwrap())
        .collect()
}
