//! Decoders for the AWGN, SISO-OFDM and SIMO channels.
//!
//! All decoders evaluate the `2^B0` encoder-reachable block hypotheses
//! independently (optionally on rayon) and reduce them in block order, so
//! serial and parallel runs return identical decisions. Ties go to the lower
//! block index and, inside a block, to the lower column index.

pub mod layered;
pub mod map_awgn;
pub mod mmse_amap;
pub mod noncoherent;
pub mod subset;

use crate::encoder::SparseMessage;

pub use map_awgn::{decode_map_awgn, decorrelate, layer_decode_awgn};
pub use mmse_amap::{
    build_equalizer, codeword_prior_variance, decode_mmse_amap, decode_mmse_amap_list,
    effective_noise_variances, q_entries, EqualizerState, ListEntry, MmseAmapDecoder,
};
pub use noncoherent::{
    coherent_ml_decode, correlation_matrix, nsd_decode, quasi_ml_decode, CorrelationMatrix, SphereSet,
};

/// Decoder output for one block hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisEstimate {
    pub g: usize,
    pub msg: SparseMessage,
    /// Decoder-specific figure of merit inside the hypothesis (larger is better).
    pub score: f64,
    /// Quantity minimized by the hypothesis test (smaller is better).
    pub residual: f64,
}

/// Final decision plus per-hypothesis diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub msg: SparseMessage,
    /// One entry per evaluated hypothesis, in block order.
    pub hypotheses: Vec<HypothesisEstimate>,
}

impl Decoded {
    pub fn block(&self) -> usize {
        self.msg.block
    }
}

/// Index of the smallest residual; ties go to the earliest entry.
pub(crate) fn argmin_residual(h: &[HypothesisEstimate]) -> usize {
    let mut best = 0;
    for (i, e) in h.iter().enumerate().skip(1) {
        if e.residual < h[best].residual {
            best = i;
        }
    }
    best
}

/// Noise variances below this are treated as this value by the decoders.
pub const MIN_NOISE_VARIANCE: f64 = 1e-30;

pub(crate) fn floor_variance(v: f64) -> f64 {
    if v.is_nan() {
        MIN_NOISE_VARIANCE
    } else {
        v.max(MIN_NOISE_VARIANCE)
    }
}
