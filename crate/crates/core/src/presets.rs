//! Reference code configurations.

use crate::config::{CodeConfig, LayerConfig};

/// Default dictionary seed for the shipped configurations.
pub const DEFAULT_DICT_SEED: u64 = 0x0B05_5C0D;

/// `(M=128, B=16)` two-layer code: `G=8`, `K1=K2=1`, alphabets `{1}` and
/// `{-1}`, candidate sets of 128 and 64.
pub fn two_layer_128_16() -> CodeConfig {
    CodeConfig::new(
        128,
        8,
        vec![
            LayerConfig::singleton(1, 1.0, 128),
            LayerConfig::singleton(1, -1.0, 64),
        ],
        DEFAULT_DICT_SEED,
    )
}

/// Single-layer singleton code with `M`, `G` and sparsity `K`, full candidate set.
pub fn single_layer(m: usize, g: usize, k: usize) -> CodeConfig {
    CodeConfig::new(
        m,
        g,
        vec![LayerConfig::singleton(k, 1.0, m)],
        DEFAULT_DICT_SEED,
    )
}

/// `(M=64, G=8, K=2)`, 13 bits.
pub fn single_64_g8_k2() -> CodeConfig {
    single_layer(64, 8, 2)
}

/// `(M=128, G=8, K=2)`, 15 bits.
pub fn single_128_g8_k2() -> CodeConfig {
    single_layer(128, 8, 2)
}

/// Testbed profile `(M=129, G=4)`: two layers, `K1=K2=1`, alphabets `{1}` and
/// `{-1}`, candidate sets of 129 and 128. Carries 16 bits including the two
/// block-select bits.
pub fn testbed_129_g4() -> CodeConfig {
    CodeConfig::new(
        129,
        4,
        vec![
            LayerConfig::singleton(1, 1.0, 129),
            LayerConfig::singleton(1, -1.0, 128),
        ],
        DEFAULT_DICT_SEED,
    )
}

pub fn shipped() -> Vec<CodeConfig> {
    vec![
        two_layer_128_16(),
        single_64_g8_k2(),
        single_128_g8_k2(),
        testbed_129_g4(),
    ]
}
