//! Block orthogonal sparse superposition (BOSS) codes.
//!
//! A BOSS codeword is `c = U_g x_g`: one of `G` unitary `M x M`
//! sub-dictionaries is selected by the leading information bits and the
//! remaining bits choose a sparse, layered coefficient vector `x_g`.
//!
//! The crate provides
//!
//! * [`config`]: code parameterization, validation and the information bit budget,
//! * [`dictionary`]: the seeded DFT-phase-permutation dictionary with fast transforms,
//! * [`encoder`]: bit-to-message mapping, message-to-bit inversion and codeword synthesis,
//! * [`crc`]: the outer CRC used by list decoding,
//! * [`channels`]: AWGN, SISO-OFDM multipath and SIMO block fading simulators,
//! * [`decoder`]: two-stage MAP (AWGN), MMSE-A-MAP (SISO-OFDM, with a CRC-aided
//!   list variant), quasi-ML and non-coherent sphere decoding (SIMO) and a
//!   coherent-ML reference,
//! * [`sim`]: the reproducible Monte-Carlo BLER harness and its file formats.
//!
//! Per-hypothesis decoding and Monte-Carlo trials run on rayon when the
//! `parallel` feature is enabled (the default); results are identical with
//! the feature disabled.

pub mod channels;
pub mod combinatorics;
pub mod config;
pub mod crc;
pub mod decoder;
pub mod dictionary;
pub mod encoder;
pub mod error;
pub mod par;
pub mod presets;
pub mod rng;
pub mod sim;

pub use num_complex::Complex64;

pub use config::{BitBudget, CodeConfig, LayerConfig};
pub use crc::CrcSpec;
pub use dictionary::Dictionary;
pub use encoder::{BossCode, Codeword, LayerAssignment, SparseMessage};
pub use error::{BossError, Result};
pub use par::Exec;
