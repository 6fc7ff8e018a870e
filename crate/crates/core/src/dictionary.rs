//! The block-unitary dictionary `A = [U_1 … U_G]`.
//!
//! Every block is `U_g = P_g · D_g · F`, with `F` the unitary `M`-point DFT,
//! `D_g` a diagonal of unit-modulus phases and `P_g` a row permutation, both
//! drawn from a ChaCha stream keyed by `(dict_seed, g)`. Forward and adjoint
//! transforms cost one FFT plus `O(M)` work; rustfft handles arbitrary `M`
//! (radix kernels for powers of two, mixed-radix/Bluestein otherwise).
//!
//! Every entry of `U_g` has modulus `1/√M`. The weighted column energies
//! used by the MMSE-A-MAP decoder therefore have a closed form, see
//! [`Dictionary::weighted_column_energy`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{BossError, Result};

/// Largest `M` accepted by [`Dictionary::materialize`].
pub const MATERIALIZE_LIMIT: usize = 1024;

#[derive(Debug, Clone)]
struct Block {
    phases: Vec<Complex64>,
    /// Row `i` of `U_g` is row `perm[i]` of `D_g F`.
    perm: Vec<usize>,
}

#[derive(Clone)]
pub struct Dictionary {
    m: usize,
    blocks: Vec<Block>,
    scale: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dictionary")
            .field("m", &self.m)
            .field("g", &self.blocks.len())
            .finish()
    }
}

fn block_rng(seed: u64, g: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(g as u64);
    rng
}

impl Dictionary {
    pub fn build(m: usize, g: usize, dict_seed: u64) -> Result<Self> {
        if m < 2 {
            return Err(BossError::UnsupportedDimension(m));
        }
        if g == 0 {
            return Err(BossError::ParameterOutOfRange("G must be positive".into()));
        }
        let blocks = (0..g)
            .map(|gi| {
                let mut rng = block_rng(dict_seed, gi);
                let phases = (0..m)
                    .map(|_| Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>()))
                    .collect();
                let mut perm: Vec<usize> = (0..m).collect();
                // Fisher-Yates, spelled out so the permutation only depends on the stream.
                for i in (1..m).rev() {
                    let j = rng.random_range(0..=i);
                    perm.swap(i, j);
                }
                Block { phases, perm }
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Dictionary {
            m,
            blocks,
            scale: 1.0 / (m as f64).sqrt(),
            fft: planner.plan_fft_forward(m),
            ifft: planner.plan_fft_inverse(m),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn g(&self) -> usize {
        self.blocks.len()
    }

    fn block(&self, g: usize) -> Result<&Block> {
        self.blocks.get(g).ok_or(BossError::IndexOutOfRange {
            index: g,
            bound: self.blocks.len(),
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.m {
            return Err(BossError::WrongLength {
                expected: self.m,
                got: len,
            });
        }
        Ok(())
    }

    /// `U_g x`. Blocks are indexed from zero.
    pub fn forward(&self, g: usize, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let block = self.block(g)?;
        self.check_len(x.len())?;
        let mut buf = x.to_vec();
        self.fft.process(&mut buf);
        for (v, d) in buf.iter_mut().zip(&block.phases) {
            *v *= d * self.scale;
        }
        Ok(block.perm.iter().map(|&p| buf[p]).collect())
    }

    /// `U_g† y`.
    pub fn adjoint(&self, g: usize, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let block = self.block(g)?;
        self.check_len(y.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        for (i, &p) in block.perm.iter().enumerate() {
            buf[p] = y[i];
        }
        for (v, d) in buf.iter_mut().zip(&block.phases) {
            *v *= d.conj() * self.scale;
        }
        self.ifft.process(&mut buf);
        Ok(buf)
    }

    /// `U_g x` for a sparse `x` given as `(index, value)` pairs, by summing
    /// the selected columns directly: `O(M · nnz)`.
    pub fn forward_sparse(&self, g: usize, entries: &[(usize, Complex64)]) -> Result<Vec<Complex64>> {
        let block = self.block(g)?;
        let m = self.m;
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for &(j, value) in entries {
            if j >= m {
                return Err(BossError::IndexOutOfRange { index: j, bound: m });
            }
            // (U_g)_{i,j} = d[p_i] · e^{-2πi p_i j / M} / √M with p_i = perm[i].
            for (i, &p) in block.perm.iter().enumerate() {
                let k = (p * j) % m;
                let w = Complex64::from_polar(self.scale, -2.0 * PI * k as f64 / m as f64);
                out[i] += block.phases[p] * w * value;
            }
        }
        Ok(out)
    }

    /// Column `j` of `U_g`.
    pub fn column(&self, g: usize, j: usize) -> Result<Vec<Complex64>> {
        self.forward_sparse(g, &[(j, Complex64::new(1.0, 0.0))])
    }

    /// `Σ_j |(U_g)_{j,m}|² weight_j` for every column `m`.
    ///
    /// All entries have modulus `1/√M`, so every column receives the mean weight.
    pub fn weighted_column_energy(&self, g: usize, weights: &[f64]) -> Result<Vec<f64>> {
        self.block(g)?;
        self.check_len(weights.len())?;
        let mean = weights.iter().sum::<f64>() / self.m as f64;
        Ok(vec![mean; self.m])
    }

    /// `Σ_j |(U_g)_{j,m}|² diag_j` for every column `m`: the diagonal of
    /// `U_g† diag(d) U_g`. Constant over `m` for this dictionary family.
    pub fn weighted_column_energy_complex(&self, g: usize, diag: &[Complex64]) -> Result<Vec<Complex64>> {
        self.block(g)?;
        self.check_len(diag.len())?;
        let mean = diag.iter().sum::<Complex64>() / self.m as f64;
        Ok(vec![mean; self.m])
    }

    /// Dense `U_g`, row-major, built column by column from [`forward`](Self::forward).
    pub fn materialize(&self, g: usize) -> Result<Vec<Vec<Complex64>>> {
        if self.m > MATERIALIZE_LIMIT {
            return Err(BossError::DimensionTooLarge(self.m, MATERIALIZE_LIMIT));
        }
        self.block(g)?;
        let mut dense = vec![vec![Complex64::new(0.0, 0.0); self.m]; self.m];
        let mut e = vec![Complex64::new(0.0, 0.0); self.m];
        for j in 0..self.m {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.forward(g, &e)?;
            e[j] = Complex64::new(0.0, 0.0);
            for (i, v) in col.into_iter().enumerate() {
                dense[i][j] = v;
            }
        }
        Ok(dense)
    }

    /// Max absolute entry error of `U_g† U_g − I`.
    pub fn unitarity_error(&self, g: usize) -> Result<f64> {
        let u = self.materialize(g)?;
        Ok(gram_deviation(&u, &u))
    }
}

/// `max |(A† B − I)_{ij}|` for square row-major matrices.
pub fn gram_deviation(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    let m = a.len();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..m {
                acc += a[r][i].conj() * b[r][j];
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}
