//! AWGN, SISO-OFDM multipath and SIMO block-fading channel simulators.
//!
//! SNR convention: `Es/N0 = (mean codeword energy per complex sample) / σ_v²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::encoder::Codeword;
use crate::error::{BossError, Result};
use crate::rng::{complex_normal, complex_normal_vec};

/// Noise level of one simulation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Variance per complex dimension; zero only for noiseless runs.
    pub sigma_v_sq: f64,
    /// Es/N0 in dB that produced `sigma_v_sq`, if any.
    pub snr_db: Option<f64>,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        NoiseSpec {
            sigma_v_sq: 0.0,
            snr_db: None,
        }
    }

    pub fn from_variance(sigma_v_sq: f64) -> Result<Self> {
        if !(sigma_v_sq > 0.0) || !sigma_v_sq.is_finite() {
            return Err(BossError::ParameterOutOfRange(format!(
                "noise variance must be positive and finite, got {sigma_v_sq}"
            )));
        }
        Ok(NoiseSpec {
            sigma_v_sq,
            snr_db: None,
        })
    }

    /// `σ_v² = Es / 10^(snr_db/10)` with `Es` the mean energy per sample.
    pub fn from_es_n0_db(snr_db: f64, mean_sample_energy: f64) -> Self {
        NoiseSpec {
            sigma_v_sq: mean_sample_energy / 10f64.powf(snr_db / 10.0),
            snr_db: Some(snr_db),
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma_v_sq == 0.0
    }
}

/// `Eb/N0 = Es/N0 · M / B`, in dB.
pub fn eb_n0_db(es_n0_db: f64, m: usize, bits: u32) -> f64 {
    es_n0_db + 10.0 * (m as f64 / bits as f64).log10()
}

fn add_noise<R: Rng + ?Sized>(y: &mut [Complex64], noise: &NoiseSpec, rng: &mut R) {
    if noise.is_noiseless() {
        return;
    }
    for v in y.iter_mut() {
        *v += complex_normal(rng, noise.sigma_v_sq);
    }
}

/// `y = c + v`.
pub fn awgn_transmit<R: Rng + ?Sized>(c: &Codeword, noise: &NoiseSpec, rng: &mut R) -> Vec<Complex64> {
    let mut y = c.samples.clone();
    add_noise(&mut y, noise, rng);
    y
}

/// OFDM geometry and power delay profile of the multipath channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmGeometry {
    pub fft_size: usize,
    pub data_carriers: usize,
    pub n_taps: usize,
    /// Tap `i` (from zero) has mean amplitude `exp(decay · i)` before
    /// normalization. `-1` decays; `+1` is the literal increasing profile.
    pub decay: f64,
}

impl Default for OfdmGeometry {
    fn default() -> Self {
        OfdmGeometry {
            fft_size: 64,
            data_carriers: 48,
            n_taps: 7,
            decay: -1.0,
        }
    }
}

impl OfdmGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 2 {
            return Err(BossError::InvalidGeometry(format!("FFT size {} < 2", self.fft_size)));
        }
        if self.n_taps == 0 || self.n_taps > self.fft_size {
            return Err(BossError::InvalidGeometry(format!(
                "tap count {} must be in 1..={}",
                self.n_taps, self.fft_size
            )));
        }
        if self.data_carriers == 0 || self.data_carriers >= self.fft_size {
            return Err(BossError::InvalidGeometry(format!(
                "data carriers {} must be in 1..{} (DC is unused)",
                self.data_carriers, self.fft_size
            )));
        }
        if !self.decay.is_finite() {
            return Err(BossError::InvalidGeometry("decay must be finite".into()));
        }
        Ok(())
    }

    /// FFT bins carrying data, in increasing physical frequency: the
    /// `⌊d/2⌋` bins just below DC followed by the `⌈d/2⌉` bins just above.
    pub fn data_bins(&self) -> Vec<usize> {
        let pos = self.data_carriers.div_ceil(2);
        let neg = self.data_carriers / 2;
        (self.fft_size - neg..self.fft_size).chain(1..=pos).collect()
    }

    /// OFDM symbols needed for a length-`m` codeword.
    pub fn symbols_per_codeword(&self, m: usize) -> usize {
        m.div_ceil(self.data_carriers)
    }
}

/// Frequency-domain diagonal of `Λ` seen by one codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct SisoChannelRealization {
    pub lambda: Vec<Complex64>,
    pub taps: Vec<Complex64>,
}

impl SisoChannelRealization {
    /// `λ = 1`: the AWGN channel in SISO form.
    pub fn flat(m: usize) -> Self {
        SisoChannelRealization {
            lambda: vec![Complex64::new(1.0, 0.0); m],
            taps: vec![Complex64::new(1.0, 0.0)],
        }
    }
}

/// Draws Rayleigh taps with an exponential power delay profile, normalizes
/// them to unit energy and returns the data-carrier response for a
/// length-`m` codeword. The channel is static over the codeword's OFDM symbols.
pub fn draw_siso_channel<R: Rng + ?Sized>(
    geometry: &OfdmGeometry,
    m: usize,
    rng: &mut R,
) -> Result<SisoChannelRealization> {
    geometry.validate()?;
    let mut taps: Vec<Complex64> = (0..geometry.n_taps)
        .map(|i| complex_normal(rng, 1.0) * (geometry.decay * i as f64).exp())
        .collect();
    let energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
    let z = energy.sqrt();
    for t in taps.iter_mut() {
        *t /= z;
    }
    let bins = geometry.data_bins();
    let response: Vec<Complex64> = bins
        .iter()
        .map(|&k| {
            taps.iter()
                .enumerate()
                .map(|(i, t)| {
                    let ang = -2.0 * PI * ((i * k) % geometry.fft_size) as f64 / geometry.fft_size as f64;
                    t * Complex64::from_polar(1.0, ang)
                })
                .sum()
        })
        .collect();
    let lambda = (0..m).map(|i| response[i % response.len()]).collect();
    Ok(SisoChannelRealization { lambda, taps })
}

/// `y_m = λ_m c_m + v_m`.
pub fn siso_transmit<R: Rng + ?Sized>(
    c: &Codeword,
    ch: &SisoChannelRealization,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if ch.lambda.len() != c.samples.len() {
        return Err(BossError::WrongLength {
            expected: c.samples.len(),
            got: ch.lambda.len(),
        });
    }
    let mut y: Vec<Complex64> = c.samples.iter().zip(&ch.lambda).map(|(s, l)| s * l).collect();
    add_noise(&mut y, noise, rng);
    Ok(y)
}

/// Per-antenna flat coefficients `η = √ζ h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimoChannelRealization {
    pub eta: Vec<Complex64>,
    pub zeta: f64,
    pub h: Vec<Complex64>,
}

impl SimoChannelRealization {
    pub fn from_h(h: Vec<Complex64>, zeta: f64) -> Self {
        let s = zeta.sqrt();
        SimoChannelRealization {
            eta: h.iter().map(|v| v * s).collect(),
            zeta,
            h,
        }
    }

    pub fn n_rx(&self) -> usize {
        self.eta.len()
    }
}

/// `h_n ~ CN(0,1)` i.i.d. over `n_rx` antennas.
pub fn draw_simo_channel<R: Rng + ?Sized>(n_rx: usize, zeta: f64, rng: &mut R) -> Result<SimoChannelRealization> {
    if n_rx == 0 {
        return Err(BossError::InvalidGeometry("at least one receive antenna".into()));
    }
    if !(zeta > 0.0) {
        return Err(BossError::InvalidGeometry(format!("zeta must be positive, got {zeta}")));
    }
    Ok(SimoChannelRealization::from_h(complex_normal_vec(rng, n_rx, 1.0), zeta))
}

/// `y^[n] = η_n c + v_n` with independent noise per antenna.
pub fn simo_transmit<R: Rng + ?Sized>(
    c: &Codeword,
    ch: &SimoChannelRealization,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    ch.eta
        .iter()
        .map(|eta| {
            let mut y: Vec<Complex64> = c.samples.iter().map(|s| s * eta).collect();
            add_noise(&mut y, noise, rng);
            y
        })
        .collect()
}
