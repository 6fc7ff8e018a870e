//! Seeded Monte-Carlo BLER engine.
//!
//! Trial `t` of SNR point `p` draws its message, channel and noise from
//! [`trial_rng`]`(master_seed, p, t)`, so an outcome depends only on its
//! position. Trials run in fixed-size batches (in parallel when asked); the
//! stopping rule scans each batch in trial order, so the counts are the same
//! for any worker count.

pub mod output;
pub mod selftest;
pub mod spec;

use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::channels::{awgn_transmit, draw_simo_channel, draw_siso_channel, siso_transmit, simo_transmit, NoiseSpec};
use crate::config::CodeConfig;
use crate::decoder::{
    coherent_ml_decode, decode_map_awgn, nsd_decode, quasi_ml_decode, MmseAmapDecoder,
};
use crate::encoder::{BossCode, SparseMessage};
use crate::error::Result;
use crate::par::{map_indexed, with_threads, Exec};
use crate::rng::{trial_rng, TrialRng, RNG_VERSION};

pub use output::{emit_csv, emit_gnuplot, parse_csv, CsvRow, CSV_HEADER};
pub use spec::{load_sweep_spec, parse_sweep_spec, DecoderSpec, Scenario, SweepSpec};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `errors` successes in `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let den = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / den;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / den;
    // The bounds at zero and full error counts are exact; pin them against rounding.
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors >= trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Outcome of one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub snr_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl PointRecord {
    pub fn new(snr_db: f64, trials: u64, block_errors: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(block_errors, trials, Z_95);
        PointRecord {
            snr_db,
            trials,
            block_errors,
            bler: if trials == 0 { 0.0 } else { block_errors as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }
}

/// Outcome of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub scenario: String,
    pub decoder: String,
    pub code_hash: String,
    pub seed: u64,
    pub rng_version: String,
    pub points: Vec<PointRecord>,
    pub wall_time_s: f64,
}

/// Stable 16-hex-digit digest of a code definition.
pub fn code_hash(cfg: &CodeConfig) -> String {
    let mut h = Sha256::new();
    h.update(format!("m={};g={};seed={};", cfg.m, cfg.g, cfg.dict_seed));
    h.update(format!("crc={};", cfg.crc.map_or("none".to_string(), |c| c.name())));
    for (i, l) in cfg.layers.iter().enumerate() {
        h.update(format!("layer{i}:k={};card={};", l.sparsity, l.candidate_cardinality));
        for a in &l.alphabet {
            h.update(format!("{:016x}:{:016x};", a.re.to_bits(), a.im.to_bits()));
        }
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Runs trials `0, 1, ...` through `trial` until `max_errors` block errors
/// or `max_trials` trials. `trial(t)` returns true on a block error.
pub fn run_point_with<F>(snr_db: f64, max_trials: u64, max_errors: u64, batch: u64, exec: Exec, trial: F) -> PointRecord
where
    F: Fn(u64) -> bool + Sync + Send,
{
    let batch = batch.max(1);
    let mut trials = 0u64;
    let mut errors = 0u64;
    'outer: while trials < max_trials && errors < max_errors {
        let start = trials;
        let n = batch.min(max_trials - start) as usize;
        let outcomes = map_indexed(exec, n, |i| trial(start + i as u64));
        for e in outcomes {
            trials += 1;
            if e {
                errors += 1;
                if errors >= max_errors {
                    break 'outer;
                }
            }
        }
    }
    PointRecord::new(snr_db, trials, errors)
}

/// A prepared experiment: the code and dictionary are built once.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: SweepSpec,
    pub code: BossCode,
}

impl Experiment {
    pub fn new(spec: SweepSpec) -> Result<Self> {
        spec.check()?;
        let code = BossCode::new(spec.code.clone())?;
        Ok(Experiment { spec, code })
    }

    /// `σ_v²` for an Es/N0 point.
    pub fn noise(&self, snr_db: f64) -> NoiseSpec {
        NoiseSpec::from_es_n0_db(snr_db, self.code.config().mean_sample_energy())
    }

    /// Transmits a random message and decodes it. Returns the transmitted
    /// bits and the decoder's message.
    pub fn simulate(&self, rng: &mut TrialRng, noise: &NoiseSpec) -> Result<(Vec<bool>, SparseMessage)> {
        let code = &self.code;
        let bits = code.random_bits(rng);
        let msg = code.encode_message(&bits)?;
        let c = code.synthesize(&msg)?;
        let sigma = noise.sigma_v_sq;
        let decoded = match (&self.spec.scenario, self.spec.decoder) {
            (_, DecoderSpec::MapAwgn) => {
                let y = awgn_transmit(&c, noise, rng);
                decode_map_awgn(code, &y, sigma, Exec::Serial)?.msg
            }
            (spec::Scenario::SisoOfdm(geo), d) => {
                let ch = draw_siso_channel(geo, code.m(), rng)?;
                let y = siso_transmit(&c, &ch, noise, rng)?;
                let dec = MmseAmapDecoder::new(code, &ch.lambda, sigma)?;
                match d {
                    DecoderSpec::MmseAmapList { list_size } => dec.decode_list(&y, list_size, Exec::Serial)?.msg,
                    _ => dec.decode(&y, Exec::Serial)?.msg,
                }
            }
            (spec::Scenario::Simo { n_rx, zeta }, d) => {
                let ch = draw_simo_channel(*n_rx, *zeta, rng)?;
                let ys = simo_transmit(&c, &ch, noise, rng);
                match d {
                    DecoderSpec::QuasiMl => quasi_ml_decode(code, &ys, Exec::Serial)?.msg,
                    DecoderSpec::Nsd { sphere } => nsd_decode(code, &ys, sphere, Exec::Serial)?.msg,
                    _ => coherent_ml_decode(code, &ys, &ch.eta, Exec::Serial)?.msg,
                }
            }
            (spec::Scenario::Awgn, _) => unreachable!("rejected by SweepSpec::validate"),
        };
        Ok((bits, decoded))
    }

    /// True when trial `t` of point `point` is a block error: the decoded
    /// bits (CRC included) differ from the transmitted ones, or the decoder
    /// returned a message the encoder cannot produce.
    pub fn trial_error(&self, point: usize, t: u64, noise: &NoiseSpec) -> bool {
        let mut rng = trial_rng(self.spec.master_seed, point as u64, t);
        match self.simulate(&mut rng, noise) {
            Ok((bits, msg)) => self.code.decode_message(&msg).map_or(true, |b| b != bits),
            Err(_) => true,
        }
    }

    pub fn run_point(&self, point: usize, exec: Exec) -> PointRecord {
        let snr = self.spec.snr_points_db[point];
        let noise = self.noise(snr);
        run_point_with(snr, self.spec.max_trials, self.spec.max_errors, self.spec.batch, exec, |t| {
            self.trial_error(point, t, &noise)
        })
    }

    pub fn run(&self, exec: Exec) -> SweepResult {
        let start = Instant::now();
        let points = (0..self.spec.snr_points_db.len()).map(|p| self.run_point(p, exec)).collect();
        SweepResult {
            scenario: self.spec.scenario.name().into(),
            decoder: self.spec.decoder.label(),
            code_hash: code_hash(&self.spec.code),
            seed: self.spec.master_seed,
            rng_version: RNG_VERSION.into(),
            points,
            wall_time_s: start.elapsed().as_secs_f64(),
        }
    }
}

/// Runs every point of `spec` on `threads` workers (`0` = all cores, `1` = serial).
pub fn run_sweep(spec: &SweepSpec, threads: usize) -> Result<SweepResult> {
    let exp = Experiment::new(spec.clone())?;
    let threads = if threads == 0 { crate::par::default_threads() } else { threads };
    Ok(with_threads(threads, |exec| exp.run(exec)))
}
