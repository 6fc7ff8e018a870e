//! Fast built-in consistency checks, run by the `selftest` CLI command.

use num_complex::Complex64;

use super::{emit_csv, run_sweep, wilson_interval, DecoderSpec, Scenario, SweepSpec, Z_95};
use crate::channels::{OfdmGeometry, SisoChannelRealization};
use crate::crc::CrcSpec;
use crate::decoder::{decode_map_awgn, nsd_decode, quasi_ml_decode, MmseAmapDecoder};
use crate::encoder::{BossCode, SparseMessage};
use crate::error::Result;
use crate::par::Exec;
use crate::presets;
use crate::rng::trial_rng;

/// Name and outcome of one check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, r: Result<std::result::Result<(), String>>) -> CheckOutcome {
    let (passed, detail) = match r {
        Ok(Ok(())) => (true, String::new()),
        Ok(Err(d)) => (false, d),
        Err(e) => (false, e.to_string()),
    };
    CheckOutcome {
        name: name.into(),
        passed,
        detail,
    }
}

const MESSAGES: u64 = 20;

fn dictionaries_unitary() -> Result<std::result::Result<(), String>> {
    for cfg in presets::shipped() {
        let code = BossCode::new(cfg)?;
        for g in 0..code.config().g {
            let e = code.dictionary().unitarity_error(g)?;
            if e > 1e-10 {
                return Ok(Err(format!("M={} block {g}: unitarity error {e:e}", code.m())));
            }
        }
    }
    Ok(Ok(()))
}

fn crc_roundtrip() -> Result<std::result::Result<(), String>> {
    for crc in [CrcSpec::crc3(), CrcSpec::crc6()] {
        for t in 0..64u64 {
            let mut rng = trial_rng(3, 0, t);
            let bits: Vec<bool> = (0..13).map(|_| rand::Rng::random(&mut rng)).collect();
            let mut framed = crc.append(&bits);
            if !crc.check(&framed)? {
                return Ok(Err(format!("{} rejects a valid frame", crc.name())));
            }
            let flip = (t as usize) % framed.len();
            framed[flip] = !framed[flip];
            if crc.check(&framed)? {
                return Ok(Err(format!("{} misses a single-bit error", crc.name())));
            }
        }
    }
    Ok(Ok(()))
}

/// Encodes random messages and checks every decision returned by `decode`
/// on the clean codeword is the transmitted message.
fn noiseless<F>(code: &BossCode, seed: u64, decode: F) -> Result<std::result::Result<(), String>>
where
    F: Fn(&[Complex64]) -> Result<Vec<SparseMessage>>,
{
    for t in 0..MESSAGES {
        let mut rng = trial_rng(seed, 0, t);
        let bits = code.random_bits(&mut rng);
        let msg = code.encode_message(&bits)?;
        if code.decode_message(&msg)? != bits {
            return Ok(Err(format!("M={}: bit mapping does not round-trip", code.m())));
        }
        let c = code.synthesize(&msg)?;
        if decode(&c.samples)?.iter().any(|d| *d != msg) {
            return Ok(Err(format!("M={}: message {t} decoded wrongly", code.m())));
        }
    }
    Ok(Ok(()))
}

fn noiseless_map_awgn() -> Result<std::result::Result<(), String>> {
    for cfg in presets::shipped() {
        let code = BossCode::new(cfg)?;
        if let Err(e) = noiseless(&code, 11, |y| Ok(vec![decode_map_awgn(&code, y, 1e-6, Exec::Serial)?.msg]))? {
            return Ok(Err(e));
        }
    }
    Ok(Ok(()))
}

fn noiseless_mmse_amap() -> Result<std::result::Result<(), String>> {
    for cfg in presets::shipped() {
        let code = BossCode::new(cfg)?;
        let lambda = SisoChannelRealization::flat(code.m()).lambda;
        let dec = MmseAmapDecoder::new(&code, &lambda, 1e-6)?;
        if let Err(e) = noiseless(&code, 12, |y| Ok(vec![dec.decode(y, Exec::Serial)?.msg]))? {
            return Ok(Err(e));
        }
    }
    Ok(Ok(()))
}

fn noiseless_noncoherent() -> Result<std::result::Result<(), String>> {
    for cfg in [presets::single_64_g8_k2(), presets::single_128_g8_k2()] {
        let code = BossCode::new(cfg)?;
        let k = code.config().layers[0].sparsity;
        let r = noiseless(&code, 13, |y| {
            let ys = vec![y.to_vec(), y.iter().map(|v| v * Complex64::new(0.0, 1.0)).collect()];
            Ok(vec![
                quasi_ml_decode(&code, &ys, Exec::Serial)?.msg,
                nsd_decode(&code, &ys, k + 2, Exec::Serial)?.msg,
            ])
        })?;
        if let Err(e) = r {
            return Ok(Err(e));
        }
    }
    Ok(Ok(()))
}

fn wilson_reference() -> Result<std::result::Result<(), String>> {
    let (lo, hi) = wilson_interval(10, 100, Z_95);
    let ok = (lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4;
    Ok(if ok { Ok(()) } else { Err(format!("Wilson(10/100) = [{lo}, {hi}]")) })
}

fn sweep_deterministic() -> Result<std::result::Result<(), String>> {
    let specs = [
        SweepSpec::new(presets::single_layer(16, 4, 2), Scenario::Awgn, DecoderSpec::MapAwgn, vec![0.0, 4.0]),
        SweepSpec::new(
            presets::single_layer(16, 4, 1),
            Scenario::SisoOfdm(OfdmGeometry::default()),
            DecoderSpec::MmseAmap,
            vec![5.0],
        ),
        SweepSpec::new(
            presets::single_layer(16, 4, 2),
            Scenario::Simo { n_rx: 2, zeta: 1.0 },
            DecoderSpec::Nsd { sphere: 4 },
            vec![0.0],
        ),
    ];
    for mut spec in specs {
        spec.max_trials = 200;
        spec.max_errors = 30;
        spec.batch = 64;
        let serial = emit_csv(&run_sweep(&spec, 1)?);
        let parallel = emit_csv(&run_sweep(&spec, 4)?);
        if serial != parallel {
            return Ok(Err(format!("{} sweep differs between serial and parallel", spec.scenario.name())));
        }
    }
    Ok(Ok(()))
}

/// Runs every check in order.
pub fn selftest() -> Vec<CheckOutcome> {
    vec![
        outcome("dictionary-unitary", dictionaries_unitary()),
        outcome("crc-roundtrip", crc_roundtrip()),
        outcome("noiseless-map-awgn", noiseless_map_awgn()),
        outcome("noiseless-mmse-amap", noiseless_mmse_amap()),
        outcome("noiseless-noncoherent", noiseless_noncoherent()),
        outcome("wilson-interval", wilson_reference()),
        outcome("sweep-deterministic", sweep_deterministic()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
