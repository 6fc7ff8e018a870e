//! `boss`: validate configs, encode and decode single blocks, run BLER sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boss_core::decoder::{
    coherent_ml_decode, decode_map_awgn, nsd_decode, quasi_ml_decode, MmseAmapDecoder,
};
use boss_core::encoder::{bits_from_hex, bits_to_hex};
use boss_core::par::{default_threads, Exec};
use boss_core::sim::selftest::selftest;
use boss_core::sim::{code_hash, emit_csv, emit_gnuplot, load_sweep_spec, run_sweep, DecoderSpec, Scenario, SweepSpec};
use boss_core::{BossCode, BossError, SparseMessage};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

#[derive(Parser)]
#[command(name = "boss", version, about = "Block orthogonal sparse superposition codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config file and print the code's bit budget.
    Validate { config: PathBuf },
    /// Encode one payload (hex, most significant bit first) and print the codeword as JSON.
    Encode {
        config: PathBuf,
        #[arg(long)]
        bits: String,
    },
    /// Decode a received block given as JSON.
    Decode {
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the config's BLER sweep and write a CSV.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; overrides the config (0 uses every core, 1 is serial).
        #[arg(long)]
        threads: Option<usize>,
        /// Also write a gnuplot script plotting the CSV.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Run the built-in consistency checks.
    Selftest,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<BossError> for Failure {
    fn from(e: BossError) -> Self {
        let code = if matches!(e, BossError::Io { .. }) { EXIT_IO } else { EXIT_CONFIG };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| BossError::io(path, e).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => validate(&config),
        Command::Encode { config, bits } => encode(&config, &bits),
        Command::Decode { config, input } => decode(&config, &input),
        Command::Sweep {
            config,
            out,
            threads,
            gnuplot,
        } => sweep(&config, &out, threads, gnuplot.as_deref()),
        Command::Selftest => run_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn validate(path: &Path) -> Result<(), Failure> {
    let spec = load_sweep_spec(path)?;
    let code = BossCode::new(spec.code.clone())?;
    let b = code.budget();
    let cfg = code.config();
    println!("config ok: {}", path.display());
    println!("  M={} G={} layers={} code_hash={}", cfg.m, cfg.g, cfg.layers.len(), code_hash(cfg));
    println!(
        "  bits: total={} payload={} crc={} block-select={}",
        b.total,
        b.payload(),
        cfg.crc.map_or("none".into(), |c| c.name()),
        b.b0
    );
    for (l, layer) in cfg.layers.iter().enumerate() {
        println!(
            "  layer {}: K={} |alphabet|={} candidates={} location bits={} value bits={}",
            l + 1,
            layer.sparsity,
            layer.alphabet.len(),
            layer.candidate_cardinality,
            b.per_layer_loc[l],
            b.per_layer_val[l]
        );
    }
    println!(
        "  scenario={} decoder={} snr points={}",
        spec.scenario.name(),
        spec.decoder.label(),
        spec.snr_points_db.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct LayerJson {
    support: Vec<usize>,
    values: Vec<[f64; 2]>,
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
}

fn layers_json(msg: &SparseMessage) -> Vec<LayerJson> {
    msg.layers
        .iter()
        .map(|l| LayerJson {
            support: l.support.clone(),
            values: l.values.iter().map(pair).collect(),
        })
        .collect()
}

#[derive(Serialize)]
struct EncodeOutput {
    payload: String,
    bits: String,
    block: usize,
    layers: Vec<LayerJson>,
    samples: Vec<[f64; 2]>,
}

fn encode(path: &Path, hex: &str) -> Result<(), Failure> {
    let spec = load_sweep_spec(path)?;
    let code = BossCode::new(spec.code)?;
    let payload = bits_from_hex(hex, code.budget().payload() as usize)?;
    let bits = code.attach_crc(&payload);
    let msg = code.encode_message(&bits)?;
    let c = code.synthesize(&msg)?;
    let out = EncodeOutput {
        payload: bits_to_hex(&payload),
        bits: bits_to_hex(&bits),
        block: msg.block,
        layers: layers_json(&msg),
        samples: c.samples.iter().map(pair).collect(),
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

/// Received block. Single-antenna scenarios read `y` (or `samples`, so the
/// output of `encode` decodes as a clean block); SIMO reads `ys`, or `y` as
/// a one-antenna block. Other keys (such as the rest of `encode`'s output)
/// are ignored.
#[derive(Deserialize)]
struct DecodeInput {
    #[serde(alias = "samples")]
    y: Option<Vec<[f64; 2]>>,
    ys: Option<Vec<Vec<[f64; 2]>>>,
    /// Noise variance per complex sample; defaults to a negligible value.
    noise_variance: Option<f64>,
    /// Per-sample channel gains for siso-ofdm; defaults to all ones.
    lambda: Option<Vec<[f64; 2]>>,
    /// Per-antenna gains for coherent-ml; defaults to all ones.
    eta: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct DecodeOutput {
    decoder: String,
    block: usize,
    layers: Vec<LayerJson>,
    bits: Option<String>,
    payload: Option<String>,
    crc_ok: Option<bool>,
    reachable: bool,
}

fn decode(path: &Path, input: &Path) -> Result<(), Failure> {
    let spec = load_sweep_spec(path)?;
    let code = BossCode::new(spec.code.clone())?;
    let text = fs::read_to_string(input).map_err(|e| BossError::io(input, e))?;
    let inp: DecodeInput =
        serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", input.display())))?;
    let msg = decode_block(&spec, &code, &inp)?;
    let bits = code.decode_message(&msg).ok();
    let crc_bits = code.budget().crc_bits as usize;
    let out = DecodeOutput {
        decoder: spec.decoder.label(),
        block: msg.block,
        layers: layers_json(&msg),
        payload: bits.as_ref().map(|b| bits_to_hex(&b[..b.len() - crc_bits])),
        crc_ok: match (code.config().crc, &bits) {
            (Some(crc), Some(b)) => crc.check(b).ok(),
            _ => None,
        },
        bits: bits.as_ref().map(|b| bits_to_hex(b)),
        reachable: bits.is_some(),
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

fn decode_block(spec: &SweepSpec, code: &BossCode, inp: &DecodeInput) -> Result<SparseMessage, Failure> {
    let m = code.m();
    let sigma = inp.noise_variance.unwrap_or(0.0);
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(input_error("noise_variance must be finite and non-negative"));
    }
    let single = || -> Result<Vec<Complex64>, Failure> {
        inp.y
            .as_deref()
            .map(complex)
            .ok_or_else(|| input_error("input needs `y` (or `samples`)"))
    };
    let exec = Exec::Parallel;
    let msg = match (&spec.scenario, spec.decoder) {
        (_, DecoderSpec::MapAwgn) => decode_map_awgn(code, &single()?, sigma, exec)?.msg,
        (Scenario::SisoOfdm(_), d) => {
            let lambda = inp.lambda.as_deref().map(complex).unwrap_or_else(|| vec![Complex64::new(1.0, 0.0); m]);
            let dec = MmseAmapDecoder::new(code, &lambda, sigma)?;
            let y = single()?;
            match d {
                DecoderSpec::MmseAmapList { list_size } => dec.decode_list(&y, list_size, exec)?.msg,
                _ => dec.decode(&y, exec)?.msg,
            }
        }
        (Scenario::Simo { .. }, d) => {
            let ys: Vec<Vec<Complex64>> = match (&inp.ys, &inp.y) {
                (Some(ys), _) => ys.iter().map(|y| complex(y)).collect(),
                (None, Some(y)) => vec![complex(y)],
                (None, None) => return Err(input_error("input needs `ys` (or `y` for one antenna)")),
            };
            match d {
                DecoderSpec::QuasiMl => quasi_ml_decode(code, &ys, exec)?.msg,
                DecoderSpec::Nsd { sphere } => nsd_decode(code, &ys, sphere, exec)?.msg,
                _ => {
                    let eta = inp
                        .eta
                        .as_deref()
                        .map(complex)
                        .unwrap_or_else(|| vec![Complex64::new(1.0, 0.0); ys.len()]);
                    coherent_ml_decode(code, &ys, &eta, exec)?.msg
                }
            }
        }
        (Scenario::Awgn, d) => {
            return Err(input_error(format!("decoder {} does not apply to awgn", d.label())));
        }
    };
    Ok(msg)
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    config: String,
    scenario: &'a str,
    decoder: &'a str,
    code_hash: &'a str,
    seed: u64,
    rng_version: &'a str,
    threads: usize,
    max_trials: u64,
    max_errors: u64,
    batch: u64,
    wall_time_s: f64,
}

fn sweep(path: &Path, out: &Path, threads: Option<usize>, gnuplot: Option<&Path>) -> Result<(), Failure> {
    let spec = load_sweep_spec(path)?;
    if spec.snr_points_db.is_empty() {
        eprintln!("warning: no SNR points configured; writing a header-only CSV");
    }
    let threads = threads.unwrap_or(spec.threads);
    let result = run_sweep(&spec, threads)?;
    for p in &result.points {
        eprintln!(
            "{:>8.3} dB  {:>9} trials  {:>6} errors  BLER {:.3e} [{:.3e}, {:.3e}]",
            p.snr_db, p.trials, p.block_errors, p.bler, p.ci_low, p.ci_high
        );
    }
    write_file(out, &emit_csv(&result))?;
    let meta = SweepMeta {
        config: path.display().to_string(),
        scenario: &result.scenario,
        decoder: &result.decoder,
        code_hash: &result.code_hash,
        seed: result.seed,
        rng_version: &result.rng_version,
        threads: effective_threads(threads),
        max_trials: spec.max_trials,
        max_errors: spec.max_errors,
        batch: spec.batch,
        wall_time_s: result.wall_time_s,
    };
    let mut meta_path = out.as_os_str().to_owned();
    meta_path.push(".meta.json");
    write_file(Path::new(&meta_path), &serde_json::to_string_pretty(&meta).expect("serializable"))?;
    if let Some(g) = gnuplot {
        let name = out.file_name().map_or_else(|| out.display().to_string(), |n| n.to_string_lossy().into_owned());
        write_file(g, &emit_gnuplot(&result, &name))?;
    }
    Ok(())
}

fn effective_threads(requested: usize) -> usize {
    if !cfg!(feature = "parallel") {
        1
    } else if requested == 0 {
        default_threads()
    } else {
        requested
    }
}

fn run_selftest() -> Result<(), Failure> {
    let checks = selftest();
    let mut failed = 0;
    for c in &checks {
        if c.passed {
            println!("ok    {}", c.name);
        } else {
            failed += 1;
            println!("FAIL  {}: {}", c.name, c.detail);
        }
    }
    if failed == 0 {
        println!("selftest passed ({} checks)", checks.len());
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_SELFTEST,
            message: format!("{failed} of {} selftest checks failed", checks.len()),
        })
    }
}
