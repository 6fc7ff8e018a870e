//! Experiment definitions and the TOML config file format.
//!
//! ```toml
//! [code]
//! m = 64
//! g = 8
//! dict_seed = 12345        # optional
//! crc = "crc3"             # optional: "none", "crc3", "crc6"
//!
//! [layers.1]
//! sparsity = 2
//! alphabet = [1.0]         # reals or [re, im] pairs
//! candidates = 64
//!
//! [channel]
//! scenario = "simo"        # "awgn", "siso-ofdm" or "simo"
//! n_rx = 8                 # simo
//! zeta = 1.0               # simo
//! fft_size = 64            # siso-ofdm
//! data_carriers = 48       # siso-ofdm
//! taps = 7                 # siso-ofdm
//! decay = -1.0             # siso-ofdm
//!
//! [decoder]
//! kind = "nsd"             # "map-awgn", "mmse-amap", "mmse-amap-list",
//!                          # "quasi-ml", "nsd", "coherent-ml"
//! sphere = 4               # nsd
//! list_size = 4            # mmse-amap-list
//!
//! [sweep]
//! snr_db = [0.0, 2.0, 4.0]
//! max_trials = 1000000
//! max_errors = 100
//! seed = 1
//! batch = 1024             # optional
//! threads = 0              # optional, 0 uses every core
//! ```
//!
//! Unknown keys anywhere are errors.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::OfdmGeometry;
use crate::config::{CodeConfig, LayerConfig};
use crate::crc::CrcSpec;
use crate::error::{BossError, Result};
use crate::presets::DEFAULT_DICT_SEED;

/// Channel model of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Awgn,
    SisoOfdm(OfdmGeometry),
    Simo { n_rx: usize, zeta: f64 },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Awgn => "awgn",
            Scenario::SisoOfdm(_) => "siso-ofdm",
            Scenario::Simo { .. } => "simo",
        }
    }
}

/// Decoder and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderSpec {
    MapAwgn,
    MmseAmap,
    MmseAmapList { list_size: usize },
    QuasiMl,
    Nsd { sphere: usize },
    CoherentMl,
}

impl DecoderSpec {
    /// Identifier used in CSV output, with parameters.
    pub fn label(&self) -> String {
        match self {
            DecoderSpec::MapAwgn => "map-awgn".into(),
            DecoderSpec::MmseAmap => "mmse-amap".into(),
            DecoderSpec::MmseAmapList { list_size } => format!("mmse-amap-list-s{list_size}"),
            DecoderSpec::QuasiMl => "quasi-ml".into(),
            DecoderSpec::Nsd { sphere } => format!("nsd-t{sphere}"),
            DecoderSpec::CoherentMl => "coherent-ml".into(),
        }
    }
}

/// A complete Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub code: CodeConfig,
    pub scenario: Scenario,
    pub decoder: DecoderSpec,
    /// Es/N0 points in dB.
    pub snr_points_db: Vec<f64>,
    pub max_trials: u64,
    pub max_errors: u64,
    pub master_seed: u64,
    /// Trials evaluated per parallel batch before the stopping rule is checked.
    pub batch: u64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
}

pub const DEFAULT_MAX_TRIALS: u64 = 1_000_000;
pub const DEFAULT_MAX_ERRORS: u64 = 100;
pub const DEFAULT_BATCH: u64 = 1024;

impl SweepSpec {
    pub fn new(code: CodeConfig, scenario: Scenario, decoder: DecoderSpec, snr_points_db: Vec<f64>) -> Self {
        SweepSpec {
            code,
            scenario,
            decoder,
            snr_points_db,
            max_trials: DEFAULT_MAX_TRIALS,
            max_errors: DEFAULT_MAX_ERRORS,
            master_seed: 1,
            batch: DEFAULT_BATCH,
            threads: 0,
        }
    }

    /// Every problem with the spec; empty iff it can run.
    pub fn validate(&self) -> Vec<String> {
        let mut out = self.code.validate();
        if self.snr_points_db.iter().any(|s| !s.is_finite()) {
            out.push("SNR points must be finite".into());
        }
        if self.max_trials == 0 {
            out.push("max_trials must be at least 1".into());
        }
        if self.max_errors == 0 {
            out.push("max_errors must be at least 1".into());
        }
        if self.batch == 0 {
            out.push("batch must be at least 1".into());
        }
        match &self.scenario {
            Scenario::Awgn => {}
            Scenario::SisoOfdm(geo) => {
                if let Err(e) = geo.validate() {
                    out.push(e.to_string());
                }
            }
            Scenario::Simo { n_rx, zeta } => {
                if *n_rx == 0 {
                    out.push("n_rx must be at least 1".into());
                }
                if !(*zeta > 0.0) || !zeta.is_finite() {
                    out.push("zeta must be positive".into());
                }
            }
        }
        let wants = |s: &str| format!("decoder {} needs the {s} scenario", self.decoder.label());
        match (&self.decoder, &self.scenario) {
            (DecoderSpec::MapAwgn, Scenario::Awgn) => {}
            (DecoderSpec::MapAwgn, _) => out.push(wants("awgn")),
            (DecoderSpec::MmseAmap | DecoderSpec::MmseAmapList { .. }, Scenario::SisoOfdm(_)) => {}
            (DecoderSpec::MmseAmap | DecoderSpec::MmseAmapList { .. }, _) => out.push(wants("siso-ofdm")),
            (DecoderSpec::QuasiMl | DecoderSpec::Nsd { .. } | DecoderSpec::CoherentMl, Scenario::Simo { .. }) => {}
            (_, _) => out.push(wants("simo")),
        }
        match self.decoder {
            DecoderSpec::QuasiMl | DecoderSpec::Nsd { .. } if !self.code.is_single_layer_singleton() => {
                out.push("non-coherent decoders need a single layer with a one-value alphabet".into());
            }
            DecoderSpec::Nsd { sphere } => {
                if let Some(layer) = self.code.layers.first() {
                    if sphere < layer.sparsity || sphere > layer.candidate_cardinality {
                        out.push(format!(
                            "sphere parameter {sphere} must lie in [K, |M|] = [{}, {}]",
                            layer.sparsity, layer.candidate_cardinality
                        ));
                    }
                }
            }
            DecoderSpec::MmseAmapList { list_size: 0 } => {
                out.push("list_size must be at least 1".into());
            }
            _ => {}
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(BossError::InvalidConfig(v))
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    code: CodeSection,
    layers: BTreeMap<String, LayerSection>,
    channel: ChannelSection,
    decoder: DecoderSection,
    sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct CodeSection {
    m: usize,
    g: usize,
    dict_seed: Option<u64>,
    crc: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum AlphabetValue {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LayerSection {
    sparsity: usize,
    alphabet: Vec<AlphabetValue>,
    candidates: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    scenario: String,
    n_rx: Option<usize>,
    zeta: Option<f64>,
    fft_size: Option<usize>,
    data_carriers: Option<usize>,
    taps: Option<usize>,
    decay: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DecoderSection {
    kind: String,
    sphere: Option<usize>,
    list_size: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    snr_db: Vec<f64>,
    max_trials: Option<u64>,
    max_errors: Option<u64>,
    seed: Option<u64>,
    batch: Option<u64>,
    threads: Option<usize>,
}

fn cfg_err(msg: impl Into<String>) -> BossError {
    BossError::ConfigFile(msg.into())
}

fn reject_unused(section: &str, scenario: &str, keys: &[(&str, bool)]) -> Result<()> {
    for (k, present) in keys {
        if *present {
            return Err(cfg_err(format!("[{section}] key `{k}` does not apply to `{scenario}`")));
        }
    }
    Ok(())
}

/// Parses a config file body into a validated [`SweepSpec`].
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec> {
    let file: FileConfig = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;

    let mut numbered: Vec<(usize, LayerSection)> = Vec::new();
    for (k, v) in file.layers {
        let n: usize = k
            .parse()
            .map_err(|_| cfg_err(format!("layer section name `layers.{k}` must be a positive integer")))?;
        numbered.push((n, v));
    }
    numbered.sort_by_key(|(n, _)| *n);
    for (i, (n, _)) in numbered.iter().enumerate() {
        if *n != i + 1 {
            return Err(cfg_err("layers must be numbered 1, 2, ... without gaps"));
        }
    }
    let layers = numbered
        .into_iter()
        .map(|(_, l)| {
            let alphabet = l
                .alphabet
                .iter()
                .map(|a| match a {
                    AlphabetValue::Real(r) => Complex64::new(*r, 0.0),
                    AlphabetValue::Complex([re, im]) => Complex64::new(*re, *im),
                })
                .collect();
            LayerConfig::new(l.sparsity, alphabet, l.candidates)
        })
        .collect();
    let mut code = CodeConfig::new(file.code.m, file.code.g, layers, file.code.dict_seed.unwrap_or(DEFAULT_DICT_SEED));
    if let Some(name) = &file.code.crc {
        if name != "none" {
            code.crc = Some(CrcSpec::by_name(name).ok_or_else(|| cfg_err(format!("unknown CRC `{name}`")))?);
        }
    }

    let ch = &file.channel;
    let scenario = match ch.scenario.as_str() {
        "awgn" => {
            reject_unused(
                "channel",
                "awgn",
                &[
                    ("n_rx", ch.n_rx.is_some()),
                    ("zeta", ch.zeta.is_some()),
                    ("fft_size", ch.fft_size.is_some()),
                    ("data_carriers", ch.data_carriers.is_some()),
                    ("taps", ch.taps.is_some()),
                    ("decay", ch.decay.is_some()),
                ],
            )?;
            Scenario::Awgn
        }
        "siso-ofdm" => {
            reject_unused("channel", "siso-ofdm", &[("n_rx", ch.n_rx.is_some()), ("zeta", ch.zeta.is_some())])?;
            let d = OfdmGeometry::default();
            Scenario::SisoOfdm(OfdmGeometry {
                fft_size: ch.fft_size.unwrap_or(d.fft_size),
                data_carriers: ch.data_carriers.unwrap_or(d.data_carriers),
                n_taps: ch.taps.unwrap_or(d.n_taps),
                decay: ch.decay.unwrap_or(d.decay),
            })
        }
        "simo" => {
            reject_unused(
                "channel",
                "simo",
                &[
                    ("fft_size", ch.fft_size.is_some()),
                    ("data_carriers", ch.data_carriers.is_some()),
                    ("taps", ch.taps.is_some()),
                    ("decay", ch.decay.is_some()),
                ],
            )?;
            Scenario::Simo {
                n_rx: ch.n_rx.ok_or_else(|| cfg_err("[channel] simo needs `n_rx`"))?,
                zeta: ch.zeta.unwrap_or(1.0),
            }
        }
        other => return Err(cfg_err(format!("unknown scenario `{other}`"))),
    };

    let dc = &file.decoder;
    let decoder = match dc.kind.as_str() {
        "map-awgn" => DecoderSpec::MapAwgn,
        "mmse-amap" => DecoderSpec::MmseAmap,
        "mmse-amap-list" => DecoderSpec::MmseAmapList {
            list_size: dc.list_size.ok_or_else(|| cfg_err("[decoder] mmse-amap-list needs `list_size`"))?,
        },
        "quasi-ml" => DecoderSpec::QuasiMl,
        "nsd" => DecoderSpec::Nsd {
            sphere: dc.sphere.ok_or_else(|| cfg_err("[decoder] nsd needs `sphere`"))?,
        },
        "coherent-ml" => DecoderSpec::CoherentMl,
        other => return Err(cfg_err(format!("unknown decoder `{other}`"))),
    };
    if dc.sphere.is_some() && !matches!(decoder, DecoderSpec::Nsd { .. }) {
        return Err(cfg_err("[decoder] key `sphere` only applies to nsd"));
    }
    if dc.list_size.is_some() && !matches!(decoder, DecoderSpec::MmseAmapList { .. }) {
        return Err(cfg_err("[decoder] key `list_size` only applies to mmse-amap-list"));
    }

    let mut spec = SweepSpec::new(code, scenario, decoder, Vec::new());
    if let Some(s) = file.sweep {
        spec.snr_points_db = s.snr_db;
        spec.max_trials = s.max_trials.unwrap_or(DEFAULT_MAX_TRIALS);
        spec.max_errors = s.max_errors.unwrap_or(DEFAULT_MAX_ERRORS);
        spec.master_seed = s.seed.unwrap_or(1);
        spec.batch = s.batch.unwrap_or(DEFAULT_BATCH);
        spec.threads = s.threads.unwrap_or(0);
    }
    spec.check()?;
    Ok(spec)
}

/// Reads and parses a config file.
pub fn load_sweep_spec(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| BossError::io(path, e))?;
    parse_sweep_spec(&text)
}
