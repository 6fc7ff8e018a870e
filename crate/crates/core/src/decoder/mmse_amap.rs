//! MMSE-A-MAP decoding over the SISO-OFDM multipath channel.
//!
//! The receiver knows the per-sample channel `Λ = diag(λ)`. It applies the
//! codeword-level MMSE equalizer `W = diag(w)` once per channel realization,
//! then under every block hypothesis decorrelates `ỹ_g = U_g† W y` and
//! recovers the layers with the approximate MAP metric. Interference between
//! layers enters through `Q_g = U_g† W Λ U_g`:
//!
//! * its diagonal is `mean(w ⊙ λ)` for every index, because all entries of
//!   `U_g` have modulus `1/√M`;
//! * the interference `γ = Q_g x̂` of earlier layers costs one forward and one
//!   adjoint transform;
//! * columns on an estimated support are formed on demand, only when a layer
//!   has more than one admissible value arrangement.
//!
//! The cost per hypothesis is `O(L M log M)`. Stage three keeps the block
//! minimizing `‖y − Λ U_g x̂_g‖`.

use num_complex::Complex64;

use crate::config::CodeConfig;
use crate::decoder::layered::{decode_layer, decode_layer_alternatives, LayerObservation};
use crate::decoder::map_awgn::layer_limits;
use crate::decoder::{argmin_residual, floor_variance, Decoded, HypothesisEstimate};
use crate::dictionary::Dictionary;
use crate::encoder::{BossCode, LayerAssignment, SparseMessage};
use crate::error::{BossError, Result};
use crate::par::{map_indexed, Exec};

/// `σ_c² = tr(K_xx)/M`, the prior variance of every codeword sample.
pub fn codeword_prior_variance(cfg: &CodeConfig) -> f64 {
    cfg.mean_sample_energy()
}

/// `w_m = λ_m* σ_c² / (|λ_m|² σ_c² + σ_v²)`.
pub fn build_equalizer(lambda: &[Complex64], sigma_c_sq: f64, sigma_v_sq: f64) -> Vec<Complex64> {
    lambda
        .iter()
        .map(|l| {
            let den = l.norm_sqr() * sigma_c_sq + sigma_v_sq;
            if den == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                l.conj() * (sigma_c_sq / den)
            }
        })
        .collect()
}

/// `σ_ṽ²(m) = σ_v² Σ_j |(U_g)_{j,m}|² |w_j|²`.
pub fn effective_noise_variances(dict: &Dictionary, g: usize, w: &[Complex64], sigma_v_sq: f64) -> Result<Vec<f64>> {
    let weights: Vec<f64> = w.iter().map(|z| z.norm_sqr()).collect();
    Ok(dict
        .weighted_column_energy(g, &weights)?
        .into_iter()
        .map(|e| sigma_v_sq * e)
        .collect())
}

/// `Q_g x = U_g† (w ⊙ λ ⊙ U_g x)`.
fn apply_q(dict: &Dictionary, g: usize, wl: &[Complex64], x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut u = dict.forward(g, x)?;
    for (v, f) in u.iter_mut().zip(wl) {
        *v *= f;
    }
    dict.adjoint(g, &u)
}

fn hadamard(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Entries `(Q_g)_{r,c}` for `r ∈ rows`, `c ∈ cols`, as `out[r_idx][c_idx]`.
/// Costs one forward and one adjoint transform per requested column.
pub fn q_entries(
    dict: &Dictionary,
    g: usize,
    w: &[Complex64],
    lambda: &[Complex64],
    rows: &[usize],
    cols: &[usize],
) -> Result<Vec<Vec<Complex64>>> {
    let m = dict.m();
    if w.len() != m || lambda.len() != m {
        return Err(BossError::WrongLength {
            expected: m,
            got: w.len().min(lambda.len()),
        });
    }
    for &i in rows.iter().chain(cols) {
        if i >= m {
            return Err(BossError::IndexOutOfRange { index: i, bound: m });
        }
    }
    let wl = hadamard(w, lambda);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); cols.len()]; rows.len()];
    let mut e = vec![Complex64::new(0.0, 0.0); m];
    for (ci, &c) in cols.iter().enumerate() {
        e[c] = Complex64::new(1.0, 0.0);
        let col = apply_q(dict, g, &wl, &e)?;
        e[c] = Complex64::new(0.0, 0.0);
        for (ri, &r) in rows.iter().enumerate() {
            out[ri][ci] = col[r];
        }
    }
    Ok(out)
}

/// Diagonal of `Q_g` for every index.
pub fn q_diagonal(dict: &Dictionary, g: usize, w: &[Complex64], lambda: &[Complex64]) -> Result<Vec<Complex64>> {
    dict.weighted_column_energy_complex(g, &hadamard(w, lambda))
}

/// Equalizer and derived quantities for one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerState {
    pub lambda: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub sigma_c_sq: f64,
    pub sigma_v_sq: f64,
    /// `w ⊙ λ`, the diagonal of `W Λ`.
    pub wl: Vec<Complex64>,
}

impl EqualizerState {
    pub fn new(cfg: &CodeConfig, lambda: &[Complex64], sigma_v_sq: f64) -> Result<Self> {
        if lambda.len() != cfg.m {
            return Err(BossError::WrongLength {
                expected: cfg.m,
                got: lambda.len(),
            });
        }
        if !(sigma_v_sq >= 0.0) || !sigma_v_sq.is_finite() {
            return Err(BossError::ParameterOutOfRange(format!(
                "noise variance must be finite and non-negative, got {sigma_v_sq}"
            )));
        }
        let sigma_c_sq = codeword_prior_variance(cfg);
        let sigma_v_sq = floor_variance(sigma_v_sq);
        let w = build_equalizer(lambda, sigma_c_sq, sigma_v_sq);
        let wl = hadamard(&w, lambda);
        Ok(EqualizerState {
            lambda: lambda.to_vec(),
            w,
            sigma_c_sq,
            sigma_v_sq,
            wl,
        })
    }
}

/// Entry of a CRC-aided candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct ListEntry {
    pub msg: SparseMessage,
    /// Stage-three residual `‖y − Λ U_g x̂‖` (smaller is better).
    pub metric: f64,
    /// Decoded bits pass the CRC (for codes without a CRC: the message is encoder-reachable).
    pub crc_ok: bool,
}

/// List decoding output.
#[derive(Debug, Clone, PartialEq)]
pub struct ListDecoded {
    pub msg: SparseMessage,
    /// At most `S` entries sorted by metric.
    pub list: Vec<ListEntry>,
}

/// A per-hypothesis view: decorrelated observation and noise model.
struct HypothesisView {
    g: usize,
    y: Vec<Complex64>,
    q_diag: Vec<Complex64>,
    noise_var: Vec<f64>,
}

/// MMSE-A-MAP decoder bound to one code and one channel realization.
/// Read-only after construction.
#[derive(Debug, Clone)]
pub struct MmseAmapDecoder<'c> {
    code: &'c BossCode,
    eq: EqualizerState,
}

#[derive(Debug, Clone)]
struct Path {
    layers: Vec<LayerAssignment>,
    metric: f64,
}

impl Path {
    fn entries(&self) -> Vec<(usize, Complex64)> {
        self.layers
            .iter()
            .flat_map(|l| l.support.iter().copied().zip(l.values.iter().copied()))
            .collect()
    }

    fn supports(&self) -> Vec<usize> {
        self.layers.iter().flat_map(|l| l.support.iter().copied()).collect()
    }
}

impl<'c> MmseAmapDecoder<'c> {
    pub fn new(code: &'c BossCode, lambda: &[Complex64], sigma_v_sq: f64) -> Result<Self> {
        Ok(MmseAmapDecoder {
            code,
            eq: EqualizerState::new(code.config(), lambda, sigma_v_sq)?,
        })
    }

    pub fn equalizer(&self) -> &EqualizerState {
        &self.eq
    }

    fn view(&self, g: usize, y: &[Complex64]) -> Result<HypothesisView> {
        let dict = self.code.dictionary();
        let y = dict.adjoint(g, &hadamard(&self.eq.w, y))?;
        let q_diag = q_diagonal(dict, g, &self.eq.w, &self.eq.lambda)?;
        let noise_var = effective_noise_variances(dict, g, &self.eq.w, self.eq.sigma_v_sq)?
            .into_iter()
            .map(floor_variance)
            .collect();
        Ok(HypothesisView { g, y, q_diag, noise_var })
    }

    fn dense(&self, entries: &[(usize, Complex64)]) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.code.m()];
        for &(i, v) in entries {
            x[i] += v;
        }
        x
    }

    /// `γ = Q_g x̂` for the earlier layers, `None` when there are none.
    fn interference(&self, g: usize, entries: &[(usize, Complex64)]) -> Result<Option<Vec<Complex64>>> {
        if entries.is_empty() {
            return Ok(None);
        }
        apply_q(self.code.dictionary(), g, &self.eq.wl, &self.dense(entries)).map(Some)
    }

    fn q_block(&self, g: usize, support: &[usize]) -> Vec<Vec<Complex64>> {
        q_entries(self.code.dictionary(), g, &self.eq.w, &self.eq.lambda, support, support)
            .expect("support indices are in range")
    }

    fn residual(&self, g: usize, y: &[Complex64], entries: &[(usize, Complex64)]) -> Result<f64> {
        let c = self.code.dictionary().forward(g, &self.dense(entries))?;
        Ok(y
            .iter()
            .zip(c.iter().zip(&self.eq.lambda))
            .map(|(a, (b, l))| (a - b * l).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Greedy layered decoding under one hypothesis.
    fn greedy(&self, view: &HypothesisView) -> Result<Path> {
        let cfg = self.code.config();
        let mut path = Path { layers: Vec::new(), metric: 0.0 };
        for l in 0..cfg.num_layers() {
            let entries = path.entries();
            let gamma = self.interference(view.g, &entries)?;
            let obs = LayerObservation {
                y: &view.y,
                q_diag: &view.q_diag,
                gamma: gamma.as_deref(),
                noise_var: &view.noise_var,
            };
            let candidates = cfg.candidate_set(l, &path.supports());
            let d = decode_layer(&obs, &cfg.layers[l], &candidates, layer_limits(self.code, l), |s| {
                self.q_block(view.g, s)
            })
            .expect("rank zero is always reachable");
            path.metric += d.log_posterior;
            path.layers.push(d.assignment);
        }
        Ok(path)
    }

    /// Beam of width `width` over the layers; the greedy path is always kept.
    fn beam(&self, view: &HypothesisView, width: usize) -> Result<Vec<Path>> {
        let cfg = self.code.config();
        let mut beam = vec![Path { layers: Vec::new(), metric: 0.0 }];
        for l in 0..cfg.num_layers() {
            let mut next = Vec::new();
            for path in &beam {
                let entries = path.entries();
                let gamma = self.interference(view.g, &entries)?;
                let obs = LayerObservation {
                    y: &view.y,
                    q_diag: &view.q_diag,
                    gamma: gamma.as_deref(),
                    noise_var: &view.noise_var,
                };
                let candidates = cfg.candidate_set(l, &path.supports());
                let alts = decode_layer_alternatives(
                    &obs,
                    &cfg.layers[l],
                    &candidates,
                    layer_limits(self.code, l),
                    width,
                    |s| self.q_block(view.g, s),
                );
                for d in alts {
                    let mut p = path.clone();
                    p.metric += d.log_posterior;
                    p.layers.push(d.assignment);
                    next.push(p);
                }
            }
            next.sort_by(|a, b| b.metric.total_cmp(&a.metric));
            next.truncate(width);
            beam = next;
        }
        let greedy = self.greedy(view)?;
        if !beam.iter().any(|p| p.layers == greedy.layers) {
            beam.pop();
            beam.push(greedy);
        }
        Ok(beam)
    }

    fn hypothesis(&self, g: usize, y: &[Complex64]) -> Result<HypothesisEstimate> {
        let view = self.view(g, y)?;
        let path = self.greedy(&view)?;
        let residual = self.residual(g, y, &path.entries())?;
        Ok(HypothesisEstimate {
            g,
            msg: SparseMessage { block: g, layers: path.layers },
            score: path.metric,
            residual,
        })
    }

    fn check_len(&self, y: &[Complex64]) -> Result<()> {
        if y.len() != self.code.m() {
            return Err(BossError::WrongLength {
                expected: self.code.m(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Algorithm: equalize, decode every hypothesis, keep the smallest residual.
    pub fn decode(&self, y: &[Complex64], exec: Exec) -> Result<Decoded> {
        self.check_len(y)?;
        let hypotheses = map_indexed(exec, self.code.reachable_blocks(), |g| self.hypothesis(g, y))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let best = argmin_residual(&hypotheses);
        Ok(Decoded {
            msg: hypotheses[best].msg.clone(),
            hypotheses,
        })
    }

    /// CRC-aided list decoding with list size `s`.
    pub fn decode_list(&self, y: &[Complex64], s: usize, exec: Exec) -> Result<ListDecoded> {
        self.check_len(y)?;
        if s == 0 {
            return Err(BossError::ParameterOutOfRange("list size must be at least 1".into()));
        }
        let per_hyp = map_indexed(exec, self.code.reachable_blocks(), |g| -> Result<Vec<(f64, SparseMessage)>> {
            let view = self.view(g, y)?;
            self.beam(&view, s)?
                .into_iter()
                .map(|p| {
                    let r = self.residual(g, y, &p.entries())?;
                    Ok((r, SparseMessage { block: g, layers: p.layers }))
                })
                .collect()
        });
        let mut all = Vec::new();
        for h in per_hyp {
            all.extend(h?);
        }
        // Stable sort keeps block order, then beam order, on equal residuals.
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all.truncate(s);
        let crc = self.code.config().crc;
        let list: Vec<ListEntry> = all
            .into_iter()
            .map(|(metric, msg)| {
                let crc_ok = match self.code.decode_message(&msg) {
                    Ok(bits) => crc.is_none_or(|c| c.check(&bits).unwrap_or(false)),
                    Err(_) => false,
                };
                ListEntry { msg, metric, crc_ok }
            })
            .collect();
        let chosen = list.iter().find(|e| e.crc_ok).unwrap_or(&list[0]).msg.clone();
        Ok(ListDecoded { msg: chosen, list })
    }
}

/// One-shot MMSE-A-MAP decoding.
pub fn decode_mmse_amap(
    code: &BossCode,
    y: &[Complex64],
    lambda: &[Complex64],
    sigma_v_sq: f64,
    exec: Exec,
) -> Result<Decoded> {
    MmseAmapDecoder::new(code, lambda, sigma_v_sq)?.decode(y, exec)
}

/// One-shot CRC-aided list MMSE-A-MAP decoding.
pub fn decode_mmse_amap_list(
    code: &BossCode,
    y: &[Complex64],
    lambda: &[Complex64],
    sigma_v_sq: f64,
    s: usize,
    exec: Exec,
) -> Result<ListDecoded> {
    MmseAmapDecoder::new(code, lambda, sigma_v_sq)?.decode_list(y, s, exec)
}
