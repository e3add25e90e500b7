//! The three measurement scans: kick calibration, excitation versus pulse
//! number, and the absorption spectrum, plus the conversion between
//! signals and effective absorption probabilities.
//!
//! Every ensemble in a run uses the same master seed, trial `i` drawing from
//! ChaCha8 stream `i`. Scan points therefore share their random numbers,
//! and a spectrum point with the same laser settings as a pulse-number
//! point reproduces it exactly.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::catseq::{
    analytic_signal_at, direct_signal, phase_scan, uniform_phase_grid, CatParams, CatSequence, DecoherenceModel,
    Recoil, DEFAULT_FIT_TOLERANCE,
};
use crate::crystal::SyncReport;
use crate::error::{Error, Result};
use crate::hilbert::FockSpace;
use crate::molecule::{ensemble_absorption, MolecularTransition, PulseTrainSpec, TrialOptions};

/// Fixed leading CSV columns of every scan.
pub const SCAN_COLUMNS: [&str; 7] = ["x", "S", "p_abs_eff", "stderr", "eta_m", "alpha_mag", "s_max_t"];

/// Signal expected for one absorbed photon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignalModel {
    /// Lamb-Dicke factor of the molecule's recoil.
    pub eta_m: f64,
    pub alpha_mag: f64,
    pub decoherence: DecoherenceModel,
}

impl SignalModel {
    pub fn new(eta_m: f64, alpha_mag: f64, decoherence: DecoherenceModel) -> Result<Self> {
        if !(eta_m > 0.0 && alpha_mag > 0.0) {
            return Err(Error::Domain(format!(
                "η_m = {eta_m} and |α| = {alpha_mag} must be positive for a reference signal"
            )));
        }
        Ok(SignalModel {
            eta_m,
            alpha_mag,
            decoherence,
        })
    }

    /// 𝒮(η_m) with the ceiling decayed to time `t`.
    pub fn reference(&self, t: f64) -> f64 {
        analytic_signal_at(self.eta_m, self.alpha_mag, Some(&self.decoherence), t).expect("validated inputs")
    }
}

/// p̃_abs = 𝒮 / 𝒮(η_m).
pub fn effective_absorption(signal: f64, reference: f64) -> f64 {
    signal / reference
}

/// 𝒮 predicted for an excitation probability `p_exc`.
pub fn predicted_signal(p_exc: f64, reference: f64) -> f64 {
    p_exc * reference
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub x: f64,
    pub s: f64,
    pub p_abs_eff: f64,
    pub stderr: f64,
    pub eta_m: f64,
    pub alpha_mag: f64,
    pub s_max_t: f64,
    /// Values of [`ScanResult::extra_columns`], in order.
    pub extra: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub name: String,
    pub records: Vec<ScanRecord>,
    pub extra_columns: Vec<String>,
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<String>,
}

impl ScanResult {
    pub fn new(name: &str, extra_columns: &[&str]) -> Self {
        ScanResult {
            name: name.to_string(),
            records: Vec::new(),
            extra_columns: extra_columns.iter().map(|s| s.to_string()).collect(),
            metadata: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let fixed = |r: &ScanRecord| match name {
            "x" => Some(r.x),
            "S" => Some(r.s),
            "p_abs_eff" => Some(r.p_abs_eff),
            "stderr" => Some(r.stderr),
            "eta_m" => Some(r.eta_m),
            "alpha_mag" => Some(r.alpha_mag),
            "s_max_t" => Some(r.s_max_t),
            _ => None,
        };
        if let Some(i) = self.extra_columns.iter().position(|c| c == name) {
            return Some(self.records.iter().map(|r| r.extra[i]).collect());
        }
        self.records.iter().map(fixed).collect()
    }

    /// Writes the table; each `comments` entry becomes a leading `# ` line.
    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = SCAN_COLUMNS
            .iter()
            .copied()
            .chain(self.extra_columns.iter().map(String::as_str))
            .collect();
        w.write_record(&header)?;
        for r in &self.records {
            let row: Vec<String> = [r.x, r.s, r.p_abs_eff, r.stderr, r.eta_m, r.alpha_mag, r.s_max_t]
                .iter()
                .chain(&r.extra)
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Signal versus the number of calibrated kicks `D(iη_k)` spaced by one
/// trap period.
///
/// `S` is the closed-form signal with the contrast ceiling. `S_dense` is
/// the same quantity from a Fock-space simulation of the full sequence,
/// scaled by the ceiling; it is NaN where `4 n η_k |α| > π/2`, beyond
/// which the phase-scan fit is not defined. The reference for
/// `p_abs_eff` is a single kick.
pub fn kick_calibration_scan(
    space: &FockSpace,
    eta_k: f64,
    n_kicks: &[usize],
    cat: &CatParams,
    model: &DecoherenceModel,
    omega_z: f64,
    phase_points: usize,
) -> Result<ScanResult> {
    let alpha = cat.alpha_magnitude();
    let reference = analytic_signal_at(eta_k, alpha, Some(model), 0.0)?;
    let grid = uniform_phase_grid(phase_points);
    let mut scan = ScanResult::new("kickscan", &["eta", "S_dense", "S_direct"]);
    let mut dense_limit = 0usize;
    for &n in n_kicks {
        let eta = n as f64 * eta_k;
        let s = analytic_signal_at(eta, alpha, Some(model), 0.0)?;
        let dense = if 4.0 * eta * alpha <= std::f64::consts::FRAC_PI_2 {
            let seq = CatSequence {
                cat: *cat,
                recoil: Recoil::Kicks {
                    n_kick: n,
                    eta_k,
                    spacing: TAU / omega_z,
                    omega_z,
                },
            };
            dense_limit = dense_limit.max(n);
            model.s_max * phase_scan(space, &seq, &grid, DEFAULT_FIT_TOLERANCE)?.signal
        } else {
            f64::NAN
        };
        scan.records.push(ScanRecord {
            x: n as f64,
            s,
            p_abs_eff: effective_absorption(s, reference),
            stderr: 0.0,
            eta_m: eta_k,
            alpha_mag: alpha,
            s_max_t: model.s_max,
            extra: vec![eta, dense, direct_signal(eta)],
        });
    }
    scan.metadata.insert("dense_valid_max_n_kick".into(), dense_limit.into());
    scan.metadata.insert("fock_cutoff".into(), space.cutoff().into());
    scan.metadata.insert("phase_points".into(), phase_points.into());
    Ok(scan)
}

/// Monte-Carlo excitation after each requested number of pulses, turned
/// into predicted signals with the ceiling decayed over the train.
#[allow(clippy::too_many_arguments)]
pub fn pulse_number_scan(
    spec: &PulseTrainSpec,
    transition: &MolecularTransition,
    signal: &SignalModel,
    n_pulses: &[usize],
    n_trials: usize,
    master_seed: u64,
    options: TrialOptions,
    sync: Option<&SyncReport>,
) -> Result<ScanResult> {
    if n_pulses.is_empty() {
        return Err(Error::Config("pulse-number scan needs at least one n_pulse value".into()));
    }
    let longest = *n_pulses.iter().max().expect("non-empty");
    let ensemble = ensemble_absorption(&spec.with_n_pulse(longest), transition, n_trials, master_seed, options)?;
    let mut scan = ScanResult::new("pulsescan", &["t_train", "p_exc", "S_stderr", "first_excitation"]);
    if let Some(report) = sync {
        if !report.synchronized {
            scan.warnings.push(format!(
                "trap frequency is {:.6} × the repetition rate, not an integer multiple",
                report.ratio
            ));
        }
    }
    for &n in n_pulses {
        let t = n as f64 / spec.f_rep;
        let reference = signal.reference(t);
        let p = ensemble.mean[n];
        let se = ensemble.stderr[n];
        let s = predicted_signal(p, reference);
        scan.records.push(ScanRecord {
            x: n as f64,
            s,
            p_abs_eff: effective_absorption(s, reference),
            stderr: se,
            eta_m: signal.eta_m,
            alpha_mag: signal.alpha_mag,
            s_max_t: signal.decoherence.contrast_at(t),
            extra: vec![t, p, se * reference, ensemble.first_excitation[n]],
        });
    }
    scan.metadata.insert("n_trials".into(), n_trials.into());
    scan.metadata.insert("master_seed".into(), master_seed.into());
    scan.metadata.insert("integrator_steps".into(), options.integrator.steps.into());
    Ok(scan)
}

/// Measured signal with its uncertainty at one scan point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasuredSignal {
    pub x: f64,
    pub s: f64,
    pub sigma: f64,
}

/// Converts measured signals at pulse numbers `x` into p̃_abs.
pub fn invert_measured(points: &[MeasuredSignal], signal: &SignalModel, f_rep: f64) -> ScanResult {
    let mut scan = ScanResult::new("measured", &["S_sigma"]);
    for m in points {
        let t = m.x / f_rep;
        let reference = signal.reference(t);
        scan.records.push(ScanRecord {
            x: m.x,
            s: m.s,
            p_abs_eff: effective_absorption(m.s, reference),
            stderr: m.sigma / reference,
            eta_m: signal.eta_m,
            alpha_mag: signal.alpha_mag,
            s_max_t: signal.decoherence.contrast_at(t),
            extra: vec![m.sigma],
        });
    }
    scan
}

/// Reads `x, S, sigma_S` rows; a non-numeric first row is a header.
pub fn load_measured(path: &Path) -> Result<Vec<MeasuredSignal>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let nums: Vec<Option<f64>> = row.iter().take(3).map(|f| f.parse().ok()).collect();
        match nums.as_slice() {
            [Some(x), Some(s), Some(sigma)] => out.push(MeasuredSignal { x: *x, s: *s, sigma: *sigma }),
            [Some(x), Some(s)] => out.push(MeasuredSignal { x: *x, s: *s, sigma: 0.0 }),
            _ if line == 0 => continue,
            _ => {
                return Err(Error::Curve(format!(
                    "{}: row {} needs numeric x, S and optional sigma",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Absorption spectrum: one ensemble per laser centre, each with its own
/// transform-limited linewidth.
#[allow(clippy::too_many_arguments)]
pub fn spectrum_scan(
    base: &PulseTrainSpec,
    centers: &[f64],
    linewidths: &[f64],
    transition: &MolecularTransition,
    signal: &SignalModel,
    n_trials: usize,
    master_seed: u64,
    options: TrialOptions,
) -> Result<ScanResult> {
    if centers.len() != linewidths.len() || centers.is_empty() {
        return Err(Error::Config("spectrum needs one linewidth per centre wavenumber".into()));
    }
    let t = base.train_duration();
    let reference = signal.reference(t);
    let mut scan = ScanResult::new("spectrum", &["linewidth_cm", "duration_fs", "p_exc"]);
    for (&nu, &width) in centers.iter().zip(linewidths) {
        let spec = PulseTrainSpec::from_linewidth(nu, width, base.intensity, base.f_rep, base.n_pulse)?;
        let e = ensemble_absorption(&spec, transition, n_trials, master_seed, options)?;
        let p = e.final_mean();
        let s = predicted_signal(p, reference);
        scan.records.push(ScanRecord {
            x: nu,
            s,
            p_abs_eff: effective_absorption(s, reference),
            stderr: e.final_stderr(),
            eta_m: signal.eta_m,
            alpha_mag: signal.alpha_mag,
            s_max_t: signal.decoherence.contrast_at(t),
            extra: vec![width, spec.fwhm_duration * 1e15, p],
        });
    }
    let peak = argmax(&scan);
    scan.metadata.insert("argmax_cm".into(), peak.into());
    scan.metadata.insert("n_trials".into(), n_trials.into());
    scan.metadata.insert("master_seed".into(), master_seed.into());
    Ok(scan)
}

/// Scan variable at the largest `p_abs_eff` (first one on ties).
pub fn argmax(scan: &ScanResult) -> f64 {
    scan.records
        .iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, r| {
            if r.p_abs_eff > best.1 {
                (r.x, r.p_abs_eff)
            } else {
                best
            }
        })
        .0
}

/// Mixes a master seed with an index (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fraction of `n_shots` detections showing excitation when each does so
/// with probability `p`.
pub fn shot_sampler(p: f64, n_shots: u64, seed: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
    }
    if n_shots == 0 {
        return Err(Error::Domain("n_shots must be at least 1".into()));
    }
    let dist = Binomial::new(n_shots, p).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(dist.sample(&mut rng) as f64 / n_shots as f64)
}

/// Adds an `S_shots` column: the signal re-estimated from `n_shots`
/// detections at each extreme of the phase scan, `P = (1 ± S)/2`.
pub fn add_shot_noise(scan: &mut ScanResult, n_shots: u64, master_seed: u64) -> Result<()> {
    scan.extra_columns.push("S_shots".into());
    for (i, r) in scan.records.iter_mut().enumerate() {
        let s = r.s.clamp(-1.0, 1.0);
        let hi = shot_sampler((1.0 + s) / 2.0, n_shots, derive_seed(master_seed, 2 * i as u64))?;
        let lo = shot_sampler((1.0 - s) / 2.0, n_shots, derive_seed(master_seed, 2 * i as u64 + 1))?;
        r.extra.push(hi - lo);
    }
    scan.metadata.insert("n_shots".into(), n_shots.into());
    Ok(())
}
