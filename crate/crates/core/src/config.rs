//! Run configuration: a layered TOML document with units in key names,
//! resolved into the physical objects of the other modules.
//!
//! Layers are merged in order: the built-in paper constants (when asked
//! for), the `--config` file, then `--set key=value` overrides.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catseq::{CatParams, DecoherenceModel, SmaxTable};
use crate::crystal::{lamb_dicke, sync_check, Ion, IonCrystal, LaserGeometry, SyncReport, TimingJitter};
use crate::error::{Error, Result};
use crate::experiment::SignalModel;
use crate::hilbert::auto_cutoff;
use crate::molecule::{
    load_light_spectrum, Integrator, MolecularTransition, Orientation, PulseTrainSpec, TrialOptions,
};
use crate::units::{amu_to_kg, wavenumber_to_k};
use crate::vibsolver::{dvr_solve, read_curve_csv, transition_strength, Curve1D, CurveKind, VibTransition};

/// The shipped configuration with the published experimental constants.
pub const PAPER_DEFAULTS: &str = include_str!("../configs/paper.toml");

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub crystal: CrystalConfig,
    pub cat: CatConfig,
    pub decoherence: DecoherenceConfig,
    #[serde(default)]
    pub kick: KickConfig,
    pub laser: LaserConfig,
    pub transition: TransitionConfig,
    #[serde(default)]
    pub signal: SignalConfig,
    #[serde(default)]
    pub sync: SyncConfig,
    #[serde(default)]
    pub pulsescan: PulseScanConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub dvr: DvrConfig,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub atom_mass_u: f64,
    pub molecule_mass_u: f64,
    /// ω_z/2π of the axial in-phase mode; alternative to `single_ion_khz`.
    pub in_phase_khz: Option<f64>,
    /// Axial frequency of the atom alone.
    pub single_ion_khz: Option<f64>,
    /// Qubit laser wavelength, for η_a.
    pub qubit_wavelength_nm: f64,
    #[serde(default = "one")]
    pub qubit_cos_chi: f64,
    /// Projection of the mid-infrared beam on the trap axis, for η_m.
    #[serde(default = "one")]
    pub probe_cos_chi: f64,
    /// Wavenumber of the absorbed photon; defaults to the transition.
    pub recoil_nu_cm: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatConfig {
    /// Cat size; alternative to `duration_us`.
    pub alpha_mag: Option<f64>,
    pub duration_us: Option<f64>,
    /// Carrier Rabi frequency Ω₀/2π.
    pub rabi_khz: f64,
    /// Overrides the Lamb-Dicke factor computed from the crystal.
    pub eta_a: Option<f64>,
    #[serde(default)]
    pub phi_minus_rad: f64,
    /// Fock cutoff; 0 selects the automatic rule.
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: usize,
    #[serde(default = "default_phase_points")]
    pub phase_points: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceConfig {
    pub s_max: Option<f64>,
    pub tau_d_ms: f64,
    /// `[[|α|, S_max], …]`; used instead of `s_max` when present.
    pub s_max_table: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    pub eta_k: f64,
    pub n_kick: Vec<usize>,
}

impl Default for KickConfig {
    fn default() -> Self {
        KickConfig {
            eta_k: 0.0193,
            n_kick: (0..=8).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    pub nu_center_cm: f64,
    /// Spectral FWHM; alternative to `duration_fs` or `spectrum_csv`.
    pub linewidth_cm: Option<f64>,
    pub duration_fs: Option<f64>,
    /// Measured light spectrum (wavenumber, intensity) giving centre and width.
    pub spectrum_csv: Option<PathBuf>,
    pub intensity_w_cm2: f64,
    pub f_rep_khz: f64,
    pub n_pulse: usize,
    #[serde(default)]
    pub orientation: OrientationMode,
    #[serde(default = "default_steps")]
    pub rk4_steps: usize,
    #[serde(default = "default_window")]
    pub window_sigmas: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationMode {
    #[default]
    PerTrial,
    PerPulse,
    Aligned,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionConfig {
    pub nu0_cm: Option<f64>,
    pub f_eg: Option<f64>,
    /// Take ν₀ and f_eg from the `[dvr]` curves instead.
    #[serde(default)]
    pub from_dvr: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    /// Displacement to evaluate; defaults to the calibrated kick.
    pub eta: Option<f64>,
    #[serde(default)]
    pub t_ms: f64,
    /// Also simulate the sequence in Fock space.
    #[serde(default)]
    pub dense: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncConfig {
    pub trap_jitter_hz: f64,
    pub rep_jitter_hz: f64,
    pub wait_us: f64,
}

impl Default for SyncConfig {
    fn default() -> Self {
        SyncConfig {
            trap_jitter_hz: 50.0,
            rep_jitter_hz: 10.0,
            wait_us: 340.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseScanConfig {
    pub n_pulse: Vec<usize>,
    /// Measured (n_pulse, S, σ_S) to convert into p̃_abs.
    pub measured_csv: Option<PathBuf>,
}

impl Default for PulseScanConfig {
    fn default() -> Self {
        PulseScanConfig {
            n_pulse: vec![0, 1, 2, 5, 10, 15, 20, 25, 30, 34],
            measured_csv: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub start_cm: f64,
    pub stop_cm: f64,
    pub step_cm: f64,
    /// Linewidth of every point; defaults to the laser's.
    pub linewidth_cm: Option<f64>,
    /// Per-point (centre, linewidth) rows; replaces the regular grid.
    pub points_csv: Option<PathBuf>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            start_cm: 3600.0,
            stop_cm: 4000.0,
            step_cm: 25.0,
            linewidth_cm: None,
            points_csv: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DvrConfig {
    pub potential_csv: Option<PathBuf>,
    pub dipole_csv: Option<PathBuf>,
    pub reduced_mass_u: Option<f64>,
    pub grid_points: usize,
    pub n_levels: usize,
}

impl Default for DvrConfig {
    fn default() -> Self {
        DvrConfig {
            potential_csv: None,
            dipole_csv: None,
            reduced_mass_u: None,
            grid_points: 256,
            n_levels: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub n_trials: usize,
    /// Detections per scan extreme for the `S_shots` column; 0 disables it.
    pub n_shots: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 1,
            n_trials: 10_000,
            n_shots: 0,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_cutoff() -> usize {
    200
}
fn default_phase_points() -> usize {
    16
}
fn default_steps() -> usize {
    2000
}
fn default_window() -> f64 {
    8.0
}

/// Recursively overlays `top` on `base`.
pub fn merge_tables(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge_tables(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(format!("{origin}: {e}")))
}

/// Applies one `key=value` override. A key without a dot belongs to
/// `default_section`. The value is read as a TOML value, or as a string
/// when it does not parse.
pub fn apply_override(table: &mut toml::Table, assignment: &str, default_section: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not of the form key=value")))?;
    let key = key.trim();
    let path: Vec<&str> = if key.contains('.') {
        key.split('.').collect()
    } else {
        vec![default_section, key]
    };
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key '{key}' has an empty component")));
    }
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override '{key}': '{part}' is not a section")))?;
    }
    node.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

/// Builds the merged document from the three layers.
pub fn load_layers(paper_defaults: bool, file: Option<&Path>, overrides: &[String], section: &str) -> Result<toml::Table> {
    let mut table = if paper_defaults {
        parse_table(PAPER_DEFAULTS, "built-in paper constants")?
    } else {
        toml::Table::new()
    };
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut layer = parse_table(&text, &path.display().to_string())?;
        if let Some(dir) = path.parent() {
            rebase_paths(&mut layer, dir);
        }
        merge_tables(&mut table, layer);
    }
    for o in overrides {
        apply_override(&mut table, o, section)?;
    }
    Ok(table)
}

/// Makes relative `*_csv` paths in a config file relative to that file.
fn rebase_paths(table: &mut toml::Table, dir: &Path) {
    for (k, v) in table.iter_mut() {
        match v {
            toml::Value::Table(t) => rebase_paths(t, dir),
            toml::Value::String(s) if k.ends_with("_csv") && Path::new(s).is_relative() => {
                *s = dir.join(&*s).to_string_lossy().into_owned();
            }
            _ => {}
        }
    }
}

impl RunConfig {
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let text = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(describe_toml_error(&e, &text)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn sha256(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("crystal.atom_mass_u", self.crystal.atom_mass_u),
            ("crystal.molecule_mass_u", self.crystal.molecule_mass_u),
            ("crystal.qubit_wavelength_nm", self.crystal.qubit_wavelength_nm),
            ("cat.rabi_khz", self.cat.rabi_khz),
            ("decoherence.tau_d_ms", self.decoherence.tau_d_ms),
            ("laser.nu_center_cm", self.laser.nu_center_cm),
            ("laser.f_rep_khz", self.laser.f_rep_khz),
            ("laser.window_sigmas", self.laser.window_sigmas),
            ("spectrum.step_cm", self.spectrum.step_cm),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("laser.intensity_w_cm2", self.laser.intensity_w_cm2),
            ("kick.eta_k", self.kick.eta_k),
            ("signal.t_ms", self.signal.t_ms),
            ("sync.trap_jitter_hz", self.sync.trap_jitter_hz),
            ("sync.rep_jitter_hz", self.sync.rep_jitter_hz),
            ("sync.wait_us", self.sync.wait_us),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{key} must be ≥ 0, got {v}")));
            }
        }
        if let Some(eta) = self.signal.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(Error::Config(format!("signal.eta must be ≥ 0, got {eta}")));
            }
        }
        for (key, v) in [
            ("crystal.qubit_cos_chi", self.crystal.qubit_cos_chi),
            ("crystal.probe_cos_chi", self.crystal.probe_cos_chi),
        ] {
            if !(v.abs() <= 1.0) {
                return Err(Error::Config(format!("{key} must lie in [−1, 1], got {v}")));
            }
        }
        exactly_one(
            "crystal.in_phase_khz",
            self.crystal.in_phase_khz,
            "crystal.single_ion_khz",
            self.crystal.single_ion_khz,
        )?;
        exactly_one("cat.alpha_mag", self.cat.alpha_mag, "cat.duration_us", self.cat.duration_us)?;
        if self.decoherence.s_max.is_none() && self.decoherence.s_max_table.is_none() {
            return Err(Error::Config("decoherence needs s_max or s_max_table".into()));
        }
        let widths = [
            self.laser.linewidth_cm.is_some(),
            self.laser.duration_fs.is_some(),
            self.laser.spectrum_csv.is_some(),
        ];
        if widths.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::Config(
                "laser needs exactly one of linewidth_cm, duration_fs or spectrum_csv".into(),
            ));
        }
        if self.transition.from_dvr {
            if self.dvr.potential_csv.is_none() || self.dvr.dipole_csv.is_none() || self.dvr.reduced_mass_u.is_none() {
                return Err(Error::Config(
                    "transition.from_dvr needs dvr.potential_csv, dvr.dipole_csv and dvr.reduced_mass_u".into(),
                ));
            }
        } else if self.transition.nu0_cm.is_none() || self.transition.f_eg.is_none() {
            return Err(Error::Config("transition needs nu0_cm and f_eg (or from_dvr = true)".into()));
        }
        if self.cat.phase_points < crate::catseq::MIN_SCAN_POINTS {
            return Err(Error::Config(format!(
                "cat.phase_points must be at least {}, got {}",
                crate::catseq::MIN_SCAN_POINTS,
                self.cat.phase_points
            )));
        }
        if self.run.n_trials == 0 {
            return Err(Error::Config("run.n_trials must be at least 1".into()));
        }
        if self.spectrum.stop_cm < self.spectrum.start_cm {
            return Err(Error::Config("spectrum.stop_cm is below spectrum.start_cm".into()));
        }
        Ok(())
    }
}

fn exactly_one(a: &str, va: Option<f64>, b: &str, vb: Option<f64>) -> Result<()> {
    match (va, vb) {
        (Some(v), None) | (None, Some(v)) => {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{} must be positive, got {v}", if va.is_some() { a } else { b })))
            }
        }
        (None, None) => Err(Error::Config(format!("one of {a} or {b} is required"))),
        (Some(_), Some(_)) => Err(Error::Config(format!("{a} and {b} are mutually exclusive"))),
    }
}

fn describe_toml_error(e: &toml::de::Error, text: &str) -> String {
    let msg = e.message().to_string();
    let Some(span) = e.span() else { return msg };
    let section = text[..span.start.min(text.len())]
        .lines()
        .rev()
        .find_map(|l| l.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')));
    match section {
        Some(s) => format!("[{s}]: {msg}"),
        None => msg,
    }
}

/// Physical objects derived from a configuration.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub crystal: IonCrystal,
    pub eta_a: f64,
    pub eta_m: f64,
    pub cat: CatParams,
    pub fock_cutoff: usize,
    pub decoherence: DecoherenceModel,
    pub signal: SignalModel,
    pub laser: PulseTrainSpec,
    pub trial_options: TrialOptions,
    pub transition: MolecularTransition,
    /// DVR fundamental used for the transition, when it came from curves.
    pub dvr_transition: Option<VibTransition>,
    pub sync: SyncReport,
}

impl Resolved {
    pub fn omega_z(&self) -> f64 {
        self.crystal.in_phase.omega
    }

    /// Derived quantities for manifests and `validate`.
    pub fn summary(&self) -> BTreeMap<String, serde_json::Value> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            m.insert(k.to_string(), serde_json::json!(v));
        };
        put("in_phase_khz", self.omega_z() / TAU / 1e3);
        put("out_of_phase_khz", self.crystal.out_of_phase.omega / TAU / 1e3);
        put("single_ion_khz", self.crystal.omega_single / TAU / 1e3);
        put("eta_a", self.eta_a);
        put("eta_m", self.eta_m);
        put("alpha_mag", self.cat.alpha_magnitude());
        put("cat_duration_us", self.cat.duration * 1e6);
        put("s_max", self.decoherence.s_max);
        put("sync_ratio", self.sync.ratio);
        put("arg_alpha_spread_cycles", self.sync.arg_spread_cycles);
        put("pulse_duration_fs", self.laser.fwhm_duration * 1e15);
        put("linewidth_cm", self.laser.fwhm_linewidth);
        put("peak_field_v_per_m", self.laser.peak_field());
        put("mu_eg_debye", self.transition.mu_eg() / crate::units::DEBYE);
        put("nu0_cm", self.transition.nu0);
        put("f_eg", self.transition.f_eg);
        put("integrator_steps", self.trial_options.integrator.steps as f64);
        m.insert("fock_cutoff".into(), serde_json::json!(self.fock_cutoff));
        m.insert("synchronized".into(), serde_json::json!(self.sync.synchronized));
        m
    }
}

pub fn resolve(cfg: &RunConfig) -> Result<Resolved> {
    let c = &cfg.crystal;
    let m_atom = amu_to_kg(c.atom_mass_u);
    let m_mol = amu_to_kg(c.molecule_mass_u);
    let crystal = match (c.in_phase_khz, c.single_ion_khz) {
        (Some(f), _) => IonCrystal::from_in_phase_frequency(m_atom, m_mol, TAU * f * 1e3)?,
        (None, Some(f)) => IonCrystal::new(m_atom, m_mol, TAU * f * 1e3)?,
        _ => unreachable!("validated"),
    };

    let (transition, dvr_transition) = if cfg.transition.from_dvr {
        let t = transition_from_dvr(&cfg.dvr)?;
        (MolecularTransition::new(t.wavenumber, t.oscillator_strength)?, Some(t))
    } else {
        let nu0 = cfg.transition.nu0_cm.expect("validated");
        let f = cfg.transition.f_eg.expect("validated");
        (
            MolecularTransition::new(nu0, f).map_err(|e| Error::Config(format!("transition: {e}")))?,
            None,
        )
    };

    let qubit = LaserGeometry::new(TAU / (c.qubit_wavelength_nm * 1e-9), c.qubit_cos_chi)?;
    let eta_a = cfg.cat.eta_a.unwrap_or_else(|| lamb_dicke(&crystal, &qubit, Ion::Atom).abs());
    let recoil_nu = c.recoil_nu_cm.unwrap_or(transition.nu0);
    let probe = LaserGeometry::new(wavenumber_to_k(recoil_nu), c.probe_cos_chi)?;
    let eta_m = lamb_dicke(&crystal, &probe, Ion::Molecule).abs();

    let rabi = TAU * cfg.cat.rabi_khz * 1e3;
    let cat = match (cfg.cat.alpha_mag, cfg.cat.duration_us) {
        (Some(a), _) => CatParams::with_alpha_magnitude(eta_a, rabi, a, cfg.cat.phi_minus_rad)?,
        (None, Some(t)) => CatParams::new(eta_a, rabi, t * 1e-6, cfg.cat.phi_minus_rad)?,
        _ => unreachable!("validated"),
    };
    let fock_cutoff = if cfg.cat.fock_cutoff == 0 {
        auto_cutoff(cat.alpha_magnitude() + 1.0)
    } else {
        cfg.cat.fock_cutoff
    };

    let s_max = match &cfg.decoherence.s_max_table {
        Some(rows) => SmaxTable::new(rows.iter().map(|r| (r[0], r[1])).collect())
            .map_err(|e| Error::Config(format!("decoherence.s_max_table: {e}")))?
            .at(cat.alpha_magnitude()),
        None => cfg.decoherence.s_max.expect("validated"),
    };
    let decoherence = DecoherenceModel::new(s_max, cfg.decoherence.tau_d_ms * 1e-3)
        .map_err(|e| Error::Config(format!("decoherence: {e}")))?;
    let signal = SignalModel::new(eta_m, cat.alpha_magnitude(), decoherence)?;

    let l = &cfg.laser;
    let f_rep = l.f_rep_khz * 1e3;
    let laser = match (l.linewidth_cm, l.duration_fs, &l.spectrum_csv) {
        (Some(w), _, _) => PulseTrainSpec::from_linewidth(l.nu_center_cm, w, l.intensity_w_cm2, f_rep, l.n_pulse)?,
        (_, Some(d), _) => PulseTrainSpec::from_duration(l.nu_center_cm, d * 1e-15, l.intensity_w_cm2, f_rep, l.n_pulse)?,
        (_, _, Some(path)) => {
            let s = load_light_spectrum(path)?;
            PulseTrainSpec::from_linewidth(s.center, s.fwhm, l.intensity_w_cm2, f_rep, l.n_pulse)?
        }
        _ => unreachable!("validated"),
    };
    let orientation = match l.orientation {
        OrientationMode::PerTrial => Orientation::PerTrial,
        OrientationMode::PerPulse => Orientation::PerPulse,
        OrientationMode::Aligned => Orientation::Fixed(1.0),
    };
    let trial_options = TrialOptions {
        orientation,
        integrator: Integrator {
            steps: l.rk4_steps,
            window_sigmas: l.window_sigmas,
            ..Integrator::default()
        },
    };

    let jitter = TimingJitter {
        trap_hz: cfg.sync.trap_jitter_hz,
        rep_rate_hz: cfg.sync.rep_jitter_hz,
    };
    let sync = sync_check(crystal.in_phase.omega, f_rep, jitter, cfg.sync.wait_us * 1e-6)?;

    Ok(Resolved {
        crystal,
        eta_a,
        eta_m,
        cat,
        fock_cutoff,
        decoherence,
        signal,
        laser,
        trial_options,
        transition,
        dvr_transition,
        sync,
    })
}

/// Loads a curve file into a uniform grid of `grid_points`.
pub fn load_curve(path: &Path, reduced_mass_u: f64, grid_points: usize) -> Result<Curve1D> {
    let f = read_curve_csv(path)?;
    Curve1D::resampled_from(&f.x, f.x_unit, &f.values, f.value_unit, amu_to_kg(reduced_mass_u), grid_points)
}

/// Fundamental 0→1 transition from the configured DVR curves.
pub fn transition_from_dvr(dvr: &DvrConfig) -> Result<VibTransition> {
    let (pot, dip, mass) = match (&dvr.potential_csv, &dvr.dipole_csv, dvr.reduced_mass_u) {
        (Some(p), Some(d), Some(m)) => (p, d, m),
        _ => return Err(Error::Config("dvr needs potential_csv, dipole_csv and reduced_mass_u".into())),
    };
    let potential = load_curve(pot, mass, dvr.grid_points)?;
    if potential.kind != CurveKind::Energy {
        return Err(Error::Config(format!("{}: not an energy curve", pot.display())));
    }
    let f = read_curve_csv(dip)?;
    let dipole = Curve1D::new(&f.x, f.x_unit, &f.values, f.value_unit, 0.0)
        .or_else(|_| Curve1D::resampled_from(&f.x, f.x_unit, &f.values, f.value_unit, 0.0, dvr.grid_points))?;
    let levels = dvr_solve(&potential, dvr.n_levels.max(2))?;
    transition_strength(&levels, &dipole, 0, 1, true)
}
