//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::catseq::{
    analytic_signal_at, direct_signal, phase_scan, uniform_phase_grid, CatSequence, Recoil, RecoilEvent,
    DEFAULT_FIT_TOLERANCE,
};
use crate::config::{load_curve, load_layers, resolve, RunConfig, Resolved};
use crate::crystal::{lamb_dicke_in_mode, Ion, LaserGeometry};
use crate::error::{Error, Result};
use crate::experiment::{
    add_shot_noise, effective_absorption, invert_measured, kick_calibration_scan, load_measured,
    pulse_number_scan, spectrum_scan, ScanRecord, ScanResult,
};
use crate::hilbert::FockSpace;
use crate::units::{wavenumber_to_k, DEBYE};
use crate::vibsolver::{
    anharmonic_shift_report, dvr_solve, read_curve_csv, refinement_check, transition_table, write_levels_csv,
    Curve1D,
};

pub const OUT_ENV: &str = "CATSPEC_OUT";

#[derive(Debug, Parser)]
#[command(name = "catspec", version, about = "Cat-state recoil spectroscopy of a two-ion crystal")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Start from the published constants (implied when no --config is given).
    #[arg(long, global = true)]
    pub paper_defaults: bool,
    /// Override one key, e.g. `--set laser.n_pulse=10` or `--set eta=0`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output directory [default: $CATSPEC_OUT or ./out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Axial normal modes and Lamb-Dicke factors.
    Modes(Common),
    /// Signal for one recoil displacement.
    Signal(Common),
    /// Signal versus number of calibration kicks.
    Kickscan(Common),
    /// Excitation after each pulse of one train.
    Excite(Common),
    /// Signal versus number of pulses.
    Pulsescan(Common),
    /// Absorption spectrum over laser centre wavenumbers.
    Spectrum(Common),
    /// Vibrational levels and transitions from curve files.
    Dvr(Common),
    /// Check the configuration and print derived values.
    Validate(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Modes(_) => "modes",
            Command::Signal(_) => "signal",
            Command::Kickscan(_) => "kickscan",
            Command::Excite(_) => "excite",
            Command::Pulsescan(_) => "pulsescan",
            Command::Spectrum(_) => "spectrum",
            Command::Dvr(_) => "dvr",
            Command::Validate(_) => "validate",
        }
    }

    /// Section that receives `--set` keys without a dot.
    fn section(&self) -> &'static str {
        match self {
            Command::Modes(_) => "crystal",
            Command::Signal(_) => "signal",
            Command::Kickscan(_) => "kick",
            Command::Excite(_) => "laser",
            Command::Pulsescan(_) => "pulsescan",
            Command::Spectrum(_) => "spectrum",
            Command::Dvr(_) => "dvr",
            Command::Validate(_) => "run",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Modes(c)
            | Command::Signal(c)
            | Command::Kickscan(c)
            | Command::Excite(c)
            | Command::Pulsescan(c)
            | Command::Spectrum(c)
            | Command::Dvr(c)
            | Command::Validate(c) => c,
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 2,
                _ => 1,
            }
        }
    }
}

struct Context {
    command: &'static str,
    config: RunConfig,
    resolved: Resolved,
    hash: String,
    out: PathBuf,
}

impl Context {
    fn comments(&self) -> Vec<String> {
        vec![
            format!("catspec {} {}", env!("CARGO_PKG_VERSION"), self.command),
            format!("config_sha256={}", self.hash),
        ]
    }

    fn create(&self, file: &str) -> Result<BufWriter<fs::File>> {
        fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(fs::File::create(self.out.join(file))?))
    }

    fn write_scan(&self, scan: &ScanResult, file: &str) -> Result<PathBuf> {
        let mut w = self.create(file)?;
        scan.write_csv(&mut w, &self.comments())?;
        w.flush()?;
        for warning in &scan.warnings {
            eprintln!("warning: {warning}");
        }
        Ok(self.out.join(file))
    }

    fn write_manifest(&self, outputs: &[PathBuf], extra: BTreeMap<String, serde_json::Value>) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            program: &'static str,
            version: &'static str,
            command: &'a str,
            config_sha256: &'a str,
            config: &'a RunConfig,
            derived: BTreeMap<String, serde_json::Value>,
            master_seed: u64,
            outputs: Vec<String>,
            results: BTreeMap<String, serde_json::Value>,
        }
        let m = Manifest {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config_sha256: &self.hash,
            config: &self.config,
            derived: self.resolved.summary(),
            master_seed: self.config.run.seed,
            outputs: outputs
                .iter()
                .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
                .collect(),
            results: extra,
        };
        let mut w = self.create(&format!("{}_manifest.json", self.command))?;
        serde_json::to_writer_pretty(&mut w, &m)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

pub fn run(command: &Command) -> Result<()> {
    let common = command.common();
    let table = load_layers(
        common.paper_defaults || common.config.is_none(),
        common.config.as_deref(),
        &common.overrides,
        command.section(),
    )?;
    let config = RunConfig::from_table(table)?;
    let resolved = resolve(&config)?;
    let out = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context {
        command: command.name(),
        hash: config.sha256(),
        config,
        resolved,
        out,
    };
    match command {
        Command::Modes(_) => modes(&ctx),
        Command::Signal(_) => signal(&ctx),
        Command::Kickscan(_) => kickscan(&ctx),
        Command::Excite(_) => excite(&ctx),
        Command::Pulsescan(_) => pulsescan(&ctx),
        Command::Spectrum(_) => spectrum(&ctx),
        Command::Dvr(_) => dvr(&ctx),
        Command::Validate(_) => validate(&ctx),
    }
}

fn finish_scan(ctx: &Context, mut scan: ScanResult) -> Result<()> {
    if ctx.config.run.n_shots > 0 {
        add_shot_noise(&mut scan, ctx.config.run.n_shots, ctx.config.run.seed)?;
    }
    let path = ctx.write_scan(&scan, &format!("{}.csv", ctx.command))?;
    let mut results = scan.metadata.clone();
    if !scan.warnings.is_empty() {
        results.insert("warnings".into(), serde_json::json!(scan.warnings));
    }
    ctx.write_manifest(&[path], results)
}

fn modes(ctx: &Context) -> Result<()> {
    let r = &ctx.resolved;
    let c = &ctx.config.crystal;
    let qubit = LaserGeometry::new(std::f64::consts::TAU / (c.qubit_wavelength_nm * 1e-9), c.qubit_cos_chi)?;
    let probe = LaserGeometry::new(wavenumber_to_k(c.recoil_nu_cm.unwrap_or(r.transition.nu0)), c.probe_cos_chi)?;
    let mut w = ctx.create("modes.csv")?;
    for line in ctx.comments() {
        writeln!(w, "# {line}")?;
    }
    let mut csv = csv::Writer::from_writer(&mut w);
    csv.write_record(["mode", "freq_khz", "e_atom", "e_molecule", "eta_atom_qubit", "eta_molecule_probe"])?;
    for (name, mode) in [("in_phase", &r.crystal.in_phase), ("out_of_phase", &r.crystal.out_of_phase)] {
        csv.write_record([
            name.to_string(),
            (mode.omega / std::f64::consts::TAU / 1e3).to_string(),
            mode.participation_of(Ion::Atom).to_string(),
            mode.participation_of(Ion::Molecule).to_string(),
            lamb_dicke_in_mode(&r.crystal, mode, &qubit, Ion::Atom).to_string(),
            lamb_dicke_in_mode(&r.crystal, mode, &probe, Ion::Molecule).to_string(),
        ])?;
    }
    csv.flush()?;
    drop(csv);
    w.flush()?;
    ctx.write_manifest(&[ctx.out.join("modes.csv")], BTreeMap::new())
}

fn signal(ctx: &Context) -> Result<()> {
    let r = &ctx.resolved;
    let cfg = &ctx.config.signal;
    let eta = cfg.eta.unwrap_or(r.eta_m);
    let t = cfg.t_ms * 1e-3;
    let alpha = r.cat.alpha_magnitude();
    let s = analytic_signal_at(eta, alpha, Some(&r.decoherence), t)?;
    let reference = r.signal.reference(t);
    let mut columns = vec!["t_ms", "S_direct"];
    let mut extra = vec![cfg.t_ms, r.decoherence.contrast_at(t) * direct_signal(eta)];
    if cfg.dense {
        let seq = CatSequence {
            cat: r.cat,
            recoil: Recoil::Event(RecoilEvent::kick(eta)?),
        };
        let space = FockSpace::new(r.fock_cutoff);
        let scan = phase_scan(&space, &seq, &uniform_phase_grid(ctx.config.cat.phase_points), DEFAULT_FIT_TOLERANCE)?;
        columns.push("S_dense");
        extra.push(r.decoherence.contrast_at(t) * scan.signal);
    }
    let mut scan = ScanResult::new("signal", &columns);
    scan.records.push(ScanRecord {
        x: eta,
        s,
        p_abs_eff: effective_absorption(s, reference),
        stderr: 0.0,
        eta_m: r.eta_m,
        alpha_mag: alpha,
        s_max_t: r.decoherence.contrast_at(t),
        extra,
    });
    finish_scan(ctx, scan)
}

fn kickscan(ctx: &Context) -> Result<()> {
    let r = &ctx.resolved;
    let space = FockSpace::new(r.fock_cutoff);
    let scan = kick_calibration_scan(
        &space,
        ctx.config.kick.eta_k,
        &ctx.config.kick.n_kick,
        &r.cat,
        &r.decoherence,
        r.omega_z(),
        ctx.config.cat.phase_points,
    )?;
    finish_scan(ctx, scan)
}

fn excite(ctx: &Context) -> Result<()> {
    let r = &ctx.resolved;
    let pulses: Vec<usize> = (0..=r.laser.n_pulse).collect();
    let mut scan = pulse_number_scan(
        &r.laser,
        &r.transition,
        &r.signal,
        &pulses,
        ctx.config.run.n_trials,
        ctx.config.run.seed,
        r.trial_options,
        Some(&r.sync),
    )?;
    scan.name = "excite".into();
    finish_scan(ctx, scan)
}

fn pulsescan(ctx: &Context) -> Result<()> {
    let r = &ctx.resolved;
    let mut scan = pulse_number_scan(
        &r.laser,
        &r.transition,
        &r.signal,
        &ctx.config.pulsescan.n_pulse,
        ctx.config.run.n_trials,
        ctx.config.run.seed,
        r.trial_options,
        Some(&r.sync),
    )?;
    if ctx.config.run.n_shots > 0 {
        add_shot_noise(&mut scan, ctx.config.run.n_shots, ctx.config.run.seed)?;
    }
    let mut outputs = vec![ctx.write_scan(&scan, "pulsescan.csv")?];
    if let Some(path) = &ctx.config.pulsescan.measured_csv {
        let measured = invert_measured(&load_measured(path)?, &r.signal, r.laser.f_rep);
        outputs.push(ctx.write_scan(&measured, "pulsescan_measured.csv")?);
    }
    let mut results = scan.metadata.clone();
    if !scan.warnings.is_empty() {
        results.insert("warnings".into(), serde_json::json!(scan.warnings));
    }
    ctx.write_manifest(&outputs, results)
}

fn spectrum_grid(ctx: &Context) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = &ctx.config.spectrum;
    if let Some(path) = &s.points_csv {
        return crate::molecule::read_two_columns(path);
    }
    let width = s.linewidth_cm.unwrap_or(ctx.resolved.laser.fwhm_linewidth);
    let n = ((s.stop_cm - s.start_cm) / s.step_cm + 1e-9).floor() as usize + 1;
    let centers: Vec<f64> = (0..n).map(|i| s.start_cm + i as f64 * s.step_cm).collect();
    Ok((centers.clone(), vec![width; centers.len()]))
}

fn spectrum(ctx: &Context) -> Result<()> {
    let r = &ctx.resolved;
    let (centers, widths) = spectrum_grid(ctx)?;
    let scan = spectrum_scan(
        &r.laser,
        &centers,
        &widths,
        &r.transition,
        &r.signal,
        ctx.config.run.n_trials,
        ctx.config.run.seed,
        r.trial_options,
    )?;
    finish_scan(ctx, scan)
}

fn dvr(ctx: &Context) -> Result<()> {
    let d = &ctx.config.dvr;
    let (pot, dip, mass) = match (&d.potential_csv, &d.dipole_csv, d.reduced_mass_u) {
        (Some(p), Some(q), Some(m)) => (p, q, m),
        _ => return Err(Error::Config("dvr needs dvr.potential_csv, dvr.dipole_csv and dvr.reduced_mass_u".into())),
    };
    let potential = load_curve(pot, mass, d.grid_points)?;
    let f = read_curve_csv(dip)?;
    let dipole = Curve1D::resampled_from(&f.x, f.x_unit, &f.values, f.value_unit, 0.0, d.grid_points)?;
    let levels = dvr_solve(&potential, d.n_levels.max(2))?;
    let transitions = transition_table(&levels, &dipole, true)?;
    let report = anharmonic_shift_report(&levels)?;
    let convergence = refinement_check(&potential, d.grid_points)?;

    let path = ctx.out.join("dvr.csv");
    let mut w = ctx.create("dvr.csv")?;
    for line in ctx.comments() {
        writeln!(w, "# {line}")?;
    }
    write_levels_csv(&mut w, &levels, &transitions)?;
    w.flush()?;
    let mut results = BTreeMap::new();
    results.insert("anharmonic".into(), serde_json::to_value(report)?);
    results.insert("refinement".into(), serde_json::to_value(convergence)?);
    results.insert("transitions".into(), serde_json::to_value(&transitions)?);
    ctx.write_manifest(&[path], results)
}

fn validate(ctx: &Context) -> Result<()> {
    let r = &ctx.resolved;
    let mut out = std::io::stdout().lock();
    writeln!(out, "config_sha256 = {}", ctx.hash)?;
    writeln!(out, "omega_z/2pi = {:.3} kHz", r.omega_z() / std::f64::consts::TAU / 1e3)?;
    writeln!(
        out,
        "omega_z/(2pi f_rep) = {:.6} ({})",
        r.sync.ratio,
        if r.sync.synchronized { "synchronized" } else { "NOT synchronized" }
    )?;
    writeln!(out, "arg(alpha) spread over wait = {:.4} cycles", r.sync.arg_spread_cycles)?;
    writeln!(out, "|alpha| = {:.4}", r.cat.alpha_magnitude())?;
    writeln!(out, "cat duration = {:.3} us", r.cat.duration * 1e6)?;
    writeln!(out, "eta_a = {:.6}", r.eta_a)?;
    writeln!(out, "eta_m = {:.6}", r.eta_m)?;
    writeln!(out, "S(eta_m) = {:.6}", r.signal.reference(0.0))?;
    writeln!(out, "fock_cutoff = {}", r.fock_cutoff)?;
    writeln!(out, "nu0 = {:.2} cm^-1, f_eg = {:.3e}, mu_eg = {:.4} D", r.transition.nu0, r.transition.f_eg, r.transition.mu_eg() / DEBYE)?;
    writeln!(
        out,
        "laser: {:.2} cm^-1, FWHM {:.2} cm^-1 / {:.2} fs, {} pulses at {} kHz",
        r.laser.nu_center,
        r.laser.fwhm_linewidth,
        r.laser.fwhm_duration * 1e15,
        r.laser.n_pulse,
        r.laser.f_rep / 1e3
    )?;
    writeln!(
        out,
        "peak Rabi (aligned) = {:.4e} rad/s, detuning = {:.4e} rad/s",
        r.laser.peak_rabi(&r.transition),
        r.laser.detuning(&r.transition)
    )?;
    if let Some(t) = &r.dvr_transition {
        writeln!(out, "dvr fundamental = {:.3} cm^-1, f = {:.4e}", t.wavenumber, t.oscillator_strength)?;
    }
    if !r.sync.synchronized {
        eprintln!("warning: trap frequency is not an integer multiple of the repetition rate");
    }
    Ok(())
}
