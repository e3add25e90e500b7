//! Two-level model of the molecular vibration driven by a train of
//! Gaussian femtosecond pulses with random carrier phase and random
//! molecular orientation.
//!
//! A single pulse is integrated in the rotating frame with
//! `H/ħ = Δ|g⟩⟨g| + Ω(t)/2 (|e⟩⟨g| e^{iφ} + h.c.)`,
//! `Ω(t) = 2 μ_eg E₀ cos θ / ħ · exp(−t²/4τ_σ²)`.
//! The carrier phase only conjugates the propagator,
//! `U_φ = P U₀ P†` with `P = diag(1, e^{iφ})`, so a trial with fixed
//! orientation integrates the Schrödinger equation once and reuses the
//! result for every pulse.

use std::f64::consts::{LN_2, PI, TAU};
use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::{
    w_per_cm2_to_si, wavenumber_to_angular, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR, SPEED_OF_LIGHT,
    VACUUM_PERMITTIVITY,
};

/// Largest allowed drift of ‖ψ‖² across a pulse or a train.
pub const NORM_DRIFT_TOLERANCE: f64 = 1e-6;

/// Vibrational transition between the ground and first excited level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MolecularTransition {
    /// Transition wavenumber ν₀ (cm⁻¹).
    pub nu0: f64,
    /// Oscillator strength f_eg.
    pub f_eg: f64,
}

impl MolecularTransition {
    pub fn new(nu0: f64, f_eg: f64) -> Result<Self> {
        if !(nu0 > 0.0 && nu0.is_finite()) {
            return Err(Error::Domain(format!("ν₀ must be positive, got {nu0}")));
        }
        if !(f_eg > 0.0 && f_eg.is_finite()) {
            return Err(Error::Domain(format!("oscillator strength must be positive, got {f_eg}")));
        }
        Ok(MolecularTransition { nu0, f_eg })
    }

    /// Builds the transition from its dipole moment μ_eg (C·m).
    pub fn from_dipole(nu0: f64, mu_eg: f64) -> Result<Self> {
        Self::new(nu0, oscillator_strength(nu0, mu_eg))
    }

    pub fn omega0(&self) -> f64 {
        wavenumber_to_angular(self.nu0)
    }

    /// μ_eg = √(f_eg · 3ħe² / (m_e ω₀)) in C·m.
    pub fn mu_eg(&self) -> f64 {
        (self.f_eg * 3.0 * HBAR * ELEMENTARY_CHARGE.powi(2) / (ELECTRON_MASS * self.omega0())).sqrt()
    }
}

/// f = m_e ω μ² / (3ħe²), the exact inverse of [`MolecularTransition::mu_eg`].
///
/// This follows the dipole convention of the excitation model; the more
/// common definition 2 m_e ω μ² / (3ħe²) is twice this value.
pub fn oscillator_strength(nu_cm: f64, mu: f64) -> f64 {
    ELECTRON_MASS * wavenumber_to_angular(nu_cm) * mu * mu / (3.0 * HBAR * ELEMENTARY_CHARGE.powi(2))
}

/// FWHM duration (s) of a transform-limited Gaussian pulse with the given
/// FWHM linewidth in cm⁻¹: τ = 2 ln 2 / (π c Δν̃).
pub fn transform_limited_duration(linewidth_cm: f64) -> f64 {
    2.0 * LN_2 / (PI * SPEED_OF_LIGHT * 100.0 * linewidth_cm)
}

/// Inverse of [`transform_limited_duration`].
pub fn transform_limited_linewidth(duration: f64) -> f64 {
    2.0 * LN_2 / (PI * SPEED_OF_LIGHT * 100.0 * duration)
}

/// Laser pulse train driving the molecule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PulseTrainSpec {
    /// Centre wavenumber (cm⁻¹).
    pub nu_center: f64,
    /// FWHM spectral width (cm⁻¹).
    pub fwhm_linewidth: f64,
    /// FWHM intensity duration τ (s).
    pub fwhm_duration: f64,
    /// Average intensity (W/cm²).
    pub intensity: f64,
    /// Repetition rate (Hz).
    pub f_rep: f64,
    pub n_pulse: usize,
    pub transform_limited: bool,
}

impl PulseTrainSpec {
    /// Transform-limited train specified by its spectral width.
    pub fn from_linewidth(nu_center: f64, linewidth: f64, intensity: f64, f_rep: f64, n_pulse: usize) -> Result<Self> {
        check_positive("linewidth", linewidth)?;
        Self::build(nu_center, linewidth, transform_limited_duration(linewidth), intensity, f_rep, n_pulse, true)
    }

    /// Transform-limited train specified by its pulse duration.
    pub fn from_duration(nu_center: f64, duration: f64, intensity: f64, f_rep: f64, n_pulse: usize) -> Result<Self> {
        check_positive("duration", duration)?;
        Self::build(nu_center, transform_limited_linewidth(duration), duration, intensity, f_rep, n_pulse, true)
    }

    /// Train whose duration and linewidth are given independently.
    pub fn chirped(
        nu_center: f64,
        linewidth: f64,
        duration: f64,
        intensity: f64,
        f_rep: f64,
        n_pulse: usize,
    ) -> Result<Self> {
        check_positive("linewidth", linewidth)?;
        check_positive("duration", duration)?;
        Self::build(nu_center, linewidth, duration, intensity, f_rep, n_pulse, false)
    }

    fn build(
        nu_center: f64,
        fwhm_linewidth: f64,
        fwhm_duration: f64,
        intensity: f64,
        f_rep: f64,
        n_pulse: usize,
        transform_limited: bool,
    ) -> Result<Self> {
        check_positive("centre wavenumber", nu_center)?;
        check_positive("repetition rate", f_rep)?;
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(Error::Domain(format!("intensity must be ≥ 0, got {intensity}")));
        }
        Ok(PulseTrainSpec {
            nu_center,
            fwhm_linewidth,
            fwhm_duration,
            intensity,
            f_rep,
            n_pulse,
            transform_limited,
        })
    }

    pub fn with_n_pulse(self, n_pulse: usize) -> Self {
        PulseTrainSpec { n_pulse, ..self }
    }

    /// Same train retuned to another centre, keeping the pulse shape.
    pub fn with_center(self, nu_center: f64) -> Self {
        PulseTrainSpec { nu_center, ..self }
    }

    /// τ_σ = τ / (2√(2 ln 2)).
    pub fn tau_sigma(&self) -> f64 {
        self.fwhm_duration / (2.0 * (2.0 * LN_2).sqrt())
    }

    /// Peak field E₀ = √(I / (f_rep τ √(π/ln 2) ε₀ c)) in V/m.
    pub fn peak_field(&self) -> f64 {
        let fluence_norm = self.f_rep * self.fwhm_duration * (PI / LN_2).sqrt();
        (w_per_cm2_to_si(self.intensity) / (fluence_norm * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT)).sqrt()
    }

    /// Laser minus transition angular frequency (rad/s).
    pub fn detuning(&self, transition: &MolecularTransition) -> f64 {
        wavenumber_to_angular(self.nu_center - transition.nu0)
    }

    /// Peak Rabi frequency for a molecule aligned with the field (rad/s).
    pub fn peak_rabi(&self, transition: &MolecularTransition) -> f64 {
        2.0 * transition.mu_eg() * self.peak_field() / HBAR
    }

    /// Train length n_pulse / f_rep (s).
    pub fn train_duration(&self) -> f64 {
        self.n_pulse as f64 / self.f_rep
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// Pulse area Θ = ∫Ω dt = Ω_peak · 2τ_σ√π.
pub fn pulse_area(rabi_peak: f64, tau_sigma: f64) -> f64 {
    rabi_peak * 2.0 * tau_sigma * PI.sqrt()
}

/// Amplitudes of the two-level state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TlsState {
    pub c_g: C64,
    pub c_e: C64,
}

impl TlsState {
    pub fn ground() -> Self {
        TlsState {
            c_g: C64::new(1.0, 0.0),
            c_e: C64::new(0.0, 0.0),
        }
    }

    pub fn new(c_g: C64, c_e: C64) -> Result<Self> {
        let s = TlsState { c_g, c_e };
        if (s.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization { norm: s.norm_sqr() });
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_g.norm_sqr() + self.c_e.norm_sqr()
    }

    pub fn excited_population(&self) -> f64 {
        self.c_e.norm_sqr()
    }

    fn apply(&self, u: &Matrix2<C64>) -> TlsState {
        let v = u * Vector2::new(self.c_g, self.c_e);
        TlsState { c_g: v[0], c_e: v[1] }
    }
}

/// Fixed-step RK4 settings for a single pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Integrator {
    pub steps: usize,
    /// Half-width of the integration window in units of τ_σ.
    pub window_sigmas: f64,
    /// Allowed change of P_e when the step is halved.
    pub tolerance: f64,
    /// Upper bound for automatic step refinement.
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            steps: 2000,
            window_sigmas: 8.0,
            tolerance: 1e-8,
            max_steps: 64_000,
        }
    }
}

/// One Gaussian pulse in dimensionless form: times in units of τ_σ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SinglePulse {
    /// Ω_peak · τ_σ including the orientation factor.
    pub rabi_peak: f64,
    /// Δ · τ_σ.
    pub detuning: f64,
    pub phase: f64,
}

impl SinglePulse {
    /// Pulse from physical parameters, with `θ` the angle between the
    /// molecular axis and the polarization.
    pub fn new(e0: f64, tau_sigma: f64, detuning: f64, phase: f64, theta: f64, transition: &MolecularTransition) -> Self {
        let rabi = 2.0 * transition.mu_eg() * e0 * theta.cos() / HBAR;
        SinglePulse {
            rabi_peak: rabi * tau_sigma,
            detuning: detuning * tau_sigma,
            phase,
        }
    }

    /// Pulse with a prescribed area Θ; `detuning` is Δ·τ_σ.
    pub fn from_area(area: f64, detuning: f64, phase: f64) -> Self {
        SinglePulse {
            rabi_peak: area / (2.0 * PI.sqrt()),
            detuning,
            phase,
        }
    }

    pub fn area(&self) -> f64 {
        pulse_area(self.rabi_peak, 1.0)
    }
}

/// Envelope and detuning phase of one pulse sampled at the RK4 nodes, so
/// that propagators for many coupling strengths share the work.
///
/// RK4 runs in the frame rotating with the detuning, where the generator is
/// purely off-diagonal, `−i c(s) [[0, e^{iΔs}], [e^{−iΔs}, 0]]` with
/// `c(s) = Ω(s)/2`; the frame is undone at the end. With no drive the
/// result is exact.
#[derive(Clone, Debug)]
pub struct PulseShape {
    /// `e^{−s²/4} e^{iΔs} / 2` at half-step spacing.
    nodes: Vec<C64>,
    step: f64,
    /// Phase `−Δ·s_max` of the frame at either window edge.
    edge: C64,
}

impl PulseShape {
    pub fn new(detuning: f64, integrator: &Integrator) -> Self {
        let n = integrator.steps.max(1);
        let half = integrator.window_sigmas;
        let step = 2.0 * half / n as f64;
        let nodes = (0..=2 * n)
            .map(|k| {
                let s = -half + 0.5 * step * k as f64;
                C64::from_polar(0.5 * (-s * s / 4.0).exp(), detuning * s)
            })
            .collect();
        PulseShape {
            nodes,
            step,
            edge: C64::from_polar(1.0, -detuning * half),
        }
    }

    /// Propagator for peak coupling `rabi_peak` (Ω_peak τ_σ).
    pub fn propagator(&self, rabi_peak: f64) -> Matrix2<C64> {
        let h = self.step;
        let zero = C64::new(0.0, 0.0);
        let generator = |k: usize| -> Matrix2<C64> {
            let rot = self.nodes[k] * rabi_peak;
            // −i·c·e^{iΔs} and −i·c·e^{−iΔs}
            Matrix2::new(zero, C64::new(rot.im, -rot.re), C64::new(-rot.im, -rot.re), zero)
        };
        let mut u = Matrix2::<C64>::identity();
        let mut g_left = generator(0);
        for k in 0..(self.nodes.len() - 1) / 2 {
            let g_mid = generator(2 * k + 1);
            let g_right = generator(2 * k + 2);
            let k1 = g_left * u;
            let k2 = g_mid * (u + k1 * C64::new(0.5 * h, 0.0));
            let k3 = g_mid * (u + k2 * C64::new(0.5 * h, 0.0));
            let k4 = g_right * (u + k3 * C64::new(h, 0.0));
            u += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
            g_left = g_right;
        }
        // c_g = e^{−iΔs} a_g: U = F(s_max) Ũ F(−s_max)⁻¹
        let f = self.edge;
        Matrix2::new(u[(0, 0)] * f * f, u[(0, 1)] * f, u[(1, 0)] * f, u[(1, 1)])
    }
}

/// Time-ordered propagator of one zero-phase pulse.
pub fn pulse_propagator(rabi_peak: f64, detuning: f64, integrator: &Integrator) -> Matrix2<C64> {
    PulseShape::new(detuning, integrator).propagator(rabi_peak)
}

/// Conjugates a zero-phase propagator to carrier phase φ.
pub fn with_carrier_phase(u0: &Matrix2<C64>, phase: f64) -> Matrix2<C64> {
    let p = C64::from_polar(1.0, phase);
    Matrix2::new(u0[(0, 0)], u0[(0, 1)] * p.conj(), u0[(1, 0)] * p, u0[(1, 1)])
}

fn transfer(u: &Matrix2<C64>) -> f64 {
    u[(1, 0)].norm_sqr()
}

#[cfg(test)]
fn unitarity_defect(u: &Matrix2<C64>) -> f64 {
    (u.adjoint() * u - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest step count (starting from `integrator.steps`, doubling) for
/// which halving the step changes the ground-state transfer by less than
/// the tolerance.
pub fn verified_steps(rabi_peak: f64, detuning: f64, integrator: &Integrator) -> Result<usize> {
    let mut steps = integrator.steps.max(1);
    let mut coarse = transfer(&pulse_propagator(rabi_peak, detuning, &Integrator { steps, ..*integrator }));
    loop {
        let fine = transfer(&pulse_propagator(rabi_peak, detuning, &Integrator { steps: 2 * steps, ..*integrator }));
        let change = (fine - coarse).abs();
        if change < integrator.tolerance {
            return Ok(steps);
        }
        if 2 * steps > integrator.max_steps {
            return Err(Error::Integration {
                change,
                tolerance: integrator.tolerance,
            });
        }
        steps *= 2;
        coarse = fine;
    }
}

/// Propagates a state through one pulse, refining the step until the
/// step-doubling check passes.
pub fn propagate_pulse(state: &TlsState, pulse: &SinglePulse, integrator: &Integrator) -> Result<TlsState> {
    let steps = verified_steps(pulse.rabi_peak, pulse.detuning, integrator)?;
    let u0 = pulse_propagator(pulse.rabi_peak, pulse.detuning, &Integrator { steps, ..*integrator });
    let out = state.apply(&with_carrier_phase(&u0, pulse.phase));
    let drift = (out.norm_sqr() - state.norm_sqr()).abs();
    if drift > NORM_DRIFT_TOLERANCE {
        return Err(Error::Normalization { norm: out.norm_sqr() });
    }
    Ok(out)
}

/// How the molecular orientation is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Orientation {
    /// cos θ uniform on [−1, 1], drawn once per trial.
    PerTrial,
    /// cos θ redrawn before every pulse.
    PerPulse,
    /// Fixed cos θ.
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialOptions {
    pub orientation: Orientation,
    pub integrator: Integrator,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            orientation: Orientation::PerTrial,
            integrator: Integrator::default(),
        }
    }
}

/// Excitation history of one molecule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    /// P_e after each pulse; entry 0 is before the first pulse.
    pub p_e: Vec<f64>,
    /// First pulse (1-based) after which P_e ≥ 1/2.
    pub first_excitation: Option<usize>,
}

impl TrialRecord {
    pub fn final_population(&self) -> f64 {
        *self.p_e.last().unwrap_or(&0.0)
    }
}

/// Random stream of trial `index`: the ChaCha8 stream `index` under the
/// master seed. Each trial draws cos θ first and then one phase per pulse.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Everything about a train that is shared by all trials.
#[derive(Clone, Debug)]
pub struct TrainModel {
    /// Ω_peak τ_σ for cos θ = 1.
    pub rabi_peak: f64,
    /// Δ τ_σ.
    pub detuning: f64,
    pub n_pulse: usize,
    pub options: TrialOptions,
    shape: PulseShape,
}

impl TrainModel {
    /// Precomputes the dimensionless drive and fixes the step count by a
    /// step-doubling check at the strongest coupling, cos θ = 1.
    pub fn new(spec: &PulseTrainSpec, transition: &MolecularTransition, options: TrialOptions) -> Result<Self> {
        let tau = spec.tau_sigma();
        let rabi_peak = spec.peak_rabi(transition) * tau;
        let detuning = spec.detuning(transition) * tau;
        let strongest = match options.orientation {
            Orientation::Fixed(c) => rabi_peak * c.abs(),
            _ => rabi_peak,
        };
        let steps = verified_steps(strongest, detuning, &options.integrator)?;
        let integrator = Integrator { steps, ..options.integrator };
        Ok(TrainModel {
            rabi_peak,
            detuning,
            n_pulse: spec.n_pulse,
            options: TrialOptions { integrator, ..options },
            shape: PulseShape::new(detuning, &integrator),
        })
    }

    pub fn propagator(&self, cos_theta: f64) -> Matrix2<C64> {
        self.shape.propagator(self.rabi_peak * cos_theta)
    }

    fn draw_cos_theta(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.options.orientation {
            Orientation::Fixed(c) => c,
            _ => rng.random_range(-1.0..=1.0),
        }
    }

    /// Runs one trial with the given random stream.
    pub fn run(&self, rng: &mut ChaCha8Rng) -> Result<TrialRecord> {
        let mut p_e = Vec::with_capacity(self.n_pulse + 1);
        p_e.push(0.0);
        let mut first_excitation = None;
        let mut state = TlsState::ground();
        let mut u0 = match self.options.orientation {
            Orientation::PerPulse => None,
            _ => Some(self.propagator(self.draw_cos_theta(rng))),
        };
        if self.rabi_peak == 0.0 {
            p_e.resize(self.n_pulse + 1, 0.0);
            return Ok(TrialRecord { p_e, first_excitation });
        }
        for k in 1..=self.n_pulse {
            if self.options.orientation == Orientation::PerPulse {
                u0 = Some(self.propagator(self.draw_cos_theta(rng)));
            }
            let u0 = u0.as_ref().expect("propagator is set");
            let phase = rng.random::<f64>() * TAU;
            state = state.apply(&with_carrier_phase(u0, phase));
            let pe = state.excited_population();
            if first_excitation.is_none() && pe >= 0.5 {
                first_excitation = Some(k);
            }
            p_e.push(pe);
        }
        let drift = (state.norm_sqr() - 1.0).abs();
        if drift > NORM_DRIFT_TOLERANCE {
            return Err(Error::Normalization { norm: state.norm_sqr() });
        }
        Ok(TrialRecord { p_e, first_excitation })
    }
}

/// Runs trial `index` of a train under `master_seed`.
pub fn run_trial(
    spec: &PulseTrainSpec,
    transition: &MolecularTransition,
    master_seed: u64,
    index: u64,
    options: TrialOptions,
) -> Result<TrialRecord> {
    TrainModel::new(spec, transition, options)?.run(&mut trial_rng(master_seed, index))
}

/// Ensemble averages of the per-pulse excitation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub n_trials: usize,
    /// Mean P_e after each pulse, entry 0 before the first pulse.
    pub mean: Vec<f64>,
    /// Standard error of the mean, per pulse.
    pub stderr: Vec<f64>,
    /// Fraction of trials whose first excitation happened at each pulse.
    pub first_excitation: Vec<f64>,
}

impl EnsembleResult {
    pub fn final_mean(&self) -> f64 {
        *self.mean.last().unwrap_or(&0.0)
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr.last().unwrap_or(&0.0)
    }
}

/// Averages `n_trials` trials (streams `0..n_trials` of `master_seed`).
/// Results do not depend on the number of worker threads.
pub fn ensemble_absorption(
    spec: &PulseTrainSpec,
    transition: &MolecularTransition,
    n_trials: usize,
    master_seed: u64,
    options: TrialOptions,
) -> Result<EnsembleResult> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    let model = TrainModel::new(spec, transition, options)?;
    let width = spec.n_pulse + 1;
    let records = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| model.run(&mut trial_rng(master_seed, i)))
        .collect::<Result<Vec<_>>>()?;

    let n = n_trials as f64;
    let mut mean = vec![0.0; width];
    let mut first = vec![0.0; width];
    for r in &records {
        for (m, p) in mean.iter_mut().zip(&r.p_e) {
            *m += p;
        }
        if let Some(k) = r.first_excitation {
            first[k] += 1.0;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    first.iter_mut().for_each(|f| *f /= n);
    let mut stderr = vec![0.0; width];
    if n_trials > 1 {
        for r in &records {
            for ((s, p), m) in stderr.iter_mut().zip(&r.p_e).zip(&mean) {
                *s += (p - m).powi(2);
            }
        }
        stderr.iter_mut().for_each(|s| *s = (*s / (n - 1.0) / n).sqrt());
    }
    Ok(EnsembleResult {
        n_trials,
        mean,
        stderr,
        first_excitation: first,
    })
}

/// Centre and FWHM of a measured light spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumSummary {
    /// Intensity-weighted mean wavenumber (cm⁻¹).
    pub center: f64,
    /// Full width at half maximum (cm⁻¹).
    pub fwhm: f64,
}

/// Summarizes a sampled spectrum given as ascending wavenumbers with
/// relative intensities.
pub fn summarize_spectrum(wavenumber: &[f64], intensity: &[f64]) -> Result<SpectrumSummary> {
    if wavenumber.len() != intensity.len() || wavenumber.len() < 3 {
        return Err(Error::Curve("a light spectrum needs at least three samples".into()));
    }
    if wavenumber.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Curve("spectrum wavenumbers must increase".into()));
    }
    let total: f64 = intensity.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Curve("spectrum has no positive intensity".into()));
    }
    let center = wavenumber.iter().zip(intensity).map(|(x, y)| x * y).sum::<f64>() / total;
    let (imax, &peak) = intensity
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let half = peak / 2.0;
    let cross = |i: usize, j: usize| {
        let (x0, x1, y0, y1) = (wavenumber[i], wavenumber[j], intensity[i], intensity[j]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let left = (1..=imax).rev().find(|&i| intensity[i - 1] < half).map(|i| cross(i - 1, i));
    let right = (imax..wavenumber.len() - 1).find(|&i| intensity[i + 1] < half).map(|i| cross(i, i + 1));
    match (left, right) {
        (Some(l), Some(r)) => Ok(SpectrumSummary { center, fwhm: r - l }),
        _ => Err(Error::Curve("spectrum does not fall below half maximum on both sides".into())),
    }
}

/// Reads a two-column CSV (wavenumber in cm⁻¹, relative intensity); a
/// non-numeric first row is treated as a header.
pub fn load_light_spectrum(path: &Path) -> Result<SpectrumSummary> {
    let (x, y) = read_two_columns(path)?;
    summarize_spectrum(&x, &y)
}

pub(crate) fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        if row.len() < 2 {
            return Err(Error::Curve(format!("{}: row {} has fewer than two columns", path.display(), line + 1)));
        }
        match (row[0].parse::<f64>(), row[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if line == 0 => continue,
            _ => return Err(Error::Curve(format!("{}: row {} is not numeric", path.display(), line + 1))),
        }
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::DEBYE;

    fn paper_train() -> (PulseTrainSpec, MolecularTransition) {
        (
            PulseTrainSpec::from_linewidth(3703.3, 126.7, 1.1e4, 100e3, 34).unwrap(),
            MolecularTransition::new(3783.0, 3.7e-5).unwrap(),
        )
    }

    /// Piecewise-constant exact 2×2 exponentials (exponential midpoint rule).
    fn midpoint_oracle(rabi_peak: f64, detuning: f64, half: f64, steps: usize) -> Matrix2<C64> {
        let h = 2.0 * half / steps as f64;
        let mut u = Matrix2::<C64>::identity();
        for k in 0..steps {
            let s = -half + (k as f64 + 0.5) * h;
            let c = 0.5 * rabi_peak * (-s * s / 4.0).exp();
            // H = [[Δ, c], [c, 0]] = Δ/2 I + (Δ/2) σz + c σx
            let (a, b) = (detuning / 2.0, c);
            let w = (a * a + b * b).sqrt();
            let (cw, sw) = ((w * h).cos(), (w * h).sin());
            let i = C64::new(0.0, 1.0);
            let step = if w == 0.0 {
                Matrix2::identity()
            } else {
                Matrix2::new(cw - i * (a / w) * sw, -i * (b / w) * sw, -i * (b / w) * sw, cw + i * (a / w) * sw)
            } * C64::from_polar(1.0, -a * h);
            u = step * u;
        }
        u
    }

    #[test]
    fn dipole_from_oscillator_strength() {
        let t = MolecularTransition::new(3783.0, 3.7e-5).unwrap();
        let mu = t.mu_eg() / DEBYE;
        assert!((mu - 0.2040).abs() < 5e-4, "{mu}");
        let back = MolecularTransition::from_dipole(3783.0, t.mu_eg()).unwrap();
        assert!(((back.f_eg - t.f_eg) / t.f_eg).abs() < 1e-12);
        assert!(MolecularTransition::new(0.0, 1e-5).is_err());
        assert!(MolecularTransition::new(3783.0, -1.0).is_err());
    }

    #[test]
    fn transform_limited_pulse_parameters() {
        let (spec, _) = paper_train();
        assert!((spec.fwhm_duration * 1e15 - 116.2).abs() < 0.1, "{}", spec.fwhm_duration);
        assert!((spec.tau_sigma() * 2.0 * (2.0 * LN_2).sqrt() - spec.fwhm_duration).abs() < 1e-25);
        let e0 = spec.peak_field();
        assert!((e0 / 1.29e9 - 1.0).abs() < 0.01, "{e0}");
        let d = PulseTrainSpec::from_duration(3703.3, spec.fwhm_duration, 1.1e4, 100e3, 34).unwrap();
        assert!((d.fwhm_linewidth - 126.7).abs() < 1e-9);
        assert!((spec.train_duration() - 0.34e-3).abs() < 1e-15);
    }

    #[test]
    fn resonant_area_theorem() {
        let integ = Integrator::default();
        for area in [PI / 4.0, PI / 2.0, PI] {
            let pulse = SinglePulse::from_area(area, 0.0, 0.3);
            let out = propagate_pulse(&TlsState::ground(), &pulse, &integ).unwrap();
            let expected = (area / 2.0).sin().powi(2);
            assert!((out.excited_population() - expected).abs() < 1e-6, "{area}");
        }
    }

    #[test]
    fn perpendicular_molecule_is_not_driven() {
        let (spec, t) = paper_train();
        let pulse = SinglePulse::new(spec.peak_field(), spec.tau_sigma(), 0.0, 1.0, PI / 2.0, &t);
        assert!(pulse.rabi_peak.abs() < 1e-15);
        let out = propagate_pulse(&TlsState::ground(), &pulse, &Integrator::default()).unwrap();
        assert!(out.excited_population() < 1e-30);
    }

    #[test]
    fn paper_scale_detuned_pulse_matches_oracle() {
        let (spec, t) = paper_train();
        let tau = spec.tau_sigma();
        let detuning = wavenumber_to_angular(100.0);
        let pulse = SinglePulse::new(spec.peak_field(), tau, detuning, 0.0, 0.0, &t);
        let out = propagate_pulse(&TlsState::ground(), &pulse, &Integrator::default()).unwrap();
        let oracle = midpoint_oracle(pulse.rabi_peak, pulse.detuning, 10.0, 200_000);
        let diff = (out.excited_population() - oracle[(1, 0)].norm_sqr()).abs();
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn carrier_phase_is_a_conjugation() {
        let integ = Integrator::default();
        let u0 = pulse_propagator(0.9, 0.4, &integ);
        let u = with_carrier_phase(&u0, 1.3);
        let oracle = midpoint_oracle(0.9, 0.4, 8.0, 100_000);
        // rebuilding with φ explicitly: H_ge = c e^{−iφ}, H_eg = c e^{iφ}
        let p = Matrix2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::from_polar(1.0, 1.3));
        let expected = p * oracle * p.adjoint();
        assert!((u - expected).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-7);
        assert!(unitarity_defect(&u) < 1e-9);
    }

    #[test]
    fn excitation_even_in_detuning() {
        let integ = Integrator::default();
        for d in [0.3, 1.0, 2.5] {
            let a = transfer(&pulse_propagator(1.2, d, &integ));
            let b = transfer(&pulse_propagator(1.2, -d, &integ));
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn off_resonant_excitation_falls_with_detuning() {
        let integ = Integrator::default();
        let mut last = f64::INFINITY;
        for d in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let p = transfer(&pulse_propagator(0.05, d, &integ));
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn step_refinement_gives_up() {
        let integ = Integrator {
            steps: 4,
            max_steps: 16,
            ..Integrator::default()
        };
        assert!(matches!(verified_steps(40.0, 3.0, &integ), Err(Error::Integration { .. })));
    }

    #[test]
    fn empty_train_and_dark_train() {
        let (spec, t) = paper_train();
        let r = run_trial(&spec.with_n_pulse(0), &t, 1, 0, TrialOptions::default()).unwrap();
        assert_eq!(r.p_e, vec![0.0]);
        let dark = PulseTrainSpec::from_linewidth(3783.0, 126.7, 0.0, 100e3, 34).unwrap();
        let e = ensemble_absorption(&dark, &t, 50, 3, TrialOptions::default()).unwrap();
        assert!(e.mean.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn aligned_pi_pulse_excites_every_trial() {
        let t = MolecularTransition::new(3783.0, 3.7e-5).unwrap();
        let base = PulseTrainSpec::from_linewidth(3783.0, 126.7, 1.1e4, 100e3, 1).unwrap();
        // Θ ∝ E₀ ∝ √I: rescale the intensity to reach Θ = π
        let area = pulse_area(base.peak_rabi(&t), base.tau_sigma());
        let spec = PulseTrainSpec { intensity: base.intensity * (PI / area).powi(2), ..base };
        let options = TrialOptions {
            orientation: Orientation::Fixed(1.0),
            ..TrialOptions::default()
        };
        let e = ensemble_absorption(&spec, &t, 20, 9, options).unwrap();
        assert!((e.final_mean() - 1.0).abs() < 1e-6);
        assert!(e.first_excitation[1] == 1.0);
    }

    #[test]
    fn trials_are_reproducible_and_prefix_stable() {
        let (spec, t) = paper_train();
        let a = run_trial(&spec, &t, 42, 7, TrialOptions::default()).unwrap();
        let b = run_trial(&spec, &t, 42, 7, TrialOptions::default()).unwrap();
        assert_eq!(a, b);
        let short = run_trial(&spec.with_n_pulse(10), &t, 42, 7, TrialOptions::default()).unwrap();
        assert_eq!(&a.p_e[..11], &short.p_e[..]);
        let c = run_trial(&spec, &t, 42, 8, TrialOptions::default()).unwrap();
        assert_ne!(a, c);
        if let Some(k) = a.first_excitation {
            assert!(a.p_e[k] >= 0.5 && a.p_e[..k].iter().all(|&p| p < 0.5));
        }
    }

    #[test]
    fn norm_is_conserved_over_the_train() {
        let (spec, t) = paper_train();
        let model = TrainModel::new(&spec, &t, TrialOptions::default()).unwrap();
        for c in [1.0, 0.7, -0.2] {
            let u = model.propagator(c);
            assert!(unitarity_defect(&u) * (spec.n_pulse as f64) < 1e-6);
        }
        let per_pulse = TrialOptions {
            orientation: Orientation::PerPulse,
            ..TrialOptions::default()
        };
        run_trial(&spec, &t, 5, 0, per_pulse).unwrap();
    }

    #[test]
    fn light_spectrum_summary() {
        let x: Vec<f64> = (0..401).map(|i| 3500.0 + i as f64).collect();
        let sigma = 126.7 / (2.0 * (2.0 * LN_2).sqrt());
        let y: Vec<f64> = x.iter().map(|v| (-(v - 3703.3f64).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
        let s = summarize_spectrum(&x, &y).unwrap();
        assert!((s.center - 3703.3).abs() < 0.05, "{}", s.center);
        assert!((s.fwhm - 126.7).abs() < 0.05, "{}", s.fwhm);
        assert!(summarize_spectrum(&x[..100], &y[..100]).is_err());
    }
}
