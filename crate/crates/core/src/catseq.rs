//! The cat-state recoil sequence: spin-dependent displacement, recoil,
//! reversal and σ_y-basis analysis, simulated exactly in a truncated Fock
//! space and through the closed-form signal models.
//!
//! Conventions: the sequence starts in |↑⟩|0⟩. A recoil `D(β)` between
//! generation and reversal leaves the qubit in `cos Φ |↑⟩ + i sin Φ |↓⟩`
//! with `Φ = 2 Im(β α*)`, which is `2η Re α` for a kick `β = iη`. The
//! analysis rotation is `R_x(−π/2)`, giving `P(↓) = (1 + sin 2Φ) / 2`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    self, annihilation, apply_dense, expm_hermitian, Basis, ComplexAmplitude, ConditionalSign, FockSpace,
    SpinBosonState,
};

/// Default rms residual allowed when fitting a noiseless phase scan.
pub const DEFAULT_FIT_TOLERANCE: f64 = 1e-3;
/// Smallest φ₋ grid accepted by [`phase_scan`].
pub const MIN_SCAN_POINTS: usize = 8;

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Bichromatic-pulse parameters of the spin-dependent force.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CatParams {
    /// Lamb-Dicke factor of the qubit transition.
    pub eta_a: f64,
    /// Carrier Rabi frequency Ω₀ (rad/s).
    pub rabi: f64,
    /// Pulse duration T (s).
    pub duration: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
}

impl CatParams {
    pub fn new(eta_a: f64, rabi: f64, duration: f64, phi_minus: f64) -> Result<Self> {
        for (name, v) in [("eta_a", eta_a), ("rabi", rabi), ("duration", duration)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(CatParams {
            eta_a,
            rabi,
            duration,
            phi_minus: wrap_phase(phi_minus),
            phi_plus: 0.0,
        })
    }

    /// Chooses the duration that produces a cat of size `alpha_mag`.
    pub fn with_alpha_magnitude(eta_a: f64, rabi: f64, alpha_mag: f64, phi_minus: f64) -> Result<Self> {
        if !(eta_a > 0.0 && rabi > 0.0) {
            return Err(Error::Domain("eta_a and rabi must be positive to size a cat".into()));
        }
        Self::new(eta_a, rabi, 2.0 * alpha_mag / (eta_a * rabi), phi_minus)
    }

    pub fn with_phi_minus(self, phi_minus: f64) -> Self {
        CatParams {
            phi_minus: wrap_phase(phi_minus),
            ..self
        }
    }

    pub fn with_phi_plus(self, phi_plus: f64) -> Self {
        CatParams {
            phi_plus: wrap_phase(phi_plus),
            ..self
        }
    }

    /// Coupling `η_a Ω₀ / 2` (rad/s).
    pub fn coupling(&self) -> f64 {
        self.eta_a * self.rabi / 2.0
    }

    /// `α = −i η_a Ω₀ T e^{iφ₋} / 2`.
    pub fn alpha(&self) -> C64 {
        C64::new(0.0, -1.0) * C64::from_polar(self.coupling() * self.duration, self.phi_minus)
    }

    pub fn alpha_magnitude(&self) -> f64 {
        self.coupling() * self.duration
    }
}

/// A momentum kick between generation and reversal, `D(η e^{i·phase})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecoilEvent {
    pub eta: f64,
    pub phase: f64,
    /// Time after cat generation (s); enters only through decoherence.
    pub t_event: f64,
}

impl RecoilEvent {
    pub fn new(eta: f64, phase: f64, t_event: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!("recoil magnitude must be ≥ 0, got {eta}")));
        }
        Ok(RecoilEvent {
            eta,
            phase: wrap_phase(phase),
            t_event,
        })
    }

    /// `D(iη)`, the kick of a photon absorbed in phase with the cat axis.
    pub fn kick(eta: f64) -> Result<Self> {
        Self::new(eta, FRAC_PI_2, 0.0)
    }

    /// A kick at time `t` after generation, seen in the frame rotating
    /// with the mode: `D(iη e^{iω t})`.
    pub fn at_time(eta: f64, t: f64, omega_z: f64) -> Result<Self> {
        Self::new(eta, FRAC_PI_2 + omega_z * t, t)
    }

    pub fn amplitude(&self) -> C64 {
        C64::from_polar(self.eta, self.phase)
    }
}

/// Multiplicative contrast ceiling `S_max e^{−t/τ_d}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecoherenceModel {
    pub s_max: f64,
    pub tau_d: f64,
}

impl DecoherenceModel {
    pub fn new(s_max: f64, tau_d: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s_max) {
            return Err(Error::Domain(format!("S_max must lie in [0, 1], got {s_max}")));
        }
        if !(tau_d > 0.0) {
            return Err(Error::Domain(format!("τ_d must be positive, got {tau_d}")));
        }
        Ok(DecoherenceModel { s_max, tau_d })
    }

    pub fn contrast_at(&self, t: f64) -> f64 {
        self.s_max * (-t / self.tau_d).exp()
    }
}

/// Measured contrast ceilings at a few cat sizes, interpolated linearly in
/// |α| and held constant beyond the ends.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmaxTable {
    points: Vec<(f64, f64)>,
}

impl SmaxTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("an S_max table needs at least one entry".into()));
        }
        if points.iter().any(|&(a, s)| !(a >= 0.0) || !(0.0..=1.0).contains(&s)) {
            return Err(Error::Domain("S_max table entries need |α| ≥ 0 and S_max in [0, 1]".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("S_max table has repeated |α| entries".into()));
        }
        Ok(SmaxTable { points })
    }

    pub fn at(&self, alpha_mag: f64) -> f64 {
        let p = &self.points;
        if alpha_mag <= p[0].0 {
            return p[0].1;
        }
        if alpha_mag >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let i = p.partition_point(|q| q.0 <= alpha_mag) - 1;
        let (a0, s0) = p[i];
        let (a1, s1) = p[i + 1];
        s0 + (s1 - s0) * (alpha_mag - a0) / (a1 - a0)
    }
}

/// Applies `exp(−i g T σ_n ⊗ (a e^{−iφ₋} + a† e^{iφ₋}))` via the
/// σ_n-conditioned displacement, σ_n = σ_x cos φ₊ − σ_y sin φ₊.
fn spin_dependent_force(space: &FockSpace, state: &SpinBosonState, p: &CatParams) -> Result<SpinBosonState> {
    // σ_n = e^{−iφ₊σ_z/2} σ_x e^{iφ₊σ_z/2} up to the frame; rotate ↓ so σ_n → σ_x
    let twist = C64::from_polar(1.0, p.phi_plus);
    let up = state.component(hilbert::Spin::Up).clone();
    let down = state.component(hilbert::Spin::Down) * twist;
    let aligned = SpinBosonState::from_components(up, down);
    let amp = ComplexAmplitude::try_from(p.alpha())?;
    let moved = hilbert::displacement(space, &aligned, amp, Some(ConditionalSign::Plus))?;
    let up = moved.component(hilbert::Spin::Up).clone();
    let down = moved.component(hilbert::Spin::Down) * twist.conj();
    Ok(SpinBosonState::from_components(up, down))
}

/// Creates the cat `(|+⟩|α⟩ + |−⟩|−α⟩)/√2` from |↑⟩|0⟩.
pub fn generate_cat(space: &FockSpace, state: &SpinBosonState, p: &CatParams) -> Result<SpinBosonState> {
    spin_dependent_force(space, state, p)
}

/// Undoes [`generate_cat`] by driving the same pulse with φ₊ shifted by π.
pub fn reverse_cat(space: &FockSpace, state: &SpinBosonState, p: &CatParams) -> Result<SpinBosonState> {
    spin_dependent_force(space, state, &p.with_phi_plus(p.phi_plus + PI))
}

/// Full Hamiltonian of the bichromatic interaction on the spin ⊗ Fock
/// space, ordered (↑ block, ↓ block).
pub fn interaction_hamiltonian(cutoff: usize, p: &CatParams) -> DMatrix<C64> {
    let a = annihilation(cutoff);
    let quad = &a * C64::from_polar(1.0, -p.phi_minus) + a.adjoint() * C64::from_polar(1.0, p.phi_minus);
    // σ_x cos φ₊ − σ_y sin φ₊ = [[0, e^{iφ₊}], [e^{−iφ₊}, 0]]
    let off = C64::from_polar(p.coupling(), p.phi_plus);
    let mut h = DMatrix::<C64>::zeros(2 * cutoff, 2 * cutoff);
    h.view_mut((0, cutoff), (cutoff, cutoff)).copy_from(&(&quad * off));
    h.view_mut((cutoff, 0), (cutoff, cutoff)).copy_from(&(&quad * off.conj()));
    h
}

/// [`generate_cat`] computed by exponentiating the dense interaction
/// Hamiltonian over the pulse duration.
pub fn generate_cat_dense(space: &FockSpace, state: &SpinBosonState, p: &CatParams) -> Result<SpinBosonState> {
    let h = interaction_hamiltonian(space.cutoff(), p);
    let u = expm_hermitian(&h, p.duration)?;
    let out = apply_dense(&u, state);
    let leakage = out.leakage();
    if leakage > space.leakage_tolerance() {
        return Err(Error::Truncation {
            leakage,
            cutoff: space.cutoff(),
            tolerance: space.leakage_tolerance(),
        });
    }
    Ok(out)
}

pub fn apply_recoil(space: &FockSpace, state: &SpinBosonState, event: &RecoilEvent) -> Result<SpinBosonState> {
    hilbert::displacement(space, state, ComplexAmplitude::try_from(event.amplitude())?, None)
}

/// `n_kick` kicks `D(iη_k)` separated by free evolution over `spacing`,
/// returned in the frame co-rotating with the mode (referenced to the
/// first kick). With `spacing = 2π/ω_z` this is `D(i n_kick η_k)`.
pub fn kick_train(
    space: &FockSpace,
    state: &SpinBosonState,
    n_kick: usize,
    eta_k: f64,
    spacing: f64,
    omega_z: f64,
) -> Result<SpinBosonState> {
    if n_kick == 0 {
        return Ok(state.clone());
    }
    let kick = ComplexAmplitude::new(0.0, eta_k)?;
    let mut s = hilbert::displacement(space, state, kick, None)?;
    for _ in 1..n_kick {
        s = hilbert::free_evolution(&s, omega_z, spacing);
        s = hilbert::displacement(space, &s, kick, None)?;
    }
    Ok(hilbert::free_evolution(&s, omega_z, -spacing * (n_kick - 1) as f64))
}

/// Peak-to-peak signal `sin(4η|α|)`, scaled by the contrast ceiling when a
/// decoherence model is given.
pub fn analytic_signal(eta: f64, alpha_mag: f64, model: Option<&DecoherenceModel>) -> Result<f64> {
    analytic_signal_at(eta, alpha_mag, model, 0.0)
}

/// As [`analytic_signal`], with the ceiling decayed to `S_max e^{−t/τ_d}`.
pub fn analytic_signal_at(eta: f64, alpha_mag: f64, model: Option<&DecoherenceModel>, t: f64) -> Result<f64> {
    if !(eta >= 0.0 && alpha_mag >= 0.0) {
        return Err(Error::Domain(format!("η = {eta} and |α| = {alpha_mag} must be ≥ 0")));
    }
    let contrast = model.map_or(1.0, |m| m.contrast_at(t));
    Ok(contrast * (4.0 * eta * alpha_mag).sin())
}

/// Best signal a direct phase-sensitive measurement on |↑⟩|0⟩ can give.
pub fn direct_signal(eta: f64) -> f64 {
    2.0 * eta
}

/// Geometric rotation angle `Φ = 2 Im(β α*)` for a recoil `D(β)`.
pub fn geometric_angle(recoil: C64, alpha: C64) -> f64 {
    2.0 * (recoil * alpha.conj()).im
}

/// What happens between generation and reversal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Recoil {
    None,
    Event(RecoilEvent),
    Kicks {
        n_kick: usize,
        eta_k: f64,
        spacing: f64,
        omega_z: f64,
    },
}

/// The full generate → recoil → reverse → analyse sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CatSequence {
    pub cat: CatParams,
    pub recoil: Recoil,
}

impl CatSequence {
    /// Final state before readout for a given φ₋.
    pub fn final_state(&self, space: &FockSpace, phi_minus: f64) -> Result<SpinBosonState> {
        let p = self.cat.with_phi_minus(phi_minus);
        let s = generate_cat(space, &SpinBosonState::ground(space.cutoff()), &p)?;
        let s = match self.recoil {
            Recoil::None => s,
            Recoil::Event(e) => apply_recoil(space, &s, &e)?,
            Recoil::Kicks {
                n_kick,
                eta_k,
                spacing,
                omega_z,
            } => kick_train(space, &s, n_kick, eta_k, spacing, omega_z)?,
        };
        reverse_cat(space, &s, &p)
    }

    /// P(↓) in the σ_y analysis basis.
    pub fn excitation(&self, space: &FockSpace, phi_minus: f64) -> Result<f64> {
        Ok(hilbert::measure_qubit(&self.final_state(space, phi_minus)?, Basis::Y))
    }
}

/// Least-squares fit `y ≈ A sin(x + φ₀) + B` with the frequency fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SinusoidFit {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub rms_residual: f64,
}

impl SinusoidFit {
    pub fn peak_to_peak(&self) -> f64 {
        2.0 * self.amplitude
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (x + self.phase).sin() + self.offset
    }
}

pub fn fit_sinusoid(x: &[f64], y: &[f64]) -> Result<SinusoidFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Domain("a sinusoid fit needs at least three paired samples".into()));
    }
    let design = DMatrix::from_fn(x.len(), 3, |i, j| match j {
        0 => x[i].sin(),
        1 => x[i].cos(),
        _ => 1.0,
    });
    let rhs = DVector::from_column_slice(y);
    let coeffs = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let (s, c, b) = (coeffs[0], coeffs[1], coeffs[2]);
    let residual = &design * &coeffs - rhs;
    Ok(SinusoidFit {
        amplitude: s.hypot(c),
        phase: c.atan2(s),
        offset: b,
        rms_residual: (residual.norm_squared() / x.len() as f64).sqrt(),
    })
}

/// `n` equally spaced φ₋ values covering one period.
pub fn uniform_phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseScan {
    pub phi_minus: Vec<f64>,
    pub excitation: Vec<f64>,
    /// Sinusoid fitted directly to P(↓).
    pub raw: SinusoidFit,
    /// Sinusoid fitted to `2Φ = arcsin(2P − 1)`.
    pub rotation: SinusoidFit,
    /// Peak-to-peak excitation implied by the rotation fit.
    pub signal: f64,
}

impl PhaseScan {
    /// Largest geometric angle Φ reached over the scan.
    pub fn rotation_angle(&self) -> f64 {
        self.rotation.amplitude / 2.0
    }
}

/// Runs the sequence at every φ₋ of `grid` and extracts the peak-to-peak
/// signal.
///
/// `P(↓) = (1 + sin 2Φ)/2` is not a pure sinusoid in φ₋ once `4η|α|` is
/// appreciable, so the fit is done on the linearized angle
/// `2Φ = arcsin(2P − 1)`, which is. The signal is the excursion of
/// `(1 + sin 2Φ)/2` across the fitted range; it is only defined while
/// `|2Φ| ≤ π/2`, beyond which the arcsine folds and the fit fails.
pub fn phase_scan(space: &FockSpace, seq: &CatSequence, grid: &[f64], tolerance: f64) -> Result<PhaseScan> {
    check_grid(grid)?;
    let excitation = grid
        .par_iter()
        .map(|&phi| seq.excitation(space, phi))
        .collect::<Result<Vec<_>>>()?;
    let raw = fit_sinusoid(grid, &excitation)?;
    let angle: Vec<f64> = excitation.iter().map(|p| (2.0 * p - 1.0).clamp(-1.0, 1.0).asin()).collect();
    let rotation = fit_sinusoid(grid, &angle)?;
    if rotation.rms_residual > tolerance {
        return Err(Error::Fit {
            residual: rotation.rms_residual,
            tolerance,
        });
    }
    let hi = (rotation.offset + rotation.amplitude).min(FRAC_PI_2);
    let lo = (rotation.offset - rotation.amplitude).max(-FRAC_PI_2);
    Ok(PhaseScan {
        phi_minus: grid.to_vec(),
        excitation,
        raw,
        rotation,
        signal: (hi.sin() - lo.sin()) / 2.0,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < MIN_SCAN_POINTS {
        return Err(Error::Domain(format!(
            "a φ₋ scan needs at least {MIN_SCAN_POINTS} points, got {}",
            grid.len()
        )));
    }
    let step = TAU / grid.len() as f64;
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() < 1e-9);
    if !uniform {
        return Err(Error::Domain("φ₋ grid must be equally spaced over one period".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, measure_qubit, Spin};

    fn cat(alpha_mag: f64) -> CatParams {
        // η_a = 0.1, Ω₀ = 2π·100 kHz, T sized for |α|
        CatParams::with_alpha_magnitude(0.1, TAU * 100e3, alpha_mag, 0.0).unwrap()
    }

    #[test]
    fn alpha_closed_form_is_linear_in_duration() {
        let p = CatParams::new(0.08, TAU * 50e3, 20e-6, 0.3).unwrap();
        let expected = 0.08 * TAU * 50e3 * 20e-6 / 2.0;
        assert!((p.alpha_magnitude() - expected).abs() < 1e-12);
        let q = CatParams::new(0.08, TAU * 50e3, 40e-6, 0.3).unwrap();
        assert!((q.alpha_magnitude() - 2.0 * p.alpha_magnitude()).abs() < 1e-12);
        // arg α = φ₋ − π/2
        let a = p.alpha();
        assert!(((a.arg() - (0.3 - FRAC_PI_2)).abs()) < 1e-12);
    }

    #[test]
    fn phases_are_wrapped() {
        let p = CatParams::new(0.1, 1.0, 1.0, -0.5).unwrap();
        assert!((p.phi_minus - (TAU - 0.5)).abs() < 1e-12);
        assert!(p.with_phi_plus(3.0 * PI).phi_plus < TAU);
    }

    #[test]
    fn zero_duration_leaves_state_unchanged() {
        let space = FockSpace::new(32);
        let p = CatParams::new(0.1, 1e5, 0.0, 1.0).unwrap();
        let g = SpinBosonState::ground(32);
        let out = generate_cat(&space, &g, &p).unwrap();
        assert!((1.0 - out.fidelity(&g)).abs() < 1e-14);
    }

    #[test]
    fn generated_cat_matches_definition() {
        let space = FockSpace::new(64);
        let p = cat(1.5).with_phi_minus(0.7);
        let out = generate_cat(&space, &SpinBosonState::ground(64), &p).unwrap();
        let a = ComplexAmplitude::try_from(p.alpha()).unwrap();
        let plus = coherent_state(a, 64).unwrap();
        let minus = coherent_state(ComplexAmplitude::try_from(-p.alpha()).unwrap(), 64).unwrap();
        // (|+⟩|α⟩ + |−⟩|−α⟩)/√2 = (|↑⟩(|α⟩+|−α⟩) + |↓⟩(|α⟩−|−α⟩))/2
        let expected = SpinBosonState::from_components((&plus + &minus) * C64::new(0.5, 0.0), (&plus - &minus) * C64::new(0.5, 0.0));
        assert!((1.0 - out.fidelity(&expected)) < 1e-12);
    }

    #[test]
    fn dense_hamiltonian_agrees_with_conditional_displacement() {
        let space = FockSpace::new(64);
        let p = cat(1.5).with_phi_minus(1.1);
        let g = SpinBosonState::ground(64);
        let a = generate_cat(&space, &g, &p).unwrap();
        let b = generate_cat_dense(&space, &g, &p).unwrap();
        assert!(1.0 - a.fidelity(&b) < 1e-6, "{}", 1.0 - a.fidelity(&b));

        // ⟨a⟩ on the |+⟩ branch equals α
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = (b.component(Spin::Up) + b.component(Spin::Down)) * C64::new(s, 0.0);
        let branch = SpinBosonState::from_components(plus, DVector::zeros(64)).normalized();
        assert!((branch.mean_annihilation() - p.alpha()).norm() < 1e-6);

        // and for φ₊ = π, the reversal pulse
        let r = p.with_phi_plus(PI);
        let x = reverse_cat(&space, &a, &p).unwrap();
        let y = generate_cat_dense(&space, &a, &r).unwrap();
        assert!(1.0 - x.fidelity(&y) < 1e-6);
    }

    #[test]
    fn reversal_without_recoil_is_identity() {
        let space = FockSpace::new(120);
        let p = cat(6.5).with_phi_minus(2.0);
        let g = SpinBosonState::ground(120);
        let back = reverse_cat(&space, &generate_cat(&space, &g, &p).unwrap(), &p).unwrap();
        assert!(1.0 - back.fidelity(&g) < 1e-6);
    }

    #[test]
    fn recoil_produces_geometric_rotation() {
        let space = FockSpace::new(64);
        // α real: φ₋ = π/2 gives α = −i·|α|·i = |α|
        let p = cat(2.0).with_phi_minus(FRAC_PI_2);
        assert!((p.alpha() - C64::new(2.0, 0.0)).norm() < 1e-12);
        let seq = CatSequence {
            cat: p,
            recoil: Recoil::Event(RecoilEvent::kick(0.05).unwrap()),
        };
        let out = seq.final_state(&space, FRAC_PI_2).unwrap();
        let pz = measure_qubit(&out, Basis::Z);
        assert!((pz - (0.2f64).sin().powi(2)).abs() < 1e-4, "{pz}");

        // motion ends in |iη⟩
        let kicked = coherent_state(ComplexAmplitude::new(0.0, 0.05).unwrap(), 64).unwrap();
        let up = out.component(Spin::Up) / C64::new(out.population(Spin::Up).sqrt(), 0.0);
        assert!((1.0 - up.dotc(&kicked).norm_sqr()) < 1e-10);

        // displacement in phase with α: Re-part orthogonal → no rotation
        let along = CatSequence {
            cat: p,
            recoil: Recoil::Event(RecoilEvent::new(0.05, 0.0, 0.0).unwrap()),
        };
        let pz = measure_qubit(&along.final_state(&space, FRAC_PI_2).unwrap(), Basis::Z);
        assert!(pz < 1e-4);
    }

    #[test]
    fn geometric_angle_formula() {
        let a = C64::new(2.0, 0.7);
        assert!((geometric_angle(C64::new(0.0, 0.05), a) - 2.0 * 0.05 * 2.0).abs() < 1e-15);
        assert_eq!(geometric_angle(C64::new(0.05, 0.0), C64::new(2.0, 0.0)), 0.0);
    }

    #[test]
    fn periodic_kicks_add_coherently() {
        let n = 64;
        let space = FockSpace::new(n);
        let omega = TAU * 400e3;
        let period = TAU / omega;
        let g = SpinBosonState::ground(n);
        let train = kick_train(&space, &g, 3, 0.0193, period, omega).unwrap();
        let single = hilbert::displacement(&space, &g, ComplexAmplitude::new(0.0, 3.0 * 0.0193).unwrap(), None).unwrap();
        let diff = (train.component(Spin::Up) - single.component(Spin::Up)).norm();
        assert!(diff < 1e-8, "{diff}");

        let cancel = kick_train(&space, &g, 2, 0.0193, period / 2.0, omega).unwrap();
        assert!((cancel.component(Spin::Up) - g.component(Spin::Up)).norm() < 1e-8);

        assert_eq!(kick_train(&space, &g, 0, 0.0193, period, omega).unwrap(), g);
    }

    #[test]
    fn analytic_signal_values() {
        assert_eq!(analytic_signal(0.0, 6.5, None).unwrap(), 0.0);
        let model = DecoherenceModel::new(0.52, 0.88e-3).unwrap();
        let s = analytic_signal(0.0193, 6.5, Some(&model)).unwrap();
        assert!((s - 0.52 * (0.5018f64).sin()).abs() < 1e-12);
        assert!((s - 0.2501).abs() < 1e-4);
        assert!((direct_signal(0.0193) - 0.0386).abs() < 1e-15);
        assert!(s > direct_signal(0.0193));
        assert!(analytic_signal(-0.1, 1.0, None).is_err());
    }

    #[test]
    fn decoherence_ceiling_decays() {
        let model = DecoherenceModel::new(0.52, 0.88e-3).unwrap();
        let ratio = model.contrast_at(0.34e-3) / model.s_max;
        assert!((ratio - (-0.34f64 / 0.88).exp()).abs() < 1e-12);
        assert!((ratio - 0.6795).abs() < 1e-4);
        assert!(DecoherenceModel::new(1.2, 1.0).is_err());
        assert!(DecoherenceModel::new(0.5, 0.0).is_err());
    }

    #[test]
    fn smax_table_interpolates() {
        let t = SmaxTable::new(vec![(6.5, 0.52), (2.0, 0.8)]).unwrap();
        assert_eq!(t.at(1.0), 0.8);
        assert_eq!(t.at(9.0), 0.52);
        assert!((t.at(4.25) - 0.66).abs() < 1e-12);
        assert!(SmaxTable::new(vec![]).is_err());
        assert!(SmaxTable::new(vec![(1.0, 1.5)]).is_err());
    }

    #[test]
    fn sinusoid_fit_recovers_parameters() {
        let x = uniform_phase_grid(12);
        let y: Vec<f64> = x.iter().map(|v| 0.3 * (v + 0.4).sin() + 0.5).collect();
        let f = fit_sinusoid(&x, &y).unwrap();
        assert!((f.amplitude - 0.3).abs() < 1e-12);
        assert!((f.phase - 0.4).abs() < 1e-12);
        assert!((f.offset - 0.5).abs() < 1e-12);
        assert!(f.rms_residual < 1e-12);
    }

    #[test]
    fn flat_scan_without_recoil() {
        let space = FockSpace::new(64);
        let seq = CatSequence { cat: cat(2.0), recoil: Recoil::None };
        let scan = phase_scan(&space, &seq, &uniform_phase_grid(8), DEFAULT_FIT_TOLERANCE).unwrap();
        assert!(scan.signal.abs() < 1e-6);
        assert!(scan.raw.peak_to_peak() < 1e-6);
    }

    #[test]
    fn scan_extrema_where_alpha_is_real() {
        let space = FockSpace::new(64);
        let seq = CatSequence {
            cat: cat(2.0),
            recoil: Recoil::Event(RecoilEvent::kick(0.03).unwrap()),
        };
        let grid = uniform_phase_grid(16);
        let scan = phase_scan(&space, &seq, &grid, DEFAULT_FIT_TOLERANCE).unwrap();
        let (imax, _) = scan.excitation.iter().enumerate().fold((0, f64::MIN), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
        let (imin, _) = scan.excitation.iter().enumerate().fold((0, f64::MAX), |acc, (i, &p)| if p < acc.1 { (i, p) } else { acc });
        // Re α = |α| sin φ₋
        assert!((grid[imax] - FRAC_PI_2).abs() < 1e-12);
        assert!((grid[imin] - 3.0 * FRAC_PI_2).abs() < 1e-12);
        assert!((scan.signal - (4.0f64 * 0.03 * 2.0).sin()).abs() < 1e-6);
    }

    #[test]
    fn scan_grid_validation() {
        let space = FockSpace::new(16);
        let seq = CatSequence { cat: cat(0.5), recoil: Recoil::None };
        assert!(phase_scan(&space, &seq, &uniform_phase_grid(6), 1e-3).is_err());
        let mut bad = uniform_phase_grid(8);
        bad[3] += 0.1;
        assert!(phase_scan(&space, &seq, &bad, 1e-3).is_err());
    }

    #[test]
    fn folded_angle_fails_the_fit() {
        let space = FockSpace::new(64);
        let seq = CatSequence {
            cat: cat(2.0),
            recoil: Recoil::Event(RecoilEvent::kick(0.3).unwrap()),
        };
        let err = phase_scan(&space, &seq, &uniform_phase_grid(16), DEFAULT_FIT_TOLERANCE);
        assert!(matches!(err, Err(Error::Fit { .. })));
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn reversal_is_identity_on_any_spin_state(
            theta in 0.0f64..PI, phi in 0.0f64..TAU, alpha in 0.0f64..3.0, phi_minus in 0.0f64..TAU,
        ) {
            let space = FockSpace::new(64);
            let vac = hilbert::coherent_state(ComplexAmplitude::ZERO, 64).unwrap();
            let s = SpinBosonState::product(
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phi),
                &vac,
            );
            let p = CatParams::with_alpha_magnitude(0.1, 1e5, alpha, phi_minus).unwrap();
            let back = reverse_cat(&space, &generate_cat(&space, &s, &p).unwrap(), &p).unwrap();
            prop_assert!(1.0 - back.fidelity(&s) < 1e-6);
        }

        #[test]
        fn decoherence_lowers_signal(eta in 1e-4f64..0.06, s_max in 0.0f64..0.999) {
            let model = DecoherenceModel::new(s_max, 1e-3).unwrap();
            let noisy = analytic_signal(eta, 6.5, Some(&model)).unwrap();
            let clean = analytic_signal(eta, 6.5, None).unwrap();
            prop_assume!(clean > 0.0);
            prop_assert!(noisy < clean);
        }
    }
}
