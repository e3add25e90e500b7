//! Axial modes of a two-ion crystal and the Lamb-Dicke factors derived
//! from them.
//!
//! Both ions carry charge +e and feel the same axial curvature
//! `κ = m_atom ω_single²`, so the equilibrium spacing is fixed by the trap
//! alone and the Hessian at equilibrium is `κ [[2, −1], [−1, 2]]`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::HBAR;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ion {
    Atom,
    Molecule,
}

/// One axial mode: angular frequency and mass-weighted, unit-norm
/// eigenvector components `[atom, molecule]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalMode {
    pub omega: f64,
    pub participation: [f64; 2],
}

impl NormalMode {
    pub fn participation_of(&self, ion: Ion) -> f64 {
        match ion {
            Ion::Atom => self.participation[0],
            Ion::Molecule => self.participation[1],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IonCrystal {
    pub m_atom: f64,
    pub m_mol: f64,
    pub omega_single: f64,
    pub in_phase: NormalMode,
    pub out_of_phase: NormalMode,
}

impl IonCrystal {
    pub fn new(m_atom: f64, m_mol: f64, omega_single: f64) -> Result<Self> {
        normal_modes(m_atom, m_mol, omega_single)
    }

    /// Builds the crystal whose in-phase mode sits at `omega_in_phase`.
    pub fn from_in_phase_frequency(m_atom: f64, m_mol: f64, omega_in_phase: f64) -> Result<Self> {
        check_inputs(m_atom, m_mol, omega_in_phase)?;
        let (low, _) = eigenvalues(m_atom / m_mol);
        normal_modes(m_atom, m_mol, omega_in_phase / low.sqrt())
    }

    pub fn mass_of(&self, ion: Ion) -> f64 {
        match ion {
            Ion::Atom => self.m_atom,
            Ion::Molecule => self.m_mol,
        }
    }

    /// Ion spacing at equilibrium (m) for two singly charged ions.
    pub fn equilibrium_spacing(&self) -> f64 {
        let kappa = self.m_atom * self.omega_single.powi(2);
        let coulomb = crate::units::ELEMENTARY_CHARGE.powi(2)
            / (4.0 * PI * crate::units::VACUUM_PERMITTIVITY);
        (2.0 * coulomb / kappa).cbrt()
    }
}

/// Light direction relative to the trap axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaserGeometry {
    /// Wavevector magnitude, rad/m.
    pub k: f64,
    /// Projection of the wavevector onto the trap axis.
    pub cos_chi: f64,
}

impl LaserGeometry {
    pub fn new(k: f64, cos_chi: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("wavevector must be positive, got {k}")));
        }
        if !(cos_chi.abs() <= 1.0) {
            return Err(Error::Domain(format!("|cos χ| must be ≤ 1, got {cos_chi}")));
        }
        Ok(LaserGeometry { k, cos_chi })
    }

    pub fn axial_k(&self) -> f64 {
        self.k * self.cos_chi
    }
}

fn check_inputs(m_atom: f64, m_mol: f64, omega: f64) -> Result<()> {
    for (name, v) in [("m_atom", m_atom), ("m_mol", m_mol), ("omega", omega)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidMass(format!("{name} = {v}")));
        }
    }
    Ok(())
}

/// Eigenvalues of the mass-weighted Hessian in units of ω_single², for
/// mass ratio `rho = m_atom / m_mol`.
fn eigenvalues(rho: f64) -> (f64, f64) {
    let root = (1.0 - rho + rho * rho).sqrt();
    (1.0 + rho - root, 1.0 + rho + root)
}

/// Solves the 2×2 mass-weighted axial eigenproblem.
pub fn normal_modes(m_atom: f64, m_mol: f64, omega_single: f64) -> Result<IonCrystal> {
    check_inputs(m_atom, m_mol, omega_single)?;
    let rho = m_atom / m_mol;
    // mass-weighted Hessian / ω_single²: [[2, −√ρ], [−√ρ, 2ρ]]
    let (a, b, d) = (2.0, -rho.sqrt(), 2.0 * rho);
    let (low, high) = eigenvalues(rho);
    let vector = |lambda: f64| -> [f64; 2] {
        // (b, λ − a) and (λ − d, b) both solve the system; take the larger
        let (u, v) = if (lambda - a).abs() > (lambda - d).abs() {
            (b, lambda - a)
        } else {
            (lambda - d, b)
        };
        let n = u.hypot(v);
        [u / n, v / n]
    };
    let mut ip = vector(low);
    if ip[0] < 0.0 {
        ip = [-ip[0], -ip[1]];
    }
    let mut op = vector(high);
    if op[0] < 0.0 {
        op = [-op[0], -op[1]];
    }
    Ok(IonCrystal {
        m_atom,
        m_mol,
        omega_single,
        in_phase: NormalMode {
            omega: omega_single * low.sqrt(),
            participation: ip,
        },
        out_of_phase: NormalMode {
            omega: omega_single * high.sqrt(),
            participation: op,
        },
    })
}

/// Lamb-Dicke factor of `ion` in the given mode:
/// `√(ħ / 2Mω) · k cos χ · e`.
pub fn lamb_dicke_in_mode(crystal: &IonCrystal, mode: &NormalMode, geometry: &LaserGeometry, ion: Ion) -> f64 {
    let spread = (HBAR / (2.0 * crystal.mass_of(ion) * mode.omega)).sqrt();
    spread * geometry.axial_k() * mode.participation_of(ion)
}

/// Lamb-Dicke factor of `ion` in the axial in-phase mode.
pub fn lamb_dicke(crystal: &IonCrystal, geometry: &LaserGeometry, ion: Ion) -> f64 {
    lamb_dicke_in_mode(crystal, &crystal.in_phase, geometry, ion)
}

/// Frequency jitter of the trap and of the pulse train, in Hz.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TimingJitter {
    pub trap_hz: f64,
    pub rep_rate_hz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SyncReport {
    /// ω_z / (2π f_rep).
    pub ratio: f64,
    pub synchronized: bool,
    pub wait: f64,
    /// Worst-case spread of arg α over `wait`, in oscillation cycles.
    pub arg_spread_cycles: f64,
    pub arg_spread_rad: f64,
}

/// Checks that the motion is an integer multiple of the pulse rate and
/// bounds the drift of the recoil phase over a wait time `wait` (s).
///
/// Pulse `k` arrives at `k / f_rep`, where the motion has advanced
/// `k f_z / f_rep` cycles; a change `δf_z`, `δf_rep` shifts this by at most
/// `wait (|δf_z| + (f_z / f_rep) |δf_rep|)` cycles.
pub fn sync_check(omega_z: f64, f_rep: f64, jitter: TimingJitter, wait: f64) -> Result<SyncReport> {
    if !(omega_z > 0.0 && f_rep > 0.0) {
        return Err(Error::Domain(format!("frequencies must be positive: ω_z = {omega_z}, f_rep = {f_rep}")));
    }
    let ratio = omega_z / (2.0 * PI * f_rep);
    let synchronized = (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) && ratio.round() >= 1.0;
    let cycles = wait * (jitter.trap_hz.abs() + ratio * jitter.rep_rate_hz.abs());
    Ok(SyncReport {
        ratio,
        synchronized,
        wait,
        arg_spread_cycles: cycles,
        arg_spread_rad: 2.0 * PI * cycles,
    })
}
