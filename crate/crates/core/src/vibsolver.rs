//! One-dimensional vibrational eigensolver on a uniform grid (sinc DVR).
//!
//! Curves are stored in atomic units: bohr for the coordinate, hartree for
//! energies and e·a₀ for dipoles. Results are reported in cm⁻¹ and debye.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::molecule::oscillator_strength;
use crate::units::{hartree_to_wavenumber, BOHR_RADIUS, DEBYE, ELECTRON_MASS, ELEMENTARY_CHARGE, HARTREE};

/// Smallest number of grid points accepted for a curve.
pub const MIN_GRID_POINTS: usize = 16;
/// Largest edge amplitude of a returned eigenfunction relative to its peak.
pub const EDGE_TOLERANCE: f64 = 1e-6;
const UNIFORM_TOLERANCE: f64 = 1e-12;
const ATOMIC_DIPOLE: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LengthUnit {
    Bohr,
    Angstrom,
    Meter,
}

impl LengthUnit {
    fn to_bohr(self) -> f64 {
        match self {
            LengthUnit::Bohr => 1.0,
            LengthUnit::Angstrom => 1e-10 / BOHR_RADIUS,
            LengthUnit::Meter => 1.0 / BOHR_RADIUS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ValueUnit {
    Hartree,
    Joule,
    Wavenumber,
    Debye,
    CoulombMeter,
    /// e·a₀
    AtomicDipole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurveKind {
    Energy,
    Dipole,
}

impl ValueUnit {
    pub fn kind(self) -> CurveKind {
        match self {
            ValueUnit::Hartree | ValueUnit::Joule | ValueUnit::Wavenumber => CurveKind::Energy,
            _ => CurveKind::Dipole,
        }
    }

    /// Factor to hartree or e·a₀.
    fn to_atomic(self) -> f64 {
        match self {
            ValueUnit::Hartree | ValueUnit::AtomicDipole => 1.0,
            ValueUnit::Joule => 1.0 / HARTREE,
            ValueUnit::Wavenumber => 1.0 / hartree_to_wavenumber(1.0),
            ValueUnit::Debye => DEBYE / ATOMIC_DIPOLE,
            ValueUnit::CoulombMeter => 1.0 / ATOMIC_DIPOLE,
        }
    }
}

fn parse_length_unit(s: &str) -> Option<LengthUnit> {
    match s {
        "bohr" | "a0" => Some(LengthUnit::Bohr),
        "angstrom" | "ang" | "a" => Some(LengthUnit::Angstrom),
        "m" | "meter" => Some(LengthUnit::Meter),
        _ => None,
    }
}

fn parse_value_unit(s: &str) -> Option<ValueUnit> {
    match s {
        "hartree" | "eh" => Some(ValueUnit::Hartree),
        "j" | "joule" => Some(ValueUnit::Joule),
        "cm" | "cm-1" | "wavenumber" => Some(ValueUnit::Wavenumber),
        "debye" | "d" => Some(ValueUnit::Debye),
        "cm_si" | "coulomb_meter" | "cm_c" => Some(ValueUnit::CoulombMeter),
        "au" | "ea0" => Some(ValueUnit::AtomicDipole),
        _ => None,
    }
}

/// Samples of a potential or dipole function on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve1D {
    /// Coordinate in bohr.
    pub x: Vec<f64>,
    /// Hartree for energies, e·a₀ for dipoles.
    pub values: Vec<f64>,
    pub kind: CurveKind,
    /// Reduced mass of the vibration (kg).
    pub reduced_mass: f64,
}

impl Curve1D {
    pub fn new(
        x: &[f64],
        x_unit: LengthUnit,
        values: &[f64],
        value_unit: ValueUnit,
        reduced_mass: f64,
    ) -> Result<Self> {
        let curve = Curve1D {
            x: x.iter().map(|v| v * x_unit.to_bohr()).collect(),
            values: values.iter().map(|v| v * value_unit.to_atomic()).collect(),
            kind: value_unit.kind(),
            reduced_mass,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Builds a uniform curve by spline-resampling arbitrary (strictly
    /// increasing) samples onto `n_points` points spanning the same range.
    pub fn resampled_from(
        x: &[f64],
        x_unit: LengthUnit,
        values: &[f64],
        value_unit: ValueUnit,
        reduced_mass: f64,
        n_points: usize,
    ) -> Result<Self> {
        let xs: Vec<f64> = x.iter().map(|v| v * x_unit.to_bohr()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v * value_unit.to_atomic()).collect();
        let spline = NaturalSpline::new(&xs, &ys)?;
        let grid = uniform_grid(xs[0], xs[xs.len() - 1], n_points);
        let curve = Curve1D {
            values: grid.iter().map(|&g| spline.eval(g)).collect(),
            x: grid,
            kind: value_unit.kind(),
            reduced_mass,
        };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        if self.x.len() != self.values.len() {
            return Err(Error::Curve("coordinate and value columns differ in length".into()));
        }
        if self.x.len() < MIN_GRID_POINTS {
            return Err(Error::Curve(format!(
                "a curve needs at least {MIN_GRID_POINTS} points, got {}",
                self.x.len()
            )));
        }
        if self.x.iter().chain(&self.values).any(|v| !v.is_finite()) {
            return Err(Error::Curve("curve contains non-finite values".into()));
        }
        if self.x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Curve("grid must be strictly increasing".into()));
        }
        let dx = self.spacing();
        let span = self.x[self.x.len() - 1] - self.x[0];
        let uniform = self
            .x
            .iter()
            .enumerate()
            .all(|(i, &v)| (v - (self.x[0] + i as f64 * dx)).abs() <= UNIFORM_TOLERANCE * span.max(1.0) * 10.0);
        if !uniform {
            return Err(Error::Curve("grid spacing is not uniform".into()));
        }
        if self.kind == CurveKind::Energy && !(self.reduced_mass > 0.0 && self.reduced_mass.is_finite()) {
            return Err(Error::InvalidMass(format!("reduced mass must be positive, got {}", self.reduced_mass)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.x[self.x.len() - 1] - self.x[0]) / (self.x.len() - 1) as f64
    }

    /// Spline-resamples onto `n_points` uniform points over the same range.
    pub fn resample(&self, n_points: usize) -> Result<Curve1D> {
        let spline = NaturalSpline::new(&self.x, &self.values)?;
        let grid = uniform_grid(self.x[0], self.x[self.x.len() - 1], n_points);
        let curve = Curve1D {
            values: grid.iter().map(|&g| spline.eval(g)).collect(),
            x: grid,
            ..*self
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Values at other coordinates by natural cubic spline.
    pub fn interpolate(&self, at: &[f64]) -> Result<Vec<f64>> {
        let spline = NaturalSpline::new(&self.x, &self.values)?;
        Ok(at.iter().map(|&g| spline.eval(g)).collect())
    }

    fn same_grid(&self, other: &[f64]) -> bool {
        self.x.len() == other.len() && self.x.iter().zip(other).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1.0))
    }
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Natural cubic spline, extended linearly beyond the end knots.
#[derive(Clone, Debug)]
pub struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n < 3 {
            return Err(Error::Curve("a spline needs at least three paired knots".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Curve("spline knots must be strictly increasing".into()));
        }
        // tridiagonal system for interior second derivatives (Thomas algorithm)
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let c = h1 / 6.0;
            let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(NaturalSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] + self.slope(0) * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1] + self.slope(n - 1) * (t - self.x[n - 1]);
        }
        let i = self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i] + b * self.y[i + 1] + ((a.powi(3) - a) * self.m[i] + (b.powi(3) - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn slope(&self, knot: usize) -> f64 {
        let n = self.x.len();
        if knot == 0 {
            let h = self.x[1] - self.x[0];
            (self.y[1] - self.y[0]) / h - h * (2.0 * self.m[0] + self.m[1]) / 6.0
        } else {
            let h = self.x[n - 1] - self.x[n - 2];
            (self.y[n - 1] - self.y[n - 2]) / h + h * (self.m[n - 2] + 2.0 * self.m[n - 1]) / 6.0
        }
    }
}

/// Lowest vibrational levels on the DVR grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VibLevels {
    /// Energies in hartree, ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, normalized so that Σ cᵢ² = 1.
    pub vectors: DMatrix<f64>,
    pub x: Vec<f64>,
    pub spacing: f64,
    pub potential: Vec<f64>,
    pub reduced_mass: f64,
}

impl VibLevels {
    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    /// Level energy above the lowest level in cm⁻¹.
    pub fn term_value(&self, n: usize) -> f64 {
        hartree_to_wavenumber(self.energies[n] - self.energies[0])
    }

    pub fn energy_wavenumber(&self, n: usize) -> f64 {
        hartree_to_wavenumber(self.energies[n])
    }

    /// ψₙ(xᵢ) normalized as ∫ψ² dx = 1.
    pub fn wavefunction(&self, n: usize) -> Vec<f64> {
        let s = self.spacing.sqrt();
        self.vectors.column(n).iter().map(|c| c / s).collect()
    }

    /// Grid-quadrature overlap ∫ψᵢψⱼ dx.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        self.vectors.column(i).dot(&self.vectors.column(j))
    }
}

/// Sinc-DVR kinetic energy matrix (hartree) for mass `mass_au` in electron
/// masses and spacing `dx` in bohr.
pub fn kinetic_matrix(n: usize, dx: f64, mass_au: f64) -> DMatrix<f64> {
    let scale = 1.0 / (mass_au * dx * dx);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            scale * PI * PI / 6.0
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            scale * sign / (d * d)
        }
    })
}

/// Diagonalizes T + V on the potential's grid and returns the lowest
/// `n_levels` levels.
pub fn dvr_solve(potential: &Curve1D, n_levels: usize) -> Result<VibLevels> {
    if potential.kind != CurveKind::Energy {
        return Err(Error::Curve("dvr_solve needs an energy curve".into()));
    }
    let n = potential.len();
    if n_levels == 0 || n_levels > n {
        return Err(Error::Domain(format!("cannot return {n_levels} levels from a {n}-point grid")));
    }
    let dx = potential.spacing();
    let mut h = kinetic_matrix(n, dx, potential.reduced_mass / ELECTRON_MASS);
    for i in 0..n {
        h[(i, i)] += potential.values[i];
    }
    let asym = (&h - h.transpose()).amax();
    if asym > 1e-12 * h.amax() {
        return Err(Error::NonHermitian(asym));
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = DMatrix::zeros(n, n_levels);
    let mut energies = Vec::with_capacity(n_levels);
    for (col, &k) in order.iter().take(n_levels).enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        let peak = v.iamax();
        if v[peak] < 0.0 {
            v = -v;
        }
        let ratio = v[0].abs().max(v[n - 1].abs()) / v[peak].abs();
        if ratio > EDGE_TOLERANCE {
            return Err(Error::GridTooSmall { level: col, ratio });
        }
        vectors.set_column(col, &v);
        energies.push(eig.eigenvalues[k]);
    }
    Ok(VibLevels {
        energies,
        vectors,
        x: potential.x.clone(),
        spacing: dx,
        potential: potential.values.clone(),
        reduced_mass: potential.reduced_mass,
    })
}

/// Transition between two vibrational levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VibTransition {
    pub lower: usize,
    pub upper: usize,
    /// |Eⱼ − Eᵢ| in cm⁻¹.
    pub wavenumber: f64,
    /// ⟨ψᵢ|μ|ψⱼ⟩ in debye.
    pub dipole_debye: f64,
    /// ⟨ψᵢ|μ|ψⱼ⟩ in C·m.
    pub dipole: f64,
    /// In the convention of [`crate::molecule::oscillator_strength`].
    pub oscillator_strength: f64,
}

/// Transition dipole and oscillator strength between levels `i` and `j`.
/// A dipole sampled on a different grid is spline-interpolated when
/// `interpolate` is set.
pub fn transition_strength(
    levels: &VibLevels,
    dipole: &Curve1D,
    i: usize,
    j: usize,
    interpolate: bool,
) -> Result<VibTransition> {
    if i == j || i >= levels.n_levels() || j >= levels.n_levels() {
        return Err(Error::Domain(format!(
            "transition {i}→{j} is not between two distinct computed levels (0..{})",
            levels.n_levels()
        )));
    }
    let mu = dipole_on_grid(levels, dipole, interpolate)?;
    Ok(strength_from_samples(levels, &mu, i, j))
}

fn dipole_on_grid(levels: &VibLevels, dipole: &Curve1D, interpolate: bool) -> Result<Vec<f64>> {
    if dipole.kind != CurveKind::Dipole {
        return Err(Error::Curve("transition_strength needs a dipole curve".into()));
    }
    if dipole.same_grid(&levels.x) {
        Ok(dipole.values.clone())
    } else if interpolate {
        dipole.interpolate(&levels.x)
    } else {
        Err(Error::GridMismatch)
    }
}

fn strength_from_samples(levels: &VibLevels, mu: &[f64], i: usize, j: usize) -> VibTransition {
    let (ci, cj) = (levels.vectors.column(i), levels.vectors.column(j));
    // Σ cᵢ μ cⱼ, summed in a fixed order so μ_ij and μ_ji agree exactly
    let (lo, hi) = if i < j { (ci, cj) } else { (cj, ci) };
    let mu_au: f64 = (0..mu.len()).map(|k| lo[k] * mu[k] * hi[k]).sum();
    let wavenumber = hartree_to_wavenumber((levels.energies[j] - levels.energies[i]).abs());
    let dipole = mu_au * ATOMIC_DIPOLE;
    VibTransition {
        lower: i.min(j),
        upper: i.max(j),
        wavenumber,
        dipole_debye: dipole / DEBYE,
        dipole,
        oscillator_strength: oscillator_strength(wavenumber, dipole),
    }
}

/// All transitions out of the ground level.
pub fn transition_table(levels: &VibLevels, dipole: &Curve1D, interpolate: bool) -> Result<Vec<VibTransition>> {
    let mu = dipole_on_grid(levels, dipole, interpolate)?;
    Ok((1..levels.n_levels()).map(|j| strength_from_samples(levels, &mu, 0, j)).collect())
}

/// Fundamental compared with the harmonic frequency at the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnharmonicReport {
    /// E₁ − E₀ (cm⁻¹).
    pub fundamental: f64,
    /// ħω from the curvature at the potential minimum (cm⁻¹).
    pub harmonic: f64,
    /// fundamental − harmonic (cm⁻¹).
    pub shift: f64,
    /// Position of the minimum (bohr).
    pub minimum: f64,
}

/// Compares E₁ − E₀ with the harmonic frequency of the potential. The
/// curvature comes from a least-squares quartic through the seven grid
/// points around the lowest sample, evaluated at the quartic's minimum.
pub fn anharmonic_shift_report(levels: &VibLevels) -> Result<AnharmonicReport> {
    if levels.n_levels() < 2 {
        return Err(Error::Domain("the anharmonic shift needs at least two levels".into()));
    }
    let v = &levels.potential;
    let n = v.len();
    let k = (0..n).min_by(|&a, &b| v[a].total_cmp(&v[b])).expect("non-empty grid");
    let k = k.clamp(3, n - 4);
    let dx = levels.spacing;
    // p(t) = Σ cₚ tᵖ with t = (x − x_k)/dx
    let design = DMatrix::from_fn(7, 5, |r, p| (r as f64 - 3.0).powi(p as i32));
    let rhs = DVector::from_fn(7, |r, _| v[k + r - 3]);
    let c = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let d1 = |t: f64| c[1] + 2.0 * c[2] * t + 3.0 * c[3] * t * t + 4.0 * c[4] * t.powi(3);
    let d2 = |t: f64| 2.0 * c[2] + 6.0 * c[3] * t + 12.0 * c[4] * t * t;
    let mut t = 0.0;
    for _ in 0..50 {
        let step = d1(t) / d2(t);
        t -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    let curvature = d2(t) / (dx * dx);
    if !(curvature > 0.0) {
        return Err(Error::Curve("potential has no minimum inside the grid".into()));
    }
    let omega = (curvature / (levels.reduced_mass / ELECTRON_MASS)).sqrt();
    let harmonic = hartree_to_wavenumber(omega);
    let fundamental = levels.term_value(1);
    Ok(AnharmonicReport {
        fundamental,
        harmonic,
        shift: fundamental - harmonic,
        minimum: levels.x[k] + t * dx,
    })
}

/// Fundamental on `n_points` and on `2 n_points − 1` (half the spacing);
/// the difference estimates the discretization error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Convergence {
    pub fundamental: f64,
    pub refined: f64,
    pub change: f64,
}

pub fn refinement_check(potential: &Curve1D, n_points: usize) -> Result<Convergence> {
    let coarse = dvr_solve(&potential.resample(n_points)?, 2)?.term_value(1);
    let fine = dvr_solve(&potential.resample(2 * n_points - 1)?, 2)?.term_value(1);
    Ok(Convergence {
        fundamental: coarse,
        refined: fine,
        change: fine - coarse,
    })
}

/// A curve read from disk, with its declared units.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveFile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub x_unit: LengthUnit,
    pub value_unit: ValueUnit,
}

/// Reads a two-column CSV whose header declares units as `<name>_<unit>`,
/// e.g. `r_bohr,energy_hartree` or `q_angstrom,dipole_debye`.
pub fn read_curve_csv(path: &Path) -> Result<CurveFile> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Curve(format!("{}: header must name two columns", path.display())));
    }
    let unit_of = |h: &str| h.rsplit_once('_').map(|(_, u)| u.to_ascii_lowercase());
    let x_unit = unit_of(&headers[0]).as_deref().and_then(parse_length_unit).ok_or_else(|| {
        Error::Curve(format!("{}: cannot read a length unit from column '{}'", path.display(), &headers[0]))
    })?;
    let value_header = headers[1].to_ascii_lowercase();
    let value_unit = match value_header.rsplit_once('_') {
        Some((name, unit)) if name.contains("dipole") || name == "mu" => match unit {
            "cm" => Some(ValueUnit::CoulombMeter),
            "au" => Some(ValueUnit::AtomicDipole),
            u => parse_value_unit(u).filter(|v| v.kind() == CurveKind::Dipole),
        },
        Some((_, unit)) => parse_value_unit(unit).filter(|v| v.kind() == CurveKind::Energy),
        None => None,
    }
    .ok_or_else(|| Error::Curve(format!("{}: cannot read a value unit from column '{}'", path.display(), &headers[1])))?;
    let mut x = Vec::new();
    let mut values = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Curve(format!("{}: data row {} is not numeric", path.display(), line + 1)))
        };
        x.push(parse(&row[0])?);
        values.push(parse(&row[1])?);
    }
    Ok(CurveFile {
        x,
        values,
        x_unit,
        value_unit,
    })
}

/// Writes the level table followed by the transitions out of level 0.
pub fn write_levels_csv<W: Write>(out: W, levels: &VibLevels, transitions: &[VibTransition]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "lower", "upper", "energy_cm", "wavenumber_cm", "dipole_debye", "oscillator_strength"])?;
    for n in 0..levels.n_levels() {
        w.write_record([
            "level".to_string(),
            n.to_string(),
            n.to_string(),
            format!("{:.6}", levels.energy_wavenumber(n)),
            format!("{:.6}", levels.term_value(n)),
            String::new(),
            String::new(),
        ])?;
    }
    for t in transitions {
        w.write_record([
            "transition".to_string(),
            t.lower.to_string(),
            t.upper.to_string(),
            String::new(),
            format!("{:.6}", t.wavenumber),
            format!("{:.9e}", t.dipole_debye),
            format!("{:.9e}", t.oscillator_strength),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molecule::MolecularTransition;
    use crate::units::{amu_to_kg, wavenumber_to_angular};

    const OMEGA_CM: f64 = 3950.0;

    fn oh_mass() -> f64 {
        amu_to_kg(16.0 * 1.008 / 17.008)
    }

    fn omega_au() -> f64 {
        OMEGA_CM / hartree_to_wavenumber(1.0)
    }

    fn harmonic(n: usize, half_width: f64) -> Curve1D {
        let m = oh_mass() / ELECTRON_MASS;
        let x = uniform_grid(-half_width, half_width, n);
        let v: Vec<f64> = x.iter().map(|q| 0.5 * m * omega_au().powi(2) * q * q).collect();
        Curve1D::new(&x, LengthUnit::Bohr, &v, ValueUnit::Hartree, oh_mass()).unwrap()
    }

    /// Morse curve with ωₑ = 3950 cm⁻¹, ωₑχₑ = 79 cm⁻¹.
    fn morse(n: usize, lo: f64, hi: f64) -> (Curve1D, f64, f64) {
        let we = omega_au();
        let wexe = 79.0 / hartree_to_wavenumber(1.0);
        let de = we * we / (4.0 * wexe);
        let m = oh_mass() / ELECTRON_MASS;
        let a = we * (m / (2.0 * de)).sqrt();
        let x = uniform_grid(lo, hi, n);
        let v: Vec<f64> = x.iter().map(|q| de * (1.0 - (-a * q).exp()).powi(2)).collect();
        (Curve1D::new(&x, LengthUnit::Bohr, &v, ValueUnit::Hartree, oh_mass()).unwrap(), we, de)
    }

    fn morse_level(n: usize, we: f64, de: f64) -> f64 {
        let e = we * (n as f64 + 0.5);
        hartree_to_wavenumber(e - e * e / (4.0 * de))
    }

    #[test]
    fn harmonic_levels() {
        let levels = dvr_solve(&harmonic(301, 2.2), 10).unwrap();
        for n in 0..10 {
            let expected = (n as f64 + 0.5) * OMEGA_CM;
            assert!((levels.energy_wavenumber(n) - expected).abs() < 0.01, "{n}: {}", levels.energy_wavenumber(n));
        }
        for i in 0..10 {
            for j in 0..10 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((levels.overlap(i, j) - target).abs() < 1e-8);
            }
        }
        let shift = anharmonic_shift_report(&levels).unwrap();
        assert!(shift.shift.abs() < 0.01, "{shift:?}");
        assert!((shift.harmonic - OMEGA_CM).abs() < 1e-6);
    }

    #[test]
    fn morse_levels_and_shift() {
        let (curve, we, de) = morse(401, -1.2, 3.0);
        let levels = dvr_solve(&curve, 6).unwrap();
        for n in 0..6 {
            let diff = (levels.energy_wavenumber(n) - morse_level(n, we, de)).abs();
            assert!(diff < 0.01, "{n}: {diff}");
        }
        let report = anharmonic_shift_report(&levels).unwrap();
        assert!((report.shift + 2.0 * 79.0).abs() < 0.05, "{report:?}");
        assert!(report.minimum.abs() < 1e-6);
    }

    #[test]
    fn grid_refinement_converges() {
        let (curve, _, _) = morse(401, -1.2, 3.0);
        let c = refinement_check(&curve, 201).unwrap();
        assert!(c.change.abs() < 1e-3, "{c:?}");
        // refining never raises the fundamental by more than the tolerance
        assert!(c.change < 1e-3);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        assert!(matches!(dvr_solve(&harmonic(64, 0.4), 3), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn curve_validation() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(Curve1D::new(&x, LengthUnit::Bohr, &x, ValueUnit::Hartree, 1e-27).is_err());
        let mut x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        x[5] = 5.3;
        assert!(Curve1D::new(&x, LengthUnit::Bohr, &x, ValueUnit::Hartree, 1e-27).is_err());
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(Curve1D::new(&x, LengthUnit::Bohr, &x, ValueUnit::Hartree, -1.0).is_err());
        let c = Curve1D::new(&x, LengthUnit::Angstrom, &x, ValueUnit::Debye, 0.0).unwrap();
        assert!((c.spacing() - 1e-10 / BOHR_RADIUS).abs() < 1e-12);
    }

    #[test]
    fn linear_dipole_selection_rules() {
        let curve = harmonic(301, 2.2);
        let levels = dvr_solve(&curve, 6).unwrap();
        let slope = 0.6;
        let mu: Vec<f64> = curve.x.iter().map(|q| slope * q).collect();
        let dip = Curve1D::new(&curve.x, LengthUnit::Bohr, &mu, ValueUnit::AtomicDipole, 0.0).unwrap();
        let t01 = transition_strength(&levels, &dip, 0, 1, false).unwrap();
        let m = oh_mass() / ELECTRON_MASS;
        let expected = slope * (1.0 / (2.0 * m * omega_au())).sqrt() * ATOMIC_DIPOLE;
        assert!((t01.dipole.abs() - expected).abs() / expected < 1e-6);
        for (i, j) in [(0, 2), (0, 3), (1, 3), (2, 5)] {
            assert!(transition_strength(&levels, &dip, i, j, false).unwrap().dipole_debye.abs() < 1e-8);
        }
        let t10 = transition_strength(&levels, &dip, 1, 0, false).unwrap();
        assert_eq!(t01.dipole, t10.dipole);
        assert!(transition_strength(&levels, &dip, 1, 1, false).is_err());
    }

    #[test]
    fn even_dipole_has_no_fundamental() {
        let curve = harmonic(301, 2.2);
        let levels = dvr_solve(&curve, 3).unwrap();
        let mu: Vec<f64> = curve.x.iter().map(|q| 1.0 + 0.3 * q * q).collect();
        let dip = Curve1D::new(&curve.x, LengthUnit::Bohr, &mu, ValueUnit::AtomicDipole, 0.0).unwrap();
        assert!(transition_strength(&levels, &dip, 0, 1, false).unwrap().dipole_debye.abs() < 1e-9);
    }

    #[test]
    fn oscillator_strength_round_trip() {
        let (curve, _, _) = morse(401, -1.2, 3.0);
        let levels = dvr_solve(&curve, 3).unwrap();
        let mu: Vec<f64> = curve.x.iter().map(|q| 0.63 * q - 0.05 * q * q).collect();
        let dip = Curve1D::new(&curve.x, LengthUnit::Bohr, &mu, ValueUnit::AtomicDipole, 0.0).unwrap();
        let t = transition_strength(&levels, &dip, 0, 1, false).unwrap();
        let tr = MolecularTransition::new(t.wavenumber, t.oscillator_strength).unwrap();
        assert!((tr.mu_eg() - t.dipole.abs()).abs() / t.dipole.abs() < 1e-10);
        assert!((tr.omega0() - wavenumber_to_angular(t.wavenumber)).abs() < 1e-3);
    }

    #[test]
    fn mismatched_dipole_grid() {
        let curve = harmonic(301, 2.2);
        let levels = dvr_solve(&curve, 2).unwrap();
        let x = uniform_grid(-2.5, 2.5, 41);
        let mu: Vec<f64> = x.iter().map(|q| 0.6 * q).collect();
        let dip = Curve1D::new(&x, LengthUnit::Bohr, &mu, ValueUnit::AtomicDipole, 0.0).unwrap();
        assert!(matches!(transition_strength(&levels, &dip, 0, 1, false), Err(Error::GridMismatch)));
        let on = Curve1D::new(&curve.x, LengthUnit::Bohr, &curve.x.iter().map(|q| 0.6 * q).collect::<Vec<_>>(), ValueUnit::AtomicDipole, 0.0).unwrap();
        let a = transition_strength(&levels, &dip, 0, 1, true).unwrap();
        let b = transition_strength(&levels, &on, 0, 1, false).unwrap();
        assert!((a.dipole - b.dipole).abs() / b.dipole.abs() < 1e-10);
    }

    #[test]
    fn spline_reproduces_cubics_inside_and_lines_outside() {
        let x = uniform_grid(0.0, 1.0, 11);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let s = NaturalSpline::new(&x, &y).unwrap();
        for t in [-0.5, 0.05, 0.33, 0.999, 1.7] {
            assert!((s.eval(t) - (2.0 * t - 1.0)).abs() < 1e-12);
        }
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = NaturalSpline::new(&x, &y).unwrap();
        assert!((s.eval(0.55) - 0.55f64.sin()).abs() < 1e-5);
    }

    #[test]
    fn curve_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pes.csv");
        std::fs::write(&path, "# test\nr_angstrom,energy_cm\n0.0,0.0\n0.5,10.0\n").unwrap();
        let f = read_curve_csv(&path).unwrap();
        assert_eq!(f.x_unit, LengthUnit::Angstrom);
        assert_eq!(f.value_unit, ValueUnit::Wavenumber);
        assert_eq!(f.values, vec![0.0, 10.0]);
        std::fs::write(&path, "r_bohr,dipole_debye\n0.0,1.0\n").unwrap();
        assert_eq!(read_curve_csv(&path).unwrap().value_unit, ValueUnit::Debye);
        std::fs::write(&path, "r,energy\n0.0,1.0\n").unwrap();
        assert!(read_curve_csv(&path).is_err());
    }
}
