//! The bundled O-H-like curves through the file readers and the solver.

use std::path::PathBuf;

use catspec::config::{transition_from_dvr, DvrConfig};
use catspec::vibsolver::{anharmonic_shift_report, dvr_solve, read_curve_csv, CurveKind, LengthUnit, ValueUnit};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn config() -> DvrConfig {
    DvrConfig {
        potential_csv: Some(data("oh_like_potential.csv")),
        dipole_csv: Some(data("oh_like_dipole.csv")),
        reduced_mass_u: Some(16.0 * 1.008 / 17.008),
        grid_points: 256,
        n_levels: 4,
    }
}

#[test]
fn headers_declare_units() {
    let p = read_curve_csv(&data("oh_like_potential.csv")).unwrap();
    assert_eq!((p.x_unit, p.value_unit), (LengthUnit::Bohr, ValueUnit::Hartree));
    let d = read_curve_csv(&data("oh_like_dipole.csv")).unwrap();
    assert_eq!(d.value_unit, ValueUnit::Debye);
    assert_eq!(d.value_unit.kind(), CurveKind::Dipole);
}

#[test]
fn fundamental_is_near_the_morse_value() {
    // ωe − 2ωeχe for the underlying Morse curve; the small cubic term
    // shifts it by a few wavenumbers.
    let t = transition_from_dvr(&config()).unwrap();
    assert!((t.wavenumber - (3950.0 - 2.0 * 79.0)).abs() < 10.0, "{}", t.wavenumber);
    assert!(t.oscillator_strength > 1e-5 && t.oscillator_strength < 1e-4);
}

#[test]
fn resampling_is_converged() {
    let cfg = config();
    let coarse = transition_from_dvr(&cfg).unwrap();
    let fine = transition_from_dvr(&DvrConfig { grid_points: 511, ..cfg }).unwrap();
    assert!((coarse.wavenumber - fine.wavenumber).abs() < 1e-3);
    assert!((coarse.oscillator_strength / fine.oscillator_strength - 1.0).abs() < 1e-4);
}

#[test]
fn anharmonic_shift_is_negative() {
    let cfg = config();
    let curve = catspec::config::load_curve(cfg.potential_csv.as_ref().unwrap(), 16.0 * 1.008 / 17.008, 256).unwrap();
    let levels = dvr_solve(&curve, 3).unwrap();
    let r = anharmonic_shift_report(&levels).unwrap();
    assert!(r.shift < -100.0 && r.shift > -200.0, "{r:?}");
    assert!((r.minimum - 1.81).abs() < 0.05);
}
