//! Ensemble means against the exact orientation-averaged Markov chain.
//!
//! With a uniformly random carrier phase per pulse, coherences average out
//! between pulses and the mean populations evolve with the transfer matrix
//! T_ij = |U_ij|². The orientation average is done by Gauss-Legendre
//! quadrature over cos θ.

use catspec::config::{parse_table, resolve, RunConfig, PAPER_DEFAULTS};
use catspec::molecule::{ensemble_absorption, Orientation, TrainModel, TrialOptions};

/// Gauss-Legendre nodes and weights on [−1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    return (x, 2.0 / ((1.0 - x * x) * dp * dp));
                }
            }
        })
        .collect()
}

fn transfer(model: &TrainModel, c: f64) -> [[f64; 2]; 2] {
    let u = model.propagator(c);
    [
        [u[(0, 0)].norm_sqr(), u[(0, 1)].norm_sqr()],
        [u[(1, 0)].norm_sqr(), u[(1, 1)].norm_sqr()],
    ]
}

fn step(t: &[[f64; 2]; 2], p: [f64; 2]) -> [f64; 2] {
    [t[0][0] * p[0] + t[0][1] * p[1], t[1][0] * p[0] + t[1][1] * p[1]]
}

fn paper_with(center: f64, n_pulse: usize) -> catspec::config::Resolved {
    let mut table = parse_table(PAPER_DEFAULTS, "paper").unwrap();
    let laser = table["laser"].as_table_mut().unwrap();
    laser.insert("nu_center_cm".into(), center.into());
    laser.insert("n_pulse".into(), (n_pulse as i64).into());
    resolve(&RunConfig::from_table(table).unwrap()).unwrap()
}

fn exact_per_trial(model: &TrainModel, n: usize) -> Vec<f64> {
    let mut mean = vec![0.0; n + 1];
    for (c, w) in gauss_legendre(48) {
        let t = transfer(model, c);
        let mut p = [1.0, 0.0];
        for m in mean.iter_mut().skip(1) {
            p = step(&t, p);
            *m += 0.5 * w * p[1];
        }
    }
    mean
}

fn exact_per_pulse(model: &TrainModel, n: usize) -> Vec<f64> {
    let mut avg = [[0.0; 2]; 2];
    for (c, w) in gauss_legendre(48) {
        let t = transfer(model, c);
        for i in 0..2 {
            for j in 0..2 {
                avg[i][j] += 0.5 * w * t[i][j];
            }
        }
    }
    let mut p = [1.0, 0.0];
    let mut mean = vec![0.0];
    for _ in 0..n {
        p = step(&avg, p);
        mean.push(p[1]);
    }
    mean
}

fn check(orientation: Orientation, exact: fn(&TrainModel, usize) -> Vec<f64>) {
    for center in [3703.3, 3783.0, 3900.0] {
        let r = paper_with(center, 34);
        let options = TrialOptions { orientation, ..r.trial_options };
        let model = TrainModel::new(&r.laser, &r.transition, options).unwrap();
        let oracle = exact(&model, 34);
        let e = ensemble_absorption(&r.laser, &r.transition, 4000, 3, options).unwrap();
        for n in [1, 5, 17, 34] {
            let z = (e.mean[n] - oracle[n]) / e.stderr[n].max(1e-12);
            assert!(z.abs() < 4.5, "{orientation:?} ν = {center}, n = {n}: {} vs {} (z = {z:.2})", e.mean[n], oracle[n]);
        }
    }
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let q = gauss_legendre(48);
    let sum: f64 = q.iter().map(|(_, w)| w).sum();
    assert!((sum - 2.0).abs() < 1e-13);
    let x8: f64 = q.iter().map(|(x, w)| w * x.powi(8)).sum();
    assert!((x8 - 2.0 / 9.0).abs() < 1e-13);
}

#[test]
fn per_trial_orientation_matches_markov_chain() {
    check(Orientation::PerTrial, exact_per_trial);
}

#[test]
fn per_pulse_orientation_matches_markov_chain() {
    check(Orientation::PerPulse, exact_per_pulse);
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let r = paper_with(3783.0, 34);
    let se = |n| {
        ensemble_absorption(&r.laser, &r.transition, n, 11, r.trial_options)
            .unwrap()
            .final_stderr()
    };
    let ratio = se(500) / se(4500);
    assert!((ratio / 3.0 - 1.0).abs() < 0.2, "{ratio}");
}
