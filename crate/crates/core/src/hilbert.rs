//! Truncated spin ⊗ Fock state engine.
//!
//! A [`SpinBosonState`] holds the amplitudes of the atomic qubit {↑, ↓}
//! tensored with the first `N` Fock levels of one motional mode. Every
//! operation returns a new state; nothing is mutated in place.
//!
//! Displacements are exact exponentials of the truncated generator
//! `α a† − α* a`. The generator is unitarily equivalent to `|α| (a + a†)`
//! through a diagonal phase, so one real symmetric eigendecomposition per
//! cutoff (held by [`FockSpace`]) serves every amplitude.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Norm tolerance every operation must respect.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Default bound on the population allowed in the top 10% of Fock levels.
pub const DEFAULT_LEAKAGE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Readout basis. `Y` is realised as a fixed `R_x(−π/2)` followed by a
/// z readout, so that a positive geometric angle raises P(↓).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Z,
    Y,
}

/// Sign selector for spin-conditional displacements. `Plus` applies
/// `D(+α)` to the σ_x = +1 component and `D(−α)` to σ_x = −1; `Minus`
/// swaps them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionalSign {
    Plus,
    Minus,
}

/// A finite complex amplitude (coherent-state label or displacement).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexAmplitude(C64);

impl ComplexAmplitude {
    pub const ZERO: ComplexAmplitude = ComplexAmplitude(C64 { re: 0.0, im: 0.0 });

    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::try_from(C64::new(re, im))
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        Self::try_from(C64::from_polar(magnitude, phase))
    }

    pub fn value(self) -> C64 {
        self.0
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }
}

impl TryFrom<C64> for ComplexAmplitude {
    type Error = Error;

    fn try_from(z: C64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(ComplexAmplitude(z))
        } else {
            Err(Error::InvalidAmplitude(format!("{z}")))
        }
    }
}

/// Safe-cutoff rule for coherent amplitudes up to `alpha_max`:
/// `ceil(|α|² + 8|α| + 8)`.
pub fn auto_cutoff(alpha_max: f64) -> usize {
    let a = alpha_max.abs();
    (a * a + 8.0 * a + 8.0).ceil() as usize
}

/// A truncated Fock space of dimension `N` with the eigendecomposition of
/// the quadrature `a + a†` cached.
#[derive(Clone, Debug)]
pub struct FockSpace {
    cutoff: usize,
    leakage_tolerance: f64,
    quad_vectors: DMatrix<f64>,
    quad_values: DVector<f64>,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Self {
        Self::with_tolerance(cutoff, DEFAULT_LEAKAGE_TOLERANCE)
    }

    pub fn with_tolerance(cutoff: usize, leakage_tolerance: f64) -> Self {
        assert!(cutoff >= 2, "Fock cutoff must be at least 2");
        let mut quad = DMatrix::<f64>::zeros(cutoff, cutoff);
        for n in 0..cutoff - 1 {
            let s = ((n + 1) as f64).sqrt();
            quad[(n, n + 1)] = s;
            quad[(n + 1, n)] = s;
        }
        let eig = SymmetricEigen::new(quad);
        FockSpace {
            cutoff,
            leakage_tolerance,
            quad_vectors: eig.eigenvectors,
            quad_values: eig.eigenvalues,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn leakage_tolerance(&self) -> f64 {
        self.leakage_tolerance
    }

    /// Applies `D(amp)` to a single motional vector.
    pub fn displace_vector(&self, psi: &DVector<C64>, amp: C64) -> DVector<C64> {
        let r = amp.norm();
        if r == 0.0 {
            return psi.clone();
        }
        // D(α) = P W exp(−i|α|Λ) Wᵀ P†, P = diag(exp(i n (arg α + π/2)))
        let theta = amp.arg() + FRAC_PI_2;
        let phase = |n: usize| C64::from_polar(1.0, theta * n as f64);
        let rotated = DVector::from_fn(self.cutoff, |n, _| phase(n).conj() * psi[n]);
        let mut coeffs = real_transpose_mul(&self.quad_vectors, &rotated);
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -r * self.quad_values[k]);
        }
        let back = real_mul(&self.quad_vectors, &coeffs);
        DVector::from_fn(self.cutoff, |n, _| phase(n) * back[n])
    }

    /// Dense matrix of `D(amp)` in this truncated space.
    pub fn displacement_matrix(&self, amp: C64) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(self.cutoff, self.cutoff);
        for j in 0..self.cutoff {
            let mut e = DVector::<C64>::zeros(self.cutoff);
            e[j] = C64::new(1.0, 0.0);
            out.set_column(j, &self.displace_vector(&e, amp));
        }
        out
    }
}

fn real_transpose_mul(w: &DMatrix<f64>, v: &DVector<C64>) -> DVector<C64> {
    let n = w.nrows();
    DVector::from_fn(n, |k, _| {
        let col = w.column(k);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            acc += v[i] * col[i];
        }
        acc
    })
}

fn real_mul(w: &DMatrix<f64>, v: &DVector<C64>) -> DVector<C64> {
    let n = w.nrows();
    let mut out = DVector::<C64>::zeros(n);
    for k in 0..n {
        let vk = v[k];
        if vk == C64::new(0.0, 0.0) {
            continue;
        }
        let col = w.column(k);
        for i in 0..n {
            out[i] += vk * col[i];
        }
    }
    out
}

/// Spin ⊗ Fock amplitudes, indexed by (spin, n).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinBosonState {
    up: DVector<C64>,
    down: DVector<C64>,
}

impl SpinBosonState {
    /// |↑⟩ ⊗ |0⟩.
    pub fn ground(cutoff: usize) -> Self {
        let mut up = DVector::zeros(cutoff);
        up[0] = C64::new(1.0, 0.0);
        SpinBosonState {
            up,
            down: DVector::zeros(cutoff),
        }
    }

    /// (c_↑ |↑⟩ + c_↓ |↓⟩) ⊗ |motion⟩, normalized.
    pub fn product(spin_up: C64, spin_down: C64, motion: &DVector<C64>) -> Self {
        Self::from_components(motion * spin_up, motion * spin_down).normalized()
    }

    pub fn from_components(up: DVector<C64>, down: DVector<C64>) -> Self {
        assert_eq!(up.len(), down.len(), "spin components must share a cutoff");
        SpinBosonState { up, down }
    }

    pub fn cutoff(&self) -> usize {
        self.up.len()
    }

    pub fn component(&self, spin: Spin) -> &DVector<C64> {
        match spin {
            Spin::Up => &self.up,
            Spin::Down => &self.down,
        }
    }

    pub fn amplitude(&self, spin: Spin, n: usize) -> C64 {
        self.component(spin)[n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_squared() + self.down.norm_squared()
    }

    pub fn normalized(self) -> Self {
        let norm = self.norm_sqr().sqrt();
        SpinBosonState {
            up: self.up / C64::new(norm, 0.0),
            down: self.down / C64::new(norm, 0.0),
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &SpinBosonState) -> C64 {
        self.up.dotc(&other.up) + self.down.dotc(&other.down)
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn fidelity(&self, other: &SpinBosonState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn population(&self, spin: Spin) -> f64 {
        self.component(spin).norm_squared()
    }

    /// Population in the top 10% of Fock levels (at least one level).
    pub fn leakage(&self) -> f64 {
        let n = self.cutoff();
        let band = n.div_ceil(10).max(1);
        (n - band..n)
            .map(|k| self.up[k].norm_sqr() + self.down[k].norm_sqr())
            .sum()
    }

    pub fn mean_occupation(&self) -> f64 {
        (0..self.cutoff())
            .map(|k| k as f64 * (self.up[k].norm_sqr() + self.down[k].norm_sqr()))
            .sum()
    }

    /// ⟨a⟩ traced over the spin.
    pub fn mean_annihilation(&self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..self.cutoff() {
            let s = (k as f64).sqrt();
            acc += (self.up[k - 1].conj() * self.up[k] + self.down[k - 1].conj() * self.down[k]) * s;
        }
        acc
    }

    fn check_leakage(self, space: &FockSpace) -> Result<Self> {
        let leakage = self.leakage();
        if leakage > space.leakage_tolerance() {
            return Err(Error::Truncation {
                leakage,
                cutoff: space.cutoff(),
                tolerance: space.leakage_tolerance(),
            });
        }
        Ok(self)
    }
}

/// Coherent state |amp⟩ as a motional vector of length `cutoff`.
pub fn coherent_state(amp: ComplexAmplitude, cutoff: usize) -> Result<DVector<C64>> {
    let a = amp.value();
    let required = auto_cutoff(a.norm());
    if cutoff < required {
        return Err(Error::CutoffTooSmall { required, cutoff });
    }
    let mut c = DVector::<C64>::zeros(cutoff);
    c[0] = C64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..cutoff {
        c[n] = c[n - 1] * a / (n as f64).sqrt();
    }
    Ok(c)
}

/// Applies `D(amp)` to the motion, or, with a sign selector, the
/// σ_x-conditioned pair `D(±amp)`.
pub fn displacement(
    space: &FockSpace,
    state: &SpinBosonState,
    amp: ComplexAmplitude,
    conditional: Option<ConditionalSign>,
) -> Result<SpinBosonState> {
    assert_eq!(space.cutoff(), state.cutoff(), "state and space cutoffs differ");
    let a = amp.value();
    let out = match conditional {
        None => SpinBosonState {
            up: space.displace_vector(&state.up, a),
            down: space.displace_vector(&state.down, a),
        },
        Some(sign) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let plus = (&state.up + &state.down) * C64::new(s, 0.0);
            let minus = (&state.up - &state.down) * C64::new(s, 0.0);
            let a_plus = match sign {
                ConditionalSign::Plus => a,
                ConditionalSign::Minus => -a,
            };
            let plus = space.displace_vector(&plus, a_plus);
            let minus = space.displace_vector(&minus, -a_plus);
            SpinBosonState {
                up: (&plus + &minus) * C64::new(s, 0.0),
                down: (&plus - &minus) * C64::new(s, 0.0),
            }
        }
    };
    debug_assert!((out.norm_sqr() - state.norm_sqr()).abs() < NORM_TOLERANCE);
    out.check_leakage(space)
}

/// Free harmonic evolution `exp(−i ω t n̂)` of the motion (zero-point
/// energy dropped).
pub fn free_evolution(state: &SpinBosonState, omega: f64, t: f64) -> SpinBosonState {
    let phase = |n: usize| C64::from_polar(1.0, -omega * t * n as f64);
    SpinBosonState {
        up: DVector::from_fn(state.cutoff(), |n, _| phase(n) * state.up[n]),
        down: DVector::from_fn(state.cutoff(), |n, _| phase(n) * state.down[n]),
    }
}

/// 2×2 matrix `exp(−i θ σ_axis / 2)` in the (↑, ↓) basis.
pub fn rotation_matrix(axis: Axis, angle: f64) -> [[C64; 2]; 2] {
    let c = C64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    match axis {
        Axis::X => [[c, C64::new(0.0, -s)], [C64::new(0.0, -s), c]],
        Axis::Y => [[c, C64::new(-s, 0.0)], [C64::new(s, 0.0), c]],
        Axis::Z => [
            [C64::from_polar(1.0, -angle / 2.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::from_polar(1.0, angle / 2.0)],
        ],
    }
}

/// Rotates the qubit; identity on the motion.
pub fn qubit_rotation(state: &SpinBosonState, axis: Axis, angle: f64) -> SpinBosonState {
    let m = rotation_matrix(axis, angle);
    SpinBosonState {
        up: &state.up * m[0][0] + &state.down * m[0][1],
        down: &state.up * m[1][0] + &state.down * m[1][1],
    }
}

/// Exact probability of reading ↓ in the given basis, motion traced out.
pub fn measure_qubit(state: &SpinBosonState, basis: Basis) -> f64 {
    match basis {
        Basis::Z => state.population(Spin::Down),
        Basis::Y => qubit_rotation(state, Axis::X, -FRAC_PI_2).population(Spin::Down),
    }
}

/// Dense annihilation operator on `cutoff` levels.
pub fn annihilation(cutoff: usize) -> DMatrix<C64> {
    let mut a = DMatrix::<C64>::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `exp(−i H t)` for a Hermitian `H`, by eigendecomposition.
pub fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> Result<DMatrix<C64>> {
    let asym = (h - h.adjoint()).camax();
    if asym > 1e-10 * h.camax().max(1.0) {
        return Err(Error::NonHermitian(asym));
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)));
    Ok(v * phases * v.adjoint())
}

/// Applies a dense operator on the full spin ⊗ Fock space, ordered
/// (↑ block, ↓ block).
pub fn apply_dense(op: &DMatrix<C64>, state: &SpinBosonState) -> SpinBosonState {
    let n = state.cutoff();
    assert_eq!(op.nrows(), 2 * n);
    let mut v = DVector::<C64>::zeros(2 * n);
    v.rows_mut(0, n).copy_from(&state.up);
    v.rows_mut(n, n).copy_from(&state.down);
    let w = op * v;
    SpinBosonState {
        up: w.rows(0, n).into_owned(),
        down: w.rows(n, n).into_owned(),
    }
}
