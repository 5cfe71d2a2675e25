//! Quasi-energies: closed form at zero field, truncated Floquet matrices with
//! a static field, plus branch tracking along sweeps and avoided-crossing
//! extraction.
//!
//! Every point routine returns three [`QuasiState`]s in [`Level::ALL`] order.
//! The reported (unfolded) quasi-energy of a branch is the representative
//! whose mean Floquet index `⟨n⟩ + ⟨S_z⟩` lies in `[-1/2, 1/2)`; at zero field
//! this is exactly the eigenvalue of the interaction-frame Hamiltonian, so the
//! three branches leave `{D, 0, D}` with slopes `∓ω·cosθ` and `0`.

mod crossing;
mod matrix;
mod sweep;

pub use crossing::{avoided_crossing, avoided_crossing_along, CrossingReport};
pub(crate) use crossing::crossing_search;
pub use matrix::{
    converged_harmonics, floquet_matrix, floquet_states, initial_harmonics, Truncation,
    MAX_HARMONICS,
};
pub use sweep::{quasienergies_at, quasienergy_spectrum, Branch, Engine, Harmonics, QuasiSpectrum};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{h_interaction, RotorParams};
use crate::real::Real;
use crate::spin_algebra::{hermitian_eigensystem, real_roots_trig, CubicRoots, Level, Spinor};

/// Sweep axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Omega,
    Theta,
    Delta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Omega => "omega",
            Axis::Theta => "theta",
            Axis::Delta => "delta",
        }
    }

    /// Copy of `p` with the axis coordinate replaced.
    pub fn apply<T: Real>(self, p: &RotorParams<T>, x: T) -> RotorParams<T> {
        match self {
            Axis::Omega => p.with_omega(x),
            Axis::Theta => p.with_theta(x),
            Axis::Delta => p.with_delta(x),
        }
    }

    pub fn read<T: Real>(self, p: &RotorParams<T>) -> T {
        match self {
            Axis::Omega => p.omega,
            Axis::Theta => p.theta,
            Axis::Delta => p.delta,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" => Ok(Axis::Omega),
            "theta" => Ok(Axis::Theta),
            "delta" => Ok(Axis::Delta),
            other => Err(Error::invalid(format!(
                "unknown axis '{other}' (expected omega, theta or delta)"
            ))),
        }
    }
}

/// One labeled Floquet state at a parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiState<T> {
    pub level: Level,
    /// Unfolded quasi-energy.
    pub quasienergy: T,
    /// Floquet mode at `t = 0`, rotating-frame basis, unit norm.
    pub mode0: Spinor<T>,
    /// Period-averaged populations in basis order `(+1, 0, -1)`.
    pub weights: [T; 3],
}

impl<T: Real> QuasiState<T> {
    /// Period-averaged `⟨S_z⟩`.
    pub fn mean_sz(&self) -> T {
        self.weights[0] - self.weights[2]
    }
}

/// Unlabeled state as produced by the individual engines.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RawState<T> {
    pub quasienergy: T,
    pub mode0: Spinor<T>,
    pub weights: [T; 3],
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Best assignment `slot -> column` maximizing `Σ score(slot, column)`, plus
/// the margin over the runner-up.
pub(crate) fn best_permutation<T: Real>(score: impl Fn(usize, usize) -> T) -> ([usize; 3], T) {
    let mut ranked: Vec<([usize; 3], T)> = PERMUTATIONS
        .iter()
        .map(|perm| {
            let s = (0..3).fold(T::zero(), |acc, slot| acc + score(slot, perm[slot]));
            (*perm, s)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores"));
    (ranked[0].0, ranked[0].1 - ranked[1].1)
}

/// Labels by adiabatic connection: the state with the largest period-averaged
/// weight on `|m⟩` is branch `m`, resolved jointly over the three states.
/// Returns the labeled states and the assignment margin (0 means ambiguous).
pub(crate) fn label_by_weight<T: Real>(raw: &[RawState<T>; 3]) -> ([QuasiState<T>; 3], T) {
    let (perm, margin) =
        best_permutation(|slot, k| raw[k].weights[Level::ALL[slot].basis_index()]);
    (relabel(raw, perm), margin)
}

pub(crate) fn relabel<T: Real>(raw: &[RawState<T>; 3], perm: [usize; 3]) -> [QuasiState<T>; 3] {
    std::array::from_fn(|slot| {
        let r = &raw[perm[slot]];
        QuasiState {
            level: Level::ALL[slot],
            quasienergy: r.quasienergy,
            mode0: r.mode0,
            weights: r.weights,
        }
    })
}

/// Populations of a spinor in basis order.
pub(crate) fn weights_of<T: Real>(v: &Spinor<T>) -> [T; 3] {
    [v[0].norm_sqr(), v[1].norm_sqr(), v[2].norm_sqr()]
}

pub(crate) fn spinor_from<T: Real>(v: &[Complex<T>]) -> Spinor<T> {
    [v[0], v[1], v[2]]
}

/// Coefficients `(a2, a1, a0)` of the monic characteristic cubic
/// `λ³ - 2Dλ² - (ω² - D²)λ + ω²D·sin²θ`.
pub fn zero_field_cubic<T: Real>(p: &RotorParams<T>) -> (T, T, T) {
    let w2 = p.omega * p.omega;
    let s = p.theta.sin();
    (
        -T::lit(2.0) * p.d,
        -(w2 - p.d * p.d),
        w2 * p.d * s * s,
    )
}

/// The three zero-field quasi-energies (roots of the cubic) with the
/// eigenvectors of the interaction-frame Hamiltonian as `t = 0` modes.
pub fn quasienergies_zero_field<T: Real>(p: &RotorParams<T>) -> Result<[QuasiState<T>; 3]> {
    Ok(label_by_weight(&raw_zero_field(p)?).0)
}

pub(crate) fn raw_zero_field<T: Real>(p: &RotorParams<T>) -> Result<[RawState<T>; 3]> {
    let h = h_interaction(p)?;
    let sys = hermitian_eigensystem(&h)?;
    let (a2, a1, a0) = zero_field_cubic(p);
    let roots = match real_roots_trig(a2, a1, a0) {
        CubicRoots::Distinct(r) => r,
        CubicRoots::NearDegenerate => [sys.values[0], sys.values[1], sys.values[2]],
    };
    Ok(std::array::from_fn(|k| {
        let v = spinor_from(&sys.vector(k));
        RawState {
            quasienergy: roots[k],
            mode0: v,
            weights: weights_of(&v),
        }
    }))
}

/// Reduces `x` into `[-|ω|/2, |ω|/2)`.
pub fn fold<T: Real>(x: T, omega: T) -> T {
    let w = omega.abs();
    if w == T::zero() {
        return x;
    }
    let y = x - w * (x / w + T::lit(0.5)).floor();
    if y >= w / T::lit(2.0) {
        y - w
    } else {
        y
    }
}

/// Distance between two quasi-energies modulo `|ω|`.
pub fn folded_distance<T: Real>(a: T, b: T, omega: T) -> T {
    fold(a - b, omega).abs()
}
