//! Spin-1 operator algebra, closed-form rotations, Hermitian eigensolvers.

pub mod cubic;
pub mod eigen;
pub mod matrix;
pub mod spin;

pub use cubic::{real_roots_trig, CubicRoots};
pub use eigen::{eigenvalues_3x3_analytic, hermitian_eigensystem, EigenSystem};
pub use matrix::{inner, norm, unitarity_defect, CMatrix, Spinor};
pub use spin::{make_spin_operators, rz, spin1_exp, Level, SpinOperatorSet};

use num_complex::Complex;

use crate::real::Real;

/// `exp(-i·H·t)` for Hermitian `H`, through its eigen-decomposition.
pub fn expm_hermitian<T: Real>(h: &CMatrix<T>, t: T) -> crate::Result<CMatrix<T>> {
    let sys = hermitian_eigensystem(h)?;
    let n = h.dim();
    let phases: Vec<Complex<T>> = sys
        .values
        .iter()
        .map(|&l| Complex::from_polar(T::one(), -l * t))
        .collect();
    Ok(CMatrix::from_fn(n, |i, j| {
        (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
            acc + sys.vectors[(i, k)] * phases[k] * sys.vectors[(j, k)].conj()
        })
    }))
}
