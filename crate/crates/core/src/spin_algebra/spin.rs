use std::fmt;

use num_complex::Complex;

use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::real::Real;

/// Spin-1 magnetic sublevel. The basis order is fixed to `(+1, 0, -1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    MinusOne,
    Zero,
    PlusOne,
}

impl Level {
    /// Report order used by branch-indexed arrays: `m-1, m0, m+1`.
    pub const ALL: [Level; 3] = [Level::MinusOne, Level::Zero, Level::PlusOne];

    /// Magnetic quantum number.
    pub fn m(self) -> i32 {
        match self {
            Level::MinusOne => -1,
            Level::Zero => 0,
            Level::PlusOne => 1,
        }
    }

    /// Row/column in the `(+1, 0, -1)` basis.
    pub fn basis_index(self) -> usize {
        match self {
            Level::PlusOne => 0,
            Level::Zero => 1,
            Level::MinusOne => 2,
        }
    }

    /// Position in [`Level::ALL`].
    pub fn slot(self) -> usize {
        match self {
            Level::MinusOne => 0,
            Level::Zero => 1,
            Level::PlusOne => 2,
        }
    }

    pub fn from_basis_index(i: usize) -> Level {
        match i {
            0 => Level::PlusOne,
            1 => Level::Zero,
            2 => Level::MinusOne,
            _ => panic!("spin-1 basis index out of range: {i}"),
        }
    }

    pub fn from_m(m: i32) -> Option<Level> {
        match m {
            -1 => Some(Level::MinusOne),
            0 => Some(Level::Zero),
            1 => Some(Level::PlusOne),
            _ => None,
        }
    }

    /// Short tag used in column names: `m1`, `0`, `p1`.
    pub fn tag(self) -> &'static str {
        match self {
            Level::MinusOne => "m1",
            Level::Zero => "0",
            Level::PlusOne => "p1",
        }
    }

    /// `m+1 <-> m-1`.
    pub fn mirrored(self) -> Level {
        match self {
            Level::MinusOne => Level::PlusOne,
            Level::Zero => Level::Zero,
            Level::PlusOne => Level::MinusOne,
        }
    }

    /// Basis vector `|m⟩`.
    pub fn ket<T: Real>(self) -> [Complex<T>; 3] {
        let mut v = [Complex::new(T::zero(), T::zero()); 3];
        v[self.basis_index()] = Complex::new(T::one(), T::zero());
        v
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::MinusOne => write!(f, "m-1"),
            Level::Zero => write!(f, "m0"),
            Level::PlusOne => write!(f, "m+1"),
        }
    }
}

/// Spin-1 operators in the `(+1, 0, -1)` basis.
#[derive(Clone, Debug)]
pub struct SpinOperatorSet<T> {
    pub sx: CMatrix<T>,
    pub sy: CMatrix<T>,
    pub sz: CMatrix<T>,
    pub s_plus: CMatrix<T>,
    pub s_minus: CMatrix<T>,
}

impl<T: Real> SpinOperatorSet<T> {
    pub const BASIS_ORDER: &'static str = "(+1, 0, -1)";

    /// `n·S` for a real 3-vector `n`.
    pub fn dot(&self, n: [T; 3]) -> CMatrix<T> {
        let a = self.sx.scale_real(n[0]);
        let b = self.sy.scale_real(n[1]);
        let c = self.sz.scale_real(n[2]);
        &(&a + &b) + &c
    }

    pub fn sz_squared(&self) -> CMatrix<T> {
        &self.sz * &self.sz
    }
}

pub fn make_spin_operators<T: Real>() -> SpinOperatorSet<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let r2 = Complex::new(T::SQRT_2(), T::zero());
    let mut s_plus = CMatrix::zeros(3);
    // S+|0> = sqrt2 |+1>, S+|-1> = sqrt2 |0>
    s_plus[(0, 1)] = r2;
    s_plus[(1, 2)] = r2;
    let s_minus = s_plus.adjoint();
    let half = T::lit(0.5);
    let sx = (&s_plus + &s_minus).scale_real(half);
    // (S+ - S-)/(2i) = -i/2 (S+ - S-)
    let sy = (&s_plus - &s_minus).scale(Complex::new(T::zero(), -half));
    let sz = CMatrix::from_real_diag(&[T::one(), T::zero(), -T::one()]);
    debug_assert!(sx[(0, 0)] == zero);
    SpinOperatorSet {
        sx,
        sy,
        sz,
        s_plus,
        s_minus,
    }
}

/// `exp(-i·angle·n·S)` for a unit axis `n`, via
/// `I - i·A·sin(angle) + A²·(cos(angle) - 1)` with `A = n·S` (`A³ = A`).
pub fn spin1_exp<T: Real>(axis: [T; 3], angle: T) -> Result<CMatrix<T>> {
    let len = axis.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    if !len.is_finite() || (len - T::one()).abs() > T::tol(1e-12) {
        return Err(Error::invalid(format!(
            "rotation axis must be a unit vector, |n| = {len}"
        )));
    }
    let ops = make_spin_operators::<T>();
    let a = ops.dot(axis);
    let a2 = &a * &a;
    let (s, c) = angle.sin_cos();
    let id = CMatrix::identity(3);
    let lin = a.scale(Complex::new(T::zero(), -s));
    let quad = a2.scale_real(c - T::one());
    Ok(&(&id + &lin) + &quad)
}

/// `exp(-i·angle·S_z) = diag(e^{-i·angle}, 1, e^{i·angle})`.
pub fn rz<T: Real>(angle: T) -> CMatrix<T> {
    let (s, c) = angle.sin_cos();
    let mut m = CMatrix::zeros(3);
    m[(0, 0)] = Complex::new(c, -s);
    m[(1, 1)] = Complex::new(T::one(), T::zero());
    m[(2, 2)] = Complex::new(c, s);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::matrix::unitarity_defect;
    use proptest::prelude::*;

    /// Truncated power series of exp(M), used only as an oracle.
    fn exp_taylor(m: &CMatrix<f64>, terms: usize) -> CMatrix<f64> {
        let mut acc = CMatrix::identity(m.dim());
        let mut term = CMatrix::identity(m.dim());
        for k in 1..terms {
            term = (&term * m).scale_real(1.0 / k as f64);
            acc = &acc + &term;
        }
        acc
    }

    fn unit(v: [f64; 3]) -> [f64; 3] {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    }

    #[test]
    fn operator_definitions() {
        let s = make_spin_operators::<f64>();
        assert_eq!(s.sz, CMatrix::from_real_diag(&[1.0, 0.0, -1.0]));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..3 {
            assert_eq!(s.sx[(i, i)], Complex::new(0.0, 0.0));
        }
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert!((s.sx[(i, j)] - Complex::new(r, 0.0)).norm() < 1e-16);
        }
        assert_eq!(s.sx[(0, 2)], Complex::new(0.0, 0.0));
        let comm = s.sx.commutator(&s.sy);
        let isz = s.sz.scale(Complex::new(0.0, 1.0));
        assert!(comm.max_abs_diff(&isz) <= 1e-14);
        assert_eq!(s.s_minus, s.s_plus.adjoint());
        let sp = &s.sx + &s.sy.scale(Complex::new(0.0, 1.0));
        assert!(sp.max_abs_diff(&s.s_plus) < 1e-15);
    }

    #[test]
    fn exp_identities() {
        let id = CMatrix::<f64>::identity(3);
        let axis = unit([0.3, -0.2, 0.9]);
        assert!(spin1_exp(axis, 0.0).unwrap().max_abs_diff(&id) < 1e-15);
        let full = spin1_exp([0.0, 1.0, 0.0], 2.0 * std::f64::consts::PI).unwrap();
        assert!(full.max_abs_diff(&id) < 1e-14);
        let z = spin1_exp([0.0, 0.0, 1.0], 1.3).unwrap();
        assert!(unitarity_defect(&z) <= 1e-14);
        assert!(z.max_abs_diff(&rz(1.3)) <= 1e-14);
    }

    #[test]
    fn rejects_non_unit_axis() {
        assert!(matches!(
            spin1_exp([1.0, 1.0, 0.0], 0.5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn single_precision_exp() {
        let u = spin1_exp::<f32>([0.0, 0.6, 0.8], 0.7).unwrap();
        assert!(unitarity_defect(&u) < 1e-5);
    }

    proptest! {
        #[test]
        fn matches_taylor_oracle(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
                                 angle in -3.5f64..3.5) {
            prop_assume!(x * x + y * y + z * z > 1e-3);
            let n = unit([x, y, z]);
            let s = make_spin_operators::<f64>();
            let gen = s.dot(n).scale(Complex::new(0.0, -angle));
            let oracle = exp_taylor(&gen, 30);
            let closed = spin1_exp(n, angle).unwrap();
            prop_assert!(closed.max_abs_diff(&oracle) <= 1e-12);
        }

        #[test]
        fn forward_backward_is_identity(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
                                        angle in -10.0f64..10.0) {
            prop_assume!(x * x + y * y + z * z > 1e-3);
            let n = unit([x, y, z]);
            let prod = &spin1_exp(n, angle).unwrap() * &spin1_exp(n, -angle).unwrap();
            prop_assert!(prod.max_abs_diff(&CMatrix::identity(3)) <= 1e-12);
        }

        #[test]
        fn z_rotation_is_diagonal_phase(angle in -10.0f64..10.0) {
            let z = spin1_exp([0.0, 0.0, 1.0], angle).unwrap();
            let expect = CMatrix::from_fn(3, |i, j| {
                if i != j { Complex::new(0.0, 0.0) }
                else { Complex::from_polar(1.0, -angle * (1.0 - i as f64)) }
            });
            prop_assert!(z.max_abs_diff(&expect) <= 1e-14);
        }
    }
}
