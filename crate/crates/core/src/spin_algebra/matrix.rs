use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;

use crate::real::Real;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

/// A 3-component spin state in the `(+1, 0, -1)` basis.
pub type Spinor<T> = [Complex<T>; 3];

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// perfect square.
    pub fn from_row_major(entries: Vec<Complex<T>>) -> Self {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        assert!(dim >= 1 && dim * dim == entries.len(), "entry count must be dim^2");
        Self { dim, data: entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
    }

    /// `max |A - B|` over entries.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        m
    }

    /// Hermitian within `1e-12 * max(1, max|A|)`.
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= T::tol(1e-12) * T::one().max(self.max_abs())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// `A·ψ` for a 3×3 operator.
    pub fn apply3(&self, v: &Spinor<T>) -> Spinor<T> {
        debug_assert_eq!(self.dim, 3);
        let d = &self.data;
        [
            d[0] * v[0] + d[1] * v[1] + d[2] * v[2],
            d[3] * v[0] + d[4] * v[1] + d[5] * v[2],
            d[6] * v[0] + d[7] * v[1] + d[8] * v[2],
        ]
    }

    /// Real part of `⟨ψ|A|ψ⟩`.
    pub fn expectation3(&self, v: &Spinor<T>) -> T {
        let av = self.apply3(v);
        v.iter()
            .zip(&av)
            .fold(T::zero(), |s, (a, b)| s + (a.conj() * b).re)
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }
}

/// `max |U†U - I|`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let g = &u.adjoint() * u;
    g.max_abs_diff(&CMatrix::identity(u.dim()))
}

/// `Σ conj(a_i) b_i`.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * *b;
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Real> Neg for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn neg(self) -> CMatrix<T> {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| -*z).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitarity_defect_examples() {
        let id = CMatrix::<f64>::identity(3);
        assert_eq!(unitarity_defect(&id), 0.0);
        let two = id.scale_real(2.0);
        assert!((unitarity_defect(&two) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn hermiticity_flags() {
        let mut m = CMatrix::<f64>::identity(2);
        m[(0, 1)] = Complex::new(0.5, 0.25);
        m[(1, 0)] = Complex::new(0.5, -0.25);
        assert!(m.is_hermitian());
        m[(1, 0)] = Complex::new(0.5, 0.25);
        assert!(!m.is_hermitian());
    }

    #[test]
    #[should_panic]
    fn from_row_major_rejects_non_square() {
        let _ = CMatrix::<f64>::from_row_major(vec![Complex::new(0.0, 0.0); 5]);
    }
}
