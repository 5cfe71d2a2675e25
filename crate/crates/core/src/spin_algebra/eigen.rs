//! Hermitian eigensolvers: cyclic complex Jacobi for any dimension and a
//! closed-form path for 3×3 matrices.

use num_complex::Complex;

use super::cubic::{real_roots_trig, CubicRoots};
use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::real::Real;

pub const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix.
///
/// `values` ascend; column `k` of `vectors` is the unit eigenvector for
/// `values[k]`, with its largest-modulus component made real and positive.
#[derive(Clone, Debug)]
pub struct EigenSystem<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> EigenSystem<T> {
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.vectors.column(k)
    }

    /// Largest `|A·v - λ·v|` entry over all pairs.
    pub fn max_residual(&self, a: &CMatrix<T>) -> T {
        let mut worst = T::zero();
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vector(k);
            let av = a.mul_vec(&v);
            for (x, y) in av.iter().zip(&v) {
                worst = worst.max((*x - *y * lam).norm());
            }
        }
        worst
    }
}

/// Diagonalizes a Hermitian matrix by cyclic Jacobi sweeps with complex
/// rotations. Stops once the off-diagonal Frobenius norm drops below
/// `1e-13·‖A‖_F`.
pub fn hermitian_eigensystem<T: Real>(a: &CMatrix<T>) -> Result<EigenSystem<T>> {
    let n = a.dim();
    if !a.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if !a.is_hermitian() {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (defect {:.3e})",
            a.hermiticity_defect().to_f64_lossy()
        )));
    }

    let mut w = a.clone();
    // Symmetrize exactly so rounding in the input cannot bias the rotations.
    for i in 0..n {
        w[(i, i)] = Complex::new(w[(i, i)].re, T::zero());
        for j in (i + 1)..n {
            let avg = (w[(i, j)] + w[(j, i)].conj()).scale(T::lit(0.5));
            w[(i, j)] = avg;
            w[(j, i)] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let norm = a.frobenius_norm();
    let threshold = T::tol(1e-13) * norm;
    let skip = norm * T::epsilon() * T::lit(1e-3);

    let mut converged = n == 1 || norm == T::zero();
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        if off_diagonal_norm(&w) <= threshold {
            converged = true;
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q, skip);
            }
        }
    }
    if !converged && off_diagonal_norm(&w) <= threshold {
        converged = true;
    }
    if !converged {
        return Err(Error::numeric(
            format!("Jacobi did not converge after {MAX_SWEEPS} sweeps"),
            (off_diagonal_norm(&w) / norm.max(T::min_positive_value())).to_f64_lossy(),
        ));
    }

    let values: Vec<T> = (0..n).map(|i| w[(i, i)].re).collect();
    let sys = finish(values, &v);
    let residual = sys.max_residual(a);
    let bound = T::tol(1e-9) * T::one().max(a.max_abs());
    if residual > bound {
        return Err(Error::numeric("eigenpair residual above bound", residual.to_f64_lossy()));
    }
    Ok(sys)
}

fn off_diagonal_norm<T: Real>(w: &CMatrix<T>) -> T {
    let n = w.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += w[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Zeroes `w[p][q]` with `G = diag(1, e^{-iφ})·R(θ)` acting on the `(p, q)`
/// plane, `w ← G†·w·G`, `v ← v·G`.
fn rotate<T: Real>(w: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize, skip: T) {
    let n = w.dim();
    let apq = w[(p, q)];
    let b = apq.norm();
    if b <= skip {
        return;
    }
    let ph = apq.unscale(b);
    let phc = ph.conj();
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let tau = (aqq - app) / (T::lit(2.0) * b);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    let gqp = phc.scale(-s);
    let gqq = phc.scale(c);
    {
        let d = w.data_mut();
        for k in 0..n {
            let akp = d[k * n + p];
            let akq = d[k * n + q];
            d[k * n + p] = akp.scale(c) + akq * gqp;
            d[k * n + q] = akp.scale(s) + akq * gqq;
        }
        let hp = ph.scale(-s);
        let hq = ph.scale(c);
        for k in 0..n {
            let apk = d[p * n + k];
            let aqk = d[q * n + k];
            d[p * n + k] = apk.scale(c) + aqk * hp;
            d[q * n + k] = apk.scale(s) + aqk * hq;
        }
        let zero = Complex::new(T::zero(), T::zero());
        d[p * n + q] = zero;
        d[q * n + p] = zero;
        d[p * n + p] = Complex::new(app - t * b, T::zero());
        d[q * n + q] = Complex::new(aqq + t * b, T::zero());
    }
    let d = v.data_mut();
    for k in 0..n {
        let vkp = d[k * n + p];
        let vkq = d[k * n + q];
        d[k * n + p] = vkp.scale(c) + vkq * gqp;
        d[k * n + q] = vkp.scale(s) + vkq * gqq;
    }
}

/// Sorts pairs ascending and fixes eigenvector phases.
fn finish<T: Real>(values: Vec<T>, v: &CMatrix<T>) -> EigenSystem<T> {
    let n = values.len();
    let cols: Vec<Vec<Complex<T>>> = (0..n).map(|k| normalize_phase(v.column(k))).collect();
    let first_mag = |c: &Vec<Complex<T>>| {
        c.iter()
            .map(|z| z.norm())
            .find(|&m| m > T::tol(1e-12))
            .unwrap_or(T::zero())
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[i]
            .partial_cmp(&values[j])
            .expect("finite eigenvalues")
            .then_with(|| {
                first_mag(&cols[j])
                    .partial_cmp(&first_mag(&cols[i]))
                    .expect("finite components")
            })
    });
    let sorted: Vec<T> = order.iter().map(|&i| values[i]).collect();
    let vectors = CMatrix::from_fn(n, |r, k| cols[order[k]][r]);
    EigenSystem {
        values: sorted,
        vectors,
    }
}

fn normalize_phase<T: Real>(mut col: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let big = col.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    if big == T::zero() {
        return col;
    }
    let lead = col
        .iter()
        .find(|z| z.norm() >= big * (T::one() - T::tol(1e-9)))
        .copied()
        .expect("max element present");
    let rot = lead.conj().unscale(lead.norm());
    let nrm = col.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
    for z in col.iter_mut() {
        *z = (*z * rot).unscale(nrm);
    }
    col
}

/// Eigenvalues of a 3×3 Hermitian matrix from its characteristic cubic.
/// Falls back to Jacobi when the cubic is near-degenerate.
pub fn eigenvalues_3x3_analytic<T: Real>(a: &CMatrix<T>) -> Result<[T; 3]> {
    if a.dim() != 3 {
        return Err(Error::invalid("analytic path requires a 3x3 matrix"));
    }
    if !a.is_hermitian() {
        return Err(Error::invalid("matrix is not Hermitian"));
    }
    let d0 = a[(0, 0)].re;
    let d1 = a[(1, 1)].re;
    let d2 = a[(2, 2)].re;
    let a01 = a[(0, 1)];
    let a02 = a[(0, 2)];
    let a12 = a[(1, 2)];
    let tr = d0 + d1 + d2;
    let minors = d0 * d1 + d0 * d2 + d1 * d2 - a01.norm_sqr() - a02.norm_sqr() - a12.norm_sqr();
    // det of a Hermitian 3x3
    let det = d0 * d1 * d2 + T::lit(2.0) * (a01 * a12 * a02.conj()).re
        - d0 * a12.norm_sqr()
        - d1 * a02.norm_sqr()
        - d2 * a01.norm_sqr();
    match real_roots_trig(-tr, minors, -det) {
        CubicRoots::Distinct(r) => Ok(r),
        CubicRoots::NearDegenerate => {
            let sys = hermitian_eigensystem(a)?;
            Ok([sys.values[0], sys.values[1], sys.values[2]])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::spin::spin1_exp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(rng.gen_range(-2.0..2.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn diagonal_input() {
        let a = CMatrix::<f64>::from_real_diag(&[3.0, 1.0, 2.0]);
        let sys = hermitian_eigensystem(&a).unwrap();
        assert_eq!(sys.values, vec![1.0, 2.0, 3.0]);
        let expect_cols = [1usize, 2, 0];
        for (k, &row) in expect_cols.iter().enumerate() {
            assert_eq!(sys.vectors[(row, k)], Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn random_residuals_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 5, 12, 40] {
            let a = random_hermitian(&mut rng, n);
            let sys = hermitian_eigensystem(&a).unwrap();
            assert!(sys.max_residual(&a) <= 1e-9 * a.max_abs().max(1.0));
            let g = &sys.vectors.adjoint() * &sys.vectors;
            assert!(g.max_abs_diff(&CMatrix::identity(n)) <= 1e-10);
            assert!(sys.values.windows(2).all(|w| w[0] <= w[1]));
            let tr: f64 = sys.values.iter().sum();
            assert!((tr - a.trace().re).abs() <= 1e-10 * a.frobenius_norm());
        }
    }

    #[test]
    fn spectrum_invariant_under_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 3);
            let n = {
                let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.5];
                let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / l, v[1] / l, v[2] / l]
            };
            let u = &spin1_exp(n, rng.gen_range(-3.0..3.0)).unwrap()
                * &spin1_exp([0.0, 0.0, 1.0], rng.gen_range(-3.0..3.0)).unwrap();
            let b = &(&u * &a) * &u.adjoint();
            let ea = hermitian_eigensystem(&a).unwrap().values;
            let eb = hermitian_eigensystem(&b).unwrap().values;
            for (x, y) in ea.iter().zip(&eb) {
                assert!((x - y).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn analytic_matches_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = random_hermitian(&mut rng, 3);
            let an = eigenvalues_3x3_analytic(&a).unwrap();
            let jv = hermitian_eigensystem(&a).unwrap().values;
            for (x, y) in an.iter().zip(&jv) {
                assert!((x - y).abs() <= 1e-11, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = CMatrix::<f64>::identity(3);
        a[(0, 2)] = Complex::new(1.0, 0.0);
        assert!(matches!(hermitian_eigensystem(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(&mut rng, 6);
        let af = CMatrix::<f32>::from_fn(6, |i, j| {
            Complex::new(a[(i, j)].re as f32, a[(i, j)].im as f32)
        });
        let s64 = hermitian_eigensystem(&a).unwrap().values;
        let s32 = hermitian_eigensystem(&af).unwrap().values;
        for (x, y) in s64.iter().zip(&s32) {
            assert!((x - *y as f64).abs() < 1e-4);
        }
    }
}
