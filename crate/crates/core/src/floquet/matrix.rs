//! Truncated Floquet matrix in the harmonic ⊗ spin basis.

use num_complex::Complex;

use super::{best_permutation, label_by_weight, QuasiState, RawState};
use crate::error::{Error, Result};
use crate::model::{drive_component, h_static, RotorParams};
use crate::real::Real;
use crate::spin_algebra::{hermitian_eigensystem, inner, CMatrix, EigenSystem};

/// Largest harmonic cutoff the dense solver is asked to handle
/// (`3·(2N+1) = 387`).
pub const MAX_HARMONICS: usize = 64;

/// Fraction of the spectrum discarded at each end before selecting states.
const EDGE_FRACTION: f64 = 0.2;

/// Floquet matrix for harmonics `n = -N..N`. Row `3·(n+N) + k` is harmonic
/// `n`, spin basis index `k`. Diagonal blocks `A + nω`, block `(n, n+1)` is
/// the `e^{-iωt}` component `B`, block `(n+1, n)` is `B†`.
pub fn floquet_matrix<T: Real>(p: &RotorParams<T>, n_harmonics: usize) -> Result<CMatrix<T>> {
    if p.omega == T::zero() {
        return Err(Error::invalid("the Floquet matrix needs omega != 0 (no drive period)"));
    }
    let on_axis = p.theta.sin().abs() < T::tol(1e-15);
    if n_harmonics == 0 && !on_axis {
        return Err(Error::invalid("n_harmonics must be at least 1 for a tilted axis"));
    }
    let a = h_static(p);
    let b = drive_component(p);
    let bd = b.adjoint();
    let blocks = 2 * n_harmonics + 1;
    let dim = 3 * blocks;
    let mut f = CMatrix::zeros(dim);
    for blk in 0..blocks {
        let n = T::lit(blk as f64 - n_harmonics as f64);
        for i in 0..3 {
            for j in 0..3 {
                f[(3 * blk + i, 3 * blk + j)] = a[(i, j)];
                if blk + 1 < blocks {
                    f[(3 * blk + i, 3 * (blk + 1) + j)] = b[(i, j)];
                    f[(3 * (blk + 1) + i, 3 * blk + j)] = bd[(i, j)];
                }
            }
            f[(3 * blk + i, 3 * blk + i)] += Complex::new(p.omega * n, T::zero());
        }
    }
    Ok(f)
}

/// `N₀ = ⌈4 + 2·max(|Δ|, D)/|ω|⌉`.
pub fn initial_harmonics<T: Real>(p: &RotorParams<T>) -> Result<usize> {
    if p.omega == T::zero() {
        return Err(Error::invalid("harmonic cutoff undefined at omega = 0"));
    }
    let n = (T::lit(4.0) + T::lit(2.0) * p.delta.abs().max(p.d) / p.omega.abs()).ceil();
    Ok(n.to_f64_lossy() as usize)
}

/// Result of the auto-truncation rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation<T> {
    /// Cutoff used for subsequent solves.
    pub n_harmonics: usize,
    /// Cutoff it was checked against.
    pub checked_against: usize,
    /// Largest quasi-energy change between the two.
    pub movement: T,
}

/// Doubles the cutoff from [`initial_harmonics`] until the three selected
/// quasi-energies move by less than `1e-9·D`. The cutoff returned is the
/// smaller member of the final pair; its error is bounded by `movement`.
pub fn converged_harmonics<T: Real>(p: &RotorParams<T>) -> Result<Truncation<T>> {
    let mut n = initial_harmonics(p)?;
    if n > MAX_HARMONICS {
        return Err(Error::Regime(format!(
            "|omega| = {} needs N = {n} > {MAX_HARMONICS} harmonics; use the monodromy path",
            p.omega
        )));
    }
    let tol = T::tol(1e-9) * p.d;
    let mut prev = raw_floquet_states(p, n)?;
    loop {
        let next_n = (2 * n).min(MAX_HARMONICS);
        if next_n == n {
            return Err(Error::numeric(
                format!("Floquet truncation did not converge by N = {MAX_HARMONICS}"),
                f64::NAN,
            ));
        }
        let next = raw_floquet_states(p, next_n)?;
        let movement = state_movement(&prev, &next, p.omega);
        if movement < tol {
            return Ok(Truncation {
                n_harmonics: n,
                checked_against: next_n,
                movement,
            });
        }
        n = next_n;
        prev = next;
    }
}

/// Largest change in quasi-energy between two solves, states matched by
/// mode overlap and compared modulo `ω`.
pub(crate) fn state_movement<T: Real>(a: &[RawState<T>; 3], b: &[RawState<T>; 3], omega: T) -> T {
    let (perm, _) = best_permutation(|i, j| inner(&a[i].mode0, &b[j].mode0).norm());
    (0..3).fold(T::zero(), |m, i| {
        m.max(super::folded_distance(a[i].quasienergy, b[perm[i]].quasienergy, omega))
    })
}

/// Labeled Floquet states from the truncated matrix.
pub fn floquet_states<T: Real>(p: &RotorParams<T>, n_harmonics: usize) -> Result<[QuasiState<T>; 3]> {
    Ok(label_by_weight(&raw_floquet_states(p, n_harmonics)?).0)
}

/// Selects the eigenvectors with mean Floquet index `J = Σ (n + m)|u_{n,m}|²`
/// in `[-1/2, 1/2)` among the interior of the spectrum.
pub(crate) fn raw_floquet_states<T: Real>(
    p: &RotorParams<T>,
    n_harmonics: usize,
) -> Result<[RawState<T>; 3]> {
    let f = floquet_matrix(p, n_harmonics)?;
    let sys = hermitian_eigensystem(&f)?;
    select_states(&sys, n_harmonics)
}

fn select_states<T: Real>(sys: &EigenSystem<T>, n_harmonics: usize) -> Result<[RawState<T>; 3]> {
    let dim = sys.values.len();
    let skip = (EDGE_FRACTION * dim as f64).floor() as usize;
    let half = T::lit(0.5);
    let mut chosen: Vec<(T, RawState<T>)> = Vec::with_capacity(3);
    for k in skip..dim - skip {
        let mut j = T::zero();
        let mut mode = [Complex::new(T::zero(), T::zero()); 3];
        let mut weights = [T::zero(); 3];
        for blk in 0..(2 * n_harmonics + 1) {
            let n = T::lit(blk as f64 - n_harmonics as f64);
            for s in 0..3 {
                let u = sys.vectors[(3 * blk + s, k)];
                let w = u.norm_sqr();
                let m = T::lit(1.0 - s as f64);
                j += (n + m) * w;
                mode[s] += u;
                weights[s] += w;
            }
        }
        if j >= -half && j < half {
            let nrm = crate::spin_algebra::norm(&mode);
            if nrm <= T::tol(1e-12) {
                continue;
            }
            for z in mode.iter_mut() {
                *z = z.unscale(nrm);
            }
            let total = weights[0] + weights[1] + weights[2];
            for w in weights.iter_mut() {
                *w /= total;
            }
            chosen.push((
                j.abs(),
                RawState {
                    quasienergy: sys.values[k],
                    mode0: mode,
                    weights,
                },
            ));
        }
    }
    if chosen.len() < 3 {
        return Err(Error::numeric(
            format!(
                "found {} Floquet states with mean index in [-1/2, 1/2) at N = {n_harmonics}; truncation too small",
                chosen.len()
            ),
            f64::NAN,
        ));
    }
    chosen.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite index"));
    Ok(std::array::from_fn(|i| chosen[i].1))
}
