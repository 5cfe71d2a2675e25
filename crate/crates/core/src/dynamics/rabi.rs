//! Oscillation frequency extraction from population traces.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::EvolutionTrace;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::spin_algebra::Level;

/// Contrast below which a trace counts as flat.
pub const CONTRAST_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RabiFit<T> {
    /// Angular frequency of the target population.
    pub frequency: T,
    /// `max - min` of the target population.
    pub contrast: T,
}

/// Best single-frequency least-squares model `a + b·cos νt + c·sin νt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelFit<T> {
    pub frequency: T,
    pub offset: T,
    pub cos_amp: T,
    pub sin_amp: T,
    pub rms_residual: T,
}

/// Dominant oscillation of `P_target` with `pair = (source, target)`.
///
/// Windowed, zero-padded FFT peak with quadratic interpolation, refined on
/// the continuous spectrum by golden section and finally by least squares on
/// a single sinusoid (removes the window bias when only a couple of periods
/// are recorded).
pub fn rabi_fit<T: Real>(trace: &EvolutionTrace<T>, pair: (Level, Level)) -> Result<RabiFit<T>> {
    let (times, x) = uniform_series(trace, pair.1)?;
    let contrast = contrast_of(&x);
    if contrast < T::lit(CONTRAST_FLOOR) {
        return Err(Error::FlatTrace {
            contrast: contrast.to_f64_lossy(),
            floor: CONTRAST_FLOOR,
        });
    }
    let dt = times[1] - times[0];
    let duration = dt * T::lit((x.len() - 1) as f64);
    let nu0 = spectral_peak(&x, dt)?;
    let lo = nu0 * T::lit(0.97);
    let hi = nu0 * T::lit(1.03);
    let nu = golden_min(lo, hi, T::tol(1e-12) * nu0, |nu| sinusoid_rms(&times, &x, nu));
    if nu * duration < T::TAU() * T::lit(1.9) {
        return Err(Error::invalid(format!(
            "trace spans {:.2} periods of the fitted oscillation; at least two are needed",
            (nu * duration / T::TAU()).to_f64_lossy()
        )));
    }
    Ok(RabiFit {
        frequency: nu,
        contrast,
    })
}

/// Least-squares single-sinusoid fit of one level's population, frequency
/// optimized within ±20% of the [`rabi_fit`] estimate.
pub fn two_level_fit<T: Real>(trace: &EvolutionTrace<T>, level: Level) -> Result<TwoLevelFit<T>> {
    let est = rabi_fit(trace, (Level::Zero, level))?;
    let (times, x) = uniform_series(trace, level)?;
    let nu0 = est.frequency;
    // coarse scan first: the residual is multimodal on a wide bracket
    let n = 200;
    let (lo, hi) = (nu0 * T::lit(0.8), nu0 * T::lit(1.2));
    let step = (hi - lo) / T::lit(n as f64);
    let mut best = (nu0, sinusoid_rms(&times, &x, nu0));
    for k in 0..=n {
        let nu = lo + step * T::lit(k as f64);
        let r = sinusoid_rms(&times, &x, nu);
        if r < best.1 {
            best = (nu, r);
        }
    }
    let nu = golden_min(best.0 - step, best.0 + step, T::tol(1e-12) * nu0, |nu| {
        sinusoid_rms(&times, &x, nu)
    });
    let (coef, rms) = sinusoid_lsq(&times, &x, nu);
    Ok(TwoLevelFit {
        frequency: nu,
        offset: coef[0],
        cos_amp: coef[1],
        sin_amp: coef[2],
        rms_residual: rms,
    })
}

fn contrast_of<T: Real>(x: &[T]) -> T {
    let (mn, mx) = x
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    mx - mn
}

/// Drops a trailing end-point sample that is off the uniform stride.
fn uniform_series<T: Real>(trace: &EvolutionTrace<T>, level: Level) -> Result<(Vec<T>, Vec<T>)> {
    if trace.len() < 8 {
        return Err(Error::invalid("trace too short for a frequency fit (need 8 samples)"));
    }
    let mut times = trace.times.clone();
    let mut x = trace.population(level);
    let dt = times[1] - times[0];
    let n = times.len();
    let last = times[n - 1] - times[n - 2];
    if (last - dt).abs() > T::tol(1e-9) * dt {
        times.pop();
        x.pop();
    }
    Ok((times, x))
}

fn spectral_peak<T: Real>(x: &[T], dt: T) -> Result<T> {
    let m = x.len();
    let two_pi = T::TAU();
    let win: Vec<T> = (0..m)
        .map(|k| {
            T::lit(0.5) * (T::one() - (two_pi * T::lit(k as f64) / T::lit((m - 1) as f64)).cos())
        })
        .collect();
    let wsum = win.iter().fold(T::zero(), |s, &w| s + w);
    let mean = x.iter().zip(&win).fold(T::zero(), |s, (&v, &w)| s + v * w) / wsum;
    let y: Vec<T> = x.iter().zip(&win).map(|(&v, &w)| (v - mean) * w).collect();

    let len = (m.next_power_of_two() * 8).max(64);
    let mut buf: Vec<Complex<T>> = (0..len)
        .map(|k| Complex::new(if k < m { y[k] } else { T::zero() }, T::zero()))
        .collect();
    FftPlanner::<T>::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<T> = buf.iter().map(|z| z.norm()).collect();
    // The weighted mean is removed, so DC is a dip; take the tallest local
    // maximum above it.
    let kmax = (1..len / 2 - 1)
        .filter(|&k| mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])
        .max_by(|&a, &b| mag[a].partial_cmp(&mag[b]).expect("finite spectrum"))
        .ok_or_else(|| Error::numeric("no spectral peak above DC", f64::NAN))?;
    let (a, b, c) = (mag[kmax - 1], mag[kmax], mag[kmax + 1]);
    let denom = a - T::lit(2.0) * b + c;
    let off = if denom != T::zero() {
        T::lit(0.5) * (a - c) / denom
    } else {
        T::zero()
    };
    let df = T::one() / (dt * T::lit(len as f64));
    let f_quad = (T::lit(kmax as f64) + off) * df;
    // Golden refinement of the continuous (DTFT) magnitude around it.
    let dtft = |f: T| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, &v) in y.iter().enumerate() {
            acc += Complex::from_polar(v, -two_pi * f * dt * T::lit(k as f64));
        }
        -acc.norm()
    };
    let f = golden_min(f_quad - df, f_quad + df, T::tol(1e-12) * f_quad, dtft);
    Ok(two_pi * f)
}

fn sinusoid_rms<T: Real>(times: &[T], x: &[T], nu: T) -> T {
    sinusoid_lsq(times, x, nu).1
}

/// Linear least squares for `(a, b, c)` at fixed `ν`, via normal equations.
fn sinusoid_lsq<T: Real>(times: &[T], x: &[T], nu: T) -> ([T; 3], T) {
    let mut g = [[T::zero(); 3]; 3];
    let mut r = [T::zero(); 3];
    for (&t, &v) in times.iter().zip(x) {
        let (s, c) = (nu * t).sin_cos();
        let phi = [T::one(), c, s];
        for i in 0..3 {
            r[i] += phi[i] * v;
            for j in 0..3 {
                g[i][j] += phi[i] * phi[j];
            }
        }
    }
    let coef = solve3(g, r);
    let ss = times.iter().zip(x).fold(T::zero(), |acc, (&t, &v)| {
        let (s, c) = (nu * t).sin_cos();
        let e = v - (coef[0] + coef[1] * c + coef[2] * s);
        acc + e * e
    });
    (coef, (ss / T::lit(x.len() as f64)).sqrt())
}

/// Gaussian elimination with partial pivoting on a 3×3 system.
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> [T; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite"))
            .expect("non-empty");
        a.swap(col, piv);
        b.swap(col, piv);
        if a[col][col] == T::zero() {
            continue;
        }
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for i in (0..3).rev() {
        let s = ((i + 1)..3).fold(b[i], |s, k| s - a[i][k] * x[k]);
        x[i] = if a[i][i] == T::zero() { T::zero() } else { s / a[i][i] };
    }
    x
}

/// Golden-section minimization on `[lo, hi]`.
pub(crate) fn golden_min<T: Real>(mut lo: T, mut hi: T, tol: T, f: impl Fn(T) -> T) -> T {
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}
