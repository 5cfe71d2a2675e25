//! Resonance design and angle metrology.

use crate::error::{Error, Result};
use crate::floquet::crossing_search;
use crate::floquet::{converged_harmonics, Axis, Harmonics};
use crate::model::{check_small_angle_regime, small_angle_bound, DerivedScales, RotorParams};
use crate::real::Real;
use crate::spin_algebra::Level;

/// Resonant transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `|0⟩ ↔ |+1⟩`
    Plus,
    /// `|0⟩ ↔ |-1⟩`
    Minus,
}

impl Branch {
    pub fn pair(self) -> (Level, Level) {
        match self {
            Branch::Plus => (Level::Zero, Level::PlusOne),
            Branch::Minus => (Level::Zero, Level::MinusOne),
        }
    }

    fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" | "p1" => Ok(Branch::Plus),
            "minus" | "-" | "m1" => Ok(Branch::Minus),
            other => Err(Error::invalid(format!("unknown branch `{other}` (plus|minus)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceSolution<T> {
    /// Field `Δ` (frequency units).
    pub value: T,
    pub branch: Branch,
    /// `|gap center - ω|` of the full model at `value`.
    pub residual: T,
    /// Solution of the small-angle condition before refinement.
    pub estimate: T,
}

const POLE_GUARD: f64 = 1e-6;
const REFINE_TOL: f64 = 1e-8;
/// Coarse points for each gap-center evaluation; the window is tight.
const REFINE_COARSE: usize = 11;

/// Zero-field resonance `±D/cosθ`.
pub fn resonant_omega<T: Real>(d: T, theta: T, branch: Branch) -> Result<T> {
    if !(theta >= T::zero()) {
        return Err(Error::invalid(format!("theta must be >= 0, got {theta}")));
    }
    if theta >= T::FRAC_PI_2() - T::lit(POLE_GUARD) {
        return Err(Error::Divergence(format!(
            "resonant frequency D/cos(theta) diverges as theta -> pi/2 (theta = {theta})"
        )));
    }
    Ok(branch.sign::<T>() * d / theta.cos())
}

/// Field that puts `branch` on resonance at rotation `omega`.
///
/// Solves `D̃(Δ) ∓ Δ̃(Δ) = ±ω` on `(0, D)`, then moves `Δ` until the
/// full-model avoided crossing sits at `omega`.
pub fn resonant_field<T: Real>(d: T, theta: T, omega: T, branch: Branch) -> Result<ResonanceSolution<T>> {
    let template = RotorParams { d, omega, theta, phi0: T::zero(), delta: T::zero() }.validated()?;
    let s = branch.sign::<T>();
    if theta == T::zero() {
        // tilde corrections vanish and there is no gap to refine
        let value = s * (d - s * omega);
        if !(value > T::zero() && value < d) {
            return Err(Error::OutOfRange(format!(
                "{branch} resonance at omega = {omega} needs delta = {value}, outside (0, D)"
            )));
        }
        return Ok(ResonanceSolution { value, branch, residual: T::zero(), estimate: value });
    }
    if theta >= small_angle_bound(d, T::zero()) {
        return Err(Error::Regime(format!(
            "small-angle resonance condition needs theta < 0.2, got {theta}"
        )));
    }
    let estimate = small_angle_root(&template, branch)?;
    check_small_angle_regime(d, estimate, theta)?;

    let probe = template.with_delta(estimate);
    let harmonics = Harmonics::Fixed(converged_harmonics(&probe)?.n_harmonics);
    let half = T::lit(4.0) * probe.rabi().abs().max(T::tol(1e-3) * d);
    let detuning = |delta: T| -> Result<T> {
        let p = template.with_delta(delta);
        let r = crossing_search(&p, branch.pair(), Axis::Omega, (omega - half, omega + half), harmonics, REFINE_COARSE)?;
        Ok(r.position - omega)
    };

    let g0 = detuning(estimate)?;
    // on both branches the resonant ω falls as Δ grows
    let mut step = g0;
    if step == T::zero() {
        return Ok(ResonanceSolution { value: estimate, branch, residual: T::zero(), estimate });
    }
    let (mut a, mut fa) = (estimate, g0);
    let (mut b, mut fb) = (estimate + step, detuning(estimate + step)?);
    let mut grow = 0;
    while fa.signum() == fb.signum() {
        grow += 1;
        if grow > 20 {
            return Err(Error::numeric("full-model resonance not bracketed", fb.to_f64_lossy()));
        }
        step *= T::lit(2.0);
        (a, fa) = (b, fb);
        b += step;
        fb = detuning(b)?;
    }

    // Illinois
    let tol = T::tol(REFINE_TOL) * d;
    let mut side = 0i8;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..100 {
        if (b - a).abs() <= tol {
            break;
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = detuning(c)?;
        if fc.abs() < best.1.abs() {
            best = (c, fc);
        }
        if fc == T::zero() {
            break;
        }
        if fc.signum() == fb.signum() {
            (b, fb) = (c, fc);
            if side == -1 {
                fa /= T::lit(2.0);
            }
            side = -1;
        } else {
            (a, fa) = (b, fb);
            (b, fb) = (c, fc);
            side = 1;
        }
    }
    Ok(ResonanceSolution { value: best.0, branch, residual: best.1.abs(), estimate })
}

/// Root of the small-angle condition in `(0, D)` closest to the `θ = 0` value.
fn small_angle_root<T: Real>(template: &RotorParams<T>, branch: Branch) -> Result<T> {
    let d = template.d;
    let s = branch.sign::<T>();
    let f = |delta: T| {
        let sc = DerivedScales::of(&template.with_delta(delta));
        sc.d_tilde - s * sc.delta_tilde - s * template.omega
    };
    let m = 2000;
    let xs: Vec<T> = (0..m).map(|k| d * T::lit(k as f64) / T::lit(m as f64)).collect();
    let target = s * (d - s * template.omega);
    let mut best: Option<T> = None;
    for w in xs.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo.signum() == fhi.signum() && flo != T::zero() {
            continue;
        }
        let root = bisect(&f, lo, hi, T::tol(REFINE_TOL) * d * T::lit(1e-2));
        if best.is_none_or(|b| (root - target).abs() < (b - target).abs()) {
            best = Some(root);
        }
    }
    best.ok_or_else(|| {
        Error::OutOfRange(format!(
            "no {branch} resonance with 0 < delta < D at omega = {}, theta = {}",
            template.omega, template.theta
        ))
    })
}

fn bisect<T: Real>(f: &impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> T {
    let mut flo = f(lo);
    if flo == T::zero() {
        return lo;
    }
    while hi - lo > tol {
        let mid = T::lit(0.5) * (lo + hi);
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            (lo, flo) = (mid, fm);
        } else {
            hi = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}

/// `δθ = δΩ / (√2·|ω|·|cosθ|)`.
pub fn angle_uncertainty<T: Real>(omega: T, theta: T, delta_rabi: T) -> Result<T> {
    if omega == T::zero() || !omega.is_finite() {
        return Err(Error::invalid("angle uncertainty needs a finite omega != 0"));
    }
    let c = theta.cos().abs();
    if c <= T::tol(1e-12) {
        return Err(Error::Divergence(format!("cos(theta) = 0 at theta = {theta}")));
    }
    Ok(delta_rabi.abs() / (T::SQRT_2() * omega.abs() * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::avoided_crossing;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_resonance() {
        assert_eq!(resonant_omega(1.0, 0.0, Branch::Plus).unwrap(), 1.0);
        assert!((resonant_omega(1.0, PI / 3.0, Branch::Plus).unwrap() - 2.0).abs() < 1e-12);
        assert!((resonant_omega(1.0, PI / 3.0, Branch::Minus).unwrap() + 2.0).abs() < 1e-12);
        assert!(matches!(resonant_omega(1.0, PI / 2.0, Branch::Plus), Err(Error::Divergence(_))));
    }

    #[test]
    fn aligned_axis_field_is_exact() {
        let r = resonant_field(1.0, 0.0, 0.3, Branch::Plus).unwrap();
        assert_eq!(r.value, 0.7);
        assert_eq!(r.residual, 0.0);
        assert!(matches!(resonant_field(1.0, 0.0, 1.3, Branch::Plus), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn compensating_field() {
        let r = resonant_field(1.0, PI / 100.0, 0.2, Branch::Plus).unwrap();
        assert!((r.value / 0.803 - 1.0).abs() < 5e-3, "{r:?}");
        assert!(r.residual <= 1e-6);
        // independent check against the public crossing finder
        let p = RotorParams { d: 1.0, omega: 0.2, theta: PI / 100.0, phi0: 0.0, delta: r.value };
        let c = avoided_crossing(&p, Branch::Plus.pair(), (0.17, 0.23)).unwrap();
        assert!((c.position - 0.2).abs() < 1e-4, "{c:?}");
    }

    #[test]
    fn field_vanishes_at_zero_field_resonance() {
        let th = PI / 100.0;
        let r = resonant_field(1.0, th, 1.0 / th.cos(), Branch::Plus).unwrap();
        assert!(r.value.abs() < 2e-3, "{r:?}");
    }

    #[test]
    fn crossing_lands_on_requested_frequency() {
        for th in [PI / 100.0, PI / 50.0] {
            for w in [0.1, 0.2, 0.3, 0.4, 0.5] {
                match resonant_field(1.0, th, w, Branch::Plus) {
                    Ok(r) => {
                        let p = RotorParams { d: 1.0, omega: w, theta: th, phi0: 0.0, delta: r.value };
                        let c = avoided_crossing(&p, Branch::Plus.pair(), (0.85 * w, 1.15 * w)).unwrap();
                        assert!((c.position - w).abs() < 1e-4, "θ={th} ω={w}: {c:?}");
                    }
                    // the expansion itself has no admissible solution there
                    Err(Error::Regime(_) | Error::OutOfRange(_)) => {}
                    Err(e) => panic!("θ={th} ω={w}: {e}"),
                }
            }
        }
    }

    #[test]
    fn reversed_rotation_drives_the_other_transition() {
        let r = resonant_field(1.0, PI / 100.0, -1.2, Branch::Minus).unwrap();
        assert!((r.value - 0.2).abs() < 5e-3, "{r:?}");
        assert!(r.residual <= 1e-6);
        assert!(matches!(resonant_field(1.0, PI / 100.0, -0.2, Branch::Minus), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn outside_small_angle_regime() {
        assert!(matches!(resonant_field(1.0, 0.5, 0.2, Branch::Plus), Err(Error::Regime(_))));
    }

    #[test]
    fn uncertainty_examples() {
        let a = angle_uncertainty(1.0, 0.0, 0.01).unwrap();
        assert!((a - 0.01 / 2f64.sqrt()).abs() < 1e-12);
        assert!((angle_uncertainty(2.0, 0.0, 0.01).unwrap() - a / 2.0).abs() < 1e-15);
        assert!((angle_uncertainty(1.0, PI / 3.0, 0.01).unwrap() - 0.0141421356).abs() < 1e-9);
        assert!(matches!(angle_uncertainty(1.0, PI / 2.0, 0.01), Err(Error::Divergence(_))));
        assert!(angle_uncertainty(0.0, 0.1, 0.01).is_err());
    }

    #[test]
    fn uncertainty_is_smallest_on_axis() {
        let mut last = 0.0;
        for k in 0..1000 {
            let th = (PI / 2.0) * k as f64 / 1000.0;
            let v = angle_uncertainty(0.7, th, 0.01).unwrap();
            assert!(v >= last);
            last = v;
        }
    }
}
