//! Hamiltonians of a spin-1 defect in a frame rotating about `z`.
//!
//! All matrices use the `(+1, 0, -1)` basis. Frequencies are in units of the
//! zero-field splitting unless the caller picks another `d`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spin_algebra::{make_spin_operators, CMatrix};

/// Physical parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotorParams<T> {
    /// Zero-field splitting `D > 0`.
    pub d: T,
    /// Rotation angular frequency; the sign is the rotation direction.
    pub omega: T,
    /// Tilt between the defect axis and the rotation axis, in `[0, π]`.
    pub theta: T,
    /// Initial azimuth.
    pub phi0: T,
    /// Field parameter `Δ = -g·μ_B·B` along the rotation axis.
    pub delta: T,
}

impl<T: Real> RotorParams<T> {
    /// Zero-field parameters with `D = 1`, `φ0 = 0`.
    pub fn new(omega: T, theta: T) -> Result<Self> {
        Self {
            d: T::one(),
            omega,
            theta,
            phi0: T::zero(),
            delta: T::zero(),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let all = [self.d, self.omega, self.theta, self.phi0, self.delta];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        if self.d <= T::zero() {
            return Err(Error::invalid(format!("zero-field splitting must be positive, got {}", self.d)));
        }
        if self.theta < T::zero() || self.theta > T::PI() {
            return Err(Error::invalid(format!("theta must lie in [0, pi], got {}", self.theta)));
        }
        Ok(self)
    }

    pub fn with_omega(self, omega: T) -> Self {
        Self { omega, ..self }
    }

    pub fn with_theta(self, theta: T) -> Self {
        Self { theta, ..self }
    }

    pub fn with_delta(self, delta: T) -> Self {
        Self { delta, ..self }
    }

    pub fn with_phi0(self, phi0: T) -> Self {
        Self { phi0, ..self }
    }

    pub fn with_d(self, d: T) -> Self {
        Self { d, ..self }
    }

    /// Drive period `2π/|ω|`.
    pub fn period(&self) -> Option<T> {
        (self.omega != T::zero()).then(|| T::TAU() / self.omega.abs())
    }

    /// Rabi frequency modulus `√2·ω·sinθ` (signed with ω).
    pub fn rabi(&self) -> T {
        T::SQRT_2() * self.omega * self.theta.sin()
    }

    pub fn is_zero_field(&self) -> bool {
        self.delta == T::zero()
    }

    fn require_zero_field(&self, what: &str) -> Result<()> {
        if self.is_zero_field() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{what} is only defined at zero field (delta = {}); use the Floquet path",
                self.delta
            )))
        }
    }
}

/// Scales from the small-angle effective Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedScales<T> {
    pub rabi: T,
    pub d_tilde: T,
    pub delta_tilde: T,
}

impl<T: Real> DerivedScales<T> {
    /// `D̃ = D + 3DΔ²θ²/(2(D²-Δ²))`, `Δ̃ = Δ - ωθ²/2 - D²Δθ²/(2(D²-Δ²))`.
    pub fn of(p: &RotorParams<T>) -> Self {
        let two = T::lit(2.0);
        let (d, dl, th) = (p.d, p.delta, p.theta);
        let th2 = th * th;
        let den = two * (d * d - dl * dl);
        let d_tilde = d + T::lit(3.0) * d * dl * dl * th2 / den;
        let delta_tilde = dl - p.omega * th2 / two - d * d * dl * th2 / den;
        Self {
            rabi: p.rabi().abs(),
            d_tilde,
            delta_tilde,
        }
    }
}

/// Part of the rotating-frame Hamiltonian that does not depend on time:
/// `D·Sz² + (ω(1-cosθ) - Δcosθ)·Sz + Δ·sinθ·Sx`.
pub fn h_static<T: Real>(p: &RotorParams<T>) -> CMatrix<T> {
    let s = make_spin_operators::<T>();
    let (st, ct) = p.theta.sin_cos();
    let zcoef = p.omega * (T::one() - ct) - p.delta * ct;
    let a = &s.sz_squared().scale_real(p.d) + &s.sz.scale_real(zcoef);
    &a + &s.sx.scale_real(p.delta * st)
}

/// Amplitude `B` of the `e^{-iωt}` Fourier component of the rotating-frame
/// Hamiltonian: `-(ω/2)·sinθ·e^{-iφ0}·S+`.
pub fn drive_component<T: Real>(p: &RotorParams<T>) -> CMatrix<T> {
    let s = make_spin_operators::<T>();
    let amp = Complex::from_polar(-p.omega * p.theta.sin() / T::lit(2.0), -p.phi0);
    s.s_plus.scale(amp)
}

/// Rotating-frame Hamiltonian
/// `H̃(t) = D·Sz² - Δcosθ·Sz + Δsinθ·Sx + ω(1-cosθ)·Sz - (ω/2)sinθ(e^{-i(ωt+φ0)}S+ + h.c.)`.
pub fn h_rotating<T: Real>(p: &RotorParams<T>, t: T) -> CMatrix<T> {
    let b = drive_component(p);
    let phase = Complex::from_polar(T::one(), -p.omega * t);
    let drive = b.scale(phase);
    let sum = &h_static(p) + &drive;
    &sum + &drive.adjoint()
}

/// Zero-field Hamiltonian in the frame removing `e^{∓iωSz t}`:
/// `D·Sz² - ω·cosθ·Sz - ω·sinθ·(cosφ0·Sx + sinφ0·Sy)`, i.e.
/// `diag(D - ωcosθ, 0, D + ωcosθ)` with `-Ω/2` couplings.
pub fn h_interaction<T: Real>(p: &RotorParams<T>) -> Result<CMatrix<T>> {
    p.require_zero_field("the interaction-picture Hamiltonian")?;
    let s = make_spin_operators::<T>();
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi0.sin_cos();
    let diag = &s.sz_squared().scale_real(p.d) - &s.sz.scale_real(p.omega * ct);
    let transverse = &s.sx.scale_real(cp) + &s.sy.scale_real(sp);
    Ok(&diag - &transverse.scale_real(p.omega * st))
}

/// Adiabatic Hamiltonian `D·Sz² + ω(1-cosθ)·Sz`.
pub fn h_adiabatic_effective<T: Real>(p: &RotorParams<T>) -> Result<CMatrix<T>> {
    p.require_zero_field("the adiabatic effective Hamiltonian")?;
    let s = make_spin_operators::<T>();
    let rils = p.omega * (T::one() - p.theta.cos());
    Ok(&s.sz_squared().scale_real(p.d) + &s.sz.scale_real(rils))
}

/// Static part `D̃·Sz² - Δ̃·Sz` of the small-angle effective Hamiltonian, valid
/// for `0 < Δ < D` and `θ < 0.2·(1 - Δ/D)`.
pub fn h_effective_small_angle<T: Real>(
    p: &RotorParams<T>,
) -> Result<(CMatrix<T>, DerivedScales<T>)> {
    check_small_angle_regime(p.d, p.delta, p.theta)?;
    let s = make_spin_operators::<T>();
    let scales = DerivedScales::of(p);
    let h = &s.sz_squared().scale_real(scales.d_tilde) - &s.sz.scale_real(scales.delta_tilde);
    Ok((h, scales))
}

pub(crate) fn check_small_angle_regime<T: Real>(d: T, delta: T, theta: T) -> Result<()> {
    if !(delta > T::zero() && delta < d) {
        return Err(Error::Regime(format!(
            "small-angle expansion needs 0 < delta < D, got delta = {delta}"
        )));
    }
    let bound = small_angle_bound(d, delta);
    if theta >= bound {
        return Err(Error::Regime(format!(
            "small-angle expansion needs theta < {bound:.6} (0.2*(1 - delta/D)), got {theta}"
        )));
    }
    Ok(())
}

/// `0.2·(1 - |Δ|/D)`.
pub(crate) fn small_angle_bound<T: Real>(d: T, delta: T) -> T {
    T::lit(0.2) * (T::one() - delta.abs() / d)
}
