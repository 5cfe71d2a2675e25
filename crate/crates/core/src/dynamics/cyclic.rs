//! Cyclic (Floquet) states propagated over one period.

use num_complex::Complex;

use super::{decompose_monodromy, Integrator, Monodromy, PeriodSteps};
use crate::error::{Error, Result};
use crate::model::{h_rotating, RotorParams};
use crate::real::Real;
use crate::spin_algebra::{make_spin_operators, Spinor};

/// A monodromy eigenvector and its trajectory over one period.
#[derive(Clone, Debug)]
pub struct CyclicTrajectory<T> {
    /// `ψ(t_k)` at `t_k = k·h`, `k = 0..=steps`.
    pub states: Vec<Spinor<T>>,
    pub h: T,
    pub period: T,
    pub multiplier: Complex<T>,
    /// Representative with mean Floquet index in `[-1/2, 1/2)`, i.e. the
    /// folded value shifted by a multiple of `ω` to within `|ω|/2` of
    /// `⟨H - ωS_z⟩` averaged over the period.
    pub quasienergy: T,
    /// Period-averaged populations, basis order.
    pub weights: [T; 3],
    /// `max |ψ(T) - μ·ψ(0)|`.
    pub periodicity_defect: T,
}

impl<T: Real> CyclicTrajectory<T> {
    pub fn mode0(&self) -> Spinor<T> {
        self.states[0]
    }

    /// Composite trapezoid of `f(t, ψ(t))` over the period, at full and at
    /// half resolution.
    pub fn integrate(&self, f: impl Fn(T, &Spinor<T>) -> T) -> (T, T) {
        let vals: Vec<T> = self
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| f(self.h * T::lit(k as f64), s))
            .collect();
        let full = trapezoid(&vals, self.h);
        let coarse: Vec<T> = vals.iter().step_by(2).copied().collect();
        let half = if (vals.len() - 1).is_multiple_of(2) {
            trapezoid(&coarse, self.h * T::lit(2.0))
        } else {
            full
        };
        (full, half)
    }
}

pub(crate) fn trapezoid<T: Real>(vals: &[T], h: T) -> T {
    match vals.len() {
        0 | 1 => T::zero(),
        n => {
            let inner_sum = vals[1..n - 1].iter().fold(T::zero(), |s, &v| s + v);
            h * (inner_sum + (vals[0] + vals[n - 1]) * T::lit(0.5))
        }
    }
}

/// Propagates the three monodromy eigenvectors through one period.
pub fn cyclic_trajectories<T: Real>(
    p: &RotorParams<T>,
    steps_per_period: usize,
    integrator: Integrator,
) -> Result<([CyclicTrajectory<T>; 3], Monodromy<T>)> {
    if p.omega == T::zero() {
        return Err(Error::invalid("cyclic states need omega != 0 (no drive period)"));
    }
    let ps = PeriodSteps::new(p, steps_per_period, integrator)?;
    let mono = decompose_monodromy(ps.product(), ps.period, p.omega)?;
    let sz = make_spin_operators::<T>().sz;
    let hams: Vec<_> = (0..=steps_per_period)
        .map(|k| &h_rotating(p, ps.h * T::lit(k as f64)) - &sz.scale_real(p.omega))
        .collect();

    let trajectories = try_array3(|k| {
        let mut states = Vec::with_capacity(steps_per_period + 1);
        let mut psi = mono.vectors[k];
        states.push(psi);
        for e in &ps.steps {
            psi = e.apply3(&psi);
            states.push(psi);
        }
        let mu = mono.multipliers[k];
        let defect = (0..3)
            .map(|i| (psi[i] - mu * mono.vectors[k][i]).norm())
            .fold(T::zero(), T::max);
        let mut w_series = [vec![], vec![], vec![]];
        let mut e_series = Vec::with_capacity(states.len());
        for (s, hm) in states.iter().zip(&hams) {
            for (i, ws) in w_series.iter_mut().enumerate() {
                ws.push(s[i].norm_sqr());
            }
            e_series.push(hm.expectation3(s));
        }
        let weights: [T; 3] =
            std::array::from_fn(|i| trapezoid(&w_series[i], ps.h) / ps.period);
        let e_ref = trapezoid(&e_series, ps.h) / ps.period;
        let lam = mono.quasienergies[k];
        let w = p.omega;
        let j = (lam - e_ref) / w;
        let shift = -(j + T::lit(0.5)).floor();
        Ok::<_, Error>(CyclicTrajectory {
            states,
            h: ps.h,
            period: ps.period,
            multiplier: mu,
            quasienergy: lam + shift * w,
            weights,
            periodicity_defect: defect,
        })
    })?;
    Ok((trajectories, mono))
}

/// Stable stand-in for `std::array::try_from_fn` at length three.
pub(crate) fn try_array3<T, E>(mut f: impl FnMut(usize) -> std::result::Result<T, E>) -> std::result::Result<[T; 3], E> {
    Ok([f(0)?, f(1)?, f(2)?])
}
