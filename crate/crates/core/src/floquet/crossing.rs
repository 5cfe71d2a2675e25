//! Avoided-crossing location and gap.

use super::sweep::{at_point, quasienergy_spectrum, raw_states_at, Harmonics, Plan, QuasiSpectrum};
use super::{best_permutation, relabel, Axis};
use crate::dynamics::golden_min;
use crate::error::{Error, Result};
use crate::model::RotorParams;
use crate::real::Real;
use crate::spin_algebra::{inner, Level};

/// Coarse tracked grid used to bracket the minimum.
const COARSE_POINTS: usize = 41;
/// Gaps at or below this (times `D`) are exact crossings.
const CROSSING_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingReport<T> {
    pub axis: Axis,
    /// Argmin of the pair separation along `axis` (the resonant `ω` for a
    /// frequency window).
    pub position: T,
    /// Minimum separation.
    pub gap: T,
    pub branch_pair: (Level, Level),
}

/// Avoided crossing between `pair` for `ω` in `window`.
pub fn avoided_crossing<T: Real>(
    template: &RotorParams<T>,
    pair: (Level, Level),
    window: (T, T),
) -> Result<CrossingReport<T>> {
    avoided_crossing_along(template, pair, Axis::Omega, window)
}

/// Avoided crossing along any axis.
pub fn avoided_crossing_along<T: Real>(
    template: &RotorParams<T>,
    pair: (Level, Level),
    axis: Axis,
    window: (T, T),
) -> Result<CrossingReport<T>> {
    crossing_search(template, pair, axis, window, Harmonics::Auto, COARSE_POINTS)
}

pub(crate) fn crossing_search<T: Real>(
    template: &RotorParams<T>,
    pair: (Level, Level),
    axis: Axis,
    window: (T, T),
    harmonics: Harmonics,
    coarse: usize,
) -> Result<CrossingReport<T>> {
    let (lo, hi) = window;
    if !(lo < hi) || pair.0 == pair.1 {
        return Err(Error::invalid("crossing search needs lo < hi and two distinct branches"));
    }
    let grid: Vec<T> = (0..coarse)
        .map(|k| lo + (hi - lo) * T::lit(k as f64) / T::lit((coarse - 1) as f64))
        .collect();
    let spec = quasienergy_spectrum(template, axis, &grid, harmonics)?;
    let sep = spec.separation(pair.0, pair.1);
    let (imin, _) = sep
        .iter()
        .enumerate()
        .fold((0, T::infinity()), |b, (i, &s)| if s < b.1 { (i, s) } else { b });
    if imin == 0 || imin + 1 == coarse {
        return Err(Error::NoCrossing(format!(
            "separation of {} and {} has no interior minimum on {axis} in [{lo}, {hi}]",
            pair.0, pair.1
        )));
    }

    let points: Vec<RotorParams<T>> = grid.iter().map(|&x| axis.apply(template, x)).collect();
    let plan = Plan::for_points(&points, harmonics)?;
    let refined = RefinedSeparation { spec: &spec, plan: &plan, template, axis, pair };
    let tol = T::tol(1e-8) * grid[imin].abs().max(hi - lo);
    let pos = golden_min(grid[imin - 1], grid[imin + 1], tol, |x| refined.eval(x).unwrap_or(T::infinity()));
    let gap = refined.eval(pos).map_err(|e| at_point(axis, pos, e))?;
    if !gap.is_finite() {
        return Err(Error::numeric("separation undefined near the minimum", f64::NAN));
    }
    if gap <= T::tol(CROSSING_FLOOR) * template.d {
        return Err(Error::NoCrossing(format!(
            "{} and {} cross exactly on {axis} near {pos} (gap {gap:.3e})",
            pair.0, pair.1
        )));
    }
    Ok(CrossingReport { axis, position: pos, gap, branch_pair: pair })
}

/// Separation between off-grid points, labeled by overlap with the nearest
/// grid point of the tracked sweep.
struct RefinedSeparation<'a, T> {
    spec: &'a QuasiSpectrum<T>,
    plan: &'a Plan<T>,
    template: &'a RotorParams<T>,
    axis: Axis,
    pair: (Level, Level),
}

impl<T: Real> RefinedSeparation<'_, T> {
    fn eval(&self, x: T) -> Result<T> {
        let p = self.axis.apply(self.template, x).validated()?;
        let raw = raw_states_at(&p, self.plan.engine(&p))?;
        let xs = &self.spec.axis_values;
        let near = (0..xs.len())
            .min_by(|&a, &b| (xs[a] - x).abs().partial_cmp(&(xs[b] - x).abs()).expect("finite grid"))
            .expect("non-empty grid");
        let refs: [_; 3] = std::array::from_fn(|s| self.spec.branches[s].mode0[near]);
        let (perm, _) = best_permutation(|s, k| inner(&refs[s], &raw[k].mode0).norm());
        let here = relabel(&raw, perm);
        let value = |lvl: Level| {
            let q = here[lvl.slot()].quasienergy;
            let grid_q = self.spec.branch(lvl).quasienergy[near];
            if p.omega != T::zero() && p.delta != T::zero() {
                let w = p.omega.abs();
                q + w * ((grid_q - q) / w).round()
            } else {
                q
            }
        };
        Ok((value(self.pair.0) - value(self.pair.1)).abs())
    }
}
