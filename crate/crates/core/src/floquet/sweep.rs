//! Branch-tracked quasi-energy sweeps.

use rayon::prelude::*;

use super::matrix::{converged_harmonics, initial_harmonics, raw_floquet_states, Truncation, MAX_HARMONICS};
use super::{best_permutation, label_by_weight, raw_zero_field, relabel, weights_of, Axis, QuasiState, RawState};
use crate::dynamics::{cyclic_trajectories, Integrator, DEFAULT_STEPS_PER_PERIOD};
use crate::error::{Error, Result};
use crate::model::{h_rotating, RotorParams};
use crate::real::Real;
use crate::spin_algebra::{hermitian_eigensystem, inner, Level, Spinor};

/// Harmonic cutoff selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Harmonics {
    #[default]
    Auto,
    Fixed(usize),
}

/// Solver used at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    /// Characteristic cubic of the interaction-frame Hamiltonian (`Δ = 0`).
    ZeroField,
    /// Frame at rest with a field: plain diagonalization.
    Static,
    /// Truncated Floquet matrix.
    Floquet { n_harmonics: usize },
    /// One-period propagator, for rotation too slow for the dense Floquet
    /// matrix (`N₀ > MAX_HARMONICS`).
    Monodromy { steps_per_period: usize },
}

/// Per-sweep solver choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Plan<T> {
    pub n_harmonics: Option<usize>,
    pub truncation: Option<Truncation<T>>,
}

impl<T: Real> Plan<T> {
    /// Fixes the cutoff once, at the point that needs the most harmonics.
    pub fn for_points(points: &[RotorParams<T>], harmonics: Harmonics) -> Result<Self> {
        let hardest = points
            .iter()
            .filter(|p| p.delta != T::zero() && p.omega != T::zero())
            .filter(|p| initial_harmonics(*p).is_ok_and(|n| n <= MAX_HARMONICS))
            .max_by(|a, b| {
                let ra = a.delta.abs().max(a.d) / a.omega.abs();
                let rb = b.delta.abs().max(b.d) / b.omega.abs();
                ra.partial_cmp(&rb).expect("finite ratio")
            });
        match (hardest, harmonics) {
            (None, _) => Ok(Self { n_harmonics: None, truncation: None }),
            (Some(_), Harmonics::Fixed(n)) => Ok(Self { n_harmonics: Some(n), truncation: None }),
            (Some(p), Harmonics::Auto) => {
                let t = converged_harmonics(p).map_err(|e| at_point(Axis::Omega, p.omega, e))?;
                Ok(Self { n_harmonics: Some(t.n_harmonics), truncation: Some(t) })
            }
        }
    }

    pub fn engine(&self, p: &RotorParams<T>) -> Engine {
        if p.delta == T::zero() {
            Engine::ZeroField
        } else if p.omega == T::zero() {
            Engine::Static
        } else {
            match (self.n_harmonics, initial_harmonics(p)) {
                (Some(n), Ok(n0)) if n0 <= MAX_HARMONICS => Engine::Floquet { n_harmonics: n },
                _ => Engine::Monodromy { steps_per_period: DEFAULT_STEPS_PER_PERIOD },
            }
        }
    }
}

pub(crate) fn raw_states_at<T: Real>(p: &RotorParams<T>, engine: Engine) -> Result<[RawState<T>; 3]> {
    match engine {
        Engine::ZeroField => raw_zero_field(p),
        Engine::Static => {
            let sys = hermitian_eigensystem(&h_rotating(p, T::zero()))?;
            Ok(std::array::from_fn(|k| {
                let c = sys.vector(k);
                let v: Spinor<T> = [c[0], c[1], c[2]];
                RawState { quasienergy: sys.values[k], mode0: v, weights: weights_of(&v) }
            }))
        }
        Engine::Floquet { n_harmonics } => raw_floquet_states(p, n_harmonics),
        Engine::Monodromy { steps_per_period } => {
            let (traj, _) = cyclic_trajectories(p, steps_per_period, Integrator::Magnus4)?;
            Ok(std::array::from_fn(|k| RawState {
                quasienergy: traj[k].quasienergy,
                mode0: traj[k].mode0(),
                weights: traj[k].weights,
            }))
        }
    }
}

/// Labeled states at a single point, truncation chosen by the auto rule.
pub fn quasienergies_at<T: Real>(p: &RotorParams<T>, harmonics: Harmonics) -> Result<[QuasiState<T>; 3]> {
    let p = p.validated()?;
    let plan = Plan::for_points(std::slice::from_ref(&p), harmonics)?;
    Ok(label_by_weight(&raw_states_at(&p, plan.engine(&p))?).0)
}

/// One tracked branch.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch<T> {
    pub label: Level,
    pub quasienergy: Vec<T>,
    pub mode0: Vec<Spinor<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiSpectrum<T> {
    pub axis: Axis,
    pub axis_values: Vec<T>,
    /// In [`Level::ALL`] order.
    pub branches: [Branch<T>; 3],
    pub engines: Vec<Engine>,
    /// Auto-rule diagnostics when a Floquet matrix was used.
    pub truncation: Option<Truncation<T>>,
}

impl<T: Real> QuasiSpectrum<T> {
    pub fn branch(&self, level: Level) -> &Branch<T> {
        &self.branches[level.slot()]
    }

    pub fn len(&self) -> usize {
        self.axis_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_values.is_empty()
    }

    /// `|λ_a - λ_b|` along the sweep.
    pub fn separation(&self, a: Level, b: Level) -> Vec<T> {
        let (x, y) = (self.branch(a), self.branch(b));
        x.quasienergy.iter().zip(&y.quasienergy).map(|(&u, &v)| (u - v).abs()).collect()
    }
}

/// Ambiguity threshold on the weight-assignment margin at the sweep start.
const LABEL_MARGIN: f64 = 0.05;
/// Minimum accepted overlap between tracked modes at adjacent points.
const MIN_OVERLAP: f64 = 0.5;

pub fn quasienergy_spectrum<T: Real>(
    template: &RotorParams<T>,
    axis: Axis,
    values: &[T],
    harmonics: Harmonics,
) -> Result<QuasiSpectrum<T>> {
    if values.len() < 2 {
        return Err(Error::invalid("a sweep needs at least two axis values"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("axis values must be strictly ascending"));
    }
    let points = values
        .iter()
        .map(|&x| axis.apply(template, x).validated().map_err(|e| at_point(axis, x, e)))
        .collect::<Result<Vec<_>>>()?;
    let plan = Plan::for_points(&points, harmonics)?;
    let engines: Vec<Engine> = points.iter().map(|p| plan.engine(p)).collect();

    let raw: Vec<Result<[RawState<T>; 3]>> = points
        .par_iter()
        .zip(engines.par_iter())
        .map(|(p, &e)| raw_states_at(p, e))
        .collect();
    let raw = raw
        .into_iter()
        .zip(values)
        .map(|(r, &x)| r.map_err(|e| at_point(axis, x, e)))
        .collect::<Result<Vec<_>>>()?;

    let tracked = track(axis, values, &points, &engines, &raw)?;
    Ok(QuasiSpectrum {
        axis,
        axis_values: values.to_vec(),
        branches: tracked,
        engines,
        truncation: plan.truncation,
    })
}

pub(crate) fn at_point<T: Real>(axis: Axis, x: T, e: Error) -> Error {
    match e {
        e @ Error::AtPoint { .. } => e,
        e => Error::AtPoint {
            axis: axis.name().to_string(),
            value: x.to_f64_lossy(),
            source: Box::new(e),
        },
    }
}

fn track<T: Real>(
    axis: Axis,
    values: &[T],
    points: &[RotorParams<T>],
    engines: &[Engine],
    raw: &[[RawState<T>; 3]],
) -> Result<[Branch<T>; 3]> {
    let d = points[0].d;
    let (first, margin) = label_by_weight(&raw[0]);
    let sep0 = (0..3)
        .flat_map(|i| ((i + 1)..3).map(move |j| (i, j)))
        .map(|(i, j)| (first[i].quasienergy - first[j].quasienergy).abs())
        .fold(T::infinity(), T::min);
    if sep0 <= T::tol(1e-6) * d && margin < T::lit(LABEL_MARGIN) {
        return Err(Error::Tracking {
            axis: axis.name().to_string(),
            from: values[0].to_f64_lossy(),
            to: values[1].to_f64_lossy(),
            reason: format!(
                "sweep starts inside a gap (separation {:.3e}, labels ambiguous); move the start point",
                sep0.to_f64_lossy()
            ),
        });
    }

    let n = values.len();
    let mut lam = [vec![first[0].quasienergy], vec![first[1].quasienergy], vec![first[2].quasienergy]];
    let mut modes = [vec![first[0].mode0], vec![first[1].mode0], vec![first[2].mode0]];
    for i in 1..n {
        let prev: [Spinor<T>; 3] = std::array::from_fn(|s| modes[s][i - 1]);
        let (perm, _) = best_permutation(|s, k| inner(&prev[s], &raw[i][k].mode0).norm());
        let here = relabel(&raw[i], perm);
        for s in 0..3 {
            let ov = inner(&prev[s], &here[s].mode0).norm();
            if ov < T::lit(MIN_OVERLAP) {
                return Err(Error::Tracking {
                    axis: axis.name().to_string(),
                    from: values[i - 1].to_f64_lossy(),
                    to: values[i].to_f64_lossy(),
                    reason: format!(
                        "branch {} overlap {:.3} below {MIN_OVERLAP}; refine the grid",
                        Level::ALL[s],
                        ov.to_f64_lossy()
                    ),
                });
            }
            let mut q = here[s].quasienergy;
            if engines[i] != Engine::ZeroField && points[i].omega != T::zero() {
                let target = extrapolate(&lam[s], values, i);
                let w = points[i].omega.abs();
                q = q + w * ((target - q) / w).round();
            }
            lam[s].push(q);
            modes[s].push(here[s].mode0);
        }
    }
    check_continuity(axis, values, &lam, d)?;
    let [l0, l1, l2] = lam;
    let [m0, m1, m2] = modes;
    Ok([
        Branch { label: Level::MinusOne, quasienergy: l0, mode0: m0 },
        Branch { label: Level::Zero, quasienergy: l1, mode0: m1 },
        Branch { label: Level::PlusOne, quasienergy: l2, mode0: m2 },
    ])
}

fn extrapolate<T: Real>(hist: &[T], x: &[T], i: usize) -> T {
    if i >= 2 {
        let slope = (hist[i - 1] - hist[i - 2]) / (x[i - 1] - x[i - 2]);
        hist[i - 1] + slope * (x[i] - x[i - 1])
    } else {
        hist[i - 1]
    }
}

/// Flags isolated jumps: an interval whose largest branch slope exceeds ten
/// times the larger of its neighbours'. Jumps below `1e-6·D` are ignored.
fn check_continuity<T: Real>(axis: Axis, x: &[T], lam: &[Vec<T>; 3], d: T) -> Result<()> {
    let n = x.len();
    if n < 4 {
        return Ok(());
    }
    let slope = |i: usize| {
        let h = x[i + 1] - x[i];
        (0..3).map(|s| (lam[s][i + 1] - lam[s][i]).abs() / h).fold(T::zero(), T::max)
    };
    let slopes: Vec<T> = (0..n - 1).map(slope).collect();
    for i in 1..n - 2 {
        let h = x[i + 1] - x[i];
        let jump = slopes[i] * h;
        let local = slopes[i - 1].max(slopes[i + 1]);
        if jump > T::tol(1e-6) * d && slopes[i] > T::lit(10.0) * local {
            return Err(Error::Tracking {
                axis: axis.name().to_string(),
                from: x[i].to_f64_lossy(),
                to: x[i + 1].to_f64_lossy(),
                reason: format!(
                    "quasi-energy jump {:.3e} exceeds 10x the local slope bound; refine the grid",
                    jump.to_f64_lossy()
                ),
            });
        }
    }
    Ok(())
}
