//! Mode drivers producing datasets.

use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use super::config::{Mode, SweepConfig};
use super::dataset::{emit_csv, Dataset};
use crate::dynamics::{evolve, unitarity_drift_per_period};
use crate::error::{Error, Result};
use crate::floquet::{quasienergy_spectrum, Axis, Engine};
use crate::geomphase::{geometric_phases_with_field, geometric_phases_zero_field};
use crate::model::RotorParams;
use crate::sensing::{angle_uncertainty, resonant_field};

pub const ENGINE_VERSION: &str = concat!("rotospin ", env!("CARGO_PKG_VERSION"));

/// Runs the configured mode; writes the CSV when `output` is set.
pub fn run(cfg: &SweepConfig) -> Result<Dataset> {
    let mut ds = match cfg.mode {
        Mode::Spectrum => spectrum(cfg)?,
        Mode::Evolve => evolution(cfg)?,
        Mode::Geomphase => geomphase(cfg)?,
        Mode::Resonance => resonance(cfg)?,
        Mode::Sensitivity => sensitivity(cfg)?,
    };
    let mut head = vec![("engine".to_string(), ENGINE_VERSION.to_string())];
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    head.push(("created_unix".into(), created.to_string()));
    head.extend(cfg.entries().into_iter().map(|(k, v)| (format!("config.{k}"), v)));
    head.append(&mut ds.provenance);
    ds.provenance = head;
    ds.validate()?;
    if let Some(path) = &cfg.output {
        emit_csv(&ds, path)?;
    }
    Ok(ds)
}

fn axis_scale(axis: Axis, cfg: &SweepConfig) -> f64 {
    match axis {
        Axis::Theta => 1.0,
        Axis::Omega | Axis::Delta => cfg.units.frequency(),
    }
}

fn point_error(axis: Axis, x: f64, e: Error) -> Error {
    match e {
        e @ Error::AtPoint { .. } => e,
        e => Error::AtPoint { axis: axis.name().into(), value: x, source: Box::new(e) },
    }
}

/// Evaluates `f` at every axis point in parallel; results stay in index order.
fn over_axis<R: Send>(cfg: &SweepConfig, f: impl Fn(&RotorParams<f64>) -> Result<R> + Sync) -> Result<(Vec<f64>, Vec<R>)> {
    let range = cfg.axis.expect("validated config has an axis");
    let xs = range.values();
    let out = xs
        .par_iter()
        .map(|&x| {
            let p = range.axis.apply(&cfg.params, x);
            p.validated().and_then(|p| f(&p)).map_err(|e| point_error(range.axis, x, e))
        })
        .collect::<Result<Vec<R>>>()?;
    Ok((xs, out))
}

fn spectrum(cfg: &SweepConfig) -> Result<Dataset> {
    let range = cfg.axis.expect("validated config has an axis");
    let xs = range.values();
    let spec = quasienergy_spectrum(&cfg.params, range.axis, &xs, cfg.n_harmonics)?;
    let fs = cfg.units.frequency();
    let seps: Vec<f64> = (0..xs.len())
        .map(|i| {
            let q: [f64; 3] = std::array::from_fn(|s| spec.branches[s].quasienergy[i]);
            (q[0] - q[1]).abs().min((q[1] - q[2]).abs()).min((q[0] - q[2]).abs())
        })
        .collect();
    let mut ds = Dataset::new(&["axis", "lambda_m1", "lambda_0", "lambda_p1", "gap_min_flag"]);
    for i in 0..xs.len() {
        let interior = i > 0 && i + 1 < xs.len();
        let flag = interior && seps[i] < seps[i - 1] && seps[i] <= seps[i + 1];
        ds.rows.push(vec![
            xs[i] * axis_scale(range.axis, cfg),
            spec.branches[0].quasienergy[i] * fs,
            spec.branches[1].quasienergy[i] * fs,
            spec.branches[2].quasienergy[i] * fs,
            if flag { 1.0 } else { 0.0 },
        ]);
    }
    let count = |pred: fn(&Engine) -> bool| spec.engines.iter().filter(|e| pred(e)).count();
    ds.note("diag.engine.zero_field", count(|e| matches!(e, Engine::ZeroField)));
    ds.note("diag.engine.static", count(|e| matches!(e, Engine::Static)));
    ds.note("diag.engine.floquet", count(|e| matches!(e, Engine::Floquet { .. })));
    ds.note("diag.engine.monodromy", count(|e| matches!(e, Engine::Monodromy { .. })));
    match spec.truncation {
        Some(t) => {
            ds.note("diag.n_harmonics", t.n_harmonics);
            ds.note("diag.n_harmonics_checked", t.checked_against);
            ds.note("diag.truncation_movement", format!("{:.3e}", t.movement));
        }
        None => {
            let fixed = spec.engines.iter().find_map(|e| match e {
                Engine::Floquet { n_harmonics } => Some(n_harmonics.to_string()),
                _ => None,
            });
            ds.note("diag.n_harmonics", fixed.unwrap_or_else(|| "n/a".into()));
        }
    }
    let mono: Vec<RotorParams<f64>> = spec
        .engines
        .iter()
        .zip(&xs)
        .filter(|(e, _)| matches!(e, Engine::Monodromy { .. }))
        .map(|(_, &x)| range.axis.apply(&cfg.params, x))
        .collect();
    if !mono.is_empty() {
        let drift = mono
            .par_iter()
            .map(|p| unitarity_drift_per_period(p, cfg.steps_per_period))
            .collect::<Result<Vec<f64>>>()?;
        ds.note("diag.unitarity_drift_per_period", format!("{:.3e}", drift.iter().cloned().fold(0.0, f64::max)));
    }
    Ok(ds)
}

fn evolution(cfg: &SweepConfig) -> Result<Dataset> {
    let p = cfg.params.validated()?;
    let t_end = match cfg.t_end {
        Some(t) => t,
        None => 2.0 * std::f64::consts::TAU / p.rabi().abs(),
    };
    let tr = evolve(&p, &cfg.psi0.ket(), t_end, cfg.steps_per_period)?;
    let ts = cfg.units.time();
    let mut ds = Dataset::new(&[
        "t", "p_plus1", "p_0", "p_minus1", "re_plus1", "im_plus1", "re_0", "im_0", "re_minus1", "im_minus1",
    ]);
    for k in 0..tr.len() {
        let (s, pop) = (&tr.states[k], &tr.populations[k]);
        ds.rows.push(vec![
            tr.times[k] * ts,
            pop[0],
            pop[1],
            pop[2],
            s[0].re,
            s[0].im,
            s[1].re,
            s[1].im,
            s[2].re,
            s[2].im,
        ]);
    }
    ds.note("diag.t_end", t_end);
    ds.note("diag.steps", tr.steps);
    ds.note("diag.sample_stride", tr.stride);
    ds.note("diag.norm_drift", format!("{:.3e}", tr.norm_drift));
    if p.omega != 0.0 || p.rabi() != 0.0 {
        let drift = unitarity_drift_per_period(&p, cfg.steps_per_period)?;
        ds.note("diag.unitarity_drift_per_period", format!("{drift:.3e}"));
    }
    Ok(ds)
}

fn geomphase(cfg: &SweepConfig) -> Result<Dataset> {
    let spp = cfg.steps_per_period;
    let (xs, sets) = over_axis(cfg, |p| {
        if p.delta == 0.0 {
            geometric_phases_zero_field(p).map(|g| (g, None))
        } else {
            let g = geometric_phases_with_field(p, spp)?;
            let drift = unitarity_drift_per_period(p, spp)?;
            Ok((g, Some(drift)))
        }
    })?;
    let range = cfg.axis.expect("axis");
    let mut ds = Dataset::new(&["axis", "gamma_m1", "gamma_0", "gamma_p1"]);
    let (mut rich, mut per, mut drift, mut quad) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for (x, (g, d)) in xs.iter().zip(&sets) {
        ds.rows.push(vec![x * axis_scale(range.axis, cfg), g.gamma[0], g.gamma[1], g.gamma[2]]);
        if let (Some(c), Some(d)) = (g.check, d) {
            quad += 1;
            rich = rich.max(c.richardson);
            per = per.max(c.periodicity);
            drift = drift.max(*d);
        }
    }
    ds.note("diag.closed_form_points", xs.len() - quad);
    ds.note("diag.quadrature_points", quad);
    if quad > 0 {
        ds.note("diag.richardson_max", format!("{rich:.3e}"));
        ds.note("diag.periodicity_defect_max", format!("{per:.3e}"));
        ds.note("diag.unitarity_drift_per_period", format!("{drift:.3e}"));
    }
    Ok(ds)
}

fn resonance(cfg: &SweepConfig) -> Result<Dataset> {
    let branch = cfg.branch;
    let (_, sols) = over_axis(cfg, |p| resonant_field(p.d, p.theta, p.omega, branch).map(|r| (p.theta, p.omega, r)))?;
    let fs = cfg.units.frequency();
    let mut ds = Dataset::new(&["theta", "omega", "delta_solution", "residual"]);
    let mut worst = 0.0f64;
    for (theta, omega, r) in sols {
        worst = worst.max(r.residual);
        ds.rows.push(vec![theta, omega * fs, r.value * fs, r.residual * fs]);
    }
    ds.note("diag.branch", branch);
    ds.note("diag.residual_max", format!("{worst:.3e}"));
    Ok(ds)
}

fn sensitivity(cfg: &SweepConfig) -> Result<Dataset> {
    let dr = cfg.delta_rabi;
    let (_, vals) = over_axis(cfg, |p| angle_uncertainty(p.omega, p.theta, dr).map(|u| (p.theta, p.omega, u)))?;
    let fs = cfg.units.frequency();
    let mut ds = Dataset::new(&["theta", "omega", "delta_rabi", "delta_theta"]);
    for (theta, omega, u) in vals {
        ds.rows.push(vec![theta, omega * fs, dr * fs, u]);
    }
    Ok(ds)
}

