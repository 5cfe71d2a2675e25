//! Quick internal consistency checks, run by the `selftest` command.

use std::f64::consts::PI;

use crate::dynamics::{monodromy, unitarity_drift_per_period, DEFAULT_STEPS_PER_PERIOD};
use crate::floquet::{converged_harmonics, floquet_states, folded_distance, quasienergies_zero_field};
use crate::geomphase::{geometric_phases_with_field, geometric_phases_zero_field, pin_gauge_sign};
use crate::model::{h_interaction, RotorParams};
use crate::spin_algebra::{hermitian_eigensystem, Level};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &'static str, outcome: crate::Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check { name, passed, detail });
    }
}

impl std::fmt::Display for SelfTestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn p(omega: f64, theta: f64, delta: f64) -> RotorParams<f64> {
    RotorParams { d: 1.0, omega, theta, phi0: 0.0, delta }
}

pub fn selftest() -> SelfTestReport {
    let mut r = SelfTestReport::default();

    r.record("gauge orientation", pin_gauge_sign().map(|s| (true, format!("sign {s:+}"))));

    r.record("cubic vs eigensolver", (|| {
        let mut worst = 0.0f64;
        for k in 0..40 {
            let q = p(3.0 * ((k * 37 % 40) as f64 + 0.5) / 40.0, PI * (k as f64 + 0.3) / 40.0, 0.0);
            let mut cubic: Vec<f64> = quasienergies_zero_field(&q)?.iter().map(|s| s.quasienergy).collect();
            cubic.sort_by(|a, b| a.total_cmp(b));
            let jac = hermitian_eigensystem(&h_interaction(&q)?)?.values;
            for (a, b) in cubic.iter().zip(&jac) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
        Ok((worst <= 1e-10, format!("max rel diff {worst:.2e}")))
    })());

    r.record("floquet vs monodromy", (|| {
        let mut worst = 0.0f64;
        for q in [p(0.7, 0.9, 0.3), p(1.3, 2.1, -0.6), p(0.45, 0.2, 0.8)] {
            let n = converged_harmonics(&q)?.n_harmonics;
            let fl = floquet_states(&q, n)?;
            let mo = monodromy(&q, DEFAULT_STEPS_PER_PERIOD)?;
            for s in &fl {
                let d = mo
                    .quasienergies
                    .iter()
                    .map(|&m| folded_distance(s.quasienergy, m, q.omega))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        Ok((worst <= 1e-8, format!("max folded diff {worst:.2e}")))
    })());

    r.record("phase quadrature", (|| {
        let q = p(0.6, 1.0, 0.0);
        let a = geometric_phases_zero_field(&q)?;
        let b = geometric_phases_with_field(&q, DEFAULT_STEPS_PER_PERIOD)?;
        let mut x = a.gamma;
        let mut y = b.gamma;
        x.sort_by(|a, b| a.total_cmp(b));
        y.sort_by(|a, b| a.total_cmp(b));
        let worst = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok((worst <= 1e-6, format!("max diff {worst:.2e} rad")))
    })());

    r.record("adiabatic phase", (|| {
        let th = PI / 3.0;
        let g = geometric_phases_zero_field(&p(1e-3, th, 0.0))?;
        let err = (g.of(Level::PlusOne) - 2.0 * PI * (1.0 - th.cos())).abs();
        Ok((err <= 1e-2, format!("deviation {err:.2e} rad")))
    })());

    r.record("unitarity drift", (|| {
        let d = unitarity_drift_per_period(&p(0.8, 1.2, 0.4), DEFAULT_STEPS_PER_PERIOD)?;
        Ok((d <= 1e-9, format!("{d:.2e} per period")))
    })());

    r
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        let r = super::selftest();
        assert!(r.passed(), "{r}");
        assert_eq!(r.checks.len(), 6);
    }
}
