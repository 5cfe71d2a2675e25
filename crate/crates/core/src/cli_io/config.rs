//! Flat `key=value` run configuration.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::dynamics::{DEFAULT_STEPS_PER_PERIOD, MIN_STEPS_PER_PERIOD};
use crate::error::{Error, Result};
use crate::floquet::{Axis, Harmonics, MAX_HARMONICS};
use crate::model::RotorParams;
use crate::sensing::Branch;
use crate::spin_algebra::Level;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Spectrum,
    Evolve,
    Geomphase,
    Resonance,
    Sensitivity,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Spectrum, Mode::Evolve, Mode::Geomphase, Mode::Resonance, Mode::Sensitivity];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::Evolve => "evolve",
            Mode::Geomphase => "geomphase",
            Mode::Resonance => "resonance",
            Mode::Sensitivity => "sensitivity",
        }
    }

    fn axes(self) -> &'static [Axis] {
        match self {
            Mode::Spectrum | Mode::Geomphase => &[Axis::Omega, Axis::Theta, Axis::Delta],
            Mode::Resonance | Mode::Sensitivity => &[Axis::Theta, Axis::Omega],
            Mode::Evolve => &[],
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (spectrum|evolve|geomphase|resonance|sensitivity)"))
    }
}

/// `name:min:max:points`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisRange {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisRange {
    /// Evenly spaced, end points included exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * (k as f64 / n as f64)
                }
            })
            .collect()
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }
}

impl fmt::Display for AxisRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.axis, self.min, self.max, self.points)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Units {
    #[default]
    Dimensionless,
    /// Output frequencies in units of `d_value` per `D` (e.g. GHz with 2.87).
    Physical(f64),
}

impl Units {
    /// Multiplier for frequency columns.
    pub fn frequency(self) -> f64 {
        match self {
            Units::Dimensionless => 1.0,
            Units::Physical(d) => d,
        }
    }

    pub fn time(self) -> f64 {
        1.0 / self.frequency()
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Units::Dimensionless => f.write_str("dimensionless"),
            Units::Physical(d) => write!(f, "physical:{d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub mode: Mode,
    pub params: RotorParams<f64>,
    pub axis: Option<AxisRange>,
    pub steps_per_period: usize,
    pub n_harmonics: Harmonics,
    pub output: Option<PathBuf>,
    pub units: Units,
    /// Initial basis state (evolve).
    pub psi0: Level,
    /// Evolution time; defaults to two Rabi periods (evolve).
    pub t_end: Option<f64>,
    /// Resonant transition (resonance).
    pub branch: Branch,
    /// Rabi-frequency uncertainty (sensitivity).
    pub delta_rabi: f64,
}

impl SweepConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            params: RotorParams { d: 1.0, omega: 0.0, theta: 0.0, phi0: 0.0, delta: 0.0 },
            axis: None,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            n_harmonics: Harmonics::Auto,
            output: None,
            units: Units::Dimensionless,
            psi0: Level::Zero,
            t_end: None,
            branch: Branch::Plus,
            delta_rabi: 0.01,
        }
    }

    /// Canonical text; `parse_config(&c.serialize()) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// Canonical `(key, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        let mut e = vec![
            ("mode", self.mode.to_string()),
            ("d", p.d.to_string()),
            ("omega", p.omega.to_string()),
            ("theta", p.theta.to_string()),
            ("phi0", p.phi0.to_string()),
            ("delta", p.delta.to_string()),
        ];
        if let Some(a) = &self.axis {
            e.push(("axis", a.to_string()));
        }
        e.push(("steps_per_period", self.steps_per_period.to_string()));
        e.push((
            "n_harmonics",
            match self.n_harmonics {
                Harmonics::Auto => "auto".into(),
                Harmonics::Fixed(n) => n.to_string(),
            },
        ));
        if let Some(o) = &self.output {
            e.push(("output", o.display().to_string()));
        }
        e.push(("units", self.units.to_string()));
        e.push(("psi0", m_label(self.psi0).into()));
        if let Some(t) = self.t_end {
            e.push(("t_end", t.to_string()));
        }
        e.push(("branch", self.branch.to_string()));
        e.push(("delta_rabi", self.delta_rabi.to_string()));
        e
    }
}

fn m_label(l: Level) -> &'static str {
    match l {
        Level::PlusOne => "+1",
        Level::Zero => "0",
        Level::MinusOne => "-1",
    }
}

pub const KEYS: [&str; 15] = [
    "mode",
    "axis",
    "d",
    "omega",
    "theta",
    "phi0",
    "delta",
    "steps_per_period",
    "n_harmonics",
    "output",
    "units",
    "psi0",
    "t_end",
    "branch",
    "delta_rabi",
];

/// Key/value pairs before validation; later `set` calls override earlier
/// ones (command-line flags over file contents).
#[derive(Clone, Debug, Default)]
pub struct ConfigDraft {
    /// value and the line it came from (0 = set programmatically)
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigDraft {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut d = ConfigDraft::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| Error::ConfigSyntax {
                line,
                message: format!("expected key=value, got `{body}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::ConfigSyntax { line, message: format!("unknown key `{k}`") });
            }
            if d.entries.contains_key(k) {
                return Err(Error::ConfigSyntax { line, message: format!("duplicate key `{k}`") });
            }
            d.entries.insert(k.to_string(), (v.to_string(), line));
        }
        Ok(d)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<&mut Self> {
        if !KEYS.contains(&key) {
            return Err(Error::ConfigSyntax { line: 0, message: format!("unknown key `{key}`") });
        }
        self.entries.insert(key.to_string(), (value.into(), 0));
        Ok(self)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn build(&self) -> Result<SweepConfig> {
        let range = |field: &str, message: String| Error::ConfigRange { field: field.to_string(), message };
        let num = |key: &str| -> Result<Option<f64>> {
            match self.get(key) {
                None => Ok(None),
                Some(v) => {
                    let x: f64 = v.parse().map_err(|_| range(key, format!("not a number: `{v}`")))?;
                    if !x.is_finite() {
                        return Err(range(key, format!("must be finite, got {v}")));
                    }
                    Ok(Some(x))
                }
            }
        };

        // field ranges first, so a bad value is reported even without a mode
        let d = num("d")?.unwrap_or(1.0);
        if d <= 0.0 {
            return Err(range("d", format!("must be > 0, got {d}")));
        }
        let theta = num("theta")?.unwrap_or(0.0);
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(range("theta", format!("must lie in [0, pi], got {theta}")));
        }
        let omega = num("omega")?.unwrap_or(0.0);
        let phi0 = num("phi0")?.unwrap_or(0.0);
        let delta = num("delta")?.unwrap_or(0.0);
        let params = RotorParams { d, omega, theta, phi0, delta };

        let axis = self.get("axis").map(parse_axis).transpose()?;
        let steps_per_period = match self.get("steps_per_period") {
            None => DEFAULT_STEPS_PER_PERIOD,
            Some(v) => {
                let n: usize = v.parse().map_err(|_| range("steps_per_period", format!("not an integer: `{v}`")))?;
                if n < MIN_STEPS_PER_PERIOD || !n.is_multiple_of(2) {
                    return Err(range(
                        "steps_per_period",
                        format!("must be even and >= {MIN_STEPS_PER_PERIOD}, got {n}"),
                    ));
                }
                n
            }
        };
        let n_harmonics = match self.get("n_harmonics") {
            None | Some("auto") => Harmonics::Auto,
            Some(v) => {
                let n: usize = v.parse().map_err(|_| range("n_harmonics", format!("expected auto or an integer, got `{v}`")))?;
                if n == 0 || n > MAX_HARMONICS {
                    return Err(range("n_harmonics", format!("must lie in 1..={MAX_HARMONICS}, got {n}")));
                }
                Harmonics::Fixed(n)
            }
        };
        let output = match self.get("output") {
            Some("") => return Err(range("output", "empty path".into())),
            other => other.map(PathBuf::from),
        };
        let units = match self.get("units") {
            None | Some("dimensionless") => Units::Dimensionless,
            Some(v) => {
                let val = v
                    .strip_prefix("physical:")
                    .and_then(|x| x.parse::<f64>().ok())
                    .ok_or_else(|| range("units", format!("expected dimensionless or physical:<D>, got `{v}`")))?;
                if !(val.is_finite() && val > 0.0) {
                    return Err(range("units", format!("physical D must be finite and > 0, got {val}")));
                }
                Units::Physical(val)
            }
        };
        let psi0 = match self.get("psi0") {
            None => Level::Zero,
            Some(v) => {
                let m: i32 = v.parse().map_err(|_| range("psi0", format!("expected +1, 0 or -1, got `{v}`")))?;
                Level::from_m(m).ok_or_else(|| range("psi0", format!("expected +1, 0 or -1, got {m}")))?
            }
        };
        let t_end = num("t_end")?;
        if let Some(t) = t_end {
            if t <= 0.0 {
                return Err(range("t_end", format!("must be > 0, got {t}")));
            }
        }
        let branch = match self.get("branch") {
            None => Branch::Plus,
            Some(v) => v.parse().map_err(|e: Error| range("branch", e.to_string()))?,
        };
        let delta_rabi = num("delta_rabi")?.unwrap_or(0.01);
        if delta_rabi < 0.0 {
            return Err(range("delta_rabi", format!("must be >= 0, got {delta_rabi}")));
        }

        let mode: Mode = self
            .get("mode")
            .ok_or_else(|| range("mode", "missing".into()))?
            .parse()
            .map_err(|m| range("mode", m))?;
        match (&axis, mode.axes()) {
            (Some(a), []) => return Err(range("axis", format!("{} sweeps are not defined for mode {mode}", a.axis))),
            (Some(a), allowed) if !allowed.contains(&a.axis) => {
                return Err(range("axis", format!("mode {mode} sweeps {allowed:?}, not {}", a.axis)));
            }
            (None, allowed) if !allowed.is_empty() => {
                return Err(range("axis", format!("mode {mode} needs an axis (name:min:max:points)")));
            }
            _ => {}
        }
        if mode == Mode::Evolve && t_end.is_none() && params.rabi() == 0.0 {
            return Err(range("t_end", "required when there is no drive (omega*sin(theta) = 0)".into()));
        }

        Ok(SweepConfig {
            mode,
            params,
            axis,
            steps_per_period,
            n_harmonics,
            output,
            units,
            psi0,
            t_end,
            branch,
            delta_rabi,
        })
    }
}

fn parse_axis(v: &str) -> Result<AxisRange> {
    let bad = |m: String| Error::ConfigRange { field: "axis".into(), message: m };
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 4 {
        return Err(bad(format!("expected name:min:max:points, got `{v}`")));
    }
    let axis: Axis = parts[0].parse().map_err(|e: Error| bad(e.to_string()))?;
    let min: f64 = parts[1].parse().map_err(|_| bad(format!("bad min `{}`", parts[1])))?;
    let max: f64 = parts[2].parse().map_err(|_| bad(format!("bad max `{}`", parts[2])))?;
    let points: usize = parts[3].parse().map_err(|_| bad(format!("bad point count `{}`", parts[3])))?;
    if !(min.is_finite() && max.is_finite()) {
        return Err(bad("bounds must be finite".into()));
    }
    if !(min < max) {
        return Err(bad(format!("need min < max, got {min} >= {max}")));
    }
    if points < 2 {
        return Err(bad(format!("need at least 2 points, got {points}")));
    }
    if axis == Axis::Theta && (min < 0.0 || max > std::f64::consts::PI) {
        return Err(bad(format!("theta range must lie in [0, pi], got [{min}, {max}]")));
    }
    Ok(AxisRange { axis, min, max, points })
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    ConfigDraft::from_text(text)?.build()
}
