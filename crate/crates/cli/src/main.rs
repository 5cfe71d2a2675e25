use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotospin::cli_io::{run, write_csv, ConfigDraft};
use rotospin::Error;

/// Rotating-frame spin-1 simulator: quasi-energy spectra, Rabi dynamics,
/// geometric phases and resonance design.
///
/// Frequencies are in units of the zero-field splitting D unless
/// `--physical-d` is given (2.87 is the usual NV value in GHz).
#[derive(Parser)]
#[command(name = "rotospin", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Branch-tracked quasi-energies along an axis.
    Spectrum(RunArgs),
    /// Populations and amplitudes from a basis state.
    Evolve(RunArgs),
    /// Geometric phases of the three cyclic states along an axis.
    Geomphase(RunArgs),
    /// Field that makes a transition resonant, along theta or omega.
    Resonance(RunArgs),
    /// Angle uncertainty from a Rabi-frequency uncertainty.
    Sensitivity(RunArgs),
    /// Internal consistency checks.
    Selftest,
}

/// Each flag overrides the config key of the same name.
#[derive(Args)]
struct RunArgs {
    /// key=value config file
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// name:min:max:points
    #[arg(long, allow_hyphen_values = true)]
    axis: Option<String>,
    #[arg(long)]
    steps_per_period: Option<String>,
    /// auto or an integer
    #[arg(long)]
    n_harmonics: Option<String>,
    /// CSV path (stdout when absent)
    #[arg(long, short)]
    output: Option<String>,
    /// dimensionless or physical:<D>
    #[arg(long)]
    units: Option<String>,
    /// Shorthand for `--units physical:<D>`
    #[arg(long, conflicts_with = "units")]
    physical_d: Option<String>,
    /// +1, 0 or -1
    #[arg(long, allow_hyphen_values = true)]
    psi0: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    /// plus or minus
    #[arg(long)]
    branch: Option<String>,
    #[arg(long)]
    delta_rabi: Option<String>,
}

impl RunArgs {
    fn draft(&self, mode: &str) -> Result<ConfigDraft, Error> {
        let mut d = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigSyntax {
                    line: 0,
                    message: format!("cannot read {}: {e}", path.display()),
                })?;
                ConfigDraft::from_text(&text)?
            }
            None => ConfigDraft::default(),
        };
        d.set("mode", mode)?;
        let units = self.physical_d.as_ref().map(|v| format!("physical:{v}")).or_else(|| self.units.clone());
        let flags = [
            ("d", &self.d),
            ("omega", &self.omega),
            ("theta", &self.theta),
            ("phi0", &self.phi0),
            ("delta", &self.delta),
            ("axis", &self.axis),
            ("steps_per_period", &self.steps_per_period),
            ("n_harmonics", &self.n_harmonics),
            ("output", &self.output),
            ("units", &units),
            ("psi0", &self.psi0),
            ("t_end", &self.t_end),
            ("branch", &self.branch),
            ("delta_rabi", &self.delta_rabi),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                d.set(key, v.as_str())?;
            }
        }
        Ok(d)
    }
}

fn execute(mode: &str, args: &RunArgs) -> Result<(), Error> {
    let cfg = args.draft(mode)?.build()?;
    let ds = run(&cfg)?;
    match &cfg.output {
        Some(path) => eprintln!("wrote {} rows to {}", ds.rows.len(), path.display()),
        None => write_csv(&ds, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.cmd {
        Cmd::Spectrum(a) => ("spectrum", a),
        Cmd::Evolve(a) => ("evolve", a),
        Cmd::Geomphase(a) => ("geomphase", a),
        Cmd::Resonance(a) => ("resonance", a),
        Cmd::Sensitivity(a) => ("sensitivity", a),
        Cmd::Selftest => {
            let report = rotospin::selftest::selftest();
            print!("{report}");
            return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(3) };
        }
    };
    match execute(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
