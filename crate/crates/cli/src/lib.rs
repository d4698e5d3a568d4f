//! Command-line front end for the `floq` binary.
//!
//! Exit status: 0 on success, 1 for usage, configuration and I/O errors,
//! 2 when the numerics themselves fail.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use floq_core::experiments::{preset, preset_names};

use crate::config::{parse_config, Command, ConfigError, Flags, Sources};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FLOQ_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "floq",
    version,
    about = "Driven dissipative tight-binding chains"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Integrate the amplitudes and write populations over time.
    Evolve(RunArgs),
    /// Floquet spectrum, dark mode or dark-mode lifetimes.
    Floquet(RunArgs),
    /// Equilibrium population versus drive amplitude.
    Sweep(RunArgs),
    /// Closed-form three-site populations.
    Analytic(RunArgs),
    /// Closed form against numerical integration, three sites.
    Compare(RunArgs),
    /// List the registered presets.
    PresetList,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named scenario used as the base layer.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output root; results go to `<DIR>/<name>`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Final time (also replaces the sweep's final times).
    #[arg(long, value_name = "REAL")]
    tf: Option<f64>,
    #[arg(long, value_name = "INT")]
    steps_per_period: Option<usize>,
    /// Averaging window; defaults to half the final time.
    #[arg(long, value_name = "REAL")]
    delta: Option<f64>,
    /// Add amplitude columns to trajectory files.
    #[arg(long)]
    emit_amplitudes: bool,
    /// Override one configuration key, e.g. `lattice.frequency=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl RunArgs {
    fn sources(self) -> Result<Sources, ConfigError> {
        let config_text =
            match &self.config {
                Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
                    ConfigError::Parse(format!("cannot read {}: {e}", path.display()))
                })?),
                None => None,
            };
        Ok(Sources {
            preset: self.preset,
            config_text,
            flags: Flags {
                out: self.out,
                tf: self.tf,
                steps_per_period: self.steps_per_period,
                delta: self.delta,
                emit_amplitudes: self.emit_amplitudes,
            },
            sets: self.sets,
            env_out_dir: std::env::var_os(OUT_DIR_ENV).map(PathBuf::from),
        })
    }
}

fn preset_list() -> String {
    let width = preset_names().iter().map(|n| n.len()).max().unwrap_or(0);
    let mut out = String::new();
    for name in preset_names() {
        let s = preset(name).expect("registered preset");
        out.push_str(&format!(
            "{name:width$}  {:<12} {}\n",
            s.output.name(),
            s.description
        ));
    }
    out
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, args) = match cli.command {
        CommandArgs::PresetList => {
            print!("{}", preset_list());
            return 0;
        }
        CommandArgs::Evolve(a) => (Command::Evolve, a),
        CommandArgs::Floquet(a) => (Command::Floquet, a),
        CommandArgs::Sweep(a) => (Command::Sweep, a),
        CommandArgs::Analytic(a) => (Command::Analytic, a),
        CommandArgs::Compare(a) => (Command::Compare, a),
    };
    let config = match args.sources().and_then(|s| parse_config(command, &s)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match commands::execute(&config) {
        Ok(report) => {
            println!("{}", report.line);
            if config.verbosity != config::Verbosity::Quiet {
                for d in &report.details {
                    println!("  {d}");
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
