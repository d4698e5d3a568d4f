//! Run configuration: preset, TOML file and command-line flags, layered in
//! that order.
//!
//! Every layer is reduced to a TOML table with the keys of [`ConfigFile`];
//! tables are deep-merged and the result is deserialized strictly, so an
//! unknown key anywhere fails the run. Flags mirror keys with dotted paths
//! (`--set lattice.frequency=20`).

use std::path::PathBuf;

use floq_core::experiments::{
    preset, Check, DriveAxis, ExperimentError, OutputKind, Scenario, Sweep,
};
use floq_core::LatticeSpec;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

/// Output directory when neither flags, file nor environment name one.
pub const DEFAULT_OUT_DIR: &str = "out";

/// Keys whose TOML integers stay integers; every other integer is read as
/// a float so that `coupling = 1` is accepted.
const INTEGER_KEYS: &[&str] = &["initial_site", "steps_per_period", "n_sites", "points"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown preset {0:?} (see `floq preset-list`)")]
    UnknownPreset(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("malformed --set {0:?}: expected KEY=VALUE")]
    BadSet(String),
    #[error("conflicting values for `{key}`: {first} vs {second}")]
    Conflict {
        key: String,
        first: String,
        second: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("command `{command}` cannot produce {output} output")]
    Incompatible {
        command: &'static str,
        output: &'static str,
    },
    #[error(transparent)]
    Scenario(#[from] ExperimentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Evolve,
    Floquet,
    Sweep,
    Analytic,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Evolve => "evolve",
            Self::Floquet => "floquet",
            Self::Sweep => "sweep",
            Self::Analytic => "analytic",
            Self::Compare => "compare",
        }
    }

    /// Output kind used when nothing else decides it.
    fn default_output(self, has_sweep: bool) -> OutputKind {
        match self {
            Self::Evolve => OutputKind::Trajectory,
            Self::Sweep => OutputKind::Equilibrium,
            Self::Floquet if has_sweep => OutputKind::Spectrum,
            Self::Floquet => OutputKind::DarkMode,
            Self::Analytic | Self::Compare => OutputKind::Comparison,
        }
    }

    fn accepts(self, output: OutputKind) -> bool {
        use OutputKind::*;
        match self {
            Self::Evolve => output == Trajectory,
            Self::Sweep => output == Equilibrium,
            Self::Floquet => matches!(output, Spectrum | DarkMode | DarkLifetime),
            Self::Analytic | Self::Compare => output == Comparison,
        }
    }

    /// Analytic and compare reuse any three-site preset as a parameter set.
    fn overrides_output(self) -> bool {
        matches!(self, Self::Analytic | Self::Compare)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
    Verbose,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticePatch {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive_left: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive_right: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPatch {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<DriveAxis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_finals: Option<Vec<f64>>,
}

/// The configuration document. Every key is optional in any one layer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verbosity: Option<Verbosity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_site: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps_per_period: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit_amplitudes: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_sets: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticePatch>,
    /// A later layer removes an inherited sweep with `sweep = false`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepPatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<Check>>,
}

impl ConfigFile {
    /// Every field of a scenario, as a complete layer.
    pub fn from_scenario(s: &Scenario) -> Self {
        let l = &s.lattice;
        Self {
            name: Some(s.name.clone()),
            description: Some(s.description.clone()),
            output: Some(s.output),
            initial_site: Some(s.initial_site),
            t_final: Some(s.t_final),
            steps_per_period: Some(s.steps_per_period),
            delta: s.delta,
            emit_amplitudes: Some(s.emit_amplitudes),
            loss_sets: Some(s.loss_sets.clone()),
            lattice: Some(LatticePatch {
                n_sites: Some(l.n_sites),
                coupling: Some(l.coupling),
                drive_left: Some(l.drive_left),
                drive_right: Some(l.drive_right),
                frequency: l.frequency,
                loss: Some(l.loss.clone()),
            }),
            sweep: s.sweep.as_ref().map(|sw| SweepPatch {
                axis: Some(sw.axis),
                start: Some(sw.start),
                end: Some(sw.end),
                points: Some(sw.points),
                t_finals: Some(sw.t_finals.clone()),
            }),
            checks: Some(s.checks.clone()),
            ..Self::default()
        }
    }

    fn to_table(&self) -> Table {
        Table::try_from(self).expect("a config file always serializes to a table")
    }
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub verbosity: Verbosity,
}

/// Typed flags; `None` or `false` means not given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub out: Option<PathBuf>,
    pub tf: Option<f64>,
    pub steps_per_period: Option<usize>,
    pub delta: Option<f64>,
    pub emit_amplitudes: bool,
}

/// Everything `parse_config` reads.
#[derive(Debug, Clone, Default)]
pub struct Sources {
    pub preset: Option<String>,
    pub config_text: Option<String>,
    pub flags: Flags,
    /// `KEY=VALUE` assignments, applied after the typed flags.
    pub sets: Vec<String>,
    /// `FLOQ_OUT_DIR`, the default output directory.
    pub env_out_dir: Option<PathBuf>,
}

/// Serializes a resolved config so that parsing it back (for the same
/// command, without other sources) reproduces it.
pub fn emit(config: &RunConfig) -> String {
    let mut file = ConfigFile::from_scenario(&config.scenario);
    file.command = Some(config.command);
    file.out_dir = Some(config.out_dir.clone());
    file.verbosity = Some(config.verbosity);
    toml::to_string(&file).expect("a config file always serializes")
}

fn parse_error(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Parse(e.to_string())
}

/// Reads `text` strictly and returns it as a table.
fn file_layer(text: &str) -> Result<Table, ConfigError> {
    let mut table: Table = toml::from_str(text).map_err(parse_error)?;
    normalize_numbers(&mut table);
    deserialize(table.clone())?;
    Ok(table)
}

fn deserialize(table: Table) -> Result<ConfigFile, ConfigError> {
    Value::Table(table).try_into().map_err(parse_error)
}

fn normalize_numbers(table: &mut Table) {
    for (key, value) in table.iter_mut() {
        if !INTEGER_KEYS.contains(&key.as_str()) {
            normalize_value(value);
        } else if let Value::Table(t) = value {
            normalize_numbers(t);
        }
    }
}

fn normalize_value(value: &mut Value) {
    match value {
        Value::Integer(i) => *value = Value::Float(*i as f64),
        Value::Array(items) => items.iter_mut().for_each(normalize_value),
        Value::Table(t) => normalize_numbers(t),
        _ => {}
    }
}

/// `a.b=value` as a nested table. Values are TOML literals; anything that
/// does not parse as one is taken as a bare string.
fn set_layer(assignment: &str) -> Result<Table, ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::BadSet(assignment.to_string()))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::BadSet(assignment.to_string()));
    }
    let raw = raw.trim();
    let value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let mut table = Table::new();
    table.insert(keys[keys.len() - 1].to_string(), value);
    for key in keys[..keys.len() - 1].iter().rev() {
        let mut outer = Table::new();
        outer.insert((*key).to_string(), Value::Table(table));
        table = outer;
    }
    normalize_numbers(&mut table);
    Ok(table)
}

fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// First key set to different values in both tables.
fn conflict(a: &Table, b: &Table, prefix: &str) -> Option<ConfigError> {
    for (key, va) in a {
        let Some(vb) = b.get(key) else { continue };
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match (va, vb) {
            (Value::Table(ta), Value::Table(tb)) => {
                if let Some(e) = conflict(ta, tb, &path) {
                    return Some(e);
                }
            }
            _ if va != vb => {
                return Some(ConfigError::Conflict {
                    key: path,
                    first: va.to_string(),
                    second: vb.to_string(),
                });
            }
            _ => {}
        }
    }
    None
}

fn flag_layer(flags: &Flags) -> Table {
    let mut t = Table::new();
    if let Some(out) = &flags.out {
        t.insert("out_dir".into(), Value::String(out.display().to_string()));
    }
    if let Some(tf) = flags.tf {
        t.insert("t_final".into(), Value::Float(tf));
    }
    if let Some(steps) = flags.steps_per_period {
        t.insert("steps_per_period".into(), Value::Integer(steps as i64));
    }
    if let Some(delta) = flags.delta {
        t.insert("delta".into(), Value::Float(delta));
    }
    if flags.emit_amplitudes {
        t.insert("emit_amplitudes".into(), Value::Boolean(true));
    }
    t
}

/// Resolves a command and its sources into a validated run.
pub fn parse_config(command: Command, sources: &Sources) -> Result<RunConfig, ConfigError> {
    let file = match &sources.config_text {
        Some(text) => file_layer(text)?,
        None => Table::new(),
    };
    let flags = flag_layer(&sources.flags);
    let mut sets = Table::new();
    for assignment in &sources.sets {
        let layer = set_layer(assignment)?;
        if let Some(e) = conflict(&sets, &layer, "") {
            return Err(e);
        }
        merge(&mut sets, layer);
    }
    if let Some(e) = conflict(&flags, &sets, "") {
        return Err(e);
    }
    let mut cli = flags;
    merge(&mut cli, sets);
    if let Some(name) = &sources.preset {
        cli.insert("preset".into(), Value::String(name.clone()));
    }
    if let Some(e) = conflict(&file, &cli, "").filter(
        |e| matches!(e, ConfigError::Conflict { key, .. } if key == "preset" || key == "command"),
    ) {
        return Err(e);
    }

    let preset_name = cli
        .get("preset")
        .or_else(|| file.get("preset"))
        .and_then(Value::as_str)
        .map(str::to_string);
    let mut merged = match &preset_name {
        Some(name) => {
            let scenario = preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?;
            ConfigFile::from_scenario(&scenario).to_table()
        }
        None => Table::new(),
    };
    merge(&mut merged, file);
    let tf_given = cli.contains_key("t_final");
    merge(&mut merged, cli);
    match merged.get_mut("sweep") {
        Some(Value::Boolean(false)) => {
            merged.remove("sweep");
        }
        Some(Value::Table(sweep)) if tf_given => {
            sweep.remove("t_finals");
        }
        _ => {}
    }
    let config = deserialize(merged)?;
    if let Some(c) = config.command {
        if c != command {
            return Err(ConfigError::Conflict {
                key: "command".into(),
                first: c.name().into(),
                second: command.name().into(),
            });
        }
    }
    resolve(command, config, sources.env_out_dir.clone())
}

fn resolve(
    command: Command,
    c: ConfigFile,
    env_out_dir: Option<PathBuf>,
) -> Result<RunConfig, ConfigError> {
    let l = c.lattice.ok_or(ConfigError::Missing("lattice"))?;
    let lattice = LatticeSpec {
        n_sites: l.n_sites.ok_or(ConfigError::Missing("lattice.n_sites"))?,
        coupling: l.coupling.ok_or(ConfigError::Missing("lattice.coupling"))?,
        drive_left: l.drive_left.unwrap_or(0.0),
        drive_right: l.drive_right.unwrap_or(0.0),
        frequency: l.frequency,
        loss: l.loss.unwrap_or_default(),
    };
    let sweep = match c.sweep {
        Some(p) => Some(Sweep {
            axis: p.axis.ok_or(ConfigError::Missing("sweep.axis"))?,
            start: p.start.unwrap_or(0.0),
            end: p.end.unwrap_or(4.0),
            points: p.points.unwrap_or(81),
            t_finals: p.t_finals.unwrap_or_default(),
        }),
        None => None,
    };
    let mut output = c
        .output
        .unwrap_or_else(|| command.default_output(sweep.is_some()));
    let mut checks = c.checks.unwrap_or_default();
    if command.overrides_output() && output != OutputKind::Comparison {
        // Checks of another output kind name quantities this run lacks.
        output = OutputKind::Comparison;
        checks.clear();
    }
    if !command.accepts(output) {
        return Err(ConfigError::Incompatible {
            command: command.name(),
            output: output.name(),
        });
    }
    let t_final = c.t_final.ok_or(ConfigError::Missing("t_final"))?;
    let mut scenario = Scenario::new(
        c.name.as_deref().unwrap_or(command.name()),
        output,
        lattice,
        t_final,
    );
    scenario.description = c.description.unwrap_or_default();
    if let Some(site) = c.initial_site {
        scenario.initial_site = site;
    }
    if let Some(steps) = c.steps_per_period {
        scenario.steps_per_period = steps;
    }
    scenario.delta = c.delta;
    scenario.emit_amplitudes = c.emit_amplitudes.unwrap_or(false);
    scenario.loss_sets = c.loss_sets.unwrap_or_default();
    scenario.sweep = sweep;
    scenario.checks = checks;
    scenario.validate()?;

    Ok(RunConfig {
        command,
        scenario,
        out_dir: c
            .out_dir
            .or(env_out_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        verbosity: c.verbosity.unwrap_or_default(),
    })
}
