//! Named scenarios that regenerate the figure datasets.
//!
//! A [`Scenario`] bundles a lattice template, optional alternative loss
//! placements, the integration window and an optional drive sweep. Running
//! it writes a config echo, CSV data and a summary record into one output
//! directory. All integration is fixed-step, so identical configs produce
//! byte-identical files.

mod presets;
mod run;
mod studies;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floquet::FloquetError;
use crate::hfa::HfaError;
use crate::model::{Lattice, LatticeSpec, ModelError};
use crate::propagate::{AmplitudeState, PropagateError, TimeGrid};

pub use presets::{preset, preset_names};
pub use run::{run_scenario, CheckOutcome, RunSummary, VariantSummary};
pub use studies::{
    compare_analytic_numeric, dark_lifetime_study, spectrum_sweep, sweep_drive, Comparison,
    LifetimeRow, SpectrumSweep, SweepResult,
};

/// Runs at or beyond this final time store samples at period boundaries only.
pub const LONG_RUN: f64 = 1000.0;
/// Sample stride of shorter runs, in integration steps.
pub const SHORT_RUN_STRIDE: usize = 10;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Hfa(#[from] HfaError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("summary serialization failed: {0}")]
    Toml(#[from] toml::ser::Error),
    #[error("scenario {scenario}: {source}")]
    InScenario {
        scenario: String,
        #[source]
        source: Box<ExperimentError>,
    },
}

impl ExperimentError {
    /// True for failures of the numerics (non-finite state, defective
    /// eigenproblem) as opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Self::Propagate(e) => matches!(e, PropagateError::NonFinite(_)),
            Self::Floquet(e) => matches!(
                e,
                FloquetError::Degenerate
                    | FloquetError::Eigen(_)
                    | FloquetError::Propagation(PropagateError::NonFinite(_))
            ),
            Self::Hfa(e) => matches!(e, HfaError::Critical),
            Self::InScenario { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    fn in_scenario(self, name: &str) -> Self {
        match self {
            e @ Self::InScenario { .. } => e,
            e => Self::InScenario {
                scenario: name.to_string(),
                source: Box::new(e),
            },
        }
    }
}

/// Drive amplitude swept in units of ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveAxis {
    /// `A₁/ω`.
    LeftRatio,
    /// `A₂/ω`.
    RightRatio,
}

impl DriveAxis {
    pub fn label(self) -> &'static str {
        match self {
            Self::LeftRatio => "A1_over_omega",
            Self::RightRatio => "A2_over_omega",
        }
    }

    /// The lattice with this axis set to `ratio·ω`.
    pub fn apply(self, spec: &LatticeSpec, ratio: f64) -> Result<LatticeSpec, ExperimentError> {
        let omega = spec
            .frequency
            .ok_or_else(|| ExperimentError::Invalid("a drive sweep needs a frequency".into()))?;
        let mut out = spec.clone();
        match self {
            Self::LeftRatio => out.drive_left = ratio * omega,
            Self::RightRatio => out.drive_right = ratio * omega,
        }
        Ok(out)
    }

    /// Current value of this axis on a lattice, zero when undriven.
    pub fn value(self, spec: &LatticeSpec) -> f64 {
        let amplitude = match self {
            Self::LeftRatio => spec.drive_left,
            Self::RightRatio => spec.drive_right,
        };
        spec.frequency.map_or(0.0, |w| amplitude / w)
    }
}

fn default_start() -> f64 {
    0.0
}

fn default_end() -> f64 {
    4.0
}

fn default_points() -> usize {
    81
}

/// Uniform sweep of one drive ratio, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: DriveAxis,
    #[serde(default = "default_start")]
    pub start: f64,
    #[serde(default = "default_end")]
    pub end: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Final times of the equilibrium runs; empty means the scenario's `t_final`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_finals: Vec<f64>,
}

impl Sweep {
    /// 81 points on `[0, 4]`.
    pub fn new(axis: DriveAxis) -> Self {
        Self {
            axis,
            start: default_start(),
            end: default_end(),
            points: default_points(),
            t_finals: Vec::new(),
        }
    }

    pub fn with_t_finals(mut self, t_finals: &[f64]) -> Self {
        self.t_finals = t_finals.to_vec();
        self
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end
                } else {
                    self.start + (self.end - self.start) * i as f64 / last
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if !self.start.is_finite() || !self.end.is_finite() || self.start >= self.end {
            return Err(ExperimentError::Invalid(format!(
                "sweep range [{}, {}] must be finite and increasing",
                self.start, self.end
            )));
        }
        if self.points < 2 {
            return Err(ExperimentError::Invalid(format!(
                "a sweep needs at least 2 points, got {}",
                self.points
            )));
        }
        if self.t_finals.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(ExperimentError::Invalid(
                "sweep t_finals must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// What a scenario produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// Populations versus time.
    Trajectory,
    /// `⟨P⟩_equ` and `⟨P_n/P⟩_equ` along a sweep.
    Equilibrium,
    /// Quasienergies, per sweep point when sweeping.
    Spectrum,
    /// Time-averaged populations of the dark Floquet mode.
    DarkMode,
    /// `-Im ε` of the dark mode, per loss placement.
    DarkLifetime,
    /// Closed-form versus numerical populations for three sites.
    Comparison,
}

impl OutputKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Trajectory => "trajectory",
            Self::Equilibrium => "equilibrium",
            Self::Spectrum => "spectrum",
            Self::DarkMode => "dark_mode",
            Self::DarkLifetime => "dark_lifetime",
            Self::Comparison => "comparison",
        }
    }
}

/// Acceptance window on a summary scalar, checked for every variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub quantity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Check {
    pub fn between(quantity: &str, min: f64, max: f64) -> Self {
        Self {
            quantity: quantity.to_string(),
            min: Some(min),
            max: Some(max),
        }
    }

    pub fn at_least(quantity: &str, min: f64) -> Self {
        Self {
            quantity: quantity.to_string(),
            min: Some(min),
            max: None,
        }
    }

    pub fn accepts(&self, value: f64) -> bool {
        self.min.is_none_or(|m| value >= m) && self.max.is_none_or(|m| value <= m)
    }
}

fn default_initial_site() -> usize {
    1
}

fn default_steps_per_period() -> usize {
    TimeGrid::DEFAULT_STEPS_PER_PERIOD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub output: OutputKind,
    /// 1-based site holding the particle at `t = 0`.
    #[serde(default = "default_initial_site")]
    pub initial_site: usize,
    pub t_final: f64,
    #[serde(default = "default_steps_per_period")]
    pub steps_per_period: usize,
    /// Equilibrium window; `t_final/2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub emit_amplitudes: bool,
    /// Alternative even-site loss rates `(α₂, α₄, ...)`, each run as a
    /// separate variant. Empty means the lattice's own loss profile.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_sets: Vec<Vec<f64>>,
    pub lattice: LatticeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

/// One loss placement of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    /// Empty for a scenario without alternative loss sets.
    pub label: String,
    pub spec: LatticeSpec,
}

impl Variant {
    /// File-name suffix, `_<label>` or empty.
    pub fn suffix(&self) -> String {
        if self.label.is_empty() {
            String::new()
        } else {
            format!("_{}", self.label)
        }
    }
}

/// `loss_1_0` for rates `(1, 0)`.
pub fn loss_label(rates: &[f64]) -> String {
    let mut s = String::from("loss");
    for r in rates {
        let _ = write!(s, "_{r}");
    }
    s
}

impl Scenario {
    pub fn new(name: &str, output: OutputKind, lattice: LatticeSpec, t_final: f64) -> Self {
        Self {
            name: name.to_string(),
            description: String::new(),
            output,
            initial_site: default_initial_site(),
            t_final,
            steps_per_period: default_steps_per_period(),
            delta: None,
            emit_amplitudes: false,
            loss_sets: Vec::new(),
            lattice,
            sweep: None,
            checks: Vec::new(),
        }
    }

    pub fn describe(mut self, text: &str) -> Self {
        self.description = text.to_string();
        self
    }

    pub fn with_loss_sets(mut self, sets: &[&[f64]]) -> Self {
        self.loss_sets = sets.iter().map(|s| s.to_vec()).collect();
        self
    }

    pub fn with_sweep(mut self, sweep: Sweep) -> Self {
        self.sweep = Some(sweep);
        self
    }

    pub fn with_check(mut self, check: Check) -> Self {
        self.checks.push(check);
        self
    }

    /// Equilibrium window for a run ending at `t_final`.
    pub fn delta_for(&self, t_final: f64) -> f64 {
        self.delta.unwrap_or(0.5 * t_final)
    }

    /// Final times of the runs: the sweep's list, or `t_final`.
    pub fn t_finals(&self) -> Vec<f64> {
        match &self.sweep {
            Some(s) if !s.t_finals.is_empty() => s.t_finals.clone(),
            _ => vec![self.t_final],
        }
    }

    pub fn variants(&self) -> Vec<Variant> {
        if self.loss_sets.is_empty() {
            return vec![Variant {
                label: String::new(),
                spec: self.lattice.clone(),
            }];
        }
        self.loss_sets
            .iter()
            .map(|set| Variant {
                label: loss_label(set),
                spec: self.lattice.clone().with_even_losses(set),
            })
            .collect()
    }

    /// Checks every field; the lattice of each variant (and of each sweep
    /// point's drive) is validated through the model.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.validate_inner().map_err(|e| e.in_scenario(&self.name))
    }

    fn validate_inner(&self) -> Result<(), ExperimentError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(ExperimentError::Invalid(format!(
                "scenario name {:?} must be non-empty and use only [A-Za-z0-9_-]",
                self.name
            )));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(ExperimentError::Invalid(format!(
                "t_final must be positive and finite, got {}",
                self.t_final
            )));
        }
        let n = self.lattice.n_sites;
        if self.initial_site == 0 || self.initial_site > n {
            return Err(ExperimentError::Invalid(format!(
                "initial site {} is outside 1..={n}",
                self.initial_site
            )));
        }
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        for t_final in self.t_finals() {
            let delta = self.delta_for(t_final);
            if !(delta > 0.0) || delta > t_final {
                return Err(ExperimentError::Invalid(format!(
                    "averaging window {delta} must lie in (0, t_f = {t_final}]"
                )));
            }
        }
        let eligible = (n.saturating_sub(1)) / 2;
        for set in &self.loss_sets {
            if set.len() != eligible {
                return Err(ExperimentError::Invalid(format!(
                    "loss set {set:?} has {} rates; a {n}-site chain has {eligible} lossy candidates",
                    set.len()
                )));
            }
        }
        for variant in self.variants() {
            let lattice = variant.spec.clone().validate()?;
            if let Some(sweep) = &self.sweep {
                for x in [sweep.start, sweep.end] {
                    sweep.axis.apply(&variant.spec, x)?.validate()?;
                }
            }
            self.validate_output(&lattice)?;
        }
        Ok(())
    }

    fn validate_output(&self, lattice: &Lattice) -> Result<(), ExperimentError> {
        let needs_sweep = matches!(self.output, OutputKind::Equilibrium);
        if needs_sweep && self.sweep.is_none() {
            return Err(ExperimentError::Invalid(format!(
                "output {} needs a sweep",
                self.output.name()
            )));
        }
        match self.output {
            OutputKind::Comparison => {
                if lattice.n_sites() != 3 {
                    return Err(ExperimentError::Invalid(
                        "the analytic comparison covers 3 sites".into(),
                    ));
                }
                if self.initial_site != 1 {
                    return Err(ExperimentError::Invalid(
                        "the closed forms assume the particle starts on site 1".into(),
                    ));
                }
            }
            OutputKind::DarkLifetime => {
                if self.sweep.is_none() && !lattice.is_driven() {
                    return Err(FloquetError::Undriven.into());
                }
                if !lattice.is_dissipative() {
                    return Err(FloquetError::Conservative.into());
                }
            }
            OutputKind::Spectrum | OutputKind::DarkMode
                if self.sweep.is_some() && lattice.frequency().is_none() =>
            {
                return Err(FloquetError::NoPeriod.into());
            }
            _ => {}
        }
        Ok(())
    }

    /// The particle on [`Scenario::initial_site`].
    pub fn initial_state(&self, n_sites: usize) -> Result<AmplitudeState, ExperimentError> {
        Ok(AmplitudeState::localized(n_sites, self.initial_site)?)
    }

    /// Integration grid for one run on `lattice`.
    pub fn grid(&self, lattice: &Lattice, t_final: f64) -> TimeGrid {
        let step = crate::propagate::default_step(lattice, self.steps_per_period);
        let stride = if t_final >= LONG_RUN {
            self.steps_per_period
        } else {
            SHORT_RUN_STRIDE
        };
        TimeGrid::new(0.0, t_final, step).with_stride(stride)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        let lattice = LatticeSpec::chain(3, 1.0)
            .with_frequency(20.0)
            .with_drive(20.0, 0.0)
            .with_loss_at(2, 1.0);
        Scenario::new("probe", OutputKind::Trajectory, lattice, 30.0)
    }

    #[test]
    fn defaults_and_window() {
        let s = base();
        s.validate().unwrap();
        assert_eq!(s.delta_for(30.0), 15.0);
        assert_eq!(s.t_finals(), vec![30.0]);
        assert_eq!(s.variants().len(), 1);
        assert_eq!(s.variants()[0].suffix(), "");
    }

    #[test]
    fn sweep_grid_includes_endpoints() {
        let v = Sweep::new(DriveAxis::LeftRatio).values();
        assert_eq!(v.len(), 81);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[80], 4.0);
        assert!((v[48] - 2.4).abs() < 1e-15);
    }

    #[test]
    fn invalid_ranges_rejected() {
        let mut s = base().with_sweep(Sweep::new(DriveAxis::LeftRatio));
        s.sweep.as_mut().unwrap().points = 1;
        assert!(s.validate().is_err());
        s.sweep.as_mut().unwrap().points = 5;
        s.sweep.as_mut().unwrap().end = -1.0;
        assert!(s.validate().is_err());
        let mut s = base();
        s.delta = Some(31.0);
        assert!(s.validate().is_err());
        let mut s = base();
        s.initial_site = 4;
        assert!(s.validate().is_err());
    }

    #[test]
    fn loss_sets_expand_to_variants() {
        let lattice = LatticeSpec::chain(5, 1.0).with_frequency(20.0);
        let s = Scenario::new("five", OutputKind::Trajectory, lattice, 10.0)
            .with_loss_sets(&[&[0.0, 1.0], &[1.0, 0.0]]);
        s.validate().unwrap();
        let v = s.variants();
        assert_eq!(v[0].label, "loss_0_1");
        assert_eq!(v[1].spec.loss, vec![0.0, 1.0, 0.0, 0.0, 0.0]);

        let bad = s.clone().with_loss_sets(&[&[1.0]]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn errors_carry_scenario_name() {
        let mut s = base();
        s.lattice.coupling = -1.0;
        let e = s.validate().unwrap_err();
        assert!(e.to_string().starts_with("scenario probe:"), "{e}");
        assert!(!e.is_numerical());
    }

    #[test]
    fn long_runs_sample_once_per_period() {
        let s = base();
        let lat = s.lattice.clone().validate().unwrap();
        assert_eq!(s.grid(&lat, 100.0).sample_stride, SHORT_RUN_STRIDE);
        assert_eq!(s.grid(&lat, 1000.0).sample_stride, 1000);
    }
}
