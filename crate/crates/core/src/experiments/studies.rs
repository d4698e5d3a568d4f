//! Sweeps, the analytic comparison and the dark-lifetime table.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{DriveAxis, ExperimentError, Scenario, Variant};
use crate::floquet::{
    dark_decay_rate_with, dark_state, monodromy, quasienergy_spectrum, static_modes,
    DecayMeasurement, FloquetError, MIN_DECAY_STEPS, MIN_MONODROMY_STEPS, TRUST_FLOOR,
};
use crate::hfa::{analytic_populations, effective_model};
use crate::linalg::eigenvalues;
use crate::model::{hamiltonian_at, Lattice, LatticeSpec};
use crate::propagate::{default_step, equilibrium_average, evolve, AmplitudeState, TimeGrid};

/// Smallest `ω/v` for which the high-frequency closed forms are compared.
pub const MIN_COMPARISON_RATIO: f64 = 10.0;

/// `⟨P⟩_equ`, `⟨P_n⟩_equ` and `⟨P_n/P⟩_equ` along one sweep, for one loss
/// placement and one final time.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variant: String,
    pub axis: DriveAxis,
    pub t_final: f64,
    pub delta: f64,
    pub values: Vec<f64>,
    pub total: Vec<f64>,
    pub per_site: Vec<Vec<f64>>,
    pub ratio: Vec<Vec<f64>>,
}

impl SweepResult {
    /// Axis value and height of the largest `⟨P⟩_equ`; the first one wins
    /// on exact ties.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = 0;
        for (k, &p) in self.total.iter().enumerate() {
            if p > self.total[best] {
                best = k;
            }
        }
        (self.values[best], self.total[best])
    }

    /// Width of the region where `⟨P⟩_equ` is at least `fraction` of the peak
    /// height, measured on the sweep grid around the peak.
    pub fn width_at(&self, fraction: f64) -> f64 {
        let (x_peak, p_peak) = self.peak();
        let level = fraction * p_peak;
        let k = self.values.iter().position(|&x| x == x_peak).unwrap_or(0);
        let mut lo = k;
        while lo > 0 && self.total[lo - 1] >= level {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < self.total.len() && self.total[hi + 1] >= level {
            hi += 1;
        }
        self.values[hi] - self.values[lo]
    }
}

/// Runs the equilibrium sweep of a scenario: one result per loss placement
/// and final time, in that order. Points run concurrently; the assembly is
/// ordered by axis value.
pub fn sweep_drive(s: &Scenario) -> Result<Vec<SweepResult>, ExperimentError> {
    s.validate()?;
    let sweep = s
        .sweep
        .as_ref()
        .ok_or_else(|| ExperimentError::Invalid("sweep_drive needs a sweep".into()))?;
    let values = sweep.values();
    let variants = s.variants();
    let t_finals = s.t_finals();

    let (nv, nt, nx) = (variants.len(), t_finals.len(), values.len());
    let jobs: Vec<(usize, usize, usize)> = (0..nv)
        .flat_map(|v| (0..nt).flat_map(move |t| (0..nx).map(move |x| (v, t, x))))
        .collect();
    let averages = jobs
        .par_iter()
        .map(|&(v, t, x)| {
            let spec = sweep.axis.apply(&variants[v].spec, values[x])?;
            let lattice = spec.validate()?;
            let t_final = t_finals[t];
            let grid = s.grid(&lattice, t_final);
            let traj = evolve(&lattice, &s.initial_state(lattice.n_sites())?, &grid)?;
            Ok(equilibrium_average(&traj, s.delta_for(t_final))?)
        })
        .collect::<Result<Vec<_>, ExperimentError>>()
        .map_err(|e| e.in_scenario(&s.name))?;

    let mut out = Vec::with_capacity(variants.len() * t_finals.len());
    let mut chunks = averages.chunks(values.len());
    for variant in &variants {
        for &t_final in &t_finals {
            let chunk = chunks.next().expect("one chunk per series");
            out.push(SweepResult {
                variant: variant.label.clone(),
                axis: sweep.axis,
                t_final,
                delta: s.delta_for(t_final),
                values: values.clone(),
                total: chunk.iter().map(|a| a.total).collect(),
                per_site: chunk.iter().map(|a| a.per_site.clone()).collect(),
                ratio: chunk.iter().map(|a| a.ratio.clone()).collect(),
            });
        }
    }
    Ok(out)
}

/// Quasienergies per sweep point for one loss placement.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSweep {
    pub variant: String,
    pub axis: Option<DriveAxis>,
    pub values: Vec<f64>,
    /// Sorted by decreasing `Im ε` (least lossy first), then by `Re ε`.
    pub quasienergies: Vec<Vec<Complex64>>,
}

/// Monodromy quasienergies of a driven lattice, or static eigenvalues when
/// no frequency is set.
pub(crate) fn spectrum_at(
    lattice: &Lattice,
    steps: usize,
) -> Result<Vec<Complex64>, ExperimentError> {
    let mut eps: Vec<Complex64> = if lattice.frequency().is_some() {
        let m = monodromy(lattice, steps.max(MIN_MONODROMY_STEPS))?;
        quasienergy_spectrum(&m)?.iter().map(|q| q.value).collect()
    } else {
        eigenvalues(hamiltonian_at(lattice, 0.0).entries()).map_err(FloquetError::from)?
    };
    eps.sort_by(|a, b| b.im.total_cmp(&a.im).then(a.re.total_cmp(&b.re)));
    Ok(eps)
}

/// Spectrum of every variant, along the sweep if one is set.
pub fn spectrum_sweep(s: &Scenario) -> Result<Vec<SpectrumSweep>, ExperimentError> {
    s.validate()?;
    let (axis, values) = match &s.sweep {
        Some(sw) => (Some(sw.axis), sw.values()),
        None => (None, vec![DriveAxis::LeftRatio.value(&s.lattice)]),
    };
    let variants = s.variants();
    let nx = values.len();
    let jobs: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..nx).map(move |x| (v, x)))
        .collect();
    let spectra = jobs
        .par_iter()
        .map(|&(v, x)| {
            let lattice = point_lattice(&variants[v], axis, values[x])?;
            spectrum_at(&lattice, s.steps_per_period)
        })
        .collect::<Result<Vec<_>, ExperimentError>>()
        .map_err(|e| e.in_scenario(&s.name))?;
    Ok(variants
        .iter()
        .zip(spectra.chunks(values.len()))
        .map(|(variant, chunk)| SpectrumSweep {
            variant: variant.label.clone(),
            axis,
            values: values.clone(),
            quasienergies: chunk.to_vec(),
        })
        .collect())
}

pub(crate) fn point_lattice(
    variant: &Variant,
    axis: Option<DriveAxis>,
    value: f64,
) -> Result<Lattice, ExperimentError> {
    let spec = match axis {
        Some(a) => a.apply(&variant.spec, value)?,
        None => variant.spec.clone(),
    };
    Ok(spec.validate()?)
}

/// Closed-form versus numerical populations on a common time grid.
/// Channels are `P₁, P₂, P₃, P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub times: Vec<f64>,
    pub numeric: Vec<[f64; 4]>,
    pub analytic: Vec<[f64; 4]>,
    pub sup: [f64; 4],
    pub rms: [f64; 4],
}

impl Comparison {
    /// Largest deviation over all channels.
    pub fn sup_deviation(&self) -> f64 {
        self.sup.iter().copied().fold(0.0, f64::max)
    }
}

/// Compares the high-frequency closed forms with direct integration of a
/// 3-site chain started on site 1, over `[0, t_final]`.
pub fn compare_analytic_numeric(
    lattice: &Lattice,
    t_final: f64,
    steps_per_period: usize,
) -> Result<Comparison, ExperimentError> {
    let analytic = effective_model(lattice)?;
    if lattice.is_driven() {
        let omega = lattice.frequency().unwrap_or(0.0);
        if omega / lattice.coupling() < MIN_COMPARISON_RATIO {
            return Err(ExperimentError::Invalid(format!(
                "ω/v = {} is below {MIN_COMPARISON_RATIO}; the closed forms do not apply",
                omega / lattice.coupling()
            )));
        }
    }
    let grid = TimeGrid::new(0.0, t_final, default_step(lattice, steps_per_period))
        .with_stride(super::SHORT_RUN_STRIDE);
    let traj = evolve(lattice, &AmplitudeState::localized(3, 1)?, &grid)?;

    let mut numeric = Vec::with_capacity(traj.len());
    let mut closed = Vec::with_capacity(traj.len());
    let mut sup = [0.0_f64; 4];
    let mut sq = [0.0_f64; 4];
    for (k, &t) in traj.times.iter().enumerate() {
        let p = &traj.populations[k];
        let num = [p[0], p[1], p[2], traj.total[k]];
        let a = analytic_populations(&analytic, t)?;
        let ana = [a.sites[0], a.sites[1], a.sites[2], a.total];
        for c in 0..4 {
            let d = (num[c] - ana[c]).abs();
            sup[c] = sup[c].max(d);
            sq[c] += d * d;
        }
        numeric.push(num);
        closed.push(ana);
    }
    let count = traj.len() as f64;
    Ok(Comparison {
        times: traj.times,
        numeric,
        analytic: closed,
        sup,
        rms: sq.map(|s| (s / count).sqrt()),
    })
}

/// Dark-mode quasienergy and decay measurement of one lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeRow {
    pub placement: Vec<f64>,
    pub first_lossy_site: Option<usize>,
    pub quasienergy: Complex64,
    /// `-Im ε_dark` as computed, including values below the floor.
    pub raw_neg_imag: f64,
    pub measurement: DecayMeasurement,
    pub even_site_population: f64,
}

/// Dark-mode decay of a driven lattice through the monodromy; undriven
/// lattices use the static eigenproblem.
pub(crate) fn lifetime_at(
    lattice: &Lattice,
    placement: Vec<f64>,
    steps: usize,
) -> Result<LifetimeRow, ExperimentError> {
    let (quasienergy, even) = if lattice.is_driven() {
        let d = dark_decay_rate_with(lattice, steps.max(MIN_DECAY_STEPS))?;
        (d.quasienergy, d.dark.mode.even_site_population())
    } else {
        let modes = static_modes(lattice)?;
        let dark = dark_state(&modes).expect("a chain has at least two modes");
        (dark.mode.quasienergy, dark.mode.even_site_population())
    };
    let raw = -quasienergy.im;
    Ok(LifetimeRow {
        placement,
        first_lossy_site: lattice.first_lossy_site(),
        quasienergy,
        raw_neg_imag: raw,
        measurement: if raw < TRUST_FLOOR {
            DecayMeasurement::BelowFloor
        } else {
            DecayMeasurement::Measured(raw)
        },
        even_site_population: even,
    })
}

/// `-Im ε_dark` for each even-site loss placement of an odd chain driven on
/// the left end only. Rows follow the order of `placements`.
pub fn dark_lifetime_study(
    base: &LatticeSpec,
    placements: &[Vec<f64>],
    steps: usize,
) -> Result<Vec<LifetimeRow>, ExperimentError> {
    if base.n_sites.is_multiple_of(2) {
        return Err(ExperimentError::Invalid(format!(
            "the lifetime study needs an odd chain, got N = {}",
            base.n_sites
        )));
    }
    if base.drive_right != 0.0 {
        return Err(ExperimentError::Invalid(
            "the lifetime study drives the left end only (A2 = 0)".into(),
        ));
    }
    placements
        .par_iter()
        .map(|set| {
            let lattice = base.clone().with_even_losses(set).validate()?;
            if !lattice.is_driven() {
                return Err(FloquetError::Undriven.into());
            }
            lifetime_at(&lattice, set.clone(), steps)
        })
        .collect()
}
