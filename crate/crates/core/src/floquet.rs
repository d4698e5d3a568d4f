//! One-period propagator, complex quasienergies and Floquet modes.
//!
//! For a drive of period `T` the monodromy matrix `U(T)` has eigenvalues
//! `λ = exp(-iεT)`. With loss the quasienergies `ε` acquire negative
//! imaginary parts; `-Im ε` of the dark mode sets how long the chain stays
//! in its sink state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{eigendecompose, eigenvalues, EigenError};
use crate::model::{hamiltonian_at, Lattice};
use crate::propagate::{integrate, AmplitudeState, PropagateError, StepSize, TimeGrid};

/// Minimum resolution for monodromy assembly.
pub const MIN_MONODROMY_STEPS: usize = 1000;
/// Minimum resolution for dark-state decay measurements.
pub const MIN_DECAY_STEPS: usize = 4000;
/// Smallest `-Im ε` reported as a measurement.
pub const TRUST_FLOOR: f64 = 1e-11;
/// Samples per period of the periodic part of each mode.
pub const MODE_SAMPLES: usize = 256;
/// Eigenvector overlap above which two modes are considered merged.
const MERGED_OVERLAP: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FloquetError {
    #[error("the lattice has no drive frequency, so no period is defined")]
    NoPeriod,
    #[error("{steps} steps per period is below the required {min}")]
    TooFewSteps { steps: usize, min: usize },
    #[error("decay rates need a driven chain")]
    Undriven,
    #[error("decay rates need at least one lossy site")]
    Conservative,
    #[error("quasienergies are degenerate (critical damping?); modes are not separable")]
    Degenerate,
    #[error(transparent)]
    Propagation(#[from] PropagateError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// One-period propagator `U(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy {
    pub matrix: DMatrix<Complex64>,
    pub period: f64,
    pub frequency: f64,
    pub steps: usize,
}

impl Monodromy {
    /// Largest `‖U†U − I‖` entry, a unitarity check.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let gram = self.matrix.adjoint() * &self.matrix;
        (gram - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Propagates each site basis state over one period.
pub fn monodromy(lattice: &Lattice, steps_per_period: usize) -> Result<Monodromy, FloquetError> {
    if steps_per_period < MIN_MONODROMY_STEPS {
        return Err(FloquetError::TooFewSteps {
            steps: steps_per_period,
            min: MIN_MONODROMY_STEPS,
        });
    }
    let period = lattice.period().ok_or(FloquetError::NoPeriod)?;
    let frequency = lattice.frequency().ok_or(FloquetError::NoPeriod)?;
    let n = lattice.n_sites();
    let grid = TimeGrid::new(0.0, period, StepSize::PerPeriod(steps_per_period))
        .with_stride(steps_per_period);

    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let start = AmplitudeState::localized(n, k + 1)?;
            integrate(lattice, &start, &grid, |_, _| {}).map(|s| s.amplitudes)
        })
        .collect::<Result<_, PropagateError>>()?;

    let matrix = DMatrix::from_fn(n, n, |i, j| columns[j][i]);
    Ok(Monodromy {
        matrix,
        period,
        frequency,
        steps: steps_per_period,
    })
}

/// Folds a real quasienergy into `(-ω/2, ω/2]`.
pub fn fold_quasienergy(re: f64, omega: f64) -> f64 {
    let half = 0.5 * omega;
    let mut x = re - omega * ((re + half) / omega).floor();
    // x now in [-ω/2, ω/2); move the closed end to the right.
    if x <= -half {
        x += omega;
    }
    x
}

/// Complex quasienergy together with the Floquet multiplier it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quasienergy {
    pub value: Complex64,
    /// `λ = exp(-iεT)`; zero for a totally absorbed mode.
    pub multiplier: Complex64,
}

impl Quasienergy {
    /// `ε = (i/T) ln λ` on the principal branch, real part folded.
    /// An exactly vanishing multiplier yields `Im ε = -∞`.
    pub fn from_multiplier(multiplier: Complex64, period: f64, omega: f64) -> Self {
        let value = if multiplier == Complex64::new(0.0, 0.0) {
            Complex64::new(0.0, f64::NEG_INFINITY)
        } else {
            let re = fold_quasienergy(-multiplier.arg() / period, omega);
            Complex64::new(re, multiplier.norm().ln() / period)
        };
        Self { value, multiplier }
    }

    pub fn is_absorbed(&self) -> bool {
        self.value.im == f64::NEG_INFINITY
    }
}

/// Quasienergies from the eigenvalues of `U(T)`, in eigensolver order.
/// Defective monodromies (critical damping) are accepted here.
pub fn quasienergy_spectrum(m: &Monodromy) -> Result<Vec<Quasienergy>, FloquetError> {
    Ok(eigenvalues(&m.matrix)?
        .iter()
        .map(|&l| Quasienergy::from_multiplier(l, m.period, m.frequency))
        .collect())
}

/// A Floquet state `c(t) = c'(t) e^{-iεt}` with periodic `c'`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMode {
    pub quasienergy: Complex64,
    pub frequency: Option<f64>,
    /// Sample times over one period, `0` and `T` included. A single sample
    /// for static modes.
    pub sample_times: Vec<f64>,
    /// `c'_n(t)` at each sample time.
    pub periodic: Vec<Vec<Complex64>>,
    /// `⟨P'_n⟩ = (1/T)∫|c'_n|² dt`, normalized to sum to one.
    pub mean_populations: Vec<f64>,
}

impl FloquetMode {
    /// `Σ_{even n} ⟨P'_n⟩` (1-based parity).
    pub fn even_site_population(&self) -> f64 {
        self.mean_populations.iter().skip(1).step_by(2).sum()
    }

    /// Mismatch `max_n |c'_n(T) − c'_n(0)|` of the periodic part.
    pub fn periodicity_defect(&self) -> f64 {
        let (first, last) = (&self.periodic[0], &self.periodic[self.periodic.len() - 1]);
        first
            .iter()
            .zip(last)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn separated(eig: &crate::linalg::EigenDecomposition) -> Result<(), FloquetError> {
    if eig.max_overlap() > MERGED_OVERLAP {
        Err(FloquetError::Degenerate)
    } else {
        Ok(())
    }
}

fn decompose(
    matrix: &DMatrix<Complex64>,
) -> Result<crate::linalg::EigenDecomposition, FloquetError> {
    let eig = match eigendecompose(matrix) {
        Err(EigenError::Residual { .. }) => return Err(FloquetError::Degenerate),
        other => other?,
    };
    separated(&eig)?;
    Ok(eig)
}

/// Floquet modes from the monodromy eigenvectors. Each eigenvector is
/// propagated over one period and its phase `e^{-iεt}` removed.
pub fn floquet_modes(lattice: &Lattice, m: &Monodromy) -> Result<Vec<FloquetMode>, FloquetError> {
    let eig = decompose(&m.matrix)?;
    let n = lattice.n_sites();
    let steps = m.steps.div_ceil(MODE_SAMPLES) * MODE_SAMPLES;
    let grid =
        TimeGrid::new(0.0, m.period, StepSize::PerPeriod(steps)).with_stride(steps / MODE_SAMPLES);

    (0..n)
        .into_par_iter()
        .map(|k| {
            let q = Quasienergy::from_multiplier(eig.values[k], m.period, m.frequency);
            let start = AmplitudeState::new(eig.vector(k).iter().copied().collect(), 0.0);
            let mut times = Vec::with_capacity(MODE_SAMPLES + 1);
            let mut periodic = Vec::with_capacity(MODE_SAMPLES + 1);
            // Any representative of ε modulo ω leaves e^{iεt}c(t) periodic.
            let eps = if q.is_absorbed() {
                Complex64::new(0.0, 0.0)
            } else {
                q.value
            };
            integrate(lattice, &start, &grid, |t, c| {
                let phase = (Complex64::new(0.0, 1.0) * eps * t).exp();
                times.push(t);
                periodic.push(c.iter().map(|z| z * phase).collect::<Vec<_>>());
            })?;
            let mean_populations = mean_populations(&times, &periodic);
            Ok(FloquetMode {
                quasienergy: q.value,
                frequency: Some(m.frequency),
                sample_times: times,
                periodic,
                mean_populations,
            })
        })
        .collect()
}

fn mean_populations(times: &[f64], periodic: &[Vec<Complex64>]) -> Vec<f64> {
    let n = periodic[0].len();
    let mut acc = vec![0.0; n];
    for k in 1..times.len() {
        let h = 0.5 * (times[k] - times[k - 1]);
        for (site, a) in acc.iter_mut().enumerate() {
            *a += h * (periodic[k - 1][site].norm_sqr() + periodic[k][site].norm_sqr());
        }
    }
    let total: f64 = acc.iter().sum();
    if total > 0.0 {
        acc.iter_mut().for_each(|a| *a /= total);
    }
    acc
}

/// Modes of an undriven chain from the static eigenproblem of `H`.
pub fn static_modes(lattice: &Lattice) -> Result<Vec<FloquetMode>, FloquetError> {
    let h = hamiltonian_at(lattice, 0.0);
    let eig = decompose(h.entries())?;
    Ok((0..lattice.n_sites())
        .map(|k| {
            let v: Vec<Complex64> = eig.vector(k).iter().copied().collect();
            let pops: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
            let total: f64 = pops.iter().sum();
            FloquetMode {
                quasienergy: eig.values[k],
                frequency: lattice.frequency(),
                sample_times: vec![0.0],
                periodic: vec![v],
                mean_populations: pops.iter().map(|p| p / total).collect(),
            }
        })
        .collect())
}

/// Floquet modes through the monodromy route when driven, or the static
/// eigenproblem otherwise.
pub fn modes_for(
    lattice: &Lattice,
    steps_per_period: usize,
) -> Result<Vec<FloquetMode>, FloquetError> {
    if lattice.is_driven() {
        let m = monodromy(lattice, steps_per_period)?;
        floquet_modes(lattice, &m)
    } else {
        static_modes(lattice)
    }
}

/// The mode identified as the dark Floquet state.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkState {
    pub index: usize,
    pub mode: FloquetMode,
    /// Set when even the smallest `|ε|` exceeds `ω/10`.
    pub no_dark_state: bool,
}

/// Picks the mode with the smallest `|ε|`; near-ties go to the mode with
/// less even-site population. Returns `None` for an empty list.
pub fn dark_state(modes: &[FloquetMode]) -> Option<DarkState> {
    let mut best: Option<usize> = None;
    for (k, mode) in modes.iter().enumerate() {
        best = Some(match best {
            None => k,
            Some(b) => {
                let (mb, mk) = (modes[b].quasienergy.norm(), mode.quasienergy.norm());
                let tie = (mb - mk).abs() <= 1e-12 * mb.max(mk).max(1.0);
                if tie {
                    if mode.even_site_population() < modes[b].even_site_population() {
                        k
                    } else {
                        b
                    }
                } else if mk < mb {
                    k
                } else {
                    b
                }
            }
        });
    }
    let index = best?;
    let mode = modes[index].clone();
    let no_dark_state = mode
        .frequency
        .is_some_and(|w| mode.quasienergy.norm() > w / 10.0);
    Some(DarkState {
        index,
        mode,
        no_dark_state,
    })
}

/// `-Im ε` of the dark mode, or a marker when it is below [`TRUST_FLOOR`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayMeasurement {
    Measured(f64),
    BelowFloor,
}

impl DecayMeasurement {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Measured(x) => Some(*x),
            Self::BelowFloor => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarkDecay {
    pub quasienergy: Complex64,
    /// `-Im ε_dark` as computed, including sub-floor values.
    pub raw_neg_imag: f64,
    pub measurement: DecayMeasurement,
    pub dark: DarkState,
    pub steps: usize,
}

impl DarkDecay {
    /// Population decay rate `Γ = -2 Im ε`, when above the floor.
    pub fn rate(&self) -> Option<f64> {
        self.measurement.value().map(|x| 2.0 * x)
    }
}

/// Dark-state decay with the default resolution of [`MIN_DECAY_STEPS`].
pub fn dark_decay_rate(lattice: &Lattice) -> Result<DarkDecay, FloquetError> {
    dark_decay_rate_with(lattice, MIN_DECAY_STEPS)
}

pub fn dark_decay_rate_with(lattice: &Lattice, steps: usize) -> Result<DarkDecay, FloquetError> {
    if !lattice.is_driven() {
        return Err(FloquetError::Undriven);
    }
    if !lattice.is_dissipative() {
        return Err(FloquetError::Conservative);
    }
    if steps < MIN_DECAY_STEPS {
        return Err(FloquetError::TooFewSteps {
            steps,
            min: MIN_DECAY_STEPS,
        });
    }
    let m = monodromy(lattice, steps)?;
    let modes = floquet_modes(lattice, &m)?;
    let dark = dark_state(&modes).expect("a chain has at least two modes");
    let raw = -dark.mode.quasienergy.im;
    let measurement = if raw < TRUST_FLOOR {
        DecayMeasurement::BelowFloor
    } else {
        DecayMeasurement::Measured(raw)
    };
    Ok(DarkDecay {
        quasienergy: dark.mode.quasienergy,
        raw_neg_imag: raw,
        measurement,
        dark,
        steps,
    })
}
