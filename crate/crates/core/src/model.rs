//! Lattice description and the time-dependent non-Hermitian Hamiltonian.
//!
//! A single particle hops between nearest neighbours of an `N`-site chain
//! with amplitude `-v`. The two end sites carry a harmonic on-site drive
//! `A₁cos(ωt)` and `A₂cos(ωt)`, and selected even sites lose probability
//! through a negative imaginary on-site energy `-iα_n`:
//!
//! ```text
//! H(t) = A₁cos(ωt)|1⟩⟨1| + A₂cos(ωt)|N⟩⟨N|
//!        - v Σ (|n⟩⟨n+1| + h.c.) - i Σ α_n |n⟩⟨n|
//! ```
//!
//! Sites are numbered from 1 in every public interface. Internally the loss
//! vector is stored 0-based (`loss[0]` is site 1).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reasons a [`LatticeSpec`] is rejected by [`LatticeSpec::validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("a chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("coupling v must be positive, got {0}")]
    NonPositiveCoupling(f64),
    #[error("drive frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("a nonzero drive amplitude (A1={left}, A2={right}) requires a drive frequency")]
    MissingFrequency { left: f64, right: f64 },
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("loss vector has {found} entries but the chain has {expected} sites")]
    LossLengthMismatch { expected: usize, found: usize },
    #[error("loss rate at site {site} is negative ({value})")]
    NegativeLoss { site: usize, value: f64 },
    #[error("loss at site {site} = {value}: only even sites may be lossy")]
    LossOnOddSite { site: usize, value: f64 },
    #[error("loss at site {site} = {value}: the right-end site is lossless")]
    LossOnRightEnd { site: usize, value: f64 },
}

/// Raw, unvalidated description of the driven lossy chain.
///
/// All energies are in units where ħ = 1; the presets use `v = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub coupling: f64,
    #[serde(default)]
    pub drive_left: f64,
    #[serde(default)]
    pub drive_right: f64,
    /// Drive frequency ω. May be omitted only when both drive amplitudes vanish.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    /// Per-site loss rates α_n, site 1 first. Empty means lossless.
    #[serde(default)]
    pub loss: Vec<f64>,
}

impl LatticeSpec {
    /// Undriven, lossless chain with coupling `v`.
    pub fn chain(n_sites: usize, coupling: f64) -> Self {
        Self {
            n_sites,
            coupling,
            drive_left: 0.0,
            drive_right: 0.0,
            frequency: None,
            loss: vec![0.0; n_sites],
        }
    }

    pub fn with_frequency(mut self, omega: f64) -> Self {
        self.frequency = Some(omega);
        self
    }

    pub fn with_drive(mut self, left: f64, right: f64) -> Self {
        self.drive_left = left;
        self.drive_right = right;
        self
    }

    /// Sets α at a 1-based site index. Does not validate.
    pub fn with_loss_at(mut self, site: usize, alpha: f64) -> Self {
        if self.loss.len() < self.n_sites {
            self.loss.resize(self.n_sites, 0.0);
        }
        self.loss[site - 1] = alpha;
        self
    }

    /// Replaces the loss profile with rates on the even sites `2, 4, 6, ...`.
    pub fn with_even_losses(mut self, rates: &[f64]) -> Self {
        self.loss = vec![0.0; self.n_sites];
        for (k, &alpha) in rates.iter().enumerate() {
            let idx = 2 * k + 1;
            if idx < self.n_sites {
                self.loss[idx] = alpha;
            }
        }
        self
    }

    /// Checks every invariant and returns the validated lattice.
    pub fn validate(self) -> Result<Lattice, ModelError> {
        let n = self.n_sites;
        if n < 2 {
            return Err(ModelError::TooFewSites(n));
        }
        for (field, value) in [
            ("coupling", self.coupling),
            ("drive_left", self.drive_left),
            ("drive_right", self.drive_right),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { field, value });
            }
        }
        if self.coupling <= 0.0 {
            return Err(ModelError::NonPositiveCoupling(self.coupling));
        }
        match self.frequency {
            Some(w) if !w.is_finite() => {
                return Err(ModelError::NonFinite {
                    field: "frequency",
                    value: w,
                })
            }
            Some(w) if w <= 0.0 => return Err(ModelError::NonPositiveFrequency(w)),
            None if self.drive_left != 0.0 || self.drive_right != 0.0 => {
                return Err(ModelError::MissingFrequency {
                    left: self.drive_left,
                    right: self.drive_right,
                })
            }
            _ => {}
        }

        let mut loss = self.loss;
        if loss.is_empty() {
            loss = vec![0.0; n];
        }
        if loss.len() != n {
            return Err(ModelError::LossLengthMismatch {
                expected: n,
                found: loss.len(),
            });
        }
        for (idx, &value) in loss.iter().enumerate() {
            let site = idx + 1;
            if !value.is_finite() {
                return Err(ModelError::NonFinite {
                    field: "loss",
                    value,
                });
            }
            if value < 0.0 {
                return Err(ModelError::NegativeLoss { site, value });
            }
            if value == 0.0 {
                continue;
            }
            if site == n {
                return Err(ModelError::LossOnRightEnd { site, value });
            }
            if site % 2 == 1 {
                return Err(ModelError::LossOnOddSite { site, value });
            }
        }

        Ok(Lattice(LatticeSpec { loss, ..self }))
    }
}

/// A [`LatticeSpec`] that has passed validation. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice(LatticeSpec);

impl Lattice {
    pub fn spec(&self) -> &LatticeSpec {
        &self.0
    }

    pub fn into_spec(self) -> LatticeSpec {
        self.0
    }

    pub fn n_sites(&self) -> usize {
        self.0.n_sites
    }

    pub fn coupling(&self) -> f64 {
        self.0.coupling
    }

    pub fn drive_left(&self) -> f64 {
        self.0.drive_left
    }

    pub fn drive_right(&self) -> f64 {
        self.0.drive_right
    }

    pub fn frequency(&self) -> Option<f64> {
        self.0.frequency
    }

    /// Drive period `2π/ω`, if a frequency is set.
    pub fn period(&self) -> Option<f64> {
        self.0.frequency.map(|w| 2.0 * PI / w)
    }

    pub fn is_driven(&self) -> bool {
        self.0.drive_left != 0.0 || self.0.drive_right != 0.0
    }

    pub fn is_dissipative(&self) -> bool {
        self.0.loss.iter().any(|&a| a > 0.0)
    }

    /// Per-site loss rates, site 1 first. Zero on odd sites and on site N.
    pub fn loss_vector(&self) -> &[f64] {
        &self.0.loss
    }

    /// 1-based index of the lossy site closest to the left end.
    pub fn first_lossy_site(&self) -> Option<usize> {
        self.0.loss.iter().position(|&a| a > 0.0).map(|i| i + 1)
    }

    /// Diagonal drive entries `(ε₁(t), ε_N(t))` for a given `cos(ωt)`.
    #[inline]
    pub(crate) fn drive_terms(&self, cos_wt: f64) -> (f64, f64) {
        (self.0.drive_left * cos_wt, self.0.drive_right * cos_wt)
    }

    /// `cos(ωt)`, or zero for an undriven chain.
    #[inline]
    pub(crate) fn drive_phase(&self, t: f64) -> f64 {
        match self.0.frequency {
            Some(w) if self.is_driven() => (w * t).cos(),
            _ => 0.0,
        }
    }

    /// Computes `out = -i H(t) c` using the tridiagonal structure, with the
    /// drive supplied as `cos(ωt)`.
    #[inline]
    pub(crate) fn apply_generator(&self, cos_wt: f64, c: &[Complex64], out: &mut [Complex64]) {
        let n = self.0.n_sites;
        let v = self.0.coupling;
        let (e1, en) = self.drive_terms(cos_wt);
        let loss = &self.0.loss;
        for k in 0..n {
            // H c at site k
            let mut onsite = Complex64::new(0.0, -loss[k]);
            if k == 0 {
                onsite.re += e1;
            }
            if k == n - 1 {
                onsite.re += en;
            }
            let mut hc = onsite * c[k];
            if k > 0 {
                hc -= c[k - 1] * v;
            }
            if k + 1 < n {
                hc -= c[k + 1] * v;
            }
            // -i * hc
            out[k] = Complex64::new(hc.im, -hc.re);
        }
    }
}

/// Dense `N × N` Hamiltonian at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix(pub DMatrix<Complex64>);

impl HamiltonianMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// Entry at 1-based `(row, col)`.
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row - 1, col - 1)]
    }
}

/// Assembles `H(t)` as a dense matrix.
pub fn hamiltonian_at(lattice: &Lattice, t: f64) -> HamiltonianMatrix {
    let n = lattice.n_sites();
    let v = lattice.coupling();
    let (e1, en) = lattice.drive_terms(lattice.drive_phase(t));
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for (k, &alpha) in lattice.loss_vector().iter().enumerate() {
        h[(k, k)] = Complex64::new(0.0, -alpha);
    }
    h[(0, 0)].re += e1;
    h[(n - 1, n - 1)].re += en;
    for k in 0..n - 1 {
        h[(k, k + 1)] = Complex64::new(-v, 0.0);
        h[(k + 1, k)] = Complex64::new(-v, 0.0);
    }
    HamiltonianMatrix(h)
}

/// Per-site loss rates as an owned vector; see [`Lattice::loss_vector`].
pub fn loss_vector(lattice: &Lattice) -> Vec<f64> {
    lattice.loss_vector().to_vec()
}
