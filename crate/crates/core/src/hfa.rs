//! High-frequency theory of the three-site chain with loss on site 2.
//!
//! Averaging the drive over a period renormalizes the couplings to
//! `v J₀(A₁/ω)` and `v J₀(A₂/ω)`. The resulting static 3×3 problem has a
//! zero mode with no weight on the lossy site (the dark state) and a lossy
//! two-level block with eigenvalues `(-iα₂ ± Θ)/2`, where
//! `Θ = √(γ² − α₂²)` and `γ² = 4v²[J₀²(A₁/ω) + J₀²(A₂/ω)]`.
//!
//! The time-domain formulas assume the particle starts on site 1.

use num_complex::Complex64;
use thiserror::Error;

use crate::bessel::bessel_j0;
use crate::model::Lattice;

/// `J₀²(A₁/ω) + J₀²(A₂/ω)` below this counts as zero: both ratios sit on
/// a Bessel zero to within rounding.
pub const VANISHING_BESSEL_SUM: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HfaError {
    #[error("the analytic model covers 3 sites, got {0}")]
    NotThreeSites(usize),
    #[error("critical damping: the mode matrix is singular")]
    Critical,
    #[error("J0(A1/ω) and J0(A2/ω) both vanish; the asymptotics are undefined")]
    BesselFactorsVanish,
    #[error("drive frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("loss rate must be non-negative, got {0}")]
    NegativeLoss(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingClass {
    Under,
    Critical,
    Over,
}

/// Classifies `α₂` against `γ` with tolerance `1e-9·max(1, γ)`.
pub fn damping_class(alpha2: f64, gamma: f64) -> DampingClass {
    let tol = 1e-9 * gamma.max(1.0);
    if alpha2 < gamma - tol {
        DampingClass::Under
    } else if alpha2 > gamma + tol {
        DampingClass::Over
    } else {
        DampingClass::Critical
    }
}

/// Auxiliary phase of `f₊`: `cos β = α₂/γ` when underdamped,
/// `cosh β′ = α₂/γ` when overdamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingPhase {
    Beta(f64),
    BetaPrime(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeSiteAnalytic {
    pub coupling: f64,
    pub alpha2: f64,
    /// `A₁/ω`.
    pub left_ratio: f64,
    /// `A₂/ω`.
    pub right_ratio: f64,
    pub j0_left: f64,
    pub j0_right: f64,
    pub gamma: f64,
    /// Real and positive when underdamped, `i|Θ|` when overdamped, 0 at
    /// critical damping.
    pub theta: Complex64,
    pub damping: DampingClass,
    pub phase: Option<DampingPhase>,
    pub quasienergies: [Complex64; 3],
}

impl ThreeSiteAnalytic {
    /// Builds the effective model from `v`, `α₂` and the drive ratios.
    pub fn from_parameters(coupling: f64, alpha2: f64, left_ratio: f64, right_ratio: f64) -> Self {
        let j0_left = bessel_j0(left_ratio);
        let j0_right = bessel_j0(right_ratio);
        let gamma = 2.0 * coupling * (j0_left * j0_left + j0_right * j0_right).sqrt();
        let damping = damping_class(alpha2, gamma);
        let (theta, phase) = match damping {
            DampingClass::Under => {
                let th = (gamma * gamma - alpha2 * alpha2).sqrt();
                (
                    Complex64::new(th, 0.0),
                    Some(DampingPhase::Beta((alpha2 / gamma).acos())),
                )
            }
            DampingClass::Over => {
                let th = (alpha2 * alpha2 - gamma * gamma).sqrt();
                let phase =
                    (gamma > 0.0).then(|| DampingPhase::BetaPrime((alpha2 / gamma).acosh()));
                (Complex64::new(0.0, th), phase)
            }
            DampingClass::Critical => (Complex64::new(0.0, 0.0), None),
        };
        let loss = Complex64::new(0.0, -alpha2);
        let quasienergies = [
            Complex64::new(0.0, 0.0),
            (loss + theta) / 2.0,
            (loss - theta) / 2.0,
        ];
        Self {
            coupling,
            alpha2,
            left_ratio,
            right_ratio,
            j0_left,
            j0_right,
            gamma,
            theta,
            damping,
            phase,
            quasienergies,
        }
    }

    /// `J₀²(A₁/ω) + J₀²(A₂/ω)`.
    pub fn bessel_sum(&self) -> f64 {
        self.j0_left * self.j0_left + self.j0_right * self.j0_right
    }

    /// `f₊(t)` for the class at hand (real-valued in every regime).
    fn f_plus(&self, t: f64) -> f64 {
        let s = self.bessel_sum();
        let a = self.alpha2;
        let decay = -0.5 * a * t;
        let shape = match (self.damping, self.phase) {
            (DampingClass::Under, Some(DampingPhase::Beta(beta))) => {
                decay.exp() * (0.5 * self.theta.re * t + beta).sin() / beta.sin()
            }
            (DampingClass::Over, Some(DampingPhase::BetaPrime(bp))) => {
                // e^{-αt/2} sinh(x)/sinh β′ with x = |Θ|t/2 + β′, as exponentials.
                let x = 0.5 * self.theta.im * t + bp;
                0.5 * ((decay + x).exp() - (decay - x).exp()) / bp.sinh()
            }
            _ => decay.exp() * (1.0 + 0.5 * a * t),
        };
        2.0 / s * shape
    }

    /// `P₂(t)` from the bright-mode amplitude.
    fn p2(&self, t: f64) -> f64 {
        let a = self.alpha2;
        let coeff = self.coupling * self.j0_left;
        match self.damping {
            DampingClass::Under => {
                let th = self.theta.re;
                let amp = 2.0 * coeff / th * (-0.5 * a * t).exp() * (0.5 * th * t).sin();
                amp * amp
            }
            DampingClass::Over => {
                let th = self.theta.im;
                let x = 0.5 * th * t;
                let decay = -0.5 * a * t;
                let amp = 2.0 * coeff / th * 0.5 * ((decay + x).exp() - (decay - x).exp());
                amp * amp
            }
            DampingClass::Critical => {
                let amp = coeff * t * (-0.5 * a * t).exp();
                amp * amp
            }
        }
    }
}

/// Effective model of a validated 3-site lattice.
pub fn effective_model(lattice: &Lattice) -> Result<ThreeSiteAnalytic, HfaError> {
    if lattice.n_sites() != 3 {
        return Err(HfaError::NotThreeSites(lattice.n_sites()));
    }
    let (left, right) = match lattice.frequency() {
        Some(w) => (lattice.drive_left() / w, lattice.drive_right() / w),
        None => (0.0, 0.0),
    };
    Ok(ThreeSiteAnalytic::from_parameters(
        lattice.coupling(),
        lattice.loss_vector()[1],
        left,
        right,
    ))
}

/// Expansion coefficients `F = T⁻¹ c(0)` of an initial state on the three
/// high-frequency modes `u₁` (dark), `u₂`, `u₃`.
///
/// The columns of `T` are `u₁(0) = (−J₂, 0, J₁)`, `u₂,₃(0) = (J₁, (iα₂ ∓ Θ)/2v, J₂)`
/// with `J₁ = J₀(A₁/ω)`, `J₂ = J₀(A₂/ω)`, and `det T = ΘS/v` where `S = J₁² + J₂²`.
pub fn projection_coefficients(
    analytic: &ThreeSiteAnalytic,
    c0: [Complex64; 3],
) -> Result<[Complex64; 3], HfaError> {
    if analytic.damping == DampingClass::Critical {
        return Err(HfaError::Critical);
    }
    let s = analytic.bessel_sum();
    if s < VANISHING_BESSEL_SUM {
        return Err(HfaError::BesselFactorsVanish);
    }
    let (j1, j2) = (
        Complex64::from(analytic.j0_left),
        Complex64::from(analytic.j0_right),
    );
    let th = analytic.theta;
    let ia = Complex64::new(0.0, analytic.alpha2);
    let v = analytic.coupling;
    let det = th * s;
    let plus = (ia + th) / 2.0;
    let minus = (ia - th) / 2.0;
    let rows = [
        [-th * j2, Complex64::new(0.0, 0.0), th * j1],
        [plus * j1, Complex64::from(-v * s), plus * j2],
        [-minus * j1, Complex64::from(v * s), -minus * j2],
    ];
    let mut f = [Complex64::new(0.0, 0.0); 3];
    for (fi, row) in f.iter_mut().zip(rows) {
        *fi = (row[0] * c0[0] + row[1] * c0[1] + row[2] * c0[2]) / det;
    }
    Ok(f)
}

/// Site populations and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeSitePopulations {
    pub sites: [f64; 3],
    pub total: f64,
}

impl ThreeSitePopulations {
    fn new(sites: [f64; 3]) -> Self {
        Self {
            sites,
            total: sites.iter().sum(),
        }
    }
}

/// Closed-form `P₁..P₃` and `P` at time `t` for `c(0) = (1, 0, 0)`.
pub fn analytic_populations(
    analytic: &ThreeSiteAnalytic,
    t: f64,
) -> Result<ThreeSitePopulations, HfaError> {
    let s = analytic.bessel_sum();
    if s < VANISHING_BESSEL_SUM {
        return Err(HfaError::BesselFactorsVanish);
    }
    let (j1, j2) = (analytic.j0_left, analytic.j0_right);
    let f = analytic.f_plus(t);
    let p1 = (j2 * j2 / s + 0.5 * f * j1 * j1).powi(2);
    let p3 = (j1 * j2 * (-1.0 / s + 0.5 * f)).powi(2);
    Ok(ThreeSitePopulations::new([p1, analytic.p2(t), p3]))
}

/// Sink-state populations `(P_n)_asy`, independent of the loss rate.
pub fn asymptotic_populations(
    drive_left: f64,
    drive_right: f64,
    omega: f64,
) -> Result<ThreeSitePopulations, HfaError> {
    if !(omega > 0.0) {
        return Err(HfaError::NonPositiveFrequency(omega));
    }
    let j1 = bessel_j0(drive_left / omega);
    let j2 = bessel_j0(drive_right / omega);
    let s = j1 * j1 + j2 * j2;
    if s < VANISHING_BESSEL_SUM {
        return Err(HfaError::BesselFactorsVanish);
    }
    let p1 = j2.powi(4) / (s * s);
    let p3 = j1 * j1 * j2 * j2 / (s * s);
    Ok(ThreeSitePopulations::new([p1, 0.0, p3]))
}
