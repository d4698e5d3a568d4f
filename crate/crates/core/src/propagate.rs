//! Fixed-step integration of `i dc/dt = H(t) c`.
//!
//! The stepper is classical fourth-order Runge–Kutta. State updates are
//! accumulated with Kahan compensation so that long runs and one-period
//! propagators keep their last few digits, which the dark-state decay
//! measurements depend on.
//!
//! When the step is a whole fraction of the drive period, `cos(ωt)` is read
//! from a per-period table indexed by half-steps instead of being evaluated
//! at a large `t`, which keeps the drive phase exact over long runs.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::fmt_f64;
use crate::model::Lattice;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagateError {
    #[error("time span must satisfy t_end > t_start (got {t_start} .. {t_end})")]
    EmptySpan { t_start: f64, t_end: f64 },
    #[error("{steps} steps per period is below the accuracy floor of {min}")]
    StepTooCoarse { steps: usize, min: usize },
    #[error("fixed step dt = {dt} exceeds T/{min} = {max} for a driven chain")]
    FixedStepTooCoarse { dt: f64, max: f64, min: usize },
    #[error("fixed step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("steps per period needs a drive frequency")]
    NoPeriod,
    #[error("sample stride must be at least 1")]
    ZeroStride,
    #[error("initial state has {found} amplitudes, chain has {expected} sites")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("initial state is not normalized: sum |c_n|^2 = {0}")]
    NotNormalized(f64),
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
    #[error("averaging window {delta} must lie in (0, {span}]")]
    InvalidWindow { delta: f64, span: f64 },
    #[error("need at least 3 samples, trajectory has {0}")]
    TooFewSamples(usize),
    #[error("site {site} is out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },
}

/// Amplitudes `c_n` at a single time.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl AmplitudeState {
    pub fn new(amplitudes: Vec<Complex64>, time: f64) -> Self {
        Self { amplitudes, time }
    }

    /// Particle on the given 1-based site at `t = 0`.
    pub fn localized(n_sites: usize, site: usize) -> Result<Self, PropagateError> {
        if site == 0 || site > n_sites {
            return Err(PropagateError::SiteOutOfRange { site, n_sites });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites];
        amplitudes[site - 1] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            time: 0.0,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    /// Integer number of steps per drive period `T = 2π/ω`.
    PerPeriod(usize),
    /// Explicit step, for undriven chains.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub step: StepSize,
    /// Store every k-th step (the final time is always stored).
    pub sample_stride: usize,
}

impl TimeGrid {
    pub const MIN_STEPS_PER_PERIOD: usize = 100;
    pub const DEFAULT_STEPS_PER_PERIOD: usize = 1000;

    pub fn new(t_start: f64, t_end: f64, step: StepSize) -> Self {
        Self {
            t_start,
            t_end,
            step,
            sample_stride: 1,
        }
    }

    /// Default step for the lattice: 1000 steps per period when driven,
    /// otherwise `dt = T_ref/1000` with `T_ref = 2π/(4v)`.
    pub fn default_for(lattice: &Lattice, t_end: f64) -> Self {
        Self::new(
            0.0,
            t_end,
            default_step(lattice, Self::DEFAULT_STEPS_PER_PERIOD),
        )
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    /// Resolves and validates the step size for a lattice.
    pub fn step_size(&self, lattice: &Lattice) -> Result<f64, PropagateError> {
        if !(self.t_end > self.t_start) || !self.t_end.is_finite() || !self.t_start.is_finite() {
            return Err(PropagateError::EmptySpan {
                t_start: self.t_start,
                t_end: self.t_end,
            });
        }
        if self.sample_stride == 0 {
            return Err(PropagateError::ZeroStride);
        }
        match self.step {
            StepSize::PerPeriod(steps) => {
                if steps < Self::MIN_STEPS_PER_PERIOD {
                    return Err(PropagateError::StepTooCoarse {
                        steps,
                        min: Self::MIN_STEPS_PER_PERIOD,
                    });
                }
                let period = lattice.period().ok_or(PropagateError::NoPeriod)?;
                Ok(period / steps as f64)
            }
            StepSize::Fixed(dt) => {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(PropagateError::InvalidStep(dt));
                }
                if let (true, Some(period)) = (lattice.is_driven(), lattice.period()) {
                    let max = period / Self::MIN_STEPS_PER_PERIOD as f64;
                    if dt > max * (1.0 + 1e-12) {
                        return Err(PropagateError::FixedStepTooCoarse {
                            dt,
                            max,
                            min: Self::MIN_STEPS_PER_PERIOD,
                        });
                    }
                }
                Ok(dt)
            }
        }
    }
}

/// Default step specification with the given resolution per period.
pub fn default_step(lattice: &Lattice, steps_per_period: usize) -> StepSize {
    if lattice.is_driven() {
        StepSize::PerPeriod(steps_per_period)
    } else {
        let t_ref = 2.0 * PI / (4.0 * lattice.coupling());
        StepSize::Fixed(t_ref / TimeGrid::DEFAULT_STEPS_PER_PERIOD as f64)
    }
}

/// Drive phase source for the stepper.
enum Phase {
    Static,
    /// `cos(ωt₀ + πj/s)` for `j = 0..2s`, indexed by half-steps.
    Table(Vec<f64>),
    Direct,
}

/// RK4 stepper with compensated state accumulation.
pub(crate) struct Stepper<'a> {
    lattice: &'a Lattice,
    t_start: f64,
    dt: f64,
    phase: Phase,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    stage: Vec<Complex64>,
    carry: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(lattice: &'a Lattice, t_start: f64, dt: f64, step: StepSize) -> Self {
        let n = lattice.n_sites();
        let phase = match (lattice.is_driven(), step, lattice.frequency()) {
            (false, _, _) => Phase::Static,
            (true, StepSize::PerPeriod(s), Some(w)) => {
                let base = w * t_start;
                Phase::Table(
                    (0..2 * s)
                        .map(|j| (base + PI * j as f64 / s as f64).cos())
                        .collect(),
                )
            }
            _ => Phase::Direct,
        };
        let zero = Complex64::new(0.0, 0.0);
        Self {
            lattice,
            t_start,
            dt,
            phase,
            k1: vec![zero; n],
            k2: vec![zero; n],
            k3: vec![zero; n],
            k4: vec![zero; n],
            stage: vec![zero; n],
            carry: vec![zero; n],
        }
    }

    #[inline]
    fn phase_at_half_step(&self, half_steps: usize) -> f64 {
        match &self.phase {
            Phase::Static => 0.0,
            Phase::Table(table) => table[half_steps % table.len()],
            Phase::Direct => self
                .lattice
                .drive_phase(self.t_start + 0.5 * self.dt * half_steps as f64),
        }
    }

    /// Advances `c` from step index `k` to `k + 1` (a full step `dt`).
    #[inline]
    pub(crate) fn full_step(&mut self, k: usize, c: &mut [Complex64]) {
        let p0 = self.phase_at_half_step(2 * k);
        let p1 = self.phase_at_half_step(2 * k + 1);
        let p2 = self.phase_at_half_step(2 * k + 2);
        self.step_with(p0, p1, p2, self.dt, c);
    }

    /// Advances `c` from time `t` by an arbitrary step `h` (used for the
    /// final partial step).
    pub(crate) fn partial_step(&mut self, t: f64, h: f64, c: &mut [Complex64]) {
        let lat = self.lattice;
        let (p0, p1, p2) = (
            lat.drive_phase(t),
            lat.drive_phase(t + 0.5 * h),
            lat.drive_phase(t + h),
        );
        self.step_with(p0, p1, p2, h, c);
    }

    #[inline]
    fn step_with(&mut self, p0: f64, p1: f64, p2: f64, h: f64, c: &mut [Complex64]) {
        let lat = self.lattice;
        let n = c.len();
        let half = 0.5 * h;

        lat.apply_generator(p0, c, &mut self.k1);
        for i in 0..n {
            self.stage[i] = c[i] + self.k1[i] * half;
        }
        lat.apply_generator(p1, &self.stage, &mut self.k2);
        for i in 0..n {
            self.stage[i] = c[i] + self.k2[i] * half;
        }
        lat.apply_generator(p1, &self.stage, &mut self.k3);
        for i in 0..n {
            self.stage[i] = c[i] + self.k3[i] * h;
        }
        lat.apply_generator(p2, &self.stage, &mut self.k4);

        let sixth = h / 6.0;
        for i in 0..n {
            let delta = (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
            // Kahan summation, componentwise.
            let y = delta - self.carry[i];
            let sum = c[i] + y;
            self.carry[i] = (sum - c[i]) - y;
            c[i] = sum;
        }
    }
}

/// Number of full steps and the length of the trailing partial step.
pub(crate) fn step_plan(span: f64, dt: f64) -> (usize, f64) {
    let ratio = span / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        (nearest as usize, 0.0)
    } else {
        let full = ratio.floor();
        (full as usize, span - full * dt)
    }
}

/// Integrates from `initial` over the grid, calling `observe(t, c)` at the
/// start, every `sample_stride` steps and at `t_end`. Does not require a
/// normalized initial state. Returns the final state.
pub fn integrate<F>(
    lattice: &Lattice,
    initial: &AmplitudeState,
    grid: &TimeGrid,
    mut observe: F,
) -> Result<AmplitudeState, PropagateError>
where
    F: FnMut(f64, &[Complex64]),
{
    let n = lattice.n_sites();
    if initial.amplitudes.len() != n {
        return Err(PropagateError::DimensionMismatch {
            expected: n,
            found: initial.amplitudes.len(),
        });
    }
    let dt = grid.step_size(lattice)?;
    let (full_steps, tail) = step_plan(grid.t_end - grid.t_start, dt);
    let mut stepper = Stepper::new(lattice, grid.t_start, dt, grid.step);
    let mut c = initial.amplitudes.clone();
    let stride = grid.sample_stride;

    let check = |t: f64, c: &[Complex64]| -> Result<(), PropagateError> {
        if c.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(PropagateError::NonFinite(t))
        }
    };

    check(grid.t_start, &c)?;
    observe(grid.t_start, &c);
    for k in 0..full_steps {
        stepper.full_step(k, &mut c);
        let done = k + 1;
        let last = done == full_steps && tail == 0.0;
        if done % stride == 0 || last {
            let t = if last {
                grid.t_end
            } else {
                grid.t_start + dt * done as f64
            };
            check(t, &c)?;
            observe(t, &c);
        }
    }
    if tail > 0.0 {
        stepper.partial_step(grid.t_start + dt * full_steps as f64, tail, &mut c);
        check(grid.t_end, &c)?;
        observe(grid.t_end, &c);
    }
    Ok(AmplitudeState::new(c, grid.t_end))
}

/// Sampled time series of amplitudes and populations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
    /// `populations[k][n] = |c_n(t_k)|²`.
    pub populations: Vec<Vec<f64>>,
    /// `total[k] = Σ_n P_n(t_k)`.
    pub total: Vec<f64>,
}

impl Trajectory {
    fn with_capacity(cap: usize) -> Self {
        Self {
            times: Vec::with_capacity(cap),
            amplitudes: Vec::with_capacity(cap),
            populations: Vec::with_capacity(cap),
            total: Vec::with_capacity(cap),
        }
    }

    fn push(&mut self, t: f64, c: &[Complex64]) {
        let pops: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
        self.total.push(pops.iter().sum());
        self.populations.push(pops);
        self.amplitudes.push(c.to_vec());
        self.times.push(t);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.first().map_or(0, Vec::len)
    }

    /// `P_n(t)` for a 1-based site.
    pub fn site_series(&self, site: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[site - 1]).collect()
    }

    pub fn final_state(&self) -> Option<AmplitudeState> {
        Some(AmplitudeState::new(
            self.amplitudes.last()?.clone(),
            *self.times.last()?,
        ))
    }

    /// CSV with columns `t, P_1..P_N, P_total` and, optionally,
    /// `Re_c1, Im_c1, ..`. Numbers carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W, emit_amplitudes: bool) -> csv::Result<()> {
        let n = self.n_sites();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|s| format!("P_{s}")));
        header.push("P_total".into());
        if emit_amplitudes {
            for s in 1..=n {
                header.push(format!("Re_c{s}"));
                header.push(format!("Im_c{s}"));
            }
        }
        w.write_record(&header)?;
        let mut row = Vec::with_capacity(header.len());
        for k in 0..self.len() {
            row.clear();
            row.push(fmt_f64(self.times[k]));
            row.extend(self.populations[k].iter().map(|&p| fmt_f64(p)));
            row.push(fmt_f64(self.total[k]));
            if emit_amplitudes {
                for z in &self.amplitudes[k] {
                    row.push(fmt_f64(z.re));
                    row.push(fmt_f64(z.im));
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evolves a normalized initial state and records the trajectory.
pub fn evolve(
    lattice: &Lattice,
    initial: &AmplitudeState,
    grid: &TimeGrid,
) -> Result<Trajectory, PropagateError> {
    let norm = initial.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(PropagateError::NotNormalized(norm));
    }
    let dt = grid.step_size(lattice)?;
    let estimate = ((grid.t_end - grid.t_start) / dt / grid.sample_stride as f64) as usize + 2;
    let mut traj = Trajectory::with_capacity(estimate.min(1 << 22));
    integrate(lattice, initial, grid, |t, c| traj.push(t, c))?;
    Ok(traj)
}

/// Time averages over the final window `[t_end - Δ, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumAverage {
    /// `⟨P_n⟩_equ`, site 1 first.
    pub per_site: Vec<f64>,
    /// `⟨P⟩_equ = Σ_n ⟨P_n⟩_equ`.
    pub total: f64,
    /// `⟨P_n / P⟩_equ`.
    pub ratio: Vec<f64>,
    pub delta: f64,
}

/// Trapezoidal averages of `P_n`, `P` and `P_n/P` over the last `delta` of
/// the trajectory. The window edge is linearly interpolated between samples.
pub fn equilibrium_average(
    traj: &Trajectory,
    delta: f64,
) -> Result<EquilibriumAverage, PropagateError> {
    let len = traj.len();
    if len < 2 {
        return Err(PropagateError::TooFewSamples(len));
    }
    let t_end = traj.times[len - 1];
    let span = t_end - traj.times[0];
    if !(delta > 0.0) || delta > span * (1.0 + 1e-12) {
        return Err(PropagateError::InvalidWindow { delta, span });
    }
    let n = traj.n_sites();
    let t_lo = (t_end - delta).max(traj.times[0]);

    // Per-sample integrand: P_1..P_N, then P_n/P for each n.
    let sample = |k: usize| -> Vec<f64> {
        let p = &traj.populations[k];
        let total = traj.total[k];
        let mut v = p.clone();
        v.extend(p.iter().map(|&x| if total > 0.0 { x / total } else { 0.0 }));
        v
    };

    let first = traj.times.partition_point(|&t| t < t_lo);
    let mut acc = vec![0.0; 2 * n];
    let mut prev_t;
    let mut prev_v;
    if first > 0 && traj.times[first] > t_lo {
        let (ta, tb) = (traj.times[first - 1], traj.times[first]);
        let w = (t_lo - ta) / (tb - ta);
        let (va, vb) = (sample(first - 1), sample(first));
        prev_v = va
            .iter()
            .zip(&vb)
            .map(|(a, b)| a + w * (b - a))
            .collect::<Vec<_>>();
        prev_t = t_lo;
    } else {
        prev_t = traj.times[first];
        prev_v = sample(first);
    }
    for k in first..len {
        let t = traj.times[k];
        if t <= prev_t {
            continue;
        }
        let v = sample(k);
        let h = 0.5 * (t - prev_t);
        for (a, (x, y)) in acc.iter_mut().zip(prev_v.iter().zip(&v)) {
            *a += h * (x + y);
        }
        prev_t = t;
        prev_v = v;
    }
    let width = t_end - t_lo;
    let per_site: Vec<f64> = acc[..n].iter().map(|a| a / width).collect();
    let ratio = acc[n..].iter().map(|a| a / width).collect();
    Ok(EquilibriumAverage {
        total: per_site.iter().sum(),
        per_site,
        ratio,
        delta: width,
    })
}

/// Largest violation of `dP/dt = -2 Σ_n α_n P_n` over interior samples,
/// using three-point centered differences (valid on non-uniform spacing).
pub fn loss_rate_residual(traj: &Trajectory, lattice: &Lattice) -> Result<f64, PropagateError> {
    let len = traj.len();
    if len < 3 {
        return Err(PropagateError::TooFewSamples(len));
    }
    let alpha = lattice.loss_vector();
    let mut worst: f64 = 0.0;
    for k in 1..len - 1 {
        let (t0, t1, t2) = (traj.times[k - 1], traj.times[k], traj.times[k + 1]);
        let (h0, h1) = (t1 - t0, t2 - t1);
        let (p0, p1, p2) = (traj.total[k - 1], traj.total[k], traj.total[k + 1]);
        let deriv =
            -h1 / (h0 * (h0 + h1)) * p0 + (h1 - h0) / (h0 * h1) * p1 + h0 / (h1 * (h0 + h1)) * p2;
        let rate: f64 = alpha
            .iter()
            .zip(&traj.populations[k])
            .map(|(a, p)| a * p)
            .sum::<f64>()
            * 2.0;
        worst = worst.max((deriv + rate).abs());
    }
    Ok(worst)
}
