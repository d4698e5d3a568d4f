//! Scenario execution and file output.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::studies::{lifetime_at, point_lattice, spectrum_sweep, sweep_drive};
use super::{compare_analytic_numeric, Check, ExperimentError, OutputKind, Scenario};
use crate::floquet::{dark_state, modes_for, DecayMeasurement};
use crate::format::fmt_f64;
use crate::propagate::{equilibrium_average, evolve, loss_rate_residual};

/// Scalars recorded for one loss placement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSummary {
    pub label: String,
    pub scalars: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub variant: String,
    pub quantity: String,
    /// Absent when the variant does not record the quantity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub pass: bool,
}

/// Contents of `summary.toml`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub output: OutputKind,
    pub directory: PathBuf,
    /// Data files, relative to `directory`.
    pub files: Vec<String>,
    pub variants: Vec<VariantSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckOutcome>,
}

impl RunSummary {
    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `name=value` pairs of the first variant's scalars, for a one-line
    /// report.
    pub fn headline(&self, limit: usize) -> String {
        let mut parts = Vec::new();
        for v in &self.variants {
            let prefix = if v.label.is_empty() {
                String::new()
            } else {
                format!("{}:", v.label)
            };
            for (k, x) in v.scalars.iter().take(limit) {
                parts.push(format!("{prefix}{k}={x:.6}"));
            }
        }
        parts.join(" ")
    }

    fn evaluate(&mut self, checks: &[Check]) {
        for check in checks {
            for v in &self.variants {
                let value = v.scalars.get(&check.quantity).copied();
                self.checks.push(CheckOutcome {
                    variant: v.label.clone(),
                    quantity: check.quantity.clone(),
                    value,
                    min: check.min,
                    max: check.max,
                    pass: value.is_some_and(|x| check.accepts(x)),
                });
            }
        }
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn file(&mut self, name: String) -> Result<BufWriter<File>, ExperimentError> {
        let file = File::create(self.dir.join(&name))?;
        self.files.push(name);
        Ok(BufWriter::new(file))
    }

    fn csv(&mut self, name: String) -> Result<csv::Writer<BufWriter<File>>, ExperimentError> {
        Ok(csv::Writer::from_writer(self.file(name)?))
    }
}

/// Runs a scenario and writes `config.toml`, its CSV files and
/// `summary.toml` into `out_root/<name>`.
pub fn run_scenario(s: &Scenario, out_root: &Path) -> Result<RunSummary, ExperimentError> {
    s.validate()?;
    let dir = out_root.join(&s.name);
    fs::create_dir_all(&dir).map_err(|e| ExperimentError::from(e).in_scenario(&s.name))?;
    let mut out = Output {
        dir: dir.clone(),
        files: Vec::new(),
    };
    fs::write(dir.join("config.toml"), toml::to_string(s)?)?;

    let variants = match s.output {
        OutputKind::Trajectory => trajectories(s, &mut out),
        OutputKind::Equilibrium => equilibrium(s, &mut out),
        OutputKind::Spectrum => spectrum(s, &mut out),
        OutputKind::DarkMode => dark_modes(s, &mut out),
        OutputKind::DarkLifetime => lifetimes(s, &mut out),
        OutputKind::Comparison => comparison(s, &mut out),
    }
    .map_err(|e| e.in_scenario(&s.name))?;

    let mut summary = RunSummary {
        name: s.name.clone(),
        output: s.output,
        directory: dir.clone(),
        files: out.files,
        variants,
        checks: Vec::new(),
    };
    summary.evaluate(&s.checks);
    fs::write(dir.join("summary.toml"), toml::to_string(&summary)?)?;
    Ok(summary)
}

fn site_keys(prefix: &str, values: &[f64], scalars: &mut BTreeMap<String, f64>) {
    for (n, &x) in values.iter().enumerate() {
        scalars.insert(format!("{prefix}_site{}", n + 1), x);
    }
}

fn trajectories(s: &Scenario, out: &mut Output) -> Result<Vec<VariantSummary>, ExperimentError> {
    let mut summaries = Vec::new();
    for variant in s.variants() {
        let lattice = variant.spec.clone().validate()?;
        let grid = s.grid(&lattice, s.t_final);
        let traj = evolve(&lattice, &s.initial_state(lattice.n_sites())?, &grid)?;
        let file = out.file(format!("trajectory{}.csv", variant.suffix()))?;
        traj.write_csv(file, s.emit_amplitudes)?;

        let eq = equilibrium_average(&traj, s.delta_for(s.t_final))?;
        let mut scalars = BTreeMap::new();
        scalars.insert(
            "p_final".to_string(),
            *traj.total.last().unwrap_or(&f64::NAN),
        );
        scalars.insert("p_equ".to_string(), eq.total);
        site_keys("p_equ", &eq.per_site, &mut scalars);
        site_keys("ratio", &eq.ratio, &mut scalars);
        if traj.len() >= 3 {
            scalars.insert(
                "loss_identity_residual".into(),
                loss_rate_residual(&traj, &lattice)?,
            );
        }
        summaries.push(VariantSummary {
            label: variant.label,
            scalars,
        });
    }
    Ok(summaries)
}

fn equilibrium(s: &Scenario, out: &mut Output) -> Result<Vec<VariantSummary>, ExperimentError> {
    let results = sweep_drive(s)?;
    let mut summaries: Vec<VariantSummary> = Vec::new();
    for variant in s.variants() {
        let series: Vec<_> = results
            .iter()
            .filter(|r| r.variant == variant.label)
            .collect();
        let mut w = out.csv(format!("sweep{}.csv", variant.suffix()))?;
        let n = variant.spec.n_sites;
        let mut header = vec![
            series[0].axis.label().to_string(),
            "t_final".into(),
            "p_equ".into(),
        ];
        header.extend((1..=n).map(|k| format!("p_equ_{k}")));
        header.extend((1..=n).map(|k| format!("ratio_{k}")));
        w.write_record(&header)?;

        let mut scalars = BTreeMap::new();
        for r in &series {
            for (k, &x) in r.values.iter().enumerate() {
                let mut row = vec![fmt_f64(x), fmt_f64(r.t_final), fmt_f64(r.total[k])];
                row.extend(r.per_site[k].iter().map(|&p| fmt_f64(p)));
                row.extend(r.ratio[k].iter().map(|&p| fmt_f64(p)));
                w.write_record(&row)?;
            }
            let (at, height) = r.peak();
            scalars.insert(format!("peak_at_tf{}", r.t_final), at);
            scalars.insert(format!("peak_value_tf{}", r.t_final), height);
            scalars.insert(format!("half_width_tf{}", r.t_final), r.width_at(0.5));
        }
        w.flush()?;
        summaries.push(VariantSummary {
            label: variant.label,
            scalars,
        });
    }
    Ok(summaries)
}

fn spectrum(s: &Scenario, out: &mut Output) -> Result<Vec<VariantSummary>, ExperimentError> {
    let mut summaries = Vec::new();
    for sweep in spectrum_sweep(s)? {
        let suffix = if sweep.variant.is_empty() {
            String::new()
        } else {
            format!("_{}", sweep.variant)
        };
        let mut w = out.csv(format!("spectrum{suffix}.csv"))?;
        w.write_record(["sweep_parameter", "k", "re_eps", "im_eps"])?;
        let mut least_lossy = f64::INFINITY;
        for (x, eps) in sweep.values.iter().zip(&sweep.quasienergies) {
            for (k, e) in eps.iter().enumerate() {
                w.write_record([
                    fmt_f64(*x),
                    (k + 1).to_string(),
                    fmt_f64(e.re),
                    fmt_f64(e.im),
                ])?;
            }
            least_lossy = least_lossy.min(-eps[0].im);
        }
        w.flush()?;
        let mut scalars = BTreeMap::new();
        scalars.insert("points".to_string(), sweep.values.len() as f64);
        scalars.insert("min_neg_im_eps".to_string(), least_lossy);
        summaries.push(VariantSummary {
            label: sweep.variant,
            scalars,
        });
    }
    Ok(summaries)
}

fn dark_modes(s: &Scenario, out: &mut Output) -> Result<Vec<VariantSummary>, ExperimentError> {
    let mut summaries = Vec::new();
    for variant in s.variants() {
        let lattice = variant.spec.clone().validate()?;
        let modes = modes_for(&lattice, s.steps_per_period)?;
        let dark = dark_state(&modes).expect("a chain has at least two modes");
        let mut w = out.csv(format!("dark_mode{}.csv", variant.suffix()))?;
        w.write_record(["site", "mean_population"])?;
        for (n, p) in dark.mode.mean_populations.iter().enumerate() {
            w.write_record([(n + 1).to_string(), fmt_f64(*p)])?;
        }
        w.flush()?;
        let mut scalars = BTreeMap::new();
        scalars.insert("re_eps".to_string(), dark.mode.quasienergy.re);
        scalars.insert("neg_im_eps".to_string(), -dark.mode.quasienergy.im);
        scalars.insert(
            "even_site_population".to_string(),
            dark.mode.even_site_population(),
        );
        scalars.insert(
            "no_dark_state".to_string(),
            f64::from(u8::from(dark.no_dark_state)),
        );
        site_keys("p_mean", &dark.mode.mean_populations, &mut scalars);
        summaries.push(VariantSummary {
            label: variant.label,
            scalars,
        });
    }
    Ok(summaries)
}

fn lifetimes(s: &Scenario, out: &mut Output) -> Result<Vec<VariantSummary>, ExperimentError> {
    let (axis, values) = match &s.sweep {
        Some(sw) => (Some(sw.axis), sw.values()),
        None => (None, vec![super::DriveAxis::LeftRatio.value(&s.lattice)]),
    };
    let mut w = out.csv("dark_lifetime.csv".to_string())?;
    w.write_record([
        "placement",
        "sweep_parameter",
        "first_lossy_site",
        "neg_im_eps",
        "status",
        "raw_neg_im_eps",
        "even_site_population",
    ])?;
    let mut summaries = Vec::new();
    for variant in s.variants() {
        let placement = if s.loss_sets.is_empty() {
            variant
                .spec
                .loss
                .iter()
                .skip(1)
                .step_by(2)
                .copied()
                .collect()
        } else {
            s.loss_sets[summaries.len()].clone()
        };
        let rows = values
            .par_iter()
            .map(|&x| {
                let lattice = point_lattice(&variant, axis, x)?;
                lifetime_at(&lattice, placement.clone(), s.steps_per_period)
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        let mut below = 0usize;
        let mut largest: f64 = 0.0;
        for (x, row) in values.iter().zip(&rows) {
            let (shown, status) = match row.measurement {
                DecayMeasurement::Measured(v) => (fmt_f64(v), "measured"),
                DecayMeasurement::BelowFloor => {
                    below += 1;
                    (String::new(), "below_floor")
                }
            };
            largest = largest.max(row.raw_neg_imag);
            w.write_record([
                super::loss_label(&placement),
                fmt_f64(*x),
                row.first_lossy_site
                    .map_or(String::new(), |k| k.to_string()),
                shown,
                status.to_string(),
                fmt_f64(row.raw_neg_imag),
                fmt_f64(row.even_site_population),
            ])?;
        }
        let mut scalars = BTreeMap::new();
        if let [row] = rows.as_slice() {
            scalars.insert("raw_neg_im_eps".to_string(), row.raw_neg_imag);
            if let Some(v) = row.measurement.value() {
                scalars.insert("neg_im_eps".to_string(), v);
            }
        } else {
            scalars.insert("max_raw_neg_im_eps".to_string(), largest);
        }
        scalars.insert("points_below_floor".to_string(), below as f64);
        if let Some(k) = rows[0].first_lossy_site {
            scalars.insert("first_lossy_site".to_string(), k as f64);
        }
        summaries.push(VariantSummary {
            label: variant.label,
            scalars,
        });
    }
    w.flush()?;
    Ok(summaries)
}

fn comparison(s: &Scenario, out: &mut Output) -> Result<Vec<VariantSummary>, ExperimentError> {
    let mut summaries = Vec::new();
    for variant in s.variants() {
        let lattice = variant.spec.clone().validate()?;
        let c = compare_analytic_numeric(&lattice, s.t_final, s.steps_per_period)?;
        let mut w = out.csv(format!("comparison{}.csv", variant.suffix()))?;
        w.write_record([
            "t", "P1_num", "P2_num", "P3_num", "P_num", "P1_ana", "P2_ana", "P3_ana", "P_ana",
        ])?;
        for (k, &t) in c.times.iter().enumerate() {
            let mut row = vec![fmt_f64(t)];
            row.extend(c.numeric[k].iter().map(|&x| fmt_f64(x)));
            row.extend(c.analytic[k].iter().map(|&x| fmt_f64(x)));
            w.write_record(&row)?;
        }
        w.flush()?;
        let mut scalars = BTreeMap::new();
        for (ch, name) in ["p1", "p2", "p3", "total"].iter().enumerate() {
            scalars.insert(format!("sup_{name}"), c.sup[ch]);
            scalars.insert(format!("rms_{name}"), c.rms[ch]);
        }
        scalars.insert("sup_all".to_string(), c.sup_deviation());
        summaries.push(VariantSummary {
            label: variant.label,
            scalars,
        });
    }
    Ok(summaries)
}
