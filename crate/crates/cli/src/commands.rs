//! Execution of a resolved [`RunConfig`].

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};

use floq_core::experiments::{run_scenario, ExperimentError};
use floq_core::{analytic_populations, asymptotic_populations, effective_model, DampingClass};

use crate::config::{emit, Command, RunConfig, Verbosity};

/// Samples of the analytic curve, endpoints included.
pub const ANALYTIC_SAMPLES: usize = 1001;

/// What a finished command reports on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub line: String,
    pub details: Vec<String>,
}

pub fn execute(config: &RunConfig) -> Result<Report, ExperimentError> {
    match config.command {
        Command::Analytic => analytic(config),
        _ => scenario(config),
    }
}

fn scenario(config: &RunConfig) -> Result<Report, ExperimentError> {
    let summary = run_scenario(&config.scenario, &config.out_dir)?;
    let limit = if config.verbosity == Verbosity::Verbose {
        usize::MAX
    } else {
        4
    };
    let mut line = format!(
        "{} {} [{}] {}",
        config.command.name(),
        summary.name,
        summary.output.name(),
        summary.headline(limit)
    );
    if !summary.checks.is_empty() {
        let state = if summary.checks_pass() {
            "pass"
        } else {
            "FAIL"
        };
        let _ = write!(line, " checks={state}");
    }
    let _ = write!(line, " -> {}", summary.directory.display());
    let mut details: Vec<String> = summary
        .files
        .iter()
        .map(|f| summary.directory.join(f).display().to_string())
        .collect();
    for c in &summary.checks {
        let value = c
            .value
            .map_or_else(|| "missing".to_string(), |x| format!("{x:.6}"));
        details.push(format!(
            "check {}{} = {value} in [{}, {}]: {}",
            if c.variant.is_empty() {
                String::new()
            } else {
                format!("{}:", c.variant)
            },
            c.quantity,
            c.min.map_or("-inf".into(), |x| x.to_string()),
            c.max.map_or("inf".into(), |x| x.to_string()),
            if c.pass { "pass" } else { "FAIL" }
        ));
    }
    Ok(Report { line, details })
}

fn damping_name(d: DampingClass) -> &'static str {
    match d {
        DampingClass::Under => "underdamped",
        DampingClass::Critical => "critical",
        DampingClass::Over => "overdamped",
    }
}

/// Closed-form three-site populations on a uniform grid over `[0, t_final]`.
fn analytic(config: &RunConfig) -> Result<Report, ExperimentError> {
    let s = &config.scenario;
    let lattice = s.lattice.clone().validate()?;
    let model = effective_model(&lattice)?;
    let dir = config.out_dir.join(&s.name);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), emit(config))?;

    let csv_path = dir.join("analytic.csv");
    let mut out = io::BufWriter::new(fs::File::create(&csv_path)?);
    writeln!(out, "t,P1,P2,P3,P")?;
    for k in 0..ANALYTIC_SAMPLES {
        let t = if k + 1 == ANALYTIC_SAMPLES {
            s.t_final
        } else {
            s.t_final * k as f64 / (ANALYTIC_SAMPLES - 1) as f64
        };
        let p = analytic_populations(&model, t)?;
        let [p1, p2, p3] = p.sites;
        writeln!(
            out,
            "{t:.16e},{p1:.16e},{p2:.16e},{p3:.16e},{:.16e}",
            p.total
        )?;
    }
    out.flush()?;

    let omega = lattice.frequency().unwrap_or(1.0);
    // Without a frequency both drive ratios are zero.
    let (a1, a2) = if lattice.frequency().is_some() {
        (lattice.drive_left(), lattice.drive_right())
    } else {
        (0.0, 0.0)
    };
    let asy = asymptotic_populations(a1, a2, omega)?;
    let mut summary = toml::Table::new();
    summary.insert("name".into(), s.name.clone().into());
    summary.insert("damping".into(), damping_name(model.damping).into());
    summary.insert("gamma".into(), model.gamma.into());
    summary.insert("theta_re".into(), model.theta.re.into());
    summary.insert("theta_im".into(), model.theta.im.into());
    let eps = &model.quasienergies;
    summary.insert(
        "eps_re".into(),
        toml::Value::Array(eps.iter().map(|e| e.re.into()).collect()),
    );
    summary.insert(
        "eps_im".into(),
        toml::Value::Array(eps.iter().map(|e| e.im.into()).collect()),
    );
    summary.insert(
        "p_asy".into(),
        toml::Value::Array(asy.sites.iter().map(|&x| x.into()).collect()),
    );
    summary.insert("p_asy_total".into(), asy.total.into());
    fs::write(
        dir.join("summary.toml"),
        toml::to_string(&summary).map_err(ExperimentError::Toml)?,
    )?;

    let line = format!(
        "analytic {} [{}] gamma={:.6} theta={:.6}{:+.6}i p_asy={:.6} -> {}",
        s.name,
        damping_name(model.damping),
        model.gamma,
        model.theta.re,
        model.theta.im,
        asy.total,
        dir.display()
    );
    Ok(Report {
        line,
        details: vec![csv_path.display().to_string()],
    })
}
