//! Registry of the figure scenarios, keyed `fig2a` … `fig10d`.
//!
//! Unless stated otherwise: `v = 1`, `ω = 20`, `α₂ = 1`, particle on site 1.

use super::{Check, DriveAxis, OutputKind, Scenario, Sweep};
use crate::model::LatticeSpec;

const OMEGA: f64 = 20.0;

/// Loss sets `(α₂, α₄)` of the five- and six-site studies.
const PAIR_SETS: [&[f64]; 3] = [&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0]];

const NAMES: &[&str] = &[
    "fig2a",
    "fig2b",
    "fig2c",
    "fig2d",
    "fig2e",
    "fig2f",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig3d",
    "fig4a",
    "fig4b",
    "fig5a_undriven",
    "fig5a_weak",
    "fig5a_cdt",
    "fig5b",
    "fig6a",
    "fig6b_left",
    "fig6b_right",
    "fig7a",
    "fig7b",
    "fig7c",
    "fig7d",
    "fig7e",
    "fig7f",
    "fig8a",
    "fig8a_lifetime",
    "fig8b",
    "fig9ab",
    "fig9c",
    "fig9d",
    "fig10a",
    "fig10b",
    "fig10c",
    "fig10d",
];

pub fn preset_names() -> &'static [&'static str] {
    NAMES
}

fn chain(n: usize) -> LatticeSpec {
    LatticeSpec::chain(n, 1.0).with_frequency(OMEGA)
}

/// Chain driven by `A₁ = left·ω`, `A₂ = right·ω`, with `α₂ = 1`.
fn driven(n: usize, left: f64, right: f64) -> LatticeSpec {
    chain(n)
        .with_drive(left * OMEGA, right * OMEGA)
        .with_loss_at(2, 1.0)
}

fn three_site_undriven(alpha2: f64) -> LatticeSpec {
    LatticeSpec::chain(3, 1.0).with_loss_at(2, alpha2)
}

pub fn preset(name: &str) -> Option<Scenario> {
    use OutputKind::*;
    let s = match name {
        "fig2a" | "fig2b" | "fig2c" => {
            let alpha = match name {
                "fig2a" => 1.0,
                "fig2b" => 2.0,
                _ => 3.0,
            };
            let s = Scenario::new(name, Trajectory, three_site_undriven(alpha), 100.0)
                .describe("undriven three-site chain; P(t) settles at one half for any loss");
            let s = s.with_check(Check::between("p_equ", 0.495, 0.505));
            if name == "fig2a" {
                s.with_check(Check::between("p_equ_site1", 0.245, 0.255))
                    .with_check(Check::between("p_equ_site3", 0.245, 0.255))
            } else {
                s
            }
        }
        "fig2d" | "fig2e" | "fig2f" => {
            let alpha = match name {
                "fig2d" => 1.0,
                "fig2e" => 2.0,
                _ => 3.0,
            };
            let lattice = chain(3).with_drive(20.0, 0.0).with_loss_at(2, alpha);
            let s = Scenario::new(name, Trajectory, lattice, 30.0)
                .describe("three sites, left end driven with A1 = 20");
            if name == "fig2d" {
                s.with_check(Check::at_least("p_equ", 0.6))
            } else {
                s
            }
        }
        "fig3a" => Scenario::new(name, Equilibrium, driven(3, 0.0, 0.0), 100.0)
            .describe("<P>_equ versus A1/ω at two integration times")
            .with_sweep(Sweep::new(DriveAxis::LeftRatio).with_t_finals(&[20.0, 100.0])),
        "fig3b" => Scenario::new(name, Equilibrium, driven(3, 0.0, 0.0), 100.0)
            .describe("<P_n/P>_equ versus A1/ω at t_f = 100")
            .with_sweep(Sweep::new(DriveAxis::LeftRatio)),
        "fig3c" => Scenario::new(name, Spectrum, driven(3, 0.0, 0.0), 1.0)
            .describe("quasienergy spectrum versus A1/ω")
            .with_sweep(Sweep::new(DriveAxis::LeftRatio)),
        "fig3d" => Scenario::new(name, DarkMode, driven(3, 1.0, 0.0), 1.0)
            .describe("dark Floquet mode populations at A1 = 20"),
        "fig4a" => Scenario::new(name, Trajectory, three_site_undriven(1.0), 30.0)
            .describe("undriven reference: underdamped approach to 1/4, 1/4"),
        "fig4b" => Scenario::new(name, Trajectory, driven(3, 2.0, 2.0), 30.0)
            .describe("both ends driven with A = 40: overdamped approach to 1/4, 1/4"),
        "fig5a_undriven" => Scenario::new(name, Trajectory, driven(4, 0.0, 0.0), 100.0)
            .describe("four sites, no drive"),
        "fig5a_weak" => Scenario::new(name, Trajectory, driven(4, 0.0, 1.0), 100.0)
            .describe("four sites, right end driven with A2/ω = 1"),
        "fig5a_cdt" => Scenario::new(name, Trajectory, driven(4, 0.0, 2.4), 100.0)
            .describe("four sites, right end at the first J0 zero")
            .with_check(Check::between("p_equ", 0.48, 0.52)),
        "fig5b" => Scenario::new(name, Equilibrium, driven(4, 0.0, 0.0), 1000.0)
            .describe("four sites: <P>_equ versus A2/ω at t_f = 100 and 1000")
            .with_sweep(Sweep::new(DriveAxis::RightRatio).with_t_finals(&[100.0, 1000.0])),
        "fig6a" => Scenario::new(name, Trajectory, driven(4, 0.0, 1.0), 100.0)
            .describe("four sites, A2/ω = 1: all site populations"),
        "fig6b_left" => Scenario::new(name, Trajectory, driven(4, 2.4, 0.0), 1000.0)
            .describe("four sites, left end at the J0 zero: slow decay to zero"),
        "fig6b_right" => Scenario::new(name, Trajectory, driven(4, 0.0, 2.4), 1000.0)
            .describe("four sites, right end at the J0 zero: stable plateau"),
        "fig7a" | "fig7b" | "fig7c" => {
            let ratio = match name {
                "fig7a" => 0.0,
                "fig7b" => 2.0,
                _ => 2.4,
            };
            Scenario::new(name, Trajectory, driven(5, ratio, 0.0), 100.0)
                .describe("five sites, left end driven, three loss placements")
                .with_loss_sets(&PAIR_SETS)
        }
        "fig7d" | "fig7e" | "fig7f" => {
            let ratio = match name {
                "fig7d" => 0.0,
                "fig7e" => 2.0,
                _ => 2.4,
            };
            let s = Scenario::new(name, Trajectory, driven(6, 0.0, ratio), 100.0)
                .describe("six sites, right end driven, three loss placements")
                .with_loss_sets(&PAIR_SETS);
            if name == "fig7f" {
                s.with_check(Check::between("p_equ", 0.313, 0.353))
            } else {
                s
            }
        }
        "fig8a" => Scenario::new(name, Equilibrium, driven(5, 0.0, 0.0), 100.0)
            .describe("five sites: <P>_equ versus A1/ω")
            .with_loss_sets(&PAIR_SETS)
            .with_sweep(Sweep::new(DriveAxis::LeftRatio)),
        "fig8a_lifetime" => Scenario::new(name, DarkLifetime, driven(5, 0.0, 0.0), 1.0)
            .describe("five sites: -Im ε of the dark mode versus A1/ω")
            .with_loss_sets(&[&[1.0, 1.0], &[1.0, 0.0]])
            .with_sweep(Sweep::new(DriveAxis::LeftRatio)),
        "fig8b" => Scenario::new(name, Equilibrium, driven(6, 0.0, 0.0), 100.0)
            .describe("six sites: <P>_equ versus A2/ω")
            .with_loss_sets(&PAIR_SETS)
            .with_sweep(Sweep::new(DriveAxis::RightRatio)),
        "fig9ab" => Scenario::new(name, Spectrum, chain(5).with_loss_at(4, 1.0), 1.0)
            .describe("five sites with loss on site 4 only: spectrum versus A1/ω")
            .with_sweep(Sweep::new(DriveAxis::LeftRatio)),
        "fig9c" => Scenario::new(
            name,
            DarkMode,
            chain(5).with_drive(2.0 * OMEGA, 0.0).with_loss_at(4, 1.0),
            1.0,
        )
        .describe("five sites, loss on site 4: dark mode at A1/ω = 2"),
        "fig9d" => Scenario::new(
            name,
            Trajectory,
            chain(5).with_drive(2.0 * OMEGA, 0.0).with_loss_at(4, 1.0),
            1.0e4,
        )
        .describe("five sites, loss on site 4, A1/ω = 2: long-time populations"),
        "fig10a" => Scenario::new(name, Trajectory, driven(7, 2.0, 0.0), 100.0)
            .describe("seven sites, A1/ω = 2, loss starting on site 2")
            .with_loss_sets(&[&[1.0, 1.0, 1.0], &[1.0, 0.0, 0.0]]),
        "fig10b" => Scenario::new(name, DarkLifetime, driven(7, 0.0, 0.0), 1.0)
            .describe("seven sites: dark-mode -Im ε versus A1/ω")
            .with_loss_sets(&[&[1.0, 1.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]])
            .with_sweep(Sweep::new(DriveAxis::LeftRatio)),
        "fig10c" => Scenario::new(name, Trajectory, driven(7, 2.0, 0.0), 100.0)
            .describe("seven sites, A1/ω = 2, loss starting on site 4")
            .with_loss_sets(&[&[0.0, 1.0, 1.0], &[0.0, 1.0, 0.0]]),
        "fig10d" => Scenario::new(name, DarkLifetime, driven(7, 0.0, 0.0), 1.0)
            .describe("seven sites, loss starting on site 4: dark-mode -Im ε versus A1/ω")
            .with_loss_sets(&[&[0.0, 1.0, 1.0], &[0.0, 1.0, 0.0]])
            .with_sweep(Sweep::new(DriveAxis::LeftRatio)),
        _ => return None,
    };
    Some(s)
}
