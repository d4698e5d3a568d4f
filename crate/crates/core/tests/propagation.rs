use floq_core::{
    equilibrium_average, evolve, integrate, loss_rate_residual, AmplitudeState, LatticeSpec,
    StepSize, TimeGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;

const OMEGA: f64 = 20.0;

fn driven(n: usize, left: f64, right: f64) -> LatticeSpec {
    LatticeSpec::chain(n, 1.0)
        .with_frequency(OMEGA)
        .with_drive(left * OMEGA, right * OMEGA)
}

fn final_state(spec: &LatticeSpec, steps: usize, periods: f64) -> Vec<Complex64> {
    let lat = spec.clone().validate().unwrap();
    let t_end = periods * lat.period().unwrap();
    let grid = TimeGrid::new(0.0, t_end, StepSize::PerPeriod(steps)).with_stride(usize::MAX);
    let init = AmplitudeState::localized(lat.n_sites(), 1).unwrap();
    integrate(&lat, &init, &grid, |_, _| {}).unwrap().amplitudes
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// RK4 loses norm at order `(‖H‖dt)⁶` per step, so drives beyond
    /// `A/ω = 1` need the finer decay-rate resolution to stay within 1e-9.
    #[test]
    fn conservative_norm_is_kept_over_100_periods(
        n in 2usize..7, left in 0.0f64..4.0, right in 0.0f64..4.0,
    ) {
        let lat = driven(n, left, right).validate().unwrap();
        let steps = if left.max(right) <= 1.0 { 1000 } else { 4000 };
        let grid = TimeGrid::new(0.0, 100.0 * lat.period().unwrap(), StepSize::PerPeriod(steps))
            .with_stride(50);
        let traj = evolve(&lat, &AmplitudeState::localized(n, 1).unwrap(), &grid).unwrap();
        let worst = traj.total.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-9, "|P-1| = {worst:e}");
    }

    #[test]
    fn lossy_population_never_increases(
        left in 0.0f64..4.0, alpha2 in 0.0f64..4.0, alpha4 in 0.0f64..4.0,
    ) {
        let lat = driven(5, left, 0.0)
            .with_even_losses(&[alpha2, alpha4])
            .validate()
            .unwrap();
        let traj = evolve(
            &lat,
            &AmplitudeState::localized(5, 1).unwrap(),
            &TimeGrid::default_for(&lat, 10.0),
        )
        .unwrap();
        for w in traj.total.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-14, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn loss_identity_holds_at_default_steps(
        n in prop::sample::select(vec![3usize, 4, 5]),
        left in 0.0f64..4.0, right in 0.0f64..4.0, alpha in 0.1f64..3.0,
    ) {
        let lat = driven(n, left, right).with_loss_at(2, alpha).validate().unwrap();
        let traj = evolve(
            &lat,
            &AmplitudeState::localized(n, 1).unwrap(),
            &TimeGrid::default_for(&lat, 5.0),
        )
        .unwrap();
        let residual = loss_rate_residual(&traj, &lat).unwrap();
        prop_assert!(residual <= 1e-5, "residual {residual:e}");
    }
}

#[test]
fn undriven_loss_identity_holds_at_default_steps() {
    let lat = LatticeSpec::chain(3, 1.0)
        .with_loss_at(2, 1.0)
        .validate()
        .unwrap();
    let traj = evolve(
        &lat,
        &AmplitudeState::localized(3, 1).unwrap(),
        &TimeGrid::default_for(&lat, 20.0),
    )
    .unwrap();
    assert!(loss_rate_residual(&traj, &lat).unwrap() <= 1e-5);
}

/// Coarser grids are pre-asymptotic for one-sided drives: a fifth-order
/// term dominates and the ratio starts near 32.
#[test]
fn step_halving_shows_fourth_order() {
    for spec in [
        driven(3, 1.0, 0.0).with_loss_at(2, 1.0),
        driven(4, 0.5, 2.4).with_loss_at(2, 1.0),
        driven(5, 2.0, 0.0).with_even_losses(&[1.0, 1.0]),
    ] {
        let coarse = final_state(&spec, 800, 1.0);
        let mid = final_state(&spec, 1600, 1.0);
        let fine = final_state(&spec, 3200, 1.0);
        let factor = distance(&coarse, &mid) / distance(&mid, &fine);
        assert!((12.0..=20.0).contains(&factor), "factor {factor}");
    }
}

#[test]
fn equilibrium_average_of_a_constant_is_the_constant() {
    let lat = LatticeSpec::chain(2, 1e-300).validate().unwrap();
    let grid = TimeGrid::new(0.0, 3.0, StepSize::Fixed(0.01)).with_stride(7);
    let traj = evolve(&lat, &AmplitudeState::localized(2, 2).unwrap(), &grid).unwrap();
    let eq = equilibrium_average(&traj, 1.234).unwrap();
    assert!((eq.total - 1.0).abs() < 1e-15);
    assert!((eq.per_site[1] - 1.0).abs() < 1e-15);
    assert!((eq.delta - 1.234).abs() < 1e-12);
}
