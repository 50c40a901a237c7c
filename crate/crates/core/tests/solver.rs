mod common;

use ep_spectral::collision::ep_rhs;
use ep_spectral::equilibrium::{maxwellian, Moments};
use ep_spectral::experiment::{padded_distance, terminal_state};
use ep_spectral::initial::{Bkw, InitialCondition};
use ep_spectral::solver::{run, step_rk4, Scheme, SolverConfig};
use ep_spectral::spectral::{norm, Norm, VelocityGrid};
use ep_spectral::Error;

fn bkw() -> Bkw {
    Bkw::new(0.2).unwrap()
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let table = common::table2(8);
    let grid = VelocityGrid::for_order(2, 8).unwrap();
    let m = Moments::new(1.0, vec![0.0, 0.0], 0.2).unwrap();
    let f0 = maxwellian(&m, &grid, 8).unwrap();
    let mut config = SolverConfig::new(Scheme::EquilibriumPreserving, 0.05, 50.0);
    config.record_every = 10;
    let out = run(&f0, &m, table, &grid, &config).unwrap();
    assert_eq!(out.steps, 1000);
    for r in &out.records {
        assert!(r.g_norm_l1 < 1e-12 && r.g_norm_l2 < 1e-12 && r.g_norm_linf < 1e-12);
    }
    assert!(out.final_field.max_abs_diff(&f0) < 1e-12);
}

#[test]
fn mass_mode_is_invariant_along_bkw_run() {
    let table = common::table2(8);
    let grid = VelocityGrid::for_order(2, 8).unwrap();
    let b = bkw();
    let f0 = b.project(&grid, 8, 0.0).unwrap();
    for scheme in [Scheme::EquilibriumPreserving, Scheme::Classical] {
        let out = run(
            &f0,
            &b.moments(),
            table,
            &grid,
            &SolverConfig::new(scheme, 0.05, 50.0),
        )
        .unwrap();
        let c0 = out.records[0].f0_coeff;
        let drift = out
            .records
            .iter()
            .map(|r| (r.f0_coeff - c0).norm())
            .fold(0.0, f64::max);
        assert!(drift < 1e-12, "{scheme:?}: {drift:e}");
    }
}

#[test]
fn bkw_fluctuation_eventually_decreases_log_linearly() {
    let table = common::table2(16);
    let grid = VelocityGrid::for_order(2, 16).unwrap();
    let b = bkw();
    let f0 = b.project(&grid, 16, 0.0).unwrap();
    let mut config = SolverConfig::new(Scheme::EquilibriumPreserving, 0.05, 20.0);
    config.record_every = 4;
    let out = run(&f0, &b.moments(), table, &grid, &config).unwrap();
    let late: Vec<_> = out.records.iter().filter(|r| r.t >= 2.0).collect();
    assert!(late.windows(2).all(|w| w[1].g_norm_l1 < w[0].g_norm_l1));
    let fit = ep_spectral::solver::fit_decay(&out.records, (2.0, 20.0)).unwrap();
    assert!(fit.decay_rate > 0.0 && fit.r_squared > 0.99, "{fit:?}");

    let first = &out.records[0].moments;
    for r in &out.records {
        let du = r
            .moments
            .u
            .iter()
            .zip(&first.u)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max);
        assert!(du < 1e-4 && (r.moments.temperature - first.temperature).abs() < 1e-4);
    }
}

#[test]
fn records_are_ordered_and_finite() {
    let table = common::table2(4);
    let grid = VelocityGrid::for_order(2, 4).unwrap();
    let b = bkw();
    let f0 = b.project(&grid, 4, 0.0).unwrap();
    let mut config = SolverConfig::new(Scheme::Classical, 0.3, 2.0);
    config.record_every = 2;
    let out = run(&f0, &b.moments(), table, &grid, &config).unwrap();
    let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
    let expected = [0.0, 0.6, 1.2, 1.8, 2.0];
    assert_eq!(times.len(), expected.len());
    assert!(
        times.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12),
        "{times:?}"
    );
    assert_eq!(*times.last().unwrap(), 2.0);
    for r in &out.records {
        assert!(r.g_norm_l1.is_finite() && r.entropy.unwrap().is_finite() && r.min_grid_value.is_finite());
    }
}

#[test]
fn sobolev_norms_stay_bounded() {
    let table = common::table2(8);
    let grid = VelocityGrid::for_order(2, 8).unwrap();
    let b = bkw();
    let m_n = maxwellian(&b.moments(), &grid, 8).unwrap();
    let mut f = b.project(&grid, 8, 0.0).unwrap();
    let (dt, steps) = (0.05, 400);
    let mut history = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        history.push([norm(&f, Norm::Sobolev(1.0)), norm(&f, Norm::Sobolev(2.0))]);
        f = step_rk4(&f, i as f64 * dt, dt, |x| ep_rhs(x, &m_n, table)).unwrap();
    }
    let early = &history[..=steps / 10];
    for j in 0..2 {
        let bound = 10.0 * early.iter().map(|h| h[j]).fold(0.0, f64::max);
        assert!(history.iter().all(|h| h[j] < bound));
    }
}

#[test]
fn rk4_is_fourth_order_on_bkw() {
    let table = common::table2(8);
    let b = bkw();
    let f: Vec<_> = [0.4, 0.2, 0.1]
        .iter()
        .map(|&dt| {
            terminal_state(
                &InitialCondition::Bkw(b),
                table,
                &SolverConfig::new(Scheme::EquilibriumPreserving, dt, 2.0),
            )
            .unwrap()
        })
        .collect();
    let d1 = padded_distance(&f[0], &f[1], 8).unwrap();
    let d2 = padded_distance(&f[1], &f[2], 8).unwrap();
    let order = (d1 / d2).log2();
    assert!(order >= 3.8, "observed order {order}");
}

#[test]
fn runs_are_deterministic() {
    let table = common::table2(4);
    let b = bkw();
    let config = SolverConfig::new(Scheme::EquilibriumPreserving, 0.1, 1.0);
    assert_eq!(
        terminal_state(&InitialCondition::Bkw(b), table, &config).unwrap(),
        terminal_state(&InitialCondition::Bkw(b), table, &config).unwrap()
    );
}

#[test]
fn overflow_is_reported_as_blow_up() {
    let table = common::table2(4);
    let grid = VelocityGrid::for_order(2, 4).unwrap();
    let m = Moments::new(1e160, vec![0.0, 0.0], 0.2).unwrap();
    let f0 = maxwellian(&m, &grid, 4).unwrap().scaled(1.5);
    let err = run(
        &f0,
        &m,
        table,
        &grid,
        &SolverConfig::new(Scheme::EquilibriumPreserving, 0.1, 1.0),
    )
    .unwrap_err();
    assert!(matches!(err, Error::BlowUp { t } if t == 0.0), "{err:?}");
}

#[test]
fn order_mismatch_is_rejected() {
    let grid = VelocityGrid::for_order(2, 4).unwrap();
    let b = bkw();
    let f0 = b.project(&grid, 4, 0.0).unwrap();
    let config = SolverConfig::new(Scheme::Classical, 0.1, 1.0);
    assert!(matches!(
        run(&f0, &b.moments(), common::table2(8), &grid, &config),
        Err(Error::Argument(_))
    ));
}
