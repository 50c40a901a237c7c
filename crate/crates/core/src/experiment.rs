//! BKW validation and convergence ladders.

use serde::Serialize;

use crate::collision::{perturbation_norm, q_quadratic};
use crate::equilibrium::maxwellian;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::initial::{Bkw, InitialCondition};
use crate::kernel::KernelTable;
use crate::solver::{run_observed, SolverConfig};
use crate::spectral::{norm, Norm, SpectralField, VelocityGrid};

/// `|| d/dt P_N f_BKW - Q_N(P_N f_BKW, P_N f_BKW) ||_L2` at time `t`.
pub fn bkw_residual(bkw: &Bkw, table: &KernelTable, t: f64) -> Result<f64> {
    let order = table.shape().order();
    let grid = VelocityGrid::for_order(2, order)?;
    let f = bkw.project(&grid, order, t)?;
    let q = q_quadratic(&f, &f, table)?;
    let dt = bkw.project_time_derivative(&grid, order, t)?;
    Ok(norm(&(&dt - &q), Norm::L2))
}

/// Largest BKW residual over `times`.
pub fn max_bkw_residual(bkw: &Bkw, table: &KernelTable, times: &[f64]) -> Result<f64> {
    times
        .iter()
        .map(|&t| bkw_residual(bkw, table, t))
        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
}

/// True when consecutive ratios `e[i] / e[i+1]` exceed one and strictly increase.
pub fn accelerating(errors: &[f64]) -> bool {
    if errors.len() < 3 || errors.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return false;
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    ratios[0] > 1.0 && ratios.windows(2).all(|w| w[1] > w[0])
}

/// Ratios `e[i] / e[i+1]`.
pub fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRow {
    pub order: usize,
    pub consistency_error: f64,
    pub solution_error: f64,
    /// Terminal error against the projected BKW solution.
    pub analytic_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderReport {
    pub reference_order: usize,
    pub rows: Vec<LadderRow>,
    pub consistency_accelerating: bool,
    pub solution_accelerating: bool,
}

pub fn check_ladder(orders: &[usize], reference: usize) -> Result<()> {
    if orders.len() < 2 {
        return Err(Error::Config(
            "the order ladder needs at least two entries".into(),
        ));
    }
    if orders.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "the order ladder must be strictly increasing".into(),
        ));
    }
    let top = *orders.last().expect("non-empty");
    if reference < 2 * top {
        return Err(Error::Config(format!(
            "reference order {reference} must be at least twice the largest order {top}"
        )));
    }
    Ok(())
}

/// State at which the operator consistency is measured: the BKW solution at
/// `t`, or the initial data itself for the other initial conditions.
fn consistency_state(
    ic: &InitialCondition,
    grid: &VelocityGrid,
    order: usize,
    t: f64,
) -> Result<SpectralField> {
    match ic {
        InitialCondition::Bkw(b) => b.project(grid, order, t),
        _ => ic.field(grid, order),
    }
}

/// `perturbation_norm` at the consistency state, with `M_N` from the
/// equilibrium moments of `ic`, for each table in `tables`.
pub fn consistency_ladder(
    ic: &InitialCondition,
    tables: &[&KernelTable],
    reference: &KernelTable,
    t: f64,
    sobolev_index: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    exec.map_indices(tables.len(), |i| {
        let shape = tables[i].shape();
        let grid = VelocityGrid::for_order(shape.dim(), shape.order())?;
        let f = consistency_state(ic, &grid, shape.order(), t)?;
        let m = maxwellian(
            &ic.equilibrium_moments(&grid, shape.order())?,
            &grid,
            shape.order(),
        )?;
        perturbation_norm(&f, &m, tables[i], reference, sobolev_index)
    })
    .into_iter()
    .collect()
}

/// Runs `P_N f0` to `config.t_end` and returns the final field.
pub fn terminal_state(
    ic: &InitialCondition,
    table: &KernelTable,
    config: &SolverConfig,
) -> Result<SpectralField> {
    let shape = table.shape();
    let grid = VelocityGrid::for_order(shape.dim(), shape.order())?;
    let f0 = ic.field(&grid, shape.order())?;
    let moments = ic.equilibrium_moments(&grid, shape.order())?;
    let mut quiet = config.clone();
    quiet.record_every = quiet.steps();
    quiet.entropy = false;
    Ok(run_observed(&f0, &moments, table, &grid, &quiet, |_| {})?.final_field)
}

/// L2 distance between fields of possibly different order, after padding to `order`.
pub fn padded_distance(a: &SpectralField, b: &SpectralField, order: usize) -> Result<f64> {
    let pad = |f: &SpectralField| {
        if f.order() == order {
            Ok(f.clone())
        } else {
            f.pad(order)
        }
    };
    Ok(norm(&(&pad(a)? - &pad(b)?), Norm::L2))
}

/// Consistency and solution errors on an order ladder.
///
/// `tables` holds one table per ladder order, increasing; `reference` is the
/// table of order `N_ref >= 2 max N`. Consistency is measured at
/// `consistency_time` for BKW data. For BKW the terminal states are also
/// compared with the exact solution. Ladder entries run concurrently under
/// `exec`.
pub fn ladder(
    ic: &InitialCondition,
    tables: &[&KernelTable],
    reference: &KernelTable,
    config: &SolverConfig,
    consistency_time: f64,
    exec: Execution,
) -> Result<LadderReport> {
    let orders: Vec<usize> = tables.iter().map(|t| t.shape().order()).collect();
    let n_ref = reference.shape().order();
    check_ladder(&orders, n_ref)?;
    let consistency = consistency_ladder(ic, tables, reference, consistency_time, 0.0, exec)?;

    let runs: Vec<Result<SpectralField>> = exec.map_indices(tables.len() + 1, |i| {
        let table = if i < tables.len() { tables[i] } else { reference };
        terminal_state(ic, table, config)
    });
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let f_ref = runs.pop().expect("reference run");
    let exact = match ic {
        InitialCondition::Bkw(b) => {
            let grid = VelocityGrid::for_order(2, n_ref)?;
            Some(b.project(&grid, n_ref, config.t_end)?)
        }
        _ => None,
    };

    let mut rows = Vec::with_capacity(orders.len());
    for (i, f) in runs.iter().enumerate() {
        rows.push(LadderRow {
            order: orders[i],
            consistency_error: consistency[i],
            solution_error: padded_distance(f, &f_ref, n_ref)?,
            analytic_error: exact.as_ref().map(|e| padded_distance(f, e, n_ref)).transpose()?,
        });
    }
    let sol: Vec<f64> = rows.iter().map(|r| r.solution_error).collect();
    Ok(LadderReport {
        reference_order: n_ref,
        consistency_accelerating: accelerating(&consistency),
        solution_accelerating: accelerating(&sol),
        rows,
    })
}
