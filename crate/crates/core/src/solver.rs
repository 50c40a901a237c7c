//! Time integration of the spectral schemes with per-step diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collision::{ep_rhs, q_quadratic};
use crate::equilibrium::{maxwellian, moments_of_values, Moments};
use crate::error::{Error, Result};
use crate::kernel::KernelTable;
use crate::spectral::{evaluate, grid_l1, grid_linf, norm, Norm, SpectralField, VelocityGrid};

/// Values below this are clipped before taking logarithms in the entropy.
pub const ENTROPY_FLOOR: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `df/dt = Q_N(f + M_N, f - M_N)`.
    EquilibriumPreserving,
    /// `df/dt = Q_N(f, f)`.
    Classical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    #[serde(default = "default_true")]
    pub entropy: bool,
}

fn default_true() -> bool {
    true
}

impl SolverConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            record_every: 1,
            entropy: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end = {} must be at least dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// Observables at one recorded time. `g = f_N - M_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub moments: Moments,
    pub g_norm_l1: f64,
    pub g_norm_l2: f64,
    pub g_norm_linf: f64,
    pub f0_coeff: Complex64,
    pub entropy: Option<f64>,
    pub min_grid_value: f64,
}

/// Computes the diagnostics of `f` against the equilibrium `m_n`.
pub fn diagnose(
    t: f64,
    f: &SpectralField,
    m_n: &SpectralField,
    grid: &VelocityGrid,
    with_entropy: bool,
) -> Result<DiagnosticsRecord> {
    let values = evaluate(f, grid)?;
    let g = f - m_n;
    let g_values = evaluate(&g, grid)?;
    let entropy = with_entropy.then(|| {
        values
            .iter()
            .map(|v| {
                let c = v.max(ENTROPY_FLOOR);
                c * c.ln()
            })
            .sum::<f64>()
            * grid.cell_volume()
    });
    Ok(DiagnosticsRecord {
        t,
        moments: moments_of_values(&values, grid)?,
        g_norm_l1: grid_l1(&g_values, grid),
        g_norm_l2: norm(&g, Norm::L2),
        g_norm_linf: grid_linf(&g_values),
        f0_coeff: f.mean_coeff(),
        entropy,
        min_grid_value: values.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// One classical fourth-order Runge-Kutta step from time `t`.
pub fn step_rk4<F>(f: &SpectralField, t: f64, dt: f64, mut rhs: F) -> Result<SpectralField>
where
    F: FnMut(&SpectralField) -> Result<SpectralField>,
{
    let mut stage = |x: &SpectralField| -> Result<SpectralField> {
        match rhs(x) {
            Ok(k) if k.is_finite() => Ok(k),
            Ok(_) | Err(Error::Overflow) => Err(Error::BlowUp { t }),
            Err(e) => Err(e),
        }
    };
    let k1 = stage(f)?;
    let k2 = stage(&f.axpy(0.5 * dt, &k1))?;
    let k3 = stage(&f.axpy(0.5 * dt, &k2))?;
    let k4 = stage(&f.axpy(dt, &k3))?;
    let incr = k1.axpy(2.0, &k2).axpy(2.0, &k3).axpy(1.0, &k4);
    let next = f.axpy(dt / 6.0, &incr);
    if !next.is_finite() {
        return Err(Error::BlowUp { t: t + dt });
    }
    Ok(next)
}

/// Preflight step estimate `0.5 / L`.
///
/// `L = 2 max_m sum_l |w(l, m)| |f_l|` bounds the coefficient-l1 Lipschitz
/// constant of both right-hand sides near `f`, with `w` the symmetrized modes.
/// The bound ignores cancellation between modes and is typically several
/// times smaller than the step RK4 actually tolerates.
pub fn stability_ceiling(table: &KernelTable, f: &SpectralField) -> f64 {
    let shape = table.shape();
    let s = shape.len();
    let fc = f.coeffs();
    let mut worst = 0.0f64;
    for mi in 0..s {
        let m = shape.mode(mi);
        let mut acc = 0.0;
        for li in 0..s {
            let l = shape.mode(li);
            let k: Vec<i64> = (0..shape.dim()).map(|j| l[j] + m[j]).collect();
            if shape.flat(&k).is_none() {
                continue;
            }
            let w = 0.5 * (table.row(li)[mi] + table.row(mi)[li]);
            acc += w.norm() * fc[li].norm();
        }
        worst = worst.max(acc);
    }
    if worst == 0.0 {
        f64::INFINITY
    } else {
        0.5 / (2.0 * worst)
    }
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_field: SpectralField,
    /// The frozen `M_N`.
    pub equilibrium: SpectralField,
    /// Advisory `stability_ceiling` at `f0`; not enforced.
    pub dt_ceiling: f64,
    pub steps: usize,
}

/// Integrates from `f0` with `M_N` built once from `equilibrium`.
pub fn run(
    f0: &SpectralField,
    equilibrium: &Moments,
    table: &KernelTable,
    grid: &VelocityGrid,
    config: &SolverConfig,
) -> Result<RunOutput> {
    run_observed(f0, equilibrium, table, grid, config, |_| {})
}

/// `run`, handing every record to `observer` as soon as it is computed.
pub fn run_observed<O>(
    f0: &SpectralField,
    equilibrium: &Moments,
    table: &KernelTable,
    grid: &VelocityGrid,
    config: &SolverConfig,
    observer: O,
) -> Result<RunOutput>
where
    O: FnMut(&DiagnosticsRecord),
{
    let m_n = maxwellian(equilibrium, grid, f0.order())?;
    run_with_equilibrium(f0, m_n, table, grid, config, observer)
}

/// Integrates with an explicitly supplied `M_N`.
pub fn run_with_equilibrium<O>(
    f0: &SpectralField,
    m_n: SpectralField,
    table: &KernelTable,
    grid: &VelocityGrid,
    config: &SolverConfig,
    mut observer: O,
) -> Result<RunOutput>
where
    O: FnMut(&DiagnosticsRecord),
{
    config.validate()?;
    if f0.shape() != table.shape() || m_n.shape() != table.shape() {
        return Err(Error::Argument(format!(
            "initial data {:?} and kernel table {:?} differ",
            f0.shape(),
            table.shape()
        )));
    }
    grid.check_order(f0.order())?;
    let dt_ceiling = stability_ceiling(table, f0);

    let steps = config.steps();
    let mut records = Vec::with_capacity(steps / config.record_every + 2);
    let mut f = f0.clone();
    let mut emit = |t: f64, f: &SpectralField, records: &mut Vec<DiagnosticsRecord>| -> Result<()> {
        let rec = diagnose(t, f, &m_n, grid, config.entropy)?;
        observer(&rec);
        records.push(rec);
        Ok(())
    };
    emit(0.0, &f, &mut records)?;
    for i in 0..steps {
        let t = i as f64 * config.dt;
        let dt = if i + 1 == steps {
            config.t_end - t
        } else {
            config.dt
        };
        f = match config.scheme {
            Scheme::EquilibriumPreserving => step_rk4(&f, t, dt, |x| ep_rhs(x, &m_n, table))?,
            Scheme::Classical => step_rk4(&f, t, dt, |x| q_quadratic(x, x, table))?,
        };
        if (i + 1) % config.record_every == 0 || i + 1 == steps {
            let t_next = if i + 1 == steps {
                config.t_end
            } else {
                (i + 1) as f64 * config.dt
            };
            emit(t_next, &f, &mut records)?;
        }
    }
    Ok(RunOutput {
        records,
        final_field: f,
        equilibrium: m_n,
        dt_ceiling,
        steps,
    })
}

/// Exponential fit `C exp(-rate t)` of the recorded `g` L1 norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub decay_c: f64,
    pub decay_rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares line through `log g_norm_l1` over records with `t` in `window`.
pub fn fit_decay(records: &[DiagnosticsRecord], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1 && r.g_norm_l1 > 1e-14)
        .map(|r| (r.t, r.g_norm_l1.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::Argument(format!(
            "decay fit needs at least 10 usable records in [{}, {}], found {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if stt == 0.0 {
        return Err(Error::Argument("decay fit window contains a single time".into()));
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(DecayFit {
        decay_c: intercept.exp(),
        decay_rate: -slope,
        r_squared,
        samples: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Shape;

    fn record(t: f64, g: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            moments: Moments {
                rho: 1.0,
                u: vec![0.0, 0.0],
                temperature: 0.2,
            },
            g_norm_l1: g,
            g_norm_l2: g,
            g_norm_linf: g,
            f0_coeff: Complex64::new(0.0, 0.0),
            entropy: None,
            min_grid_value: 0.0,
        }
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let recs: Vec<_> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.2;
                record(t, 2.0 * (-0.7 * t).exp())
            })
            .collect();
        let fit = fit_decay(&recs, (0.0, 10.0)).unwrap();
        assert!((fit.decay_c - 2.0).abs() < 1e-10);
        assert!((fit.decay_rate - 0.7).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fit_of_constant_records_has_zero_rate() {
        let recs: Vec<_> = (0..20).map(|i| record(i as f64, 0.3)).collect();
        let fit = fit_decay(&recs, (0.0, 20.0)).unwrap();
        assert!(fit.decay_rate.abs() < 1e-14);
    }

    #[test]
    fn fit_needs_ten_records() {
        let recs: Vec<_> = (0..9).map(|i| record(i as f64, 1.0)).collect();
        assert!(matches!(fit_decay(&recs, (0.0, 20.0)), Err(Error::Argument(_))));
    }

    #[test]
    fn rk4_with_zero_rhs_is_identity() {
        let mut f = SpectralField::zeros(Shape::new(2, 2).unwrap());
        f.set_coeff(&[1, 0], Complex64::new(0.3, -0.1)).unwrap();
        let z = SpectralField::zeros(f.shape());
        let next = step_rk4(&f, 0.0, 0.1, |_| Ok(z.clone())).unwrap();
        assert_eq!(next, f);
    }

    #[test]
    fn rk4_local_error_on_linear_decay() {
        let mut f = SpectralField::zeros(Shape::new(2, 1).unwrap());
        f.set_coeff(&[0, 0], Complex64::new(1.0, 0.0)).unwrap();
        for dt in [0.1, 0.05] {
            let next = step_rk4(&f, 0.0, dt, |x| Ok(x.scaled(-1.0))).unwrap();
            let err = (next.mean_coeff().re - (-dt).exp()).abs();
            // Local error of RK4 on y' = -y is dt^5 / 120 to leading order.
            assert!(
                err < 1.1 * dt.powi(5) / 120.0 && err > 0.9 * dt.powi(5) / 120.0,
                "{err}"
            );
        }
    }

    #[test]
    fn rk4_reports_blow_up_time() {
        let f = SpectralField::zeros(Shape::new(2, 1).unwrap());
        let err = step_rk4(&f, 1.5, 0.1, |_| Err(Error::Overflow)).unwrap_err();
        assert!(matches!(err, Error::BlowUp { t } if t == 1.5));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(Scheme::Classical, 0.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(Scheme::Classical, 0.1, 0.05)
            .validate()
            .is_err());
        let mut c = SolverConfig::new(Scheme::Classical, 0.1, 1.0);
        c.record_every = 0;
        assert!(c.validate().is_err());
        assert_eq!(SolverConfig::new(Scheme::Classical, 0.1, 1.0).steps(), 10);
        assert_eq!(SolverConfig::new(Scheme::Classical, 0.3, 1.0).steps(), 4);
    }
}
