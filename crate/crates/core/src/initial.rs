//! Initial data and the BKW exact solution.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{maxwellian, maxwellian_density, Moments};
use crate::error::{Error, Result};
use crate::spectral::{project, SpectralField, VelocityGrid};

/// Relaxation rate of `K(t)` for 2-d Maxwell molecules with unit angular mass.
pub const BKW_RATE: f64 = 0.125;

/// 2-d BKW solution for Maxwell molecules, scaled to temperature `T`:
///
/// `f(v, t) = exp(-|v|^2 / (2KT)) / (2 pi K T) * (2 - 1/K + (1-K)/(2K^2) |v|^2/T)`
/// with `K(t) = 1 - exp(-rate t) / 2`. Mass 1, zero mean velocity,
/// temperature `T` for all `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bkw {
    pub temperature: f64,
    pub rate: f64,
}

impl Bkw {
    pub fn new(temperature: f64) -> Result<Self> {
        Self::with_rate(temperature, BKW_RATE)
    }

    pub fn with_rate(temperature: f64, rate: f64) -> Result<Self> {
        if !(temperature > 0.0) || !(rate > 0.0) {
            return Err(Error::Config(format!(
                "BKW needs positive temperature and rate, got {temperature}, {rate}"
            )));
        }
        Ok(Self { temperature, rate })
    }

    /// `K(t)`.
    pub fn shape_factor(&self, t: f64) -> f64 {
        1.0 - 0.5 * (-self.rate * t).exp()
    }

    pub fn density(&self, v: &[f64], t: f64) -> f64 {
        let k = self.shape_factor(t);
        let x = v.iter().map(|a| a * a).sum::<f64>() / self.temperature;
        let poly = 2.0 - 1.0 / k + (1.0 - k) / (2.0 * k * k) * x;
        (-x / (2.0 * k)).exp() / (2.0 * PI * k * self.temperature) * poly
    }

    pub fn time_derivative(&self, v: &[f64], t: f64) -> f64 {
        let k = self.shape_factor(t);
        let dk = 0.5 * self.rate * (-self.rate * t).exp();
        let x = v.iter().map(|a| a * a).sum::<f64>() / self.temperature;
        let poly = 2.0 - 1.0 / k + (1.0 - k) / (2.0 * k * k) * x;
        let dpoly = 1.0 / (k * k) + x * (k - 2.0) / (2.0 * k * k * k);
        let dh = (-x / (2.0 * k)).exp() * ((-1.0 / (k * k) + x / (2.0 * k * k * k)) * poly + dpoly / k);
        dh * dk / (2.0 * PI * self.temperature)
    }

    pub fn moments(&self) -> Moments {
        Moments {
            rho: 1.0,
            u: vec![0.0, 0.0],
            temperature: self.temperature,
        }
    }

    fn check_grid(grid: &VelocityGrid) -> Result<()> {
        if grid.dim() != 2 {
            return Err(Error::Config("the BKW solution is two-dimensional".into()));
        }
        Ok(())
    }

    pub fn project(&self, grid: &VelocityGrid, order: usize, t: f64) -> Result<SpectralField> {
        Self::check_grid(grid)?;
        project(&grid.sample(|v| self.density(v, t)), grid, order)
    }

    pub fn project_time_derivative(
        &self,
        grid: &VelocityGrid,
        order: usize,
        t: f64,
    ) -> Result<SpectralField> {
        Self::check_grid(grid)?;
        project(&grid.sample(|v| self.time_derivative(v, t)), grid, order)
    }
}

/// Supported initial conditions.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Maxwellian(Moments),
    Bkw(Bkw),
    /// Sum of two Maxwellians.
    TwoMaxwellians(Moments, Moments),
    /// Explicit coefficients, padded or truncated to the run order.
    Coefficients(SpectralField),
}

impl InitialCondition {
    /// `P_N f_0`.
    pub fn field(&self, grid: &VelocityGrid, order: usize) -> Result<SpectralField> {
        match self {
            InitialCondition::Maxwellian(m) => maxwellian(m, grid, order),
            InitialCondition::Bkw(b) => b.project(grid, order, 0.0),
            InitialCondition::TwoMaxwellians(a, b) => {
                let ma = maxwellian(a, grid, order)?;
                let mb = maxwellian(b, grid, order)?;
                Ok(&ma + &mb)
            }
            InitialCondition::Coefficients(f) => {
                if f.dim() != grid.dim() {
                    return Err(Error::Config("coefficient file dimension mismatch".into()));
                }
                if f.order() == order {
                    Ok(f.clone())
                } else if f.order() < order {
                    f.pad(order)
                } else {
                    f.truncate(order)
                }
            }
        }
    }

    /// Moments defining the frozen equilibrium `M_N`.
    ///
    /// Analytic for the closed-form data; grid quadrature on `P_N f_0` for
    /// coefficient files.
    pub fn equilibrium_moments(&self, grid: &VelocityGrid, order: usize) -> Result<Moments> {
        match self {
            InitialCondition::Maxwellian(m) => Ok(m.clone()),
            InitialCondition::Bkw(b) => Ok(b.moments()),
            InitialCondition::TwoMaxwellians(a, b) => mixture_moments(a, b),
            InitialCondition::Coefficients(_) => crate::equilibrium::moments(&self.field(grid, order)?, grid),
        }
    }
}

fn mixture_moments(a: &Moments, b: &Moments) -> Result<Moments> {
    if a.dim() != b.dim() {
        return Err(Error::Config("mixture components differ in dimension".into()));
    }
    let d = a.dim() as f64;
    let rho = a.rho + b.rho;
    let u: Vec<f64> =
        a.u.iter()
            .zip(&b.u)
            .map(|(ua, ub)| (a.rho * ua + b.rho * ub) / rho)
            .collect();
    let energy = |m: &Moments| m.rho * (d * m.temperature + m.u.iter().map(|x| x * x).sum::<f64>());
    let u2: f64 = u.iter().map(|x| x * x).sum();
    Moments::new(rho, u, (energy(a) + energy(b) - rho * u2) / (d * rho))
}

/// Continuum density of an initial condition where one exists.
pub fn density(ic: &InitialCondition, v: &[f64]) -> Option<f64> {
    match ic {
        InitialCondition::Maxwellian(m) => Some(maxwellian_density(m, v)),
        InitialCondition::Bkw(b) => Some(b.density(v, 0.0)),
        InitialCondition::TwoMaxwellians(a, b) => Some(maxwellian_density(a, v) + maxwellian_density(b, v)),
        InitialCondition::Coefficients(_) => None,
    }
}
