//! Moments, Maxwellians, and the micro-macro split `f_N = M_N + g_N`.
//!
//! Moments use the closed trapezoid rule on `[-pi, pi]` per axis. For
//! periodic integrands it coincides with the periodic sum; for the
//! non-periodic weights `v_j` it averages the two endpoint values, which
//! keeps the rule symmetric about the origin.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{evaluate, project, SpectralField, VelocityGrid};

/// Largest tolerated Maxwellian value ratio at the box boundary.
pub const SUPPORT_LIMIT: f64 = 1e-6;

/// Density, mean velocity and temperature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub rho: f64,
    pub u: Vec<f64>,
    pub temperature: f64,
}

impl Moments {
    pub fn new(rho: f64, u: Vec<f64>, temperature: f64) -> Result<Self> {
        let m = Self { rho, u, temperature };
        m.check()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    fn check(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::NonPhysical(format!(
                "density {} is not positive",
                self.rho
            )));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::NonPhysical(format!(
                "temperature {} is not positive",
                self.temperature
            )));
        }
        if self.u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonPhysical("non-finite mean velocity".into()));
        }
        Ok(())
    }
}

/// Unnormalized moments: mass, momentum and `int |v|^2 f`.
#[derive(Clone, Debug, PartialEq)]
pub struct RawMoments {
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
}

struct AxisWeights {
    one: Vec<f64>,
    lin: Vec<f64>,
    quad: Vec<f64>,
}

fn axis_weights(grid: &VelocityGrid) -> AxisWeights {
    let h = grid.spacing();
    let nodes = grid.axis_nodes();
    let one = vec![h; nodes.len()];
    // Node 0 sits at -pi, which is also +pi: (-pi + pi) / 2 = 0.
    let lin = nodes
        .iter()
        .enumerate()
        .map(|(j, v)| if j == 0 { 0.0 } else { h * v })
        .collect();
    let quad = nodes.iter().map(|v| h * v * v).collect();
    AxisWeights { one, lin, quad }
}

/// Raw moments of grid samples.
pub fn raw_moments(values: &[f64], grid: &VelocityGrid) -> RawMoments {
    let d = grid.dim();
    let n = grid.points_per_axis();
    let w = axis_weights(grid);
    let mut mass = 0.0;
    let mut momentum = vec![0.0; d];
    let mut energy = 0.0;
    let mut idx = [0usize; 3];
    for (flat, f) in values.iter().enumerate() {
        let mut rest = flat;
        for a in (0..d).rev() {
            idx[a] = rest % n;
            rest /= n;
        }
        let base: f64 = (0..d).map(|a| w.one[idx[a]]).product();
        mass += base * f;
        for a in 0..d {
            let others = base / w.one[idx[a]];
            momentum[a] += others * w.lin[idx[a]] * f;
            energy += others * w.quad[idx[a]] * f;
        }
    }
    RawMoments {
        mass,
        momentum,
        energy,
    }
}

/// Moments of grid samples.
pub fn moments_of_values(values: &[f64], grid: &VelocityGrid) -> Result<Moments> {
    let raw = raw_moments(values, grid);
    if !(raw.mass > 0.0) {
        return Err(Error::NonPhysical(format!(
            "density {} is not positive",
            raw.mass
        )));
    }
    let u: Vec<f64> = raw.momentum.iter().map(|p| p / raw.mass).collect();
    let u2: f64 = u.iter().map(|x| x * x).sum();
    let d = grid.dim() as f64;
    let temperature = (raw.energy - raw.mass * u2) / (d * raw.mass);
    Moments::new(raw.mass, u, temperature)
}

/// Density, mean velocity and temperature of a field by grid quadrature.
pub fn moments(f: &SpectralField, grid: &VelocityGrid) -> Result<Moments> {
    moments_of_values(&evaluate(f, grid)?, grid)
}

/// `rho / (2 pi T)^{d/2} exp(-|v - u|^2 / (2T))`.
pub fn maxwellian_density(m: &Moments, v: &[f64]) -> f64 {
    let d = m.dim() as f64;
    let r2: f64 = v.iter().zip(&m.u).map(|(a, b)| (a - b) * (a - b)).sum();
    m.rho / (2.0 * PI * m.temperature).powf(0.5 * d) * (-r2 / (2.0 * m.temperature)).exp()
}

/// `exp(-(pi - |u|_inf)^2 / (2T))`, the Maxwellian's relative size at the box edge.
pub fn boundary_mass(m: &Moments) -> f64 {
    let umax = m.u.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let gap = (PI - umax).max(0.0);
    (-(gap * gap) / (2.0 * m.temperature)).exp()
}

/// `M_N = P_N M(rho, u, T)` from grid samples.
pub fn maxwellian(m: &Moments, grid: &VelocityGrid, order: usize) -> Result<SpectralField> {
    m.check()?;
    if m.dim() != grid.dim() {
        return Err(Error::Argument(format!(
            "moments of dimension {} on a {}-d grid",
            m.dim(),
            grid.dim()
        )));
    }
    let edge = boundary_mass(m);
    if edge > SUPPORT_LIMIT {
        return Err(Error::SupportViolation {
            boundary_mass: edge,
            limit: SUPPORT_LIMIT,
        });
    }
    project(&grid.sample(|v| maxwellian_density(m, v)), grid, order)
}

/// Equilibrium and fluctuation parts of a distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroMacroState {
    pub macro_part: SpectralField,
    pub micro_part: SpectralField,
}

impl MicroMacroState {
    /// Splits `f` against a given equilibrium.
    pub fn against(f: &SpectralField, macro_part: SpectralField) -> Self {
        let micro_part = f - &macro_part;
        Self {
            macro_part,
            micro_part,
        }
    }

    pub fn recompose(&self) -> SpectralField {
        &self.macro_part + &self.micro_part
    }

    /// Mass, momentum and energy carried by the micro part.
    pub fn micro_moments(&self, grid: &VelocityGrid) -> Result<RawMoments> {
        Ok(raw_moments(&evaluate(&self.micro_part, grid)?, grid))
    }
}

/// `macro = maxwellian(moments(f))`, `micro = f - macro`.
pub fn split(f: &SpectralField, grid: &VelocityGrid) -> Result<MicroMacroState> {
    let m = moments(f, grid)?;
    let macro_part = maxwellian(&m, grid, f.order())?;
    Ok(MicroMacroState::against(f, macro_part))
}
