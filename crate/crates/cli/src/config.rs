//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use ep_spectral::equilibrium::Moments;
use ep_spectral::initial::{Bkw, InitialCondition, BKW_RATE};
use ep_spectral::kernel::{AngularKernel, KernelConfig};
use ep_spectral::solver::{Scheme, SolverConfig};
use ep_spectral::spectral::{Shape, SpectralField};
use num_complex::Complex64;
use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kernel: KernelSection,
    pub initial_condition: Option<InitialSection>,
    pub solver: Option<SolverSection>,
    #[serde(default)]
    pub experiment: ExperimentSection,
    /// Directory holding the configuration; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub dim: usize,
    pub order: Option<usize>,
    #[serde(default)]
    pub vhs_exponent: f64,
    pub support_radius: Option<f64>,
    pub radial_nodes: Option<usize>,
    pub angular_nodes_q: Option<usize>,
    pub angular_nodes_omega: Option<usize>,
    pub refinement_tolerance: Option<f64>,
    /// Samples of `b(cos theta)` on a uniform grid of `cos theta` in `[-1, 1]`.
    pub angular_kernel: Option<Vec<f64>>,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Maxwellian {
        rho: f64,
        u: Vec<f64>,
        temperature: f64,
        #[serde(default = "unit")]
        velocity_scale: f64,
    },
    Bkw {
        temperature: f64,
        #[serde(default = "bkw_rate")]
        rate: f64,
        #[serde(default = "unit")]
        velocity_scale: f64,
    },
    TwoMaxwellians {
        first: MaxwellianSpec,
        second: MaxwellianSpec,
        #[serde(default = "unit")]
        velocity_scale: f64,
    },
    Coefficients {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxwellianSpec {
    pub rho: f64,
    pub u: Vec<f64>,
    pub temperature: f64,
}

fn unit() -> f64 {
    1.0
}

fn bkw_rate() -> f64 {
    BKW_RATE
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default = "yes")]
    pub entropy: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Window `[t_a, t_b]` for the exponential fit of `g_L1`.
    pub decay_window: Option<[f64; 2]>,
    /// Assert `decay_rate > 0` and `r^2 >= min_r_squared`.
    pub min_r_squared: Option<f64>,
    /// Assert the largest recorded `g_L1` stays below this value.
    pub max_g_l1: Option<f64>,
    /// Assert `g_L1(t_end) / g_L1(0)` stays below this value.
    pub max_decay_ratio: Option<f64>,
    /// Assert the mass-mode drift stays below this value.
    pub max_mass_drift: Option<f64>,
    /// Order ladder for `convergence`.
    pub orders: Option<Vec<usize>>,
    pub reference_order: Option<usize>,
    /// Time of the BKW state used for the consistency ladder.
    #[serde(default = "consistency_time")]
    pub consistency_time: f64,
    /// Assert accelerating ratios in both ladders.
    #[serde(default)]
    pub require_accelerating: bool,
}

fn consistency_time() -> f64 {
    1.0
}

/// On-disk layout of a coefficients file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsFile {
    pub dim: usize,
    pub order: usize,
    /// `(re, im)` pairs, row-major over the shifted multi-index `k + N`.
    pub coefficients: Vec<[f64; 2]>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config: Config =
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if !matches!(config.kernel.dim, 2 | 3) {
            return Err(Failure::Config(format!(
                "kernel.dim must be 2 or 3, got {}",
                config.kernel.dim
            )));
        }
        Ok(config)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Kernel configuration at `order`, with explicit overrides applied.
    pub fn kernel_at(&self, order: usize) -> Result<KernelConfig, Failure> {
        let k = &self.kernel;
        let mut config = KernelConfig::new(k.dim, order, k.vhs_exponent);
        if let Some(r) = k.support_radius {
            config.support_radius = r;
            let (radial, angular) = ep_spectral::kernel::default_node_counts(k.dim, order, r);
            config.radial_nodes = radial;
            config.angular_nodes_q = angular;
            config.angular_nodes_omega = angular;
        }
        if let Some(n) = k.radial_nodes {
            config.radial_nodes = n;
        }
        if let Some(n) = k.angular_nodes_q {
            config.angular_nodes_q = n;
        }
        if let Some(n) = k.angular_nodes_omega {
            config.angular_nodes_omega = n;
        }
        if let Some(t) = k.refinement_tolerance {
            config.refinement_tolerance = t;
        }
        if let Some(values) = &k.angular_kernel {
            config.angular_kernel = AngularKernel::Tabulated(values.clone());
        }
        config.validate()?;
        Ok(config)
    }

    pub fn kernel_config(&self) -> Result<KernelConfig, Failure> {
        let order = self
            .kernel
            .order
            .ok_or_else(|| Failure::Config("kernel.order is required".into()))?;
        self.kernel_at(order)
    }

    pub fn solver(&self) -> Result<SolverConfig, Failure> {
        let s = self
            .solver
            .as_ref()
            .ok_or_else(|| Failure::Config("missing [solver] section".into()))?;
        let config = SolverConfig {
            scheme: s.scheme,
            dt: s.dt,
            t_end: s.t_end,
            record_every: s.record_every,
            entropy: s.entropy,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn initial_condition(&self) -> Result<InitialCondition, Failure> {
        let section = self
            .initial_condition
            .as_ref()
            .ok_or_else(|| Failure::Config("missing [initial_condition] section".into()))?;
        let dim = self.kernel.dim;
        let scaled = |rho: f64, u: &[f64], t: f64, s: f64| -> Result<Moments, Failure> {
            check_scale(s)?;
            if u.len() != dim {
                return Err(Failure::Config(format!(
                    "u has {} components, expected {dim}",
                    u.len()
                )));
            }
            Ok(Moments::new(rho, u.iter().map(|x| s * x).collect(), s * s * t)?)
        };
        Ok(match section {
            InitialSection::Maxwellian {
                rho,
                u,
                temperature,
                velocity_scale,
            } => InitialCondition::Maxwellian(scaled(*rho, u, *temperature, *velocity_scale)?),
            InitialSection::Bkw {
                temperature,
                rate,
                velocity_scale,
            } => {
                check_scale(*velocity_scale)?;
                if dim != 2 {
                    return Err(Failure::Config(
                        "the BKW initial condition requires kernel.dim = 2".into(),
                    ));
                }
                InitialCondition::Bkw(Bkw::with_rate(velocity_scale.powi(2) * temperature, *rate)?)
            }
            InitialSection::TwoMaxwellians {
                first,
                second,
                velocity_scale,
            } => InitialCondition::TwoMaxwellians(
                scaled(first.rho, &first.u, first.temperature, *velocity_scale)?,
                scaled(second.rho, &second.u, second.temperature, *velocity_scale)?,
            ),
            InitialSection::Coefficients { path } => {
                InitialCondition::Coefficients(read_coefficients(&self.resolve(path), dim)?)
            }
        })
    }
}

fn check_scale(s: f64) -> Result<(), Failure> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(format!(
            "velocity_scale must be positive, got {s}"
        )))
    }
}

pub fn read_coefficients(path: &Path, dim: usize) -> Result<SpectralField, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: CoefficientsFile =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if file.dim != dim {
        return Err(Failure::Config(format!(
            "{} holds a {}-d field, the kernel is {dim}-d",
            path.display(),
            file.dim
        )));
    }
    let shape = Shape::new(file.dim, file.order)?;
    let coeffs = file
        .coefficients
        .iter()
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    Ok(SpectralField::from_coeffs(shape, coeffs)?)
}
