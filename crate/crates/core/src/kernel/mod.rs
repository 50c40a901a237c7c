//! Boltzmann kernel modes for the truncated variable-hard-spheres kernel.
//!
//! `B(l, m) = int_{|q| <= R_q} int_{S^{d-1}} |q|^lambda b(cos theta)
//! exp(-i (l.q+ + m.q-)) dw dq` with `q+- = (q +- |q| w) / 2`, and the modes
//! used by the collision sum are `beta(l, m) = B(l, m) - B(m, m)`.
//!
//! Writing `l.q+ + m.q- = rho ((l+m).e + (l-m).w) / 2` decouples the two
//! angular integrals for isotropic `b`: each becomes a function of a single
//! integer vector and a radial node, and is computed once per vector.

mod cache;
mod quadrature;

pub use cache::{load_table, save_table, HEADER_LEN, MAGIC};

use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::spectral::Shape;
use quadrature::{angular_factor, assemble, dot, RadialRule, SphereRule};

/// Anti-aliasing factor `2 / (3 + sqrt 2)`; the default relative-velocity
/// support is `2 * DEALIAS_FACTOR * pi`.
pub const DEALIAS_FACTOR: f64 = 2.0 / (3.0 + SQRT_2);

/// Default refinement tolerance for the node-doubling check.
pub const DEFAULT_REFINEMENT_TOLERANCE: f64 = 1e-8;

/// Angular part `b(cos theta)` of the collision kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularKernel {
    /// `b = 1 / |S^{d-1}|`, so the sphere integral of `b` is one.
    Isotropic,
    /// Samples of `b` at `cos theta` uniformly spaced on `[-1, 1]`, linearly
    /// interpolated. At least two values.
    Tabulated(Vec<f64>),
}

impl AngularKernel {
    pub fn tag(&self) -> u32 {
        match self {
            AngularKernel::Isotropic => 0,
            AngularKernel::Tabulated(_) => 1,
        }
    }

    fn value(&self, dim: usize, cos_theta: f64) -> f64 {
        match self {
            AngularKernel::Isotropic => 1.0 / sphere_measure(dim),
            AngularKernel::Tabulated(values) => {
                let n = values.len() - 1;
                let x = ((cos_theta.clamp(-1.0, 1.0) + 1.0) * 0.5) * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let frac = x - i as f64;
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
        }
    }
}

/// `|S^{d-1}|`: `2 pi` on the circle, `4 pi` on the sphere.
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

/// Parameters of a kernel table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub dim: usize,
    pub order: usize,
    /// VHS exponent in `[0, 1]`; 0 is Maxwell molecules, 1 hard spheres.
    pub vhs_exponent: f64,
    pub angular_kernel: AngularKernel,
    /// Radius `R_q` of the relative-velocity ball, at most `2 pi`.
    pub support_radius: f64,
    pub radial_nodes: usize,
    pub angular_nodes_q: usize,
    pub angular_nodes_omega: usize,
    /// Largest accepted change of a sampled mode under node doubling.
    /// Not part of the table identity.
    pub refinement_tolerance: f64,
}

impl KernelConfig {
    /// Isotropic VHS kernel with default support radius and node counts.
    pub fn new(dim: usize, order: usize, vhs_exponent: f64) -> Self {
        let support_radius = 2.0 * DEALIAS_FACTOR * PI;
        let (radial, angular) = default_node_counts(dim, order, support_radius);
        Self {
            dim,
            order,
            vhs_exponent,
            angular_kernel: AngularKernel::Isotropic,
            support_radius,
            radial_nodes: radial,
            angular_nodes_q: angular,
            angular_nodes_omega: angular,
            refinement_tolerance: DEFAULT_REFINEMENT_TOLERANCE,
        }
    }

    pub fn maxwell_molecules(dim: usize, order: usize) -> Self {
        Self::new(dim, order, 0.0)
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.dim, self.order)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape()?;
        if !(0.0..=1.0).contains(&self.vhs_exponent) {
            return Err(Error::Config(format!(
                "VHS exponent must lie in [0, 1], got {}",
                self.vhs_exponent
            )));
        }
        if !(self.support_radius > 0.0 && self.support_radius <= 2.0 * PI) {
            return Err(Error::Config(format!(
                "support radius must lie in (0, 2 pi], got {}",
                self.support_radius
            )));
        }
        if self.radial_nodes < 2 {
            return Err(Error::Config("radial_nodes must be at least 2".into()));
        }
        for (name, n) in [
            ("angular_nodes_q", self.angular_nodes_q),
            ("angular_nodes_omega", self.angular_nodes_omega),
        ] {
            if n < 2 || n % 2 != 0 {
                return Err(Error::Config(format!(
                    "{name} must be even and at least 2, got {n}"
                )));
            }
        }
        if let AngularKernel::Tabulated(values) = &self.angular_kernel {
            if values.len() < 2 || values.iter().any(|b| !b.is_finite() || *b < 0.0) {
                return Err(Error::Config(
                    "tabulated angular kernel needs >= 2 finite non-negative values".into(),
                ));
            }
        }
        if !(self.refinement_tolerance > 0.0) {
            return Err(Error::Config("refinement tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Same table with every node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            radial_nodes: 2 * self.radial_nodes,
            angular_nodes_q: 2 * self.angular_nodes_q,
            angular_nodes_omega: 2 * self.angular_nodes_omega,
            ..self.clone()
        }
    }

    /// SHA-256 over every parameter that determines the modes.
    pub fn hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"BKMT-config");
        h.update((self.dim as u32).to_le_bytes());
        h.update((self.order as u32).to_le_bytes());
        h.update(self.vhs_exponent.to_le_bytes());
        h.update(self.support_radius.to_le_bytes());
        h.update((self.radial_nodes as u32).to_le_bytes());
        h.update((self.angular_nodes_q as u32).to_le_bytes());
        h.update((self.angular_nodes_omega as u32).to_le_bytes());
        h.update(self.angular_kernel.tag().to_le_bytes());
        if let AngularKernel::Tabulated(values) = &self.angular_kernel {
            for b in values {
                h.update(b.to_le_bytes());
            }
        }
        h.finalize().into()
    }
}

/// Node counts resolving the oscillatory integrand up to order `N`.
///
/// The largest phase is `z = R_q N sqrt(d)` (vectors `l +- m` reach
/// `2N sqrt(d)` in length). Trapezoid sums of `exp(i z cos phi)` are accurate
/// once the node count exceeds `z` by a few `z^{1/3}`; Gauss-Legendre needs
/// about half as many points. Both are floored at 32.
pub fn default_node_counts(dim: usize, order: usize, support_radius: f64) -> (usize, usize) {
    let z = support_radius * order as f64 * (dim as f64).sqrt();
    let span = z + 10.0 * z.cbrt();
    let angular = ((span.ceil() as usize + 8).div_ceil(4) * 4).max(32);
    let radial = ((0.5 * span).ceil() as usize + 8).max(32);
    (radial, angular)
}

/// Outcome of the node-doubling check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementReport {
    pub sampled_pairs: usize,
    pub max_discrepancy: f64,
    pub worst_l: Vec<i64>,
    pub worst_m: Vec<i64>,
}

/// Precomputed `beta(l, m)` for every `(l, m)` in `({-N..N}^d)^2`.
#[derive(Clone, Debug)]
pub struct KernelTable {
    config: KernelConfig,
    shape: Shape,
    modes: Vec<Complex64>,
    checksum: [u8; 32],
    refinement: Option<RefinementReport>,
}

impl KernelTable {
    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// All modes, row-major over `(l, m)` flat indices.
    pub fn modes(&self) -> &[Complex64] {
        &self.modes
    }

    /// `beta(l, m)` for `l`, `m` inside the truncation box.
    pub fn mode(&self, l: &[i64], m: &[i64]) -> Option<Complex64> {
        let li = self.shape.flat(l)?;
        let mi = self.shape.flat(m)?;
        Some(self.modes[li * self.shape.len() + mi])
    }

    #[inline]
    pub(crate) fn row(&self, l_flat: usize) -> &[Complex64] {
        let s = self.shape.len();
        &self.modes[l_flat * s..(l_flat + 1) * s]
    }

    /// Content hash of the configuration.
    pub fn checksum(&self) -> [u8; 32] {
        self.checksum
    }

    /// Refinement results; `None` for tables read from a cache file.
    pub fn refinement(&self) -> Option<&RefinementReport> {
        self.refinement.as_ref()
    }

    /// SHA-256 over the little-endian `(re, im)` payload.
    pub fn payload_hash(&self) -> [u8; 32] {
        cache::payload_hash(&self.modes)
    }

    pub(crate) fn from_parts(config: KernelConfig, modes: Vec<Complex64>) -> Result<Self> {
        let shape = config.shape()?;
        if modes.len() != shape.len() * shape.len() {
            return Err(Error::Format("mode count does not match configuration".into()));
        }
        let checksum = config.hash();
        Ok(Self {
            config,
            shape,
            modes,
            checksum,
            refinement: None,
        })
    }
}

/// Evaluates kernel modes from a config; shared by single-mode and table paths.
struct ModeIntegrator {
    dim: usize,
    radial: RadialRule,
    sphere_q: SphereRule,
    sphere_omega: SphereRule,
    angular: AngularKernel,
}

impl ModeIntegrator {
    fn new(config: &KernelConfig) -> Self {
        Self {
            dim: config.dim,
            radial: RadialRule::new(
                config.radial_nodes,
                config.support_radius,
                config.dim,
                config.vhs_exponent,
            ),
            sphere_q: SphereRule::new(config.dim, config.angular_nodes_q),
            sphere_omega: SphereRule::new(config.dim, config.angular_nodes_omega),
            angular: config.angular_kernel.clone(),
        }
    }

    fn isotropic_weight(&self) -> f64 {
        1.0 / sphere_measure(self.dim)
    }

    fn factor_q(&self, v: &[i64; 3]) -> Vec<f64> {
        angular_factor(
            &self.sphere_q,
            &self.radial,
            &canonical(v, self.sphere_q.octant_symmetric),
        )
    }

    fn factor_omega(&self, v: &[i64; 3]) -> Vec<f64> {
        angular_factor(
            &self.sphere_omega,
            &self.radial,
            &canonical(v, self.sphere_omega.octant_symmetric),
        )
    }

    /// `B` for `s = l + m`, `t = l - m` without any caching.
    fn b_direct(&self, s: &[i64; 3], t: &[i64; 3]) -> f64 {
        match &self.angular {
            AngularKernel::Isotropic => assemble(
                &self.radial.weights,
                &self.factor_q(s),
                &self.factor_omega(t),
                self.isotropic_weight(),
            ),
            AngularKernel::Tabulated(_) => self.b_anisotropic(s, t),
        }
    }

    /// Full triple quadrature; `b` couples the two directions through `e.w`.
    fn b_anisotropic(&self, s: &[i64; 3], t: &[i64; 3]) -> f64 {
        let mut acc = 0.0;
        for (rho, wr) in self.radial.nodes.iter().zip(&self.radial.weights) {
            let mut inner = 0.0;
            for (e, we) in self.sphere_q.dirs.iter().zip(&self.sphere_q.weights) {
                let se = 0.5 * dot(s, e);
                for (w, ww) in self.sphere_omega.dirs.iter().zip(&self.sphere_omega.weights) {
                    let c = e[0] * w[0] + e[1] * w[1] + e[2] * w[2];
                    let phase = rho * (se + 0.5 * dot(t, w));
                    inner += we * ww * self.angular.value(self.dim, c) * phase.cos();
                }
            }
            acc += wr * inner;
        }
        acc
    }
}

/// Representative of the orbit of `v` under the symmetries of a sphere rule.
///
/// Every rule is invariant under `v -> -v`. Rules whose azimuthal count is a
/// multiple of 4 are also invariant under sign flips of each axis and the
/// swap of the first two axes.
fn canonical(v: &[i64; 3], octant: bool) -> [i64; 3] {
    if octant {
        let (a, b) = (v[0].abs(), v[1].abs());
        [a.max(b), a.min(b), v[2].abs()]
    } else {
        match v.iter().find(|x| **x != 0) {
            Some(x) if *x > 0 => [-v[0], -v[1], -v[2]],
            _ => *v,
        }
    }
}

fn sum3(a: &[i64; 3], b: &[i64; 3], sign: i64) -> [i64; 3] {
    [a[0] + sign * b[0], a[1] + sign * b[1], a[2] + sign * b[2]]
}

fn check_mode_index(shape: Shape, k: &[i64], name: &str) -> Result<[i64; 3]> {
    let flat = shape
        .flat(k)
        .ok_or_else(|| Error::Argument(format!("{name} = {k:?} outside {shape:?}")))?;
    Ok(shape.mode(flat))
}

/// Quadrature value of `beta(l, m) = B(l, m) - B(m, m)`.
pub fn compute_mode(config: &KernelConfig, l: &[i64], m: &[i64]) -> Result<Complex64> {
    config.validate()?;
    let shape = config.shape()?;
    let l = check_mode_index(shape, l, "l")?;
    let m = check_mode_index(shape, m, "m")?;
    let integrator = ModeIntegrator::new(config);
    Ok(Complex64::new(beta_direct(&integrator, &l, &m), 0.0))
}

/// Quadrature value of `B(l, m)` itself.
pub fn compute_gain_mode(config: &KernelConfig, l: &[i64], m: &[i64]) -> Result<f64> {
    config.validate()?;
    let shape = config.shape()?;
    let l = check_mode_index(shape, l, "l")?;
    let m = check_mode_index(shape, m, "m")?;
    let integrator = ModeIntegrator::new(config);
    Ok(integrator.b_direct(&sum3(&l, &m, 1), &sum3(&l, &m, -1)))
}

fn beta_direct(integrator: &ModeIntegrator, l: &[i64; 3], m: &[i64; 3]) -> f64 {
    if l == m {
        return 0.0;
    }
    let b_lm = integrator.b_direct(&sum3(l, m, 1), &sum3(l, m, -1));
    let b_mm = integrator.b_direct(&sum3(m, m, 1), &[0; 3]);
    b_lm - b_mm
}

/// Builds the full table on the default execution strategy.
pub fn build_table(config: &KernelConfig) -> Result<KernelTable> {
    build_table_with(config, Execution::default())
}

/// Builds the full table, then runs the node-doubling check on a
/// deterministic ~1% sample of pairs.
pub fn build_table_with(config: &KernelConfig, exec: Execution) -> Result<KernelTable> {
    let mut table = assemble_table(config, exec)?;
    let report = refinement_check(&table, exec)?;
    if report.max_discrepancy > config.refinement_tolerance {
        return Err(Error::Quadrature {
            l: report.worst_l,
            m: report.worst_m,
            discrepancy: report.max_discrepancy,
            tolerance: config.refinement_tolerance,
        });
    }
    table.refinement = Some(report);
    Ok(table)
}

/// Angular factors for every vector in `[-2N, 2N]^d`, one row of `n_r`
/// values per symmetry class.
struct FactorCache {
    span: Shape,
    n_r: usize,
    q: FactorRows,
    omega: Option<FactorRows>,
}

struct FactorRows {
    slot: Vec<u32>,
    rows: Vec<Vec<f64>>,
}

impl FactorRows {
    fn new(
        span: Shape,
        octant: bool,
        exec: Execution,
        factor: &(dyn Fn(&[i64; 3]) -> Vec<f64> + Sync),
    ) -> Self {
        let mut classes: HashMap<[i64; 3], u32> = HashMap::new();
        let mut reps = Vec::new();
        let slot = (0..span.len())
            .map(|i| {
                let c = canonical(&span.mode(i), octant);
                *classes.entry(c).or_insert_with(|| {
                    reps.push(c);
                    (reps.len() - 1) as u32
                })
            })
            .collect();
        let rows = exec.map_indices(reps.len(), |i| factor(&reps[i]));
        Self { slot, rows }
    }
}

impl FactorCache {
    fn new(integrator: &ModeIntegrator, order: usize, exec: Execution) -> Result<Self> {
        let span = Shape::new(integrator.dim, 2 * order)?;
        let n_r = integrator.radial.nodes.len();
        let q = FactorRows::new(span, integrator.sphere_q.octant_symmetric, exec, &|v| {
            integrator.factor_q(v)
        });
        let omega = if integrator.sphere_q.dirs.len() == integrator.sphere_omega.dirs.len() {
            None
        } else {
            Some(FactorRows::new(
                span,
                integrator.sphere_omega.octant_symmetric,
                exec,
                &|v| integrator.factor_omega(v),
            ))
        };
        Ok(Self { span, n_r, q, omega })
    }

    #[inline]
    fn lookup<'a>(&self, rows: &'a FactorRows, v: &[i64; 3]) -> &'a [f64] {
        let i = self.span.flat(&v[..self.span.dim()]).expect("vector inside span");
        let row = &rows.rows[rows.slot[i] as usize];
        debug_assert_eq!(row.len(), self.n_r);
        row
    }

    #[inline]
    fn q(&self, v: &[i64; 3]) -> &[f64] {
        self.lookup(&self.q, v)
    }

    #[inline]
    fn omega(&self, v: &[i64; 3]) -> &[f64] {
        self.lookup(self.omega.as_ref().unwrap_or(&self.q), v)
    }
}

fn assemble_table(config: &KernelConfig, exec: Execution) -> Result<KernelTable> {
    config.validate()?;
    let shape = config.shape()?;
    let s = shape.len();
    let integrator = ModeIntegrator::new(config);
    let mut modes = vec![Complex64::new(0.0, 0.0); s * s];

    match &config.angular_kernel {
        AngularKernel::Isotropic => {
            let cache = FactorCache::new(&integrator, config.order, exec)?;
            let b0 = integrator.isotropic_weight();
            let w = &integrator.radial.weights;
            let diag: Vec<f64> = exec.map_indices(s, |mi| {
                let m = shape.mode(mi);
                assemble(w, cache.q(&sum3(&m, &m, 1)), cache.omega(&[0; 3]), b0)
            });
            exec.fill_chunks(&mut modes, s, |li, row| {
                let l = shape.mode(li);
                for (mi, slot) in row.iter_mut().enumerate() {
                    if mi == li {
                        continue;
                    }
                    let m = shape.mode(mi);
                    let b = assemble(w, cache.q(&sum3(&l, &m, 1)), cache.omega(&sum3(&l, &m, -1)), b0);
                    *slot = Complex64::new(b - diag[mi], 0.0);
                }
            });
        }
        AngularKernel::Tabulated(_) => {
            let diag: Vec<f64> = exec.map_indices(s, |mi| {
                let m = shape.mode(mi);
                integrator.b_direct(&sum3(&m, &m, 1), &[0; 3])
            });
            exec.fill_chunks(&mut modes, s, |li, row| {
                let l = shape.mode(li);
                for (mi, slot) in row.iter_mut().enumerate() {
                    if mi == li {
                        continue;
                    }
                    let m = shape.mode(mi);
                    let b = integrator.b_direct(&sum3(&l, &m, 1), &sum3(&l, &m, -1));
                    *slot = Complex64::new(b - diag[mi], 0.0);
                }
            });
        }
    }
    KernelTable::from_parts(config.clone(), modes)
}

fn sample_pairs(config: &KernelConfig, total: usize) -> Vec<usize> {
    let count = total.div_ceil(100).max(total.min(64));
    let seed = u64::from_le_bytes(config.hash()[..8].try_into().expect("8 bytes"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut picks = Vec::with_capacity(count);
    while picks.len() < count {
        let p = rng.random_range(0..total);
        if seen.insert(p) {
            picks.push(p);
        }
    }
    picks
}

fn refinement_check(table: &KernelTable, exec: Execution) -> Result<RefinementReport> {
    let config = table.config();
    let shape = table.shape();
    let s = shape.len();
    let picks = sample_pairs(config, s * s);
    let fine = ModeIntegrator::new(&config.refined());

    let fine_values: Vec<f64> = match &config.angular_kernel {
        AngularKernel::Isotropic => {
            let cache = FactorCache::new(&fine, config.order, exec)?;
            let b0 = fine.isotropic_weight();
            let w = &fine.radial.weights;
            let b = |s_: &[i64; 3], t_: &[i64; 3]| assemble(w, cache.q(s_), cache.omega(t_), b0);
            picks
                .iter()
                .map(|&p| {
                    let (l, m) = (shape.mode(p / s), shape.mode(p % s));
                    if l == m {
                        0.0
                    } else {
                        b(&sum3(&l, &m, 1), &sum3(&l, &m, -1)) - b(&sum3(&m, &m, 1), &[0; 3])
                    }
                })
                .collect()
        }
        AngularKernel::Tabulated(_) => exec.map_indices(picks.len(), |i| {
            let p = picks[i];
            beta_direct(&fine, &shape.mode(p / s), &shape.mode(p % s))
        }),
    };

    let mut report = RefinementReport {
        sampled_pairs: picks.len(),
        max_discrepancy: 0.0,
        worst_l: vec![0; shape.dim()],
        worst_m: vec![0; shape.dim()],
    };
    for (&p, fine_beta) in picks.iter().zip(&fine_values) {
        let d = (table.modes[p].re - fine_beta).abs().max(table.modes[p].im.abs());
        if d > report.max_discrepancy || !d.is_finite() {
            report.max_discrepancy = if d.is_finite() { d } else { f64::INFINITY };
            report.worst_l = shape.mode(p / s)[..shape.dim()].to_vec();
            report.worst_m = shape.mode(p % s)[..shape.dim()].to_vec();
        }
    }
    Ok(report)
}
