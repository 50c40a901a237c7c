//! The `build-kernel`, `run` and `convergence` verbs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use ep_spectral::equilibrium::Moments;
use ep_spectral::experiment::{check_ladder, ladder, ratios, LadderReport};
use ep_spectral::initial::InitialCondition;
use ep_spectral::kernel::{build_table, save_table, KernelTable, RefinementReport};
use ep_spectral::solver::{fit_decay, run_observed, DecayFit, DiagnosticsRecord, Scheme};
use ep_spectral::spectral::VelocityGrid;
use ep_spectral::{Error, Execution};
use serde::Serialize;

use crate::cache::{obtain, Source};
use crate::config::Config;
use crate::output::{full, opt_num, summary_path, write_json, write_table, RecordWriter};
use crate::Failure;

#[derive(Serialize)]
struct KernelInfo {
    dim: usize,
    order: usize,
    vhs_exponent: f64,
    support_radius: f64,
    radial_nodes: usize,
    angular_nodes_q: usize,
    angular_nodes_omega: usize,
    config_hash: String,
    payload_hash: String,
    cache_file: String,
    from_cache: bool,
    refinement: Option<RefinementReport>,
}

fn kernel_info(table: &KernelTable, path: &Path, source: Source) -> KernelInfo {
    let c = table.config();
    KernelInfo {
        dim: c.dim,
        order: c.order,
        vhs_exponent: c.vhs_exponent,
        support_radius: c.support_radius,
        radial_nodes: c.radial_nodes,
        angular_nodes_q: c.angular_nodes_q,
        angular_nodes_omega: c.angular_nodes_omega,
        config_hash: hex::encode(table.checksum()),
        payload_hash: hex::encode(table.payload_hash()),
        cache_file: path.display().to_string(),
        from_cache: source == Source::Cache,
        refinement: table.refinement().cloned(),
    }
}

pub fn build_kernel(config_path: &Path, out: &Path) -> Result<(), Failure> {
    let config = Config::load(config_path)?;
    let kernel = config.kernel_config()?;
    let start = Instant::now();
    let table = build_table(&kernel)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Failure::Config(format!("{}: {e}", parent.display())))?;
    }
    save_table(&table, out)?;
    let report = table
        .refinement()
        .expect("fresh tables carry a refinement report");
    println!(
        "wrote {} ({} modes) in {:.2} s",
        out.display(),
        table.modes().len(),
        start.elapsed().as_secs_f64()
    );
    println!(
        "refinement check: {} pairs, worst discrepancy {:.3e} at l={:?} m={:?} (tolerance {:.1e})",
        report.sampled_pairs,
        report.max_discrepancy,
        report.worst_l,
        report.worst_m,
        kernel.refinement_tolerance
    );
    println!("payload hash {}", hex::encode(table.payload_hash()));
    Ok(())
}

#[derive(Serialize)]
struct Assertion {
    name: &'static str,
    passed: bool,
    value: f64,
    limit: f64,
}

#[derive(Serialize)]
struct MomentsOut {
    rho: f64,
    u: Vec<f64>,
    temperature: f64,
}

impl From<&Moments> for MomentsOut {
    fn from(m: &Moments) -> Self {
        Self {
            rho: m.rho,
            u: m.u.clone(),
            temperature: m.temperature,
        }
    }
}

#[derive(Serialize)]
struct DecayOut {
    window: [f64; 2],
    decay_c: f64,
    decay_rate: f64,
    r_squared: f64,
    samples: usize,
}

#[derive(Serialize)]
struct RunSummary {
    status: &'static str,
    scheme: Scheme,
    dt: f64,
    t_end: f64,
    steps: usize,
    records: usize,
    dt_ceiling: Option<f64>,
    blow_up_time: Option<f64>,
    equilibrium_moments: MomentsOut,
    initial_moments: Option<MomentsOut>,
    final_moments: Option<MomentsOut>,
    initial_g_l1: Option<f64>,
    final_g_l1: Option<f64>,
    max_g_l1: Option<f64>,
    max_mass_drift: Option<f64>,
    max_momentum_drift: Option<f64>,
    max_temperature_drift: Option<f64>,
    decay: Option<DecayOut>,
    assertions: Vec<Assertion>,
    kernel: KernelInfo,
    runtime_seconds: f64,
}

fn drift(
    records: &[DiagnosticsRecord],
    f: impl Fn(&DiagnosticsRecord, &DiagnosticsRecord) -> f64,
) -> Option<f64> {
    let first = records.first()?;
    Some(records.iter().map(|r| f(r, first)).fold(0.0, f64::max))
}

pub fn run(config_path: &Path, out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let config = Config::load(config_path)?;
    let kernel = config.kernel_config()?;
    let solver = config.solver()?;
    let ic = config.initial_condition()?;
    let (table, source, cache_file) = obtain(&config, &kernel)?;
    let order = kernel.order;
    let grid = VelocityGrid::for_order(kernel.dim, order)?;
    let f0 = ic.field(&grid, order)?;
    let equilibrium = ic.equilibrium_moments(&grid, order)?;

    let mut writer = RecordWriter::create(out, kernel.dim)?;
    let mut records = Vec::new();
    let mut write_error = None;
    let result = run_observed(&f0, &equilibrium, &table, &grid, &solver, |r| {
        if write_error.is_none() {
            write_error = writer.write(r).err();
        }
        records.push(r.clone());
    });
    if let Some(e) = write_error {
        return Err(e);
    }
    let (status, output, blow_up) = match result {
        Ok(output) => ("completed", Some(output), None),
        Err(e @ (Error::BlowUp { .. } | Error::Overflow | Error::NonPhysical(_))) => {
            let t = match e {
                Error::BlowUp { t } => t,
                _ => records.last().map_or(0.0, |r| r.t),
            };
            writer.truncated(t, &e.to_string())?;
            ("blow_up", None, Some((t, e)))
        }
        Err(e) => return Err(e.into()),
    };

    let dt_ceiling = output.as_ref().map(|o| o.dt_ceiling);
    if let Some(c) = dt_ceiling.filter(|&c| solver.dt > c) {
        eprintln!(
            "warning: dt = {} exceeds the preflight stability estimate {c:.4e}",
            solver.dt
        );
    }
    let decay = match (&output, config.experiment.decay_window) {
        (Some(_), Some(w)) => Some((w, fit_decay(&records, (w[0], w[1]))?)),
        _ => None,
    };

    let max_g = records
        .iter()
        .map(|r| r.g_norm_l1)
        .fold(None, |a: Option<f64>, g| Some(a.map_or(g, |a| a.max(g))));
    let mass = drift(&records, |r, f| (r.f0_coeff - f.f0_coeff).norm());
    let momentum = drift(&records, |r, f| {
        r.moments
            .u
            .iter()
            .zip(&f.moments.u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let temperature = drift(&records, |r, f| {
        (r.moments.temperature - f.moments.temperature).abs()
    });
    let ratio = match (records.first(), records.last()) {
        (Some(a), Some(b)) => b.g_norm_l1 / a.g_norm_l1,
        _ => f64::NAN,
    };

    let e = &config.experiment;
    let mut assertions = Vec::new();
    if let Some(limit) = e.max_g_l1 {
        let value = max_g.unwrap_or(f64::NAN);
        assertions.push(Assertion {
            name: "max_g_l1",
            passed: value < limit,
            value,
            limit,
        });
    }
    if let Some(limit) = e.max_mass_drift {
        let value = mass.unwrap_or(f64::NAN);
        assertions.push(Assertion {
            name: "max_mass_drift",
            passed: value < limit,
            value,
            limit,
        });
    }
    if let Some(limit) = e.max_decay_ratio {
        assertions.push(Assertion {
            name: "max_decay_ratio",
            passed: ratio < limit,
            value: ratio,
            limit,
        });
    }
    if let Some(limit) = e.min_r_squared {
        let (rate, r2) = decay
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |(_, d)| (d.decay_rate, d.r_squared));
        assertions.push(Assertion {
            name: "decay_rate_positive",
            passed: rate > 0.0,
            value: rate,
            limit: 0.0,
        });
        assertions.push(Assertion {
            name: "min_r_squared",
            passed: r2 >= limit,
            value: r2,
            limit,
        });
    }

    let status = if status == "completed" && assertions.iter().any(|a| !a.passed) {
        "assertion_failed"
    } else {
        status
    };
    let summary = RunSummary {
        status,
        scheme: solver.scheme,
        dt: solver.dt,
        t_end: solver.t_end,
        steps: output.as_ref().map_or(0, |o| o.steps),
        records: records.len(),
        dt_ceiling,
        blow_up_time: blow_up.as_ref().map(|b| b.0),
        equilibrium_moments: (&equilibrium).into(),
        initial_moments: records.first().map(|r| (&r.moments).into()),
        final_moments: records.last().map(|r| (&r.moments).into()),
        initial_g_l1: records.first().map(|r| r.g_norm_l1),
        final_g_l1: records.last().map(|r| r.g_norm_l1),
        max_g_l1: max_g,
        max_mass_drift: mass,
        max_momentum_drift: momentum,
        max_temperature_drift: temperature,
        decay: decay.map(|(w, d): ([f64; 2], DecayFit)| DecayOut {
            window: w,
            decay_c: d.decay_c,
            decay_rate: d.decay_rate,
            r_squared: d.r_squared,
            samples: d.samples,
        }),
        assertions,
        kernel: kernel_info(&table, &cache_file, source),
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&summary_path(out), &summary)?;
    println!(
        "{}: {} records, final g_L1 = {}, {:.2} s",
        summary.status,
        summary.records,
        summary.final_g_l1.map_or("n/a".into(), |g| format!("{g:.6e}")),
        summary.runtime_seconds
    );
    if let Some(d) = &summary.decay {
        println!(
            "decay fit on [{}, {}]: rate {:.6}, r^2 {:.6}",
            d.window[0], d.window[1], d.decay_rate, d.r_squared
        );
    }
    if let Some((_, e)) = blow_up {
        return Err(e.into());
    }
    let failed: Vec<&str> = summary
        .assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "failed assertions: {}",
            failed.join(", ")
        )))
    }
}

#[derive(Serialize)]
struct ConvergenceSummary {
    status: &'static str,
    initial_condition: &'static str,
    scheme: Scheme,
    dt: f64,
    t_end: f64,
    consistency_time: f64,
    report: LadderReport,
    consistency_ratios: Vec<f64>,
    solution_ratios: Vec<f64>,
    flags: Vec<String>,
    kernels: BTreeMap<usize, KernelInfo>,
    runtime_seconds: f64,
}

pub fn convergence(config_path: &Path, out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let config = Config::load(config_path)?;
    let e = &config.experiment;
    let orders = e
        .orders
        .clone()
        .ok_or_else(|| Failure::Config("experiment.orders is required".into()))?;
    let reference = e
        .reference_order
        .ok_or_else(|| Failure::Config("experiment.reference_order is required".into()))?;
    check_ladder(&orders, reference)?;
    let solver = config.solver()?;
    let ic = config.initial_condition()?;

    let mut tables = Vec::with_capacity(orders.len() + 1);
    let mut kernels = BTreeMap::new();
    for &n in orders.iter().chain([&reference]) {
        let (table, source, path) = obtain(&config, &config.kernel_at(n)?)?;
        kernels.insert(n, kernel_info(&table, &path, source));
        tables.push(table);
    }
    let reference_table = tables.pop().expect("reference table");
    let refs: Vec<&KernelTable> = tables.iter().collect();
    let report = ladder(
        &ic,
        &refs,
        &reference_table,
        &solver,
        e.consistency_time,
        Execution::default(),
    )?;

    let cons: Vec<f64> = report.rows.iter().map(|r| r.consistency_error).collect();
    let sol: Vec<f64> = report.rows.iter().map(|r| r.solution_error).collect();
    let mut flags = Vec::new();
    if !report.consistency_accelerating {
        flags.push("consistency errors do not decay with increasing ratio".to_string());
    }
    if !report.solution_accelerating {
        flags.push("solution errors do not decay with increasing ratio".to_string());
    }
    for f in &flags {
        eprintln!("flag: {f}");
    }

    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.order.to_string(),
                full(r.consistency_error),
                full(r.solution_error),
                opt_num(r.analytic_error),
            ]
        })
        .collect();
    write_table(
        out,
        &["N", "consistency_error", "solution_error", "analytic_error"],
        &rows,
    )?;
    let failed = e.require_accelerating && !flags.is_empty();
    let summary = ConvergenceSummary {
        status: if failed { "assertion_failed" } else { "completed" },
        initial_condition: match ic {
            InitialCondition::Maxwellian(_) => "maxwellian",
            InitialCondition::Bkw(_) => "bkw",
            InitialCondition::TwoMaxwellians(..) => "two_maxwellians",
            InitialCondition::Coefficients(_) => "coefficients",
        },
        scheme: solver.scheme,
        dt: solver.dt,
        t_end: solver.t_end,
        consistency_time: e.consistency_time,
        consistency_ratios: ratios(&cons),
        solution_ratios: ratios(&sol),
        report,
        flags,
        kernels,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&summary_path(out), &summary)?;
    for r in &summary.report.rows {
        println!(
            "N = {:>3}: consistency {:.3e}, solution {:.3e}{}",
            r.order,
            r.consistency_error,
            r.solution_error,
            r.analytic_error
                .map_or(String::new(), |a| format!(", analytic {a:.3e}"))
        );
    }
    if failed {
        Err(Failure::Assertion("error ladder is not accelerating".into()))
    } else {
        Ok(())
    }
}
