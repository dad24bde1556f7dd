//! Experiment drivers behind the CLI subcommands.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Scenario, SimConfig};
use crate::design::{max_t_delta, DesignRow};
use crate::error::{Error, Result};
use crate::hybrid::{Simulation, Summary, Trace};
use crate::monitor::{lyapunov_monitor, MonitorOptions, MonitorReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

pub struct SimulationOutput {
    pub trace: Trace,
    pub summary: Summary,
    pub monitor: Option<MonitorReport>,
}

pub fn simulate(scenario: &Scenario) -> Result<SimulationOutput> {
    let sim = &scenario.simulation;
    let trace = sim.run()?;
    let monitor = if scenario.monitor.enabled {
        let opts = MonitorOptions {
            tol: scenario.monitor.tol,
            lambda_override: None,
        };
        Some(lyapunov_monitor(
            &trace,
            &sim.certificates,
            sim.layout(),
            None,
            &opts,
        )?)
    } else {
        None
    };
    Ok(SimulationOutput {
        summary: trace.summary(),
        trace,
        monitor,
    })
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let p = dir.join(name);
    let f = File::create(&p)?;
    Ok((p, BufWriter::new(f)))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let (p, w) = create(dir, name)?;
    serde_json::to_writer_pretty(w, value)?;
    Ok(p)
}

/// Writes `trace.csv`, `summary.json`, `plot.csv` and, when monitored,
/// `monitor.json` into `dir`.
pub fn write_simulation(out: &SimulationOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let (p, w) = create(dir, "trace.csv")?;
    out.trace.write_csv(w)?;
    paths.push(p);
    paths.push(write_json(dir, "summary.json", &out.summary)?);
    let (p, w) = create(dir, "plot.csv")?;
    out.trace.write_plot_csv(w)?;
    paths.push(p);
    if let Some(m) = &out.monitor {
        paths.push(write_json(dir, "monitor.json", m)?);
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkComparison {
    pub network: usize,
    pub ttc_count: u64,
    pub etc_count: u64,
    /// `etc_count / ttc_count`.
    pub reduction_ratio: f64,
    /// Max `|η_i|` over the second half of the horizon (event-triggered run).
    pub max_eta_after_transient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub networks: Vec<NetworkComparison>,
    pub saturation_violations: u64,
    pub ttc_saturation_violations: u64,
}

/// Max of `|η_i|` over flow samples with `t ≥ from`.
pub fn max_eta_after(trace: &Trace, network: usize, from: f64) -> f64 {
    trace
        .flow_samples()
        .filter(|r| r.t >= from)
        .map(|r| r.network_eta[network])
        .fold(0.0, f64::max)
}

/// Copy of `sim` with every `ρ_i = 0`: the time-triggered baseline.
pub fn time_triggered(sim: &Simulation) -> Result<Simulation> {
    let mut nets = sim.networks.clone();
    for n in &mut nets {
        n.etm.rho = 0.0;
    }
    Simulation::new(
        sim.model.clone(),
        nets,
        sim.certificates.clone(),
        sim.options.clone(),
    )
}

/// Runs the scenario as configured and with `ρ = 0` on the same schedule.
pub fn compare(scenario: &Scenario) -> Result<ComparisonReport> {
    let sim = &scenario.simulation;
    let etc = sim.run()?;
    let ttc = time_triggered(sim)?.run()?;
    let half = 0.5 * sim.options.t_end;
    let networks = (0..sim.networks.len())
        .map(|i| {
            let (e, t) = (etc.counts[i].triggered, ttc.counts[i].samples);
            NetworkComparison {
                network: i,
                ttc_count: t,
                etc_count: e,
                reduction_ratio: if t == 0 { 1.0 } else { e as f64 / t as f64 },
                max_eta_after_transient: max_eta_after(&etc, i, half),
            }
        })
        .collect();
    Ok(ComparisonReport {
        networks,
        saturation_violations: etc.counts.iter().map(|c| c.saturation_violations).sum(),
        ttc_saturation_violations: ttc.counts.iter().map(|c| c.saturation_violations).sum(),
    })
}

/// Design table keyed by network index.
pub fn design(config: &SimConfig, tol: f64) -> Result<BTreeMap<String, DesignRow>> {
    config
        .design_inputs()?
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let r = max_t_delta(&d.p0, &d.p1, d.lambda_bar, tol).map_err(|e| match e {
                Error::Infeasible(msg) => Error::Infeasible(format!("network {i}: {msg}")),
                other => other,
            })?;
            Ok((i.to_string(), r.row()))
        })
        .collect()
}

/// Builds everything a run needs and returns the soft warnings.
pub fn validate(config: &SimConfig) -> Result<Vec<String>> {
    let scenario = config.build()?;
    let mut warnings = scenario.warnings;
    if let Ok(inputs) = config.design_inputs() {
        for (i, d) in inputs.iter().enumerate() {
            for w in
                d.p0.warnings(d.lambda_bar)
                    .into_iter()
                    .chain(d.p1.warnings(d.lambda_bar))
            {
                warnings.push(format!("networks[{i}].design: {w}"));
            }
        }
    }
    Ok(warnings)
}
