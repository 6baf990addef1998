//! Batch execution: replicates, `m` sweeps and the cross-replicate summary.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunSpec;
use crate::error::{Error, Result};
use crate::output;
use crate::simulation::{InvariantAudit, Simulation};
use crate::topology::{topology_report, Graph, TopologyReport};
use crate::SimConfig;

/// Seed of replicate `k`; replicate `k` can be rerun on its own.
pub fn replicate_seed(master: u64, replicate: usize) -> u64 {
    master.wrapping_add(replicate as u64)
}

/// Per-run scalars that feed the summary.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub m: usize,
    pub replicate: usize,
    pub seed: u64,
    pub links: usize,
    pub avg_degree: f64,
    pub gamma: Option<f64>,
    pub r_squared: Option<f64>,
    pub assortativity: Option<f64>,
    pub peak_infectious_fraction: f64,
    pub final_infectious_fraction: f64,
    pub phase1_end: Option<u64>,
    pub audit: InvariantAudit,
}

/// A finished run held in memory, for callers that need more than the scalars.
pub struct CompletedRun {
    pub outcome: RunOutcome,
    pub simulation: Simulation,
    pub report: Option<TopologyReport>,
}

pub const SUMMARY_HEADER: &str = "m,metric,runs,mean,std";

pub const SUMMARY_METRICS: [&str; 7] = [
    "links",
    "avg_degree",
    "gamma",
    "r_squared",
    "assortativity",
    "peak_infectious_fraction",
    "final_infectious_fraction",
];

impl RunOutcome {
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "links" => Some(self.links as f64),
            "avg_degree" => Some(self.avg_degree),
            "gamma" => self.gamma,
            "r_squared" => self.r_squared,
            "assortativity" => self.assortativity,
            "peak_infectious_fraction" => Some(self.peak_infectious_fraction),
            "final_infectious_fraction" => Some(self.final_infectious_fraction),
            _ => None,
        }
    }
}

/// Runs one configuration to its horizon, calling `at_clock` at every clock value.
pub fn execute(config: SimConfig, replicate: usize, at_clock: impl FnMut(&Simulation)) -> Result<CompletedRun> {
    let m = config.m;
    let seed = config.rng_seed;
    let mut sim = Simulation::new(config)?;
    sim.run_observed(at_clock);
    let n = sim.state.population();
    let graph = Graph::from_state(&sim.state);
    let report = if graph.edge_count() > 0 { Some(topology_report(&graph)?) } else { None };
    let peak = sim.series.iter().map(|r| r.infectious).max().unwrap_or(0);
    let last = sim.series.last().map_or(0, |r| r.infectious);
    let outcome = RunOutcome {
        m,
        replicate,
        seed,
        links: sim.state.edge_count(),
        avg_degree: 2.0 * sim.state.edge_count() as f64 / n as f64,
        gamma: report.as_ref().and_then(|r| r.fit).map(|f| f.gamma),
        r_squared: report.as_ref().and_then(|r| r.fit).map(|f| f.r_squared),
        assortativity: report.as_ref().and_then(|r| r.assortativity.value()),
        peak_infectious_fraction: peak as f64 / n as f64,
        final_infectious_fraction: last as f64 / n as f64,
        phase1_end: sim.phase1_end(),
        audit: sim.audit,
    };
    Ok(CompletedRun { outcome, simulation: sim, report })
}

pub fn run_dir(out: &Path, m: usize, replicate: usize) -> PathBuf {
    out.join(format!("m{m}")).join(format!("rep{replicate:03}"))
}

fn run_and_write(config: SimConfig, replicate: usize, snapshot_at: Option<&[u64]>, dir: &Path) -> Result<RunOutcome> {
    let requested: Option<BTreeSet<u64>> = snapshot_at.map(|s| s.iter().copied().collect());
    let horizon = config.timesteps;
    let mut snapshot_error = None;
    let run = execute(config, replicate, |sim| {
        let t = sim.state.t;
        let wanted = match &requested {
            Some(set) => set.contains(&t),
            None => t == horizon || sim.phase1_end() == Some(t),
        };
        if wanted && snapshot_error.is_none() {
            if let Err(e) = output::write_edge_list(&sim.state, &dir.join(format!("edges_t{t}.csv"))) {
                snapshot_error = Some(e);
            }
        }
    })?;
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    let sim = &run.simulation;
    output::write_time_series(&sim.series, &dir.join("timeseries.csv"))?;
    output::write_event_log(&sim.events, &dir.join("events.csv"))?;
    let topo = dir.join("topology.csv");
    match &run.report {
        Some(report) => output::write_topology_report(report, &topo)?,
        None => output::write_empty_topology(run.outcome.avg_degree, &topo)?,
    }
    Ok(run.outcome)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub m: usize,
    pub metric: &'static str,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation per `(m, metric)`, ordered by `m` and
/// then by [`SUMMARY_METRICS`]. Undefined per-run values are left out.
pub fn summarize(outcomes: &[RunOutcome]) -> Vec<SummaryRow> {
    let ms: BTreeSet<usize> = outcomes.iter().map(|o| o.m).collect();
    let mut rows = Vec::new();
    for m in ms {
        for metric in SUMMARY_METRICS {
            let values: Vec<f64> = outcomes.iter().filter(|o| o.m == m).filter_map(|o| o.metric(metric)).collect();
            let (mean, std) = mean_std(&values);
            rows.push(SummaryRow { m, metric, runs: values.len(), mean, std });
        }
    }
    rows
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let body: Vec<String> = rows
        .iter()
        .map(|r| {
            if r.runs == 0 {
                format!("{},{},0,{},{}", r.m, r.metric, output::UNDEFINED, output::UNDEFINED)
            } else {
                format!("{},{},{},{},{}", r.m, r.metric, r.runs, r.mean, r.std)
            }
        })
        .collect();
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for line in body {
        text.push_str(&line);
        text.push('\n');
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// All runs of a spec: every sweep value times every replicate.
pub struct BatchResult {
    pub outcomes: Vec<RunOutcome>,
    pub summary: Vec<SummaryRow>,
}

/// Executes every `(m, replicate)` pair, writes per-run artifacts under
/// `spec.out/m<m>/rep<k>/` and the aggregate `spec.out/summary.csv`.
pub fn run_simulation(spec: &RunSpec) -> Result<BatchResult> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.out).map_err(|e| Error::io(&spec.out, e))?;
    let jobs: Vec<(usize, usize)> = spec
        .m_values()
        .into_iter()
        .flat_map(|m| (0..spec.replicates).map(move |k| (m, k)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(m, k)| {
            let seed = replicate_seed(spec.config.rng_seed, k);
            let config = SimConfig { m, rng_seed: seed, ..spec.config.clone() };
            run_and_write(config, k, spec.snapshot_at.as_deref(), &run_dir(&spec.out, m, k)).map_err(|e| Error::Run {
                m,
                replicate: k,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&outcomes);
    write_summary(&summary, &spec.out.join("summary.csv"))?;
    Ok(BatchResult { outcomes, summary })
}
