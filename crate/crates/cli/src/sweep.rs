//! Runs the experiment grid and writes `runs.csv`, `matrix.csv` and
//! `matrix.txt`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;
use wanroute_core::{
    comparison_matrix, load_topology_file, render_matrix, run, ComparisonCell, MetricsError,
    RunLabel, RunReport, ScenarioConfig, SchedulingPolicy, SelectionScheme, Topology,
    TopologyError,
};

use crate::config::SweepConfig;

pub const RUNS_HEADER: [&str; 8] = [
    "scheme", "policy", "distribution", "seed", "flows", "mfct", "tfct", "bandwidth",
];
pub const MATRIX_HEADER: [&str; 7] = [
    "metric", "policy", "distribution", "scheme", "value", "percent_from_min", "bin",
];

/// Significant digits of every real written to CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("cannot load topology {path}: {source}")]
    Topology { path: PathBuf, source: TopologyError },
    #[error("run {cell} failed: {source}")]
    Run { cell: String, source: wanroute_core::Error },
    #[error("cannot build thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cannot write {path}: {msg}")]
    Write { path: PathBuf, msg: String },
    #[error("cannot read {path}: {msg}")]
    Read { path: PathBuf, msg: String },
}

/// One line of `runs.csv`, with reals rounded to their written form.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub scheme: String,
    pub policy: String,
    pub distribution: String,
    pub seed: u64,
    pub flows: usize,
    pub mfct: f64,
    pub tfct: f64,
    pub bandwidth: f64,
}

impl RunRow {
    fn from_report(report: &RunReport) -> Self {
        RunRow {
            scheme: report.label.scheme.clone(),
            policy: report.label.policy.clone(),
            distribution: report.label.distribution.clone(),
            seed: report.label.seed,
            flows: report.flows,
            mfct: quantize(report.mfct),
            tfct: quantize(report.tfct),
            bandwidth: quantize(report.total_bandwidth),
        }
    }

    /// A report without flow records, enough for the comparison matrix.
    pub fn to_report(&self) -> RunReport {
        RunReport {
            label: RunLabel {
                scheme: self.scheme.clone(),
                policy: self.policy.clone(),
                distribution: self.distribution.clone(),
                seed: self.seed,
            },
            flows: self.flows,
            mfct: self.mfct,
            tfct: self.tfct,
            total_bandwidth: self.bandwidth,
            realized_demand_mean: f64::NAN,
            flow_records: Vec::new(),
        }
    }
}

/// Results of a finished sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Sorted by scheme and policy (registry order), distribution (configuration
    /// order) and seed.
    pub rows: Vec<RunRow>,
    pub matrix: Vec<ComparisonCell>,
}

/// Fixed significant-digit rendering used for every real in the CSV files.
pub fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (SIGNIFICANT_DIGITS as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Rounds `x` to the value its CSV rendering parses back to.
pub fn quantize(x: f64) -> f64 {
    format_real(x).parse().unwrap_or(x)
}

struct Cell {
    scheme: SelectionScheme,
    policy: SchedulingPolicy,
    dist_index: usize,
    seed: u64,
}

fn grid(config: &SweepConfig) -> Vec<Cell> {
    let mut cells = Vec::with_capacity(config.run_count());
    for &scheme in &config.schemes {
        for &policy in &config.policies {
            for dist_index in 0..config.distributions.len() {
                for &seed in &config.seeds {
                    cells.push(Cell {
                        scheme,
                        policy,
                        dist_index,
                        seed,
                    });
                }
            }
        }
    }
    cells
}

fn sort_key(cell: &Cell) -> (usize, usize, usize, u64) {
    let scheme = SelectionScheme::ALL
        .iter()
        .position(|s| *s == cell.scheme)
        .unwrap_or(usize::MAX);
    let policy = SchedulingPolicy::ALL
        .iter()
        .position(|p| *p == cell.policy)
        .unwrap_or(usize::MAX);
    (scheme, policy, cell.dist_index, cell.seed)
}

fn cell_name(config: &SweepConfig, cell: &Cell) -> String {
    format!(
        "scheme={} policy={} dist={} seed={}",
        cell.scheme.name(),
        cell.policy.name(),
        config.distributions[cell.dist_index].label,
        cell.seed
    )
}

/// Runs every cell of the grid, at most `config.jobs` at a time. After the
/// first failure no new runs start; the error names the failed cell.
pub fn execute(config: &SweepConfig) -> Result<Vec<RunRow>, SweepError> {
    let topology: Arc<Topology> =
        Arc::new(
            load_topology_file(&config.topology).map_err(|source| SweepError::Topology {
                path: config.topology.clone(),
                source,
            })?,
        );
    let mut cells = grid(config);
    cells.sort_by_key(sort_key);
    let total = cells.len();
    let failed = AtomicBool::new(false);
    let finished = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()?;
    log::info!(
        "{total} runs on {} ({} nodes, {} links), {} jobs",
        config.topology.display(),
        topology.node_count(),
        topology.link_count(),
        config.jobs
    );

    let results: Vec<Option<Result<RunRow, SweepError>>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                if failed.load(Ordering::SeqCst) {
                    return None;
                }
                let dist = &config.distributions[cell.dist_index];
                let scenario = ScenarioConfig {
                    topology: Arc::clone(&topology),
                    capacity: config.capacity,
                    distribution: dist.distribution.clone(),
                    distribution_label: dist.label.clone(),
                    rate_lambda: config.rate_lambda,
                    flow_count: config.flow_count,
                    scheme: cell.scheme,
                    policy: cell.policy,
                    seed: cell.seed,
                    warmup: config.warmup_skip,
                };
                let result = match run(&scenario) {
                    Ok(report) => {
                        let done = finished.fetch_add(1, Ordering::SeqCst) + 1;
                        log::info!(
                            "[{done}/{total}] {} mfct={:.4} tfct={:.4} bandwidth={:.1}",
                            cell_name(config, cell),
                            report.mfct,
                            report.tfct,
                            report.total_bandwidth
                        );
                        Ok(RunRow::from_report(&report))
                    }
                    Err(source) => {
                        failed.store(true, Ordering::SeqCst);
                        let cell = cell_name(config, cell);
                        log::error!("run {cell} failed: {source}");
                        Err(SweepError::Run { cell, source })
                    }
                };
                Some(result)
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(total);
    for result in results.into_iter().flatten() {
        rows.push(result?);
    }
    Ok(rows)
}

/// Seed-averaged comparison of the rows, exactly as recomputed from `runs.csv`.
pub fn matrix_of(rows: &[RunRow]) -> Result<Vec<ComparisonCell>, MetricsError> {
    let reports: Vec<RunReport> = rows.iter().map(RunRow::to_report).collect();
    comparison_matrix(&reports)
}

/// Executes the grid and writes the three output files into `config.out`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome, SweepError> {
    let rows = execute(config)?;
    let matrix = matrix_of(&rows)?;
    fs::create_dir_all(&config.out).map_err(|e| SweepError::Write {
        path: config.out.clone(),
        msg: e.to_string(),
    })?;
    write_runs_csv(&config.out.join("runs.csv"), &rows)?;
    write_matrix_csv(&config.out.join("matrix.csv"), &matrix)?;
    let text = config.out.join("matrix.txt");
    fs::write(&text, render_matrix(&matrix)).map_err(|e| SweepError::Write {
        path: text,
        msg: e.to_string(),
    })?;
    Ok(SweepOutcome { rows, matrix })
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> SweepError + '_ {
    move |e| SweepError::Write {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

pub fn write_runs_csv(path: &Path, rows: &[RunRow]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_path(path).map_err(write_err(path))?;
    w.write_record(RUNS_HEADER).map_err(write_err(path))?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            r.policy.clone(),
            r.distribution.clone(),
            r.seed.to_string(),
            r.flows.to_string(),
            format_real(r.mfct),
            format_real(r.tfct),
            format_real(r.bandwidth),
        ])
        .map_err(write_err(path))?;
    }
    w.flush().map_err(|e| SweepError::Write {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn write_matrix_csv(path: &Path, cells: &[ComparisonCell]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_path(path).map_err(write_err(path))?;
    w.write_record(MATRIX_HEADER).map_err(write_err(path))?;
    for c in cells {
        w.write_record([
            c.metric.name().to_string(),
            c.policy.clone(),
            c.distribution.clone(),
            c.scheme.clone(),
            format_real(c.value),
            format_real(c.percent_from_min),
            c.bin.label().to_string(),
        ])
        .map_err(write_err(path))?;
    }
    w.flush().map_err(|e| SweepError::Write {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// Reads a `runs.csv` written by [`write_runs_csv`].
pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRow>, SweepError> {
    let fail = |msg: String| SweepError::Read {
        path: path.to_path_buf(),
        msg,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    let header = r.headers().map_err(|e| fail(e.to_string()))?;
    if header.iter().ne(RUNS_HEADER) {
        return Err(fail(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let field = |k: usize| record.get(k).unwrap_or("");
        let num = |k: usize| {
            field(k)
                .parse::<f64>()
                .map_err(|_| fail(format!("row {}: bad {}", i + 1, RUNS_HEADER[k])))
        };
        rows.push(RunRow {
            scheme: field(0).to_string(),
            policy: field(1).to_string(),
            distribution: field(2).to_string(),
            seed: field(3)
                .parse()
                .map_err(|_| fail(format!("row {}: bad seed", i + 1)))?,
            flows: field(4)
                .parse()
                .map_err(|_| fail(format!("row {}: bad flows", i + 1)))?,
            mfct: num(5)?,
            tfct: num(6)?,
            bandwidth: num(7)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_twelve_significant_digits() {
        assert_eq!(format_real(20.0), "20.0000000000");
        assert_eq!(format_real(0.5), "0.500000000000");
        assert_eq!(format_real(1234567.891234567), "1234567.89123");
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1e13), "10000000000000");
    }

    #[test]
    fn quantize_is_idempotent() {
        for x in [1.0 / 3.0, 2.0f64.sqrt() * 1e5, 7e-4, 123.456] {
            let q = quantize(x);
            assert_eq!(quantize(q), q);
            assert!((q - x).abs() <= x.abs() * 1e-11);
        }
    }
}
