//! Per-run summaries and cross-scheme comparison tables.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::engine::CompletedFlow;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no flows left to summarize after skipping {warmup} warm-up flows")]
    NoFlows { warmup: usize },
    #[error("group policy={policy} distribution={distribution} has no runs for scheme {scheme}")]
    MissingScheme {
        policy: String,
        distribution: String,
        scheme: String,
    },
    #[error("minimum {metric} is not positive in group policy={policy} distribution={distribution}")]
    NonPositiveMinimum {
        metric: Metric,
        policy: String,
        distribution: String,
    },
}

/// Identifies the experiment cell a run belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunLabel {
    pub scheme: String,
    pub policy: String,
    pub distribution: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub label: RunLabel,
    /// Flows counted in the statistics (after warm-up).
    pub flows: usize,
    pub mfct: f64,
    /// 99th-percentile FCT, nearest rank.
    pub tfct: f64,
    /// Byte-hops: Σ demand × hop count.
    pub total_bandwidth: f64,
    pub realized_demand_mean: f64,
    /// Counted flows, ordered by flow id.
    pub flow_records: Vec<CompletedFlow>,
}

impl RunReport {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Mfct => self.mfct,
            Metric::Tfct => self.tfct,
            Metric::Bandwidth => self.total_bandwidth,
        }
    }
}

/// Nearest-rank percentile of an ascending slice, `pct` in (0, 100].
pub fn nearest_rank(sorted: &[f64], pct: u32) -> f64 {
    let n = sorted.len();
    let rank = (pct as usize * n).div_ceil(100).max(1);
    sorted[rank - 1]
}

/// Summarizes completed flows, skipping the first `warmup_skip` flow ids.
pub fn compute_report(
    label: RunLabel,
    mut completed: Vec<CompletedFlow>,
    warmup_skip: usize,
) -> Result<RunReport, MetricsError> {
    completed.sort_by_key(|f| f.flow_id);
    let counted: Vec<CompletedFlow> = completed.into_iter().skip(warmup_skip).collect();
    if counted.is_empty() {
        return Err(MetricsError::NoFlows {
            warmup: warmup_skip,
        });
    }
    let n = counted.len() as f64;
    let mut fcts: Vec<f64> = counted.iter().map(CompletedFlow::fct).collect();
    let mfct = fcts.iter().sum::<f64>() / n;
    fcts.sort_by(f64::total_cmp);
    let tfct = nearest_rank(&fcts, 99);
    let total_bandwidth = counted
        .iter()
        .map(|f| f.demand * f.hop_count as f64)
        .sum();
    let realized_demand_mean = counted.iter().map(|f| f.demand).sum::<f64>() / n;
    Ok(RunReport {
        label,
        flows: counted.len(),
        mfct,
        tfct,
        total_bandwidth,
        realized_demand_mean,
        flow_records: counted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Mfct,
    Tfct,
    Bandwidth,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mfct, Metric::Tfct, Metric::Bandwidth];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mfct => "mfct",
            Metric::Tfct => "tfct",
            Metric::Bandwidth => "bandwidth",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Distance-from-best buckets: `[0,10)`, `[10,20)`, … `[40,50)`, `[50,∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bin {
    Under10,
    Under20,
    Under30,
    Under40,
    Under50,
    AtLeast50,
}

impl Bin {
    pub fn of(percent: f64) -> Bin {
        match percent {
            p if p < 10.0 => Bin::Under10,
            p if p < 20.0 => Bin::Under20,
            p if p < 30.0 => Bin::Under30,
            p if p < 40.0 => Bin::Under40,
            p if p < 50.0 => Bin::Under50,
            _ => Bin::AtLeast50,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bin::Under10 => "<10",
            Bin::Under20 => "<20",
            Bin::Under30 => "<30",
            Bin::Under40 => "<40",
            Bin::Under50 => "<50",
            Bin::AtLeast50 => ">=50",
        }
    }
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonCell {
    pub metric: Metric,
    pub policy: String,
    pub distribution: String,
    pub scheme: String,
    /// Seed-averaged metric value.
    pub value: f64,
    pub percent_from_min: f64,
    pub bin: Bin,
}

fn first_appearance<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Seed-averages every scheme per (policy, distribution) group and compares
/// each average against the group's best. Groups, schemes and metrics keep
/// the order in which they first appear in `reports`.
pub fn comparison_matrix(reports: &[RunReport]) -> Result<Vec<ComparisonCell>, MetricsError> {
    let schemes = first_appearance(reports.iter().map(|r| r.label.scheme.as_str()));
    let groups: Vec<(&str, &str)> = {
        let mut out = Vec::new();
        for r in reports {
            let key = (r.label.policy.as_str(), r.label.distribution.as_str());
            if !out.contains(&key) {
                out.push(key);
            }
        }
        out
    };
    let mut cells = Vec::new();
    for metric in Metric::ALL {
        for &(policy, distribution) in &groups {
            let mut averages = Vec::with_capacity(schemes.len());
            for &scheme in &schemes {
                let values: Vec<f64> = reports
                    .iter()
                    .filter(|r| {
                        r.label.scheme == scheme
                            && r.label.policy == policy
                            && r.label.distribution == distribution
                    })
                    .map(|r| r.metric(metric))
                    .collect();
                if values.is_empty() {
                    return Err(MetricsError::MissingScheme {
                        policy: policy.to_string(),
                        distribution: distribution.to_string(),
                        scheme: scheme.to_string(),
                    });
                }
                averages.push(values.iter().sum::<f64>() / values.len() as f64);
            }
            let min = averages.iter().copied().fold(f64::INFINITY, f64::min);
            if !(min > 0.0) {
                return Err(MetricsError::NonPositiveMinimum {
                    metric,
                    policy: policy.to_string(),
                    distribution: distribution.to_string(),
                });
            }
            for (&scheme, &value) in schemes.iter().zip(&averages) {
                let percent_from_min = 100.0 * (value - min) / min;
                cells.push(ComparisonCell {
                    metric,
                    policy: policy.to_string(),
                    distribution: distribution.to_string(),
                    scheme: scheme.to_string(),
                    value,
                    percent_from_min,
                    bin: Bin::of(percent_from_min),
                });
            }
        }
    }
    Ok(cells)
}

/// Plain-text table: one row per scheme, one column per
/// (metric, distribution, policy), each cell holding its bin. A second table
/// shows the percentages behind the bins.
pub fn render_matrix(cells: &[ComparisonCell]) -> String {
    let schemes = first_appearance(cells.iter().map(|c| c.scheme.as_str()));
    let distributions = first_appearance(cells.iter().map(|c| c.distribution.as_str()));
    let policies = first_appearance(cells.iter().map(|c| c.policy.as_str()));
    let metrics: Vec<Metric> = Metric::ALL
        .into_iter()
        .filter(|m| cells.iter().any(|c| c.metric == *m))
        .collect();

    let lookup = |m: Metric, d: &str, p: &str, s: &str| {
        cells
            .iter()
            .find(|c| c.metric == m && c.distribution == d && c.policy == p && c.scheme == s)
    };

    let mut columns = Vec::new();
    for &m in &metrics {
        for (di, &d) in distributions.iter().enumerate() {
            for &p in &policies {
                columns.push((m, di, d, p));
            }
        }
    }
    let scheme_width = schemes.iter().map(|s| s.len()).max().unwrap_or(0).max(6);
    let col_width = policies
        .iter()
        .map(|p| p.len())
        .max()
        .unwrap_or(0)
        .max(metrics.iter().map(|m| m.name().len()).max().unwrap_or(0))
        .max(8);

    let mut out = String::new();
    let header = |out: &mut String| {
        let _ = write!(out, "{:<scheme_width$}", "");
        for (m, _, _, _) in &columns {
            let _ = write!(out, " | {:<col_width$}", m.name());
        }
        out.push('\n');
        let _ = write!(out, "{:<scheme_width$}", "");
        for (_, di, _, _) in &columns {
            let _ = write!(out, " | {:<col_width$}", format!("D{}", di + 1));
        }
        out.push('\n');
        let _ = write!(out, "{:<scheme_width$}", "scheme");
        for (_, _, _, p) in &columns {
            let _ = write!(out, " | {:<col_width$}", p);
        }
        out.push('\n');
        let width = scheme_width + columns.len() * (col_width + 3);
        out.push_str(&"-".repeat(width));
        out.push('\n');
    };

    out.push_str("percent from minimum, binned\n");
    header(&mut out);
    for &s in &schemes {
        let _ = write!(out, "{:<scheme_width$}", s);
        for &(m, _, d, p) in &columns {
            let text = lookup(m, d, p, s).map_or("-".to_string(), |c| c.bin.label().to_string());
            let _ = write!(out, " | {:<col_width$}", text);
        }
        out.push('\n');
    }

    out.push_str("\npercent from minimum\n");
    header(&mut out);
    for &s in &schemes {
        let _ = write!(out, "{:<scheme_width$}", s);
        for &(m, _, d, p) in &columns {
            let text = lookup(m, d, p, s).map_or("-".to_string(), |c| format!("{:.1}", c.percent_from_min));
            let _ = write!(out, " | {:>col_width$}", text);
        }
        out.push('\n');
    }

    out.push('\n');
    for (di, d) in distributions.iter().enumerate() {
        let _ = writeln!(out, "D{} = {}", di + 1, d);
    }
    out.push_str("bins: <10 <20 <30 <40 <50 >=50 percent above the best scheme\n");
    out
}
