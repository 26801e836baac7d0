//! Bookkeeping for the acceptance suite (`cargo test -p wanroute-verify`).
//!
//! Each criterion yields a [`Verdict`]; the [`Scoreboard`] prints one line per
//! criterion as soon as it is decided and a summary at the end.

use std::fmt;
use std::time::{Duration, Instant};

use wanroute_core::{Bin, ComparisonCell, Metric};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable in this environment (missing optional input).
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn pass(detail: impl Into<String>) -> Self {
        Verdict { status: Status::Pass, detail: detail.into() }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Verdict { status: Status::Fail, detail: detail.into() }
    }

    pub fn skip(detail: impl Into<String>) -> Self {
        Verdict { status: Status::Skip, detail: detail.into() }
    }

    /// Pass iff `ok`.
    pub fn check(ok: bool, detail: impl Into<String>) -> Self {
        if ok { Self::pass(detail) } else { Self::fail(detail) }
    }
}

#[derive(Debug, Default)]
pub struct Scoreboard {
    rows: Vec<(u32, String, Status, Duration)>,
}

impl Scoreboard {
    /// Runs one criterion, turning a panic into a failure, and prints its line.
    pub fn run(&mut self, id: u32, title: &str, criterion: impl FnOnce() -> Verdict) -> Status {
        let start = Instant::now();
        let verdict = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(criterion)) {
            Ok(v) => v,
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Verdict::fail(format!("panicked: {msg}"))
            }
        };
        let took = start.elapsed();
        println!(
            "{} [{id:>2}] {title}: {} ({:.1} s)",
            verdict.status,
            verdict.detail,
            took.as_secs_f64()
        );
        self.rows.push((id, title.to_string(), verdict.status, took));
        verdict.status
    }

    pub fn failures(&self) -> Vec<u32> {
        self.rows
            .iter()
            .filter(|r| r.2 == Status::Fail)
            .map(|r| r.0)
            .collect()
    }

    pub fn summary(&self) -> String {
        let count = |s| self.rows.iter().filter(|r| r.2 == s).count();
        format!(
            "acceptance: {} passed, {} failed, {} skipped",
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Skip)
        )
    }
}

/// Scheme rows of the reference comparison on the 197-node Cogent WAN.
pub const REFERENCE_SCHEMES: [&str; 7] = [
    "minsum_load",
    "minmax_load",
    "minsum_load_demand",
    "minmax_load_demand",
    "minsum_util",
    "minmax_util",
    "minhop",
];

/// Reference bins per scheme row; columns are metric (mfct, tfct, bandwidth)
/// × distribution (exponential, Pareto) × policy (fcfs, srpt, mmf).
pub const REFERENCE_BINS: [[&str; 18]; 7] = [
    ["<10", "<10", "<10", "<20", "<10", "<20", "<10", "<10", "<10", "<10", "<10", "<10", "<30", "<30", "<30", "<40", "<40", "<40"],
    ["<50", ">=50", "<20", "<20", "<40", "<40", "<30", "<40", "<10", "<10", "<10", "<10", ">=50", ">=50", ">=50", "<50", "<50", "<50"],
    ["<10", "<10", "<10", "<10", "<10", "<20", "<10", "<10", "<10", "<20", "<10", "<20", "<20", "<20", "<20", "<20", "<20", "<20"],
    ["<50", ">=50", "<20", "<20", "<30", "<40", "<30", "<40", "<10", "<10", "<10", "<10", ">=50", ">=50", ">=50", "<50", "<50", "<50"],
    [">=50", "<50", "<20", ">=50", "<30", "<10", ">=50", "<50", "<50", "<40", ">=50", "<40", ">=50", ">=50", "<30", ">=50", ">=50", "<50"],
    ["<50", "<40", "<20", ">=50", "<20", "<10", ">=50", "<40", "<40", "<50", ">=50", ">=50", ">=50", ">=50", ">=50", ">=50", "<50", ">=50"],
    ["<50", "<30", ">=50", ">=50", "<20", ">=50", ">=50", ">=50", ">=50", "<50", "<50", ">=50", "<10", "<10", "<10", "<10", "<10", "<10"],
];

/// Reference bin for one cell; `distribution` 0 is exponential, 1 Pareto.
pub fn reference_bin(scheme: &str, metric: Metric, distribution: usize, policy: &str) -> Option<&'static str> {
    let row = REFERENCE_SCHEMES.iter().position(|s| *s == scheme)?;
    let m = Metric::ALL.iter().position(|x| *x == metric)?;
    let p = ["fcfs", "srpt", "mmf"].iter().position(|x| *x == policy)?;
    REFERENCE_BINS[row].get(m * 6 + distribution * 3 + p).copied()
}

/// Cells whose bin equals the reference, out of cells with a reference.
/// `distributions` lists the exponential then the Pareto label.
pub fn bin_agreement(cells: &[ComparisonCell], distributions: [&str; 2]) -> (usize, usize) {
    let mut agree = 0;
    let mut total = 0;
    for c in cells {
        let Some(d) = distributions.iter().position(|x| *x == c.distribution) else {
            continue;
        };
        if let Some(want) = reference_bin(&c.scheme, c.metric, d, &c.policy) {
            total += 1;
            if c.bin.label() == want {
                agree += 1;
            }
        }
    }
    (agree, total)
}

/// Bin labels in legend order.
pub fn legend() -> Vec<&'static str> {
    [Bin::Under10, Bin::Under20, Bin::Under30, Bin::Under40, Bin::Under50, Bin::AtLeast50]
        .iter()
        .map(|b| b.label())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_lookup() {
        assert_eq!(reference_bin("minhop", Metric::Bandwidth, 1, "mmf"), Some("<10"));
        assert_eq!(reference_bin("minmax_load", Metric::Mfct, 0, "srpt"), Some(">=50"));
        assert_eq!(reference_bin("minsum_util", Metric::Tfct, 1, "srpt"), Some(">=50"));
        assert_eq!(reference_bin("nope", Metric::Mfct, 0, "fcfs"), None);
        for row in REFERENCE_BINS {
            assert!(row.iter().all(|b| legend().contains(b)));
        }
    }
}
