//! Sweep configuration: flags, `WANROUTE_*` environment variables and a flat
//! `key = value` config file, in that order of precedence.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;
use wanroute_core::{load_empirical_cdf_file, DemandDistribution, SchedulingPolicy, SelectionScheme};

pub const DEFAULT_FLOWS: usize = 50_000;
pub const DEFAULT_SEEDS: &str = "1..10";
pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_DISTRIBUTIONS: [&str; 2] = ["exp:mean=20,max=500", "pareto:mean=20,min=2,max=500"];
pub const DEFAULT_OUT: &str = "results";

/// Config file keys, identical to the long flag names.
pub const CONFIG_KEYS: [&str; 11] = [
    "topology", "capacity", "scheme", "policy", "dist", "lambda", "flows", "seeds", "warmup",
    "out", "jobs",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Cli(#[from] clap::Error),
    #[error("{path}:{line}: {msg}")]
    File { path: PathBuf, line: usize, msg: String },
    #[error("cannot read config file {path}: {msg}")]
    FileIo { path: PathBuf, msg: String },
    #[error("no topology given; pass --topology, set WANROUTE_TOPOLOGY or add `topology = ...` to the config file")]
    NoTopology,
    #[error("topology file {0} does not exist")]
    MissingTopology(PathBuf),
    #[error("unknown scheme `{name}`; valid schemes: all, {valid}")]
    UnknownScheme { name: String, valid: String },
    #[error("unknown policy `{name}`; valid policies: all, {valid}")]
    UnknownPolicy { name: String, valid: String },
    #[error("unknown distribution `{name}`; valid kinds: exp:mean=M,max=X, pareto:mean=M,min=N,max=X, cdf:<path>")]
    UnknownDistribution { name: String },
    #[error("bad distribution `{spec}`: {msg}")]
    BadDistribution { spec: String, msg: String },
    #[error("bad value for {key}: `{value}` ({msg})")]
    BadValue { key: &'static str, value: String, msg: String },
    #[error("{0} list is empty")]
    EmptyList(&'static str),
}

#[derive(Debug, Parser, Default)]
#[command(
    name = "wanroute",
    version,
    about = "Sweep adaptive routing schemes and scheduling policies over a WAN topology",
    after_help = "Every flag can also be set through WANROUTE_<FLAG> (e.g. WANROUTE_FLOWS=20000) \
                  or as `flag = value` in the --config file. Flags beat environment variables, \
                  which beat the config file."
)]
struct Args {
    /// Topology edge-list file
    #[arg(long, env = "WANROUTE_TOPOLOGY")]
    topology: Option<PathBuf>,
    /// Replace every link capacity with this value
    #[arg(long, env = "WANROUTE_CAPACITY")]
    capacity: Option<f64>,
    /// Path-selection scheme, or `all` (repeatable)
    #[arg(long, env = "WANROUTE_SCHEME", value_delimiter = ',')]
    scheme: Vec<String>,
    /// Scheduling policy, or `all` (repeatable)
    #[arg(long, env = "WANROUTE_POLICY", value_delimiter = ',')]
    policy: Vec<String>,
    /// Demand distribution: exp:mean=20,max=500 | pareto:mean=20,min=2,max=500 | cdf:<path> (repeatable)
    #[arg(long, env = "WANROUTE_DIST", value_delimiter = ';')]
    dist: Vec<String>,
    /// Flow arrival rate
    #[arg(long, env = "WANROUTE_LAMBDA")]
    lambda: Option<f64>,
    /// Flows per run
    #[arg(long, env = "WANROUTE_FLOWS")]
    flows: Option<usize>,
    /// Seeds: `a..b` (inclusive) or a comma list, e.g. 1..10 or 1,2,7
    #[arg(long, env = "WANROUTE_SEEDS")]
    seeds: Option<String>,
    /// Leading flows excluded from the statistics
    #[arg(long, env = "WANROUTE_WARMUP")]
    warmup: Option<usize>,
    /// Output directory
    #[arg(long, env = "WANROUTE_OUT")]
    out: Option<PathBuf>,
    /// Runs executed concurrently [default: available cores]
    #[arg(long, env = "WANROUTE_JOBS")]
    jobs: Option<usize>,
    /// Flat `key = value` config file
    #[arg(long, env = "WANROUTE_CONFIG")]
    config: Option<PathBuf>,
}

/// A named demand distribution of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DistSpec {
    /// Text used in reports, as given on the command line.
    pub label: String,
    pub distribution: DemandDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub topology: PathBuf,
    pub capacity: Option<f64>,
    pub schemes: Vec<SelectionScheme>,
    pub policies: Vec<SchedulingPolicy>,
    pub distributions: Vec<DistSpec>,
    pub rate_lambda: f64,
    pub flow_count: usize,
    pub seeds: Vec<u64>,
    pub warmup_skip: usize,
    pub out: PathBuf,
    pub jobs: usize,
}

impl SweepConfig {
    /// Number of runs in the grid.
    pub fn run_count(&self) -> usize {
        self.schemes.len() * self.policies.len() * self.distributions.len() * self.seeds.len()
    }
}

/// Parses `args` (program name first) together with the environment and the
/// optional config file.
pub fn parse_config<I, T>(args: I) -> Result<SweepConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(args)?;
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => FileValues::default(),
    };
    let base = file.base.clone();
    let resolve = |p: PathBuf| match &base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    };

    let topology = match (args.topology, file.get("topology")) {
        (Some(p), _) => p,
        (None, Some(v)) => resolve(PathBuf::from(v)),
        (None, None) => return Err(ConfigError::NoTopology),
    };
    if !topology.is_file() {
        return Err(ConfigError::MissingTopology(topology));
    }

    let capacity = pick(args.capacity, file.get("capacity"), "capacity")?;
    if let Some(c) = capacity {
        if !(c > 0.0 && c.is_finite()) {
            return Err(bad("capacity", c.to_string(), "must be positive"));
        }
    }

    let scheme_names = list_or(args.scheme, file.list("scheme", ','), &["all"]);
    let schemes = parse_schemes(&scheme_names)?;
    let policy_names = list_or(args.policy, file.list("policy", ','), &["all"]);
    let policies = parse_policies(&policy_names)?;

    let (dist_specs, dist_base) = if !args.dist.is_empty() {
        (args.dist, None)
    } else if let Some(list) = file.list("dist", ';') {
        (list, base.clone())
    } else {
        (DEFAULT_DISTRIBUTIONS.iter().map(|s| s.to_string()).collect(), None)
    };
    let distributions = dist_specs
        .iter()
        .map(|s| parse_distribution(s, dist_base.as_deref()))
        .collect::<Result<Vec<_>, _>>()?;
    if distributions.is_empty() {
        return Err(ConfigError::EmptyList("distribution"));
    }

    let rate_lambda = pick(args.lambda, file.get("lambda"), "lambda")?.unwrap_or(DEFAULT_LAMBDA);
    if !(rate_lambda > 0.0 && rate_lambda.is_finite()) {
        return Err(bad("lambda", rate_lambda.to_string(), "must be positive"));
    }
    let flow_count = pick(args.flows, file.get("flows"), "flows")?.unwrap_or(DEFAULT_FLOWS);
    if flow_count == 0 {
        return Err(bad("flows", "0".into(), "must be at least 1"));
    }
    let seeds_text = args
        .seeds
        .or_else(|| file.get("seeds").map(str::to_string))
        .unwrap_or_else(|| DEFAULT_SEEDS.to_string());
    let seeds = parse_seeds(&seeds_text)?;
    let warmup_skip = pick(args.warmup, file.get("warmup"), "warmup")?.unwrap_or(0);
    if warmup_skip >= flow_count {
        return Err(bad("warmup", warmup_skip.to_string(), "must be below the flow count"));
    }
    let out = match (args.out, file.get("out")) {
        (Some(p), _) => p,
        (None, Some(v)) => resolve(PathBuf::from(v)),
        (None, None) => PathBuf::from(DEFAULT_OUT),
    };
    let jobs = pick(args.jobs, file.get("jobs"), "jobs")?
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(bad("jobs", "0".into(), "must be at least 1"));
    }

    Ok(SweepConfig {
        topology,
        capacity,
        schemes,
        policies,
        distributions,
        rate_lambda,
        flow_count,
        seeds,
        warmup_skip,
        out,
        jobs,
    })
}

fn bad(key: &'static str, value: String, msg: &str) -> ConfigError {
    ConfigError::BadValue { key, value, msg: msg.to_string() }
}

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: Option<&str>,
    key: &'static str,
) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match (flag, file) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(text)) => text
            .parse()
            .map(Some)
            .map_err(|e: T::Err| bad(key, text.to_string(), &e.to_string())),
        (None, None) => Ok(None),
    }
}

fn list_or(flag: Vec<String>, file: Option<Vec<String>>, default: &[&str]) -> Vec<String> {
    if !flag.is_empty() {
        flag
    } else {
        file.unwrap_or_else(|| default.iter().map(|s| s.to_string()).collect())
    }
}

/// Expands `all` and validates names, keeping first occurrences in order.
pub fn parse_schemes(names: &[String]) -> Result<Vec<SelectionScheme>, ConfigError> {
    let mut out = Vec::new();
    for name in names.iter().map(|n| n.trim()) {
        let expanded: Vec<SelectionScheme> = if name == "all" {
            SelectionScheme::ALL.to_vec()
        } else {
            vec![name.parse().map_err(|_| ConfigError::UnknownScheme {
                name: name.to_string(),
                valid: SelectionScheme::valid_names(),
            })?]
        };
        for s in expanded {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    if out.is_empty() {
        return Err(ConfigError::EmptyList("scheme"));
    }
    Ok(out)
}

pub fn parse_policies(names: &[String]) -> Result<Vec<SchedulingPolicy>, ConfigError> {
    let mut out = Vec::new();
    for name in names.iter().map(|n| n.trim()) {
        let expanded: Vec<SchedulingPolicy> = if name == "all" {
            SchedulingPolicy::ALL.to_vec()
        } else {
            vec![name.parse().map_err(|_| ConfigError::UnknownPolicy {
                name: name.to_string(),
                valid: SchedulingPolicy::ALL.map(|p| p.name()).join(", "),
            })?]
        };
        for p in expanded {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    if out.is_empty() {
        return Err(ConfigError::EmptyList("policy"));
    }
    Ok(out)
}

/// Parses `exp:mean=..,max=..`, `pareto:mean=..,min=..,max=..` or
/// `cdf:<path>`. Relative cdf paths are taken from `base` when given.
pub fn parse_distribution(spec: &str, base: Option<&Path>) -> Result<DistSpec, ConfigError> {
    let spec = spec.trim();
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| ConfigError::UnknownDistribution { name: spec.to_string() })?;
    let fail = |msg: String| ConfigError::BadDistribution { spec: spec.to_string(), msg };
    let distribution = match kind {
        "exp" | "pareto" => {
            let mut mean = None;
            let mut min = None;
            let mut max = None;
            for part in rest.split(',') {
                let (key, value) = part
                    .split_once('=')
                    .ok_or_else(|| fail(format!("expected key=value, got `{part}`")))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| fail(format!("`{value}` is not a number")))?;
                let slot = match (kind, key.trim()) {
                    (_, "mean") => &mut mean,
                    (_, "max") => &mut max,
                    ("pareto", "min") => &mut min,
                    (_, other) => return Err(fail(format!("unknown parameter `{other}`"))),
                };
                *slot = Some(value);
            }
            let mean = mean.ok_or_else(|| fail("missing mean".into()))?;
            let max = max.ok_or_else(|| fail("missing max".into()))?;
            let d = if kind == "exp" {
                DemandDistribution::exponential(mean, max)
            } else {
                let min = min.ok_or_else(|| fail("missing min".into()))?;
                DemandDistribution::pareto(mean, min, max)
            };
            d.map_err(|e| fail(e.to_string()))?
        }
        "cdf" => {
            let mut path = PathBuf::from(rest);
            if let Some(dir) = base {
                if path.is_relative() {
                    path = dir.join(path);
                }
            }
            load_empirical_cdf_file(&path).map_err(|e| fail(e.to_string()))?
        }
        _ => return Err(ConfigError::UnknownDistribution { name: spec.to_string() }),
    };
    Ok(DistSpec {
        label: spec.to_string(),
        distribution,
    })
}

/// Parses `a..b` (inclusive), a comma list, or a mix such as `1..3,9`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, ConfigError> {
    let fail = |msg: &str| bad("seeds", text.to_string(), msg);
    let number = |s: &str| s.trim().parse::<u64>().map_err(|_| fail("expected integers"));
    let mut seeds = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (number(a)?, number(b)?);
                if a > b {
                    return Err(fail("range start exceeds its end"));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(number(item)?),
        }
    }
    let mut seen = std::collections::HashSet::new();
    seeds.retain(|s| seen.insert(*s));
    if seeds.is_empty() {
        return Err(ConfigError::EmptyList("seed"));
    }
    Ok(seeds)
}

#[derive(Debug, Default)]
struct FileValues {
    base: Option<PathBuf>,
    entries: Vec<(String, String)>,
}

impl FileValues {
    /// Last assignment wins for scalar keys.
    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Repeated keys accumulate; each value may itself be a `sep` list.
    fn list(&self, key: &str, sep: char) -> Option<Vec<String>> {
        let values: Vec<String> = self
            .entries
            .iter()
            .filter(|(k, _)| k == key)
            .flat_map(|(_, v)| v.split(sep).map(|s| s.trim().to_string()))
            .filter(|s| !s.is_empty())
            .collect();
        (!values.is_empty()).then_some(values)
    }
}

fn read_config_file(path: &Path) -> Result<FileValues, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::FileIo {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| ConfigError::File {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(err(format!(
                "unknown key `{key}`; valid keys: {}",
                CONFIG_KEYS.join(", ")
            )));
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(FileValues {
        base: path.parent().map(Path::to_path_buf),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_grammar() {
        assert_eq!(parse_seeds("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("4,2,4").unwrap(), vec![4, 2]);
        assert_eq!(parse_seeds("1..2, 9").unwrap(), vec![1, 2, 9]);
        assert!(parse_seeds("3..1").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn distribution_grammar() {
        let d = parse_distribution("exp:mean=20,max=500", None).unwrap();
        assert_eq!(d.distribution, DemandDistribution::exponential(20.0, 500.0).unwrap());
        assert_eq!(d.label, "exp:mean=20,max=500");
        let p = parse_distribution("pareto:mean=20,min=2,max=500", None).unwrap();
        assert_eq!(p.distribution, DemandDistribution::pareto(20.0, 2.0, 500.0).unwrap());
        assert!(matches!(
            parse_distribution("weibull:k=2", None),
            Err(ConfigError::UnknownDistribution { .. })
        ));
        assert!(matches!(
            parse_distribution("exp:mean=20", None),
            Err(ConfigError::BadDistribution { .. })
        ));
        assert!(matches!(
            parse_distribution("exp:mean=20,min=1,max=5", None),
            Err(ConfigError::BadDistribution { .. })
        ));
        assert!(parse_distribution("pareto:mean=2,min=2,max=500", None).is_err());
    }

    #[test]
    fn names_expand_and_dedup() {
        let s = parse_schemes(&["minhop".into(), "all".into()]).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s[0], SelectionScheme::MinHop);
        let p = parse_policies(&["mmf".into(), "mmf".into()]).unwrap();
        assert_eq!(p, vec![SchedulingPolicy::Mmf]);
        let err = parse_policies(&["lifo".into()]).unwrap_err().to_string();
        assert!(err.contains("lifo") && err.contains("fcfs, srpt, mmf"), "{err}");
    }
}
