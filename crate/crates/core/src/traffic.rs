//! Flow arrivals and demand distributions.
//!
//! All randomness comes from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`)
//! seeded with `SeedableRng::seed_from_u64`. Uniform variates and every
//! transform on top of them are implemented here rather than borrowed from a
//! distribution crate, so a seed maps to the same workload regardless of
//! upstream sampling changes:
//!
//! * uniform `u ∈ [0, 1)`: top 53 bits of `next_u64()` scaled by 2⁻⁵³
//! * uniform node: `floor(u · n)`
//! * exponential with mean `m`: `-m · ln(1 − u)`
//! * Pareto with scale `x_m`, shape `α`: `x_m · (1 − u)^(−1/α)`
//!
//! Per flow the draws happen in the order gap, source, destination
//! (repeated until distinct), demand (repeated until inside the support).

use std::fmt;
use std::io::BufRead;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::topology::{NodeId, Topology};

pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in `[0, 1)` with 53 bits of precision.
pub fn uniform01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exponential variate with the given mean.
pub fn exponential(rng: &mut impl RngCore, mean: f64) -> f64 {
    -mean * (1.0 - uniform01(rng)).ln()
}

#[derive(Debug, Error, PartialEq)]
pub enum TrafficError {
    #[error("mean must be positive and finite, got {0}")]
    BadMean(f64),
    #[error("need 0 <= min_demand < max_demand, got min {min} max {max}")]
    BadBounds { min: f64, max: f64 },
    #[error("pareto mean {mean} must exceed its minimum {min} for the shape to be defined")]
    ParetoShapeUndefined { mean: f64, min: f64 },
    #[error("empirical distribution has no points")]
    EmptyCdf,
    #[error("cdf line {line}: {msg}")]
    CdfParse { line: usize, msg: String },
    #[error("cdf point {index}: points must be strictly increasing in value and probability")]
    NonMonotone { index: usize },
    #[error("cdf point {index}: value must be positive and probability in [0, 1]")]
    CdfOutOfRange { index: usize },
    #[error("cdf must end at cumulative probability 1, got {0}")]
    CdfNotNormalized(f64),
    #[error("arrival rate must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("flow count must be at least 1")]
    NoFlows,
    #[error("workload needs at least 2 nodes, topology has {0}")]
    TooFewNodes(usize),
    #[error("io error: {0}")]
    Io(String),
}

/// One `(value, cumulative probability)` knot of a piecewise-linear CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub value: f64,
    pub cumulative: f64,
}

/// Flow-size distribution. Samples above the cap are rejected and redrawn.
#[derive(Debug, Clone, PartialEq)]
pub enum DemandDistribution {
    /// Exponential with the given mean, truncated to `(0, max_demand]`.
    Exponential { mean: f64, max_demand: f64 },
    /// Pareto with scale `min_demand` and shape `mean / (mean - min_demand)`,
    /// truncated to `[min_demand, max_demand]`.
    Pareto {
        mean: f64,
        min_demand: f64,
        max_demand: f64,
    },
    /// Inverse-transform sampling of a piecewise-linear CDF. The first point
    /// carries an atom of mass equal to its cumulative probability.
    Empirical { points: Vec<CdfPoint> },
}

impl DemandDistribution {
    pub fn exponential(mean: f64, max_demand: f64) -> Result<Self, TrafficError> {
        let d = DemandDistribution::Exponential { mean, max_demand };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(mean: f64, min_demand: f64, max_demand: f64) -> Result<Self, TrafficError> {
        let d = DemandDistribution::Pareto {
            mean,
            min_demand,
            max_demand,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn empirical(points: Vec<CdfPoint>) -> Result<Self, TrafficError> {
        let d = DemandDistribution::Empirical { points };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        match *self {
            DemandDistribution::Exponential { mean, max_demand } => {
                check_mean(mean)?;
                check_bounds(0.0, max_demand)
            }
            DemandDistribution::Pareto {
                mean,
                min_demand,
                max_demand,
            } => {
                check_mean(mean)?;
                check_bounds(min_demand, max_demand)?;
                if mean <= min_demand {
                    return Err(TrafficError::ParetoShapeUndefined {
                        mean,
                        min: min_demand,
                    });
                }
                Ok(())
            }
            DemandDistribution::Empirical { ref points } => validate_cdf(points),
        }
    }

    /// Pareto shape `α` solving `α·x_m / (α − 1) = mean`.
    pub fn pareto_shape(mean: f64, min_demand: f64) -> f64 {
        mean / (mean - min_demand)
    }

    pub fn min_demand(&self) -> f64 {
        match *self {
            DemandDistribution::Exponential { .. } => 0.0,
            DemandDistribution::Pareto { min_demand, .. } => min_demand,
            DemandDistribution::Empirical { ref points } => points[0].value,
        }
    }

    pub fn max_demand(&self) -> f64 {
        match *self {
            DemandDistribution::Exponential { max_demand, .. }
            | DemandDistribution::Pareto { max_demand, .. } => max_demand,
            DemandDistribution::Empirical { ref points } => points[points.len() - 1].value,
        }
    }

    /// Draws one demand inside the distribution's support.
    pub fn sample(&self, rng: &mut impl RngCore) -> f64 {
        match *self {
            DemandDistribution::Exponential { mean, max_demand } => loop {
                let x = exponential(rng, mean);
                if x > 0.0 && x <= max_demand {
                    return x;
                }
            },
            DemandDistribution::Pareto {
                mean,
                min_demand,
                max_demand,
            } => {
                let shape = Self::pareto_shape(mean, min_demand);
                loop {
                    let u = uniform01(rng);
                    let x = min_demand * (1.0 - u).powf(-1.0 / shape);
                    if x > 0.0 && x <= max_demand {
                        return x;
                    }
                }
            }
            DemandDistribution::Empirical { ref points } => {
                let u = uniform01(rng);
                empirical_quantile(points, u)
            }
        }
    }
}

impl fmt::Display for DemandDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemandDistribution::Exponential { mean, max_demand } => {
                write!(f, "exp:mean={mean},max={max_demand}")
            }
            DemandDistribution::Pareto {
                mean,
                min_demand,
                max_demand,
            } => write!(f, "pareto:mean={mean},min={min_demand},max={max_demand}"),
            DemandDistribution::Empirical { points } => write!(f, "cdf[{} points]", points.len()),
        }
    }
}

/// Inverse of a piecewise-linear CDF with an atom at the first knot.
fn empirical_quantile(points: &[CdfPoint], u: f64) -> f64 {
    if u <= points[0].cumulative {
        return points[0].value;
    }
    // First knot whose cumulative probability reaches u.
    let hi = points.partition_point(|p| p.cumulative < u);
    let hi = hi.min(points.len() - 1);
    let (a, b) = (points[hi - 1], points[hi]);
    let t = (u - a.cumulative) / (b.cumulative - a.cumulative);
    a.value + t * (b.value - a.value)
}

fn check_mean(mean: f64) -> Result<(), TrafficError> {
    if mean > 0.0 && mean.is_finite() {
        Ok(())
    } else {
        Err(TrafficError::BadMean(mean))
    }
}

fn check_bounds(min: f64, max: f64) -> Result<(), TrafficError> {
    if min >= 0.0 && min < max && max.is_finite() {
        Ok(())
    } else {
        Err(TrafficError::BadBounds { min, max })
    }
}

const CDF_NORMALIZATION_TOL: f64 = 1e-9;

fn validate_cdf(points: &[CdfPoint]) -> Result<(), TrafficError> {
    if points.is_empty() {
        return Err(TrafficError::EmptyCdf);
    }
    for (index, p) in points.iter().enumerate() {
        if !(p.value > 0.0 && p.value.is_finite() && (0.0..=1.0).contains(&p.cumulative)) {
            return Err(TrafficError::CdfOutOfRange { index });
        }
        if index > 0 {
            let prev = points[index - 1];
            if !(p.value > prev.value && p.cumulative > prev.cumulative) {
                return Err(TrafficError::NonMonotone { index });
            }
        }
    }
    let last = points[points.len() - 1].cumulative;
    if (last - 1.0).abs() > CDF_NORMALIZATION_TOL {
        return Err(TrafficError::CdfNotNormalized(last));
    }
    Ok(())
}

/// Parses an empirical CDF file: one `<value> <cumulative_probability>` per
/// line, `#` comments and blank lines ignored.
pub fn load_empirical_cdf<R: BufRead>(source: R) -> Result<DemandDistribution, TrafficError> {
    let mut points = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| TrafficError::Io(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| TrafficError::CdfParse { line: lineno, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected `<value> <probability>`, got `{line}`")));
        }
        let value = fields[0]
            .parse::<f64>()
            .map_err(|e| err(format!("bad value `{}`: {e}", fields[0])))?;
        let cumulative = fields[1]
            .parse::<f64>()
            .map_err(|e| err(format!("bad probability `{}`: {e}", fields[1])))?;
        points.push(CdfPoint { value, cumulative });
    }
    DemandDistribution::empirical(points)
}

pub fn load_empirical_cdf_file(
    path: impl AsRef<std::path::Path>,
) -> Result<DemandDistribution, TrafficError> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| TrafficError::Io(format!("{}: {e}", path.as_ref().display())))?;
    load_empirical_cdf(std::io::BufReader::new(file))
}

/// Poisson arrival process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProcess {
    rate: f64,
}

impl ArrivalProcess {
    pub fn new(rate: f64) -> Result<Self, TrafficError> {
        if rate > 0.0 && rate.is_finite() {
            Ok(Self { rate })
        } else {
            Err(TrafficError::BadRate(rate))
        }
    }

    /// Flows per unit time.
    pub fn rate(&self) -> f64 {
        self.rate
    }
}

pub type FlowId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArrival {
    pub flow_id: FlowId,
    pub arrival_time: f64,
    pub source: NodeId,
    pub destination: NodeId,
    pub demand: f64,
}

/// Chooses the endpoints of each new flow.
pub trait PairSelector {
    fn select(&mut self, node_count: usize, rng: &mut Rng) -> (NodeId, NodeId);
}

/// Source and destination uniform over ordered pairs of distinct nodes.
#[derive(Debug, Default, Clone, Copy)]
pub struct UniformPairs;

impl PairSelector for UniformPairs {
    fn select(&mut self, node_count: usize, rng: &mut Rng) -> (NodeId, NodeId) {
        let pick = |rng: &mut Rng| ((uniform01(rng) * node_count as f64) as usize).min(node_count - 1);
        let src = pick(rng);
        loop {
            let dst = pick(rng);
            if dst != src {
                return (NodeId(src), NodeId(dst));
            }
        }
    }
}

/// Generates `flow_count` Poisson arrivals with uniform endpoint pairs.
pub fn generate_workload(
    topology: &Topology,
    process: ArrivalProcess,
    dist: &DemandDistribution,
    flow_count: usize,
    seed: u64,
) -> Result<Vec<FlowArrival>, TrafficError> {
    generate_workload_with(topology, process, dist, flow_count, seed, &mut UniformPairs)
}

pub fn generate_workload_with(
    topology: &Topology,
    process: ArrivalProcess,
    dist: &DemandDistribution,
    flow_count: usize,
    seed: u64,
    pairs: &mut impl PairSelector,
) -> Result<Vec<FlowArrival>, TrafficError> {
    if flow_count == 0 {
        return Err(TrafficError::NoFlows);
    }
    let n = topology.node_count();
    if n < 2 {
        return Err(TrafficError::TooFewNodes(n));
    }
    dist.validate()?;
    let mut rng = seeded_rng(seed);
    let mean_gap = 1.0 / process.rate();
    let mut clock = 0.0;
    let mut out = Vec::with_capacity(flow_count);
    for flow_id in 0..flow_count {
        clock += exponential(&mut rng, mean_gap);
        let (source, destination) = pairs.select(n, &mut rng);
        let demand = dist.sample(&mut rng);
        out.push(FlowArrival {
            flow_id,
            arrival_time: clock,
            source,
            destination,
            demand,
        });
    }
    Ok(out)
}
