//! Seeded sampling on a dyadic grid.
//!
//! The generator is `ChaCha8Rng::seed_from_u64(seed)`. Points are drawn in
//! order, coordinates in order within a point. Every coordinate is an exact
//! rational with denominator dividing `2^precision_bits`:
//!
//! * uniform: an integer `m` uniform in `[0, 2^bits)`, mapped to
//!   `low + (high - low) * m / 2^bits`;
//! * Gaussian: a `Normal(mean, sigma)` draw rounded to the nearest multiple
//!   of `2^-bits`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use crate::basis::Point;
use crate::error::{Error, Result};
use crate::exactnum::Rational;

pub const DEFAULT_PRECISION_BITS: u32 = 53;
pub const MAX_PRECISION_BITS: u32 = 62;

#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// `(low, high)` per coordinate.
    UniformBox(Vec<(Rational, Rational)>),
    /// `(mean, sigma)` per coordinate.
    Gaussian(Vec<(f64, f64)>),
}

/// Coordinate-independent description, as accepted on the command line:
/// `uniform`, `uniform:LOW,HIGH`, `gaussian`, `gaussian:MEAN,SIGMA`.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind {
    Uniform { low: Rational, high: Rational },
    Gaussian { mean: f64, sigma: f64 },
}

impl DistributionKind {
    pub fn unit_box() -> Self {
        DistributionKind::Uniform {
            low: Rational::zero(),
            high: Rational::one(),
        }
    }

    /// The same law on every one of `k` coordinates.
    pub fn repeat(&self, k: usize) -> Distribution {
        match self {
            DistributionKind::Uniform { low, high } => Distribution::UniformBox(vec![(low.clone(), high.clone()); k]),
            DistributionKind::Gaussian { mean, sigma } => Distribution::Gaussian(vec![(*mean, *sigma); k]),
        }
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let pair = |a: &str| -> Result<(String, String)> {
            let (x, y) = a
                .split_once(',')
                .ok_or_else(|| Error::InvalidParam(format!("expected two comma-separated values in `{a}`")))?;
            Ok((x.trim().to_string(), y.trim().to_string()))
        };
        match (name, args) {
            ("uniform", None) => Ok(DistributionKind::unit_box()),
            ("uniform", Some(a)) => {
                let (lo, hi) = pair(a)?;
                Ok(DistributionKind::Uniform {
                    low: lo.parse()?,
                    high: hi.parse()?,
                })
            }
            ("gaussian", None) => Ok(DistributionKind::Gaussian { mean: 0.0, sigma: 1.0 }),
            ("gaussian", Some(a)) => {
                let (m, sd) = pair(a)?;
                let num = |v: &str| {
                    v.parse::<f64>()
                        .map_err(|_| Error::InvalidParam(format!("`{v}` is not a number")))
                };
                Ok(DistributionKind::Gaussian {
                    mean: num(&m)?,
                    sigma: num(&sd)?,
                })
            }
            _ => Err(Error::InvalidParam(format!("unknown distribution `{s}`"))),
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionKind::Uniform { low, high } => write!(f, "uniform:{low},{high}"),
            DistributionKind::Gaussian { mean, sigma } => write!(f, "gaussian:{mean},{sigma}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSpec {
    pub distribution: Distribution,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub precision_bits: u32,
}

impl SamplingSpec {
    pub fn new(kind: &DistributionKind, n: usize, k: usize, seed: u64) -> Self {
        SamplingSpec {
            distribution: kind.repeat(k),
            n,
            k,
            seed,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }

    pub fn with_precision_bits(mut self, bits: u32) -> Self {
        self.precision_bits = bits;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::InvalidParam("sample size and dimension must be positive".into()));
        }
        if !(1..=MAX_PRECISION_BITS).contains(&self.precision_bits) {
            return Err(Error::InvalidParam(format!(
                "precision bits must lie in 1..={MAX_PRECISION_BITS}, got {}",
                self.precision_bits
            )));
        }
        match &self.distribution {
            Distribution::UniformBox(bounds) => {
                if bounds.len() != self.k {
                    return Err(Error::Dimension(format!(
                        "{} bounds for dimension {}",
                        bounds.len(),
                        self.k
                    )));
                }
                if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| lo >= hi) {
                    return Err(Error::InvalidParam(format!("empty box side [{lo}, {hi}]")));
                }
            }
            Distribution::Gaussian(params) => {
                if params.len() != self.k {
                    return Err(Error::Dimension(format!(
                        "{} parameters for dimension {}",
                        params.len(),
                        self.k
                    )));
                }
                if let Some((m, s)) = params
                    .iter()
                    .find(|(m, s)| !(m.is_finite() && s.is_finite() && *s > 0.0))
                {
                    return Err(Error::InvalidParam(format!(
                        "bad Gaussian parameters mean {m}, sigma {s}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One-line description used in reports.
    pub fn describe(&self) -> String {
        let dist = match &self.distribution {
            Distribution::UniformBox(b) => {
                let sides: Vec<String> = b.iter().map(|(lo, hi)| format!("[{lo},{hi}]")).collect();
                format!("uniform {}", sides.join("x"))
            }
            Distribution::Gaussian(p) => {
                let parts: Vec<String> = p.iter().map(|(m, s)| format!("N({m},{s})")).collect();
                format!("gaussian {}", parts.join("x"))
            }
        };
        format!("seed={} N={} {} bits={}", self.seed, self.n, dist, self.precision_bits)
    }
}

/// Deterministic in `spec`; see the module docs for the exact algorithm.
pub fn sample_points(spec: &SamplingSpec) -> Result<Vec<Point>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bits = spec.precision_bits;
    let grid = BigInt::from(1u64) << bits;
    let mut points = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let coords = match &spec.distribution {
            Distribution::UniformBox(bounds) => bounds
                .iter()
                .map(|(lo, hi)| {
                    let m: u64 = rng.random_range(0..1u64 << bits);
                    let frac = Rational::new(BigInt::from(m), grid.clone()).expect("grid is nonzero");
                    lo + &((hi - lo) * frac)
                })
                .collect(),
            Distribution::Gaussian(params) => params
                .iter()
                .map(|&(mean, sigma)| {
                    let normal = Normal::new(mean, sigma).expect("validated parameters");
                    let v: f64 = normal.sample(&mut rng);
                    let scaled = (v * (1u64 << bits) as f64).round();
                    let numer = Rational::from_f64_exact(scaled).expect("finite draw");
                    numer * Rational::new(BigInt::from(1), grid.clone()).expect("grid is nonzero")
                })
                .collect(),
        };
        points.push(Point::new(coords));
    }
    Ok(points)
}
