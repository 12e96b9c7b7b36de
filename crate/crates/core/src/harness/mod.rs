//! End-to-end pipeline: sampling, verification runs, demo scenarios and
//! repeated random trials.

mod points;
mod report;
mod sampling;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use points::{format_points, parse_points};
pub use report::{EnumerationSummary, OracleOutcome, VerificationReport};
pub use sampling::{
    sample_points, Distribution, DistributionKind, SamplingSpec, DEFAULT_PRECISION_BITS, MAX_PRECISION_BITS,
};

use crate::arrangement::{Arrangement, DEFAULT_BRUTE_FORCE_CAP};
use crate::basis::{builtin_basis, check_linear_independence, parse_expression, Expr, FunctionBasis, Point};
use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::floyd::{self, build_design_matrix, CheckOptions, Mode, VerdictQuality, DEFAULT_EPSILON};
use crate::setsystem::{is_maximum, sauer_bound, vc_dimension};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Collect every failing subset and sweep every restriction for the
    /// maximum check.
    pub exhaustive: bool,
    /// Cross-check enumeration against the brute-force oracle.
    pub oracle: bool,
    pub oracle_cap: usize,
    pub epsilon: f64,
    pub timing: bool,
    /// Provenance line for the report.
    pub source: String,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            exhaustive: false,
            oracle: false,
            oracle_cap: DEFAULT_BRUTE_FORCE_CAP,
            epsilon: DEFAULT_EPSILON,
            timing: false,
            source: "inline".into(),
        }
    }
}

/// Builds the design matrix, checks both determinant conditions, enumerates
/// cells and decides whether the restriction is maximum of VC dimension `n`.
/// Enumeration runs even when a condition fails.
pub fn run_verify(basis: &FunctionBasis, points: &[Point], options: &VerifyOptions) -> Result<VerificationReport> {
    let n = basis.n();
    if points.len() <= n {
        return Err(Error::InsufficientSample(format!(
            "the sample must have more points than basis members: N = {} but n = {n}",
            points.len()
        )));
    }
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |phase: &str, timings: &mut Vec<(String, f64)>| {
        if options.timing {
            timings.push((phase.to_string(), clock.elapsed().as_secs_f64() * 1e3));
        }
        clock = Instant::now();
    };

    let dm = build_design_matrix(basis, points)?;
    let sample_independent = check_linear_independence(basis, points)?;
    lap("design", &mut timings);
    let check = CheckOptions {
        exhaustive: options.exhaustive,
        epsilon: options.epsilon,
    };
    let condition1 = floyd::check_condition1(&dm, &check)?;
    lap("condition1", &mut timings);
    let condition2 = floyd::check_condition2(&dm, &check)?;
    lap("condition2", &mut timings);

    let arrangement = Arrangement::from_design(&dm, options.epsilon)?;
    let (enumeration, enumeration_skipped, system) = match arrangement.enumerate_cells() {
        Ok(cells) => {
            lap("enumeration", &mut timings);
            let summary = EnumerationSummary {
                cells: cells.system.len(),
                vc_dimension: vc_dimension(&cells.system),
                maximum: is_maximum(&cells.system, n, options.exhaustive),
                certified: cells.certified,
                lp_count: cells.lp_count,
                indeterminate_lps: cells.indeterminate_lps,
                degenerate_points: cells.degenerate_points.clone(),
            };
            lap("vc", &mut timings);
            (Some(summary), None, Some(cells.system))
        }
        Err(Error::Refused(why)) => (None, Some(why), None),
        Err(e) => return Err(e),
    };

    let oracle = match (&system, options.oracle) {
        (Some(system), true) => {
            let outcome = match arrangement.brute_force_cells(options.oracle_cap) {
                Ok(brute) if &brute.system == system => OracleOutcome::Agrees,
                Ok(_) => OracleOutcome::Disagrees,
                Err(Error::Refused(_)) => {
                    OracleOutcome::Skipped(format!("N = {} exceeds {}", points.len(), options.oracle_cap))
                }
                Err(e) => return Err(e),
            };
            lap("oracle", &mut timings);
            Some(outcome)
        }
        (None, true) => Some(OracleOutcome::Skipped("no enumeration".into())),
        (_, false) => None,
    };

    let certified = dm.mode() == Mode::Exact && enumeration.as_ref().is_some_and(|e| e.certified);
    Ok(VerificationReport {
        basis: basis.name().to_string(),
        target: basis.target().to_string(),
        members: basis.members().iter().map(Expr::to_string).collect(),
        dimension: basis.dim(),
        sample_source: options.source.clone(),
        sample_size: points.len(),
        mode: dm.mode(),
        sample_independent,
        condition1,
        condition2,
        sauer_bound: sauer_bound(points.len(), n),
        enumeration,
        enumeration_skipped,
        oracle,
        quality: if certified {
            VerdictQuality::Certified
        } else {
            VerdictQuality::ApproximateOnly
        },
        timings,
        system,
    })
}

pub const DEMOS: [&str; 4] = ["disks", "poly_threshold", "trig", "halfspace_violation"];

fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// `f0 = x + y` over members `1, x, y`: the target lies in the span.
pub fn halfspace_violation_basis() -> FunctionBasis {
    FunctionBasis::new(
        2,
        parse_expression("x + y", 2).expect("fixed expression"),
        vec![Expr::constant(1), Expr::var(0), Expr::var(1)],
    )
    .expect("fixed basis")
    .with_name("halfspace_violation")
}

/// The fixed basis and sampling scenario behind each demo.
pub fn demo_scenario(name: &str) -> Result<(FunctionBasis, SamplingSpec)> {
    let unit = DistributionKind::unit_box();
    match name {
        "disks" => Ok((
            builtin_basis("disks", &params(&[("k", "2")]))?,
            SamplingSpec::new(&unit, 10, 2, 42),
        )),
        "poly_threshold" => Ok((
            builtin_basis("poly_threshold", &params(&[("d", "3")]))?,
            SamplingSpec::new(&unit, 9, 2, 42),
        )),
        "trig" => {
            let spec = SamplingSpec {
                distribution: Distribution::UniformBox(vec![
                    (Rational::zero(), Rational::from_integer(6)),
                    (Rational::from_integer(-2), Rational::from_integer(2)),
                ]),
                n: 12,
                k: 2,
                seed: 42,
                precision_bits: DEFAULT_PRECISION_BITS,
            };
            Ok((builtin_basis("trig", &params(&[("N", "1")]))?, spec))
        }
        "halfspace_violation" => Ok((halfspace_violation_basis(), SamplingSpec::new(&unit, 8, 2, 42))),
        other => Err(Error::UnknownDemo(other.to_string())),
    }
}

pub fn run_demo(name: &str, options: &VerifyOptions) -> Result<VerificationReport> {
    let (basis, spec) = demo_scenario(name)?;
    let points = sample_points(&spec)?;
    let options = VerifyOptions {
        source: format!("demo {name}: {}", spec.describe()),
        ..options.clone()
    };
    run_verify(&basis, &points, &options)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub cells: Option<usize>,
    pub maximum: bool,
    pub condition1: bool,
    pub condition2: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub basis: String,
    pub sampling: String,
    pub precision_bits: u32,
    pub trials: usize,
    pub maximum_count: usize,
    pub sauer_bound: u128,
    /// One entry per trial, in seed order.
    pub outcomes: Vec<TrialOutcome>,
}

impl TrialSummary {
    pub fn fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.maximum_count as f64 / self.trials as f64
        }
    }

    pub fn failing_seeds(&self) -> Vec<u64> {
        self.outcomes.iter().filter(|o| !o.maximum).map(|o| o.seed).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "basis: {}", self.basis);
        let _ = writeln!(out, "sampling: {}", self.sampling);
        let _ = writeln!(out, "precision_bits: {}", self.precision_bits);
        let _ = writeln!(out, "trials: {}", self.trials);
        let _ = writeln!(out, "maximum: {}", self.maximum_count);
        let _ = writeln!(out, "fraction: {:.6}", self.fraction());
        let _ = writeln!(out, "sauer_bound: {}", self.sauer_bound);
        let failing: Vec<String> = self.failing_seeds().iter().map(u64::to_string).collect();
        let failing = if failing.is_empty() {
            "none".to_string()
        } else {
            failing.join(",")
        };
        let _ = writeln!(out, "failing_seeds: {failing}");
        for o in self.outcomes.iter().filter(|o| !o.maximum) {
            let cells = o.cells.map_or("skipped".to_string(), |c| c.to_string());
            let _ = writeln!(
                out,
                "failure: seed={} cells={cells} condition1={} condition2={}",
                o.seed, o.condition1, o.condition2
            );
        }
        out
    }
}

/// Runs `trials` independent verifications with seeds `spec.seed`,
/// `spec.seed + 1`, ... (wrapping). Trials run in parallel; the summary is
/// in seed order.
pub fn run_trials(basis: &FunctionBasis, spec: &SamplingSpec, trials: usize) -> Result<TrialSummary> {
    if !basis.is_exact() {
        return Err(Error::InvalidInput(format!(
            "random trials need an exact polynomial basis; `{}` uses transcendental functions",
            basis.name()
        )));
    }
    if spec.k != basis.dim() {
        return Err(Error::Dimension(format!(
            "sampling dimension {} differs from basis dimension {}",
            spec.k,
            basis.dim()
        )));
    }
    spec.validate()?;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = spec.seed.wrapping_add(i);
            let points = sample_points(&spec.clone().with_seed(seed))?;
            let report = run_verify(basis, &points, &VerifyOptions::default())?;
            Ok(TrialOutcome {
                seed,
                cells: report.enumeration.as_ref().map(|e| e.cells),
                maximum: report.maximum() == Some(true),
                condition1: report.condition1.holds,
                condition2: report.condition2.holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSummary {
        basis: basis.name().to_string(),
        sampling: spec.describe(),
        precision_bits: spec.precision_bits,
        trials,
        maximum_count: outcomes.iter().filter(|o| o.maximum).count(),
        sauer_bound: sauer_bound(spec.n, basis.n()),
        outcomes,
    })
}
