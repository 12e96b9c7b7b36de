//! Verification reports: a `key: value` text block and a JSON rendering.

use std::fmt::Write as _;

use serde::Serialize;

use crate::floyd::{ConditionResult, Mode, VerdictQuality};
use crate::setsystem::{MaximumCriterion, MaximumVerdict, SetSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleOutcome {
    Agrees,
    Disagrees,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerationSummary {
    pub cells: usize,
    pub vc_dimension: i64,
    pub maximum: MaximumVerdict,
    pub certified: bool,
    pub lp_count: usize,
    pub indeterminate_lps: usize,
    pub degenerate_points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub basis: String,
    pub target: String,
    pub members: Vec<String>,
    /// Ambient dimension `k`.
    pub dimension: usize,
    pub sample_source: String,
    pub sample_size: usize,
    pub mode: Mode,
    /// `f0, f1..fn` evaluated on the sample have full column rank `n + 1`.
    pub sample_independent: bool,
    pub condition1: ConditionResult,
    pub condition2: ConditionResult,
    pub sauer_bound: u128,
    /// Absent when enumeration was refused; then there is no maximum verdict.
    pub enumeration: Option<EnumerationSummary>,
    pub enumeration_skipped: Option<String>,
    pub oracle: Option<OracleOutcome>,
    pub quality: VerdictQuality,
    /// Milliseconds per phase; empty unless timing was requested, so that
    /// reports stay byte-identical across runs.
    pub timings: Vec<(String, f64)>,
    #[serde(skip)]
    pub system: Option<SetSystem>,
}

fn indices(v: &[usize]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
    }
}

fn write_condition(out: &mut String, key: &str, c: &ConditionResult) {
    let state = if c.holds { "holds" } else { "fails" };
    let _ = writeln!(out, "{key}: {state}");
    let _ = writeln!(out, "{key}_checked: {}", c.checked_count);
    let witness = c.failing_subset.as_deref().map_or("none".into(), indices);
    let _ = writeln!(out, "{key}_witness: {witness}");
    if !c.all_failing.is_empty() {
        let _ = writeln!(out, "{key}_failures: {}", c.all_failing.len());
    }
}

impl VerificationReport {
    pub fn maximum(&self) -> Option<bool> {
        self.enumeration.as_ref().map(|e| e.maximum.is_maximum)
    }

    /// 0 verified maximum, 1 verified non-maximum, 2 approximate or
    /// undecided, 3 the brute-force cross-check disagreed.
    pub fn exit_code(&self) -> u8 {
        if self.oracle == Some(OracleOutcome::Disagrees) {
            return 3;
        }
        match (self.maximum(), self.quality) {
            (Some(true), VerdictQuality::Certified) => 0,
            (Some(false), VerdictQuality::Certified) => 1,
            _ => 2,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "basis: {}", self.basis);
        let _ = writeln!(out, "target: {}", self.target);
        let _ = writeln!(out, "members: {}", self.members.join("; "));
        let _ = writeln!(out, "dimension: {}", self.dimension);
        let _ = writeln!(out, "n: {}", self.members.len());
        let _ = writeln!(out, "sample: {}", self.sample_source);
        let _ = writeln!(out, "sample_size: {}", self.sample_size);
        let mode = match self.mode {
            Mode::Exact => "exact",
            Mode::Approximate => "approximate",
        };
        let _ = writeln!(out, "mode: {mode}");
        let independence = if self.sample_independent { "holds" } else { "fails" };
        let _ = writeln!(out, "independence: {independence} (rank of the sample values)");
        write_condition(&mut out, "condition1", &self.condition1);
        write_condition(&mut out, "condition2", &self.condition2);
        let _ = writeln!(
            out,
            "condition2_scope: augmented minors on this sample only; zeros of f0 - f elsewhere are not examined"
        );
        let _ = writeln!(out, "sauer_bound: {}", self.sauer_bound);
        match (&self.enumeration, &self.enumeration_skipped) {
            (Some(e), _) => {
                let _ = writeln!(out, "cells: {}", e.cells);
                let _ = writeln!(out, "vc_dimension: {}", e.vc_dimension);
                let _ = writeln!(out, "maximum: {}", e.maximum.is_maximum);
                let criterion = match e.maximum.criterion {
                    MaximumCriterion::FullSet => "full_set",
                    MaximumCriterion::AllSubsets => "all_subsets",
                };
                let _ = writeln!(out, "maximum_criterion: {criterion}");
                if let (Some(s), Some(c)) = (&e.maximum.failing_subset, e.maximum.failing_count) {
                    let _ = writeln!(out, "maximum_failing_subset: {} (count {c})", indices(s));
                }
                let _ = writeln!(out, "degenerate_points: {}", indices(&e.degenerate_points));
                let _ = writeln!(out, "lp_solves: {}", e.lp_count);
                let _ = writeln!(out, "indeterminate_lps: {}", e.indeterminate_lps);
            }
            (None, reason) => {
                let _ = writeln!(out, "cells: skipped ({})", reason.as_deref().unwrap_or("not run"));
            }
        }
        if let Some(o) = &self.oracle {
            let o = match o {
                OracleOutcome::Agrees => "agrees".to_string(),
                OracleOutcome::Disagrees => "disagrees".to_string(),
                OracleOutcome::Skipped(why) => format!("skipped ({why})"),
            };
            let _ = writeln!(out, "oracle: {o}");
        }
        let quality = match self.quality {
            VerdictQuality::Certified => "certified",
            VerdictQuality::ApproximateOnly => "approximate_only",
        };
        let _ = writeln!(out, "verdict: {quality}");
        for (phase, ms) in &self.timings {
            let _ = writeln!(out, "time_{phase}_ms: {ms:.3}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
