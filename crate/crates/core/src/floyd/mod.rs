//! The two determinant conditions on a finite sample.
//!
//! Condition 1: for every `n`-subset `B` of the sample, the `n x n` matrix
//! `[f_j(x_i)]` (rows `i in B`, member columns) is nonsingular. Condition 2:
//! for every `(n+1)`-subset `B`, the augmented matrix with the `f0` column
//! appended is nonsingular. Together they imply that the positivity sets of
//! `f0 - span(f1..fn)` form a maximum class of VC dimension `n` on the
//! sample. Condition 2 is the finite-sample surrogate for "`f0 - f` has at
//! most `n` zeros"; it is only asserted on the sample, never on all of `R^k`.
//!
//! Sample points are indexed from 0 and every witness is an increasing index
//! tuple.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{eval_row, FunctionBasis, Point, Row};
use crate::error::{Error, Result};
use crate::exactnum::{self, Matrix, Rational};

/// Default relative tolerance for the approximate determinant sign.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Exact,
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictQuality {
    Certified,
    ApproximateOnly,
}

#[derive(Debug, Clone, PartialEq)]
enum Values {
    Exact {
        rows: Matrix<Rational>,
        /// Each row scaled by a positive integer; minors keep their sign.
        integer_rows: Vec<Vec<BigInt>>,
    },
    Approximate(Matrix<f64>),
}

/// `N x (n+1)` matrix with row `i = (f1(xi), .., fn(xi), f0(xi))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    values: Values,
    points: Vec<Point>,
}

impl DesignMatrix {
    /// Sample size `N`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of basis members `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        match self.values {
            Values::Exact { .. } => Mode::Exact,
            Values::Approximate(_) => Mode::Approximate,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn exact_rows(&self) -> Option<&Matrix<Rational>> {
        match &self.values {
            Values::Exact { rows, .. } => Some(rows),
            Values::Approximate(_) => None,
        }
    }

    pub fn approximate_rows(&self) -> Option<&Matrix<f64>> {
        match &self.values {
            Values::Approximate(rows) => Some(rows),
            Values::Exact { .. } => None,
        }
    }

    /// Row `i` as exact rationals; float entries are taken at their exact value.
    pub fn rational_row(&self, i: usize) -> Vec<Rational> {
        match &self.values {
            Values::Exact { rows, .. } => rows.row(i).to_vec(),
            Values::Approximate(rows) => rows
                .row(i)
                .iter()
                .map(|&v| Rational::from_f64_exact(v).expect("design values are finite"))
                .collect(),
        }
    }

    /// Whether the minor on `rows` and the first `cols` columns is nonzero.
    fn minor_is_nonzero(&self, rows: &[usize], cols: usize, epsilon: f64) -> Result<bool> {
        match &self.values {
            Values::Exact { integer_rows, .. } => {
                let entries = rows
                    .iter()
                    .flat_map(|&i| integer_rows[i][..cols].iter().cloned())
                    .collect();
                Ok(!exactnum::bareiss_det(entries, cols).is_zero())
            }
            Values::Approximate(m) => {
                let col_idx: Vec<usize> = (0..cols).collect();
                Ok(!exactnum::det_sign_approx(&m.select(rows, &col_idx), epsilon)?.is_zero())
            }
        }
    }
}

/// Evaluates the basis at every sample point.
pub fn build_design_matrix(basis: &FunctionBasis, sample: &[Point]) -> Result<DesignMatrix> {
    if sample.is_empty() {
        return Err(Error::InsufficientSample("the sample is empty".into()));
    }
    let rows = sample.iter().map(|p| eval_row(basis, p)).collect::<Result<Vec<_>>>()?;
    let values = if basis.is_exact() {
        let rows: Vec<Vec<Rational>> = rows
            .into_iter()
            .map(|r| match r {
                Row::Exact(v) => v,
                Row::Approximate(_) => unreachable!("exact basis evaluates exactly"),
            })
            .collect();
        let integer_rows = rows.iter().map(|r| exactnum::primitive_row(r)).collect();
        Values::Exact {
            rows: Matrix::from_rows(rows)?,
            integer_rows,
        }
    } else {
        Values::Approximate(Matrix::from_rows(
            rows.into_iter()
                .map(|r| match r {
                    Row::Approximate(v) => v,
                    Row::Exact(v) => v.iter().map(Rational::to_f64).collect(),
                })
                .collect(),
        )?)
    };
    Ok(DesignMatrix {
        n: basis.n(),
        values,
        points: sample.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Gather every failing subset instead of stopping at the first.
    pub exhaustive: bool,
    /// Relative zero band for approximate determinants.
    pub epsilon: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            exhaustive: false,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionResult {
    pub holds: bool,
    /// Lexicographically least failing index tuple.
    pub failing_subset: Option<Vec<usize>>,
    /// Every failing tuple in lexicographic order; filled only in exhaustive mode.
    pub all_failing: Vec<Vec<usize>>,
    /// Subsets examined, including the failing one in fail-fast mode.
    pub checked_count: u64,
    pub verdict_quality: VerdictQuality,
}

fn check_minors(dm: &DesignMatrix, size: usize, cols: usize, opts: &CheckOptions) -> Result<ConditionResult> {
    let subsets: Vec<Vec<usize>> = (0..dm.len()).combinations(size).collect();
    let quality = match dm.mode() {
        Mode::Exact => VerdictQuality::Certified,
        Mode::Approximate => VerdictQuality::ApproximateOnly,
    };
    let fails = |b: &Vec<usize>| dm.minor_is_nonzero(b, cols, opts.epsilon).map(|nz| !nz);

    if opts.exhaustive {
        let flags = subsets.par_iter().map(fails).collect::<Result<Vec<bool>>>()?;
        let checked_count = subsets.len() as u64;
        let all_failing: Vec<Vec<usize>> = subsets
            .into_iter()
            .zip(flags)
            .filter_map(|(b, f)| f.then_some(b))
            .collect();
        return Ok(ConditionResult {
            holds: all_failing.is_empty(),
            failing_subset: all_failing.first().cloned(),
            all_failing,
            checked_count,
            verdict_quality: quality,
        });
    }

    // Errors count as "failing" for the search, then surface below.
    let first = subsets.par_iter().position_first(|b| fails(b).unwrap_or(true));
    match first {
        None => Ok(ConditionResult {
            holds: true,
            failing_subset: None,
            all_failing: Vec::new(),
            checked_count: subsets.len() as u64,
            verdict_quality: quality,
        }),
        Some(pos) => {
            fails(&subsets[pos])?;
            Ok(ConditionResult {
                holds: false,
                failing_subset: Some(subsets[pos].clone()),
                all_failing: Vec::new(),
                checked_count: pos as u64 + 1,
                verdict_quality: quality,
            })
        }
    }
}

/// Every `n x n` minor on the member columns is nonzero.
pub fn check_condition1(dm: &DesignMatrix, opts: &CheckOptions) -> Result<ConditionResult> {
    if dm.len() < dm.n() {
        return Err(Error::InsufficientSample(format!(
            "condition 1 needs at least n = {} points, got {}",
            dm.n(),
            dm.len()
        )));
    }
    check_minors(dm, dm.n(), dm.n(), opts)
}

/// Every `(n+1) x (n+1)` minor of the augmented matrix is nonzero.
pub fn check_condition2(dm: &DesignMatrix, opts: &CheckOptions) -> Result<ConditionResult> {
    if dm.len() < dm.n() + 1 {
        return Err(Error::InsufficientSample(format!(
            "condition 2 needs at least n + 1 = {} points, got {}",
            dm.n() + 1,
            dm.len()
        )));
    }
    check_minors(dm, dm.n() + 1, dm.n() + 1, opts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralPosition {
    pub mode: Mode,
    pub condition1: ConditionResult,
    pub condition2: ConditionResult,
}

impl GeneralPosition {
    pub fn holds(&self) -> bool {
        self.condition1.holds && self.condition2.holds
    }

    /// Both conditions hold and were decided in exact arithmetic.
    pub fn certified(&self) -> bool {
        self.holds() && self.mode == Mode::Exact
    }
}

pub fn verify_design(dm: &DesignMatrix, opts: &CheckOptions) -> Result<GeneralPosition> {
    Ok(GeneralPosition {
        mode: dm.mode(),
        condition1: check_condition1(dm, opts)?,
        condition2: check_condition2(dm, opts)?,
    })
}

/// Builds the design matrix and runs both conditions.
pub fn verify_general_position(
    basis: &FunctionBasis,
    sample: &[Point],
    opts: &CheckOptions,
) -> Result<GeneralPosition> {
    verify_design(&build_design_matrix(basis, sample)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{builtin_basis, parse_expression, Expr};
    use std::collections::BTreeMap;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn disks() -> FunctionBasis {
        builtin_basis("disks", &BTreeMap::new()).unwrap()
    }

    fn poly(d: u32) -> FunctionBasis {
        let params = [("d".to_string(), d.to_string())].into_iter().collect();
        builtin_basis("poly_threshold", &params).unwrap()
    }

    fn pts(coords: &[(i64, i64)]) -> Vec<Point> {
        coords.iter().map(|&(x, y)| Point::from_integers(&[x, y])).collect()
    }

    fn exhaustive() -> CheckOptions {
        CheckOptions {
            exhaustive: true,
            ..CheckOptions::default()
        }
    }

    #[test]
    fn design_rows() {
        let dm = build_design_matrix(&disks(), &pts(&[(0, 0), (1, 0), (0, 1)])).unwrap();
        assert_eq!(dm.mode(), Mode::Exact);
        let rows: Vec<Vec<Rational>> = (0..3).map(|i| dm.rational_row(i)).collect();
        let want = [["1", "0", "0", "0"], ["1", "1", "0", "-1"], ["1", "0", "1", "-1"]];
        for (r, w) in rows.iter().zip(want) {
            assert_eq!(r, &w.iter().map(|s| q(s)).collect::<Vec<_>>());
        }

        let dm = build_design_matrix(&poly(2), &pts(&[(2, 5)])).unwrap();
        assert_eq!(dm.rational_row(0), vec![q("1"), q("2"), q("4"), q("5")]);

        assert!(matches!(
            build_design_matrix(&disks(), &[]),
            Err(Error::InsufficientSample(_))
        ));
        assert!(matches!(
            build_design_matrix(&disks(), &[Point::from_integers(&[1])]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn condition1_examples() {
        let opts = CheckOptions::default();
        let dm = build_design_matrix(&disks(), &pts(&[(0, 0), (1, 0), (0, 1)])).unwrap();
        let det = exactnum::det_exact(&dm.exact_rows().unwrap().select(&[0, 1, 2], &[0, 1, 2])).unwrap();
        assert_eq!(det, Rational::one());
        let c1 = check_condition1(&dm, &opts).unwrap();
        assert!(c1.holds);
        assert_eq!(c1.checked_count, 1);
        assert_eq!(c1.verdict_quality, VerdictQuality::Certified);

        let dm = build_design_matrix(&disks(), &pts(&[(0, 0), (1, 1), (2, 2)])).unwrap();
        let c1 = check_condition1(&dm, &opts).unwrap();
        assert!(!c1.holds);
        assert_eq!(c1.failing_subset, Some(vec![0, 1, 2]));

        let dm = build_design_matrix(&poly(2), &pts(&[(-1, 3), (0, 1), (2, 2), (5, 0)])).unwrap();
        assert!(check_condition1(&dm, &opts).unwrap().holds);

        let dm = build_design_matrix(&disks(), &pts(&[(0, 0), (1, 1)])).unwrap();
        assert!(matches!(
            check_condition1(&dm, &opts),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn condition2_examples() {
        let opts = CheckOptions::default();
        let circle = pts(&[(1, 0), (0, 1), (-1, 0), (0, -1)]);
        let dm = build_design_matrix(&disks(), &circle).unwrap();
        let c2 = check_condition2(&dm, &opts).unwrap();
        assert!(!c2.holds);
        assert_eq!(c2.failing_subset, Some(vec![0, 1, 2, 3]));

        let mut generic = pts(&[(0, 0), (1, 0), (0, 1)]);
        generic.push(Point::from_fractions(&[(1, 3), (1, 7)]).unwrap());
        let dm = build_design_matrix(&disks(), &generic).unwrap();
        assert!(check_condition2(&dm, &opts).unwrap().holds);
        assert!(check_condition1(&dm, &opts).unwrap().holds);

        let dm = build_design_matrix(&disks(), &circle[..3]).unwrap();
        assert!(matches!(
            check_condition2(&dm, &opts),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn dependent_target_fails_everywhere() {
        // f0 = x + y lies in span(1, x, y): every augmented minor vanishes.
        let basis = FunctionBasis::new(
            2,
            parse_expression("x + y", 2).unwrap(),
            vec![Expr::constant(1), Expr::var(0), Expr::var(1)],
        )
        .unwrap();
        let sample = pts(&[(0, 0), (3, 1), (1, 5), (7, 2), (4, 4), (2, 9)]);
        let dm = build_design_matrix(&basis, &sample).unwrap();
        let c2 = check_condition2(&dm, &exhaustive()).unwrap();
        assert!(!c2.holds);
        assert_eq!(c2.all_failing.len(), 15);
        assert_eq!(c2.checked_count, 15);
    }

    #[test]
    fn exhaustive_lists_all_failures_in_order() {
        // Points 0, 1, 2 and 3 are collinear; 4 is off the line.
        let sample = pts(&[(0, 0), (1, 1), (2, 2), (3, 3), (0, 5)]);
        let dm = build_design_matrix(&disks(), &sample).unwrap();
        let c1 = check_condition1(&dm, &exhaustive()).unwrap();
        assert_eq!(
            c1.all_failing,
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
        assert_eq!(c1.failing_subset, Some(vec![0, 1, 2]));
        assert_eq!(c1.checked_count, 10);

        let fast = check_condition1(&dm, &CheckOptions::default()).unwrap();
        assert_eq!(fast.failing_subset, Some(vec![0, 1, 2]));
        assert_eq!(fast.checked_count, 1);
    }

    #[test]
    fn general_position_examples() {
        let opts = CheckOptions::default();
        let mut sample = pts(&[(0, 0), (4, 1), (1, 3)]);
        sample.extend(pts(&[(5, 5), (2, 2), (9, 1)]));
        let gp = verify_general_position(&disks(), &sample, &opts).unwrap();
        // (0,0), (5,5), (2,2) are collinear.
        assert!(!gp.condition1.holds);
        assert_eq!(gp.condition1.failing_subset, Some(vec![0, 3, 4]));
        assert!(!gp.certified());

        // Unit-circle points plus an interior point; no three collinear.
        let sample = pts(&[(5, 0), (0, 5), (-5, 0), (0, -5), (1, 2)]);
        let gp = verify_general_position(&disks(), &sample, &opts).unwrap();
        assert!(gp.condition1.holds);
        assert!(!gp.condition2.holds);
        assert_eq!(gp.condition2.failing_subset, Some(vec![0, 1, 2, 3]));
    }

    #[test]
    fn approximate_mode_never_certifies() {
        let params = [("N".to_string(), "1".to_string())].into_iter().collect();
        let trig = builtin_basis("trig", &params).unwrap();
        let sample: Vec<Point> = [(1, 3), (2, -1), (5, 2), (7, 1), (11, -2)]
            .iter()
            .map(|&(x, y)| Point::from_fractions(&[(x, 2), (y, 1)]).unwrap())
            .collect();
        let gp = verify_general_position(&trig, &sample, &CheckOptions::default()).unwrap();
        assert_eq!(gp.mode, Mode::Approximate);
        assert!(gp.holds());
        assert!(!gp.certified());
        assert_eq!(gp.condition1.verdict_quality, VerdictQuality::ApproximateOnly);
    }

    #[test]
    fn scaling_a_member_keeps_verdicts() {
        let scaled = FunctionBasis::new(
            2,
            parse_expression("-x^2 - y^2", 2).unwrap(),
            vec![
                parse_expression("3", 2).unwrap(),
                parse_expression("-2/5 * x", 2).unwrap(),
                Expr::var(1),
            ],
        )
        .unwrap();
        for sample in [
            pts(&[(0, 0), (1, 1), (2, 2), (0, 3)]),
            pts(&[(1, 0), (0, 1), (-1, 0), (0, -1)]),
            pts(&[(0, 0), (4, 1), (1, 3), (9, 2)]),
        ] {
            let a = verify_general_position(&disks(), &sample, &exhaustive()).unwrap();
            let b = verify_general_position(&scaled, &sample, &exhaustive()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn verdicts_survive_permutation_and_subsampling() {
        let sample = pts(&[(0, 0), (7, 1), (2, 9), (5, 4), (11, 3), (3, 13), (8, 8)]);
        let opts = CheckOptions::default();
        let base = verify_general_position(&disks(), &sample, &opts).unwrap();
        assert!(base.certified());

        let mut reversed = sample.clone();
        reversed.reverse();
        assert!(verify_general_position(&disks(), &reversed, &opts).unwrap().certified());

        for skip in 0..sample.len() {
            let sub: Vec<Point> = sample
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, p)| p.clone())
                .collect();
            assert!(verify_general_position(&disks(), &sub, &opts).unwrap().certified());
        }
    }

    #[test]
    fn conditions_are_independent() {
        // Condition 1 fails (a duplicated x-coordinate) while condition 2 holds
        // for poly_threshold d = 1: rows (1, x, y) with x repeated.
        let sample = pts(&[(0, 0), (0, 1), (1, 5)]);
        let dm = build_design_matrix(&poly(1), &sample).unwrap();
        let opts = CheckOptions::default();
        assert!(!check_condition1(&dm, &opts).unwrap().holds);
        assert!(check_condition2(&dm, &opts).unwrap().holds);

        // Condition 1 holds and condition 2 fails: three collinear points under
        // poly_threshold d = 1 lie on one graph y = a + b x.
        let sample = pts(&[(0, 1), (1, 3), (2, 5)]);
        let dm = build_design_matrix(&poly(1), &sample).unwrap();
        assert!(check_condition1(&dm, &opts).unwrap().holds);
        assert!(!check_condition2(&dm, &opts).unwrap().holds);
    }
}
