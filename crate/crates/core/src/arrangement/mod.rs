//! Dual hyperplane arrangement and its cells.
//!
//! A sample point `x_i` gives the hyperplane `<w_i, a> = b_i` in parameter
//! space, with `w_i = (f1(x_i), .., fn(x_i))` and `b_i = f0(x_i)`. The point
//! lies in the positivity set of `f0 - sum a_j f_j` iff `<w_i, a> < b_i`, so
//! the distinct subsets cut out by the class are exactly the sign vectors of
//! the open cells of the arrangement.
//!
//! Cells are found by inserting hyperplanes one at a time. Each cell carries a
//! witness parameter; when a new hyperplane arrives the witness already
//! decides one side and a strict-feasibility LP decides the other.
//!
//! A point whose row is identically zero (`w_i = 0`, `b_i = 0`) is never in a
//! positivity set. It is listed in [`CellEnumeration::degenerate_points`] and
//! its bit is always clear.

mod lp;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{self, Rational, SignClass};
use crate::floyd::{DesignMatrix, Mode, DEFAULT_EPSILON};
use crate::setsystem::{SetSystem, MAX_GROUND};

pub use lp::Side;
use lp::{maximize_margin, IntRow};

/// Largest parameter dimension accepted by [`enumerate_cells`].
pub const MAX_PARAMETER_DIM: usize = 8;

/// Largest sample handled by [`brute_force_cells`] unless raised explicitly.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualHyperplane {
    pub normal: Vec<Rational>,
    pub offset: Rational,
    /// Index of the sample point this hyperplane comes from.
    pub source_index: usize,
}

impl DualHyperplane {
    /// `b - <w, a>`: positive exactly on the [`Side::Inside`] half-space.
    pub fn slack(&self, a: &[Rational]) -> Rational {
        let dot: Rational = self.normal.iter().zip(a).map(|(w, x)| w * x).sum();
        &self.offset - &dot
    }

    pub fn is_degenerate(&self) -> bool {
        self.offset.is_zero() && self.normal.iter().all(Rational::is_zero)
    }
}

/// One hyperplane per sample point, in sample order.
pub fn dualize(dm: &DesignMatrix) -> Vec<DualHyperplane> {
    let n = dm.n();
    (0..dm.len())
        .map(|i| {
            let mut row = dm.rational_row(i);
            let offset = row.pop().expect("design rows have n + 1 entries");
            debug_assert_eq!(row.len(), n);
            DualHyperplane {
                normal: row,
                offset,
                source_index: i,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// Every constraint holds strictly at `witness`; `margin` is the optimal
    /// common slack in the solver's row scaling.
    Feasible {
        witness: Vec<Rational>,
        margin: Rational,
    },
    Infeasible {
        margin: Rational,
    },
    /// The optimal margin falls inside the approximate zero band.
    Indeterminate {
        witness: Option<Vec<Rational>>,
        margin: Rational,
    },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }

    pub fn margin(&self) -> &Rational {
        match self {
            Feasibility::Feasible { margin, .. }
            | Feasibility::Infeasible { margin }
            | Feasibility::Indeterminate { margin, .. } => margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    /// Bit `i` is set iff sample point `i` is in the positivity set.
    pub sign_vector: u64,
    pub witness: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellEnumeration {
    pub system: SetSystem,
    /// Sorted by sign vector in the same order as `system`.
    pub cells: Vec<Cell>,
    /// False when some LP landed in the approximate zero band.
    pub certified: bool,
    pub indeterminate_lps: usize,
    pub lp_count: usize,
    pub degenerate_points: Vec<usize>,
}

/// Integerized rows plus the data needed to read margins back.
#[derive(Debug, Clone)]
pub struct Arrangement {
    hyperplanes: Vec<DualHyperplane>,
    dim: usize,
    mode: Mode,
    epsilon: f64,
    rows: Vec<(Vec<BigInt>, BigInt)>,
    /// Positive factor taking solver margins to normalized row units.
    unit: Rational,
    /// Margin cap in solver units; one normalized unit.
    cap: BigInt,
}

impl Arrangement {
    /// `epsilon` is the zero band on normalized margins; it only applies in
    /// approximate mode.
    pub fn new(hyperplanes: Vec<DualHyperplane>, dim: usize, mode: Mode, epsilon: f64) -> Result<Self> {
        if let Some(h) = hyperplanes.iter().find(|h| h.normal.len() != dim) {
            return Err(Error::Dimension(format!(
                "hyperplane {} has {} coefficients, expected {dim}",
                h.source_index,
                h.normal.len()
            )));
        }
        if hyperplanes.len() > MAX_GROUND {
            return Err(Error::InvalidInput(format!(
                "at most {MAX_GROUND} hyperplanes are supported, got {}",
                hyperplanes.len()
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        let full_rows = hyperplanes.iter().map(|h| {
            let mut r = h.normal.clone();
            r.push(h.offset.clone());
            r
        });
        let (rows, unit): (Vec<Vec<BigInt>>, Rational) = match mode {
            Mode::Exact => (
                full_rows.map(|r| exactnum::primitive_row(&r)).collect(),
                Rational::one(),
            ),
            Mode::Approximate => {
                // Scale every row by a power of two so its largest entry is
                // near 1, then clear the common power-of-two denominator.
                let normalized: Vec<Vec<Rational>> = full_rows.map(|r| normalize_dyadic(&r)).collect();
                let flat: Vec<Rational> = normalized.iter().flatten().cloned().collect();
                let (_, common) = exactnum::clear_denominators(&flat);
                let scale = Rational::from_integer(common.clone());
                let rows = normalized
                    .iter()
                    .map(|r| r.iter().map(|v| (v * &scale).numer().clone()).collect())
                    .collect();
                (rows, Rational::new(BigInt::one(), common)?)
            }
        };
        let rows = rows
            .into_iter()
            .map(|mut r| {
                let b = r.pop().expect("row has an offset");
                (r, b)
            })
            .collect();
        let cap = unit.recip().expect("unit is positive").numer().clone();
        Ok(Arrangement {
            hyperplanes,
            dim,
            mode,
            epsilon,
            rows,
            unit,
            cap,
        })
    }

    pub fn from_design(dm: &DesignMatrix, epsilon: f64) -> Result<Self> {
        Arrangement::new(dualize(dm), dm.n(), dm.mode(), epsilon)
    }

    pub fn hyperplanes(&self) -> &[DualHyperplane] {
        &self.hyperplanes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn degenerate_points(&self) -> Vec<usize> {
        (0..self.hyperplanes.len())
            .filter(|&i| self.hyperplanes[i].is_degenerate())
            .collect()
    }

    /// Decides whether `{a : every (index, side) holds strictly}` is nonempty.
    pub fn strict_feasible(&self, constraints: &[(usize, Side)]) -> Feasibility {
        let rows: Vec<IntRow<'_>> = constraints
            .iter()
            .map(|&(i, side)| IntRow {
                normal: &self.rows[i].0,
                offset: &self.rows[i].1,
                side,
            })
            .collect();
        let opt = maximize_margin(&rows, self.dim, &self.cap);
        let margin = &opt.margin * &self.unit;
        let positive = opt.margin.signum() == SignClass::Positive;
        if self.mode == Mode::Approximate && margin.abs().to_f64() <= self.epsilon {
            return Feasibility::Indeterminate {
                witness: positive.then_some(opt.witness),
                margin,
            };
        }
        if positive {
            Feasibility::Feasible {
                witness: opt.witness,
                margin,
            }
        } else {
            Feasibility::Infeasible { margin }
        }
    }

    /// Normalized slack of hyperplane `i` at `a` in approximate mode, exact
    /// slack otherwise; `None` when it is too close to zero to trust.
    fn witness_side(&self, i: usize, a: &[Rational]) -> Option<Side> {
        let (normal, offset) = &self.rows[i];
        let dot: Rational = normal
            .iter()
            .zip(a)
            .map(|(w, x)| Rational::from_integer(w.clone()) * x)
            .sum();
        let slack = Rational::from_integer(offset.clone()) - dot;
        if slack.is_zero() {
            return None;
        }
        if self.mode == Mode::Approximate && (&slack * &self.unit).abs().to_f64() <= self.epsilon {
            return None;
        }
        Some(if slack.signum() == SignClass::Positive {
            Side::Inside
        } else {
            Side::Outside
        })
    }

    fn constraints_for(&self, sign_vector: u64, upto: usize) -> Vec<(usize, Side)> {
        (0..upto)
            .filter(|&i| !self.hyperplanes[i].is_degenerate())
            .map(|i| {
                let side = if sign_vector >> i & 1 == 1 {
                    Side::Inside
                } else {
                    Side::Outside
                };
                (i, side)
            })
            .collect()
    }

    /// All open cells, by incremental insertion.
    pub fn enumerate_cells(&self) -> Result<CellEnumeration> {
        if self.dim > MAX_PARAMETER_DIM {
            return Err(Error::Refused(format!(
                "parameter dimension {} exceeds the supported maximum {MAX_PARAMETER_DIM}",
                self.dim
            )));
        }
        let mut cells = vec![Cell {
            sign_vector: 0,
            witness: vec![Rational::zero(); self.dim],
        }];
        let mut lp_count = 0;
        let mut indeterminate = 0;
        for i in 0..self.hyperplanes.len() {
            if self.hyperplanes[i].is_degenerate() {
                continue;
            }
            let bit = 1u64 << i;
            let expanded: Vec<(Vec<Cell>, usize, usize)> =
                cells.par_iter().map(|cell| self.split_cell(cell, i, bit)).collect();
            cells = Vec::with_capacity(expanded.iter().map(|e| e.0.len()).sum());
            for (children, lps, unsure) in expanded {
                cells.extend(children);
                lp_count += lps;
                indeterminate += unsure;
            }
        }
        self.finish(cells, lp_count, indeterminate)
    }

    fn split_cell(&self, cell: &Cell, i: usize, bit: u64) -> (Vec<Cell>, usize, usize) {
        let mut children = Vec::with_capacity(2);
        let mut lps = 0;
        let mut unsure = 0;
        let kept = self.witness_side(i, &cell.witness);
        for side in [Side::Outside, Side::Inside] {
            let sign_vector = match side {
                Side::Inside => cell.sign_vector | bit,
                Side::Outside => cell.sign_vector,
            };
            if kept == Some(side) {
                children.push(Cell {
                    sign_vector,
                    witness: cell.witness.clone(),
                });
                continue;
            }
            let mut constraints = self.constraints_for(cell.sign_vector, i);
            constraints.push((i, side));
            lps += 1;
            let witness = match self.strict_feasible(&constraints) {
                Feasibility::Feasible { witness, .. } => Some(witness),
                Feasibility::Infeasible { .. } => None,
                Feasibility::Indeterminate { witness, .. } => {
                    unsure += 1;
                    witness
                }
            };
            if let Some(witness) = witness {
                children.push(Cell { sign_vector, witness });
            }
        }
        (children, lps, unsure)
    }

    fn finish(&self, mut cells: Vec<Cell>, lp_count: usize, indeterminate: usize) -> Result<CellEnumeration> {
        let ground = self.hyperplanes.len();
        let system = SetSystem::new(ground, cells.iter().map(|c| c.sign_vector))?;
        // Same order as the set system: lexicographic on the bitstring.
        cells.sort_by_key(|c| c.sign_vector.reverse_bits());
        cells.dedup_by_key(|c| c.sign_vector);
        Ok(CellEnumeration {
            system,
            cells,
            certified: indeterminate == 0,
            indeterminate_lps: indeterminate,
            lp_count,
            degenerate_points: self.degenerate_points(),
        })
    }

    /// Tests all `2^N` sign vectors independently. Exponential; an oracle for
    /// small samples only.
    pub fn brute_force_cells(&self, cap: usize) -> Result<CellEnumeration> {
        let ground = self.hyperplanes.len();
        if ground > cap {
            return Err(Error::Refused(format!(
                "brute force over 2^{ground} sign vectors exceeds the cap of 2^{cap}"
            )));
        }
        let degenerate_mask = self.degenerate_points().iter().fold(0u64, |m, &i| m | 1 << i);
        let results: Vec<(Option<Cell>, bool)> = (0..1u64 << ground)
            .into_par_iter()
            .filter(|mask| mask & degenerate_mask == 0)
            .map(|mask| match self.strict_feasible(&self.constraints_for(mask, ground)) {
                Feasibility::Feasible { witness, .. } => (
                    Some(Cell {
                        sign_vector: mask,
                        witness,
                    }),
                    false,
                ),
                Feasibility::Infeasible { .. } => (None, false),
                Feasibility::Indeterminate { witness, .. } => (
                    witness.map(|witness| Cell {
                        sign_vector: mask,
                        witness,
                    }),
                    true,
                ),
            })
            .collect();
        let lp_count = results.len();
        let indeterminate = results.iter().filter(|r| r.1).count();
        let cells = results.into_iter().filter_map(|r| r.0).collect();
        self.finish(cells, lp_count, indeterminate)
    }
}

fn normalize_dyadic(row: &[Rational]) -> Vec<Rational> {
    let max = row.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return row.to_vec();
    }
    let e = max.log2().floor() as i32;
    let factor = if e >= 0 {
        Rational::new(BigInt::one(), BigInt::one() << e as u32)
    } else {
        Ok(Rational::from_integer(BigInt::one() << (-e) as u32))
    }
    .expect("powers of two are nonzero");
    row.iter().map(|v| v * &factor).collect()
}

/// Cells of the arrangement built from a design matrix.
pub fn enumerate_cells(dm: &DesignMatrix) -> Result<CellEnumeration> {
    Arrangement::from_design(dm, DEFAULT_EPSILON)?.enumerate_cells()
}

/// Oracle enumeration of every sign vector; refuses samples above `cap`.
pub fn brute_force_cells(dm: &DesignMatrix, cap: usize) -> Result<CellEnumeration> {
    Arrangement::from_design(dm, DEFAULT_EPSILON)?.brute_force_cells(cap)
}
