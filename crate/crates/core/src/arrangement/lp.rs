//! Margin maximization over a system of strict linear inequalities.
//!
//! For constraints `s_i (b_i - <w_i, a>) > 0` the solver maximizes `t`
//! subject to `s_i (b_i - <w_i, a>) >= t` and `t <= 1` over free `(a, t)`.
//! The strict system is feasible iff the optimum is positive.
//!
//! The simplex runs on an integer dictionary with a common positive
//! denominator (fraction-free pivoting): every entry stays an integer minor
//! of the input, so no gcd work is needed and the result is exact. Free
//! variables are pivoted into the basis first and never leave; the remaining
//! problem is solved with Bland's rule, which cannot cycle.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exactnum::Rational;

/// Which open side of a dual hyperplane `<w, a> = b` is required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Side {
    /// `<w, a> < b`: the sample point lies in the positivity set.
    Inside,
    /// `<w, a> > b`: the sample point lies outside it.
    Outside,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Inside => Side::Outside,
            Side::Outside => Side::Inside,
        }
    }
}

/// One integer constraint row: `normal . a` compared with `offset`.
pub(crate) struct IntRow<'a> {
    pub normal: &'a [BigInt],
    pub offset: &'a BigInt,
    pub side: Side,
}

/// Optimal margin `t*` and a parameter point attaining it.
#[derive(Debug, Clone)]
pub(crate) struct MarginOptimum {
    pub margin: Rational,
    pub witness: Vec<Rational>,
}

struct Dictionary {
    /// Row 0 is the objective; rows `1..` are constraints.
    t: Vec<Vec<BigInt>>,
    denom: BigInt,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    /// Rows whose basic variable is free; they never leave.
    free_row: Vec<bool>,
    flipped: Vec<bool>,
    rhs: usize,
    free_count: usize,
}

impl Dictionary {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        debug_assert!(p.is_positive());
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c].clone();
            if factor.is_zero() {
                for (j, v) in row.iter_mut().enumerate() {
                    if j != c && !v.is_zero() {
                        *v = &*v * &p / &self.denom;
                    }
                }
            } else {
                for (j, v) in row.iter_mut().enumerate() {
                    if j != c {
                        *v = (&*v * &p - &factor * &pivot_row[j]) / &self.denom;
                    }
                }
                row[c] = -factor;
            }
        }
        self.t[r][c] = std::mem::replace(&mut self.denom, p);
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[c]);
    }

    /// Minimum-ratio row for entering column `c` (entries must be positive).
    /// Ties go to the smallest basic variable index.
    fn ratio_row(&self, c: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 1..self.t.len() {
            if self.free_row[i] || !self.t[i][c].is_positive() {
                continue;
            }
            best = Some(match best {
                None => i,
                Some(b) => {
                    // rhs_i / t_ic  vs  rhs_b / t_bc, both denominators positive
                    let lhs = &self.t[i][self.rhs] * &self.t[b][c];
                    let rhs = &self.t[b][self.rhs] * &self.t[i][c];
                    match lhs.cmp(&rhs) {
                        std::cmp::Ordering::Less => i,
                        std::cmp::Ordering::Equal if self.basic[i] < self.basic[b] => i,
                        _ => b,
                    }
                }
            });
        }
        best
    }

    fn flip_column(&mut self, c: usize) {
        for row in &mut self.t {
            row[c] = -std::mem::take(&mut row[c]);
        }
        let var = self.nonbasic[c];
        self.flipped[var] = !self.flipped[var];
    }

    fn is_free(&self, var: usize) -> bool {
        var < self.free_count
    }
}

/// Solves `max t` subject to the rows and `t <= cap` in a parameter space of
/// dimension `dim`. `cap` must be positive.
///
/// The problem is always feasible (take `a = 0` and `t` small) and bounded,
/// so an optimum always exists.
pub(crate) fn maximize_margin(rows: &[IntRow<'_>], dim: usize, cap: &BigInt) -> MarginOptimum {
    debug_assert!(cap.is_positive());
    let m = rows.len();
    let t_var = dim;
    let free_count = dim + 1;
    let rhs = free_count;

    // Shift t = t0 + t' so the all-slack basis is feasible.
    let signed_offset = |row: &IntRow<'_>| match row.side {
        Side::Inside => row.offset.clone(),
        Side::Outside => -row.offset.clone(),
    };
    let t0 = rows
        .iter()
        .map(signed_offset)
        .fold(BigInt::zero(), |acc, v| if v < acc { v } else { acc });

    let mut t = Vec::with_capacity(m + 2);
    let mut objective = vec![BigInt::zero(); free_count + 1];
    objective[t_var] = -BigInt::one();
    t.push(objective);
    for row in rows {
        let mut line = Vec::with_capacity(free_count + 1);
        for w in row.normal {
            line.push(match row.side {
                Side::Inside => w.clone(),
                Side::Outside => -w.clone(),
            });
        }
        line.push(BigInt::one());
        line.push(signed_offset(row) - &t0);
        t.push(line);
    }
    let mut cap_row = vec![BigInt::zero(); free_count + 1];
    cap_row[t_var] = BigInt::one();
    cap_row[rhs] = cap - &t0;
    t.push(cap_row);

    let n_rows = t.len();
    let mut dict = Dictionary {
        t,
        denom: BigInt::one(),
        basic: std::iter::once(usize::MAX)
            .chain((0..=m).map(|i| free_count + i))
            .collect(),
        nonbasic: (0..free_count).collect(),
        free_row: vec![false; n_rows],
        flipped: vec![false; free_count],
        rhs,
        free_count,
    };

    // Phase 1: bring every free variable into the basis.
    for var in 0..free_count {
        let c = dict
            .nonbasic
            .iter()
            .position(|&v| v == var)
            .expect("free variables start nonbasic");
        let has_pos = (1..n_rows).any(|i| !dict.free_row[i] && dict.t[i][c].is_positive());
        let has_neg = (1..n_rows).any(|i| !dict.free_row[i] && dict.t[i][c].is_negative());
        if !has_pos && !has_neg {
            // Unconstrained by every remaining row; it stays at zero.
            continue;
        }
        if !has_pos {
            dict.flip_column(c);
        }
        let r = dict.ratio_row(c).expect("a positive entry exists");
        dict.pivot(r, c);
        dict.free_row[r] = true;
    }

    // Phase 2: Bland's rule over the slack columns.
    loop {
        let entering = (0..free_count)
            .filter(|&c| !dict.is_free(dict.nonbasic[c]) && dict.t[0][c].is_negative())
            .min_by_key(|&c| dict.nonbasic[c]);
        let Some(c) = entering else { break };
        let r = dict
            .ratio_row(c)
            .expect("the margin is capped, so the objective cannot be unbounded");
        dict.pivot(r, c);
    }
    debug_assert!((0..free_count)
        .filter(|&c| dict.is_free(dict.nonbasic[c]))
        .all(|c| dict.t[0][c].is_zero()));

    let denom = dict.denom.clone();
    let margin = Rational::new(&t0 * &denom + &dict.t[0][rhs], denom.clone()).expect("positive denominator");
    let mut witness = vec![Rational::zero(); dim];
    for (i, &var) in dict.basic.iter().enumerate().skip(1) {
        if var < dim {
            let v = Rational::new(dict.t[i][rhs].clone(), denom.clone()).expect("positive denominator");
            witness[var] = if dict.flipped[var] { -v } else { v };
        }
    }
    MarginOptimum { margin, witness }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(rows: &[(&[i64], i64, Side)], dim: usize) -> MarginOptimum {
        let data: Vec<(Vec<BigInt>, BigInt, Side)> = rows
            .iter()
            .map(|(w, b, s)| (w.iter().map(|&v| BigInt::from(v)).collect(), BigInt::from(*b), *s))
            .collect();
        let int_rows: Vec<IntRow<'_>> = data
            .iter()
            .map(|(w, b, s)| IntRow {
                normal: w,
                offset: b,
                side: *s,
            })
            .collect();
        maximize_margin(&int_rows, dim, &BigInt::one())
    }

    fn slack(w: &[i64], b: i64, side: Side, a: &[Rational]) -> Rational {
        let dot: Rational = w.iter().zip(a).map(|(&wi, ai)| Rational::from_integer(wi) * ai).sum();
        let v = Rational::from_integer(b) - dot;
        match side {
            Side::Inside => v,
            Side::Outside => -v,
        }
    }

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn single_halfline() {
        // a < 1 in R^1: the optimum margin hits the cap.
        let opt = solve(&[(&[1], 1, Side::Inside)], 1);
        assert_eq!(opt.margin, q("1"));
        assert!(slack(&[1], 1, Side::Inside, &opt.witness) >= q("1"));
    }

    #[test]
    fn contradictory_pair() {
        let opt = solve(&[(&[1], 0, Side::Inside), (&[1], 0, Side::Outside)], 1);
        assert_eq!(opt.margin, q("0"));
    }

    #[test]
    fn interval_center() {
        // 2 < a < 3 has best margin 1/2 at a = 5/2.
        let opt = solve(&[(&[1], 2, Side::Outside), (&[1], 3, Side::Inside)], 1);
        assert_eq!(opt.margin, q("1/2"));
        assert_eq!(opt.witness, vec![q("5/2")]);
    }

    #[test]
    fn negative_optimum_when_infeasible() {
        // a > 3 and a < 1: best margin -1 at a = 2.
        let opt = solve(&[(&[1], 3, Side::Outside), (&[1], 1, Side::Inside)], 1);
        assert_eq!(opt.margin, q("-1"));
        assert_eq!(opt.witness, vec![q("2")]);
    }

    #[test]
    fn degenerate_vertex_does_not_cycle() {
        // Many constraints through the origin in R^2 with a cone of solutions.
        let rows: Vec<(&[i64], i64, Side)> = vec![
            (&[1, 0], 0, Side::Outside),
            (&[0, 1], 0, Side::Outside),
            (&[1, 1], 0, Side::Outside),
            (&[1, -1], 0, Side::Inside),
            (&[-1, 1], 0, Side::Inside),
            (&[2, 1], 0, Side::Outside),
        ];
        let opt = solve(&rows, 2);
        // a1 > 0, a2 > 0, a1 < a2 and a2 < a1 together are infeasible.
        assert_eq!(opt.margin, q("0"));
        let opt = solve(&rows[..4], 2);
        assert!(opt.margin.signum() == crate::exactnum::SignClass::Positive);
        for (w, b, s) in &rows[..4] {
            assert!(slack(w, *b, *s, &opt.witness) >= opt.margin);
        }
    }

    #[test]
    fn unconstrained_direction() {
        // Only the first coordinate matters; the second stays at zero.
        let opt = solve(&[(&[1, 0], 5, Side::Inside), (&[1, 0], -5, Side::Outside)], 2);
        assert_eq!(opt.margin, q("1"));
        assert_eq!(opt.witness[1], q("0"));
    }

    #[test]
    fn larger_cap() {
        let data = [(vec![BigInt::from(1)], BigInt::from(0))];
        let rows = [IntRow {
            normal: &data[0].0,
            offset: &data[0].1,
            side: Side::Inside,
        }];
        let opt = maximize_margin(&rows, 1, &BigInt::from(1000));
        assert_eq!(opt.margin, q("1000"));
        assert!(slack(&[1], 0, Side::Inside, &opt.witness) >= q("1000"));
    }

    #[test]
    fn zero_normal_rows() {
        assert_eq!(solve(&[(&[0, 0], 0, Side::Inside)], 2).margin, q("0"));
        assert_eq!(solve(&[(&[0, 0], 0, Side::Outside)], 2).margin, q("0"));
        assert_eq!(solve(&[(&[0, 0], 3, Side::Inside)], 2).margin, q("1"));
        assert_eq!(solve(&[(&[0, 0], 3, Side::Outside)], 2).margin, q("-3"));
    }
}
