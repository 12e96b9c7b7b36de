//! Exact rational arithmetic, fraction-free determinants and rank, and a
//! tolerance-based sign oracle for float matrices.

mod matrix;
mod rational;

pub use matrix::Matrix;
pub use rational::{Rational, SignClass};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Scales a rational row by the least common multiple of its denominators.
///
/// Returns the integer row and the (positive) multiplier used.
pub fn clear_denominators(row: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints = row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    (ints, lcm)
}

/// Integer row with the same direction as `row` and coprime entries.
///
/// The multiplier is positive, so signs of linear forms are preserved.
pub fn primitive_row(row: &[Rational]) -> Vec<BigInt> {
    let (mut ints, _) = clear_denominators(row);
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in &mut ints {
            *v = &*v / &g;
        }
    }
    ints
}

/// Determinant of an `n x n` integer matrix (row-major) by Bareiss elimination.
///
/// Every intermediate entry is a minor of the input, so each division is exact.
pub fn bareiss_det(mut a: Vec<BigInt>, n: usize) -> BigInt {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&i| !a[i * n + k].is_zero()) {
                Some(p) => {
                    for j in 0..n {
                        a.swap(k * n + j, p * n + j);
                    }
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let pivot = a[k * n + k].clone();
        for i in k + 1..n {
            let factor = a[i * n + k].clone();
            for j in k + 1..n {
                let v = &a[i * n + j] * &pivot - &factor * &a[k * n + j];
                debug_assert!((&v % &prev).is_zero());
                a[i * n + j] = v / &prev;
            }
        }
        prev = pivot;
    }
    let det = a.swap_remove(n * n - 1);
    if negate {
        -det
    } else {
        det
    }
}

/// Row rank of an integer matrix by fraction-free echelon reduction.
pub fn integer_rank(mut a: Vec<BigInt>, rows: usize, cols: usize) -> usize {
    debug_assert_eq!(a.len(), rows * cols);
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a[i * cols + col].is_zero()) else {
            continue;
        };
        if p != rank {
            for j in 0..cols {
                a.swap(rank * cols + j, p * cols + j);
            }
        }
        let pivot = a[rank * cols + col].clone();
        for i in rank + 1..rows {
            let factor = a[i * cols + col].clone();
            for j in col + 1..cols {
                let v = &a[i * cols + j] * &pivot - &factor * &a[rank * cols + j];
                a[i * cols + j] = v / &prev;
            }
            a[i * cols + col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Exact determinant of a square rational matrix.
pub fn det_exact(m: &Matrix<Rational>) -> Result<Rational> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut ints = Vec::with_capacity(n * n);
    let mut scale = BigInt::one();
    for row in m.row_iter() {
        let (r, l) = clear_denominators(row);
        ints.extend(r);
        scale *= l;
    }
    Rational::new(bareiss_det(ints, n), scale)
}

/// Exact row rank of a rational matrix.
pub fn rank(m: &Matrix<Rational>) -> usize {
    let ints = m.row_iter().flat_map(primitive_row).collect();
    integer_rank(ints, m.rows(), m.cols())
}

fn check_finite(m: &Matrix<f64>) -> Result<()> {
    match m.entries().iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::InvalidInput(format!(
            "non-finite entry at ({}, {})",
            k / m.cols().max(1),
            k % m.cols().max(1)
        ))),
        None => Ok(()),
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det_approx(m: &Matrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    check_finite(m)?;
    let n = m.rows();
    let mut a = m.entries().to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap_or(k);
        if a[p * n + k] == 0.0 {
            return Ok(0.0);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
        }
    }
    Ok(det)
}

/// Sign of a float determinant with a relative zero band.
///
/// Zero is returned iff `|det| <= epsilon * max(1, prod of row 2-norms)`.
pub fn det_sign_approx(m: &Matrix<f64>, epsilon: f64) -> Result<SignClass> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let det = det_approx(m)?;
    if det.is_nan() {
        return Err(Error::InvalidInput("determinant overflowed".into()));
    }
    let scale: f64 = m
        .row_iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .product();
    if det.abs() <= epsilon * scale.max(1.0) {
        Ok(SignClass::Zero)
    } else if det > 0.0 {
        Ok(SignClass::Positive)
    } else {
        Ok(SignClass::Negative)
    }
}

/// Numerical rank: pivots with `|p| <= epsilon * max(1, max |entry|)` count as zero.
pub fn rank_approx(m: &Matrix<f64>, epsilon: f64) -> Result<usize> {
    check_finite(m)?;
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.entries().to_vec();
    let threshold = epsilon * a.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let p = (rank..rows)
            .max_by(|&i, &j| a[i * cols + col].abs().total_cmp(&a[j * cols + col].abs()))
            .unwrap_or(rank);
        if a[p * cols + col].abs() <= threshold {
            continue;
        }
        for j in 0..cols {
            a.swap(rank * cols + j, p * cols + j);
        }
        let pivot = a[rank * cols + col];
        for i in rank + 1..rows {
            let f = a[i * cols + col] / pivot;
            for j in col..cols {
                a[i * cols + j] -= f * a[rank * cols + j];
            }
        }
        rank += 1;
    }
    Ok(rank)
}
