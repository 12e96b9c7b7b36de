//! Fixtures and LP-free oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use maxclass::basis::{builtin_basis, FunctionBasis, Point};
use maxclass::exactnum::Rational;
use maxclass::floyd::DesignMatrix;

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

pub fn family(name: &str, pairs: &[(&str, &str)]) -> FunctionBasis {
    builtin_basis(name, &params(pairs)).unwrap()
}

pub fn disks() -> FunctionBasis {
    family("disks", &[])
}

pub fn pts(coords: &[(i64, i64)]) -> Vec<Point> {
    coords.iter().map(|&(x, y)| Point::from_integers(&[x, y])).collect()
}

/// Eight points; indices 1, 3, 4 and 6 lie on the circle of radius 5 and no
/// other four are concyclic, no three collinear.
pub fn concyclic_fixture() -> (Vec<Point>, Vec<usize>) {
    (
        pts(&[(-6, 10), (5, 0), (5, 3), (0, 5), (-3, 4), (8, -8), (4, -3), (11, -12)]),
        vec![1, 3, 4, 6],
    )
}

/// Seven points; indices 0, 2 and 5 lie on the line y = 2x + 1.
pub fn collinear_fixture() -> (Vec<Point>, Vec<usize>) {
    (
        pts(&[(0, 1), (3, 0), (2, 5), (-4, 6), (5, -2), (-3, -5), (7, 9)]),
        vec![0, 2, 5],
    )
}

/// Cofactor expansion along the first row.
pub fn laplace_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut total = Rational::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * &laplace_det(&minor);
        total = if j % 2 == 0 { total + term } else { total - term };
    }
    total
}

/// Rank by plain Gauss-Jordan elimination over the rationals.
pub fn gauss_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].checked_div(&pivot).unwrap();
                let pivot_row = m[rank].clone();
                for (dst, src) in m[r][c..].iter_mut().zip(&pivot_row[c..]) {
                    *dst = &*dst - &(&f * src);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Number of open cells of the dual arrangement by Zaslavsky's formula:
/// the sum over subsets `S` whose hyperplanes share a point of
/// `(-1)^(|S| - rank S)`. No linear programming involved.
pub fn region_count(dm: &DesignMatrix) -> u128 {
    let n = dm.n();
    let rows: Vec<Vec<Rational>> = (0..dm.len()).map(|i| dm.rational_row(i)).collect();
    let mut total: i128 = 0;
    for mask in 0u64..(1 << rows.len()) {
        let chosen: Vec<&Vec<Rational>> = (0..rows.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| &rows[i])
            .collect();
        let normals: Vec<Vec<Rational>> = chosen.iter().map(|r| r[..n].to_vec()).collect();
        let augmented: Vec<Vec<Rational>> = chosen.iter().map(|r| r.to_vec()).collect();
        let r = gauss_rank(&normals);
        if r == gauss_rank(&augmented) {
            let sign = if (chosen.len() - r).is_multiple_of(2) { 1 } else { -1 };
            total += sign;
        }
    }
    total as u128
}

/// Sauer bound by direct binomial sums, written independently of the
/// library's version.
pub fn binomial_sum(n: usize, d: usize) -> u128 {
    let mut c: u128 = 1;
    let mut sum: u128 = 0;
    for i in 0..=d.min(n) {
        sum += c;
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    sum
}
