//! Function bases `(f0; f1..fn)`: built-in analytic families, a small
//! expression language, and evaluation at sample points.

mod expr;

use std::collections::BTreeMap;
use std::fmt;

pub use expr::{parse_expression, Expr, Func};

use crate::error::{Error, Result};
use crate::exactnum::{self, Matrix, Rational};

/// Tolerance used for numerical rank in approximate mode.
pub const APPROX_RANK_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Exactness {
    /// Every expression is a polynomial; evaluation stays in exact rationals.
    ExactPolynomial,
    /// Some expression uses `sin`, `cos` or `exp`; evaluation is in `f64`.
    ApproximateAnalytic,
}

/// A sample point in `R^k` with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point(Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point(coords)
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_fractions(coords: &[(i64, i64)]) -> Result<Self> {
        coords
            .iter()
            .map(|&(p, q)| Rational::new(p, q))
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| Rational::from_integer(c)).collect())
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Rational::to_f64).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// One evaluated design row `(f1(p), .., fn(p), f0(p))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Exact(Vec<Rational>),
    Approximate(Vec<f64>),
}

/// The target `f0` and the members `f1..fn` spanning the parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionBasis {
    name: String,
    dim: usize,
    target: Expr,
    members: Vec<Expr>,
    exactness: Exactness,
}

impl FunctionBasis {
    pub fn new(dim: usize, target: Expr, members: Vec<Expr>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("ambient dimension must be at least 1".into()));
        }
        if members.is_empty() {
            return Err(Error::InvalidInput("a basis needs at least one member".into()));
        }
        for e in members.iter().chain(std::iter::once(&target)) {
            if let Some(v) = e.max_var() {
                if v >= dim {
                    return Err(Error::Dimension(format!(
                        "`{e}` uses x{} but the dimension is {dim}",
                        v + 1
                    )));
                }
            }
        }
        if let Some(i) = members.iter().position(|m| *m == target) {
            return Err(Error::InvalidInput(format!(
                "target f0 = `{target}` is identical to member f{}",
                i + 1
            )));
        }
        let exactness = if target.is_polynomial() && members.iter().all(Expr::is_polynomial) {
            Exactness::ExactPolynomial
        } else {
            Exactness::ApproximateAnalytic
        };
        Ok(FunctionBasis {
            name: "custom".into(),
            dim,
            target,
            members,
            exactness,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Ambient dimension `k` of the sample space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of members `n`; the parameter space is `R^n`.
    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn target(&self) -> &Expr {
        &self.target
    }

    pub fn members(&self) -> &[Expr] {
        &self.members
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn is_exact(&self) -> bool {
        self.exactness == Exactness::ExactPolynomial
    }

    /// Serializes to the basis spec file format.
    pub fn to_spec_text(&self) -> String {
        let mut out = format!("dim: {}\nf0: {}\n", self.dim, self.target);
        for m in &self.members {
            out.push_str(&format!("f: {m}\n"));
        }
        out
    }
}

/// Evaluates `(f1(p), .., fn(p), f0(p))`.
pub fn eval_row(basis: &FunctionBasis, point: &Point) -> Result<Row> {
    if point.dim() != basis.dim() {
        return Err(Error::Dimension(format!(
            "point has dimension {} but the basis expects {}",
            point.dim(),
            basis.dim()
        )));
    }
    let exprs = basis.members().iter().chain(std::iter::once(basis.target()));
    if basis.is_exact() {
        exprs
            .map(|e| e.eval_exact(point.coords()))
            .collect::<Result<Vec<_>>>()
            .map(Row::Exact)
    } else {
        let coords = point.to_f64();
        exprs
            .map(|e| e.eval_f64(&coords))
            .collect::<Result<Vec<_>>>()
            .map(Row::Approximate)
    }
}

/// Certifies that `f1..fn, f0` are linearly independent as functions.
///
/// `true` is a proof (full column rank on the sample, exact mode) or a
/// numerical indication (approximate mode). `false` only says this sample
/// does not separate them.
pub fn check_linear_independence(basis: &FunctionBasis, sample: &[Point]) -> Result<bool> {
    let cols = basis.n() + 1;
    if sample.len() < cols {
        return Err(Error::InsufficientSample(format!(
            "independence of {cols} functions needs at least {cols} points, got {}",
            sample.len()
        )));
    }
    let rows = sample.iter().map(|p| eval_row(basis, p)).collect::<Result<Vec<_>>>()?;
    if basis.is_exact() {
        let m = Matrix::from_rows(
            rows.into_iter()
                .map(|r| match r {
                    Row::Exact(v) => v,
                    Row::Approximate(_) => unreachable!("exact basis"),
                })
                .collect(),
        )?;
        Ok(exactnum::rank(&m) == cols)
    } else {
        let m = Matrix::from_rows(
            rows.into_iter()
                .map(|r| match r {
                    Row::Approximate(v) => v,
                    Row::Exact(v) => v.iter().map(Rational::to_f64).collect(),
                })
                .collect(),
        )?;
        Ok(exactnum::rank_approx(&m, APPROX_RANK_EPSILON)? == cols)
    }
}

fn monomial(exponents: &[u32]) -> Expr {
    let mut factors = exponents.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| {
        if e == 1 {
            Expr::var(i)
        } else {
            Expr::var(i).pow(e)
        }
    });
    match factors.next() {
        None => Expr::constant(1),
        Some(first) => factors.fold(first, |a, b| a * b),
    }
}

/// Exponent vectors of total degree <= `degree` in `k` variables: graded by
/// degree, and within one degree in decreasing lexicographic order, so for
/// `k = 2` the order is `1, x, y, x^2, xy, y^2, ...`.
pub fn graded_exponents(k: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(k: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == k - 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=remaining).rev() {
            prefix.push(e);
            fill(k, remaining - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=degree {
        fill(k, d, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

struct Params<'a> {
    family: &'a str,
    values: &'a BTreeMap<String, String>,
}

impl Params<'_> {
    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidParam(format!(
                "`{k}` is not a parameter of `{}` (expected one of: {})",
                self.family,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn uint(&self, keys: &[&str], default: Option<u32>, range: std::ops::RangeInclusive<u32>) -> Result<u32> {
        let found = keys.iter().find_map(|k| self.values.get(*k).map(|v| (*k, v)));
        let value = match found {
            Some((key, text)) => text
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidParam(format!("`{key}={text}` is not a non-negative integer")))?,
            None => default
                .ok_or_else(|| Error::InvalidParam(format!("`{}` requires parameter `{}`", self.family, keys[0])))?,
        };
        if !range.contains(&value) {
            return Err(Error::InvalidParam(format!(
                "`{}` must lie in {}..={}, got {value}",
                keys[0],
                range.start(),
                range.end()
            )));
        }
        Ok(value)
    }
}

/// Built-in families with fixed member ordering:
///
/// * `disks` (`disks_k`), param `k` (default 2): members `1, x1..xk`,
///   target `-(x1^2 + .. + xk^2)`. `pos` sets are open balls.
/// * `monomials`, params `k` (default 1), `d` (default 2), optional `target`
///   expression: members are the monomials of degree <= d in
///   [`graded_exponents`] order; without `target` the last monomial becomes
///   `f0` and the rest are members.
/// * `poly_threshold`, param `d` (default 2): on `(x, y)`, members
///   `1, x, .., x^d`, target `y`.
/// * `trig`, param `harmonics` (alias `N`, default 1): on `(x, y)`, members
///   `1, cos(x), sin(x), cos(2x), sin(2x), ..`, target `y`.
pub fn builtin_basis(family: &str, params: &BTreeMap<String, String>) -> Result<FunctionBasis> {
    let p = Params { family, values: params };
    match family {
        "disks" | "disks_k" => {
            p.check_keys(&["k"])?;
            let k = p.uint(&["k"], Some(2), 1..=9)? as usize;
            let members = std::iter::once(Expr::constant(1))
                .chain((0..k).map(Expr::var))
                .collect();
            let squares = (0..k)
                .map(|i| Expr::var(i).pow(2))
                .reduce(|a, b| a + b)
                .expect("k >= 1");
            Ok(FunctionBasis::new(k, -squares, members)?.with_name(format!("disks_k(k={k})")))
        }
        "monomials" => {
            p.check_keys(&["k", "d", "target"])?;
            let k = p.uint(&["k"], Some(1), 1..=9)? as usize;
            let d = p.uint(&["d"], Some(2), 0..=12)?;
            let mut members: Vec<Expr> = graded_exponents(k, d).iter().map(|e| monomial(e)).collect();
            let (target, label) = match params.get("target") {
                Some(text) => (
                    parse_expression(text, k)?,
                    format!("monomials(k={k}, d={d}, target={text})"),
                ),
                None => {
                    if members.len() < 2 {
                        return Err(Error::InvalidParam("monomials with d=0 need an explicit target".into()));
                    }
                    (members.pop().expect("non-empty"), format!("monomials(k={k}, d={d})"))
                }
            };
            Ok(FunctionBasis::new(k, target, members)?.with_name(label))
        }
        "poly_threshold" => {
            p.check_keys(&["d"])?;
            let d = p.uint(&["d"], Some(2), 0..=16)?;
            let members = (0..=d).map(|e| monomial(&[e])).collect();
            Ok(FunctionBasis::new(2, Expr::var(1), members)?.with_name(format!("poly_threshold(d={d})")))
        }
        "trig" => {
            p.check_keys(&["harmonics", "N"])?;
            let harmonics = p.uint(&["harmonics", "N"], Some(1), 0..=16)?;
            let mut members = vec![Expr::constant(1)];
            for j in 1..=harmonics {
                let arg = if j == 1 {
                    Expr::var(0)
                } else {
                    Expr::constant(j as i64) * Expr::var(0)
                };
                members.push(Expr::apply(Func::Cos, arg.clone()));
                members.push(Expr::apply(Func::Sin, arg));
            }
            Ok(FunctionBasis::new(2, Expr::var(1), members)?.with_name(format!("trig(harmonics={harmonics})")))
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

/// Parses the basis spec file format:
///
/// ```text
/// dim: 2
/// f0: -x^2 - y^2
/// f: 1
/// f: x
/// f: y
/// ```
///
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_basis_spec(text: &str) -> Result<FunctionBasis> {
    let mut dim = None;
    let mut target = None;
    let mut members = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(Error::Format(format!("line {}: expected `key: value`", lineno + 1)));
        };
        let value = value.trim();
        match key.trim() {
            "dim" => {
                if dim.is_some() {
                    return Err(Error::Format(format!("line {}: duplicate `dim`", lineno + 1)));
                }
                dim =
                    Some(value.parse::<usize>().map_err(|_| {
                        Error::Format(format!("line {}: `dim` must be a positive integer", lineno + 1))
                    })?);
            }
            "f0" => {
                if target.is_some() {
                    return Err(Error::Format(format!("line {}: duplicate `f0`", lineno + 1)));
                }
                target = Some((lineno, value.to_string()));
            }
            "f" => members.push((lineno, value.to_string())),
            other => return Err(Error::Format(format!("line {}: unknown key `{other}`", lineno + 1))),
        }
    }
    let dim = dim.ok_or_else(|| Error::Format("missing `dim:` header".into()))?;
    let parse_at = |(lineno, text): (usize, String)| {
        parse_expression(&text, dim).map_err(|e| match e {
            Error::Parse { position, message } => {
                Error::Format(format!("line {}, column {}: {message}", lineno + 1, position + 1))
            }
            other => other,
        })
    };
    let target = parse_at(target.ok_or_else(|| Error::Format("missing `f0:` line".into()))?)?;
    let members = members.into_iter().map(parse_at).collect::<Result<Vec<_>>>()?;
    FunctionBasis::new(dim, target, members)
}
