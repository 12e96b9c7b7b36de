//! Points file: a `k=<k>` header line, then one point per line as
//! comma-separated rationals (`3/4`) or decimals (`-0.25`). Blank lines and
//! `#` comments are ignored.

use crate::basis::Point;
use crate::error::{Error, Result};
use crate::exactnum::Rational;

pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::Format("points file is empty".into()))?;
    let k: usize = header
        .strip_prefix("k=")
        .and_then(|v| v.trim().parse().ok())
        .filter(|&k| k > 0)
        .ok_or_else(|| Error::Format(format!("line {hline}: expected header `k=<dimension>`")))?;
    let mut points = Vec::new();
    for (no, line) in lines {
        let coords = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<Rational>()
                    .map_err(|e| Error::Format(format!("line {no}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != k {
            return Err(Error::Format(format!(
                "line {no}: expected {k} coordinates, got {}",
                coords.len()
            )));
        }
        points.push(Point::new(coords));
    }
    Ok(points)
}

pub fn format_points(points: &[Point], k: usize) -> String {
    let mut out = format!("k={k}\n");
    for p in points {
        let fields: Vec<String> = p.coords().iter().map(Rational::to_string).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
