use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named (x, y) series for plotting and CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSeries {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl CurveSeries {
    pub fn new(
        name: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
        points: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let curve = CurveSeries {
            name: name.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Evaluate `f` on every grid value.
    pub fn sample(
        name: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
        grid: &[f64],
        mut f: impl FnMut(f64) -> Result<f64>,
    ) -> Result<Self> {
        let points = grid.iter().map(|&x| f(x).map(|y| (x, y))).collect::<Result<Vec<_>>>()?;
        Self::new(name, x_label, y_label, points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::domain(format!(
                "curve `{}` needs at least 2 points, has {}",
                self.name,
                self.points.len()
            )));
        }
        for (i, w) in self.points.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::domain(format!(
                    "curve `{}` x values not strictly increasing at point {}",
                    self.name,
                    i + 1
                )));
            }
        }
        if self.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::domain(format!("curve `{}` has non-finite values", self.name)));
        }
        Ok(())
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Point with the largest y; the first one on ties.
    pub fn argmax(&self) -> (f64, f64) {
        self.points
            .iter()
            .copied()
            .fold(self.points[0], |best, p| if p.1 > best.1 { p } else { best })
    }

    /// Two-column CSV with a header row taken from the axis labels.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", csv_field(&self.x_label), csv_field(&self.y_label));
        for (x, y) in &self.points {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }

    pub fn from_csv(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::domain("empty CSV document"))?;
        let (x_label, y_label) = split_header(header)?;
        let mut points = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (x, y) = line
                .split_once(',')
                .ok_or_else(|| Error::domain(format!("CSV row {} has no comma", i + 2)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::domain(format!("CSV row {}: {e}", i + 2)))
            };
            points.push((parse(x)?, parse(y)?));
        }
        Self::new(name, x_label, y_label, points)
    }
}

/// Evenly spaced grid of `n` points on `[start, end]`.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn split_header(line: &str) -> Result<(String, String)> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    match <[String; 2]>::try_from(fields) {
        Ok([x, y]) => Ok((x, y)),
        Err(f) => Err(Error::domain(format!("CSV header needs 2 columns, found {}", f.len()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_unsorted() {
        assert!(CurveSeries::new("c", "x", "y", vec![(0.0, 1.0)]).is_err());
        assert!(CurveSeries::new("c", "x", "y", vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(CurveSeries::new("c", "x", "y", vec![(1.0, 1.0), (0.5, 2.0)]).is_err());
    }

    #[test]
    fn csv_round_trip_keeps_values_and_labels() {
        let c = CurveSeries::new(
            "occ",
            "field current, A",
            "line EMF (V)",
            vec![(0.0, 0.0), (0.1, 1.0 / 3.0), (2.5, 1e-17)],
        )
        .unwrap();
        let text = c.to_csv();
        assert_eq!(text.lines().count(), 4);
        let back = CurveSeries::from_csv("occ", &text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(0.0, 1.0, 11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[10], 1.0);
        assert!((g[3] - 0.3).abs() < 1e-15);
    }
}
