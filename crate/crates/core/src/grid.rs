use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt::sig;

/// Function values on a uniform grid `x_i = x0 + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    x0: f64,
    h: f64,
    values: Vec<f64>,
}

pub const MIN_NODES: usize = 5;

impl GridFunction {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::BadSpacing(h));
        }
        if values.len() < MIN_NODES {
            return Err(Error::GridTooSmall { min: MIN_NODES, got: values.len() });
        }
        Ok(Self { x0, h, values })
    }

    /// `n` nodes spanning `[a, b]` inclusive.
    pub fn sample(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall { min: MIN_NODES, got: n });
        }
        let h = (b - a) / (n - 1) as f64;
        Self::new(a, h, (0..n).map(|i| f(a + i as f64 * h)).collect())
    }

    /// `n` nodes covering one period `[a, a + period)`.
    pub fn sample_periodic(f: impl Fn(f64) -> f64, a: f64, period: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::GridTooSmall { min: MIN_NODES, got: n });
        }
        let h = period / n as f64;
        Self::new(a, h, (0..n).map(|i| f(a + i as f64 * h)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The same data seen from the other end: node `i` becomes node `N-1-i`
    /// and the abscissa is negated.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        Self { x0: -self.x(n - 1), h: self.h, values: self.values.iter().rev().copied().collect() }
    }

    /// Reads a two-column `x,u` CSV with a header row.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| csv_error(path, e))?;
        let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "u" {
            return Err(Error::format(path, "expected header `x,u`"));
        }
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::format(path, format!("row {}: cannot parse `{s}`", row + 1)))
            };
            xs.push(parse(&rec[0])?);
            us.push(parse(&rec[1])?);
        }
        Self::from_samples(&xs, us)
    }

    /// Builds a grid function from explicit abscissae, checking that they are
    /// strictly increasing and uniform to 1e-9 relative.
    pub fn from_samples(xs: &[f64], values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::LengthMismatch { what: "values", got: values.len(), expected: xs.len() });
        }
        if xs.len() < MIN_NODES {
            return Err(Error::GridTooSmall { min: MIN_NODES, got: xs.len() });
        }
        let n = xs.len();
        let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        for (row, w) in xs.windows(2).enumerate() {
            let step = w[1] - w[0];
            if !(step > 0.0) || (step - h).abs() > 1e-9 * h.abs() {
                return Err(Error::NonUniformGrid { row: row + 1, step, expected: h });
            }
        }
        Self::new(xs[0], h, values)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::format(path, e.to_string())
}

/// First and second derivative arrays over the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativePair {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl DerivativePair {
    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Writes `x,u,du,d2u` rows with 17 significant digits.
    pub fn write_csv(&self, g: &GridFunction, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,u,du,d2u")?;
        for i in 0..g.len() {
            writeln!(
                out,
                "{},{},{},{}",
                sig(g.x(i), 17),
                sig(g.values()[i], 17),
                sig(self.first[i], 17),
                sig(self.second[i], 17)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_bad_spacing() {
        assert!(matches!(GridFunction::new(0.0, 0.1, vec![0.0; 4]), Err(Error::GridTooSmall { .. })));
        assert!(matches!(GridFunction::new(0.0, 0.0, vec![0.0; 8]), Err(Error::BadSpacing(_))));
    }

    #[test]
    fn uniformity_check() {
        let xs = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
        assert!(GridFunction::from_samples(&xs, vec![0.0; 6]).is_ok());
        let bad = [0.0, 0.1, 0.2, 0.31, 0.4, 0.5];
        assert!(matches!(GridFunction::from_samples(&bad, vec![0.0; 6]), Err(Error::NonUniformGrid { row: 3, .. })));
        let decreasing = [0.5, 0.4, 0.3, 0.2, 0.1, 0.0];
        assert!(GridFunction::from_samples(&decreasing, vec![0.0; 6]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(&path, "x,u\n0,1\n0.25,2\n0.5,3\n0.75,4\n1,5\n").unwrap();
        let g = GridFunction::read_csv(&path).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.values()[4], 5.0);

        std::fs::write(&path, "t,u\n0,1\n").unwrap();
        assert!(GridFunction::read_csv(&path).is_err());
    }
}
