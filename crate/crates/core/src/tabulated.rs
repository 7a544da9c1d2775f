//! Coefficients given as a table of samples, interpolated by a natural cubic
//! spline.
//!
//! Text format: one `t q` pair per line, separated by whitespace or a comma.
//! Blank lines, lines starting with `#` and a non-numeric first line are
//! skipped. Abscissae must be strictly increasing.

use std::path::Path;

use crate::{Error, Result};

/// Natural cubic spline through `(t_i, q_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCoefficient {
    t: Vec<f64>,
    q: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl TabulatedCoefficient {
    pub fn new(t: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if t.len() != q.len() || t.len() < 2 {
            return Err(Error::InvalidParameters("need at least two (t, q) samples".into()));
        }
        if !t.iter().chain(&q).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameters("samples must be finite".into()));
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameters("sample abscissae must be strictly increasing".into()));
        }
        let m = natural_second_derivatives(&t, &q);
        Ok(TabulatedCoefficient { t, q, m })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (mut t, mut q) = (Vec::new(), Vec::new());
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let nums: Option<Vec<f64>> = fields.iter().map(|s| s.parse().ok()).collect();
            match nums.as_deref() {
                Some([a, b]) => {
                    t.push(*a);
                    q.push(*b);
                }
                _ if t.is_empty() && q.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::InvalidParameters(format!(
                        "line {}: expected two numbers, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(t, q)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn a(&self) -> f64 {
        self.t[0]
    }

    pub fn b(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Spline value; clamps to the end segments outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let i = self.t.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let h = self.t[i + 1] - self.t[i];
        let (a, b) = ((self.t[i + 1] - x) / h, (x - self.t[i]) / h);
        a * self.q[i]
            + b * self.q[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Thomas algorithm for the natural spline system.
fn natural_second_derivatives(t: &[f64], q: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        let rhs = 6.0 * ((q[i + 1] - q[i]) / h1 - (q[i] - q[i - 1]) / h0);
        let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}
