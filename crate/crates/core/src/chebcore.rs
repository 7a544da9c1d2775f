//! Chebyshev grids, barycentric interpolation, spectral integration and
//! piecewise Chebyshev functions.
//!
//! Grids are the extreme points of `T_m` mapped affinely onto `[a, b]`,
//! stored in ascending order. The reference nodes are built so that the
//! grid is exactly antisymmetric (`x_{m-j} = -x_j` bit for bit), which lets a
//! time-reversed solve land on precisely the negated nodes of the forward
//! grid.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) type NodeBuf = SmallVec<[f64; 33]>;

/// Ascending Chebyshev extreme points on `[-1, 1]`.
pub fn reference_nodes(m: usize) -> Vec<f64> {
    let mut x = vec![0.0; m + 1];
    for j in 0..=m / 2 {
        let v = -(PI * j as f64 / m as f64).cos();
        x[j] = v;
        x[m - j] = -v;
    }
    if m % 2 == 0 {
        x[m / 2] = 0.0;
    }
    x[0] = -1.0;
    x[m] = 1.0;
    x
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(())
}

fn check_order(m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidOrder(format!("grid order must be at least 1, got {m}")));
    }
    Ok(())
}

/// Affine image of the reference nodes onto `[a, b]`, endpoints exact.
fn map_nodes(reference: &[f64], a: f64, b: f64, out: &mut Vec<f64>) {
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let m = reference.len() - 1;
    out.extend(reference.iter().map(|&x| mid + half * x));
    let base = out.len() - (m + 1);
    out[base] = a;
    out[base + m] = b;
}

/// The `(m+1)`-point Chebyshev extreme-point grid on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebGrid {
    order: usize,
    a: f64,
    b: f64,
    nodes: Vec<f64>,
}

impl ChebGrid {
    pub fn new(m: usize, a: f64, b: f64) -> Result<Self> {
        check_order(m)?;
        check_interval(a, b)?;
        let mut nodes = Vec::with_capacity(m + 1);
        map_nodes(&reference_nodes(m), a, b, &mut nodes);
        Ok(ChebGrid { order: m, a, b, nodes })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Interpolates `values` (given at the nodes) at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        barycentric_eval(self, values, x)
    }
}

/// Builds the `(m+1)`-point grid on `[a, b]`.
pub fn cheb_grid(m: usize, a: f64, b: f64) -> Result<ChebGrid> {
    ChebGrid::new(m, a, b)
}

/// Barycentric coefficients of the interpolant at `x`: either `x` sits on a
/// node, or `coeffs[j]` are the normalized weights so that the interpolant is
/// `sum coeffs[j] * f_j`.
pub(crate) enum Barycentric {
    Node(usize),
    Weights(NodeBuf),
}

pub(crate) fn barycentric_weights(nodes: &[f64], x: f64) -> Barycentric {
    let m = nodes.len() - 1;
    let tol = 4.0 * f64::EPSILON * (nodes[m] - nodes[0]);
    let mut w = NodeBuf::with_capacity(m + 1);
    let mut denom = 0.0;
    for (j, &xj) in nodes.iter().enumerate() {
        let diff = x - xj;
        if diff.abs() <= tol {
            return Barycentric::Node(j);
        }
        let mut c = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == m {
            c *= 0.5;
        }
        let c = c / diff;
        denom += c;
        w.push(c);
    }
    for c in w.iter_mut() {
        *c /= denom;
    }
    Barycentric::Weights(w)
}

impl Barycentric {
    #[inline]
    pub(crate) fn apply(&self, values: &[f64]) -> f64 {
        match self {
            Barycentric::Node(j) => values[*j],
            Barycentric::Weights(w) => w.iter().zip(values).map(|(c, f)| c * f).sum(),
        }
    }
}

/// Evaluates the degree-`m` interpolant of `values` at `x ∈ [a, b]`.
///
/// Points within `4·eps·(b-a)` of a node return that node's value exactly.
pub fn barycentric_eval(grid: &ChebGrid, values: &[f64], x: f64) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::InvalidParameters(format!(
            "expected {} node values, got {}",
            grid.len(),
            values.len()
        )));
    }
    if !(x >= grid.a && x <= grid.b) {
        return Err(Error::OutOfDomain { t: x, a: grid.a, b: grid.b });
    }
    Ok(barycentric_weights(&grid.nodes, x).apply(values))
}

/// Dense spectral integration matrix on `[-1, 1]`.
///
/// Row `i` maps node values of `f` to the value at node `i` of the
/// antiderivative of the interpolant of `f`, vanishing at `-1`. For an
/// interval `[a, b]` multiply by `(b - a) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralIntegrationMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SpectralIntegrationMatrix {
    fn build(m: usize) -> Self {
        let n = m + 1;
        // theta_j such that x_j = cos(theta_j) for the ascending nodes
        let theta: Vec<f64> = (0..n).map(|j| PI * (m - j) as f64 / m as f64).collect();
        let mut data = vec![0.0; n * n];
        let mut coeffs = vec![0.0; n + 2];
        let mut integrated = vec![0.0; n + 2];
        for col in 0..n {
            // Chebyshev coefficients of the interpolant of the unit vector e_col
            let edge = if col == 0 || col == m { 0.5 } else { 1.0 };
            for (k, c) in coeffs.iter_mut().enumerate().take(n) {
                let mut v = 2.0 / m as f64 * edge * (k as f64 * theta[col]).cos();
                if k == 0 || k == m {
                    v *= 0.5;
                }
                *c = v;
            }
            coeffs[n] = 0.0;
            coeffs[n + 1] = 0.0;
            // int T_0 = T_1, int T_1 = T_2 / 4, int T_k = T_{k+1}/(2(k+1)) - T_{k-1}/(2(k-1))
            integrated.iter_mut().for_each(|v| *v = 0.0);
            for k in 1..=n {
                let lower = if k == 1 { 2.0 * coeffs[0] } else { coeffs[k - 1] };
                integrated[k] = (lower - coeffs[k + 1]) / (2.0 * k as f64);
            }
            let antiderivative = |th: f64| -> f64 {
                (1..=n).map(|k| integrated[k] * (k as f64 * th).cos()).sum()
            };
            let left = antiderivative(theta[0]);
            for row in 1..n {
                data[row * n + col] = antiderivative(theta[row]) - left;
            }
        }
        SpectralIntegrationMatrix { order: m, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.dim();
        &self.data[row * n..(row + 1) * n]
    }

    /// `scale * S · values`.
    pub fn apply(&self, values: &[f64], scale: f64) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(values.len(), n, "value vector has wrong length");
        (0..n)
            .map(|i| scale * self.row(i).iter().zip(values).map(|(s, v)| s * v).sum::<f64>())
            .collect()
    }
}

type MatrixCache = RwLock<HashMap<usize, Arc<SpectralIntegrationMatrix>>>;

fn cache() -> &'static MatrixCache {
    static CACHE: OnceLock<MatrixCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Spectral integration matrix of order `m`, built once per order.
pub fn spectral_integration_matrix(m: usize) -> Result<Arc<SpectralIntegrationMatrix>> {
    check_order(m)?;
    if let Some(s) = cache().read().expect("matrix cache poisoned").get(&m) {
        return Ok(Arc::clone(s));
    }
    let built = Arc::new(SpectralIntegrationMatrix::build(m));
    let mut guard = cache().write().expect("matrix cache poisoned");
    Ok(Arc::clone(guard.entry(m).or_insert(built)))
}

/// A function on `[ξ_0, ξ_n]` stored by its values on the `(m+1)`-point
/// Chebyshev grid of every subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseChebyshev {
    breakpoints: Vec<f64>,
    order: usize,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

pub(crate) fn validate_breakpoints(breakpoints: &[f64]) -> Result<()> {
    if breakpoints.len() < 2 {
        return Err(Error::InvalidPartition("need at least two breakpoints".into()));
    }
    if breakpoints.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidPartition("breakpoints must be finite".into()));
    }
    if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidPartition(format!(
            "breakpoints must be strictly increasing ({} >= {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Node coordinates for every interval of a partition, breakpoint-major.
pub(crate) fn partition_nodes(breakpoints: &[f64], m: usize) -> Vec<f64> {
    let reference = reference_nodes(m);
    let mut nodes = Vec::with_capacity((breakpoints.len() - 1) * (m + 1));
    for w in breakpoints.windows(2) {
        map_nodes(&reference, w[0], w[1], &mut nodes);
    }
    nodes
}

impl PiecewiseChebyshev {
    /// `values` holds `m + 1` node values per interval, interval by interval.
    pub fn new(breakpoints: Vec<f64>, order: usize, values: Vec<f64>) -> Result<Self> {
        check_order(order)?;
        validate_breakpoints(&breakpoints)?;
        let expected = (breakpoints.len() - 1) * (order + 1);
        if values.len() != expected {
            return Err(Error::InvalidParameters(format!(
                "expected {expected} node values, got {}",
                values.len()
            )));
        }
        let nodes = partition_nodes(&breakpoints, order);
        Ok(PiecewiseChebyshev { breakpoints, order, nodes, values })
    }

    /// Samples `f` at every node of the partition.
    pub fn from_fn(breakpoints: Vec<f64>, order: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_order(order)?;
        validate_breakpoints(&breakpoints)?;
        let nodes = partition_nodes(&breakpoints, order);
        let values = nodes.iter().map(|&t| f(t)).collect();
        Ok(PiecewiseChebyshev { breakpoints, order, nodes, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn a(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn b(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// All node values, interval by interval.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// All node coordinates, interval by interval.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interval_values(&self, j: usize) -> &[f64] {
        let n = self.order + 1;
        &self.values[j * n..(j + 1) * n]
    }

    pub fn interval_nodes(&self, j: usize) -> &[f64] {
        let n = self.order + 1;
        &self.nodes[j * n..(j + 1) * n]
    }

    /// Index of the subinterval used for `t`; interior breakpoints belong to
    /// the interval on their right.
    pub fn locate(&self, t: f64) -> Result<usize> {
        let (a, b) = (self.a(), self.b());
        if !(t >= a && t <= b) {
            return Err(Error::OutOfDomain { t, a, b });
        }
        let j = self.breakpoints.partition_point(|&x| x <= t);
        Ok(j.saturating_sub(1).min(self.intervals() - 1))
    }

    pub(crate) fn weights_at(&self, t: f64) -> Result<(usize, Barycentric)> {
        let j = self.locate(t)?;
        Ok((j, barycentric_weights(self.interval_nodes(j), t)))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (j, w) = self.weights_at(t)?;
        Ok(w.apply(self.interval_values(j)))
    }

    /// Largest relative disagreement between the last node of one interval
    /// and the first node of the next.
    pub fn breakpoint_mismatch(&self) -> f64 {
        let n = self.order + 1;
        (1..self.intervals())
            .map(|j| {
                let left = self.values[j * n - 1];
                let right = self.values[j * n];
                (left - right).abs() / left.abs().max(right.abs()).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// Derivative of the interpolant on every interval, by the barycentric
    /// differentiation matrix `D_ij = (w_j/w_i)/(x_i - x_j)`,
    /// `D_ii = -sum_{j != i} D_ij`.
    pub fn derivative(&self) -> PiecewiseChebyshev {
        let m = self.order;
        let n = m + 1;
        let w: Vec<f64> = (0..n)
            .map(|j| {
                let c = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == m { 0.5 * c } else { c }
            })
            .collect();
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.intervals() {
            let x = self.interval_nodes(j);
            let f = self.interval_values(j);
            for i in 0..n {
                let mut diag = 0.0;
                let mut acc = 0.0;
                for k in (0..n).filter(|&k| k != i) {
                    let d = w[k] / w[i] / (x[i] - x[k]);
                    diag -= d;
                    acc += d * f[k];
                }
                values.push(acc + diag * f[i]);
            }
        }
        PiecewiseChebyshev {
            breakpoints: self.breakpoints.clone(),
            order: m,
            nodes: self.nodes.clone(),
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PiecewiseChebyshev {
        PiecewiseChebyshev {
            breakpoints: self.breakpoints.clone(),
            order: self.order,
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Evaluates a piecewise Chebyshev function at `t`.
pub fn pc_eval(f: &PiecewiseChebyshev, t: f64) -> Result<f64> {
    f.eval(t)
}
