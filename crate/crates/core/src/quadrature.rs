//! Gauss–Legendre rules, 1D and tensor-product over axis-aligned boxes.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Nodes are found by Newton iteration on the Legendre recurrence, seeded with
/// the Chebyshev-like estimate cos(π(i + 3/4)/(n + 1/2)). Exact for polynomials
/// of degree 2n - 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss rule over an axis-aligned box.
#[derive(Clone, Debug)]
pub struct BoxRule {
    /// Reference points in [0, 1]^dim, flattened `dim` at a time.
    unit_points: Vec<f64>,
    /// Weights summing to 1.
    unit_weights: Vec<f64>,
    dim: usize,
}

impl BoxRule {
    pub fn new(dim: usize, points_per_axis: usize) -> Self {
        let (x, w) = gauss_legendre(points_per_axis);
        let npts = points_per_axis.pow(dim as u32);
        let mut unit_points = Vec::with_capacity(npts * dim);
        let mut unit_weights = Vec::with_capacity(npts);
        let mut idx = vec![0usize; dim];
        for _ in 0..npts {
            let mut wt = 1.0;
            for &k in &idx {
                unit_points.push(0.5 * (x[k] + 1.0));
                wt *= 0.5 * w[k];
            }
            unit_weights.push(wt);
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < points_per_axis {
                    break;
                }
                *slot = 0;
            }
        }
        Self { unit_points, unit_weights, dim }
    }

    pub fn len(&self) -> usize {
        self.unit_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit_weights.is_empty()
    }

    /// Integrate `f` over the box `[lower, lower + width]`.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, lower: &[f64], width: &[f64], mut f: F) -> f64 {
        let vol: f64 = width.iter().product();
        let mut x = vec![0.0; self.dim];
        let mut acc = 0.0;
        for (k, &w) in self.unit_weights.iter().enumerate() {
            let p = &self.unit_points[k * self.dim..(k + 1) * self.dim];
            for a in 0..self.dim {
                x[a] = lower[a] + width[a] * p[a];
            }
            acc += w * f(&x);
        }
        acc * vol
    }
}

/// Composite Gauss–Legendre integral of `f` on [a, b] with `panels` panels.
pub fn composite_gauss<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, points: usize, mut f: F) -> f64 {
    let (x, w) = gauss_legendre(points);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc += wi * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    acc * 0.5 * h
}
