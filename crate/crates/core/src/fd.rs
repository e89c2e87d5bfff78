//! Finite differences on sampled profiles and a smooth interpolant for
//! evaluating them off-grid.

use nalgebra::{DMatrix, DVector};

/// Fornberg's recursion: weights for derivatives `0..=m` at `z` from nodes `xs`.
/// Returns `w[k][j]`, the weight of node `j` for the `k`-th derivative.
pub fn fornberg_weights(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative of the given order at every grid node, using `width`-point
/// stencils centered where possible and shifted inward near the ends.
pub fn derivative_on_grid(t: &[f64], values: &[f64], order: usize, width: usize) -> Vec<f64> {
    let n = t.len();
    assert_eq!(n, values.len());
    assert!(width <= n && width > order);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let nodes = &t[start..start + width];
            let w = fornberg_weights(t[i], nodes, order);
            w[order]
                .iter()
                .zip(&values[start..start + width])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// One-sided derivative of the given order at an end of the grid from the
/// `points` samples nearest that end. With five points the first derivative
/// is fourth-order accurate.
pub fn one_sided_derivative(t: &[f64], values: &[f64], order: usize, points: usize, at_start: bool) -> f64 {
    let n = t.len();
    let range = if at_start { 0..points } else { n - points..n };
    let z = if at_start { t[0] } else { t[n - 1] };
    let w = fornberg_weights(z, &t[range.clone()], order);
    w[order].iter().zip(&values[range]).map(|(a, b)| a * b).sum()
}

/// Least-squares polynomial in `u = (t − t_end)/δ` over the samples within
/// `δ` of an endpoint; returns the coefficients and the window's max `|v|`.
pub fn endpoint_fit(t: &[f64], v: &[f64], at_start: bool, width: f64, degree: usize) -> (Vec<f64>, f64) {
    let n = t.len();
    let end = if at_start { t[0] } else { t[n - 1] };
    let idx: Vec<usize> = (0..n).filter(|&i| (t[i] - end).abs() <= width).collect();
    let m = DMatrix::from_fn(idx.len(), degree + 1, |row, col| ((t[idx[row]] - end) / width).powi(col as i32));
    let rhs = DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]));
    let coeffs = m
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map(|c| c.iter().copied().collect())
        .unwrap_or_else(|_| vec![f64::NAN; degree + 1]);
    let scale = max_abs(idx.iter().map(|&i| v[i]));
    (coeffs, scale)
}

/// Floater–Hormann rational interpolant: infinitely smooth, pole-free on the
/// real line, `O(Δ^{d+1})` accurate on equispaced data.
#[derive(Debug, Clone)]
pub struct RationalInterpolant {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RationalInterpolant {
    pub fn new(nodes: &[f64], degree: usize) -> Self {
        let n = nodes.len();
        let d = degree.min(n - 1);
        let mut weights = vec![0.0; n];
        for (k, w) in weights.iter_mut().enumerate() {
            let lo = k.saturating_sub(d);
            let hi = k.min(n - 1 - d);
            let mut sum = 0.0;
            for i in lo..=hi {
                let mut prod = 1.0;
                for j in i..=i + d {
                    if j != k {
                        prod /= (nodes[k] - nodes[j]).abs();
                    }
                }
                sum += prod;
            }
            *w = if k % 2 == 1 { -sum } else { sum };
        }
        RationalInterpolant {
            nodes: nodes.to_vec(),
            weights,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// Interpolated values of several sampled columns at `t`.
    pub fn eval_columns<const M: usize>(&self, t: f64, columns: [&[f64]; M]) -> [f64; M] {
        let mut num = [0.0; M];
        let mut den = 0.0;
        for (k, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let diff = t - x;
            if diff == 0.0 {
                return columns.map(|c| c[k]);
            }
            let lam = w / diff;
            den += lam;
            for (acc, col) in num.iter_mut().zip(columns.iter()) {
                *acc += lam * col[k];
            }
        }
        num.map(|v| v / den)
    }
}

/// `max |v|`, propagating NaN so broken samples never look like passes.
pub fn max_abs<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().fold(0.0, |m: f64, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(v.abs())
        }
    })
}
