//! Dense real polynomials and root isolation on an interval.
//!
//! Roots are isolated by sign changes on a Chebyshev grid, bracketed roots are
//! refined by bisection and polished with Newton. That is enough for the low
//! degrees used here (at most 8) without exact arithmetic.

use serde::{Deserialize, Serialize};

/// Polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `t^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::new(vec![0.0]);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// All roots in `[lo, hi]` where the polynomial changes sign (or hits an
    /// exact zero on the sampling grid), sorted ascending.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let samples = 64 * (self.degree() + 1);
        isolate_roots(|t| self.eval(t), lo, hi, samples)
            .into_iter()
            .map(|r| newton_polish(|t| self.eval_with_derivative(t), r, lo, hi))
            .collect()
    }
}

/// Chebyshev–Lobatto points on `[lo, hi]`, ascending.
pub fn chebyshev_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut pts: Vec<f64> = (0..n)
        .map(|j| {
            let theta = std::f64::consts::PI * (n - 1 - j) as f64 / (n - 1) as f64;
            mid + half * theta.cos()
        })
        .collect();
    pts[0] = lo;
    pts[n - 1] = hi;
    pts
}

/// Sign-change isolation on a Chebyshev grid followed by bisection.
pub fn isolate_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let grid = chebyshev_grid(lo, hi, samples);
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && vals[i + 1] != 0.0 && vals[i].signum() != vals[i + 1].signum() {
            roots.push(bisect(&f, grid[i], grid[i + 1], 0.0));
        }
    }
    roots
}

/// Bisection on a sign-changing bracket down to floating-point resolution
/// (or `tol` in `t`, if positive).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (tol > 0.0 && hi - lo <= tol) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A few Newton steps from a bracketed estimate, kept only while they reduce
/// the residual and stay inside `[lo, hi]`.
pub fn newton_polish<F: Fn(f64) -> (f64, f64)>(f: F, x0: f64, lo: f64, hi: f64) -> f64 {
    let mut x = x0;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..8 {
        if fx == 0.0 || dfx == 0.0 {
            break;
        }
        let cand = x - fx / dfx;
        if !(lo..=hi).contains(&cand) {
            break;
        }
        let (fc, dfc) = f(cand);
        if fc.abs() >= fx.abs() {
            break;
        }
        x = cand;
        fx = fc;
        dfx = dfc;
    }
    x
}
