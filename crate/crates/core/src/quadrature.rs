//! Half-period integrals `∫ du/√Q(u)` between simple roots of `Q`.
//!
//! Near each root `r` the substitution `u = r ∓ w²` turns the inverse
//! square-root singularity into the analytic integrand `2w/√Q(r ∓ w²)`, so a
//! composite Gauss–Legendre rule converges spectrally on both halves.

use crate::error::{Error, Result};
use crate::gray::{BoundaryPair, ProfilePolynomial};
use crate::turning::Potential;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const PANELS: usize = 8;
const ORDER: usize = 24;

fn composite<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let width = (hi - lo) / PANELS as f64;
    let mut sum = 0.0;
    for p in 0..PANELS {
        let a = lo + p as f64 * width;
        let mid = a + 0.5 * width;
        for (x, w) in nodes.iter().zip(weights) {
            sum += w * f(mid + 0.5 * width * x);
        }
    }
    0.5 * width * sum
}

/// `∫_{x₀}^{x₁} du/√Q(u)` for simple roots `x₀ < x₁` with `Q > 0` between.
pub fn period_integral<P: Potential + ?Sized>(q: &P, x0: f64, x1: f64) -> Result<f64> {
    if !(x0 < x1) {
        return Err(Error::InvalidParams(format!("need x0 < x1, got [{x0}, {x1}]")));
    }
    let mid = 0.5 * (x0 + x1);
    let scale = q.value(mid).abs().max(f64::MIN_POSITIVE) / (x1 - x0);
    let (d0, d1) = (q.slope(x0), q.slope(x1));
    if !(d0 > 1e-8 * scale) || !(d1 < -1e-8 * scale) {
        return Err(Error::DivergentIntegral(format!(
            "roots are not simple: Q'(x0) = {d0:e}, Q'(x1) = {d1:e}"
        )));
    }
    let (nodes, weights) = gauss_legendre(ORDER);
    let half = (0.5 * (x1 - x0)).sqrt();
    let lower = composite(|w| 2.0 * w / q.value(x0 + w * w).sqrt(), 0.0, half, &nodes, &weights);
    let upper = composite(|w| 2.0 * w / q.value(x1 - w * w).sqrt(), 0.0, half, &nodes, &weights);
    let total = lower + upper;
    if !total.is_finite() {
        return Err(Error::DivergentIntegral(format!(
            "integrand not finite on [{x0}, {x1}] (Q ≤ 0 inside?)"
        )));
    }
    Ok(total)
}

/// `z(h) = z₀(h/s)` as a potential in `h`.
#[derive(Debug, Clone)]
pub struct GrayPotential<'a> {
    pub poly: &'a ProfilePolynomial,
    pub s: f64,
}

impl Potential for GrayPotential<'_> {
    fn value(&self, h: f64) -> f64 {
        self.poly.z0(h / self.s)
    }
    fn slope(&self, h: f64) -> f64 {
        self.poly.z0_with_derivative(h / self.s).1 / self.s
    }
}

/// Half-domain length `a = ½∫_{sy}^{sx} dh/√z₀(h/s)`: the profile runs on
/// `[−a, a]` while `h` sweeps `[sy, sx]` once.
pub fn half_period(poly: &ProfilePolynomial, s: f64, pair: &BoundaryPair) -> Result<f64> {
    let q = GrayPotential { poly, s };
    Ok(0.5 * period_integral(&q, s * pair.y, s * pair.x)?)
}
