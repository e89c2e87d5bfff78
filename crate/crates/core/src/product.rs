//! The `k = 0` product family over a hyperbolic base.
//!
//! With `s = 0`, `K = −4` and `f = g′`, the profile solves `g″ = ½P′(g)` for
//! `P(g) = A/g + B·g⁴ + C·g² + 4`. The endpoints `y < x = α·y` are closed-form
//! in `α > 1`; `(A, B, C)` come from `P(y) = P(x) = 0`, `P′(y) = 2`, and
//! `P′(x) = −2` is the consistency residual.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::turning::Potential;
use crate::poly::chebyshev_grid;
use crate::profile::{profile_from_g, solve_potential, Construction, FamilyTag};

pub const CURVATURE: i32 = -4;

/// Below this `α − 1` the endpoints collapse towards zero.
const NEAR_DEGENERATE: f64 = 1e-2;

/// `y = 4(α−1)(α²+3α+1)/(α(2α²+α+2))`, `x = α·y`.
pub fn product_endpoints(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParams(format!("need alpha > 1, got {alpha}")));
    }
    if alpha - 1.0 < NEAR_DEGENERATE {
        log::warn!("alpha = {alpha} is close to 1: both endpoints tend to 0");
    }
    let y = 4.0 * (alpha - 1.0) * (alpha * alpha + 3.0 * alpha + 1.0)
        / (alpha * (2.0 * alpha * alpha + alpha + 2.0));
    Ok((y, alpha * y))
}

/// `(P(g), P′(g))` for coefficients `[A, B, C]`.
fn p_eval(coeffs: [f64; 3], g: f64) -> (f64, f64) {
    let [a, b, c] = coeffs;
    let g2 = g * g;
    (a / g + b * g2 * g2 + c * g2 + 4.0, -a / g2 + 4.0 * b * g2 * g + 2.0 * c * g)
}

/// Solves `P(y) = 0`, `P(x) = 0`, `P′(y) = 2` for `(A, B, C)`; errors with
/// an infeasibility unless `P′(x) = −2` holds to `1e−8` relative.
pub fn product_solve_coeffs(y: f64, x: f64) -> Result<[f64; 3]> {
    if !(0.0 < y && y < x) {
        return Err(Error::InvalidParams(format!("need 0 < y < x, got y = {y}, x = {x}")));
    }
    let row = |g: f64| [1.0 / g, g.powi(4), g * g];
    let drow = |g: f64| [-1.0 / (g * g), 4.0 * g.powi(3), 2.0 * g];
    let (ry, rx, dy) = (row(y), row(x), drow(y));
    let m = Matrix3::new(
        ry[0], ry[1], ry[2], //
        rx[0], rx[1], rx[2], //
        dy[0], dy[1], dy[2],
    );
    let sol = m
        .lu()
        .solve(&Vector3::new(-4.0, -4.0, 2.0))
        .ok_or_else(|| Error::RankDeficient(format!("endpoint system singular at y = {y}, x = {x}")))?;
    let coeffs = [sol[0], sol[1], sol[2]];
    let residual = p_eval(coeffs, x).1 + 2.0;
    let scale = sol.amax().max(1.0) * x.powi(3).max(1.0);
    if residual.abs() > 1e-8 * scale {
        return Err(Error::infeasible("P'(x) = -2", residual));
    }
    Ok(coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub alpha: f64,
    pub y: f64,
    pub x: f64,
    pub a3: f64,
    pub b3: f64,
    pub c3: f64,
}

impl ProductSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        let (y, x) = product_endpoints(alpha)?;
        let [a3, b3, c3] = product_solve_coeffs(y, x)?;
        Ok(ProductSpec { alpha, y, x, a3, b3, c3 })
    }

    pub fn p(&self, g: f64) -> (f64, f64) {
        p_eval([self.a3, self.b3, self.c3], g)
    }

    pub fn p_second(&self, g: f64) -> f64 {
        2.0 * self.a3 / g.powi(3) + 12.0 * self.b3 * g * g + 2.0 * self.c3
    }

    /// `g²P″ − 2gP′ − 4P + 16 + 6C·g²`, which vanishes identically.
    pub fn ode_residual(&self, g: f64) -> f64 {
        let (p, dp) = self.p(g);
        g * g * self.p_second(g) - 2.0 * g * dp - 4.0 * p + 16.0 + 6.0 * self.c3 * g * g
    }

    /// Effective curvature scale `D = −5B`, from `λ − μ = D·g²`.
    pub fn effective_d(&self) -> f64 {
        -5.0 * self.b3
    }

    /// `C > 0` and `A, B < 0`.
    pub fn sign_pattern_holds(&self) -> bool {
        self.c3 > 0.0 && self.a3 < 0.0 && self.b3 < 0.0
    }

    /// Smallest value of `P` on an interior grid of `(y, x)`.
    pub fn interior_min(&self) -> f64 {
        let grid = chebyshev_grid(self.y, self.x, 256);
        grid[1..grid.len() - 1]
            .iter()
            .map(|&g| self.p(g).0)
            .fold(f64::INFINITY, f64::min)
    }
}

impl Potential for ProductSpec {
    fn value(&self, g: f64) -> f64 {
        self.p(g).0
    }
    fn slope(&self, g: f64) -> f64 {
        self.p(g).1
    }
}

/// `λ = −10B·h² − 3C` (radial and fibre) and `μ = −5B·h² − 3C` (base).
pub fn product_eigenvalues(spec: &ProductSpec, h: f64) -> (f64, f64) {
    let h2 = h * h;
    (-10.0 * spec.b3 * h2 - 3.0 * spec.c3, -5.0 * spec.b3 * h2 - 3.0 * spec.c3)
}

/// End-to-end profile: `g″ = ½P′(g)` from `y` to `x`, `f = g′`.
pub fn product_profile(spec: &ProductSpec) -> Result<Construction> {
    let min = spec.interior_min();
    if !(min > 0.0) {
        return Err(Error::infeasible("P > 0 on (y, x)", min));
    }
    let (sol, a_quadrature) = solve_potential(spec, spec.y, spec.x)?;
    let profile = profile_from_g(&sol, 0.0, CURVATURE, FamilyTag::Product, |_, dg| dg);
    Ok(Construction {
        a_ode: profile.a,
        a_quadrature,
        energy_residual: sol.energy_residual,
        profile,
    })
}
