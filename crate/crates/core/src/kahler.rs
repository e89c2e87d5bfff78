//! The Kähler branch `A = 0` over a hyperbolic base (`K = −4`, `C = 0`).
//!
//! Here `P(g) = −(D/8)g⁴ + E/g⁴ + 1` with `E = (s² − 4)/(2D)`, the profile
//! solves `g″ = ½P′(g)` between the two positive roots of `P`, and
//! `f = g·g′/s`. Solutions exist exactly for `0 < s < 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::turning::Potential;
use crate::poly::{chebyshev_grid, Polynomial};
use crate::profile::{profile_from_g, solve_potential, Construction, FamilyTag};
use crate::report::VerificationReport;

pub const CURVATURE: i32 = -4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KahlerSpec {
    pub s: f64,
    pub d: f64,
    pub e: f64,
    /// Lower root of `P`.
    pub y: f64,
    /// Upper root of `P`.
    pub x: f64,
}

impl KahlerSpec {
    pub fn new(s: f64, d: f64) -> Result<Self> {
        if !(s > 0.0 && s < 2.0) {
            return Err(Error::infeasible("Kähler profiles need 0 < s < 2", s));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParams(format!("need D > 0, got {d}")));
        }
        Ok(KahlerSpec {
            s,
            d,
            e: (s * s - 4.0) / (2.0 * d),
            y: (2.0 * (2.0 - s) / d).powf(0.25),
            x: (2.0 * (2.0 + s) / d).powf(0.25),
        })
    }

    /// `(P(g), P′(g))`.
    pub fn p(&self, g: f64) -> Result<(f64, f64)> {
        if !(g > 0.0) {
            return Err(Error::InvalidParams(format!("P is evaluated at g > 0, got {g}")));
        }
        Ok(self.p_unchecked(g))
    }

    fn p_unchecked(&self, g: f64) -> (f64, f64) {
        let g4 = g.powi(4);
        let value = -self.d / 8.0 * g4 + self.e / g4 + 1.0;
        let slope = -self.d / 2.0 * g * g * g - 4.0 * self.e / (g4 * g);
        (value, slope)
    }

    /// `P′ + 4P/g + K/g + D·g³ + C·g`, which vanishes identically.
    pub fn ode_residual(&self, g: f64) -> Result<f64> {
        let (p, dp) = self.p(g)?;
        Ok(dp + 4.0 * p / g + CURVATURE as f64 / g + self.d * g.powi(3))
    }

    /// `g⁴·P(g)` as a polynomial in `u = g²`: `−(D/8)u⁴ + u² + E`.
    pub fn cleared_polynomial(&self) -> Polynomial {
        Polynomial::new(vec![self.e, 0.0, 1.0, 0.0, -self.d / 8.0])
    }

    /// Positive roots of `P`, located on `(0, 2x]` through the cleared
    /// polynomial in `u = g²`.
    pub fn positive_roots(&self) -> Vec<f64> {
        let hi = 4.0 * self.x * self.x;
        self.cleared_polynomial()
            .roots_in(0.0, hi)
            .into_iter()
            .filter(|&u| u > 0.0)
            .map(f64::sqrt)
            .collect()
    }
}

impl Potential for KahlerSpec {
    fn value(&self, g: f64) -> f64 {
        self.p_unchecked(g).0
    }
    fn slope(&self, g: f64) -> f64 {
        self.p_unchecked(g).1
    }
}

/// `P(y)`, `P(x)`, `½yP′(y) − s`, `½xP′(x) + s`, the root count and
/// positivity of `P` between the roots.
pub fn kahler_boundary_residuals(spec: &KahlerSpec) -> VerificationReport {
    let mut r = VerificationReport::new("kahler-boundary");
    let tol = 1e-12;
    let (py, dpy) = spec.p_unchecked(spec.y);
    let (px, dpx) = spec.p_unchecked(spec.x);
    r.check("P(y) = 0", py, tol);
    r.check("P(x) = 0", px, tol);
    r.check("y P'(y)/2 = s", 0.5 * spec.y * dpy - spec.s, tol);
    r.check("x P'(x)/2 = -s", 0.5 * spec.x * dpx + spec.s, tol);
    r.check("(s+2) y^4 + (s-2) x^4 = 0", (spec.s + 2.0) * spec.y.powi(4) + (spec.s - 2.0) * spec.x.powi(4), tol);
    let roots = spec.positive_roots();
    r.assert_true("two positive roots", roots.len() == 2, roots.len() as f64);
    let grid = chebyshev_grid(spec.y, spec.x, 256);
    let min_inside = grid[1..grid.len() - 1]
        .iter()
        .map(|&g| spec.p_unchecked(g).0)
        .fold(f64::INFINITY, f64::min);
    r.assert_true("P > 0 on (y, x)", min_inside > 0.0, min_inside);
    r
}

/// End-to-end profile: `g″ = ½P′(g)` from `y` to `x`, then `f = g·g′/s`.
pub fn kahler_profile(spec: &KahlerSpec) -> Result<Construction> {
    let boundary = kahler_boundary_residuals(spec);
    if let Some(bad) = boundary.failures().next() {
        return Err(Error::infeasible(bad.name.clone(), bad.value));
    }
    let (sol, a_quadrature) = solve_potential(spec, spec.y, spec.x)?;
    let s = spec.s;
    let profile = profile_from_g(&sol, s, CURVATURE, FamilyTag::Kahler, |g, dg| g * dg / s);
    Ok(Construction {
        a_ode: profile.a,
        a_quadrature,
        energy_residual: sol.energy_residual,
        profile,
    })
}
