//! Algebra of the Gray (𝒜𝒞) families: the rational profile `z₀`, its
//! numerator polynomial `P`, the linear solves for the coefficients, the
//! compatibility function `G(x, y)` and the threshold search for the
//! asymmetric family.
//!
//! Coefficients exist on two scales. The raw `(C, D, E)` enter `μ = D·g² − C`
//! directly; the normalized ones `(C·s², D·s⁴, E/s)` are what every formula in
//! the `t = h/s` variable uses. [`Coefficients`] stores both and is only built
//! through one-way constructors so the two never drift apart.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Branch, Sign};
use crate::poly::{chebyshev_grid, Polynomial};

/// `(C, D, E)` on both the raw and the normalized scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub c_norm: f64,
    pub d_norm: f64,
    pub e_norm: f64,
    pub c_raw: f64,
    pub d_raw: f64,
    pub e_raw: f64,
    pub s: f64,
}

impl Coefficients {
    pub fn from_normalized(c_norm: f64, d_norm: f64, e_norm: f64, s: f64) -> Self {
        assert!(s > 0.0, "coefficient scales need s > 0");
        Coefficients {
            c_norm,
            d_norm,
            e_norm,
            c_raw: c_norm / (s * s),
            d_raw: d_norm / s.powi(4),
            e_raw: e_norm * s,
            s,
        }
    }

    pub fn from_raw(c_raw: f64, d_raw: f64, e_raw: f64, s: f64) -> Self {
        assert!(s > 0.0, "coefficient scales need s > 0");
        Coefficients {
            c_norm: c_raw * s * s,
            d_norm: d_raw * s.powi(4),
            e_norm: e_raw / s,
            c_raw,
            d_raw,
            e_raw,
            s,
        }
    }

    fn magnitude(&self) -> f64 {
        self.c_norm
            .abs()
            .max(self.d_norm.abs())
            .max(self.e_norm.abs())
    }
}

/// Which construction produced a [`ProfilePolynomial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Coefficients,
    SymmetricClosedForm,
    Einstein,
}

/// Numerator `P` of `z₀(t) = P(t)/(1 − t²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePolynomial {
    pub poly: Polynomial,
    pub eps: Sign,
    pub provenance: Provenance,
}

impl ProfilePolynomial {
    pub fn z0(&self, t: f64) -> f64 {
        self.poly.eval(t) / (1.0 - t * t)
    }

    /// `(z₀(t), z₀′(t))`.
    pub fn z0_with_derivative(&self, t: f64) -> (f64, f64) {
        let (p, dp) = self.poly.eval_with_derivative(t);
        let w = 1.0 - t * t;
        (p / w, dp / w + 2.0 * t * p / (w * w))
    }

    pub fn second_derivative_z0(&self, t: f64) -> f64 {
        let p = self.poly.eval(t);
        let dp = self.poly.derivative().eval(t);
        let ddp = self.poly.derivative().derivative().eval(t);
        let w = 1.0 - t * t;
        ddp / w + 4.0 * t * dp / (w * w) + p * (2.0 / (w * w) + 8.0 * t * t / (w * w * w))
    }
}

/// Boundary roots `y < x` of `z₀` on one branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPair {
    pub x: f64,
    pub y: f64,
    pub branch: Branch,
}

impl BoundaryPair {
    pub fn new(x: f64, y: f64, branch: Branch) -> Result<Self> {
        let ok = y < x
            && match branch {
                Branch::Minus => x < 1.0 && y > -1.0,
                Branch::Plus => y > 1.0,
                Branch::Zero => false,
            };
        if !ok {
            return Err(Error::InvalidParams(format!(
                "boundary pair (x={x}, y={y}) invalid for branch {branch:?}"
            )));
        }
        Ok(BoundaryPair { x, y, branch })
    }

    pub fn symmetric(x: f64) -> Result<Self> {
        Self::new(x, -x, Branch::Minus)
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x + self.y).abs() <= 1e-12 * self.x.abs().max(1.0)
    }
}

/// `z₀(t)` straight from its rational form.
pub fn z0_eval(coeffs: &Coefficients, eps: Sign, t: f64) -> Result<f64> {
    let w = 1.0 - t * t;
    if w.abs() < f64::EPSILON {
        return Err(Error::Degenerate {
            what: "z0 pole at t = ±1",
            value: t,
        });
    }
    let (c, d, e) = (coeffs.c_norm, coeffs.d_norm, coeffs.e_norm);
    let t2 = t * t;
    let num = -4.0 * eps.value() * (1.0 + t2)
        + d * (-t2 * t2 * t2 / 5.0 + t2 * t2 - 3.0 * t2 - 1.0)
        + c * (-t2 * t2 / 3.0 + 2.0 * t2 + 1.0)
        + e * t;
    Ok(num / w)
}

/// Numerator polynomial of `z₀` for the given coefficients.
pub fn p_poly(coeffs: &Coefficients, eps: Sign) -> ProfilePolynomial {
    let (c, d, e) = (coeffs.c_norm, coeffs.d_norm, coeffs.e_norm);
    let ev = eps.value();
    ProfilePolynomial {
        poly: Polynomial::new(vec![
            -4.0 * ev + c - d,
            e,
            -4.0 * ev + 2.0 * c - 3.0 * d,
            0.0,
            d - c / 3.0,
            0.0,
            -d / 5.0,
        ]),
        eps,
        provenance: Provenance::Coefficients,
    }
}

const DEGENERACY_TOL: f64 = 1e-12;

/// Closed-form `(C, D)` (normalized) making `x` a simple root of `z₀` with
/// `z₀′(x) = −2s`, for a given `E`.
pub fn solve_cd(x: f64, e: f64, s: f64, eps: Sign) -> Result<(f64, f64)> {
    let ev = eps.value();
    let x2 = x * x;
    let quartic = 15.0 + 10.0 * x2 - x2 * x2;
    for (what, v) in [
        ("x near 0", x),
        ("x near ±1", 1.0 - x2),
        ("15 + 10x² − x⁴ near 0", quartic),
    ] {
        if v.abs() < DEGENERACY_TOL {
            return Err(Error::Degenerate { what, value: x });
        }
    }
    let base = 2.0 * (x - 1.0) * x * (x + 1.0);
    let d = 5.0
        * (-3.0 * e - 6.0 * s - 24.0 * ev * x + 3.0 * e * x2 - 12.0 * s * x2 - 8.0 * ev * x2 * x
            + 2.0 * s * x2 * x2)
        / (base * quartic);
    let c = 3.0
        * (5.0 * e + 10.0 * s + 80.0 * ev * x + 30.0 * s * x2 - 10.0 * e * x2
            + 5.0 * e * x2 * x2
            - 10.0 * s * x2 * x2
            - 16.0 * ev * x2 * x2 * x
            + 2.0 * s * x2 * x2 * x2)
        / (base * -quartic);
    Ok((c, d))
}

/// Basis of `P` in the unknowns `(C, D, E)`: `P(t) = C·b_C + D·b_D + E·t − 4ε(1 + t²)`.
fn basis(t: f64) -> ([f64; 3], [f64; 3]) {
    let t2 = t * t;
    let value = [
        1.0 + 2.0 * t2 - t2 * t2 / 3.0,
        -1.0 - 3.0 * t2 + t2 * t2 - t2 * t2 * t2 / 5.0,
        t,
    ];
    let slope = [
        4.0 * t - 4.0 * t2 * t / 3.0,
        -6.0 * t + 4.0 * t2 * t - 6.0 * t2 * t2 * t / 5.0,
        1.0,
    ];
    (value, slope)
}

/// Solves `z₀(y) = 0`, `z₀(x) = 0`, `z₀′(x) = −2s` for `(C, D, E)` and accepts
/// the result only if the remaining condition `z₀′(y) = 2s` also holds.
pub fn solve_cde_pair(pair: &BoundaryPair, s: f64, eps: Sign) -> Result<Coefficients> {
    let ev = eps.value();
    let (x, y) = (pair.x, pair.y);
    let (vy, _) = basis(y);
    let (vx, sx) = basis(x);
    let m = Matrix3::new(
        vy[0], vy[1], vy[2], //
        vx[0], vx[1], vx[2], //
        sx[0], sx[1], sx[2],
    );
    // At a root of P, z₀′ = P′/(1 − t²).
    let rhs = Vector3::new(
        4.0 * ev * (1.0 + y * y),
        4.0 * ev * (1.0 + x * x),
        8.0 * ev * x - 2.0 * s * (1.0 - x * x),
    );
    let sv = m.singular_values();
    let cond_inv = sv.min() / sv.max();
    if !(cond_inv > 1e-14) {
        return Err(Error::RankDeficient(format!(
            "boundary system at (x={x}, y={y}) has reciprocal condition {cond_inv:e}"
        )));
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::RankDeficient(format!("LU failed at (x={x}, y={y})")))?;
    let coeffs = Coefficients::from_normalized(sol[0], sol[1], sol[2], s);
    let poly = p_poly(&coeffs, eps);
    let (_, dz_y) = poly.z0_with_derivative(y);
    let residual = dz_y - 2.0 * s;
    if residual.abs() > 1e-8 * coeffs.magnitude().max(1.0) {
        return Err(Error::infeasible("z0'(y) = 2s", residual));
    }
    Ok(coeffs)
}

/// The compatibility function `G(x, y)`.
pub fn g_function(x: f64, y: f64, s: f64, eps: Sign) -> f64 {
    let ev = eps.value();
    -4.0 * ev * (-5.0 * x + x.powi(3) + 5.0 * y + 2.0 * x * x * y - 2.0 * x * y * y - y.powi(3))
        + s * (5.0 + 2.0 * x.powi(3) * y + 2.0 * x * y.powi(3) + 3.0 * y * y + 3.0 * x * x
            + x * x * y * y
            - 16.0 * x * y)
}

/// `(x + y)·G(x, y)`: zero exactly when the four boundary conditions are compatible.
pub fn compatibility_lhs(x: f64, y: f64, s: f64, eps: Sign) -> f64 {
    (x + y) * g_function(x, y, s, eps)
}

/// `(∂G/∂x, ∂G/∂y)`.
pub fn g_partials(x: f64, y: f64, s: f64, eps: Sign) -> (f64, f64) {
    let ev = eps.value();
    let gx = -4.0 * ev * (-5.0 + 3.0 * x * x + 4.0 * x * y - 2.0 * y * y)
        + 2.0 * s * (3.0 * x * x * y + y * y * x + 3.0 * x - 8.0 * y + y.powi(3));
    let gy = -4.0 * ev * (5.0 + 2.0 * x * x - 4.0 * x * y - 3.0 * y * y)
        + 2.0 * s * (x.powi(3) + 3.0 * y + x * x * y - 8.0 * x + 3.0 * x * y * y);
    (gx, gy)
}

fn g_hessian(x: f64, y: f64, s: f64, eps: Sign) -> [[f64; 2]; 2] {
    let ev = eps.value();
    let gxx = -4.0 * ev * (6.0 * x + 4.0 * y) + 2.0 * s * (6.0 * x * y + y * y + 3.0);
    let gxy = -4.0 * ev * (4.0 * x - 4.0 * y) + 2.0 * s * (3.0 * x * x + 2.0 * x * y + 3.0 * y * y - 8.0);
    let gyy = -4.0 * ev * (-4.0 * x - 6.0 * y) + 2.0 * s * (6.0 * x * y + 3.0 + x * x);
    [[gxx, gxy], [gxy, gyy]]
}

/// `G(x, ·)` as a cubic in `y`.
fn g_as_cubic_in_y(x: f64, s: f64, eps: Sign) -> Polynomial {
    let ev = eps.value();
    Polynomial::new(vec![
        -4.0 * ev * (-5.0 * x + x.powi(3)) + s * (5.0 + 3.0 * x * x),
        -4.0 * ev * (5.0 + 2.0 * x * x) + s * (2.0 * x.powi(3) - 16.0 * x),
        8.0 * ev * x + s * (3.0 + x * x),
        4.0 * ev + 2.0 * s * x,
    ])
}

/// Even polynomial `P` of the symmetric family `y = −x`, `E = 0`, from its
/// factored closed form.
pub fn symmetric_p(x: f64, s: f64, eps: Sign) -> Result<ProfilePolynomial> {
    let x2 = x * x;
    let den = 15.0 - 5.0 * x2 - 11.0 * x2 * x2 + x2 * x2 * x2;
    if x.abs() < DEGENERACY_TOL || den.abs() < DEGENERACY_TOL {
        return Err(Error::Degenerate {
            what: "x(15 − 5x² − 11x⁴ + x⁶) near 0",
            value: x,
        });
    }
    let ex = 4.0 * eps.value() * x;
    let c0 = s * (-15.0 + 10.0 * x2 - 3.0 * x2 * x2) + ex * x2 * (x2 - 5.0);
    let c2 = s * (10.0 + 12.0 * x2 - 6.0 * x2 * x2) + ex * (5.0 + 2.0 * x2 + x2 * x2);
    let c4 = s * (-3.0 - 6.0 * x2 + x2 * x2) - ex * (3.0 + x2);
    let scale = 1.0 / (x * den);
    Ok(ProfilePolynomial {
        poly: Polynomial::new(vec![
            -x2 * c0 * scale,
            0.0,
            (c0 - x2 * c2) * scale,
            0.0,
            (c2 - x2 * c4) * scale,
            0.0,
            c4 * scale,
        ]),
        eps,
        provenance: Provenance::SymmetricClosedForm,
    })
}

/// Upper end `ε_s` of the symmetric family's parameter interval `(0, ε_s)`.
pub fn eps_s(s: f64, eps: Sign) -> f64 {
    if eps != Sign::Minus || s >= 2.0 {
        return 1.0;
    }
    // −4x³(x² − 5) + s(−15 + 10x² − 3x⁴)
    let p = Polynomial::new(vec![-15.0 * s, 0.0, 10.0 * s, 20.0, -3.0 * s, -4.0]);
    match p.roots_in(0.0, 1.0).into_iter().find(|&r| r > 0.0) {
        Some(r) => r,
        None => {
            log::warn!("eps_s: no root of the threshold quintic bracketed in (0, 1] at s = {s}");
            1.0
        }
    }
}

/// True iff `z₀ > 0` on the open interval `(y, x)` with simple roots at both ends.
pub fn positivity_check(poly: &ProfilePolynomial, pair: &BoundaryPair) -> bool {
    let (y, x) = (pair.y, pair.x);
    if !(y < x) || (y < -1.0 && x > -1.0) || (y < 1.0 && x > 1.0) {
        return false;
    }
    let scale = poly.poly.max_abs_coeff().max(1.0);
    for end in [y, x] {
        let (p, dp) = poly.poly.eval_with_derivative(end);
        if p.abs() > 1e-9 * scale || dp.abs() <= 1e-8 {
            return false;
        }
    }
    let mid = 0.5 * (x + y);
    let denom_sign = (1.0 - mid * mid).signum();
    let width = x - y;
    let interior_root = poly
        .poly
        .roots_in(y, x)
        .into_iter()
        .any(|r| r - y > 1e-10 * width && x - r > 1e-10 * width);
    if interior_root {
        return false;
    }
    let grid = chebyshev_grid(y, x, 512);
    grid[1..grid.len() - 1]
        .iter()
        .all(|&t| poly.poly.eval(t) * denom_sign > 0.0)
}

/// A feasible pair off the diagonal `x = −y` together with its coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricSolution {
    pub pair: BoundaryPair,
    pub coeffs: Coefficients,
    pub poly: ProfilePolynomial,
}

fn try_pair(x: f64, y: f64, s: f64, eps: Sign, branch: Branch) -> Option<AsymmetricSolution> {
    let pair = BoundaryPair::new(x, y, branch).ok()?;
    let coeffs = solve_cde_pair(&pair, s, eps).ok()?;
    let poly = p_poly(&coeffs, eps);
    positivity_check(&poly, &pair).then_some(AsymmetricSolution { pair, coeffs, poly })
}

fn branch_y_range(x: f64, branch: Branch) -> (f64, f64) {
    match branch {
        Branch::Plus => (1.0, x),
        _ => (-1.0, x),
    }
}

/// Candidates `y` on `G(x, ·) = 0` within the branch domain, off the diagonal.
fn candidate_ys(x: f64, s: f64, eps: Sign, branch: Branch, min_offset: f64) -> Vec<f64> {
    let (lo, hi) = branch_y_range(x, branch);
    let width = hi - lo;
    g_as_cubic_in_y(x, s, eps)
        .roots_in(lo, hi)
        .into_iter()
        .filter(|&y| y > lo + 1e-9 * width && y < hi - 1e-9 * width)
        .filter(|&y| (x + y).abs() > min_offset)
        .collect()
}

/// Feasible asymmetric pair with the given `x`, if `G(x, ·) = 0` has one.
pub fn asymmetric_pair_at(x: f64, s: f64, eps: Sign, branch: Branch) -> Option<AsymmetricSolution> {
    candidate_ys(x, s, eps, branch, 1e-6)
        .into_iter()
        .filter_map(|y| try_pair(x, y, s, eps, branch))
        .min_by(|a, b| {
            a.coeffs
                .magnitude()
                .partial_cmp(&b.coeffs.magnitude())
                .unwrap()
        })
}

/// Minimum of `G` over `F = {−1 < y < x < 1}` by grid search and Newton
/// refinement of the critical point.
fn g_minimum_on_f(s: f64, eps: Sign) -> (f64, f64, f64) {
    let n = 200;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 1..n {
        let x = -1.0 + 2.0 * i as f64 / n as f64;
        for j in 1..n {
            let y = -1.0 + 2.0 * j as f64 / n as f64;
            if y >= x {
                break;
            }
            let v = g_function(x, y, s, eps);
            if v < best.2 {
                best = (x, y, v);
            }
        }
    }
    let (mut x, mut y) = (best.0, best.1);
    for _ in 0..60 {
        let (gx, gy) = g_partials(x, y, s, eps);
        let h = g_hessian(x, y, s, eps);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dx = (h[1][1] * gx - h[0][1] * gy) / det;
        let dy = (h[0][0] * gy - h[1][0] * gx) / det;
        let (nx, ny) = (x - dx, y - dy);
        if !(ny > -1.0 && nx < 1.0 && ny < nx) {
            break;
        }
        x = nx;
        y = ny;
        if dx.abs() + dy.abs() < 1e-15 {
            break;
        }
    }
    let v = g_function(x, y, s, eps);
    if v < best.2 {
        (x, y, v)
    } else {
        best
    }
}

/// Searches `F` for a feasible asymmetric pair at the given `s` (with `ε = −1`).
///
/// `Ok(None)` means `G` has no negative region in `F` left to host one.
pub fn find_asymmetric_pair(s: f64) -> Result<Option<AsymmetricSolution>> {
    let eps = Sign::Minus;
    let best_of = |xs: &mut dyn Iterator<Item = f64>, min_offset: f64| {
        xs.flat_map(|x| {
            candidate_ys(x, s, eps, Branch::Minus, min_offset)
                .into_iter()
                .map(move |y| (x, y))
        })
        .filter_map(|(x, y)| try_pair(x, y, s, eps, Branch::Minus))
        .min_by(|a, b| {
            a.coeffs
                .magnitude()
                .partial_cmp(&b.coeffs.magnitude())
                .unwrap()
        })
    };

    let n = 400;
    let mut coarse = (1..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64);
    if let Some(sol) = best_of(&mut coarse, 1e-6) {
        return Ok(Some(sol));
    }

    // The negative region may be a small oval around the diagonal.
    let (xm, _, gmin) = g_minimum_on_f(s, eps);
    if gmin >= 0.0 {
        return Ok(None);
    }
    let mut width = 0.05;
    while width > 1e-8 {
        let mut fine = (0..=100).map(|i| xm - width + 2.0 * width * i as f64 / 100.0);
        if let Some(sol) = best_of(&mut fine, 1e-3 * width) {
            return Ok(Some(sol));
        }
        width /= 5.0;
    }
    Err(Error::NonConvergence(format!(
        "G < 0 somewhere in F at s = {s} (min {gmin:e}) but no feasible asymmetric pair was located"
    )))
}

/// Bracketed numerical threshold for the asymmetric `ε = −1` family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Bisection on `s ∈ [2.0, 2.1]` for the supremum of `s` admitting an
/// asymmetric feasible pair.
pub fn eta_estimate() -> Result<EtaEstimate> {
    eta_estimate_with(2.0, 2.1, 1e-5)
}

pub fn eta_estimate_with(lower: f64, upper: f64, tol: f64) -> Result<EtaEstimate> {
    if find_asymmetric_pair(lower)?.is_none() {
        return Err(Error::NonConvergence(format!(
            "no asymmetric pair at the lower bracket s = {lower}"
        )));
    }
    if find_asymmetric_pair(upper)?.is_some() {
        return Err(Error::NonConvergence(format!(
            "asymmetric pair still present at the upper bracket s = {upper}"
        )));
    }
    let (mut lo, mut hi) = (lower, upper);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if find_asymmetric_pair(mid)?.is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(EtaEstimate {
        value: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Left-hand sides of the two boundary equations at x, written out
    // independently of the solver.
    fn boundary_residuals(x: f64, c: f64, d: f64, e: f64, s: f64, ev: f64) -> (f64, f64) {
        let a = -4.0 * ev * x * x - d / 5.0 * x.powi(6) + (d - c / 3.0) * x.powi(4)
            + (2.0 * c - 3.0 * d) * x * x
            - 4.0 * ev
            + c
            - d
            + e * x;
        let b = -8.0 * ev * x - 6.0 * d / 5.0 * x.powi(5) + 4.0 * (d - c / 3.0) * x.powi(3)
            + 2.0 * (2.0 * c - 3.0 * d) * x
            + e
            + 2.0 * s * (1.0 - x * x);
        (a, b)
    }

    fn sign_of(v: i32) -> Sign {
        Sign::from_i32(v)
    }

    #[test]
    fn z0_examples() {
        let zero = Coefficients::from_normalized(0.0, 0.0, 0.0, 1.0);
        assert_eq!(z0_eval(&zero, Sign::Zero, 0.3).unwrap(), 0.0);
        let c3 = Coefficients::from_normalized(3.0, 0.0, 0.0, 1.0);
        assert_eq!(z0_eval(&c3, Sign::Zero, 0.0).unwrap(), 3.0);
        assert!(z0_eval(&c3, Sign::Zero, 1.0).is_err());
        assert!(z0_eval(&c3, Sign::Zero, -1.0).is_err());

        let (c, d) = solve_cd(0.5, 0.0, 1.0, Sign::Plus).unwrap();
        let k = Coefficients::from_normalized(c, d, 0.0, 1.0);
        assert!(z0_eval(&k, Sign::Plus, 0.5).unwrap().abs() < 1e-9);
    }

    #[test]
    fn coefficient_scales() {
        let k = Coefficients::from_raw(2.0, 3.0, 5.0, 0.5);
        assert_eq!(k.c_norm, 2.0 * 0.25);
        assert_eq!(k.d_norm, 3.0 * 0.0625);
        assert_eq!(k.e_norm, 10.0);
        let back = Coefficients::from_normalized(k.c_norm, k.d_norm, k.e_norm, 0.5);
        assert!((back.c_raw - 2.0).abs() < 1e-15);
        assert!((back.d_raw - 3.0).abs() < 1e-15);
        assert!((back.e_raw - 5.0).abs() < 1e-15);
    }

    #[test]
    fn p_poly_examples() {
        let zero = Coefficients::from_normalized(0.0, 0.0, 0.0, 1.0);
        assert_eq!(p_poly(&zero, Sign::Plus).poly.coeffs(), &[-4.0, 0.0, -4.0]);
        let e1 = Coefficients::from_normalized(0.0, 0.0, 1.0, 1.0);
        assert_eq!(p_poly(&e1, Sign::Zero).poly.coeffs(), &[0.0, 1.0]);
    }

    #[test]
    fn solve_cd_frozen_values() {
        // Values from an independent floating-point evaluation of the closed forms.
        let (c, d) = solve_cd(0.5, 0.0, 1.0, Sign::Plus).unwrap();
        assert!((c - 12.939068100358423).abs() < 1e-12);
        assert!((d - 8.363201911589009).abs() < 1e-12);
        let (a, b) = boundary_residuals(0.5, c, d, 0.0, 1.0, 1.0);
        assert!(a.abs() < 1e-10 * c.abs().max(1.0));
        assert!(b.abs() < 1e-10 * c.abs().max(1.0));
    }

    #[test]
    fn solve_cd_degenerate_inputs() {
        for x in [0.0, 1.0, -1.0] {
            assert!(matches!(
                solve_cd(x, 0.0, 1.0, Sign::Plus),
                Err(Error::Degenerate { .. })
            ));
        }
        let root = (5.0 + 40f64.sqrt()).sqrt(); // 15 + 10x² − x⁴ = 0
        assert!(solve_cd(root, 0.0, 1.0, Sign::Plus).is_err());
    }

    #[test]
    fn solve_cd_boundary_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x: f64 = rng.gen_range(0.05..0.95) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let e: f64 = rng.gen_range(-3.0..3.0);
            let s: f64 = rng.gen_range(0.1..3.0);
            let eps = sign_of(rng.gen_range(-1..=1));
            let (c, d) = solve_cd(x, e, s, eps).unwrap();
            let k = Coefficients::from_normalized(c, d, e, s);
            let z = |t| z0_eval(&k, eps, t).unwrap();
            let h = 1e-6;
            let slope = (z(x + h) - z(x - h)) / (2.0 * h);
            let scale = k.magnitude().max(1.0);
            assert!(z(x).abs() < 1e-9 * scale, "z0(x) = {}", z(x));
            assert!((slope + 2.0 * s).abs() < 1e-6 * scale, "slope {slope} vs {}", -2.0 * s);
        }
    }

    #[test]
    fn symmetric_closed_form_matches_solver() {
        for (x, s, eps) in [(0.5, 1.0, Sign::Plus), (0.3, 0.5, Sign::Minus), (0.8, 2.5, Sign::Minus)] {
            let sym = symmetric_p(x, s, eps).unwrap();
            let (c, d) = solve_cd(x, 0.0, s, eps).unwrap();
            let gen = p_poly(&Coefficients::from_normalized(c, d, 0.0, s), eps);
            for i in 0..=6 {
                assert!(
                    (sym.poly.coeff(i) - gen.poly.coeff(i)).abs() < 1e-10,
                    "coefficient {i}: {} vs {}",
                    sym.poly.coeff(i),
                    gen.poly.coeff(i)
                );
            }
            assert!(sym.poly.eval(x).abs() < 1e-13);
            assert!(sym.poly.eval(-x).abs() < 1e-13);
            let ev = eps.value();
            let x2 = x * x;
            let p0 = (-4.0 * ev * x2 * x2 * (x2 - 5.0) + s * x * (15.0 - 10.0 * x2 + 3.0 * x2 * x2))
                / (15.0 - 5.0 * x2 - 11.0 * x2 * x2 + x2 * x2 * x2);
            assert!((sym.poly.eval(0.0) - p0).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_solver_agrees_with_symmetric_solver() {
        let pair = BoundaryPair::symmetric(0.5).unwrap();
        let k = solve_cde_pair(&pair, 1.0, Sign::Plus).unwrap();
        let (c, d) = solve_cd(0.5, 0.0, 1.0, Sign::Plus).unwrap();
        assert!(k.e_norm.abs() < 1e-10);
        assert!((k.c_norm - c).abs() < 1e-9);
        assert!((k.d_norm - d).abs() < 1e-9);
    }

    #[test]
    fn incompatible_pair_is_infeasible() {
        let pair = BoundaryPair::new(0.5, -0.2, Branch::Minus).unwrap();
        assert!(compatibility_lhs(0.5, -0.2, 1.0, Sign::Plus).abs() > 1e-3);
        match solve_cde_pair(&pair, 1.0, Sign::Plus) {
            Err(Error::Infeasible { .. }) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn compatibility_matches_pair_feasibility() {
        // Grid points are generically incompatible; points on G = 0 are built by
        // solving the cubic in y.
        let s = 1.0;
        let eps = Sign::Minus;
        let mut checked_zero = 0;
        for i in 0..50 {
            let x = -0.9 + 1.8 * (i as f64 + 0.5) / 50.0;
            let y = x - 0.37;
            if y <= -1.0 {
                continue;
            }
            let pair = BoundaryPair::new(x, y, Branch::Minus).unwrap();
            let feasible = solve_cde_pair(&pair, s, eps).is_ok();
            assert_eq!(feasible, compatibility_lhs(x, y, s, eps).abs() < 1e-9, "x={x}");
            for yc in candidate_ys(x, s, eps, Branch::Minus, 1e-6) {
                let pair = BoundaryPair::new(x, yc, Branch::Minus).unwrap();
                assert!(compatibility_lhs(x, yc, s, eps).abs() < 1e-9);
                match solve_cde_pair(&pair, s, eps) {
                    Ok(_) => checked_zero += 1,
                    Err(Error::RankDeficient(_)) => {}
                    Err(e) => panic!("on-curve pair rejected at x={x}, y={yc}: {e}"),
                }
            }
        }
        assert!(checked_zero > 10);
    }

    #[test]
    fn compatibility_trivial_zeros() {
        assert_eq!(compatibility_lhs(0.0, 0.0, 1.0, Sign::Minus), 0.0);
        assert_eq!(compatibility_lhs(0.0, 0.0, 1.0, Sign::Plus), 0.0);
    }

    #[test]
    fn g_partials_origin() {
        assert_eq!(g_partials(0.0, 0.0, 0.0, Sign::Plus), (20.0, -20.0));
    }

    #[test]
    fn g_partials_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts: Vec<(f64, f64, f64, Sign)> = vec![(0.3, 0.1, 1.0, Sign::Minus)];
        for _ in 0..20 {
            pts.push((
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(0.0..3.0),
                sign_of(rng.gen_range(-1..=1)),
            ));
        }
        let h = 1e-5;
        for (x, y, s, eps) in pts {
            let (gx, gy) = g_partials(x, y, s, eps);
            let fx = (g_function(x + h, y, s, eps) - g_function(x - h, y, s, eps)) / (2.0 * h);
            let fy = (g_function(x, y + h, s, eps) - g_function(x, y - h, s, eps)) / (2.0 * h);
            assert!((gx - fx).abs() < 1e-6, "Gx {gx} vs {fx}");
            assert!((gy - fy).abs() < 1e-6, "Gy {gy} vs {fy}");
        }
    }

    #[test]
    fn cubic_in_y_matches_g() {
        for &(x, y, s) in &[(0.3, -0.2, 1.0), (0.9, 0.1, 2.0), (-0.4, -0.9, 0.5)] {
            for eps in [Sign::Minus, Sign::Zero, Sign::Plus] {
                let a = g_as_cubic_in_y(x, s, eps).eval(y);
                let b = g_function(x, y, s, eps);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eps_s_values() {
        // Root of the threshold quintic, from an independent bracketing solver.
        assert!((eps_s(1.0, Sign::Minus) - 0.8221382500529117).abs() < 1e-12);
        assert_eq!(eps_s(1.0, Sign::Plus), 1.0);
        assert_eq!(eps_s(3.0, Sign::Minus), 1.0);
        assert_eq!(eps_s(2.0, Sign::Minus), 1.0);
    }

    #[test]
    fn eps_s_monotone() {
        let mut prev = 0.0;
        for i in 1..=20 {
            let s = 2.0 * i as f64 / 21.0;
            let v = eps_s(s, Sign::Minus);
            assert!(v >= prev, "eps_s decreased at s = {s}");
            assert!(v > 0.0 && v <= 1.0);
            prev = v;
        }
    }

    #[test]
    fn positivity_examples() {
        let ok = symmetric_p(0.5, 1.0, Sign::Plus).unwrap();
        assert!(positivity_check(&ok, &BoundaryPair::symmetric(0.5).unwrap()));

        let bad = symmetric_p(0.9, 0.5, Sign::Minus).unwrap();
        assert!(0.9 > eps_s(0.5, Sign::Minus));
        assert!(!positivity_check(&bad, &BoundaryPair::symmetric(0.9).unwrap()));

        let zero = Coefficients::from_normalized(0.0, 0.0, 0.0, 1.0);
        let neg = p_poly(&zero, Sign::Plus);
        for x in [0.2, 0.5, 0.9] {
            assert!(!positivity_check(&neg, &BoundaryPair::symmetric(x).unwrap()));
        }
    }

    #[test]
    fn positivity_follows_eps_s() {
        for s in [0.5, 1.0, 1.5] {
            let bound = eps_s(s, Sign::Minus);
            for frac in [0.2, 0.5, 0.9] {
                let x = frac * bound;
                let p = symmetric_p(x, s, Sign::Minus).unwrap();
                assert!(positivity_check(&p, &BoundaryPair::symmetric(x).unwrap()), "s={s}, x={x}");
            }
            let x = (bound + 0.02).min(0.99);
            let p = symmetric_p(x, s, Sign::Minus).unwrap();
            assert!(!positivity_check(&p, &BoundaryPair::symmetric(x).unwrap()), "s={s}, x={x}");
        }
    }

    #[test]
    fn asymmetric_pairs_exist_below_threshold() {
        let sol = find_asymmetric_pair(1.0).unwrap().expect("pair at s = 1");
        assert!(!sol.pair.is_symmetric());
        assert!(sol.coeffs.e_norm.abs() > 1e-8);
        assert!(compatibility_lhs(sol.pair.x, sol.pair.y, 1.0, Sign::Minus).abs() < 1e-8);
        assert!(find_asymmetric_pair(2.5).unwrap().is_none());
    }

    #[test]
    fn plus_branch_pair() {
        let sol = asymmetric_pair_at(2.0, 1.0, Sign::Plus, Branch::Plus).expect("pair with 1 < y < x");
        assert!(sol.pair.y > 1.0 && sol.pair.y < 2.0);
    }

    proptest! {
        #[test]
        fn z0_times_denominator_is_p(c in -20.0f64..20.0, d in -20.0f64..20.0, e in -5.0f64..5.0,
                                     ev in -1i32..=1, t in -0.99f64..0.99) {
            let k = Coefficients::from_normalized(c, d, e, 1.3);
            let eps = sign_of(ev);
            let lhs = z0_eval(&k, eps, t).unwrap() * (1.0 - t * t);
            let rhs = p_poly(&k, eps).poly.eval(t);
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + k.magnitude()));
        }

        #[test]
        fn even_polynomial_when_e_vanishes(x in 0.05f64..0.95, s in 0.1f64..3.0, ev in -1i32..=1) {
            let eps = sign_of(ev);
            let (c, d) = solve_cd(x, 0.0, s, eps).unwrap();
            let p = p_poly(&Coefficients::from_normalized(c, d, 0.0, s), eps);
            for i in [1, 3, 5] {
                prop_assert!(p.poly.coeff(i).abs() < 1e-12);
            }
        }

        #[test]
        fn diagonal_is_always_compatible(x in -2.0f64..2.0, s in 0.0f64..3.0, ev in -1i32..=1) {
            prop_assert_eq!(compatibility_lhs(x, -x, s, sign_of(ev)), 0.0);
        }
    }
}
