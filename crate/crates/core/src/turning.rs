//! The periodic turning-point problem `φ″ = ½Q′(φ)`, `φ(0) = x₁`, `φ′(0) = 0`
//! between two simple roots `x₀ < x₁` of `Q`.
//!
//! The integration starts at the regular turning point, so the square-root
//! singularity of `φ′ = ±√Q(φ)` never appears. A first adaptive pass locates
//! the next turning point (where `φ′` returns to zero at `x₀`); a second,
//! fixed-step pass with the same Runge–Kutta pair samples `[0, l]` on an
//! equispaced grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::chebyshev_grid;

/// A potential `Q` with its derivative.
pub trait Potential {
    fn value(&self, u: f64) -> f64;
    fn slope(&self, u: f64) -> f64;
}

/// [`Potential`] from a pair of closures.
pub struct FnPotential<F, G> {
    q: F,
    dq: G,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> FnPotential<F, G> {
    pub fn new(q: F, dq: G) -> Self {
        FnPotential { q, dq }
    }
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> Potential for FnPotential<F, G> {
    fn value(&self, u: f64) -> f64 {
        (self.q)(u)
    }
    fn slope(&self, u: f64) -> f64 {
        (self.dq)(u)
    }
}

/// `Q` on `[x₀, x₁]` with its root data, validated.
pub struct TurningProblem<'a, P: Potential + ?Sized> {
    pub potential: &'a P,
    pub x0: f64,
    pub x1: f64,
    pub dq_x0: f64,
    pub dq_x1: f64,
    /// `max Q` on `[x₀, x₁]`, sampled.
    pub q_max: f64,
}

impl<'a, P: Potential + ?Sized> TurningProblem<'a, P> {
    pub fn new(potential: &'a P, x0: f64, x1: f64) -> Result<Self> {
        if !(x0 < x1) {
            return Err(Error::InvalidParams(format!("need x0 < x1, got [{x0}, {x1}]")));
        }
        let grid = chebyshev_grid(x0, x1, 257);
        let q_max = grid
            .iter()
            .map(|&u| potential.value(u))
            .fold(f64::NEG_INFINITY, f64::max);
        if !(q_max > 0.0) {
            return Err(Error::infeasible("Q > 0 on (x0, x1)", q_max));
        }
        if let Some(&u) = grid[1..grid.len() - 1]
            .iter()
            .find(|&&u| !(potential.value(u) > 0.0))
        {
            return Err(Error::infeasible("Q > 0 on (x0, x1)", u));
        }
        let width = x1 - x0;
        for (what, root) in [("Q(x0) = 0", x0), ("Q(x1) = 0", x1)] {
            let v = potential.value(root);
            if v.abs() > 1e-9 * q_max {
                return Err(Error::infeasible(what, v));
            }
        }
        let (dq_x0, dq_x1) = (potential.slope(x0), potential.slope(x1));
        // A simple root needs a slope comparable to q_max / width.
        let slope_floor = 1e-8 * q_max / width;
        if !(dq_x0 > slope_floor) {
            return Err(Error::infeasible("Q'(x0) > 0 (simple root)", dq_x0));
        }
        if !(dq_x1 < -slope_floor) {
            return Err(Error::infeasible("Q'(x1) < 0 (simple root)", dq_x1));
        }
        Ok(TurningProblem {
            potential,
            x0,
            x1,
            dq_x0,
            dq_x1,
            q_max,
        })
    }
}

/// One half-period of the periodic solution, sampled on an equispaced grid
/// from `φ(0) = x₁` to `φ(l) = x₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSolution {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// Half-period: time from `x₁` to `x₀`.
    pub l: f64,
    pub x0: f64,
    pub x1: f64,
    /// `φ″` at the turning points, `½Q′(x₀)` and `½Q′(x₁)`.
    pub ddphi_x0: f64,
    pub ddphi_x1: f64,
    /// `max |(φ′)² − Q(φ)| / max Q` over the samples.
    pub energy_residual: f64,
}

pub const DEFAULT_SAMPLES: usize = 2001;
const RTOL: f64 = 1e-11;
const ATOL: f64 = 1e-11;
const SUBSTEPS: usize = 8;
const MAX_STEPS: usize = 2_000_000;

// Dormand–Prince 5(4).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 2];

fn rhs<P: Potential + ?Sized>(q: &P, y: State) -> State {
    [y[1], 0.5 * q.slope(y[0])]
}

/// One Dormand–Prince step of the autonomous system; returns the
/// fifth-order solution and the embedded error estimate.
fn dp_step<P: Potential + ?Sized>(q: &P, y: State, h: f64) -> (State, State) {
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(q, y);
    for i in 1..7 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += h * A[i][j] * kj[0];
            yi[1] += h * A[i][j] * kj[1];
        }
        k[i] = rhs(q, yi);
    }
    let mut out = y;
    let mut err = [0.0; 2];
    for i in 0..7 {
        out[0] += h * B[i] * k[i][0];
        out[1] += h * B[i] * k[i][1];
        err[0] += h * B_ERR[i] * k[i][0];
        err[1] += h * B_ERR[i] * k[i][1];
    }
    (out, err)
}

fn error_norm(y: State, y_new: State, err: State) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let sc = ATOL + RTOL * y[i].abs().max(y_new[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / 2.0).sqrt()
}

/// Adaptive pass: returns the half-period `l`.
fn find_half_period<P: Potential + ?Sized>(p: &TurningProblem<P>) -> Result<f64> {
    let q = p.potential;
    let width = p.x1 - p.x0;
    let exit_tol = 1e-6 * width;
    let mut y: State = [p.x1, 0.0];
    let mut t = 0.0;
    let mut h = 1e-3 * (width / p.dq_x1.abs()).sqrt().max(1e-6);
    for _ in 0..MAX_STEPS {
        let (y_new, err) = dp_step(q, y, h);
        let e = error_norm(y, y_new, err);
        if !e.is_finite() {
            return Err(Error::Integration(format!("non-finite state at t = {t}")));
        }
        if e > 1.0 {
            h *= (0.9 * e.powf(-0.2)).max(0.2);
            continue;
        }
        if y_new[0] < p.x0 - exit_tol || y_new[0] > p.x1 + exit_tol {
            return Err(Error::Integration(format!(
                "φ = {} left [{}, {}] at t = {} (sign error in Q?)",
                y_new[0],
                p.x0,
                p.x1,
                t + h
            )));
        }
        if y[1] < 0.0 && y_new[1] >= 0.0 {
            let tau = refine_turning_point(q, y, h);
            let (y_end, _) = dp_step(q, y, tau);
            if (y_end[0] - p.x0).abs() > exit_tol {
                return Err(Error::Integration(format!(
                    "turning point reached at φ = {} instead of x0 = {}",
                    y_end[0], p.x0
                )));
            }
            return Ok(t + tau);
        }
        t += h;
        y = y_new;
        h *= (0.9 * e.max(1e-10).powf(-0.2)).min(5.0);
    }
    Err(Error::Integration("step budget exhausted before the turning point".into()))
}

/// Newton on the sub-step `τ ∈ (0, h]` for `φ′(t + τ) = 0`, using `φ″ = ½Q′(φ)`.
fn refine_turning_point<P: Potential + ?Sized>(q: &P, y: State, h: f64) -> f64 {
    let (y_end, _) = dp_step(q, y, h);
    let mut tau = h * y[1] / (y[1] - y_end[1]);
    for _ in 0..50 {
        let (yt, _) = dp_step(q, y, tau);
        let slope = 0.5 * q.slope(yt[0]);
        if slope == 0.0 {
            break;
        }
        let step = yt[1] / slope;
        tau = (tau - step).clamp(0.0, h);
        if step.abs() <= 4.0 * f64::EPSILON * tau.max(h) {
            break;
        }
    }
    tau
}

/// Integrates one half-period and samples it on `n` equispaced points.
pub fn integrate_turning<P: Potential + ?Sized>(problem: &TurningProblem<P>, n: usize) -> Result<PeriodicSolution> {
    if n < 9 {
        return Err(Error::InvalidParams(format!("need at least 9 samples, got {n}")));
    }
    let q = problem.potential;
    let l = find_half_period(problem)?;
    let dt = l / (n - 1) as f64;
    let h = dt / SUBSTEPS as f64;
    let mut t = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    let mut y: State = [problem.x1, 0.0];
    for j in 0..n {
        t.push(j as f64 * dt);
        phi.push(y[0]);
        dphi.push(y[1]);
        if j + 1 < n {
            for _ in 0..SUBSTEPS {
                y = dp_step(q, y, h).0;
            }
        }
    }
    t[n - 1] = l;
    let energy_residual = phi
        .iter()
        .zip(&dphi)
        .map(|(&u, &v)| (v * v - q.value(u)).abs())
        .fold(0.0, |m: f64, r| if r.is_nan() { f64::NAN } else { m.max(r) })
        / problem.q_max;
    Ok(PeriodicSolution {
        t,
        phi,
        dphi,
        l,
        x0: problem.x0,
        x1: problem.x1,
        ddphi_x0: 0.5 * problem.dq_x0,
        ddphi_x1: 0.5 * problem.dq_x1,
        energy_residual,
    })
}

impl PeriodicSolution {
    /// Continues the trajectory `δ` past the final turning point and `δ`
    /// before it; both positions agree when `φ` is even about `t = l`.
    pub fn turning_point_asymmetry<P: Potential + ?Sized>(&self, q: &P, delta: f64) -> f64 {
        let n = self.t.len();
        let y: State = [self.phi[n - 1], self.dphi[n - 1]];
        let steps = 16;
        let walk = |sign: f64| {
            let mut s = y;
            for _ in 0..steps {
                s = dp_step(q, s, sign * delta / steps as f64).0;
            }
            s[0]
        };
        (walk(1.0) - walk(-1.0)).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_oscillator() {
        let q = FnPotential::new(|u: f64| 1.0 - u * u, |u: f64| -2.0 * u);
        let prob = TurningProblem::new(&q, -1.0, 1.0).unwrap();
        let sol = integrate_turning(&prob, DEFAULT_SAMPLES).unwrap();
        assert!((sol.l - PI).abs() < 1e-8, "l = {}", sol.l);
        for (t, p) in sol.t.iter().zip(&sol.phi) {
            assert!((p - t.cos()).abs() < 1e-9);
        }
        assert!(sol.energy_residual < 1e-9);
        assert!(sol.turning_point_asymmetry(&q, 1e-2) < 1e-8);
    }

    #[test]
    fn narrow_well() {
        // φ = ½ cos(√2·t) solves φ″ = −2φ with turning points ±½.
        let q = FnPotential::new(|u: f64| 0.5 - 2.0 * u * u, |u: f64| -4.0 * u);
        let prob = TurningProblem::new(&q, -0.5, 0.5).unwrap();
        let sol = integrate_turning(&prob, 1001).unwrap();
        assert!((sol.l - PI / 2f64.sqrt()).abs() < 1e-9, "l = {}", sol.l);
        for (t, p) in sol.t.iter().zip(&sol.phi) {
            assert!((p - 0.5 * (2f64.sqrt() * t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn anharmonic_energy_is_conserved() {
        // Q(u) = (1 − u²)(2 + u)
        let q = FnPotential::new(
            |u: f64| (1.0 - u * u) * (2.0 + u),
            |u: f64| -2.0 * u * (2.0 + u) + (1.0 - u * u),
        );
        let prob = TurningProblem::new(&q, -1.0, 1.0).unwrap();
        let sol = integrate_turning(&prob, DEFAULT_SAMPLES).unwrap();
        assert!(sol.energy_residual < 1e-9);
        assert!((sol.phi[sol.phi.len() - 1] + 1.0).abs() < 1e-9);
        assert!(sol.turning_point_asymmetry(&q, 1e-2) < 1e-8);
    }

    #[test]
    fn rejects_invalid_problems() {
        let neg = FnPotential::new(|u: f64| u * u - 1.0, |u: f64| 2.0 * u);
        assert!(TurningProblem::new(&neg, -1.0, 1.0).is_err());
        let double = FnPotential::new(|u: f64| (1.0 - u * u).powi(2), |u: f64| -4.0 * u * (1.0 - u * u));
        assert!(TurningProblem::new(&double, -1.0, 1.0).is_err());
        let off = FnPotential::new(|u: f64| 1.0 - u * u, |u: f64| -2.0 * u);
        assert!(TurningProblem::new(&off, -0.9, 0.9).is_err());
    }
}
