//! Coordinate-chart curvature engine for the full four-dimensional metric.
//!
//! Coordinates are `(t, ψ, x, y)` with `θ = dψ + β`, where `β` is a
//! connection potential on the base chart:
//!
//! | K  | base metric               | β                 |
//! |----|---------------------------|-------------------|
//! | −4 | `(dx² + dy²)/(4y²)`       | `c·s/y · dx`      |
//! |  0 | `dx² + dy²`               | `c·s·x · dy`      |
//! |  4 | `¼(dx² + sin²x · dy²)`    | `c·s·cos x · dy`  |
//!
//! Metric derivatives come from Richardson-extrapolated central differences;
//! Christoffel symbols, their derivatives and the Ricci tensor are then
//! assembled from the exact formulas. Nothing here uses the closed-form
//! eigenvalues, except for [`Chart::calibrated`], which fixes the single
//! constant `c` at one point.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::RationalInterpolant;
use crate::profile::MetricProfile;
use crate::report::{Tolerances, VerificationReport};

use super::RicciField;

pub type Point = [f64; 4];

/// Finite-difference steps: metric first derivatives, second derivatives,
/// and the directional derivative of the Ricci tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps {
            first: 1e-4,
            second: 2e-3,
            third: 2e-3,
        }
    }
}

/// `c` that makes `dθ = 2s·ω` for the area form `ω` of each base chart.
pub fn nominal_connection(curvature: i32) -> f64 {
    match curvature {
        0 => 2.0,
        _ => 0.5,
    }
}

/// Interpolation degree for evaluating the profile between samples.
const INTERP_DEGREE: usize = 8;

#[derive(Debug, Clone)]
pub struct Chart {
    pub curvature: i32,
    pub s: f64,
    /// Connection normalization.
    pub c: f64,
    pub a: f64,
    pub steps: FdSteps,
    interp: RationalInterpolant,
    f: Vec<f64>,
    g: Vec<f64>,
}

/// Curvature data at one chart point.
#[derive(Debug, Clone)]
pub struct CurvatureAt {
    pub metric: Matrix4<f64>,
    pub ricci: Matrix4<f64>,
    pub tau: f64,
    /// `gamma[m][k][l] = Γ^m_{kl}`.
    pub gamma: [[[f64; 4]; 4]; 4],
}

struct Base {
    bxx: f64,
    byy: f64,
    bx: f64,
    by: f64,
}

impl Chart {
    pub fn new(profile: &MetricProfile, c: f64) -> Result<Self> {
        profile.validate()?;
        Ok(Chart {
            curvature: profile.curvature,
            s: profile.s,
            c,
            a: profile.a,
            steps: FdSteps::default(),
            interp: RationalInterpolant::new(&profile.t, INTERP_DEGREE),
            f: profile.f.clone(),
            g: profile.g.clone(),
        })
    }

    pub fn with_steps(mut self, steps: FdSteps) -> Self {
        self.steps = steps;
        self
    }

    fn with_c(&self, c: f64) -> Self {
        Chart { c, ..self.clone() }
    }

    /// Fixes `c` so the fibre eigenvalue matches `field` at one interior
    /// point. The fibre eigenvalue is affine in `c²`, so two evaluations
    /// determine it. With `s = 0` the connection drops out and the nominal
    /// value is kept.
    pub fn calibrated(profile: &MetricProfile, field: &RicciField) -> Result<Self> {
        let base = Chart::new(profile, nominal_connection(profile.curvature))?;
        if profile.s == 0.0 {
            return Ok(base);
        }
        let target_t = 0.3 * profile.a;
        let i = nearest_index(&profile.t, target_t);
        let p = base.anchor(profile.t[i]);
        let l0 = base.with_c(0.0).frame_eigenvalues(p)?[1];
        let l1 = base.with_c(1.0).frame_eigenvalues(p)?[1];
        let slope = l1 - l0;
        let c2 = (field.lambda1[i] - l0) / slope;
        if !(c2 > 0.0) || !c2.is_finite() {
            return Err(Error::NonConvergence(format!(
                "connection calibration gave c² = {c2} (λ₁ at c=0: {l0}, at c=1: {l1}, target {})",
                field.lambda1[i]
            )));
        }
        Ok(base.with_c(c2.sqrt()))
    }

    /// A generic interior chart point at parameter `t`.
    pub fn anchor(&self, t: f64) -> Point {
        match self.curvature {
            -4 => [t, 0.3, 0.2, 1.1],
            0 => [t, 0.3, 0.4, -0.3],
            _ => [t, 0.3, 1.1, 0.7],
        }
    }

    pub fn profile_at(&self, t: f64) -> (f64, f64) {
        let [f, g] = self.interp.eval_columns(t, [&self.f, &self.g]);
        (f, g)
    }

    fn base(&self, p: &Point) -> Result<Base> {
        let (x, y) = (p[2], p[3]);
        let cs = self.c * self.s;
        match self.curvature {
            -4 => {
                if !(y > 0.0) {
                    return Err(Error::ChartDomain(format!("half-plane chart needs y > 0, got {y}")));
                }
                let w = 1.0 / (4.0 * y * y);
                Ok(Base { bxx: w, byy: w, bx: cs / y, by: 0.0 })
            }
            0 => Ok(Base { bxx: 1.0, byy: 1.0, bx: 0.0, by: cs * x }),
            4 => {
                let sn = x.sin();
                if !(sn > 1e-8) {
                    return Err(Error::ChartDomain(format!("sphere chart needs 0 < x < π, got {x}")));
                }
                Ok(Base { bxx: 0.25, byy: 0.25 * sn * sn, bx: 0.0, by: cs * x.cos() })
            }
            k => Err(Error::ChartDomain(format!("no chart for base curvature {k}"))),
        }
    }

    /// Metric components at `p`; signature `(+, +, −, −)`.
    pub fn metric(&self, p: Point) -> Result<Matrix4<f64>> {
        if !(p[0].abs() < self.a) {
            return Err(Error::ChartDomain(format!("t = {} outside (-{a}, {a})", p[0], a = self.a)));
        }
        let b = self.base(&p)?;
        let (f, g) = self.profile_at(p[0]);
        let (f2, g2) = (f * f, g * g);
        let mut m = Matrix4::zeros();
        m[(0, 0)] = 1.0;
        m[(1, 1)] = f2;
        m[(1, 2)] = f2 * b.bx;
        m[(1, 3)] = f2 * b.by;
        m[(2, 2)] = f2 * b.bx * b.bx - g2 * b.bxx;
        m[(2, 3)] = f2 * b.bx * b.by;
        m[(3, 3)] = f2 * b.by * b.by - g2 * b.byy;
        m[(2, 1)] = m[(1, 2)];
        m[(3, 1)] = m[(1, 3)];
        m[(3, 2)] = m[(2, 3)];
        Ok(m)
    }

    fn shifted(&self, p: Point, dirs: &[(usize, f64)]) -> Result<Matrix4<f64>> {
        let mut q = p;
        for &(k, e) in dirs {
            q[k] += e;
        }
        self.metric(q)
    }

    /// Ricci tensor, scalar curvature and Christoffel symbols at `p`.
    pub fn curvature_at(&self, p: Point) -> Result<CurvatureAt> {
        let g0 = self.metric(p)?;
        let ginv = g0
            .try_inverse()
            .ok_or_else(|| Error::ChartDomain("degenerate metric".into()))?;

        let e1 = self.steps.first;
        let central = |k: usize, e: f64| -> Result<Matrix4<f64>> {
            Ok((self.shifted(p, &[(k, e)])? - self.shifted(p, &[(k, -e)])?) / (2.0 * e))
        };
        let mut dg = [Matrix4::zeros(); 4];
        for (k, slot) in dg.iter_mut().enumerate() {
            *slot = (central(k, 0.5 * e1)? * 4.0 - central(k, e1)?) / 3.0;
        }

        let e2 = self.steps.second;
        let second = |k: usize, l: usize, e: f64| -> Result<Matrix4<f64>> {
            if k == l {
                Ok((self.shifted(p, &[(k, e)])? - g0 * 2.0 + self.shifted(p, &[(k, -e)])?) / (e * e))
            } else {
                Ok((self.shifted(p, &[(k, e), (l, e)])? - self.shifted(p, &[(k, e), (l, -e)])?
                    - self.shifted(p, &[(k, -e), (l, e)])?
                    + self.shifted(p, &[(k, -e), (l, -e)])?)
                    / (4.0 * e * e))
            }
        };
        let mut ddg = [[Matrix4::zeros(); 4]; 4];
        for k in 0..4 {
            for l in k..4 {
                let v = (second(k, l, 0.5 * e2)? * 4.0 - second(k, l, e2)?) / 3.0;
                ddg[k][l] = v;
                ddg[l][k] = v;
            }
        }

        // T[i][k][l] = ∂_k g_il + ∂_l g_ik − ∂_i g_kl
        let mut tt = [[[0.0; 4]; 4]; 4];
        let mut gamma = [[[0.0; 4]; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    tt[i][k][l] = dg[k][(i, l)] + dg[l][(i, k)] - dg[i][(k, l)];
                }
            }
        }
        for m in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    gamma[m][k][l] = 0.5 * (0..4).map(|i| ginv[(m, i)] * tt[i][k][l]).sum::<f64>();
                }
            }
        }
        // dgamma[j][m][k][l] = ∂_j Γ^m_kl
        let dginv: Vec<Matrix4<f64>> = (0..4).map(|j| -(ginv * dg[j] * ginv)).collect();
        let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
        for j in 0..4 {
            for m in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let mut acc = 0.0;
                        for i in 0..4 {
                            let dt = ddg[j][k][(i, l)] + ddg[j][l][(i, k)] - ddg[j][i][(k, l)];
                            acc += dginv[j][(m, i)] * tt[i][k][l] + ginv[(m, i)] * dt;
                        }
                        dgamma[j][m][k][l] = 0.5 * acc;
                    }
                }
            }
        }
        let mut ricci = Matrix4::zeros();
        for k in 0..4 {
            for l in 0..4 {
                let mut r = 0.0;
                for m in 0..4 {
                    r += dgamma[m][m][k][l] - dgamma[l][m][k][m];
                    for n in 0..4 {
                        r += gamma[m][m][n] * gamma[n][k][l] - gamma[m][l][n] * gamma[n][k][m];
                    }
                }
                ricci[(k, l)] = r;
            }
        }
        let ricci = (ricci + ricci.transpose()) * 0.5;
        let tau = (ginv.component_mul(&ricci)).sum();
        Ok(CurvatureAt {
            metric: g0,
            ricci,
            tau,
            gamma,
        })
    }

    /// Adapted frame: `∂_t`, the unit fibre field, and the unit horizontal
    /// lifts of `∂_x`, `∂_y`.
    pub fn frame(&self, p: Point) -> Result<[Vector4<f64>; 4]> {
        let b = self.base(&p)?;
        let (f, g) = self.profile_at(p[0]);
        Ok([
            Vector4::new(1.0, 0.0, 0.0, 0.0),
            Vector4::new(0.0, 1.0 / f, 0.0, 0.0),
            Vector4::new(0.0, -b.bx, 1.0, 0.0) / (g * b.bxx.sqrt()),
            Vector4::new(0.0, -b.by, 0.0, 1.0) / (g * b.byy.sqrt()),
        ])
    }

    /// Ricci endomorphism eigenvalues along the frame, `ρ(e, e)/g(e, e)`:
    /// `[λ₀, λ₁, λ₂ (x-lift), λ₂ (y-lift)]`.
    pub fn frame_eigenvalues(&self, p: Point) -> Result<[f64; 4]> {
        let cur = self.curvature_at(p)?;
        let frame = self.frame(p)?;
        Ok(frame.map(|e| (e.transpose() * cur.ricci * e)[0] / (e.transpose() * cur.metric * e)[0]))
    }

    /// Largest off-diagonal frame component of the Ricci tensor.
    pub fn frame_off_diagonal(&self, p: Point) -> Result<f64> {
        let cur = self.curvature_at(p)?;
        let frame = self.frame(p)?;
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                worst = worst.max((frame[i].transpose() * cur.ricci * frame[j])[0].abs());
            }
        }
        Ok(worst)
    }

    /// Norm of `X` in the positive-definite metric obtained by flipping the
    /// sign of the base block.
    pub fn reference_norm(&self, p: Point, x: &Vector4<f64>) -> Result<f64> {
        let b = self.base(&p)?;
        let (f, g) = self.profile_at(p[0]);
        let theta = x[1] + b.bx * x[2] + b.by * x[3];
        let base = b.bxx * x[2] * x[2] + b.byy * x[3] * x[3];
        Ok((x[0] * x[0] + f * f * theta * theta + g * g * base).sqrt())
    }

    /// `(∇_X ρ(X, X), X(τ), g(X, X), ∇_X S(X, X))` at `p`, with
    /// `S = ρ − (τ/3)·g`.
    fn covariant_derivatives(&self, p: Point, x: &Vector4<f64>) -> Result<(f64, f64, f64, f64, CurvatureAt)> {
        let cur = self.curvature_at(p)?;
        let along = |e: f64| -> Result<(f64, f64, f64)> {
            let mut q = p;
            for k in 0..4 {
                q[k] += e * x[k];
            }
            let c = self.curvature_at(q)?;
            let rxx = (x.transpose() * c.ricci * x)[0];
            let gxx = (x.transpose() * c.metric * x)[0];
            Ok((rxx, c.tau, rxx - c.tau / 3.0 * gxx))
        };
        let e3 = self.steps.third;
        let diff = |e: f64| -> Result<[f64; 3]> {
            let (a1, b1, c1) = along(e)?;
            let (a2, b2, c2) = along(-e)?;
            Ok([(a1 - a2) / (2.0 * e), (b1 - b2) / (2.0 * e), (c1 - c2) / (2.0 * e)])
        };
        let (coarse, fine) = (diff(e3)?, diff(0.5 * e3)?);
        let d: Vec<f64> = (0..3).map(|i| (4.0 * fine[i] - coarse[i]) / 3.0).collect();

        // ∇_X X = Γ(X, X) for constant-coefficient X
        let mut gxx_vec = Vector4::zeros();
        for m in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    acc += cur.gamma[m][k][l] * x[k] * x[l];
                }
            }
            gxx_vec[m] = acc;
        }
        let rho_corr = 2.0 * (gxx_vec.transpose() * cur.ricci * x)[0];
        let s_mat = cur.ricci - cur.metric * (cur.tau / 3.0);
        let s_corr = 2.0 * (gxx_vec.transpose() * s_mat * x)[0];
        let gxx = (x.transpose() * cur.metric * x)[0];
        Ok((d[0] - rho_corr, d[1], gxx, d[2] - s_corr, cur))
    }
}

fn nearest_index(t: &[f64], target: f64) -> usize {
    t.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().partial_cmp(&(b.1 - target).abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// A chart point at a profile grid node, with a test direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub index: usize,
    pub point: Point,
    pub direction: [f64; 4],
}

/// Seeded random samples with `t` at grid nodes in `[−0.8a, 0.8a]`.
pub fn sample_points(profile: &MetricProfile, n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<usize> = (0..profile.len())
        .filter(|&i| profile.t[i].abs() <= 0.8 * profile.a)
        .collect();
    (0..n)
        .map(|_| {
            let index = nodes[rng.gen_range(0..nodes.len())];
            let psi = rng.gen_range(0.0..std::f64::consts::TAU);
            let (x, y) = match profile.curvature {
                -4 => (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0)),
                0 => (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                _ => (rng.gen_range(0.5..std::f64::consts::PI - 0.5), rng.gen_range(0.0..std::f64::consts::TAU)),
            };
            let mut d = [0.0; 4];
            for v in d.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            Sample {
                index,
                point: [profile.t[index], psi, x, y],
                direction: d.map(|v| v / norm),
            }
        })
        .collect()
}

fn sample_scale(chart: &Chart, s: &Sample, x: &Vector4<f64>) -> Result<(f64, f64)> {
    let lam = chart.frame_eigenvalues(s.point)?;
    let rho = lam.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let xn = chart.reference_norm(s.point, x)?;
    Ok((rho * xn.powi(3), xn))
}

fn tensor_check(chart: &Chart, samples: &[Sample], tol: f64, title: &str, killing: bool) -> VerificationReport {
    let mut r = VerificationReport::new(title);
    let mut worst: f64 = 0.0;
    for (j, s) in samples.iter().enumerate() {
        let x = Vector4::from(s.direction);
        let result = chart
            .covariant_derivatives(s.point, &x)
            .and_then(|(drho, dtau, gxx, ds, _)| {
                let (scale, xn) = sample_scale(chart, s, &x)?;
                let resid = if killing { ds } else { drho - dtau / 3.0 * gxx };
                Ok((resid / scale, gxx, xn))
            });
        match result {
            Ok((rel, gxx, xn)) => {
                if gxx.abs() < 1e-3 * xn * xn {
                    r.warn(format!("sample {j}: direction is nearly null, g(X,X) = {gxx:e}"));
                }
                worst = if rel.is_nan() { f64::NAN } else { worst.max(rel.abs()) };
            }
            Err(e) => {
                r.warn(format!("sample {j}: {e}"));
                worst = f64::NAN;
            }
        }
    }
    let name = if killing { "g(nabla_X S (X), X)" } else { "nabla_X rho(X,X) - (X tau) g(X,X)/3" };
    r.check(name, worst, tol);
    r.note(format!("{} samples, c = {}", samples.len(), chart.c));
    r
}

/// `∇_X ρ(X, X) = ⅓·X(τ)·g(X, X)` at each sample.
pub fn check_gray_tensorial(chart: &Chart, samples: &[Sample], tol: &Tolerances) -> VerificationReport {
    tensor_check(chart, samples, tol.tensorial, "gray-tensorial", false)
}

/// `S = ρ − (τ/3)·g` is a Killing tensor: `(∇_X S)(X, X) = 0`.
pub fn check_killing_tensor(chart: &Chart, samples: &[Sample], tol: &Tolerances) -> VerificationReport {
    tensor_check(chart, samples, tol.killing, "killing-tensor", true)
}

/// Eigenvalues of `S = ρ − (τ/3)·g` along the frame at `p`.
pub fn killing_eigenvalues(chart: &Chart, p: Point) -> Result<[f64; 4]> {
    let cur = chart.curvature_at(p)?;
    let lam = chart.frame_eigenvalues(p)?;
    Ok(lam.map(|l| l - cur.tau / 3.0))
}

/// Chart eigenvalues and scalar curvature against the closed-form field,
/// relative to `max(1, max|λ|)` at each sample.
pub fn check_engine_agreement(chart: &Chart, field: &RicciField, samples: &[Sample], tol: &Tolerances) -> VerificationReport {
    let mut r = VerificationReport::new("engine-agreement");
    let (mut eig, mut trace, mut offd): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (j, s) in samples.iter().enumerate() {
        let i = s.index;
        let want = [field.lambda0[i], field.lambda1[i], field.lambda2[i], field.lambda2[i]];
        let scale = want.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        match (chart.frame_eigenvalues(s.point), chart.curvature_at(s.point), chart.frame_off_diagonal(s.point)) {
            (Ok(got), Ok(cur), Ok(off)) => {
                for k in 0..4 {
                    eig = nan_max(eig, (got[k] - want[k]).abs() / scale);
                }
                trace = nan_max(trace, (cur.tau - field.tau[i]).abs() / scale);
                offd = nan_max(offd, off / scale);
            }
            (a, b, c) => {
                let msg = [a.err(), b.err(), c.err()].into_iter().flatten().map(|e| e.to_string()).next();
                r.warn(format!("sample {j}: {}", msg.unwrap_or_default()));
                eig = f64::NAN;
            }
        }
    }
    r.check("frame eigenvalues", eig, tol.engine);
    r.check("scalar curvature", trace, tol.engine);
    r.check("frame off-diagonal", offd, tol.engine);
    r.note(format!("{} samples, c = {}", samples.len(), chart.c));
    r
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
