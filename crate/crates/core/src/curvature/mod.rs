//! Curvature of `dt² + f²θ² − g²·g_can`: the closed-form eigenvalues of the
//! Ricci endomorphism along a sampled profile, and the checks built on them.
//! The independent four-dimensional engine lives in [`chart`].

pub mod chart;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fd::{derivative_on_grid, endpoint_fit, max_abs};
use crate::profile::MetricProfile;
use crate::report::{Tolerances, VerificationReport};

/// Fraction of `a` trimmed from each end before interior checks.
pub const CHECK_MARGIN: f64 = 0.02;

/// Ricci eigenvalues on the profile grid: `λ₀` (radial), `λ₁` (fibre),
/// `λ₂` (base, multiplicity two).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicciField {
    pub t: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub tau: Vec<f64>,
    /// Index range used by interior checks.
    pub interior: (usize, usize),
}

impl RicciField {
    /// `λ := λ₀`.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda0
    }

    /// `μ := λ₂`.
    pub fn mu(&self) -> &[f64] {
        &self.lambda2
    }

    fn interior_range(&self) -> std::ops::Range<usize> {
        self.interior.0..self.interior.1
    }
}

fn interior_indices(t: &[f64], a: f64) -> (usize, usize) {
    let cut = (1.0 - CHECK_MARGIN) * a;
    let lo = t.iter().position(|&x| x >= -cut).unwrap_or(0);
    let hi = t.iter().rposition(|&x| x <= cut).map_or(t.len(), |i| i + 1);
    (lo, hi)
}

/// Eigenvalues from finite differences of the samples; at `t = ±a`, where
/// `f` vanishes, the quotients are replaced by their one-sided limits
/// `f″/f → f‴/f′` and `f′g′/(fg) → g″/g`.
pub fn ricci_eigenvalues(p: &MetricProfile) -> Result<RicciField> {
    p.validate()?;
    let n = p.len();
    let (t, f, g) = (&p.t, &p.f, &p.g);
    let f1 = derivative_on_grid(t, f, 1, 7);
    let f2 = derivative_on_grid(t, f, 2, 7);
    let g1 = derivative_on_grid(t, g, 1, 7);
    let g2 = derivative_on_grid(t, g, 2, 7);
    let (s2, k) = (p.s * p.s, p.curvature as f64);
    let mut l0 = vec![0.0; n];
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    for i in 0..n {
        let (fi, gi) = (f[i], g[i]);
        let (ff, fg, tw) = if i == 0 || i == n - 1 {
            let (ff, gg) = endpoint_limits(t, f, g, i == 0, p.a);
            (ff, gg, 0.0)
        } else {
            (f2[i] / fi, f1[i] * g1[i] / (fi * gi), 2.0 * s2 * fi * fi / gi.powi(4))
        };
        let gg = if i == 0 || i == n - 1 { fg } else { g2[i] / gi };
        l0[i] = -2.0 * gg - ff;
        l1[i] = -ff - 2.0 * fg + tw;
        l2[i] = -gg - fg - (g1[i] / gi).powi(2) - tw - k / (gi * gi);
    }
    let tau = (0..n).map(|i| l0[i] + l1[i] + 2.0 * l2[i]).collect();
    Ok(RicciField {
        t: t.clone(),
        lambda0: l0,
        lambda1: l1,
        lambda2: l2,
        tau,
        interior: interior_indices(t, p.a),
    })
}

/// Window (fraction of `a`) and degree of the local fits at `t = ±a`.
const ENDPOINT_WINDOW: f64 = 0.1;
const ENDPOINT_DEGREE: usize = 8;

/// `(f‴/f′, g″/g)` at an endpoint from least-squares Taylor fits: a
/// one-sided stencil for `f‴` amplifies rounding by `h⁻³`.
fn endpoint_limits(t: &[f64], f: &[f64], g: &[f64], at_start: bool, a: f64) -> (f64, f64) {
    let w = ENDPOINT_WINDOW * a;
    let (cf, _) = endpoint_fit(t, f, at_start, w, ENDPOINT_DEGREE);
    let (cg, _) = endpoint_fit(t, g, at_start, w, ENDPOINT_DEGREE);
    (6.0 * cf[3] / (cf[1] * w * w), 2.0 * cg[2] / (cg[0] * w * w))
}

/// Linear least squares `μ ≈ D·g² − C`; returns `(D, C, max residual)`.
pub fn fit_mu(mu: &[f64], g: &[f64]) -> (f64, f64, f64) {
    let mut ata = Matrix2::zeros();
    let mut atb = Vector2::zeros();
    for (&m, &gv) in mu.iter().zip(g) {
        let row = Vector2::new(gv * gv, -1.0);
        ata += row * row.transpose();
        atb += row * m;
    }
    let sol = ata.lu().solve(&atb).unwrap_or(Vector2::new(f64::NAN, f64::NAN));
    let (d, c) = (sol[0], sol[1]);
    let resid = max_abs(mu.iter().zip(g).map(|(&m, &gv)| m - (d * gv * gv - c)));
    (d, c, resid)
}

/// The Gray conditions along the profile: `λ₀ = λ₁`, `λ − 2μ` constant,
/// `μ = D·g² − C`, and `μ′ = 2(λ − μ)·g′/g`. Residuals are relative to the
/// largest eigenvalue magnitude on the interior.
pub fn check_gray_1d(field: &RicciField, p: &MetricProfile, tol: &Tolerances) -> VerificationReport {
    let mut r = VerificationReport::new("gray-1d");
    let idx = field.interior_range();
    let (l0, l1, mu) = (&field.lambda0[idx.clone()], &field.lambda1[idx.clone()], &field.lambda2[idx.clone()]);
    let g = &p.g[idx.clone()];
    let scale = max_abs(l0.iter().chain(l1).chain(mu).copied()).max(f64::MIN_POSITIVE);

    let diff = max_abs(l0.iter().zip(l1).map(|(a, b)| a - b));
    r.check("lambda0 = lambda1", diff / scale, tol.eigen_equal);

    let cert: Vec<f64> = l0.iter().zip(mu).map(|(l, m)| l - 2.0 * m).collect();
    let (cmin, cmax) = cert
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    r.check("lambda - 2mu constant", (cmax - cmin) / scale, tol.gray_certificate);
    r.note(format!("lambda - 2mu = {:.12e}", 0.5 * (cmax + cmin)));

    let (d, c, resid) = fit_mu(mu, g);
    r.check("mu = D g^2 - C", resid / scale, tol.mu_fit);
    r.note(format!("D = {d:.12e}, C = {c:.12e}"));

    // μ′ on a coarser stride: differencing an already twice-differenced
    // quantity on the full grid amplifies rounding.
    let stride = 5;
    let ts: Vec<f64> = field.t[idx.clone()].iter().step_by(stride).copied().collect();
    let ms: Vec<f64> = mu.iter().step_by(stride).copied().collect();
    let dmu = derivative_on_grid(&ts, &ms, 1, 7);
    let gs: Vec<f64> = g.iter().step_by(stride).copied().collect();
    let dg = derivative_on_grid(&field.t, &p.g, 1, 7);
    let dgs: Vec<f64> = dg[idx].iter().step_by(stride).copied().collect();
    let ls: Vec<f64> = l0.iter().step_by(stride).copied().collect();
    let rhs: Vec<f64> = (0..ts.len())
        .map(|j| 2.0 * (ls[j] - ms[j]) * dgs[j] / gs[j])
        .collect();
    let log_slope = max_abs(dgs.iter().zip(&gs).map(|(d, g)| d / g)).max(1.0 / p.a);
    let killing = max_abs(dmu.iter().zip(&rhs).map(|(a, b)| a - b));
    r.check("mu' = 2(lambda - mu) g'/g", killing / (scale * log_slope), tol.killing_1d);
    r
}

/// `λ₀ = λ₁ = λ₂` and `τ = 4λ₀`, relative to `max(1, max|λ₀|)`.
pub fn check_einstein(field: &RicciField, tol: &Tolerances) -> VerificationReport {
    let mut r = VerificationReport::new("einstein");
    let idx = field.interior_range();
    let (l0, l1, l2, tau) = (
        &field.lambda0[idx.clone()],
        &field.lambda1[idx.clone()],
        &field.lambda2[idx.clone()],
        &field.tau[idx],
    );
    let scale = max_abs(l0.iter().copied()).max(1.0);
    r.check("lambda0 = lambda2", max_abs(l0.iter().zip(l2).map(|(a, b)| a - b)) / scale, tol.einstein);
    r.check("lambda1 = lambda2", max_abs(l1.iter().zip(l2).map(|(a, b)| a - b)) / scale, tol.einstein);
    r.check("tau = 4 lambda0", max_abs(tau.iter().zip(l0).map(|(t, l)| t - 4.0 * l)) / scale, tol.einstein);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine_profile() -> MetricProfile {
        MetricProfile::from_functions(PI / 2.0, 2001, 0.0, -4, |t| t.cos(), |_| 1.0)
    }

    #[test]
    fn sine_profile_eigenvalues() {
        // f = cos t (a shifted sine), g ≡ 1, s = 0, K = −4
        let field = ricci_eigenvalues(&sine_profile()).unwrap();
        for i in 0..field.t.len() {
            assert!((field.lambda0[i] - 1.0).abs() < 1e-6, "λ0 at {}: {}", field.t[i], field.lambda0[i]);
            assert!((field.lambda1[i] - 1.0).abs() < 1e-6);
            assert!((field.lambda2[i] - 4.0).abs() < 1e-7, "λ2 {}", field.lambda2[i]);
            assert!((field.tau[i] - 10.0).abs() < 1e-5);
        }
    }

    #[test]
    fn sine_profile_is_not_einstein() {
        let field = ricci_eigenvalues(&sine_profile()).unwrap();
        let r = check_einstein(&field, &Tolerances::default());
        assert!(!r.passed());
        assert!((r.entry("lambda0 = lambda2").unwrap().value - 3.0).abs() < 1e-6);
    }

    #[test]
    fn mu_fit_recovers_coefficients() {
        let g: Vec<f64> = (0..100).map(|i| 1.0 + i as f64 / 100.0).collect();
        let mu: Vec<f64> = g.iter().map(|g| 0.3 * g * g - 1.7).collect();
        let (d, c, r) = fit_mu(&mu, &g);
        assert!((d - 0.3).abs() < 1e-12 && (c - 1.7).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn interior_trims_margin() {
        let field = ricci_eigenvalues(&sine_profile()).unwrap();
        let (lo, hi) = field.interior;
        assert!(lo > 0 && hi < field.t.len());
        assert!(field.t[lo] >= -(1.0 - CHECK_MARGIN) * PI / 2.0);
    }
}
