//! Sampled metric profiles `f(t)`, `g(t)` on `[−a, a]`, their assembly from a
//! periodic solution, and the endpoint conditions for smooth closure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{endpoint_fit, max_abs, one_sided_derivative};
use crate::gray::{BoundaryPair, ProfilePolynomial};
use crate::turning::{integrate_turning, TurningProblem, PeriodicSolution, Potential, DEFAULT_SAMPLES};
use crate::params::Branch;
use crate::quadrature::{period_integral, GrayPotential};
use crate::report::{Tolerances, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    GraySymmetric,
    GrayAsymmetric,
    Einstein,
    Kahler,
    Product,
    Analytic,
}

impl FamilyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::GraySymmetric => "gray-symmetric",
            FamilyTag::GrayAsymmetric => "gray-asymmetric",
            FamilyTag::Einstein => "einstein",
            FamilyTag::Kahler => "kahler",
            FamilyTag::Product => "product",
            FamilyTag::Analytic => "analytic",
        }
    }

    /// Families whose profile is symmetric about `t = 0`.
    pub fn is_midpoint_symmetric(self) -> bool {
        matches!(self, FamilyTag::GraySymmetric | FamilyTag::Einstein)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricProfile {
    pub family: FamilyTag,
    /// Half-domain length; the profile lives on `[−a, a]`.
    pub a: f64,
    pub t: Vec<f64>,
    pub h: Option<Vec<f64>>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub s: f64,
    /// Curvature of the base surface.
    pub curvature: i32,
}

impl MetricProfile {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 9 {
            return Err(Error::Format(format!("profile has {n} samples, need at least 9")));
        }
        if self.f.len() != n || self.g.len() != n || self.h.as_ref().is_some_and(|h| h.len() != n) {
            return Err(Error::Format("profile arrays differ in length".into()));
        }
        if self.t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Format("t grid is not strictly increasing".into()));
        }
        if !(self.a > 0.0) || (self.t[0] + self.a).abs() > 1e-12 * self.a || (self.t[n - 1] - self.a).abs() > 1e-12 * self.a {
            return Err(Error::Format(format!(
                "t grid [{}, {}] does not span [-a, a] with a = {}",
                self.t[0],
                self.t[n - 1],
                self.a
            )));
        }
        if ![self.a, self.s].iter().chain(&self.t).chain(&self.f).chain(&self.g).all(|v| v.is_finite()) {
            return Err(Error::Format("profile contains non-finite values".into()));
        }
        if ![-4, 0, 4].contains(&self.curvature) {
            return Err(Error::Format(format!("base curvature {} not in {{-4, 0, 4}}", self.curvature)));
        }
        Ok(())
    }

    /// Profile sampled from closed-form `f`, `g` on an equispaced grid.
    pub fn from_functions(
        a: f64,
        n: usize,
        s: f64,
        curvature: i32,
        f: impl Fn(f64) -> f64,
        g: impl Fn(f64) -> f64,
    ) -> Self {
        let t = symmetric_grid(a, n);
        MetricProfile {
            family: FamilyTag::Analytic,
            a,
            f: t.iter().map(|&x| f(x)).collect(),
            g: t.iter().map(|&x| g(x)).collect(),
            h: None,
            t,
            s,
            curvature,
        }
    }
}

pub fn symmetric_grid(a: f64, n: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..n).map(|k| -a + 2.0 * a * k as f64 / (n - 1) as f64).collect();
    t[0] = -a;
    t[n - 1] = a;
    t
}

/// Reverses a half-period so that the profile variable increases from the
/// lower root at `t = −a` to the upper root at `t = a`: `u(t) = φ(a − t)`.
/// Returns `(t, u, u′)`.
fn reversed_samples(sol: &PeriodicSolution) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = sol.t.len();
    let t = symmetric_grid(0.5 * sol.l, n);
    let u = (0..n).map(|k| sol.phi[n - 1 - k]).collect();
    let du = (0..n).map(|k| -sol.dphi[n - 1 - k]).collect();
    (t, u, du)
}

/// Gray profile `f = h′`, `g = √|s² − h²|` from a solution in `h`.
pub fn build_profile(sol: &PeriodicSolution, s: f64, branch: Branch, curvature: i32, family: FamilyTag) -> Result<MetricProfile> {
    let (t, h, dh) = reversed_samples(sol);
    let g2: Vec<f64> = h.iter().map(|&v| s * s - v * v).collect();
    let violation = match branch {
        Branch::Minus => g2.iter().copied().find(|&v| !(v > 0.0)),
        Branch::Plus => g2.iter().copied().find(|&v| !(v < 0.0)),
        Branch::Zero => {
            return Err(Error::InvalidParams("Gray profiles need branch A = ±1".into()));
        }
    };
    if let Some(v) = violation {
        return Err(Error::infeasible("g² = |s² − h²| > 0 on the branch", v));
    }
    Ok(MetricProfile {
        family,
        a: 0.5 * sol.l,
        g: g2.iter().map(|v| v.abs().sqrt()).collect(),
        f: dh,
        h: Some(h),
        t,
        s,
        curvature,
    })
}

/// Profile whose `g` is the solution itself, with `f` from `(g, g′)`.
pub fn profile_from_g(
    sol: &PeriodicSolution,
    s: f64,
    curvature: i32,
    family: FamilyTag,
    f_of: impl Fn(f64, f64) -> f64,
) -> MetricProfile {
    let (t, g, dg) = reversed_samples(sol);
    MetricProfile {
        family,
        a: 0.5 * sol.l,
        f: g.iter().zip(&dg).map(|(&v, &d)| f_of(v, d)).collect(),
        h: Some(g.clone()),
        g,
        t,
        s,
        curvature,
    }
}

/// A profile together with the data that certifies its half-period.
#[derive(Debug, Clone)]
pub struct Construction {
    pub profile: MetricProfile,
    /// Half-domain from the ODE (`l/2`).
    pub a_ode: f64,
    /// Half-domain from the desingularized quadrature.
    pub a_quadrature: f64,
    pub energy_residual: f64,
}

impl Construction {
    pub fn period_mismatch(&self) -> f64 {
        (self.a_ode - self.a_quadrature).abs() / self.a_quadrature
    }
}

/// Runs the turning-point ODE and the quadrature on the same potential.
pub fn solve_potential<P: Potential + ?Sized>(q: &P, lo: f64, hi: f64) -> Result<(PeriodicSolution, f64)> {
    let problem = TurningProblem::new(q, lo, hi)?;
    let sol = integrate_turning(&problem, DEFAULT_SAMPLES)?;
    let a_quad = 0.5 * period_integral(q, lo, hi)?;
    Ok((sol, a_quad))
}

/// End-to-end Gray profile for a validated polynomial and boundary pair.
pub fn gray_profile(poly: &ProfilePolynomial, s: f64, pair: &BoundaryPair, curvature: i32, family: FamilyTag) -> Result<Construction> {
    let q = GrayPotential { poly, s };
    let (sol, a_quadrature) = solve_potential(&q, s * pair.y, s * pair.x)?;
    let profile = build_profile(&sol, s, pair.branch, curvature, family)?;
    Ok(Construction {
        a_ode: profile.a,
        a_quadrature,
        energy_residual: sol.energy_residual,
        profile,
    })
}

/// Closure conditions at `t = ±a`: `f = 0`, `f′ = ±1`, `g′ = 0`, `g ≠ 0`,
/// plus positivity of `f` inside and `g` everywhere.
pub fn check_boundary(p: &MetricProfile, tol: &Tolerances) -> VerificationReport {
    let mut r = VerificationReport::new("boundary");
    let n = p.len();
    let df = |start| one_sided_derivative(&p.t, &p.f, 1, 5, start);
    let dg = |start| one_sided_derivative(&p.t, &p.g, 1, 5, start);
    r.check("f(-a) = 0", p.f[0], tol.boundary_value);
    r.check("f(a) = 0", p.f[n - 1], tol.boundary_value);
    r.check("f'(-a) = 1", df(true) - 1.0, tol.boundary_derivative);
    r.check("f'(a) = -1", df(false) + 1.0, tol.boundary_derivative);
    r.check("g'(-a) = 0", dg(true), tol.boundary_derivative);
    r.check("g'(a) = 0", dg(false), tol.boundary_derivative);
    let g_end = p.g[0].abs().min(p.g[n - 1].abs());
    r.assert_true("g(±a) != 0", g_end > tol.boundary_value, g_end);
    let f_min = p.f[1..n - 1].iter().copied().fold(f64::INFINITY, f64::min);
    r.assert_true("f > 0 inside", f_min > 0.0, f_min);
    let g_min = p.g.iter().copied().fold(f64::INFINITY, f64::min);
    r.assert_true("g > 0", g_min > 0.0, g_min);
    r
}

const PARITY_DEGREE: usize = 8;
/// Taylor orders whose parity is tested; higher fitted coefficients are
/// dominated by rounding.
const PARITY_ORDERS: usize = 6;

/// `f` odd and `g` even about each endpoint (through fifth order in the
/// local Taylor expansion); for midpoint-symmetric families also `f`, `g`
/// even and `h` odd about `t = 0`.
pub fn check_parity(p: &MetricProfile, tol: &Tolerances) -> VerificationReport {
    let mut r = VerificationReport::new("parity");
    let width = 0.2 * p.a;
    for (label, at_start) in [("-a", true), ("a", false)] {
        let (cf, sf) = endpoint_fit(&p.t, &p.f, at_start, width, PARITY_DEGREE);
        let even: f64 = cf[..PARITY_ORDERS].iter().step_by(2).map(|c| c.abs()).sum();
        r.check(format!("f odd about {label}"), even / sf.max(f64::MIN_POSITIVE), tol.parity);
        let (cg, sg) = endpoint_fit(&p.t, &p.g, at_start, width, PARITY_DEGREE);
        let odd: f64 = cg[..PARITY_ORDERS].iter().skip(1).step_by(2).map(|c| c.abs()).sum();
        r.check(format!("g even about {label}"), odd / sg.max(f64::MIN_POSITIVE), tol.parity);
    }
    if p.family.is_midpoint_symmetric() {
        r.check("symmetric about 0", midpoint_parity(p), tol.parity);
    }
    r
}

/// Relative asymmetry of the profile about `t = 0`: `f`, `g` even and `h` odd.
pub fn midpoint_parity(p: &MetricProfile) -> f64 {
    let n = p.len();
    let mirror = |v: &[f64], sign: f64| {
        let scale = max_abs(v.iter().copied()).max(f64::MIN_POSITIVE);
        max_abs((0..n).map(|k| v[k] - sign * v[n - 1 - k])) / scale
    };
    let mut worst = mirror(&p.f, 1.0).max(mirror(&p.g, 1.0));
    if let Some(h) = &p.h {
        if p.family != FamilyTag::Kahler && p.family != FamilyTag::Product {
            worst = worst.max(mirror(h, -1.0));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gray::symmetric_p;
    use crate::turning::FnPotential;
    use crate::params::Sign;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn sine_test_solution() -> PeriodicSolution {
        // h = ½ sin(√2 t) on [−π/(2√2), π/(2√2)], i.e. φ″ = −2φ between ±½.
        let q = FnPotential::new(|u: f64| 0.5 - 2.0 * u * u, |u: f64| -4.0 * u);
        let prob = TurningProblem::new(&q, -0.5, 0.5).unwrap();
        integrate_turning(&prob, DEFAULT_SAMPLES).unwrap()
    }

    #[test]
    fn closed_form_sine_profile() {
        let sol = sine_test_solution();
        let p = build_profile(&sol, 1.0, Branch::Minus, 4, FamilyTag::Analytic).unwrap();
        let a = PI / (2.0 * 2f64.sqrt());
        assert!((p.a - a).abs() < 1e-9);
        let n = p.len();
        let h = p.h.as_ref().unwrap();
        for k in (0..n).step_by(50) {
            assert!((h[k] - 0.5 * (2f64.sqrt() * p.t[k]).sin()).abs() < 1e-10);
        }
        assert!((p.g[0] - 3f64.sqrt() / 2.0).abs() < 1e-10);
        assert!((p.g[n - 1] - 3f64.sqrt() / 2.0).abs() < 1e-10);
        assert!((p.f[n / 2] - FRAC_1_SQRT_2).abs() < 1e-10);
        let df_left = one_sided_derivative(&p.t, &p.f, 1, 5, true);
        let df_right = one_sided_derivative(&p.t, &p.f, 1, 5, false);
        assert!((df_left - 1.0).abs() < 1e-6);
        assert!((df_right + 1.0).abs() < 1e-6);
        let tol = Tolerances::default();
        assert!(check_parity(&p, &tol).passed());
        assert!(midpoint_parity(&p) < 1e-8);
    }

    #[test]
    fn branch_violation_is_reported() {
        let sol = sine_test_solution();
        assert!(build_profile(&sol, 0.4, Branch::Minus, 4, FamilyTag::Analytic).is_err());
        assert!(build_profile(&sol, 1.0, Branch::Plus, 4, FamilyTag::Analytic).is_err());
    }

    #[test]
    fn gray_profile_boundary_and_periods() {
        let pair = BoundaryPair::symmetric(0.5).unwrap();
        let poly = symmetric_p(0.5, 1.0, Sign::Plus).unwrap();
        let c = gray_profile(&poly, 1.0, &pair, 4, FamilyTag::GraySymmetric).unwrap();
        assert!(c.period_mismatch() < 1e-8, "{}", c.period_mismatch());
        assert!(c.energy_residual < 1e-9);
        let tol = Tolerances::default();
        let b = check_boundary(&c.profile, &tol);
        assert!(b.passed(), "{b:#?}");
        let par = check_parity(&c.profile, &tol);
        assert!(par.passed(), "{par:#?}");
    }

    #[test]
    fn boundary_negative_controls() {
        let pair = BoundaryPair::symmetric(0.5).unwrap();
        let poly = symmetric_p(0.5, 1.0, Sign::Plus).unwrap();
        let base = gray_profile(&poly, 1.0, &pair, 4, FamilyTag::GraySymmetric).unwrap().profile;
        let tol = Tolerances::default();

        let mut doubled = base.clone();
        doubled.f.iter_mut().for_each(|v| *v *= 2.0);
        let r = check_boundary(&doubled, &tol);
        let e = r.entry("f'(a) = -1").unwrap();
        assert!(!e.passed && (e.value.abs() - 1.0).abs() < 1e-5);

        let mut tilted = base.clone();
        let a = tilted.a;
        for (g, &t) in tilted.g.iter_mut().zip(&base.t) {
            *g += 1e-3 * (t + a);
        }
        let r = check_boundary(&tilted, &tol);
        assert!(!r.entry("g'(a) = 0").unwrap().passed);
    }

    #[test]
    fn cosine_profile_parity() {
        // f = cos t, g = 2 + cos² t on [−π/2, π/2]
        let p = MetricProfile::from_functions(PI / 2.0, 2001, 0.0, -4, |t| t.cos(), |t| 2.0 + t.cos().powi(2));
        let tol = Tolerances::default();
        assert!(check_parity(&p, &tol).passed());
        assert!(check_boundary(&p, &tol).passed());
    }

    #[test]
    fn validate_catches_bad_files() {
        let mut p = MetricProfile::from_functions(1.0, 101, 1.0, 4, |t| t, |_| 1.0);
        assert!(p.validate().is_ok());
        p.t[5] = p.t[4];
        assert!(p.validate().is_err());
        let mut q = MetricProfile::from_functions(1.0, 101, 1.0, 4, |t| t, |_| 1.0);
        q.g.pop();
        assert!(q.validate().is_err());
    }
}
