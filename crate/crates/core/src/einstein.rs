//! Einstein members of the symmetric Gray family: `D = E = 0`.
//!
//! With `E = 0` the closed-form `D` has numerator `5·Q(x)` for the quartic
//! `Q(x) = −6s − 24εx − 12sx² − 8εx³ + 2sx⁴`, so Einstein profiles correspond
//! to roots of `Q` in `(0, 1)`. For `ε = −1` there is exactly one such root
//! when `0 < s < 2` and none otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gray::{p_poly, positivity_check, solve_cd, BoundaryPair, Coefficients, ProfilePolynomial, Provenance};
use crate::params::{Branch, FamilyParams, Ratio, Sign};
use crate::poly::{bisect, newton_polish, Polynomial};
use crate::profile::{gray_profile, Construction, FamilyTag};

/// `Q(x) = −6s − 24εx − 12sx² − 8εx³ + 2sx⁴`.
pub fn q_poly(s: f64, eps: Sign) -> Polynomial {
    let e = eps.value();
    Polynomial::new(vec![-6.0 * s, -24.0 * e, -12.0 * s, -8.0 * e, 2.0 * s])
}

/// `D` at `E = 0` as the rational function `5·Q(x) / (2(x−1)x(x+1)(15 + 10x² − x⁴))`.
pub fn d_at(x: f64, s: f64, eps: Sign) -> Result<f64> {
    let x2 = x * x;
    let den = 2.0 * (x - 1.0) * x * (x + 1.0) * (15.0 + 10.0 * x2 - x2 * x2);
    if den.abs() < 1e-12 {
        return Err(Error::Degenerate {
            what: "2(x−1)x(x+1)(15 + 10x² − x⁴) near 0",
            value: x,
        });
    }
    Ok(5.0 * q_poly(s, eps).eval(x) / den)
}

/// `Q″(x) = −24(s + 2εx − sx²)`.
pub fn q_second_derivative(x: f64, s: f64, eps: Sign) -> f64 {
    -24.0 * (s + 2.0 * eps.value() * x - s * x * x)
}

/// The root `α_s = s/(√(1+s²) + 1)` of `Q″` in `(0, 1)` for `ε = −1`.
pub fn alpha_s(s: f64) -> f64 {
    s / ((1.0 + s * s).sqrt() + 1.0)
}

/// `Q′(α_s) = 16(2 − (1+s²)/(√(1+s²) + 1))`.
pub fn q_slope_at_alpha(s: f64) -> f64 {
    let r = (1.0 + s * s).sqrt();
    16.0 * (2.0 - (1.0 + s * s) / (r + 1.0))
}

/// `√(3 + 2√3)`: `Q′(α_s) > 0` exactly for `s` below this value.
pub fn monotonicity_threshold() -> f64 {
    (3.0 + 2.0 * 3f64.sqrt()).sqrt()
}

/// The unique root of `Q` in `(0, 1)`, if any.
pub fn q_root(s: f64, eps: Sign) -> Option<f64> {
    if eps != Sign::Minus || !(s > 0.0 && s < 2.0) {
        return None;
    }
    let q = q_poly(s, eps);
    // Q(0) = −6s < 0 and Q(1) = 32 − 16s > 0
    let r = bisect(|x| q.eval(x), 0.0, 1.0, 1e-10);
    Some(newton_polish(|x| q.eval_with_derivative(x), r, 0.0, 1.0))
}

/// One Einstein member: genus `g ≥ 2`, Chern number `k`, `s = k/(g − 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EinsteinSpec {
    pub genus: u32,
    pub k: u32,
    pub s: f64,
    pub eps: Sign,
    pub x_star: f64,
    pub coeffs: Coefficients,
}

impl EinsteinSpec {
    pub fn new(genus: u32, k: u32) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidParams(format!("Einstein members need genus >= 2, got {genus}")));
        }
        let params = FamilyParams::derive(genus, k, Branch::Minus)?;
        // s = k/(g − 1) < 2, decided on the exact ratio
        if !params.s_exact.lt_int(2) {
            return Err(Error::infeasible(
                "Q has a root in (0, 1) only for s < 2",
                params.s - 2.0,
            ));
        }
        let s = params.s;
        let x_star = q_root(s, params.eps).ok_or_else(|| Error::infeasible("Q root in (0, 1)", s))?;
        let (c_norm, _) = solve_cd(x_star, 0.0, s, params.eps)?;
        Ok(EinsteinSpec {
            genus,
            k,
            s,
            eps: params.eps,
            x_star,
            coeffs: Coefficients::from_normalized(c_norm, 0.0, 0.0, s),
        })
    }

    pub fn s_exact(&self) -> Ratio {
        Ratio::new(self.k as u64, (self.genus - 1) as u64)
    }

    pub fn params(&self) -> FamilyParams {
        FamilyParams::derive(self.genus, self.k, Branch::Minus).expect("validated in new")
    }

    /// The even quartic `P` with `D = E = 0`.
    pub fn polynomial(&self) -> ProfilePolynomial {
        ProfilePolynomial {
            provenance: Provenance::Einstein,
            ..p_poly(&self.coeffs, self.eps)
        }
    }

    pub fn pair(&self) -> BoundaryPair {
        BoundaryPair::symmetric(self.x_star).expect("x* lies in (0, 1)")
    }
}

/// Every Einstein member over genus `g`: `k = 1, …, 2g − 3`.
pub fn enumerate_einstein(genus: u32) -> Vec<EinsteinSpec> {
    if genus < 2 {
        return Vec::new();
    }
    (1..)
        .take_while(|&k| Ratio::new(k as u64, (genus - 1) as u64).lt_int(2))
        .filter_map(|k| match EinsteinSpec::new(genus, k) {
            Ok(spec) => Some(spec),
            Err(e) => {
                log::warn!("genus {genus}, k = {k}: {e}");
                None
            }
        })
        .collect()
}

/// Builds the profile of an Einstein member.
pub fn einstein_profile(spec: &EinsteinSpec) -> Result<Construction> {
    let poly = spec.polynomial();
    let pair = spec.pair();
    if !positivity_check(&poly, &pair) {
        return Err(Error::infeasible("P > 0 on (-x*, x*)", spec.x_star));
    }
    let params = spec.params();
    gray_profile(&poly, spec.s, &pair, params.curvature, FamilyTag::Einstein)
}
