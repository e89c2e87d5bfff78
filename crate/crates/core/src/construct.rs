//! One entry point per family: parameters in, profile file out.

use serde::{Deserialize, Serialize};

use crate::einstein::{einstein_profile, EinsteinSpec};
use crate::error::{Error, Result};
use crate::gray::{asymmetric_pair_at, eps_s, find_asymmetric_pair, positivity_check, solve_cd, symmetric_p, AsymmetricSolution, BoundaryPair, Coefficients};
use crate::io::{CoefficientBlock, ProfileFile};
use crate::kahler::{kahler_profile, KahlerSpec};
use crate::params::{Branch, FamilyParams, Sign};
use crate::product::{product_profile, ProductSpec};
use crate::profile::{gray_profile, FamilyTag};
use crate::report::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyRequest {
    GraySymmetric { genus: u32, k: u32, x: f64 },
    GrayAsymmetric { genus: u32, k: u32, branch: Branch },
    Einstein { genus: u32, k: u32 },
    Kahler { s: f64, d: f64 },
    Product { alpha: f64, genus: u32 },
}

pub fn construct(request: &FamilyRequest, tolerances: &Tolerances) -> Result<ProfileFile> {
    match *request {
        FamilyRequest::GraySymmetric { genus, k, x } => gray_symmetric(genus, k, x, tolerances),
        FamilyRequest::GrayAsymmetric { genus, k, branch } => gray_asymmetric(genus, k, branch, tolerances),
        FamilyRequest::Einstein { genus, k } => {
            let spec = EinsteinSpec::new(genus, k)?;
            let c = einstein_profile(&spec)?;
            let block = CoefficientBlock::Einstein {
                x_star: spec.x_star,
                coefficients: spec.coeffs,
                polynomial: CoefficientBlock::polynomial_of(&spec.polynomial()),
            };
            Ok(ProfileFile::new(c, Some(spec.params()), block, *tolerances))
        }
        FamilyRequest::Kahler { s, d } => {
            let spec = KahlerSpec::new(s, d)?;
            let c = kahler_profile(&spec)?;
            Ok(ProfileFile::new(c, None, CoefficientBlock::Kahler(spec), *tolerances))
        }
        FamilyRequest::Product { alpha, genus } => {
            let params = FamilyParams::product(genus)?;
            let spec = ProductSpec::new(alpha)?;
            let c = product_profile(&spec)?;
            let block = CoefficientBlock::Product {
                spec,
                effective_d: spec.effective_d(),
            };
            Ok(ProfileFile::new(c, Some(params), block, *tolerances))
        }
    }
}

/// Symmetric pair `y = −x` with `E = 0` on the `|h| < s` branch.
fn gray_symmetric(genus: u32, k: u32, x: f64, tolerances: &Tolerances) -> Result<ProfileFile> {
    let params = FamilyParams::derive(genus, k, Branch::Minus)?;
    let (s, eps) = (params.s, params.eps);
    let upper = eps_s(s, eps);
    if !(x > 0.0 && x < upper) {
        return Err(Error::infeasible(format!("x in (0, eps_s) with eps_s = {upper}"), x));
    }
    let poly = symmetric_p(x, s, eps)?;
    let pair = BoundaryPair::symmetric(x)?;
    if !positivity_check(&poly, &pair) {
        return Err(Error::infeasible("z0 > 0 on (-x, x)", x));
    }
    let (c, d) = solve_cd(x, 0.0, s, eps)?;
    let construction = gray_profile(&poly, s, &pair, params.curvature, FamilyTag::GraySymmetric)?;
    let block = CoefficientBlock::Gray {
        eps,
        x,
        y: -x,
        coefficients: Coefficients::from_normalized(c, d, 0.0, s),
        polynomial: CoefficientBlock::polynomial_of(&poly),
    };
    Ok(ProfileFile::new(construction, Some(params), block, *tolerances))
}

/// Grid search over `x` for a feasible off-diagonal pair on the branch.
fn search_asymmetric(s: f64, eps: Sign, branch: Branch) -> Result<Option<AsymmetricSolution>> {
    if eps == Sign::Minus && branch == Branch::Minus {
        return find_asymmetric_pair(s);
    }
    let (lo, hi) = match branch {
        Branch::Plus => (1.0, 4.0),
        _ => (-1.0, 1.0),
    };
    let n = 400;
    Ok((1..n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .find_map(|x| asymmetric_pair_at(x, s, eps, branch)))
}

fn gray_asymmetric(genus: u32, k: u32, branch: Branch, tolerances: &Tolerances) -> Result<ProfileFile> {
    if branch == Branch::Zero {
        return Err(Error::InvalidParams("asymmetric Gray profiles need branch A = ±1".into()));
    }
    let params = FamilyParams::derive(genus, k, branch)?;
    let sol = search_asymmetric(params.s, params.eps, branch)?
        .ok_or_else(|| Error::infeasible("G(x, y) = 0 has a feasible pair off the diagonal", params.s))?;
    let construction = gray_profile(&sol.poly, params.s, &sol.pair, params.curvature, FamilyTag::GrayAsymmetric)?;
    let block = CoefficientBlock::Gray {
        eps: params.eps,
        x: sol.pair.x,
        y: sol.pair.y,
        coefficients: sol.coeffs,
        polynomial: CoefficientBlock::polynomial_of(&sol.poly),
    };
    Ok(ProfileFile::new(construction, Some(params), block, *tolerances))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_is_deterministic() {
        let req = FamilyRequest::GraySymmetric { genus: 0, k: 1, x: 0.5 };
        let tol = Tolerances::default();
        let a = construct(&req, &tol).unwrap().to_json().unwrap();
        let b = construct(&req, &tol).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_requests() {
        let tol = Tolerances::default();
        let cases = [
            FamilyRequest::Einstein { genus: 3, k: 4 },
            FamilyRequest::Kahler { s: 2.0, d: 1.0 },
            FamilyRequest::GraySymmetric { genus: 3, k: 1, x: 0.99 },
        ];
        for req in cases {
            assert!(construct(&req, &tol).unwrap_err().is_infeasible(), "{req:?}");
        }
        assert!(!construct(&FamilyRequest::Product { alpha: 0.5, genus: 2 }, &tol)
            .unwrap_err()
            .is_infeasible());
    }

    #[test]
    fn asymmetric_member_below_threshold() {
        // genus 2, k = 2: s = 2 < η
        let req = FamilyRequest::GrayAsymmetric { genus: 2, k: 2, branch: Branch::Minus };
        let file = construct(&req, &Tolerances::default()).unwrap();
        match file.coefficients {
            CoefficientBlock::Gray { x, y, .. } => assert!((x + y).abs() > 1e-6),
            ref b => panic!("unexpected block {b:?}"),
        }
    }
}
