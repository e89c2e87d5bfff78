//! Discrete topological data of a ruled surface and the derived constants
//! every family shares.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Branch of the normalization `h² = s² + A·g²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Minus,
    Zero,
    Plus,
}

impl Branch {
    pub fn value(self) -> i32 {
        match self {
            Branch::Minus => -1,
            Branch::Zero => 0,
            Branch::Plus => 1,
        }
    }
}

/// A sign in {−1, 0, 1}; used for ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Minus,
    Zero,
    Plus,
}

impl Sign {
    pub fn from_i32(v: i32) -> Self {
        match v.signum() {
            -1 => Sign::Minus,
            0 => Sign::Zero,
            _ => Sign::Plus,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Zero => 0.0,
            Sign::Plus => 1.0,
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.value() as i8
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Sign::Minus),
            0 => Ok(Sign::Zero),
            1 => Ok(Sign::Plus),
            other => Err(format!("sign must be -1, 0 or 1, got {other}")),
        }
    }
}

/// Non-negative rational `num/den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn integer(n: u64) -> Self {
        Ratio { num: n, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact `self < n`.
    pub fn lt_int(self, n: u64) -> bool {
        (self.num as u128) < (n as u128) * (self.den as u128)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Parameters shared by every family: genus and Chern number of the
/// circle bundle, curvature `K` of the base, the ratio `s`, the branch `A`
/// and the sign `ε = −sgn(K·A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub genus: u32,
    pub chern_k: u32,
    pub curvature: i32,
    pub s_exact: Ratio,
    pub s: f64,
    pub branch: Branch,
    pub eps: Sign,
    pub euler_chi: i32,
}

impl FamilyParams {
    pub fn base_curvature(genus: u32) -> i32 {
        match genus {
            0 => 4,
            1 => 0,
            _ => -4,
        }
    }

    /// The Gray, Einstein and Kähler families, all with `s > 0`.
    pub fn derive(genus: u32, chern_k: u32, branch: Branch) -> Result<Self> {
        if chern_k == 0 {
            return Err(Error::InvalidParams(
                "chern_k = 0 gives s = 0; only the product family allows it".into(),
            ));
        }
        Ok(Self::assemble(genus, chern_k, branch))
    }

    /// The `k = 0` product family on `CP¹ × Σ_g`, which needs `K = −4`.
    pub fn product(genus: u32) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidParams(format!(
                "the product family lives over genus >= 2, got {genus}"
            )));
        }
        Ok(Self::assemble(genus, 0, Branch::Zero))
    }

    fn assemble(genus: u32, chern_k: u32, branch: Branch) -> Self {
        let euler_chi = 2 - 2 * genus as i32;
        let curvature = Self::base_curvature(genus);
        let s_exact = if genus == 1 {
            Ratio::integer(chern_k as u64)
        } else {
            Ratio::new(2 * chern_k as u64, euler_chi.unsigned_abs() as u64)
        };
        let eps = Sign::from_i32(-(curvature.signum() * branch.value()));
        FamilyParams {
            genus,
            chern_k,
            curvature,
            s_exact,
            s: s_exact.to_f64(),
            branch,
            eps,
            euler_chi,
        }
    }

    pub fn k(&self) -> f64 {
        self.curvature as f64
    }
}

/// Convenience wrapper matching the usual call shape.
pub fn derive_params(genus: u32, chern_k: u32, branch: Branch) -> Result<FamilyParams> {
    FamilyParams::derive(genus, chern_k, branch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn genus_zero() {
        let p = derive_params(0, 1, Branch::Minus).unwrap();
        assert_eq!(p.curvature, 4);
        assert_eq!(p.s_exact, Ratio::integer(1));
        assert_eq!(p.eps, Sign::Plus);
        assert_eq!(p.euler_chi, 2);
    }

    #[test]
    fn genus_three() {
        let p = derive_params(3, 2, Branch::Minus).unwrap();
        assert_eq!(p.curvature, -4);
        assert_eq!(p.s, 1.0);
        assert_eq!(p.eps, Sign::Minus);
    }

    #[test]
    fn torus_is_flat() {
        let p = derive_params(1, 2, Branch::Minus).unwrap();
        assert_eq!(p.curvature, 0);
        assert_eq!(p.s, 2.0);
        assert_eq!(p.eps, Sign::Zero);
    }

    #[test]
    fn s_is_reduced_rational() {
        let p = derive_params(5, 6, Branch::Minus).unwrap();
        assert_eq!(p.s_exact, Ratio::new(3, 2));
        assert!(p.s_exact.lt_int(2));
        let q = derive_params(5, 8, Branch::Minus).unwrap();
        assert!(!q.s_exact.lt_int(2));
    }

    #[test]
    fn zero_k_rejected_outside_product() {
        assert!(derive_params(3, 0, Branch::Minus).is_err());
        let p = FamilyParams::product(3).unwrap();
        assert_eq!(p.s, 0.0);
        assert_eq!(p.eps, Sign::Zero);
        assert!(FamilyParams::product(1).is_err());
    }

    proptest! {
        #[test]
        fn invariants(genus in 0u32..40, k in 1u32..60, a in prop_oneof![Just(Branch::Minus), Just(Branch::Zero), Just(Branch::Plus)]) {
            let p = derive_params(genus, k, a).unwrap();
            prop_assert_eq!(p.curvature == 4, genus == 0);
            prop_assert_eq!(p.curvature == 0, genus == 1);
            prop_assert_eq!(p.curvature == -4, genus >= 2);
            prop_assert_eq!(p.eps == Sign::Zero, p.curvature == 0 || a == Branch::Zero);
            let expected = if genus == 1 { k as f64 } else { 2.0 * k as f64 / (2.0 * genus as f64 - 2.0).abs() };
            prop_assert!((p.s - expected).abs() < 1e-12 * expected);
            // linear in k at fixed genus
            let q = derive_params(genus, 2 * k, a).unwrap();
            prop_assert!((q.s - 2.0 * p.s).abs() < 1e-12 * q.s);
        }
    }
}
