//! Runs the selected curvature checks against a profile file.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curvature::chart::{check_engine_agreement, check_gray_tensorial, check_killing_tensor, sample_points, Chart};
use crate::curvature::{check_einstein, check_gray_1d, ricci_eigenvalues, RicciField};
use crate::error::{Error, Result};
use crate::io::{CoefficientBlock, ProfileFile, VerificationSummary};
use crate::kahler::kahler_boundary_residuals;
use crate::product::product_eigenvalues;
use crate::profile::{check_boundary, check_parity, FamilyTag, MetricProfile};
use crate::report::{Tolerances, VerificationReport};

/// Number and seed of the chart sample points.
pub const CHART_SAMPLES: usize = 10;
pub const CHART_SEED: u64 = 0x6772_6179;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Boundary,
    Parity,
    Gray1d,
    Einstein,
    GrayTensorial,
    Killing,
    Engine,
    Family,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Boundary,
        Check::Parity,
        Check::Gray1d,
        Check::Einstein,
        Check::GrayTensorial,
        Check::Killing,
        Check::Engine,
        Check::Family,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::Boundary => "boundary",
            Check::Parity => "parity",
            Check::Gray1d => "gray-1d",
            Check::Einstein => "einstein",
            Check::GrayTensorial => "gray-tensorial",
            Check::Killing => "killing",
            Check::Engine => "engine",
            Check::Family => "family",
        }
    }

    /// Everything that applies to the family; `einstein` only for Einstein
    /// profiles.
    pub fn defaults(family: FamilyTag) -> Vec<Check> {
        Self::ALL
            .into_iter()
            .filter(|&c| c != Check::Einstein || family == FamilyTag::Einstein)
            .collect()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|c| c.as_str()).collect();
                Error::InvalidParams(format!("unknown check '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Closed-form checks tied to the file's coefficient block.
fn family_report(file: &ProfileFile, profile: &MetricProfile, field: &RicciField, tol: &Tolerances) -> VerificationReport {
    match &file.coefficients {
        CoefficientBlock::Kahler(spec) => kahler_boundary_residuals(spec),
        CoefficientBlock::Product { spec, .. } => {
            let mut r = VerificationReport::new("product-closed-form");
            let (mut dl, mut dm, mut cert): (f64, f64, f64) = (0.0, 0.0, 0.0);
            for i in 0..profile.len() {
                let (l, m) = product_eigenvalues(spec, profile.g[i]);
                dl = dl.max((field.lambda0[i] - l).abs()).max((field.lambda1[i] - l).abs());
                dm = dm.max((field.lambda2[i] - m).abs());
                cert = cert.max((l - 2.0 * m - 3.0 * spec.c3).abs());
                if !(field.lambda0[i].is_finite() && field.lambda2[i].is_finite()) {
                    dl = f64::NAN;
                }
            }
            r.check("lambda = -10 B h^2 - 3 C", dl, tol.product_eigen);
            r.check("mu = -5 B h^2 - 3 C", dm, tol.product_eigen);
            r.check("lambda - 2 mu = 3 C", cert, 1e-10);
            r.assert_true("C > 0, A < 0, B < 0", spec.sign_pattern_holds(), spec.c3);
            r
        }
        _ => {
            let mut r = VerificationReport::new("family");
            r.note("no closed-form family checks for this profile");
            r
        }
    }
}

pub fn run_checks(file: &ProfileFile, checks: &[Check], tol: &Tolerances) -> Result<VerificationSummary> {
    file.validate()?;
    let profile = file.profile();
    let field = ricci_eigenvalues(&profile)?;
    let needs_chart = checks
        .iter()
        .any(|c| matches!(c, Check::GrayTensorial | Check::Killing | Check::Engine));
    let chart = if needs_chart {
        Some(Chart::calibrated(&profile, &field))
    } else {
        None
    };
    let samples = sample_points(&profile, CHART_SAMPLES, CHART_SEED);

    let mut reports = Vec::new();
    for &check in checks {
        let report = match check {
            Check::Boundary => check_boundary(&profile, tol),
            Check::Parity => check_parity(&profile, tol),
            Check::Gray1d => check_gray_1d(&field, &profile, tol),
            Check::Einstein => check_einstein(&field, tol),
            Check::Family => family_report(file, &profile, &field, tol),
            Check::GrayTensorial | Check::Killing | Check::Engine => match chart.as_ref().expect("built above") {
                Ok(chart) => match check {
                    Check::GrayTensorial => check_gray_tensorial(chart, &samples, tol),
                    Check::Killing => check_killing_tensor(chart, &samples, tol),
                    _ => check_engine_agreement(chart, &field, &samples, tol),
                },
                Err(e) => {
                    let mut r = VerificationReport::new(check.as_str());
                    r.check("chart calibration", f64::NAN, 0.0);
                    r.warn(e.to_string());
                    r
                }
            },
        };
        reports.push(report);
    }
    Ok(VerificationSummary::new(file.family_tag, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{construct, FamilyRequest};

    #[test]
    fn check_names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.as_str().parse::<Check>().unwrap(), c);
        }
        assert!("bogus".parse::<Check>().is_err());
        assert!(!Check::defaults(FamilyTag::Kahler).contains(&Check::Einstein));
        assert!(Check::defaults(FamilyTag::Einstein).contains(&Check::Einstein));
    }

    #[test]
    fn constructed_gray_profile_verifies() {
        let tol = Tolerances::default();
        let file = construct(&FamilyRequest::GraySymmetric { genus: 0, k: 1, x: 0.5 }, &tol).unwrap();
        let summary = run_checks(&file, &Check::defaults(file.family_tag), &tol).unwrap();
        assert!(summary.passed, "{}", summary.to_json().unwrap());
    }

    #[test]
    fn zeroed_f_fails() {
        let tol = Tolerances::default();
        let mut file = construct(&FamilyRequest::GraySymmetric { genus: 0, k: 1, x: 0.5 }, &tol).unwrap();
        file.f.iter_mut().for_each(|v| *v = 0.0);
        let summary = run_checks(&file, &Check::defaults(file.family_tag), &tol).unwrap();
        assert!(!summary.passed);
        let failed: Vec<&str> = summary
            .reports
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.title.as_str())
            .collect();
        assert!(failed.contains(&"boundary") && failed.contains(&"gray-1d"), "{failed:?}");
    }
}
