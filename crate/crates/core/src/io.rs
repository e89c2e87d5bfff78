//! Profile files, reports and CSV export.
//!
//! A profile file is JSON with an explicit `format_version`. Sample arrays are
//! written as `{:.16e}` decimals (17 significant digits), which round-trip
//! every `f64` exactly, so write → read → write is byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::curvature::ricci_eigenvalues;
use crate::error::{Error, Result};
use crate::gray::{Coefficients, ProfilePolynomial};
use crate::kahler::KahlerSpec;
use crate::params::{FamilyParams, Sign};
use crate::product::ProductSpec;
use crate::profile::{Construction, FamilyTag, MetricProfile};
use crate::report::{Tolerances, VerificationReport};

pub const FORMAT_VERSION: u32 = 1;

/// Family-specific constants that produced the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientBlock {
    Gray {
        eps: Sign,
        x: f64,
        y: f64,
        coefficients: Coefficients,
        /// Coefficients of `P`, ascending.
        polynomial: Vec<f64>,
    },
    Einstein {
        x_star: f64,
        coefficients: Coefficients,
        polynomial: Vec<f64>,
    },
    Kahler(KahlerSpec),
    Product {
        #[serde(flatten)]
        spec: ProductSpec,
        effective_d: f64,
    },
    None,
}

impl CoefficientBlock {
    pub fn polynomial_of(poly: &ProfilePolynomial) -> Vec<f64> {
        poly.poly.coeffs().to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    pub samples: usize,
    /// Half-domain from the ODE and from the quadrature.
    pub a_ode: f64,
    pub a_quadrature: f64,
    pub energy_residual: f64,
    pub tolerances: Tolerances,
}

fn raw_array(values: &[f64]) -> std::result::Result<Box<RawValue>, serde_json::Error> {
    let mut out = String::with_capacity(values.len() * 25 + 2);
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(serde_json::Error::custom(format!("non-finite sample {v}")));
        }
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("{v:.16e}"));
    }
    out.push(']');
    RawValue::from_string(out)
}

fn ser_samples<S: Serializer>(values: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    raw_array(values).map_err(S::Error::custom)?.serialize(s)
}

fn ser_opt_samples<S: Serializer>(values: &Option<Vec<f64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match values {
        Some(v) => ser_samples(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub format_version: u32,
    pub family_tag: FamilyTag,
    pub params: Option<FamilyParams>,
    pub coefficients: CoefficientBlock,
    pub a: f64,
    pub s: f64,
    pub curvature: i32,
    #[serde(serialize_with = "ser_samples")]
    pub t_grid: Vec<f64>,
    #[serde(serialize_with = "ser_samples")]
    pub f: Vec<f64>,
    #[serde(serialize_with = "ser_samples")]
    pub g: Vec<f64>,
    #[serde(default, serialize_with = "ser_opt_samples")]
    pub h: Option<Vec<f64>>,
    pub metadata: Metadata,
}

impl ProfileFile {
    pub fn new(construction: Construction, params: Option<FamilyParams>, coefficients: CoefficientBlock, tolerances: Tolerances) -> Self {
        let Construction {
            profile,
            a_ode,
            a_quadrature,
            energy_residual,
        } = construction;
        ProfileFile {
            format_version: FORMAT_VERSION,
            family_tag: profile.family,
            params,
            coefficients,
            a: profile.a,
            s: profile.s,
            curvature: profile.curvature,
            metadata: Metadata {
                generator: format!("grayforge {}", env!("CARGO_PKG_VERSION")),
                samples: profile.t.len(),
                a_ode,
                a_quadrature,
                energy_residual,
                tolerances,
            },
            t_grid: profile.t,
            f: profile.f,
            g: profile.g,
            h: profile.h,
        }
    }

    pub fn profile(&self) -> MetricProfile {
        MetricProfile {
            family: self.family_tag,
            a: self.a,
            t: self.t_grid.clone(),
            h: self.h.clone(),
            f: self.f.clone(),
            g: self.g.clone(),
            s: self.s,
            curvature: self.curvature,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.profile().validate()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProfileFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Profile samples with closed-form eigenvalues, one row per grid node:
/// `t, f, g, h, lambda0, lambda1, lambda2`.
pub fn export_csv<W: Write>(profile: &MetricProfile, out: W) -> Result<()> {
    let field = ricci_eigenvalues(profile)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "f", "g", "h", "lambda0", "lambda1", "lambda2"])?;
    for i in 0..profile.len() {
        let h = profile.h.as_ref().map_or(String::new(), |h| format!("{:.16e}", h[i]));
        w.write_record([
            format!("{:.16e}", profile.t[i]),
            format!("{:.16e}", profile.f[i]),
            format!("{:.16e}", profile.g[i]),
            h,
            format!("{:.16e}", field.lambda0[i]),
            format!("{:.16e}", field.lambda1[i]),
            format!("{:.16e}", field.lambda2[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Combined verdict over several reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub family_tag: FamilyTag,
    pub passed: bool,
    pub reports: Vec<VerificationReport>,
}

impl VerificationSummary {
    pub fn new(family_tag: FamilyTag, reports: Vec<VerificationReport>) -> Self {
        VerificationSummary {
            family_tag,
            passed: reports.iter().all(VerificationReport::passed),
            reports,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
