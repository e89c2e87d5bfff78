//! Named residuals with tolerances, and the tolerance table shared by all checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Residual entries and an overall verdict equal to their conjunction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub title: String,
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>) -> Self {
        VerificationReport {
            title: title.into(),
            ..Default::default()
        }
    }

    /// Records `|value| ≤ tolerance`. NaN never passes.
    pub fn check(&mut self, name: impl Into<String>, value: f64, tolerance: f64) -> bool {
        let passed = value.abs() <= tolerance;
        self.entries.push(Entry {
            name: name.into(),
            value,
            tolerance,
            passed,
            note: None,
        });
        passed
    }

    /// Records a boolean condition; `value` is carried for information only.
    pub fn assert_true(&mut self, name: impl Into<String>, passed: bool, value: f64) -> bool {
        self.entries.push(Entry {
            name: name.into(),
            value,
            tolerance: 0.0,
            passed,
            note: None,
        });
        passed
    }

    pub fn note(&mut self, note: impl Into<String>) {
        if let Some(last) = self.entries.last_mut() {
            last.note = Some(note.into());
        }
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{}: {msg}", self.title);
        self.warnings.push(msg);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    /// Appends another report's entries, prefixing their names.
    pub fn merge(&mut self, other: VerificationReport) {
        let prefix = other.title;
        for mut e in other.entries {
            e.name = format!("{prefix}/{}", e.name);
            self.entries.push(e);
        }
        self.warnings
            .extend(other.warnings.into_iter().map(|w| format!("{prefix}: {w}")));
    }
}

/// Default tolerances for every check, overridable by name and scalable as a
/// whole through `GRAYFORGE_TOLERANCE_SCALE`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub boundary_value: f64,
    pub boundary_derivative: f64,
    pub parity: f64,
    pub eigen_equal: f64,
    pub gray_certificate: f64,
    pub mu_fit: f64,
    pub killing_1d: f64,
    pub einstein: f64,
    pub tensorial: f64,
    pub killing: f64,
    pub engine: f64,
    pub energy: f64,
    pub product_eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            boundary_value: 1e-6,
            boundary_derivative: 1e-5,
            parity: 1e-6,
            eigen_equal: 1e-6,
            gray_certificate: 1e-6,
            mu_fit: 1e-6,
            killing_1d: 1e-6,
            einstein: 1e-6,
            tensorial: 1e-4,
            killing: 1e-4,
            engine: 1e-4,
            energy: 1e-9,
            product_eigen: 1e-6,
        }
    }
}

pub const TOLERANCE_SCALE_VAR: &str = "GRAYFORGE_TOLERANCE_SCALE";

impl Tolerances {
    pub const NAMES: [&'static str; 13] = [
        "boundary_value",
        "boundary_derivative",
        "parity",
        "eigen_equal",
        "gray_certificate",
        "mu_fit",
        "killing_1d",
        "einstein",
        "tensorial",
        "killing",
        "engine",
        "energy",
        "product_eigen",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "boundary_value" => &mut self.boundary_value,
            "boundary_derivative" => &mut self.boundary_derivative,
            "parity" => &mut self.parity,
            "eigen_equal" => &mut self.eigen_equal,
            "gray_certificate" => &mut self.gray_certificate,
            "mu_fit" => &mut self.mu_fit,
            "killing_1d" => &mut self.killing_1d,
            "einstein" => &mut self.einstein,
            "tensorial" => &mut self.tensorial,
            "killing" => &mut self.killing,
            "engine" => &mut self.engine,
            "energy" => &mut self.energy,
            "product_eigen" => &mut self.product_eigen,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "tolerance {name} must be positive, got {value}"
            )));
        }
        let slot = self
            .slot(name)
            .ok_or_else(|| Error::InvalidParams(format!("unknown tolerance '{name}'")))?;
        *slot = value;
        Ok(())
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for name in Self::NAMES {
            *self.slot(name).unwrap() *= factor;
        }
        self
    }

    /// Defaults multiplied by `GRAYFORGE_TOLERANCE_SCALE` when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOLERANCE_SCALE_VAR) {
            Ok(raw) => {
                let f: f64 = raw.trim().parse().map_err(|_| {
                    Error::InvalidParams(format!("{TOLERANCE_SCALE_VAR}='{raw}' is not a number"))
                })?;
                if !(f > 0.0 && f.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "{TOLERANCE_SCALE_VAR} must be positive, got {f}"
                    )));
                }
                Ok(Self::default().scaled(f))
            }
            Err(_) => Ok(Self::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_is_conjunction() {
        let mut r = VerificationReport::new("t");
        assert!(r.passed());
        r.check("a", 1e-9, 1e-6);
        assert!(r.passed());
        r.check("b", f64::NAN, 1e-6);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn merge_prefixes_names() {
        let mut a = VerificationReport::new("outer");
        let mut b = VerificationReport::new("inner");
        b.check("x", 0.0, 1.0);
        a.merge(b);
        assert!(a.entry("inner/x").is_some());
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("tensorial", 1e-3).unwrap();
        assert_eq!(t.tensorial, 1e-3);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("parity", -1.0).is_err());
        let s = Tolerances::default().scaled(10.0);
        assert!((s.boundary_value - 1e-5).abs() < 1e-20);
    }
}
