use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every module.
///
/// Defaults are sized for double-precision dense eigensolvers on matrices of
/// dimension at most 64, which deliver residuals around 1e-13.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity residual, relative to the Frobenius norm.
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    pub proj: f64,
    pub recon: f64,
    /// Eigenvalue clustering gap, scaled by `max(1, ‖H‖_F)`.
    pub cluster: f64,
    pub kernel: f64,
    pub cptp: f64,
    /// Minimum margin for a criterion inequality to count as holding.
    pub decision: f64,
    /// Maximum magnitude of a first-order trace that still counts as zero.
    pub first_order: f64,
    /// Minimum |f(ε)| in bits for a numeric witness.
    pub numeric_margin: f64,
    pub traceless: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            trace: 1e-10,
            psd: 1e-9,
            proj: 1e-9,
            recon: 1e-9,
            cluster: 1e-9,
            kernel: 1e-10,
            cptp: 1e-10,
            decision: 1e-9,
            first_order: 1e-9,
            numeric_margin: 1e-8,
            traceless: 1e-12,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 12] = [
        "herm",
        "trace",
        "psd",
        "proj",
        "recon",
        "cluster",
        "kernel",
        "cptp",
        "decision",
        "first_order",
        "numeric_margin",
        "traceless",
    ];

    /// Sets a tolerance by name. Accepts the field names, plus `decision_tol`
    /// and `first_order_tol` spellings.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::ParameterRange {
                name: key.to_string(),
                value,
                expected: "finite and non-negative".into(),
            });
        }
        let key = key.strip_suffix("_tol").unwrap_or(key);
        let slot = match key {
            "herm" => &mut self.herm,
            "trace" => &mut self.trace,
            "psd" => &mut self.psd,
            "proj" => &mut self.proj,
            "recon" => &mut self.recon,
            "cluster" => &mut self.cluster,
            "kernel" => &mut self.kernel,
            "cptp" => &mut self.cptp,
            "decision" => &mut self.decision,
            "first_order" => &mut self.first_order,
            "numeric_margin" => &mut self.numeric_margin,
            "traceless" => &mut self.traceless,
            other => return Err(Error::UnknownTolerance(other.to_string())),
        };
        *slot = value;
        Ok(())
    }

    /// Clustering tolerance for an operator of the given Frobenius norm.
    pub fn cluster_for(&self, norm: f64) -> f64 {
        self.cluster * norm.max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_accepts_suffix_spelling() {
        let mut t = Tolerances::default();
        t.set("decision_tol", 1e-6).unwrap();
        t.set("kernel", 1e-12).unwrap();
        assert_eq!(t.decision, 1e-6);
        assert_eq!(t.kernel, 1e-12);
    }

    #[test]
    fn set_rejects_unknown_and_negative() {
        let mut t = Tolerances::default();
        assert!(matches!(t.set("bogus", 1.0), Err(Error::UnknownTolerance(_))));
        assert!(t.set("psd", -1.0).is_err());
    }
}
