use serde::{Deserialize, Serialize};

/// Outcome of one numerical inequality check `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl InequalityReport {
    /// `lhs <= rhs (1 + rel_tol)`.
    pub fn le(inequality: impl Into<String>, lhs: f64, rhs: f64, rel_tol: f64) -> Self {
        Self::with_pass(inequality, lhs, rhs, lhs <= rhs + rel_tol * rhs.abs())
    }

    pub fn with_pass(inequality: impl Into<String>, lhs: f64, rhs: f64, pass: bool) -> Self {
        Self {
            inequality: inequality.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_relative() {
        assert!(InequalityReport::le("x", 1.0 + 1e-7, 1.0, 1e-6).pass);
        assert!(!InequalityReport::le("x", 1.0 + 1e-5, 1.0, 1e-6).pass);
        let r = InequalityReport::le("x", 0.0, 0.0, 1e-6);
        assert!(r.pass && r.slack == 0.0);
        let j = serde_json::to_value(&r).unwrap();
        for k in ["inequality", "lhs", "rhs", "slack", "pass"] {
            assert!(j.get(k).is_some());
        }
    }
}
