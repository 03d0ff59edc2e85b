//! Result records shared by the verification routines.

use alloc::string::String;
use alloc::vec::Vec;

/// A named scalar attached to an instance.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

/// One checked inequality `lhs ≤ C·rhs`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Instance {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Constant assembled from the proof, when it provides one.
    pub theoretical_constant: Option<f64>,
    /// `lhs / rhs`.
    pub measured_constant: f64,
    pub pass: bool,
    pub witness: Option<String>,
    pub metrics: Vec<Metric>,
}

/// `lhs / rhs`, with `0/0 = 0` and `x/0 = ∞`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

impl Instance {
    /// Passes iff `lhs ≤ C·rhs + tol`, with `C` the theoretical constant
    /// when given; otherwise iff the measured constant is finite.
    pub fn bound(label: impl Into<String>, lhs: f64, rhs: f64, constant: Option<f64>, tol: f64) -> Self {
        let measured = ratio(lhs, rhs);
        let pass = match constant {
            Some(c) => lhs <= c * rhs + tol,
            None => measured.is_finite(),
        } && lhs.is_finite()
            && rhs.is_finite();
        Self {
            label: label.into(),
            lhs,
            rhs,
            theoretical_constant: constant,
            measured_constant: measured,
            pass,
            witness: None,
            metrics: Vec::new(),
        }
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }

    pub fn metric(mut self, name: impl Into<String>, value: f64) -> Self {
        self.metrics.push(Metric { name: name.into(), value });
        self
    }

    pub fn fail(mut self) -> Self {
        self.pass = false;
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

/// All instances of one theorem.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub theorem: String,
    pub instances: Vec<Instance>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(theorem: impl Into<String>) -> Self {
        Self { theorem: theorem.into(), instances: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.instances.iter().all(|i| i.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(|i| !i.pass)
    }

    /// Largest measured constant over the instances.
    pub fn max_measured(&self) -> f64 {
        self.instances.iter().map(|i| i.measured_constant).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_semantics() {
        assert!(Instance::bound("a", 1.0, 1.0, Some(1.0), 0.0).pass);
        assert!(!Instance::bound("a", 2.0, 1.0, Some(1.0), 0.0).pass);
        assert!(Instance::bound("a", 0.0, 0.0, None, 0.0).pass);
        assert!(!Instance::bound("a", 1.0, 0.0, None, 0.0).pass);
        assert_eq!(ratio(0.0, 0.0), 0.0);
    }
}
