use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

/// Coefficients of `u_h = Σ uᵢ φᵢ` over the interior nodes; boundary values are implicitly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeFunction(Vec<f64>);

impl FeFunction {
    pub fn new(coeffs: Vec<f64>) -> Self {
        FeFunction(coeffs)
    }

    pub fn zeros(n: usize) -> Self {
        FeFunction(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        FeFunction(self.0.iter().map(|v| c * v).collect())
    }

    /// `self + c * other`.
    pub fn plus_scaled(&self, c: f64, other: &[f64]) -> Self {
        assert_eq!(self.len(), other.len());
        FeFunction(self.0.iter().zip(other).map(|(a, b)| a + c * b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Self {
        self.plus_scaled(-1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for FeFunction {
    fn from(v: Vec<f64>) -> Self {
        FeFunction(v)
    }
}

impl Deref for FeFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for FeFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}
