//! Dense activity vectors exchanged between schema ports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("pattern dimension must be positive")]
    ZeroDim,
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Fixed-length real vector. Every value is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityPattern {
    values: Vec<f64>,
}

impl ActivityPattern {
    pub fn new(values: Vec<f64>) -> Result<Self, PatternError> {
        if values.is_empty() {
            return Err(PatternError::ZeroDim);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(PatternError::NonFinite { index, value });
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "pattern dimension must be positive");
        Self { values: vec![0.0; dim] }
    }

    pub fn scalar(v: f64) -> Self {
        Self::new(vec![v]).expect("finite scalar")
    }

    /// Builds a pattern without the finiteness check. Used by behaviors whose
    /// output is validated by the network at commit time.
    pub(crate) fn unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// True when every element is exactly zero.
    pub fn is_silent(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Mean absolute value; the activity summary used by threshold tests.
    pub fn mean_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn rms(&self) -> f64 {
        self.norm() / (self.values.len() as f64).sqrt()
    }

    pub fn check_dim(&self, expected: usize) -> Result<(), PatternError> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(PatternError::DimensionMismatch { expected, got: self.dim() })
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PatternError> {
        other.check_dim(self.dim())?;
        Ok(Self::unchecked(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Self) -> Result<Self, PatternError> {
        other.check_dim(self.dim())?;
        Ok(Self::unchecked(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect()))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::unchecked(self.values.iter().map(|v| v * k).collect())
    }

    pub fn rectify(&self) -> Self {
        Self::unchecked(self.values.iter().map(|v| v.max(0.0)).collect())
    }
}

impl From<f64> for ActivityPattern {
    fn from(v: f64) -> Self {
        Self::scalar(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_and_empty() {
        assert_eq!(ActivityPattern::new(vec![]), Err(PatternError::ZeroDim));
        assert!(matches!(
            ActivityPattern::new(vec![0.0, f64::NAN]),
            Err(PatternError::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn summaries() {
        let p = ActivityPattern::new(vec![1.0, -3.0, 0.0, 2.0]).unwrap();
        assert_eq!(p.mean_abs(), 1.5);
        assert_eq!(p.max_abs(), 3.0);
        assert_eq!(p.argmax(), 3);
        assert!(!p.is_silent());
        assert!(ActivityPattern::zeros(3).is_silent());
    }
}
