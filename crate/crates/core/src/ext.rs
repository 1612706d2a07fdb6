//! Extended nonnegative reals and small vector helpers.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A value in `[0, +inf]` with infinity as a tagged variant rather than a
/// float overflow, so that diverging exponential moments propagate
/// structurally instead of as `inf` arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Finite payload, or `None` for `PosInf`.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Collapse to `f64`, mapping `PosInf` to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            ExtReal::Finite(v)
        } else {
            ExtReal::PosInf
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Validates that `xi` is a unit vector of the expected dimension.
pub fn check_unit(xi: &[f64], dim: usize) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::domain(format!(
            "direction has dimension {}, expected {}",
            xi.len(),
            dim
        )));
    }
    let n = norm(xi);
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("direction is not unit: |xi| = {n}")));
    }
    Ok(())
}

/// Equally spaced unit directions: `n` angles in 2D, the pair `{+1, -1}`
/// in 1D (any `n` collapses to the pair).
pub fn default_directions(dim: usize, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                vec![phi.cos(), phi.sin()]
            })
            .collect(),
        d => panic!("unsupported dimension {d} for direction sets"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_real_roundtrip() {
        assert_eq!(ExtReal::from_f64(2.5), ExtReal::Finite(2.5));
        assert_eq!(ExtReal::from_f64(f64::INFINITY), ExtReal::PosInf);
        assert!(ExtReal::PosInf.as_f64().is_infinite());
        assert_eq!(ExtReal::Finite(1.0).finite(), Some(1.0));
        assert_eq!(ExtReal::PosInf.finite(), None);
    }

    #[test]
    fn unit_check() {
        assert!(check_unit(&[1.0], 1).is_ok());
        assert!(check_unit(&[0.6, 0.8], 2).is_ok());
        assert!(check_unit(&[0.6, 0.81], 2).is_err());
        assert!(check_unit(&[1.0], 2).is_err());
    }

    #[test]
    fn direction_sets() {
        let d1 = default_directions(1, 64);
        assert_eq!(d1, vec![vec![1.0], vec![-1.0]]);
        let d2 = default_directions(2, 64);
        assert_eq!(d2.len(), 64);
        for xi in &d2 {
            assert!((norm(xi) - 1.0).abs() < 1e-14);
        }
    }
}
