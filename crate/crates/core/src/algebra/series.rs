//! Truncated power series in the variable w = t^2 - y^2.

use serde::Serialize;

use crate::error::{Error, Result};

/// A truncated power series `sum_n coeffs[n] * w^n`.
///
/// The zero series is represented by an empty coefficient list and is exact:
/// differentiating it never loses precision. Any non-empty series is a
/// truncation, and each derivative consumes one order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
}

impl PowerSeries {
    pub fn zero() -> Self {
        PowerSeries { coeffs: Vec::new() }
    }

    pub fn from_coeffs(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        PowerSeries { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Highest retained power of w, or `None` for the zero series.
    pub fn truncation_order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Term-by-term derivative d/dw. Truncation order drops by one.
    pub fn derivative(&self) -> Result<PowerSeries> {
        if self.is_zero() {
            return Ok(PowerSeries::zero());
        }
        if self.coeffs.len() == 1 {
            // A lone constant here is the remnant of a truncated tail, not an
            // exact constant; its derivative would be silently wrong.
            return Err(Error::TruncationExhausted);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &c)| n as f64 * c)
            .collect();
        Ok(PowerSeries::from_coeffs(coeffs))
    }

    /// Horner evaluation at w.
    pub fn eval(&self, w: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * w + c)
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    /// self += factor * other. The sum is only trusted up to the shorter
    /// truncation, so the result is cut there unless one side is zero.
    pub fn add_scaled(&mut self, other: &PowerSeries, factor: f64) {
        if other.is_zero() {
            return;
        }
        if self.is_zero() {
            self.coeffs = other.coeffs.iter().map(|&c| c * factor).collect();
            return;
        }
        let keep = self.coeffs.len().min(other.coeffs.len());
        self.coeffs.truncate(keep);
        for (c, &o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * factor;
        }
    }
}
