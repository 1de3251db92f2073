//! Bessel functions J_k and modified Bessel functions I_k of the first kind,
//! for small integer orders and bounded arguments.
//!
//! Both are evaluated from the ascending power series
//!
//! ```text
//! J_k(r) = sum_n (-1)^n (r/2)^(2n+k) / (n! (n+k)!)
//! I_k(r) = sum_n        (r/2)^(2n+k) / (n! (n+k)!)
//! ```
//!
//! with term-magnitude stopping. All arguments the densities need are bounded
//! (r <= lambda * t at desk scale), so no asymptotic-regime switch is needed;
//! arguments beyond the convergence budget error out instead.

use crate::error::{Error, Result};

/// Stopping rule for the ascending series.
#[derive(Debug, Clone, Copy)]
pub struct EvalTolerance {
    /// Stop once the next term magnitude falls below this.
    pub abs_tol: f64,
    /// Give up (with an error) after this many terms.
    pub max_terms: usize,
}

impl Default for EvalTolerance {
    fn default() -> Self {
        EvalTolerance {
            abs_tol: 1e-15,
            max_terms: 200,
        }
    }
}

fn series(k: u32, r: f64, sign: f64, tol: EvalTolerance) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::NegativeArgument(r));
    }
    if r == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let half = r / 2.0;
    // leading term (r/2)^k / k!
    let mut term = 1.0;
    for i in 1..=k {
        term *= half / i as f64;
    }
    let q = sign * half * half;
    let mut sum = term;
    for n in 1..=tol.max_terms {
        term *= q / (n as f64 * (n + k as usize) as f64);
        sum += term;
        if term.abs() < tol.abs_tol {
            return Ok(sum);
        }
    }
    Err(Error::BesselNonConvergence {
        order: k,
        arg: r,
        max_terms: tol.max_terms,
    })
}

/// Bessel function of the first kind, J_k(r), r >= 0.
pub fn bessel_j(k: u32, r: f64) -> Result<f64> {
    series(k, r, -1.0, EvalTolerance::default())
}

/// Modified Bessel function of the first kind, I_k(r), r >= 0.
pub fn bessel_i(k: u32, r: f64) -> Result<f64> {
    series(k, r, 1.0, EvalTolerance::default())
}

/// `bessel_j` with an explicit stopping rule.
pub fn bessel_j_with(k: u32, r: f64, tol: EvalTolerance) -> Result<f64> {
    series(k, r, -1.0, tol)
}

/// `bessel_i` with an explicit stopping rule.
pub fn bessel_i_with(k: u32, r: f64, tol: EvalTolerance) -> Result<f64> {
    series(k, r, 1.0, tol)
}
