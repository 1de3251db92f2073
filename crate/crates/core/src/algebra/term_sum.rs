//! Differentiation-closed function representation: finite sums of monomials
//! `c * t^a * y^b * S(t^2 - y^2)` with `S` a truncated power series.
//!
//! The chain rule keeps this family closed:
//!
//! ```text
//! d/dt [t^a y^b S(w)] = a t^(a-1) y^b S(w) + 2 t^(a+1) y^b S'(w)
//! d/dy [t^a y^b S(w)] = b t^a y^(b-1) S(w) - 2 t^a y^(b+1) S'(w)
//! ```
//!
//! Because w = t^2 - y^2 relates the monomials, the representation is not
//! unique; equality of two `TermSum`s means pointwise evaluation agreement.

use serde::Serialize;

use crate::algebra::series::PowerSeries;
use crate::error::Result;

/// One monomial-times-series term.
#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub coeff: f64,
    pub t_pow: u32,
    pub y_pow: u32,
    pub series: PowerSeries,
}

/// A finite sum of [`Term`]s.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TermSum {
    terms: Vec<Term>,
}

impl TermSum {
    pub fn zero() -> Self {
        TermSum { terms: Vec::new() }
    }

    pub fn monomial(coeff: f64, t_pow: u32, y_pow: u32, series: PowerSeries) -> Self {
        let mut ts = TermSum {
            terms: vec![Term {
                coeff,
                t_pow,
                y_pow,
                series,
            }],
        };
        ts.compress();
        ts
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest remaining truncation order among the constituent series, or
    /// `None` for the zero sum. This is how many more differentiations the
    /// representation can absorb before becoming untrustworthy.
    pub fn truncation_headroom(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter_map(|t| t.series.truncation_order())
            .min()
    }

    pub fn diff_t(&self) -> Result<TermSum> {
        let mut out = TermSum::zero();
        for term in &self.terms {
            if term.t_pow > 0 {
                out.push(Term {
                    coeff: term.coeff * term.t_pow as f64,
                    t_pow: term.t_pow - 1,
                    y_pow: term.y_pow,
                    series: term.series.clone(),
                });
            }
            let d = term.series.derivative()?;
            if !d.is_zero() {
                out.push(Term {
                    coeff: 2.0 * term.coeff,
                    t_pow: term.t_pow + 1,
                    y_pow: term.y_pow,
                    series: d,
                });
            }
        }
        out.compress();
        Ok(out)
    }

    pub fn diff_y(&self) -> Result<TermSum> {
        let mut out = TermSum::zero();
        for term in &self.terms {
            if term.y_pow > 0 {
                out.push(Term {
                    coeff: term.coeff * term.y_pow as f64,
                    t_pow: term.t_pow,
                    y_pow: term.y_pow - 1,
                    series: term.series.clone(),
                });
            }
            let d = term.series.derivative()?;
            if !d.is_zero() {
                out.push(Term {
                    coeff: -2.0 * term.coeff,
                    t_pow: term.t_pow,
                    y_pow: term.y_pow + 1,
                    series: d,
                });
            }
        }
        out.compress();
        Ok(out)
    }

    /// Pointwise evaluation with compensated summation over terms.
    pub fn eval(&self, t: f64, y: f64) -> f64 {
        let w = t * t - y * y;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for term in &self.terms {
            let v = term.coeff
                * t.powi(term.t_pow as i32)
                * y.powi(term.y_pow as i32)
                * term.series.eval(w);
            let yk = v - comp;
            let tk = sum + yk;
            comp = (tk - sum) - yk;
            sum = tk;
        }
        sum
    }

    pub fn scale(&mut self, factor: f64) {
        for term in &mut self.terms {
            term.coeff *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> TermSum {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    pub fn add(&mut self, other: &TermSum) {
        self.terms.extend(other.terms.iter().cloned());
        self.compress();
    }

    pub fn sub(&mut self, other: &TermSum) {
        self.terms.extend(other.terms.iter().map(|t| Term {
            coeff: -t.coeff,
            ..t.clone()
        }));
        self.compress();
    }

    pub fn sum_of(parts: &[(&TermSum, f64)]) -> TermSum {
        let mut out = TermSum::zero();
        for (part, weight) in parts {
            out.add(&part.scaled(*weight));
        }
        out
    }

    fn push(&mut self, term: Term) {
        self.terms.push(term);
    }

    /// Merge terms with the same monomial powers; drop exact zeros.
    fn compress(&mut self) {
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for term in self.terms.drain(..) {
            if term.coeff == 0.0 || term.series.is_zero() {
                continue;
            }
            if let Some(existing) = merged
                .iter_mut()
                .find(|m| m.t_pow == term.t_pow && m.y_pow == term.y_pow)
            {
                let mut s = existing.series.clone();
                s.scale(existing.coeff);
                s.add_scaled(&term.series, term.coeff);
                existing.series = s;
                existing.coeff = 1.0;
            } else {
                merged.push(term);
            }
        }
        merged.retain(|t| !t.series.is_zero());
        self.terms = merged;
    }
}
