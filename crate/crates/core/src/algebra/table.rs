//! The u^l_k function table over the cyclic commutative algebra of dimension
//! 2m, generated recurrently from the Cauchy-Riemann-type relations.
//!
//! The base row comes from the component decomposition of I0(e * sqrt(w)),
//! w = t^2 - y^2, where e is the cyclic generator with e^(2m) = 1: expanding
//! the I0 series, e^(2n) = e_(2n mod 2m), so the component along e_(2j) is the
//! residue-class series `sum_{n = j mod m} (w/4)^n / (n!)^2` and the odd
//! components vanish.

use std::fmt;
use std::str::FromStr;

use serde_json::json;

use crate::algebra::series::PowerSeries;
use crate::algebra::term_sum::TermSum;
use crate::error::{Error, Result};

/// Residue index l modulo 2m, with the cyclic successor used by the
/// recurrence relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicIndex {
    l: usize,
    modulus: usize,
}

impl CyclicIndex {
    pub fn new(l: usize, m: u32) -> Result<Self> {
        let modulus = 2 * m as usize;
        if m == 0 || l >= modulus {
            return Err(Error::IndexOutOfRange { l, modulus });
        }
        Ok(CyclicIndex { l, modulus })
    }

    pub fn value(self) -> usize {
        self.l
    }

    pub fn succ(self) -> Self {
        CyclicIndex {
            l: (self.l + 1) % self.modulus,
            modulus: self.modulus,
        }
    }
}

/// Default target for the residue-class series tail on the declared domain.
const TAIL_BOUND: f64 = 1e-14;

/// Smallest truncation order N with (w_max/4)^N / (N!)^2 below 1e-18, plus
/// `headroom` extra orders for the differentiations to consume.
pub fn truncation_for(w_max: f64, headroom: usize) -> usize {
    let q = w_max.abs() / 4.0;
    let mut term = 1.0f64;
    let mut n = 0usize;
    while term >= 1e-18 && n < 200 {
        n += 1;
        term *= q / (n * n) as f64;
    }
    n + headroom
}

/// Base entry u^l_0: zero for odd l, the residue-class series for l = 2j.
pub fn u_zero(m: u32, l: CyclicIndex, truncation: usize) -> Result<TermSum> {
    let idx = l.value();
    if l.modulus != 2 * m as usize {
        return Err(Error::IndexOutOfRange {
            l: idx,
            modulus: 2 * m as usize,
        });
    }
    if idx % 2 == 1 {
        return Ok(TermSum::zero());
    }
    let j = idx / 2;
    let mut coeffs = vec![0.0; truncation + 1];
    let mut c = 1.0;
    for n in 0..=truncation {
        if n > 0 {
            c /= 4.0 * (n * n) as f64;
        }
        if n % m as usize == j {
            coeffs[n] = c;
        }
    }
    Ok(TermSum::monomial(1.0, 0, 0, PowerSeries::from_coeffs(coeffs)))
}

/// Generated table of u^l_k for 0 <= l < 2m, 0 <= k <= max_k.
#[derive(Debug, Clone)]
pub struct UFunctionTable {
    m: u32,
    max_k: usize,
    domain_w: f64,
    entries: Vec<Vec<TermSum>>, // entries[l][k]
}

/// Build the table by inverting the Cauchy-Riemann-type relations:
///
/// ```text
/// u^l_1 = -2 dy u^(l+1)_0          u^l_2 = 2 dt u^(l+1)_0
/// u^l_3 =  2 dt u^(l+1)_1          u^l_4 = 2 dt u^(l+1)_2 - 2 u^l_0
/// u^l_s =  2 dt u^(l+1)_(s-2) - u^l_(s-4)   for s >= 5
/// ```
pub fn generate_table(m: u32, max_k: usize, truncation: usize) -> Result<UFunctionTable> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let dim = 2 * m as usize;
    let mut entries: Vec<Vec<TermSum>> = vec![Vec::with_capacity(max_k + 1); dim];
    for (l, row) in entries.iter_mut().enumerate() {
        row.push(u_zero(m, CyclicIndex::new(l, m)?, truncation)?);
    }
    for s in 1..=max_k {
        for l in 0..dim {
            let lp = (l + 1) % dim;
            let entry = match s {
                1 => entries[lp][0].diff_y()?.scaled(-2.0),
                2 => entries[lp][0].diff_t()?.scaled(2.0),
                3 => entries[lp][1].diff_t()?.scaled(2.0),
                4 => {
                    let mut e = entries[lp][2].diff_t()?.scaled(2.0);
                    e.sub(&entries[l][0].scaled(2.0));
                    e
                }
                _ => {
                    let mut e = entries[lp][s - 2].diff_t()?.scaled(2.0);
                    e.sub(&entries[l][s - 4]);
                    e
                }
            };
            entries[l].push(entry);
        }
    }
    // Declared evaluation domain: largest w with the truncated tail below
    // TAIL_BOUND after the differentiations consumed their orders.
    let n_eff = truncation.saturating_sub(max_k).max(1);
    let mut w = 4.0;
    loop {
        let mut term = 1.0f64;
        for n in 1..=n_eff {
            term *= w / (4.0 * (n * n) as f64);
        }
        if term > TAIL_BOUND || w > 1e6 {
            break;
        }
        w *= 1.25;
    }
    Ok(UFunctionTable {
        m,
        max_k,
        domain_w: w / 1.25,
        entries,
    })
}

impl UFunctionTable {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    /// Largest |w| = |t^2 - y^2| on which evaluations are trusted.
    pub fn domain_w(&self) -> f64 {
        self.domain_w
    }

    pub fn entry(&self, l: usize, k: usize) -> Result<&TermSum> {
        self.entries
            .get(l)
            .and_then(|row| row.get(k))
            .ok_or(Error::MissingEntry { l, k })
    }

    /// Evaluate u^l_k at (t, y), checking the declared series domain.
    pub fn eval(&self, l: usize, k: usize, t: f64, y: f64) -> Result<f64> {
        let w = t * t - y * y;
        if w.abs() > self.domain_w {
            return Err(Error::SeriesDomain {
                w,
                radius: self.domain_w,
            });
        }
        Ok(self.entry(l, k)?.eval(t, y))
    }

    /// |LHS - RHS| of one Cauchy-Riemann-type relation at (t, y).
    pub fn cr_residual(&self, relation: CrRelation, l: usize, t: f64, y: f64) -> Result<f64> {
        let dim = 2 * self.m as usize;
        if l >= dim {
            return Err(Error::IndexOutOfRange { l, modulus: dim });
        }
        let lp = (l + 1) % dim;
        let get = |ll: usize, kk: usize| -> Result<&TermSum> {
            self.entries
                .get(ll)
                .and_then(|row| row.get(kk))
                .ok_or(Error::RelationOutOfTable { l: ll, k: kk })
        };
        let (lhs, rhs) = match relation {
            CrRelation::DtK0 => (
                get(lp, 0)?.diff_t()?,
                TermSum::sum_of(&[(get(l, 2)?, 0.5)]),
            ),
            CrRelation::DtK1 => (
                get(lp, 1)?.diff_t()?,
                TermSum::sum_of(&[(get(l, 3)?, 0.5)]),
            ),
            CrRelation::DtK2 => (
                get(lp, 2)?.diff_t()?,
                TermSum::sum_of(&[(get(l, 0)?, 1.0), (get(l, 4)?, 0.5)]),
            ),
            CrRelation::DtOdd(k) => {
                if k < 2 {
                    return Err(Error::InvalidParameter("DtOdd needs k >= 2".into()));
                }
                (
                    get(lp, 2 * k - 1)?.diff_t()?,
                    TermSum::sum_of(&[(get(l, 2 * k - 3)?, 0.5), (get(l, 2 * k + 1)?, 0.5)]),
                )
            }
            CrRelation::DtEven(k) => {
                if k < 2 {
                    return Err(Error::InvalidParameter("DtEven needs k >= 2".into()));
                }
                (
                    get(lp, 2 * k)?.diff_t()?,
                    TermSum::sum_of(&[(get(l, 2 * k - 2)?, 0.5), (get(l, 2 * k + 2)?, 0.5)]),
                )
            }
            CrRelation::DyK0 => (
                get(lp, 0)?.diff_y()?,
                TermSum::sum_of(&[(get(l, 1)?, -0.5)]),
            ),
            CrRelation::DyK1 => (
                get(lp, 1)?.diff_y()?,
                TermSum::sum_of(&[(get(l, 0)?, 1.0), (get(l, 4)?, -0.5)]),
            ),
            CrRelation::DyK2 => (
                get(lp, 2)?.diff_y()?,
                TermSum::sum_of(&[(get(l, 3)?, -0.5)]),
            ),
            CrRelation::DyOdd(k) => {
                if k < 1 {
                    return Err(Error::InvalidParameter("DyOdd needs k >= 1".into()));
                }
                (
                    get(lp, 2 * k + 1)?.diff_y()?,
                    TermSum::sum_of(&[(get(l, 2 * k)?, 0.5), (get(l, 2 * k + 4)?, -0.5)]),
                )
            }
            CrRelation::DyEven(k) => {
                if k < 1 {
                    return Err(Error::InvalidParameter("DyEven needs k >= 1".into()));
                }
                (
                    get(lp, 2 * k + 2)?.diff_y()?,
                    TermSum::sum_of(&[(get(l, 2 * k - 1)?, 0.5), (get(l, 2 * k + 3)?, -0.5)]),
                )
            }
        };
        Ok((lhs.eval(t, y) - rhs.eval(t, y)).abs())
    }

    /// Every relation instance checkable with the generated subscripts.
    pub fn available_relations(&self) -> Vec<CrRelation> {
        let mut rels = Vec::new();
        if self.max_k >= 2 {
            rels.push(CrRelation::DtK0);
        }
        if self.max_k >= 3 {
            rels.push(CrRelation::DtK1);
        }
        if self.max_k >= 4 {
            rels.push(CrRelation::DtK2);
        }
        if self.max_k >= 1 {
            rels.push(CrRelation::DyK0);
        }
        if self.max_k >= 4 {
            rels.push(CrRelation::DyK1);
            rels.push(CrRelation::DyK2);
        }
        let mut k = 2;
        while 2 * k + 1 <= self.max_k {
            rels.push(CrRelation::DtOdd(k));
            k += 1;
        }
        let mut k = 2;
        while 2 * k + 2 <= self.max_k {
            rels.push(CrRelation::DtEven(k));
            k += 1;
        }
        let mut k = 1;
        while 2 * k + 4 <= self.max_k {
            rels.push(CrRelation::DyOdd(k));
            k += 1;
        }
        let mut k = 1;
        while 2 * k + 3 <= self.max_k {
            rels.push(CrRelation::DyEven(k));
            k += 1;
        }
        rels
    }

    /// Debug dump: entries keyed `u_{l}_{k}`, each a list of
    /// (coeff, t_pow, y_pow, series-coefficients) records.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (l, row) in self.entries.iter().enumerate() {
            for (k, ts) in row.iter().enumerate() {
                let records: Vec<_> = ts
                    .terms()
                    .iter()
                    .map(|t| json!([t.coeff, t.t_pow, t.y_pow, t.series.coeffs()]))
                    .collect();
                map.insert(format!("u_{l}_{k}"), json!(records));
            }
        }
        json!({
            "m": self.m,
            "max_k": self.max_k,
            "domain_w": self.domain_w,
            "entries": map,
        })
    }
}

/// Identifier for one relation of the two Cauchy-Riemann-type families
/// (t-derivatives and y-derivatives).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrRelation {
    /// dt u^(l+1)_0 = 1/2 u^l_2
    DtK0,
    /// dt u^(l+1)_1 = 1/2 u^l_3
    DtK1,
    /// dt u^(l+1)_2 = u^l_0 + 1/2 u^l_4
    DtK2,
    /// dt u^(l+1)_(2k-1) = 1/2 (u^l_(2k-3) + u^l_(2k+1)), k >= 2
    DtOdd(usize),
    /// dt u^(l+1)_(2k) = 1/2 (u^l_(2k-2) + u^l_(2k+2)), k >= 2
    DtEven(usize),
    /// dy u^(l+1)_0 = -1/2 u^l_1
    DyK0,
    /// dy u^(l+1)_1 = u^l_0 - 1/2 u^l_4
    DyK1,
    /// dy u^(l+1)_2 = -1/2 u^l_3
    DyK2,
    /// dy u^(l+1)_(2k+1) = 1/2 (u^l_(2k) - u^l_(2k+4)), k >= 1
    DyOdd(usize),
    /// dy u^(l+1)_(2k+2) = 1/2 (u^l_(2k-1) - u^l_(2k+3)), k >= 1
    DyEven(usize),
}

impl fmt::Display for CrRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrRelation::DtK0 => write!(f, "dt-k0"),
            CrRelation::DtK1 => write!(f, "dt-k1"),
            CrRelation::DtK2 => write!(f, "dt-k2"),
            CrRelation::DtOdd(k) => write!(f, "dt-odd[k={k}]"),
            CrRelation::DtEven(k) => write!(f, "dt-even[k={k}]"),
            CrRelation::DyK0 => write!(f, "dy-k0"),
            CrRelation::DyK1 => write!(f, "dy-k1"),
            CrRelation::DyK2 => write!(f, "dy-k2"),
            CrRelation::DyOdd(k) => write!(f, "dy-odd[k={k}]"),
            CrRelation::DyEven(k) => write!(f, "dy-even[k={k}]"),
        }
    }
}

impl FromStr for CrRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_k = |s: &str| -> Result<usize> {
            let inner = s
                .strip_prefix("[k=")
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| Error::InvalidParameter(format!("bad relation suffix: {s}")))?;
            inner
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad relation index: {s}")))
        };
        match s {
            "dt-k0" => Ok(CrRelation::DtK0),
            "dt-k1" => Ok(CrRelation::DtK1),
            "dt-k2" => Ok(CrRelation::DtK2),
            "dy-k0" => Ok(CrRelation::DyK0),
            "dy-k1" => Ok(CrRelation::DyK1),
            "dy-k2" => Ok(CrRelation::DyK2),
            _ => {
                if let Some(rest) = s.strip_prefix("dt-odd") {
                    Ok(CrRelation::DtOdd(parse_k(rest)?))
                } else if let Some(rest) = s.strip_prefix("dt-even") {
                    Ok(CrRelation::DtEven(parse_k(rest)?))
                } else if let Some(rest) = s.strip_prefix("dy-odd") {
                    Ok(CrRelation::DyOdd(parse_k(rest)?))
                } else if let Some(rest) = s.strip_prefix("dy-even") {
                    Ok(CrRelation::DyEven(parse_k(rest)?))
                } else {
                    Err(Error::InvalidParameter(format!("unknown relation: {s}")))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{bessel_i, bessel_j};

    // Frozen reference values (mpmath, 30 digits).
    const U00_10: f64 = 1.01563178215; // (I0(1)+J0(1))/2
    const U20_10: f64 = 0.250434095597; // (I0(1)-J0(1))/2

    #[test]
    fn u_zero_odd_components_vanish() {
        let n = truncation_for(4.0, 0);
        for &l in &[1usize, 3] {
            let ts = u_zero(2, CyclicIndex::new(l, 2).unwrap(), n).unwrap();
            assert!(ts.is_zero());
        }
    }

    #[test]
    fn u_zero_even_components_match_bessel_split() {
        let n = truncation_for(4.0, 0);
        let u0 = u_zero(2, CyclicIndex::new(0, 2).unwrap(), n).unwrap();
        let u2 = u_zero(2, CyclicIndex::new(2, 2).unwrap(), n).unwrap();
        assert!((u0.eval(1.0, 0.0) - U00_10).abs() < 1e-11);
        assert!((u2.eval(1.0, 0.0) - U20_10).abs() < 1e-11);
        // at the cone w = 0 the l=2 series has no constant term
        assert_eq!(u2.eval(1.0, 1.0), 0.0);
    }

    #[test]
    fn u_zero_m1_is_full_i0_series() {
        let n = truncation_for(4.0, 0);
        let u0 = u_zero(1, CyclicIndex::new(0, 1).unwrap(), n).unwrap();
        // mpmath: I0(1) = 1.26606587775
        assert!((u0.eval(1.0, 0.0) - 1.26606587775).abs() < 1e-11);
        assert!(u_zero(1, CyclicIndex::new(1, 1).unwrap(), n)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn u_zero_m3_components() {
        // mpmath residue-class sums at (1, 0.3)
        let n = truncation_for(2.0, 0);
        let vals = [1.00032707101, 0.227504650538, 0.0129391048199];
        for (j, &v) in vals.iter().enumerate() {
            let u = u_zero(3, CyclicIndex::new(2 * j, 3).unwrap(), n).unwrap();
            assert!((u.eval(1.0, 0.3) - v).abs() < 1e-11, "j={j}");
        }
    }

    #[test]
    fn table_derivative_examples() {
        // Finite-difference oracle on u^0_0 (m=2), frozen from mpmath:
        // d/dy u^0_0 at (1, 0.5) = -0.0234489447624
        // d/dt u^2_0 at (1, 0)   =  0.502604844869
        let n = truncation_for(4.0, 6);
        let u0 = u_zero(2, CyclicIndex::new(0, 2).unwrap(), n).unwrap();
        let u2 = u_zero(2, CyclicIndex::new(2, 2).unwrap(), n).unwrap();
        assert!((u0.diff_y().unwrap().eval(1.0, 0.5) + 0.0234489447624).abs() < 1e-11);
        assert!((u2.diff_t().unwrap().eval(1.0, 0.0) - 0.502604844869).abs() < 1e-11);
    }

    #[test]
    fn generated_m2_entries_match_paper_closed_forms() {
        let table = generate_table(2, 4, truncation_for(9.0, 6)).unwrap();
        // u^1_1(2, 1) = (y/r)(I1(r)+J1(r)), r = sqrt(3); mpmath: 1.04698491233
        assert!((table.eval(1, 1, 2.0, 1.0).unwrap() - 1.04698491233).abs() < 1e-10);
        // u^0_4 -> 0 at the cone
        assert!(table.eval(0, 4, 1.0, 1.0 - 1e-9).unwrap().abs() < 1e-7);
        // vanishing entries
        for &(l, k) in &[(0, 1), (2, 1), (0, 2), (2, 2), (1, 3), (3, 3), (1, 4), (3, 4)] {
            assert!(table.entry(l, k).unwrap().is_zero(), "u^{l}_{k}");
        }
        // u^3_2(1.5, 0.4) against the Bessel expression
        let (t, y) = (1.5, 0.4);
        let r = (t * t - y * y as f64).sqrt();
        let want = t / r * (bessel_i(1, r).unwrap() - bessel_j(1, r).unwrap());
        assert!((table.eval(3, 2, t, y).unwrap() - want).abs() < 1e-11);
    }

    #[test]
    fn cr_residuals_vanish_m2_and_m3() {
        for m in [1u32, 2, 3] {
            let table = generate_table(m, 8, truncation_for(9.0, 12)).unwrap();
            for rel in table.available_relations() {
                for l in 0..2 * m as usize {
                    let res = table.cr_residual(rel, l, 1.5, 0.5).unwrap();
                    assert!(res < 1e-10, "m={m} l={l} rel={rel} res={res}");
                }
            }
        }
    }

    #[test]
    fn redundant_route_u3_agrees() {
        // u^l_3 = 2 dt u^(l+1)_1  must equal  -2 dy u^(l+1)_2
        for m in [2u32, 3] {
            let table = generate_table(m, 4, truncation_for(9.0, 8)).unwrap();
            let dim = 2 * m as usize;
            for l in 0..dim {
                let lp = (l + 1) % dim;
                let via_t = table.entry(lp, 1).unwrap().diff_t().unwrap().scaled(2.0);
                let via_y = table.entry(lp, 2).unwrap().diff_y().unwrap().scaled(-2.0);
                let d = (via_t.eval(1.5, 0.5) - via_y.eval(1.5, 0.5)).abs();
                assert!(d < 1e-10, "m={m} l={l} d={d}");
            }
        }
    }

    #[test]
    fn eval_outside_domain_flagged() {
        let table = generate_table(2, 2, 10).unwrap();
        let big_t = (table.domain_w() + 10.0).sqrt() + 1.0;
        assert!(matches!(
            table.eval(0, 0, big_t, 0.0),
            Err(Error::SeriesDomain { .. })
        ));
    }

    #[test]
    fn relation_names_round_trip() {
        for rel in [
            CrRelation::DtK0,
            CrRelation::DtOdd(2),
            CrRelation::DyEven(3),
            CrRelation::DyK1,
        ] {
            let s = rel.to_string();
            assert_eq!(s.parse::<CrRelation>().unwrap(), rel);
        }
    }

    #[test]
    fn json_dump_has_expected_keys() {
        let table = generate_table(2, 1, 10).unwrap();
        let v = table.to_json();
        assert!(v["entries"].get("u_0_0").is_some());
        assert!(v["entries"].get("u_3_1").is_some());
    }
}
