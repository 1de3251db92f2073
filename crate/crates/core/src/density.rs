//! Closed-form particle-position densities for m = 1 and m = 2, the atom mass
//! on the light cone, and the cone boundary limits.
//!
//! All formulas are kept in normalized units (lambda = v = 1) internally; a
//! general parameter triple is handled by the exact rescaling
//! `f(t, x) = (lambda / v) * fhat(lambda t, lambda x / v)`.
//!
//! Near the cone the m = 2 bracket contains terms that individually diverge
//! like 1/w (w = tau^2 - xi^2) but whose sum is finite; below the switch
//! radius the bracket is evaluated from the merged, everywhere-convergent
//! series in w instead of the direct Bessel expression.

use serde::Serialize;

use crate::bessel::{bessel_i, bessel_j};
use crate::error::{Error, Result};

/// The triple (m, lambda, v) defining the motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Erlang shape of the sojourn times.
    pub m: u32,
    /// Erlang rate (1/time).
    pub lambda: f64,
    /// Particle speed (length/time).
    pub v: f64,
}

impl ModelParams {
    pub fn new(m: u32, lambda: f64, v: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "v must be positive and finite, got {v}"
            )));
        }
        Ok(ModelParams { m, lambda, v })
    }

    pub fn unit(m: u32) -> Self {
        ModelParams {
            m,
            lambda: 1.0,
            v: 1.0,
        }
    }
}

/// Support classification of a spacetime point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interior,
    UpperCone,
    LowerCone,
    Outside,
}

/// Which cone boundary a limit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

/// Density value split into its continuous part and the atom mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityValue {
    /// Absolutely continuous density (1/length); at a cone point this is the
    /// one-sided limit of the continuous part.
    pub continuous: f64,
    /// Probability carried by the atom at x = vt; zero elsewhere.
    pub atom_mass: f64,
    pub region: Region,
}

/// Width of the cone band (in normalized units) treated as "on the cone" by
/// the dispatcher.
#[derive(Debug, Clone, Copy)]
pub struct ConeTolerance {
    pub eps_cone: f64,
}

impl Default for ConeTolerance {
    fn default() -> Self {
        ConeTolerance { eps_cone: 1e-6 }
    }
}

/// Switch radius for the merged-series evaluation path: below w = r^2 = this,
/// the direct Bessel forms lose digits to cancellation.
const SERIES_SWITCH_W: f64 = 0.25;

/// Probability of the atom at x = vt: the m-Erlang tail
/// `e^(-lambda t) * sum_{i<m} (lambda t)^i / i!`.
pub fn atom_mass(params: &ModelParams, t: f64) -> f64 {
    let tau = params.lambda * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..params.m {
        term *= tau / i as f64;
        sum += term;
    }
    (-tau).exp() * sum
}

// Everywhere-convergent auxiliary series in w = r^2 (term-recursive, entire).

/// P(w) = sum_n (w/4)^n / (n! (n+1)!), so that I1(r)/r = P(w)/2.
fn p_series(w: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut n = 1usize;
    while term.abs() > 1e-18 * sum.abs().max(1.0) && n < 120 {
        term *= w / (4.0 * (n * (n + 1)) as f64);
        sum += term;
        n += 1;
    }
    sum
}

/// Q(w) = ((I1(r)+J1(r))/r^3 - 1/w): the even-n tail of P, shifted one power.
fn q_series(w: f64) -> f64 {
    // sum over even n >= 2 of w^(n-1) / (4^n n! (n+1)!)
    let mut sum = 0.0;
    let mut c = 1.0; // 1 / (4^n n! (n+1)!), starting at n = 0
    let mut wp = 1.0; // w^(n-1), starting at n = 1
    for n in 1..=60usize {
        c /= 4.0 * (n * (n + 1)) as f64;
        if n >= 2 && n % 2 == 0 {
            sum += c * wp;
        }
        wp *= w;
    }
    sum
}

/// R(w) = ((I0(r)+J0(r))/r^2 - 2/w): even-n tail of the I0 series.
fn r_series(w: f64) -> f64 {
    let mut sum = 0.0;
    let mut c = 1.0; // 1 / (4^n (n!)^2) at n = 0
    let mut wp = 1.0;
    for n in 1..=60usize {
        c /= 4.0 * (n * n) as f64;
        if n >= 2 && n % 2 == 0 {
            sum += 2.0 * c * wp;
        }
        wp *= w;
    }
    sum
}

/// S(w) = (I2(r)-J2(r))/r^2 = 1/2 sum over odd n of (w/4)^n / (n! (n+2)!).
fn s_series(w: f64) -> f64 {
    let mut sum = 0.0;
    // term_n = (1/2) (w/4)^n / (n! (n+2)!); at n = 0 that is 1/2 * 1/2! = 1/4
    let mut term = 0.25;
    for n in 0..=60usize {
        if n % 2 == 1 {
            sum += term;
        }
        term *= w / (4.0 * ((n + 1) * (n + 3)) as f64);
    }
    sum
}

/// Normalized continuous bracket for m = 1:
/// `g_c(tau, xi) = I0(r)/2 + (tau+xi)/(2r) I1(r)` with r = sqrt(tau^2-xi^2).
/// Written with I1(r)/r = P(w)/2 this is regular on the whole support.
fn bracket_m1(tau: f64, xi: f64) -> Result<f64> {
    let w = tau * tau - xi * xi;
    if w < 0.0 {
        return Err(Error::OutsideSupport { t: tau, x: xi });
    }
    let r = w.sqrt();
    Ok(bessel_i(0, r)? / 2.0 + (tau + xi) / 4.0 * p_series(w))
}

/// D(w) = d/dw of sum over even n of (w/4)^n / (n! (n+1)!), i.e.
/// sum over even n >= 2 of n w^(n-1) / (4^n n! (n+1)!). Entire; carries the
/// odd correction term of the m = 2 bracket: (tau xi) D(w) is exactly one
/// quarter of the algebra component with indices (0, 3) and is easy to
/// drop by accident. Monte Carlo and an independent renewal-decomposition
/// oracle both require it (see the m = 2 tests); it
/// vanishes at both cones and integrates to zero over the support, so the
/// normalization and the boundary limits are unchanged by it.
fn d_series(w: f64) -> f64 {
    let mut sum = 0.0;
    let mut c = 1.0; // 1 / (4^n n! (n+1)!) at n = 0
    let mut wp = 1.0; // w^(n-1) at n = 1
    for n in 1..=60usize {
        c /= 4.0 * (n * (n + 1)) as f64;
        if n >= 2 && n % 2 == 0 {
            sum += n as f64 * c * wp;
        }
        wp *= w;
    }
    sum
}

/// Normalized continuous bracket for m = 2:
/// `-J0(r)/2 + (tau+xi)/(2r) I1 - xi^2/(2r^3)(I1+J1) + tau^2/(4w)(I0+I2+J0-J2)
///  + tau xi D(w)`.
/// The last (odd) term is essential; see d_series.
fn bracket_m2(tau: f64, xi: f64) -> Result<f64> {
    let w = tau * tau - xi * xi;
    if w < 0.0 {
        return Err(Error::OutsideSupport { t: tau, x: xi });
    }
    let r = w.sqrt();
    let odd = tau * xi * d_series(w);
    if w < SERIES_SWITCH_W {
        // merged series: the 1/w parts of the last two even terms sum to
        // exactly 1/2
        return Ok(-bessel_j(0, r)? / 2.0
            + (tau + xi) / 4.0 * p_series(w)
            + 0.5
            - xi * xi / 2.0 * q_series(w)
            + tau * tau / 4.0 * (r_series(w) + s_series(w))
            + odd);
    }
    let i0 = bessel_i(0, r)?;
    let i1 = bessel_i(1, r)?;
    let i2 = bessel_i(2, r)?;
    let j0 = bessel_j(0, r)?;
    let j1 = bessel_j(1, r)?;
    let j2 = bessel_j(2, r)?;
    Ok(-j0 / 2.0 + (tau + xi) / (2.0 * r) * i1 - xi * xi / (2.0 * r * r * r) * (i1 + j1)
        + tau * tau / (4.0 * w) * (i0 + i2 + j0 - j2)
        + odd)
}

/// Continuous density for m = 1 at |x| <= vt.
pub fn density_m1(params: &ModelParams, t: f64, x: f64) -> Result<f64> {
    let tau = params.lambda * t;
    let xi = params.lambda * x / params.v;
    if xi.abs() > tau {
        return Err(Error::OutsideSupport { t, x });
    }
    Ok(params.lambda / params.v * (-tau).exp() * bracket_m1(tau, xi)?)
}

/// Continuous density for m = 2 at |x| <= vt.
pub fn density_m2(params: &ModelParams, t: f64, x: f64) -> Result<f64> {
    let tau = params.lambda * t;
    let xi = params.lambda * x / params.v;
    if xi.abs() > tau {
        return Err(Error::OutsideSupport { t, x });
    }
    Ok(params.lambda / params.v * (-tau).exp() * bracket_m2(tau, xi)?)
}

/// One-sided cone limits of the continuous density.
pub fn boundary_limit(params: &ModelParams, t: f64, side: Side) -> f64 {
    let tau = params.lambda * t;
    let scale = params.lambda / params.v * (-tau).exp();
    match (params.m, side) {
        (1, Side::Upper) => scale * (1.0 + tau) / 2.0,
        (1, Side::Lower) => scale / 2.0,
        (m, Side::Upper) => {
            // (lambda/v) (lambda t)^(m-1) e^(-lambda t) / (2 (m-1)!)
            let mut pow = 1.0;
            for i in 1..m {
                pow *= tau / i as f64;
            }
            scale * pow / 2.0
        }
        (_, Side::Lower) => 0.0,
    }
}

/// Full density dispatch with support classification.
pub fn density(params: &ModelParams, t: f64, x: f64) -> Result<DensityValue> {
    density_with(params, t, x, ConeTolerance::default())
}

pub fn density_with(
    params: &ModelParams,
    t: f64,
    x: f64,
    cone: ConeTolerance,
) -> Result<DensityValue> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    let tau = params.lambda * t;
    let xi = params.lambda * x / params.v;
    if xi.abs() > tau {
        return Ok(DensityValue {
            continuous: 0.0,
            atom_mass: 0.0,
            region: Region::Outside,
        });
    }
    if tau - xi <= cone.eps_cone {
        return Ok(DensityValue {
            continuous: boundary_limit(params, t, Side::Upper),
            atom_mass: atom_mass(params, t),
            region: Region::UpperCone,
        });
    }
    if tau + xi <= cone.eps_cone {
        return Ok(DensityValue {
            continuous: boundary_limit(params, t, Side::Lower),
            atom_mass: 0.0,
            region: Region::LowerCone,
        });
    }
    let continuous = match params.m {
        1 => density_m1(params, t, x)?,
        2 => density_m2(params, t, x)?,
        m => return Err(Error::UnsupportedShape { m }),
    };
    Ok(DensityValue {
        continuous,
        atom_mass: 0.0,
        region: Region::Interior,
    })
}

/// The competing m = 2 solution g2 = u^2_0 + u^0_4 in normalized units. It
/// solves the same fourth-order equation as g_c but its upper-cone limit is 0
/// instead of t/2; the verification suite uses it as the uniqueness-side check.
pub fn competing_solution_g2(t: f64, y: f64) -> Result<f64> {
    let w = t * t - y * y;
    if w < 0.0 {
        return Err(Error::OutsideSupport { t, x: y });
    }
    let r = w.sqrt();
    let i0 = bessel_i(0, r)?;
    let j0 = bessel_j(0, r)?;
    let u20 = (i0 - j0) / 2.0;
    let u04 = if w < SERIES_SWITCH_W {
        // merged series: the 1/w parts contribute exactly 2
        2.0 - (i0 + j0) - 2.0 * y * y * q_series(w)
            + t * t * (r_series(w) + s_series(w))
    } else {
        let i1 = bessel_i(1, r)?;
        let i2 = bessel_i(2, r)?;
        let j1 = bessel_j(1, r)?;
        let j2 = bessel_j(2, r)?;
        -2.0 * y * y / (r * r * r) * (i1 + j1) + t * t / w * (i0 + i2 + j0 - j2) - i0 - j0
    };
    Ok(u20 + u04)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen mpmath references.
    const FC1_10: f64 = 0.336835011472;
    const FC2_10: f64 = 0.151937022011;
    const ATOM_M2_T1: f64 = 0.735758882343;

    #[test]
    fn atom_mass_values() {
        let m1 = ModelParams::unit(1);
        let m2 = ModelParams::unit(2);
        assert!((atom_mass(&m1, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((atom_mass(&m2, 1.0) - ATOM_M2_T1).abs() < 1e-12);
        // t -> 0+: no alternation can have occurred
        assert!((atom_mass(&ModelParams::unit(5), 1e-12) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn m1_density_and_cone_limits() {
        let p = ModelParams::unit(1);
        assert!((density_m1(&p, 1.0, 0.0).unwrap() - FC1_10).abs() < 1e-12);
        // mpmath: fc1(1, 1-1e-8) = 0.367879441631
        let near = density_m1(&p, 1.0, 1.0 - 1e-8).unwrap();
        assert!((near - boundary_limit(&p, 1.0, Side::Upper)).abs() < 1e-6);
        let low = density_m1(&p, 1.0, -1.0 + 1e-8).unwrap();
        assert!((low - boundary_limit(&p, 1.0, Side::Lower)).abs() < 1e-6);
        assert!((boundary_limit(&p, 1.0, Side::Upper) - 0.367879441171).abs() < 1e-12);
        assert!((boundary_limit(&p, 1.0, Side::Lower) - 0.183939720586).abs() < 1e-12);
        assert!((boundary_limit(&p, 2.0, Side::Upper) - 0.203002924855).abs() < 1e-12);
    }

    #[test]
    fn m2_density_and_cone_limits() {
        let p = ModelParams::unit(2);
        assert!((density_m2(&p, 1.0, 0.0).unwrap() - FC2_10).abs() < 1e-12);
        // mpmath, corrected bracket: fc2(2, 0.7) = 0.216544336047
        assert!((density_m2(&p, 2.0, 0.7).unwrap() - 0.216544336047).abs() < 1e-12);
        let near = density_m2(&p, 1.0, 1.0 - 1e-8).unwrap();
        assert!((near - 0.183939720586).abs() < 1e-6);
        let low = density_m2(&p, 1.0, -1.0 + 1e-8).unwrap();
        assert!(low.abs() < 1e-6);
        assert!((boundary_limit(&p, 1.0, Side::Upper) - 0.183939720586).abs() < 1e-12);
        assert_eq!(boundary_limit(&p, 3.0, Side::Lower), 0.0);
    }

    #[test]
    fn m2_density_matches_component_combination() {
        // dual route: the density must equal e^-t times the algebra-table
        // combination (1/2)u(2,0) + (1/4)[u(1,1)+u(3,1)+u(1,2)+u(3,2)
        // +u(0,3)+u(0,4)]. The frozen values above come from an independent
        // renewal-decomposition oracle confirming the (0,3) term belongs.
        use crate::algebra::table::{generate_table, truncation_for};
        let table = generate_table(2, 4, truncation_for(7.0, 8)).unwrap();
        let p = ModelParams::unit(2);
        for &(t, x) in &[(1.0, 0.3), (1.5, -0.9), (2.0, 0.7), (2.5, 1.8)] {
            let combo = 0.5 * table.eval(2, 0, t, x).unwrap()
                + 0.25
                    * (table.eval(1, 1, t, x).unwrap()
                        + table.eval(3, 1, t, x).unwrap()
                        + table.eval(1, 2, t, x).unwrap()
                        + table.eval(3, 2, t, x).unwrap()
                        + table.eval(0, 3, t, x).unwrap()
                        + table.eval(0, 4, t, x).unwrap());
            let expect = (-t as f64).exp() * combo;
            let got = density_m2(&p, t, x).unwrap();
            assert!((got - expect).abs() < 1e-10, "({t},{x}): {got} vs {expect}");
        }
    }

    #[test]
    fn series_and_bessel_paths_agree_at_switch() {
        // cross-check the merged-series path against the direct form on both
        // sides of the switch radius
        for &w in &[0.2, 0.24, 0.26, 0.5, 1.0] {
            let tau = 1.5f64;
            let xi = (tau * tau - w).sqrt();
            let r = w.sqrt();
            let direct = {
                let i0 = bessel_i(0, r).unwrap();
                let i1 = bessel_i(1, r).unwrap();
                let i2 = bessel_i(2, r).unwrap();
                let j0 = bessel_j(0, r).unwrap();
                let j1 = bessel_j(1, r).unwrap();
                let j2 = bessel_j(2, r).unwrap();
                -j0 / 2.0 + (tau + xi) / (2.0 * r) * i1
                    - xi * xi / (2.0 * r * r * r) * (i1 + j1)
                    + tau * tau / (4.0 * w) * (i0 + i2 + j0 - j2)
            };
            let merged = -bessel_j(0, r).unwrap() / 2.0
                + (tau + xi) / 4.0 * p_series(w)
                + 0.5
                - xi * xi / 2.0 * q_series(w)
                + tau * tau / 4.0 * (r_series(w) + s_series(w));
            assert!((direct - merged).abs() < 1e-9, "w={w}: {direct} vs {merged}");
        }
    }

    #[test]
    fn dispatcher_regions() {
        let p = ModelParams::unit(2);
        let outside = density(&p, 1.0, 2.0).unwrap();
        assert_eq!(outside.region, Region::Outside);
        assert_eq!(outside.continuous, 0.0);
        assert_eq!(outside.atom_mass, 0.0);

        let cone = density(&p, 1.0, 1.0).unwrap();
        assert_eq!(cone.region, Region::UpperCone);
        assert!((cone.atom_mass - ATOM_M2_T1).abs() < 1e-12);

        let inner = density(&p, 1.0, 0.0).unwrap();
        assert_eq!(inner.region, Region::Interior);
        assert!((inner.continuous - FC2_10).abs() < 1e-12);

        assert!(matches!(
            density(&ModelParams::unit(3), 1.0, 0.0),
            Err(Error::UnsupportedShape { m: 3 })
        ));
    }

    #[test]
    fn scaling_rule() {
        // mpmath: (2/3) fc1(2, 0) = 0.174592537268
        let p = ModelParams::new(1, 2.0, 3.0).unwrap();
        assert!((density_m1(&p, 1.0, 0.0).unwrap() - 0.174592537268).abs() < 1e-12);
        // mpmath, corrected bracket: (2/3) fc2(2, 1/3) = 0.137753740511
        let p2 = ModelParams::new(2, 2.0, 3.0).unwrap();
        assert!((density_m2(&p2, 1.0, 0.5).unwrap() - 0.137753740511).abs() < 1e-12);
        // exact covariance against the unit-parameter evaluation
        let unit = ModelParams::unit(2);
        let lhs = density_m2(&p2, 0.9, 0.4).unwrap();
        let rhs = 2.0 / 3.0 * density_m2(&unit, 1.8, 2.0 * 0.4 / 3.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn g2_values_and_cone_behavior() {
        // mpmath: g2(1, 0) = 0.271278280432
        assert!((competing_solution_g2(1.0, 0.0).unwrap() - 0.271278280432).abs() < 1e-11);
        // g2 vanishes at both cones: satisfies the lower condition, violates
        // the upper one (g_c -> t/2 there)
        assert!(competing_solution_g2(1.0, 1.0 - 1e-9).unwrap().abs() < 1e-7);
        assert!(competing_solution_g2(1.0, -1.0 + 1e-9).unwrap().abs() < 1e-7);
    }

    #[test]
    fn nonnegative_on_a_dense_grid() {
        for m in [1u32, 2] {
            let p = ModelParams::unit(m);
            let mut t = 0.05;
            while t <= 10.0 {
                for i in 0..40 {
                    let x = -t + (i as f64 + 0.5) / 40.0 * 2.0 * t;
                    let d = density(&p, t, x).unwrap();
                    assert!(d.continuous >= 0.0, "m={m} t={t} x={x}");
                }
                t += 0.5;
            }
        }
    }
}
