//! Globally adaptive Gauss-Kronrod (G7, K15) integration over finite
//! intervals, plus the normalization check for the closed-form densities.

use crate::density::{self, ModelParams};
use crate::error::{Error, Result};

/// Tolerance and subdivision budget for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

// QUADPACK dqk15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One K15 application on [a, b]: (kronrod value, error estimate).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_gauss = 0.0;
    let mut result_kronrod = fc * WGK[7];
    let mut result_abs = fc.abs() * WGK[7];
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        result_kronrod += WGK[j] * (f1 + f2);
        result_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    result_gauss += WG[3] * fc;
    let mean = result_kronrod * 0.5;
    let mut result_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let value = result_kronrod * half;
    let res_abs = result_abs * half.abs();
    let res_asc = result_asc * half.abs();
    let mut err = ((result_kronrod - result_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive integral of `f` over [a, b]; returns (value, error estimate)
/// with the guarantee target `|value - integral| <= max(abs_tol, err_est)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if !(a < b) {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    struct Seg {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
    }
    let (val, err) = qk15(&f, a, b);
    let mut segs = vec![Seg { a, b, val, err }];
    let mut subdivisions = 0usize;
    loop {
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        if total_err <= spec.abs_tol {
            let total: f64 = segs.iter().map(|s| s.val).sum();
            return Ok((total, total_err));
        }
        if subdivisions >= spec.max_subdivisions {
            let total: f64 = segs.iter().map(|s| s.val).sum();
            return Err(Error::QuadratureNonConvergence {
                subdivisions,
                partial: total,
                err_est: total_err,
            });
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.err.total_cmp(&y.err))
            .map(|(i, _)| i)
            .expect("non-empty segment list");
        let Seg { a, b, .. } = segs.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval below floating resolution; accept what we have
            let (val, _) = qk15(&f, a, b);
            segs.push(Seg { a, b, val, err: 0.0 });
            continue;
        }
        let (v1, e1) = qk15(&f, a, mid);
        let (v2, e2) = qk15(&f, mid, b);
        segs.push(Seg {
            a,
            b: mid,
            val: v1,
            err: e1,
        });
        segs.push(Seg {
            a: mid,
            b,
            val: v2,
            err: e2,
        });
        subdivisions += 1;
    }
}

/// Total mass of the law at time t: integral of the continuous density over
/// the support plus the atom; returns (total, |total - 1|).
///
/// The cone neighborhoods are integrated as thin separate slices so the
/// adaptive refinement never stalls on the square-root derivative behavior
/// at the endpoints.
pub fn normalization_check(
    params: &ModelParams,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let edge = params.v * t;
    let inner = edge * (1.0 - 1e-4);
    let dens = |x: f64| -> f64 {
        let r = match params.m {
            1 => density::density_m1(params, t, x),
            _ => density::density_m2(params, t, x),
        };
        r.unwrap_or(0.0)
    };
    if params.m > 2 {
        return Err(Error::UnsupportedShape { m: params.m });
    }
    let mut total = density::atom_mass(params, t);
    for (a, b) in [(-edge, -inner), (-inner, inner), (inner, edge)] {
        let (v, _) = integrate(dens, a, b, spec)?;
        total += v;
    }
    Ok((total, (total - 1.0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::table::{generate_table, truncation_for};

    #[test]
    fn constant_one() {
        let (v, e) = integrate(|_| 1.0, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        assert!(e < 1e-10);
    }

    #[test]
    fn smooth_oscillatory() {
        let (v, _) = integrate(f64::sin, 0.0, std::f64::consts::PI, &QuadratureSpec::default())
            .unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn u_function_integral_identities_at_t1() {
        // mpmath: int u^0_0 over [-1,1] = sinh 1 + sin 1 = 2.01667217845
        //         int u^3_2 over [-1,1] = 2 cosh 1 + 2 cos 1 - 4 = 0.166765881367
        let table = generate_table(2, 4, truncation_for(4.0, 8)).unwrap();
        let spec = QuadratureSpec::default();
        let u00 = table.entry(0, 0).unwrap().clone();
        let (v, _) = integrate(|y| u00.eval(1.0, y), -1.0, 1.0, &spec).unwrap();
        assert!((v - 2.01667217845).abs() < 1e-9);
        let u32_ = table.entry(3, 2).unwrap().clone();
        let (v, _) = integrate(|y| u32_.eval(1.0, y), -1.0, 1.0, &spec).unwrap();
        assert!((v - 0.166765881367).abs() < 1e-9);
    }

    #[test]
    fn error_estimate_is_honest_on_identities() {
        let spec = QuadratureSpec::default();
        let (v, e) = integrate(f64::exp, 0.0, 2.0, &spec).unwrap();
        let truth = 2.0f64.exp() - 1.0;
        assert!((v - truth).abs() <= e.max(spec.abs_tol));
    }

    #[test]
    fn normalization_m1_m2() {
        let spec = QuadratureSpec::default();
        for m in [1u32, 2] {
            for &t in &[0.5, 1.0, 2.0] {
                let p = ModelParams::unit(m);
                let (total, dev) = normalization_check(&p, t, &spec).unwrap();
                assert!(dev < 1e-8, "m={m} t={t} total={total}");
            }
        }
        // tiny t: the atom carries essentially all the mass
        let p = ModelParams::unit(2);
        let (total, dev) = normalization_check(&p, 1e-3, &spec).unwrap();
        assert!(dev < 1e-8, "total={total}");
        assert!(density::atom_mass(&p, 1e-3) > 0.999);
    }

    #[test]
    fn subdivision_budget_exhaustion_reports_partial() {
        let spec = QuadratureSpec {
            abs_tol: 1e-13,
            max_subdivisions: 3,
        };
        let res = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 3.0, &spec);
        assert!(matches!(res, Err(Error::QuadratureNonConvergence { .. })));
    }
}
