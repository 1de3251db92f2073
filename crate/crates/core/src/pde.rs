//! Residual checks confirming that the closed-form densities solve the
//! governing hyperbolic equations: centered finite differences on interior
//! grids (with convergence-order estimation), and exact residuals in the
//! term algebra.

use serde::Serialize;

use crate::algebra::term_sum::TermSum;
use crate::density::{self, ModelParams, Side};
use crate::error::{Error, Result};
use crate::mc;
use crate::report::Check;

/// Interior evaluation grid and stencil configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    /// Time interval [t0, t1], t0 > 0.
    pub t_range: (f64, f64),
    /// Maximum |y|/t0 covered; keeps the stencils away from the cone where
    /// derivative magnitudes blow up.
    pub y_fraction: f64,
    /// Stencil spacing.
    pub h: f64,
    /// 2 or 4.
    pub stencil_order: usize,
}

impl GridSpec {
    pub fn new(t_range: (f64, f64), h: f64, stencil_order: usize) -> Result<Self> {
        let spec = GridSpec {
            t_range,
            y_fraction: 0.8,
            h,
            stencil_order,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_range.0 > 0.0 && self.t_range.1 > self.t_range.0) {
            return Err(Error::InvalidParameter(format!(
                "bad t range {:?}",
                self.t_range
            )));
        }
        if !(self.y_fraction > 0.0 && self.y_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "y_fraction must lie in (0, 1), got {}",
                self.y_fraction
            )));
        }
        if !(self.h > 0.0) {
            return Err(Error::InvalidParameter(format!("h must be > 0: {}", self.h)));
        }
        if self.stencil_order != 2 && self.stencil_order != 4 {
            return Err(Error::InvalidParameter(format!(
                "stencil order must be 2 or 4, got {}",
                self.stencil_order
            )));
        }
        Ok(())
    }
}

/// Which governing operator a residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorId {
    /// (d2t - d2y) g - g, m = 1 in normalized units.
    Telegraph,
    /// (dt - dx + 1)(dt + dx + 1) f - f, m = 1.
    DampedWave,
    /// (d2t - d2y)^2 g - g, m = 2.
    TelegraphSquared,
    /// ((dt + 1)^2 - d2x)^2 f - f: the original equation for m = 2.
    DampedWaveSquared,
}

/// Finite-difference residual statistics.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub operator_id: OperatorId,
    pub grid: GridSpec,
    pub max_abs: f64,
    pub rms: f64,
    /// log2(max_abs(h) / max_abs(h/2)); approx 2 or 4 for a field that
    /// solves the equation exactly.
    pub convergence_order_est: f64,
}

fn d1(f: &dyn Fn(f64) -> f64, x: f64, h: f64, order: usize) -> f64 {
    match order {
        2 => (f(x + h) - f(x - h)) / (2.0 * h),
        _ => (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h),
    }
}

fn d2(f: &dyn Fn(f64) -> f64, x: f64, h: f64, order: usize) -> f64 {
    match order {
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        _ => {
            (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h)
                - f(x - 2.0 * h))
                / (12.0 * h * h)
        }
    }
}

/// Residual of `operator_id` applied to `field` at one point.
fn residual_at(
    field: &(dyn Fn(f64, f64) -> f64 + Sync),
    op: OperatorId,
    t: f64,
    y: f64,
    h: f64,
    order: usize,
) -> f64 {
    let d2t = |g: &dyn Fn(f64, f64) -> f64, t: f64, y: f64| d2(&|s| g(s, y), t, h, order);
    let d2y = |g: &dyn Fn(f64, f64) -> f64, t: f64, y: f64| d2(&|s| g(t, s), y, h, order);
    let d1t = |g: &dyn Fn(f64, f64) -> f64, t: f64, y: f64| d1(&|s| g(s, y), t, h, order);
    match op {
        OperatorId::Telegraph => d2t(field, t, y) - d2y(field, t, y) - field(t, y),
        OperatorId::DampedWave => {
            // (dt - dx + 1)(dt + dx + 1) f - f = (d2t - d2x + 2 dt) f
            d2t(field, t, y) - d2y(field, t, y) + 2.0 * d1t(field, t, y)
        }
        OperatorId::TelegraphSquared => {
            let inner = |t: f64, y: f64| d2t(field, t, y) - d2y(field, t, y);
            d2t(&inner, t, y) - d2y(&inner, t, y) - field(t, y)
        }
        OperatorId::DampedWaveSquared => {
            // L = (dt + 1)^2 - d2x = d2t + 2 dt + 1 - d2x; residual = L(L f) - f
            let l = |t: f64, y: f64| {
                d2t(field, t, y) + 2.0 * d1t(field, t, y) + field(t, y) - d2y(field, t, y)
            };
            d2t(&l, t, y) + 2.0 * d1t(&l, t, y) + l(t, y) - d2y(&l, t, y) - field(t, y)
        }
    }
}

const GRID_POINTS: usize = 7;

/// Evaluate the operator residual on the interior grid at spacings h and
/// h/2, reporting max/rms at h and the estimated convergence order.
pub fn residual_grid(
    field: &(dyn Fn(f64, f64) -> f64 + Sync),
    operator_id: OperatorId,
    grid: &GridSpec,
) -> Result<ResidualReport> {
    grid.validate()?;
    let (t0, t1) = grid.t_range;
    // halo: composed 2nd-difference stencils reach 2 spacings per
    // application at order 2, 4 at order 4
    let depth = match operator_id {
        OperatorId::Telegraph | OperatorId::DampedWave => 1.0,
        _ => 2.0,
    };
    let halo = depth * grid.h * if grid.stencil_order == 2 { 1.0 } else { 2.0 };
    let y_max = grid.y_fraction * t0;
    if y_max + halo >= t0 - halo {
        return Err(Error::InvalidParameter(format!(
            "stencil (halo {halo}) exits the support region for t0 = {t0}"
        )));
    }
    let stats = |h: f64| -> (f64, f64) {
        let mut max_abs = 0.0f64;
        let mut sq = 0.0;
        let mut n = 0usize;
        for i in 0..GRID_POINTS {
            let t = t0 + (t1 - t0) * i as f64 / (GRID_POINTS - 1) as f64;
            for j in 0..GRID_POINTS {
                let y = -y_max + 2.0 * y_max * j as f64 / (GRID_POINTS - 1) as f64;
                let r = residual_at(field, operator_id, t, y, h, grid.stencil_order).abs();
                max_abs = max_abs.max(r);
                sq += r * r;
                n += 1;
            }
        }
        (max_abs, (sq / n as f64).sqrt())
    };
    let (max_h, rms_h) = stats(grid.h);
    let (max_h2, _) = stats(grid.h / 2.0);
    let order_est = if max_h2 > 0.0 && max_h > 0.0 {
        (max_h / max_h2).log2()
    } else {
        f64::NAN
    };
    Ok(ResidualReport {
        operator_id,
        grid: *grid,
        max_abs: max_h,
        rms: rms_h,
        convergence_order_est: order_est,
    })
}

/// Exact residual in the term algebra: ((d2t - d2y)^m - 1) f, computed by
/// analytic differentiation. For any solution of the reduced equation the
/// result evaluates at truncation level.
pub fn residual_exact(f: &TermSum, m: u32) -> Result<TermSum> {
    if let Some(headroom) = f.truncation_headroom() {
        if headroom < 2 * m as usize {
            return Err(Error::TruncationExhausted);
        }
    }
    let mut g = f.clone();
    for _ in 0..m {
        let mut next = g.diff_t()?.diff_t()?;
        next.sub(&g.diff_y()?.diff_y()?);
        g = next;
    }
    g.sub(f);
    Ok(g)
}

/// Options for the boundary-condition cross-check.
#[derive(Debug, Clone, Copy)]
pub struct ConditionOptions {
    pub mc_samples: u64,
    pub mc_eps: f64,
    pub seed: u64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions {
            mc_samples: 10_000_000,
            mc_eps: 0.02,
            seed: 0x5eed,
        }
    }
}

/// Compare the closed-form cone limits against the boundary-limit formulas
/// and against Monte Carlo window rates, at each time in `times`.
pub fn verify_conditions(
    params: &ModelParams,
    times: &[f64],
    opts: ConditionOptions,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &t in times {
        for side in [Side::Upper, Side::Lower] {
            let limit = density::boundary_limit(params, t, side);
            let tag = match side {
                Side::Upper => "upper",
                Side::Lower => "lower",
            };
            // closed-form evaluation just inside the cone
            let x = match side {
                Side::Upper => params.v * t * (1.0 - 1e-8),
                Side::Lower => -params.v * t * (1.0 - 1e-8),
            };
            let near = match params.m {
                1 => density::density_m1(params, t, x)?,
                2 => density::density_m2(params, t, x)?,
                m => return Err(Error::UnsupportedShape { m }),
            };
            // absolute floor covers the O(1e-8) inset of the evaluation point
            let tol = 1e-6 * limit.abs() + 1e-7;
            checks.push(Check::new(
                format!("m={} t={t} {tag} cone limit (closed form)", params.m),
                limit,
                near,
                tol,
            ));
            // Monte Carlo window rate: 3 sigma statistical plus an explicit
            // O(eps) bias budget
            let win = mc::estimate_window(params, t, side, opts.mc_eps, opts.mc_samples, opts.seed)?;
            let tol = 3.0 * win.stderr + 0.01 * limit.abs().max(1.0) + 0.01 * opts.mc_eps;
            checks.push(Check::new(
                format!("m={} t={t} {tag} cone limit (MC window)", params.m),
                limit,
                win.rate_hat,
                tol,
            ));
        }
    }
    Ok(checks)
}
