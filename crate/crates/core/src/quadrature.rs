//! Outage of the `i`-th weakest admitted user under Type I open-loop
//! admission, which has no closed form.
//!
//! With `h = |h_(i)|^2` and `S` the sum of the `i-1` weaker gains, user `i`
//! fails iff `h < eps/Pbar` or `S > h/eps - 1/Pbar`, where `eps = 2^{L/B0} - 1`.
//! Given `h = x`, `S` is a sum of `i-1` exponentials truncated to `[0, x]`,
//! whose tail is available in closed form, so only the integral over `x` is
//! numerical:
//!
//! `P_i = F_(i)(min(tau, eps/Pbar)) + int_{eps/Pbar}^{tau} f_(i)(x) P(S > x/eps - 1/Pbar | x) dx`.

use crate::analytics::{AnalyticValue, Method};
use crate::channel::{cdf_order_stat_below, pdf_order_stat_below, tail_sum_trunc_below_ext, TailLimit};
use crate::config::SystemConfig;
use crate::error::{domain, Result};
use crate::integrate::integrate;
use crate::precision::{ExtCtx, Precision};

/// Absolute tolerance of the outer integral.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

const MAX_SEGMENTS: usize = 2000;

/// Options for [`pi_t1_ol_with`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub tolerance: f64,
    pub precision: Precision,
    /// Upper limit of the conditional tail integral.
    pub tail: TailLimit,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { tolerance: DEFAULT_TOLERANCE, precision: Precision::DEFAULT, tail: TailLimit::Infinity }
    }
}

pub fn pi_t1_ol(i: usize, n: usize, cfg: &SystemConfig) -> Result<AnalyticValue> {
    pi_t1_ol_with(i, n, cfg, QuadratureOptions::default())
}

pub fn pi_t1_ol_with(i: usize, n: usize, cfg: &SystemConfig, opts: QuadratureOptions) -> Result<AnalyticValue> {
    cfg.validate()?;
    if n == 0 || i == 0 || i > n {
        return Err(domain(format!("user index must satisfy 1 <= i <= N, got i = {i}, N = {n}")));
    }
    let tagged = |value: f64| AnalyticValue { value, method: Method::Exact, precision_bits: opts.precision.get() };
    let eps = cfg.eps_payload();
    let tau = cfg.tau;
    if cfg.pbar == 0.0 || tau <= eps / cfg.pbar {
        return Ok(tagged(1.0));
    }
    let lower = eps / cfg.pbar;
    let certain = cdf_order_stat_below(lower, i, n, tau)?;
    if i == 1 {
        return Ok(tagged(certain));
    }

    let inv_pbar = 1.0 / cfg.pbar;
    let inv_eps = 1.0 / eps;
    // kinks where the threshold x/eps - 1/Pbar crosses p x
    let mut points = vec![lower];
    for p in 1..(i - 1) {
        let slope = inv_eps - p as f64;
        if slope > 0.0 {
            let x = inv_pbar / slope;
            if x > lower && x < tau {
                points.push(x);
            }
        }
    }
    points.push(tau);
    points.sort_by(f64::total_cmp);

    let mut ctx = ExtCtx::new(opts.precision);
    let m = (i - 1) as u32;
    let mut failure = None;
    let integral = integrate(
        |x| {
            let density = match pdf_order_stat_below(x, i, n, tau) {
                Ok(d) => d,
                Err(e) => {
                    failure.get_or_insert(e);
                    return 0.0;
                }
            };
            if density == 0.0 {
                return 0.0;
            }
            let t = ctx.num(x * inv_eps - inv_pbar);
            let cond = ctx.num(x);
            match tail_sum_trunc_below_ext(&mut ctx, &t, m, &cond, opts.tail) {
                Ok(tail) => density * tail.to_f64().clamp(0.0, 1.0),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &points,
        opts.tolerance,
        MAX_SEGMENTS,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let value = certain + integral.value;
    if value > 1.0 + 1e-9 || value < -1e-9 {
        log::warn!("quadrature outage {value:e} outside [0, 1]; clamping");
    }
    Ok(tagged(value.clamp(0.0, 1.0)))
}
