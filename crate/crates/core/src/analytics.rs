//! Closed-form, asymptotic and limiting outage probabilities.
//!
//! Every alternating binomial sum is evaluated in extended precision; results
//! are rounded to `f64` only when the [`AnalyticValue`] is built. Evaluators
//! that expand `C(M, n)` or `C(N, k)` support `M, N <= 64`.

use std::fmt;

use crate::config::SystemConfig;
use crate::error::{domain, Result};
use crate::precision::{binomial, Ext, ExtCtx, Precision};
use crate::special::gamma_upper;

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Asymptotic,
    Limit,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Asymptotic => "asymptotic",
            Method::Limit => "limit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticValue {
    pub value: f64,
    pub method: Method,
    pub precision_bits: u32,
}

/// Operating regime of the Type I open-loop high-SNR approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `tau` shrinks like `1/P0`; the caller sets `tau` accordingly.
    TauScaled,
    /// `tau` and `Pbar` fixed while `P0` grows.
    TauFixed,
}

/// Evaluator bound to a working precision.
#[derive(Debug, Clone, Copy, Default)]
pub struct Analytics {
    pub precision: Precision,
}

const MAX_BINOMIAL_N: usize = 64;

fn check_count(name: &str, n: usize) -> Result<u32> {
    if n > MAX_BINOMIAL_N {
        return Err(domain(format!("{name} = {n} exceeds the supported maximum of {MAX_BINOMIAL_N}")));
    }
    Ok(n as u32)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(domain(format!("tau must be finite and positive, got {tau}")));
    }
    Ok(())
}

impl Analytics {
    pub fn new(precision: Precision) -> Self {
        Analytics { precision }
    }

    fn ctx(&self) -> ExtCtx {
        ExtCtx::new(self.precision)
    }

    fn exact(&self, v: Ext) -> AnalyticValue {
        let mut value = v.to_f64();
        if !(0.0..=1.0).contains(&value) {
            if value.is_nan() || value < -1e-9 || value > 1.0 + 1e-9 {
                log::warn!("exact evaluator returned {value:e}, outside [0, 1]; clamping");
            } else {
                log::debug!("clamping roundoff excursion {value:e}");
            }
            value = if value.is_nan() { value } else { value.clamp(0.0, 1.0) };
        }
        AnalyticValue { value, method: Method::Exact, precision_bits: self.precision.get() }
    }

    fn tagged(&self, v: Ext, method: Method) -> AnalyticValue {
        AnalyticValue { value: v.to_f64(), method, precision_bits: self.precision.get() }
    }

    /// `P(N = n)` for `N` users below `tau`: `C(M,n) e^{-(M-n) tau} (1-e^{-tau})^n`.
    pub fn prob_n_below(&self, n: usize, m: usize, tau: f64) -> Result<f64> {
        let mut ctx = self.ctx();
        let t = ctx.num(tau);
        Ok(prob_n_ext(&mut ctx, n, m, &t, false)?.to_f64())
    }

    /// `P(N = n)` for `N` users above `tau`: `C(M,n) e^{-n tau} (1-e^{-tau})^{M-n}`.
    pub fn prob_n_above(&self, n: usize, m: usize, tau: f64) -> Result<f64> {
        let mut ctx = self.ctx();
        let t = ctx.num(tau);
        Ok(prob_n_ext(&mut ctx, n, m, &t, true)?.to_f64())
    }

    /// Outage of `U0` under Type I open-loop admission.
    pub fn p0_t1_ol_exact(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let m = check_count("M", cfg.m)?;
        let mut ctx = self.ctx();
        let a = ctx.num(cfg.eps0() / cfg.p0);
        let grant_based = ctx.one() - ctx.exp(&-&a);
        if cfg.pbar == 0.0 || a.is_zero() {
            return Ok(self.exact(grant_based));
        }
        let tau = ctx.num(cfg.tau);
        let pbar = ctx.num(cfg.pbar);
        // c = P0 / (eps0 Pbar); c^l / (1+c)^{l+1} = eps0 P0^-1 Pbar / (1 + eps0 P0^-1 Pbar)^{l+1}
        let x = &a * &pbar;
        let weight = &x / &(ctx.one() + &x);
        let ratio = ctx.one() / (ctx.one() + &x);
        let e_a = ctx.exp(&-&a);
        let e_tau = ctx.exp(&-&tau);
        let mut total = ctx.zero();
        for n in 1..=m {
            let pn = &ctx.binom(m, n)? * &ctx.exp(&-(&tau * &ctx.int((m - n) as i64)));
            // sum_{l<n} c^l/(1+c)^{l+1}
            let mut geo = ctx.zero();
            let mut term = weight.clone();
            for _ in 0..n {
                geo = &geo + &term;
                term = &term * &ratio;
            }
            let mut inner = ctx.zero();
            for p in 0..=n {
                let tail = ctx.exp(&-(&a * &(ctx.one() + &(&pbar * &(&ctx.int(p as i64) * &tau)))));
                let bracket = &(&geo * &tail) + &(&e_a - &tail);
                let t = &(&ctx.binom(n, p)? * &e_tau.powi(p as usize)) * &bracket;
                inner = if p % 2 == 0 { inner + t } else { inner - t };
            }
            total = total + pn * inner;
        }
        Ok(self.exact(total + grant_based))
    }

    /// High-SNR approximation of [`Analytics::p0_t1_ol_exact`].
    pub fn p0_t1_ol_asym(&self, cfg: &SystemConfig, regime: Regime) -> Result<AnalyticValue> {
        cfg.validate()?;
        let mut ctx = self.ctx();
        let a = ctx.num(cfg.eps0() / cfg.p0);
        let pbar = ctx.num(cfg.pbar);
        let tau = ctx.num(cfg.tau);
        let m = cfg.m as i64;
        let gap = match regime {
            Regime::TauScaled => {
                let decay = ctx.exp(&-(&tau * &ctx.int(m - 1)));
                &(&(&tau * &a) * &pbar) * &(&ctx.int(m) * &decay)
            }
            Regime::TauFixed => {
                let m32 = check_count("M", cfg.m)?;
                let e_tau = ctx.exp(&-&tau);
                let below = ctx.one() - &e_tau;
                let shape = &below - &(&tau * &e_tau);
                let mut sum = ctx.zero();
                for n in 1..=m32 {
                    // M! / ((n-1)! (M-n)!) = n C(M, n)
                    let coef = &ctx.int(n as i64) * &ctx.binom(m32, n)?;
                    let t = &(&coef * &e_tau.powi((m32 - n) as usize)) * &below.powi((n - 1) as usize);
                    sum = sum + t;
                }
                &(&a * &pbar) * &(&sum * &shape)
            }
        };
        Ok(self.tagged(&a + &gap, Method::Asymptotic))
    }

    /// Outage of `U0` with the weakest eligible user scheduled (Type I DCC).
    pub fn p0_t1_dcc_exact(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let mut ctx = self.ctx();
        let q2 = q2_t1_dcc(&mut ctx, cfg);
        let a = ctx.num(cfg.eps0() / cfg.p0);
        let none = ctx.exp(&-(&ctx.num(cfg.tau) * &ctx.int(cfg.m as i64)));
        let gb = ctx.one() - ctx.exp(&-&a);
        Ok(self.exact(q2 + none * gb))
    }

    /// Approximation of [`Analytics::p0_t1_dcc_exact`] for large `P0`.
    pub fn p0_t1_dcc_asym(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let mut ctx = self.ctx();
        let a = ctx.num(cfg.eps0() / cfg.p0);
        let m = ctx.int(cfg.m as i64);
        let tau = ctx.num(cfg.tau);
        let none = ctx.exp(&-(&tau * &m));
        let shape = &(&(ctx.one() - &none) / &m) - &(&none * &tau);
        let gap = &(&a * &ctx.num(cfg.pbar)) * &shape;
        Ok(self.tagged(&a + &gap, Method::Asymptotic))
    }

    /// Outage of the user scheduled by Type I DCC, given `N` eligible users.
    ///
    /// The scheduled user succeeds only if `U0` is decoded first and its own
    /// SNR meets `eps_i`; the `|h0|^2` integration therefore starts where both
    /// can hold, at `eps0 (1 + eps_i) / P0`.
    pub fn p1_t1_dcc_exact(&self, n: usize, cfg: &SystemConfig) -> Result<AnalyticValue> {
        self.p1_t1_dcc(n, cfg, false)
    }

    /// The same closed form with `|h0|^2` integrated from `eps0 / P0`. Kept
    /// for comparison; it overstates the outage because it credits negative
    /// success mass for `|h0|^2` between the two starting points.
    pub fn p1_t1_dcc_printed(&self, n: usize, cfg: &SystemConfig) -> Result<AnalyticValue> {
        self.p1_t1_dcc(n, cfg, true)
    }

    fn p1_t1_dcc(&self, n: usize, cfg: &SystemConfig, printed: bool) -> Result<AnalyticValue> {
        cfg.validate()?;
        if n == 0 {
            return Err(domain("N must be at least 1"));
        }
        let nn = check_count("N", n)?;
        let mut ctx = self.ctx();
        let eps_i = cfg.eps_i();
        if cfg.pbar == 0.0 || eps_i / cfg.pbar >= cfg.tau {
            return Ok(self.exact(ctx.one()));
        }
        let tau = ctx.num(cfg.tau);
        let pbar = ctx.num(cfg.pbar);
        let d = ctx.num(eps_i) / &pbar;
        let e_tau = ctx.exp(&-&tau);
        let below = ctx.one() - &e_tau;
        let s_d = ((ctx.exp(&-&d) - &e_tau) / &below).powi(n);
        let a = ctx.num(cfg.eps0() / cfg.p0);
        if a.is_zero() {
            return Ok(self.exact(ctx.one() - s_d));
        }
        let start = if printed { a.clone() } else { &a * &(ctx.one() + ctx.num(eps_i)) };
        let stop = &a * &(ctx.one() + &(&pbar * &tau));
        // c = P0 / (eps0 Pbar), so (1 + k c) a = a + k / Pbar
        let c = ctx.one() / (&a * &pbar);
        let norm = below.powi(n);
        let mut sum = ctx.zero();
        for k in 0..=nn {
            let kk = ctx.int(k as i64);
            let rate = ctx.one() + &(&kk * &c);
            let window = ctx.exp(&-(&rate * &start)) - ctx.exp(&-(&rate * &stop));
            let lead = ctx.exp(&(&(&kk / &pbar) - &(&tau * &ctx.int((nn - k) as i64))));
            let t = &(&ctx.binom(nn, k)? * &lead) * &(&window / &rate);
            sum = if (nn - k) % 2 == 0 { sum + t } else { sum - t };
        }
        let success = &s_d * &ctx.exp(&-&start) - &sum / &norm;
        Ok(self.exact(ctx.one() - success))
    }

    /// Limit of [`Analytics::p1_t1_dcc_exact`] as `P0 = Pbar -> inf`.
    pub fn p1_t1_dcc_floor(&self, n: usize, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        if n == 0 {
            return Err(domain("N must be at least 1"));
        }
        let nn = check_count("N", n)?;
        let mut ctx = self.ctx();
        let tau = ctx.num(cfg.tau);
        let eps0 = ctx.num(cfg.eps0());
        let norm = (ctx.one() - ctx.exp(&-&tau)).powi(n);
        let mut sum = ctx.zero();
        for k in 0..=nn {
            let kk = ctx.int(k as i64);
            let lead = ctx.exp(&-(&tau * &ctx.int((nn - k) as i64)));
            let num = ctx.one() - ctx.exp(&-(&(&eps0 + &kk) * &tau));
            let den = if eps0.is_zero() {
                if k == 0 {
                    ctx.one()
                } else {
                    continue;
                }
            } else {
                ctx.one() + &(&kk / &eps0)
            };
            let t = &(&ctx.binom(nn, k)? * &lead) * &(&num / &den);
            sum = if (nn - k) % 2 == 0 { sum + t } else { sum - t };
        }
        Ok(self.tagged(sum / norm, Method::Limit))
    }

    /// Outage of `U0` under Type II open-loop admission (sum-rate SIC criterion).
    pub fn p0_t2_ol_exact(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let mut ctx = self.ctx();
        let tau = ctx.num(cfg.tau);
        let v = t2_ol_core(&mut ctx, cfg, &tau)?;
        Ok(self.exact(v))
    }

    /// Large-`Pbar` approximation of [`Analytics::p0_t2_ol_exact`].
    pub fn p0_t2_ol_asym(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let mut ctx = self.ctx();
        let a = ctx.num(cfg.eps0() / cfg.p0);
        let base = ctx.one() - ctx.exp(&-&a);
        if cfg.pbar == 0.0 {
            return Ok(self.tagged(ctx.one(), Method::Asymptotic));
        }
        let p0 = ctx.num(cfg.p0);
        let pbar = ctx.num(cfg.pbar);
        let tau = ctx.num(cfg.tau);
        let e1 = ctx.num(cfg.eps_sum(1));
        let e_tau = ctx.exp(&-&tau);
        let lead = ctx.exp(&(ctx.one() / &p0));
        let shape = &(&ctx.int(cfg.m as i64) * &e_tau) * &(ctx.one() - &e_tau).powi(cfg.m - 1);
        let num = &(&lead * &p0) * &(&shape * &e1);
        let den = &pbar * &ctx.exp(&(&(&tau * &pbar) / &(&e1 * &p0)));
        Ok(self.tagged(base + num / den, Method::Asymptotic))
    }

    /// Outage of `U0` with the strongest eligible user scheduled (Type II DCC).
    pub fn p0_t2_dcc_exact(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let m = check_count("M", cfg.m)?;
        let mut ctx = self.ctx();
        let a = ctx.num(cfg.eps0() / cfg.p0);
        let tau = ctx.num(cfg.tau);
        let none_above = (ctx.one() - ctx.exp(&-&tau)).powi(cfg.m);
        let solo = &none_above * &ctx.exp(&-&a);
        if cfg.pbar == 0.0 {
            return Ok(self.exact(ctx.one() - solo));
        }
        let p0 = ctx.num(cfg.p0);
        let pbar = ctx.num(cfg.pbar);
        let eps_i = ctx.num(cfg.eps_i());
        // |h0|^2 at which the SINR requirement on h_(M) equals tau
        let cross = &(&(&pbar * &tau) / &eps_i - &ctx.one()) / &p0;
        let theta = if cross > a { cross.clone() } else { a.clone() };
        let mut q4 = ctx.exp(&-&theta);
        for k in 0..=m {
            let kk = ctx.int(k as i64);
            let rate = ctx.one() + &(&(&kk * &eps_i) * &(&p0 / &pbar));
            let lead = ctx.exp(&-(&(&kk * &eps_i) / &pbar));
            let t = &(&ctx.binom(m, k)? * &lead) * &(&ctx.exp(&-(&rate * &theta)) / &rate);
            q4 = if k % 2 == 0 { q4 - t } else { q4 + t };
        }
        if cross > a {
            let band = ctx.exp(&-&a) - ctx.exp(&-&cross);
            q4 = q4 + (ctx.one() - &none_above) * band;
        }
        Ok(self.exact(ctx.one() - q4 - solo))
    }

    /// Outage of the user scheduled by Type II DCC, given `N` eligible users.
    pub fn pn_t2_dcc_exact(&self, n: usize, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        if n == 0 {
            return Err(domain("N must be at least 1"));
        }
        let nn = check_count("N", n)?;
        let mut ctx = self.ctx();
        if cfg.pbar == 0.0 {
            return Ok(self.exact(ctx.one()));
        }
        let p0 = ctx.num(cfg.p0);
        let pbar = ctx.num(cfg.pbar);
        let tau = ctx.num(cfg.tau);
        let eps_i = ctx.num(cfg.eps_i());
        let cross = &(&(&pbar * &tau) / &eps_i - &ctx.one()) / &p0;
        let start = if cross.is_negative() { ctx.zero() } else { cross };
        let mut sum = ctx.zero();
        for k in 0..=nn {
            let kk = ctx.int(k as i64);
            let rate = ctx.one() + &(&(&kk * &eps_i) * &(&p0 / &pbar));
            let lead = ctx.exp(&(&(&kk * &tau) - &(&(&kk * &eps_i) / &pbar)));
            let t = &(&ctx.binom(nn, k)? * &lead) * &(&ctx.exp(&-(&rate * &start)) / &rate);
            sum = if k % 2 == 0 { sum + t } else { sum - t };
        }
        Ok(self.exact(sum))
    }

    /// Outage of `U0` when all `M` users transmit and `U0` is decoded first:
    /// `1 - e^{-a} / (1 + a Pbar)^M` with `a = eps0 / P0`.
    pub fn p0_grant_free_t1(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let mut ctx = self.ctx();
        let a = ctx.num(cfg.eps0() / cfg.p0);
        let mgf = (ctx.one() + &(&a * &ctx.num(cfg.pbar))).powi(cfg.m);
        Ok(self.exact(ctx.one() - ctx.exp(&-&a) / mgf))
    }

    /// Outage of `U0` when all `M` users transmit and `U0` is decoded last
    /// (the open-loop Type II expression with every user admitted).
    pub fn p0_grant_free_t2(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let mut ctx = self.ctx();
        let zero = ctx.zero();
        let v = t2_ol_core(&mut ctx, cfg, &zero)?;
        Ok(self.exact(v))
    }

    /// Outage of `U0` alone on its block, `1 - e^{-eps0/P0}`.
    pub fn p0_grant_based(&self, cfg: &SystemConfig) -> Result<AnalyticValue> {
        cfg.validate()?;
        let mut ctx = self.ctx();
        let a = ctx.num(cfg.eps0() / cfg.p0);
        Ok(self.exact(ctx.one() - ctx.exp(&-&a)))
    }

    /// `Gamma(n, x)` for integer `n >= 1` from its finite series.
    pub fn upper_incomplete_gamma_int(&self, n: usize, x: f64) -> Result<f64> {
        if n == 0 {
            return Err(domain("incomplete Gamma order must be at least 1"));
        }
        if !(x >= 0.0) {
            return Err(domain(format!("incomplete Gamma argument must be non-negative, got {x}")));
        }
        let n = u32::try_from(n).map_err(|_| domain("incomplete Gamma order too large"))?;
        let mut ctx = self.ctx();
        let z = ctx.num(x);
        Ok(gamma_upper(&mut ctx, n, &z).to_f64())
    }

    /// Relative residual of `sum_p C(n,p) (-1)^p e^{-p tau} p = -n e^{-tau} (1-e^{-tau})^{n-1}`.
    pub fn binomial_derivative_residual(&self, n: usize, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        if n == 0 {
            return Err(domain("n must be at least 1"));
        }
        let nn = check_count("n", n)?;
        let mut ctx = self.ctx();
        let e_tau = ctx.exp(&-&ctx.num(tau));
        let mut lhs = ctx.zero();
        for p in 0..=nn {
            let t = &(&ctx.binom(nn, p)? * &e_tau.powi(p as usize)) * &ctx.int(p as i64);
            lhs = if p % 2 == 0 { lhs + t } else { lhs - t };
        }
        let rhs = -(&(&ctx.int(n as i64) * &e_tau) * &(ctx.one() - &e_tau).powi(n - 1));
        Ok(((&lhs - &rhs) / &rhs).abs().to_f64())
    }

    /// `|sum_{n=0}^{M} P(N = n) - 1|` for the below-threshold count.
    pub fn partition_of_unity_residual(&self, m: usize, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let mut ctx = self.ctx();
        let t = ctx.num(tau);
        let mut sum = ctx.zero();
        for n in 0..=m {
            sum = sum + prob_n_ext(&mut ctx, n, m, &t, false)?;
        }
        Ok((sum - ctx.one()).abs().to_f64())
    }
}

/// `sum_{p=0}^{n} C(n,p) (-1)^p (-1)^l p^l`, exactly. Zero for `l < n`.
pub fn alternating_power_sum(n: u32, l: u32) -> Result<i128> {
    let mut acc: i128 = 0;
    for p in 0..=n {
        let c = binomial(n, p)? as i128;
        let pow = (p as i128).checked_pow(l).ok_or_else(|| domain("power overflows 128 bits"))?;
        let t = c.checked_mul(pow).ok_or_else(|| domain("term overflows 128 bits"))?;
        let sign = if (p + l) % 2 == 0 { 1 } else { -1 };
        acc += sign * t;
    }
    Ok(acc)
}

fn prob_n_ext(ctx: &mut ExtCtx, n: usize, m: usize, tau: &Ext, above: bool) -> Result<Ext> {
    if n > m {
        return Err(domain(format!("n = {n} exceeds M = {m}")));
    }
    let mm = check_count("M", m)?;
    if tau.is_negative() {
        return Err(domain("tau must be non-negative"));
    }
    let e_tau = ctx.exp(&-tau);
    let below = ctx.one() - &e_tau;
    let (k_above, k_below) = if above { (n, m - n) } else { (m - n, n) };
    let c = ctx.binom(mm, n as u32)?;
    Ok(&(&c * &e_tau.powi(k_above)) * &below.powi(k_below))
}

// P(h_(1) < tau, U0 fails) for h_(1) the minimum of M unit exponentials.
// Algebraically equal to the three-term form
//   (1-e^{-M tau})(1-e^{-a}) - e^{-M tau}(e^{-a} - e^{-a(1+Pbar tau)})
//   + e^{M/Pbar} (e^{-(1+Mc)a} - e^{-(1+Mc)a(1+Pbar tau)}) / (1+Mc),
// rearranged so that Pbar -> 0 stays finite.
fn q2_t1_dcc(ctx: &mut ExtCtx, cfg: &SystemConfig) -> Ext {
    let a = ctx.num(cfg.eps0() / cfg.p0);
    let m = ctx.int(cfg.m as i64);
    let tau = ctx.num(cfg.tau);
    let rate = &m + &(&a * &ctx.num(cfg.pbar));
    let reach = ctx.one() - ctx.exp(&-(&rate * &tau));
    let first = ctx.one() - ctx.exp(&-(&m * &tau));
    let second = &(&ctx.exp(&-&a) * &m) * &(&reach / &rate);
    first - second
}

fn t2_ol_core(ctx: &mut ExtCtx, cfg: &SystemConfig, tau: &Ext) -> Result<Ext> {
    let m = check_count("M", cfg.m)?;
    let a = ctx.num(cfg.eps0() / cfg.p0);
    let e_a = ctx.exp(&-&a);
    let e_tau = ctx.exp(&-tau);
    let below = ctx.one() - &e_tau;
    let solo = &below.powi(cfg.m) * &e_a;
    if cfg.pbar == 0.0 {
        return Ok(ctx.one() - solo);
    }
    let p0 = ctx.num(cfg.p0);
    let pbar = ctx.num(cfg.pbar);
    let mut success = ctx.zero();
    for n in 1..=m {
        let pn = &(&ctx.binom(m, n)? * &e_tau.powi(n as usize)) * &below.powi((m - n) as usize);
        if pn.is_zero() {
            continue;
        }
        let eps = ctx.num(cfg.eps_sum(n as usize));
        let r = &(&eps * &p0) / &pbar;
        let one_r = ctx.one() + &r;
        let tau_n = &(&(&(&ctx.int(n as i64) * tau) * &pbar) / &eps - &ctx.one()) / &p0;
        let tau_bar = if tau_n > a { tau_n.clone() } else { a.clone() };
        let z = &(&tau_bar - &tau_n) * &one_r;
        let e_tau_n = ctx.exp(&-&tau_n);
        let mut inner = ctx.zero();
        let mut r_pow = ctx.one();
        let mut fact = ctx.one();
        for l in 1..n {
            r_pow = &r_pow * &r;
            fact = &fact * &ctx.int(l as i64);
            let gamma = gamma_upper(ctx, l + 1, &z);
            let t = &(&(&r_pow / &fact) * &e_tau_n) * &(&gamma / &one_r.powi((l + 1) as usize));
            inner = inner + t;
        }
        let last = &ctx.exp(&-(&tau_n + &z)) / &one_r;
        inner = inner + (&e_a - &ctx.exp(&-&tau_bar)) + last;
        success = success + pn * inner;
    }
    Ok(ctx.one() - success - solo)
}

macro_rules! default_fn {
    ($(#[$doc:meta])* $name:ident($($arg:ident: $ty:ty),*) -> $ret:ty) => {
        $(#[$doc])*
        pub fn $name($($arg: $ty),*) -> Result<$ret> {
            Analytics::default().$name($($arg),*)
        }
    };
}

default_fn!(prob_n_below(n: usize, m: usize, tau: f64) -> f64);
default_fn!(prob_n_above(n: usize, m: usize, tau: f64) -> f64);
default_fn!(p0_t1_ol_exact(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p0_t1_ol_asym(cfg: &SystemConfig, regime: Regime) -> AnalyticValue);
default_fn!(p0_t1_dcc_exact(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p0_t1_dcc_asym(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p1_t1_dcc_exact(n: usize, cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p1_t1_dcc_printed(n: usize, cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p1_t1_dcc_floor(n: usize, cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p0_t2_ol_exact(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p0_t2_ol_asym(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p0_t2_dcc_exact(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(pn_t2_dcc_exact(n: usize, cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p0_grant_free_t1(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p0_grant_free_t2(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(p0_grant_based(cfg: &SystemConfig) -> AnalyticValue);
default_fn!(upper_incomplete_gamma_int(n: usize, x: f64) -> f64);
default_fn!(binomial_derivative_residual(n: usize, tau: f64) -> f64);
default_fn!(partition_of_unity_residual(m: usize, tau: f64) -> f64);
