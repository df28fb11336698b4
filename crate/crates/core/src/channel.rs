//! Rayleigh-fading channel gains and the distributions of ordered, truncated
//! and summed exponential gains.
//!
//! Channel gains `|h|^2` are drawn directly as unit-mean exponentials. The
//! unit step is taken as `u(0) = 1` everywhere, so supports are closed at
//! their lower breakpoints.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{domain, Result};
use crate::precision::{binomial, Ext, ExtCtx, Precision};
use crate::special::exp_series;

/// One fading draw: the grant-based gain and `M` grant-free gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    g0: f64,
    gains: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(g0: f64, gains: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(crate::error::config("a realization needs at least one grant-free gain"));
        }
        if !(g0 >= 0.0) || gains.iter().any(|g| !(*g >= 0.0)) {
            return Err(domain("channel gains must be non-negative"));
        }
        Ok(ChannelRealization { g0, gains })
    }

    /// `|h0|^2` of the grant-based user.
    pub fn g0(&self) -> f64 {
        self.g0
    }

    /// Unordered grant-free gains `|h_m|^2`, indexed by user.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn m(&self) -> usize {
        self.gains.len()
    }

    /// Gains in ascending order, `|h_(1)|^2 <= ... <= |h_(M)|^2`.
    pub fn sorted_gains(&self) -> Vec<f64> {
        let mut v = self.gains.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Redraws every gain in place from `rng`.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.g0 = rng.sample(Exp1);
        for g in &mut self.gains {
            *g = rng.sample(Exp1);
        }
    }
}

/// Draws `|h0|^2` and `M` grant-free gains, all i.i.d. unit-mean exponential.
pub fn sample_realization<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<ChannelRealization> {
    if m == 0 {
        return Err(crate::error::config("M must be at least 1"));
    }
    let mut r = ChannelRealization { g0: 0.0, gains: vec![0.0; m] };
    r.resample(rng);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncSide {
    /// Exponential conditioned on lying in `[0, tau]`.
    Below,
    /// Exponential conditioned on exceeding `tau` (a shifted exponential).
    Above,
}

/// A unit-mean exponential truncated at `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedExpSpec {
    tau: f64,
    side: TruncSide,
}

impl TruncatedExpSpec {
    pub fn new(tau: f64, side: TruncSide) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(domain(format!("truncation threshold must be positive, got {tau}")));
        }
        Ok(TruncatedExpSpec { tau, side })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn side(&self) -> TruncSide {
        self.side
    }
}

/// CDF of a truncated unit exponential.
pub fn trunc_exp_cdf(spec: TruncatedExpSpec, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(domain(format!("CDF argument must be non-negative, got {y}")));
    }
    let tau = spec.tau;
    Ok(match spec.side {
        TruncSide::Below if y >= tau => 1.0,
        TruncSide::Below => (-y).exp_m1() / (-tau).exp_m1(),
        TruncSide::Above if y <= tau => 0.0,
        // (e^-tau - e^-y) / e^-tau
        TruncSide::Above => -(-(y - tau)).exp_m1(),
    })
}

fn check_n(n: usize, what: &str) -> Result<u32> {
    if n == 0 {
        return Err(domain(format!("{what}: n must be at least 1")));
    }
    if n > 64 {
        return Err(domain(format!("{what}: n = {n} exceeds the supported maximum of 64")));
    }
    Ok(n as u32)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(domain(format!("truncation threshold must be positive, got {tau}")));
    }
    Ok(())
}

/// Density of the sum of `n` i.i.d. exponentials truncated to `[0, tau]`,
/// obtained by inverting the Laplace transform of the `n`-fold convolution:
///
/// `f(y) = sum_p C(n,p) (-1)^p e^{-p tau} (y - p tau)^{n-1} e^{-(y - p tau)} u(y - p tau)
///          / ((1 - e^{-tau})^n (n-1)!)`
///
/// The factors `e^{-p tau} e^{-(y - p tau)}` collapse to `e^{-y}`, leaving an
/// alternating polynomial sum that is evaluated at `prec` bits. The result is
/// zero (up to working precision) for `y >= n tau`.
pub fn pdf_sum_trunc_below_with(y: f64, n: usize, tau: f64, prec: Precision) -> Result<f64> {
    let n = check_n(n, "pdf_sum_trunc_below")?;
    check_tau(tau)?;
    if y < 0.0 {
        return Ok(0.0);
    }
    let mut ctx = ExtCtx::new(prec);
    let (y, tau) = (ctx.num(y), ctx.num(tau));
    Ok(pdf_sum_trunc_below_ext(&mut ctx, &y, n, &tau)?.to_f64())
}

pub fn pdf_sum_trunc_below(y: f64, n: usize, tau: f64) -> Result<f64> {
    pdf_sum_trunc_below_with(y, n, tau, Precision::DEFAULT)
}

pub(crate) fn pdf_sum_trunc_below_ext(ctx: &mut ExtCtx, y: &Ext, n: u32, tau: &Ext) -> Result<Ext> {
    let mut acc = ctx.zero();
    for p in 0..=n {
        let shift = y - &(tau * &ctx.int(p as i64));
        if shift.is_negative() {
            break;
        }
        let term = ctx.binom(n, p)? * shift.powi((n - 1) as usize);
        acc = if p % 2 == 0 { acc + term } else { acc - term };
    }
    let one_minus = ctx.one() - ctx.exp(&-tau);
    let norm = one_minus.powi(n as usize) * ctx.factorial(n - 1);
    Ok(ctx.exp(&-y) * acc / norm)
}

/// Upper limit used for the tail of a truncated-exponential sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailLimit {
    /// Integrate the density to infinity (valid because it vanishes past `n tau`).
    Infinity,
    /// Integrate only up to the support edge `n tau`.
    SupportEdge,
}

/// `P(S > t)` for `S` the sum of `n` exponentials truncated to `[0, tau]`,
/// in closed form: each step-shifted Erlang term integrates to an
/// integer-order upper incomplete Gamma function.
pub(crate) fn tail_sum_trunc_below_ext(
    ctx: &mut ExtCtx,
    t: &Ext,
    n: u32,
    tau: &Ext,
    limit: TailLimit,
) -> Result<Ext> {
    let mut tail = erlang_shift_tail_sum(ctx, t, n, tau)?;
    if limit == TailLimit::SupportEdge {
        let edge = tau * &ctx.int(n as i64);
        if t < &edge {
            let beyond = erlang_shift_tail_sum(ctx, &edge, n, tau)?;
            tail = tail - beyond;
        } else {
            return Ok(ctx.zero());
        }
    }
    Ok(tail)
}

// sum_p C(n,p)(-1)^p e^{-p tau} Gamma(n, (t - p tau)^+)/(n-1)! / (1-e^{-tau})^n
fn erlang_shift_tail_sum(ctx: &mut ExtCtx, t: &Ext, n: u32, tau: &Ext) -> Result<Ext> {
    let e_tau = ctx.exp(&-tau);
    let e_t = ctx.exp(&-t);
    let mut acc = ctx.zero();
    let mut e_ptau = ctx.one();
    for p in 0..=n {
        if p > 0 {
            e_ptau = &e_ptau * &e_tau;
        }
        let z = t - &(tau * &ctx.int(p as i64));
        // e^{-p tau} Gamma(n, z^+)/(n-1)!  with e^{-p tau} e^{-z} = e^{-t}
        let body = if z.is_negative() || z.is_zero() {
            e_ptau.clone()
        } else {
            &e_t * &exp_series(ctx, &z, n)
        };
        let term = ctx.binom(n, p)? * body;
        acc = if p % 2 == 0 { acc + term } else { acc - term };
    }
    let norm = (ctx.one() - e_tau).powi(n as usize);
    Ok(acc / norm)
}

/// `P(S > t)` for the sum of `n` exponentials truncated to `[0, tau]`.
pub fn tail_sum_trunc_below(t: f64, n: usize, tau: f64, limit: TailLimit) -> Result<f64> {
    let n = check_n(n, "tail_sum_trunc_below")?;
    check_tau(tau)?;
    let mut ctx = ExtCtx::new(Precision::DEFAULT);
    let (t, tau) = (ctx.num(t), ctx.num(tau));
    Ok(tail_sum_trunc_below_ext(&mut ctx, &t, n, &tau, limit)?.to_f64())
}

/// Density of `sum_{j<i} |h_(j)|^2` given `|h_(i)|^2 = cond`: the `i-1`
/// smaller gains are i.i.d. exponentials truncated to `[0, cond]`.
pub fn pdf_sum_conditional(y: f64, i: usize, cond: f64) -> Result<f64> {
    if i < 2 {
        return Err(domain(format!("conditional sum needs i >= 2 (got {i}); the sum is empty")));
    }
    pdf_sum_trunc_below(y, i - 1, cond)
}

fn order_stat_coeff(i: usize, n: usize) -> Result<f64> {
    // N! / ((i-1)! (N-i)!) = N * C(N-1, i-1)
    Ok(n as f64 * binomial((n - 1) as u32, (i - 1) as u32)? as f64)
}

fn check_order(i: usize, n: usize) -> Result<()> {
    if n == 0 || i == 0 || i > n {
        return Err(domain(format!("order statistic index must satisfy 1 <= i <= N, got i = {i}, N = {n}")));
    }
    if n > 64 {
        return Err(domain(format!("N = {n} exceeds the supported maximum of 64")));
    }
    Ok(())
}

/// Density of the `i`-th smallest of `N` i.i.d. exponentials truncated to
/// `[0, tau]`:
/// `c_{N,i} e^{-x} (1-e^{-x})^{i-1} (e^{-x}-e^{-tau})^{N-i} / (1-e^{-tau})^N`.
pub fn pdf_order_stat_below(x: f64, i: usize, n: usize, tau: f64) -> Result<f64> {
    check_order(i, n)?;
    check_tau(tau)?;
    if !(0.0..=tau).contains(&x) {
        return Ok(0.0);
    }
    let below = -(-x).exp_m1();
    let gap = (-x).exp() * -(-(tau - x)).exp_m1();
    let norm = -(-tau).exp_m1();
    let c = order_stat_coeff(i, n)?;
    Ok(c * (-x).exp() * below.powi(i as i32 - 1) * gap.powi((n - i) as i32) / norm.powi(n as i32))
}

/// CDF of the `i`-th smallest of `N` i.i.d. exponentials truncated to
/// `[0, tau]`: `sum_{j=i}^{N} C(N,j) F^j (1-F)^{N-j}`.
pub fn cdf_order_stat_below(x: f64, i: usize, n: usize, tau: f64) -> Result<f64> {
    check_order(i, n)?;
    check_tau(tau)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= tau {
        return Ok(1.0);
    }
    let f = (-x).exp_m1() / (-tau).exp_m1();
    let mut acc = 0.0;
    for j in i..=n {
        acc += binomial(n as u32, j as u32)? as f64 * f.powi(j as i32) * (1.0 - f).powi((n - j) as i32);
    }
    Ok(acc.min(1.0))
}

/// Density of the sum of `n` i.i.d. exponentials conditioned to exceed `tau`:
/// an Erlang(`n`) density shifted by `n tau`.
pub fn pdf_sum_shifted_above(y: f64, n: usize, tau: f64) -> Result<f64> {
    let n = check_n(n, "pdf_sum_shifted_above")?;
    check_tau(tau)?;
    let z = y - n as f64 * tau;
    if z < 0.0 {
        return Ok(0.0);
    }
    let mut v = (-z).exp();
    for k in 1..n {
        v *= z / k as f64;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = sample_realization(3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_realization(3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let c = sample_realization(3, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.m(), 3);
        assert!(a.g0() >= 0.0 && a.gains().iter().all(|g| *g >= 0.0));
        let s = a.sorted_gains();
        assert!(s.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sampling_rejects_zero_users() {
        assert!(sample_realization(0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
        assert!(ChannelRealization::new(1.0, vec![]).is_err());
        assert!(ChannelRealization::new(-1.0, vec![1.0]).is_err());
    }

    #[test]
    fn gain_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut below = 0u64;
        let mut r = sample_realization(1, &mut rng).unwrap();
        for _ in 0..n {
            r.resample(&mut rng);
            let g = r.gains()[0];
            sum += g;
            below += (g < 0.5) as u64;
        }
        assert!(close(sum / n as f64, 1.0, 0.01));
        let p = 1.0 - (-0.5f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(close(below as f64 / n as f64, p, 3.0 * se));
    }

    #[test]
    fn trunc_cdf_values() {
        let below = TruncatedExpSpec::new(4f64.ln(), TruncSide::Below).unwrap();
        assert_eq!(trunc_exp_cdf(below, below.tau()).unwrap(), 1.0);
        assert!(close(trunc_exp_cdf(below, 2f64.ln()).unwrap(), 2.0 / 3.0, 1e-15));
        assert_eq!(trunc_exp_cdf(below, 0.0).unwrap(), 0.0);
        let above = TruncatedExpSpec::new(1.0, TruncSide::Above).unwrap();
        assert!(close(trunc_exp_cdf(above, 2.0).unwrap(), 1.0 - (-1f64).exp(), 1e-15));
        assert_eq!(trunc_exp_cdf(above, 0.5).unwrap(), 0.0);
        assert!(trunc_exp_cdf(above, -0.1).is_err());
        assert!(TruncatedExpSpec::new(0.0, TruncSide::Below).is_err());
    }

    #[test]
    fn single_truncated_density() {
        let tau = 0.8;
        let v = pdf_sum_trunc_below(tau / 2.0, 1, tau).unwrap();
        assert!(close(v, (-tau / 2.0f64).exp() / (1.0 - (-tau).exp()), 1e-15));
        assert_eq!(pdf_sum_trunc_below(tau, 1, tau).unwrap(), 0.0);
        assert!(pdf_sum_trunc_below(0.1, 0, tau).is_err());
    }

    #[test]
    fn vanishes_beyond_support() {
        for y in [2.0, 2.5, 4.0] {
            assert!(pdf_sum_trunc_below(y, 4, 0.5).unwrap().abs() < 1e-12);
        }
        assert!(pdf_sum_conditional(2.4, 4, 0.8).unwrap().abs() < 1e-12);
    }

    #[test]
    fn conditional_reduces_to_single_truncated() {
        let c = 1.3;
        let y = 0.4;
        let v = pdf_sum_conditional(y, 2, c).unwrap();
        assert!(close(v, (-y).exp() / (1.0 - (-c).exp()), 1e-15));
        assert!(pdf_sum_conditional(y, 1, c).is_err());
    }

    #[test]
    fn order_stat_single_variate() {
        let tau = 0.7;
        for x in [0.0, 0.2, 0.7] {
            let v = pdf_order_stat_below(x, 1, 1, tau).unwrap();
            assert!(close(v, (-x).exp() / (1.0 - (-tau).exp()), 1e-15));
        }
        assert_eq!(pdf_order_stat_below(0.9, 1, 1, tau).unwrap(), 0.0);
        assert!(pdf_order_stat_below(0.1, 0, 3, tau).is_err());
        assert!(pdf_order_stat_below(0.1, 4, 3, tau).is_err());
    }

    #[test]
    fn order_stat_cdf_endpoints() {
        assert_eq!(cdf_order_stat_below(0.0, 2, 5, 1.0).unwrap(), 0.0);
        assert_eq!(cdf_order_stat_below(1.0, 2, 5, 1.0).unwrap(), 1.0);
        // minimum of N: 1 - (1-F)^N
        let f = trunc_exp_cdf(TruncatedExpSpec::new(1.0, TruncSide::Below).unwrap(), 0.3).unwrap();
        let v = cdf_order_stat_below(0.3, 1, 5, 1.0).unwrap();
        assert!(close(v, 1.0 - (1.0 - f).powi(5), 1e-15));
    }

    #[test]
    fn shifted_sum_values() {
        let tau = 0.4;
        assert!(close(pdf_sum_shifted_above(tau + 0.3, 1, tau).unwrap(), (-0.3f64).exp(), 1e-15));
        assert_eq!(pdf_sum_shifted_above(0.79, 2, tau).unwrap(), 0.0);
        let v = pdf_sum_shifted_above(2.3, 3, 0.5).unwrap();
        assert!(close(v, 0.64 * (-0.8f64).exp() / 2.0, 1e-15));
        assert!(close(v, 0.143_79, 1e-5));
        assert!(pdf_sum_shifted_above(1.0, 0, tau).is_err());
    }

    #[test]
    fn tail_is_one_at_zero_and_zero_at_edge() {
        for n in 1..=6 {
            let t0 = tail_sum_trunc_below(0.0, n, 0.7, TailLimit::Infinity).unwrap();
            assert!(close(t0, 1.0, 1e-14), "n={n}: {t0}");
            let edge = tail_sum_trunc_below(n as f64 * 0.7, n, 0.7, TailLimit::Infinity).unwrap();
            assert!(edge.abs() < 1e-14, "n={n}: {edge}");
        }
    }

    #[test]
    fn tail_limits_agree() {
        for n in 1..=5 {
            for t in [0.1, 0.5, 1.2, 2.0] {
                let a = tail_sum_trunc_below(t, n, 0.6, TailLimit::Infinity).unwrap();
                let b = tail_sum_trunc_below(t, n, 0.6, TailLimit::SupportEdge).unwrap();
                assert!((a - b).abs() < 1e-15, "n={n} t={t}: {a} vs {b}");
            }
        }
    }
}
