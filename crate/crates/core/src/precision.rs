//! Extended-precision arithmetic for the alternating binomial sums.
//!
//! The densities and closed forms in this crate contain sums of the form
//! `sum_p C(n,p) (-1)^p ...` whose terms are many orders of magnitude larger
//! than the result. They are evaluated with a software float of configurable
//! mantissa width and rounded to `f64` only when a value leaves the crate.
//!
//! Every evaluation creates its own [`ExtCtx`]; there is no global precision
//! state.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use crate::error::{domain, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Mantissa width used for extended-precision evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    /// Default working precision: 192 bits, roughly 57 decimal digits.
    pub const DEFAULT: Precision = Precision { bits: 192 };

    pub fn bits(bits: u32) -> Result<Self> {
        if !(64..=4096).contains(&bits) {
            return Err(domain(format!(
                "precision must be between 64 and 4096 bits, got {bits}"
            )));
        }
        Ok(Precision { bits })
    }

    pub fn get(self) -> u32 {
        self.bits
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

/// Per-evaluation context: working precision plus the constants cache that
/// `exp` needs.
pub(crate) struct ExtCtx {
    p: usize,
    cc: Consts,
}

impl ExtCtx {
    pub(crate) fn new(prec: Precision) -> Self {
        ExtCtx {
            p: prec.bits as usize,
            cc: Consts::new().expect("allocating astro-float constants cache"),
        }
    }

    pub(crate) fn num(&self, x: f64) -> Ext {
        if x.is_subnormal() {
            let scaled = BigFloat::from_f64(x * 2f64.powi(128), self.p);
            let unit = BigFloat::from_f64(2f64.powi(128), self.p);
            return Ext(scaled.div(&unit, self.p, RM));
        }
        Ext(BigFloat::from_f64(x, self.p))
    }

    pub(crate) fn int(&self, i: i64) -> Ext {
        Ext(BigFloat::from_i64(i, self.p))
    }

    pub(crate) fn uint(&self, i: u128) -> Ext {
        Ext(BigFloat::from_u128(i, self.p))
    }

    pub(crate) fn zero(&self) -> Ext {
        self.int(0)
    }

    pub(crate) fn one(&self) -> Ext {
        self.int(1)
    }

    pub(crate) fn exp(&mut self, x: &Ext) -> Ext {
        Ext(x.0.exp(self.p, RM, &mut self.cc))
    }

    /// `C(n, k)` converted from its exact integer value.
    pub(crate) fn binom(&self, n: u32, k: u32) -> Result<Ext> {
        Ok(self.uint(binomial(n, k)?))
    }

    /// `n!` as an extended float (exact while it fits the mantissa).
    pub(crate) fn factorial(&self, n: u32) -> Ext {
        let mut acc = self.one();
        for k in 2..=n {
            acc = &acc * &self.int(k as i64);
        }
        acc
    }
}

/// Exact binomial coefficient. Supported for `n <= 64`, which keeps every
/// intermediate product inside `u128`.
pub fn binomial(n: u32, k: u32) -> Result<u128> {
    if n > 64 {
        return Err(domain(format!(
            "exact binomial coefficients are limited to n <= 64, got n = {n}"
        )));
    }
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut c: u128 = 1;
    for j in 1..=k {
        // c * (n - k + j) is divisible by j because the result is C(n-k+j, j)
        c = c * (n - k + j) / j;
    }
    Ok(c)
}

/// Extended-precision float. Arithmetic runs at the larger of the operand
/// precisions, rounding to nearest even.
#[derive(Clone)]
pub(crate) struct Ext(BigFloat);

impl Ext {
    fn prec(&self, other: &Ext) -> usize {
        self.bits_or_min().max(other.bits_or_min())
    }

    // exact zeros report no precision
    fn bits_or_min(&self) -> usize {
        self.0.precision().unwrap_or(64).max(64)
    }

    pub(crate) fn powi(&self, n: usize) -> Ext {
        let p = self.bits_or_min();
        if n == 0 {
            return Ext(BigFloat::from_i64(1, p));
        }
        if self.0.is_zero() {
            return Ext(BigFloat::from_i64(0, p));
        }
        Ext(self.0.powi(n, p, RM))
    }

    pub(crate) fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub(crate) fn abs(&self) -> Ext {
        Ext(self.0.abs())
    }

    /// Nearest `f64` (the mantissa is rounded from its leading 64 bits).
    pub(crate) fn to_f64(&self) -> f64 {
        let x = &self.0;
        if x.is_nan() {
            return f64::NAN;
        }
        if x.is_inf_pos() {
            return f64::INFINITY;
        }
        if x.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if x.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, exponent, _)) = x.as_raw_parts() else {
            return f64::NAN;
        };
        let top = *words.last().expect("normalized mantissa has at least one word");
        let lower_nonzero = words[..words.len() - 1].iter().any(|&w| w != 0);
        // value = (top / 2^64) * 2^exponent, top has its MSB set
        let e = exponent as i64 - 1;
        if e > 1023 {
            return if sign == Sign::Neg { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        let keep = if e >= -1022 { 53 } else { 53 - (-1022 - e) };
        if keep < 0 {
            return 0.0;
        }
        // round top to `keep` bits, ties to even, with lower words as sticky
        let drop = 64 - keep as u32;
        let (mut mant, rem, half) = if drop == 64 {
            (0u64, top, 1u64 << 63)
        } else {
            (top >> drop, top & ((1u64 << drop) - 1), 1u64 << (drop - 1))
        };
        let above_half = rem > half || (rem == half && lower_nonzero);
        if above_half || (rem == half && !lower_nonzero && mant & 1 == 1) {
            mant += 1;
        }
        let mut v = mant as f64;
        let mut shift = e - keep + 1;
        while shift > 0 {
            let step = shift.min(1000);
            v *= 2f64.powi(step as i32);
            shift -= step;
        }
        while shift < 0 {
            let step = (-shift).min(1000);
            v *= 2f64.powi(-(step as i32));
            shift += step;
        }
        match sign {
            Sign::Neg => -v,
            Sign::Pos => v,
        }
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialEq for Ext {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! ext_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Ext> for &Ext {
            type Output = Ext;
            fn $method(self, rhs: &Ext) -> Ext {
                let p = self.prec(rhs);
                Ext(self.0.$method(&rhs.0, p, RM))
            }
        }
        impl $trait<Ext> for Ext {
            type Output = Ext;
            fn $method(self, rhs: Ext) -> Ext {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Ext> for Ext {
            type Output = Ext;
            fn $method(self, rhs: &Ext) -> Ext {
                (&self).$method(rhs)
            }
        }
        impl $trait<Ext> for &Ext {
            type Output = Ext;
            fn $method(self, rhs: Ext) -> Ext {
                self.$method(&rhs)
            }
        }
    };
}

ext_binop!(Add, add);
ext_binop!(Sub, sub);
ext_binop!(Mul, mul);
ext_binop!(Div, div);

impl Neg for &Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext((&self.0).neg())
    }
}

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(self.0.neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2).unwrap(), 10);
        assert_eq!(binomial(20, 10).unwrap(), 184_756);
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
        assert_eq!(binomial(3, 4).unwrap(), 0);
        assert!(binomial(65, 3).is_err());
    }

    #[test]
    fn binomial_row_sums_to_power_of_two() {
        for n in 0..=64u32 {
            let s: u128 = (0..=n).map(|k| binomial(n, k).unwrap()).sum();
            assert_eq!(s, 1u128 << n);
        }
    }

    #[test]
    fn round_trip_f64() {
        let ctx = ExtCtx::new(Precision::DEFAULT);
        for v in [1.0, -2.5, 0.1, 1e-300, 6.02e23, 1.7e308] {
            assert_eq!(ctx.num(v).to_f64(), v);
        }
        assert_eq!(ctx.num(5e-324).to_f64(), 5e-324);
        assert_eq!(ctx.num(-3e-310).to_f64(), -3e-310);
        let tiny = ctx.num(2f64.powi(-1000)) / ctx.num(2f64.powi(74));
        assert_eq!(tiny.to_f64(), 5e-324);
        let third = ctx.one() / ctx.int(3);
        let sub = &third * &(ctx.num(2f64.powi(-1000)) / ctx.num(2f64.powi(60)));
        assert_eq!(sub.to_f64(), 2f64.powi(-1060) / 3.0);
    }

    #[test]
    fn exp_matches_std() {
        let mut ctx = ExtCtx::new(Precision::DEFAULT);
        for v in [-3.0, -0.5, 0.0, 0.25, 10.0] {
            let e = ctx.exp(&ctx.num(v)).to_f64();
            assert!((e - f64::exp(v)).abs() <= 2.0 * f64::EPSILON * f64::exp(v));
        }
    }

    #[test]
    fn one_third_is_exact_to_many_digits() {
        let ctx = ExtCtx::new(Precision::DEFAULT);
        let third = ctx.one() / ctx.int(3);
        let back = &third * &ctx.int(3) - ctx.one();
        assert!(back.abs() < ctx.num(1e-55));
    }

    #[test]
    fn precision_bounds() {
        assert!(Precision::bits(32).is_err());
        assert_eq!(Precision::bits(256).unwrap().get(), 256);
        assert!(Precision::DEFAULT.get() >= 160);
    }
}
