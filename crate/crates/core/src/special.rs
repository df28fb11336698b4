//! Integer-order incomplete Gamma series shared by the densities and the
//! closed forms.

use crate::precision::{Ext, ExtCtx};

/// Truncated exponential series `sum_{m=0}^{n-1} z^m / m!`.
pub(crate) fn exp_series(ctx: &ExtCtx, z: &Ext, n: u32) -> Ext {
    let mut term = ctx.one();
    let mut acc = ctx.zero();
    for m in 0..n {
        if m > 0 {
            term = &term * z / ctx.int(m as i64);
        }
        acc = &acc + &term;
    }
    acc
}

/// `Gamma(n, z) / (n-1)! = e^{-z} sum_{m<n} z^m/m!`, for integer `n >= 1`.
pub(crate) fn gamma_upper_regularized(ctx: &mut ExtCtx, n: u32, z: &Ext) -> Ext {
    let series = exp_series(ctx, z, n);
    let decay = ctx.exp(&-z);
    &decay * &series
}

/// `Gamma(n, z) = (n-1)! e^{-z} sum_{m<n} z^m/m!`, for integer `n >= 1`.
pub(crate) fn gamma_upper(ctx: &mut ExtCtx, n: u32, z: &Ext) -> Ext {
    let reg = gamma_upper_regularized(ctx, n, z);
    &reg * &ctx.factorial(n - 1)
}
