//! Per-realization execution of the access schemes: admission, SIC rates and
//! outage events.
//!
//! Distributed contention control is idealized: the extreme user among the
//! eligible ones is selected with certainty and at no time cost. A gain equal
//! to the threshold is never admitted (strict comparisons on both sides).
//! Outage is declared when an achieved rate falls strictly below its target;
//! comparisons are made on SINRs against `2^R - 1`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{sample_realization, ChannelRealization};
use crate::config::SystemConfig;
use crate::error::{usage, Error, Result};

/// Position of `U0` in the SIC decoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SicOrder {
    /// `U0` decoded first (Type I); weak grant-free users are preferred.
    U0First,
    /// `U0` decoded last (Type II); strong grant-free users are preferred.
    U0Last,
}

/// Access scheme applied to one resource block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Type I open loop: every user with gain below `tau` transmits.
    T1Ol,
    /// Type I DCC: the weakest user transmits if its gain is below `tau`.
    T1Dcc,
    /// Type II open loop: every user with gain above `tau` transmits.
    T2Ol,
    /// Type II DCC: the strongest user transmits if its gain exceeds `tau`.
    T2Dcc,
    /// `U0` alone on its block.
    GrantBased,
    /// All `M` users transmit, decoded with the given order.
    GrantFree(SicOrder),
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::T1Ol,
        Scheme::T1Dcc,
        Scheme::T2Ol,
        Scheme::T2Dcc,
        Scheme::GrantBased,
        Scheme::GrantFree(SicOrder::U0First),
        Scheme::GrantFree(SicOrder::U0Last),
    ];

    pub fn order(self) -> SicOrder {
        match self {
            Scheme::T1Ol | Scheme::T1Dcc | Scheme::GrantBased => SicOrder::U0First,
            Scheme::T2Ol | Scheme::T2Dcc => SicOrder::U0Last,
            Scheme::GrantFree(o) => o,
        }
    }

    pub fn is_dcc(self) -> bool {
        matches!(self, Scheme::T1Dcc | Scheme::T2Dcc)
    }

    pub fn is_open_loop(self) -> bool {
        matches!(self, Scheme::T1Ol | Scheme::T2Ol)
    }

    /// Whether a user is eligible for contention: below `tau` for Type I
    /// schemes and above it for Type II. `None` for the benchmarks.
    pub fn eligible(self, gain: f64, tau: f64) -> Option<bool> {
        match self {
            Scheme::T1Ol | Scheme::T1Dcc => Some(gain < tau),
            Scheme::T2Ol | Scheme::T2Dcc => Some(gain > tau),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::T1Ol => "t1_ol",
            Scheme::T1Dcc => "t1_dcc",
            Scheme::T2Ol => "t2_ol",
            Scheme::T2Dcc => "t2_dcc",
            Scheme::GrantBased => "grant_based",
            Scheme::GrantFree(SicOrder::U0First) => "grant_free_t1",
            Scheme::GrantFree(SicOrder::U0Last) => "grant_free_t2",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name() == s.trim())
            .ok_or_else(|| {
                let known: Vec<_> = Scheme::ALL.iter().map(|s| s.name()).collect();
                crate::error::config(format!("unknown scheme '{s}' (expected one of {})", known.join(", ")))
            })
    }
}

/// Users admitted to the block, as indices into the realization's gains in
/// ascending gain order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissionDecision {
    pub scheme: Scheme,
    pub admitted: Vec<usize>,
}

/// Indices sorted by (gain, index), so ties go to the lowest index.
fn ascending_indices(gains: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..gains.len()).collect();
    idx.sort_by(|&a, &b| gains[a].total_cmp(&gains[b]).then(a.cmp(&b)));
    idx
}

pub fn admit(cfg: &SystemConfig, realization: &ChannelRealization, scheme: Scheme) -> AdmissionDecision {
    let gains = realization.gains();
    let tau = cfg.tau;
    let order = ascending_indices(gains);
    let admitted = match scheme {
        Scheme::GrantBased => Vec::new(),
        Scheme::GrantFree(_) => order,
        Scheme::T1Ol => order.into_iter().filter(|&k| gains[k] < tau).collect(),
        Scheme::T2Ol => order.into_iter().filter(|&k| gains[k] > tau).collect(),
        Scheme::T1Dcc => order.first().copied().filter(|&k| gains[k] < tau).into_iter().collect(),
        Scheme::T2Dcc => {
            // strongest user; among equal maxima the lowest index
            let top = order.last().map(|&k| gains[k]);
            let pick = top.and_then(|g| order.iter().copied().find(|&k| gains[k] == g));
            pick.filter(|&k| gains[k] > tau).into_iter().collect()
        }
    };
    AdmissionDecision { scheme, admitted }
}

fn check_sorted(gains: &[f64]) -> Result<()> {
    if gains.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Contract(format!("admitted gains must be sorted ascending: {gains:?}")));
    }
    Ok(())
}

/// Achievable rates with `U0` decoded first: `U0` sees every admitted user as
/// interference; grant-free user `i` sees the users weaker than itself.
///
/// Returns `(u0_rate, gf_rates)` in bits per channel use.
pub fn sic_rates_type1(cfg: &SystemConfig, g0: f64, admitted_gains: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_sorted(admitted_gains)?;
    let total: f64 = admitted_gains.iter().sum();
    let u0 = (1.0 + g0 * cfg.p0 / (total * cfg.pbar + 1.0)).log2();
    let mut below = 0.0;
    let mut rates = Vec::with_capacity(admitted_gains.len());
    for &g in admitted_gains {
        rates.push((1.0 + g * cfg.pbar / (below * cfg.pbar + 1.0)).log2());
        below += g;
    }
    Ok((u0, rates))
}

/// Achievable rates with `U0` decoded last. Grant-free user `i` sees the
/// weaker admitted users plus `U0`; `U0` is interference-free once every
/// grant-free message has been removed.
pub fn sic_rates_type2(cfg: &SystemConfig, g0: f64, admitted_gains: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_sorted(admitted_gains)?;
    let u0_power = g0 * cfg.p0;
    let u0 = (1.0 + u0_power).log2();
    let mut below = 0.0;
    let mut rates = Vec::with_capacity(admitted_gains.len());
    for &g in admitted_gains {
        rates.push((1.0 + g * cfg.pbar / (below * cfg.pbar + u0_power + 1.0)).log2());
        below += g;
    }
    Ok((u0, rates))
}

/// Type II outage of `U0` under the sum-rate criterion for SIC: `U0` succeeds
/// iff its own rate meets `R0` and the admitted users' aggregate rate
/// (treating `U0` as noise) meets `n Ri`.
pub fn u0_outage_type2(cfg: &SystemConfig, g0: f64, admitted_gains: &[f64]) -> bool {
    let n = admitted_gains.len();
    let sum: f64 = admitted_gains.iter().sum();
    outage_type2(g0 * cfg.p0, cfg.pbar * sum, cfg.eps0(), cfg.eps_sum(n), n)
}

fn outage_type2(u0_power: f64, gf_power: f64, eps0: f64, eps_sum: f64, n: usize) -> bool {
    if u0_power < eps0 {
        return true;
    }
    n > 0 && gf_power / (1.0 + u0_power) < eps_sum
}

/// Result of one access attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub admission: AdmissionDecision,
    pub u0_outage: bool,
    /// Per admitted user (ascending gain), whether it missed its target.
    pub gf_outage: Vec<bool>,
    pub u0_rate: f64,
    pub gf_rates: Vec<f64>,
}

/// Evaluates one realization under `scheme`.
///
/// Grant-free users of the open-loop schemes and of the grant-free benchmark
/// adapt their rate and fail when it drops below `L / B0`. The user scheduled
/// by DCC has the fixed target `Ri`; under Type I it also fails whenever `U0`
/// cannot be decoded first.
pub fn evaluate(cfg: &SystemConfig, realization: &ChannelRealization, scheme: Scheme) -> TrialOutcome {
    let admission = admit(cfg, realization, scheme);
    let gains: Vec<f64> = admission.admitted.iter().map(|&k| realization.gains()[k]).collect();
    let g0 = realization.g0();
    let (u0_rate, gf_rates, u0_outage) = match scheme.order() {
        SicOrder::U0First => {
            let (u0, rates) = sic_rates_type1(cfg, g0, &gains).expect("admission is sorted");
            (u0, rates, u0 < cfg.r0)
        }
        SicOrder::U0Last => {
            let (u0, rates) = sic_rates_type2(cfg, g0, &gains).expect("admission is sorted");
            (u0, rates, u0_outage_type2(cfg, g0, &gains))
        }
    };
    let gf_outage = match scheme {
        Scheme::T1Dcc => gf_rates.iter().map(|&r| u0_outage || r < cfg.ri).collect(),
        Scheme::T2Dcc => gf_rates.iter().map(|&r| r < cfg.ri).collect(),
        _ => {
            let target = cfg.payload_rate();
            gf_rates.iter().map(|&r| r < target).collect()
        }
    };
    TrialOutcome { admission, u0_outage, gf_outage, u0_rate, gf_rates }
}

/// Samples a realization and evaluates it.
pub fn run_trial<R: Rng + ?Sized>(cfg: &SystemConfig, scheme: Scheme, rng: &mut R) -> Result<TrialOutcome> {
    cfg.validate()?;
    let realization = sample_realization(cfg.m, rng)?;
    Ok(evaluate(cfg, &realization, scheme))
}

/// Fixed-rate reading of the open-loop grant-free outage: every admitted user
/// transmits at exactly `L / B0`, so user `i` (1-based, ascending gain) is
/// lost if any SIC stage up to and including its own fails. Stages run from
/// the strongest admitted user down; under Type I they are preceded by `U0`.
pub fn fixed_rate_outage(outcome: &TrialOutcome, target: f64, user: usize) -> Result<bool> {
    let n = outcome.gf_rates.len();
    if user == 0 || user > n {
        return Err(usage(format!("user index {user} outside 1..={n}")));
    }
    if outcome.admission.scheme.order() == SicOrder::U0First && outcome.u0_outage {
        return Ok(true);
    }
    Ok(outcome.gf_rates[user - 1..].iter().any(|&r| r < target))
}

/// Thresholds precomputed once per configuration for the Monte Carlo inner
/// loop.
#[derive(Debug, Clone)]
pub(crate) struct FastEval {
    p0: f64,
    pbar: f64,
    tau: f64,
    eps0: f64,
    eps_i: f64,
    eps_payload: f64,
    eps_sum: Vec<f64>,
}

impl FastEval {
    pub(crate) fn new(cfg: &SystemConfig) -> Self {
        FastEval {
            p0: cfg.p0,
            pbar: cfg.pbar,
            tau: cfg.tau,
            eps0: cfg.eps0(),
            eps_i: cfg.eps_i(),
            eps_payload: cfg.eps_payload(),
            eps_sum: (0..=cfg.m).map(|n| cfg.eps_sum(n)).collect(),
        }
    }

    /// Range of `sorted` admitted by `scheme`.
    pub(crate) fn admitted(&self, sorted: &[f64], scheme: Scheme) -> std::ops::Range<usize> {
        let m = sorted.len();
        match scheme {
            Scheme::GrantBased => 0..0,
            Scheme::GrantFree(_) => 0..m,
            Scheme::T1Ol => 0..sorted.partition_point(|&g| g < self.tau),
            Scheme::T1Dcc => 0..usize::from(sorted[0] < self.tau),
            Scheme::T2Ol => sorted.partition_point(|&g| g <= self.tau)..m,
            Scheme::T2Dcc => {
                if sorted[m - 1] > self.tau {
                    m - 1..m
                } else {
                    m..m
                }
            }
        }
    }

    pub(crate) fn u0_outage(&self, g0: f64, admitted: &[f64], scheme: Scheme) -> bool {
        let sum: f64 = admitted.iter().sum();
        match scheme.order() {
            SicOrder::U0First => g0 * self.p0 < self.eps0 * (sum * self.pbar + 1.0),
            SicOrder::U0Last => {
                let n = admitted.len();
                outage_type2(g0 * self.p0, self.pbar * sum, self.eps0, self.eps_sum[n], n)
            }
        }
    }

    fn sinr(&self, g0: f64, admitted: &[f64], k: usize, order: SicOrder) -> f64 {
        let below: f64 = admitted[..k].iter().sum();
        let extra = match order {
            SicOrder::U0First => 0.0,
            SicOrder::U0Last => g0 * self.p0,
        };
        admitted[k] * self.pbar / (below * self.pbar + extra + 1.0)
    }

    /// Outage of admitted user `user` (1-based ascending) with the same
    /// semantics as [`evaluate`].
    pub(crate) fn gf_outage(&self, g0: f64, admitted: &[f64], scheme: Scheme, user: usize) -> bool {
        let k = user - 1;
        let s = self.sinr(g0, admitted, k, scheme.order());
        match scheme {
            Scheme::T1Dcc => self.u0_outage(g0, admitted, scheme) || s < self.eps_i,
            Scheme::T2Dcc => s < self.eps_i,
            _ => s < self.eps_payload,
        }
    }

    /// Same semantics as [`fixed_rate_outage`].
    pub(crate) fn gf_fixed_rate_outage(&self, g0: f64, admitted: &[f64], scheme: Scheme, user: usize) -> bool {
        let order = scheme.order();
        if order == SicOrder::U0First && self.u0_outage(g0, admitted, scheme) {
            return true;
        }
        (user - 1..admitted.len()).any(|k| self.sinr(g0, admitted, k, order) < self.eps_payload)
    }
}
