//! Reproducible parallel Monte Carlo estimation of outage probabilities.
//!
//! Trial `t` draws from its own ChaCha8 stream (`set_stream(t)` on a
//! generator seeded with the master seed), so the estimate does not depend on
//! how trials are split across workers. Probes that share a conditioning event
//! are evaluated on the same realizations (common random numbers).

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytics::{prob_n_above, prob_n_below};
use crate::channel::ChannelRealization;
use crate::config::{db_to_linear, SystemConfig};
use crate::error::{config, usage, Error, Result};
use crate::protocol::{FastEval, Scheme};

/// Rejection attempts allowed per estimate before giving up.
pub const DEFAULT_ATTEMPT_CAP: u64 = 1_000_000_000;

const CHUNK: u64 = 1 << 14;

/// Event whose probability is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Outage of the grant-based user.
    U0Outage,
    /// Outage of admitted user `user` (1-based, ascending gain) with its
    /// rate adapted to the realization, given exactly `given` eligible users.
    GfUserOutage { user: usize, given: usize },
    /// As `GfUserOutage` but with every admitted user sending at exactly
    /// `L / B0`: a failed SIC stage also takes down the weaker users.
    GfUserBits { user: usize, given: usize },
}

impl Metric {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::U0Outage => f.write_str("u0"),
            Metric::GfUserOutage { user, given } => write!(f, "gf_outage:i={user}:N={given}"),
            Metric::GfUserBits { user, given } => write!(f, "gf_bits:i={user}:N={given}"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "u0" {
            return Ok(Metric::U0Outage);
        }
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let (mut user, mut given) = (None, None);
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(|| config(format!("malformed metric '{s}'")))?;
            let v: usize = v.parse().map_err(|_| config(format!("bad number in metric '{s}'")))?;
            match k {
                "i" => user = Some(v),
                "N" => given = Some(v),
                _ => return Err(config(format!("unknown metric field '{k}' in '{s}'"))),
            }
        }
        let (Some(user), Some(given)) = (user, given) else {
            return Err(config(format!("metric '{s}' needs both i= and N=")));
        };
        match kind {
            "gf_outage" => Ok(Metric::GfUserOutage { user, given }),
            "gf_bits" => Ok(Metric::GfUserBits { user, given }),
            _ => Err(config(format!("unknown metric '{s}' (expected u0, gf_outage:i=..:N=.. or gf_bits:i=..:N=..)"))),
        }
    }
}

/// A scheme and the event measured on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Probe {
    pub scheme: Scheme,
    pub metric: Metric,
}

impl Probe {
    pub fn new(scheme: Scheme, metric: Metric) -> Self {
        Probe { scheme, metric }
    }

    /// Checks that the metric is defined for the scheme with `m` users.
    pub fn validate(&self, m: usize) -> Result<()> {
        condition_for(self, m).map(|_| ())
    }
}

/// Conditioning event on the number of eligible users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Condition {
    None,
    Below(usize),
    Above(usize),
}

fn condition_for(probe: &Probe, m: usize) -> Result<Condition> {
    let (user, given) = match probe.metric {
        Metric::U0Outage => return Ok(Condition::None),
        Metric::GfUserOutage { user, given } | Metric::GfUserBits { user, given } => (user, given),
    };
    let bad = |msg: String| Err(usage(format!("{} with {}: {msg}", probe.metric, probe.scheme)));
    if given == 0 || given > m {
        return bad(format!("N must lie in 1..={m}"));
    }
    if user == 0 || user > given {
        return bad(format!("user index must lie in 1..={given}"));
    }
    if matches!(probe.metric, Metric::GfUserBits { .. }) && probe.scheme.is_dcc() {
        return bad("fixed-rate SIC chains need open-loop or grant-free admission".into());
    }
    match probe.scheme {
        Scheme::GrantBased => bad("the grant-based scheme admits no grant-free user".into()),
        Scheme::GrantFree(_) if given != m => bad(format!("grant-free admission always has N = M = {m}")),
        Scheme::GrantFree(_) => Ok(Condition::None),
        Scheme::T1Dcc | Scheme::T2Dcc if user != 1 => bad("DCC schedules a single user (i = 1)".into()),
        Scheme::T1Ol | Scheme::T1Dcc => Ok(Condition::Below(given)),
        Scheme::T2Ol | Scheme::T2Dcc => Ok(Condition::Above(given)),
    }
}

/// Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl OutageEstimate {
    fn from_count(hits: u64, trials: u64, seed: u64) -> Self {
        let p = hits as f64 / trials as f64;
        OutageEstimate { p_hat: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials, master_seed: seed }
    }
}

/// Estimation harness with a fixed worker count.
#[derive(Debug, Clone, Copy)]
pub struct Estimator {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub attempt_cap: u64,
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator { workers: None, attempt_cap: DEFAULT_ATTEMPT_CAP }
    }
}

struct Group {
    cond: Condition,
    members: Vec<(usize, Probe)>,
}

impl Estimator {
    pub fn with_workers(workers: usize) -> Self {
        Estimator { workers: Some(workers.max(1)), ..Default::default() }
    }

    pub fn estimate(&self, cfg: &SystemConfig, scheme: Scheme, metric: Metric, trials: u64, seed: u64) -> Result<OutageEstimate> {
        Ok(self.estimate_many(cfg, &[Probe::new(scheme, metric)], trials, seed)?[0])
    }

    /// Estimates every probe from `trials` realizations each. Probes with the
    /// same conditioning event see identical realizations.
    pub fn estimate_many(&self, cfg: &SystemConfig, probes: &[Probe], trials: u64, seed: u64) -> Result<Vec<OutageEstimate>> {
        cfg.validate()?;
        if trials == 0 {
            return Err(usage("trials must be positive"));
        }
        if trials < 1000 {
            log::warn!("only {trials} trials requested; estimates will be coarse");
        }
        let mut groups: Vec<Group> = Vec::new();
        for (k, probe) in probes.iter().enumerate() {
            let cond = condition_for(probe, cfg.m)?;
            match groups.iter_mut().find(|g| g.cond == cond) {
                Some(g) => g.members.push((k, *probe)),
                None => groups.push(Group { cond, members: vec![(k, *probe)] }),
            }
        }
        let mut out = vec![None; probes.len()];
        for group in &groups {
            let hits = self.run_group(cfg, group, trials, seed)?;
            for ((k, _), h) in group.members.iter().zip(hits) {
                out[*k] = Some(OutageEstimate::from_count(h, trials, seed));
            }
        }
        Ok(out.into_iter().map(|e| e.expect("every probe belongs to a group")).collect())
    }

    fn run_group(&self, cfg: &SystemConfig, group: &Group, trials: u64, seed: u64) -> Result<Vec<u64>> {
        self.precheck(cfg, group.cond, trials)?;
        let fast = FastEval::new(cfg);
        let attempts = AtomicU64::new(0);
        let chunks = trials.div_ceil(CHUNK);
        let run = || -> Vec<Result<Vec<u64>>> {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let lo = c * CHUNK;
                    let hi = ((c + 1) * CHUNK).min(trials);
                    self.run_chunk(cfg, &fast, group, lo..hi, seed, &attempts)
                })
                .collect()
        };
        let parts = match self.workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| usage(format!("cannot start {w} workers: {e}")))?
                .install(run),
            None => run(),
        };
        let mut totals = vec![0u64; group.members.len()];
        for part in parts {
            for (t, h) in totals.iter_mut().zip(part?) {
                *t += h;
            }
        }
        Ok(totals)
    }

    fn precheck(&self, cfg: &SystemConfig, cond: Condition, trials: u64) -> Result<()> {
        let p = match cond {
            Condition::None => return Ok(()),
            Condition::Below(n) if cfg.m <= 64 => prob_n_below(n, cfg.m, cfg.tau)?,
            Condition::Above(n) if cfg.m <= 64 => prob_n_above(n, cfg.m, cfg.tau)?,
            _ => return Ok(()),
        };
        let expected = trials as f64 / p;
        if !(expected <= self.attempt_cap as f64) {
            return Err(Error::SamplingCap {
                attempts: self.attempt_cap,
                trials,
                event: format!("{} (probability {p:.3e}, about {expected:.3e} draws needed)", describe(cond)),
            });
        }
        Ok(())
    }

    fn run_chunk(
        &self,
        cfg: &SystemConfig,
        fast: &FastEval,
        group: &Group,
        range: std::ops::Range<u64>,
        seed: u64,
        attempts: &AtomicU64,
    ) -> Result<Vec<u64>> {
        let base = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = vec![0u64; group.members.len()];
        let mut real = ChannelRealization::new(0.0, vec![0.0; cfg.m])?;
        let mut sorted = vec![0.0; cfg.m];
        let mut pending = 0u64;
        let tau = cfg.tau;
        for t in range.clone() {
            let mut rng = base.clone();
            rng.set_stream(t);
            loop {
                real.resample(&mut rng);
                sorted.copy_from_slice(real.gains());
                sorted.sort_unstable_by(f64::total_cmp);
                let accepted = match group.cond {
                    Condition::None => true,
                    Condition::Below(n) => sorted.partition_point(|&g| g < tau) == n,
                    Condition::Above(n) => cfg.m - sorted.partition_point(|&g| g <= tau) == n,
                };
                if accepted {
                    break;
                }
                pending += 1;
                if pending >= 4096 {
                    let total = attempts.fetch_add(pending, Ordering::Relaxed) + pending;
                    pending = 0;
                    if total > self.attempt_cap {
                        return Err(Error::SamplingCap {
                            attempts: total,
                            trials: range.end,
                            event: describe(group.cond),
                        });
                    }
                }
            }
            let g0 = real.g0();
            for ((_, probe), h) in group.members.iter().zip(hits.iter_mut()) {
                let adm = &sorted[fast.admitted(&sorted, probe.scheme)];
                let fail = match probe.metric {
                    Metric::U0Outage => fast.u0_outage(g0, adm, probe.scheme),
                    Metric::GfUserOutage { user, .. } => fast.gf_outage(g0, adm, probe.scheme, user),
                    Metric::GfUserBits { user, .. } => fast.gf_fixed_rate_outage(g0, adm, probe.scheme, user),
                };
                *h += u64::from(fail);
            }
        }
        let total = attempts.fetch_add(pending, Ordering::Relaxed) + pending;
        if total > self.attempt_cap {
            return Err(Error::SamplingCap { attempts: total, trials: range.end, event: describe(group.cond) });
        }
        Ok(hits)
    }

    /// One estimate per axis value, each with its own derived seed.
    #[allow(clippy::too_many_arguments)]
    pub fn sweep(
        &self,
        template: &SystemConfig,
        axis: Axis,
        values: &[f64],
        scheme: Scheme,
        metric: Metric,
        trials: u64,
        seed: u64,
    ) -> Result<Vec<(f64, OutageEstimate)>> {
        if values.is_empty() {
            return Err(usage("sweep needs at least one axis value"));
        }
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let cfg = axis.apply(template, v)?;
                let est = self.estimate(&cfg, scheme, metric, trials, point_seed(seed, k))?;
                Ok((v, est))
            })
            .collect()
    }
}

fn describe(cond: Condition) -> String {
    match cond {
        Condition::None => "unconditioned".into(),
        Condition::Below(n) => format!("exactly {n} users below tau"),
        Condition::Above(n) => format!("exactly {n} users above tau"),
    }
}

/// Seed of sweep point `index`, derived from the master seed by SplitMix64.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    P0Db,
    PbarDb,
    Tau,
    M,
    R0,
    Ri,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::P0Db, Axis::PbarDb, Axis::Tau, Axis::M, Axis::R0, Axis::Ri];

    pub fn name(self) -> &'static str {
        match self {
            Axis::P0Db => "P0_dB",
            Axis::PbarDb => "Pbar_dB",
            Axis::Tau => "tau",
            Axis::M => "M",
            Axis::R0 => "R0",
            Axis::Ri => "Ri",
        }
    }

    /// Copy of `cfg` with this parameter set to `value` (dB for SNR axes).
    pub fn apply(self, cfg: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut c = cfg.clone();
        match self {
            Axis::P0Db => c.p0 = db_to_linear(value),
            Axis::PbarDb => c.pbar = db_to_linear(value),
            Axis::Tau => c.tau = value,
            Axis::M => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(config(format!("M must be a positive integer, got {value}")));
                }
                c.m = value as usize;
            }
            Axis::R0 => c.r0 = value,
            Axis::Ri => c.ri = value,
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| config(format!("unknown sweep axis '{s}' (expected P0_dB, Pbar_dB, tau, M, R0 or Ri)")))
    }
}

pub fn estimate(cfg: &SystemConfig, scheme: Scheme, metric: Metric, trials: u64, seed: u64) -> Result<OutageEstimate> {
    Estimator::default().estimate(cfg, scheme, metric, trials, seed)
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    template: &SystemConfig,
    axis: Axis,
    values: &[f64],
    scheme: Scheme,
    metric: Metric,
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, OutageEstimate)>> {
    Estimator::default().sweep(template, axis, values, scheme, metric, trials, seed)
}
