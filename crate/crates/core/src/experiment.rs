//! Sweep experiments: `key = value` configuration, built-in figure recipes,
//! and CSV/SVG output.
//!
//! Every sweep point evaluates all requested schemes on the same channel
//! realizations, so rows that share an axis value are directly comparable.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analytics::{Analytics, Regime};
use crate::config::{db_to_linear, SystemConfig};
use crate::error::{config, Error, Result};
use crate::montecarlo::{point_seed, Axis, Estimator, Metric, OutageEstimate, Probe, DEFAULT_ATTEMPT_CAP};
use crate::protocol::{Scheme, SicOrder};
use crate::quadrature::pi_t1_ol;

/// CSV header written by [`run`].
pub const CSV_HEADER: [&str; 9] =
    ["axis_value", "scheme", "metric", "mc_estimate", "mc_stderr", "analytic_exact", "analytic_asymptotic", "trials", "seed"];

/// Kind of event recorded by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// Outage of the grant-based user.
    U0,
    /// Rate-adaptive outage of each listed grant-free user.
    GfOutage,
    /// Fixed-rate (`L / B0`) outage of each listed grant-free user.
    GfBits,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::U0 => "u0",
            MetricKind::GfOutage => "gf_outage",
            MetricKind::GfBits => "gf_bits",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "u0" => Ok(MetricKind::U0),
            "gf_outage" => Ok(MetricKind::GfOutage),
            "gf_bits" => Ok(MetricKind::GfBits),
            other => Err(config(format!("unknown metric '{other}' (expected u0, gf_outage or gf_bits)"))),
        }
    }
}

/// A complete sweep description. SNRs are kept in dB exactly as written.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: String,
    pub m: usize,
    pub p0_db: f64,
    pub pbar_db: f64,
    pub tau: f64,
    pub r0: f64,
    pub ri: f64,
    pub payload_bits: f64,
    pub block_uses: f64,
    pub schemes: Vec<Scheme>,
    pub metric: MetricKind,
    /// Grant-free user indices (1-based, ascending gain) for `gf_*` metrics.
    pub users: Vec<usize>,
    /// Conditioning count `N` for `gf_*` metrics; grant-free schemes use `M`.
    pub given: Option<usize>,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Set `tau = 1 / P0` at every point.
    pub tau_inverse_p0: bool,
    /// Set `Pbar = P0` at every point.
    pub pbar_equals_p0: bool,
}

/// Default sweep grid, in dB.
pub fn default_grid() -> Vec<f64> {
    (0..=8).map(|k| 5.0 * k as f64).collect()
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let sys = SystemConfig::default();
        ExperimentSpec {
            scenario: "custom".into(),
            m: sys.m,
            p0_db: 20.0,
            pbar_db: 0.0,
            tau: sys.tau,
            r0: sys.r0,
            ri: sys.ri,
            payload_bits: sys.payload_bits,
            block_uses: sys.block_uses,
            schemes: vec![Scheme::T1Ol],
            metric: MetricKind::U0,
            users: Vec::new(),
            given: None,
            axis: Axis::P0Db,
            values: default_grid(),
            trials: 1_000_000,
            seed: 1,
            out: None,
            svg: None,
            workers: None,
            tau_inverse_p0: false,
            pbar_equals_p0: false,
        }
    }
}

/// Recognized configuration keys, in serialization order.
pub const KEYS: [&str; 22] = [
    "scenario",
    "M",
    "P0_dB",
    "Pbar_dB",
    "tau",
    "R0",
    "Ri",
    "L",
    "B0_uses",
    "schemes",
    "metric",
    "users",
    "given",
    "axis",
    "values",
    "trials",
    "seed",
    "out",
    "svg",
    "workers",
    "tau_inverse_p0",
    "pbar_equals_p0",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| config(format!("invalid value '{value}' for key '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_num(key, s)).collect()
}

/// `a:step:b` (inclusive) or a comma-separated list.
fn parse_values(key: &str, value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 {
        return parse_list(key, value);
    }
    let (a, step, b): (f64, f64, f64) = (parse_num(key, parts[0])?, parse_num(key, parts[1])?, parse_num(key, parts[2])?);
    if !(step > 0.0 && a.is_finite() && b.is_finite() && b >= a) {
        return Err(config(format!("invalid range '{value}' for key '{key}' (expected start:step:stop)")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| a + step * k as f64).collect())
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(config(format!("invalid value '{other}' for key '{key}' (expected true or false)"))),
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentSpec {
    /// Parses `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            spec.set(key, value.trim())?;
        }
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read config file '{}': {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key; used for both config files and `--key value` overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn opt(v: &str) -> Option<&str> {
            if v.is_empty() { None } else { Some(v) }
        }
        match key {
            "scenario" => self.scenario = value.to_string(),
            "M" => self.m = parse_num(key, value)?,
            "P0_dB" => self.p0_db = parse_num(key, value)?,
            "Pbar_dB" => self.pbar_db = parse_num(key, value)?,
            "tau" => self.tau = parse_num(key, value)?,
            "R0" => self.r0 = parse_num(key, value)?,
            "Ri" => self.ri = parse_num(key, value)?,
            "L" => self.payload_bits = parse_num(key, value)?,
            "B0_uses" => self.block_uses = parse_num(key, value)?,
            "schemes" => self.schemes = parse_list(key, value)?,
            "metric" => self.metric = value.parse()?,
            "users" => self.users = parse_list(key, value)?,
            "given" => self.given = opt(value).map(|v| parse_num(key, v)).transpose()?,
            "axis" => self.axis = value.parse()?,
            "values" => self.values = parse_values(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = opt(value).map(PathBuf::from),
            "svg" => self.svg = opt(value).map(PathBuf::from),
            "workers" => self.workers = opt(value).map(|v| parse_num(key, v)).transpose()?,
            "tau_inverse_p0" => self.tau_inverse_p0 = parse_bool(key, value)?,
            "pbar_equals_p0" => self.pbar_equals_p0 = parse_bool(key, value)?,
            _ => return Err(config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Serializes every key; [`ExperimentSpec::parse`] inverts it exactly.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        for key in KEYS {
            let value = match key {
                "scenario" => self.scenario.clone(),
                "M" => self.m.to_string(),
                "P0_dB" => self.p0_db.to_string(),
                "Pbar_dB" => self.pbar_db.to_string(),
                "tau" => self.tau.to_string(),
                "R0" => self.r0.to_string(),
                "Ri" => self.ri.to_string(),
                "L" => self.payload_bits.to_string(),
                "B0_uses" => self.block_uses.to_string(),
                "schemes" => join(&self.schemes),
                "metric" => self.metric.to_string(),
                "users" => join(&self.users),
                "given" => opt(self.given),
                "axis" => self.axis.to_string(),
                "values" => join(&self.values),
                "trials" => self.trials.to_string(),
                "seed" => self.seed.to_string(),
                "out" => path(&self.out),
                "svg" => path(&self.svg),
                "workers" => opt(self.workers),
                "tau_inverse_p0" => self.tau_inverse_p0.to_string(),
                "pbar_equals_p0" => self.pbar_equals_p0.to_string(),
                _ => unreachable!(),
            };
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }

    /// Scenario at sweep point `index`.
    pub fn point_config(&self, index: usize) -> Result<SystemConfig> {
        let value = *self
            .values
            .get(index)
            .ok_or_else(|| config(format!("sweep point {index} out of range")))?;
        let base = SystemConfig {
            m: self.m,
            p0: db_to_linear(self.p0_db),
            pbar: db_to_linear(self.pbar_db),
            tau: self.tau,
            r0: self.r0,
            ri: self.ri,
            payload_bits: self.payload_bits,
            block_uses: self.block_uses,
        };
        let mut cfg = self.axis.apply(&base, value)?;
        if self.tau_inverse_p0 {
            cfg.tau = 1.0 / cfg.p0;
        }
        if self.pbar_equals_p0 {
            cfg.pbar = cfg.p0;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Probes evaluated at every point, in output order.
    pub fn probes(&self) -> Vec<Probe> {
        let mut probes = Vec::new();
        for &scheme in &self.schemes {
            if self.metric == MetricKind::U0 {
                probes.push(Probe::new(scheme, Metric::U0Outage));
                continue;
            }
            let given = match scheme {
                Scheme::GrantFree(_) => self.m,
                _ => self.given.unwrap_or(0),
            };
            for &user in &self.users {
                let metric = match self.metric {
                    MetricKind::GfBits => Metric::GfUserBits { user, given },
                    _ => Metric::GfUserOutage { user, given },
                };
                probes.push(Probe::new(scheme, metric));
            }
        }
        probes
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario.is_empty() || self.scenario.contains(['\n', '#', '=']) {
            return Err(config(format!("invalid scenario id '{}'", self.scenario)));
        }
        if self.trials == 0 {
            return Err(config("trials must be at least 1"));
        }
        if self.values.is_empty() {
            return Err(config("values must list at least one axis value"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(config(format!("axis value {v} is not finite")));
        }
        if self.schemes.is_empty() {
            return Err(config("schemes must list at least one scheme"));
        }
        let mut seen = HashSet::new();
        if let Some(s) = self.schemes.iter().find(|s| !seen.insert(**s)) {
            return Err(config(format!("scheme {s} listed twice")));
        }
        if self.workers == Some(0) {
            return Err(config("workers must be at least 1"));
        }
        if self.tau_inverse_p0 && self.axis == Axis::Tau {
            return Err(config("tau_inverse_p0 cannot be combined with a tau sweep"));
        }
        if self.pbar_equals_p0 && self.axis == Axis::PbarDb {
            return Err(config("pbar_equals_p0 cannot be combined with a Pbar_dB sweep"));
        }
        if self.metric != MetricKind::U0 {
            if self.users.is_empty() {
                return Err(config(format!("metric {} needs a users list", self.metric)));
            }
            let needs_given = self.schemes.iter().any(|s| !matches!(s, Scheme::GrantFree(_)));
            if needs_given && self.given.is_none() {
                return Err(config(format!("metric {} needs the conditioning count 'given'", self.metric)));
            }
        }
        let probes = self.probes();
        for index in 0..self.values.len() {
            let cfg = self.point_config(index)?;
            for probe in &probes {
                probe.validate(cfg.m).map_err(|e| config(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Output path: `out` if set, else `<scenario>.csv`.
    pub fn csv_path(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.scenario)))
    }
}

/// Built-in recipe ids with one-line descriptions.
pub const RECIPES: [(&str, &str); 9] = [
    ("fig1a", "Type I open loop, U0 outage vs P0 with tau = 1/P0 (M=20, Pbar=0 dB)"),
    ("fig1b", "Type I open loop, U0 outage vs P0 with tau = 0.1 (M=20, Pbar=20 dB)"),
    ("fig2", "Type I open loop, grant-free user outage vs Pbar (N=5, tau=0.5, L/B0=0.6)"),
    ("fig3", "Type I open loop vs DCC, U0 outage vs P0 (tau=1, Pbar=0 dB, M=20)"),
    ("fig4", "Type I DCC, scheduled user outage vs P0=Pbar (N=5, tau=0.5)"),
    ("fig5a", "Type II open loop, grant-free user outage vs Pbar (P0=20 dB, N=5, M=10, tau=1)"),
    ("fig5b", "Type II open loop, U0 outage vs Pbar (P0=20 dB, M=10, tau=1)"),
    ("fig6", "Type II open loop vs DCC, U0 outage vs Pbar (tau=1, M=20, P0=20 dB)"),
    ("fig7", "Type II DCC, scheduled user outage vs Pbar (P0=30 dB, N=5, tau=1)"),
];

/// The [`ExperimentSpec`] of a built-in recipe.
pub fn recipe(id: &str) -> Result<ExperimentSpec> {
    let base = ExperimentSpec { scenario: id.to_string(), r0: 1.0, ri: 0.5, payload_bits: 60.0, block_uses: 100.0, ..Default::default() };
    let t1 = [Scheme::T1Ol, Scheme::GrantBased, Scheme::GrantFree(SicOrder::U0First)];
    let spec = match id {
        "fig1a" => ExperimentSpec { m: 20, pbar_db: 0.0, tau_inverse_p0: true, schemes: t1.to_vec(), ..base },
        "fig1b" => ExperimentSpec { m: 20, pbar_db: 20.0, tau: 0.1, schemes: t1.to_vec(), ..base },
        "fig2" => ExperimentSpec {
            m: 12,
            tau: 0.5,
            schemes: vec![Scheme::T1Ol],
            metric: MetricKind::GfOutage,
            users: (1..=5).collect(),
            given: Some(5),
            axis: Axis::PbarDb,
            ..base
        },
        "fig3" => ExperimentSpec {
            m: 20,
            pbar_db: 0.0,
            tau: 1.0,
            schemes: vec![Scheme::T1Ol, Scheme::T1Dcc, Scheme::GrantBased, Scheme::GrantFree(SicOrder::U0First)],
            ..base
        },
        "fig4" => ExperimentSpec {
            m: 12,
            tau: 0.5,
            pbar_equals_p0: true,
            schemes: vec![Scheme::T1Dcc],
            metric: MetricKind::GfOutage,
            users: vec![1],
            given: Some(5),
            ..base
        },
        "fig5a" => ExperimentSpec {
            m: 10,
            p0_db: 20.0,
            tau: 1.0,
            schemes: vec![Scheme::T2Ol],
            metric: MetricKind::GfOutage,
            users: (1..=5).collect(),
            given: Some(5),
            axis: Axis::PbarDb,
            ..base
        },
        "fig5b" => ExperimentSpec {
            m: 10,
            p0_db: 20.0,
            tau: 1.0,
            schemes: vec![Scheme::T2Ol, Scheme::GrantBased, Scheme::GrantFree(SicOrder::U0Last)],
            axis: Axis::PbarDb,
            ..base
        },
        "fig6" => ExperimentSpec {
            m: 20,
            p0_db: 20.0,
            tau: 1.0,
            schemes: vec![Scheme::T2Ol, Scheme::T2Dcc, Scheme::GrantBased, Scheme::GrantFree(SicOrder::U0Last)],
            axis: Axis::PbarDb,
            ..base
        },
        "fig7" => ExperimentSpec {
            m: 13,
            p0_db: 30.0,
            tau: 1.0,
            schemes: vec![Scheme::T2Dcc],
            metric: MetricKind::GfOutage,
            users: vec![1],
            given: Some(5),
            axis: Axis::PbarDb,
            ..base
        },
        _ => {
            let ids: Vec<&str> = RECIPES.iter().map(|r| r.0).collect();
            return Err(config(format!("unknown recipe '{id}' (available: {})", ids.join(", "))));
        }
    };
    Ok(spec)
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis_value: f64,
    pub scheme: Scheme,
    pub metric: Metric,
    pub mc: OutageEstimate,
    pub analytic_exact: Option<f64>,
    pub analytic_asymptotic: Option<f64>,
}

/// Closed-form companions of a probe: `(exact, asymptotic or limit)`.
pub fn analytic_pair(spec: &ExperimentSpec, cfg: &SystemConfig, probe: &Probe) -> (Option<f64>, Option<f64>) {
    let an = Analytics::default();
    let ok = |r: Result<crate::analytics::AnalyticValue>| match r {
        Ok(v) => Some(v.value),
        Err(e) => {
            log::warn!("{} {}: analytic value unavailable: {e}", probe.scheme, probe.metric);
            None
        }
    };
    let regime = if spec.tau_inverse_p0 { Regime::TauScaled } else { Regime::TauFixed };
    match (probe.metric, probe.scheme) {
        (Metric::U0Outage, Scheme::T1Ol) => (ok(an.p0_t1_ol_exact(cfg)), ok(an.p0_t1_ol_asym(cfg, regime))),
        (Metric::U0Outage, Scheme::T1Dcc) => (ok(an.p0_t1_dcc_exact(cfg)), ok(an.p0_t1_dcc_asym(cfg))),
        (Metric::U0Outage, Scheme::T2Ol) => (ok(an.p0_t2_ol_exact(cfg)), ok(an.p0_t2_ol_asym(cfg))),
        (Metric::U0Outage, Scheme::T2Dcc) => (ok(an.p0_t2_dcc_exact(cfg)), None),
        (Metric::U0Outage, Scheme::GrantBased) => (ok(an.p0_grant_based(cfg)), None),
        (Metric::U0Outage, Scheme::GrantFree(SicOrder::U0First)) => (ok(an.p0_grant_free_t1(cfg)), None),
        (Metric::U0Outage, Scheme::GrantFree(SicOrder::U0Last)) => (ok(an.p0_grant_free_t2(cfg)), None),
        (Metric::GfUserOutage { user, given }, Scheme::T1Ol) => (ok(pi_t1_ol(user, given, cfg)), None),
        (Metric::GfUserOutage { given, .. }, Scheme::T1Dcc) => {
            (ok(an.p1_t1_dcc_exact(given, cfg)), ok(an.p1_t1_dcc_floor(given, cfg)))
        }
        (Metric::GfUserOutage { given, .. }, Scheme::T2Dcc) => (ok(an.pn_t2_dcc_exact(given, cfg)), None),
        _ => (None, None),
    }
}

/// Runs the sweep and returns the rows without writing anything.
pub fn evaluate(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let estimator = Estimator { workers: spec.workers, attempt_cap: DEFAULT_ATTEMPT_CAP };
    let probes = spec.probes();
    let mut rows = Vec::with_capacity(spec.values.len() * probes.len());
    for (index, &axis_value) in spec.values.iter().enumerate() {
        let cfg = spec.point_config(index)?;
        let estimates = estimator.estimate_many(&cfg, &probes, spec.trials, point_seed(spec.seed, index))?;
        for (probe, mc) in probes.iter().zip(estimates) {
            let (analytic_exact, analytic_asymptotic) = analytic_pair(spec, &cfg, probe);
            rows.push(Row { axis_value, scheme: probe.scheme, metric: probe.metric, mc, analytic_exact, analytic_asymptotic });
        }
        log::info!("{}: point {}/{} done", spec.scenario, index + 1, spec.values.len());
    }
    Ok(rows)
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV text of `rows` (header included, LF line endings).
pub fn to_csv(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.axis_value.to_string(),
            r.scheme.to_string(),
            r.metric.to_string(),
            r.mc.p_hat.to_string(),
            r.mc.stderr.to_string(),
            cell(r.analytic_exact),
            cell(r.analytic_asymptotic),
            r.mc.trials.to_string(),
            r.mc.master_seed.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Minimal SVG line chart of the Monte Carlo estimates on a log scale.
pub fn to_svg(spec: &ExperimentSpec, rows: &[Row]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    const FLOOR: f64 = 1e-6;
    const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

    let (x_lo, x_hi) = spec.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let lo_dec = rows.iter().map(|r| r.mc.p_hat.max(FLOOR).log10().floor()).fold(0.0, f64::min).min(-1.0);
    let x = |v: f64| PAD + (v - x_lo) / span * (W - 2.0 * PAD);
    let y = |p: f64| PAD + p.max(FLOOR).log10() / lo_dec * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, spec.scenario);
    let _ = writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * PAD, H - 2.0 * PAD);
    for d in 0..=(-lo_dec as i32) {
        let yy = y(10f64.powi(-d));
        let _ = writeln!(s, r#"<line x1="{PAD}" y1="{yy}" x2="{}" y2="{yy}" stroke="lightgray"/>"#, W - PAD);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">1e-{d}</text>"#, PAD - 4.0, yy + 4.0);
    }
    for &v in &spec.values {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{v}</text>"#, x(v), H - PAD + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, spec.axis);

    let mut series: Vec<(Scheme, Metric)> = Vec::new();
    for r in rows {
        if !series.contains(&(r.scheme, r.metric)) {
            series.push((r.scheme, r.metric));
        }
    }
    for (k, (scheme, metric)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r.scheme == *scheme && r.metric == *metric)
            .map(|r| format!("{:.2},{:.2}", x(r.axis_value), y(r.mc.p_hat)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let ly = PAD + 14.0 + 14.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{scheme} {metric}</text>"#, PAD + 8.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Files produced by [`run`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub rows: Vec<Row>,
}

/// Runs the sweep and writes the CSV (and SVG if requested). Nothing is
/// written unless every point succeeds.
pub fn run(spec: &ExperimentSpec) -> Result<RunReport> {
    let rows = evaluate(spec)?;
    let csv_path = spec.csv_path();
    let csv = to_csv(&rows)?;
    let svg = spec.svg.as_ref().map(|p| (p.clone(), to_svg(spec, &rows)));
    write_atomic(&csv_path, &csv)?;
    if let Some((path, text)) = &svg {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(RunReport { csv: csv_path, svg: svg.map(|s| s.0), rows })
}
