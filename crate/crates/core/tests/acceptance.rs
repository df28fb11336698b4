//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::time::Instant;

use sgf_core::analytics::{self, alternating_power_sum, Regime};
use sgf_core::channel::pdf_sum_trunc_below;
use sgf_core::experiment::{self, recipe, Row, RECIPES};
use sgf_core::montecarlo::point_seed;
use sgf_core::quadrature::pi_t1_ol;
use sgf_core::{db_to_linear, Estimator, Metric, OutageEstimate, Probe, Scheme, SicOrder, SystemConfig};

const SEED: u64 = 0x5eed_2024;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome { ok: true, detail: summary }
    } else {
        Outcome { ok: false, detail: format!("{summary}; {}", failures.join("; ")) }
    }
}

/// Records a comparison of an analytic value with an estimate; returns |diff| / tolerance.
fn compare(label: &str, exact: f64, mc: &OutageEstimate, floor: f64, failures: &mut Vec<String>) -> f64 {
    let tol = (3.0 * mc.stderr).max(floor);
    let diff = (exact - mc.p_hat).abs();
    if !(diff <= tol) {
        failures.push(format!("{label}: exact {exact:.6e} vs mc {:.6e} (se {:.2e})", mc.p_hat, mc.stderr));
    }
    diff / tol
}

fn c1_t1_ol_oracle() -> Outcome {
    let est = Estimator::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for p0_db in [10.0, 20.0, 30.0, 40.0] {
        for tau in [0.1, 1.0] {
            for pbar_db in [0.0, 20.0] {
                let cfg = SystemConfig { m: 20, p0: db_to_linear(p0_db), pbar: db_to_linear(pbar_db), tau, r0: 1.0, ..SystemConfig::default() };
                let exact = analytics::p0_t1_ol_exact(&cfg).unwrap().value;
                let mc = est.estimate(&cfg, Scheme::T1Ol, Metric::U0Outage, 10_000_000, point_seed(SEED, k)).unwrap();
                let label = format!("P0={p0_db}dB tau={tau} Pbar={pbar_db}dB");
                worst = worst.max(compare(&label, exact, &mc, 1e-4, &mut failures));
                k += 1;
            }
        }
    }
    outcome(failures, format!("16 points at 1e7 trials, max |diff|/tol = {worst:.3}"))
}

fn c2_t2_ol_oracle() -> Outcome {
    let est = Estimator::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, pbar_db) in [10.0, 20.0, 30.0, 40.0].into_iter().enumerate() {
        let cfg = SystemConfig { m: 10, p0: db_to_linear(20.0), pbar: db_to_linear(pbar_db), tau: 1.0, r0: 1.0, ri: 0.5, ..SystemConfig::default() };
        let exact = analytics::p0_t2_ol_exact(&cfg).unwrap().value;
        let mc = est.estimate(&cfg, Scheme::T2Ol, Metric::U0Outage, 10_000_000, point_seed(SEED + 1, k)).unwrap();
        worst = worst.max(compare(&format!("Pbar={pbar_db}dB"), exact, &mc, 1e-4, &mut failures));
    }
    outcome(failures, format!("4 points at 1e7 trials, max |diff|/tol = {worst:.3}"))
}

fn c3_dcc_oracles() -> Outcome {
    const TRIALS: u64 = 2_000_000;
    let est = Estimator::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut printed_worst: f64 = 0.0;
    let snr = [10.0, 20.0, 30.0, 40.0];
    let given = Metric::GfUserOutage { user: 1, given: 5 };
    for (k, db) in snr.into_iter().enumerate() {
        let s = point_seed(SEED + 2, k);

        let cfg = SystemConfig { m: 20, p0: db_to_linear(db), pbar: 1.0, tau: 1.0, r0: 1.0, ri: 0.5, ..SystemConfig::default() };
        let exact = analytics::p0_t1_dcc_exact(&cfg).unwrap().value;
        let mc = est.estimate(&cfg, Scheme::T1Dcc, Metric::U0Outage, TRIALS, s).unwrap();
        worst = worst.max(compare(&format!("t1_dcc u0 P0={db}dB"), exact, &mc, 1e-4, &mut failures));

        let cfg = SystemConfig { m: 12, p0: db_to_linear(db), pbar: db_to_linear(db), tau: 0.5, r0: 1.0, ri: 0.5, ..SystemConfig::default() };
        let exact = analytics::p1_t1_dcc_exact(5, &cfg).unwrap().value;
        let printed = analytics::p1_t1_dcc_printed(5, &cfg).unwrap().value;
        let mc = est.estimate(&cfg, Scheme::T1Dcc, given, TRIALS, s).unwrap();
        worst = worst.max(compare(&format!("t1_dcc user P0=Pbar={db}dB"), exact, &mc, 1e-4, &mut failures));
        printed_worst = printed_worst.max((printed - mc.p_hat).abs() / (3.0 * mc.stderr).max(1e-4));

        let cfg = SystemConfig { m: 20, p0: db_to_linear(20.0), pbar: db_to_linear(db), tau: 1.0, r0: 1.0, ri: 0.5, ..SystemConfig::default() };
        let exact = analytics::p0_t2_dcc_exact(&cfg).unwrap().value;
        let mc = est.estimate(&cfg, Scheme::T2Dcc, Metric::U0Outage, TRIALS, s).unwrap();
        worst = worst.max(compare(&format!("t2_dcc u0 Pbar={db}dB"), exact, &mc, 1e-4, &mut failures));

        let cfg = SystemConfig { m: 13, p0: db_to_linear(30.0), pbar: db_to_linear(db), tau: 1.0, r0: 1.0, ri: 0.5, ..SystemConfig::default() };
        let exact = analytics::pn_t2_dcc_exact(5, &cfg).unwrap().value;
        let mc = est.estimate(&cfg, Scheme::T2Dcc, given, TRIALS, s).unwrap();
        worst = worst.max(compare(&format!("t2_dcc user Pbar={db}dB"), exact, &mc, 1e-4, &mut failures));
    }
    outcome(
        failures,
        format!("16 points at 2e6 trials, max |diff|/tol = {worst:.3} (uncorrected scheduled-user form: {printed_worst:.1})"),
    )
}

fn c4_support() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 1..=10usize {
        for tau in [0.1, 0.5, 1.0, 2.0] {
            for f in [1.0, 1.5, 2.0] {
                let y = f * n as f64 * tau;
                let v = pdf_sum_trunc_below(y, n, tau).unwrap();
                worst = worst.max(v.abs());
                if !(v.abs() < 1e-12) {
                    failures.push(format!("n={n} tau={tau} y={y}: {v:e}"));
                }
            }
        }
    }
    outcome(failures, format!("120 points, max |pdf| = {worst:.2e}"))
}

fn c5_identities() -> Outcome {
    let mut failures = Vec::new();
    let (mut unity, mut deriv): (f64, f64) = (0.0, 0.0);
    for n in 1..=20usize {
        for tau in [0.1, 0.5, 1.0, 2.0] {
            let r = analytics::partition_of_unity_residual(n, tau).unwrap();
            unity = unity.max(r);
            if !(r < 1e-12) {
                failures.push(format!("partition M={n} tau={tau}: {r:e}"));
            }
            let r = analytics::binomial_derivative_residual(n, tau).unwrap();
            deriv = deriv.max(r);
            if !(r < 1e-20) {
                failures.push(format!("derivative n={n} tau={tau}: {r:e}"));
            }
        }
        for l in 0..n as u32 {
            let s = alternating_power_sum(n as u32, l).unwrap();
            if s != 0 {
                failures.push(format!("power sum n={n} l={l}: {s}"));
            }
        }
    }
    outcome(failures, format!("M, n <= 20: partition {unity:.1e}, derivative {deriv:.1e}, power sums exact"))
}

fn c6_floors() -> Outcome {
    let mut failures = Vec::new();
    let s = db_to_linear(80.0);
    let cfg = SystemConfig { m: 12, p0: s, pbar: s, tau: 0.5, r0: 1.0, ri: 0.5, ..SystemConfig::default() };
    let exact = analytics::p1_t1_dcc_exact(5, &cfg).unwrap().value;
    let floor = analytics::p1_t1_dcc_floor(5, &cfg).unwrap().value;
    if !((exact - floor).abs() <= 1e-2) {
        failures.push(format!("type I floor: exact {exact:.4e} vs floor {floor:.4e}"));
    }
    let cfg = SystemConfig { m: 13, p0: db_to_linear(30.0), pbar: s, tau: 1.0, r0: 1.0, ri: 0.5, ..SystemConfig::default() };
    let pn = analytics::pn_t2_dcc_exact(5, &cfg).unwrap().value;
    if !(pn < 1e-3) {
        failures.push(format!("type II scheduled user {pn:.4e} >= 1e-3"));
    }
    outcome(failures, format!("type I {exact:.4e} vs floor {floor:.4e}; type II {pn:.3e}"))
}

fn c7_asymptotics() -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    let dyadic = [100.0, 200.0, 400.0, 800.0];
    type Eval = Box<dyn Fn(f64) -> (f64, f64)>;
    let cases: Vec<(&str, Eval)> = vec![
        (
            "t1_ol tau=1/P0",
            Box::new(|p0| {
                let cfg = SystemConfig { m: 20, p0, pbar: 1.0, tau: 1.0 / p0, r0: 1.0, ..SystemConfig::default() };
                (analytics::p0_t1_ol_exact(&cfg).unwrap().value, analytics::p0_t1_ol_asym(&cfg, Regime::TauScaled).unwrap().value)
            }),
        ),
        (
            "t1_ol fixed tau",
            Box::new(|p0| {
                let cfg = SystemConfig { m: 20, p0, pbar: 1.0, tau: 0.1, r0: 1.0, ..SystemConfig::default() };
                (analytics::p0_t1_ol_exact(&cfg).unwrap().value, analytics::p0_t1_ol_asym(&cfg, Regime::TauFixed).unwrap().value)
            }),
        ),
        (
            "t1_dcc",
            Box::new(|p0| {
                let cfg = SystemConfig { m: 20, p0, pbar: 1.0, tau: 1.0, r0: 1.0, ..SystemConfig::default() };
                (analytics::p0_t1_dcc_exact(&cfg).unwrap().value, analytics::p0_t1_dcc_asym(&cfg).unwrap().value)
            }),
        ),
        (
            "t2_ol",
            Box::new(|pbar| {
                let cfg = SystemConfig { m: 10, p0: 100.0, pbar, tau: 1.0, r0: 1.0, ri: 0.5, ..SystemConfig::default() };
                (analytics::p0_t2_ol_exact(&cfg).unwrap().value, analytics::p0_t2_ol_asym(&cfg).unwrap().value)
            }),
        ),
    ];
    for (name, eval) in cases {
        let errs: Vec<f64> = dyadic
            .iter()
            .map(|&x| {
                let (exact, asym) = eval(x);
                ((asym - exact) / exact).abs()
            })
            .collect();
        if !errs.windows(2).all(|w| w[1] < w[0]) {
            failures.push(format!("{name}: relative errors {errs:?} not strictly decreasing"));
        }
        summary.push(format!("{name} {:.1e}->{:.1e}", errs[0], errs[3]));
    }
    outcome(failures, summary.join(", "))
}

fn c8_quadrature() -> Outcome {
    let est = Estimator::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let probes: Vec<Probe> = (1..=5).map(|i| Probe::new(Scheme::T1Ol, Metric::GfUserOutage { user: i, given: 5 })).collect();
    for (k, pbar_db) in [20.0, 40.0].into_iter().enumerate() {
        let cfg = SystemConfig { m: 12, pbar: db_to_linear(pbar_db), tau: 0.5, payload_bits: 60.0, block_uses: 100.0, ..SystemConfig::default() };
        let mcs = est.estimate_many(&cfg, &probes, 10_000_000, point_seed(SEED + 3, k)).unwrap();
        for (i, mc) in (1..=5).zip(&mcs) {
            let exact = pi_t1_ol(i, 5, &cfg).unwrap().value;
            worst = worst.max(compare(&format!("i={i} Pbar={pbar_db}dB"), exact, mc, 2e-4, &mut failures));
        }
    }
    outcome(failures, format!("10 values at 1e7 conditioned trials, max |diff|/tol = {worst:.3}"))
}

fn rows_of<'a>(rows: &'a [Row], axis: f64, scheme: Scheme) -> &'a Row {
    rows.iter().find(|r| r.axis_value == axis && r.scheme == scheme).expect("row present")
}

fn binomial_se(p: f64, n: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

fn c9_trends() -> Outcome {
    let mut failures = Vec::new();
    let mut checks = 0;
    for id in ["fig1a", "fig3", "fig5b", "fig6"] {
        let spec = recipe(id).unwrap();
        let rows = experiment::evaluate(&spec).unwrap();
        let (gf, sgf): (Scheme, Vec<Scheme>) = if spec.schemes.contains(&Scheme::GrantFree(SicOrder::U0First)) {
            (Scheme::GrantFree(SicOrder::U0First), spec.schemes.iter().copied().filter(|s| matches!(s, Scheme::T1Ol | Scheme::T1Dcc)).collect())
        } else {
            (Scheme::GrantFree(SicOrder::U0Last), spec.schemes.iter().copied().filter(|s| matches!(s, Scheme::T2Ol | Scheme::T2Dcc)).collect())
        };
        for &v in &spec.values {
            let g = rows_of(&rows, v, gf);
            let b = rows_of(&rows, v, Scheme::GrantBased);
            for &s in &sgf {
                let r = rows_of(&rows, v, s);
                checks += 2;
                if g.mc.p_hat < r.mc.p_hat - 3.0 * g.mc.stderr.hypot(r.mc.stderr) {
                    failures.push(format!("{id} at {v}: grant-free {:.4e} < {s} {:.4e}", g.mc.p_hat, r.mc.p_hat));
                }
                if r.mc.p_hat < b.mc.p_hat - 3.0 * r.mc.stderr.hypot(b.mc.stderr) {
                    failures.push(format!("{id} at {v}: {s} {:.4e} < grant-based {:.4e}", r.mc.p_hat, b.mc.p_hat));
                }
            }
        }
        if id == "fig1a" || id == "fig5b" {
            let s = sgf[0];
            let gaps: Vec<(f64, f64, f64)> = spec
                .values
                .iter()
                .map(|&v| {
                    let r = rows_of(&rows, v, s);
                    let b = rows_of(&rows, v, Scheme::GrantBased);
                    let mc = r.mc.p_hat - b.mc.p_hat;
                    let exact = r.analytic_exact.unwrap() - b.analytic_exact.unwrap();
                    (mc, binomial_se(mc, r.mc.trials), exact)
                })
                .collect();
            for w in gaps.windows(2) {
                checks += 2;
                if w[1].0 > w[0].0 + 3.0 * w[0].1.hypot(w[1].1) {
                    failures.push(format!("{id}: simulated gap grows {:.4e} -> {:.4e}", w[0].0, w[1].0));
                }
                if w[1].2 > w[0].2 {
                    failures.push(format!("{id}: analytic gap grows {:.4e} -> {:.4e}", w[0].2, w[1].2));
                }
            }
        }
    }
    outcome(failures, format!("{checks} ordering and gap checks on fig1a/fig3/fig5b/fig6 at 1e6 trials"))
}

fn c10_reproducibility() -> Outcome {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    for (id, _) in RECIPES {
        let mut bytes = Vec::new();
        for workers in [1, 2, 5] {
            let mut spec = recipe(id).unwrap();
            spec.trials = 40_000;
            spec.workers = Some(workers);
            spec.out = Some(dir.path().join(format!("{id}-{workers}.csv")));
            let report = experiment::run(&spec).unwrap();
            bytes.push(std::fs::read(report.csv).unwrap());
        }
        if bytes.windows(2).any(|w| w[0] != w[1]) {
            failures.push(format!("{id}: CSV differs across worker counts"));
        }
    }
    outcome(failures, "9 recipes at 4e4 trials with 1, 2 and 5 workers".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("type I open-loop U0 outage vs simulation", c1_t1_ol_oracle),
        ("type II open-loop U0 outage vs simulation", c2_t2_ol_oracle),
        ("DCC closed forms vs simulation", c3_dcc_oracles),
        ("truncated-sum density vanishes off support", c4_support),
        ("partition of unity and binomial identities", c5_identities),
        ("DCC scheduled-user floors", c6_floors),
        ("asymptotic forms converge", c7_asymptotics),
        ("open-loop grant-free quadrature vs simulation", c8_quadrature),
        ("figure trends", c9_trends),
        ("worker-count reproducibility", c10_reproducibility),
    ];
    let filter: Vec<usize> = std::env::var("SGF_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let verdict = if o.ok { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
