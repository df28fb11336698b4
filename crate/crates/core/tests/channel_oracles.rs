//! Sampling oracles for the channel densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgf_core::channel::{pdf_order_stat_below, pdf_sum_conditional, pdf_sum_trunc_below, sample_realization};
use sgf_core::integrate::integrate;

const DRAWS: usize = 10_000_000;

fn trunc_exp<R: Rng>(rng: &mut R, tau: f64) -> f64 {
    let u: f64 = rng.gen();
    -(-u * -(-tau).exp_m1()).ln_1p()
}

/// Checks the bin containing `y` and every bin of `[lo, hi)` against the density.
fn check_histogram(samples: &[f64], lo: f64, hi: f64, bins: usize, y: f64, pdf: impl Fn(f64) -> f64) {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &s in samples {
        if s >= lo && s < hi {
            counts[((s - lo) / width) as usize] += 1;
        }
    }
    let n = samples.len() as f64;
    let target = ((y - lo) / width) as usize;
    let mut checked_target = false;
    for (k, &c) in counts.iter().enumerate() {
        let a = lo + k as f64 * width;
        let p = integrate(&pdf, &[a, a + width], 1e-12, 200).unwrap().value;
        if p < 1e-4 {
            continue;
        }
        let se = (p * (1.0 - p) / n).sqrt();
        let obs = c as f64 / n;
        assert!((obs - p).abs() <= 3.0 * se, "bin [{a}, {}): observed {obs:.6e}, expected {p:.6e} (se {se:.1e})", a + width);
        checked_target |= k == target;
    }
    assert!(checked_target, "bin containing {y} was not checked");
}

#[test]
fn gain_cdf_at_one_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000;
    let mut below = 0u64;
    for _ in 0..n / 4 {
        let r = sample_realization(3, &mut rng).unwrap();
        below += std::iter::once(r.g0()).chain(r.gains().iter().copied()).filter(|&g| g < 0.5).count() as u64;
    }
    let p = 1.0 - (-0.5f64).exp();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let obs = below as f64 / n as f64;
    assert!((obs - p).abs() <= 3.0 * se, "{obs} vs {p}");
}

#[test]
fn sum_of_truncated_exponentials_histogram() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let samples: Vec<f64> = (0..DRAWS).map(|_| (0..3).map(|_| trunc_exp(&mut rng, 1.0)).sum()).collect();
    check_histogram(&samples, 0.0, 3.0, 30, 1.5, |y| pdf_sum_trunc_below(y, 3, 1.0).unwrap());
}

#[test]
fn conditional_sum_histogram() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let samples: Vec<f64> = (0..DRAWS).map(|_| trunc_exp(&mut rng, 1.0) + trunc_exp(&mut rng, 1.0)).collect();
    check_histogram(&samples, 0.0, 2.0, 20, 0.7, |y| pdf_sum_conditional(y, 3, 1.0).unwrap());
}

#[test]
fn order_statistic_histogram() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let samples: Vec<f64> = (0..DRAWS)
        .map(|_| {
            let mut g = [0.0; 5];
            g.iter_mut().for_each(|x| *x = trunc_exp(&mut rng, 1.0));
            g.sort_by(f64::total_cmp);
            g[2]
        })
        .collect();
    check_histogram(&samples, 0.0, 1.0, 20, 0.5, |x| pdf_order_stat_below(x, 3, 5, 1.0).unwrap());
}

#[test]
fn order_statistic_density_is_normalized() {
    let total = integrate(|x| pdf_order_stat_below(x, 2, 5, 1.0).unwrap(), &[0.0, 1.0], 1e-12, 200).unwrap().value;
    assert!((total - 1.0).abs() < 1e-9, "{total}");
}

#[test]
fn truncated_sum_density_is_normalized() {
    for (n, tau) in [(2usize, 0.5), (4, 1.0), (7, 2.0)] {
        let pts: Vec<f64> = (0..=n).map(|p| p as f64 * tau).collect();
        let total = integrate(|y| pdf_sum_trunc_below(y, n, tau).unwrap(), &pts, 1e-12, 500).unwrap().value;
        assert!((total - 1.0).abs() < 1e-9, "n={n} tau={tau}: {total}");
    }
}
