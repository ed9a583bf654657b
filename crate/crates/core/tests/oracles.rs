//! Values computed independently (closed forms and 40-digit mpmath sums) and
//! frozen here.

// Digits are kept as printed by mpmath.
#![allow(clippy::excessive_precision)]

use summatau::abel::{abel_limit, abel_mean, mean_curve};
use summatau::cesaro::{cesaro_limit, cesaro_means};
use summatau::oscillation::{is_slowly_oscillating, so_profile, SoStatus};
use summatau::probes::{boundedness_probe, pm1_with_abel_limit, BoundednessStatus};
use summatau::statistical::{
    density_profile, lacunary_profile, powers, st_lacunary_limit, st_limit,
};
use summatau::{FunctionSpec, Sequence, Status, ToleranceProfile};

/// Slack for rounding in compensated sums of up to ~10^8 terms.
const ROUNDING: f64 = 1e-12;

fn seq(text: &str) -> Sequence {
    Sequence::parse(text).unwrap()
}

fn x_at(j: u32) -> f64 {
    1.0 - 0.5f64.powi(j as i32)
}

fn deep(grid_depth: u32) -> ToleranceProfile {
    ToleranceProfile::default().with_grid_depth(grid_depth)
}

fn assert_mean(text: &str, j: u32, expected: f64, profile: &ToleranceProfile) {
    let p = abel_mean(&seq(text), x_at(j), profile).unwrap();
    let slack = p.tail_bound + ROUNDING * expected.abs().max(1.0);
    assert!(
        (p.mean - expected).abs() <= slack,
        "{text} at x_{j}: {} vs {expected} (slack {slack})",
        p.mean
    );
}

#[test]
fn terms_of_documented_families() {
    let h = seq("harmonic_log");
    assert_eq!(h.term(0).unwrap(), 0.0);
    assert!((h.term(3).unwrap() - 11.0 / 6.0).abs() < 1e-15);
    let g = seq("geometric_spike");
    assert_eq!(g.term(8).unwrap(), 8.0);
    assert_eq!(g.term(9).unwrap(), 0.0);
    assert_eq!(seq("square_indicator").term(49).unwrap(), 1.0);
    assert_eq!(seq("square_indicator").term(50).unwrap(), 0.0);
}

#[test]
fn alternating_mean_at_nine_tenths() {
    let p = abel_mean(&seq("alternating(c=1)"), 0.9, &ToleranceProfile::default()).unwrap();
    assert!((p.mean - 0.1 / 1.9).abs() <= p.tail_bound + ROUNDING);
}

#[test]
fn ramp_mean_at_ninety_nine_hundredths() {
    let p = abel_mean(&seq("ramp"), 0.99, &ToleranceProfile::default()).unwrap();
    assert!((p.mean - 0.99 / 0.01).abs() <= p.tail_bound + 1e-10);
}

#[test]
fn harmonic_log_mean_is_minus_log_one_minus_x() {
    let profile = ToleranceProfile::default();
    assert_mean("harmonic_log", 5, 3.4657359027997265, &profile);
    assert_mean("harmonic_log", 10, 6.9314718055994531, &profile);
}

#[test]
fn convergent_rate_one_mean() {
    // (1-x) ln(1+x) / x above the limit.
    let profile = ToleranceProfile::default();
    assert_mean(
        "convergent(limit=0.3, rate=1)",
        5,
        0.3 + 0.021851574954574392,
        &profile,
    );
    assert_mean(
        "convergent(limit=0.3, rate=1)",
        10,
        0.3 + 0.00067708580651205908,
        &profile,
    );
    assert_mean(
        "convergent(limit=0, rate=1)",
        20,
        6.6103683925582187e-7,
        &profile,
    );
}

#[test]
fn pm1_pattern_means() {
    let profile = ToleranceProfile::default();
    assert_mean("pm1_pattern(rho=0.75)", 10, 0.49926698178748562, &profile);
    assert_mean("pm1_pattern(rho=0.75)", 20, 0.49999928474369426, &profile);
    assert_mean("pm1_pattern(rho=0.9)", 20, 0.79999914169161457, &profile);
}

#[test]
fn sparse_family_means() {
    let profile = deep(30);
    assert_mean("geometric_spike", 10, 1.4410233535900194, &profile);
    assert_mean("geometric_spike", 15, 1.4426516738637908, &profile);
    assert_mean("geometric_spike", 20, 1.4427025650174076, &profile);
    assert_mean("geometric_spike", 26, 1.442704181022841, &profile);
    assert_mean(
        "lacunary_spike(beta=0.3333333333333333)",
        20,
        0.00037078951921204807,
        &profile,
    );
    assert_mean(
        "lacunary_spike(beta=0.3333333333333333)",
        26,
        2.334633727578175e-5,
        &profile,
    );
    assert_mean("square_indicator", 10, 0.028176109368684692, &profile);
    assert_mean("square_indicator", 20, 0.00086593261270481925, &profile);
    assert_mean("square_indicator", 30, 2.704596508897338e-5, &profile);
}

#[test]
fn geometric_spike_plateaus_near_reciprocal_log_two() {
    let v = abel_limit(&seq("geometric_spike"), &ToleranceProfile::default()).unwrap();
    let limit = v.status.limit().expect("plateau is resolved");
    assert!((limit - 1.0 / std::f64::consts::LN_2).abs() < 1e-4);
    assert!(limit >= 1.0 / (2.0 * std::f64::consts::LN_2));
}

#[test]
fn alternating_curve_decreases() {
    let c = mean_curve(&seq("alternating(c=1)"), &deep(10)).unwrap();
    assert_eq!(c.points.len(), 10);
    assert!(c.means().windows(2).all(|w| w[1] < w[0]));
    assert!(c.means()[9] > 0.0);
}

#[test]
fn square_indicator_curve_decreases_below_one_percent() {
    let c = mean_curve(&seq("square_indicator"), &ToleranceProfile::default()).unwrap();
    let m = c.means();
    assert!(m.windows(2).all(|w| w[1] < w[0]));
    assert!(m[m.len() - 1] < 1e-2);
}

#[test]
fn cesaro_documented_means() {
    let p = cesaro_means(&seq("alternating(c=1)"), &[9, 10]).unwrap();
    assert_eq!(p.sigma, vec![0.0, 1.0 / 11.0]);
    let p = cesaro_means(&seq("pm1_pattern(rho=0.75)"), &[999_999]).unwrap();
    assert!((p.sigma[0] - 0.5).abs() < 1e-3);
    let profile = ToleranceProfile::default();
    let v = cesaro_limit(&seq("constant(c=7)"), &profile).unwrap();
    assert_eq!(v.status.limit(), Some(7.0));
    assert_eq!(
        cesaro_limit(&seq("ramp"), &profile).unwrap().status,
        Status::Diverged { sign: 1 }
    );
    let lo = cesaro_limit(&seq("log_oscillator"), &profile).unwrap();
    assert!(!lo.status.is_converged());
    let alt = cesaro_limit(&seq("alternating(c=1)"), &profile).unwrap();
    assert!(alt.status.limit().is_some_and(|l| l.abs() < 1e-4));
}

#[test]
fn square_density_is_exact() {
    let n = 1_000_000u64;
    let d = density_profile(&seq("square_indicator"), 0.0, 0.5, &[n]).unwrap();
    assert_eq!(d.count[0], 1000);
    assert_eq!(d.d[0], 1000.0 / n as f64);
}

#[test]
fn statistical_verdicts() {
    let profile = ToleranceProfile::default().with_n_max(1_000_000);
    assert_eq!(
        st_limit(&seq("square_indicator"), &profile)
            .unwrap()
            .status
            .limit(),
        Some(0.0)
    );
    assert!(!st_limit(&seq("alternating(c=1)"), &profile)
        .unwrap()
        .status
        .is_converged());
}

#[test]
fn lacunary_windows_of_squares_and_alternating() {
    let theta = powers(2, 1 << 20).unwrap();
    let w = lacunary_profile(&seq("square_indicator"), &theta, 0.0, 0.5).unwrap();
    for (i, &c) in w.count.iter().enumerate() {
        let (a, b) = (theta.k()[i], theta.k()[i + 1]);
        let squares = (b as f64).sqrt().floor() as u64 - (a as f64).sqrt().floor() as u64;
        assert_eq!(c, squares);
        let r = i as i32 + 1;
        if r > 1 {
            assert!(w.w[i] <= (2f64.powi(r).sqrt() + 1.0) / 2f64.powi(r - 1));
        }
    }
    let alt = seq("alternating(c=1)");
    let at_zero = lacunary_profile(&alt, &theta, 0.0, 0.5).unwrap();
    assert!(at_zero.w.iter().all(|&w| w == 1.0));
    let at_one = lacunary_profile(&alt, &theta, 1.0, 0.5).unwrap();
    assert!(at_one.w[2..].iter().all(|&w| w == 0.5));

    let profile = ToleranceProfile::default().with_n_max(1 << 20);
    let v = st_lacunary_limit(&seq("square_indicator"), &theta, &profile).unwrap();
    assert_eq!(v.status.limit(), Some(0.0));
    assert!(!st_lacunary_limit(&alt, &theta, &profile)
        .unwrap()
        .status
        .is_converged());
}

#[test]
fn oscillation_window_examples() {
    let n_grid = [20, 64, 100, 1000, 10_000];
    let alt = so_profile(&seq("alternating(c=1)"), &[1.1], &n_grid).unwrap();
    assert!(alt.m[0].iter().all(|&m| m == 2.0));
    let h = so_profile(&seq("harmonic_log"), &[1.1], &n_grid).unwrap();
    assert!(h.m[0].iter().all(|&m| m <= 1.1f64.ln()));

    let profile = ToleranceProfile::default().with_n_max(2_000_000);
    let (r, _) = is_slowly_oscillating(&seq("log_oscillator"), &profile).unwrap();
    assert_eq!(r.status, SoStatus::SoEmpirical);
    let (r, _) = is_slowly_oscillating(&seq("alternating(c=1)"), &profile).unwrap();
    assert_eq!(r.status, SoStatus::NotSo);
    assert_eq!(r.witness.unwrap().gap, 2.0);
    let (r, p) = is_slowly_oscillating(&seq("constant(c=3)"), &profile).unwrap();
    assert_eq!(r.status, SoStatus::SoEmpirical);
    assert!(p.m.iter().flatten().all(|&m| m == 0.0));
}

#[test]
fn witch_of_alternating_is_one_half() {
    let s = Sequence::map(
        &FunctionSpec::parse("witch").unwrap(),
        &seq("alternating(c=1)"),
    );
    assert!(s.prefix(100).unwrap().iter().all(|&v| v == 0.5));
}

#[test]
fn pm1_with_half_limit() {
    let s = pm1_with_abel_limit(0.5).unwrap();
    assert_eq!(s.label(), "pm1_pattern(rho=0.75)");
    let v = abel_limit(&s, &ToleranceProfile::default()).unwrap();
    assert!((v.status.limit().unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn boundedness_witnesses() {
    let profile = ToleranceProfile::default().with_n_max(1_000_000);
    for text in ["geometric_spike", "ramp"] {
        let r = boundedness_probe(&seq(text), &profile).unwrap();
        assert_eq!(
            r.status,
            BoundednessStatus::NotAbelSequentiallyCompactWitness,
            "{text}"
        );
        assert!(r
            .spikes
            .iter()
            .all(|s| s.value.abs() > 2f64.powi(s.j as i32)));
    }
    for text in ["constant(c=1)", "alternating(c=1)"] {
        let r = boundedness_probe(&seq(text), &profile).unwrap();
        assert_eq!(
            r.status,
            BoundednessStatus::NoUnboundednessDetected,
            "{text}"
        );
    }
}

#[test]
fn convergent_terms_match_direct_powers() {
    for rate in [0.25, 1.0, 1.3, 3.99, 12.0] {
        let s = seq(&format!("convergent(limit=0, rate={rate})"));
        for k in [0u64, 63, 64, 65, 127, 1000, 4095, 4097, 19_999_999] {
            let want = ((k + 1) as f64).powf(-rate) * if k % 2 == 0 { 1.0 } else { -1.0 };
            let got = s.term(k).unwrap();
            assert!(
                (got - want).abs() <= 1e-13 * want.abs(),
                "rate {rate}, k {k}: {got} vs {want}"
            );
        }
    }
}
