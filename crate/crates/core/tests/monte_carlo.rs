use iosnoma::geometry::{aperture_sums_discrete, ElementGrid};
use iosnoma::mc::{channel_moments_mc, ergodic_rates_mc, McConfig, RunningStats};
use iosnoma::rates::{noma_rates, oma_rates, User};
use iosnoma::scenario::Scenario;
use iosnoma::theory::{NoiseScaling, TheoryOptions};

#[test]
fn near_deterministic_fading_matches_the_fixed_channel() {
    // Huge m pins every amplitude to one, so |h|^2 = rho beta^2 A1^2.
    let mut s = Scenario::default().with_grid(8, 8);
    s.user1.m = 1e12;
    s.user2.m = 1e12;
    let grid = ElementGrid::build(&s.surface, &s.feed).unwrap();
    let a1 = aperture_sums_discrete(&grid).a1;
    let h = |u: User| s.link_gain(u) * a1 * a1;
    let (h1, h2) = (h(User::One), h(User::Two));
    let want = noma_rates(h1, h2, &s.power_split, &s.hq, &s.budget);
    let want_oma = oma_rates(h1, h2, &s.oma_split, &s.hq, &s.budget);
    let got = ergodic_rates_mc(&s, &McConfig::new(2000, 3)).unwrap();
    for (g, w) in [
        (got.noma.r1.mean, want.r1),
        (got.noma.r2.mean, want.r2),
        (got.oma.r1.mean, want_oma.0),
        (got.oma.r2.mean, want_oma.1),
    ] {
        assert!((g - w).abs() < 1e-5 * w, "{g} vs {w}");
    }
    assert!(got.noma.r1.half_width_95 < 1e-5);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let s = Scenario::default().with_grid(8, 8);
    let base = McConfig::new(5000, 77);
    let reference = ergodic_rates_mc(&s, &base.with_workers(1)).unwrap();
    for w in [2, 3, 8] {
        assert_eq!(
            ergodic_rates_mc(&s, &base.with_workers(w)).unwrap(),
            reference,
            "{w} workers"
        );
    }
    let other_batch = McConfig { batch: 333, ..base };
    let rerun = ergodic_rates_mc(&s, &other_batch.with_workers(4)).unwrap();
    assert!((rerun.noma.r1.mean - reference.noma.r1.mean).abs() < 1e-12);
}

#[test]
fn different_seeds_give_different_draws() {
    let s = Scenario::default().with_grid(4, 4);
    let a = ergodic_rates_mc(&s, &McConfig::new(1000, 1)).unwrap();
    let b = ergodic_rates_mc(&s, &McConfig::new(1000, 2)).unwrap();
    assert_ne!(a.noma.r1.mean, b.noma.r1.mean);
}

#[test]
fn confidence_interval_shrinks_like_root_n() {
    let s = Scenario::default().with_grid(8, 8);
    let small = ergodic_rates_mc(&s, &McConfig::new(4000, 5)).unwrap();
    let large = ergodic_rates_mc(&s, &McConfig::new(16000, 5)).unwrap();
    let ratio = small.noma.r1.half_width_95 / large.noma.r1.half_width_95;
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn decoding_order_holds_with_a_forty_db_gap() {
    for n in [8, 16, 32] {
        let s = Scenario::default().with_grid(n, n);
        let mc = ergodic_rates_mc(&s, &McConfig::new(5000, 9)).unwrap();
        assert_eq!(mc.noma.r1.sic_violations, 0, "N = {}", n * n);
    }
}

#[test]
fn ergodic_rates_sit_above_their_bounds() {
    let s = Scenario::default();
    let mc = ergodic_rates_mc(&s, &McConfig::new(10_000, 13)).unwrap();
    let ns = NoiseScaling::finite(&s, TheoryOptions::default()).unwrap();
    let (b1, b2) = ns.noma_bounds(&s);
    let (o1, o2) = ns.oma_bounds(&s);
    for (e, b) in [
        (mc.noma.r1, b1),
        (mc.noma.r2, b2),
        (mc.oma.r1, o1),
        (mc.oma.r2, o2),
    ] {
        assert!(e.mean >= b - 3.0 * e.half_width_95, "{} vs {b}", e.mean);
    }
}

#[test]
fn single_rayleigh_element_gives_exponential_power() {
    let s = Scenario::default().with_grid(1, 1);
    let grid = ElementGrid::build(&s.surface, &s.feed).unwrap();
    let mean = s.link_gain(User::One) * grid.energies[0];
    let est = channel_moments_mc(&s, User::One, &McConfig::new(200_000, 21)).unwrap();
    assert!((est.e_h2.mean - mean).abs() < 3.0 * est.e_h2.half_width_95.max(1e-3 * mean));
    let second = 2.0 * mean * mean;
    assert!((est.e_h4.mean - second).abs() < 0.02 * second);
}

#[test]
fn running_stats_agree_with_two_pass_formulas() {
    let xs = [1.0, 4.0, 9.0, 16.0, 25.0];
    let mut st = RunningStats::default();
    xs.iter().for_each(|&x| st.push(x));
    let mean = xs.iter().sum::<f64>() / 5.0;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
    assert!((st.mean() - mean).abs() < 1e-12);
    assert!((st.variance() - var).abs() < 1e-12);
}

#[test]
fn zero_trials_are_rejected() {
    let s = Scenario::default().with_grid(2, 2);
    assert!(ergodic_rates_mc(&s, &McConfig::new(0, 1)).is_err());
}
