use iosnoma::fading::NakagamiMoments;
use iosnoma::geometry::{aperture_sums_discrete, ElementGrid, FeedGeometry, SurfaceGeometry};
use iosnoma::rates::{HardwareQuality, PowerSplit};
use iosnoma::scenario::Scenario;
use iosnoma::theory::{
    asymptotic_rho, channel_moments, channel_moments_with, eta_coefficient, gamma_fit,
    inverse_mean, NoiseScaling, TheoryOptions,
};
use iosnoma::Error;
use proptest::prelude::*;

fn sums_for(n_x: usize, n_y: usize, d0: f64) -> iosnoma::geometry::ApertureSums {
    let surface = SurfaceGeometry::new(n_x, n_y, 0.075, 0.075, 0.3).unwrap();
    let feed = FeedGeometry::new(d0, 2.0).unwrap();
    aperture_sums_discrete(&ElementGrid::build(&surface, &feed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eta_equals_scaled_inverse_moment(
        m in 0.5f64..8.0,
        n_x in 1usize..=32,
        n_y in 1usize..=32,
        d0 in 1.0f64..10.0,
        gain in 1e-3f64..1e3,
    ) {
        let sums = sums_for(n_x, n_y, d0);
        let direct = eta_coefficient(&sums, m).map(|e| e.eta);
        let piped = channel_moments(&sums, m, gain, 1.0).and_then(|mom| inverse_mean(&mom)).map(|v| gain * v);
        match (direct, piped) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-10 * b, "{a} vs {b}"),
            (Err(a), Err(b)) => prop_assert_eq!(a.is_numerical(), b.is_numerical()),
            (a, b) => prop_assert!(false, "disagree: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn gamma_fit_matches_both_moments(m in 0.5f64..8.0, n in 2usize..=16, gain in 0.01f64..100.0) {
        let sums = sums_for(n, n, 3.0);
        let mom = channel_moments(&sums, m, gain, 0.7).unwrap();
        let fit = gamma_fit(&mom).unwrap();
        prop_assert!((fit.nu * fit.varsigma - mom.e_h2).abs() <= 1e-12 * mom.e_h2);
        let second = fit.nu * (fit.nu + 1.0) * fit.varsigma * fit.varsigma;
        prop_assert!((second - mom.e_h4).abs() <= 1e-10 * mom.e_h4);
        prop_assert!(mom.e_h4 >= mom.e_h2 * mom.e_h2);
    }

    #[test]
    fn bounds_grow_with_power(rho_db in -20.0f64..100.0, step in 0.5f64..10.0, k1 in 0.01f64..0.49, eps in 0.9f64..=1.0) {
        let s = Scenario::default().with_grid(8, 8).with_kappa1(k1).with_hq(HardwareQuality::uniform(eps));
        let ns = NoiseScaling::finite(&s, TheoryOptions::default()).unwrap();
        let lo = ns.noma_bounds(&s.with_rho(10f64.powf(rho_db / 10.0)));
        let hi = ns.noma_bounds(&s.with_rho(10f64.powf((rho_db + step) / 10.0)));
        prop_assert!(hi.0 >= lo.0 && hi.1 >= lo.1);
        let o_lo = ns.oma_bounds(&s.with_rho(10f64.powf(rho_db / 10.0)));
        let o_hi = ns.oma_bounds(&s.with_rho(10f64.powf((rho_db + step) / 10.0)));
        prop_assert!(o_hi.0 >= o_lo.0 && o_hi.1 >= o_lo.1);
        let (l1, l2) = asymptotic_rho(&s.power_split, &s.hq);
        prop_assert!(hi.0 <= l1 && hi.1 <= l2 * (1.0 + 1e-12));
    }

    #[test]
    fn bounds_grow_with_hardware_quality(e_lo in 0.5f64..1.0, de in 0.0f64..0.5, k1 in 0.01f64..0.49) {
        let e_hi = (e_lo + de).min(1.0);
        let s = Scenario::default().with_grid(8, 8).with_kappa1(k1).with_rho(100.0);
        let ns = NoiseScaling::finite(&s, TheoryOptions::default()).unwrap();
        let lo = ns.noma_bounds(&s.with_hq(HardwareQuality::uniform(e_lo)));
        let hi = ns.noma_bounds(&s.with_hq(HardwareQuality::uniform(e_hi)));
        prop_assert!(hi.0 >= lo.0 * (1.0 - 1e-12) && hi.1 >= lo.1 * (1.0 - 1e-12));
    }
}

#[test]
fn bounds_grow_with_element_count_toward_the_plateau() {
    let base = Scenario::default();
    let opts = TheoryOptions::default();
    let plateau = NoiseScaling::infinite(&base, opts)
        .unwrap()
        .noma_bounds(&base);
    let mut last = (0.0, 0.0);
    for n in [1, 2, 4, 8, 16, 32, 64] {
        let s = base.with_grid(n, n);
        let Ok(ns) = NoiseScaling::finite(&s, opts) else {
            // A single Rayleigh element has no finite inverse moment.
            assert_eq!(n, 1);
            continue;
        };
        let b = ns.noma_bounds(&s);
        assert!(b.0 > last.0 && b.1 > last.1, "N = {}", n * n);
        assert!(b.0 < plateau.0 && b.1 < plateau.1);
        last = b;
    }
}

#[test]
fn single_rayleigh_element_has_no_inverse_moment() {
    let sums = sums_for(1, 1, 3.0);
    let mom = channel_moments(&sums, 1.0, 1.0, 1.0).unwrap();
    assert!(matches!(
        inverse_mean(&mom),
        Err(Error::NonIntegrableInverseMoment(_))
    ));
    assert!(matches!(
        eta_coefficient(&sums, 1.0),
        Err(Error::NonIntegrableInverseMoment(_))
    ));
    // A sharper single element is fine.
    assert!(inverse_mean(&channel_moments(&sums, 2.0, 1.0, 1.0).unwrap()).is_ok());
}

#[test]
fn one_element_reduces_to_a_gamma_power() {
    // |h|^2 = gain gamma q^2 with q^2 ~ Gamma(m, 1/m).
    let sums = sums_for(1, 1, 3.0);
    let m = 3.0;
    let mo = NakagamiMoments::new(m).unwrap();
    let mom = channel_moments_with(&mo, &sums, 2.0);
    let g = sums.a2;
    assert!((mom.e_h2 - 2.0 * g).abs() < 1e-14 * mom.e_h2);
    assert!((mom.e_h4 - 4.0 * g * g * (m + 1.0) / m).abs() < 1e-12 * mom.e_h4);
    let inv = inverse_mean(&mom).unwrap();
    assert!((inv - m / ((m - 1.0) * 2.0 * g)).abs() < 1e-12 * inv);
}

#[test]
fn perfect_hardware_first_user_has_no_ceiling() {
    let (l1, l2) = asymptotic_rho(&PowerSplit::new(0.2), &HardwareQuality::IDEAL);
    assert!(l1.is_infinite());
    assert!((l2 - (1.0f64 + 0.8 / 0.2).log2()).abs() < 1e-12);
}
