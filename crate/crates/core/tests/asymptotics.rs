use tunnel_core::asymptotics::*;
use tunnel_core::manybody::*;
use tunnel_core::model::*;
use tunnel_core::numerics::log_grid;
use tunnel_core::Error;

const PROBABILITIES: [Observable; 2] = [Observable::NonEscape, Observable::Survival];

#[test]
fn series_reproduces_every_closed_form() {
    for p in [
        ModelParams::free(),
        ModelParams::new(1.0, 1.0, 3.0).unwrap(),
        ModelParams::new(2.0, 2.0, 0.5).unwrap(),
    ] {
        for obs in [Observable::NonEscape, Observable::Survival, Observable::OneBody] {
            for stats in Statistics::ALL {
                for n in 1..=3 {
                    let closed = predicted_law(obs, stats, n, &p).unwrap();
                    let derived = derive_law_series(obs, stats, n, &p, None).unwrap();
                    assert_eq!(closed.exponent, derived.exponent, "{closed}");
                    assert_eq!(derived.source, LawSource::SeriesDerived);
                    if let Some(c) = closed.coefficient {
                        let r = derived.coefficient.unwrap() / c - 1.0;
                        assert!(r.abs() < 1e-6, "{closed} vs {derived}");
                    }
                }
            }
        }
    }
}

#[test]
fn exponents_follow_the_statistics() {
    let p = ModelParams::free();
    for obs in PROBABILITIES {
        for n in 1..=3usize {
            let nf = n as f64;
            for stats in [Statistics::GroundBosons, Statistics::ExcitedBosons] {
                assert_eq!(derive_law_series(obs, stats, n, &p, None).unwrap().exponent, -3.0 * nf);
            }
            let f = derive_law_series(obs, Statistics::Fermionized, n, &p, None).unwrap();
            assert_eq!(f.exponent, -nf * (2.0 * nf + 1.0));
        }
    }
}

#[test]
fn fermion_determinant_cancels_below_its_leading_order() {
    let p = ModelParams::free();
    for obs in PROBABILITIES {
        // tau^{-x} is u^{2x} for probabilities and u^{x} for survival amplitudes
        let per_tau = if obs == Observable::NonEscape { 2 } else { 1 };
        for n in 2..=4i32 {
            let s = amplitude_series(obs, Statistics::Fermionized, n as usize, &p, None).unwrap();
            let start = per_tau * 3 * n;
            let lead = per_tau * n * (2 * n + 1);
            let mut cancelled = 0;
            let mut noise = 0.0f64;
            for pw in start..lead {
                let r = s.survival_ratio(pw);
                noise = noise.max(r);
                assert!(r < NOISE_FLOOR, "{obs:?} N={n} u^{pw}: {r:e}");
                if s.magnitude.coefficient(pw).is_some_and(|m| m.re.hi() > 0.0) {
                    cancelled += 1;
                }
            }
            // the cancellation is real: every even order carried nonzero terms
            assert!(cancelled >= (lead - start) / 2, "{obs:?} N={n}");
            // a wide gap separates the surviving order from the rounding noise
            let kept = s.survival_ratio(lead);
            assert!(
                kept > NOISE_FLOOR && kept > 1e8 * noise,
                "{obs:?} N={n}: {kept:e} vs {noise:e}"
            );
        }
    }
}

#[test]
fn barrier_enters_only_through_its_power() {
    for obs in PROBABILITIES {
        for stats in Statistics::ALL {
            for n in 1..=3 {
                let base = derive_law_series(obs, stats, n, &ModelParams::free(), None).unwrap();
                for eta in [1.0, 3.0] {
                    let p = ModelParams::new(1.0, 1.0, eta).unwrap();
                    let l = derive_law_series(obs, stats, n, &p, None).unwrap();
                    let ratio = l.coefficient.unwrap() / base.coefficient.unwrap();
                    let expect = (1.0 + eta).powi(-4 * n as i32);
                    assert!((ratio / expect - 1.0).abs() < 1e-10);
                    assert_eq!(l.exponent, base.exponent);
                }
            }
        }
    }
}

#[test]
fn excited_boson_coefficient_matches_the_permanent() {
    let law = derive_law_series(
        Observable::NonEscape,
        Statistics::ExcitedBosons,
        2,
        &ModelParams::free(),
        None,
    )
    .unwrap();
    let tau = 1e4;
    let direct = nonescape(
        tau,
        2,
        Statistics::ExcitedBosons,
        &ModelParams::free(),
        EvolutionMethod::ExactFree,
    )
    .unwrap();
    assert!(direct.trusted);
    let ratio = direct.value * tau.powi(6) / law.coefficient.unwrap();
    // next order is O(1/tau)
    assert!((ratio - 1.0).abs() < 2e-3, "{ratio}");
}

#[test]
fn series_law_matches_extended_precision_fermions() {
    let p = ModelParams::free();
    let law = derive_law_series(Observable::Survival, Statistics::Fermionized, 3, &p, None).unwrap();
    let mb = ManyBody::new(&p, EvolutionMethod::ExactFree, WorkingPrecision::Extended, 3, 1e3).unwrap();
    let tau = 1e3;
    let o = mb.survival(tau, 3, Statistics::Fermionized).unwrap();
    assert!(o.trusted);
    let ratio = o.value * tau.powf(-law.exponent) / law.coefficient.unwrap();
    assert!((ratio - 1.0).abs() < 2e-2, "{ratio}");
}

fn free_curve(obs: Observable, stats: Statistics, n: usize, taus: &[f64]) -> DecayCurve {
    ManyBody::new(
        &ModelParams::free(),
        EvolutionMethod::ExactFree,
        WorkingPrecision::Standard,
        n,
        taus[0],
    )
    .unwrap()
    .curve(obs, stats, n, taus)
    .unwrap()
}

#[test]
fn boson_curve_verifies_against_its_law() {
    let taus = log_grid(1e3, 1e4, 24);
    let c = free_curve(Observable::NonEscape, Statistics::GroundBosons, 2, &taus);
    let law = predicted_law(Observable::NonEscape, Statistics::GroundBosons, 2, &ModelParams::free()).unwrap();
    let v = verify_curve(&c, &law, (1e3, 1e4)).unwrap();
    assert!(v.exponent_error.abs() < 0.05, "{v:?}");
    assert!((v.coefficient_ratio.unwrap() - 1.0).abs() < 0.02, "{v:?}");

    // the wrong law is reported, not raised
    let wrong = predicted_law(Observable::NonEscape, Statistics::Fermionized, 2, &ModelParams::free()).unwrap();
    let v = verify_curve(&c, &wrong, (1e3, 1e4)).unwrap();
    assert!(v.exponent_error > 3.5);
}

#[test]
fn fermion_survival_exponent_from_a_curve() {
    let taus = log_grid(1e2, 1e3, 16);
    let c = free_curve(Observable::Survival, Statistics::Fermionized, 2, &taus);
    let law = predicted_law(Observable::Survival, Statistics::Fermionized, 2, &ModelParams::free()).unwrap();
    let v = verify_curve(&c, &law, (1e2, 1e3)).unwrap();
    assert!(v.exponent_error.abs() < 0.3, "{v:?}");
}

#[test]
fn cancelled_samples_are_refused() {
    let taus = log_grid(1e2, 1e3, 10);
    let c = free_curve(Observable::Survival, Statistics::Fermionized, 3, &taus);
    assert!(c.flags.iter().any(Option::is_some));
    let law = predicted_law(Observable::Survival, Statistics::Fermionized, 3, &ModelParams::free()).unwrap();
    assert!(matches!(verify_curve(&c, &law, (1e2, 1e3)), Err(Error::Refused(_))));
}

#[test]
fn ground_boson_one_body_uses_the_ground_mode() {
    let p = ModelParams::free();
    let g = derive_law_series(Observable::OneBody, Statistics::GroundBosons, 3, &p, None).unwrap();
    let one = derive_law_series(Observable::NonEscape, Statistics::GroundBosons, 1, &p, None).unwrap();
    assert!((g.coefficient.unwrap() / one.coefficient.unwrap() - 1.0).abs() < 1e-14);
    let f = derive_law_series(Observable::OneBody, Statistics::Fermionized, 2, &p, None).unwrap();
    // (1 + 1/4) / 2 of the ground-mode value
    assert!((f.coefficient.unwrap() / one.coefficient.unwrap() - 0.625).abs() < 1e-14);
}
