use num_complex::Complex64;
use std::f64::consts::PI;

use tunnel_core::manybody::*;
use tunnel_core::model::*;
use tunnel_core::numerics::{fit_power_law, linear_grid, log_grid, GaussLegendre};
use tunnel_core::Error;

fn free_body(n_max: usize, tau_min: f64) -> ManyBody {
    ManyBody::new(
        &ModelParams::free(),
        EvolutionMethod::ExactFree,
        WorkingPrecision::Standard,
        n_max,
        tau_min,
    )
    .unwrap()
}

#[test]
fn matrices_start_as_the_identity() {
    let mb = free_body(3, 0.0);
    for kind in [MatrixKind::Region, MatrixKind::Survival] {
        let m = mb.overlap(0.0, 3, kind).unwrap();
        for n in 1..=3 {
            for k in 1..=3 {
                let want = if n == k { 1.0 } else { 0.0 };
                assert_eq!(m.entry(n, k), Complex64::new(want, 0.0));
            }
        }
        // and stay close to it just after release
        let m = mb.overlap(1e-4, 3, kind).unwrap();
        for n in 1..=3 {
            for k in 1..=3 {
                let want = if n == k { 1.0 } else { 0.0 };
                assert!((m.entry(n, k).norm() - want).abs() < 1e-4);
            }
        }
    }
    for s in Statistics::ALL {
        assert_eq!(mb.nonescape(0.0, 3, s).unwrap().value, 1.0);
        assert_eq!(mb.survival(0.0, 3, s).unwrap().value, 1.0);
    }
    assert_eq!(mb.one_body(0.0, 3).unwrap(), 1.0);
}

#[test]
fn very_short_times_resolve_the_edge_ripples() {
    // 1 - P_1 grows like tau^{3/2}; the region integral still converges
    let mb = free_body(2, 1e-5);
    let p1 = mb.nonescape(1e-5, 1, Statistics::Fermionized).unwrap();
    assert!(
        p1.trusted && (1.0 - p1.value) > 0.0 && (1.0 - p1.value) < 1e-6,
        "{p1:?}"
    );
    let p2 = mb.nonescape(1e-5, 2, Statistics::Fermionized).unwrap();
    assert!(p2.trusted && (p2.value - 1.0).abs() < 1e-5, "{p2:?}");
}

#[test]
fn single_particle_entry_is_the_nonescape_probability() {
    let p = ModelParams::free();
    let mb = free_body(1, 1.0);
    let m = mb.overlap(1.0, 1, MatrixKind::Region).unwrap();
    let direct = tunnel_core::numerics::integrate(
        |x| Complex64::from(evolve_free(1, x, 1.0, &p).unwrap().norm_sqr()),
        (0.0, 1.0),
        1e-13,
    )
    .unwrap();
    assert!((m.entry(1, 1) - direct).norm() < 1e-12);
    for s in Statistics::ALL {
        let v = mb.nonescape(1.0, 1, s).unwrap().value;
        assert!((v - direct.re).abs() < 1e-12);
    }
}

#[test]
fn long_time_region_elements_follow_the_checkerboard() {
    let mb = free_body(2, 1e3);
    let tau = 1e3;
    let m = mb.overlap(tau, 2, MatrixKind::Region).unwrap();
    let c = 4.0 / (3.0 * PI.powi(3)) / tau.powi(3);
    for n in 1..=2 {
        for k in 1..=2 {
            let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            let want = c * sign / (n * k) as f64;
            let got = m.entry(n, k);
            assert!(((got.re - want) / want).abs() < 0.01, "({n},{k}): {got} vs {want}");
            assert!(got.im.abs() < 0.01 * want.abs());
        }
    }
}

#[test]
fn region_matrices_are_bounded_projections() {
    // every principal minor of M and of 1 - M is nonnegative
    let mb = free_body(3, 0.1);
    for &tau in &[0.1, 1.0, 10.0] {
        let m = mb.overlap(tau, 3, MatrixKind::Region).unwrap();
        assert!(m.hermitian_drift() < 1e-15);
        for mask in 1u32..8 {
            let idx: Vec<usize> = (0..3).filter(|i| mask & (1 << i) != 0).collect();
            let sub = |shift: bool| -> Vec<Complex64> {
                let mut v = Vec::new();
                for &i in &idx {
                    for &j in &idx {
                        let e = m.entry(i + 1, j + 1);
                        let id = if i == j { 1.0 } else { 0.0 };
                        v.push(if shift { Complex64::new(id, 0.0) - e } else { e });
                    }
                }
                v
            };
            assert!(determinant(&sub(false)).unwrap().re > -1e-10);
            assert!(determinant(&sub(true)).unwrap().re > -1e-10);
        }
    }
}

#[test]
fn ground_bosons_obey_the_product_law() {
    let mb = free_body(3, 0.5);
    for &tau in &[0.5, 5.0, 50.0, 500.0] {
        let p1 = mb.nonescape(tau, 1, Statistics::GroundBosons).unwrap().value;
        let s1 = mb.survival(tau, 1, Statistics::GroundBosons).unwrap().value;
        for n in 2..=3 {
            let pn = mb.nonescape(tau, n, Statistics::GroundBosons).unwrap().value;
            let sn = mb.survival(tau, n, Statistics::GroundBosons).unwrap().value;
            assert!((pn - p1.powi(n as i32)).abs() <= 1e-12 * pn.max(1e-300));
            assert!((sn - s1.powi(n as i32)).abs() <= 1e-12 * sn.max(1e-300));
        }
    }
}

#[test]
fn fermionized_long_time_coefficients() {
    let mb = free_body(2, 60.0);
    let tau = 60.0;
    let p2 = mb.nonescape(tau, 2, Statistics::Fermionized).unwrap();
    assert!(p2.trusted);
    let want = 3.0 / (175.0 * PI.powi(10));
    assert!((p2.value * tau.powi(10) / want - 1.0).abs() < 1e-3);
    let s1 = mb.survival(1e3, 1, Statistics::Fermionized).unwrap().value;
    assert!((s1 * 1e9 / (8.0 / PI.powi(5)) - 1.0).abs() < 1e-3);
    let s2 = mb.survival(1e3, 2, Statistics::Fermionized).unwrap();
    assert!(s2.trusted);
    assert!((s2.value * 1e30 / (729.0 / (16.0 * PI.powi(18))) - 1.0).abs() < 1e-3);
}

#[test]
fn fermionized_values_ignore_mode_order() {
    let mb = free_body(3, 2.0);
    let m = mb.overlap(2.0, 3, MatrixKind::Region).unwrap();
    let det = m.determinant();
    let survival = mb.overlap(2.0, 3, MatrixKind::Survival).unwrap();
    let sdet = survival.determinant();
    for perm in [[1, 0, 2], [2, 0, 1], [2, 1, 0]] {
        let permute = |mat: &OverlapMatrix| -> Vec<Complex64> {
            let mut v = Vec::new();
            for &i in &perm {
                for &j in &perm {
                    v.push(mat.entry(i + 1, j + 1));
                }
            }
            v
        };
        let d = determinant(&permute(&m)).unwrap();
        assert!((d - det).norm() < 1e-12);
        let s = determinant(&permute(&survival)).unwrap();
        assert!((s.norm_sqr() - sdet.norm_sqr()).abs() < 1e-12);
    }
}

#[test]
fn two_body_probabilities_match_double_quadrature() {
    let p = ModelParams::free();
    let mb = free_body(2, 0.5);
    let rule = GaussLegendre::<f64>::new(20);
    for &tau in &[0.5, 5.0] {
        let panels = 40;
        let mut pts = Vec::new();
        for i in 0..panels {
            let lo = i as f64 / panels as f64;
            for (x, w) in rule.mapped(lo, lo + 1.0 / panels as f64) {
                let f1 = evolve_free(1, x, tau, &p).unwrap();
                let f2 = evolve_free(2, x, tau, &p).unwrap();
                pts.push((w, f1, f2));
            }
        }
        let (mut fermi, mut bose) = (0.0, 0.0);
        for &(w1, a1, b1) in &pts {
            for &(w2, a2, b2) in &pts {
                let direct = a1 * b2;
                let exchange = b1 * a2;
                fermi += w1 * w2 * (direct - exchange).norm_sqr() / 2.0;
                bose += w1 * w2 * (direct + exchange).norm_sqr() / 2.0;
            }
        }
        let f = mb.nonescape(tau, 2, Statistics::Fermionized).unwrap().value;
        let b = mb.nonescape(tau, 2, Statistics::ExcitedBosons).unwrap().value;
        assert!((f - fermi).abs() < 1e-8, "tau {tau}: {f} vs {fermi}");
        assert!((b - bose).abs() < 1e-8, "tau {tau}: {b} vs {bose}");
    }
}

#[test]
fn one_body_fraction_is_statistics_blind_and_falls_as_cube() {
    let mb = free_body(3, 1e3);
    let taus = log_grid(1e3, 1e4, 12);
    let c = mb
        .curve(Observable::OneBody, Statistics::Fermionized, 3, &taus)
        .unwrap();
    let e = mb
        .curve(Observable::OneBody, Statistics::ExcitedBosons, 3, &taus)
        .unwrap();
    assert_eq!(c.values, e.values);
    let fit = c.fit((1e3, 1e4)).unwrap();
    assert!((fit.exponent + 3.0).abs() < 0.1);
}

#[test]
fn extended_precision_agrees_where_double_is_reliable() {
    let p = ModelParams::free();
    let std = free_body(3, 20.0);
    let ext = ManyBody::new(&p, EvolutionMethod::ExactFree, WorkingPrecision::Extended, 3, 20.0).unwrap();
    for kind in [MatrixKind::Region, MatrixKind::Survival] {
        let a = std.overlap(20.0, 3, kind).unwrap();
        let b = ext.evolver().overlap_extended(20.0, 3, kind).unwrap().to_f64();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert!((x - y).norm() < 1e-12 * a.max_entry());
        }
    }
    let s = ext.survival(500.0, 3, Statistics::Fermionized).unwrap();
    assert!(s.trusted && s.cancellation < 1e-18);
    let want = 8.0e6 / (531441.0 * PI.powi(39));
    assert!((s.value * 500f64.powi(21) / want - 1.0).abs() < 1e-4);
    // standard precision flags the same point
    assert!(!std.survival(500.0, 3, Statistics::Fermionized).unwrap().trusted);
}

#[test]
fn extended_precision_needs_the_closed_form() {
    let p = ModelParams::winter(10.0).unwrap();
    let e = ManyBody::new(&p, EvolutionMethod::Rse, WorkingPrecision::Extended, 2, 1.0).unwrap_err();
    assert!(matches!(e, Error::Configuration(_)));
    let e = ManyBody::new(&p, EvolutionMethod::ExactFree, WorkingPrecision::Standard, 2, 1.0).unwrap_err();
    assert!(e.to_string().contains("eta = 0"));
}

#[test]
fn resonance_era_rate_is_n_gamma() {
    let p = ModelParams::winter(100.0).unwrap();
    let g = find_poles(&p, 1).unwrap()[0].gamma;
    let mb = ManyBody::new(&p, EvolutionMethod::Rse, WorkingPrecision::Standard, 2, 50.0).unwrap();
    let taus = linear_grid(1.0 / g, 4.0 / g, 16);
    for n in 1..=2 {
        let c = mb
            .curve(Observable::NonEscape, Statistics::GroundBosons, n, &taus)
            .unwrap();
        let r = decay_rate(&c).unwrap();
        for v in &r.values {
            assert!((v / (n as f64 * g) - 1.0).abs() < 0.05);
        }
    }
}

#[test]
fn single_particle_statistics_coincide_under_rse() {
    let p = ModelParams::winter(10.0).unwrap();
    let mb = ManyBody::new(&p, EvolutionMethod::Rse, WorkingPrecision::Standard, 2, 1.0).unwrap();
    let a = mb.nonescape(3.0, 1, Statistics::Fermionized).unwrap().value;
    let b = mb.nonescape(3.0, 1, Statistics::ExcitedBosons).unwrap().value;
    let c = mb.nonescape(3.0, 1, Statistics::GroundBosons).unwrap().value;
    assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
    let m = mb.overlap(3.0, 2, MatrixKind::Region).unwrap();
    assert!(m.entry(1, 1).re < 1.0 && m.entry(1, 1).re > 0.0);
}

#[test]
fn crossover_moves_later_with_barrier_strength() {
    let mut last = 0.0;
    for eta in [5.0, 10.0, 20.0] {
        let p = ModelParams::winter(eta).unwrap();
        let c = crossover_time(&p, 1, Statistics::GroundBosons, EvolutionMethod::Rse).unwrap();
        assert!(c.tau > last);
        last = c.tau;
    }
    let p = ModelParams::winter(10.0).unwrap();
    let one = crossover_time(&p, 1, Statistics::GroundBosons, EvolutionMethod::Rse).unwrap();
    let two = crossover_time(&p, 2, Statistics::GroundBosons, EvolutionMethod::Rse).unwrap();
    assert!((two.tau / one.tau - 1.0).abs() < 0.2);
}

#[test]
fn crossover_needs_a_barrier() {
    let e = crossover_time(
        &ModelParams::free(),
        1,
        Statistics::GroundBosons,
        EvolutionMethod::ExactFree,
    );
    assert!(matches!(e, Err(Error::Configuration(_))));
}

#[test]
fn curve_fit_recovers_the_boson_exponent() {
    let mb = free_body(3, 1e3);
    let taus = log_grid(1e3, 1e4, 10);
    for n in 2..=3 {
        let c = mb
            .curve(Observable::NonEscape, Statistics::GroundBosons, n, &taus)
            .unwrap();
        let fit = c.fit((1e3, 1e4)).unwrap();
        assert!((fit.exponent / (-3.0 * n as f64) - 1.0).abs() < 0.02);
        let raw = fit_power_law(&c.taus, &c.values, (1e3, 1e4)).unwrap();
        assert_eq!(raw, fit);
    }
}
