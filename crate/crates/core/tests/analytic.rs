use proptest::prelude::*;
use uav_harvest::analytic::*;
use uav_harvest::model::units::dbm_to_watts;
use uav_harvest::quadrature::QuadratureSpec;
use uav_harvest::{Mode, ModulationRule, NetworkConfig};

fn fig3(alpha: f64) -> NetworkConfig {
    NetworkConfig {
        lambda: 1e-3,
        mu: 2000.0,
        w: 250.0,
        l: 500.0,
        h: 250.0,
        alpha,
        pathloss_ref: 1000.0,
        ..Default::default()
    }
}

fn fig4(w: f64) -> NetworkConfig {
    NetworkConfig {
        lambda: 1e-4,
        mu: 1000.0,
        w,
        l: 500.0,
        h: 200.0,
        alpha: 4.0,
        ..Default::default()
    }
}

fn table2() -> NetworkConfig {
    NetworkConfig {
        lambda: 0.1,
        mu: 200.0,
        w: 100.0,
        l: 100.0,
        h: 100.0,
        alpha: 2.0,
        p: dbm_to_watts(23.0),
        ..Default::default()
    }
}

/// Midpoint rule on an `n x n` grid of the window deficit
/// `1 - (1 + s p Ω/m g)^-m`, averaged.
fn midpoint_deficit(cfg: &NetworkConfig, s: f64, i: i64, j: i64, n: usize) -> f64 {
    let xc = i as f64 * cfg.mu;
    let yc = j as f64 * cfg.nu.unwrap_or(0.0);
    let a = s * cfg.p * cfg.omega / cfg.m as f64;
    let mut total = 0.0;
    for ix in 0..n {
        let x = xc - cfg.w / 2.0 + (ix as f64 + 0.5) * cfg.w / n as f64;
        let mut row = 0.0;
        for iy in 0..n {
            let y = yc - cfg.l / 2.0 + (iy as f64 + 0.5) * cfg.l / n as f64;
            let d = (x * x + y * y + cfg.h * cfg.h).sqrt() / cfg.pathloss_ref;
            row += 1.0 - (1.0 + a * d.powf(-cfg.alpha)).powi(-(cfg.m as i32));
        }
        total += row;
    }
    total / (n * n) as f64
}

#[test]
fn factor_window_matches_dense_grid() {
    let cfg = fig3(3.0);
    let ev = LaplaceEvaluator::new(&cfg, false).unwrap();
    let f = ev.factor_window(1.0, 1, 0).unwrap();
    let reference = 1.0 - cfg.occupancy() * midpoint_deficit(&cfg, 1.0, 1, 0, 1000);
    assert!(((1.0 - f) / (1.0 - reference) - 1.0).abs() < 1e-6);
    assert!((f / reference - 1.0).abs() < 1e-6);
}

#[test]
fn rayleigh_interference_matches_direct_product() {
    // Rayleigh specialization: integrand 1/(1 + s p g), evaluated as a
    // plain product of midpoint-rule window factors.
    let cfg = fig3(3.5);
    let ev = LaplaceEvaluator::new(&cfg, true).unwrap();
    for &s in &[0.05, 0.5, 5.0] {
        let mut direct = 1.0;
        for i in 1..=300i64 {
            let f = 1.0 - cfg.occupancy() * midpoint_deficit(&cfg, s, i, 0, 200);
            direct *= f * f;
        }
        let got = laplace_interference(&ev, s).unwrap();
        assert!((got.value - direct).abs() < 1e-6, "s={s}: {} vs {direct}", got.value);
    }
}

#[test]
fn second_order_sum_matches_finite_difference() {
    let cfg = NetworkConfig {
        m: 2,
        omega: 1.5,
        ..fig3(3.0)
    };
    let ev = LaplaceEvaluator::with_options(
        &cfg,
        true,
        ProductTruncation {
            k_max_cap: 1,
            ..Default::default()
        },
        QuadratureSpec::default(),
    )
    .unwrap();
    for &s in &[0.2, 2.0, 20.0] {
        let l = |x: f64| ev.evaluate(x).unwrap();
        assert_eq!(l(s).rings, 1);
        let h = 1e-6 * s;
        let deriv = (l(s + h).value - l(s - h).value) / (2.0 * h);
        let expect = l(s).value - s * deriv;
        let got = laplace_derivative_sum(&ev, s, 2).unwrap().value;
        assert!((got / expect - 1.0).abs() < 1e-4, "s={s}: {got} vs {expect}");
    }
}

#[test]
fn derivative_sum_order_one_is_the_transform() {
    let ev = LaplaceEvaluator::new(&fig3(2.5), true).unwrap();
    for &s in &[0.01, 1.0, 100.0] {
        assert_eq!(
            laplace_derivative_sum(&ev, s, 1).unwrap().value,
            laplace_interference(&ev, s).unwrap().value
        );
    }
    let small = laplace_derivative_sum(&ev, 1e-12, 3).unwrap().value;
    assert!((small - 1.0).abs() < 1e-9);
    assert!(matches!(
        laplace_derivative_sum(&ev, 1.0, 5),
        Err(AnalyticError::UnsupportedOrder { order: 5, cap: 4 })
    ));
}

fn all_evaluators() -> Vec<(String, LaplaceEvaluator)> {
    let lattice = NetworkConfig {
        mode: Mode::Lattice,
        nu: Some(1000.0),
        mu: 1000.0,
        w: 500.0,
        l: 1000.0,
        h: 200.0,
        lambda: 1e-4,
        ..Default::default()
    };
    let mut out = Vec::new();
    for (name, cfg) in [("1d", fig3(3.0)), ("2d", lattice)] {
        for center in [false, true] {
            for noise in [0.0, 1e-3] {
                let ev = LaplaceEvaluator::new(&cfg, center).unwrap().with_noise(noise);
                out.push((format!("{name} exclude={center} noise={noise}"), ev));
            }
        }
    }
    out
}

#[test]
fn normalized_at_zero() {
    for (name, ev) in all_evaluators() {
        let v = ev.evaluate(0.0).unwrap().value;
        assert!((v - 1.0).abs() <= 1e-12, "{name}: {v}");
    }
}

#[test]
fn nonincreasing_on_log_grid() {
    for (name, ev) in all_evaluators() {
        let mut prev = 1.0;
        for k in 0..50 {
            let s = 10f64.powf(-4.0 + 7.0 * k as f64 / 49.0);
            let v = ev.evaluate(s).unwrap().value;
            assert!(v <= prev && v > 0.0, "{name} s={s}: {v} > {prev}");
            prev = v;
        }
    }
}

#[test]
fn noise_multiplies_by_exponential() {
    let ev = LaplaceEvaluator::new(&table2(), true).unwrap();
    let n0 = dbm_to_watts(-104.0);
    for &s in &[1e3, 1e6, 1e9] {
        let plain = laplace_interference(&ev, s).unwrap().value;
        let noisy = laplace_interference_plus_noise(&ev, s, n0).unwrap().value;
        assert!((noisy - plain * (-s * n0).exp()).abs() <= 1e-14);
        assert_eq!(laplace_interference_plus_noise(&ev, s, 0.0).unwrap().value, plain);
    }
}

#[test]
fn interference_exceeds_noise_in_table2_regime() {
    let ev = LaplaceEvaluator::new(&table2(), true).unwrap();
    let n0 = dbm_to_watts(-104.0);
    for k in 0..20 {
        let s = 10f64.powf(8.0 + 5.0 * k as f64 / 19.0);
        let li = laplace_interference(&ev, s).unwrap().value;
        assert!(li < (-s * n0).exp(), "s={s}");
    }
}

#[test]
fn laplace_ordered_by_path_loss_exponent() {
    let evs: Vec<_> = [2.5, 3.0, 3.5]
        .iter()
        .map(|&a| LaplaceEvaluator::new(&fig3(a), false).unwrap())
        .collect();
    for k in 0..20 {
        let s = 10f64.powf(-3.0 + 3.0 * k as f64 / 19.0);
        let v: Vec<f64> = evs.iter().map(|e| laplace_shot_noise(e, s).unwrap().value).collect();
        assert!(v[0] > v[1] && v[1] > v[2], "s={s}: {v:?}");
    }
}

#[test]
fn wrong_center_mode_is_rejected() {
    let ev = LaplaceEvaluator::new(&fig3(3.0), true).unwrap();
    assert!(laplace_shot_noise(&ev, 1.0).is_err());
}

#[test]
fn coverage_bounded_by_occupancy() {
    for w in [125.0, 500.0, 1000.0] {
        let cfg = fig4(w);
        let q = cfg.occupancy();
        let c = coverage_probability(&cfg).unwrap();
        assert!(c.value <= q + 1e-10);
        let tiny = coverage_probability(&cfg.with_tau(1e-9)).unwrap();
        assert!((tiny.value - q).abs() < 1e-6, "{} vs {q}", tiny.value);
    }
}

#[test]
fn coverage_is_occupancy_times_conditional() {
    let cfg = fig4(500.0);
    let c = coverage_probability(&cfg).unwrap().value;
    let cc = conditional_coverage(&cfg).unwrap().value;
    assert!((c / (cfg.occupancy() * cc) - 1.0).abs() < 1e-12);
    assert!(coverage_probability(&cfg.with_tau(1e12)).unwrap().value < 1e-6);
}

#[test]
fn occupancy_of_dense_small_window() {
    let cfg = NetworkConfig {
        lambda: 5e-4,
        w: 100.0,
        l: 100.0,
        mu: 200.0,
        ..Default::default()
    };
    assert!((cfg.occupancy() - (1.0 - (-5f64).exp())).abs() < 1e-15);
    assert!((cfg.occupancy() - 0.9933).abs() < 5e-5);
}

#[test]
fn coverage_invariant_to_power_without_noise() {
    for cfg in [fig4(500.0), fig3(2.5), table2()] {
        let a = coverage_probability(&cfg).unwrap().value;
        let b = coverage_probability(&NetworkConfig {
            p: cfg.p * 10.0,
            ..cfg.clone()
        })
        .unwrap()
        .value;
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }
}

#[test]
fn zero_density_gives_zero_coverage() {
    let cfg = fig4(500.0).with_lambda(0.0);
    assert_eq!(coverage_probability(&cfg).unwrap().value, 0.0);
    // harvested data by continuity: sole device, no interference
    let d = harvested_data(&cfg, ModulationRule::Fixed(2)).unwrap().value;
    let cc = conditional_coverage(&cfg).unwrap().value;
    assert!((d - cc * cfg.w / cfg.v).abs() < 1e-12);
}

#[test]
fn rate_scales_coverage_by_bits() {
    let cfg = fig4(500.0).with_tau(3.0);
    let c = coverage_probability(&cfg).unwrap().value;
    let r = mean_rate(&cfg, ModulationRule::FloorLog2).unwrap().value;
    assert!((r - 2.0 * c).abs() < 1e-15);
    let low = fig4(500.0).with_tau(0.5);
    assert_eq!(mean_rate(&low, ModulationRule::FloorLog2).unwrap().value, 0.0);
    let cr = conditional_rate(&cfg, ModulationRule::FloorLog2).unwrap().value;
    assert!((cr * cfg.occupancy() - r).abs() < 1e-14);
}

#[test]
fn harvested_data_speed_and_spacing() {
    let cfg = NetworkConfig {
        lambda: 1e-3,
        mu: 2000.0,
        w: 500.0,
        l: 500.0,
        h: 200.0,
        alpha: 3.5,
        v: 30.0,
        ..Default::default()
    };
    let m = ModulationRule::FloorLog2;
    let d1 = harvested_data(&cfg, m).unwrap().value;
    let d2 = harvested_data(&cfg.with_v(60.0), m).unwrap().value;
    assert!((d2 - d1 / 2.0).abs() <= 1e-12 * d1);
    let mut prev = 0.0;
    for mu in [1000.0, 2000.0, 4000.0] {
        let d = harvested_data(&NetworkConfig { mu, ..cfg.clone() }, m).unwrap().value;
        assert!(d >= prev);
        prev = d;
    }
}

#[test]
fn lattice_with_distant_rows_matches_strip() {
    let strip = NetworkConfig {
        lambda: 1e-4,
        mu: 1000.0,
        w: 500.0,
        l: 1000.0,
        h: 200.0,
        alpha: 4.0,
        ..Default::default()
    };
    let lattice = NetworkConfig {
        mode: Mode::Lattice,
        nu: Some(100.0 * strip.mu),
        ..strip.clone()
    };
    let a = coverage_probability(&strip).unwrap().value;
    let b = coverage_probability_2d(&lattice).unwrap().value;
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    assert!(b <= a);
    assert!(coverage_probability_2d(&strip).is_err());
}

#[test]
fn gamma_ccdf_routes_agree() {
    for m in 1..=4 {
        let f = uav_harvest::FadingModel::new(m, 1.7);
        for &x in &[1e-3, 0.1, 1.0, 3.0, 10.0] {
            assert!((f.ccdf(x) - f.ccdf_incomplete_gamma(x)).abs() < 1e-10);
        }
    }
}

fn arb_config() -> impl Strategy<Value = NetworkConfig> {
    (
        1e-6f64..1e-3,
        500.0f64..3000.0,
        0.05f64..1.0,
        50.0f64..1000.0,
        50.0f64..400.0,
        2.2f64..5.0,
        1u32..=3,
        0.5f64..2.0,
    )
        .prop_map(|(lambda, mu, wr, l, h, alpha, m, omega)| NetworkConfig {
            lambda,
            mu,
            w: wr * mu,
            l,
            h,
            alpha,
            m,
            omega,
            ..Default::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transforms_lie_in_unit_interval(cfg in arb_config(), ls in -12.0f64..-4.0) {
        let s = 10f64.powf(ls);
        let shot = LaplaceEvaluator::new(&cfg, false).unwrap().evaluate(s).unwrap().value;
        let intf = LaplaceEvaluator::new(&cfg, true).unwrap().evaluate(s).unwrap().value;
        prop_assert!(shot > 0.0 && shot <= 1.0);
        prop_assert!(intf >= shot && intf <= 1.0);
        let later = LaplaceEvaluator::new(&cfg, true).unwrap().evaluate(2.0 * s).unwrap().value;
        prop_assert!(later <= intf);
    }

    #[test]
    fn coverage_within_occupancy(cfg in arb_config(), tau_db in -10.0f64..20.0) {
        let cfg = cfg.with_tau(10f64.powf(tau_db / 10.0));
        let c = coverage_probability(&cfg).unwrap().value;
        prop_assert!(c >= 0.0 && c <= cfg.occupancy() + 1e-10);
    }
}
