use uav_harvest::analytic::{coverage_probability, mean_rate};
use uav_harvest::optimize::*;
use uav_harvest::{ModulationRule, NetworkConfig};

fn fig8(lambda_per_km2: f64) -> NetworkConfig {
    NetworkConfig {
        lambda: lambda_per_km2 * 1e-6,
        mu: 2000.0,
        w: 400.0,
        l: 500.0,
        h: 200.0,
        alpha: 4.0,
        tau: 10.0,
        ..Default::default()
    }
}

#[test]
fn objective_vanishes_at_zero_window() {
    assert_eq!(objective(&fig8(10.0), 0.0).unwrap().value, 0.0);
    assert!(objective(&fig8(10.0), 1.0).unwrap().value < 1e-2);
    assert!(objective(&fig8(10.0), 2500.0).is_err());
}

#[test]
fn objective_is_rate_over_bits() {
    let cfg = fig8(20.0);
    for w in [200.0, 700.0, 1500.0] {
        let o = objective(&cfg, w).unwrap().value;
        let r = mean_rate(&cfg.with_w(w), ModulationRule::FloorLog2).unwrap().value;
        let bits = ModulationRule::FloorLog2.bits(cfg.tau);
        assert!((o / (r / bits) - 1.0).abs() < 1e-10);
        assert_eq!(o, coverage_probability(&cfg.with_w(w)).unwrap().value);
    }
}

#[test]
fn optimum_dominates_sweep() {
    let opt = optimize_window(&fig8(10.0), 1.0).unwrap();
    assert!(!opt.non_unimodal && !opt.ambiguous && !opt.zero_objective);
    assert!(opt.sweep.is_unimodal());
    for p in &opt.sweep.points {
        assert!(opt.value >= p.value);
    }
    let ws: Vec<f64> = opt.sweep.points.iter().map(|p| p.parameter).collect();
    assert!(ws.windows(2).all(|p| p[0] < p[1]));
    assert_eq!(opt.sweep.points.len(), DEFAULT_GRID_POINTS);
}

#[test]
fn refinement_is_consistent() {
    let cfg = fig8(30.0);
    let coarse = optimize_window(&cfg, 20.0).unwrap();
    let fine = optimize_window(&cfg, 10.0).unwrap();
    assert!((coarse.w_star - fine.w_star).abs() < 20.0);
}

#[test]
fn empty_network_flags_zero_objective() {
    let opt = optimize_window(&fig8(0.0), 5.0).unwrap();
    assert!(opt.zero_objective);
    assert_eq!(opt.w_star, 2000.0 / DEFAULT_GRID_POINTS as f64);
}

#[test]
fn power_scaling_leaves_objective_unchanged() {
    let cfg = fig8(20.0);
    let scaled = NetworkConfig { p: 7.0, ..cfg.clone() };
    let a = objective(&cfg, 600.0).unwrap().value;
    let b = objective(&scaled, 600.0).unwrap().value;
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn optimum_shrinks_with_density() {
    let w: Vec<f64> = [10.0, 20.0, 30.0]
        .iter()
        .map(|&l| optimize_window(&fig8(l), 5.0).unwrap().w_star)
        .collect();
    assert!(w[0] > w[1] && w[1] > w[2], "{w:?}");
}

#[test]
fn rejects_bad_tolerance_and_grid() {
    assert!(optimize_window(&fig8(10.0), 0.0).is_err());
    assert!(sweep_window(&fig8(10.0), 0).is_err());
}
