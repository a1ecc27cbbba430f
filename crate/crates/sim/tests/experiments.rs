//! Small-scale behavior of the experiment pipelines. Full-scale
//! quantitative gates live in the acceptance suite.

use contact_sim::config::Config;
use contact_sim::experiments::{
    calibrate, cutoff_experiment, density_experiment, good_pair_census, intersection_experiment,
    parallel_growth, Calibration,
};
use contact_sim::runner;

fn base_config() -> Config {
    Config {
        master_seed: 404,
        threads: 1,
        c_hat: Some(1.544),
        p_hat: Some(0.818),
        ..Config::default()
    }
}

fn cal(cfg: &Config) -> Calibration {
    let pool = runner::pool(1);
    calibrate(&pool, cfg).unwrap()
}

#[test]
fn calibration_prefers_user_supplied_values() {
    let cfg = base_config();
    let c = cal(&cfg);
    assert_eq!(c.c_hat, 1.544);
    assert_eq!(c.p_hat, 0.818);
    assert!(c.estimated.is_none());
}

#[test]
fn parallel_growth_matches_sequential_core_estimator() {
    let mut cfg = base_config();
    cfg.estimate.replicas = 400;
    cfg.estimate.horizon = 3.0;
    cfg.estimate.window = [1.0, 3.0];
    let pool = runner::pool(2);
    let par = parallel_growth(&pool, &cfg, 400).unwrap();
    let seq = contact_core::estimate::estimate_growth_rate(
        cfg.d,
        cfg.lambda,
        400,
        3.0,
        (1.0, 3.0),
        cfg.grid,
        contact_core::tree::TreeMode::Full,
        cfg.node_cap,
        cfg.master_seed,
    )
    .unwrap();
    assert_eq!(par.c_hat, seq.c_hat, "drivers must agree bit-exactly");
    assert_eq!(par.r2, seq.r2);
}

#[test]
fn cutoff_lambda_zero_never_hits() {
    let mut cfg = base_config();
    cfg.lambda = 0.0;
    cfg.cutoff.n_list = vec![100];
    cfg.cutoff.replicas = 200;
    let pool = runner::pool(1);
    let c = cal(&cfg);
    let (report, rows) = cutoff_experiment(&pool, &cfg, &c, false).unwrap();
    assert_eq!(report.points[0].hit_count, 0);
    assert_eq!(report.points[0].hit_by_t_minus, 0.0);
    assert!(rows.iter().all(|r| r.hit_time.is_none() && !r.occupied_at_t_plus));
}

#[test]
fn cutoff_duality_swap_is_consistent() {
    // Swapping the roles of (u, v) leaves the hit-probability estimate
    // unchanged within the two-sample 3-sigma bound.
    let mut cfg = base_config();
    cfg.cutoff.n_list = vec![200];
    cfg.cutoff.replicas = 800;
    let pool = runner::pool(1);
    let c = cal(&cfg);
    let (fwd, _) = cutoff_experiment(&pool, &cfg, &c, false).unwrap();
    let (bwd, _) = cutoff_experiment(&pool, &cfg, &c, true).unwrap();
    let (a, b) = (&fwd.points[0], &bwd.points[0]);
    let pa = a.hit_count as f64 / a.replicas as f64;
    let pb = b.hit_count as f64 / b.replicas as f64;
    let sigma = (a.hit_by_t_minus_se.powi(2)
        + b.hit_by_t_minus_se.powi(2)
        + (pa * (1.0 - pa) + pb * (1.0 - pb)) / a.replicas as f64)
        .sqrt();
    assert!(
        (pa - pb).abs() <= 3.0 * sigma.max(0.01),
        "hit prob {pa} vs swapped {pb}"
    );
}

#[test]
fn cutoff_uses_explore_engine_above_threshold() {
    let mut cfg = base_config();
    cfg.cutoff.n_list = vec![600];
    cfg.cutoff.replicas = 60;
    cfg.cutoff.full_engine_max_n = 500; // force grow-and-explore
    let pool = runner::pool(1);
    let c = cal(&cfg);
    let (report, _) = cutoff_experiment(&pool, &cfg, &c, false).unwrap();
    assert_eq!(report.points[0].replicas, 60);
    // Quenched mode cannot use the explore engine.
    cfg.cutoff.quenched = true;
    assert!(cutoff_experiment(&pool, &cfg, &c, false).is_err());
}

#[test]
fn quenched_mode_reuses_one_graph() {
    let mut cfg = base_config();
    cfg.cutoff.n_list = vec![100];
    cfg.cutoff.replicas = 50;
    cfg.cutoff.quenched = true;
    let pool = runner::pool(1);
    let c = cal(&cfg);
    // Runs without error and produces the same count of rows.
    let (report, rows) = cutoff_experiment(&pool, &cfg, &c, false).unwrap();
    assert_eq!(rows.len(), 50);
    assert_eq!(report.points.len(), 1);
}

#[test]
fn density_time_zero_is_full() {
    let mut cfg = base_config();
    cfg.density.n = 200;
    cfg.density.replicas = 10;
    // c_hat huge makes t_plus ~ 0.
    cfg.c_hat = Some(1e12);
    let pool = runner::pool(1);
    let c = cal(&cfg);
    let (report, densities) = density_experiment(&pool, &cfg, &c).unwrap();
    assert!(densities.iter().all(|&rho| rho == 1.0));
    assert_eq!(report.mean_density, 1.0);
}

#[test]
fn density_lambda_zero_decays_like_pure_death() {
    let mut cfg = base_config();
    cfg.lambda = 0.0;
    cfg.density.n = 500;
    cfg.density.replicas = 40;
    let pool = runner::pool(1);
    let c = cal(&cfg);
    let (report, _) = density_experiment(&pool, &cfg, &c).unwrap();
    // Pure death: E density = exp(-t_plus).
    let expected = (-report.t_plus).exp();
    let tol = 3.0 * (expected / (500.0 * 40.0)).sqrt() + 1e-3;
    assert!(
        (report.mean_density - expected).abs() < tol,
        "mean {} vs expected {}",
        report.mean_density,
        expected
    );
}

#[test]
fn intersection_trivial_cases() {
    let mut cfg = base_config();
    cfg.intersect.n = 100;
    cfg.intersect.replicas = 100;
    cfg.lambda = 0.0;
    let pool = runner::pool(1);
    let c = cal(&cfg);
    let (report, _) = intersection_experiment(&pool, &cfg, &c).unwrap();
    assert_eq!(report.intersect_prob, 0.0);
}

#[test]
fn census_threshold_monotonicity_and_trivial_rows() {
    let mut cfg = base_config();
    cfg.census.n = 40;
    cfg.census.replicas_per_source = 60;
    cfg.census.bootstrap = 20;
    cfg.census.slack_grid = vec![0.0, 0.3, 1.0];
    let pool = runner::pool(1);
    let c = cal(&cfg);
    let (report, pairs) = good_pair_census(&pool, &cfg, &c).unwrap();
    assert_eq!(pairs.len(), 40 * 39);
    // Good-pair fraction is non-decreasing as the threshold loosens.
    for w in report.points.windows(2) {
        assert!(
            w[1].good_pair_frac >= w[0].good_pair_frac,
            "monotonicity violated: {} then {}",
            w[0].good_pair_frac,
            w[1].good_pair_frac
        );
        assert!(w[1].threshold <= w[0].threshold);
    }
    // Slack 1.0 means threshold 0: every pair is good.
    let last = report.points.last().unwrap();
    assert_eq!(last.good_pair_frac, 1.0);
    assert_eq!(last.good_vertex_frac, 1.0);
    // Percentile-bootstrap intervals are ordered and in range (they need
    // not bracket the point estimate at knife-edge thresholds).
    for p in &report.points {
        assert!(p.good_pair_ci_lo <= p.good_pair_ci_hi);
        assert!((0.0..=1.0).contains(&p.good_pair_ci_lo));
        assert!((0.0..=1.0).contains(&p.good_pair_ci_hi));
    }
}

#[test]
fn census_lambda_zero_has_no_good_pairs() {
    let mut cfg = base_config();
    cfg.lambda = 0.0;
    cfg.census.n = 30;
    cfg.census.replicas_per_source = 40;
    cfg.census.bootstrap = 0;
    cfg.census.slack_grid = vec![0.1];
    let pool = runner::pool(1);
    let c = cal(&cfg);
    let (report, _) = good_pair_census(&pool, &cfg, &c).unwrap();
    assert_eq!(report.points[0].good_pair_frac, 0.0);
}
