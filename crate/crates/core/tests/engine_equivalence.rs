//! Development-scale distributional equivalences between the engines.
//! The acceptance suite in the companion crate runs the full-scale
//! versions; these use smaller replica counts to stay quick.

use contact_core::contact::run_until;
use contact_core::explore::{run_cover_tree, run_vanilla_conditioned_simple};
use contact_core::graph::{sample_simple, SimpleRegularGraph};
use contact_core::graphical::{percolate_extinction_time, sample_graphical};
use contact_core::rng::{replica_rng, seeded};
use contact_core::stats::ks_two_sample;

const CENSOR: f64 = 200.0;

/// Extinction time capped at the record horizon; both engines use the
/// same cap so the censoring atom matches under the null.
fn gillespie_extinction(reps: u64, seed_label: &str) -> Vec<f64> {
    let g = SimpleRegularGraph::complete(4);
    (0..reps)
        .map(|rep| {
            let mut rng = replica_rng(9, seed_label, rep);
            let out = run_until(&g, 1.0, &[0], CENSOR, None, None, &mut rng);
            out.hit.extinction_time.unwrap_or(CENSOR)
        })
        .collect()
}

#[test]
fn gillespie_and_graphical_extinction_times_agree() {
    let g = SimpleRegularGraph::complete(4);
    let a = gillespie_extinction(3000, "ks-gillespie");
    let b: Vec<f64> = (0..3000u64)
        .map(|rep| {
            let mut rng = replica_rng(10, "ks-graphical", rep);
            let rec = sample_graphical(4, 3, 1.0, CENSOR, &mut rng);
            percolate_extinction_time(&rec, &g, &[0]).unwrap_or(CENSOR)
        })
        .collect();
    let ks = ks_two_sample(&a, &b);
    assert!(ks.p_value > 0.01, "KS p = {} (D = {})", ks.p_value, ks.statistic);
}

/// Hitting time of vertex 1 from vertex 0, +inf when never hit; the
/// atom at +inf carries the miss probability into the KS comparison.
fn hit_or_inf(hit: &contact_core::contact::HitOutcome) -> f64 {
    hit.hit_time.unwrap_or(f64::INFINITY)
}

#[test]
fn vanilla_matches_two_phase_baseline() {
    let (n, d, lambda, horizon) = (8usize, 3usize, 1.5f64, 8.0f64);
    let reps = 3000u64;
    let vanilla: Vec<f64> = (0..reps)
        .map(|rep| {
            let mut rng = replica_rng(11, "ks-vanilla", rep);
            let out = run_vanilla_conditioned_simple(
                n, d, lambda, &[0], horizon, Some(&[1]), None, 1000, &mut rng,
            )
            .unwrap();
            hit_or_inf(&out.hit)
        })
        .collect();
    let two_phase: Vec<f64> = (0..reps)
        .map(|rep| {
            let mut rng = replica_rng(12, "ks-two-phase", rep);
            let (g, _) = sample_simple(n, d, &mut rng, 1000).unwrap();
            let out = run_until(&g, lambda, &[0], horizon, Some(&[1]), None, &mut rng);
            hit_or_inf(&out.hit)
        })
        .collect();
    let ks = ks_two_sample(&vanilla, &two_phase);
    assert!(ks.p_value > 0.01, "KS p = {} (D = {})", ks.p_value, ks.statistic);
}

#[test]
fn cover_tree_projection_matches_vanilla() {
    let (n, d, lambda, horizon) = (8usize, 3usize, 1.5f64, 8.0f64);
    let reps = 3000u64;
    let cover: Vec<f64> = (0..reps)
        .map(|rep| {
            let mut rng = replica_rng(13, "ks-cover", rep);
            let out =
                run_cover_tree(n, d, lambda, &[0], horizon, Some(&[1]), None, false, &mut rng)
                    .unwrap();
            hit_or_inf(&out.hit)
        })
        .collect();
    let vanilla: Vec<f64> = (0..reps)
        .map(|rep| {
            let mut rng = replica_rng(14, "ks-vanilla-b", rep);
            let out = contact_core::explore::run_vanilla(
                n, d, lambda, &[0], horizon, Some(&[1]), None, false, &mut rng,
            )
            .unwrap();
            hit_or_inf(&out.hit)
        })
        .collect();
    let ks = ks_two_sample(&cover, &vanilla);
    assert!(ks.p_value > 0.01, "KS p = {} (D = {})", ks.p_value, ks.statistic);
}

#[test]
fn multi_source_cover_tree_matches_direct_multi_source_run() {
    // General initial configuration: two sources, hitting a third vertex.
    let (n, d, lambda, horizon) = (10usize, 3usize, 1.2f64, 6.0f64);
    let reps = 2500u64;
    let cover: Vec<f64> = (0..reps)
        .map(|rep| {
            let mut rng = replica_rng(15, "ks-multi-cover", rep);
            let out = run_cover_tree(
                n,
                d,
                lambda,
                &[0, 5],
                horizon,
                Some(&[3]),
                None,
                false,
                &mut rng,
            )
            .unwrap();
            hit_or_inf(&out.hit)
        })
        .collect();
    let vanilla: Vec<f64> = (0..reps)
        .map(|rep| {
            let mut rng = replica_rng(16, "ks-multi-vanilla", rep);
            let out = contact_core::explore::run_vanilla(
                n,
                d,
                lambda,
                &[0, 5],
                horizon,
                Some(&[3]),
                None,
                false,
                &mut rng,
            )
            .unwrap();
            hit_or_inf(&out.hit)
        })
        .collect();
    let ks = ks_two_sample(&cover, &vanilla);
    assert!(ks.p_value > 0.01, "KS p = {} (D = {})", ks.p_value, ks.statistic);
}

#[test]
fn pair_order_invariance_two_sample() {
    // Relabeling order (u first vs v first) must not change the law of
    // the intersection indicator.
    let (n, d, lambda) = (8usize, 3usize, 1.5f64);
    let (t_u, t_v) = (2.0f64, 1.5f64);
    let reps = 4000u64;
    let count_hits = |label: &str, second_first: bool| -> u64 {
        (0..reps)
            .filter(|&rep| {
                let mut rng = replica_rng(17, label, rep);
                contact_core::explore::run_independent_pair(
                    n,
                    d,
                    lambda,
                    0,
                    1,
                    t_u,
                    t_v,
                    second_first,
                    &mut rng,
                )
                .unwrap()
                .intersects
            })
            .count() as u64
    };
    let a = count_hits("pair-uv", false);
    let b = count_hits("pair-vu", true);
    let p = contact_core::stats::two_proportion_p_value(a, reps, b, reps);
    assert!(p > 0.01, "order invariance rejected: p = {p} ({a} vs {b})");
}

#[test]
fn duality_of_hit_probabilities() {
    // P(v in xi^u_t) vs P(u in xi^v_t) within the two-sample 3-sigma
    // bound, on K4 and on one sampled (n=50, d=3) graph, t in {1, 3}.
    let mut rng = seeded(31);
    let k4 = SimpleRegularGraph::complete(4);
    let (g50, _) = sample_simple(50, 3, &mut rng, 1000).unwrap();
    let reps = 30_000u64;
    let cases: [(&str, &SimpleRegularGraph, u32, u32); 2] =
        [("K4", &k4, 0, 1), ("n50", &g50, 0, 25)];
    for (name, g, u, v) in cases {
        for t in [1.0, 3.0] {
            let mut forward = 0u64;
            let mut backward = 0u64;
            for _ in 0..reps {
                let out = run_until(g, 1.0, &[u], t, None, None, &mut rng);
                forward += out.state.is_infected(v) as u64;
                let out = run_until(g, 1.0, &[v], t, None, None, &mut rng);
                backward += out.state.is_infected(u) as u64;
            }
            let pa = forward as f64 / reps as f64;
            let pb = backward as f64 / reps as f64;
            let sigma =
                (pa * (1.0 - pa) / reps as f64 + pb * (1.0 - pb) / reps as f64).sqrt();
            assert!(
                (pa - pb).abs() <= 3.0 * sigma.max(1e-4),
                "duality gap on {name}: {pa} vs {pb} at t={t}"
            );
        }
    }
}
