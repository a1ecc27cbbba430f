//! Validates the exact CTMC oracle against two independent routes: a
//! Runge-Kutta integration of the master equation (healthy-site rate
//! formulation) and a large Monte Carlo cross-check.

use contact_core::contact::{run_until, InfectionState};
use contact_core::ctmc::{exact_extinction_probability, exact_hit_probability};
use contact_core::graph::{SimpleRegularGraph, Topology};
use contact_core::oracle::for_each_matching;
use contact_core::rng::seeded;
use contact_core::graph::{sample_matching, Multigraph};

/// Master-equation right-hand side, built from the healthy-site view:
/// a healthy vertex w becomes infected at rate lambda times its number
/// of infected neighbors; an infected vertex recovers at rate 1.
fn master_rhs(g: &SimpleRegularGraph, lambda: f64, pi: &[f64]) -> Vec<f64> {
    let n = g.n();
    let mut out = vec![0.0; pi.len()];
    for (s, &p) in pi.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for v in 0..n {
            if s & (1 << v) != 0 {
                // recovery v: s -> s without v
                out[s & !(1 << v)] += p;
                out[s] -= p;
            } else {
                let infected_neighbors = g
                    .neighbors(v as u32)
                    .iter()
                    .filter(|&&w| s & (1 << w) != 0)
                    .count();
                if infected_neighbors > 0 {
                    let rate = lambda * infected_neighbors as f64;
                    out[s | (1 << v)] += p * rate;
                    out[s] -= p * rate;
                }
            }
        }
    }
    out
}

fn rk4_distribution(g: &SimpleRegularGraph, lambda: f64, init: u32, t: f64) -> Vec<f64> {
    let states = 1usize << g.n();
    let mut pi = vec![0.0; states];
    pi[1usize << init] = 1.0;
    let steps = (t / 5e-4).ceil() as usize;
    let h = t / steps as f64;
    for _ in 0..steps {
        let k1 = master_rhs(g, lambda, &pi);
        let mid1: Vec<f64> = pi.iter().zip(&k1).map(|(p, k)| p + 0.5 * h * k).collect();
        let k2 = master_rhs(g, lambda, &mid1);
        let mid2: Vec<f64> = pi.iter().zip(&k2).map(|(p, k)| p + 0.5 * h * k).collect();
        let k3 = master_rhs(g, lambda, &mid2);
        let end: Vec<f64> = pi.iter().zip(&k3).map(|(p, k)| p + h * k).collect();
        let k4 = master_rhs(g, lambda, &end);
        for i in 0..states {
            pi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    pi
}

#[test]
fn uniformization_matches_rk4_on_single_edge_and_triangle() {
    for (g, lambda, t) in [
        (SimpleRegularGraph::single_edge(), 1.0, 1.0),
        (SimpleRegularGraph::single_edge(), 2.5, 0.7),
        (SimpleRegularGraph::cycle(3), 1.3, 2.0),
    ] {
        let pi = rk4_distribution(&g, lambda, 0, t);
        for v in 0..g.n() as u32 {
            let expected: f64 = pi
                .iter()
                .enumerate()
                .filter(|(s, _)| s & (1 << v) != 0)
                .map(|(_, p)| p)
                .sum();
            let got = exact_hit_probability(&g, lambda, 0, v, t).unwrap();
            assert!(
                (got - expected).abs() < 1e-8,
                "occupancy mismatch: v={v}, got {got}, rk4 {expected}"
            );
        }
        let got = exact_extinction_probability(&g, lambda, &[0], t).unwrap();
        assert!((got - pi[0]).abs() < 1e-8, "extinction mismatch");
    }
}

#[test]
fn single_edge_oracle_matches_ten_million_gillespie_replicas() {
    // The derived cross-check pinning the oracle to the simulation path:
    // P(v in xi^u_1) on the single edge at lambda = 1.
    let g = SimpleRegularGraph::single_edge();
    let exact = exact_hit_probability(&g, 1.0, 0, 1, 1.0).unwrap();
    let mut rng = seeded(0x5eed);
    let replicas = 10_000_000u64;
    let mut hits = 0u64;
    for _ in 0..replicas {
        let out = run_until(&g, 1.0, &[0], 1.0, None, None, &mut rng);
        if out.state.is_infected(1) {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / replicas as f64;
    let se = (exact * (1.0 - exact) / replicas as f64).sqrt();
    assert!(
        (p_hat - exact).abs() < 4.0 * se,
        "p_hat {p_hat} vs exact {exact} (se {se})"
    );
}

#[test]
fn simple_frequency_matches_exhaustive_enumeration_n4_d3() {
    // Exact fraction of simple outcomes among all perfect matchings of
    // 12 half-edges, vs the empirical frequency of sample_matching.
    let (n, d) = (4usize, 3usize);
    let mut total = 0u64;
    let mut simple = 0u64;
    for_each_matching(n * d, &mut |partner| {
        total += 1;
        let g = Multigraph::from_partner(n, d, partner.to_vec()).unwrap();
        if g.is_simple() {
            simple += 1;
        }
    });
    assert_eq!(total, 10395); // 11!!
    let exact = simple as f64 / total as f64;

    let mut rng = seeded(77);
    let reps = 40_000u64;
    let mut hits = 0u64;
    for _ in 0..reps {
        if sample_matching(n, d, &mut rng).unwrap().is_simple() {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / reps as f64;
    let se = (exact * (1.0 - exact) / reps as f64).sqrt();
    assert!(
        (p_hat - exact).abs() < 3.0 * se,
        "p_hat {p_hat} vs exact {exact}"
    );
}

#[test]
fn gillespie_occupancy_matches_oracle_on_small_graphs() {
    // Spec example: the single-edge |xi_1| distribution against the
    // 4-state oracle, plus K4 extinction by t = 5.
    let mut rng = seeded(2024);
    let edge = SimpleRegularGraph::single_edge();
    let reps = 200_000u64;
    // Joint occupancy counts at t = 1: (u only, v only, both, none).
    let mut counts = [0u64; 4];
    for _ in 0..reps {
        let out = run_until(&edge, 1.0, &[0], 1.0, None, None, &mut rng);
        let idx = (out.state.is_infected(0) as usize) | ((out.state.is_infected(1) as usize) << 1);
        counts[idx] += 1;
    }
    let pi = contact_core::ctmc::exact_distribution(&edge, 1.0, &[0], 1.0).unwrap();
    for (s, &c) in counts.iter().enumerate() {
        let p_hat = c as f64 / reps as f64;
        let se = (pi[s] * (1.0 - pi[s]) / reps as f64).sqrt();
        assert!(
            (p_hat - pi[s]).abs() < 3.5 * se.max(1e-5),
            "state {s}: p_hat {p_hat} vs exact {}",
            pi[s]
        );
    }

    let k4 = SimpleRegularGraph::complete(4);
    let exact = exact_extinction_probability(&k4, 1.0, &[0], 5.0).unwrap();
    let reps = 100_000u64;
    let mut extinct = 0u64;
    for _ in 0..reps {
        let out = run_until(&k4, 1.0, &[0], 5.0, None, None, &mut rng);
        if out.hit.extinction_time.is_some() {
            extinct += 1;
        }
    }
    let p_hat = extinct as f64 / reps as f64;
    let se = (exact * (1.0 - exact) / reps as f64).sqrt();
    assert!(
        (p_hat - exact).abs() < 3.5 * se,
        "extinct {p_hat} vs exact {exact}"
    );
}

#[test]
fn infection_state_tracks_ever_set() {
    let mut state = InfectionState::new(4, &[0, 2]);
    assert_eq!(state.ever_count(), 2);
    assert!(state.is_infected(0) && state.is_infected(2));
    let k4 = SimpleRegularGraph::complete(4);
    let mut rng = seeded(5);
    for _ in 0..50 {
        if state.is_extinct() {
            break;
        }
        let before = state.ever_count();
        contact_core::contact::gillespie_step(&mut state, &k4, 1.0, &mut rng).unwrap();
        assert!(state.ever_count() >= before);
        assert!(state.infected_count() <= state.ever_count());
    }
}
