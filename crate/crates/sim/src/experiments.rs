//! Experiment pipelines: tree-parameter estimation, the cutoff
//! hitting-time experiment, the asymptotic-density experiment, the
//! two-source intersection experiment, and the good-pair census.
//!
//! Conventions shared by all pipelines: the tree growth rate `c_hat` and
//! survival probability `p_hat` are estimated once on the tree and
//! frozen before any graph experiment runs; per-replica randomness is
//! keyed by (master seed, experiment label, replica index); aggregation
//! happens in replica order so worker scheduling cannot change results.

use serde::Serialize;

use contact_core::contact::{run_until, run_watching};
use contact_core::estimate::{growth_from_means, growth_label, survival_label, survives_to_threshold, GrowthEstimate};
use contact_core::explore::{run_independent_pair, run_vanilla_watching};
use contact_core::graph::{sample_simple, SimpleRegularGraph};
use contact_core::rng::{replica_rng, SimRng};
use contact_core::stats::{binomial_se, quantile_sorted, MeanVar};
use contact_core::tree::{run_tree, TreeMode};

use crate::config::Config;
use crate::error::{Result, SimError};
use crate::runner::run_replicas;

fn tree_mode(severed: bool) -> TreeMode {
    if severed {
        TreeMode::Severed
    } else {
        TreeMode::Full
    }
}

/// Ordered-pair hit probabilities (source, target, estimate).
pub type PairProbs = Vec<(u32, u32, f64)>;

/// Frozen tree parameters; serialized with exactly these field names.
#[derive(Debug, Clone, Serialize)]
pub struct Estimates {
    pub c_hat: f64,
    pub c_se: f64,
    pub p_hat: f64,
    pub p_se: f64,
    pub window: [f64; 2],
    pub replicas: EstimateReplicas,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReplicas {
    pub growth: u64,
    pub survival: u64,
}

/// Growth-rate estimate over the configured window, replica-parallel;
/// bit-identical to the sequential estimator in the core crate.
pub fn parallel_growth(pool: &rayon::ThreadPool, cfg: &Config, replicas: u64) -> Result<GrowthEstimate> {
    let est = &cfg.estimate;
    let mode = tree_mode(est.severed);
    let label = growth_label(cfg.lambda, mode);
    let grid_len = (est.horizon / cfg.grid).floor() as usize + 1;
    let series: Vec<Vec<u32>> = run_replicas(pool, cfg.master_seed, &label, replicas, |_, rng| {
        let run = run_tree(cfg.d, cfg.lambda, est.horizon, mode, cfg.node_cap, cfg.grid, rng);
        run.series.iter().map(|p| p.infected as u32).collect()
    });
    let mut means = vec![MeanVar::default(); grid_len];
    for row in &series {
        if row.len() != grid_len {
            return Err(SimError::Capacity("tree arena nodes".into()));
        }
        for (acc, &x) in means.iter_mut().zip(row) {
            acc.push(x as f64);
        }
    }
    let times: Vec<f64> = (0..grid_len).map(|i| i as f64 * cfg.grid).collect();
    growth_from_means(&times, &means, (est.window[0], est.window[1]), replicas).map_err(Into::into)
}

pub fn parallel_survival(
    pool: &rayon::ThreadPool,
    cfg: &Config,
    replicas: u64,
) -> Result<(f64, f64)> {
    let est = &cfg.estimate;
    let mode = tree_mode(est.severed);
    let label = survival_label(cfg.lambda, mode);
    let hits: Vec<bool> = run_replicas(pool, cfg.master_seed, &label, replicas, |_, rng| {
        survives_to_threshold(
            cfg.d,
            cfg.lambda,
            est.survival_threshold,
            est.survival_t_cap,
            mode,
            cfg.node_cap,
            rng,
        )
        .unwrap_or(false)
    });
    let p = hits.iter().filter(|&&h| h).count() as f64 / replicas as f64;
    Ok((p, binomial_se(p, replicas)))
}

/// Runs both tree estimators with the configured replica counts.
pub fn estimate_pipeline(pool: &rayon::ThreadPool, cfg: &Config) -> Result<Estimates> {
    let growth = parallel_growth(pool, cfg, cfg.estimate.replicas)?;
    let (p_hat, p_se) = parallel_survival(pool, cfg, cfg.estimate.survival_replicas)?;
    Ok(Estimates {
        c_hat: growth.c_hat,
        c_se: growth.c_se,
        p_hat,
        p_se,
        window: [growth.window.0, growth.window.1],
        replicas: EstimateReplicas {
            growth: cfg.estimate.replicas,
            survival: cfg.estimate.survival_replicas,
        },
        r2: Some(growth.r2),
    })
}

/// The frozen (c_hat, p_hat) pair every graph experiment works from:
/// user-supplied values win, otherwise the tree estimators run first.
#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub c_hat: f64,
    pub p_hat: f64,
    /// Present when the values were estimated in this run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated: Option<Estimates>,
}

pub fn calibrate(pool: &rayon::ThreadPool, cfg: &Config) -> Result<Calibration> {
    match (cfg.c_hat, cfg.p_hat) {
        (Some(c), Some(p)) => Ok(Calibration {
            c_hat: c,
            p_hat: p,
            estimated: None,
        }),
        _ => {
            let est = estimate_pipeline(pool, cfg)?;
            Ok(Calibration {
                c_hat: cfg.c_hat.unwrap_or(est.c_hat),
                p_hat: cfg.p_hat.unwrap_or(est.p_hat),
                estimated: Some(est),
            })
        }
    }
}

/// Per-replica cutoff observation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutoffRow {
    pub n: usize,
    pub replica: u64,
    pub source: u32,
    pub target: u32,
    pub hit_time: Option<f64>,
    pub occupied_at_t_plus: bool,
    pub survived_to_t_plus: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffPoint {
    pub n: usize,
    pub t_minus: f64,
    pub t_plus: f64,
    pub replicas: u64,
    pub hit_by_t_minus: f64,
    pub hit_by_t_minus_se: f64,
    pub occupied_at_t_plus: f64,
    pub occupied_at_t_plus_se: f64,
    pub survived_frac: f64,
    pub hit_count: u64,
    /// Quantiles of the hit time over replicas that hit at all.
    pub hit_time_q25: Option<f64>,
    pub hit_time_q50: Option<f64>,
    pub hit_time_q75: Option<f64>,
    /// Interquartile range of hit_time / (c_hat^-1 log n).
    pub normalized_iqr: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffReport {
    pub c_hat: f64,
    pub p_hat: f64,
    pub p_hat_squared: f64,
    pub quenched: bool,
    pub points: Vec<CutoffPoint>,
}

/// (source, target, hit time, occupied at t_plus, survived to t_plus).
type CutoffSample = (u32, u32, Option<f64>, bool, bool);

/// One (graph, pair) replica of the cutoff experiment at a given n.
/// `swap` exchanges the roles of the sampled pair (used by the duality
/// consistency check).
fn cutoff_replica(
    cfg: &Config,
    n: usize,
    t_plus: f64,
    fixed: Option<&SimpleRegularGraph>,
    swap: bool,
    rng: &mut SimRng,
) -> Result<CutoffSample> {
    use rand::Rng;
    let d = cfg.d;
    let mut u = rng.gen_range(0..n as u32);
    let mut v = loop {
        let v = rng.gen_range(0..n as u32);
        if v != u {
            break v;
        }
    };
    if swap {
        core::mem::swap(&mut u, &mut v);
    }
    if let Some(g) = fixed {
        let out = run_watching(g, cfg.lambda, &[u], t_plus, &[v], None, rng);
        return Ok((u, v, out.hit.hit_time, out.state.is_infected(v), !out.state.is_extinct()));
    }
    if n <= cfg.cutoff.full_engine_max_n {
        let (g, _) = sample_simple(n, d, rng, 1000)?;
        let out = run_watching(&g, cfg.lambda, &[u], t_plus, &[v], None, rng);
        Ok((u, v, out.hit.hit_time, out.state.is_infected(v), !out.state.is_extinct()))
    } else {
        // Large n: reveal the graph only where the epidemic explores it.
        let out = run_vanilla_watching(n, d, cfg.lambda, &[u], t_plus, &[v], None, rng)?;
        let occupied = out.final_infected.binary_search(&v).is_ok();
        Ok((u, v, out.hit.hit_time, occupied, out.hit.final_infected_count > 0))
    }
}

/// Cutoff experiment: for each n, sample (graph, pair) replicas, record
/// the first hit time of v and its occupancy at t_plus.
pub fn cutoff_experiment(
    pool: &rayon::ThreadPool,
    cfg: &Config,
    cal: &Calibration,
    swap_pairs: bool,
) -> Result<(CutoffReport, Vec<CutoffRow>)> {
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.cutoff.n_list {
        let log_n = (n as f64).ln();
        let t_minus = (1.0 - cfg.epsilon) * log_n / cal.c_hat;
        let t_plus = (1.0 + cfg.epsilon) * log_n / cal.c_hat;
        let fixed = if cfg.cutoff.quenched {
            if n > cfg.cutoff.full_engine_max_n {
                return Err(SimError::Config(
                    "quenched mode requires the full-graph engine (n too large)".into(),
                ));
            }
            let mut rng = replica_rng(cfg.master_seed, &format!("cutoff-graph/{n}"), 0);
            Some(sample_simple(n, cfg.d, &mut rng, 1000)?.0)
        } else {
            None
        };
        let label = format!("cutoff/{n}");
        let results: Vec<Result<CutoffSample>> = run_replicas(
            pool,
            cfg.master_seed,
            &label,
            cfg.cutoff.replicas,
            |_, rng| cutoff_replica(cfg, n, t_plus, fixed.as_ref(), swap_pairs, rng),
        );
        let mut hit_by = 0u64;
        let mut occupied = 0u64;
        let mut survived = 0u64;
        let mut hit_times: Vec<f64> = Vec::new();
        for (rep, r) in results.into_iter().enumerate() {
            let (u, v, hit_time, occ, surv) = r?;
            rows.push(CutoffRow {
                n,
                replica: rep as u64,
                source: u,
                target: v,
                hit_time,
                occupied_at_t_plus: occ,
                survived_to_t_plus: surv,
            });
            if let Some(t) = hit_time {
                hit_times.push(t);
                if t <= t_minus {
                    hit_by += 1;
                }
            }
            occupied += occ as u64;
            survived += surv as u64;
        }
        let reps = cfg.cutoff.replicas;
        hit_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let p_hit = hit_by as f64 / reps as f64;
        let p_occ = occupied as f64 / reps as f64;
        let quart = |q: f64| (!hit_times.is_empty()).then(|| quantile_sorted(&hit_times, q));
        let normalized_iqr = match (quart(0.25), quart(0.75)) {
            (Some(lo), Some(hi)) => Some((hi - lo) / (log_n / cal.c_hat)),
            _ => None,
        };
        points.push(CutoffPoint {
            n,
            t_minus,
            t_plus,
            replicas: reps,
            hit_by_t_minus: p_hit,
            hit_by_t_minus_se: binomial_se(p_hit, reps),
            occupied_at_t_plus: p_occ,
            occupied_at_t_plus_se: binomial_se(p_occ, reps),
            survived_frac: survived as f64 / reps as f64,
            hit_count: hit_times.len() as u64,
            hit_time_q25: quart(0.25),
            hit_time_q50: quart(0.5),
            hit_time_q75: quart(0.75),
            normalized_iqr,
        });
    }
    Ok((
        CutoffReport {
            c_hat: cal.c_hat,
            p_hat: cal.p_hat,
            p_hat_squared: cal.p_hat * cal.p_hat,
            quenched: cfg.cutoff.quenched,
            points,
        },
        rows,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub t_plus: f64,
    pub replicas: u64,
    pub c_hat: f64,
    pub p_hat: f64,
    pub delta: f64,
    pub mean_density: f64,
    pub density_se: f64,
    pub frac_within_delta: f64,
    pub frac_within_delta_se: f64,
}

/// Density experiment: start from full occupancy, measure the infected
/// density at t_plus on a fresh graph per replica.
pub fn density_experiment(
    pool: &rayon::ThreadPool,
    cfg: &Config,
    cal: &Calibration,
) -> Result<(DensityReport, Vec<f64>)> {
    let n = cfg.density.n;
    let t_plus = (1.0 + cfg.epsilon) * (n as f64).ln() / cal.c_hat;
    let all: Vec<u32> = (0..n as u32).collect();
    let densities: Vec<Result<f64>> = run_replicas(
        pool,
        cfg.master_seed,
        "density",
        cfg.density.replicas,
        |_, rng| {
            let (g, _) = sample_simple(n, cfg.d, rng, 1000)?;
            let out = run_until(&g, cfg.lambda, &all, t_plus, None, None, rng);
            Ok(out.state.infected_count() as f64 / n as f64)
        },
    );
    let densities: Vec<f64> = densities.into_iter().collect::<Result<_>>()?;
    let mut acc = MeanVar::default();
    let mut within = 0u64;
    for &rho in &densities {
        acc.push(rho);
        if (rho - cal.p_hat).abs() <= cfg.density.delta {
            within += 1;
        }
    }
    let frac = within as f64 / cfg.density.replicas as f64;
    Ok((
        DensityReport {
            n,
            t_plus,
            replicas: cfg.density.replicas,
            c_hat: cal.c_hat,
            p_hat: cal.p_hat,
            delta: cfg.density.delta,
            mean_density: acc.mean(),
            density_se: acc.se(),
            frac_within_delta: frac,
            frac_within_delta_se: binomial_se(frac, cfg.density.replicas),
        },
        densities,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectReport {
    pub n: usize,
    pub replicas: u64,
    pub t1: f64,
    pub t2: f64,
    pub c_hat: f64,
    pub p_hat: f64,
    pub p_hat_squared: f64,
    pub intersect_prob: f64,
    pub intersect_se: f64,
    pub both_survived_frac: f64,
    pub conditional_intersect: f64,
    pub conditional_intersect_se: f64,
    /// Good-event accounting, reported not asserted.
    pub label_reuse_frac: f64,
    pub label_overlap_frac: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntersectRow {
    pub replica: u64,
    pub source_u: u32,
    pub source_v: u32,
    pub intersects: bool,
    pub u_survived: bool,
    pub v_survived: bool,
    pub label_reused: bool,
    pub label_overlap: bool,
}

/// Two-source intersection experiment: independent processes from u and
/// v on a shared pool; u runs to t2 = (1+3*eps) log n / (2c), v to
/// t1 = (1-eps) log n / (2c).
pub fn intersection_experiment(
    pool: &rayon::ThreadPool,
    cfg: &Config,
    cal: &Calibration,
) -> Result<(IntersectReport, Vec<IntersectRow>)> {
    use rand::Rng;
    let n = cfg.intersect.n;
    let log_n = (n as f64).ln();
    let t1 = (1.0 - cfg.epsilon) * log_n / (2.0 * cal.c_hat);
    let t2 = (1.0 + 3.0 * cfg.epsilon) * log_n / (2.0 * cal.c_hat);
    let results: Vec<Result<IntersectRow>> = run_replicas(
        pool,
        cfg.master_seed,
        "intersect",
        cfg.intersect.replicas,
        |rep, rng| {
            let u = rng.gen_range(0..n as u32);
            let v = loop {
                let v = rng.gen_range(0..n as u32);
                if v != u {
                    break v;
                }
            };
            let out = run_independent_pair(n, cfg.d, cfg.lambda, u, v, t2, t1, false, rng)?;
            Ok(IntersectRow {
                replica: rep,
                source_u: u,
                source_v: v,
                intersects: out.intersects,
                u_survived: out.u_survived,
                v_survived: out.v_survived,
                label_reused: out.label_reused_within,
                label_overlap: out.label_sets_overlap,
            })
        },
    );
    let rows: Vec<IntersectRow> = results.into_iter().collect::<Result<_>>()?;
    let reps = cfg.intersect.replicas;
    let hits = rows.iter().filter(|r| r.intersects).count() as u64;
    let both = rows.iter().filter(|r| r.u_survived && r.v_survived).count() as u64;
    let cond_hits = rows
        .iter()
        .filter(|r| r.u_survived && r.v_survived && r.intersects)
        .count() as u64;
    let p = hits as f64 / reps as f64;
    let cond = if both > 0 {
        cond_hits as f64 / both as f64
    } else {
        0.0
    };
    Ok((
        IntersectReport {
            n,
            replicas: reps,
            t1,
            t2,
            c_hat: cal.c_hat,
            p_hat: cal.p_hat,
            p_hat_squared: cal.p_hat * cal.p_hat,
            intersect_prob: p,
            intersect_se: binomial_se(p, reps),
            both_survived_frac: both as f64 / reps as f64,
            conditional_intersect: cond,
            conditional_intersect_se: binomial_se(cond, both.max(1)),
            label_reuse_frac: rows.iter().filter(|r| r.label_reused).count() as f64 / reps as f64,
            label_overlap_frac: rows.iter().filter(|r| r.label_overlap).count() as f64
                / reps as f64,
        },
        rows,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusPoint {
    pub slack: f64,
    pub threshold: f64,
    pub good_pair_frac: f64,
    pub good_pair_ci_lo: f64,
    pub good_pair_ci_hi: f64,
    pub good_vertex_frac: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub n: usize,
    pub t_plus: f64,
    pub replicas_per_source: u64,
    pub c_hat: f64,
    pub p_hat: f64,
    pub points: Vec<CensusPoint>,
}

/// Good-pair census on one fixed sampled graph: estimates
/// P_G(v in xi^u at t_plus) for every ordered pair by running
/// `replicas_per_source` processes from each source and reading off the
/// occupancy of all other vertices.
#[allow(clippy::needless_range_loop)]
pub fn good_pair_census(
    pool: &rayon::ThreadPool,
    cfg: &Config,
    cal: &Calibration,
) -> Result<(CensusReport, PairProbs)> {
    let n = cfg.census.n;
    if n > 200 {
        return Err(SimError::Config("census supports n <= 200".into()));
    }
    let t_plus = (1.0 + cfg.epsilon) * (n as f64).ln() / cal.c_hat;
    let mut graph_rng = replica_rng(cfg.master_seed, "census-graph", 0);
    let (g, _) = sample_simple(n, cfg.d, &mut graph_rng, 1000)?;
    let reps = cfg.census.replicas_per_source;
    let words = n.div_ceil(64);

    // occupancy[source][replica] is a bitset over target vertices.
    let occupancy: Vec<Vec<Vec<u64>>> = pool.install(|| {
        use rayon::prelude::*;
        (0..n as u32)
            .into_par_iter()
            .map(|u| {
                let label = format!("census/{u}");
                (0..reps)
                    .map(|rep| {
                        let mut rng = replica_rng(cfg.master_seed, &label, rep);
                        let out = run_until(&g, cfg.lambda, &[u], t_plus, None, None, &mut rng);
                        let mut bits = vec![0u64; words];
                        for v in out.state.infected() {
                            bits[*v as usize / 64] |= 1 << (*v as usize % 64);
                        }
                        bits
                    })
                    .collect()
            })
            .collect()
    });

    let pair_prob = |resample: Option<&[u64]>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|u| {
                let mut counts = vec![0u64; n];
                let indices: Vec<u64> = match resample {
                    Some(idx) => idx.to_vec(),
                    None => (0..reps).collect(),
                };
                for &rep in &indices {
                    let bits = &occupancy[u][rep as usize];
                    for v in 0..n {
                        if bits[v / 64] & (1 << (v % 64)) != 0 {
                            counts[v] += 1;
                        }
                    }
                }
                counts
                    .iter()
                    .map(|&c| c as f64 / indices.len() as f64)
                    .collect()
            })
            .collect()
    };
    let probs = pair_prob(None);

    let good_fracs = |probs: &[Vec<f64>], threshold: f64| -> (f64, f64) {
        let mut good_pairs = 0u64;
        let mut good_vertices = 0u64;
        for u in 0..probs.len() {
            let mut partners = 0u64;
            for v in 0..probs.len() {
                if u != v && probs[u][v] >= threshold {
                    good_pairs += 1;
                    partners += 1;
                }
            }
            let needed = 1.0 - slack_fourth_root(threshold, cal);
            if partners as f64 >= needed * (probs.len() as f64 - 1.0) {
                good_vertices += 1;
            }
        }
        (
            good_pairs as f64 / (probs.len() * (probs.len() - 1)) as f64,
            good_vertices as f64 / probs.len() as f64,
        )
    };

    let mut points = Vec::new();
    let mut boot_rng = replica_rng(cfg.master_seed, "census-bootstrap", 0);
    for &slack in &cfg.census.slack_grid {
        let threshold = (1.0 - slack) * cal.p_hat * cal.p_hat;
        let (pair_frac, vertex_frac) = good_fracs(&probs, threshold);
        // Bootstrap over replicas (shared resample across sources).
        let mut boots: Vec<f64> = (0..cfg.census.bootstrap)
            .map(|_| {
                use rand::Rng;
                let idx: Vec<u64> = (0..reps).map(|_| boot_rng.gen_range(0..reps)).collect();
                let resampled = pair_prob(Some(&idx));
                good_fracs(&resampled, threshold).0
            })
            .collect();
        boots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, hi) = if boots.is_empty() {
            (pair_frac, pair_frac)
        } else {
            (quantile_sorted(&boots, 0.025), quantile_sorted(&boots, 0.975))
        };
        points.push(CensusPoint {
            slack,
            threshold,
            good_pair_frac: pair_frac,
            good_pair_ci_lo: lo,
            good_pair_ci_hi: hi,
            good_vertex_frac: vertex_frac,
        });
    }
    let mut pairs = Vec::with_capacity(n * (n - 1));
    for u in 0..n {
        for v in 0..n {
            if u != v {
                pairs.push((u as u32, v as u32, probs[u][v]));
            }
        }
    }
    Ok((
        CensusReport {
            n,
            t_plus,
            replicas_per_source: reps,
            c_hat: cal.c_hat,
            p_hat: cal.p_hat,
            points,
        },
        pairs,
    ))
}

/// Vertex-census slack: the fourth root of the pair slack, following the
/// good-vertex definition's weaker tolerance.
fn slack_fourth_root(threshold: f64, cal: &Calibration) -> f64 {
    let p2 = cal.p_hat * cal.p_hat;
    if p2 <= 0.0 {
        return 1.0;
    }
    let slack = (1.0 - threshold / p2).clamp(0.0, 1.0);
    slack.sqrt().sqrt()
}
