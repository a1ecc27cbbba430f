//! Estimators for the tree growth rate and survival probability, plus
//! the tail-exceedance check for the severed union process.

use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::CoreError;
use crate::rng::{exp_sample, replica_rng};
use crate::stats::{binomial_se, fit_line, MeanVar};
use crate::tree::{run_tree, TreeMode, TreeState};

/// Least-squares estimate of the exponential growth rate of the mean
/// population.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthEstimate {
    pub c_hat: f64,
    pub c_se: f64,
    pub window: (f64, f64),
    pub r2: f64,
    pub replicas: u64,
}

/// Survival-probability estimate via the reach-M-before-t_cap proxy.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalEstimate {
    pub p_hat: f64,
    pub p_se: f64,
    pub threshold: usize,
    pub t_cap: f64,
    pub replicas: u64,
}

/// Mean population per grid point over replicas, extinct replicas
/// counted as zero. Returns (grid times, means).
#[allow(clippy::too_many_arguments)]
pub fn mean_population_series(
    d: usize,
    lambda: f64,
    replicas: u64,
    horizon: f64,
    grid_spacing: f64,
    mode: TreeMode,
    node_cap: usize,
    master_seed: u64,
    label: &str,
) -> Result<(Vec<f64>, Vec<MeanVar>), CoreError> {
    let grid_len = libm::floor(horizon / grid_spacing) as usize + 1;
    let mut acc = alloc::vec![MeanVar::default(); grid_len];
    for rep in 0..replicas {
        let mut rng = replica_rng(master_seed, label, rep);
        let run = run_tree(d, lambda, horizon, mode, node_cap, grid_spacing, &mut rng)
            .require_complete()?;
        debug_assert_eq!(run.series.len(), grid_len);
        for (slot, point) in acc.iter_mut().zip(&run.series) {
            slot.push(point.infected as f64);
        }
    }
    let times = (0..grid_len).map(|i| i as f64 * grid_spacing).collect();
    Ok((times, acc))
}

/// Fits log(mean |xi_t|) over the window; the window means must be
/// positive.
pub fn growth_from_means(
    times: &[f64],
    means: &[MeanVar],
    window: (f64, f64),
    replicas: u64,
) -> Result<GrowthEstimate, CoreError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, m) in times.iter().zip(means) {
        if t >= window.0 - 1e-12 && t <= window.1 + 1e-12 {
            if m.mean() <= 0.0 {
                return Err(CoreError::Estimation(
                    "mean population hit zero inside the fit window",
                ));
            }
            xs.push(t);
            ys.push(libm::log(m.mean()));
        }
    }
    if xs.len() < 3 {
        return Err(CoreError::Estimation("fit window holds fewer than 3 grid points"));
    }
    let fit = fit_line(&xs, &ys);
    Ok(GrowthEstimate {
        c_hat: fit.slope,
        c_se: fit.slope_se,
        window,
        r2: fit.r2,
        replicas,
    })
}

/// Full growth-rate pipeline: replicas of the tree process, mean over
/// replicas (extinct counted as zero, per the expectation bound being
/// estimated), then a log-linear fit over the window.
#[allow(clippy::too_many_arguments)]
pub fn estimate_growth_rate(
    d: usize,
    lambda: f64,
    replicas: u64,
    horizon: f64,
    window: (f64, f64),
    grid_spacing: f64,
    mode: TreeMode,
    node_cap: usize,
    master_seed: u64,
) -> Result<GrowthEstimate, CoreError> {
    if window.0 >= window.1 || window.1 > horizon {
        return Err(CoreError::Precondition("fit window must satisfy lo < hi <= horizon"));
    }
    let label = growth_label(lambda, mode);
    let (times, means) =
        mean_population_series(d, lambda, replicas, horizon, grid_spacing, mode, node_cap, master_seed, &label)?;
    growth_from_means(&times, &means, window, replicas)
}

/// Replica-stream label of the growth estimator; exposed so parallel
/// drivers reproduce the sequential estimates bit-exactly.
pub fn growth_label(lambda: f64, mode: TreeMode) -> String {
    alloc::format!("tree-growth/{:?}/{}", mode, libm::round(lambda * 1e6) as i64)
}

/// Replica-stream label of the survival estimator.
pub fn survival_label(lambda: f64, mode: TreeMode) -> String {
    alloc::format!("tree-survival/{:?}/{}", mode, libm::round(lambda * 1e6) as i64)
}

/// Does one severed/full replica reach `threshold` infected before
/// extinction or `t_cap`?
pub fn survives_to_threshold<R: Rng + ?Sized>(
    d: usize,
    lambda: f64,
    threshold: usize,
    t_cap: f64,
    mode: TreeMode,
    node_cap: usize,
    rng: &mut R,
) -> Result<bool, CoreError> {
    let mut state = TreeState::new(d, mode, node_cap);
    let per_vertex = 1.0 + lambda * d as f64;
    loop {
        if state.infected_count() >= threshold {
            return Ok(true);
        }
        if state.is_extinct() {
            return Ok(false);
        }
        let wait = exp_sample(rng, state.infected_count() as f64 * per_vertex);
        if state.clock() + wait > t_cap {
            return Ok(false);
        }
        state.step_after_wait(wait, lambda, rng)?;
    }
}

/// Fraction of replicas reaching `threshold` infected before extinction
/// or the time cap; the survival-probability proxy.
#[allow(clippy::too_many_arguments)]
pub fn estimate_survival_prob(
    d: usize,
    lambda: f64,
    replicas: u64,
    threshold: usize,
    t_cap: f64,
    mode: TreeMode,
    node_cap: usize,
    master_seed: u64,
) -> Result<SurvivalEstimate, CoreError> {
    if threshold == 0 {
        return Err(CoreError::Precondition("survival threshold must be at least 1"));
    }
    let label = survival_label(lambda, mode);
    let mut hits = 0u64;
    for rep in 0..replicas {
        let mut rng = replica_rng(master_seed, &label, rep);
        if survives_to_threshold(d, lambda, threshold, t_cap, mode, node_cap, &mut rng)? {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / replicas as f64;
    Ok(SurvivalEstimate {
        p_hat,
        p_se: binomial_se(p_hat, replicas),
        threshold,
        t_cap,
        replicas,
    })
}

/// One point of the tail-exceedance report:
/// frequency of |union eta_s, s <= t| >= exp((1+delta) c_hat t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailPoint {
    pub t: f64,
    pub threshold: f64,
    pub exceedances: u64,
    pub frequency: f64,
    pub se: f64,
}

/// Empirical check that the severed union process exceeding its growth
/// rate is (at least) rapidly decaying in t. Times must be ascending.
#[allow(clippy::too_many_arguments)]
pub fn tail_check(
    d: usize,
    lambda: f64,
    c_hat: f64,
    delta: f64,
    times: &[f64],
    replicas: u64,
    node_cap: usize,
    master_seed: u64,
) -> Result<Vec<TailPoint>, CoreError> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(CoreError::Precondition("tail-check times must be ascending"));
    }
    let horizon = times.last().copied().unwrap_or(0.0);
    let mut exceed = alloc::vec![0u64; times.len()];
    for rep in 0..replicas {
        let mut rng = replica_rng(master_seed, "tree-tail", rep);
        let mut state = TreeState::new(d, TreeMode::Severed, node_cap);
        let per_vertex = 1.0 + lambda * d as f64;
        let mut idx = 0usize;
        let flush = |state: &TreeState, up_to: f64, idx: &mut usize, exceed: &mut [u64]| {
            while *idx < times.len() && times[*idx] < up_to {
                let bound = libm::exp((1.0 + delta) * c_hat * times[*idx]);
                if state.ever_count() as f64 >= bound {
                    exceed[*idx] += 1;
                }
                *idx += 1;
            }
        };
        while !state.is_extinct() {
            let wait = exp_sample(&mut rng, state.infected_count() as f64 * per_vertex);
            let t = state.clock() + wait;
            if t > horizon {
                break;
            }
            flush(&state, t, &mut idx, &mut exceed);
            state.step_after_wait(wait, lambda, &mut rng)?;
        }
        flush(&state, f64::INFINITY, &mut idx, &mut exceed);
    }
    Ok(times
        .iter()
        .zip(&exceed)
        .map(|(&t, &k)| {
            let frequency = k as f64 / replicas as f64;
            TailPoint {
                t,
                threshold: libm::exp((1.0 + delta) * c_hat * t),
                exceedances: k,
                frequency,
                se: binomial_se(frequency, replicas),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_death_growth_rate_is_minus_one() {
        // E|xi_t| = exp(-t) when lambda = 0.
        let est = estimate_growth_rate(
            3,
            0.0,
            60_000,
            3.0,
            (0.5, 2.5),
            0.25,
            TreeMode::Full,
            1 << 20,
            1234,
        )
        .unwrap();
        assert!((est.c_hat + 1.0).abs() < 0.05, "c_hat {}", est.c_hat);
        assert!(est.r2 > 0.98, "r2 {}", est.r2);
    }

    #[test]
    fn growth_errors_when_mean_dies_inside_window() {
        // At lambda = 0 with few replicas the population is extinct well
        // before t = 12 almost surely.
        let err = estimate_growth_rate(
            3,
            0.0,
            50,
            14.0,
            (10.0, 14.0),
            1.0,
            TreeMode::Full,
            1 << 16,
            5,
        );
        assert!(matches!(err, Err(CoreError::Estimation(_))));
    }

    #[test]
    fn survival_estimate_is_zero_at_lambda_zero() {
        let est = estimate_survival_prob(3, 0.0, 500, 10, 30.0, TreeMode::Full, 1 << 16, 7)
            .unwrap();
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(est.p_se, 0.0);
    }

    #[test]
    fn survival_monotone_in_lambda_with_slack() {
        // Checked on a small lambda grid with 2-sigma slack.
        let mut last = -1.0f64;
        for (i, &lambda) in [0.3f64, 1.0, 2.0].iter().enumerate() {
            let est = estimate_survival_prob(
                3,
                lambda,
                2_000,
                200,
                40.0,
                TreeMode::Full,
                1 << 20,
                100 + i as u64,
            )
            .unwrap();
            assert!(
                est.p_hat >= last - 2.0 * est.p_se,
                "p decreased: {} -> {}",
                last,
                est.p_hat
            );
            last = est.p_hat;
        }
        assert!(last > 0.5, "lambda = 2 should be well supercritical");
    }

    #[test]
    fn tail_check_time_zero_is_deterministically_exceeded() {
        // |union eta_0| = 1 and the bound is exp(0) = 1, so every replica
        // exceeds at t = 0.
        let pts = tail_check(3, 1.5, 1.0, 0.5, &[0.0, 2.0], 200, 1 << 20, 3).unwrap();
        assert_eq!(pts[0].exceedances, 200);
        assert_eq!(pts[0].frequency, 1.0);
    }

    #[test]
    fn tail_check_large_delta_never_exceeds_at_moderate_time() {
        let pts = tail_check(3, 2.0, 1.5, 5.0, &[3.0, 4.0], 300, 1 << 22, 9).unwrap();
        // exp(6 * 1.5 * 3) = e^27 ~ 5e11 nodes: unreachable.
        assert_eq!(pts[0].exceedances, 0);
        assert_eq!(pts[1].exceedances, 0);
    }
}
