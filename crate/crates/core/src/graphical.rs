//! Harris graphical representation: per-vertex recovery marks and
//! per-directed-half-edge infection arrows on a finite time window.
//!
//! A record is sampled once and then percolated deterministically, which
//! gives a second, independent engine for the contact process and makes
//! time reversal a pathwise operation: reversal flips an internal flag,
//! so `reverse` is an exact involution, and the reversed record presents
//! every mark at `horizon - t` with arrows flipped onto the partner
//! half-edge.

use alloc::vec::Vec;
use rand::Rng;

use crate::graph::Topology;
use crate::rng::exp_sample;

/// Sampled Poisson marks for one realization of the process on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphicalRecord {
    n: usize,
    d: usize,
    horizon: f64,
    /// Sorted recovery times per vertex.
    recoveries: Vec<Vec<f64>>,
    /// Sorted attempt times per directed half-edge id `v*d + slot`.
    arrows: Vec<Vec<f64>>,
    /// When set, the record is read backwards in time.
    reversed: bool,
}

fn poisson_times<R: Rng + ?Sized>(rng: &mut R, rate: f64, horizon: f64, out: &mut Vec<f64>) {
    out.clear();
    if rate <= 0.0 || horizon <= 0.0 {
        return;
    }
    let mut t = exp_sample(rng, rate);
    while t <= horizon {
        out.push(t);
        t += exp_sample(rng, rate);
    }
}

/// Samples a fresh record: rate-1 recovery marks per vertex, rate-lambda
/// arrows per directed half-edge.
pub fn sample_graphical<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    lambda: f64,
    horizon: f64,
    rng: &mut R,
) -> GraphicalRecord {
    let mut recoveries = Vec::with_capacity(n);
    let mut buf = Vec::new();
    for _ in 0..n {
        poisson_times(rng, 1.0, horizon, &mut buf);
        recoveries.push(buf.clone());
    }
    let mut arrows = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        poisson_times(rng, lambda, horizon, &mut buf);
        arrows.push(buf.clone());
    }
    GraphicalRecord {
        n,
        d,
        horizon,
        recoveries,
        arrows,
        reversed: false,
    }
}

impl GraphicalRecord {
    /// Builds a record from explicit mark lists; lists must be sorted
    /// ascending and contained in `[0, horizon]`.
    pub fn from_marks(
        n: usize,
        d: usize,
        horizon: f64,
        recoveries: Vec<Vec<f64>>,
        arrows: Vec<Vec<f64>>,
    ) -> Self {
        assert_eq!(recoveries.len(), n);
        assert_eq!(arrows.len(), n * d);
        let sorted_in_window =
            |list: &Vec<f64>| list.windows(2).all(|w| w[0] <= w[1]) && list.iter().all(|&t| (0.0..=horizon).contains(&t));
        assert!(recoveries.iter().all(sorted_in_window));
        assert!(arrows.iter().all(sorted_in_window));
        GraphicalRecord {
            n,
            d,
            horizon,
            recoveries,
            arrows,
            reversed: false,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Total number of arrow marks across all half-edges.
    pub fn arrow_count(&self) -> usize {
        self.arrows.iter().map(Vec::len).sum()
    }

    pub fn recovery_count(&self) -> usize {
        self.recoveries.iter().map(Vec::len).sum()
    }

    /// Time reversal: marks map `t -> horizon - t`, arrows flip onto the
    /// partner half-edge, recovery marks keep their vertex. Implemented
    /// as a view flip, so it is an exact involution.
    pub fn reverse(&self) -> GraphicalRecord {
        let mut rec = self.clone();
        rec.reversed = !rec.reversed;
        rec
    }
}

/// Exact time reversal of a record (free-function form).
pub fn reverse(rec: &GraphicalRecord) -> GraphicalRecord {
    rec.reverse()
}

#[derive(Clone, Copy)]
enum Mark {
    Recovery { vertex: u32 },
    Arrow { half_edge: u32 },
}

/// Flattens the record into one time-ordered event sequence, honoring
/// the reversal flag.
fn ordered_marks(rec: &GraphicalRecord) -> Vec<(f64, Mark)> {
    let total = rec.recovery_count() + rec.arrow_count();
    let mut events = Vec::with_capacity(total);
    if !rec.reversed {
        for (v, list) in rec.recoveries.iter().enumerate() {
            for &t in list {
                events.push((t, Mark::Recovery { vertex: v as u32 }));
            }
        }
        for (h, list) in rec.arrows.iter().enumerate() {
            for &t in list {
                events.push((t, Mark::Arrow { half_edge: h as u32 }));
            }
        }
    } else {
        for (v, list) in rec.recoveries.iter().enumerate() {
            for &t in list.iter().rev() {
                events.push((rec.horizon - t, Mark::Recovery { vertex: v as u32 }));
            }
        }
        for (h, list) in rec.arrows.iter().enumerate() {
            for &t in list.iter().rev() {
                events.push((rec.horizon - t, Mark::Arrow { half_edge: h as u32 }));
            }
        }
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    events
}

/// Set of vertices reached at `query_time` by active infection paths
/// from `init` through the record's marks. Deterministic given the
/// record. An arrow crossing a half-edge is delivered to the partner
/// vertex given by `graph`; in a reversed record the arrow runs from the
/// original target back to the original source.
pub fn percolate<T: Topology>(
    rec: &GraphicalRecord,
    graph: &T,
    init: &[u32],
    query_time: f64,
) -> Vec<u32> {
    assert!(query_time <= rec.horizon, "query beyond record horizon");
    let (infected, _) = sweep(rec, graph, init, query_time);
    let mut out: Vec<u32> = infected
        .iter()
        .enumerate()
        .filter_map(|(v, &inf)| inf.then_some(v as u32))
        .collect();
    out.sort_unstable();
    out
}

/// First time the infected set becomes empty, if it does within the
/// window.
pub fn percolate_extinction_time<T: Topology>(
    rec: &GraphicalRecord,
    graph: &T,
    init: &[u32],
) -> Option<f64> {
    let (_, extinction) = sweep(rec, graph, init, rec.horizon);
    extinction
}

fn sweep<T: Topology>(
    rec: &GraphicalRecord,
    graph: &T,
    init: &[u32],
    query_time: f64,
) -> (Vec<bool>, Option<f64>) {
    debug_assert_eq!(graph.n(), rec.n);
    debug_assert_eq!(graph.degree(), rec.d);
    let mut infected = alloc::vec![false; rec.n];
    let mut count = 0usize;
    for &v in init {
        if !core::mem::replace(&mut infected[v as usize], true) {
            count += 1;
        }
    }
    let mut extinction = if count == 0 { Some(0.0) } else { None };
    for (t, mark) in ordered_marks(rec) {
        if t > query_time {
            break;
        }
        match mark {
            Mark::Recovery { vertex } => {
                if core::mem::replace(&mut infected[vertex as usize], false) {
                    count -= 1;
                    if count == 0 && extinction.is_none() {
                        extinction = Some(t);
                    }
                }
            }
            Mark::Arrow { half_edge } => {
                let d = rec.d as u32;
                let (source, target);
                if !rec.reversed {
                    source = half_edge / d;
                    target = graph.neighbor(source, half_edge % d);
                } else {
                    // The stored arrow pointed source -> target; reversed
                    // it delivers target -> source.
                    let orig_source = half_edge / d;
                    source = graph.neighbor(orig_source, half_edge % d);
                    target = orig_source;
                };
                if infected[source as usize] && !infected[target as usize] {
                    infected[target as usize] = true;
                    count += 1;
                }
            }
        }
    }
    (infected, extinction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimpleRegularGraph;
    use crate::rng::seeded;

    fn k4() -> SimpleRegularGraph {
        SimpleRegularGraph::complete(4)
    }

    #[test]
    fn zero_horizon_record_is_empty() {
        let rec = sample_graphical(4, 3, 1.0, 0.0, &mut seeded(1));
        assert_eq!(rec.arrow_count(), 0);
        assert_eq!(rec.recovery_count(), 0);
    }

    #[test]
    fn lambda_zero_record_has_no_arrows() {
        let rec = sample_graphical(4, 3, 0.0, 5.0, &mut seeded(1));
        assert_eq!(rec.arrow_count(), 0);
        assert!(rec.recovery_count() > 0);
    }

    #[test]
    fn arrow_mean_matches_poisson_rate() {
        // E[arrows per directed slot] = lambda * horizon.
        let (lambda, horizon) = (1.5, 2.0);
        let mut total = 0usize;
        let mut slots = 0usize;
        let mut rng = seeded(42);
        for _ in 0..200 {
            let rec = sample_graphical(10, 3, lambda, horizon, &mut rng);
            total += rec.arrow_count();
            slots += 30;
        }
        let mean = total as f64 / slots as f64;
        let expected = lambda * horizon;
        let se = (expected / slots as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn percolate_with_no_marks_returns_init() {
        let rec = GraphicalRecord::from_marks(4, 3, 1.0, alloc::vec![alloc::vec![]; 4], alloc::vec![alloc::vec![]; 12]);
        assert_eq!(percolate(&rec, &k4(), &[2, 0], 1.0), alloc::vec![0, 2]);
    }

    #[test]
    fn hand_built_arrow_infects_target() {
        // Arrow 0 -> 1 at t = 0.5 (slot 0 of vertex 0 points at 1 in K4).
        let mut arrows = alloc::vec![alloc::vec![]; 12];
        arrows[0] = alloc::vec![0.5];
        let rec = GraphicalRecord::from_marks(4, 3, 1.0, alloc::vec![alloc::vec![]; 4], arrows);
        assert_eq!(percolate(&rec, &k4(), &[0], 1.0), alloc::vec![0, 1]);
        // Before the arrow fires only the source is infected.
        assert_eq!(percolate(&rec, &k4(), &[0], 0.25), alloc::vec![0]);
    }

    #[test]
    fn recovery_before_arrow_blocks_the_path() {
        let mut arrows = alloc::vec![alloc::vec![]; 12];
        arrows[0] = alloc::vec![0.5];
        let mut recoveries = alloc::vec![alloc::vec![]; 4];
        recoveries[0] = alloc::vec![0.3];
        let rec = GraphicalRecord::from_marks(4, 3, 1.0, recoveries, arrows);
        assert_eq!(percolate(&rec, &k4(), &[0], 1.0), alloc::vec![] as Vec<u32>);
    }

    #[test]
    fn reverse_twice_is_identity() {
        let rec = sample_graphical(6, 3, 1.0, 2.0, &mut seeded(9));
        assert_eq!(rec.reverse().reverse(), rec);
        let empty = sample_graphical(2, 1, 0.5, 0.0, &mut seeded(9));
        assert_eq!(empty.reverse().reverse(), empty);
        assert_eq!(empty.reverse().arrow_count(), 0);
    }

    #[test]
    fn reversal_flips_arrow_direction() {
        // Forward: arrow 0 -> 1 at 0.7. Reversed: arrow 1 -> 0 at 0.3.
        let mut arrows = alloc::vec![alloc::vec![]; 12];
        arrows[0] = alloc::vec![0.7];
        let rec = GraphicalRecord::from_marks(4, 3, 1.0, alloc::vec![alloc::vec![]; 4], arrows);
        let rev = rec.reverse();
        assert_eq!(percolate(&rev, &k4(), &[1], 1.0), alloc::vec![0, 1]);
        assert_eq!(percolate(&rev, &k4(), &[0], 1.0), alloc::vec![0]);
        assert_eq!(percolate(&rev, &k4(), &[1], 0.25), alloc::vec![1]);
    }

    #[test]
    fn pathwise_duality_on_sampled_records() {
        // v reachable from u forward <=> u reachable from v in reverse,
        // for every vertex pair of every sampled record.
        let g = k4();
        let mut rng = seeded(77);
        for _ in 0..200 {
            let rec = sample_graphical(4, 3, 1.2, 2.0, &mut rng);
            let rev = rec.reverse();
            for u in 0..4u32 {
                let forward = percolate(&rec, &g, &[u], rec.horizon());
                for v in 0..4u32 {
                    let backward = percolate(&rev, &g, &[v], rec.horizon());
                    assert_eq!(
                        forward.binary_search(&v).is_ok(),
                        backward.binary_search(&u).is_ok(),
                        "duality violated for pair ({u},{v})"
                    );
                }
            }
        }
    }

    #[test]
    fn extinction_time_is_first_emptying() {
        let mut recoveries = alloc::vec![alloc::vec![]; 4];
        recoveries[0] = alloc::vec![0.4];
        recoveries[1] = alloc::vec![0.2];
        let rec = GraphicalRecord::from_marks(4, 3, 1.0, recoveries, alloc::vec![alloc::vec![]; 12]);
        assert_eq!(percolate_extinction_time(&rec, &k4(), &[0, 1]), Some(0.4));
        assert_eq!(percolate_extinction_time(&rec, &k4(), &[2]), None);
    }
}
