//! Discrete-time branching random walk dominating the tree contact
//! process.
//!
//! Each particle spawns an independent time-T contact process from its
//! location, and multiple particles may share a vertex, so the
//! generation sizes form a Galton-Watson chain with offspring law
//! |xi_T|. In coupled mode the particles covering the true infected set
//! are driven by one shared window of Poisson marks; additivity of the
//! contact process then makes the union of their offspring exactly the
//! true process at the next generation, and the particle count
//! dominates it by construction.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;
use rand::Rng;

use crate::error::CoreError;
use crate::indexed_set::IndexedSet;
use crate::rng::exp_sample;
use crate::tree::{TreeMode, TreeState, NONE};

/// Default particle-population cap for BRW runs.
pub const DEFAULT_POPULATION_CAP: u64 = 10_000_000;

/// |xi_T| of a fresh single-source tree contact process; the offspring
/// count of one particle. Location does not matter: the tree is
/// homogeneous.
fn offspring_count<R: Rng + ?Sized>(
    d: usize,
    lambda: f64,
    period: f64,
    node_cap: usize,
    rng: &mut R,
) -> Result<usize, CoreError> {
    let mut state = TreeState::new(d, TreeMode::Full, node_cap);
    let per_vertex = 1.0 + lambda * d as f64;
    while !state.is_extinct() {
        let wait = exp_sample(rng, state.infected_count() as f64 * per_vertex);
        if state.clock() + wait > period {
            break;
        }
        state.step_after_wait(wait, lambda, rng)?;
    }
    Ok(state.infected_count())
}

/// Plain branching random walk: returns |BRW_{nT}| for n = 0..=generations.
/// Offspring processes are mutually independent.
pub fn run_brw<R: Rng + ?Sized>(
    d: usize,
    lambda: f64,
    period: f64,
    generations: usize,
    population_cap: u64,
    rng: &mut R,
) -> Result<Vec<u64>, CoreError> {
    if period <= 0.0 {
        return Err(CoreError::Precondition("period must be positive"));
    }
    let mut sizes = alloc::vec![1u64];
    let mut current = 1u64;
    for _ in 0..generations {
        let mut next = 0u64;
        for _ in 0..current {
            next += offspring_count(d, lambda, period, usize::MAX, rng)? as u64;
            if next > population_cap {
                return Err(CoreError::Capacity {
                    what: "BRW particle population",
                    limit: population_cap as usize,
                });
            }
        }
        sizes.push(next);
        current = next;
        if current == 0 {
            break;
        }
    }
    Ok(sizes)
}

/// Sorted event list of one vertex over one time window. Kind 0 is a
/// recovery mark; kind 1 + s is an attempt through slot s.
#[derive(Clone, Debug, Default)]
struct NodeEvents {
    times: Vec<f64>,
    kinds: Vec<u8>,
}

/// Lazily sampled per-vertex Poisson marks on [0, period], shared by all
/// percolations of one generation. Sampling on first touch is sound
/// (deferred decisions); memoization keeps the record consistent across
/// sources, which is what additivity needs.
struct WindowRecord {
    d: usize,
    lambda: f64,
    period: f64,
    slot_of: Vec<u32>,
    events: Vec<NodeEvents>,
}

impl WindowRecord {
    fn new(d: usize, lambda: f64, period: f64) -> Self {
        WindowRecord {
            d,
            lambda,
            period,
            slot_of: Vec::new(),
            events: Vec::new(),
        }
    }

    fn reset(&mut self, arena: usize) {
        self.slot_of.clear();
        self.slot_of.resize(arena, NONE);
        self.events.clear();
    }

    fn index_of<R: Rng + ?Sized>(&mut self, node: u32, rng: &mut R) -> usize {
        if node as usize >= self.slot_of.len() {
            self.slot_of.resize(node as usize + 1, NONE);
        }
        if self.slot_of[node as usize] == NONE {
            let mut times: Vec<f64> = Vec::new();
            let mut kinds: Vec<u8> = Vec::new();
            let mut push_stream = |rate: f64, kind: u8, rng: &mut R| {
                if rate <= 0.0 {
                    return;
                }
                let mut t = exp_sample(rng, rate);
                while t <= self.period {
                    times.push(t);
                    kinds.push(kind);
                    t += exp_sample(rng, rate);
                }
            };
            push_stream(1.0, 0, rng);
            for slot in 0..self.d as u8 {
                push_stream(self.lambda, 1 + slot, rng);
            }
            let mut order: Vec<usize> = (0..times.len()).collect();
            order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
            let ev = NodeEvents {
                times: order.iter().map(|&i| times[i]).collect(),
                kinds: order.iter().map(|&i| kinds[i]).collect(),
            };
            self.slot_of[node as usize] = self.events.len() as u32;
            self.events.push(ev);
        }
        self.slot_of[node as usize] as usize
    }
}

#[derive(PartialEq)]
struct OrderedTime(f64);

impl Eq for OrderedTime {}

impl PartialOrd for OrderedTime {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedTime {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Percolates one single-source contact process through the shared
/// window record, allocating tree nodes as infections first reach them.
/// Returns the vertices infected at the end of the window, sorted.
fn percolate_window<R: Rng + ?Sized>(
    tree: &mut TreeState,
    record: &mut WindowRecord,
    source: u32,
    rng: &mut R,
) -> Result<Vec<u32>, CoreError> {
    let mut discovered: Vec<u32> = alloc::vec![source];
    let mut infected = IndexedSet::with_universe(tree.ever_count());
    infected.insert(source);
    let mut heap: BinaryHeap<Reverse<(OrderedTime, u32, u32)>> = BinaryHeap::new();
    let src_idx = record.index_of(source, rng);
    if !record.events[src_idx].times.is_empty() {
        heap.push(Reverse((
            OrderedTime(record.events[src_idx].times[0]),
            source,
            0,
        )));
    }
    while let Some(Reverse((OrderedTime(t), node, idx))) = heap.pop() {
        let ev = &record.events[record.slot_of[node as usize] as usize];
        let kind = ev.kinds[idx as usize];
        if (idx as usize + 1) < ev.times.len() {
            heap.push(Reverse((
                OrderedTime(ev.times[idx as usize + 1]),
                node,
                idx + 1,
            )));
        }
        if kind == 0 {
            infected.remove(node);
            continue;
        }
        if !infected.contains(node) {
            continue; // attempt from a recovered vertex
        }
        let slot = (kind - 1) as usize;
        let Some(target) = tree.attempt_target(node, slot)? else {
            continue; // severed edge
        };
        infected.ensure_universe(tree.ever_count());
        if infected.contains(target) {
            continue; // wasted attempt
        }
        if !discovered.contains(&target) {
            discovered.push(target);
            let tgt_idx = record.index_of(target, rng);
            let ev = &record.events[tgt_idx];
            // Events at or before the infection time are irrelevant for a
            // vertex that was healthy throughout them.
            let start = ev.times.partition_point(|&x| x <= t);
            if start < ev.times.len() {
                heap.push(Reverse((
                    OrderedTime(ev.times[start]),
                    target,
                    start as u32,
                )));
            }
        }
        infected.insert(target);
    }
    let mut out: Vec<u32> = discovered
        .into_iter()
        .filter(|&v| infected.contains(v))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Per-generation sizes of the coupled pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoupledBrwPoint {
    pub generation: usize,
    pub brw_particles: u64,
    pub process_infected: u64,
}

/// Runs the coupled (BRW, contact process) pair for the given number of
/// generations. The true process evolves as the union of the covering
/// particles' offspring over a shared mark window, so
/// `brw_particles >= process_infected` holds for every realization.
pub fn run_coupled_brw<R: Rng + ?Sized>(
    d: usize,
    lambda: f64,
    period: f64,
    generations: usize,
    node_cap: usize,
    population_cap: u64,
    rng: &mut R,
) -> Result<Vec<CoupledBrwPoint>, CoreError> {
    if period <= 0.0 {
        return Err(CoreError::Precondition("period must be positive"));
    }
    let mut tree = TreeState::new(d, TreeMode::Full, node_cap);
    let mut extras = 0u64; // particles not covering the true set
    let mut points = alloc::vec![CoupledBrwPoint {
        generation: 0,
        brw_particles: 1,
        process_infected: 1,
    }];
    let mut record = WindowRecord::new(d, lambda, period);
    for generation in 1..=generations {
        record.reset(tree.ever_count());
        let sources: Vec<u32> = tree.infected().to_vec();
        let mut covering_offspring = 0u64;
        let mut union = IndexedSet::with_universe(tree.ever_count());
        for &x in &sources {
            let reached = percolate_window(&mut tree, &mut record, x, rng)?;
            covering_offspring += reached.len() as u64;
            union.ensure_universe(tree.ever_count());
            for v in reached {
                union.insert(v);
            }
        }
        let mut extra_offspring = 0u64;
        for _ in 0..extras {
            extra_offspring += offspring_count(d, lambda, period, node_cap, rng)? as u64;
        }
        let brw = covering_offspring + extra_offspring;
        if brw > population_cap {
            return Err(CoreError::Capacity {
                what: "BRW particle population",
                limit: population_cap as usize,
            });
        }
        tree.replace_infected(&union);
        tree.advance_clock(period);
        extras = brw - union.len() as u64;
        points.push(CoupledBrwPoint {
            generation,
            brw_particles: brw,
            process_infected: union.len() as u64,
        });
        if brw == 0 {
            break;
        }
    }
    Ok(points)
}
