//! Aggregate-rate Gillespie engine for the contact process on a finite
//! graph.
//!
//! Every infected vertex carries a recovery clock of rate 1 and an
//! attempt clock of rate `lambda * d` (one rate-`lambda` clock per
//! half-edge). The next event therefore arrives after an
//! Exp(|infected| * (1 + lambda*d)) wait; a uniform infected vertex is
//! picked and recovers with probability 1/(1 + lambda*d), otherwise it
//! fires an attempt through a uniform slot. Attempts landing on an
//! already-infected neighbor are wasted, which keeps every event O(1)
//! while matching the per-edge rate description exactly.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::CoreError;
use crate::graph::Topology;
use crate::indexed_set::IndexedSet;
use crate::rng::exp_sample;

/// Default spacing of the time-series sampling grid.
pub const DEFAULT_GRID_SPACING: f64 = 0.1;

/// Mutable state of one contact-process replica.
#[derive(Clone, Debug)]
pub struct InfectionState {
    clock: f64,
    infected: IndexedSet,
    ever: Vec<bool>,
    ever_count: usize,
    event_count: u64,
}

impl InfectionState {
    pub fn new(n: usize, init: &[u32]) -> Self {
        let mut state = InfectionState {
            clock: 0.0,
            infected: IndexedSet::with_universe(n),
            ever: alloc::vec![false; n],
            ever_count: 0,
            event_count: 0,
        };
        for &v in init {
            state.infect(v);
        }
        state
    }

    fn infect(&mut self, v: u32) {
        if self.infected.insert(v) && !core::mem::replace(&mut self.ever[v as usize], true) {
            self.ever_count += 1;
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn infected_count(&self) -> usize {
        self.infected.len()
    }

    pub fn ever_count(&self) -> usize {
        self.ever_count
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn is_infected(&self, v: u32) -> bool {
        self.infected.contains(v)
    }

    pub fn was_ever_infected(&self, v: u32) -> bool {
        self.ever[v as usize]
    }

    pub fn infected(&self) -> &[u32] {
        self.infected.as_slice()
    }

    pub fn is_extinct(&self) -> bool {
        self.infected.is_empty()
    }
}

/// What a single Gillespie step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Recovery { vertex: u32 },
    Infection { source: u32, target: u32 },
    /// Attempt toward an already-infected neighbor; a no-op by design.
    Wasted { source: u32, target: u32 },
}

/// Waiting time to the next event from the current state.
fn next_event_wait<R: Rng + ?Sized>(state: &InfectionState, per_vertex: f64, rng: &mut R) -> f64 {
    exp_sample(rng, state.infected.len() as f64 * per_vertex)
}

/// Picks and applies the event that fires after the wait sampled by
/// [`next_event_wait`]. The clock must already be advanced.
fn apply_event<T: Topology, R: Rng + ?Sized>(
    state: &mut InfectionState,
    graph: &T,
    per_vertex: f64,
    rng: &mut R,
) -> Event {
    state.event_count += 1;
    let v = state.infected.sample(rng);
    if rng.gen::<f64>() * per_vertex < 1.0 {
        state.infected.remove(v);
        Event::Recovery { vertex: v }
    } else {
        let slot = rng.gen_range(0..graph.degree() as u32);
        let w = graph.neighbor(v, slot);
        if state.is_infected(w) {
            Event::Wasted { source: v, target: w }
        } else {
            state.infect(w);
            Event::Infection { source: v, target: w }
        }
    }
}

/// Advances the state by one event. Calling this on an extinct state is
/// a contract violation.
pub fn gillespie_step<T: Topology, R: Rng + ?Sized>(
    state: &mut InfectionState,
    graph: &T,
    lambda: f64,
    rng: &mut R,
) -> Result<Event, CoreError> {
    if state.infected.is_empty() {
        return Err(CoreError::Contract("gillespie_step on extinct state"));
    }
    let per_vertex = 1.0 + lambda * graph.degree() as f64;
    state.clock += next_event_wait(state, per_vertex, rng);
    Ok(apply_event(state, graph, per_vertex, rng))
}

/// Result of running a replica to extinction, horizon, or first target
/// hit.
#[derive(Clone, Debug, PartialEq)]
pub struct HitOutcome {
    pub hit: bool,
    pub hit_time: Option<f64>,
    pub extinction_time: Option<f64>,
    pub final_infected_count: usize,
}

/// One sampled point of the |infected| / |ever infected| time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub infected: usize,
    pub ever: usize,
}

/// Samples state counts on a uniform grid with last-event-before-
/// gridpoint semantics.
#[derive(Clone, Debug)]
pub struct GridSampler {
    spacing: f64,
    horizon: f64,
    next: usize,
    pub points: Vec<SeriesPoint>,
}

impl GridSampler {
    pub fn new(spacing: f64, horizon: f64) -> Self {
        GridSampler {
            spacing,
            horizon,
            next: 0,
            points: Vec::new(),
        }
    }

    fn grid_time(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    /// Records every grid point strictly before `up_to` with the counts
    /// currently in force.
    pub fn advance(&mut self, up_to: f64, infected: usize, ever: usize) {
        while self.grid_time(self.next) < up_to && self.grid_time(self.next) <= self.horizon {
            self.points.push(SeriesPoint {
                t: self.grid_time(self.next),
                infected,
                ever,
            });
            self.next += 1;
        }
    }

    /// Flushes the remaining grid (used once no further event can occur
    /// before the horizon).
    pub fn finish(&mut self, infected: usize, ever: usize) {
        self.advance(f64::INFINITY, infected, ever);
    }
}

/// Full outcome of [`run_until`].
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub hit: HitOutcome,
    pub series: Vec<SeriesPoint>,
    pub state: InfectionState,
}

/// Runs the contact process from `init` until extinction, the horizon,
/// or the first time a target vertex becomes infected. `grid` requests a
/// sampled time series with the given spacing.
pub fn run_until<T: Topology, R: Rng + ?Sized>(
    graph: &T,
    lambda: f64,
    init: &[u32],
    horizon: f64,
    targets: Option<&[u32]>,
    grid: Option<f64>,
    rng: &mut R,
) -> RunOutcome {
    run_inner(graph, lambda, init, horizon, targets, grid, true, rng)
}

/// Like [`run_until`], but a target hit is recorded without stopping the
/// run; the process always continues to extinction or the horizon.
pub fn run_watching<T: Topology, R: Rng + ?Sized>(
    graph: &T,
    lambda: f64,
    init: &[u32],
    horizon: f64,
    watch: &[u32],
    grid: Option<f64>,
    rng: &mut R,
) -> RunOutcome {
    run_inner(graph, lambda, init, horizon, Some(watch), grid, false, rng)
}

#[allow(clippy::too_many_arguments)]
fn run_inner<T: Topology, R: Rng + ?Sized>(
    graph: &T,
    lambda: f64,
    init: &[u32],
    horizon: f64,
    targets: Option<&[u32]>,
    grid: Option<f64>,
    stop_on_hit: bool,
    rng: &mut R,
) -> RunOutcome {
    let n = graph.n();
    let mut state = InfectionState::new(n, init);
    let mut is_target = alloc::vec![false; if targets.is_some() { n } else { 0 }];
    if let Some(ts) = targets {
        for &t in ts {
            is_target[t as usize] = true;
        }
    }
    let mut sampler = grid.map(|s| GridSampler::new(s, horizon));

    let mut hit = targets
        .map(|ts| ts.iter().any(|&t| state.is_infected(t)))
        .unwrap_or(false);
    let mut hit_time = if hit { Some(0.0) } else { None };
    let mut extinction_time = if state.is_extinct() { Some(0.0) } else { None };
    let per_vertex = 1.0 + lambda * graph.degree() as f64;

    while !(hit && stop_on_hit) && !state.is_extinct() {
        let t = state.clock + next_event_wait(&state, per_vertex, rng);
        if t > horizon {
            state.clock = horizon;
            break;
        }
        if let Some(s) = sampler.as_mut() {
            s.advance(t, state.infected_count(), state.ever_count());
        }
        state.clock = t;
        match apply_event(&mut state, graph, per_vertex, rng) {
            Event::Infection { target, .. } => {
                if !hit && targets.is_some() && is_target[target as usize] {
                    hit = true;
                    hit_time = Some(t);
                }
            }
            Event::Recovery { .. } => {
                if state.is_extinct() {
                    extinction_time = Some(t);
                }
            }
            Event::Wasted { .. } => {}
        }
    }
    if let Some(s) = sampler.as_mut() {
        if hit && stop_on_hit {
            // The run stops here; later grid points are not observed.
            s.advance(state.clock, state.infected_count(), state.ever_count());
        } else {
            s.finish(state.infected_count(), state.ever_count());
        }
    }
    RunOutcome {
        hit: HitOutcome {
            hit,
            hit_time,
            extinction_time,
            final_infected_count: state.infected_count(),
        },
        series: sampler.map(|s| s.points).unwrap_or_default(),
        state,
    }
}
