//! Grow-and-explore couplings: build the random regular graph and the
//! contact process in tandem.
//!
//! Three constructions share one half-edge pool:
//!
//! * the vanilla version — infection attempts through unmatched
//!   half-edges draw a uniform partner from the pool, so graph edges
//!   appear exactly when the infection first crosses them;
//! * the cover-tree version — the process runs on the infinite tree and
//!   a labeling map projects its BLUE part onto the finite graph, with
//!   per-copy slot/half-edge bindings keeping every attempt uniform over
//!   the d half-edges of the projected vertex;
//! * the independent-pair version — two cover-tree processes with
//!   independent tree randomness whose labelings consume one shared
//!   pool sequentially.

use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::contact::{GridSampler, HitOutcome, SeriesPoint};
use crate::error::CoreError;
use crate::graph::Multigraph;
use crate::indexed_set::IndexedSet;
use crate::rng::exp_sample;

const NONE: u32 = u32::MAX;

/// Unmatched half-edges with O(1) uniform draw/delete plus the partial
/// partner map. A half-edge is in exactly one of {pool, partner map}.
#[derive(Clone, Debug)]
pub struct HalfEdgePool {
    items: Vec<u32>,
    pos: Vec<u32>,
    partner: Vec<u32>,
    n: usize,
    d: usize,
}

impl HalfEdgePool {
    pub fn new(n: usize, d: usize) -> Result<Self, CoreError> {
        if n == 0 || d == 0 {
            return Err(CoreError::Precondition("n and d must be positive"));
        }
        if !(n * d).is_multiple_of(2) {
            return Err(CoreError::Precondition("n*d must be even"));
        }
        Ok(HalfEdgePool {
            items: (0..(n * d) as u32).collect(),
            pos: (0..(n * d) as u32).collect(),
            partner: alloc::vec![NONE; n * d],
            n,
            d,
        })
    }

    pub fn unmatched_len(&self) -> usize {
        self.items.len()
    }

    pub fn matched_pairs(&self) -> usize {
        (self.n * self.d - self.items.len()) / 2
    }

    pub fn partner_of(&self, h: u32) -> Option<u32> {
        let p = self.partner[h as usize];
        (p != NONE).then_some(p)
    }

    fn remove_from_pool(&mut self, h: u32) {
        let i = self.pos[h as usize] as usize;
        debug_assert!(i != NONE as usize);
        let last = *self.items.last().unwrap();
        self.items[i] = last;
        self.pos[last as usize] = i as u32;
        self.items.pop();
        self.pos[h as usize] = NONE;
    }

    /// Matches two unmatched half-edges.
    pub fn match_pair(&mut self, a: u32, b: u32) {
        debug_assert!(a != b);
        debug_assert!(self.partner[a as usize] == NONE && self.partner[b as usize] == NONE);
        self.remove_from_pool(a);
        self.remove_from_pool(b);
        self.partner[a as usize] = b;
        self.partner[b as usize] = a;
    }

    /// Uniform draw from the pool excluding `h` (draw until different;
    /// exact since every other id is equally likely on acceptance).
    pub fn draw_excluding<R: Rng + ?Sized>(&self, h: u32, rng: &mut R) -> u32 {
        debug_assert!(self.items.len() >= 2);
        loop {
            let x = self.items[rng.gen_range(0..self.items.len())];
            if x != h {
                return x;
            }
        }
    }

    /// Completes the matching by the same shuffle-and-pair routine used
    /// for fresh matchings, and returns the finished multigraph.
    pub fn complete<R: Rng + ?Sized>(mut self, rng: &mut R) -> Multigraph {
        self.items.shuffle(rng);
        for pair in self.items.chunks_exact(2) {
            self.partner[pair[0] as usize] = pair[1];
            self.partner[pair[1] as usize] = pair[0];
        }
        Multigraph::from_partner(self.n, self.d, self.partner)
            .expect("completed pool is a perfect matching")
    }
}

/// Event-log record (finite-graph view) for debugging and test harnesses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExploreEvent {
    pub t: f64,
    pub kind: ExploreEventKind,
    pub source: u32,
    pub target: u32,
    pub new_edge: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExploreEventKind {
    Recovery,
    Infection,
    Wasted,
}

/// Outcome of one vanilla grow-and-explore replica.
#[derive(Clone, Debug)]
pub struct VanillaOutcome {
    pub graph: Multigraph,
    pub hit: HitOutcome,
    pub series: Vec<SeriesPoint>,
    /// Vertices infected at the stop time.
    pub final_infected: Vec<u32>,
    pub ever_infected_count: usize,
    /// Edges matched by exploration (excludes the final completion).
    pub explored_edges: usize,
    pub events: Vec<ExploreEvent>,
}

/// Vanilla grow and explore: run the contact process from `init`,
/// revealing edges only when an attempt crosses an unmatched half-edge;
/// at the stop time the pool is completed to a uniform matching.
#[allow(clippy::too_many_arguments)]
pub fn run_vanilla<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    lambda: f64,
    init: &[u32],
    horizon: f64,
    targets: Option<&[u32]>,
    grid: Option<f64>,
    log: bool,
    rng: &mut R,
) -> Result<VanillaOutcome, CoreError> {
    run_vanilla_inner(n, d, lambda, init, horizon, targets, grid, log, true, rng)
}

/// [`run_vanilla`] with hit recording that does not stop the run.
#[allow(clippy::too_many_arguments)]
pub fn run_vanilla_watching<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    lambda: f64,
    init: &[u32],
    horizon: f64,
    watch: &[u32],
    grid: Option<f64>,
    rng: &mut R,
) -> Result<VanillaOutcome, CoreError> {
    run_vanilla_inner(n, d, lambda, init, horizon, Some(watch), grid, false, false, rng)
}

#[allow(clippy::too_many_arguments)]
fn run_vanilla_inner<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    lambda: f64,
    init: &[u32],
    horizon: f64,
    targets: Option<&[u32]>,
    grid: Option<f64>,
    log: bool,
    stop_on_hit: bool,
    rng: &mut R,
) -> Result<VanillaOutcome, CoreError> {
    let mut pool = HalfEdgePool::new(n, d)?;
    let mut infected = IndexedSet::with_universe(n);
    let mut ever = alloc::vec![false; n];
    let mut ever_count = 0usize;
    for &v in init {
        if infected.insert(v) && !core::mem::replace(&mut ever[v as usize], true) {
            ever_count += 1;
        }
    }
    let mut is_target = alloc::vec![false; if targets.is_some() { n } else { 0 }];
    if let Some(ts) = targets {
        for &t in ts {
            is_target[t as usize] = true;
        }
    }
    let mut sampler = grid.map(|s| GridSampler::new(s, horizon));
    let mut events = Vec::new();
    let mut hit = targets
        .map(|ts| ts.iter().any(|&t| infected.contains(t)))
        .unwrap_or(false);
    let mut hit_time = if hit { Some(0.0) } else { None };
    let mut extinction_time = if infected.is_empty() { Some(0.0) } else { None };
    let per_vertex = 1.0 + lambda * d as f64;
    let mut clock = 0.0;
    let mut explored_edges = 0usize;

    while !(hit && stop_on_hit) && !infected.is_empty() && clock < horizon {
        let t = clock + exp_sample(rng, infected.len() as f64 * per_vertex);
        if t > horizon {
            clock = horizon;
            break;
        }
        if let Some(s) = sampler.as_mut() {
            s.advance(t, infected.len(), ever_count);
        }
        clock = t;
        let v = infected.sample(rng);
        if rng.gen::<f64>() * per_vertex < 1.0 {
            infected.remove(v);
            if log {
                events.push(ExploreEvent {
                    t,
                    kind: ExploreEventKind::Recovery,
                    source: v,
                    target: v,
                    new_edge: false,
                });
            }
            if infected.is_empty() {
                extinction_time = Some(t);
            }
            continue;
        }
        let slot = rng.gen_range(0..d as u32);
        let h = v * d as u32 + slot;
        let (w_half, new_edge) = match pool.partner_of(h) {
            Some(p) => (p, false),
            None => {
                let p = pool.draw_excluding(h, rng);
                pool.match_pair(h, p);
                explored_edges += 1;
                (p, true)
            }
        };
        let w = w_half / d as u32;
        let newly = !infected.contains(w);
        if newly {
            infected.insert(w);
            if !core::mem::replace(&mut ever[w as usize], true) {
                ever_count += 1;
            }
        }
        if log {
            events.push(ExploreEvent {
                t,
                kind: if newly {
                    ExploreEventKind::Infection
                } else {
                    ExploreEventKind::Wasted
                },
                source: v,
                target: w,
                new_edge,
            });
        }
        if newly && !hit && targets.is_some() && is_target[w as usize] {
            hit = true;
            hit_time = Some(t);
        }
    }
    if let Some(s) = sampler.as_mut() {
        if hit && stop_on_hit {
            s.advance(clock, infected.len(), ever_count);
        } else {
            s.finish(infected.len(), ever_count);
        }
    }
    let final_infected: Vec<u32> = {
        let mut v: Vec<u32> = infected.iter().collect();
        v.sort_unstable();
        v
    };
    let graph = pool.complete(rng);
    Ok(VanillaOutcome {
        graph,
        hit: HitOutcome {
            hit,
            hit_time,
            extinction_time,
            final_infected_count: final_infected.len(),
        },
        series: sampler.map(|s| s.points).unwrap_or_default(),
        final_infected,
        ever_infected_count: ever_count,
        explored_edges,
        events,
    })
}

/// Vanilla run conditioned on the completed graph being simple, by
/// resampling whole replicas (graph and process together).
#[allow(clippy::too_many_arguments)]
pub fn run_vanilla_conditioned_simple<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    lambda: f64,
    init: &[u32],
    horizon: f64,
    targets: Option<&[u32]>,
    grid: Option<f64>,
    max_attempts: u64,
    rng: &mut R,
) -> Result<VanillaOutcome, CoreError> {
    for _ in 0..max_attempts {
        let out = run_vanilla(n, d, lambda, init, horizon, targets, grid, false, rng)?;
        if out.graph.is_simple() {
            return Ok(out);
        }
    }
    Err(CoreError::Exhausted {
        what: "vanilla simplicity conditioning",
        attempts: max_attempts,
    })
}

const UNCOLORED: u8 = 0;
const BLUE: u8 = 1;
const RED: u8 = 2;

/// One source's cover tree: lazily allocated T_d vertices with labels,
/// colors, and per-slot bindings onto half-edges of the labeled vertex.
#[derive(Clone, Debug)]
struct CoverTree {
    d: usize,
    parent: Vec<u32>,
    /// Child links; stride d. For the root, slots 0..d are children;
    /// for other nodes slot 0 is the parent and slots 1..d children.
    children: Vec<u32>,
    label: Vec<u32>,
    /// Half-edge of the node's label bound to each tree slot.
    binding: Vec<u32>,
    color: Vec<u8>,
    infected: IndexedSet,
}

impl CoverTree {
    fn new(d: usize, source_label: u32) -> Self {
        let mut infected = IndexedSet::with_universe(1);
        infected.insert(0);
        CoverTree {
            d,
            parent: alloc::vec![NONE],
            children: alloc::vec![NONE; d],
            label: alloc::vec![source_label],
            binding: alloc::vec![NONE; d],
            color: alloc::vec![BLUE],
            infected,
        }
    }

    fn allocate(&mut self, parent: u32, attempt_slot: usize) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(parent);
        self.children.resize(self.children.len() + self.d, NONE);
        self.label.push(NONE);
        self.binding.resize(self.binding.len() + self.d, NONE);
        self.color.push(UNCOLORED);
        self.children[parent as usize * self.d + attempt_slot] = id;
        self.infected.ensure_universe(self.parent.len());
        id
    }

    /// Tree neighbor reached through an attempt slot, allocating the
    /// child if it does not exist yet. Slot 0 of a non-root node is its
    /// parent.
    fn neighbor_through(&mut self, node: u32, slot: usize) -> u32 {
        if node != 0 && slot == 0 {
            return self.parent[node as usize];
        }
        match self.children[node as usize * self.d + slot] {
            NONE => self.allocate(node, slot),
            c => c,
        }
    }

    fn bound_count(&self, node: u32) -> usize {
        (0..self.d)
            .filter(|&s| self.binding[node as usize * self.d + s] != NONE)
            .count()
    }

    fn blue_count(&self) -> usize {
        self.infected
            .iter()
            .filter(|&v| self.color[v as usize] == BLUE)
            .count()
    }
}

/// A multi-source cover-tree process sharing one half-edge pool and one
/// BLUE occupancy table (at most one blue copy of a finite vertex may be
/// infected at a time).
#[derive(Clone, Debug)]
pub struct CoverRun {
    n: usize,
    d: usize,
    lambda: f64,
    trees: Vec<CoverTree>,
    /// 1 when a blue-infected tree vertex currently carries the label.
    blue_occ: Vec<u8>,
    proj_infected: IndexedSet,
    proj_ever: Vec<bool>,
    proj_ever_count: usize,
    ever_labeled: Vec<bool>,
    /// Some finite vertex received two tree labels (in this process).
    pub label_reused: bool,
    /// No label reuse and no already-matched edge consumed so far; while
    /// this holds the projection is injective on the whole tree state.
    pub pristine: bool,
    clock: f64,
    event_count: u64,
    total_infected: usize,
}

impl CoverRun {
    pub fn new(n: usize, d: usize, lambda: f64, sources: &[u32]) -> Result<Self, CoreError> {
        let mut seen = alloc::vec![false; n];
        for &s in sources {
            if core::mem::replace(&mut seen[s as usize], true) {
                return Err(CoreError::Precondition("sources must be distinct"));
            }
        }
        if d > 16 {
            return Err(CoreError::Precondition("cover-tree runs support d <= 16"));
        }
        let mut run = CoverRun {
            n,
            d,
            lambda,
            trees: sources.iter().map(|&s| CoverTree::new(d, s)).collect(),
            blue_occ: alloc::vec![0; n],
            proj_infected: IndexedSet::with_universe(n),
            proj_ever: alloc::vec![false; n],
            proj_ever_count: 0,
            ever_labeled: alloc::vec![false; n],
            label_reused: false,
            pristine: true,
            clock: 0.0,
            event_count: 0,
            total_infected: sources.len(),
        };
        for &s in sources {
            run.blue_occ[s as usize] = 1;
            run.proj_infect(s);
            run.ever_labeled[s as usize] = true;
        }
        Ok(run)
    }

    fn proj_infect(&mut self, w: u32) {
        if self.proj_infected.insert(w)
            && !core::mem::replace(&mut self.proj_ever[w as usize], true)
        {
            self.proj_ever_count += 1;
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn projected_count(&self) -> usize {
        self.proj_infected.len()
    }

    pub fn projected_ever_count(&self) -> usize {
        self.proj_ever_count
    }

    pub fn projected_contains(&self, w: u32) -> bool {
        self.proj_infected.contains(w)
    }

    pub fn projected_sorted(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.proj_infected.iter().collect();
        v.sort_unstable();
        v
    }

    pub fn tree_infected_total(&self) -> usize {
        self.total_infected
    }

    pub fn tree_ever_counts(&self) -> Vec<usize> {
        self.trees.iter().map(|t| t.parent.len()).collect()
    }

    pub fn is_extinct(&self) -> bool {
        self.total_infected == 0
    }

    /// Blue tree copies must biject onto the projected set.
    pub fn check_projection_bijection(&self) -> bool {
        let blue: usize = self.trees.iter().map(CoverTree::blue_count).sum();
        blue == self.proj_infected.len()
    }

    /// Finite labels ever assigned in this process, sorted.
    pub fn labels_ever(&self) -> Vec<u32> {
        (0..self.n as u32)
            .filter(|&w| self.ever_labeled[w as usize])
            .collect()
    }

    fn recover(&mut self, tree_idx: usize, node: u32) {
        let tree = &mut self.trees[tree_idx];
        tree.infected.remove(node);
        self.total_infected -= 1;
        if tree.color[node as usize] == BLUE {
            let w = tree.label[node as usize];
            debug_assert_eq!(self.blue_occ[w as usize], 1);
            self.blue_occ[w as usize] = 0;
            self.proj_infected.remove(w);
        }
    }

    /// Delivers a blue attempt: the finite target is `w`, the tree target
    /// `node` of tree `tree_idx`. Handles coloring, collision marking and
    /// the projected set.
    fn deliver_blue(&mut self, tree_idx: usize, node: u32, w: u32) -> ExploreEventKind {
        let tree = &mut self.trees[tree_idx];
        tree.infected.ensure_universe(tree.parent.len());
        if !tree.infected.contains(node) {
            tree.infected.insert(node);
            self.total_infected += 1;
            if self.blue_occ[w as usize] == 0 {
                tree.color[node as usize] = BLUE;
                self.blue_occ[w as usize] = 1;
                self.proj_infect(w);
                ExploreEventKind::Infection
            } else {
                // Two simultaneous blue infections of one finite vertex
                // are not allowed; the newcomer joins the discarded side.
                tree.color[node as usize] = RED;
                self.pristine = false;
                ExploreEventKind::Wasted
            }
        } else if tree.color[node as usize] == RED && self.blue_occ[w as usize] == 0 {
            // The finite vertex is healthy but its tree copy is occupied
            // by a discarded (red) infection: the label re-enters the
            // projection through the existing infection.
            tree.color[node as usize] = BLUE;
            self.blue_occ[w as usize] = 1;
            self.proj_infect(w);
            ExploreEventKind::Infection
        } else {
            ExploreEventKind::Wasted
        }
    }

    /// Applies one event after the caller advanced the clock by the
    /// sampled wait. Returns the projected-view event, if any.
    pub fn step_after_wait<R: Rng + ?Sized>(
        &mut self,
        wait: f64,
        pool: &mut HalfEdgePool,
        rng: &mut R,
    ) -> Result<Option<ExploreEvent>, CoreError> {
        debug_assert!(self.total_infected > 0);
        self.clock += wait;
        self.event_count += 1;
        let t = self.clock;
        let d = self.d;
        let per_vertex = 1.0 + self.lambda * d as f64;

        // Uniform infected tree vertex across all trees.
        let mut r = rng.gen_range(0..self.total_infected);
        let mut tree_idx = 0usize;
        while r >= self.trees[tree_idx].infected.len() {
            r -= self.trees[tree_idx].infected.len();
            tree_idx += 1;
        }
        let v = self.trees[tree_idx].infected.as_slice()[r];

        if rng.gen::<f64>() * per_vertex < 1.0 {
            let was_blue = self.trees[tree_idx].color[v as usize] == BLUE;
            let label = self.trees[tree_idx].label[v as usize];
            self.recover(tree_idx, v);
            return Ok(was_blue.then_some(ExploreEvent {
                t,
                kind: ExploreEventKind::Recovery,
                source: label,
                target: label,
                new_edge: false,
            }));
        }

        let slot = rng.gen_range(0..d);
        if self.trees[tree_idx].color[v as usize] == RED {
            // Red attempts evolve the tree only; no labeling, no pool.
            let tree = &mut self.trees[tree_idx];
            let z = tree.neighbor_through(v, slot);
            tree.infected.ensure_universe(tree.parent.len());
            if !tree.infected.contains(z) {
                tree.infected.insert(z);
                tree.color[z as usize] = RED;
                self.total_infected += 1;
            }
            return Ok(None);
        }

        // Blue attempt from the copy of x.
        let x = self.trees[tree_idx].label[v as usize];
        debug_assert!(x != NONE);
        let bound = self.trees[tree_idx].binding[v as usize * d + slot];
        let (z, w, new_edge) = if bound != NONE {
            // Labeled neighbor: deliver along the bound half-edge.
            let w_half = pool
                .partner_of(bound)
                .expect("bound half-edges are always matched");
            let z = self.trees[tree_idx].neighbor_through(v, slot);
            debug_assert_eq!(self.trees[tree_idx].label[z as usize], w_half / d as u32);
            (z, w_half / d as u32, false)
        } else {
            // Unlabeled neighbor: draw a uniform unbound half-edge of x.
            let tree = &self.trees[tree_idx];
            let mut unbound: [u32; 16] = [NONE; 16];
            let mut count = 0usize;
            'slots: for i in 0..d as u32 {
                let h = x * d as u32 + i;
                for s in 0..d {
                    if tree.binding[v as usize * d + s] == h {
                        continue 'slots;
                    }
                }
                unbound[count] = h;
                count += 1;
            }
            debug_assert_eq!(count, d - tree.bound_count(v));
            let h = unbound[rng.gen_range(0..count)];
            let (w_half, new_edge) = match pool.partner_of(h) {
                Some(p) => {
                    // An already-determined edge of x gets reflected into
                    // this copy's neighborhood.
                    self.pristine = false;
                    (p, false)
                }
                None => {
                    let p = pool.draw_excluding(h, rng);
                    pool.match_pair(h, p);
                    (p, true)
                }
            };
            let w = w_half / d as u32;
            let tree = &mut self.trees[tree_idx];
            debug_assert!(v == 0 || slot != 0, "parent slots of labeled vertices are bound");
            let z = tree.neighbor_through(v, slot);
            debug_assert_eq!(tree.label[z as usize], NONE);
            tree.label[z as usize] = w;
            tree.binding[v as usize * d + slot] = h;
            // The fresh vertex sees its labeler through slot 0.
            tree.binding[z as usize * d] = w_half;
            if core::mem::replace(&mut self.ever_labeled[w as usize], true) {
                self.label_reused = true;
                self.pristine = false;
            }
            (z, w, new_edge)
        };
        let kind = self.deliver_blue(tree_idx, z, w);
        Ok(Some(ExploreEvent {
            t,
            kind,
            source: x,
            target: w,
            new_edge,
        }))
    }
}

/// Outcome of a cover-tree (or multi-source cover-tree) replica.
#[derive(Clone, Debug)]
pub struct CoverOutcome {
    pub graph: Multigraph,
    pub hit: HitOutcome,
    pub series: Vec<SeriesPoint>,
    pub projected_final: Vec<u32>,
    pub projected_ever_count: usize,
    pub tree_ever_counts: Vec<usize>,
    pub label_reused: bool,
    pub events: Vec<ExploreEvent>,
}

/// Drives a cover run over a window against a shared pool. Stops on
/// extinction, horizon, or first projected hit of a target.
#[allow(clippy::too_many_arguments)]
pub fn drive_cover_window<R: Rng + ?Sized>(
    run: &mut CoverRun,
    pool: &mut HalfEdgePool,
    horizon: f64,
    targets: Option<&[u32]>,
    grid: Option<f64>,
    log: bool,
    rng: &mut R,
) -> Result<(HitOutcome, Vec<SeriesPoint>, Vec<ExploreEvent>), CoreError> {
    let per_vertex = 1.0 + run.lambda * run.d as f64;
    let mut sampler = grid.map(|s| GridSampler::new(s, horizon));
    let mut events = Vec::new();
    let mut is_target = alloc::vec![false; if targets.is_some() { run.n } else { 0 }];
    if let Some(ts) = targets {
        for &t in ts {
            is_target[t as usize] = true;
        }
    }
    let mut hit = targets
        .map(|ts| ts.iter().any(|&t| run.projected_contains(t)))
        .unwrap_or(false);
    let mut hit_time = if hit { Some(run.clock) } else { None };
    let mut extinction_time = run.is_extinct().then_some(run.clock);
    let window_end = run.clock + horizon;

    while !hit && !run.is_extinct() {
        let wait = exp_sample(rng, run.total_infected as f64 * per_vertex);
        if run.clock + wait > window_end {
            run.clock = window_end;
            break;
        }
        if let Some(s) = sampler.as_mut() {
            s.advance(run.clock + wait, run.projected_count(), run.projected_ever_count());
        }
        if let Some(ev) = run.step_after_wait(wait, pool, rng)? {
            if log {
                events.push(ev);
            }
            if ev.kind == ExploreEventKind::Infection
                && targets.is_some()
                && is_target[ev.target as usize]
            {
                hit = true;
                hit_time = Some(ev.t);
            }
        }
        debug_assert!(run.check_projection_bijection());
        if run.is_extinct() {
            extinction_time = Some(run.clock);
        }
    }
    if let Some(s) = sampler.as_mut() {
        if hit {
            s.advance(run.clock, run.projected_count(), run.projected_ever_count());
        } else {
            s.finish(run.projected_count(), run.projected_ever_count());
        }
    }
    Ok((
        HitOutcome {
            hit,
            hit_time,
            extinction_time,
            final_infected_count: run.projected_count(),
        },
        sampler.map(|s| s.points).unwrap_or_default(),
        events,
    ))
}

/// Cover-tree grow and explore with one or more sources: the projected
/// BLUE trajectory is distributed exactly as the vanilla construction.
#[allow(clippy::too_many_arguments)]
pub fn run_cover_tree<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    lambda: f64,
    sources: &[u32],
    horizon: f64,
    targets: Option<&[u32]>,
    grid: Option<f64>,
    log: bool,
    rng: &mut R,
) -> Result<CoverOutcome, CoreError> {
    let mut pool = HalfEdgePool::new(n, d)?;
    let mut run = CoverRun::new(n, d, lambda, sources)?;
    let (hit, series, events) =
        drive_cover_window(&mut run, &mut pool, horizon, targets, grid, log, rng)?;
    let graph = pool.complete(rng);
    Ok(CoverOutcome {
        graph,
        hit,
        series,
        projected_final: run.projected_sorted(),
        projected_ever_count: run.projected_ever_count(),
        tree_ever_counts: run.tree_ever_counts(),
        label_reused: run.label_reused,
        events,
    })
}

/// Outcome of the two-independent-processes construction.
#[derive(Clone, Debug)]
pub struct PairOutcome {
    pub graph: Multigraph,
    pub u_labels: Vec<u32>,
    pub v_labels: Vec<u32>,
    pub u_survived: bool,
    pub v_survived: bool,
    /// Projected infected sets intersect at the end times.
    pub intersects: bool,
    /// Good-event accounting: a label reused within either process, or
    /// the two processes' ever-label sets overlapping.
    pub label_reused_within: bool,
    pub label_sets_overlap: bool,
}

/// Two independent cover-tree contact processes from `u` and `v` whose
/// labelings consume one shared half-edge pool sequentially (`u` first
/// unless `second_first` is set; the law does not depend on the order).
#[allow(clippy::too_many_arguments)]
pub fn run_independent_pair<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    lambda: f64,
    u: u32,
    v: u32,
    horizon_u: f64,
    horizon_v: f64,
    second_first: bool,
    rng: &mut R,
) -> Result<PairOutcome, CoreError> {
    if u == v {
        return Err(CoreError::Precondition("pair sources must differ"));
    }
    let mut pool = HalfEdgePool::new(n, d)?;
    let mut run_u = CoverRun::new(n, d, lambda, &[u])?;
    let mut run_v = CoverRun::new(n, d, lambda, &[v])?;
    if second_first {
        drive_cover_window(&mut run_v, &mut pool, horizon_v, None, None, false, rng)?;
        drive_cover_window(&mut run_u, &mut pool, horizon_u, None, None, false, rng)?;
    } else {
        drive_cover_window(&mut run_u, &mut pool, horizon_u, None, None, false, rng)?;
        drive_cover_window(&mut run_v, &mut pool, horizon_v, None, None, false, rng)?;
    }
    let graph = pool.complete(rng);
    let u_labels = run_u.projected_sorted();
    let v_labels = run_v.projected_sorted();
    let intersects = {
        let mut i = 0;
        let mut j = 0;
        let mut found = false;
        while i < u_labels.len() && j < v_labels.len() {
            match u_labels[i].cmp(&v_labels[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    found = true;
                    break;
                }
            }
        }
        found
    };
    let overlap = run_u
        .labels_ever()
        .iter()
        .any(|&w| run_v.ever_labeled[w as usize]);
    Ok(PairOutcome {
        graph,
        u_labels,
        v_labels,
        u_survived: !run_u.is_extinct(),
        v_survived: !run_v.is_extinct(),
        intersects,
        label_reused_within: run_u.label_reused || run_v.label_reused,
        label_sets_overlap: overlap,
    })
}
