//! Contact process on the infinite d-regular tree, grown lazily.
//!
//! Nodes are allocated exactly when first infected (plus the root), so
//! the arena always equals the ever-infected set and stays connected.
//! The root either keeps all d edges (full mode) or all but one edge is
//! removed (severed mode); a severed attempt across a removed edge is a
//! blocked no-op, which also gives the natural pathwise coupling
//! `severed ⊆ full` when both are driven by one event stream.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::CoreError;
use crate::indexed_set::IndexedSet;
use crate::rng::exp_sample;

pub const NONE: u32 = u32::MAX;

/// Default arena capacity; exceeding it is an error, not truncation.
pub const DEFAULT_NODE_CAP: usize = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeMode {
    /// Root keeps its d edges.
    Full,
    /// All but one root edge removed; infection cannot cross them.
    Severed,
}

/// Lazily grown arena of tree vertices with infection bookkeeping.
#[derive(Clone, Debug)]
pub struct TreeState {
    d: usize,
    mode: TreeMode,
    node_cap: usize,
    parent: Vec<u32>,
    /// Child links, stride d per node; slot c is only meaningful for
    /// c < child_capacity(node).
    children: Vec<u32>,
    child_count: Vec<u16>,
    infected: IndexedSet,
    /// Infected vertices with an unallocated child slot, maintained
    /// incrementally (one counter update per event).
    pioneers: usize,
    clock: f64,
    event_count: u64,
}

/// Root vertex id.
pub const ROOT: u32 = 0;

impl TreeState {
    pub fn new(d: usize, mode: TreeMode, node_cap: usize) -> Self {
        assert!(d >= 2, "tree degree must be at least 2");
        let mut infected = IndexedSet::with_universe(1);
        infected.insert(ROOT);
        TreeState {
            d,
            mode,
            node_cap,
            parent: alloc::vec![NONE],
            children: alloc::vec![NONE; d],
            child_count: alloc::vec![0],
            infected,
            pioneers: 1,
            clock: 0.0,
            event_count: 0,
        }
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> TreeMode {
        self.mode
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    /// Number of allocated (= ever infected) vertices.
    pub fn ever_count(&self) -> usize {
        self.parent.len()
    }

    pub fn infected_count(&self) -> usize {
        self.infected.len()
    }

    pub fn infected(&self) -> &[u32] {
        self.infected.as_slice()
    }

    pub fn is_infected(&self, node: u32) -> bool {
        self.infected.contains(node)
    }

    pub fn is_extinct(&self) -> bool {
        self.infected.is_empty()
    }

    pub fn parent_of(&self, node: u32) -> Option<u32> {
        let p = self.parent[node as usize];
        (p != NONE).then_some(p)
    }

    pub fn child(&self, node: u32, slot: usize) -> Option<u32> {
        debug_assert!(slot < self.child_capacity(node));
        let c = self.children[node as usize * self.d + slot];
        (c != NONE).then_some(c)
    }

    /// How many child slots the node has in its tree: d for the full
    /// root, 1 for the severed root, d-1 otherwise.
    pub fn child_capacity(&self, node: u32) -> usize {
        if node == ROOT {
            match self.mode {
                TreeMode::Full => self.d,
                TreeMode::Severed => 1,
            }
        } else {
            self.d - 1
        }
    }

    pub fn allocated_children(&self, node: u32) -> u16 {
        self.child_count[node as usize]
    }

    /// Fast pioneer rule: an infected vertex is a pioneer iff some child
    /// slot was never allocated. Valid because the ever-infected set is
    /// connected (the parent of every non-root vertex is ever infected),
    /// so a never-infected neighbor is exactly an unallocated child.
    pub fn is_pioneer(&self, node: u32) -> bool {
        self.infected.contains(node)
            && (self.child_count[node as usize] as usize) < self.child_capacity(node)
    }

    pub fn pioneer_count(&self) -> usize {
        self.pioneers
    }

    /// Direct scan over the infected set; equals [`Self::pioneer_count`].
    pub fn pioneer_count_by_scan(&self) -> usize {
        self.infected
            .iter()
            .filter(|&v| {
                (self.child_count[v as usize] as usize) < self.child_capacity(v)
            })
            .count()
    }

    /// Number of border points of the ever-infected set: vertices with
    /// fewer than d ever-infected neighbors in T_d.
    pub fn border_count_of_ever(&self) -> usize {
        (0..self.ever_count() as u32)
            .filter(|&v| {
                let in_set =
                    self.child_count[v as usize] as usize + usize::from(v != ROOT);
                in_set < self.d
            })
            .count()
    }

    fn allocate_child(&mut self, node: u32, slot: usize) -> Result<u32, CoreError> {
        if self.ever_count() >= self.node_cap {
            return Err(CoreError::Capacity {
                what: "tree arena nodes",
                limit: self.node_cap,
            });
        }
        let id = self.parent.len() as u32;
        self.parent.push(node);
        self.children.resize(self.children.len() + self.d, NONE);
        self.child_count.push(0);
        self.children[node as usize * self.d + slot] = id;
        self.child_count[node as usize] += 1;
        if self.infected.contains(node)
            && self.child_count[node as usize] as usize == self.child_capacity(node)
        {
            self.pioneers -= 1;
        }
        self.infected.ensure_universe(self.parent.len());
        Ok(id)
    }

    /// Resolves an attempt from `node` through tree slot `slot` in
    /// [0, d). Returns the target, allocating it if never infected, or
    /// None when the slot crosses a severed edge.
    pub(crate) fn attempt_target(&mut self, node: u32, slot: usize) -> Result<Option<u32>, CoreError> {
        let child_slot = if node == ROOT {
            if slot >= self.child_capacity(ROOT) {
                return Ok(None); // severed edge
            }
            slot
        } else if slot == 0 {
            return Ok(Some(self.parent[node as usize]));
        } else {
            slot - 1
        };
        match self.child(node, child_slot) {
            Some(c) => Ok(Some(c)),
            None => self.allocate_child(node, child_slot).map(Some),
        }
    }

    fn infect(&mut self, node: u32) {
        if self.infected.insert(node)
            && (self.child_count[node as usize] as usize) < self.child_capacity(node)
        {
            self.pioneers += 1;
        }
    }

    fn remove_infected(&mut self, node: u32) {
        if self.infected.remove(node)
            && (self.child_count[node as usize] as usize) < self.child_capacity(node)
        {
            self.pioneers -= 1;
        }
    }

    /// Advances the clock by a pre-sampled wait and applies one event
    /// (drivers that manage horizon checks themselves use this).
    pub(crate) fn step_after_wait<R: Rng + ?Sized>(
        &mut self,
        wait: f64,
        lambda: f64,
        rng: &mut R,
    ) -> Result<TreeEvent, CoreError> {
        self.clock += wait;
        self.event_count += 1;
        let per_vertex = 1.0 + lambda * self.d as f64;
        let v = self.infected.sample(rng);
        if rng.gen::<f64>() * per_vertex < 1.0 {
            self.remove_infected(v);
            return Ok(TreeEvent::Recovery { node: v });
        }
        let slot = rng.gen_range(0..self.d);
        match self.attempt_target(v, slot)? {
            None => Ok(TreeEvent::Blocked { source: v }),
            Some(w) => {
                if self.is_infected(w) {
                    Ok(TreeEvent::Blocked { source: v })
                } else {
                    self.infect(w);
                    Ok(TreeEvent::Infection { source: v, target: w })
                }
            }
        }
    }

    /// Swaps in a new infected set (coupled BRW generation boundary).
    pub(crate) fn replace_infected(&mut self, set: &IndexedSet) {
        self.infected.clear();
        self.infected.ensure_universe(self.ever_count());
        for v in set.iter() {
            self.infected.insert(v);
        }
        self.pioneers = self.pioneer_count_by_scan();
    }

    pub(crate) fn advance_clock(&mut self, dt: f64) {
        self.clock += dt;
    }
}

/// One event of the tree process.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeEvent {
    Recovery { node: u32 },
    Infection { source: u32, target: u32 },
    /// Attempt toward an infected neighbor or across a severed edge.
    Blocked { source: u32 },
}

/// Advances the tree process by one event.
pub fn tree_step<R: Rng + ?Sized>(
    state: &mut TreeState,
    lambda: f64,
    rng: &mut R,
) -> Result<TreeEvent, CoreError> {
    if state.infected.is_empty() {
        return Err(CoreError::Contract("tree_step on extinct state"));
    }
    let per_vertex = 1.0 + lambda * state.d as f64;
    let wait = exp_sample(rng, state.infected.len() as f64 * per_vertex);
    state.step_after_wait(wait, lambda, rng)
}

/// One sampled point of a tree run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreePoint {
    pub t: f64,
    pub infected: usize,
    pub ever: usize,
    pub pioneers: usize,
}

/// Outcome of [`run_tree`]. When the arena capacity was exhausted the
/// series is truncated and `capacity_reached_at` carries the time.
#[derive(Clone, Debug)]
pub struct TreeRun {
    pub series: Vec<TreePoint>,
    pub final_infected: usize,
    pub final_ever: usize,
    pub extinction_time: Option<f64>,
    pub capacity_reached_at: Option<f64>,
}

impl TreeRun {
    /// Converts a capacity-truncated run into an error.
    pub fn require_complete(self) -> Result<TreeRun, CoreError> {
        match self.capacity_reached_at {
            None => Ok(self),
            Some(_) => Err(CoreError::Capacity {
                what: "tree arena nodes",
                limit: usize::MAX,
            }),
        }
    }
}

/// Runs the tree contact process from the root to the horizon (or
/// extinction), sampling (|infected|, |ever|, |pioneers|) on a uniform
/// grid with last-event-before-gridpoint semantics.
pub fn run_tree<R: Rng + ?Sized>(
    d: usize,
    lambda: f64,
    horizon: f64,
    mode: TreeMode,
    node_cap: usize,
    grid_spacing: f64,
    rng: &mut R,
) -> TreeRun {
    let mut state = TreeState::new(d, mode, node_cap);
    let mut points = Vec::new();
    let mut next_grid = 0usize;
    let grid_time = |i: usize| i as f64 * grid_spacing;
    let flush = |state: &TreeState, up_to: f64, next_grid: &mut usize, points: &mut Vec<TreePoint>| {
        while grid_time(*next_grid) < up_to && grid_time(*next_grid) <= horizon {
            points.push(TreePoint {
                t: grid_time(*next_grid),
                infected: state.infected_count(),
                ever: state.ever_count(),
                pioneers: state.pioneer_count(),
            });
            *next_grid += 1;
        }
    };
    let per_vertex = 1.0 + lambda * d as f64;
    let mut extinction_time = None;
    let mut capacity_reached_at = None;
    while !state.is_extinct() {
        let wait = exp_sample(rng, state.infected.len() as f64 * per_vertex);
        let t = state.clock + wait;
        if t > horizon {
            state.clock = horizon;
            break;
        }
        flush(&state, t, &mut next_grid, &mut points);
        match state.step_after_wait(wait, lambda, rng) {
            Ok(TreeEvent::Recovery { .. }) => {
                if state.is_extinct() {
                    extinction_time = Some(t);
                }
            }
            Ok(_) => {}
            Err(_) => {
                capacity_reached_at = Some(t);
                break;
            }
        }
    }
    if capacity_reached_at.is_none() {
        flush(&state, f64::INFINITY, &mut next_grid, &mut points);
    }
    TreeRun {
        series: points,
        final_infected: state.infected_count(),
        final_ever: state.ever_count(),
        extinction_time,
        capacity_reached_at,
    }
}

/// Exact border-point count of an arbitrary finite connected subset `S`
/// of allocated vertices (given as node ids; must contain the root).
/// A member is a border point iff one of its d tree neighbors lies
/// outside `S`.
pub fn count_border_points(state: &TreeState, members: &[u32]) -> Result<usize, CoreError> {
    let n = state.ever_count();
    let mut in_set = alloc::vec![false; n];
    for &v in members {
        if v as usize >= n {
            return Err(CoreError::Contract("member id outside the arena"));
        }
        in_set[v as usize] = true;
    }
    if !in_set.get(ROOT as usize).copied().unwrap_or(false) {
        return Err(CoreError::Contract("subset must contain the root"));
    }
    // Connectivity: every non-root member's parent must be a member
    // (equivalent to connectedness for subsets of a tree containing the
    // root).
    for &v in members {
        if v != ROOT && !in_set[state.parent[v as usize] as usize] {
            return Err(CoreError::Contract("subset is not connected"));
        }
    }
    let mut border = 0usize;
    for &v in members {
        let mut neighbors_in_set = usize::from(v != ROOT);
        for slot in 0..state.child_capacity(v) {
            if let Some(c) = state.child(v, slot) {
                if in_set[c as usize] {
                    neighbors_in_set += 1;
                }
            }
        }
        if neighbors_in_set < state.d {
            border += 1;
        }
    }
    Ok(border)
}

/// Snapshot of pioneer/border statistics at the current clock.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PioneerReport {
    pub t: f64,
    pub pioneer_count: usize,
    pub border_count: usize,
    pub infected_count: usize,
    pub ever_count: usize,
}

/// Pioneer points (infected vertices with a completely never-infected
/// branch) together with the border census of the ever-infected set.
pub fn pioneer_points(state: &TreeState) -> PioneerReport {
    PioneerReport {
        t: state.clock(),
        pioneer_count: state.pioneer_count(),
        border_count: state.border_count_of_ever(),
        infected_count: state.infected_count(),
        ever_count: state.ever_count(),
    }
}

/// Pathwise-coupled pair (full, severed) driven by one event stream.
/// Every event of the full process is replayed on the severed one when
/// its source is severed-infected and the edge is not removed; this
/// realizes the graphical-representation coupling with
/// `severed ⊆ full` at every instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledPoint {
    pub t: f64,
    pub full_infected: usize,
    pub full_ever: usize,
    pub severed_infected: usize,
    pub severed_ever: usize,
    /// Exact subset checks evaluated at this grid point.
    pub severed_subset_of_full: bool,
}

#[derive(Clone, Debug)]
pub struct CoupledRun {
    pub series: Vec<CoupledPoint>,
    pub capacity_reached_at: Option<f64>,
}

pub fn run_coupled_severed<R: Rng + ?Sized>(
    d: usize,
    lambda: f64,
    horizon: f64,
    node_cap: usize,
    grid_spacing: f64,
    rng: &mut R,
) -> CoupledRun {
    let mut full = TreeState::new(d, TreeMode::Full, node_cap);
    // The severed process lives on the branch through the root's child
    // slot 0 of the same arena.
    let mut severed_infected = IndexedSet::with_universe(1);
    severed_infected.insert(ROOT);
    let mut severed_ever = alloc::vec![true];
    let mut severed_ever_count = 1usize;

    let mut points = Vec::new();
    let mut next_grid = 0usize;
    let grid_time = |i: usize| i as f64 * grid_spacing;
    let per_vertex = 1.0 + lambda * d as f64;
    let mut capacity_reached_at = None;

    macro_rules! flush {
        ($up_to:expr) => {
            while grid_time(next_grid) < $up_to && grid_time(next_grid) <= horizon {
                let subset_ok = severed_infected.iter().all(|v| full.is_infected(v));
                points.push(CoupledPoint {
                    t: grid_time(next_grid),
                    full_infected: full.infected_count(),
                    full_ever: full.ever_count(),
                    severed_infected: severed_infected.len(),
                    severed_ever: severed_ever_count,
                    severed_subset_of_full: subset_ok,
                });
                next_grid += 1;
            }
        };
    }

    while !full.is_extinct() {
        let t = full.clock + exp_sample(rng, full.infected.len() as f64 * per_vertex);
        if t > horizon {
            full.clock = horizon;
            break;
        }
        flush!(t);
        full.clock = t;
        full.event_count += 1;
        let v = full.infected.sample(rng);
        if rng.gen::<f64>() * per_vertex < 1.0 {
            full.remove_infected(v);
            severed_infected.remove(v);
        } else {
            let slot = rng.gen_range(0..d);
            // Full-tree slot resolution; ROOT slots >= 1 are exactly the
            // severed edges.
            let target = match full.attempt_target(v, slot) {
                Ok(Some(w)) => w,
                Ok(None) => unreachable!("full mode has no severed edges"),
                Err(_) => {
                    capacity_reached_at = Some(t);
                    break;
                }
            };
            full.infect(target);
            let severed_edge = v == ROOT && slot >= 1;
            if severed_infected.contains(v) && !severed_edge {
                severed_infected.ensure_universe(full.ever_count());
                if severed_infected.insert(target) {
                    if severed_ever.len() < full.ever_count() {
                        severed_ever.resize(full.ever_count(), false);
                    }
                    if !core::mem::replace(&mut severed_ever[target as usize], true) {
                        severed_ever_count += 1;
                    }
                }
            }
        }
    }
    if capacity_reached_at.is_none() {
        flush!(f64::INFINITY);
    }
    CoupledRun {
        series: points,
        capacity_reached_at,
    }
}
