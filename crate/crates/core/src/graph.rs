//! Random d-regular (multi)graphs via the configuration model.
//!
//! A graph on `n` vertices of degree `d` is stored as an involutive
//! perfect matching (`partner`) on the `n*d` half-edge ids
//! `vertex * d + slot`. Self-loops and multi-edges are legal in a
//! [`Multigraph`]; a [`SimpleRegularGraph`] additionally carries sorted
//! adjacency lists and excludes both.

use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::CoreError;

/// One of the `d` edge stubs attached to a vertex before matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfEdge {
    pub vertex: u32,
    pub slot: u32,
}

impl HalfEdge {
    pub fn id(&self, d: usize) -> u32 {
        self.vertex * d as u32 + self.slot
    }

    pub fn from_id(id: u32, d: usize) -> Self {
        HalfEdge {
            vertex: id / d as u32,
            slot: id % d as u32,
        }
    }
}

/// Read-only view of a d-regular neighbor structure, as consumed by the
/// simulation engines: an infection attempt picks a uniform slot of an
/// infected vertex and lands on `neighbor(v, slot)`.
pub trait Topology {
    fn n(&self) -> usize;
    fn degree(&self) -> usize;
    fn neighbor(&self, vertex: u32, slot: u32) -> u32;
}

/// d-regular multigraph: a perfect matching on `n*d` half-edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    d: usize,
    partner: Vec<u32>,
}

impl Multigraph {
    /// Builds from an explicit partner map, checking that it is an
    /// involution without fixed points.
    pub fn from_partner(n: usize, d: usize, partner: Vec<u32>) -> Result<Self, CoreError> {
        if partner.len() != n * d {
            return Err(CoreError::Precondition("partner map must have n*d entries"));
        }
        let g = Multigraph { n, d, partner };
        if !g.is_involution() {
            return Err(CoreError::Precondition(
                "partner map is not a fixed-point-free involution",
            ));
        }
        Ok(g)
    }

    pub fn partner(&self, half_edge: u32) -> u32 {
        self.partner[half_edge as usize]
    }

    pub fn partner_map(&self) -> &[u32] {
        &self.partner
    }

    /// partner∘partner = id and partner(h) != h, checked exhaustively.
    pub fn is_involution(&self) -> bool {
        self.partner.iter().enumerate().all(|(h, &p)| {
            (p as usize) < self.partner.len()
                && p as usize != h
                && self.partner[p as usize] as usize == h
        })
    }

    /// True iff the matching has no self-loop and no repeated edge.
    pub fn is_simple(&self) -> bool {
        let mut neighbors: Vec<u32> = Vec::with_capacity(self.d);
        for v in 0..self.n as u32 {
            neighbors.clear();
            for slot in 0..self.d as u32 {
                let w = self.neighbor(v, slot);
                if w == v {
                    return false; // self-loop
                }
                neighbors.push(w);
            }
            neighbors.sort_unstable();
            if neighbors.windows(2).any(|w| w[0] == w[1]) {
                return false; // multi-edge
            }
        }
        true
    }
}

impl Topology for Multigraph {
    fn n(&self) -> usize {
        self.n
    }

    fn degree(&self) -> usize {
        self.d
    }

    fn neighbor(&self, vertex: u32, slot: u32) -> u32 {
        self.partner[(vertex * self.d as u32 + slot) as usize] / self.d as u32
    }
}

/// Simple d-regular graph with per-vertex sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleRegularGraph {
    n: usize,
    d: usize,
    adjacency: Vec<u32>,
}

impl SimpleRegularGraph {
    /// Validates and adopts flat adjacency (`n*d` entries, vertex-major).
    /// Lists are re-sorted; symmetry, degree and simplicity are checked.
    pub fn from_adjacency(n: usize, d: usize, mut adjacency: Vec<u32>) -> Result<Self, CoreError> {
        if adjacency.len() != n * d {
            return Err(CoreError::Precondition("adjacency must have n*d entries"));
        }
        for chunk in adjacency.chunks_mut(d) {
            chunk.sort_unstable();
        }
        let g = SimpleRegularGraph { n, d, adjacency };
        for v in 0..n as u32 {
            let row = g.neighbors(v);
            for (i, &w) in row.iter().enumerate() {
                if w as usize >= n {
                    return Err(CoreError::Precondition("neighbor id out of range"));
                }
                if w == v {
                    return Err(CoreError::Precondition("self-loop in adjacency"));
                }
                if i > 0 && row[i - 1] == w {
                    return Err(CoreError::Precondition("repeated neighbor in adjacency"));
                }
                if !g.neighbors(w).contains(&v) {
                    return Err(CoreError::Precondition("adjacency is not symmetric"));
                }
            }
        }
        Ok(g)
    }

    fn from_simple_matching(m: &Multigraph) -> Self {
        debug_assert!(m.is_simple());
        let (n, d) = (m.n, m.d);
        let mut adjacency = Vec::with_capacity(n * d);
        for v in 0..n as u32 {
            let mut row: Vec<u32> = (0..d as u32).map(|s| m.neighbor(v, s)).collect();
            row.sort_unstable();
            adjacency.extend_from_slice(&row);
        }
        SimpleRegularGraph { n, d, adjacency }
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let d = self.d;
        &self.adjacency[v as usize * d..(v as usize + 1) * d]
    }

    /// Complete graph K_n (degree n-1).
    pub fn complete(n: usize) -> Self {
        let d = n - 1;
        let mut adjacency = Vec::with_capacity(n * d);
        for v in 0..n as u32 {
            adjacency.extend((0..n as u32).filter(|&w| w != v));
        }
        SimpleRegularGraph { n, d, adjacency }
    }

    /// Cycle on n >= 3 vertices (degree 2).
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        let mut adjacency = Vec::with_capacity(n * 2);
        for v in 0..n as u32 {
            let prev = (v + n as u32 - 1) % n as u32;
            let next = (v + 1) % n as u32;
            adjacency.push(prev.min(next));
            adjacency.push(prev.max(next));
        }
        SimpleRegularGraph { n, d: 2, adjacency }
    }

    /// The unique 1-regular graph on two vertices.
    pub fn single_edge() -> Self {
        SimpleRegularGraph {
            n: 2,
            d: 1,
            adjacency: alloc::vec![1, 0],
        }
    }
}

impl Topology for SimpleRegularGraph {
    fn n(&self) -> usize {
        self.n
    }

    fn degree(&self) -> usize {
        self.d
    }

    fn neighbor(&self, vertex: u32, slot: u32) -> u32 {
        self.adjacency[(vertex * self.d as u32 + slot) as usize]
    }
}

/// Uniform perfect matching on the `n*d` half-edges: shuffle the id list
/// and pair consecutive entries. Equivalent to sequential uniform
/// pairing, O(nd).
pub fn sample_matching<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<Multigraph, CoreError> {
    if n == 0 || d == 0 {
        return Err(CoreError::Precondition("n and d must be positive"));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(CoreError::Precondition("n*d must be even"));
    }
    let mut ids: Vec<u32> = (0..(n * d) as u32).collect();
    ids.shuffle(rng);
    let mut partner = alloc::vec![0u32; n * d];
    for pair in ids.chunks_exact(2) {
        partner[pair[0] as usize] = pair[1];
        partner[pair[1] as usize] = pair[0];
    }
    Ok(Multigraph { n, d, partner })
}

/// Default rejection budget for [`sample_simple`]. For d <= 10 the
/// probability of a simple outcome is bounded below, so exhaustion
/// signals a bug or an infeasible (n, d).
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1000;

/// Rejection-samples matchings until one is simple; the result is
/// uniform over all simple d-regular graphs on `n` labeled vertices.
/// Returns the graph together with the number of attempts consumed.
pub fn sample_simple<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(SimpleRegularGraph, u64), CoreError> {
    if d >= n {
        return Err(CoreError::Precondition(
            "no simple d-regular graph exists unless d < n",
        ));
    }
    for attempt in 1..=max_attempts {
        let m = sample_matching(n, d, rng)?;
        if m.is_simple() {
            return Ok((SimpleRegularGraph::from_simple_matching(&m), attempt));
        }
    }
    Err(CoreError::Exhausted {
        what: "sample_simple rejection",
        attempts: max_attempts,
    })
}
