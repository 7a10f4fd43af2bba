use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::graph::{pair, Edge, MetricGraph, Vertex};
use crate::length::Length;
use crate::pathwidth::{CompositionError, LinearCompositionSequence};
use crate::distribution::EnumerationError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PwkError {
    #[error("kept window must be {k} vertices of the current clique")]
    IllegalWindow { k: usize },
    #[error("vertex {0} is already in the embedding")]
    StaleVertex(Vertex),
    #[error("no length for composed edge {{{0}, {1}}}")]
    MissingLength(Vertex, Vertex),
    #[error("vertex {0} is not in the current subgraph")]
    VertexAbsent(Vertex),
    #[error("{{{0}, {1}}} is not an edge of the current clique")]
    NotACliqueEdge(Vertex, Vertex),
    #[error("pair ranks are not tracked in this state")]
    RanksNotTracked,
    #[error(transparent)]
    Composition(#[from] CompositionError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

/// `C(k+1, 2)`, the largest edge-rank the algorithm can produce.
pub fn rank_bound(k: usize) -> u32 {
    (k * (k + 1) / 2) as u32
}

/// The evolving subgraph `H_i`: a clique on the current window with pendant
/// trees hanging off its vertices, plus the rank bookkeeping.
///
/// Every non-window vertex points `toward` the neighbour it was attached to
/// when it left the window, so following pointers leads to its anchor in the
/// window. Edge-ranks are kept per window pair: the largest rank over pairs
/// whose anchors are the two endpoints.
#[derive(Debug, Clone)]
pub struct EmbeddingState {
    k: usize,
    window: BTreeSet<Vertex>,
    toward: HashMap<Vertex, Vertex>,
    edge_ranks: BTreeMap<(Vertex, Vertex), u32>,
    tree_edges: Vec<(Vertex, Vertex)>,
    tracked: Option<TrackedRanks>,
}

#[derive(Debug, Clone, Default)]
struct TrackedRanks {
    members: BTreeMap<Vertex, Vec<Vertex>>,
    ranks: HashMap<(Vertex, Vertex), u32>,
}

/// What a single transition did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub w: Vertex,
    /// `E(w, V_i)` as `(other endpoint, length)`, sorted by length then id.
    pub sorted: Vec<(Vertex, Length)>,
    pub edge_ranks: Vec<u32>,
    pub eligible: usize,
    pub kept: (Vertex, Vertex),
}

impl EmbeddingState {
    /// `H_1`, the clique on `V_0 ∪ {v_1}`; with no steps, the clique on `V_0`.
    pub fn initial(seq: &LinearCompositionSequence, track_pair_ranks: bool) -> Self {
        let window = if seq.steps.is_empty() {
            seq.initial.clone()
        } else {
            seq.hat_window(1)
        };
        Self::from_clique(seq.k, window, track_pair_ranks)
    }

    pub fn from_clique(k: usize, window: BTreeSet<Vertex>, track_pair_ranks: bool) -> Self {
        let vs: Vec<Vertex> = window.iter().copied().collect();
        let mut edge_ranks = BTreeMap::new();
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                edge_ranks.insert((a, b), 0);
            }
        }
        let tracked = track_pair_ranks.then(|| TrackedRanks {
            members: vs.iter().map(|&v| (v, vec![v])).collect(),
            ranks: HashMap::new(),
        });
        EmbeddingState {
            k,
            window,
            toward: HashMap::new(),
            edge_ranks,
            tree_edges: Vec::new(),
            tracked,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn window(&self) -> &BTreeSet<Vertex> {
        &self.window
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.window.contains(&v) || self.toward.contains_key(&v)
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.window.iter().chain(self.toward.keys()).copied().collect()
    }

    /// Edges of `H` outside the clique; they form a forest.
    pub fn tree_edges(&self) -> &[(Vertex, Vertex)] {
        &self.tree_edges
    }

    /// All edges of `H`.
    pub fn edges(&self) -> BTreeSet<(Vertex, Vertex)> {
        let mut es: BTreeSet<_> = self.tree_edges.iter().copied().collect();
        es.extend(self.edge_ranks.keys().copied());
        es
    }

    pub fn max_edge_rank(&self) -> u32 {
        self.edge_ranks.values().copied().max().unwrap_or(0)
    }

    /// Vertices from `v` to its anchor in the window, inclusive.
    fn anchor_path(&self, v: Vertex) -> Vec<Vertex> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(&next) = self.toward.get(&cur) {
            path.push(next);
            cur = next;
        }
        path
    }

    pub fn anchor(&self, v: Vertex) -> Result<Vertex, PwkError> {
        if !self.contains(v) {
            return Err(PwkError::VertexAbsent(v));
        }
        Ok(*self.anchor_path(v).last().unwrap())
    }

    /// The unique `u`-`v` path in `H` using at most one clique edge.
    pub fn canonical_path(&self, u: Vertex, v: Vertex) -> Result<Vec<(Vertex, Vertex)>, PwkError> {
        for x in [u, v] {
            if !self.contains(x) {
                return Err(PwkError::VertexAbsent(x));
            }
        }
        let mut pu = self.anchor_path(u);
        let mut pv = self.anchor_path(v);
        if pu.last() == pv.last() {
            // strip the shared tail down to the lowest common ancestor
            while pu.len() >= 2 && pv.len() >= 2 && pu[pu.len() - 2] == pv[pv.len() - 2] {
                pu.pop();
                pv.pop();
            }
            pv.pop();
        }
        pu.extend(pv.into_iter().rev());
        Ok(pu.windows(2).map(|w| pair(w[0], w[1])).collect())
    }

    pub fn edge_rank(&self, a: Vertex, b: Vertex) -> Result<u32, PwkError> {
        self.edge_ranks
            .get(&pair(a, b))
            .copied()
            .ok_or_else(|| {
                let (x, y) = pair(a, b);
                PwkError::NotACliqueEdge(x, y)
            })
    }

    /// Stored rank of a pair; needs pair tracking.
    pub fn rank(&self, u: Vertex, v: Vertex) -> Result<u32, PwkError> {
        let t = self.tracked.as_ref().ok_or(PwkError::RanksNotTracked)?;
        Ok(t.ranks.get(&pair(u, v)).copied().unwrap_or(0))
    }

    /// Edge-rank straight from the definition: the largest pair rank over
    /// all pairs whose canonical path uses the edge.
    pub fn edge_rank_brute_force(&self, a: Vertex, b: Vertex) -> Result<u32, PwkError> {
        let e = pair(a, b);
        if !self.edge_ranks.contains_key(&e) {
            return Err(PwkError::NotACliqueEdge(e.0, e.1));
        }
        let t = self.tracked.as_ref().ok_or(PwkError::RanksNotTracked)?;
        let vs: Vec<Vertex> = self.vertices().into_iter().collect();
        let mut best = 0;
        for (i, &x) in vs.iter().enumerate() {
            for &y in &vs[i + 1..] {
                let r = t.ranks.get(&(x, y)).copied().unwrap_or(0);
                if r > best && self.canonical_path(x, y)?.contains(&e) {
                    best = r;
                }
            }
        }
        Ok(best)
    }

    /// Largest stored pair rank; needs pair tracking.
    pub fn max_pair_rank(&self) -> Option<u32> {
        self.tracked
            .as_ref()
            .map(|t| t.ranks.values().copied().max().unwrap_or(0))
    }

    /// `E(w, V_i)` for the vertex `w` leaving the window, sorted by length
    /// with ties broken by edge id.
    pub fn departing_edges(
        &self,
        kept: &BTreeSet<Vertex>,
        lengths: &MetricGraph,
    ) -> Result<(Vertex, Vec<(Vertex, Length)>), PwkError> {
        if kept.len() != self.k || !kept.is_subset(&self.window) {
            return Err(PwkError::IllegalWindow { k: self.k });
        }
        let w = *self
            .window
            .difference(kept)
            .next()
            .ok_or(PwkError::IllegalWindow { k: self.k })?;
        let mut sorted = Vec::with_capacity(self.k);
        for &x in kept {
            let len = lengths.length(w, x).ok_or_else(|| {
                let (a, b) = pair(w, x);
                PwkError::MissingLength(a, b)
            })?;
            sorted.push((x, len));
        }
        sorted.sort_by_key(|a| (a.1, a.0));
        Ok((w, sorted))
    }

    /// Applies a transition whose eligible set is the first `eligible`
    /// edges of `E(w, V_i)`. The randomness lives entirely in `eligible`.
    pub fn apply(
        &mut self,
        kept: &BTreeSet<Vertex>,
        new_vertex: Vertex,
        lengths: &MetricGraph,
        eligible: usize,
    ) -> Result<Transition, PwkError> {
        if self.contains(new_vertex) {
            return Err(PwkError::StaleVertex(new_vertex));
        }
        for &x in kept {
            if lengths.length(x, new_vertex).is_none() {
                let (a, b) = pair(x, new_vertex);
                return Err(PwkError::MissingLength(a, b));
            }
        }
        let (w, sorted) = self.departing_edges(kept, lengths)?;
        assert!((1..=self.k).contains(&eligible), "eligible prefix must be non-empty");
        let ranks: Vec<u32> = sorted.iter().map(|&(x, _)| self.edge_ranks[&pair(w, x)]).collect();
        // first maximum in sorted order: highest edge-rank, then shortest, then lowest id
        let star = (0..eligible)
            .max_by(|&i, &j| ranks[i].cmp(&ranks[j]).then(j.cmp(&i)))
            .unwrap();
        let x_star = sorted[star].0;

        for &(x, _) in &sorted[..eligible] {
            *self.edge_ranks.get_mut(&pair(w, x)).unwrap() += 1;
            if let Some(t) = self.tracked.as_mut() {
                let (from, to) = (&t.members[&w], &t.members[&x]);
                for &a in from {
                    for &b in to {
                        *t.ranks.entry(pair(a, b)).or_insert(0) += 1;
                    }
                }
            }
        }

        // w's pendant tree now hangs off x*; its clique pairs fold into x*'s
        for &y in kept {
            if y != x_star {
                let via_w = self.edge_ranks[&pair(w, y)];
                let slot = self.edge_ranks.get_mut(&pair(x_star, y)).unwrap();
                *slot = (*slot).max(via_w);
            }
        }
        self.edge_ranks.retain(|&(a, b), _| a != w && b != w);
        for &y in kept {
            self.edge_ranks.insert(pair(y, new_vertex), 0);
        }
        if let Some(t) = self.tracked.as_mut() {
            let moved = t.members.remove(&w).unwrap();
            t.members.get_mut(&x_star).unwrap().extend(moved);
            t.members.insert(new_vertex, vec![new_vertex]);
        }
        self.toward.insert(w, x_star);
        self.tree_edges.push(pair(w, x_star));
        self.window.remove(&w);
        self.window.insert(new_vertex);

        let bound = rank_bound(self.k);
        assert!(
            self.max_edge_rank() <= bound,
            "edge-rank {} exceeds the bound {bound}",
            self.max_edge_rank()
        );
        Ok(Transition {
            w,
            sorted,
            edge_ranks: ranks,
            eligible,
            kept: pair(w, x_star),
        })
    }

    /// Replaces the clique by its minimum spanning tree.
    pub fn finish(&self, lengths: &MetricGraph) -> Result<MetricGraph, PwkError> {
        let mst: Vec<Edge> = lengths
            .minimum_spanning_tree(&self.window)
            .map_err(|_| PwkError::IllegalWindow { k: self.k })?;
        let mut edges = Vec::with_capacity(self.tree_edges.len() + mst.len());
        for &(a, b) in &self.tree_edges {
            edges.push((a, b, lengths.length(a, b).ok_or(PwkError::MissingLength(a, b))?));
        }
        edges.extend(mst.into_iter().map(|e| (e.u, e.v, e.len)));
        Ok(MetricGraph::new(self.vertices(), edges).expect("tree edges are valid"))
    }

    /// The clique is complete and the remaining edges form a forest in which
    /// every component holds exactly one window vertex.
    pub fn check_structure(&self) -> bool {
        let clique_pairs = self.window.len() * (self.window.len().saturating_sub(1)) / 2;
        if self.edge_ranks.len() != clique_pairs {
            return false;
        }
        let forest = MetricGraph::new(
            self.vertices(),
            self.tree_edges.iter().map(|&(a, b)| (a, b, Length::ONE)),
        );
        let Ok(forest) = forest else { return false };
        let comps = forest.connected_components();
        if forest.num_edges() + comps.len() != forest.num_vertices() {
            return false;
        }
        comps
            .iter()
            .all(|c| c.iter().filter(|v| self.window.contains(v)).count() == 1)
    }
}
