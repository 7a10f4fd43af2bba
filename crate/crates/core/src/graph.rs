//! Metric graphs with exact lengths, shortest-path metrics, trees and MSTs.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::length::{Distance, Length};

/// Vertex identifier. Graph files use non-negative integers.
pub type Vertex = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("loop edge at vertex {0}")]
    LoopEdge(Vertex),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("negative length {2} on edge {{{0}, {1}}}")]
    NegativeLength(Vertex, Vertex, Length),
    #[error("edge endpoint {0} is not a vertex of the graph")]
    UnknownEndpoint(Vertex),
    #[error("vertex {0} listed twice")]
    DuplicateVertex(Vertex),
    #[error("vertex subset does not induce a connected subgraph")]
    DisconnectedSubset,
    #[error("vertices {0} and {1} lie in different components")]
    InfiniteDistance(Vertex, Vertex),
}

#[derive(Debug, Error)]
pub enum GraphParseError {
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid graph: {0}")]
    Invalid(#[from] GraphError),
}

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub len: Length,
}

impl Edge {
    pub fn new(a: Vertex, b: Vertex, len: Length) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Edge { u, v, len }
    }

    pub fn key(&self) -> (Vertex, Vertex) {
        (self.u, self.v)
    }
}

/// Normalized unordered vertex pair.
pub fn pair(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A finite simple graph with non-negative exact edge lengths.
///
/// Vertices are kept sorted; internally every vertex has a dense index equal
/// to its rank, which is what the adjacency lists store.
#[derive(Clone, PartialEq, Eq)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    adj: Vec<Vec<(usize, Length)>>,
    edges: BTreeMap<(Vertex, Vertex), Length>,
}

impl std::fmt::Debug for MetricGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricGraph")
            .field("vertices", &self.vertices)
            .field("edges", &self.edges)
            .finish()
    }
}

impl MetricGraph {
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = Vertex>,
        E: IntoIterator<Item = (Vertex, Vertex, Length)>,
    {
        let mut vs: Vec<Vertex> = vertices.into_iter().collect();
        vs.sort_unstable();
        if let Some(w) = vs.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateVertex(w[0]));
        }
        let mut g = MetricGraph {
            adj: vec![Vec::new(); vs.len()],
            vertices: vs,
            edges: BTreeMap::new(),
        };
        for (a, b, len) in edges {
            g.insert_edge(a, b, len)?;
        }
        for list in &mut g.adj {
            list.sort_unstable_by_key(|&(j, _)| j);
        }
        Ok(g)
    }

    /// Graph on `0..n` with unit-length edges.
    pub fn unit<E>(n: u64, edges: E) -> Result<Self, GraphError>
    where
        E: IntoIterator<Item = (Vertex, Vertex)>,
    {
        MetricGraph::new(0..n, edges.into_iter().map(|(a, b)| (a, b, Length::ONE)))
    }

    fn insert_edge(&mut self, a: Vertex, b: Vertex, len: Length) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::LoopEdge(a));
        }
        let ia = self.index_of(a).ok_or(GraphError::UnknownEndpoint(a))?;
        let ib = self.index_of(b).ok_or(GraphError::UnknownEndpoint(b))?;
        if len.is_negative() {
            return Err(GraphError::NegativeLength(a, b, len));
        }
        let key = pair(a, b);
        if self.edges.contains_key(&key) {
            return Err(GraphError::DuplicateEdge(key.0, key.1));
        }
        self.edges.insert(key, len);
        self.adj[ia].push((ib, len));
        self.adj[ib].push((ia, len));
        Ok(())
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn vertex_at(&self, i: usize) -> Vertex {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.index_of(v).is_some()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(u, v), &len)| Edge { u, v, len })
    }

    pub fn length(&self, a: Vertex, b: Vertex) -> Option<Length> {
        self.edges.get(&pair(a, b)).copied()
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.edges.contains_key(&pair(a, b))
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = (Vertex, Length)> + '_ {
        let list = match self.index_of(v) {
            Some(i) => self.adj[i].as_slice(),
            None => &[],
        };
        list.iter().map(|&(j, len)| (self.vertices[j], len))
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.index_of(v).map_or(0, |i| self.adj[i].len())
    }

    /// Dense adjacency (neighbor index, length) for index `i`.
    pub fn adjacency(&self, i: usize) -> &[(usize, Length)] {
        &self.adj[i]
    }

    pub fn total_length(&self) -> Length {
        self.edges.values().sum()
    }

    /// Subgraph induced on `subset`; vertices outside the graph are ignored.
    pub fn induced_subgraph(&self, subset: &BTreeSet<Vertex>) -> MetricGraph {
        let vs: Vec<Vertex> = subset.iter().copied().filter(|&v| self.contains(v)).collect();
        let es: Vec<_> = self
            .edges()
            .filter(|e| subset.contains(&e.u) && subset.contains(&e.v))
            .map(|e| (e.u, e.v, e.len))
            .collect();
        MetricGraph::new(vs, es).expect("induced subgraph of a valid graph is valid")
    }

    /// The graph with `removed` deleted.
    pub fn without_vertices(&self, removed: &BTreeSet<Vertex>) -> MetricGraph {
        let keep: BTreeSet<Vertex> = self
            .vertices
            .iter()
            .copied()
            .filter(|v| !removed.contains(v))
            .collect();
        self.induced_subgraph(&keep)
    }

    /// Vertex sets of the connected components, each sorted, in order of
    /// their smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<Vertex>> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![self.vertices[s]];
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(self.vertices[y]);
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// Connected with `|E| = |V| - 1`. The empty graph is not a tree.
    pub fn is_tree(&self) -> bool {
        !self.vertices.is_empty()
            && self.edges.len() + 1 == self.vertices.len()
            && self.is_connected()
    }

    /// Exact single-source shortest-path distances by dense index.
    pub fn distances_from(&self, source: usize) -> Vec<Distance> {
        let n = self.vertices.len();
        let mut dist = vec![Distance::Infinite; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = Distance::Finite(Length::ZERO);
        heap.push(Reverse((Length::ZERO, source)));
        while let Some(Reverse((d, x))) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            for &(y, len) in &self.adj[x] {
                let nd = d + len;
                if Distance::Finite(nd) < dist[y] {
                    dist[y] = Distance::Finite(nd);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        dist
    }

    /// Exact all-pairs shortest-path metric.
    pub fn shortest_path_metric(&self) -> DistanceMatrix {
        let n = self.vertices.len();
        let mut dist = Vec::with_capacity(n * n);
        for s in 0..n {
            dist.extend(self.distances_from(s));
        }
        DistanceMatrix {
            vertices: self.vertices.clone(),
            dist,
        }
    }

    /// Replaces every edge length by the shortest-path distance between its
    /// endpoints. Idempotent.
    pub fn reduce_lengths(&self) -> MetricGraph {
        let mut reduced = Vec::with_capacity(self.edges.len());
        for i in 0..self.vertices.len() {
            if self.adj[i].iter().all(|&(j, _)| j < i) {
                continue;
            }
            let d = self.distances_from(i);
            for &(j, _) in self.adj[i].iter().filter(|&&(j, _)| j > i) {
                let len = d[j].finite().expect("adjacent vertices are connected");
                reduced.push((self.vertices[i], self.vertices[j], len));
            }
        }
        MetricGraph::new(self.vertices.iter().copied(), reduced)
            .expect("reduction preserves validity")
    }

    /// Minimum spanning tree of the subgraph induced on `subset`, by Kruskal
    /// with ties broken by the lexicographic edge id `(u, v)`.
    pub fn minimum_spanning_tree(&self, subset: &BTreeSet<Vertex>) -> Result<Vec<Edge>, GraphError> {
        for &v in subset {
            if !self.contains(v) {
                return Err(GraphError::UnknownEndpoint(v));
            }
        }
        let mut candidates: Vec<Edge> = self
            .edges()
            .filter(|e| subset.contains(&e.u) && subset.contains(&e.v))
            .collect();
        candidates.sort_by_key(|a| (a.len, a.u, a.v));
        let local: BTreeMap<Vertex, usize> = subset.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut dsu = DisjointSets::new(subset.len());
        let mut tree = Vec::new();
        for e in candidates {
            if dsu.union(local[&e.u], local[&e.v]) {
                tree.push(e);
            }
        }
        if !subset.is_empty() && tree.len() + 1 != subset.len() {
            return Err(GraphError::DisconnectedSubset);
        }
        tree.sort();
        Ok(tree)
    }

    /// Adds every missing edge inside `s` with length equal to the current
    /// shortest-path distance of its endpoints.
    pub fn complete_on_clique(&self, s: &BTreeSet<Vertex>) -> Result<MetricGraph, GraphError> {
        let mut extra = Vec::new();
        let members: Vec<Vertex> = s.iter().copied().collect();
        for (a_pos, &a) in members.iter().enumerate() {
            let ia = self.index_of(a).ok_or(GraphError::UnknownEndpoint(a))?;
            let da = self.distances_from(ia);
            for &b in &members[a_pos + 1..] {
                let ib = self.index_of(b).ok_or(GraphError::UnknownEndpoint(b))?;
                if self.has_edge(a, b) {
                    continue;
                }
                match da[ib] {
                    Distance::Finite(d) => extra.push((a, b, d)),
                    Distance::Infinite => return Err(GraphError::InfiniteDistance(a, b)),
                }
            }
        }
        let mut out = self.clone();
        for (a, b, d) in extra {
            out.insert_edge(a, b, d)?;
        }
        for list in &mut out.adj {
            list.sort_unstable_by_key(|&(j, _)| j);
        }
        Ok(out)
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.vertices.clone(),
            edges: self.edges().map(|e| (e.u, e.v, e.len)).collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphParseError> {
        let doc: GraphDocument = serde_json::from_str(s)?;
        Ok(doc.into_graph()?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("graph serializes")
    }
}

/// On-disk graph format: `{"vertices":[..],"edges":[[u,v,"num/den"],..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(Vertex, Vertex, Length)>,
}

impl GraphDocument {
    pub fn into_graph(self) -> Result<MetricGraph, GraphError> {
        MetricGraph::new(self.vertices, self.edges)
    }
}

/// Square table of exact distances indexed by vertex id.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DistanceMatrix {
    vertices: Vec<Vertex>,
    dist: Vec<Distance>,
}

impl DistanceMatrix {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn by_index(&self, i: usize, j: usize) -> Distance {
        self.dist[i * self.vertices.len() + j]
    }

    pub fn get(&self, u: Vertex, v: Vertex) -> Option<Distance> {
        Some(self.by_index(self.index_of(u)?, self.index_of(v)?))
    }

    /// Distances in a forest by breadth-first search from every vertex.
    pub fn of_forest(g: &MetricGraph) -> DistanceMatrix {
        let n = g.num_vertices();
        let mut dist = vec![Distance::Infinite; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = Distance::Finite(Length::ZERO);
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                let dx = row[x];
                for &(y, len) in g.adjacency(x) {
                    if !row[y].is_finite() {
                        row[y] = dx + Distance::Finite(len);
                        queue.push_back(y);
                    }
                }
            }
        }
        DistanceMatrix {
            vertices: g.vertices().to_vec(),
            dist,
        }
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(n: i128) -> Length {
        Length::from_integer(n)
    }

    fn triangle(a: i128, b: i128, c: i128) -> MetricGraph {
        MetricGraph::new(0..3, [(0, 1, l(a)), (1, 2, l(b)), (0, 2, l(c))]).unwrap()
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(MetricGraph::new([0, 1], [(0, 1, l(1))]).is_ok());
        assert_eq!(MetricGraph::new([0], [(0, 0, l(1))]), Err(GraphError::LoopEdge(0)));
        assert_eq!(
            MetricGraph::new([0, 1], [(0, 1, l(1)), (1, 0, l(2))]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            MetricGraph::new([0, 1], [(0, 1, l(-1))]),
            Err(GraphError::NegativeLength(0, 1, _))
        ));
        assert_eq!(MetricGraph::new([0, 1], [(0, 7, l(1))]), Err(GraphError::UnknownEndpoint(7)));
        assert_eq!(MetricGraph::new([3, 3], []), Err(GraphError::DuplicateVertex(3)));
        // non-reduced input is accepted as is
        assert_eq!(triangle(1, 2, 5).length(0, 2), Some(l(5)));
    }

    #[test]
    fn shortest_paths() {
        let path = MetricGraph::unit(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.shortest_path_metric().get(0, 2), Some(Distance::Finite(l(2))));
        let isolated = MetricGraph::unit(2, []).unwrap();
        assert_eq!(isolated.shortest_path_metric().get(0, 1), Some(Distance::Infinite));
        assert_eq!(triangle(1, 2, 5).shortest_path_metric().get(0, 2), Some(Distance::Finite(l(3))));
    }

    #[test]
    fn reduction() {
        let r = triangle(1, 2, 5).reduce_lengths();
        assert_eq!(r, triangle(1, 2, 3));
        assert_eq!(r.reduce_lengths(), r);
        let zero = MetricGraph::new(0..2, [(0, 1, Length::ZERO)]).unwrap();
        assert_eq!(zero.reduce_lengths(), zero);
    }

    #[test]
    fn tree_predicate() {
        assert!(MetricGraph::unit(3, [(0, 1), (1, 2)]).unwrap().is_tree());
        assert!(!triangle(1, 1, 1).is_tree());
        assert!(!MetricGraph::unit(4, [(0, 1), (2, 3)]).unwrap().is_tree());
        assert!(MetricGraph::unit(1, []).unwrap().is_tree());
    }

    #[test]
    fn mst_examples() {
        let all: BTreeSet<Vertex> = (0..3).collect();
        let unit = triangle(1, 1, 1).minimum_spanning_tree(&all).unwrap();
        assert_eq!(unit.iter().map(Edge::key).collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        let t = triangle(1, 2, 3).minimum_spanning_tree(&all).unwrap();
        assert_eq!(t.iter().map(|e| e.len).collect::<Vec<_>>(), vec![l(1), l(2)]);
        let single: BTreeSet<Vertex> = [1].into();
        assert!(triangle(1, 1, 1).minimum_spanning_tree(&single).unwrap().is_empty());
        let split = MetricGraph::unit(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            split.minimum_spanning_tree(&(0..4).collect()),
            Err(GraphError::DisconnectedSubset)
        );
    }

    #[test]
    fn clique_completion() {
        let c4 = MetricGraph::unit(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let done = c4.complete_on_clique(&[0, 2].into()).unwrap();
        assert_eq!(done.length(0, 2), Some(l(2)));
        assert_eq!(done.num_edges(), 5);
        let k3 = triangle(1, 1, 1);
        assert_eq!(k3.complete_on_clique(&(0..3).collect()).unwrap(), k3);
        let split = MetricGraph::unit(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            split.complete_on_clique(&[0, 3].into()),
            Err(GraphError::InfiniteDistance(0, 3))
        );
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"vertices":[0,1,2],"edges":[[0,1,"1/2"],[1,2,3]]}"#;
        let g = MetricGraph::from_json_str(s).unwrap();
        assert_eq!(g.length(0, 1), Some(Length::new(1, 2)));
        assert_eq!(MetricGraph::from_json_str(&g.to_json_string()).unwrap(), g);
        assert!(matches!(
            MetricGraph::from_json_str(r#"{"vertices":[0],"edges":[[0,0,1]]}"#),
            Err(GraphParseError::Invalid(GraphError::LoopEdge(0)))
        ));
        assert!(matches!(
            MetricGraph::from_json_str(r#"{"vertices":[0,1],"edges":[[0,1,"x"]]}"#),
            Err(GraphParseError::Json(_))
        ));
    }

    #[test]
    fn forest_distances_match_dijkstra() {
        let t = MetricGraph::new(0..5, [(0, 1, l(2)), (1, 2, Length::new(1, 3)), (1, 3, l(4))]).unwrap();
        assert_eq!(DistanceMatrix::of_forest(&t), t.shortest_path_metric());
    }
}
