use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::decomposition::{
    normalize_to_width, validate_path_decomposition, DecompositionError, PathDecomposition,
};
use crate::graph::{pair, GraphError, MetricGraph, Vertex};
use crate::length::Distance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error("composition width must be at least 1")]
    ZeroWidth,
    #[error("initial window has {found} vertices, expected {expected}")]
    InitialSize { expected: usize, found: usize },
    #[error("step {step}: window has {found} vertices, expected {expected}")]
    WindowSize { step: usize, expected: usize, found: usize },
    #[error("step {step}: vertex {vertex} was introduced earlier")]
    StaleVertex { step: usize, vertex: Vertex },
    #[error("step {step}: window vertex {vertex} is neither in the previous window nor new")]
    IllegalWindow { step: usize, vertex: Vertex },
    #[error("graph vertex set differs from the composed vertex set")]
    VertexSetMismatch,
    #[error("graph edge {{{0}, {1}}} is not an edge of the composed graph")]
    NotASubgraph(Vertex, Vertex),
    #[error("vertices {0} and {1} are in different components of the graph")]
    InfiniteDistance(Vertex, Vertex),
}

#[derive(Debug, Error)]
pub enum CompositionParseError {
    #[error("malformed composition JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("window lists a vertex twice")]
    DuplicateInWindow,
    #[error("invalid composition: {0}")]
    Invalid(#[from] CompositionError),
}

/// One step: `new` is attached to every vertex of the previous window, and
/// `window` becomes the next window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionStep {
    pub new: Vertex,
    pub window: BTreeSet<Vertex>,
}

/// A linear width-k composition sequence: a k-clique `initial`, then a
/// sequence of steps each adding a fresh vertex and keeping a k-window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCompositionSequence {
    pub k: usize,
    pub initial: BTreeSet<Vertex>,
    pub steps: Vec<CompositionStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDocument {
    pub new: Vertex,
    pub window: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionDocument {
    pub k: usize,
    pub initial: Vec<Vertex>,
    pub steps: Vec<StepDocument>,
}

fn as_set(v: &[Vertex]) -> Result<BTreeSet<Vertex>, CompositionParseError> {
    let set: BTreeSet<Vertex> = v.iter().copied().collect();
    if set.len() != v.len() {
        return Err(CompositionParseError::DuplicateInWindow);
    }
    Ok(set)
}

impl LinearCompositionSequence {
    pub fn new<I, S>(k: usize, initial: I, steps: S) -> Result<Self, CompositionError>
    where
        I: IntoIterator<Item = Vertex>,
        S: IntoIterator<Item = (Vertex, Vec<Vertex>)>,
    {
        let seq = LinearCompositionSequence {
            k,
            initial: initial.into_iter().collect(),
            steps: steps
                .into_iter()
                .map(|(new, window)| CompositionStep {
                    new,
                    window: window.into_iter().collect(),
                })
                .collect(),
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<(), CompositionError> {
        if self.k == 0 {
            return Err(CompositionError::ZeroWidth);
        }
        if self.initial.len() != self.k {
            return Err(CompositionError::InitialSize {
                expected: self.k,
                found: self.initial.len(),
            });
        }
        let mut seen = self.initial.clone();
        let mut prev = &self.initial;
        for (i, step) in self.steps.iter().enumerate() {
            let step_no = i + 1;
            if !seen.insert(step.new) {
                return Err(CompositionError::StaleVertex {
                    step: step_no,
                    vertex: step.new,
                });
            }
            if step.window.len() != self.k {
                return Err(CompositionError::WindowSize {
                    step: step_no,
                    expected: self.k,
                    found: step.window.len(),
                });
            }
            if let Some(&bad) = step
                .window
                .iter()
                .find(|&&x| x != step.new && !prev.contains(&x))
            {
                return Err(CompositionError::IllegalWindow {
                    step: step_no,
                    vertex: bad,
                });
            }
            prev = &step.window;
        }
        Ok(())
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        let mut vs = self.initial.clone();
        vs.extend(self.steps.iter().map(|s| s.new));
        vs
    }

    pub fn num_vertices(&self) -> usize {
        self.initial.len() + self.steps.len()
    }

    /// Window `V_i` for `i` in `0..=t`.
    pub fn window(&self, i: usize) -> &BTreeSet<Vertex> {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i - 1].window
        }
    }

    /// `V_{i-1} ∪ {v_i}` for `i` in `1..=t`.
    pub fn hat_window(&self, i: usize) -> BTreeSet<Vertex> {
        let mut w = self.window(i - 1).clone();
        w.insert(self.steps[i - 1].new);
        w
    }

    /// Edge set of the composed graph: the clique on `V_0`, plus each new
    /// vertex joined to the whole previous window.
    pub fn composed_edges(&self) -> BTreeSet<(Vertex, Vertex)> {
        let mut edges = BTreeSet::new();
        let init: Vec<Vertex> = self.initial.iter().copied().collect();
        for (i, &a) in init.iter().enumerate() {
            for &b in &init[i + 1..] {
                edges.insert(pair(a, b));
            }
        }
        for (i, step) in self.steps.iter().enumerate() {
            for &u in self.window(i) {
                edges.insert(pair(u, step.new));
            }
        }
        edges
    }

    pub fn to_document(&self) -> CompositionDocument {
        CompositionDocument {
            k: self.k,
            initial: self.initial.iter().copied().collect(),
            steps: self
                .steps
                .iter()
                .map(|s| StepDocument {
                    new: s.new,
                    window: s.window.iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: CompositionDocument) -> Result<Self, CompositionParseError> {
        let mut steps = Vec::with_capacity(doc.steps.len());
        for s in &doc.steps {
            steps.push(CompositionStep {
                new: s.new,
                window: as_set(&s.window)?,
            });
        }
        let seq = LinearCompositionSequence {
            k: doc.k,
            initial: as_set(&doc.initial)?,
            steps,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn from_json_str(s: &str) -> Result<Self, CompositionParseError> {
        Self::from_document(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("composition serializes")
    }
}

/// The composed graph of `seq` carrying the shortest-path metric of `g`:
/// every composed edge gets length `d_G` of its endpoints. Requires `g` to be
/// a connected subgraph of the composed graph on the same vertex set.
pub fn composed_metric(
    seq: &LinearCompositionSequence,
    g: &MetricGraph,
) -> Result<MetricGraph, CompositionError> {
    seq.validate()?;
    let vs = seq.vertices();
    if vs.len() != g.num_vertices() || !vs.iter().all(|&v| g.contains(v)) {
        return Err(CompositionError::VertexSetMismatch);
    }
    let composed = seq.composed_edges();
    if let Some(e) = g.edges().find(|e| !composed.contains(&e.key())) {
        return Err(CompositionError::NotASubgraph(e.u, e.v));
    }
    let rows: Vec<Vec<Distance>> = (0..g.num_vertices()).map(|i| g.distances_from(i)).collect();
    let mut edges = Vec::with_capacity(composed.len());
    for (a, b) in composed {
        let (ia, ib) = (g.index_of(a).unwrap(), g.index_of(b).unwrap());
        match rows[ia][ib] {
            Distance::Finite(d) => edges.push((a, b, d)),
            Distance::Infinite => return Err(CompositionError::InfiniteDistance(a, b)),
        }
    }
    Ok(MetricGraph::new(vs, edges).expect("composed graph is valid"))
}

/// Unit-length composed graph, mostly for tests and generators.
pub fn composed_unit_graph(seq: &LinearCompositionSequence) -> Result<MetricGraph, GraphError> {
    MetricGraph::new(
        seq.vertices(),
        seq.composed_edges()
            .into_iter()
            .map(|(a, b)| (a, b, crate::length::Length::ONE)),
    )
}

/// Bags `V_{i-1} ∪ {v_i}`; a sequence without steps yields the single bag
/// `V_0`.
pub fn composition_to_decomposition(seq: &LinearCompositionSequence) -> PathDecomposition {
    if seq.steps.is_empty() {
        return PathDecomposition {
            bags: vec![seq.initial.clone()],
        };
    }
    PathDecomposition {
        bags: (1..=seq.steps.len()).map(|i| seq.hat_window(i)).collect(),
    }
}

/// Normalizes `pd` and reads each bag transition as a composition step.
/// Width-0 decompositions are lifted to width 1, since a composition
/// sequence needs `k ≥ 1`.
pub fn decomposition_to_composition(
    pd: &PathDecomposition,
    g: &MetricGraph,
) -> Result<LinearCompositionSequence, DecompositionError> {
    let k = validate_path_decomposition(g, pd)?.max(1);
    let bags = normalize_to_width(pd, g, k)?.bags;
    let t = bags.len();
    let first_new = if t > 1 {
        *bags[0].intersection(&bags[1]).max().expect("adjacent bags share k vertices")
    } else {
        *bags[0].iter().next_back().expect("bag is non-empty")
    };
    let mut initial = bags[0].clone();
    initial.remove(&first_new);

    let mut steps = Vec::with_capacity(t);
    for i in 0..t {
        let new = if i == 0 {
            first_new
        } else {
            *bags[i].difference(&bags[i - 1]).next().expect("normal bags differ")
        };
        let window = if i + 1 < t {
            bags[i].intersection(&bags[i + 1]).copied().collect()
        } else {
            let mut w = bags[i].clone();
            let drop = *w.iter().find(|&&x| x != new).expect("k ≥ 1");
            w.remove(&drop);
            w
        };
        steps.push(CompositionStep { new, window });
    }
    let seq = LinearCompositionSequence { k, initial, steps };
    debug_assert_eq!(seq.validate(), Ok(()));
    Ok(seq)
}
