use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{MetricGraph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("decomposition has no non-empty bag")]
    Empty,
    #[error("bag vertex {0} is not a vertex of the graph")]
    UnknownVertex(Vertex),
    #[error("vertex {0} is in no bag")]
    UncoveredVertex(Vertex),
    #[error("edge {{{0}, {1}}} is in no bag")]
    UncoveredEdge(Vertex, Vertex),
    #[error("bags containing vertex {0} are not contiguous")]
    BrokenInterval(Vertex),
    #[error("a width-{width} normal form needs at least {needed} vertices, graph has {found}")]
    TooFewVertices { width: usize, needed: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum DecompositionParseError {
    #[error("malformed decomposition JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bag {0} lists a vertex twice")]
    DuplicateInBag(usize),
}

/// Ordered list of bags.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathDecomposition {
    pub bags: Vec<BTreeSet<Vertex>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionDocument {
    pub bags: Vec<Vec<Vertex>>,
}

impl PathDecomposition {
    pub fn new<I, B>(bags: I) -> Self
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = Vertex>,
    {
        PathDecomposition {
            bags: bags.into_iter().map(|b| b.into_iter().collect()).collect(),
        }
    }

    /// Largest bag size minus one; `None` when every bag is empty.
    pub fn width(&self) -> Option<usize> {
        self.bags.iter().map(BTreeSet::len).max().filter(|&m| m > 0).map(|m| m - 1)
    }

    /// Index interval `[first, last]` of the bags holding each vertex.
    pub fn intervals(&self) -> BTreeMap<Vertex, (usize, usize)> {
        let mut iv = BTreeMap::new();
        for (i, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                iv.entry(v).and_modify(|e: &mut (usize, usize)| e.1 = i).or_insert((i, i));
            }
        }
        iv
    }

    pub fn to_document(&self) -> DecompositionDocument {
        DecompositionDocument {
            bags: self.bags.iter().map(|b| b.iter().copied().collect()).collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, DecompositionParseError> {
        let doc: DecompositionDocument = serde_json::from_str(s)?;
        let mut bags = Vec::with_capacity(doc.bags.len());
        for (i, bag) in doc.bags.into_iter().enumerate() {
            let set: BTreeSet<Vertex> = bag.iter().copied().collect();
            if set.len() != bag.len() {
                return Err(DecompositionParseError::DuplicateInBag(i));
            }
            bags.push(set);
        }
        Ok(PathDecomposition { bags })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("decomposition serializes")
    }
}

/// Checks coverage of vertices, contiguity of each vertex's bags and
/// coverage of edges, in that order, and returns the width.
pub fn validate_path_decomposition(
    g: &MetricGraph,
    pd: &PathDecomposition,
) -> Result<usize, DecompositionError> {
    let width = pd.width().ok_or(DecompositionError::Empty)?;
    for bag in &pd.bags {
        if let Some(&v) = bag.iter().find(|&&v| !g.contains(v)) {
            return Err(DecompositionError::UnknownVertex(v));
        }
    }
    let intervals = pd.intervals();
    for &v in g.vertices() {
        if !intervals.contains_key(&v) {
            return Err(DecompositionError::UncoveredVertex(v));
        }
    }
    for (&v, &(first, last)) in &intervals {
        if (first..=last).any(|i| !pd.bags[i].contains(&v)) {
            return Err(DecompositionError::BrokenInterval(v));
        }
    }
    for e in g.edges() {
        let (a0, a1) = intervals[&e.u];
        let (b0, b1) = intervals[&e.v];
        if a0.max(b0) > a1.min(b1) {
            return Err(DecompositionError::UncoveredEdge(e.u, e.v));
        }
    }
    Ok(width)
}

/// Rewrites a valid decomposition so that every bag has exactly `width + 1`
/// vertices and consecutive bags differ by swapping one vertex.
pub fn normalize_decomposition(
    pd: &PathDecomposition,
    g: &MetricGraph,
) -> Result<PathDecomposition, DecompositionError> {
    let width = validate_path_decomposition(g, pd)?;
    normalize_to_width(pd, g, width)
}

/// Same as [`normalize_decomposition`] but pads to a target width that may
/// exceed the decomposition's own width.
///
/// Vertices are introduced in order of their first bag; each introduction
/// evicts the resident vertex whose last bag comes earliest. Because no
/// original bag holds more than `width + 1` vertices, the evicted vertex is
/// always already finished, so every edge stays covered.
pub fn normalize_to_width(
    pd: &PathDecomposition,
    g: &MetricGraph,
    width: usize,
) -> Result<PathDecomposition, DecompositionError> {
    let own = validate_path_decomposition(g, pd)?;
    assert!(own <= width, "target width below decomposition width");
    let size = width + 1;
    let n = g.num_vertices();
    if n < size {
        return Err(DecompositionError::TooFewVertices {
            width,
            needed: size,
            found: n,
        });
    }
    let intervals = pd.intervals();
    let mut order: Vec<(usize, Vertex)> = intervals.iter().map(|(&v, &(s, _))| (s, v)).collect();
    order.sort_unstable();
    let end = |v: Vertex| intervals[&v].1;

    let mut current: BTreeSet<Vertex> = order[..size].iter().map(|&(_, v)| v).collect();
    let mut bags = vec![current.clone()];
    for &(start, v) in &order[size..] {
        let evict = *current
            .iter()
            .min_by_key(|&&u| (end(u), u))
            .expect("bag is non-empty");
        debug_assert!(end(evict) < start);
        current.remove(&evict);
        current.insert(v);
        bags.push(current.clone());
    }
    Ok(PathDecomposition { bags })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> MetricGraph {
        MetricGraph::unit(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn is_normal(pd: &PathDecomposition, width: usize) -> bool {
        pd.bags.iter().all(|b| b.len() == width + 1)
            && pd
                .bags
                .windows(2)
                .all(|w| w[0].difference(&w[1]).count() == 1)
    }

    #[test]
    fn validation_examples() {
        let g = path3();
        assert_eq!(validate_path_decomposition(&g, &PathDecomposition::new([vec![0, 1], vec![1, 2]])), Ok(1));
        assert_eq!(
            validate_path_decomposition(&g, &PathDecomposition::new([vec![0, 1], vec![2]])),
            Err(DecompositionError::UncoveredEdge(1, 2))
        );
        assert_eq!(
            validate_path_decomposition(&g, &PathDecomposition::new([vec![0], vec![1], vec![0, 2]])),
            Err(DecompositionError::BrokenInterval(0))
        );
        assert_eq!(
            validate_path_decomposition(&g, &PathDecomposition::new([vec![0, 1]])),
            Err(DecompositionError::UncoveredVertex(2))
        );
        assert_eq!(
            validate_path_decomposition(&g, &PathDecomposition::new([vec![0, 1, 2, 9]])),
            Err(DecompositionError::UnknownVertex(9))
        );
        assert_eq!(
            validate_path_decomposition(&g, &PathDecomposition::default()),
            Err(DecompositionError::Empty)
        );
    }

    #[test]
    fn normalization_pads_and_interpolates() {
        // a-b, b-c, b-d, c-d plus a spare vertex x = 4 hanging off d
        let g = MetricGraph::unit(5, [(0, 1), (1, 2), (1, 3), (2, 3), (3, 4)]).unwrap();
        let pd = PathDecomposition::new([vec![0, 1], vec![1, 2, 3], vec![3, 4]]);
        let out = normalize_decomposition(&pd, &g).unwrap();
        assert!(is_normal(&out, 2));
        assert_eq!(validate_path_decomposition(&g, &out), Ok(2));
    }

    #[test]
    fn normalization_of_uneven_bags() {
        let g = MetricGraph::unit(4, [(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap();
        let pd = PathDecomposition::new([vec![0, 1], vec![1, 2, 3]]);
        let out = normalize_decomposition(&pd, &g).unwrap();
        assert_eq!(out, PathDecomposition::new([vec![0, 1, 2], vec![1, 2, 3]]));
    }

    #[test]
    fn normalization_is_idempotent() {
        let c4 = MetricGraph::unit(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let pd = PathDecomposition::new([vec![0, 1, 2], vec![0, 2, 3]]);
        assert_eq!(normalize_decomposition(&pd, &c4).unwrap(), pd);
        let dup = PathDecomposition::new([vec![0, 1, 2], vec![0, 1, 2], vec![0, 2, 3]]);
        assert_eq!(normalize_decomposition(&dup, &c4).unwrap(), pd);
        let single = PathDecomposition::new([vec![0, 1, 2]]);
        let k3 = MetricGraph::unit(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(normalize_decomposition(&single, &k3).unwrap(), single);
    }

    #[test]
    fn json_round_trip() {
        let pd = PathDecomposition::from_json_str(r#"{"bags":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(pd, PathDecomposition::new([vec![0, 1], vec![1, 2]]));
        assert_eq!(PathDecomposition::from_json_str(&pd.to_json_string()).unwrap(), pd);
        assert!(matches!(
            PathDecomposition::from_json_str(r#"{"bags":[[0,0]]}"#),
            Err(DecompositionParseError::DuplicateInBag(0))
        ));
    }
}
