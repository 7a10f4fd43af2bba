//! Exact non-contraction checks, Monte Carlo stretch estimation and the
//! lower-bound witness checkers.

mod estimate;
mod lower_bound;
mod metric;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{MetricGraph, Vertex};
use crate::length::Distance;

pub use estimate::{
    estimate_distortion, estimate_distortion_with, instance_hash, pw2_stretch_bound, pwk_stretch_bound,
    EdgeStretch, Embedder, IdentityEmbedder, NonContractionSummary, Pw2Embedder, PwkEmbedder,
    SampleViolation, StretchReport, Verdict, ZeroDistancePair, DEFAULT_BLOCK, TOLERANCE_SIGMA,
};
pub use lower_bound::{
    caterpillar_embedding, check_close_to_p, dfs_preorder, line_embedding, lower_bound_threshold,
    spider_of_lines, verify_lower_bound_witness, witness_instance, CloseToPathVerdict, WitnessVerdict,
};
pub use metric::{NonContractionChecker, TargetDistances};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("vertex map misses source vertex {0}")]
    MapNotTotal(Vertex),
    #[error("vertex map sends a vertex to {0}, which is not in the target")]
    UnknownTarget(Vertex),
    #[error("at least one sample is required")]
    ZeroSamples,
    #[error("the graph has no edges")]
    EmptyEdgeSet,
    #[error("m = {m} is not the 2^{k}-th power of an even number")]
    BadDomain { k: u32, m: u64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("embedding failed: {0}")]
    Embedding(String),
}

/// A sampled embedding: a target graph and a map `F` from source vertices
/// to target vertices.
#[derive(Debug, Clone)]
pub struct EmbeddingSample {
    pub target: MetricGraph,
    pub map: BTreeMap<Vertex, Vertex>,
}

impl EmbeddingSample {
    /// `F` is the identity on the vertices of `target`.
    pub fn identity(target: MetricGraph) -> Self {
        let map = target.vertices().iter().map(|&v| (v, v)).collect();
        EmbeddingSample { target, map }
    }

    pub fn new(target: MetricGraph, map: BTreeMap<Vertex, Vertex>) -> Result<Self, HarnessError> {
        if let Some(&t) = map.values().find(|&&t| !target.contains(t)) {
            return Err(HarnessError::UnknownTarget(t));
        }
        Ok(EmbeddingSample { target, map })
    }

    /// Target index of every source vertex, in source index order.
    fn image_indices(&self, g: &MetricGraph) -> Result<Vec<usize>, HarnessError> {
        g.vertices()
            .iter()
            .map(|&v| {
                let t = *self.map.get(&v).ok_or(HarnessError::MapNotTotal(v))?;
                self.target.index_of(t).ok_or(HarnessError::UnknownTarget(t))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub u: Vertex,
    pub v: Vertex,
    pub d_g: Distance,
    pub d_t: Distance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonContractionReport {
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl NonContractionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact check that `d_T(F(x), F(y)) ≥ d_G(x, y)` for every pair.
pub fn check_noncontraction(
    g: &MetricGraph,
    sample: &EmbeddingSample,
) -> Result<NonContractionReport, HarnessError> {
    NonContractionChecker::new(g).check(sample)
}

/// Exact edge-stretch averages of one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageStretch {
    pub edges: usize,
    /// `Σ d_T(F(u), F(v))` over the edges of `G`.
    #[serde(serialize_with = "serialize_big")]
    pub total_distance: BigRational,
    /// `total_distance / |E|`, the normalization of the lower-bound argument.
    #[serde(serialize_with = "serialize_big")]
    pub mean_distance: BigRational,
    /// Mean of `d_T(F(u), F(v)) / len(u, v)` over positive-length edges.
    #[serde(serialize_with = "serialize_big")]
    pub mean_stretch: BigRational,
}

pub(crate) fn serialize_big<S: serde::Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

/// Averages over the edges of `g`. Assumes the sample is non-contractive,
/// so every image distance is finite.
pub fn average_edge_stretch(g: &MetricGraph, sample: &EmbeddingSample) -> Result<AverageStretch, HarnessError> {
    if g.num_edges() == 0 {
        return Err(HarnessError::EmptyEdgeSet);
    }
    let d = TargetDistances::compute(&sample.target);
    let image = sample.image_indices(g)?;
    let mut total = BigRational::zero();
    let mut ratio_sum = BigRational::zero();
    let mut positive = 0usize;
    for e in g.edges() {
        let (iu, iv) = (g.index_of(e.u).unwrap(), g.index_of(e.v).unwrap());
        let dt = d
            .get(image[iu], image[iv])
            .finite()
            .ok_or_else(|| HarnessError::PreconditionFailed(format!("edge {{{}, {}}} maps to disconnected vertices", e.u, e.v)))?
            .to_big();
        if !e.len.is_zero() {
            ratio_sum += &dt / e.len.to_big();
            positive += 1;
        }
        total += dt;
    }
    let edges = g.num_edges();
    Ok(AverageStretch {
        edges,
        mean_distance: &total / BigRational::from_integer(edges.into()),
        total_distance: total,
        mean_stretch: if positive == 0 {
            BigRational::zero()
        } else {
            ratio_sum / BigRational::from_integer(positive.into())
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::length::Length;

    fn star() -> MetricGraph {
        MetricGraph::unit(4, [(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn identity_of_a_tree_passes() {
        let t = star();
        let r = check_noncontraction(&t, &EmbeddingSample::identity(t.clone())).unwrap();
        assert!(r.passed());
        assert_eq!(r.pairs_checked, 6);
    }

    #[test]
    fn collapsing_map_fails_with_the_pair() {
        let g = MetricGraph::unit(3, [(0, 1), (1, 2)]).unwrap();
        let target = MetricGraph::unit(2, [(0, 1)]).unwrap();
        let map = BTreeMap::from([(0, 0), (1, 1), (2, 0)]);
        let r = check_noncontraction(&g, &EmbeddingSample::new(target, map).unwrap()).unwrap();
        assert_eq!(
            r.violations,
            vec![Violation {
                u: 0,
                v: 2,
                d_g: Distance::Finite(Length::from_integer(2)),
                d_t: Distance::Finite(Length::ZERO),
            }]
        );
    }

    #[test]
    fn map_must_be_total() {
        let g = star();
        let target = MetricGraph::unit(2, [(0, 1)]).unwrap();
        let s = EmbeddingSample::new(target, BTreeMap::from([(0, 0)])).unwrap();
        assert_eq!(check_noncontraction(&g, &s), Err(HarnessError::MapNotTotal(1)));
        assert!(matches!(
            EmbeddingSample::new(MetricGraph::unit(1, []).unwrap(), BTreeMap::from([(0, 5)])),
            Err(HarnessError::UnknownTarget(5))
        ));
    }

    #[test]
    fn zero_distance_pairs_never_violate() {
        let g = MetricGraph::new(0..2, [(0, 1, Length::ZERO)]).unwrap();
        let target = MetricGraph::unit(1, []).unwrap();
        let s = EmbeddingSample::new(target, BTreeMap::from([(0, 0), (1, 0)])).unwrap();
        assert!(check_noncontraction(&g, &s).unwrap().passed());
    }

    #[test]
    fn flattened_star() {
        let g = star();
        let path = MetricGraph::unit(4, [(1, 0), (0, 2), (2, 3)]).unwrap();
        let s = EmbeddingSample::identity(path);
        // Averages do not check contraction; this flattening squeezes {2, 3}.
        let r = check_noncontraction(&g, &s).unwrap();
        assert_eq!(r.violations.len(), 1);
        let a = average_edge_stretch(&g, &s).unwrap();
        assert_eq!(a.mean_stretch, BigRational::new(4.into(), 3.into()));
        assert_eq!(a.total_distance, BigRational::from_integer(4.into()));
        let id = average_edge_stretch(&g, &EmbeddingSample::identity(g.clone())).unwrap();
        assert_eq!(id.mean_stretch, BigRational::from_integer(1.into()));
        assert_eq!(
            average_edge_stretch(&MetricGraph::unit(1, []).unwrap(), &EmbeddingSample::identity(MetricGraph::unit(1, []).unwrap())),
            Err(HarnessError::EmptyEdgeSet)
        );
    }

    #[test]
    fn fractional_lengths() {
        let g = MetricGraph::new(0..3, [(0, 1, Length::new(1, 3)), (1, 2, Length::new(1, 2))]).unwrap();
        let shorter = MetricGraph::new(0..3, [(0, 1, Length::new(1, 3)), (1, 2, Length::new(1, 3))]).unwrap();
        let r = check_noncontraction(&g, &EmbeddingSample::identity(shorter)).unwrap();
        assert_eq!(r.violations.len(), 2);
        assert!(check_noncontraction(&g, &EmbeddingSample::identity(g.clone())).unwrap().passed());
    }
}
