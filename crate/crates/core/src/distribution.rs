//! Exact output distributions of the randomized embeddings.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{DistanceMatrix, Edge, MetricGraph, Vertex};

pub const DEFAULT_OUTCOME_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("enumeration exceeds {limit} outcomes")]
    TooManyOutcomes { limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeOutcome {
    pub edges: Vec<(Vertex, Vertex)>,
    pub probability: BigRational,
}

/// A finite distribution over spanning trees whose edges carry the lengths
/// of `lengths`.
#[derive(Debug, Clone)]
pub struct TreeDistribution {
    pub outcomes: Vec<TreeOutcome>,
    lengths: MetricGraph,
}

impl TreeDistribution {
    /// Merges identical trees and orders outcomes by edge list.
    pub fn from_weighted(
        lengths: &MetricGraph,
        weighted: impl IntoIterator<Item = (Vec<(Vertex, Vertex)>, BigRational)>,
    ) -> Self {
        let mut merged: BTreeMap<Vec<(Vertex, Vertex)>, BigRational> = BTreeMap::new();
        for (mut edges, p) in weighted {
            edges.sort_unstable();
            let slot = merged.entry(edges).or_insert_with(BigRational::zero);
            *slot += p;
        }
        TreeDistribution {
            outcomes: merged
                .into_iter()
                .map(|(edges, probability)| TreeOutcome { edges, probability })
                .collect(),
            lengths: lengths.clone(),
        }
    }

    pub fn total_probability(&self) -> BigRational {
        self.outcomes.iter().map(|o| o.probability.clone()).sum()
    }

    pub fn tree(&self, i: usize) -> MetricGraph {
        let edges = self.outcomes[i].edges.iter().map(|&(a, b)| {
            (a, b, self.lengths.length(a, b).expect("tree edges come from the length graph"))
        });
        MetricGraph::new(self.lengths.vertices().iter().copied(), edges)
            .expect("outcome is a valid graph")
    }

    fn distance_tables(&self) -> Vec<DistanceMatrix> {
        (0..self.outcomes.len())
            .map(|i| DistanceMatrix::of_forest(&self.tree(i)))
            .collect()
    }

    /// Exact `E[d_T(x, y)]`.
    pub fn expected_distance(&self, x: Vertex, y: Vertex) -> BigRational {
        let mut acc = BigRational::zero();
        for (o, d) in self.outcomes.iter().zip(self.distance_tables()) {
            let dist = d.get(x, y).and_then(|d| d.finite()).expect("outcome spans x and y");
            acc += &o.probability * dist.to_big();
        }
        acc
    }

    /// Exact expected stretch `E[d_T(u, v)] / len(u, v)` for every edge of
    /// `g` with positive length.
    pub fn expected_edge_stretches(&self, g: &MetricGraph) -> Vec<(Edge, BigRational)> {
        let tables = self.distance_tables();
        g.edges()
            .filter(|e| !e.len.is_zero())
            .map(|e| {
                let mut acc = BigRational::zero();
                for (o, d) in self.outcomes.iter().zip(&tables) {
                    let dist = d.get(e.u, e.v).and_then(|d| d.finite()).expect("outcome spans edge");
                    acc += &o.probability * dist.to_big();
                }
                let stretch = acc / e.len.to_big();
                (e, stretch)
            })
            .collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.total_probability().is_one()
    }
}
