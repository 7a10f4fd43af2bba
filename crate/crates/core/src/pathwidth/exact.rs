//! Exact pathwidth by dynamic programming over vertex subsets.
//!
//! Pathwidth equals the vertex separation number: the minimum over vertex
//! orderings of the largest number of already placed vertices that still
//! have an unplaced neighbour. With `f(S)` the best value for placing `S`
//! first, `f(S) = max(|∂S|, min_{v ∈ S} f(S \ v))`.

use std::collections::BTreeSet;

use thiserror::Error;

use super::decomposition::PathDecomposition;
use crate::graph::MetricGraph;

pub const DEFAULT_ORACLE_LIMIT: usize = 20;
const HARD_LIMIT: usize = 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {n} vertices, above the exact oracle limit of {limit}")]
    TooLarge { n: usize, limit: usize },
}

struct SeparationTable {
    n: usize,
    adj: Vec<u32>,
    f: Vec<u8>,
}

impl SeparationTable {
    fn build(g: &MetricGraph, limit: usize) -> Result<Self, OracleError> {
        let n = g.num_vertices();
        let limit = limit.min(HARD_LIMIT);
        if n > limit {
            return Err(OracleError::TooLarge { n, limit });
        }
        let adj: Vec<u32> = (0..n)
            .map(|i| g.adjacency(i).iter().fold(0u32, |m, &(j, _)| m | (1 << j)))
            .collect();
        let full: u32 = (1u32 << n) - 1;
        let mut f = vec![0u8; 1usize << n];
        for s in 1..(1u32 << n) as usize {
            let set = s as u32;
            let outside = full & !set;
            let mut boundary = 0u8;
            let mut best = u8::MAX;
            let mut rest = set;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if adj[v] & outside != 0 {
                    boundary += 1;
                }
                best = best.min(f[s & !(1 << v)]);
            }
            f[s] = best.max(boundary);
        }
        Ok(SeparationTable { n, adj, f })
    }

    fn value(&self) -> usize {
        self.f[(1usize << self.n) - 1] as usize
    }

    /// An optimal ordering, recovered backwards from the full set.
    fn ordering(&self) -> Vec<usize> {
        let mut s = (1usize << self.n) - 1;
        let mut rev = Vec::with_capacity(self.n);
        while s != 0 {
            let mut rest = s;
            let mut pick = None;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if self.f[s & !(1 << v)] <= self.f[s] {
                    pick = Some(v);
                    break;
                }
            }
            let v = pick.expect("some removal attains the optimum");
            rev.push(v);
            s &= !(1 << v);
        }
        rev.reverse();
        rev
    }
}

pub fn exact_pathwidth(g: &MetricGraph) -> Result<usize, OracleError> {
    exact_pathwidth_with_limit(g, DEFAULT_ORACLE_LIMIT)
}

/// Exact pathwidth; the empty graph gets 0.
pub fn exact_pathwidth_with_limit(g: &MetricGraph, limit: usize) -> Result<usize, OracleError> {
    Ok(SeparationTable::build(g, limit)?.value())
}

/// An optimal path decomposition. Bag `i` holds the `i`-th vertex of an
/// optimal ordering together with every earlier vertex that still has a
/// neighbour at position `i` or later.
pub fn exact_path_decomposition(g: &MetricGraph) -> Result<PathDecomposition, OracleError> {
    let table = SeparationTable::build(g, DEFAULT_ORACLE_LIMIT)?;
    let order = table.ordering();
    let mut placed = 0u32;
    let mut bags = Vec::with_capacity(order.len());
    for &v in &order {
        let mut bag: BTreeSet<_> = (0..table.n)
            .filter(|&u| placed & (1 << u) != 0 && table.adj[u] & !placed != 0)
            .map(|u| g.vertex_at(u))
            .collect();
        bag.insert(g.vertex_at(v));
        bags.push(bag);
        placed |= 1 << v;
    }
    Ok(PathDecomposition { bags })
}
