//! Random spanning trees of pathwidth-2 composition graphs.
//!
//! The tree carries one edge `e_i` of the current 2-window. Attaching the new
//! vertex `w` closes a triangle, and one of its edges is deleted at random,
//! biased toward deleting long edges, with short edges inflated by `τ`.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::distribution::{EnumerationError, TreeDistribution, DEFAULT_OUTCOME_LIMIT};
use crate::graph::{pair, MetricGraph, Vertex};
use crate::length::Length;
use crate::pathwidth::{CompositionError, LinearCompositionSequence};

pub const TAU_PW2: i128 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Pw2Error {
    #[error("the warm-up algorithm needs a width-2 sequence, got width {0}")]
    WrongWidth(usize),
    #[error("no length for composed edge {{{0}, {1}}}")]
    MissingLength(Vertex, Vertex),
    #[error("both candidate edges have length zero")]
    DegenerateZero,
    #[error(transparent)]
    Composition(#[from] CompositionError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowCase {
    /// `e_{i+1} = e_i`.
    SameWindow,
    /// `e_{i+1} = {v, w*}`: the window moved onto the new vertex.
    MovedWindow,
}

/// Probability of deleting `{u, w*}`. In the moved case the alternative is
/// deleting `{u, v}`; in the same-window case it is deleting `{v, w*}`.
pub fn pw2_deletion_probability(
    case: WindowCase,
    len_uw: Length,
    len_vw: Length,
    len_uv: Length,
) -> Result<Length, Pw2Error> {
    pw2_deletion_probability_with_tau(case, len_uw, len_vw, len_uv, Length::from_integer(TAU_PW2))
}

pub fn pw2_deletion_probability_with_tau(
    case: WindowCase,
    len_uw: Length,
    len_vw: Length,
    len_uv: Length,
    tau: Length,
) -> Result<Length, Pw2Error> {
    match case {
        WindowCase::SameWindow => {
            let denom = len_uw + len_vw;
            if denom.is_zero() {
                return Err(Pw2Error::DegenerateZero);
            }
            Ok(len_uw / denom)
        }
        WindowCase::MovedWindow => {
            let denom = len_uw + len_uv;
            if denom.is_zero() {
                return Err(Pw2Error::DegenerateZero);
            }
            Ok((tau * len_uw / denom).min(Length::ONE))
        }
    }
}

/// One random deletion: with probability `p` remove `first`, else `second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Choice {
    p: Length,
    first: (Vertex, Vertex),
    second: (Vertex, Vertex),
}

fn edge_len(lengths: &MetricGraph, a: Vertex, b: Vertex) -> Result<Length, Pw2Error> {
    lengths.length(a, b).ok_or_else(|| {
        let (x, y) = pair(a, b);
        Pw2Error::MissingLength(x, y)
    })
}

/// The deletion rule of every step. It depends only on the sequence and the
/// lengths, never on earlier random outcomes.
fn plan(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    tau: Length,
) -> Result<Vec<Choice>, Pw2Error> {
    if seq.k != 2 {
        return Err(Pw2Error::WrongWidth(seq.k));
    }
    seq.validate()?;
    let mut choices = Vec::with_capacity(seq.steps.len());
    for (i, step) in seq.steps.iter().enumerate() {
        let e: Vec<Vertex> = seq.window(i).iter().copied().collect();
        let (u, v) = (e[0], e[1]);
        let w = step.new;
        let (uw, vw, uv) = (edge_len(lengths, u, w)?, edge_len(lengths, v, w)?, edge_len(lengths, u, v)?);
        let next = &step.window;
        let choice = if next.contains(&u) && next.contains(&v) {
            let p = pw2_deletion_probability_with_tau(WindowCase::SameWindow, uw, vw, uv, tau);
            Choice {
                p: p.unwrap_or(Length::new(1, 2)),
                first: pair(u, w),
                second: pair(v, w),
            }
        } else if next.contains(&v) {
            let p = pw2_deletion_probability_with_tau(WindowCase::MovedWindow, uw, vw, uv, tau);
            Choice {
                p: p.unwrap_or(Length::new(1, 2)),
                first: pair(u, w),
                second: pair(u, v),
            }
        } else {
            // the window moved to {u, w*}: same rule with u and v exchanged
            let p = pw2_deletion_probability_with_tau(WindowCase::MovedWindow, vw, uw, uv, tau);
            Choice {
                p: p.unwrap_or(Length::new(1, 2)),
                first: pair(v, w),
                second: pair(u, v),
            }
        };
        choices.push(choice);
    }
    Ok(choices)
}

fn tree_from_edges(lengths: &MetricGraph, edges: &BTreeSet<(Vertex, Vertex)>) -> MetricGraph {
    MetricGraph::new(
        lengths.vertices().iter().copied(),
        edges.iter().map(|&(a, b)| (a, b, lengths.length(a, b).unwrap())),
    )
    .expect("tree edges are composed edges")
}

/// Samples a spanning tree of the composed graph. `lengths` must carry a
/// reduced length for every composed edge (see `composed_metric`).
pub fn embed_pathwidth2<R: Rng + ?Sized>(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    rng: &mut R,
) -> Result<MetricGraph, Pw2Error> {
    embed_pathwidth2_with_tau(seq, lengths, Length::from_integer(TAU_PW2), rng)
}

pub fn embed_pathwidth2_with_tau<R: Rng + ?Sized>(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    tau: Length,
    rng: &mut R,
) -> Result<MetricGraph, Pw2Error> {
    let choices = plan(seq, lengths, tau)?;
    let e0: Vec<Vertex> = seq.initial.iter().copied().collect();
    let mut tree: BTreeSet<(Vertex, Vertex)> = BTreeSet::from([pair(e0[0], e0[1])]);
    for (i, (step, c)) in seq.steps.iter().zip(&choices).enumerate() {
        for &x in seq.window(i) {
            tree.insert(pair(x, step.new));
        }
        let u: f64 = rng.gen();
        if u < c.p.to_f64() {
            tree.remove(&c.first);
        } else {
            tree.remove(&c.second);
        }
        let next: Vec<Vertex> = step.window.iter().copied().collect();
        assert!(tree.contains(&pair(next[0], next[1])), "window edge left the tree");
    }
    Ok(tree_from_edges(lengths, &tree))
}

/// Every possible output tree with its exact probability.
pub fn enumerate_pw2_distribution(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
) -> Result<TreeDistribution, Pw2Error> {
    enumerate_pw2_distribution_with_limit(seq, lengths, DEFAULT_OUTCOME_LIMIT)
}

pub fn enumerate_pw2_distribution_with_limit(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    limit: usize,
) -> Result<TreeDistribution, Pw2Error> {
    let choices = plan(seq, lengths, Length::from_integer(TAU_PW2))?;
    let random = choices
        .iter()
        .filter(|c| !c.p.is_zero() && c.p != Length::ONE)
        .count();
    if random >= usize::BITS as usize || (1usize << random) > limit {
        return Err(EnumerationError::TooManyOutcomes { limit }.into());
    }
    let e0: Vec<Vertex> = seq.initial.iter().copied().collect();
    let mut frontier = vec![(BTreeSet::from([pair(e0[0], e0[1])]), BigRational::one())];
    for (i, (step, c)) in seq.steps.iter().zip(&choices).enumerate() {
        let p = c.p.to_big();
        let q = BigRational::one() - &p;
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (mut tree, prob) in frontier {
            for &x in seq.window(i) {
                tree.insert(pair(x, step.new));
            }
            for (drop, branch) in [(c.first, &p), (c.second, &q)] {
                if branch.is_zero() {
                    continue;
                }
                let mut t = tree.clone();
                t.remove(&drop);
                next.push((t, &prob * branch));
            }
        }
        frontier = next;
    }
    Ok(TreeDistribution::from_weighted(
        lengths,
        frontier.into_iter().map(|(t, p)| (t.into_iter().collect(), p)),
    ))
}
