//! Random tree embeddings of pathwidth-k composition graphs.
//!
//! At each step the vertex `w` leaving the window keeps exactly one of its
//! `k` edges into the rest of the window. A random length threshold selects
//! an eligible prefix of those edges (sorted by length), and among the
//! eligible edges the one whose path history carries the highest rank is
//! kept. At the end the last clique is replaced by its minimum spanning tree.

mod state;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

pub use state::{rank_bound, EmbeddingState, PwkError, Transition};

use crate::distribution::{EnumerationError, TreeDistribution, DEFAULT_OUTCOME_LIMIT};
use crate::graph::MetricGraph;
use crate::length::Length;
use crate::pathwidth::LinearCompositionSequence;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PwkConfig {
    /// Inflation factor; `None` means `4k`.
    pub tau: Option<Length>,
    /// Keep every pair rank, not just the per-edge maxima.
    pub track_pair_ranks: bool,
}

impl PwkConfig {
    pub fn tau_for(&self, k: usize) -> Length {
        self.tau.unwrap_or(Length::from_integer(4 * k as i128))
    }
}

/// The sampled `σ_j` and the resulting eligible prefix length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EligibleDraw {
    pub sigma: Vec<bool>,
    pub prefix_len: usize,
}

/// `P[σ_j = 1] = min{1, τ·len(e_j)/len(e_{j+1})}`, with `0/0` read as 1.
pub fn sigma_probability(len_j: Length, len_next: Length, tau: Length) -> Length {
    if len_next.is_zero() {
        return Length::ONE;
    }
    (tau * len_j / len_next).min(Length::ONE)
}

/// Draws all `k - 1` indicators, one uniform each, and returns the eligible
/// prefix: everything up to the first zero.
pub fn eligible_set<R: Rng + ?Sized>(sorted_lengths: &[Length], tau: Length, rng: &mut R) -> EligibleDraw {
    debug_assert!(sorted_lengths.windows(2).all(|w| w[0] <= w[1]));
    let sigma: Vec<bool> = sorted_lengths
        .windows(2)
        .map(|w| {
            let p = sigma_probability(w[0], w[1], tau);
            rng.gen::<f64>() < p.to_f64()
        })
        .collect();
    let prefix_len = 1 + sigma.iter().take_while(|&&s| s).count();
    EligibleDraw { sigma, prefix_len }
}

/// Exact distribution of the eligible prefix length, indexed from 1.
fn prefix_distribution(sorted_lengths: &[Length], tau: Length) -> Vec<(usize, BigRational)> {
    let k = sorted_lengths.len();
    let mut out = Vec::with_capacity(k);
    let mut reach = BigRational::one();
    for j in 1..=k {
        let stop = if j < k {
            BigRational::one() - sigma_probability(sorted_lengths[j - 1], sorted_lengths[j], tau).to_big()
        } else {
            BigRational::one()
        };
        let p = &reach * &stop;
        if !p.is_zero() {
            out.push((j, p));
        }
        reach -= &reach * &stop;
        if reach.is_zero() {
            break;
        }
    }
    out
}

/// One random transition `H_i → H_{i+1}`: `kept` is `V_i` and `new_vertex`
/// is `v_{i+1}`.
pub fn step_transition<R: Rng + ?Sized>(
    state: &mut EmbeddingState,
    kept: &std::collections::BTreeSet<crate::graph::Vertex>,
    new_vertex: crate::graph::Vertex,
    lengths: &MetricGraph,
    tau: Length,
    rng: &mut R,
) -> Result<(Transition, EligibleDraw), PwkError> {
    let (_, sorted) = state.departing_edges(kept, lengths)?;
    let lens: Vec<Length> = sorted.iter().map(|&(_, l)| l).collect();
    let draw = eligible_set(&lens, tau, rng);
    let t = state.apply(kept, new_vertex, lengths, draw.prefix_len)?;
    Ok((t, draw))
}

/// Samples a tree. `lengths` must carry a reduced length on every composed
/// edge (see `composed_metric`).
pub fn embed_pathwidthk<R: Rng + ?Sized>(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    rng: &mut R,
) -> Result<MetricGraph, PwkError> {
    embed_pathwidthk_with(seq, lengths, &PwkConfig::default(), rng)
}

pub fn embed_pathwidthk_with<R: Rng + ?Sized>(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    config: &PwkConfig,
    rng: &mut R,
) -> Result<MetricGraph, PwkError> {
    embed_pathwidthk_traced(seq, lengths, config, rng, |_, _| {})
}

/// Like [`embed_pathwidthk_with`], calling `observe` after every transition.
pub fn embed_pathwidthk_traced<R, F>(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    config: &PwkConfig,
    rng: &mut R,
    mut observe: F,
) -> Result<MetricGraph, PwkError>
where
    R: Rng + ?Sized,
    F: FnMut(&EmbeddingState, &Transition),
{
    seq.validate()?;
    let tau = config.tau_for(seq.k);
    let mut state = EmbeddingState::initial(seq, config.track_pair_ranks);
    for i in 1..seq.steps.len() {
        let (t, _) = step_transition(&mut state, seq.window(i), seq.steps[i].new, lengths, tau, rng)?;
        observe(&state, &t);
    }
    state.finish(lengths)
}

/// Every possible output tree with its exact probability.
pub fn enumerate_pwk_distribution(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
) -> Result<TreeDistribution, PwkError> {
    enumerate_pwk_distribution_with(seq, lengths, &PwkConfig::default(), DEFAULT_OUTCOME_LIMIT)
}

pub fn enumerate_pwk_distribution_with(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    config: &PwkConfig,
    limit: usize,
) -> Result<TreeDistribution, PwkError> {
    seq.validate()?;
    let tau = config.tau_for(seq.k);
    let mut leaves = Vec::new();
    let state = EmbeddingState::initial(seq, false);
    explore(seq, lengths, tau, limit, 1, state, BigRational::one(), &mut leaves)?;
    Ok(TreeDistribution::from_weighted(lengths, leaves))
}

#[allow(clippy::too_many_arguments)]
fn explore(
    seq: &LinearCompositionSequence,
    lengths: &MetricGraph,
    tau: Length,
    limit: usize,
    i: usize,
    state: EmbeddingState,
    prob: BigRational,
    leaves: &mut Vec<(Vec<(u64, u64)>, BigRational)>,
) -> Result<(), PwkError> {
    if i >= seq.steps.len() {
        if leaves.len() >= limit {
            return Err(EnumerationError::TooManyOutcomes { limit }.into());
        }
        let tree = state.finish(lengths)?;
        leaves.push((tree.edges().map(|e| e.key()).collect(), prob));
        return Ok(());
    }
    let kept = seq.window(i);
    let (_, sorted) = state.departing_edges(kept, lengths)?;
    let lens: Vec<Length> = sorted.iter().map(|&(_, l)| l).collect();
    for (j, p) in prefix_distribution(&lens, tau) {
        let mut next = state.clone();
        next.apply(kept, seq.steps[i].new, lengths, j)?;
        explore(seq, lengths, tau, limit, i + 1, next, &prob * p, leaves)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MetricGraph;
    use crate::pathwidth::composed_metric;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn l(n: i128) -> Length {
        Length::from_integer(n)
    }

    fn c4() -> (LinearCompositionSequence, MetricGraph) {
        let seq = LinearCompositionSequence::new(2, [0, 1], [(2, vec![0, 2]), (3, vec![0, 3])]).unwrap();
        let g = MetricGraph::unit(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let lengths = composed_metric(&seq, &g).unwrap();
        (seq, lengths)
    }

    #[test]
    fn eligible_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = eligible_set(&[l(1), l(1), l(1)], l(8), &mut rng);
            assert_eq!(d.prefix_len, 3);
            let d = eligible_set(&[l(0), l(5)], l(8), &mut rng);
            assert_eq!(d.prefix_len, 1);
        }
        assert_eq!(sigma_probability(l(1), l(100), l(8)), Length::new(2, 25));
        assert_eq!(sigma_probability(l(0), l(0), l(8)), Length::ONE);
        let dist = prefix_distribution(&[l(1), l(100)], l(8));
        assert_eq!(dist[0], (1, BigRational::new(23.into(), 25.into())));
        assert_eq!(dist[1], (2, BigRational::new(2.into(), 25.into())));
    }

    #[test]
    fn k1_grows_a_path() {
        let seq = LinearCompositionSequence::new(1, [0], [(1, vec![1]), (2, vec![2]), (3, vec![3])]).unwrap();
        let g = MetricGraph::unit(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let lengths = composed_metric(&seq, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = embed_pathwidthk(&seq, &lengths, &mut rng).unwrap();
        assert_eq!(t, g);
    }

    #[test]
    fn zero_steps_gives_clique_mst() {
        let seq = LinearCompositionSequence::new(3, [0, 1, 2], []).unwrap();
        let g = MetricGraph::unit(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let dist = enumerate_pwk_distribution(&seq, &g).unwrap();
        assert_eq!(dist.outcomes.len(), 1);
        assert_eq!(dist.outcomes[0].edges, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn unit_triangle_single_step() {
        let seq = LinearCompositionSequence::new(2, [0, 1], [(2, vec![0, 2])]).unwrap();
        let g = MetricGraph::unit(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = embed_pathwidthk(&seq, &g, &mut rng).unwrap();
        assert!(t.is_tree());
        let d = crate::graph::DistanceMatrix::of_forest(&t);
        assert!(d.get(1, 2).unwrap() <= crate::length::Distance::Finite(l(2)));
    }

    #[test]
    fn first_transition_keeps_shortest() {
        // unit lengths, fresh ranks: e1 wins and the other departing edge goes
        let (seq, lengths) = c4();
        let mut state = EmbeddingState::initial(&seq, true);
        let t = state.apply(seq.window(1), 3, &lengths, 2).unwrap();
        assert_eq!(t.w, 1);
        assert_eq!(t.kept, (0, 1));
        assert!(!state.edges().contains(&(1, 2)));
        assert!(state.check_structure());
        assert_eq!(state.edge_rank(0, 2), Ok(1));
        assert_eq!(state.edge_rank_brute_force(0, 2), Ok(1));
    }

    #[test]
    fn canonical_paths() {
        let (seq, lengths) = c4();
        let mut state = EmbeddingState::initial(&seq, false);
        assert_eq!(state.canonical_path(2, 2).unwrap(), vec![]);
        assert_eq!(state.canonical_path(0, 2).unwrap(), vec![(0, 2)]);
        state.apply(seq.window(1), 3, &lengths, 1).unwrap();
        // 1 now hangs off 0; path from 1 to 3 goes 1-0-3
        assert_eq!(state.canonical_path(1, 3).unwrap(), vec![(0, 1), (0, 3)]);
        assert_eq!(state.canonical_path(9, 3), Err(PwkError::VertexAbsent(9)));
        assert_eq!(state.edge_rank(1, 3), Err(PwkError::NotACliqueEdge(1, 3)));
    }

    #[test]
    fn four_cycle_distribution_is_exact() {
        let (seq, lengths) = c4();
        let dist = enumerate_pwk_distribution(&seq, &lengths).unwrap();
        assert!(dist.is_normalized());
        for i in 0..dist.outcomes.len() {
            let t = dist.tree(i);
            assert!(t.is_tree());
            let d = crate::graph::DistanceMatrix::of_forest(&t);
            for &a in t.vertices() {
                for &b in t.vertices() {
                    assert!(d.get(a, b).unwrap() <= crate::length::Distance::Finite(l(3)));
                }
            }
        }
    }
}
