//! Instance generators: spiders, nested spiders, cycles and random
//! bounded-pathwidth graphs.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{MetricGraph, Vertex};
use crate::length::Length;
use crate::pathwidth::{
    decomposition_to_composition, tree_path_decomposition, LinearCompositionSequence,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("truncation {l} must be positive and its ceiling at most {max}")]
    BadTruncation { l: Length, max: u64 },
}

/// Smallest `c` with `c^(2^j) ≥ m`, i.e. `⌈m^(1/2^j)⌉`.
pub fn ceil_root_pow2(m: u64, j: u32) -> u64 {
    let fits = |c: u64| -> bool {
        let mut x = c as u128;
        for _ in 0..j {
            x = match x.checked_mul(x) {
                Some(y) => y,
                None => return true,
            };
            if x >= m as u128 {
                return true;
            }
        }
        x >= m as u128
    };
    let (mut lo, mut hi) = (0u64, m.max(1));
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

struct TreeBuilder {
    next: Vertex,
    edges: Vec<(Vertex, Vertex)>,
}

impl TreeBuilder {
    fn fresh(&mut self) -> Vertex {
        let v = self.next;
        self.next += 1;
        v
    }

    /// Hangs `branches` unit paths of `len` vertices off `root`; each leaf is
    /// handed to `at_leaf` before the next branch starts, so ids follow a
    /// depth-first order.
    fn spider(&mut self, root: Vertex, branches: u64, len: u64, at_leaf: &mut dyn FnMut(&mut Self, Vertex)) {
        for _ in 0..branches {
            let mut prev = root;
            for _ in 0..len {
                let v = self.fresh();
                self.edges.push((prev, v));
                prev = v;
            }
            at_leaf(self, prev);
        }
    }

    fn finish(self) -> MetricGraph {
        MetricGraph::unit(self.next, self.edges).expect("generated tree is valid")
    }
}

/// `Φ_i`: a root joined to `i` disjoint unit paths with `i` edges each.
pub fn phi(i: u64) -> Result<MetricGraph, InstanceError> {
    if i == 0 {
        return Err(InstanceError::BadParameter("phi needs i ≥ 1".into()));
    }
    let mut b = TreeBuilder { next: 1, edges: Vec::new() };
    b.spider(0, i, i, &mut |_, _| {});
    Ok(b.finish())
}

/// Branch count of the level-`depth` spider inside `Ψ_{i,m}`, where the
/// parameter at that level is `m^(1/2^depth)`.
fn psi_branches(m: u64, depth: u32) -> u64 {
    ceil_root_pow2(m, depth + 1)
}

fn grow_psi(b: &mut TreeBuilder, root: Vertex, levels: u32, m: u64, depth: u32, keep: u64) {
    let c = psi_branches(m, depth);
    let mut nested = |b: &mut TreeBuilder, leaf: Vertex| {
        if levels > 1 {
            let c_next = psi_branches(m, depth + 1);
            grow_psi(b, leaf, levels - 1, m, depth + 1, c_next);
        }
    };
    b.spider(root, keep, c, &mut nested);
}

/// `Ψ_{i,m}`: `Ψ_{1,m} = Φ_{⌈√m⌉}`, and `Ψ_{i,m}` is `Φ_{⌈√m⌉}` with a copy
/// of `Ψ_{i-1,√m}` rooted at every leaf.
pub fn psi(i: u32, m: u64) -> Result<MetricGraph, InstanceError> {
    check_psi(i, m)?;
    psi_truncated_count(i, m, psi_branches(m, 0))
}

/// `Ψ_{i,m,ℓ}`: `Ψ_{i,m}` keeping only the first `⌈ℓ⌉` root branches.
pub fn psi_truncated(i: u32, m: u64, l: Length) -> Result<MetricGraph, InstanceError> {
    check_psi(i, m)?;
    let max = psi_branches(m, 0);
    let keep = l.ceil();
    if l <= Length::ZERO || keep > max as i128 {
        return Err(InstanceError::BadTruncation { l, max });
    }
    psi_truncated_count(i, m, keep as u64)
}

fn check_psi(i: u32, m: u64) -> Result<(), InstanceError> {
    if i == 0 || m == 0 {
        return Err(InstanceError::BadParameter("psi needs i ≥ 1 and m ≥ 1".into()));
    }
    if i > 6 {
        return Err(InstanceError::BadParameter("psi depth above 6 is not supported".into()));
    }
    Ok(())
}

fn psi_truncated_count(i: u32, m: u64, keep: u64) -> Result<MetricGraph, InstanceError> {
    let count = psi_vertex_count(i, m, keep);
    if count > 5_000_000 {
        return Err(InstanceError::BadParameter(format!("psi would have {count} vertices")));
    }
    let mut b = TreeBuilder { next: 1, edges: Vec::new() };
    grow_psi(&mut b, 0, i, m, 0, keep);
    Ok(b.finish())
}

/// Vertex count of `Ψ_{i,m}` with `keep` root branches, from the recurrence
/// `|Ψ| = 1 + keep·(c - 1) + keep·|Ψ_{i-1}|` where `c` is the branch length.
pub fn psi_vertex_count(i: u32, m: u64, keep: u64) -> u128 {
    fn go(levels: u32, m: u64, depth: u32, keep: u64) -> u128 {
        let c = psi_branches(m, depth) as u128;
        let sub = if levels > 1 {
            go(levels - 1, m, depth + 1, psi_branches(m, depth + 1))
        } else {
            1
        };
        1 + keep as u128 * (c - 1) + keep as u128 * sub
    }
    go(i, m, 0, keep)
}

/// A width-`pw` composition sequence for a tree, from an optimal path
/// decomposition.
pub fn tree_composition(t: &MetricGraph) -> Result<LinearCompositionSequence, InstanceError> {
    let pd = tree_path_decomposition(t).map_err(|e| InstanceError::BadParameter(e.to_string()))?;
    decomposition_to_composition(&pd, t).map_err(|e| InstanceError::BadParameter(e.to_string()))
}

/// The unit `n`-cycle with a width-2 sequence whose windows walk around it:
/// `V_0 = {0, 1}`, then step `j` adds `j` and keeps `{0, j}`.
pub fn cycle(n: u64) -> Result<(MetricGraph, LinearCompositionSequence), InstanceError> {
    cycle_with_lengths(&vec![Length::ONE; n as usize])
}

/// Cycle with edge `{j, j+1 mod n}` of length `lengths[j]`.
pub fn cycle_with_lengths(
    lengths: &[Length],
) -> Result<(MetricGraph, LinearCompositionSequence), InstanceError> {
    let n = lengths.len() as u64;
    if n < 3 {
        return Err(InstanceError::BadParameter("cycle needs n ≥ 3".into()));
    }
    if lengths.iter().any(|l| l.is_negative()) {
        return Err(InstanceError::BadParameter("negative cycle length".into()));
    }
    let g = MetricGraph::new(0..n, (0..n).map(|j| (j, (j + 1) % n, lengths[j as usize])))
        .expect("cycle is valid")
        .reduce_lengths();
    let seq = LinearCompositionSequence::new(2, [0, 1], (2..n).map(|j| (j, vec![0, j])))
        .expect("cycle sequence is valid");
    Ok((g, seq))
}

/// How random instances draw edge lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthDistribution {
    Unit,
    /// Uniform integer in `lo..=hi`.
    UniformInt { lo: i128, hi: i128 },
    /// `2^e` for `e` uniform in `0..=max_exp`: many scales at once.
    PowersOfTwo { max_exp: u32 },
}

impl LengthDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Length {
        match *self {
            LengthDistribution::Unit => Length::ONE,
            LengthDistribution::UniformInt { lo, hi } => Length::from_integer(rng.gen_range(lo..=hi)),
            LengthDistribution::PowersOfTwo { max_exp } => {
                Length::from_integer(1i128 << rng.gen_range(0..=max_exp))
            }
        }
    }

    fn validate(&self) -> Result<(), InstanceError> {
        match *self {
            LengthDistribution::UniformInt { lo, hi } if lo < 1 || hi < lo => {
                Err(InstanceError::BadParameter("integer lengths need 1 ≤ lo ≤ hi".into()))
            }
            LengthDistribution::PowersOfTwo { max_exp } if max_exp > 60 => {
                Err(InstanceError::BadParameter("exponent above 60".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A random connected graph on `0..n` that is a subgraph of the composed
/// graph of a random width-`k` sequence, with reduced random lengths.
///
/// Each window drops a uniformly random one of its `k + 1` vertices. The
/// graph keeps a spanning path of `V_0` and one random edge from every new
/// vertex into the previous window, so it is connected; every other composed
/// edge is kept with probability 1/2.
pub fn random_pathwidth_graph<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    lengths: &LengthDistribution,
    rng: &mut R,
) -> Result<(MetricGraph, LinearCompositionSequence), InstanceError> {
    if k == 0 || n < k {
        return Err(InstanceError::BadParameter(format!("need 1 ≤ k ≤ n, got k={k}, n={n}")));
    }
    lengths.validate()?;
    let n = n as u64;
    let k64 = k as u64;
    let mut edges = Vec::new();
    for a in 0..k64 {
        for b in a + 1..k64 {
            if b == a + 1 || rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    let mut window: Vec<Vertex> = (0..k64).collect();
    let mut steps = Vec::with_capacity((n - k64) as usize);
    for v in k64..n {
        let anchor = *window.choose(rng).unwrap();
        for &u in &window {
            if u == anchor || rng.gen_bool(0.5) {
                edges.push((u, v));
            }
        }
        window.push(v);
        let drop = rng.gen_range(0..window.len());
        window.swap_remove(drop);
        window.sort_unstable();
        steps.push((v, window.clone()));
    }
    let weighted: Vec<_> = edges.into_iter().map(|(a, b)| (a, b, lengths.sample(rng))).collect();
    let g = MetricGraph::new(0..n, weighted).expect("generated graph is valid").reduce_lengths();
    let seq = LinearCompositionSequence::new(k, 0..k64, steps).expect("generated sequence is valid");
    Ok((g, seq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathwidth::{
        composed_metric, composition_to_decomposition, exact_pathwidth, tree_pathwidth,
        validate_path_decomposition,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roots() {
        assert_eq!(ceil_root_pow2(9, 1), 3);
        assert_eq!(ceil_root_pow2(10, 1), 4);
        assert_eq!(ceil_root_pow2(81, 2), 3);
        assert_eq!(ceil_root_pow2(82, 2), 4);
        assert_eq!(ceil_root_pow2(1, 3), 1);
        assert_eq!(ceil_root_pow2(u64::MAX, 1), 1 << 32);
    }

    #[test]
    fn spiders() {
        let p1 = phi(1).unwrap();
        assert_eq!((p1.num_vertices(), p1.num_edges()), (2, 1));
        let p3 = phi(3).unwrap();
        assert_eq!(p3.num_vertices(), 10);
        assert_eq!(p3.vertices().iter().filter(|&&v| p3.degree(v) == 1).count(), 3);
        let d = p3.shortest_path_metric();
        let ecc = p3.vertices().iter().map(|&v| d.get(0, v).unwrap()).max().unwrap();
        assert_eq!(ecc, crate::length::Distance::Finite(Length::from_integer(3)));
        for i in 1..5 {
            let p = phi(i).unwrap();
            assert!(p.is_tree());
            let expected = if i <= 2 { 1 } else { 2 };
            assert_eq!(tree_pathwidth(&p), Ok(expected));
            assert_eq!(exact_pathwidth(&p), Ok(expected));
        }
    }

    #[test]
    fn nested_spiders() {
        assert_eq!(psi(1, 9).unwrap(), phi(3).unwrap());
        let p = psi(2, 81).unwrap();
        assert_eq!(p.num_vertices(), 163);
        assert!(p.is_tree());
        assert_eq!(tree_pathwidth(&psi(1, 9).unwrap()), Ok(2));
        assert_eq!(tree_pathwidth(&p), Ok(3));
        let t = psi_truncated(1, 16, Length::from_integer(2)).unwrap();
        assert_eq!(t.num_vertices(), 9);
        assert!(matches!(
            psi_truncated(1, 16, Length::from_integer(5)),
            Err(InstanceError::BadTruncation { .. })
        ));
        assert_eq!(psi_truncated(2, 81, Length::from_integer(9)).unwrap(), p);
    }

    #[test]
    fn vertex_counts_match_construction() {
        for i in 1..=3 {
            for m in [1, 2, 9, 16, 50, 81, 256] {
                let g = psi(i, m).unwrap();
                assert_eq!(g.num_vertices() as u128, psi_vertex_count(i, m, psi_branches(m, 0)));
            }
        }
    }

    #[test]
    fn cycles() {
        let (g, seq) = cycle(3).unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!(seq.steps.len(), 1);
        let (g, seq) = cycle(4).unwrap();
        let pd = composition_to_decomposition(&seq);
        assert_eq!(validate_path_decomposition(&g, &pd), Ok(2));
        let (g, seq) = cycle(9).unwrap();
        let m = composed_metric(&seq, &g).unwrap();
        for j in 2..8 {
            assert_eq!(m.length(0, j), Some(Length::from_integer(j.min(9 - j) as i128)));
        }
    }

    #[test]
    fn random_instances_have_small_pathwidth() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (g, seq) =
                random_pathwidth_graph(2, 10, &LengthDistribution::UniformInt { lo: 1, hi: 9 }, &mut rng).unwrap();
            assert!(g.is_connected());
            assert!(exact_pathwidth(&g).unwrap() <= 2);
            assert!(composed_metric(&seq, &g).is_ok());
        }
        let (g, _) = random_pathwidth_graph(4, 5, &LengthDistribution::Unit, &mut rng).unwrap();
        assert!(exact_pathwidth(&g).unwrap() <= 4);
        let (g, _) = random_pathwidth_graph(1, 12, &LengthDistribution::PowersOfTwo { max_exp: 8 }, &mut rng).unwrap();
        assert!(g.is_tree());
    }

    #[test]
    fn tree_compositions() {
        let t = psi(1, 9).unwrap();
        let seq = tree_composition(&t).unwrap();
        assert_eq!(seq.k, 2);
        assert!(composed_metric(&seq, &t).is_ok());
    }
}
