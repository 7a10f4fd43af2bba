//! Checkers for the lower bound on embedding nested spiders into trees of
//! smaller pathwidth, plus deterministic witness embeddings to feed them.
//!
//! The bound quantifies over every embedding, which is far out of reach;
//! these functions evaluate one concrete embedding at a time. A failing
//! verdict would be a counterexample and carries every quantity involved.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::RngCore;
use serde::Serialize;

use super::metric::TargetDistances;
use super::{average_edge_stretch, NonContractionChecker, check_noncontraction, serialize_big, EmbeddingSample, HarnessError};
use crate::graph::{MetricGraph, Vertex};
use crate::instances::{ceil_root_pow2, psi_truncated};
use crate::length::{Distance, Length};
use crate::pathwidth::tree_pathwidth;

/// `r` with `r^(2^k) = m`, if it exists.
fn exact_root(m: u64, k: u32) -> Option<u64> {
    let r = ceil_root_pow2(m, k);
    let mut x = r as u128;
    for _ in 0..k {
        x = x.checked_mul(x)?;
    }
    (x == m as u128).then_some(r)
}

/// `m^(1/2^k) / (2^(8+2k) · k)` for `m = (2a)^(2^k)`.
pub fn lower_bound_threshold(k: u32, m: u64) -> Result<BigRational, HarnessError> {
    let bad = HarnessError::BadDomain { k, m };
    if k == 0 || k > 6 {
        return Err(bad);
    }
    let r = exact_root(m, k).filter(|&r| r >= 2 && r % 2 == 0).ok_or(bad)?;
    let denom = (BigInt::one() << (8 + 2 * k)) * BigInt::from(k);
    Ok(BigRational::new(BigInt::from(r), denom))
}

/// `Ψ_{k,m,√m/2}`, the instance the lower bound speaks about.
pub fn witness_instance(k: u32, m: u64) -> Result<MetricGraph, HarnessError> {
    lower_bound_threshold(k, m)?;
    let half_root = exact_root(m, 1).expect("m is an even power") / 2;
    psi_truncated(k, m, Length::from_integer(half_root as i128))
        .map_err(|e| HarnessError::PreconditionFailed(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessVerdict {
    pub k: u32,
    pub m: u64,
    pub vertices: usize,
    pub edges: usize,
    pub target_pathwidth: usize,
    #[serde(serialize_with = "serialize_big")]
    pub total_distance: BigRational,
    /// `total_distance / |E|` with the exact edge count.
    #[serde(serialize_with = "serialize_big")]
    pub average: BigRational,
    /// `total_distance / (k·m)`, the edge-count estimate used in the proof.
    #[serde(serialize_with = "serialize_big")]
    pub average_km: BigRational,
    #[serde(serialize_with = "serialize_big")]
    pub threshold: BigRational,
    pub holds: bool,
}

impl fmt::Display for WitnessVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} k={} m={} |V|={} |E|={} pw(T)={} sum={} avg={} avg_km={} threshold={}",
            if self.holds { "consistent" } else { "COUNTEREXAMPLE" },
            self.k,
            self.m,
            self.vertices,
            self.edges,
            self.target_pathwidth,
            self.total_distance,
            self.average,
            self.average_km,
            self.threshold
        )
    }
}

/// Evaluates one embedding of `witness_instance(k, m)` against the threshold.
/// The target must be a tree of pathwidth at most `k` and the embedding must
/// be non-contractive; otherwise the sample is outside the statement.
pub fn verify_lower_bound_witness(k: u32, m: u64, sample: &EmbeddingSample) -> Result<WitnessVerdict, HarnessError> {
    let threshold = lower_bound_threshold(k, m)?;
    let g = witness_instance(k, m)?;
    let target_pathwidth = tree_pathwidth(&sample.target)
        .map_err(|_| HarnessError::PreconditionFailed("target is not a tree".into()))?;
    if target_pathwidth > k as usize {
        return Err(HarnessError::PreconditionFailed(format!(
            "target pathwidth {target_pathwidth} exceeds {k}"
        )));
    }
    let nc = check_noncontraction(&g, sample)?;
    if !nc.passed() {
        return Err(HarnessError::PreconditionFailed(format!(
            "embedding contracts {} pairs",
            nc.violations.len()
        )));
    }
    let avg = average_edge_stretch(&g, sample)?;
    let km = BigRational::from_integer(BigInt::from(k) * BigInt::from(m));
    Ok(WitnessVerdict {
        k,
        m,
        vertices: g.num_vertices(),
        edges: avg.edges,
        target_pathwidth,
        average_km: &avg.total_distance / km,
        holds: avg.mean_distance >= threshold,
        average: avg.mean_distance,
        total_distance: avg.total_distance,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloseToPathVerdict {
    /// `d_T(g(S_i), P)` for every subtree.
    pub distances: Vec<Distance>,
    /// Indices `i` with `d_T(g(S_i), P) < L/2`.
    pub close: Vec<usize>,
    #[serde(serialize_with = "serialize_big")]
    pub total_distance: BigRational,
    /// `|I|²·L/16`.
    #[serde(serialize_with = "serialize_big")]
    pub required: BigRational,
    pub holds: bool,
}

fn hypothesis(msg: String) -> HarnessError {
    HarnessError::HypothesisViolation(msg)
}

fn check_path_in(g: &MetricGraph, path: &[Vertex], what: &str) -> Result<(), HarnessError> {
    if path.is_empty() {
        return Err(hypothesis(format!("{what} is empty")));
    }
    let distinct: BTreeSet<_> = path.iter().collect();
    if distinct.len() != path.len() {
        return Err(hypothesis(format!("{what} repeats a vertex")));
    }
    if let Some(&v) = path.iter().find(|&&v| !g.contains(v)) {
        return Err(hypothesis(format!("{what} leaves the graph at {v}")));
    }
    if let Some(w) = path.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
        return Err(hypothesis(format!("{what} uses a non-edge {{{}, {}}}", w[0], w[1])));
    }
    Ok(())
}

/// Evaluates `Σ_{uv∈E(S)} d_T(g(u), g(v)) ≥ |I|²·L/16` for a unit tree `s`
/// with subtrees `S_i` hanging from `r` on paths `Q_i` of at least `L` edges
/// that meet only at `r`, and a simple path `P` of the target.
pub fn check_close_to_p(
    s: &MetricGraph,
    r: Vertex,
    subtrees: &[Vec<Vertex>],
    paths: &[Vec<Vertex>],
    l: Length,
    sample: &EmbeddingSample,
    p: &[Vertex],
) -> Result<CloseToPathVerdict, HarnessError> {
    if !s.is_tree() || s.edges().any(|e| e.len != Length::ONE) {
        return Err(hypothesis("S must be an unweighted tree".into()));
    }
    if l.is_negative() {
        return Err(hypothesis("L must be non-negative".into()));
    }
    if subtrees.len() != paths.len() {
        return Err(hypothesis("one attaching path per subtree is required".into()));
    }
    let mut seen = BTreeSet::new();
    for (i, st) in subtrees.iter().enumerate() {
        let set: BTreeSet<Vertex> = st.iter().copied().collect();
        if set.is_empty() || set.iter().any(|&v| !s.contains(v)) {
            return Err(hypothesis(format!("subtree {i} is empty or leaves S")));
        }
        if !s.induced_subgraph(&set).is_connected() {
            return Err(hypothesis(format!("subtree {i} is not connected")));
        }
        if set.iter().any(|v| !seen.insert(*v)) {
            return Err(hypothesis(format!("subtree {i} overlaps another subtree")));
        }
    }
    let mut interior = BTreeSet::new();
    for (i, q) in paths.iter().enumerate() {
        check_path_in(s, q, &format!("path Q_{i}"))?;
        if q[0] != r || !subtrees[i].contains(q.last().unwrap()) {
            return Err(hypothesis(format!("path Q_{i} must run from r to subtree {i}")));
        }
        if Length::from_integer(q.len() as i128 - 1) < l {
            return Err(hypothesis(format!("path Q_{i} is shorter than L")));
        }
        if q[1..].iter().any(|v| !interior.insert(*v)) {
            return Err(hypothesis(format!("path Q_{i} meets another path outside r")));
        }
    }
    check_path_in(&sample.target, p, "path P")?;
    let nc = check_noncontraction(s, sample)?;
    if !nc.passed() {
        return Err(HarnessError::PreconditionFailed("embedding is contractive".into()));
    }

    let d = TargetDistances::compute(&sample.target);
    let image = |v: Vertex| sample.target.index_of(sample.map[&v]).unwrap();
    let p_idx: Vec<usize> = p.iter().map(|&x| sample.target.index_of(x).unwrap()).collect();
    let half = l / Length::from_integer(2);
    let mut distances = Vec::with_capacity(subtrees.len());
    let mut close = Vec::new();
    for (i, st) in subtrees.iter().enumerate() {
        let best = st
            .iter()
            .flat_map(|&x| p_idx.iter().map(move |&y| (x, y)))
            .map(|(x, y)| d.get(image(x), y))
            .min()
            .unwrap();
        if best < Distance::Finite(half) {
            close.push(i);
        }
        distances.push(best);
    }
    let mut total = BigRational::zero();
    for e in s.edges() {
        total += d
            .get(image(e.u), image(e.v))
            .finite()
            .expect("non-contractive images of an edge are connected")
            .to_big();
    }
    let c = BigRational::from_integer(BigInt::from(close.len()));
    let required = &c * &c * l.to_big() / BigRational::from_integer(16.into());
    Ok(CloseToPathVerdict {
        distances,
        holds: total >= required,
        close,
        total_distance: total,
        required,
    })
}

/// Depth-first preorder from `root`, visiting neighbours by increasing id,
/// or in random order when `rng` is given.
pub fn dfs_preorder(g: &MetricGraph, root: Vertex, mut rng: Option<&mut dyn RngCore>) -> Vec<Vertex> {
    let mut order = Vec::with_capacity(g.num_vertices());
    let mut seen = BTreeSet::from([root]);
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        order.push(x);
        let mut next: Vec<Vertex> = g.neighbors(x).map(|(y, _)| y).filter(|y| !seen.contains(y)).collect();
        if let Some(r) = rng.as_deref_mut() {
            next.shuffle(r);
        }
        for &y in next.iter().rev() {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    order
}

fn chain(g: &MetricGraph, order: &[Vertex], edges: &mut Vec<(Vertex, Vertex, Length)>) -> Result<(), HarnessError> {
    let checker = NonContractionChecker::new(g);
    for w in order.windows(2) {
        let i = g.index_of(w[0]).ok_or(HarnessError::MapNotTotal(w[0]))?;
        let j = g.index_of(w[1]).ok_or(HarnessError::MapNotTotal(w[1]))?;
        let d = checker
            .source_distance(i, j)
            .finite()
            .ok_or_else(|| HarnessError::PreconditionFailed("graph is disconnected".into()))?;
        edges.push((w[0], w[1], d));
    }
    Ok(())
}

/// Lays the vertices on a path in the given order, each gap equal to the
/// source distance of its endpoints. Non-contractive by the triangle
/// inequality.
pub fn line_embedding(g: &MetricGraph, order: &[Vertex]) -> Result<EmbeddingSample, HarnessError> {
    let set: BTreeSet<Vertex> = order.iter().copied().collect();
    if set.len() != order.len() || set.len() != g.num_vertices() {
        return Err(HarnessError::PreconditionFailed("order must list every vertex once".into()));
    }
    let mut edges = Vec::new();
    chain(g, order, &mut edges)?;
    let target = MetricGraph::new(order.iter().copied(), edges).expect("path is valid");
    Ok(EmbeddingSample::identity(target))
}

/// Each branch at `root` of a tree becomes its own line hanging from the
/// root. Branches only meet at the root, so distances across branches are
/// preserved exactly and the result has pathwidth at most 2.
pub fn spider_of_lines(t: &MetricGraph, root: Vertex) -> Result<EmbeddingSample, HarnessError> {
    if !t.is_tree() || !t.contains(root) {
        return Err(HarnessError::PreconditionFailed("spider_of_lines needs a tree and its root".into()));
    }
    let removed = BTreeSet::from([root]);
    let rest = t.without_vertices(&removed);
    let mut edges = Vec::new();
    for (b, _) in t.neighbors(root) {
        let comp = rest
            .connected_components()
            .into_iter()
            .find(|c| c.contains(&b))
            .unwrap();
        let branch = rest.induced_subgraph(&comp.into_iter().collect());
        let mut order = vec![root];
        order.extend(dfs_preorder(&branch, b, None));
        chain(t, &order, &mut edges)?;
    }
    let target = MetricGraph::new(t.vertices().iter().copied(), edges).expect("spider is valid");
    Ok(EmbeddingSample::identity(target))
}

/// A caterpillar: internal vertices (and the root) on a line in preorder,
/// every other leaf hanging from its parent with its own edge length.
pub fn caterpillar_embedding(t: &MetricGraph, root: Vertex) -> Result<EmbeddingSample, HarnessError> {
    if !t.is_tree() || !t.contains(root) {
        return Err(HarnessError::PreconditionFailed("caterpillar_embedding needs a tree and its root".into()));
    }
    let order = dfs_preorder(t, root, None);
    let mut parent = BTreeMap::new();
    let mut stack = vec![root];
    let mut seen = BTreeSet::from([root]);
    while let Some(x) = stack.pop() {
        for (y, _) in t.neighbors(x) {
            if seen.insert(y) {
                parent.insert(y, x);
                stack.push(y);
            }
        }
    }
    let spine: Vec<Vertex> = order.iter().copied().filter(|&v| v == root || t.degree(v) > 1).collect();
    let mut edges = Vec::new();
    chain(t, &spine, &mut edges)?;
    for &v in &order {
        if v != root && t.degree(v) == 1 {
            let p = parent[&v];
            edges.push((p, v, t.length(p, v).unwrap()));
        }
    }
    let target = MetricGraph::new(t.vertices().iter().copied(), edges).expect("caterpillar is valid");
    Ok(EmbeddingSample::identity(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::phi;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn thresholds_by_substitution() {
        assert_eq!(lower_bound_threshold(1, 16), Ok(big(1, 256)));
        assert_eq!(lower_bound_threshold(2, 256), Ok(big(1, 2048)));
        assert_eq!(lower_bound_threshold(1, 36), Ok(big(6, 1024)));
        assert_eq!(lower_bound_threshold(1, 10), Err(HarnessError::BadDomain { k: 1, m: 10 }));
        assert!(lower_bound_threshold(1, 9).is_err());
        assert!(lower_bound_threshold(2, 81).is_err());
        assert!(lower_bound_threshold(0, 4).is_err());
        assert!(lower_bound_threshold(1, 1).is_err());
    }

    #[test]
    fn witness_instances() {
        assert_eq!(witness_instance(1, 16).unwrap().num_vertices(), 9);
        assert_eq!(witness_instance(1, 36).unwrap().num_vertices(), 19);
        assert_eq!(witness_instance(2, 256).unwrap().num_vertices(), 257);
    }

    #[test]
    fn hand_built_witnesses_are_consistent() {
        let g = witness_instance(1, 16).unwrap();
        for s in [
            caterpillar_embedding(&g, 0).unwrap(),
            line_embedding(&g, &dfs_preorder(&g, 0, None)).unwrap(),
        ] {
            let v = verify_lower_bound_witness(1, 16, &s).unwrap();
            assert!(v.holds, "{v}");
            assert!(v.average >= BigRational::one());
        }
        let g = witness_instance(2, 256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for s in [
            spider_of_lines(&g, 0).unwrap(),
            caterpillar_embedding(&g, 0).unwrap(),
            line_embedding(&g, &dfs_preorder(&g, 0, Some(&mut rng))).unwrap(),
        ] {
            assert!(verify_lower_bound_witness(2, 256, &s).unwrap().holds);
        }
    }

    #[test]
    fn out_of_domain_samples() {
        let g = witness_instance(1, 36).unwrap();
        assert!(matches!(
            verify_lower_bound_witness(1, 36, &EmbeddingSample::identity(g.clone())),
            Err(HarnessError::PreconditionFailed(_))
        ));
        assert!(matches!(
            verify_lower_bound_witness(1, 36, &spider_of_lines(&g, 0).unwrap()),
            Err(HarnessError::PreconditionFailed(_))
        ));
        let g = witness_instance(1, 16).unwrap();
        let squashed = MetricGraph::unit(9, (0..8).map(|i| (i, i + 1))).unwrap();
        let map = g.vertices().iter().map(|&v| (v, v)).collect();
        assert!(verify_lower_bound_witness(1, 16, &EmbeddingSample::new(squashed, map).unwrap()).is_err());
        let id = EmbeddingSample::identity(witness_instance(2, 256).unwrap());
        assert!(matches!(verify_lower_bound_witness(2, 256, &id), Err(HarnessError::PreconditionFailed(_))));
    }

    #[test]
    fn witnesses_are_non_contractive() {
        let g = phi(4).unwrap();
        for s in [
            spider_of_lines(&g, 0).unwrap(),
            caterpillar_embedding(&g, 0).unwrap(),
            line_embedding(&g, &dfs_preorder(&g, 0, None)).unwrap(),
        ] {
            assert!(check_noncontraction(&g, &s).unwrap().passed());
            assert!(s.target.is_tree());
        }
        assert_eq!(tree_pathwidth(&caterpillar_embedding(&g, 0).unwrap().target), Ok(1));
        assert_eq!(tree_pathwidth(&spider_of_lines(&g, 0).unwrap().target), Ok(2));
    }

    fn arms() -> (MetricGraph, Vec<Vec<Vertex>>, Vec<Vec<Vertex>>) {
        let s = phi(4).unwrap();
        let subtrees = (0..4).map(|i| vec![4 * i + 4]).collect();
        let paths = (0..4).map(|i| vec![0, 4 * i + 1, 4 * i + 2, 4 * i + 3, 4 * i + 4]).collect();
        (s, subtrees, paths)
    }

    #[test]
    fn arms_pulled_onto_the_path() {
        let (s, subtrees, paths) = arms();
        let order = dfs_preorder(&s, 0, None);
        let sample = line_embedding(&s, &order).unwrap();
        let four = Length::from_integer(4);
        let v = check_close_to_p(&s, 0, &subtrees, &paths, four, &sample, &order).unwrap();
        assert_eq!(v.close, vec![0, 1, 2, 3]);
        assert_eq!(v.required, BigRational::from_integer(4.into()));
        let direct: Length = s
            .edges()
            .map(|e| {
                let (a, b) = (order.iter().position(|&x| x == e.u).unwrap(), order.iter().position(|&x| x == e.v).unwrap());
                order[a.min(b)..=a.max(b)].windows(2).map(|w| sample.target.length(w[0], w[1]).unwrap()).sum::<Length>()
            })
            .sum();
        assert_eq!(v.total_distance, direct.to_big());
        assert!(v.holds);
    }

    #[test]
    fn far_subtrees_give_an_empty_index_set() {
        let (s, subtrees, paths) = arms();
        let sample = EmbeddingSample::identity(s.clone());
        let v = check_close_to_p(&s, 0, &subtrees, &paths, Length::from_integer(4), &sample, &[0]).unwrap();
        assert!(v.close.is_empty());
        assert!(v.required.is_zero());
        assert!(v.holds);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let (s, subtrees, paths) = arms();
        let sample = EmbeddingSample::identity(s.clone());
        let four = Length::from_integer(4);
        let short = check_close_to_p(&s, 0, &subtrees, &paths, Length::from_integer(5), &sample, &[0]);
        assert!(matches!(short, Err(HarnessError::HypothesisViolation(_))));
        let shared = vec![paths[0].clone(), paths[0].clone()];
        let two = vec![subtrees[0].clone(), subtrees[0].clone()];
        assert!(check_close_to_p(&s, 0, &two, &shared, four, &sample, &[0]).is_err());
        let bad_p = check_close_to_p(&s, 0, &subtrees, &paths, four, &sample, &[0, 2]);
        assert!(matches!(bad_p, Err(HarnessError::HypothesisViolation(_))));
    }
}
