//! The regression corpus shared by the integration tests.

#![allow(dead_code)]

use pathwidth_embed::graph::MetricGraph;
use pathwidth_embed::harness::witness_instance;
use pathwidth_embed::instances::{cycle, psi, random_pathwidth_graph, tree_composition, LengthDistribution};
use pathwidth_embed::pathwidth::LinearCompositionSequence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub name: String,
    pub g: MetricGraph,
    pub seq: LinearCompositionSequence,
}

impl Instance {
    pub fn k(&self) -> usize {
        self.seq.k
    }
}

pub fn cycles() -> Vec<Instance> {
    (3..=12)
        .map(|n| {
            let (g, seq) = cycle(n).unwrap();
            Instance { name: format!("cycle-{n}"), g, seq }
        })
        .collect()
}

pub fn random_instance(k: usize, n: usize, lengths: LengthDistribution, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g, seq) = random_pathwidth_graph(k, n, &lengths, &mut rng).unwrap();
    Instance { name: format!("random-k{k}-n{n}-s{seed}"), g, seq }
}

pub fn random_corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    for k in [2, 3, 4] {
        for (n, lengths) in [
            (12, LengthDistribution::Unit),
            (25, LengthDistribution::UniformInt { lo: 1, hi: 20 }),
            (40, LengthDistribution::PowersOfTwo { max_exp: 10 }),
        ] {
            out.push(random_instance(k, n, lengths, (100 * k + n) as u64));
        }
    }
    out
}

fn tree_instance(name: &str, g: MetricGraph) -> Instance {
    let seq = tree_composition(&g).unwrap();
    Instance { name: name.into(), g, seq }
}

pub fn psi_corpus() -> Vec<Instance> {
    vec![
        tree_instance("psi-1-9", psi(1, 9).unwrap()),
        tree_instance("psi-1-16", psi(1, 16).unwrap()),
        tree_instance("psi-1-36-3", witness_instance(1, 36).unwrap()),
        tree_instance("psi-2-81", psi(2, 81).unwrap()),
    ]
}

/// Cycles, random bounded-pathwidth graphs and nested spiders.
pub fn corpus() -> Vec<Instance> {
    let mut all = cycles();
    all.extend(random_corpus());
    all.extend(psi_corpus());
    all
}

/// Small width-2 instances whose warm-up distribution is enumerable.
pub fn small_pw2() -> Vec<Instance> {
    let mut out = cycles();
    let dists = [
        LengthDistribution::Unit,
        LengthDistribution::UniformInt { lo: 1, hi: 9 },
        LengthDistribution::PowersOfTwo { max_exp: 12 },
    ];
    for seed in 0..45u64 {
        let n = 3 + (seed % 12) as usize;
        out.push(random_instance(2, n, dists[(seed % 3) as usize].clone(), 5000 + seed));
    }
    out.push(tree_instance("psi-1-9", psi(1, 9).unwrap()));
    out
}

/// Small instances of width 2 and 3 for exact enumeration of the general
/// algorithm.
pub fn small_pwk() -> Vec<Instance> {
    let mut out: Vec<Instance> = cycles().into_iter().filter(|c| c.g.num_vertices() <= 9).collect();
    for seed in 0..12u64 {
        let k = 2 + (seed % 2) as usize;
        let n = k + 2 + (seed % 5) as usize;
        let lengths = if seed % 3 == 0 {
            LengthDistribution::Unit
        } else {
            LengthDistribution::UniformInt { lo: 1, hi: 12 }
        };
        out.push(random_instance(k, n, lengths, 7000 + seed));
    }
    out
}

/// Uniform random labelled tree on `0..n` from a random Prüfer sequence.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> MetricGraph {
    use rand::Rng;
    if n <= 1 {
        return MetricGraph::unit(n as u64, []).unwrap();
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf as u64, c as u64));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0] as u64, rest[1] as u64));
    MetricGraph::unit(n as u64, edges).unwrap()
}

/// Every tree on `0..n` in which each vertex `i > 0` has a parent below `i`.
/// Every unlabelled tree on `n` vertices occurs among them.
pub fn recursive_trees(n: usize) -> Vec<MetricGraph> {
    fn go(n: usize, parents: &mut Vec<u64>, out: &mut Vec<MetricGraph>) {
        let i = parents.len() + 1;
        if i == n {
            let edges = parents.iter().enumerate().map(|(j, &p)| (p, j as u64 + 1));
            out.push(MetricGraph::unit(n as u64, edges).unwrap());
            return;
        }
        for p in 0..i as u64 {
            parents.push(p);
            go(n, parents, out);
            parents.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 1 {
        go(n, &mut Vec::new(), &mut out);
    }
    out
}

/// Full ternary tree of the given depth, with unit edges.
pub fn ternary_tree(depth: u32) -> MetricGraph {
    let mut edges = Vec::new();
    let mut frontier = vec![0u64];
    let mut next = 1u64;
    for _ in 0..depth {
        let mut grown = Vec::new();
        for &v in &frontier {
            for _ in 0..3 {
                edges.push((v, next));
                grown.push(next);
                next += 1;
            }
        }
        frontier = grown;
    }
    MetricGraph::unit(next, edges).unwrap()
}
