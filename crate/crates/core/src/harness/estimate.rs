//! Monte Carlo estimation of expected stretch.
//!
//! Sample `i` draws from its own ChaCha stream `(seed, i)`, and samples are
//! accumulated in fixed blocks that are merged in block order. The thread
//! count therefore never changes a report, down to the last bit.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metric::NonContractionChecker;
use super::{EmbeddingSample, HarnessError};
use crate::embed_pw2::{embed_pathwidth2_with_tau, TAU_PW2};
use crate::graph::{MetricGraph, Vertex};
use crate::length::{Distance, Length};
use crate::pathwidth::{composed_metric, LinearCompositionSequence};
use crate::pwk::{embed_pathwidthk_with, PwkConfig};

/// Samples per accumulation block. Part of the report format: changing it
/// may change the last bits of floating-point statistics.
pub const DEFAULT_BLOCK: usize = 64;

/// Acceptance tolerance, in standard errors.
pub const TOLERANCE_SIGMA: f64 = 3.0;

/// A randomized embedding of a fixed source graph.
pub trait Embedder: Sync {
    fn name(&self) -> &'static str;
    /// Parameters recorded in the report.
    fn parameters(&self) -> BTreeMap<String, String>;
    /// Extra instance data hashed into the report, such as the composition
    /// sequence.
    fn instance_text(&self) -> String;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<EmbeddingSample, HarnessError>;
    /// A proven upper bound on every expected edge stretch, when one applies.
    fn stretch_bound(&self) -> Option<BigRational>;
}

/// Returns `F` as the identity and `T = G`.
#[derive(Debug, Clone)]
pub struct IdentityEmbedder {
    pub graph: MetricGraph,
}

impl Embedder for IdentityEmbedder {
    fn name(&self) -> &'static str {
        "identity"
    }
    fn parameters(&self) -> BTreeMap<String, String> {
        BTreeMap::new()
    }
    fn instance_text(&self) -> String {
        String::new()
    }
    fn sample(&self, _: &mut ChaCha8Rng) -> Result<EmbeddingSample, HarnessError> {
        Ok(EmbeddingSample::identity(self.graph.clone()))
    }
    fn stretch_bound(&self) -> Option<BigRational> {
        Some(BigRational::from_integer(1.into()))
    }
}

fn composed(g: &MetricGraph, seq: &LinearCompositionSequence) -> Result<MetricGraph, HarnessError> {
    composed_metric(seq, g).map_err(|e| HarnessError::Embedding(e.to_string()))
}

/// `9τ` for the warm-up algorithm with its default `τ = 12`.
pub fn pw2_stretch_bound() -> BigRational {
    BigRational::from_integer((9 * TAU_PW2).into())
}

/// `((4k)^k)^(C(k+1,2)+1) · (k+1)`.
pub fn pwk_stretch_bound(k: usize) -> BigRational {
    let c = k * (k + 1) / 2;
    let base = num_traits::pow(BigInt::from(4 * k), k);
    BigRational::from_integer(num_traits::pow(base, c + 1) * BigInt::from(k + 1))
}

/// The pathwidth-2 warm-up sampler.
#[derive(Debug, Clone)]
pub struct Pw2Embedder {
    seq: LinearCompositionSequence,
    lengths: MetricGraph,
    tau: Length,
}

impl Pw2Embedder {
    pub fn new(g: &MetricGraph, seq: LinearCompositionSequence, tau: Option<Length>) -> Result<Self, HarnessError> {
        let lengths = composed(g, &seq)?;
        let tau = tau.unwrap_or(Length::from_integer(TAU_PW2));
        Ok(Pw2Embedder { seq, lengths, tau })
    }
}

impl Embedder for Pw2Embedder {
    fn name(&self) -> &'static str {
        "pathwidth2"
    }
    fn parameters(&self) -> BTreeMap<String, String> {
        BTreeMap::from([("k".into(), "2".into()), ("tau".into(), self.tau.to_string())])
    }
    fn instance_text(&self) -> String {
        self.seq.to_json_string()
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<EmbeddingSample, HarnessError> {
        embed_pathwidth2_with_tau(&self.seq, &self.lengths, self.tau, rng)
            .map(EmbeddingSample::identity)
            .map_err(|e| HarnessError::Embedding(e.to_string()))
    }
    fn stretch_bound(&self) -> Option<BigRational> {
        (self.tau == Length::from_integer(TAU_PW2)).then(pw2_stretch_bound)
    }
}

/// The general pathwidth-k sampler.
#[derive(Debug, Clone)]
pub struct PwkEmbedder {
    seq: LinearCompositionSequence,
    lengths: MetricGraph,
    config: PwkConfig,
}

impl PwkEmbedder {
    pub fn new(g: &MetricGraph, seq: LinearCompositionSequence, config: PwkConfig) -> Result<Self, HarnessError> {
        let lengths = composed(g, &seq)?;
        Ok(PwkEmbedder { seq, lengths, config })
    }

    pub fn k(&self) -> usize {
        self.seq.k
    }
}

impl Embedder for PwkEmbedder {
    fn name(&self) -> &'static str {
        "pathwidthk"
    }
    fn parameters(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("k".into(), self.seq.k.to_string()),
            ("tau".into(), self.config.tau_for(self.seq.k).to_string()),
        ])
    }
    fn instance_text(&self) -> String {
        self.seq.to_json_string()
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<EmbeddingSample, HarnessError> {
        embed_pathwidthk_with(&self.seq, &self.lengths, &self.config, rng)
            .map(EmbeddingSample::identity)
            .map_err(|e| HarnessError::Embedding(e.to_string()))
    }
    fn stretch_bound(&self) -> Option<BigRational> {
        let k = self.seq.k;
        (self.config.tau_for(k) == Length::from_integer(4 * k as i128)).then(|| pwk_stretch_bound(k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStretch {
    pub u: Vertex,
    pub v: Vertex,
    pub length: Length,
    pub mean_distance: f64,
    pub mean_stretch: f64,
    pub stderr: f64,
    pub max_stretch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroDistancePair {
    pub u: Vertex,
    pub v: Vertex,
    pub mean_distance: f64,
    pub max_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleViolation {
    pub sample: usize,
    pub u: Vertex,
    pub v: Vertex,
    pub d_g: String,
    pub d_t: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonContractionSummary {
    pub samples_checked: usize,
    pub violating_samples: usize,
    /// The first few violations, in sample order.
    pub examples: Vec<SampleViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchReport {
    pub instance_hash: String,
    pub embedder: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub samples: usize,
    pub tolerance_sigma: f64,
    /// Max over positive-length edges of the mean stretch. Because every
    /// sample is a metric on the same vertices, the largest expected pair
    /// stretch is always attained on an edge of a reduced graph.
    pub max_mean_stretch: f64,
    pub max_mean_stretch_stderr: f64,
    pub argmax_edge: Option<(Vertex, Vertex)>,
    pub bound: Option<String>,
    pub edges: Vec<EdgeStretch>,
    /// Pairs at distance 0 in `G`; their image distance is reported, not
    /// bounded.
    pub zero_distance_pairs: Vec<ZeroDistancePair>,
    pub noncontraction: NonContractionSummary,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

impl StretchReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// SHA-256 over the graph JSON and the embedder's instance text.
pub fn instance_hash(g: &MetricGraph, extra: &str) -> String {
    let mut h = Sha256::new();
    h.update(g.to_json_string().as_bytes());
    h.update(b"\n");
    h.update(extra.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Running count, sum and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    sum: f64,
    m2: f64,
    max: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        let before = if self.n == 0.0 { x } else { self.sum / self.n };
        self.n += 1.0;
        self.sum += x;
        self.m2 += (x - before) * (x - self.sum / self.n);
        self.max = if self.n == 1.0 { x } else { self.max.max(x) };
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *o;
            return;
        }
        let delta = o.sum / o.n - self.sum / self.n;
        let n = self.n + o.n;
        self.m2 += o.m2 + delta * delta * self.n * o.n / n;
        self.sum += o.sum;
        self.n = n;
        self.max = self.max.max(o.max);
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.n - 1.0) / self.n).sqrt()
    }
}

const MAX_EXAMPLES: usize = 10;

#[derive(Debug, Clone, Default)]
struct Block {
    edges: Vec<Moments>,
    zero: Vec<Moments>,
    violating: usize,
    examples: Vec<SampleViolation>,
}

struct Plan<'a> {
    checker: NonContractionChecker<'a>,
    /// `(u index, v index, length)` of positive-length edges.
    edges: Vec<(usize, usize, Length)>,
    zero_pairs: Vec<(usize, usize)>,
}

impl Plan<'_> {
    fn run_block(&self, embedder: &dyn Embedder, seed: u64, range: std::ops::Range<usize>) -> Result<Block, HarnessError> {
        let mut b = Block {
            edges: vec![Moments::default(); self.edges.len()],
            zero: vec![Moments::default(); self.zero_pairs.len()],
            ..Block::default()
        };
        for s in range {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let sample = embedder.sample(&mut rng)?;
            let (report, d, image) = self.checker.measure(&sample)?;
            if !report.passed() {
                b.violating += 1;
                for v in report.violations.iter().take(MAX_EXAMPLES) {
                    b.examples.push(SampleViolation {
                        sample: s,
                        u: v.u,
                        v: v.v,
                        d_g: v.d_g.to_string(),
                        d_t: v.d_t.to_string(),
                    });
                }
                b.examples.truncate(MAX_EXAMPLES);
            }
            for (m, &(i, j, len)) in b.edges.iter_mut().zip(&self.edges) {
                m.push(d.ratio_f64(image[i], image[j], len));
            }
            for (m, &(i, j)) in b.zero.iter_mut().zip(&self.zero_pairs) {
                m.push(d.to_f64(image[i], image[j]));
            }
        }
        Ok(b)
    }
}

/// Estimates expected edge stretch from `num_samples` samples, checking
/// every sample for contraction exactly.
pub fn estimate_distortion(
    g: &MetricGraph,
    embedder: &dyn Embedder,
    num_samples: usize,
    seed: u64,
) -> Result<StretchReport, HarnessError> {
    if num_samples == 0 {
        return Err(HarnessError::ZeroSamples);
    }
    let checker = NonContractionChecker::new(g);
    let edges: Vec<_> = g
        .edges()
        .filter(|e| !e.len.is_zero())
        .map(|e| (g.index_of(e.u).unwrap(), g.index_of(e.v).unwrap(), e.len))
        .collect();
    let n = g.num_vertices();
    let zero_pairs: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| checker.source_distance(i, j) == Distance::Finite(Length::ZERO))
        .collect();
    let plan = Plan { checker, edges, zero_pairs };

    let blocks: Vec<Block> = (0..num_samples.div_ceil(DEFAULT_BLOCK))
        .into_par_iter()
        .map(|b| {
            let end = ((b + 1) * DEFAULT_BLOCK).min(num_samples);
            plan.run_block(embedder, seed, b * DEFAULT_BLOCK..end)
        })
        .collect::<Result<_, _>>()?;

    let mut total = Block {
        edges: vec![Moments::default(); plan.edges.len()],
        zero: vec![Moments::default(); plan.zero_pairs.len()],
        ..Block::default()
    };
    for b in &blocks {
        for (t, m) in total.edges.iter_mut().zip(&b.edges) {
            t.merge(m);
        }
        for (t, m) in total.zero.iter_mut().zip(&b.zero) {
            t.merge(m);
        }
        total.violating += b.violating;
        for e in &b.examples {
            if total.examples.len() < MAX_EXAMPLES {
                total.examples.push(e.clone());
            }
        }
    }

    let edge_rows: Vec<EdgeStretch> = plan
        .edges
        .iter()
        .zip(&total.edges)
        .map(|(&(i, j, len), m)| EdgeStretch {
            u: g.vertex_at(i),
            v: g.vertex_at(j),
            length: len,
            mean_distance: m.mean() * len.to_f64(),
            mean_stretch: m.mean(),
            stderr: m.stderr(),
            max_stretch: m.max,
        })
        .collect();
    let best = edge_rows
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (i, e)| match acc {
            Some((_, s)) if s >= e.mean_stretch => acc,
            _ => Some((i, e.mean_stretch)),
        });
    let (max_mean_stretch, max_mean_stretch_stderr, argmax_edge) = match best {
        Some((i, s)) => (s, edge_rows[i].stderr, Some((edge_rows[i].u, edge_rows[i].v))),
        None => (1.0, 0.0, None),
    };

    let bound = embedder.stretch_bound();
    let mut verdicts = vec![Verdict {
        name: "noncontraction".into(),
        pass: total.violating == 0,
        detail: format!("{} of {} samples contract some pair", total.violating, num_samples),
    }];
    if let Some(b) = &bound {
        let limit = num_traits::ToPrimitive::to_f64(b).unwrap_or(f64::INFINITY);
        verdicts.push(Verdict {
            name: "stretch_bound".into(),
            pass: max_mean_stretch <= limit,
            detail: format!("max mean edge stretch {max_mean_stretch} against bound {b}"),
        });
    }
    let pass = verdicts.iter().all(|v| v.pass);
    Ok(StretchReport {
        instance_hash: instance_hash(g, &embedder.instance_text()),
        embedder: embedder.name().into(),
        parameters: embedder.parameters(),
        seed,
        samples: num_samples,
        tolerance_sigma: TOLERANCE_SIGMA,
        max_mean_stretch,
        max_mean_stretch_stderr,
        argmax_edge,
        bound: bound.map(|b| b.to_string()),
        edges: edge_rows,
        zero_distance_pairs: plan
            .zero_pairs
            .iter()
            .zip(&total.zero)
            .map(|(&(i, j), m)| ZeroDistancePair {
                u: g.vertex_at(i),
                v: g.vertex_at(j),
                mean_distance: m.mean(),
                max_distance: m.max,
            })
            .collect(),
        noncontraction: NonContractionSummary {
            samples_checked: num_samples,
            violating_samples: total.violating,
            examples: total.examples,
        },
        verdicts,
        pass,
    })
}

/// [`estimate_distortion`] on a dedicated pool of `threads` workers.
pub fn estimate_distortion_with(
    g: &MetricGraph,
    embedder: &dyn Embedder,
    num_samples: usize,
    seed: u64,
    threads: usize,
) -> Result<StretchReport, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Embedding(e.to_string()))?;
    pool.install(|| estimate_distortion(g, embedder, num_samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed_pw2::enumerate_pw2_distribution;
    use crate::instances::cycle;
    use crate::pwk::enumerate_pwk_distribution;
    use num_traits::ToPrimitive;

    #[test]
    fn identity_on_a_tree() {
        let t = MetricGraph::unit(4, [(0, 1), (1, 2), (1, 3)]).unwrap();
        let r = estimate_distortion(&t, &IdentityEmbedder { graph: t.clone() }, 100, 1).unwrap();
        assert_eq!(r.max_mean_stretch, 1.0);
        assert!(r.edges.iter().all(|e| e.stderr == 0.0));
        assert!(r.pass);
    }

    #[test]
    fn zero_samples() {
        let t = MetricGraph::unit(2, [(0, 1)]).unwrap();
        assert!(matches!(
            estimate_distortion(&t, &IdentityEmbedder { graph: t.clone() }, 0, 1),
            Err(HarnessError::ZeroSamples)
        ));
    }

    #[test]
    fn triangle_converges_to_three_halves() {
        let (g, _) = cycle(3).unwrap();
        let seq = LinearCompositionSequence::new(2, [0, 1], [(2, vec![0, 1])]).unwrap();
        let e = Pw2Embedder::new(&g, seq.clone(), None).unwrap();
        let r = estimate_distortion(&g, &e, 20_000, 3).unwrap();
        let exact = enumerate_pw2_distribution(&seq, &g).unwrap();
        for row in &r.edges {
            let want = exact.expected_distance(row.u, row.v).to_f64().unwrap();
            assert!((row.mean_stretch - want).abs() <= TOLERANCE_SIGMA * row.stderr + 1e-12, "{row:?}");
        }
        assert!((r.max_mean_stretch - 1.5).abs() < 0.05);
        let moved = Pw2Embedder::new(&g, cycle(3).unwrap().1, None).unwrap();
        assert_eq!(estimate_distortion(&g, &moved, 100, 3).unwrap().max_mean_stretch, 2.0);
    }

    #[test]
    fn four_cycle_matches_enumeration() {
        let (g, seq) = cycle(4).unwrap();
        let e = PwkEmbedder::new(&g, seq.clone(), PwkConfig::default()).unwrap();
        let r = estimate_distortion(&g, &e, 20_000, 5).unwrap();
        let exact = enumerate_pwk_distribution(&seq, &composed_metric(&seq, &g).unwrap()).unwrap();
        let stretches = exact.expected_edge_stretches(&g);
        let d_max = stretches.iter().map(|(_, s)| s.to_f64().unwrap()).fold(0.0, f64::max);
        assert!((r.max_mean_stretch - d_max).abs() <= TOLERANCE_SIGMA * r.max_mean_stretch_stderr + 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn reports_are_reproducible_across_thread_counts() {
        let (g, seq) = cycle(7).unwrap();
        let e = PwkEmbedder::new(&g, seq, PwkConfig::default()).unwrap();
        let a = estimate_distortion_with(&g, &e, 500, 9, 1).unwrap().to_json_pretty();
        let b = estimate_distortion_with(&g, &e, 500, 9, 4).unwrap().to_json_pretty();
        assert_eq!(a, b);
        let c = estimate_distortion_with(&g, &e, 500, 10, 1).unwrap().to_json_pretty();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_length_pairs_are_reported_separately() {
        let g = MetricGraph::new(0..3, [(0, 1, Length::ZERO), (1, 2, Length::ONE)]).unwrap();
        let r = estimate_distortion(&g, &IdentityEmbedder { graph: g.clone() }, 3, 0).unwrap();
        assert_eq!(r.edges.len(), 1);
        assert_eq!(r.zero_distance_pairs.len(), 1);
        assert_eq!(r.zero_distance_pairs[0].mean_distance, 0.0);
    }

    #[test]
    fn bounds() {
        assert_eq!(pw2_stretch_bound(), BigRational::from_integer(108.into()));
        assert_eq!(pwk_stretch_bound(1), BigRational::from_integer(32.into()));
        assert_eq!(pwk_stretch_bound(2), BigRational::from_integer((64i64.pow(4) * 3).into()));
    }

    #[test]
    fn moments() {
        let mut a = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            a.push(x);
        }
        assert_eq!(a.mean(), 2.5);
        assert!((a.m2 - 5.0).abs() < 1e-12);
        let (mut b, mut c) = (Moments::default(), Moments::default());
        b.push(1.0);
        b.push(2.0);
        c.push(3.0);
        c.push(4.0);
        b.merge(&c);
        assert_eq!(b.mean(), 2.5);
        assert!((b.m2 - 5.0).abs() < 1e-12);
        assert_eq!(b.max, 4.0);
    }
}
