//! Target distances for the non-contraction check.
//!
//! Exact rational Dijkstra per sample is the bottleneck of a large sampling
//! run, so lengths are first scaled by the least common multiple of their
//! denominators. Distances then become `i128` integers and a tree needs only
//! one breadth-first pass per source. Any overflow falls back to exact
//! rational arithmetic, so the verdict never depends on the fast path.

use std::collections::VecDeque;

use num_integer::Integer;

use super::{EmbeddingSample, HarnessError, NonContractionReport, Violation};
use crate::graph::{DistanceMatrix, MetricGraph};
use crate::length::{Distance, Length};

const INF: i128 = i128::MAX;

/// All-pairs distances of a target graph, by target index.
#[derive(Debug, Clone)]
pub enum TargetDistances {
    /// `dist[i·n + j] · 1/scale`, with `i128::MAX` for infinity.
    Scaled { scale: i128, n: usize, dist: Vec<i128> },
    Exact(DistanceMatrix),
}

fn lcm_of_denominators(mut lengths: impl Iterator<Item = Length>) -> Option<i128> {
    lengths.try_fold(1i128, |acc, l| {
        let d = l.denom();
        (acc / acc.gcd(&d)).checked_mul(d)
    })
}

fn scaled_lengths(t: &MetricGraph, scale: i128) -> Option<Vec<Vec<(usize, i128)>>> {
    (0..t.num_vertices())
        .map(|i| {
            t.adjacency(i)
                .iter()
                .map(|&(j, l)| l.numer().checked_mul(scale / l.denom()).map(|x| (j, x)))
                .collect()
        })
        .collect()
}

fn is_forest(t: &MetricGraph) -> bool {
    t.num_edges() + t.connected_components().len() == t.num_vertices()
}

impl TargetDistances {
    pub fn compute(t: &MetricGraph) -> Self {
        Self::compute_with_scale(t, None)
    }

    /// Uses a scale that is a multiple of `hint` when possible, so that
    /// scaled source distances compare without rescaling.
    fn compute_with_scale(t: &MetricGraph, hint: Option<i128>) -> Self {
        if is_forest(t) {
            if let Some(d) = Self::scaled_forest(t, hint) {
                return d;
            }
            return TargetDistances::Exact(DistanceMatrix::of_forest(t));
        }
        TargetDistances::Exact(t.shortest_path_metric())
    }

    fn scaled_forest(t: &MetricGraph, hint: Option<i128>) -> Option<Self> {
        let base = lcm_of_denominators(t.edges().map(|e| e.len))?;
        let scale = match hint {
            Some(h) => (h / h.gcd(&base)).checked_mul(base)?,
            None => base,
        };
        let adj = scaled_lengths(t, scale)?;
        let n = t.num_vertices();
        let mut dist = vec![INF; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = 0;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                let dx = row[x];
                for &(y, len) in &adj[x] {
                    if row[y] == INF {
                        row[y] = dx.checked_add(len).filter(|&d| d != INF)?;
                        queue.push_back(y);
                    }
                }
            }
        }
        Some(TargetDistances::Scaled { scale, n, dist })
    }

    pub fn get(&self, i: usize, j: usize) -> Distance {
        match self {
            TargetDistances::Scaled { scale, n, dist } => match dist[i * n + j] {
                INF => Distance::Infinite,
                d => Distance::Finite(Length::new(d, *scale)),
            },
            TargetDistances::Exact(m) => m.by_index(i, j),
        }
    }

    /// `d(i, j) / len` as a float, for statistics only.
    pub fn ratio_f64(&self, i: usize, j: usize, len: Length) -> f64 {
        match self {
            TargetDistances::Scaled { scale, n, dist } => match dist[i * n + j] {
                INF => f64::INFINITY,
                d => match (d.checked_mul(len.denom()), scale.checked_mul(len.numer())) {
                    (Some(a), Some(b)) => a as f64 / b as f64,
                    _ => (Length::new(d, *scale) / len).to_f64(),
                },
            },
            TargetDistances::Exact(m) => match m.by_index(i, j) {
                Distance::Finite(d) => (d / len).to_f64(),
                Distance::Infinite => f64::INFINITY,
            },
        }
    }

    pub fn to_f64(&self, i: usize, j: usize) -> f64 {
        match self {
            TargetDistances::Scaled { scale, n, dist } => match dist[i * n + j] {
                INF => f64::INFINITY,
                d => d as f64 / *scale as f64,
            },
            TargetDistances::Exact(m) => match m.by_index(i, j) {
                Distance::Finite(d) => d.to_f64(),
                Distance::Infinite => f64::INFINITY,
            },
        }
    }
}

/// Holds the source metric so that many samples of the same graph are
/// checked without recomputing it.
#[derive(Debug, Clone)]
pub struct NonContractionChecker<'a> {
    g: &'a MetricGraph,
    source: TargetDistances,
}

impl TargetDistances {
    /// Integer form of an exact matrix, when the scale fits.
    fn scale_exact(exact: DistanceMatrix, lengths: impl Iterator<Item = Length>) -> Self {
        let n = exact.len();
        let scaled = lcm_of_denominators(lengths).and_then(|scale| {
            let mut dist = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    dist.push(match exact.by_index(i, j) {
                        Distance::Infinite => INF,
                        Distance::Finite(d) => d.numer().checked_mul(scale / d.denom()).filter(|&x| x != INF)?,
                    });
                }
            }
            Some((scale, dist))
        });
        match scaled {
            Some((scale, dist)) => TargetDistances::Scaled { scale, n, dist },
            None => TargetDistances::Exact(exact),
        }
    }
}

impl<'a> NonContractionChecker<'a> {
    pub fn new(g: &'a MetricGraph) -> Self {
        let source = if is_forest(g) {
            TargetDistances::compute(g)
        } else {
            TargetDistances::scale_exact(g.shortest_path_metric(), g.edges().map(|e| e.len))
        };
        NonContractionChecker { g, source }
    }

    pub fn graph(&self) -> &MetricGraph {
        self.g
    }

    pub fn source_distance(&self, i: usize, j: usize) -> Distance {
        self.source.get(i, j)
    }

    pub fn check(&self, sample: &EmbeddingSample) -> Result<NonContractionReport, HarnessError> {
        self.measure(sample).map(|(r, _, _)| r)
    }

    /// Checks the sample and returns the target distances and source-to-target
    /// index map used, so callers can reuse them.
    pub fn measure(
        &self,
        sample: &EmbeddingSample,
    ) -> Result<(NonContractionReport, TargetDistances, Vec<usize>), HarnessError> {
        let image = sample.image_indices(self.g)?;
        let hint = match &self.source {
            TargetDistances::Scaled { scale, .. } => Some(*scale),
            TargetDistances::Exact(_) => None,
        };
        let target = TargetDistances::compute_with_scale(&sample.target, hint);
        let n = self.g.num_vertices();
        let mut violations = Vec::new();
        let mut report = |i: usize, j: usize, d_t: Distance| {
            violations.push(Violation {
                u: self.g.vertex_at(i),
                v: self.g.vertex_at(j),
                d_g: self.source.get(i, j),
                d_t,
            });
        };
        match (&target, &self.source) {
            (TargetDistances::Scaled { scale, n: tn, dist }, TargetDistances::Scaled { scale: gs, dist: gd, .. })
                if scale % gs == 0 =>
            {
                let factor = scale / gs;
                for i in 0..n {
                    for j in i + 1..n {
                        let dt = dist[image[i] * tn + image[j]];
                        let dg = gd[i * n + j];
                        let contracted = if dt == INF {
                            false
                        } else if dg == INF {
                            true
                        } else {
                            match dg.checked_mul(factor) {
                                Some(dg) => dt < dg,
                                None => Length::new(dt, *scale) < Length::new(dg, *gs),
                            }
                        };
                        if contracted {
                            report(i, j, target.get(image[i], image[j]));
                        }
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in i + 1..n {
                        let dt = target.get(image[i], image[j]);
                        if dt < self.source.get(i, j) {
                            report(i, j, dt);
                        }
                    }
                }
            }
        }
        let pairs_checked = n * n.saturating_sub(1) / 2;
        Ok((NonContractionReport { pairs_checked, violations }, target, image))
    }
}
