use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pathwidth_embed::graph::MetricGraph;
use pathwidth_embed::harness::{estimate_distortion, estimate_distortion_with, Embedder, Pw2Embedder, PwkEmbedder};
use pathwidth_embed::instances::{
    cycle, phi, psi, psi_truncated, random_pathwidth_graph, tree_composition, LengthDistribution,
};
use pathwidth_embed::length::Length;
use pathwidth_embed::pathwidth::{
    decomposition_to_composition, exact_path_decomposition, exact_pathwidth_with_limit, peel_path,
    tree_pathwidth, validate_path_decomposition, LinearCompositionSequence, PathDecomposition,
    DEFAULT_ORACLE_LIMIT,
};
use pathwidth_embed::pwk::PwkConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{EmbedArgs, Family, GenerateArgs, Method, PathwidthArgs};

pub enum Status {
    Ok,
    Violation,
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_lengths(spec: &str) -> Result<LengthDistribution> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || anyhow!("length spec must be `unit`, `int:LO:HI` or `pow2:MAX`, got `{spec}`");
    match parts.as_slice() {
        ["unit"] => Ok(LengthDistribution::Unit),
        ["int", lo, hi] => Ok(LengthDistribution::UniformInt {
            lo: lo.parse().map_err(|_| bad())?,
            hi: hi.parse().map_err(|_| bad())?,
        }),
        ["pow2", e] => Ok(LengthDistribution::PowersOfTwo { max_exp: e.parse().map_err(|_| bad())? }),
        _ => Err(bad()),
    }
}

pub fn generate(a: GenerateArgs) -> Result<Status> {
    let (g, seq): (MetricGraph, Option<LinearCompositionSequence>) = match a.family {
        Family::Phi { i } => (phi(i)?, None),
        Family::Psi { i, m } => (psi(i, m)?, None),
        Family::PsiTrunc { i, m, l } => {
            let l: Length = l.parse().context("parsing --l")?;
            (psi_truncated(i, m, l)?, None)
        }
        Family::Cycle { n } => {
            let (g, s) = cycle(n)?;
            (g, Some(s))
        }
        Family::RandomPw { k, n, seed, lengths } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, s) = random_pathwidth_graph(k, n, &parse_lengths(&lengths)?, &mut rng)?;
            (g, Some(s))
        }
    };
    if let Some(path) = &a.composition_out {
        let seq = match seq {
            Some(s) => s,
            None => tree_composition(&g)?,
        };
        emit(&seq.to_json_string(), Some(path))?;
    }
    emit(&g.to_json_string(), a.out.as_deref())?;
    eprintln!("generated {} vertices, {} edges", g.num_vertices(), g.num_edges());
    Ok(Status::Ok)
}

pub fn pathwidth(a: PathwidthArgs) -> Result<Status> {
    let g = MetricGraph::from_json_str(&read(&a.graph)?)?;
    let report = match a.method {
        Method::Exact => {
            let pw = exact_pathwidth_with_limit(&g, a.limit.unwrap_or(DEFAULT_ORACLE_LIMIT))?;
            json!({ "method": "exact", "pathwidth": pw })
        }
        Method::Tree => json!({ "method": "tree", "pathwidth": tree_pathwidth(&g)? }),
        Method::Peel => {
            let pw = tree_pathwidth(&g)?;
            let (path, comps) = peel_path(&g)?;
            let comps: Vec<_> = comps
                .iter()
                .map(|c| json!({ "vertices": c.vertices(), "pathwidth": tree_pathwidth(c).unwrap_or(0) }))
                .collect();
            json!({ "method": "peel", "pathwidth": pw, "path": path, "components": comps })
        }
    };
    emit(&serde_json::to_string_pretty(&report)?, None)?;
    Ok(Status::Ok)
}

fn load_composition(a: &EmbedArgs, g: &MetricGraph) -> Result<LinearCompositionSequence> {
    if let Some(p) = &a.composition {
        return Ok(LinearCompositionSequence::from_json_str(&read(p)?)?);
    }
    let pd = match &a.decomposition {
        Some(p) => PathDecomposition::from_json_str(&read(p)?)?,
        None if g.num_vertices() <= DEFAULT_ORACLE_LIMIT => exact_path_decomposition(g)?,
        None => bail!(
            "the graph has {} vertices, above the exact oracle limit of {DEFAULT_ORACLE_LIMIT}; \
             supply --composition or --decomposition",
            g.num_vertices()
        ),
    };
    validate_path_decomposition(g, &pd)?;
    Ok(decomposition_to_composition(&pd, g)?)
}

pub fn embed(a: EmbedArgs) -> Result<Status> {
    if a.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let g = MetricGraph::from_json_str(&read(&a.graph)?)?;
    let seq = load_composition(&a, &g)?;
    if let Some(k) = a.k {
        if k != seq.k {
            bail!("--k {k} does not match the composition width {}", seq.k);
        }
    }
    let tau = a.tau.as_deref().map(str::parse::<Length>).transpose().context("parsing --tau")?;
    if tau.is_some_and(|t| t <= Length::ZERO) {
        bail!("--tau must be positive");
    }
    let embedder: Box<dyn Embedder> = if a.warmup {
        if seq.k != 2 {
            bail!("--warmup needs a width-2 composition, got width {}", seq.k);
        }
        Box::new(Pw2Embedder::new(&g, seq, tau)?)
    } else {
        Box::new(PwkEmbedder::new(&g, seq, PwkConfig { tau, track_pair_ranks: false })?)
    };
    let report = match a.threads {
        Some(t) => estimate_distortion_with(&g, embedder.as_ref(), a.samples, a.seed, t)?,
        None => estimate_distortion(&g, embedder.as_ref(), a.samples, a.seed)?,
    };
    emit(&report.to_json_pretty(), a.out.as_deref())?;
    eprintln!(
        "{}: max mean edge stretch {:.4} (stderr {:.4}), {} violating samples",
        if report.pass { "pass" } else { "FAIL" },
        report.max_mean_stretch,
        report.max_mean_stretch_stderr,
        report.noncontraction.violating_samples
    );
    Ok(if report.pass { Status::Ok } else { Status::Violation })
}
