//! Stochastic embeddings of bounded-pathwidth metric graphs into trees.

pub mod distribution;
pub mod embed_pw2;
pub mod graph;
pub mod harness;
pub mod instances;
pub mod length;
pub mod pathwidth;
pub mod pwk;
