//! Pathwidth of trees and the path-peeling construction.
//!
//! Pathwidth of a tree follows from the three-branch characterisation: a tree
//! has pathwidth at least `p + 1` iff some vertex has three branches of
//! pathwidth at least `p`. The rooted labelling below propagates, for each
//! subtree, its pathwidth and whether a vertex inside already has two
//! children of that pathwidth (a critical vertex); a critical subtree also
//! carries the label of what remains after cutting the critical vertex off.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::decomposition::PathDecomposition;
use crate::graph::{MetricGraph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("input graph is not a tree")]
    NotATree,
    #[error("path peeling needs pathwidth at least 2, tree has pathwidth {0}")]
    PathwidthTooLow(usize),
}

type Entry = (usize, Option<usize>);

fn combine(x: usize, mut kids: Vec<&[Entry]>) -> Vec<Entry> {
    kids.retain(|l| !l.is_empty());
    let Some(m) = kids.iter().map(|l| l[0].0).max() else {
        return vec![(0, None)];
    };
    if m == 0 {
        return vec![(1, None)];
    }
    let top: Vec<usize> = (0..kids.len()).filter(|&i| kids[i][0].0 == m).collect();
    match top.len() {
        1 => {
            let i = top[0];
            match kids[i][0].1 {
                None => vec![(m, None)],
                Some(c) => {
                    let mut rest_kids = kids.clone();
                    rest_kids[i] = &kids[i][1..];
                    let rest = combine(x, rest_kids);
                    if rest[0].0 >= m {
                        vec![(m + 1, None)]
                    } else {
                        let mut out = Vec::with_capacity(rest.len() + 1);
                        out.push((m, Some(c)));
                        out.extend(rest);
                        out
                    }
                }
            }
        }
        2 if top.iter().all(|&i| kids[i][0].1.is_none()) => vec![(m, Some(x))],
        _ => vec![(m + 1, None)],
    }
}

/// Pathwidth of the component of `root` in the forest `adj` with `banned`
/// deleted.
fn rooted_pathwidth(adj: &[Vec<usize>], root: usize, banned: Option<usize>) -> usize {
    let mut parent = vec![usize::MAX; adj.len()];
    let mut order = Vec::new();
    let mut stack = vec![root];
    parent[root] = root;
    while let Some(x) = stack.pop() {
        order.push(x);
        for &y in &adj[x] {
            if parent[y] == usize::MAX && Some(y) != banned {
                parent[y] = x;
                stack.push(y);
            }
        }
    }
    let mut labels: Vec<Vec<Entry>> = vec![Vec::new(); adj.len()];
    for &x in order.iter().rev() {
        let kids: Vec<&[Entry]> = adj[x]
            .iter()
            .filter(|&&y| parent[y] == x && y != root && Some(y) != banned)
            .map(|&y| labels[y].as_slice())
            .collect();
        let label = combine(x, kids);
        for &y in &adj[x] {
            if parent[y] == x && y != root {
                labels[y] = Vec::new();
            }
        }
        labels[x] = label;
    }
    labels[root][0].0
}

fn tree_adjacency(t: &MetricGraph) -> Vec<Vec<usize>> {
    (0..t.num_vertices())
        .map(|i| t.adjacency(i).iter().map(|&(j, _)| j).collect())
        .collect()
}

/// Exact pathwidth of a tree in near-linear time.
pub fn tree_pathwidth(t: &MetricGraph) -> Result<usize, TreeError> {
    if !t.is_tree() {
        return Err(TreeError::NotATree);
    }
    Ok(rooted_pathwidth(&tree_adjacency(t), 0, None))
}

/// Pathwidth of a forest: the maximum over its components.
pub fn forest_pathwidth(f: &MetricGraph) -> usize {
    let adj = tree_adjacency(f);
    f.connected_components()
        .iter()
        .map(|c| rooted_pathwidth(&adj, f.index_of(c[0]).unwrap(), None))
        .max()
        .unwrap_or(0)
}

/// For every vertex `v`, the number of components of `t - v` whose
/// pathwidth equals that of `t`.
pub fn alpha_counts(t: &MetricGraph) -> Result<BTreeMap<Vertex, usize>, TreeError> {
    let pw = tree_pathwidth(t)?;
    let adj = tree_adjacency(t);
    Ok((0..adj.len())
        .map(|v| {
            let a = adj[v]
                .iter()
                .filter(|&&u| rooted_pathwidth(&adj, u, Some(v)) == pw)
                .count();
            (t.vertex_at(v), a)
        })
        .collect())
}

/// Core of the peeling: works for any pathwidth, including 0 and 1.
fn peel(adj: &[Vec<usize>], pw: usize) -> Vec<usize> {
    let n = adj.len();
    // branch[v] lists (neighbour, pathwidth of the component of t - v holding it)
    let branch: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|v| adj[v].iter().map(|&u| (u, rooted_pathwidth(adj, u, Some(v)))).collect())
        .collect();
    let alpha: Vec<usize> = branch
        .iter()
        .map(|b| b.iter().filter(|&&(_, p)| p == pw).count())
        .collect();
    debug_assert!(alpha.iter().all(|&a| a <= 2));
    // dense indices follow vertex order, so the lowest index is the lowest id
    if let Some(v) = (0..n).find(|&v| alpha[v] == 0) {
        return vec![v];
    }
    if alpha.iter().all(|&a| a == 1) {
        let start = (0..n).find(|&v| adj[v].len() == 1).expect("a tree with an edge has a leaf");
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        loop {
            let x = *path.last().unwrap();
            let y = branch[x].iter().find(|&&(_, p)| p == pw).unwrap().0;
            if on_path[y] {
                return path;
            }
            on_path[y] = true;
            path.push(y);
        }
    }
    let in_x: Vec<bool> = alpha.iter().map(|&a| a == 2).collect();
    let xs: Vec<usize> = (0..n).filter(|&v| in_x[v]).collect();
    let deg_in_x = |v: usize| adj[v].iter().filter(|&&u| in_x[u]).count();
    let mut path = if xs.len() == 1 {
        vec![xs[0]]
    } else {
        let start = *xs.iter().find(|&&v| deg_in_x(v) == 1).expect("X induces a path");
        let mut path = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(&next) = adj[cur].iter().find(|&&u| in_x[u] && u != prev) {
            path.push(next);
            prev = cur;
            cur = next;
        }
        path
    };
    debug_assert_eq!(path.len(), xs.len(), "X induces a path");
    // outward neighbours of the endpoints leading into pathwidth-pw components
    let outward = |w: usize| -> Vec<usize> {
        branch[w]
            .iter()
            .filter(|&&(u, p)| p == pw && !in_x[u])
            .map(|&(u, _)| u)
            .collect()
    };
    let head = *path.first().unwrap();
    let tail = *path.last().unwrap();
    let w1 = outward(head);
    let w2 = outward(tail);
    let (a, b) = if head == tail {
        (w1[0], w1[1])
    } else {
        (w1[0], w2[0])
    };
    path.insert(0, a);
    path.push(b);
    path
}

fn components_without(t: &MetricGraph, path: &BTreeSet<Vertex>) -> Vec<MetricGraph> {
    let rest = t.without_vertices(path);
    rest.connected_components()
        .into_iter()
        .map(|c| rest.induced_subgraph(&c.into_iter().collect()))
        .collect()
}

/// A simple path whose removal leaves only components of pathwidth at most
/// `pw(t) - 1`, together with those components in order of their smallest
/// vertex.
pub fn peel_path(t: &MetricGraph) -> Result<(Vec<Vertex>, Vec<MetricGraph>), TreeError> {
    let pw = tree_pathwidth(t)?;
    if pw <= 1 {
        return Err(TreeError::PathwidthTooLow(pw));
    }
    let adj = tree_adjacency(t);
    let path: Vec<Vertex> = peel(&adj, pw).into_iter().map(|i| t.vertex_at(i)).collect();
    let comps = components_without(t, &path.iter().copied().collect());
    Ok((path, comps))
}

/// A path decomposition of a tree of optimal width, built by peeling a path,
/// decomposing the leftover components recursively, and threading their bags
/// along the path.
pub fn tree_path_decomposition(t: &MetricGraph) -> Result<PathDecomposition, TreeError> {
    if !t.is_tree() {
        return Err(TreeError::NotATree);
    }
    Ok(PathDecomposition {
        bags: decompose(t),
    })
}

fn decompose(t: &MetricGraph) -> Vec<BTreeSet<Vertex>> {
    let adj = tree_adjacency(t);
    let pw = rooted_pathwidth(&adj, 0, None);
    let path: Vec<Vertex> = peel(&adj, pw).into_iter().map(|i| t.vertex_at(i)).collect();
    let on_path: BTreeSet<Vertex> = path.iter().copied().collect();
    let mut attached: BTreeMap<Vertex, Vec<MetricGraph>> = BTreeMap::new();
    for comp in components_without(t, &on_path) {
        let anchor = comp
            .vertices()
            .iter()
            .find_map(|&v| t.neighbors(v).map(|(u, _)| u).find(|u| on_path.contains(u)))
            .expect("component hangs off the path");
        attached.entry(anchor).or_default().push(comp);
    }
    let mut bags = Vec::new();
    for (j, &p) in path.iter().enumerate() {
        for comp in attached.remove(&p).unwrap_or_default() {
            for mut bag in decompose(&comp) {
                bag.insert(p);
                bags.push(bag);
            }
        }
        match path.get(j + 1) {
            Some(&q) => bags.push(BTreeSet::from([p, q])),
            None if bags.is_empty() => bags.push(BTreeSet::from([p])),
            None => {}
        }
    }
    bags
}
