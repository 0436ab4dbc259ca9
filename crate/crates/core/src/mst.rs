//! Minimal spanning trees over a distance matrix.
//!
//! [`build_mst`] adds candidate links shortest-first (strongest correlation
//! first) and skips any link whose endpoints are already connected, i.e.
//! Kruskal's algorithm over a union-find forest. [`mst_oracle`] enumerates
//! every labelled tree through Prüfer sequences and exists to check it.

use std::collections::{BTreeMap, BTreeSet};

use rayon::slice::ParallelSliceMut;

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;
use crate::union_find::UnionFind;

/// Largest size accepted by [`mst_oracle`]; it visits `n^(n-2)` trees.
pub const ORACLE_MAX_N: usize = 8;

/// Tree link between asset indices `a` and `b`, with `labels[a] < labels[b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    /// Position in which the link was accepted.
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    labels: Vec<String>,
    edges: Vec<TreeEdge>,
}

/// One candidate link examined while growing the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct KruskalStep {
    pub a: String,
    pub b: String,
    pub weight: f64,
    /// False when the endpoints were already connected.
    pub accepted: bool,
}

impl SpanningTree {
    /// Validating constructor from labelled links listed in acceptance order.
    pub fn from_edges(labels: Vec<String>, links: &[(String, String, f64)]) -> Result<Self> {
        let n = labels.len();
        let index: BTreeMap<&str, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        if index.len() != n {
            return Err(Error::Schema("duplicate tree labels".into()));
        }
        if n < 2 {
            return Err(Error::Size(format!("a tree needs at least 2 nodes, got {n}")));
        }
        if links.len() != n - 1 {
            return Err(Error::Size(format!(
                "a tree on {n} nodes has {} edges, got {}",
                n - 1,
                links.len()
            )));
        }
        let mut uf = UnionFind::new(n);
        let mut edges = Vec::with_capacity(n - 1);
        for (order, (la, lb, w)) in links.iter().enumerate() {
            let a = *index.get(la.as_str()).ok_or_else(|| Error::Lookup(la.clone()))?;
            let b = *index.get(lb.as_str()).ok_or_else(|| Error::Lookup(lb.clone()))?;
            if !w.is_finite() {
                return Err(Error::Domain(format!("non-finite edge weight {w}")));
            }
            if !uf.union(a, b) {
                return Err(Error::Schema(format!("edge {la}-{lb} closes a cycle")));
            }
            edges.push(canonical(&labels, a, b, *w, order));
        }
        Ok(SpanningTree { labels, edges })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Edges in acceptance order.
    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn edge_labels(&self, e: &TreeEdge) -> (&str, &str) {
        (&self.labels[e.a], &self.labels[e.b])
    }

    /// Sum of edge weights, added smallest first so that trees with the same
    /// weight multiset give bit-identical totals.
    pub fn total_weight(&self) -> f64 {
        let mut w: Vec<f64> = self.edges.iter().map(|e| e.weight).collect();
        w.sort_by(f64::total_cmp);
        w.iter().sum()
    }

    /// Unweighted links as ordered label pairs.
    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|e| (self.labels[e.a].clone(), self.labels[e.b].clone()))
            .collect()
    }

    /// Neighbour lists `(node, weight)` per node index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.weight));
            adj[e.b].push((e.a, e.weight));
        }
        adj
    }

    pub fn degrees(&self) -> BTreeMap<String, usize> {
        tree_degrees(self)
    }
}

fn canonical(labels: &[String], a: usize, b: usize, weight: f64, order: usize) -> TreeEdge {
    let (a, b) = if labels[a] <= labels[b] { (a, b) } else { (b, a) };
    TreeEdge { a, b, weight, order }
}

fn check_input(d: &DistanceMatrix) -> Result<usize> {
    let n = d.len();
    if n < 2 {
        return Err(Error::Size(format!("need at least 2 assets, got {n}")));
    }
    if let Some(bad) = d.matrix().as_slice().iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite distance {bad}")));
    }
    Ok(n)
}

pub fn build_mst(d: &DistanceMatrix) -> Result<SpanningTree> {
    build_mst_traced(d).map(|(tree, _)| tree)
}

/// Like [`build_mst`], also returning every candidate examined until the
/// tree was complete, including rejected cycle-closing links.
pub fn build_mst_traced(d: &DistanceMatrix) -> Result<(SpanningTree, Vec<KruskalStep>)> {
    let n = check_input(d)?;
    let labels = d.labels();

    // Ties on distance fall back to label order.
    let mut by_label: Vec<usize> = (0..n).collect();
    by_label.sort_by(|&x, &y| labels[x].cmp(&labels[y]));
    let mut rank = vec![0usize; n];
    for (r, &i) in by_label.iter().enumerate() {
        rank[i] = r;
    }

    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = if rank[i] < rank[j] { (i, j) } else { (j, i) };
            candidates.push((d.get(i, j), a, b));
        }
    }
    candidates.par_sort_unstable_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(rank[x.1].cmp(&rank[y.1]))
            .then(rank[x.2].cmp(&rank[y.2]))
    });

    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    let mut trace = Vec::new();
    for &(w, a, b) in &candidates {
        let accepted = uf.union(a, b);
        trace.push(KruskalStep {
            a: labels[a].clone(),
            b: labels[b].clone(),
            weight: w,
            accepted,
        });
        if accepted {
            edges.push(TreeEdge {
                a,
                b,
                weight: w,
                order: edges.len(),
            });
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    Ok((
        SpanningTree {
            labels: labels.to_vec(),
            edges,
        },
        trace,
    ))
}

/// Decodes a Prüfer sequence over `0..n` into its `n - 1` tree edges.
fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf exists");
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Exhaustive minimum spanning tree over all `n^(n-2)` labelled trees.
/// Ties on total weight go to the lexicographically smallest sorted edge list.
pub fn mst_oracle(d: &DistanceMatrix) -> Result<SpanningTree> {
    let n = check_input(d)?;
    if n > ORACLE_MAX_N {
        return Err(Error::Size(format!(
            "oracle enumerates n^(n-2) trees; n = {n} exceeds {ORACLE_MAX_N}"
        )));
    }
    let labels = d.labels();
    let label_pair = |a: usize, b: usize| {
        let (x, y) = (&labels[a], &labels[b]);
        if x <= y {
            (x.clone(), y.clone())
        } else {
            (y.clone(), x.clone())
        }
    };

    // (total, sorted label pairs, index pairs)
    type Best = (f64, Vec<(String, String)>, Vec<(usize, usize)>);
    let mut best: Option<Best> = None;
    let mut seq = vec![0usize; n - 2];
    loop {
        let edges = prufer_decode(&seq, n);
        let mut weights: Vec<f64> = edges.iter().map(|&(a, b)| d.get(a, b)).collect();
        weights.sort_by(f64::total_cmp);
        let total: f64 = weights.iter().sum();
        let better = match &best {
            None => true,
            Some((bw, bkey, _)) => {
                total < *bw || (total == *bw && {
                    let mut key: Vec<_> = edges.iter().map(|&(a, b)| label_pair(a, b)).collect();
                    key.sort();
                    key < *bkey
                })
            }
        };
        if better {
            let mut key: Vec<_> = edges.iter().map(|&(a, b)| label_pair(a, b)).collect();
            key.sort();
            best = Some((total, key, edges));
        }
        // odometer increment over base-n digits
        let mut pos = 0;
        while pos < seq.len() {
            seq[pos] += 1;
            if seq[pos] < n {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
        if pos == seq.len() {
            break;
        }
    }

    let (_, _, mut edges) = best.expect("at least one tree");
    edges.sort_by(|&(a1, b1), &(a2, b2)| {
        d.get(a1, b1)
            .total_cmp(&d.get(a2, b2))
            .then_with(|| label_pair(a1, b1).cmp(&label_pair(a2, b2)))
    });
    let edges = edges
        .into_iter()
        .enumerate()
        .map(|(order, (a, b))| canonical(labels, a, b, d.get(a, b), order))
        .collect();
    Ok(SpanningTree {
        labels: labels.to_vec(),
        edges,
    })
}

/// True when the tree links among `members` alone connect them, i.e. the
/// members form a connected subtree. Unknown labels make it false.
pub fn is_connected_subtree<S: AsRef<str>>(t: &SpanningTree, members: &[S]) -> bool {
    let idx: Option<Vec<usize>> = members
        .iter()
        .map(|m| t.labels.iter().position(|l| l == m.as_ref()))
        .collect();
    let Some(idx) = idx else { return false };
    if idx.len() <= 1 {
        return true;
    }
    let mut inside = vec![false; t.len()];
    for &i in &idx {
        inside[i] = true;
    }
    let mut uf = UnionFind::new(t.len());
    let mut joined = 0;
    for e in &t.edges {
        if inside[e.a] && inside[e.b] && uf.union(e.a, e.b) {
            joined += 1;
        }
    }
    joined == idx.len() - 1
}

/// Node degree per label; degrees sum to `2 (n - 1)`.
pub fn tree_degrees(t: &SpanningTree) -> BTreeMap<String, usize> {
    let mut deg: BTreeMap<String, usize> = t.labels.iter().map(|l| (l.clone(), 0)).collect();
    for e in &t.edges {
        *deg.get_mut(&t.labels[e.a]).expect("label") += 1;
        *deg.get_mut(&t.labels[e.b]).expect("label") += 1;
    }
    deg
}
