//! Subdominant ultrametric and single-linkage dendrograms.
//!
//! The subdominant ultrametric between two assets is the largest link weight
//! on the tree path joining them. Merging clusters along tree links in
//! ascending weight yields single-linkage clustering, whose cophenetic
//! distances are that same ultrametric.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::metric::DistanceMatrix;
use crate::mst::{build_mst, SpanningTree};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricMatrix(SymMatrix);

impl UltrametricMatrix {
    pub fn matrix(&self) -> &SymMatrix {
        &self.0
    }

    pub fn labels(&self) -> &[String] {
        self.0.labels()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }
}

/// Path-maximum link weight between every pair of tree nodes.
pub fn subdominant_ultrametric(t: &SpanningTree) -> UltrametricMatrix {
    let n = t.len();
    let adj = t.adjacency();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|root| {
            let mut row = vec![f64::NAN; n];
            row[root] = 0.0;
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                for &(v, w) in &adj[u] {
                    if row[v].is_nan() {
                        row[v] = row[u].max(w);
                        stack.push(v);
                    }
                }
            }
            row
        })
        .collect();
    let m = SymMatrix::new(t.labels().to_vec(), rows.concat()).expect("n x n rows");
    UltrametricMatrix(m)
}

/// One agglomeration step. Clusters `0..n` are the leaves; merge `k` creates
/// cluster `n + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    /// Number of leaves in the new cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Validates a merge list: `n - 1` merges, non-decreasing heights, and
    /// each cluster consumed exactly once.
    pub fn new(leaves: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        let n = leaves.len();
        if n < 2 || merges.len() != n - 1 {
            return Err(Error::Size(format!(
                "{n} leaves need {} merges, got {}",
                n.saturating_sub(1),
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut sizes: Vec<usize> = vec![1; n];
        let mut prev = f64::NEG_INFINITY;
        for (k, m) in merges.iter().enumerate() {
            let limit = n + k;
            if m.left >= limit || m.right >= limit || m.left == m.right {
                return Err(Error::Schema(format!("merge {k} refers to unknown clusters")));
            }
            if used[m.left] || used[m.right] {
                return Err(Error::Schema(format!("merge {k} reuses a cluster")));
            }
            if m.height.is_nan() || m.height < prev {
                return Err(Error::Schema(format!("merge {k} height decreases")));
            }
            used[m.left] = true;
            used[m.right] = true;
            prev = m.height;
            let size = sizes[m.left] + sizes[m.right];
            if size != m.size {
                return Err(Error::Schema(format!("merge {k} has size {} not {size}", m.size)));
            }
            sizes.push(size);
        }
        Ok(Dendrogram { leaves, merges })
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    pub fn root(&self) -> usize {
        2 * self.leaves.len() - 2
    }

    /// Leaf indices under `cluster`, left subtree first.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        let n = self.leaves.len();
        let mut out = Vec::new();
        let mut stack = vec![cluster];
        while let Some(c) = stack.pop() {
            if c < n {
                out.push(c);
            } else {
                let m = &self.merges[c - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    /// Leaf order of the drawn dendrogram.
    pub fn leaf_order(&self) -> Vec<usize> {
        self.members(self.root())
    }

    /// Height at which two leaves first share a cluster.
    pub fn cophenetic(&self) -> UltrametricMatrix {
        let n = self.leaves.len();
        let mut m = SymMatrix::filled(self.leaves.clone(), 0.0);
        for k in 0..self.merges.len() {
            let merge = self.merges[k];
            let left = self.members(merge.left);
            let right = self.members(merge.right);
            for &i in &left {
                for &j in &right {
                    m.set_sym(i, j, merge.height);
                }
            }
        }
        debug_assert_eq!(m.len(), n);
        UltrametricMatrix(m)
    }

    /// Clusters obtained by applying every merge at height `<= h`. Each
    /// cluster lists leaf labels in leaf order; clusters are sorted by their
    /// first leaf index.
    pub fn cut(&self, h: f64) -> Vec<Vec<String>> {
        let n = self.leaves.len();
        let mut uf = UnionFind::new(n);
        for m in self.merges.iter().filter(|m| m.height <= h) {
            let (a, b) = (self.members(m.left)[0], self.members(m.right)[0]);
            uf.union(a, b);
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = uf.find(i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| self.leaves[i].clone()).collect())
            .collect()
    }
}

/// Agglomerates along tree links in ascending weight; equal weights keep the
/// tree's acceptance order. The lower-numbered cluster goes left.
pub fn dendrogram_from_tree(t: &SpanningTree) -> Dendrogram {
    let n = t.len();
    let mut edges = t.edges().to_vec();
    edges.sort_by(|x, y| x.weight.total_cmp(&y.weight).then(x.order.cmp(&y.order)));
    let mut uf = UnionFind::new(n);
    // cluster id and size currently attached to each union-find root
    let mut cluster: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut merges = Vec::with_capacity(n - 1);
    for e in edges {
        let (ra, rb) = (uf.find(e.a), uf.find(e.b));
        let (ca, cb) = (cluster[ra], cluster[rb]);
        let merged = size[ra] + size[rb];
        uf.union(ra, rb);
        let root = uf.find(ra);
        cluster[root] = n + merges.len();
        size[root] = merged;
        merges.push(Merge {
            left: ca.min(cb),
            right: ca.max(cb),
            height: e.weight,
            size: merged,
        });
    }
    Dendrogram {
        leaves: t.labels().to_vec(),
        merges,
    }
}

/// Single-linkage clustering of `d`, derived from its minimal spanning tree.
pub fn single_linkage(d: &DistanceMatrix) -> Result<Dendrogram> {
    Ok(dendrogram_from_tree(&build_mst(d)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn link(a: &str, b: &str, w: f64) -> (String, String, f64) {
        (a.into(), b.into(), w)
    }

    #[test]
    fn path_max_on_a_path() {
        let t = SpanningTree::from_edges(
            labels(&["A", "B", "C"]),
            &[link("A", "B", 0.5), link("B", "C", 0.8)],
        )
        .unwrap();
        let u = subdominant_ultrametric(&t);
        assert_eq!(u.get(0, 2), 0.8);
        assert_eq!(u.get(0, 1), 0.5);
        assert_eq!(u.get(2, 1), 0.8);
        assert!((0..3).all(|i| u.get(i, i) == 0.0));
    }

    #[test]
    fn uniform_star() {
        let t = SpanningTree::from_edges(
            labels(&["h", "a", "b", "c"]),
            &[link("h", "a", 0.3), link("h", "b", 0.3), link("h", "c", 0.3)],
        )
        .unwrap();
        let u = subdominant_ultrametric(&t);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(u.get(i, j), if i == j { 0.0 } else { 0.3 });
            }
        }
    }

    #[test]
    fn three_asset_agglomeration() {
        let d = DistanceMatrix::from_rows(
            labels(&["A", "B", "C"]),
            &[vec![0.0, 0.2, 0.9], vec![0.2, 0.0, 0.7], vec![0.9, 0.7, 0.0]],
        )
        .unwrap();
        let dg = single_linkage(&d).unwrap();
        assert_eq!(
            dg.merges(),
            [
                Merge { left: 0, right: 1, height: 0.2, size: 2 },
                Merge { left: 2, right: 3, height: 0.7, size: 3 },
            ]
        );
        assert_eq!(dg.cut(0.5), vec![labels(&["A", "B"]), labels(&["C"])]);
        assert_eq!(dg.cut(0.1).len(), 3);
        assert_eq!(dg.cut(0.7).len(), 1);
        let c = dg.cophenetic();
        assert_eq!((c.get(0, 1), c.get(0, 2), c.get(1, 2)), (0.2, 0.7, 0.7));
    }

    #[test]
    fn two_assets_single_merge() {
        let d = DistanceMatrix::from_rows(labels(&["A", "B"]), &[vec![0.0, 0.4], vec![0.4, 0.0]])
            .unwrap();
        let dg = single_linkage(&d).unwrap();
        assert_eq!(dg.merges().len(), 1);
        assert_eq!(dg.merges()[0].height, 0.4);
        assert_eq!(dg.leaf_order(), [0, 1]);
    }

    #[test]
    fn validating_constructor() {
        let leaves = labels(&["A", "B", "C"]);
        let ok = vec![
            Merge { left: 0, right: 1, height: 0.2, size: 2 },
            Merge { left: 2, right: 3, height: 0.7, size: 3 },
        ];
        assert!(Dendrogram::new(leaves.clone(), ok.clone()).is_ok());
        let mut bad = ok.clone();
        bad[1].height = 0.1;
        assert!(Dendrogram::new(leaves.clone(), bad).is_err());
        let mut bad = ok;
        bad[1].left = 1;
        assert!(Dendrogram::new(leaves, bad).is_err());
    }
}
