//! Test-only generators and independent oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use corrtree::{DistanceMatrix, ReturnsMatrix, SignalKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("S{i:02}")).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distance matrix with entries drawn uniformly from `(0.05, 2)`.
/// Not necessarily metric; spanning-tree checks do not need it to be.
pub fn random_distance(n: usize, rng: &mut impl Rng) -> DistanceMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0.05..2.0);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    DistanceMatrix::from_rows(labels(n), &rows).unwrap()
}

/// Random panel of `t` observations with a few shared drivers so that
/// correlations spread over both signs.
pub fn random_returns(n: usize, t: usize, rng: &mut impl Rng) -> ReturnsMatrix {
    let k = 3;
    let drivers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..t).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let noise = rng.random_range(0.1..1.0);
            (0..t)
                .map(|s| {
                    (0..k).map(|j| w[j] * drivers[j][s]).sum::<f64>()
                        + noise * rng.random_range(-1.0..1.0)
                })
                .collect()
        })
        .collect();
    ReturnsMatrix::from_columns(labels(n), &cols, SignalKind::Raw).unwrap()
}

/// Naive agglomerative single linkage, O(n^3). Returns the cophenetic
/// matrix and the merge heights in order.
pub fn naive_single_linkage(d: &DistanceMatrix) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = d.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut coph = vec![vec![0.0; n]; n];
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut link = f64::INFINITY;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        link = link.min(d.get(i, j));
                    }
                }
                if link < best.0 {
                    best = (link, a, b);
                }
            }
        }
        let (h, a, b) = best;
        for &i in &clusters[a] {
            for &j in &clusters[b] {
                coph[i][j] = h;
                coph[j][i] = h;
            }
        }
        heights.push(h);
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
    }
    (coph, heights)
}

/// Max edge weight on the tree path between `from` and `to`, by explicit walk.
pub fn path_max(adj: &[Vec<(usize, f64)>], from: usize, to: usize) -> f64 {
    fn walk(adj: &[Vec<(usize, f64)>], u: usize, parent: usize, to: usize, best: f64) -> Option<f64> {
        if u == to {
            return Some(best);
        }
        for &(v, w) in &adj[u] {
            if v != parent {
                if let Some(r) = walk(adj, v, u, to, best.max(w)) {
                    return Some(r);
                }
            }
        }
        None
    }
    walk(adj, from, usize::MAX, to, 0.0).expect("tree is connected")
}

/// Minimal Newick reader for the writer's output: returns the nested tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Newick {
    Leaf(String, f64),
    Node(Vec<Newick>, f64),
}

impl Newick {
    pub fn leaves(&self) -> Vec<String> {
        match self {
            Newick::Leaf(l, _) => vec![l.clone()],
            Newick::Node(kids, _) => kids.iter().flat_map(Newick::leaves).collect(),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Newick::Leaf(_, len) | Newick::Node(_, len) => *len,
        }
    }

    /// Height of each internal node above its leaves, with the leaf sets
    /// of its two children.
    pub fn merges(&self) -> Vec<(f64, Vec<String>, Vec<String>)> {
        fn go(t: &Newick, out: &mut Vec<(f64, Vec<String>, Vec<String>)>) -> f64 {
            match t {
                Newick::Leaf(..) => 0.0,
                Newick::Node(kids, _) => {
                    let depth = go(&kids[0], out) + kids[0].length();
                    go(&kids[1], out);
                    out.push((2.0 * depth, kids[0].leaves(), kids[1].leaves()));
                    depth
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

pub fn parse_newick(s: &str) -> Newick {
    fn label(chars: &[char], pos: &mut usize) -> String {
        let mut out = String::new();
        if chars[*pos] == '\'' {
            *pos += 1;
            loop {
                if chars[*pos] == '\'' {
                    if chars.get(*pos + 1) == Some(&'\'') {
                        out.push('\'');
                        *pos += 2;
                        continue;
                    }
                    *pos += 1;
                    break;
                }
                out.push(chars[*pos]);
                *pos += 1;
            }
        } else {
            while !":,();".contains(chars[*pos]) {
                out.push(chars[*pos]);
                *pos += 1;
            }
        }
        out
    }
    fn length(chars: &[char], pos: &mut usize) -> f64 {
        assert_eq!(chars[*pos], ':');
        *pos += 1;
        let start = *pos;
        while !",);".contains(chars[*pos]) {
            *pos += 1;
        }
        chars[start..*pos].iter().collect::<String>().parse().unwrap()
    }
    fn node(chars: &[char], pos: &mut usize) -> Newick {
        if chars[*pos] == '(' {
            *pos += 1;
            let mut kids = vec![node(chars, pos)];
            while chars[*pos] == ',' {
                *pos += 1;
                kids.push(node(chars, pos));
            }
            assert_eq!(chars[*pos], ')');
            *pos += 1;
            let len = length(chars, pos);
            Newick::Node(kids, len)
        } else {
            let l = label(chars, pos);
            let len = length(chars, pos);
            Newick::Leaf(l, len)
        }
    }
    let chars: Vec<char> = s.trim().chars().collect();
    let mut pos = 0;
    let t = node(&chars, &mut pos);
    assert_eq!(chars[pos], ';');
    t
}

fn attr(tag: &str, name: &str) -> String {
    let key = format!("{name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    let end = start + tag[start..].find('"').unwrap();
    tag[start..end]
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

/// Edges `(source, target, weight)` and node ids read back from GraphML.
pub fn parse_graphml(doc: &str) -> (Vec<String>, Vec<(String, String, f64)>) {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut rest = doc;
    while let Some(i) = rest.find('<') {
        rest = &rest[i..];
        let end = rest.find('>').unwrap();
        let tag = &rest[..=end];
        if tag.starts_with("<node ") {
            nodes.push(attr(tag, "id"));
        } else if tag.starts_with("<edge ") {
            let (s, t) = (attr(tag, "source"), attr(tag, "target"));
            let wkey = "<data key=\"weight\">";
            let ws = rest.find(wkey).unwrap() + wkey.len();
            let we = ws + rest[ws..].find('<').unwrap();
            edges.push((s, t, rest[ws..we].parse().unwrap()));
        }
        rest = &rest[end + 1..];
    }
    (nodes, edges)
}

/// Edge `(a, b)` pairs and node ids read back from the DOT writer's output.
pub fn parse_dot(doc: &str) -> (Vec<String>, Vec<(String, String)>) {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for line in doc.lines().map(str::trim) {
        if let Some((a, b)) = line.split_once(" -- ") {
            let b = b.split(" [").next().unwrap();
            edges.push((a.trim_matches('"').to_string(), b.trim_matches('"').to_string()));
        } else if line.starts_with('"') && line.ends_with(';') {
            nodes.push(line.trim_end_matches(';').trim_matches('"').to_string());
        }
    }
    (nodes, edges)
}
