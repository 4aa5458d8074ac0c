use serde::Serialize;

use crate::error::{Error, Result};

/// Simple labeled graph on vertices `1..=n`; edges are stored with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LabeledGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub connected: bool,
}

impl LabeledGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut e: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == 0 || i == j || j > n {
                return Err(Error::Input(format!("edge ({a},{b}) invalid on {n} vertices")));
            }
            e.push((i, j));
        }
        e.sort_unstable();
        e.dedup();
        let connected = is_connected(n, &e);
        Ok(Self { n, edges: e, connected })
    }

    /// Bitmask over the pairs in [`pair_list`] order.
    pub fn edge_mask(&self) -> u32 {
        let pairs = pair_list(self.n);
        self.edges
            .iter()
            .map(|e| 1u32 << pairs.iter().position(|p| p == e).unwrap())
            .fold(0, |a, b| a | b)
    }

    /// Adjacency lists, index `k - 1` for vertex `k`.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i - 1].push(j);
            adj[j - 1].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }
}

/// All pairs `(i, j)`, `1 <= i < j <= n`, lexicographic.
pub fn pair_list(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut components = n;
    for &(i, j) in edges {
        let (a, b) = (find(&mut parent, i - 1), find(&mut parent, j - 1));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}

/// Connected labeled graphs on `n` vertices, `2 <= n <= 5`, in order of
/// increasing edge bitmask.
pub fn enumerate_connected_graphs(n: usize) -> Result<Vec<LabeledGraph>> {
    if !(2..=5).contains(&n) {
        return Err(Error::Unsupported(format!(
            "connected graph enumeration supports 2 <= n <= 5, got {n}"
        )));
    }
    let pairs = pair_list(n);
    let mut out = Vec::new();
    for mask in 1u32..(1 << pairs.len()) {
        let edges: Vec<_> = (0..pairs.len()).filter(|k| mask >> k & 1 == 1).map(|k| pairs[k]).collect();
        if is_connected(n, &edges) {
            out.push(LabeledGraph { n, edges, connected: true });
        }
    }
    Ok(out)
}

/// Labeled trees on `n` vertices, `2 <= n <= 6`, decoded from all Prüfer
/// sequences.
pub fn enumerate_trees(n: usize) -> Result<Vec<LabeledGraph>> {
    if !(2..=6).contains(&n) {
        return Err(Error::Unsupported(format!("tree enumeration supports 2 <= n <= 6, got {n}")));
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut seq = Vec::with_capacity(len);
        let mut c = code;
        for _ in 0..len {
            seq.push(c % n + 1);
            c /= n;
        }
        out.push(LabeledGraph::new(n, prufer_decode(n, &seq))?);
    }
    Ok(out)
}

fn prufer_decode(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n + 1];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (1..=n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn connected_counts() {
        let counts: Vec<usize> = (2..=5).map(|n| enumerate_connected_graphs(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 4, 38, 728]);
        assert!(enumerate_connected_graphs(6).is_err());
        assert!(enumerate_connected_graphs(1).is_err());
    }

    #[test]
    fn cayley_counts_and_trees_are_connected_graphs() {
        for n in 2..=6 {
            let trees = enumerate_trees(n).unwrap();
            assert_eq!(trees.len(), n.pow(n as u32 - 2));
            let distinct: HashSet<_> = trees.iter().map(|t| t.edges.clone()).collect();
            assert_eq!(distinct.len(), trees.len());
            assert!(trees.iter().all(|t| t.connected && t.edges.len() == n - 1));
            if n <= 5 {
                let conn: HashSet<_> = enumerate_connected_graphs(n).unwrap().into_iter().map(|g| g.edges).collect();
                assert!(distinct.is_subset(&conn));
            }
        }
    }

    #[test]
    fn connectivity_flag() {
        assert!(!LabeledGraph::new(4, [(1, 2), (3, 4)]).unwrap().connected);
        assert!(LabeledGraph::new(3, [(2, 1), (3, 2)]).unwrap().connected);
        assert!(LabeledGraph::new(3, [(1, 4)]).is_err());
        let g = LabeledGraph::new(3, [(1, 3)]).unwrap();
        assert_eq!(g.edge_mask(), 0b010);
        assert_eq!(g.adjacency(), vec![vec![3], vec![], vec![1]]);
    }
}
