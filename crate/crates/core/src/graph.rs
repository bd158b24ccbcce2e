//! Undirected interaction topology of the network.

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Undirected simple graph over nodes `0..n_nodes`.
///
/// Edges are stored normalized as `(min, max)` pairs; self-loops and
/// duplicate edges are rejected or collapsed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an explicit edge list.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::InvalidArgument(
                "graph must have at least one node".into(),
            ));
        }
        let mut normalized = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at node {i}")));
            }
            for v in [i, j] {
                if v >= n_nodes {
                    return Err(Error::VertexOutOfRange { vertex: v, n_nodes });
                }
            }
            normalized.insert((i.min(j), i.max(j)));
        }
        let edges: Vec<_> = normalized.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n_nodes,
            edges,
            adjacency,
        })
    }

    /// Path graph `0 - 1 - ... - n-1`.
    pub fn chain(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    /// 4-connected `rows x cols` lattice; node `(r, c)` has index `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "grid must have at least one row and column".into(),
            ));
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Normalized `(min, max)` edge pairs in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.check_vertex(v)?;
        Ok(&self.adjacency[v])
    }

    /// Hop distances from `source` to every node; `None` where unreachable.
    pub fn distances_from(&self, source: usize) -> Result<Vec<Option<usize>>> {
        self.check_vertex(source)?;
        let mut dist = vec![None; self.n_nodes];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let next = dist[v].expect("queued nodes have a distance") + 1;
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(next);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// Minimum number of edges between `i` and `j`; `None` if disconnected.
    pub fn hop_distance(&self, i: usize, j: usize) -> Result<Option<usize>> {
        self.check_vertex(j)?;
        Ok(self.distances_from(i)?[j])
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n_nodes {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n_nodes: self.n_nodes,
            });
        }
        Ok(())
    }
}
