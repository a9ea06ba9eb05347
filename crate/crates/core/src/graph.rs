use crate::encoding::bits::words_for;
use crate::error::{Error, Result};

/// Immutable simple undirected graph on vertices `0..n`.
///
/// Edges are stored as `(u, v)` with `u < v`, sorted, and their position in
/// that order is the edge's column id. Besides sorted neighbour lists the graph
/// keeps a dense adjacency bit matrix, which the cover repair and coverage
/// objective scan word by word.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    neighbors: Vec<Vec<u32>>,
    incident: Vec<Vec<u32>>,
    stride: usize,
    rows: Vec<u64>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph from an edge list. Self-loops, out-of-range endpoints
    /// and repeated edges are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            list.push((u.min(v) as u32, u.max(v) as u32));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Graph::from_sorted_unique(n, list))
    }

    fn from_sorted_unique(n: usize, edges: Vec<(u32, u32)>) -> Self {
        let stride = words_for(n);
        let mut neighbors = vec![Vec::new(); n];
        let mut incident = vec![Vec::new(); n];
        let mut rows = vec![0u64; n * stride];
        for (id, &(u, v)) in edges.iter().enumerate() {
            let (u, v) = (u as usize, v as usize);
            neighbors[u].push(v as u32);
            incident[u].push(id as u32);
            neighbors[v].push(u as u32);
            incident[v].push(id as u32);
            rows[u * stride + v / 64] |= 1 << (v % 64);
            rows[v * stride + u / 64] |= 1 << (u % 64);
        }
        for v in 0..n {
            let mut pairs: Vec<(u32, u32)> = neighbors[v]
                .iter()
                .copied()
                .zip(incident[v].iter().copied())
                .collect();
            pairs.sort_unstable();
            neighbors[v] = pairs.iter().map(|p| p.0).collect();
            incident[v] = pairs.iter().map(|p| p.1).collect();
        }
        Graph {
            n,
            edges,
            neighbors,
            incident,
            stride,
            rows,
        }
    }

    pub fn empty(n: usize) -> Self {
        Graph::from_sorted_unique(n, Vec::new())
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[v]
    }

    /// Edge ids incident to `v`, aligned with [`neighbors`](Self::neighbors).
    pub fn incident_edges(&self, v: usize) -> &[u32] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.rows[u * self.stride + v / 64] >> (v % 64) & 1 == 1
    }

    /// Column id of edge `{u, v}`.
    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n {
            return None;
        }
        self.neighbors[u]
            .binary_search(&(v as u32))
            .ok()
            .map(|k| self.incident[u][k] as usize)
    }

    /// Neighbourhood of `v` as a bit row of `ceil(n/64)` words.
    #[inline]
    pub fn adjacency_row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.stride..(v + 1) * self.stride]
    }

    /// Same vertex set, edge `{u, v}` present iff absent here.
    pub fn complement(&self) -> Graph {
        let mut edges = Vec::with_capacity((self.n * self.n.saturating_sub(1) / 2).saturating_sub(self.edges.len()));
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    edges.push((u as u32, v as u32));
                }
            }
        }
        Graph::from_sorted_unique(self.n, edges)
    }
}
