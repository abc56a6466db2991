//! Undirected simple graphs with optional positive edge lengths.
//!
//! A [`Graph`] is immutable once built. Node IDs are dense integers
//! `0..node_count`, every edge is stored once in canonical `(u, v)` order with
//! `u < v`, and each node keeps a neighbor list sorted by neighbor ID.

mod distance;
mod generate;
mod parse;

pub use distance::{
    bounded_dijkstra_distances, truncated_distances, DistanceTable, DistanceWorkspace,
};
pub use generate::{generate_ba, generate_er, generate_ws};
pub use parse::{
    load_tu_collection, parse_edge_list, parse_edge_list_with_ids, parse_tu_collection,
    GraphCollection, ParseError,
};

use thiserror::Error;

pub type NodeId = usize;

/// Length assigned to every edge of an unweighted graph.
pub const UNIT_LENGTH: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({u}, {v}) has non-positive or non-finite length {length}")]
    BadLength { u: NodeId, v: NodeId, length: f64 },
    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("({0}, {1}) is not an edge")]
    NotAnEdge(NodeId, NodeId),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
}

/// Canonical edge record, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub length: f64,
}

/// One entry of a node's adjacency list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node: NodeId,
    pub length: f64,
    /// Index of the connecting edge in [`Graph::edges`].
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<Neighbor>>,
    edges: Vec<Edge>,
    unweighted: bool,
}

impl Graph {
    /// Builds a graph from `(u, v, length)` triples in any orientation.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut canonical = Vec::new();
        for (a, b, length) in edges {
            for node in [a, b] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { node, node_count });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !(length > 0.0 && length.is_finite()) {
                return Err(GraphError::BadLength { u, v, length });
            }
            canonical.push(Edge { u, v, length });
        }
        canonical.sort_by(|x, y| (x.u, x.v).cmp(&(y.u, y.v)));
        if let Some(w) = canonical.windows(2).find(|w| (w[0].u, w[0].v) == (w[1].u, w[1].v)) {
            return Err(GraphError::DuplicateEdge(w[0].u, w[0].v));
        }

        let mut adjacency = vec![Vec::new(); node_count];
        for (idx, e) in canonical.iter().enumerate() {
            adjacency[e.u].push(Neighbor { node: e.v, length: e.length, edge: idx });
            adjacency[e.v].push(Neighbor { node: e.u, length: e.length, edge: idx });
        }
        for list in &mut adjacency {
            list.sort_by_key(|n| n.node);
        }
        let unweighted = canonical.iter().all(|e| e.length == UNIT_LENGTH);
        Ok(Self { adjacency, edges: canonical, unweighted })
    }

    pub fn from_unweighted_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        Self::from_edges(node_count, edges.into_iter().map(|(u, v)| (u, v, UNIT_LENGTH)))
    }

    pub fn empty(node_count: usize) -> Self {
        Self { adjacency: vec![Vec::new(); node_count], edges: Vec::new(), unweighted: true }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, sorted by `(u, v)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: NodeId) -> &[Neighbor] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: NodeId) -> usize {
        self.adjacency[x].len()
    }

    /// True when every edge has length exactly 1.
    pub fn is_unweighted(&self) -> bool {
        self.unweighted
    }

    pub fn edge_index(&self, a: NodeId, b: NodeId) -> Option<usize> {
        if a >= self.node_count() || b >= self.node_count() {
            return None;
        }
        let list = &self.adjacency[a];
        list.binary_search_by_key(&b, |n| n.node).ok().map(|i| list[i].edge)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// Returns the graph with node `x` renamed to `perm[x]`.
    pub fn relabeled(&self, perm: &[NodeId]) -> Result<Self, GraphError> {
        assert_eq!(perm.len(), self.node_count(), "permutation length mismatch");
        Self::from_edges(
            self.node_count(),
            self.edges.iter().map(|e| (perm[e.u], perm[e.v], e.length)),
        )
    }

    /// Subgraph induced by the nodes with `keep[x] == true`, renumbered densely
    /// in increasing order. The second value maps old IDs to new ones.
    pub fn induced_subgraph(&self, keep: &[bool]) -> (Self, Vec<Option<NodeId>>) {
        assert_eq!(keep.len(), self.node_count(), "mask length mismatch");
        let mut map = vec![None; self.node_count()];
        let mut next = 0;
        for (x, &k) in keep.iter().enumerate() {
            if k {
                map[x] = Some(next);
                next += 1;
            }
        }
        let edges = self.edges.iter().filter_map(|e| match (map[e.u], map[e.v]) {
            (Some(a), Some(b)) => Some((a, b, e.length)),
            _ => None,
        });
        let sub = Self::from_edges(next, edges).expect("induced subgraph of a valid graph");
        (sub, map)
    }

    /// Full scan of the structural invariants. Used by tests and the CLI's
    /// consistency checks.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        for (x, list) in self.adjacency.iter().enumerate() {
            for w in list.windows(2) {
                if w[0].node >= w[1].node {
                    return Err(GraphError::DuplicateEdge(x, w[1].node));
                }
            }
            for n in list {
                if n.node == x {
                    return Err(GraphError::SelfLoop(x));
                }
                if !(n.length > 0.0 && n.length.is_finite()) {
                    return Err(GraphError::BadLength { u: x, v: n.node, length: n.length });
                }
                let back = self.adjacency[n.node]
                    .iter()
                    .find(|m| m.node == x)
                    .ok_or(GraphError::NotAnEdge(n.node, x))?;
                if back.length != n.length || back.edge != n.edge {
                    return Err(GraphError::NotAnEdge(n.node, x));
                }
            }
        }
        let total: usize = self.adjacency.iter().map(Vec::len).sum();
        if total != 2 * self.edges.len() {
            return Err(GraphError::InvalidParameter("adjacency/edge count mismatch".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_edges_and_sorted_adjacency() {
        let g = Graph::from_unweighted_edges(4, [(2, 0), (1, 0), (3, 2)]).unwrap();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (2, 3)]);
        let nbrs: Vec<_> = g.neighbors(0).iter().map(|n| n.node).collect();
        assert_eq!(nbrs, vec![1, 2]);
        assert!(g.is_unweighted());
        assert_eq!(g.edge_index(3, 2), Some(2));
        assert!(!g.has_edge(1, 3));
        g.check_invariants().unwrap();
    }

    #[test]
    fn rejects_invalid_edges() {
        assert_eq!(Graph::from_unweighted_edges(2, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Graph::from_unweighted_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            Graph::from_edges(2, [(0, 1, 0.0)]),
            Err(GraphError::BadLength { .. })
        ));
        assert!(matches!(
            Graph::from_unweighted_edges(2, [(0, 5)]),
            Err(GraphError::NodeOutOfRange { node: 5, node_count: 2 })
        ));
    }

    #[test]
    fn induced_subgraph_renumbers() {
        let g = Graph::from_unweighted_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let (sub, map) = g.induced_subgraph(&[false, true, true, true]);
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 2);
        assert_eq!(map, vec![None, Some(0), Some(1), Some(2)]);
    }
}
