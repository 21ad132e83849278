//! Static undirected graphs with the neighborhood and distance primitives the
//! testers rely on.
//!
//! Graphs are simple (at most one edge per pair) except that any vertex may
//! carry a single self-loop. A self-loop makes the vertex its own neighbor,
//! which under the 1-BP rule makes black absorbing at that vertex. Every
//! vertex must be incident to at least one edge.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

/// Set of vertex ids. Ops validate that ids are below the graph's vertex count.
pub type VertexSet = BTreeSet<u32>;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(u32, usize),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(u32, u32),
    #[error("vertex {0} has no incident edge")]
    SingletonVertex(u32),
    #[error("empty vertex set")]
    EmptySet,
    #[error("subset spans more than one connected component")]
    DisconnectedSubset,
    #[error("bad graph file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Undirected graph in compressed adjacency form. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    edge_count: usize,
    has_loop: Vec<bool>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.edge_count)
    }
}

impl Graph {
    /// Builds a graph from an undirected edge list. Each edge appears once;
    /// `(u, u)` is a self-loop. Rejects duplicates (in either orientation)
    /// and vertices with no incident edge.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, GraphError> {
        let mut sets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
        let mut edge_count = 0usize;
        for (u, v) in edges {
            if u as usize >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v as usize >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if !sets[u as usize].insert(v) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            if u != v && !sets[v as usize].insert(u) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            edge_count += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency = Vec::new();
        let mut has_loop = vec![false; n];
        offsets.push(0);
        for (v, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return Err(GraphError::SingletonVertex(v as u32));
            }
            has_loop[v] = set.contains(&(v as u32));
            adjacency.extend(set.iter().copied());
            offsets.push(adjacency.len());
        }
        Ok(Graph {
            n,
            offsets,
            adjacency,
            edge_count,
            has_loop,
        })
    }

    /// Path 0-1-..-(n-1). Requires n >= 2.
    pub fn path(n: usize) -> Self {
        assert!(n >= 2, "path needs at least two vertices");
        Self::from_edges(n, (0..n - 1).map(|i| (i as u32, i as u32 + 1))).unwrap()
    }

    /// Cycle on n vertices. Requires n >= 3.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least three vertices");
        Self::from_edges(n, (0..n).map(|i| (i as u32, ((i + 1) % n) as u32))).unwrap()
    }

    /// Complete graph on n vertices. Requires n >= 2.
    pub fn complete(n: usize) -> Self {
        assert!(n >= 2, "complete graph needs at least two vertices");
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, edges).unwrap()
    }

    /// Width x height grid; vertex (r, c) has id r * width + c.
    pub fn grid(width: usize, height: usize) -> Self {
        assert!(width * height >= 2, "grid needs at least two vertices");
        let id = |r: usize, c: usize| (r * width + c) as u32;
        let mut edges = Vec::new();
        for r in 0..height {
            for c in 0..width {
                if c + 1 < width {
                    edges.push((id(r, c), id(r, c + 1)));
                }
                if r + 1 < height {
                    edges.push((id(r, c), id(r + 1, c)));
                }
            }
        }
        Self::from_edges(width * height, edges).unwrap()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Number of edges, counting a self-loop as one edge.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> + '_ {
        0..self.n as u32
    }

    /// Adjacency slice, sorted ascending; contains v itself iff v has a
    /// self-loop. Panics on an out-of-range id.
    pub fn adj(&self, v: u32) -> &[u32] {
        let v = v as usize;
        assert!(v < self.n, "vertex {v} out of range");
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Degree of v. A self-loop contributes one.
    pub fn degree(&self, v: u32) -> usize {
        self.adj(v).len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n as u32).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_self_loop(&self, v: u32) -> bool {
        self.has_loop[v as usize]
    }

    pub fn all_self_looped(&self) -> bool {
        self.has_loop.iter().all(|&b| b)
    }

    /// Undirected edge list with u <= v, sorted; self-loops included once.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n as u32 {
            for &v in self.adj(u) {
                if u <= v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn check_vertex(&self, v: u32) -> Result<(), GraphError> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange(v, self.n))
        }
    }

    /// Open/closed neighborhood of v (closed exactly when v has a self-loop).
    pub fn neighbors(&self, v: u32) -> Result<VertexSet, GraphError> {
        self.check_vertex(v)?;
        Ok(self.adj(v).iter().copied().collect())
    }

    /// Union of the neighborhoods of the members of s.
    pub fn neighbor_set(&self, s: &VertexSet) -> Result<VertexSet, GraphError> {
        let mut out = VertexSet::new();
        for &v in s {
            self.check_vertex(v)?;
            out.extend(self.adj(v).iter().copied());
        }
        Ok(out)
    }

    /// Vertices adjacent to exactly one member of s.
    pub fn unique_neighbors(&self, s: &VertexSet) -> Result<VertexSet, GraphError> {
        let mut count = vec![0u32; self.n];
        for &v in s {
            self.check_vertex(v)?;
            for &u in self.adj(v) {
                count[u as usize] += 1;
            }
        }
        Ok(count
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(u, _)| u as u32)
            .collect())
    }

    /// Hop distances from the nearest source; None marks unreachable vertices.
    pub fn multi_source_distances(
        &self,
        sources: &VertexSet,
    ) -> Result<Vec<Option<u32>>, GraphError> {
        if sources.is_empty() {
            return Err(GraphError::EmptySet);
        }
        for &v in sources {
            self.check_vertex(v)?;
        }
        Ok(self.bfs(sources.iter().copied()).0)
    }

    /// Multi-source BFS; also reports which source each vertex is nearest to
    /// (ties broken toward the smallest source id by scan order).
    pub(crate) fn bfs(
        &self,
        sources: impl IntoIterator<Item = u32>,
    ) -> (Vec<Option<u32>>, Vec<Option<u32>>) {
        let mut dist = vec![None; self.n];
        let mut origin = vec![None; self.n];
        let mut queue = std::collections::VecDeque::new();
        for s in sources {
            if dist[s as usize].is_none() {
                dist[s as usize] = Some(0);
                origin[s as usize] = Some(s);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize].unwrap();
            for &w in self.adj(u) {
                if dist[w as usize].is_none() {
                    dist[w as usize] = Some(du + 1);
                    origin[w as usize] = origin[u as usize];
                    queue.push_back(w);
                }
            }
        }
        (dist, origin)
    }

    /// Weak diameter of a nonempty subset: the largest pairwise distance
    /// measured in the full graph. Errors if some pair is disconnected.
    pub fn weak_diameter(&self, subset: &VertexSet) -> Result<u32, GraphError> {
        if subset.is_empty() {
            return Err(GraphError::EmptySet);
        }
        for &v in subset {
            self.check_vertex(v)?;
        }
        let mut best = 0u32;
        for &v in subset {
            let (dist, _) = self.bfs([v]);
            for &u in subset {
                match dist[u as usize] {
                    Some(d) => best = best.max(d),
                    None => return Err(GraphError::DisconnectedSubset),
                }
            }
        }
        Ok(best)
    }

    /// Copy of the graph with a self-loop on every vertex. Idempotent.
    pub fn add_self_loops(&self) -> Graph {
        let mut edges = self.edges();
        for v in 0..self.n as u32 {
            if !self.has_loop[v as usize] {
                edges.push((v, v));
            }
        }
        Graph::from_edges(self.n, edges).unwrap()
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for v in 0..self.n as u32 {
            if seen[v as usize] {
                continue;
            }
            let (dist, _) = self.bfs([v]);
            let comp: Vec<u32> = (0..self.n as u32)
                .filter(|&u| dist[u as usize].is_some())
                .collect();
            for &u in &comp {
                seen[u as usize] = true;
            }
            out.push(comp);
        }
        out
    }

    /// Largest exact diameter over the connected components. Runs a BFS per
    /// vertex, so it is meant for moderate graph sizes.
    pub fn max_component_diameter(&self) -> u32 {
        let mut best = 0u32;
        for v in 0..self.n as u32 {
            let (dist, _) = self.bfs([v]);
            let ecc = dist.iter().filter_map(|d| *d).max().unwrap_or(0);
            best = best.max(ecc);
        }
        best
    }
}

/// Parses the text format: a `n m` header line, then m lines `u v`, one per
/// undirected edge (`u u` marks a self-loop). `#` starts a comment line.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| GraphError::Format("missing header".into()))?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| GraphError::Format("bad vertex count".into()))?;
    let m: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| GraphError::Format("bad edge count".into()))?;
    if it.next().is_some() {
        return Err(GraphError::Format("trailing tokens in header".into()));
    }
    let mut edges = Vec::with_capacity(m);
    for line in lines {
        let mut it = line.split_whitespace();
        let u: u32 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GraphError::Format(format!("bad edge line: {line}")))?;
        let v: u32 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GraphError::Format(format!("bad edge line: {line}")))?;
        if it.next().is_some() {
            return Err(GraphError::Format(format!("trailing tokens: {line}")));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(GraphError::Format(format!(
            "header says {m} edges, found {}",
            edges.len()
        )));
    }
    Graph::from_edges(n, edges)
}

/// Renders a graph in the format `parse_graph` accepts.
pub fn format_graph(g: &Graph) -> String {
    let mut out = String::new();
    let edges = g.edges();
    writeln!(out, "{} {}", g.vertex_count(), edges.len()).unwrap();
    for (u, v) in edges {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    fs::write(path, format_graph(g))?;
    Ok(())
}

/// Convenience constructor for tests and call sites with literal sets.
pub fn vset(ids: impl IntoIterator<Item = u32>) -> VertexSet {
    ids.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_on_path() {
        let g = Graph::path(3);
        assert_eq!(g.neighbors(1).unwrap(), vset([0, 2]));
        assert_eq!(g.neighbors(0).unwrap(), vset([1]));
    }

    #[test]
    fn neighbors_with_self_loop_include_self() {
        let g = Graph::from_edges(2, [(0, 1), (0, 0)]).unwrap();
        assert_eq!(g.neighbors(0).unwrap(), vset([0, 1]));
        assert!(g.has_self_loop(0));
        assert!(!g.has_self_loop(1));
    }

    #[test]
    fn neighbors_complete_graph() {
        let g = Graph::complete(4);
        assert_eq!(g.neighbors(2).unwrap(), vset([0, 1, 3]));
    }

    #[test]
    fn neighbor_set_path_endpoints() {
        let g = Graph::path(4);
        assert_eq!(g.neighbor_set(&vset([0, 3])).unwrap(), vset([1, 2]));
        assert_eq!(g.neighbor_set(&vset([])).unwrap(), vset([]));
    }

    #[test]
    fn neighbor_set_star_center() {
        // star: center 0, leaves 1..=3
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(g.neighbor_set(&vset([0])).unwrap(), vset([1, 2, 3]));
    }

    #[test]
    fn unique_neighbors_path() {
        // path a-b-c-d: d is adjacent to exactly one of {a, c}; b sees both.
        let g = Graph::path(4);
        assert_eq!(g.unique_neighbors(&vset([0, 2])).unwrap(), vset([3]));
        assert_eq!(g.unique_neighbors(&vset([])).unwrap(), vset([]));
    }

    #[test]
    fn unique_neighbors_four_cycle() {
        let g = Graph::cycle(4);
        assert_eq!(g.unique_neighbors(&vset([0])).unwrap(), vset([1, 3]));
    }

    #[test]
    fn multi_source_distances_path() {
        let g = Graph::path(5);
        let d = g.multi_source_distances(&vset([0])).unwrap();
        assert_eq!(d, vec![Some(0), Some(1), Some(2), Some(3), Some(4)]);
    }

    #[test]
    fn multi_source_distances_two_sources() {
        let g = Graph::path(5);
        let d = g.multi_source_distances(&vset([0, 4])).unwrap();
        assert_eq!(d, vec![Some(0), Some(1), Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn multi_source_distances_disconnected_sentinel() {
        // two disjoint edges
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let d = g.multi_source_distances(&vset([0])).unwrap();
        assert_eq!(d, vec![Some(0), Some(1), None, None]);
    }

    #[test]
    fn multi_source_distances_empty_sources_rejected() {
        let g = Graph::path(3);
        assert!(matches!(
            g.multi_source_distances(&vset([])),
            Err(GraphError::EmptySet)
        ));
    }

    #[test]
    fn weak_diameter_path_and_cycle() {
        let g = Graph::path(5);
        assert_eq!(g.weak_diameter(&vset([0, 1, 2, 3, 4])).unwrap(), 4);
        let c = Graph::cycle(4);
        assert_eq!(c.weak_diameter(&vset([0, 2])).unwrap(), 2);
    }

    #[test]
    fn weak_diameter_measures_through_outside_vertices() {
        // C6 antipodal pair: the connecting path runs through vertices
        // outside the subset, and the weak diameter is still 3.
        let g = Graph::cycle(6);
        assert_eq!(g.weak_diameter(&vset([0, 3])).unwrap(), 3);
    }

    #[test]
    fn weak_diameter_disconnected_subset_rejected() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            g.weak_diameter(&vset([0, 2])),
            Err(GraphError::DisconnectedSubset)
        ));
    }

    #[test]
    fn add_self_loops_adds_n_edges_and_degrees() {
        let g = Graph::path(4);
        let gl = g.add_self_loops();
        assert_eq!(gl.edge_count(), g.edge_count() + 4);
        for v in 0..4 {
            assert_eq!(gl.degree(v), g.degree(v) + 1);
            assert!(gl.has_self_loop(v));
        }
    }

    #[test]
    fn add_self_loops_idempotent() {
        let g = Graph::path(4).add_self_loops();
        let gg = g.add_self_loops();
        assert_eq!(g.edge_count(), gg.edge_count());
        assert_eq!(g.edges(), gg.edges());
    }

    #[test]
    fn duplicate_edges_rejected() {
        assert!(matches!(
            Graph::from_edges(2, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(_, _))
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 1), (0, 1)]),
            Err(GraphError::DuplicateEdge(_, _))
        ));
    }

    #[test]
    fn singleton_vertices_rejected() {
        assert!(matches!(
            Graph::from_edges(3, [(0, 1)]),
            Err(GraphError::SingletonVertex(2))
        ));
    }

    #[test]
    fn graph_file_round_trip() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (2, 2)]).unwrap();
        let text = format_graph(&g);
        let h = parse_graph(&text).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn graph_file_comments_and_validation() {
        let g = parse_graph("# toy\n2 1\n0 1\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert!(parse_graph("2 2\n0 1\n").is_err());
        assert!(parse_graph("2 2\n0 1\n1 0\n").is_err());
        assert!(parse_graph("2 1\n0 3\n").is_err());
    }

    #[test]
    fn components_and_diameter() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(g.connected_components(), vec![vec![0, 1, 2], vec![3, 4]]);
        assert_eq!(g.max_component_diameter(), 2);
    }
}
