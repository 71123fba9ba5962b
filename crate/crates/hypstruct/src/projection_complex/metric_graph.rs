//! A small weighted metric graph with shortest paths, used as the finite
//! realization of quasi-trees of metric spaces.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Undirected graph with positive edge lengths and the shortest-path metric.
#[derive(Debug, Clone, Default)]
pub struct MetricGraph {
    pub labels: Vec<String>,
    adj: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize, f64)>,
}

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap by distance.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MetricGraph {
    pub fn new() -> Self {
        MetricGraph::default()
    }

    pub fn add_vertex(&mut self, label: impl Into<String>) -> usize {
        self.labels.push(label.into());
        self.adj.push(Vec::new());
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, length: f64) {
        assert!(length > 0.0, "edge lengths must be positive");
        assert!(u != v, "no self loops");
        self.adj[u].push((v, length));
        self.adj[v].push((u, length));
        self.edges.push((u.min(v), u.max(v), length));
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// Shortest-path distances from a source, with predecessor links.
    pub fn dijkstra(&self, source: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapItem {
            dist: 0.0,
            vertex: source,
        });
        while let Some(HeapItem { dist: d, vertex: u }) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = u;
                    heap.push(HeapItem {
                        dist: nd,
                        vertex: v,
                    });
                }
            }
        }
        (dist, parent)
    }

    /// All-pairs shortest-path distances (one Dijkstra per vertex).
    pub fn all_pairs(&self) -> Vec<Vec<f64>> {
        (0..self.vertex_count())
            .map(|v| self.dijkstra(v).0)
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return true;
        }
        let (dist, _) = self.dijkstra(0);
        dist.iter().all(|d| d.is_finite())
    }

    /// Shortest path from `source` to `target` as a vertex list, using the
    /// predecessor links of a Dijkstra run from `source`.
    pub fn shortest_path(&self, source: usize, target: usize) -> Option<Vec<usize>> {
        let (dist, parent) = self.dijkstra(source);
        if !dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while v != source {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }

    /// BFS reachability from `x` to `y` using only `allowed` vertices and
    /// edges not in `blocked_edge` (a single optional edge, by index pair).
    pub fn reachable_avoiding(
        &self,
        x: usize,
        y: usize,
        allowed: &[bool],
        blocked_edge: Option<(usize, usize)>,
    ) -> bool {
        if !allowed[x] || !allowed[y] {
            return false;
        }
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![x];
        seen[x] = true;
        while let Some(u) = stack.pop() {
            if u == y {
                return true;
            }
            for &(v, _) in &self.adj[u] {
                if seen[v] || !allowed[v] {
                    continue;
                }
                if let Some((a, b)) = blocked_edge {
                    if (u == a && v == b) || (u == b && v == a) {
                        continue;
                    }
                }
                seen[v] = true;
                stack.push(v);
            }
        }
        false
    }

    /// Deterministic DOT output with edge-length annotations.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("graph {name} {{\n"));
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(&format!("  v{i} [label=\"{label}\"];\n"));
        }
        let mut edges = self.edges.clone();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (u, v, w) in edges {
            out.push_str(&format!("  v{u} -- v{v} [label=\"{w:.4}\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the cycle graph `C_n` with unit edges (a test fixture for the
/// bottleneck criterion).
pub fn cycle_graph(n: usize) -> MetricGraph {
    let mut g = MetricGraph::new();
    for i in 0..n {
        g.add_vertex(format!("c{i}"));
    }
    for i in 0..n {
        g.add_edge(i, (i + 1) % n, 1.0);
    }
    g
}

/// Builds a path graph with unit edges.
pub fn path_graph(n: usize) -> MetricGraph {
    let mut g = MetricGraph::new();
    for i in 0..n {
        g.add_vertex(format!("p{i}"));
    }
    for i in 0..n.saturating_sub(1) {
        g.add_edge(i, i + 1, 1.0);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dijkstra_on_cycle() {
        let g = cycle_graph(12);
        let (dist, _) = g.dijkstra(0);
        assert_eq!(dist[6], 6.0);
        assert_eq!(dist[11], 1.0);
        assert!(g.is_connected());
    }

    #[test]
    fn shortest_path_recovers_route() {
        let g = path_graph(5);
        assert_eq!(g.shortest_path(0, 4).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn reachability_respects_removals() {
        let g = cycle_graph(6);
        let mut allowed = vec![true; 6];
        allowed[3] = false;
        // 0 to 4 must route the other way once 3 is removed.
        assert!(g.reachable_avoiding(0, 4, &allowed, None));
        allowed[5] = false;
        assert!(!g.reachable_avoiding(0, 4, &allowed, None));
    }
}
