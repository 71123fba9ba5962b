//! The projection-complex machinery: projection distances, the axioms
//! (P0)-(P2), the pair set `H(X,Z)` and modified distances `d_Y`, the
//! projection graph `P_K`, the finite quasi-tree of metric spaces `C_K`, and
//! the bottleneck quasi-tree criterion.

mod metric_graph;

pub use metric_graph::{cycle_graph, path_graph, MetricGraph};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PcError {
    #[error("missing projection of domain {of} on domain {on}")]
    MissingProjection { on: usize, of: usize },
    #[error("resolution delta = {delta} is coarser than theta/4 = {max}")]
    ResolutionTooCoarse { delta: f64, max: f64 },
    #[error("input graph is disconnected")]
    DisconnectedInput,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain index {0} out of range")]
    BadDomain(usize),
}

/// A finite family of lines-with-projections: the data `(Y, C(Y), π_Y)`.
/// Each `C(Y)` is a line with real coordinates; `π_Y(X)` is a finite
/// nonempty point set in `C(Y)` for every ordered pair `X ≠ Y`.
#[derive(Debug, Clone)]
pub struct DomainFamily {
    pub theta: f64,
    pub labels: Vec<String>,
    projections: HashMap<(usize, usize), Vec<f64>>,
}

impl DomainFamily {
    pub fn new(theta: f64, labels: Vec<String>) -> Self {
        DomainFamily {
            theta,
            labels,
            projections: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Sets `π_on(of)`.
    pub fn set_projection(&mut self, on: usize, of: usize, mut points: Vec<f64>) {
        assert!(on != of, "no self projections");
        assert!(!points.is_empty(), "projection sets are nonempty");
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.projections.insert((on, of), points);
    }

    pub fn projection(&self, on: usize, of: usize) -> Result<&[f64], PcError> {
        self.projections
            .get(&(on, of))
            .map(|v| v.as_slice())
            .ok_or(PcError::MissingProjection { on, of })
    }

    /// Verifies that every ordered pair has a projection set.
    pub fn validate(&self) -> Result<(), PcError> {
        for on in 0..self.len() {
            for of in 0..self.len() {
                if on != of {
                    self.projection(on, of)?;
                }
            }
        }
        Ok(())
    }

    pub fn to_wire(&self) -> DomainFamilyWire {
        let mut projections: Vec<ProjectionWire> = self
            .projections
            .iter()
            .map(|(&(on, of), points)| ProjectionWire {
                on: self.labels[on].clone(),
                of: self.labels[of].clone(),
                points: points.clone(),
            })
            .collect();
        projections.sort_by(|a, b| (&a.on, &a.of).cmp(&(&b.on, &b.of)));
        DomainFamilyWire {
            theta: self.theta,
            domains: self
                .labels
                .iter()
                .map(|id| DomainWire {
                    id: id.clone(),
                    line: true,
                })
                .collect(),
            projections,
        }
    }

    pub fn from_wire(wire: &DomainFamilyWire) -> Result<Self, PcError> {
        let labels: Vec<String> = wire.domains.iter().map(|d| d.id.clone()).collect();
        let index: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if index.len() != labels.len() {
            return Err(PcError::InvalidParameter("duplicate domain ids".into()));
        }
        let mut fam = DomainFamily::new(wire.theta, labels);
        for p in &wire.projections {
            let on = *index
                .get(p.on.as_str())
                .ok_or_else(|| PcError::InvalidParameter(format!("unknown id {}", p.on)))?;
            let of = *index
                .get(p.of.as_str())
                .ok_or_else(|| PcError::InvalidParameter(format!("unknown id {}", p.of)))?;
            fam.set_projection(on, of, p.points.clone());
        }
        fam.validate()?;
        Ok(fam)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainFamilyWire {
    pub theta: f64,
    pub domains: Vec<DomainWire>,
    pub projections: Vec<ProjectionWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainWire {
    pub id: String,
    pub line: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionWire {
    pub on: String,
    pub of: String,
    pub points: Vec<f64>,
}

fn diam_union(a: &[f64], b: &[f64]) -> f64 {
    let lo = a[0].min(b[0]);
    let hi = a[a.len() - 1].max(b[b.len() - 1]);
    hi - lo
}

/// The projection distance `d^π_Y(X, Z) = diam(π_Y(X) ∪ π_Y(Z))`.
pub fn dpi(fam: &DomainFamily, y: usize, x: usize, z: usize) -> Result<f64, PcError> {
    if y == x || y == z {
        return Err(PcError::InvalidParameter(
            "dpi requires X, Z distinct from Y".into(),
        ));
    }
    Ok(diam_union(fam.projection(y, x)?, fam.projection(y, z)?))
}

/// Witnessed outcomes of the axiom sweep: (P0) all projection diameters are
/// at most θ, (P1) at most one of the three projection distances of a triple
/// exceeds θ, (P2) the per-pair count of domains seeing a large distance.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub theta_used: f64,
    /// (on, of, diameter) with diameter > θ.
    pub p0_violations: Vec<(usize, usize, f64)>,
    /// Triples (x, y, z) with at least two large projection distances.
    pub p1_violations: Vec<(usize, usize, usize)>,
    /// For each pair (x, z) with x < z: |{Y : d^π_Y(x, z) > θ}|.
    pub p2_counts: Vec<((usize, usize), usize)>,
}

impl AxiomReport {
    pub fn clean(&self) -> bool {
        self.p0_violations.is_empty() && self.p1_violations.is_empty()
    }

    pub fn max_p2_count(&self) -> usize {
        self.p2_counts.iter().map(|&(_, c)| c).max().unwrap_or(0)
    }
}

/// Sweeps (P0), (P1), (P2) over the whole family.
pub fn verify_axioms(fam: &DomainFamily) -> Result<AxiomReport, PcError> {
    fam.validate()?;
    let n = fam.len();
    let theta = fam.theta;
    let mut p0 = Vec::new();
    for on in 0..n {
        for of in 0..n {
            if on == of {
                continue;
            }
            let pts = fam.projection(on, of)?;
            let diam = pts[pts.len() - 1] - pts[0];
            if diam > theta {
                p0.push((on, of, diam));
            }
        }
    }
    let mut p1 = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            for z in (y + 1)..n {
                let mut large = 0;
                if dpi(fam, x, y, z)? > theta {
                    large += 1;
                }
                if dpi(fam, y, x, z)? > theta {
                    large += 1;
                }
                if dpi(fam, z, x, y)? > theta {
                    large += 1;
                }
                if large > 1 {
                    p1.push((x, y, z));
                }
            }
        }
    }
    let mut p2 = Vec::new();
    for x in 0..n {
        for z in (x + 1)..n {
            let count = (0..n)
                .filter(|&y| y != x && y != z)
                .filter(|&y| dpi(fam, y, x, z).map(|d| d > theta).unwrap_or(false))
                .count();
            p2.push(((x, z), count));
        }
    }
    Ok(AxiomReport {
        theta_used: theta,
        p0_violations: p0,
        p1_violations: p1,
        p2_counts: p2,
    })
}

/// The pair set `H(X, Z)`: ordered pairs `(X', Z')` with `X' ≠ Z'` satisfying
/// one of the four defining clauses (both far projections, `X = X'` with the
/// far condition at `Z`, symmetrically, or the pair itself).
pub fn hset(fam: &DomainFamily, x: usize, z: usize) -> Result<Vec<(usize, usize)>, PcError> {
    if x == z {
        return Err(PcError::InvalidParameter("H(X,Z) needs X ≠ Z".into()));
    }
    let n = fam.len();
    let two_theta = 2.0 * fam.theta;
    let mut out = Vec::new();
    for xp in 0..n {
        for zp in 0..n {
            if xp == zp {
                continue;
            }
            let selected = if (xp, zp) == (x, z) {
                true
            } else if xp == x && zp != z {
                dpi(fam, z, x, zp)? > two_theta
            } else if zp == z && xp != x {
                dpi(fam, x, xp, z)? > two_theta
            } else if xp != x && xp != z && zp != x && zp != z {
                dpi(fam, x, xp, zp)? > two_theta && dpi(fam, z, xp, zp)? > two_theta
            } else {
                false
            };
            if selected {
                out.push((xp, zp));
            }
        }
    }
    Ok(out)
}

/// The modified distance `d_Y(X, Z)`: zero when `Y` occurs in a pair of
/// `H(X, Z)`, otherwise the infimum of `d^π_Y` over the pairs. Always at
/// most `d^π_Y(X, Z)` since `(X, Z) ∈ H(X, Z)`.
pub fn modified_distance(fam: &DomainFamily, y: usize, x: usize, z: usize) -> Result<f64, PcError> {
    if y == x || y == z {
        return Err(PcError::InvalidParameter("d_Y needs Y ∉ {X, Z}".into()));
    }
    let h = hset(fam, x, z)?;
    modified_distance_with_h(fam, y, &h)
}

fn modified_distance_with_h(
    fam: &DomainFamily,
    y: usize,
    h: &[(usize, usize)],
) -> Result<f64, PcError> {
    if h.iter().any(|&(a, b)| a == y || b == y) {
        return Ok(0.0);
    }
    let mut inf = f64::INFINITY;
    for &(a, b) in h {
        inf = inf.min(dpi(fam, y, a, b)?);
    }
    Ok(inf)
}

/// The projection graph `P_K`: vertices are the domains, and `X, Z` are
/// joined exactly when `Y_K(X, Z) = {Y : d_Y(X, Z) > K}` is empty.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionGraph {
    pub k: f64,
    pub domain_count: usize,
    pub edges: Vec<(usize, usize)>,
}

pub fn build_projection_graph(fam: &DomainFamily, k: f64) -> Result<ProjectionGraph, PcError> {
    if k <= 0.0 {
        return Err(PcError::InvalidParameter("K must be positive".into()));
    }
    fam.validate()?;
    let n = fam.len();
    let mut edges = Vec::new();
    for x in 0..n {
        for z in (x + 1)..n {
            let h = hset(fam, x, z)?;
            let mut separated = false;
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                if modified_distance_with_h(fam, y, &h)? > k {
                    separated = true;
                    break;
                }
            }
            if !separated {
                edges.push((x, z));
            }
        }
    }
    Ok(ProjectionGraph {
        k,
        domain_count: n,
        edges,
    })
}

impl ProjectionGraph {
    pub fn has_edge(&self, x: usize, z: usize) -> bool {
        let key = (x.min(z), x.max(z));
        self.edges.iter().any(|&e| e == key)
    }

    pub fn is_connected(&self) -> bool {
        if self.domain_count == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.domain_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.domain_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_dot(&self, fam: &DomainFamily) -> String {
        let mut out = format!("graph projection_graph {{\n  // K = {:.4}\n", self.k);
        for (i, label) in fam.labels.iter().enumerate() {
            out.push_str(&format!("  v{i} [label=\"{label}\"];\n"));
        }
        let mut edges = self.edges.clone();
        edges.sort_unstable();
        for (u, v) in edges {
            out.push_str(&format!("  v{u} -- v{v};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// The finite quasi-tree of metric spaces: discretized copies of each line
/// `C(Y)` (grid step `delta`, truncated to the span of the projection points
/// plus a `10·θ` guard) joined by bridge edges of length `L` between mutual
/// projection points of `P_K`-adjacent domains.
pub struct QuasiTreeOfSpaces {
    pub graph: MetricGraph,
    pub k: f64,
    pub l: f64,
    pub delta: f64,
    pub domain_of_vertex: Vec<usize>,
    pub coord_of_vertex: Vec<f64>,
    /// One bridge (vertex pair) per ordered projection-point pair.
    pub bridges: Vec<(usize, usize)>,
    point_index: HashMap<usize, Vec<usize>>,
}

impl QuasiTreeOfSpaces {
    /// The vertex of a domain's line nearest to a coordinate.
    pub fn vertex_at(&self, domain: usize, coord: f64) -> Option<usize> {
        self.point_index.get(&domain).and_then(|vs| {
            vs.iter()
                .copied()
                .min_by(|&a, &b| {
                    let da = (self.coord_of_vertex[a] - coord).abs();
                    let db = (self.coord_of_vertex[b] - coord).abs();
                    da.partial_cmp(&db).unwrap()
                })
        })
    }

    pub fn to_dot(&self) -> String {
        self.graph.to_dot("quasi_tree")
    }
}

pub fn build_quasi_tree(
    fam: &DomainFamily,
    pg: &ProjectionGraph,
    l: f64,
    delta: f64,
) -> Result<QuasiTreeOfSpaces, PcError> {
    if delta <= 0.0 || l <= 0.0 {
        return Err(PcError::InvalidParameter("delta and L must be positive".into()));
    }
    if delta > fam.theta / 4.0 {
        return Err(PcError::ResolutionTooCoarse {
            delta,
            max: fam.theta / 4.0,
        });
    }
    fam.validate()?;
    let n = fam.len();
    let mut graph = MetricGraph::new();
    let mut domain_of_vertex = Vec::new();
    let mut coord_of_vertex: Vec<f64> = Vec::new();
    let mut point_index: HashMap<usize, Vec<usize>> = HashMap::new();
    for y in 0..n {
        let mut coords: Vec<f64> = Vec::new();
        for x in 0..n {
            if x != y {
                coords.extend_from_slice(fam.projection(y, x)?);
            }
        }
        // A domain with no incoming projections (n = 1) keeps a symmetric
        // window around the origin.
        let (span_lo, span_hi) = if coords.is_empty() {
            (0.0, 0.0)
        } else {
            (
                coords.iter().cloned().fold(f64::INFINITY, f64::min),
                coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        let lo = span_lo - 10.0 * fam.theta;
        let hi = span_hi + 10.0 * fam.theta;
        let mut c = lo;
        while c < hi {
            coords.push(c);
            c += delta;
        }
        coords.push(hi);
        coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
        coords.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut prev: Option<usize> = None;
        for &c in &coords {
            let v = graph.add_vertex(format!("{}:{:.3}", fam.labels[y], c));
            domain_of_vertex.push(y);
            coord_of_vertex.push(c);
            point_index.entry(y).or_default().push(v);
            if let Some(p) = prev {
                let w = c - coord_of_vertex[p];
                if w > 0.0 {
                    graph.add_edge(p, v, w);
                }
            }
            prev = Some(v);
        }
    }
    // Nearest-vertex lookup on a domain's (sorted) line.
    let nearest = |domain: usize, coord: f64| -> usize {
        let vs = &point_index[&domain];
        *vs.iter()
            .min_by(|&&a, &&b| {
                let da = (coord_of_vertex[a] - coord).abs();
                let db = (coord_of_vertex[b] - coord).abs();
                da.partial_cmp(&db).unwrap()
            })
            .expect("domain line is nonempty")
    };
    let mut bridges = Vec::new();
    for &(x, z) in &pg.edges {
        for &p in fam.projection(x, z)? {
            for &q in fam.projection(z, x)? {
                let u = nearest(x, p);
                let v = nearest(z, q);
                debug_assert!((coord_of_vertex[u] - p).abs() < 1e-6);
                debug_assert!((coord_of_vertex[v] - q).abs() < 1e-6);
                graph.add_edge(u, v, l);
                bridges.push((u, v));
            }
        }
    }
    Ok(QuasiTreeOfSpaces {
        graph,
        k: pg.k,
        l,
        delta,
        domain_of_vertex,
        coord_of_vertex,
        bridges,
        point_index,
    })
}

/// Location of a geodesic midpoint in the graph.
#[derive(Debug, Clone, Serialize)]
pub enum MidpointLoc {
    Vertex(usize),
    Edge { a: usize, b: usize, offset: f64 },
}

/// A witnessed failure of the bottleneck criterion at some Δ: a vertex pair
/// whose midpoint ball can be avoided by the recorded detour path.
#[derive(Debug, Clone, Serialize)]
pub struct BottleneckFailure {
    pub x: usize,
    pub y: usize,
    pub midpoint: MidpointLoc,
    pub detour: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct BottleneckReport {
    /// The minimal passing Δ (by bisection), present when the criterion
    /// passes at the queried Δ.
    pub delta_pass: Option<f64>,
    pub queried_delta: f64,
    pub failures: Vec<BottleneckFailure>,
}

struct PairContext<'g> {
    graph: &'g MetricGraph,
    dist: Vec<Vec<f64>>,
    parent: Vec<Vec<usize>>,
}

impl<'g> PairContext<'g> {
    fn new(graph: &'g MetricGraph) -> Result<Self, PcError> {
        if graph.vertex_count() == 0 {
            return Err(PcError::InvalidParameter("empty graph".into()));
        }
        let mut dist = Vec::with_capacity(graph.vertex_count());
        let mut parent = Vec::with_capacity(graph.vertex_count());
        for v in 0..graph.vertex_count() {
            let (d, p) = graph.dijkstra(v);
            if d.iter().any(|x| !x.is_finite()) {
                return Err(PcError::DisconnectedInput);
            }
            dist.push(d);
            parent.push(p);
        }
        Ok(PairContext {
            graph,
            dist,
            parent,
        })
    }

    fn diameter(&self) -> f64 {
        self.dist
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max)
    }

    /// Midpoint of the canonical shortest path from x to y.
    fn midpoint(&self, x: usize, y: usize) -> MidpointLoc {
        let half = self.dist[x][y] / 2.0;
        // Walk y -> x along the parent links of the Dijkstra tree rooted at x.
        let mut v = y;
        while v != x {
            let u = self.parent[x][v];
            // Edge (u, v) with d(x,u) ≤ d(x,v).
            if (self.dist[x][u] - half).abs() < 1e-12 {
                return MidpointLoc::Vertex(u);
            }
            if self.dist[x][u] < half && half < self.dist[x][v] {
                return MidpointLoc::Edge {
                    a: u,
                    b: v,
                    offset: half - self.dist[x][u],
                };
            }
            v = u;
        }
        MidpointLoc::Vertex(x)
    }

    /// Distance from every vertex to the midpoint.
    fn dist_to_midpoint(&self, mid: &MidpointLoc) -> Vec<f64> {
        match *mid {
            MidpointLoc::Vertex(z) => self.dist[z].clone(),
            MidpointLoc::Edge { a, b, offset } => {
                let w = self
                    .graph
                    .neighbors(a)
                    .iter()
                    .filter(|&&(v, _)| v == b)
                    .map(|&(_, w)| w)
                    .fold(f64::INFINITY, f64::min);
                (0..self.graph.vertex_count())
                    .map(|v| (self.dist[a][v] + offset).min(self.dist[b][v] + (w - offset)))
                    .collect()
            }
        }
    }

    /// Checks every vertex pair at a fixed Δ; returns the failures (up to
    /// `max_failures`, with detour witnesses).
    fn sweep(&self, delta: f64, max_failures: usize) -> Vec<BottleneckFailure> {
        let n = self.graph.vertex_count();
        let mut failures = Vec::new();
        for x in 0..n {
            for y in (x + 1)..n {
                let half = self.dist[x][y] / 2.0;
                if half <= delta {
                    // The Δ-ball around the midpoint contains x and y.
                    continue;
                }
                let mid = self.midpoint(x, y);
                let dz = self.dist_to_midpoint(&mid);
                let allowed: Vec<bool> = dz.iter().map(|&d| d > delta).collect();
                let blocked = match mid {
                    MidpointLoc::Edge { a, b, .. } => Some((a, b)),
                    MidpointLoc::Vertex(_) => None,
                };
                if self.graph.reachable_avoiding(x, y, &allowed, blocked) {
                    let detour = self
                        .detour_path(x, y, &allowed, blocked)
                        .unwrap_or_default();
                    failures.push(BottleneckFailure {
                        x,
                        y,
                        midpoint: mid,
                        detour,
                    });
                    if failures.len() >= max_failures {
                        return failures;
                    }
                }
            }
        }
        failures
    }

    fn detour_path(
        &self,
        x: usize,
        y: usize,
        allowed: &[bool],
        blocked: Option<(usize, usize)>,
    ) -> Option<Vec<usize>> {
        let n = self.graph.vertex_count();
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([x]);
        seen[x] = true;
        while let Some(u) = queue.pop_front() {
            if u == y {
                let mut path = vec![y];
                let mut v = y;
                while v != x {
                    v = prev[v];
                    path.push(v);
                }
                path.reverse();
                return Some(path);
            }
            for &(v, _) in self.graph.neighbors(u) {
                if seen[v] || !allowed[v] {
                    continue;
                }
                if let Some((a, b)) = blocked {
                    if (u == a && v == b) || (u == b && v == a) {
                        continue;
                    }
                }
                seen[v] = true;
                prev[v] = u;
                queue.push_back(v);
            }
        }
        None
    }
}

/// Manning's bottleneck criterion on a finite metric graph: for every vertex
/// pair, every path must meet the closed Δ-ball around the midpoint of a
/// shortest path. When the check passes at the queried Δ, the minimal
/// passing Δ (up to 1% bisection resolution) is reported.
pub fn bottleneck_check(graph: &MetricGraph, delta: f64) -> Result<BottleneckReport, PcError> {
    let ctx = PairContext::new(graph)?;
    let failures = ctx.sweep(delta, 5);
    if !failures.is_empty() {
        return Ok(BottleneckReport {
            delta_pass: None,
            queried_delta: delta,
            failures,
        });
    }
    // Bisect downward for the minimal passing Δ.
    let mut hi = delta;
    let mut lo = 0.0f64;
    if ctx.sweep(0.0, 1).is_empty() {
        return Ok(BottleneckReport {
            delta_pass: Some(0.0),
            queried_delta: delta,
            failures: Vec::new(),
        });
    }
    let tol = (delta * 0.01).max(1e-4);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ctx.sweep(mid, 1).is_empty() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BottleneckReport {
        delta_pass: Some(hi),
        queried_delta: delta,
        failures: Vec::new(),
    })
}

/// The minimal passing Δ for a connected graph (always at most half the
/// diameter).
pub fn minimal_bottleneck(graph: &MetricGraph) -> Result<f64, PcError> {
    let ctx = PairContext::new(graph)?;
    let report = bottleneck_check(graph, ctx.diameter() / 2.0 + 1e-9)?;
    Ok(report.delta_pass.expect("half-diameter always passes"))
}

/// An isometry of a line: `x ↦ ±x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIsometry {
    pub flip: bool,
    pub offset: f64,
}

impl LineIsometry {
    pub fn apply(&self, x: f64) -> f64 {
        if self.flip {
            -x + self.offset
        } else {
            x + self.offset
        }
    }

    pub fn compose(&self, inner: &LineIsometry) -> LineIsometry {
        // self(inner(x)) = ±(±x + c_inner) + c_self
        LineIsometry {
            flip: self.flip != inner.flip,
            offset: self.apply(inner.offset),
        }
    }
}

/// An action of sampled group elements on the family: a (partial) label
/// permutation and the per-domain line isometries `F_g^X: C(X) → C(g·X)`.
pub struct FamilyAction<E> {
    pub label_map: Box<dyn Fn(&E, usize) -> Option<usize>>,
    pub domain_map: Box<dyn Fn(&E, usize) -> LineIsometry>,
    pub compose: Box<dyn Fn(&E, &E) -> E>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    /// (x, description) witnesses for failed cocycle compositions.
    pub cocycle_failures: Vec<String>,
    /// Witnesses for failed projection equivariance.
    pub equivariance_failures: Vec<String>,
}

impl CompatibilityReport {
    pub fn pass(&self) -> bool {
        self.cocycle_failures.is_empty() && self.equivariance_failures.is_empty()
    }
}

/// Checks the cocycle rule `F_h^{g(X)} ∘ F_g^X = F_{hg}^X` and projection
/// equivariance `π_{g(Y)}(g(X)) = F_g^Y(π_Y(X))` on the sampled elements.
pub fn verify_group_compatibility<E>(
    fam: &DomainFamily,
    action: &FamilyAction<E>,
    samples: &[(E, E)],
    tol: f64,
) -> Result<CompatibilityReport, PcError> {
    let mut cocycle_failures = Vec::new();
    let mut equivariance_failures = Vec::new();
    for (g, h) in samples {
        let hg = (action.compose)(h, g);
        for x in 0..fam.len() {
            // Cocycle: F_h^{g(X)} ∘ F_g^X = F_{hg}^X wherever defined.
            if let Some(gx) = (action.label_map)(g, x) {
                let lhs = (action.domain_map)(h, gx).compose(&(action.domain_map)(g, x));
                let rhs = (action.domain_map)(&hg, x);
                if lhs.flip != rhs.flip || (lhs.offset - rhs.offset).abs() > tol {
                    cocycle_failures.push(format!(
                        "cocycle mismatch at domain {x}: {lhs:?} vs {rhs:?}"
                    ));
                }
            }
        }
        for y in 0..fam.len() {
            for x in 0..fam.len() {
                if x == y {
                    continue;
                }
                let (gx, gy) = match ((action.label_map)(g, x), (action.label_map)(g, y)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue,
                };
                let f = (action.domain_map)(g, y);
                let mut image: Vec<f64> =
                    fam.projection(y, x)?.iter().map(|&p| f.apply(p)).collect();
                image.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let target = fam.projection(gy, gx)?;
                let matches = image.len() == target.len()
                    && image
                        .iter()
                        .zip(target.iter())
                        .all(|(a, b)| (a - b).abs() <= tol);
                if !matches {
                    equivariance_failures.push(format!(
                        "projection equivariance fails: pi_{gy}({gx}) != F({y};{x})"
                    ));
                }
            }
        }
    }
    Ok(CompatibilityReport {
        cocycle_failures,
        equivariance_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two domains with single-point projections.
    fn two_domain_family() -> DomainFamily {
        let mut fam = DomainFamily::new(1.0, vec!["A".into(), "B".into()]);
        fam.set_projection(0, 1, vec![0.0]);
        fam.set_projection(1, 0, vec![0.0]);
        fam
    }

    /// A chain-like synthetic family: domain i sees earlier domains at -1 and
    /// later domains at +1, so consecutive domains are close and distant ones
    /// are separated by everything between.
    fn chain_family(n: usize, spread: f64) -> DomainFamily {
        let labels = (0..n).map(|i| format!("L{i}")).collect();
        let mut fam = DomainFamily::new(1.0, labels);
        for on in 0..n {
            for of in 0..n {
                if on == of {
                    continue;
                }
                let p = if of < on { -spread } else { spread };
                fam.set_projection(on, of, vec![p]);
            }
        }
        fam
    }

    #[test]
    fn dpi_basics() {
        let mut fam = DomainFamily::new(1.0, vec!["A".into(), "B".into(), "C".into()]);
        fam.set_projection(0, 1, vec![0.0]);
        fam.set_projection(0, 2, vec![7.0]);
        fam.set_projection(1, 0, vec![0.0]);
        fam.set_projection(1, 2, vec![1.0]);
        fam.set_projection(2, 0, vec![0.0]);
        fam.set_projection(2, 1, vec![0.5]);
        assert_eq!(dpi(&fam, 0, 1, 1).unwrap(), 0.0);
        assert_eq!(dpi(&fam, 0, 1, 2).unwrap(), 7.0);
        assert!(matches!(
            dpi(&fam, 0, 0, 1),
            Err(PcError::InvalidParameter(_))
        ));
    }

    #[test]
    fn missing_projection_reported() {
        let mut fam = DomainFamily::new(1.0, vec!["A".into(), "B".into()]);
        fam.set_projection(0, 1, vec![0.0]);
        assert_eq!(
            fam.validate(),
            Err(PcError::MissingProjection { on: 1, of: 0 })
        );
    }

    #[test]
    fn axioms_two_domains_vacuous() {
        let fam = two_domain_family();
        let report = verify_axioms(&fam).unwrap();
        assert!(report.clean());
        assert!(report.p1_violations.is_empty());
        assert_eq!(report.p2_counts, vec![((0, 1), 0)]);
    }

    #[test]
    fn axioms_detect_p0_violation() {
        let mut fam = two_domain_family();
        // Spread 2θ apart.
        fam.set_projection(0, 1, vec![0.0, 2.0]);
        let report = verify_axioms(&fam).unwrap();
        assert_eq!(report.p0_violations.len(), 1);
        let (on, of, diam) = report.p0_violations[0];
        assert_eq!((on, of), (0, 1));
        assert!((diam - 2.0).abs() < 1e-12);
        // The witness re-evaluates.
        let pts = fam.projection(on, of).unwrap();
        assert!((pts[pts.len() - 1] - pts[0] - diam).abs() < 1e-12);
    }

    #[test]
    fn chain_family_satisfies_p1() {
        let fam = chain_family(8, 1.0);
        let report = verify_axioms(&fam).unwrap();
        assert!(report.clean(), "{report:?}");
        // In the chain, interior domains see distant pairs at distance 2 > θ.
        assert!(report.max_p2_count() > 0);
    }

    #[test]
    fn modified_distance_never_exceeds_dpi() {
        let fam = chain_family(7, 1.0);
        for y in 0..7 {
            for x in 0..7 {
                for z in 0..7 {
                    if x == z || y == x || y == z {
                        continue;
                    }
                    let d = modified_distance(&fam, y, x, z).unwrap();
                    let raw = dpi(&fam, y, x, z).unwrap();
                    assert!(d <= raw + 1e-12, "d_Y > dpi_Y at ({y},{x},{z})");
                }
            }
        }
    }

    #[test]
    fn modified_distance_zero_when_y_in_pair() {
        // Domains X=0, Z=1, Y=2, W=3 with π_X(Y), π_X(W) far apart and the
        // same seen from Z, so (Y, W) qualifies for H(X, Z) by the first
        // clause and d_Y(X, Z) = 0.
        let mut fam = DomainFamily::new(1.0, (0..4).map(|i| format!("D{i}")).collect());
        for on in 0..4 {
            for of in 0..4 {
                if on == of {
                    continue;
                }
                fam.set_projection(on, of, vec![0.0]);
            }
        }
        fam.set_projection(0, 2, vec![0.0]);
        fam.set_projection(0, 3, vec![5.0]);
        fam.set_projection(1, 2, vec![0.0]);
        fam.set_projection(1, 3, vec![5.0]);
        let h = hset(&fam, 0, 1).unwrap();
        assert!(h.contains(&(2, 3)), "qualifying pair missing: {h:?}");
        assert_eq!(modified_distance(&fam, 2, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn modified_distance_matches_enumeration_oracle() {
        // Three-domain fan with explicit distinct projections.
        let mut fam = DomainFamily::new(1.0, vec!["A".into(), "B".into(), "C".into()]);
        fam.set_projection(0, 1, vec![0.0]);
        fam.set_projection(0, 2, vec![0.7]);
        fam.set_projection(1, 0, vec![-0.2]);
        fam.set_projection(1, 2, vec![0.4]);
        fam.set_projection(2, 0, vec![5.0]);
        fam.set_projection(2, 1, vec![5.5]);
        let d = modified_distance(&fam, 2, 0, 1).unwrap();
        // Oracle: enumerate H(0,1) by hand. No dpi exceeds 2θ = 2 except at
        // domain 2 (values 0.5), so H(0,1) = {(0,1)} and d_2 = dpi_2(0,1).
        let h = hset(&fam, 0, 1).unwrap();
        assert_eq!(h, vec![(0, 1)]);
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn projection_graph_two_domains_single_edge() {
        let fam = two_domain_family();
        let pg = build_projection_graph(&fam, 1.0).unwrap();
        assert_eq!(pg.edges, vec![(0, 1)]);
    }

    #[test]
    fn projection_graph_complete_above_max_distance() {
        let fam = chain_family(6, 1.0);
        let pg = build_projection_graph(&fam, 100.0).unwrap();
        assert_eq!(pg.edges.len(), 6 * 5 / 2);
    }

    #[test]
    fn projection_graph_path_like_at_small_k() {
        let fam = chain_family(6, 1.0);
        // Interior modified distances equal 2; K below that separates.
        let pg = build_projection_graph(&fam, 1.5).unwrap();
        for i in 0..5 {
            assert!(pg.has_edge(i, i + 1), "chain edge {i} missing");
        }
        assert!(!pg.has_edge(0, 2), "long edge should be cut");
        assert!(pg.is_connected());
    }

    #[test]
    fn edge_monotonicity_in_k() {
        let fam = chain_family(6, 1.0);
        let small = build_projection_graph(&fam, 1.5).unwrap();
        let large = build_projection_graph(&fam, 3.0).unwrap();
        for &e in &small.edges {
            assert!(
                large.edges.contains(&e),
                "edges(P_K) must grow with K: missing {e:?}"
            );
        }
    }

    #[test]
    fn quasi_tree_single_domain_is_a_line() {
        let fam1 = DomainFamily::new(1.0, vec!["Solo".into()]);
        let pg = ProjectionGraph {
            k: 1.0,
            domain_count: 1,
            edges: vec![],
        };
        let qt = build_quasi_tree(&fam1, &pg, 1.0, 0.25).unwrap();
        assert!(qt.bridges.is_empty());
        // A path: exactly vertices - 1 edges, all on one line.
        assert_eq!(qt.graph.edge_count(), qt.graph.vertex_count() - 1);
        assert!(qt.domain_of_vertex.iter().all(|&d| d == 0));
    }

    #[test]
    fn quasi_tree_two_domains_one_bridge() {
        let fam = two_domain_family();
        let pg = build_projection_graph(&fam, 1.0).unwrap();
        let qt = build_quasi_tree(&fam, &pg, 2.0, 0.25).unwrap();
        assert_eq!(qt.bridges.len(), 1);
        // Bridge endpoints sit at the projection points (coordinate 0).
        let (u, v) = qt.bridges[0];
        assert!((qt.coord_of_vertex[u]).abs() < 1e-9);
        assert!((qt.coord_of_vertex[v]).abs() < 1e-9);
        assert_ne!(qt.domain_of_vertex[u], qt.domain_of_vertex[v]);
        // Distance across the bridge equals L.
        let (d, _) = qt.graph.dijkstra(u);
        assert!((d[v] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quasi_tree_rejects_coarse_resolution() {
        let fam = two_domain_family();
        let pg = build_projection_graph(&fam, 1.0).unwrap();
        assert!(matches!(
            build_quasi_tree(&fam, &pg, 1.0, 0.3),
            Err(PcError::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn quasi_tree_domains_isometrically_embedded() {
        let fam = chain_family(5, 1.0);
        let pg = build_projection_graph(&fam, 3.0).unwrap();
        let qt = build_quasi_tree(&fam, &pg, 3.0, 0.25).unwrap();
        // Within-domain graph distance equals coordinate distance (L is
        // large enough that bridges never shortcut a single line here).
        let verts: Vec<usize> = (0..qt.graph.vertex_count())
            .filter(|&v| qt.domain_of_vertex[v] == 2)
            .collect();
        let (d, _) = qt.graph.dijkstra(verts[0]);
        for &v in verts.iter().step_by(7) {
            let line = (qt.coord_of_vertex[v] - qt.coord_of_vertex[verts[0]]).abs();
            assert!((d[v] - line).abs() < 1e-9, "domain line distorted");
        }
    }

    #[test]
    fn bottleneck_tree_passes_at_half_edge() {
        let g = path_graph(9);
        let report = bottleneck_check(&g, 0.5).unwrap();
        assert!(report.failures.is_empty());
        let min = report.delta_pass.unwrap();
        assert!(min <= 0.5 + 1e-9, "trees pass with Δ = 0.5, got {min}");
    }

    #[test]
    fn bottleneck_cycle_12_thresholds() {
        let g = cycle_graph(12);
        // Fails strictly below 2 (already for nearby pairs).
        let report = bottleneck_check(&g, 1.99).unwrap();
        assert!(report.delta_pass.is_none());
        assert!(!report.failures.is_empty());
        // Each failure witness avoids the ball: re-verify one.
        let f = &report.failures[0];
        assert!(f.detour.len() > 1);
        // Passes at 3.
        let report = bottleneck_check(&g, 3.0).unwrap();
        assert!(report.failures.is_empty());
        let min = report.delta_pass.unwrap();
        assert!((min - 3.0).abs() < 0.05, "minimal Δ should be 3, got {min}");
    }

    #[test]
    fn bottleneck_rejects_disconnected() {
        let mut g = MetricGraph::new();
        g.add_vertex("a");
        g.add_vertex("b");
        assert!(matches!(
            bottleneck_check(&g, 1.0),
            Err(PcError::DisconnectedInput)
        ));
    }

    #[test]
    fn compatibility_shift_action_passes() {
        // Z acts on the chain family by shifting labels; projections are
        // translation-invariant in this synthetic family, so F_g = identity.
        let fam = chain_family(6, 1.0);
        let n = fam.len() as i64;
        let action = FamilyAction::<i64> {
            label_map: Box::new(move |g, x| {
                let t = x as i64 + g;
                (0..n).contains(&t).then_some(t as usize)
            }),
            domain_map: Box::new(|_, _| LineIsometry {
                flip: false,
                offset: 0.0,
            }),
            compose: Box::new(|a, b| a + b),
        };
        let report = verify_group_compatibility(&fam, &action, &[(1, 1), (1, -1)], 1e-9).unwrap();
        assert!(report.pass(), "{report:?}");
    }

    #[test]
    fn compatibility_detects_mislabeled_isometry() {
        let fam = chain_family(6, 1.0);
        let n = fam.len() as i64;
        let action = FamilyAction::<i64> {
            label_map: Box::new(move |g, x| {
                let t = x as i64 + g;
                (0..n).contains(&t).then_some(t as usize)
            }),
            // Deliberately wrong: a flip that the projections do not have.
            domain_map: Box::new(|_, _| LineIsometry {
                flip: true,
                offset: 0.3,
            }),
            compose: Box::new(|a, b| a + b),
        };
        let report = verify_group_compatibility(&fam, &action, &[(1, 1)], 1e-9).unwrap();
        assert!(!report.pass());
        assert!(!report.equivariance_failures.is_empty());
    }

    #[test]
    fn family_json_round_trip() {
        let fam = chain_family(3, 1.0);
        let wire = fam.to_wire();
        let json = serde_json::to_string(&wire).unwrap();
        assert!(json.contains("\"theta\":1.0"));
        assert!(json.contains("\"line\":true"));
        let back = DomainFamily::from_wire(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.projection(0, 1).unwrap(), fam.projection(0, 1).unwrap());
    }
}
