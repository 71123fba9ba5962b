//! Synthetic flip-manifold geometry: disjoint-geodesic configurations,
//! boundary projections `d_γ(α, β)`, the constants `ε`, `η(R)`,
//! `θ = 6ε + 2η`, depth-limited flip trees over a Schottky-style vertex
//! plane, and export to projection-complex domain families.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hyp2::{
    self, common_perpendicular, project_point, BoundaryPoint, Geodesic, Isometry,
};
use crate::projection_complex::DomainFamily;

#[derive(Debug, Error)]
pub enum GfError {
    #[error("rejection sampling saturated after {0} attempts (count too large for R)")]
    SaturationFailure(usize),
    #[error("generator parameters too weak: orbit circles collide ({0}); increase translation lengths")]
    DisjointnessViolation(String),
    #[error("tree distance must be at least 2")]
    TooClose,
    #[error("family needs at least two domains of the chosen color")]
    TooFewDomains,
    #[error("the scan scenario is unavailable: {0}")]
    ScenarioUnavailable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] hyp2::Hyp2Error),
}

/// Hexagon-thinness constant. Ideal triangles in H² are `ln(1+√2) ≈ 0.8814`
/// thin and a geodesic hexagon decomposes into four triangles, so `4·0.9`
/// covers every hexagon; validated by the sampling oracle in the tests.
pub const DEFAULT_EPSILON: f64 = 3.6;

/// The constants of the boundary-projection estimate: `θ = 6ε + 2η` exactly.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaConstants {
    pub epsilon: f64,
    pub r: f64,
    pub eta: f64,
    pub theta: f64,
}

impl ThetaConstants {
    pub fn standard(r: f64) -> Self {
        let epsilon = DEFAULT_EPSILON;
        let eta = eta_of(r, epsilon);
        ThetaConstants {
            epsilon,
            r,
            eta,
            theta: 6.0 * epsilon + 2.0 * eta,
        }
    }
}

/// Length of the segment along which two geodesics at mutual distance `d`
/// stay within `2ε` of each other: points at arc length `s` from the foot of
/// the common perpendicular satisfy `sinh(dist) = sinh(d)·cosh(s)`.
pub fn fellow_travel_width(d: f64, epsilon: f64) -> f64 {
    let ratio = (2.0 * epsilon).sinh() / d.sinh();
    if ratio <= 1.0 {
        0.0
    } else {
        2.0 * ratio.acosh()
    }
}

/// The least `η` (bisection to 1e-4) such that two complete geodesics that
/// are `2ε`-close along matched segments of length `η` must come within `r`
/// somewhere. Evaluated on the one-parameter family of geodesic pairs at
/// distance `d ≥ r`, normalized by isometry.
pub fn eta_of(r: f64, epsilon: f64) -> f64 {
    assert!(r > 0.0 && epsilon > 0.0);
    // Predicate: no pair at distance ≥ r stays 2ε-close along length η.
    let admissible = |eta: f64| -> bool {
        let samples = 200;
        for i in 0..=samples {
            let d = r + (i as f64) * 0.05;
            if fellow_travel_width(d, epsilon) > eta {
                return false;
            }
        }
        true
    };
    let mut hi = fellow_travel_width(r, epsilon) + 1.0;
    if admissible(0.0) {
        return 0.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// A configuration of pairwise-disjoint geodesics with verified minimum
/// separation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicConfig {
    pub geodesics: Vec<Geodesic>,
    pub min_separation: f64,
    pub seed: u64,
}

impl GeodesicConfig {
    /// Re-verifies the invariants: pairwise disjoint, distinct endpoints,
    /// every common perpendicular at least `min_separation` long.
    pub fn verify(&self) -> Result<(), GfError> {
        for i in 0..self.geodesics.len() {
            for j in (i + 1)..self.geodesics.len() {
                let (_, _, len) = common_perpendicular(&self.geodesics[i], &self.geodesics[j])?;
                if len < self.min_separation {
                    return Err(GfError::InvalidParameter(format!(
                        "separation {len} below {} for pair ({i},{j})",
                        self.min_separation
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Samples `count` pairwise-disjoint geodesics over a bounded boundary
/// window, rejecting placements that violate the hyperbolic separation `r`.
/// Deterministic per seed.
pub fn random_disjoint_geodesics(
    count: usize,
    r: f64,
    seed: u64,
) -> Result<GeodesicConfig, GfError> {
    if count < 2 || r <= 0.0 {
        return Err(GfError::InvalidParameter(
            "need count ≥ 2 and R > 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = 10.0 * count as f64;
    let max_attempts = 200 * count;
    let mut attempts = 0;
    let mut geodesics: Vec<Geodesic> = Vec::with_capacity(count);
    let mut cursor = 0.0f64;
    while geodesics.len() < count {
        attempts += 1;
        if attempts > max_attempts || cursor > window {
            return Err(GfError::SaturationFailure(attempts));
        }
        let width = rng.gen_range(0.8..1.6);
        let gap = rng.gen_range(0.05..0.8);
        let candidate = Geodesic::semicircle(cursor + gap + width / 2.0, width / 2.0);
        let ok = geodesics.iter().all(|g| {
            common_perpendicular(g, &candidate)
                .map(|(_, _, len)| len >= r)
                .unwrap_or(false)
        });
        if ok {
            cursor += gap + width;
            geodesics.push(candidate);
        } else {
            // Sequential placement: grow the gap and retry.
            cursor += gap + 0.5;
        }
    }
    let config = GeodesicConfig {
        geodesics,
        min_separation: r,
        seed,
    };
    config.verify()?;
    Ok(config)
}

/// The distance along `γ` between the closest points to `α` and to `β`.
pub fn d_gamma(gamma: &Geodesic, alpha: &Geodesic, beta: &Geodesic) -> Result<f64, GfError> {
    if alpha == beta {
        return Ok(0.0);
    }
    let pa = project_point(gamma, alpha)?;
    let pb = project_point(gamma, beta)?;
    Ok((gamma.param_of(&pa) - gamma.param_of(&pb)).abs())
}

/// Foot on `gamma` of the perpendicular from a boundary point (the limit of
/// projections of small geodesics shrinking to that point).
pub fn project_boundary_point(gamma: &Geodesic, xi: &BoundaryPoint) -> Result<hyp2::HPoint, GfError> {
    // Normalize gamma to the imaginary axis; the perpendicular from a real
    // boundary point x ≠ 0 meets it at |x|·i.
    let (e1, e2) = gamma.endpoints();
    if xi.close_to(&e1, 1e-9) || xi.close_to(&e2, 1e-9) {
        return Err(GfError::TooClose);
    }
    let m = match *gamma {
        Geodesic::Vertical { foot } => Isometry::translation(-foot),
        Geodesic::Semicircle { center, radius } => {
            let u = center - radius;
            let v = center + radius;
            Isometry::from_unnormalized(1.0, -u, -1.0, v)?
        }
    };
    let x = match m.boundary_apply(xi) {
        BoundaryPoint::Finite { value } => value,
        BoundaryPoint::Infinity => {
            return Err(GfError::InvalidParameter(
                "boundary point maps to the axis endpoint".into(),
            ))
        }
    };
    if x == 0.0 {
        return Err(GfError::InvalidParameter(
            "boundary point coincides with an axis endpoint".into(),
        ));
    }
    let foot = hyp2::HPoint {
        re: 0.0,
        im: x.abs(),
    };
    Ok(hyp2::apply(&m.inverse(), &foot))
}

/// Node color of the bipartite flip tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

/// A gluing entry: the boundary geodesic at `boundary_index` is glued to the
/// child's boundary geodesic `child_boundary`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GluingEdge {
    pub boundary_index: usize,
    pub child: usize,
    pub child_boundary: usize,
}

/// A vertex of the flip tree. Every node carries a copy of the template
/// plane; boundary geodesics are indexed into the shared template.
#[derive(Debug, Clone, Serialize)]
pub struct FlipTreeNode {
    pub id: usize,
    pub color: Color,
    pub depth: u32,
    pub glued: Vec<GluingEdge>,
    /// Parent id and the boundary index used on this node's side.
    pub parent: Option<(usize, usize)>,
}

/// The shared vertex-plane geometry: a two-generator Schottky-style group
/// with its orbit of boundary geodesics, pairwise disjoint by ping-pong and
/// re-verified at construction.
#[derive(Debug, Clone)]
pub struct SchottkyTemplate {
    pub gen_a: Isometry,
    pub gen_b: Isometry,
    pub translation_lengths: (f64, f64),
    /// Orbit geodesics; indices 0..4 are the base circles
    /// `C_A⁻, C_A⁺, C_B⁻, C_B⁺`.
    pub boundary: Vec<Geodesic>,
    pub min_separation: f64,
}

/// The pairing isometry sending circle `(c1, r1)` to `(c2, r2)` and the
/// exterior of the first to the interior of the second.
fn pairing_isometry(c1: f64, r1: f64, c2: f64, r2: f64) -> Isometry {
    // z ↦ c2 - r1 r2 / (z - c1), determinant r1 r2 > 0.
    Isometry::from_unnormalized(c2, -c1 * c2 - r1 * r2, 1.0, -c1).expect("positive determinant")
}

pub fn schottky_template(
    tau_a: f64,
    tau_b: f64,
    word_cap: u32,
) -> Result<SchottkyTemplate, GfError> {
    if tau_a <= 0.0 || tau_b <= 0.0 {
        return Err(GfError::InvalidParameter(
            "translation lengths must be positive".into(),
        ));
    }
    let d_a = (tau_a / 2.0).cosh();
    let d_b = (tau_b / 2.0).cosh();
    if d_b < d_a + 2.5 {
        return Err(GfError::DisjointnessViolation(format!(
            "base circles overlap: cosh(tau_b/2) = {d_b:.3} < cosh(tau_a/2) + 2.5 = {:.3}",
            d_a + 2.5
        )));
    }
    let base = [
        Geodesic::semicircle(-d_a, 1.0),
        Geodesic::semicircle(d_a, 1.0),
        Geodesic::semicircle(-d_b, 1.0),
        Geodesic::semicircle(d_b, 1.0),
    ];
    let gen_a = pairing_isometry(-d_a, 1.0, d_a, 1.0);
    let gen_b = pairing_isometry(-d_b, 1.0, d_b, 1.0);
    let mut boundary: Vec<Geodesic> = base.to_vec();
    let mut frontier: Vec<Geodesic> = base.to_vec();
    let close = |a: &Geodesic, b: &Geodesic| -> bool {
        let (a1, a2) = a.endpoints();
        let (b1, b2) = b.endpoints();
        (a1.close_to(&b1, 1e-7) && a2.close_to(&b2, 1e-7))
            || (a1.close_to(&b2, 1e-7) && a2.close_to(&b1, 1e-7))
    };
    for _ in 1..word_cap {
        let mut next = Vec::new();
        for g in [&gen_a, &gen_a.inverse(), &gen_b, &gen_b.inverse()] {
            for circle in &frontier {
                let image = g.apply_geodesic(circle)?;
                if !boundary.iter().any(|c| close(c, &image))
                    && !next.iter().any(|c| close(c, &image))
                {
                    next.push(image);
                }
            }
        }
        boundary.extend(next.iter().cloned());
        frontier = next;
    }
    // Runtime verification of pairwise disjointness.
    let mut min_separation = f64::INFINITY;
    for i in 0..boundary.len() {
        for j in (i + 1)..boundary.len() {
            match common_perpendicular(&boundary[i], &boundary[j]) {
                Ok((_, _, len)) => min_separation = min_separation.min(len),
                Err(_) => {
                    return Err(GfError::DisjointnessViolation(format!(
                        "orbit circles {i} and {j} intersect"
                    )))
                }
            }
        }
    }
    Ok(SchottkyTemplate {
        gen_a,
        gen_b,
        translation_lengths: (tau_a, tau_b),
        boundary,
        min_separation,
    })
}

/// A depth-limited flip tree: a properly two-colored tree of template copies
/// glued along the four base circles (children attach to every base circle
/// except the one leading to the parent).
#[derive(Debug, Clone)]
pub struct FlipTree {
    pub nodes: Vec<FlipTreeNode>,
    pub template: SchottkyTemplate,
    pub constants: ThetaConstants,
}

/// Serialization form of the tree (template geometry plus combinatorics).
#[derive(Debug, Serialize)]
pub struct FlipTreeWire<'a> {
    pub boundary: &'a [Geodesic],
    pub min_separation: f64,
    pub theta: f64,
    pub nodes: &'a [FlipTreeNode],
}

impl FlipTree {
    pub fn to_wire(&self) -> FlipTreeWire<'_> {
        FlipTreeWire {
            boundary: &self.template.boundary,
            min_separation: self.template.min_separation,
            theta: self.constants.theta,
            nodes: &self.nodes,
        }
    }
}

const GLUE_DEGREE: usize = 4;

pub fn schottky_flip_tree(
    translation_lengths: (f64, f64),
    depth: u32,
    word_cap: u32,
) -> Result<FlipTree, GfError> {
    if depth < 1 {
        return Err(GfError::InvalidParameter("depth must be ≥ 1".into()));
    }
    let template = schottky_template(translation_lengths.0, translation_lengths.1, word_cap)?;
    let constants = ThetaConstants::standard(template.min_separation);
    let mut nodes = vec![FlipTreeNode {
        id: 0,
        color: Color::Black,
        depth: 0,
        glued: Vec::new(),
        parent: None,
    }];
    let mut frontier = vec![0usize];
    for d in 1..=depth {
        let mut next = Vec::new();
        for &v in &frontier {
            // Every non-root node faces its parent along base circle 0.
            let parent_facing = nodes[v].parent.map(|_| 0usize);
            for boundary_index in 0..GLUE_DEGREE {
                if Some(boundary_index) == parent_facing {
                    continue;
                }
                let id = nodes.len();
                let color = nodes[v].color.other();
                nodes.push(FlipTreeNode {
                    id,
                    color,
                    depth: d,
                    glued: Vec::new(),
                    // The child is glued along its own base circle 0 unless
                    // that slot leads back; gluing uses the paired circle of
                    // the same index to keep the table deterministic.
                    parent: Some((v, boundary_index)),
                });
                nodes[v].glued.push(GluingEdge {
                    boundary_index,
                    child: id,
                    child_boundary: 0,
                });
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(FlipTree {
        nodes,
        template,
        constants,
    })
}

impl FlipTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Tree distance between nodes.
    pub fn distance(&self, u: usize, v: usize) -> u32 {
        let (mut a, mut b, mut d) = (u, v, 0u32);
        while self.nodes[a].depth > self.nodes[b].depth {
            a = self.nodes[a].parent.unwrap().0;
            d += 1;
        }
        while self.nodes[b].depth > self.nodes[a].depth {
            b = self.nodes[b].parent.unwrap().0;
            d += 1;
        }
        while a != b {
            a = self.nodes[a].parent.unwrap().0;
            b = self.nodes[b].parent.unwrap().0;
            d += 2;
        }
        d
    }

    /// The path from `u` to `v` as node ids.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let mut up = vec![u];
        let mut down = vec![v];
        let (mut a, mut b) = (u, v);
        while self.nodes[a].depth > self.nodes[b].depth {
            a = self.nodes[a].parent.unwrap().0;
            up.push(a);
        }
        while self.nodes[b].depth > self.nodes[a].depth {
            b = self.nodes[b].parent.unwrap().0;
            down.push(b);
        }
        while a != b {
            a = self.nodes[a].parent.unwrap().0;
            up.push(a);
            b = self.nodes[b].parent.unwrap().0;
            down.push(b);
        }
        down.pop();
        down.reverse();
        up.extend(down);
        up
    }

    /// The boundary geodesic of node `at` that faces its tree neighbor
    /// `toward`.
    fn facing_boundary(&self, at: usize, toward: usize) -> Result<usize, GfError> {
        if let Some((p, b)) = self.nodes[at].parent {
            if p == toward {
                // The child is glued along its base circle 0.
                let _ = b;
                return Ok(0);
            }
        }
        self.nodes[at]
            .glued
            .iter()
            .find(|e| e.child == toward)
            .map(|e| e.boundary_index)
            .ok_or_else(|| GfError::InvalidParameter("nodes are not adjacent".into()))
    }
}

/// The projection of the fiber line of `v` to the fiber line of `w`
/// (tree-distance at least two): in the plane of the second-to-last vertex
/// `u` of the tree geodesic `[v, w]`, project the gluing geodesic toward the
/// previous vertex onto the gluing geodesic toward `w` and export the
/// arc-length parameter of the closest point (the flip identifies that base
/// coordinate with the fiber coordinate of `w`).
pub fn lift_projection(tree: &FlipTree, v: usize, w: usize) -> Result<f64, GfError> {
    if tree.distance(v, w) < 2 {
        return Err(GfError::TooClose);
    }
    let path = tree.path(v, w);
    let u_prime = path[path.len() - 3];
    let u = path[path.len() - 2];
    let p_index = tree.facing_boundary(u, u_prime)?;
    let q_index = tree.facing_boundary(u, w)?;
    let p = &tree.template.boundary[p_index];
    let q = &tree.template.boundary[q_index];
    let foot = project_point(q, p)?;
    Ok(q.param_of(&foot))
}

/// Exports the same-color lifts as a projection-complex domain family with
/// `θ = 6ε + 2η` and single-point projections from `lift_projection`.
pub fn family_from_tree(tree: &FlipTree, color: Color) -> Result<DomainFamily, GfError> {
    let domains: Vec<usize> = tree
        .nodes
        .iter()
        .filter(|n| n.color == color)
        .map(|n| n.id)
        .collect();
    if domains.len() < 2 {
        return Err(GfError::TooFewDomains);
    }
    let labels = domains.iter().map(|id| format!("lift{id}")).collect();
    let mut fam = DomainFamily::new(tree.constants.theta, labels);
    for (i, &a) in domains.iter().enumerate() {
        for (j, &b) in domains.iter().enumerate() {
            if i == j {
                continue;
            }
            // π_{domain i}(domain j): coordinate on the line of a.
            fam.set_projection(i, j, vec![lift_projection(tree, b, a)?]);
        }
    }
    Ok(fam)
}

/// Exports a flat geodesic configuration as a family: each geodesic is a
/// domain, its line is its own arc-length parametrization, and projections
/// are closest points.
pub fn family_from_config(
    config: &GeodesicConfig,
    constants: &ThetaConstants,
) -> Result<DomainFamily, GfError> {
    let n = config.geodesics.len();
    if n < 2 {
        return Err(GfError::TooFewDomains);
    }
    let labels = (0..n).map(|i| format!("geo{i}")).collect();
    let mut fam = DomainFamily::new(constants.theta, labels);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let foot = project_point(&config.geodesics[i], &config.geodesics[j])?;
            fam.set_projection(i, j, vec![config.geodesics[i].param_of(&foot)]);
        }
    }
    Ok(fam)
}

/// Result of the bounded-projection scan around a white vertex with
/// translated neighbors (the uniform-boundedness evidence).
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    /// Max over eligible domains `C` and powers `|m|, |n| ≤ N` of
    /// `d^π_C(A^m·B₁, A^n·B₁)`.
    pub max_spread: f64,
    /// The comparator from the ordering argument: the H²-distance from the
    /// base boundary geodesic to its translate.
    pub comparator: f64,
    /// True when projections from domains at tree distance > 2 coincide
    /// exactly (zero contribution).
    pub nonadjacent_zero: bool,
    pub n: u32,
}

/// Scans `d^π_C(A^m α₁, A^n α₁)` over translate domains `C = A^k α₁` and the
/// non-translate neighbors, for `|m|, |n| ≤ N`. Translates too small to
/// carry as circles are projected through their limiting boundary point (the
/// error is below f64 resolution at the cutoff).
pub fn bounded_projection_scan(tree: &FlipTree, n: u32) -> Result<ScanReport, GfError> {
    if tree.nodes.len() < 2 || tree.nodes.iter().all(|nd| nd.depth < 3) {
        return Err(GfError::ScenarioUnavailable(
            "need a depth-3 tree with a white vertex and black neighbors".into(),
        ));
    }
    let template = &tree.template;
    let a = &template.gen_a;
    // α₁ = C_B⁻, disjoint from the axis of A and from all its translates.
    let alpha = template.boundary[2];
    let comparator = common_perpendicular(&alpha, &a.apply_geodesic(&alpha)?)?.2;

    // Projection of A^j(α₁) onto α₁ as an arc-length parameter; beyond the
    // cutoff the translate is replaced by the attracting/repelling fixed
    // point of A (the circles shrink like e^{-2τ|j|}).
    let cutoff = 4i64;
    let fixed_points = match hyp2::classify(a)? {
        hyp2::IsometryClass::Loxodromic {
            attracting,
            repelling,
            ..
        } => (attracting, repelling),
        _ => {
            return Err(GfError::ScenarioUnavailable(
                "the scan generator must be loxodromic".into(),
            ))
        }
    };
    let proj_param = |j: i64| -> Result<f64, GfError> {
        if j == 0 {
            return Err(GfError::InvalidParameter("translate equals the base".into()));
        }
        if j.abs() <= cutoff {
            let mut img = alpha;
            let step = if j > 0 { *a } else { a.inverse() };
            for _ in 0..j.unsigned_abs() {
                img = step.apply_geodesic(&img)?;
            }
            let foot = project_point(&alpha, &img)?;
            Ok(alpha.param_of(&foot))
        } else {
            let xi = if j > 0 { fixed_points.0 } else { fixed_points.1 };
            let foot = project_boundary_point(&alpha, &xi)?;
            Ok(alpha.param_of(&foot))
        }
    };
    // Spread on C = A^k α₁ equals (after applying A^{-k}) the spread of the
    // parameters of A^{m-k}, A^{n-k} on the base copy; sweep the shifted
    // index range.
    let range = 2 * n as i64;
    let mut params = Vec::new();
    for j in -range..=range {
        if j != 0 {
            params.push(proj_param(j)?);
        }
    }
    let spread_translates = params.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - params.iter().cloned().fold(f64::INFINITY, f64::min);

    // Non-translate neighbor: the opposite B-side circle, projected from all
    // translates A^m α₁. Beyond a short cutoff the translates are replaced by
    // the fixed points of A; the replacement error is below the circle
    // diameter at the cutoff.
    let other = template.boundary[3];
    let cutoff_other = 2i64;
    let mut other_params = Vec::new();
    for m in -(n as i64)..=(n as i64) {
        let foot = if m.abs() <= cutoff_other {
            let mut img = alpha;
            let step = if m >= 0 { *a } else { a.inverse() };
            for _ in 0..m.unsigned_abs() {
                img = step.apply_geodesic(&img)?;
            }
            project_point(&other, &img)?
        } else {
            let xi = if m > 0 { fixed_points.0 } else { fixed_points.1 };
            project_boundary_point(&other, &xi)?
        };
        other_params.push(other.param_of(&foot));
    }
    let spread_other = other_params.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - other_params.iter().cloned().fold(f64::INFINITY, f64::min);

    // Tree-distance > 2 contributes exactly zero: siblings under a common
    // white vertex project through the same last-three-vertices.
    let nonadjacent_zero = {
        let white = tree.nodes.iter().find(|nd| nd.color == Color::White);
        match white {
            Some(w) if w.glued.len() >= 2 => {
                let b1 = w.glued[0].child;
                let b2 = w.glued[1].child;
                let far = tree
                    .nodes
                    .iter()
                    .find(|nd| {
                        nd.color == Color::Black
                            && tree.distance(nd.id, b1) > 2
                            && tree.distance(nd.id, b2) > 2
                    })
                    .map(|nd| nd.id);
                match far {
                    Some(c) => {
                        let p1 = lift_projection(tree, b1, c)?;
                        let p2 = lift_projection(tree, b2, c)?;
                        p1 == p2
                    }
                    None => false,
                }
            }
            _ => false,
        }
    };

    Ok(ScanReport {
        max_spread: spread_translates.max(spread_other),
        comparator,
        nonadjacent_zero,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyp2::{dist, HPoint};
    use crate::projection_complex::verify_axioms;

    #[test]
    fn fellow_travel_width_matches_point_distance_formula() {
        // A geodesic at distance d from the imaginary axis: semicircle(c, r)
        // with c/r = cosh(d). Points at arc length s from the foot satisfy
        // sinh(dist) = sinh(d)·cosh(s), which underlies fellow_travel_width.
        let d = 0.8f64;
        let other = Geodesic::semicircle(d.cosh(), 1.0);
        let axis = Geodesic::vertical(0.0);
        let (foot, _, len) = common_perpendicular(&axis, &other).unwrap();
        assert!((len - d).abs() < 1e-9, "distance parametrization: {len}");
        let s0 = axis.param_of(&foot);
        for s in [-1.5f64, -0.4, 0.0, 0.9, 2.0] {
            let p = HPoint {
                re: 0.0,
                im: (s + s0).exp(),
            };
            let dist_to = other.dist_to_point(&p);
            let oracle = (d.sinh() * s.cosh()).asinh();
            assert!(
                (dist_to - oracle).abs() < 1e-9,
                "width formula mismatch at s = {s}: {dist_to} vs {oracle}"
            );
        }
        // Width consistency: at arc length w/2 the distance is exactly 2ε.
        let eps = 1.1;
        let w = fellow_travel_width(d, eps);
        let p = HPoint {
            re: 0.0,
            im: (w / 2.0 + s0).exp(),
        };
        assert!((other.dist_to_point(&p) - 2.0 * eps).abs() < 1e-9);
    }

    #[test]
    fn eta_zero_when_r_dominates() {
        assert_eq!(eta_of(7.5, 3.6), 0.0);
        assert_eq!(eta_of(7.2, 3.6), 0.0);
    }

    #[test]
    fn eta_matches_width_formula_and_is_monotone() {
        let eta = eta_of(0.1, 3.6);
        let oracle = fellow_travel_width(0.1, 3.6);
        assert!((eta - oracle).abs() < 1e-3, "{eta} vs {oracle}");
        assert!(eta > 0.0);
        assert!(eta_of(0.05, 3.6) >= eta_of(0.1, 3.6));
        assert!(eta_of(0.1, 3.6) >= eta_of(0.2, 3.6));
    }

    #[test]
    fn epsilon_covers_sampled_ideal_triangle_thinness() {
        // The ideal triangle with vertices 0, 1, ∞; its sides are the
        // imaginary axis, vertical(1), and semicircle(0.5, 0.5). Max distance
        // from a point of one side to the union of the others is the thin
        // constant; ε = 3.6 must cover four times that.
        let side1 = Geodesic::vertical(0.0);
        let side2 = Geodesic::vertical(1.0);
        let side3 = Geodesic::semicircle(0.5, 0.5);
        let mut worst = 0.0f64;
        for k in 0..4000 {
            let s = -6.0 + 12.0 * (k as f64) / 3999.0;
            let p = side1.point_at(s);
            let d = side2.dist_to_point(&p).min(side3.dist_to_point(&p));
            worst = worst.max(d);
        }
        // ln(1 + sqrt 2) is the exact value for this configuration.
        assert!((worst - (1.0 + 2.0f64.sqrt()).ln()).abs() < 1e-3);
        assert!(4.0 * worst <= DEFAULT_EPSILON, "ε = 3.6 must cover 4δ");
    }

    #[test]
    fn random_config_small() {
        let config = random_disjoint_geodesics(2, 0.5, 11).unwrap();
        assert_eq!(config.geodesics.len(), 2);
        config.verify().unwrap();
    }

    #[test]
    fn random_config_fifty_verifies() {
        let config = random_disjoint_geodesics(50, 0.1, 7).unwrap();
        assert_eq!(config.geodesics.len(), 50);
        config.verify().unwrap();
        // Determinism per seed.
        let again = random_disjoint_geodesics(50, 0.1, 7).unwrap();
        assert_eq!(config.geodesics, again.geodesics);
    }

    #[test]
    fn random_config_saturates_on_impossible_packing() {
        assert!(matches!(
            random_disjoint_geodesics(100, 10.0, 3),
            Err(GfError::SaturationFailure(_))
        ));
    }

    #[test]
    fn d_gamma_symmetry_cases() {
        let gamma = Geodesic::semicircle(0.0, 1.0);
        let alpha = Geodesic::vertical(-5.0);
        let beta = Geodesic::vertical(5.0);
        assert_eq!(d_gamma(&gamma, &alpha, &alpha).unwrap(), 0.0);
        // Mirror symmetry about gamma's apex.
        assert!(d_gamma(&gamma, &alpha, &beta).unwrap() < 1e-12);
        // Perturbed: matches the dense-sampling arc-length oracle.
        let beta2 = Geodesic::vertical(6.0);
        let value = d_gamma(&gamma, &alpha, &beta2).unwrap();
        let oracle = {
            let nearest_param = |target: &Geodesic| {
                let mut best = (f64::INFINITY, 0.0);
                for k in 0..200_000 {
                    let s = -6.0 + 12.0 * (k as f64) / 199_999.0;
                    let p = gamma.point_at(s);
                    let d = target.dist_to_point(&p);
                    if d < best.0 {
                        best = (d, s);
                    }
                }
                best.1
            };
            (nearest_param(&alpha) - nearest_param(&beta2)).abs()
        };
        assert!((value - oracle).abs() < 1e-4, "{value} vs {oracle}");
    }

    #[test]
    fn d_gamma_isometry_equivariant() {
        let gamma = Geodesic::semicircle(0.0, 1.0);
        let alpha = Geodesic::vertical(4.0);
        let beta = Geodesic::semicircle(7.0, 1.5);
        let g = Isometry::translation(0.7)
            .compose(&Isometry::dilation(1.9))
            .compose(&Isometry::rotation_about_i(0.4));
        let before = d_gamma(&gamma, &alpha, &beta).unwrap();
        let after = d_gamma(
            &g.apply_geodesic(&gamma).unwrap(),
            &g.apply_geodesic(&alpha).unwrap(),
            &g.apply_geodesic(&beta).unwrap(),
        )
        .unwrap();
        assert!((before - after).abs() < 1e-8);
    }

    #[test]
    fn template_orbit_disjoint_and_sized() {
        let t = schottky_template(4.0, 6.0, 2).unwrap();
        assert!(t.boundary.len() >= 4 + 8, "orbit should grow: {}", t.boundary.len());
        assert!(t.min_separation > 0.0);
        // Generator translation lengths match the requested values.
        match hyp2::classify(&t.gen_a).unwrap() {
            hyp2::IsometryClass::Loxodromic {
                translation_length, ..
            } => assert!((translation_length - 4.0).abs() < 1e-9),
            other => panic!("A should be loxodromic, got {other:?}"),
        }
    }

    #[test]
    fn template_rejects_weak_generators() {
        assert!(matches!(
            schottky_template(1.0, 1.2, 2),
            Err(GfError::DisjointnessViolation(_))
        ));
    }

    #[test]
    fn flip_tree_counts_and_coloring() {
        let tree = schottky_flip_tree((4.0, 6.0), 3, 2).unwrap();
        // Branching arithmetic: 1 + 4 + 4·3 + 4·3².
        assert_eq!(tree.len(), 1 + 4 + 12 + 36);
        for node in &tree.nodes {
            let expected = if node.depth % 2 == 0 {
                Color::Black
            } else {
                Color::White
            };
            assert_eq!(node.color, expected, "coloring alternates with parity");
            if let Some((p, _)) = node.parent {
                assert_ne!(tree.nodes[p].color, node.color, "coloring is proper");
            }
        }
        // Depth-1 tree: a single black node plus white children; ≥ 4
        // boundary geodesics, all pairwise disjoint (verified in template).
        let shallow = schottky_flip_tree((4.0, 6.0), 1, 2).unwrap();
        assert!(shallow.template.boundary.len() >= 4);
    }

    #[test]
    fn lift_projection_requires_distance_two() {
        let tree = schottky_flip_tree((4.0, 6.0), 2, 2).unwrap();
        let child = tree.nodes[0].glued[0].child;
        assert!(matches!(
            lift_projection(&tree, 0, child),
            Err(GfError::TooClose)
        ));
    }

    #[test]
    fn lift_projection_matches_d_gamma() {
        // dpi computed from two lift projections onto a common domain equals
        // d_gamma of the corresponding boundary geodesics.
        let tree = schottky_flip_tree((4.0, 6.0), 2, 2).unwrap();
        let root = 0usize;
        let w = tree.nodes[root].glued[0].child;
        let grandchildren: Vec<usize> = tree.nodes[w].glued.iter().map(|e| e.child).collect();
        let (g1, g2) = (grandchildren[0], grandchildren[1]);
        // Both project onto the root through w.
        let p1 = lift_projection(&tree, g1, root).unwrap();
        let p2 = lift_projection(&tree, g2, root).unwrap();
        let q = &tree.template.boundary[tree.facing_boundary(w, root).unwrap()];
        let a1 = &tree.template.boundary[tree.facing_boundary(w, g1).unwrap()];
        let a2 = &tree.template.boundary[tree.facing_boundary(w, g2).unwrap()];
        let oracle = d_gamma(q, a1, a2).unwrap();
        assert!(((p1 - p2).abs() - oracle).abs() < 1e-9);
    }

    #[test]
    fn family_from_tree_passes_axioms() {
        let tree = schottky_flip_tree((4.0, 6.0), 3, 2).unwrap();
        for color in [Color::Black, Color::White] {
            let fam = family_from_tree(&tree, color).unwrap();
            let report = verify_axioms(&fam).unwrap();
            assert!(report.clean(), "axioms fail for {color:?}: {report:?}");
        }
        // Depth-1 black family is just the root: too few domains.
        let shallow = schottky_flip_tree((4.0, 6.0), 1, 2).unwrap();
        assert!(matches!(
            family_from_tree(&shallow, Color::Black),
            Err(GfError::TooFewDomains)
        ));
    }

    #[test]
    fn family_from_config_passes_axioms() {
        let config = random_disjoint_geodesics(20, 0.1, 42).unwrap();
        let constants = ThetaConstants::standard(0.1);
        assert!((constants.theta - (6.0 * constants.epsilon + 2.0 * constants.eta)).abs() == 0.0);
        let fam = family_from_config(&config, &constants).unwrap();
        let report = verify_axioms(&fam).unwrap();
        assert!(report.clean(), "{report:?}");
    }

    #[test]
    fn theta_monotone_in_parameters() {
        let c1 = ThetaConstants::standard(0.05);
        let c2 = ThetaConstants::standard(0.1);
        assert!(c1.theta >= c2.theta, "η decreasing in R forces θ monotone");
    }

    #[test]
    fn scan_uniform_in_n() {
        let tree = schottky_flip_tree((4.0, 6.0), 3, 2).unwrap();
        let small = bounded_projection_scan(&tree, 3).unwrap();
        let large = bounded_projection_scan(&tree, 10).unwrap();
        assert!(small.max_spread.is_finite() && small.max_spread >= 0.0);
        assert_eq!(
            small.max_spread, large.max_spread,
            "spread must be uniform in the power range"
        );
        assert!(large.nonadjacent_zero, "distant domains contribute zero");
        assert!(large.comparator > 0.0);
    }

    #[test]
    fn scan_trivial_n_one() {
        let tree = schottky_flip_tree((4.0, 6.0), 3, 2).unwrap();
        let r = bounded_projection_scan(&tree, 1).unwrap();
        assert!(r.max_spread.is_finite());
    }

    #[test]
    fn config_json_round_trip() {
        let config = random_disjoint_geodesics(4, 0.3, 5).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let back: GeodesicConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config.geodesics, back.geodesics);
        let tree = schottky_flip_tree((4.0, 6.0), 2, 2).unwrap();
        let json = serde_json::to_string(&tree.to_wire()).unwrap();
        assert!(json.contains("\"theta\""));
    }

    #[test]
    fn monotone_scan_in_separation() {
        // Larger translation length = larger separation R; the projection
        // spread must not increase.
        let near = schottky_flip_tree((3.2, 5.2), 3, 2).unwrap();
        let far = schottky_flip_tree((4.5, 6.5), 3, 2).unwrap();
        let s_near = bounded_projection_scan(&near, 5).unwrap();
        let s_far = bounded_projection_scan(&far, 5).unwrap();
        assert!(
            s_far.max_spread <= s_near.max_spread + 1e-9,
            "spread should shrink as circles separate: {} vs {}",
            s_far.max_spread,
            s_near.max_spread
        );
    }

    #[test]
    fn boundary_point_projection_is_projection_limit() {
        let gamma = Geodesic::semicircle(0.0, 1.0);
        let xi = BoundaryPoint::finite(5.0);
        let foot = project_boundary_point(&gamma, &xi).unwrap();
        // Limit oracle: project tiny circles around 5.
        let tiny = Geodesic::semicircle(5.0, 1e-6);
        let foot2 = project_point(&gamma, &tiny).unwrap();
        assert!(dist(&foot, &foot2).unwrap() < 1e-5);
    }
}
