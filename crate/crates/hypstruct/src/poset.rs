//! Assembly and certification of hyperbolic-structure posets at desk scale:
//! the Anosov torus-bundle poset, dominance witnesses, and incomparability
//! certificates.

use serde::Serialize;
use thiserror::Error;

use crate::actions::{
    anosov_action, classify_orbit_growth, lineal_from_hom, trivial_action, ActionHandle,
    AnosovSide, Group, GrowthTag, Point, TorusBundleGroup,
};
use crate::groups::{AnosovData, TorusBundleElement};
use crate::hyp2::{self, BoundaryPoint};

#[derive(Debug, Error)]
pub enum PosetError {
    #[error("matrix is not Anosov")]
    NotAnosov,
    #[error("dominance witness failed: {0}")]
    WitnessFailed(String),
    #[error("fixed-point pattern not found: {0}")]
    PatternNotFound(String),
    #[error(transparent)]
    Action(#[from] crate::actions::ActionError),
    #[error(transparent)]
    Geometry(#[from] hyp2::Hyp2Error),
    #[error(transparent)]
    Group(#[from] crate::groups::GroupError),
}

/// Gromov's classification of cobounded hyperbolic actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Elliptic,
    Lineal,
    QuasiParabolic,
    GeneralType,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypStructureNode {
    pub label: String,
    pub kind: StructureKind,
}

/// A verified coarsely-equivariant coarsely-Lipschitz map witnessing
/// domination.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceWitness {
    /// Fitted constant with `d(f x, f y) ≤ C·d(x, y) + C` on all samples.
    pub lipschitz_c: f64,
    /// `sup_g d(f(g·x), g·f(x))` over the sampled elements.
    pub equivariance_defect: f64,
    pub samples: usize,
}

/// A certificate that two quasi-parabolic actions are incomparable: the
/// sampled conjugates of `g` share their repelling fixed point in the first
/// action (with distinct attracting points) and share their attracting
/// fixed point in the second (with distinct repelling points).
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointCertificate {
    pub common_repelling_in_x: BoundaryPoint,
    pub distinct_attracting_in_x: usize,
    pub common_attracting_in_y: BoundaryPoint,
    pub distinct_repelling_in_y: usize,
    pub conjugates_checked: usize,
}

#[derive(Debug, Clone, Serialize)]
pub enum IncomparabilityCertificate {
    MainLemma(crate::actions::MainLemmaCertificate),
    FixedPointPattern(FixedPointCertificate),
}

#[derive(Debug, Clone, Serialize)]
pub struct PosetDiagram {
    pub nodes: Vec<HypStructureNode>,
    /// Directed greater → lesser, transitively reduced.
    pub hasse_edges: Vec<(usize, usize)>,
    pub dominance: Vec<(usize, usize, DominanceWitness)>,
    pub incomparabilities: Vec<(usize, usize, IncomparabilityCertificate)>,
    /// Metadata: the expanding eigenvalue of the defining matrix.
    pub lambda: f64,
}

impl PosetDiagram {
    /// No pair may be both related and certified incomparable.
    pub fn consistent(&self) -> bool {
        self.incomparabilities.iter().all(|&(a, b, _)| {
            !self
                .hasse_edges
                .iter()
                .any(|&(u, v)| (u, v) == (a, b) || (u, v) == (b, a))
        })
    }
}

/// Verifies a candidate dominance map `greater → lesser` on sampled
/// elements: coarse Lipschitz with constant below `lipschitz_cap` and
/// equivariance defect below `equivariance_cap`.
pub fn dominance_witness<E>(
    greater: &ActionHandle<E>,
    lesser: &ActionHandle<E>,
    map: impl Fn(&Point) -> Point,
    elements: &[E],
    lipschitz_cap: f64,
    equivariance_cap: f64,
) -> Result<DominanceWitness, PosetError>
where
    E: Clone + PartialEq,
{
    let mut orbit_points = vec![greater.base.clone()];
    for g in elements {
        orbit_points.push(greater.orbit_of_base(g).ok_or_else(|| {
            PosetError::WitnessFailed("orbit left the truncated target".into())
        })?);
    }
    // Coarse Lipschitz on all sampled pairs.
    let mut lipschitz_c: f64 = 0.0;
    for i in 0..orbit_points.len() {
        for j in (i + 1)..orbit_points.len() {
            let dx = greater.target.dist(&orbit_points[i], &orbit_points[j])?;
            let dy = lesser
                .target
                .dist(&map(&orbit_points[i]), &map(&orbit_points[j]))?;
            // d(fx, fy) ≤ C d(x,y) + C needs C ≥ dy / (dx + 1).
            lipschitz_c = lipschitz_c.max(dy / (dx + 1.0));
        }
    }
    if lipschitz_c > lipschitz_cap {
        return Err(PosetError::WitnessFailed(format!(
            "Lipschitz constant {lipschitz_c:.3} exceeds cap {lipschitz_cap}"
        )));
    }
    // Coarse equivariance: sup over sampled g of d(f(g x), g f(x)).
    let mut defect: f64 = 0.0;
    for g in elements {
        let gx = greater.orbit_of_base(g).expect("checked above");
        let fgx = map(&gx);
        let gfx = lesser.orbit(g, &map(&greater.base)).ok_or_else(|| {
            PosetError::WitnessFailed("image action left the truncated target".into())
        })?;
        defect = defect.max(lesser.target.dist(&fgx, &gfx)?);
    }
    if defect > equivariance_cap {
        return Err(PosetError::WitnessFailed(format!(
            "equivariance defect {defect:.3} exceeds cap {equivariance_cap}"
        )));
    }
    Ok(DominanceWitness {
        lipschitz_c,
        equivariance_defect: defect,
        samples: elements.len(),
    })
}

/// Incomparability via the main lemma (delegates the hypothesis check).
pub fn incomparability_main_lemma<E, G>(
    group: &G,
    act_x: &ActionHandle<E>,
    act_y: &ActionHandle<E>,
    a: &E,
    b: &E,
) -> Result<IncomparabilityCertificate, PosetError>
where
    G: Group<Elem = E>,
    E: Clone + PartialEq,
{
    let cert = crate::actions::check_main_lemma(group, act_x, act_y, a, b, 64)?;
    Ok(IncomparabilityCertificate::MainLemma(cert))
}

/// Incomparability via the fixed-point pattern of conjugates of `g`.
pub fn incomparability_fixed_points<E, G>(
    group: &G,
    act_x: &ActionHandle<E>,
    act_y: &ActionHandle<E>,
    g: &E,
    conjugators: &[E],
) -> Result<IncomparabilityCertificate, PosetError>
where
    G: Group<Elem = E>,
    E: Clone + PartialEq,
{
    let fixed_points = |act: &ActionHandle<E>,
                        h: &E|
     -> Result<(BoundaryPoint, BoundaryPoint), PosetError> {
        let conj = group.mul(&group.mul(h, g), &group.inverse(h));
        let iso = act
            .isometry_of(&conj)
            .ok_or_else(|| PosetError::PatternNotFound("no isometry representation".into()))?;
        match hyp2::classify(&iso)? {
            hyp2::IsometryClass::Loxodromic {
                attracting,
                repelling,
                ..
            } => Ok((attracting, repelling)),
            other => Err(PosetError::PatternNotFound(format!(
                "conjugate is not loxodromic: {other:?}"
            ))),
        }
    };
    let tol = 1e-7;
    let mut x_attracting: Vec<BoundaryPoint> = Vec::new();
    let mut x_repelling: Vec<BoundaryPoint> = Vec::new();
    let mut y_attracting: Vec<BoundaryPoint> = Vec::new();
    let mut y_repelling: Vec<BoundaryPoint> = Vec::new();
    for h in conjugators {
        let (a, r) = fixed_points(act_x, h)?;
        x_attracting.push(a);
        x_repelling.push(r);
        let (a, r) = fixed_points(act_y, h)?;
        y_attracting.push(a);
        y_repelling.push(r);
    }
    let all_equal = |pts: &[BoundaryPoint]| pts.windows(2).all(|w| w[0].close_to(&w[1], tol));
    let distinct = |pts: &[BoundaryPoint]| -> usize {
        let mut reps: Vec<BoundaryPoint> = Vec::new();
        for p in pts {
            if !reps.iter().any(|r| r.close_to(p, tol)) {
                reps.push(*p);
            }
        }
        reps.len()
    };
    if !all_equal(&x_repelling) {
        return Err(PosetError::PatternNotFound(
            "conjugates do not share a repelling point in X".into(),
        ));
    }
    if !all_equal(&y_attracting) {
        return Err(PosetError::PatternNotFound(
            "conjugates do not share an attracting point in Y".into(),
        ));
    }
    let distinct_attracting_in_x = distinct(&x_attracting);
    let distinct_repelling_in_y = distinct(&y_repelling);
    if distinct_attracting_in_x < 2 || distinct_repelling_in_y < 2 {
        return Err(PosetError::PatternNotFound(
            "conjugates do not witness varying fixed points".into(),
        ));
    }
    Ok(IncomparabilityCertificate::FixedPointPattern(
        FixedPointCertificate {
            common_repelling_in_x: x_repelling[0],
            distinct_attracting_in_x,
            common_attracting_in_y: y_attracting[0],
            distinct_repelling_in_y,
            conjugates_checked: conjugators.len(),
        },
    ))
}

/// Conjugator samples: all words of length ≤ 4 over `{t^{±1}}` and a
/// `Z²`-generating pair, deduplicated.
fn conjugator_samples(group: &TorusBundleGroup) -> Vec<TorusBundleElement> {
    let gens = [
        TorusBundleElement::t_power(1),
        TorusBundleElement::t_power(-1),
        TorusBundleElement::translation(1, 0),
        TorusBundleElement::translation(0, 1),
    ];
    let mut words: Vec<TorusBundleElement> = vec![TorusBundleElement::identity()];
    let mut frontier = words.clone();
    for _ in 0..4 {
        let mut next = Vec::new();
        for w in &frontier {
            for gen in &gens {
                let e = group.mul(w, gen);
                if !words.contains(&e) && !next.contains(&e) {
                    next.push(e);
                }
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words
}

/// The poset of hyperbolic structures of an Anosov torus-bundle group:
/// exactly four nodes — the elliptic point, the lineal line (through the
/// `t`-exponent homomorphism), and the two quasi-parabolic half-plane
/// actions — with Hasse edges `H²⁺ → R`, `H²⁻ → R`, `R → point`, verified
/// dominance witnesses, and a fixed-point incomparability certificate for
/// the `H²⁺/H²⁻` pair.
pub fn anosov_poset(data: &AnosovData) -> Result<PosetDiagram, PosetError> {
    if data.lambda <= 1.0 {
        return Err(PosetError::NotAnosov);
    }
    let group = TorusBundleGroup { data: *data };
    let plus = anosov_action(data, AnosovSide::Plus)?;
    let minus = anosov_action(data, AnosovSide::Minus)?;
    let lineal = lineal_from_hom(&group, |g: &TorusBundleElement| g.n as f64, &[])?;
    let point = trivial_action::<TorusBundleElement>();

    // Kind consistency: the lineal node has t loxodromic and Z² elliptic.
    let sample_elements: Vec<TorusBundleElement> = vec![
        TorusBundleElement::t_power(1),
        TorusBundleElement::translation(1, 0),
        TorusBundleElement::translation(0, 1),
        TorusBundleElement::new(2, -1, 1),
        TorusBundleElement::new(-1, 3, -2),
    ];
    let t = TorusBundleElement::t_power(1);
    let t_growth = classify_orbit_growth(&group, &lineal, &t, 64, &lineal.base)?;
    if t_growth.tag != GrowthTag::Loxodromic {
        return Err(PosetError::WitnessFailed(
            "lineal node: t must be loxodromic".into(),
        ));
    }
    for p in [
        TorusBundleElement::translation(1, 0),
        TorusBundleElement::translation(0, 1),
        TorusBundleElement::translation(3, -2),
    ] {
        let growth = classify_orbit_growth(&group, &lineal, &p, 64, &lineal.base)?;
        if growth.tag != GrowthTag::Elliptic {
            return Err(PosetError::WitnessFailed(
                "lineal node: Z² must act elliptically".into(),
            ));
        }
    }

    // Dominance witnesses along the Hasse edges.
    let log_lambda = data.lambda.ln();
    let height_plus = move |p: &Point| -> Point {
        match p {
            Point::H2(z) => Point::Line(-z.im.ln() / log_lambda),
            other => other.clone(),
        }
    };
    let height_minus = move |p: &Point| -> Point {
        match p {
            Point::H2(z) => Point::Line(z.im.ln() / log_lambda),
            other => other.clone(),
        }
    };
    let collapse = |_: &Point| -> Point { Point::Line(0.0) };
    let w_plus = dominance_witness(&plus, &lineal, height_plus, &sample_elements, 10.0, 1e-6)?;
    let w_minus = dominance_witness(&minus, &lineal, height_minus, &sample_elements, 10.0, 1e-6)?;
    let w_point = dominance_witness(&lineal, &point, collapse, &sample_elements, 1.0, 1e-9)?;

    // Incomparability of the two quasi-parabolic structures.
    let conjugators = conjugator_samples(&group);
    let cert = incomparability_fixed_points(&group, &plus, &minus, &t, &conjugators)?;

    let nodes = vec![
        HypStructureNode {
            label: "point".into(),
            kind: StructureKind::Elliptic,
        },
        HypStructureNode {
            label: "R".into(),
            kind: StructureKind::Lineal,
        },
        HypStructureNode {
            label: "H2+".into(),
            kind: StructureKind::QuasiParabolic,
        },
        HypStructureNode {
            label: "H2-".into(),
            kind: StructureKind::QuasiParabolic,
        },
    ];
    Ok(PosetDiagram {
        nodes,
        hasse_edges: vec![(2, 1), (3, 1), (1, 0)],
        dominance: vec![(2, 1, w_plus), (3, 1, w_minus), (1, 0, w_point)],
        incomparabilities: vec![(2, 3, cert)],
        lambda: data.lambda,
    })
}

/// Deterministic DOT rendering: nodes labeled kind + label, Hasse edges
/// directed greater → lesser, incomparable pairs as dashed-edge comments.
pub fn emit_dot(diagram: &PosetDiagram) -> String {
    let mut out = String::from("digraph poset {\n");
    out.push_str(&format!("  // lambda = {:.6}\n", diagram.lambda));
    for (i, node) in diagram.nodes.iter().enumerate() {
        let kind = match node.kind {
            StructureKind::Elliptic => "elliptic",
            StructureKind::Lineal => "lineal",
            StructureKind::QuasiParabolic => "quasi_parabolic",
            StructureKind::GeneralType => "general_type",
        };
        out.push_str(&format!("  n{i} [label=\"{} ({kind})\"];\n", node.label));
    }
    let mut edges = diagram.hasse_edges.clone();
    edges.sort_unstable();
    for (u, v) in edges {
        out.push_str(&format!("  n{u} -> n{v};\n"));
    }
    let mut pairs: Vec<(usize, usize)> = diagram
        .incomparabilities
        .iter()
        .map(|&(a, b, _)| (a.min(b), a.max(b)))
        .collect();
    pairs.sort_unstable();
    for (a, b) in pairs {
        out.push_str(&format!("  // n{a} and n{b} incomparable (certified)\n"));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{eigen, IntMatrix2};

    fn diagram_for(phi: IntMatrix2) -> PosetDiagram {
        anosov_poset(&eigen(phi).unwrap()).unwrap()
    }

    #[test]
    fn figure_shape_four_nodes_three_edges() {
        let d = diagram_for(IntMatrix2::new(2, 1, 1, 1));
        assert_eq!(d.nodes.len(), 4);
        assert_eq!(d.hasse_edges.len(), 3);
        assert_eq!(d.incomparabilities.len(), 1);
        assert!(d.consistent());
        assert_eq!(d.dominance.len(), 3, "every Hasse edge carries a witness");
        // Kinds: one elliptic, one lineal, two quasi-parabolic.
        assert_eq!(
            d.nodes
                .iter()
                .filter(|n| n.kind == StructureKind::QuasiParabolic)
                .count(),
            2
        );
        assert!(d.nodes.iter().any(|n| n.kind == StructureKind::Elliptic));
        assert!(d.nodes.iter().any(|n| n.kind == StructureKind::Lineal));
    }

    #[test]
    fn shape_invariant_across_anosov_matrices() {
        for tr in 3..=10i64 {
            // A matrix of trace tr: [[tr-1, 1], [tr-2, 1]] has det 1.
            let phi = IntMatrix2::new(tr - 1, 1, tr - 2, 1);
            assert_eq!(phi.det(), 1);
            assert_eq!(phi.trace(), tr);
            let d = diagram_for(phi);
            assert_eq!(d.nodes.len(), 4);
            assert_eq!(d.hasse_edges, vec![(2, 1), (3, 1), (1, 0)]);
            assert_eq!(d.incomparabilities.len(), 1);
        }
    }

    #[test]
    fn rejects_non_anosov() {
        assert!(eigen(IntMatrix2::new(1, 1, 0, 1)).is_err());
    }

    #[test]
    fn dominance_witness_values() {
        let d = diagram_for(IntMatrix2::new(2, 1, 1, 1));
        let (_, _, w) = &d.dominance[0];
        // z ↦ -ln(Im z)/ln λ is (1/ln λ)-Lipschitz with zero equivariance
        // defect.
        let lambda = d.lambda;
        assert!(w.lipschitz_c <= 1.0 / lambda.ln() + 1e-9);
        assert!(w.equivariance_defect < 1e-9);
        let (_, _, w_point) = &d.dominance[2];
        assert_eq!(w_point.lipschitz_c, 0.0);
    }

    #[test]
    fn incomparability_certificate_fixed_points() {
        let d = diagram_for(IntMatrix2::new(2, 1, 1, 1));
        match &d.incomparabilities[0].2 {
            IncomparabilityCertificate::FixedPointPattern(c) => {
                assert!(c.common_repelling_in_x.is_infinity());
                assert!(c.common_attracting_in_y.is_infinity());
                assert!(c.distinct_attracting_in_x >= 2);
                assert!(c.distinct_repelling_in_y >= 2);
            }
            other => panic!("expected fixed-point certificate, got {other:?}"),
        }
    }

    #[test]
    fn pattern_not_found_for_identical_actions() {
        let data = eigen(IntMatrix2::new(2, 1, 1, 1)).unwrap();
        let group = TorusBundleGroup { data };
        let plus = anosov_action(&data, AnosovSide::Plus).unwrap();
        let t = TorusBundleElement::t_power(1);
        let conjugators = conjugator_samples(&group);
        let err =
            incomparability_fixed_points(&group, &plus, &plus, &t, &conjugators).unwrap_err();
        assert!(matches!(err, PosetError::PatternNotFound(_)));
    }

    #[test]
    fn reverse_dominance_candidates_fail() {
        // No coarsely equivariant coarsely Lipschitz map R → H²⁺ exists: Z²
        // fixes every point of the line but translates the plane unboundedly.
        let data = eigen(IntMatrix2::new(2, 1, 1, 1)).unwrap();
        let group = TorusBundleGroup { data };
        let plus = anosov_action(&data, AnosovSide::Plus).unwrap();
        let lineal =
            lineal_from_hom(&group, |g: &TorusBundleElement| g.n as f64, &[]).unwrap();
        // Large Z² elements expose the defect.
        let elements: Vec<TorusBundleElement> = (1..=8)
            .map(|k| TorusBundleElement::translation(13 * k, 5 * k))
            .collect();
        let templates: Vec<Box<dyn Fn(&Point) -> Point>> = vec![
            Box::new(|_: &Point| Point::H2(crate::hyp2::HPoint::i())),
            Box::new(|p: &Point| match p {
                Point::Line(x) => Point::H2(crate::hyp2::HPoint {
                    re: *x,
                    im: 1.0,
                }),
                other => other.clone(),
            }),
            Box::new(|p: &Point| match p {
                Point::Line(x) => Point::H2(crate::hyp2::HPoint {
                    re: 0.0,
                    im: (-x).exp(),
                }),
                other => other.clone(),
            }),
        ];
        for map in templates {
            let outcome =
                dominance_witness(&lineal, &plus, map, &elements, 50.0, 10.0);
            assert!(
                matches!(outcome, Err(PosetError::WitnessFailed(_))),
                "a reverse witness must fail"
            );
        }
    }

    #[test]
    fn dot_output_deterministic_and_shaped() {
        let d = diagram_for(IntMatrix2::new(2, 1, 1, 1));
        let dot1 = emit_dot(&d);
        let dot2 = emit_dot(&diagram_for(IntMatrix2::new(2, 1, 1, 1)));
        assert_eq!(dot1, dot2, "byte-identical across runs");
        assert_eq!(dot1.matches("->").count(), 3, "three Hasse edges");
        assert_eq!(dot1.matches("[label=").count(), 4, "four node lines");
        assert!(dot1.contains("incomparable"));
    }

    #[test]
    fn single_node_diagram_renders() {
        let d = PosetDiagram {
            nodes: vec![HypStructureNode {
                label: "point".into(),
                kind: StructureKind::Elliptic,
            }],
            hasse_edges: vec![],
            dominance: vec![],
            incomparabilities: vec![],
            lambda: f64::NAN,
        };
        let dot = emit_dot(&d);
        assert!(!dot.contains("->"));
    }

    #[test]
    fn certificate_consistency_sweep() {
        // Along every registered dominance edge out of H²⁺, t stays
        // loxodromic (the main-lemma consistency property).
        let data = eigen(IntMatrix2::new(2, 1, 1, 1)).unwrap();
        let group = TorusBundleGroup { data };
        let plus = anosov_action(&data, AnosovSide::Plus).unwrap();
        let lineal =
            lineal_from_hom(&group, |g: &TorusBundleElement| g.n as f64, &[]).unwrap();
        let t = TorusBundleElement::t_power(1);
        for act in [&plus, &lineal] {
            let growth = classify_orbit_growth(&group, act, &t, 64, &act.base).unwrap();
            assert_eq!(growth.tag, GrowthTag::Loxodromic);
        }
    }
}
