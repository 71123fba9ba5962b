//! Word metrics: symmetric generating sets with finite enumerators, and
//! breadth-first word balls.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::matrices::AnosovData;
use super::torus_bundle::{in_q, QSide, TorusBundleElement, TorusBundleElementWire};
use super::GroupError;

/// A generating set given by a membership predicate and a finite enumerator
/// within a bounding box. Generating sets are symmetric: `g ∈ S` iff `g⁻¹ ∈ S`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GeneratorSpec {
    /// `Q_ε ∪ {t^{±1}}` for the torus-bundle group.
    #[serde(rename = "Q_eps")]
    QEps { eps: f64, side: QSide },
    /// An explicit finite symmetric set.
    #[serde(rename = "finite")]
    Finite { elements: Vec<TorusBundleElementWire> },
}

impl GeneratorSpec {
    /// Membership test (for `QEps`, the box bound is irrelevant).
    pub fn contains(&self, g: &TorusBundleElement, data: &AnosovData) -> bool {
        match self {
            GeneratorSpec::QEps { eps, side } => {
                (g.n == 0 && in_q(&g.p, *eps, *side, data))
                    || (g.n.abs() == 1 && g.p.0.is_zero() && g.p.1.is_zero())
            }
            GeneratorSpec::Finite { elements } => elements
                .iter()
                .any(|w| TorusBundleElement::from(w) == *g),
        }
    }

    /// Enumerates the generators with `Z²` part inside `[-box, box]²`.
    pub fn enumerate(&self, data: &AnosovData, box_radius: i64) -> Vec<TorusBundleElement> {
        match self {
            GeneratorSpec::QEps { eps, side } => {
                let mut out = vec![
                    TorusBundleElement::t_power(1),
                    TorusBundleElement::t_power(-1),
                ];
                for x in -box_radius..=box_radius {
                    for y in -box_radius..=box_radius {
                        if (x, y) == (0, 0) {
                            continue;
                        }
                        if in_q(&(x.into(), y.into()), *eps, *side, data) {
                            out.push(TorusBundleElement::translation(x, y));
                        }
                    }
                }
                out
            }
            GeneratorSpec::Finite { elements } => {
                elements.iter().map(TorusBundleElement::from).collect()
            }
        }
    }

    /// Checks symmetry of the enumerated set.
    pub fn is_symmetric(&self, data: &AnosovData, box_radius: i64) -> bool {
        use super::torus_bundle::tb_inverse;
        let gens = self.enumerate(data, box_radius);
        gens.iter().all(|g| {
            let inv = tb_inverse(data, g);
            gens.contains(&inv)
        })
    }
}

/// Word lengths out to a fixed radius, as computed by BFS.
#[derive(Debug, Clone)]
pub struct WordBall<E: Eq + Hash> {
    pub lengths: HashMap<E, u32>,
    pub radius: u32,
    /// True when some frontier element left the universe; lengths of boundary
    /// elements are then only upper bounds.
    pub truncated: bool,
}

impl<E: Eq + Hash> WordBall<E> {
    pub fn length(&self, g: &E) -> Option<u32> {
        self.lengths.get(g).copied()
    }
}

/// Breadth-first word ball over an arbitrary element type.
///
/// Elements outside the universe predicate are not expanded; `max_visited`
/// caps the ball size (`UniverseOverflow` when exceeded).
pub fn word_ball<E, M, U>(
    identity: E,
    generators: &[E],
    radius: u32,
    mul: M,
    in_universe: U,
    max_visited: usize,
) -> Result<WordBall<E>, GroupError>
where
    E: Clone + Eq + Hash,
    M: Fn(&E, &E) -> E,
    U: Fn(&E) -> bool,
{
    let mut lengths = HashMap::new();
    let mut queue = VecDeque::new();
    let mut truncated = false;
    lengths.insert(identity.clone(), 0);
    queue.push_back((identity, 0u32));
    while let Some((g, len)) = queue.pop_front() {
        if len == radius {
            continue;
        }
        for s in generators {
            let h = mul(&g, s);
            if !in_universe(&h) {
                truncated = true;
                continue;
            }
            if !lengths.contains_key(&h) {
                if lengths.len() >= max_visited {
                    return Err(GroupError::UniverseOverflow(max_visited));
                }
                lengths.insert(h.clone(), len + 1);
                queue.push_back((h, len + 1));
            }
        }
    }
    Ok(WordBall {
        lengths,
        radius,
        truncated,
    })
}

/// Word ball for the torus-bundle group with the standard universe bound
/// `|p| ≤ coord_bound, |n| ≤ n_bound`.
pub fn tb_word_ball(
    data: &AnosovData,
    spec: &GeneratorSpec,
    radius: u32,
    gen_box: i64,
    coord_bound: i64,
    n_bound: i64,
    max_visited: usize,
) -> Result<WordBall<TorusBundleElement>, GroupError> {
    use super::torus_bundle::tb_multiply;
    let generators = spec.enumerate(data, gen_box);
    if generators.is_empty() {
        return Err(GroupError::EmptySet);
    }
    let bound = num_bigint::BigInt::from(coord_bound);
    word_ball(
        TorusBundleElement::identity(),
        &generators,
        radius,
        |a, b| tb_multiply(data, a, b),
        |g| g.p.0.abs() <= bound && g.p.1.abs() <= bound && g.n.abs() <= n_bound,
        max_visited,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::matrices::{eigen, IntMatrix2};

    fn standard() -> AnosovData {
        eigen(IntMatrix2::new(2, 1, 1, 1)).unwrap()
    }

    fn q1_spec() -> GeneratorSpec {
        GeneratorSpec::QEps {
            eps: 1.0,
            side: QSide::Plus,
        }
    }

    #[test]
    fn generator_spec_symmetric_and_json() {
        let data = standard();
        assert!(q1_spec().is_symmetric(&data, 10));
        let json = serde_json::to_string(&q1_spec()).unwrap();
        assert!(json.contains("\"kind\":\"Q_eps\""));
        let parsed: GeneratorSpec = serde_json::from_str(r#"{"kind":"Q_eps","eps":1.0,"side":"plus"}"#).unwrap();
        assert!(matches!(parsed, GeneratorSpec::QEps { .. }));
        let finite: GeneratorSpec =
            serde_json::from_str(r#"{"kind":"finite","elements":[{"p":[1,0],"n":0},{"p":[-1,0],"n":0}]}"#)
                .unwrap();
        assert!(finite.is_symmetric(&data, 10));
    }

    #[test]
    fn ball_basics_identity_and_generators() {
        let data = standard();
        let ball = tb_word_ball(&data, &q1_spec(), 3, 20, 2000, 5, 1_000_000).unwrap();
        assert_eq!(ball.length(&TorusBundleElement::identity()), Some(0));
        for g in q1_spec().enumerate(&data, 20) {
            assert_eq!(ball.length(&g), Some(1), "generator must have length 1");
        }
    }

    #[test]
    fn t_cubed_has_length_three() {
        // BFS oracle plus the homomorphism-to-Z lower bound n ≤ ‖tⁿ‖: every
        // generator changes the t-exponent by at most 1.
        let data = standard();
        let ball = tb_word_ball(&data, &q1_spec(), 3, 20, 4000, 5, 1_000_000).unwrap();
        assert_eq!(ball.length(&TorusBundleElement::t_power(3)), Some(3));
    }

    #[test]
    fn lengths_symmetric_under_inverse() {
        use crate::groups::torus_bundle::tb_inverse;
        let data = standard();
        let ball = tb_word_ball(&data, &q1_spec(), 3, 10, 2000, 5, 1_000_000).unwrap();
        for (g, len) in &ball.lengths {
            let inv = tb_inverse(&data, g);
            if let Some(inv_len) = ball.length(&inv) {
                assert_eq!(*len, inv_len, "length(g) = length(g⁻¹)");
            }
        }
    }

    #[test]
    fn lengths_subadditive_within_ball() {
        use crate::groups::torus_bundle::tb_multiply;
        let data = standard();
        let ball = tb_word_ball(&data, &q1_spec(), 3, 8, 4000, 6, 2_000_000).unwrap();
        let elements: Vec<_> = ball.lengths.keys().cloned().collect();
        let mut checked = 0;
        for g in elements.iter().take(60) {
            for h in elements.iter().take(60) {
                let gh = tb_multiply(&data, g, h);
                if let (Some(lg), Some(lh), Some(lgh)) =
                    (ball.length(g), ball.length(h), ball.length(&gh))
                {
                    assert!(lgh <= lg + lh, "subadditivity failed");
                    checked += 1;
                }
            }
        }
        assert!(checked > 100, "not enough triples inside the ball");
    }

    #[test]
    fn overflow_reported() {
        let data = standard();
        let err = tb_word_ball(&data, &q1_spec(), 4, 20, 10_000, 10, 50).unwrap_err();
        assert!(matches!(err, GroupError::UniverseOverflow(50)));
    }
}
