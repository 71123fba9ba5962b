//! Concrete group actions on model spaces (the hyperbolic plane, the line,
//! truncated Bass–Serre trees), orbit-growth classification, main-lemma
//! hypothesis checking, and quasi-isometry constant estimation.

use std::rc::Rc;

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::groups::{
    eigen_coords, tb_inverse, tb_multiply, AnosovData, BSElement, BassSerreBall,
    TorusBundleElement,
};
use crate::hyp2::{self, HPoint, Isometry};

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("sampled defect {0} exceeds homomorphism tolerance")]
    NotHomomorphism(f64),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("main-lemma hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("no QI constant C ≤ {cap} fits; worst required C = {required}")]
    NoFitWithinCap { cap: f64, required: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("orbit left the truncated target space")]
    OutsideBall,
    #[error(transparent)]
    Geometry(#[from] hyp2::Hyp2Error),
}

/// Group operations for a concrete element representation.
pub trait Group {
    type Elem: Clone + PartialEq;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, k: u32) -> Self::Elem {
        let mut acc = self.identity();
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }

    fn commute(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }
}

/// `Z² ⋊_φ Z` with the fixed Anosov data.
#[derive(Clone)]
pub struct TorusBundleGroup {
    pub data: AnosovData,
}

impl Group for TorusBundleGroup {
    type Elem = TorusBundleElement;
    fn identity(&self) -> TorusBundleElement {
        TorusBundleElement::identity()
    }
    fn mul(&self, a: &TorusBundleElement, b: &TorusBundleElement) -> TorusBundleElement {
        tb_multiply(&self.data, a, b)
    }
    fn inverse(&self, a: &TorusBundleElement) -> TorusBundleElement {
        tb_inverse(&self.data, a)
    }
}

/// `BS(m, n)` on Britton normal forms.
#[derive(Clone, Copy)]
pub struct BsGroup {
    pub m: i64,
    pub n: i64,
}

impl Group for BsGroup {
    type Elem = BSElement;
    fn identity(&self) -> BSElement {
        BSElement::identity(self.m, self.n).expect("nonzero m, n")
    }
    fn mul(&self, a: &BSElement, b: &BSElement) -> BSElement {
        a.mul(b)
    }
    fn inverse(&self, a: &BSElement) -> BSElement {
        a.inverse()
    }
}

/// `Z²` as integer pairs.
#[derive(Clone, Copy)]
pub struct Z2Group;

impl Group for Z2Group {
    type Elem = (i64, i64);
    fn identity(&self) -> (i64, i64) {
        (0, 0)
    }
    fn mul(&self, a: &(i64, i64), b: &(i64, i64)) -> (i64, i64) {
        (a.0 + b.0, a.1 + b.1)
    }
    fn inverse(&self, a: &(i64, i64)) -> (i64, i64) {
        (-a.0, -a.1)
    }
}

/// `Z` (used to turn a single isometry into a cyclic action).
#[derive(Clone, Copy)]
pub struct ZGroup;

impl Group for ZGroup {
    type Elem = i64;
    fn identity(&self) -> i64 {
        0
    }
    fn mul(&self, a: &i64, b: &i64) -> i64 {
        a + b
    }
    fn inverse(&self, a: &i64) -> i64 {
        -a
    }
}

/// A point of one of the model target spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    H2(HPoint),
    Line(f64),
    Tree(usize),
}

/// The target space of an action, with its metric.
#[derive(Clone)]
pub enum Target {
    H2,
    Line,
    /// A single point (the trivial elliptic structure), carried on the line.
    TrivialPoint,
    TreeBall(Rc<BassSerreBall>),
}

impl Target {
    pub fn dist(&self, x: &Point, y: &Point) -> Result<f64, ActionError> {
        match (self, x, y) {
            (Target::H2, Point::H2(p), Point::H2(q)) => Ok(hyp2::dist(p, q)?),
            (Target::Line, Point::Line(a), Point::Line(b)) => Ok((a - b).abs()),
            (Target::TrivialPoint, _, _) => Ok(0.0),
            (Target::TreeBall(ball), Point::Tree(u), Point::Tree(v)) => {
                Ok(tree_distance(ball, *u, *v) as f64)
            }
            _ => Err(ActionError::InvalidParameter(
                "point does not live in the target space".into(),
            )),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Target::H2 => "h2",
            Target::Line => "line",
            Target::TrivialPoint => "point",
            Target::TreeBall(_) => "tree_ball",
        }
    }
}

fn tree_distance(ball: &BassSerreBall, mut u: usize, mut v: usize) -> u32 {
    let mut d = 0;
    while ball.depth[u] > ball.depth[v] {
        u = ball.parent[u].expect("non-root has parent").0;
        d += 1;
    }
    while ball.depth[v] > ball.depth[u] {
        v = ball.parent[v].expect("non-root has parent").0;
        d += 1;
    }
    while u != v {
        u = ball.parent[u].expect("non-root has parent").0;
        v = ball.parent[v].expect("non-root has parent").0;
        d += 2;
    }
    d
}

type OrbitFn<E> = Rc<dyn Fn(&E, &Point) -> Option<Point>>;
type IsometryFn<E> = Rc<dyn Fn(&E) -> Isometry>;

/// An action of a group on a model space: an orbit map plus the target
/// metric. Immutable closure over immutable data; H²-actions also expose the
/// matrix representation of each element.
#[derive(Clone)]
pub struct ActionHandle<E> {
    pub target: Target,
    pub base: Point,
    orbit: OrbitFn<E>,
    isometry: Option<IsometryFn<E>>,
}

impl<E> ActionHandle<E> {
    /// Image of a point; `None` when it leaves a truncated target.
    pub fn orbit(&self, g: &E, x: &Point) -> Option<Point> {
        (self.orbit)(g, x)
    }

    pub fn orbit_of_base(&self, g: &E) -> Option<Point> {
        self.orbit(g, &self.base)
    }

    /// Matrix representation, for H² actions.
    pub fn isometry_of(&self, g: &E) -> Option<Isometry> {
        self.isometry.as_ref().map(|f| f(g))
    }

    /// Verifies the homomorphism property `orbit(gh, x) = orbit(g, orbit(h, x))`
    /// on sample pairs, within `1e-8`.
    pub fn check_homomorphism<G>(
        &self,
        group: &G,
        samples: &[(E, E)],
        points: &[Point],
    ) -> Result<(), ActionError>
    where
        G: Group<Elem = E>,
        E: Clone + PartialEq,
    {
        for (g, h) in samples {
            let gh = group.mul(g, h);
            for x in points {
                let via_h = match self.orbit(h, x) {
                    Some(p) => p,
                    None => continue,
                };
                let lhs = self.orbit(&gh, x);
                let rhs = self.orbit(g, &via_h);
                if let (Some(lhs), Some(rhs)) = (lhs, rhs) {
                    let d = self.target.dist(&lhs, &rhs)?;
                    if d > 1e-8 {
                        return Err(ActionError::NotHomomorphism(d));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The quasi-parabolic H² action of `Z² ⋊_φ Z`.
///
/// For the plus side, `p · z = z + pi(p)` and `t · z = λ⁻¹ z`, so
/// `(p, n) · z = λ⁻ⁿ z + pi(p)`; the minus side uses `rho` and `t · z = λ z`.
pub fn anosov_action(data: &AnosovData, sign: AnosovSide) -> Result<ActionHandle<TorusBundleElement>, ActionError> {
    if data.lambda <= 1.0 {
        return Err(ActionError::InvalidParameter(
            "anosov actions require lambda > 1 (positive trace)".into(),
        ));
    }
    let data = *data;
    let iso = move |g: &TorusBundleElement| -> Isometry {
        let (rho, pi) = eigen_coords(&g.p, &data);
        let (scale, shift) = match sign {
            AnosovSide::Plus => (data.lambda.powi(-(g.n as i32)), pi),
            AnosovSide::Minus => (data.lambda.powi(g.n as i32), rho),
        };
        Isometry::translation(shift).compose(&Isometry::dilation(scale))
    };
    let iso_rc: IsometryFn<TorusBundleElement> = Rc::new(iso);
    let orbit_iso = Rc::clone(&iso_rc);
    Ok(ActionHandle {
        target: Target::H2,
        base: Point::H2(HPoint::i()),
        orbit: Rc::new(move |g, x| match x {
            Point::H2(p) => Some(Point::H2(hyp2::apply(&orbit_iso(g), p))),
            _ => None,
        }),
        isometry: Some(iso_rc),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnosovSide {
    Plus,
    Minus,
}

/// The lineal action by translations attached to a homomorphism `h: G → R`.
/// `g` is loxodromic iff `h(g) ≠ 0`, elliptic iff `h(g) = 0`.
pub fn lineal_from_hom<E, G, H>(
    group: &G,
    hom: H,
    samples: &[(E, E)],
) -> Result<ActionHandle<E>, ActionError>
where
    G: Group<Elem = E>,
    E: Clone + PartialEq + 'static,
    H: Fn(&E) -> f64 + 'static,
{
    for (g, h) in samples {
        let defect = (hom(&group.mul(g, h)) - hom(g) - hom(h)).abs();
        if defect > 1e-9 {
            return Err(ActionError::NotHomomorphism(defect));
        }
    }
    Ok(ActionHandle {
        target: Target::Line,
        base: Point::Line(0.0),
        orbit: Rc::new(move |g, x| match x {
            Point::Line(v) => Some(Point::Line(v + hom(g))),
            _ => None,
        }),
        isometry: None,
    })
}

/// The trivial action on a point.
pub fn trivial_action<E: 'static>() -> ActionHandle<E> {
    ActionHandle {
        target: Target::TrivialPoint,
        base: Point::Line(0.0),
        orbit: Rc::new(|_, _| Some(Point::Line(0.0))),
        isometry: None,
    }
}

/// The cyclic action of `Z` generated by a single isometry.
pub fn cyclic_action(iso: Isometry) -> ActionHandle<i64> {
    let iso_of = move |k: &i64| -> Isometry {
        let mut acc = Isometry::identity();
        let base = if *k >= 0 { iso } else { iso.inverse() };
        for _ in 0..k.unsigned_abs() {
            acc = acc.compose(&base);
        }
        acc
    };
    let iso_rc: IsometryFn<i64> = Rc::new(iso_of);
    let orbit_iso = Rc::clone(&iso_rc);
    ActionHandle {
        target: Target::H2,
        base: Point::H2(HPoint::i()),
        orbit: Rc::new(move |k, x| match x {
            Point::H2(p) => Some(Point::H2(hyp2::apply(&orbit_iso(k), p))),
            _ => None,
        }),
        isometry: Some(iso_rc),
    }
}

/// The H² action of `BS(m, n)` for `1 ≤ m < |n|`:
/// `a ↦ [[1,1],[0,1]]` and `b ↦ diag(sqrt(|n|/m), sqrt(m/|n|))`, composed
/// with the reflection `z ↦ -conj(z)` when `n < 0`.
pub fn bs_h2_action(m: i64, n: i64) -> Result<ActionHandle<BSElement>, ActionError> {
    if m < 1 || m >= n.abs() {
        return Err(ActionError::UnsupportedCase(format!(
            "bs_h2_action needs 1 ≤ m < |n|, got m = {m}, n = {n}; for m = |n| use lineal_from_hom"
        )));
    }
    let ratio = n.abs() as f64 / m as f64;
    let b_iso = if n > 0 {
        Isometry::dilation(ratio)
    } else {
        Isometry::dilation(ratio).with_reflection()
    };
    let b_inv = b_iso.inverse();
    let iso_of = move |g: &BSElement| -> Isometry {
        let mut acc = Isometry::translation(big_f64(&g.head));
        for syl in &g.syllables {
            acc = acc.compose(if syl.sign > 0 { &b_iso } else { &b_inv });
            acc = acc.compose(&Isometry::translation(syl.rep as f64));
        }
        acc
    };
    let iso_rc: IsometryFn<BSElement> = Rc::new(iso_of);
    let orbit_iso = Rc::clone(&iso_rc);
    Ok(ActionHandle {
        target: Target::H2,
        base: Point::H2(HPoint::i()),
        orbit: Rc::new(move |g, x| match x {
            Point::H2(p) => Some(Point::H2(hyp2::apply(&orbit_iso(g), p))),
            _ => None,
        }),
        isometry: Some(iso_rc),
    })
}

fn big_f64(x: &num_bigint::BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// The action of `BS(m, n)` on its truncated Bass–Serre tree.
pub fn bs_tree_action(ball: Rc<BassSerreBall>) -> ActionHandle<BSElement> {
    let ball_for_orbit = Rc::clone(&ball);
    ActionHandle {
        target: Target::TreeBall(Rc::clone(&ball)),
        base: Point::Tree(ball.root()),
        orbit: Rc::new(move |g, x| match x {
            Point::Tree(v) => ball_for_orbit.act(g, *v).map(Point::Tree),
            _ => None,
        }),
        isometry: None,
    }
}

/// How the displacement sequence `d(x, gᵏx)` grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthTag {
    Elliptic,
    /// Unbounded but sublinear growth. Finite sampling cannot certify
    /// parabolicity, so this is never a hard claim.
    ParabolicSuspect,
    Loxodromic,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitGrowthReport {
    pub tag: GrowthTag,
    /// Fitted linear rate (the translation length for loxodromics).
    pub rate: f64,
    pub max_displacement: f64,
    /// The sampled `(k, d(x, gᵏx))` pairs (geometric subsampling).
    pub samples: Vec<(u32, f64)>,
    /// True when the orbit left a truncated target before `N`.
    pub truncated: bool,
}

/// Thresholds for the growth classifier.
const LOXODROMIC_MIN_RATE: f64 = 0.01;
const RESIDUAL_BAND_FRACTION: f64 = 0.2;
const ELLIPTIC_MAX_DISPLACEMENT: f64 = 10.0;

/// Samples `d(x, gᵏx)` for `k = 1, 2, 4, …, N` and classifies the growth.
///
/// Loxodromic requires a positive-slope linear lower bound fitting all
/// samples (rate > 0.01, residual band under 20% of total displacement);
/// elliptic requires bounded displacement with zero fitted slope; everything
/// else is reported `parabolic_suspect`.
pub fn classify_orbit_growth<E, G>(
    group: &G,
    action: &ActionHandle<E>,
    g: &E,
    n_max: u32,
    base: &Point,
) -> Result<OrbitGrowthReport, ActionError>
where
    G: Group<Elem = E>,
    E: Clone + PartialEq,
{
    if n_max < 16 {
        return Err(ActionError::InvalidParameter("N must be at least 16".into()));
    }
    let mut samples = Vec::new();
    let mut truncated = false;
    let mut power = g.clone();
    let mut k = 1u32;
    // Geometric subsampling: k = 1, 2, 4, ... keeps the arithmetic bounded.
    while k <= n_max {
        match action.orbit(&power, base) {
            Some(img) => samples.push((k, action.target.dist(base, &img)?)),
            None => {
                truncated = true;
                break;
            }
        }
        if k * 2 > n_max && k < n_max {
            // Finish with N itself for a clean tail slope.
            let rem = n_max - k;
            let extra = group.pow(g, rem);
            power = group.mul(&power, &extra);
            k = n_max;
        } else {
            power = group.mul(&power, &power);
            k *= 2;
        }
    }
    if samples.is_empty() {
        return Err(ActionError::OutsideBall);
    }
    let max_displacement = samples.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    let (k_last, d_last) = *samples.last().unwrap();
    let rate = if samples.len() >= 2 {
        let (k_prev, d_prev) = samples[samples.len() - 2];
        ((d_last - d_prev) / (k_last - k_prev) as f64).max(0.0)
    } else {
        d_last / k_last as f64
    };
    let residual_band = samples
        .iter()
        .map(|&(k, d)| (d - rate * k as f64).abs())
        .fold(0.0, f64::max);
    let tag = if rate > LOXODROMIC_MIN_RATE
        && residual_band < RESIDUAL_BAND_FRACTION * max_displacement.max(1e-9)
    {
        GrowthTag::Loxodromic
    } else if max_displacement < ELLIPTIC_MAX_DISPLACEMENT && rate <= LOXODROMIC_MIN_RATE {
        GrowthTag::Elliptic
    } else {
        GrowthTag::ParabolicSuspect
    };
    Ok(OrbitGrowthReport {
        tag,
        rate,
        max_displacement,
        samples,
        truncated,
    })
}

/// A verified main-lemma certificate: `a` and `b` commute, `a` is loxodromic
/// and `b` elliptic in the first action, and `b` is loxodromic in the second.
/// By the lemma, no hyperbolic action dominates both.
#[derive(Debug, Clone, Serialize)]
pub struct MainLemmaCertificate {
    pub a_rate_in_x: f64,
    pub b_max_displacement_in_x: f64,
    pub b_rate_in_y: f64,
    pub conclusion: &'static str,
}

/// Checks the main-lemma hypotheses for commuting elements `a`, `b` acting on
/// `X` and `Y`.
pub fn check_main_lemma<E, G>(
    group: &G,
    act_x: &ActionHandle<E>,
    act_y: &ActionHandle<E>,
    a: &E,
    b: &E,
    n_max: u32,
) -> Result<MainLemmaCertificate, ActionError>
where
    G: Group<Elem = E>,
    E: Clone + PartialEq,
{
    if !group.commute(a, b) {
        return Err(ActionError::HypothesisFailed(
            "elements do not commute".into(),
        ));
    }
    let a_in_x = classify_orbit_growth(group, act_x, a, n_max, &act_x.base)?;
    if a_in_x.tag != GrowthTag::Loxodromic {
        return Err(ActionError::HypothesisFailed(format!(
            "a is not loxodromic in X (got {:?})",
            a_in_x.tag
        )));
    }
    let b_in_x = classify_orbit_growth(group, act_x, b, n_max, &act_x.base)?;
    if b_in_x.tag != GrowthTag::Elliptic {
        return Err(ActionError::HypothesisFailed(format!(
            "b is not elliptic in X (got {:?})",
            b_in_x.tag
        )));
    }
    let b_in_y = classify_orbit_growth(group, act_y, b, n_max, &act_y.base)?;
    if b_in_y.tag != GrowthTag::Loxodromic {
        return Err(ActionError::HypothesisFailed(format!(
            "b is not loxodromic in Y (got {:?})",
            b_in_y.tag
        )));
    }
    Ok(MainLemmaCertificate {
        a_rate_in_x: a_in_x.rate,
        b_max_displacement_in_x: b_in_x.max_displacement,
        b_rate_in_y: b_in_y.rate,
        conclusion: "no hyperbolic action dominates both factors",
    })
}

/// A fitted two-sided quasi-isometry constant.
#[derive(Debug, Clone, Serialize)]
pub struct QIEstimate {
    pub c: f64,
    pub sample_pairs: usize,
}

/// Fits the minimal `C ≥ 1` with `(1/C)·d₁ - C ≤ d₂ ≤ C·d₁ + C` over the
/// orbit-distance tables of the sampled elements.
pub fn qi_estimate<E>(
    act1: &ActionHandle<E>,
    act2: &ActionHandle<E>,
    elements: &[E],
    cap: f64,
) -> Result<QIEstimate, ActionError>
where
    E: Clone + PartialEq,
{
    let orbit1: Vec<Point> = elements
        .iter()
        .filter_map(|g| act1.orbit_of_base(g))
        .collect();
    let orbit2: Vec<Point> = elements
        .iter()
        .filter_map(|g| act2.orbit_of_base(g))
        .collect();
    if orbit1.len() != elements.len() || orbit2.len() != elements.len() {
        return Err(ActionError::OutsideBall);
    }
    let mut required: f64 = 1.0;
    let mut pairs = 0usize;
    for i in 0..elements.len() {
        for j in (i + 1)..elements.len() {
            let d1 = act1.target.dist(&orbit1[i], &orbit1[j])?;
            let d2 = act2.target.dist(&orbit2[i], &orbit2[j])?;
            // Upper bound d2 ≤ C d1 + C needs C ≥ d2/(d1+1); the lower bound
            // d2 ≥ d1/C − C needs C ≥ (−d2 + sqrt(d2² + 4 d1))/2.
            let upper = d2 / (d1 + 1.0);
            let lower = 0.5 * (-d2 + (d2 * d2 + 4.0 * d1).sqrt());
            required = required.max(upper).max(lower);
            pairs += 1;
        }
    }
    if required > cap {
        return Err(ActionError::NoFitWithinCap { cap, required });
    }
    // Re-verify the fitted constant on every pair.
    for i in 0..elements.len() {
        for j in (i + 1)..elements.len() {
            let d1 = act1.target.dist(&orbit1[i], &orbit1[j])?;
            let d2 = act2.target.dist(&orbit2[i], &orbit2[j])?;
            debug_assert!(d2 <= required * d1 + required + 1e-9);
            debug_assert!(d2 >= d1 / required - required - 1e-9);
        }
    }
    Ok(QIEstimate {
        c: required,
        sample_pairs: pairs,
    })
}
