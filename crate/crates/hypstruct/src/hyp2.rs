//! Upper half-plane hyperbolic geometry: points, geodesics, isometries,
//! classification, and closest-point projections between disjoint geodesics.
//!
//! All values are immutable and all operations pure. Matrices act by Möbius
//! transformations; orientation-reversing isometries are the reflection
//! `z ↦ -conj(z)` followed by a Möbius map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for algebraic identities (determinants, matrix equalities).
pub const ALG_TOL: f64 = 1e-9;
/// Tolerance for geometric optimizations (perpendicular feet, minimizers).
pub const GEO_TOL: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum Hyp2Error {
    #[error("point has non-positive imaginary part: im = {0}")]
    NonPositiveImaginary(f64),
    #[error("matrix determinant {0} is not 1 within tolerance")]
    DegenerateMatrix(f64),
    #[error("geodesics share an endpoint or cross")]
    AsymptoticOrCrossing,
    #[error("geodesic endpoints coincide")]
    CoincidentEndpoints,
    #[error("coordinate is not finite")]
    NonFinite,
}

/// A point of the upper half-plane, `im > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub re: f64,
    pub im: f64,
}

impl HPoint {
    pub fn new(re: f64, im: f64) -> Result<Self, Hyp2Error> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Hyp2Error::NonFinite);
        }
        if im <= 0.0 {
            return Err(Hyp2Error::NonPositiveImaginary(im));
        }
        Ok(HPoint { re, im })
    }

    /// The base point `i`.
    pub fn i() -> Self {
        HPoint { re: 0.0, im: 1.0 }
    }

    fn check(&self) -> Result<(), Hyp2Error> {
        if !self.re.is_finite() || !self.im.is_finite() {
            return Err(Hyp2Error::NonFinite);
        }
        if self.im <= 0.0 {
            return Err(Hyp2Error::NonPositiveImaginary(self.im));
        }
        Ok(())
    }
}

/// A point of the boundary circle `∂H² = R ∪ {∞}`, with an explicit tag for
/// infinity (never a sentinel float).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BoundaryPoint {
    Finite { value: f64 },
    Infinity,
}

impl BoundaryPoint {
    pub fn finite(value: f64) -> Self {
        BoundaryPoint::Finite { value }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    /// Approximate equality of boundary points (infinity only equals infinity).
    pub fn close_to(&self, other: &BoundaryPoint, tol: f64) -> bool {
        match (self, other) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
            (BoundaryPoint::Finite { value: a }, BoundaryPoint::Finite { value: b }) => {
                (a - b).abs() <= tol
            }
            _ => false,
        }
    }

    /// Angle coordinate on the boundary circle: `atan` for finite points,
    /// `π/2` for infinity. Strictly monotone, so cyclic order is preserved.
    fn angle(&self) -> f64 {
        match self {
            BoundaryPoint::Finite { value } => value.atan(),
            BoundaryPoint::Infinity => std::f64::consts::FRAC_PI_2,
        }
    }
}

/// A complete geodesic, stored in derived form: a vertical line (one endpoint
/// at infinity) or a semicircle orthogonal to the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Geodesic {
    Vertical { foot: f64 },
    Semicircle { center: f64, radius: f64 },
}

impl Geodesic {
    pub fn vertical(foot: f64) -> Self {
        Geodesic::Vertical { foot }
    }

    pub fn semicircle(center: f64, radius: f64) -> Self {
        assert!(radius > 0.0, "semicircle radius must be positive");
        Geodesic::Semicircle { center, radius }
    }

    /// The geodesic with the two given distinct boundary endpoints.
    pub fn from_endpoints(a: BoundaryPoint, b: BoundaryPoint) -> Result<Self, Hyp2Error> {
        match (a, b) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => {
                Err(Hyp2Error::CoincidentEndpoints)
            }
            (BoundaryPoint::Infinity, BoundaryPoint::Finite { value })
            | (BoundaryPoint::Finite { value }, BoundaryPoint::Infinity) => {
                Ok(Geodesic::Vertical { foot: value })
            }
            (BoundaryPoint::Finite { value: x }, BoundaryPoint::Finite { value: y }) => {
                if (x - y).abs() <= ALG_TOL * (1.0 + x.abs().max(y.abs())) {
                    return Err(Hyp2Error::CoincidentEndpoints);
                }
                Ok(Geodesic::Semicircle {
                    center: 0.5 * (x + y),
                    radius: 0.5 * (x - y).abs(),
                })
            }
        }
    }

    /// The unordered endpoint pair.
    pub fn endpoints(&self) -> (BoundaryPoint, BoundaryPoint) {
        match *self {
            Geodesic::Vertical { foot } => (BoundaryPoint::finite(foot), BoundaryPoint::Infinity),
            Geodesic::Semicircle { center, radius } => (
                BoundaryPoint::finite(center - radius),
                BoundaryPoint::finite(center + radius),
            ),
        }
    }

    /// Unit-speed parametrization. For a vertical line the parameter is
    /// `ln(im)`; for a semicircle the origin is the apex and the positive
    /// direction points toward the right-hand endpoint.
    pub fn point_at(&self, s: f64) -> HPoint {
        match *self {
            Geodesic::Vertical { foot } => HPoint {
                re: foot,
                im: s.exp(),
            },
            Geodesic::Semicircle { center, radius } => HPoint {
                re: center + radius * s.tanh(),
                im: radius / s.cosh(),
            },
        }
    }

    /// Arc-length parameter of a point assumed to lie on the geodesic.
    pub fn param_of(&self, p: &HPoint) -> f64 {
        match *self {
            Geodesic::Vertical { .. } => p.im.ln(),
            Geodesic::Semicircle { center, radius } => {
                let t = ((p.re - center) / radius).clamp(-1.0, 1.0);
                t.atanh()
            }
        }
    }

    /// Hyperbolic distance from a point to this geodesic.
    pub fn dist_to_point(&self, p: &HPoint) -> f64 {
        let s = match *self {
            Geodesic::Vertical { foot } => (p.re - foot).abs() / p.im,
            Geodesic::Semicircle { center, radius } => {
                let d2 = (p.re - center) * (p.re - center) + p.im * p.im;
                (d2 - radius * radius).abs() / (2.0 * radius * p.im)
            }
        };
        s.asinh()
    }

    /// True when the two geodesics share an endpoint (within tolerance).
    pub fn shares_endpoint(&self, other: &Geodesic) -> bool {
        let (a1, a2) = self.endpoints();
        let (b1, b2) = other.endpoints();
        let tol = ALG_TOL * 10.0;
        a1.close_to(&b1, tol) || a1.close_to(&b2, tol) || a2.close_to(&b1, tol) || a2.close_to(&b2, tol)
    }

    /// True when the endpoint pairs interleave on the boundary circle, i.e.
    /// the geodesics cross.
    pub fn crosses(&self, other: &Geodesic) -> bool {
        let (a1, a2) = self.endpoints();
        let (b1, b2) = other.endpoints();
        let (ta1, ta2) = (a1.angle(), a2.angle());
        let (lo, hi) = if ta1 < ta2 { (ta1, ta2) } else { (ta2, ta1) };
        let inside = |t: f64| t > lo && t < hi;
        inside(b1.angle()) != inside(b2.angle())
    }

    /// True when the geodesics are disjoint with four distinct endpoints.
    pub fn disjoint_from(&self, other: &Geodesic) -> bool {
        !self.shares_endpoint(other) && !self.crosses(other)
    }
}

/// An isometry of the upper half-plane: a real matrix of determinant one
/// acting by Möbius transformations, optionally precomposed with the
/// reflection `z ↦ -conj(z)`. Matrices `(a,b,c,d)` and `(-a,-b,-c,-d)` act
/// identically and are treated as equal.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Isometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    #[serde(rename = "rev", default)]
    pub reversing: bool,
}

impl Isometry {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, Hyp2Error> {
        let det = a * d - b * c;
        if !det.is_finite() || (det - 1.0).abs() > ALG_TOL {
            return Err(Hyp2Error::DegenerateMatrix(det));
        }
        Ok(Isometry {
            a,
            b,
            c,
            d,
            reversing: false,
        })
    }

    /// Rescales a matrix of positive determinant to determinant one.
    pub fn from_unnormalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self, Hyp2Error> {
        let det = a * d - b * c;
        if !det.is_finite() || det <= 0.0 {
            return Err(Hyp2Error::DegenerateMatrix(det));
        }
        let s = det.sqrt();
        Ok(Isometry {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
            reversing: false,
        })
    }

    pub fn identity() -> Self {
        Isometry {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
            reversing: false,
        }
    }

    /// The reflection across the imaginary axis, `z ↦ -conj(z)`.
    pub fn reflection() -> Self {
        Isometry {
            reversing: true,
            ..Isometry::identity()
        }
    }

    /// Horizontal translation `z ↦ z + t`.
    pub fn translation(t: f64) -> Self {
        Isometry {
            a: 1.0,
            b: t,
            c: 0.0,
            d: 1.0,
            reversing: false,
        }
    }

    /// Dilation `z ↦ s·z` for `s > 0`.
    pub fn dilation(s: f64) -> Self {
        assert!(s > 0.0);
        let r = s.sqrt();
        Isometry {
            a: r,
            b: 0.0,
            c: 0.0,
            d: 1.0 / r,
            reversing: false,
        }
    }

    /// Rotation about `i` by angle `t` (elliptic for `t` not a multiple of π).
    pub fn rotation_about_i(t: f64) -> Self {
        let (s, c) = (0.5 * t).sin_cos();
        Isometry {
            a: c,
            b: s,
            c: -s,
            d: c,
            reversing: false,
        }
    }

    pub fn with_reflection(mut self) -> Self {
        self.reversing = !self.reversing;
        self
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Composition: `(self ∘ other)(z) = self(other(z))`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        // Conjugating a Möbius matrix by the reflection negates b and c.
        let (oa, ob, oc, od) = if self.reversing {
            (other.a, -other.b, -other.c, other.d)
        } else {
            (other.a, other.b, other.c, other.d)
        };
        Isometry {
            a: self.a * oa + self.b * oc,
            b: self.a * ob + self.b * od,
            c: self.c * oa + self.d * oc,
            d: self.c * ob + self.d * od,
            reversing: self.reversing != other.reversing,
        }
    }

    pub fn inverse(&self) -> Isometry {
        // (M ψ)^{-1} = ψ M^{-1} = (ψ M^{-1} ψ) ψ
        let inv = Isometry {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
            reversing: false,
        };
        if self.reversing {
            Isometry {
                a: inv.a,
                b: -inv.b,
                c: -inv.c,
                d: inv.d,
                reversing: true,
            }
        } else {
            inv
        }
    }

    /// Equality up to the sign identification `(a,b,c,d) ~ (-a,-b,-c,-d)`.
    pub fn close_to(&self, other: &Isometry, tol: f64) -> bool {
        if self.reversing != other.reversing {
            return false;
        }
        let same = (self.a - other.a).abs() <= tol
            && (self.b - other.b).abs() <= tol
            && (self.c - other.c).abs() <= tol
            && (self.d - other.d).abs() <= tol;
        let negated = (self.a + other.a).abs() <= tol
            && (self.b + other.b).abs() <= tol
            && (self.c + other.c).abs() <= tol
            && (self.d + other.d).abs() <= tol;
        same || negated
    }

    /// Image of a boundary point under the boundary extension.
    pub fn boundary_apply(&self, x: &BoundaryPoint) -> BoundaryPoint {
        let x = match (self.reversing, x) {
            (true, BoundaryPoint::Finite { value }) => BoundaryPoint::finite(-value),
            _ => *x,
        };
        match x {
            BoundaryPoint::Infinity => {
                if self.c.abs() <= ALG_TOL {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite { value } => {
                let den = self.c * value + self.d;
                if den.abs() <= ALG_TOL * (1.0 + value.abs()) {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::finite((self.a * value + self.b) / den)
                }
            }
        }
    }

    /// Image of a geodesic (via its endpoints).
    pub fn apply_geodesic(&self, g: &Geodesic) -> Result<Geodesic, Hyp2Error> {
        let (p, q) = g.endpoints();
        Geodesic::from_endpoints(self.boundary_apply(&p), self.boundary_apply(&q))
    }
}

/// Classification of an isometry by trace, with loxodromic data.
#[derive(Debug, Clone, PartialEq)]
pub enum IsometryClass {
    Identity,
    Elliptic,
    /// `tolerance_band` marks matrices with `|tr|` inside the band
    /// `[2 - ALG_TOL, 2 + ALG_TOL]`, which are reported parabolic for
    /// deterministic behavior near the degenerate locus.
    Parabolic {
        tolerance_band: bool,
    },
    Loxodromic {
        translation_length: f64,
        attracting: BoundaryPoint,
        repelling: BoundaryPoint,
    },
    /// Orientation-reversing isometries are classified through their square;
    /// `fixes_geodesic` distinguishes a pure reflection (square = identity,
    /// fixed geodesic exists) from a glide reflection (square loxodromic).
    ReversingComposite {
        square: Box<IsometryClass>,
    },
}

impl IsometryClass {
    pub fn translation_length(&self) -> Option<f64> {
        match self {
            IsometryClass::Loxodromic {
                translation_length, ..
            } => Some(*translation_length),
            IsometryClass::ReversingComposite { square } => {
                square.translation_length().map(|l| l / 2.0)
            }
            _ => None,
        }
    }
}

/// Hyperbolic distance between two points.
///
/// Computed as `2·arcsinh(|p - q| / (2·sqrt(im p · im q)))`, which is exact on
/// the test cases `d(i, i+x) = 2·arcsinh(|x|/2)` and `d(i, y·i) = ln y`.
pub fn dist(p: &HPoint, q: &HPoint) -> Result<f64, Hyp2Error> {
    p.check()?;
    q.check()?;
    let dx = p.re - q.re;
    let dy = p.im - q.im;
    let chord = (dx * dx + dy * dy).sqrt();
    Ok(2.0 * (chord / (2.0 * (p.im * q.im).sqrt())).asinh())
}

/// Applies an isometry to a point.
pub fn apply(g: &Isometry, p: &HPoint) -> HPoint {
    let (x, y) = if g.reversing { (-p.re, p.im) } else { (p.re, p.im) };
    // (a z + b) / (c z + d) with z = x + i y
    let nre = g.a * x + g.b;
    let dre = g.c * x + g.d;
    let den = dre * dre + (g.c * y) * (g.c * y);
    HPoint {
        re: (nre * dre + g.a * g.c * y * y) / den,
        im: y * (g.a * g.d - g.b * g.c) / den,
    }
}

/// Classifies an isometry by its trace.
///
/// Orientation-preserving: `|tr| < 2` elliptic, `|tr|` within the tolerance
/// band of 2 parabolic (identity matrices excepted), `|tr| > 2` loxodromic
/// with translation length `2·arccosh(|tr|/2)` and fixed points the roots of
/// `c z² + (d - a) z - b`, labeled by eigenvalue moduli. Reversing isometries
/// are classified via their square.
pub fn classify(g: &Isometry) -> Result<IsometryClass, Hyp2Error> {
    let det = g.det();
    if (det - 1.0).abs() > ALG_TOL {
        return Err(Hyp2Error::DegenerateMatrix(det));
    }
    if g.reversing {
        let sq = g.compose(g);
        let square = classify(&Isometry {
            reversing: false,
            ..sq
        })?;
        return Ok(IsometryClass::ReversingComposite {
            square: Box::new(square),
        });
    }
    let tr = g.trace().abs();
    let identity_like = g.b.abs() <= ALG_TOL
        && g.c.abs() <= ALG_TOL
        && (g.a - g.d).abs() <= ALG_TOL
        && (tr - 2.0).abs() <= ALG_TOL;
    if identity_like {
        return Ok(IsometryClass::Identity);
    }
    if (tr - 2.0).abs() <= ALG_TOL {
        return Ok(IsometryClass::Parabolic {
            tolerance_band: tr != 2.0,
        });
    }
    if tr < 2.0 {
        return Ok(IsometryClass::Elliptic);
    }
    let translation_length = 2.0 * (tr / 2.0).acosh();
    // Fixed points solve c z^2 + (d - a) z - b = 0. The fixed point whose
    // eigenvalue has modulus > 1 is attracting.
    let (attracting, repelling) = loxodromic_fixed_points(g);
    Ok(IsometryClass::Loxodromic {
        translation_length,
        attracting,
        repelling,
    })
}

fn loxodromic_fixed_points(g: &Isometry) -> (BoundaryPoint, BoundaryPoint) {
    // Eigenvalues of [[a,b],[c,d]]: (tr ± sqrt(tr² - 4)) / 2 for tr = a + d.
    // The eigenvector (z, 1) for eigenvalue μ has c z + d = μ, and z is the
    // attracting fixed point when |μ| > 1.
    let tr = g.a + g.d;
    let disc = (tr * tr - 4.0).sqrt();
    let mu1 = (tr + disc) / 2.0;
    let mu2 = (tr - disc) / 2.0;
    let (mu_big, mu_small) = if mu1.abs() > mu2.abs() {
        (mu1, mu2)
    } else {
        (mu2, mu1)
    };
    let fixed_of = |mu: f64| -> BoundaryPoint {
        if g.c.abs() <= ALG_TOL {
            // Fixed points are ∞ (eigenvalue a) and b/(d-a).
            if (mu - g.a).abs() <= (mu - g.d).abs() {
                BoundaryPoint::Infinity
            } else {
                BoundaryPoint::finite(g.b / (g.d - g.a))
            }
        } else {
            BoundaryPoint::finite((mu - g.d) / g.c)
        }
    };
    (fixed_of(mu_big), fixed_of(mu_small))
}

/// The isometry sending the endpoints of `g` to 0 and ∞ (so `g` itself to the
/// imaginary axis).
fn to_imaginary_axis(g: &Geodesic) -> Isometry {
    match *g {
        Geodesic::Vertical { foot } => Isometry::translation(-foot),
        Geodesic::Semicircle { center, radius } => {
            // z ↦ (z - (center - radius)) / (-(z - (center + radius)))
            // sends center - radius ↦ 0 and center + radius ↦ ∞.
            let u = center - radius;
            let v = center + radius;
            Isometry::from_unnormalized(1.0, -u, -1.0, v).expect("radius > 0 gives det 2r > 0")
        }
    }
}

/// The common perpendicular segment between two disjoint, non-asymptotic
/// geodesics: the foot on each and the distance between them.
///
/// The computation maps `alpha` to the imaginary axis, where `beta` becomes a
/// semicircle with `|center| > radius`; the perpendicular is then the
/// semicircle about 0 of radius `sqrt(center² - radius²)`.
pub fn common_perpendicular(
    alpha: &Geodesic,
    beta: &Geodesic,
) -> Result<(HPoint, HPoint, f64), Hyp2Error> {
    if alpha.shares_endpoint(beta) || alpha.crosses(beta) {
        return Err(Hyp2Error::AsymptoticOrCrossing);
    }
    let m = to_imaginary_axis(alpha);
    let beta_im = m.apply_geodesic(beta)?;
    let (c, r) = match beta_im {
        Geodesic::Semicircle { center, radius } => (center, radius),
        // beta shares the endpoint ∞ with the imaginary axis; callers cannot
        // reach this because shared endpoints are rejected above.
        Geodesic::Vertical { .. } => return Err(Hyp2Error::AsymptoticOrCrossing),
    };
    if c.abs() <= r {
        return Err(Hyp2Error::AsymptoticOrCrossing);
    }
    let rho = (c * c - r * r).sqrt();
    let foot_alpha_im = HPoint { re: 0.0, im: rho };
    // Intersection of the perpendicular semicircle(0, rho) with semicircle(c, r).
    let x = (c * c + rho * rho - r * r) / (2.0 * c);
    let y = (rho * rho - x * x).max(0.0).sqrt();
    let foot_beta_im = HPoint { re: x, im: y };
    let minv = m.inverse();
    let foot_alpha = apply(&minv, &foot_alpha_im);
    let foot_beta = apply(&minv, &foot_beta_im);
    let length = dist(&foot_alpha, &foot_beta)?;
    Ok((foot_alpha, foot_beta, length))
}

/// The closest point of `gamma` to the geodesic `alpha` (the foot of the
/// common perpendicular on `gamma`).
pub fn project_point(gamma: &Geodesic, alpha: &Geodesic) -> Result<HPoint, Hyp2Error> {
    let (foot_gamma, _, _) = common_perpendicular(gamma, alpha)?;
    Ok(foot_gamma)
}
