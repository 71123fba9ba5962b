//! Elements of `Z² ⋊_φ Z`, eigen-coordinates, the confining subsets `Q_ε`,
//! and the verification procedures for the confinement conditions.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::matrices::{AnosovData, IntMatrix2};
use super::GroupError;

/// An element `(p, n)` of `Z² ⋊_φ Z`, with multiplication convention
/// `(p, n)·(q, m) = (p + φⁿ q, n + m)`, which makes `t p t⁻¹ = φ(p)` literal.
///
/// The `Z²` part uses arbitrary-precision integers: `φⁿ q` grows like `λⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusBundleElement {
    pub p: (BigInt, BigInt),
    pub n: i64,
}

impl TorusBundleElement {
    pub fn new(p0: impl Into<BigInt>, p1: impl Into<BigInt>, n: i64) -> Self {
        TorusBundleElement {
            p: (p0.into(), p1.into()),
            n,
        }
    }

    pub fn identity() -> Self {
        TorusBundleElement::new(0, 0, 0)
    }

    pub fn translation(p0: impl Into<BigInt>, p1: impl Into<BigInt>) -> Self {
        TorusBundleElement::new(p0, p1, 0)
    }

    pub fn t_power(n: i64) -> Self {
        TorusBundleElement::new(0, 0, n)
    }

    pub fn is_identity(&self) -> bool {
        self.p.0.is_zero() && self.p.1.is_zero() && self.n == 0
    }
}

/// Wire form for CLI input and word-ball dumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusBundleElementWire {
    pub p: [i64; 2],
    pub n: i64,
}

impl From<&TorusBundleElementWire> for TorusBundleElement {
    fn from(w: &TorusBundleElementWire) -> Self {
        TorusBundleElement::new(w.p[0], w.p[1], w.n)
    }
}

impl TorusBundleElement {
    pub fn to_wire(&self) -> Option<TorusBundleElementWire> {
        Some(TorusBundleElementWire {
            p: [self.p.0.to_i64()?, self.p.1.to_i64()?],
            n: self.n,
        })
    }
}

/// `φⁿ` as an arbitrary-precision matrix (n may be negative; det φ = 1).
fn phi_power(phi: &IntMatrix2, n: i64) -> [BigInt; 4] {
    let base = if n >= 0 {
        *phi
    } else {
        phi.inverse_unimodular()
    };
    let mut acc = [
        BigInt::from(1),
        BigInt::from(0),
        BigInt::from(0),
        BigInt::from(1),
    ];
    let b = [
        BigInt::from(base.a),
        BigInt::from(base.b),
        BigInt::from(base.c),
        BigInt::from(base.d),
    ];
    for _ in 0..n.unsigned_abs() {
        acc = [
            &acc[0] * &b[0] + &acc[1] * &b[2],
            &acc[0] * &b[1] + &acc[1] * &b[3],
            &acc[2] * &b[0] + &acc[3] * &b[2],
            &acc[2] * &b[1] + &acc[3] * &b[3],
        ];
    }
    acc
}

fn mat_apply(m: &[BigInt; 4], v: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (&m[0] * &v.0 + &m[1] * &v.1, &m[2] * &v.0 + &m[3] * &v.1)
}

/// Applies `φⁿ` to a lattice vector.
pub fn phi_apply(data: &AnosovData, n: i64, p: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    mat_apply(&phi_power(&data.phi, n), p)
}

pub fn tb_multiply(
    data: &AnosovData,
    x: &TorusBundleElement,
    y: &TorusBundleElement,
) -> TorusBundleElement {
    let shifted = phi_apply(data, x.n, &y.p);
    TorusBundleElement {
        p: (&x.p.0 + shifted.0, &x.p.1 + shifted.1),
        n: x.n + y.n,
    }
}

pub fn tb_inverse(data: &AnosovData, x: &TorusBundleElement) -> TorusBundleElement {
    // (p, n)^{-1} = (-φ^{-n} p, -n)
    let q = phi_apply(data, -x.n, &x.p);
    TorusBundleElement {
        p: (-q.0, -q.1),
        n: -x.n,
    }
}

pub fn tb_conjugate(
    data: &AnosovData,
    h: &TorusBundleElement,
    g: &TorusBundleElement,
) -> TorusBundleElement {
    tb_multiply(data, &tb_multiply(data, h, g), &tb_inverse(data, h))
}

/// Eigen-coordinates of a lattice vector: `p = rho·v⁺ + pi·v⁻`.
///
/// `pi(φ p) = λ⁻¹ pi(p)` and `rho(φ p) = λ rho(p)`.
pub fn eigen_coords(p: &(BigInt, BigInt), data: &AnosovData) -> (f64, f64) {
    let x = big_to_f64(&p.0);
    let y = big_to_f64(&p.1);
    // Solve [v+ v-] (rho, pi)^T = p by Cramer's rule.
    let det = data.v_plus[0] * data.v_minus[1] - data.v_plus[1] * data.v_minus[0];
    let rho = (x * data.v_minus[1] - y * data.v_minus[0]) / det;
    let pi = (data.v_plus[0] * y - data.v_plus[1] * x) / det;
    (rho, pi)
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Which eigenline the confining neighborhood follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QSide {
    /// `Q_ε = {p : |pi(p)| ≤ ε}` — a neighborhood of the expanding line `R v⁺`.
    Plus,
    /// `Q⁻_ε = {p : |rho(p)| ≤ ε}` — a neighborhood of the contracting line.
    Minus,
}

/// Membership in `Q_ε` (both sides use a non-strict bound).
pub fn in_q(p: &(BigInt, BigInt), eps: f64, side: QSide, data: &AnosovData) -> bool {
    let (rho, pi) = eigen_coords(p, data);
    match side {
        QSide::Plus => pi.abs() <= eps,
        QSide::Minus => rho.abs() <= eps,
    }
}

/// Per-condition outcome of the confinement check, with witnesses that
/// re-verify under direct evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct ConfinementReport {
    pub eps: f64,
    pub box_radius: i64,
    pub k_cap: u32,
    /// (a) `φ(Q_ε ∩ box) ⊆ Q_ε`.
    pub condition_a: ConditionOutcome,
    /// (b) every lattice point of the box lies in `φ^{-k}(Q_ε)` for some `k ≤ cap`.
    pub condition_b: ConditionOutcome,
    /// (c) least `k₀` with `φ^{k₀}(Q_ε·Q_ε) ⊆ Q_ε` on the box.
    pub condition_c: ConditionOutcome,
    pub k0: Option<u32>,
    /// A lattice point in `Q_ε \ Q_{ε/λ}`, witnessing strictness.
    pub strictness_witness: Option<[i64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionOutcome {
    pub pass: bool,
    pub detail: String,
    /// A failing lattice point, when one exists.
    pub counterexample: Option<[i64; 2]>,
}

impl ConditionOutcome {
    fn pass(detail: impl Into<String>) -> Self {
        ConditionOutcome {
            pass: true,
            detail: detail.into(),
            counterexample: None,
        }
    }

    fn fail(detail: impl Into<String>, witness: Option<[i64; 2]>) -> Self {
        ConditionOutcome {
            pass: false,
            detail: detail.into(),
            counterexample: witness,
        }
    }
}

impl ConfinementReport {
    pub fn all_pass(&self) -> bool {
        self.condition_a.pass && self.condition_b.pass && self.condition_c.pass
    }
}

/// Verifies the confinement conditions for `Q_ε` on a truncated box
/// `[-R, R]²`. Reports are statements about the region, never about all of
/// `Z²`. An infinite `eps` encodes `Q = Z²` (confining but not strictly).
pub fn verify_confining(
    eps: f64,
    data: &AnosovData,
    box_radius: i64,
    k_cap: u32,
) -> Result<ConfinementReport, GroupError> {
    if eps <= 0.0 {
        return Err(GroupError::InvalidParameter("eps must be positive".into()));
    }
    if box_radius <= 0 || k_cap == 0 {
        return Err(GroupError::InvalidParameter("caps must be positive".into()));
    }
    let lambda = data.lambda.abs();
    let members: Vec<(i64, i64)> = box_points(box_radius)
        .filter(|&(x, y)| in_q(&(x.into(), y.into()), eps, QSide::Plus, data))
        .collect();

    // (a) φ(Q ∩ box) ⊆ Q.
    let mut condition_a = ConditionOutcome::pass(format!(
        "phi(Q ∩ box) ⊆ Q on {} member points",
        members.len()
    ));
    for &(x, y) in &members {
        let image = phi_apply(data, 1, &(x.into(), y.into()));
        if !in_q(&image, eps, QSide::Plus, data) {
            condition_a = ConditionOutcome::fail("phi image escapes Q", Some([x, y]));
            break;
        }
    }

    // (b) every box point enters Q under some φ^k, k ≤ cap.
    let mut condition_b = ConditionOutcome::pass(format!(
        "all {} box points absorbed within k ≤ {}",
        (2 * box_radius + 1) * (2 * box_radius + 1),
        k_cap
    ));
    'outer: for (x, y) in box_points(box_radius) {
        let mut v: (BigInt, BigInt) = (x.into(), y.into());
        let mut absorbed = in_q(&v, eps, QSide::Plus, data);
        let mut k = 0;
        while !absorbed && k < k_cap {
            v = phi_apply(data, 1, &v);
            k += 1;
            absorbed = in_q(&v, eps, QSide::Plus, data);
        }
        if !absorbed {
            condition_b = ConditionOutcome::fail(
                format!("point not absorbed within k_cap = {k_cap} (CapExceeded)"),
                Some([x, y]),
            );
            break 'outer;
        }
    }

    // (c) least k0 with φ^{k0}(Q·Q) ⊆ Q. The pi-coordinate is additive, so
    // the worst sum has |pi| = 2·max|pi| over members, and φ scales pi by
    // λ^{-1}; verified directly on the extremal pair.
    let pi_max = members
        .iter()
        .map(|&(x, y)| eigen_coords(&(x.into(), y.into()), data).1.abs())
        .fold(0.0f64, f64::max);
    let mut k0 = None;
    if eps.is_infinite() {
        k0 = Some(0);
    } else {
        for k in 0..=k_cap {
            if 2.0 * pi_max / lambda.powi(k as i32) <= eps {
                k0 = Some(k);
                break;
            }
        }
    }
    let condition_c = match k0 {
        Some(k) => ConditionOutcome::pass(format!(
            "phi^{k}(Q·Q) ⊆ Q with max |pi| = {pi_max:.6} over members"
        )),
        None => ConditionOutcome::fail(
            format!("k_cap = {k_cap} insufficient (CapExceeded)"),
            None,
        ),
    };

    // Strictness witness: a lattice point with ε/λ < |pi| ≤ ε, scanned
    // outward by rings. For Q = Z² (infinite eps) no witness exists.
    let mut strictness_witness = None;
    if eps.is_finite() {
        'scan: for r in 0..=box_radius {
            for (x, y) in ring_points(r) {
                let (_, pi) = eigen_coords(&(x.into(), y.into()), data);
                if pi.abs() <= eps && pi.abs() > eps / lambda {
                    strictness_witness = Some([x, y]);
                    break 'scan;
                }
            }
        }
    }

    Ok(ConfinementReport {
        eps,
        box_radius,
        k_cap,
        condition_a,
        condition_b,
        condition_c,
        k0,
        strictness_witness,
    })
}

fn box_points(r: i64) -> impl Iterator<Item = (i64, i64)> {
    (-r..=r).flat_map(move |x| (-r..=r).map(move |y| (x, y)))
}

fn ring_points(r: i64) -> Vec<(i64, i64)> {
    if r == 0 {
        return vec![(0, 0)];
    }
    let mut pts = Vec::new();
    for x in -r..=r {
        pts.push((x, r));
        pts.push((x, -r));
    }
    for y in (-r + 1)..r {
        pts.push((r, y));
        pts.push((-r, y));
    }
    pts
}

/// Result of a density scan over a finite point set.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub pass: bool,
    /// Largest spacing between consecutive relevant points (end gaps count
    /// doubled, as distance to the interval boundary).
    pub largest_gap: f64,
    /// Largest distance from a point of the interval to the set.
    pub max_distance: f64,
}

/// Checks that every point of `[x0, x1]` is within `delta` of the finite set.
pub fn density_scan(
    points: &[f64],
    interval: (f64, f64),
    delta: f64,
) -> Result<DensityReport, GroupError> {
    if points.is_empty() {
        return Err(GroupError::EmptySet);
    }
    let (x0, x1) = interval;
    if x0 >= x1 {
        return Err(GroupError::InvalidParameter("empty interval".into()));
    }
    let mut sorted: Vec<f64> = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Points relevant to the interval: those inside, plus nearest outside ones.
    let mut relevant: Vec<f64> = Vec::new();
    if let Some(&below) = sorted.iter().rev().find(|&&s| s <= x0) {
        relevant.push(below);
    }
    relevant.extend(sorted.iter().copied().filter(|&s| s > x0 && s < x1));
    if let Some(&above) = sorted.iter().find(|&&s| s >= x1) {
        relevant.push(above);
    }
    if relevant.is_empty() {
        let nearest = sorted
            .iter()
            .map(|s| (s - x0).abs().min((s - x1).abs()))
            .fold(f64::INFINITY, f64::min);
        return Ok(DensityReport {
            pass: false,
            largest_gap: x1 - x0,
            max_distance: nearest,
        });
    }
    let mut largest_gap: f64 = 0.0;
    let mut max_distance: f64 = 0.0;
    // Distance from interval ends to the set.
    let first = relevant[0];
    let last = *relevant.last().unwrap();
    if first > x0 {
        largest_gap = largest_gap.max(first - x0);
        max_distance = max_distance.max(first - x0);
    }
    if last < x1 {
        largest_gap = largest_gap.max(x1 - last);
        max_distance = max_distance.max(x1 - last);
    }
    for w in relevant.windows(2) {
        let gap = w[1] - w[0];
        let lo = w[0].max(x0);
        let hi = w[1].min(x1);
        if hi > lo {
            // Farthest point of the clipped segment from {w0, w1}: the
            // midpoint when it lies inside, otherwise a segment endpoint.
            let dist_to_set = |x: f64| (x - w[0]).min(w[1] - x);
            let mid = 0.5 * (w[0] + w[1]);
            let mut far = dist_to_set(lo).max(dist_to_set(hi));
            if mid >= lo && mid <= hi {
                far = far.max(0.5 * gap);
            }
            max_distance = max_distance.max(far);
            largest_gap = largest_gap.max(gap);
        }
    }
    Ok(DensityReport {
        pass: max_distance <= delta,
        largest_gap,
        max_distance,
    })
}

/// Builds the set `P` of the density claim: `P₀ = {±u, 0}`,
/// `P_{i+1} = P_i ∪ φⁿ(P_i + P_i)`, truncated to `|rho| ≤ rho_bound` and
/// iterated to a fixed point.
pub fn build_claim_set(
    data: &AnosovData,
    u: (i64, i64),
    n: i64,
    rho_bound: f64,
) -> Vec<(BigInt, BigInt)> {
    use std::collections::HashSet;
    let mut set: HashSet<(BigInt, BigInt)> = HashSet::new();
    set.insert((BigInt::from(0), BigInt::from(0)));
    set.insert((u.0.into(), u.1.into()));
    set.insert(((-u.0).into(), (-u.1).into()));
    loop {
        let snapshot: Vec<_> = set.iter().cloned().collect();
        let mut added = false;
        for x in &snapshot {
            for y in &snapshot {
                let s = (&x.0 + &y.0, &x.1 + &y.1);
                let img = phi_apply(data, n, &s);
                let (rho, _) = eigen_coords(&img, data);
                if rho.abs() <= rho_bound && set.insert(img.clone()) {
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    set.into_iter().collect()
}

/// Words of length at most `r` in `P` (sums of at most `r` elements).
pub fn words_of_length(points: &[(BigInt, BigInt)], r: u32) -> Vec<(BigInt, BigInt)> {
    use std::collections::HashSet;
    let mut acc: HashSet<(BigInt, BigInt)> = HashSet::new();
    acc.insert((BigInt::zero(), BigInt::zero()));
    for _ in 0..r {
        let snapshot: Vec<_> = acc.iter().cloned().collect();
        for base in &snapshot {
            for p in points {
                acc.insert((&base.0 + &p.0, &base.1 + &p.1));
            }
        }
    }
    acc.into_iter().collect()
}

/// Searches the box for a nonzero lattice point minimizing `|pi|`.
pub fn minimal_pi_element(data: &AnosovData, box_radius: i64) -> (i64, i64) {
    let mut best = ((1i64, 0i64), f64::INFINITY);
    for (x, y) in box_points(box_radius) {
        if x == 0 && y == 0 {
            continue;
        }
        let (_, pi) = eigen_coords(&(x.into(), y.into()), data);
        if pi.abs() < best.1 {
            best = ((x, y), pi.abs());
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::matrices::eigen;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn standard() -> AnosovData {
        eigen(IntMatrix2::new(2, 1, 1, 1)).unwrap()
    }

    #[test]
    fn tb_conjugation_by_t_is_phi() {
        let data = standard();
        for p in [(1, 0), (0, 1), (3, -2)] {
            let x = TorusBundleElement::translation(p.0, p.1);
            let conj = tb_conjugate(&data, &TorusBundleElement::t_power(1), &x);
            let expected = phi_apply(&data, 1, &(p.0.into(), p.1.into()));
            assert_eq!(conj, TorusBundleElement { p: expected, n: 0 });
        }
    }

    #[test]
    fn tb_inverse_law_on_random_elements() {
        let data = standard();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let x = TorusBundleElement::new(
                rng.gen_range(-9i64..=9),
                rng.gen_range(-9i64..=9),
                rng.gen_range(-4i64..=4),
            );
            let prod = tb_multiply(&data, &x, &tb_inverse(&data, &x));
            assert!(prod.is_identity());
        }
    }

    #[test]
    fn tb_direct_convention_example() {
        // ((1,0),1)·((0,1),−1) = ((1,0) + φ·(0,1), 0); direct computation of
        // φ·(0,1) for φ = [[2,1],[1,1]] gives (1,1), so the product is ((2,1),0).
        let data = standard();
        let x = TorusBundleElement::new(1, 0, 1);
        let y = TorusBundleElement::new(0, 1, -1);
        let prod = tb_multiply(&data, &x, &y);
        assert_eq!(prod, TorusBundleElement::new(2, 1, 0));
    }

    #[test]
    fn tb_associativity_random_triples() {
        let data = standard();
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..1000 {
            let e = |rng: &mut StdRng| {
                TorusBundleElement::new(
                    rng.gen_range(-5i64..=5),
                    rng.gen_range(-5i64..=5),
                    rng.gen_range(-3i64..=3),
                )
            };
            let (x, y, z) = (e(&mut rng), e(&mut rng), e(&mut rng));
            let left = tb_multiply(&data, &tb_multiply(&data, &x, &y), &z);
            let right = tb_multiply(&data, &x, &tb_multiply(&data, &y, &z));
            assert_eq!(left, right);
        }
    }

    #[test]
    fn eigen_coords_zero_and_scaling() {
        let data = standard();
        assert_eq!(eigen_coords(&(0.into(), 0.into()), &data), (0.0, 0.0));
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..100 {
            let p: (BigInt, BigInt) = (
                rng.gen_range(-50i64..=50).into(),
                rng.gen_range(-50i64..=50).into(),
            );
            let (rho, pi) = eigen_coords(&p, &data);
            // Reconstruction p = rho v+ + pi v-.
            let x = rho * data.v_plus[0] + pi * data.v_minus[0];
            let y = rho * data.v_plus[1] + pi * data.v_minus[1];
            assert!((x - big_to_f64(&p.0)).abs() < 1e-10);
            assert!((y - big_to_f64(&p.1)).abs() < 1e-10);
            // pi(φ p) = λ^{-1} pi(p), rho(φ p) = λ rho(p).
            let img = phi_apply(&data, 1, &p);
            let (rho2, pi2) = eigen_coords(&img, &data);
            assert!((pi2 - pi / data.lambda).abs() < 1e-9);
            assert!((rho2 - rho * data.lambda).abs() < 1e-9);
        }
    }

    #[test]
    fn eigen_coords_cramer_matches_solve_example() {
        // Independent 2x2 linear solve for p = (1, 0).
        let data = standard();
        let (rho, pi) = eigen_coords(&(1.into(), 0.into()), &data);
        // Solve [[v+0, v-0],[v+1, v-1]] (rho, pi)^T = (1, 0)^T by elimination.
        let (a, b, c, d) = (
            data.v_plus[0],
            data.v_minus[0],
            data.v_plus[1],
            data.v_minus[1],
        );
        let det = a * d - b * c;
        let rho_o = d / det;
        let pi_o = -c / det;
        assert!((rho - rho_o).abs() < 1e-12);
        assert!((pi - pi_o).abs() < 1e-12);
    }

    #[test]
    fn in_q_membership_matches_direct_pi_evaluation() {
        let data = standard();
        for x in -20..=20i64 {
            for y in -20..=20i64 {
                let p: (BigInt, BigInt) = (x.into(), y.into());
                let (rho, pi) = eigen_coords(&p, &data);
                assert_eq!(in_q(&p, 1.0, QSide::Plus, &data), pi.abs() <= 1.0);
                assert_eq!(in_q(&p, 1.0, QSide::Minus, &data), rho.abs() <= 1.0);
                // φ(Q_ε) ⊆ Q_ε.
                if in_q(&p, 1.0, QSide::Plus, &data) {
                    assert!(in_q(&phi_apply(&data, 1, &p), 1.0, QSide::Plus, &data));
                }
            }
        }
        // Zero vector is in every Q_ε.
        assert!(in_q(&(0.into(), 0.into()), 1e-12, QSide::Plus, &data));
    }

    #[test]
    fn confining_standard_instance() {
        let data = standard();
        let report = verify_confining(1.0, &data, 50, 20).unwrap();
        assert!(report.all_pass(), "{report:?}");
        // k0 is the least k with λ^k > 2; λ ≈ 2.618 so k0 = 1.
        assert_eq!(report.k0, Some(1));
        let w = report.strictness_witness.expect("witness exists");
        // Re-verify the witness.
        let (_, pi) = eigen_coords(&(w[0].into(), w[1].into()), &data);
        assert!(pi.abs() <= 1.0 && pi.abs() > 1.0 / data.lambda);
    }

    #[test]
    fn confining_all_eps_sweep() {
        let data = standard();
        for eps in [0.5, 1.0, 2.0, 5.0] {
            let report = verify_confining(eps, &data, 50, 20).unwrap();
            assert!(report.all_pass(), "eps = {eps}: {report:?}");
        }
    }

    #[test]
    fn confining_full_lattice_not_strict() {
        let data = standard();
        let report = verify_confining(f64::INFINITY, &data, 20, 5).unwrap();
        assert!(report.all_pass());
        assert!(report.strictness_witness.is_none());
        assert_eq!(report.k0, Some(0));
    }

    #[test]
    fn density_scan_arithmetic_progression() {
        let delta = 0.25;
        let points: Vec<f64> = (0..=40).map(|k| k as f64 * delta).collect();
        let report = density_scan(&points, (0.0, 10.0), delta).unwrap();
        assert!(report.pass);
        assert!((report.largest_gap - delta).abs() < 1e-12);
    }

    #[test]
    fn density_scan_failure_case() {
        let report = density_scan(&[0.0, 3.0], (0.0, 3.0), 1.0).unwrap();
        assert!(!report.pass);
        assert!((report.largest_gap - 3.0).abs() < 1e-12);
    }

    #[test]
    fn density_scan_empty_set_errors() {
        assert!(matches!(
            density_scan(&[], (0.0, 1.0), 0.5),
            Err(GroupError::EmptySet)
        ));
    }

    #[test]
    fn claim_set_is_lambda_a_dense() {
        // The §-claim instance: n = 1, r = ⌊λ⌋ = 2, u of minimal |pi| in the
        // box; rho(rP) must be (λa)-dense in [0, λ²a].
        let data = standard();
        let u = minimal_pi_element(&data, 3);
        let (a, _) = eigen_coords(&(u.0.into(), u.1.into()), &data);
        let a = a.abs();
        let lambda = data.lambda;
        let bound = lambda * lambda * a * 1.5;
        let p = build_claim_set(&data, u, 1, bound);
        let rp = words_of_length(&p, 2);
        let rhos: Vec<f64> = rp
            .iter()
            .map(|q| eigen_coords(q, &data).0)
            .collect();
        let report = density_scan(&rhos, (0.0, lambda * lambda * a), lambda * a).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.largest_gap <= lambda * a + 1e-9);
    }
}
