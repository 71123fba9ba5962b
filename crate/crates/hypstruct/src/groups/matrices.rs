//! Integer 2x2 matrices: Anosov eigendata, abelianization invariants, and the
//! braid-group image in SL(2,Z) with a bounded chirality search.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::GroupError;

/// A 2x2 integer matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMatrix2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMatrix2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        IntMatrix2::new(1, 0, 0, 1)
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn mul(&self, o: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Inverse, valid for determinant ±1.
    pub fn inverse_unimodular(&self) -> IntMatrix2 {
        let det = self.det();
        debug_assert!(det == 1 || det == -1);
        IntMatrix2::new(det * self.d, -det * self.b, -det * self.c, det * self.a)
    }

    pub fn pow(&self, n: u32) -> IntMatrix2 {
        let mut acc = IntMatrix2::identity();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn neg(&self) -> IntMatrix2 {
        IntMatrix2::new(-self.a, -self.b, -self.c, -self.d)
    }

    /// Equality up to sign (matrices act projectively on the half-plane).
    pub fn projectively_equal(&self, o: &IntMatrix2) -> bool {
        *self == *o || *self == o.neg()
    }

    /// Matrix-vector product over arbitrary-precision integers.
    pub fn apply_big(&self, v: &(BigInt, BigInt)) -> (BigInt, BigInt) {
        (
            BigInt::from(self.a) * &v.0 + BigInt::from(self.b) * &v.1,
            BigInt::from(self.c) * &v.0 + BigInt::from(self.d) * &v.1,
        )
    }
}

/// Eigendata of an Anosov matrix: eigenvalue `lambda > 1` with unit
/// eigenvectors `v_plus` (expanding) and `v_minus` (contracting).
#[derive(Debug, Clone, Copy)]
pub struct AnosovData {
    pub phi: IntMatrix2,
    pub lambda: f64,
    pub v_plus: [f64; 2],
    pub v_minus: [f64; 2],
}

/// Computes the eigendata of an Anosov matrix.
///
/// `lambda` is the larger root of `x² - tr·x + 1`.
pub fn eigen(phi: IntMatrix2) -> Result<AnosovData, GroupError> {
    if phi.det() != 1 {
        return Err(GroupError::NotAnosov(format!(
            "determinant {} is not 1",
            phi.det()
        )));
    }
    if phi.trace().abs() <= 2 {
        return Err(GroupError::NotAnosov(format!(
            "trace {} has modulus <= 2",
            phi.trace()
        )));
    }
    let tr = phi.trace() as f64;
    let disc = (tr * tr - 4.0).sqrt();
    // Larger root in modulus; for negative trace the expanding eigenvalue is
    // the root of larger absolute value.
    let r1 = (tr + disc) / 2.0;
    let r2 = (tr - disc) / 2.0;
    let lambda = if r1.abs() >= r2.abs() { r1 } else { r2 };
    let mu = if r1.abs() >= r2.abs() { r2 } else { r1 };
    let eigvec = |ev: f64| -> [f64; 2] {
        let (a, b, c, d) = (phi.a as f64, phi.b as f64, phi.c as f64, phi.d as f64);
        // Rows of (phi - ev I) are proportional; pick the better-conditioned one.
        let (x, y) = if b.abs() + (a - ev).abs() > c.abs() + (d - ev).abs() {
            (-b, a - ev)
        } else {
            (d - ev, -c)
        };
        let n = (x * x + y * y).sqrt();
        [x / n, y / n]
    };
    let v_plus = eigvec(lambda);
    let v_minus = eigvec(mu);
    let data = AnosovData {
        phi,
        lambda,
        v_plus,
        v_minus,
    };
    debug_assert!(data.check(1e-10));
    Ok(data)
}

impl AnosovData {
    /// Verifies `phi v+ = lambda v+` and `phi v- = lambda^{-1} v-`.
    pub fn check(&self, tol: f64) -> bool {
        let apply = |v: &[f64; 2]| {
            [
                self.phi.a as f64 * v[0] + self.phi.b as f64 * v[1],
                self.phi.c as f64 * v[0] + self.phi.d as f64 * v[1],
            ]
        };
        let p = apply(&self.v_plus);
        let m = apply(&self.v_minus);
        (p[0] - self.lambda * self.v_plus[0]).abs() <= tol
            && (p[1] - self.lambda * self.v_plus[1]).abs() <= tol
            && (m[0] - self.v_minus[0] / self.lambda).abs() <= tol
            && (m[1] - self.v_minus[1] / self.lambda).abs() <= tol
    }
}

/// Invariant factors of the abelianization of `Z² ⋊_φ Z`.
///
/// Row-reduces the integer matrix `phi - I` to Smith normal form; the free
/// rank is `1` plus the number of zero invariant factors (zero for Anosov
/// `phi`), and the torsion orders are the invariant factors `> 1`.
pub fn abelianization(phi: IntMatrix2) -> (u32, Vec<u64>) {
    let m = IntMatrix2::new(phi.a - 1, phi.b, phi.c, phi.d - 1);
    let (d1, d2) = smith_normal_form_2x2(m);
    let zero_factors = [d1, d2].iter().filter(|&&x| x == 0).count() as u32;
    let torsion: Vec<u64> = [d1, d2].into_iter().filter(|&x| x > 1).collect();
    (1 + zero_factors, torsion)
}

/// Smith normal form of a 2x2 integer matrix via elementary row and column
/// operations; returns the diagonal `(d1, d2)` with `d1 | d2`, both `>= 0`.
pub fn smith_normal_form_2x2(m: IntMatrix2) -> (u64, u64) {
    let mut e = [[m.a as i128, m.b as i128], [m.c as i128, m.d as i128]];
    if e.iter().flatten().all(|&x| x == 0) {
        return (0, 0);
    }
    loop {
        // Move a nonzero entry of minimal modulus to the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in 0..2 {
            for j in 0..2 {
                if e[i][j] != 0 && best.map_or(true, |(bi, bj)| e[i][j].abs() < e[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let (bi, bj) = best.expect("nonzero matrix");
        if bi == 1 {
            e.swap(0, 1);
        }
        if bj == 1 {
            for row in e.iter_mut() {
                row.swap(0, 1);
            }
        }
        let p = e[0][0];
        if e[1][0] % p != 0 {
            let q = e[1][0] / p;
            e[1][0] -= q * p;
            e[1][1] -= q * e[0][1];
            continue;
        }
        if e[0][1] % p != 0 {
            let q = e[0][1] / p;
            e[0][1] -= q * p;
            e[1][1] -= q * e[1][0];
            continue;
        }
        // Both divisible: eliminate exactly.
        let q = e[1][0] / p;
        e[1][0] = 0;
        e[1][1] -= q * e[0][1];
        e[0][1] = 0;
        if e[1][1] % p != 0 {
            // Pull the residue back into play so the pivot divides everything.
            e[0][1] = e[1][1];
            continue;
        }
        break;
    }
    (e[0][0].unsigned_abs() as u64, e[1][1].unsigned_abs() as u64)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Generators of the braid-group image: `sigma` and `tau`.
pub fn braid_sigma() -> IntMatrix2 {
    IntMatrix2::new(1, 1, 0, 1)
}

pub fn braid_tau() -> IntMatrix2 {
    IntMatrix2::new(1, 0, -1, 1)
}

/// Letters of a braid word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BraidLetter {
    Sigma,
    SigmaInv,
    Tau,
    TauInv,
}

/// The homomorphism to SL(2,Z): `sigma ↦ [[1,1],[0,1]]`, `tau ↦ [[1,0],[-1,1]]`.
pub fn braid_to_sl2(word: &[BraidLetter]) -> IntMatrix2 {
    let mut acc = IntMatrix2::identity();
    for letter in word {
        let m = match letter {
            BraidLetter::Sigma => braid_sigma(),
            BraidLetter::SigmaInv => braid_sigma().inverse_unimodular(),
            BraidLetter::Tau => braid_tau(),
            BraidLetter::TauInv => braid_tau().inverse_unimodular(),
        };
        acc = acc.mul(&m);
    }
    acc
}

/// Outcome of the bounded chirality search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChiralityOutcome {
    /// `conjugator · A^n · conjugator⁻¹ = A^{-n}` up to sign, witnessed.
    Found {
        conjugator: Vec<BraidLetter>,
        matrix: IntMatrix2,
        power: u32,
    },
    /// No conjugator of the given word length for any tested power. This is a
    /// semi-decision, not a proof of chirality.
    NotFoundWithinBound,
}

/// Searches for a word `C` of length at most `conj_len` in the braid generator
/// matrices with `C A^n C^{-1} = A^{-n}` (projectively) for some `n <= n_max`.
pub fn chirality_search(a: &IntMatrix2, n_max: u32, conj_len: u32) -> ChiralityOutcome {
    let letters = [
        BraidLetter::Sigma,
        BraidLetter::SigmaInv,
        BraidLetter::Tau,
        BraidLetter::TauInv,
    ];
    // Enumerate words breadth-first so shorter conjugators are found first.
    let mut words: Vec<Vec<BraidLetter>> = vec![vec![]];
    let mut frontier: Vec<Vec<BraidLetter>> = vec![vec![]];
    for _ in 0..conj_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                let mut w2 = w.clone();
                w2.push(l);
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    for n in 1..=n_max {
        let an = big_pow(a, n);
        let an_inv = big_inverse(&an);
        for w in &words {
            let c = braid_big(w);
            let c_inv = big_inverse(&c);
            let lhs = big_mul(&big_mul(&c, &an), &c_inv);
            if big_proj_eq(&lhs, &an_inv) {
                return ChiralityOutcome::Found {
                    conjugator: w.clone(),
                    matrix: braid_to_sl2(w),
                    power: n,
                };
            }
        }
    }
    ChiralityOutcome::NotFoundWithinBound
}

// Arbitrary-precision 2x2 helpers: powers A^n grow like lambda^n.
type BigMat = [BigInt; 4];

fn big_from(m: &IntMatrix2) -> BigMat {
    [m.a.into(), m.b.into(), m.c.into(), m.d.into()]
}

fn big_mul(x: &BigMat, y: &BigMat) -> BigMat {
    [
        &x[0] * &y[0] + &x[1] * &y[2],
        &x[0] * &y[1] + &x[1] * &y[3],
        &x[2] * &y[0] + &x[3] * &y[2],
        &x[2] * &y[1] + &x[3] * &y[3],
    ]
}

fn big_pow(m: &IntMatrix2, n: u32) -> BigMat {
    let mut acc = [
        BigInt::one(),
        BigInt::zero(),
        BigInt::zero(),
        BigInt::one(),
    ];
    let base = big_from(m);
    for _ in 0..n {
        acc = big_mul(&acc, &base);
    }
    acc
}

fn big_inverse(m: &BigMat) -> BigMat {
    let det = &m[0] * &m[3] - &m[1] * &m[2];
    debug_assert!(det.abs().is_one());
    [&m[3] * &det, -&m[1] * &det, -&m[2] * &det, &m[0] * &det]
}

fn big_proj_eq(x: &BigMat, y: &BigMat) -> bool {
    (0..4).all(|i| x[i] == y[i]) || (0..4).all(|i| x[i] == -&y[i])
}

fn braid_big(word: &[BraidLetter]) -> BigMat {
    big_from(&braid_to_sl2(word))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eigen_of_standard_anosov() {
        // Characteristic-polynomial oracle: lambda = (tr + sqrt(tr^2-4)) / 2.
        let data = eigen(IntMatrix2::new(2, 1, 1, 1)).unwrap();
        let oracle = (3.0 + 5.0f64.sqrt()) / 2.0;
        assert!((data.lambda - oracle).abs() < 1e-12);
        assert!((data.lambda - 2.618_033_988_749_895).abs() < 1e-9);
        assert!(data.check(1e-10));

        let data = eigen(IntMatrix2::new(3, 2, 1, 1)).unwrap();
        let oracle = (4.0 + 12.0f64.sqrt()) / 2.0;
        assert!((data.lambda - oracle).abs() < 1e-12);
        assert!((data.lambda - 3.732_050_807_568_877).abs() < 1e-9);
    }

    #[test]
    fn eigen_rejects_non_anosov() {
        assert!(matches!(
            eigen(IntMatrix2::new(1, 1, 0, 1)),
            Err(GroupError::NotAnosov(_))
        ));
        assert!(matches!(
            eigen(IntMatrix2::new(2, 0, 0, 2)),
            Err(GroupError::NotAnosov(_))
        ));
    }

    /// Smith-normal-form oracle by direct row reduction over a copy.
    fn snf_oracle(m: IntMatrix2) -> (u64, u64) {
        // d1 = gcd of entries, d1*d2 = |det| (valid for 2x2 matrices).
        let g = [m.a, m.b, m.c, m.d]
            .iter()
            .fold(0u64, |acc, &x| gcd(acc, x.unsigned_abs()));
        let det = (m.det() as i128).unsigned_abs() as u64;
        if g == 0 {
            return (0, 0);
        }
        (g, det / g)
    }

    #[test]
    fn abelianization_examples() {
        let (rank, torsion) = abelianization(IntMatrix2::new(2, 1, 1, 1));
        assert_eq!(rank, 1);
        assert!(torsion.is_empty());

        let (rank, torsion) = abelianization(IntMatrix2::new(3, 4, 2, 3));
        assert_eq!(rank, 1);
        assert_eq!(torsion, vec![2, 2]);
    }

    #[test]
    fn abelianization_random_anosov_matches_oracle() {
        let mut rng = StdRng::seed_from_u64(3);
        let mut found = 0;
        while found < 50 {
            let m = IntMatrix2::new(
                rng.gen_range(-20..=20),
                rng.gen_range(-20..=20),
                rng.gen_range(-20..=20),
                rng.gen_range(-20..=20),
            );
            if m.det() != 1 || m.trace().abs() <= 2 {
                continue;
            }
            found += 1;
            let shifted = IntMatrix2::new(m.a - 1, m.b, m.c, m.d - 1);
            let (d1, d2) = smith_normal_form_2x2(shifted);
            assert_eq!((d1, d2), snf_oracle(shifted));
            assert!(d2 % d1.max(1) == 0, "invariant factors must divide");
            let (rank, torsion) = abelianization(m);
            assert_eq!(rank, 1, "abelianization is virtually cyclic");
            // Torsion product equals |det(phi - I)|.
            let product: u64 = torsion.iter().product();
            assert_eq!(product, shifted.det().unsigned_abs());
            assert_eq!(d1 * d2, shifted.det().unsigned_abs());
        }
    }

    #[test]
    fn braid_relation_holds() {
        use BraidLetter::*;
        let lhs = braid_to_sl2(&[Sigma, Tau, Sigma]);
        let rhs = braid_to_sl2(&[Tau, Sigma, Tau]);
        assert_eq!(lhs, rhs);
        assert_eq!(braid_to_sl2(&[Sigma]), IntMatrix2::new(1, 1, 0, 1));
        assert_eq!(braid_to_sl2(&[Tau]), IntMatrix2::new(1, 0, -1, 1));
    }

    #[test]
    fn chirality_search_elliptic_example() {
        // A = [[0,-1],[1,0]] satisfies A^{-1} = -A, so projectively the empty
        // conjugator already works at n = 1. Exhaustive search at conj_len 4.
        let a = IntMatrix2::new(0, -1, 1, 0);
        match chirality_search(&a, 4, 4) {
            ChiralityOutcome::Found { power, .. } => assert_eq!(power, 1),
            other => panic!("expected Found, got {other:?}"),
        }
    }

    #[test]
    fn chirality_search_anosov_unresolved() {
        // For an Anosov matrix, tr(C A^n C^{-1}) = tr(A^n) = tr(A^{-n}) but no
        // short conjugator exists; the bounded search reports NotFound.
        let a = IntMatrix2::new(2, 1, 1, 1);
        assert_eq!(
            chirality_search(&a, 3, 3),
            ChiralityOutcome::NotFoundWithinBound
        );
    }
}
