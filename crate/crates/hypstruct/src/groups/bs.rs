//! Baumslag–Solitar groups `BS(m,n) = ⟨a, b | b aᵐ b⁻¹ = aⁿ⟩`: Britton
//! normal forms with arbitrary-precision `a`-exponents, and truncated
//! Bass–Serre trees of `⟨a⟩`-cosets.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::GroupError;

/// A letter of a word over `{a^{±1}, b^{±1}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsLetter {
    A,
    AInv,
    B,
    BInv,
}

/// One stable-letter syllable `b^{sign} a^{rep}` of a normal form. The
/// representative exponent is reduced modulo `m` after `b` and modulo `|n|`
/// after `b⁻¹`, which makes pinches detectable as `rep == 0` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Syllable {
    /// `+1` for `b`, `-1` for `b⁻¹`.
    pub sign: i8,
    pub rep: i64,
}

/// An element of `BS(m,n)` in Britton normal form
/// `a^{head} b^{e₁} a^{r₁} ⋯ b^{e_k} a^{r_k}`, pinch-free and with interior
/// exponents reduced to coset representatives; the form is unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BSElement {
    pub m: i64,
    pub n: i64,
    pub head: BigInt,
    pub syllables: Vec<Syllable>,
}

impl BSElement {
    pub fn identity(m: i64, n: i64) -> Result<Self, GroupError> {
        if m == 0 || n == 0 {
            return Err(GroupError::InvalidParameter(
                "BS(m,n) requires nonzero m, n".into(),
            ));
        }
        Ok(BSElement {
            m,
            n,
            head: BigInt::zero(),
            syllables: Vec::new(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.head.is_zero() && self.syllables.is_empty()
    }

    fn modulus(&self, sign: i8) -> i64 {
        if sign > 0 {
            self.m.abs()
        } else {
            self.n.abs()
        }
    }

    /// Carry multiplier when pushing `a`-powers left through `b^{sign}`:
    /// `b a^{qm} = a^{qn} b` and `b⁻¹ a^{qn} = a^{qm} b⁻¹`.
    fn carry_factor(&self, sign: i8) -> i64 {
        if sign > 0 {
            self.n
        } else {
            self.m
        }
    }

    /// Exact divisor used when extracting the carry: `m` after `b`, `n`
    /// after `b⁻¹` (signed, so the identity holds literally).
    fn divisor(&self, sign: i8) -> i64 {
        if sign > 0 {
            self.m
        } else {
            self.n
        }
    }

    /// Right-multiplies by `a^s`, restoring the normal form.
    pub fn mul_a(&mut self, s: impl Into<BigInt>) {
        let mut carry: BigInt = s.into();
        for i in (0..self.syllables.len()).rev() {
            if carry.is_zero() {
                return;
            }
            let syl = self.syllables[i];
            let x: BigInt = BigInt::from(syl.rep) + &carry;
            let modulus = self.modulus(syl.sign);
            let rep = x.mod_floor_i64(modulus);
            // x = q·divisor + rep exactly (divisor = ±modulus).
            let q = (&x - rep) / BigInt::from(self.divisor(syl.sign));
            self.syllables[i].rep = rep;
            carry = q * BigInt::from(self.carry_factor(syl.sign));
        }
        self.head += carry;
    }

    /// Right-multiplies by `b^{±1}`, cancelling a pinch when one forms.
    pub fn mul_b(&mut self, sign: i8) {
        debug_assert!(sign == 1 || sign == -1);
        if let Some(last) = self.syllables.last() {
            if last.sign == -sign && last.rep == 0 {
                self.syllables.pop();
                return;
            }
        }
        self.syllables.push(Syllable { sign, rep: 0 });
    }

    pub fn mul_letter(&mut self, letter: BsLetter) {
        match letter {
            BsLetter::A => self.mul_a(1),
            BsLetter::AInv => self.mul_a(-1),
            BsLetter::B => self.mul_b(1),
            BsLetter::BInv => self.mul_b(-1),
        }
    }

    /// Product of normal forms (right-multiplication of `other` into `self`).
    pub fn mul(&self, other: &BSElement) -> BSElement {
        debug_assert!(self.m == other.m && self.n == other.n);
        let mut out = self.clone();
        out.mul_a(other.head.clone());
        for syl in &other.syllables {
            out.mul_b(syl.sign);
            out.mul_a(syl.rep);
        }
        out
    }

    pub fn inverse(&self) -> BSElement {
        let mut out = BSElement::identity(self.m, self.n).expect("valid m, n");
        for syl in self.syllables.iter().rev() {
            out.mul_a(-syl.rep);
            out.mul_b(-syl.sign);
        }
        out.mul_a(-self.head.clone());
        out
    }

    /// Sum of all `a`-exponents; a homomorphism to `Z` exactly when `m = n`.
    pub fn a_exponent_sum(&self) -> BigInt {
        let mut acc = self.head.clone();
        for syl in &self.syllables {
            acc += syl.rep;
        }
        acc
    }

    /// Sum of all `b`-exponents; always a homomorphism to `Z`.
    pub fn b_exponent_sum(&self) -> i64 {
        self.syllables.iter().map(|s| s.sign as i64).sum()
    }
}

trait ModFloor {
    fn mod_floor_i64(&self, modulus: i64) -> i64;
}

impl ModFloor for BigInt {
    fn mod_floor_i64(&self, modulus: i64) -> i64 {
        debug_assert!(modulus > 0);
        let m = BigInt::from(modulus);
        let r = ((self % &m) + &m) % &m;
        r.to_i64().expect("reduced representative fits i64")
    }
}

/// Britton normal form of a word over `{a^{±1}, b^{±1}}` in `BS(m,n)`.
pub fn bs_normal_form(word: &[BsLetter], m: i64, n: i64) -> Result<BSElement, GroupError> {
    let mut element = BSElement::identity(m, n)?;
    for &letter in word {
        element.mul_letter(letter);
    }
    Ok(element)
}

/// The `a^s` element.
pub fn bs_a_power(s: impl Into<BigInt>, m: i64, n: i64) -> Result<BSElement, GroupError> {
    let mut e = BSElement::identity(m, n)?;
    e.mul_a(s);
    Ok(e)
}

/// A coset `g⟨a⟩`, written as the no-backtrack edge path from the root: each
/// step is `a^j b^{δ}` with `j` reduced modulo `|n|` (for `δ = +1`) or `m`
/// (for `δ = -1`).
pub type CosetWord = Vec<(i64, i8)>;

/// A truncated Bass–Serre tree for `BS(m,n)`: cosets `g⟨a⟩` within a BFS
/// radius of the root. Every interior vertex has `|n|` outgoing and `|m|`
/// incoming edges (degree `|m| + |n|`).
#[derive(Debug, Clone)]
pub struct BassSerreBall {
    pub m: i64,
    pub n: i64,
    pub radius: u32,
    pub vertices: Vec<CosetWord>,
    index: HashMap<CosetWord, usize>,
    /// Parent vertex and edge label, for each non-root vertex.
    pub parent: Vec<Option<(usize, (i64, i8))>>,
    pub depth: Vec<u32>,
}

/// Builds the coset tree out to `radius`; errors with `BallOverflow` when the
/// vertex count would exceed `max_vertices`.
pub fn bass_serre_ball(
    m: i64,
    n: i64,
    radius: u32,
    max_vertices: usize,
) -> Result<BassSerreBall, GroupError> {
    if m == 0 || n == 0 {
        return Err(GroupError::InvalidParameter(
            "BS(m,n) requires nonzero m, n".into(),
        ));
    }
    if radius == 0 {
        return Err(GroupError::InvalidParameter("radius must be >= 1".into()));
    }
    let mut ball = BassSerreBall {
        m,
        n,
        radius,
        vertices: vec![Vec::new()],
        index: HashMap::from([(Vec::new(), 0usize)]),
        parent: vec![None],
        depth: vec![0],
    };
    let mut frontier = vec![0usize];
    for d in 1..=radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let word = ball.vertices[v].clone();
            let last = word.last().copied();
            for delta in [1i8, -1i8] {
                let modulus = if delta > 0 { n.abs() } else { m.abs() };
                for j in 0..modulus {
                    // Stepping back along the incoming edge is the parent.
                    if let Some((_, last_delta)) = last {
                        if delta == -last_delta && j == 0 {
                            continue;
                        }
                    }
                    let mut child = word.clone();
                    child.push((j, delta));
                    if ball.vertices.len() >= max_vertices {
                        return Err(GroupError::BallOverflow(max_vertices));
                    }
                    let id = ball.vertices.len();
                    ball.index.insert(child.clone(), id);
                    ball.vertices.push(child);
                    ball.parent.push(Some((v, (j, delta))));
                    ball.depth.push(d);
                    next.push(id);
                }
            }
        }
        frontier = next;
    }
    Ok(ball)
}

impl BassSerreBall {
    pub fn root(&self) -> usize {
        0
    }

    pub fn vertex_id(&self, word: &CosetWord) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Degree of a vertex inside the ball (children plus parent).
    pub fn degree(&self, v: usize) -> usize {
        let children = self
            .parent
            .iter()
            .filter(|p| p.map(|(u, _)| u) == Some(v))
            .count();
        children + usize::from(self.parent[v].is_some())
    }

    /// The coset of a group element, as a canonical coset word. Exponents are
    /// pushed right (reducing each to its coset representative) and the tail
    /// `a`-power is discarded.
    pub fn coset_of(&self, g: &BSElement) -> CosetWord {
        let mut out: CosetWord = Vec::new();
        let mut carry = g.head.clone();
        for (i, syl) in g.syllables.iter().enumerate() {
            let x = carry;
            let (modulus, divisor, carry_factor) = if syl.sign > 0 {
                (self.n.abs(), self.n, self.m)
            } else {
                (self.m.abs(), self.m, self.n)
            };
            let j = x.mod_floor_i64(modulus);
            let q = (&x - j) / BigInt::from(divisor);
            out.push((j, syl.sign));
            carry = q * BigInt::from(carry_factor) + syl.rep;
            let _ = i;
        }
        out
    }

    /// The action of `g` on a vertex: `g · (w⟨a⟩) = (g w)⟨a⟩`. Returns `None`
    /// when the image lies outside the truncated ball.
    pub fn act(&self, g: &BSElement, v: usize) -> Option<usize> {
        let w = self.element_of(v);
        let moved = g.mul(&w);
        self.vertex_id(&self.coset_of(&moved))
    }

    /// A representative element of the coset at a vertex.
    pub fn element_of(&self, v: usize) -> BSElement {
        let mut e = BSElement::identity(self.m, self.n).expect("valid m, n");
        for &(j, delta) in &self.vertices[v] {
            e.mul_a(j);
            e.mul_b(delta);
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn word_of(s: &str) -> Vec<BsLetter> {
        s.chars()
            .map(|c| match c {
                'a' => BsLetter::A,
                'A' => BsLetter::AInv,
                'b' => BsLetter::B,
                'B' => BsLetter::BInv,
                _ => panic!("bad letter"),
            })
            .collect()
    }

    #[test]
    fn empty_word_is_identity() {
        let e = bs_normal_form(&[], 1, 2).unwrap();
        assert!(e.is_identity());
    }

    #[test]
    fn relation_bab_inverse_in_bs12() {
        // BS(1,2): b a b⁻¹ = a².
        let lhs = bs_normal_form(&word_of("baB"), 1, 2).unwrap();
        let rhs = bs_a_power(2, 1, 2).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn distortion_iterated_relation() {
        // BS(1,2): bᵏ a b⁻ᵏ = a^{2^k} for k ≤ 20 (exponent 2^20 exact).
        for k in 0..=20u32 {
            let mut word = vec![BsLetter::B; k as usize];
            word.push(BsLetter::A);
            word.extend(vec![BsLetter::BInv; k as usize]);
            let nf = bs_normal_form(&word, 1, 2).unwrap();
            let expected = bs_a_power(BigInt::from(2).pow(k), 1, 2).unwrap();
            assert_eq!(nf, expected, "k = {k}");
        }
    }

    #[test]
    fn pinch_free_invariant() {
        let mut rng = StdRng::seed_from_u64(13);
        let letters = [BsLetter::A, BsLetter::AInv, BsLetter::B, BsLetter::BInv];
        for _ in 0..300 {
            let len = rng.gen_range(0..25);
            let word: Vec<BsLetter> =
                (0..len).map(|_| letters[rng.gen_range(0..4)]).collect();
            let nf = bs_normal_form(&word, 2, 3).unwrap();
            // No pinch: a zero representative never sits between opposite signs.
            for w in nf.syllables.windows(2) {
                assert!(
                    !(w[0].rep == 0 && w[1].sign == -w[0].sign),
                    "pinch left in {nf:?}"
                );
            }
            // Representative ranges.
            for syl in &nf.syllables {
                let modulus = if syl.sign > 0 { 2 } else { 3 };
                assert!((0..modulus).contains(&syl.rep));
            }
        }
    }

    #[test]
    fn normal_form_idempotent_and_multiplicative() {
        let mut rng = StdRng::seed_from_u64(41);
        let letters = [BsLetter::A, BsLetter::AInv, BsLetter::B, BsLetter::BInv];
        for (m, n) in [(1, 2), (2, 3), (2, -2), (3, -5)] {
            for _ in 0..200 {
                let mut make = |len: usize| -> Vec<BsLetter> {
                    (0..len).map(|_| letters[rng.gen_range(0..4)]).collect()
                };
                let u = make(rng.gen_range(0..15));
                let v = make(rng.gen_range(0..15));
                let nf_u = bs_normal_form(&u, m, n).unwrap();
                let nf_v = bs_normal_form(&v, m, n).unwrap();
                let uv: Vec<BsLetter> = u.iter().chain(v.iter()).copied().collect();
                let nf_uv = bs_normal_form(&uv, m, n).unwrap();
                assert_eq!(nf_uv, nf_u.mul(&nf_v), "nf(uv) = nf(nf(u)·nf(v))");
                // Inverse law.
                assert!(nf_u.mul(&nf_u.inverse()).is_identity());
            }
        }
    }

    #[test]
    fn bass_serre_root_degree_bs23() {
        let ball = bass_serre_ball(2, 3, 1, 10_000).unwrap();
        assert_eq!(ball.degree(ball.root()), 5, "3 outgoing + 2 incoming");
    }

    #[test]
    fn bass_serre_a_fixes_root_bs12() {
        let ball = bass_serre_ball(1, 2, 2, 10_000).unwrap();
        let a = bs_a_power(1, 1, 2).unwrap();
        assert_eq!(ball.act(&a, ball.root()), Some(ball.root()));
    }

    #[test]
    fn bass_serre_axes_diverge_at_root_bs23() {
        // b and a b a⁻¹ enter and leave the root through different edges.
        let ball = bass_serre_ball(2, 3, 3, 100_000).unwrap();
        let b = bs_normal_form(&word_of("b"), 2, 3).unwrap();
        let aba = bs_normal_form(&word_of("abA"), 2, 3).unwrap();
        // Outgoing edges toward b⟨a⟩ and a b⟨a⟩.
        let v_b = ball.vertex_id(&ball.coset_of(&b)).unwrap();
        let v_aba = ball.vertex_id(&ball.coset_of(&aba)).unwrap();
        assert_ne!(v_b, v_aba);
        // Incoming edges toward b⁻¹⟨a⟩ and a b⁻¹ a⁻¹⟨a⟩.
        let binv = bs_normal_form(&word_of("B"), 2, 3).unwrap();
        let abinva = bs_normal_form(&word_of("aBA"), 2, 3).unwrap();
        let v1 = ball.vertex_id(&ball.coset_of(&binv)).unwrap();
        let v2 = ball.vertex_id(&ball.coset_of(&abinva)).unwrap();
        assert_ne!(v1, v2);
        // The action is consistent: a·(b⟨a⟩) = (ab)⟨a⟩.
        let a = bs_a_power(1, 2, 3).unwrap();
        assert_eq!(ball.act(&a, v_b), Some(v_aba));
    }

    #[test]
    fn bass_serre_overflow() {
        assert!(matches!(
            bass_serre_ball(2, 3, 6, 100),
            Err(GroupError::BallOverflow(100))
        ));
    }

    #[test]
    fn coset_of_respects_tail_quotient() {
        // g and g·a^s define the same coset.
        let mut rng = StdRng::seed_from_u64(59);
        let ball = bass_serre_ball(2, 3, 3, 100_000).unwrap();
        let letters = [BsLetter::A, BsLetter::AInv, BsLetter::B, BsLetter::BInv];
        for _ in 0..200 {
            let len = rng.gen_range(0..8);
            let word: Vec<BsLetter> =
                (0..len).map(|_| letters[rng.gen_range(0..4)]).collect();
            let g = bs_normal_form(&word, 2, 3).unwrap();
            let mut shifted = g.clone();
            shifted.mul_a(rng.gen_range(-50i64..=50));
            assert_eq!(ball.coset_of(&g), ball.coset_of(&shifted));
        }
    }
}
