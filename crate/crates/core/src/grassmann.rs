//! Finite real Grassmann algebras.
//!
//! An element of Λ_N is stored as a sparse map from monomials to real
//! coefficients. A monomial ξ_{i1} ξ_{i2} ⋯ ξ_{ik} with i1 < i2 < ⋯ < ik is
//! encoded as the bitmask with bits i1..ik set, so generator indices are
//! zero-based and bounded by 63.
//!
//! Products reorder the concatenated generator list into increasing order;
//! the sign is the parity of the number of inversions, which
//! [`reorder_sign`] counts directly on the bitmasks.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_GENERATORS: usize = 63;

/// Z₂ grading of a Grassmann quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn of_mask(mask: u64) -> Parity {
        if mask.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity of a product of homogeneous factors. `Mixed` is absorbing.
    pub fn combine(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::Mixed => Parity::Mixed,
        }
    }

    pub fn as_bit(self) -> Option<u32> {
        match self {
            Parity::Even => Some(0),
            Parity::Odd => Some(1),
            Parity::Mixed => None,
        }
    }
}

/// Sign picked up when the monomial `a` is followed by the disjoint monomial
/// `b` and the product is brought into increasing generator order.
#[inline]
pub fn reorder_sign(a: u64, b: u64) -> f64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        // generators of `a` with index above j must hop over ξ_j
        inversions += (a >> j >> 1).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Product of two monomials, `None` when they share a generator.
#[inline]
pub fn monomial_product(a: u64, b: u64) -> Option<(u64, f64)> {
    if a & b != 0 {
        None
    } else {
        Some((a | b, reorder_sign(a, b)))
    }
}

/// Sorted generator indices of a mask.
pub fn mask_indices(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        out.push(rest.trailing_zeros() as usize);
        rest &= rest - 1;
    }
    out
}

/// An element of the real Grassmann algebra Λ_N.
#[derive(Clone, PartialEq)]
pub struct GrassmannNumber {
    generators: usize,
    terms: BTreeMap<u64, f64>,
}

impl GrassmannNumber {
    pub fn zero(generators: usize) -> Self {
        assert!(generators <= MAX_GENERATORS, "at most 63 generators");
        Self {
            generators,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(generators: usize, c: f64) -> Self {
        let mut out = Self::zero(generators);
        out.set(0, c);
        out
    }

    pub fn one(generators: usize) -> Self {
        Self::scalar(generators, 1.0)
    }

    /// The generator ξ_index.
    pub fn generator(generators: usize, index: usize) -> Result<Self> {
        Self::monomial(generators, &[index], 1.0)
    }

    /// `c · ξ_{i1} ξ_{i2} ⋯` for an arbitrary (not necessarily sorted) index
    /// list. Repeated indices give zero.
    pub fn monomial(generators: usize, indices: &[usize], c: f64) -> Result<Self> {
        if generators > MAX_GENERATORS {
            return Err(Error::TooManyGenerators(generators));
        }
        let mut mask = 0u64;
        let mut sign = 1.0;
        for &i in indices {
            if i >= generators {
                return Err(Error::GeneratorOutOfRange { index: i, generators });
            }
            match monomial_product(mask, 1 << i) {
                Some((m, s)) => {
                    mask = m;
                    sign *= s;
                }
                None => return Ok(Self::zero(generators)),
            }
        }
        let mut out = Self::zero(generators);
        out.set(mask, sign * c);
        Ok(out)
    }

    pub fn from_terms(generators: usize, terms: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let mut out = Self::zero(generators);
        for (m, c) in terms {
            debug_assert!(m >> generators == 0, "mask outside the algebra");
            out.add_term(m, c);
        }
        out
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn coeff(&self, mask: u64) -> f64 {
        self.terms.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn set(&mut self, mask: u64, c: f64) {
        if c == 0.0 {
            self.terms.remove(&mask);
        } else {
            self.terms.insert(mask, c);
        }
    }

    pub fn add_term(&mut self, mask: u64, c: f64) {
        let v = self.coeff(mask) + c;
        self.set(mask, v);
    }

    pub fn body(&self) -> f64 {
        self.coeff(0)
    }

    pub fn soul(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&0);
        out
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for &m in self.terms.keys() {
            if m.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// True when the element is homogeneous of parity `p`. Zero has every
    /// parity.
    pub fn has_parity(&self, p: Parity) -> bool {
        self.is_zero() || self.parity() == p
    }

    pub fn even_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 1)
    }

    pub fn filter(&self, keep: impl Fn(u64) -> bool) -> Self {
        Self {
            generators: self.generators,
            terms: self
                .terms
                .iter()
                .filter(|(&m, _)| keep(m))
                .map(|(&m, &c)| (m, c))
                .collect(),
        }
    }

    /// The parity automorphism: odd monomials change sign.
    pub fn twist(&self) -> Self {
        Self {
            generators: self.generators,
            terms: self
                .terms
                .iter()
                .map(|(&m, &c)| (m, if m.count_ones() % 2 == 0 { c } else { -c }))
                .collect(),
        }
    }

    pub fn gmul(&self, other: &Self) -> Result<Self> {
        if self.generators != other.generators {
            return Err(Error::GeneratorMismatch {
                left: self.generators,
                right: other.generators,
            });
        }
        let mut out = Self::zero(self.generators);
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &other.terms {
                if let Some((m, s)) = monomial_product(a, b) {
                    out.add_term(m, s * ca * cb);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_terms(self.generators, self.terms().map(|(m, v)| (m, v * c)))
    }

    /// Coefficient of ξ_{g1}⋯ξ_{gk} (generators taken in increasing order):
    /// the unique `c` free of those generators with
    /// `a = ξ_{g1}⋯ξ_{gk} · c + (terms missing some g_i)`.
    pub fn top_coefficient(&self, integration: &[usize]) -> Result<Self> {
        if integration.len() > self.generators {
            return Err(Error::TooManyIntegrationGenerators {
                requested: integration.len(),
                available: self.generators,
            });
        }
        let mut top = 0u64;
        for &g in integration {
            if g >= self.generators {
                return Err(Error::GeneratorOutOfRange {
                    index: g,
                    generators: self.generators,
                });
            }
            top |= 1 << g;
        }
        let mut out = Self::zero(self.generators);
        for (&m, &c) in &self.terms {
            if m & top == top {
                let rest = m & !top;
                out.add_term(rest, reorder_sign(top, rest) * c);
            }
        }
        Ok(out)
    }

    /// Left derivative ∂/∂ξ_g: ξ_g is moved to the front, then removed.
    pub fn left_derivative(&self, g: usize) -> Self {
        let bit = 1u64 << g;
        let mut out = Self::zero(self.generators);
        for (&m, &c) in &self.terms {
            if m & bit != 0 {
                let below = (m & (bit - 1)).count_ones();
                let s = if below % 2 == 0 { 1.0 } else { -1.0 };
                out.add_term(m & !bit, s * c);
            }
        }
        out
    }

    /// Part of the element made of monomials that contain ξ_g.
    pub fn containing(&self, g: usize) -> Self {
        let bit = 1u64 << g;
        self.filter(|m| m & bit != 0)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |a, &c| a.max(c.abs()))
    }

    /// `f(body + soul)` from the Taylor data `taylor[k] = f⁽ᵏ⁾(body) / k!`.
    /// The series terminates because the soul is nilpotent.
    pub fn apply_series(&self, taylor: &[f64]) -> Self {
        let soul = self.soul();
        let mut out = Self::scalar(self.generators, taylor.first().copied().unwrap_or(0.0));
        let mut power = Self::one(self.generators);
        for &t in taylor.iter().skip(1) {
            power = &power * &soul;
            if power.is_zero() {
                break;
            }
            out += &power.scale(t);
        }
        out
    }

    fn series_order(&self) -> usize {
        self.generators + 1
    }

    pub fn recip(&self) -> Result<Self> {
        let b = self.body();
        if b == 0.0 {
            return Err(Error::NotInvertible);
        }
        // 1/(b+s) = Σ (-1)^k s^k / b^{k+1}
        let taylor: Vec<f64> = (0..=self.series_order())
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s / b.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.apply_series(&taylor))
    }

    /// Real power `x^p` for an element with positive body.
    pub fn powf(&self, p: f64) -> Result<Self> {
        let b = self.body();
        if b <= 0.0 {
            return Err(Error::NotInvertible);
        }
        let mut taylor = Vec::with_capacity(self.series_order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.series_order() {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            taylor.push(binom * b.powf(p - k as f64));
        }
        Ok(self.apply_series(&taylor))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.powf(0.5)
    }
}

impl fmt::Debug for GrassmannNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for GrassmannNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&m, &c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for i in mask_indices(m) {
                write!(f, "·ξ{i}")?;
            }
        }
        Ok(())
    }
}

impl<'a> Mul<&'a GrassmannNumber> for &'a GrassmannNumber {
    type Output = GrassmannNumber;

    /// Panics when the generator counts differ; use [`GrassmannNumber::gmul`]
    /// for the checked form.
    fn mul(self, rhs: &'a GrassmannNumber) -> GrassmannNumber {
        self.gmul(rhs).expect("Grassmann product over different algebras")
    }
}

impl Mul for GrassmannNumber {
    type Output = GrassmannNumber;
    fn mul(self, rhs: GrassmannNumber) -> GrassmannNumber {
        &self * &rhs
    }
}

impl AddAssign<&GrassmannNumber> for GrassmannNumber {
    fn add_assign(&mut self, rhs: &GrassmannNumber) {
        assert_eq!(self.generators, rhs.generators, "generator mismatch");
        for (m, c) in rhs.terms() {
            self.add_term(m, c);
        }
    }
}

impl SubAssign<&GrassmannNumber> for GrassmannNumber {
    fn sub_assign(&mut self, rhs: &GrassmannNumber) {
        assert_eq!(self.generators, rhs.generators, "generator mismatch");
        for (m, c) in rhs.terms() {
            self.add_term(m, -c);
        }
    }
}

impl<'a> Add<&'a GrassmannNumber> for &'a GrassmannNumber {
    type Output = GrassmannNumber;
    fn add(self, rhs: &'a GrassmannNumber) -> GrassmannNumber {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for GrassmannNumber {
    type Output = GrassmannNumber;
    fn add(mut self, rhs: GrassmannNumber) -> GrassmannNumber {
        self += &rhs;
        self
    }
}

impl<'a> Sub<&'a GrassmannNumber> for &'a GrassmannNumber {
    type Output = GrassmannNumber;
    fn sub(self, rhs: &'a GrassmannNumber) -> GrassmannNumber {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for GrassmannNumber {
    type Output = GrassmannNumber;
    fn sub(mut self, rhs: GrassmannNumber) -> GrassmannNumber {
        self -= &rhs;
        self
    }
}

impl Neg for &GrassmannNumber {
    type Output = GrassmannNumber;
    fn neg(self) -> GrassmannNumber {
        self.scale(-1.0)
    }
}

impl Neg for GrassmannNumber {
    type Output = GrassmannNumber;
    fn neg(self) -> GrassmannNumber {
        self.scale(-1.0)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    idx: Vec<usize>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct GrassmannRepr {
    generators: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for GrassmannNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GrassmannRepr {
            generators: self.generators,
            terms: self
                .terms()
                .map(|(m, c)| TermRepr {
                    idx: mask_indices(m),
                    c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GrassmannNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GrassmannRepr::deserialize(d)?;
        let mut out = GrassmannNumber::zero(repr.generators);
        for t in repr.terms {
            let term = GrassmannNumber::monomial(repr.generators, &t.idx, t.c).map_err(serde::de::Error::custom)?;
            out += &term;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(n: usize, i: usize) -> GrassmannNumber {
        GrassmannNumber::generator(n, i).unwrap()
    }

    /// Sign of sorting a word of distinct letters by counting transpositions
    /// of a bubble sort.
    fn bubble_sign(word: &[usize]) -> f64 {
        let mut w = word.to_vec();
        let mut swaps = 0;
        for i in 0..w.len() {
            for j in 0..w.len() - 1 - i {
                if w[j] > w[j + 1] {
                    w.swap(j, j + 1);
                    swaps += 1;
                }
            }
        }
        if swaps % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    #[test]
    fn antisymmetry_of_generators() {
        let (e1, e2) = (gen(4, 0), gen(4, 1));
        let e12 = GrassmannNumber::monomial(4, &[0, 1], 1.0).unwrap();
        assert_eq!(&e1 * &e2, e12);
        assert_eq!(&e2 * &e1, -&e12);
    }

    #[test]
    fn nilpotent_square() {
        let x = &GrassmannNumber::one(4) + &gen(4, 0);
        let expected = &GrassmannNumber::one(4) + &gen(4, 0).scale(2.0);
        assert_eq!(&x * &x, expected);
    }

    #[test]
    fn disjoint_pairs_commute_with_plus_sign() {
        let a = GrassmannNumber::monomial(4, &[0, 1], 1.0).unwrap();
        let b = GrassmannNumber::monomial(4, &[2, 3], 1.0).unwrap();
        let expected_sign = bubble_sign(&[0, 1, 2, 3]);
        let product = &a * &b;
        assert_eq!(product.coeff(0b1111), expected_sign);
        assert_eq!(expected_sign, 1.0);
    }

    #[test]
    fn reorder_sign_matches_bubble_sort() {
        for a in 0u64..64 {
            for b in 0u64..64 {
                if a & b != 0 {
                    continue;
                }
                let mut word = mask_indices(a);
                word.extend(mask_indices(b));
                assert_eq!(reorder_sign(a, b), bubble_sign(&word), "a={a:b} b={b:b}");
            }
        }
    }

    #[test]
    fn mismatched_generators_is_an_error() {
        let err = gen(3, 0).gmul(&gen(4, 0)).unwrap_err();
        assert_eq!(err, Error::GeneratorMismatch { left: 3, right: 4 });
    }

    #[test]
    fn body_and_soul() {
        let a = &GrassmannNumber::scalar(3, 3.0) + &GrassmannNumber::monomial(3, &[0, 1], 2.0).unwrap();
        assert_eq!(a.body(), 3.0);
        assert_eq!(a.soul(), GrassmannNumber::monomial(3, &[0, 1], 2.0).unwrap());
        assert_eq!(gen(3, 0).body(), 0.0);
        assert_eq!(a.soul().body(), 0.0);
    }

    #[test]
    fn parity_classification() {
        let e12 = GrassmannNumber::monomial(3, &[0, 1], 1.0).unwrap();
        assert_eq!(e12.parity(), Parity::Even);
        let odd = &gen(3, 0) + &GrassmannNumber::monomial(3, &[0, 1, 2], 1.0).unwrap();
        assert_eq!(odd.parity(), Parity::Odd);
        let mixed = &GrassmannNumber::one(3) + &gen(3, 0);
        assert_eq!(mixed.parity(), Parity::Mixed);
    }

    #[test]
    fn top_coefficient_examples() {
        let a = GrassmannNumber::monomial(2, &[0, 1], 5.0).unwrap();
        assert_eq!(a.top_coefficient(&[0, 1]).unwrap(), GrassmannNumber::scalar(2, 5.0));
        assert!(gen(2, 0).top_coefficient(&[0, 1]).unwrap().is_zero());
        let b = &GrassmannNumber::monomial(3, &[0, 1, 2], 1.0).unwrap() + &gen(3, 2);
        assert_eq!(b.top_coefficient(&[0, 1]).unwrap(), gen(3, 2));
        assert!(matches!(
            gen(2, 0).top_coefficient(&[0, 1, 2]),
            Err(Error::TooManyIntegrationGenerators { .. })
        ));
    }

    #[test]
    fn left_derivative_moves_generator_to_front() {
        // ∂/∂ξ0 (ξ1 ξ0) = -ξ1
        let a = GrassmannNumber::monomial(3, &[1, 0], 1.0).unwrap();
        assert_eq!(a.left_derivative(0), -gen(3, 1));
        assert!(gen(3, 1).left_derivative(0).is_zero());
    }

    #[test]
    fn recip_and_sqrt_invert_exactly() {
        let s = &GrassmannNumber::monomial(4, &[0, 1], 0.3).unwrap()
            + &GrassmannNumber::monomial(4, &[2, 3], -0.7).unwrap();
        let x = &GrassmannNumber::scalar(4, 2.0) + &s;
        let inv = x.recip().unwrap();
        let prod = &x * &inv;
        assert!((&prod - &GrassmannNumber::one(4)).max_abs() < 1e-15);
        let r = x.sqrt().unwrap();
        assert!((&(&r * &r) - &x).max_abs() < 1e-15);
        assert_eq!(gen(4, 0).recip().unwrap_err(), Error::NotInvertible);
    }

    #[test]
    fn serde_shape() {
        let a = &GrassmannNumber::scalar(3, 1.5) + &GrassmannNumber::monomial(3, &[2, 0], 2.0).unwrap();
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["terms"][1]["idx"], serde_json::json!([0, 2]));
        assert_eq!(json["terms"][1]["c"], serde_json::json!(-2.0));
        let back: GrassmannNumber = serde_json::from_value(json).unwrap();
        assert_eq!(back, a);
    }
}
