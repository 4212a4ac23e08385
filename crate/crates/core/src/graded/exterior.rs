use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Parity;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};

/// Largest supported generator count. Anything past 12 works but is slow:
/// the fibre has dimension `2^n`.
pub const MAX_GENERATORS: usize = 16;

/// An element of the exterior algebra on `n` odd generators `θ_1..θ_n`.
///
/// Monomials `θ_{i1} ∧ … ∧ θ_{ik}` (ascending indices) are keyed by the bit
/// mask with bit `i-1` set for each factor. Storage is sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorElement {
    generators: usize,
    terms: BTreeMap<u32, C64>,
}

/// Sign of `θ^a ∧ θ^b` relative to the ordered monomial `θ^{a|b}`, or `None`
/// when the two share a generator.
#[inline]
pub(crate) fn monomial_sign(a: u32, b: u32) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    // each generator of b moves left past the generators of a above it
    let mut swaps = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if swaps % 2 == 0 { 1.0 } else { -1.0 })
}

impl ExteriorElement {
    pub fn new(generators: usize) -> Result<Self> {
        if generators > MAX_GENERATORS {
            return Err(Error::TooManyGenerators(generators));
        }
        Ok(ExteriorElement {
            generators,
            terms: BTreeMap::new(),
        })
    }

    /// Panics if `generators > MAX_GENERATORS`.
    pub fn zero(generators: usize) -> Self {
        Self::new(generators).expect("generator count within MAX_GENERATORS")
    }

    pub fn scalar(generators: usize, c: C64) -> Self {
        Self::monomial(generators, 0, c)
    }

    pub fn one(generators: usize) -> Self {
        Self::scalar(generators, C64::new(1.0, 0.0))
    }

    /// `θ_j`, with `j` counted from zero.
    pub fn generator(generators: usize, j: usize) -> Self {
        assert!(j < generators, "generator index {j} out of range");
        Self::monomial(generators, 1 << j, C64::new(1.0, 0.0))
    }

    pub fn monomial(generators: usize, mask: u32, c: C64) -> Self {
        let mut e = Self::zero(generators);
        assert!(
            generators == 32 || mask >> generators == 0,
            "mask uses generators beyond {generators}"
        );
        if c != ZERO {
            e.terms.insert(mask, c);
        }
        e
    }

    /// Degree-one element `Σ_j v_j θ_j`.
    pub fn linear(coeffs: &[C64]) -> Self {
        let mut e = Self::zero(coeffs.len());
        for (j, c) in coeffs.iter().enumerate() {
            if *c != ZERO {
                e.terms.insert(1 << j, *c);
            }
        }
        e
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, C64)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn coeff(&self, mask: u32) -> C64 {
        self.terms.get(&mask).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| *c == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.norm()))
    }

    pub fn add_term(&mut self, mask: u32, c: C64) {
        if c == ZERO {
            return;
        }
        let entry = self.terms.entry(mask).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.terms.remove(&mask);
        }
    }

    /// The evaluation map: the coefficient of the empty monomial.
    pub fn body(&self) -> C64 {
        self.coeff(0)
    }

    /// Everything of positive degree (the nilpotent ideal part).
    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.terms.remove(&0);
        s
    }

    pub fn homogeneous_part(&self, degree: u32) -> Self {
        ExteriorElement {
            generators: self.generators,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.count_ones() == degree)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    /// `Some(parity)` when all monomials share a parity; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut seen: Option<Parity> = None;
        for (m, c) in &self.terms {
            if *c == ZERO {
                continue;
            }
            let p = Parity::from_bit(m.count_ones());
            match seen {
                None => seen = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(seen.unwrap_or(Parity::Even))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.generators);
        if c == ZERO {
            return out;
        }
        for (m, v) in &self.terms {
            out.terms.insert(*m, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        exterior_mul(self, other)
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.generators);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(sign) = monomial_sign(*a, *b) {
                    out.add_term(a | b, ca * cb * sign);
                }
            }
        }
        out
    }

    /// Extends a linear map on the generators (`θ_j ↦ Σ_k a[k][j] θ_k`) to the
    /// even derivation of the whole algebra.
    pub fn apply_derivation(&self, a: &CMatrix) -> Result<Self> {
        let n = self.generators;
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "derivation matrix {}x{} on {n} generators",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut out = Self::zero(n);
        for (mask, c) in &self.terms {
            let mut rest = *mask;
            while rest != 0 {
                let j = rest.trailing_zeros();
                rest &= rest - 1;
                let below = mask & ((1u32 << j) - 1);
                let above = mask & !((1u32 << (j + 1)) - 1);
                for k in 0..n {
                    let akj = a[(k, j as usize)];
                    if akj == ZERO {
                        continue;
                    }
                    let kbit = 1u32 << k;
                    let Some(s1) = monomial_sign(below, kbit) else { continue };
                    let Some(s2) = monomial_sign(below | kbit, above) else { continue };
                    out.add_term(below | kbit | above, c * akj * s1 * s2);
                }
            }
        }
        Ok(out)
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.generators, other.generators,
            "exterior elements over different generator counts"
        );
    }
}

/// Supercommutative product of the exterior algebra.
pub fn exterior_mul(a: &ExteriorElement, b: &ExteriorElement) -> Result<ExteriorElement> {
    if a.generators != b.generators {
        return Err(Error::DimensionMismatch(format!(
            "exterior product of elements on {} and {} generators",
            a.generators, b.generators
        )));
    }
    Ok(a.mul_unchecked(b))
}

/// Contraction with the covector `Σ_j c_j θ_j^*`: the odd derivation with
/// `ι(θ_j^*) θ_k = δ_jk`.
pub fn interior_mul(covector: &[C64], a: &ExteriorElement) -> Result<ExteriorElement> {
    if covector.len() != a.generators {
        return Err(Error::DimensionMismatch(format!(
            "covector of length {} on {} generators",
            covector.len(),
            a.generators
        )));
    }
    let mut out = ExteriorElement::zero(a.generators);
    for (mask, c) in &a.terms {
        let mut rest = *mask;
        while rest != 0 {
            let j = rest.trailing_zeros();
            rest &= rest - 1;
            let cj = covector[j as usize];
            if cj == ZERO {
                continue;
            }
            let sign = if (mask & ((1u32 << j) - 1)).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out.add_term(mask & !(1u32 << j), c * cj * sign);
        }
    }
    Ok(out)
}

/// `∂/∂θ_j` for `j` in `1..=n`, straight from the coordinate formula
/// `Σ_α α_j (-1)^{α_1+…+α_{j-1}} f_α θ^{α - e_j}`.
pub fn theta_derivative(j: usize, f: &ExteriorElement) -> Result<ExteriorElement> {
    let n = f.generators;
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, max: n });
    }
    let mut out = ExteriorElement::zero(n);
    for (mask, c) in &f.terms {
        let alpha = |i: usize| (mask >> (i - 1)) & 1;
        if alpha(j) == 0 {
            continue;
        }
        let preceding: u32 = (1..j).map(alpha).sum();
        let sign = if preceding % 2 == 0 { 1.0 } else { -1.0 };
        out.add_term(mask ^ (1u32 << (j - 1)), c * sign);
    }
    Ok(out)
}

impl Add for &ExteriorElement {
    type Output = ExteriorElement;

    fn add(self, rhs: &ExteriorElement) -> ExteriorElement {
        self.check_same(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, *c);
        }
        out
    }
}

impl Sub for &ExteriorElement {
    type Output = ExteriorElement;

    fn sub(self, rhs: &ExteriorElement) -> ExteriorElement {
        self.check_same(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Neg for &ExteriorElement {
    type Output = ExteriorElement;

    fn neg(self) -> ExteriorElement {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[derive(Serialize, Deserialize)]
struct ExteriorRepr {
    generators: usize,
    terms: BTreeMap<u32, [f64; 2]>,
}

impl Serialize for ExteriorElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExteriorRepr {
            generators: self.generators,
            terms: self.terms.iter().map(|(m, c)| (*m, [c.re, c.im])).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExteriorElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ExteriorRepr::deserialize(deserializer)?;
        let mut e = ExteriorElement::new(repr.generators).map_err(serde::de::Error::custom)?;
        for (m, [r, i]) in repr.terms {
            if repr.generators < 32 && m >> repr.generators != 0 {
                return Err(serde::de::Error::custom(format!(
                    "monomial mask {m} exceeds {} generators",
                    repr.generators
                )));
            }
            e.add_term(m, C64::new(r, i));
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use proptest::prelude::*;

    fn th(n: usize, j: usize) -> ExteriorElement {
        ExteriorElement::generator(n, j)
    }

    #[test]
    fn generators_anticommute_and_square_to_zero() {
        let a = th(2, 0).mul(&th(2, 1)).unwrap();
        let b = th(2, 1).mul(&th(2, 0)).unwrap();
        assert_eq!(a, -&b);
        assert!(th(2, 0).mul(&th(2, 0)).unwrap().is_zero());
    }

    #[test]
    fn product_of_unit_plus_generators() {
        let one = ExteriorElement::one(2);
        let p = (&one + &th(2, 0)).mul(&(&one + &th(2, 1))).unwrap();
        // 1 + θ1 + θ2 + θ1θ2
        assert_eq!(p.coeff(0b00), re(1.0));
        assert_eq!(p.coeff(0b01), re(1.0));
        assert_eq!(p.coeff(0b10), re(1.0));
        assert_eq!(p.coeff(0b11), re(1.0));
    }

    #[test]
    fn mismatched_generator_counts_error() {
        assert!(matches!(
            exterior_mul(&th(2, 0), &th(3, 0)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(interior_mul(&[re(1.0)], &th(2, 0)).is_err());
        assert!(ExteriorElement::new(17).is_err());
    }

    #[test]
    fn contraction_signs() {
        let t12 = ExteriorElement::monomial(2, 0b11, re(1.0));
        let i1 = interior_mul(&[re(1.0), re(0.0)], &t12).unwrap();
        let i2 = interior_mul(&[re(0.0), re(1.0)], &t12).unwrap();
        assert_eq!(i1, th(2, 1));
        assert_eq!(i2, -&th(2, 0));
    }

    #[test]
    fn theta_derivative_examples() {
        let t12 = ExteriorElement::monomial(2, 0b11, re(1.0));
        assert_eq!(theta_derivative(1, &t12).unwrap(), th(2, 1));
        assert_eq!(theta_derivative(2, &t12).unwrap(), -&th(2, 0));
        assert!(theta_derivative(1, &ExteriorElement::scalar(2, re(3.0)))
            .unwrap()
            .is_zero());
        assert!(matches!(
            theta_derivative(3, &t12),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        ));
        assert!(theta_derivative(0, &t12).is_err());
    }

    #[test]
    fn body_examples() {
        assert_eq!(th(2, 0).body(), re(0.0));
        let f = &ExteriorElement::scalar(2, re(2.5)) + &ExteriorElement::monomial(2, 0b11, re(1.0));
        assert_eq!(f.body(), re(2.5));
    }

    #[test]
    fn derivation_extends_generator_map() {
        // θ1 ↦ θ2, θ2 ↦ 0 sends θ1θ3 ↦ θ2θ3 and θ1θ2 ↦ 0
        let mut a = CMatrix::zeros(3, 3);
        a[(1, 0)] = re(1.0);
        let f = ExteriorElement::monomial(3, 0b101, re(1.0));
        assert_eq!(
            f.apply_derivation(&a).unwrap(),
            ExteriorElement::monomial(3, 0b110, re(1.0))
        );
        let g = ExteriorElement::monomial(3, 0b011, re(1.0));
        assert!(g.apply_derivation(&a).unwrap().is_zero());
    }

    pub(crate) fn arb_element(n: usize) -> impl Strategy<Value = ExteriorElement> {
        proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1 << n).prop_map(move |cs| {
            let mut e = ExteriorElement::zero(n);
            for (mask, (r, i)) in cs.into_iter().enumerate() {
                e.add_term(mask as u32, C64::new(r, i));
            }
            e
        })
    }

    fn arb_homogeneous(n: usize) -> impl Strategy<Value = ExteriorElement> {
        (arb_element(n), 0..=n as u32).prop_map(|(e, d)| e.homogeneous_part(d))
    }

    fn close(a: &ExteriorElement, b: &ExteriorElement) -> bool {
        (a - b).max_abs() < 1e-9
    }

    proptest! {
        #[test]
        fn product_is_associative(a in arb_element(4), b in arb_element(4), c in arb_element(4)) {
            let l = a.mul(&b).unwrap().mul(&c).unwrap();
            let r = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert!(close(&l, &r));
        }

        #[test]
        fn product_is_supercommutative(a in arb_homogeneous(4), b in arb_homogeneous(4)) {
            let pa = a.parity().unwrap();
            let pb = b.parity().unwrap();
            let ab = a.mul(&b).unwrap();
            let ba = b.mul(&a).unwrap().scale(re(pa.koszul_sign(pb)));
            prop_assert!(close(&ab, &ba));
        }

        #[test]
        fn body_is_a_homomorphism(a in arb_element(3), b in arb_element(3)) {
            let lhs = a.mul(&b).unwrap().body();
            prop_assert!((lhs - a.body() * b.body()).norm() < 1e-9);
            prop_assert_eq!(a.soul().body(), re(0.0));
        }

        #[test]
        fn soul_is_nilpotent(a in arb_element(3)) {
            let s = a.soul();
            let mut p = ExteriorElement::one(3);
            for _ in 0..4 {
                p = p.mul(&s).unwrap();
            }
            prop_assert!(p.is_zero());
        }

        #[test]
        fn contraction_is_an_odd_derivation(
            cov in proptest::collection::vec(-2.0..2.0f64, 4),
            a in arb_homogeneous(4),
            b in arb_element(4),
        ) {
            let cov: Vec<C64> = cov.into_iter().map(re).collect();
            let lhs = interior_mul(&cov, &a.mul(&b).unwrap()).unwrap();
            let sign = re(Parity::Odd.koszul_sign(a.parity().unwrap()));
            let rhs = &interior_mul(&cov, &a).unwrap().mul(&b).unwrap()
                + &a.mul(&interior_mul(&cov, &b).unwrap()).unwrap().scale(sign);
            prop_assert!(close(&lhs, &rhs));
            let twice = interior_mul(&cov, &interior_mul(&cov, &b).unwrap()).unwrap();
            prop_assert!(twice.max_abs() < 1e-9);
        }

        #[test]
        fn theta_derivative_matches_contraction(a in arb_element(4), j in 1usize..=4) {
            let mut cov = vec![re(0.0); 4];
            cov[j - 1] = re(1.0);
            prop_assert_eq!(theta_derivative(j, &a).unwrap(), interior_mul(&cov, &a).unwrap());
        }

        #[test]
        fn derivation_obeys_leibniz(a in arb_element(3), b in arb_element(3),
                                    entries in proptest::collection::vec(-1.0..1.0f64, 9)) {
            let d = CMatrix::from_iterator(3, 3, entries.into_iter().map(re));
            let lhs = a.mul(&b).unwrap().apply_derivation(&d).unwrap();
            let rhs = &a.apply_derivation(&d).unwrap().mul(&b).unwrap()
                + &a.mul(&b.apply_derivation(&d).unwrap()).unwrap();
            prop_assert!(close(&lhs, &rhs));
        }

        #[test]
        fn json_round_trip(a in arb_element(3)) {
            let s = serde_json::to_string(&a).unwrap();
            let b: ExteriorElement = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
