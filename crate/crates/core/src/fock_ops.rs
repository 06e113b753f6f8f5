//! Normal-ordered ladder-operator algebra for powers of the quadrature
//! operators, and translation of operator polynomials into Fock-basis
//! matrix elements.
//!
//! Conventions: `[x, p] = i`, `x = (a + a†)/√2`, `p = (a - a†)/(i√2)`.
//! Every polynomial is stored in normal order (all `a†` to the left of
//! `a`) with exact rational coefficients; conversion to floating point
//! happens only when matrix elements are built.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spectral::BandedFockMatrix;

/// Which quadrature operator a power expansion refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

/// A normal-ordered sum of monomials `a†^p a^q` with exact rational
/// coefficients. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OperatorPolynomial {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl OperatorPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The identity operator.
    pub fn identity() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0), BigRational::one());
        Self { terms }
    }

    /// The single monomial `c · a†^p a^q`.
    pub fn monomial(p: u32, q: u32, coeff: BigRational) -> Self {
        let mut poly = Self::zero();
        poly.add_term(p, q, coeff);
        poly
    }

    pub fn add_term(&mut self, p: u32, q: u32, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry((p, q)).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&(p, q));
        }
    }

    pub fn coefficient(&self, p: u32, q: u32) -> BigRational {
        self.terms
            .get(&(p, q))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Constant (identity) part of the polynomial.
    pub fn constant_term(&self) -> BigRational {
        self.coefficient(0, 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms
            .iter()
            .all(|(&(p, q), c)| self.coefficient(q, p) == *c)
    }

    pub fn add_assign(&mut self, other: &OperatorPolynomial) {
        for (&(p, q), c) in other.iter() {
            self.add_term(p, q, c.clone());
        }
    }

    pub fn scale(&self, factor: &BigRational) -> OperatorPolynomial {
        let mut out = Self::zero();
        for (&(p, q), c) in self.iter() {
            out.add_term(p, q, c * factor);
        }
        out
    }
}

/// Normal-ordered product of two polynomials.
///
/// Uses `a^q a†^p = Σ_j C(q,j) C(p,j) j! a†^{p-j} a^{q-j}` to reorder
/// the mixed middle factor.
pub fn multiply(lhs: &OperatorPolynomial, rhs: &OperatorPolynomial) -> OperatorPolynomial {
    let mut out = OperatorPolynomial::zero();
    for (&(p1, q1), c1) in lhs.iter() {
        for (&(p2, q2), c2) in rhs.iter() {
            let c = c1 * c2;
            for j in 0..=q1.min(p2) {
                let weight = binomial(q1, j) * binomial(p2, j) * factorial(j);
                out.add_term(
                    p1 + p2 - j,
                    q1 + q2 - j,
                    &c * BigRational::from_integer(weight),
                );
            }
        }
    }
    out
}

/// `(a + sign·a†)^m` by repeated multiplication, `sign ∈ {+1, -1}`.
pub fn ladder_sum_power(sign: i32, m: u32) -> OperatorPolynomial {
    let mut base = OperatorPolynomial::monomial(0, 1, BigRational::one());
    base.add_term(1, 0, BigRational::from_integer(BigInt::from(sign)));
    let mut acc = OperatorPolynomial::identity();
    for _ in 0..m {
        acc = multiply(&acc, &base);
    }
    acc
}

/// Exact normal-ordered expansion of `x^{2n}` or `p^{2n}`.
///
/// The closed-form double sum for `(a ± a†)^{2n}` is used, divided by
/// `2^n` (with an extra `(-1)^n` for the momentum operator).
pub fn expand_quadrature_power(which: Quadrature, order: u32) -> Result<OperatorPolynomial> {
    check_order(order)?;
    let two_n = order;
    let n = order / 2;
    let mut poly = OperatorPolynomial::zero();
    let fact_2n = factorial(two_n);
    for k in 0..=two_n {
        for l in 0..=(two_n - k) / 2 {
            let p = two_n - k - 2 * l;
            // (2n)! / (k! 2^l l! (2n-k-2l)!)
            let denom = factorial(k) * pow2(l) * factorial(l) * factorial(p);
            let mut coeff = BigRational::new(fact_2n.clone(), denom);
            if which == Quadrature::P && (k + l) % 2 == 1 {
                coeff = -coeff;
            }
            poly.add_term(p, k, coeff);
        }
    }
    // divide by 2^n; p^{2n} = (-1)^n (a - a†)^{2n} / 2^n
    let mut scale = BigRational::new(BigInt::one(), pow2(n));
    if which == Quadrature::P && n % 2 == 1 {
        scale = -scale;
    }
    Ok(poly.scale(&scale))
}

/// Normal-ordered form of `x^{2n} + p^{2n}`.
pub fn expand_sum(order: u32) -> Result<OperatorPolynomial> {
    let mut poly = expand_quadrature_power(Quadrature::X, order)?;
    poly.add_assign(&expand_quadrature_power(Quadrature::P, order)?);
    Ok(poly)
}

/// Vacuum expectation `⟨x^{2n} + p^{2n}⟩₀ = (2n)!/(2^{2n-1} n!)`.
///
/// Evaluated as an interleaved floating-point product so that large
/// orders neither overflow nor lose the leading digits.
pub fn vacuum_expectation(order: u32) -> Result<f64> {
    check_order(order)?;
    let n = order / 2;
    let mut acc = 2.0;
    for j in (n + 1)..=(2 * n) {
        acc *= j as f64 / 4.0;
    }
    Ok(acc)
}

/// Matrix element `⟨m| a†^p a^q |k⟩` with `m = k - q + p`, computed as a
/// product of square roots so that it stays finite for large indices.
pub fn monomial_matrix_element(p: u32, q: u32, k: usize) -> f64 {
    let q = q as usize;
    let p = p as usize;
    if k < q {
        return 0.0;
    }
    let mut value = 1.0;
    for j in (k - q + 1)..=k {
        value *= (j as f64).sqrt();
    }
    for j in (k - q + 1)..=(k - q + p) {
        value *= (j as f64).sqrt();
    }
    value
}

/// Truncated Fock-basis matrix of a Hermitian operator polynomial.
///
/// The result is real symmetric; only the upper bands are stored, one
/// per distinct offset `p - q ≥ 0` occurring in the polynomial.
pub fn to_fock_matrix(poly: &OperatorPolynomial, truncation: usize) -> Result<BandedFockMatrix> {
    if truncation == 0 {
        return Err(Error::InvalidInput("truncation must be at least 1".into()));
    }
    if !poly.is_hermitian() {
        return Err(Error::InvalidInput(
            "polynomial must be Hermitian to build a real symmetric matrix".into(),
        ));
    }
    let mut bands: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (&(p, q), coeff) in poly.iter() {
        if p < q {
            continue; // lower band, covered by the Hermitian partner
        }
        let offset = (p - q) as usize;
        let c = rational_to_f64(coeff);
        let band = bands
            .entry(offset)
            .or_insert_with(|| vec![0.0; truncation.saturating_sub(offset)]);
        // band[k] holds entry (k + offset, k); the monomial maps
        // |k⟩ → |k - q + p⟩ = |k + offset⟩ and needs k ≥ q
        for k in (q as usize)..truncation.saturating_sub(offset) {
            band[k] += c * monomial_matrix_element(p, q, k);
        }
    }
    Ok(BandedFockMatrix::from_bands(
        truncation,
        bands,
        poly.order_hint(),
    ))
}

impl OperatorPolynomial {
    fn order_hint(&self) -> Option<u32> {
        self.terms.keys().map(|&(p, q)| p + q).max()
    }
}

fn check_order(order: u32) -> Result<()> {
    if order < 2 || order % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "order must be a positive even integer, got {order}"
        )));
    }
    Ok(())
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back for ratios whose parts individually overflow
        let digits = 30u32;
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = (r.numer() * &scale) / r.denom();
        scaled.to_f64().unwrap_or(if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }) / 10f64.powi(digits as i32)
    })
}

fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for j in 2..=n {
        acc *= j;
    }
    acc
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn pow2(l: u32) -> BigInt {
    BigInt::one() << l
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn x_squared_expansion() {
        // x² = ½ + a†a + ½(a² + a†²)
        let poly = expand_quadrature_power(Quadrature::X, 2).unwrap();
        assert_eq!(poly.coefficient(0, 0), rat(1, 2));
        assert_eq!(poly.coefficient(1, 1), rat(1, 1));
        assert_eq!(poly.coefficient(0, 2), rat(1, 2));
        assert_eq!(poly.coefficient(2, 0), rat(1, 2));
        assert_eq!(poly.num_terms(), 4);
    }

    #[test]
    fn p_fourth_a4_coefficient() {
        let poly = expand_quadrature_power(Quadrature::P, 4).unwrap();
        assert_eq!(poly.coefficient(0, 4), rat(1, 4));
    }

    #[test]
    fn quadrature_powers_sum_to_expand_sum() {
        let x4 = expand_quadrature_power(Quadrature::X, 4).unwrap();
        let p4 = expand_quadrature_power(Quadrature::P, 4).unwrap();
        let mut sum = x4;
        sum.add_assign(&p4);
        assert_eq!(sum, expand_sum(4).unwrap());
    }

    #[test]
    fn expand_sum_known_forms() {
        // x² + p² = 1 + 2a†a
        let s2 = expand_sum(2).unwrap();
        assert_eq!(s2.coefficient(0, 0), rat(1, 1));
        assert_eq!(s2.coefficient(1, 1), rat(2, 1));
        assert_eq!(s2.num_terms(), 2);

        // x⁴ + p⁴ = 3/2 + 3a†²a² + 6a†a + ½(a⁴ + a†⁴)
        let s4 = expand_sum(4).unwrap();
        assert_eq!(s4.coefficient(0, 0), rat(3, 2));
        assert_eq!(s4.coefficient(2, 2), rat(3, 1));
        assert_eq!(s4.coefficient(1, 1), rat(6, 1));
        assert_eq!(s4.coefficient(0, 4), rat(1, 2));
        assert_eq!(s4.coefficient(4, 0), rat(1, 2));
        assert_eq!(s4.num_terms(), 5);

        // x⁶ + p⁶
        let s6 = expand_sum(6).unwrap();
        assert_eq!(s6.coefficient(0, 0), rat(15, 4));
        assert_eq!(s6.coefficient(3, 3), rat(5, 1));
        assert_eq!(s6.coefficient(2, 2), rat(45, 2));
        assert_eq!(s6.coefficient(1, 1), rat(45, 2));
        assert_eq!(s6.coefficient(1, 5), rat(3, 2));
        assert_eq!(s6.coefficient(5, 1), rat(3, 2));
        assert_eq!(s6.coefficient(0, 4), rat(15, 4));
        assert_eq!(s6.coefficient(4, 0), rat(15, 4));
        assert_eq!(s6.num_terms(), 8);
    }

    #[test]
    fn expand_rejects_bad_orders() {
        assert!(expand_sum(3).is_err());
        assert!(expand_sum(0).is_err());
        assert!(expand_quadrature_power(Quadrature::X, 5).is_err());
    }

    #[test]
    fn vacuum_values() {
        assert_eq!(vacuum_expectation(2).unwrap(), 1.0);
        assert_eq!(vacuum_expectation(4).unwrap(), 1.5);
        assert_eq!(vacuum_expectation(6).unwrap(), 3.75);
        // large order stays finite
        assert!(vacuum_expectation(200).unwrap().is_finite());
    }

    #[test]
    fn constant_term_matches_vacuum_exactly() {
        for n in 1..=6u32 {
            let order = 2 * n;
            let poly = expand_sum(order).unwrap();
            // (2n)!/(2^{2n-1} n!)
            let expected = BigRational::new(factorial(order), pow2(order - 1) * factorial(n));
            assert_eq!(poly.constant_term(), expected, "order {order}");
        }
    }

    #[test]
    fn band_structure_mod_4() {
        for order in (2..=16u32).step_by(2) {
            let poly = expand_sum(order).unwrap();
            for (&(p, q), _) in poly.iter() {
                let diff = p as i64 - q as i64;
                assert_eq!(diff.rem_euclid(4), 0, "order {order}, term ({p},{q})");
            }
        }
    }

    #[test]
    fn expansions_are_hermitian() {
        for order in (2..=12u32).step_by(2) {
            assert!(expand_sum(order).unwrap().is_hermitian());
        }
    }

    /// Brute-force oracle: build (a ± a†)^{2n} by repeated multiplication
    /// by a single ladder factor, reordering one commutator at a time.
    fn oracle_quadrature_power(which: Quadrature, order: u32) -> OperatorPolynomial {
        let sign = match which {
            Quadrature::X => 1,
            Quadrature::P => -1,
        };
        let raw = ladder_sum_power(sign, order);
        let n = order / 2;
        let mut scale = BigRational::new(BigInt::one(), pow2(n));
        if which == Quadrature::P && n % 2 == 1 {
            scale = -scale;
        }
        raw.scale(&scale)
    }

    #[test]
    fn closed_form_matches_product_oracle() {
        for order in (2..=8u32).step_by(2) {
            for which in [Quadrature::X, Quadrature::P] {
                let closed = expand_quadrature_power(which, order).unwrap();
                let oracle = oracle_quadrature_power(which, order);
                assert_eq!(closed, oracle, "order {order}, {which:?}");
            }
        }
    }

    #[test]
    fn m4_matrix_entries() {
        let m4 = to_fock_matrix(&expand_sum(4).unwrap(), 10).unwrap();
        for k in 0..10usize {
            let kf = k as f64;
            let diag = 1.5 + 3.0 * kf * (kf + 1.0);
            assert!((m4.entry(k, k) - diag).abs() < 1e-12);
        }
        for k in 0..6usize {
            let kf = k as f64;
            let off = 0.5 * ((kf + 1.0) * (kf + 2.0) * (kf + 3.0) * (kf + 4.0)).sqrt();
            assert!((m4.entry(k, k + 4) - off).abs() < 1e-12);
            assert!((m4.entry(k + 4, k) - off).abs() < 1e-12);
        }
        assert!((m4.entry(0, 4) - 6.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn m6_matrix_entries() {
        let m6 = to_fock_matrix(&expand_sum(6).unwrap(), 12).unwrap();
        for k in 0..12usize {
            let kf = k as f64;
            let diag = 3.75 + 5.0 * kf * (kf * kf + 1.5 * kf + 2.0);
            assert!((m6.entry(k, k) - diag).abs() < 1e-10);
        }
        for k in 0..8usize {
            let kf = k as f64;
            let off =
                1.5 * (kf + 2.5) * ((kf + 1.0) * (kf + 2.0) * (kf + 3.0) * (kf + 4.0)).sqrt();
            assert!((m6.entry(k, k + 4) - off).abs() < 1e-10);
        }
    }

    #[test]
    fn m2_is_diagonal() {
        let m2 = to_fock_matrix(&expand_sum(2).unwrap(), 8).unwrap();
        for k in 0..8usize {
            // diagonal entries carry √k·√k rounding from the matrix-element
            // product form, so compare approximately
            assert!((m2.entry(k, k) - (1.0 + 2.0 * k as f64)).abs() < 1e-12);
            for j in 0..8usize {
                if j != k {
                    assert_eq!(m2.entry(k, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn matrix_is_symmetric() {
        let m = to_fock_matrix(&expand_sum(8).unwrap(), 30).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(m.entry(i, j), m.entry(j, i));
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let poly = OperatorPolynomial::monomial(2, 0, rat(1, 1));
        assert!(to_fock_matrix(&poly, 5).is_err());
    }
}
