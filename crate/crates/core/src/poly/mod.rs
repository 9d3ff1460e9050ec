//! Sparse multivariate polynomial arithmetic and monomial indexing.
//!
//! Monomials are identified by exponent tuples ([`MultiIndex`]) compared in
//! graded-lexicographic order: total degree first, then lexicographic on the
//! exponent vector.  That order is fixed globally; Hankel matrix indexing
//! relies on it.  Coefficients are `f64` throughout; arithmetic prunes exact
//! zeros only, so degrees never change silently.

mod univariate;

pub use univariate::{chebyshev_t, chebyshev_u, real_roots, UnivariatePolynomial};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{CoreError, Result};

/// Exponent tuple of a monomial `x_1^{k_1} ... x_d^{k_d}`.
///
/// Ordered by total degree, ties broken lexicographically on the exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    /// The zero exponent in `d` variables (the constant monomial).
    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// The exponent of the single variable `x_{i+1}` in `d` variables.
    pub fn unit(d: usize, i: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = 1;
        MultiIndex(e)
    }

    /// Number of variables.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `|k| = k_1 + ... + k_d`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Component-wise sum (monomial product).
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// True if every exponent is zero.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})",
            self.0
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// All exponents of total degree at most `t` in `d` variables, in graded-lex
/// order.  The list has exactly `binom(t+d, d)` elements.
pub fn monomials_up_to(d: usize, t: u32) -> Vec<MultiIndex> {
    assert!(d >= 1, "dimension must be positive");
    let mut out = Vec::with_capacity(binomial(t as usize + d, d));
    let mut current = vec![0u32; d];
    for deg in 0..=t {
        fill_degree(&mut out, &mut current, 0, deg);
    }
    out
}

fn fill_degree(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for e in 0..=remaining {
        current[pos] = e;
        fill_degree(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// `binom(n, k)` as usize; saturates only far beyond the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// An ordered monomial basis together with an exponent → position lookup.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    items: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
}

impl MonomialBasis {
    /// Basis of all monomials of degree at most `t` in `d` variables.
    pub fn up_to(d: usize, t: u32) -> Self {
        let items = monomials_up_to(d, t);
        let index = items
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        MonomialBasis { items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[MultiIndex] {
        &self.items
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.items[i]
    }

    /// Position of `k` in the basis, if present.
    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        self.index.get(k).copied()
    }
}

/// A sparse polynomial in `d` variables: a map from exponents to nonzero
/// coefficients.  The zero polynomial stores no terms and has degree −1.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePolynomial {
    dimension: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl SparsePolynomial {
    /// The zero polynomial in `d` variables.
    pub fn zero(d: usize) -> Self {
        SparsePolynomial {
            dimension: d,
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial `c`.
    pub fn constant(d: usize, c: f64) -> Self {
        let mut p = Self::zero(d);
        if c != 0.0 {
            p.terms.insert(MultiIndex::zeros(d), c);
        }
        p
    }

    /// The single monomial `c * x^k`.
    pub fn monomial(k: MultiIndex, c: f64) -> Self {
        let mut p = Self::zero(k.len());
        if c != 0.0 {
            p.terms.insert(k, c);
        }
        p
    }

    /// The variable `x_{i+1}` in `d` variables.
    pub fn variable(d: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(d, i), 1.0)
    }

    /// Build from explicit terms; duplicate exponents are summed.
    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Self {
        let mut p = Self::zero(d);
        for (k, c) in terms {
            assert_eq!(k.len(), d, "exponent length must equal the dimension");
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, k: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Total degree; −1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|k| k.degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `x^k` (zero if the term is absent).
    pub fn coeff(&self, k: &MultiIndex) -> f64 {
        self.terms.get(k).copied().unwrap_or(0.0)
    }

    /// Iterate terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, &c)| (k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Evaluate at a point of matching dimension.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(CoreError::DimensionMismatch(format!(
                "point has {} coordinates, polynomial has {} variables",
                x.len(),
                self.dimension
            )));
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Evaluate without the dimension check (caller guarantees it).
    pub fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in &self.terms {
            let mut term = c;
            for (xi, &e) in x.iter().zip(k.exponents()) {
                if e > 0 {
                    term *= xi.powi(e as i32);
                }
            }
            acc += term;
        }
        acc
    }

    pub fn add(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.dimension, other.dimension, "dimension mismatch in add");
        let mut out = self.clone();
        for (k, &c) in &other.terms {
            out.add_term(k.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.dimension, other.dimension, "dimension mismatch in sub");
        let mut out = self.clone();
        for (k, &c) in &other.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.dimension, other.dimension, "dimension mismatch in mul");
        let mut out = SparsePolynomial::zero(self.dimension);
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &other.terms {
                out.add_term(ka.add(kb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> SparsePolynomial {
        let mut out = SparsePolynomial::zero(self.dimension);
        if s == 0.0 {
            return out;
        }
        for (k, &c) in &self.terms {
            out.terms.insert(k.clone(), c * s);
        }
        out
    }

    pub fn neg(&self) -> SparsePolynomial {
        self.scale(-1.0)
    }

    /// Sum of absolute coefficient values.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Drop terms whose coefficient magnitude is at most `tol`.
    pub fn prune(&self, tol: f64) -> SparsePolynomial {
        let mut out = SparsePolynomial::zero(self.dimension);
        for (k, &c) in &self.terms {
            if c.abs() > tol {
                out.terms.insert(k.clone(), c);
            }
        }
        out
    }
}

impl fmt::Display for SparsePolynomial {
    /// Terms in graded-lex order, `c * x1^a x2^b ...`, coefficients with 17
    /// significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let mut s = format!("{:.16e}", c);
                let vars: Vec<String> = k
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            format!("x{}", i + 1)
                        } else {
                            format!("x{}^{}", i + 1, e)
                        }
                    })
                    .collect();
                if !vars.is_empty() {
                    s.push_str(" * ");
                    s.push_str(&vars.join(" "));
                }
                s
            })
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// Tensor product `(p_1 ⊗ ... ⊗ p_d)(x) = p_1(x_1) ... p_d(x_d)` of
/// univariate factors, as a sparse polynomial in `d` variables.
pub fn tensor_product(factors: &[UnivariatePolynomial]) -> SparsePolynomial {
    assert!(!factors.is_empty(), "tensor product needs at least one factor");
    let d = factors.len();
    let mut out = SparsePolynomial::constant(d, 1.0);
    for (i, p) in factors.iter().enumerate() {
        let mut lifted = SparsePolynomial::zero(d);
        for (e, c) in p.coeffs().iter().enumerate() {
            if *c != 0.0 {
                let mut k = vec![0u32; d];
                k[i] = e as u32;
                lifted.add_term(MultiIndex::new(k), *c);
            }
        }
        out = out.mul(&lifted);
    }
    out
}

/// Substitute a multivariate polynomial into a univariate one (Horner).
pub fn compose(outer: &UnivariatePolynomial, inner: &SparsePolynomial) -> SparsePolynomial {
    let d = inner.dimension();
    let coeffs = outer.coeffs();
    if coeffs.is_empty() {
        return SparsePolynomial::zero(d);
    }
    let mut acc = SparsePolynomial::constant(d, coeffs[coeffs.len() - 1]);
    for &c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(inner).add(&SparsePolynomial::constant(d, c));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_up_to(1, 2).len(), 3);
        assert_eq!(monomials_up_to(3, 2).len(), 10);
        // Independent oracle: enumerate all triples with sum <= 7.
        let mut count = 0;
        for a in 0..=7u32 {
            for b in 0..=7u32 {
                for c in 0..=7u32 {
                    if a + b + c <= 7 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, binomial(10, 3));
        assert_eq!(monomials_up_to(3, 7).len(), count);
    }

    #[test]
    fn monomials_strictly_increasing_no_duplicates() {
        let ms = monomials_up_to(3, 5);
        for w in ms.windows(2) {
            assert!(w[0] < w[1], "{} !< {}", w[0], w[1]);
        }
        assert_eq!(ms.len(), binomial(8, 3));
    }

    #[test]
    fn univariate_monomials_match_powers() {
        let ms = monomials_up_to(1, 2);
        assert_eq!(
            ms,
            vec![
                MultiIndex::new(vec![0]),
                MultiIndex::new(vec![1]),
                MultiIndex::new(vec![2])
            ]
        );
    }

    #[test]
    fn evaluate_monomial() {
        // x1^2 x2^2 x3
        let p = SparsePolynomial::monomial(MultiIndex::new(vec![2, 2, 1]), 1.0);
        assert_eq!(p.evaluate(&[1.0, 1.0, 1.0]).unwrap(), 1.0);

        let tau = 0.4052;
        let s = ((1.0 - tau * tau) / 2.0_f64).sqrt();
        let val = p.evaluate(&[s, s, tau]).unwrap();
        let expect = ((1.0 - tau * tau) / 2.0).powi(2) * tau;
        assert!((val - expect).abs() < 1e-15);

        let z = SparsePolynomial::zero(3);
        assert_eq!(z.evaluate(&[0.3, -2.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let p = SparsePolynomial::variable(3, 0);
        assert!(p.evaluate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn arithmetic_difference_of_squares() {
        let d = 2;
        let x = SparsePolynomial::variable(d, 0);
        let y = SparsePolynomial::variable(d, 1);
        let prod = x.add(&y).mul(&x.sub(&y));
        let expect = SparsePolynomial::from_terms(
            d,
            [
                (MultiIndex::new(vec![2, 0]), 1.0),
                (MultiIndex::new(vec![0, 2]), -1.0),
            ],
        );
        assert_eq!(prod, expect);
    }

    #[test]
    fn scale_to_zero() {
        let p = SparsePolynomial::monomial(MultiIndex::new(vec![1, 2]), 3.0);
        assert!(p.scale(0.0).is_zero());
        assert_eq!(p.scale(0.0).degree(), -1);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn mul_dimension_mismatch_panics() {
        let p = SparsePolynomial::variable(2, 0);
        let q = SparsePolynomial::variable(3, 0);
        let _ = p.mul(&q);
    }

    #[test]
    fn tensor_product_examples() {
        let t1 = chebyshev_t(1);
        let xy = tensor_product(&[t1.clone(), t1.clone()]);
        assert_eq!(
            xy,
            SparsePolynomial::monomial(MultiIndex::new(vec![1, 1]), 1.0)
        );

        // T_2 ⊗ T_1 = (2t^2 − 1) ⊗ s = 2 x1^2 x2 − x2
        let t2 = chebyshev_t(2);
        let p = tensor_product(&[t2, t1.clone()]);
        let expect = SparsePolynomial::from_terms(
            2,
            [
                (MultiIndex::new(vec![2, 1]), 2.0),
                (MultiIndex::new(vec![0, 1]), -1.0),
            ],
        );
        assert_eq!(p, expect);

        // p ⊗ 1 lifts p into one more variable.
        let lifted = tensor_product(&[t1, UnivariatePolynomial::constant(1.0)]);
        assert_eq!(
            lifted,
            SparsePolynomial::monomial(MultiIndex::new(vec![1, 0]), 1.0)
        );
    }

    #[test]
    fn display_format() {
        let p = SparsePolynomial::from_terms(
            3,
            [
                (MultiIndex::new(vec![0, 0, 0]), 0.5),
                (MultiIndex::new(vec![2, 0, 1]), -3.0),
            ],
        );
        let s = format!("{}", p);
        assert_eq!(s, "5.0000000000000000e-1 + -3.0000000000000000e0 * x1^2 x3");
        assert_eq!(format!("{}", SparsePolynomial::zero(2)), "0");
    }

    #[test]
    fn basis_lookup() {
        let basis = MonomialBasis::up_to(3, 4);
        for (i, k) in basis.items().iter().enumerate() {
            assert_eq!(basis.position(k), Some(i));
        }
        assert_eq!(basis.position(&MultiIndex::new(vec![5, 0, 0])), None);
    }
}
