//! Compact basic semialgebraic domains and the two problem reductions.
//!
//! The four built-ins are the euclidean ball `B`, the hypercube `H`, the
//! simplex `S`, and the cross-polytope `C`, each described by polynomial
//! generators `g_1, ..., g_H ≥ 0`.  Every built-in generator is affine or
//! quadratic, so the half-degrees are all 1.

use crate::error::{CoreError, Result};
use crate::poly::{MultiIndex, SparsePolynomial};

/// Which built-in family a domain belongs to; reductions and grid sampling
/// are family-aware.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainFamily {
    Ball,
    Hypercube,
    Simplex,
    CrossPolytope,
}

impl DomainFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DomainFamily::Ball => "ball",
            DomainFamily::Hypercube => "hypercube",
            DomainFamily::Simplex => "simplex",
            DomainFamily::CrossPolytope => "cross",
        }
    }

    /// Parse a domain name as accepted by the CLI.
    pub fn parse(name: &str) -> Result<DomainFamily> {
        match name {
            "ball" => Ok(DomainFamily::Ball),
            "hypercube" | "cube" => Ok(DomainFamily::Hypercube),
            "simplex" => Ok(DomainFamily::Simplex),
            "cross" | "cross-polytope" | "crosspolytope" => Ok(DomainFamily::CrossPolytope),
            other => Err(CoreError::InvalidArgument(format!(
                "unknown domain '{other}' (expected ball|cross|simplex|hypercube)"
            ))),
        }
    }

    /// Construct the family member in dimension `d`.
    pub fn build(&self, d: usize) -> Result<SemialgebraicDomain> {
        match self {
            DomainFamily::Ball => Ok(make_ball(d)),
            DomainFamily::Hypercube => Ok(make_hypercube(d)),
            DomainFamily::Simplex => Ok(make_simplex(d)),
            DomainFamily::CrossPolytope => make_cross_polytope(d),
        }
    }
}

/// A compact basic semialgebraic set `{x : g_1(x) ≥ 0, ..., g_H(x) ≥ 0}`.
#[derive(Debug, Clone)]
pub struct SemialgebraicDomain {
    name: String,
    family: Option<DomainFamily>,
    dimension: usize,
    generators: Vec<SparsePolynomial>,
    half_degrees: Vec<u32>,
}

impl SemialgebraicDomain {
    /// Build a domain from explicit generators.  Compactness and the
    /// Archimedean condition are the caller's responsibility.
    pub fn from_generators(
        name: impl Into<String>,
        d: usize,
        generators: Vec<SparsePolynomial>,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(CoreError::InvalidArgument(
                "a semialgebraic domain needs at least one generator".into(),
            ));
        }
        for g in &generators {
            if g.dimension() != d {
                return Err(CoreError::DimensionMismatch(format!(
                    "generator has dimension {}, domain has {}",
                    g.dimension(),
                    d
                )));
            }
        }
        let half_degrees = generators
            .iter()
            .map(|g| (g.degree().max(0) as u32).div_ceil(2))
            .collect();
        Ok(SemialgebraicDomain {
            name: name.into(),
            family: None,
            dimension: d,
            generators,
            half_degrees,
        })
    }

    fn builtin(
        family: DomainFamily,
        d: usize,
        generators: Vec<SparsePolynomial>,
    ) -> SemialgebraicDomain {
        let mut dom = Self::from_generators(family.name(), d, generators)
            .expect("built-in generators are well-formed");
        dom.family = Some(family);
        dom
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Option<DomainFamily> {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generators(&self) -> &[SparsePolynomial] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// Half-degrees `n'_h = ceil(deg(g_h)/2)`.
    pub fn half_degrees(&self) -> &[u32] {
        &self.half_degrees
    }

    pub fn max_half_degree(&self) -> u32 {
        self.half_degrees.iter().copied().max().unwrap_or(0)
    }

    /// Append `1 − Σ x_i² ≥ 0` as a redundant generator.  The built-ins are
    /// all Archimedean already; this is a conditioning switch only.
    pub fn with_redundant_ball(mut self) -> SemialgebraicDomain {
        let d = self.dimension;
        self.generators.push(unit_ball_generator(d));
        self.half_degrees.push(1);
        self
    }

    /// True iff `g_h(x) ≥ −tol` for every generator.
    pub fn membership(&self, x: &[f64], tol: f64) -> bool {
        debug_assert_eq!(x.len(), self.dimension);
        self.generators
            .iter()
            .all(|g| g.evaluate_unchecked(x) >= -tol)
    }

    /// Axis-aligned bounding box; all four built-ins fit in `[−1,1]^d` and
    /// the simplex in `[0,1]^d`.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self.family {
            Some(DomainFamily::Simplex) => vec![(0.0, 1.0); self.dimension],
            _ => vec![(-1.0, 1.0); self.dimension],
        }
    }
}

/// Default absolute tolerance for membership queries.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

fn unit_ball_generator(d: usize) -> SparsePolynomial {
    let mut g = SparsePolynomial::constant(d, 1.0);
    for i in 0..d {
        let mut k = vec![0u32; d];
        k[i] = 2;
        g = g.sub(&SparsePolynomial::monomial(MultiIndex::new(k), 1.0));
    }
    g
}

/// Euclidean ball `B = {x : Σ x_i² ≤ 1}`; one quadratic generator.
pub fn make_ball(d: usize) -> SemialgebraicDomain {
    assert!(d >= 1);
    SemialgebraicDomain::builtin(DomainFamily::Ball, d, vec![unit_ball_generator(d)])
}

/// Hypercube `H = {x : max |x_i| ≤ 1}`; generators `1 − x_i²`.
pub fn make_hypercube(d: usize) -> SemialgebraicDomain {
    assert!(d >= 1);
    let gens = (0..d)
        .map(|i| {
            let mut k = vec![0u32; d];
            k[i] = 2;
            SparsePolynomial::constant(d, 1.0)
                .sub(&SparsePolynomial::monomial(MultiIndex::new(k), 1.0))
        })
        .collect();
    SemialgebraicDomain::builtin(DomainFamily::Hypercube, d, gens)
}

/// Simplex `S = {x : x_i ≥ 0, Σ x_i ≤ 1}`; generators `x_1, ..., x_d` and
/// `1 − Σ x_i`.
pub fn make_simplex(d: usize) -> SemialgebraicDomain {
    assert!(d >= 1);
    let mut gens: Vec<SparsePolynomial> =
        (0..d).map(|i| SparsePolynomial::variable(d, i)).collect();
    let mut last = SparsePolynomial::constant(d, 1.0);
    for i in 0..d {
        last = last.sub(&SparsePolynomial::variable(d, i));
    }
    gens.push(last);
    SemialgebraicDomain::builtin(DomainFamily::Simplex, d, gens)
}

/// Cross-polytope `C = {x : Σ |x_i| ≤ 1}` via the `2^d` affine generators
/// `1 − Σ ε_i x_i` over all sign vectors ε.  Refused for `d > 20`.
pub fn make_cross_polytope(d: usize) -> Result<SemialgebraicDomain> {
    assert!(d >= 1);
    if d > 20 {
        return Err(CoreError::InvalidArgument(format!(
            "cross-polytope in dimension {d} would need 2^{d} generators"
        )));
    }
    let mut gens = Vec::with_capacity(1 << d);
    for mask in 0..(1u32 << d) {
        let mut g = SparsePolynomial::constant(d, 1.0);
        for i in 0..d {
            let sign = if mask & (1 << i) != 0 { -1.0 } else { 1.0 };
            g = g.sub(&SparsePolynomial::variable(d, i).scale(sign));
        }
        gens.push(g);
    }
    Ok(SemialgebraicDomain::builtin(
        DomainFamily::CrossPolytope,
        d,
        gens,
    ))
}

/// Witness of the zero-exponent reduction: the kept coordinates, the fill
/// values for dropped ones, and the reduced exponent.
#[derive(Debug, Clone)]
pub struct ReductionWitness {
    /// Indices (0-based) of coordinates with nonzero exponent, ascending.
    pub kept_indices: Vec<usize>,
    /// Values assigned to the dropped coordinates (always 0 here).
    pub dropped_fill: Vec<f64>,
    /// The exponent restricted to the kept coordinates; all entries > 0.
    pub reduced_exponent: MultiIndex,
}

/// Drop coordinates with zero exponent.  For each built-in family the
/// restriction to the kept coordinates is the same-family domain in the
/// smaller dimension, with fill value 0, and the best-approximation error is
/// unchanged.
pub fn reduce_zero_exponents(
    k: &MultiIndex,
    domain: &SemialgebraicDomain,
) -> Result<(ReductionWitness, SemialgebraicDomain)> {
    let family = domain.family().ok_or_else(|| {
        CoreError::InvalidArgument("zero-exponent reduction needs a built-in domain".into())
    })?;
    if k.len() != domain.dimension() {
        return Err(CoreError::DimensionMismatch(format!(
            "exponent has {} entries, domain dimension is {}",
            k.len(),
            domain.dimension()
        )));
    }
    if k.is_zero() {
        return Err(CoreError::InvalidArgument(
            "exponent is identically zero: nothing to approximate".into(),
        ));
    }
    let kept_indices: Vec<usize> = (0..k.len()).filter(|&i| k.get(i) > 0).collect();
    let reduced_exponent = MultiIndex::new(kept_indices.iter().map(|&i| k.get(i)).collect());
    let dropped_fill = vec![0.0; k.len() - kept_indices.len()];
    let reduced = family.build(kept_indices.len())?;
    debug_assert_eq!(reduced_exponent.degree(), k.degree());
    Ok((
        ReductionWitness {
            kept_indices,
            dropped_fill,
            reduced_exponent,
        },
        reduced,
    ))
}

/// Sort the exponent entries in descending order.  For permutation-invariant
/// domains (all four built-ins) the best-approximation error is unchanged.
pub fn canonicalize_exponent(k: &MultiIndex) -> MultiIndex {
    let mut e: Vec<u32> = k.exponents().to_vec();
    e.sort_unstable_by(|a, b| b.cmp(a));
    MultiIndex::new(e)
}

/// All descending exponents with exactly `d` positive parts summing to `n`
/// (partitions of `n` into `d` parts), in lexicographically decreasing order.
pub fn canonical_exponents(d: usize, n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut parts = vec![0u32; d];
    partitions_rec(n, d, n, &mut parts, 0, &mut out);
    out.sort_by(|a, b| b.exponents().cmp(a.exponents()));
    out
}

fn partitions_rec(
    remaining: u32,
    slots: usize,
    max_part: u32,
    parts: &mut Vec<u32>,
    pos: usize,
    out: &mut Vec<MultiIndex>,
) {
    if slots == 1 {
        if remaining >= 1 && remaining <= max_part {
            parts[pos] = remaining;
            out.push(MultiIndex::new(parts.clone()));
        }
        return;
    }
    let hi = max_part.min(remaining.saturating_sub(slots as u32 - 1));
    for p in (1..=hi).rev() {
        parts[pos] = p;
        partitions_rec(remaining - p, slots - 1, p, parts, pos + 1, out);
    }
}

/// Deterministic covering of the domain: a regular lattice on the bounding
/// box intersected with the domain, plus boundary enrichment (Fibonacci
/// points on the sphere for the ball, facet lattices for the polytopes).
pub fn grid_sample(domain: &SemialgebraicDomain, m: usize) -> Vec<Vec<f64>> {
    assert!(m >= 2, "grid density must be at least 2");
    let d = domain.dimension();
    let bbox = domain.bounding_box();
    let mut points: Vec<Vec<f64>> = Vec::new();

    // Bounding-box lattice filtered by membership.
    let mut idx = vec![0usize; d];
    loop {
        let x: Vec<f64> = (0..d)
            .map(|i| {
                let (lo, hi) = bbox[i];
                lo + (hi - lo) * idx[i] as f64 / (m - 1) as f64
            })
            .collect();
        if domain.membership(&x, MEMBERSHIP_TOL) {
            points.push(x);
        }
        // Odometer increment.
        let mut carry = true;
        for slot in idx.iter_mut() {
            if carry {
                *slot += 1;
                if *slot == m {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }

    match domain.family() {
        Some(DomainFamily::Ball) => {
            points.extend(sphere_points(d, m));
        }
        Some(_) => {
            points.extend(facet_lattice(domain, m));
        }
        None => {}
    }
    points
}

/// Quasi-uniform points on the unit sphere: endpoints for d=1, the golden
/// angle for d=2, and the spherical Fibonacci lattice for d=3.  Higher
/// dimensions fall back to the lattice covering alone.
fn sphere_points(d: usize, m: usize) -> Vec<Vec<f64>> {
    let n = (m * m).max(64);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    match d {
        1 => vec![vec![-1.0], vec![1.0]],
        2 => (0..n)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
                vec![theta.cos(), theta.sin()]
            })
            .collect(),
        3 => (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let theta = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
                vec![r * theta.cos(), r * theta.sin(), z]
            })
            .collect(),
        _ => vec![],
    }
}

/// Lattice points of each facet of a built-in polytope, with the facet
/// equation solved for the last free coordinate.
fn facet_lattice(domain: &SemialgebraicDomain, m: usize) -> Vec<Vec<f64>> {
    let d = domain.dimension();
    let bbox = domain.bounding_box();
    let mut out = Vec::new();
    if d == 1 {
        // Facets of an interval are its endpoints, already on the lattice.
        return out;
    }
    // Each generator g_h = 0 cuts out a facet; sample the lattice on the
    // first d−1 coordinates and solve the affine equation for the last.
    for g in domain.generators() {
        if g.degree() > 1 {
            // Quadratic hypercube generators: facets are x_i = ±1 planes.
            continue;
        }
        let coeff_last = g.coeff(&MultiIndex::unit(d, d - 1));
        let mut idx = vec![0usize; d - 1];
        loop {
            let mut x: Vec<f64> = (0..d - 1)
                .map(|i| {
                    let (lo, hi) = bbox[i];
                    lo + (hi - lo) * idx[i] as f64 / (m - 1) as f64
                })
                .collect();
            x.push(0.0);
            if coeff_last != 0.0 {
                let rest = g.evaluate_unchecked(&x);
                x[d - 1] = rest / (-coeff_last);
                if domain.membership(&x, MEMBERSHIP_TOL) {
                    out.push(x);
                }
            }
            let mut carry = true;
            for slot in idx.iter_mut() {
                if carry {
                    *slot += 1;
                    if *slot == m {
                        *slot = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
    }
    // Hypercube: add the x_i = ±1 facet lattices explicitly.
    if domain.family() == Some(DomainFamily::Hypercube) {
        for i in 0..d {
            for &v in &[-1.0, 1.0] {
                let mut idx = vec![0usize; d - 1];
                loop {
                    let mut x = Vec::with_capacity(d);
                    let mut j = 0;
                    for pos in 0..d {
                        if pos == i {
                            x.push(v);
                        } else {
                            let (lo, hi) = bbox[pos];
                            x.push(lo + (hi - lo) * idx[j] as f64 / (m - 1) as f64);
                            j += 1;
                        }
                    }
                    out.push(x);
                    let mut carry = true;
                    for slot in idx.iter_mut() {
                        if carry {
                            *slot += 1;
                            if *slot == m {
                                *slot = 0;
                            } else {
                                carry = false;
                            }
                        }
                    }
                    if carry {
                        break;
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shapes() {
        let b = make_ball(3);
        assert_eq!(b.num_generators(), 1);
        assert_eq!(b.half_degrees(), &[1]);
        let g = &b.generators()[0];
        assert_eq!(g.evaluate(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(g.evaluate(&[1.0, 0.0, 0.0]).unwrap(), 0.0);

        let s = make_simplex(2);
        assert_eq!(s.num_generators(), 3);

        let c = make_cross_polytope(3).unwrap();
        assert_eq!(c.num_generators(), 8);
        for g in c.generators() {
            assert_eq!(g.degree(), 1);
        }
        assert!(make_cross_polytope(21).is_err());

        // Every built-in generator is affine or quadratic.
        for dom in [make_ball(3), make_hypercube(3), make_simplex(3)] {
            for &h in dom.half_degrees() {
                assert_eq!(h, 1);
            }
        }
    }

    #[test]
    fn membership_examples() {
        assert!(make_ball(3).membership(&[0.0, 0.0, 1.0], 0.0));
        assert!(!make_simplex(3).membership(&[0.5, 0.5, 0.5], MEMBERSHIP_TOL));
        let c = make_cross_polytope(3).unwrap();
        assert!(c.membership(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1e-12));
    }

    #[test]
    fn membership_matches_norm_inequalities() {
        // Deterministic pseudo-random points in [-1.2, 1.2]^3.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.4 - 1.2
        };
        let ball = make_ball(3);
        let cube = make_hypercube(3);
        let simplex = make_simplex(3);
        let cross = make_cross_polytope(3).unwrap();
        for _ in 0..1000 {
            let x = [next(), next(), next()];
            let l2 = x.iter().map(|v| v * v).sum::<f64>();
            let l1 = x.iter().map(|v| v.abs()).sum::<f64>();
            let linf = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert_eq!(ball.membership(&x, 0.0), 1.0 - l2 >= 0.0);
            assert_eq!(cube.membership(&x, 0.0), 1.0 - linf * linf >= 0.0);
            assert_eq!(cross.membership(&x, 0.0), 1.0 - l1 >= 0.0);
            let simplex_cond = x.iter().all(|&v| v >= 0.0) && 1.0 - x.iter().sum::<f64>() >= 0.0;
            assert_eq!(simplex.membership(&x, 0.0), simplex_cond);
        }
    }

    #[test]
    fn reduction_drops_zero_exponents() {
        let k = MultiIndex::new(vec![2, 0, 1]);
        let (w, reduced) = reduce_zero_exponents(&k, &make_ball(3)).unwrap();
        assert_eq!(w.kept_indices, vec![0, 2]);
        assert_eq!(w.reduced_exponent, MultiIndex::new(vec![2, 1]));
        assert_eq!(w.dropped_fill, vec![0.0]);
        assert_eq!(reduced.dimension(), 2);
        assert_eq!(reduced.family(), Some(DomainFamily::Ball));

        let k = MultiIndex::new(vec![1, 1, 1]);
        let (w, reduced) = reduce_zero_exponents(&k, &make_ball(3)).unwrap();
        assert_eq!(w.kept_indices, vec![0, 1, 2]);
        assert_eq!(reduced.dimension(), 3);

        let k = MultiIndex::new(vec![0, 0, 3]);
        let (w, reduced) = reduce_zero_exponents(&k, &make_simplex(3)).unwrap();
        assert_eq!(w.reduced_exponent, MultiIndex::new(vec![3]));
        assert_eq!(reduced.dimension(), 1);
        assert_eq!(reduced.num_generators(), 2);

        assert!(reduce_zero_exponents(&MultiIndex::zeros(3), &make_ball(3)).is_err());
    }

    #[test]
    fn canonicalization() {
        assert_eq!(
            canonicalize_exponent(&MultiIndex::new(vec![1, 2, 2])),
            MultiIndex::new(vec![2, 2, 1])
        );
        assert_eq!(
            canonicalize_exponent(&MultiIndex::new(vec![4, 1, 1])),
            MultiIndex::new(vec![4, 1, 1])
        );
        let parts = canonical_exponents(3, 6);
        assert_eq!(
            parts,
            vec![
                MultiIndex::new(vec![4, 1, 1]),
                MultiIndex::new(vec![3, 2, 1]),
                MultiIndex::new(vec![2, 2, 2]),
            ]
        );
    }

    #[test]
    fn partition_counts_follow_recurrence() {
        // p_d(n) = p_{d-1}(n-1) + p_d(n-d)
        let p = |d: usize, n: u32| canonical_exponents(d, n).len();
        for d in 1..=4usize {
            for n in d as u32..=10 {
                let lhs = p(d, n);
                let rhs = if d == 1 {
                    1
                } else {
                    p(d - 1, n - 1) + if n >= 2 * d as u32 { p(d, n - d as u32) } else { 0 }
                };
                assert_eq!(lhs, rhs, "d={d} n={n}");
            }
        }
        assert_eq!(p(3, 10), 8);
    }

    #[test]
    fn grid_sampling() {
        let h1 = make_hypercube(1);
        let pts = grid_sample(&h1, 3);
        let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        assert_eq!(xs, vec![-1.0, 0.0, 1.0]);

        let b2 = make_ball(2);
        for p in grid_sample(&b2, 8) {
            assert!(b2.membership(&p, 1e-9));
        }

        let s2 = make_simplex(2);
        let pts = grid_sample(&s2, 2);
        for v in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] {
            assert!(
                pts.iter().any(|p| (p[0] - v[0]).abs() < 1e-12 && (p[1] - v[1]).abs() < 1e-12),
                "missing vertex {v:?}"
            );
        }
    }
}
