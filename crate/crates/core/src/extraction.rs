//! Certification of finite convergence and extraction of atomic measures.
//!
//! A pseudo-moment sequence whose Hankel matrix keeps the same numerical
//! rank when the order drops by the maximal generator half-degree is flat:
//! it is the moment sequence of an atomic measure, which is recovered by
//! the multiplication-operator method (factor the moment matrix, build the
//! coordinate shift operators on a monomial basis of its column space, and
//! read the atoms off as joint eigenvalues).  The signed combination of the
//! two extracted measures forms a signature whose extremality certifies the
//! best-approximation value.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::closedform::oracle_uniform_norm;
use crate::domains::SemialgebraicDomain;
use crate::error::{CoreError, Result};
use crate::hierarchy::moment_matrix;
use crate::poly::{monomials_up_to, MultiIndex, SparsePolynomial};

/// Atom merge tolerance (∞-norm) when building signatures.
pub const MERGE_TOL: f64 = 1e-5;

/// A finitely supported nonnegative measure.
#[derive(Debug, Clone)]
pub struct AtomicMeasure {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn empty() -> Self {
        AtomicMeasure {
            atoms: vec![],
            weights: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Moments of the measure up to the given degree.
    pub fn moments(&self, d: usize, order: u32) -> BTreeMap<MultiIndex, f64> {
        monomials_up_to(d, order)
            .into_iter()
            .map(|k| {
                let v = self
                    .atoms
                    .iter()
                    .zip(&self.weights)
                    .map(|(a, &w)| {
                        w * k
                            .exponents()
                            .iter()
                            .zip(a)
                            .map(|(&e, &x)| x.powi(e as i32))
                            .product::<f64>()
                    })
                    .sum();
                (k, v)
            })
            .collect()
    }
}

/// Signed, positively weighted point set normalized to total weight one.
#[derive(Debug, Clone)]
pub struct Signature {
    pub points: Vec<Vec<f64>>,
    /// ±1 per point.
    pub signs: Vec<i8>,
    pub weights: Vec<f64>,
}

impl Signature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Numerical ranks of the order-`t` and order-`t − n'` Hankel matrices.
#[derive(Debug, Clone, Copy)]
pub struct FlatnessReport {
    pub rank_high: usize,
    pub rank_low: usize,
    pub certified: bool,
}

fn numerical_rank(m: &DMatrix<f64>, rank_tol: f64) -> usize {
    let eigs = m.clone().symmetric_eigen().eigenvalues;
    let max = eigs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 {
        return 0;
    }
    eigs.iter().filter(|v| v.abs() > rank_tol * max).count()
}

/// Compare the numerical rank of `Hank_t(y)` against `Hank_{t−n'_max}(y)`;
/// equality certifies an atomic representing measure.
pub fn flatness_check(
    y: &BTreeMap<MultiIndex, f64>,
    t: u32,
    d: usize,
    n_half_max: u32,
    rank_tol: f64,
) -> Result<FlatnessReport> {
    if n_half_max > t {
        return Err(CoreError::InvalidArgument(format!(
            "half-degree {n_half_max} exceeds order {t}"
        )));
    }
    let high = moment_matrix(y, t, d)?;
    let low = moment_matrix(y, t - n_half_max, d)?;
    let rank_high = numerical_rank(&high, rank_tol);
    let rank_low = numerical_rank(&low, rank_tol);
    Ok(FlatnessReport {
        rank_high,
        rank_low,
        certified: rank_high == rank_low,
    })
}

/// Reduced row echelon form with column pivoting in the given column order;
/// returns the pivot column indices.
fn rref(mat: &mut DMatrix<f64>, tol: f64) -> Vec<usize> {
    let (rows, cols) = mat.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Largest magnitude in column c at or below row r.
        let (mut best, mut best_val) = (r, mat[(r, c)].abs());
        for rr in r + 1..rows {
            if mat[(rr, c)].abs() > best_val {
                best = rr;
                best_val = mat[(rr, c)].abs();
            }
        }
        if best_val <= tol {
            continue;
        }
        mat.swap_rows(r, best);
        let piv = mat[(r, c)];
        for cc in 0..cols {
            mat[(r, cc)] /= piv;
        }
        for rr in 0..rows {
            if rr != r {
                let factor = mat[(rr, c)];
                if factor != 0.0 {
                    for cc in 0..cols {
                        let sub = factor * mat[(r, cc)];
                        mat[(rr, cc)] -= sub;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Extract the atoms of a flat pseudo-moment sequence by the standard
/// multiplication-operator method.  The random convex combination of the
/// coordinate shifts is seeded; failures retry with three fresh seeds.
pub fn extract_atoms(
    y: &BTreeMap<MultiIndex, f64>,
    t: u32,
    d: usize,
    rank_tol: f64,
    seed: u64,
) -> Result<AtomicMeasure> {
    let m = moment_matrix(y, t, d)?;
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max_eig == 0.0 {
        return Ok(AtomicMeasure::empty());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });
    let rank: usize = order
        .iter()
        .filter(|&&i| eig.eigenvalues[i].abs() > rank_tol * max_eig)
        .count();
    if rank == 0 {
        return Ok(AtomicMeasure::empty());
    }

    // V = U_r sqrt(Λ_r); columns of Vᵀ correspond to monomials.
    let mut vt = DMatrix::zeros(rank, n);
    for (row, &i) in order.iter().take(rank).enumerate() {
        let lam = eig.eigenvalues[i].max(0.0).sqrt();
        for c in 0..n {
            vt[(row, c)] = eig.eigenvectors[(c, i)] * lam;
        }
    }
    // Pivots below the rank-noise scale would build the basis out of noise
    // columns and corrupt the shift operators.
    let vmax = vt.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let pivot_tol = rank_tol.sqrt() * vmax;
    let pivots = rref(&mut vt, pivot_tol);
    if pivots.len() != rank {
        return Err(CoreError::ExtractionFailed(format!(
            "echelon rank {} does not match spectral rank {rank}",
            pivots.len()
        )));
    }
    let basis_t = monomials_up_to(d, t);
    let index: std::collections::HashMap<MultiIndex, usize> = basis_t
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();
    // Shift monomials x_i·β_j must stay within degree t.
    for &p in &pivots {
        if basis_t[p].degree() >= t {
            return Err(CoreError::ExtractionFailed(format!(
                "pivot monomial {} too deep for coordinate shifts",
                basis_t[p]
            )));
        }
    }

    // Coordinate multiplication operators on the pivot basis.
    let mut shift_ops = Vec::with_capacity(d);
    for i in 0..d {
        let mut ni = DMatrix::zeros(rank, rank);
        for (j, &p) in pivots.iter().enumerate() {
            let shifted = basis_t[p].add(&MultiIndex::unit(d, i));
            let col = index[&shifted];
            for row in 0..rank {
                ni[(row, j)] = vt[(row, col)];
            }
        }
        shift_ops.push(ni);
    }

    // Joint diagonalization through the Schur form of a random convex
    // combination; retried with fresh seeds when complex pairs appear.
    let mut last_err = String::new();
    for attempt in 0..4u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut lambda: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
        let sum: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|v| *v /= sum);
        let mut combo = DMatrix::zeros(rank, rank);
        for (i, op) in shift_ops.iter().enumerate() {
            combo += op * lambda[i];
        }
        let schur = nalgebra::linalg::Schur::try_new(combo, 1e-12, 10_000);
        let Some(schur) = schur else {
            last_err = "Schur iteration did not converge".into();
            continue;
        };
        let (q, tmat) = schur.unpack();
        let mut complex = false;
        for i in 0..rank.saturating_sub(1) {
            if tmat[(i + 1, i)].abs()
                > 1e-7 * (1.0 + tmat[(i, i)].abs() + tmat[(i + 1, i + 1)].abs())
            {
                complex = true;
                break;
            }
        }
        if complex {
            last_err = "complex eigenvalue pair in shift combination".into();
            continue;
        }
        let mut atoms = Vec::with_capacity(rank);
        for l in 0..rank {
            let ql = q.column(l);
            let atom: Vec<f64> = shift_ops.iter().map(|op| (ql.transpose() * op * ql)[(0, 0)]).collect();
            atoms.push(atom);
        }

        // Weights from the full moment data, least squares.
        let probe = monomials_up_to(d, 2 * t);
        let mut phi = DMatrix::zeros(probe.len(), rank);
        let mut rhs = DVector::zeros(probe.len());
        for (row, k) in probe.iter().enumerate() {
            let Some(&val) = y.get(k) else {
                return Err(CoreError::MissingMoment(k.to_string()));
            };
            rhs[row] = val;
            for (col, atom) in atoms.iter().enumerate() {
                phi[(row, col)] = k
                    .exponents()
                    .iter()
                    .zip(atom)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product();
            }
        }
        let svd = phi.svd(true, true);
        let weights = match svd.solve(&rhs, 1e-12) {
            Ok(w) => w,
            Err(e) => {
                last_err = e.to_string();
                continue;
            }
        };
        if weights.iter().any(|&w| w < -1e-6) {
            last_err = format!(
                "negative weight {:.3e}",
                weights.iter().copied().fold(f64::INFINITY, f64::min)
            );
            continue;
        }
        let mut w: Vec<f64> = weights.iter().map(|&v| v.max(0.0)).collect();
        let mass = y
            .get(&MultiIndex::zeros(d))
            .copied()
            .unwrap_or_else(|| w.iter().sum());
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            let scale = mass / total;
            w.iter_mut().for_each(|v| *v *= scale);
        }
        // Drop numerically empty atoms.
        let kept: Vec<(Vec<f64>, f64)> = atoms
            .into_iter()
            .zip(w)
            .filter(|(_, wt)| *wt > 1e-12)
            .collect();
        return Ok(AtomicMeasure {
            atoms: kept.iter().map(|(a, _)| a.clone()).collect(),
            weights: kept.iter().map(|(_, w)| *w).collect(),
        });
    }
    Err(CoreError::ExtractionFailed(last_err))
}

/// Union of the two extracted measures with signs +1/−1, weights normalized
/// to total one.  Atoms closer than `merge_tol` (∞-norm) with equal signs
/// merge; an atom shared across signs is an error.
pub fn build_signature(
    plus: &AtomicMeasure,
    minus: &AtomicMeasure,
    merge_tol: f64,
) -> Result<Signature> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut signs: Vec<i8> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();

    let close = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
            <= merge_tol
    };
    let mut push = |atom: &[f64], sign: i8, w: f64| -> Result<()> {
        for i in 0..points.len() {
            if close(&points[i], atom) {
                if signs[i] != sign {
                    return Err(CoreError::AmbiguousSignature(format!(
                        "atom near {:?} appears with both signs",
                        atom
                    )));
                }
                // Weighted-average position keeps merged atoms accurate.
                let total = weights[i] + w;
                for (pc, &ac) in points[i].iter_mut().zip(atom) {
                    *pc = (*pc * weights[i] + ac * w) / total;
                }
                weights[i] = total;
                return Ok(());
            }
        }
        points.push(atom.to_vec());
        signs.push(sign);
        weights.push(w);
        Ok(())
    };
    for (a, &w) in plus.atoms.iter().zip(&plus.weights) {
        push(a, 1, w)?;
    }
    for (a, &w) in minus.atoms.iter().zip(&minus.weights) {
        push(a, -1, w)?;
    }
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    Ok(Signature {
        points,
        signs,
        weights,
    })
}

/// Outcome of the extremality test.
#[derive(Debug, Clone)]
pub struct ExtremalityReport {
    pub extremal: bool,
    /// Normalized positive weights when extremal.
    pub weights: Option<Vec<f64>>,
    pub null_dimension: usize,
    /// Set when two support points coincide numerically.
    pub rank_deficient: bool,
}

/// Signed Vandermonde matrix: rows indexed by monomials of degree ≤
/// `degree`, columns by support points, entry `σ(ω)·m(ω)`.
fn signed_vandermonde(sig: &Signature, d: usize, degree: u32) -> DMatrix<f64> {
    let pts = sig.len();
    let monos = monomials_up_to(d, degree);
    let mut m = DMatrix::zeros(monos.len(), pts);
    for (row, k) in monos.iter().enumerate() {
        for (col, (pt, &sgn)) in sig.points.iter().zip(&sig.signs).enumerate() {
            let mv: f64 = k
                .exponents()
                .iter()
                .zip(pt)
                .map(|(&e, &x)| x.powi(e as i32))
                .product();
            m[(row, col)] = sgn as f64 * mv;
        }
    }
    m
}

/// Search for strictly positive weights annihilating all polynomials of
/// total degree ≤ `degree` against the signed support: the signature is
/// extremal iff the signed Vandermonde matrix has a positive null vector.
pub fn verify_extremal_signature(sig: &Signature, d: usize, degree: u32) -> ExtremalityReport {
    let pts = sig.len();
    let m = signed_vandermonde(sig, d, degree);
    let mut rank_deficient = false;
    for i in 0..pts {
        for j in i + 1..pts {
            if sig.points[i]
                .iter()
                .zip(&sig.points[j])
                .all(|(a, b)| (a - b).abs() < 1e-12)
            {
                rank_deficient = true;
            }
        }
    }

    // Null space of M through the Gram matrix; its rounding floor is at
    // ε·λmax, so the null threshold sits at 1e-12 relative (σ ≤ 1e-6 σmax).
    let gram = m.transpose() * &m;
    let eig = gram.symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thresh = 1e-12 * max_eig.max(1e-300);
    let null_cols: Vec<usize> = (0..pts)
        .filter(|&i| eig.eigenvalues[i].abs() <= thresh)
        .collect();
    let null_dim = null_cols.len();
    if null_dim == 0 {
        return ExtremalityReport {
            extremal: false,
            weights: None,
            null_dimension: 0,
            rank_deficient,
        };
    }

    let accept = |w: &DVector<f64>| -> Option<Vec<f64>> {
        let sum: f64 = w.iter().sum();
        if sum.abs() < 1e-300 {
            return None;
        }
        let normalized: Vec<f64> = w.iter().map(|&v| v / sum).collect();
        if normalized.iter().all(|&v| v > 1e-8) {
            Some(normalized)
        } else {
            None
        }
    };

    // Least-squares projection of the all-ones vector onto the null space.
    let ones = DVector::from_element(pts, 1.0);
    let mut proj = DVector::zeros(pts);
    for &i in &null_cols {
        let v = eig.eigenvectors.column(i);
        proj += v * v.dot(&ones);
    }
    if let Some(w) = accept(&proj) {
        return ExtremalityReport {
            extremal: true,
            weights: Some(w),
            null_dimension: null_dim,
            rank_deficient,
        };
    }
    // Deterministic fallback: sign combinations of up to four basis vectors.
    if null_dim <= 4 {
        let combos = 3usize.pow(null_dim as u32);
        for code in 1..combos {
            let mut w = DVector::zeros(pts);
            let mut rem = code;
            for &i in &null_cols {
                let s = match rem % 3 {
                    0 => 0.0,
                    1 => 1.0,
                    _ => -1.0,
                };
                rem /= 3;
                if s != 0.0 {
                    w += eig.eigenvectors.column(i) * s;
                }
            }
            if let Some(wn) = accept(&w) {
                return ExtremalityReport {
                    extremal: true,
                    weights: Some(wn),
                    null_dimension: null_dim,
                    rank_deficient,
                };
            }
        }
    }
    // Large null spaces (continuum-supported residuals) defeat both simple
    // searches; fall back to the nonnegative-weights feasibility program
    // and demand strict positivity across the whole support.
    if null_dim > 0 {
        if let Some(wn) = nonnegative_null_weights(&m) {
            if wn.iter().all(|&v| v > 1e-8) {
                return ExtremalityReport {
                    extremal: true,
                    weights: Some(wn),
                    null_dimension: null_dim,
                    rank_deficient,
                };
            }
        }
    }
    ExtremalityReport {
        extremal: false,
        weights: None,
        null_dimension: null_dim,
        rank_deficient,
    }
}

/// Normalized weights `w ≥ 0, Σw = 1, Mw = 0` from an interior-point
/// feasibility solve, or None when no such weights exist.  Zero entries mark
/// support points no annihilating measure can use.
fn nonnegative_null_weights(m: &DMatrix<f64>) -> Option<Vec<f64>> {
    use crate::sdp::{solve, Direction, LinearFunctional, SdpProblem, SolveOptions};
    let (rows, pts) = m.shape();
    if pts == 0 {
        return None;
    }
    // One 1x1 block per weight (w_i ≥ 0), zero objective: the interior
    // point lands at a well-spread feasible point when one exists.
    let mut problem = SdpProblem::new(vec![1; pts], pts, Direction::Maximize);
    for i in 0..pts {
        problem.add_equality(
            LinearFunctional::new().matrix(i, 0, 0, 1.0).scalar(i, -1.0),
            0.0,
        );
    }
    for r in 0..rows {
        let mut f = LinearFunctional::new();
        for i in 0..pts {
            if m[(r, i)] != 0.0 {
                f.push_scalar(i, m[(r, i)]);
            }
        }
        if !f.scalar_terms.is_empty() {
            problem.add_equality(f, 0.0);
        }
    }
    let mut mass = LinearFunctional::new();
    for i in 0..pts {
        mass.push_scalar(i, 1.0);
    }
    problem.add_equality(mass, 1.0);

    let sol = solve(&problem, &SolveOptions::default()).ok()?;
    if !sol.status.is_usable() {
        return None;
    }
    // Recheck feasibility independently of the solver's claim.
    let w = DVector::from_column_slice(&sol.scalar_values);
    if w.iter().any(|&v| v < -1e-7) {
        return None;
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-6 || (m * &w).amax() > 1e-6 {
        return None;
    }
    Some(w.iter().map(|&v| (v / total).max(0.0)).collect())
}

/// Trim a (possibly oversampled) signature to the support of a nonnegative
/// annihilating measure: points whose weight vanishes are dropped.  Returns
/// None when no such measure exists at all.
pub fn extremal_support(sig: &Signature, d: usize, degree: u32) -> Option<Signature> {
    let m = signed_vandermonde(sig, d, degree);
    let w = nonnegative_null_weights(&m)?;
    let keep: Vec<usize> = (0..sig.len()).filter(|&i| w[i] > 1e-6).collect();
    if keep.is_empty() {
        return None;
    }
    let total: f64 = keep.iter().map(|&i| w[i]).sum();
    Some(Signature {
        points: keep.iter().map(|&i| sig.points[i].clone()).collect(),
        signs: keep.iter().map(|&i| sig.signs[i]).collect(),
        weights: keep.iter().map(|&i| w[i] / total).collect(),
    })
}

/// Equioscillation check for a residual against a signature.
#[derive(Debug, Clone, Copy)]
pub struct EquioscillationReport {
    pub ok: bool,
    /// Grid-oracle uniform norm of the residual.
    pub norm: f64,
    /// Smallest |g(ω)| / norm over the support.
    pub worst_ratio: f64,
}

/// True iff every support point attains the uniform norm of `g` within
/// `tol` (relative) and carries the sign the signature prescribes.
pub fn verify_equioscillation(
    sig: &Signature,
    g: &SparsePolynomial,
    domain: &SemialgebraicDomain,
    tol: f64,
) -> Result<EquioscillationReport> {
    if g.dimension() != domain.dimension() {
        return Err(CoreError::DimensionMismatch(
            "residual dimension does not match the domain".into(),
        ));
    }
    let norm = oracle_uniform_norm(g, domain, 60, 60);
    let mut ok = true;
    let mut worst: f64 = f64::INFINITY;
    for (pt, &sgn) in sig.points.iter().zip(&sig.signs) {
        let val = g.evaluate(pt)?;
        worst = worst.min(val.abs() / norm);
        if val.abs() < (1.0 - tol) * norm || (val.signum() as i8) != sgn {
            ok = false;
        }
    }
    Ok(EquioscillationReport {
        ok,
        norm,
        worst_ratio: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atomic_moments(atoms: &[Vec<f64>], weights: &[f64], order: u32) -> BTreeMap<MultiIndex, f64> {
        let m = AtomicMeasure {
            atoms: atoms.to_vec(),
            weights: weights.to_vec(),
        };
        m.moments(atoms[0].len(), order)
    }

    #[test]
    fn flatness_on_diracs_and_uniform() {
        // Single Dirac: ranks (1,1).
        let y = atomic_moments(&[vec![0.4, -0.2]], &[1.0], 8);
        let rep = flatness_check(&y, 4, 2, 1, 1e-6).unwrap();
        assert_eq!((rep.rank_low, rep.rank_high), (1, 1));
        assert!(rep.certified);

        // Three generic Diracs at t=4: ranks (3,3).
        let atoms = vec![vec![0.1, 0.7], vec![-0.5, 0.2], vec![0.3, -0.6]];
        let y = atomic_moments(&atoms, &[0.5, 0.25, 0.25], 8);
        let rep = flatness_check(&y, 4, 2, 1, 1e-6).unwrap();
        assert_eq!((rep.rank_low, rep.rank_high), (3, 3));

        // Uniform measure on [−1,1] at t=3: full rank, not certified.
        let mut y = BTreeMap::new();
        for k in 0..=6u32 {
            let v = if k % 2 == 0 { 1.0 / (k as f64 + 1.0) } else { 0.0 };
            y.insert(MultiIndex::new(vec![k]), v);
        }
        let rep = flatness_check(&y, 3, 1, 1, 1e-6).unwrap();
        assert_eq!(rep.rank_high, 4);
        assert!(!rep.certified);
    }

    #[test]
    fn extract_symmetric_pair() {
        // y = moments of ½δ(−1) + ½δ(+1), d=1, t=2.
        let y = atomic_moments(&[vec![-1.0], vec![1.0]], &[0.5, 0.5], 4);
        let m = extract_atoms(&y, 2, 1, 1e-6, 0).unwrap();
        assert_eq!(m.len(), 2);
        let mut xs: Vec<f64> = m.atoms.iter().map(|a| a[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((xs[0] + 1.0).abs() < 1e-8);
        assert!((xs[1] - 1.0).abs() < 1e-8);
        for w in &m.weights {
            assert!((w - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn extract_recovers_random_atoms() {
        let atoms = vec![vec![0.31, -0.42, 0.11], vec![-0.58, 0.22, 0.35]];
        let weights = vec![0.6, 0.4];
        let y = atomic_moments(&atoms, &weights, 6);
        let m = extract_atoms(&y, 3, 3, 1e-8, 0).unwrap();
        assert_eq!(m.len(), 2);
        // Match each recovered atom to its source.
        for (a, &w) in m.atoms.iter().zip(&m.weights) {
            let (src, sw) = atoms
                .iter()
                .zip(&weights)
                .min_by(|(x, _), (y2, _)| {
                    let dx: f64 = x.iter().zip(a).map(|(u, v)| (u - v).abs()).sum();
                    let dy: f64 = y2.iter().zip(a).map(|(u, v)| (u - v).abs()).sum();
                    dx.partial_cmp(&dy).unwrap()
                })
                .unwrap();
            for (u, v) in src.iter().zip(a) {
                assert!((u - v).abs() < 1e-7, "atom {a:?} vs {src:?}");
            }
            assert!((w - sw).abs() < 1e-7);
        }
        // Round trip: moments of the extraction reproduce y.
        let back = m.moments(3, 6);
        for (k, v) in &y {
            assert!((back[k] - v).abs() < 1e-8);
        }
    }

    #[test]
    fn signature_merging_and_ambiguity() {
        let plus = AtomicMeasure {
            atoms: vec![vec![0.5, 0.5], vec![0.5 + 1e-7, 0.5]],
            weights: vec![0.3, 0.2],
        };
        let minus = AtomicMeasure {
            atoms: vec![vec![-0.5, 0.0]],
            weights: vec![0.5],
        };
        let sig = build_signature(&plus, &minus, MERGE_TOL).unwrap();
        assert_eq!(sig.len(), 2);
        assert!((sig.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(sig.signs, vec![1, -1]);

        // Same atom with both signs is ambiguous.
        let minus_bad = AtomicMeasure {
            atoms: vec![vec![0.5, 0.5]],
            weights: vec![0.5],
        };
        assert!(matches!(
            build_signature(&plus, &minus_bad, MERGE_TOL),
            Err(CoreError::AmbiguousSignature(_))
        ));
    }

    #[test]
    fn univariate_t2_signature_is_extremal() {
        // n=2 on [−1,1]: support {−1, 0, 1}, signs {+,−,+}, the classical
        // T_2 equioscillation; null-space weights are {¼, ½, ¼}.
        let sig = Signature {
            points: vec![vec![-1.0], vec![0.0], vec![1.0]],
            signs: vec![1, -1, 1],
            weights: vec![0.25, 0.5, 0.25],
        };
        let rep = verify_extremal_signature(&sig, 1, 1);
        assert!(rep.extremal);
        let w = rep.weights.unwrap();
        assert!((w[0] - 0.25).abs() < 1e-9);
        assert!((w[1] - 0.5).abs() < 1e-9);
        assert!((w[2] - 0.25).abs() < 1e-9);

        // Dropping a point kills extremality.
        let sig2 = Signature {
            points: vec![vec![-1.0], vec![0.0]],
            signs: vec![1, -1],
            weights: vec![0.5, 0.5],
        };
        assert!(!verify_extremal_signature(&sig2, 1, 1).extremal);
    }
}
