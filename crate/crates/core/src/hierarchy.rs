//! Assembly and level sweeps of the paired moment/SOS relaxations.
//!
//! For a polynomial `f` of degree `N ≥ n` on a domain with generators `g_h`
//! of half-degrees `n'_h`, level `t` builds two semidefinite programs whose
//! optimal values `ub_t` (SOS side) and `ub'_t` (moment side) coincide and
//! form a nonincreasing sequence of upper bounds converging to the best
//! approximation error from below-degree polynomials.  Levels must satisfy
//! `t ≥ N + max n'_h`; smaller levels are rejected unless forced.
//!
//! The moment program keeps the pseudo-moments `y±` as shared free scalars,
//! with every Hankel/localizing block entry tied to them by an equality;
//! the solver eliminates those ties internally.

use std::collections::{BTreeMap, HashMap};

use log::warn;
use nalgebra::DMatrix;

use crate::domains::SemialgebraicDomain;
use crate::error::{CoreError, Result};
use crate::extraction::{extract_atoms, flatness_check, AtomicMeasure};
use crate::poly::{monomials_up_to, MonomialBasis, MultiIndex, SparsePolynomial};
use crate::sdp::{
    solve, Direction, LinearFunctional, SdpProblem, SdpSolution, SolveOptions, SolveStatus,
};

/// Largest supported Hankel block side at desk scale.
pub const MAX_BLOCK_SIDE: usize = 200;

/// Pseudo-moment sequences `y⁺`, `y⁻` indexed by monomials up to degree 2t.
#[derive(Debug, Clone)]
pub struct MomentVector {
    pub dimension: usize,
    /// Maximum indexed degree (= 2t).
    pub order: u32,
    pub plus: BTreeMap<MultiIndex, f64>,
    pub minus: BTreeMap<MultiIndex, f64>,
}

impl MomentVector {
    /// `y⁺_0 + y⁻_0`, equal to 1 after a feasible solve.
    pub fn total_mass(&self) -> f64 {
        let zero = MultiIndex::zeros(self.dimension);
        self.plus.get(&zero).copied().unwrap_or(0.0)
            + self.minus.get(&zero).copied().unwrap_or(0.0)
    }
}

/// Hankel (moment) matrix of order `t`: rows and columns indexed by
/// monomials of degree ≤ t, entry (i,j) = `y_{i+j}`.
pub fn moment_matrix(y: &BTreeMap<MultiIndex, f64>, t: u32, d: usize) -> Result<DMatrix<f64>> {
    let basis = monomials_up_to(d, t);
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let key = basis[i].add(&basis[j]);
            let v = *y
                .get(&key)
                .ok_or_else(|| CoreError::MissingMoment(key.to_string()))?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Localizing matrix of order `s` for generator `g`: entry (i,j) =
/// `Σ_{ℓ'} coeff_{ℓ'}(g) · y_{i+j+ℓ'}`.
pub fn localizing_matrix(
    y: &BTreeMap<MultiIndex, f64>,
    g: &SparsePolynomial,
    s: u32,
) -> Result<DMatrix<f64>> {
    let d = g.dimension();
    let basis = monomials_up_to(d, s);
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let base = basis[i].add(&basis[j]);
            let mut acc = 0.0;
            for (lp, c) in g.terms() {
                let key = base.add(lp);
                let v = *y
                    .get(&key)
                    .ok_or_else(|| CoreError::MissingMoment(key.to_string()))?;
                acc += c * v;
            }
            m[(i, j)] = acc;
            m[(j, i)] = acc;
        }
    }
    Ok(m)
}

/// Minimal admissible level `N + max n'_h` for a degree-`N` objective.
pub fn level_threshold(f_degree: u32, domain: &SemialgebraicDomain) -> u32 {
    f_degree + domain.max_half_degree()
}

fn check_level(
    f: &SparsePolynomial,
    n: u32,
    domain: &SemialgebraicDomain,
    t: u32,
    force: bool,
) -> Result<u32> {
    if f.is_zero() {
        return Err(CoreError::InvalidArgument(
            "objective polynomial is zero".into(),
        ));
    }
    if f.dimension() != domain.dimension() {
        return Err(CoreError::DimensionMismatch(format!(
            "objective has {} variables, domain {}",
            f.dimension(),
            domain.dimension()
        )));
    }
    if n == 0 {
        return Err(CoreError::InvalidArgument(
            "approximation degree n must be at least 1".into(),
        ));
    }
    // f lives in P_N with N >= n; self-approximation (deg f < n) is allowed.
    let big_n = (f.degree() as u32).max(n);
    let need = level_threshold(big_n, domain);
    if t < need && !force {
        return Err(CoreError::LevelTooSmall { got: t, need });
    }
    // Even when forced, the moment scalars must cover the objective support
    // and every localizing order must be nonnegative.
    if 2 * t < big_n || t < domain.max_half_degree() {
        return Err(CoreError::LevelTooSmall {
            got: t,
            need: big_n.div_ceil(2).max(domain.max_half_degree()),
        });
    }
    let side = crate::poly::binomial(t as usize + domain.dimension(), domain.dimension());
    if side > MAX_BLOCK_SIDE {
        return Err(CoreError::BlockTooLarge {
            side,
            max: MAX_BLOCK_SIDE,
        });
    }
    Ok(big_n)
}

/// The assembled moment program together with the index maps needed to read
/// pseudo-moments back out of a solution.
#[derive(Debug)]
pub struct MomentRelaxation {
    pub problem: SdpProblem,
    pub t: u32,
    dimension: usize,
    basis2t: MonomialBasis,
}

impl MomentRelaxation {
    /// Pull `y⁺`, `y⁻` out of the solver's free scalars.
    pub fn moment_vector(&self, sol: &SdpSolution) -> MomentVector {
        let b = self.basis2t.len();
        let mut plus = BTreeMap::new();
        let mut minus = BTreeMap::new();
        for (i, k) in self.basis2t.items().iter().enumerate() {
            plus.insert(k.clone(), sol.scalar_values[i]);
            minus.insert(k.clone(), sol.scalar_values[b + i]);
        }
        MomentVector {
            dimension: self.dimension,
            order: 2 * self.t,
            plus,
            minus,
        }
    }
}

/// Build the level-`t` moment relaxation: maximize
/// `Σ coeff_ℓ(f)(y⁺_ℓ − y⁻_ℓ)` subject to `y⁺_ℓ = y⁻_ℓ` for `|ℓ| ≤ n−1`,
/// `y⁺_0 + y⁻_0 = 1`, and PSD Hankel/localizing blocks for both signs.
pub fn assemble_moment_relaxation(
    f: &SparsePolynomial,
    n: u32,
    domain: &SemialgebraicDomain,
    t: u32,
    force: bool,
) -> Result<MomentRelaxation> {
    check_level(f, n, domain, t, force)?;
    let d = domain.dimension();
    let basis2t = MonomialBasis::up_to(d, 2 * t);
    let nb = basis2t.len();
    let basis_t = MonomialBasis::up_to(d, t);

    let mut block_sizes = vec![basis_t.len(), basis_t.len()];
    let mut loc_bases: Vec<MonomialBasis> = Vec::new();
    for h in 0..domain.num_generators() {
        let s = t - domain.half_degrees()[h];
        let basis = MonomialBasis::up_to(d, s);
        block_sizes.push(basis.len());
        block_sizes.push(basis.len());
        loc_bases.push(basis);
    }

    let mut problem = SdpProblem::new(block_sizes, 2 * nb, Direction::Maximize);

    // Objective: Σ coeff_ℓ(f) (y⁺_ℓ − y⁻_ℓ).
    let mut obj = LinearFunctional::new();
    for (k, c) in f.terms() {
        let idx = basis2t
            .position(k)
            .expect("objective support is inside the moment basis");
        obj.push_scalar(idx, c);
        obj.push_scalar(nb + idx, -c);
    }
    problem.objective = obj;

    // Ties for the two moment blocks.
    for sign in 0..2usize {
        let block = sign;
        let off = sign * nb;
        for r in 0..basis_t.len() {
            for c in r..basis_t.len() {
                let key = basis_t.get(r).add(basis_t.get(c));
                let idx = basis2t.position(&key).expect("within 2t");
                let mult = if r == c { 1.0 } else { 0.5 };
                let func = LinearFunctional::new()
                    .matrix(block, r, c, mult)
                    .scalar(off + idx, -1.0);
                problem.add_equality(func, 0.0);
            }
        }
    }
    // Ties for the localizing blocks.
    for (h, g) in domain.generators().iter().enumerate() {
        let basis = &loc_bases[h];
        for sign in 0..2usize {
            let block = 2 + 2 * h + sign;
            let off = sign * nb;
            for r in 0..basis.len() {
                for c in r..basis.len() {
                    let base = basis.get(r).add(basis.get(c));
                    let mult = if r == c { 1.0 } else { 0.5 };
                    let mut func = LinearFunctional::new().matrix(block, r, c, mult);
                    for (lp, gc) in g.terms() {
                        let key = base.add(lp);
                        let idx = basis2t.position(&key).expect("within 2t");
                        func.push_scalar(off + idx, -gc);
                    }
                    problem.add_equality(func, 0.0);
                }
            }
        }
    }
    // Low-degree matching and mass normalization.
    for (idx, k) in basis2t.items().iter().enumerate() {
        if k.degree() < n {
            let func = LinearFunctional::new()
                .scalar(idx, 1.0)
                .scalar(nb + idx, -1.0);
            problem.add_equality(func, 0.0);
        }
    }
    let zero_idx = basis2t.position(&MultiIndex::zeros(d)).unwrap();
    problem.add_equality(
        LinearFunctional::new()
            .scalar(zero_idx, 1.0)
            .scalar(nb + zero_idx, 1.0),
        1.0,
    );

    Ok(MomentRelaxation {
        problem,
        t,
        dimension: d,
        basis2t,
    })
}

/// The assembled SOS program together with the basis of the approximant.
#[derive(Debug)]
pub struct SosRelaxation {
    pub problem: SdpProblem,
    pub t: u32,
    dimension: usize,
    p_basis: MonomialBasis,
}

impl SosRelaxation {
    /// Read the best-approximant coefficients out of a solution.
    pub fn approximant(&self, sol: &SdpSolution) -> SparsePolynomial {
        SparsePolynomial::from_terms(
            self.dimension,
            self.p_basis
                .items()
                .iter()
                .enumerate()
                .map(|(i, k)| (k.clone(), sol.scalar_values[1 + i])),
        )
    }
}

/// Build the level-`t` SOS program: minimize `c` over `c ∈ R`,
/// `p ∈ P^d_{n−1}` with `c + f − p` and `c − f + p` both lying in the
/// truncated quadratic module of degree 2t.
pub fn assemble_sos_relaxation(
    f: &SparsePolynomial,
    n: u32,
    domain: &SemialgebraicDomain,
    t: u32,
    force: bool,
) -> Result<SosRelaxation> {
    let big_n = check_level(f, n, domain, t, force)?;
    let d = domain.dimension();
    let basis_t = MonomialBasis::up_to(d, t);
    let p_basis = MonomialBasis::up_to(d, n - 1);
    let n_gram = 1 + domain.num_generators();

    let mut loc_bases: Vec<MonomialBasis> = Vec::new();
    for h in 0..domain.num_generators() {
        let s = t - domain.half_degrees()[h];
        loc_bases.push(MonomialBasis::up_to(d, s));
    }
    let mut block_sizes = Vec::with_capacity(2 * n_gram);
    for _sign in 0..2 {
        block_sizes.push(basis_t.len());
        for lb in &loc_bases {
            block_sizes.push(lb.len());
        }
    }
    let mut problem = SdpProblem::new(block_sizes, 1 + p_basis.len(), Direction::Minimize);
    problem.objective = LinearFunctional::new().scalar(0, 1.0);

    // Coefficient pickup maps: monomial ℓ → (block-local r, c, value) list.
    let mut gram0_pairs: HashMap<MultiIndex, Vec<(usize, usize, f64)>> = HashMap::new();
    for r in 0..basis_t.len() {
        for c in r..basis_t.len() {
            gram0_pairs
                .entry(basis_t.get(r).add(basis_t.get(c)))
                .or_default()
                .push((r, c, 1.0));
        }
    }
    let mut loc_pairs: Vec<HashMap<MultiIndex, Vec<(usize, usize, f64)>>> = Vec::new();
    for (h, g) in domain.generators().iter().enumerate() {
        let mut map: HashMap<MultiIndex, Vec<(usize, usize, f64)>> = HashMap::new();
        let basis = &loc_bases[h];
        for r in 0..basis.len() {
            for c in r..basis.len() {
                let base = basis.get(r).add(basis.get(c));
                for (lp, gc) in g.terms() {
                    map.entry(base.add(lp)).or_default().push((r, c, gc));
                }
            }
        }
        loc_pairs.push(map);
    }

    // One equality per monomial of degree ≤ max(2t, N) per sign; monomials
    // beyond 2t have no quadratic-module support and become structural
    // infeasibility rows when f reaches them (forced small levels).
    let match_basis = monomials_up_to(d, (2 * t).max(big_n));
    for sign in 0..2usize {
        let sgn = if sign == 0 { 1.0 } else { -1.0 };
        let block_off = sign * n_gram;
        for ell in &match_basis {
            let mut func = LinearFunctional::new();
            if let Some(pairs) = gram0_pairs.get(ell) {
                for &(r, c, v) in pairs {
                    func.push_matrix(block_off, r, c, v);
                }
            }
            for (h, map) in loc_pairs.iter().enumerate() {
                if let Some(pairs) = map.get(ell) {
                    for &(r, c, v) in pairs {
                        func.push_matrix(block_off + 1 + h, r, c, v);
                    }
                }
            }
            if ell.degree() == 0 {
                func.push_scalar(0, -1.0);
            }
            if let Some(pi) = p_basis.position(ell) {
                func.push_scalar(1 + pi, sgn);
            }
            problem.add_equality(func, sgn * f.coeff(ell));
        }
    }

    Ok(SosRelaxation {
        problem,
        t,
        dimension: d,
        p_basis,
    })
}

/// Outcome of solving both programs at one level.
#[derive(Debug)]
pub struct LevelOutcome {
    pub t: u32,
    /// SOS value `ub_t` (None when that solve was unusable).
    pub ub: Option<f64>,
    /// Moment value `ub'_t`.
    pub ub_prime: Option<f64>,
    pub sos_status: SolveStatus,
    pub moment_status: SolveStatus,
    pub moment_vector: MomentVector,
    pub sos_solution: SdpSolution,
    pub sos_relaxation: SosRelaxation,
}

/// Solve both programs of level `t`.  When both report optimal the two
/// values agree within the duality tolerance; violations are logged.
pub fn run_level(
    f: &SparsePolynomial,
    n: u32,
    domain: &SemialgebraicDomain,
    t: u32,
    opts: &SolveOptions,
    force: bool,
) -> Result<LevelOutcome> {
    let mr = assemble_moment_relaxation(f, n, domain, t, force)?;
    let msol = solve(&mr.problem, opts)?;
    let sr = assemble_sos_relaxation(f, n, domain, t, force)?;
    let ssol = solve(&sr.problem, opts)?;

    // A fully converged solve reports its objective; a near-optimal one
    // reports the upper end of its primal/dual bracket, so the level values
    // keep their upper-bound meaning within solver tolerance.
    let upper_estimate = |sol: &SdpSolution| -> Option<f64> {
        match sol.status {
            SolveStatus::Optimal => Some(sol.objective),
            SolveStatus::NearOptimal => {
                if sol.dual_objective.is_finite() {
                    Some(sol.objective.max(sol.dual_objective))
                } else {
                    Some(sol.objective)
                }
            }
            _ => None,
        }
    };
    let ub_prime = upper_estimate(&msol);
    let ub = upper_estimate(&ssol);
    if msol.status == SolveStatus::Optimal && ssol.status == SolveStatus::Optimal {
        let gap = (msol.objective - ssol.objective).abs();
        if gap > 1e-6 {
            warn!(
                "level {t}: strong-duality gap {gap:.3e} between ub={} and ub'={}",
                ssol.objective, msol.objective
            );
        }
    }
    let moment_vector = mr.moment_vector(&msol);
    Ok(LevelOutcome {
        t,
        ub,
        ub_prime,
        sos_status: ssol.status,
        moment_status: msol.status,
        moment_vector,
        sos_solution: ssol,
        sos_relaxation: sr,
    })
}

/// Sweep controls for [`run_hierarchy`].
#[derive(Debug, Clone)]
pub struct HierarchyOptions {
    pub t_min: Option<u32>,
    pub t_max: Option<u32>,
    pub solve: SolveOptions,
    /// Accept levels below the theorem threshold.
    pub force_level: bool,
    /// Stop the sweep at the first certified level.
    pub stop_on_certified: bool,
    /// Relative singular-value threshold for rank decisions.
    pub rank_tol: f64,
    /// Seed for the random multiplication-matrix combination.
    pub extraction_seed: u64,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            t_min: None,
            t_max: None,
            solve: SolveOptions::default(),
            force_level: false,
            stop_on_certified: true,
            rank_tol: 1e-4,
            extraction_seed: 0,
        }
    }
}

/// One row of a hierarchy report.
#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub t: u32,
    pub ub_t: Option<f64>,
    pub ub_prime_t: Option<f64>,
    pub sos_status: SolveStatus,
    pub moment_status: SolveStatus,
    pub certified: bool,
    /// Largest Hankel order at which both pseudo-moment sequences are flat.
    pub flat_order: Option<u32>,
    /// Ranks (low order, high order) of the `y⁺` Hankel matrices at the
    /// certified order (at `t` when uncertified).
    pub ranks_plus: (usize, usize),
    /// Same for `y⁻`.
    pub ranks_minus: (usize, usize),
}

/// Result of a level sweep: per-level records, the final estimate, and the
/// certificate (pseudo-moments and extracted atoms) when one exists.
#[derive(Debug)]
pub struct HierarchyReport {
    pub levels: Vec<LevelRecord>,
    pub e_estimate: f64,
    pub certified: bool,
    pub certified_level: Option<u32>,
    pub certificate: Option<MomentVector>,
    pub atoms_plus: Option<AtomicMeasure>,
    pub atoms_minus: Option<AtomicMeasure>,
    pub best_approximant: Option<SparsePolynomial>,
}

/// Run levels `t_min..=t_max` ascending, certifying each via the Hankel rank
/// drop of both pseudo-moment sequences; stops early when certified.  Levels
/// whose blocks exceed [`MAX_BLOCK_SIDE`] end the sweep.
pub fn run_hierarchy(
    f: &SparsePolynomial,
    n: u32,
    domain: &SemialgebraicDomain,
    opts: &HierarchyOptions,
) -> Result<HierarchyReport> {
    let big_n = (f.degree().max(0) as u32).max(n);
    let threshold = level_threshold(big_n, domain);
    let t_min = opts.t_min.unwrap_or(threshold);
    let t_max = opts.t_max.unwrap_or(t_min + 3).max(t_min);
    if t_min < threshold && !opts.force_level {
        return Err(CoreError::LevelTooSmall {
            got: t_min,
            need: threshold,
        });
    }

    let n_half = domain.max_half_degree();
    let mut levels = Vec::new();
    let mut e_estimate = f64::NAN;
    let mut certified = false;
    let mut certified_level = None;
    let mut certificate = None;
    let mut atoms_plus = None;
    let mut atoms_minus = None;
    let mut best_approximant = None;

    for t in t_min..=t_max {
        let side = crate::poly::binomial(t as usize + domain.dimension(), domain.dimension());
        if side > MAX_BLOCK_SIDE {
            warn!("level {t} needs {side}x{side} blocks, past the {MAX_BLOCK_SIDE} cap; stopping");
            break;
        }
        let outcome = run_level(f, n, domain, t, &opts.solve, opts.force_level)?;
        let mv = &outcome.moment_vector;
        // The top-degree moments only enter the outermost Hankel corner and
        // converge last; scan downward and certify at the largest flat order.
        let mut flat_order = None;
        let mut flat_p = flatness_check(&mv.plus, t, domain.dimension(), n_half, opts.rank_tol)?;
        let mut flat_m = flatness_check(&mv.minus, t, domain.dimension(), n_half, opts.rank_tol)?;
        if outcome.moment_status.is_usable() {
            for s in (n_half + 1..=t).rev() {
                let fp = flatness_check(&mv.plus, s, domain.dimension(), n_half, opts.rank_tol)?;
                let fm = flatness_check(&mv.minus, s, domain.dimension(), n_half, opts.rank_tol)?;
                if fp.certified && fm.certified {
                    flat_order = Some(s);
                    flat_p = fp;
                    flat_m = fm;
                    break;
                }
            }
        }
        let level_certified = flat_order.is_some();

        levels.push(LevelRecord {
            t,
            ub_t: outcome.ub,
            ub_prime_t: outcome.ub_prime,
            sos_status: outcome.sos_status,
            moment_status: outcome.moment_status,
            certified: level_certified,
            flat_order,
            ranks_plus: (flat_p.rank_low, flat_p.rank_high),
            ranks_minus: (flat_m.rank_low, flat_m.rank_high),
        });
        if let Some(v) = outcome.ub_prime {
            e_estimate = v;
        } else if let Some(v) = outcome.ub {
            e_estimate = v;
        }
        if outcome.sos_status.is_usable() {
            best_approximant = Some(outcome.sos_relaxation.approximant(&outcome.sos_solution));
        }

        if let Some(s) = flat_order {
            certified = true;
            certified_level = Some(t);
            // Atom extraction is best-effort at the flat order: the
            // certificate is the rank pattern; a failed extraction leaves
            // the value certified.
            atoms_plus = extract_atoms(
                &mv.plus,
                s,
                domain.dimension(),
                opts.rank_tol,
                opts.extraction_seed,
            )
            .ok();
            atoms_minus = extract_atoms(
                &mv.minus,
                s,
                domain.dimension(),
                opts.rank_tol,
                opts.extraction_seed,
            )
            .ok();
            certificate = Some(outcome.moment_vector);
            if opts.stop_on_certified {
                break;
            }
        }
    }
    if levels.is_empty() {
        return Err(CoreError::Solver(
            "no admissible level below the block-size cap".into(),
        ));
    }
    Ok(HierarchyReport {
        levels,
        e_estimate,
        certified,
        certified_level,
        certificate,
        atoms_plus,
        atoms_minus,
        best_approximant,
    })
}

/// Read the optimal lower-degree approximant out of an SOS solution.
pub fn recover_best_approximant(
    sol: &SdpSolution,
    relaxation: &SosRelaxation,
) -> Result<SparsePolynomial> {
    if !sol.status.is_usable() {
        return Err(CoreError::Solver(format!(
            "SOS solve ended with status {}",
            sol.status.as_str()
        )));
    }
    Ok(relaxation.approximant(sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{make_ball, make_hypercube, make_simplex};

    fn dirac_moments(point: &[f64], order: u32) -> BTreeMap<MultiIndex, f64> {
        let d = point.len();
        monomials_up_to(d, order)
            .into_iter()
            .map(|k| {
                let v = k
                    .exponents()
                    .iter()
                    .zip(point)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product();
                (k, v)
            })
            .collect()
    }

    #[test]
    fn moment_matrix_shapes_and_values() {
        // d=1, t=1, y = (1, a, b) → [[1, a], [a, b]].
        let mut y = BTreeMap::new();
        y.insert(MultiIndex::new(vec![0]), 1.0);
        y.insert(MultiIndex::new(vec![1]), 0.25);
        y.insert(MultiIndex::new(vec![2]), 0.8);
        let m = moment_matrix(&y, 1, 1).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, 0.8]));

        // Dirac moments give a rank-one outer product v vᵀ.
        let pt = [0.3, -0.6];
        let y = dirac_moments(&pt, 4);
        let m = moment_matrix(&y, 2, 2).unwrap();
        let basis = monomials_up_to(2, 2);
        let v = nalgebra::DVector::from_iterator(
            basis.len(),
            basis.iter().map(|k| {
                k.exponents()
                    .iter()
                    .zip(&pt)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product::<f64>()
            }),
        );
        let outer = &v * v.transpose();
        assert!((&m - &outer).norm() < 1e-12);

        let big = moment_matrix(&dirac_moments(&[0.1, 0.2, 0.3], 14), 7, 3).unwrap();
        assert_eq!(big.nrows(), 120);

        // Missing entries are an error.
        let mut y = BTreeMap::new();
        y.insert(MultiIndex::new(vec![0]), 1.0);
        assert!(moment_matrix(&y, 1, 1).is_err());
    }

    #[test]
    fn localizing_matrix_examples() {
        // Constant generator: localizing equals the moment matrix.
        let y = dirac_moments(&[0.5], 4);
        let one = SparsePolynomial::constant(1, 1.0);
        let loc = localizing_matrix(&y, &one, 1).unwrap();
        assert_eq!(loc, moment_matrix(&y, 1, 1).unwrap());

        // g = 1 − x², Dirac at 0.5: 0.75 · v vᵀ, PSD.
        let g = SparsePolynomial::from_terms(
            1,
            [
                (MultiIndex::new(vec![0]), 1.0),
                (MultiIndex::new(vec![2]), -1.0),
            ],
        );
        let loc = localizing_matrix(&y, &g, 1).unwrap();
        let v = nalgebra::DVector::from_column_slice(&[1.0, 0.5]);
        let expect = (&v * v.transpose()) * 0.75;
        assert!((&loc - &expect).norm() < 1e-12);

        // Dirac outside the domain: a negative eigenvalue appears.
        let y2 = dirac_moments(&[2.0], 4);
        let loc2 = localizing_matrix(&y2, &g, 1).unwrap();
        let lmin = loc2
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(lmin < -1e-6);
    }

    #[test]
    fn level_threshold_enforced() {
        let f = SparsePolynomial::monomial(MultiIndex::new(vec![1, 1, 1]), 1.0);
        let dom = make_ball(3);
        assert!(matches!(
            assemble_moment_relaxation(&f, 3, &dom, 3, false),
            Err(CoreError::LevelTooSmall { got: 3, need: 4 })
        ));
        assert!(assemble_moment_relaxation(&f, 3, &dom, 4, false).is_ok());
        // Forcing accepts smaller t as long as 2t covers deg f.
        assert!(assemble_moment_relaxation(&f, 3, &dom, 2, true).is_ok());
        assert!(assemble_moment_relaxation(&f, 3, &dom, 1, true).is_err());
    }

    #[test]
    fn block_structure_matches_generator_count() {
        let f = SparsePolynomial::monomial(MultiIndex::new(vec![1, 1, 1]), 1.0);
        let ball = assemble_moment_relaxation(&f, 3, &make_ball(3), 4, false).unwrap();
        assert_eq!(ball.problem.num_blocks(), 4);
        let simplex = assemble_moment_relaxation(&f, 3, &make_simplex(3), 4, false).unwrap();
        assert_eq!(simplex.problem.num_blocks(), 10);
    }

    #[test]
    fn univariate_square_best_constant() {
        // Best approximation of x² from P_1 on [−1,1] is the constant 1/2
        // with error 1/2 (half the rescaled T_2).
        let f = SparsePolynomial::monomial(MultiIndex::new(vec![2]), 1.0);
        let dom = make_hypercube(1);
        let out = run_level(&f, 2, &dom, 3, &SolveOptions::default(), false).unwrap();
        assert!(out.sos_status.is_usable() && out.moment_status.is_usable());
        assert!((out.ub.unwrap() - 0.5).abs() < 1e-6, "ub = {:?}", out.ub);
        assert!((out.ub_prime.unwrap() - 0.5).abs() < 1e-6);
        let p = out.sos_relaxation.approximant(&out.sos_solution);
        assert!((p.coeff(&MultiIndex::new(vec![0])) - 0.5).abs() < 1e-5);
        assert!(p.coeff(&MultiIndex::new(vec![1])).abs() < 1e-5);
        // Feasibility invariants of the pseudo-moments.
        assert!((out.moment_vector.total_mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn product_monomial_on_square() {
        // E((1,1), H) = 2^{-2+2} = 1: x1x2 has no useful degree-1 approximant.
        let f = SparsePolynomial::monomial(MultiIndex::new(vec![1, 1]), 1.0);
        let dom = make_hypercube(2);
        let out = run_level(&f, 2, &dom, 3, &SolveOptions::default(), false).unwrap();
        assert!(
            (out.ub_prime.unwrap() - 1.0).abs() < 1e-6,
            "{:?}",
            out.ub_prime
        );
        assert!((out.ub.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ball_product_monomial() {
        // E((1,1,1), B) = 3^{-3/2}.
        let f = SparsePolynomial::monomial(MultiIndex::new(vec![1, 1, 1]), 1.0);
        let dom = make_ball(3);
        let out = run_level(&f, 3, &dom, 4, &SolveOptions::default(), false).unwrap();
        let expect = 3f64.powf(-1.5);
        assert!(
            (out.ub_prime.unwrap() - expect).abs() < 1e-6,
            "ub' = {:?} vs {}",
            out.ub_prime,
            expect
        );
        assert!((out.ub.unwrap() - out.ub_prime.unwrap()).abs() < 1e-6);
        assert!((out.moment_vector.total_mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn simplex_product_monomial() {
        // E((1,1,1), S) = 1/72.
        let f = SparsePolynomial::monomial(MultiIndex::new(vec![1, 1, 1]), 1.0);
        let dom = make_simplex(3);
        let out = run_level(&f, 3, &dom, 4, &SolveOptions::default(), false).unwrap();
        assert!(
            (out.ub_prime.unwrap() - 1.0 / 72.0).abs() < 1e-6,
            "ub' = {:?}",
            out.ub_prime
        );
    }

    #[test]
    fn self_approximation_recovers_f() {
        // deg f = n − 1: the best approximant is f itself with error 0.
        let f = SparsePolynomial::from_terms(
            2,
            [
                (MultiIndex::new(vec![1, 1]), 1.0),
                (MultiIndex::new(vec![0, 1]), 0.5),
            ],
        );
        let dom = make_ball(2);
        let out = run_level(&f, 3, &dom, 4, &SolveOptions::default(), false).unwrap();
        assert!(out.ub.unwrap().abs() < 1e-7);
        let p = out.sos_relaxation.approximant(&out.sos_solution);
        let diff = p.sub(&f);
        assert!(
            diff.coeff_norm() < 1e-5,
            "recovered approximant differs: {diff}"
        );
    }

    #[test]
    fn hierarchy_report_certifies_ball_111() {
        let f = SparsePolynomial::monomial(MultiIndex::new(vec![1, 1, 1]), 1.0);
        let dom = make_ball(3);
        let rep = run_hierarchy(&f, 3, &dom, &HierarchyOptions::default()).unwrap();
        assert!(rep.certified, "levels: {:?}", rep.levels);
        assert_eq!(rep.certified_level, Some(4));
        assert!((rep.e_estimate - 3f64.powf(-1.5)).abs() < 1e-6);
        assert!(rep.atoms_plus.is_some() && rep.atoms_minus.is_some());
        // Nonincreasing ub' across recorded levels.
        let mut prev = f64::INFINITY;
        for lvl in &rep.levels {
            if let Some(v) = lvl.ub_prime_t {
                assert!(v <= prev + 1e-7);
                prev = v;
            }
        }
    }
}
