//! Interior-point solver for the block SDP model.
//!
//! Internally every problem is reduced to the canonical conic pair
//!
//! ```text
//! (P)  min  Σ_b <C_b, X_b> + c_f·w   s.t.  Σ_b <A_{i,b}, X_b> + (F w)_i = rhs_i,  X_b ⪰ 0
//! (D)  max  rhs·y                    s.t.  S_b = C_b − Σ_i y_i A_{i,b} ⪰ 0,  Fᵀ y = c_f
//! ```
//!
//! solved with an infeasible-start Mehrotra predictor-corrector method using
//! the HKM direction.  The Schur complement has one row per pair constraint,
//! so orientation matters: a problem whose block entries are each tied to
//! the free scalars by a dedicated equality (moment relaxations) is
//! eliminated into an LMI over the scalars and enters as the *dual* side;
//! everything else enters as the *primal* side.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use std::collections::HashMap;

use super::{
    Direction, SdpProblem, SdpSolution, SolveMetrics, SolveOptions, SolveStatus,
};
use crate::error::{CoreError, Result};

/// One constraint's footprint on one block: ordered (row, col, value) pairs,
/// i.e. the symmetric matrix Σ v·E_{rc} expanded entry by entry.
#[derive(Debug, Clone)]
struct ConTouch {
    con: usize,
    ents: Vec<(u32, u32, f64)>,
}

/// Canonical pair data.
#[derive(Debug, Clone)]
struct PairData {
    ns: Vec<usize>,
    c_mats: Vec<DMatrix<f64>>,
    block_cons: Vec<Vec<ConTouch>>,
    f: DMatrix<f64>,
    rhs: DVector<f64>,
    c_free: DVector<f64>,
    m: usize,
    p: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairStatus {
    Optimal,
    NearOptimal,
    PrimalInfeasible,
    PrimalUnbounded,
    Stalled,
}

struct IpmResult {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    w: DVector<f64>,
    pobj: f64,
    dobj: f64,
    err_p: f64,
    err_d: f64,
    err_f: f64,
    gap_rel: f64,
    iterations: usize,
    status: PairStatus,
}

/// Entry point: pick an orientation and solve.
pub(super) fn solve_auto(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    if problem.num_blocks() == 0 {
        return solve_scalar_lp(problem);
    }
    if let Some(lmi) = try_eliminate(problem) {
        solve_dual_oriented(problem, lmi, opts)
    } else {
        solve_primal_oriented(problem, opts)
    }
}

// ---------------------------------------------------------------------------
// Tie elimination into LMI form
// ---------------------------------------------------------------------------

/// Affine expression `base + Σ coefs·z` for one eliminated block entry.
#[derive(Debug, Clone)]
struct AffineEntry {
    base: f64,
    coefs: Vec<(usize, f64)>,
}

/// LMI form over the problem's scalars: blocks `D_b + Σ_k z_k B_{b,k} ⪰ 0`,
/// remaining equalities `E z = e`, affine objective.
struct LmiForm {
    /// Per block: (row, col) → affine entry, for every r ≤ c.
    entries: Vec<HashMap<(usize, usize), AffineEntry>>,
    rem_eqs: Vec<(Vec<(usize, f64)>, f64)>,
    obj: Vec<f64>,
    obj_const: f64,
}

/// Merge duplicate matrix/scalar terms of a functional.
fn normalize(
    f: &super::LinearFunctional,
) -> (Vec<((usize, usize, usize), f64)>, Vec<(usize, f64)>) {
    let mut mats: HashMap<(usize, usize, usize), f64> = HashMap::new();
    for e in &f.matrix_terms {
        *mats.entry((e.block, e.row, e.col)).or_insert(0.0) += e.value;
    }
    let mut mat_list: Vec<_> = mats.into_iter().collect();
    mat_list.sort_by_key(|&(k, _)| k);
    let mut scals: HashMap<usize, f64> = HashMap::new();
    for &(k, v) in &f.scalar_terms {
        *scals.entry(k).or_insert(0.0) += v;
    }
    let mut scal_list: Vec<_> = scals.into_iter().collect();
    scal_list.sort_by_key(|&(k, _)| k);
    (mat_list, scal_list)
}

/// A matrix term value `v` at (r,c) multiplies `X[r,c]+X[c,r]`; as a factor
/// on the entry itself that is `v` on the diagonal and `2v` off it.
fn entry_multiplier(r: usize, c: usize, v: f64) -> f64 {
    if r == c {
        v
    } else {
        2.0 * v
    }
}

/// Detect the tied structure: every block entry pinned by a dedicated
/// single-entry equality.  Returns the eliminated LMI form, or None when the
/// problem is not of that shape.
fn try_eliminate(problem: &SdpProblem) -> Option<LmiForm> {
    if problem.num_scalars() == 0 {
        return None;
    }
    let nblocks = problem.num_blocks();
    let mut ties: Vec<HashMap<(usize, usize), AffineEntry>> = vec![HashMap::new(); nblocks];
    let mut consumed = vec![false; problem.equalities.len()];

    for (idx, (f, rhs)) in problem.equalities.iter().enumerate() {
        let (mats, scals) = normalize(f);
        if mats.len() != 1 {
            continue;
        }
        let ((b, r, c), v) = mats[0];
        let mult = entry_multiplier(r, c, v);
        if mult.abs() < 1e-12 || ties[b].contains_key(&(r, c)) {
            continue;
        }
        let base = rhs / mult;
        let coefs = scals
            .iter()
            .map(|&(k, sv)| (k, -sv / mult))
            .collect::<Vec<_>>();
        ties[b].insert((r, c), AffineEntry { base, coefs });
        consumed[idx] = true;
    }

    // Every upper-triangular entry of every block must be tied.
    for (b, &n) in problem.block_sizes().iter().enumerate() {
        if ties[b].len() != n * (n + 1) / 2 {
            return None;
        }
    }

    // Substitute ties into the remaining equalities and the objective.
    let substitute = |f: &super::LinearFunctional| -> (Vec<f64>, f64) {
        let mut row = vec![0.0; problem.num_scalars()];
        let mut cst = 0.0;
        let (mats, scals) = normalize(f);
        for &(k, v) in &scals {
            row[k] += v;
        }
        for ((b, r, c), v) in mats {
            let mult = entry_multiplier(r, c, v);
            let aff = &ties[b][&(r, c)];
            cst += mult * aff.base;
            for &(k, coef) in &aff.coefs {
                row[k] += mult * coef;
            }
        }
        (row, cst)
    };

    let mut rem_eqs = Vec::new();
    for (idx, (f, rhs)) in problem.equalities.iter().enumerate() {
        if consumed[idx] {
            continue;
        }
        let (row, cst) = substitute(f);
        let sparse: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, &v)| (k, v))
            .collect();
        rem_eqs.push((sparse, rhs - cst));
    }

    let (obj, ocst) = substitute(&problem.objective);
    Some(LmiForm {
        entries: ties,
        rem_eqs,
        obj,
        obj_const: problem.objective_constant + ocst,
    })
}

// ---------------------------------------------------------------------------
// Orientation adapters
// ---------------------------------------------------------------------------

fn solve_primal_oriented(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    let sense = match problem.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let nblocks = problem.num_blocks();
    let p = problem.num_scalars();

    // Structural infeasibility: an equality over no variables with rhs != 0.
    let mut keep: Vec<usize> = Vec::new();
    for (idx, (f, rhs)) in problem.equalities.iter().enumerate() {
        let (mats, scals) = normalize(f);
        if mats.is_empty() && scals.is_empty() {
            if rhs.abs() > 1e-12 {
                return Ok(empty_solution(problem, SolveStatus::Infeasible));
            }
        } else {
            keep.push(idx);
        }
    }
    let m = keep.len();

    let mut c_mats: Vec<DMatrix<f64>> = problem
        .block_sizes()
        .iter()
        .map(|&n| DMatrix::zeros(n, n))
        .collect();
    {
        let (mats, _) = normalize(&problem.objective);
        for ((b, r, c), v) in mats {
            c_mats[b][(r, c)] += sense * v;
            if r != c {
                c_mats[b][(c, r)] += sense * v;
            }
        }
    }
    let mut c_free = DVector::zeros(p);
    for &(k, v) in &normalize(&problem.objective).1 {
        c_free[k] += sense * v;
    }

    let mut block_cons: Vec<Vec<ConTouch>> = vec![Vec::new(); nblocks];
    let mut f_mat = DMatrix::zeros(m, p);
    let mut rhs = DVector::zeros(m);
    for (i, &idx) in keep.iter().enumerate() {
        let (f, r) = &problem.equalities[idx];
        rhs[i] = *r;
        let (mats, scals) = normalize(f);
        for &(k, v) in &scals {
            f_mat[(i, k)] += v;
        }
        let mut per_block: HashMap<usize, Vec<(u32, u32, f64)>> = HashMap::new();
        for ((b, rr, cc), v) in mats {
            let list = per_block.entry(b).or_default();
            list.push((rr as u32, cc as u32, v));
            if rr != cc {
                list.push((cc as u32, rr as u32, v));
            }
        }
        let mut blocks: Vec<_> = per_block.into_iter().collect();
        blocks.sort_by_key(|&(b, _)| b);
        for (b, ents) in blocks {
            block_cons[b].push(ConTouch { con: i, ents });
        }
    }

    let data = PairData {
        ns: problem.block_sizes().to_vec(),
        c_mats,
        block_cons,
        f: f_mat,
        rhs,
        c_free,
        m,
        p,
    };
    let r = ipm(&data, opts);
    let objective = sense * r.pobj + problem.objective_constant;
    let dual_objective = sense * r.dobj + problem.objective_constant;
    let status = match r.status {
        PairStatus::Optimal => SolveStatus::Optimal,
        PairStatus::NearOptimal => SolveStatus::NearOptimal,
        PairStatus::PrimalInfeasible => SolveStatus::Infeasible,
        PairStatus::PrimalUnbounded => SolveStatus::Unbounded,
        PairStatus::Stalled => SolveStatus::Stalled,
    };
    Ok(SdpSolution {
        block_values: r.x,
        scalar_values: r.w.iter().copied().collect(),
        objective,
        dual_objective,
        status,
        metrics: SolveMetrics {
            primal_residual: r.err_p.max(r.err_f),
            dual_residual: r.err_d,
            gap: r.gap_rel,
            iterations: r.iterations,
        },
    })
}

fn solve_dual_oriented(
    problem: &SdpProblem,
    lmi: LmiForm,
    opts: &SolveOptions,
) -> Result<SdpSolution> {
    let nz = problem.num_scalars();
    let sense = match problem.direction {
        Direction::Maximize => 1.0,
        Direction::Minimize => -1.0,
    };

    // Structurally inconsistent remaining equality → the LMI (the original
    // problem) is infeasible.
    for (row, e) in &lmi.rem_eqs {
        if row.is_empty() && e.abs() > 1e-12 {
            return Ok(empty_solution(problem, SolveStatus::Infeasible));
        }
    }
    let rem: Vec<&(Vec<(usize, f64)>, f64)> =
        lmi.rem_eqs.iter().filter(|(row, _)| !row.is_empty()).collect();
    let q = rem.len();

    let nblocks = problem.num_blocks();
    let mut c_mats: Vec<DMatrix<f64>> = problem
        .block_sizes()
        .iter()
        .map(|&n| DMatrix::zeros(n, n))
        .collect();
    let mut per_scalar_block: Vec<HashMap<usize, Vec<(u32, u32, f64)>>> =
        vec![HashMap::new(); nz];
    for (b, ents) in lmi.entries.iter().enumerate() {
        let mut sorted: Vec<_> = ents.iter().collect();
        sorted.sort_by_key(|(&(r, c), _)| (r, c));
        for (&(r, c), aff) in sorted {
            c_mats[b][(r, c)] = aff.base;
            c_mats[b][(c, r)] = aff.base;
            for &(k, coef) in &aff.coefs {
                // S_b = C_b − Σ_k y_k A_{k,b} must equal D_b + Σ z_k B_{b,k},
                // so A_{k,b} = −B_{b,k}.
                let list = per_scalar_block[k].entry(b).or_default();
                list.push((r as u32, c as u32, -coef));
                if r != c {
                    list.push((c as u32, r as u32, -coef));
                }
            }
        }
    }
    let mut block_cons: Vec<Vec<ConTouch>> = vec![Vec::new(); nblocks];
    for (k, per_block) in per_scalar_block.into_iter().enumerate() {
        let mut blocks: Vec<_> = per_block.into_iter().collect();
        blocks.sort_by_key(|&(b, _)| b);
        for (b, ents) in blocks {
            block_cons[b].push(ConTouch { con: k, ents });
        }
    }

    let mut f_mat = DMatrix::zeros(nz, q);
    let mut c_free = DVector::zeros(q);
    for (j, (row, e)) in rem.iter().enumerate() {
        for &(k, v) in row {
            f_mat[(k, j)] += v;
        }
        c_free[j] = *e;
    }
    let rhs = DVector::from_iterator(nz, lmi.obj.iter().map(|&v| sense * v));

    let data = PairData {
        ns: problem.block_sizes().to_vec(),
        c_mats,
        block_cons,
        f: f_mat,
        rhs,
        c_free,
        m: nz,
        p: q,
    };
    let r = ipm(&data, opts);
    let objective = sense * r.dobj + lmi.obj_const;
    let dual_objective = sense * r.pobj + lmi.obj_const;
    let status = match r.status {
        PairStatus::Optimal => SolveStatus::Optimal,
        PairStatus::NearOptimal => SolveStatus::NearOptimal,
        // The original problem sits on the dual side of the pair.
        PairStatus::PrimalInfeasible => SolveStatus::Unbounded,
        PairStatus::PrimalUnbounded => SolveStatus::Infeasible,
        PairStatus::Stalled => SolveStatus::Stalled,
    };
    Ok(SdpSolution {
        block_values: r.s,
        scalar_values: r.y.iter().copied().collect(),
        objective,
        dual_objective,
        status,
        metrics: SolveMetrics {
            primal_residual: r.err_f,
            dual_residual: r.err_p.max(r.err_d),
            gap: r.gap_rel,
            iterations: r.iterations,
        },
    })
}

fn empty_solution(problem: &SdpProblem, status: SolveStatus) -> SdpSolution {
    SdpSolution {
        block_values: problem
            .block_sizes()
            .iter()
            .map(|&n| DMatrix::zeros(n, n))
            .collect(),
        scalar_values: vec![0.0; problem.num_scalars()],
        objective: f64::NAN,
        dual_objective: f64::NAN,
        status,
        metrics: SolveMetrics {
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            gap: f64::NAN,
            iterations: 0,
        },
    }
}

/// Pure scalar linear program (no PSD blocks): handled directly through a
/// least-squares feasibility check and a null-space objective test.
fn solve_scalar_lp(problem: &SdpProblem) -> Result<SdpSolution> {
    let sense = match problem.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let nz = problem.num_scalars();
    let mut c = DVector::zeros(nz);
    for &(k, v) in &normalize(&problem.objective).1 {
        c[k] += sense * v;
    }
    let rows: Vec<(Vec<(usize, f64)>, f64)> = problem
        .equalities
        .iter()
        .map(|(f, rhs)| (normalize(f).1, *rhs))
        .collect();
    for (row, rhs) in &rows {
        if row.is_empty() && rhs.abs() > 1e-12 {
            return Ok(empty_solution(problem, SolveStatus::Infeasible));
        }
    }
    let q = rows.len();
    let mut e_mat = DMatrix::zeros(q, nz);
    let mut e_vec = DVector::zeros(q);
    for (i, (row, rhs)) in rows.iter().enumerate() {
        for &(k, v) in row {
            e_mat[(i, k)] += v;
        }
        e_vec[i] = *rhs;
    }

    let (z, unbounded) = if q == 0 {
        (DVector::zeros(nz), c.norm() > 1e-12)
    } else {
        let svd = e_mat.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
        let tol = 1e-12 * smax.max(1.0);
        let z = svd
            .solve(&e_vec, tol)
            .map_err(|e| CoreError::Solver(e.to_string()))?;
        if (&e_mat * &z - &e_vec).norm() > 1e-9 * (1.0 + e_vec.norm()) {
            return Ok(empty_solution(problem, SolveStatus::Infeasible));
        }
        // Project the objective onto the row space; any remainder lives in
        // the feasible null space and makes the program unbounded.
        let vt = svd.v_t.as_ref().unwrap();
        let mut c_range = DVector::zeros(nz);
        for i in 0..svd.singular_values.len() {
            if svd.singular_values[i] > tol {
                let vi = vt.row(i).transpose();
                c_range += &vi * (vi.dot(&c));
            }
        }
        let c_null = &c - &c_range;
        (z, c_null.norm() > 1e-9 * (1.0 + c.norm()))
    };
    if unbounded {
        return Ok(empty_solution(problem, SolveStatus::Unbounded));
    }
    let objective = sense * c.dot(&z) + problem.objective_constant;
    Ok(SdpSolution {
        block_values: vec![],
        scalar_values: z.iter().copied().collect(),
        objective,
        dual_objective: objective,
        status: SolveStatus::Optimal,
        metrics: SolveMetrics {
            primal_residual: 0.0,
            dual_residual: 0.0,
            gap: 0.0,
            iterations: 0,
        },
    })
}

// ---------------------------------------------------------------------------
// The interior-point core
// ---------------------------------------------------------------------------

fn frob(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// <A_i, Z> for a symmetric Z.
fn apply_con(touch: &ConTouch, z: &DMatrix<f64>) -> f64 {
    let mut acc = 0.0;
    for &(a, b, v) in &touch.ents {
        acc += v * z[(b as usize, a as usize)];
    }
    acc
}

/// Z += w * A_i (as a dense symmetric matrix).
fn add_con(touch: &ConTouch, w: f64, z: &mut DMatrix<f64>) {
    for &(a, b, v) in &touch.ents {
        z[(a as usize, b as usize)] += w * v;
    }
}

fn robust_cholesky(mat: &DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(ch) = Cholesky::new(mat.clone()) {
        return Some(ch);
    }
    let n = mat.nrows();
    let scale = mat.diagonal().amax().max(1.0);
    let mut jitter = 1e-14 * scale;
    for _ in 0..12 {
        let mut m2 = mat.clone();
        for i in 0..n {
            m2[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(m2) {
            return Some(ch);
        }
        jitter *= 100.0;
    }
    None
}

/// Largest step α keeping `mat + α·delta ⪰ 0` for PD `mat`.
fn max_step(mat: &DMatrix<f64>, delta: &DMatrix<f64>) -> f64 {
    let chol = match robust_cholesky(mat) {
        Some(c) => c,
        None => return 0.0,
    };
    let l = chol.l();
    let y = match l.clone().solve_lower_triangular(delta) {
        Some(y) => y,
        None => return 0.0,
    };
    let k = match l.solve_lower_triangular(&y.transpose()) {
        Some(k) => k,
        None => return 0.0,
    };
    let k = (&k + k.transpose()) * 0.5;
    let lmin = k
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !lmin.is_finite() {
        0.0
    } else if lmin >= -1e-13 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

/// Schur complement M_ij = Σ_b tr(A_i X_b A_j S_b⁻¹), using the sparse entry
/// lists and symmetry of X and S⁻¹ (column access only).
fn form_schur(data: &PairData, xs: &[DMatrix<f64>], sinvs: &[DMatrix<f64>]) -> DMatrix<f64> {
    let m = data.m;
    let mut m_mat = DMatrix::zeros(m, m);
    for b in 0..data.ns.len() {
        let n = data.ns[b];
        let x = xs[b].as_slice();
        let si = sinvs[b].as_slice();
        let touch = &data.block_cons[b];
        let rows: Vec<(usize, Vec<(usize, f64)>)> = touch
            .par_iter()
            .enumerate()
            .map(|(ii, ti)| {
                // X[b1, g] = column b1 (X symmetric), S⁻¹[h, a1] = column a1.
                let cols: Vec<(&[f64], &[f64], f64)> = ti
                    .ents
                    .iter()
                    .map(|&(a1, b1, va)| {
                        (
                            &x[b1 as usize * n..b1 as usize * n + n],
                            &si[a1 as usize * n..a1 as usize * n + n],
                            va,
                        )
                    })
                    .collect();
                let mut acc = Vec::with_capacity(touch.len() - ii);
                for tj in &touch[ii..] {
                    let mut s = 0.0;
                    for &(xcol, sicol, va) in &cols {
                        let mut inner = 0.0;
                        for &(g, h, vg) in &tj.ents {
                            // Indices are validated against the block size
                            // when the problem is built.
                            unsafe {
                                inner += vg
                                    * xcol.get_unchecked(g as usize)
                                    * sicol.get_unchecked(h as usize);
                            }
                        }
                        s += va * inner;
                    }
                    acc.push((tj.con, s));
                }
                (ti.con, acc)
            })
            .collect();
        for (i, acc) in rows {
            for (j, s) in acc {
                m_mat[(i, j)] += s;
                if i != j {
                    m_mat[(j, i)] += s;
                }
            }
        }
    }
    m_mat
}

enum KktFactor {
    /// No constraints at all; directions are trivially zero.
    Empty,
    /// Block elimination through M: fast, fine for large well-behaved systems.
    Split {
        chol_m: Cholesky<f64, nalgebra::Dyn>,
        minv_f: DMatrix<f64>,
        chol_q: Option<Cholesky<f64, nalgebra::Dyn>>,
    },
    /// Pivoted LU of the full augmented matrix: slower but robust; used for
    /// small systems and as the fallback when the split factorization fails.
    /// Keeps the matrix itself for residual checks and the SVD fallback.
    Lu {
        lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
        aug: DMatrix<f64>,
    },
}

fn factor_kkt_lu(data: &PairData, m_mat: &DMatrix<f64>) -> Option<KktFactor> {
    let n = data.m + data.p;
    let mut aug = DMatrix::zeros(n, n);
    aug.view_mut((0, 0), (data.m, data.m)).copy_from(m_mat);
    if data.p > 0 {
        aug.view_mut((0, data.m), (data.m, data.p)).copy_from(&data.f);
        aug.view_mut((data.m, 0), (data.p, data.m))
            .copy_from(&data.f.transpose());
    }
    let lu = nalgebra::LU::new(aug.clone());
    Some(KktFactor::Lu { lu, aug })
}

fn factor_kkt(data: &PairData, m_mat: &DMatrix<f64>) -> Option<KktFactor> {
    if data.m + data.p == 0 {
        return Some(KktFactor::Empty);
    }
    if data.m + data.p <= 400 {
        return factor_kkt_lu(data, m_mat);
    }
    let split = (|| {
        let chol_m = robust_cholesky(m_mat)?;
        let minv_f = chol_m.solve(&data.f);
        let chol_q = if data.p > 0 {
            let q = data.f.transpose() * &minv_f;
            Some(robust_cholesky(&q)?)
        } else {
            None
        };
        Some(KktFactor::Split {
            chol_m,
            minv_f,
            chol_q,
        })
    })();
    split.or_else(|| factor_kkt_lu(data, m_mat))
}

/// Solve [M F; Fᵀ 0] (Δy, Δw) = (h, rf) with iterative refinement; the
/// Schur complement becomes badly conditioned near optimality and refining
/// against the assembled M keeps the directions accurate.
fn solve_kkt(
    data: &PairData,
    kkt: &KktFactor,
    m_mat: &DMatrix<f64>,
    h: &DVector<f64>,
    rf: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let solve_once = |h: &DVector<f64>, rf: &DVector<f64>| match kkt {
        KktFactor::Empty => (DVector::zeros(0), DVector::zeros(0)),
        KktFactor::Split {
            chol_m,
            minv_f,
            chol_q,
        } => {
            let minv_h = chol_m.solve(h);
            if data.p == 0 {
                return (minv_h, DVector::zeros(0));
            }
            let rhs_w = minv_f.transpose() * h - rf;
            let dw = chol_q.as_ref().unwrap().solve(&rhs_w);
            let dy = minv_h - minv_f * &dw;
            (dy, dw)
        }
        KktFactor::Lu { lu, aug } => {
            let n = data.m + data.p;
            let mut rhs = DVector::zeros(n);
            rhs.rows_mut(0, data.m).copy_from(h);
            if data.p > 0 {
                rhs.rows_mut(data.m, data.p).copy_from(rf);
            }
            let mut sol = lu
                .solve(&rhs)
                .unwrap_or_else(|| DVector::from_element(n, f64::INFINITY));
            // A numerically singular augmented system sends LU into the
            // stratosphere; fall back to a truncated SVD solve, which drops
            // the null directions and returns the minimum-norm step.
            let residual_bad = {
                let r = &rhs - aug * &sol;
                !r.amax().is_finite() || r.amax() > 1e-6 * (1.0 + rhs.amax())
            };
            if residual_bad {
                let svd = aug.clone().svd(true, true);
                let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
                if let Ok(s2) = svd.solve(&rhs, 1e-12 * smax.max(1.0)) {
                    sol = s2;
                } else {
                    sol = DVector::zeros(n);
                }
            }
            (
                sol.rows(0, data.m).into_owned(),
                sol.rows(data.m, data.p).into_owned(),
            )
        }
    };
    let (mut dy, mut dw) = solve_once(h, rf);
    let scale = 1.0 + h.amax().max(rf.amax());
    for _ in 0..3 {
        let mut r1 = h - m_mat * &dy;
        let mut r2 = rf.clone();
        if data.p > 0 {
            r1 -= &data.f * &dw;
            r2 -= data.f.transpose() * &dy;
        }
        if r1.amax().max(r2.amax()) <= 1e-13 * scale {
            break;
        }
        let (cy, cw) = solve_once(&r1, &r2);
        dy += cy;
        if data.p > 0 {
            dw += cw;
        }
    }
    (dy, dw)
}

fn ipm(data: &PairData, opts: &SolveOptions) -> IpmResult {
    let nblocks = data.ns.len();
    let nu: f64 = data.ns.iter().sum::<usize>() as f64;
    let nmax = *data.ns.iter().max().unwrap() as f64;

    // Data norms for the starting point and relative residuals.
    let norm_rhs = data.rhs.norm();
    let norm_cfree = data.c_free.norm();
    let norm_c = data.c_mats.iter().map(frob).fold(0.0f64, f64::max);
    let mut norm_a_max = 1e-30f64;
    let mut rhs_ratio = 0.0f64;
    for b in 0..nblocks {
        for t in &data.block_cons[b] {
            let fa: f64 = t.ents.iter().map(|&(_, _, v)| v * v).sum::<f64>().sqrt();
            norm_a_max = norm_a_max.max(fa);
            let r = (1.0 + data.rhs[t.con].abs()) / (1.0 + fa);
            rhs_ratio = rhs_ratio.max(r);
        }
    }
    let xi_p = 10f64.max(nmax.sqrt()).max(nmax.sqrt() * rhs_ratio);
    let xi_d = 10f64
        .max(nmax.sqrt())
        .max(norm_c.max(norm_a_max).max(norm_cfree));

    let mut x: Vec<DMatrix<f64>> = data
        .ns
        .iter()
        .map(|&n| DMatrix::identity(n, n) * xi_p)
        .collect();
    let mut s: Vec<DMatrix<f64>> = data
        .ns
        .iter()
        .map(|&n| DMatrix::identity(n, n) * xi_d)
        .collect();
    let mut y: DVector<f64> = DVector::zeros(data.m);
    let mut w: DVector<f64> = DVector::zeros(data.p);

    // Three snapshots: the overall best balances both sides; the primal and
    // dual bests keep the most converged iterate of each variable group,
    // which matters because one side routinely keeps improving after the
    // other hits its numerical floor.
    let mut best_overall: Option<IpmResult> = None;
    let mut best_overall_score = f64::INFINITY;
    let mut best_primal: Option<(Vec<DMatrix<f64>>, DVector<f64>, f64, f64)> = None;
    let mut best_dual: Option<(DVector<f64>, Vec<DMatrix<f64>>, f64, f64, f64)> = None;

    let mut small_steps = 0usize;
    let mut since_improved = 0usize;
    let gamma = 0.98;
    let mut iterations = 0usize;

    let compose = |mut out: IpmResult,
                   best_primal: Option<(Vec<DMatrix<f64>>, DVector<f64>, f64, f64)>,
                   best_dual: Option<(DVector<f64>, Vec<DMatrix<f64>>, f64, f64, f64)>|
     -> IpmResult {
        if let Some((bx, bw, pobj, err_p)) = best_primal {
            out.x = bx;
            out.w = bw;
            out.pobj = pobj;
            out.err_p = err_p;
        }
        if let Some((by, bs, dobj, err_d, err_f)) = best_dual {
            out.y = by;
            out.s = bs;
            out.dobj = dobj;
            out.err_d = err_d;
            out.err_f = err_f;
        }
        out.gap_rel = (out.pobj - out.dobj).abs() / (1.0 + out.pobj.abs() + out.dobj.abs());
        let near = out.err_p.max(out.err_d).max(out.err_f) <= 1e-4 && out.gap_rel <= 1e-4;
        out.status = if near {
            PairStatus::NearOptimal
        } else {
            PairStatus::Stalled
        };
        out
    };

    loop {
        // Residuals and objectives.
        let mut rp = data.rhs.clone();
        for b in 0..nblocks {
            for t in &data.block_cons[b] {
                rp[t.con] -= apply_con(t, &x[b]);
            }
        }
        if data.p > 0 {
            rp -= &data.f * &w;
        }
        let mut rd: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
        for b in 0..nblocks {
            let mut m = &data.c_mats[b] - &s[b];
            for t in &data.block_cons[b] {
                add_con(t, -y[t.con], &mut m);
            }
            rd.push(m);
        }
        let rf = if data.p > 0 {
            &data.c_free - data.f.transpose() * &y
        } else {
            DVector::zeros(0)
        };

        let pobj: f64 = (0..nblocks)
            .map(|b| (&data.c_mats[b]).dot(&x[b]))
            .sum::<f64>()
            + data.c_free.dot(&w);
        let dobj = data.rhs.dot(&y);
        let mu: f64 = (0..nblocks).map(|b| x[b].dot(&s[b])).sum::<f64>() / nu;

        let err_p = rp.norm() / (1.0 + norm_rhs);
        let err_d = rd.iter().map(|m| frob(m).powi(2)).sum::<f64>().sqrt() / (1.0 + norm_c);
        let err_f = if data.p > 0 {
            rf.norm() / (1.0 + norm_cfree)
        } else {
            0.0
        };
        let gap_rel = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        let snapshot = |status: PairStatus| IpmResult {
            x: x.clone(),
            s: s.clone(),
            y: y.clone(),
            w: w.clone(),
            pobj,
            dobj,
            err_p,
            err_d,
            err_f,
            gap_rel,
            iterations,
            status,
        };


        let score_overall = err_p.max(err_d).max(err_f).max(gap_rel);
        let gap_abs = (pobj - dobj).abs();
        let mut improved = false;
        if score_overall < best_overall_score {
            if score_overall < 0.98 * best_overall_score && score_overall > 1e-12 {
                improved = true;
            }
            best_overall_score = score_overall;
            best_overall = Some(snapshot(PairStatus::Stalled));
        }
        // Feasible-enough iterates track their best objective: the pair
        // primal minimizes, the pair dual maximizes, and each side keeps
        // tightening the bracket after the other reaches its floor.
        const SIDE_FEAS: f64 = 1e-4;
        if err_p <= SIDE_FEAS {
            let current = best_primal.as_ref().map(|b| b.2);
            if current.is_none_or(|p| pobj < p) {
                if current.is_none_or(|p| pobj < p - 0.02 * gap_abs) {
                    improved = true;
                }
                best_primal = Some((x.clone(), w.clone(), pobj, err_p));
            }
        }
        if err_d.max(err_f) <= SIDE_FEAS {
            let current = best_dual.as_ref().map(|b| b.2);
            if current.is_none_or(|d| dobj > d) {
                if current.is_none_or(|d| dobj > d + 0.02 * gap_abs) {
                    improved = true;
                }
                best_dual = Some((y.clone(), s.clone(), dobj, err_d, err_f));
            }
        }
        if improved {
            since_improved = 0;
        } else {
            since_improved += 1;
        }

        if std::env::var_os("CHEBY_IPM_TRACE").is_some() {
            eprintln!(
                "iter {iterations:3}: mu={mu:9.2e} errP={err_p:9.2e} errD={err_d:9.2e} \
                 errF={err_f:9.2e} gap={gap_rel:9.2e} pobj={pobj:+.9e} dobj={dobj:+.9e}"
            );
        }

        let feas_ok = err_p <= opts.eps_feas && err_d <= opts.eps_feas && err_f <= opts.eps_feas;
        if feas_ok && gap_rel <= opts.eps_gap {
            return snapshot(PairStatus::Optimal);
        }
        // Divergence certificates.
        if dobj > 1e10 * (1.0 + pobj.abs().min(1e9)) && err_d <= 1e-6 && err_f <= 1e-6 {
            return snapshot(PairStatus::PrimalInfeasible);
        }
        if pobj < -1e10 * (1.0 + dobj.abs().min(1e9)) && err_p <= 1e-6 {
            return snapshot(PairStatus::PrimalUnbounded);
        }
        if iterations >= opts.max_iter || small_steps >= 4 || since_improved >= 10 {
            let out = best_overall
                .take()
                .unwrap_or_else(|| snapshot(PairStatus::Stalled));
            return compose(out, best_primal.take(), best_dual.take());
        }

        // Factorizations.
        let mut sinvs: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
        let mut ok = true;
        for b in 0..nblocks {
            match robust_cholesky(&s[b]) {
                Some(ch) => sinvs.push(ch.inverse()),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            let out = best_overall
                .take()
                .unwrap_or_else(|| snapshot(PairStatus::Stalled));
            return compose(out, best_primal.take(), best_dual.take());
        }
        let m_mat = form_schur(data, &x, &sinvs);
        let kkt = match factor_kkt(data, &m_mat) {
            Some(k) => k,
            None => {
                let out = best_overall
                    .take()
                    .unwrap_or_else(|| snapshot(PairStatus::Stalled));
                return compose(out, best_primal.take(), best_dual.take());
            }
        };

        // T_b = X_b Rd_b S_b⁻¹, used by both predictor and corrector.
        let t_mats: Vec<DMatrix<f64>> = (0..nblocks)
            .map(|b| {
                let t = &x[b] * &rd[b] * &sinvs[b];
                (&t + t.transpose()) * 0.5
            })
            .collect();

        // Predictor (affine scaling): Rc = −X S, so Rc·S⁻¹ = −X.
        let mut h_aff = rp.clone();
        for b in 0..nblocks {
            for t in &data.block_cons[b] {
                h_aff[t.con] += apply_con(t, &x[b]) + apply_con(t, &t_mats[b]);
            }
        }
        let (dy_aff, _dw_aff) = solve_kkt(data, &kkt, &m_mat, &h_aff, &rf);
        let mut ds_aff: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
        let mut dx_aff: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
        for b in 0..nblocks {
            let mut dsb = rd[b].clone();
            for t in &data.block_cons[b] {
                add_con(t, -dy_aff[t.con], &mut dsb);
            }
            let dxb = -&x[b] - &x[b] * &dsb * &sinvs[b];
            let dxb = (&dxb + dxb.transpose()) * 0.5;
            ds_aff.push(dsb);
            dx_aff.push(dxb);
        }
        let ap_aff = (0..nblocks)
            .map(|b| max_step(&x[b], &dx_aff[b]))
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let ad_aff = (0..nblocks)
            .map(|b| max_step(&s[b], &ds_aff[b]))
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let mu_aff: f64 = (0..nblocks)
            .map(|b| {
                let xn = &x[b] + &dx_aff[b] * ap_aff;
                let sn = &s[b] + &ds_aff[b] * ad_aff;
                xn.dot(&sn)
            })
            .sum::<f64>()
            / nu;
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-8, 1.0);

        let mu_rel = mu / (1.0 + pobj.abs().max(dobj.abs()));
        // Corrector with a per-side watchdog: a rotten direction may wreck
        // one side while the other still improves, so each side backs off
        // (possibly to a zero step) independently; full rejection retries
        // with stronger centering.
        let mut stepped_p = false;
        let mut stepped_d = false;
        for attempt in 0..3 {
            let sigma_try = match attempt {
                0 => sigma,
                1 => sigma.max(0.9),
                _ => 1.0,
            };
            // Rc = σμ I − X S − ΔX_aff ΔS_aff.
            let mut h = rp.clone();
            let mut zc: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
            for b in 0..nblocks {
                let n = data.ns[b];
                let rc = DMatrix::identity(n, n) * (sigma_try * mu)
                    - &x[b] * &s[b]
                    - &dx_aff[b] * &ds_aff[b];
                let z = rc * &sinvs[b];
                let zsym = (&z + z.transpose()) * 0.5;
                for t in &data.block_cons[b] {
                    h[t.con] += -apply_con(t, &zsym) + apply_con(t, &t_mats[b]);
                }
                zc.push(z);
            }
            let (dy, dw) = solve_kkt(data, &kkt, &m_mat, &h, &rf);
            let mut alpha_p = f64::INFINITY;
            let mut alpha_d = f64::INFINITY;
            let mut ds: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
            let mut dx: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
            for b in 0..nblocks {
                let mut dsb = rd[b].clone();
                for t in &data.block_cons[b] {
                    add_con(t, -dy[t.con], &mut dsb);
                }
                let dxb = &zc[b] - &x[b] * &dsb * &sinvs[b];
                let dxb = (&dxb + dxb.transpose()) * 0.5;
                alpha_p = alpha_p.min(max_step(&x[b], &dxb));
                alpha_d = alpha_d.min(max_step(&s[b], &dsb));
                ds.push(dsb);
                dx.push(dxb);
            }
            let mut alpha_p = (gamma * alpha_p).min(1.0);
            let mut alpha_d = (gamma * alpha_d).min(1.0);

            let trial_p = |ap: f64| -> f64 {
                let mut rp_t = data.rhs.clone();
                for b in 0..nblocks {
                    for t in &data.block_cons[b] {
                        rp_t[t.con] -= apply_con(t, &x[b]) + ap * apply_con(t, &dx[b]);
                    }
                }
                if data.p > 0 {
                    rp_t -= &data.f * &(&w + &dw * ap);
                }
                rp_t.norm() / (1.0 + norm_rhs)
            };
            let trial_d = |ad: f64| -> f64 {
                let mut dual_sq = 0.0;
                for b in 0..nblocks {
                    let mut m = &data.c_mats[b] - &s[b] - &ds[b] * ad;
                    for t in &data.block_cons[b] {
                        add_con(t, -(y[t.con] + ad * dy[t.con]), &mut m);
                    }
                    dual_sq += frob(&m).powi(2);
                }
                let mut worst = dual_sq.sqrt() / (1.0 + norm_c);
                if data.p > 0 {
                    let rf_t = &data.c_free - data.f.transpose() * &(&y + &dy * ad);
                    worst = worst.max(rf_t.norm() / (1.0 + norm_cfree));
                }
                worst
            };
            let mut p_ok = false;
            for _ in 0..4 {
                if alpha_p < 1e-10 {
                    break;
                }
                if trial_p(alpha_p) <= (4.0 * err_p).max(0.01 * mu_rel).max(opts.eps_feas) {
                    p_ok = true;
                    break;
                }
                alpha_p *= 0.5;
            }
            let mut d_ok = false;
            for _ in 0..4 {
                if alpha_d < 1e-10 {
                    break;
                }
                if trial_d(alpha_d) <= (4.0 * err_d.max(err_f)).max(0.01 * mu_rel).max(opts.eps_feas) {
                    d_ok = true;
                    break;
                }
                alpha_d *= 0.5;
            }
            if std::env::var_os("CHEBY_IPM_TRACE").is_some() {
                eprintln!(
                    "    attempt {attempt}: sigma={sigma_try:.2e} ap={alpha_p:.2e} ad={alpha_d:.2e} p_ok={p_ok} d_ok={d_ok} trial_p={:.2e} trial_d={:.2e}",
                    trial_p(alpha_p), trial_d(alpha_d)
                );
            }
            if !p_ok && !d_ok {
                continue;
            }
            if p_ok {
                for b in 0..nblocks {
                    x[b] += &dx[b] * alpha_p;
                    x[b] = (&x[b] + x[b].transpose()) * 0.5;
                }
                if data.p > 0 {
                    w += &dw * alpha_p;
                }
                stepped_p = alpha_p >= 1e-8;
            }
            if d_ok {
                for b in 0..nblocks {
                    s[b] += &ds[b] * alpha_d;
                    s[b] = (&s[b] + s[b].transpose()) * 0.5;
                }
                y += &dy * alpha_d;
                stepped_d = alpha_d >= 1e-8;
            }
            break;
        }
        if stepped_p || stepped_d {
            small_steps = 0;
        } else {
            small_steps += 1;
        }
        iterations += 1;

        if x.iter().any(|m| m.iter().any(|v| !v.is_finite()))
            || s.iter().any(|m| m.iter().any(|v| !v.is_finite()))
        {
            let out = best_overall.take().unwrap();
            return compose(out, best_primal.take(), best_dual.take());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::LinearFunctional;

    /// Dense reference for the Schur complement on a small random problem.
    #[test]
    fn schur_matches_dense_reference() {
        // Two blocks (2x2 and 3x3), three constraints with overlapping support.
        let mut problem = SdpProblem::new(vec![2, 3], 0, Direction::Minimize);
        problem.objective = LinearFunctional::new().matrix(0, 0, 0, 1.0);
        problem.add_equality(
            LinearFunctional::new()
                .matrix(0, 0, 1, 2.0)
                .matrix(1, 0, 2, -1.0),
            1.0,
        );
        problem.add_equality(
            LinearFunctional::new()
                .matrix(0, 1, 1, 1.5)
                .matrix(1, 1, 1, 0.5),
            2.0,
        );
        problem.add_equality(LinearFunctional::new().matrix(1, 0, 0, 1.0), 0.5);

        // Build pair data through the primal adapter internals.
        let sense = 1.0;
        let _ = sense;
        let nblocks = problem.num_blocks();
        let mut block_cons: Vec<Vec<ConTouch>> = vec![Vec::new(); nblocks];
        for (i, (f, _)) in problem.equalities.iter().enumerate() {
            let (mats, _) = normalize(f);
            let mut per_block: HashMap<usize, Vec<(u32, u32, f64)>> = HashMap::new();
            for ((b, rr, cc), v) in mats {
                let list = per_block.entry(b).or_default();
                list.push((rr as u32, cc as u32, v));
                if rr != cc {
                    list.push((cc as u32, rr as u32, v));
                }
            }
            let mut blocks: Vec<_> = per_block.into_iter().collect();
            blocks.sort_by_key(|&(b, _)| b);
            for (b, ents) in blocks {
                block_cons[b].push(ConTouch { con: i, ents });
            }
        }
        let data = PairData {
            ns: vec![2, 3],
            c_mats: vec![DMatrix::zeros(2, 2), DMatrix::zeros(3, 3)],
            block_cons,
            f: DMatrix::zeros(3, 0),
            rhs: DVector::zeros(3),
            c_free: DVector::zeros(0),
            m: 3,
            p: 0,
        };

        // Arbitrary SPD X and S.
        let mk_spd = |n: usize, seed: f64| {
            let mut a = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = ((i * n + j) as f64 * 0.731 + seed).sin();
                }
            }
            &a * a.transpose() + DMatrix::identity(n, n) * (n as f64)
        };
        let xs = vec![mk_spd(2, 0.3), mk_spd(3, 1.7)];
        let ss = vec![mk_spd(2, 2.9), mk_spd(3, 0.1)];
        let sinvs: Vec<DMatrix<f64>> = ss.iter().map(|m| m.clone().try_inverse().unwrap()).collect();

        let m_fast = form_schur(&data, &xs, &sinvs);

        // Dense reference: materialize each A_i and compute tr(A_i X A_j S^-1).
        let dense_a = |i: usize| -> Vec<DMatrix<f64>> {
            let mut mats = vec![DMatrix::zeros(2, 2), DMatrix::zeros(3, 3)];
            let (terms, _) = normalize(&problem.equalities[i].0);
            for ((b, r, c), v) in terms {
                mats[b][(r, c)] += v;
                if r != c {
                    mats[b][(c, r)] += v;
                }
            }
            mats
        };
        for i in 0..3 {
            for j in 0..3 {
                let ai = dense_a(i);
                let aj = dense_a(j);
                let mut expect = 0.0;
                for b in 0..2 {
                    expect += (&ai[b] * &xs[b] * &aj[b] * &sinvs[b]).trace();
                }
                assert!(
                    (m_fast[(i, j)] - expect).abs() < 1e-10 * (1.0 + expect.abs()),
                    "M[{i},{j}] = {} vs {}",
                    m_fast[(i, j)],
                    expect
                );
            }
        }
    }

    #[test]
    fn eliminate_detects_tied_blocks() {
        // Golden problem shape: 2x2 block fully tied to scalars.
        let mut p = SdpProblem::new(vec![2], 2, Direction::Minimize);
        p.objective = LinearFunctional::new().scalar(1, 1.0);
        p.add_equality(LinearFunctional::new().matrix(0, 0, 0, 1.0), 1.0);
        p.add_equality(
            LinearFunctional::new().matrix(0, 0, 1, 1.0).scalar(0, -1.0),
            0.0,
        );
        p.add_equality(
            LinearFunctional::new().matrix(0, 1, 1, 1.0).scalar(1, -1.0),
            0.0,
        );
        p.add_equality(LinearFunctional::new().scalar(0, 1.0).scalar(1, 1.0), 1.0);
        let lmi = try_eliminate(&p).expect("should eliminate");
        assert_eq!(lmi.rem_eqs.len(), 1);
        // X[0,1] = 0 + 0.5*(2*z0)/... : off-diagonal tie with value 1 means
        // X01 + X10 = z0, so X01 = z0/2.
        let aff = &lmi.entries[0][&(0, 1)];
        assert!((aff.base - 0.0).abs() < 1e-15);
        assert_eq!(aff.coefs, vec![(0, 0.5)]);

        // An SOS-shaped constraint (many entries in one row) blocks elimination.
        let mut p2 = SdpProblem::new(vec![2], 1, Direction::Minimize);
        p2.add_equality(
            LinearFunctional::new()
                .matrix(0, 0, 0, 1.0)
                .matrix(0, 1, 1, 1.0),
            1.0,
        );
        assert!(try_eliminate(&p2).is_none());
    }
}
