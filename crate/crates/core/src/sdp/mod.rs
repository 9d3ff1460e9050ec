//! Block-diagonal semidefinite programming: problem model, an internal
//! primal-dual interior-point solver, and SDPA sparse-format export.
//!
//! A problem holds symmetric PSD matrix blocks plus a vector of free
//! scalars; the objective and every equality constraint are linear
//! functionals over both.  The solver picks an internal orientation
//! automatically: problems whose block entries are each pinned to the
//! scalars by a dedicated equality (the moment relaxations) are eliminated
//! into an LMI over the scalars, everything else (the SOS relaxations) is
//! solved in the assembled form.  Either way the Schur complement stays at
//! the small side of the pair.

mod sdpa;
mod solver;

pub use sdpa::{export_sdpa, parse_sdpa};

use nalgebra::DMatrix;

use crate::error::{CoreError, Result};

/// Reference to one symmetric entry of a PSD block: the value multiplies
/// `X[row,col] + X[col,row]` for off-diagonal entries and `X[row,row]` on
/// the diagonal (i.e. the symmetric matrix with that value at both mirror
/// positions, paired with `X` under the trace inner product).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// A linear functional over the matrix blocks and the free scalars.
#[derive(Debug, Clone, Default)]
pub struct LinearFunctional {
    pub matrix_terms: Vec<MatrixEntry>,
    /// Pairs `(scalar index, coefficient)`.
    pub scalar_terms: Vec<(usize, f64)>,
}

impl LinearFunctional {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn matrix(mut self, block: usize, row: usize, col: usize, value: f64) -> Self {
        self.push_matrix(block, row, col, value);
        self
    }

    pub fn scalar(mut self, index: usize, value: f64) -> Self {
        self.push_scalar(index, value);
        self
    }

    pub fn push_matrix(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        self.matrix_terms.push(MatrixEntry {
            block,
            row,
            col,
            value,
        });
    }

    pub fn push_scalar(&mut self, index: usize, value: f64) {
        self.scalar_terms.push((index, value));
    }

    /// Evaluate against explicit block values and scalars.
    pub fn evaluate(&self, blocks: &[DMatrix<f64>], scalars: &[f64]) -> f64 {
        let mut acc = 0.0;
        for e in &self.matrix_terms {
            let x = &blocks[e.block];
            acc += if e.row == e.col {
                e.value * x[(e.row, e.col)]
            } else {
                e.value * (x[(e.row, e.col)] + x[(e.col, e.row)])
            };
        }
        for &(k, v) in &self.scalar_terms {
            acc += v * scalars[k];
        }
        acc
    }
}

/// Optimization sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// A feasibility-with-objective model over PSD blocks and free scalars:
/// optimize a linear functional subject to linear equalities, with every
/// matrix block constrained positive semidefinite.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    block_sizes: Vec<usize>,
    num_scalars: usize,
    pub objective: LinearFunctional,
    pub objective_constant: f64,
    pub equalities: Vec<(LinearFunctional, f64)>,
    pub direction: Direction,
}

impl SdpProblem {
    pub fn new(block_sizes: Vec<usize>, num_scalars: usize, direction: Direction) -> Self {
        assert!(
            block_sizes.iter().all(|&s| s >= 1),
            "block sides must be >= 1"
        );
        SdpProblem {
            block_sizes,
            num_scalars,
            objective: LinearFunctional::new(),
            objective_constant: 0.0,
            equalities: Vec::new(),
            direction,
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn num_scalars(&self) -> usize {
        self.num_scalars
    }

    pub fn num_equalities(&self) -> usize {
        self.equalities.len()
    }

    pub fn add_equality(&mut self, functional: LinearFunctional, rhs: f64) {
        self.equalities.push((functional, rhs));
    }

    /// Check that every functional touches only declared variables.
    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() && self.num_scalars == 0 {
            return Err(CoreError::InvalidArgument(
                "problem needs at least one PSD block or free scalar".into(),
            ));
        }
        let check = |f: &LinearFunctional| -> Result<()> {
            for e in &f.matrix_terms {
                if e.block >= self.block_sizes.len()
                    || e.row >= self.block_sizes[e.block]
                    || e.col >= self.block_sizes[e.block]
                {
                    return Err(CoreError::InvalidArgument(format!(
                        "matrix term ({},{},{}) outside declared blocks",
                        e.block, e.row, e.col
                    )));
                }
                if !e.value.is_finite() {
                    return Err(CoreError::InvalidArgument("non-finite coefficient".into()));
                }
            }
            for &(k, v) in &f.scalar_terms {
                if k >= self.num_scalars {
                    return Err(CoreError::InvalidArgument(format!(
                        "scalar term {k} outside declared scalars"
                    )));
                }
                if !v.is_finite() {
                    return Err(CoreError::InvalidArgument("non-finite coefficient".into()));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        for (f, rhs) in &self.equalities {
            check(f)?;
            if !rhs.is_finite() {
                return Err(CoreError::InvalidArgument("non-finite rhs".into()));
            }
        }
        Ok(())
    }
}

/// Solver termination status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    Stalled,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Stalled => "stalled",
        }
    }

    pub fn is_usable(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

/// Residual and progress metrics attached to a solution.
#[derive(Debug, Clone, Copy)]
pub struct SolveMetrics {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Solver output: block values, free scalar values, objective, and metrics.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub block_values: Vec<DMatrix<f64>>,
    pub scalar_values: Vec<f64>,
    pub objective: f64,
    /// Objective of the internal dual pair (NaN when unavailable).
    pub dual_objective: f64,
    pub status: SolveStatus,
    pub metrics: SolveMetrics,
}

/// Interior-point tolerances and limits.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub eps_feas: f64,
    pub eps_gap: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            eps_feas: 1e-8,
            eps_gap: 1e-8,
            max_iter: 120,
        }
    }
}

/// Solve the problem with the internal interior-point method.
///
/// Deterministic: identical inputs and options produce identical iterates.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    problem.validate()?;
    solver::solve_auto(problem, opts)
}

/// Independently recomputed feasibility numbers for a (possibly hand-built)
/// solution: equality residual ∞-norm, minimum eigenvalue per block, and the
/// duality gap carried by the solution (NaN when no dual value is known).
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub equality_inf_norm: f64,
    pub min_block_eigenvalues: Vec<f64>,
    pub gap: f64,
}

pub fn residuals(problem: &SdpProblem, solution: &SdpSolution) -> ResidualReport {
    let mut inf = 0.0f64;
    for (f, rhs) in &problem.equalities {
        let v = f.evaluate(&solution.block_values, &solution.scalar_values) - rhs;
        inf = inf.max(v.abs());
    }
    let min_eigs = solution
        .block_values
        .iter()
        .map(|x| {
            let sym = (x + x.transpose()) * 0.5;
            sym.symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let gap = (solution.objective - solution.dual_objective).abs();
    ResidualReport {
        equality_inf_norm: inf,
        min_block_eigenvalues: min_eigs,
        gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_problem(direction: Direction) -> SdpProblem {
        // Block [[1, y1], [y1, y2]] >= 0 tied to scalars (y1, y2),
        // with y1 + y2 = 1.  The off-diagonal tie uses value 0.5 because a
        // matrix term at (0,1) pairs with X[0,1] + X[1,0].
        let mut p = SdpProblem::new(vec![2], 2, direction);
        p.objective = LinearFunctional::new().scalar(1, 1.0);
        p.add_equality(LinearFunctional::new().matrix(0, 0, 0, 1.0), 1.0);
        p.add_equality(
            LinearFunctional::new().matrix(0, 0, 1, 0.5).scalar(0, -1.0),
            0.0,
        );
        p.add_equality(
            LinearFunctional::new().matrix(0, 1, 1, 1.0).scalar(1, -1.0),
            0.0,
        );
        p.add_equality(LinearFunctional::new().scalar(0, 1.0).scalar(1, 1.0), 1.0);
        p
    }

    #[test]
    fn nonneg_scalar_as_block() {
        // minimize c subject to c >= 0, c encoded as a 1x1 PSD block.
        let mut p = SdpProblem::new(vec![1], 0, Direction::Minimize);
        p.objective = LinearFunctional::new().matrix(0, 0, 0, 1.0);
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.objective.abs() <= 1e-7, "objective {}", sol.objective);
    }

    #[test]
    fn golden_section_boundary() {
        // Minimizing y2 pushes the 2x2 block to its PSD boundary y2 = y1^2,
        // whose intersection with y1 + y2 = 1 is at y1 = (sqrt(5) - 1) / 2.
        let p = golden_problem(Direction::Minimize);
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert!(sol.status.is_usable());
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        assert!(
            (sol.scalar_values[0] - phi).abs() < 1e-6,
            "y1 = {}",
            sol.scalar_values[0]
        );
        assert!((sol.objective - (1.0 - phi)).abs() < 1e-6);
        // The block value must match the scalars it is tied to.
        let x = &sol.block_values[0];
        assert!((x[(0, 1)] - sol.scalar_values[0]).abs() < 1e-6);
    }

    #[test]
    fn residual_report_on_hand_built_solution() {
        let p = golden_problem(Direction::Minimize);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let x = DMatrix::from_row_slice(2, 2, &[1.0, phi, phi, 1.0 - phi]);
        let sol = SdpSolution {
            block_values: vec![x],
            scalar_values: vec![phi, 1.0 - phi],
            objective: 1.0 - phi,
            dual_objective: f64::NAN,
            status: SolveStatus::Optimal,
            metrics: SolveMetrics {
                primal_residual: 0.0,
                dual_residual: 0.0,
                gap: 0.0,
                iterations: 0,
            },
        };
        let rep = residuals(&p, &sol);
        assert!(rep.equality_inf_norm <= 1e-12);
        assert!(rep.gap.is_nan());
        // 1 - phi = phi^2, so the block is exactly singular PSD.
        assert!(rep.min_block_eigenvalues[0] > -1e-12);

        // Perturbing one scalar by 1e-3 moves the matching equality by 1e-3.
        let mut sol2 = sol.clone();
        sol2.scalar_values[0] += 1e-3;
        let rep2 = residuals(&p, &sol2);
        assert!((rep2.equality_inf_norm - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn scaling_invariance_of_argmin() {
        // The 1e-9 relative check needs solves tighter than the defaults.
        let opts = SolveOptions {
            eps_feas: 1e-12,
            eps_gap: 1e-12,
            max_iter: 200,
        };
        let p = golden_problem(Direction::Minimize);
        let base = solve(&p, &opts).unwrap();
        let mut scaled = p.clone();
        scaled.objective = LinearFunctional::new().scalar(1, 41.5);
        let s = solve(&scaled, &opts).unwrap();
        assert!(s.status.is_usable() && base.status.is_usable());
        assert!(
            (s.objective - 41.5 * base.objective).abs() <= 1e-9 * s.objective.abs(),
            "{} vs {}",
            s.objective,
            41.5 * base.objective
        );
    }

    #[test]
    fn determinism_bitwise() {
        let p = golden_problem(Direction::Minimize);
        let a = solve(&p, &SolveOptions::default()).unwrap();
        let b = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(a.metrics.iterations, b.metrics.iterations);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn structurally_infeasible_row() {
        // 0 = 1 as an equality over no variables at all.
        let mut p = SdpProblem::new(vec![1], 0, Direction::Minimize);
        p.objective = LinearFunctional::new().matrix(0, 0, 0, 1.0);
        p.add_equality(LinearFunctional::new(), 1.0);
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_free_scalar() {
        // minimize z with z free and unconstrained.
        let mut p = SdpProblem::new(vec![], 1, Direction::Minimize);
        p.objective = LinearFunctional::new().scalar(0, 1.0);
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn pure_linear_equality_program() {
        // minimize z1 + z2 subject to z1 - z2 = 3, z1 + z2 = 5.
        let mut p = SdpProblem::new(vec![], 2, Direction::Minimize);
        p.objective = LinearFunctional::new().scalar(0, 1.0).scalar(1, 1.0);
        p.add_equality(
            LinearFunctional::new().scalar(0, 1.0).scalar(1, -1.0),
            3.0,
        );
        p.add_equality(LinearFunctional::new().scalar(0, 1.0).scalar(1, 1.0), 5.0);
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 5.0).abs() < 1e-9);
        assert!((sol.scalar_values[0] - 4.0).abs() < 1e-9);
    }
}
