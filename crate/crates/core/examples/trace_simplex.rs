//! Trace the simplex (2,1,1) moment solve.

use cheby_core::domains::make_simplex;
use cheby_core::hierarchy::assemble_moment_relaxation;
use cheby_core::poly::{MultiIndex, SparsePolynomial};
use cheby_core::sdp::{solve, SolveOptions};

fn main() {
    let f = SparsePolynomial::monomial(MultiIndex::new(vec![2, 1, 1]), 1.0);
    let domain = make_simplex(3);
    let mr = assemble_moment_relaxation(&f, 4, &domain, 5, false).unwrap();
    println!(
        "blocks {:?}, scalars {}, equalities {}",
        mr.problem.block_sizes(),
        mr.problem.num_scalars(),
        mr.problem.num_equalities()
    );
    let sol = solve(&mr.problem, &SolveOptions::default()).unwrap();
    println!(
        "status {} objective {:.9e} iters {}",
        sol.status.as_str(),
        sol.objective,
        sol.metrics.iterations,
    );
    println!("expected 2.68850e-3");
}
