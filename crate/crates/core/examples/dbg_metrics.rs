use cheby_core::domains::make_simplex;
use cheby_core::hierarchy::assemble_moment_relaxation;
use cheby_core::poly::{MultiIndex, SparsePolynomial};
use cheby_core::sdp::{solve, SolveOptions};

fn main() {
    let f = SparsePolynomial::monomial(MultiIndex::new(vec![2, 1, 1]), 1.0);
    let domain = make_simplex(3);
    let mr = assemble_moment_relaxation(&f, 4, &domain, 5, false).unwrap();
    let sol = solve(&mr.problem, &SolveOptions::default()).unwrap();
    println!(
        "status {} obj {:.9e} dual_obj {:.9e} metrics: pres {:.2e} dres {:.2e} gap {:.2e}",
        sol.status.as_str(),
        sol.objective,
        sol.dual_objective,
        sol.metrics.primal_residual,
        sol.metrics.dual_residual,
        sol.metrics.gap,
    );
}
