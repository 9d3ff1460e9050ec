//! Trace a single moment-program solve.

use std::time::Instant;

use cheby_core::domains::make_ball;
use cheby_core::hierarchy::assemble_moment_relaxation;
use cheby_core::poly::{MultiIndex, SparsePolynomial};
use cheby_core::sdp::{solve, SolveOptions};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let t: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let f = SparsePolynomial::monomial(MultiIndex::new(vec![2, 2, 1]), 1.0);
    let domain = make_ball(3);
    let mr = assemble_moment_relaxation(&f, 5, &domain, t, false).unwrap();
    println!(
        "blocks {:?}, scalars {}, equalities {}",
        mr.problem.block_sizes(),
        mr.problem.num_scalars(),
        mr.problem.num_equalities()
    );
    let start = Instant::now();
    let sol = solve(&mr.problem, &SolveOptions::default()).unwrap();
    println!(
        "status {} objective {:.9e} iters {} in {:.1?}",
        sol.status.as_str(),
        sol.objective,
        sol.metrics.iterations,
        start.elapsed()
    );
}
