//! Hankel spectrum for the simplex (2,1,1) moment solution.

use cheby_core::domains::make_simplex;
use cheby_core::hierarchy::{moment_matrix, run_level};
use cheby_core::poly::{MultiIndex, SparsePolynomial};
use cheby_core::sdp::SolveOptions;

fn main() {
    let f = SparsePolynomial::monomial(MultiIndex::new(vec![2, 1, 1]), 1.0);
    let domain = make_simplex(3);
    let t = 5;
    let out = run_level(&f, 4, &domain, t, &SolveOptions::default(), false).unwrap();
    let mv = out.moment_vector;
    for (name, y) in [("y+", &mv.plus), ("y-", &mv.minus)] {
        for tt in [t - 1, t] {
            let m = moment_matrix(y, tt, 3).unwrap();
            let mut eigs: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            eigs.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
            let top: Vec<String> = eigs.iter().take(12).map(|v| format!("{v:.2e}")).collect();
            println!("{name} t={tt}: {}", top.join(" "));
        }
    }
}
