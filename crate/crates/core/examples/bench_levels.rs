//! Quick timing probe for table-scale instances.

use std::time::Instant;

use cheby_core::domains::{make_ball, make_cross_polytope, make_simplex};
use cheby_core::hierarchy::run_level;
use cheby_core::poly::{MultiIndex, SparsePolynomial};
use cheby_core::sdp::SolveOptions;

fn main() {
    let cases: Vec<(&str, Vec<u32>)> = vec![
        ("ball", vec![2, 2, 1]),
        ("ball", vec![2, 2, 2]),
        ("cross", vec![2, 2, 1]),
        ("cross", vec![3, 2, 1]),
        ("simplex", vec![3, 2, 1]),
    ];
    for (name, k) in cases {
        let domain = match name {
            "ball" => make_ball(3),
            "cross" => make_cross_polytope(3).unwrap(),
            _ => make_simplex(3),
        };
        let n: u32 = k.iter().sum();
        let t = n + 1;
        let f = SparsePolynomial::monomial(MultiIndex::new(k.clone()), 1.0);
        let start = Instant::now();
        let out = run_level(&f, n, &domain, t, &SolveOptions::default(), false).unwrap();
        println!(
            "{name} k={k:?} t={t}: ub'={:?} ub={:?} statuses=({}, {}) in {:.1?}",
            out.ub_prime,
            out.ub,
            out.moment_status.as_str(),
            out.sos_status.as_str(),
            start.elapsed()
        );
    }
}
