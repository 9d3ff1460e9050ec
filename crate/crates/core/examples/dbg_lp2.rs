//! Replicate the positive-null-vector LP directly.

use cheby_core::closedform::{oracle_extremal_points, simplex2d_best_approximant};
use cheby_core::domains::make_simplex;
use cheby_core::poly::{monomials_up_to, MultiIndex, SparsePolynomial};
use cheby_core::sdp::{solve, Direction, LinearFunctional, SdpProblem, SolveOptions};

fn main() {
    let k = MultiIndex::new(vec![2, 1]);
    let p = simplex2d_best_approximant(&k).unwrap();
    let residual = SparsePolynomial::monomial(k, 1.0).sub(&p);
    let dom = make_simplex(2);
    let (_, pts) = oracle_extremal_points(&residual, &dom, 60, 60, 1e-6);
    let n_pts = pts.len();
    let monos = monomials_up_to(2, 2);
    let mut problem = SdpProblem::new(vec![1; n_pts], n_pts + 1, Direction::Maximize);
    problem.objective = LinearFunctional::new().scalar(n_pts, 1.0);
    for i in 0..n_pts {
        problem.add_equality(
            LinearFunctional::new()
                .matrix(i, 0, 0, 1.0)
                .scalar(i, -1.0)
                .scalar(n_pts, 1.0),
            0.0,
        );
    }
    for mk in &monos {
        let mut f = LinearFunctional::new();
        for (i, (pt, v)) in pts.iter().enumerate() {
            let sgn = if *v >= 0.0 { 1.0 } else { -1.0 };
            let mv: f64 = mk
                .exponents()
                .iter()
                .zip(pt)
                .map(|(&e, &x)| x.powi(e as i32))
                .product();
            f.push_scalar(i, sgn * mv);
        }
        problem.add_equality(f, 0.0);
    }
    let mut mass = LinearFunctional::new();
    for i in 0..n_pts {
        mass.push_scalar(i, 1.0);
    }
    problem.add_equality(mass, 1.0);
    let sol = solve(&problem, &SolveOptions::default()).unwrap();
    println!(
        "status {} t*={:.6e} iters {} min w = {:.3e}",
        sol.status.as_str(),
        sol.objective,
        sol.metrics.iterations,
        sol.scalar_values[..n_pts]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    );
}
