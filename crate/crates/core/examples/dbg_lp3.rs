//! Debug the nonnegative-weights feasibility LP.

use cheby_core::closedform::{oracle_extremal_points, simplex2d_best_approximant};
use cheby_core::domains::make_simplex;
use cheby_core::extraction::{extremal_support, Signature};
use cheby_core::poly::{MultiIndex, SparsePolynomial};

fn main() {
    let k = MultiIndex::new(vec![2, 1]);
    let p = simplex2d_best_approximant(&k).unwrap();
    let residual = SparsePolynomial::monomial(k, 1.0).sub(&p);
    let dom = make_simplex(2);
    let (_, pts) = oracle_extremal_points(&residual, &dom, 60, 60, 1e-6);
    let m = pts.len();
    println!("{} candidates", m);
    let sig = Signature {
        signs: pts.iter().map(|(_, v)| if *v >= 0.0 { 1 } else { -1 }).collect(),
        weights: vec![1.0 / m as f64; m],
        points: pts.into_iter().map(|(p, _)| p).collect(),
    };
    match extremal_support(&sig, 2, 2) {
        Some(trim) => {
            println!("trimmed to {} points:", trim.len());
            for ((pt, s), w) in trim.points.iter().zip(&trim.signs).zip(&trim.weights) {
                println!("  ({:.4}, {:.4}) sign {s:+} w {w:.5}", pt[0], pt[1]);
            }
        }
        None => println!("no annihilating measure found"),
    }
}
