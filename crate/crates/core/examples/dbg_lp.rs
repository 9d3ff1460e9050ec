//! Debug the positive-null-vector LP on the simplex2d empirical signature.

use cheby_core::closedform::{oracle_extremal_points, simplex2d_best_approximant};
use cheby_core::domains::make_simplex;
use cheby_core::extraction::{verify_extremal_signature, Signature};
use cheby_core::poly::{MultiIndex, SparsePolynomial};

fn main() {
    let k = MultiIndex::new(vec![2, 1]);
    let p = simplex2d_best_approximant(&k).unwrap();
    let residual = SparsePolynomial::monomial(k, 1.0).sub(&p);
    let dom = make_simplex(2);
    let (norm, pts) = oracle_extremal_points(&residual, &dom, 60, 60, 1e-6);
    println!("norm {norm}, {} extremal candidates", pts.len());
    let signs: Vec<i8> = pts.iter().map(|(_, v)| if *v >= 0.0 { 1 } else { -1 }).collect();
    let plus = signs.iter().filter(|&&s| s == 1).count();
    println!("sign split: {plus} plus / {} minus", signs.len() - plus);
    for (pt, v) in pts.iter().take(16) {
        println!("  ({:.4}, {:.4}) -> {:+.6e}", pt[0], pt[1], v);
    }
    let m = pts.len();
    let sig = Signature {
        points: pts.into_iter().map(|(p, _)| p).collect(),
        signs,
        weights: vec![1.0 / m as f64; m],
    };
    let rep = verify_extremal_signature(&sig, 2, 2);
    println!("extremal: {}, null dim {}", rep.extremal, rep.null_dimension);
}
