//! Probe certification and atom extraction on one instance.

use cheby_core::domains::{make_ball, make_simplex};
use cheby_core::extraction::{build_signature, verify_extremal_signature, MERGE_TOL};
use cheby_core::hierarchy::{run_hierarchy, HierarchyOptions};
use cheby_core::poly::{MultiIndex, SparsePolynomial};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("ball221");
    let (k, domain) = match which {
        "ball221" => (vec![2, 2, 1], make_ball(3)),
        "simplex211" => (vec![2, 1, 1], make_simplex(3)),
        "ball111" => (vec![1, 1, 1], make_ball(3)),
        _ => panic!("unknown case"),
    };
    let n: u32 = k.iter().sum();
    let f = SparsePolynomial::monomial(MultiIndex::new(k), 1.0);
    let opts = HierarchyOptions {
        t_min: Some(n + 1),
        t_max: Some(n + 1),
        ..Default::default()
    };
    let rep = run_hierarchy(&f, n, &domain, &opts).unwrap();
    println!("levels: {:#?}", rep.levels);
    println!("E = {:?}, certified = {}", rep.e_estimate, rep.certified);
    if let (Some(p), Some(m)) = (&rep.atoms_plus, &rep.atoms_minus) {
        println!("atoms+: {}", p.len());
        for (a, w) in p.atoms.iter().zip(&p.weights) {
            println!("  {:?}  w={:.6}", a.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>(), w);
        }
        println!("atoms-: {}", m.len());
        for (a, w) in m.atoms.iter().zip(&m.weights) {
            println!("  {:?}  w={:.6}", a.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>(), w);
        }
        let sig = build_signature(p, m, MERGE_TOL).unwrap();
        println!("signature size: {}", sig.len());
        let ext = verify_extremal_signature(&sig, domain.dimension(), n - 1);
        println!("extremal: {} (null dim {})", ext.extremal, ext.null_dimension);
    }
}
