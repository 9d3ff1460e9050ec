//! Subcommand implementations.

use rayon::prelude::*;
use serde_json::{json, Value};

use cheby_core::closedform::{
    ball_221_constant, ball_221_polynomial, ball_221_signature, ball2d_best_approximant,
    face_coordinates, hypercube_best_approximant, known_error, oracle_extremal_points,
    oracle_uniform_norm, simplex2d_best_approximant, simplex_211_constants,
    simplex_211_polynomial, simplex_211_signature,
};
use cheby_core::domains::{
    canonical_exponents, canonicalize_exponent, reduce_zero_exponents, DomainFamily,
};
use cheby_core::extraction::{
    build_signature, extremal_support, verify_equioscillation, verify_extremal_signature,
    Signature, MERGE_TOL,
};
use cheby_core::hierarchy::{level_threshold, run_hierarchy, HierarchyOptions, HierarchyReport};
use cheby_core::poly::{MultiIndex, SparsePolynomial};
use cheby_core::sdp::export_sdpa as sdp_export;

use crate::output::{self, emit, TableEntry};
use crate::{
    CliError, ClosedFormArgs, ComputeArgs, ExportArgs, TableArgs, VerifyArgs,
};

fn parse_k(text: &str) -> Result<Vec<u32>, CliError> {
    let parts: Result<Vec<u32>, _> = text.split(',').map(|p| p.trim().parse::<u32>()).collect();
    let k = parts.map_err(|e| CliError::invalid(format!("bad exponent '{text}': {e}")))?;
    if k.is_empty() {
        return Err(CliError::invalid("empty exponent"));
    }
    Ok(k)
}

fn parse_family(name: &str) -> Result<DomainFamily, CliError> {
    DomainFamily::parse(name).map_err(|e| CliError::invalid(e.to_string()))
}

fn configure_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Everything one monomial instance produces, with coordinates lifted back
/// to the original variable order.
struct InstanceOutcome {
    original_k: Vec<u32>,
    canonical_k: Vec<u32>,
    reduced_k: Vec<u32>,
    family: DomainFamily,
    n: u32,
    reduced: bool,
    report: HierarchyReport,
    signature: Option<Signature>,
    signature_extremal: Option<bool>,
    best_approximant: Option<SparsePolynomial>,
    closed_form: Option<(f64, String, String)>,
}

fn compute_instance(
    original_k: &[u32],
    family: DomainFamily,
    t_min: Option<u32>,
    t_max: Option<u32>,
    seed: u64,
    force: bool,
) -> Result<InstanceOutcome, CliError> {
    if original_k.iter().all(|&e| e == 0) {
        return Err(CliError::invalid(
            "exponent is identically zero: nothing to approximate",
        ));
    }
    let d = original_k.len();
    let k = MultiIndex::new(original_k.to_vec());
    let canonical = canonicalize_exponent(&k);
    // Stable argsort of the original exponent realizes the permutation.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(original_k[i]));

    let domain = family.build(d)?;
    let (witness, reduced_domain) = reduce_zero_exponents(&canonical, &domain)?;
    let reduced = witness.kept_indices.len() < d;
    // Reduced coordinate j lives at original position order[kept[j]].
    let coord_map: Vec<usize> = witness.kept_indices.iter().map(|&i| order[i]).collect();

    let n = canonical.degree();
    let f = SparsePolynomial::monomial(witness.reduced_exponent.clone(), 1.0);
    let opts = HierarchyOptions {
        t_min,
        t_max,
        force_level: force,
        extraction_seed: seed,
        ..Default::default()
    };
    let report = run_hierarchy(&f, n, &reduced_domain, &opts).map_err(CliError::from)?;

    let lift_point = |z: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; d];
        for (j, &pos) in coord_map.iter().enumerate() {
            x[pos] = z[j];
        }
        x
    };
    let lift_poly = |p: &SparsePolynomial| -> SparsePolynomial {
        SparsePolynomial::from_terms(
            d,
            p.terms().map(|(key, c)| {
                let mut e = vec![0u32; d];
                for (j, &pos) in coord_map.iter().enumerate() {
                    e[pos] = key.get(j);
                }
                (MultiIndex::new(e), c)
            }),
        )
    };

    let mut signature = None;
    let mut signature_extremal = None;
    if let (Some(plus), Some(minus)) = (&report.atoms_plus, &report.atoms_minus) {
        if let Ok(sig) = build_signature(plus, minus, MERGE_TOL) {
            let ext = verify_extremal_signature(&sig, reduced_domain.dimension(), n - 1);
            signature_extremal = Some(ext.extremal);
            let lifted = Signature {
                points: sig.points.iter().map(|p| lift_point(p)).collect(),
                signs: sig.signs.clone(),
                weights: ext.weights.unwrap_or(sig.weights.clone()),
            };
            signature = Some(lifted);
        }
    }
    let best_approximant = report.best_approximant.as_ref().map(&lift_poly);
    let closed_form = known_error(&witness.reduced_exponent, family)
        .map(|r| (r.value, r.expression, r.provenance.to_string()));

    Ok(InstanceOutcome {
        original_k: original_k.to_vec(),
        canonical_k: canonical.exponents().to_vec(),
        reduced_k: witness.reduced_exponent.exponents().to_vec(),
        family,
        n,
        reduced,
        report,
        signature,
        signature_extremal,
        best_approximant,
        closed_form,
    })
}

fn instance_json(out: &InstanceOutcome) -> Value {
    let domain = out
        .family
        .build(out.original_k.len())
        .expect("built once already");
    let mut v = json!({
        "schema": 1,
        "command": "compute",
        "k": out.original_k,
        "domain": out.family.name(),
        "domain_description": output::domain_json(&domain),
        "n": out.n,
        "levels": out.report.levels.iter().map(output::level_json).collect::<Vec<_>>(),
        "e_estimate": out.report.e_estimate,
        "certified": out.report.certified,
        "certified_level": out.report.certified_level,
    });
    let obj = v.as_object_mut().unwrap();
    if out.reduced || out.canonical_k != out.original_k {
        obj.insert(
            "reduction".into(),
            json!({
                "canonical_k": out.canonical_k,
                "reduced_k": out.reduced_k,
                "note": format!(
                    "solved as ({}) in dimension {}",
                    output::k_string(&out.reduced_k),
                    out.reduced_k.len()
                ),
            }),
        );
    }
    if let Some(sig) = &out.signature {
        obj.insert(
            "signature".into(),
            output::signature_json(sig, out.report.certified),
        );
        if let Some(ext) = out.signature_extremal {
            obj.insert("signature_extremal".into(), json!(ext));
        }
    }
    if let Some(p) = &out.best_approximant {
        obj.insert("best_approximant".into(), output::poly_json(p));
    }
    if let Some((value, expression, provenance)) = &out.closed_form {
        obj.insert(
            "closed_form".into(),
            json!({"value": value, "expression": expression, "provenance": provenance}),
        );
    }
    v
}

pub fn compute(args: ComputeArgs) -> Result<(), CliError> {
    configure_jobs(args.jobs);
    let k = parse_k(&args.k)?;
    let family = parse_family(&args.domain)?;
    let outcome = compute_instance(
        &k,
        family,
        args.t_min,
        args.t_max,
        args.seed,
        args.force_level,
    )?;

    if let Some(path) = &args.export_sdpa {
        let f = SparsePolynomial::monomial(MultiIndex::new(outcome.reduced_k.clone()), 1.0);
        let dom = family.build(outcome.reduced_k.len())?;
        let t = args
            .t_min
            .unwrap_or_else(|| level_threshold(outcome.n, &dom));
        let relax =
            cheby_core::hierarchy::assemble_moment_relaxation(&f, outcome.n, &dom, t, false)?;
        let text = sdp_export(&relax.problem)?;
        std::fs::write(path, text)?;
    }

    let value = instance_json(&outcome);
    match args.format.as_str() {
        "json" => emit(&serde_json::to_string_pretty(&value).unwrap(), args.out.as_deref()),
        "text" => {
            let mut text = format!(
                "E(({}),{}) ≈ {:.9e}  certified: {}",
                output::k_string(&outcome.original_k),
                output::domain_letter(family),
                outcome.report.e_estimate,
                outcome.report.certified,
            );
            if let Some((v, expr, _)) = &outcome.closed_form {
                text.push_str(&format!("\nclosed form: {v:.9e} = {expr}"));
            }
            for lvl in &outcome.report.levels {
                text.push_str(&format!(
                    "\n  t={}: ub={:?} ub'={:?} [{} / {}]{}",
                    lvl.t,
                    lvl.ub_t,
                    lvl.ub_prime_t,
                    lvl.sos_status.as_str(),
                    lvl.moment_status.as_str(),
                    if lvl.certified { " certified" } else { "" }
                ));
            }
            emit(&text, args.out.as_deref())
        }
        "csv" => {
            let entry = TableEntry {
                k: outcome.original_k.clone(),
                n: outcome.n,
                value: outcome.report.e_estimate,
                certified: outcome.report.certified,
                level: outcome.report.certified_level,
                closed_form: outcome.closed_form.as_ref().map(|c| c.0),
            };
            emit(&output::table_csv(family, &[entry]), args.out.as_deref())
        }
        other => Err(CliError::invalid(format!("unknown format '{other}'"))),
    }
}

pub fn table(args: TableArgs) -> Result<(), CliError> {
    configure_jobs(args.jobs);
    let family = parse_family(&args.domain)?;
    let d = 3usize;
    if args.n_max < d as u32 {
        return Err(CliError::invalid("n_max must be at least the dimension"));
    }
    let mut ks: Vec<Vec<u32>> = Vec::new();
    for n in d as u32..=args.n_max {
        for k in canonical_exponents(d, n) {
            ks.push(k.exponents().to_vec());
        }
    }
    let results: Vec<Result<InstanceOutcome, CliError>> = ks
        .par_iter()
        .map(|k| compute_instance(k, family, args.t_min, args.t_max, args.seed, false))
        .collect();
    let mut entries = Vec::with_capacity(results.len());
    for r in results {
        let out = r?;
        entries.push(TableEntry {
            k: out.original_k,
            n: out.n,
            value: out.report.e_estimate,
            certified: out.report.certified,
            level: out.report.certified_level.or(out.report.levels.last().map(|l| l.t)),
            closed_form: out.closed_form.map(|c| c.0),
        });
    }
    match args.format.as_str() {
        "text" => emit(&output::table_text(family, &entries), args.out.as_deref()),
        "csv" => emit(&output::table_csv(family, &entries), args.out.as_deref()),
        "json" => emit(
            &serde_json::to_string_pretty(&output::table_json(family, &entries)).unwrap(),
            args.out.as_deref(),
        ),
        other => Err(CliError::invalid(format!("unknown format '{other}'"))),
    }
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn empirical_signature(
    g: &SparsePolynomial,
    domain: &cheby_core::domains::SemialgebraicDomain,
) -> (f64, Signature) {
    let (norm, points) = oracle_extremal_points(g, domain, 60, 60, 1e-6);
    let m = points.len().max(1);
    let sig = Signature {
        signs: points
            .iter()
            .map(|(_, v)| if *v >= 0.0 { 1 } else { -1 })
            .collect(),
        weights: vec![1.0 / m as f64; points.len()],
        points: points.into_iter().map(|(p, _)| p).collect(),
    };
    (norm, sig)
}

/// Tensor grid of univariate Chebyshev extrema with product signs: the
/// classical signature of the hypercube construction.
fn hypercube_signature(k: &[u32]) -> Signature {
    let mut points = vec![Vec::new()];
    let mut signs = vec![1i8];
    for &ki in k {
        let mut next_points = Vec::new();
        let mut next_signs = Vec::new();
        for (p, s) in points.iter().zip(&signs) {
            for j in 0..=ki {
                let mut q = p.clone();
                q.push((j as f64 * std::f64::consts::PI / ki as f64).cos());
                next_points.push(q);
                next_signs.push(s * if j % 2 == 0 { 1 } else { -1 });
            }
        }
        points = next_points;
        signs = next_signs;
    }
    let m = points.len();
    Signature {
        points,
        signs,
        weights: vec![1.0 / m as f64; m],
    }
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let mut checks: Vec<Check> = Vec::new();
    let mut context = serde_json::Map::new();

    let (kind, kspec) = match args.name.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (args.name.as_str(), None),
    };
    match kind {
        "ball-221" => {
            let c = ball_221_constant().map_err(CliError::from)?;
            let p = ball_221_polynomial().map_err(CliError::from)?;
            let sig = ball_221_signature().map_err(CliError::from)?;
            let dom = DomainFamily::Ball.build(3)?;
            context.insert("a".into(), json!(c.a));
            context.insert("tau".into(), json!(c.tau));
            context.insert("signature_size".into(), json!(sig.len()));
            context.insert(
                "signature_points".into(),
                json!(sig.points),
            );
            let ext = verify_extremal_signature(&sig, 3, 4);
            checks.push(Check {
                name: "extremal-signature",
                pass: ext.extremal,
                detail: format!("null dimension {}", ext.null_dimension),
            });
            let eq = verify_equioscillation(&sig, &p, &dom, 1e-4).map_err(CliError::from)?;
            checks.push(Check {
                name: "equioscillation",
                pass: eq.ok,
                detail: format!("worst ratio {:.6}", eq.worst_ratio),
            });
            checks.push(Check {
                name: "oracle-norm",
                pass: (eq.norm - c.a).abs() <= 1e-5,
                detail: format!("norm {:.9e} vs a {:.9e}", eq.norm, c.a),
            });
        }
        "simplex-211" => {
            let c = simplex_211_constants().map_err(CliError::from)?;
            let p = simplex_211_polynomial().map_err(CliError::from)?;
            let sig = simplex_211_signature().map_err(CliError::from)?;
            let dom = DomainFamily::Simplex.build(3)?;
            context.insert("tau".into(), json!(c.tau));
            context.insert("sigma".into(), json!(c.sigma));
            context.insert("c".into(), json!(c.c));
            context.insert("error".into(), json!(c.error));
            context.insert("signature_size".into(), json!(sig.len()));
            context.insert("signature_points".into(), json!(sig.points));
            let ext = verify_extremal_signature(&face_coordinates(&sig), 2, 3);
            checks.push(Check {
                name: "extremal-signature",
                pass: ext.extremal,
                detail: format!("null dimension {}", ext.null_dimension),
            });
            let eq = verify_equioscillation(&sig, &p, &dom, 1e-4).map_err(CliError::from)?;
            checks.push(Check {
                name: "equioscillation",
                pass: eq.ok,
                detail: format!("worst ratio {:.6}", eq.worst_ratio),
            });
            checks.push(Check {
                name: "oracle-norm",
                pass: (eq.norm - c.error).abs() <= 1e-5,
                detail: format!("norm {:.9e} vs 1/(2c^2) {:.9e}", eq.norm, c.error),
            });
        }
        "hypercube" | "ball2d" | "simplex2d" => {
            let kspec = kspec
                .ok_or_else(|| CliError::invalid(format!("'{}' needs :K exponent", kind)))?;
            let k = parse_k(kspec)?;
            let canonical = canonicalize_exponent(&MultiIndex::new(k.clone()));
            if canonical.exponents().iter().any(|&e| e == 0) {
                return Err(CliError::invalid(
                    "verification exponents must be strictly positive",
                ));
            }
            let n = canonical.degree();
            let (family, p, expected, degree_cap): (DomainFamily, SparsePolynomial, f64, u32) =
                match kind {
                    "hypercube" => (
                        DomainFamily::Hypercube,
                        hypercube_best_approximant(&canonical).map_err(CliError::from)?,
                        2f64.powi(canonical.len() as i32 - n as i32),
                        n - 1,
                    ),
                    "ball2d" => {
                        if canonical.len() != 2 {
                            return Err(CliError::invalid("ball2d needs a 2-entry exponent"));
                        }
                        (
                            DomainFamily::Ball,
                            ball2d_best_approximant(&canonical).map_err(CliError::from)?,
                            2f64.powi(1 - n as i32),
                            n - 1,
                        )
                    }
                    _ => {
                        if canonical.len() != 2 {
                            return Err(CliError::invalid("simplex2d needs a 2-entry exponent"));
                        }
                        (
                            DomainFamily::Simplex,
                            simplex2d_best_approximant(&canonical).map_err(CliError::from)?,
                            2f64.powi(1 - 2 * n as i32),
                            n - 1,
                        )
                    }
                };
            let dom = family.build(canonical.len())?;
            let residual = SparsePolynomial::monomial(canonical.clone(), 1.0).sub(&p);
            context.insert("expected".into(), json!(expected));
            checks.push(Check {
                name: "approximant-degree",
                pass: p.degree() < n as i64,
                detail: format!("deg p = {}", p.degree()),
            });
            let (sig, used_exact) = if kind == "hypercube" {
                (hypercube_signature(canonical.exponents()), true)
            } else {
                // The oracle may return a whole curve of extremal points;
                // trim to the support of an annihilating measure first.
                let (_, raw) = empirical_signature(&residual, &dom);
                let trimmed = extremal_support(&raw, canonical.len(), degree_cap);
                (trimmed.unwrap_or(raw), false)
            };
            context.insert("signature_size".into(), json!(sig.len()));
            context.insert("signature_exact".into(), json!(used_exact));
            let ext = verify_extremal_signature(&sig, canonical.len(), degree_cap);
            checks.push(Check {
                name: "extremal-signature",
                pass: ext.extremal,
                detail: format!(
                    "{} points, null dimension {}",
                    sig.len(),
                    ext.null_dimension
                ),
            });
            let eq = verify_equioscillation(&sig, &residual, &dom, 1e-4).map_err(CliError::from)?;
            checks.push(Check {
                name: "equioscillation",
                pass: eq.ok,
                detail: format!("worst ratio {:.6}", eq.worst_ratio),
            });
            let norm = oracle_uniform_norm(&residual, &dom, 60, 60);
            checks.push(Check {
                name: "oracle-norm",
                pass: (norm - expected).abs() <= 1e-4 * expected.max(1e-12),
                detail: format!("norm {norm:.9e} vs expected {expected:.9e}"),
            });
        }
        other => {
            return Err(CliError::invalid(format!(
                "unknown verification '{other}' (expected ball-221, simplex-211, hypercube:K, ball2d:K, simplex2d:K)"
            )))
        }
    }

    let all_pass = checks.iter().all(|c| c.pass);
    match args.format.as_str() {
        "json" => {
            let v = json!({
                "schema": 1,
                "command": "verify",
                "name": args.name,
                "checks": checks.iter().map(|c| json!({
                    "name": c.name, "pass": c.pass, "detail": c.detail,
                })).collect::<Vec<_>>(),
                "context": Value::Object(context),
                "pass": all_pass,
            });
            emit(&serde_json::to_string_pretty(&v).unwrap(), args.out.as_deref())?;
        }
        _ => {
            let mut text = format!("verify {}\n", args.name);
            for (key, val) in &context {
                if key != "signature_points" {
                    text.push_str(&format!("  {key} = {val}\n"));
                }
            }
            for c in &checks {
                text.push_str(&format!(
                    "  check {:<20} {}  ({})\n",
                    c.name,
                    if c.pass { "pass" } else { "FAIL" },
                    c.detail
                ));
            }
            emit(text.trim_end(), args.out.as_deref())?;
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::verification("one or more checks failed"))
    }
}

pub fn export_sdpa(args: ExportArgs) -> Result<(), CliError> {
    let k = parse_k(&args.k)?;
    let family = parse_family(&args.domain)?;
    if k.iter().all(|&e| e == 0) {
        return Err(CliError::invalid("exponent is identically zero"));
    }
    let canonical = canonicalize_exponent(&MultiIndex::new(k));
    let domain = family.build(canonical.len())?;
    let (witness, reduced_domain) = reduce_zero_exponents(&canonical, &domain)?;
    let n = canonical.degree();
    let t = args
        .t
        .unwrap_or_else(|| level_threshold(n, &reduced_domain));
    let f = SparsePolynomial::monomial(witness.reduced_exponent.clone(), 1.0);
    let relax = cheby_core::hierarchy::assemble_moment_relaxation(&f, n, &reduced_domain, t, false)
        .map_err(CliError::from)?;
    let text = sdp_export(&relax.problem).map_err(CliError::from)?;
    std::fs::write(&args.out, &text)?;
    println!(
        "wrote {}: {} PSD blocks (sizes {:?}), {} scalars, {} equalities",
        args.out,
        relax.problem.num_blocks(),
        relax.problem.block_sizes(),
        relax.problem.num_scalars(),
        relax.problem.num_equalities()
    );
    Ok(())
}

pub fn closed_form(args: ClosedFormArgs) -> Result<(), CliError> {
    let k = parse_k(&args.k)?;
    let family = parse_family(&args.domain)?;
    if k.iter().all(|&e| e == 0) {
        return Err(CliError::invalid("exponent is identically zero"));
    }
    let canonical = canonicalize_exponent(&MultiIndex::new(k.clone()));
    let domain = family.build(canonical.len())?;
    let (witness, _) = reduce_zero_exponents(&canonical, &domain)?;
    let result = known_error(&witness.reduced_exponent, family);
    let v = match result {
        Some(r) => json!({
            "schema": 1,
            "command": "closed-form",
            "k": k,
            "domain": family.name(),
            "known": true,
            "value": r.value,
            "expression": r.expression,
            "provenance": r.provenance,
            "best_approximant": r.best_approximant.as_ref().map(|p| p.to_string()),
        }),
        None => json!({
            "schema": 1,
            "command": "closed-form",
            "k": k,
            "domain": family.name(),
            "known": false,
        }),
    };
    emit(&serde_json::to_string_pretty(&v).unwrap(), args.out.as_deref())
}
