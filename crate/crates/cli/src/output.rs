//! Rendering helpers: JSON values, CSV rows, and the text table layout.

use cheby_core::domains::{DomainFamily, SemialgebraicDomain};
use cheby_core::extraction::Signature;
use cheby_core::hierarchy::LevelRecord;
use cheby_core::poly::SparsePolynomial;
use serde_json::{json, Value};

use crate::CliError;

/// Column scale factor used by the published tables for each degree.
pub fn table_scale(family: DomainFamily, n: u32) -> f64 {
    match (family, n) {
        (DomainFamily::Ball, 3) => 1e-1,
        (DomainFamily::Ball, _) => 1e-2,
        (DomainFamily::CrossPolytope, 3 | 4) => 1e-2,
        (DomainFamily::CrossPolytope, _) => 1e-3,
        (DomainFamily::Simplex, 3) => 1e-2,
        (DomainFamily::Simplex, 4) => 1e-3,
        (DomainFamily::Simplex, _) => 1e-4,
        (DomainFamily::Hypercube, _) => 1.0,
    }
}

/// Four significant digits, the published format.
pub fn format_mantissa(v: f64) -> String {
    if !v.is_finite() {
        return "nan".into();
    }
    if v.abs() >= 1.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.4}")
    }
}

pub fn domain_letter(family: DomainFamily) -> &'static str {
    match family {
        DomainFamily::Ball => "B",
        DomainFamily::CrossPolytope => "C",
        DomainFamily::Simplex => "S",
        DomainFamily::Hypercube => "H",
    }
}

pub fn k_string(k: &[u32]) -> String {
    k.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn domain_json(domain: &SemialgebraicDomain) -> Value {
    json!({
        "name": domain.name(),
        "d": domain.dimension(),
        "generators": domain.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
    })
}

pub fn level_json(level: &LevelRecord) -> Value {
    json!({
        "t": level.t,
        "ub_t": level.ub_t,
        "ub_prime_t": level.ub_prime_t,
        "sos_status": level.sos_status.as_str(),
        "moment_status": level.moment_status.as_str(),
        "certified": level.certified,
        "flat_order": level.flat_order,
        "ranks_plus": [level.ranks_plus.0, level.ranks_plus.1],
        "ranks_minus": [level.ranks_minus.0, level.ranks_minus.1],
    })
}

pub fn signature_json(sig: &Signature, certified: bool) -> Value {
    json!({
        "points": sig.points,
        "signs": sig.signs,
        "weights": sig.weights,
        "certified": certified,
    })
}

pub fn poly_json(p: &SparsePolynomial) -> Value {
    Value::String(p.to_string())
}

/// Write to the given path or stdout.
pub fn emit(text: &str, out: Option<&str>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(CliError::from),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// One computed table entry, ready for rendering.
pub struct TableEntry {
    pub k: Vec<u32>,
    pub n: u32,
    pub value: f64,
    pub certified: bool,
    pub level: Option<u32>,
    pub closed_form: Option<f64>,
}

pub fn table_csv(family: DomainFamily, entries: &[TableEntry]) -> String {
    let mut out =
        String::from("domain,k,n,value,mantissa,scale,certified,starred,level,closed_form\n");
    for e in entries {
        let scale = table_scale(family, e.n);
        out.push_str(&format!(
            "{},{},{},{:.12e},{},{:e},{},{},{},{}\n",
            family.name(),
            e.k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
            e.n,
            e.value,
            format_mantissa(e.value / scale),
            scale,
            e.certified,
            if e.certified { "" } else { "*" },
            e.level.map(|t| t.to_string()).unwrap_or_default(),
            e.closed_form
                .map(|v| format!("{v:.12e}"))
                .unwrap_or_default(),
        ));
    }
    out
}

pub fn table_json(family: DomainFamily, entries: &[TableEntry]) -> Value {
    json!({
        "schema": 1,
        "command": "table",
        "domain": family.name(),
        "entries": entries.iter().map(|e| {
            let scale = table_scale(family, e.n);
            json!({
                "k": e.k,
                "n": e.n,
                "value": e.value,
                "mantissa": format_mantissa(e.value / scale),
                "scale": scale,
                "certified": e.certified,
                "starred": !e.certified,
                "level": e.level,
                "closed_form": e.closed_form,
            })
        }).collect::<Vec<_>>(),
    })
}

/// Columns per degree, one partition per row, mantissas scaled per column.
pub fn table_text(family: DomainFamily, entries: &[TableEntry]) -> String {
    let mut degrees: Vec<u32> = entries.iter().map(|e| e.n).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let letter = domain_letter(family);
    let columns: Vec<Vec<String>> = degrees
        .iter()
        .map(|&n| {
            entries
                .iter()
                .filter(|e| e.n == n)
                .map(|e| {
                    format!(
                        "E(({}),{}) = {}{}",
                        k_string(&e.k),
                        letter,
                        format_mantissa(e.value / table_scale(family, n)),
                        if e.certified { "" } else { "*" }
                    )
                })
                .collect()
        })
        .collect();
    let headers: Vec<String> = degrees
        .iter()
        .map(|&n| format!("degree n={} (x{:e})", n, table_scale(family, n)))
        .collect();
    let widths: Vec<usize> = headers
        .iter()
        .zip(&columns)
        .map(|(h, col)| col.iter().map(String::len).chain([h.len()]).max().unwrap())
        .collect();
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    for (h, w) in headers.iter().zip(&widths) {
        out.push_str(&format!("{h:<w$} | ", w = w));
    }
    out.push('\n');
    for w in &widths {
        out.push_str(&"-".repeat(*w));
        out.push_str("-+-");
    }
    out.push('\n');
    for r in 0..rows {
        for (col, w) in columns.iter().zip(&widths) {
            let cell = col.get(r).map(String::as_str).unwrap_or("");
            out.push_str(&format!("{cell:<w$} | ", w = w));
        }
        out.push('\n');
    }
    out
}
