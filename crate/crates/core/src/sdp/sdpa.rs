//! SDPA sparse-format export and import.
//!
//! The format describes the pair
//!
//! ```text
//! (P) min c·x  s.t.  X = Σ_i x_i F_i − F_0,  X ⪰ 0
//! (D) max tr(F_0 Y)  s.t.  tr(F_i Y) = c_i,  Y ⪰ 0
//! ```
//!
//! Our model maps onto the dual side: the PSD blocks become blocks of `Y`,
//! each free scalar is split into a nonnegative pair `(z⁺, z⁻)` stored in one
//! diagonal block, equalities become the `tr(F_i Y) = c_i` rows, and the
//! objective (canonicalized to `minimize`) is written as `F_0 = −C`, so the
//! optimal value of the exported file is the negated canonical optimum.
//! Parsing returns the equivalent minimize-form [`SdpProblem`]; diagonal
//! blocks come back as 1×1 blocks.

use std::collections::BTreeMap;

use super::{Direction, LinearFunctional, SdpProblem};
use crate::error::{CoreError, Result};

fn fmt_val(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render the problem in SDPA sparse format.  Deterministic: the same
/// problem always produces byte-identical text.
pub fn export_sdpa(problem: &SdpProblem) -> Result<String> {
    problem.validate()?;
    let m = problem.num_equalities();
    if m == 0 {
        return Err(CoreError::Format(
            "SDPA export needs at least one equality constraint".into(),
        ));
    }
    let sense = match problem.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let p = problem.num_scalars();
    let nblocks = problem.num_blocks() + usize::from(p > 0);

    let mut out = String::new();
    out.push_str(&format!("{m}\n"));
    out.push_str(&format!("{nblocks}\n"));
    let mut sizes: Vec<String> = problem.block_sizes().iter().map(|s| s.to_string()).collect();
    if p > 0 {
        sizes.push(format!("-{}", 2 * p));
    }
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let cvec: Vec<String> = problem.equalities.iter().map(|(_, b)| fmt_val(*b)).collect();
    out.push_str(&cvec.join(" "));
    out.push('\n');

    // Entries keyed (matno, blkno, i, j), merged and sorted; 1-based indices.
    let mut entries: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    let diag_block = problem.num_blocks() + 1;
    let mut add_functional = |matno: usize, f: &LinearFunctional, scale: f64| {
        for e in &f.matrix_terms {
            let (r, c) = (e.row.min(e.col), e.row.max(e.col));
            *entries.entry((matno, e.block + 1, r + 1, c + 1)).or_insert(0.0) +=
                scale * e.value;
        }
        for &(k, v) in &f.scalar_terms {
            *entries.entry((matno, diag_block, k + 1, k + 1)).or_insert(0.0) += scale * v;
            *entries
                .entry((matno, diag_block, p + k + 1, p + k + 1))
                .or_insert(0.0) -= scale * v;
        }
    };
    // F_0 = −(sense · objective).
    add_functional(0, &problem.objective, -sense);
    for (i, (f, _)) in problem.equalities.iter().enumerate() {
        add_functional(i + 1, f, 1.0);
    }

    for ((matno, blk, i, j), v) in entries {
        if v != 0.0 {
            out.push_str(&format!("{matno} {blk} {i} {j} {}\n", fmt_val(v)));
        }
    }
    Ok(out)
}

/// Parse SDPA sparse text into the equivalent minimize-form problem: blocks
/// of `Y`, objective `minimize tr(−F_0, Y)`, equalities `tr(F_i Y) = c_i`.
pub fn parse_sdpa(text: &str) -> Result<SdpProblem> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('*') && !l.starts_with('"'));
    let mut next_line = |what: &str| -> Result<&str> {
        lines
            .next()
            .ok_or_else(|| CoreError::Format(format!("missing {what} line")))
    };
    let clean = |l: &str| -> String {
        l.replace(['{', '}', '(', ')', ','], " ")
    };

    let m: usize = next_line("constraint count")?
        .split_whitespace()
        .next()
        .ok_or_else(|| CoreError::Format("empty constraint count".into()))?
        .parse()
        .map_err(|e| CoreError::Format(format!("bad constraint count: {e}")))?;
    let nblocks: usize = next_line("block count")?
        .split_whitespace()
        .next()
        .ok_or_else(|| CoreError::Format("empty block count".into()))?
        .parse()
        .map_err(|e| CoreError::Format(format!("bad block count: {e}")))?;
    let sizes_raw: Vec<i64> = clean(next_line("block sizes")?)
        .split_whitespace()
        .map(|t| t.parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CoreError::Format(format!("bad block size: {e}")))?;
    if sizes_raw.len() != nblocks {
        return Err(CoreError::Format(format!(
            "expected {nblocks} block sizes, found {}",
            sizes_raw.len()
        )));
    }
    let cvec: Vec<f64> = clean(next_line("objective vector")?)
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CoreError::Format(format!("bad objective value: {e}")))?;
    if cvec.len() != m {
        return Err(CoreError::Format(format!(
            "expected {m} objective values, found {}",
            cvec.len()
        )));
    }

    // Map SDPA blocks to model blocks; a diagonal block of size k becomes k
    // 1×1 blocks.
    let mut block_sizes: Vec<usize> = Vec::new();
    let mut offsets: Vec<(usize, bool, usize)> = Vec::new(); // (first model block, diagonal?, size)
    for &s in &sizes_raw {
        if s > 0 {
            offsets.push((block_sizes.len(), false, s as usize));
            block_sizes.push(s as usize);
        } else if s < 0 {
            let k = (-s) as usize;
            offsets.push((block_sizes.len(), true, k));
            for _ in 0..k {
                block_sizes.push(1);
            }
        } else {
            return Err(CoreError::Format("zero block size".into()));
        }
    }

    let mut problem = SdpProblem::new(block_sizes, 0, Direction::Minimize);
    let mut funcs: Vec<LinearFunctional> = (0..=m).map(|_| LinearFunctional::new()).collect();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(CoreError::Format(format!("bad entry line: '{line}'")));
        }
        let matno: usize = toks[0]
            .parse()
            .map_err(|e| CoreError::Format(format!("bad matno: {e}")))?;
        let blk: usize = toks[1]
            .parse()
            .map_err(|e| CoreError::Format(format!("bad blkno: {e}")))?;
        let i: usize = toks[2]
            .parse()
            .map_err(|e| CoreError::Format(format!("bad row: {e}")))?;
        let j: usize = toks[3]
            .parse()
            .map_err(|e| CoreError::Format(format!("bad col: {e}")))?;
        let v: f64 = toks[4]
            .parse()
            .map_err(|e| CoreError::Format(format!("bad value: {e}")))?;
        if matno > m || blk == 0 || blk > offsets.len() || i == 0 || j == 0 {
            return Err(CoreError::Format(format!("entry out of range: '{line}'")));
        }
        let (first, diagonal, size) = offsets[blk - 1];
        if i > size || j > size {
            return Err(CoreError::Format(format!("entry outside block: '{line}'")));
        }
        if diagonal {
            if i != j {
                return Err(CoreError::Format(format!(
                    "off-diagonal entry in diagonal block: '{line}'"
                )));
            }
            funcs[matno].push_matrix(first + i - 1, 0, 0, v);
        } else {
            funcs[matno].push_matrix(first, i - 1, j - 1, v);
        }
    }

    // minimize tr(−F_0, Y)
    let f0 = funcs.remove(0);
    let mut objective = LinearFunctional::new();
    for e in &f0.matrix_terms {
        objective.push_matrix(e.block, e.row, e.col, -e.value);
    }
    problem.objective = objective;
    for (f, rhs) in funcs.into_iter().zip(cvec) {
        problem.add_equality(f, rhs);
    }
    problem.validate()?;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{solve, SolveOptions};

    #[test]
    fn toy_export_is_five_lines_and_stable() {
        // One 1×1 block, one constraint X = 1, zero objective.
        let mut p = SdpProblem::new(vec![1], 0, Direction::Minimize);
        p.add_equality(LinearFunctional::new().matrix(0, 0, 0, 1.0), 1.0);
        let text = export_sdpa(&p).unwrap();
        assert_eq!(text.lines().count(), 5, "{text}");
        assert_eq!(text, export_sdpa(&p).unwrap());
    }

    #[test]
    fn round_trip_reproduces_block_problem() {
        let mut p = SdpProblem::new(vec![2], 0, Direction::Minimize);
        p.objective = LinearFunctional::new()
            .matrix(0, 0, 0, 1.0)
            .matrix(0, 1, 1, 2.0);
        p.add_equality(
            LinearFunctional::new().matrix(0, 0, 1, 0.5).matrix(0, 0, 0, 1.0),
            1.25,
        );
        p.add_equality(LinearFunctional::new().matrix(0, 1, 1, 1.0), 3.0);
        let text = export_sdpa(&p).unwrap();
        let q = parse_sdpa(&text).unwrap();
        assert_eq!(q.block_sizes(), p.block_sizes());
        assert_eq!(q.num_equalities(), p.num_equalities());
        // Coefficients survive exactly (17 significant digits).
        for ((fp, bp), (fq, bq)) in p.equalities.iter().zip(&q.equalities) {
            assert_eq!(bp, bq);
            let xs = vec![nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[0.3, -0.7, -0.7, 2.1],
            )];
            assert!((fp.evaluate(&xs, &[]) - fq.evaluate(&xs, &[])).abs() < 1e-15);
        }
        // And a second export is byte-identical.
        assert_eq!(export_sdpa(&q).unwrap(), text);
    }

    #[test]
    fn free_scalar_encoding_solves_to_same_value() {
        // Golden-ratio problem with free scalars.
        let mut p = SdpProblem::new(vec![2], 2, Direction::Minimize);
        p.objective = LinearFunctional::new().scalar(1, 1.0);
        p.add_equality(LinearFunctional::new().matrix(0, 0, 0, 1.0), 1.0);
        p.add_equality(
            LinearFunctional::new().matrix(0, 0, 1, 1.0).scalar(0, -1.0),
            0.0,
        );
        p.add_equality(
            LinearFunctional::new().matrix(0, 1, 1, 1.0).scalar(1, -1.0),
            0.0,
        );
        p.add_equality(LinearFunctional::new().scalar(0, 1.0).scalar(1, 1.0), 1.0);

        let direct = solve(&p, &SolveOptions::default()).unwrap();
        let parsed = parse_sdpa(&export_sdpa(&p).unwrap()).unwrap();
        let via_file = solve(&parsed, &SolveOptions::default()).unwrap();
        assert!(via_file.status.is_usable());
        assert!(
            (via_file.objective - direct.objective).abs() < 1e-6,
            "{} vs {}",
            via_file.objective,
            direct.objective
        );
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_sdpa("").is_err());
        assert!(parse_sdpa("1\n1\n2\n1.0\n1 1 3 3 1.0\n").is_err());
        assert!(parse_sdpa("1\n1\n-2\n1.0\n1 1 1 2 1.0\n").is_err());
        assert!(parse_sdpa("not a number\n").is_err());
    }
}
