//! Plain-text renderings for `--pretty`.

use std::fmt::Write;

use radocolor_core::engine::{Claim, Justification, ProofRow, ProofTree, ValidationReport};
use radocolor_core::Rational;

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

pub fn claim(c: &Claim) -> String {
    match c {
        Claim::ForcedSet { node, options } => format!("c({node}) in {{{}}}", join(options, ",")),
        Claim::ForcedColor { node, color } => format!("c({node}) = {color}"),
        Claim::Contradiction { node } => format!("c({node}) !?"),
    }
}

pub fn justification(j: &Justification, node: &Rational) -> String {
    match j {
        Justification::Ratio { from, ratio } => format!("{from}*{ratio} = {node}"),
        Justification::Tuple { values } => format!("({})", join(values, ",")),
        Justification::Seed => "seed".into(),
        Justification::Symmetry { color } => format!("same as {color}"),
    }
}

fn row(r: &ProofRow, colors: u32) -> Vec<String> {
    let indent = "  ".repeat(r.depth.saturating_sub(1) as usize);
    let assumption = match &r.assumption {
        Some(a) => format!("{indent}c({}) = {}", a.node, a.color),
        None => "seeds".into(),
    };
    let mut cells = vec![assumption, claim(&r.claim)];
    for k in 0..colors {
        cells.push(
            r.per_color_reasons
                .get(&k)
                .map(|j| justification(j, r.claim.node()))
                .unwrap_or_default(),
        );
    }
    cells
}

/// The proof as an aligned table, one row per line.
pub fn proof_table(tree: &ProofTree) -> String {
    let mut header = vec!["assumption".to_string(), "claim".to_string()];
    header.extend((0..tree.colors).map(|k| format!("why not {k}")));
    let mut lines = vec![header];
    lines.extend(tree.rows.iter().map(|r| row(r, tree.colors)));
    let widths: Vec<usize> = (0..lines[0].len())
        .map(|i| {
            lines
                .iter()
                .map(|l| l[i].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for l in &lines {
        let cells: Vec<String> = l
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
    }
    out
}

pub fn report(r: &ValidationReport) -> String {
    let mut out = String::new();
    if r.is_valid() {
        let _ = writeln!(out, "valid: {} rows checked", r.rows_checked);
        return out;
    }
    let _ = writeln!(
        out,
        "invalid: {} violations in {} rows",
        r.violations.len(),
        r.rows_checked
    );
    for v in &r.violations {
        let at = v
            .row
            .map(|i| format!("row {i}"))
            .unwrap_or_else(|| "tree".into());
        let _ = writeln!(out, "  {at}: {:?}: {}", v.kind, v.message);
    }
    out
}

/// A coloring class as a digit string when every color is a single digit.
pub fn class(colors: &[u32]) -> String {
    if colors.iter().all(|&c| c < 10) {
        colors.iter().map(|c| char::from(b'0' + *c as u8)).collect()
    } else {
        join(colors, ",")
    }
}
