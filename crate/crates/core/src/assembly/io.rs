//! Matrix Market, plain vector and state CSV files.

use std::fmt::Write as _;

use crate::assembly::{AssemblyError, LumpedBlocks, MixedState};
use crate::geom::{CartesianGrid, Forest};
use crate::sparse::{CsrMatrix, TripletBuilder};

fn parse_err(line: usize, message: impl Into<String>) -> AssemblyError {
    AssemblyError::Parse { line, message: message.into() }
}

/// Coordinate `real general` format, one-based indices, 17 significant digits.
pub fn write_matrix_market(a: &CsrMatrix) -> String {
    let mut out = String::with_capacity(32 * a.nnz() + 64);
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz()).unwrap();
    for (i, j, v) in a.triplets() {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v).unwrap();
    }
    out
}

/// Read coordinate `real`/`integer` matrices, `general` or `symmetric`.
pub fn read_matrix_market(text: &str) -> Result<CsrMatrix, AssemblyError> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let banner: Vec<String> = banner.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if banner.len() != 5 || banner[0] != "%%matrixmarket" || banner[1] != "matrix" || banner[2] != "coordinate" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    if banner[3] != "real" && banner[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field `{}`", banner[3])));
    }
    let symmetric = match banner[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut builder: Option<TripletBuilder> = None;
    let mut seen = 0;
    for (k, raw) in lines {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| parse_err(line, format!("bad {what} `{s}`")));
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `rows cols entries`"));
                }
                let (m, n, nnz) = (num(toks[0], "rows")?, num(toks[1], "cols")?, num(toks[2], "entries")?);
                size = Some((m, n, nnz));
                builder = Some(TripletBuilder::with_capacity(m, n, if symmetric { 2 * nnz } else { nnz }));
            }
            Some((m, n, _)) => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `i j value`"));
                }
                let (i, j) = (num(toks[0], "row")?, num(toks[1], "column")?);
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(parse_err(line, format!("index ({i}, {j}) outside {m}x{n}")));
                }
                let v: f64 = toks[2].parse().map_err(|_| parse_err(line, format!("bad value `{}`", toks[2])))?;
                let b = builder.as_mut().expect("set with size");
                b.push(i - 1, j - 1, v);
                if symmetric && i != j {
                    b.push(j - 1, i - 1, v);
                }
                seen += 1;
            }
        }
    }
    let (_, _, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if seen != nnz {
        return Err(parse_err(1, format!("size line declares {nnz} entries, found {seen}")));
    }
    Ok(builder.expect("set with size").build())
}

/// One value per line, `%` or `#` comment lines allowed.
pub fn read_vector(text: &str) -> Result<Vec<f64>, AssemblyError> {
    let mut v = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        v.push(t.parse().map_err(|_| parse_err(k + 1, format!("bad value `{t}`")))?);
    }
    Ok(v)
}

pub fn write_vector(v: &[f64]) -> String {
    let mut out = String::with_capacity(24 * v.len());
    for x in v {
        writeln!(out, "{x:.16e}").unwrap();
    }
    out
}

/// Sectioned CSV: cells (index, center, pD), faces (index, axis, minus,
/// plus, qD), transfer rows (terminal, cell, qS), nodes (id, pN) and edges
/// (index, tail, head, qN). Sections are separated by a
/// blank line and each starts with its own header.
pub fn write_state_csv(grid: &CartesianGrid, forest: &Forest, blocks: &LumpedBlocks, state: &MixedState) -> String {
    let mut out = String::new();
    let axes: Vec<String> = (0..grid.dim()).map(|a| format!("x{a}")).collect();
    writeln!(out, "cell,{},pD", axes.join(",")).unwrap();
    for (c, p) in state.pd.iter().enumerate() {
        let x: Vec<String> = grid.cell_center(c).iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(out, "{c},{},{p:.16e}", x.join(",")).unwrap();
    }
    writeln!(out, "\nface,axis,minus,plus,qD").unwrap();
    for (k, (face, q)) in grid.faces().iter().zip(&state.qd).enumerate() {
        writeln!(out, "{k},{},{},{},{q:.16e}", face.axis, face.minus, face.plus).unwrap();
    }
    writeln!(out, "\nterminal,cell,qS").unwrap();
    for ((t, c), q) in blocks.transfer_rows.iter().zip(&state.qs) {
        writeln!(out, "{t},{c},{q:.16e}").unwrap();
    }
    writeln!(out, "\nnode,pN").unwrap();
    for (id, p) in state.pn.iter().enumerate() {
        writeln!(out, "{id},{p:.16e}").unwrap();
    }
    writeln!(out, "\nedge,tail,head,qN").unwrap();
    for (l, (e, q)) in forest.edges().iter().zip(&state.qn).enumerate() {
        writeln!(out, "{l},{},{},{q:.16e}", e.tail, e.head).unwrap();
    }
    out
}
