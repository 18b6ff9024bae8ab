//! Plain-text case description.
//!
//! ```text
//! name = my_case
//!
//! [grid]
//! lower = -0.5 -0.5
//! upper = 0.5 0.5
//! cells = h h            # `h` follows the refinement level, integers are fixed
//!
//! [forest]
//! nodes 2 trees 1
//! node 0 dirichlet 0.0
//! node 1 terminal 0.0 0.0
//! edge 0 1 1.0
//!
//! [coefficients]
//! kd = 1 1                             # per-axis permeability
//! source = annulus 0 0 0.3 0.4 1       # center.., r2, r3, rd0  (or `none`)
//! transfer = 1 1.0 0.1 0.2             # terminal kt0 r0 r1 [below|above axis threshold]
//! node_source = 1 0.0                  # node value, repeatable
//!
//! [reference]
//! kind = series                        # or `finegrid 64`, `none`
//! ```
//!
//! The `series` reference takes its radial parameters from the case itself
//! and is rejected if the case is not of the radially symmetric form.

use std::fmt::Write as _;

use crate::geom::{parse_forest_lines, write_forest, Compartment, Forest, GeomError, Side, TransferProfile};
use crate::model::{AxisCells, CaseSpec, GridSpec, ModelError, RadialParams, ReferenceKind, SourceSpec, TransferSpec};

fn err(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse { line, message: msg.into() }
}

fn floats(v: &str, line: usize) -> Result<Vec<f64>, ModelError> {
    v.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| err(line, format!("bad number `{t}`")))).collect()
}

fn one<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ModelError> {
    let t = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    t.parse().map_err(|_| err(line, format!("bad {what} `{t}`")))
}

#[derive(PartialEq)]
enum Section {
    Top,
    Grid,
    Forest,
    Coefficients,
    Reference,
}

enum RefChoice {
    Series,
    Fine(usize),
    None,
}

pub fn parse_case_config(text: &str) -> Result<CaseSpec, ModelError> {
    let mut section = Section::Top;
    let mut name = String::from("custom");
    let (mut lower, mut upper, mut cells) = (None, None, None);
    let mut forest_lines: Vec<&str> = Vec::new();
    let mut forest_start = 0;
    let mut kd = None;
    let mut source = SourceSpec::None;
    let mut transfers = Vec::new();
    let mut node_sources = Vec::new();
    let mut reference = RefChoice::None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') && content.ends_with(']') {
            section = match &content[1..content.len() - 1] {
                "grid" => Section::Grid,
                "forest" => {
                    forest_start = line + 1;
                    Section::Forest
                }
                "coefficients" => Section::Coefficients,
                "reference" => Section::Reference,
                other => return Err(err(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        if section == Section::Forest {
            if forest_lines.is_empty() {
                forest_start = line;
            }
            // keep blank-line alignment: pad with empties up to this line
            while forest_start + forest_lines.len() < line {
                forest_lines.push("");
            }
            forest_lines.push(raw);
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| err(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match (&section, key) {
            (Section::Top, "name") => name = value.to_string(),
            (Section::Grid, "lower") => lower = Some(floats(value, line)?),
            (Section::Grid, "upper") => upper = Some(floats(value, line)?),
            (Section::Grid, "cells") => {
                let parsed = value
                    .split_whitespace()
                    .map(|t| match t {
                        "h" => Ok(AxisCells::Refined),
                        n => n
                            .parse::<usize>()
                            .ok()
                            .filter(|&n| n > 0)
                            .map(AxisCells::Fixed)
                            .ok_or_else(|| err(line, format!("bad cell count `{n}`"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                cells = Some(parsed);
            }
            (Section::Coefficients, "kd") => kd = Some(floats(value, line)?),
            (Section::Coefficients, "source") => {
                let mut toks = value.split_whitespace();
                source = match toks.next() {
                    Some("none") => SourceSpec::None,
                    Some("annulus") => {
                        let rest = floats(&toks.collect::<Vec<_>>().join(" "), line)?;
                        if rest.len() < 4 {
                            return Err(err(line, "annulus needs center coordinates, r2, r3 and rd0"));
                        }
                        let n = rest.len() - 3;
                        SourceSpec::Annulus { center: rest[..n].to_vec(), r2: rest[n], r3: rest[n + 1], rd0: rest[n + 2] }
                    }
                    _ => return Err(err(line, "source must be `none` or `annulus ...`")),
                };
            }
            (Section::Coefficients, "transfer") => {
                let mut toks = value.split_whitespace();
                let terminal = one(toks.next(), line, "terminal id")?;
                let kt0 = one(toks.next(), line, "kt0")?;
                let r0 = one(toks.next(), line, "r0")?;
                let r1 = one(toks.next(), line, "r1")?;
                let profile = TransferProfile::new(kt0, r0, r1).map_err(|e| err(line, e.to_string()))?;
                let compartment = match toks.next() {
                    None => None,
                    Some(s) => {
                        let side = match s {
                            "below" => Side::Below,
                            "above" => Side::Above,
                            other => return Err(err(line, format!("bad compartment side `{other}`"))),
                        };
                        let axis = one(toks.next(), line, "compartment axis")?;
                        let threshold = one(toks.next(), line, "compartment threshold")?;
                        Some(Compartment { axis, side, threshold })
                    }
                };
                if let Some(extra) = toks.next() {
                    return Err(err(line, format!("unexpected token `{extra}`")));
                }
                transfers.push(TransferSpec { terminal, profile, compartment });
            }
            (Section::Coefficients, "node_source") => {
                let mut toks = value.split_whitespace();
                let id = one(toks.next(), line, "node id")?;
                let v = one(toks.next(), line, "value")?;
                node_sources.push((id, v));
            }
            (Section::Reference, "kind") => {
                let mut toks = value.split_whitespace();
                reference = match toks.next() {
                    Some("series") => RefChoice::Series,
                    Some("finegrid") => RefChoice::Fine(one(toks.next(), line, "fine resolution")?),
                    Some("none") => RefChoice::None,
                    _ => return Err(err(line, "kind must be `series`, `finegrid N` or `none`")),
                };
            }
            _ => return Err(err(line, format!("unknown key `{key}` in this section"))),
        }
    }

    let forest = if forest_lines.is_empty() {
        Forest::empty()
    } else {
        parse_forest_lines(forest_lines.iter().copied(), forest_start).map_err(|e| match e {
            GeomError::Parse { line, message } => err(line, message),
            other => ModelError::Geom(other),
        })?
    };
    let missing = |what: &str| err(0, format!("missing {what}"));
    let lower = lower.ok_or_else(|| missing("grid lower"))?;
    let upper = upper.ok_or_else(|| missing("grid upper"))?;
    let cells = cells.ok_or_else(|| missing("grid cells"))?;
    let kd = kd.ok_or_else(|| missing("coefficients kd"))?;
    let mut spec = CaseSpec {
        name,
        grid: GridSpec { lower, upper, cells },
        forest,
        kd,
        transfers,
        source,
        node_sources,
        reference: ReferenceKind::None,
    };
    spec.reference = match reference {
        RefChoice::None => ReferenceKind::None,
        RefChoice::Fine(n) => ReferenceKind::FineGrid { inv_h: n },
        RefChoice::Series => ReferenceKind::Series(radial_params_of(&spec)?),
    };
    spec.validate()?;
    Ok(spec)
}

/// Read the radial parameters off a case of the single-edge form.
fn radial_params_of(spec: &CaseSpec) -> Result<RadialParams, ModelError> {
    let bad = || ModelError::Invalid("series reference needs one Dirichlet->terminal edge and an annulus source".into());
    let f = &spec.forest;
    if f.num_edges() != 1 || spec.transfers.len() != 1 || spec.kd.is_empty() {
        return Err(bad());
    }
    let e = f.edges()[0];
    let pn0 = f.node(e.tail).kind.dirichlet_value().ok_or_else(bad)?;
    let SourceSpec::Annulus { r2, r3, rd0, .. } = spec.source else {
        return Err(bad());
    };
    let t = &spec.transfers[0].profile;
    Ok(RadialParams { r0: t.r0, r1: t.r1, r2, r3, kt0: t.kt0, kd: spec.kd[0], kn: e.conductivity, rd0, pn0 })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

pub fn write_case_config(spec: &CaseSpec) -> String {
    let mut out = String::new();
    writeln!(out, "name = {}\n", spec.name).unwrap();
    writeln!(out, "[grid]").unwrap();
    writeln!(out, "lower = {}", join(&spec.grid.lower)).unwrap();
    writeln!(out, "upper = {}", join(&spec.grid.upper)).unwrap();
    let cells: Vec<String> = spec
        .grid
        .cells
        .iter()
        .map(|c| match c {
            AxisCells::Refined => "h".to_string(),
            AxisCells::Fixed(n) => n.to_string(),
        })
        .collect();
    writeln!(out, "cells = {}\n", cells.join(" ")).unwrap();
    if spec.forest.num_nodes() > 0 {
        writeln!(out, "[forest]").unwrap();
        out.push_str(&write_forest(&spec.forest));
        out.push('\n');
    }
    writeln!(out, "[coefficients]").unwrap();
    writeln!(out, "kd = {}", join(&spec.kd)).unwrap();
    match &spec.source {
        SourceSpec::None => writeln!(out, "source = none").unwrap(),
        SourceSpec::Annulus { center, r2, r3, rd0 } => {
            writeln!(out, "source = annulus {} {r2:?} {r3:?} {rd0:?}", join(center)).unwrap()
        }
    }
    for t in &spec.transfers {
        let p = t.profile;
        write!(out, "transfer = {} {:?} {:?} {:?}", t.terminal, p.kt0, p.r0, p.r1).unwrap();
        if let Some(c) = t.compartment {
            let side = match c.side {
                Side::Below => "below",
                Side::Above => "above",
            };
            write!(out, " {side} {} {:?}", c.axis, c.threshold).unwrap();
        }
        out.push('\n');
    }
    for (id, v) in &spec.node_sources {
        writeln!(out, "node_source = {id} {v:?}").unwrap();
    }
    writeln!(out, "\n[reference]").unwrap();
    match spec.reference {
        ReferenceKind::Series(_) => writeln!(out, "kind = series").unwrap(),
        ReferenceKind::FineGrid { inv_h } => writeln!(out, "kind = finegrid {inv_h}").unwrap(),
        ReferenceKind::None => writeln!(out, "kind = none").unwrap(),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{case1, case2, Case1Variant};

    #[test]
    fn builtin_cases_round_trip() {
        for spec in [case1(Case1Variant::A), case1(Case1Variant::B), case2()] {
            let text = write_case_config(&spec);
            let back = parse_case_config(&text).unwrap();
            assert_eq!(back, spec, "{text}");
        }
    }

    #[test]
    fn module_doc_example_parses() {
        let text = "\
name = my_case

[grid]
lower = -0.5 -0.5
upper = 0.5 0.5
cells = h h

[forest]
nodes 2 trees 1
node 0 dirichlet 0.0
node 1 terminal 0.0 0.0
edge 0 1 1.0

[coefficients]
kd = 1 1
source = annulus 0 0 0.3 0.4 1
transfer = 1 1.0 0.1 0.2

[reference]
kind = series
";
        let spec = parse_case_config(text).unwrap();
        assert_eq!(spec, CaseSpec { name: "my_case".into(), ..case1(Case1Variant::A) });
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "[grid]\nlower = 0 0\nupper = 1 x\n";
        assert_eq!(parse_case_config(text).unwrap_err(), err(3, "bad number `x`"));
        let text = "[grid]\nlower = 0 0\nupper = 1 1\ncells = 4 4\n[forest]\nnodes 1 trees 1\nnode 0 neumann\nbogus\n";
        match parse_case_config(text) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_case_config("[nowhere]\n").is_err());
    }

    #[test]
    fn series_rejected_for_non_radial_case() {
        let mut text = write_case_config(&case2());
        text = text.replace("kind = finegrid 64", "kind = series");
        assert!(parse_case_config(&text).is_err());
    }
}
