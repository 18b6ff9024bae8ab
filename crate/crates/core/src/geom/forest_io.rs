//! Plain-text edge-list format for forests.
//!
//! ```text
//! # two-node tree
//! nodes 2 trees 1
//! node 0 dirichlet 0.0
//! node 1 terminal 0.0 0.0
//! edge 0 1 1.0
//! ```
//!
//! Node kinds are `dirichlet <pressure>`, `neumann`, `interior` and
//! `terminal <x> <y> [...]`. Tokens are whitespace separated; `#` starts a
//! comment that runs to the end of the line.

use std::fmt::Write as _;

use crate::geom::{build_forest, EdgeSpec, Forest, GeomError, Node, NodeKind};

fn parse_err(line: usize, msg: impl Into<String>) -> GeomError {
    GeomError::Parse { line, message: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GeomError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

/// Parse a forest from the edge-list format; `first_line` offsets reported line numbers.
pub fn parse_forest_lines<'a, I>(lines: I, first_line: usize) -> Result<Forest, GeomError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut header: Option<(usize, usize)> = None;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (k, raw) in lines.into_iter().enumerate() {
        let line = first_line + k;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(head) = toks.next() else { continue };
        match head {
            "nodes" => {
                let n: usize = num(toks.next(), line, "node count")?;
                if toks.next() != Some("trees") {
                    return Err(parse_err(line, "expected `nodes N trees T`"));
                }
                let t: usize = num(toks.next(), line, "tree count")?;
                header = Some((n, t));
            }
            "node" => {
                if header.is_none() {
                    return Err(parse_err(line, "`node` before header"));
                }
                let id: usize = num(toks.next(), line, "node id")?;
                let kind = match toks.next() {
                    Some("dirichlet") => NodeKind::DirichletRoot { pressure: num(toks.next(), line, "pressure")? },
                    Some("neumann") => NodeKind::NeumannRoot,
                    Some("interior") => NodeKind::Interior,
                    Some("terminal") => {
                        let anchor = toks
                            .by_ref()
                            .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("bad coordinate `{t}`"))))
                            .collect::<Result<Vec<_>, _>>()?;
                        if anchor.is_empty() {
                            return Err(parse_err(line, "terminal needs coordinates"));
                        }
                        NodeKind::Terminal { anchor }
                    }
                    Some(other) => return Err(parse_err(line, format!("unknown node kind `{other}`"))),
                    None => return Err(parse_err(line, "missing node kind")),
                };
                if let Some(extra) = toks.next() {
                    return Err(parse_err(line, format!("unexpected token `{extra}`")));
                }
                nodes.push(Node { id, kind });
            }
            "edge" => {
                if header.is_none() {
                    return Err(parse_err(line, "`edge` before header"));
                }
                let tail = num(toks.next(), line, "tail")?;
                let head = num(toks.next(), line, "head")?;
                let k = num(toks.next(), line, "conductivity")?;
                if let Some(extra) = toks.next() {
                    return Err(parse_err(line, format!("unexpected token `{extra}`")));
                }
                edges.push(EdgeSpec::new(tail, head, k));
            }
            other => return Err(parse_err(line, format!("unknown record `{other}`"))),
        }
    }
    let (n, t) = header.ok_or_else(|| parse_err(first_line, "missing `nodes N trees T` header"))?;
    if nodes.len() != n {
        return Err(parse_err(first_line, format!("header declares {n} nodes, found {}", nodes.len())));
    }
    let forest = build_forest(nodes, &edges)?;
    if forest.num_trees() != t {
        return Err(parse_err(first_line, format!("header declares {t} trees, found {}", forest.num_trees())));
    }
    Ok(forest)
}

pub fn parse_forest(text: &str) -> Result<Forest, GeomError> {
    parse_forest_lines(text.lines(), 1)
}

/// Serialize a forest; edges are written in their root-to-terminal orientation.
pub fn write_forest(forest: &Forest) -> String {
    let mut out = String::new();
    writeln!(out, "nodes {} trees {}", forest.num_nodes(), forest.num_trees()).unwrap();
    for node in forest.nodes() {
        match &node.kind {
            NodeKind::DirichletRoot { pressure } => writeln!(out, "node {} dirichlet {:?}", node.id, pressure),
            NodeKind::NeumannRoot => writeln!(out, "node {} neumann", node.id),
            NodeKind::Interior => writeln!(out, "node {} interior", node.id),
            NodeKind::Terminal { anchor } => {
                let coords: Vec<String> = anchor.iter().map(|x| format!("{x:?}")).collect();
                writeln!(out, "node {} terminal {}", node.id, coords.join(" "))
            }
        }
        .unwrap();
    }
    for e in forest.edges() {
        writeln!(out, "edge {} {} {:?}", e.tail, e.head, e.conductivity).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const Y_TREE: &str = "\
# arterial tree
nodes 4 trees 1
node 0 dirichlet 1.0
node 1 interior
node 2 terminal 0.43 0.25 0.5   # first outlet
node 3 terminal 0.37 0.75 0.5
edge 0 1 1
edge 1 2 1
edge 3 1 1
";

    #[test]
    fn parses_and_reorients() {
        let f = parse_forest(Y_TREE).unwrap();
        assert_eq!(f.num_nodes(), 4);
        assert_eq!(f.edges()[2].tail, 1);
        assert_eq!(f.node(2).kind, NodeKind::Terminal { anchor: vec![0.43, 0.25, 0.5] });
    }

    #[test]
    fn round_trip() {
        let f = parse_forest(Y_TREE).unwrap();
        let again = parse_forest(&write_forest(&f)).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn header_mismatch_and_garbage() {
        let bad = Y_TREE.replace("trees 1", "trees 2");
        assert!(matches!(parse_forest(&bad), Err(GeomError::Parse { .. })));
        let garbage = "nodes 1 trees 1\nnode 0 neumann\nvertex 3\n";
        match parse_forest(garbage) {
            Err(GeomError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_forest("node 0 neumann\n").is_err());
        assert!(parse_forest("nodes 2 trees 1\nnode 0 neumann 3\n").is_err());
    }
}
